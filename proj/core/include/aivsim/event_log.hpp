#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "aivsim/vehicle.hpp"

namespace aivsim::sim {

/// Raised when a log cannot be replayed: unknown kinds, missing fields,
/// out-of-order records, or an award without its call for proposals.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EventKind {
    Arrival,
    Cfp,
    Bid,
    Award,
    MissionStart,
    Pickup,
    Drop,
    RechargeDecision,
    StationSelect,
    StationArrive,
    ChargeStart,
    ChargeEnd,
    SpeedChange,
    Fault,
    End,
};

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

using Value = std::variant<std::int64_t, double, bool, std::string>;

struct Field {
    std::string key;
    Value value;

    bool operator==(const Field&) const = default;
};

struct EventRecord {
    Tick tick = 0;
    double t = 0.0;
    EventKind kind = EventKind::Arrival;
    std::vector<Field> payload;

    const Value* find(std::string_view key) const;
    /// Typed accessors; throw IntegrityError when the key is missing or has
    /// another type.
    std::int64_t integer(std::string_view key) const;
    double real(std::string_view key) const;
    bool flag(std::string_view key) const;
    const std::string& text(std::string_view key) const;

    bool operator==(const EventRecord&) const = default;
};

class EventLog {
public:
    explicit EventLog(double dt = 0.1) : dt_(dt) {}

    double dt() const { return dt_; }
    const std::vector<EventRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    /// Appends a record stamped at `tick`. Ticks must not go backwards.
    void append(Tick tick, EventKind kind, std::vector<Field> payload);

    /// One JSON object per line: {"tick", "t", "kind", "payload"}.
    void write_ndjson(std::ostream& out) const;
    std::string to_ndjson() const;
    static EventLog read_ndjson(std::istream& in, double dt);
    static EventLog from_ndjson(std::string_view text, double dt);

    bool operator==(const EventLog&) const = default;

private:
    double dt_;
    std::vector<EventRecord> records_;
};

}  // namespace aivsim::sim
