#include "aivsim/event_log.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace aivsim::sim {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 15> kKindNames{{
    {EventKind::Arrival, "arrival"},
    {EventKind::Cfp, "cfp"},
    {EventKind::Bid, "bid"},
    {EventKind::Award, "award"},
    {EventKind::MissionStart, "mission_start"},
    {EventKind::Pickup, "pickup"},
    {EventKind::Drop, "drop"},
    {EventKind::RechargeDecision, "recharge_decision"},
    {EventKind::StationSelect, "station_select"},
    {EventKind::StationArrive, "station_arrive"},
    {EventKind::ChargeStart, "charge_start"},
    {EventKind::ChargeEnd, "charge_end"},
    {EventKind::SpeedChange, "speed_change"},
    {EventKind::Fault, "fault"},
    {EventKind::End, "end"},
}};

template <typename T>
const T& typed(const EventRecord& r, std::string_view key, const char* type) {
    const auto* v = r.find(key);
    if (!v) {
        throw IntegrityError(std::string(to_string(r.kind)) + " record at tick " +
                             std::to_string(r.tick) + " lacks '" + std::string(key) + "'");
    }
    const auto* x = std::get_if<T>(v);
    if (!x) {
        throw IntegrityError("field '" + std::string(key) + "' of " +
                             std::string(to_string(r.kind)) + " is not " + type);
    }
    return *x;
}

}  // namespace

std::string_view to_string(EventKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

EventKind parse_event_kind(std::string_view text) {
    for (const auto& [k, name] : kKindNames) {
        if (name == text) {
            return k;
        }
    }
    throw IntegrityError("unknown event kind '" + std::string(text) + "'");
}

const Value* EventRecord::find(std::string_view key) const {
    for (const auto& f : payload) {
        if (f.key == key) {
            return &f.value;
        }
    }
    return nullptr;
}

std::int64_t EventRecord::integer(std::string_view key) const {
    return typed<std::int64_t>(*this, key, "an integer");
}

double EventRecord::real(std::string_view key) const {
    const auto* v = find(key);
    if (v) {
        if (const auto* i = std::get_if<std::int64_t>(v)) {
            return static_cast<double>(*i);
        }
    }
    return typed<double>(*this, key, "a number");
}

bool EventRecord::flag(std::string_view key) const { return typed<bool>(*this, key, "a boolean"); }

const std::string& EventRecord::text(std::string_view key) const {
    return typed<std::string>(*this, key, "a string");
}

void EventLog::append(Tick tick, EventKind kind, std::vector<Field> payload) {
    if (!records_.empty() && tick < records_.back().tick) {
        throw IntegrityError("event at tick " + std::to_string(tick) + " after tick " +
                             std::to_string(records_.back().tick));
    }
    records_.push_back({tick, static_cast<double>(tick) * dt_, kind, std::move(payload)});
}

void EventLog::write_ndjson(std::ostream& out) const {
    for (const auto& r : records_) {
        nlohmann::ordered_json payload = nlohmann::ordered_json::object();
        for (const auto& f : r.payload) {
            std::visit([&](const auto& v) { payload[f.key] = v; }, f.value);
        }
        nlohmann::ordered_json line;
        line["tick"] = r.tick;
        line["t"] = r.t;
        line["kind"] = to_string(r.kind);
        line["payload"] = std::move(payload);
        out << line.dump() << '\n';
    }
}

std::string EventLog::to_ndjson() const {
    std::ostringstream out;
    write_ndjson(out);
    return out.str();
}

EventLog EventLog::read_ndjson(std::istream& in, double dt) {
    EventLog log(dt);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw IntegrityError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("tick") || !j["tick"].is_number_integer() ||
            !j.contains("kind") || !j["kind"].is_string() || !j.contains("payload") ||
            !j["payload"].is_object()) {
            throw IntegrityError("line " + std::to_string(line_no) + ": malformed record");
        }
        std::vector<Field> payload;
        for (const auto& [key, v] : j["payload"].items()) {
            if (v.is_boolean()) {
                payload.push_back({key, v.get<bool>()});
            } else if (v.is_number_integer()) {
                payload.push_back({key, v.get<std::int64_t>()});
            } else if (v.is_number()) {
                payload.push_back({key, v.get<double>()});
            } else if (v.is_string()) {
                payload.push_back({key, v.get<std::string>()});
            } else {
                throw IntegrityError("line " + std::to_string(line_no) + ": field '" + key +
                                     "' has an unsupported type");
            }
        }
        log.append(j["tick"].get<Tick>(), parse_event_kind(j["kind"].get<std::string>()),
                   std::move(payload));
    }
    return log;
}

EventLog EventLog::from_ndjson(std::string_view text, double dt) {
    std::istringstream in{std::string(text)};
    return read_ndjson(in, dt);
}

}  // namespace aivsim::sim
