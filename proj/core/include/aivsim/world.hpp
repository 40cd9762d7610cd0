#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aivsim::world {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RoutingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense index of a node. Nodes are indexed in ascending id order, so
/// comparing indices compares ids.
struct NodeIndex {
    std::uint32_t value = 0;
    auto operator<=>(const NodeIndex&) const = default;
};

enum class NodeKind { Waypoint, EntryTreadmill, ExitTreadmill, ChargingStation };

std::string_view to_string(NodeKind kind);
NodeKind parse_node_kind(std::string_view text);

struct NodeSpec {
    std::string id;
    NodeKind kind = NodeKind::Waypoint;
};

struct EdgeSpec {
    std::string from;
    std::string to;
    double length_m = 0.0;
};

/// Raw graph description as read from a file, before indexing.
struct GraphSpec {
    std::vector<NodeSpec> nodes;
    std::vector<EdgeSpec> edges;
};

GraphSpec parse_graph(std::string_view json_text);
GraphSpec load_graph(const std::filesystem::path& path);

/// Every violated invariant of the circulation plan, in a stable order.
/// Empty means the graph is usable.
std::vector<std::string> validate_graph(const GraphSpec& spec);

struct Edge {
    NodeIndex from;
    NodeIndex to;
    double length_m;
};

class CirculationGraph {
public:
    /// Indexes the spec. Throws GraphError on structural problems that make
    /// indexing impossible (duplicate ids, dangling edges, bad lengths); the
    /// operational invariants are checked by validate_graph.
    explicit CirculationGraph(const GraphSpec& spec);

    std::size_t node_count() const { return ids_.size(); }
    const std::string& id(NodeIndex n) const { return ids_.at(n.value); }
    NodeKind kind(NodeIndex n) const { return kinds_.at(n.value); }
    std::optional<NodeIndex> find(std::string_view id) const;
    NodeIndex at(std::string_view id) const;

    const std::vector<Edge>& edges() const { return edges_; }
    /// Outgoing edges sorted by destination index.
    const std::vector<Edge>& out_edges(NodeIndex n) const { return out_.at(n.value); }
    std::optional<double> edge_length(NodeIndex from, NodeIndex to) const;

    std::vector<NodeIndex> nodes_of_kind(NodeKind kind) const;
    NodeIndex entry() const;
    std::vector<NodeIndex> exits() const { return nodes_of_kind(NodeKind::ExitTreadmill); }
    std::vector<NodeIndex> stations() const { return nodes_of_kind(NodeKind::ChargingStation); }

private:
    std::vector<std::string> ids_;
    std::vector<NodeKind> kinds_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Edge>> out_;
};

struct Path {
    std::vector<NodeIndex> nodes;
    double distance_m = 0.0;
};

/// Dijkstra over positive lengths. Among equal-length routes the
/// lexicographically smallest node-id sequence wins. Throws RoutingError when
/// `to` is unreachable.
Path shortest_path(const CirculationGraph& g, NodeIndex from, NodeIndex to);

/// All-pairs shortest paths, computed once per graph.
class RoutingTable {
public:
    explicit RoutingTable(const CirculationGraph& g);

    const CirculationGraph& graph() const { return *graph_; }
    bool reachable(NodeIndex from, NodeIndex to) const;
    /// Throws RoutingError when unreachable.
    double distance(NodeIndex from, NodeIndex to) const;
    const Path& path(NodeIndex from, NodeIndex to) const;
    /// Longest finite shortest-path distance over all ordered pairs.
    double diameter() const { return diameter_; }

private:
    const CirculationGraph* graph_;
    std::vector<std::vector<std::optional<Path>>> paths_;
    double diameter_ = 0.0;
};

struct StationDistance {
    NodeIndex station;
    double distance_m;
};

/// Both charging stations, nearest first, ties by station id. Throws
/// RoutingError if a station cannot be reached.
std::vector<StationDistance> distances_to_stations(const CirculationGraph& g, NodeIndex from);
std::vector<StationDistance> distances_to_stations(const RoutingTable& routes, NodeIndex from);

/// Single-occupant charging bay with a first-in-first-out waiting line.
template <typename AgentId>
class StationState {
public:
    explicit StationState(NodeIndex station) : station_(station) {}

    NodeIndex station() const { return station_; }
    const std::optional<AgentId>& occupant() const { return occupant_; }
    const std::deque<AgentId>& waiting() const { return waiting_; }
    bool free() const { return !occupant_ && waiting_.empty(); }

    /// Agent reaches the bay. Returns true when it takes the bay at once.
    bool arrive(AgentId agent) {
        if (occupant_ == agent || contains(agent)) {
            throw std::logic_error("agent already at station");
        }
        if (free()) {
            occupant_ = agent;
            return true;
        }
        waiting_.push_back(agent);
        return false;
    }

    /// Moves the head of the waiting line into the empty bay.
    std::optional<AgentId> admit_next() {
        if (occupant_ || waiting_.empty()) {
            return std::nullopt;
        }
        occupant_ = waiting_.front();
        waiting_.pop_front();
        return occupant_;
    }

    void release(AgentId agent) {
        if (occupant_ != agent) {
            throw std::logic_error("releasing a station the agent does not occupy");
        }
        occupant_.reset();
    }

private:
    bool contains(AgentId agent) const {
        for (const auto& w : waiting_) {
            if (w == agent) {
                return true;
            }
        }
        return false;
    }

    NodeIndex station_;
    std::optional<AgentId> occupant_;
    std::deque<AgentId> waiting_;
};

}  // namespace aivsim::world
