#include "aivsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace aivsim::world {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Waypoint: return "waypoint";
        case NodeKind::EntryTreadmill: return "entry";
        case NodeKind::ExitTreadmill: return "exit";
        case NodeKind::ChargingStation: return "station";
    }
    return "waypoint";
}

NodeKind parse_node_kind(std::string_view text) {
    if (text == "waypoint") return NodeKind::Waypoint;
    if (text == "entry") return NodeKind::EntryTreadmill;
    if (text == "exit") return NodeKind::ExitTreadmill;
    if (text == "station") return NodeKind::ChargingStation;
    throw GraphError("unknown node kind '" + std::string(text) + "'");
}

GraphSpec parse_graph(std::string_view json_text) {
    using nlohmann::json;
    try {
        const auto doc = json::parse(json_text);
        GraphSpec spec;
        for (const auto& n : doc.at("nodes")) {
            spec.nodes.push_back({n.at("id").get<std::string>(),
                                  parse_node_kind(n.at("kind").get<std::string>())});
        }
        for (const auto& e : doc.at("edges")) {
            spec.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                                  e.at("length_m").get<double>()});
        }
        return spec;
    } catch (const json::exception& e) {
        throw GraphError(std::string("malformed graph file: ") + e.what());
    }
}

GraphSpec load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw GraphError("cannot open graph file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

namespace {

std::vector<std::string> structural_problems(const GraphSpec& spec) {
    std::vector<std::string> out;
    std::set<std::string> ids;
    for (const auto& n : spec.nodes) {
        if (n.id.empty()) {
            out.push_back("node with empty id");
        } else if (!ids.insert(n.id).second) {
            out.push_back("duplicate node id " + n.id);
        }
    }
    for (const auto& e : spec.edges) {
        const std::string tag = e.from + "->" + e.to;
        if (!ids.count(e.from) || !ids.count(e.to)) {
            out.push_back("edge " + tag + " references an unknown node");
        }
        if (!(e.length_m > 0.0) || !std::isfinite(e.length_m)) {
            out.push_back("edge " + tag + " has non-positive length");
        }
        if (e.from == e.to) {
            out.push_back("edge " + tag + " is a self-loop");
        }
    }
    return out;
}

}  // namespace

CirculationGraph::CirculationGraph(const GraphSpec& spec) {
    if (const auto problems = structural_problems(spec); !problems.empty()) {
        throw GraphError(problems.front());
    }
    std::vector<NodeSpec> nodes = spec.nodes;
    std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& n : nodes) {
        ids_.push_back(n.id);
        kinds_.push_back(n.kind);
    }
    out_.resize(ids_.size());
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& e : spec.edges) {
        Edge edge{at(e.from), at(e.to), e.length_m};
        if (!seen.insert({edge.from.value, edge.to.value}).second) {
            throw GraphError("parallel edge " + e.from + "->" + e.to);
        }
        edges_.push_back(edge);
        out_[edge.from.value].push_back(edge);
    }
    for (auto& list : out_) {
        std::sort(list.begin(), list.end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
    }
}

std::optional<NodeIndex> CirculationGraph::find(std::string_view id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) {
        return std::nullopt;
    }
    return NodeIndex{static_cast<std::uint32_t>(it - ids_.begin())};
}

NodeIndex CirculationGraph::at(std::string_view id) const {
    if (auto n = find(id)) {
        return *n;
    }
    throw GraphError("unknown node '" + std::string(id) + "'");
}

std::optional<double> CirculationGraph::edge_length(NodeIndex from, NodeIndex to) const {
    for (const auto& e : out_edges(from)) {
        if (e.to == to) {
            return e.length_m;
        }
    }
    return std::nullopt;
}

std::vector<NodeIndex> CirculationGraph::nodes_of_kind(NodeKind kind) const {
    std::vector<NodeIndex> out;
    for (std::uint32_t i = 0; i < kinds_.size(); ++i) {
        if (kinds_[i] == kind) {
            out.push_back(NodeIndex{i});
        }
    }
    return out;
}

NodeIndex CirculationGraph::entry() const {
    const auto entries = nodes_of_kind(NodeKind::EntryTreadmill);
    if (entries.empty()) {
        throw GraphError("graph has no entry treadmill");
    }
    return entries.front();
}

namespace {

struct Label {
    double distance = std::numeric_limits<double>::infinity();
    std::vector<NodeIndex> nodes;
};

bool better(double d, const std::vector<NodeIndex>& p, const Label& than) {
    if (d != than.distance) {
        return d < than.distance;
    }
    return std::lexicographical_compare(p.begin(), p.end(), than.nodes.begin(), than.nodes.end());
}

/// Single-source labels; small graphs, so the quadratic selection is fine.
std::vector<Label> dijkstra(const CirculationGraph& g, NodeIndex from) {
    const std::size_t n = g.node_count();
    std::vector<Label> labels(n);
    std::vector<bool> done(n, false);
    labels[from.value] = {0.0, {from}};
    for (std::size_t round = 0; round < n; ++round) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i] || !std::isfinite(labels[i].distance)) {
                continue;
            }
            if (!pick || better(labels[i].distance, labels[i].nodes, labels[*pick])) {
                pick = i;
            }
        }
        if (!pick) {
            break;
        }
        done[*pick] = true;
        const Label& u = labels[*pick];
        for (const auto& e : g.out_edges(NodeIndex{static_cast<std::uint32_t>(*pick)})) {
            if (done[e.to.value]) {
                continue;
            }
            const double d = u.distance + e.length_m;
            auto path = u.nodes;
            path.push_back(e.to);
            if (better(d, path, labels[e.to.value])) {
                labels[e.to.value] = {d, std::move(path)};
            }
        }
    }
    return labels;
}

}  // namespace

Path shortest_path(const CirculationGraph& g, NodeIndex from, NodeIndex to) {
    if (from.value >= g.node_count() || to.value >= g.node_count()) {
        throw RoutingError("node index out of range");
    }
    auto labels = dijkstra(g, from);
    auto& label = labels[to.value];
    if (!std::isfinite(label.distance)) {
        throw RoutingError("no route from " + g.id(from) + " to " + g.id(to));
    }
    return {std::move(label.nodes), label.distance};
}

std::vector<std::string> validate_graph(const GraphSpec& spec) {
    auto out = structural_problems(spec);
    if (!out.empty()) {
        return out;
    }
    std::size_t entries = 0;
    std::size_t exits = 0;
    std::size_t stations = 0;
    for (const auto& n : spec.nodes) {
        entries += n.kind == NodeKind::EntryTreadmill;
        exits += n.kind == NodeKind::ExitTreadmill;
        stations += n.kind == NodeKind::ChargingStation;
    }
    if (entries != 1) {
        out.push_back("entry count: expected exactly 1 entry treadmill, found " +
                      std::to_string(entries));
    }
    if (exits < 1) {
        out.push_back("exit count: expected at least 1 exit treadmill, found 0");
    }
    if (stations != 2) {
        out.push_back("station count: expected exactly 2 charging stations, found " +
                      std::to_string(stations));
    }
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& e : spec.edges) {
        if (!pairs.insert({e.from, e.to}).second) {
            out.push_back("parallel edge " + e.from + "->" + e.to);
        }
    }
    if (entries == 0 || !out.empty()) {
        return out;
    }
    const CirculationGraph g(spec);
    const NodeIndex entry = g.entry();
    const auto from_entry = dijkstra(g, entry);
    for (const auto kind : {NodeKind::ExitTreadmill, NodeKind::ChargingStation}) {
        for (const auto n : g.nodes_of_kind(kind)) {
            if (!std::isfinite(from_entry[n.value].distance)) {
                out.push_back(std::string(to_string(kind)) + " " + g.id(n) +
                              " unreachable from entry " + g.id(entry));
            }
            if (!std::isfinite(dijkstra(g, n)[entry.value].distance)) {
                out.push_back("entry " + g.id(entry) + " unreachable from " +
                              std::string(to_string(kind)) + " " + g.id(n));
            }
        }
    }
    return out;
}

RoutingTable::RoutingTable(const CirculationGraph& g) : graph_(&g) {
    const std::size_t n = g.node_count();
    paths_.resize(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        auto labels = dijkstra(g, NodeIndex{s});
        paths_[s].resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            if (std::isfinite(labels[t].distance)) {
                diameter_ = std::max(diameter_, labels[t].distance);
                paths_[s][t] = Path{std::move(labels[t].nodes), labels[t].distance};
            }
        }
    }
}

bool RoutingTable::reachable(NodeIndex from, NodeIndex to) const {
    return paths_.at(from.value).at(to.value).has_value();
}

const Path& RoutingTable::path(NodeIndex from, NodeIndex to) const {
    const auto& p = paths_.at(from.value).at(to.value);
    if (!p) {
        throw RoutingError("no route from " + graph_->id(from) + " to " + graph_->id(to));
    }
    return *p;
}

double RoutingTable::distance(NodeIndex from, NodeIndex to) const {
    return path(from, to).distance_m;
}

namespace {

std::vector<StationDistance> sorted_stations(std::vector<StationDistance> out) {
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.distance_m != b.distance_m) {
            return a.distance_m < b.distance_m;
        }
        return a.station < b.station;
    });
    return out;
}

}  // namespace

std::vector<StationDistance> distances_to_stations(const RoutingTable& routes, NodeIndex from) {
    std::vector<StationDistance> out;
    for (const auto s : routes.graph().stations()) {
        out.push_back({s, routes.distance(from, s)});
    }
    return sorted_stations(std::move(out));
}

std::vector<StationDistance> distances_to_stations(const CirculationGraph& g, NodeIndex from) {
    std::vector<StationDistance> out;
    for (const auto s : g.stations()) {
        out.push_back({s, shortest_path(g, from, s).distance_m});
    }
    return sorted_stations(std::move(out));
}

}  // namespace aivsim::world
