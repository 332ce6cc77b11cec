#include "vin/network.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <set>

#include "vin/errors.hpp"

namespace vin {

namespace {

constexpr std::size_t kNoDistance = std::numeric_limits<std::size_t>::max();

struct EdgeKey {
    std::size_t source;
    std::size_t target;
    auto operator<=>(const EdgeKey&) const = default;
};

/// Index-based working graph used by the builders and cycle search.
struct WorkGraph {
    std::vector<std::string> names;               // sorted lexicographically
    std::map<EdgeKey, double> edges;
    std::vector<std::vector<std::size_t>> successors() const {
        std::vector<std::vector<std::size_t>> adj(names.size());
        for (const auto& [key, w] : edges) {
            adj[key.source].push_back(key.target);
        }
        return adj;  // map order already sorts each list ascending
    }
};

std::vector<std::size_t> bfs_distances(const std::vector<std::vector<std::size_t>>& adj,
                                       std::size_t start) {
    std::vector<std::size_t> dist(adj.size(), kNoDistance);
    std::deque<std::size_t> queue{start};
    dist[start] = 0;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (const std::size_t v : adj[u]) {
            if (dist[v] == kNoDistance) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

/// Length of the shortest directed cycle, or kNoDistance when acyclic.
std::size_t min_cycle_length(const WorkGraph& g) {
    const auto adj = g.successors();
    std::size_t best = kNoDistance;
    for (std::size_t s = 0; s < adj.size(); ++s) {
        const auto dist = bfs_distances(adj, s);
        for (const auto& [key, w] : g.edges) {
            if (key.target == s && dist[key.source] != kNoDistance) {
                best = std::min(best, dist[key.source] + 1);
            }
        }
    }
    return best;
}

/// All simple directed cycles of exactly `length` nodes. Each cycle is
/// discovered once, rooted at its smallest node index.
void enumerate_cycles(const WorkGraph& g, std::size_t length,
                      std::vector<std::vector<std::size_t>>& out) {
    const auto adj = g.successors();
    std::vector<std::size_t> path;
    std::vector<bool> on_path(adj.size(), false);

    const auto dfs = [&](const auto& self, std::size_t start, std::size_t u) -> void {
        if (path.size() == length) {
            if (g.edges.contains({u, start})) {
                out.push_back(path);
            }
            return;
        }
        for (const std::size_t v : adj[u]) {
            if (v <= start || on_path[v]) {
                continue;  // root every cycle at its smallest node
            }
            path.push_back(v);
            on_path[v] = true;
            self(self, start, v);
            on_path[v] = false;
            path.pop_back();
        }
    };

    for (std::size_t s = 0; s < adj.size(); ++s) {
        path.assign(1, s);
        on_path.assign(adj.size(), false);
        on_path[s] = true;
        dfs(dfs, s, s);
    }
}

std::vector<std::vector<std::size_t>> shortest_cycles_indices(const WorkGraph& g) {
    const std::size_t length = min_cycle_length(g);
    std::vector<std::vector<std::size_t>> cycles;
    if (length != kNoDistance) {
        enumerate_cycles(g, length, cycles);
    }
    return cycles;
}

/// Candidate incoming edges of one target, strongest first.
struct CandidateList {
    std::size_t target = 0;
    std::vector<std::pair<std::size_t, double>> sources;  // sorted by weight desc, name asc
    std::size_t cursor = 0;
};

struct BuildContext {
    WorkGraph graph;
    std::vector<CandidateList> candidates;  // one per admitted target, target index order
};

BuildContext prepare(std::span<const ImpactVector> impacts,
                     const std::map<std::string, QualityReport>& qualities,
                     const NetworkConfig& cfg) {
    if (!(cfg.nmse_threshold >= 0.0 && cfg.nmse_threshold <= 1.0) ||
        !(cfg.impact_threshold >= 0.0 && cfg.impact_threshold < 1.0)) {
        throw DataError("network config: thresholds out of range");
    }

    std::set<std::string> seen_targets;
    std::set<std::string> universe;
    for (const ImpactVector& vec : impacts) {
        if (!seen_targets.insert(vec.target).second) {
            throw DataError("duplicate impact vector for target " + vec.target);
        }
        universe.insert(vec.target);
        for (const auto& entry : vec.entries) {
            if (entry.input == vec.target) {
                throw DataError("impact vector for " + vec.target + " lists itself as input");
            }
            universe.insert(entry.input);
        }
    }

    BuildContext ctx;
    ctx.graph.names.assign(universe.begin(), universe.end());
    const auto index_of = [&](const std::string& name) {
        return static_cast<std::size_t>(
            std::lower_bound(ctx.graph.names.begin(), ctx.graph.names.end(), name) -
            ctx.graph.names.begin());
    };

    for (const ImpactVector& vec : impacts) {
        const auto quality = qualities.find(vec.target);
        if (quality == qualities.end()) {
            throw DataError("no quality report for target " + vec.target);
        }
        if (quality->second.nmse > cfg.nmse_threshold) {
            continue;  // inaccurate models contribute no edges at all
        }
        CandidateList list;
        list.target = index_of(vec.target);
        for (const auto& entry : vec.entries) {
            if (entry.impact >= cfg.impact_threshold && entry.impact > 0.0) {
                list.sources.emplace_back(index_of(entry.input), entry.impact);
            }
        }
        std::sort(list.sources.begin(), list.sources.end(),
                  [&](const auto& a, const auto& b) {
                      if (a.second != b.second) {
                          return a.second > b.second;
                      }
                      return a.first < b.first;
                  });
        ctx.candidates.push_back(std::move(list));
    }
    std::sort(ctx.candidates.begin(), ctx.candidates.end(),
              [](const CandidateList& a, const CandidateList& b) { return a.target < b.target; });
    return ctx;
}

Network finish(const WorkGraph& g, bool acyclic) {
    Network net;
    net.nodes = g.names;
    net.acyclic = acyclic;
    for (const auto& [key, w] : g.edges) {
        net.edges.push_back({g.names[key.source], g.names[key.target], w});
    }
    return net;  // map iteration is already (source,target)-sorted
}

} // namespace

bool Network::has_edge(std::string_view source, std::string_view target) const {
    return std::any_of(edges.begin(), edges.end(), [&](const NetworkEdge& e) {
        return e.source == source && e.target == target;
    });
}

double Network::weight(std::string_view source, std::string_view target) const {
    for (const NetworkEdge& e : edges) {
        if (e.source == source && e.target == target) {
            return e.weight;
        }
    }
    return 0.0;
}

Network build_cyclic(std::span<const ImpactVector> impacts,
                     const std::map<std::string, QualityReport>& qualities,
                     const NetworkConfig& cfg) {
    BuildContext ctx = prepare(impacts, qualities, cfg);
    for (const CandidateList& list : ctx.candidates) {
        for (const auto& [source, weight] : list.sources) {
            ctx.graph.edges.emplace(EdgeKey{source, list.target}, weight);
        }
    }
    return finish(ctx.graph, false);
}

Network build_acyclic(std::span<const ImpactVector> impacts,
                      const std::map<std::string, QualityReport>& qualities,
                      const NetworkConfig& cfg) {
    BuildContext ctx = prepare(impacts, qualities, cfg);
    WorkGraph& g = ctx.graph;
    std::set<EdgeKey> deleted;

    // One edge per node and pass: the strongest admissible incoming impact
    // not yet present and not previously deleted.
    const auto add_pass = [&]() {
        bool added = false;
        for (CandidateList& list : ctx.candidates) {
            while (list.cursor < list.sources.size()) {
                const auto [source, weight] = list.sources[list.cursor];
                const EdgeKey key{source, list.target};
                if (deleted.contains(key) || g.edges.contains(key)) {
                    ++list.cursor;
                    continue;
                }
                g.edges.emplace(key, weight);
                ++list.cursor;
                added = true;
                break;
            }
        }
        return added;
    };

    // Weakest link on any of the current shortest cycles; ties resolved by
    // the lexicographically smallest (source,target) pair.
    const auto break_cycles = [&]() {
        for (auto cycles = shortest_cycles_indices(g); !cycles.empty();
             cycles = shortest_cycles_indices(g)) {
            bool have = false;
            EdgeKey weakest{};
            double weakest_weight = 0.0;
            for (const auto& cycle : cycles) {
                for (std::size_t i = 0; i < cycle.size(); ++i) {
                    const EdgeKey key{cycle[i], cycle[(i + 1) % cycle.size()]};
                    const double w = g.edges.at(key);
                    if (!have || w < weakest_weight ||
                        (w == weakest_weight && key < weakest)) {
                        have = true;
                        weakest = key;
                        weakest_weight = w;
                    }
                }
            }
            g.edges.erase(weakest);
            deleted.insert(weakest);
        }
    };

    bool added = add_pass();
    while (added) {
        break_cycles();
        added = add_pass();
    }
    return finish(g, true);
}

std::vector<std::vector<std::string>> find_shortest_cycles(const Network& net) {
    WorkGraph g;
    g.names = net.nodes;
    std::sort(g.names.begin(), g.names.end());
    const auto index_of = [&](const std::string& name) {
        const auto it = std::lower_bound(g.names.begin(), g.names.end(), name);
        if (it == g.names.end() || *it != name) {
            throw DataError("edge references unknown node " + name);
        }
        return static_cast<std::size_t>(it - g.names.begin());
    };
    for (const NetworkEdge& e : net.edges) {
        g.edges.emplace(EdgeKey{index_of(e.source), index_of(e.target)}, e.weight);
    }

    std::vector<std::vector<std::string>> out;
    for (const auto& cycle : shortest_cycles_indices(g)) {
        std::vector<std::string> names;
        names.reserve(cycle.size());
        for (const std::size_t i : cycle) {
            names.push_back(g.names[i]);
        }
        out.push_back(std::move(names));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_acyclic(const Network& net) {
    // Kahn's algorithm over node indices.
    std::vector<std::string> names = net.nodes;
    std::sort(names.begin(), names.end());
    const auto index_of = [&](const std::string& name) {
        return static_cast<std::size_t>(
            std::lower_bound(names.begin(), names.end(), name) - names.begin());
    };
    std::vector<std::vector<std::size_t>> adj(names.size());
    std::vector<std::size_t> indegree(names.size(), 0);
    for (const NetworkEdge& e : net.edges) {
        adj[index_of(e.source)].push_back(index_of(e.target));
        ++indegree[index_of(e.target)];
    }
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (indegree[i] == 0) {
            ready.push_back(i);
        }
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        const std::size_t u = ready.front();
        ready.pop_front();
        ++visited;
        for (const std::size_t v : adj[u]) {
            if (--indegree[v] == 0) {
                ready.push_back(v);
            }
        }
    }
    return visited == names.size();
}

std::string export_dot(const Network& net) {
    std::vector<std::string> names = net.nodes;
    std::sort(names.begin(), names.end());
    std::vector<NetworkEdge> edges = net.edges;
    std::sort(edges.begin(), edges.end(), [](const NetworkEdge& a, const NetworkEdge& b) {
        return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    });

    std::string out = "digraph {\n";
    for (const std::string& n : names) {
        out += "  " + n + ";\n";
    }
    char label[16];
    for (const NetworkEdge& e : edges) {
        std::snprintf(label, sizeof(label), "%.2f", e.weight);
        out += "  " + e.source + " -> " + e.target + " [label=\"" + label + "\"];\n";
    }
    out += "}\n";
    return out;
}

void save_edges_csv(const Network& net, const std::filesystem::path& path) {
    std::string out = "source,target,weight\n";
    char buf[32];
    for (const NetworkEdge& e : net.edges) {
        out += e.source;
        out += ',';
        out += e.target;
        out += ',';
        const auto res = std::to_chars(buf, buf + sizeof(buf), e.weight);
        out.append(buf, res.ptr);
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw DataError("cannot write " + path.string());
    }
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

} // namespace vin
