#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vin/impacts.hpp"
#include "vin/model.hpp"

namespace vin {

/// Directed weighted graph over variables: an edge source->target with
/// weight w means the input `source` has normalized impact w on the model
/// predicting `target`. Nodes and edges are kept lexicographically sorted.
struct NetworkEdge {
    std::string source;
    std::string target;
    double weight = 0.0;
};

struct Network {
    std::vector<std::string> nodes;
    std::vector<NetworkEdge> edges;
    bool acyclic = false;

    bool has_edge(std::string_view source, std::string_view target) const;
    /// Edge weight, or 0 when the edge is absent.
    double weight(std::string_view source, std::string_view target) const;
};

struct NetworkConfig {
    double nmse_threshold = 0.2;   ///< max model NMSE to contribute edges
    double impact_threshold = 0.1; ///< min normalized impact for an edge
    bool acyclic = false;
};

/// All admissible edges: every impact >= impact_threshold (and > 0) of every
/// target whose model NMSE passes the quality gate. Cycles are kept.
Network build_cyclic(std::span<const ImpactVector> impacts,
                     const std::map<std::string, QualityReport>& qualities,
                     const NetworkConfig& cfg);

/// Cycle-free construction: each node first receives its strongest
/// admissible incoming edge; then, alternating, every shortest cycle is
/// broken by deleting its weakest link (ties: lexicographically smallest
/// (source,target)) and each node receives its next-strongest admissible
/// incoming edge. Deleted edges are never re-added. Stops when a full pass
/// adds nothing; the result is acyclic.
Network build_acyclic(std::span<const ImpactVector> impacts,
                      const std::map<std::string, QualityReport>& qualities,
                      const NetworkConfig& cfg);

/// All directed simple cycles of minimal length, each reported as a node
/// sequence starting at its lexicographically smallest node; empty when the
/// graph is acyclic. Deterministic order.
std::vector<std::vector<std::string>> find_shortest_cycles(const Network& net);

/// True when the edge set contains no directed cycle (topological sort).
bool is_acyclic(const Network& net);

/// GraphViz DOT text with 2-decimal edge labels and lexicographic order.
std::string export_dot(const Network& net);

/// CSV edge list: source,target,weight (full precision).
void save_edges_csv(const Network& net, const std::filesystem::path& path);

} // namespace vin
