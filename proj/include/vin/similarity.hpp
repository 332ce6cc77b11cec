#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vin/network.hpp"

namespace vin {

/// Full ranking of a target's potential inputs by incoming edge weight.
/// Absent edges are padded with weight 0 so two networks over the same
/// universe always rank the same item set. Ties are ordered by name.
struct RankedImpactList {
    std::string target;
    std::vector<std::pair<std::string, double>> items;  ///< weight descending
};

enum class Measure { spearman, ndcg };

const char* measure_name(Measure m);
Measure measure_from_name(std::string_view name);

/// One ranked list per universe variable, ranking all other universe
/// variables by their edge weight into that target.
std::vector<RankedImpactList> to_ranked_lists(const Network& net,
                                              std::span<const std::string> universe);

/// Spearman rank correlation 1 - 6*sum(d^2)/(n(n^2-1)) with mid-ranks for
/// weight ties. Symmetric. Throws NumericError for fewer than 2 items.
double spearman(const RankedImpactList& a, const RankedImpactList& b);

/// Normalized discounted cumulative gain of the candidate order, with
/// relevance 2^(reference weight) - 1 and logarithmic position discounts.
/// Asymmetric: the reference supplies the relevances. Throws NumericError
/// when all reference weights are zero.
double ndcg(const RankedImpactList& reference, const RankedImpactList& candidate);

/// Mean per-target score over all targets with at least one nonzero-weight
/// incoming edge in the reference network. Throws NumericError when the
/// reference has no such target.
double network_similarity(const Network& reference, const Network& candidate,
                          std::span<const std::string> universe, Measure measure);

} // namespace vin
