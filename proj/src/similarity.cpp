#include "vin/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "vin/errors.hpp"

namespace vin {

const char* measure_name(Measure m) {
    return m == Measure::spearman ? "spearman" : "ndcg";
}

Measure measure_from_name(std::string_view name) {
    if (name == "spearman") {
        return Measure::spearman;
    }
    if (name == "ndcg") {
        return Measure::ndcg;
    }
    throw DataError("unknown similarity measure: " + std::string(name));
}

std::vector<RankedImpactList> to_ranked_lists(const Network& net,
                                              std::span<const std::string> universe) {
    const std::set<std::string> known(universe.begin(), universe.end());
    for (const std::string& node : net.nodes) {
        if (!known.contains(node)) {
            throw DataError("universe does not cover network node " + node);
        }
    }

    std::vector<RankedImpactList> lists;
    lists.reserve(universe.size());
    for (const std::string& target : universe) {
        RankedImpactList list;
        list.target = target;
        for (const std::string& input : universe) {
            if (input != target) {
                list.items.emplace_back(input, net.weight(input, target));
            }
        }
        std::stable_sort(list.items.begin(), list.items.end(),
                         [](const auto& a, const auto& b) {
                             if (a.second != b.second) {
                                 return a.second > b.second;
                             }
                             return a.first < b.first;
                         });
        lists.push_back(std::move(list));
    }
    return lists;
}

namespace {

void require_same_items(const RankedImpactList& a, const RankedImpactList& b) {
    if (a.items.size() != b.items.size()) {
        throw DataError("ranked lists cover different item sets");
    }
    std::set<std::string> sa;
    std::set<std::string> sb;
    for (const auto& [name, w] : a.items) {
        sa.insert(name);
    }
    for (const auto& [name, w] : b.items) {
        sb.insert(name);
    }
    if (sa != sb) {
        throw DataError("ranked lists cover different item sets");
    }
}

/// Positional ranks (1-based) with mid-ranks for weight ties. The list is
/// already sorted by descending weight.
std::map<std::string, double> mid_ranks(const RankedImpactList& list) {
    std::map<std::string, double> ranks;
    const auto& items = list.items;
    std::size_t i = 0;
    while (i < items.size()) {
        std::size_t j = i;
        while (j + 1 < items.size() && items[j + 1].second == items[i].second) {
            ++j;
        }
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[items[k].first] = shared;
        }
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(const RankedImpactList& a, const RankedImpactList& b) {
    require_same_items(a, b);
    const auto n = static_cast<double>(a.items.size());
    if (a.items.size() < 2) {
        throw NumericError("spearman: need at least 2 items");
    }
    const auto ranks_a = mid_ranks(a);
    const auto ranks_b = mid_ranks(b);
    double sum_sq = 0.0;
    for (const auto& [name, rank] : ranks_a) {
        const double d = rank - ranks_b.at(name);
        sum_sq += d * d;
    }
    return 1.0 - 6.0 * sum_sq / (n * (n * n - 1.0));
}

double ndcg(const RankedImpactList& reference, const RankedImpactList& candidate) {
    require_same_items(reference, candidate);
    std::map<std::string, double> relevance;
    bool any_positive = false;
    for (const auto& [name, w] : reference.items) {
        relevance[name] = w;
        any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) {
        throw NumericError("ndcg: all reference weights are zero");
    }

    const auto dcg = [&](const RankedImpactList& list) {
        double acc = 0.0;
        for (std::size_t p = 0; p < list.items.size(); ++p) {
            const double gain = std::exp2(relevance.at(list.items[p].first)) - 1.0;
            acc += gain / std::log2(static_cast<double>(p + 2));
        }
        return acc;
    };
    // The reference list is sorted by its own weights, i.e. it is the ideal
    // ordering for these relevances.
    return dcg(candidate) / dcg(reference);
}

double network_similarity(const Network& reference, const Network& candidate,
                          std::span<const std::string> universe, Measure measure) {
    const auto ref_lists = to_ranked_lists(reference, universe);
    const auto cand_lists = to_ranked_lists(candidate, universe);

    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t t = 0; t < ref_lists.size(); ++t) {
        const bool has_reference_edge =
            std::any_of(ref_lists[t].items.begin(), ref_lists[t].items.end(),
                        [](const auto& item) { return item.second > 0.0; });
        if (!has_reference_edge) {
            continue;
        }
        total += measure == Measure::spearman ? spearman(ref_lists[t], cand_lists[t])
                                              : ndcg(ref_lists[t], cand_lists[t]);
        ++counted;
    }
    if (counted == 0) {
        throw NumericError("network similarity undefined: reference network has no edges");
    }
    return total / static_cast<double>(counted);
}

} // namespace vin
