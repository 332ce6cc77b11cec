#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vin/errors.hpp"
#include "vin/model.hpp"
#include "vin/rng.hpp"

namespace vin::detail {

namespace {

struct TreeBuilder {
    std::span<const std::span<const double>> inputs;
    std::span<const double> target;
    int min_leaf;
    std::size_t features_per_split;
    bool resample_features = false;
    Rng* rng;
    TreeNodes nodes;

    std::vector<std::size_t> feature_pool;
    std::vector<std::size_t> sorted;  // scratch for per-node sorting

    std::int32_t add_leaf(double mean) {
        nodes.feature.push_back(-1);
        nodes.threshold.push_back(0.0);
        nodes.left.push_back(-1);
        nodes.right.push_back(-1);
        nodes.value.push_back(mean);
        return static_cast<std::int32_t>(nodes.feature.size() - 1);
    }

    std::int32_t build(std::vector<std::size_t>& rows) {
        const auto m = rows.size();
        double sum = 0.0;
        double sumsq = 0.0;
        for (const std::size_t r : rows) {
            sum += target[r];
            sumsq += target[r] * target[r];
        }
        const double mean = sum / static_cast<double>(m);
        const double sse = sumsq - sum * mean;

        if (m < 2 * static_cast<std::size_t>(min_leaf) || sse <= 1e-12 * (1.0 + sumsq)) {
            return add_leaf(mean);
        }

        if (resample_features) {
            // Fresh feature subset for this split.
            for (std::size_t i = 0; i < features_per_split; ++i) {
                const std::size_t j = i + rng->bounded(feature_pool.size() - i);
                std::swap(feature_pool[i], feature_pool[j]);
            }
        }

        double best_gain = 0.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;

        for (std::size_t fi = 0; fi < features_per_split; ++fi) {
            const std::size_t f = feature_pool[fi];
            const auto column = inputs[f];
            sorted = rows;
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                return column[a] < column[b];
            });

            double left_sum = 0.0;
            for (std::size_t i = 1; i < m; ++i) {
                left_sum += target[sorted[i - 1]];
                if (column[sorted[i - 1]] >= column[sorted[i]]) {
                    continue;  // can only split between distinct values
                }
                if (i < static_cast<std::size_t>(min_leaf) ||
                    m - i < static_cast<std::size_t>(min_leaf)) {
                    continue;
                }
                const double right_sum = sum - left_sum;
                // Variance reduction, up to the constant parent SSE. Ties keep
                // the first candidate, so trees are deterministic per seed.
                const double gain = left_sum * left_sum / static_cast<double>(i) +
                                    right_sum * right_sum / static_cast<double>(m - i) -
                                    sum * mean;
                if (!found || gain > best_gain + 1e-15) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = (column[sorted[i - 1]] + column[sorted[i]]) / 2.0;
                    found = true;
                }
            }
        }

        if (!found) {
            return add_leaf(mean);
        }

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        left_rows.reserve(m);
        right_rows.reserve(m);
        const auto column = inputs[best_feature];
        for (const std::size_t r : rows) {
            (column[r] <= best_threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const std::int32_t me = add_leaf(mean);  // placeholder, turned into a split below
        nodes.feature[static_cast<std::size_t>(me)] = static_cast<std::int32_t>(best_feature);
        nodes.threshold[static_cast<std::size_t>(me)] = best_threshold;
        const std::int32_t l = build(left_rows);
        const std::int32_t r = build(right_rows);
        nodes.left[static_cast<std::size_t>(me)] = l;
        nodes.right[static_cast<std::size_t>(me)] = r;
        return me;
    }
};

} // namespace

ForestFit fit_forest(std::span<const std::span<const double>> inputs,
                     std::span<const double> target, const RandomForestParams& params,
                     std::uint64_t seed) {
    if (params.trees < 1) {
        throw DataError("random forest: trees must be >= 1");
    }
    if (!(params.row_ratio > 0.0 && params.row_ratio <= 1.0) ||
        !(params.feature_ratio > 0.0 && params.feature_ratio <= 1.0)) {
        throw DataError("random forest: sampling ratios must lie in (0,1]");
    }
    if (params.min_leaf < 1) {
        throw DataError("random forest: min_leaf must be >= 1");
    }

    const std::size_t n = target.size();
    const std::size_t n_features = inputs.size();
    const auto sample_size = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(params.row_ratio * static_cast<double>(n))), 1, n);
    const auto features_per_split = std::clamp<std::size_t>(
        static_cast<std::size_t>(
            std::ceil(params.feature_ratio * static_cast<double>(n_features))),
        1, n_features);

    ForestFit fit;
    fit.trees.reserve(static_cast<std::size_t>(params.trees));

    std::vector<std::size_t> all_rows(n);
    for (int t = 0; t < params.trees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));

        // Subsample without replacement (partial Fisher-Yates).
        std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
        for (std::size_t i = 0; i < sample_size; ++i) {
            const std::size_t j = i + rng.bounded(n - i);
            std::swap(all_rows[i], all_rows[j]);
        }
        std::vector<std::size_t> rows(all_rows.begin(),
                                      all_rows.begin() + static_cast<std::ptrdiff_t>(sample_size));

        TreeBuilder builder;
        builder.inputs = inputs;
        builder.target = target;
        builder.min_leaf = params.min_leaf;
        builder.features_per_split = features_per_split;
        builder.resample_features = !params.features_per_tree;
        builder.rng = &rng;
        builder.feature_pool.resize(n_features);
        std::iota(builder.feature_pool.begin(), builder.feature_pool.end(), std::size_t{0});
        if (params.features_per_tree) {
            // One fixed feature subset for the whole tree.
            for (std::size_t i = 0; i < features_per_split; ++i) {
                const std::size_t j = i + rng.bounded(n_features - i);
                std::swap(builder.feature_pool[i], builder.feature_pool[j]);
            }
        }
        builder.build(rows);
        fit.trees.push_back(std::move(builder.nodes));
    }
    return fit;
}

} // namespace vin::detail
