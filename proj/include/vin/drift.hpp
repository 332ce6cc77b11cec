#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vin/dataset.hpp"
#include "vin/impacts.hpp"
#include "vin/model.hpp"
#include "vin/network.hpp"
#include "vin/similarity.hpp"

namespace vin {

/// Second-phase configuration: slide a window over a stream, recompute
/// impacts with frozen models, rebuild the network, and compare it against
/// the reference built on stable data.
struct DriftConfig {
    WindowSpec window{100, 50};
    int repeats = 5;  ///< permutation shuffles per impact
    NetworkConfig net;
    Measure measure = Measure::spearman;
    double drift_threshold = 0.5;
    std::uint64_t seed = 0;
};

struct SimilarityPoint {
    std::size_t window_start = 0;
    double similarity = 0.0;
    bool drifting = false;  ///< similarity < drift_threshold
};

struct SimilaritySeries {
    std::vector<SimilarityPoint> points;  ///< strictly increasing window_start
    Network reference;
    WindowSpec window;
};

/// Sorted union of targets and inputs across the models: the similarity
/// universe.
std::vector<std::string> model_universe(std::span<const Model> models);

/// Impact vectors on `data` for every model whose NMSE (from `qualities`)
/// passes the threshold. Impact RNG streams derive from (seed, target name),
/// so results do not depend on the order of models.
std::vector<ImpactVector> admitted_impacts(std::span<const Model> models,
                                           const std::map<std::string, QualityReport>& qualities,
                                           const Dataset& data, int repeats,
                                           double nmse_threshold, std::uint64_t seed);

/// Reference network from stable training data. Throws DataError when the
/// quality gate rejects every model.
Network build_reference(std::span<const Model> models,
                        const std::map<std::string, QualityReport>& qualities,
                        const Dataset& train, const DriftConfig& cfg);

/// Slides the window over the stream, recomputing impacts of the admitted
/// (frozen, never refitted) models per window, and scores each window's
/// network against the reference. Window w uses the RNG stream derived from
/// (seed, w's start row), so the point set of a coarser step is a subset of
/// a finer one.
SimilaritySeries detect(std::span<const Model> models, const Network& reference,
                        const std::map<std::string, QualityReport>& qualities,
                        const Dataset& stream, const DriftConfig& cfg);

/// Pearson correlation between per-window similarity and the indicator
/// sampled at each window's center row. Throws NumericError when either
/// side is constant.
double drift_correlation(const SimilaritySeries& series, std::span<const double> indicator);

/// CSV: window_start,similarity,drifting[,indicator_at_center].
void save_series_csv(const SimilaritySeries& series,
                     std::optional<std::span<const double>> indicator,
                     const std::filesystem::path& path);

} // namespace vin
