#include "vin/drift.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "vin/errors.hpp"
#include "vin/kernels.hpp"
#include "vin/rng.hpp"

namespace vin {

std::vector<std::string> model_universe(std::span<const Model> models) {
    std::set<std::string> names;
    for (const Model& m : models) {
        names.insert(m.spec().target);
        names.insert(m.spec().inputs.begin(), m.spec().inputs.end());
    }
    return {names.begin(), names.end()};
}

std::vector<ImpactVector> admitted_impacts(std::span<const Model> models,
                                           const std::map<std::string, QualityReport>& qualities,
                                           const Dataset& data, int repeats,
                                           double nmse_threshold, std::uint64_t seed) {
    std::vector<ImpactVector> out;
    for (const Model& model : models) {
        const auto& target = model.spec().target;
        const auto it = qualities.find(target);
        if (it == qualities.end()) {
            throw DataError("no quality report for model target " + target);
        }
        if (it->second.nmse > nmse_threshold) {
            continue;
        }
        out.push_back(impact_vector(model, data, repeats, derive_seed(seed, target)));
    }
    return out;
}

Network build_reference(std::span<const Model> models,
                        const std::map<std::string, QualityReport>& qualities,
                        const Dataset& train, const DriftConfig& cfg) {
    const auto impacts = admitted_impacts(models, qualities, train, cfg.repeats,
                                          cfg.net.nmse_threshold, derive_seed(cfg.seed, 0));
    if (impacts.empty()) {
        throw DataError("no reference network: the quality gate rejected every model");
    }
    return cfg.net.acyclic ? build_acyclic(impacts, qualities, cfg.net)
                           : build_cyclic(impacts, qualities, cfg.net);
}

SimilaritySeries detect(std::span<const Model> models, const Network& reference,
                        const std::map<std::string, QualityReport>& qualities,
                        const Dataset& stream, const DriftConfig& cfg) {
    if (cfg.window.size < 10) {
        throw DataError("detect: window size must be >= 10 rows");
    }
    const auto universe = model_universe(models);

    SimilaritySeries series;
    series.reference = reference;
    series.window = cfg.window;
    for (const auto& [start, window_data] : windows(stream, cfg.window)) {
        const auto impacts =
            admitted_impacts(models, qualities, window_data, cfg.repeats,
                             cfg.net.nmse_threshold, derive_seed(cfg.seed, start));
        const Network net = cfg.net.acyclic ? build_acyclic(impacts, qualities, cfg.net)
                                            : build_cyclic(impacts, qualities, cfg.net);
        const double score = network_similarity(reference, net, universe, cfg.measure);
        series.points.push_back({start, score, score < cfg.drift_threshold});
    }
    return series;
}

double drift_correlation(const SimilaritySeries& series, std::span<const double> indicator) {
    if (series.points.empty()) {
        throw DataError("drift correlation: empty similarity series");
    }
    std::vector<double> sims;
    std::vector<double> samples;
    sims.reserve(series.points.size());
    samples.reserve(series.points.size());
    for (const SimilarityPoint& p : series.points) {
        const std::size_t center = p.window_start + series.window.size / 2;
        if (center >= indicator.size()) {
            throw DataError("drift correlation: indicator shorter than the stream");
        }
        sims.push_back(p.similarity);
        samples.push_back(indicator[center]);
    }
    const auto effectively_constant = [](std::span<const double> v) {
        const double m = kernels::mean(v);
        return kernels::variance(v) <= 1e-15 * (1.0 + m * m);
    };
    if (effectively_constant(sims)) {
        throw NumericError("drift correlation undefined: similarity series is constant");
    }
    if (effectively_constant(samples)) {
        throw NumericError("drift correlation undefined: indicator is constant");
    }
    return kernels::pearson(sims, samples);
}

void save_series_csv(const SimilaritySeries& series,
                     std::optional<std::span<const double>> indicator,
                     const std::filesystem::path& path) {
    std::string out = indicator.has_value()
                          ? "window_start,similarity,drifting,indicator_at_center\n"
                          : "window_start,similarity,drifting\n";
    char buf[32];
    for (const SimilarityPoint& p : series.points) {
        out += std::to_string(p.window_start);
        out += ',';
        const auto res = std::to_chars(buf, buf + sizeof(buf), p.similarity);
        out.append(buf, res.ptr);
        out += ',';
        out += p.drifting ? '1' : '0';
        if (indicator.has_value()) {
            out += ',';
            const std::size_t center = p.window_start + series.window.size / 2;
            const auto res2 = std::to_chars(buf, buf + sizeof(buf), (*indicator)[center]);
            out.append(buf, res2.ptr);
        }
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw DataError("cannot write " + path.string());
    }
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

} // namespace vin
