#include "vin/impacts.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "vin/errors.hpp"
#include "vin/kernels.hpp"
#include "vin/rng.hpp"

namespace vin {

namespace {

double model_nmse(const Model& model, const Dataset& ds) {
    const std::vector<double> pred = model.predict(ds);
    return kernels::nmse(pred, ds.column(model.spec().target));
}

} // namespace

double raw_impact(const Model& model, const Dataset& ds, std::string_view var, int repeats,
                  std::uint64_t seed) {
    const auto& inputs = model.spec().inputs;
    if (std::find(inputs.begin(), inputs.end(), var) == inputs.end()) {
        throw DataError("raw_impact: '" + std::string(var) + "' is not a model input");
    }
    if (repeats < 1) {
        throw DataError("raw_impact: repeats must be >= 1");
    }
    if (ds.row_count() < 2) {
        throw DataError("raw_impact: need at least 2 rows");
    }

    const double baseline = model_nmse(model, ds);
    double total = 0.0;
    for (int r = 0; r < repeats; ++r) {
        const Dataset shuffled =
            permute_column(ds, var, derive_seed(seed, static_cast<std::uint64_t>(r)));
        total += model_nmse(model, shuffled) - baseline;
    }
    return std::max(0.0, total / repeats);
}

ImpactVector impact_vector(const Model& model, const Dataset& ds, int repeats,
                           std::uint64_t seed) {
    const auto& inputs = model.spec().inputs;
    ImpactVector result;
    result.target = model.spec().target;
    result.entries.reserve(inputs.size());

    double max_raw = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const double raw =
            raw_impact(model, ds, inputs[i], repeats, derive_seed(seed, i));
        max_raw = std::max(max_raw, raw);
        result.entries.push_back({inputs[i], 0.0, raw});
    }
    if (max_raw > 0.0) {
        for (auto& entry : result.entries) {
            entry.impact = entry.raw / max_raw;
        }
    }
    return result;
}

void save_impacts_csv(std::span<const ImpactVector> impacts,
                      const std::filesystem::path& path) {
    std::string out = "target,input,impact,raw_increase\n";
    char buf[32];
    const auto append_double = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.append(buf, res.ptr);
    };
    for (const ImpactVector& vec : impacts) {
        for (const auto& entry : vec.entries) {
            out += vec.target;
            out += ',';
            out += entry.input;
            out += ',';
            append_double(entry.impact);
            out += ',';
            append_double(entry.raw);
            out += '\n';
        }
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw DataError("cannot write " + path.string());
    }
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

} // namespace vin
