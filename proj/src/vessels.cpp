#include "vin/vessels.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "vin/errors.hpp"
#include "vin/rng.hpp"

namespace vin {

namespace {

void validate(const VesselConfig& cfg) {
    if (cfg.steps < 1) {
        throw DataError("vessels: steps must be >= 1");
    }
    if (cfg.dt <= 0.0 || cfg.substeps < 1) {
        throw DataError("vessels: dt must be > 0 and substeps >= 1");
    }
    if (!(std::abs(cfg.ar_phi) < 1.0 && std::abs(cfg.ar_phi2) < 1.0)) {
        throw DataError("vessels: |ar_phi| must be < 1 for both inlets");
    }
    if (cfg.ar_sigma < 0.0 || cfg.ar_sigma2 < 0.0) {
        throw DataError("vessels: inlet sigmas must be >= 0");
    }
    if (cfg.drift_start > cfg.drift_end || cfg.drift_end > cfg.steps) {
        throw DataError("vessels: need 0 <= drift_start <= drift_end <= steps");
    }
    if (!(cfg.h0 >= cfg.h_final && cfg.h_final >= 0.0)) {
        throw DataError("vessels: need h0 >= h_final >= 0");
    }
}

} // namespace

double ar1_step(double prev, double mean, double phi, double sigma, double noise) {
    return mean + phi * (prev - mean) + sigma * noise;
}

double ar1_step(double prev, const VesselConfig& cfg, double noise) {
    return ar1_step(prev, cfg.ar_mean, cfg.ar_phi, cfg.ar_sigma, noise);
}

VesselState equilibrium_state(double u1, double u2, double h) {
    // Setting all three derivatives to zero:
    //   y3 = -2(u1-u2)/(4+h), y1 = 2(u1+y3), y2 = 2(u2-y3).
    VesselState s;
    s.u1 = u1;
    s.u2 = u2;
    s.y3 = -2.0 * (u1 - u2) / (4.0 + h);
    s.y1 = 2.0 * (u1 + s.y3);
    s.y2 = 2.0 * (u2 - s.y3);
    return s;
}

double drift_h(const VesselConfig& cfg, std::size_t row) {
    if (row < cfg.drift_start) {
        return cfg.h0;
    }
    if (row >= cfg.drift_end) {
        return cfg.h_final;
    }
    const double t = static_cast<double>(row - cfg.drift_start) /
                     static_cast<double>(cfg.drift_end - cfg.drift_start);
    return cfg.h0 + (cfg.h_final - cfg.h0) * t;
}

void integrate_row(VesselState& state, double h, double dt, int substeps) {
    const double step = dt / substeps;
    for (int k = 0; k < substeps; ++k) {
        const double dy1 = state.u1 + state.y3 - state.y1 / 2.0;
        const double dy2 = state.u2 - state.y3 - state.y2 / 2.0;
        const double dy3 = -(state.y1 - state.y2) - h * state.y3;
        state.y1 += step * dy1;
        state.y2 += step * dy2;
        state.y3 += step * dy3;
    }
}

Dataset simulate(const VesselConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);

    VesselState state = equilibrium_state(cfg.ar_mean, cfg.ar_mean, cfg.h0);
    for (std::size_t k = 0; k < cfg.burn_in; ++k) {
        state.u1 = ar1_step(state.u1, cfg, rng.normal());
        state.u2 = ar1_step(state.u2, cfg.ar_mean, cfg.ar_phi2, cfg.ar_sigma2, rng.normal());
        integrate_row(state, cfg.h0, cfg.dt, cfg.substeps);
    }

    // One extra row on each side so that after differentiation the first and
    // last emitted rows are central-difference rows like all others. The
    // leading extra row belongs to the pre-drift regime, the trailing one
    // extends the final h value.
    const std::size_t total = cfg.steps + 2;
    std::vector<double> u1(total), u2(total), y1(total), y2(total), y3(total), h(total);
    for (std::size_t row = 0; row < total; ++row) {
        state.u1 = ar1_step(state.u1, cfg, rng.normal());
        state.u2 = ar1_step(state.u2, cfg.ar_mean, cfg.ar_phi2, cfg.ar_sigma2, rng.normal());
        const double h_row =
            row == 0 ? cfg.h0 : drift_h(cfg, std::min(row - 1, cfg.steps - 1));
        u1[row] = state.u1;
        u2[row] = state.u2;
        y1[row] = state.y1;
        y2[row] = state.y2;
        y3[row] = state.y3;
        h[row] = h_row;
        if (!(std::isfinite(state.y1) && std::isfinite(state.y2) && std::isfinite(state.y3) &&
              std::isfinite(state.u1) && std::isfinite(state.u2))) {
            throw NumericError("vessels: non-finite state at row " + std::to_string(row));
        }
        integrate_row(state, h_row, cfg.dt, cfg.substeps);
    }

    Dataset raw;
    raw.add_column("u1", std::move(u1));
    raw.add_column("u2", std::move(u2));
    raw.add_column("y1", std::move(y1));
    raw.add_column("y2", std::move(y2));
    raw.add_column("y3", std::move(y3));
    raw.add_column("h", std::move(h));

    const std::vector<std::string> fill_states{"y1", "y2"};
    const Dataset with_deriv = add_derivatives(raw, fill_states, cfg.dt).slice(1, cfg.steps);

    const std::vector<std::string> order{"u1",    "u2",    "y1",    "y2",    "d1_y1",
                                         "d2_y1", "d1_y2", "d2_y2", "y3",    "h"};
    Dataset out = with_deriv.select(order);
    for (const std::string& name : hidden_columns()) {
        out.set_hidden(name, true);
    }
    return out;
}

const std::vector<std::string>& hidden_columns() {
    static const std::vector<std::string> cols{"y3", "h"};
    return cols;
}

namespace {

void write_atomic_csv(const Dataset& ds, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    save_csv(ds, tmp);
    std::filesystem::rename(tmp, path);
}

nlohmann::ordered_json config_json(const VesselConfig& cfg) {
    return nlohmann::ordered_json{
        {"steps", cfg.steps},       {"dt", cfg.dt},
        {"substeps", cfg.substeps}, {"ar_mean", cfg.ar_mean},
        {"ar_phi", cfg.ar_phi},     {"ar_phi2", cfg.ar_phi2},
        {"ar_sigma", cfg.ar_sigma}, {"ar_sigma2", cfg.ar_sigma2},
        {"h0", cfg.h0},             {"h_final", cfg.h_final},
        {"drift_start", cfg.drift_start}, {"drift_end", cfg.drift_end},
        {"seed", cfg.seed},         {"burn_in", cfg.burn_in},
    };
}

} // namespace

std::vector<std::filesystem::path> generate_benchmark(const VesselConfig& base,
                                                      const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw DataError("cannot create output directory " + out_dir.string());
    }

    constexpr int kInstances = 10;
    std::vector<std::filesystem::path> written;
    nlohmann::ordered_json meta;
    meta["config"] = config_json(base);
    meta["hidden"] = hidden_columns();
    meta["instances"] = nlohmann::ordered_json::array();

    char name[32];
    for (int i = 1; i <= kInstances; ++i) {
        VesselConfig cfg = base;
        cfg.h_final = cfg.h0;
        cfg.drift_start = 0;
        cfg.drift_end = 0;
        cfg.seed = derive_seed(base.seed, static_cast<std::uint64_t>(i));
        std::snprintf(name, sizeof(name), "stable_%02d.csv", i);
        const std::filesystem::path path = out_dir / name;
        write_atomic_csv(simulate(cfg), path);
        written.push_back(path);
        meta["instances"].push_back({{"file", name}, {"seed", cfg.seed}, {"drifting", false}});
    }
    for (int i = 1; i <= kInstances; ++i) {
        VesselConfig cfg = base;
        cfg.seed = derive_seed(base.seed, static_cast<std::uint64_t>(100 + i));
        std::snprintf(name, sizeof(name), "drift_%02d.csv", i);
        const std::filesystem::path path = out_dir / name;
        write_atomic_csv(simulate(cfg), path);
        written.push_back(path);
        meta["instances"].push_back({{"file", name}, {"seed", cfg.seed}, {"drifting", true}});
    }

    const std::filesystem::path meta_tmp = out_dir / "benchmark_meta.json.tmp";
    {
        std::ofstream f(meta_tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw DataError("cannot write " + meta_tmp.string());
        }
        f << meta.dump(2) << '\n';
    }
    std::filesystem::rename(meta_tmp, out_dir / "benchmark_meta.json");
    return written;
}

} // namespace vin
