#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vin/dataset.hpp"

namespace vin {

/// Configuration of the two-vessel benchmark simulator. Two tanks with level
/// proportional outflow are fed by AR(1) inlets and coupled by a channel
/// whose coefficient h may decay linearly over a row range (the drift).
struct VesselConfig {
    std::size_t steps = 1000;  ///< emitted rows
    double dt = 0.2;           ///< time between rows
    int substeps = 200;        ///< Euler substeps per row
    double ar_mean = 2.0;
    double ar_phi = 0.97;    ///< persistence of inlet u1 (slow wander)
    double ar_phi2 = 0.8;    ///< persistence of inlet u2
    double ar_sigma = 0.05;  ///< innovation scale of inlet u1
    double ar_sigma2 = 0.35; ///< innovation scale of inlet u2; the two inlets are
                             ///< deliberately dissimilar so impact rankings carry
                             ///< no exact ties and the channel flow dominates the
                             ///< quiet vessel's derivative
    double h0 = 2.0;
    double h_final = 2.0;
    std::size_t drift_start = 0;
    std::size_t drift_end = 0;  ///< h decays over [drift_start, drift_end)
    std::uint64_t seed = 1;
    std::size_t burn_in = 200;  ///< rows simulated and discarded before emitting
};

struct VesselState {
    double y1 = 0.0;  ///< fill state, vessel 1
    double y2 = 0.0;  ///< fill state, vessel 2
    double y3 = 0.0;  ///< channel flow rate
    double u1 = 0.0;  ///< inlet flow, vessel 1
    double u2 = 0.0;  ///< inlet flow, vessel 2
};

/// One AR(1) update: mean + phi*(prev-mean) + sigma*noise.
double ar1_step(double prev, double mean, double phi, double sigma, double noise);
/// Same, with the u1 parameters from the config.
double ar1_step(double prev, const VesselConfig& cfg, double noise);

/// Fixed point of the vessel dynamics for constant inlets and coefficient h.
VesselState equilibrium_state(double u1, double u2, double h);

/// Channel coefficient for a given emitted row under the drift schedule.
double drift_h(const VesselConfig& cfg, std::size_t row);

/// Advances the fill states and channel flow by one emitted step (substeps
/// explicit-Euler updates), holding the inlets u1, u2 constant.
void integrate_row(VesselState& state, double h, double dt, int substeps);

/// Runs the simulator and returns the emitted table with columns
/// u1, u2, y1, y2, d1_y1, d2_y1, d1_y2, d2_y2, y3, h. The columns y3 and h
/// are flagged hidden: they exist for evaluation only and must not feed
/// models. Throws NumericError when the state becomes non-finite.
Dataset simulate(const VesselConfig& cfg);

/// Names of the evaluation-only columns in simulator output.
const std::vector<std::string>& hidden_columns();

/// Writes the benchmark: stable_01..10.csv (h held at h0) and
/// drift_01..10.csv (h decaying per the base schedule), 'steps' rows each,
/// with per-instance seeds derived from the base seed. A sidecar
/// benchmark_meta.json records the configuration and the hidden columns.
/// Returns the written CSV paths.
std::vector<std::filesystem::path> generate_benchmark(const VesselConfig& base,
                                                      const std::filesystem::path& out_dir);

} // namespace vin
