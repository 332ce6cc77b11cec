// vindrift: concept drift detection with variable interaction networks.
//
// Pipeline: `simulate` writes the two-vessel benchmark, `train` fits one
// regression model per core variable on the stable instances, `detect`
// tracks network similarity over the drifting streams, and `evaluate`
// sweeps window sizes and reports how well the similarity decay correlates
// with the hidden channel coefficient.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vin/dataset.hpp"
#include "vin/drift.hpp"
#include "vin/errors.hpp"
#include "vin/impacts.hpp"
#include "vin/model.hpp"
#include "vin/network.hpp"
#include "vin/rng.hpp"
#include "vin/similarity.hpp"
#include "vin/vessels.hpp"

namespace fs = std::filesystem;
using namespace vin;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

const std::vector<std::string> kCoreVariables{"u1", "u2", "y1", "y2"};
constexpr int kInstances = 10;

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw DataError("cannot write " + tmp.string());
        }
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    fs::rename(tmp, path);
}

std::string instance_name(bool drifting, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%02d", drifting ? "drift" : "stable", index);
    return buf;
}

/// Hidden-column list from the benchmark sidecar, falling back to the
/// simulator's defaults when no sidecar exists.
std::vector<std::string> hidden_from_meta(const fs::path& data_dir) {
    const fs::path meta_path = data_dir / "benchmark_meta.json";
    if (!fs::exists(meta_path)) {
        return hidden_columns();
    }
    std::ifstream f(meta_path);
    nlohmann::json meta;
    try {
        f >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad sidecar " + meta_path.string() + ": " + e.what());
    }
    return meta.at("hidden").get<std::vector<std::string>>();
}

Dataset load_instance(const fs::path& data_dir, bool drifting, int index,
                      const std::vector<std::string>& hidden) {
    const fs::path path = data_dir / (instance_name(drifting, index) + ".csv");
    Dataset ds = load_csv(path);
    for (const std::string& name : hidden) {
        if (ds.has_column(name)) {
            ds.set_hidden(name, true);
        }
    }
    return ds;
}

struct BackendSelection {
    BackendKind kind;
    std::string name;  ///< directory / file naming
};

std::vector<BackendSelection> select_backends(const std::string& flag) {
    if (flag == "all") {
        return {{BackendKind::linear, "linear"},
                {BackendKind::random_forest, "rf"},
                {BackendKind::symbolic, "symbolic"}};
    }
    const BackendKind kind = backend_from_name(flag);
    const std::string name = kind == BackendKind::linear          ? "linear"
                             : kind == BackendKind::random_forest ? "rf"
                                                                  : "symbolic";
    return {{kind, name}};
}

BackendParams default_params(BackendKind kind) {
    switch (kind) {
        case BackendKind::linear: return LinearParams{};
        case BackendKind::random_forest: return RandomForestParams{};
        case BackendKind::symbolic: return OsgaParams{};
    }
    throw DataError("unknown backend");
}

/// The quality gate the paper couples to each backend: models must reach a
/// problem-dependent NMSE to contribute edges; the forest gate sits higher
/// because its predictive quality is lower on this benchmark.
double default_nmse_gate(BackendKind kind) {
    return kind == BackendKind::random_forest ? 0.9 : 0.2;
}

struct FittedInstance {
    std::vector<Model> models;
    std::map<std::string, QualityReport> qualities;  ///< on the test partition
    Dataset train;
    Dataset test;
};

FittedInstance fit_instance(const Dataset& stable, BackendKind kind, std::uint64_t seed) {
    FittedInstance out;
    auto [train, test] = split(stable, 0.66);
    out.train = std::move(train);
    out.test = std::move(test);
    const auto visible = stable.visible_names();
    for (const std::string& target : kCoreVariables) {
        ModelSpec spec;
        spec.target = target;
        for (const std::string& name : visible) {
            if (name != target) {
                spec.inputs.push_back(name);
            }
        }
        spec.backend = kind;
        spec.params = default_params(kind);
        spec.seed = derive_seed(seed, target);
        Model model = fit(spec, out.train);
        out.qualities[target] = evaluate(model, out.test);
        out.models.push_back(std::move(model));
    }
    return out;
}

FittedInstance load_fitted_instance(const fs::path& data_dir, const fs::path& models_dir,
                                    const BackendSelection& backend, int index,
                                    const std::vector<std::string>& hidden) {
    FittedInstance out;
    const Dataset stable = load_instance(data_dir, false, index, hidden);
    auto [train, test] = split(stable, 0.66);
    out.train = std::move(train);
    out.test = std::move(test);
    for (const std::string& target : kCoreVariables) {
        const fs::path path =
            models_dir / backend.name / instance_name(false, index) / (target + ".json");
        Model model = Model::load(path);
        out.qualities[target] = evaluate(model, out.test);
        out.models.push_back(std::move(model));
    }
    return out;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
    std::string out_dir = "benchmark";
    VesselConfig base;

    SimulateOptions() {
        base.h_final = 0.0;  // drift instances decay to a fully clogged channel
        base.drift_start = 0;
        base.drift_end = base.steps;
        base.seed = 42;
    }
};

int cmd_simulate(const SimulateOptions& opt) {
    VesselConfig cfg = opt.base;
    cfg.drift_end = std::min(cfg.drift_end, cfg.steps);
    const auto files = generate_benchmark(cfg, opt.out_dir);
    std::printf("wrote %zu files to %s\n", files.size(), opt.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
    std::string data_dir;
    std::string out_dir = "models";
    std::string backend = "linear";
    std::uint64_t seed = 42;
};

int cmd_train(const TrainOptions& opt) {
    const auto hidden = hidden_from_meta(opt.data_dir);
    for (const BackendSelection& backend : select_backends(opt.backend)) {
        // per-instance rows and a mean/sd summary over the 10 instances
        std::string rows = "instance,target,partition,r2,nmse\n";
        std::map<std::string, std::vector<QualityReport>> train_q;
        std::map<std::string, std::vector<QualityReport>> test_q;

        for (int i = 1; i <= kInstances; ++i) {
            const Dataset stable = load_instance(opt.data_dir, false, i, hidden);
            const FittedInstance fitted = fit_instance(
                stable, backend.kind, derive_seed(opt.seed, static_cast<std::uint64_t>(i)));

            const fs::path dir = fs::path(opt.out_dir) / backend.name / instance_name(false, i);
            fs::create_directories(dir);
            for (const Model& model : fitted.models) {
                model.save(dir / (model.spec().target + ".json"));
                const QualityReport on_train = evaluate(model, fitted.train);
                const QualityReport on_test = fitted.qualities.at(model.spec().target);
                train_q[model.spec().target].push_back(on_train);
                test_q[model.spec().target].push_back(on_test);
                rows += instance_name(false, i) + "," + model.spec().target + ",train," +
                        format_double(on_train.r2) + "," + format_double(on_train.nmse) + "\n";
                rows += instance_name(false, i) + "," + model.spec().target + ",test," +
                        format_double(on_test.r2) + "," + format_double(on_test.nmse) + "\n";
            }
            std::printf("trained %s on %s\n", backend.name.c_str(),
                        instance_name(false, i).c_str());
        }
        write_atomic(fs::path(opt.out_dir) / ("qualities_" + backend.name + ".csv"), rows);

        std::string summary = "target,partition,r2_mean,r2_sd,nmse_mean,nmse_sd\n";
        const auto append = [&](const std::string& target, const char* partition,
                                const std::vector<QualityReport>& reports) {
            double r2_mean = 0.0;
            double nmse_mean = 0.0;
            for (const QualityReport& q : reports) {
                r2_mean += q.r2;
                nmse_mean += q.nmse;
            }
            r2_mean /= static_cast<double>(reports.size());
            nmse_mean /= static_cast<double>(reports.size());
            double r2_var = 0.0;
            double nmse_var = 0.0;
            for (const QualityReport& q : reports) {
                r2_var += (q.r2 - r2_mean) * (q.r2 - r2_mean);
                nmse_var += (q.nmse - nmse_mean) * (q.nmse - nmse_mean);
            }
            r2_var /= static_cast<double>(reports.size());
            nmse_var /= static_cast<double>(reports.size());
            summary += target + "," + partition + "," + format_double(r2_mean) + "," +
                       format_double(std::sqrt(r2_var)) + "," + format_double(nmse_mean) + "," +
                       format_double(std::sqrt(nmse_var)) + "\n";
        };
        for (const std::string& target : kCoreVariables) {
            append(target, "train", train_q[target]);
            append(target, "test", test_q[target]);
        }
        write_atomic(fs::path(opt.out_dir) / ("qualities_summary_" + backend.name + ".csv"),
                     summary);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectOptions {
    std::string data_dir;
    std::string models_dir = "models";
    std::string out_dir = "detection";
    std::string backend = "linear";
    std::size_t window = 150;
    std::size_t step = 50;
    std::string measure = "spearman";
    bool acyclic = false;
    int repeats = 5;
    double nmse_threshold = -1.0;  // negative: backend default
    double drift_threshold = 0.5;
    std::uint64_t seed = 42;
    bool export_dot_files = false;
};

int cmd_detect(const DetectOptions& opt) {
    const auto hidden = hidden_from_meta(opt.data_dir);
    const BackendSelection backend = select_backends(opt.backend).front();
    fs::create_directories(opt.out_dir);

    for (int i = 1; i <= kInstances; ++i) {
        const FittedInstance fitted =
            load_fitted_instance(opt.data_dir, opt.models_dir, backend, i, hidden);
        const Dataset stream = load_instance(opt.data_dir, true, i, hidden);

        DriftConfig cfg;
        cfg.window = {opt.window, opt.step};
        cfg.repeats = opt.repeats;
        cfg.net.nmse_threshold =
            opt.nmse_threshold >= 0.0 ? opt.nmse_threshold : default_nmse_gate(backend.kind);
        cfg.net.acyclic = opt.acyclic;
        cfg.measure = measure_from_name(opt.measure);
        cfg.drift_threshold = opt.drift_threshold;
        cfg.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(i));

        const Network reference = build_reference(fitted.models, fitted.qualities,
                                                  fitted.train, cfg);
        const SimilaritySeries series =
            detect(fitted.models, reference, fitted.qualities, stream, cfg);

        const std::string stem = "similarity_" + backend.name + "_" +
                                 instance_name(true, i) + "_w" + std::to_string(opt.window) +
                                 "_" + opt.measure + (opt.acyclic ? "_acyclic" : "_cyclic");
        std::optional<std::span<const double>> indicator;
        if (stream.has_column("h")) {
            indicator = stream.column("h");
        }
        save_series_csv(series, indicator, fs::path(opt.out_dir) / (stem + ".csv"));
        write_atomic(fs::path(opt.out_dir) /
                         ("reference_" + backend.name + "_" + instance_name(false, i) + ".dot"),
                     export_dot(reference));

        if (opt.export_dot_files) {
            for (const auto& [start, window_data] : windows(stream, cfg.window)) {
                const auto impacts =
                    admitted_impacts(fitted.models, fitted.qualities, window_data, cfg.repeats,
                                     cfg.net.nmse_threshold, derive_seed(cfg.seed, start));
                const Network net = cfg.net.acyclic ? build_acyclic(impacts, fitted.qualities, cfg.net)
                                                    : build_cyclic(impacts, fitted.qualities, cfg.net);
                write_atomic(fs::path(opt.out_dir) /
                                 (stem + "_win" + std::to_string(start) + ".dot"),
                             export_dot(net));
            }
        }
        std::printf("detect %s %s: %zu windows\n", backend.name.c_str(),
                    instance_name(true, i).c_str(), series.points.size());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOptions {
    std::string data_dir;
    std::string models_dir = "models";
    std::string out_dir = "evaluation";
    std::string backend = "linear";
    std::vector<std::size_t> windows{50, 100, 150, 200, 400};
    std::size_t step = 50;
    int repeats = 5;
    double nmse_threshold = -1.0;
    std::uint64_t seed = 42;
};

int cmd_evaluate(const EvaluateOptions& opt) {
    if (opt.windows.empty()) {
        throw DataError("evaluate: the window sweep must not be empty");
    }
    const auto hidden = hidden_from_meta(opt.data_dir);
    const BackendSelection backend = select_backends(opt.backend).front();
    fs::create_directories(opt.out_dir);
    const double gate =
        opt.nmse_threshold >= 0.0 ? opt.nmse_threshold : default_nmse_gate(backend.kind);

    std::string rows = "instance,window,step,network,measure,correlation,status\n";
    // (window, kind, measure) -> correlations over instances
    std::map<std::tuple<std::size_t, bool, Measure>, std::vector<double>> aggregate;
    int warnings = 0;

    for (int i = 1; i <= kInstances; ++i) {
        const FittedInstance fitted =
            load_fitted_instance(opt.data_dir, opt.models_dir, backend, i, hidden);
        const Dataset stream = load_instance(opt.data_dir, true, i, hidden);
        if (!stream.has_column("h")) {
            throw DataError("evaluate: stream " + instance_name(true, i) +
                            " lacks the drift indicator column h");
        }
        const auto indicator = stream.column("h");
        const std::uint64_t instance_seed = derive_seed(opt.seed, static_cast<std::uint64_t>(i));

        for (const std::size_t window : opt.windows) {
            // Impacts are recomputed once per window position and scored
            // under both network kinds and both measures.
            DriftConfig base_cfg;
            base_cfg.window = {window, opt.step};
            base_cfg.repeats = opt.repeats;
            base_cfg.net.nmse_threshold = gate;
            base_cfg.seed = instance_seed;

            std::map<std::pair<bool, Measure>, SimilaritySeries> series;
            std::map<bool, Network> references;
            for (const bool acyclic : {false, true}) {
                DriftConfig cfg = base_cfg;
                cfg.net.acyclic = acyclic;
                references[acyclic] =
                    build_reference(fitted.models, fitted.qualities, fitted.train, cfg);
                for (const Measure measure : {Measure::spearman, Measure::ndcg}) {
                    SimilaritySeries s;
                    s.reference = references[acyclic];
                    s.window = cfg.window;
                    series[{acyclic, measure}] = std::move(s);
                }
            }
            const auto universe = model_universe(fitted.models);
            for (const auto& [start, window_data] : windows(stream, base_cfg.window)) {
                const auto impacts =
                    admitted_impacts(fitted.models, fitted.qualities, window_data,
                                     base_cfg.repeats, gate, derive_seed(instance_seed, start));
                for (const bool acyclic : {false, true}) {
                    NetworkConfig net_cfg = base_cfg.net;
                    net_cfg.acyclic = acyclic;
                    const Network net = acyclic ? build_acyclic(impacts, fitted.qualities, net_cfg)
                                                : build_cyclic(impacts, fitted.qualities, net_cfg);
                    for (const Measure measure : {Measure::spearman, Measure::ndcg}) {
                        const double score =
                            network_similarity(references[acyclic], net, universe, measure);
                        series[{acyclic, measure}].points.push_back(
                            {start, score, score < base_cfg.drift_threshold});
                    }
                }
            }
            for (const bool acyclic : {false, true}) {
                for (const Measure measure : {Measure::spearman, Measure::ndcg}) {
                    const std::string prefix = instance_name(true, i) + "," +
                                               std::to_string(window) + "," +
                                               std::to_string(opt.step) + "," +
                                               (acyclic ? "acyclic" : "cyclic") + "," +
                                               measure_name(measure) + ",";
                    try {
                        const double corr =
                            drift_correlation(series[{acyclic, measure}], indicator);
                        aggregate[{window, acyclic, measure}].push_back(corr);
                        rows += prefix + format_double(corr) + ",ok\n";
                    } catch (const NumericError& e) {
                        ++warnings;
                        std::fprintf(stderr, "warning: %s %s/%s w=%zu: %s\n",
                                     instance_name(true, i).c_str(),
                                     acyclic ? "acyclic" : "cyclic", measure_name(measure),
                                     window, e.what());
                        rows += prefix + ",undefined\n";
                    }
                }
            }
        }
        std::printf("evaluated %s\n", instance_name(true, i).c_str());
    }
    write_atomic(fs::path(opt.out_dir) / ("correlations_" + backend.name + ".csv"), rows);

    // Aggregate as mean and standard deviation over the drift instances.
    std::string summary = "window,step,network,measure,mean_correlation,sd,instances\n";
    for (const auto& [key, values] : aggregate) {
        const auto& [window, acyclic, measure] = key;
        double mean = 0.0;
        for (const double v : values) {
            mean += v;
        }
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (const double v : values) {
            var += (v - mean) * (v - mean);
        }
        var /= static_cast<double>(values.size());
        summary += std::to_string(window) + "," + std::to_string(opt.step) + "," +
                   (acyclic ? "acyclic" : "cyclic") + "," + measure_name(measure) + "," +
                   format_double(mean) + "," + format_double(std::sqrt(var)) + "," +
                   std::to_string(values.size()) + "\n";
    }
    write_atomic(fs::path(opt.out_dir) / ("correlations_summary_" + backend.name + ".csv"),
                 summary);
    if (warnings > 0) {
        std::fprintf(stderr, "%d correlation(s) undefined and excluded from the aggregate\n",
                     warnings);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concept drift detection via variable interaction networks"};
    app.set_config("--config", "", "INI-style configuration file; sections per subcommand");
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Generate the vessels benchmark streams");
    cmd_sim->add_option("--out", sim.out_dir, "Output directory");
    cmd_sim->add_option("--seed", sim.base.seed, "Base seed for all instances");
    cmd_sim->add_option("--steps", sim.base.steps, "Rows per instance");
    cmd_sim->add_option("--dt", sim.base.dt, "Time between rows");
    cmd_sim->add_option("--substeps", sim.base.substeps, "Euler substeps per row");
    cmd_sim->add_option("--ar-mean", sim.base.ar_mean, "Inlet AR(1) mean");
    cmd_sim->add_option("--ar-phi", sim.base.ar_phi, "Inlet u1 AR(1) coefficient");
    cmd_sim->add_option("--ar-phi2", sim.base.ar_phi2, "Inlet u2 AR(1) coefficient");
    cmd_sim->add_option("--ar-sigma", sim.base.ar_sigma, "Inlet u1 noise scale");
    cmd_sim->add_option("--ar-sigma2", sim.base.ar_sigma2, "Inlet u2 noise scale");
    cmd_sim->add_option("--h0", sim.base.h0, "Initial channel coefficient");
    cmd_sim->add_option("--h-final", sim.base.h_final, "Final channel coefficient (drift)");
    cmd_sim->add_option("--burn-in", sim.base.burn_in, "Discarded warm-up rows");

    TrainOptions train;
    auto* cmd_tr = app.add_subcommand("train", "Fit per-variable models on stable instances");
    cmd_tr->add_option("--data", train.data_dir, "Benchmark directory")->required();
    cmd_tr->add_option("--out", train.out_dir, "Model output directory");
    cmd_tr->add_option("--backend", train.backend, "linear|rf|symbolic|all")
        ->check(CLI::IsMember({"linear", "lr", "rf", "random_forest", "symbolic", "sr", "all"}));
    cmd_tr->add_option("--seed", train.seed, "Training seed");

    DetectOptions det;
    auto* cmd_det = app.add_subcommand("detect", "Slide a window over each drift stream");
    cmd_det->add_option("--data", det.data_dir, "Benchmark directory")->required();
    cmd_det->add_option("--models", det.models_dir, "Model directory (from train)");
    cmd_det->add_option("--out", det.out_dir, "Output directory");
    cmd_det->add_option("--backend", det.backend, "linear|rf|symbolic")
        ->check(CLI::IsMember({"linear", "lr", "rf", "random_forest", "symbolic", "sr"}));
    cmd_det->add_option("--window", det.window, "Sliding window rows");
    cmd_det->add_option("--step", det.step, "Window step rows");
    cmd_det->add_option("--measure", det.measure, "spearman|ndcg")
        ->check(CLI::IsMember({"spearman", "ndcg"}));
    cmd_det->add_flag("--acyclic", det.acyclic, "Build cycle-free networks");
    cmd_det->add_option("--repeats", det.repeats, "Permutation repeats per impact");
    cmd_det->add_option("--nmse-threshold", det.nmse_threshold,
                        "Model quality gate (default per backend)");
    cmd_det->add_option("--threshold", det.drift_threshold, "Drift similarity threshold");
    cmd_det->add_option("--seed", det.seed, "Detection seed");
    cmd_det->add_flag("--export-dot", det.export_dot_files, "Write per-window DOT files");

    EvaluateOptions ev;
    auto* cmd_ev = app.add_subcommand("evaluate", "Correlate similarity decay with the drift");
    cmd_ev->add_option("--data", ev.data_dir, "Benchmark directory")->required();
    cmd_ev->add_option("--models", ev.models_dir, "Model directory (from train)");
    cmd_ev->add_option("--out", ev.out_dir, "Output directory");
    cmd_ev->add_option("--backend", ev.backend, "linear|rf|symbolic")
        ->check(CLI::IsMember({"linear", "lr", "rf", "random_forest", "symbolic", "sr"}));
    cmd_ev->add_option("--windows", ev.windows, "Window sizes to sweep")->delimiter(',');
    cmd_ev->add_option("--window", ev.windows, "Alias for --windows")->delimiter(',');
    cmd_ev->add_option("--step", ev.step, "Window step rows");
    cmd_ev->add_option("--repeats", ev.repeats, "Permutation repeats per impact");
    cmd_ev->add_option("--nmse-threshold", ev.nmse_threshold,
                       "Model quality gate (default per backend)");
    cmd_ev->add_option("--seed", ev.seed, "Detection seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (cmd_sim->parsed()) {
            return cmd_simulate(sim);
        }
        if (cmd_tr->parsed()) {
            return cmd_train(train);
        }
        if (cmd_det->parsed()) {
            return cmd_detect(det);
        }
        return cmd_evaluate(ev);
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
}
