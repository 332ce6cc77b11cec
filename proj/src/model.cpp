#include "vin/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "vin/errors.hpp"
#include "vin/kernels.hpp"

namespace vin {

const char* backend_name(BackendKind kind) {
    switch (kind) {
        case BackendKind::linear: return "linear";
        case BackendKind::random_forest: return "random_forest";
        case BackendKind::symbolic: return "symbolic";
    }
    return "?";
}

BackendKind backend_from_name(std::string_view name) {
    if (name == "linear" || name == "lr") {
        return BackendKind::linear;
    }
    if (name == "random_forest" || name == "rf") {
        return BackendKind::random_forest;
    }
    if (name == "symbolic" || name == "sr") {
        return BackendKind::symbolic;
    }
    throw DataError("unknown backend: " + std::string(name));
}

namespace {

std::vector<std::span<const double>> gather_inputs(const Dataset& ds,
                                                   const std::vector<std::string>& names) {
    std::vector<std::span<const double>> cols;
    cols.reserve(names.size());
    for (const std::string& name : names) {
        cols.push_back(ds.column(name));
    }
    return cols;
}

void validate_spec(const ModelSpec& spec, const Dataset& train) {
    if (spec.inputs.empty()) {
        throw DataError("model spec: inputs must be non-empty");
    }
    std::set<std::string> unique(spec.inputs.begin(), spec.inputs.end());
    if (unique.size() != spec.inputs.size()) {
        throw DataError("model spec: duplicate inputs");
    }
    if (unique.contains(spec.target)) {
        throw DataError("model spec: target '" + spec.target + "' also listed as input");
    }
    for (const std::string& name : spec.inputs) {
        if (train.hidden(name)) {
            throw DataError("model spec: input '" + name + "' is a hidden column");
        }
    }
    if (train.hidden(spec.target)) {
        throw DataError("model spec: target '" + spec.target + "' is a hidden column");
    }
    if (train.row_count() < 2 * spec.inputs.size()) {
        throw DataError("model spec: need at least 2 rows per input to fit");
    }
    const auto target = train.column(spec.target);
    if (kernels::variance(target) <= 0.0) {
        throw DataError("model spec: target '" + spec.target + "' has zero variance");
    }
}

} // namespace

std::vector<double> Model::predict(const Dataset& ds) const {
    const auto inputs = gather_inputs(ds, spec_.inputs);
    const std::size_t n = ds.row_count();
    std::vector<double> out(n, 0.0);
    if (n == 0) {
        return out;
    }

    if (const auto* linear = std::get_if<LinearFit>(&fit_)) {
        std::fill(out.begin(), out.end(), linear->intercept);
        for (std::size_t j = 0; j < inputs.size(); ++j) {
            kernels::axpy(inputs[j], linear->coefficients[j], out);
        }
    } else if (const auto* forest = std::get_if<ForestFit>(&fit_)) {
        // Trees outer, rows inner: each tree's node arrays stay cache-hot
        // while the rows stream through.
        const std::size_t width = inputs.size();
        std::vector<double> features(n * width);
        for (std::size_t j = 0; j < width; ++j) {
            for (std::size_t r = 0; r < n; ++r) {
                features[r * width + j] = inputs[j][r];
            }
        }
        for (const TreeNodes& tree : forest->trees) {
            for (std::size_t r = 0; r < n; ++r) {
                out[r] += tree.predict_row({&features[r * width], width});
            }
        }
        const double inv = 1.0 / static_cast<double>(forest->trees.size());
        for (double& v : out) {
            v *= inv;
        }
    } else {
        const auto& sym = std::get<SymbolicFit>(fit_);
        EvalArena arena;
        eval_expression(sym.expr, inputs, out, arena);
        kernels::axpb(out, sym.scale_a, sym.scale_b, out);
    }
    return out;
}

Model fit(const ModelSpec& spec, const Dataset& train) {
    validate_spec(spec, train);
    const auto inputs = gather_inputs(train, spec.inputs);
    const auto target = train.column(spec.target);

    switch (spec.backend) {
        case BackendKind::linear: {
            const auto* params = std::get_if<LinearParams>(&spec.params);
            if (params == nullptr) {
                throw DataError("model spec: linear backend expects LinearParams");
            }
            return {spec, detail::fit_linear(inputs, target, *params)};
        }
        case BackendKind::random_forest: {
            const auto* params = std::get_if<RandomForestParams>(&spec.params);
            if (params == nullptr) {
                throw DataError("model spec: random_forest backend expects RandomForestParams");
            }
            return {spec, detail::fit_forest(inputs, target, *params, spec.seed)};
        }
        case BackendKind::symbolic: {
            const auto* params = std::get_if<OsgaParams>(&spec.params);
            if (params == nullptr) {
                throw DataError("model spec: symbolic backend expects OsgaParams");
            }
            OsgaResult res = osga_fit(inputs, target, *params, spec.seed);
            return {spec, SymbolicFit{std::move(res.expr), res.scale_a, res.scale_b}};
        }
    }
    throw DataError("model spec: unknown backend");
}

QualityReport evaluate(const Model& model, const Dataset& ds) {
    const auto target = ds.column(model.spec().target);
    if (target.size() < 2) {
        throw NumericError("evaluate: need at least 2 rows");
    }
    const double target_mean = kernels::mean(target);
    const double ssd = kernels::sumsq_dev(target, target_mean);
    if (ssd <= 0.0) {
        throw NumericError("evaluate: target variance is zero, NMSE undefined");
    }
    const std::vector<double> pred = model.predict(ds);
    const std::span<const double> pred_span(pred);

    QualityReport report;
    const double r = kernels::pearson(pred_span, target);
    report.r2 = r * r;
    report.nmse = kernels::sumsq_diff(pred_span, target) / ssd;
    return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json params_to_json(const BackendParams& params) {
    if (const auto* p = std::get_if<LinearParams>(&params)) {
        return {{"ridge", p->ridge}};
    }
    if (const auto* p = std::get_if<RandomForestParams>(&params)) {
        return {{"trees", p->trees},
                {"row_ratio", p->row_ratio},
                {"feature_ratio", p->feature_ratio},
                {"min_leaf", p->min_leaf},
                {"features_per_tree", p->features_per_tree}};
    }
    const auto& p = std::get<OsgaParams>(params);
    return {{"population", p.population},
            {"max_generations", p.max_generations},
            {"max_selection_pressure", p.max_selection_pressure},
            {"mutation_rate", p.mutation_rate},
            {"crossover_rate", p.crossover_rate},
            {"max_tree_length", p.max_tree_length},
            {"linear_scaling", p.linear_scaling},
            {"const_min", p.const_min},
            {"const_max", p.const_max}};
}

BackendParams params_from_json(BackendKind kind, const nlohmann::json& doc) {
    switch (kind) {
        case BackendKind::linear: {
            LinearParams p;
            p.ridge = doc.at("ridge").get<double>();
            return p;
        }
        case BackendKind::random_forest: {
            RandomForestParams p;
            p.trees = doc.at("trees").get<int>();
            p.row_ratio = doc.at("row_ratio").get<double>();
            p.feature_ratio = doc.at("feature_ratio").get<double>();
            p.min_leaf = doc.at("min_leaf").get<int>();
            p.features_per_tree = doc.at("features_per_tree").get<bool>();
            return p;
        }
        case BackendKind::symbolic: {
            OsgaParams p;
            p.population = doc.at("population").get<int>();
            p.max_generations = doc.at("max_generations").get<int>();
            p.max_selection_pressure = doc.at("max_selection_pressure").get<double>();
            p.mutation_rate = doc.at("mutation_rate").get<double>();
            p.crossover_rate = doc.at("crossover_rate").get<double>();
            p.max_tree_length = doc.at("max_tree_length").get<int>();
            p.linear_scaling = doc.at("linear_scaling").get<bool>();
            p.const_min = doc.at("const_min").get<double>();
            p.const_max = doc.at("const_max").get<double>();
            return p;
        }
    }
    throw DataError("unknown backend kind in model file");
}

} // namespace

nlohmann::ordered_json Model::to_json() const {
    nlohmann::ordered_json doc;
    doc["format"] = "vin-model";
    doc["version"] = 1;
    doc["spec"] = {{"target", spec_.target},
                   {"inputs", spec_.inputs},
                   {"backend", backend_name(spec_.backend)},
                   {"seed", spec_.seed},
                   {"params", params_to_json(spec_.params)}};

    if (const auto* linear = std::get_if<LinearFit>(&fit_)) {
        doc["fit"] = {{"coefficients", linear->coefficients}, {"intercept", linear->intercept}};
    } else if (const auto* forest = std::get_if<ForestFit>(&fit_)) {
        nlohmann::ordered_json trees = nlohmann::ordered_json::array();
        for (const TreeNodes& tree : forest->trees) {
            trees.push_back({{"feature", tree.feature},
                             {"threshold", tree.threshold},
                             {"left", tree.left},
                             {"right", tree.right},
                             {"value", tree.value}});
        }
        doc["fit"] = {{"trees", std::move(trees)}};
    } else {
        const auto& sym = std::get<SymbolicFit>(fit_);
        doc["fit"] = {{"expression", sym.expr.to_tokens(spec_.inputs)},
                      {"scale_a", sym.scale_a},
                      {"scale_b", sym.scale_b}};
    }
    return doc;
}

Model Model::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "vin-model" || doc.value("version", 0) != 1) {
        throw DataError("not a vin-model v1 document");
    }
    const auto& spec_doc = doc.at("spec");
    ModelSpec spec;
    spec.target = spec_doc.at("target").get<std::string>();
    spec.inputs = spec_doc.at("inputs").get<std::vector<std::string>>();
    spec.backend = backend_from_name(spec_doc.at("backend").get<std::string>());
    spec.seed = spec_doc.at("seed").get<std::uint64_t>();
    spec.params = params_from_json(spec.backend, spec_doc.at("params"));

    const auto& fit_doc = doc.at("fit");
    switch (spec.backend) {
        case BackendKind::linear: {
            LinearFit fit;
            fit.coefficients = fit_doc.at("coefficients").get<std::vector<double>>();
            fit.intercept = fit_doc.at("intercept").get<double>();
            if (fit.coefficients.size() != spec.inputs.size()) {
                throw DataError("model file: coefficient count does not match inputs");
            }
            return {std::move(spec), std::move(fit)};
        }
        case BackendKind::random_forest: {
            ForestFit fit;
            for (const auto& tree_doc : fit_doc.at("trees")) {
                TreeNodes tree;
                tree.feature = tree_doc.at("feature").get<std::vector<std::int32_t>>();
                tree.threshold = tree_doc.at("threshold").get<std::vector<double>>();
                tree.left = tree_doc.at("left").get<std::vector<std::int32_t>>();
                tree.right = tree_doc.at("right").get<std::vector<std::int32_t>>();
                tree.value = tree_doc.at("value").get<std::vector<double>>();
                fit.trees.push_back(std::move(tree));
            }
            return {std::move(spec), std::move(fit)};
        }
        case BackendKind::symbolic: {
            SymbolicFit fit;
            const auto tokens = fit_doc.at("expression").get<std::vector<std::string>>();
            fit.expr = Expression::from_tokens(tokens, spec.inputs);
            fit.scale_a = fit_doc.at("scale_a").get<double>();
            fit.scale_b = fit_doc.at("scale_b").get<double>();
            return {std::move(spec), std::move(fit)};
        }
    }
    throw DataError("model file: unknown backend");
}

void Model::save(const std::filesystem::path& path) const {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw DataError("cannot write " + tmp.string());
        }
        f << to_json().dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

Model Model::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) {
        throw DataError("cannot open model file " + path.string());
    }
    nlohmann::json doc;
    try {
        f >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad model file " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

} // namespace vin
