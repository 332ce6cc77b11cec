#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "vin/dataset.hpp"
#include "vin/symbolic.hpp"

namespace vin {

enum class BackendKind { linear, random_forest, symbolic };

const char* backend_name(BackendKind kind);
BackendKind backend_from_name(std::string_view name);

struct LinearParams {
    double ridge = 1e-8;  ///< diagonal fallback added when the normal equations are singular
};

struct RandomForestParams {
    int trees = 100;
    double row_ratio = 0.5;      ///< per-tree subsample, drawn without replacement
    double feature_ratio = 0.2;  ///< feature subset ratio, ceil(ratio * |inputs|)
    int min_leaf = 1;
    /// When true (default), each tree is built from one fixed random feature
    /// subset; when false, a fresh subset is drawn at every split.
    bool features_per_tree = true;
};

using BackendParams = std::variant<LinearParams, RandomForestParams, OsgaParams>;

struct ModelSpec {
    std::string target;
    std::vector<std::string> inputs;
    BackendKind backend = BackendKind::linear;
    BackendParams params = LinearParams{};
    std::uint64_t seed = 0;
};

struct QualityReport {
    double r2 = 0.0;    ///< squared Pearson correlation of prediction vs. target
    double nmse = 1.0;  ///< mean squared error over target variance
};

struct LinearFit {
    std::vector<double> coefficients;  ///< one per input, spec order
    double intercept = 0.0;
};

/// One regression tree in index form; feature[i] < 0 marks a leaf whose
/// prediction is value[i].
struct TreeNodes {
    std::vector<std::int32_t> feature;
    std::vector<double> threshold;
    std::vector<std::int32_t> left;
    std::vector<std::int32_t> right;
    std::vector<double> value;

    double predict_row(std::span<const double> features) const {
        std::int32_t node = 0;
        while (feature[static_cast<std::size_t>(node)] >= 0) {
            const auto i = static_cast<std::size_t>(node);
            node = features[static_cast<std::size_t>(feature[i])] <= threshold[i] ? left[i]
                                                                                  : right[i];
        }
        return value[static_cast<std::size_t>(node)];
    }
};

struct ForestFit {
    std::vector<TreeNodes> trees;
};

struct SymbolicFit {
    Expression expr;
    double scale_a = 1.0;
    double scale_b = 0.0;
};

/// A fitted regression model. Immutable; prediction is deterministic and
/// reads inputs by name, so dataset column order is irrelevant.
class Model {
  public:
    Model(ModelSpec spec, std::variant<LinearFit, ForestFit, SymbolicFit> fit)
        : spec_(std::move(spec)), fit_(std::move(fit)) {}

    const ModelSpec& spec() const { return spec_; }
    const std::variant<LinearFit, ForestFit, SymbolicFit>& fitted() const { return fit_; }

    /// One prediction per row of ds. Throws DataError on missing inputs.
    std::vector<double> predict(const Dataset& ds) const;

    nlohmann::ordered_json to_json() const;
    static Model from_json(const nlohmann::json& doc);

    void save(const std::filesystem::path& path) const;
    static Model load(const std::filesystem::path& path);

  private:
    ModelSpec spec_;
    std::variant<LinearFit, ForestFit, SymbolicFit> fit_;
};

/// Fits the spec's backend on the training partition.
Model fit(const ModelSpec& spec, const Dataset& train);

/// R^2 and NMSE of the model on a dataset. Throws NumericError when the
/// target variance there is zero.
QualityReport evaluate(const Model& model, const Dataset& ds);

namespace detail {

LinearFit fit_linear(std::span<const std::span<const double>> inputs,
                     std::span<const double> target, const LinearParams& params);

ForestFit fit_forest(std::span<const std::span<const double>> inputs,
                     std::span<const double> target, const RandomForestParams& params,
                     std::uint64_t seed);

} // namespace detail

} // namespace vin
