#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vin {

/// Node kinds of a symbolic expression tree. Division and logarithm are
/// protected: x/d with |d| <= 1e-12 yields 1, log takes |x| and maps 0 to 0,
/// exp saturates. Evaluation clamps every intermediate to +-1e150, so finite
/// inputs can never produce NaN or infinity.
enum class OpCode : std::uint8_t { add, sub, mul, div, sin, exp, log, var, cst };

int arity(OpCode op);
const char* op_name(OpCode op);

struct ExprNode {
    OpCode op = OpCode::cst;
    std::int32_t var = -1;  ///< input index for var nodes
    double value = 0.0;     ///< constant for cst nodes
};

/// Expression tree stored in prefix order.
class Expression {
  public:
    Expression() = default;
    explicit Expression(std::vector<ExprNode> prefix);

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    const std::vector<ExprNode>& nodes() const { return nodes_; }

    /// Number of nodes in the subtree rooted at index i.
    std::size_t subtree_size(std::size_t i) const;
    /// Subtree sizes for every node, one reverse sweep.
    std::vector<std::size_t> all_subtree_sizes() const;

    /// Largest input index referenced, or -1 for constant expressions.
    std::int32_t max_var_index() const;

    /// Prefix token list, e.g. ["add", "var:x1", "cst:2.5"].
    std::vector<std::string> to_tokens(std::span<const std::string> input_names) const;
    static Expression from_tokens(std::span<const std::string> tokens,
                                  std::span<const std::string> input_names);

    /// Infix rendering for humans, e.g. "((x1 + x2) * 2.5)".
    std::string to_infix(std::span<const std::string> input_names) const;

  private:
    std::vector<ExprNode> nodes_;
};

/// Reusable buffers for vectorized expression evaluation.
class EvalArena {
  public:
    std::span<double> acquire(std::size_t n);
    void release_all();

  private:
    std::vector<std::vector<double>> buffers_;
    std::size_t used_ = 0;
};

/// Evaluates the expression over whole columns: inputs[v] is the column for
/// variable index v, out receives one value per row.
void eval_expression(const Expression& expr,
                     std::span<const std::span<const double>> inputs,
                     std::span<double> out, EvalArena& arena);

/// Offspring-selection GA configuration. Children enter the next generation
/// only if they are strictly fitter than the better of their parents; a
/// generation that needs more than max_selection_pressure * population
/// offspring attempts to refill ends the run.
struct OsgaParams {
    int population = 100;
    int max_generations = 1000;
    double max_selection_pressure = 100.0;
    double mutation_rate = 0.25;
    double crossover_rate = 1.0;
    int max_tree_length = 25;  ///< nodes
    bool linear_scaling = true;
    double const_min = -3.0;
    double const_max = 3.0;
};

struct OsgaStats {
    int generations = 0;
    bool pressure_terminated = false;
    double final_selection_pressure = 0.0;
    std::vector<double> best_per_generation;  ///< training NMSE after each generation
};

struct OsgaResult {
    Expression expr;
    double scale_a = 1.0;  ///< prediction = scale_a * raw + scale_b
    double scale_b = 0.0;
    double train_nmse = 1.0;
    OsgaStats stats;
};

/// Evolves an expression for `target` from the given input columns.
/// Fitness is training NMSE of the (optionally linearly scaled) prediction.
OsgaResult osga_fit(std::span<const std::span<const double>> inputs,
                    std::span<const double> target, const OsgaParams& params,
                    std::uint64_t seed);

} // namespace vin
