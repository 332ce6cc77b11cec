#include "vin/symbolic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "vin/errors.hpp"
#include "vin/kernels.hpp"
#include "vin/rng.hpp"

namespace vin {

namespace {

constexpr double kValueClamp = 1e150;
// exp(345) stays below the clamp; larger arguments saturate there.
constexpr double kExpArgLimit = 345.0;

void sin_map(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::sin(in[i]);
    }
}

void exp_map(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::exp(std::min(in[i], kExpArgLimit));
    }
}

void log_map(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double a = std::abs(in[i]);
        out[i] = a <= kernels::kProtectedDivEps ? 0.0 : std::log(a);
    }
}

} // namespace

int arity(OpCode op) {
    switch (op) {
        case OpCode::add:
        case OpCode::sub:
        case OpCode::mul:
        case OpCode::div:
            return 2;
        case OpCode::sin:
        case OpCode::exp:
        case OpCode::log:
            return 1;
        case OpCode::var:
        case OpCode::cst:
            return 0;
    }
    return 0;
}

const char* op_name(OpCode op) {
    switch (op) {
        case OpCode::add: return "add";
        case OpCode::sub: return "sub";
        case OpCode::mul: return "mul";
        case OpCode::div: return "div";
        case OpCode::sin: return "sin";
        case OpCode::exp: return "exp";
        case OpCode::log: return "log";
        case OpCode::var: return "var";
        case OpCode::cst: return "cst";
    }
    return "?";
}

Expression::Expression(std::vector<ExprNode> prefix) : nodes_(std::move(prefix)) {
    // A valid prefix sequence consumes exactly one pending slot per node and
    // opens `arity` new ones, ending with zero pending.
    std::ptrdiff_t pending = 1;
    for (const ExprNode& node : nodes_) {
        if (pending <= 0) {
            throw DataError("expression: trailing nodes after complete tree");
        }
        pending += arity(node.op) - 1;
        if (node.op == OpCode::var && node.var < 0) {
            throw DataError("expression: var node without index");
        }
    }
    if (pending != 0) {
        throw DataError("expression: incomplete tree");
    }
}

std::size_t Expression::subtree_size(std::size_t i) const {
    std::size_t j = i;
    std::ptrdiff_t pending = 1;
    while (pending > 0) {
        pending += arity(nodes_[j].op) - 1;
        ++j;
    }
    return j - i;
}

std::vector<std::size_t> Expression::all_subtree_sizes() const {
    std::vector<std::size_t> sizes(nodes_.size());
    std::vector<std::size_t> child_sizes;  // stack of completed subtree sizes
    for (std::size_t k = nodes_.size(); k-- > 0;) {
        const int a = arity(nodes_[k].op);
        std::size_t total = 1;
        for (int c = 0; c < a; ++c) {
            total += child_sizes.back();
            child_sizes.pop_back();
        }
        sizes[k] = total;
        child_sizes.push_back(total);
    }
    return sizes;
}

std::int32_t Expression::max_var_index() const {
    std::int32_t max_index = -1;
    for (const ExprNode& node : nodes_) {
        if (node.op == OpCode::var) {
            max_index = std::max(max_index, node.var);
        }
    }
    return max_index;
}

std::vector<std::string> Expression::to_tokens(std::span<const std::string> input_names) const {
    std::vector<std::string> tokens;
    tokens.reserve(nodes_.size());
    for (const ExprNode& node : nodes_) {
        if (node.op == OpCode::var) {
            tokens.push_back("var:" + input_names[static_cast<std::size_t>(node.var)]);
        } else if (node.op == OpCode::cst) {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof(buf), node.value);
            tokens.push_back("cst:" + std::string(buf, res.ptr));
        } else {
            tokens.emplace_back(op_name(node.op));
        }
    }
    return tokens;
}

Expression Expression::from_tokens(std::span<const std::string> tokens,
                                   std::span<const std::string> input_names) {
    std::vector<ExprNode> nodes;
    nodes.reserve(tokens.size());
    for (const std::string& token : tokens) {
        ExprNode node;
        if (token.starts_with("var:")) {
            const std::string name = token.substr(4);
            const auto it = std::find(input_names.begin(), input_names.end(), name);
            if (it == input_names.end()) {
                throw DataError("expression references unknown input: " + name);
            }
            node.op = OpCode::var;
            node.var = static_cast<std::int32_t>(it - input_names.begin());
        } else if (token.starts_with("cst:")) {
            node.op = OpCode::cst;
            const char* begin = token.data() + 4;
            const char* end = token.data() + token.size();
            const auto res = std::from_chars(begin, end, node.value);
            if (res.ec != std::errc{} || res.ptr != end) {
                throw DataError("bad constant token: " + token);
            }
        } else {
            bool found = false;
            for (OpCode op : {OpCode::add, OpCode::sub, OpCode::mul, OpCode::div,
                              OpCode::sin, OpCode::exp, OpCode::log}) {
                if (token == op_name(op)) {
                    node.op = op;
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw DataError("unknown expression token: " + token);
            }
        }
        nodes.push_back(node);
    }
    return Expression(std::move(nodes));
}

std::string Expression::to_infix(std::span<const std::string> input_names) const {
    std::size_t pos = 0;
    const auto render = [&](const auto& self) -> std::string {
        const ExprNode& node = nodes_[pos++];
        switch (node.op) {
            case OpCode::var:
                return input_names[static_cast<std::size_t>(node.var)];
            case OpCode::cst: {
                char buf[32];
                const auto res = std::to_chars(buf, buf + sizeof(buf), node.value);
                return std::string(buf, res.ptr);
            }
            case OpCode::sin:
            case OpCode::exp:
            case OpCode::log:
                return std::string(op_name(node.op)) + "(" + self(self) + ")";
            default: {
                const char* symbol = node.op == OpCode::add   ? " + "
                                     : node.op == OpCode::sub ? " - "
                                     : node.op == OpCode::mul ? " * "
                                                              : " / ";
                const std::string left = self(self);
                const std::string right = self(self);
                return "(" + left + symbol + right + ")";
            }
        }
    };
    return render(render);
}

std::span<double> EvalArena::acquire(std::size_t n) {
    if (used_ == buffers_.size()) {
        buffers_.emplace_back();
    }
    std::vector<double>& buf = buffers_[used_++];
    if (buf.size() < n) {
        buf.resize(n);
    }
    return {buf.data(), n};
}

void EvalArena::release_all() { used_ = 0; }

void eval_expression(const Expression& expr,
                     std::span<const std::span<const double>> inputs,
                     std::span<double> out, EvalArena& arena) {
    const std::size_t n = out.size();
    const auto& nodes = expr.nodes();
    if (nodes.empty()) {
        throw DataError("cannot evaluate an empty expression");
    }
    arena.release_all();

    // Evaluate in reverse prefix order; the stack top is always the left
    // operand of the next operator.
    std::vector<std::span<const double>> stack;
    stack.reserve(nodes.size());
    for (std::size_t k = nodes.size(); k-- > 0;) {
        const ExprNode& node = nodes[k];
        switch (node.op) {
            case OpCode::var: {
                const auto v = static_cast<std::size_t>(node.var);
                if (v >= inputs.size()) {
                    throw DataError("expression references input beyond the provided columns");
                }
                stack.push_back(inputs[v].subspan(0, n));
                break;
            }
            case OpCode::cst: {
                auto buf = arena.acquire(n);
                std::fill(buf.begin(), buf.end(), node.value);
                stack.push_back(buf);
                break;
            }
            case OpCode::sin:
            case OpCode::exp:
            case OpCode::log: {
                const auto a = stack.back();
                stack.pop_back();
                auto buf = arena.acquire(n);
                if (node.op == OpCode::sin) {
                    sin_map(a, buf);
                } else if (node.op == OpCode::exp) {
                    exp_map(a, buf);
                } else {
                    log_map(a, buf);
                }
                stack.push_back(buf);
                break;
            }
            default: {
                const auto left = stack.back();
                stack.pop_back();
                const auto right = stack.back();
                stack.pop_back();
                auto buf = arena.acquire(n);
                switch (node.op) {
                    case OpCode::add: kernels::add(left, right, buf); break;
                    case OpCode::sub: kernels::sub(left, right, buf); break;
                    case OpCode::mul: kernels::mul(left, right, buf); break;
                    default: kernels::div_protected(left, right, buf); break;
                }
                kernels::clamp(buf, -kValueClamp, kValueClamp, buf);
                stack.push_back(buf);
                break;
            }
        }
    }
    std::copy(stack.back().begin(), stack.back().end(), out.begin());
}

// ---------------------------------------------------------------------------
// Offspring-selection GA
// ---------------------------------------------------------------------------

namespace {

struct Individual {
    Expression expr;
    double fitness = 1.0;
    double scale_a = 1.0;
    double scale_b = 0.0;
};

constexpr OpCode kBinaryOps[] = {OpCode::add, OpCode::sub, OpCode::mul, OpCode::div};
constexpr OpCode kUnaryOps[] = {OpCode::sin, OpCode::exp, OpCode::log};

ExprNode random_leaf(Rng& rng, int n_vars, const OsgaParams& params) {
    ExprNode node;
    if (rng.uniform() < 0.8) {
        node.op = OpCode::var;
        node.var = static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(n_vars)));
    } else {
        node.op = OpCode::cst;
        node.value = rng.uniform(params.const_min, params.const_max);
    }
    return node;
}

void grow(std::vector<ExprNode>& nodes, Rng& rng, int n_vars, const OsgaParams& params,
          int budget) {
    if (budget <= 1 || (budget < 3 && rng.uniform() < 0.5) || rng.uniform() < 0.2) {
        nodes.push_back(random_leaf(rng, n_vars, params));
        return;
    }
    // Binary ops are favoured 2:1; a unary op needs budget for one child only.
    if (budget >= 3 && rng.uniform() < 2.0 / 3.0) {
        ExprNode node;
        node.op = kBinaryOps[rng.bounded(4)];
        nodes.push_back(node);
        const int remaining = budget - 1;
        const int left = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(remaining - 1)));
        grow(nodes, rng, n_vars, params, left);
        grow(nodes, rng, n_vars, params, remaining - left);
    } else {
        ExprNode node;
        node.op = kUnaryOps[rng.bounded(3)];
        nodes.push_back(node);
        grow(nodes, rng, n_vars, params, budget - 1);
    }
}

Expression random_tree(Rng& rng, int n_vars, const OsgaParams& params, int max_length) {
    std::vector<ExprNode> nodes;
    grow(nodes, rng, n_vars, params, max_length);
    return Expression(std::move(nodes));
}

Expression crossover(const Expression& a, const Expression& b, Rng& rng, int max_length) {
    const auto& na = a.nodes();
    const std::size_t point = rng.bounded(na.size());
    const std::size_t removed = a.subtree_size(point);
    const std::size_t cap =
        static_cast<std::size_t>(max_length) - na.size() + removed;

    const auto sizes = b.all_subtree_sizes();
    std::vector<std::size_t> feasible;
    feasible.reserve(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        if (sizes[j] <= cap) {
            feasible.push_back(j);
        }
    }
    // A single leaf always fits, so feasible is never empty.
    const std::size_t j = feasible[rng.bounded(feasible.size())];
    const auto& nb = b.nodes();

    std::vector<ExprNode> child;
    child.reserve(na.size() - removed + sizes[j]);
    child.insert(child.end(), na.begin(), na.begin() + static_cast<std::ptrdiff_t>(point));
    child.insert(child.end(), nb.begin() + static_cast<std::ptrdiff_t>(j),
                 nb.begin() + static_cast<std::ptrdiff_t>(j + sizes[j]));
    child.insert(child.end(), na.begin() + static_cast<std::ptrdiff_t>(point + removed),
                 na.end());
    return Expression(std::move(child));
}

Expression mutate(const Expression& parent, Rng& rng, int n_vars, const OsgaParams& params) {
    std::vector<ExprNode> nodes = parent.nodes();
    const int kind = static_cast<int>(rng.bounded(4));

    if (kind == 0) {
        // Swap one operator for another of the same arity.
        std::vector<std::size_t> ops;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (arity(nodes[i].op) > 0) {
                ops.push_back(i);
            }
        }
        if (!ops.empty()) {
            const std::size_t i = ops[rng.bounded(ops.size())];
            if (arity(nodes[i].op) == 2) {
                nodes[i].op = kBinaryOps[rng.bounded(4)];
            } else {
                nodes[i].op = kUnaryOps[rng.bounded(3)];
            }
            return Expression(std::move(nodes));
        }
        // fall through to a leaf change on pure-leaf trees
    }
    if (kind == 1 || kind == 0) {
        std::vector<std::size_t> leaves;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (arity(nodes[i].op) == 0) {
                leaves.push_back(i);
            }
        }
        const std::size_t i = leaves[rng.bounded(leaves.size())];
        nodes[i] = random_leaf(rng, n_vars, params);
        return Expression(std::move(nodes));
    }
    if (kind == 2) {
        // Perturb a constant, or fall back to a leaf change.
        std::vector<std::size_t> consts;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].op == OpCode::cst) {
                consts.push_back(i);
            }
        }
        if (!consts.empty()) {
            const std::size_t i = consts[rng.bounded(consts.size())];
            nodes[i].value += rng.normal() * 0.3 * std::max(std::abs(nodes[i].value), 1.0);
            return Expression(std::move(nodes));
        }
        std::vector<std::size_t> leaves;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (arity(nodes[i].op) == 0) {
                leaves.push_back(i);
            }
        }
        const std::size_t i = leaves[rng.bounded(leaves.size())];
        nodes[i] = random_leaf(rng, n_vars, params);
        return Expression(std::move(nodes));
    }

    // Replace a whole subtree within the length budget.
    Expression expr(std::move(nodes));
    const auto& prefix = expr.nodes();
    const std::size_t point = rng.bounded(prefix.size());
    const std::size_t removed = expr.subtree_size(point);
    const int budget = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(params.max_tree_length) -
                                  prefix.size() + removed,
                              8));
    std::vector<ExprNode> replacement;
    grow(replacement, rng, n_vars, params, std::max(1, budget));

    std::vector<ExprNode> child;
    child.reserve(prefix.size() - removed + replacement.size());
    child.insert(child.end(), prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(point));
    child.insert(child.end(), replacement.begin(), replacement.end());
    child.insert(child.end(), prefix.begin() + static_cast<std::ptrdiff_t>(point + removed),
                 prefix.end());
    return Expression(std::move(child));
}

struct FitnessContext {
    std::span<const std::span<const double>> inputs;
    std::span<const double> target;
    double target_mean = 0.0;
    double target_ssd = 0.0;  // sum of squared deviations
    bool linear_scaling = true;
    EvalArena arena;
    std::vector<double> pred;
};

void evaluate_individual(Individual& ind, FitnessContext& ctx) {
    const std::size_t n = ctx.target.size();
    ctx.pred.resize(n);
    std::span<double> pred(ctx.pred);
    eval_expression(ind.expr, ctx.inputs, pred, ctx.arena);

    double a = 1.0;
    double b = 0.0;
    if (ctx.linear_scaling) {
        const double pm = kernels::mean(pred);
        const double pss = kernels::sumsq_dev(pred, pm);
        if (pss > 1e-300 && std::isfinite(pss)) {
            const double cov = kernels::dot_centered(pred, pm, ctx.target, ctx.target_mean);
            a = cov / pss;
            b = ctx.target_mean - a * pm;
        } else {
            a = 0.0;
            b = ctx.target_mean;
        }
        if (!std::isfinite(a) || !std::isfinite(b)) {
            a = 0.0;
            b = ctx.target_mean;
        }
        kernels::axpb(pred, a, b, pred);
    }
    double nmse = kernels::sumsq_diff(pred, ctx.target) / ctx.target_ssd;
    if (!std::isfinite(nmse)) {
        nmse = 1e100;
    }
    ind.fitness = nmse;
    ind.scale_a = a;
    ind.scale_b = b;
}

std::size_t proportional_pick(const std::vector<double>& cumulative, Rng& rng) {
    const double draw = rng.uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), draw);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                 cumulative.size() - 1);
}

} // namespace

OsgaResult osga_fit(std::span<const std::span<const double>> inputs,
                    std::span<const double> target, const OsgaParams& params,
                    std::uint64_t seed) {
    if (inputs.empty() || target.size() < 2) {
        throw DataError("osga_fit: need at least one input column and two rows");
    }
    if (params.population < 2 || params.max_tree_length < 3) {
        throw DataError("osga_fit: population must be >= 2 and max_tree_length >= 3");
    }
    const int n_vars = static_cast<int>(inputs.size());

    FitnessContext ctx;
    ctx.inputs = inputs;
    ctx.target = target;
    ctx.target_mean = kernels::mean(target);
    ctx.target_ssd = kernels::sumsq_dev(target, ctx.target_mean);
    ctx.linear_scaling = params.linear_scaling;
    if (ctx.target_ssd <= 0.0) {
        throw NumericError("osga_fit: target has zero variance");
    }

    Rng rng(seed);
    const auto pop_size = static_cast<std::size_t>(params.population);

    std::vector<Individual> population(pop_size);
    for (Individual& ind : population) {
        // Ramped initial lengths cover the whole admissible size range.
        const int budget = 3 + static_cast<int>(rng.bounded(
                                   static_cast<std::uint64_t>(params.max_tree_length - 2)));
        ind.expr = random_tree(rng, n_vars, params, budget);
        evaluate_individual(ind, ctx);
    }

    const auto best_of = [](const std::vector<Individual>& pop) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < pop.size(); ++i) {
            if (pop[i].fitness < pop[best].fitness) {
                best = i;
            }
        }
        return best;
    };

    OsgaResult result;
    OsgaStats& stats = result.stats;
    Individual champion = population[best_of(population)];

    std::vector<double> cumulative(pop_size);
    for (int gen = 0; gen < params.max_generations; ++gen) {
        double acc = 0.0;
        for (std::size_t i = 0; i < pop_size; ++i) {
            acc += 1.0 / (1.0 + population[i].fitness);
            cumulative[i] = acc;
        }

        std::vector<Individual> next;
        next.reserve(pop_size);
        next.push_back(champion);  // single elite

        const double max_trials = params.max_selection_pressure * static_cast<double>(pop_size);
        std::size_t trials = 0;
        bool exhausted = false;
        while (next.size() < pop_size) {
            if (static_cast<double>(++trials) > max_trials) {
                exhausted = true;
                break;
            }
            const Individual& p1 = population[proportional_pick(cumulative, rng)];
            const Individual& p2 = population[rng.bounded(pop_size)];

            Individual child;
            if (rng.uniform() < params.crossover_rate) {
                child.expr = crossover(p1.expr, p2.expr, rng, params.max_tree_length);
            } else {
                child.expr = p1.expr;
            }
            if (rng.uniform() < params.mutation_rate) {
                child.expr = mutate(child.expr, rng, n_vars, params);
            }
            evaluate_individual(child, ctx);

            if (child.fitness < std::min(p1.fitness, p2.fitness)) {
                next.push_back(std::move(child));
            }
        }

        stats.final_selection_pressure =
            static_cast<double>(trials) / static_cast<double>(pop_size);
        if (exhausted) {
            stats.pressure_terminated = true;
            break;
        }

        population = std::move(next);
        ++stats.generations;
        const Individual& generation_best = population[best_of(population)];
        if (generation_best.fitness < champion.fitness) {
            champion = generation_best;
        }
        stats.best_per_generation.push_back(champion.fitness);
    }

    result.expr = std::move(champion.expr);
    result.scale_a = champion.scale_a;
    result.scale_b = champion.scale_b;
    result.train_nmse = champion.fitness;
    return result;
}

} // namespace vin
