#include <cmath>
#include <vector>

#include "vin/errors.hpp"
#include "vin/kernels.hpp"
#include "vin/model.hpp"

namespace vin::detail {

namespace {

// In-place Cholesky solve of A x = b for a symmetric matrix in row-major
// storage. Returns false when a pivot collapses.
bool cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t n,
                    std::vector<double>& x) {
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if (!(diag > 0.0) || !std::isfinite(diag)) {
            return false;
        }
        const double root = std::sqrt(diag);
        a[j * n + j] = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / root;
        }
    }
    // Forward then backward substitution.
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) {
            v -= a[i * n + k] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            v -= a[k * n + i] * x[k];
        }
        x[i] = v / a[i * n + i];
    }
    return true;
}

} // namespace

LinearFit fit_linear(std::span<const std::span<const double>> inputs,
                     std::span<const double> target, const LinearParams& params) {
    const std::size_t k = inputs.size();
    const std::size_t n = target.size();
    const std::size_t dim = k + 1;  // trailing intercept column of ones

    // Normal equations: G = X^T X, rhs = X^T y.
    std::vector<double> gram(dim * dim, 0.0);
    std::vector<double> rhs(dim, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            const double v = kernels::dot(inputs[i], inputs[j]);
            gram[i * dim + j] = v;
            gram[j * dim + i] = v;
        }
        const double s = kernels::sum(inputs[i]);
        gram[i * dim + k] = s;
        gram[k * dim + i] = s;
        rhs[i] = kernels::dot(inputs[i], target);
    }
    gram[k * dim + k] = static_cast<double>(n);
    rhs[k] = kernels::sum(target);

    std::vector<double> solution;
    if (!cholesky_solve(gram, rhs, dim, solution)) {
        for (std::size_t i = 0; i < dim; ++i) {
            gram[i * dim + i] += params.ridge;
        }
        if (!cholesky_solve(gram, rhs, dim, solution)) {
            throw NumericError("linear fit: singular design matrix, ridge fallback failed");
        }
    }

    LinearFit fit;
    fit.coefficients.assign(solution.begin(), solution.begin() + static_cast<std::ptrdiff_t>(k));
    fit.intercept = solution[k];
    return fit;
}

} // namespace vin::detail
