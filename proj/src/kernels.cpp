#include "vin/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "vin/errors.hpp"

namespace vin::kernels {

namespace {

double sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i];
    }
    return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double dot_centered_scalar(const double* a, double ma, const double* b, double mb,
                           std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += (a[i] - ma) * (b[i] - mb);
    }
    return acc;
}

double sumsq_dev_scalar(const double* a, double m, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - m;
        acc += d * d;
    }
    return acc;
}

double sumsq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] + b[i];
    }
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] - b[i];
    }
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

void div_protected_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::abs(b[i]) <= kProtectedDivEps ? 1.0 : a[i] / b[i];
    }
}

void clamp_scalar(const double* a, double lo, double hi, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::min(hi, std::max(lo, a[i]));
    }
}

void axpb_scalar(const double* a, double alpha, double beta, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = alpha * a[i] + beta;
    }
}

void axpy_scalar(const double* a, double alpha, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] += alpha * a[i];
    }
}

const detail::KernelTable* select_default() {
    if (const detail::KernelTable* t = detail::avx2_table()) {
        return t;
    }
    return &detail::scalar_table();
}

const detail::KernelTable*& active_table() {
    static const detail::KernelTable* table = select_default();
    return table;
}

} // namespace

namespace detail {

const KernelTable& scalar_table() {
    static const KernelTable table{
        sum_scalar,     dot_scalar, dot_centered_scalar, sumsq_dev_scalar,
        sumsq_diff_scalar, add_scalar, sub_scalar,          mul_scalar,
        div_protected_scalar, clamp_scalar, axpb_scalar, axpy_scalar,
    };
    return table;
}

} // namespace detail

bool avx2_supported() { return detail::avx2_table() != nullptr; }

Backend active_backend() {
    return active_table() == &detail::scalar_table() ? Backend::scalar : Backend::avx2;
}

void set_backend(Backend backend) {
    if (backend == Backend::scalar) {
        active_table() = &detail::scalar_table();
        return;
    }
    const detail::KernelTable* t = detail::avx2_table();
    if (t == nullptr) {
        throw DataError("kernels: AVX2 backend not available on this machine");
    }
    active_table() = t;
}

double sum(std::span<const double> a) { return active_table()->sum(a.data(), a.size()); }

double dot(std::span<const double> a, std::span<const double> b) {
    return active_table()->dot(a.data(), b.data(), a.size());
}

double dot_centered(std::span<const double> a, double mean_a, std::span<const double> b,
                    double mean_b) {
    return active_table()->dot_centered(a.data(), mean_a, b.data(), mean_b, a.size());
}

double sumsq_dev(std::span<const double> a, double m) {
    return active_table()->sumsq_dev(a.data(), m, a.size());
}

double sumsq_diff(std::span<const double> a, std::span<const double> b) {
    return active_table()->sumsq_diff(a.data(), b.data(), a.size());
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    active_table()->add(a.data(), b.data(), out.data(), a.size());
}

void sub(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    active_table()->sub(a.data(), b.data(), out.data(), a.size());
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    active_table()->mul(a.data(), b.data(), out.data(), a.size());
}

void div_protected(std::span<const double> a, std::span<const double> b,
                   std::span<double> out) {
    active_table()->div_protected(a.data(), b.data(), out.data(), a.size());
}

void clamp(std::span<const double> a, double lo, double hi, std::span<double> out) {
    active_table()->clamp(a.data(), lo, hi, out.data(), a.size());
}

void axpb(std::span<const double> a, double alpha, double beta, std::span<double> out) {
    active_table()->axpb(a.data(), alpha, beta, out.data(), a.size());
}

void axpy(std::span<const double> a, double alpha, std::span<double> acc) {
    active_table()->axpy(a.data(), alpha, acc.data(), a.size());
}

double mean(std::span<const double> a) {
    if (a.empty()) {
        throw NumericError("mean of empty sequence");
    }
    return sum(a) / static_cast<double>(a.size());
}

double variance(std::span<const double> a) {
    return sumsq_dev(a, mean(a)) / static_cast<double>(a.size());
}

double mse(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size() || pred.empty()) {
        throw NumericError("mse: size mismatch or empty input");
    }
    return sumsq_diff(pred, target) / static_cast<double>(pred.size());
}

double nmse(std::span<const double> pred, std::span<const double> target) {
    const double var = sumsq_dev(target, mean(target));
    if (var <= 0.0) {
        throw NumericError("nmse undefined: target variance is zero");
    }
    return sumsq_diff(pred, target) / var;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw NumericError("pearson: need two sequences of equal length >= 2");
    }
    const double ma = mean(a);
    const double mb = mean(b);
    const double va = sumsq_dev(a, ma);
    const double vb = sumsq_dev(b, mb);
    if (va <= 0.0 || vb <= 0.0) {
        return 0.0;
    }
    return dot_centered(a, ma, b, mb) / std::sqrt(va * vb);
}

} // namespace vin::kernels
