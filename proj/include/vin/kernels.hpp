#pragma once

#include <cstddef>
#include <span>

namespace vin::kernels {

/// Divisors with magnitude at or below this are treated as zero by the
/// protected division kernel, which then yields 1.
inline constexpr double kProtectedDivEps = 1e-12;

enum class Backend { scalar, avx2 };

/// True when the running CPU (and this build) can execute the AVX2 variants.
bool avx2_supported();

/// Backend currently used by the dispatched entry points below.
Backend active_backend();

/// Force a backend, mainly for equivalence tests. Throws vin::DataError if
/// the requested backend is unavailable on this machine.
void set_backend(Backend backend);

// Reductions.
double sum(std::span<const double> a);
double dot(std::span<const double> a, std::span<const double> b);
/// Sum of (a[i]-mean_a)*(b[i]-mean_b).
double dot_centered(std::span<const double> a, double mean_a,
                    std::span<const double> b, double mean_b);
/// Sum of (a[i]-m)^2.
double sumsq_dev(std::span<const double> a, double m);
/// Sum of (a[i]-b[i])^2.
double sumsq_diff(std::span<const double> a, std::span<const double> b);

// Elementwise maps. Output may alias either input.
void add(std::span<const double> a, std::span<const double> b, std::span<double> out);
void sub(std::span<const double> a, std::span<const double> b, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);
/// out[i] = |b[i]| <= kProtectedDivEps ? 1 : a[i]/b[i]
void div_protected(std::span<const double> a, std::span<const double> b, std::span<double> out);
void clamp(std::span<const double> a, double lo, double hi, std::span<double> out);
/// out[i] = alpha*a[i] + beta
void axpb(std::span<const double> a, double alpha, double beta, std::span<double> out);
/// acc[i] += alpha*a[i]
void axpy(std::span<const double> a, double alpha, std::span<double> acc);

// Statistics built on the kernels. Variances are population variances
// (denominator n), which keeps NMSE == 1 exact for the constant-mean
// predictor.
double mean(std::span<const double> a);
double variance(std::span<const double> a);
double mse(std::span<const double> pred, std::span<const double> target);
/// MSE divided by target variance. Throws vin::NumericError when the target
/// variance is zero.
double nmse(std::span<const double> pred, std::span<const double> target);
/// Pearson correlation; returns 0 when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

namespace detail {

struct KernelTable {
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*dot_centered)(const double*, double, const double*, double, std::size_t);
    double (*sumsq_dev)(const double*, double, std::size_t);
    double (*sumsq_diff)(const double*, const double*, std::size_t);
    void (*add)(const double*, const double*, double*, std::size_t);
    void (*sub)(const double*, const double*, double*, std::size_t);
    void (*mul)(const double*, const double*, double*, std::size_t);
    void (*div_protected)(const double*, const double*, double*, std::size_t);
    void (*clamp)(const double*, double, double, double*, std::size_t);
    void (*axpb)(const double*, double, double, double*, std::size_t);
    void (*axpy)(const double*, double, double*, std::size_t);
};

const KernelTable& scalar_table();
/// Null when this build carries no AVX2 translation unit.
const KernelTable* avx2_table();

} // namespace detail

} // namespace vin::kernels
