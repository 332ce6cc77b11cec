#include <doctest.h>

#include <cmath>
#include <vector>

#include "vin/errors.hpp"
#include "vin/kernels.hpp"
#include "vin/rng.hpp"

using namespace vin;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n, double lo = -10.0, double hi = 10.0) {
    std::vector<double> v(n);
    for (double& x : v) {
        x = rng.uniform(lo, hi);
    }
    return v;
}

struct BackendGuard {
    kernels::Backend saved = kernels::active_backend();
    ~BackendGuard() { kernels::set_backend(saved); }
};

} // namespace

TEST_CASE("scalar reductions match hand computations") {
    BackendGuard guard;
    kernels::set_backend(kernels::Backend::scalar);

    const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> b{2.0, -1.0, 0.5, 1.0};
    CHECK(kernels::sum(a) == doctest::Approx(10.0));
    CHECK(kernels::dot(a, b) == doctest::Approx(2.0 - 2.0 + 1.5 + 4.0));
    CHECK(kernels::mean(a) == doctest::Approx(2.5));
    CHECK(kernels::variance(a) == doctest::Approx(1.25));  // population variance
    CHECK(kernels::mse(a, b) == doctest::Approx((1.0 + 9.0 + 6.25 + 9.0) / 4.0));
}

TEST_CASE("nmse of the constant-mean predictor is exactly 1") {
    const std::vector<double> y{1.0, 2.0, 3.0, 10.0};
    const std::vector<double> pred(4, (1.0 + 2.0 + 3.0 + 10.0) / 4.0);
    CHECK(kernels::nmse(pred, y) == 1.0);
}

TEST_CASE("nmse rejects constant targets") {
    const std::vector<double> y(5, 3.0);
    const std::vector<double> pred{1, 2, 3, 4, 5};
    CHECK_THROWS_AS(kernels::nmse(pred, y), NumericError);
}

TEST_CASE("pearson is affine invariant and symmetric") {
    Rng rng(7);
    const auto a = random_values(rng, 64);
    std::vector<double> b(a.size());
    kernels::axpb(a, 2.5, -3.0, b);
    CHECK(kernels::pearson(a, b) == doctest::Approx(1.0));
    kernels::axpb(a, -0.5, 1.0, b);
    CHECK(kernels::pearson(a, b) == doctest::Approx(-1.0));

    const auto c = random_values(rng, 64);
    CHECK(kernels::pearson(a, c) == doctest::Approx(kernels::pearson(c, a)));
}

TEST_CASE("protected division yields 1 on zero divisors") {
    const std::vector<double> num{4.0, 5.0, 6.0};
    const std::vector<double> den{2.0, 0.0, 1e-13};
    std::vector<double> out(3);
    kernels::div_protected(num, den, out);
    CHECK(out[0] == 2.0);
    CHECK(out[1] == 1.0);
    CHECK(out[2] == 1.0);
}

TEST_CASE("AVX2 variants agree with the scalar reference") {
    if (!kernels::avx2_supported()) {
        return;  // nothing to compare on this machine
    }
    BackendGuard guard;
    Rng rng(123);

    for (const std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4},
                                std::size_t{7}, std::size_t{8}, std::size_t{31},
                                std::size_t{100}, std::size_t{1001}}) {
        const auto a = random_values(rng, n);
        auto b = random_values(rng, n);
        if (n > 4) {
            b[n / 2] = 0.0;  // exercise the protected-division blend
        }

        kernels::set_backend(kernels::Backend::scalar);
        const double sum_s = kernels::sum(a);
        const double dot_s = kernels::dot(a, b);
        const double dc_s = kernels::dot_centered(a, 0.25, b, -0.5);
        const double sd_s = kernels::sumsq_dev(a, 0.75);
        const double df_s = kernels::sumsq_diff(a, b);
        std::vector<double> add_s(n), sub_s(n), mul_s(n), div_s(n), clamp_s(n), axpb_s(n),
            axpy_s(a);
        kernels::add(a, b, add_s);
        kernels::sub(a, b, sub_s);
        kernels::mul(a, b, mul_s);
        kernels::div_protected(a, b, div_s);
        kernels::clamp(a, -1.0, 1.0, clamp_s);
        kernels::axpb(a, 1.5, -2.0, axpb_s);
        kernels::axpy(b, 0.5, axpy_s);

        kernels::set_backend(kernels::Backend::avx2);
        if (n > 0) {
            CHECK(kernels::sum(a) == doctest::Approx(sum_s).epsilon(1e-12));
            CHECK(kernels::dot(a, b) == doctest::Approx(dot_s).epsilon(1e-12));
            CHECK(kernels::dot_centered(a, 0.25, b, -0.5) ==
                  doctest::Approx(dc_s).epsilon(1e-12));
            CHECK(kernels::sumsq_dev(a, 0.75) == doctest::Approx(sd_s).epsilon(1e-12));
            CHECK(kernels::sumsq_diff(a, b) == doctest::Approx(df_s).epsilon(1e-12));
        }

        // Elementwise maps must round identically lane by lane.
        std::vector<double> out(n), axpy_v(a);
        kernels::add(a, b, out);
        CHECK(out == add_s);
        kernels::sub(a, b, out);
        CHECK(out == sub_s);
        kernels::mul(a, b, out);
        CHECK(out == mul_s);
        kernels::div_protected(a, b, out);
        CHECK(out == div_s);
        kernels::clamp(a, -1.0, 1.0, out);
        CHECK(out == clamp_s);
        kernels::axpb(a, 1.5, -2.0, out);
        CHECK(out == axpb_s);
        kernels::axpy(b, 0.5, axpy_v);
        CHECK(axpy_v == axpy_s);
    }
}

TEST_CASE("forcing an unavailable backend is an error") {
    if (kernels::avx2_supported()) {
        return;
    }
    CHECK_THROWS_AS(kernels::set_backend(kernels::Backend::avx2), DataError);
}
