#include "viscomem/memory_kernel.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace viscomem;

namespace {

MemoryKernel power_kernel(double p) {
    // Tabulated (1+s)^{-p} with the matching analytic tail.
    TabulatedMonotone t;
    for (int i = 0; i <= 200; ++i) {
        const double s = 1e-3 * std::pow(10.0, 5.0 * i / 200.0);
        t.nodes.push_back(s);
        t.values.push_back(std::pow(1.0 + s, -p));
    }
    t.tail = TabulatedMonotone::Tail::Power;
    t.tail_parameter = p;
    return MemoryKernel::tabulated(t);
}

// Composite Simpson rule on [a, b].
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Simpson on panels split at multiples of 1/4, where the step kernels below jump.
template <class F>
double simpson_split(F f, double a, double b) {
    double sum = 0.0, lo = a;
    while (lo < b) {
        const double hi = std::min(b, (std::floor(lo * 4.0 + 1e-12) + 1.0) / 4.0);
        sum += simpson(f, lo + 1e-13, hi - 1e-13, 40);  // one-sided values at the jumps
        lo = hi;
    }
    return sum;
}

}  // namespace

TEST_CASE("total mass closed forms") {
    CHECK(MemoryKernel::exponential().total_mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(MemoryKernel::prony({{2.0, 4.0}}).total_mass() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(MemoryKernel::piecewise_constant({1.0}, {1.0}).total_mass() == doctest::Approx(1.0).epsilon(1e-15));
    // 2^{-ceil s}: sum of 2^{-n} = 1.
    CHECK(MemoryKernel::piecewise_constant({1.0}, {0.5}, 0.5).total_mass() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(MemoryKernel::none().is_zero());
    CHECK(MemoryKernel::none().total_mass() == 0.0);
    // (1+s)^{-2} has mass 1; the tabulated representation is piecewise linear between nodes.
    CHECK(power_kernel(2.0).total_mass() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("tail function matches quadrature of the kernel") {
    const MemoryKernel kernels[] = {
        MemoryKernel::prony({{0.5, 0.2}, {1.0, 1.0}, {2.0, 5.0}}),
        MemoryKernel::piecewise_constant({1.0, 2.0, 3.0}, {2.0, 1.0, 0.5}),
        MemoryKernel::piecewise_constant({0.25, 0.5}, {1.0, 0.95}, 0.9),
        power_kernel(3.0),
    };
    for (const auto& k : kernels) {
        for (double s : {0.0, 0.3, 1.0, 2.5}) {
            const double ref = simpson_split([&](double x) { return k.mu(x); }, s, s + 60.0) + k.tail(s + 60.0);
            CHECK(k.tail(s) == doctest::Approx(ref).epsilon(1e-4));
        }
        CHECK(k.tail(0.0) == doctest::Approx(k.total_mass()).epsilon(1e-12));
        // I nonincreasing and convex on a log grid.
        double prev = k.tail(1e-4);
        double prev_slope = -k.mu(1e-4);
        for (int i = 1; i <= 200; ++i) {
            const double a = 1e-4 * std::pow(10.0, 5.0 * (i - 1) / 200.0);
            const double b = 1e-4 * std::pow(10.0, 5.0 * i / 200.0);
            const double cur = k.tail(b);
            CHECK(cur <= prev + 1e-15);
            const double slope = (cur - k.tail(a)) / (b - a);
            CHECK(slope >= prev_slope - 1e-6 * std::abs(prev_slope));
            prev = cur;
            prev_slope = slope;
        }
    }
}

TEST_CASE("tail integral closed forms") {
    const auto k = MemoryKernel::prony({{1.0, 1.0}, {1.0, 3.0}});
    // int_a^b (e^{-s} + e^{-3s}/3) ds
    const double a = 0.2, b = 1.7;
    const double exact = (std::exp(-a) - std::exp(-b)) + (std::exp(-3 * a) - std::exp(-3 * b)) / 9.0;
    CHECK(k.tail_integral(a, b) == doctest::Approx(exact).epsilon(1e-14));
    const auto step = MemoryKernel::piecewise_constant({1.0}, {0.5}, 0.5);
    const double ref = simpson([&](double x) { return step.tail(x); }, 0.1, 3.4, 200000);
    CHECK(step.tail_integral(0.1, 3.4) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("Theta certification") {
    SUBCASE("exponential kernel gives Theta = 1") {
        const auto c = certify_theta(MemoryKernel::exponential());
        REQUIRE(c.certified);
        CHECK(c.theta == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("indicator of (0,1] gives Theta = 1") {
        const auto c = certify_theta(MemoryKernel::piecewise_constant({1.0}, {1.0}));
        REQUIRE(c.certified);
        CHECK(c.theta == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("Prony sum matches the supremum of the closed-form ratio") {
        const auto k = MemoryKernel::prony({{1.0, 1.0}, {1.0, 3.0}});
        double sup = 0.0;
        for (int i = 0; i <= 100000; ++i) {
            const double s = 1e-6 * std::pow(10.0, 9.0 * i / 100000.0);
            const double I = std::exp(-s) + std::exp(-3 * s) / 3;
            sup = std::max(sup, I / (std::exp(-s) + std::exp(-3 * s)));
        }
        const auto c = certify_theta(k);
        REQUIRE(c.certified);
        CHECK(c.theta == doctest::Approx(sup).epsilon(0.01));
    }
    SUBCASE("geometric step kernel: I/mu = n - s + 1 <= 2") {
        const auto c = certify_theta(MemoryKernel::piecewise_constant({1.0}, {0.5}, 0.5));
        REQUIRE(c.certified);
        CHECK(c.theta == doctest::Approx(2.0).epsilon(0.01));
    }
    SUBCASE("power law 1/(1+s)^2 fails with a witness") {
        const auto c = certify_theta(power_kernel(2.0));
        CHECK_FALSE(c.certified);
        CHECK(std::isfinite(c.witness));
        CHECK(c.witness > 1.0);
    }
    SUBCASE("zero kernel is rejected") { CHECK_THROWS_AS(certify_theta(MemoryKernel::none()), std::invalid_argument); }
}

TEST_CASE("exponential comparison certification") {
    const auto e = MemoryKernel::exponential();
    const auto c1 = certify_nece(e, 1.0);
    REQUIRE(c1.certified);
    CHECK(c1.constant == doctest::Approx(1.0).epsilon(1e-9));
    const auto c2 = certify_nece(e, 2.0);
    CHECK_FALSE(c2.certified);
    CHECK(std::isfinite(c2.witness_sigma));

    // (e^{-s-sigma} + e^{-3s-3sigma}) e^{sigma} / (e^{-s} + e^{-3s}) <= 1, with equality at sigma = 0.
    const auto c3 = certify_nece(MemoryKernel::prony({{1.0, 1.0}, {1.0, 3.0}}), 1.0);
    REQUIRE(c3.certified);
    CHECK(c3.constant == doctest::Approx(1.0).epsilon(0.01));

    const auto jump = certify_nece(MemoryKernel::piecewise_constant({1.0}, {0.5}, 0.5), 0.3);
    REQUIRE(jump.certified);
    CHECK(jump.constant > 1.0);
}

TEST_CASE("cross-check of the two kernel conditions") {
    const auto ok = cross_check_equivalence(MemoryKernel::exponential());
    CHECK(ok.agree);
    CHECK(ok.theta.certified);
    REQUIRE(ok.best.has_value());

    const auto bad = cross_check_equivalence(power_kernel(2.0));
    CHECK(bad.agree);
    CHECK_FALSE(bad.theta.certified);
    CHECK_FALSE(bad.best.has_value());

    const auto jump = cross_check_equivalence(MemoryKernel::piecewise_constant({1.0}, {0.5}, 0.5));
    CHECK(jump.agree);
    REQUIRE(jump.best.has_value());
    CHECK(jump.best->constant > 1.0);
}

TEST_CASE("Prony closure: scaled sums keep Theta below the component maximum") {
    const auto a = MemoryKernel::prony({{1.0, 2.0}});
    const auto b = MemoryKernel::prony({{3.0, 0.5}});
    const auto sum = MemoryKernel::prony({{2.5, 2.0}, {0.7 * 3.0, 0.5}});
    const double ta = certify_theta(a).theta, tb = certify_theta(b).theta;
    CHECK(ta == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(tb == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(certify_theta(sum).theta <= std::max(ta, tb) * (1 + 1e-9));
}

TEST_CASE("invalid kernels are rejected") {
    CHECK_THROWS_AS(MemoryKernel::prony({{-1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(MemoryKernel::prony({{1.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(MemoryKernel::piecewise_constant({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(MemoryKernel::piecewise_constant({1.0}, {1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(power_kernel(1.0), std::invalid_argument);
}

TEST_CASE("singular tabulated kernel near the origin") {
    // s^{-1/2} e^{-s}: mass Gamma(1/2) = sqrt(pi).
    TabulatedMonotone t;
    for (int i = 0; i <= 400; ++i) {
        const double s = 1e-4 * std::pow(10.0, 5.5 * i / 400.0);
        t.nodes.push_back(s);
        t.values.push_back(std::exp(-s) / std::sqrt(s));
    }
    t.origin_exponent = 0.5;
    t.tail_parameter = 1.0;
    const auto k = MemoryKernel::tabulated(t);
    CHECK(k.total_mass() == doctest::Approx(std::sqrt(M_PI)).epsilon(2e-3));
    CHECK(k.mu(1e-8) > k.mu(1e-6));
    CHECK(certify_theta(k).certified);
}
