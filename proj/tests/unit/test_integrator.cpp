#include "viscomem/diagnostics.hpp"
#include "viscomem/integrator.hpp"
#include "viscomem/random.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace viscomem;

namespace {

constexpr double pi = std::numbers::pi;

DomainPtr line(int N, double L = pi) {
    DomainSpec s;
    s.lengths[0] = L;
    s.modes[0] = N;
    return Domain::create(s);
}

SpectralField smooth_random(const DomainPtr& dom, Rng& rng, double scale = 1.0) {
    SpectralField u(dom);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = scale * rng.normal() / std::pow(i + 1.0, 2.0);
    return u;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Exact solution of (1+l) u'' + l u' + l u = 0 with u(0) = 1, u'(0) = 0.
double oscillator(double l, double t) {
    using C = std::complex<double>;
    const double a = 1 + l;
    const C disc = std::sqrt(C(l * l - 4 * a * l));
    const C r1 = (-l + disc) / (2 * a), r2 = (-l - disc) / (2 * a);
    // u = A e^{r1 t} + B e^{r2 t}, A + B = 1, A r1 + B r2 = 0
    const C A = -r2 / (r1 - r2), B = r1 / (r1 - r2);
    return (A * std::exp(r1 * t) + B * std::exp(r2 * t)).real();
}

}  // namespace

TEST_CASE("configuration checks") {
    StepConfig c;
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.dt = 0.1;
    c.rho = 4.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(step_count(1.0, 0.25) == 4);
    CHECK_THROWS_AS(step_count(1.0, 0.3), std::invalid_argument);
    const auto dom = line(16);
    const double dt = default_time_step(*dom);
    double worst = 0.0;
    for (double l : dom->eigenvalues()) worst = std::max(worst, std::sqrt(l / (1 + l)));
    CHECK(dt * worst == doctest::Approx(0.1));
}

TEST_CASE("inertia coefficients") {
    CHECK(inertia_coefficient(0.0, 0.0) == 1.0);
    CHECK(inertia_coefficient(0.0, 0.5) == 0.0);
    CHECK(inertia_coefficient(-2.0, 2.0) == doctest::Approx(4.0));
    CHECK(discrete_inertia_coefficient(0.7, 0.7, 1.5) == doctest::Approx(std::pow(0.7, 1.5)).epsilon(1e-9));
    // 2 (K(v1) - K(v0)) / (v1^2 - v0^2) with K(v) = |v|^4 / 4 is (v0^2 + v1^2) / 2.
    CHECK(discrete_inertia_coefficient(0.3, -1.1, 2.0) == doctest::Approx(0.5 * (0.09 + 1.21)).epsilon(1e-13));
}

TEST_CASE("zero data is a fixed point") {
    const auto dom = line(8);
    const auto k = MemoryKernel::exponential();
    StepConfig cfg;
    cfg.rho = 1.0;
    SystemState z = make_state(SpectralField(dom), SpectralField(dom), HistoryState::exp_modes(dom, *k.prony()));
    const SpectralField h(dom);
    const auto r = evolve(z, 1.0, cfg, Nonlinearity::cubic(), h);
    CHECK(phase_norm_squared(r.final_state) == 0.0);
    CHECK(r.final_state.t == doctest::Approx(1.0));
    const auto same = evolve(z, 0.0, cfg, Nonlinearity::cubic(), h);
    CHECK(same.steps == 0);
    CHECK(same.final_state.t == 0.0);
}

TEST_CASE("linear damped oscillator is reproduced at second order") {
    const auto dom = line(6);
    const SpectralField h(dom);
    for (int mode : {1, 3}) {
        const double l = mode * mode;
        std::vector<double> errs;
        for (double dt : {0.1, 0.05, 0.025}) {
            StepConfig cfg;
            cfg.dt = dt;
            const auto u0 = SpectralField::eigenfunction(dom, {mode, 1, 1});
            const auto z0 = make_state(u0, SpectralField(dom), HistoryState::none(dom));
            const auto r = evolve(z0, 2.0, cfg, Nonlinearity(), h);
            errs.push_back(std::abs(r.final_state.u[mode - 1] - oscillator(l, 2.0)));
        }
        CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(2.0).epsilon(0.1));
        CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(2.0).epsilon(0.1));
    }
}

TEST_CASE("acceleration solve matches a dense collocation solve") {
    const int N = 16;
    const auto dom = line(N);
    Rng rng(17);
    const auto u = smooth_random(dom, rng);
    const auto v = smooth_random(dom, rng, 2.0);
    const auto hf = smooth_random(dom, rng);
    const PronySum p{{{1.0, 1.0}, {0.5, 3.0}}};
    const auto eta = HistoryState::exp_modes(dom, p).advance(smooth_random(dom, rng), 0.2);
    const double rho = 2.0;
    const auto nl = Nonlinearity::cubic();

    // Explicit sine evaluation on the padded interior grid.
    const int M = 2 * (N + 1) - 1;
    const double w = pi / (M + 1);
    Eigen::MatrixXd phi(M, N);
    for (int i = 0; i < M; ++i)
        for (int k = 0; k < N; ++k) phi(i, k) = std::sqrt(2.0 / pi) * std::sin((k + 1) * (i + 1) * w);
    Eigen::VectorXd uc(N), vc(N), hc(N), lam(N), force = Eigen::VectorXd::Zero(N);
    for (int k = 0; k < N; ++k) {
        uc(k) = u[k];
        vc(k) = v[k];
        hc(k) = hf[k];
        lam(k) = (k + 1.0) * (k + 1.0);
    }
    for (std::size_t j = 0; j < p.terms.size(); ++j)
        for (int k = 0; k < N; ++k) force(k) += p.terms[j].weight / p.terms[j].rate * lam(k) * eta.components()[j][k];
    const Eigen::VectorXd ug = phi * uc, vg = phi * vc;
    const Eigen::VectorXd fu = w * phi.transpose() * ug.array().cube().matrix();
    const Eigen::VectorXd rhs = hc - fu - lam.cwiseProduct(vc) - lam.cwiseProduct(uc) - force;
    const Eigen::MatrixXd mass = w * phi.transpose() * vg.array().abs().pow(rho).matrix().asDiagonal() * phi;
    const Eigen::MatrixXd op = mass + Eigen::MatrixXd(lam.asDiagonal());
    const Eigen::VectorXd a_ref = op.ldlt().solve(rhs);

    const auto a = acceleration_solve(u, v, eta, nl, hf, rho);
    Eigen::VectorXd ac(N);
    for (int k = 0; k < N; ++k) ac(k) = a[k];
    CHECK((ac - a_ref).norm() <= 1e-8 * a_ref.norm());

    // The mass operator is SPD with Rayleigh quotient at least lambda_1.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op);
    CHECK(es.eigenvalues().minCoeff() >= dom->lambda1() * (1 - 1e-12));

    // rho = 0 and v = 0 reduce to division by 1 + lambda.
    const auto a0 = acceleration_solve(u, SpectralField(dom), eta, nl, hf, 0.0);
    const auto a1 = acceleration_solve(u, SpectralField(dom), eta, nl, hf, 2.0);
    const auto r0 = hf - nl.apply(u) - apply_A_power(u, 1.0) - eta.memory_force();
    for (int k = 0; k < N; ++k) {
        CHECK(a0[k] == doctest::Approx(r0[k] / (1 + lam(k))).epsilon(1e-12).scale(1e-12));
        CHECK(a1[k] == doctest::Approx(r0[k] / lam(k)).epsilon(1e-12).scale(1e-12));
    }
}

TEST_CASE("semigroup property and determinism") {
    const auto dom = line(12);
    Rng rng(23);
    const auto k = MemoryKernel::prony({{1.0, 1.0}, {1.0, 3.0}});
    const auto z0 = make_state(smooth_random(dom, rng), smooth_random(dom, rng), HistoryState::exp_modes(dom, *k.prony()));
    const auto h = smooth_random(dom, rng, 0.3);
    StepConfig cfg;
    cfg.dt = 0.05;
    cfg.rho = 1.5;
    const auto nl = Nonlinearity::cubic();
    const auto a = evolve(evolve(z0, 0.5, cfg, nl, h).final_state, 0.5, cfg, nl, h).final_state;
    const auto b = evolve(z0, 1.0, cfg, nl, h).final_state;
    const auto c = evolve(z0, 1.0, cfg, nl, h).final_state;
    CHECK(max_diff(a.u, b.u) == 0.0);
    CHECK(max_diff(a.v, b.v) == 0.0);
    CHECK(max_diff(b.u, c.u) == 0.0);
}

TEST_CASE("self-convergence at second order for the quasilinear system") {
    const auto dom = line(12);
    Rng rng(29);
    const auto k = MemoryKernel::prony({{1.0, 1.0}, {0.5, 3.0}});
    const auto z0 = make_state(smooth_random(dom, rng), smooth_random(dom, rng), HistoryState::exp_modes(dom, *k.prony()));
    const auto h = smooth_random(dom, rng, 0.3);
    const auto nl = Nonlinearity::cubic();
    std::vector<SystemState> finals;
    for (double dt : {0.04, 0.02, 0.01, 0.005}) {
        StepConfig cfg;
        cfg.dt = dt;
        cfg.rho = 2.0;
        finals.push_back(evolve(z0, 1.0, cfg, nl, h).final_state);
    }
    auto dist = [](const SystemState& x, const SystemState& y) {
        return std::sqrt(sobolev_norm_squared(x.u - y.u, 1.0) + sobolev_norm_squared(x.v - y.v, 1.0));
    };
    const double d1 = dist(finals[0], finals[1]), d2 = dist(finals[1], finals[2]), d3 = dist(finals[2], finals[3]);
    CHECK(std::log2(d1 / d2) > 1.8);
    CHECK(std::log2(d2 / d3) > 1.8);
}

TEST_CASE("Lyapunov functional never increases") {
    const auto dom = line(16);
    Rng rng(31);
    const auto k = MemoryKernel::prony({{1.0, 1.0}, {2.0, 4.0}});
    for (double rho : {0.0, 1.0, 2.0, 4.0}) {
        SystemState z = make_state(smooth_random(dom, rng, 2.0), smooth_random(dom, rng, 2.0),
                                   HistoryState::exp_modes(dom, *k.prony()));
        const auto h = smooth_random(dom, rng, 0.5);
        const auto nl = Nonlinearity::double_well(0.5, 1.0 / 16.0);
        StepConfig cfg;
        cfg.dt = 0.05;
        cfg.rho = rho;
        double L = lyapunov(z, nl, h, rho);
        for (int i = 0; i < 100; ++i) {
            z = step(z, cfg, nl, h);
            const double next = lyapunov(z, nl, h, rho);
            CHECK(next - L <= 1e-8 * (1 + std::abs(L)));
            L = next;
        }
    }
}

TEST_CASE("semi-implicit theta scheme is stable and consistent") {
    const auto dom = line(8);
    Rng rng(37);
    const auto z0 = make_state(smooth_random(dom, rng), SpectralField(dom), HistoryState::none(dom));
    const SpectralField h(dom);
    StepConfig a, b;
    a.dt = b.dt = 0.01;
    b.scheme = Scheme::SemiImplicitTheta;
    a.rho = b.rho = 1.0;
    const auto za = evolve(z0, 1.0, a, Nonlinearity::cubic(), h).final_state;
    const auto zb = evolve(z0, 1.0, b, Nonlinearity::cubic(), h).final_state;
    CHECK(zb.u.finite());
    CHECK(sobolev_norm(za.u - zb.u, 1.0) < 1e-2 * sobolev_norm(z0.u, 1.0));
}
