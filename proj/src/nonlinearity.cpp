#include "viscomem/nonlinearity.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace viscomem {

namespace {

double horner(const std::vector<double>& c, double u) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
    return acc;
}

void trim(std::vector<double>& c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
}

}  // namespace

Nonlinearity::Nonlinearity() : name_("zero") {}

Nonlinearity::Nonlinearity(std::vector<double> coeffs, double nu, double m_f, std::string name)
    : c_(std::move(coeffs)), nu_(nu), m_f_(m_f), name_(std::move(name)) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("nu must lie in (0,1]");
    if (!(m_f >= 0.0)) throw std::invalid_argument("m_f must be nonnegative");
    for (double x : c_)
        if (!std::isfinite(x)) throw std::invalid_argument("polynomial coefficients must be finite");
    if (!c_.empty()) c_[0] = 0.0;
    trim(c_);
    for (std::size_t i = 1; i < c_.size(); ++i) dc_.push_back(static_cast<double>(i) * c_[i]);
    if (!c_.empty()) {
        ic_.assign(c_.size() + 1, 0.0);
        for (std::size_t i = 0; i < c_.size(); ++i) ic_[i + 1] = c_[i] / static_cast<double>(i + 1);
    }
}

Nonlinearity Nonlinearity::cubic(double nu, double m_f) { return Nonlinearity({0, 0, 0, 1}, nu, m_f, "cubic"); }

Nonlinearity Nonlinearity::quintic(double nu, double m_f) {
    return Nonlinearity({0, 0, 0, 0, 0, 1}, nu, m_f, "quintic");
}

Nonlinearity Nonlinearity::double_well(double nu, double m_f) {
    return Nonlinearity({0, -1, 0, 1}, nu, m_f, "double_well");
}

double Nonlinearity::f(double u) const { return horner(c_, u); }
double Nonlinearity::df(double u) const { return horner(dc_, u); }
double Nonlinearity::F(double u) const { return horner(ic_, u); }

SpectralField Nonlinearity::apply(const SpectralField& u) const {
    if (is_zero()) return SpectralField(u.domain());
    return map_pointwise(u, [this](double x) { return f(x); });
}

SpectralField Nonlinearity::apply_derivative(const SpectralField& u, const SpectralField& w) const {
    if (is_zero()) return SpectralField(u.domain());
    auto ug = u.to_grid();
    const auto wg = w.to_grid();
    for (std::size_t i = 0; i < ug.size(); ++i) ug[i] = df(ug[i]) * wg[i];
    return SpectralField::from_grid(u.domain(), ug);
}

double Nonlinearity::integral_F(const SpectralField& u) const {
    if (is_zero()) return 0.0;
    auto g = u.to_grid();
    for (auto& x : g) x = F(x);
    return integrate_grid(*u.domain(), g);
}

// ---------------------------------------------------------------------------

GrowthReport verify_growth(const Nonlinearity& nl, double range, std::size_t samples) {
    if (!(range > 0.0)) throw std::invalid_argument("growth scan range must be positive");
    GrowthReport rep;
    std::mt19937_64 gen(0x5eedULL);
    double best = 0.0;
    for (double R : {range / 100.0, range / 10.0, range}) {
        std::uniform_real_distribution<double> wide(-R, R);
        std::uniform_real_distribution<double> near(-1e-3 * R, 1e-3 * R);
        for (std::size_t i = 0; i < samples; ++i) {
            const double u = wide(gen);
            const double v = (i % 2 == 0) ? wide(gen) : u + near(gen);
            const double du = std::abs(u - v);
            if (du == 0.0) continue;
            const double ratio =
                std::abs(nl.f(u) - nl.f(v)) / (du * (1.0 + std::pow(u, 4) + std::pow(v, 4)));
            if (!std::isfinite(ratio) || ratio > best) {
                best = std::isfinite(ratio) ? ratio : std::numeric_limits<double>::infinity();
                rep.witness_u = u;
                rep.witness_v = v;
            }
        }
        rep.nested.push_back(best);
    }
    rep.constant = best;
    const double prev = rep.nested[1];
    rep.ok = std::isfinite(best) && (prev == 0.0 ? best == 0.0 : best <= 4.0 * prev);
    return rep;
}

DissipationReport verify_dissipation(const Nonlinearity& nl, double lambda1, double range, std::size_t samples) {
    if (samples < 2) throw std::invalid_argument("dissipation scan needs at least two samples");
    DissipationReport rep;
    rep.margin1 = rep.margin2 = std::numeric_limits<double>::infinity();
    const double q = 0.5 * lambda1 * (1.0 - nl.nu());
    bool ok1 = true, ok2 = true;
    for (std::size_t i = 0; i < samples; ++i) {
        const double u = -range + 2.0 * range * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double fu = nl.f(u) * u;
        const double Fu = nl.F(u);
        const double quad = q * u * u;
        const double m1 = fu - Fu + quad + nl.m_f();
        const double m2 = Fu + quad + nl.m_f();
        const double slack = 1e-12 * (1.0 + std::abs(fu) + std::abs(Fu) + quad + nl.m_f());
        if (m1 < rep.margin1) {
            rep.margin1 = m1;
            rep.witness1 = u;
        }
        if (m2 < rep.margin2) {
            rep.margin2 = m2;
            rep.witness2 = u;
        }
        ok1 = ok1 && m1 >= -slack;
        ok2 = ok2 && m2 >= -slack;
    }
    rep.diss1_ok = ok1;
    rep.diss2_ok = ok2;
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

double psi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// C-infinity step: 0 for t <= 0, 1 for t >= 1, nondecreasing.
double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = psi(t);
    return a / (a + psi(1.0 - t));
}

}  // namespace

Decomposition::Decomposition(Nonlinearity nl, double lambda1, double beta) : nl_(std::move(nl)), lambda1_(lambda1) {
    if (!(lambda1 > 0.0)) throw std::invalid_argument("lambda1 must be positive");
    alpha_ = lambda1 * (1.0 - nl_.nu());
    beta_ = beta > 0.0 ? beta : 0.5 * (alpha_ + lambda1);
    if (!(beta_ > alpha_ && beta_ < lambda1))
        throw std::invalid_argument("beta must lie strictly between alpha and lambda1");
    const auto diss = verify_dissipation(nl_, lambda1);
    if (!diss.ok())
        throw std::invalid_argument("nonlinearity violates the dissipation conditions; no cutoff level exists");
    const double kk = std::sqrt(2.0 * nl_.m_f() / (beta_ - alpha_));
    k_ = std::max(1, static_cast<int>(std::ceil(kk)));
    const double e = k_ + 1.0;
    F0_plus_ = transition_integral(k_, e);
    F0_minus_ = -transition_integral(-e, -static_cast<double>(k_));
}

double Decomposition::cutoff(double s) const { return smooth_step(std::abs(s) - k_); }

double Decomposition::f0(double s) const {
    const double r = cutoff(s);
    if (r == 0.0) return 0.0;
    return r * (nl_.f(s) + beta_ * s);
}

double Decomposition::f1(double s) const { return nl_.f(s) - f0(s); }

double Decomposition::transition_integral(double a, double b) const {
    // f0 is smooth on the transition band; a fixed composite rule is accurate to round-off.
    auto g = [this](double s) { return f0(s); };
    constexpr int kPanels = 4;
    double sum = 0.0;
    for (int j = 0; j < kPanels; ++j) {
        const double lo = a + (b - a) * j / kPanels, hi = a + (b - a) * (j + 1) / kPanels;
        sum += boost::math::quadrature::gauss<double, 30>::integrate(g, lo, hi);
    }
    return sum;
}

double Decomposition::F0(double s) const {
    const double k = k_;
    const double e = k + 1.0;
    const double a = std::abs(s);
    if (a <= k) return 0.0;
    if (a < e) return s > 0 ? transition_integral(k, s) : -transition_integral(s, -k);
    auto G = [this](double x) { return nl_.F(x) + 0.5 * beta_ * x * x; };
    return s > 0 ? F0_plus_ + G(s) - G(e) : F0_minus_ + G(s) - G(-e);
}

SpectralField Decomposition::apply_f0(const SpectralField& u) const {
    return map_pointwise(u, [this](double x) { return f0(x); });
}

SpectralField Decomposition::apply_f1(const SpectralField& u) const {
    return map_pointwise(u, [this](double x) { return f1(x); });
}

double Decomposition::lipschitz_f1(double range, std::size_t samples) const {
    const double h = 2.0 * range / static_cast<double>(samples - 1);
    double best = 0.0;
    double prev = f1(-range);
    for (std::size_t i = 1; i < samples; ++i) {
        const double cur = f1(-range + h * static_cast<double>(i));
        best = std::max(best, std::abs(cur - prev) / h);
        prev = cur;
    }
    return best;
}

// ---------------------------------------------------------------------------

ExtraBoundsReport extra_bounds_check(const Nonlinearity& nl, const SpectralField& u) {
    const auto& dom = *u.domain();
    auto g = u.to_grid();
    std::vector<double> fu(g.size()), Fu(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        fu[i] = nl.f(g[i]) * g[i];
        Fu[i] = nl.F(g[i]);
    }
    const double M_f = nl.m_f() * dom.volume();
    const double quad = 0.5 * (1.0 - nl.nu()) * sobolev_norm_squared(u, 1.0);
    const double IF = integrate_grid(dom, Fu);
    ExtraBoundsReport rep;
    rep.margin1 = integrate_grid(dom, fu) - IF + quad + M_f;
    rep.margin2 = IF + quad + M_f;
    return rep;
}

}  // namespace viscomem
