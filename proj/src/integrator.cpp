#include "viscomem/integrator.hpp"

#include "viscomem/errors.hpp"
#include "viscomem/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace viscomem {

SystemState make_state(SpectralField u, SpectralField v, HistoryState eta) {
    require_same_domain(u, v);
    SystemState z;
    z.a = SpectralField(u.domain());
    z.u = std::move(u);
    z.v = std::move(v);
    z.eta = std::move(eta);
    return z;
}

double phase_norm_squared(const SystemState& z, double r) {
    return sobolev_norm_squared(z.u, 1.0 + r) + sobolev_norm_squared(z.v, 1.0 + r) + z.eta.norm_squared(r);
}

void StepConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive");
    if (!(rho >= 0.0 && rho <= 4.0)) throw std::invalid_argument("inertia exponent must lie in [0,4]");
    if (!(tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (max_iter < 1) throw std::invalid_argument("iteration cap must be positive");
}

double inertia_coefficient(double v, double rho) {
    if (rho == 0.0) return 1.0;
    const double a = std::abs(v);
    return a == 0.0 ? 0.0 : std::pow(a, rho);
}

double discrete_inertia_coefficient(double v0, double v1, double rho) {
    if (rho == 0.0) return 1.0;
    const double w0 = v0 * v0, w1 = v1 * v1;
    const double wmax = std::max(w0, w1);
    if (wmax == 0.0) return 0.0;
    const double p = 0.5 * rho;
    if (std::abs(w1 - w0) <= 1e-5 * wmax) {
        // Second-order expansion of the divided difference about the mean.
        const double wm = 0.5 * (w0 + w1);
        const double d = w1 - w0;
        return std::pow(wm, p) * (1.0 + p * (p - 1.0) * d * d / (24.0 * wm * wm));
    }
    const double q = p + 1.0;
    return 2.0 * (std::pow(w1, q) - std::pow(w0, q)) / (q * 2.0 * (w1 - w0));
}

double default_time_step(const Domain& domain) {
    double worst = 0.0;
    for (double lam : domain.eigenvalues()) worst = std::max(worst, std::sqrt(lam / (1.0 + lam)));
    return 0.1 / worst;
}

std::size_t step_count(double T, double dt) {
    if (!(T >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
    if (T == 0.0) return 0;
    const double n = std::round(T / dt);
    if (n < 1.0 || std::abs(n * dt - T) > 1e-9 * std::max(T, dt))
        throw std::invalid_argument("horizon must be an integer multiple of the time step");
    return static_cast<std::size_t>(n);
}

namespace {

// x -> P[m x] + c A x with m given on the collocation grid.
struct MassOperator {
    const std::vector<double>* m = nullptr;  // null: m == 0
    double c = 1.0;
    double mean = 0.0;

    SpectralField apply(const SpectralField& x) const {
        SpectralField out = apply_A_power(x, 1.0);
        out *= c;
        if (m) {
            auto g = x.to_grid();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= (*m)[i];
            out += SpectralField::from_grid(x.domain(), g);
        }
        return out;
    }

    SpectralField precondition(const SpectralField& r) const {
        SpectralField out = r;
        const auto lam = r.domain()->eigenvalues();
        for (std::size_t k = 0; k < out.size(); ++k) out[k] /= (c * lam[k] + mean);
        return out;
    }
};

SpectralField solve_mass(const MassOperator& op, const SpectralField& b, const SpectralField& guess) {
    KrylovResult res = pcg([&](const SpectralField& x) { return op.apply(x); },
                           [&](const SpectralField& x) { return op.precondition(x); }, b, guess, 1e-14, 2000);
    if (!res.converged && !(res.residual < 1e-11))
        throw SolverError("inner conjugate-gradient solve stalled at relative residual " +
                          std::to_string(res.residual));
    return std::move(res.x);
}

SpectralField solve_diagonal(const SpectralField& b, double m, double c) {
    SpectralField out = b;
    const auto lam = b.domain()->eigenvalues();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] /= (m + c * lam[k]);
    return out;
}

}  // namespace

StepOutcome step_general(const SystemState& z, const StepConfig& cfg, const Load& load, bool inertia) {
    cfg.validate();
    const double dt = cfg.dt;
    const auto& dom = z.u.domain();
    const HistoryStepPlan plan = z.eta.plan_step(dt);
    const double g = plan.force_gain;
    const double c = 1.0 + 0.5 * dt + 0.25 * dt * dt + 0.5 * g * dt;

    // Part of the right-hand side that does not depend on the increment.
    SpectralField fixed = (1.0 + 0.5 * dt + g) * z.v;
    fixed += z.u;
    fixed = apply_A_power(fixed, 1.0);
    fixed += plan.force_base;
    fixed *= -1.0;

    const bool quasilinear = inertia && cfg.rho > 0.0;
    const bool semi = cfg.scheme == Scheme::SemiImplicitTheta;
    std::vector<double> v0g;
    if (quasilinear) v0g = z.v.to_grid();

    auto midpoint_u = [&](const SpectralField& dv) {
        SpectralField um = z.u;
        um.axpy(0.5 * dt, z.v);
        um.axpy(0.25 * dt, dv);
        return um;
    };
    const double base_scale = dt * (sobolev_norm(z.u, 1.0) + sobolev_norm(z.v, 1.0));

    std::vector<double> m(quasilinear ? v0g.size() : 0);
    auto update_coefficient = [&](const SpectralField& dv) {
        if (semi) {
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = inertia_coefficient(v0g[i], cfg.rho);
            return;
        }
        const auto dvg = dv.to_grid();
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] = discrete_inertia_coefficient(v0g[i], v0g[i] + dvg[i], cfg.rho);
    };
    auto solve = [&](const SpectralField& rhs, const SpectralField& guess) {
        if (!inertia) return solve_diagonal(rhs, 0.0, c);
        if (!quasilinear) return solve_diagonal(rhs, 1.0, c);
        MassOperator op;
        op.m = &m;
        op.c = c;
        op.mean = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
        return solve_mass(op, rhs, guess);
    };

    SpectralField dv = (z.a.empty() || !z.a.finite()) ? SpectralField(dom) : dt * z.a;
    SpectralField u_mid;
    int iterations = 0;
    if (semi) {
        dv = SpectralField(dom);
        if (quasilinear) update_coefficient(dv);
        u_mid = z.u;
        SpectralField rhs = load(z.u);
        rhs += fixed;
        rhs *= dt;
        dv = solve(rhs, dv);
        iterations = 1;
    } else {
        double prev_diff = std::numeric_limits<double>::infinity();
        bool relax = false;
        bool converged = false;
        for (int it = 1; it <= cfg.max_iter; ++it) {
            if (quasilinear) update_coefficient(dv);
            u_mid = midpoint_u(dv);
            SpectralField rhs = load(u_mid);
            rhs += fixed;
            rhs *= dt;
            SpectralField next = solve(rhs, dv);
            if (!next.finite()) throw SolverError("fixed-point iterate became non-finite");
            const double diff = sobolev_norm(next - dv, 1.0);
            if (diff > 0.9 * prev_diff) relax = true;
            if (relax) {
                next *= 0.5;
                next.axpy(0.5, dv);
            }
            dv = std::move(next);
            prev_diff = diff;
            iterations = it;
            const double scale = sobolev_norm(dv, 1.0) + base_scale;
            if (diff <= cfg.tol * scale) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw SolverError("fixed-point iteration did not converge in " + std::to_string(cfg.max_iter) +
                              " iterations");
        if (quasilinear) update_coefficient(dv);
        u_mid = midpoint_u(dv);
    }

    StepOutcome out;
    out.iterations = iterations;
    out.u_mid = std::move(u_mid);
    SpectralField vbar = z.v;
    vbar.axpy(0.5, dv);
    SystemState& n = out.state;
    n.t = z.t + dt;
    n.u = z.u;
    n.u.axpy(dt, vbar);
    n.v = z.v + dv;
    n.eta = z.eta.advance(vbar, dt, 0.5);
    n.a = (1.0 / dt) * dv;
    if (!inertia) {
        out.inertia = SpectralField(dom);
    } else if (!quasilinear) {
        out.inertia = n.a;
    } else {
        auto dvg = dv.to_grid();
        for (std::size_t i = 0; i < dvg.size(); ++i) dvg[i] *= m[i] / dt;
        out.inertia = SpectralField::from_grid(dom, dvg);
    }
    return out;
}

SystemState step(const SystemState& z, const StepConfig& cfg, const Nonlinearity& nl, const SpectralField& h) {
    const Load load = [&](const SpectralField& um) {
        SpectralField r = h;
        if (!nl.is_zero()) r -= nl.apply(um);
        return r;
    };
    return step_general(z, cfg, load, true).state;
}

SpectralField acceleration_solve(const SpectralField& u, const SpectralField& v, const HistoryState& eta,
                                 const Nonlinearity& nl, const SpectralField& h, double rho, double tol,
                                 int max_iter) {
    SpectralField rhs = h;
    if (!nl.is_zero()) rhs -= nl.apply(u);
    rhs -= apply_A_power(v + u, 1.0);
    rhs -= eta.memory_force();

    std::vector<double> m;
    bool any = false;
    if (rho > 0.0) {
        m = v.to_grid();
        for (auto& x : m) {
            x = inertia_coefficient(x, rho);
            any = any || x != 0.0;
        }
    }
    if (rho == 0.0) return solve_diagonal(rhs, 1.0, 1.0);
    if (!any) return solve_diagonal(rhs, 0.0, 1.0);

    MassOperator op;
    op.m = &m;
    op.c = 1.0;
    op.mean = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
    KrylovResult res = pcg([&](const SpectralField& x) { return op.apply(x); },
                           [&](const SpectralField& x) { return op.precondition(x); }, rhs,
                           SpectralField(u.domain()), tol, max_iter);
    if (!res.converged)
        throw SolverError("acceleration solve did not converge (relative residual " + std::to_string(res.residual) +
                          ")");
    return std::move(res.x);
}

EvolveResult evolve(const SystemState& z0, double T, const StepConfig& cfg, const Nonlinearity& nl,
                    const SpectralField& h, const std::vector<Observer>& observers) {
    cfg.validate();
    const std::size_t n = step_count(T, cfg.dt);
    const Load load = [&](const SpectralField& um) {
        SpectralField r = h;
        if (!nl.is_zero()) r -= nl.apply(um);
        return r;
    };
    for (const auto& o : observers)
        if (o.on_start) o.on_start(z0);
    EvolveResult res;
    res.final_state = z0;
    for (std::size_t i = 1; i <= n; ++i) {
        StepOutcome out = step_general(res.final_state, cfg, load, true);
        out.state.t = z0.t + static_cast<double>(i) * cfg.dt;
        res.max_iterations = std::max(res.max_iterations, out.iterations);
        const StepInfo info{i, out.iterations, cfg.dt};
        for (const auto& o : observers) {
            const std::size_t stride = std::max<std::size_t>(1, o.stride);
            if (o.on_step && (i % stride == 0 || i == n)) o.on_step(res.final_state, out.state, info);
        }
        res.final_state = std::move(out.state);
    }
    res.steps = n;
    return res;
}

}  // namespace viscomem
