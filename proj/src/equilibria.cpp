#include "viscomem/equilibria.hpp"

#include "viscomem/diagnostics.hpp"
#include "viscomem/krylov.hpp"
#include "viscomem/random.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

namespace viscomem {

namespace {

SpectralField residual_field(const SpectralField& u, const Nonlinearity& nl, const SpectralField& h) {
    SpectralField r = apply_A_power(u, 1.0);
    if (!nl.is_zero()) r += nl.apply(u);
    r -= h;
    return r;
}

}  // namespace

double equilibrium_residual(const SpectralField& u, const Nonlinearity& nl, const SpectralField& h) {
    return sobolev_norm(residual_field(u, nl, h), -1.0);
}

Equilibrium solve_equilibrium(const SpectralField& guess, const Nonlinearity& nl, const SpectralField& h,
                              const NewtonOptions& opts) {
    Equilibrium best;
    SpectralField u = guess;
    SpectralField r = residual_field(u, nl, h);
    double rn = sobolev_norm(r, -1.0);
    best.u_star = u;
    best.residual = rn;

    const LinearMap precond = [](const SpectralField& x) { return apply_A_power(x, -1.0); };
    for (int it = 1; it <= opts.max_iter && rn > opts.tol; ++it) {
        const LinearMap jac = [&](const SpectralField& w) {
            SpectralField out = apply_A_power(w, 1.0);
            if (!nl.is_zero()) out += nl.apply_derivative(u, w);
            return out;
        };
        SpectralField minus_r = -1.0 * r;
        KrylovResult lin = gmres(jac, precond, minus_r, opts.linear_tol, 400, 60);
        const SpectralField& delta = lin.x;

        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k <= opts.max_halvings; ++k) {
            SpectralField trial = u;
            trial.axpy(t, delta);
            SpectralField rt = residual_field(trial, nl, h);
            const double tn = sobolev_norm(rt, -1.0);
            if (std::isfinite(tn) && tn < (1.0 - 1e-4 * t) * rn) {
                u = std::move(trial);
                r = std::move(rt);
                rn = tn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        best.iterations = it;
        if (!accepted) break;
        if (rn < best.residual) {
            best.residual = rn;
            best.u_star = u;
        }
    }
    best.converged = best.residual <= opts.tol;
    return best;
}

std::vector<Equilibrium> find_equilibria(const std::vector<SpectralField>& seeds, const Nonlinearity& nl,
                                         const SpectralField& h, const MultiStartOptions& opts) {
    std::vector<SpectralField> starts = seeds;
    const auto& dom = h.domain();
    Rng rng(opts.seed);
    for (std::size_t i = 0; i < opts.random_starts; ++i) {
        SpectralField s(dom);
        // Random smooth seed: coefficients decay like 1/k.
        const auto lam = dom->eigenvalues();
        for (std::size_t k = 0; k < s.size(); ++k)
            s[k] = opts.random_amplitude * rng.normal() / std::sqrt(lam[k] / dom->lambda1());
        starts.push_back(std::move(s));
    }

    std::vector<Equilibrium> results(starts.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads ? opts.threads : hw,
                                                             static_cast<unsigned>(starts.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < starts.size(); ++i) results[i] = solve_equilibrium(starts[i], nl, h, opts.newton);
    } else {
        std::vector<std::future<void>> tasks;
        for (unsigned w = 0; w < workers; ++w) {
            tasks.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < starts.size(); i += workers)
                    results[i] = solve_equilibrium(starts[i], nl, h, opts.newton);
            }));
        }
        for (auto& t : tasks) t.get();
    }

    std::vector<Equilibrium> unique;
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto& e = results[i];
        if (!e.converged) continue;
        const bool dup = std::any_of(unique.begin(), unique.end(), [&](const Equilibrium& q) {
            return sobolev_norm(q.u_star - e.u_star, 1.0) < 10.0 * opts.newton.tol;
        });
        if (dup) continue;
        e.basin_tag = i < seeds.size() ? "seed-" + std::to_string(i) : "random-" + std::to_string(i - seeds.size());
        unique.push_back(std::move(e));
    }
    std::stable_sort(unique.begin(), unique.end(), [](const Equilibrium& a, const Equilibrium& b) {
        return sobolev_norm(a.u_star, 1.0) < sobolev_norm(b.u_star, 1.0);
    });
    return unique;
}

double distance_to_S(const SystemState& z, const std::vector<Equilibrium>& S) {
    if (S.empty()) throw std::invalid_argument("equilibrium set is empty");
    const double rest = sobolev_norm_squared(z.v, 1.0) + z.eta.norm_squared();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : S) best = std::min(best, sobolev_norm_squared(z.u - e.u_star, 1.0) + rest);
    return std::sqrt(best);
}

StationarityReport stationarity_check(const Equilibrium& eq, const HistoryState& zero_history, const StepConfig& cfg,
                                      const Nonlinearity& nl, const SpectralField& h, double tol, std::size_t steps) {
    const auto& dom = eq.u_star.domain();
    SystemState z0 = make_state(eq.u_star, SpectralField(dom), zero_history);
    const double L0 = lyapunov(z0, nl, h, cfg.rho);
    StationarityReport rep;
    SystemState z = z0;
    for (std::size_t i = 0; i < steps; ++i) {
        z = step(z, cfg, nl, h);
        const double d = std::sqrt(sobolev_norm_squared(z.u - z0.u, 1.0) + sobolev_norm_squared(z.v, 1.0) +
                                   z.eta.norm_squared());
        rep.drift = std::max(rep.drift, d);
        rep.lyapunov_change = std::max(rep.lyapunov_change, std::abs(lyapunov(z, nl, h, cfg.rho) - L0));
    }
    rep.ok = rep.drift <= 100.0 * tol && rep.lyapunov_change <= 100.0 * tol * (1.0 + std::abs(L0));
    return rep;
}

}  // namespace viscomem
