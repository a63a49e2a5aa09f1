#pragma once

/**
 * @file equilibria.hpp
 * @brief Stationary solutions A u + f(u) = h and convergence measurements.
 */

#include "viscomem/integrator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace viscomem {

struct Equilibrium {
    SpectralField u_star;
    double residual = 0.0;  ///< ||A u + P f(u) - h||_{-1}
    bool converged = false;
    int iterations = 0;
    std::string basin_tag;
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 60;
    int max_halvings = 30;
    double linear_tol = 1e-12;
};

/// ||A u + P f(u) - h||_{-1}
double equilibrium_residual(const SpectralField& u, const Nonlinearity& nl, const SpectralField& h);

/// Damped Newton with matrix-free Jacobian A + f'(u) and A^{-1}-preconditioned GMRES.
Equilibrium solve_equilibrium(const SpectralField& guess, const Nonlinearity& nl, const SpectralField& h,
                              const NewtonOptions& opts = {});

struct MultiStartOptions {
    NewtonOptions newton;
    std::size_t random_starts = 8;
    double random_amplitude = 2.0;  ///< coefficient scale of random seeds
    std::uint64_t seed = 1;
    unsigned threads = 0;           ///< 0: hardware concurrency
};

/// Newton from every seed plus random starts; converged results deduplicated at
/// H^1 distance < 10 tol, ordered by ||u*||_1.
std::vector<Equilibrium> find_equilibria(const std::vector<SpectralField>& seeds, const Nonlinearity& nl,
                                         const SpectralField& h, const MultiStartOptions& opts = {});

/// min over S of ||(u, v, eta) - (u*, 0, 0)||
double distance_to_S(const SystemState& z, const std::vector<Equilibrium>& S);

struct StationarityReport {
    double drift = 0.0;             ///< max ||z_n - z_0|| over the run
    double lyapunov_change = 0.0;   ///< max |L_n - L_0|
    bool ok = false;
};

/// Advances (u*, 0, 0) by `steps` steps; drift must stay below 100 * tol.
StationarityReport stationarity_check(const Equilibrium& eq, const HistoryState& zero_history, const StepConfig& cfg,
                                      const Nonlinearity& nl, const SpectralField& h, double tol,
                                      std::size_t steps = 100);

}  // namespace viscomem
