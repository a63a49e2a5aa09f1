#pragma once

/**
 * @file integrator.hpp
 * @brief Time stepping for the quasilinear system with memory.
 *
 *   |v|^rho v_t + A v_t + A v + A u + int mu A eta + f(u) = h,   u_t = v,
 *   eta_t = T eta + v.
 *
 * The default scheme is an implicit midpoint rule in which the inertia
 * coefficient is the discrete gradient of |v|^{rho+2}/(rho+2), so that the
 * kinetic part of the energy balance is exact, and the memory force is the
 * step average delivered by the history discretization. Each step solves
 *
 *   P[m dv] + c A dv = dt * rhs(dv)
 *
 * by fixed-point iteration on (m, f(u_mid)); the frozen operator is SPD and
 * solved by preconditioned conjugate gradients.
 */

#include "viscomem/history_state.hpp"
#include "viscomem/nonlinearity.hpp"
#include "viscomem/spectral_domain.hpp"

#include <functional>
#include <vector>

namespace viscomem {

struct SystemState {
    double t = 0.0;
    SpectralField u;
    SpectralField v;
    HistoryState eta;
    SpectralField a;  ///< step-averaged acceleration (diagnostic)
};

/// State with zero acceleration at time 0.
SystemState make_state(SpectralField u, SpectralField v, HistoryState eta);

/// ||u||^2_{1+r} + ||v||^2_{1+r} + ||eta||^2_{M^r}
double phase_norm_squared(const SystemState& z, double r = 0.0);

enum class Scheme { ImplicitMidpoint, SemiImplicitTheta };

struct StepConfig {
    double dt = 0.05;
    double rho = 0.0;         ///< inertia exponent in [0,4]
    double tol = 1e-12;       ///< fixed-point tolerance, relative
    int max_iter = 200;
    Scheme scheme = Scheme::ImplicitMidpoint;

    void validate() const;
};

/// Forcing term at the step midpoint, e.g. h - P f(u_mid).
using Load = std::function<SpectralField(const SpectralField& u_mid)>;

struct StepOutcome {
    SystemState state;
    SpectralField inertia;  ///< P[m dv] / dt
    SpectralField u_mid;
    int iterations = 0;
};

/// One step with an arbitrary load; inertia = false drops the |v|^rho term.
StepOutcome step_general(const SystemState& z, const StepConfig& cfg, const Load& load, bool inertia = true);

SystemState step(const SystemState& z, const StepConfig& cfg, const Nonlinearity& nl, const SpectralField& h);

/// Solves (|v|^rho + A) a = h - f(u) - A v - A u - int mu A eta.
SpectralField acceleration_solve(const SpectralField& u, const SpectralField& v, const HistoryState& eta,
                                 const Nonlinearity& nl, const SpectralField& h, double rho, double tol = 1e-13,
                                 int max_iter = 1000);

/// Largest dt with dt * max_k sqrt(lambda_k / (1 + lambda_k)) <= 0.1.
double default_time_step(const Domain& domain);

/// Pointwise |v|^rho on the grid; 0 at v = 0 for rho > 0 and 1 for rho = 0.
double inertia_coefficient(double v, double rho);
/// 2 (K(v1) - K(v0)) / (v1^2 - v0^2), K(v) = |v|^{rho+2}/(rho+2).
double discrete_inertia_coefficient(double v0, double v1, double rho);

struct StepInfo {
    std::size_t index = 0;  ///< 1-based step number
    int iterations = 0;
    double dt = 0.0;
};

struct Observer {
    std::size_t stride = 1;
    std::function<void(const SystemState&)> on_start;
    std::function<void(const SystemState& prev, const SystemState& next, const StepInfo&)> on_step;
};

struct EvolveResult {
    SystemState final_state;
    std::size_t steps = 0;
    int max_iterations = 0;
};

/// Advances to t0 + T; T must be an integer multiple of dt.
EvolveResult evolve(const SystemState& z0, double T, const StepConfig& cfg, const Nonlinearity& nl,
                    const SpectralField& h, const std::vector<Observer>& observers = {});

/// Number of steps covering T; throws unless T/dt is an integer.
std::size_t step_count(double T, double dt);

}  // namespace viscomem
