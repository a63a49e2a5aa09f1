#pragma once

/**
 * @file history_state.hpp
 * @brief Discrete past histories eta^t(s) and their transport in s.
 *
 * Two discretizations are offered.
 *
 * SGrid stores eta at graded nodes 0 < s_1 < ... < s_n (s_0 = 0 carries the
 * boundary value 0). Each node owns the cell (s_{i-1}, s_i] with mass
 * m_i = I(s_{i-1}) - I(s_i), so ||eta||_M^2 = sum m_i ||eta_i||_1^2. The
 * transport operator is the upwind difference
 *     (T eta)_i = -(eta_i - eta_{i-1}) / ds_i,
 * for which <T eta, eta>_M <= 0 holds exactly because m_i / ds_i is the
 * mean of a nonincreasing kernel over the cell.
 *
 * ExpModes applies to Prony kernels. For each term (c_j, d_j) it stores the
 * first moment zeta_j = d_j int e^{-d_j s} eta(s) ds and, per spectral mode k,
 * the second moment Q_jk = int e^{-d_j s} eta_k(s)^2 ds. Both obey closed
 * ODEs, so the history norm, the functional Psi and <T eta, eta> are exact.
 */

#include "viscomem/memory_kernel.hpp"
#include "viscomem/spectral_domain.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace viscomem {

struct SGridOptions {
    double h0 = 0.0;         ///< smallest spacing; 0 selects the time step
    double growth = 0.05;    ///< spacing ds_i = max(h0, growth * s_{i-1}); 0 gives a uniform grid
    double rel_tail = 1e-8;  ///< truncate where I(s) < rel_tail * kappa
    std::size_t max_nodes = 50000;
};

/// Node layout and quadrature weights of an SGrid history for one kernel.
class SGridLayout {
public:
    SGridLayout(const MemoryKernel& kernel, double dt, const SGridOptions& opts = {});

    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    double node(std::size_t i) const { return nodes_[i]; }
    double spacing(std::size_t i) const { return spacing_[i]; }
    /// int over the cell of mu
    double mass(std::size_t i) const { return mass_[i]; }
    /// int over the cell of I
    double tail_weight(std::size_t i) const { return tail_w_[i]; }
    double horizon() const { return nodes_.empty() ? 0.0 : nodes_.back(); }

private:
    std::vector<double> nodes_, spacing_, mass_, tail_w_;
};

using SGridLayoutPtr = std::shared_ptr<const SGridLayout>;

/// Averaged memory force over one step: base + gain * A vbar.
struct HistoryStepPlan {
    SpectralField force_base;
    double force_gain = 0.0;
};

class HistoryState {
public:
    enum class Kind { None, SGrid, ExpModes };

    HistoryState() = default;
    /// Memoryless state (zero kernel).
    static HistoryState none(DomainPtr domain);
    static HistoryState sgrid(DomainPtr domain, SGridLayoutPtr layout);
    static HistoryState sgrid(DomainPtr domain, SGridLayoutPtr layout, std::vector<SpectralField> values);
    static HistoryState exp_modes(DomainPtr domain, const PronySum& kernel);
    static HistoryState exp_modes(DomainPtr domain, const PronySum& kernel, std::vector<SpectralField> zeta,
                                  std::vector<std::vector<double>> second_moments);

    /// Separable history eta(s) = g(s) phi, g(0) = 0 recommended.
    HistoryState with_profile(const std::function<double(double)>& g, const SpectralField& phi) const;

    Kind kind() const { return kind_; }
    const DomainPtr& domain() const { return domain_; }
    const SGridLayoutPtr& layout() const { return layout_; }
    const PronySum& prony() const { return prony_; }

    /// Node values (SGrid) or first moments zeta_j (ExpModes).
    const std::vector<SpectralField>& components() const { return fields_; }
    const std::vector<std::vector<double>>& second_moments() const { return q_; }

    /// int mu(s) A eta(s) ds
    SpectralField memory_force() const;
    /// ||eta||^2_{M^r} = int mu ||eta(s)||^2_{1+r}
    double norm_squared(double r = 0.0) const;
    /// int I(s) ||eta(s)||^2_{1+r}
    double psi(double r = 0.0) const;
    /// <T eta, eta>_{M^r}
    double t_dissipation(double r = 0.0) const;

    /// SGrid value at age s, linear between nodes, eta(0) = 0, constant past the last node.
    SpectralField value_at(double s) const;

    /// Memory force averaged over a midpoint step, affine in the step velocity.
    HistoryStepPlan plan_step(double dt) const;
    /// One transport step with source v: theta = 1 implicit upwind, 1/2 midpoint (SGrid);
    /// exact for piecewise-constant v (ExpModes, theta ignored).
    HistoryState advance(const SpectralField& v, double dt, double theta = 0.5) const;

    /// (a + b) / 2 componentwise, moments included.
    static HistoryState average(const HistoryState& a, const HistoryState& b);
    /// Largest ||component difference||_1 over nodes/modes.
    static double component_distance(const HistoryState& a, const HistoryState& b);
    /// ||a - b||_{M^r} for two SGrid states on the same layout.
    static double sgrid_distance(const HistoryState& a, const HistoryState& b, double r = 0.0);

private:
    Kind kind_ = Kind::None;
    DomainPtr domain_;
    SGridLayoutPtr layout_;
    PronySum prony_;
    std::vector<SpectralField> fields_;
    std::vector<std::vector<double>> q_;
};

/// First-order implicit upwind step with source v_new.
HistoryState advance_history(const HistoryState& eta, const SpectralField& v_new, double dt);

inline SpectralField memory_force(const HistoryState& eta) { return eta.memory_force(); }
inline double t_dissipation(const HistoryState& eta) { return eta.t_dissipation(); }

/// Piecewise-linear-in-time record of u.
struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> u;

    void push(double t, SpectralField field);
    /// Linear interpolation; throws outside the recorded span.
    SpectralField at(double t) const;
};

/// eta^t(s) = u(t) - u(t-s) for s <= t and eta0(s-t) + u(t) - u(0) beyond, on eta0's nodes.
HistoryState rep_formula_oracle(const Trajectory& u, const HistoryState& eta0, double t);

}  // namespace viscomem
