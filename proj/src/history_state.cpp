#include "viscomem/history_state.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace viscomem {

SGridLayout::SGridLayout(const MemoryKernel& kernel, double dt, const SGridOptions& opts) {
    if (kernel.is_zero()) throw std::invalid_argument("an s-grid needs a kernel with positive mass");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const double h0 = opts.h0 > 0.0 ? opts.h0 : dt;
    const double horizon = kernel.truncation_length(opts.rel_tail);
    const auto jumps = kernel.jumps_below(horizon + h0);

    auto next_jump = jumps.begin();
    double s = 0.0;
    while (s < horizon) {
        double next = s + std::max(h0, opts.growth * s);
        while (next_jump != jumps.end() && *next_jump <= s) ++next_jump;
        if (next_jump != jumps.end() && *next_jump < next) next = *next_jump;
        nodes_.push_back(next);
        spacing_.push_back(next - s);
        s = next;
        if (nodes_.size() > opts.max_nodes)
            throw std::invalid_argument("s-grid exceeds the node budget; increase h0 or growth");
    }
    double prev_tail = kernel.total_mass();
    double prev = 0.0;
    for (double x : nodes_) {
        const double t = kernel.tail(x);
        mass_.push_back(prev_tail - t);
        tail_w_.push_back(kernel.tail_integral(prev, x));
        prev_tail = t;
        prev = x;
    }
}

// ---------------------------------------------------------------------------

HistoryState HistoryState::none(DomainPtr domain) {
    HistoryState h;
    h.domain_ = std::move(domain);
    return h;
}

HistoryState HistoryState::sgrid(DomainPtr domain, SGridLayoutPtr layout) {
    std::vector<SpectralField> values(layout->size(), SpectralField(domain));
    return sgrid(std::move(domain), std::move(layout), std::move(values));
}

HistoryState HistoryState::sgrid(DomainPtr domain, SGridLayoutPtr layout, std::vector<SpectralField> values) {
    if (values.size() != layout->size()) throw std::invalid_argument("one history value per s-node is required");
    for (const auto& v : values)
        if (v.domain() != domain) throw std::invalid_argument("history values live on a different domain");
    HistoryState h;
    h.kind_ = Kind::SGrid;
    h.domain_ = std::move(domain);
    h.layout_ = std::move(layout);
    h.fields_ = std::move(values);
    return h;
}

HistoryState HistoryState::exp_modes(DomainPtr domain, const PronySum& kernel) {
    std::vector<SpectralField> zeta(kernel.terms.size(), SpectralField(domain));
    std::vector<std::vector<double>> q(kernel.terms.size(), std::vector<double>(domain->size(), 0.0));
    return exp_modes(std::move(domain), kernel, std::move(zeta), std::move(q));
}

HistoryState HistoryState::exp_modes(DomainPtr domain, const PronySum& kernel, std::vector<SpectralField> zeta,
                                     std::vector<std::vector<double>> second_moments) {
    if (kernel.terms.empty()) throw std::invalid_argument("exponential modes need a nonempty Prony kernel");
    if (zeta.size() != kernel.terms.size() || second_moments.size() != kernel.terms.size())
        throw std::invalid_argument("one moment pair per Prony term is required");
    for (std::size_t j = 0; j < zeta.size(); ++j) {
        if (zeta[j].domain() != domain || second_moments[j].size() != domain->size())
            throw std::invalid_argument("history moments do not match the domain");
    }
    HistoryState h;
    h.kind_ = Kind::ExpModes;
    h.domain_ = std::move(domain);
    h.prony_ = kernel;
    h.fields_ = std::move(zeta);
    h.q_ = std::move(second_moments);
    return h;
}

HistoryState HistoryState::with_profile(const std::function<double(double)>& g, const SpectralField& phi) const {
    HistoryState out = *this;
    switch (kind_) {
    case Kind::None:
        break;
    case Kind::SGrid:
        for (std::size_t i = 0; i < fields_.size(); ++i) out.fields_[i] = g(layout_->node(i)) * phi;
        break;
    case Kind::ExpModes: {
        boost::math::quadrature::exp_sinh<double> integrator;
        for (std::size_t j = 0; j < prony_.terms.size(); ++j) {
            const double d = prony_.terms[j].rate;
            const double m1 = integrator.integrate([&](double s) { return std::exp(-d * s) * g(s); }, 1e-14);
            const double m2 = integrator.integrate(
                [&](double s) {
                    const double x = g(s);
                    return std::exp(-d * s) * x * x;
                },
                1e-14);
            out.fields_[j] = (d * m1) * phi;
            for (std::size_t k = 0; k < phi.size(); ++k) out.q_[j][k] = m2 * phi[k] * phi[k];
        }
        break;
    }
    }
    return out;
}

SpectralField HistoryState::memory_force() const {
    SpectralField acc(domain_);
    switch (kind_) {
    case Kind::None:
        return acc;
    case Kind::SGrid:
        for (std::size_t i = 0; i < fields_.size(); ++i) acc.axpy(layout_->mass(i), fields_[i]);
        break;
    case Kind::ExpModes:
        for (std::size_t j = 0; j < fields_.size(); ++j)
            acc.axpy(prony_.terms[j].weight / prony_.terms[j].rate, fields_[j]);
        break;
    }
    return apply_A_power(acc, 1.0);
}

namespace {

double weighted_moments(const PronySum& p, const std::vector<std::vector<double>>& q, std::span<const double> lam,
                        double r, const std::function<double(const PronyTerm&)>& w) {
    double total = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < lam.size(); ++k) s += std::pow(lam[k], 1.0 + r) * q[j][k];
        total += w(p.terms[j]) * s;
    }
    return total;
}

}  // namespace

double HistoryState::norm_squared(double r) const {
    switch (kind_) {
    case Kind::None:
        return 0.0;
    case Kind::SGrid: {
        double s = 0.0;
        for (std::size_t i = 0; i < fields_.size(); ++i) s += layout_->mass(i) * sobolev_norm_squared(fields_[i], 1.0 + r);
        return s;
    }
    case Kind::ExpModes:
        return weighted_moments(prony_, q_, domain_->eigenvalues(), r, [](const PronyTerm& t) { return t.weight; });
    }
    return 0.0;
}

double HistoryState::psi(double r) const {
    switch (kind_) {
    case Kind::None:
        return 0.0;
    case Kind::SGrid: {
        double s = 0.0;
        for (std::size_t i = 0; i < fields_.size(); ++i)
            s += layout_->tail_weight(i) * sobolev_norm_squared(fields_[i], 1.0 + r);
        return s;
    }
    case Kind::ExpModes:
        return weighted_moments(prony_, q_, domain_->eigenvalues(), r,
                                [](const PronyTerm& t) { return t.weight / t.rate; });
    }
    return 0.0;
}

double HistoryState::t_dissipation(double r) const {
    switch (kind_) {
    case Kind::None:
        return 0.0;
    case Kind::SGrid: {
        double s = 0.0;
        for (std::size_t i = 0; i < fields_.size(); ++i) {
            SpectralField diff = fields_[i];
            if (i > 0) diff -= fields_[i - 1];
            s -= layout_->mass(i) / layout_->spacing(i) * inner(diff, fields_[i], 1.0 + r);
        }
        return s;
    }
    case Kind::ExpModes:
        return -0.5 * weighted_moments(prony_, q_, domain_->eigenvalues(), r,
                                       [](const PronyTerm& t) { return t.weight * t.rate; });
    }
    return 0.0;
}

SpectralField HistoryState::value_at(double s) const {
    if (kind_ == Kind::None) return SpectralField(domain_);
    if (kind_ != Kind::SGrid) throw std::invalid_argument("pointwise history values need an s-grid");
    const auto& x = layout_->nodes();
    if (s <= 0.0) return SpectralField(domain_);
    if (s >= x.back()) return fields_.back();
    const auto it = std::lower_bound(x.begin(), x.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double left = i == 0 ? 0.0 : x[i - 1];
    const double w = (s - left) / (x[i] - left);
    SpectralField out = w * fields_[i];
    if (i > 0) out.axpy(1.0 - w, fields_[i - 1]);
    return out;
}

namespace {

// (1 - e^{-x}) / x
double phi1(double x) {
    if (x < 1e-4) return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
    return -std::expm1(-x) / x;
}

// 1 - phi1(x)
double one_minus_phi1(double x) {
    if (x < 1e-4) return x / 2.0 - x * x / 6.0 + x * x * x / 24.0;
    return 1.0 - phi1(x);
}

// phi1(x) - e^{-x}
double phi1_minus_exp(double x) {
    if (x < 1e-4) return x / 2.0 - x * x / 3.0 + x * x * x / 8.0;
    return phi1(x) - std::exp(-x);
}

}  // namespace

HistoryStepPlan HistoryState::plan_step(double dt) const {
    HistoryStepPlan plan;
    plan.force_base = SpectralField(domain_);
    switch (kind_) {
    case Kind::None:
        break;
    case Kind::SGrid: {
        // Midpoint transport with zero source gives alpha; the unit-source response is a scalar beta_i.
        const HistoryState alpha = advance(SpectralField(domain_), dt, 0.5);
        double beta = 0.0;
        for (std::size_t i = 0; i < fields_.size(); ++i) {
            const double r = 0.5 * dt / layout_->spacing(i);
            beta = (r * beta + dt) / (1.0 + r);
            const double m = layout_->mass(i);
            plan.force_base.axpy(0.5 * m, fields_[i]);
            plan.force_base.axpy(0.5 * m, alpha.fields_[i]);
            plan.force_gain += 0.5 * m * beta;
        }
        plan.force_base = apply_A_power(plan.force_base, 1.0);
        break;
    }
    case Kind::ExpModes: {
        for (std::size_t j = 0; j < fields_.size(); ++j) {
            const double c = prony_.terms[j].weight, d = prony_.terms[j].rate;
            const double x = d * dt;
            plan.force_base.axpy(c / d * phi1(x), fields_[j]);
            plan.force_gain += c / (d * d) * one_minus_phi1(x);
        }
        plan.force_base = apply_A_power(plan.force_base, 1.0);
        break;
    }
    }
    return plan;
}

HistoryState HistoryState::advance(const SpectralField& v, double dt, double theta) const {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    HistoryState out = *this;
    switch (kind_) {
    case Kind::None:
        break;
    case Kind::SGrid: {
        if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("transport theta must lie in (0,1]");
        SpectralField prev_new(domain_);  // eta^{n+1}_{i-1}
        SpectralField prev_old(domain_);  // eta^n_{i-1}
        for (std::size_t i = 0; i < fields_.size(); ++i) {
            const double r = dt / layout_->spacing(i);
            const auto& cur = fields_[i];
            SpectralField rhs = cur;
            if (theta < 1.0) {
                rhs.axpy(-(1.0 - theta) * r, cur);
                rhs.axpy((1.0 - theta) * r, prev_old);
            }
            rhs.axpy(dt, v);
            rhs.axpy(theta * r, prev_new);
            rhs *= 1.0 / (1.0 + theta * r);
            prev_old = cur;
            prev_new = rhs;
            out.fields_[i] = std::move(rhs);
        }
        break;
    }
    case Kind::ExpModes: {
        for (std::size_t j = 0; j < fields_.size(); ++j) {
            const double d = prony_.terms[j].rate;
            const double x = d * dt;
            const double e = std::exp(-x);
            const auto& z0 = fields_[j];
            auto& q = out.q_[j];
            for (std::size_t k = 0; k < z0.size(); ++k) {
                const double vk = v[k];
                q[k] = e * q[k] + 2.0 * vk / d * (dt * e * z0[k] + vk / d * dt * phi1_minus_exp(x));
            }
            SpectralField z1 = e * z0;
            z1.axpy(dt * phi1(x), v);
            out.fields_[j] = std::move(z1);
        }
        break;
    }
    }
    return out;
}

HistoryState HistoryState::average(const HistoryState& a, const HistoryState& b) {
    if (a.kind_ != b.kind_ || a.fields_.size() != b.fields_.size())
        throw std::invalid_argument("cannot average histories of different discretizations");
    HistoryState out = a;
    for (std::size_t i = 0; i < out.fields_.size(); ++i) {
        out.fields_[i] += b.fields_[i];
        out.fields_[i] *= 0.5;
    }
    for (std::size_t j = 0; j < out.q_.size(); ++j)
        for (std::size_t k = 0; k < out.q_[j].size(); ++k) out.q_[j][k] = 0.5 * (a.q_[j][k] + b.q_[j][k]);
    return out;
}

double HistoryState::component_distance(const HistoryState& a, const HistoryState& b) {
    if (a.kind_ != b.kind_ || a.fields_.size() != b.fields_.size())
        throw std::invalid_argument("cannot compare histories of different discretizations");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.fields_.size(); ++i)
        worst = std::max(worst, sobolev_norm(a.fields_[i] - b.fields_[i], 1.0));
    return worst;
}

double HistoryState::sgrid_distance(const HistoryState& a, const HistoryState& b, double r) {
    if (a.kind_ != Kind::SGrid || b.kind_ != Kind::SGrid || a.layout_ != b.layout_)
        throw std::invalid_argument("weighted distance needs two histories on one s-grid");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.fields_.size(); ++i)
        sum += a.layout_->mass(i) * sobolev_norm_squared(a.fields_[i] - b.fields_[i], 1.0 + r);
    return std::sqrt(sum);
}

HistoryState advance_history(const HistoryState& eta, const SpectralField& v_new, double dt) {
    return eta.advance(v_new, dt, 1.0);
}

// ---------------------------------------------------------------------------

void Trajectory::push(double t, SpectralField field) {
    if (!times.empty() && !(t > times.back())) throw std::invalid_argument("trajectory times must increase");
    times.push_back(t);
    u.push_back(std::move(field));
}

SpectralField Trajectory::at(double t) const {
    if (times.empty()) throw std::invalid_argument("empty trajectory");
    const double tol = 1e-12 * std::max(1.0, std::abs(times.back()));
    if (t < times.front() - tol || t > times.back() + tol)
        throw std::out_of_range("trajectory does not cover the requested time");
    if (t <= times.front()) return u.front();
    if (t >= times.back()) return u.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    SpectralField out = (1.0 - w) * u[i - 1];
    out.axpy(w, u[i]);
    return out;
}

HistoryState rep_formula_oracle(const Trajectory& traj, const HistoryState& eta0, double t) {
    if (eta0.kind() == HistoryState::Kind::None) return eta0;
    if (eta0.kind() != HistoryState::Kind::SGrid)
        throw std::invalid_argument("the representation oracle samples on an s-grid");
    if (traj.times.empty() || traj.times.front() > 0.0) throw std::out_of_range("trajectory must start at t = 0");
    const SpectralField ut = traj.at(t);
    const SpectralField u0 = traj.at(0.0);
    std::vector<SpectralField> values;
    values.reserve(eta0.layout()->size());
    for (double s : eta0.layout()->nodes()) {
        if (s <= t) {
            values.push_back(ut - traj.at(t - s));
        } else {
            SpectralField v = eta0.value_at(s - t);
            v += ut;
            v -= u0;
            values.push_back(std::move(v));
        }
    }
    return HistoryState::sgrid(eta0.domain(), eta0.layout(), std::move(values));
}

}  // namespace viscomem
