#include "viscomem/spectral_domain.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

namespace viscomem {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

void DomainSpec::validate() const {
    if (dimension < 1 || dimension > 3)
        throw std::invalid_argument("domain dimension must be 1, 2 or 3");
    for (int i = 0; i < dimension; ++i) {
        if (!(lengths[i] > 0.0) || !std::isfinite(lengths[i]))
            throw std::invalid_argument("domain edge lengths must be positive");
        if (modes[i] < 1)
            throw std::invalid_argument("modes per axis must be positive");
    }
    if (padding < 1)
        throw std::invalid_argument("grid padding factor must be at least 1");
}

std::shared_ptr<const Domain> Domain::create(const DomainSpec& spec) {
    return std::shared_ptr<const Domain>(new Domain(spec));
}

Domain::Domain(const DomainSpec& spec) : spec_(spec) {
    spec_.validate();
    for (int i = spec_.dimension; i < 3; ++i) {
        spec_.modes[i] = 1;
        spec_.lengths[i] = 1.0;
    }
    const int d = spec_.dimension;

    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(spec_.modes[i]);
    lambda_.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
        const MultiIndex k = multi_index(f);
        double lam = 0.0;
        for (int i = 0; i < d; ++i) {
            const double w = std::numbers::pi * k[i] / spec_.lengths[i];
            lam += w * w;
        }
        lambda_[f] = lam;
    }
    lambda1_ = *std::min_element(lambda_.begin(), lambda_.end());

    grid_points_ = 1;
    quad_weight_ = 1.0;
    to_grid_scale_ = 1.0;
    from_grid_scale_ = 1.0;
    std::array<int, 3> shape{1, 1, 1};
    for (int i = 0; i < d; ++i) {
        const int m = spec_.padding * (spec_.modes[i] + 1) - 1;
        shape[i] = m;
        grid_points_ *= static_cast<std::size_t>(m);
        const double L = spec_.lengths[i];
        quad_weight_ *= L / (m + 1);
        to_grid_scale_ *= std::sqrt(2.0 / L) / 2.0;
        from_grid_scale_ *= std::sqrt(2.0 / L) * L / (2.0 * (m + 1));
    }
    grid_shape_ = shape;

    std::vector<double> scratch(grid_points_);
    std::array<fftw_r2r_kind, 3> kinds{FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_r2r(d, shape.data(), scratch.data(), scratch.data(), kinds.data(),
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_) throw std::runtime_error("FFTW failed to create a sine-transform plan");
}

Domain::~Domain() {
    if (plan_) {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    }
}

double Domain::volume() const {
    double v = 1.0;
    for (int i = 0; i < spec_.dimension; ++i) v *= spec_.lengths[i];
    return v;
}

MultiIndex Domain::multi_index(std::size_t flat) const {
    MultiIndex k{1, 1, 1};
    for (int i = spec_.dimension - 1; i >= 0; --i) {
        const auto n = static_cast<std::size_t>(spec_.modes[i]);
        k[i] = static_cast<int>(flat % n) + 1;
        flat /= n;
    }
    return k;
}

std::size_t Domain::flat_index(const MultiIndex& k) const {
    std::size_t flat = 0;
    for (int i = 0; i < spec_.dimension; ++i) {
        if (k[i] < 1 || k[i] > spec_.modes[i])
            throw std::out_of_range("mode index outside the resolved range");
        flat = flat * static_cast<std::size_t>(spec_.modes[i]) + static_cast<std::size_t>(k[i] - 1);
    }
    return flat;
}

std::vector<Eigenpair> Domain::sorted_eigenpairs() const {
    std::vector<std::size_t> order(lambda_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lambda_[a] < lambda_[b]; });
    std::vector<Eigenpair> out;
    out.reserve(order.size());
    for (auto f : order) out.push_back({multi_index(f), lambda_[f]});
    return out;
}

std::array<double, 3> Domain::grid_point(std::size_t flat) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int i = spec_.dimension - 1; i >= 0; --i) {
        const auto m = static_cast<std::size_t>(grid_shape_[i]);
        const auto j = flat % m;
        flat /= m;
        x[i] = spec_.lengths[i] * static_cast<double>(j + 1) / static_cast<double>(m + 1);
    }
    return x;
}

std::vector<double> Domain::to_grid(std::span<const double> coeffs) const {
    if (coeffs.size() != size())
        throw std::invalid_argument("coefficient vector does not match the domain resolution");
    std::vector<double> grid(grid_points_, 0.0);
    const int d = spec_.dimension;
    // Scatter the resolved coefficients into the leading corner of the padded array.
    for (std::size_t f = 0; f < coeffs.size(); ++f) {
        const MultiIndex k = multi_index(f);
        std::size_t g = 0;
        for (int i = 0; i < d; ++i) g = g * static_cast<std::size_t>(grid_shape_[i]) + static_cast<std::size_t>(k[i] - 1);
        grid[g] = coeffs[f];
    }
    fftw_execute_r2r(static_cast<fftw_plan>(plan_), grid.data(), grid.data());
    for (auto& x : grid) x *= to_grid_scale_;
    return grid;
}

std::vector<double> Domain::from_grid(std::span<const double> values) const {
    if (values.size() != grid_points_)
        throw std::invalid_argument("grid values do not match the collocation resolution");
    std::vector<double> work(values.begin(), values.end());
    fftw_execute_r2r(static_cast<fftw_plan>(plan_), work.data(), work.data());
    const int d = spec_.dimension;
    std::vector<double> coeffs(size());
    for (std::size_t f = 0; f < coeffs.size(); ++f) {
        const MultiIndex k = multi_index(f);
        std::size_t g = 0;
        for (int i = 0; i < d; ++i) g = g * static_cast<std::size_t>(grid_shape_[i]) + static_cast<std::size_t>(k[i] - 1);
        coeffs[f] = work[g] * from_grid_scale_;
    }
    return coeffs;
}

// ---------------------------------------------------------------------------

SpectralField::SpectralField(DomainPtr domain) : domain_(std::move(domain)) {
    coeffs_.assign(domain_->size(), 0.0);
}

SpectralField::SpectralField(DomainPtr domain, std::vector<double> coeffs)
    : domain_(std::move(domain)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != domain_->size())
        throw std::invalid_argument("coefficient count " + std::to_string(coeffs_.size()) +
                                    " does not match domain size " + std::to_string(domain_->size()));
}

SpectralField SpectralField::eigenfunction(DomainPtr domain, const MultiIndex& k, double amplitude) {
    SpectralField u(domain);
    u.coeffs_[domain->flat_index(k)] = amplitude;
    return u;
}

SpectralField SpectralField::from_grid(DomainPtr domain, std::span<const double> values) {
    auto c = domain->from_grid(values);
    return SpectralField(std::move(domain), std::move(c));
}

void require_same_domain(const SpectralField& a, const SpectralField& b) {
    if (a.domain() != b.domain() && (a.size() != b.size() || !a.domain() || !b.domain()))
        throw std::invalid_argument("fields live on different domains");
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    require_same_domain(*this, other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    require_same_domain(*this, other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
    for (auto& c : coeffs_) c *= scale;
    return *this;
}

SpectralField& SpectralField::axpy(double alpha, const SpectralField& x) {
    require_same_domain(*this, x);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += alpha * x.coeffs_[i];
    return *this;
}

bool SpectralField::finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return std::isfinite(c); });
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }
SpectralField operator*(SpectralField a, double s) { return a *= s; }

std::vector<Eigenpair> eigenvalues(const DomainSpec& spec) {
    return Domain::create(spec)->sorted_eigenpairs();
}

namespace {

inline double lambda_power(double lambda, double r) {
    if (r == 0.0) return 1.0;
    if (r == 1.0) return lambda;
    return std::pow(lambda, r);
}

}  // namespace

double inner(const SpectralField& u, const SpectralField& v, double r) {
    require_same_domain(u, v);
    const auto lam = u.domain()->eigenvalues();
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += lambda_power(lam[k], r) * u[k] * v[k];
    return s;
}

double sobolev_norm_squared(const SpectralField& u, double r) {
    const auto lam = u.domain()->eigenvalues();
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += lambda_power(lam[k], r) * u[k] * u[k];
    return s;
}

double sobolev_norm(const SpectralField& u, double r) { return std::sqrt(sobolev_norm_squared(u, r)); }

SpectralField apply_A_power(const SpectralField& u, double p) {
    SpectralField out = u;
    const auto lam = u.domain()->eigenvalues();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= lambda_power(lam[k], p);
    return out;
}

SpectralField map_pointwise(const SpectralField& u, const std::function<double(double)>& g) {
    auto grid = u.to_grid();
    for (auto& x : grid) x = g(x);
    return SpectralField::from_grid(u.domain(), grid);
}

SpectralField project(const DomainPtr& domain, std::span<const double> values) {
    return SpectralField::from_grid(domain, values);
}

double integrate_grid(const Domain& domain, std::span<const double> values) {
    if (values.size() != domain.grid_size())
        throw std::invalid_argument("grid values do not match the collocation resolution");
    double s = 0.0;
    for (double x : values) s += x;
    return s * domain.quadrature_weight();
}

}  // namespace viscomem
