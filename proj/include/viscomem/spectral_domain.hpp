#pragma once

/**
 * @file spectral_domain.hpp
 * @brief Fields on a box expanded in the Dirichlet-Laplacian eigenbasis.
 *
 * The eigenfunctions of A = -Laplacian with homogeneous Dirichlet data on
 * [0,L_1] x ... x [0,L_d] are tensor products of sqrt(2/L) sin(pi k x / L),
 * normalized in L^2. A field is stored as its coefficient vector in that
 * basis, so A is diagonal and every Sobolev norm ||u||_r = ||A^{r/2} u||
 * is an exact weighted sum.
 *
 * Pointwise nonlinearities are evaluated on an interior collocation grid
 * through a type-I discrete sine transform (FFTW RODFT00). The grid has
 * padding * (N + 1) - 1 interior points per axis; padding = 2 resolves the
 * projection of cubic products exactly.
 */

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace viscomem {

struct DomainSpec {
    int dimension = 1;
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    std::array<int, 3> modes{1, 1, 1};
    int padding = 2;

    void validate() const;
};

using MultiIndex = std::array<int, 3>;

struct Eigenpair {
    MultiIndex index;
    double lambda;
};

class Domain {
public:
    static std::shared_ptr<const Domain> create(const DomainSpec& spec);

    Domain(const Domain&) = delete;
    Domain& operator=(const Domain&) = delete;
    ~Domain();

    const DomainSpec& spec() const { return spec_; }
    int dimension() const { return spec_.dimension; }

    /// Number of spectral coefficients.
    std::size_t size() const { return lambda_.size(); }
    /// Eigenvalue for each flat coefficient index.
    std::span<const double> eigenvalues() const { return lambda_; }
    double lambda1() const { return lambda1_; }
    double volume() const;

    MultiIndex multi_index(std::size_t flat) const;
    std::size_t flat_index(const MultiIndex& k) const;
    /// All eigenpairs ordered by eigenvalue (ties by flat index).
    std::vector<Eigenpair> sorted_eigenpairs() const;

    std::size_t grid_size() const { return grid_points_; }
    const std::array<int, 3>& grid_shape() const { return grid_shape_; }
    /// Cartesian coordinates of a collocation node.
    std::array<double, 3> grid_point(std::size_t flat) const;
    /// Uniform quadrature weight of the interior collocation rule.
    double quadrature_weight() const { return quad_weight_; }

    /// Coefficients -> values at collocation nodes.
    std::vector<double> to_grid(std::span<const double> coeffs) const;
    /// Values at collocation nodes -> coefficients of the resolved modes.
    std::vector<double> from_grid(std::span<const double> values) const;

private:
    explicit Domain(const DomainSpec& spec);

    DomainSpec spec_;
    std::vector<double> lambda_;
    double lambda1_ = 0.0;
    std::array<int, 3> grid_shape_{1, 1, 1};
    std::size_t grid_points_ = 0;
    double quad_weight_ = 0.0;
    double to_grid_scale_ = 0.0;
    double from_grid_scale_ = 0.0;
    void* plan_ = nullptr;
};

using DomainPtr = std::shared_ptr<const Domain>;

/// A real field in the Dirichlet eigenbasis of one domain.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(DomainPtr domain);
    SpectralField(DomainPtr domain, std::vector<double> coeffs);

    /// L^2-normalized eigenfunction with the given multi-index (1-based).
    static SpectralField eigenfunction(DomainPtr domain, const MultiIndex& k, double amplitude = 1.0);
    static SpectralField from_grid(DomainPtr domain, std::span<const double> values);

    const DomainPtr& domain() const { return domain_; }
    bool empty() const { return !domain_; }
    std::size_t size() const { return coeffs_.size(); }
    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    double& operator[](std::size_t i) { return coeffs_[i]; }

    std::vector<double> to_grid() const { return domain_->to_grid(coeffs_); }

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double scale);
    /// this += alpha * x
    SpectralField& axpy(double alpha, const SpectralField& x);

    bool finite() const;

private:
    DomainPtr domain_;
    std::vector<double> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);
SpectralField operator*(SpectralField a, double s);

std::vector<Eigenpair> eigenvalues(const DomainSpec& spec);

/// <u, v>_r = sum_k lambda_k^r u_k v_k
double inner(const SpectralField& u, const SpectralField& v, double r);
/// ||u||_r = (sum_k lambda_k^r u_k^2)^{1/2}; r may be negative.
double sobolev_norm(const SpectralField& u, double r);
double sobolev_norm_squared(const SpectralField& u, double r);
/// Multiplies each coefficient by lambda_k^p.
SpectralField apply_A_power(const SpectralField& u, double p);

/// Evaluates g pointwise on the collocation grid and projects back.
SpectralField map_pointwise(const SpectralField& u, const std::function<double(double)>& g);
/// Projection of a grid function onto the resolved modes.
SpectralField project(const DomainPtr& domain, std::span<const double> values);

/// Collocation quadrature of a grid function over the domain.
double integrate_grid(const Domain& domain, std::span<const double> values);

/// Throws std::invalid_argument unless both fields live on the same domain.
void require_same_domain(const SpectralField& a, const SpectralField& b);

}  // namespace viscomem
