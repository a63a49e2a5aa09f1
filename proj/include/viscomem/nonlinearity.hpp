#pragma once

/**
 * @file nonlinearity.hpp
 * @brief Polynomial nonlinearities f with f(0) = 0, hypothesis scans and the
 *        splitting f = f0 + f1.
 */

#include "viscomem/spectral_domain.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace viscomem {

class Nonlinearity {
public:
    /// Zero nonlinearity, nu = 1, m_f = 0.
    Nonlinearity();
    /// f(u) = sum_i coeffs[i] u^i. The constant term is dropped so f(0) = 0.
    Nonlinearity(std::vector<double> coeffs, double nu, double m_f, std::string name = "polynomial");

    static Nonlinearity cubic(double nu = 1.0, double m_f = 0.0);
    static Nonlinearity quintic(double nu = 1.0, double m_f = 0.0);
    /// f(u) = u^3 - u
    static Nonlinearity double_well(double nu, double m_f);

    double f(double u) const;
    double df(double u) const;
    /// F(u) = int_0^u f
    double F(double u) const;

    double nu() const { return nu_; }
    double m_f() const { return m_f_; }
    const std::string& name() const { return name_; }
    const std::vector<double>& coefficients() const { return c_; }
    bool is_zero() const { return c_.empty(); }

    /// Projection of f(u) onto the resolved modes.
    SpectralField apply(const SpectralField& u) const;
    /// Projection of f'(u) w.
    SpectralField apply_derivative(const SpectralField& u, const SpectralField& w) const;
    /// <F(u), 1> by collocation quadrature.
    double integral_F(const SpectralField& u) const;

private:
    std::vector<double> c_;   // c_[i] multiplies u^i
    std::vector<double> dc_;  // derivative
    std::vector<double> ic_;  // antiderivative
    double nu_ = 1.0;
    double m_f_ = 0.0;
    std::string name_;
};

struct GrowthReport {
    bool ok = false;
    double constant = 0.0;             ///< empirical c on the full range
    std::vector<double> nested;        ///< c on range/100, range/10, range
    double witness_u = 0.0, witness_v = 0.0;
};

/// Least c with |f(u)-f(v)| <= c|u-v|(1+u^4+v^4) over sampled pairs.
GrowthReport verify_growth(const Nonlinearity& nl, double range, std::size_t samples = 100000);

struct DissipationReport {
    bool diss1_ok = false;
    bool diss2_ok = false;
    double margin1 = 0.0;  ///< min of f(u)u - F(u) + (lambda1/2)(1-nu)u^2 + m_f
    double margin2 = 0.0;  ///< min of F(u) + (lambda1/2)(1-nu)u^2 + m_f
    double witness1 = 0.0, witness2 = 0.0;
    bool ok() const { return diss1_ok && diss2_ok; }
};

DissipationReport verify_dissipation(const Nonlinearity& nl, double lambda1, double range = 100.0,
                                     std::size_t samples = 100000);

/// f = f0 + f1 with f0 supported in |s| >= k and f1 globally Lipschitz.
class Decomposition {
public:
    /// beta <= 0 selects the midpoint (alpha + lambda1)/2.
    Decomposition(Nonlinearity nl, double lambda1, double beta = 0.0);

    int k() const { return k_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    const Nonlinearity& nonlinearity() const { return nl_; }

    /// Smooth monotone cutoff: 0 on |s| <= k, 1 on |s| >= k+1.
    double cutoff(double s) const;
    double f0(double s) const;
    double f1(double s) const;
    /// F0(s) = int_0^s f0
    double F0(double s) const;

    SpectralField apply_f0(const SpectralField& u) const;
    SpectralField apply_f1(const SpectralField& u) const;

    /// Largest difference quotient of f1 on a uniform grid over [-range, range].
    double lipschitz_f1(double range, std::size_t samples) const;

private:
    double transition_integral(double a, double b) const;

    Nonlinearity nl_;
    double lambda1_;
    double alpha_;
    double beta_;
    int k_;
    double F0_plus_ = 0.0;   // F0(k+1)
    double F0_minus_ = 0.0;  // F0(-(k+1))
};

inline Decomposition decompose(const Nonlinearity& nl, double lambda1, double beta = 0.0) {
    return Decomposition(nl, lambda1, beta);
}

struct ExtraBoundsReport {
    double margin1 = 0.0;  ///< <f(u),u> - <F(u),1> + (1-nu)/2 ||u||_1^2 + M_f
    double margin2 = 0.0;  ///< <F(u),1> + (1-nu)/2 ||u||_1^2 + M_f
    bool ok() const { return margin1 >= 0.0 && margin2 >= 0.0; }
};

/// Integrated dissipation bounds with M_f = m_f |Omega|, by grid quadrature.
ExtraBoundsReport extra_bounds_check(const Nonlinearity& nl, const SpectralField& u);

}  // namespace viscomem
