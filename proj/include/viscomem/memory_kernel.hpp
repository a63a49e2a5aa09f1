#pragma once

/**
 * @file memory_kernel.hpp
 * @brief Nonincreasing summable memory kernels and their tail certification.
 *
 * A kernel mu >= 0 is nonincreasing with total mass kappa = int_0^inf mu.
 * Its tail is I(s) = int_s^inf mu. Three families are supported:
 *
 *  - Prony sums  mu(s) = sum_j c_j exp(-d_j s)
 *  - piecewise constant kernels, optionally repeated geometrically
 *    (block [0,P] copied onto [mP,(m+1)P] scaled by q^m), which gives
 *    kernels with infinitely many jumps such as 2^{-ceil(s)}
 *  - tabulated monotone samples, linear between nodes, with a power-law
 *    near-origin piece (possibly singular) and an analytic tail
 *
 * Point values use the right limit mu(s+), so at a jump the smaller value
 * is returned. Log-space evaluations stay finite far into the tail.
 */

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace viscomem {

struct PronyTerm {
    double weight;  ///< c_j > 0
    double rate;    ///< d_j > 0
};

struct PronySum {
    std::vector<PronyTerm> terms;
};

struct PiecewiseConstant {
    std::vector<double> breakpoints;  ///< 0 < b_1 < ... < b_n = P
    std::vector<double> values;       ///< value on (b_{i-1}, b_i], nonincreasing
    double tail_ratio = 0.0;          ///< q in [0,1); 0 means zero beyond b_n
};

struct TabulatedMonotone {
    enum class Tail { Exponential, Power };
    std::vector<double> nodes;   ///< 0 < s_0 < ... < s_n
    std::vector<double> values;  ///< positive, nonincreasing
    double origin_exponent = 0.0;  ///< mu(s) = mu_0 (s/s_0)^{-a} below s_0, a in [0,1)
    Tail tail = Tail::Exponential;
    double tail_parameter = 1.0;   ///< exponential rate, or power p > 1
};

class MemoryKernel {
public:
    using Variant = std::variant<PronySum, PiecewiseConstant, TabulatedMonotone>;

    /// The zero kernel (no memory).
    MemoryKernel();
    explicit MemoryKernel(Variant v);

    static MemoryKernel none() { return MemoryKernel(); }
    static MemoryKernel exponential(double weight = 1.0, double rate = 1.0);
    static MemoryKernel prony(std::vector<PronyTerm> terms);
    static MemoryKernel piecewise_constant(std::vector<double> breakpoints, std::vector<double> values,
                                           double tail_ratio = 0.0);
    static MemoryKernel tabulated(TabulatedMonotone table);

    const Variant& variant() const { return v_; }
    bool is_zero() const { return kappa_ == 0.0; }
    /// Non-null when the kernel is a (nonempty) Prony sum.
    const PronySum* prony() const;

    double total_mass() const { return kappa_; }
    /// Right limit mu(s+).
    double mu(double s) const;
    /// I(s) = int_s^inf mu
    double tail(double s) const;
    /// log mu(s+), -inf where the kernel vanishes.
    double log_mu(double s) const;
    /// log I(s), -inf where the tail vanishes.
    double log_tail(double s) const;
    /// int_a^b I(s) ds
    double tail_integral(double a, double b) const;

    /// Jump locations in (0, s_max).
    std::vector<double> jumps_below(double s_max) const;
    /// kappa / mu(s_med) with I(s_med) = kappa/2; 1 for the zero kernel.
    double characteristic_scale() const;
    /// Smallest s with I(s) <= rel_tol * kappa (bisection).
    double truncation_length(double rel_tol) const;

    std::string describe() const;

private:
    Variant v_;
    double kappa_ = 0.0;
};

struct ThetaCertificate {
    bool certified = false;
    double theta = std::numeric_limits<double>::quiet_NaN();
    /// Location of the supremum (certified) or of the divergence (failure).
    double witness = std::numeric_limits<double>::quiet_NaN();
};

struct NeceCertificate {
    bool certified = false;
    double delta = 0.0;
    double constant = std::numeric_limits<double>::quiet_NaN();
    double witness_sigma = std::numeric_limits<double>::quiet_NaN();
    double witness_s = std::numeric_limits<double>::quiet_NaN();
};

struct EquivalenceReport {
    ThetaCertificate theta;
    std::vector<NeceCertificate> scan;
    /// Certified entry with the largest delta, if any.
    std::optional<NeceCertificate> best;
    bool agree = false;
};

struct CertifyOptions {
    std::size_t samples = 10000;     ///< log grid points for the tail ratio
    std::size_t pair_samples = 400;  ///< per axis for the (sigma, s) scan
    double lower_decades = 6.0;      ///< s_min = 10^-6 s_scale
    double upper_decades = 3.0;      ///< s_max = 10^3 s_scale
    double growth_factor = 1.5;      ///< end-of-scan growth treated as divergence
};

double total_mass(const MemoryKernel& kernel);
/// Smallest Theta with I(s) <= Theta mu(s) on the scan; throws for the zero kernel.
ThetaCertificate certify_theta(const MemoryKernel& kernel, const CertifyOptions& opts = {});
/// Smallest C with mu(sigma+s) <= C exp(-delta sigma) mu(s) on the scan.
NeceCertificate certify_nece(const MemoryKernel& kernel, double delta, const CertifyOptions& opts = {});
/// Runs both certifications, scanning delta logarithmically.
EquivalenceReport cross_check_equivalence(const MemoryKernel& kernel, const CertifyOptions& opts = {});

/// The log-spaced scan grid [10^-lower, 10^upper] * s_scale.
std::vector<double> certification_grid(const MemoryKernel& kernel, std::size_t n, const CertifyOptions& opts);

}  // namespace viscomem
