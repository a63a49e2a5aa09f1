#include "viscomem/memory_kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace viscomem {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// --- Prony -----------------------------------------------------------------

double prony_min_rate(const PronySum& p) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& t : p.terms) d = std::min(d, t.rate);
    return d;
}

// log sum_j w_j exp(-d_j s), evaluated relative to the slowest rate.
double prony_log_sum(const PronySum& p, double s, bool tail) {
    if (p.terms.empty()) return kNegInf;
    const double dmin = prony_min_rate(p);
    double acc = 0.0;
    for (const auto& t : p.terms) {
        const double w = tail ? t.weight / t.rate : t.weight;
        acc += w * std::exp(-(t.rate - dmin) * s);
    }
    return safe_log(acc) - dmin * s;
}

// --- piecewise constant ------------------------------------------------------

struct BlockPosition {
    double blocks;  // m
    double offset;  // r in [0, P)
    bool beyond;    // past the support of a non-repeating kernel
};

BlockPosition locate(const PiecewiseConstant& k, double s) {
    const double P = k.breakpoints.back();
    if (k.tail_ratio <= 0.0) return {0.0, s, s >= P};
    const double m = std::floor(s / P);
    double r = s - m * P;
    if (r < 0.0) r = 0.0;
    return {m, r, false};
}

double block_mass(const PiecewiseConstant& k) {
    double S = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < k.values.size(); ++i) {
        S += k.values[i] * (k.breakpoints[i] - prev);
        prev = k.breakpoints[i];
    }
    return S;
}

// Segment containing r under the right-limit convention.
std::size_t segment_of(const PiecewiseConstant& k, double r) {
    auto it = std::upper_bound(k.breakpoints.begin(), k.breakpoints.end(), r);
    if (it == k.breakpoints.end()) return k.breakpoints.size() - 1;
    return static_cast<std::size_t>(it - k.breakpoints.begin());
}

// int_r^P of the first block.
double block_tail(const PiecewiseConstant& k, double r) {
    const std::size_t i = segment_of(k, r);
    double acc = k.values[i] * (k.breakpoints[i] - r);
    for (std::size_t j = i + 1; j < k.values.size(); ++j)
        acc += k.values[j] * (k.breakpoints[j] - k.breakpoints[j - 1]);
    return acc;
}

// int_r^P block_tail(x) dx
double block_tail_integral(const PiecewiseConstant& k, double r) {
    double acc = 0.0;
    const std::size_t i0 = segment_of(k, r);
    for (std::size_t i = i0; i < k.values.size(); ++i) {
        const double lo = (i == i0) ? r : k.breakpoints[i - 1];
        const double hi = k.breakpoints[i];
        const double len = hi - lo;
        acc += k.values[i] * len * len / 2.0 + block_tail(k, hi) * len;
    }
    return acc;
}

// --- tabulated ---------------------------------------------------------------

double tab_mu(const TabulatedMonotone& t, double s) {
    const auto& x = t.nodes;
    const auto& y = t.values;
    if (s < x.front()) {
        if (t.origin_exponent == 0.0) return y.front();
        return y.front() * std::pow(s / x.front(), -t.origin_exponent);
    }
    if (s >= x.back()) {
        if (t.tail == TabulatedMonotone::Tail::Exponential)
            return y.back() * std::exp(-t.tail_parameter * (s - x.back()));
        return y.back() * std::pow(s / x.back(), -t.tail_parameter);
    }
    auto it = std::upper_bound(x.begin(), x.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double w = (s - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - w) * y[i - 1] + w * y[i];
}

double tab_tail_mass(const TabulatedMonotone& t) {
    if (t.tail == TabulatedMonotone::Tail::Exponential) return t.values.back() / t.tail_parameter;
    return t.values.back() * t.nodes.back() / (t.tail_parameter - 1.0);
}

double tab_log_mu(const TabulatedMonotone& t, double s) {
    if (s >= t.nodes.back()) {
        const double ln = std::log(t.values.back());
        if (t.tail == TabulatedMonotone::Tail::Exponential) return ln - t.tail_parameter * (s - t.nodes.back());
        return ln - t.tail_parameter * std::log(s / t.nodes.back());
    }
    return safe_log(tab_mu(t, s));
}

double tab_tail(const TabulatedMonotone& t, double s) {
    const auto& x = t.nodes;
    const auto& y = t.values;
    if (s >= x.back()) {
        if (t.tail == TabulatedMonotone::Tail::Exponential) return tab_mu(t, s) / t.tail_parameter;
        return tab_mu(t, s) * s / (t.tail_parameter - 1.0);
    }
    double acc = tab_tail_mass(t);
    std::size_t first;
    if (s < x.front()) {
        const double a = t.origin_exponent;
        const double s0 = x.front();
        acc += y.front() * std::pow(s0, a) * (std::pow(s0, 1.0 - a) - std::pow(std::max(s, 0.0), 1.0 - a)) / (1.0 - a);
        first = 1;
    } else {
        auto it = std::upper_bound(x.begin(), x.end(), s);
        first = static_cast<std::size_t>(it - x.begin());
        acc += 0.5 * (tab_mu(t, s) + y[first]) * (x[first] - s);
        ++first;
    }
    for (std::size_t i = first; i < x.size(); ++i) acc += 0.5 * (y[i - 1] + y[i]) * (x[i] - x[i - 1]);
    return acc;
}

double tab_log_tail(const TabulatedMonotone& t, double s) {
    if (s >= t.nodes.back()) {
        if (t.tail == TabulatedMonotone::Tail::Exponential) return tab_log_mu(t, s) - std::log(t.tail_parameter);
        return tab_log_mu(t, s) + std::log(s / (t.tail_parameter - 1.0));
    }
    return safe_log(tab_tail(t, s));
}

void validate(const PronySum& p) {
    for (const auto& t : p.terms)
        if (!(t.weight > 0.0) || !(t.rate > 0.0) || !std::isfinite(t.weight) || !std::isfinite(t.rate))
            throw std::invalid_argument("Prony terms need positive weight and rate");
}

void validate(const PiecewiseConstant& k) {
    if (k.breakpoints.empty() || k.breakpoints.size() != k.values.size())
        throw std::invalid_argument("piecewise kernel needs one value per breakpoint");
    double prev = 0.0;
    for (std::size_t i = 0; i < k.breakpoints.size(); ++i) {
        if (!(k.breakpoints[i] > prev)) throw std::invalid_argument("breakpoints must be increasing and positive");
        if (!(k.values[i] >= 0.0)) throw std::invalid_argument("kernel values must be nonnegative");
        if (i > 0 && k.values[i] > k.values[i - 1]) throw std::invalid_argument("kernel must be nonincreasing");
        prev = k.breakpoints[i];
    }
    if (!(k.tail_ratio >= 0.0 && k.tail_ratio < 1.0)) throw std::invalid_argument("tail ratio must lie in [0,1)");
    if (k.tail_ratio > 0.0 && k.tail_ratio * k.values.front() > k.values.back() * (1.0 + 1e-14))
        throw std::invalid_argument("geometric repetition breaks monotonicity across blocks");
}

void validate(const TabulatedMonotone& t) {
    if (t.nodes.size() < 2 || t.nodes.size() != t.values.size())
        throw std::invalid_argument("tabulated kernel needs at least two samples");
    if (!(t.nodes.front() > 0.0)) throw std::invalid_argument("tabulated nodes must be positive");
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        if (!(t.values[i] > 0.0)) throw std::invalid_argument("tabulated values must be positive");
        if (i > 0 && !(t.nodes[i] > t.nodes[i - 1])) throw std::invalid_argument("tabulated nodes must increase");
        if (i > 0 && t.values[i] > t.values[i - 1]) throw std::invalid_argument("tabulated values must be nonincreasing");
    }
    if (!(t.origin_exponent >= 0.0 && t.origin_exponent < 1.0))
        throw std::invalid_argument("near-origin exponent must lie in [0,1) for integrability");
    if (t.tail == TabulatedMonotone::Tail::Exponential && !(t.tail_parameter > 0.0))
        throw std::invalid_argument("divergent tabulated tail: exponential rate must be positive");
    if (t.tail == TabulatedMonotone::Tail::Power && !(t.tail_parameter > 1.0))
        throw std::invalid_argument("divergent tabulated tail: power exponent must exceed 1");
}

}  // namespace

// ---------------------------------------------------------------------------

MemoryKernel::MemoryKernel() : v_(PronySum{}), kappa_(0.0) {}

MemoryKernel::MemoryKernel(Variant v) : v_(std::move(v)) {
    std::visit([](const auto& k) { validate(k); }, v_);
    kappa_ = std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PronySum>) {
                double s = 0.0;
                for (const auto& t : k.terms) s += t.weight / t.rate;
                return s;
            } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
                return block_mass(k) / (1.0 - k.tail_ratio);
            } else {
                return tab_tail(k, 0.0);
            }
        },
        v_);
}

MemoryKernel MemoryKernel::exponential(double weight, double rate) {
    return MemoryKernel(PronySum{{{weight, rate}}});
}

MemoryKernel MemoryKernel::prony(std::vector<PronyTerm> terms) { return MemoryKernel(PronySum{std::move(terms)}); }

MemoryKernel MemoryKernel::piecewise_constant(std::vector<double> breakpoints, std::vector<double> values,
                                              double tail_ratio) {
    return MemoryKernel(PiecewiseConstant{std::move(breakpoints), std::move(values), tail_ratio});
}

MemoryKernel MemoryKernel::tabulated(TabulatedMonotone table) { return MemoryKernel(std::move(table)); }

const PronySum* MemoryKernel::prony() const {
    const auto* p = std::get_if<PronySum>(&v_);
    return (p && !p->terms.empty()) ? p : nullptr;
}

double MemoryKernel::mu(double s) const {
    return std::visit(
        [s](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PronySum>) {
                double acc = 0.0;
                for (const auto& t : k.terms) acc += t.weight * std::exp(-t.rate * s);
                return acc;
            } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
                const auto pos = locate(k, s);
                if (pos.beyond) return 0.0;
                return std::pow(k.tail_ratio, pos.blocks) * k.values[segment_of(k, pos.offset)];
            } else {
                return tab_mu(k, s);
            }
        },
        v_);
}

double MemoryKernel::log_mu(double s) const {
    return std::visit(
        [s](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PronySum>) {
                return prony_log_sum(k, s, false);
            } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
                const auto pos = locate(k, s);
                if (pos.beyond) return kNegInf;
                const double v = k.values[segment_of(k, pos.offset)];
                if (v <= 0.0) return kNegInf;
                return (pos.blocks > 0.0 ? pos.blocks * std::log(k.tail_ratio) : 0.0) + std::log(v);
            } else {
                return tab_log_mu(k, s);
            }
        },
        v_);
}

double MemoryKernel::tail(double s) const {
    return std::visit(
        [s](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PronySum>) {
                double acc = 0.0;
                for (const auto& t : k.terms) acc += t.weight / t.rate * std::exp(-t.rate * s);
                return acc;
            } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
                const auto pos = locate(k, s);
                if (pos.beyond) return 0.0;
                const double q = k.tail_ratio;
                const double rest = q > 0.0 ? q * block_mass(k) / (1.0 - q) : 0.0;
                return std::pow(q, pos.blocks) * (block_tail(k, pos.offset) + rest);
            } else {
                return tab_tail(k, s);
            }
        },
        v_);
}

double MemoryKernel::log_tail(double s) const {
    return std::visit(
        [s](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PronySum>) {
                return prony_log_sum(k, s, true);
            } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
                const auto pos = locate(k, s);
                if (pos.beyond) return kNegInf;
                const double q = k.tail_ratio;
                const double rest = q > 0.0 ? q * block_mass(k) / (1.0 - q) : 0.0;
                const double within = block_tail(k, pos.offset) + rest;
                if (within <= 0.0) return kNegInf;
                return (pos.blocks > 0.0 ? pos.blocks * std::log(q) : 0.0) + std::log(within);
            } else {
                return tab_log_tail(k, s);
            }
        },
        v_);
}

double MemoryKernel::tail_integral(double a, double b) const {
    if (!(b > a)) return 0.0;
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PronySum>) {
                double acc = 0.0;
                for (const auto& t : k.terms)
                    acc += t.weight / (t.rate * t.rate) * (std::exp(-t.rate * a) - std::exp(-t.rate * b));
                return acc;
            } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
                // J(s) = int_s^inf I, closed form per block.
                const double q = k.tail_ratio;
                const double P = k.breakpoints.back();
                const double S = block_mass(k);
                const double rest = q > 0.0 ? q * S / (1.0 - q) : 0.0;
                const double K0 = block_tail_integral(k, 0.0);
                auto J = [&](double s) {
                    const auto pos = locate(k, s);
                    if (pos.beyond) return 0.0;
                    const double qm = std::pow(q, pos.blocks);
                    double val = qm * (block_tail_integral(k, pos.offset) + (P - pos.offset) * rest);
                    if (q > 0.0) val += qm * q / (1.0 - q) * (K0 + P * rest);
                    return val;
                };
                return J(a) - J(b);
            } else {
                auto f = [this](double s) { return tail(s); };
                return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 20, 1e-13);
            }
        },
        v_);
}

std::vector<double> MemoryKernel::jumps_below(double s_max) const {
    std::vector<double> out;
    if (const auto* k = std::get_if<PiecewiseConstant>(&v_)) {
        const double P = k->breakpoints.back();
        const double q = k->tail_ratio;
        for (double m = 0.0;; m += 1.0) {
            if (m * P >= s_max) break;
            for (double b : k->breakpoints) {
                const double s = m * P + b;
                if (s >= s_max) break;
                if (mu(s * (1.0 - 1e-14)) != mu(s)) out.push_back(s);
            }
            if (q <= 0.0 || m > 1e6) break;
        }
    }
    return out;
}

double MemoryKernel::characteristic_scale() const {
    if (is_zero()) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (tail(hi) > 0.5 * kappa_ && hi < 1e12) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) > 0.5 * kappa_ ? lo : hi) = mid;
    }
    const double m = mu(hi);
    return m > 0.0 ? kappa_ / m : hi;
}

double MemoryKernel::truncation_length(double rel_tol) const {
    if (is_zero()) return 0.0;
    const double target = rel_tol * kappa_;
    double lo = 0.0, hi = characteristic_scale();
    while (tail(hi) > target && hi < 1e12) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) > target ? lo : hi) = mid;
    }
    return hi;
}

std::string MemoryKernel::describe() const {
    std::ostringstream os;
    std::visit(
        [&os](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PronySum>) {
                if (k.terms.empty()) {
                    os << "zero";
                    return;
                }
                os << "prony{";
                for (std::size_t i = 0; i < k.terms.size(); ++i)
                    os << (i ? "," : "") << "(" << k.terms[i].weight << "," << k.terms[i].rate << ")";
                os << "}";
            } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
                os << "piecewise{" << k.values.size() << " steps, q=" << k.tail_ratio << "}";
            } else {
                os << "tabulated{" << k.nodes.size() << " nodes}";
            }
        },
        v_);
    return os.str();
}

// ---------------------------------------------------------------------------

double total_mass(const MemoryKernel& kernel) { return kernel.total_mass(); }

std::vector<double> certification_grid(const MemoryKernel& kernel, std::size_t n, const CertifyOptions& opts) {
    const double scale = kernel.characteristic_scale();
    const double lo = std::log10(scale) - opts.lower_decades;
    const double hi = std::log10(scale) + opts.upper_decades;
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i)
        s[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return s;
}

namespace {

// Adds jump locations (right limits) to a sorted grid.
std::vector<double> with_jumps(const MemoryKernel& kernel, std::vector<double> grid) {
    const double lo = grid.front(), hi = grid.back();
    for (double j : kernel.jumps_below(hi))
        if (j > lo) grid.push_back(j);
    std::sort(grid.begin(), grid.end());
    return grid;
}

// log(I/mu); nullopt marks the a.e.-irrelevant 0/0 case.
std::optional<double> log_ratio(const MemoryKernel& kernel, double s) {
    const double lt = kernel.log_tail(s);
    const double lm = kernel.log_mu(s);
    if (lt == kNegInf) return std::nullopt;
    if (lm == kNegInf) return std::numeric_limits<double>::infinity();
    return lt - lm;
}

}  // namespace

ThetaCertificate certify_theta(const MemoryKernel& kernel, const CertifyOptions& opts) {
    if (kernel.is_zero()) throw std::invalid_argument("tail certification needs a kernel with positive mass");
    const auto grid = with_jumps(kernel, certification_grid(kernel, opts.samples, opts));
    const double s_end = grid.back();

    ThetaCertificate cert;
    double best = kNegInf, best_s = grid.front();
    double early = kNegInf;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto lr = log_ratio(kernel, grid[i]);
        if (!lr) continue;
        if (!std::isfinite(*lr)) {
            cert.certified = false;
            cert.witness = grid[i];
            return cert;
        }
        if (*lr > best) {
            best = *lr;
            best_s = grid[i];
            best_i = i;
        }
        if (grid[i] <= s_end / 10.0) early = std::max(early, *lr);
    }

    // Unbounded growth across the last decade of the scan.
    const auto last = log_ratio(kernel, s_end);
    if (last && early > kNegInf && *last > early + std::log(opts.growth_factor)) {
        cert.certified = false;
        cert.witness = s_end;
        cert.theta = std::exp(*last);
        return cert;
    }

    // Local refinement around the discrete maximum.
    const double a = grid[best_i > 0 ? best_i - 1 : 0];
    const double b = grid[std::min(best_i + 1, grid.size() - 1)];
    for (int j = 0; j <= 200; ++j) {
        const double s = a + (b - a) * j / 200.0;
        if (s <= 0.0) continue;
        const auto lr = log_ratio(kernel, s);
        if (lr && std::isfinite(*lr) && *lr > best) {
            best = *lr;
            best_s = s;
        }
    }
    cert.certified = best > kNegInf;
    cert.theta = cert.certified ? std::exp(best) : 0.0;
    cert.witness = best_s;
    return cert;
}

NeceCertificate certify_nece(const MemoryKernel& kernel, double delta, const CertifyOptions& opts) {
    if (kernel.is_zero()) throw std::invalid_argument("tail certification needs a kernel with positive mass");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const auto s_grid = with_jumps(kernel, certification_grid(kernel, opts.pair_samples, opts));

    // The sigma scan must reach well beyond 1/delta to expose slow divergence.
    const double scale = kernel.characteristic_scale();
    const double sig_lo = std::log10(scale) - opts.lower_decades;
    const double sig_hi = std::log10(std::max(scale * std::pow(10.0, opts.upper_decades), 100.0 / delta));
    std::vector<double> sigmas{0.0};
    for (std::size_t i = 0; i < opts.pair_samples; ++i)
        sigmas.push_back(std::pow(10.0, sig_lo + (sig_hi - sig_lo) * static_cast<double>(i) /
                                               static_cast<double>(opts.pair_samples - 1)));
    const double sig_end = sigmas.back();

    NeceCertificate cert;
    cert.delta = delta;
    double best = kNegInf, early = kNegInf, late = kNegInf;
    double late_sigma = sig_end, late_s = s_grid.front();
    for (double s : s_grid) {
        const double lms = kernel.log_mu(s);
        if (lms == kNegInf) continue;
        for (double sg : sigmas) {
            const double val = kernel.log_mu(s + sg) - lms + delta * sg;
            if (std::isnan(val)) continue;
            if (val > best) {
                best = val;
                cert.witness_sigma = sg;
                cert.witness_s = s;
            }
            if (sg <= sig_end / 10.0) {
                early = std::max(early, val);
            } else if (val > late) {
                late = val;
                late_sigma = sg;
                late_s = s;
            }
        }
    }
    if (!std::isfinite(best) || late > early + std::log(opts.growth_factor)) {
        cert.certified = false;
        cert.constant = std::exp(std::max(best, late));
        cert.witness_sigma = late_sigma;
        cert.witness_s = late_s;
        return cert;
    }
    cert.certified = true;
    cert.constant = std::exp(best);
    return cert;
}

EquivalenceReport cross_check_equivalence(const MemoryKernel& kernel, const CertifyOptions& opts) {
    EquivalenceReport rep;
    rep.theta = certify_theta(kernel, opts);
    const double scale = kernel.characteristic_scale();
    constexpr int kDeltas = 25;
    for (int i = 0; i < kDeltas; ++i) {
        const double delta = std::pow(10.0, -4.0 + 6.0 * i / (kDeltas - 1)) / scale;
        rep.scan.push_back(certify_nece(kernel, delta, opts));
        if (rep.scan.back().certified) rep.best = rep.scan.back();
    }
    rep.agree = rep.theta.certified == rep.best.has_value();
    return rep;
}

}  // namespace viscomem
