#include "viscomem/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace viscomem {

double energy(const SystemState& z) { return 0.5 * phase_norm_squared(z, 0.0); }

double energy_sigma(const SystemState& z, double s) { return 0.5 * phase_norm_squared(z, s); }

double kinetic_term(const SpectralField& v, double rho) {
    auto g = v.to_grid();
    for (auto& x : g) x = std::pow(std::abs(x), rho + 2.0) / (rho + 2.0);
    return integrate_grid(*v.domain(), g);
}

double lyapunov(const SystemState& z, const Nonlinearity& nl, const SpectralField& h, double rho) {
    return kinetic_term(z.v, rho) + energy(z) + nl.integral_F(z.u) - inner(h, z.u, 0.0);
}

double dissipation_residual(const SystemState& z0, const SystemState& z1, double dt, const Nonlinearity& nl,
                            const SpectralField& h, double rho) {
    const double dL = (lyapunov(z1, nl, h, rho) - lyapunov(z0, nl, h, rho)) / dt;
    SpectralField vbar = z0.v + z1.v;
    vbar *= 0.5;
    const double tee = HistoryState::average(z0.eta, z1.eta).t_dissipation();
    return std::abs(dL + sobolev_norm_squared(vbar, 1.0) - tee);
}

double default_sigma(double rho) { return std::min(1.0 / 3.0, (4.0 - rho) / 2.0); }

LambdaWeights default_lambda_weights(double theta, double nu) {
    LambdaWeights w;
    w.eps = 1.0 / (2.0 * theta);
    w.delta = std::min(0.25, nu / 8.0);
    return w;
}

AuxFunctionals aux_functionals(const SystemState& z, double rho, double s, const LambdaWeights& w) {
    AuxFunctionals a;
    a.psi = z.eta.psi(0.0);
    auto ug = z.u.to_grid();
    const auto vg = z.v.to_grid();
    for (std::size_t i = 0; i < ug.size(); ++i) ug[i] *= std::pow(std::abs(vg[i]), rho) * vg[i];
    const double cross = integrate_grid(*z.u.domain(), ug);
    a.phi = 0.5 * sobolev_norm_squared(z.u, 1.0) + inner(z.v, z.u, 1.0) + cross / (rho + 1.0);
    a.psi_s = z.eta.psi(s);
    a.phi_s = 0.5 * sobolev_norm_squared(z.u, 1.0 + s) + inner(z.u, z.v, 1.0 + s);
    a.energy_s = energy_sigma(z, s);
    a.lambda_s = a.energy_s + w.eps * a.psi_s + w.delta * a.phi_s;
    return a;
}

double psi_balance_defect(const SystemState& z0, const SystemState& z1, double dt, double theta, double kappa) {
    const double dpsi = (z1.eta.psi() - z0.eta.psi()) / dt;
    const double eta_bar = HistoryState::average(z0.eta, z1.eta).norm_squared();
    SpectralField vbar = z0.v + z1.v;
    vbar *= 0.5;
    return dpsi + 0.5 * eta_bar - 2.0 * theta * theta * kappa * sobolev_norm_squared(vbar, 1.0);
}

double absorbing_radius(double nu, double M_f, double h_norm_minus1) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("nu must lie in (0,1]");
    return 4.0 / nu * (2.0 * M_f + h_norm_minus1 * h_norm_minus1 / nu);
}

double absorbing_radius(const Nonlinearity& nl, const SpectralField& h) {
    return absorbing_radius(nl.nu(), nl.m_f() * h.domain()->volume(), sobolev_norm(h, -1.0));
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& energy_csv_header() {
    static const std::vector<std::string> h{"t",         "E",         "L",           "Psi",
                                            "Phi",       "Lambda_sigma", "norm_u_1s", "norm_v_1s",
                                            "norm_eta_Ms", "diss_residual", "T_eta_eta"};
    return h;
}

std::string format_double(double x) {
    if (x == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_energy_csv(std::ostream& os, const std::vector<EnergyReport>& rows) {
    const auto& h = energy_csv_header();
    for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
    os << '\n';
    for (const auto& r : rows) {
        const double vals[] = {r.t,           r.E,         r.L,         r.Psi,           r.Phi,      r.Lambda_sigma,
                               r.norm_u_1s,   r.norm_v_1s, r.norm_eta_Ms, r.diss_residual, r.T_eta_eta};
        bool first = true;
        for (double v : vals) {
            os << (first ? "" : ",") << format_double(v);
            first = false;
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ssr = std::numeric_limits<double>::infinity();
    std::size_t n = 0;
};

LineFit fit_log_line(const std::vector<double>& t, const std::vector<double>& E, std::size_t begin, double R,
                     double floor) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t n = 0;
    for (std::size_t i = begin; i < t.size(); ++i) {
        const double d = E[i] - R;
        // Differences below the resolution of E carry no rate information.
        if (!(d > floor) || !(d > 64.0 * std::numeric_limits<double>::epsilon() * std::abs(E[i]))) continue;
        const double y = std::log(d);
        st += t[i];
        sy += y;
        stt += t[i] * t[i];
        sty += t[i] * y;
        ++n;
    }
    LineFit f;
    f.n = n;
    if (n < 3) return f;
    const double dn = static_cast<double>(n);
    const double den = dn * stt - st * st;
    if (den == 0.0) return f;
    f.slope = (dn * sty - st * sy) / den;
    f.intercept = (sy - f.slope * st) / dn;
    // Scored in energy space so that plateaus of different height compare fairly.
    double ssr = 0.0;
    for (std::size_t i = begin; i < t.size(); ++i) {
        const double r = E[i] - R - std::exp(f.intercept + f.slope * t[i]);
        ssr += r * r;
    }
    f.ssr = ssr / static_cast<double>(t.size() - begin);
    return f;
}

// Plateau of the best E = R + A exp(-w t) fit; R and A solve a 2x2 least-squares problem for each w.
double projected_plateau(const std::vector<double>& t, const std::vector<double>& E, std::size_t begin) {
    const double t0 = t[begin], span = t.back() - t0;
    if (!(span > 0.0)) return 0.0;
    struct Fit {
        double R = 0.0, ssr = std::numeric_limits<double>::infinity();
    };
    auto solve = [&](double w) {
        double n = 0, sg = 0, sgg = 0, se = 0, sge = 0;
        for (std::size_t i = begin; i < t.size(); ++i) {
            const double g = std::exp(-w * (t[i] - t0));
            n += 1;
            sg += g;
            sgg += g * g;
            se += E[i];
            sge += g * E[i];
        }
        Fit f;
        const double det = n * sgg - sg * sg;
        if (!(det > 1e-14 * n * sgg)) return f;
        f.R = (sgg * se - sg * sge) / det;
        const double A = (n * sge - sg * se) / det;
        double ssr = 0.0;
        for (std::size_t i = begin; i < t.size(); ++i) {
            const double r = E[i] - f.R - A * std::exp(-w * (t[i] - t0));
            ssr += r * r;
        }
        f.ssr = ssr;
        return f;
    };
    constexpr int kScan = 200;
    double best_x = -2.0;
    Fit best;
    for (int i = 0; i <= kScan; ++i) {
        const double x = -2.0 + 5.0 * i / kScan;  // w span in [1e-2, 1e3]
        const Fit f = solve(std::pow(10.0, x) / span);
        if (f.ssr < best.ssr) {
            best = f;
            best_x = x;
        }
    }
    double lo = best_x - 5.0 / kScan, hi = best_x + 5.0 / kScan;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        if (solve(std::pow(10.0, a) / span).ssr < solve(std::pow(10.0, b) / span).ssr)
            hi = b;
        else
            lo = a;
    }
    const Fit f = solve(std::pow(10.0, 0.5 * (lo + hi)) / span);
    return f.ssr <= best.ssr ? f.R : best.R;
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& E, double window, double floor) {
    if (t.size() != E.size()) throw std::invalid_argument("time and energy series differ in length");
    if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("fit window must lie in (0,1]");
    const std::size_t n = t.size();
    const std::size_t begin = n - static_cast<std::size_t>(std::ceil(window * static_cast<double>(n)));
    if (n < 3 || n - begin < 3) throw std::invalid_argument("series too short for a decay fit");

    const double emin = *std::min_element(E.begin() + static_cast<std::ptrdiff_t>(begin), E.end());
    const double emax = *std::max_element(E.begin() + static_cast<std::ptrdiff_t>(begin), E.end());
    if (emin > 0.0 && emax - emin <= 1e-9 * emax) {
        // Converged tail: log(E - R) is pure round-off for every admissible R.
        DecayFit flat;
        flat.plateau = emin;
        flat.points = n - begin;
        return flat;
    }
    // Plateau search: coarse scan of R in [0, emin), then golden-section refinement.
    auto score = [&](double R) { return fit_log_line(t, E, begin, R, floor); };
    double bestR = 0.0;
    LineFit best = score(0.0);
    if (emin > 0.0) {
        constexpr int kScan = 200;
        for (int i = 1; i < kScan; ++i) {
            const double R = emin * (1.0 - std::pow(10.0, -8.0 * i / kScan));
            const LineFit f = score(R);
            if (f.n >= 3 && f.ssr < best.ssr) {
                best = f;
                bestR = R;
            }
        }
        const double Rp = projected_plateau(t, E, begin);
        if (Rp > 0.0 && Rp < emin) {
            const LineFit f = score(Rp);
            if (f.n >= 3 && f.ssr < best.ssr) {
                best = f;
                bestR = Rp;
            }
        }
        if (bestR > 0.0) {
            double lo = bestR * 0.9, hi = std::min(emin * (1.0 - 1e-12), bestR + (emin - bestR) * 0.9);
            const double g = (std::sqrt(5.0) - 1.0) / 2.0;
            for (int it = 0; it < 80; ++it) {
                const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
                if (score(a).ssr < score(b).ssr)
                    hi = b;
                else
                    lo = a;
            }
            const double R = 0.5 * (lo + hi);
            const LineFit f = score(R);
            if (f.n >= 3 && f.ssr < best.ssr) {
                best = f;
                bestR = R;
            }
        }
    }
    DecayFit out;
    out.omega = -best.slope;
    out.plateau = bestR;
    out.points = best.n;
    if (best.n < 3) {
        out.omega = 0.0;
        out.plateau = emin;
    }
    return out;
}

// ---------------------------------------------------------------------------

EnergyRecorder::EnergyRecorder(const Nonlinearity& nl, const SpectralField& h, RecorderConfig cfg)
    : nl_(&nl), h_(h), cfg_(cfg) {
    mon_.min_sandwich_margin = std::numeric_limits<double>::infinity();
}

Observer EnergyRecorder::observer() {
    Observer o;
    o.stride = 1;
    o.on_start = [this](const SystemState& z) { on_start(z); };
    o.on_step = [this](const SystemState& a, const SystemState& b, const StepInfo& info) { on_step(a, b, info); };
    return o;
}

EnergyReport EnergyRecorder::report(const SystemState& z, double residual) const {
    EnergyReport r;
    r.t = z.t;
    r.E = energy(z);
    r.L = lyapunov(z, *nl_, h_, cfg_.rho);
    const AuxFunctionals a = aux_functionals(z, cfg_.rho, cfg_.sigma, cfg_.weights);
    r.Psi = a.psi;
    r.Phi = a.phi;
    r.Lambda_sigma = a.lambda_s;
    r.norm_u_1s = sobolev_norm(z.u, 1.0 + cfg_.sigma);
    r.norm_v_1s = sobolev_norm(z.v, 1.0 + cfg_.sigma);
    r.norm_eta_Ms = std::sqrt(std::max(0.0, z.eta.norm_squared(cfg_.sigma)));
    r.diss_residual = residual;
    r.T_eta_eta = z.eta.t_dissipation();
    return r;
}

void EnergyRecorder::on_start(const SystemState& z) {
    const EnergyReport r = report(z, 0.0);
    rows_.push_back(r);
    last_L_ = r.L;
}

void EnergyRecorder::on_step(const SystemState& prev, const SystemState& next, const StepInfo& info) {
    const EnergyReport r = report(next, 0.0);
    const double dL = r.L - last_L_;
    EnergyReport row = r;
    {
        SpectralField vbar = prev.v + next.v;
        vbar *= 0.5;
        const double tee = HistoryState::average(prev.eta, next.eta).t_dissipation();
        row.diss_residual = std::abs(dL / info.dt + sobolev_norm_squared(vbar, 1.0) - tee);
    }
    mon_.max_lyapunov_increase = std::max(mon_.max_lyapunov_increase, dL / (1.0 + std::abs(last_L_)));
    mon_.max_residual = std::max(mon_.max_residual, row.diss_residual);
    const double eta2 = next.eta.norm_squared();
    if (eta2 > 0.0) mon_.max_psi_ratio = std::max(mon_.max_psi_ratio, r.Psi / (cfg_.theta * eta2));
    const double Es = energy_sigma(next, cfg_.sigma);
    if (Es > 0.0) {
        const double margin = std::min(r.Lambda_sigma - 0.5 * Es, 2.0 * Es - r.Lambda_sigma) / Es;
        mon_.min_sandwich_margin = std::min(mon_.min_sandwich_margin, margin);
    }
    mon_.max_t_dissipation = std::max(mon_.max_t_dissipation, r.T_eta_eta);
    ++mon_.steps;
    last_L_ = r.L;
    if (info.index % std::max<std::size_t>(1, cfg_.stride) == 0) rows_.push_back(row);
}

}  // namespace viscomem
