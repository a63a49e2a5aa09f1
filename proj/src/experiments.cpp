#include "viscomem/experiments.hpp"

#include "viscomem/diagnostics.hpp"
#include "viscomem/equilibria.hpp"
#include "viscomem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace viscomem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string json_number(double x) { return std::isfinite(x) ? format_double(x) : "null"; }

std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
        } else {
            out += c;
        }
    }
    return out + "\"";
}

std::string coefficients_json(const SpectralField& u) {
    std::string out = "[";
    for (std::size_t i = 0; i < u.size(); ++i) out += (i ? "," : "") + json_number(u[i]);
    return out + "]";
}

/// Everything a run needs, built once from the scenario.
struct Context {
    const Scenario& s;
    DomainPtr dom;
    MemoryKernel kernel;
    Nonlinearity nl;
    SpectralField h;
    StepConfig cfg;
    SystemState z0;
    ThetaCertificate theta;
    RecorderConfig rec;

    explicit Context(const Scenario& sc)
        : s(sc), dom(build_domain(sc)), kernel(build_kernel(sc.kernel)), nl(build_nonlinearity(sc.nonlinearity)),
          h(build_field(sc.forcing, dom, sc.seed + 3)), cfg(build_step(sc, *dom)) {
        if (sc.step.dt <= 0.0) cfg.dt = sc.horizon / std::ceil(sc.horizon / cfg.dt - 1e-9);
        try {
            (void)step_count(sc.horizon, cfg.dt);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("step.dt: ") + e.what());
        }
        z0 = build_initial_state(sc, dom, kernel, cfg.dt);
        if (kernel.is_zero()) {
            theta.certified = true;
            theta.theta = 1.0;
        } else {
            theta = certify_theta(kernel);
        }
        rec.rho = sc.rho;
        rec.sigma = sc.diagnostics.sigma.value_or(default_sigma(sc.rho));
        rec.theta = theta.certified ? theta.theta : 1.0;
        rec.weights = default_lambda_weights(rec.theta, nl.nu());
        if (sc.diagnostics.eps) rec.weights.eps = *sc.diagnostics.eps;
        if (sc.diagnostics.delta) rec.weights.delta = *sc.diagnostics.delta;
        rec.stride = sc.observers.energy_stride;
    }
};

void add_check(RunSummary& r, std::string name, bool passed, double value, double bound) {
    r.checks.push_back({std::move(name), passed, value, bound});
}

void add_metric(RunSummary& r, std::string name, double value) { r.metrics.emplace_back(std::move(name), value); }

std::string energy_csv(const std::vector<EnergyReport>& rows) {
    std::ostringstream os;
    write_energy_csv(os, rows);
    return os.str();
}

std::string snapshot_json(const SystemState& z) {
    std::string out = "{\n  \"t\": " + json_number(z.t) + ",\n  \"u\": " + coefficients_json(z.u) +
                      ",\n  \"v\": " + coefficients_json(z.v) + ",\n  \"eta\": [";
    const auto& comps = z.eta.components();
    for (std::size_t i = 0; i < comps.size(); ++i) out += std::string(i ? "," : "") + "\n    " + coefficients_json(comps[i]);
    return out + (comps.empty() ? "]" : "\n  ]") + "\n}\n";
}

/// Runs the trajectory with an energy recorder and adds the monitored inequalities.
struct MonitoredRun {
    EvolveResult result;
    std::vector<EnergyReport> rows;
    MonitorSummary monitors;
};

MonitoredRun monitored_run(const Context& c, RunSummary& r) {
    EnergyRecorder recorder(c.nl, c.h, c.rec);
    MonitoredRun run;
    run.result = evolve(c.z0, c.s.horizon, c.cfg, c.nl, c.h, {recorder.observer()});
    run.rows = recorder.rows();
    run.monitors = recorder.monitors();
    const auto& m = run.monitors;
    const double E0 = energy(c.z0);
    add_metric(r, "dt", c.cfg.dt);
    add_metric(r, "steps", static_cast<double>(run.result.steps));
    add_metric(r, "max_fixed_point_iterations", run.result.max_iterations);
    add_metric(r, "E0", E0);
    add_metric(r, "E_T", energy(run.result.final_state));
    add_metric(r, "theta", c.theta.theta);
    add_metric(r, "max_dissipation_residual", m.max_residual);
    add_check(r, "kernel_certified", c.theta.certified, c.theta.theta, kNaN);
    add_check(r, "lyapunov_monotone", m.max_lyapunov_increase <= 1e-8, m.max_lyapunov_increase, 1e-8);
    add_check(r, "psi_bound", c.theta.certified && m.max_psi_ratio <= 1.0 + 1e-9, m.max_psi_ratio, 1.0);
    const double margin = m.steps ? m.min_sandwich_margin : 0.0;
    add_check(r, "lambda_sandwich", margin >= -1e-12, margin, 0.0);
    const double t_tol = 1e-12 * std::max(1.0, E0);
    add_check(r, "transport_sign", m.max_t_dissipation <= t_tol, m.max_t_dissipation, t_tol);
    const auto& dg = c.s.diagnostics;
    const GrowthReport growth = verify_growth(c.nl, dg.growth_range, dg.samples);
    add_check(r, "growth_condition", growth.ok, growth.constant, kNaN);
    const DissipationReport diss = verify_dissipation(c.nl, c.dom->lambda1(), dg.growth_range, dg.samples);
    add_check(r, "dissipation_conditions", diss.ok(), std::min(diss.margin1, diss.margin2), 0.0);
    return run;
}

std::vector<double> column_t(const std::vector<EnergyReport>& rows) {
    std::vector<double> t;
    for (const auto& x : rows) t.push_back(x.t);
    return t;
}

std::vector<double> column_E(const std::vector<EnergyReport>& rows) {
    std::vector<double> e;
    for (const auto& x : rows) e.push_back(x.E);
    return e;
}

void finish_trajectory(const Context& c, const MonitoredRun& run, RunResult& out) {
    out.artifacts.emplace_back("energy.csv", energy_csv(run.rows));
    if (c.s.observers.snapshot) out.artifacts.emplace_back("final_state.json", snapshot_json(run.result.final_state));
}

void run_evolve(const Context& c, RunResult& out) {
    const MonitoredRun run = monitored_run(c, out.summary);
    finish_trajectory(c, run, out);
}

void run_decay(const Context& c, RunResult& out) {
    auto& r = out.summary;
    const MonitoredRun run = monitored_run(c, r);
    const DecayFit fit =
        fit_decay(column_t(run.rows), column_E(run.rows), c.s.diagnostics.fit_window, c.s.diagnostics.fit_floor);
    add_metric(r, "omega_fit", fit.omega);
    add_metric(r, "R_inf", fit.plateau);
    add_metric(r, "R0", absorbing_radius(c.nl, c.h));
    add_check(r, "decay_rate_positive", fit.omega > 0.0, fit.omega, 0.0);
    if (c.nl.m_f() == 0.0 && sobolev_norm(c.h, -1.0) == 0.0)
        add_check(r, "plateau_vanishes", fit.plateau <= 1e-6, fit.plateau, 1e-6);
    finish_trajectory(c, run, out);
}

void run_absorbing(const Context& c, RunResult& out) {
    auto& r = out.summary;
    const MonitoredRun run = monitored_run(c, r);
    const double R0 = absorbing_radius(c.nl, c.h);
    const auto t = column_t(run.rows);
    const auto E = column_E(run.rows);
    const std::size_t begin =
        t.size() - static_cast<std::size_t>(std::ceil(c.s.diagnostics.fit_window * static_cast<double>(t.size())));
    const double tail = *std::max_element(E.begin() + static_cast<std::ptrdiff_t>(begin), E.end());
    add_metric(r, "R0", R0);
    add_metric(r, "tail_limsup_E", tail);
    if (t.size() >= 3) {
        const DecayFit fit = fit_decay(t, E, c.s.diagnostics.fit_window, c.s.diagnostics.fit_floor);
        add_metric(r, "omega_fit", fit.omega);
        add_metric(r, "R_inf", fit.plateau);
    }
    add_check(r, "absorbing_plateau", tail <= 1.1 * R0, tail, 1.1 * R0);
    finish_trajectory(c, run, out);
}

double sum_identity_residual(const SystemState& full, const SystemState& a, const SystemState& b) {
    double res = std::max(sobolev_norm(full.u - a.u - b.u, 1.0), sobolev_norm(full.v - a.v - b.v, 1.0));
    const auto& cf = full.eta.components();
    const auto& ca = a.eta.components();
    const auto& cb = b.eta.components();
    for (std::size_t i = 0; i < cf.size(); ++i) res = std::max(res, sobolev_norm(cf[i] - ca[i] - cb[i], 1.0));
    return res;
}

void run_splitting(const Context& c, RunResult& out) {
    auto& r = out.summary;
    if (!(c.s.rho < 4.0)) throw ConfigError("rho: the splitting experiment needs rho < 4");
    std::optional<Decomposition> dec;
    try {
        dec.emplace(c.nl, c.dom->lambda1(), c.s.nonlinearity.beta);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("nonlinearity: ") + e.what());
    }
    const double sigma = c.rec.sigma;
    const Nonlinearity& nl = c.nl;
    const SpectralField& h = c.h;

    SystemState full = c.z0, vhat = c.z0;
    SystemState what = make_state(SpectralField(c.dom), SpectralField(c.dom),
                                  build_zero_history(c.s, c.dom, c.kernel, c.cfg.dt));
    const Load load_full = [&](const SpectralField& um) {
        SpectralField rhs = h;
        if (!nl.is_zero()) rhs -= nl.apply(um);
        return rhs;
    };
    const Load load_vhat = [&](const SpectralField& um) { return -1.0 * dec->apply_f0(um); };

    std::ostringstream csv;
    csv << "t,E_full,E_vhat,E_what_sigma,sum_residual\n";
    auto row = [&](const SystemState& f, const SystemState& a, const SystemState& b, double res) {
        csv << format_double(f.t) << ',' << format_double(energy(f)) << ',' << format_double(energy(a)) << ','
            << format_double(energy_sigma(b, sigma)) << ',' << format_double(res) << '\n';
    };
    row(full, vhat, what, 0.0);

    std::vector<double> ts{0.0}, ev{energy(vhat)};
    double max_res = 0.0, max_what = energy_sigma(what, sigma);
    bool finite = true;
    const std::size_t n = step_count(c.s.horizon, c.cfg.dt);
    const std::size_t stride = std::max<std::size_t>(1, c.s.observers.energy_stride);
    for (std::size_t i = 1; i <= n; ++i) {
        const StepOutcome of = step_general(full, c.cfg, load_full, true);
        const StepOutcome ov = step_general(vhat, c.cfg, load_vhat, true);
        SpectralField g = h - dec->apply_f0(of.u_mid) + dec->apply_f0(ov.u_mid) - dec->apply_f1(of.u_mid);
        g -= of.inertia - ov.inertia;
        const StepOutcome ow = step_general(what, c.cfg, [&g](const SpectralField&) { return g; }, false);
        full = of.state;
        vhat = ov.state;
        what = ow.state;
        const double res = sum_identity_residual(full, vhat, what);
        const double Ew = energy_sigma(what, sigma);
        max_res = std::max(max_res, res);
        finite = finite && std::isfinite(Ew);
        max_what = std::max(max_what, Ew);
        ts.push_back(full.t);
        ev.push_back(energy(vhat));
        if (i % stride == 0 || i == n) row(full, vhat, what, res);
    }

    add_metric(r, "dt", c.cfg.dt);
    add_metric(r, "k", dec->k());
    add_metric(r, "beta", dec->beta());
    add_metric(r, "sigma", sigma);
    add_metric(r, "E_vhat_0", ev.front());
    add_metric(r, "E_vhat_T", ev.back());
    add_metric(r, "max_E_what_sigma", max_what);
    add_check(r, "sum_identity", max_res < 1e-8, max_res, 1e-8);
    if (ev.front() > 0.0) {
        const DecayFit fit = fit_decay(ts, ev, c.s.diagnostics.fit_window, c.s.diagnostics.fit_floor);
        add_metric(r, "omega_vhat", fit.omega);
        add_check(r, "vhat_decay", fit.omega > 0.0, fit.omega, 0.0);
    }
    add_check(r, "what_energy_finite", finite, max_what, kNaN);
    out.artifacts.emplace_back("splitting.csv", csv.str());
}

void run_equilibria(const Context& c, RunResult& out) {
    auto& r = out.summary;
    const auto& es = c.s.equilibria;
    std::vector<SpectralField> seeds;
    for (std::size_t i = 0; i < es.seeds.size(); ++i) seeds.push_back(build_field(es.seeds[i], c.dom, c.s.seed + 10 + i));
    MultiStartOptions opts;
    opts.newton.tol = es.tol;
    opts.random_starts = es.random_starts;
    opts.random_amplitude = es.amplitude;
    opts.seed = c.s.seed;
    const auto S = find_equilibria(seeds, c.nl, c.h, opts);
    const HistoryState zero = build_zero_history(c.s, c.dom, c.kernel, c.cfg.dt);

    std::string js = "[";
    bool all_stationary = true;
    double worst_drift = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) {
        const auto rep = stationarity_check(S[i], zero, c.cfg, c.nl, c.h, es.tol, es.stationarity_steps);
        all_stationary = all_stationary && rep.ok;
        worst_drift = std::max(worst_drift, rep.drift);
        js += std::string(i ? "," : "") + "\n  {\"basin_tag\": " + json_string(S[i].basin_tag) +
              ", \"residual\": " + json_number(S[i].residual) + ", \"iterations\": " + std::to_string(S[i].iterations) +
              ", \"norm_1\": " + json_number(sobolev_norm(S[i].u_star, 1.0)) +
              ", \"stationarity\": {\"drift\": " + json_number(rep.drift) +
              ", \"lyapunov_change\": " + json_number(rep.lyapunov_change) + ", \"ok\": " + (rep.ok ? "true" : "false") +
              "},\n   \"coefficients\": " + coefficients_json(S[i].u_star) + "}";
    }
    js += S.empty() ? "]\n" : "\n]\n";
    out.artifacts.emplace_back("equilibria.json", js);
    add_metric(r, "equilibria_found", static_cast<double>(S.size()));
    add_check(r, "equilibria_found", !S.empty(), static_cast<double>(S.size()), 1.0);
    add_check(r, "stationarity", all_stationary && !S.empty(), worst_drift, 100.0 * es.tol);
    if (S.empty()) return;

    // Trajectory from the configured initial data, tracking the distance to S.
    std::vector<double> ts, dist;
    std::ostringstream csv;
    csv << "t,distance_to_S,norm_v_eta\n";
    Observer obs;
    auto record = [&](const SystemState& z) {
        const double d = distance_to_S(z, S);
        const double ve = sobolev_norm(z.v, 1.0) + std::sqrt(std::max(0.0, z.eta.norm_squared()));
        ts.push_back(z.t);
        dist.push_back(d);
        csv << format_double(z.t) << ',' << format_double(d) << ',' << format_double(ve) << '\n';
    };
    obs.stride = c.s.observers.energy_stride;
    obs.on_start = record;
    obs.on_step = [&](const SystemState&, const SystemState& z, const StepInfo&) { record(z); };
    const EvolveResult res = evolve(c.z0, c.s.horizon, c.cfg, c.nl, c.h, {obs});
    const SystemState& zT = res.final_state;
    const double ve = sobolev_norm(zT.v, 1.0) + std::sqrt(std::max(0.0, zT.eta.norm_squared()));
    double worst_rise = 0.0;
    for (std::size_t i = dist.size() / 2 + 1; i < dist.size(); ++i)
        worst_rise = std::max(worst_rise, dist[i] - dist[i - 1]);
    add_metric(r, "final_distance_to_S", dist.back());
    add_check(r, "velocity_history_vanish", ve < 1e-3, ve, 1e-3);
    add_check(r, "distance_monotone_tail", worst_rise <= 1e-6, worst_rise, 1e-6);
    out.artifacts.emplace_back("distance.csv", csv.str());
}

void run_certify(const Context& c, RunResult& out) {
    auto& r = out.summary;
    if (c.kernel.is_zero()) throw ConfigError("kernel: certification needs a nonzero kernel");
    CertifyOptions opts;
    opts.samples = c.s.certify.samples;
    opts.pair_samples = c.s.certify.pair_samples;
    const EquivalenceReport eq = cross_check_equivalence(c.kernel, opts);
    add_metric(r, "kappa", total_mass(c.kernel));
    add_metric(r, "theta", eq.theta.theta);
    add_metric(r, "theta_witness", eq.theta.witness);
    add_metric(r, "theta_certified", eq.theta.certified ? 1.0 : 0.0);
    add_metric(r, "nece_certified", eq.best ? 1.0 : 0.0);
    if (eq.best) {
        add_metric(r, "nece_delta", eq.best->delta);
        add_metric(r, "nece_constant", eq.best->constant);
    } else if (!eq.scan.empty()) {
        add_metric(r, "nece_witness_sigma", eq.scan.back().witness_sigma);
        add_metric(r, "nece_witness_s", eq.scan.back().witness_s);
    }
    std::ostringstream csv;
    csv << "delta,certified,constant,witness_sigma,witness_s\n";
    auto line = [&](const NeceCertificate& n) {
        csv << format_double(n.delta) << ',' << (n.certified ? 1 : 0) << ',' << format_double(n.constant) << ','
            << format_double(n.witness_sigma) << ',' << format_double(n.witness_s) << '\n';
    };
    for (const auto& n : eq.scan) line(n);
    for (double d : c.s.certify.deltas) line(certify_nece(c.kernel, d, opts));
    add_check(r, "equivalence_agree", eq.agree, eq.theta.certified ? 1.0 : 0.0, eq.best ? 1.0 : 0.0);
    out.artifacts.emplace_back("nece_scan.csv", csv.str());
}

}  // namespace

bool RunSummary::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

double RunSummary::metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
        if (k == name) return v;
    return kNaN;
}

const Check* RunSummary::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string summary_json(const RunSummary& s) {
    std::string out = "{\n  \"scenario\": " + json_string(s.scenario) + ",\n  \"experiment\": " +
                      json_string(s.experiment) + ",\n  \"seed\": " + std::to_string(s.seed) + ",\n  \"metrics\": {";
    for (std::size_t i = 0; i < s.metrics.size(); ++i)
        out += std::string(i ? "," : "") + "\n    " + json_string(s.metrics[i].first) + ": " +
               json_number(s.metrics[i].second);
    out += s.metrics.empty() ? "},\n" : "\n  },\n";
    out += "  \"checks\": {";
    for (std::size_t i = 0; i < s.checks.size(); ++i) {
        const auto& c = s.checks[i];
        out += std::string(i ? "," : "") + "\n    " + json_string(c.name) + ": {\"passed\": " +
               (c.passed ? "true" : "false") + ", \"value\": " + json_number(c.value) +
               ", \"bound\": " + json_number(c.bound) + "}";
    }
    out += s.checks.empty() ? "},\n" : "\n  },\n";
    out += std::string("  \"passed\": ") + (s.passed() ? "true" : "false") + "\n}\n";
    return out;
}

RunResult run_experiment(const Scenario& s) {
    RunResult out;
    out.summary.scenario = s.name;
    out.summary.experiment = experiment_name(s.experiment);
    out.summary.seed = s.seed;
    const Context c(s);
    switch (s.experiment) {
        case Experiment::Evolve: run_evolve(c, out); break;
        case Experiment::DecayStudy: run_decay(c, out); break;
        case Experiment::AbsorbingStudy: run_absorbing(c, out); break;
        case Experiment::Splitting: run_splitting(c, out); break;
        case Experiment::Equilibria: run_equilibria(c, out); break;
        case Experiment::KernelCertify: run_certify(c, out); break;
    }
    out.artifacts.insert(out.artifacts.begin(), {"summary.json", summary_json(out.summary)});
    return out;
}

void write_artifacts(const RunResult& result, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
    for (const auto& [name, text] : result.artifacts) {
        const auto path = std::filesystem::path(dir) / name;
        std::ofstream os(path, std::ios::binary);
        os << text;
        if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    }
}

int run_scenario_file(const std::string& path, const RunOptions& opts, std::ostream& log) {
    try {
        Scenario s = load_scenario(path);
        if (opts.seed) s.seed = *opts.seed;
        if (opts.experiment) s.experiment = *opts.experiment;
        const RunResult res = run_experiment(s);
        const std::string dir = (std::filesystem::path(opts.out_dir) / s.name).string();
        write_artifacts(res, dir);
        const bool ok = res.summary.passed();
        std::string failed;
        for (const auto& c : res.summary.checks)
            if (!c.passed) failed += (failed.empty() ? "" : ",") + c.name;
        log << s.name << ": " << res.summary.experiment << " -> " << dir << (ok ? " [all checks passed]" : " [failed: " + failed + "]")
            << '\n';
        return (opts.strict && !ok) ? kExitCheck : kExitOk;
    } catch (const ConfigError& e) {
        log << path << ": configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        log << path << ": solver failure: " << e.what() << '\n';
        return kExitSolver;
    }
}

}  // namespace viscomem
