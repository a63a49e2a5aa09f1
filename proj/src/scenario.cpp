#include "viscomem/scenario.hpp"

#include "viscomem/errors.hpp"
#include "viscomem/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace viscomem {

using nlohmann::json;

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
    static const std::vector<std::pair<Experiment, std::string>> names{
        {Experiment::Evolve, "evolve"},           {Experiment::DecayStudy, "decay_study"},
        {Experiment::AbsorbingStudy, "absorbing_study"}, {Experiment::Splitting, "splitting"},
        {Experiment::Equilibria, "equilibria"},   {Experiment::KernelCertify, "kernel_certify"}};
    return names;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError((path.empty() ? std::string("config") : path) + ": " + what);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (!ok.count(k)) fail(path, "unknown key '" + k + "'");
    }
}

std::string sub(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& j, const std::string& path, const char* key, double def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number()) fail(sub(path, key), "expected a number");
    return v.get<double>();
}

std::optional<double> get_optional(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return get_number(j, path, key, 0.0);
}

long long get_integer(const json& j, const std::string& path, const char* key, long long def, long long lo) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) fail(sub(path, key), "expected an integer");
    const long long x = v.get<long long>();
    if (x < lo) fail(sub(path, key), "must be at least " + std::to_string(lo));
    return x;
}

bool get_bool(const json& j, const std::string& path, const char* key, bool def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_boolean()) fail(sub(path, key), "expected true or false");
    return j.at(key).get<bool>();
}

std::string get_string(const json& j, const std::string& path, const char* key, const std::string& def,
                       std::initializer_list<const char*> choices) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_string()) fail(sub(path, key), "expected a string");
    const std::string s = v.get<std::string>();
    if (choices.size() && std::none_of(choices.begin(), choices.end(), [&](const char* c) { return s == c; })) {
        std::string msg = "unknown value '" + s + "'; expected one of";
        for (const char* c : choices) msg += std::string(" ") + c;
        fail(sub(path, key), msg);
    }
    return s;
}

std::vector<double> get_numbers(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) return {};
    const auto& v = j.at(key);
    if (!v.is_array()) fail(sub(path, key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) fail(sub(path, key), "expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

FieldSpec parse_field(const json& j, const std::string& path) {
    FieldSpec f;
    if (j.is_null()) return f;
    check_keys(j, path, {"type", "coefficients", "index", "amplitude", "decay"});
    f.type = get_string(j, path, "type", f.type, {"zero", "modes", "eigenfunction", "random", "constant"});
    f.coefficients = get_numbers(j, path, "coefficients");
    if (j.contains("index")) {
        f.index.clear();
        for (double x : get_numbers(j, path, "index")) {
            if (x < 1 || x != std::floor(x)) fail(sub(path, "index"), "entries must be positive integers");
            f.index.push_back(static_cast<int>(x));
        }
    }
    f.amplitude = get_number(j, path, "amplitude", f.amplitude);
    f.decay = get_number(j, path, "decay", f.decay);
    return f;
}

json field_json(const FieldSpec& f) {
    return json{{"type", f.type},
                {"coefficients", f.coefficients},
                {"index", f.index},
                {"amplitude", f.amplitude},
                {"decay", f.decay}};
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

std::string experiment_name(Experiment e) {
    for (const auto& [k, n] : experiment_names())
        if (k == e) return n;
    return "evolve";
}

bool Scenario::operator==(const Scenario& o) const {
    return name == o.name && experiment == o.experiment && seed == o.seed &&
           domain.dimension == o.domain.dimension && domain.lengths == o.domain.lengths &&
           domain.modes == o.domain.modes && domain.padding == o.domain.padding && kernel == o.kernel &&
           history == o.history && nonlinearity == o.nonlinearity && rho == o.rho && forcing == o.forcing &&
           initial == o.initial && horizon == o.horizon && step == o.step && observers == o.observers &&
           diagnostics == o.diagnostics && equilibria == o.equilibria && certify == o.certify;
}

Scenario parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    check_keys(root, "", {"name", "experiment", "seed", "domain", "kernel", "history", "nonlinearity", "rho",
                          "forcing", "initial", "horizon", "step", "observers", "diagnostics", "equilibria",
                          "certify"});
    Scenario s;
    s.name = get_string(root, "", "name", s.name, {});
    const std::string ex = get_string(root, "", "experiment", "evolve",
                                      {"evolve", "decay_study", "absorbing_study", "splitting", "equilibria",
                                       "kernel_certify"});
    for (const auto& [k, n] : experiment_names())
        if (n == ex) s.experiment = k;
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
        s.seed = root["seed"].get<std::uint64_t>();
    }

    if (root.contains("domain")) {
        const auto& d = root["domain"];
        check_keys(d, "domain", {"dimension", "lengths", "modes", "padding"});
        s.domain.dimension = static_cast<int>(get_integer(d, "domain", "dimension", 1, 1));
        if (s.domain.dimension > 3) fail("domain.dimension", "must be 1, 2 or 3");
        const auto L = get_numbers(d, "domain", "lengths");
        const auto N = get_numbers(d, "domain", "modes");
        if (!L.empty() && static_cast<int>(L.size()) != s.domain.dimension)
            fail("domain.lengths", "needs one entry per axis");
        if (!N.empty() && static_cast<int>(N.size()) != s.domain.dimension)
            fail("domain.modes", "needs one entry per axis");
        for (int i = 0; i < s.domain.dimension; ++i) {
            if (!L.empty()) s.domain.lengths[i] = L[i];
            if (!N.empty()) {
                if (N[i] != std::floor(N[i])) fail("domain.modes", "entries must be integers");
                s.domain.modes[i] = static_cast<int>(N[i]);
            }
        }
        s.domain.padding = static_cast<int>(get_integer(d, "domain", "padding", 2, 1));
    }
    try {
        s.domain.validate();
    } catch (const std::invalid_argument& e) {
        fail("domain", e.what());
    }

    if (root.contains("kernel")) {
        const auto& k = root["kernel"];
        const std::string p = "kernel";
        check_keys(k, p, {"type", "weight", "rate", "terms", "breakpoints", "values", "tail_ratio", "nodes",
                          "origin_exponent", "tail", "tail_parameter"});
        auto& ks = s.kernel;
        ks.type = get_string(k, p, "type", ks.type, {"none", "exponential", "prony", "piecewise", "tabulated"});
        ks.weight = get_number(k, p, "weight", ks.weight);
        ks.rate = get_number(k, p, "rate", ks.rate);
        if (k.contains("terms")) {
            if (!k["terms"].is_array()) fail("kernel.terms", "expected [[weight, rate], ...]");
            for (const auto& t : k["terms"]) {
                if (!t.is_array() || t.size() != 2 || !t[0].is_number() || !t[1].is_number())
                    fail("kernel.terms", "expected [[weight, rate], ...]");
                ks.terms.push_back({t[0].get<double>(), t[1].get<double>()});
            }
        }
        ks.breakpoints = get_numbers(k, p, "breakpoints");
        ks.values = get_numbers(k, p, "values");
        ks.tail_ratio = get_number(k, p, "tail_ratio", ks.tail_ratio);
        ks.nodes = get_numbers(k, p, "nodes");
        ks.origin_exponent = get_number(k, p, "origin_exponent", ks.origin_exponent);
        ks.tail = get_string(k, p, "tail", ks.tail, {"exponential", "power"});
        ks.tail_parameter = get_number(k, p, "tail_parameter", ks.tail_parameter);
    }
    try {
        (void)build_kernel(s.kernel);
    } catch (const std::invalid_argument& e) {
        fail("kernel", e.what());
    }

    if (root.contains("history")) {
        const auto& h = root["history"];
        check_keys(h, "history", {"discretization", "h0", "growth", "rel_tail"});
        s.history.discretization =
            get_string(h, "history", "discretization", s.history.discretization, {"auto", "exp_modes", "sgrid"});
        s.history.h0 = get_number(h, "history", "h0", s.history.h0);
        s.history.growth = get_number(h, "history", "growth", s.history.growth);
        s.history.rel_tail = get_number(h, "history", "rel_tail", s.history.rel_tail);
        if (s.history.h0 < 0 || s.history.growth < 0 || !(s.history.rel_tail > 0 && s.history.rel_tail < 1))
            fail("history", "h0 and growth must be nonnegative and rel_tail in (0,1)");
    }
    if (s.history.discretization == "exp_modes" && s.kernel.type != "exponential" && s.kernel.type != "prony" &&
        s.kernel.type != "none")
        fail("history.discretization", "exponential modes need a Prony kernel");

    if (root.contains("nonlinearity")) {
        const auto& n = root["nonlinearity"];
        const std::string p = "nonlinearity";
        check_keys(n, p, {"type", "coefficients", "nu", "m_f", "beta"});
        auto& ns = s.nonlinearity;
        ns.type = get_string(n, p, "type", ns.type, {"zero", "cubic", "quintic", "double_well", "polynomial"});
        ns.coefficients = get_numbers(n, p, "coefficients");
        ns.nu = get_number(n, p, "nu", ns.nu);
        ns.m_f = get_number(n, p, "m_f", ns.m_f);
        ns.beta = get_number(n, p, "beta", ns.beta);
    }
    try {
        (void)build_nonlinearity(s.nonlinearity);
    } catch (const std::invalid_argument& e) {
        fail("nonlinearity", e.what());
    }

    s.rho = get_number(root, "", "rho", s.rho);
    if (!(s.rho >= 0.0 && s.rho <= 4.0)) fail("rho", "must lie in [0,4]");
    s.forcing = parse_field(root.value("forcing", json(nullptr)), "forcing");

    if (root.contains("initial")) {
        const auto& in = root["initial"];
        check_keys(in, "initial", {"u0", "v0", "eta0"});
        s.initial.u0 = parse_field(in.value("u0", json(nullptr)), "initial.u0");
        s.initial.v0 = parse_field(in.value("v0", json(nullptr)), "initial.v0");
        if (in.contains("eta0")) {
            const auto& e = in["eta0"];
            const std::string p = "initial.eta0";
            check_keys(e, p, {"type", "tau", "profile", "field"});
            auto& es = s.initial.eta0;
            es.type = get_string(e, p, "type", es.type, {"zero", "volterra", "rep", "explicit"});
            es.tau = get_number(e, p, "tau", es.tau);
            if (!(es.tau > 0)) fail(sub(p, "tau"), "must be positive");
            es.profile = get_string(e, p, "profile", es.profile, {"constant", "ramp", "saturating"});
            es.field = parse_field(e.value("field", json(nullptr)), sub(p, "field"));
        }
    }

    s.horizon = get_number(root, "", "horizon", s.horizon);
    if (!(s.horizon > 0.0)) fail("horizon", "must be positive");

    if (root.contains("step")) {
        const auto& st = root["step"];
        check_keys(st, "step", {"dt", "tol", "max_iter", "scheme"});
        s.step.dt = get_number(st, "step", "dt", s.step.dt);
        s.step.tol = get_number(st, "step", "tol", s.step.tol);
        s.step.max_iter = static_cast<int>(get_integer(st, "step", "max_iter", s.step.max_iter, 1));
        s.step.scheme =
            get_string(st, "step", "scheme", s.step.scheme, {"implicit_midpoint", "semi_implicit_theta"});
        if (s.step.dt < 0 || !(s.step.tol > 0)) fail("step", "dt must be nonnegative and tol positive");
    }

    if (root.contains("observers")) {
        const auto& o = root["observers"];
        check_keys(o, "observers", {"energy_stride", "snapshot"});
        s.observers.energy_stride = static_cast<std::size_t>(get_integer(o, "observers", "energy_stride", 1, 1));
        s.observers.snapshot = get_bool(o, "observers", "snapshot", false);
    }

    if (root.contains("diagnostics")) {
        const auto& d = root["diagnostics"];
        const std::string p = "diagnostics";
        check_keys(d, p, {"sigma", "eps", "delta", "fit_window", "fit_floor", "growth_range", "samples"});
        auto& ds = s.diagnostics;
        ds.sigma = get_optional(d, p, "sigma");
        ds.eps = get_optional(d, p, "eps");
        ds.delta = get_optional(d, p, "delta");
        ds.fit_window = get_number(d, p, "fit_window", ds.fit_window);
        ds.fit_floor = get_number(d, p, "fit_floor", ds.fit_floor);
        ds.growth_range = get_number(d, p, "growth_range", ds.growth_range);
        ds.samples = static_cast<std::size_t>(get_integer(d, p, "samples", static_cast<long long>(ds.samples), 2));
        if (!(ds.fit_window > 0 && ds.fit_window <= 1)) fail("diagnostics.fit_window", "must lie in (0,1]");
    }

    if (root.contains("equilibria")) {
        const auto& e = root["equilibria"];
        const std::string p = "equilibria";
        check_keys(e, p, {"seeds", "random_starts", "amplitude", "tol", "stationarity_steps"});
        auto& es = s.equilibria;
        if (e.contains("seeds")) {
            if (!e["seeds"].is_array()) fail("equilibria.seeds", "expected an array of field specs");
            for (std::size_t i = 0; i < e["seeds"].size(); ++i)
                es.seeds.push_back(parse_field(e["seeds"][i], "equilibria.seeds[" + std::to_string(i) + "]"));
        }
        es.random_starts = static_cast<std::size_t>(get_integer(e, p, "random_starts", 8, 0));
        es.amplitude = get_number(e, p, "amplitude", es.amplitude);
        es.tol = get_number(e, p, "tol", es.tol);
        es.stationarity_steps = static_cast<std::size_t>(get_integer(e, p, "stationarity_steps", 100, 1));
        if (!(es.tol > 0)) fail("equilibria.tol", "must be positive");
    }

    if (root.contains("certify")) {
        const auto& c = root["certify"];
        check_keys(c, "certify", {"samples", "pair_samples", "deltas"});
        s.certify.samples = static_cast<std::size_t>(get_integer(c, "certify", "samples", 10000, 16));
        s.certify.pair_samples = static_cast<std::size_t>(get_integer(c, "certify", "pair_samples", 400, 16));
        s.certify.deltas = get_numbers(c, "certify", "deltas");
    }

    // Field specs are validated by building them once.
    try {
        const auto dom = build_domain(s);
        (void)build_field(s.forcing, dom, s.seed);
        (void)build_field(s.initial.u0, dom, s.seed);
        (void)build_field(s.initial.v0, dom, s.seed);
        (void)build_field(s.initial.eta0.field, dom, s.seed);
        for (const auto& f : s.equilibria.seeds) (void)build_field(f, dom, s.seed);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["experiment"] = experiment_name(s.experiment);
    j["seed"] = s.seed;
    std::vector<double> L;
    std::vector<int> N;
    for (int i = 0; i < s.domain.dimension; ++i) {
        L.push_back(s.domain.lengths[i]);
        N.push_back(s.domain.modes[i]);
    }
    j["domain"] = {{"dimension", s.domain.dimension}, {"lengths", L}, {"modes", N}, {"padding", s.domain.padding}};
    const auto& k = s.kernel;
    j["kernel"] = {{"type", k.type},
                   {"weight", k.weight},
                   {"rate", k.rate},
                   {"terms", k.terms},
                   {"breakpoints", k.breakpoints},
                   {"values", k.values},
                   {"tail_ratio", k.tail_ratio},
                   {"nodes", k.nodes},
                   {"origin_exponent", k.origin_exponent},
                   {"tail", k.tail},
                   {"tail_parameter", k.tail_parameter}};
    j["history"] = {{"discretization", s.history.discretization},
                    {"h0", s.history.h0},
                    {"growth", s.history.growth},
                    {"rel_tail", s.history.rel_tail}};
    const auto& n = s.nonlinearity;
    j["nonlinearity"] = {
        {"type", n.type}, {"coefficients", n.coefficients}, {"nu", n.nu}, {"m_f", n.m_f}, {"beta", n.beta}};
    j["rho"] = s.rho;
    j["forcing"] = field_json(s.forcing);
    const auto& e = s.initial.eta0;
    j["initial"] = {{"u0", field_json(s.initial.u0)},
                    {"v0", field_json(s.initial.v0)},
                    {"eta0",
                     {{"type", e.type}, {"tau", e.tau}, {"profile", e.profile}, {"field", field_json(e.field)}}}};
    j["horizon"] = s.horizon;
    j["step"] = {{"dt", s.step.dt}, {"tol", s.step.tol}, {"max_iter", s.step.max_iter}, {"scheme", s.step.scheme}};
    j["observers"] = {{"energy_stride", s.observers.energy_stride}, {"snapshot", s.observers.snapshot}};
    const auto& d = s.diagnostics;
    j["diagnostics"] = {{"sigma", optional_json(d.sigma)},   {"eps", optional_json(d.eps)},
                        {"delta", optional_json(d.delta)},   {"fit_window", d.fit_window},
                        {"fit_floor", d.fit_floor},          {"growth_range", d.growth_range},
                        {"samples", d.samples}};
    json seeds = json::array();
    for (const auto& f : s.equilibria.seeds) seeds.push_back(field_json(f));
    j["equilibria"] = {{"seeds", seeds},
                       {"random_starts", s.equilibria.random_starts},
                       {"amplitude", s.equilibria.amplitude},
                       {"tol", s.equilibria.tol},
                       {"stationarity_steps", s.equilibria.stationarity_steps}};
    j["certify"] = {{"samples", s.certify.samples},
                    {"pair_samples", s.certify.pair_samples},
                    {"deltas", s.certify.deltas}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

DomainPtr build_domain(const Scenario& s) { return Domain::create(s.domain); }

MemoryKernel build_kernel(const KernelSpec& k) {
    if (k.type == "none") return MemoryKernel::none();
    if (k.type == "exponential") return MemoryKernel::exponential(k.weight, k.rate);
    if (k.type == "prony") {
        std::vector<PronyTerm> terms;
        for (const auto& t : k.terms) {
            if (t.size() != 2) throw std::invalid_argument("Prony terms are [weight, rate] pairs");
            terms.push_back({t[0], t[1]});
        }
        if (terms.empty()) throw std::invalid_argument("a Prony kernel needs at least one term");
        return MemoryKernel::prony(std::move(terms));
    }
    if (k.type == "piecewise") return MemoryKernel::piecewise_constant(k.breakpoints, k.values, k.tail_ratio);
    if (k.type == "tabulated") {
        TabulatedMonotone t;
        t.nodes = k.nodes;
        t.values = k.values;
        t.origin_exponent = k.origin_exponent;
        t.tail = k.tail == "power" ? TabulatedMonotone::Tail::Power : TabulatedMonotone::Tail::Exponential;
        t.tail_parameter = k.tail_parameter;
        return MemoryKernel::tabulated(std::move(t));
    }
    throw std::invalid_argument("unknown kernel type '" + k.type + "'");
}

Nonlinearity build_nonlinearity(const NonlinearitySpec& n) {
    if (n.type == "zero") return Nonlinearity({}, n.nu, n.m_f, "zero");
    if (n.type == "cubic") return Nonlinearity::cubic(n.nu, n.m_f);
    if (n.type == "quintic") return Nonlinearity::quintic(n.nu, n.m_f);
    if (n.type == "double_well") return Nonlinearity::double_well(n.nu, n.m_f);
    if (n.type == "polynomial") return Nonlinearity(n.coefficients, n.nu, n.m_f, "polynomial");
    throw std::invalid_argument("unknown nonlinearity '" + n.type + "'");
}

SpectralField build_field(const FieldSpec& f, const DomainPtr& domain, std::uint64_t seed) {
    SpectralField u(domain);
    if (f.type == "zero") return u;
    if (f.type == "modes") {
        if (f.coefficients.size() > u.size())
            throw std::invalid_argument("more mode coefficients than resolved modes");
        for (std::size_t i = 0; i < f.coefficients.size(); ++i) u[i] = f.coefficients[i];
        return u;
    }
    if (f.type == "eigenfunction") {
        if (static_cast<int>(f.index.size()) != domain->dimension())
            throw std::invalid_argument("eigenfunction index needs one entry per axis");
        MultiIndex k{1, 1, 1};
        for (std::size_t i = 0; i < f.index.size(); ++i) k[i] = f.index[i];
        return SpectralField::eigenfunction(domain, k, f.amplitude);
    }
    if (f.type == "random") {
        Rng rng(seed);
        const auto lam = domain->eigenvalues();
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = f.amplitude * rng.normal() * std::pow(domain->lambda1() / lam[i], 0.5 * f.decay);
        return u;
    }
    if (f.type == "constant") {
        std::vector<double> g(domain->grid_size(), f.amplitude);
        return SpectralField::from_grid(domain, g);
    }
    throw std::invalid_argument("unknown field type '" + f.type + "'");
}

StepConfig build_step(const Scenario& s, const Domain& domain) {
    StepConfig c;
    c.dt = s.step.dt > 0.0 ? s.step.dt : default_time_step(domain);
    c.rho = s.rho;
    c.tol = s.step.tol;
    c.max_iter = s.step.max_iter;
    c.scheme = s.step.scheme == "semi_implicit_theta" ? Scheme::SemiImplicitTheta : Scheme::ImplicitMidpoint;
    return c;
}

HistoryState build_zero_history(const Scenario& s, const DomainPtr& domain, const MemoryKernel& kernel, double dt) {
    if (kernel.is_zero()) return HistoryState::none(domain);
    const bool prony = kernel.prony() != nullptr;
    const std::string& disc = s.history.discretization;
    if (disc == "exp_modes" || (disc == "auto" && prony)) {
        if (!prony) throw ConfigError("history.discretization: exponential modes need a Prony kernel");
        return HistoryState::exp_modes(domain, *kernel.prony());
    }
    SGridOptions opts;
    opts.h0 = s.history.h0;
    opts.growth = s.history.growth;
    opts.rel_tail = s.history.rel_tail;
    return HistoryState::sgrid(domain, std::make_shared<const SGridLayout>(kernel, dt, opts));
}

SystemState build_initial_state(const Scenario& s, const DomainPtr& domain, const MemoryKernel& kernel,
                                double dt) {
    SpectralField u0 = build_field(s.initial.u0, domain, s.seed);
    SpectralField v0 = build_field(s.initial.v0, domain, s.seed + 1);
    HistoryState eta = build_zero_history(s, domain, kernel, dt);
    const auto& e = s.initial.eta0;
    const double tau = e.tau;
    if (e.type == "volterra") {
        eta = eta.with_profile([](double) { return 1.0; }, u0);
    } else if (e.type == "rep") {
        // Past profile u(-s) = u0 exp(-s/tau).
        eta = eta.with_profile([tau](double x) { return -std::expm1(-x / tau); }, u0);
    } else if (e.type == "explicit") {
        const SpectralField phi = build_field(e.field, domain, s.seed + 2);
        std::function<double(double)> g;
        if (e.profile == "constant")
            g = [](double) { return 1.0; };
        else if (e.profile == "ramp")
            g = [tau](double x) { return std::min(x / tau, 1.0); };
        else
            g = [tau](double x) { return -std::expm1(-x / tau); };
        eta = eta.with_profile(g, phi);
    }
    return make_state(std::move(u0), std::move(v0), std::move(eta));
}

}  // namespace viscomem
