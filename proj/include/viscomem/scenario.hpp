#pragma once

/**
 * @file scenario.hpp
 * @brief Scenario configuration: JSON schema, validation and builders.
 *
 * A scenario is a JSON object with the sections documented in README.md.
 * Unknown keys anywhere are rejected. Every field has a default, and
 * serialization writes the complete configuration so that
 * parse(serialize(parse(text))) == parse(text).
 */

#include "viscomem/history_state.hpp"
#include "viscomem/integrator.hpp"
#include "viscomem/memory_kernel.hpp"
#include "viscomem/nonlinearity.hpp"
#include "viscomem/spectral_domain.hpp"

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace viscomem {

enum class Experiment { Evolve, DecayStudy, AbsorbingStudy, Splitting, Equilibria, KernelCertify };

/// Spatial field description.
struct FieldSpec {
    std::string type = "zero";        ///< zero | modes | eigenfunction | random | constant
    std::vector<double> coefficients;  ///< modes: flat-index coefficients (missing entries are 0)
    std::vector<int> index{1};         ///< eigenfunction: 1-based multi-index
    double amplitude = 1.0;            ///< eigenfunction / random / constant scale
    double decay = 1.0;                ///< random: coefficient k scaled by (lambda_1/lambda_k)^{decay/2}

    bool operator==(const FieldSpec&) const = default;
};

struct KernelSpec {
    std::string type = "none";  ///< none | exponential | prony | piecewise | tabulated
    double weight = 1.0;
    double rate = 1.0;
    std::vector<std::vector<double>> terms;  ///< prony: [[c, d], ...]
    std::vector<double> breakpoints;
    std::vector<double> values;
    double tail_ratio = 0.0;
    std::vector<double> nodes;
    double origin_exponent = 0.0;
    std::string tail = "exponential";  ///< tabulated: exponential | power
    double tail_parameter = 1.0;

    bool operator==(const KernelSpec&) const = default;
};

struct HistorySpec {
    std::string discretization = "auto";  ///< auto | exp_modes | sgrid
    double h0 = 0.0;
    double growth = 0.05;
    double rel_tail = 1e-8;

    bool operator==(const HistorySpec&) const = default;
};

struct NonlinearitySpec {
    std::string type = "cubic";  ///< zero | cubic | quintic | double_well | polynomial
    std::vector<double> coefficients;
    double nu = 1.0;
    double m_f = 0.0;
    double beta = 0.0;  ///< splitting level; 0 selects the midpoint of (alpha, lambda1)

    bool operator==(const NonlinearitySpec&) const = default;
};

struct HistoryInitSpec {
    std::string type = "zero";  ///< zero | volterra | rep | explicit
    double tau = 1.0;
    std::string profile = "saturating";  ///< explicit: constant | ramp | saturating
    FieldSpec field;

    bool operator==(const HistoryInitSpec&) const = default;
};

struct InitialSpec {
    FieldSpec u0;
    FieldSpec v0;
    HistoryInitSpec eta0;

    bool operator==(const InitialSpec&) const = default;
};

struct StepSpec {
    double dt = 0.0;  ///< 0 selects the default for the domain
    double tol = 1e-12;
    int max_iter = 200;
    std::string scheme = "implicit_midpoint";  ///< implicit_midpoint | semi_implicit_theta

    bool operator==(const StepSpec&) const = default;
};

struct ObserverSpec {
    std::size_t energy_stride = 1;
    bool snapshot = false;

    bool operator==(const ObserverSpec&) const = default;
};

struct DiagnosticsSpec {
    std::optional<double> sigma;
    std::optional<double> eps;
    std::optional<double> delta;
    double fit_window = 1.0 / 3.0;
    double fit_floor = 1e-300;
    double growth_range = 100.0;
    std::size_t samples = 100000;

    bool operator==(const DiagnosticsSpec&) const = default;
};

struct EquilibriaSpec {
    std::vector<FieldSpec> seeds;
    std::size_t random_starts = 8;
    double amplitude = 2.0;
    double tol = 1e-10;
    std::size_t stationarity_steps = 100;

    bool operator==(const EquilibriaSpec&) const = default;
};

struct CertifySpec {
    std::size_t samples = 10000;
    std::size_t pair_samples = 400;
    std::vector<double> deltas;  ///< extra explicit deltas to report

    bool operator==(const CertifySpec&) const = default;
};

struct Scenario {
    std::string name = "scenario";
    Experiment experiment = Experiment::Evolve;
    std::uint64_t seed = 1;
    DomainSpec domain{1, {std::numbers::pi, 1.0, 1.0}, {32, 1, 1}, 2};
    KernelSpec kernel;
    HistorySpec history;
    NonlinearitySpec nonlinearity;
    double rho = 0.0;
    FieldSpec forcing;
    InitialSpec initial;
    double horizon = 10.0;
    StepSpec step;
    ObserverSpec observers;
    DiagnosticsSpec diagnostics;
    EquilibriaSpec equilibria;
    CertifySpec certify;

    bool operator==(const Scenario& o) const;
};

/// Parses and validates; throws ConfigError with a path-qualified message.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
/// Complete JSON text including defaults.
std::string serialize_scenario(const Scenario& s);

std::string experiment_name(Experiment e);

// Builders ------------------------------------------------------------------

DomainPtr build_domain(const Scenario& s);
MemoryKernel build_kernel(const KernelSpec& k);
Nonlinearity build_nonlinearity(const NonlinearitySpec& n);
SpectralField build_field(const FieldSpec& f, const DomainPtr& domain, std::uint64_t seed);
StepConfig build_step(const Scenario& s, const Domain& domain);
/// Zero history in the configured discretization.
HistoryState build_zero_history(const Scenario& s, const DomainPtr& domain, const MemoryKernel& kernel, double dt);
/// Initial state (u0, v0, eta0).
SystemState build_initial_state(const Scenario& s, const DomainPtr& domain, const MemoryKernel& kernel,
                                double dt);

}  // namespace viscomem
