#pragma once

/**
 * @file diagnostics.hpp
 * @brief Energies, Lyapunov functional, auxiliary functionals and decay fits.
 */

#include "viscomem/integrator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace viscomem {

/// E = (||u||_1^2 + ||v||_1^2 + ||eta||_M^2) / 2
double energy(const SystemState& z);
/// E_s with every norm raised by s.
double energy_sigma(const SystemState& z, double s);
/// int |v|^{rho+2} / (rho+2) by collocation quadrature.
double kinetic_term(const SpectralField& v, double rho);
/// Kinetic term + E + <F(u),1> - <h,u>
double lyapunov(const SystemState& z, const Nonlinearity& nl, const SpectralField& h, double rho);

/// |(L1 - L0)/dt + ||vbar||_1^2 - <T etabar, etabar>| with step averages.
double dissipation_residual(const SystemState& z0, const SystemState& z1, double dt, const Nonlinearity& nl,
                            const SpectralField& h, double rho);

/// min{1/3, (4 - rho)/2}
double default_sigma(double rho);

struct LambdaWeights {
    double eps = 0.5;
    double delta = 0.25;
};

/// eps = 1/(2 Theta) (Theta = 1 without memory), delta = min(1/4, nu/8).
LambdaWeights default_lambda_weights(double theta, double nu);

struct AuxFunctionals {
    double psi = 0.0;
    double phi = 0.0;
    double psi_s = 0.0;
    double phi_s = 0.0;
    double energy_s = 0.0;
    double lambda_s = 0.0;
};

AuxFunctionals aux_functionals(const SystemState& z, double rho, double s, const LambdaWeights& w);

/// Step defect of dPsi/dt + ||eta||_M^2/2 - 2 Theta^2 kappa ||v||_1^2 (nonpositive up to slack).
double psi_balance_defect(const SystemState& z0, const SystemState& z1, double dt, double theta, double kappa);

/// (4/nu)(2 M_f + ||h||_{-1}^2 / nu)
double absorbing_radius(double nu, double M_f, double h_norm_minus1);
/// Same with M_f = m_f |Omega| and ||h||_{-1} computed spectrally.
double absorbing_radius(const Nonlinearity& nl, const SpectralField& h);

struct EnergyReport {
    double t = 0.0;
    double E = 0.0;
    double L = 0.0;
    double Psi = 0.0;
    double Phi = 0.0;
    double Lambda_sigma = 0.0;
    double norm_u_1s = 0.0;
    double norm_v_1s = 0.0;
    double norm_eta_Ms = 0.0;
    double diss_residual = 0.0;
    double T_eta_eta = 0.0;
};

/// Column order of the energy CSV.
const std::vector<std::string>& energy_csv_header();
void write_energy_csv(std::ostream& os, const std::vector<EnergyReport>& rows);
/// Shortest round-trip decimal with 17 significant digits.
std::string format_double(double x);

struct DecayFit {
    double omega = 0.0;
    double plateau = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of log(E - R) against t over the last `window` fraction of the series.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& E, double window = 1.0 / 3.0,
                   double floor = 1e-300);

/// Monitored inequalities along a run.
struct MonitorSummary {
    double max_lyapunov_increase = 0.0;  ///< max (L_{n+1} - L_n) / (1 + |L_n|)
    double max_residual = 0.0;
    double max_psi_ratio = 0.0;          ///< max Psi / (Theta ||eta||_M^2)
    double min_sandwich_margin = 0.0;    ///< min of Lambda - E/2 and 2E - Lambda, relative to E
    double max_t_dissipation = 0.0;      ///< max <T eta, eta>_M
    std::size_t steps = 0;
};

struct RecorderConfig {
    double rho = 0.0;
    double sigma = 1.0 / 3.0;
    double theta = 1.0;
    LambdaWeights weights;
    std::size_t stride = 1;  ///< row stride; monitors see every step
};

/// Observer collecting EnergyReport rows and inequality monitors.
class EnergyRecorder {
public:
    EnergyRecorder(const Nonlinearity& nl, const SpectralField& h, RecorderConfig cfg);

    Observer observer();
    const std::vector<EnergyReport>& rows() const { return rows_; }
    const MonitorSummary& monitors() const { return mon_; }

    EnergyReport report(const SystemState& z, double residual) const;

private:
    void on_start(const SystemState& z);
    void on_step(const SystemState& prev, const SystemState& next, const StepInfo& info);

    const Nonlinearity* nl_;
    SpectralField h_;
    RecorderConfig cfg_;
    std::vector<EnergyReport> rows_;
    MonitorSummary mon_;
    double last_L_ = 0.0;
};

}  // namespace viscomem
