#pragma once

#include "coevo/effects.h"
#include "coevo/panel_data.h"
#include "coevo/simulator.h"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coevo {

struct EstimationConfig {
    /// step size a / (b + t)
    double gain_a = 1.0;
    double gain_b = 9.0;
    int n_pilot = 50;
    int n_main = 500;
    int n_check = 1000;
    /// finite-difference replications for the Jacobian
    int n_jacobian = 100;
    /// conditional panel simulations averaged per Robbins-Monro iteration
    int replications = 1;
    std::uint64_t seed = 0;
    double tau = 0.1;
    double max_abs_parameter = 100.0;
    double rate_floor = 1e-4;
    double fd_relative = 0.05;
    double fd_absolute = 0.05;
    unsigned threads = 1;

    void validate() const;
};

/// Raised when an iterate leaves the configured parameter bound.
class EstimationDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the finite-difference Jacobian is singular; names the
/// statistics involved in the near-null combination.
class SingularJacobian : public std::runtime_error {
public:
    SingularJacobian(const std::string& message, std::vector<std::string> statistics)
        : std::runtime_error(message), collinear{std::move(statistics)} {}
    std::vector<std::string> collinear;
};

/// Rates start at observed change / N (floored), weights at zero.
ParameterVector initial_parameters(const PanelDataset& dataset, const EffectSpec& spec,
                                   double rate_floor = 1e-4);

double step_size(const EstimationConfig& config, int iteration);

/// theta - step * scaled_deviation, with fixed entries untouched and rates
/// kept at or above the floor (a rate that would go non-positive is halved).
std::vector<double> robbins_monro_update(std::span<const double> theta,
                                         std::span<const double> scaled_deviation, double step,
                                         const std::vector<bool>& is_rate,
                                         const std::vector<bool>& fixed, double rate_floor);

/// n conditional panel simulations at theta; stream r derives from (seed, tag, r).
std::vector<std::vector<double>> simulate_moments(const PanelModel& model,
                                                  const ParameterVector& theta, int n,
                                                  std::uint64_t seed, std::uint64_t tag,
                                                  unsigned threads);

struct PilotResult {
    std::vector<double> scale;
    /// parameters whose statistic showed no variation; held fixed
    std::vector<bool> fixed;
};

PilotResult pilot_phase(const PanelModel& model, const ParameterVector& theta0,
                        const EstimationConfig& config);

struct RobbinsMonroResult {
    std::vector<std::vector<double>> path;
    ParameterVector theta_hat;
};

/// Main phase; theta_hat is the mean of the final quarter of iterates.
RobbinsMonroResult robbins_monro(const PanelModel& model, const TargetStatistics& targets,
                                 const ParameterVector& theta0, const PilotResult& pilot,
                                 const EstimationConfig& config);

struct StatisticDiagnostic {
    std::string name;
    double target = 0.0;
    double mean_deviation = 0.0;
    double sd_deviation = 0.0;
    double t_ratio = 0.0;
    /// zero spread with a non-zero mean deviation
    bool non_stochastic = false;
};

struct ConvergenceReport {
    std::vector<StatisticDiagnostic> statistics;
    double max_abs_t = 0.0;
    bool converged = false;
    /// simulated moment vectors, one per replication
    std::vector<std::vector<double>> samples;
};

ConvergenceReport summarize_deviations(const std::vector<std::vector<double>>& samples,
                                       const std::vector<double>& targets,
                                       const std::vector<std::string>& names, double tau);

ConvergenceReport convergence_check(const PanelModel& model, const ParameterVector& theta,
                                    int n_check, std::uint64_t seed, unsigned threads,
                                    double tau = 0.1);

/// sqrt(diag(D^-1 Sigma D^-T)); throws SingularJacobian.
Eigen::VectorXd delta_method_se(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& covariance,
                                const std::vector<std::string>& statistic_names);

/// CRN forward-difference estimate of dE[S]/dtheta.
Eigen::MatrixXd estimate_jacobian(const PanelModel& model, const ParameterVector& theta,
                                  const EstimationConfig& config);

Eigen::MatrixXd sample_covariance(const std::vector<std::vector<double>>& samples);

/// Standard errors at theta. Entries flagged in `fixed` get NaN and are left
/// out of the Jacobian. Uses `samples` for the covariance when given.
std::vector<double> standard_errors(const PanelModel& model, const ParameterVector& theta,
                                    const EstimationConfig& config,
                                    const std::vector<bool>& fixed = {},
                                    const std::vector<std::vector<double>>* samples = nullptr);

struct EstimationResult {
    std::vector<std::string> parameter_names;
    std::vector<std::string> parameter_labels;
    ParameterVector initial;
    ParameterVector theta_hat;
    std::vector<double> standard_errors;
    std::vector<bool> inestimable;
    std::vector<double> targets;
    std::vector<StatisticDiagnostic> diagnostics;
    double max_abs_t = 0.0;
    bool converged = false;
    std::optional<std::string> standard_error_failure;
    std::vector<std::vector<double>> iteration_log;
};

/// initial values -> pilot -> Robbins-Monro -> convergence check -> standard errors.
EstimationResult estimate(const PanelDataset& dataset, const EffectSpec& spec,
                          const EstimationConfig& config);

/// "***" p < 0.01, "**" p < 0.05, "*" p < 0.1 from a two-sided normal test.
std::string significance_stars(double estimate, double standard_error);

} // namespace coevo
