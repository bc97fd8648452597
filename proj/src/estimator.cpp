#include "coevo/estimator.h"

#include "coevo/parallel.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace coevo {

namespace {

constexpr std::uint64_t pilot_tag = 1;
constexpr std::uint64_t check_tag = 2;
constexpr std::uint64_t jacobian_tag = 3;
constexpr std::uint64_t main_tag_base = 1000;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

std::vector<double> column_mean(const std::vector<std::vector<double>>& samples) {
    std::vector<double> mean(samples.empty() ? 0 : samples.front().size(), 0.0);
    for (const auto& s : samples) {
        for (std::size_t k = 0; k < mean.size(); ++k) {
            mean[k] += s[k];
        }
    }
    for (auto& m : mean) {
        m /= static_cast<double>(samples.size());
    }
    return mean;
}

std::vector<double> column_sd(const std::vector<std::vector<double>>& samples,
                              const std::vector<double>& mean) {
    std::vector<double> sd(mean.size(), 0.0);
    if (samples.size() < 2) {
        return sd;
    }
    for (const auto& s : samples) {
        for (std::size_t k = 0; k < sd.size(); ++k) {
            const double d = s[k] - mean[k];
            sd[k] += d * d;
        }
    }
    for (auto& v : sd) {
        v = std::sqrt(v / static_cast<double>(samples.size() - 1));
    }
    return sd;
}

} // namespace

void EstimationConfig::validate() const {
    if (!(gain_a > 0.0) || !(gain_b >= 0.0)) {
        throw std::invalid_argument("step size constants need a > 0 and b >= 0");
    }
    if (n_pilot < 2 || n_main < 1 || n_check < 2 || n_jacobian < 1 || replications < 1) {
        throw std::invalid_argument(
            "phase lengths must be >= 1 (pilot and check >= 2 for a spread estimate)");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("convergence threshold tau must be positive");
    }
    if (!(max_abs_parameter > 0.0) || !(rate_floor > 0.0) || !(fd_relative > 0.0) ||
        !(fd_absolute > 0.0)) {
        throw std::invalid_argument("bounds, rate floor and perturbation sizes must be positive");
    }
}

ParameterVector initial_parameters(const PanelDataset& dataset, const EffectSpec& spec,
                                   double rate_floor) {
    const TargetStatistics targets = target_statistics(dataset, spec);
    ParameterVector theta = ParameterVector::zeros(dataset.n_periods(), spec);
    const double n = static_cast<double>(dataset.n_actors);
    for (int m = 0; m < dataset.n_periods(); ++m) {
        theta.rho_network[m] = std::max(targets.rate_network[m] / n, rate_floor);
        theta.rho_behavior[m] = std::max(targets.rate_behavior[m] / n, rate_floor);
    }
    return theta;
}

double step_size(const EstimationConfig& config, int iteration) {
    return config.gain_a / (config.gain_b + static_cast<double>(iteration));
}

std::vector<double> robbins_monro_update(std::span<const double> theta,
                                         std::span<const double> scaled_deviation, double step,
                                         const std::vector<bool>& is_rate,
                                         const std::vector<bool>& fixed, double rate_floor) {
    std::vector<double> next(theta.begin(), theta.end());
    for (std::size_t k = 0; k < next.size(); ++k) {
        if (!fixed.empty() && fixed[k]) {
            continue;
        }
        next[k] = theta[k] - step * scaled_deviation[k];
        if (is_rate[k] && next[k] <= 0.0) {
            next[k] = theta[k] / 2.0;
        }
        if (is_rate[k]) {
            next[k] = std::max(next[k], rate_floor);
        }
    }
    return next;
}

std::vector<std::vector<double>> simulate_moments(const PanelModel& model,
                                                  const ParameterVector& theta, int n,
                                                  std::uint64_t seed, std::uint64_t tag,
                                                  unsigned threads) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(n));
    parallel_for(out.size(), threads, [&](std::size_t r) {
        Rng rng = Rng::stream(seed, tag, r);
        out[r] = simulate_statistics(model, theta, rng).flatten();
    });
    return out;
}

PilotResult pilot_phase(const PanelModel& model, const ParameterVector& theta0,
                        const EstimationConfig& config) {
    const auto samples =
        simulate_moments(model, theta0, config.n_pilot, config.seed, pilot_tag, config.threads);
    const auto sd = column_sd(samples, column_mean(samples));
    PilotResult pilot;
    for (double s : sd) {
        pilot.scale.push_back(s > 0.0 ? s : 1.0);
        pilot.fixed.push_back(!(s > 0.0));
    }
    return pilot;
}

RobbinsMonroResult robbins_monro(const PanelModel& model, const TargetStatistics& targets,
                                 const ParameterVector& theta0, const PilotResult& pilot,
                                 const EstimationConfig& config) {
    const int periods = model.n_periods();
    const auto is_rate = rate_mask(periods, model.spec());
    const auto target = targets.flatten();
    const auto names = parameter_names(periods, model.spec());
    std::vector<double> theta = theta0.flatten();

    RobbinsMonroResult result;
    for (int t = 1; t <= config.n_main; ++t) {
        const auto current = ParameterVector::unflatten(theta, periods, model.spec());
        const auto samples =
            simulate_moments(model, current, config.replications, config.seed,
                             main_tag_base + static_cast<std::uint64_t>(t), config.threads);
        const auto mean = column_mean(samples);
        std::vector<double> scaled(theta.size());
        for (std::size_t k = 0; k < theta.size(); ++k) {
            scaled[k] = (mean[k] - target[k]) / pilot.scale[k];
        }
        theta = robbins_monro_update(theta, scaled, step_size(config, t), is_rate, pilot.fixed,
                                     config.rate_floor);
        for (std::size_t k = 0; k < theta.size(); ++k) {
            if (!std::isfinite(theta[k]) || std::abs(theta[k]) > config.max_abs_parameter) {
                std::ostringstream msg;
                msg << "estimation diverged at iteration " << t << ": " << names[k] << " = "
                    << theta[k] << " exceeds bound " << config.max_abs_parameter;
                throw EstimationDiverged(msg.str());
            }
        }
        result.path.push_back(theta);
    }

    const std::size_t tail = std::max<std::size_t>(1, result.path.size() / 4);
    std::vector<double> average(theta.size(), 0.0);
    for (std::size_t r = result.path.size() - tail; r < result.path.size(); ++r) {
        for (std::size_t k = 0; k < average.size(); ++k) {
            average[k] += result.path[r][k];
        }
    }
    for (auto& a : average) {
        a /= static_cast<double>(tail);
    }
    result.theta_hat = ParameterVector::unflatten(average, periods, model.spec());
    return result;
}

ConvergenceReport summarize_deviations(const std::vector<std::vector<double>>& samples,
                                       const std::vector<double>& targets,
                                       const std::vector<std::string>& names, double tau) {
    std::vector<std::vector<double>> deviations = samples;
    for (auto& d : deviations) {
        for (std::size_t k = 0; k < d.size(); ++k) {
            d[k] -= targets[k];
        }
    }
    const auto mean = column_mean(deviations);
    const auto sd = column_sd(deviations, mean);
    ConvergenceReport report;
    report.converged = true;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        StatisticDiagnostic d;
        d.name = names[k];
        d.target = targets[k];
        d.mean_deviation = mean[k];
        d.sd_deviation = sd[k];
        if (sd[k] > 0.0) {
            d.t_ratio = mean[k] / sd[k];
        } else if (mean[k] != 0.0) {
            d.non_stochastic = true;
            d.t_ratio = std::copysign(std::numeric_limits<double>::infinity(), mean[k]);
            report.converged = false;
        }
        if (!d.non_stochastic) {
            report.max_abs_t = std::max(report.max_abs_t, std::abs(d.t_ratio));
        }
        report.statistics.push_back(std::move(d));
    }
    report.converged = report.converged && report.max_abs_t <= tau;
    report.samples = samples;
    return report;
}

ConvergenceReport convergence_check(const PanelModel& model, const ParameterVector& theta,
                                    int n_check, std::uint64_t seed, unsigned threads, double tau) {
    if (n_check < 2) {
        throw std::invalid_argument("convergence check needs at least two simulations");
    }
    const auto targets = target_statistics(model.dataset(), model.spec()).flatten();
    const auto samples = simulate_moments(model, theta, n_check, seed, check_tag, threads);
    return summarize_deviations(samples, targets,
                                parameter_labels(model.n_periods(), model.spec()), tau);
}

Eigen::MatrixXd sample_covariance(const std::vector<std::vector<double>>& samples) {
    const std::size_t p = samples.empty() ? 0 : samples.front().size();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                static_cast<Eigen::Index>(p));
    if (samples.size() < 2) {
        return cov;
    }
    const auto mean = column_mean(samples);
    for (const auto& s : samples) {
        Eigen::VectorXd d(static_cast<Eigen::Index>(p));
        for (std::size_t k = 0; k < p; ++k) {
            d(static_cast<Eigen::Index>(k)) = s[k] - mean[k];
        }
        cov += d * d.transpose();
    }
    return cov / static_cast<double>(samples.size() - 1);
}

Eigen::VectorXd delta_method_se(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& covariance,
                                const std::vector<std::string>& statistic_names) {
    if (jacobian.rows() != jacobian.cols() || covariance.rows() != jacobian.rows() ||
        covariance.cols() != jacobian.cols()) {
        throw std::invalid_argument("Jacobian and covariance must be square and conformable");
    }
    if (jacobian.size() == 0) {
        return Eigen::VectorXd(0);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double largest = sv(0);
    const double smallest = sv(sv.size() - 1);
    if (!(largest > 0.0) || smallest <= 1e-10 * largest) {
        const Eigen::VectorXd combo = svd.matrixU().col(sv.size() - 1);
        const double peak = combo.cwiseAbs().maxCoeff();
        std::vector<std::string> involved;
        std::string listed;
        for (Eigen::Index k = 0; k < combo.size(); ++k) {
            if (std::abs(combo(k)) > 0.05 * peak) {
                const auto& name = statistic_names.at(static_cast<std::size_t>(k));
                involved.push_back(name);
                listed += (listed.empty() ? "" : ", ") + name;
            }
        }
        throw SingularJacobian("singular derivative matrix; collinear statistics: " + listed,
                               std::move(involved));
    }
    const Eigen::MatrixXd inv = svd.solve(Eigen::MatrixXd::Identity(jacobian.rows(), jacobian.cols()));
    const Eigen::MatrixXd v = inv * covariance * inv.transpose();
    return v.diagonal().cwiseMax(0.0).cwiseSqrt();
}

namespace {

Eigen::MatrixXd jacobian_columns(const PanelModel& model, const ParameterVector& theta,
                                 const EstimationConfig& config, const std::vector<bool>& fixed) {
    const int periods = model.n_periods();
    const auto base = theta.flatten();
    const auto is_rate = rate_mask(periods, model.spec());
    const std::size_t p = base.size();
    std::vector<double> step(p);
    for (std::size_t k = 0; k < p; ++k) {
        step[k] = std::max(config.fd_relative * std::abs(base[k]), config.fd_absolute);
    }

    std::vector<Eigen::MatrixXd> per_rep(static_cast<std::size_t>(config.n_jacobian));
    parallel_for(per_rep.size(), config.threads, [&](std::size_t r) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                  static_cast<Eigen::Index>(p));
        Rng rng0 = Rng::stream(config.seed, jacobian_tag, r);
        const auto s0 = simulate_statistics(model, theta, rng0).flatten();
        for (std::size_t k = 0; k < p; ++k) {
            if (!fixed.empty() && fixed[k]) {
                continue;
            }
            auto shifted = base;
            shifted[k] += step[k];
            Rng rng = Rng::stream(config.seed, jacobian_tag, r);
            const auto s1 =
                simulate_statistics(model, ParameterVector::unflatten(shifted, periods, model.spec()),
                                    rng)
                    .flatten();
            for (std::size_t j = 0; j < p; ++j) {
                d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
                    (s1[j] - s0[j]) / step[k];
            }
        }
        per_rep[r] = std::move(d);
    });
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                  static_cast<Eigen::Index>(p));
    for (const auto& d : per_rep) {
        total += d;
    }
    return total / static_cast<double>(per_rep.size());
}

} // namespace

Eigen::MatrixXd estimate_jacobian(const PanelModel& model, const ParameterVector& theta,
                                  const EstimationConfig& config) {
    return jacobian_columns(model, theta, config, {});
}

std::vector<double> standard_errors(const PanelModel& model, const ParameterVector& theta,
                                    const EstimationConfig& config, const std::vector<bool>& fixed,
                                    const std::vector<std::vector<double>>* samples) {
    const auto labels = parameter_labels(model.n_periods(), model.spec());
    const std::size_t p = labels.size();
    std::vector<std::vector<double>> own;
    if (samples == nullptr) {
        own = simulate_moments(model, theta, config.n_check, config.seed, check_tag, config.threads);
        samples = &own;
    }
    const Eigen::MatrixXd cov = sample_covariance(*samples);
    const Eigen::MatrixXd jac = jacobian_columns(model, theta, config, fixed);

    std::vector<Eigen::Index> active;
    std::vector<std::string> active_names;
    for (std::size_t k = 0; k < p; ++k) {
        if (fixed.empty() || !fixed[k]) {
            active.push_back(static_cast<Eigen::Index>(k));
            active_names.push_back(labels[k]);
        }
    }
    const auto n_active = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd jac_sub(n_active, n_active);
    Eigen::MatrixXd cov_sub(n_active, n_active);
    for (Eigen::Index a = 0; a < n_active; ++a) {
        for (Eigen::Index b = 0; b < n_active; ++b) {
            jac_sub(a, b) = jac(active[a], active[b]);
            cov_sub(a, b) = cov(active[a], active[b]);
        }
    }
    const Eigen::VectorXd se_sub = delta_method_se(jac_sub, cov_sub, active_names);
    std::vector<double> se(p, nan());
    for (Eigen::Index a = 0; a < n_active; ++a) {
        se[static_cast<std::size_t>(active[a])] = se_sub(a);
    }
    return se;
}

EstimationResult estimate(const PanelDataset& dataset, const EffectSpec& spec,
                          const EstimationConfig& config) {
    config.validate();
    dataset.validate();
    const PanelModel model(dataset, spec);
    const TargetStatistics targets = target_statistics(dataset, spec);

    EstimationResult result;
    result.parameter_names = parameter_names(dataset.n_periods(), spec);
    result.parameter_labels = parameter_labels(dataset.n_periods(), spec);
    result.targets = targets.flatten();
    result.initial = initial_parameters(dataset, spec, config.rate_floor);

    const PilotResult pilot = pilot_phase(model, result.initial, config);
    result.inestimable = pilot.fixed;

    auto rm = robbins_monro(model, targets, result.initial, pilot, config);
    result.theta_hat = rm.theta_hat;
    result.iteration_log = std::move(rm.path);

    auto check = convergence_check(model, result.theta_hat, config.n_check, config.seed,
                                   config.threads, config.tau);
    result.diagnostics = check.statistics;
    result.max_abs_t = check.max_abs_t;
    result.converged = check.converged;

    try {
        result.standard_errors =
            standard_errors(model, result.theta_hat, config, pilot.fixed, &check.samples);
    } catch (const SingularJacobian& e) {
        result.standard_errors.assign(result.parameter_names.size(), nan());
        result.standard_error_failure = e.what();
    }
    return result;
}

std::string significance_stars(double estimate, double standard_error) {
    if (std::isnan(standard_error) || std::isnan(estimate)) {
        return "";
    }
    double p = 1.0;
    if (standard_error > 0.0) {
        p = std::erfc(std::abs(estimate / standard_error) / std::sqrt(2.0));
    } else if (estimate != 0.0) {
        p = 0.0;
    }
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

} // namespace coevo
