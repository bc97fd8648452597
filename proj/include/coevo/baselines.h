#pragma once

#include "coevo/network.h"
#include "coevo/panel_data.h"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coevo {

/// Long-format panel: one row per (actor, period) with regressors stored by column.
struct RegressionPanel {
    std::vector<ActorId> actor;
    /// wave index (1-based) of the outcome
    std::vector<int> period;
    std::vector<double> y;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const noexcept { return y.size(); }
    void add_row(ActorId i, int t, double outcome, const std::vector<double>& regressors);
    /// Throws std::invalid_argument on ragged columns or a name/column mismatch.
    void validate() const;
};

/// Rows for waves 2..T. y = P_it, new_friends = ties gained between waves t-1
/// and t, friend_posts = sum of P_{j,t-1} over friends at wave t-1, then age,
/// tenure and one dummy per non-reference gender code.
RegressionPanel build_regression_panel(const std::vector<std::vector<std::int64_t>>& raw_counts,
                                       const std::vector<Network>& networks,
                                       const CovariateTable& covariates);
RegressionPanel build_regression_panel(const PanelDataset& dataset);

struct BaselineTerm {
    std::string name;
    double estimate = 0.0;
    double standard_error = 0.0;
    bool omitted = false;
};

struct BaselineResult {
    std::string model;
    std::vector<BaselineTerm> terms;
    std::size_t n_observations = 0;
    std::size_t n_groups = 0;
    std::vector<ActorId> dropped_actors;
    std::vector<std::string> notes;
    /// within R^2 for OLS, conditional log-likelihood for Poisson
    double fit = 0.0;
    int iterations = 0;

    const BaselineTerm& term(const std::string& name) const;
};

class BaselineError : public std::runtime_error {
public:
    BaselineError(const std::string& message, std::vector<double> last)
        : std::runtime_error(message), last_iterate{std::move(last)} {}
    std::vector<double> last_iterate;
};

struct BaselineOptions {
    bool time_dummies = true;
    int max_iterations = 100;
    double tolerance = 1e-8;
};

/// Within-transformed OLS with period dummies. Columns without within-actor
/// variation (or collinear with earlier ones) are reported omitted.
BaselineResult fe_ols(const RegressionPanel& panel, const BaselineOptions& options = {});

/// Conditional fixed-effects Poisson by Newton iteration. Actors whose outcomes
/// are all zero are dropped.
BaselineResult fe_poisson(const RegressionPanel& panel, const BaselineOptions& options = {});

} // namespace coevo
