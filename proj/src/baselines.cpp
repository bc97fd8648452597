#include "coevo/baselines.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace coevo {

void RegressionPanel::add_row(ActorId i, int t, double outcome,
                              const std::vector<double>& regressors) {
    if (regressors.size() != names.size()) {
        throw std::invalid_argument("regressor count does not match the panel's column names");
    }
    if (columns.size() != names.size()) {
        columns.resize(names.size());
    }
    actor.push_back(i);
    period.push_back(t);
    y.push_back(outcome);
    for (std::size_t k = 0; k < regressors.size(); ++k) {
        columns[k].push_back(regressors[k]);
    }
}

void RegressionPanel::validate() const {
    if (columns.size() != names.size()) {
        throw std::invalid_argument("panel has " + std::to_string(columns.size()) +
                                    " columns but " + std::to_string(names.size()) + " names");
    }
    if (actor.size() != y.size() || period.size() != y.size()) {
        throw std::invalid_argument("actor, period and outcome vectors differ in length");
    }
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k].size() != y.size()) {
            throw std::invalid_argument("column " + names[k] + " has the wrong length");
        }
    }
}

RegressionPanel build_regression_panel(const std::vector<std::vector<std::int64_t>>& raw_counts,
                                       const std::vector<Network>& networks,
                                       const CovariateTable& covariates) {
    if (raw_counts.size() != networks.size()) {
        throw DataError("behavior counts cover " + std::to_string(raw_counts.size()) +
                        " waves but the network has " + std::to_string(networks.size()));
    }
    if (networks.size() < 2) {
        throw DataError("at least two waves are needed for lagged regressors");
    }
    const ActorId n = networks.front().size();
    for (std::size_t t = 0; t < networks.size(); ++t) {
        if (networks[t].size() != n || raw_counts[t].size() != static_cast<std::size_t>(n)) {
            throw DataError("wave " + std::to_string(t + 1) + " has a different actor count");
        }
    }
    if (covariates.size() != static_cast<std::size_t>(n)) {
        throw DataError("covariate table does not match the actor count");
    }

    std::set<std::int64_t> codes(covariates.gender.begin(), covariates.gender.end());
    std::vector<std::int64_t> dummy_codes;
    if (codes.size() > 1) {
        dummy_codes.assign(std::next(codes.begin()), codes.end());
    }

    RegressionPanel panel;
    panel.names = {"new_friends", "friend_posts", "age", "tenure"};
    for (auto code : dummy_codes) {
        panel.names.push_back("gender[" + std::to_string(code) + "]");
    }
    panel.columns.resize(panel.names.size());

    std::vector<double> row;
    for (std::size_t t = 1; t < networks.size(); ++t) {
        const Network& before = networks[t - 1];
        const Network& after = networks[t];
        for (ActorId i = 0; i < n; ++i) {
            double friend_posts = 0.0;
            for (ActorId j : before.neighbors(i)) {
                friend_posts += static_cast<double>(raw_counts[t - 1][j]);
            }
            row = {static_cast<double>(after.degree(i) - before.degree(i)), friend_posts,
                   static_cast<double>(covariates.age[i]),
                   static_cast<double>(covariates.tenure_days[i])};
            for (auto code : dummy_codes) {
                row.push_back(covariates.gender[i] == code ? 1.0 : 0.0);
            }
            panel.add_row(i, static_cast<int>(t + 1), static_cast<double>(raw_counts[t][i]), row);
        }
    }
    return panel;
}

RegressionPanel build_regression_panel(const PanelDataset& dataset) {
    if (dataset.raw_values.empty()) {
        throw DataError("regression baselines need raw behavior counts");
    }
    return build_regression_panel(dataset.raw_values, dataset.networks, dataset.covariates);
}

const BaselineTerm& BaselineResult::term(const std::string& name) const {
    for (const auto& t : terms) {
        if (t.name == name) {
            return t;
        }
    }
    throw std::out_of_range("no term named " + name);
}

namespace {

struct Design {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> names;
    /// row indices per retained actor
    std::vector<std::vector<Eigen::Index>> groups;
    std::vector<ActorId> dropped;
    std::vector<std::string> notes;
};

template <typename KeepActor>
Design make_design(const RegressionPanel& panel, const BaselineOptions& options,
                   KeepActor keep_actor) {
    panel.validate();
    std::map<ActorId, std::vector<std::size_t>> by_actor;
    for (std::size_t r = 0; r < panel.rows(); ++r) {
        by_actor[panel.actor[r]].push_back(r);
    }

    Design d;
    std::vector<std::size_t> rows;
    std::size_t singletons = 0;
    for (const auto& [id, members] : by_actor) {
        if (members.size() < 2) {
            ++singletons;
            d.dropped.push_back(id);
            continue;
        }
        if (!keep_actor(members)) {
            d.dropped.push_back(id);
            continue;
        }
        std::vector<Eigen::Index> group;
        for (auto r : members) {
            group.push_back(static_cast<Eigen::Index>(rows.size()));
            rows.push_back(r);
        }
        d.groups.push_back(std::move(group));
    }
    if (singletons > 0) {
        d.notes.push_back(std::to_string(singletons) + " actor(s) with a single period dropped");
    }

    std::vector<int> periods;
    if (options.time_dummies) {
        std::set<int> distinct;
        for (auto r : rows) {
            distinct.insert(panel.period[r]);
        }
        periods.assign(distinct.begin(), distinct.end());
        if (!periods.empty()) {
            periods.erase(periods.begin());
        }
    }

    d.names = panel.names;
    for (int t : periods) {
        d.names.push_back("period[" + std::to_string(t) + "]");
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(d.names.size());
    d.x.resize(n, k);
    d.y.resize(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const std::size_t r = rows[static_cast<std::size_t>(a)];
        d.y(a) = panel.y[r];
        for (std::size_t c = 0; c < panel.columns.size(); ++c) {
            d.x(a, static_cast<Eigen::Index>(c)) = panel.columns[c][r];
        }
        for (std::size_t p = 0; p < periods.size(); ++p) {
            d.x(a, static_cast<Eigen::Index>(panel.columns.size() + p)) =
                panel.period[r] == periods[p] ? 1.0 : 0.0;
        }
    }
    return d;
}

Eigen::MatrixXd demean(const Eigen::MatrixXd& m, const std::vector<std::vector<Eigen::Index>>& groups) {
    Eigen::MatrixXd out = m;
    for (const auto& g : groups) {
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(m.cols());
        for (auto r : g) {
            mean += m.row(r);
        }
        mean /= static_cast<double>(g.size());
        for (auto r : g) {
            out.row(r) -= mean;
        }
    }
    return out;
}

/// Greedy selection: a column is kept when its within-demeaned part is not
/// (numerically) in the span of the columns kept before it.
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& raw,
                                              const Eigen::MatrixXd& within) {
    std::vector<Eigen::Index> kept;
    std::vector<Eigen::VectorXd> basis;
    for (Eigen::Index k = 0; k < within.cols(); ++k) {
        Eigen::VectorXd r = within.col(k);
        for (const auto& q : basis) {
            r -= q.dot(r) * q;
        }
        const double scale = std::max(raw.col(k).norm(), 1.0);
        if (r.norm() > 1e-9 * scale) {
            basis.push_back(r.normalized());
            kept.push_back(k);
        }
    }
    return kept;
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out.col(static_cast<Eigen::Index>(c)) = m.col(cols[c]);
    }
    return out;
}

void fill_terms(BaselineResult& result, const Design& d, const std::vector<Eigen::Index>& kept,
                const Eigen::VectorXd& beta, const Eigen::VectorXd& se) {
    std::vector<bool> is_kept(d.names.size(), false);
    std::vector<std::size_t> slot(d.names.size(), 0);
    for (std::size_t c = 0; c < kept.size(); ++c) {
        is_kept[static_cast<std::size_t>(kept[c])] = true;
        slot[static_cast<std::size_t>(kept[c])] = c;
    }
    for (std::size_t k = 0; k < d.names.size(); ++k) {
        BaselineTerm term;
        term.name = d.names[k];
        if (is_kept[k]) {
            term.estimate = beta(static_cast<Eigen::Index>(slot[k]));
            term.standard_error = se(static_cast<Eigen::Index>(slot[k]));
        } else {
            term.omitted = true;
            term.estimate = std::numeric_limits<double>::quiet_NaN();
            term.standard_error = std::numeric_limits<double>::quiet_NaN();
        }
        result.terms.push_back(std::move(term));
    }
}

} // namespace

BaselineResult fe_ols(const RegressionPanel& panel, const BaselineOptions& options) {
    Design d = make_design(panel, options, [](const std::vector<std::size_t>&) { return true; });
    if (d.groups.empty()) {
        throw std::invalid_argument("no actor has two or more periods");
    }
    const Eigen::MatrixXd xw = demean(d.x, d.groups);
    const Eigen::VectorXd yw = demean(d.y, d.groups);
    const auto kept = independent_columns(d.x, xw);
    const Eigen::MatrixXd xk = select(xw, kept);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(xk.cols());
    Eigen::VectorXd se = Eigen::VectorXd::Zero(xk.cols());
    Eigen::VectorXd resid = yw;
    if (xk.cols() > 0) {
        beta = xk.colPivHouseholderQr().solve(yw);
        resid = yw - xk * beta;
    }
    const double rss = resid.squaredNorm();
    const double tss = yw.squaredNorm();
    const auto n = static_cast<double>(xk.rows());
    const double dof = n - static_cast<double>(d.groups.size()) - static_cast<double>(xk.cols());
    if (xk.cols() > 0) {
        const Eigen::MatrixXd xtx_inv =
            (xk.transpose() * xk).ldlt().solve(Eigen::MatrixXd::Identity(xk.cols(), xk.cols()));
        const double sigma2 = dof > 0 ? rss / dof : std::numeric_limits<double>::quiet_NaN();
        se = (sigma2 * xtx_inv.diagonal()).cwiseMax(0.0).cwiseSqrt();
    }

    BaselineResult result;
    result.model = "fixed-effects OLS";
    result.n_observations = static_cast<std::size_t>(xk.rows());
    result.n_groups = d.groups.size();
    result.dropped_actors = d.dropped;
    result.notes = d.notes;
    result.fit = tss > 0 ? 1.0 - rss / tss : 1.0;
    fill_terms(result, d, kept, beta, se);
    return result;
}

namespace {

struct PoissonEval {
    double loglik = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

PoissonEval poisson_eval(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const std::vector<std::vector<Eigen::Index>>& groups,
                         const Eigen::VectorXd& beta) {
    const Eigen::Index k = x.cols();
    PoissonEval e;
    e.gradient = Eigen::VectorXd::Zero(k);
    e.hessian = Eigen::MatrixXd::Zero(k, k);
    const Eigen::VectorXd eta = x * beta;
    for (const auto& g : groups) {
        double peak = -std::numeric_limits<double>::infinity();
        double total = 0.0;
        for (auto r : g) {
            peak = std::max(peak, eta(r));
            total += y(r);
        }
        double z = 0.0;
        for (auto r : g) {
            z += std::exp(eta(r) - peak);
        }
        const double log_z = peak + std::log(z);
        Eigen::VectorXd xbar = Eigen::VectorXd::Zero(k);
        for (auto r : g) {
            const double p = std::exp(eta(r) - log_z);
            xbar += p * x.row(r).transpose();
            e.loglik += y(r) * (eta(r) - log_z);
        }
        for (auto r : g) {
            const double p = std::exp(eta(r) - log_z);
            const Eigen::VectorXd dev = x.row(r).transpose() - xbar;
            e.gradient += y(r) * dev;
            e.hessian -= total * p * dev * dev.transpose();
        }
    }
    return e;
}

} // namespace

BaselineResult fe_poisson(const RegressionPanel& panel, const BaselineOptions& options) {
    panel.validate();
    for (double v : panel.y) {
        if (!(v >= 0.0) || std::floor(v) != v) {
            throw std::invalid_argument("Poisson outcomes must be non-negative integers");
        }
    }
    std::size_t all_zero = 0;
    Design d = make_design(panel, options, [&](const std::vector<std::size_t>& members) {
        const bool any = std::any_of(members.begin(), members.end(),
                                     [&](std::size_t r) { return panel.y[r] > 0.0; });
        all_zero += any ? 0 : 1;
        return any;
    });
    if (all_zero > 0) {
        d.notes.push_back(std::to_string(all_zero) + " actor(s) with all-zero outcomes dropped");
    }
    if (d.groups.empty()) {
        throw std::invalid_argument("no actor has a positive outcome in two or more periods");
    }
    const Eigen::MatrixXd xw = demean(d.x, d.groups);
    const auto kept = independent_columns(d.x, xw);
    const Eigen::MatrixXd xk = select(d.x, kept);
    const Eigen::MatrixXd xk_within = select(xw, kept);
    const Eigen::Index k = xk.cols();

    Eigen::VectorXd scale(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        scale(c) = std::sqrt(xk_within.col(c).squaredNorm() / static_cast<double>(xk.rows()));
    }
    const double total = std::max(d.y.sum(), 1.0);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    PoissonEval e = poisson_eval(xk, d.y, d.groups, beta);
    int iteration = 0;
    auto converged = [&] {
        return k == 0 ||
               (e.gradient.cwiseProduct(scale).cwiseAbs().maxCoeff() / total) < options.tolerance;
    };
    while (!converged()) {
        if (iteration >= options.max_iterations) {
            throw BaselineError("fixed-effects Poisson did not converge in " +
                                    std::to_string(options.max_iterations) + " iterations",
                                std::vector<double>(beta.data(), beta.data() + beta.size()));
        }
        ++iteration;
        const Eigen::VectorXd step = (-e.hessian).ldlt().solve(e.gradient);
        double factor = 1.0;
        PoissonEval next = poisson_eval(xk, d.y, d.groups, beta + step);
        while (!(next.loglik >= e.loglik - 1e-12 * std::abs(e.loglik)) && factor > 1e-8) {
            factor /= 2.0;
            next = poisson_eval(xk, d.y, d.groups, beta + factor * step);
        }
        beta += factor * step;
        e = std::move(next);
    }
    // one more full step at the converged point removes the residual the
    // scaled criterion tolerates
    if (k > 0) {
        const Eigen::VectorXd step = (-e.hessian).ldlt().solve(e.gradient);
        PoissonEval next = poisson_eval(xk, d.y, d.groups, beta + step);
        if (std::isfinite(next.loglik) && next.loglik >= e.loglik) {
            beta += step;
            e = std::move(next);
        }
    }

    Eigen::VectorXd se = Eigen::VectorXd::Zero(k);
    if (k > 0) {
        const Eigen::MatrixXd cov =
            (-e.hessian).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
        se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    }

    BaselineResult result;
    result.model = "fixed-effects Poisson";
    result.n_observations = static_cast<std::size_t>(xk.rows());
    result.n_groups = d.groups.size();
    result.dropped_actors = d.dropped;
    result.notes = d.notes;
    result.fit = e.loglik;
    result.iterations = iteration;
    fill_terms(result, d, kept, beta, se);
    return result;
}

} // namespace coevo
