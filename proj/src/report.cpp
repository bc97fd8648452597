#include "coevo/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace coevo::report {

std::string fixed(double value, int digits) {
    if (std::isnan(value)) {
        return "NA";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::string TextTable::render() const {
    std::vector<std::size_t> width(header.size(), 0);
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
    }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < width.size(); ++c) {
            const std::string cell = c < cells.size() ? cells[c] : "";
            const std::string pad(width[c] - std::min(width[c], cell.size()), ' ');
            if (c > 0) {
                out << "  ";
            }
            out << (c == 0 ? cell + pad : pad + cell);
        }
        out << '\n';
    };
    std::size_t total = 0;
    for (auto w : width) {
        total += w;
    }
    total += width.empty() ? 0 : 2 * (width.size() - 1);
    if (!title.empty()) {
        out << title << '\n';
    }
    line(header);
    out << std::string(total, '-') << '\n';
    for (const auto& row : rows) {
        line(row);
    }
    return out.str();
}

TextTable network_descriptives(const PanelDataset& dataset) {
    TextTable t{"Network descriptives", {"Wave", "Density", "Average degree", "Ties"}, {}};
    const auto summaries = describe_network(dataset);
    for (std::size_t w = 0; w < summaries.size(); ++w) {
        t.rows.push_back({std::to_string(w + 1), fixed(summaries[w].density, 3),
                          fixed(summaries[w].average_degree, 3),
                          std::to_string(summaries[w].tie_count)});
    }
    return t;
}

TextTable network_changes(const PanelDataset& dataset) {
    TextTable t{"Network changes", {"Period", "0->0", "0->1", "1->0", "1->1", "Jaccard"}, {}};
    const auto changes = network_change_table(dataset);
    for (std::size_t m = 0; m < changes.size(); ++m) {
        const auto& c = changes[m];
        t.rows.push_back({std::to_string(m + 1) + " -> " + std::to_string(m + 2),
                          std::to_string(c.n00), std::to_string(c.n01), std::to_string(c.n10),
                          std::to_string(c.n11), c.jaccard ? fixed(*c.jaccard, 3) : "NA"});
    }
    return t;
}

TextTable behavior_distribution(const PanelDataset& dataset) {
    TextTable t{"Behavior distribution", {"Level"}, {}};
    for (int w = 0; w < dataset.n_waves(); ++w) {
        t.header.push_back("Wave " + std::to_string(w + 1));
    }
    const auto table = behavior_change_table(dataset);
    for (std::size_t level = 0; level < table.histogram.size(); ++level) {
        std::vector<std::string> row{std::to_string(level + 1)};
        for (auto count : table.histogram[level]) {
            row.push_back(std::to_string(count));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

TextTable behavior_changes(const PanelDataset& dataset) {
    TextTable t{"Behavior changes", {"Period", "Decrease", "Increase", "Constant"}, {}};
    const auto table = behavior_change_table(dataset);
    for (std::size_t m = 0; m < table.periods.size(); ++m) {
        const auto& c = table.periods[m];
        t.rows.push_back({std::to_string(m + 1) + " -> " + std::to_string(m + 2),
                          std::to_string(c.n_decrease), std::to_string(c.n_increase),
                          std::to_string(c.n_constant)});
    }
    return t;
}

namespace {

std::string estimate_cell(double estimate, double se, bool inestimable) {
    if (inestimable) {
        return fixed(estimate, 3) + " (fixed)";
    }
    return fixed(estimate, 3) + significance_stars(estimate, se) + " (" + fixed(se, 3) + ")";
}

} // namespace

TextTable estimation_table(const EstimationResult& result, const EffectSpec& spec) {
    TextTable t{"Estimates", {"Effect", "Estimate (SE)"}, {}};
    const int periods = result.theta_hat.n_periods();
    const auto theta = result.theta_hat.flatten();
    const std::size_t net_block = static_cast<std::size_t>(periods) + spec.network.size();
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (k == 0) {
            t.rows.push_back({"Network dynamics", ""});
        } else if (k == net_block) {
            t.rows.push_back({"Behavior dynamics", ""});
        }
        t.rows.push_back({"  " + result.parameter_labels[k],
                          estimate_cell(theta[k], result.standard_errors[k],
                                        result.inestimable[k])});
    }
    return t;
}

TextTable convergence_table(const std::vector<StatisticDiagnostic>& diagnostics) {
    TextTable t{"Convergence", {"Statistic", "Target", "Mean deviation", "SD", "t-ratio"}, {}};
    for (const auto& d : diagnostics) {
        t.rows.push_back({d.name, fixed(d.target, 3), fixed(d.mean_deviation, 3),
                          fixed(d.sd_deviation, 3),
                          d.non_stochastic ? "non-stochastic" : fixed(d.t_ratio, 3)});
    }
    return t;
}

TextTable baseline_table(const std::vector<BaselineResult>& results) {
    TextTable t{"Baseline regressions", {"Variable"}, {}};
    std::vector<std::string> order;
    for (const auto& r : results) {
        t.header.push_back(r.model);
        for (const auto& term : r.terms) {
            if (std::find(order.begin(), order.end(), term.name) == order.end()) {
                order.push_back(term.name);
            }
        }
    }
    for (const auto& name : order) {
        std::vector<std::string> row{name};
        for (const auto& r : results) {
            const auto it = std::find_if(r.terms.begin(), r.terms.end(),
                                         [&](const BaselineTerm& x) { return x.name == name; });
            if (it == r.terms.end()) {
                row.push_back("");
            } else if (it->omitted) {
                row.push_back("(omitted)");
            } else {
                row.push_back(estimate_cell(it->estimate, it->standard_error, false));
            }
        }
        t.rows.push_back(std::move(row));
    }
    std::vector<std::string> obs{"Observations"};
    std::vector<std::string> groups{"Actors"};
    for (const auto& r : results) {
        obs.push_back(std::to_string(r.n_observations));
        groups.push_back(std::to_string(r.n_groups));
    }
    t.rows.push_back(std::move(obs));
    t.rows.push_back(std::move(groups));
    return t;
}

} // namespace coevo::report
