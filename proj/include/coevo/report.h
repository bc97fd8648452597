#pragma once

#include "coevo/baselines.h"
#include "coevo/estimator.h"
#include "coevo/panel_data.h"

#include <string>
#include <vector>

namespace coevo::report {

/// Plain-text table with left-aligned first column and right-aligned rest.
struct TextTable {
    std::string title;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string render() const;
};

/// printf-style "%.{digits}f"; "NA" for NaN.
std::string fixed(double value, int digits);

/// Density, average degree and tie count per wave.
TextTable network_descriptives(const PanelDataset& dataset);
/// Tie transitions 0->0, 0->1, 1->0, 1->1 and Jaccard per period.
TextTable network_changes(const PanelDataset& dataset);
/// Actors at each level per wave.
TextTable behavior_distribution(const PanelDataset& dataset);
/// Decrease / increase / constant counts per period.
TextTable behavior_changes(const PanelDataset& dataset);

/// "estimate (SE)" with significance stars, network rows then behavior rows.
TextTable estimation_table(const EstimationResult& result, const EffectSpec& spec);
/// Target, mean and SD of deviation, t-ratio per statistic.
TextTable convergence_table(const std::vector<StatisticDiagnostic>& diagnostics);
/// One column per model; omitted regressors are shown as "(omitted)".
TextTable baseline_table(const std::vector<BaselineResult>& results);

} // namespace coevo::report
