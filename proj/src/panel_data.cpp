#include "coevo/panel_data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace coevo {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

std::vector<CsvRow> read_csv(const std::filesystem::path& path,
                             const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::vector<CsvRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(trim(field));
        }
        if (!saw_header) {
            if (fields != header) {
                std::string expected;
                for (const auto& h : header) {
                    expected += (expected.empty() ? "" : ",") + h;
                }
                throw DataError(path.string() + ":" + std::to_string(line_no) +
                                ": expected header '" + expected + "'");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields");
        }
        rows.push_back({line_no, std::move(fields)});
    }
    if (!saw_header) {
        throw DataError(path.string() + ": missing header");
    }
    return rows;
}

std::int64_t parse_int(const CsvRow& row, std::size_t field, const std::filesystem::path& path) {
    const std::string& s = row.fields[field];
    std::size_t used = 0;
    std::int64_t value = 0;
    try {
        value = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) {
        throw DataError(path.string() + ":" + std::to_string(row.line) + ": '" + s +
                        "' is not an integer");
    }
    return value;
}

std::string where(const std::filesystem::path& path, const CsvRow& row) {
    return path.string() + ":" + std::to_string(row.line) + ": ";
}

// Nearest-rank quantile of a sorted sample: value at rank ceil(q * n).
std::int64_t nearest_rank(const std::vector<std::int64_t>& sorted, double q) {
    const double n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

} // namespace

std::string to_string(Covariate c) {
    switch (c) {
    case Covariate::gender:
        return "gender";
    case Covariate::age:
        return "age";
    case Covariate::tenure:
        return "tenure";
    }
    return "unknown";
}

Covariate covariate_from_string(const std::string& name) {
    if (name == "gender") return Covariate::gender;
    if (name == "age") return Covariate::age;
    if (name == "tenure" || name == "tenure_days") return Covariate::tenure;
    throw std::invalid_argument("unknown covariate '" + name + "'");
}

CovariateTable CovariateTable::zeros(ActorId n_actors) {
    const auto n = static_cast<std::size_t>(n_actors);
    return {std::vector<std::int64_t>(n, 0), std::vector<std::int64_t>(n, 0),
            std::vector<std::int64_t>(n, 0)};
}

std::span<const std::int64_t> CovariateTable::column(Covariate c) const noexcept {
    switch (c) {
    case Covariate::gender:
        return gender;
    case Covariate::age:
        return age;
    case Covariate::tenure:
        return tenure_days;
    }
    return gender;
}

std::int64_t CovariateTable::range(Covariate c) const noexcept {
    const auto col = column(c);
    if (col.empty()) {
        return 0;
    }
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    return *hi - *lo;
}

void PanelDataset::validate() const {
    if (n_actors <= 0) {
        throw DataError("dataset has no actors");
    }
    if (n_waves() < 2) {
        throw DataError("dataset needs at least two waves");
    }
    if (n_levels < 2) {
        throw DataError("number of behavior levels must be at least 2");
    }
    if (behaviors.size() != networks.size()) {
        throw DataError("behavior and network wave counts differ");
    }
    if (covariates.size() != static_cast<std::size_t>(n_actors)) {
        throw DataError("covariate table does not have one row per actor");
    }
    for (int w = 0; w < n_waves(); ++w) {
        if (networks[w].size() != n_actors ||
            behaviors[w].size() != static_cast<std::size_t>(n_actors)) {
            throw DataError("wave " + std::to_string(w + 1) + " has a different actor set");
        }
        for (ActorId i = 0; i < n_actors; ++i) {
            const int level = behaviors[w][i];
            if (level < 1 || level > n_levels) {
                throw DataError("behavior level " + std::to_string(level) + " of actor " +
                                std::to_string(i) + " at wave " + std::to_string(w + 1) +
                                " outside [1, " + std::to_string(n_levels) + "]");
            }
        }
    }
    for (int w = 0; w + 1 < n_waves(); ++w) {
        const Network& a = networks[w];
        const Network& b = networks[w + 1];
        for (ActorId i = 0; i < n_actors; ++i) {
            for (ActorId j : a.neighbors(i)) {
                if (i < j && !b.has_tie(i, j)) {
                    throw DataError("tie dissolution: (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") present at wave " +
                                    std::to_string(w + 1) + ", absent at wave " +
                                    std::to_string(w + 2));
                }
            }
        }
    }
}

PanelDataset load_dataset(const std::filesystem::path& edge_file,
                          const std::filesystem::path& behavior_file,
                          const std::optional<std::filesystem::path>& covariate_file,
                          const DataConfig& config) {
    if (config.n_levels < 2) {
        throw DataError("n_levels must be at least 2");
    }

    // behavior first: it fixes N and T
    const auto behavior_rows = read_csv(behavior_file, {"wave", "actor", "value"});
    std::int64_t max_wave = 0;
    std::int64_t max_actor = -1;
    for (const auto& row : behavior_rows) {
        const auto wave = parse_int(row, 0, behavior_file);
        const auto actor = parse_int(row, 1, behavior_file);
        if (wave < 1) {
            throw DataError(where(behavior_file, row) + "wave numbers start at 1");
        }
        if (actor < 0) {
            throw DataError(where(behavior_file, row) + "unknown actor id " + std::to_string(actor));
        }
        max_wave = std::max(max_wave, wave);
        max_actor = std::max(max_actor, actor);
    }
    if (max_wave < 2) {
        throw DataError(behavior_file.string() + ": at least two waves are required");
    }
    const auto n_waves = static_cast<std::size_t>(max_wave);
    const auto n = static_cast<ActorId>(max_actor + 1);

    PanelDataset data;
    data.n_actors = n;
    data.n_levels = config.n_levels;
    data.cutoffs = config.cutoffs;
    data.raw_values.assign(n_waves, std::vector<std::int64_t>(static_cast<std::size_t>(n), -1));
    std::vector<std::vector<bool>> seen(n_waves, std::vector<bool>(static_cast<std::size_t>(n)));
    for (const auto& row : behavior_rows) {
        const auto w = static_cast<std::size_t>(parse_int(row, 0, behavior_file) - 1);
        const auto i = static_cast<std::size_t>(parse_int(row, 1, behavior_file));
        const auto value = parse_int(row, 2, behavior_file);
        if (seen[w][i]) {
            throw DataError(where(behavior_file, row) + "duplicate behavior value for actor " +
                            std::to_string(i) + " at wave " + std::to_string(w + 1));
        }
        if (value < 0) {
            throw DataError(where(behavior_file, row) + "negative behavior value");
        }
        if (config.values == BehaviorValues::levels && (value < 1 || value > config.n_levels)) {
            throw DataError(where(behavior_file, row) + "level " + std::to_string(value) +
                            " out of [1, " + std::to_string(config.n_levels) + "]");
        }
        seen[w][i] = true;
        data.raw_values[w][i] = value;
    }
    for (std::size_t w = 0; w < n_waves; ++w) {
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
            if (!seen[w][i]) {
                throw DataError(behavior_file.string() + ": missing value for actor " +
                                std::to_string(i) + " at wave " + std::to_string(w + 1));
            }
        }
    }
    if (config.values == BehaviorValues::counts) {
        auto binning = bin_counts_to_levels(data.raw_values, config.n_levels, config.binning);
        data.behaviors = std::move(binning.levels);
        data.breakpoints = std::move(binning.breakpoints);
    } else {
        data.behaviors.resize(n_waves);
        for (std::size_t w = 0; w < n_waves; ++w) {
            data.behaviors[w].assign(data.raw_values[w].begin(), data.raw_values[w].end());
        }
    }

    if (covariate_file) {
        const auto rows = read_csv(*covariate_file, {"actor", "gender", "age", "tenure_days"});
        data.covariates = CovariateTable::zeros(n);
        std::vector<bool> have(static_cast<std::size_t>(n), false);
        for (const auto& row : rows) {
            const auto actor = parse_int(row, 0, *covariate_file);
            if (actor < 0 || actor >= n) {
                throw DataError(where(*covariate_file, row) + "unknown actor id " +
                                std::to_string(actor));
            }
            const auto i = static_cast<std::size_t>(actor);
            if (have[i]) {
                throw DataError(where(*covariate_file, row) + "duplicate covariate row for actor " +
                                std::to_string(actor));
            }
            have[i] = true;
            data.covariates.gender[i] = parse_int(row, 1, *covariate_file);
            data.covariates.age[i] = parse_int(row, 2, *covariate_file);
            data.covariates.tenure_days[i] = parse_int(row, 3, *covariate_file);
        }
        for (std::size_t i = 0; i < have.size(); ++i) {
            if (!have[i]) {
                throw DataError(covariate_file->string() + ": missing covariates for actor " +
                                std::to_string(i));
            }
        }
    } else {
        data.covariates = CovariateTable::zeros(n);
    }

    data.networks.assign(n_waves, Network(n));
    for (const auto& row : read_csv(edge_file, {"wave", "src", "dst"})) {
        const auto wave = parse_int(row, 0, edge_file);
        const auto src = parse_int(row, 1, edge_file);
        const auto dst = parse_int(row, 2, edge_file);
        if (wave < 1 || wave > max_wave) {
            throw DataError(where(edge_file, row) + "wave " + std::to_string(wave) +
                            " outside 1.." + std::to_string(max_wave));
        }
        for (const auto id : {src, dst}) {
            if (id < 0 || id >= n) {
                throw DataError(where(edge_file, row) + "unknown actor id " + std::to_string(id));
            }
        }
        if (src == dst) {
            throw DataError(where(edge_file, row) + "self-loop on actor " + std::to_string(src));
        }
        auto& net = data.networks[static_cast<std::size_t>(wave - 1)];
        if (!net.add_tie(static_cast<ActorId>(src), static_cast<ActorId>(dst))) {
            throw DataError(where(edge_file, row) + "duplicate edge (" + std::to_string(src) + "," +
                            std::to_string(dst) + ") at wave " + std::to_string(wave));
        }
    }

    data.validate();
    return data;
}

Binning bin_counts_to_levels(const std::vector<std::vector<std::int64_t>>& raw_counts, int n_levels,
                             BinningMode mode) {
    if (n_levels < 2) {
        throw std::invalid_argument("binning needs at least two levels");
    }
    const auto breakpoints_for = [n_levels](std::vector<std::int64_t> sample) {
        std::sort(sample.begin(), sample.end());
        std::vector<std::int64_t> distinct = sample;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() > 1 && distinct.size() < static_cast<std::size_t>(n_levels)) {
            throw DataError("only " + std::to_string(distinct.size()) +
                            " distinct behavior values for " + std::to_string(n_levels) +
                            " levels; use n_levels <= " + std::to_string(distinct.size()));
        }
        std::vector<std::int64_t> cuts;
        for (int k = 1; k < n_levels; ++k) {
            cuts.push_back(nearest_rank(sample, static_cast<double>(k) / n_levels));
        }
        return cuts;
    };

    Binning out;
    for (const auto& wave : raw_counts) {
        for (const auto v : wave) {
            if (v < 0) {
                throw DataError("negative behavior count " + std::to_string(v));
            }
        }
    }
    if (mode == BinningMode::pooled) {
        std::vector<std::int64_t> pooled;
        for (const auto& wave : raw_counts) {
            pooled.insert(pooled.end(), wave.begin(), wave.end());
        }
        if (pooled.empty()) {
            throw DataError("no behavior values to bin");
        }
        out.breakpoints.push_back(breakpoints_for(std::move(pooled)));
    } else {
        for (const auto& wave : raw_counts) {
            if (wave.empty()) {
                throw DataError("no behavior values to bin");
            }
            out.breakpoints.push_back(breakpoints_for(wave));
        }
    }
    out.levels.resize(raw_counts.size());
    for (std::size_t w = 0; w < raw_counts.size(); ++w) {
        const auto& cuts = out.breakpoints[mode == BinningMode::pooled ? 0 : w];
        out.levels[w].reserve(raw_counts[w].size());
        for (const auto v : raw_counts[w]) {
            const auto above = std::count_if(cuts.begin(), cuts.end(),
                                             [v](std::int64_t c) { return v > c; });
            out.levels[w].push_back(1 + static_cast<int>(above));
        }
    }
    return out;
}

NetworkSummary summarize_network(const Network& network) {
    NetworkSummary s;
    const double n = network.size();
    s.tie_count = network.tie_count();
    const double pairs = n * (n - 1.0) / 2.0;
    s.density = pairs > 0 ? static_cast<double>(s.tie_count) / pairs : 0.0;
    s.average_degree = n > 0 ? 2.0 * static_cast<double>(s.tie_count) / n : 0.0;
    return s;
}

std::vector<NetworkSummary> describe_network(const PanelDataset& dataset) {
    std::vector<NetworkSummary> out;
    for (const auto& net : dataset.networks) {
        out.push_back(summarize_network(net));
    }
    return out;
}

std::optional<double> jaccard_index(std::int64_t n01, std::int64_t n10, std::int64_t n11) {
    const auto denom = n01 + n10 + n11;
    if (denom == 0) {
        return std::nullopt;
    }
    return static_cast<double>(n11) / static_cast<double>(denom);
}

NetworkChange compare_networks(const Network& from, const Network& to) {
    if (from.size() != to.size()) {
        throw std::invalid_argument("networks have different actor sets");
    }
    NetworkChange c;
    const ActorId n = from.size();
    for (ActorId i = 0; i < n; ++i) {
        for (ActorId j : from.neighbors(i)) {
            if (i < j) {
                (to.has_tie(i, j) ? c.n11 : c.n10) += 1;
            }
        }
        for (ActorId j : to.neighbors(i)) {
            if (i < j && !from.has_tie(i, j)) {
                c.n01 += 1;
            }
        }
    }
    const std::int64_t pairs = static_cast<std::int64_t>(n) * (n - 1) / 2;
    c.n00 = pairs - c.n01 - c.n10 - c.n11;
    c.jaccard = jaccard_index(c.n01, c.n10, c.n11);
    return c;
}

std::vector<NetworkChange> network_change_table(const PanelDataset& dataset) {
    std::vector<NetworkChange> out;
    for (int m = 0; m < dataset.n_periods(); ++m) {
        out.push_back(compare_networks(dataset.networks[m], dataset.networks[m + 1]));
    }
    return out;
}

BehaviorChange compare_behavior(std::span<const int> from, std::span<const int> to) {
    if (from.size() != to.size()) {
        throw std::invalid_argument("behavior waves have different actor sets");
    }
    BehaviorChange c;
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (to[i] < from[i]) {
            ++c.n_decrease;
        } else if (to[i] > from[i]) {
            ++c.n_increase;
        } else {
            ++c.n_constant;
        }
    }
    return c;
}

std::vector<std::int64_t> level_histogram(std::span<const int> levels, int n_levels) {
    std::vector<std::int64_t> h(static_cast<std::size_t>(n_levels), 0);
    for (const int level : levels) {
        if (level < 1 || level > n_levels) {
            throw std::invalid_argument("level outside [1, L]");
        }
        ++h[static_cast<std::size_t>(level - 1)];
    }
    return h;
}

BehaviorChangeTable behavior_change_table(const PanelDataset& dataset) {
    BehaviorChangeTable t;
    for (int m = 0; m < dataset.n_periods(); ++m) {
        t.periods.push_back(compare_behavior(dataset.behaviors[m], dataset.behaviors[m + 1]));
    }
    t.histogram.assign(static_cast<std::size_t>(dataset.n_levels),
                       std::vector<std::int64_t>(static_cast<std::size_t>(dataset.n_waves()), 0));
    for (int w = 0; w < dataset.n_waves(); ++w) {
        const auto h = level_histogram(dataset.behaviors[w], dataset.n_levels);
        for (std::size_t l = 0; l < h.size(); ++l) {
            t.histogram[l][static_cast<std::size_t>(w)] = h[l];
        }
    }
    return t;
}

std::vector<ActivityLabel> classify_activity(std::span<const int> levels,
                                             const ActivityCutoffs& cutoffs) {
    std::vector<ActivityLabel> labels(levels.size(), ActivityLabel::moderate);
    if (levels.empty()) {
        return labels;
    }
    std::vector<int> sorted(levels.begin(), levels.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    const auto rank = [&](double fraction) {
        auto r = static_cast<std::size_t>(std::ceil(fraction * n - 1e-9));
        return std::clamp<std::size_t>(r, 1, sorted.size());
    };
    const int low_cut = sorted[rank(cutoffs.least_active) - 1];
    const int high_cut = sorted[sorted.size() - rank(1.0 - cutoffs.most_active)];
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const bool high = levels[i] >= high_cut;
        const bool low = levels[i] <= low_cut;
        if (high && !low) {
            labels[i] = ActivityLabel::most_active;
        } else if (low && !high) {
            labels[i] = ActivityLabel::least_active;
        }
    }
    return labels;
}

} // namespace coevo
