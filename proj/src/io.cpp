#include "coevo/io.h"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace coevo::io {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    if (!j.is_object()) {
        throw DataError(what + ": expected a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            throw DataError(what + ": unknown key \"" + key + "\"");
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& what) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DataError(what + ": bad value for \"" + key + "\": " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key)) {
        throw DataError(what + ": missing \"" + key + "\"");
    }
    return get_or<T>(j, key, T{}, what);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::pair<std::string, std::optional<Covariate>> split_effect(const std::string& name) {
    const auto open = name.find('(');
    if (open == std::string::npos) {
        return {name, std::nullopt};
    }
    if (name.back() != ')') {
        throw DataError("malformed effect name \"" + name + "\"");
    }
    try {
        return {name.substr(0, open),
                covariate_from_string(name.substr(open + 1, name.size() - open - 2))};
    } catch (const std::invalid_argument& e) {
        throw DataError("effect \"" + name + "\": " + e.what());
    }
}

} // namespace

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(path.string() + ": cannot open file");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error(tmp.string() + ": cannot open for writing");
        }
        out << content;
        if (!out.flush()) {
            throw std::runtime_error(tmp.string() + ": write failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_json_atomic(const std::filesystem::path& path, const json& value) {
    write_text_atomic(path, value.dump(2) + "\n");
}

json to_json(const DataConfig& config) {
    return json{{"n_levels", config.n_levels},
                {"values", config.values == BehaviorValues::counts ? "counts" : "levels"},
                {"binning", config.binning == BinningMode::pooled ? "pooled" : "per_wave"},
                {"least_active", config.cutoffs.least_active},
                {"most_active", config.cutoffs.most_active}};
}

DataConfig data_config_from_json(const json& j) {
    const std::string what = "data config";
    check_keys(j, {"n_levels", "values", "binning", "least_active", "most_active"}, what);
    DataConfig c;
    c.n_levels = get_or(j, "n_levels", c.n_levels, what);
    const auto values = get_or<std::string>(j, "values", "counts", what);
    if (values == "counts") {
        c.values = BehaviorValues::counts;
    } else if (values == "levels") {
        c.values = BehaviorValues::levels;
    } else {
        throw DataError(what + ": values must be \"counts\" or \"levels\"");
    }
    const auto binning = get_or<std::string>(j, "binning", "pooled", what);
    if (binning == "pooled") {
        c.binning = BinningMode::pooled;
    } else if (binning == "per_wave") {
        c.binning = BinningMode::per_wave;
    } else {
        throw DataError(what + ": binning must be \"pooled\" or \"per_wave\"");
    }
    c.cutoffs.least_active = get_or(j, "least_active", c.cutoffs.least_active, what);
    c.cutoffs.most_active = get_or(j, "most_active", c.cutoffs.most_active, what);
    return c;
}

NetworkEffect parse_network_effect(const std::string& name) {
    const auto [kind, covariate] = split_effect(name);
    try {
        return {network_kind_from_string(kind), covariate};
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
}

BehaviorEffect parse_behavior_effect(const std::string& name) {
    const auto [kind, covariate] = split_effect(name);
    try {
        return {behavior_kind_from_string(kind), covariate};
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
}

json to_json(const EffectSpec& spec) {
    json net = json::array();
    json beh = json::array();
    for (const auto& e : spec.network) {
        net.push_back(effect_name(e));
    }
    for (const auto& e : spec.behavior) {
        beh.push_back(effect_name(e));
    }
    return json{{"network", net}, {"behavior", beh}};
}

EffectSpec effect_spec_from_json(const json& j) {
    const std::string what = "effects";
    check_keys(j, {"network", "behavior"}, what);
    EffectSpec spec;
    for (const auto& name : get_or<std::vector<std::string>>(j, "network", {}, what)) {
        spec.network.push_back(parse_network_effect(name));
    }
    for (const auto& name : get_or<std::vector<std::string>>(j, "behavior", {}, what)) {
        spec.behavior.push_back(parse_behavior_effect(name));
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(what + ": " + e.what());
    }
    return spec;
}

json to_json(const EffectSpec& spec, const ParameterVector& params) {
    return json{{"effects", to_json(spec)},
                {"rho_network", params.rho_network},
                {"rho_behavior", params.rho_behavior},
                {"beta_network", params.beta_network},
                {"beta_behavior", params.beta_behavior}};
}

ModelParameters model_parameters_from_json(const json& j) {
    const std::string what = "parameters";
    check_keys(j, {"effects", "rho_network", "rho_behavior", "beta_network", "beta_behavior"},
               what);
    ModelParameters m;
    m.spec = effect_spec_from_json(require<json>(j, "effects", what));
    m.params.rho_network = require<std::vector<double>>(j, "rho_network", what);
    m.params.rho_behavior = require<std::vector<double>>(j, "rho_behavior", what);
    m.params.beta_network = get_or<std::vector<double>>(j, "beta_network", {}, what);
    m.params.beta_behavior = get_or<std::vector<double>>(j, "beta_behavior", {}, what);
    try {
        m.params.validate(m.params.n_periods(), m.spec);
    } catch (const std::invalid_argument& e) {
        throw DataError(what + ": " + e.what());
    }
    return m;
}

json to_json(const EstimationConfig& c) {
    return json{{"gain_a", c.gain_a},         {"gain_b", c.gain_b},
                {"n_pilot", c.n_pilot},       {"n_main", c.n_main},
                {"n_check", c.n_check},       {"n_jacobian", c.n_jacobian},
                {"replications", c.replications}, {"seed", c.seed},
                {"tau", c.tau},               {"max_abs_parameter", c.max_abs_parameter},
                {"rate_floor", c.rate_floor}, {"fd_relative", c.fd_relative},
                {"fd_absolute", c.fd_absolute}};
}

EstimationConfig estimation_config_from_json(const json& j) {
    const std::string what = "estimation config";
    check_keys(j,
               {"gain_a", "gain_b", "n_pilot", "n_main", "n_check", "n_jacobian", "replications",
                "seed", "tau", "max_abs_parameter", "rate_floor", "fd_relative", "fd_absolute"},
               what);
    EstimationConfig c;
    c.gain_a = get_or(j, "gain_a", c.gain_a, what);
    c.gain_b = get_or(j, "gain_b", c.gain_b, what);
    c.n_pilot = get_or(j, "n_pilot", c.n_pilot, what);
    c.n_main = get_or(j, "n_main", c.n_main, what);
    c.n_check = get_or(j, "n_check", c.n_check, what);
    c.n_jacobian = get_or(j, "n_jacobian", c.n_jacobian, what);
    c.replications = get_or(j, "replications", c.replications, what);
    c.seed = get_or(j, "seed", c.seed, what);
    c.tau = get_or(j, "tau", c.tau, what);
    c.max_abs_parameter = get_or(j, "max_abs_parameter", c.max_abs_parameter, what);
    c.rate_floor = get_or(j, "rate_floor", c.rate_floor, what);
    c.fd_relative = get_or(j, "fd_relative", c.fd_relative, what);
    c.fd_absolute = get_or(j, "fd_absolute", c.fd_absolute, what);
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(what + ": " + e.what());
    }
    return c;
}

json to_json(const GeneratorConfig& c) {
    return json{{"n_actors", c.n_actors},
                {"n_waves", c.n_waves},
                {"n_levels", c.n_levels},
                {"density", c.density},
                {"covariates", c.covariates},
                {"parameters", to_json(c.spec, c.params)}};
}

GeneratorConfig generator_config_from_json(const json& j) {
    const std::string what = "generator config";
    check_keys(j, {"n_actors", "n_waves", "n_levels", "density", "covariates", "parameters"}, what);
    GeneratorConfig c = recovery_fixture();
    c.n_actors = get_or(j, "n_actors", c.n_actors, what);
    c.n_waves = get_or(j, "n_waves", c.n_waves, what);
    c.n_levels = get_or(j, "n_levels", c.n_levels, what);
    c.density = get_or(j, "density", c.density, what);
    c.covariates = get_or(j, "covariates", c.covariates, what);
    if (j.contains("parameters")) {
        auto m = model_parameters_from_json(j.at("parameters"));
        c.spec = std::move(m.spec);
        c.params = std::move(m.params);
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(what + ": " + e.what());
    }
    return c;
}

json to_json(const ConvergenceReport& report) {
    json stats = json::array();
    for (const auto& s : report.statistics) {
        stats.push_back(json{{"statistic", s.name},
                             {"target", s.target},
                             {"mean_deviation", s.mean_deviation},
                             {"sd_deviation", s.sd_deviation},
                             {"t_ratio", number_or_null(s.t_ratio)},
                             {"non_stochastic", s.non_stochastic}});
    }
    return json{{"converged", report.converged},
                {"max_abs_t", report.max_abs_t},
                {"replications", report.samples.size()},
                {"statistics", stats}};
}

json to_json(const EstimationResult& r, const EffectSpec& spec) {
    const auto initial = r.initial.flatten();
    const auto theta = r.theta_hat.flatten();
    json params = json::array();
    for (std::size_t k = 0; k < r.parameter_names.size(); ++k) {
        params.push_back(json{{"name", r.parameter_names[k]},
                              {"label", r.parameter_labels[k]},
                              {"initial", initial[k]},
                              {"estimate", theta[k]},
                              {"standard_error", number_or_null(r.standard_errors[k])},
                              {"inestimable", static_cast<bool>(r.inestimable[k])},
                              {"stars", significance_stars(theta[k], r.standard_errors[k])}});
    }
    json diag = json::array();
    for (const auto& s : r.diagnostics) {
        diag.push_back(json{{"statistic", s.name},
                            {"target", s.target},
                            {"mean_deviation", s.mean_deviation},
                            {"sd_deviation", s.sd_deviation},
                            {"t_ratio", number_or_null(s.t_ratio)},
                            {"non_stochastic", s.non_stochastic}});
    }
    return json{{"converged", r.converged},
                {"max_abs_t", r.max_abs_t},
                {"standard_error_failure",
                 r.standard_error_failure ? json(*r.standard_error_failure) : json(nullptr)},
                {"parameters", params},
                {"estimate", to_json(spec, r.theta_hat)},
                {"convergence", diag}};
}

json to_json(const BaselineResult& r) {
    json terms = json::array();
    for (const auto& t : r.terms) {
        terms.push_back(json{{"name", t.name},
                             {"omitted", t.omitted},
                             {"estimate", number_or_null(t.estimate)},
                             {"standard_error", number_or_null(t.standard_error)}});
    }
    return json{{"model", r.model},
                {"observations", r.n_observations},
                {"groups", r.n_groups},
                {"dropped_actors", r.dropped_actors},
                {"notes", r.notes},
                {"fit", r.fit},
                {"iterations", r.iterations},
                {"terms", terms}};
}

namespace {

void append_edges(std::ostringstream& out, int wave, const Network& net) {
    for (ActorId i = 0; i < net.size(); ++i) {
        for (ActorId j : net.neighbors(i)) {
            if (i < j) {
                out << wave << ',' << i << ',' << j << '\n';
            }
        }
    }
}

} // namespace

void write_dataset(const PanelDataset& dataset, const std::filesystem::path& directory) {
    std::ostringstream edges;
    std::ostringstream behavior;
    std::ostringstream covariates;
    edges << "wave,src,dst\n";
    behavior << "wave,actor,value\n";
    covariates << "actor,gender,age,tenure_days\n";
    for (int w = 0; w < dataset.n_waves(); ++w) {
        append_edges(edges, w + 1, dataset.networks[w]);
        for (ActorId i = 0; i < dataset.n_actors; ++i) {
            const auto v = dataset.raw_values.empty()
                               ? static_cast<std::int64_t>(dataset.behaviors[w][i])
                               : dataset.raw_values[w][i];
            behavior << w + 1 << ',' << i << ',' << v << '\n';
        }
    }
    for (ActorId i = 0; i < dataset.n_actors; ++i) {
        covariates << i << ',' << dataset.covariates.gender[i] << ',' << dataset.covariates.age[i]
                   << ',' << dataset.covariates.tenure_days[i] << '\n';
    }
    write_text_atomic(directory / "edges.csv", edges.str());
    write_text_atomic(directory / "behavior.csv", behavior.str());
    write_text_atomic(directory / "covariates.csv", covariates.str());
}

void write_simulated_waves(const std::vector<std::vector<SimulatedWave>>& replications,
                           const std::filesystem::path& directory) {
    std::ostringstream edges;
    std::ostringstream behavior;
    edges << "replication,wave,src,dst\n";
    behavior << "replication,wave,actor,level\n";
    for (std::size_t r = 0; r < replications.size(); ++r) {
        const auto& waves = replications[r];
        for (std::size_t w = 0; w < waves.size(); ++w) {
            const auto wave = w + 2;
            const Network& net = waves[w].network;
            for (ActorId i = 0; i < net.size(); ++i) {
                for (ActorId j : net.neighbors(i)) {
                    if (i < j) {
                        edges << r + 1 << ',' << wave << ',' << i << ',' << j << '\n';
                    }
                }
            }
            for (std::size_t i = 0; i < waves[w].behavior.size(); ++i) {
                behavior << r + 1 << ',' << wave << ',' << i << ',' << waves[w].behavior[i] << '\n';
            }
        }
    }
    write_text_atomic(directory / "simulated_edges.csv", edges.str());
    write_text_atomic(directory / "simulated_behavior.csv", behavior.str());
}

std::string format_trace(const SimulationTrace& trace) {
    std::ostringstream out;
    out.precision(17);
    out << "t,actor,domain,choice\n";
    for (const auto& e : trace) {
        out << e.time << ',' << e.actor << ','
            << (e.domain == Domain::network ? "network" : "behavior") << ',' << e.choice << '\n';
    }
    return out.str();
}

} // namespace coevo::io
