#include "coevo/cli.h"

#include "coevo/baselines.h"
#include "coevo/estimator.h"
#include "coevo/io.h"
#include "coevo/oracle.h"
#include "coevo/report.h"
#include "coevo/simulator.h"
#include "coevo/synthesize.h"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

namespace coevo::cli {

namespace {

namespace fs = std::filesystem;

struct DataArgs {
    std::string edges;
    std::string behavior;
    std::string covariates;
    std::string data_config;

    void add_to(CLI::App& app) {
        app.add_option("--edges", edges, "edge list CSV (wave,src,dst)")
            ->required()
            ->check(CLI::ExistingFile);
        app.add_option("--behavior", behavior, "behavior CSV (wave,actor,value)")
            ->required()
            ->check(CLI::ExistingFile);
        app.add_option("--covariates", covariates, "covariate CSV (actor,gender,age,tenure_days)")
            ->check(CLI::ExistingFile);
        app.add_option("--data-config", data_config, "data config JSON")->check(CLI::ExistingFile);
    }

    PanelDataset load() const {
        const DataConfig config =
            data_config.empty() ? DataConfig{} : io::data_config_from_json(io::read_json(data_config));
        std::optional<fs::path> cov;
        if (!covariates.empty()) {
            cov = covariates;
        }
        return load_dataset(edges, behavior, cov, config);
    }
};

struct Common {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out;
};

/// Accepts an effects object or a parameter file that embeds one.
EffectSpec load_effects(const std::string& path) {
    const auto j = io::read_json(path);
    if (j.is_object() && j.contains("effects")) {
        return io::effect_spec_from_json(j.at("effects"));
    }
    return io::effect_spec_from_json(j);
}

io::ModelParameters load_parameters(const std::string& path, const PanelDataset& dataset) {
    auto m = io::model_parameters_from_json(io::read_json(path));
    if (m.params.n_periods() != dataset.n_periods()) {
        throw DataError(path + ": parameters cover " + std::to_string(m.params.n_periods()) +
                        " periods but the data have " + std::to_string(dataset.n_periods()));
    }
    return m;
}

void emit(const Common& common, const std::string& file, const std::string& text, std::ostream& out) {
    out << text;
    if (!common.out.empty()) {
        io::write_text_atomic(fs::path(common.out) / file, text);
    }
}

int cmd_describe(const DataArgs& data, const Common& common, std::ostream& out) {
    const auto dataset = data.load();
    std::string text = report::network_descriptives(dataset).render() + "\n" +
                       report::network_changes(dataset).render() + "\n" +
                       report::behavior_distribution(dataset).render() + "\n" +
                       report::behavior_changes(dataset).render();
    emit(common, "describe.txt", text, out);
    return success;
}

int cmd_synthesize(const std::string& config_path, const Common& common, std::ostream& out) {
    const GeneratorConfig config = config_path.empty()
                                       ? recovery_fixture()
                                       : io::generator_config_from_json(io::read_json(config_path));
    const auto dataset = synthesize_dataset(config, common.seed);
    const fs::path dir = common.out;
    io::write_dataset(dataset, dir);
    DataConfig dc;
    dc.n_levels = config.n_levels;
    dc.values = BehaviorValues::levels;
    io::write_json_atomic(dir / "data_config.json", io::to_json(dc));
    io::write_json_atomic(dir / "true_params.json", io::to_json(config.spec, config.params));
    out << "wrote " << dataset.n_actors << " actors x " << dataset.n_waves() << " waves to "
        << dir.string() << "\n";
    return success;
}

int cmd_simulate(const DataArgs& data, const std::string& params_path, int replications,
                 bool trace, const Common& common, std::ostream& out) {
    const auto dataset = data.load();
    const auto m = load_parameters(params_path, dataset);
    const PanelModel model(dataset, m.spec);
    std::vector<std::vector<SimulatedWave>> runs;
    std::vector<SimulationTrace> traces;
    for (int r = 0; r < replications; ++r) {
        Rng rng = Rng::stream(common.seed, static_cast<std::uint64_t>(r));
        runs.push_back(simulate_panel(model, m.params, rng, r == 0 && trace ? &traces : nullptr));
    }
    const fs::path dir = common.out;
    io::write_simulated_waves(runs, dir);
    for (std::size_t p = 0; p < traces.size(); ++p) {
        io::write_text_atomic(dir / ("trace_period" + std::to_string(p + 1) + ".csv"),
                              io::format_trace(traces[p]));
    }
    std::ostringstream text;
    text << "Simulated ties by wave (each wave from the observed preceding wave)\n";
    for (int w = 1; w < dataset.n_waves(); ++w) {
        double mean = 0.0;
        for (const auto& run : runs) {
            mean += static_cast<double>(run[static_cast<std::size_t>(w - 1)].network.tie_count());
        }
        mean /= static_cast<double>(runs.size());
        text << "wave " << w + 1 << ": mean ties " << report::fixed(mean, 2) << " (observed "
             << dataset.networks[static_cast<std::size_t>(w)].tie_count() << ")\n";
    }
    out << text.str();
    return success;
}

int cmd_estimate(const DataArgs& data, const std::string& effects_path,
                 const std::string& config_path, const Common& common, std::ostream& out) {
    const auto dataset = data.load();
    const auto spec = load_effects(effects_path);
    EstimationConfig config =
        config_path.empty() ? EstimationConfig{}
                            : io::estimation_config_from_json(io::read_json(config_path));
    config.seed = common.seed;
    config.threads = common.threads;
    const auto result = estimate(dataset, spec, config);

    std::string text = report::estimation_table(result, spec).render() + "\n" +
                       report::convergence_table(result.diagnostics).render();
    text += "max |t-ratio| = " + report::fixed(result.max_abs_t, 4) +
            (result.converged ? " (converged)\n" : " (NOT converged)\n");
    if (result.standard_error_failure) {
        text += "standard errors unavailable: " + *result.standard_error_failure + "\n";
    }
    emit(common, "estimate.txt", text, out);
    if (!common.out.empty()) {
        io::write_json_atomic(fs::path(common.out) / "estimate.json", io::to_json(result, spec));
    }
    return result.converged ? success : not_converged;
}

int cmd_check(const DataArgs& data, const std::string& params_path, int n_check, double tau,
              const Common& common, std::ostream& out) {
    const auto dataset = data.load();
    const auto m = load_parameters(params_path, dataset);
    const PanelModel model(dataset, m.spec);
    const auto report =
        convergence_check(model, m.params, n_check, common.seed, common.threads, tau);
    std::string text = report::convergence_table(report.statistics).render();
    text += "max |t-ratio| = " + report::fixed(report.max_abs_t, 4) +
            (report.converged ? " (converged)\n" : " (NOT converged)\n");
    emit(common, "check.txt", text, out);
    if (!common.out.empty()) {
        io::write_json_atomic(fs::path(common.out) / "check.json", io::to_json(report));
    }
    return report.converged ? success : not_converged;
}

int cmd_baseline(const DataArgs& data, const std::string& model, const Common& common,
                 std::ostream& out) {
    const auto dataset = data.load();
    const auto panel = build_regression_panel(dataset);
    std::vector<BaselineResult> results;
    if (model == "ols" || model == "both") {
        results.push_back(fe_ols(panel));
    }
    if (model == "poisson" || model == "both") {
        results.push_back(fe_poisson(panel));
    }
    std::string text = report::baseline_table(results).render();
    for (const auto& r : results) {
        for (const auto& note : r.notes) {
            text += r.model + ": " + note + "\n";
        }
    }
    emit(common, "baseline.txt", text, out);
    if (!common.out.empty()) {
        io::json j = io::json::array();
        for (const auto& r : results) {
            j.push_back(io::to_json(r));
        }
        io::write_json_atomic(fs::path(common.out) / "baseline.json", j);
    }
    return success;
}

/// Monte Carlo end-state frequencies against the exact chain for a random
/// small instance.
int cmd_check_oracle(int n_actors, int n_levels, int replications, const Common& common,
                     std::ostream& out) {
    Rng rng = Rng::stream(common.seed, 7);
    EffectSpec spec;
    spec.network = {{NetworkEffectKind::out_degree, std::nullopt},
                    {NetworkEffectKind::behavior_similarity, std::nullopt}};
    spec.behavior = {{BehaviorEffectKind::linear_tendency, std::nullopt},
                     {BehaviorEffectKind::influence_similarity, std::nullopt}};
    ParameterVector params = ParameterVector::zeros(1, spec);
    params.rho_network[0] = 0.5 + 1.5 * rng.uniform();
    params.rho_behavior[0] = 0.5 + 1.5 * rng.uniform();
    for (auto& b : params.beta_network) b = -1.0 + 2.0 * rng.uniform();
    for (auto& b : params.beta_behavior) b = -1.0 + 2.0 * rng.uniform();

    const oracle::StateSpace space(n_actors, n_levels);
    const auto start = rng.below(space.size());
    const Network net = space.network_at(start);
    const auto beh = space.behavior_at(start);
    const auto covariates = CovariateTable::zeros(n_actors);
    const auto labels = classify_activity(beh);
    const StatisticContext ctx(spec, covariates, n_levels, labels);
    const auto q = oracle::build_intensity_matrix(space, params, 0, ctx);
    const auto exact = oracle::transition_distribution(q, start);

    std::vector<double> freq(space.size(), 0.0);
    for (int r = 0; r < replications; ++r) {
        Rng sim = Rng::stream(common.seed, 8, static_cast<std::uint64_t>(r));
        const auto outcome = simulate_period(net, beh, params, 0, ctx, sim);
        freq[space.index_of(outcome.state.network, outcome.state.behavior)] += 1.0;
    }
    double max_z = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s) {
        const double p = exact(static_cast<Eigen::Index>(s));
        const double phat = freq[s] / replications;
        const double se = std::sqrt(std::max(p * (1 - p), 1e-300) / replications);
        if (p > 0.0) {
            max_z = std::max(max_z, std::abs(phat - p) / se);
        } else if (phat > 0.0) {
            max_z = std::numeric_limits<double>::infinity();
        }
    }
    out << "states " << space.size() << ", replications " << replications << ", max |z| "
        << report::fixed(max_z, 3) << "\n";
    return max_z <= 4.5 ? success : not_converged;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Network and behavior co-evolution: simulation, estimation and baselines", "coevo"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub, bool seed_required, bool out_required) {
        auto* seed = sub->add_option("--seed", common.seed, "random seed");
        if (seed_required) {
            seed->required();
        }
        sub->add_option("--threads", common.threads, "worker thread cap")
            ->check(CLI::Range(1u, 1024u));
        auto* o = sub->add_option("--out", common.out, "output directory");
        if (out_required) {
            o->required();
        }
    };

    DataArgs data;
    std::string params_path;
    std::string effects_path;
    std::string config_path;
    std::string baseline_model = "both";
    int n_check = 1000;
    int replications = 1;
    bool trace = false;
    double tau = 0.1;
    int oracle_actors = 3;
    int oracle_levels = 2;
    int oracle_reps = 100000;

    auto* describe = app.add_subcommand("describe", "descriptive network and behavior tables");
    data.add_to(*describe);
    add_common(describe, false, false);

    auto* synthesize = app.add_subcommand("synthesize", "generate a synthetic panel");
    synthesize->add_option("--config", config_path, "generator config JSON")
        ->check(CLI::ExistingFile);
    add_common(synthesize, true, true);

    auto* simulate = app.add_subcommand("simulate", "conditional simulation of waves 2..T");
    data.add_to(*simulate);
    simulate->add_option("--params", params_path, "parameter JSON")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--replications", replications, "independent simulated panels")
        ->check(CLI::Range(1, 1000000));
    simulate->add_flag("--trace", trace, "write the event trace of the first replication");
    add_common(simulate, true, true);

    auto* estimate_cmd = app.add_subcommand("estimate", "method-of-moments estimation");
    data.add_to(*estimate_cmd);
    estimate_cmd->add_option("--effects", effects_path, "effects JSON (or a parameter file)")
        ->required()
        ->check(CLI::ExistingFile);
    estimate_cmd->add_option("--config", config_path, "estimation config JSON")
        ->check(CLI::ExistingFile);
    add_common(estimate_cmd, true, false);

    auto* check = app.add_subcommand("check", "convergence check at given parameters");
    data.add_to(*check);
    check->add_option("--params", params_path, "parameter JSON")
        ->required()
        ->check(CLI::ExistingFile);
    check->add_option("--n-check", n_check, "simulations")->check(CLI::Range(2, 100000000));
    check->add_option("--tau", tau, "t-ratio threshold")->check(CLI::PositiveNumber);
    add_common(check, true, false);

    auto* baseline = app.add_subcommand("baseline", "fixed-effects regression baselines");
    data.add_to(*baseline);
    baseline->add_option("--model", baseline_model, "ols, poisson or both")
        ->check(CLI::IsMember({"ols", "poisson", "both"}));
    add_common(baseline, false, false);

    auto* oracle_cmd = app.add_subcommand("check-oracle", "simulator against the exact chain");
    oracle_cmd->add_option("--n-actors", oracle_actors)->check(CLI::Range(1, 4));
    oracle_cmd->add_option("--levels", oracle_levels)->check(CLI::Range(2, 3));
    oracle_cmd->add_option("--replications", oracle_reps)->check(CLI::Range(1, 100000000));
    add_common(oracle_cmd, false, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return success;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return success;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }

    try {
        if (describe->parsed()) return cmd_describe(data, common, out);
        if (synthesize->parsed()) return cmd_synthesize(config_path, common, out);
        if (simulate->parsed()) {
            return cmd_simulate(data, params_path, replications, trace, common, out);
        }
        if (estimate_cmd->parsed()) {
            return cmd_estimate(data, effects_path, config_path, common, out);
        }
        if (check->parsed()) return cmd_check(data, params_path, n_check, tau, common, out);
        if (baseline->parsed()) return cmd_baseline(data, baseline_model, common, out);
        if (oracle_cmd->parsed()) {
            return cmd_check_oracle(oracle_actors, oracle_levels, oracle_reps, common, out);
        }
    } catch (const EstimationDiverged& e) {
        err << "error: " << e.what() << "\n";
        return not_converged;
    } catch (const BaselineError& e) {
        err << "error: " << e.what() << "\n";
        return not_converged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }
    return input_error;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace coevo::cli
