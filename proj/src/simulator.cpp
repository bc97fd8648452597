#include "coevo/simulator.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coevo {

ParameterVector ParameterVector::zeros(int n_periods, const EffectSpec& spec) {
    const auto periods = static_cast<std::size_t>(n_periods);
    return {std::vector<double>(periods, 0.0), std::vector<double>(periods, 0.0),
            std::vector<double>(spec.network.size(), 0.0),
            std::vector<double>(spec.behavior.size(), 0.0)};
}

std::vector<double> ParameterVector::flatten() const {
    std::vector<double> flat;
    flat.reserve(size());
    for (const auto* part : {&rho_network, &beta_network, &rho_behavior, &beta_behavior}) {
        flat.insert(flat.end(), part->begin(), part->end());
    }
    return flat;
}

ParameterVector ParameterVector::unflatten(std::span<const double> flat, int n_periods,
                                           const EffectSpec& spec) {
    ParameterVector p = zeros(n_periods, spec);
    if (flat.size() != p.size()) {
        throw std::invalid_argument("flat parameter vector has the wrong length");
    }
    std::size_t k = 0;
    for (auto* part : {&p.rho_network, &p.beta_network, &p.rho_behavior, &p.beta_behavior}) {
        for (auto& x : *part) {
            x = flat[k++];
        }
    }
    return p;
}

void ParameterVector::validate(int n_periods, const EffectSpec& spec) const {
    const auto periods = static_cast<std::size_t>(n_periods);
    if (rho_network.size() != periods || rho_behavior.size() != periods) {
        throw std::invalid_argument("expected " + std::to_string(n_periods) +
                                    " rate parameters per side");
    }
    if (beta_network.size() != spec.network.size() ||
        beta_behavior.size() != spec.behavior.size()) {
        throw std::invalid_argument("evaluation weights do not match the effect spec");
    }
    for (const auto* rates : {&rho_network, &rho_behavior}) {
        for (double r : *rates) {
            if (!std::isfinite(r) || r < 0.0) {
                throw std::invalid_argument("rate parameters must be finite and non-negative");
            }
        }
    }
    for (const auto* betas : {&beta_network, &beta_behavior}) {
        for (double b : *betas) {
            if (!std::isfinite(b)) {
                throw std::invalid_argument("evaluation weights must be finite");
            }
        }
    }
}

std::vector<std::string> parameter_names(int n_periods, const EffectSpec& spec) {
    std::vector<std::string> names;
    for (int m = 1; m <= n_periods; ++m) {
        names.push_back("rate_network[" + std::to_string(m) + "]");
    }
    for (const auto& e : spec.network) {
        names.push_back("beta_network:" + effect_name(e));
    }
    for (int m = 1; m <= n_periods; ++m) {
        names.push_back("rate_behavior[" + std::to_string(m) + "]");
    }
    for (const auto& e : spec.behavior) {
        names.push_back("beta_behavior:" + effect_name(e));
    }
    return names;
}

std::vector<std::string> parameter_labels(int n_periods, const EffectSpec& spec) {
    std::vector<std::string> labels;
    for (int m = 1; m <= n_periods; ++m) {
        labels.push_back("Friendship rate (Period " + std::to_string(m) + ")");
    }
    for (const auto& e : spec.network) {
        labels.push_back(effect_label(e));
    }
    for (int m = 1; m <= n_periods; ++m) {
        labels.push_back("Posting rate (Period " + std::to_string(m) + ")");
    }
    for (const auto& e : spec.behavior) {
        labels.push_back(effect_label(e));
    }
    return labels;
}

std::vector<bool> rate_mask(int n_periods, const EffectSpec& spec) {
    std::vector<bool> mask;
    mask.insert(mask.end(), static_cast<std::size_t>(n_periods), true);
    mask.insert(mask.end(), spec.network.size(), false);
    mask.insert(mask.end(), static_cast<std::size_t>(n_periods), true);
    mask.insert(mask.end(), spec.behavior.size(), false);
    return mask;
}

ChainState::ChainState(Network net, std::vector<int> beh, const CovariateTable& covariates)
    : network{std::move(net)}, behavior{std::move(beh)}, clock{0.0},
      cache{network, behavior, covariates} {}

ActorRates actor_rates(const ChainState& state, const ParameterVector& params, int period) {
    if (period < 0 || period >= params.n_periods()) {
        throw std::out_of_range("period index out of range");
    }
    const auto n = static_cast<std::size_t>(state.network.size());
    ActorRates r;
    const double rho_net = params.rho_network[static_cast<std::size_t>(period)];
    const double rho_beh = params.rho_behavior[static_cast<std::size_t>(period)];
    r.network.assign(n, rho_net * std::exp(0.0));
    r.behavior.assign(n, rho_beh * std::exp(0.0));
    r.total = static_cast<double>(n) * (rho_net + rho_beh);
    r.homogeneous = true;
    return r;
}

Event next_event(const ActorRates& rates, double clock, Rng& rng) {
    if (!(rates.total > 0.0)) {
        throw std::invalid_argument("total event rate must be positive");
    }
    Event e;
    e.dt = rng.exponential(rates.total);
    if (clock + e.dt > 1.0) {
        e.ends_period = true;
        return e;
    }
    const std::size_t n = rates.network.size();
    if (rates.homogeneous) {
        const double net_share = rates.network[0] / (rates.network[0] + rates.behavior[0]);
        e.domain = rng.uniform() < net_share ? Domain::network : Domain::behavior;
        e.actor = static_cast<ActorId>(rng.below(n));
        return e;
    }
    double u = rng.uniform() * rates.total;
    for (std::size_t i = 0; i < n; ++i) {
        if (u < rates.network[i]) {
            e.actor = static_cast<ActorId>(i);
            e.domain = Domain::network;
            return e;
        }
        u -= rates.network[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (u < rates.behavior[i] || i + 1 == n) {
            e.actor = static_cast<ActorId>(i);
            e.domain = Domain::behavior;
            return e;
        }
        u -= rates.behavior[i];
    }
    return e;
}

std::vector<double> choice_probabilities(std::span<const double> utilities) {
    if (utilities.empty()) {
        throw std::invalid_argument("choice set is empty");
    }
    const double top = *std::max_element(utilities.begin(), utilities.end());
    std::vector<double> p(utilities.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < utilities.size(); ++k) {
        p[k] = std::exp(utilities[k] - top);
        sum += p[k];
    }
    for (auto& x : p) {
        x /= sum;
    }
    return p;
}

std::size_t sample_choice(std::span<const double> probabilities, Rng& rng) {
    double u = rng.uniform();
    for (std::size_t k = 0; k + 1 < probabilities.size(); ++k) {
        if (u < probabilities[k]) {
            return k;
        }
        u -= probabilities[k];
    }
    return probabilities.size() - 1;
}

namespace {

void network_utilities(ActorId actor, const ChainState& state, std::span<const double> beta,
                       const StatisticContext& ctx, MicroStepWorkspace& ws) {
    if (ws.two_paths.size() != static_cast<std::size_t>(state.network.size())) {
        ws.two_paths.assign(static_cast<std::size_t>(state.network.size()), 0);
    }
    network_choice_gains(actor, state.network, state.behavior, state.cache, beta, ctx, ws.two_paths,
                         ws.choices);
    ws.utilities.clear();
    ws.utilities.push_back(0.0);
    ws.utilities.insert(ws.utilities.end(), ws.choices.gains.begin(), ws.choices.gains.end());
}

void check_actor(ActorId actor, const ChainState& state) {
    if (actor < 0 || actor >= state.network.size()) {
        throw std::out_of_range("actor id out of range");
    }
}

} // namespace

std::vector<double> network_choice_probabilities(ActorId actor, const ChainState& state,
                                                 std::span<const double> beta,
                                                 const StatisticContext& ctx,
                                                 std::vector<ActorId>& targets) {
    check_actor(actor, state);
    MicroStepWorkspace ws(state.network.size());
    network_utilities(actor, state, beta, ctx, ws);
    targets = ws.choices.targets;
    return choice_probabilities(ws.utilities);
}

std::array<double, 3> behavior_choice_probabilities(ActorId actor, const ChainState& state,
                                                    std::span<const double> beta,
                                                    const StatisticContext& ctx) {
    check_actor(actor, state);
    const auto gains =
        behavior_choice_gains(actor, state.network, state.behavior, state.cache, beta, ctx);
    std::vector<double> utilities;
    std::vector<std::size_t> slots;
    for (std::size_t k = 0; k < 3; ++k) {
        if (gains[k]) {
            utilities.push_back(*gains[k]);
            slots.push_back(k);
        }
    }
    const auto p = choice_probabilities(utilities);
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < slots.size(); ++k) {
        out[slots[k]] = p[k];
    }
    return out;
}

ActorId network_micro_step(ActorId actor, ChainState& state, std::span<const double> beta,
                           const StatisticContext& ctx, Rng& rng, MicroStepWorkspace& workspace) {
    check_actor(actor, state);
    network_utilities(actor, state, beta, ctx, workspace);
    if (workspace.utilities.size() == 1) {
        return -1;
    }
    const auto p = choice_probabilities(workspace.utilities);
    const std::size_t pick = sample_choice(p, rng);
    if (pick == 0) {
        return -1;
    }
    const ActorId target = workspace.choices.targets[pick - 1];
    state.network.add_tie(actor, target);
    state.cache.on_tie_added(actor, target, state.network, state.behavior, ctx.covariates());
    return target;
}

int behavior_micro_step(ActorId actor, ChainState& state, std::span<const double> beta,
                        const StatisticContext& ctx, Rng& rng) {
    const auto p = behavior_choice_probabilities(actor, state, beta, ctx);
    const std::size_t pick = sample_choice(p, rng);
    const int delta = static_cast<int>(pick) - 1;
    if (delta != 0) {
        const int old_level = state.behavior[static_cast<std::size_t>(actor)];
        state.behavior[static_cast<std::size_t>(actor)] = old_level + delta;
        state.cache.on_behavior_changed(actor, old_level, state.network, state.behavior);
    }
    return delta;
}

PeriodOutcome simulate_period(const Network& start_network, std::span<const int> start_behavior,
                              const ParameterVector& params, int period,
                              const StatisticContext& ctx, Rng& rng,
                              const SimulationOptions& options) {
    PeriodOutcome out;
    out.state = ChainState(start_network, std::vector<int>(start_behavior.begin(), start_behavior.end()),
                           ctx.covariates());
    ChainState& state = out.state;
    const ActorRates rates = actor_rates(state, params, period);
    if (!(rates.total > 0.0)) {
        state.clock = 1.0;
        return out;
    }
    MicroStepWorkspace ws(state.network.size());
    const auto& beta_net = params.beta_network;
    const auto& beta_beh = params.beta_behavior;
    while (true) {
        const Event e = next_event(rates, state.clock, rng);
        if (e.ends_period) {
            state.clock = 1.0;
            break;
        }
        state.clock += e.dt;
        int choice = 0;
        if (e.domain == Domain::network) {
            choice = network_micro_step(e.actor, state, beta_net, ctx, rng, ws);
            ++out.network_events;
        } else {
            choice = behavior_micro_step(e.actor, state, beta_beh, ctx, rng);
            ++out.behavior_events;
        }
        if (options.trace != nullptr) {
            options.trace->push_back({state.clock, e.actor, e.domain, choice});
        }
        if (options.verify_cache &&
            !(state.cache == StatisticsCache(state.network, state.behavior, ctx.covariates()))) {
            throw std::logic_error("incremental statistics diverged from recomputation");
        }
    }
    return out;
}

PeriodOutcome simulate_period(const Network& start_network, std::span<const int> start_behavior,
                              const ParameterVector& params, int period,
                              const StatisticContext& ctx, std::uint64_t seed,
                              const SimulationOptions& options) {
    Rng rng(seed);
    return simulate_period(start_network, start_behavior, params, period, ctx, rng, options);
}

PanelModel::PanelModel(const PanelDataset& dataset, const EffectSpec& spec)
    : dataset_{&dataset}, spec_{&spec} {
    spec.validate();
    for (int m = 0; m < dataset.n_periods(); ++m) {
        labels_.push_back(period_labels(dataset, m));
    }
}

StatisticContext PanelModel::context(int period) const {
    return StatisticContext(*spec_, dataset_->covariates, dataset_->n_levels,
                            labels_.at(static_cast<std::size_t>(period)));
}

std::vector<SimulatedWave> simulate_panel(const PanelModel& model, const ParameterVector& params,
                                          Rng& rng, std::vector<SimulationTrace>* traces) {
    const PanelDataset& data = model.dataset();
    params.validate(data.n_periods(), model.spec());
    std::vector<SimulatedWave> waves;
    if (traces != nullptr) {
        traces->assign(static_cast<std::size_t>(data.n_periods()), {});
    }
    for (int m = 0; m < data.n_periods(); ++m) {
        const auto ctx = model.context(m);
        SimulationOptions options;
        if (traces != nullptr) {
            options.trace = &(*traces)[static_cast<std::size_t>(m)];
        }
        auto outcome =
            simulate_period(data.networks[m], data.behaviors[m], params, m, ctx, rng, options);
        waves.push_back({std::move(outcome.state.network), std::move(outcome.state.behavior)});
    }
    return waves;
}

std::vector<SimulatedWave> simulate_panel(const PanelDataset& dataset,
                                          const ParameterVector& params, const EffectSpec& spec,
                                          std::uint64_t seed) {
    const PanelModel model(dataset, spec);
    Rng rng(seed);
    return simulate_panel(model, params, rng);
}

MomentVector simulate_statistics(const PanelModel& model, const ParameterVector& params, Rng& rng) {
    const PanelDataset& data = model.dataset();
    MomentVector s = MomentVector::zeros(data.n_periods(), model.spec());
    for (int m = 0; m < data.n_periods(); ++m) {
        const auto ctx = model.context(m);
        const auto outcome =
            simulate_period(data.networks[m], data.behaviors[m], params, m, ctx, rng);
        const ChainState& end = outcome.state;
        const auto ps = period_statistics(data.networks[m], data.behaviors[m], end.network,
                                          end.behavior, ctx);
        s.rate_network[m] = ps.rate_network;
        s.rate_behavior[m] = ps.rate_behavior;
        for (std::size_t k = 0; k < ps.effect_network.size(); ++k) {
            s.effect_network[k] += ps.effect_network[k];
        }
        for (std::size_t k = 0; k < ps.effect_behavior.size(); ++k) {
            s.effect_behavior[k] += ps.effect_behavior[k];
        }
    }
    return s;
}

} // namespace coevo
