#include "coevo/synthesize.h"

#include <stdexcept>

namespace coevo {

void GeneratorConfig::validate() const {
    if (n_actors < 2) {
        throw std::invalid_argument("need at least two actors");
    }
    if (n_waves < 2) {
        throw std::invalid_argument("need at least two waves");
    }
    if (n_levels < 2) {
        throw std::invalid_argument("need at least two behavior levels");
    }
    if (!(density >= 0.0) || !(density < 1.0)) {
        throw std::invalid_argument("first-wave density must lie in [0, 1)");
    }
    spec.validate();
    params.validate(n_waves - 1, spec);
}

GeneratorConfig recovery_fixture() {
    GeneratorConfig config;
    config.n_actors = 60;
    config.n_waves = 4;
    config.n_levels = 8;
    config.density = 0.1;
    config.covariates = false;
    config.spec.network = {{NetworkEffectKind::out_degree, std::nullopt},
                           {NetworkEffectKind::transitivity, std::nullopt},
                           {NetworkEffectKind::behavior_similarity, std::nullopt}};
    config.spec.behavior = {{BehaviorEffectKind::linear_tendency, std::nullopt},
                            {BehaviorEffectKind::influence_similarity, std::nullopt}};
    config.params.rho_network.assign(3, 4.0);
    config.params.rho_behavior.assign(3, 3.0);
    config.params.beta_network = {-2.0, 0.3, 0.5};
    config.params.beta_behavior = {-0.2, -1.0};
    return config;
}

PanelDataset synthesize_dataset(const GeneratorConfig& config, std::uint64_t seed) {
    config.validate();
    const ActorId n = config.n_actors;
    const auto waves = static_cast<std::size_t>(config.n_waves);
    Rng rng = Rng::stream(seed, 0);

    PanelDataset data;
    data.n_actors = n;
    data.n_levels = config.n_levels;
    data.covariates = CovariateTable::zeros(n);
    if (config.covariates) {
        for (ActorId i = 0; i < n; ++i) {
            data.covariates.gender[i] = static_cast<std::int64_t>(rng.below(2));
            data.covariates.age[i] = 18 + static_cast<std::int64_t>(rng.below(8));
            data.covariates.tenure_days[i] = 30 + static_cast<std::int64_t>(rng.below(1500));
        }
    }

    Network first(n);
    for (ActorId i = 0; i < n; ++i) {
        for (ActorId j = i + 1; j < n; ++j) {
            if (rng.bernoulli(config.density)) {
                first.add_tie(i, j);
            }
        }
    }
    std::vector<int> levels(static_cast<std::size_t>(n));
    for (auto& p : levels) {
        p = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.n_levels)));
    }
    data.networks.push_back(std::move(first));
    data.behaviors.push_back(std::move(levels));

    for (std::size_t m = 0; m + 1 < waves; ++m) {
        const auto labels = classify_activity(data.behaviors[m], data.cutoffs);
        const StatisticContext ctx(config.spec, data.covariates, config.n_levels, labels);
        auto outcome = simulate_period(data.networks[m], data.behaviors[m], config.params,
                                       static_cast<int>(m), ctx, rng);
        data.networks.push_back(std::move(outcome.state.network));
        data.behaviors.push_back(std::move(outcome.state.behavior));
    }
    for (const auto& wave : data.behaviors) {
        data.raw_values.emplace_back(wave.begin(), wave.end());
    }
    data.validate();
    return data;
}

} // namespace coevo
