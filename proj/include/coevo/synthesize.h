#pragma once

#include "coevo/effects.h"
#include "coevo/panel_data.h"
#include "coevo/simulator.h"

#include <cstdint>

namespace coevo {

/// Synthetic panel generator: a random sparse first wave, then forward
/// simulation with known parameters.
struct GeneratorConfig {
    ActorId n_actors = 60;
    int n_waves = 4;
    int n_levels = 8;
    /// tie probability of the first wave
    double density = 0.1;
    /// draw gender/age/tenure; all zero otherwise
    bool covariates = true;
    EffectSpec spec;
    ParameterVector params;

    /// Throws std::invalid_argument when the configuration cannot be generated.
    void validate() const;
};

/// The spec and parameters used by the recovery experiment.
GeneratorConfig recovery_fixture();

/// Behavior values are emitted as levels (raw_values == behaviors).
PanelDataset synthesize_dataset(const GeneratorConfig& config, std::uint64_t seed);

} // namespace coevo
