// pipeline.hpp - scenario -> layout -> material grid -> solver -> metrics.

#pragma once

#include <cstdint>

#include "lmsurf/analysis.hpp"
#include "lmsurf/scenario_config.hpp"
#include "lmsurf/solver.hpp"

namespace lmsurf {

MaterialGrid build_grid(const SimulationSetup& setup);

/// Runs the full CW simulation and stamps the scenario hash into the map.
FieldMap simulate(const SimulationSetup& setup, const RunHooks* hooks = nullptr);

std::uint64_t scenario_hash(const SimulationSetup& setup);

struct Metrics {
    IsolationReport isolation;
    PathLossCurve path_loss;      // default smoothing window
    double level_at_d_db = 0.0;   // smoothed level at the channel exit
};

Metrics compute_metrics(const FieldMap& map, const ChannelScenario& scenario);

/// Same setup with every cavity left empty.
SimulationSetup baseline_of(SimulationSetup setup);

}  // namespace lmsurf
