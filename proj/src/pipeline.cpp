#include "lmsurf/pipeline.hpp"

namespace lmsurf {

MaterialGrid build_grid(const SimulationSetup& setup) {
    setup.validate();
    RasterOptions opts;
    opts.pml_thickness = setup.solver.pml_thickness;
    opts.cell_budget = setup.cell_budget;
    return rasterize(channel_layout(setup.scenario), setup.scenario, setup.dx, opts);
}

std::uint64_t scenario_hash(const SimulationSetup& setup) {
    return content_hash(canonical_text(setup));
}

FieldMap simulate(const SimulationSetup& setup, const RunHooks* hooks) {
    const MaterialGrid grid = build_grid(setup);
    FieldMap map = run(grid, setup.scenario.source, setup.scenario.f, setup.solver, hooks);
    map.meta.scenario_hash = scenario_hash(setup);
    return map;
}

Metrics compute_metrics(const FieldMap& map, const ChannelScenario& scenario) {
    Metrics m;
    m.isolation = isolation(map, scenario);
    m.path_loss = path_loss_curve(map, scenario, default_smoothing_window(scenario));
    m.level_at_d_db = level_at(m.path_loss, scenario.d);
    return m;
}

SimulationSetup baseline_of(SimulationSetup setup) {
    setup.scenario.n_layers = 0;
    return setup;
}

}  // namespace lmsurf
