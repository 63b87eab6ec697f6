// scenario_config.hpp - flat "key = value" scenario files and the built-in
// presets.
//
// Keys are the ChannelScenario / SurfaceSpec / SourceSpec field names plus the
// solver settings, all in SI units; '#' starts a comment. Unknown keys are
// errors so that a typo cannot silently fall back to a default.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lmsurf/geometry.hpp"
#include "lmsurf/solver.hpp"

namespace lmsurf {

enum class Preset { paper, fast };

Preset preset_from_string(std::string_view name);
std::string_view to_string(Preset p);

struct SimulationSetup {
    ChannelScenario scenario;
    SolverConfig solver;
    double dx = 0.125e-3;
    std::size_t cell_budget = 50'000'000;

    void validate() const;
};

/// `paper`: full 600 mm channel. `fast`: 150 mm channel with narrower margins.
SimulationSetup make_preset(Preset p);

/// Applies every key in `text` on top of `setup`. `origin` names the source in
/// error messages (usually the file path).
void apply_config(SimulationSetup& setup, std::string_view text, const std::string& origin);

/// Keys recognised by apply_config, in canonical order.
const std::vector<std::string>& config_keys();

/// All result-affecting parameters as "key = value" lines (threads excluded).
std::string canonical_text(const SimulationSetup& setup);

/// FNV-1a 64-bit content hash.
std::uint64_t content_hash(std::string_view bytes);

}  // namespace lmsurf
