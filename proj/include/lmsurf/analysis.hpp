// analysis.hpp - metrics over steady-state field maps: dB maps, channel
// isolation, centerline path-loss curves and gain over the unfilled surface.
//
// Every dB level is relative to the envelope at a declared reference point,
// by default the channel entrance on the centerline.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "lmsurf/geometry.hpp"
#include "lmsurf/solver.hpp"

namespace lmsurf {

inline constexpr double kDbFloor = -120.0;

/// 20 log10(envelope / reference), clamped below at kDbFloor.
double level_db(double envelope, double reference);

struct DbMap {
    GridFrame frame;
    std::vector<double> level;  // dB re reference, row-major
    Point reference_point;
    double reference_envelope = 0.0;
    double f_hz = 0.0;
};

DbMap to_db(const FieldMap& map, Point reference_point);
void write_dbmap(const std::filesystem::path& path, const DbMap& map);

/// Axis-aligned rectangle in channel coordinates.
struct Rect {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
};

struct IsolationReport {
    double inside_mean_db = 0.0;
    double outside_mean_db = 0.0;
    double isolation_db = 0.0;
    Rect inside;
    Rect outside_lower;
    Rect outside_upper;
    std::size_t inside_cells = 0;
    std::size_t outside_cells = 0;
    double reference_envelope = 0.0;
};

/// Throws DomainError unless `map` was produced on this scenario's grid.
void check_map_matches(const FieldMap& map, const ChannelScenario& scenario);

/// Mean power inside the channel against two equal exterior strips.
IsolationReport isolation(const FieldMap& map, const ChannelScenario& scenario);
std::string format_isolation(const IsolationReport& report);

struct PathLossSample {
    double distance;  // m from the entrance
    double level_db;  // re the entrance sample
};

struct PathLossCurve {
    std::vector<PathLossSample> samples;
    double smoothing_window = 0.0;  // m
};

/// One wavelength in the background medium.
double default_smoothing_window(const ChannelScenario& scenario);

PathLossCurve path_loss_curve(const FieldMap& map, const ChannelScenario& scenario,
                              double smoothing_window);
/// Linear interpolation; refuses to extrapolate.
double level_at(const PathLossCurve& curve, double distance);
double gain_vs_baseline(const PathLossCurve& guided, const PathLossCurve& baseline,
                        double at_distance);
std::string format_path_loss_csv(const PathLossCurve& curve);

}  // namespace lmsurf
