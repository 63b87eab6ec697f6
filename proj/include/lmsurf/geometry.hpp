// geometry.hpp - cavity lattice, channel fill patterns, and rasterization of
// a channel scenario into the per-cell material map consumed by the solver.
//
// Coordinates. Scenario geometry lives in "channel coordinates": the origin
// is the channel entrance on the centerline, +x runs along the channel and
// the walls sit at |y| > l_c / 2. Grids use "grid coordinates" with the
// origin at the grid corner; cell (i, j) is centered at ((i+0.5) dx, (j+0.5) dx).
// A GridFrame maps between the two.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lmsurf/medium.hpp"

namespace lmsurf {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct SourceSpec {
    Point position{-10.0e-3, 0.0};  // channel coordinates, m
    double aperture_width = 9.6e-3;  // m
    double amplitude = 1.0;
    double ramp_cycles = 10.0;

    void validate() const;
};

enum class BackgroundIndex { eps_eff, tm_neff };

std::string_view to_string(BackgroundIndex b);
BackgroundIndex background_index_from_string(std::string_view s);

struct ChannelScenario {
    SurfaceSpec surface;
    double f = 30.0e9;      // Hz
    double l_c = 12.0e-3;   // clear width between inner wall faces, m
    double d = 600.0e-3;    // channel length, m
    int n_layers = 3;       // wall thickness in cavity rows; 0 = baseline
    double margin = 24.0e-3;  // lattice extent beyond the outer wall faces, m
    SourceSpec source;
    BackgroundIndex background_index = BackgroundIndex::eps_eff;

    void validate() const;

    /// Relative permittivity assigned to unfilled background cells.
    double background_eps() const;
    /// Clear-channel width in lattice rows (l_c / w, validated integral).
    int clear_rows() const;
    /// Lattice rows on each side beyond the walls.
    int margin_rows() const;
    /// Distance from the centerline to the outer wall face, m.
    double outer_face() const { return 0.5 * l_c + n_layers * surface.w; }
};

/// Distance kept behind the source before the absorbing boundary, m.
inline constexpr double kBackGap = 5.0e-3;
/// Distance kept beyond the channel exit before the absorbing boundary, m.
inline constexpr double kExitGap = 10.0e-3;

class FillPattern {
public:
    FillPattern() = default;
    FillPattern(int nx, int ny, double pitch);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double pitch() const { return pitch_; }
    /// Channel-coordinate position of site (0, 0): the lattice starts at the
    /// entrance and is centered on the centerline.
    Point origin() const;
    Point site_center(int i, int j) const;

    bool filled(int i, int j) const { return occupancy_[index(i, j)] != 0; }
    void set(int i, int j, bool value) { occupancy_[index(i, j)] = value ? 1 : 0; }
    std::size_t filled_count() const;
    const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

    bool operator==(const FillPattern& other) const = default;

private:
    std::size_t index(int i, int j) const;

    int nx_ = 0;
    int ny_ = 0;
    double pitch_ = 0.0;
    std::vector<std::uint8_t> occupancy_;
};

/// Two straight walls of n_layers rows running the full channel length.
FillPattern channel_layout(const ChannelScenario& scenario);

std::string serialize_pattern(const FillPattern& pattern);
FillPattern parse_pattern(std::string_view text);

struct GridFrame {
    double dx = 0.0;
    int nx = 0;
    int ny = 0;
    int pml = 0;
    Point origin;  // grid coordinates of the channel origin

    Point to_grid(Point channel) const { return {channel.x + origin.x, channel.y + origin.y}; }
    Point cell_center(int i, int j) const {
        return {(i + 0.5) * dx - origin.x, (j + 0.5) * dx - origin.y};
    }
    /// True when the channel-coordinate point lies outside the absorbing layer.
    bool in_interior(Point channel) const;
};

GridFrame grid_frame(const ChannelScenario& scenario, double dx, int pml_cells);

struct MaterialGrid {
    GridFrame frame;
    std::vector<double> eps_rel;  // row-major, j * nx + i
    std::vector<double> sigma;    // S/m

    double dx() const { return frame.dx; }
    int nx() const { return frame.nx; }
    int ny() const { return frame.ny; }
    int pml_thickness() const { return frame.pml; }
    std::size_t cells() const { return eps_rel.size(); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(frame.nx) +
               static_cast<std::size_t>(i);
    }

    /// Uniform grid without channel geometry, origin at the grid center.
    static MaterialGrid uniform(int nx, int ny, double dx, double eps_rel, double sigma,
                                int pml_cells);
};

struct RasterOptions {
    int pml_thickness = 20;
    std::size_t cell_budget = 50'000'000;
};

/// Staircase rasterization: a cell is metal when its center lies inside a
/// filled cavity disk; everything else is the lossy homogenized background.
MaterialGrid rasterize(const FillPattern& pattern, const ChannelScenario& scenario, double dx,
                       const RasterOptions& options = {});

}  // namespace lmsurf
