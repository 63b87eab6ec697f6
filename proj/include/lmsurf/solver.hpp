// solver.hpp - 2D FDTD for the TM polarization (Ez out of plane, Hx/Hy in
// plane) on the Yee grid of a MaterialGrid.
//
// Ez(i, j) sits at cell centers, Hx(i, j) at (i, j + 1/2), Hy(i, j) at
// (i + 1/2, j). Conductive cells use the semi-implicit update, and all four
// edges carry a convolutional PML backed by a PEC wall. Fields are stored in
// single precision; every cell's update reads only its neighbours from the
// previous half-step, so results do not depend on the worker count.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lmsurf/geometry.hpp"

namespace lmsurf {

struct SolverConfig {
    double courant = 0.95;
    double settle_traversals = 2.0;
    double measure_cycles = 10.0;
    int pml_thickness = 20;
    double pml_target_reflection = 1e-5;
    double pml_grading_order = 3.0;
    int threads = 1;  // does not affect results

    void validate() const;
};

struct FieldMeta {
    double f_hz = 0.0;
    long steps = 0;
    double dt = 0.0;
    std::string source;
    std::uint64_t scenario_hash = 0;
};

struct FieldMap {
    GridFrame frame;
    std::vector<double> envelope;  // row-major, j * nx + i
    FieldMeta meta;

    double dx() const { return frame.dx; }
    int nx() const { return frame.nx; }
    int ny() const { return frame.ny; }
    double at(int i, int j) const {
        return envelope[static_cast<std::size_t>(j) * static_cast<std::size_t>(frame.nx) +
                        static_cast<std::size_t>(i)];
    }
    /// Bilinear interpolation between cell centers at a channel-coordinate point.
    double sample(Point channel) const;
};

/// Courant-limited time step for `grid`: S dx sqrt(min eps_rel) / (c0 sqrt 2).
/// A positive `dt_request` below the limit is honoured as-is.
double time_step(const MaterialGrid& grid, const SolverConfig& config, double dt_request = 0.0);

/// One excited cell of a line source.
struct SourceTap {
    int row;
    float weight;
};

/// Low-level stepping engine. `run` drives one of these for CW scenarios;
/// tests use it directly for pulse experiments.
class FdtdEngine {
public:
    FdtdEngine(const MaterialGrid& grid, const SolverConfig& config, double dt_request = 0.0);
    ~FdtdEngine();
    FdtdEngine(const FdtdEngine&) = delete;
    FdtdEngine& operator=(const FdtdEngine&) = delete;

    double dt() const;
    long steps_taken() const;
    int nx() const;
    int ny() const;

    /// Soft source: each step adds waveform(t) * weight to Ez at (column, row).
    void set_source(int column, std::vector<SourceTap> taps, std::function<double(double)> waveform);
    /// Abort threshold on |Ez|; non-finite values always abort.
    void set_divergence_limit(double limit);

    /// Advance `n` full steps. With `peak_hold`, the envelope buffer keeps the
    /// running max of |Ez| over these steps.
    void advance(long n, bool peak_hold = false);

    float ez(int i, int j) const;
    const std::vector<float>& ez_field() const;
    const std::vector<float>& peak_field() const;
    /// Electromagnetic energy per unit depth inside the non-PML interior, J/m.
    double interior_energy() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct RunHooks {
    std::function<void(long step, long total)> progress;
};

/// CW run to steady state; the envelope is the peak |Ez| over the final
/// measure_cycles carrier cycles.
FieldMap run(const MaterialGrid& grid, const SourceSpec& source, double f,
             const SolverConfig& config, const RunHooks* hooks = nullptr);

/// Source taps for a uniform aperture with a one-cell raised-cosine taper.
std::vector<SourceTap> aperture_taps(const GridFrame& frame, const SourceSpec& source);
int source_column(const GridFrame& frame, const SourceSpec& source);

struct ProbeSample {
    double distance;  // m from `start`
    double amplitude;
};

/// Equispaced bilinear samples along a segment in channel coordinates.
std::vector<ProbeSample> probe_line(const FieldMap& map, Point start, Point end, int n_samples);

}  // namespace lmsurf
