#include "lmsurf/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "lmsurf/errors.hpp"
#include "lmsurf/field_io.hpp"

namespace lmsurf {

double level_db(double envelope, double reference) {
    if (!(reference > 0.0)) throw DomainError("dB reference envelope must be > 0");
    if (!(envelope > 0.0)) return kDbFloor;
    return std::max(kDbFloor, 20.0 * std::log10(envelope / reference));
}

DbMap to_db(const FieldMap& map, Point reference_point) {
    DbMap out;
    out.frame = map.frame;
    out.reference_point = reference_point;
    out.reference_envelope = map.sample(reference_point);
    out.f_hz = map.meta.f_hz;
    if (!(out.reference_envelope > 0.0)) {
        throw DomainError("field is zero at the dB reference point");
    }
    out.level.resize(map.envelope.size());
    for (std::size_t k = 0; k < map.envelope.size(); ++k) {
        out.level[k] = level_db(map.envelope[k], out.reference_envelope);
    }
    return out;
}

void write_dbmap(const std::filesystem::path& path, const DbMap& map) {
    GridFile g;
    g.nx = map.frame.nx;
    g.ny = map.frame.ny;
    g.dx = map.frame.dx;
    g.f_hz = map.f_hz;
    g.extra = {
        {"unit", "db"},
        {"reference", "envelope at channel x=" + format_number(map.reference_point.x) +
                          " y=" + format_number(map.reference_point.y) + " = " +
                          format_number(map.reference_envelope)},
        {"floor_db", format_number(kDbFloor)},
        {"pml_cells", std::to_string(map.frame.pml)},
        {"origin_x_m", format_number(map.frame.origin.x)},
        {"origin_y_m", format_number(map.frame.origin.y)},
    };
    g.values = map.level;
    write_file(path, encode_grid(g));
}

void check_map_matches(const FieldMap& map, const ChannelScenario& scenario) {
    const GridFrame expect = grid_frame(scenario, map.dx(), map.frame.pml);
    if (expect.nx != map.nx() || expect.ny != map.ny()) {
        throw DomainError("dimension mismatch: scenario implies a " + std::to_string(expect.nx) + " x " +
                          std::to_string(expect.ny) + " grid at dx=" + format_number(map.dx()) +
                          ", field map is " + std::to_string(map.nx()) + " x " + std::to_string(map.ny()));
    }
    if (std::abs(expect.origin.x - map.frame.origin.x) > 1e-9 ||
        std::abs(expect.origin.y - map.frame.origin.y) > 1e-9) {
        throw DomainError("field map origin does not match the scenario layout");
    }
}

namespace {

struct PowerSum {
    double sum = 0.0;
    std::size_t cells = 0;
};

void require_interior(const FieldMap& map, const Rect& r, const char* name) {
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) {
        throw DomainError(std::string("degenerate ") + name + " region (zero area)");
    }
    if (!map.frame.in_interior({r.x0, r.y0}) || !map.frame.in_interior({r.x1, r.y1})) {
        throw DomainError(std::string(name) + " region extends into the absorbing layer");
    }
}

void accumulate(const FieldMap& map, const Rect& r, PowerSum& acc) {
    const double dx = map.dx();
    const Point lo = map.frame.to_grid({r.x0, r.y0});
    const Point hi = map.frame.to_grid({r.x1, r.y1});
    const int i0 = std::max(0, static_cast<int>(std::ceil(lo.x / dx - 0.5)));
    const int i1 = std::min(map.nx() - 1, static_cast<int>(std::floor(hi.x / dx - 0.5)));
    const int j0 = std::max(0, static_cast<int>(std::ceil(lo.y / dx - 0.5)));
    const int j1 = std::min(map.ny() - 1, static_cast<int>(std::floor(hi.y / dx - 0.5)));
    for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
            const double e = map.at(i, j);
            acc.sum += e * e;
            ++acc.cells;
        }
    }
}

}  // namespace

IsolationReport isolation(const FieldMap& map, const ChannelScenario& scenario) {
    check_map_matches(map, scenario);
    const double w = scenario.surface.w;
    const double half = 0.5 * scenario.l_c;

    IsolationReport rep;
    rep.inside = {0.1 * scenario.d, 0.9 * scenario.d, -half + w, half - w};
    const double height = rep.inside.y1 - rep.inside.y0;
    const double outer = scenario.outer_face() + w;
    rep.outside_upper = {rep.inside.x0, rep.inside.x1, outer, outer + height};
    rep.outside_lower = {rep.inside.x0, rep.inside.x1, -outer - height, -outer};
    require_interior(map, rep.inside, "inside");
    require_interior(map, rep.outside_upper, "outside");
    require_interior(map, rep.outside_lower, "outside");

    rep.reference_envelope = map.sample({0.0, 0.0});
    if (!(rep.reference_envelope > 0.0)) throw DomainError("field is zero at the channel entrance");
    const double ref2 = rep.reference_envelope * rep.reference_envelope;

    PowerSum in, out;
    accumulate(map, rep.inside, in);
    accumulate(map, rep.outside_upper, out);
    accumulate(map, rep.outside_lower, out);
    if (in.cells == 0 || out.cells == 0) throw DomainError("measurement region holds no cells");
    rep.inside_cells = in.cells;
    rep.outside_cells = out.cells;

    auto mean_db = [&](const PowerSum& p) {
        const double mean = p.sum / static_cast<double>(p.cells);
        return mean > 0.0 ? std::max(kDbFloor, 10.0 * std::log10(mean / ref2)) : kDbFloor;
    };
    rep.inside_mean_db = mean_db(in);
    rep.outside_mean_db = mean_db(out);
    rep.isolation_db = rep.inside_mean_db - rep.outside_mean_db;
    return rep;
}

std::string format_isolation(const IsolationReport& r) {
    auto rect = [](const Rect& q) {
        return format_number(q.x0) + "," + format_number(q.x1) + "," + format_number(q.y0) + "," +
               format_number(q.y1);
    };
    std::string s;
    s += "# isolation report; levels in dB re envelope at channel entrance (x=0, y=0)\n";
    s += "# rectangles are x0_m,x1_m,y0_m,y1_m in channel coordinates\n";
    s += "inside_mean_db = " + format_number(r.inside_mean_db) + "\n";
    s += "outside_mean_db = " + format_number(r.outside_mean_db) + "\n";
    s += "isolation_db = " + format_number(r.isolation_db) + "\n";
    s += "reference_envelope = " + format_number(r.reference_envelope) + "\n";
    s += "inside_region_m = " + rect(r.inside) + "\n";
    s += "outside_lower_region_m = " + rect(r.outside_lower) + "\n";
    s += "outside_upper_region_m = " + rect(r.outside_upper) + "\n";
    s += "inside_cells = " + std::to_string(r.inside_cells) + "\n";
    s += "outside_cells = " + std::to_string(r.outside_cells) + "\n";
    return s;
}

double default_smoothing_window(const ChannelScenario& scenario) {
    return constants().c0 / scenario.f / std::sqrt(scenario.background_eps());
}

PathLossCurve path_loss_curve(const FieldMap& map, const ChannelScenario& scenario,
                              double smoothing_window) {
    if (!(smoothing_window >= 0.0)) throw DomainError("smoothing window must be >= 0");
    check_map_matches(map, scenario);
    const Point start{0.0, 0.0};
    const Point end{scenario.d, 0.0};
    if (!map.frame.in_interior(start) || !map.frame.in_interior(end)) {
        throw DomainError("channel centerline leaves the simulated interior");
    }
    const int n = static_cast<int>(std::llround(scenario.d / map.dx())) + 1;
    const auto raw = probe_line(map, start, end, n);
    const double ref = raw.front().amplitude;
    if (!(ref > 0.0)) throw DomainError("field is zero at the channel entrance");

    std::vector<double> levels(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) levels[k] = level_db(raw[k].amplitude, ref);

    PathLossCurve curve;
    curve.smoothing_window = smoothing_window;
    curve.samples.resize(raw.size());
    const double spacing = scenario.d / (n - 1);
    const auto halfw = static_cast<std::ptrdiff_t>(std::floor(0.5 * smoothing_window / spacing + 1e-9));
    const auto count = static_cast<std::ptrdiff_t>(levels.size());
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, k - halfw);
        const std::ptrdiff_t b = std::min(count - 1, k + halfw);
        double sum = 0.0;
        for (std::ptrdiff_t q = a; q <= b; ++q) sum += levels[static_cast<std::size_t>(q)];
        curve.samples[static_cast<std::size_t>(k)] = {raw[static_cast<std::size_t>(k)].distance,
                                                      sum / static_cast<double>(b - a + 1)};
    }
    return curve;
}

double level_at(const PathLossCurve& curve, double distance) {
    const auto& s = curve.samples;
    if (s.empty()) throw DomainError("empty path-loss curve");
    if (distance < s.front().distance || distance > s.back().distance) {
        throw DomainError("distance " + format_number(distance) + " m lies outside the curve (" +
                          format_number(s.front().distance) + " to " + format_number(s.back().distance) +
                          " m); extrapolation refused");
    }
    auto it = std::lower_bound(s.begin(), s.end(), distance,
                               [](const PathLossSample& p, double x) { return p.distance < x; });
    if (it == s.begin()) return it->level_db;
    const auto prev = it - 1;
    const double t = (distance - prev->distance) / (it->distance - prev->distance);
    return prev->level_db + t * (it->level_db - prev->level_db);
}

double gain_vs_baseline(const PathLossCurve& guided, const PathLossCurve& baseline,
                        double at_distance) {
    return level_at(guided, at_distance) - level_at(baseline, at_distance);
}

std::string format_path_loss_csv(const PathLossCurve& curve) {
    std::string s = "# level_db re centerline envelope at the channel entrance; smoothing_window_m=" +
                    format_number(curve.smoothing_window) + "\n";
    s += "distance_m,level_db\n";
    for (const auto& p : curve.samples) {
        s += format_number(p.distance) + "," + format_number(p.level_db) + "\n";
    }
    return s;
}

}  // namespace lmsurf
