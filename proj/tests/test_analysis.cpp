#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "lmsurf/analysis.hpp"
#include "lmsurf/errors.hpp"

using namespace lmsurf;

namespace {

constexpr double kDx = 0.5e-3;

ChannelScenario small_scenario() {
    ChannelScenario s;
    s.d = 60e-3;
    s.n_layers = 2;
    s.margin = 16e-3;
    return s;
}

// Synthetic field map on the scenario's own grid.
FieldMap synthetic(const ChannelScenario& s, const std::function<double(Point)>& f) {
    FieldMap m;
    m.frame = grid_frame(s, kDx, 10);
    m.meta.f_hz = s.f;
    m.envelope.resize(static_cast<std::size_t>(m.frame.nx) * static_cast<std::size_t>(m.frame.ny));
    for (int j = 0; j < m.frame.ny; ++j) {
        for (int i = 0; i < m.frame.nx; ++i) {
            m.envelope[static_cast<std::size_t>(j) * static_cast<std::size_t>(m.frame.nx) +
                       static_cast<std::size_t>(i)] = f(m.frame.cell_center(i, j));
        }
    }
    return m;
}

PathLossCurve curve_of(std::vector<double> levels, double spacing) {
    PathLossCurve c;
    for (std::size_t k = 0; k < levels.size(); ++k) c.samples.push_back({k * spacing, levels[k]});
    return c;
}

}  // namespace

TEST_CASE("level_db and to_db") {
    CHECK(level_db(2.0, 2.0) == 0.0);
    CHECK(level_db(20.0, 2.0) == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(level_db(0.0, 2.0) == kDbFloor);
    CHECK(level_db(1e-300, 1.0) == kDbFloor);
    CHECK_THROWS_AS(level_db(1.0, 0.0), DomainError);

    double prev = kDbFloor;
    for (double e = 1e-5; e < 1e3; e *= 1.37) {
        const double v = level_db(e, 1.0);
        CHECK(v > prev);
        prev = v;
    }

    const ChannelScenario s = small_scenario();
    const FieldMap m = synthetic(s, [](Point p) { return p.x > 30e-3 ? 0.0 : (p.x > 10e-3 ? 30.0 : 3.0); });
    const DbMap db = to_db(m, {0.0, 0.0});
    CHECK(db.reference_envelope == 3.0);
    for (std::size_t k = 0; k < m.envelope.size(); ++k) {
        const double expect = m.envelope[k] == 0.0 ? kDbFloor : (m.envelope[k] == 30.0 ? 20.0 : 0.0);
        REQUIRE(db.level[k] == doctest::Approx(expect).epsilon(1e-12));
    }
    const FieldMap dark = synthetic(s, [](Point) { return 0.0; });
    CHECK_THROWS_AS(to_db(dark, {0.0, 0.0}), DomainError);
}

TEST_CASE("isolation on constructed maps") {
    const ChannelScenario s = small_scenario();

    const IsolationReport flat = isolation(synthetic(s, [](Point) { return 0.7; }), s);
    CHECK(flat.isolation_db == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(flat.inside_mean_db == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(flat.isolation_db == flat.inside_mean_db - flat.outside_mean_db);

    auto tenfold = [&](Point p) { return std::abs(p.y) < 0.5 * s.l_c ? 10.0 : 1.0; };
    const IsolationReport r = isolation(synthetic(s, tenfold), s);
    CHECK(r.isolation_db == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(r.isolation_db == r.inside_mean_db - r.outside_mean_db);

    // Regions: one pitch in from the walls, 10% of d in from each end.
    CHECK(r.inside.x0 == doctest::Approx(6e-3));
    CHECK(r.inside.x1 == doctest::Approx(54e-3));
    CHECK(r.inside.y0 == doctest::Approx(-4e-3));
    CHECK(r.inside.y1 == doctest::Approx(4e-3));
    CHECK(r.outside_upper.y0 == doctest::Approx(s.outer_face() + s.surface.w));
    CHECK(r.outside_lower.y1 == doctest::Approx(-(s.outer_face() + s.surface.w)));
    CHECK(r.outside_upper.y1 - r.outside_upper.y0 == doctest::Approx(r.inside.y1 - r.inside.y0));
    CHECK(r.outside_cells == 2 * r.inside_cells);

    const std::string text = format_isolation(r);
    CHECK(text.find("isolation_db = 20") != std::string::npos);
    CHECK(text.find("inside_region_m = ") != std::string::npos);
}

TEST_CASE("isolation is invariant under global scaling") {
    const ChannelScenario s = small_scenario();
    auto bumpy = [](Point p) { return 1.0 + 0.8 * std::sin(400.0 * p.x) * std::cos(300.0 * p.y) + 0.05 * p.y * 100.0; };
    const FieldMap base = synthetic(s, bumpy);
    const double iso = isolation(base, s).isolation_db;
    for (double k : {1e-6, 0.3, 7.0, 1e5}) {
        FieldMap scaled = base;
        for (double& v : scaled.envelope) v *= k;
        CHECK(std::abs(isolation(scaled, s).isolation_db - iso) < 1e-9);
    }
}

TEST_CASE("isolation errors") {
    ChannelScenario narrow = small_scenario();
    narrow.l_c = 2.0 * narrow.surface.w;
    CHECK_THROWS_AS(isolation(synthetic(narrow, [](Point) { return 1.0; }), narrow), DomainError);

    const ChannelScenario s = small_scenario();
    ChannelScenario longer = s;
    longer.d = 80e-3;
    const FieldMap m = synthetic(s, [](Point) { return 1.0; });
    try {
        isolation(m, longer);
        FAIL("mismatched map accepted");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("dimension mismatch") != std::string::npos);
    }
}

TEST_CASE("path loss on constructed maps") {
    const ChannelScenario s = small_scenario();

    const PathLossCurve flat = path_loss_curve(synthetic(s, [](Point) { return 4.0; }), s, 0.0);
    CHECK(flat.samples.size() == 121u);
    CHECK(flat.samples.front().distance == 0.0);
    CHECK(flat.samples.back().distance == doctest::Approx(s.d));
    for (const auto& p : flat.samples) CHECK(p.level_db == 0.0);

    // Cylindrical spreading from a line source 10 mm before the entrance.
    const double rho0 = 10e-3;
    auto spreading = [&](Point p) { return 1.0 / std::sqrt(std::hypot(p.x + rho0, p.y)); };
    const PathLossCurve c = path_loss_curve(synthetic(s, spreading), s, 0.0);
    for (std::size_t k = 1; k < c.samples.size(); ++k) {
        REQUIRE(c.samples[k].distance > c.samples[k - 1].distance);
    }
    for (const auto& p : c.samples) {
        const double oracle = -10.0 * std::log10((p.distance + rho0) / rho0);
        CHECK(std::abs(p.level_db - oracle) < 0.02);
    }
    CHECK(format_path_loss_csv(c).find("\ndistance_m,level_db\n0,0\n") != std::string::npos);
}

TEST_CASE("smoothing keeps the mean level") {
    const ChannelScenario s = small_scenario();
    auto ripple = [](Point p) {
        return (1.0 + 0.6 * std::cos(2.0 * std::numbers::pi * p.x / 3.6e-3)) * std::exp(-8.0 * p.x);
    };
    const FieldMap m = synthetic(s, ripple);
    const double window = default_smoothing_window(s);
    CHECK(window == doctest::Approx(7.18e-3).epsilon(2e-3));
    const PathLossCurve raw = path_loss_curve(m, s, 0.0);
    const PathLossCurve smooth = path_loss_curve(m, s, window);
    CHECK(smooth.smoothing_window == window);
    const std::size_t halfw = static_cast<std::size_t>(std::floor(0.5 * window / kDx));
    double a = 0.0, b = 0.0;
    std::size_t n = 0;
    for (std::size_t k = halfw; k + halfw < raw.samples.size(); ++k, ++n) {
        a += raw.samples[k].level_db;
        b += smooth.samples[k].level_db;
    }
    CHECK(std::abs(a / n - b / n) < 0.1);

    double spread_raw = 0.0, spread_smooth = 0.0;
    for (std::size_t k = halfw + 1; k + halfw < raw.samples.size(); ++k) {
        spread_raw += std::abs(raw.samples[k].level_db - raw.samples[k - 1].level_db);
        spread_smooth += std::abs(smooth.samples[k].level_db - smooth.samples[k - 1].level_db);
    }
    CHECK(spread_smooth < 0.5 * spread_raw);
    CHECK_THROWS_AS(path_loss_curve(m, s, -1.0), DomainError);
}

TEST_CASE("gain against the baseline") {
    const PathLossCurve a = curve_of({0.0, -2.0, -3.0, -5.0, -4.0}, 0.15);
    CHECK(gain_vs_baseline(a, a, 0.6) == 0.0);
    CHECK(gain_vs_baseline(a, a, 0.2) == 0.0);

    const PathLossCurve guided = curve_of({0.0, 0.0, 0.0, 0.0, 0.0}, 0.15);
    const PathLossCurve baseline = curve_of({0.0, -4.0, -8.0, -12.0, -15.0}, 0.15);
    CHECK(gain_vs_baseline(guided, baseline, 0.6) == 15.0);
    CHECK(gain_vs_baseline(guided, baseline, 0.075) == doctest::Approx(2.0));

    PathLossCurve shifted = a;
    for (auto& p : shifted.samples) p.level_db += 3.25;
    for (double x : {0.0, 0.1, 0.33, 0.45, 0.6}) {
        CHECK(gain_vs_baseline(shifted, a, x) == doctest::Approx(3.25).epsilon(1e-12));
    }

    CHECK(level_at(a, 0.225) == doctest::Approx(-2.5));
    CHECK_THROWS_AS(level_at(a, 0.61), DomainError);
    CHECK_THROWS_AS(level_at(a, -1e-9), DomainError);
    CHECK_THROWS_AS(gain_vs_baseline(guided, curve_of({0.0, -1.0}, 0.15), 0.6), DomainError);
    CHECK_THROWS_AS(level_at(PathLossCurve{}, 0.0), DomainError);
}
