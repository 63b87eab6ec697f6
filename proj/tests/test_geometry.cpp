#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "lmsurf/errors.hpp"
#include "lmsurf/geometry.hpp"
#include "lmsurf/scenario_config.hpp"

using namespace lmsurf;

namespace {

// Counting oracle: a site is filled iff its center lies inside one of the two
// wall bands l_c/2 < |y| < l_c/2 + n w.
std::size_t oracle_wall_sites(const FillPattern& p, const ChannelScenario& s) {
    std::size_t n = 0;
    const double lo = 0.5 * s.l_c;
    const double hi = lo + s.n_layers * s.surface.w;
    for (int j = 0; j < p.ny(); ++j) {
        for (int i = 0; i < p.nx(); ++i) {
            const Point c = p.site_center(i, j);
            const bool in_band = std::abs(c.y) > lo && std::abs(c.y) < hi && c.x > 0.0 && c.x < s.d;
            CHECK(p.filled(i, j) == in_band);
            n += in_band ? 1 : 0;
        }
    }
    return n;
}

std::size_t conductive_cells(const MaterialGrid& g, double sigma) {
    std::size_t n = 0;
    for (double s : g.sigma) n += (s == sigma) ? 1 : 0;
    return n;
}

// Pixel-counting oracle: cells of `frame` whose centers fall inside a disk.
std::size_t disk_cells(const GridFrame& frame, Point center, double r) {
    std::size_t n = 0;
    for (int j = 0; j < frame.ny; ++j) {
        for (int i = 0; i < frame.nx; ++i) {
            const Point c = frame.cell_center(i, j);
            n += std::hypot(c.x - center.x, c.y - center.y) <= r ? 1 : 0;
        }
    }
    return n;
}

ChannelScenario small_scenario() {
    ChannelScenario s;
    s.d = 20e-3;
    s.margin = 6e-3;
    s.n_layers = 1;
    s.l_c = 12e-3;
    return s;
}

}  // namespace

TEST_CASE("channel layout: three layers over 600 mm") {
    ChannelScenario s;
    s.l_c = 12e-3;
    s.n_layers = 3;
    s.d = 600e-3;
    const FillPattern p = channel_layout(s);
    CHECK(p.nx() == 300);
    CHECK(p.filled_count() == 2u * 3u * 300u);
    CHECK(oracle_wall_sites(p, s) == p.filled_count());

    // six clear rows between the inner wall faces
    int clear = 0;
    for (int j = 0; j < p.ny(); ++j) {
        const double y = p.site_center(0, j).y;
        if (std::abs(y) < 0.5 * s.l_c) {
            CHECK_FALSE(p.filled(0, j));
            ++clear;
        }
    }
    CHECK(clear == 6);
}

TEST_CASE("channel layout: baseline and single layer") {
    ChannelScenario s;
    s.n_layers = 0;
    CHECK(channel_layout(s).filled_count() == 0u);

    s.l_c = 16e-3;
    s.n_layers = 1;
    s.d = 20e-3;
    const FillPattern p = channel_layout(s);
    CHECK(p.filled_count() == 20u);
    CHECK(oracle_wall_sites(p, s) == 20u);
}

TEST_CASE("channel layout rejects an incommensurate width") {
    ChannelScenario s;
    s.l_c = 13e-3;
    CHECK_THROWS_AS(channel_layout(s), DomainError);
}

TEST_CASE("channel layout is mirror-symmetric about the centerline") {
    for (int layers = 0; layers <= 3; ++layers) {
        for (double lc : {12e-3, 16e-3, 20e-3}) {
            ChannelScenario s;
            s.d = 40e-3;
            s.l_c = lc;
            s.n_layers = layers;
            const FillPattern p = channel_layout(s);
            for (int j = 0; j < p.ny(); ++j) {
                for (int i = 0; i < p.nx(); ++i) {
                    REQUIRE(p.filled(i, j) == p.filled(i, p.ny() - 1 - j));
                }
                CHECK(p.site_center(0, j).y == doctest::Approx(-p.site_center(0, p.ny() - 1 - j).y));
            }
        }
    }
}

TEST_CASE("rasterize: unfilled pattern gives a uniform lossy background") {
    ChannelScenario s = small_scenario();
    s.n_layers = 0;
    const MaterialGrid g = rasterize(channel_layout(s), s, 0.125e-3);
    const double eps_eff = surface_impedance(s.surface, s.f).eps_eff;
    const double sigma_d = 2.0 * std::numbers::pi * s.f * constants().eps0 * eps_eff * s.surface.tan_delta;
    for (std::size_t k = 0; k < g.cells(); ++k) {
        REQUIRE(g.eps_rel[k] == eps_eff);
        REQUIRE(g.sigma[k] == doctest::Approx(sigma_d).epsilon(1e-12));
    }
    CHECK(g.pml_thickness() == 20);
}

TEST_CASE("rasterize: a single cavity") {
    ChannelScenario s = small_scenario();
    s.n_layers = 0;
    FillPattern p = channel_layout(s);
    p.set(3, p.ny() / 2, true);
    const double dx = 0.125e-3;
    const MaterialGrid g = rasterize(p, s, dx);
    const std::size_t n = conductive_cells(g, s.surface.sigma_fill);
    CHECK(n >= 44u);
    CHECK(n <= 52u);
    CHECK(n == disk_cells(g.frame, p.site_center(3, p.ny() / 2), s.surface.r));
    for (std::size_t k = 0; k < g.cells(); ++k) {
        if (g.sigma[k] == s.surface.sigma_fill) REQUIRE(g.eps_rel[k] == 1.0);
    }
}

TEST_CASE("rasterize: three-layer 600 mm channel") {
    ChannelScenario s;  // l_c = 12 mm, 3 layers, d = 600 mm
    const FillPattern p = channel_layout(s);
    const double dx = 0.125e-3;
    const MaterialGrid g = rasterize(p, s, dx);
    const double cavities = static_cast<double>(p.filled_count());
    const double per_cavity = static_cast<double>(conductive_cells(g, s.surface.sigma_fill)) / cavities;
    CHECK(std::abs(per_cavity - 50.0) <= 4.0);
    const double disk = std::numbers::pi * s.surface.r * s.surface.r / (dx * dx);
    CHECK(std::abs(per_cavity - disk) <= 0.1 * disk);
    CHECK(g.nx() * dx >= s.d + 10e-3 + 2 * g.pml_thickness() * dx);
}

TEST_CASE("rasterize: refinement keeps cavity area within 5%") {
    ChannelScenario s = small_scenario();
    const FillPattern p = channel_layout(s);
    const double area = std::numbers::pi * s.surface.r * s.surface.r;
    double prev = 0.0;
    // Starts at the default dx; at dx = r/2 a corner-centered disk holds only
    // 12 cells and the step to r/4 moves the estimate by about 8%.
    for (double dx : {0.125e-3, 0.0625e-3, 0.03125e-3}) {
        const MaterialGrid g = rasterize(p, s, dx);
        const double est = static_cast<double>(conductive_cells(g, s.surface.sigma_fill)) * dx * dx /
                           static_cast<double>(p.filled_count());
        CHECK(std::abs(est - area) / area < 0.1);
        if (prev > 0.0) CHECK(std::abs(est - prev) / area < 0.05);
        prev = est;
    }
}

TEST_CASE("rasterize: rasterized walls keep the mirror symmetry") {
    ChannelScenario s = small_scenario();
    s.n_layers = 2;
    const MaterialGrid g = rasterize(channel_layout(s), s, 0.125e-3);
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            REQUIRE(g.sigma[g.index(i, j)] == g.sigma[g.index(i, g.ny() - 1 - j)]);
        }
    }
}

TEST_CASE("rasterize: errors") {
    ChannelScenario s = small_scenario();
    const FillPattern p = channel_layout(s);
    CHECK_THROWS_AS(rasterize(p, s, 0.3e-3), DomainError);
    RasterOptions tight;
    tight.cell_budget = 1000;
    CHECK_THROWS_AS(rasterize(p, s, 0.125e-3, tight), BudgetError);
}

TEST_CASE("pattern text: smallest case") {
    FillPattern p(2, 2, 2e-3);
    p.set(1, 0, true);
    const std::string text = serialize_pattern(p);
    CHECK(text == "pattern 2 2 2\n.#\n..\n");
    CHECK(std::count(text.begin(), text.end(), '#') == 1);
    CHECK(parse_pattern(text) == p);
}

TEST_CASE("pattern text: three-layer layout round-trips") {
    const FillPattern p = channel_layout(ChannelScenario{});
    CHECK(parse_pattern(serialize_pattern(p)) == p);
}

TEST_CASE("pattern text: random round-trips") {
    std::mt19937_64 rng(20260916);
    std::uniform_int_distribution<int> dim(1, 64);
    std::uniform_int_distribution<int> quarter_mm(1, 40);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 1000; ++trial) {
        FillPattern p(dim(rng), dim(rng), quarter_mm(rng) * 0.25e-3);
        for (int j = 0; j < p.ny(); ++j) {
            for (int i = 0; i < p.nx(); ++i) p.set(i, j, coin(rng));
        }
        REQUIRE(parse_pattern(serialize_pattern(p)) == p);
    }
}

TEST_CASE("pattern text: malformed input") {
    try {
        parse_pattern("pattern 3 2 2\n...\n.#\n");
        FAIL("ragged row accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
        CHECK(e.line() == 3);
    }
    try {
        parse_pattern("pattern 3 2 2\n.x.\n...\n");
        FAIL("bad character accepted");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 2);
    }
    CHECK_THROWS_AS(parse_pattern("pattern 3 3 2\n...\n...\n"), ConfigError);
    CHECK_THROWS_AS(parse_pattern("pattern 2 1 2\n..\n..\n"), ConfigError);
    CHECK_THROWS_AS(parse_pattern("grid 2 1 2\n..\n"), ConfigError);
    CHECK_THROWS_AS(parse_pattern("pattern 2 1 -2\n..\n"), ConfigError);
    CHECK_THROWS_AS(parse_pattern("pattern 2 1 2\r\n..\r\n"), ConfigError);
}

TEST_CASE("scenario config: keys and errors") {
    SimulationSetup s = make_preset(Preset::fast);
    CHECK(s.scenario.d == 150e-3);
    apply_config(s, "# comment\nl_c = 16e-3  # wider\n\nn_layers=2\nbackground_index = tm_neff\n", "t.cfg");
    CHECK(s.scenario.l_c == 16e-3);
    CHECK(s.scenario.n_layers == 2);
    CHECK(s.scenario.background_index == BackgroundIndex::tm_neff);
    const double n = tm_wave_parameters(surface_impedance(s.scenario.surface, s.scenario.f)).n_eff;
    CHECK(s.scenario.background_eps() == doctest::Approx(n * n));

    try {
        apply_config(s, "f = 30e9\nchannel_width = 1\n", "t.cfg");
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("channel_width") != std::string::npos);
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(apply_config(s, "d = ten\n", "t.cfg"), ConfigError);
    CHECK_THROWS_AS(apply_config(s, "d\n", "t.cfg"), ConfigError);
    CHECK_THROWS_AS(apply_config(s, "background_index = foo\n", "t.cfg"), ConfigError);
}

TEST_CASE("scenario config: canonical text reproduces the setup") {
    SimulationSetup a = make_preset(Preset::paper);
    apply_config(a, "l_c = 0.02\nf = 4e10\nn_layers = 1\ndx = 1e-4\n", "x");
    SimulationSetup b = make_preset(Preset::fast);
    apply_config(b, canonical_text(a), "canonical");
    CHECK(canonical_text(a) == canonical_text(b));
    CHECK(content_hash(canonical_text(a)) == content_hash(canonical_text(b)));
    b.scenario.n_layers = 2;
    CHECK(content_hash(canonical_text(a)) != content_hash(canonical_text(b)));
}
