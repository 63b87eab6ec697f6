#include "lmsurf/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lmsurf/errors.hpp"

namespace lmsurf {

namespace {

// Integer multiple of `unit` covering `length`, tolerant of round-off.
int cells_covering(double length, double unit) {
    return static_cast<int>(std::ceil(length / unit - 1e-9));
}

int commensurate_count(double length, double unit, const char* what) {
    const double ratio = length / unit;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-6) {
        throw DomainError(std::string(what) + " must be an integer multiple of the pitch");
    }
    return static_cast<int>(rounded);
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Shortest millimetre string whose value / 1000 reproduces `metres` exactly.
std::string pitch_to_mm(double metres) {
    double mm = metres * 1000.0;
    for (int k = 0; k < 8; ++k) {
        if (mm / 1000.0 == metres) return format_double(mm);
        mm = std::nextafter(mm, (mm / 1000.0 < metres) ? HUGE_VAL : -HUGE_VAL);
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, metres * 1000.0,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace

void SourceSpec::validate() const {
    if (!(aperture_width > 0.0)) throw DomainError("aperture_width must be > 0");
    if (!(ramp_cycles >= 1.0)) throw DomainError("ramp_cycles must be >= 1");
    if (!std::isfinite(amplitude)) throw DomainError("amplitude must be finite");
    if (!std::isfinite(position.x) || !std::isfinite(position.y)) {
        throw DomainError("source position must be finite");
    }
}

std::string_view to_string(BackgroundIndex b) {
    return b == BackgroundIndex::eps_eff ? "eps_eff" : "tm_neff";
}

BackgroundIndex background_index_from_string(std::string_view s) {
    if (s == "eps_eff") return BackgroundIndex::eps_eff;
    if (s == "tm_neff") return BackgroundIndex::tm_neff;
    throw DomainError("background_index must be eps_eff or tm_neff, got '" + std::string(s) + "'");
}

void ChannelScenario::validate() const {
    surface.validate();
    source.validate();
    if (!(f > 0.0) || !std::isfinite(f)) throw DomainError("f must be > 0");
    if (!(d > 0.0)) throw DomainError("d must be > 0");
    if (!(l_c > 0.0)) throw DomainError("l_c must be > 0");
    if (n_layers < 0) throw DomainError("n_layers must be >= 0");
    if (!(margin >= 0.0)) throw DomainError("margin must be >= 0");
    commensurate_count(l_c, surface.w, "l_c");
    commensurate_count(d, surface.w, "d");
}

double ChannelScenario::background_eps() const {
    const MediumReport rep = surface_impedance(surface, f);
    if (background_index == BackgroundIndex::eps_eff) return rep.eps_eff;
    const double n = tm_wave_parameters(rep).n_eff;
    return n * n;
}

int ChannelScenario::clear_rows() const { return commensurate_count(l_c, surface.w, "l_c"); }

int ChannelScenario::margin_rows() const { return cells_covering(margin, surface.w); }

// --- FillPattern ------------------------------------------------------------

FillPattern::FillPattern(int nx, int ny, double pitch) : nx_(nx), ny_(ny), pitch_(pitch) {
    if (nx < 1 || ny < 1) throw DomainError("pattern dimensions must be >= 1");
    if (!(pitch > 0.0)) throw DomainError("pattern pitch must be > 0");
    occupancy_.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
}

Point FillPattern::origin() const { return {0.5 * pitch_, -0.5 * (ny_ - 1) * pitch_}; }

Point FillPattern::site_center(int i, int j) const {
    const Point o = origin();
    return {o.x + i * pitch_, o.y + j * pitch_};
}

std::size_t FillPattern::filled_count() const {
    return static_cast<std::size_t>(std::count(occupancy_.begin(), occupancy_.end(), 1));
}

std::size_t FillPattern::index(int i, int j) const {
    if (i < 0 || i >= nx_ || j < 0 || j >= ny_) throw std::out_of_range("pattern site out of range");
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
}

FillPattern channel_layout(const ChannelScenario& scenario) {
    scenario.validate();
    const double w = scenario.surface.w;
    const int length = commensurate_count(scenario.d, w, "d");
    const int clear = scenario.clear_rows();
    const int margin = scenario.margin_rows();
    const int layers = scenario.n_layers;

    FillPattern p(length, clear + 2 * layers + 2 * margin, w);
    for (int k = 0; k < layers; ++k) {
        const int lower = margin + k;
        const int upper = margin + layers + clear + k;
        for (int i = 0; i < length; ++i) {
            p.set(i, lower, true);
            p.set(i, upper, true);
        }
    }
    return p;
}

// --- pattern text format ------------------------------------------------------

std::string serialize_pattern(const FillPattern& pattern) {
    std::string out = "pattern " + std::to_string(pattern.nx()) + " " +
                      std::to_string(pattern.ny()) + " " + pitch_to_mm(pattern.pitch()) + "\n";
    out.reserve(out.size() + static_cast<std::size_t>(pattern.ny()) * (pattern.nx() + 1));
    for (int j = 0; j < pattern.ny(); ++j) {
        for (int i = 0; i < pattern.nx(); ++i) out.push_back(pattern.filled(i, j) ? '#' : '.');
        out.push_back('\n');
    }
    return out;
}

FillPattern parse_pattern(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (lines.empty()) throw ConfigError("empty pattern file", 1);

    std::istringstream header{std::string(lines[0])};
    std::string tag, pitch_text;
    long nx = 0, ny = 0;
    if (!(header >> tag >> nx >> ny >> pitch_text) || tag != "pattern") {
        throw ConfigError("expected header 'pattern <nx> <ny> <pitch_mm>'", 1);
    }
    std::string extra;
    if (header >> extra) throw ConfigError("trailing text after pattern header", 1);
    double pitch_mm = 0.0;
    auto [ptr, ec] = std::from_chars(pitch_text.data(), pitch_text.data() + pitch_text.size(), pitch_mm);
    if (ec != std::errc() || ptr != pitch_text.data() + pitch_text.size() || !(pitch_mm > 0.0)) {
        throw ConfigError("invalid pitch '" + pitch_text + "'", 1);
    }
    if (nx < 1 || ny < 1 || nx > 1'000'000 || ny > 1'000'000) {
        throw ConfigError("pattern dimensions out of range", 1);
    }

    FillPattern p(static_cast<int>(nx), static_cast<int>(ny), pitch_mm / 1000.0);
    std::size_t rows = lines.size() - 1;
    while (rows > 0 && lines[rows].empty() && rows > static_cast<std::size_t>(ny)) --rows;
    if (rows != static_cast<std::size_t>(ny)) {
        throw ConfigError("dimension mismatch: header declares " + std::to_string(ny) +
                              " rows, found " + std::to_string(rows),
                          static_cast<int>(rows) + 1);
    }
    for (int j = 0; j < ny; ++j) {
        const std::string_view row = lines[static_cast<std::size_t>(j) + 1];
        const int line_no = j + 2;
        for (std::size_t i = 0; i < row.size() && i < static_cast<std::size_t>(nx); ++i) {
            const char c = row[i];
            if (c == '#') {
                p.set(static_cast<int>(i), j, true);
            } else if (c != '.') {
                std::string msg = "row " + std::to_string(j) + ": unexpected character";
                if (c == '\r') msg += " (CR; pattern files use LF line endings)";
                throw ConfigError(msg, line_no, static_cast<int>(i) + 1);
            }
        }
        if (row.size() != static_cast<std::size_t>(nx)) {
            throw ConfigError("row " + std::to_string(j) + " has " + std::to_string(row.size()) +
                                  " characters, expected " + std::to_string(nx),
                              line_no);
        }
    }
    return p;
}

// --- grids -------------------------------------------------------------------

bool GridFrame::in_interior(Point channel) const {
    const Point g = to_grid(channel);
    const double lo = pml * dx;
    return g.x >= lo && g.x <= (nx - pml) * dx && g.y >= lo && g.y <= (ny - pml) * dx;
}

GridFrame grid_frame(const ChannelScenario& scenario, double dx, int pml_cells) {
    if (!(dx > 0.0)) throw DomainError("dx must be > 0");
    if (pml_cells < 0) throw DomainError("pml thickness must be >= 0");
    const double w = scenario.surface.w;
    const double x_min = std::min(0.0, scenario.source.position.x) - kBackGap;
    const double x_max = std::max(scenario.d, scenario.source.position.x) + kExitGap;
    const int rows = scenario.clear_rows() + 2 * scenario.n_layers + 2 * scenario.margin_rows();
    const double half = std::max(0.5 * rows * w,
                                 std::abs(scenario.source.position.y) +
                                     0.5 * scenario.source.aperture_width + w);

    GridFrame fr;
    fr.dx = dx;
    fr.pml = pml_cells;
    const int before = pml_cells + cells_covering(-x_min, dx);
    const int after = cells_covering(x_max, dx) + pml_cells;
    const int half_cells = cells_covering(half, dx) + pml_cells;
    fr.nx = before + after;
    fr.ny = 2 * half_cells;
    fr.origin = {before * dx, half_cells * dx};
    return fr;
}

MaterialGrid MaterialGrid::uniform(int nx, int ny, double dx, double eps_rel, double sigma,
                                   int pml_cells) {
    if (nx < 3 || ny < 3) throw DomainError("grid must be at least 3x3");
    if (eps_rel < 1.0 || sigma < 0.0) throw DomainError("invalid uniform material");
    MaterialGrid g;
    g.frame.dx = dx;
    g.frame.nx = nx;
    g.frame.ny = ny;
    g.frame.pml = pml_cells;
    g.frame.origin = {0.5 * nx * dx, 0.5 * ny * dx};
    const auto n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    g.eps_rel.assign(n, eps_rel);
    g.sigma.assign(n, sigma);
    return g;
}

MaterialGrid rasterize(const FillPattern& pattern, const ChannelScenario& scenario, double dx,
                       const RasterOptions& options) {
    scenario.validate();
    const double r = scenario.surface.r;
    if (!(dx > 0.0) || dx > 0.5 * r * (1.0 + 1e-9)) {
        throw DomainError("dx too coarse: cavities need dx <= r/2 (r = " + format_double(r) + " m)");
    }
    const GridFrame fr = grid_frame(scenario, dx, options.pml_thickness);
    const auto n = static_cast<std::size_t>(fr.nx) * static_cast<std::size_t>(fr.ny);
    if (n > options.cell_budget) {
        throw BudgetError("grid of " + std::to_string(fr.nx) + " x " + std::to_string(fr.ny) +
                          " cells exceeds the budget of " + std::to_string(options.cell_budget));
    }
    if (!fr.in_interior(scenario.source.position)) {
        throw DomainError("source lies outside the simulated region");
    }

    const double eps_bg = scenario.background_eps();
    const double sigma_d = 2.0 * std::numbers::pi * scenario.f * constants().eps0 * eps_bg *
                           scenario.surface.tan_delta;

    MaterialGrid g;
    g.frame = fr;
    g.eps_rel.assign(n, eps_bg);
    g.sigma.assign(n, sigma_d);

    const double r2 = r * r;
    for (int j = 0; j < pattern.ny(); ++j) {
        for (int i = 0; i < pattern.nx(); ++i) {
            if (!pattern.filled(i, j)) continue;
            const Point c = fr.to_grid(pattern.site_center(i, j));
            const int i0 = std::max(0, static_cast<int>(std::floor((c.x - r) / dx)) - 1);
            const int i1 = std::min(fr.nx - 1, static_cast<int>(std::ceil((c.x + r) / dx)) + 1);
            const int j0 = std::max(0, static_cast<int>(std::floor((c.y - r) / dx)) - 1);
            const int j1 = std::min(fr.ny - 1, static_cast<int>(std::ceil((c.y + r) / dx)) + 1);
            for (int jj = j0; jj <= j1; ++jj) {
                const double dy = (jj + 0.5) * dx - c.y;
                for (int ii = i0; ii <= i1; ++ii) {
                    const double ddx = (ii + 0.5) * dx - c.x;
                    if (ddx * ddx + dy * dy <= r2) {
                        const std::size_t k = g.index(ii, jj);
                        g.eps_rel[k] = 1.0;
                        g.sigma[k] = scenario.surface.sigma_fill;
                    }
                }
            }
        }
    }
    return g;
}

}  // namespace lmsurf
