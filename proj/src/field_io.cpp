#include "lmsurf/field_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lmsurf/errors.hpp"

namespace lmsurf {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int k = 0; k < 8; ++k) r |= ((v >> (8 * k)) & 0xffu) << (8 * (7 - k));
        return r;
    }
}

double parse_double(const std::string& text, const std::string& key) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw FormatError("grid header: bad value for '" + key + "': '" + text + "'");
    }
    return v;
}

long parse_long(const std::string& text, const std::string& key) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw FormatError("grid header: bad value for '" + key + "': '" + text + "'");
    }
    return v;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

const std::string* GridFile::find(std::string_view key) const {
    for (const auto& [k, v] : extra) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::string encode_grid(const GridFile& grid) {
    if (grid.values.size() != static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny)) {
        throw FormatError("grid payload does not match nx * ny");
    }
    std::string out(kGridMagic);
    out += "nx " + std::to_string(grid.nx) + "\n";
    out += "ny " + std::to_string(grid.ny) + "\n";
    out += "dx_m " + format_number(grid.dx) + "\n";
    out += "f_hz " + format_number(grid.f_hz) + "\n";
    for (const auto& [k, v] : grid.extra) {
        if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
            throw FormatError("grid header entries must be single-line");
        }
        out += k + " " + v + "\n";
    }
    out += "end\n";
    const std::size_t head = out.size();
    out.resize(head + grid.values.size() * 8);
    char* dst = out.data() + head;
    for (double v : grid.values) {
        const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
        std::memcpy(dst, &bits, 8);
        dst += 8;
    }
    return out;
}

GridFile decode_grid(std::string_view bytes) {
    if (bytes.substr(0, kGridMagic.size()) != kGridMagic) {
        throw FormatError("not a field map file: magic 'SWFMAP1' missing");
    }
    std::size_t pos = kGridMagic.size();
    GridFile g;
    bool have_nx = false, have_ny = false, have_dx = false, have_f = false, ended = false;
    while (pos < bytes.size()) {
        const std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string_view::npos) break;
        const std::string line(bytes.substr(pos, nl - pos));
        pos = nl + 1;
        if (line == "end") {
            ended = true;
            break;
        }
        const std::size_t sp = line.find(' ');
        if (sp == std::string::npos) throw FormatError("grid header: malformed line '" + line + "'");
        const std::string key = line.substr(0, sp);
        const std::string value = line.substr(sp + 1);
        if (key == "nx") {
            g.nx = static_cast<int>(parse_long(value, key));
            have_nx = true;
        } else if (key == "ny") {
            g.ny = static_cast<int>(parse_long(value, key));
            have_ny = true;
        } else if (key == "dx_m") {
            g.dx = parse_double(value, key);
            have_dx = true;
        } else if (key == "f_hz") {
            g.f_hz = parse_double(value, key);
            have_f = true;
        } else {
            g.extra.emplace_back(key, value);
        }
    }
    if (!ended) throw FormatError("grid header: missing 'end' line");
    if (!have_nx || !have_ny || !have_dx || !have_f) {
        throw FormatError("grid header: nx, ny, dx_m and f_hz are required");
    }
    if (g.nx < 1 || g.ny < 1) throw FormatError("grid header: dimensions must be positive");
    const std::size_t expected = static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny) * 8;
    const std::size_t actual = bytes.size() - pos;
    if (actual != expected) {
        throw FormatError("grid payload size mismatch: expected " + std::to_string(expected) +
                          " bytes, found " + std::to_string(actual) +
                          (actual < expected ? " (truncated file)" : " (trailing data)"));
    }
    g.values.resize(static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny));
    const char* src = bytes.data() + pos;
    for (double& v : g.values) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, src, 8);
        v = std::bit_cast<double>(to_le(bits));
        src += 8;
    }
    return g;
}

std::string encode_fieldmap(const FieldMap& map) {
    GridFile g;
    g.nx = map.nx();
    g.ny = map.ny();
    g.dx = map.dx();
    g.f_hz = map.meta.f_hz;
    g.extra = {
        {"pml_cells", std::to_string(map.frame.pml)},
        {"origin_x_m", format_number(map.frame.origin.x)},
        {"origin_y_m", format_number(map.frame.origin.y)},
        {"steps", std::to_string(map.meta.steps)},
        {"dt_s", format_number(map.meta.dt)},
        {"scenario_hash", std::to_string(map.meta.scenario_hash)},
        {"source", map.meta.source},
    };
    g.values = map.envelope;
    return encode_grid(g);
}

FieldMap decode_fieldmap(std::string_view bytes) {
    GridFile g = decode_grid(bytes);
    if (const auto* unit = g.find("unit"); unit && *unit != "linear") {
        throw FormatError("grid holds '" + *unit + "' values, not a linear field map");
    }
    FieldMap m;
    m.frame.nx = g.nx;
    m.frame.ny = g.ny;
    m.frame.dx = g.dx;
    m.meta.f_hz = g.f_hz;
    if (const auto* v = g.find("pml_cells")) m.frame.pml = static_cast<int>(parse_long(*v, "pml_cells"));
    m.frame.origin = {0.5 * g.nx * g.dx, 0.5 * g.ny * g.dx};
    if (const auto* v = g.find("origin_x_m")) m.frame.origin.x = parse_double(*v, "origin_x_m");
    if (const auto* v = g.find("origin_y_m")) m.frame.origin.y = parse_double(*v, "origin_y_m");
    if (const auto* v = g.find("steps")) m.meta.steps = parse_long(*v, "steps");
    if (const auto* v = g.find("dt_s")) m.meta.dt = parse_double(*v, "dt_s");
    if (const auto* v = g.find("scenario_hash")) {
        std::uint64_t h = 0;
        auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), h);
        if (ec != std::errc() || ptr != v->data() + v->size()) throw FormatError("bad scenario_hash");
        m.meta.scenario_hash = h;
    }
    if (const auto* v = g.find("source")) m.meta.source = *v;
    m.envelope = std::move(g.values);
    return m;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_fieldmap(const std::filesystem::path& path, const FieldMap& map) {
    write_file(path, encode_fieldmap(map));
}

FieldMap read_fieldmap(const std::filesystem::path& path) { return decode_fieldmap(read_file(path)); }

void write_fieldmap_csv(const std::filesystem::path& path, const FieldMap& map, std::size_t max_cells) {
    if (map.envelope.size() > max_cells) {
        throw FormatError("grid too large for CSV export (" + std::to_string(map.envelope.size()) +
                          " cells, limit " + std::to_string(max_cells) + ")");
    }
    std::string out = "x_m,y_m,amplitude\n";
    for (int j = 0; j < map.ny(); ++j) {
        for (int i = 0; i < map.nx(); ++i) {
            const Point p = map.frame.cell_center(i, j);
            out += format_number(p.x) + "," + format_number(p.y) + "," + format_number(map.at(i, j)) + "\n";
        }
    }
    write_file(path, out);
}

}  // namespace lmsurf
