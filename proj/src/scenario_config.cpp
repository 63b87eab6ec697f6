#include "lmsurf/scenario_config.hpp"

#include <charconv>
#include <functional>
#include <map>

#include "lmsurf/errors.hpp"
#include "lmsurf/field_io.hpp"

namespace lmsurf {

Preset preset_from_string(std::string_view name) {
    if (name == "paper") return Preset::paper;
    if (name == "fast") return Preset::fast;
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected paper or fast)");
}

std::string_view to_string(Preset p) { return p == Preset::paper ? "paper" : "fast"; }

void SimulationSetup::validate() const {
    scenario.validate();
    solver.validate();
    if (!(dx > 0.0)) throw DomainError("dx must be > 0");
    if (cell_budget == 0) throw DomainError("cell_budget must be > 0");
}

SimulationSetup make_preset(Preset p) {
    SimulationSetup s;
    if (p == Preset::fast) {
        s.scenario.d = 150.0e-3;
        s.scenario.margin = 16.0e-3;
    }
    return s;
}

namespace {

struct Field {
    std::function<void(SimulationSetup&, const std::string&)> set;
    std::function<std::string(const SimulationSetup&)> get;
};

double to_double(const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("number");
    return out;
}

long to_long(const std::string& v) {
    long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("integer");
    return out;
}

#define LMSURF_REAL(key, expr)                                                          \
    {key, Field{[](SimulationSetup& s, const std::string& v) { s.expr = to_double(v); }, \
                [](const SimulationSetup& s) { return format_number(s.expr); }}}
#define LMSURF_INT(key, expr)                                                                   \
    {key, Field{[](SimulationSetup& s, const std::string& v) {                                  \
                    s.expr = static_cast<decltype(s.expr)>(to_long(v));                          \
                },                                                                              \
                [](const SimulationSetup& s) { return std::to_string(s.expr); }}}

const std::vector<std::pair<std::string, Field>>& table() {
    static const std::vector<std::pair<std::string, Field>> t = {
        LMSURF_REAL("eps_r", scenario.surface.eps_r),
        LMSURF_REAL("tan_delta", scenario.surface.tan_delta),
        LMSURF_REAL("l_d", scenario.surface.l_d),
        LMSURF_REAL("r", scenario.surface.r),
        LMSURF_REAL("w", scenario.surface.w),
        LMSURF_REAL("sigma_ground", scenario.surface.sigma_ground),
        LMSURF_REAL("sigma_fill", scenario.surface.sigma_fill),
        LMSURF_REAL("f", scenario.f),
        LMSURF_REAL("l_c", scenario.l_c),
        LMSURF_REAL("d", scenario.d),
        LMSURF_INT("n_layers", scenario.n_layers),
        LMSURF_REAL("margin", scenario.margin),
        LMSURF_REAL("source_x", scenario.source.position.x),
        LMSURF_REAL("source_y", scenario.source.position.y),
        LMSURF_REAL("aperture_width", scenario.source.aperture_width),
        LMSURF_REAL("amplitude", scenario.source.amplitude),
        LMSURF_REAL("ramp_cycles", scenario.source.ramp_cycles),
        {"background_index",
         Field{[](SimulationSetup& s, const std::string& v) {
                   s.scenario.background_index = background_index_from_string(v);
               },
               [](const SimulationSetup& s) { return std::string(to_string(s.scenario.background_index)); }}},
        LMSURF_REAL("dx", dx),
        LMSURF_REAL("courant", solver.courant),
        LMSURF_REAL("settle_traversals", solver.settle_traversals),
        LMSURF_REAL("measure_cycles", solver.measure_cycles),
        LMSURF_INT("pml_thickness", solver.pml_thickness),
        LMSURF_REAL("pml_target_reflection", solver.pml_target_reflection),
        LMSURF_INT("cell_budget", cell_budget),
    };
    return t;
}

#undef LMSURF_REAL
#undef LMSURF_INT

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : table()) k.push_back(name);
        return k;
    }();
    return keys;
}

void apply_config(SimulationSetup& setup, std::string_view text, const std::string& origin) {
    std::map<std::string, const Field*> by_name;
    for (const auto& [name, field] : table()) by_name[name] = &field;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string body = trim(line);
        if (body.empty()) continue;

        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ": expected 'key = value'", line_no);
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        const auto it = by_name.find(key);
        if (it == by_name.end()) throw ConfigError(origin + ": unknown key '" + key + "'", line_no);
        if (value.empty()) throw ConfigError(origin + ": missing value for key '" + key + "'", line_no);
        try {
            it->second->set(setup, value);
        } catch (const DomainError& e) {
            throw ConfigError(origin + ": key '" + key + "': " + e.what(), line_no);
        } catch (const std::invalid_argument&) {
            throw ConfigError(origin + ": key '" + key + "': invalid value '" + value + "'", line_no);
        }
    }
}

std::string canonical_text(const SimulationSetup& setup) {
    std::string s;
    for (const auto& [name, field] : table()) s += name + " = " + field.get(setup) + "\n";
    return s;
}

std::uint64_t content_hash(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace lmsurf
