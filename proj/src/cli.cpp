#include "lmsurf/cli.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <future>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmsurf/errors.hpp"
#include "lmsurf/field_io.hpp"
#include "lmsurf/pipeline.hpp"

namespace lmsurf {

std::string read_config_text(const std::string& path);

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
    std::string config;
    std::string preset = "paper";
    std::string out = "out";
    double dx = 0.0;
    int threads = 0;
};

std::vector<double> parse_csv_numbers(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = item.find_last_not_of(" \t");
        item = item.substr(a, b - a + 1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size()) {
            throw ConfigError("invalid number '" + item + "' in " + what);
        }
        out.push_back(v);
    }
    return out;
}

SimulationSetup load_setup(const CommonOptions& o) {
    SimulationSetup s = make_preset(preset_from_string(o.preset));
    if (!o.config.empty()) apply_config(s, read_config_text(o.config), o.config);
    if (o.dx > 0.0) s.dx = o.dx;
    if (o.threads > 0) s.solver.threads = o.threads;
    try {
        s.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
    return s;
}

std::string hex(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << v;
    return ss.str();
}

json metrics_json(const Metrics& m) {
    return json{{"isolation_db", m.isolation.isolation_db},
                {"inside_mean_db", m.isolation.inside_mean_db},
                {"outside_mean_db", m.isolation.outside_mean_db},
                {"reference_envelope", m.isolation.reference_envelope},
                {"level_at_d_db", m.level_at_d_db},
                {"smoothing_window_m", m.path_loss.smoothing_window}};
}

json parameters_json(const SimulationSetup& s) {
    json p = json::object();
    std::istringstream lines(canonical_text(s));
    std::string line;
    while (std::getline(lines, line)) {
        const auto eq = line.find(" = ");
        p[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return p;
}

void add_common(CLI::App* cmd, CommonOptions& o, bool with_solver) {
    cmd->add_option("--config", o.config, "Scenario config file (key = value, SI units)");
    cmd->add_option("--preset", o.preset, "Base scenario preset")
        ->check(CLI::IsMember({"paper", "fast"}));
    cmd->add_option("--out", o.out, "Output directory");
    if (with_solver) {
        cmd->add_option("--dx", o.dx, "Cell size override, m")->check(CLI::PositiveNumber);
        cmd->add_option("--threads", o.threads, "Solver worker threads")->check(CLI::PositiveNumber);
    }
}

// --- design ------------------------------------------------------------------

int cmd_design(const CommonOptions& o, const std::string& freqs, std::optional<double> phi,
               bool write_file_out, std::ostream& out) {
    SimulationSetup s = make_preset(Preset::paper);
    if (!o.config.empty()) apply_config(s, read_config_text(o.config), o.config);
    const std::vector<double> fs_hz = parse_csv_numbers(freqs, "--freqs");

    std::string csv = "f_hz,phi,eps_eff,delta_skin_m,x_s_ohm,n_eff,confinement_height_m\n";
    for (double f : fs_hz) {
        const MediumReport rep = surface_impedance(s.scenario.surface, f, phi);
        const TmWaveParams tm = tm_wave_parameters(rep);
        csv += format_number(f) + "," + format_number(rep.phi) + "," + format_number(rep.eps_eff) + "," +
               format_number(rep.delta_skin) + "," + format_number(rep.x_s) + "," +
               format_number(tm.n_eff) + "," + format_number(tm.confinement_height) + "\n";
    }
    out << csv;
    if (write_file_out) {
        fs::create_directories(o.out);
        write_file(fs::path(o.out) / "design.csv", csv);
    }
    return kExitOk;
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const CommonOptions& o, bool csv, bool quiet, std::ostream& out, std::ostream& err) {
    const SimulationSetup s = load_setup(o);
    const fs::path dir(o.out);
    fs::create_directories(dir);

    RunHooks hooks;
    int last_pct = -1;
    if (!quiet) {
        hooks.progress = [&](long step, long total) {
            const int pct = static_cast<int>(100 * step / std::max(1L, total));
            if (pct / 10 != last_pct / 10) {
                err << "  step " << step << "/" << total << " (" << pct << "%)\n";
                last_pct = pct;
            }
        };
    }
    const auto t0 = std::chrono::steady_clock::now();
    const FieldMap map = simulate(s, &hooks);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const Metrics m = compute_metrics(map, s.scenario);

    std::vector<std::string> outputs;
    auto emit = [&](const std::string& name, const std::function<void(const fs::path&)>& writer) {
        writer(dir / name);
        outputs.push_back((dir / name).string());
    };
    emit("fieldmap.swf", [&](const fs::path& p) { write_fieldmap(p, map); });
    emit("fieldmap_db.swf", [&](const fs::path& p) { write_dbmap(p, to_db(map, {0.0, 0.0})); });
    emit("isolation.txt", [&](const fs::path& p) { write_file(p, format_isolation(m.isolation)); });
    emit("path_loss.csv", [&](const fs::path& p) { write_file(p, format_path_loss_csv(m.path_loss)); });
    if (csv) emit("fieldmap.csv", [&](const fs::path& p) { write_fieldmap_csv(p, map); });
    outputs.push_back((dir / "manifest.json").string());

    const json manifest = {
        {"command", "simulate"},
        {"config_path", o.config},
        {"preset", o.preset},
        {"parameters", parameters_json(s)},
        {"threads", s.solver.threads},
        {"input_hash", hex(scenario_hash(s))},
        {"grid", {{"nx", map.nx()}, {"ny", map.ny()}, {"dx_m", map.dx()}, {"pml_cells", map.frame.pml},
                  {"steps", map.meta.steps}, {"dt_s", map.meta.dt}}},
        {"metrics", metrics_json(m)},
        {"outputs", outputs},
        {"wall_clock_s", seconds},
    };
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    out << "isolation_db = " << format_number(m.isolation.isolation_db) << "\n"
        << "level_at_d_db = " << format_number(m.level_at_d_db) << "\n"
        << "wall_clock_s = " << format_number(seconds) << "\n";
    return kExitOk;
}

// --- sweep -------------------------------------------------------------------

struct SweepRow {
    double isolation_db = 0.0;
    double gain_db = 0.0;
    double runtime_s = 0.0;
};

int cmd_sweep(const CommonOptions& o, const std::string& axis, const std::string& values_text,
              bool parallel, std::ostream& out, std::ostream& err) {
    const SimulationSetup base = load_setup(o);
    const std::vector<double> values = parse_csv_numbers(values_text, "--values");
    if (values.empty()) throw ConfigError("--values needs at least one number");

    std::vector<SimulationSetup> setups;
    for (double v : values) {
        SimulationSetup s = base;
        if (axis == "l_c") {
            s.scenario.l_c = v;
        } else if (axis == "f") {
            s.scenario.f = v;
        } else if (axis == "n_layers") {
            if (v != std::floor(v) || v < 0) throw ConfigError("n_layers values must be non-negative integers");
            s.scenario.n_layers = static_cast<int>(v);
        } else {
            throw ConfigError("--axis must be one of l_c, f, n_layers");
        }
        try {
            s.validate();
        } catch (const DomainError& e) {
            throw ConfigError("sweep value " + format_number(v) + ": " + e.what());
        }
        if (parallel) s.solver.threads = 1;
        setups.push_back(s);
    }

    // Unfilled-surface references, shared between values that agree on them.
    std::map<std::uint64_t, std::shared_future<double>> baselines;
    std::mutex baseline_mutex;
    auto baseline_level = [&](const SimulationSetup& s) {
        const SimulationSetup b = baseline_of(s);
        std::shared_future<double> fut;
        bool owner = false;
        std::promise<double> promise;
        {
            std::lock_guard lock(baseline_mutex);
            auto [it, inserted] = baselines.try_emplace(scenario_hash(b));
            if (inserted) {
                it->second = promise.get_future().share();
                owner = true;
            }
            fut = it->second;
        }
        if (owner) {
            try {
                const FieldMap map = simulate(b);
                promise.set_value(compute_metrics(map, b.scenario).level_at_d_db);
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return fut.get();
    };
    auto run_one = [&](const SimulationSetup& s) {
        const auto t0 = std::chrono::steady_clock::now();
        const FieldMap map = simulate(s);
        const Metrics m = compute_metrics(map, s.scenario);
        SweepRow row;
        row.isolation_db = m.isolation.isolation_db;
        row.gain_db = m.level_at_d_db - baseline_level(s);
        row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return row;
    };

    const fs::path dir(o.out);
    fs::create_directories(dir);
    const fs::path csv_path = dir / "sweep.csv";
    std::string csv = "# axis=" + axis + " (SI units); gain_at_d_db = guided minus unfilled-surface level at d=" +
                      format_number(base.scenario.d) + " m\n";
    csv += "value,isolation_db,gain_at_d_db,runtime_s\n";
    write_file(csv_path, csv);

    std::vector<std::future<SweepRow>> pending;
    if (parallel) {
        for (const auto& s : setups) pending.push_back(std::async(std::launch::async, run_one, std::cref(s)));
    }
    for (std::size_t k = 0; k < setups.size(); ++k) {
        try {
            const SweepRow row = parallel ? pending[k].get() : run_one(setups[k]);
            const std::string line = format_number(values[k]) + "," + format_number(row.isolation_db) + "," +
                                     format_number(row.gain_db) + "," + format_number(row.runtime_s) + "\n";
            csv += line;
            out << line << std::flush;
        } catch (const std::exception& e) {
            csv += "# FAILED value=" + format_number(values[k]) + ": " + e.what() + "\n";
            csv += "# sweep aborted after " + std::to_string(k) + " of " + std::to_string(setups.size()) +
                   " values\n";
            write_file(csv_path, csv);
            err << "sweep aborted at value " << format_number(values[k]) << ": " << e.what() << "\n";
            return kExitRuntime;
        }
        write_file(csv_path, csv);
    }
    return kExitOk;
}

// --- analyze -----------------------------------------------------------------

int cmd_analyze(const CommonOptions& o, const std::string& map_path, bool write_outputs, std::ostream& out) {
    const SimulationSetup s = load_setup(o);
    const FieldMap map = read_fieldmap(map_path);
    const Metrics m = compute_metrics(map, s.scenario);
    if (write_outputs) {
        const fs::path dir(o.out);
        fs::create_directories(dir);
        write_file(dir / "isolation.txt", format_isolation(m.isolation));
        write_file(dir / "path_loss.csv", format_path_loss_csv(m.path_loss));
        write_file(dir / "metrics.json", json{{"metrics", metrics_json(m)}}.dump(2) + "\n");
    }
    out << format_isolation(m.isolation);
    out << "level_at_d_db = " << format_number(m.level_at_d_db) << "\n";
    return kExitOk;
}

}  // namespace

std::string read_config_text(const std::string& path) {
    try {
        return read_file(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"lmsurf - liquid-metal punctured surface simulator"};
    app.require_subcommand(1);

    CommonOptions design_o, sim_o, sweep_o, analyze_o;

    auto* design = app.add_subcommand("design", "Closed-form surface parameters per frequency (CSV)");
    add_common(design, design_o, false);
    std::string freqs = "30e9,40e9";
    std::optional<double> phi;
    design->add_option("--freqs", freqs, "Comma-separated frequencies, Hz");
    design->add_option("--phi", phi, "Porosity override")->check(CLI::Range(0.0, 1.0));

    auto* sim = app.add_subcommand("simulate", "Run one channel scenario");
    add_common(sim, sim_o, true);
    bool csv = false, quiet = false;
    sim->add_flag("--csv", csv, "Also export the envelope as CSV");
    sim->add_flag("--quiet", quiet, "No progress output");

    auto* sweep = app.add_subcommand("sweep", "Run a scenario per parameter value");
    add_common(sweep, sweep_o, true);
    std::string axis, values;
    bool parallel = false;
    sweep->add_option("--axis", axis, "Parameter to vary")
        ->required()
        ->check(CLI::IsMember({"l_c", "f", "n_layers"}));
    sweep->add_option("--values", values, "Comma-separated values, SI units")->required();
    sweep->add_flag("--parallel", parallel, "Run values concurrently");

    auto* analyze = app.add_subcommand("analyze", "Metrics from an existing field map");
    add_common(analyze, analyze_o, false);
    std::string map_path;
    analyze->add_option("--map", map_path, "Field map file (SWFMAP1)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (design->parsed()) return cmd_design(design_o, freqs, phi, design->count("--out") > 0, out);
        if (sim->parsed()) return cmd_simulate(sim_o, csv, quiet, out, err);
        if (sweep->parsed()) return cmd_sweep(sweep_o, axis, values, parallel, out, err);
        if (analyze->parsed()) return cmd_analyze(analyze_o, map_path, analyze->count("--out") > 0, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const BudgetError& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace lmsurf
