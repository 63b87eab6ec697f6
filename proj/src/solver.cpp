#include "lmsurf/solver.hpp"

#include <algorithm>
#include <barrier>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <thread>
#include <utility>

#include "lmsurf/errors.hpp"

namespace lmsurf {

void SolverConfig::validate() const {
    if (!(courant > 0.0 && courant <= 1.0)) throw DomainError("courant must lie in (0, 1]");
    if (!(settle_traversals >= 1.0)) throw DomainError("settle_traversals must be >= 1");
    if (!(measure_cycles >= 4.0)) throw DomainError("measure_cycles must be >= 4");
    if (pml_thickness < 1) throw DomainError("pml_thickness must be >= 1");
    if (!(pml_target_reflection > 0.0 && pml_target_reflection < 1.0)) {
        throw DomainError("pml_target_reflection must lie in (0, 1)");
    }
    if (!(pml_grading_order >= 1.0)) throw DomainError("pml_grading_order must be >= 1");
    if (threads < 1) throw DomainError("threads must be >= 1");
}

double time_step(const MaterialGrid& grid, const SolverConfig& config, double dt_request) {
    const auto [lo, hi] = std::minmax_element(grid.eps_rel.begin(), grid.eps_rel.end());
    (void)hi;
    const double eps_min = grid.eps_rel.empty() ? 1.0 : *lo;
    const double limit =
        config.courant * grid.dx() * std::sqrt(eps_min) / (constants().c0 * std::numbers::sqrt2);
    if (dt_request > 0.0 && dt_request < limit) return dt_request;
    return limit;
}

// --- engine -----------------------------------------------------------------

struct FdtdEngine::Impl {
    int nx = 0;
    int ny = 0;
    int pml = 0;
    double dx = 0.0;
    double dt = 0.0;
    float ch = 0.0f;  // dt / (mu0 dx)

    std::vector<float> ez, hx, hy, peak;
    std::vector<std::uint8_t> mat;
    std::vector<float> ca, cb;  // per material
    std::vector<double> eps_of;  // per material, relative
    std::uint8_t bg = 0;         // most common material

    // Cells whose material differs from `bg`, grouped by row (CSR layout).
    std::vector<std::size_t> exc_row_start;
    std::vector<int> exc_col;
    std::vector<float> exc_old;

    // CPML recursion coefficients. *_e at Ez nodes, *_h at the staggered H nodes.
    std::vector<float> bx_e, ax_e, bx_h, ax_h, by_e, ay_e, by_h, ay_h;
    std::vector<float> psi_hx, psi_hy, psi_ezx, psi_ezy;

    int src_col = -1;
    std::vector<float> src_w;  // per row
    std::function<double(double)> waveform;
    float src_value = 0.0f;

    double limit = 1e30;
    int threads = 1;
    long steps = 0;

    // Per-step shared state, written only inside barrier completions.
    long target = 0;
    bool end_of_step_phase = false;
    bool abort = false;
    std::vector<std::uint8_t> slot_bad;
    std::vector<float> slot_max;
    float worst = 0.0f;

    std::size_t at(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }

    bool pml_row(int j) const { return j < pml || j >= ny - 1 - pml; }

    void h_row(int j);
    void e_row(int j, bool peak_hold);
    void on_phase() noexcept;
    float next_source() const {
        return waveform ? static_cast<float>(waveform((steps + 1) * dt)) : 0.0f;
    }
};

void FdtdEngine::Impl::h_row(int j) {
    float* hy_r = hy.data() + at(0, j);
    const float* e0 = ez.data() + at(0, j);
    const float c = ch;
    for (int i = 0; i < nx - 1; ++i) hy_r[i] += c * (e0[i + 1] - e0[i]);
    {
        float* psi = psi_hy.data() + at(0, j);
        auto fix = [&](int i) {
            psi[i] = bx_h[i] * psi[i] + ax_h[i] * (e0[i + 1] - e0[i]);
            hy_r[i] += c * psi[i];
        };
        for (int i = 0; i < pml && i < nx - 1; ++i) fix(i);
        for (int i = std::max(pml, nx - 1 - pml); i < nx - 1; ++i) fix(i);
    }
    if (j >= ny - 1) return;
    float* hx_r = hx.data() + at(0, j);
    const float* e1 = e0 + nx;
    for (int i = 0; i < nx; ++i) hx_r[i] -= c * (e1[i] - e0[i]);
    if (pml_row(j)) {
        float* psi = psi_hx.data() + at(0, j);
        const float b = by_h[j];
        const float a = ay_h[j];
        for (int i = 0; i < nx; ++i) {
            psi[i] = b * psi[i] + a * (e1[i] - e0[i]);
            hx_r[i] -= c * psi[i];
        }
    }
}

void FdtdEngine::Impl::e_row(int j, bool peak_hold) {
    if (j <= 0 || j >= ny - 1) return;
    float* e = ez.data() + at(0, j);
    const float* hy_r = hy.data() + at(0, j);
    const float* hx_r = hx.data() + at(0, j);
    const float* hx_m = hx_r - nx;
    const std::uint8_t* m = mat.data() + at(0, j);
    const float* ca_t = ca.data();
    const float* cb_t = cb.data();
    const std::size_t xb = exc_row_start[static_cast<std::size_t>(j)];
    const std::size_t xe = exc_row_start[static_cast<std::size_t>(j) + 1];
    for (std::size_t k = xb; k < xe; ++k) exc_old[k] = e[exc_col[k]];
    const float ca0 = ca_t[bg];
    const float cb0 = cb_t[bg];
    for (int i = 1; i < nx - 1; ++i) {
        const float curl = (hy_r[i] - hy_r[i - 1]) - (hx_r[i] - hx_m[i]);
        e[i] = ca0 * e[i] + cb0 * curl;
    }
    for (std::size_t k = xb; k < xe; ++k) {
        const int i = exc_col[k];
        const float curl = (hy_r[i] - hy_r[i - 1]) - (hx_r[i] - hx_m[i]);
        e[i] = ca_t[m[i]] * exc_old[k] + cb_t[m[i]] * curl;
    }
    {
        float* psi = psi_ezx.data() + at(0, j);
        auto fix = [&](int i) {
            psi[i] = bx_e[i] * psi[i] + ax_e[i] * (hy_r[i] - hy_r[i - 1]);
            e[i] += cb_t[m[i]] * psi[i];
        };
        for (int i = 1; i < pml && i < nx - 1; ++i) fix(i);
        for (int i = std::max(std::max(pml, 1), nx - 1 - pml); i < nx - 1; ++i) fix(i);
    }
    if (pml_row(j)) {
        float* psi = psi_ezy.data() + at(0, j);
        const float b = by_e[j];
        const float a = ay_e[j];
        for (int i = 1; i < nx - 1; ++i) {
            psi[i] = b * psi[i] + a * (hx_r[i] - hx_m[i]);
            e[i] -= cb_t[m[i]] * psi[i];
        }
    }
    if (src_col > 0 && src_col < nx - 1 && src_w[static_cast<std::size_t>(j)] != 0.0f) {
        e[src_col] += src_w[static_cast<std::size_t>(j)] * src_value;
    }
    if (peak_hold) {
        float* p = peak.data() + at(0, j);
        for (int i = 1; i < nx - 1; ++i) p[i] = std::max(p[i], std::abs(e[i]));
    }
}

void FdtdEngine::Impl::on_phase() noexcept {
    if (!end_of_step_phase) {
        end_of_step_phase = true;
        return;
    }
    end_of_step_phase = false;
    ++steps;
    if ((steps % 64) == 0 || steps == target) {
        for (std::size_t t = 0; t < slot_bad.size(); ++t) {
            worst = std::max(worst, slot_max[t]);
            if (slot_bad[t]) abort = true;
        }
    }
    if (!abort && steps < target) src_value = next_source();
}

FdtdEngine::FdtdEngine(const MaterialGrid& grid, const SolverConfig& config, double dt_request)
    : impl_(std::make_unique<Impl>()) {
    config.validate();
    Impl& s = *impl_;
    s.nx = grid.nx();
    s.ny = grid.ny();
    s.dx = grid.dx();
    s.pml = grid.pml_thickness();
    if (s.nx < 3 || s.ny < 3) throw DomainError("grid must be at least 3x3");
    if (grid.eps_rel.size() != grid.cells() || grid.sigma.size() != grid.cells() ||
        grid.cells() != static_cast<std::size_t>(s.nx) * static_cast<std::size_t>(s.ny)) {
        throw DomainError("material grid arrays do not match its dimensions");
    }
    if (2 * s.pml >= std::min(s.nx, s.ny)) throw DomainError("absorbing layer fills the whole grid");
    s.dt = time_step(grid, config, dt_request);
    s.threads = config.threads;

    const auto& k = constants();
    s.ch = static_cast<float>(s.dt / (k.mu0 * s.dx));

    // Material table.
    std::map<std::pair<double, double>, std::uint8_t> lookup;
    const std::size_t n = grid.cells();
    s.mat.resize(n);
    double eps_bg = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        const double er = grid.eps_rel[c];
        const double sg = grid.sigma[c];
        if (!(er >= 1.0) || !(sg >= 0.0)) throw DomainError("material grid needs eps_rel >= 1, sigma >= 0");
        eps_bg = std::max(eps_bg, er);
        auto [it, inserted] = lookup.try_emplace({er, sg}, static_cast<std::uint8_t>(lookup.size()));
        if (inserted) {
            if (lookup.size() > 256) throw DomainError("more than 256 distinct materials");
            const double eps = k.eps0 * er;
            const double beta = sg * s.dt / (2.0 * eps);
            s.ca.push_back(static_cast<float>((1.0 - beta) / (1.0 + beta)));
            s.cb.push_back(static_cast<float>(s.dt / (eps * (1.0 + beta) * s.dx)));
            s.eps_of.push_back(er);
        }
        s.mat[c] = it->second;
    }

    {
        std::vector<std::size_t> counts(s.ca.size(), 0);
        for (std::uint8_t v : s.mat) ++counts[v];
        s.bg = static_cast<std::uint8_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        s.exc_row_start.assign(static_cast<std::size_t>(s.ny) + 1, 0);
        for (int j = 0; j < s.ny; ++j) {
            s.exc_row_start[static_cast<std::size_t>(j)] = s.exc_col.size();
            for (int i = 1; i < s.nx - 1; ++i) {
                if (s.mat[s.at(i, j)] != s.bg) s.exc_col.push_back(i);
            }
        }
        s.exc_row_start[static_cast<std::size_t>(s.ny)] = s.exc_col.size();
        s.exc_old.assign(s.exc_col.size(), 0.0f);
    }

    // CPML grading, sigma(depth) = sigma_max * depth^m with depth in [0, 1].
    const double m = config.pml_grading_order;
    const double sigma_max = s.pml > 0 ? -(m + 1.0) * std::log(config.pml_target_reflection) /
                                             (2.0 * k.eta0 * std::sqrt(eps_bg) * s.pml * s.dx)
                                       : 0.0;
    auto coeffs = [&](double pos, int count, std::vector<float>& bv, std::vector<float>& av, int idx) {
        const double left = s.pml > 0 ? (s.pml - pos) / s.pml : 0.0;
        const double right = s.pml > 0 ? (pos - (count - 1 - s.pml)) / s.pml : 0.0;
        const double depth = std::clamp(std::max(left, right), 0.0, 1.0);
        const double sg = s.pml > 0 ? sigma_max * std::pow(depth, m) : 0.0;
        const double b = std::exp(-sg * s.dt / k.eps0);
        bv[static_cast<std::size_t>(idx)] = static_cast<float>(b);
        av[static_cast<std::size_t>(idx)] = static_cast<float>(b - 1.0);
    };
    s.bx_e.assign(static_cast<std::size_t>(s.nx), 1.0f);
    s.ax_e.assign(static_cast<std::size_t>(s.nx), 0.0f);
    s.bx_h = s.bx_e;
    s.ax_h = s.ax_e;
    s.by_e.assign(static_cast<std::size_t>(s.ny), 1.0f);
    s.ay_e.assign(static_cast<std::size_t>(s.ny), 0.0f);
    s.by_h = s.by_e;
    s.ay_h = s.ay_e;
    for (int i = 0; i < s.nx; ++i) {
        coeffs(i, s.nx, s.bx_e, s.ax_e, i);
        coeffs(i + 0.5, s.nx, s.bx_h, s.ax_h, i);
    }
    for (int j = 0; j < s.ny; ++j) {
        coeffs(j, s.ny, s.by_e, s.ay_e, j);
        coeffs(j + 0.5, s.ny, s.by_h, s.ay_h, j);
    }

    s.ez.assign(n, 0.0f);
    s.hx.assign(n, 0.0f);
    s.hy.assign(n, 0.0f);
    s.peak.assign(n, 0.0f);
    s.psi_hx.assign(n, 0.0f);
    s.psi_hy.assign(n, 0.0f);
    s.psi_ezx.assign(n, 0.0f);
    s.psi_ezy.assign(n, 0.0f);
    s.src_w.assign(static_cast<std::size_t>(s.ny), 0.0f);
}

FdtdEngine::~FdtdEngine() = default;

double FdtdEngine::dt() const { return impl_->dt; }
long FdtdEngine::steps_taken() const { return impl_->steps; }
int FdtdEngine::nx() const { return impl_->nx; }
int FdtdEngine::ny() const { return impl_->ny; }

void FdtdEngine::set_source(int column, std::vector<SourceTap> taps,
                            std::function<double(double)> waveform) {
    Impl& s = *impl_;
    if (column < 1 || column >= s.nx - 1) throw DomainError("source column outside the grid");
    std::fill(s.src_w.begin(), s.src_w.end(), 0.0f);
    for (const auto& tap : taps) {
        if (tap.row < 1 || tap.row >= s.ny - 1) throw DomainError("source row outside the grid");
        s.src_w[static_cast<std::size_t>(tap.row)] = tap.weight;
    }
    s.src_col = column;
    s.waveform = std::move(waveform);
}

void FdtdEngine::set_divergence_limit(double limit) { impl_->limit = limit; }

void FdtdEngine::advance(long n, bool peak_hold) {
    Impl& s = *impl_;
    if (n <= 0) return;
    s.target = s.steps + n;
    s.abort = false;
    s.end_of_step_phase = false;
    s.src_value = s.next_source();

    const int workers = std::max(1, std::min(s.threads, s.ny / 4));
    s.slot_bad.assign(static_cast<std::size_t>(workers), 0);
    s.slot_max.assign(static_cast<std::size_t>(workers), 0.0f);
    struct PhaseDone {
        Impl* s;
        void operator()() noexcept { s->on_phase(); }
    };
    std::barrier bar(workers, PhaseDone{&s});

    const long first = s.steps;
    auto body = [&](int t) {
        const int a = static_cast<int>(static_cast<long>(s.ny) * t / workers);
        const int b = static_cast<int>(static_cast<long>(s.ny) * (t + 1) / workers);
        for (long k = 0; k < n; ++k) {
            s.h_row(b - 1);
            bar.arrive_and_wait();
            for (int j = a; j < b; ++j) {
                if (j != b - 1) s.h_row(j);
                s.e_row(j, peak_hold);
            }
            const long done = first + k + 1;
            if ((done % 64) == 0 || done == s.target) {
                bool bad = false;
                float mx = 0.0f;
                for (std::size_t c = s.at(0, a); c < s.at(0, b); ++c) {
                    const float v = std::abs(s.ez[c]);
                    if (!(v <= s.limit)) bad = true;
                    if (v > mx) mx = v;
                }
                s.slot_bad[static_cast<std::size_t>(t)] = bad ? 1 : 0;
                s.slot_max[static_cast<std::size_t>(t)] = mx;
            }
            bar.arrive_and_wait();
            if (s.abort) break;
        }
    };

    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers - 1));
        for (int t = 1; t < workers; ++t) pool.emplace_back(body, t);
        body(0);
    }

    if (s.abort) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, static_cast<double>(s.worst));
        throw NumericalError("solver diverged at step " + std::to_string(s.steps) +
                             ": |Ez| reached " + std::string(buf, res.ptr) +
                             " (non-finite or above the limit); reduce courant or check materials");
    }
}

float FdtdEngine::ez(int i, int j) const { return impl_->ez[impl_->at(i, j)]; }
const std::vector<float>& FdtdEngine::ez_field() const { return impl_->ez; }
const std::vector<float>& FdtdEngine::peak_field() const { return impl_->peak; }

double FdtdEngine::interior_energy() const {
    const Impl& s = *impl_;
    const auto& k = constants();
    double sum = 0.0;
    for (int j = s.pml; j < s.ny - s.pml; ++j) {
        for (int i = s.pml; i < s.nx - s.pml; ++i) {
            const std::size_t c = s.at(i, j);
            const double e = s.ez[c];
            const double hxv = s.hx[c];
            const double hyv = s.hy[c];
            sum += k.eps0 * s.eps_of[s.mat[c]] * e * e + k.mu0 * (hxv * hxv + hyv * hyv);
        }
    }
    return 0.5 * sum * s.dx * s.dx;
}

// --- CW driver ----------------------------------------------------------------

int source_column(const GridFrame& frame, const SourceSpec& source) {
    const Point g = frame.to_grid(source.position);
    return std::clamp(static_cast<int>(std::floor(g.x / frame.dx)), 1, frame.nx - 2);
}

std::vector<SourceTap> aperture_taps(const GridFrame& frame, const SourceSpec& source) {
    std::vector<SourceTap> taps;
    const double half = 0.5 * source.aperture_width;
    const double dx = frame.dx;
    for (int j = 1; j < frame.ny - 1; ++j) {
        const double off = std::abs(frame.cell_center(0, j).y - source.position.y);
        const double u = off - (half - 0.5 * dx);
        double w = 0.0;
        if (u <= 0.0) {
            w = 1.0;
        } else if (u < dx) {
            w = 0.5 * (1.0 + std::cos(std::numbers::pi * u / dx));
        }
        if (w > 0.0) taps.push_back({j, static_cast<float>(w)});
    }
    return taps;
}

namespace {

std::string describe(const SourceSpec& src) {
    auto num = [](double v) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    };
    return "aperture x=" + num(src.position.x) + " y=" + num(src.position.y) +
           " width=" + num(src.aperture_width) + " amplitude=" + num(src.amplitude) +
           " ramp_cycles=" + num(src.ramp_cycles);
}

}  // namespace

FieldMap run(const MaterialGrid& grid, const SourceSpec& source, double f,
             const SolverConfig& config, const RunHooks* hooks) {
    config.validate();
    source.validate();
    if (!(f > 0.0)) throw DomainError("frequency must be > 0");
    if (!grid.frame.in_interior(source.position)) {
        throw DomainError("source lies inside the absorbing layer or outside the grid");
    }

    FdtdEngine engine(grid, config);
    const double dt = engine.dt();
    const double omega = 2.0 * std::numbers::pi * f;
    const double ramp = source.ramp_cycles / f;
    const double amp = source.amplitude;
    engine.set_source(source_column(grid.frame, source), aperture_taps(grid.frame, source),
                      [=](double t) {
                          const double g = t < ramp ? 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp))
                                                    : 1.0;
                          return amp * g * std::sin(omega * t);
                      });
    engine.set_divergence_limit(1e12 * std::abs(amp));

    const double eps_max = *std::max_element(grid.eps_rel.begin(), grid.eps_rel.end());
    const double extent = std::max(grid.nx(), grid.ny()) * grid.dx();
    const double settle = config.settle_traversals * std::sqrt(eps_max) * extent / constants().c0;
    const long settle_steps = static_cast<long>(std::ceil(settle / dt));
    const long window = static_cast<long>(std::ceil(config.measure_cycles / (f * dt)));
    const long total = settle_steps + window;

    const long chunk = std::max(1L, total / 20);
    long done = 0;
    while (done < settle_steps) {
        const long n = std::min(chunk, settle_steps - done);
        engine.advance(n, false);
        done += n;
        if (hooks && hooks->progress) hooks->progress(done, total);
    }
    engine.advance(window, true);
    if (hooks && hooks->progress) hooks->progress(total, total);

    FieldMap map;
    map.frame = grid.frame;
    const auto& peak = engine.peak_field();
    map.envelope.assign(peak.begin(), peak.end());
    map.meta.f_hz = f;
    map.meta.steps = engine.steps_taken();
    map.meta.dt = dt;
    map.meta.source = describe(source);
    return map;
}

// --- sampling -----------------------------------------------------------------

double FieldMap::sample(Point channel) const {
    const Point g = frame.to_grid(channel);
    const double u = g.x / frame.dx - 0.5;
    const double v = g.y / frame.dx - 0.5;
    const int i0 = std::clamp(static_cast<int>(std::floor(u)), 0, frame.nx - 2);
    const int j0 = std::clamp(static_cast<int>(std::floor(v)), 0, frame.ny - 2);
    const double tu = std::clamp(u - i0, 0.0, 1.0);
    const double tv = std::clamp(v - j0, 0.0, 1.0);
    const double a = at(i0, j0) * (1.0 - tu) + at(i0 + 1, j0) * tu;
    const double b = at(i0, j0 + 1) * (1.0 - tu) + at(i0 + 1, j0 + 1) * tu;
    return a * (1.0 - tv) + b * tv;
}

std::vector<ProbeSample> probe_line(const FieldMap& map, Point start, Point end, int n_samples) {
    if (n_samples < 1) throw DomainError("probe_line needs at least one sample");
    if (!map.frame.in_interior(start) || !map.frame.in_interior(end)) {
        throw DomainError("probe line enters the absorbing layer");
    }
    const double length = std::hypot(end.x - start.x, end.y - start.y);
    std::vector<ProbeSample> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k) {
        const double t = n_samples == 1 ? 0.0 : static_cast<double>(k) / (n_samples - 1);
        const Point p{start.x + t * (end.x - start.x), start.y + t * (end.y - start.y)};
        out.push_back({t * length, map.sample(p)});
    }
    return out;
}

}  // namespace lmsurf
