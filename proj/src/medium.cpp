#include "lmsurf/medium.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lmsurf/errors.hpp"

namespace lmsurf {

namespace {

PhysicalConstants make_constants() {
    PhysicalConstants k{};
    k.mu0 = 4.0e-7 * std::numbers::pi;
    k.c0 = 299792458.0;
    k.eps0 = 1.0 / (k.mu0 * k.c0 * k.c0);
    k.eta0 = k.mu0 * k.c0;
    return k;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace

const PhysicalConstants& constants() {
    static const PhysicalConstants k = make_constants();
    return k;
}

void SurfaceSpec::validate() const {
    require(std::isfinite(eps_r) && eps_r >= 1.0, "eps_r must be >= 1");
    require(std::isfinite(tan_delta) && tan_delta >= 0.0, "tan_delta must be >= 0");
    require(std::isfinite(l_d) && l_d > 0.0, "l_d must be > 0");
    require(std::isfinite(r) && r > 0.0, "cavity radius r must be > 0");
    require(std::isfinite(w) && w > 0.0, "pitch w must be > 0");
    require(std::isfinite(sigma_ground) && sigma_ground > 0.0, "sigma_ground must be > 0");
    require(std::isfinite(sigma_fill) && sigma_fill > 0.0, "sigma_fill must be > 0");
    require(2.0 * r < w, "cavities overlap: 2r must be < w");
}

double porosity(const SurfaceSpec& spec) {
    spec.validate();
    return std::numbers::pi * spec.r * spec.r / (spec.w * spec.w);
}

double effective_permittivity(double eps_r, double phi) {
    require(std::isfinite(eps_r) && eps_r >= 1.0, "eps_r must be >= 1");
    require(phi >= 0.0 && phi <= 1.0, "porosity must lie in [0, 1]");
    const double num = eps_r * (1.0 + 3.0 * eps_r + 3.0 * phi * (1.0 - eps_r));
    const double den = 1.0 + 3.0 * eps_r + phi * (eps_r - 1.0);
    return num / den;
}

double skin_depth(double sigma, double f) {
    require(std::isfinite(sigma) && sigma > 0.0, "conductivity must be > 0");
    require(std::isfinite(f) && f > 0.0, "frequency must be > 0");
    return std::sqrt(1.0 / (std::numbers::pi * f * constants().mu0 * sigma));
}

double surface_reactance(double eps_eff, double l_d, double delta_skin, double f) {
    require(eps_eff >= 1.0, "eps_eff must be >= 1");
    require(l_d >= 0.0 && delta_skin >= 0.0, "thicknesses must be >= 0");
    require(f > 0.0, "frequency must be > 0");
    const double slab = (eps_eff - 1.0) / eps_eff * l_d;
    return 2.0 * std::numbers::pi * f * constants().mu0 * (slab + 0.5 * delta_skin);
}

MediumReport surface_impedance(const SurfaceSpec& spec, double f,
                               std::optional<double> phi_override) {
    spec.validate();
    MediumReport out;
    out.f = f;
    out.phi = phi_override ? *phi_override : porosity(spec);
    out.eps_eff = effective_permittivity(spec.eps_r, out.phi);
    out.delta_skin = skin_depth(spec.sigma_ground, f);
    out.x_s = surface_reactance(out.eps_eff, spec.l_d, out.delta_skin, f);
    return out;
}

TmWaveParams tm_wave_parameters(const MediumReport& report) {
    require(report.f > 0.0, "frequency must be > 0");
    require(report.x_s >= 0.0, "reactance must be >= 0");
    const auto& k = constants();
    const double k0 = 2.0 * std::numbers::pi * report.f / k.c0;
    const double ratio = report.x_s / k.eta0;

    TmWaveParams p;
    p.n_eff = std::sqrt(1.0 + ratio * ratio);
    p.beta = p.n_eff * k0;
    p.alpha_air = k0 * ratio;
    p.confinement_height = p.alpha_air > 0.0 ? 1.0 / p.alpha_air
                                             : std::numeric_limits<double>::infinity();
    return p;
}

}  // namespace lmsurf
