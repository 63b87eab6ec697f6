// medium.hpp - closed-form physics of the punctured liquid-metal surface.
//
// A dielectric slab over a ground plane is perforated by a square lattice of
// cylindrical cavities. The homogenized slab gives an effective permittivity,
// which in turn sets the inductive reactance that binds a TM surface wave.
// All functions here are pure and reentrant.

#pragma once

#include <optional>

namespace lmsurf {

struct PhysicalConstants {
    double mu0;   // H/m
    double eps0;  // F/m
    double c0;    // m/s
    double eta0;  // ohm
};

/// mu0 = 4*pi*1e-7, c0 exact SI value, eps0 and eta0 derived from them.
const PhysicalConstants& constants();

/// Geometry and material constants of the surface. Defaults are the Taconic
/// TLY-5 / copper / Galinstan design with 0.5 mm cavities on a 2 mm pitch.
struct SurfaceSpec {
    double eps_r = 2.2;
    double tan_delta = 0.0009;
    double l_d = 1.6e-3;           // dielectric thickness, m
    double r = 0.5e-3;             // cavity radius, m
    double w = 2.0e-3;             // cavity pitch, m
    double sigma_ground = 59.6e6;  // copper, S/m
    double sigma_fill = 3.46e6;    // Galinstan, S/m

    /// Throws DomainError naming the first violated invariant.
    void validate() const;
};

struct MediumReport {
    double phi = 0.0;         // porosity
    double eps_eff = 1.0;     // effective relative permittivity
    double delta_skin = 0.0;  // m
    double x_s = 0.0;         // surface reactance magnitude, ohm
    double f = 0.0;           // Hz
};

struct TmWaveParams {
    double n_eff = 1.0;
    double beta = 0.0;       // rad/m
    double alpha_air = 0.0;  // 1/m
    double confinement_height = 0.0;  // m; +inf for an unbound wave
};

/// Cavity area fraction, pi r^2 / w^2 (one cavity per w x w cell).
double porosity(const SurfaceSpec& spec);

/// Effective relative permittivity of a dielectric with air inclusions at
/// volume fraction phi.
double effective_permittivity(double eps_r, double phi);

/// Good-conductor skin depth sqrt(1 / (pi f mu0 sigma)).
double skin_depth(double sigma, double f);

/// Inductive reactance of a grounded slab of thickness l_d:
///   X_s = 2 pi f mu0 ((eps_eff - 1) / eps_eff * l_d + delta / 2)
double surface_reactance(double eps_eff, double l_d, double delta_skin, double f);

/// Full evaluation chain for a surface at frequency f. The skin depth uses the
/// ground-plane conductivity. `phi_override` replaces the lattice porosity.
MediumReport surface_impedance(const SurfaceSpec& spec, double f,
                               std::optional<double> phi_override = std::nullopt);

/// Bound TM wave over a reactive surface: alpha = k0 X_s / eta0,
/// n_eff = sqrt(1 + (X_s / eta0)^2).
TmWaveParams tm_wave_parameters(const MediumReport& report);

}  // namespace lmsurf
