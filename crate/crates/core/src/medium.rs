//! Closed-form physics of the punctured surface.
//!
//! A dielectric slab over a ground plane is perforated by a square lattice of
//! cylindrical cavities. Unfilled cavities lower the slab's permittivity
//! (effective-medium mixing); the slab over metal presents an inductive
//! surface reactance that binds a TM surface wave.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0e-7 * PI;
/// Vacuum light speed, m/s.
pub const C0: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);
/// Free-space wave impedance, Ω.
pub const ETA0: f64 = MU0 * C0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub mu0: f64,
    pub eps0: f64,
    pub c0: f64,
    pub eta0: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        mu0: MU0,
        eps0: EPS0,
        c0: C0,
        eta0: ETA0,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

/// Geometry and material constants of the punctured surface (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceSpec {
    /// Relative permittivity of the bulk dielectric.
    pub eps_r: f64,
    /// Dielectric loss tangent.
    pub tan_delta: f64,
    /// Dielectric thickness.
    pub l_d: f64,
    /// Cavity radius.
    pub r: f64,
    /// Cavity pitch, center to center.
    pub w: f64,
    /// Ground-plane (copper) conductivity.
    pub sigma_ground: f64,
    /// Liquid-metal (Galinstan) conductivity.
    pub sigma_fill: f64,
}

impl Default for SurfaceSpec {
    /// Taconic TLY-5 on annealed copper, 0.5 mm cavities on a 2 mm pitch.
    fn default() -> Self {
        SurfaceSpec {
            eps_r: 2.2,
            tan_delta: 0.0009,
            l_d: 1.6e-3,
            r: 0.5e-3,
            w: 2.0e-3,
            sigma_ground: 59.6e6,
            sigma_fill: 3.46e6,
        }
    }
}

impl SurfaceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_r >= 1.0) {
            return Err(Error::domain(format!(
                "eps_r must be >= 1, got {}",
                self.eps_r
            )));
        }
        if !(self.tan_delta >= 0.0) {
            return Err(Error::domain(format!(
                "tan_delta must be >= 0, got {}",
                self.tan_delta
            )));
        }
        for (name, v) in [
            ("l_d", self.l_d),
            ("r", self.r),
            ("w", self.w),
            ("sigma_ground", self.sigma_ground),
            ("sigma_fill", self.sigma_fill),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(2.0 * self.r < self.w) {
            return Err(Error::domain(format!(
                "cavities overlap: 2r = {} m is not below the pitch w = {} m",
                2.0 * self.r,
                self.w
            )));
        }
        Ok(())
    }
}

/// Surface quantities evaluated at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumReport {
    pub phi: f64,
    pub eps_eff: f64,
    /// Skin depth of the ground metal, m.
    pub delta_skin: f64,
    /// Magnitude of the (inductive) surface reactance, Ω.
    pub x_s: f64,
    pub f: f64,
}

/// Single-mode TM surface-wave estimate over a reactive surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TmWaveParams {
    pub n_eff: f64,
    /// In-plane phase constant, rad/m.
    pub beta: f64,
    /// Decay constant into the air above the surface, 1/m.
    pub alpha_air: f64,
    /// Height at which the field falls to 1/e, m. Infinite for an unbound wave.
    pub confinement_height: f64,
}

/// Volume fraction removed by the cavities: one cavity per `w`×`w` cell.
pub fn porosity(spec: &SurfaceSpec) -> Result<f64> {
    spec.validate()?;
    Ok(PI * spec.r * spec.r / (spec.w * spec.w))
}

/// Effective relative permittivity of a dielectric holding an air-filled
/// volume fraction `phi`.
pub fn effective_permittivity(eps_r: f64, phi: f64) -> Result<f64> {
    if !(eps_r >= 1.0) || !eps_r.is_finite() {
        return Err(Error::domain(format!("eps_r must be >= 1, got {eps_r}")));
    }
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::domain(format!(
            "porosity must lie in [0, 1], got {phi}"
        )));
    }
    let num = eps_r * (1.0 + 3.0 * eps_r + 3.0 * phi * (1.0 - eps_r));
    let den = 1.0 + 3.0 * eps_r + phi * (eps_r - 1.0);
    Ok(num / den)
}

/// Good-conductor skin depth `sqrt(1 / (π f μ0 σ))`.
pub fn skin_depth(sigma: f64, f: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(f > 0.0) {
        return Err(Error::domain(format!(
            "skin depth needs sigma > 0 and f > 0, got sigma = {sigma}, f = {f}"
        )));
    }
    Ok((1.0 / (PI * f * MU0 * sigma)).sqrt())
}

/// Reactance of a grounded slab of permittivity `eps_eff` and thickness
/// `l_d`, including half a skin depth of the ground metal.
pub fn slab_reactance(eps_eff: f64, l_d: f64, delta_skin: f64, f: f64) -> f64 {
    2.0 * PI * f * MU0 * ((eps_eff - 1.0) / eps_eff * l_d + delta_skin / 2.0)
}

/// Evaluates porosity, effective permittivity, skin depth and surface
/// reactance for `spec` at frequency `f`.
pub fn surface_impedance(spec: &SurfaceSpec, f: f64) -> Result<MediumReport> {
    surface_impedance_with_porosity(spec, f, porosity(spec)?)
}

/// Same as [`surface_impedance`] with the porosity supplied by the caller.
pub fn surface_impedance_with_porosity(
    spec: &SurfaceSpec,
    f: f64,
    phi: f64,
) -> Result<MediumReport> {
    spec.validate()?;
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::domain(format!(
            "frequency must be positive, got {f}"
        )));
    }
    let eps_eff = effective_permittivity(spec.eps_r, phi)?;
    let delta_skin = skin_depth(spec.sigma_ground, f)?;
    let x_s = slab_reactance(eps_eff, spec.l_d, delta_skin, f);
    Ok(MediumReport {
        phi,
        eps_eff,
        delta_skin,
        x_s,
        f,
    })
}

/// TM surface wave bound by a reactance `x_s`:
/// `alpha_air = k0 X/η0`, `n_eff = sqrt(1 + (X/η0)²)`.
pub fn tm_wave_parameters(report: &MediumReport) -> TmWaveParams {
    let k0 = 2.0 * PI * report.f / C0;
    let ratio = report.x_s / ETA0;
    let n_eff = (1.0 + ratio * ratio).sqrt();
    let alpha_air = k0 * ratio;
    TmWaveParams {
        n_eff,
        beta: n_eff * k0,
        alpha_air,
        confinement_height: if alpha_air > 0.0 {
            1.0 / alpha_air
        } else {
            f64::INFINITY
        },
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn report_with_reactance(x_s: f64, f: f64) -> MediumReport {
        MediumReport {
            phi: 0.0,
            eps_eff: 1.0,
            delta_skin: 1e-7,
            x_s,
            f,
        }
    }

    #[test]
    fn constants_are_consistent() {
        let c = PhysicalConstants::SI;
        assert_relative_eq!(c.eta0, c.mu0 * c.c0, max_relative = 1e-9);
        assert_relative_eq!(c.c0, 1.0 / (c.mu0 * c.eps0).sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn porosity_examples() {
        let spec = SurfaceSpec::default();
        assert_relative_eq!(porosity(&spec).unwrap(), 0.19635, max_relative = 1e-4);

        let big = SurfaceSpec { r: 0.9e-3, ..spec };
        assert_relative_eq!(porosity(&big).unwrap(), 0.63617, max_relative = 1e-5);

        let tiny = SurfaceSpec { r: 1e-12, ..spec };
        assert!(porosity(&tiny).unwrap() < 1e-15);
    }

    #[test]
    fn porosity_rejects_overlapping_cavities() {
        let spec = SurfaceSpec {
            r: 1.0e-3,
            ..SurfaceSpec::default()
        };
        assert!(matches!(porosity(&spec), Err(Error::Domain(_))));
    }

    #[test]
    fn effective_permittivity_examples() {
        let phi = porosity(&SurfaceSpec::default()).unwrap();
        assert!((effective_permittivity(2.2, phi).unwrap() - 1.94).abs() <= 0.01);
        assert_eq!(effective_permittivity(2.2, 0.0).unwrap(), 2.2);
        assert_relative_eq!(
            effective_permittivity(2.2, 1.0).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn effective_permittivity_domain() {
        assert!(effective_permittivity(2.2, -0.1).is_err());
        assert!(effective_permittivity(2.2, 1.1).is_err());
        assert!(effective_permittivity(0.5, 0.2).is_err());
        assert!(effective_permittivity(f64::NAN, 0.2).is_err());
    }

    #[test]
    fn skin_depth_examples() {
        let cu30 = skin_depth(59.6e6, 30e9).unwrap();
        assert_relative_eq!(cu30, 3.765e-7, max_relative = 1e-3);
        assert_relative_eq!(
            skin_depth(59.6e6, 120e9).unwrap(),
            cu30 / 2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            skin_depth(3.46e6, 30e9).unwrap(),
            1.562e-6,
            max_relative = 1e-3
        );
        assert!(skin_depth(0.0, 30e9).is_err());
        assert!(skin_depth(1.0, -1.0).is_err());
    }

    #[test]
    fn reactance_matches_published_table() {
        let spec = SurfaceSpec::default();
        let r30 = surface_impedance(&spec, 30e9).unwrap();
        let r40 = surface_impedance(&spec, 40e9).unwrap();
        assert!(
            (r30.x_s / 184.0 - 1.0).abs() <= 0.01,
            "x_s(30 GHz) = {}",
            r30.x_s
        );
        assert!(
            (r40.x_s / 245.0 - 1.0).abs() <= 0.01,
            "x_s(40 GHz) = {}",
            r40.x_s
        );
    }

    #[test]
    fn bare_conductor_has_no_reactance() {
        assert_eq!(slab_reactance(1.0, 1.6e-3, 0.0, 30e9), 0.0);
        let spec = SurfaceSpec::default();
        let r = surface_impedance_with_porosity(&spec, 30e9, 1.0).unwrap();
        // Only the skin-depth term survives.
        assert_relative_eq!(r.x_s, PI * 30e9 * MU0 * r.delta_skin, max_relative = 1e-12);
    }

    #[test]
    fn tm_parameters_examples() {
        let p = tm_wave_parameters(&report_with_reactance(184.0, 30e9));
        assert_relative_eq!(p.n_eff, 1.1129, max_relative = 1e-4);
        assert_relative_eq!(p.confinement_height, 3.26e-3, max_relative = 2e-3);

        let unbound = tm_wave_parameters(&report_with_reactance(0.0, 30e9));
        assert_eq!(unbound.n_eff, 1.0);
        assert_eq!(unbound.alpha_air, 0.0);
        assert!(unbound.confinement_height.is_infinite());

        let p = tm_wave_parameters(&report_with_reactance(ETA0, 30e9));
        assert_relative_eq!(p.n_eff, 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn permittivity_decreases_with_porosity() {
        for eps in [1.5, 2.2, 4.0, 10.2] {
            let values: Vec<f64> = (0..100)
                .map(|k| effective_permittivity(eps, k as f64 / 99.0).unwrap())
                .collect();
            assert!(values.windows(2).all(|w| w[1] < w[0]), "eps_r = {eps}");
        }
    }

    #[test]
    fn reactance_increases_with_frequency() {
        let spec = SurfaceSpec::default();
        let xs: Vec<f64> = (1..=100)
            .map(|g| surface_impedance(&spec, g as f64 * 1e9).unwrap().x_s)
            .collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    mod props {
        use proptest::prelude::*;

        use super::super::*;

        proptest! {
            #[test]
            fn permittivity_endpoints(eps in 1.0f64..12.0) {
                let at0 = effective_permittivity(eps, 0.0).unwrap();
                let at1 = effective_permittivity(eps, 1.0).unwrap();
                prop_assert!((at0 - eps).abs() <= 4.0 * f64::EPSILON * eps);
                prop_assert!((at1 - 1.0).abs() <= 4.0 * f64::EPSILON * eps);
            }

            #[test]
            fn permittivity_bounded(eps in 1.0f64..12.0, phi in 0.0f64..1.0) {
                let e = effective_permittivity(eps, phi).unwrap();
                prop_assert!(e >= 1.0 - 1e-12 && e <= eps + 1e-12);
            }

            #[test]
            fn skin_depth_quarter_scaling(sigma in 1e5f64..1e8, f in 1e8f64..1e11) {
                let a = skin_depth(sigma, f).unwrap();
                let b = skin_depth(sigma, 4.0 * f).unwrap();
                prop_assert!((b - a / 2.0).abs() <= 1e-12 * a);
            }

            #[test]
            fn tm_dispersion_consistent(x_s in 0.0f64..2000.0, f in 1e9f64..1e11) {
                let report = MediumReport { phi: 0.0, eps_eff: 1.0, delta_skin: 1e-7, x_s, f };
                let p = tm_wave_parameters(&report);
                let k0 = 2.0 * PI * f / C0;
                prop_assert!(p.n_eff >= 1.0);
                prop_assert!((p.beta - p.n_eff * k0).abs() <= 1e-12 * p.beta);
                let lhs = p.beta * p.beta - p.alpha_air * p.alpha_air;
                prop_assert!((lhs / (k0 * k0) - 1.0).abs() <= 1e-9);
                if p.alpha_air > 0.0 {
                    prop_assert!((p.confinement_height * p.alpha_air - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}
