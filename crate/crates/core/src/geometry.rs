//! Spherical link geometry: link budget, zenith angles and the coverage dome.
//!
//! Units are kilometres, seconds and radians throughout.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{ensure_non_negative, ensure_positive, invalid, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Noise-limited uplink budget. The SNR at distance `r` is
/// `tx_power * r^-pathloss_exponent / noise_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power: f64,
    pub noise_power: f64,
    pub snr_threshold: f64,
    pub pathloss_exponent: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("tx_power", self.tx_power)?;
        ensure_positive("noise_power", self.noise_power)?;
        ensure_positive("snr_threshold", self.snr_threshold)?;
        ensure_positive("pathloss_exponent", self.pathloss_exponent)?;
        if self.pathloss_exponent < 2.0 {
            return Err(invalid(
                "pathloss_exponent",
                format!("must be >= 2, got {}", self.pathloss_exponent),
            ));
        }
        Ok(())
    }
}

/// How the edge of the coverage dome is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomeBoundary {
    /// Node-centred zenith angle at the dome edge, radians.
    NodeZenith(f64),
    /// Largest decodable slant range, km.
    MaxRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub earth_radius: f64,
    pub altitude: f64,
    /// Relative angular rate of the node against the constellation, rad/s.
    pub angular_rate: f64,
    pub boundary: DomeBoundary,
    /// Satellites per km² on the orbital sphere.
    pub density: f64,
}

impl GeometryConfig {
    pub fn with_node_zenith(
        altitude: f64,
        angular_rate: f64,
        node_zenith: f64,
        density: f64,
    ) -> Result<Self> {
        let cfg = Self {
            earth_radius: EARTH_RADIUS_KM,
            altitude,
            angular_rate,
            boundary: DomeBoundary::NodeZenith(node_zenith),
            density,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_link_budget(
        altitude: f64,
        angular_rate: f64,
        budget: &LinkBudget,
        density: f64,
    ) -> Result<Self> {
        let cfg = Self {
            earth_radius: EARTH_RADIUS_KM,
            altitude,
            angular_rate,
            boundary: DomeBoundary::MaxRange(max_range_from_budget(budget)?),
            density,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("earth_radius", self.earth_radius)?;
        ensure_positive("altitude", self.altitude)?;
        ensure_positive("angular_rate", self.angular_rate)?;
        ensure_non_negative("density", self.density)?;
        match self.boundary {
            DomeBoundary::NodeZenith(z) => check_node_zenith(z)?,
            DomeBoundary::MaxRange(r) => {
                node_zenith_from_max_range(r, self.earth_radius, self.altitude)?;
            }
        }
        Ok(())
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    /// Radius of the orbital sphere, `R + h`.
    pub fn orbit_radius(&self) -> f64 {
        self.earth_radius + self.altitude
    }

    /// `R / (R + h)`.
    pub fn rho(&self) -> f64 {
        self.earth_radius / self.orbit_radius()
    }

    pub fn node_zenith(&self) -> Result<f64> {
        match self.boundary {
            DomeBoundary::NodeZenith(z) => {
                check_node_zenith(z)?;
                Ok(z)
            }
            DomeBoundary::MaxRange(r) => {
                node_zenith_from_max_range(r, self.earth_radius, self.altitude)
            }
        }
    }

    /// Time for the node to sweep one full great circle, `2π/ω`.
    pub fn revolution_period(&self) -> f64 {
        2.0 * PI / self.angular_rate
    }
}

fn check_node_zenith(z: f64) -> Result<()> {
    if z.is_finite() && z > 0.0 && z <= FRAC_PI_2 {
        Ok(())
    } else {
        Err(invalid(
            "node_zenith",
            format!("must lie in (0, π/2], got {z}"),
        ))
    }
}

/// The coverage dome seen from the node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomeSpec {
    /// Earth-centred half-angle of the dome.
    pub earth_zenith: f64,
    pub node_zenith: f64,
    pub max_range: f64,
    /// Orbital-sphere area newly swept by the moving dome per second, km²/s.
    pub sweep_rate_area: f64,
}

impl DomeSpec {
    pub fn from_config(cfg: &GeometryConfig) -> Result<Self> {
        cfg.validate()?;
        let node_zenith = cfg.node_zenith()?;
        let earth_zenith = earth_zenith_from_node_zenith(node_zenith, cfg.rho())?;
        let max_range = match cfg.boundary {
            DomeBoundary::MaxRange(r) => r,
            DomeBoundary::NodeZenith(_) => max_range_from_angles(cfg, earth_zenith)?,
        };
        Ok(Self {
            earth_zenith,
            node_zenith,
            max_range,
            sweep_rate_area: sweep_rate_area(cfg, earth_zenith),
        })
    }

    /// Longest possible single-satellite pass, `2 φ_e / ω`.
    pub fn max_pass_duration(&self, angular_rate: f64) -> f64 {
        2.0 * self.earth_zenith / angular_rate
    }
}

/// `(P_tx / (σ² θ))^(1/α)`.
pub fn max_range_from_budget(budget: &LinkBudget) -> Result<f64> {
    budget.validate()?;
    let ratio = budget.tx_power / (budget.noise_power * budget.snr_threshold);
    Ok(ratio.powf(budget.pathloss_exponent.recip()))
}

/// Earth-centred dome half-angle for a node-centred zenith angle.
///
/// `φ_e = acot([cot φ_s + ρ sqrt(cot² φ_s + 1 - ρ²)] / (1 - ρ²))`. The
/// acot argument is positive on `(0, π/2]`, so `atan(1/x)` lands in
/// `(0, π/2)` without quadrant fix-ups. `node_zenith = 0` returns 0.
pub fn earth_zenith_from_node_zenith(node_zenith: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid("rho", format!("must lie in (0, 1), got {rho}")));
    }
    if node_zenith == 0.0 {
        return Ok(0.0);
    }
    check_node_zenith(node_zenith)?;
    let one_minus_rho2 = 1.0 - rho * rho;
    let cot = node_zenith.cos() / node_zenith.sin();
    let x = (cot + rho * (cot * cot + one_minus_rho2).sqrt()) / one_minus_rho2;
    Ok(x.recip().atan())
}

/// Node-centred zenith angle at which a satellite sits at slant range `max_range`.
///
/// Law of cosines on the Earth-centre/node/satellite triangle. Valid ranges
/// run from the altitude (overhead, excluded) to the horizon distance.
pub fn node_zenith_from_max_range(max_range: f64, earth_radius: f64, altitude: f64) -> Result<f64> {
    ensure_positive("max_range", max_range)?;
    let orbit = earth_radius + altitude;
    let horizon = horizon_range(earth_radius, altitude);
    if max_range <= altitude || max_range > horizon * (1.0 + 1e-12) {
        return Err(invalid(
            "max_range",
            format!("must lie in ({altitude}, {horizon}] km for this altitude, got {max_range}"),
        ));
    }
    let cos_z = (orbit * orbit - earth_radius * earth_radius - max_range * max_range)
        / (2.0 * earth_radius * max_range);
    Ok(cos_z.clamp(0.0, 1.0).acos())
}

/// Slant range to the horizon, `sqrt((R+h)² - R²)`.
pub fn horizon_range(earth_radius: f64, altitude: f64) -> f64 {
    (altitude * (2.0 * earth_radius + altitude)).sqrt()
}

/// Slant range from the node to the dome edge given both zenith angles.
///
/// `[(R+h) cos φ_e - R] / cos φ_s`; at `φ_s = π/2` the quotient is 0/0 and
/// the horizon distance (the same triangle's law-of-cosines limit) is used.
pub fn slant_range(earth_radius: f64, altitude: f64, node_zenith: f64, earth_zenith: f64) -> f64 {
    let cos_s = node_zenith.cos();
    if cos_s.abs() < 1e-12 {
        return horizon_range(earth_radius, altitude);
    }
    ((earth_radius + altitude) * earth_zenith.cos() - earth_radius) / cos_s
}

pub fn max_range_from_angles(cfg: &GeometryConfig, earth_zenith: f64) -> Result<f64> {
    let node_zenith = cfg.node_zenith()?;
    if !(earth_zenith >= 0.0 && earth_zenith < node_zenith) {
        return Err(invalid(
            "earth_zenith",
            format!("must lie in [0, node_zenith = {node_zenith}), got {earth_zenith}"),
        ));
    }
    Ok(slant_range(
        cfg.earth_radius,
        cfg.altitude,
        node_zenith,
        earth_zenith,
    ))
}

/// `2 ω sin φ_e (R+h)²`: orbital-sphere area entering the dome per second.
pub fn sweep_rate_area(cfg: &GeometryConfig, earth_zenith: f64) -> f64 {
    let r = cfg.orbit_radius();
    2.0 * cfg.angular_rate * earth_zenith.sin() * r * r
}

/// Rate of the exponential off-service periods, `2 ω λ sin φ_e (R+h)²`.
pub fn off_rate(cfg: &GeometryConfig, earth_zenith: f64) -> Result<f64> {
    cfg.validate()?;
    if !(earth_zenith > 0.0 && earth_zenith < FRAC_PI_2) {
        return Err(invalid(
            "earth_zenith",
            format!("must lie in (0, π/2), got {earth_zenith}"),
        ));
    }
    Ok(cfg.density * sweep_rate_area(cfg, earth_zenith))
}

/// Mean number of satellites on the whole orbital sphere, `λ 4π (R+h)²`.
pub fn satellite_count(density: f64, cfg: &GeometryConfig) -> Result<f64> {
    ensure_non_negative("density", density)?;
    Ok(density * sphere_area(cfg))
}

pub fn density_from_count(count: f64, cfg: &GeometryConfig) -> Result<f64> {
    ensure_non_negative("count", count)?;
    Ok(count / sphere_area(cfg))
}

fn sphere_area(cfg: &GeometryConfig) -> f64 {
    let r = cfg.orbit_radius();
    4.0 * PI * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const OMEGA: f64 = PI / 3600.0;

    fn defaults(density: f64) -> GeometryConfig {
        GeometryConfig::with_node_zenith(800.0, OMEGA, 1f64.to_radians(), density).unwrap()
    }

    /// Independent route: the triangle angles sum to π and the law of sines
    /// gives the satellite-vertex angle, so φ_e = φ_s - asin(ρ sin φ_s).
    fn earth_zenith_law_of_sines(node_zenith: f64, rho: f64) -> f64 {
        node_zenith - (rho * node_zenith.sin()).asin()
    }

    fn budget(ratio: f64, alpha: f64) -> LinkBudget {
        LinkBudget {
            tx_power: ratio * 2.0 * 0.5,
            noise_power: 2.0,
            snr_threshold: 0.5,
            pathloss_exponent: alpha,
        }
    }

    #[test]
    fn range_from_budget_exact_powers() {
        assert_eq!(max_range_from_budget(&budget(1.0, 2.0)).unwrap(), 1.0);
        assert_eq!(max_range_from_budget(&budget(1.0, 3.7)).unwrap(), 1.0);
        assert!((max_range_from_budget(&budget(1e6, 2.0)).unwrap() - 1000.0).abs() < 1e-9);
        assert!((max_range_from_budget(&budget(1e6, 3.0)).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_budget_rejected() {
        let mut b = budget(10.0, 2.0);
        b.pathloss_exponent = 1.5;
        assert!(max_range_from_budget(&b).is_err());
        b.pathloss_exponent = 2.0;
        b.noise_power = 0.0;
        assert!(max_range_from_budget(&b).is_err());
    }

    #[test]
    fn horizon_case_is_arccos_rho() {
        for rho in [0.1, 0.5, 6371.0 / 7171.0, 0.99] {
            let pe = earth_zenith_from_node_zenith(FRAC_PI_2, rho).unwrap();
            assert!((pe - rho.acos()).abs() < 1e-12, "rho={rho}");
        }
    }

    #[test]
    fn overhead_limit() {
        assert_eq!(earth_zenith_from_node_zenith(0.0, 0.8).unwrap(), 0.0);
        let tiny = earth_zenith_from_node_zenith(1e-9, 0.8).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-9);
    }

    #[test]
    fn one_degree_default() {
        let rho = 6371.0 / 7171.0;
        let pe = earth_zenith_from_node_zenith(1f64.to_radians(), rho).unwrap();
        // 40-digit evaluation of the law-of-sines route.
        assert!((pe - 0.001_947_263_067_213_291_5).abs() < 1e-12, "{pe}");
        assert!((pe - earth_zenith_law_of_sines(1f64.to_radians(), rho)).abs() < 1e-12);
        assert!((pe.to_degrees() - 0.1116).abs() < 1e-4);
    }

    #[test]
    fn out_of_range_zenith_rejected() {
        assert!(earth_zenith_from_node_zenith(-0.1, 0.8).is_err());
        assert!(earth_zenith_from_node_zenith(FRAC_PI_2 + 1e-6, 0.8).is_err());
        assert!(earth_zenith_from_node_zenith(0.3, 1.0).is_err());
        assert!(GeometryConfig::with_node_zenith(800.0, OMEGA, 0.0, 1e-5).is_err());
    }

    #[test]
    fn overhead_slant_range_is_altitude() {
        assert_eq!(slant_range(6371.0, 800.0, 0.0, 0.0), 800.0);
    }

    #[test]
    fn horizon_slant_range() {
        let cfg = GeometryConfig::with_node_zenith(800.0, OMEGA, FRAC_PI_2, 1e-5).unwrap();
        let pe = earth_zenith_from_node_zenith(FRAC_PI_2, cfg.rho()).unwrap();
        let r = max_range_from_angles(&cfg, pe).unwrap();
        let pythagoras = (7171.0f64 * 7171.0 - 6371.0 * 6371.0).sqrt();
        assert!((r - pythagoras).abs() < 1e-9);
        assert!((r - 3291.44).abs() < 0.01);
        // The general formula just below π/2 converges to the same value.
        let z = FRAC_PI_2 - 1e-7;
        let pe = earth_zenith_from_node_zenith(z, cfg.rho()).unwrap();
        assert!((slant_range(6371.0, 800.0, z, pe) - pythagoras).abs() < 1e-2);
    }

    #[test]
    fn budget_round_trip() {
        for ratio in [1e6, 2.5e6, 5e6, 9e6] {
            let b = budget(ratio, 2.0);
            let r = max_range_from_budget(&b).unwrap();
            let cfg = GeometryConfig::with_link_budget(800.0, OMEGA, &b, 1e-5).unwrap();
            let z = cfg.node_zenith().unwrap();
            let pe = earth_zenith_from_node_zenith(z, cfg.rho()).unwrap();
            let back = slant_range(cfg.earth_radius, cfg.altitude, z, pe);
            assert!(((back - r) / r).abs() < 1e-9, "{ratio}: {r} vs {back}");
            let dome = DomeSpec::from_config(&cfg).unwrap();
            assert_eq!(dome.max_range, r);
        }
    }

    #[test]
    fn range_outside_dome_limits_rejected() {
        assert!(node_zenith_from_max_range(700.0, 6371.0, 800.0).is_err());
        assert!(node_zenith_from_max_range(4000.0, 6371.0, 800.0).is_err());
    }

    #[test]
    fn off_rate_default_point() {
        let cfg = defaults(2e-5);
        let pe = earth_zenith_from_node_zenith(cfg.node_zenith().unwrap(), cfg.rho()).unwrap();
        let rate = off_rate(&cfg, pe).unwrap();
        // 40-digit evaluation of 2ωλ sin(φ_e)(R+h)² at the oracle φ_e.
        assert!((rate - 3.495_353_953_272_695_8e-3).abs() < 1e-15, "{rate}");
    }

    #[test]
    fn off_rate_linear_in_density_and_rate() {
        let cfg = defaults(2e-5);
        let pe = DomeSpec::from_config(&cfg).unwrap().earth_zenith;
        let base = off_rate(&cfg, pe).unwrap();
        assert_eq!(off_rate(&cfg.with_density(0.0), pe).unwrap(), 0.0);
        let dbl = off_rate(&cfg.with_density(4e-5), pe).unwrap();
        assert!((dbl - 2.0 * base).abs() < 1e-15);
        let mut fast = cfg;
        fast.angular_rate *= 2.0;
        assert!((off_rate(&fast, pe).unwrap() - 2.0 * base).abs() < 1e-15);
    }

    #[test]
    fn dome_invariants_at_defaults() {
        let dome = DomeSpec::from_config(&defaults(2e-5)).unwrap();
        assert!(dome.earth_zenith > 0.0 && dome.earth_zenith < dome.node_zenith);
        assert!(dome.max_range > 800.0);
        assert!((dome.max_pass_duration(OMEGA) - 4.4628).abs() < 1e-3);
    }

    #[test]
    fn satellite_counts() {
        let cfg = defaults(0.0);
        assert_eq!(satellite_count(0.0, &cfg).unwrap(), 0.0);
        assert!((satellite_count(2e-5, &cfg).unwrap() - 12_924.070_091_95).abs() < 1e-6);
        assert!((satellite_count(5e-4, &cfg).unwrap() - 323_101.752_298_75).abs() < 1e-4);
        let d = density_from_count(12_924.070_091_95, &cfg).unwrap();
        assert!((d - 2e-5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn earth_zenith_matches_law_of_sines(z in 1e-6f64..FRAC_PI_2, h in 100.0f64..40_000.0) {
            let rho = 6371.0 / (6371.0 + h);
            let pe = earth_zenith_from_node_zenith(z, rho).unwrap();
            prop_assert!((pe - earth_zenith_law_of_sines(z, rho)).abs() < 1e-12);
            prop_assert!(pe > 0.0 && pe < z);
        }

        #[test]
        fn earth_zenith_increasing(z in 1e-4f64..1.5, dz in 1e-4f64..0.07, h in 200.0f64..2000.0, dh in 1.0f64..500.0) {
            let rho = |h: f64| 6371.0 / (6371.0 + h);
            let at = |z: f64, h: f64| earth_zenith_from_node_zenith(z, rho(h)).unwrap();
            prop_assert!(at(z + dz, h) > at(z, h));
            prop_assert!(at(z, h + dh) > at(z, h));
        }

        #[test]
        fn off_rate_increasing_in_node_zenith(z in 1e-3f64..1.5, dz in 1e-3f64..0.07) {
            let rate = |z: f64| {
                let cfg = GeometryConfig::with_node_zenith(800.0, OMEGA, z, 2e-5).unwrap();
                off_rate(&cfg, DomeSpec::from_config(&cfg).unwrap().earth_zenith).unwrap()
            };
            prop_assert!(rate(z + dz) > rate(z));
        }

        #[test]
        fn budget_angle_round_trip(frac in 0.02f64..0.999, h in 300.0f64..2000.0) {
            let r = h + frac * (horizon_range(6371.0, h) - h);
            let z = node_zenith_from_max_range(r, 6371.0, h).unwrap();
            let pe = earth_zenith_from_node_zenith(z, 6371.0 / (6371.0 + h)).unwrap();
            let back = slant_range(6371.0, h, z, pe);
            prop_assert!(((back - r) / r).abs() < 1e-9, "{} vs {}", r, back);
        }
    }
}
