//! The on-off service process seen by the source node.
//!
//! Off periods are exponential with rate `λ_os`. An on period is the pass of
//! one satellite whose track is offset from the node's path by an entry angle
//! `Θ ~ U[-φ_e, φ_e]`; its duration is
//! `W = (2/ω) asin(sqrt(sin² φ_e - sin² Θ) / cos Θ)`, supported on `[0, 2φ_e/ω]`.
//!
//! Expectations over `W` are taken in entry-angle space. `W(Θ)` has square-root
//! behaviour at `Θ = ±φ_e`, so the integral is written in the variable `t`
//! with `sin Θ = sin φ_e cos t`, which makes the integrand analytic on
//! `[0, π/2]`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{ensure_non_negative, ensure_positive, invalid, Error, Result};
use crate::geometry::{off_rate, DomeSpec, GeometryConfig};
use crate::stats::{quadrature, Quadrature};

/// Gauss-Legendre order for entry-angle integrals (doubled for the error estimate).
pub const QUADRATURE_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnOffParams {
    off_rate: f64,
    earth_zenith: f64,
    angular_rate: f64,
}

impl OnOffParams {
    /// A zero `off_rate` is reported as [`Error::PermanentDisconnection`].
    pub fn new(off_rate: f64, earth_zenith: f64, angular_rate: f64) -> Result<Self> {
        if off_rate == 0.0 {
            return Err(Error::PermanentDisconnection);
        }
        ensure_positive("off_rate", off_rate)?;
        ensure_positive("angular_rate", angular_rate)?;
        if !(earth_zenith > 0.0 && earth_zenith < FRAC_PI_2) {
            return Err(invalid(
                "earth_zenith",
                format!("must lie in (0, π/2), got {earth_zenith}"),
            ));
        }
        Ok(Self {
            off_rate,
            earth_zenith,
            angular_rate,
        })
    }

    pub fn from_geometry(cfg: &GeometryConfig) -> Result<Self> {
        let dome = DomeSpec::from_config(cfg)?;
        Self::new(
            off_rate(cfg, dome.earth_zenith)?,
            dome.earth_zenith,
            cfg.angular_rate,
        )
    }

    pub fn off_rate(&self) -> f64 {
        self.off_rate
    }

    pub fn earth_zenith(&self) -> f64 {
        self.earth_zenith
    }

    pub fn angular_rate(&self) -> f64 {
        self.angular_rate
    }

    pub fn with_off_rate(self, off_rate: f64) -> Result<Self> {
        Self::new(off_rate, self.earth_zenith, self.angular_rate)
    }

    /// Upper end of the on-period support, `2 φ_e / ω`.
    pub fn max_service_time(&self) -> f64 {
        2.0 * self.earth_zenith / self.angular_rate
    }
}

/// Angular offset between a satellite track and the node's path.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EntryAngle(pub f64);

/// Pass duration for an entry angle. Even in `theta`.
pub fn service_time_from_entry(params: &OnOffParams, theta: EntryAngle) -> Result<f64> {
    let th = theta.0.abs();
    if th.is_nan() || th > params.earth_zenith {
        return Err(invalid(
            "theta",
            format!(
                "|theta| must not exceed φ_e = {}, got {}",
                params.earth_zenith, theta.0
            ),
        ));
    }
    Ok(pass_duration(params, th))
}

fn pass_duration(params: &OnOffParams, abs_theta: f64) -> f64 {
    let pe = params.earth_zenith;
    // sin²φ_e - sin²Θ without cancellation.
    let chord2 = (pe - abs_theta).sin() * (pe + abs_theta).sin();
    let s = (chord2.max(0.0).sqrt() / abs_theta.cos()).min(1.0);
    2.0 / params.angular_rate * s.asin()
}

/// Density of the on-period duration.
///
/// Zero outside `[0, 2φ_e/ω]`. The density diverges at the upper endpoint,
/// where `+∞` is returned.
pub fn service_pdf(params: &OnOffParams, s: f64) -> f64 {
    let smax = params.max_service_time();
    if !(s >= 0.0 && s <= smax) {
        return 0.0;
    }
    if s == smax {
        return f64::INFINITY;
    }
    let pe = params.earth_zenith;
    let w = params.angular_rate;
    let x = 0.5 * w * s;
    let gap = (pe - x).sin() * (pe + x).sin();
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    w * pe.cos() * x.tan() / (2.0 * pe * gap.sqrt())
}

/// CDF of the on-period duration, obtained by integrating [`service_pdf`].
///
/// The substitution `sin(ωs/2) = sin φ_e sin u` cancels the endpoint
/// singularity; the transformed integrand is `f_W(s(u)) ds/du`.
pub fn service_cdf(params: &OnOffParams, s: f64) -> Result<f64> {
    let smax = params.max_service_time();
    if s <= 0.0 {
        return Ok(0.0);
    }
    if s >= smax {
        return Ok(1.0);
    }
    let pe = params.earth_zenith;
    let w = params.angular_rate;
    let sin_pe = pe.sin();
    let upper = ((0.5 * w * s).sin() / sin_pe).min(1.0).asin();
    let integrand = |u: f64| {
        let su = sin_pe * u.sin();
        let s_of_u = 2.0 / w * su.asin();
        let ds_du = 2.0 / w * sin_pe * u.cos() / (1.0 - su * su).sqrt();
        service_pdf(params, s_of_u) * ds_du
    };
    let q = quadrature(integrand, 0.0, upper, QUADRATURE_ORDER)?;
    Ok(q.value.clamp(0.0, 1.0))
}

/// Draws an on-period by sampling the entry angle and mapping it through `W(Θ)`.
pub fn sample_service_time<R: Rng + ?Sized>(params: &OnOffParams, rng: &mut R) -> f64 {
    let pe = params.earth_zenith;
    let theta = rng.random_range(-pe..=pe);
    pass_duration(params, theta.abs())
}

pub fn sample_off_time<R: Rng + ?Sized>(params: &OnOffParams, rng: &mut R) -> f64 {
    // off_rate > 0 is an invariant of OnOffParams.
    Exp::new(params.off_rate)
        .expect("positive off rate")
        .sample(rng)
}

/// `E[g(W)]` over a uniform entry angle, with a quadrature error estimate.
///
/// `decay` is a hint for how sharply `g` varies near `W = 0` (e.g. `μ` for
/// `g = exp(-μ W)`); large values grade the panels geometrically toward the
/// grazing-pass end so the integrand stays resolved.
pub fn entry_expectation<G>(params: &OnOffParams, decay: f64, g: G) -> Result<Quadrature>
where
    G: Fn(f64) -> f64,
{
    let pe = params.earth_zenith;
    let sin_pe = pe.sin();
    let integrand = |t: f64| {
        let sin_theta = sin_pe * t.cos();
        let cos_theta = (1.0 - sin_theta * sin_theta).sqrt();
        let w = 2.0 / params.angular_rate * (sin_pe * t.sin() / cos_theta).min(1.0).asin();
        g(w) * sin_pe * t.sin() / cos_theta
    };

    // W grows roughly linearly in t near 0, so exp(-decay W) lives on
    // t ≲ 1 / (decay * W_max).
    let scale = decay.abs() * params.max_service_time();
    let mut edges = vec![FRAC_PI_2];
    let mut lo = FRAC_PI_2;
    while scale * lo > 1.0 && edges.len() < 80 {
        lo *= 0.5;
        edges.push(lo);
    }
    edges.push(0.0);
    edges.reverse();

    let mut total = Quadrature::zero();
    for pair in edges.windows(2) {
        total = total.add(quadrature(integrand, pair[0], pair[1], QUADRATURE_ORDER)?);
    }
    Ok(Quadrature {
        value: total.value / pe,
        error_estimate: total.error_estimate / pe,
    })
}

/// `E[W]`.
pub fn mean_service_time(params: &OnOffParams) -> Result<f64> {
    Ok(entry_expectation(params, 0.0, |w| w)?.value)
}

/// `b = E[exp(-μ W)]`, the Laplace transform of the on-period law.
pub fn service_laplace(params: &OnOffParams, mu: f64) -> Result<f64> {
    ensure_non_negative("mu", mu)?;
    if mu == 0.0 {
        return Ok(1.0);
    }
    laplace_unchecked(params, mu)
}

/// `1 - b`, evaluated without cancellation for small `μ`.
pub fn service_laplace_complement(params: &OnOffParams, mu: f64) -> Result<f64> {
    ensure_non_negative("mu", mu)?;
    if mu == 0.0 {
        return Ok(0.0);
    }
    Ok(entry_expectation(params, mu, |w| -(-mu * w).exp_m1())?.value)
}

fn laplace_unchecked(params: &OnOffParams, mu: f64) -> Result<f64> {
    Ok(entry_expectation(params, mu, |w| (-mu * w).exp())?.value)
}
