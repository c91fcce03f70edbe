//! Closed-form AoI for Poisson updates through the on-off service process.
//!
//! Every intermediate of the chain is exposed so each can be checked on its
//! own. Complements such as `1 - b` and `1 - P_f|f` are carried explicitly
//! rather than formed by subtraction, which keeps the chain accurate at
//! both ends of the update-rate range.

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::onoff::{mean_service_time, service_laplace, service_laplace_complement, OnOffParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateModel {
    /// Poisson generation rate `μ`, 1/s.
    pub update_rate: f64,
    /// Constant source-to-destination delay `D`, s.
    pub propagation_delay: f64,
}

impl UpdateModel {
    pub fn new(update_rate: f64, propagation_delay: f64) -> Result<Self> {
        let m = Self {
            update_rate,
            propagation_delay,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("update_rate", self.update_rate)?;
        ensure_non_negative("propagation_delay", self.propagation_delay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoiBreakdown {
    pub a: f64,
    pub b: f64,
    pub p_f_given_f: f64,
    pub p_off: f64,
    pub p_o_given_o: f64,
    pub gamma: f64,
    pub mean_y: f64,
    pub second_moment_y: f64,
    pub time_avg_aoi: f64,
}

/// The chain with its complements, shared by the public entry points.
#[derive(Debug, Clone, Copy)]
struct Chain {
    a: f64,
    b: f64,
    p_f_given_f: f64,
    /// `1 - P_f|f`.
    p_f_leave: f64,
    p_off: f64,
    /// `1 - P_o|o`.
    p_o_leave: f64,
}

impl Chain {
    fn gamma(&self) -> f64 {
        self.p_f_leave.recip()
    }
}

fn chain(params: &OnOffParams, model: &UpdateModel) -> Result<Chain> {
    model.validate()?;
    let mu = model.update_rate;
    let los = params.off_rate();
    let a = los / (mu + los);
    let a_c = mu / (mu + los);
    let b = service_laplace(params, mu)?;
    let b_c = service_laplace_complement(params, mu)?;
    let one_minus_ab = a_c + a * b_c;
    let p_f_given_f = a_c / one_minus_ab;
    let p_f_leave = a * b_c / one_minus_ab;

    let load = load(params)?;
    let p_off = (1.0 + load).recip();
    // P_off / (1 - P_off) = 1 / (λ_os E[W]).
    let p_o_leave = p_f_leave / load;
    Ok(Chain {
        a,
        b,
        p_f_given_f,
        p_f_leave,
        p_off,
        p_o_leave,
    })
}

/// `λ_os E[W]`: mean on time per mean off time.
fn load(params: &OnOffParams) -> Result<f64> {
    let x = params.off_rate() * mean_service_time(params)?;
    // Coverage so rare that 1/x overflows is indistinguishable from none.
    if !x.recip().is_finite() {
        return Err(Error::PermanentDisconnection);
    }
    Ok(x)
}

/// Probability that the next update lands in an off period given the
/// current one did: `(1 - a) / (1 - a b)`.
pub fn p_f_given_f(params: &OnOffParams, model: &UpdateModel) -> Result<f64> {
    Ok(chain(params, model)?.p_f_given_f)
}

/// Long-run fraction of time without coverage, `1 / (1 + λ_os E[W])`.
pub fn p_off(params: &OnOffParams) -> Result<f64> {
    Ok((1.0 + load(params)?).recip())
}

/// Probability that the next update lands in an on period given the current
/// one did: `(1 - (2 - P_f|f) P_off) / (1 - P_off)`.
pub fn p_o_given_o(params: &OnOffParams, model: &UpdateModel) -> Result<f64> {
    Ok(1.0 - chain(params, model)?.p_o_leave)
}

/// The literal form of [`p_o_given_o`] from its two inputs.
pub fn p_o_given_o_from(p_f_given_f: f64, p_off: f64) -> Result<f64> {
    if p_off >= 1.0 {
        return Err(Error::PermanentDisconnection);
    }
    Ok((1.0 - (2.0 - p_f_given_f) * p_off) / (1.0 - p_off))
}

/// `(E[Y], E[Y²])` for the inter-delivery time.
pub fn moments_y(params: &OnOffParams, model: &UpdateModel) -> Result<(f64, f64)> {
    let c = chain(params, model)?;
    Ok(moments_from(model.update_rate, c.gamma(), c.p_o_leave))
}

/// `E[Y] = (1 + γ q) / μ`, `E[Y²] = (2 + 2(γ + γ²) q) / μ²` with `q = 1 - P_o|o`.
pub fn moments_from(update_rate: f64, gamma: f64, p_o_leave: f64) -> (f64, f64) {
    let mu = update_rate;
    let q = p_o_leave;
    let m1 = (1.0 + gamma * q) / mu;
    let m2 = (2.0 + 2.0 * (gamma + gamma * gamma) * q) / (mu * mu);
    (m1, m2)
}

/// `γ² q / (μ + μ γ q) + 1/μ + D` with `q = 1 - P_o|o`.
pub fn aoi_from(update_rate: f64, delay: f64, gamma: f64, p_o_leave: f64) -> f64 {
    let mu = update_rate;
    let q = p_o_leave;
    gamma * gamma * q / (mu + mu * gamma * q) + mu.recip() + delay
}

/// Time-average AoI in closed form.
pub fn time_avg_aoi(params: &OnOffParams, model: &UpdateModel) -> Result<f64> {
    let c = chain(params, model)?;
    Ok(aoi_from(
        model.update_rate,
        model.propagation_delay,
        c.gamma(),
        c.p_o_leave,
    ))
}

/// Time-average AoI as `E[Y²] / (2 E[Y]) + D`, an independent evaluation
/// path for [`time_avg_aoi`].
pub fn time_avg_aoi_from_moments(params: &OnOffParams, model: &UpdateModel) -> Result<f64> {
    let (m1, m2) = moments_y(params, model)?;
    Ok(m2 / (2.0 * m1) + model.propagation_delay)
}

pub fn breakdown(params: &OnOffParams, model: &UpdateModel) -> Result<AoiBreakdown> {
    let c = chain(params, model)?;
    let gamma = c.gamma();
    let (mean_y, second_moment_y) = moments_from(model.update_rate, gamma, c.p_o_leave);
    Ok(AoiBreakdown {
        a: c.a,
        b: c.b,
        p_f_given_f: c.p_f_given_f,
        p_off: c.p_off,
        p_o_given_o: 1.0 - c.p_o_leave,
        gamma,
        mean_y,
        second_moment_y,
        time_avg_aoi: aoi_from(
            model.update_rate,
            model.propagation_delay,
            gamma,
            c.p_o_leave,
        ),
    })
}
