#![allow(dead_code)]

use std::f64::consts::PI;

use leo_aoi::analysis::UpdateModel;
use leo_aoi::geometry::{DomeSpec, GeometryConfig};
use leo_aoi::onoff::{entry_expectation, OnOffParams};

pub const OMEGA: f64 = PI / 3600.0;

pub fn geometry(density: f64) -> GeometryConfig {
    GeometryConfig::with_node_zenith(800.0, OMEGA, 1f64.to_radians(), density).unwrap()
}

pub fn dome(density: f64) -> DomeSpec {
    DomeSpec::from_config(&geometry(density)).unwrap()
}

pub fn params(density: f64) -> OnOffParams {
    OnOffParams::from_geometry(&geometry(density)).unwrap()
}

pub fn model(mu: f64) -> UpdateModel {
    UpdateModel::new(mu, 1.0).unwrap()
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Inter-delivery moments of the alternating renewal process without the
/// independence step used by the closed form.
///
/// A delivery at time 0 sits a stationary-excess distance `R` (equilibrium
/// law of `W`) before the end of its on period. The next arrival either
/// falls before the end (`Z < R`) or the chain enters off time; from the
/// start of an off period the wait `V` to the next accepted arrival is a
/// geometric compound of off durations and failed on periods, whose first
/// two moments follow from the renewal equation.
pub struct ExactMoments {
    pub mean_y: f64,
    pub second_moment_y: f64,
    pub time_avg_aoi: f64,
}

pub fn exact_renewal(p: &OnOffParams, m: &UpdateModel) -> ExactMoments {
    let mu = m.update_rate;
    let los = p.off_rate();
    let ex = |g: &dyn Fn(f64) -> f64| entry_expectation(p, mu, g).unwrap().value;
    let ew = ex(&|w| w);
    let b = ex(&|w| (-mu * w).exp());
    let em2 = ex(&|w| 2.0 * (1.0 - (-mu * w).exp() * (1.0 + mu * w)) / (mu * mu));
    let ewe = ex(&|w| w * (-mu * w).exp());

    let ev = 1.0 / (los * (1.0 - b)) + 1.0 / mu;
    let ev2 = (2.0 / (los * los) + 2.0 * (1.0 - b) / (los * mu) + em2 + 2.0 * (b / los + ewe) * ev)
        / (1.0 - b);

    let r_e = ex(&|w| (1.0 - (-mu * w).exp()) / mu) / ew;
    let r_e_r = ex(&|w| (1.0 - (-mu * w).exp() * (1.0 + mu * w)) / (mu * mu)) / ew;
    let r_e_r2 =
        ex(&|w| (2.0 - (-mu * w).exp() * (2.0 + 2.0 * mu * w + mu * mu * w * w)) / mu.powi(3)) / ew;
    let min_zr = ex(&|w| (w - (1.0 - (-mu * w).exp()) / mu) / mu) / ew;
    let min_zr2 = ex(&|w| {
        2.0 * w / (mu * mu)
            - (2.0 / mu.powi(3)) * (2.0 * (1.0 - (-mu * w).exp()) - mu * w * (-mu * w).exp())
    }) / ew;

    let mean_y = min_zr + r_e * ev;
    let second_moment_y = min_zr2 + r_e_r2 + 2.0 * r_e_r * ev + r_e * ev2;
    ExactMoments {
        mean_y,
        second_moment_y,
        time_avg_aoi: second_moment_y / (2.0 * mean_y) + m.propagation_delay,
    }
}
