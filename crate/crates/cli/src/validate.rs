//! Pass/fail gates comparing the closed forms with both simulators.

use std::fmt;

use leo_aoi::analysis::{breakdown, time_avg_aoi, time_avg_aoi_from_moments};
use leo_aoi::geometry::DomeSpec;
use leo_aoi::onoff::{service_cdf, OnOffParams};
use leo_aoi::orbital_sim::{run_geo_aoi_with, simulate_connectivity};
use leo_aoi::renewal_sim::{run_with, RunOptions};
use leo_aoi::stats::{ks_statistic, Estimate};

use crate::config::{ExperimentConfig, LogRange};

/// KS gates with fewer samples than this are reported as skipped.
pub const KS_POWER_MIN: usize = 5_000;
pub const KS_ALPHA: f64 = 0.01;
pub const SIGMAS: f64 = 3.0;
pub const AOI_REL_TOL: f64 = 0.05;
pub const IDENTITY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub gates: Vec<Gate>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.outcome != Outcome::Fail)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    fn push(&mut self, name: &'static str, ok: bool, detail: String) {
        self.gates.push(Gate {
            name,
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            detail,
        });
    }

    fn sigma_gate(&mut self, name: &'static str, est: Option<Estimate>, target: f64) {
        match est {
            Some(e) => self.push(
                name,
                e.within_sigmas(target, SIGMAS),
                format!(
                    "{} ± {} vs {} (z = {:.2})",
                    e.value,
                    e.std_error,
                    target,
                    e.z_score(target)
                ),
            ),
            None => self.gates.push(Gate {
                name,
                outcome: Outcome::Skip,
                detail: "too few samples in the conditioning class".into(),
            }),
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            let tag = match g.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Skip => "SKIP",
            };
            writeln!(f, "[{tag}] {}: {}", g.name, g.detail)?;
        }
        let fails = self
            .gates
            .iter()
            .filter(|g| g.outcome == Outcome::Fail)
            .count();
        write!(f, "{} gates, {} failed", self.gates.len(), fails)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    /// Multiplies the off-rate assumed by the closed forms and the renewal
    /// simulator. Anything but 1 should make the coverage gates fail.
    pub corrupt_off_rate: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            corrupt_off_rate: 1.0,
        }
    }
}

pub fn run_validation(cfg: &ExperimentConfig, opts: &ValidateOptions) -> leo_aoi::Result<Report> {
    let density = cfg.geometry.density_per_km2;
    let geo = cfg.geometry_config(density)?;
    let dome = DomeSpec::from_config(&geo)?;
    let model = cfg.update_model(cfg.model.update_rate)?;
    let true_params = OnOffParams::from_geometry(&geo)?;
    let params = true_params.with_off_rate(true_params.off_rate() * opts.corrupt_off_rate)?;
    let seed = cfg.sim.seed;
    let mut report = Report::default();

    let conn = simulate_connectivity(&geo, &dome, cfg.validate.cycles, seed)?;
    let rate = params.off_rate();
    ks_gate(&mut report, "off-law KS", &conn.off_durations(), |x| {
        -(-rate * x).exp_m1()
    })?;
    ks_gate(&mut report, "on-law KS", &conn.single_pass_durations, |s| {
        service_cdf(&params, s).unwrap_or(f64::NAN)
    })?;

    let bd = breakdown(&params, &model)?;
    let plain = run_with(&params, &model, &RunOptions::new(cfg.sim.n_arrivals, seed))?.estimate;
    report.sigma_gate("P_f|f", plain.empirical_p_f_given_f, bd.p_f_given_f);
    report.sigma_gate("P_o|o", plain.empirical_p_o_given_o, bd.p_o_given_o);
    report.sigma_gate("P_off", Some(plain.empirical_p_off), bd.p_off);
    report.sigma_gate("E[Y]", Some(plain.empirical_mean_y), bd.mean_y);
    report.sigma_gate(
        "E[Y^2]",
        Some(plain.empirical_second_moment_y),
        bd.second_moment_y,
    );

    let long =
        RunOptions::new(cfg.sim.n_arrivals, seed).with_min_off_periods(cfg.sim.min_off_periods);
    let renewal = run_with(&params, &model, &long)?.estimate;
    let orbital = run_geo_aoi_with(&geo, &dome, &model, &long)?.estimate;
    for (name, est) in [("renewal AoI", renewal), ("orbital AoI", orbital)] {
        let rel = (est.time_avg_aoi - bd.time_avg_aoi) / bd.time_avg_aoi;
        report.push(
            name,
            rel.abs() <= AOI_REL_TOL,
            format!(
                "{} vs closed form {} ({:+.2}%)",
                est.time_avg_aoi,
                bd.time_avg_aoi,
                100.0 * rel
            ),
        );
    }

    let grid = LogRange {
        start: 0.1,
        stop: 10.0,
        points: 100,
    };
    let mut worst = 0.0f64;
    for mu in grid.values() {
        let m = cfg.update_model(mu)?;
        let a = time_avg_aoi(&params, &m)?;
        let b = time_avg_aoi_from_moments(&params, &m)?;
        worst = worst.max(((a - b) / b).abs());
    }
    report.push(
        "two-path identity",
        worst <= IDENTITY_REL_TOL,
        format!("max relative gap {worst:e} over 100 update rates"),
    );
    Ok(report)
}

fn ks_gate<F: Fn(f64) -> f64>(
    report: &mut Report,
    name: &'static str,
    samples: &[f64],
    cdf: F,
) -> leo_aoi::Result<()> {
    if samples.len() < KS_POWER_MIN {
        report.gates.push(Gate {
            name,
            outcome: Outcome::Skip,
            detail: format!(
                "{} samples, below the {KS_POWER_MIN} needed for power",
                samples.len()
            ),
        });
        return Ok(());
    }
    let ks = ks_statistic(samples, cdf, KS_ALPHA)?;
    report.push(
        name,
        ks.passes(),
        format!(
            "D = {:.5}, critical {:.5} at n = {}",
            ks.statistic, ks.critical_value, ks.n
        ),
    );
    Ok(())
}
