//! Parameter sweeps written as CSV.
//!
//! Rows come out in grid order (outer loop over densities, inner loop over
//! the sweep variable) whatever order the worker pool finishes them in.
//! Point `i` in that order is simulated with seed `seed + i`.

use std::io::Write;

use leo_aoi::analysis::breakdown;
use leo_aoi::geometry::DomeSpec;
use leo_aoi::onoff::OnOffParams;
use leo_aoi::orbital_sim::run_geo_aoi_with;
use leo_aoi::renewal_sim::{run_with, AoiEstimate, RunOptions};
use leo_aoi::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, SweepVariable};

pub const HEADER: [&str; 13] = [
    "sweep_var",
    "density",
    "analytic_aoi",
    "renewal_aoi",
    "renewal_se",
    "orbital_aoi",
    "orbital_se",
    "p_off",
    "p_f_given_f",
    "p_o_given_o",
    "n_delivered",
    "seed",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_var: f64,
    pub density: f64,
    pub analytic_aoi: Option<f64>,
    pub renewal_aoi: Option<f64>,
    pub renewal_se: Option<f64>,
    pub orbital_aoi: Option<f64>,
    pub orbital_se: Option<f64>,
    /// Closed-form values when the analytic engine runs, otherwise the
    /// empirical ones from the first simulator that ran.
    pub p_off: Option<f64>,
    pub p_f_given_f: Option<f64>,
    pub p_o_given_o: Option<f64>,
    pub n_delivered: Option<u64>,
    pub seed: u64,
    /// `ok`, `starved` (too few deliveries), `disconnected` (zero off-rate)
    /// or `error`.
    pub status: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub sweep_var: f64,
    pub density: f64,
    pub seed: u64,
}

pub fn points(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
    let values = cfg.sweep.values();
    let densities = match cfg.sweep.variable {
        SweepVariable::Density => vec![f64::NAN],
        _ => cfg.sweep.densities.clone(),
    };
    let mut out = Vec::with_capacity(values.len() * densities.len());
    for &d in &densities {
        for &v in &values {
            let density = if d.is_nan() { v } else { d };
            out.push(SweepPoint {
                sweep_var: v,
                density,
                seed: cfg.sim.seed.wrapping_add(out.len() as u64),
            });
        }
    }
    out
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Vec<SweepRow> {
    points(cfg)
        .into_par_iter()
        .map(|p| evaluate(cfg, p))
        .collect()
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::Starvation { .. } => "starved",
        Error::PermanentDisconnection => "disconnected",
        _ => "error",
    }
}

pub fn evaluate(cfg: &ExperimentConfig, p: SweepPoint) -> SweepRow {
    let mut row = SweepRow {
        sweep_var: p.sweep_var,
        density: p.density,
        analytic_aoi: None,
        renewal_aoi: None,
        renewal_se: None,
        orbital_aoi: None,
        orbital_se: None,
        p_off: None,
        p_f_given_f: None,
        p_o_given_o: None,
        n_delivered: None,
        seed: p.seed,
        status: "ok".into(),
    };
    if let Err(e) = fill(cfg, p, &mut row) {
        row.status = status_of(&e).into();
    }
    row
}

fn fill(cfg: &ExperimentConfig, p: SweepPoint, row: &mut SweepRow) -> leo_aoi::Result<()> {
    let (update_rate, zenith) = match cfg.sweep.variable {
        SweepVariable::UpdateRate => (p.sweep_var, None),
        SweepVariable::Density => (cfg.model.update_rate, None),
        SweepVariable::NodeZenith => (cfg.model.update_rate, Some(p.sweep_var)),
    };
    let geo = cfg.geometry_config_at(p.density, zenith)?;
    let dome = DomeSpec::from_config(&geo)?;
    let model = cfg.update_model(update_rate)?;
    let engine = cfg.sim.engine;
    let opts =
        RunOptions::new(cfg.sim.n_arrivals, p.seed).with_min_off_periods(cfg.sim.min_off_periods);

    let mut first_error = None;
    let params = OnOffParams::from_geometry(&geo);

    if engine.analytic() {
        let bd = breakdown(params.as_ref().map_err(Clone::clone)?, &model)?;
        row.analytic_aoi = Some(bd.time_avg_aoi);
        row.p_off = Some(bd.p_off);
        row.p_f_given_f = Some(bd.p_f_given_f);
        row.p_o_given_o = Some(bd.p_o_given_o);
    }
    let take_empirical = |row: &mut SweepRow, e: &AoiEstimate| {
        if row.p_off.is_none() {
            row.p_off = Some(e.empirical_p_off.value);
            row.p_f_given_f = e.empirical_p_f_given_f.map(|x| x.value);
            row.p_o_given_o = e.empirical_p_o_given_o.map(|x| x.value);
        }
        if row.n_delivered.is_none() {
            row.n_delivered = Some(e.n_delivered);
        }
    };
    if engine.renewal() {
        match params.clone().and_then(|prm| run_with(&prm, &model, &opts)) {
            Ok(out) => {
                row.renewal_aoi = Some(out.estimate.time_avg_aoi);
                row.renewal_se = Some(out.estimate.std_error);
                take_empirical(row, &out.estimate);
            }
            Err(e) => first_error = first_error.or(Some(e)),
        }
    }
    if engine.orbital() {
        match run_geo_aoi_with(&geo, &dome, &model, &opts) {
            Ok(out) => {
                row.orbital_aoi = Some(out.estimate.time_avg_aoi);
                row.orbital_se = Some(out.estimate.std_error);
                take_empirical(row, &out.estimate);
            }
            Err(e) => first_error = first_error.or(Some(e)),
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(HEADER)?;
    }
    w.flush()?;
    Ok(())
}
