//! Single-point breakdown of the closed-form chain.

use std::fmt::Write;

use leo_aoi::analysis::{breakdown, AoiBreakdown};
use leo_aoi::geometry::DomeSpec;
use leo_aoi::onoff::{mean_service_time, OnOffParams};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub density: f64,
    pub update_rate: f64,
    pub delay: f64,
    pub dome: DomeSpec,
    pub off_rate: f64,
    pub mean_service_time: f64,
    pub breakdown: AoiBreakdown,
}

pub fn analyze(cfg: &ExperimentConfig) -> leo_aoi::Result<Analysis> {
    let density = cfg.geometry.density_per_km2;
    let geo = cfg.geometry_config(density)?;
    let dome = DomeSpec::from_config(&geo)?;
    let params = OnOffParams::from_geometry(&geo)?;
    let model = cfg.update_model(cfg.model.update_rate)?;
    Ok(Analysis {
        density,
        update_rate: model.update_rate,
        delay: model.propagation_delay,
        dome,
        off_rate: params.off_rate(),
        mean_service_time: mean_service_time(&params)?,
        breakdown: breakdown(&params, &model)?,
    })
}

/// `name = value` lines. Values use the shortest form that parses back to
/// the same `f64`.
pub fn render(a: &Analysis) -> String {
    let b = &a.breakdown;
    let rows: [(&str, f64); 18] = [
        ("density_per_km2", a.density),
        ("update_rate", a.update_rate),
        ("delay_s", a.delay),
        ("node_zenith_rad", a.dome.node_zenith),
        ("earth_zenith_rad", a.dome.earth_zenith),
        ("max_range_km", a.dome.max_range),
        ("off_rate", a.off_rate),
        ("mean_service_time", a.mean_service_time),
        ("a", b.a),
        ("b", b.b),
        ("p_f_given_f", b.p_f_given_f),
        ("p_off", b.p_off),
        ("p_o_given_o", b.p_o_given_o),
        ("gamma", b.gamma),
        ("mean_y", b.mean_y),
        ("second_moment_y", b.second_moment_y),
        ("floor", 1.0 / a.update_rate + a.delay),
        ("time_avg_aoi", b.time_avg_aoi),
    ];
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        writeln!(s, "{k:<width$} = {v}").expect("write to string");
    }
    s
}
