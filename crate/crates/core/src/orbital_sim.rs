//! Geometric simulation: a Poisson constellation and a node sweeping a great circle.
//!
//! In the frame that co-rotates with the constellation the satellites are
//! fixed and the node runs along the equator at angular rate `ω`, sitting at
//! longitude `ωt`. The node is covered while some satellite is within
//! central angle `φ_e`. Satellites are redrawn at the start of every
//! revolution.
//!
//! Only satellites with latitude `|Θ| ≤ φ_e` can ever cover the node, so each
//! revolution draws just that band. For a satellite at `(Θ, ψ)` the central
//! angle to the node obeys `hav c = hav Θ + cos Θ hav(ωt - ψ)`, which gives
//! the pass `ωt ∈ [ψ - δ, ψ + δ]` with `hav δ = (hav φ_e - hav Θ) / cos Θ`.
//!
//! Randomness: revolution `k` uses `ChaCha8Rng` stream `2³² + k` of the seed
//! and the update arrivals use stream `u64::MAX`, so a renewal run and an
//! orbital run with the same seed share no random numbers.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::analysis::UpdateModel;
use crate::engine::drive;
use crate::error::{ensure_non_negative, ensure_positive, invalid, Result};
use crate::geometry::{off_rate, DomeSpec, GeometryConfig};
use crate::onoff::OnOffParams;
use crate::renewal_sim::{
    arrivals, rng_for, AoiEstimate, Period, PeriodKind, PeriodTrace, RunOptions, RunOutput,
    MIN_ARRIVALS,
};
use crate::stats::{lag1_correlation, summarize, Estimate, Summary};

pub const ARRIVAL_STREAM: u64 = u64::MAX;
pub const REVOLUTION_STREAM_BASE: u64 = 1 << 32;

/// Satellite positions as unit vectors on the orbital sphere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Constellation {
    positions: Vec<[f64; 3]>,
}

impl Constellation {
    /// Normalizes each position; zero or non-finite vectors are rejected.
    pub fn from_positions(positions: Vec<[f64; 3]>) -> Result<Self> {
        let positions = positions
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                if n > 0.0 && n.is_finite() {
                    Ok([p[0] / n, p[1] / n, p[2] / n])
                } else {
                    Err(invalid(
                        "positions",
                        format!("position {i} cannot be normalized"),
                    ))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { positions })
    }

    /// Satellite at latitude `theta` and longitude `psi`, radians.
    pub fn from_lat_lon(points: &[(f64, f64)]) -> Self {
        Self {
            positions: points
                .iter()
                .map(|&(th, psi)| [th.cos() * psi.cos(), th.cos() * psi.sin(), th.sin()])
                .collect(),
        }
    }

    /// Homogeneous PPP over the whole sphere of radius `radius` km.
    pub fn sample_sphere<R: Rng + ?Sized>(density: f64, radius: f64, rng: &mut R) -> Result<Self> {
        Self::sample_zone(density, radius, 1.0, rng)
    }

    /// The PPP restricted to `|latitude| ≤ half_width`.
    pub fn sample_band<R: Rng + ?Sized>(
        density: f64,
        radius: f64,
        half_width: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(half_width > 0.0 && half_width <= PI / 2.0) {
            return Err(invalid(
                "half_width",
                format!("must lie in (0, π/2], got {half_width}"),
            ));
        }
        Self::sample_zone(density, radius, half_width.sin(), rng)
    }

    // Uniform on the sphere means z = sin(latitude) is uniform.
    fn sample_zone<R: Rng + ?Sized>(
        density: f64,
        radius: f64,
        z_max: f64,
        rng: &mut R,
    ) -> Result<Self> {
        ensure_non_negative("density", density)?;
        ensure_positive("radius", radius)?;
        let mean = density * band_area(radius, z_max);
        let n = if mean > 0.0 {
            Poisson::new(mean)
                .map_err(|e| invalid("density", e.to_string()))?
                .sample(rng) as usize
        } else {
            0
        };
        let positions = (0..n)
            .map(|_| {
                let z = rng.random_range(-z_max..=z_max);
                let psi = rng.random_range(0.0..TAU);
                let c = (1.0 - z * z).sqrt();
                [c * psi.cos(), c * psi.sin(), z]
            })
            .collect();
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Area of the zone `|z| ≤ z_max` on a sphere: `4π r² z_max`.
pub fn band_area(radius: f64, z_max: f64) -> f64 {
    4.0 * PI * radius * radius * z_max
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    pub angular_rate: f64,
    /// Redraw the constellation every revolution. When false the first
    /// revolution's satellites are reused and coverage is periodic.
    pub regenerate: bool,
}

impl CycleConfig {
    pub fn new(angular_rate: f64) -> Self {
        Self {
            angular_rate,
            regenerate: true,
        }
    }

    pub fn revolution_period(&self) -> f64 {
        TAU / self.angular_rate
    }

    /// Node position at time `t`.
    pub fn node_position(&self, t: f64) -> [f64; 3] {
        let a = self.angular_rate * t;
        [a.cos(), a.sin(), 0.0]
    }
}

/// One satellite's visibility window, in seconds from the revolution start.
/// `start` may be negative and `end` may exceed the period; `full` marks a
/// satellite that is visible for the whole revolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pass {
    pub start: f64,
    pub end: f64,
    pub full: bool,
}

impl Pass {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// A maximal covered stretch within one revolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageInterval {
    pub start: f64,
    pub end: f64,
    /// Pass pieces merged into this interval.
    pub passes: u32,
}

/// Visibility window of the satellite at `position`, or `None` if it never
/// comes within `earth_zenith` of the node's path.
pub fn pass_for(position: [f64; 3], earth_zenith: f64, cycle: &CycleConfig) -> Option<Pass> {
    let theta = position[2].clamp(-1.0, 1.0).asin().abs();
    if theta > earth_zenith {
        return None;
    }
    let psi = position[1].atan2(position[0]).rem_euclid(TAU);
    // hav φ_e - hav Θ = sin((φ_e-Θ)/2) sin((φ_e+Θ)/2).
    let ratio =
        (0.5 * (earth_zenith - theta)).sin() * (0.5 * (earth_zenith + theta)).sin() / theta.cos();
    let w = cycle.angular_rate;
    if ratio >= 1.0 {
        return Some(Pass {
            start: 0.0,
            end: cycle.revolution_period(),
            full: true,
        });
    }
    let delta = 2.0 * ratio.sqrt().asin();
    Some(Pass {
        start: (psi - delta) / w,
        end: (psi + delta) / w,
        full: false,
    })
}

pub fn passes(constellation: &Constellation, earth_zenith: f64, cycle: &CycleConfig) -> Vec<Pass> {
    constellation
        .positions()
        .iter()
        .filter_map(|&p| pass_for(p, earth_zenith, cycle))
        .collect()
}

/// Union of all passes over one revolution `[0, T]`, with wrap-around.
pub fn revolution_coverage(
    constellation: &Constellation,
    earth_zenith: f64,
    cycle: &CycleConfig,
) -> Vec<CoverageInterval> {
    merge_passes(
        &passes(constellation, earth_zenith, cycle),
        cycle.revolution_period(),
    )
}

fn merge_passes(passes: &[Pass], period: f64) -> Vec<CoverageInterval> {
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(passes.len() + 2);
    for p in passes {
        if p.full || p.duration() >= period {
            pieces.push((0.0, period));
        } else if p.start < 0.0 {
            pieces.push((0.0, p.end));
            pieces.push((p.start + period, period));
        } else if p.end > period {
            pieces.push((p.start, period));
            pieces.push((0.0, p.end - period));
        } else {
            pieces.push((p.start, p.end));
        }
    }
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<CoverageInterval> = Vec::new();
    for (s, e) in pieces {
        match out.last_mut() {
            Some(last) if s <= last.end => {
                last.end = last.end.max(e);
                last.passes += 1;
            }
            _ => out.push(CoverageInterval {
                start: s,
                end: e,
                passes: 1,
            }),
        }
    }
    out
}

/// One revolution's coverage as pieces in time order, plus the data the
/// diagnostics need.
struct Revolution {
    pieces: Vec<(Period, u32)>,
    satellites: u64,
    single_passes: Vec<f64>,
}

fn revolution(
    cfg: &GeometryConfig,
    earth_zenith: f64,
    cycle: &CycleConfig,
    seed: u64,
    index: u64,
) -> Result<Revolution> {
    let stream = REVOLUTION_STREAM_BASE + if cycle.regenerate { index } else { 0 };
    let mut rng: ChaCha8Rng = rng_for(seed, stream);
    let sats = Constellation::sample_band(cfg.density, cfg.orbit_radius(), earth_zenith, &mut rng)?;
    let all = passes(&sats, earth_zenith, cycle);
    let period = cycle.revolution_period();
    let merged = merge_passes(&all, period);

    let mut pieces = Vec::with_capacity(2 * merged.len() + 1);
    let mut t = 0.0;
    for iv in &merged {
        if iv.start > t {
            pieces.push((off(iv.start - t), 0));
        }
        if iv.end > iv.start {
            pieces.push((on(iv.end - iv.start), iv.passes));
        }
        t = iv.end;
    }
    if period > t {
        pieces.push((off(period - t), 0));
    }
    Ok(Revolution {
        pieces,
        satellites: sats.len() as u64,
        single_passes: all.iter().filter(|p| !p.full).map(Pass::duration).collect(),
    })
}

fn off(duration: f64) -> Period {
    Period {
        kind: PeriodKind::Off,
        duration,
    }
}

fn on(duration: f64) -> Period {
    Period {
        kind: PeriodKind::On,
        duration,
    }
}

/// Output of [`simulate_connectivity`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityRun {
    /// Coverage from the first off instant to the end of the last revolution.
    pub trace: PeriodTrace,
    /// Time cut from the front to make the trace start with an off period.
    pub trace_offset: f64,
    /// The first off period began at t = 0, so its start is not observed.
    pub starts_censored: bool,
    /// No satellite entered the band in any revolution; the trace is a
    /// single off period.
    pub never_covered: bool,
    /// Durations of individual satellite passes, before merging.
    pub single_pass_durations: Vec<f64>,
    /// Passes merged into each on period of the trace.
    pub passes_per_on_period: Vec<u32>,
    pub satellites_per_cycle: Vec<u64>,
    pub n_cycles: u64,
}

impl ConnectivityRun {
    /// Off periods whose start and end were both observed.
    pub fn off_durations(&self) -> Vec<f64> {
        let p = self.trace.periods();
        let last = p.len().saturating_sub(1);
        p.iter()
            .enumerate()
            .filter(|&(i, q)| {
                q.kind == PeriodKind::Off && i != last && !(i == 0 && self.starts_censored)
            })
            .map(|(_, q)| q.duration)
            .collect()
    }

    /// On periods that ended before the horizon.
    pub fn on_durations(&self) -> Vec<f64> {
        let p = self.trace.periods();
        let last = p.len().saturating_sub(1);
        p.iter()
            .enumerate()
            .filter(|&(i, q)| q.kind == PeriodKind::On && i != last)
            .map(|(_, q)| q.duration)
            .collect()
    }

    /// Off-to-on transitions per second of off time, with a Poisson-count error.
    pub fn off_rate_estimate(&self) -> Option<Estimate> {
        let n = self
            .trace
            .periods()
            .windows(2)
            .filter(|w| w[0].kind == PeriodKind::Off)
            .count() as f64;
        let off_time: f64 = self.trace.durations(PeriodKind::Off).iter().sum();
        (n > 0.0 && off_time > 0.0).then(|| Estimate {
            value: n / off_time,
            std_error: n.sqrt() / off_time,
        })
    }

    pub fn satellites_summary(&self) -> Result<Summary> {
        let xs: Vec<f64> = self
            .satellites_per_cycle
            .iter()
            .map(|&n| n as f64)
            .collect();
        summarize(&xs)
    }

    /// Lag-1 correlation of successive off periods.
    pub fn lag1_off(&self) -> Option<f64> {
        lag1_correlation(&self.off_durations())
    }

    pub fn lag1_on(&self) -> Option<f64> {
        lag1_correlation(&self.on_durations())
    }
}

/// Simulates `n_cycles` revolutions and returns the merged coverage trace.
/// Revolutions are generated in parallel and spliced in order.
pub fn simulate_connectivity(
    cfg: &GeometryConfig,
    dome: &DomeSpec,
    n_cycles: u64,
    seed: u64,
) -> Result<ConnectivityRun> {
    simulate_connectivity_with(
        cfg,
        dome,
        &CycleConfig::new(cfg.angular_rate),
        n_cycles,
        seed,
    )
}

pub fn simulate_connectivity_with(
    cfg: &GeometryConfig,
    dome: &DomeSpec,
    cycle: &CycleConfig,
    n_cycles: u64,
    seed: u64,
) -> Result<ConnectivityRun> {
    cfg.validate()?;
    ensure_positive("angular_rate", cycle.angular_rate)?;
    if n_cycles == 0 {
        return Err(invalid("n_cycles", "must be at least 1"));
    }
    let revs: Vec<Revolution> = (0..n_cycles)
        .into_par_iter()
        .map(|k| revolution(cfg, dome.earth_zenith, cycle, seed, k))
        .collect::<Result<_>>()?;

    let mut periods: Vec<Period> = Vec::new();
    let mut passes_per_on: Vec<u32> = Vec::new();
    let mut satellites_per_cycle = Vec::with_capacity(revs.len());
    let mut single_pass_durations = Vec::new();
    for rev in revs {
        satellites_per_cycle.push(rev.satellites);
        single_pass_durations.extend(rev.single_passes);
        for (p, n) in rev.pieces {
            match periods.last_mut() {
                Some(last) if last.kind == p.kind => {
                    last.duration += p.duration;
                    if p.kind == PeriodKind::On {
                        *passes_per_on.last_mut().expect("on period") += n;
                    }
                }
                _ => {
                    if p.kind == PeriodKind::On {
                        passes_per_on.push(n);
                    }
                    periods.push(p);
                }
            }
        }
    }

    let mut trace_offset = 0.0;
    let starts_censored = periods.first().is_some_and(|p| p.kind == PeriodKind::Off);
    if periods.first().is_some_and(|p| p.kind == PeriodKind::On) {
        trace_offset = periods.remove(0).duration;
        passes_per_on.remove(0);
    }
    let never_covered = satellites_per_cycle.iter().all(|&n| n == 0);

    Ok(ConnectivityRun {
        trace: PeriodTrace::new(periods)?,
        trace_offset,
        starts_censored,
        never_covered,
        single_pass_durations,
        passes_per_on_period: passes_per_on,
        satellites_per_cycle,
        n_cycles,
    })
}

/// Endless coverage pieces, one revolution at a time, from t = 0.
fn coverage_source<'a>(
    cfg: &'a GeometryConfig,
    earth_zenith: f64,
    cycle: CycleConfig,
    seed: u64,
) -> impl Iterator<Item = Result<Period>> + 'a {
    (0u64..).flat_map(move |k| {
        let pieces: Vec<Result<Period>> = match revolution(cfg, earth_zenith, &cycle, seed, k) {
            Ok(rev) => rev.pieces.into_iter().map(|(p, _)| Ok(p)).collect(),
            Err(e) => vec![Err(e)],
        };
        pieces
    })
}

/// Time-average AoI with coverage taken from the geometric simulation.
pub fn run_geo_aoi(
    cfg: &GeometryConfig,
    dome: &DomeSpec,
    model: &UpdateModel,
    n_arrivals: u64,
    seed: u64,
) -> Result<AoiEstimate> {
    Ok(run_geo_aoi_with(cfg, dome, model, &RunOptions::new(n_arrivals, seed))?.estimate)
}

pub fn run_geo_aoi_with(
    cfg: &GeometryConfig,
    dome: &DomeSpec,
    model: &UpdateModel,
    opts: &RunOptions,
) -> Result<RunOutput> {
    cfg.validate()?;
    model.validate()?;
    if opts.n_arrivals < MIN_ARRIVALS {
        return Err(invalid(
            "n_arrivals",
            format!("must be at least {MIN_ARRIVALS}, got {}", opts.n_arrivals),
        ));
    }
    let n = if opts.min_off_periods > 0 {
        let params = OnOffParams::new(
            off_rate(cfg, dome.earth_zenith)?,
            dome.earth_zenith,
            cfg.angular_rate,
        )?;
        opts.arrivals_for(&params, model)?
    } else {
        opts.n_arrivals
    };

    // The source only fails on invalid parameters, which validate() rules
    // out; stop at the first error and surface it after the run.
    let mut failure = None;
    let source = coverage_source(
        cfg,
        dome.earth_zenith,
        CycleConfig::new(cfg.angular_rate),
        opts.seed,
    )
    .map_while(|r| r.map_err(|e| failure = Some(e)).ok());
    let out = drive(
        source,
        arrivals(rng_for(opts.seed, ARRIVAL_STREAM), model.update_rate),
        n,
        model.propagation_delay,
        opts.keep_records,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let out = out?;
    Ok(RunOutput {
        estimate: out.estimate?,
        conditionals: out.conditionals,
        records: out.records,
    })
}
