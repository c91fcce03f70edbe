//! Monte Carlo simulation of the abstract on-off renewal process.
//!
//! Periods alternate off, on, off, ... starting with an off period, with
//! off durations `Exp(λ_os)` and on durations drawn through the entry angle.
//! Updates arrive as a rate-`μ` Poisson stream; those arriving during an off
//! period are dropped, the rest reach the destination `D` seconds later.
//!
//! The time-average age is accumulated per delivery cycle in closed form,
//! starting from the first reception. Standard errors are batch means over
//! [`BATCHES`](crate::stats::BATCHES) contiguous blocks of arrivals.
//!
//! Streams: for a seed `s`, periods come from `ChaCha8Rng` stream 0 and
//! arrivals from stream 1, so [`generate_trace`] and [`arrival_times`]
//! reproduce exactly what [`run`] sees.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::analysis::UpdateModel;
use crate::engine::drive;
use crate::error::{ensure_positive, invalid, Result};
use crate::onoff::{mean_service_time, sample_off_time, sample_service_time, OnOffParams};
use crate::stats::Estimate;

pub const PERIOD_STREAM: u64 = 0;
pub const ARRIVAL_STREAM: u64 = 1;

/// Smallest arrival budget accepted by [`run`].
pub const MIN_ARRIVALS: u64 = 1_000;
/// Smallest arrival count accepted by [`empirical_conditionals`].
pub const MIN_CONDITIONAL_ARRIVALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PeriodKind {
    Off,
    On,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period {
    pub kind: PeriodKind,
    pub duration: f64,
}

/// Alternating coverage periods beginning with an off period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodTrace {
    periods: Vec<Period>,
}

impl PeriodTrace {
    pub fn new(periods: Vec<Period>) -> Result<Self> {
        if periods.first().is_some_and(|p| p.kind != PeriodKind::Off) {
            return Err(invalid("periods", "trace must start with an off period"));
        }
        for (i, p) in periods.iter().enumerate() {
            if !(p.duration > 0.0 && p.duration.is_finite()) {
                return Err(invalid(
                    "periods",
                    format!("period {i} has duration {}", p.duration),
                ));
            }
            if i > 0 && periods[i - 1].kind == p.kind {
                return Err(invalid(
                    "periods",
                    format!("periods {} and {i} do not alternate", i - 1),
                ));
            }
        }
        Ok(Self { periods })
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.periods.iter().map(|p| p.duration).sum()
    }

    /// `(start, end, kind)` for every period.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, PeriodKind)> + '_ {
        let mut t = 0.0;
        self.periods.iter().map(move |p| {
            let s = t;
            t += p.duration;
            (s, t, p.kind)
        })
    }

    pub fn durations(&self, kind: PeriodKind) -> Vec<f64> {
        self.periods
            .iter()
            .filter(|p| p.kind == kind)
            .map(|p| p.duration)
            .collect()
    }
}

/// One successful reception, closing the cycle started by the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryRecord {
    pub generation_time: f64,
    pub reception_time: f64,
    /// Time since the previous reception, `Y_k`.
    pub inter_delivery: f64,
    /// `T_k`, always the propagation delay.
    pub service_delay: f64,
    /// `B_k = Y_k - T_k`: from the previous reception to this generation.
    /// Negative when this update left before the previous one landed.
    pub idle_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoiEstimate {
    pub time_avg_aoi: f64,
    pub std_error: f64,
    pub n_arrivals: u64,
    pub n_delivered: u64,
    pub empirical_p_off: Estimate,
    /// `None` when fewer than 100 consecutive pairs start in an off period.
    pub empirical_p_f_given_f: Option<Estimate>,
    pub empirical_p_o_given_o: Option<Estimate>,
    pub empirical_mean_y: Estimate,
    pub empirical_second_moment_y: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalConditionals {
    pub p_f_given_f: Option<Estimate>,
    pub p_o_given_o: Option<Estimate>,
    /// Fraction of time in off periods between the first and last arrival.
    pub p_off: Estimate,
    pub n_arrivals: u64,
    pub off_arrivals: u64,
    pub on_arrivals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub n_arrivals: u64,
    pub seed: u64,
    /// Extend the arrival budget so the run spans this many off periods on
    /// average. Sparse constellations see few coverage cycles per 10⁶
    /// arrivals, which dominates the error; 0 disables the extension.
    pub min_off_periods: u64,
    pub keep_records: bool,
}

impl RunOptions {
    pub fn new(n_arrivals: u64, seed: u64) -> Self {
        Self {
            n_arrivals,
            seed,
            min_off_periods: 0,
            keep_records: false,
        }
    }

    pub fn with_min_off_periods(mut self, n: u64) -> Self {
        self.min_off_periods = n;
        self
    }

    pub fn with_records(mut self) -> Self {
        self.keep_records = true;
        self
    }

    /// `max(n_arrivals, ⌈μ N (1/λ_os + E[W])⌉)` for `N = min_off_periods`.
    pub fn arrivals_for(&self, params: &OnOffParams, model: &UpdateModel) -> Result<u64> {
        if self.min_off_periods == 0 {
            return Ok(self.n_arrivals);
        }
        let cycle = params.off_rate().recip() + mean_service_time(params)?;
        let needed = (model.update_rate * self.min_off_periods as f64 * cycle).ceil();
        Ok(self.n_arrivals.max(needed.min(u64::MAX as f64) as u64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub estimate: AoiEstimate,
    pub conditionals: EmpiricalConditionals,
    /// Empty unless requested.
    pub records: Vec<DeliveryRecord>,
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Endless off/on period sequence for a seed.
fn periods(params: OnOffParams, seed: u64) -> impl Iterator<Item = Period> {
    let mut rng = rng_for(seed, PERIOD_STREAM);
    let mut next = PeriodKind::Off;
    std::iter::from_fn(move || {
        let p = match next {
            PeriodKind::Off => Period {
                kind: PeriodKind::Off,
                duration: sample_off_time(&params, &mut rng),
            },
            PeriodKind::On => Period {
                kind: PeriodKind::On,
                duration: sample_service_time(&params, &mut rng),
            },
        };
        next = match next {
            PeriodKind::Off => PeriodKind::On,
            PeriodKind::On => PeriodKind::Off,
        };
        Some(p)
    })
}

pub(crate) fn arrivals<R: Rng>(mut rng: R, rate: f64) -> impl FnMut() -> f64 {
    let exp = Exp::new(rate).expect("positive update rate");
    let mut t = 0.0;
    move || {
        t += exp.sample(&mut rng);
        t
    }
}

/// Simulates `n_arrivals` updates and returns the age estimate.
pub fn run(
    params: &OnOffParams,
    model: &UpdateModel,
    n_arrivals: u64,
    seed: u64,
) -> Result<AoiEstimate> {
    Ok(run_with(params, model, &RunOptions::new(n_arrivals, seed))?.estimate)
}

pub fn run_with(params: &OnOffParams, model: &UpdateModel, opts: &RunOptions) -> Result<RunOutput> {
    model.validate()?;
    if opts.n_arrivals < MIN_ARRIVALS {
        return Err(invalid(
            "n_arrivals",
            format!("must be at least {MIN_ARRIVALS}, got {}", opts.n_arrivals),
        ));
    }
    let n = opts.arrivals_for(params, model)?;
    let out = drive(
        periods(*params, opts.seed),
        arrivals(rng_for(opts.seed, ARRIVAL_STREAM), model.update_rate),
        n,
        model.propagation_delay,
        opts.keep_records,
    )?;
    Ok(RunOutput {
        estimate: out.estimate?,
        conditionals: out.conditionals,
        records: out.records,
    })
}

/// The periods [`run`] uses for `seed`, until `horizon` seconds are covered.
/// Zero-length on periods (a grazing pass) are folded into the surrounding off time.
pub fn generate_trace(params: &OnOffParams, horizon: f64, seed: u64) -> Result<PeriodTrace> {
    ensure_positive("horizon", horizon)?;
    let mut out: Vec<Period> = Vec::new();
    let mut t = 0.0;
    for p in periods(*params, seed) {
        if t >= horizon {
            break;
        }
        t += p.duration;
        match out.last_mut() {
            _ if p.duration == 0.0 => {}
            Some(last) if last.kind == p.kind => last.duration += p.duration,
            _ => out.push(p),
        }
    }
    PeriodTrace::new(out)
}

/// The arrival instants [`run`] uses for `seed`.
pub fn arrival_times(model: &UpdateModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    model.validate()?;
    let mut next = arrivals(rng_for(seed, ARRIVAL_STREAM), model.update_rate);
    Ok((0..n).map(|_| next()).collect())
}

fn check_arrivals(arrivals: &[f64]) -> Result<()> {
    if let Some(i) = arrivals
        .windows(2)
        .position(|w| w[1].is_nan() || w[1] < w[0])
    {
        return Err(invalid(
            "arrivals",
            format!("not sorted at index {}", i + 1),
        ));
    }
    if arrivals.first().is_some_and(|&t| t.is_nan() || t < 0.0) {
        return Err(invalid("arrivals", "must be non-negative"));
    }
    Ok(())
}

/// Feeds a fixed trace and fixed arrival instants through the accumulator.
pub fn replay(
    trace: &PeriodTrace,
    arrivals: &[f64],
    model: &UpdateModel,
    keep_records: bool,
) -> Result<RunOutput> {
    model.validate()?;
    check_arrivals(arrivals)?;
    let mut it = arrivals.iter().copied();
    let out = drive(
        trace.periods().iter().copied(),
        move || it.next().expect("bounded by n_arrivals"),
        arrivals.len() as u64,
        model.propagation_delay,
        keep_records,
    )?;
    Ok(RunOutput {
        estimate: out.estimate?,
        conditionals: out.conditionals,
        records: out.records,
    })
}

/// Frequencies of off-to-off and on-to-on successions between consecutive
/// arrivals, and the time fraction spent off.
pub fn empirical_conditionals(
    trace: &PeriodTrace,
    arrivals: &[f64],
) -> Result<EmpiricalConditionals> {
    if arrivals.len() < MIN_CONDITIONAL_ARRIVALS {
        return Err(invalid(
            "arrivals",
            format!(
                "need at least {MIN_CONDITIONAL_ARRIVALS} arrivals, got {}",
                arrivals.len()
            ),
        ));
    }
    check_arrivals(arrivals)?;
    let mut it = arrivals.iter().copied();
    let out = drive(
        trace.periods().iter().copied(),
        move || it.next().expect("bounded by n_arrivals"),
        arrivals.len() as u64,
        0.0,
        false,
    )?;
    Ok(out.conditionals)
}
