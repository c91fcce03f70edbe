//! Sawtooth accumulator shared by both simulators.
//!
//! Walks a stream of coverage pieces and a stream of arrival instants in
//! lockstep. Adjacent pieces of the same kind are allowed and behave as one
//! period, which lets the orbital source emit revolutions independently.

use crate::error::{Error, Result};
use crate::renewal_sim::{AoiEstimate, DeliveryRecord, EmpiricalConditionals, Period, PeriodKind};
use crate::stats::{batch_of, ratio_batch_means, Estimate, BATCHES};

/// Conditioning classes with fewer pairs than this report no estimate.
pub(crate) const MIN_CLASS_SAMPLES: f64 = 100.0;

#[derive(Debug, Default, Clone, Copy)]
struct Batch {
    elapsed: f64,
    off_time: f64,
    from_off: f64,
    off_off: f64,
    from_on: f64,
    on_on: f64,
    area: f64,
    y_sum: f64,
    y2_sum: f64,
    cycles: f64,
}

pub(crate) struct Outcome {
    pub conditionals: EmpiricalConditionals,
    pub estimate: Result<AoiEstimate>,
    pub records: Vec<DeliveryRecord>,
}

/// Runs `n_arrivals` arrivals, drawn in increasing order from `next_arrival`,
/// against the coverage pieces.
pub(crate) fn drive<I, A>(
    mut pieces: I,
    mut next_arrival: A,
    n_arrivals: u64,
    delay: f64,
    keep_records: bool,
) -> Result<Outcome>
where
    I: Iterator<Item = Period>,
    A: FnMut() -> f64,
{
    let mut batches = [Batch::default(); BATCHES];
    let mut records = Vec::new();

    // Current piece is [start, end); cum_off is the off time before `start`.
    let mut kind = PeriodKind::Off;
    let mut start = 0.0;
    let mut end = 0.0;
    let mut cum_off = 0.0;

    let mut prev: Option<(f64, f64, PeriodKind)> = None;
    let mut last_generation: Option<f64> = None;
    let mut n_off = 0u64;
    let mut n_delivered = 0u64;

    for i in 0..n_arrivals {
        let t = next_arrival();
        while t >= end {
            if kind == PeriodKind::Off {
                cum_off += end - start;
            }
            let Some(p) = pieces.next() else {
                return Err(Error::TraceExhausted { end, arrival: t });
            };
            kind = p.kind;
            start = end;
            end = start + p.duration;
        }
        let off_at = cum_off
            + if kind == PeriodKind::Off {
                t - start
            } else {
                0.0
            };

        let b = &mut batches[batch_of(i, n_arrivals, BATCHES)];
        if let Some((t0, off0, k0)) = prev {
            b.elapsed += t - t0;
            b.off_time += off_at - off0;
            match k0 {
                PeriodKind::Off => {
                    b.from_off += 1.0;
                    if kind == PeriodKind::Off {
                        b.off_off += 1.0;
                    }
                }
                PeriodKind::On => {
                    b.from_on += 1.0;
                    if kind == PeriodKind::On {
                        b.on_on += 1.0;
                    }
                }
            }
        }
        prev = Some((t, off_at, kind));

        match kind {
            PeriodKind::Off => n_off += 1,
            PeriodKind::On => {
                n_delivered += 1;
                if let Some(g0) = last_generation {
                    let y = t - g0;
                    b.area += 0.5 * y * y + delay * y;
                    b.y_sum += y;
                    b.y2_sum += y * y;
                    b.cycles += 1.0;
                    if keep_records {
                        records.push(DeliveryRecord {
                            generation_time: t,
                            reception_time: t + delay,
                            inter_delivery: y,
                            service_delay: delay,
                            idle_gap: y - delay,
                        });
                    }
                }
                last_generation = Some(t);
            }
        }
    }

    let col = |f: fn(&Batch) -> f64| batches.iter().map(f).collect::<Vec<_>>();
    let class = |num: fn(&Batch) -> f64, den: fn(&Batch) -> f64| {
        let dens = col(den);
        if dens.iter().sum::<f64>() < MIN_CLASS_SAMPLES {
            None
        } else {
            ratio_batch_means(&col(num), &dens)
        }
    };
    let p_off = ratio_batch_means(&col(|b| b.off_time), &col(|b| b.elapsed)).unwrap_or(Estimate {
        value: f64::NAN,
        std_error: f64::INFINITY,
    });
    let conditionals = EmpiricalConditionals {
        p_f_given_f: class(|b| b.off_off, |b| b.from_off),
        p_o_given_o: class(|b| b.on_on, |b| b.from_on),
        p_off,
        n_arrivals,
        off_arrivals: n_off,
        on_arrivals: n_arrivals - n_off,
    };

    let estimate = if n_delivered < 2 {
        Err(Error::Starvation {
            arrivals: n_arrivals,
            delivered: n_delivered,
        })
    } else {
        let ratio = |num: fn(&Batch) -> f64, den: fn(&Batch) -> f64| {
            ratio_batch_means(&col(num), &col(den)).expect("at least one closed cycle")
        };
        let aoi = ratio(|b| b.area, |b| b.y_sum);
        Ok(AoiEstimate {
            time_avg_aoi: aoi.value,
            std_error: aoi.std_error,
            n_arrivals,
            n_delivered,
            empirical_p_off: conditionals.p_off,
            empirical_p_f_given_f: conditionals.p_f_given_f,
            empirical_p_o_given_o: conditionals.p_o_given_o,
            empirical_mean_y: ratio(|b| b.y_sum, |b| b.cycles),
            empirical_second_moment_y: ratio(|b| b.y2_sum, |b| b.cycles),
        })
    };

    Ok(Outcome {
        conditionals,
        estimate,
        records,
    })
}
