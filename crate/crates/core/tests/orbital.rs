mod common;

use common::{dome, geometry, model, params};
use leo_aoi::analysis::time_avg_aoi;
use leo_aoi::analysis::UpdateModel;
use leo_aoi::geometry::{DomeSpec, GeometryConfig};
use leo_aoi::onoff::service_cdf;
use leo_aoi::orbital_sim::{band_area, run_geo_aoi, run_geo_aoi_with, simulate_connectivity};
use leo_aoi::renewal_sim::{run_with, PeriodKind, RunOptions};
use leo_aoi::stats::ks_statistic;

#[test]
fn off_periods_are_exponential() {
    let cfg = geometry(2e-5);
    let run = simulate_connectivity(&cfg, &dome(2e-5), 10_000, 1).unwrap();
    let rate = params(2e-5).off_rate();
    let offs = run.off_durations();
    assert!(offs.len() > 100_000);
    let ks = ks_statistic(&offs, |x| -(-rate * x).exp_m1(), 0.01).unwrap();
    assert!(ks.passes(), "{ks:?}");
}

#[test]
fn single_satellite_passes_follow_service_law() {
    let cfg = geometry(2e-5);
    let p = params(2e-5);
    let run = simulate_connectivity(&cfg, &dome(2e-5), 10_000, 2).unwrap();
    let ks = ks_statistic(
        &run.single_pass_durations,
        |s| service_cdf(&p, s).unwrap(),
        0.01,
    )
    .unwrap();
    assert!(ks.passes(), "{ks:?}");
    let cap = p.max_service_time();
    assert!(run
        .single_pass_durations
        .iter()
        .all(|&w| w <= cap * (1.0 + 1e-12)));
}

#[test]
fn band_thinning_preserves_the_mean_count() {
    let cfg = geometry(2e-5);
    let d = dome(2e-5);
    let run = simulate_connectivity(&cfg, &d, 10_000, 3).unwrap();
    let s = run.satellites_summary().unwrap();
    let expected = cfg.density * band_area(cfg.orbit_radius(), d.earth_zenith.sin());
    assert!(
        (s.mean - expected).abs() <= 3.0 * s.std_error,
        "{} vs {expected}",
        s.mean
    );
}

#[test]
fn trace_structure() {
    for density in [2e-5, 5e-4] {
        let cfg = geometry(density);
        let d = dome(density);
        let run = simulate_connectivity(&cfg, &d, 500, 4).unwrap();
        let periods = run.trace.periods();
        assert_eq!(periods[0].kind, PeriodKind::Off);
        assert!(periods.windows(2).all(|w| w[0].kind != w[1].kind));
        let cap = 2.0 * d.earth_zenith / cfg.angular_rate;
        let ons = run.trace.durations(PeriodKind::On);
        assert_eq!(ons.len(), run.passes_per_on_period.len());
        for (w, &n) in ons.iter().zip(&run.passes_per_on_period) {
            assert!(*w <= cap * n as f64 * (1.0 + 1e-9), "{w} > {cap} x {n}");
        }
        let total = run.trace.duration() + run.trace_offset;
        let horizon = 500.0 * cfg.revolution_period();
        assert!(((total - horizon) / horizon).abs() < 1e-9);
    }
}

#[test]
fn off_rate_consistency() {
    let run = simulate_connectivity(&geometry(2e-5), &dome(2e-5), 10_000, 5).unwrap();
    let est = run.off_rate_estimate().unwrap();
    assert!(est.within_sigmas(params(2e-5).off_rate(), 3.0), "{est:?}");
    let lag = run.lag1_off().unwrap();
    assert!(lag.abs() < 0.02, "{lag}");
}

#[test]
fn empty_constellation_is_one_long_off_period() {
    let cfg = geometry(2e-5).with_density(0.0);
    let run = simulate_connectivity(&cfg, &dome(2e-5), 3, 6).unwrap();
    assert!(run.never_covered);
    assert_eq!(run.trace.len(), 1);
    assert_eq!(run.trace.periods()[0].kind, PeriodKind::Off);
    assert!(run.off_rate_estimate().is_none());
}

#[test]
fn always_covered_geometry_gives_the_floor() {
    let cfg = GeometryConfig::with_node_zenith(
        20_000.0,
        common::OMEGA,
        std::f64::consts::FRAC_PI_2,
        1e-6,
    )
    .unwrap();
    let d = DomeSpec::from_config(&cfg).unwrap();
    let m = UpdateModel::new(1.0, 1.0).unwrap();
    let e = run_geo_aoi(&cfg, &d, &m, 100_000, 7).unwrap();
    assert_eq!(e.n_delivered, e.n_arrivals);
    assert!((e.time_avg_aoi - 2.0).abs() <= 3.0 * e.std_error, "{e:?}");
}

#[test]
fn same_seed_same_geo_estimate() {
    let cfg = geometry(5e-4);
    let d = dome(5e-4);
    let m = model(1.0);
    assert_eq!(
        run_geo_aoi(&cfg, &d, &m, 20_000, 8).unwrap(),
        run_geo_aoi(&cfg, &d, &m, 20_000, 8).unwrap()
    );
    assert!(run_geo_aoi(&cfg, &d, &m, 999, 8).is_err());
}

#[test]
fn analytic_renewal_and_orbital_agree() {
    let (density, mu) = (2e-5, 1.0);
    let p = params(density);
    let m = model(mu);
    let opts = RunOptions::new(1_000_000, 9).with_min_off_periods(100_000);
    let a = time_avg_aoi(&p, &m).unwrap();
    let r = run_with(&p, &m, &opts).unwrap().estimate.time_avg_aoi;
    let o = run_geo_aoi_with(&geometry(density), &dome(density), &m, &opts)
        .unwrap()
        .estimate
        .time_avg_aoi;
    for (x, y) in [(a, r), (a, o), (r, o)] {
        assert!(
            ((x - y) / x).abs() < 0.05,
            "analytic {a}, renewal {r}, orbital {o}"
        );
    }
}
