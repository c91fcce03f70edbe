use leo_aoi_cli::config::{ConfigError, Engine, ExperimentConfig, LogRange, SweepVariable};
use proptest::prelude::*;

const FULL: &str = r#"
output = "fig3.csv"

[geometry]
altitude_km = 800.0
node_zenith_deg = 1.0
density_per_km2 = 2e-5

[model]
update_rate = 1.0
delay_s = 1.0

[sweep]
variable = "update_rate"
log_range = { start = 0.1, stop = 10.0, points = 9 }
densities = [2e-5, 5e-4]

[sim]
n_arrivals = 1000000
seed = 7
engine = "renewal"

[validate]
cycles = 500
"#;

fn invalid_field(text: &str) -> &'static str {
    match ExperimentConfig::parse(text) {
        Err(ConfigError::Invalid { field, .. }) => field,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn full_config_parses() {
    let cfg = ExperimentConfig::parse(FULL).unwrap();
    assert_eq!(cfg.sim.seed, 7);
    assert_eq!(cfg.sim.engine, Engine::Renewal);
    assert_eq!(cfg.validate.cycles, 500);
    assert_eq!(cfg.sweep.values().len(), 9);
    assert_eq!(
        cfg.output.as_deref(),
        Some(std::path::Path::new("fig3.csv"))
    );
}

#[test]
fn empty_config_is_the_default() {
    assert_eq!(
        ExperimentConfig::parse("").unwrap(),
        ExperimentConfig::default()
    );
}

#[test]
fn round_trip() {
    for text in [FULL, ""] {
        let a = ExperimentConfig::parse(text).unwrap();
        let b = ExperimentConfig::parse(&a.to_toml()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn link_budget_round_trip() {
    let text = r#"
[geometry.link_budget]
tx_power_w = 10.0
noise_power_w = 1e-5
snr_threshold = 1.0
pathloss_exponent = 2.0
"#;
    let a = ExperimentConfig::parse(text).unwrap();
    assert!(a.geometry.link_budget.is_some());
    assert_eq!(ExperimentConfig::parse(&a.to_toml()).unwrap(), a);
}

#[test]
fn log_range_endpoints() {
    let v = LogRange {
        start: 0.1,
        stop: 10.0,
        points: 9,
    }
    .values();
    assert_eq!(v.len(), 9);
    assert!((v[0] - 0.1).abs() < 1e-15);
    assert!((v[4] - 1.0).abs() < 1e-12);
    assert!((v[8] - 10.0).abs() < 1e-12);
}

#[test]
fn validation_names_the_field() {
    assert_eq!(invalid_field("[sweep]\ngrid = [1.0, 0.5]"), "sweep.grid");
    assert_eq!(invalid_field("[sweep]\ngrid = []"), "sweep.grid");
    assert_eq!(
        invalid_field("[sweep]\ndensities = [5e-4, 2e-5]"),
        "sweep.densities"
    );
    assert_eq!(invalid_field("[sim]\nn_arrivals = 999"), "sim.n_arrivals");
    assert_eq!(invalid_field("[model]\nupdate_rate = -1.0"), "model");
    assert_eq!(invalid_field("[geometry]\naltitude_km = -5.0"), "geometry");
    assert_eq!(
        invalid_field("[sweep]\ngrid = [1.0]\nlog_range = { start = 0.1, stop = 1.0, points = 3 }"),
        "sweep"
    );
    assert_eq!(
        invalid_field("[sweep]\nvariable = \"node_zenith\"\ngrid = [0.5, 95.0]"),
        "sweep.grid"
    );
}

#[test]
fn density_sweep_ignores_densities_list() {
    let cfg = ExperimentConfig::parse(
        "[sweep]\nvariable = \"density\"\ngrid = [1e-5, 1e-4]\ndensities = []",
    )
    .unwrap();
    assert_eq!(cfg.sweep.variable, SweepVariable::Density);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(matches!(
        ExperimentConfig::parse("[sim]\nn_arivals = 5000"),
        Err(ConfigError::Parse { .. })
    ));
}

#[test]
fn zenith_is_read_in_degrees() {
    let cfg = ExperimentConfig::parse("[geometry]\nnode_zenith_deg = 2.0").unwrap();
    let g = cfg.geometry_config(2e-5).unwrap();
    assert_eq!(g.node_zenith().unwrap(), 2f64.to_radians());
}

proptest! {
    #[test]
    fn arbitrary_values_round_trip(
        mu in 1e-3f64..1e3,
        delay in 0.0f64..100.0,
        density in 1e-7f64..1e-1,
        seed in any::<u64>(),
        n in 1000u64..100_000_000,
        points in 1usize..50,
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.model.update_rate = mu;
        cfg.model.delay_s = delay;
        cfg.geometry.density_per_km2 = density;
        cfg.sim.seed = seed;
        cfg.sim.n_arrivals = n;
        cfg.sweep.log_range = Some(LogRange { start: 0.5, stop: 50.0, points });
        cfg.validate().unwrap();
        let back = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn large_seed_round_trips() {
    let mut cfg = ExperimentConfig::default();
    cfg.sim.seed = u64::MAX;
    assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
}
