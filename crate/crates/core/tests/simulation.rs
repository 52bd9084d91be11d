mod common;

use savskit::horseshoe::McmcConfig;
use savskit::rng::seeded;
use savskit::sim::{
    covariance_entry, generate_design, run_replicate, run_replicates, BenchConfig, DesignKind, DesignSpec,
    Placement, RunOptions, SignalCase, SignalSpec,
};

fn empirical_covariance_error(spec: &DesignSpec, seed: u64) -> f64 {
    let x = generate_design(spec, &mut seeded(seed)).unwrap();
    let n = x.nrows() as f64;
    let mut worst: f64 = 0.0;
    for j in 0..spec.p {
        for k in 0..spec.p {
            let s = x.column(j).dot(&x.column(k)) / n;
            worst = worst.max((s - covariance_entry(spec, j, k)).abs());
        }
    }
    worst
}

#[test]
fn design_covariances_match_their_families() {
    let n = 100_000;
    let specs = [
        DesignSpec::independent(n, 8),
        DesignSpec::compound_symmetry(n, 8),
        DesignSpec::ar1(0.5, n, 8),
        DesignSpec::ar1(0.9, n, 10),
    ];
    for (i, spec) in specs.iter().enumerate() {
        let err = empirical_covariance_error(spec, 4001 + i as u64);
        assert!(err < 0.02, "{}: max covariance error {err}", spec.label());
    }
}

#[test]
fn ar1_entries_decay_geometrically() {
    let spec = DesignSpec::ar1(0.9, 10, 5);
    assert_eq!(covariance_entry(&spec, 0, 2), 0.9f64.powi(2));
    assert!((covariance_entry(&spec, 0, 2) - 0.81).abs() < 1e-15);
    assert_eq!(covariance_entry(&spec, 3, 3), 1.0);
    assert_eq!(covariance_entry(&spec, 4, 1), covariance_entry(&spec, 1, 4));
}

fn small_config(seed: u64, replicates: usize) -> BenchConfig {
    let mut c = BenchConfig::new(
        DesignSpec::ar1(0.5, 40, 30),
        SignalSpec {
            case: SignalCase::Case1Set1,
            placement: Placement::Uniform,
        },
    );
    c.master_seed = seed;
    c.replicates = replicates;
    c.mcmc = McmcConfig {
        n_iter: 300,
        burn_in: 100,
        ..McmcConfig::default()
    };
    c
}

#[test]
fn replicate_streams_do_not_depend_on_replicate_count() {
    let a = run_replicate(&small_config(4002, 3), 2, false).unwrap();
    let b = run_replicate(&small_config(4002, 9), 2, false).unwrap();
    assert_eq!(a.sub_seed, b.sub_seed);
    assert_eq!(a.data.x(), b.data.x());
    assert_eq!(a.truth.beta0(), b.truth.beta0());
    assert_eq!(a.posterior.beta_mean, b.posterior.beta_mean);
    let other = run_replicate(&small_config(4002, 3), 1, false).unwrap();
    assert_ne!(a.sub_seed, other.sub_seed);
    assert_ne!(a.data.x(), other.data.x());
}

#[test]
fn bench_is_deterministic_and_worker_independent() {
    let config = small_config(4003, 6);
    let one = run_replicates(&config, &RunOptions { workers: 1, skip_failures: false }).unwrap();
    let again = run_replicates(&config, &RunOptions { workers: 1, skip_failures: false }).unwrap();
    let three = run_replicates(&config, &RunOptions { workers: 3, skip_failures: false }).unwrap();
    assert_eq!(one, again);
    assert_eq!(one, three);
    assert_eq!(one.table_row(), three.table_row());
    let json = |r: &savskit::sim::BenchReport| serde_json::to_string(&r.records).unwrap();
    assert_eq!(json(&one), json(&three));
    assert_eq!(one.records.len(), 6);
    assert!(one.failures.is_empty());
}

#[test]
fn summary_agrees_with_records() {
    let report = run_replicates(&small_config(4004, 5), &RunOptions::default()).unwrap();
    let metrics: Vec<_> = report.records.iter().map(|r| r.metrics).collect();
    assert_eq!(
        report.summary,
        savskit::metrics::aggregate(&metrics).unwrap()
    );
    let (mean, _) = common::mean_var(&metrics.iter().map(|m| m.mcc).collect::<Vec<_>>());
    assert!((report.summary.mcc.mean - mean).abs() < 1e-12);
}

#[test]
fn bench_config_parses_from_toml() {
    let text = r#"
sigma = 1.5
replicates = 20
master_seed = 11

[design]
kind = "ar1"
rho = 0.9
n = 200
p = 500

[signal]
case = "case2"
placement = "leading_block"

[mcmc]
n_iter = 2000
burn_in = 500
"#;
    let c: BenchConfig = toml::from_str(text).unwrap();
    c.validate().unwrap();
    assert_eq!(c.design.kind, DesignKind::Ar1);
    assert_eq!(c.design.label(), "ar1_rho0.9");
    assert_eq!(c.signal.placement, Placement::LeadingBlock);
    assert_eq!(c.kappa, 2.0);
    assert_eq!(c.mcmc.thin, 1);

    assert!(toml::from_str::<BenchConfig>(&text.replace("sigma", "sigmaa")).is_err());
    let no_rho: BenchConfig = toml::from_str(&text.replace("rho = 0.9\n", "")).unwrap();
    assert!(no_rho.validate().is_err());
}
