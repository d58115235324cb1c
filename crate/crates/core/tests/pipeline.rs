use stopgo::experiments::{
    error_sweep, order_fit, read_records, write_case, CaseConfig, EtaMode, ExperimentConfig, SeedPolicy,
};
use stopgo::spectral::io::read_solution;

fn small_config(seed: SeedPolicy) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::reference();
    cfg.case.clear();
    cfg.case.insert(
        "n20".into(),
        CaseConfig {
            n: 20,
            length: 0.5,
            r: vec![2.0, 3.0],
        },
    );
    cfg.experiment.beta_max = 600.0;
    cfg.experiment.beta_count = 6;
    cfg.experiment.seed = seed;
    cfg
}

#[test]
fn every_record_reloads_with_small_residual() {
    let cfg = small_config(SeedPolicy::Simulator);
    let res = error_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_case(&cfg, dir.path(), &res[0]).unwrap();
    let records = read_records(&path).unwrap();
    assert_eq!(records.len(), 12);
    for r in &records {
        assert!(r.error_inf >= 0.0);
        let sol = read_solution(&dir.path().join("n20").join(&r.solution)).unwrap();
        assert!(sol.residual_inf < 1e-9, "{} at β = {}", sol.residual_inf, sol.beta);
        assert!((sol.beta - r.beta).abs() < 1e-9 * r.beta);
        assert_eq!(sol.u.len(), r.n_points);
    }
    let fit = order_fit(&res[0].curve(3.0), (100.0, 600.0)).unwrap();
    assert!(fit.p > 0.0);
}

#[test]
fn identical_configs_write_identical_tables() {
    let cfg = small_config(SeedPolicy::Simulator);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        for r in error_sweep(&cfg).unwrap() {
            write_case(&cfg, d.path(), &r).unwrap();
        }
    }
    for f in ["errors.csv", "run.csv", "overlay.csv", "solution_03.csv"] {
        let x = std::fs::read(a.path().join("n20").join(f)).unwrap();
        let y = std::fs::read(b.path().join("n20").join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn composite_seed_reaches_the_same_branch() {
    let sim = error_sweep(&small_config(SeedPolicy::Simulator)).unwrap();
    let comp = error_sweep(&small_config(SeedPolicy::Composite)).unwrap();
    let (s, c) = (&sim[0].run.solutions, &comp[0].run.solutions);
    let last_s = s.last().unwrap();
    let last_c = c.last().unwrap();
    assert_eq!(last_s.beta, last_c.beta);
    assert!((last_s.c - last_c.c).abs() < 1e-8, "{} vs {}", last_s.c, last_c.c);
    assert!((last_s.eta_hat - last_c.eta_hat).abs() < 1e-8);
}

#[test]
fn eta_hat_mode_changes_only_the_reference_profile() {
    let mut cfg = small_config(SeedPolicy::Simulator);
    let star = error_sweep(&cfg).unwrap();
    cfg.experiment.eta_mode = EtaMode::EtaHat;
    let hat = error_sweep(&cfg).unwrap();
    let (a, b) = (&star[0].records, &hat[0].records);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!((x.beta, x.c, x.eta_hat, x.n_points), (y.beta, y.c, y.eta_hat, y.n_points));
    }
    assert!(a.iter().zip(b).any(|(x, y)| x.error_inf != y.error_inf));
}
