use proptest::prelude::*;

use stopgo::composite::{Composite, CompositeSpec};
use stopgo::limit::{eta_star, LimitContext};
use stopgo::ring::{simulate, Reconstruction, RingState, SimulationOptions};
use stopgo::spectral::{solve_heteroclinic_truncated, HeteroclinicOptions};
use stopgo::OVParams;

#[test]
fn finite_beta_front_approaches_closed_form() {
    let p = OVParams::reference();
    let eta = eta_star(&p).eta_star;
    let ctx = LimitContext::new(&p, eta).unwrap();
    let mut prev = f64::INFINITY;
    for beta in [200.0, 800.0, 3200.0] {
        let pb = p.with_beta(beta).unwrap();
        let opts = HeteroclinicOptions {
            per_unit: 256,
            ..HeteroclinicOptions::default()
        };
        let sol = solve_heteroclinic_truncated(&pb, eta, &opts).unwrap();
        let dc = (sol.c - ctx.c0).abs();
        assert!(dc < prev, "speed error grew at β = {beta}");
        prev = dc;
        assert!(sol.max_deviation(&ctx) < 20.0 / beta);
    }
}

#[test]
fn reconstructed_composite_keeps_circuit_length() {
    let p = OVParams::reference().with_beta(1000.0).unwrap();
    let comp = Composite::new(&p, CompositeSpec::periodic(0.0, 10.0, 20.0, 3.0)).unwrap();
    let rec = Reconstruction::new(&p, &comp, eta_star(&p).c_star, 2.0).unwrap();
    for k in 0..10 {
        let x = rec.positions(k as f64 * 1.7);
        assert!((x[20] - x[0] - 0.5).abs() < 1e-9);
        assert!(x.windows(2).all(|w| w[1] > w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ring_keeps_its_length(amp in 0.0f64..0.4, mode in 1usize..4, n in 8usize..30) {
        let p = OVParams::reference();
        let length = n as f64 * 0.025;
        let init = RingState::perturbed(&p, n, length, amp, mode);
        let (series, end) = simulate(&p, &init, &SimulationOptions {
            t_end: 50.0,
            dt: 0.05,
            sample_every: 10,
            keep_from: 0.0,
        }).unwrap();
        for h in &series.headways {
            let s: f64 = h.iter().sum();
            prop_assert!((s - length).abs() < 1e-12);
            prop_assert!(h.iter().all(|&x| x > 0.0));
        }
        prop_assert!(end.v.iter().all(|&v| v >= p.v1() - 1e-12 && v <= p.v0() + p.v1() + 1e-12));
    }
}
