use chiral_core::cnot::{
    entangling_input, fidelity_entangling, fidelity_min, gate_input, photonic_factor, run_protocol,
    sweep_beta, GateConfig,
};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[test]
fn fidelity_rises_with_beta_dir() {
    let betas: Vec<f64> = (0..=10).map(|i| 0.9 + 0.01 * i as f64).collect();
    let runs = sweep_beta(&entangling_input(), &GateConfig::default(), &betas).unwrap();
    for w in runs.windows(2) {
        assert!(w[1].fidelity_vs_ideal >= w[0].fidelity_vs_ideal);
        assert!(w[1].fidelity_heralded >= w[0].fidelity_heralded);
    }
    assert!((runs[10].fidelity_vs_ideal - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_reproduces_entangling_fidelity() {
    let runs = sweep_beta(&entangling_input(), &GateConfig::default(), &[1.0, 0.98]).unwrap();
    assert!((runs[0].fidelity_vs_ideal - 1.0).abs() < 1e-12);
    // the state vector agrees with β² up to a β-dependent term of order 1e-8 here
    assert!((runs[1].fidelity_vs_ideal - fidelity_entangling(0.98).unwrap()).abs() < 1e-6);
    assert!((fidelity_entangling(0.98).unwrap() - 0.9604).abs() < 1e-12);
    assert!((fidelity_min(0.98).unwrap() - 0.9216).abs() < 1e-12);
}

#[test]
fn truth_table_in_both_directions() {
    for dir in [
        chiral_core::coupling::Direction::Left,
        chiral_core::coupling::Direction::Right,
    ] {
        let cfg = GateConfig {
            control_direction: dir,
            ..GateConfig::default()
        };
        for (k, expect) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            let mut a = [ZERO; 4];
            a[k] = ONE;
            let run = run_protocol(&gate_input(a).unwrap(), &cfg).unwrap();
            assert_eq!(run.loss_weight, 0.0);
            for b in &run.branches {
                let (p, w) = photonic_factor(&b.output).unwrap();
                assert!(w < 1e-12);
                assert!(
                    (p.amplitude(expect).norm_sqr() - 1.0).abs() < 1e-12,
                    "{k} -> {:?}",
                    p.amplitudes()
                );
            }
        }
    }
}

#[test]
fn worst_input_hits_minimum_at_098() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let input = gate_input([Complex64::new(s, 0.0), Complex64::new(-s, 0.0), ZERO, ZERO]).unwrap();
    let run = run_protocol(&input, &GateConfig::with_beta(0.98)).unwrap();
    assert!((run.fidelity_unheralded - 0.9216).abs() < 1e-12);
}
