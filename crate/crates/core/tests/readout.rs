//! Cross-module checks: the simulated NMR readout recovers the
//! split-operator probabilities.

#![allow(clippy::excessive_precision)]

use qdyn_core::grid::delta_state;
use qdyn_core::nmr::{
    apply_register_unitary, decay_model, equilibrium_deviation, experiment_pair, experiment_pair_raw,
    invert_transition, pops, readout_intensities, DecayParams, SpinSystem,
};
use qdyn_core::potential::{builtin_scenario, tabulate, Scenario};
use qdyn_core::scalar::{unitarity_deviation, CMatrix, Complex};
use qdyn_core::splitop::{normalize_columns, TrotterPlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gram-Schmidt on random complex columns.
fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
    let mut cols: Vec<Vec<Complex<f64>>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<Complex<f64>> = (0..n)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for _ in 0..2 {
            for c in &cols {
                let overlap: Complex<f64> = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= overlap * y;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    CMatrix::from_fn(n, n, |r, c| cols[c][r])
}

fn scenario_plan(s: Scenario) -> (TrotterPlan<f64>, usize) {
    let setup = builtin_scenario::<f64>(s);
    let table = tabulate(&setup.potential, &setup.grid).unwrap();
    (TrotterPlan::new(&table, setup.dt).unwrap(), setup.start_index)
}

#[test]
fn readout_recovers_column_probabilities() {
    let spec = SpinSystem::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let u = random_unitary(&mut rng, 16);
        assert!(unitarity_deviation(&u) < 1e-12);
        for start in 0..16 {
            let est = experiment_pair(&spec, &u, start).unwrap();
            for j in 0..16 {
                assert!((est[j] - u[(j, start)].norm_sqr()).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn fresh_pops_after_unitary_is_proportional() {
    let spec = SpinSystem::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_unitary(&mut rng, 16);
    let eq = equilibrium_deviation(&spec);
    let p = pops(&eq, &invert_transition(&eq, 11).unwrap());
    let i = readout_intensities(&apply_register_unitary(&p, &u).unwrap());
    let max_rel = (0..16)
        .map(|j| (i[j] / 0.8 - u[(j, 11)].norm_sqr()).abs())
        .fold(0.0, f64::max);
    assert!(max_rel < 1e-10);
}

#[test]
fn trotter_step_through_readout() {
    let spec = SpinSystem::reference();
    for s in Scenario::ALL {
        let (plan, start) = scenario_plan(s);
        let u = plan.step_matrix();
        let est = experiment_pair(&spec, &u, start).unwrap();
        let p = plan.trotter_step(&delta_state(plan.grid(), start).unwrap()).unwrap().probabilities();
        for j in 0..16 {
            assert!((est[j] - p[j]).abs() < 1e-10, "{s} site {j}");
        }
        // subsystem populations track the probabilities scaled by the POPS gap
        let eq = equilibrium_deviation(&spec);
        let d = pops(&eq, &invert_transition(&eq, start).unwrap());
        let moved = apply_register_unitary(&d, &u).unwrap();
        for (j, pj) in p.iter().enumerate() {
            assert!((moved.get(0, j) - 0.4 * pj).abs() < 1e-12);
        }
    }
}

#[test]
fn well_revival_through_readout() {
    let spec = SpinSystem::reference();
    let (plan, start) = scenario_plan(Scenario::Well);
    let step = plan.step_matrix();
    let mut u = qdyn_core::scalar::identity::<f64>(16);
    let mut returns = Vec::new();
    for _ in 0..10 {
        u = &step * &u;
        returns.push(experiment_pair(&spec, &u, start).unwrap()[start]);
    }
    // m = 5 is index 4
    assert!(returns[4] > returns[3] && returns[4] > returns[5]);
    assert!((returns[4] - 0.91487482851560786).abs() < 1e-10);
}

#[test]
fn decayed_columns_renormalize() {
    let spec = SpinSystem::reference();
    let (plan, start) = scenario_plan(Scenario::Barrier);
    let step = plan.step_matrix();
    let params = DecayParams::default();
    let mut u = qdyn_core::scalar::identity::<f64>(16);
    let mut raw_columns = Vec::new();
    let mut clean_columns = Vec::new();
    for m in 0..=10 {
        if m > 0 {
            u = &step * &u;
        }
        let raw = experiment_pair_raw(&spec, &u, start).unwrap();
        clean_columns.push(raw.clone());
        raw_columns.push(decay_model(&raw, m, &params).unwrap());
    }
    let totals: Vec<f64> = raw_columns.iter().map(|c| c.iter().sum()).collect();
    assert!(totals.windows(2).all(|w| w[1] < w[0]));
    let a = normalize_columns(&raw_columns).unwrap();
    let b = normalize_columns(&clean_columns).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let colsum: f64 = x.iter().sum();
        assert!((colsum - 1.0).abs() < 1e-12);
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
