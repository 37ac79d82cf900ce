//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use qdyn_cli::{parse_config, run};
use qdyn_core::circuit::{circuit_to_matrix, inverse_walsh, qft_circuit, step_circuit, walsh_coefficients};
use qdyn_core::grid::{delta_state, make_grid, MomentumConvention};
use qdyn_core::nmr::{
    all_lines, ancilla_line_frequency, decay_model, experiment_pair, experiment_pair_raw, DecayParams,
    SpinSystem, REGISTER_QUBITS, REGISTER_STATES,
};
use qdyn_core::potential::{builtin_scenario, tabulate, PotentialTable, Scenario};
use qdyn_core::scalar::{max_abs_diff, CMatrix, Complex};
use qdyn_core::splitop::{exact_evolution, max_probability_error, normalize_columns, TrotterPlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn setup(s: Scenario) -> (TrotterPlan<f64>, PotentialTable<f64>, usize, f64) {
    let setup = builtin_scenario::<f64>(s);
    let table = tabulate(&setup.potential, &setup.grid).unwrap();
    let plan = TrotterPlan::new(&table, setup.dt).unwrap();
    (plan, table, setup.start_index, setup.dt)
}

fn tables(plan: &TrotterPlan<f64>, start: usize, steps: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let psi0 = delta_state(plan.grid(), start).unwrap();
    let trotter = plan.evolve(&psi0, steps).unwrap().probability_table();
    let oracle = exact_evolution(plan, &psi0, steps).unwrap().probability_table();
    (trotter, oracle)
}

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

fn grid_fidelity() -> Outcome {
    let wide = make_grid::<f64>(4, 8.0).unwrap();
    let narrow = make_grid::<f64>(4, 4.0).unwrap();
    let cases = [
        (wide, 8, 4.0 / 15.0),
        (narrow, 7, -2.0 / 15.0),
        (narrow, 6, -2.0 / 5.0),
        (narrow, 8, 2.0 / 15.0),
        (narrow, 9, 2.0 / 5.0),
        (narrow, 10, 2.0 / 3.0),
    ];
    let worst = cases
        .iter()
        .map(|(g, j, x)| (g.position_of(*j).unwrap() - x).abs())
        .fold(0.0, f64::max);
    outcome(worst < 1e-12, format!("max site error {worst:.1e}"))
}

fn norm_conservation() -> Outcome {
    let mut worst = 0.0f64;
    for s in Scenario::ALL {
        let (plan, _, start, _) = setup(s);
        let (trotter, _) = tables(&plan, start, 10);
        for column in &trotter {
            worst = worst.max((1.0 - column.iter().sum::<f64>()).abs());
        }
    }
    outcome(worst < 1e-10, format!("max |1 - sum P| {worst:.1e}"))
}

fn oracle_agreement() -> Outcome {
    let mut errs = Vec::new();
    for s in Scenario::ALL {
        let (plan, _, start, _) = setup(s);
        let (trotter, oracle) = tables(&plan, start, 10);
        errs.push(max_probability_error(&trotter, &oracle).unwrap());
    }
    let (free, well, barrier) = (errs[0], errs[1], errs[2]);
    outcome(
        free < 1e-10 && well < 5e-3 && barrier < 5e-3,
        format!("free {free:.2e} (< 1e-10), well {well:.4e} (< 5e-3), barrier {barrier:.4e} (< 5e-3)"),
    )
}

fn trotter_order() -> Outcome {
    let (_, table, start, dt) = setup(Scenario::Well);
    let mut errs = Vec::new();
    for refine in [1usize, 2] {
        let plan = TrotterPlan::new(&table, dt / refine as f64).unwrap();
        let (trotter, oracle) = tables(&plan, start, 10 * refine);
        // compare at the times shared by both step sizes
        let pick = |t: &[Vec<f64>]| t.iter().step_by(refine).cloned().collect::<Vec<_>>();
        errs.push(max_probability_error(&pick(&trotter), &pick(&oracle)).unwrap());
    }
    let ratio = errs[0] / errs[1];
    outcome(
        (3.0..=6.0).contains(&ratio),
        format!("errors {:.4e} -> {:.4e}, ratio {ratio:.3}", errs[0], errs[1]),
    )
}

fn standard_dft(n: usize) -> CMatrix<f64> {
    let len = 1usize << n;
    let s = 1.0 / (len as f64).sqrt();
    CMatrix::from_fn(len, len, |j, l| {
        Complex::from_polar(s, 2.0 * PI * ((j * l) % len) as f64 / len as f64)
    })
}

fn circuit_equivalence() -> Outcome {
    let mut step_worst = 0.0f64;
    for s in Scenario::ALL {
        let (plan, _, _, _) = setup(s);
        let m = circuit_to_matrix(&step_circuit(&plan).unwrap()).unwrap();
        let mut columns = CMatrix::zeros(16, 16);
        for b in 0..16 {
            let out = plan.trotter_step(&delta_state(plan.grid(), b).unwrap()).unwrap();
            for (j, a) in out.amplitudes().iter().enumerate() {
                columns[(j, b)] = *a;
            }
        }
        step_worst = step_worst.max(max_abs_diff(&m, &columns));
    }
    let qft_worst = (1..=5)
        .map(|n| max_abs_diff(&circuit_to_matrix(&qft_circuit::<f64>(n).unwrap()).unwrap(), &standard_dft(n)))
        .fold(0.0, f64::max);
    outcome(
        step_worst < 1e-10 && qft_worst < 1e-10,
        format!("step circuit {step_worst:.1e}, QFT n=1..5 {qft_worst:.1e}"),
    )
}

fn walsh_synthesis() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let phases: Vec<f64> = (0..16).map(|_| rng.random_range(-PI..PI)).collect();
        let back = inverse_walsh(&walsh_coefficients(&phases).unwrap()).unwrap();
        for (a, b) in phases.iter().zip(&back) {
            worst = worst.max((a - b).abs());
        }
    }
    let mut max_weight = 0;
    for s in Scenario::ALL {
        let (plan, _, _, dt) = setup(s);
        let kinetic: Vec<f64> = plan
            .grid()
            .momenta(MomentumConvention::Box)
            .iter()
            .map(|k| -k * k * dt / 2.0)
            .collect();
        for (a, w) in walsh_coefficients(&kinetic).unwrap().iter().enumerate() {
            if w.abs() > 1e-12 {
                max_weight = max_weight.max(a.count_ones());
            }
        }
    }
    outcome(
        worst < 1e-10 && max_weight <= 2,
        format!("max phase error {worst:.1e}, kinetic mask weight <= {max_weight}"),
    )
}

fn readout_theorem() -> Outcome {
    let spec = SpinSystem::<f64>::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let u = random_unitary(&mut rng, REGISTER_STATES);
        for s in 0..REGISTER_STATES {
            let p = experiment_pair(&spec, &u, s).unwrap();
            for (j, pj) in p.iter().enumerate() {
                worst = worst.max((pj - u[(j, s)].norm_sqr()).abs());
            }
        }
    }
    outcome(worst < 1e-10, format!("20 unitaries x 16 sites, max deviation {worst:.1e}"))
}

fn free_spreading() -> Outcome {
    let (plan, _, start, _) = setup(Scenario::Free);
    let record = plan.evolve(&delta_state(plan.grid(), start).unwrap(), 3).unwrap();
    let var: Vec<f64> = record.steps.iter().map(|s| s.psi.position_variance()).collect();
    let increasing = var.windows(2).all(|w| w[1] > w[0]);
    outcome(increasing, format!("variance {var:.4?}"))
}

fn well_revival() -> Outcome {
    let (plan, _, start, _) = setup(Scenario::Well);
    let (trotter, oracle) = tables(&plan, start, 10);
    let ret = |t: &[Vec<f64>], m: usize| t[m][start];
    let local_max = |t: &[Vec<f64>]| ret(t, 5) > ret(t, 4) && ret(t, 5) > ret(t, 6);
    let golden = 0.92530271668968433;
    let peak_ok = (ret(&oracle, 5) - golden).abs() < 1e-10;
    outcome(
        local_max(&trotter) && local_max(&oracle) && peak_ok,
        format!("P_5(7): trotter {:.6}, oracle {:.6}", ret(&trotter, 5), ret(&oracle, 5)),
    )
}

fn barrier_reflection() -> Outcome {
    let (plan, _, start, _) = setup(Scenario::Barrier);
    let (trotter, _) = tables(&plan, start, 5);
    let right = trotter.iter().map(|c| c[11..].iter().sum::<f64>()).fold(0.0, f64::max);
    let left = trotter.iter().map(|c| c[..=8].iter().sum::<f64>()).fold(1.0, f64::min);
    let golden = 0.042948497318305669;
    outcome(
        (right - golden).abs() < 1e-10 && right < 0.1 && left > 0.8,
        format!("max P(j>=11) {right:.5}, min P(j<=8) {left:.5}"),
    )
}

fn spectrum_lines() -> Outcome {
    let spec = SpinSystem::<f64>::reference();
    let mut freqs: Vec<f64> = all_lines(&spec).iter().map(|l| l.frequency_hz).collect();
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gap = freqs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let anc: Vec<f64> = (0..REGISTER_STATES)
        .map(|s| ancilla_line_frequency(&spec, s).unwrap())
        .collect();
    let lo = anc.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = anc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span_ok = (lo - (spec.nu[0] - 1001.5)).abs() < 1e-9 && (hi - (spec.nu[0] + 1001.5)).abs() < 1e-9;
    let mut flip_worst = 0.0f64;
    for s in 0..REGISTER_STATES {
        for bit in 0..REGISTER_QUBITS {
            // register spin 1 is the most significant bit
            let spin = REGISTER_QUBITS - bit;
            let shift = (anc[s] - anc[s ^ (1 << bit)]).abs();
            flip_worst = flip_worst.max((shift - spec.couplings[0][spin].abs()).abs());
        }
    }
    outcome(
        freqs.len() == 80 && gap > 0.0 && span_ok && flip_worst < 1e-9,
        format!(
            "{} lines, min gap {gap:.2} Hz, ancilla span [{lo}, {hi}] Hz, flip error {flip_worst:.1e}",
            freqs.len()
        ),
    )
}

fn decay_pipeline() -> Outcome {
    let spec = SpinSystem::<f64>::reference();
    let (plan, _, start, _) = setup(Scenario::Free);
    let step = plan.step_matrix();
    let u = &step * &step * &step;
    let raw = experiment_pair_raw(&spec, &u, start).unwrap();
    let params = DecayParams::default();
    let damped = decay_model(&raw, 3, &params).unwrap();
    let factor = damped[start] / raw[start];
    let expected = (-0.072f64 / 0.055).exp();
    let restored = normalize_columns(&[damped]).unwrap();
    let clean = normalize_columns(&[raw]).unwrap();
    let diff = restored[0].iter().zip(&clean[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        (factor - expected).abs() < 1e-12 && (factor - 0.270).abs() < 5e-4 && diff < 1e-12,
        format!("factor {factor:.6}, renormalized deviation {diff:.1e}"),
    )
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Outcome {
    let mut compared = 0;
    for s in Scenario::ALL {
        for engine in ["statevector", "circuit", "nmr"] {
            let outputs: Vec<_> = (0..2)
                .map(|_| {
                    let dir = tempfile::tempdir().unwrap();
                    let text = format!(
                        "scenario = {s}\nengine = {engine}\ndecay = true\noutput_dir = {}\n",
                        dir.path().display()
                    );
                    let config = parse_config(&text).unwrap();
                    run(&config).unwrap();
                    read_outputs(dir.path())
                })
                .collect();
            if outputs[0] != outputs[1] || outputs[0].is_empty() {
                return outcome(false, format!("{s}/{engine} outputs differ"));
            }
            compared += outputs[0].len();
        }
    }
    outcome(true, format!("{compared} CSV files byte-identical across two runs"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("grid fidelity", grid_fidelity),
        ("norm conservation", norm_conservation),
        ("oracle agreement", oracle_agreement),
        ("trotter order scaling", trotter_order),
        ("circuit equivalence", circuit_equivalence),
        ("walsh synthesis", walsh_synthesis),
        ("readout theorem", readout_theorem),
        ("free-particle spreading", free_spreading),
        ("well revival", well_revival),
        ("barrier reflection", barrier_reflection),
        ("spectrum", spectrum_lines),
        ("decay pipeline", decay_pipeline),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
