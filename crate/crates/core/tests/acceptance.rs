//! Acceptance suite: the identity- and theorem-level criteria the crate
//! must certify, each with pinned tolerances and a runtime budget.
//!
//! Run with `cargo test -p qtangle --test acceptance -- --nocapture` to see
//! one timed pass line per criterion.

use std::time::Instant;

use num_complex::Complex64;

use qtangle::harness::{
    check_monotone, check_rank, check_sl_invariance, rel_err, TOL_IDENTITY, TOL_SL_DRIFT,
};
use qtangle::invariants::{calibrate_lmn_sign, LMN_FROM_B_SIGN};
use qtangle::state::random_state;
use qtangle::{
    construct_violation, convexity_gap, derive_seed, det_invariant, g_concurrence, ghz,
    lmn_from_b, luque_thibon, n_tangle, n_tangle_direct, sweep, violation_ratio,
    w_state, PureState,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROOT_SEED: u64 = 0x5EED_CAFE;

fn finish(num: u32, label: &str, budget_s: f64, start: Instant) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("ACCEPTANCE {num:02} [{label}]: PASS ({elapsed:.2}s, budget {budget_s}s)");
    assert!(
        elapsed < budget_s,
        "criterion {num} exceeded its {budget_s}s runtime budget: {elapsed:.2}s"
    );
}

fn tangle_power(eta: f64) -> impl Fn(&PureState) -> qtangle::Result<f64> {
    move |s: &PureState| Ok(n_tangle(s)?.powf(eta / 4.0))
}

#[test]
fn criterion_01_eta_zero_identity() {
    let start = Instant::now();
    let records = sweep(&[0.0], 50).unwrap();
    assert_eq!(records.len(), 125_000);
    for r in &records {
        assert!(
            (r.rhs - 1.0).abs() <= 1e-12,
            "rhs({}, {}, {}, 0) = {}",
            r.a,
            r.b,
            r.x,
            r.rhs
        );
    }
    finish(1, "eta=0 gives exactly 1", 5.0, start);
}

#[test]
fn criterion_02_forward_monotonicity_sweep() {
    let start = Instant::now();
    let etas = [0.5, 1.0, 2.0, 3.0, 4.0];
    let records = sweep(&etas, 50).unwrap();
    assert_eq!(records.len(), etas.len() * 125_000);
    let violations = records.iter().filter(|r| !r.holds).count();
    assert_eq!(violations, 0, "no grid point may exceed 1 + 1e-12");
    finish(2, "eta <= 4 sweep holds", 30.0, start);
}

#[test]
fn criterion_03_converse_violation_family() {
    let start = Instant::now();
    // at beta = 0.1 the simulation must reproduce the closed form
    // 2^(1-eta/2) beta^(2-eta/2) alpha^(-eta/2) within 1e-9 relative
    let beta = 0.1_f64;
    let alpha = (1.0 - beta * beta).sqrt();
    for eta in [4.1, 4.5, 5.0, 6.0] {
        let report = construct_violation(alpha, beta, 4, tangle_power(eta), eta).unwrap();
        assert!(
            report.matches_closed_form,
            "eta={eta}: simulated {} vs closed {}",
            report.simulated_ratio, report.closed_form_ratio
        );
        let expected = violation_ratio(alpha, beta, eta).unwrap();
        assert!((report.simulated_ratio - expected).abs() <= 1e-9 * expected);
    }
    // eta = 6 reproduces the reference value 2.538 and violates outright
    let r6 = construct_violation(alpha, beta, 4, tangle_power(6.0), 6.0).unwrap();
    assert!((r6.simulated_ratio - 2.5379742809576062).abs() < 1e-9);
    assert!(r6.violated);

    // the closed form at beta = 0.1 stays below 1 for eta in {4.1, 4.5};
    // each eta > 4 is violated once beta is small enough
    for (eta, beta_w) in [(4.1, 2e-7_f64), (4.5, 0.01), (5.0, 0.1), (6.0, 0.1)] {
        let alpha_w = (1.0 - beta_w * beta_w).sqrt();
        let report =
            construct_violation(alpha_w, beta_w, 4, tangle_power(eta), eta).unwrap();
        assert!(
            report.violated && report.simulated_ratio > 1.0,
            "eta={eta} beta={beta_w}: ratio {}",
            report.simulated_ratio
        );
        assert!(report.matches_closed_form, "eta={eta} beta={beta_w}");
    }
    finish(3, "eta > 4 violation family", 5.0, start);
}

#[test]
fn criterion_04_convexity_bound() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ROOT_SEED, 4));
    for _ in 0..100_000 {
        let alpha = rng.gen_range(1e-6..1.0 - 1e-6);
        let beta = rng.gen_range(1e-6..1.0 - 1e-6);
        let x = rng.gen_range(0.0..=1.0);
        let eta = rng.gen_range(1e-6..4.0 - 1e-6);
        let gap = convexity_gap(alpha, beta, x, eta).unwrap();
        assert!(
            gap >= -1e-12,
            "gap({alpha}, {beta}, {x}, {eta}) = {gap}"
        );
    }
    finish(4, "interpolation gap nonnegative", 5.0, start);
}

#[test]
fn criterion_05_tangle_oracle_equivalence() {
    let start = Instant::now();
    for n in 2..=6usize {
        for trial in 0..50u64 {
            let s = random_state(&vec![2; n], derive_seed(ROOT_SEED, 500 + n as u64 * 100 + trial))
                .unwrap();
            let direct = n_tangle_direct(&s).unwrap();
            let fast = n_tangle(&s).unwrap();
            assert!(
                (direct - fast).abs() <= 1e-10 * direct.max(1.0),
                "N={n} trial={trial}: {direct} vs {fast}"
            );
        }
    }
    // fixtures against the brute-force oracle
    assert!((n_tangle_direct(&ghz(3).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    assert!(n_tangle_direct(&w_state(3).unwrap()).unwrap() < 1e-12);
    assert!((n_tangle_direct(&ghz(4).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    assert!((n_tangle(&ghz(3).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    assert!(n_tangle(&w_state(3).unwrap()).unwrap() < 1e-12);
    assert!((n_tangle(&ghz(4).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    finish(5, "fast tangle vs brute-force oracle", 60.0, start);
}

#[test]
fn criterion_06_structure_identities() {
    let start = Instant::now();
    assert_eq!(calibrate_lmn_sign(20, ROOT_SEED).unwrap(), LMN_FROM_B_SIGN);
    for trial in 0..100u64 {
        let s = random_state(&[2, 2, 2, 2], derive_seed(ROOT_SEED, 600 + trial)).unwrap();
        let lmn = luque_thibon(&s).unwrap();
        for (value, keep) in [
            (lmn.l, [0usize, 1]),
            (lmn.m, [0, 2]),
            (lmn.n, [0, 3]),
        ] {
            let det = s.partial_trace(&keep).unwrap().det().re;
            assert!(
                rel_err(value.norm_sqr(), det) <= 1e-10,
                "trial {trial}: |v|^2 = {} vs det = {det}",
                value.norm_sqr()
            );
        }
        assert!(lmn.sum().norm() <= 1e-12, "trial {trial}");

        let rho = s.partial_trace(&[0, 1]).unwrap();
        let x = s.coefficient_matrix(&[0, 1]).unwrap();
        let worst = (rho.entries() - x.entries() * x.entries().adjoint())
            .iter()
            .map(|e| e.norm())
            .fold(0.0f64, f64::max);
        assert!(worst <= 1e-12, "trial {trial}: rho vs X†X residual {worst}");

        let via_b = lmn_from_b(&s).unwrap();
        let calib = (lmn.l - via_b.l)
            .norm()
            .max((lmn.m - via_b.m).norm())
            .max((lmn.n - via_b.n).norm());
        assert!(calib <= 1e-10, "trial {trial}: B-difference residual {calib}");
    }
    finish(6, "four-qubit structure identities", 30.0, start);
}

#[test]
fn criterion_07_sl_invariance() {
    let start = Instant::now();
    let qubits3 = [2usize, 2, 2];
    let qubits4 = [2usize, 2, 2, 2];
    let roster: [(&str, &[usize]); 9] = [
        ("tau", &qubits3),
        ("tau", &qubits4),
        ("b:1,2", &qubits4),
        ("b:1,3", &qubits4),
        ("b:1,4", &qubits4),
        ("lmn", &qubits4),
        ("det:1", &[2, 2]),
        ("det:1", &[3, 3]),
        ("gconc:1", &[3, 3]),
    ];
    for (name, dims) in roster {
        let report =
            check_sl_invariance(name, dims, 100, derive_seed(ROOT_SEED, 7), TOL_SL_DRIFT)
                .unwrap();
        assert!(
            report.pass,
            "{name} dims {dims:?}: {:?}",
            report.failures.first()
        );
    }
    finish(7, "determinant-1 invariance roster", 60.0, start);
}

#[test]
fn criterion_08_monotone_simulation() {
    let start = Instant::now();
    let dims = [2usize, 2, 2, 2];
    for (name, eta) in [("tau", 4.0), ("conc", 2.0)] {
        let report =
            check_monotone(name, eta, &dims, 1000, derive_seed(ROOT_SEED, 8), TOL_IDENTITY)
                .unwrap();
        assert!(
            report.pass,
            "{name} eta={eta}: {:?}",
            report.failures.first()
        );
    }
    finish(8, "1000-trial POVM monotonicity", 60.0, start);
}

#[test]
fn criterion_09_rank_of_invariant_space() {
    let start = Instant::now();
    let report = check_rank(derive_seed(ROOT_SEED, 9)).unwrap();
    assert!(report.pass, "{:?}", report.failures);
    finish(9, "evaluation-matrix ranks 3/2/1", 10.0, start);
}

#[test]
fn criterion_10_qutrit_bipartition() {
    let start = Instant::now();
    // determinant identity at d = 3
    for trial in 0..100u64 {
        let s = random_state(&[3, 3], derive_seed(ROOT_SEED, 1000 + trial)).unwrap();
        let nu = det_invariant(&s, &[0]).unwrap();
        let det = s.partial_trace(&[0]).unwrap().det().re;
        assert!(rel_err(nu.norm_sqr(), det) <= 1e-10, "trial {trial}");
    }
    // SL(3) x SL(3) invariance
    let report = check_sl_invariance(
        "det:1",
        &[3, 3],
        100,
        derive_seed(ROOT_SEED, 10),
        TOL_SL_DRIFT,
    )
    .unwrap();
    assert!(report.pass, "{:?}", report.failures.first());

    // maximally entangled two-qutrit state: G-concurrence exactly 1
    let r = 1.0 / 3.0f64.sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); 9];
    for i in 0..3 {
        amps[i * 3 + i] = Complex64::new(r, 0.0);
    }
    let maxent = PureState::new(&[3, 3], amps, false).unwrap();
    assert!((g_concurrence(&maxent, &[0]).unwrap() - 1.0).abs() <= 1e-12);

    // degree-3 homogeneity: lambda = 2 scales nu by 8
    let s = random_state(&[3, 3], derive_seed(ROOT_SEED, 1100)).unwrap();
    let nu = det_invariant(&s, &[0]).unwrap();
    let scaled = det_invariant(&s.scaled(Complex64::new(2.0, 0.0)), &[0]).unwrap();
    assert!((scaled - nu * 8.0).norm() <= 1e-10 * (nu.norm() * 8.0).max(1.0));
    finish(10, "d=3 bipartite generalization", 10.0, start);
}

#[test]
fn criterion_11_two_qubit_anchor() {
    let start = Instant::now();
    for trial in 0..100u64 {
        let s = random_state(&[2, 2], derive_seed(ROOT_SEED, 1200 + trial)).unwrap();
        let nu = det_invariant(&s, &[0]).unwrap();
        let concurrence_sq = 4.0 * nu.norm_sqr();
        let det1 = s.partial_trace(&[0]).unwrap().det().re;
        assert!(
            rel_err(concurrence_sq, 4.0 * det1) <= 1e-10,
            "trial {trial}: C^2 = {concurrence_sq} vs 4 det rho = {}",
            4.0 * det1
        );
    }
    let bell_nu = det_invariant(&qtangle::bell(), &[0]).unwrap();
    assert!((2.0 * bell_nu.norm() - 1.0).abs() <= 1e-12);
    finish(11, "two-qubit concurrence anchor", 5.0, start);
}
