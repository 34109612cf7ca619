//! Scalar analysis of the monotonicity inequality for homogeneous
//! invariant functions: the f_eta kernel, the two-term inequality, the
//! convexity interpolation bound, the eta > 4 violating family and grid
//! sweeps over the inequality.

use std::io::{self, Write};

use serde::Serialize;

use crate::matrix::CMat;
use crate::slocc::{average_after_povm, make_povm};
use crate::state::PureState;
use crate::{Error, Result};

/// The inequality "holds" at a grid point when rhs <= 1 + this slack.
pub const SWEEP_HOLD_SLACK: f64 = 1e-12;

/// One evaluated grid point of the monotonicity inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub eta: f64,
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Outcome of the explicit eta > 4 violation construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViolationReport {
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Closed-form post-measurement ratio 2^(1-eta/2) beta^(2-eta/2) alpha^(-eta/2).
    pub closed_form_ratio: f64,
    /// mubar / mu0 from the state-level POVM simulation.
    pub simulated_ratio: f64,
    /// Simulation agrees with the closed form within 1e-9 relative.
    pub matches_closed_form: bool,
    /// The average exceeded the initial value: monotonicity fails.
    pub violated: bool,
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !value.is_finite() || value < lo || value > hi {
        return Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// The kernel f_eta(alpha, beta, x) = alpha beta [alpha beta / (x alpha^2
/// + (1-x) beta^2)]^(eta/2 - 1).
///
/// When alpha beta = 0 the value is the continuous limit: 0 for eta > 0.
/// For eta = 0 the two alpha-beta factors cancel algebraically and the
/// kernel is the denominator x alpha^2 + (1-x) beta^2 itself.
pub fn f_eta(alpha: f64, beta: f64, x: f64, eta: f64) -> Result<f64> {
    check_range("alpha", alpha, 0.0, 1.0)?;
    check_range("beta", beta, 0.0, 1.0)?;
    check_range("x", x, 0.0, 1.0)?;
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            range: "[0, inf)",
        });
    }
    let denom = x * alpha * alpha + (1.0 - x) * beta * beta;
    if eta == 0.0 {
        return Ok(denom);
    }
    let prod = alpha * beta;
    if prod == 0.0 {
        return Ok(0.0);
    }
    Ok(prod * (prod / denom).powf(eta / 2.0 - 1.0))
}

/// Right side of the two-term monotonicity inequality,
/// f_eta(a, b, x) + f_eta(sqrt(1-a^2), sqrt(1-b^2), x).
///
/// Monotonicity of a degree-eta homogeneous invariant function is
/// equivalent to rhs <= 1 over all admissible (a, b, x). The corners
/// (a, b) = (0, 0) and (1, 1) are excluded: there the POVM degenerates to
/// a unitary and the normalized form is undefined.
pub fn inequality_rhs(a: f64, b: f64, x: f64, eta: f64) -> Result<f64> {
    check_range("a", a, 0.0, 1.0)?;
    check_range("b", b, 0.0, 1.0)?;
    if (a == 0.0 && b == 0.0) || (a == 1.0 && b == 1.0) {
        return Err(Error::DegenerateCorner);
    }
    let first = f_eta(a, b, x, eta)?;
    let second = f_eta(
        (1.0 - a * a).max(0.0).sqrt(),
        (1.0 - b * b).max(0.0).sqrt(),
        x,
        eta,
    )?;
    Ok(first + second)
}

/// Interpolation slack (1 - eta/4) f_0 + (eta/4) f_4 - f_eta.
///
/// Nonnegative for 0 < eta < 4 because f_eta is, at fixed arguments, a
/// convex function of eta (an exponential with positive base).
pub fn convexity_gap(alpha: f64, beta: f64, x: f64, eta: f64) -> Result<f64> {
    if !eta.is_finite() || eta <= 0.0 || eta >= 4.0 {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            range: "(0, 4)",
        });
    }
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !v.is_finite() || v <= 0.0 || v >= 1.0 {
            return Err(Error::OutOfRange {
                name: if name == "alpha" { "alpha" } else { "beta" },
                value: v,
                range: "(0, 1)",
            });
        }
    }
    check_range("x", x, 0.0, 1.0)?;
    let f0 = f_eta(alpha, beta, x, 0.0)?;
    let f4 = f_eta(alpha, beta, x, 4.0)?;
    let fe = f_eta(alpha, beta, x, eta)?;
    Ok((1.0 - eta / 4.0) * f0 + (eta / 4.0) * f4 - fe)
}

fn check_violation_params(alpha: f64, beta: f64, eta: f64) -> Result<()> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            range: "(0, inf)",
        });
    }
    if !(alpha > beta && beta > 0.0) {
        return Err(Error::OutOfRange {
            name: "beta",
            value: beta,
            range: "0 < beta < alpha",
        });
    }
    let nsq = alpha * alpha + beta * beta;
    if (nsq - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized(nsq));
    }
    Ok(())
}

/// Closed-form post-measurement ratio mubar / mu for the diagonal POVM
/// with a = beta/alpha, b = 1 applied to the branch state
/// alpha|0>|phi0> + beta|1>|phi1>:
/// 2^(1-eta/2) beta^(2-eta/2) alpha^(-eta/2).
///
/// For eta > 4 the ratio exceeds 1 for sufficiently small beta, so no
/// homogeneous invariant function of degree above 4 is a monotone.
pub fn violation_ratio(alpha: f64, beta: f64, eta: f64) -> Result<f64> {
    check_violation_params(alpha, beta, eta)?;
    Ok(2.0_f64.powf(1.0 - eta / 2.0) * beta.powf(2.0 - eta / 2.0) * alpha.powf(-eta / 2.0))
}

/// Build the violating family alpha|0...0> + beta|1...1> on `n_parties`
/// qubits, apply the diagonal POVM with a = beta/alpha, b = 1 on the
/// first qubit, and compare the simulated average against
/// [`violation_ratio`].
///
/// `eval` must be a positive degree-`eta` homogeneous invariant function
/// that is nonzero on the constructed state (powers of the N-tangle
/// qualify); otherwise [`Error::VanishingInvariant`] is returned.
pub fn construct_violation<F>(
    alpha: f64,
    beta: f64,
    n_parties: usize,
    eval: F,
    eta: f64,
) -> Result<ViolationReport>
where
    F: Fn(&PureState) -> Result<f64>,
{
    check_violation_params(alpha, beta, eta)?;
    if n_parties < 2 {
        return Err(Error::TooFewParties("construct_violation"));
    }
    let total = 1usize << n_parties;
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); total];
    amps[0] = num_complex::Complex64::new(alpha, 0.0);
    amps[total - 1] = num_complex::Complex64::new(beta, 0.0);
    let state = PureState::new(&vec![2; n_parties], amps, false)?;

    let id = CMat::identity(2, 2);
    let povm = make_povm(beta / alpha, 1.0, id.clone(), id.clone(), id)?;
    let (mu0, mubar) = average_after_povm(&eval, eta, &state, 0, &povm)?;
    if mu0 <= 0.0 || !mu0.is_finite() {
        return Err(Error::VanishingInvariant);
    }
    let simulated = mubar / mu0;
    let closed = violation_ratio(alpha, beta, eta)?;
    let rel = (simulated - closed).abs() / closed.max(f64::MIN_POSITIVE);
    Ok(ViolationReport {
        eta,
        alpha,
        beta,
        closed_form_ratio: closed,
        simulated_ratio: simulated,
        matches_closed_form: rel <= 1e-9,
        violated: simulated > 1.0,
    })
}

fn grid_points(resolution: usize) -> Vec<f64> {
    (1..=resolution)
        .map(|i| i as f64 / (resolution + 1) as f64)
        .collect()
}

/// Records of one (b, x) plane at fixed eta and a; corners cannot occur on
/// the interior grid.
fn plane<'p>(eta: f64, a: f64, points: &'p [f64]) -> impl Iterator<Item = SweepRecord> + 'p {
    points.iter().flat_map(move |&b| {
        points.iter().map(move |&x| {
            let rhs = inequality_rhs(a, b, x, eta).expect("interior grid point");
            SweepRecord {
                eta,
                a,
                b,
                x,
                rhs,
                holds: rhs <= 1.0 + SWEEP_HOLD_SLACK,
            }
        })
    })
}

fn check_sweep_args(etas: &[f64], resolution: usize) -> Result<()> {
    if resolution < 2 {
        return Err(Error::OutOfRange {
            name: "resolution",
            value: resolution as f64,
            range: "[2, inf)",
        });
    }
    for &eta in etas {
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::OutOfRange {
                name: "eta",
                value: eta,
                range: "[0, inf)",
            });
        }
    }
    Ok(())
}

/// Evaluate the inequality on the open uniform grid i/(R+1), i = 1..=R,
/// over (a, b, x) for each eta. Record order is eta-major, then a, b, x,
/// regardless of how the evaluation is scheduled.
///
/// Splits into (eta, a) planes on the rayon pool when the `parallel`
/// feature is enabled; [`sweep_serial`] is the single-threaded equivalent
/// with identical output.
pub fn sweep(etas: &[f64], resolution: usize) -> Result<Vec<SweepRecord>> {
    check_sweep_args(etas, resolution)?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let points = grid_points(resolution);
        Ok((0..etas.len() * resolution)
            .into_par_iter()
            .flat_map_iter(|idx| plane(etas[idx / resolution], points[idx % resolution], &points))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        sweep_serial(etas, resolution)
    }
}

/// Single-threaded [`sweep`], kept available for benchmarking against the
/// parallel path.
pub fn sweep_serial(etas: &[f64], resolution: usize) -> Result<Vec<SweepRecord>> {
    check_sweep_args(etas, resolution)?;
    let points = grid_points(resolution);
    let mut records = Vec::with_capacity(etas.len() * resolution.pow(3));
    for &eta in etas {
        for &a in &points {
            records.extend(plane(eta, a, &points));
        }
    }
    Ok(records)
}

/// Write sweep records as CSV: header `eta,a,b,x,rhs,holds`, floats with
/// 17 significant digits.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "eta,a,b,x,rhs,holds")?;
    for r in records {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.eta, r.a, r.b, r.x, r.rhs, r.holds
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::n_tangle;

    #[test]
    fn f_zero_is_the_denominator() {
        let cases = [(0.3, 0.8, 0.25), (0.9, 0.1, 0.7), (0.5, 0.5, 0.0)];
        for (al, be, x) in cases {
            let expect = x * al * al + (1.0 - x) * be * be;
            assert!((f_eta(al, be, x, 0.0).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn f_four_with_equal_args_is_squared() {
        for c in [0.2, 0.5, 0.9] {
            let v = f_eta(c, c, 0.5, 4.0).unwrap();
            assert!((v - c * c).abs() < 1e-15);
        }
    }

    #[test]
    fn f_vanishes_on_the_axis_for_positive_eta() {
        for eta in [2.0, 3.0, 4.0, 6.0] {
            assert_eq!(f_eta(0.7, 0.0, 0.4, eta).unwrap(), 0.0);
            assert_eq!(f_eta(0.0, 0.7, 0.4, eta).unwrap(), 0.0);
            assert_eq!(f_eta(0.0, 0.0, 0.4, eta).unwrap(), 0.0);
        }
    }

    #[test]
    fn f_rejects_out_of_range() {
        assert!(f_eta(1.2, 0.5, 0.5, 2.0).is_err());
        assert!(f_eta(0.5, 0.5, -0.1, 2.0).is_err());
        assert!(f_eta(0.5, 0.5, 0.5, -1.0).is_err());
    }

    #[test]
    fn rhs_is_one_at_eta_zero() {
        for a in [0.1, 0.5, 0.9] {
            for b in [0.2, 0.7] {
                for x in [0.0, 0.3, 1.0] {
                    assert!((inequality_rhs(a, b, x, 0.0).unwrap() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rhs_is_one_when_a_equals_b() {
        for eta in [0.5, 2.0, 4.0, 7.0] {
            for a in [0.2, 0.6, 0.95] {
                let v = inequality_rhs(a, a, 0.31, eta).unwrap();
                assert!((v - 1.0).abs() < 1e-12, "eta={eta} a={a}: {v}");
            }
        }
    }

    #[test]
    fn rhs_holds_at_eta_four_sample() {
        let v = inequality_rhs(0.9, 0.3, 0.7, 4.0).unwrap();
        assert!(v <= 1.0 + 1e-12);
    }

    #[test]
    fn rhs_rejects_corners() {
        assert!(matches!(
            inequality_rhs(0.0, 0.0, 0.5, 2.0),
            Err(Error::DegenerateCorner)
        ));
        assert!(matches!(
            inequality_rhs(1.0, 1.0, 0.5, 2.0),
            Err(Error::DegenerateCorner)
        ));
        // mixed boundary points are fine
        assert!(inequality_rhs(0.0, 1.0, 0.5, 2.0).is_ok());
    }

    #[test]
    fn rhs_symmetric_under_complement() {
        for (a, b, x, eta) in [(0.3, 0.8, 0.45, 2.5), (0.9, 0.2, 0.1, 3.7)] {
            let v1 = inequality_rhs(a, b, x, eta).unwrap();
            let v2 = inequality_rhs(
                (1.0 - a * a).sqrt(),
                (1.0 - b * b).sqrt(),
                x,
                eta,
            )
            .unwrap();
            assert!((v1 - v2).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_examples() {
        assert!(convexity_gap(0.8, 0.4, 0.5, 2.0).unwrap() >= 0.0);
        // alpha == beta: base of the exponential is 1, interpolation exact
        assert!(convexity_gap(0.6, 0.6, 0.3, 2.0).unwrap().abs() < 1e-12);
        // near the interpolation endpoints the gap closes
        assert!(convexity_gap(0.8, 0.4, 0.5, 1e-7).unwrap().abs() < 1e-9);
        assert!(convexity_gap(0.8, 0.4, 0.5, 4.0 - 1e-7).unwrap().abs() < 1e-9);
        assert!(convexity_gap(0.8, 0.4, 0.5, 4.0).is_err());
        assert!(convexity_gap(1.0, 0.4, 0.5, 2.0).is_err());
    }

    #[test]
    fn violation_ratio_examples() {
        let beta = 0.1_f64;
        let alpha = (1.0 - beta * beta).sqrt();
        let r6 = violation_ratio(alpha, beta, 6.0).unwrap();
        assert!((r6 - 2.5379742809576062).abs() < 1e-12);
        assert!(r6 > 1.0);

        let r4 = violation_ratio(alpha, beta, 4.0).unwrap();
        assert!((r4 - 1.0 / (2.0 * alpha * alpha)).abs() < 1e-14);
        assert!(r4 < 1.0);

        // eta = 5: the beta exponent is -1/2, ratio grows without bound
        let small = violation_ratio((1.0 - 1e-8_f64).sqrt(), 1e-4, 5.0).unwrap();
        assert!(small > 30.0);
    }

    #[test]
    fn violation_ratio_rejects_bad_params() {
        assert!(violation_ratio(0.3, 0.4, 5.0).is_err()); // alpha < beta
        assert!(violation_ratio(0.9, 0.1, 5.0).is_err()); // not normalized
        assert!(violation_ratio((1.0_f64 - 0.01).sqrt(), 0.1, 0.0).is_err());
    }

    fn tangle_power(eta: f64) -> impl Fn(&PureState) -> crate::Result<f64> {
        move |s: &PureState| Ok(n_tangle(s)?.powf(eta / 4.0))
    }

    #[test]
    fn construct_violation_eta6() {
        let beta = 0.1_f64;
        let alpha = (1.0 - beta * beta).sqrt();
        let report = construct_violation(alpha, beta, 4, tangle_power(6.0), 6.0).unwrap();
        assert!(report.matches_closed_form, "rel mismatch: {report:?}");
        assert!(report.violated);
        assert!((report.simulated_ratio - 2.5379742809576062).abs() < 1e-9);
    }

    #[test]
    fn construct_violation_eta4_no_violation() {
        let beta = 0.3_f64;
        let alpha = (1.0 - beta * beta).sqrt();
        let report = construct_violation(alpha, beta, 4, tangle_power(4.0), 4.0).unwrap();
        assert!(report.matches_closed_form);
        assert!(!report.violated);
    }

    #[test]
    fn construct_violation_eta2_ratio_below_one() {
        let beta = 0.2_f64;
        let alpha = (1.0 - beta * beta).sqrt();
        let report = construct_violation(alpha, beta, 4, tangle_power(2.0), 2.0).unwrap();
        // closed form 2^0 beta alpha^{-1}
        assert!((report.closed_form_ratio - beta / alpha).abs() < 1e-12);
        assert!(report.matches_closed_form);
        assert!(!report.violated);
    }

    #[test]
    fn construct_violation_rejects_vanishing_evaluator() {
        let beta = 0.2_f64;
        let alpha = (1.0 - beta * beta).sqrt();
        let zero_eval = |_: &PureState| Ok(0.0);
        assert!(matches!(
            construct_violation(alpha, beta, 4, zero_eval, 4.0),
            Err(Error::VanishingInvariant)
        ));
    }

    #[test]
    fn sweep_record_order_and_counts() {
        let records = sweep(&[1.0, 2.0], 3).unwrap();
        assert_eq!(records.len(), 2 * 27);
        assert!(records[..27].iter().all(|r| r.eta == 1.0));
        assert!(records[27..].iter().all(|r| r.eta == 2.0));
        // a-major inside each eta block
        assert!((records[0].a - 0.25).abs() < 1e-15);
        assert!((records[26].a - 0.75).abs() < 1e-15);
        assert_eq!(records, sweep_serial(&[1.0, 2.0], 3).unwrap());
    }

    #[test]
    fn sweep_eta_at_most_four_always_holds() {
        for eta in [0.5, 4.0] {
            let records = sweep(&[eta], 21).unwrap();
            assert!(records.iter().all(|r| r.holds), "eta={eta}");
        }
    }

    #[test]
    fn sweep_finds_witnesses_above_four() {
        // eta = 4.5 violates already on a coarse 25-point grid
        let records = sweep(&[4.5], 25).unwrap();
        assert!(records.iter().any(|r| r.rhs > 1.0 + 1e-6));
        // eta = 4.1 needs a finer grid; 50 points suffice
        let records = sweep(&[4.1], 50).unwrap();
        assert!(records.iter().any(|r| r.rhs > 1.0 + 1e-6));
    }

    #[test]
    fn sweep_rejects_tiny_resolution() {
        assert!(sweep(&[1.0], 1).is_err());
    }

    #[test]
    fn csv_format() {
        let records = sweep(&[0.5], 2).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "eta,a,b,x,rhs,holds");
        let first = lines.next().unwrap();
        assert!(first.starts_with("5.0000000000000000e-1,"));
        assert!(first.ends_with(",true"));
        assert_eq!(text.lines().count(), 1 + 8);
    }
}
