//! Random determinant-1 operators and Haar unitaries, the two-outcome
//! local POVM, and post-measurement averages of invariant functions.

use nalgebra::linalg::QR;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{unitarity_residual, CMat};
use crate::state::PureState;
use crate::{Error, Result};

/// Raw Gaussian samples with |det| below this are resampled before the
/// det-1 rescaling; keeps the conditioning of invariance trials bounded.
pub const SL_DET_GUARD: f64 = 0.1;

/// POVM outcomes with probability below this contribute nothing to
/// averages and are returned with a zero-flagged state.
pub const NEGLIGIBLE_PROB: f64 = 1e-14;

/// Unitarity / completeness acceptance residual for constructed operators.
pub const UNITARY_TOL: f64 = 1e-10;

/// Derive a per-trial seed from a root seed (splitmix64 finalizer).
///
/// Trials seeded this way are independent of execution order, so parallel
/// suites reproduce bit-for-bit.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian_matrix(dim: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Random element of SL(dim, C): a complex Gaussian matrix rescaled by
/// det^(-1/dim), resampling while |det| < [`SL_DET_GUARD`].
pub fn random_sl_with(dim: usize, rng: &mut impl Rng) -> CMat {
    loop {
        let m = gaussian_matrix(dim, rng);
        let det = crate::matrix::det_lu(&m);
        if det.norm() < SL_DET_GUARD {
            continue;
        }
        let scale = det.powf(-1.0 / dim as f64);
        return m * scale;
    }
}

/// Seeded random SL(dim, C) element.
pub fn random_sl(dim: usize, seed: u64) -> CMat {
    random_sl_with(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Seeded random SL(2, C) element.
pub fn random_sl2(seed: u64) -> CMat {
    random_sl(2, seed)
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// R-diagonal phases absorbed into Q.
pub fn random_unitary_with(dim: usize, rng: &mut impl Rng) -> CMat {
    let m = gaussian_matrix(dim, rng);
    let qr = QR::new(m);
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Seeded Haar-random unitary.
pub fn random_unitary(dim: usize, seed: u64) -> CMat {
    random_unitary_with(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Seeded Haar-random 2x2 unitary.
pub fn random_unitary2(seed: u64) -> CMat {
    random_unitary(2, seed)
}

/// A two-outcome local POVM stored with its A_j = U_j D_j V factorization,
/// D_1 = diag(a, b) and D_2 = diag(sqrt(1-a^2), sqrt(1-b^2)).
#[derive(Debug, Clone)]
pub struct PovmPair {
    a: f64,
    b: f64,
    u1: CMat,
    u2: CMat,
    v: CMat,
    a1: CMat,
    a2: CMat,
}

impl PovmPair {
    /// Diagonal parameters (a, b).
    pub fn params(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Unitary factors (U1, U2, V).
    pub fn factors(&self) -> (&CMat, &CMat, &CMat) {
        (&self.u1, &self.u2, &self.v)
    }

    /// POVM elements (A1, A2).
    pub fn elements(&self) -> (&CMat, &CMat) {
        (&self.a1, &self.a2)
    }

    pub fn d1(&self) -> CMat {
        diag2(self.a, self.b)
    }

    pub fn d2(&self) -> CMat {
        diag2(
            (1.0 - self.a * self.a).max(0.0).sqrt(),
            (1.0 - self.b * self.b).max(0.0).sqrt(),
        )
    }

    /// Frobenius norm of A1†A1 + A2†A2 − I.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self.a1.adjoint() * &self.a1 + self.a2.adjoint() * &self.a2;
        (sum - CMat::identity(2, 2)).norm()
    }
}

fn diag2(x: f64, y: f64) -> CMat {
    let z = Complex64::new(0.0, 0.0);
    CMat::from_row_slice(
        2,
        2,
        &[Complex64::new(x, 0.0), z, z, Complex64::new(y, 0.0)],
    )
}

fn check_unitary(m: &CMat, label: &'static str) -> Result<()> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::NotUnitary(label));
    }
    if unitarity_residual(m) > UNITARY_TOL {
        return Err(Error::NotUnitary(label));
    }
    Ok(())
}

/// Build the POVM pair A_j = U_j D_j V from parameters a, b in [0, 1]
/// and unitary factors. Completeness A1†A1 + A2†A2 = I holds by
/// construction since D1² + D2² = I.
pub fn make_povm(a: f64, b: f64, u1: CMat, u2: CMat, v: CMat) -> Result<PovmPair> {
    for (name, val) in [("a", a), ("b", b)] {
        if !(0.0..=1.0).contains(&val) || !val.is_finite() {
            return Err(Error::OutOfRange {
                name: if name == "a" { "a" } else { "b" },
                value: val,
                range: "[0, 1]",
            });
        }
    }
    check_unitary(&u1, "U1")?;
    check_unitary(&u2, "U2")?;
    check_unitary(&v, "V")?;
    let d1 = diag2(a, b);
    let d2 = diag2(
        (1.0 - a * a).max(0.0).sqrt(),
        (1.0 - b * b).max(0.0).sqrt(),
    );
    let a1 = &u1 * d1 * &v;
    let a2 = &u2 * d2 * &v;
    Ok(PovmPair {
        a,
        b,
        u1,
        u2,
        v,
        a1,
        a2,
    })
}

/// POVM with uniformly random parameters and Haar-random factors.
pub fn random_povm(rng: &mut impl Rng) -> PovmPair {
    let a: f64 = rng.gen();
    let b: f64 = rng.gen();
    let u1 = random_unitary_with(2, rng);
    let u2 = random_unitary_with(2, rng);
    let v = random_unitary_with(2, rng);
    make_povm(a, b, u1, u2, v).expect("random factors are unitary by construction")
}

/// One branch of a POVM application.
#[derive(Debug, Clone)]
pub struct PovmOutcome {
    pub probability: f64,
    /// Normalized post-measurement state, or the zero vector when the
    /// branch probability is negligible.
    pub state: PureState,
    /// True when `probability` < [`NEGLIGIBLE_PROB`]; the state is then
    /// the zero vector and the branch contributes nothing to averages.
    pub negligible: bool,
}

/// Apply the POVM on party `k` (0-based) of a normalized state.
///
/// Returns both outcomes; probabilities p_j = <psi|A_j†A_j psi> sum to 1.
pub fn apply_povm(state: &PureState, k: usize, povm: &PovmPair) -> Result<Vec<PovmOutcome>> {
    if k >= state.num_parties() {
        return Err(Error::PartyOutOfRange {
            party: k,
            parties: state.num_parties(),
        });
    }
    if state.dims()[k] != 2 {
        return Err(Error::NotQubits(state.dims()[k]));
    }
    let nsq = state.norm_sqr();
    if (nsq - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(nsq));
    }
    let (a1, a2) = povm.elements();
    let mut outcomes = Vec::with_capacity(2);
    for element in [a1, a2] {
        let branch = state.apply_single(k, element)?;
        let p = branch.norm_sqr();
        if p < NEGLIGIBLE_PROB {
            let zero = branch.scaled(Complex64::new(0.0, 0.0));
            outcomes.push(PovmOutcome {
                probability: p,
                state: zero,
                negligible: true,
            });
        } else {
            outcomes.push(PovmOutcome {
                probability: p,
                state: branch.scaled(Complex64::new(1.0 / p.sqrt(), 0.0)),
                negligible: false,
            });
        }
    }
    Ok(outcomes)
}

/// Average of a positive degree-eta homogeneous function over the POVM
/// outcomes.
///
/// Returns `(mu0, mubar)` with mu0 the value on the input state and
/// mubar = sum_j p_j * f(post_j) over the normalized post states; this
/// equals sum_j p_j^(1-eta/2) f(unnormalized branch) by homogeneity.
/// Monotonicity under local operations means mubar <= mu0.
pub fn average_after_povm<F>(
    eval: F,
    eta: f64,
    state: &PureState,
    k: usize,
    povm: &PovmPair,
) -> Result<(f64, f64)>
where
    F: Fn(&PureState) -> Result<f64>,
{
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            range: "(0, inf)",
        });
    }
    let mu0 = eval(state)?;
    let mut mubar = 0.0;
    for outcome in apply_povm(state, k, povm)? {
        if outcome.negligible {
            continue;
        }
        mubar += outcome.probability * eval(&outcome.state)?;
    }
    Ok((mu0, mubar))
}
