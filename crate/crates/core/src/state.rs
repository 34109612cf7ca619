//! Pure multipartite states: construction, local operations, partial
//! traces and the reshaped coefficient matrix of a bipartition.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::matrix::{det_lu, CMat};
use crate::{Error, Result};

/// Squared-norm tolerance for states flagged as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A pure state of N parties with local dimensions `dims`.
///
/// Amplitudes are stored flat in big-endian party order: the flat index of
/// the basis ket |i1 ... iN> is `sum_j i_j * prod_{m>j} d_m`, so party 1 is
/// the most significant digit. For four qubits this makes the coefficient
/// array of the bipartition 12|34 readable directly off the flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Build a state from a flat amplitude vector, optionally normalizing.
    pub fn new(dims: &[usize], amps: Vec<Complex64>, normalize: bool) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::BadDims);
        }
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(Error::LengthMismatch {
                expected: total,
                actual: amps.len(),
            });
        }
        if let Some(k) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        let mut state = Self {
            dims: dims.to_vec(),
            amps,
        };
        if normalize {
            let n = state.norm();
            if n == 0.0 {
                return Err(Error::ZeroNorm);
            }
            for a in &mut state.amps {
                *a /= n;
            }
        }
        Ok(state)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn num_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    /// True when every party is a qubit.
    pub fn is_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Rescaled copy with unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Copy with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// Inner product <self|other> (amplitudes of `self` conjugated).
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Stride of each party in the flat index (product of later dims).
    fn strides(&self) -> Vec<usize> {
        let n = self.dims.len();
        let mut s = vec![1usize; n];
        for j in (0..n.saturating_sub(1)).rev() {
            s[j] = s[j + 1] * self.dims[j + 1];
        }
        s
    }

    fn check_party(&self, party: usize) -> Result<()> {
        if party >= self.dims.len() {
            return Err(Error::PartyOutOfRange {
                party,
                parties: self.dims.len(),
            });
        }
        Ok(())
    }

    /// In-place local operator application; the per-block scratch makes the
    /// overwrite safe.
    pub(crate) fn apply_single_mut(&mut self, party: usize, op: &CMat) -> Result<()> {
        self.check_party(party)?;
        let d = self.dims[party];
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::OperatorShape { party, dim: d });
        }
        let stride: usize = self.dims[party + 1..].iter().product();
        let block = d * stride;
        let mut scratch = vec![Complex64::new(0.0, 0.0); d];
        for base in (0..self.amps.len()).step_by(block) {
            for s in 0..stride {
                for (r, slot) in scratch.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..d {
                        acc += op[(r, c)] * self.amps[base + c * stride + s];
                    }
                    *slot = acc;
                }
                for (r, &v) in scratch.iter().enumerate() {
                    self.amps[base + r * stride + s] = v;
                }
            }
        }
        Ok(())
    }

    /// Apply a single local operator on one party; the result is not
    /// renormalized.
    pub fn apply_single(&self, party: usize, op: &CMat) -> Result<Self> {
        let mut out = self.clone();
        out.apply_single_mut(party, op)?;
        Ok(out)
    }

    /// Apply one operator per party, i.e. (O1 x ... x ON)|psi>.
    ///
    /// The result is intentionally not renormalized; measurement and
    /// monotonicity arguments work with unnormalized branch states.
    pub fn apply_local(&self, ops: &[CMat]) -> Result<Self> {
        if ops.len() != self.dims.len() {
            return Err(Error::OperatorCount {
                expected: self.dims.len(),
                actual: ops.len(),
            });
        }
        let mut out = self.clone();
        for (party, op) in ops.iter().enumerate() {
            out.apply_single_mut(party, op)?;
        }
        Ok(out)
    }

    /// Reorder parties: party `j` of the result is party `perm[j]` of `self`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::OperatorCount {
                expected: n,
                actual: perm.len(),
            });
        }
        for &p in perm {
            self.check_party(p)?;
            if seen[p] {
                return Err(Error::BadContractions(format!(
                    "party {p} repeated in permutation"
                )));
            }
            seen[p] = true;
        }
        let old_strides = self.strides();
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut new_strides = vec![1usize; n];
        for j in (0..n.saturating_sub(1)).rev() {
            new_strides[j] = new_strides[j + 1] * new_dims[j + 1];
        }
        let mut new_amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (new_flat, slot) in new_amps.iter_mut().enumerate() {
            let mut rem = new_flat;
            let mut old_flat = 0usize;
            for j in 0..n {
                let digit = rem / new_strides[j];
                rem %= new_strides[j];
                old_flat += digit * old_strides[perm[j]];
            }
            *slot = self.amps[old_flat];
        }
        Ok(Self {
            dims: new_dims,
            amps: new_amps,
        })
    }

    /// Exchange two parties.
    pub fn swap_parties(&self, p: usize, q: usize) -> Result<Self> {
        self.check_party(p)?;
        self.check_party(q)?;
        let mut perm: Vec<usize> = (0..self.dims.len()).collect();
        perm.swap(p, q);
        self.permute_parties(&perm)
    }

    /// Joint-index offsets into the flat vector for a list of parties.
    ///
    /// Entry `i` is the flat-index contribution of joint digit `i` over
    /// `parties`, with the first listed party most significant.
    fn joint_offsets(&self, parties: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let dims: Vec<usize> = parties.iter().map(|&p| self.dims[p]).collect();
        let mut joint_strides = vec![1usize; dims.len()];
        for j in (0..dims.len().saturating_sub(1)).rev() {
            joint_strides[j] = joint_strides[j + 1] * dims[j + 1];
        }
        let total: usize = dims.iter().product();
        let mut offsets = vec![0usize; total];
        for (joint, off) in offsets.iter_mut().enumerate() {
            let mut rem = joint;
            let mut acc = 0usize;
            for j in 0..dims.len() {
                let digit = rem / joint_strides[j];
                rem %= joint_strides[j];
                acc += digit * strides[parties[j]];
            }
            *off = acc;
        }
        offsets
    }

    fn validate_keep(&self, keep: &[usize]) -> Result<Vec<usize>> {
        let n = self.dims.len();
        if keep.is_empty() || keep.len() >= n {
            return Err(Error::BadKeepSet);
        }
        let mut seen = vec![false; n];
        for &k in keep {
            self.check_party(k)?;
            if seen[k] {
                return Err(Error::BadKeepSet);
            }
            seen[k] = true;
        }
        Ok((0..n).filter(|j| !seen[*j]).collect())
    }

    /// Reduced density matrix of the parties in `keep` (0-based), with the
    /// traced parties summed out: rho[i,k] = sum_l a_{i,l} conj(a_{k,l}).
    ///
    /// Row/column ordering follows the order of `keep`. The trace equals
    /// the squared norm of the state.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let traced = self.validate_keep(keep)?;
        let keep_off = self.joint_offsets(keep);
        let traced_off = self.joint_offsets(&traced);
        let dk = keep_off.len();
        let mut rho = CMat::zeros(dk, dk);
        for (i, &oi) in keep_off.iter().enumerate() {
            for (k, &ok) in keep_off.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &ol in &traced_off {
                    acc += self.amps[oi + ol] * self.amps[ok + ol].conj();
                }
                rho[(i, k)] = acc;
            }
        }
        Ok(DensityMatrix { dim: dk, entries: rho })
    }

    /// Reshaped coefficient matrix X† of an equal-dimension bipartition:
    /// (X†)_{i,l} = a_{i,l} with row index the joint `left` index and
    /// column index the joint complement index.
    ///
    /// Satisfies `partial_trace(left) == X† X`. Unequal bipartitions are an
    /// error: the determinant of the larger side's reduced state vanishes
    /// identically, so no invariant survives there.
    pub fn coefficient_matrix(&self, left: &[usize]) -> Result<CoefficientMatrix> {
        let right = self.validate_keep(left)?;
        let dl: usize = left.iter().map(|&p| self.dims[p]).product();
        let dr: usize = right.iter().map(|&p| self.dims[p]).product();
        if dl != dr {
            return Err(Error::UnequalBipartition { left: dl, right: dr });
        }
        let left_off = self.joint_offsets(left);
        let right_off = self.joint_offsets(&right);
        let mut x = CMat::zeros(dl, dl);
        for (i, &oi) in left_off.iter().enumerate() {
            for (l, &ol) in right_off.iter().enumerate() {
                x[(i, l)] = self.amps[oi + ol];
            }
        }
        Ok(CoefficientMatrix { d: dl, entries: x })
    }

    /// Squared norm of the branch where `party` carries digit `value`.
    pub fn branch_norm_sqr(&self, party: usize, value: usize) -> Result<f64> {
        self.check_party(party)?;
        let d = self.dims[party];
        if value >= d {
            return Err(Error::OutOfRange {
                name: "branch value",
                value: value as f64,
                range: "0..local dimension",
            });
        }
        let stride: usize = self.dims[party + 1..].iter().product();
        let block = d * stride;
        let mut acc = 0.0;
        for base in (0..self.amps.len()).step_by(block) {
            for s in 0..stride {
                acc += self.amps[base + value * stride + s].norm_sqr();
            }
        }
        Ok(acc)
    }

    /// Parse the JSON state format `{"dims": [...], "amps": [[re, im], ...]}`.
    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let repr: StateFileRepr =
            serde_json::from_reader(reader).map_err(|e| Error::StateFile(e.to_string()))?;
        let amps = repr
            .amps
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        Self::new(&repr.dims, amps, false)
    }

    /// Write the JSON state format documented in [`Self::from_json_reader`].
    pub fn to_json_writer<W: Write>(&self, writer: W) -> Result<()> {
        let repr = StateFileRepr {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        };
        serde_json::to_writer_pretty(writer, &repr).map_err(|e| Error::StateFile(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct StateFileRepr {
    dims: Vec<usize>,
    amps: Vec<[f64; 2]>,
}

/// Hermitian reduced state produced by [`PureState::partial_trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: CMat,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn det(&self) -> Complex64 {
        det_lu(&self.entries)
    }

    /// Trace of rho^2.
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).norm()
    }

    /// Eigenvalues ascending (real: the matrix is Hermitian up to round-off).
    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::matrix::hermitian_eigenvalues(&self.entries)
    }
}

/// Coefficient matrix X† of an equal bipartition; `det` is the degree-d
/// polynomial invariant of the split.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    d: usize,
    entries: CMat,
}

impl CoefficientMatrix {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn det(&self) -> Complex64 {
        det_lu(&self.entries)
    }

    /// Frobenius norm; equals the norm of the originating state.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }
}

fn qubit_dims(n: usize) -> Vec<usize> {
    vec![2; n]
}

/// GHZ state (|0...0> + |1...1>)/sqrt(2) on `n` qubits.
pub fn ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::TooFewParties("ghz"));
    }
    let total = 1usize << n;
    let mut amps = vec![Complex64::new(0.0, 0.0); total];
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[0] = r;
    amps[total - 1] = r;
    PureState::new(&qubit_dims(n), amps, false)
}

/// W state: equal superposition of the weight-1 bitstrings on `n` qubits.
pub fn w_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::TooFewParties("w"));
    }
    let total = 1usize << n;
    let mut amps = vec![Complex64::new(0.0, 0.0); total];
    let r = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    for j in 0..n {
        amps[1usize << j] = r;
    }
    PureState::new(&qubit_dims(n), amps, false)
}

/// Bell pair; alias for [`ghz`] with two qubits.
pub fn bell() -> PureState {
    ghz(2).expect("ghz(2) is always valid")
}

/// Computational basis state from a bitstring, e.g. `"0101"`.
pub fn basis_state(bits: &str) -> Result<PureState> {
    if bits.is_empty() {
        return Err(Error::BadDims);
    }
    let mut flat = 0usize;
    for ch in bits.chars() {
        flat = flat * 2
            + match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::StateFile(format!("invalid bitstring '{bits}'"))),
            };
    }
    let n = bits.len();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
    amps[flat] = Complex64::new(1.0, 0.0);
    PureState::new(&qubit_dims(n), amps, false)
}

/// Product state ((|0> + |1>)/sqrt(2))^n: all amplitudes equal.
pub fn uniform_product(n: usize) -> Result<PureState> {
    if n == 0 {
        return Err(Error::BadDims);
    }
    let total = 1usize << n;
    let amp = Complex64::new((total as f64).sqrt().recip(), 0.0);
    PureState::new(&qubit_dims(n), vec![amp; total], false)
}

/// Haar-uniform random state: independent standard complex Gaussian
/// amplitudes, normalized. Deterministic for a fixed seed.
pub fn random_state(dims: &[usize], seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_with(dims, &mut rng)
}

/// Same as [`random_state`] but drawing from a caller-supplied generator.
pub fn random_state_with(dims: &[usize], rng: &mut impl rand::Rng) -> Result<PureState> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::BadDims);
    }
    let total: usize = dims.iter().product();
    let amps: Vec<Complex64> = (0..total)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    PureState::new(dims, amps, true)
}
