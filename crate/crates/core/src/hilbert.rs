//! Dense complex linear algebra for small Hilbert spaces.
//!
//! States, operators and unitaries are plain heap vectors of [`Complex64`];
//! every system in scope has dimension N <= 8, so no sparse or blocked
//! storage is needed. All values are immutable after construction and every
//! operation is a pure function.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Tolerance for state normalization checks (infinity norm headroom at N <= 8).
pub const EPS_NORM: f64 = 1e-9;
/// Tolerance for Hermiticity checks.
pub const EPS_HERM: f64 = 1e-9;
/// Tolerance for unitarity checks.
pub const EPS_UNIT: f64 = 1e-9;
/// Tolerance for eigensystem residuals and orthonormality.
pub const EPS_EIG: f64 = 1e-9;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn all_finite(amps: &[Complex64]) -> bool {
    amps.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `sum_i conj(a_i) b_i`
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).fold(ZERO, |s, z| s + z)
}

pub(crate) fn norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized to within [`EPS_NORM`].
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidDimension { dim: amps.len() });
        }
        if !all_finite(&amps) {
            return Err(Error::NonFinite);
        }
        let norm = norm_sq(&amps).sqrt();
        if (norm - 1.0).abs() > EPS_NORM {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidDimension { dim: amps.len() });
        }
        if !all_finite(&amps) {
            return Err(Error::NonFinite);
        }
        let norm = norm_sq(&amps).sqrt();
        if norm <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        for z in &mut amps {
            *z /= norm;
        }
        Ok(Self { amps })
    }

    /// Computational basis state `|k>` in dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        Self { amps }
    }

    /// Convenience constructor from real amplitude pairs.
    pub fn from_reals(amps: &[f64]) -> Result<Self> {
        Self::normalized(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amps, &other.amps)
    }

    /// Kronecker product; the first factor is the slow index.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }
}

/// A dense square matrix with a cached Hermiticity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<Complex64>, // row major
    hermitian: bool,
}

impl Operator {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        if !all_finite(&entries) {
            return Err(Error::NonFinite);
        }
        let mut op = Self { dim, entries, hermitian: false };
        op.hermitian = op.hermitian_deviation() <= EPS_HERM;
        Ok(op)
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![ZERO; dim * dim], hermitian: true }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.entries[i * dim + i] = ONE;
        }
        op
    }

    /// Diagonal matrix from real entries.
    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut op = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            op.entries[i * dim + i] = Complex64::new(v, 0.0);
        }
        op
    }

    /// Rank-one projector `|v><v|`.
    pub fn projector(v: &StateVector) -> Self {
        let dim = v.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(v.amps()[i] * v.amps()[j].conj());
            }
        }
        Self { dim, entries, hermitian: true }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Largest entry magnitude of `M - M^dagger`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > EPS_HERM {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Operator {
        let mut entries = vec![ZERO; self.dim * self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries[j * self.dim + i] = self.get(i, j).conj();
            }
        }
        Operator { dim: self.dim, entries, hermitian: self.hermitian }
    }

    pub fn mul(&self, rhs: &Operator) -> Result<Operator> {
        if rhs.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rhs.dim });
        }
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        Operator::new(n, entries)
    }

    pub fn add(&self, rhs: &Operator) -> Result<Operator> {
        if rhs.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rhs.dim });
        }
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        Operator::new(self.dim, entries)
    }

    pub fn sub(&self, rhs: &Operator) -> Result<Operator> {
        if rhs.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rhs.dim });
        }
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        Operator::new(self.dim, entries)
    }

    pub fn scale(&self, factor: Complex64) -> Operator {
        let entries = self.entries.iter().map(|z| z * factor).collect();
        Operator { dim: self.dim, entries, hermitian: false }
    }

    /// Matrix-vector product on raw amplitudes.
    pub fn apply_raw(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        debug_assert_eq!(v.len(), n);
        let mut out = vec![ZERO; n];
        for i in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                acc += self.entries[i * n + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Kronecker product; the first factor is the slow index.
    pub fn tensor(&self, other: &Operator) -> Operator {
        let n = self.dim;
        let m = other.dim;
        let nm = n * m;
        let mut entries = vec![ZERO; nm * nm];
        for ia in 0..n {
            for ja in 0..n {
                let a = self.entries[ia * n + ja];
                if a == ZERO {
                    continue;
                }
                for ib in 0..m {
                    for jb in 0..m {
                        entries[(ia * m + ib) * nm + (ja * m + jb)] =
                            a * other.entries[ib * m + jb];
                    }
                }
            }
        }
        Operator { dim: nm, entries, hermitian: self.hermitian && other.hermitian }
    }
}

/// A validated unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    op: Operator,
}

impl Unitary {
    pub fn new(op: Operator) -> Result<Self> {
        let dev = unitary_deviation(&op);
        if dev > EPS_UNIT {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self { op })
    }

    pub fn identity(dim: usize) -> Self {
        Self { op: Operator::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector { amps: self.op.apply_raw(v.amps()) }
    }

    pub fn apply_raw(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.op.apply_raw(v)
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary { op: self.op.adjoint() }
    }

    pub fn mul(&self, rhs: &Unitary) -> Result<Unitary> {
        Ok(Unitary { op: self.op.mul(&rhs.op)? })
    }
}

/// Largest entry magnitude of `U^dagger U - I`.
pub fn unitary_deviation(op: &Operator) -> f64 {
    let n = op.dim();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += op.get(k, i).conj() * op.get(k, j);
            }
            let expect = if i == j { ONE } else { ZERO };
            dev = dev.max((acc - expect).norm());
        }
    }
    dev
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues are returned ascending; each eigenvector is phase-fixed so its
/// largest-magnitude component is real and positive, which makes the output
/// deterministic for golden tests.
pub fn eigensystem(h: &Operator) -> Result<Eigensystem> {
    h.require_hermitian()?;
    let n = h.dim();
    let mut a = h.entries().to_vec();
    // symmetrize round-off so diagonals are exactly real
    for i in 0..n {
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
            a[i * n + j] = avg;
            a[j * n + i] = avg.conj();
        }
    }
    let mut q = Operator::identity(n).entries().to_vec();

    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let stop = 1e-15 * scale;

    let mut converged = false;
    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[i * n + j].norm());
            }
        }
        if off <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for qi in (p + 1)..n {
                let apq = a[p * n + qi];
                let beta = apq.norm();
                if beta <= stop * 1e-2 {
                    continue;
                }
                let phase = apq / beta; // e^{i theta}
                let app = a[p * n + p].re;
                let aqq = a[qi * n + qi].re;
                let zeta = (app - aqq) / (2.0 * beta);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // V: identity except V[p][p]=c, V[p][q]=-s*phase, V[q][p]=s*conj(phase), V[q][q]=c
                let vpq = -phase * s;
                let vqp = phase.conj() * s;
                // columns: A <- A V
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + qi];
                    a[r * n + p] = arp * c + arq * vqp;
                    a[r * n + qi] = arp * vpq + arq * c;
                }
                // rows: A <- V^dagger A
                for cidx in 0..n {
                    let apc = a[p * n + cidx];
                    let aqc = a[qi * n + cidx];
                    a[p * n + cidx] = apc * c + aqc * vqp.conj();
                    a[qi * n + cidx] = apc * vpq.conj() + aqc * c;
                }
                // accumulate eigenvectors: Q <- Q V
                for r in 0..n {
                    let qrp = q[r * n + p];
                    let qrq = q[r * n + qi];
                    q[r * n + p] = qrp * c + qrq * vqp;
                    q[r * n + qi] = qrp * vpq + qrq * c;
                }
                a[p * n + qi] = ZERO;
                a[qi * n + p] = ZERO;
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[qi * n + qi] = Complex64::new(a[qi * n + qi].re, 0.0);
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[i * n + j].norm());
            }
        }
        if off > EPS_EIG * scale {
            return Err(Error::EigenConvergence);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i].re.partial_cmp(&a[j * n + j].re).unwrap_or(core::cmp::Ordering::Equal)
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &k in &order {
        values.push(a[k * n + k].re);
        let mut col: Vec<Complex64> = (0..n).map(|r| q[r * n + k]).collect();
        // phase convention: largest-magnitude component real positive
        let mut imax = 0;
        let mut best = 0.0;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm();
            if m > best + 1e-15 {
                best = m;
                imax = i;
            }
        }
        if best > 0.0 {
            let phase = col[imax] / best;
            for z in &mut col {
                *z *= phase.conj();
            }
            col[imax] = Complex64::new(col[imax].re, 0.0);
        }
        vectors.push(StateVector::normalized(col).expect("jacobi columns have unit norm"));
    }
    Ok(Eigensystem { values, vectors })
}

/// `exp(-i H dt)` for Hermitian `H`, built from the eigendecomposition.
pub fn propagator(h: &Operator, dt: f64) -> Result<Unitary> {
    let eig = eigensystem(h)?;
    let n = h.dim();
    let mut entries = vec![ZERO; n * n];
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        let phase = Complex64::new(0.0, -lambda * dt).exp();
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] += phase * v.amps()[i] * v.amps()[j].conj();
            }
        }
    }
    Unitary::new(Operator::new(n, entries)?)
}

/// Completes `first` into an orthonormal basis by Gram-Schmidt against the
/// computational basis. Deterministic for a given input.
pub fn complete_basis(first: &StateVector) -> Vec<StateVector> {
    let n = first.dim();
    let mut basis: Vec<Vec<Complex64>> = alloc::vec![first.amps().to_vec()];
    let mut k = 0;
    while basis.len() < n && k < n {
        let mut v = vec![ZERO; n];
        v[k] = ONE;
        for b in &basis {
            let coeff = inner(b, &v);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= coeff * bi;
            }
        }
        let norm = norm_sq(&v).sqrt();
        if norm > 1e-6 {
            for z in &mut v {
                *z /= norm;
            }
            basis.push(v);
        }
        k += 1;
    }
    basis
        .into_iter()
        .map(|v| StateVector::normalized(v).expect("orthonormalized vector"))
        .collect()
}
