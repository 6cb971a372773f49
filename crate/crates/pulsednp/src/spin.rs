//! Dense complex matrix algebra and spin-1/2 operator construction.
//!
//! Everything here works on [`CMat`] (a dense `nalgebra` matrix of
//! `Complex64`) for Hilbert spaces up to dimension 64, i.e. an electron
//! plus at most five spin-1/2 nuclei. Propagators are built from exact
//! Hermitian eigendecompositions; single-spin segments take a closed-form
//! SU(2) fast path because trajectory sampling calls them millions of
//! times.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix carrying operators, propagators and density
/// matrices.
pub type CMat = DMatrix<Complex64>;

/// Largest supported Hilbert-space dimension (electron + 5 nuclei).
pub const MAX_DIM: usize = 64;

/// Relative tolerance for Hermiticity and unitarity gates.
pub const OPERATOR_TOL: f64 = 1e-10;

pub(crate) const IM: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum SpinError {
    #[error("matrix is not Hermitian: max|H - H^dag| = {defect:.3e} (relative tol {tol:.1e})")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("matrix is not unitary: max|U^dag U - 1| = {defect:.3e} (tol {tol:.1e})")]
    NotUnitary { defect: f64, tol: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("site {site} out of range for {n_spins} spins")]
    SiteOutOfRange { site: usize, n_spins: usize },
    #[error("Hilbert dimension 2^{n_spins} exceeds the supported maximum {MAX_DIM}")]
    DimensionOverflow { n_spins: usize },
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Identity matrix of the given dimension.
pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Largest entry magnitude, `max_ij |m_ij|`.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Entrywise distance `max_ij |a_ij - b_ij|`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

/// `max|M - M^dag|`, the Hermiticity defect.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `max|U^dag U - 1|`, the unitarity defect.
pub fn unitarity_defect(u: &CMat) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

/// Commutator `[a, b] = ab - ba`.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Single-site spin-1/2 operators.
///
/// `sx`, `sy`, `sz` are the Cartesian components, `sp`/`sm` the ladder
/// operators `S_x +- i S_y`. Basis order is `|up> = e_0`, `|down> = e_1`.
pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(0.5), c(0.5), c(0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), -0.5 * IM, 0.5 * IM, c(0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)])
}

pub fn raising() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
}

pub fn lowering() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)])
}

/// Per-site spin operators embedded in the full `2^n_spins` space.
#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    n_spins: usize,
    sx: Vec<CMat>,
    sy: Vec<CMat>,
    sz: Vec<CMat>,
    sp: Vec<CMat>,
    sm: Vec<CMat>,
}

impl SpinOperatorSet {
    /// Build all per-site operators for `n_spins` spin-1/2 sites.
    pub fn new(n_spins: usize) -> Result<Self, SpinError> {
        if n_spins == 0 || (1usize << n_spins) > MAX_DIM {
            return Err(SpinError::DimensionOverflow { n_spins });
        }
        let mut sx = Vec::with_capacity(n_spins);
        let mut sy = Vec::with_capacity(n_spins);
        let mut sz = Vec::with_capacity(n_spins);
        let mut sp = Vec::with_capacity(n_spins);
        let mut sm = Vec::with_capacity(n_spins);
        for site in 0..n_spins {
            sx.push(embed(&pauli_x(), site, n_spins)?);
            sy.push(embed(&pauli_y(), site, n_spins)?);
            sz.push(embed(&pauli_z(), site, n_spins)?);
            sp.push(embed(&raising(), site, n_spins)?);
            sm.push(embed(&lowering(), site, n_spins)?);
        }
        Ok(Self { n_spins, sx, sy, sz, sp, sm })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn sx(&self, site: usize) -> &CMat {
        &self.sx[site]
    }

    pub fn sy(&self, site: usize) -> &CMat {
        &self.sy[site]
    }

    pub fn sz(&self, site: usize) -> &CMat {
        &self.sz[site]
    }

    pub fn sp(&self, site: usize) -> &CMat {
        &self.sp[site]
    }

    pub fn sm(&self, site: usize) -> &CMat {
        &self.sm[site]
    }
}

/// Single spin-1/2 operator set (`S_x = 1/2 sigma_x`, ...).
pub fn pauli_ops() -> SpinOperatorSet {
    SpinOperatorSet::new(1).expect("single spin always fits")
}

/// Embed a 2x2 single-site operator at `site` in an `n_spins` register,
/// acting as identity on every other site.
pub fn embed(op: &CMat, site: usize, n_spins: usize) -> Result<CMat, SpinError> {
    if op.nrows() != 2 || op.ncols() != 2 {
        return Err(SpinError::DimMismatch { left: op.nrows(), right: 2 });
    }
    if site >= n_spins {
        return Err(SpinError::SiteOutOfRange { site, n_spins });
    }
    if (1usize << n_spins) > MAX_DIM {
        return Err(SpinError::DimensionOverflow { n_spins });
    }
    let left = identity(1 << site);
    let right = identity(1 << (n_spins - site - 1));
    Ok(left.kronecker(op).kronecker(&right))
}

/// Propagator `U = exp(-i H t)` of a Hermitian generator.
///
/// 2x2 inputs take the closed-form SU(2) rotation; larger matrices go
/// through an eigendecomposition, which is exact and stable for the
/// dimensions used here.
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat, SpinError> {
    let dim = h.nrows();
    if dim != h.ncols() {
        return Err(SpinError::DimMismatch { left: dim, right: h.ncols() });
    }
    let defect = hermiticity_defect(h);
    let scale = max_abs(h).max(1.0);
    if defect > OPERATOR_TOL * scale {
        return Err(SpinError::NotHermitian { defect: defect / scale, tol: OPERATOR_TOL });
    }
    if dim == 2 {
        return Ok(expm_su2(h, t));
    }
    let eig = h.clone().symmetric_eigen();
    let phases: Vec<Complex64> =
        eig.eigenvalues.iter().map(|&w| (-IM * c(w * t)).exp()).collect();
    let mut scaled = eig.eigenvectors.clone();
    for (j, phase) in phases.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0);
        for i in 0..dim {
            scaled[(i, j)] *= *phase;
        }
    }
    Ok(scaled * eig.eigenvectors.adjoint())
}

/// Closed-form `exp(-i H t)` for a 2x2 Hermitian `H`.
fn expm_su2(h: &CMat, t: f64) -> CMat {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)];
    // H = c0 + vx sx + vy sy + vz sz in Pauli components
    let c0 = 0.5 * (a + d);
    let vz = 0.5 * (a - d);
    let vx = b.re;
    let vy = -b.im;
    let v = (vx * vx + vy * vy + vz * vz).sqrt();
    let phase = (-IM * c(c0 * t)).exp();
    if v == 0.0 {
        return identity(2) * phase;
    }
    let (s, co) = (v * t).sin_cos();
    let f = -IM * c(s / v);
    let mut u = CMat::zeros(2, 2);
    u[(0, 0)] = c(co) + f * c(vz);
    u[(1, 1)] = c(co) - f * c(vz);
    u[(0, 1)] = f * Complex64::new(vx, -vy);
    u[(1, 0)] = f * Complex64::new(vx, vy);
    u * phase
}

/// Frame transformation `U^dag op U`.
pub fn conjugate(op: &CMat, u: &CMat) -> Result<CMat, SpinError> {
    if op.nrows() != u.nrows() || op.ncols() != u.ncols() {
        return Err(SpinError::DimMismatch { left: op.nrows(), right: u.nrows() });
    }
    let defect = unitarity_defect(u);
    if defect > OPERATOR_TOL {
        return Err(SpinError::NotUnitary { defect, tol: OPERATOR_TOL });
    }
    Ok(u.adjoint() * op * u)
}

/// Partial trace over the first tensor factor of dimension `d0`.
///
/// `rho` acts on `C^{d0} (x) C^{d1}`; the result acts on `C^{d1}`.
pub fn trace_out_first(rho: &CMat, d0: usize) -> Result<CMat, SpinError> {
    let dim = rho.nrows();
    if dim % d0 != 0 || dim != rho.ncols() {
        return Err(SpinError::DimMismatch { left: dim, right: d0 });
    }
    let d1 = dim / d0;
    let mut out = CMat::zeros(d1, d1);
    for i in 0..d1 {
        for j in 0..d1 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d0 {
                acc += rho[(k * d1 + i, k * d1 + j)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Real part of `Tr(a b)`, the expectation pairing for Hermitian observables.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let z = a[(i, k)] * b[(k, i)];
            acc += z.re;
        }
    }
    acc
}
