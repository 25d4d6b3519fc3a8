//! Dense complex linear algebra and time integration.
//!
//! Everything here is dimension-agnostic plumbing: Hermitian eigendecomposition,
//! unitary propagation through the spectral form of `exp(-iHt)`, and fixed-step
//! RK4 integration of master equations on the vectorized density matrix.
//! Dimensions stay small (a few hundred at most), so exact spectral methods are
//! preferred over series expansions throughout.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance on `M = M^dagger` for inputs claimed Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Largest `|M_ij - conj(M_ji)|` over all entry pairs.
pub fn hermiticity_asymmetry(m: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for k in i..m.ncols() {
            let d = (m[(i, k)] - m[(k, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Largest entry modulus; used as a cheap matrix scale estimate.
pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(m + m^dagger) / 2`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Column-stacked vectorization of a matrix.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for a `dim x dim` matrix.
pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

fn check_square_hermitian(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let asym = hermiticity_asymmetry(m);
    if asym > HERMITICITY_TOL {
        return Err(Error::NotHermitian { max_asymmetry: asym, tol: HERMITICITY_TOL });
    }
    Ok(())
}

/// Full spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, column k belonging to `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    /// Rebuild `V diag(lambda) V^dagger`; tests compare this against the input.
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.eigenvalues.len();
        let lambda = CMatrix::from_diagonal(&CVector::from_iterator(
            dim,
            self.eigenvalues.iter().map(|&x| C64::new(x, 0.0)),
        ));
        &self.eigenvectors * lambda * self.eigenvectors.adjoint()
    }
}

/// Index of the first component with modulus above 1e-8, or the vector length.
fn first_significant(col: &CVector) -> usize {
    col.iter().position(|z| z.norm() > 1e-8).unwrap_or(col.len())
}

/// Diagonalize a Hermitian matrix.
///
/// Eigenvalues come out ascending. Output is deterministic for identical input:
/// ties are ordered by the position of each eigenvector's first significant
/// component, and every eigenvector's phase is fixed so that its first
/// significant component is real and positive.
pub fn hermitian_eigensystem(m: &CMatrix) -> Result<EigenSystem> {
    check_square_hermitian(m)?;
    let dim = m.nrows();
    let se = m.clone().symmetric_eigen();

    let scale = se.eigenvalues.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (se.eigenvalues[a], se.eigenvalues[b]);
        if (va - vb).abs() <= 1e-12 * scale {
            let fa = first_significant(&se.eigenvectors.column(a).into_owned());
            let fb = first_significant(&se.eigenvectors.column(b).into_owned());
            fa.cmp(&fb).then(a.cmp(&b))
        } else {
            va.partial_cmp(&vb).unwrap()
        }
    });

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    for (k, &src) in order.iter().enumerate() {
        eigenvalues.push(se.eigenvalues[src]);
        let mut col = se.eigenvectors.column(src).into_owned();
        let lead = first_significant(&col);
        if lead < dim {
            let z = col[lead];
            if z.norm() > 0.0 {
                col.scale_mut(1.0 / z.norm());
                let phase = z.conj() / z.norm();
                col *= phase;
                // renormalize after the phase rotation
                let n = col.norm();
                col /= C64::new(n, 0.0);
            }
        }
        eigenvectors.set_column(k, &col);
    }
    Ok(EigenSystem { eigenvalues, eigenvectors })
}

/// Cached spectral form of `exp(-iHt)` for one Hamiltonian, reused across many
/// evolution times.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    eigen: EigenSystem,
}

impl SpectralPropagator {
    pub fn new(hamiltonian: &CMatrix) -> Result<Self> {
        Ok(Self { eigen: hermitian_eigensystem(hamiltonian)? })
    }

    pub fn dim(&self) -> usize {
        self.eigen.eigenvalues.len()
    }

    /// `exp(-iHt) psi` without renormalizing the input.
    pub fn evolve(&self, psi: &CVector, t: f64) -> Result<CVector> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: psi.len() });
        }
        let mut w = self.eigen.eigenvectors.adjoint() * psi;
        for (k, a) in w.iter_mut().enumerate() {
            *a *= C64::from_polar(1.0, -self.eigen.eigenvalues[k] * t);
        }
        Ok(&self.eigen.eigenvectors * w)
    }
}

/// Propagate a normalized state with `exp(-iHt)` built from the spectral
/// decomposition of `h`.
pub fn evolve_state(h: &CMatrix, psi: &CVector, t: f64) -> Result<CVector> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { deviation: (norm - 1.0).abs() });
    }
    SpectralPropagator::new(h)?.evolve(psi, t)
}

/// Default master-equation step: `1e-3 * min(1/gamma, 1/max|H|)`, guarding the
/// rate-free and drive-free limits.
pub fn default_master_dt(gamma: f64, h_max: f64) -> f64 {
    let a = if gamma > 0.0 { 1.0 / gamma } else { f64::INFINITY };
    let b = if h_max > 0.0 { 1.0 / h_max } else { f64::INFINITY };
    let t = a.min(b);
    if t.is_finite() {
        1e-3 * t
    } else {
        1e-3
    }
}

/// Fixed-step RK4 for `d rho/dt = rhs(rho, t)` up to `t_end`.
///
/// Hermiticity is enforced by symmetrization after every step. A trace drift
/// beyond 1e-6 aborts with an instability error; the last partial step is
/// shortened so the endpoint is hit exactly.
pub fn integrate_master<F>(rhs: F, rho0: &CMatrix, t_end: f64, dt: f64) -> Result<CMatrix>
where
    F: Fn(&CMatrix, f64) -> CMatrix,
{
    if dt <= 0.0 || t_end < 0.0 {
        return Err(Error::DimensionMismatch { left: 0, right: 0 });
    }
    let trace0 = rho0.trace();
    if (trace0.re - 1.0).abs() > 1e-10 || trace0.im.abs() > 1e-10 {
        return Err(Error::BadTrace { trace: trace0.re, tol: 1e-10 });
    }
    let mut rho = rho0.clone();
    let mut t = 0.0_f64;
    while t < t_end {
        let step = dt.min(t_end - t);
        rho = rk4_step(&rhs, &rho, t, step);
        rho = symmetrize(&rho);
        t += step;
        let drift = (rho.trace().re - 1.0).abs();
        if drift > 1e-6 {
            return Err(Error::IntegrationInstability { drift, t, dt });
        }
    }
    Ok(rho)
}

/// One classical RK4 step; shared by the public integrator and by internal
/// propagation of non-unit-trace regression operators.
pub(crate) fn rk4_step<F>(rhs: &F, rho: &CMatrix, t: f64, dt: f64) -> CMatrix
where
    F: Fn(&CMatrix, f64) -> CMatrix,
{
    let k1 = rhs(rho, t);
    let k2 = rhs(&(rho + k1.scale(dt / 2.0)), t + dt / 2.0);
    let k3 = rhs(&(rho + k2.scale(dt / 2.0)), t + dt / 2.0);
    let k4 = rhs(&(rho + k3.scale(dt)), t + dt);
    rho + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0)
}

/// The linear map one RK4 step applies to a vectorized state when the
/// generator is time independent: `I + z + z^2/2 + z^3/6 + z^4/24` with
/// `z = dt L`.
pub fn rk4_step_matrix(generator: &CMatrix, dt: f64) -> CMatrix {
    let dim = generator.nrows();
    let z = generator.scale(dt);
    let mut acc = CMatrix::identity(dim, dim);
    // Horner form of the degree-4 Taylor polynomial
    for k in (1..=4).rev() {
        acc = CMatrix::identity(dim, dim) + (&z * acc).scale(1.0 / k as f64);
    }
    acc
}
