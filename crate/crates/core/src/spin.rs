//! The symmetric Dicke basis and the collective angular-momentum operators.
//!
//! States `|j,m>` with `j = N/2` span the `(N+1)`-dimensional symmetric
//! sector. Rows are ordered ascending in `m` (row 0 is `m = -j`), which fixes
//! the sign and phase conventions of every matrix built downstream.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{hermiticity_asymmetry, max_abs_entry, symmetrize, C64, CMatrix, CVector};

/// A half-integer stored exactly as twice its value.
///
/// Keeps `m` bookkeeping out of floating point: for even `N` the ladder holds
/// integers, for odd `N` proper half-integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Nearest representable half-integer (used by error messages only).
    pub fn try_from_f64(x: f64) -> Option<Self> {
        let twice = (2.0 * x).round();
        if (2.0 * x - twice).abs() < 1e-9 {
            Some(Self(twice as i32))
        } else {
            None
        }
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}", self.0 as f64 / 2.0)
        }
    }
}

/// The symmetric `(N+1)`-dimensional collective-spin space, `j = N/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DickeBasis {
    n_atoms: usize,
}

impl DickeBasis {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidAtomCount { n_atoms, reason: "need at least one atom" });
        }
        Ok(Self { n_atoms })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    /// `m` for a given row, row 0 holding `m = -j`.
    pub fn m_of_row(&self, row: usize) -> HalfInteger {
        HalfInteger::from_twice(2 * row as i32 - self.n_atoms as i32)
    }

    /// Row index of a ladder value, rejecting anything off the `-j..j` lattice.
    pub fn row_of_m(&self, m: HalfInteger) -> Result<usize> {
        let twice_j = self.n_atoms as i32;
        let off_lattice = (m.twice() + twice_j) % 2 != 0;
        if off_lattice || m.twice() < -twice_j || m.twice() > twice_j {
            return Err(Error::InvalidDickeIndex { m: m.value(), j: self.j() });
        }
        Ok(((m.twice() + twice_j) / 2) as usize)
    }

    /// All `m` values ascending.
    pub fn m_values(&self) -> impl Iterator<Item = HalfInteger> + '_ {
        (0..self.dim()).map(|row| self.m_of_row(row))
    }
}

/// Which collective operator to materialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collective {
    JPlus,
    JMinus,
    Jz,
    JSquared,
}

/// Dense matrix of a collective operator on the Dicke basis.
///
/// `<j,m+1|J+|j,m> = sqrt((j+m+1)(j-m))`, `J- = (J+)^dagger`, `J_z` diagonal
/// in `m`, and `J^2 = j(j+1) I` on the fixed-`j` sector.
pub fn op_collective(basis: &DickeBasis, which: Collective) -> CMatrix {
    let dim = basis.dim();
    let j = basis.j();
    let mut m = CMatrix::zeros(dim, dim);
    match which {
        Collective::JPlus => {
            for row in 0..dim - 1 {
                let mv = basis.m_of_row(row).value();
                m[(row + 1, row)] = C64::new(((j + mv + 1.0) * (j - mv)).sqrt(), 0.0);
            }
        }
        Collective::JMinus => {
            for row in 1..dim {
                let mv = basis.m_of_row(row).value();
                m[(row - 1, row)] = C64::new(((j - mv + 1.0) * (j + mv)).sqrt(), 0.0);
            }
        }
        Collective::Jz => {
            for row in 0..dim {
                m[(row, row)] = C64::new(basis.m_of_row(row).value(), 0.0);
            }
        }
        Collective::JSquared => {
            let val = C64::new(j * (j + 1.0), 0.0);
            for row in 0..dim {
                m[(row, row)] = val;
            }
        }
    }
    m
}

/// Anything we can take operator expectations over.
pub trait QuantumState {
    fn basis(&self) -> &DickeBasis;
    fn expectation(&self, op: &CMatrix) -> Result<C64>;
}

/// Normalized pure state on the Dicke basis.
#[derive(Debug, Clone)]
pub struct PureState {
    basis: DickeBasis,
    amplitudes: CVector,
}

impl PureState {
    /// Wrap amplitudes, requiring unit norm within 1e-10.
    pub fn new(basis: DickeBasis, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { left: basis.dim(), right: amplitudes.len() });
        }
        let deviation = (amplitudes.norm() - 1.0).abs();
        if deviation > 1e-10 {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Equal-weight superposition of a list of `(m, amplitude)` pairs,
    /// normalized on construction.
    pub fn from_components(basis: DickeBasis, parts: &[(HalfInteger, C64)]) -> Result<Self> {
        let mut v = CVector::zeros(basis.dim());
        for &(m, a) in parts {
            v[basis.row_of_m(m)?] += a;
        }
        let n = v.norm();
        if n < 1e-14 {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        v /= C64::new(n, 0.0);
        Ok(Self { basis, amplitudes: v })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude_at(&self, m: HalfInteger) -> Result<C64> {
        Ok(self.amplitudes[self.basis.row_of_m(m)?])
    }

    /// `|rho> = |psi><psi|`.
    pub fn density_matrix(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { basis: self.basis.clone(), matrix: m }
    }
}

impl QuantumState for PureState {
    fn basis(&self) -> &DickeBasis {
        &self.basis
    }

    fn expectation(&self, op: &CMatrix) -> Result<C64> {
        if op.nrows() != self.basis.dim() || op.ncols() != self.basis.dim() {
            return Err(Error::DimensionMismatch { left: self.basis.dim(), right: op.nrows() });
        }
        Ok(self.amplitudes.dotc(&(op * &self.amplitudes)))
    }
}

/// Hermitian, unit-trace density matrix on the Dicke basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: DickeBasis,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Wrap a matrix, requiring Hermiticity within 1e-10 and unit trace within
    /// 1e-8. Positivity is not checked here (it costs a diagonalization); use
    /// [`DensityMatrix::min_eigenvalue`] where it matters.
    pub fn new(basis: DickeBasis, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch { left: basis.dim(), right: matrix.nrows() });
        }
        let asym = hermiticity_asymmetry(&matrix);
        if asym > 1e-10 {
            return Err(Error::NotHermitian { max_asymmetry: asym, tol: 1e-10 });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-8 {
            return Err(Error::BadTrace { trace: trace.re, tol: 1e-8 });
        }
        Ok(Self { basis, matrix: symmetrize(&matrix) })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace_error(&self) -> f64 {
        (self.matrix.trace().re - 1.0).abs()
    }

    /// Smallest eigenvalue; physical states satisfy `>= -1e-8` up to numerics.
    pub fn min_eigenvalue(&self) -> f64 {
        let es = crate::numerics::hermitian_eigensystem(&self.matrix)
            .expect("density matrix is Hermitian by construction");
        es.eigenvalues[0]
    }

    /// Largest entry difference against another density matrix.
    pub fn max_entry_distance(&self, other: &DensityMatrix) -> f64 {
        max_abs_entry(&(&self.matrix - &other.matrix))
    }
}

impl QuantumState for DensityMatrix {
    fn basis(&self) -> &DickeBasis {
        &self.basis
    }

    fn expectation(&self, op: &CMatrix) -> Result<C64> {
        if op.nrows() != self.basis.dim() || op.ncols() != self.basis.dim() {
            return Err(Error::DimensionMismatch { left: self.basis.dim(), right: op.nrows() });
        }
        Ok((op * &self.matrix).trace())
    }
}

/// The basis vector `|j,m>`.
pub fn dicke_state(basis: &DickeBasis, m: HalfInteger) -> Result<PureState> {
    let row = basis.row_of_m(m)?;
    let mut v = CVector::zeros(basis.dim());
    v[row] = C64::new(1.0, 0.0);
    Ok(PureState { basis: basis.clone(), amplitudes: v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn half(twice: i32) -> HalfInteger {
        HalfInteger::from_twice(twice)
    }

    #[test]
    fn basis_dimensions_and_m_sequence() {
        let b = DickeBasis::new(5).unwrap();
        assert_eq!(b.dim(), 6);
        assert_abs_diff_eq!(b.j(), 2.5);
        let ms: Vec<f64> = b.m_values().map(|m| m.value()).collect();
        assert_eq!(ms, vec![-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]);
    }

    #[test]
    fn ladder_action_n2() {
        // J+|1,-1> = sqrt(2)|1,0>, J+|1,0> = sqrt(2)|1,1>
        let b = DickeBasis::new(2).unwrap();
        let jp = op_collective(&b, Collective::JPlus);
        let s = 2.0_f64.sqrt();
        assert_abs_diff_eq!(jp[(1, 0)].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(jp[(2, 1)].re, s, epsilon = 1e-15);
        // J_z|1,0> = 0
        let jz = op_collective(&b, Collective::Jz);
        assert_eq!(jz[(1, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn j_squared_is_fixed_sector_identity() {
        for n in [1, 2, 3, 7, 12] {
            let b = DickeBasis::new(n).unwrap();
            let j2 = op_collective(&b, Collective::JSquared);
            let j = b.j();
            let want = CMatrix::identity(b.dim(), b.dim()).scale(j * (j + 1.0));
            assert!(max_abs_entry(&(j2 - want)) < 1e-12);
        }
    }

    #[test]
    fn commutation_relations() {
        for n in [2, 3, 6, 11] {
            let b = DickeBasis::new(n).unwrap();
            let jp = op_collective(&b, Collective::JPlus);
            let jm = op_collective(&b, Collective::JMinus);
            let jz = op_collective(&b, Collective::Jz);
            let comm_pm = &jp * &jm - &jm * &jp;
            assert!(max_abs_entry(&(comm_pm - jz.scale(2.0))) < 1e-12, "[J+,J-] = 2Jz at N={n}");
            let comm_zp = &jz * &jp - &jp * &jz;
            assert!(max_abs_entry(&(comm_zp - &jp)) < 1e-12, "[Jz,J+] = J+ at N={n}");
            let comm_zm = &jz * &jm - &jm * &jz;
            assert!(max_abs_entry(&(comm_zm + &jm)) < 1e-12, "[Jz,J-] = -J- at N={n}");
        }
    }

    #[test]
    fn jplus_is_adjoint_of_jminus_exactly() {
        let b = DickeBasis::new(9).unwrap();
        let jp = op_collective(&b, Collective::JPlus);
        let jm = op_collective(&b, Collective::JMinus);
        assert_eq!(jp, jm.adjoint());
    }

    #[test]
    fn dicke_state_construction_and_range_errors() {
        let b = DickeBasis::new(2).unwrap();
        let top = dicke_state(&b, half(2)).unwrap();
        assert_abs_diff_eq!(top.amplitudes()[2].re, 1.0);

        let b4 = DickeBasis::new(4).unwrap();
        let ground = dicke_state(&b4, half(-4)).unwrap();
        assert_abs_diff_eq!(ground.amplitudes()[0].re, 1.0);

        // m = 1.5 is off the integer lattice of N = 2
        assert!(matches!(dicke_state(&b, half(3)), Err(Error::InvalidDickeIndex { .. })));
        // out of range
        assert!(matches!(dicke_state(&b, half(4)), Err(Error::InvalidDickeIndex { .. })));
    }

    #[test]
    fn expectations_on_dicke_states() {
        let b = DickeBasis::new(6).unwrap();
        let jz = op_collective(&b, Collective::Jz);
        let jp = op_collective(&b, Collective::JPlus);
        let jm = op_collective(&b, Collective::JMinus);
        let num = &jp * &jm;

        for m in b.m_values() {
            let s = dicke_state(&b, m).unwrap();
            assert_abs_diff_eq!(s.expectation(&jz).unwrap().re, m.value(), epsilon = 1e-12);
        }
        // annihilated ground state
        let g = dicke_state(&b, half(-6)).unwrap();
        assert_abs_diff_eq!(g.expectation(&num).unwrap().re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn equal_superposition_number_expectation() {
        // (|j,0> + |j,1>)/sqrt(2) at N=2: <J+J-> = j(j+1) = 2
        let b = DickeBasis::new(2).unwrap();
        let one = C64::new(1.0, 0.0);
        let psi = PureState::from_components(b.clone(), &[(half(0), one), (half(2), one)]).unwrap();
        let jp = op_collective(&b, Collective::JPlus);
        let jm = op_collective(&b, Collective::JMinus);
        let got = psi.expectation(&(&jp * &jm)).unwrap();
        assert_abs_diff_eq!(got.re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn normal_order_vanishes_on_ground_state() {
        // <j,-j| (J+)^k (J-)^k |j,-j> = 0 for k >= 1
        let b = DickeBasis::new(8).unwrap();
        let jp = op_collective(&b, Collective::JPlus);
        let jm = op_collective(&b, Collective::JMinus);
        let g = dicke_state(&b, half(-8)).unwrap();
        let mut op = CMatrix::identity(b.dim(), b.dim());
        for k in 1..=4 {
            op = &jp * op * &jm;
            let val = g.expectation(&op).unwrap();
            assert!(val.norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn number_operator_eigenvalues() {
        // J+J-|j,m> = (j+m)(j-m+1)|j,m>
        for n in [2, 5, 10] {
            let b = DickeBasis::new(n).unwrap();
            let jp = op_collective(&b, Collective::JPlus);
            let jm = op_collective(&b, Collective::JMinus);
            let num = &jp * &jm;
            let j = b.j();
            for m in b.m_values() {
                let mv = m.value();
                let s = dicke_state(&b, m).unwrap();
                let want = (j + mv) * (j - mv + 1.0);
                assert_abs_diff_eq!(s.expectation(&num).unwrap().re, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn density_matrix_validation() {
        let b = DickeBasis::new(2).unwrap();
        let rho = dicke_state(&b, half(0)).unwrap().density_matrix();
        assert!(rho.trace_error() < 1e-14);
        assert!(rho.min_eigenvalue() > -1e-12);

        let bad = CMatrix::identity(3, 3); // trace 3
        assert!(matches!(DensityMatrix::new(b, bad), Err(Error::BadTrace { .. })));
    }

    #[test]
    fn unnormalized_amplitudes_rejected() {
        let b = DickeBasis::new(2).unwrap();
        let v = CVector::from_vec(vec![C64::new(1.0, 0.0); 3]);
        assert!(matches!(PureState::new(b, v), Err(Error::NotNormalized { .. })));
    }
}
