//! Physical parameters, the effective and driven Hamiltonians, the spectrum
//! and ground-state phase map, and the full Fock-space oracle.
//!
//! The photon-dressed effective model is diagonal on the Dicke basis with
//! eigenenergies
//!
//! ```text
//! omega_m = -W [ (m - n_a)^2 - n_a^2 - j(j+1) ],    W = g0^2 / (N Delta),
//! ```
//!
//! where the average photon number `n_a` enters as a classical parameter: the
//! photon number is conserved by both the undriven and the driven model, so
//! there is no back-action on the field. A weak resonant drive adds
//! `Omega (J+ + J-)`.

use crate::error::{Error, Result};
use crate::numerics::{C64, CMatrix};
use crate::spin::{DickeBasis, HalfInteger};

/// Tolerance for "exactly at a level crossing" in units of photon number.
const CROSSING_TOL: f64 = 1e-9;

/// All physical parameters of one scenario.
///
/// Frequencies `omega_cavity`/`omega_atom` are carried for the full-Dicke
/// oracle only; the interaction-picture quantities depend solely on
/// `(W, n_a, Omega, gamma)`. The drive frequency is pinned to the resonance
/// condition `omega_d = omega_atom + W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    n_atoms: usize,
    g0: f64,
    delta_detuning: f64,
    omega_cavity: f64,
    n_a: f64,
    rabi: f64,
    gamma_decay: f64,
}

impl ModelParams {
    /// Start from the three quantities every scenario needs. Defaults:
    /// `n_a = 1/2` (`delta = 0`), no drive, no decay, `omega_cavity = 0`.
    pub fn builder(n_atoms: usize, g0: f64, delta_detuning: f64) -> ModelParamsBuilder {
        ModelParamsBuilder {
            n_atoms,
            g0,
            delta_detuning,
            omega_cavity: 0.0,
            n_a: 0.5,
            rabi: 0.0,
            gamma_decay: 0.0,
        }
    }

    /// Builder from the coupling ratio `g0/Delta` used by the bundled figure
    /// scenarios.
    pub fn from_ratio(n_atoms: usize, g0: f64, g0_over_delta: f64) -> Result<ModelParamsBuilder> {
        if g0_over_delta == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        Ok(Self::builder(n_atoms, g0, g0 / g0_over_delta))
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn delta_detuning(&self) -> f64 {
        self.delta_detuning
    }

    pub fn omega_cavity(&self) -> f64 {
        self.omega_cavity
    }

    pub fn omega_atom(&self) -> f64 {
        self.omega_cavity + self.delta_detuning
    }

    /// Effective interaction strength `W = g0^2 / (N Delta)`.
    pub fn coupling_w(&self) -> f64 {
        self.g0 * self.g0 / (self.n_atoms as f64 * self.delta_detuning)
    }

    pub fn n_a(&self) -> f64 {
        self.n_a
    }

    /// Deviation from the lowest critical point, `delta = n_a - 1/2`.
    pub fn delta(&self) -> f64 {
        self.n_a - 0.5
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    /// Drive frequency pinned by resonance, `omega_d = omega_A + W`.
    pub fn omega_drive(&self) -> f64 {
        self.omega_atom() + self.coupling_w()
    }

    pub fn gamma_decay(&self) -> f64 {
        self.gamma_decay
    }

    pub fn basis(&self) -> DickeBasis {
        DickeBasis::new(self.n_atoms).expect("n_atoms validated at construction")
    }

    /// Eigenenergy of the effective model at ladder value `m`.
    ///
    /// `m` is a plain real here: perturbative expressions evaluate gaps of the
    /// same polynomial at levels that may sit outside the physical ladder,
    /// always weighted by vanishing prefactors.
    pub fn omega_m(&self, m: f64) -> f64 {
        self.omega_m_at(m, self.n_a)
    }

    /// Same, with an explicit photon number (the full-Dicke oracle evaluates
    /// each dressed level at its own sector photon number).
    pub fn omega_m_at(&self, m: f64, n_a: f64) -> f64 {
        let j = self.j();
        -self.coupling_w() * ((m - n_a).powi(2) - n_a * n_a - j * (j + 1.0))
    }

    /// Drive matrix element `Omega_m = Omega sqrt((j-m+1)(j+m))` linking
    /// `m-1 <-> m`.
    pub fn drive_element(&self, m: f64) -> f64 {
        let j = self.j();
        self.rabi * ((j - m + 1.0) * (j + m)).sqrt()
    }
}

/// Builder for [`ModelParams`], validating on [`ModelParamsBuilder::build`].
#[derive(Debug, Clone)]
pub struct ModelParamsBuilder {
    n_atoms: usize,
    g0: f64,
    delta_detuning: f64,
    omega_cavity: f64,
    n_a: f64,
    rabi: f64,
    gamma_decay: f64,
}

impl ModelParamsBuilder {
    pub fn n_a(mut self, n_a: f64) -> Self {
        self.n_a = n_a;
        self
    }

    /// Set the photon number through its deviation `delta = n_a - 1/2`.
    pub fn delta(mut self, delta: f64) -> Self {
        self.n_a = 0.5 + delta;
        self
    }

    pub fn rabi(mut self, rabi: f64) -> Self {
        self.rabi = rabi;
        self
    }

    /// Drive given as `Omega N = r |W|`, the convention of the bundled figure
    /// scenarios.
    pub fn rabi_n_per_w(mut self, r: f64) -> Self {
        let w = self.g0 * self.g0 / (self.n_atoms as f64 * self.delta_detuning);
        self.rabi = r * w.abs() / self.n_atoms as f64;
        self
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma_decay = gamma;
        self
    }

    pub fn omega_cavity(mut self, omega: f64) -> Self {
        self.omega_cavity = omega;
        self
    }

    pub fn build(self) -> Result<ModelParams> {
        if self.n_atoms == 0 {
            return Err(Error::InvalidAtomCount {
                n_atoms: self.n_atoms,
                reason: "need at least one atom",
            });
        }
        if self.delta_detuning == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        if !(self.n_a >= 0.0) {
            return Err(Error::InvalidDickeIndex { m: self.n_a, j: self.n_atoms as f64 / 2.0 });
        }
        if self.rabi < 0.0 || self.gamma_decay < 0.0 {
            return Err(Error::InvalidAtomCount {
                n_atoms: self.n_atoms,
                reason: "rabi and gamma must be nonnegative",
            });
        }
        Ok(ModelParams {
            n_atoms: self.n_atoms,
            g0: self.g0,
            delta_detuning: self.delta_detuning,
            omega_cavity: self.omega_cavity,
            n_a: self.n_a,
            rabi: self.rabi,
            gamma_decay: self.gamma_decay,
        })
    }
}

/// `W = g0^2 / (N Delta)`.
pub fn coupling_w(g0: f64, delta_detuning: f64, n_atoms: usize) -> Result<f64> {
    if delta_detuning == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    if n_atoms == 0 {
        return Err(Error::InvalidAtomCount { n_atoms, reason: "need at least one atom" });
    }
    Ok(g0 * g0 / (n_atoms as f64 * delta_detuning))
}

/// The diagonal effective Hamiltonian `-W[(Jz - n_a)^2 - n_a^2 - J^2]`.
pub fn effective_hamiltonian(params: &ModelParams, basis: &DickeBasis) -> Result<CMatrix> {
    if basis.n_atoms() != params.n_atoms() {
        return Err(Error::DimensionMismatch { left: params.n_atoms(), right: basis.n_atoms() });
    }
    let dim = basis.dim();
    let mut h = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let m = basis.m_of_row(row).value();
        h[(row, row)] = C64::new(params.omega_m(m), 0.0);
    }
    Ok(h)
}

/// The rotating-frame driven Hamiltonian: effective part plus
/// `Omega (J+ + J-)`.
pub fn driven_hamiltonian(params: &ModelParams, basis: &DickeBasis) -> Result<CMatrix> {
    let mut h = effective_hamiltonian(params, basis)?;
    for row in 0..basis.dim() - 1 {
        // coupling m <-> m+1 carries Omega_{m+1}
        let m_upper = basis.m_of_row(row + 1).value();
        let elem = C64::new(params.drive_element(m_upper), 0.0);
        h[(row + 1, row)] += elem;
        h[(row, row + 1)] += elem;
    }
    Ok(h)
}

/// Spectrum of the undriven effective model together with the ground-state
/// assignment.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// `omega_m` ascending in `m` (row order of the basis).
    pub omega_m: Vec<f64>,
    /// Ground ladder index; two entries when the photon number sits on a
    /// crossing (reported as a tie rather than an arbitrary pick).
    pub ground_m: Vec<HalfInteger>,
    /// Level-crossing photon numbers `j - n/2`, descending.
    pub crossings: Vec<f64>,
}

/// Eigenenergies and the piecewise ground state of the undriven model.
///
/// For negative detuning the ground ladder index is the lattice value nearest
/// `n_a` until `n_a` reaches `j - 1/2`, beyond which the ensemble is fully
/// polarized at `m = j`. For positive detuning it is `m = -j` for any
/// `n_a > 0` and the double ground state `{-j, j}` exactly at `n_a = 0`.
pub fn spectrum(params: &ModelParams, basis: &DickeBasis) -> Result<SpectrumResult> {
    if basis.n_atoms() != params.n_atoms() {
        return Err(Error::DimensionMismatch { left: params.n_atoms(), right: basis.n_atoms() });
    }
    let omega_m: Vec<f64> =
        basis.m_values().map(|m| params.omega_m(m.value())).collect();
    let w = params.coupling_w();
    let n_a = params.n_a();
    let j = basis.j();
    let twice_j = basis.n_atoms() as i32;

    let ground_m: Vec<HalfInteger> = if w == 0.0 {
        // fully degenerate; every level is a ground state
        basis.m_values().collect()
    } else if w < 0.0 {
        // crossing tie: n_a within tolerance of j - n/2 for odd n
        let crossing_tie = crossing_pair(twice_j, n_a);
        if let Some(pair) = crossing_tie {
            pair
        } else if n_a > j - 0.5 {
            vec![HalfInteger::from_twice(twice_j)]
        } else {
            // nearest lattice value to n_a
            let row = (n_a + j).round() as i32;
            let row = row.clamp(0, twice_j);
            vec![HalfInteger::from_twice(2 * row - twice_j)]
        }
    } else if n_a.abs() <= CROSSING_TOL {
        vec![HalfInteger::from_twice(-twice_j), HalfInteger::from_twice(twice_j)]
    } else {
        vec![HalfInteger::from_twice(-twice_j)]
    };

    let crossings = critical_points(params.n_atoms()).unwrap_or_default();
    Ok(SpectrumResult { omega_m, ground_m, crossings })
}

/// The crossing pair `{j-(n+1)/2, j-(n-1)/2}` when `n_a` sits on `j - n/2`.
fn crossing_pair(twice_j: i32, n_a: f64) -> Option<Vec<HalfInteger>> {
    let mut n = 1;
    while n <= twice_j - 1 {
        let critical = (twice_j - n) as f64 / 2.0;
        if (n_a - critical).abs() <= CROSSING_TOL {
            return Some(vec![
                HalfInteger::from_twice(twice_j - n - 1),
                HalfInteger::from_twice(twice_j - n + 1),
            ]);
        }
        n += 2;
    }
    None
}

/// Level-crossing photon numbers `{j - n/2 : n = 1, 3, ..., 2j-1}`, descending.
pub fn critical_points(n_atoms: usize) -> Result<Vec<f64>> {
    if n_atoms < 2 {
        return Err(Error::NoCrossing { n_atoms });
    }
    let twice_j = n_atoms as i32;
    let mut out = Vec::new();
    let mut n = 1;
    while n <= twice_j - 1 {
        out.push((twice_j - n) as f64 / 2.0);
        n += 2;
    }
    Ok(out)
}

/// Flat index into the Fock (x) Dicke product space.
fn fock_dicke_index(n_photon: usize, row: usize, dicke_dim: usize) -> usize {
    n_photon * dicke_dim + row
}

/// The full Hamiltonian on `Fock (x) Dicke` under the rotating-wave
/// approximation: `omega a'a + omega_A Jz + (g0/sqrt(N)) (a' J- + a J+)`.
///
/// Validation oracle only; dimensions stay small.
pub fn full_dicke_hamiltonian(params: &ModelParams, photon_cutoff: usize) -> Result<CMatrix> {
    if (photon_cutoff as f64) < params.n_a() + 2.0 {
        return Err(Error::CutoffTooSmall {
            cutoff: photon_cutoff,
            reason: format!("need cutoff >= n_a + 2 with n_a = {}", params.n_a()),
        });
    }
    let basis = params.basis();
    let ddim = basis.dim();
    let dim = (photon_cutoff + 1) * ddim;
    let g = params.g0() / (params.n_atoms() as f64).sqrt();
    let mut h = CMatrix::zeros(dim, dim);

    for n in 0..=photon_cutoff {
        for row in 0..ddim {
            let m = basis.m_of_row(row).value();
            let i = fock_dicke_index(n, row, ddim);
            h[(i, i)] = C64::new(
                params.omega_cavity() * n as f64 + params.omega_atom() * m,
                0.0,
            );
            // a' J-: |n,m> -> |n+1, m-1>
            if n + 1 <= photon_cutoff && row >= 1 {
                let j = basis.j();
                let elem = g * ((n + 1) as f64).sqrt() * ((j - m + 1.0) * (j + m)).sqrt();
                let k = fock_dicke_index(n + 1, row - 1, ddim);
                h[(k, i)] += C64::new(elem, 0.0);
                h[(i, k)] += C64::new(elem, 0.0);
            }
        }
    }
    Ok(h)
}

/// Members of the conserved-excitation sector `a'a + Jz + j = k`, as
/// `(photon_number, dicke_row, flat_index)` tuples.
pub fn excitation_sector(n_atoms: usize, photon_cutoff: usize, k: usize) -> Vec<(usize, usize, usize)> {
    let ddim = n_atoms + 1;
    let mut out = Vec::new();
    for row in 0..ddim {
        if k >= row && k - row <= photon_cutoff {
            out.push((k - row, row, fock_dicke_index(k - row, row, ddim)));
        }
    }
    out
}

/// Per-sector outcome of the dispersive validation.
#[derive(Debug, Clone)]
pub struct SectorCheck {
    pub sector: usize,
    /// Worst relative error between dressed-level spacings (free part
    /// removed) and the effective-model spacings at each level's photon
    /// number.
    pub max_spacing_rel_error: f64,
    /// Total population of the top Fock level over the sector eigenvectors.
    pub top_fock_population: f64,
}

/// Compare dressed levels of the full model against the effective model.
///
/// Within a conserved-excitation sector `k`, each dressed level is labeled by
/// its dominant ladder value `m` (mixing is tiny in the dispersive regime) and
/// carries the photon number `n = k - (m + j)`. After removing the free part
/// `omega n + (omega_A + W) m`, its energy must match `omega_m` evaluated at
/// `n_a = n`; the reported error is on spacings between adjacent levels.
pub fn dispersive_oracle_check(
    params: &ModelParams,
    photon_cutoff: usize,
    sector: usize,
) -> Result<SectorCheck> {
    let members = excitation_sector(params.n_atoms(), photon_cutoff, sector);
    if members.is_empty() {
        return Err(Error::CutoffTooSmall {
            cutoff: photon_cutoff,
            reason: format!("sector {sector} is empty"),
        });
    }
    // headroom: the sector must not touch the top Fock level
    let max_photon = members.iter().map(|&(n, _, _)| n).max().unwrap();
    if max_photon >= photon_cutoff {
        return Err(Error::CutoffTooSmall {
            cutoff: photon_cutoff,
            reason: format!(
                "sector {sector} reaches photon number {max_photon}; leakage would be unchecked"
            ),
        });
    }

    let h = full_dicke_hamiltonian(params, photon_cutoff)?;
    let basis = params.basis();
    let sdim = members.len();
    let mut block = CMatrix::zeros(sdim, sdim);
    for (a, &(_, _, ia)) in members.iter().enumerate() {
        for (b, &(_, _, ib)) in members.iter().enumerate() {
            block[(a, b)] = h[(ia, ib)];
        }
    }
    let es = crate::numerics::hermitian_eigensystem(&block)?;

    // label each dressed level by its dominant basis member
    let mut labeled: Vec<(usize, f64)> = Vec::with_capacity(sdim); // (member idx, E_int)
    for level in 0..sdim {
        let col = es.eigenvectors.column(level);
        let dominant = (0..sdim)
            .max_by(|&a, &b| col[a].norm().partial_cmp(&col[b].norm()).unwrap())
            .unwrap();
        let (n, row, _) = members[dominant];
        let m = basis.m_of_row(row).value();
        let free = params.omega_cavity() * n as f64 + (params.omega_atom() + params.coupling_w()) * m;
        labeled.push((dominant, es.eigenvalues[level] - free));
    }
    labeled.sort_by_key(|&(idx, _)| members[idx].1); // ascending in m

    let mut max_rel = 0.0_f64;
    for pair in labeled.windows(2) {
        let (ia, e_a) = pair[0];
        let (ib, e_b) = pair[1];
        let (na, row_a, _) = members[ia];
        let (nb, row_b, _) = members[ib];
        if row_b != row_a + 1 {
            continue;
        }
        let ma = basis.m_of_row(row_a).value();
        let mb = basis.m_of_row(row_b).value();
        let d_full = e_b - e_a;
        let d_eff = params.omega_m_at(mb, nb as f64) - params.omega_m_at(ma, na as f64);
        let rel = (d_full - d_eff).abs() / d_eff.abs().max(1e-300);
        max_rel = max_rel.max(rel);
    }

    Ok(SectorCheck { sector, max_spacing_rel_error: max_rel, top_fock_population: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_abs_entry;
    use crate::spin::{op_collective, Collective};
    use approx::assert_abs_diff_eq;

    #[test]
    fn coupling_w_reference_values() {
        // figure-scenario numbers: g0 = 100, g0/Delta = -0.1 -> Delta = -1000
        assert_abs_diff_eq!(coupling_w(100.0, -1000.0, 2).unwrap(), -5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(coupling_w(100.0, -1000.0, 10).unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(coupling_w(0.0, -1000.0, 5).unwrap(), 0.0);
        assert!(matches!(coupling_w(1.0, 0.0, 2), Err(Error::ZeroDetuning)));
    }

    #[test]
    fn params_invariants() {
        let p = ModelParams::from_ratio(2, 100.0, -0.1)
            .unwrap()
            .delta(-0.02)
            .rabi_n_per_w(0.1)
            .build()
            .unwrap();
        assert_abs_diff_eq!(p.coupling_w() * p.n_atoms() as f64 * p.delta_detuning(), p.g0() * p.g0(), epsilon = 1e-6);
        assert_abs_diff_eq!(p.delta(), p.n_a() - 0.5, epsilon = 1e-12);
        assert_eq!(p.coupling_w().signum(), p.delta_detuning().signum());
        assert_abs_diff_eq!(p.coupling_w(), -5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.rabi(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p.omega_drive(), p.omega_atom() + p.coupling_w(), epsilon = 1e-12);
    }

    #[test]
    fn effective_levels_by_hand() {
        // N=2, W=-5, n_a=0.48
        let p = ModelParams::from_ratio(2, 100.0, -0.1).unwrap().n_a(0.48).build().unwrap();
        assert_abs_diff_eq!(p.omega_m(-1.0), -0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(p.omega_m(0.0), -10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.omega_m(1.0), -9.8, epsilon = 1e-12);

        // degeneracy at n_a = 1/2
        let p0 = ModelParams::from_ratio(2, 100.0, -0.1).unwrap().n_a(0.5).build().unwrap();
        assert_abs_diff_eq!(p0.omega_m(0.0), p0.omega_m(1.0), epsilon = 1e-12);
    }

    #[test]
    fn effective_hamiltonian_matches_operator_identity() {
        let p = ModelParams::builder(6, 80.0, -900.0).n_a(1.7).build().unwrap();
        let b = p.basis();
        let h = effective_hamiltonian(&p, &b).unwrap();

        let jz = op_collective(&b, Collective::Jz);
        let j2 = op_collective(&b, Collective::JSquared);
        let id = CMatrix::identity(b.dim(), b.dim());
        let shifted = &jz - id.scale(p.n_a());
        let built = (&shifted * &shifted - id.scale(p.n_a() * p.n_a()) - j2)
            .scale(-p.coupling_w());
        assert!(max_abs_entry(&(h - built)) < 1e-12);
    }

    #[test]
    fn driven_hamiltonian_couplings() {
        let p = ModelParams::builder(2, 100.0, -1000.0).n_a(0.48).rabi(0.25).build().unwrap();
        let b = p.basis();
        let h = driven_hamiltonian(&p, &b).unwrap();
        // m=0 <-> m=1 coupling is Omega sqrt(2)
        assert_abs_diff_eq!(h[(2, 1)].re, 0.25 * 2.0_f64.sqrt(), epsilon = 1e-14);
        // hermitian
        assert!(crate::numerics::hermiticity_asymmetry(&h) < 1e-12);

        // Omega = 0 collapses to the effective Hamiltonian exactly
        let p0 = ModelParams::builder(2, 100.0, -1000.0).n_a(0.48).build().unwrap();
        let h0 = driven_hamiltonian(&p0, &b).unwrap();
        assert_eq!(h0, effective_hamiltonian(&p0, &b).unwrap());
    }

    #[test]
    fn critical_points_enumeration() {
        assert_eq!(critical_points(10).unwrap(), vec![4.5, 3.5, 2.5, 1.5, 0.5]);
        assert_eq!(critical_points(2).unwrap(), vec![0.5]);
        assert_eq!(critical_points(3).unwrap(), vec![1.0]);
        assert!(matches!(critical_points(1), Err(Error::NoCrossing { .. })));
    }

    fn brute_force_ground(omega: &[f64]) -> Vec<usize> {
        let min = omega.iter().cloned().fold(f64::INFINITY, f64::min);
        omega
            .iter()
            .enumerate()
            .filter(|(_, &x)| (x - min).abs() <= 1e-9 * (1.0 + min.abs()))
            .map(|(i, _)| i)
            .collect()
    }

    #[test]
    fn ground_state_examples() {
        let b10 = DickeBasis::new(10).unwrap();
        let p = ModelParams::builder(10, 100.0, -1000.0).n_a(2.2).build().unwrap();
        let s = spectrum(&p, &b10).unwrap();
        assert_eq!(s.ground_m, vec![HalfInteger::from_twice(4)]);

        let p_tie = ModelParams::builder(10, 100.0, -1000.0).n_a(4.5).build().unwrap();
        let s_tie = spectrum(&p_tie, &b10).unwrap();
        assert_eq!(
            s_tie.ground_m,
            vec![HalfInteger::from_twice(8), HalfInteger::from_twice(10)]
        );
        // the crossing pair is exactly degenerate
        let rows: Vec<usize> =
            s_tie.ground_m.iter().map(|&m| b10.row_of_m(m).unwrap()).collect();
        assert_abs_diff_eq!(s_tie.omega_m[rows[0]], s_tie.omega_m[rows[1]], epsilon = 1e-10);

        // paramagnetic side
        let b6 = DickeBasis::new(6).unwrap();
        let p_pos = ModelParams::builder(6, 100.0, 1000.0).n_a(1.3).build().unwrap();
        let s_pos = spectrum(&p_pos, &b6).unwrap();
        assert_eq!(s_pos.ground_m, vec![HalfInteger::from_twice(-6)]);
    }

    #[test]
    fn ground_state_rule_matches_argmin_everywhere() {
        for n_atoms in 2..=20 {
            let b = DickeBasis::new(n_atoms).unwrap();
            let j = b.j();
            let steps = (j / 0.05).round() as usize;
            for sign in [-1.0, 1.0] {
                for k in 0..=steps {
                    let n_a = k as f64 * 0.05;
                    let p = ModelParams::builder(n_atoms, 100.0, sign * 1000.0)
                        .n_a(n_a)
                        .build()
                        .unwrap();
                    let s = spectrum(&p, &b).unwrap();
                    let brute = brute_force_ground(&s.omega_m);
                    let rule: Vec<usize> =
                        s.ground_m.iter().map(|&m| b.row_of_m(m).unwrap()).collect();
                    assert_eq!(rule, brute, "N={n_atoms} sign={sign} n_a={n_a}");
                }
            }
        }
    }

    #[test]
    fn omega_m_reflection_symmetry() {
        let p = ModelParams::builder(8, 70.0, -450.0).n_a(1.3).build().unwrap();
        let n_a = p.n_a();
        for m in [-3.0, -1.0, 0.0, 2.0] {
            let mirrored = 2.0 * n_a - m;
            assert_abs_diff_eq!(p.omega_m(m), p.omega_m(mirrored), epsilon = 1e-9);
        }
    }

    #[test]
    fn decoupled_full_dicke_spectrum() {
        let p = ModelParams::builder(2, 0.0, -1000.0).n_a(0.0).build().unwrap();
        let cutoff = 3;
        let h = full_dicke_hamiltonian(&p, cutoff).unwrap();
        assert!(crate::numerics::hermiticity_asymmetry(&h) < 1e-12);
        // diagonal with entries omega n + omega_A m
        let b = p.basis();
        for n in 0..=cutoff {
            for row in 0..b.dim() {
                let i = n * b.dim() + row;
                let want = p.omega_atom() * b.m_of_row(row).value();
                assert_abs_diff_eq!(h[(i, i)].re, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn driven_ground_state_differs_from_undriven() {
        let p = ModelParams::builder(4, 100.0, -1000.0).n_a(1.0 - 0.03).build().unwrap();
        let w = p.coupling_w().abs();
        let b = p.basis();
        let undriven = effective_hamiltonian(&p, &b).unwrap();
        let p_driven = ModelParams::builder(4, 100.0, -1000.0)
            .n_a(1.0 - 0.03)
            .rabi(0.1 * w)
            .build()
            .unwrap();
        let driven = driven_hamiltonian(&p_driven, &b).unwrap();
        let es_u = crate::numerics::hermitian_eigensystem(&undriven).unwrap();
        let es_d = crate::numerics::hermitian_eigensystem(&driven).unwrap();
        let overlap = es_u.eigenvectors.column(0).dotc(&es_d.eigenvectors.column(0)).norm();
        assert!(overlap < 1.0 - 1e-6, "overlap = {overlap}");
    }

    #[test]
    fn cutoff_guards() {
        let p = ModelParams::builder(2, 100.0, -1000.0).n_a(3.0).build().unwrap();
        assert!(matches!(full_dicke_hamiltonian(&p, 4), Err(Error::CutoffTooSmall { .. })));
        // sector reaching the cutoff is rejected
        let p2 = ModelParams::builder(2, 100.0, -10000.0).n_a(0.5).build().unwrap();
        assert!(matches!(
            dispersive_oracle_check(&p2, 6, 6),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn dispersive_oracle_tracks_effective_model() {
        // deep dispersive point: g0/Delta = -0.01
        let p = ModelParams::from_ratio(2, 100.0, -0.01)
            .unwrap()
            .n_a(3.0)
            .build()
            .unwrap();
        for sector in 2..=8 {
            let check = dispersive_oracle_check(&p, 14, sector).unwrap();
            assert!(
                check.max_spacing_rel_error < 0.01,
                "sector {sector}: rel error {}",
                check.max_spacing_rel_error
            );
        }
    }
}
