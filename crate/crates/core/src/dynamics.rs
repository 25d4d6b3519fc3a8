//! Exact coherence functions: unitary `g2(tau, 0)` and the dissipative
//! steady-state `g2(tau, infinity)`.
//!
//! The dissipative side evolves under the collective-decay master equation
//!
//! ```text
//! d rho/dt = -i [H, rho] + gamma ( J- rho J+ - {J+ J-, rho}/2 )
//! ```
//!
//! with the rotating-frame driven Hamiltonian. Two-time correlators follow
//! from the quantum regression theorem: the regression operator
//! `J- rho_ss J+` propagates under the same generator as the state. Photon
//! decay is excluded; the photon number is conserved and detuned far enough
//! that its loss does not act back on the atoms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{driven_hamiltonian, ModelParams};
use crate::numerics::{
    self, max_abs_entry, rk4_step_matrix, symmetrize, unvectorize, vectorize, C64, CMatrix,
    CVector, SpectralPropagator,
};
use crate::spin::{dicke_state, op_collective, Collective, DensityMatrix, DickeBasis, HalfInteger,
    PureState, QuantumState};

/// Which estimator produced a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G2Method {
    ExactUnitary,
    PerturbativeLow,
    PerturbativeHigh,
    LindbladRegression,
}

impl G2Method {
    pub const ALL: [G2Method; 4] = [
        G2Method::ExactUnitary,
        G2Method::PerturbativeLow,
        G2Method::PerturbativeHigh,
        G2Method::LindbladRegression,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            G2Method::ExactUnitary => "exact_unitary",
            G2Method::PerturbativeLow => "perturbative_low",
            G2Method::PerturbativeHigh => "perturbative_high",
            G2Method::LindbladRegression => "lindblad_regression",
        }
    }
}

impl fmt::Display for G2Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for G2Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact_unitary" | "exact" => Ok(G2Method::ExactUnitary),
            "perturbative_low" | "pert-low" => Ok(G2Method::PerturbativeLow),
            "perturbative_high" | "pert-high" => Ok(G2Method::PerturbativeHigh),
            "lindblad_regression" | "steady" => Ok(G2Method::LindbladRegression),
            other => Err(format!("unknown g2 method `{other}`")),
        }
    }
}

/// Reference time of the first detection event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeReference {
    /// `t = 0` on a pure initial state.
    Zero,
    /// The Lindblad steady state.
    Steady,
}

/// One coherence-function evaluation.
#[derive(Debug, Clone, Copy)]
pub struct G2Sample {
    pub tau: f64,
    pub t_ref: TimeReference,
    pub value: f64,
    pub method: G2Method,
}

const COHERENCE_TOL: f64 = 1e-14;

fn real_part_checked(z: C64, context: &str) -> f64 {
    debug_assert!(
        z.im.abs() < 1e-10 * (1.0 + z.re.abs()),
        "{context}: imaginary residue {:.3e}",
        z.im
    );
    z.re
}

/// Equal-time coherence `<J+ J+ J- J-> / <J+ J->^2` on any state.
pub fn g2_equal_time<S: QuantumState>(state: &S) -> Result<f64> {
    let basis = state.basis();
    let jp = op_collective(basis, Collective::JPlus);
    let jm = op_collective(basis, Collective::JMinus);
    let num_op = &jp * &jp * &jm * &jm;
    let den_op = &jp * &jm;

    let den = real_part_checked(state.expectation(&den_op)?, "g2_equal_time denominator");
    if den <= COHERENCE_TOL {
        return Err(Error::UndefinedCoherence { value: den, tol: COHERENCE_TOL, at_tau: String::new() });
    }
    let num = real_part_checked(state.expectation(&num_op)?, "g2_equal_time numerator");
    Ok(num / (den * den))
}

/// Unitary-evolution coherence engine; caches the spectral decomposition of
/// the driven Hamiltonian so a whole delay curve costs one diagonalization.
pub struct UnitaryCoherence {
    propagator: SpectralPropagator,
    /// Diagonal of `J+ J-` in the Dicke basis, `(j+m)(j-m+1)`.
    number_diag: Vec<f64>,
    psi: CVector,
    psi_prime: CVector,
    norm_prime_sq: f64,
}

impl UnitaryCoherence {
    pub fn new(params: &ModelParams, initial: &PureState) -> Result<Self> {
        let basis = initial.basis().clone();
        if basis.n_atoms() != params.n_atoms() {
            return Err(Error::DimensionMismatch {
                left: params.n_atoms(),
                right: basis.n_atoms(),
            });
        }
        let h = driven_hamiltonian(params, &basis)?;
        let jm = op_collective(&basis, Collective::JMinus);
        let j = basis.j();
        let number_diag: Vec<f64> = basis
            .m_values()
            .map(|m| (j + m.value()) * (j - m.value() + 1.0))
            .collect();
        let psi = initial.amplitudes().clone();
        let psi_prime = &jm * &psi;
        let norm_prime_sq = psi_prime.norm_squared();
        if norm_prime_sq <= COHERENCE_TOL {
            return Err(Error::UndefinedCoherence {
                value: norm_prime_sq,
                tol: COHERENCE_TOL,
                at_tau: String::new(),
            });
        }
        Ok(Self {
            propagator: SpectralPropagator::new(&h)?,
            number_diag,
            psi,
            psi_prime,
            norm_prime_sq,
        })
    }

    fn weighted_population(&self, v: &CVector) -> f64 {
        v.iter().zip(&self.number_diag).map(|(a, k)| k * a.norm_sqr()).sum()
    }

    /// `g2(tau, 0)` per the pure-state two-time form.
    pub fn g2(&self, tau: f64) -> Result<f64> {
        let evolved_prime = self.propagator.evolve(&self.psi_prime, tau)?;
        let evolved = self.propagator.evolve(&self.psi, tau)?;
        let numerator = self.weighted_population(&evolved_prime);
        let den_tau = self.weighted_population(&evolved);
        if den_tau <= COHERENCE_TOL {
            return Err(Error::UndefinedCoherence {
                value: den_tau,
                tol: COHERENCE_TOL,
                at_tau: format!(" at tau = {tau}"),
            });
        }
        Ok(numerator / (self.norm_prime_sq * den_tau))
    }
}

/// One-shot `g2(tau, 0)` by exact unitary evolution under the driven
/// rotating-frame Hamiltonian.
pub fn g2_unitary(params: &ModelParams, initial: &PureState, tau: f64) -> Result<G2Sample> {
    let engine = UnitaryCoherence::new(params, initial)?;
    Ok(G2Sample {
        tau,
        t_ref: TimeReference::Zero,
        value: engine.g2(tau)?,
        method: G2Method::ExactUnitary,
    })
}

/// The collective-decay Lindblad generator, usable as a superoperator
/// function or materialized as a dense matrix on vectorized states.
pub struct LindbladGenerator {
    basis: DickeBasis,
    hamiltonian: CMatrix,
    j_minus: CMatrix,
    j_plus: CMatrix,
    number_op: CMatrix,
    gamma: f64,
}

impl LindbladGenerator {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let basis = params.basis();
        let hamiltonian = driven_hamiltonian(params, &basis)?;
        let j_minus = op_collective(&basis, Collective::JMinus);
        let j_plus = op_collective(&basis, Collective::JPlus);
        let number_op = &j_plus * &j_minus;
        Ok(Self { basis, hamiltonian, j_minus, j_plus, number_op, gamma: params.gamma_decay() })
    }

    pub fn basis(&self) -> &DickeBasis {
        &self.basis
    }

    /// `rho -> -i[H, rho] + gamma (J- rho J+ - {J+J-, rho}/2)`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = (&self.hamiltonian * rho - rho * &self.hamiltonian) * C64::new(0.0, -1.0);
        if self.gamma > 0.0 {
            out += (&self.j_minus * rho * &self.j_plus
                - (&self.number_op * rho + rho * &self.number_op).scale(0.5))
            .scale(self.gamma);
        }
        out
    }

    /// Dense matrix of the generator acting on column-stacked states.
    pub fn superoperator(&self) -> CMatrix {
        let d = self.basis.dim();
        let id = CMatrix::identity(d, d);
        let i = C64::new(0.0, 1.0);
        let mut l = (id.kronecker(&self.hamiltonian) - self.hamiltonian.transpose().kronecker(&id))
            * (-i);
        if self.gamma > 0.0 {
            let jump = self.j_plus.transpose().kronecker(&self.j_minus);
            let anti = id.kronecker(&self.number_op) + self.number_op.transpose().kronecker(&id);
            l += (jump - anti.scale(0.5)).scale(self.gamma);
        }
        l
    }

    fn max_level_energy(&self) -> f64 {
        max_abs_entry(&self.hamiltonian)
    }
}

/// Superoperator function view of the generator, matching the integration
/// plumbing's `(rho, t)` signature.
pub fn lindblad_rhs(params: &ModelParams) -> Result<impl Fn(&CMatrix, f64) -> CMatrix> {
    let gen = LindbladGenerator::new(params)?;
    Ok(move |rho: &CMatrix, _t: f64| gen.apply(rho))
}

/// Gershgorin-type bound on the generator's spectral radius, used to pick a
/// stable RK4 step.
fn spectral_radius_bound(l: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for row in 0..l.nrows() {
        let sum: f64 = (0..l.ncols()).map(|c| l[(row, c)].norm()).sum();
        worst = worst.max(sum);
    }
    worst.max(1e-300)
}

/// Steady state by marching the RK4 one-step map to a fixed point.
///
/// The one-step map of fixed-step RK4 on a time-independent generator is the
/// degree-4 Taylor polynomial of `exp(dt L)`; its fixed points are exactly the
/// kernel of `L`, so the march lands on the true steady state. Horizon
/// doubling through repeated squaring keeps the cost logarithmic in the
/// relaxation time. Convergence requires both a successive-step change below
/// 1e-12 and a generator residual below 1e-9.
pub fn steady_state_integration(params: &ModelParams) -> Result<DensityMatrix> {
    steady_integration_impl(params, 1e3)
}

fn steady_integration_impl(params: &ModelParams, horizon_factor: f64) -> Result<DensityMatrix> {
    if params.gamma_decay() <= 0.0 {
        return Err(Error::NoDissipation);
    }
    let gen = LindbladGenerator::new(params)?;
    let basis = gen.basis().clone();
    let l = gen.superoperator();
    let dt = 1.0 / spectral_radius_bound(&l);
    let horizon = horizon_factor
        * (1.0 / params.gamma_decay())
            .max(if params.rabi() > 0.0 { 1.0 / params.rabi() } else { 0.0 });

    let rho0 = dicke_state(&basis, HalfInteger::from_twice(-(basis.n_atoms() as i32)))?
        .density_matrix();
    let mut v = vectorize(rho0.matrix());
    let step = rk4_step_matrix(&l, dt);
    let mut power = step.clone();
    let mut t = 0.0_f64;

    loop {
        v = &power * &v;
        t += t + dt; // steps double: 1, 3, 7, ...
        let per_step_change = max_abs_entry(&unvectorize(&(&step * &v - &v), basis.dim()));
        let residual = max_abs_entry(&unvectorize(&(&l * &v), basis.dim()));
        if per_step_change < 1e-12 && residual < 1e-9 {
            let rho = symmetrize(&unvectorize(&v, basis.dim()));
            return Ok(SteadyOutcome {
                rho: DensityMatrix::new(basis, rho)?,
                residual,
            });
        }
        if t > horizon {
            return Err(Error::SteadyStateNotConverged { horizon, residual });
        }
        power = &power * &power;
    }
}

/// Steady state as the null vector of the dense Liouvillian, normalized to
/// unit trace. Cross-check route for modest dimensions.
pub fn steady_state_nullspace(params: &ModelParams) -> Result<DensityMatrix> {
    if params.gamma_decay() <= 0.0 {
        return Err(Error::NoDissipation);
    }
    let gen = LindbladGenerator::new(params)?;
    let basis = gen.basis().clone();
    let l = gen.superoperator();
    let dim = basis.dim();

    let svd = l.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    // smallest singular value is last; its right singular vector spans the kernel
    let kernel: CVector = v_t.row(v_t.nrows() - 1).adjoint();
    let candidate = unvectorize(&kernel, dim);
    let trace = candidate.trace();
    if trace.norm() < 1e-12 {
        return Err(Error::SteadyStateNotConverged { horizon: 0.0, residual: trace.norm() });
    }
    let rho = symmetrize(&(candidate / trace));
    let residual = max_abs_entry(&unvectorize(&(&l * &vectorize(&rho)), dim));
    if residual > 1e-9 {
        return Err(Error::SteadyStateNotConverged { horizon: 0.0, residual });
    }
    DensityMatrix::new(basis, rho)
}

/// Steady state with the dual convergence contract: long-time integration,
/// cross-checked entrywise against the null-space solve for `N <= 10`.
pub fn steady_state(params: &ModelParams) -> Result<DensityMatrix> {
    let integrated = steady_state_integration(params)?;
    if params.n_atoms() <= 10 {
        let direct = steady_state_nullspace(params)?;
        let gap = integrated.max_entry_distance(&direct);
        if gap > 1e-7 {
            return Err(Error::SteadyStateMismatch { gap });
        }
    }
    Ok(integrated)
}

/// Regression-theorem propagation engine over a fixed generator.
struct RegressionEngine {
    l: CMatrix,
    dim: usize,
    dt_target: f64,
}

impl RegressionEngine {
    fn new(params: &ModelParams) -> Result<Self> {
        let gen = LindbladGenerator::new(params)?;
        let l = gen.superoperator();
        // accuracy-limited step, well inside the RK4 stability region
        let dt_target = numerics::default_master_dt(params.gamma_decay(), gen.max_level_energy())
            .min(0.2 / spectral_radius_bound(&l));
        Ok(Self { dim: gen.basis().dim(), l, dt_target })
    }

    /// Map `tau` to an integer step count and exact step size.
    fn stepping(&self, span: f64) -> (usize, f64) {
        if span <= 0.0 {
            return (0, 0.0);
        }
        let steps = (span / self.dt_target).ceil().max(1.0) as usize;
        (steps, span / steps as f64)
    }

    /// Propagate a vectorized operator over `span`.
    fn advance(&self, v: &CVector, span: f64) -> CVector {
        let (steps, dt) = self.stepping(span);
        if steps == 0 {
            return v.clone();
        }
        let m = rk4_step_matrix(&self.l, dt);
        // binary power keeps long spans cheap
        let mut result = v.clone();
        let mut remaining = steps;
        let mut base = m;
        while remaining > 0 {
            if remaining & 1 == 1 {
                result = &base * &result;
            }
            remaining >>= 1;
            if remaining > 0 {
                base = &base * &base;
            }
        }
        result
    }
}

/// General-`t` regression evaluation used for consistency checks:
/// `Tr[K Lambda_tau(J- rho J+)] / (Tr[K rho] Tr[K Lambda_tau(rho)])` with
/// `K = J+ J-`.
pub fn g2_regression_from(params: &ModelParams, rho: &DensityMatrix, tau: f64) -> Result<f64> {
    let basis = rho.basis().clone();
    if basis.n_atoms() != params.n_atoms() {
        return Err(Error::DimensionMismatch { left: params.n_atoms(), right: basis.n_atoms() });
    }
    let jp = op_collective(&basis, Collective::JPlus);
    let jm = op_collective(&basis, Collective::JMinus);
    let number_op = &jp * &jm;

    let den0 = real_part_checked((&number_op * rho.matrix()).trace(), "regression denominator");
    if den0 <= COHERENCE_TOL {
        return Err(Error::UndefinedCoherence { value: den0, tol: COHERENCE_TOL, at_tau: String::new() });
    }

    let engine = RegressionEngine::new(params)?;
    let regression_op = &jm * rho.matrix() * &jp;
    let evolved_reg = unvectorize(&engine.advance(&vectorize(&regression_op), tau), engine.dim);
    let evolved_rho = unvectorize(&engine.advance(&vectorize(rho.matrix()), tau), engine.dim);

    let den_tau = real_part_checked((&number_op * evolved_rho).trace(), "regression denominator");
    if den_tau <= COHERENCE_TOL {
        return Err(Error::UndefinedCoherence {
            value: den_tau,
            tol: COHERENCE_TOL,
            at_tau: format!(" at tau = {tau}"),
        });
    }
    let num = real_part_checked((&number_op * evolved_reg).trace(), "regression numerator");
    Ok((num / (den0 * den_tau)).max(0.0))
}

/// Steady-state coherence `g2(tau, infinity)` via the regression theorem.
pub fn g2_steady(params: &ModelParams, tau: f64) -> Result<G2Sample> {
    let rho_ss = steady_state(params)?;
    g2_steady_with(params, &rho_ss, tau)
}

/// Same as [`g2_steady`] with a precomputed steady state.
pub fn g2_steady_with(params: &ModelParams, rho_ss: &DensityMatrix, tau: f64) -> Result<G2Sample> {
    Ok(G2Sample {
        tau,
        t_ref: TimeReference::Steady,
        value: g2_regression_from(params, rho_ss, tau)?,
        method: G2Method::LindbladRegression,
    })
}

/// A whole steady-state delay curve, marching the regression operator
/// incrementally along an ascending grid.
pub fn g2_steady_curve(params: &ModelParams, taus: &[f64]) -> Result<Vec<G2Sample>> {
    let rho_ss = steady_state(params)?;
    let basis = rho_ss.basis().clone();
    let jp = op_collective(&basis, Collective::JPlus);
    let jm = op_collective(&basis, Collective::JMinus);
    let number_op = &jp * &jm;

    let den = real_part_checked((&number_op * rho_ss.matrix()).trace(), "steady denominator");
    if den <= COHERENCE_TOL {
        return Err(Error::UndefinedCoherence { value: den, tol: COHERENCE_TOL, at_tau: String::new() });
    }
    let den_sq = den * den;

    let engine = RegressionEngine::new(params)?;
    let mut v = vectorize(&(&jm * rho_ss.matrix() * &jp));
    let mut out = Vec::with_capacity(taus.len());
    let mut current = 0.0_f64;
    for &tau in taus {
        if tau < current - 1e-12 {
            return Err(Error::DimensionMismatch { left: 0, right: 0 });
        }
        if tau > current {
            v = engine.advance(&v, tau - current);
            current = tau;
        }
        let num = real_part_checked(
            (&number_op * unvectorize(&v, engine.dim)).trace(),
            "steady numerator",
        );
        out.push(G2Sample {
            tau,
            t_ref: TimeReference::Steady,
            value: (num / den_sq).max(0.0),
            method: G2Method::LindbladRegression,
        });
    }
    Ok(out)
}
