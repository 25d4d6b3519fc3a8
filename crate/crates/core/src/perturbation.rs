//! First-order perturbative coherence functions near the two near-degenerate
//! subspaces.
//!
//! Near the lowest critical point (`n_a` close to 1/2) the driven pair
//! `{|j,0>, |j,1>}` forms a strongly coupled two-level block; near the highest
//! one (`n_a` close to `j - 1/2`) the pair is `{|j,j-1>, |j,j>}`. Each block
//! is diagonalized exactly and transitions out of it are treated to first
//! order in the interaction-picture drive, producing closed forms for
//! `g2(tau, 0)`.
//!
//! The assembled coefficient blocks (`x_i`/`y_i` and their high-subspace
//! counterparts, the amplitudes `a_i(tau)`, `c_2(tau)`, the rotation
//! coefficients `alpha/beta/gamma_coef`) are implemented term by term as pure
//! functions of the parameters and the delay, with no cached phases. The
//! time-dependent `gamma_coef` is named to keep it apart from the collective
//! decay rate `gamma`.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{C64, CMatrix};
use crate::spin::{HalfInteger, PureState, QuantumState};

/// `O(gap, tau) = (1 - e^{i gap tau}) / gap`, the first-order transition
/// kernel. The `gap -> 0` limit `-i tau` is taken below 1e-12 so resonant
/// grid points stay finite.
pub fn phase_kernel(gap: f64, tau: f64) -> C64 {
    if gap.abs() < 1e-12 {
        return C64::new(0.0, -tau);
    }
    (C64::new(1.0, 0.0) - C64::from_polar(1.0, gap * tau)) / gap
}

/// Exact diagonalization data of the `{|j,0>, |j,1>}` block.
#[derive(Debug, Clone)]
pub struct SubspaceDiagLow {
    /// Eigenenergies, `lambda[0] < lambda[1]`.
    pub lambda: [f64; 2],
    /// Mixing coefficients of `|lambda_r> = (xi_r |j,0> + |j,1>)/A_r`.
    pub xi: [f64; 2],
    /// Normalizations `A_r = sqrt(xi_r^2 + 1)`.
    pub norm: [f64; 2],
    /// Half-splitting `sqrt(W^2 d^2 + j O^2 + j^2 O^2)`.
    pub p: f64,
    /// Basis-change coefficients: `|j,1> = eta1|l0> + eta2|l1>`,
    /// `|j,0> = eta3|l0> + eta4|l1>`. Stored as `[eta1, eta2, eta3, eta4]`.
    pub eta: [f64; 4],
    /// Pair coupling `v0 = Omega sqrt(j(j+1))`.
    pub v0: f64,
}

/// Exact diagonalization data of the `{|j,j-1>, |j,j>}` block, plus the
/// quantities driving the `J+J-` rotation in that subspace.
#[derive(Debug, Clone)]
pub struct SubspaceDiagHigh {
    pub lambda: [f64; 2],
    /// `|lambda_r^c> = (xi_r^c |j,j-1> + |j,j>)/A_r^c`.
    pub xi: [f64; 2],
    pub norm: [f64; 2],
    /// `sqrt((1-2j+2n_a)^2 W^2 + 8 j Omega^2)`.
    pub p_c: f64,
    /// `[eta1^c, eta2^c, eta3^c, eta4^c]`, same pattern as the low block.
    pub eta: [f64; 4],
    /// `sqrt(2) Omega (2j-1) / (eta2^c eta3^c - eta1^c eta4^c)`.
    pub f_c: f64,
    /// `-2 Omega sqrt(2j) (j-1)`.
    pub q0: f64,
    /// `sqrt((omega_{j-1}-omega_j)^2 + 8 j Omega^2)`; equals `p_c`.
    pub q: f64,
}

fn eta_from(xi: [f64; 2], norm: [f64; 2]) -> [f64; 4] {
    let denom = xi[1] - xi[0];
    [
        xi[1] * norm[0] / denom,
        -xi[0] * norm[1] / denom,
        norm[0] / (xi[0] - xi[1]),
        -norm[1] / (xi[0] - xi[1]),
    ]
}

/// Diagonalize the near-degenerate block at the lowest critical point.
pub fn diag_subspace_low(params: &ModelParams) -> Result<SubspaceDiagLow> {
    if params.rabi() <= 0.0 {
        return Err(Error::ZeroDrive);
    }
    if params.n_atoms() % 2 != 0 {
        // the pair m = 0, 1 only exists on the integer ladder
        return Err(Error::InvalidDickeIndex { m: 0.0, j: params.j() });
    }
    let j = params.j();
    let w = params.coupling_w();
    let d = params.delta();
    let omega = params.rabi();
    let v0 = omega * (j * (j + 1.0)).sqrt();
    let p = (w * w * d * d + j * omega * omega + j * j * omega * omega).sqrt();
    let base = j * w + j * j * w + w * d;
    let lambda = [base - p, base + p];
    let xi = [-(w * d + p) / v0, -(w * d - p) / v0];
    let norm = [(xi[0] * xi[0] + 1.0).sqrt(), (xi[1] * xi[1] + 1.0).sqrt()];
    let eta = eta_from(xi, norm);
    Ok(SubspaceDiagLow { lambda, xi, norm, p, eta, v0 })
}

/// Diagonalize the near-degenerate block at the highest critical point.
pub fn diag_subspace_high(params: &ModelParams) -> Result<SubspaceDiagHigh> {
    if params.rabi() <= 0.0 {
        return Err(Error::ZeroDrive);
    }
    let j = params.j();
    let w = params.coupling_w();
    let n_a = params.n_a();
    let omega = params.rabi();
    let two_j = 2.0 * j;
    let p_c = ((1.0 - two_j + 2.0 * n_a).powi(2) * w * w + 4.0 * two_j * omega * omega).sqrt();
    let base = 0.5 * (-1.0 - 2.0 * n_a + 4.0 * j * (1.0 + n_a)) * w;
    let lambda = [base - 0.5 * p_c, base + 0.5 * p_c];
    let scale = 2.0 * omega * two_j.sqrt();
    let xi = [
        ((-1.0 + two_j - 2.0 * n_a) * w - p_c) / scale,
        ((-1.0 + two_j - 2.0 * n_a) * w + p_c) / scale,
    ];
    let norm = [(xi[0] * xi[0] + 1.0).sqrt(), (xi[1] * xi[1] + 1.0).sqrt()];
    let eta = eta_from(xi, norm);
    let f_c = std::f64::consts::SQRT_2 * omega * (two_j - 1.0) / (eta[1] * eta[2] - eta[0] * eta[3]);
    let q0 = -2.0 * omega * two_j.sqrt() * (j - 1.0);
    let gap = params.omega_m(j - 1.0) - params.omega_m(j);
    let q = (gap * gap + 4.0 * two_j * omega * omega).sqrt();
    Ok(SubspaceDiagHigh { lambda, xi, norm, p_c, eta, f_c, q0, q })
}

/// Which near-degenerate block a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    Low,
    High,
}

/// One perturbation-theory smallness ratio.
#[derive(Debug, Clone)]
pub struct ValidityRatio {
    pub label: String,
    pub ratio: f64,
    pub pass: bool,
}

/// The full list of smallness conditions for a subspace.
#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub subspace: Subspace,
    pub threshold: f64,
    pub ratios: Vec<ValidityRatio>,
    pub passed: bool,
}

impl ValidityReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }
}

fn push_ratio(
    ratios: &mut Vec<ValidityRatio>,
    threshold: f64,
    label: String,
    coupling: f64,
    gap: f64,
) -> Result<()> {
    if coupling == 0.0 {
        // transition absent (vanishing matrix element); no condition to check
        return Ok(());
    }
    if gap.abs() < 1e-12 {
        return Err(Error::NearResonance { label, gap: gap.abs() });
    }
    let ratio = (coupling / gap).abs();
    ratios.push(ValidityRatio { label, ratio, pass: ratio < threshold });
    Ok(())
}

/// Evaluate the smallness ratios backing first-order perturbation theory in
/// the chosen subspace against `threshold` (the working default is 0.1).
pub fn perturbation_validity(
    params: &ModelParams,
    subspace: Subspace,
    threshold: f64,
) -> Result<ValidityReport> {
    let j = params.j();
    let mut ratios = Vec::new();
    match subspace {
        Subspace::Low => {
            let sub = diag_subspace_low(params)?;
            let omega_2 = params.drive_element(2.0);
            let omega_0 = params.drive_element(0.0);
            push_ratio(
                &mut ratios,
                threshold,
                "Omega_2 eta_1 / Delta_{2,0}".into(),
                omega_2 * sub.eta[0],
                params.omega_m(2.0) - sub.lambda[0],
            )?;
            push_ratio(
                &mut ratios,
                threshold,
                "Omega_2 eta_2 / Delta_{2,1}".into(),
                omega_2 * sub.eta[1],
                params.omega_m(2.0) - sub.lambda[1],
            )?;
            push_ratio(
                &mut ratios,
                threshold,
                "Omega_0 eta_3 / Delta_{-1,0}".into(),
                omega_0 * sub.eta[2],
                params.omega_m(-1.0) - sub.lambda[0],
            )?;
            push_ratio(
                &mut ratios,
                threshold,
                "Omega_0 eta_4 / Delta_{-1,1}".into(),
                omega_0 * sub.eta[3],
                params.omega_m(-1.0) - sub.lambda[1],
            )?;
            // residual ladder links, skipping any that touch the pair
            let basis = params.basis();
            for m in basis.m_values() {
                let mv = m.value();
                if mv >= j || (-1.0..=1.0).contains(&mv) {
                    continue;
                }
                push_ratio(
                    &mut ratios,
                    threshold,
                    format!("Omega_{{{}}} / omega_{{{},{}}}", mv + 1.0, mv + 1.0, mv),
                    params.drive_element(mv + 1.0),
                    params.omega_m(mv + 1.0) - params.omega_m(mv),
                )?;
            }
        }
        Subspace::High => {
            let sub = diag_subspace_high(params)?;
            let omega_jm1 = params.drive_element(j - 1.0);
            push_ratio(
                &mut ratios,
                threshold,
                "Omega_{j-1} eta_3^c / Delta^c_{j-2,0}".into(),
                omega_jm1 * sub.eta[2],
                params.omega_m(j - 2.0) - sub.lambda[0],
            )?;
            push_ratio(
                &mut ratios,
                threshold,
                "Omega_{j-1} eta_4^c / Delta^c_{j-2,1}".into(),
                omega_jm1 * sub.eta[3],
                params.omega_m(j - 2.0) - sub.lambda[1],
            )?;
            let basis = params.basis();
            for m in basis.m_values() {
                let mv = m.value();
                if mv > j - 3.0 {
                    continue;
                }
                push_ratio(
                    &mut ratios,
                    threshold,
                    format!("Omega_{{{}}} / omega_{{{},{}}}", mv + 1.0, mv + 1.0, mv),
                    params.drive_element(mv + 1.0),
                    params.omega_m(mv + 1.0) - params.omega_m(mv),
                )?;
            }
        }
    }
    let passed = ratios.iter().all(|r| r.pass);
    Ok(ValidityReport { subspace, threshold, ratios, passed })
}

/// First-order `g2(tau, 0)` near the lowest critical point for an initial
/// state supported on the `{|j,0>, |j,1>}` pair.
pub fn g2_perturbative_low(params: &ModelParams, initial: &PureState, tau: f64) -> Result<f64> {
    let delta = params.delta();
    if !(-0.5..0.5).contains(&delta) || delta == -0.5 {
        return Err(Error::OutOfDomain {
            reason: format!("need -1/2 < delta < 1/2 around the lowest critical point, got {delta}"),
        });
    }
    let basis = initial.basis();
    if basis.n_atoms() != params.n_atoms() {
        return Err(Error::DimensionMismatch { left: params.n_atoms(), right: basis.n_atoms() });
    }
    let c0 = initial.amplitude_at(HalfInteger::from_twice(0))?;
    let c1 = initial.amplitude_at(HalfInteger::from_twice(2))?;
    let outside: f64 = basis
        .m_values()
        .filter(|m| m.twice() != 0 && m.twice() != 2)
        .map(|m| initial.amplitude_at(m).unwrap().norm_sqr())
        .sum();
    if outside > 1e-24 {
        return Err(Error::OutOfDomain {
            reason: format!("initial state leaks weight {outside:.3e} outside m = 0, 1"),
        });
    }

    let sub = diag_subspace_low(params)?;
    let j = params.j();
    let [eta1, eta2, eta3, eta4] = sub.eta;
    let v0 = sub.v0;
    let omega = params.rabi();

    let o_2 = [
        phase_kernel(params.omega_m(2.0) - sub.lambda[0], tau),
        phase_kernel(params.omega_m(2.0) - sub.lambda[1], tau),
    ];
    let o_m1 = [
        phase_kernel(params.omega_m(-1.0) - sub.lambda[0], tau),
        phase_kernel(params.omega_m(-1.0) - sub.lambda[1], tau),
    ];
    let o_m2m1 = phase_kernel(params.omega_m(-2.0) - params.omega_m(-1.0), tau);

    let eta_det = eta2 * eta3 - eta1 * eta4;

    let x1 = v0.powi(2)
        * (j - 1.0).powi(2)
        * (j + 2.0).powi(2)
        * c1.norm_sqr()
        * (o_2[0] * eta1 * eta3 + o_2[1] * eta2 * eta4).norm_sqr();
    let x2 = v0.powi(2)
        * (j + 1.0).powi(2)
        * j.powi(2)
        * c0.norm_sqr()
        * (eta3 * eta4 / eta_det).powi(2)
        * (o_m1[0].conj() - o_m1[1].conj()).norm_sqr();
    let x3 = j.powi(2)
        * (j + 1.0).powi(2)
        * ((o_m1[1].conj() * eta4 * eta1 - o_m1[0].conj() * eta3 * eta2) * c0 * (v0 / eta_det)
            + c1)
            .norm_sqr();
    let x4 = j
        * (j + 2.0)
        * (j * j - 1.0)
        * ((o_m1[0] * eta3 * eta3 + o_m1[1] * eta4 * eta4) * c1 * v0 + c0).norm_sqr();
    let x5 = v0.powi(2)
        * (j - 1.0)
        * (j * j - 4.0)
        * (j + 3.0)
        * c0.norm_sqr()
        * o_m2m1.norm_sqr();

    let y1 = (j + 1.0) * j;
    let y2 = omega.powi(2)
        * (j - 1.0).powi(2)
        * (j + 2.0).powi(2)
        * (o_2[0] * eta1 * (c0 * eta3 + c1 * eta1) + o_2[1] * eta2 * (c0 * eta4 + c1 * eta2))
            .norm_sqr();
    let y3 = v0.powi(2)
        * (j - 1.0)
        * (j + 2.0)
        * (o_m1[0] * eta3 * (c0 * eta3 + c1 * eta1) + o_m1[1] * eta4 * (c0 * eta4 + c1 * eta2))
            .norm_sqr();

    let x = x1 + x2 + x3 + x4 + x5;
    let y = y1 + y2 + y3;
    if y <= 1e-14 {
        return Err(Error::DegenerateDenominator { value: y });
    }
    Ok(x / ((j + 1.0) * j * y))
}

/// First-order `g2(tau, 0)` near the highest critical point for the fixed
/// initial state `(|j,j-1> + |j,j>)/sqrt(2)`.
pub fn g2_perturbative_high(params: &ModelParams, tau: f64) -> Result<f64> {
    if params.n_atoms() < 4 {
        return Err(Error::OutOfDomain {
            reason: format!("need N >= 4 so the m = j-3 level exists, got N = {}", params.n_atoms()),
        });
    }
    let sub = diag_subspace_high(params)?;
    let j = params.j();
    let two_j = 2.0 * j;
    let omega = params.rabi();
    let [eta1, eta2, eta3, eta4] = sub.eta;
    let f_c = sub.f_c;

    if sub.q == 0.0 {
        return Err(Error::DegenerateDenominator { value: 0.0 });
    }

    let o_jm2 = [
        phase_kernel(params.omega_m(j - 2.0) - sub.lambda[0], tau),
        phase_kernel(params.omega_m(j - 2.0) - sub.lambda[1], tau),
    ];

    let h1 = o_jm2[0] * (eta2 * eta3) - o_jm2[1] * (eta1 * eta4);
    let h2 = o_jm2[0] * (eta3 * (eta2 - eta4)) - o_jm2[1] * (eta4 * (eta1 - eta3));

    let a0 = (o_jm2[0].conj() - o_jm2[1].conj()) * (eta3 * eta4 * f_c);
    let a1 = C64::new(j.sqrt(), 0.0)
        - (o_jm2[0].conj() * (eta2 * eta3) - o_jm2[1].conj() * (eta1 * eta4)) * f_c;
    let a2 = (C64::new(1.0, 0.0) + h1 * (f_c * j.sqrt() / (two_j - 1.0)))
        * (two_j - 1.0).sqrt();
    let a3 = phase_kernel(params.omega_m(j - 3.0) - params.omega_m(j - 2.0), tau)
        * (omega * (3.0 * (two_j - 1.0) * (two_j - 2.0)).sqrt());
    let c2 = h2 * (f_c / (2.0 * (two_j - 1.0)).sqrt());

    let gap = params.omega_m(j - 1.0) - params.omega_m(j);
    let (q0, q) = (sub.q0, sub.q);
    let alpha = q0 / q * (q * tau).sin();
    let beta = q0 / (q * q) * gap * ((q * tau).cos() - 1.0);
    let gamma_coef = 2.0 * q0 / (q * q) * omega * two_j.sqrt() * ((q * tau).cos() - 1.0);

    let x1 = two_j * a0.norm_sqr();
    let x2 = 2.0 * (two_j - 1.0) * a1.norm_sqr();
    let x3 = 3.0 * (two_j - 2.0) * a2.norm_sqr();
    let x4 = 4.0 * (two_j - 3.0) * a3.norm_sqr();
    let x5 = -2.0 * alpha * (a0 * a1.conj()).im;
    let x6 = 2.0 * beta * (a0 * a1.conj()).re;
    let x7 = gamma_coef * (a0.norm_sqr() - a1.norm_sqr());

    let y1 = j;
    let y2 = two_j - 1.0;
    let y3 = 3.0 * (two_j - 2.0) * c2.norm_sqr();
    let y4 = beta;

    let y = y1 + y2 + y3 + y4;
    if y <= 1e-14 {
        return Err(Error::DegenerateDenominator { value: y });
    }
    Ok((x1 + x2 + x3 + x4 + x5 + x6 + x7) / ((3.0 * j - 1.0) * y))
}

/// Reconstruct both block eigenvectors of a subspace on the full basis;
/// shared by tests and the validity machinery.
pub fn low_block_eigenvectors(params: &ModelParams, sub: &SubspaceDiagLow) -> Result<CMatrix> {
    let basis = params.basis();
    let row0 = basis.row_of_m(HalfInteger::from_twice(0))?;
    let row1 = basis.row_of_m(HalfInteger::from_twice(2))?;
    let mut out = CMatrix::zeros(basis.dim(), 2);
    for r in 0..2 {
        out[(row0, r)] = C64::new(sub.xi[r] / sub.norm[r], 0.0);
        out[(row1, r)] = C64::new(1.0 / sub.norm[r], 0.0);
    }
    Ok(out)
}
