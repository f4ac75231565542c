//! State and UCP extensions as semidefinite programs.
//!
//! Positive functionals on S ⊆ M_m are handled through the matrix F ∈ S
//! with f(x) = tr(F x); every such f that extends to M_m at all extends to
//! a density matrix ρ with tr(ρ b) = f(b) on a basis of S.

pub mod sdp;

use serde::Serialize;

use crate::cpmaps::{CPMap, Domain, PositiveFunctional};
use crate::error::{Error, Result};
use crate::linalg::{kron, min_eigenvalue_hermitian_part, operator_norm, CMatrix, C64};
use crate::opsys::OperatorSystem;

pub use sdp::{Constraint, SdpProblem, SdpResult, SdpStatus};

/// Solves a semidefinite program; see [`sdp`].
pub fn sdp_solve(p: &SdpProblem) -> Result<SdpResult> {
    p.solve()
}

/// Tolerance below which a margin counts as zero.
pub const MARGIN_TOL: f64 = 1e-8;

/// A level-one functional on S viewed as (S, F) with f(x) = tr(F x).
#[derive(Clone, Debug)]
pub struct SystemFunctional {
    pub system: OperatorSystem,
    pub matrix: CMatrix,
}

impl SystemFunctional {
    pub fn from_functional(f: &PositiveFunctional) -> Result<Self> {
        if f.level() != 1 {
            return Err(Error::LevelMismatch {
                expected: 1,
                found: f.level(),
            });
        }
        let m = f.m();
        match f.domain() {
            Domain::Full(_) => Ok(Self {
                system: OperatorSystem::full(m),
                matrix: CMatrix::from_fn(m, m, |q, p| f.coefficient(p * m + q, 0, 0)),
            }),
            Domain::System(s) => {
                let mut fm = CMatrix::zeros(m, m);
                for (a, b) in s.basis().iter().enumerate() {
                    fm.axpy(f.coefficient(a, 0, 0), b);
                }
                Ok(Self {
                    system: s.clone(),
                    matrix: fm,
                })
            }
        }
    }

    /// The restriction of the state with density ρ to S.
    pub fn from_density(s: &OperatorSystem, rho: &CMatrix) -> Result<Self> {
        let values: Vec<C64> = s.basis().iter().map(|b| rho.trace_product(b)).collect();
        let mut fm = CMatrix::zeros(s.ambient_dim(), s.ambient_dim());
        for (b, v) in s.basis().iter().zip(&values) {
            fm.axpy(*v, b);
        }
        Ok(Self {
            system: s.clone(),
            matrix: fm,
        })
    }

    pub fn to_functional(&self) -> PositiveFunctional {
        let values = self.basis_values();
        PositiveFunctional::new(Domain::System(self.system.clone()), 1, values)
            .expect("one value per basis element")
    }

    /// f(b_a) for the basis of S.
    pub fn basis_values(&self) -> Vec<C64> {
        self.system
            .basis()
            .iter()
            .map(|b| self.matrix.trace_product(b))
            .collect()
    }

    pub fn value(&self, x: &CMatrix) -> C64 {
        self.matrix.trace_product(x)
    }

    fn m(&self) -> usize {
        self.system.ambient_dim()
    }

    /// Adds tr(ρ b_a) = f(b_a) on block `blk`.
    fn add_agreement(&self, p: &mut SdpProblem, blk: usize) {
        for (b, v) in self.system.basis().iter().zip(self.basis_values()) {
            p.add_complex_constraint(vec![(blk, b.clone())], v);
        }
    }
}

/// P_f(y) with its minimizing majorant.
#[derive(Clone, Debug, Serialize)]
pub struct MinkowskiResult {
    pub p_value: f64,
    pub witness: CMatrix,
    /// The infimum with the extra requirement y′ ⪯ ‖y‖·I.
    pub capped_value: f64,
}

/// P_f(y) = inf{ f(y′) : y′ ∈ S^h, y′ ⪰ y }.
pub fn minkowski_value(f: &SystemFunctional, y: &CMatrix) -> Result<MinkowskiResult> {
    let m = f.m();
    check_square(y, m)?;
    if !y.is_hermitian(1e-10) {
        return Err(Error::NotHermitian {
            residual: y.hermiticity_residual(),
        });
    }
    let y = y.hermitian_part();
    let complement = f.system.complement_basis();
    let base = f.value(&y).re;

    // Z = y′ − y ⪰ 0 with y + Z ∈ S.
    let mut p = SdpProblem::single(m);
    p.set_objective(0, f.matrix.hermitian_part());
    for c in &complement {
        p.add_constraint(vec![(0, c.clone())], -c.trace_product(&y).re);
    }
    let r = p.solve()?.into_optimal()?;
    let witness = &y + r.rho();

    // Same with W = ‖y‖I − y − Z ⪰ 0 as a second block.
    let norm = operator_norm(&y);
    let mut q = SdpProblem::new(vec![m, m]);
    q.set_objective(0, f.matrix.hermitian_part());
    for c in &complement {
        q.add_constraint(vec![(0, c.clone())], -c.trace_product(&y).re);
    }
    let gap = &CMatrix::identity(m).scale_real(norm) - &y;
    for i in 0..m {
        for j in 0..m {
            let e = CMatrix::unit(m, j, i);
            q.add_complex_constraint(vec![(0, e.clone()), (1, e)], gap[(i, j)]);
        }
    }
    let capped = q.solve()?.into_optimal()?;

    Ok(MinkowskiResult {
        p_value: base + r.value,
        witness,
        capped_value: base + capped.value,
    })
}

/// The range [β₁, β₂] of tr(ρx) over states ρ extending f, with optimizers.
#[derive(Clone, Debug, Serialize)]
pub struct ExtensionInterval {
    pub beta1: f64,
    pub beta2: f64,
    pub rho_min: CMatrix,
    pub rho_max: CMatrix,
    /// P_f(x), which must agree with β₂.
    pub p_value: f64,
    pub duality_residual: f64,
}

pub fn extension_interval(f: &SystemFunctional, x: &CMatrix) -> Result<ExtensionInterval> {
    let m = f.m();
    check_square(x, m)?;
    if x.frobenius_norm() == 0.0 {
        return Err(Error::InvalidInput("x must be a nonzero positive element".into()));
    }
    if !x.is_hermitian(1e-10) || min_eigenvalue_hermitian_part(x) < -1e-10 {
        return Err(Error::InvalidInput("x must be positive semidefinite".into()));
    }
    let x = x.hermitian_part();

    let solve = |sign: f64| -> Result<SdpResult> {
        let mut p = SdpProblem::single(m);
        p.set_objective(0, x.scale_real(sign));
        f.add_agreement(&mut p, 0);
        p.solve()?.into_optimal()
    };
    let lo = solve(1.0)?;
    let hi = solve(-1.0)?;
    let beta1 = lo.value;
    let beta2 = -hi.value;
    let mk = minkowski_value(f, &x)?;
    let duality_residual = (beta2 - mk.p_value).abs();
    if duality_residual > 1e-6 {
        return Err(Error::SolverFailure(format!(
            "β₂ = {beta2} disagrees with P_f(x) = {} by {duality_residual:.3e}",
            mk.p_value
        )));
    }
    if beta1 < -1e-7 || beta1 > beta2 + 1e-7 {
        return Err(Error::SolverFailure(format!(
            "interval [{beta1}, {beta2}] violates 0 ≤ β₁ ≤ β₂"
        )));
    }
    Ok(ExtensionInterval {
        beta1: beta1.max(0.0),
        beta2: beta2.max(beta1.max(0.0)),
        rho_min: lo.rho().hermitian_part(),
        rho_max: hi.rho().hermitian_part(),
        p_value: mk.p_value,
        duality_residual,
    })
}

/// A state on M_m extending f with tr(ρx) = α.
pub fn extend_functional(f: &SystemFunctional, x: &CMatrix, alpha: f64) -> Result<CMatrix> {
    let iv = extension_interval(f, x)?;
    let slack = 1e-9 * (1.0 + iv.beta2.abs());
    if alpha < iv.beta1 - slack || alpha > iv.beta2 + slack {
        return Err(Error::AlphaOutOfRange {
            alpha,
            beta1: iv.beta1,
            beta2: iv.beta2,
        });
    }
    let width = iv.beta2 - iv.beta1;
    if width <= 1e-12 {
        return Ok(iv.rho_max);
    }
    let theta = ((iv.beta2 - alpha) / width).clamp(0.0, 1.0);
    let mut rho = iv.rho_min.scale_real(theta);
    rho.axpy(C64::new(1.0 - theta, 0.0), &iv.rho_max);
    Ok(rho)
}

/// A state extension ρ of f maximizing its least eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct FaithfulState {
    pub rho: CMatrix,
    pub margin: f64,
}

pub fn faithful_state_extension(f: &SystemFunctional) -> Result<FaithfulState> {
    let m = f.m();
    // ρ = W + tI with W ⪰ 0, t ≥ 0; maximize t.
    let mut p = SdpProblem::new(vec![m, 1]);
    p.set_objective(1, CMatrix::identity(1).scale_real(-1.0));
    for (b, v) in f.system.basis().iter().zip(f.basis_values()) {
        let t = CMatrix::identity(1).scale(b.trace());
        p.add_complex_constraint(vec![(0, b.clone()), (1, t)], v);
    }
    let r = p.solve()?.into_optimal()?;
    let t = r.blocks[1][(0, 0)].re;
    let mut rho = r.blocks[0].hermitian_part();
    rho.axpy(C64::new(t, 0.0), &CMatrix::identity(m));
    let margin = min_eigenvalue_hermitian_part(&rho);
    if margin <= MARGIN_TOL {
        return Err(Error::NoFaithfulExtensionFound { margin });
    }
    Ok(FaithfulState { rho, margin })
}

/// Adds η(b)_jk = τ(b)_jk for the basis of S, where η is read off the
/// Choi block `blk` as η(x)_jk = tr((xᵀ ⊗ e_kj) C).
fn add_choi_agreement(p: &mut SdpProblem, blk: usize, tau: &CPMap) {
    let n = tau.n();
    let basis = tau.domain().basis();
    for (b, img) in basis.iter().zip(tau.basis_images()) {
        let bt = b.transpose();
        for j in 0..n {
            for k in 0..n {
                let k_mat = kron(&bt, &CMatrix::unit(n, k, j));
                p.add_complex_constraint(vec![(blk, k_mat)], img[(j, k)]);
            }
        }
    }
}

fn choi_to_map(m: usize, n: usize, c: &CMatrix) -> Result<CPMap> {
    CPMap::from_choi(m, n, &c.hermitian_part())
}

/// Some CP map on M_m agreeing with τ on S. Infeasible exactly when τ is
/// not completely positive on S.
pub fn arveson_extension(tau: &CPMap) -> Result<CPMap> {
    let (m, n) = (tau.m(), tau.n());
    let mut p = SdpProblem::single(m * n);
    add_choi_agreement(&mut p, 0, tau);
    let r = p.solve()?.into_optimal()?;
    choi_to_map(m, n, r.rho())
}

/// min tr(τ(z)) over z ∈ S_+ with tr z = 1.
pub fn system_faithfulness_margin(tau: &CPMap) -> Result<f64> {
    let Domain::System(s) = tau.domain() else {
        return crate::cpmaps::faithfulness_margin(tau);
    };
    let m = s.ambient_dim();
    let mut t = CMatrix::zeros(m, m);
    for (b, img) in s.basis().iter().zip(tau.basis_images()) {
        t.axpy(img.trace(), b);
    }
    let mut p = SdpProblem::single(m);
    p.set_objective(0, t.hermitian_part());
    p.add_constraint(vec![(0, CMatrix::identity(m))], 1.0);
    for c in s.complement_basis() {
        p.add_constraint(vec![(0, c)], 0.0);
    }
    let r = p.solve()?.into_optimal()?;
    Ok(r.value)
}

/// A faithful UCP map η: M_m → M_n extending τ, with the margin
/// λ_min(tr₂ C_η) attained.
#[derive(Clone, Debug)]
pub struct FaithfulExtension {
    pub eta: CPMap,
    pub margin: f64,
    pub agreement_residual: f64,
}

pub fn faithful_extension(tau: &CPMap) -> Result<FaithfulExtension> {
    let (m, n) = (tau.m(), tau.n());
    if let Domain::Full(_) = tau.domain() {
        let margin = crate::cpmaps::faithfulness_margin(tau)?;
        if margin <= MARGIN_TOL {
            return Err(Error::NoFaithfulExtensionFound { margin });
        }
        return Ok(FaithfulExtension {
            eta: tau.clone(),
            margin,
            agreement_residual: 0.0,
        });
    }
    let unital = tau.unital_residual()?;
    if unital > 1e-8 {
        return Err(Error::NotUnital { residual: unital });
    }
    let pre = system_faithfulness_margin(tau)?;
    if pre <= MARGIN_TOL {
        return Err(Error::NoFaithfulExtensionFound { margin: pre });
    }

    // Blocks: C (mn), W (m), t (1); W = tr₂(C) − tI, maximize t.
    let mut p = SdpProblem::new(vec![m * n, m, 1]);
    p.set_objective(2, CMatrix::identity(1).scale_real(-1.0));
    add_choi_agreement(&mut p, 0, tau);
    for a in 0..m {
        for b in 0..m {
            // tr((e_ba ⊗ I)C) − tr(e_ba W) − δ_ab t = 0
            let e = CMatrix::unit(m, b, a);
            let lhs = kron(&e, &CMatrix::identity(n));
            let t = CMatrix::identity(1).scale_real(if a == b { -1.0 } else { 0.0 });
            p.add_complex_constraint(vec![(0, lhs), (1, e.scale_real(-1.0)), (2, t)], C64::new(0.0, 0.0));
        }
    }
    let r = p.solve()?.into_optimal()?;
    let eta = choi_to_map(m, n, &r.blocks[0])?;
    let margin = crate::cpmaps::faithfulness_margin(&eta)?;
    if margin <= MARGIN_TOL {
        return Err(Error::NoFaithfulExtensionFound { margin });
    }
    let agreement_residual = agreement_residual(&eta, tau)?;
    Ok(FaithfulExtension {
        eta,
        margin,
        agreement_residual,
    })
}

/// max over the basis of S of ‖η(b) − τ(b)‖.
pub fn agreement_residual(eta: &CPMap, tau: &CPMap) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (b, img) in tau.domain().basis().iter().zip(tau.basis_images()) {
        worst = worst.max(operator_norm(&(&eta.apply(b)? - img)));
    }
    Ok(worst)
}

/// Outcome of [`invariance_constrained_extension`].
#[derive(Clone, Debug)]
pub enum InvarianceOutcome {
    Feasible(CPMap),
    Infeasible {
        /// Farkas multipliers on the constraint rows.
        certificate: Vec<f64>,
        certificate_value: f64,
    },
}

/// A UCP η: M_m → M_n extending τ with tr₀(η(d)) = tr(ρ d) for every d in
/// `domain` (all of M_m when `None`).
pub fn invariance_constrained_extension(
    tau: &CPMap,
    phi0: &CMatrix,
    domain: Option<&OperatorSystem>,
) -> Result<InvarianceOutcome> {
    let (m, n) = (tau.m(), tau.n());
    check_square(phi0, m)?;
    let basis: Vec<CMatrix> = match domain {
        Some(d) => d.basis().to_vec(),
        None => Domain::Full(m).basis(),
    };
    if let Domain::Full(_) = tau.domain() {
        let drift = basis
            .iter()
            .map(|d| Ok((tau.apply(d)?.trace() / n as f64 - phi0.trace_product(d)).norm()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if drift <= 1e-9 {
            return Ok(InvarianceOutcome::Feasible(tau.clone()));
        }
    }
    let mut p = SdpProblem::single(m * n);
    add_choi_agreement(&mut p, 0, tau);
    for d in &basis {
        // tr(η(d)) = tr((dᵀ ⊗ I) C) = n·tr(ρ d)
        let k_mat = kron(&d.transpose(), &CMatrix::identity(n));
        p.add_complex_constraint(vec![(0, k_mat)], phi0.trace_product(d) * n as f64);
    }
    let r = p.solve()?;
    match r.status {
        SdpStatus::Optimal => Ok(InvarianceOutcome::Feasible(choi_to_map(m, n, r.rho())?)),
        SdpStatus::Infeasible => {
            let certificate = r.certificate.clone().unwrap_or_default();
            if !p.certificate_is_valid(&certificate) {
                return Err(Error::SolverFailure("certificate failed validation".into()));
            }
            Ok(InvarianceOutcome::Infeasible {
                certificate,
                certificate_value: r.certificate_value,
            })
        }
        SdpStatus::NumericalFailure => Err(Error::SolverFailure(r.message)),
    }
}

/// The 2×2 block system over the commutative algebra of diagonal 2×2
/// matrices, with the map (λ, g; h, μ) ↦ (λ, m(g); m(h), μ).
#[derive(Clone, Debug)]
pub struct BlockStateExample {
    /// UCP map on S ⊆ M_2(D_2) ⊆ M_4.
    pub tau: CPMap,
    /// Density of X ↦ (φ₀(x₁₁) + φ₀(x₂₂))/2 on M_4.
    pub phi_density: CMatrix,
    /// M_2(D_2), where the invariance constraint is imposed.
    pub invariance_domain: OperatorSystem,
}

/// Builds the example for states m and φ₀ on D_2 given by their weights.
pub fn block_state_example(m_weights: [f64; 2], phi0: [f64; 2]) -> Result<BlockStateExample> {
    let e = |i, j| CMatrix::unit(2, i, j);
    let mut gens = vec![kron(&e(0, 0), &CMatrix::identity(2)), kron(&e(1, 1), &CMatrix::identity(2))];
    for a in 0..2 {
        gens.push(kron(&e(0, 1), &e(a, a)));
        gens.push(kron(&e(1, 0), &e(a, a)));
    }
    let s = OperatorSystem::new(gens, 4)?;
    let block = |x: &CMatrix, j: usize, k: usize| x.sub_block(2 * j, 2 * k, 2, 2);
    let mstate = |g: &CMatrix| g[(0, 0)] * m_weights[0] + g[(1, 1)] * m_weights[1];
    let images = s
        .basis()
        .iter()
        .map(|x| {
            CMatrix::from_rows(&[
                vec![block(x, 0, 0).trace() / 2.0, mstate(&block(x, 0, 1))],
                vec![mstate(&block(x, 1, 0)), block(x, 1, 1).trace() / 2.0],
            ])
        })
        .collect();
    let tau = CPMap::new(Domain::System(s), 2, images)?;

    let mut dgens = Vec::new();
    for j in 0..2 {
        for k in 0..2 {
            for a in 0..2 {
                dgens.push(kron(&e(j, k), &e(a, a)));
            }
        }
    }
    let invariance_domain = OperatorSystem::new(dgens, 4)?;
    let d = [phi0[0] / 2.0, phi0[1] / 2.0, phi0[0] / 2.0, phi0[1] / 2.0];
    Ok(BlockStateExample {
        tau,
        phi_density: CMatrix::diag_real(&d),
        invariance_domain,
    })
}

fn check_square(x: &CMatrix, m: usize) -> Result<()> {
    if x.rows() != m || x.cols() != m {
        return Err(Error::DimensionMismatch(format!(
            "element is {}x{}, expected {m}x{m}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}
