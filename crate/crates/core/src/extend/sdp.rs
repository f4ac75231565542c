//! Small dense semidefinite programs over complex Hermitian blocks.
//!
//! Primal: minimize Σ_b tr(C_b X_b) subject to Σ_b tr(A_ib X_b) = b_i and
//! X_b ⪰ 0. Solved by a primal–dual interior point method (HKM direction,
//! Mehrotra predictor–corrector). Linearly dependent constraints are removed
//! first; an inconsistent dependency is reported as infeasible right away.
//! When the main iteration fails, a phase-one problem with slack variables
//! decides feasibility and supplies a Farkas certificate y with
//! −Σ y_i A_i ⪰ 0 and bᵀy > 0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, eig_hermitian_part, inverse_pd, lower_inverse, min_eigenvalue_hermitian_part,
    solve_symmetric, CMatrix, C64,
};

const MAX_ITER: usize = 120;
const STEP_FACTOR: f64 = 0.95;
const PHASE_ONE_THRESHOLD: f64 = 1e-6;

/// One equality constraint Σ_b tr(A_b X_b) = rhs, sparse over blocks.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub terms: Vec<(usize, CMatrix)>,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    blocks: Vec<usize>,
    objective: Vec<CMatrix>,
    constraints: Vec<Constraint>,
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SdpResult {
    pub status: SdpStatus,
    /// Primal blocks X_b (zeros unless optimal).
    pub blocks: Vec<CMatrix>,
    /// Dual multipliers, one per constraint as added.
    pub y: Vec<f64>,
    pub value: f64,
    pub dual_value: f64,
    /// Farkas multipliers when infeasible.
    pub certificate: Option<Vec<f64>>,
    /// bᵀy of the certificate (positive when infeasible).
    pub certificate_value: f64,
    /// Largest |Σ tr(A_ib X_b) − b_i| on the original constraints.
    pub primal_residual: f64,
    pub iterations: usize,
    pub message: String,
}

impl SdpResult {
    pub fn rho(&self) -> &CMatrix {
        &self.blocks[0]
    }

    /// Turns a non-optimal status into the matching error.
    pub fn into_optimal(self) -> Result<SdpResult> {
        match self.status {
            SdpStatus::Optimal => Ok(self),
            SdpStatus::Infeasible => Err(Error::Infeasible {
                certificate_value: self.certificate_value,
            }),
            SdpStatus::NumericalFailure => Err(Error::SolverFailure(self.message)),
        }
    }
}

impl SdpProblem {
    /// Problem over PSD blocks of the given sizes with zero objective.
    pub fn new(blocks: Vec<usize>) -> Self {
        let objective = blocks.iter().map(|&d| CMatrix::zeros(d, d)).collect();
        Self {
            blocks,
            objective,
            constraints: Vec::new(),
            tol: 1e-9,
        }
    }

    pub fn single(dim: usize) -> Self {
        Self::new(vec![dim])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[CMatrix] {
        &self.objective
    }

    pub fn set_objective(&mut self, block: usize, c: CMatrix) {
        self.objective[block] = c;
    }

    /// Adds Σ tr(A_b X_b) = rhs with Hermitian A_b.
    pub fn add_constraint(&mut self, terms: Vec<(usize, CMatrix)>, rhs: f64) {
        self.constraints.push(Constraint { terms, rhs });
    }

    /// Adds Σ tr(K_b X_b) = w for arbitrary complex K_b, as the two real
    /// constraints given by the Hermitian parts (K + K*)/2 and (K − K*)/(2i).
    pub fn add_complex_constraint(&mut self, terms: Vec<(usize, CMatrix)>, w: C64) {
        let mut re = Vec::with_capacity(terms.len());
        let mut im = Vec::with_capacity(terms.len());
        for (b, k) in terms {
            let ks = k.adjoint();
            re.push((b, (&k + &ks).scale_real(0.5)));
            im.push((b, (&k - &ks).scale(C64::new(0.0, -0.5))));
        }
        self.add_constraint(re, w.re);
        self.add_constraint(im, w.im);
    }

    /// Σ_b tr(A_b X_b) for one constraint.
    pub fn constraint_value(&self, i: usize, x: &[CMatrix]) -> f64 {
        self.constraints[i]
            .terms
            .iter()
            .map(|(b, a)| a.trace_product(&x[*b]).re)
            .sum()
    }

    pub fn max_residual(&self, x: &[CMatrix]) -> f64 {
        (0..self.constraints.len())
            .map(|i| (self.constraint_value(i, x) - self.constraints[i].rhs).abs())
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        for (b, c) in self.objective.iter().enumerate() {
            check_term(self.blocks[b], c)?;
        }
        for con in &self.constraints {
            for (b, a) in &con.terms {
                let d = *self.blocks.get(*b).ok_or_else(|| {
                    Error::DimensionMismatch(format!("constraint references block {b}"))
                })?;
                check_term(d, a)?;
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<SdpResult> {
        self.validate()?;
        let k = self.blocks.len();
        let c: Vec<CMatrix> = self.objective.iter().map(|m| m.hermitian_part()).collect();

        // Dense, row-normalized constraint data.
        let mut rows: Vec<Vec<Option<CMatrix>>> = Vec::new();
        let mut rhs = Vec::new();
        let mut scales = Vec::new();
        for con in &self.constraints {
            let mut row: Vec<Option<CMatrix>> = vec![None; k];
            for (b, a) in &con.terms {
                let a = a.hermitian_part();
                row[*b] = Some(match row[*b].take() {
                    Some(prev) => &prev + &a,
                    None => a,
                });
            }
            let norm = row
                .iter()
                .flatten()
                .map(|a| a.frobenius_norm().powi(2))
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                if con.rhs.abs() > 1e-12 {
                    // 0 = rhs: y = sign(rhs) on this row is a certificate.
                    return Ok(self.infeasible_zero_row(rows.len(), con.rhs));
                }
                rows.push(vec![None; k]);
                rhs.push(0.0);
                scales.push(0.0);
                continue;
            }
            rows.push(
                row.into_iter()
                    .map(|a| a.map(|a| a.scale_real(1.0 / norm)))
                    .collect(),
            );
            rhs.push(con.rhs / norm);
            scales.push(norm);
        }

        let dep = match reduce_dependencies(&rows, &rhs, &scales) {
            Reduction::Keep(kept) => kept,
            Reduction::Inconsistent { row, combo, gap } => {
                let y = combo_certificate(&scales, row, &combo, gap);
                let mut res = self.empty_result(SdpStatus::Infeasible);
                res.certificate_value = y
                    .iter()
                    .zip(&self.constraints)
                    .map(|(yi, con)| yi * con.rhs)
                    .sum();
                res.certificate = Some(y);
                res.message = "linearly dependent constraints with inconsistent right-hand sides".into();
                return Ok(res);
            }
        };
        let a_red: Vec<Vec<Option<CMatrix>>> = dep.iter().map(|&i| rows[i].clone()).collect();
        let b_red: Vec<f64> = dep.iter().map(|&i| rhs[i]).collect();

        let data = IpmData {
            dims: self.blocks.clone(),
            c: c.clone(),
            a: a_red.clone(),
            b: b_red.clone(),
        };
        let out = ipm(&data, self.tol);
        if out.converged {
            let mut y = vec![0.0; self.constraints.len()];
            for (slot, &i) in dep.iter().enumerate() {
                y[i] = out.y[slot] / scales[i];
            }
            let resid = self.max_residual(&out.x);
            let rhs_scale = self
                .constraints
                .iter()
                .map(|c| c.rhs.abs())
                .fold(1.0, f64::max);
            let min_eig = out
                .x
                .iter()
                .map(min_eigenvalue_hermitian_part)
                .fold(f64::INFINITY, f64::min);
            let ok = resid <= 1e-6 * rhs_scale && min_eig >= -1e-8;
            return Ok(SdpResult {
                status: if ok {
                    SdpStatus::Optimal
                } else {
                    SdpStatus::NumericalFailure
                },
                blocks: out.x,
                y,
                value: out.pobj,
                dual_value: out.dobj,
                certificate: None,
                certificate_value: 0.0,
                primal_residual: resid,
                iterations: out.iterations,
                message: if ok {
                    "converged".into()
                } else {
                    format!("converged point fails validation (residual {resid:.3e}, min eig {min_eig:.3e})")
                },
            });
        }

        // Phase one: minimize Σ(p_i + q_i) with A(X) + p − q = b.
        let r = b_red.len();
        let mut dims = self.blocks.clone();
        dims.push(2 * r);
        let mut c1: Vec<CMatrix> = self.blocks.iter().map(|&d| CMatrix::zeros(d, d)).collect();
        c1.push(CMatrix::identity(2 * r));
        let a1: Vec<Vec<Option<CMatrix>>> = a_red
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut row = row.clone();
                let mut slack = CMatrix::zeros(2 * r, 2 * r);
                slack[(i, i)] = C64::new(1.0, 0.0);
                slack[(r + i, r + i)] = C64::new(-1.0, 0.0);
                row.push(Some(slack));
                row
            })
            .collect();
        let phase1 = IpmData {
            dims,
            c: c1,
            a: a1,
            b: b_red.clone(),
        };
        let out1 = ipm(&phase1, self.tol);
        if !out1.converged {
            let mut res = self.empty_result(SdpStatus::NumericalFailure);
            res.iterations = out.iterations + out1.iterations;
            res.message = format!("interior point iteration failed: {}", out.reason);
            return Ok(res);
        }
        if out1.pobj > PHASE_ONE_THRESHOLD {
            let mut y = vec![0.0; self.constraints.len()];
            for (slot, &i) in dep.iter().enumerate() {
                y[i] = out1.y[slot] / scales[i];
            }
            let value: f64 = y
                .iter()
                .zip(&self.constraints)
                .map(|(yi, con)| yi * con.rhs)
                .sum();
            let mut res = self.empty_result(SdpStatus::Infeasible);
            res.iterations = out.iterations + out1.iterations;
            if self.certificate_is_valid(&y) {
                res.certificate = Some(y);
                res.certificate_value = value;
                res.message = format!("phase-one optimum {:.3e}", out1.pobj);
            } else {
                res.status = SdpStatus::NumericalFailure;
                res.message = "infeasibility certificate failed validation".into();
            }
            return Ok(res);
        }
        let x: Vec<CMatrix> = out1.x[..self.blocks.len()].to_vec();
        let objective_is_zero = c.iter().all(|m| m.max_abs() == 0.0);
        let resid = self.max_residual(&x);
        if objective_is_zero && resid <= 1e-6 {
            let mut y = vec![0.0; self.constraints.len()];
            for (slot, &i) in dep.iter().enumerate() {
                y[i] = out1.y[slot] / scales[i];
            }
            return Ok(SdpResult {
                status: SdpStatus::Optimal,
                blocks: x,
                y,
                value: 0.0,
                dual_value: 0.0,
                certificate: None,
                certificate_value: 0.0,
                primal_residual: resid,
                iterations: out.iterations + out1.iterations,
                message: "feasible point from phase one".into(),
            });
        }
        let mut res = self.empty_result(SdpStatus::NumericalFailure);
        res.iterations = out.iterations + out1.iterations;
        res.message = format!(
            "problem is feasible (phase one {:.3e}) but the optimization did not converge: {}",
            out1.pobj, out.reason
        );
        Ok(res)
    }

    /// Checks −Σ y_i A_i ⪰ 0 and bᵀy > 0 on the original data.
    pub fn certificate_is_valid(&self, y: &[f64]) -> bool {
        if y.len() != self.constraints.len() {
            return false;
        }
        let by: f64 = y
            .iter()
            .zip(&self.constraints)
            .map(|(yi, c)| yi * c.rhs)
            .sum();
        if by <= 1e-9 {
            return false;
        }
        let mut s: Vec<CMatrix> = self.blocks.iter().map(|&d| CMatrix::zeros(d, d)).collect();
        for (yi, con) in y.iter().zip(&self.constraints) {
            for (b, a) in &con.terms {
                s[*b].axpy(C64::new(-yi, 0.0), &a.hermitian_part());
            }
        }
        let worst = s
            .iter()
            .map(min_eigenvalue_hermitian_part)
            .fold(f64::INFINITY, f64::min);
        worst >= -1e-7 * by.max(1.0)
    }

    fn empty_result(&self, status: SdpStatus) -> SdpResult {
        SdpResult {
            status,
            blocks: self.blocks.iter().map(|&d| CMatrix::zeros(d, d)).collect(),
            y: vec![0.0; self.constraints.len()],
            value: f64::NAN,
            dual_value: f64::NAN,
            certificate: None,
            certificate_value: 0.0,
            primal_residual: f64::NAN,
            iterations: 0,
            message: String::new(),
        }
    }

    fn infeasible_zero_row(&self, row: usize, rhs: f64) -> SdpResult {
        let mut y = vec![0.0; self.constraints.len()];
        y[row] = rhs.signum();
        let value = rhs.abs();
        let mut res = self.empty_result(SdpStatus::Infeasible);
        res.certificate = Some(y);
        res.certificate_value = value;
        res.message = "constraint 0 = b with b ≠ 0".into();
        res
    }
}

fn check_term(d: usize, a: &CMatrix) -> Result<()> {
    if a.rows() != d || a.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "term is {}x{}, block has size {d}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_hermitian(1e-9) {
        return Err(Error::NotHermitian {
            residual: a.hermiticity_residual(),
        });
    }
    Ok(())
}

enum Reduction {
    Keep(Vec<usize>),
    /// Row `row` equals Σ combo_k · row_k but the right-hand sides differ by `gap`.
    Inconsistent {
        row: usize,
        combo: Vec<(usize, f64)>,
        gap: f64,
    },
}

/// Gram–Schmidt over the real vectorized (normalized) constraints.
fn reduce_dependencies(rows: &[Vec<Option<CMatrix>>], rhs: &[f64], scales: &[f64]) -> Reduction {
    // Vectors differ in length when blocks are absent; pad per block.
    let block_lens: Vec<usize> = (0..rows.first().map_or(0, |r| r.len()))
        .map(|b| {
            rows.iter()
                .find_map(|r| r[b].as_ref().map(|a| 2 * a.rows() * a.cols()))
                .unwrap_or(0)
        })
        .collect();
    let dense: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            let mut v = Vec::with_capacity(block_lens.iter().sum());
            for (b, a) in row.iter().enumerate() {
                match a {
                    Some(a) => v.extend(a.to_real_vec()),
                    None => v.extend(std::iter::repeat(0.0).take(block_lens[b])),
                }
            }
            v
        })
        .collect();

    let mut q: Vec<Vec<f64>> = Vec::new();
    // q_j = Σ_k t[j][k] · row(kept[k])
    let mut t: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for (i, v) in dense.iter().enumerate() {
        if scales[i] == 0.0 {
            continue;
        }
        let mut r = v.clone();
        let mut coeff = vec![0.0; q.len()];
        for _pass in 0..2 {
            for (j, qj) in q.iter().enumerate() {
                let d: f64 = qj.iter().zip(&r).map(|(a, b)| a * b).sum();
                coeff[j] += d;
                for (x, y) in r.iter_mut().zip(qj) {
                    *x -= d * y;
                }
            }
        }
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            // New direction: q_new = (v − Σ coeff_j q_j)/norm.
            let mut tn = vec![0.0; kept.len() + 1];
            tn[kept.len()] = 1.0 / norm;
            for (j, cj) in coeff.iter().enumerate() {
                for (k, tjk) in t[j].iter().enumerate() {
                    tn[k] -= cj * tjk / norm;
                }
            }
            for row in t.iter_mut() {
                row.push(0.0);
            }
            t.push(tn);
            q.push(r.iter().map(|x| x / norm).collect());
            kept.push(i);
        } else {
            // v ≈ Σ_j coeff_j q_j = Σ_k (Σ_j coeff_j t[j][k]) row(kept[k]).
            let mut combo = vec![0.0; kept.len()];
            for (j, cj) in coeff.iter().enumerate() {
                for (k, tjk) in t[j].iter().enumerate() {
                    combo[k] += cj * tjk;
                }
            }
            let predicted: f64 = combo.iter().zip(&kept).map(|(c, &k)| c * rhs[k]).sum();
            let gap = rhs[i] - predicted;
            let size = 1.0 + rhs[i].abs() + combo.iter().map(|c| c.abs()).sum::<f64>();
            if gap.abs() > 1e-8 * size {
                return Reduction::Inconsistent {
                    row: i,
                    combo: kept.iter().copied().zip(combo).collect(),
                    gap,
                };
            }
        }
    }
    Reduction::Keep(kept)
}

/// Certificate for an inconsistent dependency on the original (unscaled)
/// constraints: Σ y_i A_i = 0 and bᵀy = |gap|·(scale) > 0.
fn combo_certificate(scales: &[f64], row: usize, combo: &[(usize, f64)], gap: f64) -> Vec<f64> {
    let mut y = vec![0.0; scales.len()];
    let s = gap.signum();
    // Normalized rows: â_row − Σ c_k â_k = 0 and b̂_row − Σ c_k b̂_k = gap.
    y[row] = s / scales[row];
    for &(k, c) in combo {
        y[k] -= s * c / scales[k];
    }
    y
}

struct IpmData {
    dims: Vec<usize>,
    c: Vec<CMatrix>,
    a: Vec<Vec<Option<CMatrix>>>,
    b: Vec<f64>,
}

struct IpmOutcome {
    converged: bool,
    x: Vec<CMatrix>,
    y: Vec<f64>,
    pobj: f64,
    dobj: f64,
    iterations: usize,
    reason: String,
}

impl IpmData {
    fn apply_a(&self, x: &[CMatrix]) -> Vec<f64> {
        self.a
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .filter_map(|(a, xb)| a.as_ref().map(|a| a.trace_product(xb).re))
                    .sum()
            })
            .collect()
    }

    fn apply_at(&self, y: &[f64]) -> Vec<CMatrix> {
        let mut out: Vec<CMatrix> = self.dims.iter().map(|&d| CMatrix::zeros(d, d)).collect();
        for (row, yi) in self.a.iter().zip(y) {
            for (b, a) in row.iter().enumerate() {
                if let Some(a) = a {
                    out[b].axpy(C64::new(*yi, 0.0), a);
                }
            }
        }
        out
    }
}

fn inner(x: &[CMatrix], z: &[CMatrix]) -> f64 {
    x.iter().zip(z).map(|(a, b)| a.trace_product(b).re).sum()
}

fn frob(x: &[CMatrix]) -> f64 {
    x.iter().map(|a| a.frobenius_norm().powi(2)).sum::<f64>().sqrt()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest α with X + αΔX ⪰ 0, per block.
fn max_step(x: &[CMatrix], dx: &[CMatrix]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        let l = cholesky(xb)?;
        let li = lower_inverse(&l);
        let t = &(&li * db) * &li.adjoint();
        let eig = eig_hermitian_part(&t).ok()?;
        let lo = eig.values[0];
        if lo < 0.0 {
            alpha = alpha.min(-1.0 / lo);
        }
    }
    Some(alpha)
}

fn ipm(data: &IpmData, tol: f64) -> IpmOutcome {
    let p = data.b.len();
    let nblk = data.dims.len();
    let total_dim: usize = data.dims.iter().sum();
    let nn = total_dim as f64;

    // Starting point in the style of SDPT3.
    let mut x = Vec::with_capacity(nblk);
    let mut z = Vec::with_capacity(nblk);
    for (bidx, &d) in data.dims.iter().enumerate() {
        let sd = (d as f64).sqrt();
        let mut xi: f64 = 10.0f64.max(sd);
        let mut eta: f64 = 10.0f64.max(sd).max(data.c[bidx].frobenius_norm());
        for (row, bi) in data.a.iter().zip(&data.b) {
            if let Some(a) = &row[bidx] {
                let an = a.frobenius_norm();
                xi = xi.max(sd * (1.0 + bi.abs()) / (1.0 + an));
                eta = eta.max(an);
            }
        }
        x.push(CMatrix::identity(d).scale_real(xi));
        z.push(CMatrix::identity(d).scale_real(eta));
    }
    let mut y = vec![0.0; p];

    let bnorm = norm2(&data.b);
    let cnorm = frob(&data.c);
    let mut reason = String::from("iteration budget exhausted");
    let mut small_steps = 0;

    for iter in 0..MAX_ITER {
        let ax = data.apply_a(&x);
        let rp: Vec<f64> = data.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = data.apply_at(&y);
        let rd: Vec<CMatrix> = (0..nblk)
            .map(|b| &(&data.c[b] - &z[b]) - &aty[b])
            .collect();
        let pobj = inner(&data.c, &x);
        let dobj: f64 = data.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let mu = inner(&x, &z) / nn;
        let pinf = norm2(&rp) / (1.0 + bnorm);
        let dinf = frob(&rd) / (1.0 + cnorm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let comp = inner(&x, &z) / (1.0 + pobj.abs() + dobj.abs());
        if pinf < tol && dinf < tol && gap < tol && comp < 10.0 * tol {
            return IpmOutcome {
                converged: true,
                x,
                y,
                pobj,
                dobj,
                iterations: iter,
                reason: "converged".into(),
            };
        }
        let xnorm = frob(&x);
        if !xnorm.is_finite() || xnorm > 1e12 || norm2(&y) > 1e12 {
            reason = "iterates diverged".into();
            break;
        }

        let zinv: Option<Vec<CMatrix>> = z.iter().map(inverse_pd).collect();
        let Some(zinv) = zinv else {
            reason = "dual slack lost definiteness".into();
            break;
        };

        // Schur complement M_ij = Re tr(A_i X A_j Z⁻¹).
        let mut w: Vec<Vec<Option<CMatrix>>> = Vec::with_capacity(p);
        for row in &data.a {
            w.push(
                row.iter()
                    .enumerate()
                    .map(|(b, a)| a.as_ref().map(|a| &(&x[b] * a) * &zinv[b]))
                    .collect(),
            );
        }
        let mut m = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let mut s = 0.0;
                for b in 0..nblk {
                    if let (Some(ai), Some(wj)) = (&data.a[i][b], &w[j][b]) {
                        s += ai.trace_product(wj).re;
                    }
                }
                m[i * p + j] = s;
                m[j * p + i] = s;
            }
        }
        let diag_max = (0..p).map(|i| m[i * p + i].abs()).fold(0.0, f64::max);
        for i in 0..p {
            m[i * p + i] += 1e-15 * diag_max.max(1e-300);
        }

        let direction = |sigma: f64,
                         corr: Option<(&[CMatrix], &[CMatrix])>|
         -> Option<(Vec<CMatrix>, Vec<f64>, Vec<CMatrix>)> {
            let r: Vec<CMatrix> = (0..nblk)
                .map(|b| {
                    let mut r = zinv[b].scale_real(sigma * mu);
                    r -= &x[b];
                    r -= &(&(&x[b] * &rd[b]) * &zinv[b]);
                    if let Some((dxa, dza)) = corr {
                        r -= &(&(&dxa[b] * &dza[b]) * &zinv[b]);
                    }
                    r
                })
                .collect();
            let ar = data.apply_a(&r);
            let rhs: Vec<f64> = rp.iter().zip(&ar).map(|(a, b)| a - b).collect();
            let dy = if p == 0 {
                Vec::new()
            } else {
                solve_symmetric(&m, &rhs)?
            };
            let atdy = data.apply_at(&dy);
            let dz: Vec<CMatrix> = (0..nblk).map(|b| &rd[b] - &atdy[b]).collect();
            let dx: Vec<CMatrix> = (0..nblk)
                .map(|b| (&r[b] + &(&(&x[b] * &atdy[b]) * &zinv[b])).hermitian_part())
                .collect();
            Some((dx, dy, dz))
        };

        let Some((dxa, _dya, dza)) = direction(0.0, None) else {
            reason = "Schur complement is singular".into();
            break;
        };
        let (Some(ap), Some(ad)) = (max_step(&x, &dxa), max_step(&z, &dza)) else {
            reason = "lost definiteness in step computation".into();
            break;
        };
        let ap_aff = ap.min(1.0);
        let ad_aff = ad.min(1.0);
        let xa: Vec<CMatrix> = (0..nblk)
            .map(|b| {
                let mut t = x[b].clone();
                t.axpy(C64::new(ap_aff, 0.0), &dxa[b]);
                t
            })
            .collect();
        let za: Vec<CMatrix> = (0..nblk)
            .map(|b| {
                let mut t = z[b].clone();
                t.axpy(C64::new(ad_aff, 0.0), &dza[b]);
                t
            })
            .collect();
        let mu_aff = inner(&xa, &za) / nn;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let Some((dx, dy, dz)) = direction(sigma, Some((&dxa, &dza))) else {
            reason = "Schur complement is singular".into();
            break;
        };
        let (Some(ap), Some(ad)) = (max_step(&x, &dx), max_step(&z, &dz)) else {
            reason = "lost definiteness in step computation".into();
            break;
        };
        let ap = (STEP_FACTOR * ap).min(1.0);
        let ad = (STEP_FACTOR * ad).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            small_steps += 1;
            if small_steps > 3 {
                reason = "step lengths collapsed".into();
                break;
            }
        } else {
            small_steps = 0;
        }
        for b in 0..nblk {
            x[b].axpy(C64::new(ap, 0.0), &dx[b]);
            x[b] = x[b].hermitian_part();
            z[b].axpy(C64::new(ad, 0.0), &dz[b]);
            z[b] = z[b].hermitian_part();
        }
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += ad * d;
        }
    }
    let pobj = inner(&data.c, &x);
    let dobj: f64 = data.b.iter().zip(&y).map(|(b, y)| b * y).sum();
    IpmOutcome {
        converged: false,
        x,
        y,
        pobj,
        dobj,
        iterations: MAX_ITER,
        reason,
    }
}
