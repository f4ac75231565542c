//! Complete order isomorphisms, unitary equivalence and their invariants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpmaps::{block_of, from_blocks, CPMap, Domain};
use crate::error::{Error, Result};
use crate::haar::haar_unitary;
use crate::linalg::{
    self, hermitian_eig, hermitian_unit_basis, inverse, kron, min_eigenvalue_hermitian_part,
    operator_norm, polar_unitary, solve_symmetric, CMatrix, C64,
};
use crate::opsys::{FunctionSystem, OperatorSystem};

/// x_k(λ) = ‖λI_{km} + J_k ⊗ x‖ with J_k the all-ones k×k matrix.
///
/// J_k is unitarily equivalent to diag(k, 0, …, 0), so the matrix splits as
/// (λI + kx) ⊕ λI_{(k−1)m}.
pub fn invariant(x: &CMatrix, k: usize, lambda: C64) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    let mut shifted = x.scale_real(k as f64);
    shifted += &CMatrix::identity(x.rows()).scale(lambda);
    let top = operator_norm(&shifted);
    if k == 1 {
        top
    } else {
        top.max(lambda.norm())
    }
}

/// The km×km matrix λI + J_k ⊗ x, for brute-force comparison.
pub fn invariant_matrix(x: &CMatrix, k: usize, lambda: C64) -> CMatrix {
    let ones = CMatrix::from_fn(k, k, |_, _| C64::new(1.0, 0.0));
    let mut big = kron(&ones, x);
    big += &CMatrix::identity(k * x.rows()).scale(lambda);
    big
}

/// One value x_k(λ).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct InvariantSample {
    pub k: usize,
    /// λ as [re, im].
    pub lambda: [f64; 2],
    pub value: f64,
}

/// Sampled values of x_k(λ).
#[derive(Clone, Debug, Serialize)]
pub struct InvariantProfile {
    pub x: CMatrix,
    pub samples: Vec<InvariantSample>,
}

/// λ ∈ {0, ±1, ±i, 1+i} scaled by 1 and by ‖x‖, together with k ∈ 1..=kmax.
pub fn default_grid(x: &CMatrix, kmax: usize) -> (Vec<usize>, Vec<C64>) {
    let base = [
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, -1.0),
        C64::new(1.0, 1.0),
    ];
    let norm = operator_norm(x);
    let mut lambdas: Vec<C64> = base.to_vec();
    if (norm - 1.0).abs() > 1e-12 && norm > 0.0 {
        lambdas.extend(base.iter().skip(1).map(|l| l * norm));
    }
    ((1..=kmax).collect(), lambdas)
}

pub fn invariant_profile(x: &CMatrix, ks: &[usize], lambdas: &[C64]) -> InvariantProfile {
    let mut samples = Vec::with_capacity(ks.len() * lambdas.len());
    for &k in ks {
        for &l in lambdas {
            samples.push(InvariantSample {
                k,
                lambda: [l.re, l.im],
                value: invariant(x, k, l),
            });
        }
    }
    InvariantProfile {
        x: x.clone(),
        samples,
    }
}

/// Whether x_k(λ) and y_k(λ) agree within `tol` on the whole grid. Only a
/// necessary condition for an isomorphism carrying x to y.
pub fn invariants_match(x: &CMatrix, y: &CMatrix, ks: &[usize], lambdas: &[C64], tol: f64) -> bool {
    first_mismatch(x, y, ks, lambdas, tol).is_none()
}

/// First grid point where the profiles differ by more than `tol`.
pub fn first_mismatch(
    x: &CMatrix,
    y: &CMatrix,
    ks: &[usize],
    lambdas: &[C64],
    tol: f64,
) -> Option<(usize, C64, f64, f64)> {
    for &k in ks {
        for &l in lambdas {
            let (a, b) = (invariant(x, k, l), invariant(y, k, l));
            if (a - b).abs() > tol {
                return Some((k, l, a, b));
            }
        }
    }
    None
}

/// A unital linear map between operator systems, given on the source basis.
#[derive(Clone, Debug)]
pub struct OrderIsoSpec {
    pub source: OperatorSystem,
    pub target: OperatorSystem,
    pub images: Vec<CMatrix>,
}

/// Outcome of [`check_complete_order_iso`].
#[derive(Clone, Debug, Serialize)]
pub struct IsoReport {
    pub unital_residual: f64,
    pub forward_cp: bool,
    pub inverse_cp: bool,
    /// (k, least eigenvalue seen for the map, least eigenvalue seen for the inverse).
    pub levels: Vec<(usize, f64, f64)>,
    /// Smallest level at which a sampled positive element maps outside the cone.
    pub failing_level: Option<usize>,
    pub is_iso: bool,
}

impl OrderIsoSpec {
    pub fn new(source: OperatorSystem, target: OperatorSystem, images: Vec<CMatrix>) -> Result<Self> {
        if images.len() != source.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for a {}-dimensional source",
                images.len(),
                source.dim()
            )));
        }
        Ok(Self {
            source,
            target,
            images,
        })
    }

    /// Restriction of a map on M_m to the source system.
    pub fn from_fn(source: OperatorSystem, target: OperatorSystem, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        let images = source.basis().iter().map(f).collect();
        Self::new(source, target, images)
    }

    pub fn forward(&self) -> Result<CPMap> {
        CPMap::new(
            Domain::System(self.source.clone()),
            self.target.ambient_dim(),
            self.images.clone(),
        )
    }

    /// The inverse map on the target system, if the map is a bijection.
    pub fn inverse(&self) -> Result<CPMap> {
        let d = self.source.dim();
        if self.target.dim() != d {
            return Err(Error::NotBijective);
        }
        let mut coords = CMatrix::zeros(d, d);
        for (a, img) in self.images.iter().enumerate() {
            let c = self.target.coordinates(img).map_err(|_| Error::NotBijective)?;
            if self.target.distance(img)? > 1e-8 * operator_norm(img).max(1.0) {
                return Err(Error::NotBijective);
            }
            for (i, v) in c.into_iter().enumerate() {
                coords[(i, a)] = v;
            }
        }
        let sv = linalg::singular_values(&coords);
        if sv.last().copied().unwrap_or(0.0) < 1e-9 * sv[0].max(1.0) {
            return Err(Error::NotBijective);
        }
        let inv = inverse(&coords)?;
        let src = self.source.basis();
        let images = (0..d)
            .map(|c| {
                let mut out = CMatrix::zeros(self.source.ambient_dim(), self.source.ambient_dim());
                for (a, b) in src.iter().enumerate() {
                    out.axpy(inv[(a, c)], b);
                }
                out
            })
            .collect();
        CPMap::new(
            Domain::System(self.target.clone()),
            self.source.ambient_dim(),
            images,
        )
    }
}

/// Least eigenvalue of (τ ⊗ id_k)(X) over sampled positive X ∈ M_k(S).
fn sampled_level_min(tau: &CPMap, s: &OperatorSystem, k: usize, count: usize, seed: u64) -> Result<f64> {
    let m = s.ambient_dim();
    let mut gens = Vec::with_capacity(s.dim() * k * k);
    for b in s.basis() {
        for j in 0..k {
            for l in 0..k {
                gens.push(kron(b, &CMatrix::unit(k, j, l)));
            }
        }
    }
    let level = OperatorSystem::new(gens, m * k)?;
    let mut samples = level.positive_cone_sample(count, seed);
    if s.is_full() {
        // Rank-one elements are extreme in the cone of M_k(M_m).
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..count {
            let v = crate::cpmaps::ginibre(m * k, 1, &mut rng);
            samples.push(&v * &v.adjoint());
        }
    }
    let mut worst = f64::INFINITY;
    for x in samples {
        let blocks: Vec<Vec<CMatrix>> = (0..k)
            .map(|j| {
                (0..k)
                    .map(|l| tau.apply(&block_of(&x, m, k, j, l)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let image = from_blocks(&blocks, tau.n());
        let scale = operator_norm(&image).max(1.0);
        worst = worst.min(min_eigenvalue_hermitian_part(&image) / scale);
    }
    Ok(worst)
}

/// Checks that the map is unital, bijective, and completely positive with
/// completely positive inverse. Complete positivity is decided through a CP
/// extension to the full matrix algebra; sampled positive elements of M_k(S)
/// for k ≤ max(m, m′) are reported level by level.
pub fn check_complete_order_iso(spec: &OrderIsoSpec, samples_per_level: usize, seed: u64) -> Result<IsoReport> {
    let (m, mp) = (spec.source.ambient_dim(), spec.target.ambient_dim());
    let unit_coords = spec.source.coordinates(&CMatrix::identity(m))?;
    let mut unit_image = CMatrix::zeros(mp, mp);
    for (c, img) in unit_coords.iter().zip(&spec.images) {
        unit_image.axpy(*c, img);
    }
    let unital_residual = operator_norm(&(&unit_image - &CMatrix::identity(mp)));
    if unital_residual > 1e-10 {
        return Err(Error::NotUnital {
            residual: unital_residual,
        });
    }
    let inverse = spec.inverse()?;
    let forward = spec.forward()?;
    let forward_cp = forward.is_cp(1e-9)?;
    let inverse_cp = inverse.is_cp(1e-9)?;

    let mut levels = Vec::new();
    let mut failing_level = None;
    for k in 1..=m.max(mp) {
        let a = sampled_level_min(&forward, &spec.source, k, samples_per_level, seed + k as u64)?;
        let b = sampled_level_min(&inverse, &spec.target, k, samples_per_level, seed + 1000 + k as u64)?;
        if failing_level.is_none() && a.min(b) < -1e-9 {
            failing_level = Some(k);
        }
        levels.push((k, a, b));
    }
    Ok(IsoReport {
        unital_residual,
        forward_cp,
        inverse_cp,
        levels,
        failing_level,
        is_iso: forward_cp && inverse_cp && failing_level.is_none(),
    })
}

pub fn is_complete_order_iso(spec: &OrderIsoSpec) -> Result<bool> {
    Ok(check_complete_order_iso(spec, 32, 0)?.is_iso)
}

/// How a unitary was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UnitaryMethod {
    Spectral,
    Optimization,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitarySearch {
    pub u: CMatrix,
    /// ‖uxu* − y‖ in operator norm.
    pub residual: f64,
    pub method: UnitaryMethod,
    pub restarts_used: usize,
}

fn normality_residual(x: &CMatrix) -> f64 {
    let xs = x.adjoint();
    (&(x * &xs) - &(&xs * x)).frobenius_norm()
}

fn conj_residual(u: &CMatrix, x: &CMatrix, y: &CMatrix) -> f64 {
    operator_norm(&(&(&(u * x) * &u.adjoint()) - y))
}

/// Unitary V with V*xV diagonal, for normal x.
fn diagonalize_normal(x: &CMatrix) -> Result<(CMatrix, Vec<C64>)> {
    let n = x.rows();
    let h = x.hermitian_part();
    let k = (x - &x.adjoint()).scale(C64::new(0.0, -0.5));
    let scale = x.frobenius_norm().max(1.0);
    let mut best: Option<(f64, CMatrix)> = None;
    for t in [0.577_350_269_189_625_8, 1.414_213_562_373_095, 0.318_309_886_183_790_7] {
        let mut mix = h.clone();
        mix.axpy(C64::new(t, 0.0), &k);
        let eig = hermitian_eig(&mix.hermitian_part(), 1e-14)?;
        let v = eig.vectors;
        let d = &(&v.adjoint() * x) * &v;
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += d[(i, j)].norm_sqr();
                }
            }
        }
        let off = off.sqrt();
        if best.as_ref().is_none_or(|(o, _)| off < *o) {
            best = Some((off, v));
        }
        if off < 1e-12 * scale {
            break;
        }
    }
    let (_, v) = best.expect("at least one attempt");
    let d = &(&v.adjoint() * x) * &v;
    let vals = (0..n).map(|i| d[(i, i)]).collect();
    Ok((v, vals))
}

fn spectral_unitary(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    let n = x.rows();
    let (vx, dx) = diagonalize_normal(x)?;
    let (vy, dy) = diagonalize_normal(y)?;
    // Greedy nearest matching of eigenvalues; equal eigenvalues keep their
    // order, so degenerate blocks are matched by the identity.
    let mut used = vec![false; n];
    let mut perm = vec![0; n];
    for i in 0..n {
        let j = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (dx[i] - dy[a]).norm().total_cmp(&(dx[i] - dy[b]).norm()))
            .expect("an unused eigenvalue remains");
        used[j] = true;
        perm[i] = j;
    }
    // u = Σ_i w_{π(i)} v_i*.
    let mut u = CMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                u[(r, c)] += vy[(r, j)] * vx[(c, i)].conj();
            }
        }
    }
    Ok(u)
}

/// Levenberg–Marquardt on ‖e^K z e^{−K} − y‖²_F over skew-Hermitian K, with
/// z = uxu* and the update u ← polar(I + K)·u.
fn optimize_unitary(x: &CMatrix, y: &CMatrix, u0: CMatrix, tol: f64, max_iter: usize) -> (CMatrix, f64) {
    let n = x.rows();
    let dirs: Vec<CMatrix> = hermitian_unit_basis(n)
        .into_iter()
        .map(|h| h.scale(C64::new(0.0, 1.0)))
        .collect();
    let p = dirs.len();
    let transformed = |u: &CMatrix| &(u * x) * &u.adjoint();
    let mut u = u0;
    let mut z = transformed(&u);
    let mut r = &z - y;
    let mut cost = r.frobenius_norm().powi(2);
    let mut mu = 1e-3;
    for _ in 0..max_iter {
        if operator_norm(&r) <= tol * 0.1 {
            break;
        }
        let cols: Vec<Vec<f64>> = dirs
            .iter()
            .map(|s| (&(s * &z) - &(&z * s)).to_real_vec())
            .collect();
        let rv = r.to_real_vec();
        let mut jtj = vec![0.0; p * p];
        let mut jtr = vec![0.0; p];
        for a in 0..p {
            for b in a..p {
                let v: f64 = cols[a].iter().zip(&cols[b]).map(|(s, t)| s * t).sum();
                jtj[a * p + b] = v;
                jtj[b * p + a] = v;
            }
            jtr[a] = -cols[a].iter().zip(&rv).map(|(s, t)| s * t).sum::<f64>();
        }
        let diag_max = (0..p).map(|a| jtj[a * p + a]).fold(0.0, f64::max).max(1e-300);
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj.clone();
            for a in 0..p {
                damped[a * p + a] += mu * diag_max;
            }
            let Some(step) = solve_symmetric(&damped, &jtr) else {
                mu *= 10.0;
                continue;
            };
            let mut k = CMatrix::identity(n);
            for (t, s) in step.iter().zip(&dirs) {
                k.axpy(C64::new(*t, 0.0), s);
            }
            let Ok(q) = polar_unitary(&k) else {
                mu *= 10.0;
                continue;
            };
            let cand = &q * &u;
            let zc = transformed(&cand);
            let rc = &zc - y;
            let cc = rc.frobenius_norm().powi(2);
            if cc < cost {
                u = cand;
                z = zc;
                r = rc;
                cost = cc;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    // Re-orthonormalize to remove accumulated drift.
    if let Ok(q) = polar_unitary(&u) {
        u = q;
    }
    let res = conj_residual(&u, x, y);
    (u, res)
}

/// Searches for a unitary u with ‖uxu* − y‖ ≤ tol.
///
/// Normal pairs are handled by matching spectra. Otherwise a local search is
/// run from the identity and from `restarts − 1` Haar-random starting points;
/// failure is reported as [`Error::Inconclusive`], not as non-equivalence.
pub fn find_implementing_unitary(
    x: &CMatrix,
    y: &CMatrix,
    tol: f64,
    restarts: usize,
    seed: u64,
) -> Result<UnitarySearch> {
    if !x.is_square() || !x.same_shape(y) {
        return Err(Error::DimensionMismatch(format!(
            "x is {}x{}, y is {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let n = x.rows();
    let scale = x.frobenius_norm().max(y.frobenius_norm()).max(1.0);
    let mut best_residual = f64::INFINITY;
    if normality_residual(x) < 1e-10 * scale * scale && normality_residual(y) < 1e-10 * scale * scale {
        let u = spectral_unitary(x, y)?;
        let residual = conj_residual(&u, x, y);
        if residual <= tol {
            return Ok(UnitarySearch {
                u,
                residual,
                method: UnitaryMethod::Spectral,
                restarts_used: 0,
            });
        }
        best_residual = residual;
    }
    let attempts: Vec<(usize, CMatrix, f64)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                CMatrix::identity(n)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                haar_unitary(n, &mut rng)
            };
            let (u, res) = optimize_unitary(x, y, start, tol, 400);
            (r, u, res)
        })
        .collect();
    let (r, u, residual) = attempts
        .into_iter()
        .min_by(|a, b| {
            let ka = (a.2 > tol, a.0);
            let kb = (b.2 > tol, b.0);
            ka.cmp(&kb).then(a.2.total_cmp(&b.2))
        })
        .expect("at least one attempt");
    if residual <= tol {
        return Ok(UnitarySearch {
            u,
            residual,
            method: UnitaryMethod::Optimization,
            restarts_used: r + 1,
        });
    }
    Err(Error::Inconclusive {
        residual: residual.min(best_residual),
    })
}

/// Orthonormal (Frobenius) basis of the span of `mats`.
pub fn span_basis(mats: &[CMatrix], tol: f64) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = Vec::new();
    for a in mats {
        let mut v = a.clone();
        for _ in 0..2 {
            for b in &out {
                let c = b.inner(&v);
                v.axpy(-c, b);
            }
        }
        let norm = v.frobenius_norm();
        if norm > tol * a.frobenius_norm().max(1.0) {
            out.push(v.scale_real(1.0 / norm));
        }
    }
    out
}

/// Frobenius distance from x to the span of an orthonormal family.
pub fn distance_to_span(x: &CMatrix, basis: &[CMatrix]) -> f64 {
    let mut v = x.clone();
    for b in basis {
        let c = b.inner(&v);
        v.axpy(-c, b);
    }
    v.frobenius_norm()
}

/// Orthonormal basis of the unital *-algebra generated by the given elements.
pub fn generated_algebra(gens: &[CMatrix], dim: usize) -> Vec<CMatrix> {
    let mut seed = vec![CMatrix::identity(dim)];
    for g in gens {
        seed.push(g.clone());
        seed.push(g.adjoint());
    }
    let mut basis = span_basis(&seed, 1e-10);
    loop {
        let before = basis.len();
        let mut products = basis.clone();
        for a in &basis {
            for b in &basis {
                let p = a * b;
                if distance_to_span(&p, &basis) > 1e-10 * p.frobenius_norm().max(1.0) {
                    products.push(p);
                }
            }
        }
        basis = span_basis(&products, 1e-10);
        if basis.len() == before || basis.len() == dim * dim {
            return basis;
        }
    }
}

/// The 2×2 operator system {[[λI, g], [h*, μI]] : g, h ∈ M} in M_m ⊗ M_2.
#[derive(Clone, Debug)]
pub struct PaulsenSystem {
    pub m: usize,
    pub generators: Vec<CMatrix>,
    pub system: OperatorSystem,
    /// Basis of the generated C*-algebra.
    pub algebra: Vec<CMatrix>,
    /// corners[j][k] spans (I ⊗ e_jj)·A·(I ⊗ e_kk).
    pub corners: [[Vec<CMatrix>; 2]; 2],
    /// An attached isomorphism of the generated algebras, as a map on M_2m.
    pub iso: Option<CPMap>,
}

/// I ⊗ e_jj in M_m ⊗ M_2.
pub fn corner_projection(m: usize, j: usize) -> CMatrix {
    kron(&CMatrix::identity(m), &CMatrix::unit(2, j, j))
}

/// x placed in the (j, k) corner: x ⊗ e_jk.
pub fn corner_element(x: &CMatrix, j: usize, k: usize) -> CMatrix {
    kron(x, &CMatrix::unit(2, j, k))
}

pub fn paulsen_embed(generators: &[CMatrix], m: usize) -> Result<PaulsenSystem> {
    for g in generators {
        if g.rows() != m || g.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "generator is {}x{}, expected {m}x{m}",
                g.rows(),
                g.cols()
            )));
        }
    }
    let mut gens = vec![corner_projection(m, 0), corner_projection(m, 1)];
    for g in generators {
        gens.push(corner_element(g, 0, 1));
        gens.push(corner_element(&g.adjoint(), 1, 0));
    }
    let system = OperatorSystem::new(gens.clone(), 2 * m)?;
    let algebra = generated_algebra(&gens, 2 * m);
    let proj = [corner_projection(m, 0), corner_projection(m, 1)];
    let corner = |j: usize, k: usize| {
        let pieces: Vec<CMatrix> = algebra.iter().map(|a| &(&proj[j] * a) * &proj[k]).collect();
        span_basis(&pieces, 1e-10)
    };
    let corners = [[corner(0, 0), corner(0, 1)], [corner(1, 0), corner(1, 1)]];
    Ok(PaulsenSystem {
        m,
        generators: generators.to_vec(),
        system,
        algebra,
        corners,
        iso: None,
    })
}

/// Ad(u ⊗ e11 + v ⊗ e22): the isomorphism whose off-diagonal corner map is
/// b ↦ u b v*.
pub fn conjugation_iso(u: &CMatrix, v: &CMatrix) -> CMatrix {
    let mut w = corner_element(u, 0, 0);
    w += &corner_element(v, 1, 1);
    w
}

impl PaulsenSystem {
    pub fn corner_dims(&self) -> [[usize; 2]; 2] {
        [
            [self.corners[0][0].len(), self.corners[0][1].len()],
            [self.corners[1][0].len(), self.corners[1][1].len()],
        ]
    }

    /// Attaches a linear map on M_2m; it must fix both corner projections.
    pub fn attach(&mut self, iso: CPMap) -> Result<f64> {
        let d = 2 * self.m;
        if iso.m() != d || iso.n() != d || !iso.domain().is_full() {
            return Err(Error::DimensionMismatch(format!("attached map must act on M_{d}")));
        }
        let mut worst: f64 = 0.0;
        for j in 0..2 {
            let p = corner_projection(self.m, j);
            worst = worst.max(operator_norm(&(&iso.apply(&p)? - &p)));
        }
        if worst > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "attached map moves a corner projection by {worst:.3e}"
            )));
        }
        self.iso = Some(iso);
        Ok(worst)
    }

    /// Attaches Ad(u ⊗ e11 + v ⊗ e22).
    pub fn attach_unitaries(&mut self, u: &CMatrix, v: &CMatrix) -> Result<f64> {
        self.attach(CPMap::conjugation(&conjugation_iso(u, v)))
    }

    /// Attaches X ↦ WXW* + ε·P₁XP₂, which scales the (1, 2) corner map to
    /// b ↦ u b v* + ε b and breaks multiplicativity.
    pub fn attach_perturbed(&mut self, u: &CMatrix, v: &CMatrix, eps: f64) -> Result<f64> {
        let w = conjugation_iso(u, v);
        let (p1, p2) = (corner_projection(self.m, 0), corner_projection(self.m, 1));
        let d = 2 * self.m;
        let map = CPMap::from_fn(d, d, |x| {
            let mut out = &(&w * x) * &w.adjoint();
            out.axpy(C64::new(eps, 0.0), &(&(&p1 * x) * &p2));
            out
        });
        self.attach(map)
    }

    /// Random element of the (j, k) corner of the generated algebra.
    pub fn random_corner_element(&self, j: usize, k: usize, rng: &mut impl Rng) -> CMatrix {
        let d = 2 * self.m;
        let mut out = CMatrix::zeros(d, d);
        for b in &self.corners[j][k] {
            let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            out.axpy(c, b);
        }
        out
    }

    fn check_corner(&self, x: &CMatrix, j: usize, k: usize, tol: f64) -> Result<()> {
        let d = 2 * self.m;
        if x.rows() != d || x.cols() != d {
            return Err(Error::DimensionMismatch(format!("corner element must be {d}x{d}")));
        }
        let dist = distance_to_span(x, &self.corners[j][k]);
        if dist > tol.max(1e-9) * x.frobenius_norm().max(1.0) {
            return Err(Error::CornerMembershipViolation(format!(
                "element is {dist:.3e} away from corner ({}, {})",
                j + 1,
                k + 1
            )));
        }
        Ok(())
    }

    /// ‖τ(abc) − α₁(a)·τ(b)·α₂(c)‖ for a, b, c in the corners (1,1), (1,2),
    /// (2,2), with τ, α₁, α₂ the corner restrictions of the attached map.
    pub fn cocycle_check(&self, a: &CMatrix, b: &CMatrix, c: &CMatrix, tol: f64) -> Result<f64> {
        let iso = self
            .iso
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no isomorphism attached".into()))?;
        self.check_corner(a, 0, 0, tol)?;
        self.check_corner(b, 0, 1, tol)?;
        self.check_corner(c, 1, 1, tol)?;
        let (p1, p2) = (corner_projection(self.m, 0), corner_projection(self.m, 1));
        let alpha1 = &(&p1 * &iso.apply(a)?) * &p1;
        let tau = &(&p1 * &iso.apply(b)?) * &p2;
        let alpha2 = &(&p2 * &iso.apply(c)?) * &p2;
        let abc = &(a * b) * c;
        let lhs = &(&p1 * &iso.apply(&abc)?) * &p2;
        let rhs = &(&alpha1 * &tau) * &alpha2;
        Ok(operator_norm(&(&lhs - &rhs)))
    }

    /// Distance of the (1,1) corner from the algebra generated by products
    /// b·c* of (1,2) corner elements together with the scalars on that corner.
    pub fn corner_inclusion_residual(&self) -> f64 {
        let p1 = corner_projection(self.m, 0);
        let off = &self.corners[0][1];
        let mut gens = vec![p1.clone()];
        for b in off {
            for c in off {
                gens.push(b * &c.adjoint());
            }
        }
        let span = span_basis(&gens, 1e-10);
        let mut closed = span.clone();
        loop {
            let before = closed.len();
            let mut products = closed.clone();
            for a in &closed {
                for b in &closed {
                    products.push(a * b);
                }
            }
            closed = span_basis(&products, 1e-10);
            if closed.len() == before {
                break;
            }
        }
        self.corners[0][0]
            .iter()
            .map(|x| distance_to_span(x, &closed))
            .fold(0.0, f64::max)
    }
}

/// Algebraic unitarity test together with x_k(0) = k‖x‖ for k ≤ 3.
#[derive(Clone, Debug, Serialize)]
pub struct UnitarityReport {
    pub is_unitary: bool,
    pub residual: f64,
    pub norms: Vec<(usize, f64)>,
}

pub fn unitarity_certificate(x: &CMatrix, tol: f64) -> UnitarityReport {
    let n = x.rows();
    let id = CMatrix::identity(n);
    let left = operator_norm(&(&(&x.adjoint() * x) - &id));
    let right = operator_norm(&(&(x * &x.adjoint()) - &id));
    let residual = left.max(right);
    UnitarityReport {
        is_unitary: x.is_square() && residual <= tol,
        residual,
        norms: (1..=3).map(|k| (k, invariant(x, k, C64::new(0.0, 0.0)))).collect(),
    }
}

/// A linear map on a function system, given by the images of its functions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionMap {
    #[serde(with = "crate::opsys::function_list")]
    pub images: Vec<Vec<C64>>,
}

/// Γ(ψ) = ψ ∘ γ, with γ[ω′] = ω.
pub fn induced_map(f: &FunctionSystem, gamma: &[usize]) -> FunctionMap {
    FunctionMap {
        images: f
            .functions
            .iter()
            .map(|psi| gamma.iter().map(|&w| psi[w]).collect())
            .collect(),
    }
}

/// Recovers the point map γ with Γ(ψ) = ψ ∘ γ by matching point evaluations.
pub fn stone_recover_permutation(f: &FunctionSystem, fp: &FunctionSystem, gamma_map: &FunctionMap) -> Result<Vec<usize>> {
    f.validate()?;
    fp.validate()?;
    if !f.separates_points() {
        return Err(Error::NotSeparating);
    }
    if f.omega != fp.omega {
        return Err(Error::NoConsistentPermutation(format!(
            "|Ω| = {} but |Ω′| = {}",
            f.omega, fp.omega
        )));
    }
    if gamma_map.images.len() != f.functions.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} images for {} functions",
            gamma_map.images.len(),
            f.functions.len()
        )));
    }
    let target = fp.to_operator_system()?;
    for (i, img) in gamma_map.images.iter().enumerate() {
        if img.len() != fp.omega {
            return Err(Error::DimensionMismatch(format!("image {i} has {} values", img.len())));
        }
        let d = CMatrix::diag(img);
        if target.distance(&d)? > 1e-8 * operator_norm(&d).max(1.0) {
            return Err(Error::NoConsistentPermutation(format!("image {i} lies outside F′")));
        }
    }
    let scale = f
        .functions
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let omega = f.omega;
    let mut gamma = vec![usize::MAX; omega];
    let mut hit = vec![false; omega];
    for (wp, slot) in gamma.iter_mut().enumerate() {
        let matches: Vec<usize> = (0..omega)
            .filter(|&w| {
                f.functions
                    .iter()
                    .zip(&gamma_map.images)
                    .all(|(psi, img)| (psi[w] - img[wp]).norm() <= tol)
            })
            .collect();
        match matches.as_slice() {
            [w] if !hit[*w] => {
                hit[*w] = true;
                *slot = *w;
            }
            [] => {
                return Err(Error::NoConsistentPermutation(format!(
                    "evaluation at ω′ = {wp} matches no point of Ω"
                )))
            }
            _ => {
                return Err(Error::NoConsistentPermutation(format!(
                    "evaluation at ω′ = {wp} is not matched injectively"
                )))
            }
        }
    }
    let check = induced_map(f, &gamma);
    for (a, b) in check.images.iter().zip(&gamma_map.images) {
        if a.iter().zip(b).any(|(s, t)| (s - t).norm() > tol) {
            return Err(Error::NoConsistentPermutation("verification failed".into()));
        }
    }
    Ok(gamma)
}
