//! Completely positive maps and positive functionals on M_n(S).
//!
//! An element of M_n(S) is stored as an mn×mn matrix X = Σ x_jk ⊗ e_jk in
//! M_m ⊗ M_n, so the block x_jk sits at rows p·n + j, columns q·n + k.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, complex_pairs, kron, min_eigenvalue_hermitian_part, operator_norm, partial_trace,
    CMatrix, Factor, C64, DEFAULT_TOL,
};
use crate::opsys::{OperatorSystem, OperatorSystemJson, MEMBERSHIP_TOL};

/// Domain of a map or functional: all of M_m or an operator system in M_m.
#[derive(Clone, Debug)]
pub enum Domain {
    Full(usize),
    System(OperatorSystem),
}

impl Domain {
    pub fn m(&self) -> usize {
        match self {
            Domain::Full(m) => *m,
            Domain::System(s) => s.ambient_dim(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Full(m) => m * m,
            Domain::System(s) => s.dim(),
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, Domain::Full(_))
    }

    /// Matrix units e_pq in row-major order, or the Hermitian basis of S.
    pub fn basis(&self) -> Vec<CMatrix> {
        match self {
            Domain::Full(m) => (0..*m)
                .flat_map(|p| (0..*m).map(move |q| CMatrix::unit(*m, p, q)))
                .collect(),
            Domain::System(s) => s.basis().to_vec(),
        }
    }

    /// Coordinates of x in [`Domain::basis`]. Fails if x is not in the domain.
    pub fn coordinates(&self, x: &CMatrix) -> Result<Vec<C64>> {
        let m = self.m();
        if x.rows() != m || x.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "element is {}x{}, domain lives in M_{m}",
                x.rows(),
                x.cols()
            )));
        }
        match self {
            Domain::Full(_) => Ok(x.data().to_vec()),
            Domain::System(s) => {
                let c = s.coordinates(x)?;
                let resid = x.dist(&s.from_coordinates(&c));
                if resid > MEMBERSHIP_TOL * x.frobenius_norm().max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "element lies outside the operator system (distance {resid:.3e})"
                    )));
                }
                Ok(c)
            }
        }
    }

    pub fn system(&self) -> Option<&OperatorSystem> {
        match self {
            Domain::Full(_) => None,
            Domain::System(s) => Some(s),
        }
    }
}

/// A linear map τ from M_m (or S ⊆ M_m) into M_n, given by its images on
/// the domain basis.
#[derive(Clone, Debug)]
pub struct CPMap {
    domain: Domain,
    n: usize,
    images: Vec<CMatrix>,
}

impl CPMap {
    pub fn new(domain: Domain, n: usize, images: Vec<CMatrix>) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} basis images for a domain of dimension {}",
                images.len(),
                domain.dim()
            )));
        }
        if let Some(bad) = images.iter().find(|y| y.rows() != n || y.cols() != n) {
            return Err(Error::DimensionMismatch(format!(
                "basis image is {}x{}, expected {n}x{n}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self { domain, n, images })
    }

    /// Map on M_m given by a closure.
    pub fn from_fn(m: usize, n: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let domain = Domain::Full(m);
        let images = domain.basis().iter().map(f).collect();
        Self::new(domain, n, images).expect("closure output has the declared shape")
    }

    /// x ↦ Σ K x K*, with each K of shape n×m.
    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidInput("empty Kraus family".into()))?;
        let (n, m) = (first.rows(), first.cols());
        if kraus.iter().any(|k| k.rows() != n || k.cols() != m) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        let adj: Vec<CMatrix> = kraus.iter().map(|k| k.adjoint()).collect();
        Ok(Self::from_fn(m, n, |x| {
            let mut out = CMatrix::zeros(n, n);
            for (k, ka) in kraus.iter().zip(&adj) {
                out += &(&(k * x) * ka);
            }
            out
        }))
    }

    pub fn from_choi(m: usize, n: usize, choi: &CMatrix) -> Result<Self> {
        if choi.rows() != m * n || choi.cols() != m * n {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {}x{}, expected {}",
                choi.rows(),
                choi.cols(),
                m * n
            )));
        }
        let images = (0..m)
            .flat_map(|p| (0..m).map(move |q| choi.sub_block(p * n, q * n, n, n)))
            .collect();
        Self::new(Domain::Full(m), n, images)
    }

    pub fn identity(m: usize) -> Self {
        Self::from_fn(m, m, |x| x.clone())
    }

    pub fn transpose(m: usize) -> Self {
        Self::from_fn(m, m, |x| x.transpose())
    }

    /// x ↦ uxu*.
    pub fn conjugation(u: &CMatrix) -> Self {
        Self::from_kraus(std::slice::from_ref(u)).expect("one Kraus operator")
    }

    /// x ↦ (tr(x)/m)·I_n.
    pub fn trace_map(m: usize, n: usize) -> Self {
        Self::from_fn(m, n, |x| CMatrix::identity(n).scale(x.trace() / m as f64))
    }

    /// Random CP map with `rank` Ginibre Kraus operators, normalized so
    /// that τ(I) = I. The rank is raised to ⌈n/m⌉ when needed so that Σ K K* is invertible.
    pub fn random_ucp(m: usize, n: usize, rank: usize, rng: &mut impl Rng) -> Self {
        let rank = rank.max(n.div_ceil(m)).max(1);
        loop {
            let ks: Vec<CMatrix> = (0..rank).map(|_| ginibre(n, m, rng)).collect();
            let mut p = CMatrix::zeros(n, n);
            for k in &ks {
                p += &(k * &k.adjoint());
            }
            let Ok(eig) = linalg::eig_hermitian_part(&p) else {
                continue;
            };
            if eig.values[0] <= 1e-8 * eig.values[n - 1] {
                continue;
            }
            let w = eig.apply_fn(|v| 1.0 / v.sqrt());
            let ks: Vec<CMatrix> = ks.iter().map(|k| &w * k).collect();
            return Self::from_kraus(&ks).expect("nonempty family");
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn m(&self) -> usize {
        self.domain.m()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis_images(&self) -> &[CMatrix] {
        &self.images
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let coords = self.domain.coordinates(x)?;
        let mut out = CMatrix::zeros(self.n, self.n);
        for (c, y) in coords.iter().zip(&self.images) {
            if c.norm() != 0.0 {
                out.axpy(*c, y);
            }
        }
        Ok(out)
    }

    /// Restriction to an operator system S ⊆ M_m. Requires a full domain.
    pub fn restrict(&self, s: &OperatorSystem) -> Result<Self> {
        if !self.domain.is_full() {
            return Err(Error::DomainNotFullAlgebra);
        }
        if s.ambient_dim() != self.m() {
            return Err(Error::DimensionMismatch("system lives in a different M_m".into()));
        }
        let images = s
            .basis()
            .iter()
            .map(|b| self.apply(b))
            .collect::<Result<_>>()?;
        Self::new(Domain::System(s.clone()), self.n, images)
    }

    /// Choi matrix Σ e_pq ⊗ τ(e_pq).
    pub fn choi(&self) -> Result<CMatrix> {
        let Domain::Full(m) = self.domain else {
            return Err(Error::DomainNotFullAlgebra);
        };
        let n = self.n;
        let mut c = CMatrix::zeros(m * n, m * n);
        for p in 0..m {
            for q in 0..m {
                c.set_block(p * n, q * n, &self.images[p * m + q]);
            }
        }
        Ok(c)
    }

    /// Least eigenvalue of the Choi matrix.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        Ok(min_eigenvalue_hermitian_part(&self.choi()?))
    }

    /// ‖τ(I) − I‖.
    pub fn unital_residual(&self) -> Result<f64> {
        let one = self.apply(&CMatrix::identity(self.m()))?;
        Ok(operator_norm(&(&one - &CMatrix::identity(self.n))))
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unital_residual().map(|r| r <= tol).unwrap_or(false)
    }

    /// max over the domain basis of ‖τ(b*) − τ(b)*‖.
    pub fn adjoint_residual(&self) -> f64 {
        self.domain
            .basis()
            .iter()
            .zip(&self.images)
            .map(|(b, y)| match self.apply(&b.adjoint()) {
                Ok(ys) => ys.dist(&y.adjoint()),
                Err(_) => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// Complete positivity. Full domain: Choi test. Operator-system domain:
    /// existence of a CP extension to M_m (semidefinite feasibility).
    pub fn is_cp(&self, tol: f64) -> Result<bool> {
        match &self.domain {
            Domain::Full(_) => Ok(self.choi_min_eigenvalue()? >= -tol),
            Domain::System(_) => match crate::extend::arveson_extension(self) {
                Ok(_) => Ok(true),
                Err(Error::Infeasible { .. }) => Ok(false),
                Err(e) => Err(e),
            },
        }
    }

    /// Composition self ∘ other.
    pub fn compose(&self, other: &CPMap) -> Result<CPMap> {
        if other.n != self.m() {
            return Err(Error::DimensionMismatch("composition shapes differ".into()));
        }
        let images = other
            .images
            .iter()
            .map(|y| self.apply(y))
            .collect::<Result<_>>()?;
        CPMap::new(other.domain.clone(), self.n, images)
    }

    /// The trace dual τ† with tr(τ†(y)·x) = tr(y·τ(x)). Full domain only.
    pub fn dual_apply(&self, y: &CMatrix) -> Result<CMatrix> {
        let Domain::Full(m) = self.domain else {
            return Err(Error::DomainNotFullAlgebra);
        };
        Ok(CMatrix::from_fn(m, m, |j, i| {
            y.trace_product(&self.images[i * m + j])
        }))
    }

    /// Matrix of τ from the coordinates of the domain basis to row-major
    /// entries of M_n.
    pub fn linear_matrix(&self) -> CMatrix {
        let n2 = self.n * self.n;
        CMatrix::from_fn(n2, self.images.len(), |r, c| self.images[c].data()[r])
    }

    pub fn to_json(&self) -> CPMapJson {
        let (domain, system) = match &self.domain {
            Domain::Full(_) => ("full", None),
            Domain::System(s) => ("system", Some(s.to_json())),
        };
        CPMapJson {
            domain: domain.to_string(),
            m: self.m(),
            n: self.n,
            basis_images: self.images.clone(),
            choi: self.choi().ok(),
            system,
            unit_image: None,
            generator_images: Vec::new(),
        }
    }
}

pub(crate) fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        C64::new(a, b)
    })
}

/// Wire format for [`CPMap`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CPMapJson {
    pub domain: String,
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub basis_images: Vec<CMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<CMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<OperatorSystemJson>,
    /// Alternative to `basis_images` on a system domain: τ(I).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_image: Option<CMatrix>,
    /// Alternative to `basis_images` on a system domain: τ(g) for each generator.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generator_images: Vec<CMatrix>,
}

/// Images of the orthonormal basis of S for a *-preserving map known on I
/// and on the generators of S.
fn basis_images_from_generators(s: &OperatorSystem, unit: &CMatrix, gens: &[CMatrix]) -> Result<Vec<CMatrix>> {
    if gens.len() != s.generators().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} generator images for {} generators",
            gens.len(),
            s.generators().len()
        )));
    }
    let m = s.ambient_dim();
    let mut cands = vec![(CMatrix::identity(m), unit.clone())];
    for (g, t) in s.generators().iter().zip(gens) {
        let (gs, ts) = (g.adjoint(), t.adjoint());
        cands.push(((g + &gs).scale_real(0.5), (t + &ts).scale_real(0.5)));
        let half = C64::new(0.0, -0.5);
        cands.push(((g - &gs).scale(half), (t - &ts).scale(half)));
    }
    // b = Σ c_k x_k by least squares through the Gram matrix of the spanning set.
    let k = cands.len();
    let gram = CMatrix::from_fn(k, k, |i, j| cands[i].0.inner(&cands[j].0));
    let eig = linalg::hermitian_eig(&gram.hermitian_part(), DEFAULT_TOL)?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(1e-300);
    let pinv = eig.apply_fn(|v| if v > 1e-12 * top { 1.0 / v } else { 0.0 });
    s.basis()
        .iter()
        .map(|b| {
            let rhs: Vec<C64> = cands.iter().map(|(x, _)| x.inner(b)).collect();
            let mut img = CMatrix::zeros(unit.rows(), unit.cols());
            for i in 0..k {
                let c: C64 = (0..k).map(|j| pinv[(i, j)] * rhs[j]).sum();
                img.axpy(c, &cands[i].1);
            }
            Ok(img)
        })
        .collect()
}

impl TryFrom<CPMapJson> for CPMap {
    type Error = Error;
    fn try_from(j: CPMapJson) -> Result<Self> {
        match j.domain.as_str() {
            "full" => {
                if j.basis_images.is_empty() {
                    let choi = j.choi.ok_or_else(|| {
                        Error::InvalidInput("full-domain map needs basis_images or choi".into())
                    })?;
                    CPMap::from_choi(j.m, j.n, &choi)
                } else {
                    CPMap::new(Domain::Full(j.m), j.n, j.basis_images)
                }
            }
            "system" => {
                let sys = j
                    .system
                    .ok_or_else(|| Error::InvalidInput("system domain needs \"system\"".into()))?;
                let s = OperatorSystem::try_from(sys)?;
                if s.ambient_dim() != j.m {
                    return Err(Error::DimensionMismatch("system ambient_dim differs from m".into()));
                }
                let images = match (&j.unit_image, j.basis_images.is_empty()) {
                    (Some(unit), true) => basis_images_from_generators(&s, unit, &j.generator_images)?,
                    _ => j.basis_images,
                };
                CPMap::new(Domain::System(s), j.n, images)
            }
            other => Err(Error::InvalidInput(format!("unknown domain {other:?}"))),
        }
    }
}

/// Nonzero weights λ_i with Σ|λ_i|² = 1, defining φ₀(x) = Σ|λ_i|² x_ii.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateWeights {
    #[serde(with = "complex_pairs")]
    pub weights: Vec<C64>,
}

impl StateWeights {
    pub fn new(weights: Vec<C64>) -> Result<Self> {
        let w = Self { weights };
        w.validate()?;
        Ok(w)
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::WeightMismatch("no weights".into()));
        }
        if self.weights.iter().any(|w| w.norm() <= 1e-14) {
            return Err(Error::WeightMismatch("weights must be nonzero".into()));
        }
        let total: f64 = self.weights.iter().map(|w| w.norm_sqr()).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::WeightMismatch(format!("Σ|λ_i|² = {total}, expected 1")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// [conj(λ_i) λ_j].
    pub fn lambda_matrix(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(n, n, |i, j| self.weights[i].conj() * self.weights[j])
    }

    /// Density diag(|λ_i|²) of φ₀.
    pub fn phi0_density(&self) -> CMatrix {
        let d: Vec<f64> = self.weights.iter().map(|w| w.norm_sqr()).collect();
        CMatrix::diag_real(&d)
    }
}

/// A linear functional on M_n(S) (or M_n(M_m)), stored by its values
/// f(b_a ⊗ e_jk) on the basis of the domain tensored with matrix units.
#[derive(Clone, Debug)]
pub struct PositiveFunctional {
    domain: Domain,
    level: usize,
    coefficients: Vec<C64>,
    density: Option<CMatrix>,
}

impl PositiveFunctional {
    pub fn new(domain: Domain, level: usize, coefficients: Vec<C64>) -> Result<Self> {
        let want = domain.dim() * level * level;
        if coefficients.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients, expected {want}",
                coefficients.len()
            )));
        }
        Ok(Self {
            domain,
            level,
            coefficients,
            density: None,
        })
    }

    /// X ↦ tr(ρX) on M_n(M_m).
    pub fn from_density(m: usize, level: usize, rho: CMatrix) -> Result<Self> {
        let d = m * level;
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "density is {}x{}, expected {d}x{d}",
                rho.rows(),
                rho.cols()
            )));
        }
        let domain = Domain::Full(m);
        let mut coefficients = Vec::with_capacity(m * m * level * level);
        for p in 0..m {
            for q in 0..m {
                for j in 0..level {
                    for k in 0..level {
                        // f(e_pq ⊗ e_jk) = ρ[(q,k),(p,j)]
                        coefficients.push(rho[(q * level + k, p * level + j)]);
                    }
                }
            }
        }
        Ok(Self {
            domain,
            level,
            coefficients,
            density: Some(rho),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn m(&self) -> usize {
        self.domain.m()
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn density(&self) -> Option<&CMatrix> {
        self.density.as_ref()
    }

    /// f(b_a ⊗ e_jk).
    pub fn coefficient(&self, a: usize, j: usize, k: usize) -> C64 {
        let n = self.level;
        self.coefficients[a * n * n + j * n + k]
    }

    /// Density ρ with f(X) = tr(ρX). Full domain only.
    pub fn density_matrix(&self) -> Result<CMatrix> {
        if let Some(rho) = &self.density {
            return Ok(rho.clone());
        }
        let Domain::Full(m) = self.domain else {
            return Err(Error::DomainNotFullAlgebra);
        };
        let n = self.level;
        let mut rho = CMatrix::zeros(m * n, m * n);
        for p in 0..m {
            for q in 0..m {
                for j in 0..n {
                    for k in 0..n {
                        rho[(q * n + k, p * n + j)] = self.coefficient(p * m + q, j, k);
                    }
                }
            }
        }
        Ok(rho)
    }

    /// Value on X = Σ x_jk ⊗ e_jk given as an mn×mn matrix.
    pub fn evaluate(&self, x: &CMatrix) -> Result<C64> {
        let (m, n) = (self.m(), self.level);
        if x.rows() != m * n || x.cols() != m * n {
            return Err(Error::DimensionMismatch(format!(
                "argument is {}x{}, expected {}",
                x.rows(),
                x.cols(),
                m * n
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                let block = block_of(x, m, n, j, k);
                let coords = self.domain.coordinates(&block)?;
                for (a, c) in coords.iter().enumerate() {
                    acc += self.coefficient(a, j, k) * c;
                }
            }
        }
        Ok(acc)
    }

    /// Value on x ⊗ I_n.
    pub fn evaluate_diagonal(&self, x: &CMatrix) -> Result<C64> {
        self.evaluate(&kron(x, &CMatrix::identity(self.level)))
    }

    /// Least eigenvalue of the density. Full domain only.
    pub fn min_density_eigenvalue(&self) -> Result<f64> {
        Ok(min_eigenvalue_hermitian_part(&self.density_matrix()?))
    }

    pub fn to_json(&self) -> FunctionalJson {
        let (domain, system) = match &self.domain {
            Domain::Full(_) => ("full", None),
            Domain::System(s) => ("system", Some(s.to_json())),
        };
        FunctionalJson {
            level: self.level,
            domain: domain.to_string(),
            m: self.m(),
            system,
            coefficients: self.coefficients.clone(),
            density: self.density.clone(),
        }
    }
}

/// Block x_jk of X = Σ x_jk ⊗ e_jk.
pub fn block_of(x: &CMatrix, m: usize, n: usize, j: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |p, q| x[(p * n + j, q * n + k)])
}

/// Assembles Σ x_jk ⊗ e_jk from an n×n array of m×m blocks.
pub fn from_blocks(blocks: &[Vec<CMatrix>], m: usize) -> CMatrix {
    let n = blocks.len();
    let mut x = CMatrix::zeros(m * n, m * n);
    for (j, row) in blocks.iter().enumerate() {
        for (k, b) in row.iter().enumerate() {
            for p in 0..m {
                for q in 0..m {
                    x[(p * n + j, q * n + k)] = b[(p, q)];
                }
            }
        }
    }
    x
}

/// Wire format for [`PositiveFunctional`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionalJson {
    pub level: usize,
    pub domain: String,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<OperatorSystemJson>,
    #[serde(with = "complex_pairs", default)]
    pub coefficients: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<CMatrix>,
}

impl TryFrom<FunctionalJson> for PositiveFunctional {
    type Error = Error;
    fn try_from(j: FunctionalJson) -> Result<Self> {
        match j.domain.as_str() {
            "full" => match j.density {
                Some(rho) if j.coefficients.is_empty() => {
                    PositiveFunctional::from_density(j.m, j.level, rho)
                }
                density => {
                    let mut f = PositiveFunctional::new(Domain::Full(j.m), j.level, j.coefficients)?;
                    f.density = density;
                    Ok(f)
                }
            },
            "system" => {
                let sys = j
                    .system
                    .ok_or_else(|| Error::InvalidInput("system domain needs \"system\"".into()))?;
                let s = OperatorSystem::try_from(sys)?;
                PositiveFunctional::new(Domain::System(s), j.level, j.coefficients)
            }
            other => Err(Error::InvalidInput(format!("unknown domain {other:?}"))),
        }
    }
}

/// s(X) = (1/n) Σ_jk τ(x_jk)_jk.
pub fn functional_from_cpmap(tau: &CPMap, level: usize) -> Result<PositiveFunctional> {
    if level != tau.n() {
        return Err(Error::LevelMismatch {
            expected: tau.n(),
            found: level,
        });
    }
    let n = level as f64;
    let coefficients = tau
        .basis_images()
        .iter()
        .flat_map(|y| y.data().iter().map(move |z| z / n))
        .collect();
    let mut f = PositiveFunctional::new(tau.domain().clone(), level, coefficients)?;
    if tau.domain().is_full() {
        f.density = Some(f.density_matrix()?);
    }
    Ok(f)
}

/// τ(x)_ij = n·s(x ⊗ e_ij). Fails with NotPositive unless s is positive on M_n(S).
pub fn cpmap_from_functional(s: &PositiveFunctional) -> Result<CPMap> {
    let tau = cpmap_from_functional_unchecked(s)?;
    match s.domain() {
        Domain::Full(_) => {
            let min = s.min_density_eigenvalue()?;
            if min < -DEFAULT_TOL {
                return Err(Error::NotPositive { min });
            }
        }
        Domain::System(_) => {
            if !tau.is_cp(DEFAULT_TOL)? {
                return Err(Error::NotPositive { min: f64::NAN });
            }
        }
    }
    Ok(tau)
}

/// The map of [`cpmap_from_functional`] without the positivity check.
pub fn cpmap_from_functional_unchecked(s: &PositiveFunctional) -> Result<CPMap> {
    let n = s.level();
    let images = (0..s.domain().dim())
        .map(|a| CMatrix::from_fn(n, n, |i, j| s.coefficient(a, i, j) * n as f64))
        .collect();
    CPMap::new(s.domain().clone(), n, images)
}

/// s_{τ,λ}(X) = Σ_jk λ_jk τ(x_jk)_jk with λ_jk = conj(λ_j) λ_k, so that
/// s_{τ,λ}(x ⊗ I) = φ₀(τ(x)).
pub fn weighted_functional(tau: &CPMap, w: &StateWeights) -> Result<PositiveFunctional> {
    w.validate()?;
    if w.n() != tau.n() {
        return Err(Error::WeightMismatch(format!(
            "{} weights for output dimension {}",
            w.n(),
            tau.n()
        )));
    }
    let lam = w.lambda_matrix();
    let coefficients = tau
        .basis_images()
        .iter()
        .flat_map(|y| {
            y.data()
                .iter()
                .zip(lam.data())
                .map(|(a, l)| a * l)
                .collect::<Vec<_>>()
        })
        .collect();
    PositiveFunctional::new(tau.domain().clone(), tau.n(), coefficients)
}

/// Faithfulness on S_+: τ(z) = 0 with z ⪰ 0 forces z = 0.
pub fn is_faithful(tau: &CPMap) -> Result<bool> {
    Ok(faithfulness_margin(tau)? > 1e-9)
}

/// min tr(τ(z)) over positive z in the domain with tr z = 1.
pub fn faithfulness_margin(tau: &CPMap) -> Result<f64> {
    match tau.domain() {
        Domain::Full(m) => {
            let r = partial_trace(&tau.choi()?, (*m, tau.n()), Factor::Second)?;
            Ok(min_eigenvalue_hermitian_part(&r))
        }
        Domain::System(_) => crate::extend::system_faithfulness_margin(tau),
    }
}

/// Least eigenvalue of τ(x*x) − τ(x)*τ(x).
pub fn kadison_schwarz_check(tau: &CPMap, x: &CMatrix) -> Result<f64> {
    let xs = x.adjoint();
    let lhs = tau.apply(&(&xs * x))?;
    let tx = tau.apply(x)?;
    let rhs = &tau.apply(&xs)? * &tx;
    Ok(min_eigenvalue_hermitian_part(&(&lhs - &rhs)))
}

/// The fixed points of a unital CP map and the closure residuals observed.
#[derive(Clone, Debug)]
pub struct FixedPointAlgebra {
    /// Orthonormal Hermitian basis of ker(τ − id).
    pub basis: Vec<CMatrix>,
    /// Largest distance from b_i* to the span.
    pub adjoint_residual: f64,
    /// Largest distance from b_i·b_j to the span.
    pub product_residual: f64,
}

impl FixedPointAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn distance(&self, x: &CMatrix) -> f64 {
        let mut proj = CMatrix::zeros(x.rows(), x.cols());
        for b in &self.basis {
            proj.axpy(b.inner(x), b);
        }
        x.dist(&proj)
    }
}

/// Null space of τ − id for a unital CP map on M_m that leaves the faithful
/// state with density `invariant_state` invariant.
pub fn fixed_point_algebra(
    tau: &CPMap,
    invariant_state: &CMatrix,
    tol: f64,
) -> Result<FixedPointAlgebra> {
    let Domain::Full(m) = *tau.domain() else {
        return Err(Error::DomainNotFullAlgebra);
    };
    if tau.n() != m {
        return Err(Error::DimensionMismatch("fixed points need τ: M_m → M_m".into()));
    }
    check_invariant_state(tau, invariant_state)?;

    let mut t = tau.linear_matrix();
    for i in 0..m * m {
        t[(i, i)] -= C64::new(1.0, 0.0);
    }
    let null = linalg::null_space(&t, 1e-8);
    // Hermitian parts of the null vectors span the same *-closed space.
    let mut candidates = Vec::with_capacity(2 * null.len());
    for v in &null {
        let x = CMatrix::from_vec(m, m, v.clone())?;
        let xs = x.adjoint();
        candidates.push((&x + &xs).scale_real(0.5));
        candidates.push((&x - &xs).scale(C64::new(0.0, -0.5)));
    }
    let basis = orthonormal_hermitian(&candidates, null.len());

    let mut fpa = FixedPointAlgebra {
        basis,
        adjoint_residual: 0.0,
        product_residual: 0.0,
    };
    for a in &fpa.basis {
        fpa.adjoint_residual = fpa.adjoint_residual.max(fpa.distance(&a.adjoint()));
        for b in &fpa.basis {
            fpa.product_residual = fpa.product_residual.max(fpa.distance(&(a * b)));
        }
    }
    let worst = fpa.adjoint_residual.max(fpa.product_residual);
    if worst > tol {
        return Err(Error::ClosureViolation { residual: worst });
    }
    Ok(fpa)
}

fn check_invariant_state(tau: &CPMap, rho: &CMatrix) -> Result<()> {
    let m = tau.m();
    if rho.rows() != m || rho.cols() != m {
        return Err(Error::NoFaithfulInvariantState(format!(
            "state density must be {m}x{m}"
        )));
    }
    if !rho.is_hermitian(1e-10) || (rho.trace().re - 1.0).abs() > 1e-8 {
        return Err(Error::NoFaithfulInvariantState("density is not a state".into()));
    }
    let min = min_eigenvalue_hermitian_part(rho);
    if min <= 1e-10 {
        return Err(Error::NoFaithfulInvariantState(format!(
            "state is not faithful (least eigenvalue {min:.3e})"
        )));
    }
    let drift = tau.dual_apply(rho)?.dist(rho);
    if drift > 1e-8 {
        return Err(Error::NoFaithfulInvariantState(format!(
            "state is not invariant (‖τ†(ρ) − ρ‖ = {drift:.3e})"
        )));
    }
    Ok(())
}

/// Gram–Schmidt keeping at most `limit` vectors.
fn orthonormal_hermitian(candidates: &[CMatrix], limit: usize) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = Vec::new();
    for c in candidates {
        if out.len() == limit {
            break;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for b in &out {
                let coef = b.inner(&v).re;
                v.axpy(C64::new(-coef, 0.0), b);
            }
        }
        let norm = v.frobenius_norm();
        if norm > 1e-6 {
            out.push(v.scale_real(1.0 / norm));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn system_map_from_generator_images() {
        let s = OperatorSystem::new(vec![CMatrix::unit(2, 0, 1)], 2).unwrap();
        let j = CPMapJson {
            domain: "system".into(),
            m: 2,
            n: 2,
            basis_images: Vec::new(),
            choi: None,
            system: Some(s.to_json()),
            unit_image: Some(CMatrix::identity(2)),
            generator_images: vec![CMatrix::unit(2, 1, 0)],
        };
        let tau = CPMap::try_from(j).unwrap();
        let t = CPMap::transpose(2);
        for b in s.basis() {
            assert!(tau.apply(b).unwrap().dist(&t.apply(b).unwrap()) < 1e-12);
        }
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> CMatrix {
        ginibre(n, n, rng)
    }

    /// Oracle: the formula s(X) = (1/n)Σ τ(x_jk)_jk evaluated block by block.
    fn direct_s(tau: &CPMap, x: &CMatrix) -> C64 {
        let (m, n) = (tau.m(), tau.n());
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                acc += tau.apply(&block_of(x, m, n, j, k)).unwrap()[(j, k)];
            }
        }
        acc / n as f64
    }

    #[test]
    fn choi_of_identity() {
        let c = CPMap::identity(2).choi().unwrap();
        let mut omega = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            omega[(i, j)] = C64::new(1.0, 0.0);
        }
        assert!(c.dist(&omega) < 1e-15);
        let e = hermitian_eig(&c, DEFAULT_TOL).unwrap();
        for (v, want) in e.values.iter().zip([0.0, 0.0, 0.0, 2.0]) {
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn choi_of_trace_map() {
        // Σ e_ij ⊗ δ_ij I/2 = I₄/2.
        let c = CPMap::trace_map(2, 2).choi().unwrap();
        let mut oracle = CMatrix::zeros(4, 4);
        for i in 0..2 {
            oracle += &kron(&CMatrix::unit(2, i, i), &CMatrix::identity(2).scale_real(0.5));
        }
        assert!(c.dist(&oracle) < 1e-15);
        assert!(c.dist(&CMatrix::identity(4).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn choi_of_transpose_is_swap() {
        let c = CPMap::transpose(2).choi().unwrap();
        let swap = CMatrix::from_fn(4, 4, |r, s| {
            let (a, b) = (r / 2, r % 2);
            C64::new(if s == b * 2 + a { 1.0 } else { 0.0 }, 0.0)
        });
        assert!(c.dist(&swap) < 1e-15);
        assert!((CPMap::transpose(2).choi_min_eigenvalue().unwrap() + 1.0).abs() < 1e-14);
        assert!(!CPMap::transpose(2).is_cp(DEFAULT_TOL).unwrap());
    }

    #[test]
    fn choi_recovers_map() {
        let mut r = rng(1);
        let tau = CPMap::random_ucp(2, 3, 2, &mut r);
        let c = tau.choi().unwrap();
        for _ in 0..5 {
            let x = random_matrix(&mut r, 2);
            let lhs = partial_trace(
                &(&kron(&x.transpose(), &CMatrix::identity(3)) * &c),
                (2, 3),
                Factor::First,
            )
            .unwrap();
            assert!(lhs.dist(&tau.apply(&x).unwrap()) < 1e-12);
        }
        let back = CPMap::from_choi(2, 3, &c).unwrap();
        assert!(back.apply(&CMatrix::identity(2)).unwrap().dist(&CMatrix::identity(3)) < 1e-12);
        let sys = CPMap::identity(2).restrict(&OperatorSystem::diagonal(2)).unwrap();
        assert!(matches!(sys.choi(), Err(Error::DomainNotFullAlgebra)));
    }

    #[test]
    fn functional_examples() {
        let id = CPMap::identity(2);
        let s = functional_from_cpmap(&id, 2).unwrap();
        let one = s.evaluate(&CMatrix::identity(4)).unwrap();
        assert!((one - C64::new(1.0, 0.0)).norm() < 1e-15);
        let mut r = rng(2);
        let x = random_matrix(&mut r, 2);
        let v = s.evaluate_diagonal(&x).unwrap();
        assert!((v - x.trace() / 2.0).norm() < 1e-14);

        // τ = tr₀(·)I: s([x_jk]) = (1/n) Σ_j tr₀(x_jj).
        let tau = CPMap::trace_map(2, 2);
        let s = functional_from_cpmap(&tau, 2).unwrap();
        let big = random_matrix(&mut r, 4);
        let want: C64 = (0..2)
            .map(|j| block_of(&big, 2, 2, j, j).trace() / 2.0)
            .sum::<C64>()
            / 2.0;
        assert!((s.evaluate(&big).unwrap() - want).norm() < 1e-14);
        assert!((s.evaluate(&big).unwrap() - direct_s(&tau, &big)).norm() < 1e-14);
        assert!(matches!(
            functional_from_cpmap(&tau, 3),
            Err(Error::LevelMismatch { .. })
        ));
    }

    #[test]
    fn density_matches_choi_transpose() {
        let mut r = rng(3);
        let tau = CPMap::random_ucp(2, 2, 3, &mut r);
        let s = functional_from_cpmap(&tau, 2).unwrap();
        let rho = s.density_matrix().unwrap();
        assert!(rho.dist(&tau.choi().unwrap().transpose().scale_real(0.5)) < 1e-14);
        let x = random_matrix(&mut r, 4);
        assert!((rho.trace_product(&x) - s.evaluate(&x).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn from_functional_examples() {
        // Maximally entangled state: density Ω/2 with Ω = Σ e_ij ⊗ e_ij.
        let omega = CPMap::identity(2).choi().unwrap();
        let s = PositiveFunctional::from_density(2, 2, omega.transpose().scale_real(0.5)).unwrap();
        let tau = cpmap_from_functional(&s).unwrap();
        for (a, b) in tau.basis_images().iter().zip(CPMap::identity(2).basis_images()) {
            assert!(a.dist(b) < 1e-15);
        }
        // tr(X)/(nm) ↦ tr₀(x)I.
        let s = PositiveFunctional::from_density(2, 2, CMatrix::identity(4).scale_real(0.25)).unwrap();
        let tau = cpmap_from_functional(&s).unwrap();
        let want = CPMap::trace_map(2, 2);
        for (a, b) in tau.basis_images().iter().zip(want.basis_images()) {
            assert!(a.dist(b) < 1e-15);
        }
        // Swap-based functional is not positive.
        let swap = CPMap::transpose(2).choi().unwrap();
        let bad = PositiveFunctional::from_density(2, 2, swap.scale_real(0.25)).unwrap();
        assert!(matches!(cpmap_from_functional(&bad), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn roundtrips() {
        let mut r = rng(4);
        for trial in 0..20 {
            let m = 1 + trial % 4;
            let n = 1 + (trial / 4) % 4;
            let tau = CPMap::random_ucp(m, n, 2, &mut r);
            let s = functional_from_cpmap(&tau, n).unwrap();
            let back = cpmap_from_functional(&s).unwrap();
            for (a, b) in back.basis_images().iter().zip(tau.basis_images()) {
                assert!(a.dist(b) < 1e-10);
            }
            let s2 = functional_from_cpmap(&back, n).unwrap();
            for (a, b) in s2.coefficients().iter().zip(s.coefficients()) {
                assert!((a - b).norm() < 1e-10);
            }
            let x = random_matrix(&mut r, m);
            let lhs = s.evaluate_diagonal(&x).unwrap();
            let rhs = tau.apply(&x).unwrap().trace() / n as f64;
            assert!((lhs - rhs).norm() < 1e-10);
            let big = random_matrix(&mut r, m * n);
            assert!((s.evaluate(&big).unwrap() - direct_s(&tau, &big)).norm() < 1e-10);
        }
    }

    #[test]
    fn weighted_examples() {
        let third = (1.0f64 / 3.0).sqrt();
        let w = StateWeights::new(vec![C64::new(third, 0.0), C64::new((2.0f64 / 3.0).sqrt(), 0.0)])
            .unwrap();
        let s = weighted_functional(&CPMap::identity(2), &w).unwrap();
        let mut r = rng(5);
        let x = random_matrix(&mut r, 2);
        let want = x[(0, 0)] / 3.0 + x[(1, 1)] * (2.0 / 3.0);
        assert!((s.evaluate_diagonal(&x).unwrap() - want).norm() < 1e-14);

        let tau = CPMap::random_ucp(3, 2, 2, &mut r);
        let s = weighted_functional(&tau, &StateWeights::uniform(2)).unwrap();
        let x = random_matrix(&mut r, 3);
        let tr0 = tau.apply(&x).unwrap().trace() / 2.0;
        assert!((s.evaluate_diagonal(&x).unwrap() - tr0).norm() < 1e-12);

        // Oracle: Σ λ_jk τ(x_jk)_jk straight from the blocks.
        let w = StateWeights::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let s = weighted_functional(&tau, &w).unwrap();
        let big = random_matrix(&mut r, 6);
        let lam = w.lambda_matrix();
        let mut want = C64::new(0.0, 0.0);
        for j in 0..2 {
            for k in 0..2 {
                want += lam[(j, k)] * tau.apply(&block_of(&big, 3, 2, j, k)).unwrap()[(j, k)];
            }
        }
        assert!((s.evaluate(&big).unwrap() - want).norm() < 1e-12);

        assert!(StateWeights::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).is_err());
        assert!(matches!(
            weighted_functional(&tau, &StateWeights::uniform(3)),
            Err(Error::WeightMismatch(_))
        ));
    }

    #[test]
    fn weighted_positivity_on_samples() {
        let mut r = rng(6);
        let tau = CPMap::random_ucp(2, 2, 2, &mut r);
        let w = StateWeights::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let s = weighted_functional(&tau, &w).unwrap();
        let cone = OperatorSystem::full(4).positive_cone_sample(30, 9);
        for y in &cone {
            assert!(s.evaluate(y).unwrap().re >= -1e-10);
        }
    }

    #[test]
    fn faithfulness() {
        assert!(is_faithful(&CPMap::identity(2)).unwrap());
        assert!(is_faithful(&CPMap::trace_map(2, 2)).unwrap());
        let e11 = CMatrix::unit(2, 0, 0);
        let tau = CPMap::from_fn(2, 2, |x| CMatrix::identity(2).scale(x.trace_product(&e11)));
        assert!(tau.apply(&CMatrix::unit(2, 1, 1)).unwrap().frobenius_norm() < 1e-15);
        assert!(!is_faithful(&tau).unwrap());
    }

    #[test]
    fn kadison_schwarz() {
        let mut r = rng(7);
        let x = random_matrix(&mut r, 2);
        assert!(kadison_schwarz_check(&CPMap::identity(2), &x).unwrap().abs() < 1e-14);
        let v = kadison_schwarz_check(&CPMap::trace_map(2, 2), &CMatrix::unit(2, 0, 1)).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        for _ in 0..10 {
            let tau = CPMap::random_ucp(3, 3, 2, &mut r);
            let x = random_matrix(&mut r, 3);
            assert!(kadison_schwarz_check(&tau, &x).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn fixed_points() {
        let tr0 = CMatrix::identity(2).scale_real(0.5);
        let f = fixed_point_algebra(&CPMap::identity(2), &tr0, 1e-9).unwrap();
        assert_eq!(f.dim(), 4);
        let u = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let f = fixed_point_algebra(&CPMap::conjugation(&u), &tr0, 1e-9).unwrap();
        assert_eq!(f.dim(), 2);
        for i in 0..2 {
            assert!(f.distance(&CMatrix::unit(2, i, i)) < 1e-10);
        }
        assert!(f.distance(&CMatrix::unit(2, 0, 1)) > 0.5);
        let f = fixed_point_algebra(&CPMap::trace_map(2, 2), &tr0, 1e-9).unwrap();
        assert_eq!(f.dim(), 1);
        assert!(f.distance(&CMatrix::identity(2)) < 1e-10);

        let pure = CMatrix::unit(2, 0, 0);
        assert!(matches!(
            fixed_point_algebra(&CPMap::identity(2), &pure, 1e-9),
            Err(Error::NoFaithfulInvariantState(_))
        ));
    }

    #[test]
    fn fixed_points_rotated_spectrum() {
        // Degenerate spectrum in a generic basis: the null space of Ad(u) − id
        // has singular values that are rounding-sized, not exactly zero.
        let mut r = rng(12);
        let tr0 = CMatrix::identity(3).scale_real(1.0 / 3.0);
        let one = C64::new(1.0, 0.0);
        for (spec, dim) in [([one, one, C64::new(0.0, 1.0)], 5), ([one, -one, C64::new(0.0, 1.0)], 3)] {
            let w = ginibre(3, 3, &mut r);
            let w = crate::linalg::orthonormalize_columns(&w).unwrap();
            let u = &(&w * &CMatrix::diag(&spec)) * &w.adjoint();
            let f = fixed_point_algebra(&CPMap::conjugation(&u), &tr0, 1e-9).unwrap();
            assert_eq!(f.dim(), dim);
        }
    }

    #[test]
    fn json_roundtrip() {
        let mut r = rng(8);
        let tau = CPMap::random_ucp(2, 2, 2, &mut r);
        let text = serde_json::to_string(&tau.to_json()).unwrap();
        let back = CPMap::try_from(serde_json::from_str::<CPMapJson>(&text).unwrap()).unwrap();
        assert!(back.choi().unwrap().dist(&tau.choi().unwrap()) < 1e-12);
        let sys = tau.restrict(&OperatorSystem::new(vec![CMatrix::unit(2, 0, 1)], 2).unwrap()).unwrap();
        let text = serde_json::to_string(&sys.to_json()).unwrap();
        let back = CPMap::try_from(serde_json::from_str::<CPMapJson>(&text).unwrap()).unwrap();
        assert_eq!(back.basis_images().len(), 3);
        let s = functional_from_cpmap(&tau, 2).unwrap();
        let text = serde_json::to_string(&s.to_json()).unwrap();
        let back =
            PositiveFunctional::try_from(serde_json::from_str::<FunctionalJson>(&text).unwrap()).unwrap();
        assert!(back.density_matrix().unwrap().dist(&s.density_matrix().unwrap()) < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn kraus_maps_have_psd_choi(seed in any::<u64>(), m in 1usize..4, n in 1usize..4, k in 1usize..4) {
                let mut r = rng(seed);
                let kraus: Vec<CMatrix> = (0..k).map(|_| ginibre(n, m, &mut r)).collect();
                let tau = CPMap::from_kraus(&kraus).unwrap();
                let scale = tau.choi().unwrap().frobenius_norm().max(1.0);
                prop_assert!(tau.choi_min_eigenvalue().unwrap() >= -1e-10 * scale);
            }

            #[test]
            fn correspondence_round_trips(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
                let mut r = rng(seed);
                let tau = CPMap::random_ucp(m, n, 2, &mut r);
                let s = functional_from_cpmap(&tau, n).unwrap();
                let back = cpmap_from_functional(&s).unwrap();
                for (a, b) in back.basis_images().iter().zip(tau.basis_images()) {
                    prop_assert!(a.dist(b) < 1e-12);
                }
                // Unital maps give states.
                prop_assert!((s.evaluate(&CMatrix::identity(m * n)).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
            }

            #[test]
            fn functionals_are_hermitian(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
                let mut r = rng(seed);
                let s = functional_from_cpmap(&CPMap::random_ucp(m, n, 2, &mut r), n).unwrap();
                let y = ginibre(m * n, m * n, &mut r);
                let lhs = s.evaluate(&y.adjoint()).unwrap();
                let rhs = s.evaluate(&y).unwrap().conj();
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }

            #[test]
            fn ucp_maps_satisfy_kadison_schwarz(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
                let mut r = rng(seed);
                let tau = CPMap::random_ucp(m, n, 3, &mut r);
                let x = ginibre(m, m, &mut r);
                prop_assert!(kadison_schwarz_check(&tau, &x).unwrap() >= -1e-9);
            }
        }
    }
}
