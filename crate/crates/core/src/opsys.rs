//! Operator systems inside M_m(ℂ) and function systems on finite sets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_unit_basis, CMatrix, C64};

/// Default span membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Relative size below which a Gram–Schmidt residual counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-9;

/// A self-adjoint unital subspace of M_m(ℂ).
#[derive(Clone, Debug)]
pub struct OperatorSystem {
    m: usize,
    generators: Vec<CMatrix>,
    basis: Vec<CMatrix>,
}

impl OperatorSystem {
    /// Span of I, the generators and their adjoints.
    ///
    /// The basis is Hermitian and orthonormal for ⟨a, b⟩ = tr(a* b); it is
    /// obtained by Gram–Schmidt on I/√m followed by the Hermitian and
    /// anti-Hermitian parts of each generator, in order.
    pub fn new(generators: Vec<CMatrix>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::DimensionMismatch("ambient dimension must be positive".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.rows() != m || g.cols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "generator {i} is {}x{}, expected {m}x{m}",
                    g.rows(),
                    g.cols()
                )));
            }
        }
        let mut candidates = vec![CMatrix::identity(m)];
        for g in &generators {
            let gs = g.adjoint();
            // Parts that are round-off relative to g are dropped here, since
            // the Gram–Schmidt test below is relative to each candidate.
            let floor = DEPENDENCE_TOL * g.frobenius_norm();
            for part in [(g + &gs).scale_real(0.5), (g - &gs).scale(C64::new(0.0, -0.5))] {
                if part.frobenius_norm() > floor {
                    candidates.push(part);
                }
            }
        }
        let basis = hermitian_gram_schmidt(&[], &candidates);
        Ok(Self {
            m,
            generators,
            basis,
        })
    }

    /// The whole algebra M_m.
    pub fn full(m: usize) -> Self {
        let units = (0..m)
            .flat_map(|i| (0..m).map(move |j| CMatrix::unit(m, i, j)))
            .collect();
        Self::new(units, m).expect("matrix units have the right shape")
    }

    /// Diagonal matrices in M_m.
    pub fn diagonal(m: usize) -> Self {
        let units = (0..m).map(|i| CMatrix::unit(m, i, i)).collect();
        Self::new(units, m).expect("matrix units have the right shape")
    }

    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    /// Orthonormal Hermitian basis. The first element is I/√m.
    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.m * self.m
    }

    /// Complex coordinates c_k = tr(b_k x) of the orthogonal projection of x.
    pub fn coordinates(&self, x: &CMatrix) -> Result<Vec<C64>> {
        self.check_shape(x)?;
        Ok(self.basis.iter().map(|b| b.inner(x)).collect())
    }

    pub fn from_coordinates(&self, coords: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.m, self.m);
        for (b, c) in self.basis.iter().zip(coords) {
            out.axpy(*c, b);
        }
        out
    }

    /// Orthogonal projection onto S in the trace inner product.
    pub fn project(&self, x: &CMatrix) -> Result<CMatrix> {
        Ok(self.from_coordinates(&self.coordinates(x)?))
    }

    /// Frobenius distance from x to S.
    pub fn distance(&self, x: &CMatrix) -> Result<f64> {
        Ok(x.dist(&self.project(x)?))
    }

    pub fn contains(&self, x: &CMatrix, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// Orthonormal Hermitian basis of the orthogonal complement of S inside
    /// the Hermitian matrices.
    pub fn complement_basis(&self) -> Vec<CMatrix> {
        hermitian_gram_schmidt(&self.basis, &hermitian_unit_basis(self.m))
    }

    /// Samples positive elements of S.
    ///
    /// Each draw is a Gaussian Hermitian combination of the basis shifted by
    /// its least eigenvalue. Even-indexed draws sit on the boundary of the
    /// cone, odd-indexed ones get an extra random multiple of I. Outputs are
    /// scaled to unit operator norm.
    pub fn positive_cone_sample(&self, count: usize, seed: u64) -> Vec<CMatrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unif = Uniform::new(0.0, 1.0).expect("valid range");
        let id = CMatrix::identity(self.m);
        (0..count)
            .map(|idx| {
                let mut y = CMatrix::zeros(self.m, self.m);
                for b in &self.basis {
                    let w: f64 = StandardNormal.sample(&mut rng);
                    y.axpy(C64::new(w, 0.0), b);
                }
                let eig = linalg::eig_hermitian_part(&y).expect("Hermitian combination");
                let lo = eig.values[0];
                let hi = *eig.values.last().unwrap();
                let spread = hi - lo;
                let shift = if spread <= 1e-12 {
                    unif.sample(&mut rng) + 0.1
                } else if idx % 2 == 1 {
                    unif.sample(&mut rng) * spread
                } else {
                    0.0
                };
                let mut p = y.hermitian_part();
                p.axpy(C64::new(shift - lo, 0.0), &id);
                let norm = linalg::operator_norm(&p);
                if norm > 0.0 {
                    p.scale_real(1.0 / norm)
                } else {
                    id.clone()
                }
            })
            .collect()
    }

    fn check_shape(&self, x: &CMatrix) -> Result<()> {
        if x.rows() != self.m || x.cols() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "element is {}x{}, system lives in M_{}",
                x.rows(),
                x.cols(),
                self.m
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> OperatorSystemJson {
        OperatorSystemJson {
            ambient_dim: self.m,
            generators: self.generators.clone(),
        }
    }
}

/// Wire format for operator systems.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSystemJson {
    pub ambient_dim: usize,
    pub generators: Vec<CMatrix>,
}

impl TryFrom<OperatorSystemJson> for OperatorSystem {
    type Error = Error;
    fn try_from(j: OperatorSystemJson) -> Result<Self> {
        OperatorSystem::new(j.generators, j.ambient_dim)
    }
}

/// Gram–Schmidt of Hermitian candidates against an existing orthonormal
/// Hermitian family. Returns only the new basis elements.
fn hermitian_gram_schmidt(existing: &[CMatrix], candidates: &[CMatrix]) -> Vec<CMatrix> {
    let mut all: Vec<CMatrix> = existing.to_vec();
    let start = all.len();
    for c in candidates {
        let scale = c.frobenius_norm();
        if scale == 0.0 {
            continue;
        }
        let mut v = c.hermitian_part();
        for _pass in 0..2 {
            for b in &all {
                let coef = b.inner(&v).re;
                v.axpy(C64::new(-coef, 0.0), b);
            }
        }
        let norm = v.frobenius_norm();
        if norm > DEPENDENCE_TOL * scale {
            all.push(v.scale_real(1.0 / norm));
        }
    }
    all.split_off(start)
}

/// A conjugation-closed unital space of functions on Ω = {0, …, k−1}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionSystem {
    pub omega: usize,
    #[serde(with = "function_list")]
    pub functions: Vec<Vec<C64>>,
}

pub(crate) mod function_list {
    use crate::linalg::C64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            v.iter()
                .map(|f| f.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        let raw: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|f| f.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect())
    }
}

impl FunctionSystem {
    pub fn new(omega: usize, functions: Vec<Vec<C64>>) -> Result<Self> {
        let fs = Self { omega, functions };
        fs.validate()?;
        Ok(fs)
    }

    pub fn from_real(omega: usize, functions: &[&[f64]]) -> Result<Self> {
        let f = functions
            .iter()
            .map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::new(omega, f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega == 0 {
            return Err(Error::DimensionMismatch("Ω must be nonempty".into()));
        }
        for (i, f) in self.functions.iter().enumerate() {
            if f.len() != self.omega {
                return Err(Error::DimensionMismatch(format!(
                    "function {i} has {} values, |Ω| = {}",
                    f.len(),
                    self.omega
                )));
            }
        }
        Ok(())
    }

    /// Generators with the constant function and conjugates added.
    pub fn closed_generators(&self) -> Vec<Vec<C64>> {
        let mut out = vec![vec![C64::new(1.0, 0.0); self.omega]];
        for f in &self.functions {
            out.push(f.clone());
            out.push(f.iter().map(|z| z.conj()).collect());
        }
        out
    }

    /// Dimension of the conjugation-closed unital span.
    pub fn span_dim(&self) -> usize {
        let gens = self.closed_generators();
        let k = self.omega;
        let mat = CMatrix::from_fn(k, gens.len(), |i, j| gens[j][i]);
        let sv = linalg::singular_values(&mat);
        let top = sv.first().copied().unwrap_or(0.0);
        sv.iter().filter(|&&s| s > 1e-10 * top.max(1.0)).count()
    }

    pub fn separates_points(&self) -> bool {
        let gens = self.closed_generators();
        for a in 0..self.omega {
            for b in a + 1..self.omega {
                let split = gens.iter().any(|f| (f[a] - f[b]).norm() > 1e-12);
                if !split {
                    return false;
                }
            }
        }
        true
    }

    /// Embeds the functions as diagonal matrices in M_|Ω|.
    pub fn to_operator_system(&self) -> Result<OperatorSystem> {
        self.validate()?;
        let gens = self
            .functions
            .iter()
            .map(|f| CMatrix::diag(f))
            .collect();
        OperatorSystem::new(gens, self.omega)
    }
}
