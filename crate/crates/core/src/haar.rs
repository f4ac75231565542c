//! Averaging over conjugation-invariant neighbourhoods of the identity in U_n.
//!
//! A neighbourhood is U = {λ : ‖λ − I‖ < δ}. Averaging λxλ* over U with
//! respect to the restricted Haar measure gives the depolarizing map
//! x ↦ c·x + (1 − c)·tr₀(x)·I for a constant c = c_U ∈ [0, 1).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpmaps::{block_of, ginibre, CPMap, Domain, PositiveFunctional};
use crate::error::{Error, Result};
use crate::linalg::{kron, operator_norm, orthonormalize_columns, CMatrix, C64};

/// Samples drawn per RNG stream.
const CHUNK: usize = 512;
/// Proposals allowed for one accepted sample before the sampler gives up.
const MAX_PROPOSALS: usize = 2_000_000;

/// The neighbourhood {λ ∈ U_n : ‖λ − I‖ < δ} together with its sampler seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HaarNeighborhood {
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    /// Fitted c_U and its 3σ half-width, once estimated.
    pub c_estimate: Option<(f64, f64)>,
}

/// Monte Carlo mean with the standard error of its Frobenius deviation.
#[derive(Clone, Debug)]
pub struct McEstimate {
    pub mean: CMatrix,
    pub std_error: f64,
    pub samples: usize,
}

/// Haar-distributed unitary: Gram–Schmidt on a Ginibre matrix. The implied
/// triangular factor has positive diagonal, which fixes the phase ambiguity.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    loop {
        if let Ok(q) = orthonormalize_columns(&ginibre(n, n, rng)) {
            return q;
        }
    }
}

/// ‖λ − I‖ < δ.
pub fn in_neighborhood(lambda: &CMatrix, delta: f64) -> bool {
    let n = lambda.rows();
    operator_norm(&(lambda - &CMatrix::identity(n))) < delta
}

impl HaarNeighborhood {
    pub fn new(n: usize, delta: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            n,
            delta,
            seed,
            c_estimate: None,
        })
    }

    /// Largest admissible eigenphase: |e^{iθ} − 1| < δ ⇔ |θ| < 2·asin(δ/2).
    fn theta_max(&self) -> f64 {
        if self.delta >= 2.0 {
            PI
        } else {
            2.0 * (self.delta / 2.0).asin()
        }
    }

    /// One sample from Haar measure conditioned on U.
    ///
    /// Unitaries in U are exactly those with every eigenphase in
    /// (−θ_max, θ_max), and U is conjugation invariant, so the conditioned law
    /// factors into Haar eigenvectors and eigenphases with the Weyl density
    /// ∏|e^{iθ_j} − e^{iθ_k}|² restricted to the arc. The phases are drawn by
    /// rejection against uniform proposals.
    fn sample_one(&self, rng: &mut impl Rng) -> Result<CMatrix> {
        let n = self.n;
        if self.delta >= 2.0 {
            return Ok(haar_unitary(n, rng));
        }
        let tmax = self.theta_max();
        let pair_bound = 2.0 * tmax.min(PI / 2.0).sin();
        let mut theta = vec![0.0; n];
        for _ in 0..MAX_PROPOSALS {
            for t in theta.iter_mut() {
                *t = rng.random_range(-tmax..tmax);
            }
            let mut ratio = 1.0;
            for j in 0..n {
                for k in j + 1..n {
                    let d = 2.0 * ((theta[j] - theta[k]) / 2.0).sin().abs() / pair_bound;
                    ratio *= d * d;
                }
            }
            if rng.random::<f64>() < ratio {
                let v = haar_unitary(n, rng);
                let phases: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
                let lambda = &(&v * &CMatrix::diag(&phases)) * &v.adjoint();
                return Ok(lambda);
            }
        }
        Err(Error::RejectionBudgetExceeded {
            rate: 1.0 / MAX_PROPOSALS as f64,
        })
    }

    fn chunk_rng(&self, chunk: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk as u64);
        rng
    }

    /// Run `f` over `count` samples, chunk by chunk in parallel, and return the
    /// per-chunk results in order. Output depends only on the seed.
    fn map_chunks<T, F>(&self, count: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&[CMatrix]) -> T + Sync,
    {
        let chunks = count.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = self.chunk_rng(c);
                let len = CHUNK.min(count - c * CHUNK);
                let samples = (0..len)
                    .map(|_| self.sample_one(&mut rng))
                    .collect::<Result<Vec<_>>>()?;
                Ok(f(&samples))
            })
            .collect()
    }

    pub fn sample_neighborhood(&self, count: usize) -> Result<Vec<CMatrix>> {
        if count == 0 {
            return Err(Error::InvalidInput("count must be at least 1".into()));
        }
        Ok(self
            .map_chunks(count, |s| s.to_vec())?
            .into_iter()
            .flatten()
            .collect())
    }

    /// Monte Carlo estimate of E_U(x) = ∫_U λxλ* dμ / μ(U).
    pub fn average_conjugation(&self, x: &CMatrix, samples: usize) -> Result<CMatrix> {
        Ok(self.average_map(x, samples, |l, x| &(l * x) * &l.adjoint())?.mean)
    }

    /// Same as [`average_conjugation`](Self::average_conjugation), with an error bar.
    pub fn average_conjugation_stats(&self, x: &CMatrix, samples: usize) -> Result<McEstimate> {
        if !x.is_square() || x.rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "x is {}x{}, neighbourhood lives in U_{}",
                x.rows(),
                x.cols(),
                self.n
            )));
        }
        self.average_map(x, samples, |l, x| &(l * x) * &l.adjoint())
    }

    /// Monte Carlo average of (I ⊗ λ)Y(I ⊗ λ)* for Y ∈ M_n(M_m).
    pub fn average_block_conjugation(&self, y: &CMatrix, m: usize, samples: usize) -> Result<McEstimate> {
        if y.rows() != m * self.n || !y.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "Y is {}x{}, expected {}",
                y.rows(),
                y.cols(),
                m * self.n
            )));
        }
        let id = CMatrix::identity(m);
        self.average_map(y, samples, |l, y| {
            let big = kron(&id, l);
            &(&big * y) * &big.adjoint()
        })
    }

    fn average_map<F>(&self, x: &CMatrix, samples: usize, f: F) -> Result<McEstimate>
    where
        F: Fn(&CMatrix, &CMatrix) -> CMatrix + Sync,
    {
        if samples == 0 {
            return Err(Error::InvalidInput("samples must be at least 1".into()));
        }
        // Per chunk: sum of images and sum of squared Frobenius norms.
        let parts = self.map_chunks(samples, |s| {
            let mut sum = CMatrix::zeros(x.rows(), x.cols());
            let mut sq = 0.0;
            for l in s {
                let y = f(l, x);
                sq += y.frobenius_norm().powi(2);
                sum += &y;
            }
            (sum, sq)
        })?;
        let mut sum = CMatrix::zeros(x.rows(), x.cols());
        let mut sq = 0.0;
        for (s, q) in parts {
            sum += &s;
            sq += q;
        }
        let nf = samples as f64;
        let mean = sum.scale_real(1.0 / nf);
        let var = if samples > 1 {
            ((sq / nf - mean.frobenius_norm().powi(2)) * nf / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Ok(McEstimate {
            mean,
            std_error: (var / nf).sqrt(),
            samples,
        })
    }

    /// Estimate c_U and a 3σ half-width, and cache them.
    ///
    /// For an orthonormal traceless Hermitian basis {b}, c = tr(b·E_U(b)) for
    /// each b, so the basis average of the per-sample values
    /// Σ_b tr(bλbλ*)/(n² − 1) = (|tr λ|² − 1)/(n² − 1) is unbiased for c.
    pub fn estimate_c_u(&mut self, samples: usize) -> Result<(f64, f64)> {
        if self.n < 2 {
            return Err(Error::DegenerateDimension);
        }
        if samples < 2 {
            return Err(Error::InvalidInput("need at least 2 samples".into()));
        }
        let denom = (self.n * self.n - 1) as f64;
        let parts = self.map_chunks(samples, |s| {
            s.iter().fold((0.0, 0.0), |(a, b), l| {
                let v = (l.trace().norm_sqr() - 1.0) / denom;
                (a + v, b + v * v)
            })
        })?;
        let (sum, sq) = parts.into_iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let nf = samples as f64;
        let c = sum / nf;
        let var = ((sq / nf - c * c) * nf / (nf - 1.0)).max(0.0);
        let half_width = 3.0 * (var / nf).sqrt();
        self.c_estimate = Some((c, half_width));
        Ok((c, half_width))
    }
}

/// Normalized trace tr(x)/n.
pub fn tr0(x: &CMatrix) -> C64 {
    x.trace() / x.rows() as f64
}

/// x ↦ c·x + (1 − c)·tr₀(x)·I.
pub fn depolarize(x: &CMatrix, c: f64) -> CMatrix {
    let n = x.rows();
    if n == 1 {
        return x.clone();
    }
    let mut out = x.scale_real(c);
    out += &CMatrix::identity(n).scale(tr0(x) * (1.0 - c));
    out
}

/// [y_jk] ↦ c·[y_jk] + (1 − c)·[δ_jk·y] with y = (1/n)Σ_j y_jj, for Y stored
/// as an mn×mn matrix in M_m ⊗ M_n.
pub fn block_average(y: &CMatrix, m: usize, n: usize, c: f64) -> Result<CMatrix> {
    if !y.is_square() || y.rows() != m * n {
        return Err(Error::ShapeMismatch(format!(
            "Y is {}x{}, expected {}",
            y.rows(),
            y.cols(),
            m * n
        )));
    }
    let mut diag = CMatrix::zeros(m, m);
    for j in 0..n {
        diag += &block_of(y, m, n, j, j);
    }
    let diag = diag.scale_real(1.0 / n as f64);
    let mut out = y.scale_real(c);
    out += &kron(&diag, &CMatrix::identity(n)).scale_real(1.0 - c);
    Ok(out)
}

/// f ↦ f_U with f_U(Y) = f(block_average(Y, c)), on the coefficient basis.
pub fn functional_transform(f: &PositiveFunctional, c: f64) -> Result<PositiveFunctional> {
    let n = f.level();
    let dim = f.domain().dim();
    let mut coeffs = Vec::with_capacity(dim * n * n);
    for a in 0..dim {
        let avg: C64 = (0..n).map(|l| f.coefficient(a, l, l)).sum::<C64>() / n as f64;
        for j in 0..n {
            for k in 0..n {
                let mut v = f.coefficient(a, j, k) * c;
                if j == k {
                    v += avg * (1.0 - c);
                }
                coeffs.push(v);
            }
        }
    }
    PositiveFunctional::new(f.domain().clone(), n, coeffs)
}

/// τ_c(x) = c·τ(x) + (1 − c)·tr₀(τ(x))·I.
pub fn tau_c(tau: &CPMap, c: f64) -> Result<CPMap> {
    let images = tau.basis_images().iter().map(|y| depolarize(y, c)).collect();
    CPMap::new(tau.domain().clone(), tau.n(), images)
}

/// Number of terms kept in the invariant-state series.
pub fn series_terms(c: f64, tol: f64) -> usize {
    if c <= 0.0 {
        return 1;
    }
    let bound = tol * (1.0 - c);
    let mut k = 0;
    let mut ck = 1.0;
    while ck >= bound {
        ck *= c;
        k += 1;
    }
    k.max(1)
}

/// φ(x) = (1 − c)·Σ_k c^k·tr₀(τ^{k+1}(x)), the invariant state of τ_c, truncated
/// at the first K with c^K < tol·(1 − c). Its density is
/// (1 − c)·Σ_k c^k·(τ†)^{k+1}(I/m).
pub fn invariant_state_series(tau: &CPMap, c: f64, tol: f64) -> Result<PositiveFunctional> {
    let Domain::Full(m) = *tau.domain() else {
        return Err(Error::DomainNotFullAlgebra);
    };
    if tau.n() != m {
        return Err(Error::DimensionMismatch(format!(
            "τ maps M_{m} into M_{}; the series needs an endomorphism",
            tau.n()
        )));
    }
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidInput(format!("c must lie in [0, 1), got {c}")));
    }
    let terms = series_terms(c, tol);
    let mut power = tau.dual_apply(&CMatrix::identity(m).scale_real(1.0 / m as f64))?;
    let mut rho = CMatrix::zeros(m, m);
    let mut weight = 1.0 - c;
    for _ in 0..terms {
        rho += &power.scale_real(weight);
        power = tau.dual_apply(&power)?;
        weight *= c;
    }
    PositiveFunctional::from_density(m, 1, rho.hermitian_part())
}
