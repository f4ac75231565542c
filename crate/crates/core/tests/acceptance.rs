//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//!     cargo test --test acceptance

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use opsys_toolkit::cpmaps::{self, CPMap, PositiveFunctional, StateWeights};
use opsys_toolkit::extend::{self, InvarianceOutcome, SystemFunctional};
use opsys_toolkit::haar::{haar_unitary, HaarNeighborhood};
use opsys_toolkit::linalg::{max_eigenvalue, min_eigenvalue, operator_norm, traceless_hermitian_basis};
use opsys_toolkit::opsys::{FunctionSystem, OperatorSystem};
use opsys_toolkit::{haar, iso, CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = std::result::Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre(r: usize, c: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn random_density(d: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, rank, rng);
    let p = &g * &g.adjoint();
    let t = p.trace().re;
    p.scale_real(1.0 / t)
}

fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
    ginibre(d, d, rng).hermitian_part()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: opsys_toolkit::Error) -> String {
    format!("error: {e}")
}

// 1. E_U(x) = c·x + (1 − c)·tr₀(x)·I on traceless Hermitian bases.
fn depolarizing_law() -> Outcome {
    let samples = 200_000;
    let mut worst_resid: f64 = 0.0;
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [2, 3] {
        let mut est = Vec::new();
        for (i, delta) in [0.25, 0.5, 1.0].into_iter().enumerate() {
            let mut u = HaarNeighborhood::new(n, delta, 100 + 10 * n as u64 + i as u64).map_err(err)?;
            let basis = traceless_hermitian_basis(n);
            let means: Vec<CMatrix> = basis
                .iter()
                .map(|b| u.average_conjugation(b, samples))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            // Least-squares c over the basis; tr₀(b) = 0 so the model is c·b.
            let num: f64 = basis.iter().zip(&means).map(|(b, e)| b.inner(e).re).sum();
            let den: f64 = basis.iter().map(|b| b.inner(b).re).sum();
            let cfit = num / den;
            let off: f64 = basis
                .iter()
                .zip(&means)
                .map(|(b, e)| e.dist(&b.scale_real(cfit)).powi(2))
                .sum::<f64>()
                .sqrt();
            let rel = off / den.sqrt();
            worst_resid = worst_resid.max(rel);
            let (cu, hw) = u.estimate_c_u(samples).map_err(err)?;
            ok &= rel < 1e-2 && cfit > 0.0 && cfit < 1.0 && (cfit - cu).abs() <= hw;
            est.push((delta, cu, hw));
            lines.push(format!("n={n} δ={delta} c={cfit:.4}"));
        }
        let (_, c25, h25) = est[0];
        let (_, c10, h10) = est[2];
        let sep = (c25 - c10) / (h25 * h25 + h10 * h10).sqrt();
        ok &= sep > 1.0;
        lines.push(format!("n={n} separation {:.0}σ", 3.0 * sep));
    }
    check(ok, format!("max rel residual {worst_resid:.2e}; {}", lines.join(", ")))
}

// 2. E_U(gxg*) = gE_U(x)g* and ⟨x, E_U(y)⟩ = ⟨E_U(x), y⟩ up to MC error.
fn covariance_self_adjoint() -> Outcome {
    let mut r = rng(2);
    let samples = 20_000;
    let mut worst_cov: f64 = 0.0;
    let mut worst_adj: f64 = 0.0;
    for i in 0..50 {
        let n = 2 + i % 2;
        let delta = [0.25, 0.5, 1.0][i % 3];
        let u = HaarNeighborhood::new(n, delta, 1000 + i as u64).map_err(err)?;
        let g = haar_unitary(n, &mut r);
        let x = ginibre(n, n, &mut r);
        let y = ginibre(n, n, &mut r);
        let gx = &(&g * &x) * &g.adjoint();
        let e_gx = u.average_conjugation_stats(&gx, samples).map_err(err)?;
        let e_x = u.average_conjugation_stats(&x, samples).map_err(err)?;
        let e_y = u.average_conjugation_stats(&y, samples).map_err(err)?;
        let cov = e_gx.mean.dist(&(&(&g * &e_x.mean) * &g.adjoint()));
        let cov_bar = 3.0 * (e_gx.std_error.powi(2) + e_x.std_error.powi(2)).sqrt();
        let adj = (x.inner(&e_y.mean) - e_x.mean.inner(&y)).norm();
        let adj_bar = 3.0 * (x.frobenius_norm() * e_y.std_error + y.frobenius_norm() * e_x.std_error);
        worst_cov = worst_cov.max(cov / cov_bar);
        worst_adj = worst_adj.max(adj / adj_bar);
    }
    check(
        worst_cov < 1.0 && worst_adj < 1.0,
        format!("max residual / 3σ bar: covariance {worst_cov:.2}, self-adjointness {worst_adj:.2}"),
    )
}

// Oracle: s(X) = (1/n) Σ_jk τ(x_jk)_jk with X = Σ x_jk ⊗ e_jk.
fn functional_oracle(tau: &CPMap, big: &CMatrix, weights: Option<&[C64]>) -> C64 {
    let (m, n) = (tau.m(), tau.n());
    let mut total = c(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let xjk = CMatrix::from_fn(m, m, |a, b| big[(a * n + j, b * n + k)]);
            let t = tau.apply(&xjk).unwrap()[(j, k)];
            total += match weights {
                Some(w) => t * w[j].conj() * w[k],
                None => t / n as f64,
            };
        }
    }
    total
}

// 3. τ ↔ s round trips and the tr₀ / φ₀ identities.
fn correspondence() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let m = r.random_range(1..=4);
        let n = r.random_range(1..=4);
        let kraus: Vec<CMatrix> = (0..r.random_range(1..=3)).map(|_| ginibre(n, m, &mut r)).collect();
        let tau = CPMap::from_kraus(&kraus).map_err(err)?;
        let s = cpmaps::functional_from_cpmap(&tau, n).map_err(err)?;
        let back = cpmaps::cpmap_from_functional(&s).map_err(err)?;
        for (a, b) in back.basis_images().iter().zip(tau.basis_images()) {
            worst = worst.max(a.dist(b) / (1.0 + b.frobenius_norm()));
        }
        let big = ginibre(m * n, m * n, &mut r);
        worst = worst.max((s.evaluate(&big).map_err(err)? - functional_oracle(&tau, &big, None)).norm());

        let x = ginibre(m, m, &mut r);
        let x_id = opsys_toolkit::linalg::kron(&x, &CMatrix::identity(n));
        let tr0 = tau.apply(&x).map_err(err)?.trace() / n as f64;
        worst = worst.max((s.evaluate(&x_id).map_err(err)? - tr0).norm());

        // Weighted: s_{τ,λ}(x ⊗ I) = Σ |λ_i|² τ(x)_ii.
        let raw: Vec<C64> = (0..n).map(|_| c(r.sample(StandardNormal), r.sample(StandardNormal))).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let lam: Vec<C64> = raw.iter().map(|z| z / norm).collect();
        let w = StateWeights::new(lam.clone()).map_err(err)?;
        let sw = cpmaps::weighted_functional(&tau, &w).map_err(err)?;
        let tx = tau.apply(&x).map_err(err)?;
        let phi0: C64 = (0..n).map(|i| tx[(i, i)] * lam[i].norm_sqr()).sum();
        worst = worst.max((sw.evaluate(&x_id).map_err(err)? - phi0).norm());
        worst = worst.max((sw.evaluate(&big).map_err(err)? - functional_oracle(&tau, &big, Some(&lam))).norm());

        // s → τ → s from a random positive functional.
        let rho = random_density(m * n, r.random_range(1..=m * n), &mut r);
        let s0 = PositiveFunctional::from_density(m, n, rho.clone()).map_err(err)?;
        let t0 = cpmaps::cpmap_from_functional(&s0).map_err(err)?;
        let s1 = cpmaps::functional_from_cpmap(&t0, n).map_err(err)?;
        worst = worst.max(s1.density_matrix().map_err(err)?.dist(&rho));
        worst = worst.max((s1.evaluate(&big).map_err(err)? - s0.evaluate(&big).map_err(err)?).norm());
    }
    check(worst < 1e-10, format!("max residual {worst:.2e} over 50 maps"))
}

fn random_system(m: usize, max_dim: usize, rng: &mut impl Rng) -> OperatorSystem {
    loop {
        let gens: Vec<CMatrix> = if rng.random_bool(0.5) {
            (0..rng.random_range(1..=2)).map(|_| ginibre(m, m, rng)).collect()
        } else {
            (0..rng.random_range(1..=max_dim - 1)).map(|_| random_hermitian(m, rng)).collect()
        };
        let s = OperatorSystem::new(gens, m).unwrap();
        if s.dim() <= max_dim {
            return s;
        }
    }
}

// 4. β₂ = P_f(x), β₁ = −P_f(−x), 0 ≤ β₁ ≤ β₂, β₂ > 0 for faithful f.
fn extension_duality() -> Outcome {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    let mut min_beta2 = f64::INFINITY;
    let mut order_ok = true;
    for _ in 0..30 {
        let m = r.random_range(2..=4);
        let s = random_system(m, 6, &mut r);
        let rho = random_density(m, m, &mut r);
        let f = SystemFunctional::from_density(&s, &rho).map_err(err)?;
        let g = ginibre(m, r.random_range(1..=m), &mut r);
        let x = &g * &g.adjoint();
        let x = x.scale_real(1.0 / operator_norm(&x));
        let iv = extend::extension_interval(&f, &x).map_err(err)?;
        let up = extend::minkowski_value(&f, &x).map_err(err)?.p_value;
        let down = -extend::minkowski_value(&f, &x.scale_real(-1.0)).map_err(err)?.p_value;
        worst = worst.max((iv.beta2 - up).abs()).max((iv.beta1 - down).abs());
        order_ok &= iv.beta1 >= -1e-8 && iv.beta1 <= iv.beta2 + 1e-8;
        min_beta2 = min_beta2.min(iv.beta2);
    }
    check(
        worst < 1e-6 && order_ok && min_beta2 > 1e-8,
        format!("max |β − P_f| {worst:.2e}, ordering {order_ok}, min β₂ {min_beta2:.3e}"),
    )
}

// 5. Faithful UCP extensions from random S ⊆ M₃ to M₂.
fn faithful_extensions() -> Outcome {
    let mut r = rng(5);
    let (mut worst_agree, mut min_margin, mut worst_cp): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    for _ in 0..20 {
        let s = random_system(3, 6, &mut r);
        let tau = CPMap::random_ucp(3, 2, 3, &mut r).restrict(&s).map_err(err)?;
        let fe = extend::faithful_extension(&tau).map_err(err)?;
        let eta = &fe.eta;
        for b in s.basis() {
            worst_agree = worst_agree.max(eta.apply(b).map_err(err)?.dist(&tau.apply(b).map_err(err)?));
        }
        // tr₂ of the Choi matrix: R_pq = tr η(e_pq).
        let red = CMatrix::from_fn(3, 3, |p, q| eta.apply(&CMatrix::unit(3, p, q)).unwrap().trace());
        min_margin = min_margin.min(min_eigenvalue(&red, 1e-12).map_err(err)?);
        worst_cp = worst_cp
            .max(-eta.choi_min_eigenvalue().map_err(err)?)
            .max(eta.unital_residual().map_err(err)?);
    }
    check(
        worst_agree < 1e-7 && min_margin > 1e-6 && worst_cp < 1e-7,
        format!("agreement {worst_agree:.2e}, min reduced-Choi eigenvalue {min_margin:.3e}, CP/unital defect {worst_cp:.1e}"),
    )
}

// 6. Invariance-constrained extension on the 2×2 block system.
fn block_state_control() -> Outcome {
    let neg = extend::block_state_example([1.0, 0.0], [0.5, 0.5]).map_err(err)?;
    let neg_out = extend::invariance_constrained_extension(&neg.tau, &neg.phi_density, Some(&neg.invariance_domain))
        .map_err(err)?;
    let neg_detail = match &neg_out {
        InvarianceOutcome::Infeasible { certificate, certificate_value } if !certificate.is_empty() => {
            Ok(format!("point evaluation infeasible (certificate {certificate_value:.3e})"))
        }
        InvarianceOutcome::Infeasible { .. } => Err("infeasible without a certificate".to_string()),
        InvarianceOutcome::Feasible(_) => Err("point evaluation reported feasible".to_string()),
    };
    let pos = extend::block_state_example([0.5, 0.5], [0.5, 0.5]).map_err(err)?;
    let pos_out = extend::invariance_constrained_extension(&pos.tau, &pos.phi_density, Some(&pos.invariance_domain))
        .map_err(err)?;
    let pos_detail = match pos_out {
        InvarianceOutcome::Feasible(eta) => {
            let agree = extend::agreement_residual(&eta, &pos.tau).map_err(err)?;
            let drift = pos
                .invariance_domain
                .basis()
                .iter()
                .map(|d| (eta.apply(d).unwrap().trace() / eta.n() as f64 - pos.phi_density.trace_product(d)).norm())
                .fold(0.0, f64::max);
            let cp = eta.choi_min_eigenvalue().map_err(err)?;
            if agree < 1e-7 && drift < 1e-7 && cp > -1e-7 {
                Ok(format!("m = φ₀ feasible (agreement {agree:.1e}, invariance {drift:.1e})"))
            } else {
                Err(format!("m = φ₀ extension defective: {agree:.1e} {drift:.1e} {cp:.1e}"))
            }
        }
        InvarianceOutcome::Infeasible { .. } => Err("m = φ₀ reported infeasible".to_string()),
    };
    match (neg_detail, pos_detail) {
        (Ok(a), Ok(b)) => Ok(format!("{a}; {b}")),
        (a, b) => Err(format!("{}; {}", a.unwrap_or_else(|e| e), b.unwrap_or_else(|e| e))),
    }
}

// 7. Invariant states of τ_c = c·τ + (1 − c)·tr₀(τ(·))·I by the series.
fn invariant_series() -> Outcome {
    let mut r = rng(7);
    let (mut worst, mut min_pd, mut faithful_count) = (0.0f64, f64::INFINITY, 0);
    for i in 0..20 {
        let tau = CPMap::random_ucp(3, 3, 1 + i % 4, &mut r);
        for cc in [0.3, 0.7] {
            let phi = haar::invariant_state_series(&tau, cc, 1e-14).map_err(err)?;
            let rho = phi.density_matrix().map_err(err)?;
            let drift = CMatrix::from_fn(3, 3, |j, k| {
                let y = tau.apply(&CMatrix::unit(3, j, k)).unwrap();
                let mut yc = y.scale_real(cc);
                yc += &CMatrix::identity(3).scale(y.trace() * ((1.0 - cc) / 3.0));
                rho.trace_product(&yc) - rho[(k, j)]
            });
            worst = worst.max(operator_norm(&drift)).max((rho.trace().re - 1.0).abs());
            if cpmaps::is_faithful(&tau).map_err(err)? {
                faithful_count += 1;
                min_pd = min_pd.min(min_eigenvalue(&rho, 1e-14).map_err(err)?);
            }
        }
    }
    check(
        worst < 1e-8 && min_pd > 1e-8,
        format!("max ‖φ∘τ_c − φ‖ {worst:.1e}; min eigenvalue {min_pd:.3e} over {faithful_count} faithful cases"),
    )
}

// 8. Implementing unitaries for (x, uxu*) and separation of inequivalent pairs.
fn unitary_equivalence() -> Outcome {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    let mut grid_ok = true;
    for i in 0..50 {
        let n = 1 + i % 4;
        let x = if i % 5 == 0 { random_hermitian(n, &mut r) } else { ginibre(n, n, &mut r) };
        let u = haar_unitary(n, &mut r);
        let y = &(&u * &x) * &u.adjoint();
        let found = iso::find_implementing_unitary(&x, &y, 1e-10, 16, i as u64).map_err(err)?;
        let w = &found.u;
        let resid = operator_norm(&(&(&(w * &x) * &w.adjoint()) - &y));
        let unit = operator_norm(&(&(&w.adjoint() * w) - &CMatrix::identity(n)));
        worst = worst.max(resid).max(unit);
        let (ks, ls) = iso::default_grid(&x, 3);
        grid_ok &= iso::invariants_match(&x, &y, &ks, &ls, 1e-8);
    }
    let mut separated = 0;
    for i in 0..20 {
        let n = 2 + i % 3;
        let x = ginibre(n, n, &mut r);
        let y = if i % 2 == 0 {
            ginibre(n, n, &mut r)
        } else {
            let u = haar_unitary(n, &mut r);
            let mut z = x.clone();
            z.axpy(c(0.05, 0.0), &ginibre(n, n, &mut r));
            &(&u * &z) * &u.adjoint()
        };
        let (ks, ls) = iso::default_grid(&x, 3);
        if !iso::invariants_match(&x, &y, &ks, &ls, 1e-8) {
            separated += 1;
        }
    }
    check(
        worst < 1e-8 && grid_ok && separated == 20,
        format!("max residual {worst:.2e}, equivalent grids match {grid_ok}, {separated}/20 inequivalent separated"),
    )
}

// 9. x_k(λ) against the norm of the full km×km matrix.
fn invariant_reduction() -> Outcome {
    let mut r = rng(9);
    let lambdas = [c(0.0, 0.0), c(1.0, 0.0), c(-1.5, 0.0), c(0.0, 1.0), c(0.5, -0.7), c(0.0, -2.0)];
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let m = 1 + i % 4;
        let x = ginibre(m, m, &mut r);
        for k in 1..=4 {
            for &l in &lambdas {
                let d = k * m;
                let big = CMatrix::from_fn(d, d, |p, q| {
                    let v = x[(p % m, q % m)];
                    if p == q {
                        v + l
                    } else {
                        v
                    }
                });
                // ‖A‖ is the top eigenvalue of [[0, A], [A*, 0]].
                let mut dil = CMatrix::zeros(2 * d, 2 * d);
                dil.set_block(0, d, &big);
                dil.set_block(d, 0, &big.adjoint());
                let brute = max_eigenvalue(&dil, 1e-14).map_err(err)?;
                worst = worst.max((iso::invariant(&x, k, l) - brute).abs());
            }
        }
    }
    check(worst < 1e-10, format!("max deviation {worst:.2e} over 480 values"))
}

// 10. Cocycle relation for Ad(u ⊕ v) and a corrupted control.
fn cocycle() -> Outcome {
    let mut r = rng(10);
    let (mut worst, mut least_bad) = (0.0f64, f64::INFINITY);
    for t in 0..10 {
        let m = 2 + t % 2;
        let gens: Vec<CMatrix> = (0..1 + t % 2).map(|_| ginibre(m, m, &mut r)).collect();
        let mut good = iso::paulsen_embed(&gens, m).map_err(err)?;
        let mut bad = good.clone();
        let (u, v) = (haar_unitary(m, &mut r), haar_unitary(m, &mut r));
        good.attach_unitaries(&u, &v).map_err(err)?;
        bad.attach_perturbed(&u, &v, 0.1).map_err(err)?;
        for _ in 0..5 {
            let a = good.random_corner_element(0, 0, &mut r);
            let b = good.random_corner_element(0, 1, &mut r);
            let cc = good.random_corner_element(1, 1, &mut r);
            worst = worst.max(good.cocycle_check(&a, &b, &cc, 1e-10).map_err(err)?);
            least_bad = least_bad.min(bad.cocycle_check(&a, &b, &cc, 1e-10).map_err(err)?);
        }
    }
    check(
        worst < 1e-10 && least_bad > 1e-3,
        format!("50 triples: max residual {worst:.2e}, corrupted min residual {least_bad:.3e}"),
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

// 11. Recovering γ from the induced map on a separating function system.
fn stone_recovery() -> Outcome {
    let mut r = rng(11);
    let (mut checked, mut failures) = (0, 0);
    for _ in 0..100 {
        let omega = r.random_range(2..=5);
        let f = loop {
            let funcs: Vec<Vec<C64>> = (0..r.random_range(1..=3))
                .map(|_| (0..omega).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect())
                .collect();
            let f = FunctionSystem::new(omega, funcs).map_err(err)?;
            if f.separates_points() {
                break f;
            }
        };
        for gamma in permutations(omega) {
            let g = iso::induced_map(&f, &gamma);
            let fp = FunctionSystem::new(omega, g.images.clone()).map_err(err)?;
            checked += 1;
            match iso::stone_recover_permutation(&f, &fp, &g) {
                Ok(found) if found == gamma => {}
                _ => failures += 1,
            }
        }
    }
    check(failures == 0, format!("{failures} failures in {checked} recoveries over 100 systems"))
}

// 12. Fixed points of Ad(u) equal the commutant of u.
fn fixed_points() -> Outcome {
    let mut r = rng(12);
    let mut worst: f64 = 0.0;
    let mut dims = Vec::new();
    let spectra: [[C64; 3]; 3] = [
        [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
        [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)],
        [c(0.6, 0.8), c(0.6, 0.8), c(0.6, 0.8)],
    ];
    for spec in spectra {
        let w = haar_unitary(3, &mut r);
        let u = &(&w * &CMatrix::diag(&spec)) * &w.adjoint();
        let fp = cpmaps::fixed_point_algebra(&CPMap::conjugation(&u), &CMatrix::identity(3).scale_real(1.0 / 3.0), 1e-10)
            .map_err(err)?;
        // Commutant: W·e_jk·W* over eigenvalue-equal pairs (j, k).
        let mut comm = Vec::new();
        for j in 0..3 {
            for k in 0..3 {
                if (spec[j] - spec[k]).norm() < 1e-12 {
                    comm.push(&(&w * &CMatrix::unit(3, j, k)) * &w.adjoint());
                }
            }
        }
        let inside = comm.iter().map(|x| fp.distance(x)).fold(0.0, f64::max);
        let commutes = fp
            .basis
            .iter()
            .map(|b| operator_norm(&(&(&u * b) - &(b * &u))))
            .fold(0.0, f64::max);
        worst = worst.max(fp.product_residual).max(fp.adjoint_residual).max(inside).max(commutes);
        if fp.dim() != comm.len() {
            return Err(format!("dimension {} vs commutant {}", fp.dim(), comm.len()));
        }
        dims.push(fp.dim());
    }
    check(worst < 1e-9, format!("dims {dims:?}, max closure/commutant residual {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("depolarizing law", depolarizing_law),
        ("covariance and self-adjointness", covariance_self_adjoint),
        ("correspondence round trip", correspondence),
        ("extension interval duality", extension_duality),
        ("faithful extensions", faithful_extensions),
        ("block-state negative control", block_state_control),
        ("invariant state series", invariant_series),
        ("implementing unitaries", unitary_equivalence),
        ("invariant reduction", invariant_reduction),
        ("cocycle relation", cocycle),
        ("permutation recovery", stone_recovery),
        ("fixed-point algebra", fixed_points),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {d}", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
