use opsys_toolkit::haar::haar_unitary;
use opsys_toolkit::iso;
use opsys_toolkit::CMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> opsys_toolkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = 2;

    let u0 = haar_unitary(m, &mut rng);
    let p = iso::paulsen_embed(&[u0], m)?;
    println!("M = span{{u}}: corner dims {:?}", p.corner_dims());

    let full: Vec<CMatrix> = (0..m).flat_map(|i| (0..m).map(move |j| CMatrix::unit(m, i, j))).collect();
    let mut p = iso::paulsen_embed(&full, m)?;
    println!("M = M_2: algebra dim {}", p.algebra.len());

    let (u, v) = (haar_unitary(m, &mut rng), haar_unitary(m, &mut rng));
    p.attach_unitaries(&u, &v)?;
    let a = p.random_corner_element(0, 0, &mut rng);
    let b = p.random_corner_element(0, 1, &mut rng);
    let c = p.random_corner_element(1, 1, &mut rng);
    println!("cocycle residual, Ad(u ⊕ v):   {:.2e}", p.cocycle_check(&a, &b, &c, 1e-10)?);
    p.attach_perturbed(&u, &v, 0.1)?;
    println!("cocycle residual, perturbed:   {:.2e}", p.cocycle_check(&a, &b, &c, 1e-10)?);
    Ok(())
}
