//! How far can a state on S be pushed on a new element x?

use opsys_toolkit::extend::{self, SystemFunctional};
use opsys_toolkit::opsys::OperatorSystem;
use opsys_toolkit::CMatrix;

fn main() -> opsys_toolkit::Result<()> {
    // S = span{I, diag(1, -1, 0), e12, e21} in M_3, f the restriction of a diagonal state.
    let s = OperatorSystem::new(vec![CMatrix::unit(3, 0, 1), CMatrix::diag_real(&[1.0, -1.0, 0.0])], 3)?;
    let rho = CMatrix::diag_real(&[0.5, 0.3, 0.2]);
    let f = SystemFunctional::from_density(&s, &rho)?;

    for x in [CMatrix::unit(3, 0, 0), CMatrix::diag_real(&[1.0, 1.0, 0.0]), CMatrix::unit(3, 2, 2)] {
        let iv = extend::extension_interval(&f, &x)?;
        println!(
            "β₁ = {:.6}  β₂ = {:.6}  P_f(x) = {:.6}",
            iv.beta1, iv.beta2, iv.p_value
        );
        let mid = 0.5 * (iv.beta1 + iv.beta2);
        let g = extend::extend_functional(&f, &x, mid)?;
        println!("  extension at midpoint: g(x) = {:.6}", g.trace_product(&x).re);
    }

    // The infimum over majorants is not capped by ‖y‖.
    let d = OperatorSystem::diagonal(2);
    let fd = SystemFunctional::from_density(&d, &CMatrix::diag_real(&[0.9, 0.1]))?;
    let ones = CMatrix::from_real(&[&[1.0, 1.0], &[1.0, 1.0]]);
    let mk = extend::minkowski_value(&fd, &ones)?;
    println!("P_f(J) = {:.4}, capped = {:.4}", mk.p_value, mk.capped_value);
    Ok(())
}
