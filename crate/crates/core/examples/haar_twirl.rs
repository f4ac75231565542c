//! Averaging λxλ* over the ball ‖λ − I‖ < δ in U_n.

use opsys_toolkit::haar::{self, HaarNeighborhood};
use opsys_toolkit::linalg::traceless_hermitian_basis;

fn main() -> opsys_toolkit::Result<()> {
    let samples = 50_000;
    for delta in [0.1, 0.25, 0.5, 1.0, 2.0] {
        let mut u = HaarNeighborhood::new(3, delta, 17)?;
        let (c, hw) = u.estimate_c_u(samples)?;
        let b = &traceless_hermitian_basis(3)[0];
        let avg = u.average_conjugation(b, samples)?;
        let resid = avg.dist(&haar::depolarize(b, c));
        println!("δ = {delta:<4}  c = {c:.4} ± {hw:.4}  ‖E(b) − depolarize(b, c)‖ = {resid:.2e}");
    }
    Ok(())
}
