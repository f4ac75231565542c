use opsys_toolkit::cpmaps::{self, CPMap};
use opsys_toolkit::{CMatrix, C64};

fn main() -> opsys_toolkit::Result<()> {
    // u = diag(1, 1, i): fixed points of Ad(u) are its commutant M_2 ⊕ C.
    let u = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
    let tau = CPMap::conjugation(&u);
    let trace_state = CMatrix::identity(3).scale_real(1.0 / 3.0);
    let fp = cpmaps::fixed_point_algebra(&tau, &trace_state, 1e-10)?;
    println!("dim = {}, product residual = {:.1e}", fp.dim(), fp.product_residual);
    Ok(())
}
