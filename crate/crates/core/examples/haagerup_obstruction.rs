//! A UCP map on a 2×2 block system that has no extension compatible with a
//! prescribed state, unless the two states coincide.

use opsys_toolkit::extend::{self, InvarianceOutcome};

fn main() -> opsys_toolkit::Result<()> {
    for (label, m) in [("point evaluation", [1.0, 0.0]), ("uniform", [0.5, 0.5])] {
        let ex = extend::block_state_example(m, [0.5, 0.5])?;
        match extend::invariance_constrained_extension(&ex.tau, &ex.phi_density, Some(&ex.invariance_domain))? {
            InvarianceOutcome::Feasible(eta) => {
                println!("m = {label}: feasible, agreement {:.1e}", extend::agreement_residual(&eta, &ex.tau)?)
            }
            InvarianceOutcome::Infeasible { certificate_value, .. } => {
                println!("m = {label}: infeasible, certificate value {certificate_value:.3e}")
            }
        }
    }
    Ok(())
}
