use opsys_toolkit::iso;
use opsys_toolkit::opsys::FunctionSystem;

fn main() -> opsys_toolkit::Result<()> {
    let f = FunctionSystem::from_real(5, &[&[0.1, 0.7, -0.3, 0.4, 0.9], &[1.0, 0.0, 0.0, 2.0, 1.0]])?;
    let gamma = [3, 0, 4, 1, 2];
    let g = iso::induced_map(&f, &gamma);
    let fp = FunctionSystem::new(5, g.images.clone())?;
    let found = iso::stone_recover_permutation(&f, &fp, &g)?;
    println!("γ = {gamma:?}, recovered {found:?}");

    let flat = FunctionSystem::from_real(5, &[&[1.0, 1.0, 2.0, 2.0, 3.0]])?;
    let g = iso::induced_map(&flat, &[0, 1, 2, 3, 4]);
    println!("non-separating: {:?}", iso::stone_recover_permutation(&flat, &flat, &g).err());
    Ok(())
}
