//! Two-photon polarization state from filter moments: coherence, negativity
//! and phase conventions.

use cascade_entangle::density::{gamma_phase, negativity, validate_density_matrix, PhaseConvention, PolarizationDensityMatrix};
use num_complex::Complex64 as C64;

fn main() -> cascade_entangle::Result<()> {
    let gamma = C64::from_polar(0.3, (-150.0f64).to_radians());
    let rho = PolarizationDensityMatrix::from_populations(0.5, 0.5, gamma)?;
    println!("rho =\n{:.4}", rho.matrix());
    println!("negativity    = {:.6}", negativity(&rho));
    println!("phase raw     = {:.2} deg", gamma_phase(&rho, PhaseConvention::RAW)?);
    println!("phase with BS = {:.2} deg", gamma_phase(&rho, PhaseConvention::CORRECTED)?);
    println!("{:?}", validate_density_matrix(&rho));
    Ok(())
}
