//! Overlap of the two decay-path amplitudes for an unfiltered cascade,
//! closed form against direct two-dimensional integration.

use cascade_entangle::distill::WindowFilter;
use cascade_entangle::quadrature::QuadratureSpec;
use cascade_entangle::spectral::{Branch, CascadeSpec, Engine};

fn main() -> cascade_entangle::Result<()> {
    let cascade = CascadeSpec::symmetric(1.28e6, 27.0, 2.55e6, 0.8, 1.6)?;
    let id = WindowFilter::identity();
    let fast = Engine::fast().overlap(&cascade, Branch::X, Branch::Y, &id)?;
    let oracle = Engine::oracle(QuadratureSpec::default()).overlap(&cascade, Branch::X, Branch::Y, &id)?;
    println!("delta/gamma      = {:.3}", cascade.detuning() / cascade.linewidth());
    println!("<a_x|a_y> fast   = {:.6}", fast.value);
    println!("<a_x|a_y> oracle = {:.6} (err {:.1e})", oracle.value, oracle.error);
    println!("|overlap|        = {:.6}", fast.value.norm());
    Ok(())
}
