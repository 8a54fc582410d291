//! Leading-order closed form against the full symmetrized integral across
//! window widths, at two upper-level widths.

use cascade_entangle::distill::{filter_moments, WindowFilter};
use cascade_entangle::quadrature::QuadratureSpec;
use cascade_entangle::spectral::{CascadeSpec, Engine};

fn main() -> cascade_entangle::Result<()> {
    let oracle = Engine::oracle(QuadratureSpec::default());
    for gu in [1.6, 0.016] {
        let cascade = CascadeSpec::symmetric(1.28e6, 27.0, 2.55e6, 0.8, gu)?;
        println!("Gamma_u = {gu}");
        for w in [5.0, 15.0, 25.0, 60.0] {
            let f = WindowFilter::centered(&cascade, w)?;
            let a = filter_moments(&cascade, &f, &Engine::fast())?.distilled_gamma()?;
            let b = filter_moments(&cascade, &f, &oracle)?.distilled_gamma()?;
            println!("  w = {w:>5}: fast {a:.5}  oracle {b:.5}  |diff| {:.2e}", (a - b).norm());
        }
    }
    Ok(())
}
