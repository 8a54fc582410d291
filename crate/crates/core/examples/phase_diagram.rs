//! Phase of the distilled coherence on a (Δ/Γ, w/Γ) grid, printed as a
//! coarse text map.

use cascade_entangle::distill::{phase_diagram, SweepGrid};
use cascade_entangle::spectral::{CascadeSpec, Engine};

fn main() -> cascade_entangle::Result<()> {
    let axis: Vec<f64> = (0..10).map(|i| 1.0 + 4.0 * i as f64).collect();
    let background = CascadeSpec::symmetric(1.28e6, 10.0, 2.55e6, 0.8, 1.6)?;
    let grid = SweepGrid::new(axis.clone(), axis.clone(), background)?;
    let d = phase_diagram(&grid, &Engine::fast())?;
    print!("{:>8}", "D\\w");
    for w in &axis {
        print!("{w:>7.0}");
    }
    println!();
    for (i, delta) in axis.iter().enumerate() {
        print!("{delta:>8.0}");
        for j in 0..axis.len() {
            match d.cell(i, j).phase_deg {
                Some(p) => print!("{p:>7.0}"),
                None => print!("{:>7}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
