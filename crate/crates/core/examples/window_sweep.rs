//! Detection probability and coherence as a spectral window widens.

use cascade_entangle::distill::window_sweep;
use cascade_entangle::spectral::{CascadeSpec, Engine};

fn main() -> cascade_entangle::Result<()> {
    let cascade = CascadeSpec::symmetric(1.28e6, 17.0 * 1.6, 2.55e6, 0.8, 1.6)?;
    let g = cascade.linewidth();
    let mut widths: Vec<f64> = (0..=20).map(|i| g * 0.5 * 100f64.powf(i as f64 / 20.0)).collect();
    widths.push(f64::INFINITY);
    println!("{:>10} {:>10} {:>10} {:>10}", "w/G", "p_W", "|g_d|", "phase");
    for row in window_sweep(&cascade, &widths, &Engine::fast())? {
        let phase = row.phase_deg.map_or("-".into(), |p| format!("{p:.2}"));
        println!("{:>10.3} {:>10.5} {:>10.5} {:>10}", row.w_over_gamma, row.p_w, row.magnitude, phase);
    }
    Ok(())
}
