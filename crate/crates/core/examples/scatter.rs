//! Single scattering run at `q = v = 3`, printing the final mass partition.

use delta_nls::config::{ExperimentConfig, ExperimentKind};
use delta_nls::experiments;
use delta_nls::theory::{self, PhysParams};

fn main() -> delta_nls::Result<()> {
    let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Scatter);
    cfg.physics = PhysParams::new(3.0, 3.0, -10.0);
    let out = experiments::run_scatter(&cfg)?;
    let (t, r, b) = out.fractions;
    println!("t = {:.3}: T = {t:.5}, R = {r:.5}, B = {b:.2e}", out.final_time);
    println!("quantum rate |t|^2 = {:.5}", theory::quantum_transmission_rate(3.0, 3.0)?);
    println!("max mass drift {:.2e}", out.max_drift);
    if let Some((time, d)) = out.min_profile {
        println!("closest to the split profile at t = {time:.2}: L2 distance {d:.4}");
    }
    Ok(())
}
