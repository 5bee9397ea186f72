//! Cuts the scattered state apart and resolves each piece on a large free
//! grid, comparing the limiting amplitudes with the prediction.

use delta_nls::config::{ExperimentConfig, ExperimentKind};
use delta_nls::experiments;
use delta_nls::theory::PhysParams;

fn main() -> delta_nls::Result<()> {
    let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Resolve);
    cfg.physics = PhysParams::new(10.0, 10.0, -10.0);
    let out = experiments::run_resolve(&cfg)?;
    println!(
        "cut at t = {:.3}, deviation from split profile {:.4}",
        out.cut_time, out.deviation
    );
    for side in &out.sides {
        match &side.result {
            Some(r) => println!(
                "{:<11} predicted {:.4} measured {:.4} (mass {:.4}, stabilized {})",
                side.side.name(),
                side.predicted,
                r.measured_amplitude,
                side.piece_mass,
                r.stabilized
            ),
            None => println!("{:<11} predicted {:.4} skipped: {:?}", side.side.name(), side.predicted, side.skipped),
        }
    }
    Ok(())
}
