//! Linear evolution of a modulated bump through the impurity, checked
//! against the split formula and the quantum transmission rate.

use delta_nls::config::{ExperimentConfig, ExperimentKind};
use delta_nls::experiments;

fn main() -> delta_nls::Result<()> {
    let mut cfg = ExperimentConfig::for_kind(ExperimentKind::LinearCheck);
    cfg.linear.velocities = vec![10.0, 20.0];
    for r in experiments::run_linear_check(&cfg)? {
        println!(
            "v = {:>4}: split error {:.3e} (bound {:.3e}), T = {:.5}, |t|^2 = {:.5}",
            r.v, r.split_error, r.bound, r.transmitted, r.quantum_rate
        );
    }
    Ok(())
}
