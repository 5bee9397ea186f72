//! Small `(alpha, v)` sweep followed by the power-law and exponential fits.

use delta_nls::config::{ExperimentConfig, ExperimentKind};
use delta_nls::experiments;

fn main() -> delta_nls::Result<()> {
    let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Sweep);
    cfg.sweep.alphas = vec![-1.0, 1.0];
    cfg.sweep.velocities = vec![3.0, 4.0, 5.0, 6.0];
    let rows = experiments::run_sweep(&cfg)?;
    let csv = experiments::sweep_csv(&rows);
    print!("{csv}");
    for (alpha, fit) in experiments::run_fit(&cfg, &csv)? {
        println!(
            "alpha = {alpha}: coefficient {:.4}, exponent {:.4}, rms {:.2e}",
            fit.coefficient, fit.exponent, fit.residual
        );
    }
    Ok(())
}
