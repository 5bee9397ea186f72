//! Evolves `alpha sech x` under the free equation and reports the limiting
//! amplitude, the center phase and the sup-norm decay.

use delta_nls::config::{ExperimentConfig, ExperimentKind};
use delta_nls::experiments;

fn main() -> delta_nls::Result<()> {
    let mut cfg = ExperimentConfig::for_kind(ExperimentKind::FreeResolution);
    for alpha in [0.8, 0.3] {
        cfg.free.alpha = alpha;
        let out = experiments::run_free_resolution(&cfg)?;
        println!(
            "alpha = {alpha}: predicted {:?}, amplitude {:.4} over {:?}, phase {:?}, decay exponent {:.3}",
            out.asymptote, out.amplitude.mean, out.amplitude.window, out.phase_mean, out.decay_exponent
        );
    }
    Ok(())
}
