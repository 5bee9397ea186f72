//! Closed-form predictions: scattering rate, split amplitudes and phases,
//! thresholds and the bound-state mass.

use delta_nls::theory::{self, PhysParams};

fn main() -> delta_nls::Result<()> {
    let v = 3.0;
    println!("alpha  |t|^2    A_T      A_R      phase_T   phase_R");
    for alpha in [-1.0, 0.3, 0.6, 1.0, 1.4] {
        let p = theory::split_prediction(&PhysParams::new(alpha * v, v, -10.0))?;
        println!(
            "{alpha:<6} {:.5}  {:.5}  {:.5}  {:>8}  {:>8}",
            theory::quantum_transmission_rate(alpha * v, v)?,
            p.amplitude_t,
            p.amplitude_r,
            p.phase_t.map_or("-".into(), |x| format!("{x:.4}")),
            p.phase_r.map_or("-".into(), |x| format!("{x:.4}")),
        );
    }
    println!(
        "thresholds for q = 3: transmitted {:.4}, reflected {:.4}",
        theory::transmitted_threshold(3.0),
        theory::reflected_threshold(3.0)
    );
    println!("phi0(0.8) = {:.5}", theory::phi0(0.8)?);
    println!("bound mass q = -1, lambda = 2: {}", theory::nonlinear_bound_mass(-1.0, 2.0)?);
    Ok(())
}
