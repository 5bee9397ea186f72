//! Propagates a free soliton with the midpoint stepper and compares it with
//! the closed form at `t = 1`.

use std::sync::Arc;

use delta_nls::fem::{self, Mesh1D};
use delta_nls::stepper::{StepConfig, Stepper};
use delta_nls::theory::{self, PhysParams};

fn main() -> delta_nls::Result<()> {
    let p = PhysParams::new(0.0, 3.0, -1.5);
    for (h, dt) in [(0.02, 1e-3), (0.01, 5e-4)] {
        let mesh = Arc::new(Mesh1D::uniform(20.5, h)?);
        let mut u = fem::project(&mesh, |x| theory::soliton_exact(&p, x, 0.0));
        let m0 = fem::l2_norm_sq(&u);
        let mut stepper = Stepper::new(mesh.clone(), StepConfig::new(dt, p.q))?;
        for _ in 0..(1.0 / dt).round() as usize {
            stepper.advance(&mut u.values)?;
        }
        let exact = fem::project(&mesh, |x| theory::soliton_exact(&p, x, 1.0));
        let err = fem::l2_norm_sq(&u.sub(&exact)?).sqrt();
        let drift = (fem::l2_norm_sq(&u) - m0).abs() / m0;
        println!("h = {h:<5} dt = {dt:<7} L2 error {err:.3e}  mass drift {drift:.1e}");
    }
    Ok(())
}
