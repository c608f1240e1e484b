//! Trigonometric boundary data, harmonic extension and the conjugate
//! function on the unit disc.

use haarflow::circle::{perp, FourierFunction, NormSpec};
use haarflow::presets::preset;

fn main() -> haarflow::Result<()> {
    let f = preset("re_z3_plus_im_z2")?;
    let g = f.conjugate();
    let z = [0.3, -0.4];
    println!("f(z) = {:?}, g(z) = {:?}", f.eval(z)?, g.eval(z)?);

    let grad_f = f.gradient(z)?;
    let grad_g = g.gradient(z)?;
    println!("grad g = {:?}, (grad f)^perp = {:?}", grad_g, perp(&grad_f));

    // H^2 = -(I - mean)
    let shifted = f.add(&FourierFunction::constant(vec![2.0])?)?;
    println!(
        "H^2 (f + 2) == -f: {}",
        shifted.conjugate().conjugate() == f.scale(-1.0)
    );

    for p in [2.0, 4.0, 6.0] {
        let ns = NormSpec::with_p(p)?;
        println!(
            "p = {p}: ||f||_p = {:.6}, ||Hf||_p = {:.6}",
            f.lp_norm_boundary(&ns),
            g.lp_norm_boundary(&ns)
        );
    }
    println!("Parseval energy {:.6}", f.parseval_energy());
    Ok(())
}
