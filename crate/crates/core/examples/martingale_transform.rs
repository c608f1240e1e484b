//! The discrete martingales M^f and M^g along one path, and the shift
//! applied to M^f.

use haarflow::martingale::{discrete_transforms, shift_transform};
use haarflow::presets::preset;
use haarflow::walk::{run_path, DigitStream, WalkConfig};

fn main() -> haarflow::Result<()> {
    let cfg = WalkConfig::new(8, 4.0)?;
    let f = preset("re_z3_plus_im_z2")?;
    let g = f.conjugate();
    let path = run_path(
        &cfg,
        &DigitStream::random(3, 0, cfg.fine_steps() as usize + 1),
    );
    let pair = discrete_transforms(&f, &path)?;
    let shifted = shift_transform(&f, &path)?;
    let deviation = shifted
        .iter()
        .zip(pair.mg_values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let x = path.terminal_position();
    println!("{} checkpoints, stride {}", pair.len(), pair.stride());
    println!(
        "M^f_T = {:?}, f(X_T) = {:?}",
        pair.terminal_mf(),
        f.eval(x)?
    );
    println!(
        "M^g_T = {:?}, -g(X_T) = {:?}",
        pair.terminal_mg(),
        g.scale(-1.0).eval(x)?
    );
    println!("max |S M^f - M^g| = {deviation:e}");
    Ok(())
}
