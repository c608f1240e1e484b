//! Haar analysis of a sampled function, the dyadic and classical shifts,
//! and the exact lattice identity for the walk increments.

use haarflow::haar::{analyze_scalar, classical_shift, dyadic_shift, synthesize};
use haarflow::walk::shift_increment_lattice;

fn main() -> haarflow::Result<()> {
    let depth = 6;
    let n = 1usize << depth;
    let samples: Vec<f64> = (0..n)
        .map(|k| ((k as f64 + 0.5) / n as f64 * std::f64::consts::TAU).sin())
        .collect();
    let c = analyze_scalar(&samples)?;
    let back = synthesize(&c, depth)?;
    let err = samples
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("round trip at depth {depth}: max error {err:.2e}");

    let s = dyadic_shift(&c);
    println!(
        "dyadic shift: ||c|| = {:.6}, ||S c|| = {:.6}",
        c.coefficient_norm(),
        s.coefficient_norm()
    );
    let k = classical_shift(&c)?;
    println!(
        "classical shift: depth {} -> {}, ||c|| = {:.6}",
        c.depth(),
        k.depth(),
        k.coefficient_norm()
    );

    for l in 1..=8 {
        let inc = shift_increment_lattice(l, l as u32 + 1)?;
        println!(
            "l = {l}: S dB = dB^T on {} atoms: {}",
            inc.db1.len(),
            inc.is_rotation()
        );
    }
    Ok(())
}
