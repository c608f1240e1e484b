//! One stopped path of the dyadic walk, written as CSV.
//!
//! `cargo run --release --example walk_path -- [N] [T] [seed] [out.csv]`

use haarflow::walk::{run_path, DigitStream, WalkConfig};

fn main() -> haarflow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: u32 = args.first().map_or(8, |s| s.parse().expect("N"));
    let t: f64 = args.get(1).map_or(4.0, |s| s.parse().expect("T"));
    let seed: u64 = args.get(2).map_or(1, |s| s.parse().expect("seed"));
    let cfg = WalkConfig::new(n, t)?;
    let digits = DigitStream::random(seed, 0, cfg.fine_steps() as usize + 1);
    let path = run_path(&cfg, &digits);

    println!(
        "N = {n}, T = {t}: delta = {:.3e}, theta = {:.3e}, eps = {:.4}",
        cfg.fine_step(),
        cfg.coarse_step(),
        cfg.epsilon()
    );
    match path.stop_n() {
        Some(k) => println!("stopped at coarse step {k} of {}", cfg.coarse_steps()),
        None => println!("survived to T"),
    }
    let [x, y] = path.terminal_position();
    println!(
        "terminal position ({x:.5}, {y:.5}), |X| = {:.5}",
        x.hypot(y)
    );

    if let Some(out) = args.get(3) {
        path.save_csv(std::path::Path::new(out))?;
        println!("wrote {out}");
    } else {
        let mut buf = Vec::new();
        path.write_csv(&mut buf)?;
        for line in String::from_utf8_lossy(&buf).lines().take(6) {
            println!("{line}");
        }
    }
    Ok(())
}
