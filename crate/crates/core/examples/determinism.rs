//! Renders the same experiments under several worker counts and compares
//! the reports byte for byte.

use haarflow::acceptance::determinism_fingerprint;

fn main() -> haarflow::Result<()> {
    let mut reference = None;
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool");
        let reports = pool.install(determinism_fingerprint)?;
        let bytes: usize = reports.iter().map(String::len).sum();
        let same = reference.get_or_insert_with(|| reports.clone()) == &reports;
        println!(
            "{threads} workers: {} reports, {bytes} bytes, identical: {same}",
            reports.len()
        );
    }
    Ok(())
}
