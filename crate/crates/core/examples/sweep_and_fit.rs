//! A sweep over complete graphs written to CSV/JSON, followed by log-log
//! fits of the schedule and the hitting time.

use qwalk::harness::{fit_csv, fit_scaling, run_sweep, Algorithm, FamilyKind, FamilyTemplate, SweepConfig};
use qwalk::Result;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("qwalk-sweep-example");
    std::fs::create_dir_all(&dir)?;
    let mut cfg = SweepConfig::new(FamilyTemplate::new(FamilyKind::Complete), vec![16, 32, 64, 128, 256], Algorithm::Interpolated);
    cfg.output = Some(dir.join("complete.csv"));
    let rows = run_sweep(&cfg)?;
    for r in &rows {
        println!(
            "n = {:>4}: T = {:>8.3}, success = {:.4}",
            r.n,
            r.t.unwrap_or(f64::NAN),
            r.success_probability.unwrap_or(f64::NAN)
        );
    }
    let fit = fit_scaling(&rows, "n", "T")?;
    println!("T ~ n^{:.4} (r^2 = {:.5})", fit.exponent, fit.r_squared);
    let from_file = fit_csv(dir.join("complete.csv"), "n", "ht_plus")?;
    println!("HT+ ~ n^{:.4}, read back from {}", from_file.exponent, dir.display());
    Ok(())
}
