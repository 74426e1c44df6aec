//! Hitting time, interpolated and extended hitting times, and a Monte-Carlo
//! estimate for comparison.

use qwalk::chain::ensure_lazy;
use qwalk::graphs::{generate, FamilySpec};
use qwalk::hitting::{hitting_report, monte_carlo_hitting_time};
use qwalk::Result;

fn main() -> Result<()> {
    let cube = ensure_lazy(&generate(&FamilySpec::Hypercube { d: 6 })?);
    for marked in [vec![0], vec![0, 63]] {
        let chain = cube.clone().with_marked(&marked)?;
        let report = hitting_report(&chain, &[0.0, 0.5, 0.9, 0.99], None)?;
        println!("marked {marked:?}: HT = {:.4}, HT+ = {:.4}", report.ht, report.ht_plus);
        for pt in &report.ht_s {
            println!("    HT({}) = {:.4}", pt.s, pt.ht);
        }
        let (mean, se) = monte_carlo_hitting_time(&chain, 50_000, 1)?;
        println!("    simulated HT = {mean:.3} +- {se:.3}");
    }
    Ok(())
}
