//! Weighted rook graphs where the search parameter mu grows like gap^(-1/2),
//! so the edge-walk overlap shrinks like sqrt(gap).

use qwalk::cg_prime::run_cg_prime;
use qwalk::chain::ensure_lazy;
use qwalk::graphs::{generate, FamilySpec};
use qwalk::harness::fit_xy;
use qwalk::Result;

fn main() -> Result<()> {
    let (mut gaps, mut nus) = (Vec::new(), Vec::new());
    for n in [64usize, 256, 1024] {
        let p = 1.0 / (n as f64).sqrt();
        let chain = ensure_lazy(&generate(&FamilySpec::WeightedRook { n1: n / 4, n2: 4, p })?);
        let r = run_cg_prime(&chain, 0)?;
        let d = &r.diagnostics;
        println!(
            "n = {n:>4}: gap = {:.4e}, mu = {:.4}, mu sqrt(p) = {:.4}, nu predicted {:.4}, simulated {:.4}",
            d.gap,
            d.mu,
            d.mu * p.sqrt(),
            r.nu_predicted,
            r.nu_final
        );
        gaps.push(d.gap);
        nus.push(r.nu_predicted);
    }
    let fit = fit_xy(&gaps, &nus)?;
    println!("nu ~ gap^{:.3}", fit.exponent);
    Ok(())
}
