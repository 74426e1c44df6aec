//! Edge-walk search for one marked node: search parameters, the two-stage
//! schedule, the final overlap and the eigenvalue bracketing around zero.

use qwalk::cg_prime::{lemma_bracketing, run_cg_prime};
use qwalk::chain::ensure_lazy;
use qwalk::graphs::{generate, FamilySpec};
use qwalk::Result;

fn main() -> Result<()> {
    for spec in [FamilySpec::Complete { n: 256 }, FamilySpec::Torus { d: 2, side: 16 }] {
        let chain = ensure_lazy(&generate(&spec)?);
        let r = run_cg_prime(&chain, 0)?;
        let d = &r.diagnostics;
        println!("{}", spec.label());
        println!("    overlap eps = {:.3e}, mu = {:.4}, gap = {:.4e}", d.epsilon_overlap, d.mu, d.gap);
        println!("    condition ratio {:.4} (ok at c = 0.1: {})", d.condition_ratio, r.condition_ok);
        println!("    t1 = {:.3}, t2 = {:.3}", r.t1, r.t2);
        println!(
            "    nu = {:.4} (predicted {:.4}), success {:.4}, {} amplification rounds",
            r.nu_final, r.nu_predicted, r.success_probability, r.amplification_rounds
        );
        let b = lemma_bracketing(&chain, 0)?;
        println!(
            "    roots +-{:.5e} in [{:.5e}, {:.5e}]: {}",
            b.delta_plus, b.lower, b.upper, b.within
        );
    }
    Ok(())
}
