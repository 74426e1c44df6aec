//! Every built-in graph family with its size, gap and smallest stationary weight.

use qwalk::chain::ensure_lazy;
use qwalk::graphs::{generate, FamilySpec};
use qwalk::spectral::discriminant;
use qwalk::Result;

fn main() -> Result<()> {
    let families = [
        FamilySpec::Complete { n: 32 },
        FamilySpec::Cycle { n: 31 },
        FamilySpec::Torus { d: 2, side: 8 },
        FamilySpec::Torus { d: 3, side: 4 },
        FamilySpec::Hypercube { d: 5 },
        FamilySpec::Rook { n1: 4, n2: 8 },
        FamilySpec::WeightedRook { n1: 16, n2: 4, p: 0.125 },
        FamilySpec::RandomReversible { n: 32, seed: 7, edge_prob: 0.2 },
    ];
    println!("{:<40} {:>5} {:>10} {:>10}", "family", "n", "gap", "min pi");
    for spec in families {
        let chain = ensure_lazy(&generate(&spec)?);
        let gap = discriminant(&chain, 0.0)?.gap;
        println!("{:<40} {:>5} {:>10.5} {:>10.5}", spec.label(), chain.n(), gap, chain.pi().iter().cloned().fold(f64::MAX, f64::min));
    }

    let json = serde_json::to_string(&FamilySpec::Torus { d: 2, side: 8 })?;
    println!("serialised spec: {json}");
    Ok(())
}
