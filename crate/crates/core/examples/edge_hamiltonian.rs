//! The edge-space Hamiltonian: dense construction on a small chain,
//! comparison with the compact (2n-1)-dimensional form, edge locality and
//! the walk-unitary identity.

use qwalk::chain::ensure_lazy;
use qwalk::edge::{
    build_reduced, dense_energies, szegedy_identity_check_with, szegedy_swapped_deviation,
    verify_edge_locality, Completion,
};
use qwalk::graphs::{generate, FamilySpec};
use qwalk::Result;

fn main() -> Result<()> {
    let chain = ensure_lazy(&generate(&FamilySpec::RandomReversible { n: 6, seed: 4, edge_prob: 0.6 })?);

    let dense = dense_energies(&chain, 0.0)?;
    let zeros = dense.iter().filter(|e| e.abs() < 1e-9).count();
    println!("dense H: {} eigenvalues, {zeros} of them zero", dense.len());

    let red = build_reduced(&chain, 0.0)?;
    let mut compact = red.energies.clone();
    compact.sort_by(f64::total_cmp);
    println!("compact H: dimension {}, energies {:?}", red.dim, compact.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>());

    let loc = verify_edge_locality(&chain)?;
    println!(
        "locality: {} nonzero of {} allowed entries, max deviation {:.1e}",
        loc.nonzero_entries, loc.allowed_entries, loc.max_deviation
    );

    for c in [Completion::Householder, Completion::Randomized(9)] {
        println!(
            "{c:?}: |H - (i/2)(W - W^dag)| = {:.1e}, other ordering {:.1e}",
            szegedy_identity_check_with(&chain, 0.5, c)?,
            szegedy_swapped_deviation(&chain, 0.5, c)?
        );
    }
    Ok(())
}
