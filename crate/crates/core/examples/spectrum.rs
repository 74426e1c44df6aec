//! Discriminant spectrum of a lazy torus and the split of its principal
//! eigenvector into marked and unmarked parts along the interpolation.

use qwalk::chain::ensure_lazy;
use qwalk::graphs::{generate, FamilySpec};
use qwalk::interpolated::s_star;
use qwalk::spectral::{discriminant, marked_decomposition};
use qwalk::Result;

fn main() -> Result<()> {
    let chain = ensure_lazy(&generate(&FamilySpec::Torus { d: 2, side: 6 })?).with_marked(&[0, 7])?;
    let spec = discriminant(&chain, 0.0)?;
    let top: Vec<String> = spec.eigenvalues.iter().rev().take(5).map(|l| format!("{l:.5}")).collect();
    println!("n = {}, gap = {:.5}, largest eigenvalues {}", spec.n(), spec.gap, top.join(" "));
    println!(
        "reconstruction error {:.1e}, orthonormality error {:.1e}",
        spec.reconstruction_error(),
        spec.orthonormality_error()
    );

    let star = s_star(chain.p_m())?;
    for s in [0.0, 0.5, star, 0.99] {
        let m = marked_decomposition(&chain, s)?;
        println!("s = {s:.4}: cos theta = {:.4}, sin theta = {:.4}", m.cos_theta, m.sin_theta);
    }
    Ok(())
}
