//! Validate a hand-written chain, inspect its stationary distribution,
//! lazify it and interpolate towards the absorbing chain.

use nalgebra::DMatrix;
use qwalk::{interpolate_chain, make_lazy, validate_chain, Result};

fn main() -> Result<()> {
    // birth-death chain on 4 states with holding
    #[rustfmt::skip]
    let p = DMatrix::from_row_slice(4, 4, &[
        0.5, 0.5, 0.0, 0.0,
        0.25, 0.25, 0.5, 0.0,
        0.0, 0.25, 0.25, 0.5,
        0.0, 0.0, 0.5, 0.5,
    ]);
    let chain = validate_chain(p, &[3])?;
    println!("pi = {:?}", chain.pi());
    println!("p_M = {:.4}, lazy already: {}", chain.p_m(), chain.lazy_applied());

    let lazy = make_lazy(&chain);
    println!("lazy diagonal = {:?}", (0..4).map(|i| lazy.p()[(i, i)]).collect::<Vec<_>>());

    for s in [0.0, 0.5, 0.9] {
        let ps = interpolate_chain(&lazy, s)?;
        println!("s = {s}: pi(s) on marked = {:.4}", ps.p_m());
    }

    // non-reversible input is rejected
    let cyclic = DMatrix::from_row_slice(3, 3, &[0.2, 0.8, 0.0, 0.0, 0.2, 0.8, 0.8, 0.0, 0.2]);
    match validate_chain(cyclic, &[0]) {
        Err(e) => println!("rejected: {e} (exit code {})", e.exit_code()),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
