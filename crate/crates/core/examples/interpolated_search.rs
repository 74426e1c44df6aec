//! Search by random-time evolution on the interpolated chain: exact time
//! average, sampled trajectories and the dephasing bound.

use qwalk::chain::ensure_lazy;
use qwalk::graphs::{generate, FamilySpec};
use qwalk::interpolated::{averaged_success, dephasing_error, required_time, s_star, sampled_run};
use qwalk::Result;

fn main() -> Result<()> {
    let chain = ensure_lazy(&generate(&FamilySpec::Torus { d: 2, side: 12 })?).with_marked(&[0, 77])?;
    let eps = 0.1;
    let t = required_time(&chain, eps)?;
    println!("p_M = {:.5}, s* = {:.5}, T = {t:.3}", chain.p_m(), s_star(chain.p_m())?);

    let exact = averaged_success(&chain, t)?;
    println!(
        "exact average: success {:.4}, |alpha_n|^2 = {:.4}, lower bound {:.4}",
        exact.success_probability, exact.alpha_n_sq, exact.lower_bound
    );
    let sampled = sampled_run(&chain, t, 20_000, 3)?;
    println!(
        "sampled:       success {:.4} +- {:.4}",
        sampled.success_probability,
        sampled.success_stderr.unwrap_or(f64::NAN)
    );

    for scale in [0.25, 1.0, 4.0] {
        println!("dephasing error at {scale} T: {:.4}", dephasing_error(&chain, scale * t)?);
    }
    Ok(())
}
