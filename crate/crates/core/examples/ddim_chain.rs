//! The denoising chain with an oracle denoiser.
//!
//! Noises a known action chunk, then runs the strided DDIM chain with the
//! true noise as the prediction and prints the error at each stride.
//!
//! Run: `cargo run --release --example ddim_chain`

use move_bench::policy::{ddim_step, forward_noise, NoiseSchedule};
use move_bench::rng::stream;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> move_bench::Result<()> {
    let schedule = NoiseSchedule::cosine(100)?;
    let mut rng = stream(5, &[]);
    let x0: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
    let eps: Vec<f64> = (0..12).map(|_| rng.sample(StandardNormal)).collect();

    for t in [1, 25, 50, 75, 100] {
        println!("t {t:>3}  alpha_bar {:.5}", schedule.alpha_bar(t));
    }
    let mut x = forward_noise(&x0, 100, &eps, &schedule)?;
    for (t, t_prev) in schedule.strided(10)? {
        let ab = schedule.alpha_bar(t);
        let oracle: Vec<f64> = x
            .iter()
            .zip(&x0)
            .map(|(&xi, &a)| (xi - ab.sqrt() * a) / (1.0 - ab).sqrt())
            .collect();
        x = ddim_step(&x, t, t_prev, &oracle, &schedule);
        let (sp, np) = (schedule.alpha_bar(t_prev).sqrt(), (1.0 - schedule.alpha_bar(t_prev)).sqrt());
        let err = x
            .iter()
            .zip(x0.iter().zip(&eps))
            .map(|(xi, (a, e))| (xi - (sp * a + np * e)).abs())
            .fold(0.0, f64::max);
        println!("{t:>3} -> {t_prev:>3}  max deviation from the exact marginal {err:.3e}");
    }
    let final_err = x.iter().zip(&x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("recovered x0 within {final_err:.3e}");
    Ok(())
}
