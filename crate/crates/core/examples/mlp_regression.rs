//! The neural-network core on its own.
//!
//! Fits a small MLP to a noisy sine with Adam, then compares one analytic
//! gradient entry against a finite difference.
//!
//! Run: `cargo run --release --example mlp_regression`

use move_bench::nn::{mse_loss, AdamConfig, AdamState, Mlp, ParameterStore};
use move_bench::rng::stream;
use rand::Rng;

fn main() -> move_bench::Result<()> {
    let mut rng = stream(3, &[]);
    let n = 256;
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let y: Vec<f64> = x.iter().map(|v| v.sin() + rng.random_range(-0.05..0.05)).collect();

    let net = Mlp::new(vec![1, 32, 32, 1])?;
    let mut params: ParameterStore<f64> = net.init(&mut rng);
    let mut adam = AdamState::new(&params);
    let cfg = AdamConfig {
        lr: 3e-3,
        ..AdamConfig::default()
    };
    for step in 0..=3000 {
        let (out, cache) = net.forward(&params, &x, n)?;
        let (loss, grad) = mse_loss(&out, &y)?;
        if step % 500 == 0 {
            println!("step {step:>5}  mse {loss:.5}");
        }
        let grads = net.backward(&params, &cache, &grad)?;
        adam.update(&mut params, &grads, &cfg)?;
    }

    let (out, cache) = net.forward(&params, &x, n)?;
    let grads = net.backward(&params, &cache, &mse_loss(&out, &y)?.1)?;
    let h = 1e-5;
    let orig = params.tensors()[0].data[3];
    params.data_mut(0)[3] = orig + h;
    let up = mse_loss(&net.predict(&params, &x, n)?, &y)?.0;
    params.data_mut(0)[3] = orig - h;
    let down = mse_loss(&net.predict(&params, &x, n)?, &y)?.0;
    params.data_mut(0)[3] = orig;
    println!(
        "d loss / d {}[3]: analytic {:.6e}, finite difference {:.6e}",
        params.tensors()[0].name,
        grads.tensors()[0].data[3],
        (up - down) / (2.0 * h)
    );
    Ok(())
}
