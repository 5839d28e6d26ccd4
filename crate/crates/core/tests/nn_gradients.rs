//! Analytic gradients against central finite differences, and an end-to-end
//! optimizer check on a 100-sample linear regression toy.

use move_bench::nn::{mse_loss, AdamConfig, AdamState, Mlp, ParameterStore};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

fn loss(net: &Mlp, p: &ParameterStore<f64>, x: &[f64], y: &[f64], batch: usize) -> f64 {
    let out = net.predict(p, x, batch).unwrap();
    mse_loss(&out, y).unwrap().0
}

/// Checks up to `per_tensor` entries of every tensor; returns the worst
/// relative error.
fn worst_relative_error(dims: Vec<usize>, batch: usize, per_tensor: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = Mlp::new(dims).unwrap();
    let mut p: ParameterStore<f64> = net.init(&mut rng);
    // perturb biases away from zero so every path carries signal
    for i in 0..p.tensors().len() {
        for v in p.data_mut(i) {
            *v += rng.random_range(-0.1..0.1);
        }
    }
    let x: Vec<f64> = (0..batch * net.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..batch * net.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (out, cache) = net.forward(&p, &x, batch).unwrap();
    let (_, g) = mse_loss(&out, &y).unwrap();
    let grads = net.backward(&p, &cache, &g).unwrap();
    let mut worst: f64 = 0.0;
    for ti in 0..p.tensors().len() {
        let n = p.tensors()[ti].data.len();
        let picks: Vec<usize> = if n <= per_tensor {
            (0..n).collect()
        } else {
            (0..per_tensor).map(|_| rng.random_range(0..n)).collect()
        };
        for j in picks {
            let orig = p.tensors()[ti].data[j];
            p.data_mut(ti)[j] = orig + H;
            let up = loss(&net, &p, &x, &y, batch);
            p.data_mut(ti)[j] = orig - H;
            let down = loss(&net, &p, &x, &y, batch);
            p.data_mut(ti)[j] = orig;
            let numeric = (up - down) / (2.0 * H);
            let analytic = grads.tensors()[ti].data[j];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-7);
            worst = worst.max(rel);
        }
    }
    worst
}

#[test]
fn small_network_every_entry() {
    let e = worst_relative_error(vec![3, 5, 4, 2], 6, usize::MAX, 1);
    assert!(e < 1e-4, "worst relative error {e}");
}

#[test]
fn single_affine_layer() {
    let e = worst_relative_error(vec![7, 3], 4, usize::MAX, 2);
    assert!(e < 1e-4, "worst relative error {e}");
}

#[test]
fn denoiser_shapes() {
    // 12 noisy chunk values + 18 history values + 32 embedding values
    let e = worst_relative_error(vec![62, 256, 256, 12], 8, 40, 3);
    assert!(e < 1e-4, "worst relative error {e}");
}

#[test]
fn regression_baseline_shapes() {
    let e = worst_relative_error(vec![18, 256, 256, 12], 8, 40, 4);
    assert!(e < 1e-4, "worst relative error {e}");
}

#[test]
fn linear_regression_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = [0.7, -1.3, 0.4];
    let b = 0.25;
    let batch = 100;
    let x: Vec<f64> = (0..batch * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<f64> = x.chunks(3).map(|r| r[0] * w[0] + r[1] * w[1] + r[2] * w[2] + b).collect();
    let net = Mlp::new(vec![3, 1]).unwrap();
    let mut p: ParameterStore<f64> = net.init(&mut rng);
    let mut opt = AdamState::new(&p);
    let cfg = AdamConfig {
        lr: 1e-2,
        ..AdamConfig::default()
    };
    let mut last = f64::INFINITY;
    for _ in 0..2000 {
        let (out, cache) = net.forward(&p, &x, batch).unwrap();
        let (l, g) = mse_loss(&out, &y).unwrap();
        last = l;
        let grads = net.backward(&p, &cache, &g).unwrap();
        opt.update(&mut p, &grads, &cfg).unwrap();
    }
    let fitted = &p.tensors()[0].data;
    for (got, want) in fitted.iter().zip(w) {
        assert!((got - want).abs() < 1e-2, "weight {got} vs {want}");
    }
    assert!(last < 1e-3, "final mse {last}");
}
