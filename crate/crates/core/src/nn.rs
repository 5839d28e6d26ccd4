//! Small dense networks with hand-written reverse mode.
//!
//! Parameters live in a [`ParameterStore`]: an ordered list of named tensors.
//! Layer `i` owns `layer{i}.weight` with shape `[in, out]` (row-major) and
//! `layer{i}.bias` with shape `[out]`. Hidden layers use SiLU; the last
//! layer is affine. Everything is generic over `f32` (training) and `f64`
//! (gradient checks).

use std::fmt::Debug;

use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};

pub trait Scalar: Float + Default + Debug + Send + Sync + 'static {
    /// `C = alpha * A * B + beta * C` with arbitrary strides.
    ///
    /// # Safety
    /// Pointers and strides must describe valid, non-aliasing matrices.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn of(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }

    fn of(v: f64) -> f32 {
        v as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }

    fn of(v: f64) -> f64 {
        v
    }

    fn as_f64(self) -> f64 {
        self
    }
}

/// Whether an operand is used as stored or transposed.
#[derive(Clone, Copy)]
enum Op {
    N,
    T,
}

/// `c (m x n) = a (m x k) * b (k x n) + beta * c` for row-major buffers,
/// where `a`/`b` may be read transposed from their stored layout.
#[allow(clippy::too_many_arguments)]
fn gemm<F: Scalar>(m: usize, k: usize, n: usize, a: &[F], ta: Op, b: &[F], tb: Op, beta: F, c: &mut [F]) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = match ta {
        Op::N => (k as isize, 1),
        Op::T => (1, m as isize),
    };
    let (rsb, csb) = match tb {
        Op::N => (n as isize, 1),
        Op::T => (1, k as isize),
    };
    // SAFETY: lengths checked above; strides address within those lengths.
    unsafe {
        F::gemm_raw(
            m,
            k,
            n,
            F::one(),
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<F> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<F>,
}

impl<F: Scalar> Tensor<F> {
    pub fn zeros(name: impl Into<String>, shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            name: name.into(),
            shape,
            data: vec![F::zero(); n],
        }
    }
}

/// Ordered named parameter tensors. Shapes are fixed at construction; every
/// mutation through [`ParameterStore::data_mut`] or an optimizer bumps the
/// version so stale forward caches are caught.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterStore<F> {
    tensors: Vec<Tensor<F>>,
    version: u64,
}

impl<F: Scalar> ParameterStore<F> {
    pub fn new(tensors: Vec<Tensor<F>>) -> Self {
        ParameterStore { tensors, version: 0 }
    }

    pub fn tensors(&self) -> &[Tensor<F>] {
        &self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<F>> {
        self.tensors.iter().find(|t| t.name == name)
    }

    pub fn data_mut(&mut self, index: usize) -> &mut [F] {
        self.version += 1;
        &mut self.tensors[index].data
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn zeros_like(&self) -> Self {
        ParameterStore::new(
            self.tensors
                .iter()
                .map(|t| Tensor::zeros(t.name.clone(), t.shape.clone()))
                .collect(),
        )
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.tensors.len() == other.tensors.len()
            && self
                .tensors
                .iter()
                .zip(&other.tensors)
                .all(|(a, b)| a.name == b.name && a.shape == b.shape)
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    pub fn cast<G: Scalar>(&self) -> ParameterStore<G> {
        ParameterStore::new(
            self.tensors
                .iter()
                .map(|t| Tensor {
                    name: t.name.clone(),
                    shape: t.shape.clone(),
                    data: t.data.iter().map(|v| G::of(v.as_f64())).collect(),
                })
                .collect(),
        )
    }

    /// All values in declaration order.
    pub fn flatten(&self) -> Vec<F> {
        self.tensors.iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    /// Rebuilds a store with `layout`'s names and shapes from flat values.
    pub fn from_flat(layout: &[(String, Vec<usize>)], values: &[F]) -> Result<Self> {
        let need: usize = layout.iter().map(|(_, s)| s.iter().product::<usize>()).sum();
        if need != values.len() {
            return Err(Error::Shape(format!(
                "layout needs {need} values, got {}",
                values.len()
            )));
        }
        let mut off = 0;
        let tensors = layout
            .iter()
            .map(|(name, shape)| {
                let n: usize = shape.iter().product();
                let t = Tensor {
                    name: name.clone(),
                    shape: shape.clone(),
                    data: values[off..off + n].to_vec(),
                };
                off += n;
                t
            })
            .collect();
        Ok(ParameterStore::new(tensors))
    }

    pub fn layout(&self) -> Vec<(String, Vec<usize>)> {
        self.tensors.iter().map(|t| (t.name.clone(), t.shape.clone())).collect()
    }

    /// `self = decay * self + (1 - decay) * other`, elementwise.
    pub fn blend(&mut self, other: &Self, decay: F) {
        debug_assert!(self.same_layout(other));
        self.version += 1;
        let keep = F::one() - decay;
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, &y) in a.data.iter_mut().zip(&b.data) {
                *x = decay * *x + keep * y;
            }
        }
    }
}

impl ParameterStore<f32> {
    /// Little-endian `f32` blob in declaration order.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.tensors
            .iter()
            .flat_map(|t| t.data.iter().flat_map(|v| v.to_le_bytes()))
            .collect()
    }

    pub fn from_le_bytes(layout: &[(String, Vec<usize>)], bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(4) {
            return Err(Error::Shape(format!("blob of {} bytes is not a whole number of f32", bytes.len())));
        }
        let values: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Self::from_flat(layout, &values)
    }
}

fn sigmoid<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

fn silu<F: Scalar>(x: F) -> F {
    x * sigmoid(x)
}

fn silu_grad<F: Scalar>(x: F) -> F {
    let s = sigmoid(x);
    s * (F::one() + x * (F::one() - s))
}

/// Activations kept by a forward pass for the matching backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<F> {
    batch: usize,
    version: u64,
    /// Input of every layer (`inputs[0]` is the network input).
    inputs: Vec<Vec<F>>,
    /// Pre-activation of every hidden layer.
    pre: Vec<Vec<F>>,
}

/// Multi-layer perceptron shape: `dims[0]` inputs, `dims.last()` outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    dims: Vec<usize>,
}

impl Mlp {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid layer sizes {dims:?}")));
        }
        Ok(Mlp { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn layout(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        for (i, w) in self.dims.windows(2).enumerate() {
            out.push((format!("layer{i}.weight"), vec![w[0], w[1]]));
            out.push((format!("layer{i}.bias"), vec![w[1]]));
        }
        out
    }

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
    pub fn init<F: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> ParameterStore<F> {
        let tensors = self
            .layout()
            .into_iter()
            .enumerate()
            .map(|(i, (name, shape))| {
                let fan_in = self.dims[i / 2] as f64;
                let bound = 1.0 / fan_in.sqrt();
                let n: usize = shape.iter().product();
                let data = (0..n).map(|_| F::of(rng.random_range(-bound..bound))).collect();
                Tensor { name, shape, data }
            })
            .collect();
        ParameterStore::new(tensors)
    }

    /// Verifies `params` has this network's layout.
    pub fn check(&self, params: &ParameterStore<impl Scalar>) -> Result<()> {
        let want = self.layout();
        let got = params.layout();
        if want != got {
            return Err(Error::Shape(format!("parameter layout {got:?} does not match network {want:?}")));
        }
        Ok(())
    }

    fn run<F: Scalar>(
        &self,
        params: &ParameterStore<F>,
        input: &[F],
        batch: usize,
        mut keep: Option<&mut ForwardCache<F>>,
    ) -> Result<Vec<F>> {
        self.check(params)?;
        if input.len() != batch * self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} values, expected {batch} x {}",
                input.len(),
                self.input_dim()
            )));
        }
        let mut x = input.to_vec();
        let last = self.num_layers() - 1;
        for (l, w) in self.dims.windows(2).enumerate() {
            let (din, dout) = (w[0], w[1]);
            let weight = &params.tensors[2 * l].data;
            let bias = &params.tensors[2 * l + 1].data;
            let mut z = Vec::with_capacity(batch * dout);
            for _ in 0..batch {
                z.extend_from_slice(bias);
            }
            gemm(batch, din, dout, &x, Op::N, weight, Op::N, F::one(), &mut z);
            if let Some(cache) = keep.as_deref_mut() {
                cache.inputs.push(std::mem::take(&mut x));
            }
            if l < last {
                let a: Vec<F> = z.iter().map(|&v| silu(v)).collect();
                if let Some(cache) = keep.as_deref_mut() {
                    cache.pre.push(z);
                }
                x = a;
            } else {
                x = z;
            }
        }
        Ok(x)
    }

    /// Forward pass over a row-major `batch x input_dim` matrix, keeping the
    /// activations needed by [`Mlp::backward`].
    pub fn forward<F: Scalar>(
        &self,
        params: &ParameterStore<F>,
        input: &[F],
        batch: usize,
    ) -> Result<(Vec<F>, ForwardCache<F>)> {
        let mut cache = ForwardCache {
            batch,
            version: params.version,
            inputs: Vec::with_capacity(self.num_layers()),
            pre: Vec::with_capacity(self.num_layers()),
        };
        let out = self.run(params, input, batch, Some(&mut cache))?;
        Ok((out, cache))
    }

    /// Forward pass without a cache.
    pub fn predict<F: Scalar>(&self, params: &ParameterStore<F>, input: &[F], batch: usize) -> Result<Vec<F>> {
        self.run(params, input, batch, None)
    }

    /// Parameter gradients of `sum(grad_out * output)` for the cached pass.
    pub fn backward<F: Scalar>(
        &self,
        params: &ParameterStore<F>,
        cache: &ForwardCache<F>,
        grad_out: &[F],
    ) -> Result<ParameterStore<F>> {
        self.check(params)?;
        if cache.version != params.version || cache.inputs.len() != self.num_layers() {
            return Err(Error::State(
                "forward cache does not belong to the current parameters".into(),
            ));
        }
        let batch = cache.batch;
        if grad_out.len() != batch * self.output_dim() {
            return Err(Error::Shape(format!(
                "output gradient has {} values, expected {batch} x {}",
                grad_out.len(),
                self.output_dim()
            )));
        }
        let mut grads = params.zeros_like();
        let mut delta = grad_out.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (din, dout) = (self.dims[l], self.dims[l + 1]);
            let x = &cache.inputs[l];
            gemm(din, batch, dout, x, Op::T, &delta, Op::N, F::zero(), &mut grads.tensors[2 * l].data);
            let db = &mut grads.tensors[2 * l + 1].data;
            for row in delta.chunks_exact(dout) {
                for (g, &d) in db.iter_mut().zip(row) {
                    *g = *g + d;
                }
            }
            if l > 0 {
                let weight = &params.tensors[2 * l].data;
                let mut dx = vec![F::zero(); batch * din];
                gemm(batch, dout, din, &delta, Op::N, weight, Op::T, F::zero(), &mut dx);
                for (d, &z) in dx.iter_mut().zip(&cache.pre[l - 1]) {
                    *d = *d * silu_grad(z);
                }
                delta = dx;
            }
        }
        Ok(grads)
    }
}

/// Mean squared error over all elements and its gradient.
pub fn mse_loss<F: Scalar>(pred: &[F], target: &[F]) -> Result<(F, Vec<F>)> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "prediction has {} values, target {}",
            pred.len(),
            target.len()
        )));
    }
    let n = F::of(pred.len() as f64);
    let two = F::of(2.0);
    let mut loss = F::zero();
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let d = p - t;
            loss = loss + d * d;
            two * d / n
        })
        .collect();
    Ok((loss / n, grad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates for a bias-corrected Adam update.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<F> {
    m: Vec<Vec<F>>,
    v: Vec<Vec<F>>,
    step: u64,
}

impl<F: Scalar> AdamState<F> {
    pub fn new(params: &ParameterStore<F>) -> Self {
        let zeros = |_: &Tensor<F>| Vec::new();
        AdamState {
            m: params.tensors.iter().map(zeros).collect(),
            v: params.tensors.iter().map(zeros).collect(),
            step: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One update at learning rate `cfg.lr`. Rejected without side effects if
    /// any gradient is non-finite.
    pub fn update(&mut self, params: &mut ParameterStore<F>, grads: &ParameterStore<F>, cfg: &AdamConfig) -> Result<()> {
        if !params.same_layout(grads) || self.m.len() != params.tensors.len() {
            return Err(Error::Shape("gradient layout does not match parameters".into()));
        }
        if !grads.all_finite() {
            return Err(Error::Numeric("non-finite gradient; update rejected".into()));
        }
        self.step += 1;
        let b1 = F::of(cfg.beta1);
        let b2 = F::of(cfg.beta2);
        let one = F::one();
        let c1 = F::of(1.0 - cfg.beta1.powi(self.step as i32));
        let c2 = F::of(1.0 - cfg.beta2.powi(self.step as i32));
        let lr = F::of(cfg.lr);
        let eps = F::of(cfg.eps);
        params.version += 1;
        for (i, (p, g)) in params.tensors.iter_mut().zip(&grads.tensors).enumerate() {
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            if m.is_empty() {
                m.resize(p.data.len(), F::zero());
                v.resize(p.data.len(), F::zero());
            }
            for (((w, &gi), mi), vi) in p.data.iter_mut().zip(&g.data).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = b1 * *mi + (one - b1) * gi;
                *vi = b2 * *vi + (one - b2) * gi * gi;
                let mhat = *mi / c1;
                let vhat = *vi / c2;
                *w = *w - lr * mhat / (vhat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
