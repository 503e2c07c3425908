//! Layer primitives with hand-written forward and backward passes.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// One stage of a stack. Affine computes `y = x W^T + b` with `W` stored
/// out-by-in, row-major.
#[derive(Debug, Clone)]
pub enum Layer {
    GaussianNoise {
        sigma: f64,
    },
    Affine {
        w: Array2<f64>,
        b: Array1<f64>,
    },
    BatchNorm {
        gamma: Array1<f64>,
        beta: Array1<f64>,
        running_mean: Array1<f64>,
        running_var: Array1<f64>,
        momentum: f64,
        eps: f64,
    },
    Elu {
        alpha: f64,
    },
}

impl Layer {
    pub fn output_width(&self, input_width: usize) -> usize {
        match self {
            Layer::Affine { w, .. } => w.nrows(),
            _ => input_width,
        }
    }
}

/// Intermediates retained by a train-mode forward for the backward pass.
pub enum LayerCache {
    Identity,
    Affine { input: Array2<f64> },
    BatchNorm { x_hat: Array2<f64>, inv_std: Array1<f64> },
    Elu { output: Array2<f64> },
}

/// Parameter gradients, parallel to the layer list.
#[derive(Debug, Clone)]
pub enum LayerGrad {
    None,
    Affine { dw: Array2<f64>, db: Array1<f64> },
    BatchNorm { dgamma: Array1<f64>, dbeta: Array1<f64> },
}

/// Where train-mode Gaussian noise comes from.
pub enum NoiseMode<'a> {
    /// Draw fresh standard normals from this stream.
    Seeded(&'a mut ChaCha8Rng),
    /// Reuse pre-drawn standard normals (finite-difference checks).
    Frozen(&'a FrozenNoise),
}

/// Pre-drawn standard normal matrices, one per Gaussian-noise layer in
/// forward order across encoder then decoder.
#[derive(Debug, Clone, Default)]
pub struct FrozenNoise {
    pub draws: Vec<Array2<f64>>,
}

impl FrozenNoise {
    pub fn draw(rng: &mut ChaCha8Rng, shapes: &[(usize, usize)]) -> Self {
        let draws = shapes
            .iter()
            .map(|&(r, c)| Array2::from_shape_fn((r, c), |_| StandardNormal.sample(rng)))
            .collect();
        FrozenNoise { draws }
    }
}

/// Ordered layer list acting row-wise on a batch.
#[derive(Debug, Clone)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>) -> Self {
        LayerStack { layers }
    }

    /// Inference forward: noise off, batch norm on running statistics.
    pub fn forward_infer(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = match layer {
                Layer::GaussianNoise { .. } => cur,
                Layer::Affine { w, b } => cur.dot(&w.t()) + b,
                Layer::BatchNorm {
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                    eps,
                    ..
                } => {
                    let inv_std = running_var.mapv(|v| 1.0 / (v + eps).sqrt());
                    (cur - running_mean) * &inv_std * gamma + beta
                }
                Layer::Elu { alpha } => cur.mapv(|v| elu(v, *alpha)),
            };
        }
        cur
    }

    /// Train forward: noise active, batch norm on batch statistics.
    /// `noise_cursor` indexes into the frozen draw list across stacks.
    pub fn forward_train(
        &mut self,
        x: &Array2<f64>,
        noise: &mut NoiseMode,
        noise_cursor: &mut usize,
        update_running: bool,
    ) -> Result<(Array2<f64>, Vec<LayerCache>)> {
        let b_rows = x.nrows();
        if b_rows < 2 {
            return Err(Error::shape("train-mode batch needs >= 2 rows"));
        }
        let mut cur = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &mut self.layers {
            match layer {
                Layer::GaussianNoise { sigma } => {
                    if *sigma > 0.0 {
                        match noise {
                            NoiseMode::Seeded(rng) => {
                                add_noise(&mut cur, rng, *sigma);
                            }
                            NoiseMode::Frozen(frozen) => {
                                let draw = frozen.draws.get(*noise_cursor).ok_or_else(|| {
                                    Error::shape("frozen noise list shorter than GN layer count")
                                })?;
                                if draw.dim() != cur.dim() {
                                    return Err(Error::shape(
                                        "frozen noise shape does not match batch",
                                    ));
                                }
                                cur = cur + &(draw * *sigma);
                            }
                        }
                    }
                    *noise_cursor += 1;
                    caches.push(LayerCache::Identity);
                }
                Layer::Affine { w, b } => {
                    let out = cur.dot(&w.t()) + &*b;
                    caches.push(LayerCache::Affine { input: cur });
                    cur = out;
                }
                Layer::BatchNorm {
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                    momentum,
                    eps,
                } => {
                    let bf = cur.nrows() as f64;
                    let mean = cur.sum_axis(Axis(0)) / bf;
                    let centered = cur - &mean;
                    let var = centered.mapv(|v| v * v).sum_axis(Axis(0)) / bf;
                    let inv_std = var.mapv(|v| 1.0 / (v + *eps).sqrt());
                    let x_hat = centered * &inv_std;
                    let out = &x_hat * &*gamma + &*beta;
                    if update_running {
                        *running_mean = &*running_mean * *momentum + &(&mean * (1.0 - *momentum));
                        *running_var = &*running_var * *momentum + &(&var * (1.0 - *momentum));
                    }
                    caches.push(LayerCache::BatchNorm { x_hat, inv_std });
                    cur = out;
                }
                Layer::Elu { alpha } => {
                    let out = cur.mapv(|v| elu(v, *alpha));
                    caches.push(LayerCache::Elu { output: out.clone() });
                    cur = out;
                }
            }
        }
        Ok((cur, caches))
    }

    /// Backpropagate `grad_out` through the stack, filling parameter
    /// gradients and returning the gradient with respect to the input.
    pub fn backward(
        &self,
        caches: &[LayerCache],
        grad_out: Array2<f64>,
        grads: &mut Vec<LayerGrad>,
    ) -> Array2<f64> {
        debug_assert_eq!(caches.len(), self.layers.len());
        grads.clear();
        grads.resize(self.layers.len(), LayerGrad::None);
        let mut grad = grad_out;
        for idx in (0..self.layers.len()).rev() {
            match (&self.layers[idx], &caches[idx]) {
                (Layer::GaussianNoise { .. }, LayerCache::Identity) => {}
                (Layer::Affine { w, .. }, LayerCache::Affine { input }) => {
                    let dw = grad.t().dot(input);
                    let db = grad.sum_axis(Axis(0));
                    grads[idx] = LayerGrad::Affine { dw, db };
                    grad = grad.dot(w);
                }
                (Layer::BatchNorm { gamma, .. }, LayerCache::BatchNorm { x_hat, inv_std }) => {
                    let bf = grad.nrows() as f64;
                    let dbeta = grad.sum_axis(Axis(0));
                    let dgamma = (&grad * x_hat).sum_axis(Axis(0));
                    let dxhat = &grad * gamma;
                    let sum_dxhat = dxhat.sum_axis(Axis(0));
                    let sum_dxhat_xhat = (&dxhat * x_hat).sum_axis(Axis(0));
                    let dx = (dxhat * bf - &sum_dxhat - x_hat * &sum_dxhat_xhat)
                        * inv_std
                        / bf;
                    grads[idx] = LayerGrad::BatchNorm { dgamma, dbeta };
                    grad = dx;
                }
                (Layer::Elu { alpha }, LayerCache::Elu { output }) => {
                    let a = *alpha;
                    grad.zip_mut_with(output, |g, &y| {
                        if y <= 0.0 {
                            *g *= y + a;
                        }
                    });
                }
                _ => unreachable!("cache kind follows layer kind"),
            }
        }
        grad
    }

    /// Count of trainable scalars (affine weights/biases, BN gamma/beta).
    pub fn trainable_parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Affine { w, b } => w.len() + b.len(),
                Layer::BatchNorm { gamma, beta, .. } => gamma.len() + beta.len(),
                _ => 0,
            })
            .sum()
    }

    /// Trainable scalars plus BN running statistics.
    pub fn parameter_count_with_stats(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Affine { w, b } => w.len() + b.len(),
                Layer::BatchNorm {
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                    ..
                } => gamma.len() + beta.len() + running_mean.len() + running_var.len(),
                _ => 0,
            })
            .sum()
    }

    /// Shapes of the noise draws a train-mode forward will request.
    pub fn noise_shapes(&self, batch: usize, input_width: usize) -> Vec<(usize, usize)> {
        let mut shapes = Vec::new();
        let mut width = input_width;
        for layer in &self.layers {
            if matches!(layer, Layer::GaussianNoise { .. }) {
                shapes.push((batch, width));
            }
            width = layer.output_width(width);
        }
        shapes
    }

    /// Zero-filled gradient holder matching this stack.
    pub fn zero_grads(&self) -> Vec<LayerGrad> {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Affine { w, b } => LayerGrad::Affine {
                    dw: Array2::zeros(w.dim()),
                    db: Array1::zeros(b.len()),
                },
                Layer::BatchNorm { gamma, .. } => LayerGrad::BatchNorm {
                    dgamma: Array1::zeros(gamma.len()),
                    dbeta: Array1::zeros(gamma.len()),
                },
                _ => LayerGrad::None,
            })
            .collect()
    }
}

fn elu(v: f64, alpha: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        alpha * (v.exp() - 1.0)
    }
}

/// Glorot-uniform affine layer, drawn row-major from the given stream.
pub fn glorot_affine(rng: &mut ChaCha8Rng, out_width: usize, in_width: usize) -> Layer {
    let limit = (6.0 / (in_width + out_width) as f64).sqrt();
    let w = Array2::from_shape_fn((out_width, in_width), |_| rng.gen_range(-limit..limit));
    Layer::Affine {
        w,
        b: Array1::zeros(out_width),
    }
}

pub fn batch_norm(width: usize, momentum: f64, eps: f64) -> Layer {
    Layer::BatchNorm {
        gamma: Array1::ones(width),
        beta: Array1::zeros(width),
        running_mean: Array1::zeros(width),
        running_var: Array1::ones(width),
        momentum,
        eps,
    }
}

/// Row-major draw order keeps replay deterministic.
fn add_noise(x: &mut Array2<f64>, rng: &mut ChaCha8Rng, sigma: f64) {
    for v in x.iter_mut() {
        let eta: f64 = StandardNormal.sample(rng);
        *v += sigma * eta;
    }
}
