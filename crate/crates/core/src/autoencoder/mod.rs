//! MLP autoencoder with hand-written backpropagation.
//!
//! Encoder: `Input-GN-FC-BN-ELU-FC-BN-ELU-FC-BN`; no activation feeds the
//! latent layer, whose batch-normalized output is the embedding. Decoder:
//! `GN-FC-BN-ELU-FC-BN-ELU-FC-BN-ELU-FC` back to the input width. Hidden
//! widths equal the latent width. Training minimizes reconstruction error
//! plus `lambda` times the false-neighbor activity loss on the latent
//! batch.

mod layers;
mod train;

pub use layers::{FrozenNoise, Layer, LayerCache, LayerGrad, LayerStack, NoiseMode};
pub use train::{loss_and_grad, loss_with_frozen, train, LossBreakdown, ModelGrads, TrainAbort};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnn::FnnConfig;
use crate::timeseries::{HankelMatrix, PointCloud};

/// Training hyperparameters; the defaults target standardized inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Latent width L of the model to train.
    pub latent: usize,
    /// Regularizer strength.
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Standard deviation of the train-time Gaussian-noise layers.
    pub gn_sigma: f64,
    pub fnn: FnnConfig,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub bn_momentum: f64,
    pub bn_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            latent: 10,
            lambda: 0.03,
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 512,
            seed: 0,
            gn_sigma: 0.5,
            fnn: FnnConfig::default(),
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            bn_momentum: 0.99,
            bn_eps: 1e-3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.latent < 2 {
            return Err(Error::invalid("latent width must be >= 2"));
        }
        if self.lambda < 0.0 {
            return Err(Error::invalid("lambda must be >= 0"));
        }
        if self.batch_size < 2 {
            return Err(Error::invalid("batch size must be >= 2"));
        }
        if self.epochs < 1 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be > 0"));
        }
        if self.gn_sigma < 0.0 {
            return Err(Error::invalid("gn_sigma must be >= 0"));
        }
        self.fnn.validate()
    }
}

/// One epoch of the training record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRecord {
    pub recon_loss: f64,
    pub fnn_loss: f64,
    pub val_loss: f64,
    /// Mean false-neighbor fractions across the epoch's batches.
    pub f_bar: Vec<f64>,
}

/// Encoder/decoder pair with its config snapshot and training history.
#[derive(Debug, Clone)]
pub struct TrainedAutoencoder {
    pub encoder: LayerStack,
    pub decoder: LayerStack,
    input_width: usize,
    latent_width: usize,
    pub config: TrainConfig,
    pub history: Vec<EpochRecord>,
    pub seed: u64,
}

impl TrainedAutoencoder {
    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn latent_width(&self) -> usize {
        self.latent_width
    }

    pub fn trainable_parameter_count(&self) -> usize {
        self.encoder.trainable_parameter_count() + self.decoder.trainable_parameter_count()
    }

    /// Encoder parameters counted with BN running statistics included,
    /// the convention under which the default model has 450 parameters.
    pub fn encoder_parameter_count(&self) -> usize {
        self.encoder.parameter_count_with_stats()
    }
}

/// Build the untrained model for input width `t` and latent width `l`.
/// Weights are Glorot-uniform from a ChaCha stream seeded with `seed`.
pub fn init_model(t: usize, l: usize, seed: u64) -> Result<TrainedAutoencoder> {
    init_model_with(t, l, seed, &TrainConfig::default())
}

pub fn init_model_with(
    t: usize,
    l: usize,
    seed: u64,
    cfg: &TrainConfig,
) -> Result<TrainedAutoencoder> {
    if t < 2 || l < 2 {
        return Err(Error::invalid(format!(
            "model needs T >= 2 and L >= 2, got T={t}, L={l}"
        )));
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gn = |sigma: f64| Layer::GaussianNoise { sigma };
    let bn = |w: usize| layers::batch_norm(w, cfg.bn_momentum, cfg.bn_eps);
    let elu = || Layer::Elu { alpha: 1.0 };

    let encoder = LayerStack::new(vec![
        gn(cfg.gn_sigma),
        layers::glorot_affine(&mut rng, l, t),
        bn(l),
        elu(),
        layers::glorot_affine(&mut rng, l, l),
        bn(l),
        elu(),
        layers::glorot_affine(&mut rng, l, l),
        bn(l),
    ]);
    let decoder = LayerStack::new(vec![
        gn(cfg.gn_sigma),
        layers::glorot_affine(&mut rng, l, l),
        bn(l),
        elu(),
        layers::glorot_affine(&mut rng, l, l),
        bn(l),
        elu(),
        layers::glorot_affine(&mut rng, l, l),
        bn(l),
        elu(),
        layers::glorot_affine(&mut rng, t, l),
    ]);

    Ok(TrainedAutoencoder {
        encoder,
        decoder,
        input_width: t,
        latent_width: l,
        config: cfg.clone(),
        history: Vec::new(),
        seed,
    })
}

/// Output of a full forward pass.
pub struct ForwardPass {
    pub latent: Array2<f64>,
    pub reconstruction: Array2<f64>,
    pub encoder_caches: Vec<LayerCache>,
    pub decoder_caches: Vec<LayerCache>,
}

/// Inference forward: deterministic, running-statistics batch norm.
pub fn forward_infer(model: &TrainedAutoencoder, batch: &Array2<f64>) -> Result<ForwardPass> {
    check_width(model, batch)?;
    let latent = model.encoder.forward_infer(batch);
    let reconstruction = model.decoder.forward_infer(&latent);
    Ok(ForwardPass {
        latent,
        reconstruction,
        encoder_caches: Vec::new(),
        decoder_caches: Vec::new(),
    })
}

/// Train-mode forward: Gaussian noise active, batch-statistics batch norm,
/// caches retained for backward.
pub fn forward_train(
    model: &mut TrainedAutoencoder,
    batch: &Array2<f64>,
    noise: &mut NoiseMode,
    update_running: bool,
) -> Result<ForwardPass> {
    check_width(model, batch)?;
    let mut cursor = 0;
    let (latent, encoder_caches) =
        model
            .encoder
            .forward_train(batch, noise, &mut cursor, update_running)?;
    let (reconstruction, decoder_caches) =
        model
            .decoder
            .forward_train(&latent, noise, &mut cursor, update_running)?;
    Ok(ForwardPass {
        latent,
        reconstruction,
        encoder_caches,
        decoder_caches,
    })
}

fn check_width(model: &TrainedAutoencoder, batch: &Array2<f64>) -> Result<()> {
    if batch.ncols() != model.input_width {
        return Err(Error::shape(format!(
            "batch width {} does not match model input width {}",
            batch.ncols(),
            model.input_width
        )));
    }
    Ok(())
}

/// Shapes of the standard-normal draws one train-mode forward consumes.
pub fn noise_shapes(model: &TrainedAutoencoder, batch: usize) -> Vec<(usize, usize)> {
    let mut shapes = model.encoder.noise_shapes(batch, model.input_width);
    shapes.extend(model.decoder.noise_shapes(batch, model.latent_width));
    shapes
}

/// Encoder-only inference over a Hankel matrix, one latent row per input
/// row. Row order is preserved and the result does not depend on how the
/// rows are batched.
pub fn embed(model: &TrainedAutoencoder, x: &HankelMatrix) -> Result<PointCloud> {
    if x.lags() != model.input_width {
        return Err(Error::shape(format!(
            "Hankel width {} does not match model input width {}",
            x.lags(),
            model.input_width
        )));
    }
    let latent = model.encoder.forward_infer(x.rows());
    PointCloud::new(latent, x.source_dt())
}

// -------------------------------------------------------------------------
// Checkpoint serialization ("fnnae-1"): a single JSON document with the
// architecture, weights (row-major), BN running stats, config, and seed.
// -------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LayerSpec {
    GaussianNoise {
        sigma: f64,
    },
    Affine {
        out: usize,
        #[serde(rename = "in")]
        inp: usize,
        w: Vec<f64>,
        b: Vec<f64>,
    },
    BatchNorm {
        gamma: Vec<f64>,
        beta: Vec<f64>,
        running_mean: Vec<f64>,
        running_var: Vec<f64>,
        momentum: f64,
        eps: f64,
    },
    Elu {
        alpha: f64,
    },
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: String,
    input_width: usize,
    latent_width: usize,
    seed: u64,
    encoder: Vec<LayerSpec>,
    decoder: Vec<LayerSpec>,
    config: TrainConfig,
    history: Vec<EpochRecord>,
}

pub const CHECKPOINT_VERSION: &str = "fnnae-1";

fn stack_to_specs(stack: &LayerStack) -> Vec<LayerSpec> {
    stack
        .layers
        .iter()
        .map(|l| match l {
            Layer::GaussianNoise { sigma } => LayerSpec::GaussianNoise { sigma: *sigma },
            Layer::Affine { w, b } => LayerSpec::Affine {
                out: w.nrows(),
                inp: w.ncols(),
                w: w.iter().copied().collect(),
                b: b.to_vec(),
            },
            Layer::BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
                momentum,
                eps,
            } => LayerSpec::BatchNorm {
                gamma: gamma.to_vec(),
                beta: beta.to_vec(),
                running_mean: running_mean.to_vec(),
                running_var: running_var.to_vec(),
                momentum: *momentum,
                eps: *eps,
            },
            Layer::Elu { alpha } => LayerSpec::Elu { alpha: *alpha },
        })
        .collect()
}

fn specs_to_stack(specs: Vec<LayerSpec>) -> Result<LayerStack> {
    let mut layers = Vec::with_capacity(specs.len());
    for spec in specs {
        layers.push(match spec {
            LayerSpec::GaussianNoise { sigma } => Layer::GaussianNoise { sigma },
            LayerSpec::Affine { out, inp, w, b } => {
                if w.len() != out * inp || b.len() != out {
                    return Err(Error::shape("checkpoint affine dimensions inconsistent"));
                }
                Layer::Affine {
                    w: Array2::from_shape_vec((out, inp), w).expect("checked"),
                    b: ndarray::Array1::from_vec(b),
                }
            }
            LayerSpec::BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
                momentum,
                eps,
            } => Layer::BatchNorm {
                gamma: ndarray::Array1::from_vec(gamma),
                beta: ndarray::Array1::from_vec(beta),
                running_mean: ndarray::Array1::from_vec(running_mean),
                running_var: ndarray::Array1::from_vec(running_var),
                momentum,
                eps,
            },
            LayerSpec::Elu { alpha } => Layer::Elu { alpha },
        });
    }
    Ok(LayerStack::new(layers))
}

/// Serialize the model to the `fnnae-1` JSON checkpoint format.
pub fn to_checkpoint_json(model: &TrainedAutoencoder) -> Result<String> {
    let ckpt = Checkpoint {
        version: CHECKPOINT_VERSION.to_string(),
        input_width: model.input_width,
        latent_width: model.latent_width,
        seed: model.seed,
        encoder: stack_to_specs(&model.encoder),
        decoder: stack_to_specs(&model.decoder),
        config: model.config.clone(),
        history: model.history.clone(),
    };
    Ok(serde_json::to_string_pretty(&ckpt)?)
}

pub fn from_checkpoint_json(text: &str) -> Result<TrainedAutoencoder> {
    let ckpt: Checkpoint = serde_json::from_str(text)?;
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(Error::invalid(format!(
            "unsupported checkpoint version {:?}, expected {CHECKPOINT_VERSION:?}",
            ckpt.version
        )));
    }
    Ok(TrainedAutoencoder {
        encoder: specs_to_stack(ckpt.encoder)?,
        decoder: specs_to_stack(ckpt.decoder)?,
        input_width: ckpt.input_width,
        latent_width: ckpt.latent_width,
        config: ckpt.config,
        history: ckpt.history,
        seed: ckpt.seed,
    })
}
