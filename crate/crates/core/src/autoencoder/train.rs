//! Loss, gradients, Adam, and the training loop.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{FrozenNoise, LayerGrad, NoiseMode};
use super::{forward_train, EpochRecord, TrainConfig, TrainedAutoencoder};
use crate::error::{Error, Result};
use crate::fnn::{
    false_neighbor_fractions, fnn_loss_frozen, fnn_loss_grad_frozen, FnnConfig, FnnDiagnostics,
    LatentBatch,
};
use crate::timeseries::HankelMatrix;

/// Loss components of one train-mode pass.
#[derive(Debug, Clone)]
pub struct LossBreakdown {
    pub total: f64,
    pub recon: f64,
    pub fnn: f64,
    pub diagnostics: FnnDiagnostics,
}

/// Parameter gradients for both stacks.
pub struct ModelGrads {
    pub encoder: Vec<LayerGrad>,
    pub decoder: Vec<LayerGrad>,
}

/// Full forward/backward at the current parameters.
///
/// Reconstruction error is the mean square over all batch entries; the
/// false-neighbor fractions are recomputed on the latent batch and treated
/// as constants in the backward pass, which injects
/// `lambda * d(activity loss)/dh` at the latent layer.
pub fn loss_and_grad(
    model: &mut TrainedAutoencoder,
    batch: &Array2<f64>,
    lambda: f64,
    fnn_cfg: &FnnConfig,
    noise: &mut NoiseMode,
    update_running: bool,
) -> Result<(LossBreakdown, ModelGrads)> {
    let pass = forward_train(model, batch, noise, update_running)?;
    let bt = (batch.nrows() * batch.ncols()) as f64;

    let residual = &pass.reconstruction - batch;
    let recon = residual.iter().map(|v| v * v).sum::<f64>() / bt;

    let latent_batch = LatentBatch::new(pass.latent.clone())
        .map_err(|e| Error::numerical(format!("latent batch invalid: {e}")))?;
    let diagnostics = false_neighbor_fractions(&latent_batch, fnn_cfg)?;
    let total = recon + lambda * diagnostics.loss;
    if !total.is_finite() {
        return Err(Error::numerical(format!(
            "loss is not finite (recon {recon}, fnn {})",
            diagnostics.loss
        )));
    }

    let d_recon = residual * (2.0 / bt);
    let mut dec_grads = Vec::new();
    let mut grad_latent = model
        .decoder
        .backward(&pass.decoder_caches, d_recon, &mut dec_grads);
    if lambda > 0.0 {
        let fnn_grad =
            fnn_loss_grad_frozen(&pass.latent, &diagnostics.f_bar, fnn_cfg.activity);
        grad_latent = grad_latent + fnn_grad * lambda;
    }
    let mut enc_grads = Vec::new();
    model
        .encoder
        .backward(&pass.encoder_caches, grad_latent, &mut enc_grads);

    Ok((
        LossBreakdown {
            total,
            recon,
            fnn: diagnostics.loss,
            diagnostics,
        },
        ModelGrads {
            encoder: enc_grads,
            decoder: dec_grads,
        },
    ))
}

/// Total loss with frozen noise draws and frozen false-neighbor fractions;
/// this is the scalar function the analytic gradients differentiate, used
/// by finite-difference checks.
pub fn loss_with_frozen(
    model: &mut TrainedAutoencoder,
    batch: &Array2<f64>,
    lambda: f64,
    f_bar: &[f64],
    fnn_cfg: &FnnConfig,
    noise: &FrozenNoise,
) -> Result<f64> {
    let mut mode = NoiseMode::Frozen(noise);
    let pass = forward_train(model, batch, &mut mode, false)?;
    let bt = (batch.nrows() * batch.ncols()) as f64;
    let recon = (&pass.reconstruction - batch)
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        / bt;
    Ok(recon + lambda * fnn_loss_frozen(&pass.latent, f_bar, fnn_cfg.activity))
}

// ---------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------

struct Adam {
    m_enc: Vec<LayerGrad>,
    v_enc: Vec<LayerGrad>,
    m_dec: Vec<LayerGrad>,
    v_dec: Vec<LayerGrad>,
    step: usize,
}

impl Adam {
    fn new(model: &TrainedAutoencoder) -> Self {
        Adam {
            m_enc: model.encoder.zero_grads(),
            v_enc: model.encoder.zero_grads(),
            m_dec: model.decoder.zero_grads(),
            v_dec: model.decoder.zero_grads(),
            step: 0,
        }
    }

    fn apply(&mut self, model: &mut TrainedAutoencoder, grads: &ModelGrads, cfg: &TrainConfig) {
        self.step += 1;
        let b1t = 1.0 - cfg.beta1.powi(self.step as i32);
        let b2t = 1.0 - cfg.beta2.powi(self.step as i32);
        update_stack(
            &mut model.encoder.layers,
            &grads.encoder,
            &mut self.m_enc,
            &mut self.v_enc,
            cfg,
            b1t,
            b2t,
        );
        update_stack(
            &mut model.decoder.layers,
            &grads.decoder,
            &mut self.m_dec,
            &mut self.v_dec,
            cfg,
            b1t,
            b2t,
        );
    }
}

fn update_stack(
    layers: &mut [super::Layer],
    grads: &[LayerGrad],
    m: &mut [LayerGrad],
    v: &mut [LayerGrad],
    cfg: &TrainConfig,
    b1t: f64,
    b2t: f64,
) {
    let scalar = |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..theta.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / b1t;
            let v_hat = v[i] / b2t;
            theta[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
        }
    };
    for (idx, layer) in layers.iter_mut().enumerate() {
        match (layer, &grads[idx], &mut m[idx], &mut v[idx]) {
            (
                super::Layer::Affine { w, b },
                LayerGrad::Affine { dw, db },
                LayerGrad::Affine { dw: mw, db: mb },
                LayerGrad::Affine { dw: vw, db: vb },
            ) => {
                scalar(
                    w.as_slice_mut().expect("standard layout"),
                    dw.as_slice().expect("standard layout"),
                    mw.as_slice_mut().expect("standard layout"),
                    vw.as_slice_mut().expect("standard layout"),
                );
                scalar(
                    b.as_slice_mut().expect("standard layout"),
                    db.as_slice().expect("standard layout"),
                    mb.as_slice_mut().expect("standard layout"),
                    vb.as_slice_mut().expect("standard layout"),
                );
            }
            (
                super::Layer::BatchNorm { gamma, beta, .. },
                LayerGrad::BatchNorm { dgamma, dbeta },
                LayerGrad::BatchNorm {
                    dgamma: mg,
                    dbeta: mbt,
                },
                LayerGrad::BatchNorm {
                    dgamma: vg,
                    dbeta: vbt,
                },
            ) => {
                scalar(
                    gamma.as_slice_mut().expect("standard layout"),
                    dgamma.as_slice().expect("standard layout"),
                    mg.as_slice_mut().expect("standard layout"),
                    vg.as_slice_mut().expect("standard layout"),
                );
                scalar(
                    beta.as_slice_mut().expect("standard layout"),
                    dbeta.as_slice().expect("standard layout"),
                    mbt.as_slice_mut().expect("standard layout"),
                    vbt.as_slice_mut().expect("standard layout"),
                );
            }
            _ => {}
        }
    }
}

// ---------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------

/// A training run that failed mid-flight; the partial model retains the
/// history recorded before the failure.
#[derive(Debug)]
pub struct TrainAbort {
    pub error: Error,
    pub partial: Box<TrainedAutoencoder>,
}

impl std::fmt::Display for TrainAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "training aborted: {}", self.error)
    }
}

impl std::error::Error for TrainAbort {}

/// Train on shuffled mini-batches of the Hankel rows with Adam.
///
/// Deterministic given the seed: weight init, per-epoch shuffles, and the
/// Gaussian-noise draws come from independent ChaCha streams of
/// `cfg.seed`. Partial trailing batches are dropped. Validation loss is
/// reconstruction-only, in inference mode, so it stays comparable across
/// regularizer strengths.
pub fn train(
    x_train: &HankelMatrix,
    x_val: &HankelMatrix,
    cfg: &TrainConfig,
) -> std::result::Result<TrainedAutoencoder, Box<TrainAbort>> {
    let wrap = |error: Error, partial: TrainedAutoencoder| {
        Box::new(TrainAbort {
            error,
            partial: Box::new(partial),
        })
    };

    let t = x_train.lags();
    let setup = (|| -> Result<TrainedAutoencoder> {
        cfg.validate()?;
        if x_val.lags() != t {
            return Err(Error::shape(format!(
                "validation width {} != train width {t}",
                x_val.lags()
            )));
        }
        if x_train.n_rows() < cfg.batch_size {
            return Err(Error::insufficient(format!(
                "training rows {} < batch size {}",
                x_train.n_rows(),
                cfg.batch_size
            )));
        }
        init_model_seeded(t, cfg)
    })();
    let mut model = match setup {
        Ok(m) => m,
        Err(e) => {
            return Err(Box::new(TrainAbort {
                error: e,
                partial: Box::new(
                    super::init_model_with(t.max(2), 2, 0, &TrainConfig::default())
                        .expect("fallback model"),
                ),
            }))
        }
    };

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(1);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    noise_rng.set_stream(2);

    let mut adam = Adam::new(&model);
    let n = x_train.n_rows();
    let batches_per_epoch = n / cfg.batch_size;
    let mut indices: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.epochs {
        indices.shuffle(&mut shuffle_rng);
        let mut epoch_recon = 0.0;
        let mut epoch_fnn = 0.0;
        let mut epoch_fbar = vec![0.0; model.latent_width()];
        for bi in 0..batches_per_epoch {
            let slice = &indices[bi * cfg.batch_size..(bi + 1) * cfg.batch_size];
            let batch = x_train.rows().select(Axis(0), slice);
            let mut mode = NoiseMode::Seeded(&mut noise_rng);
            let step =
                loss_and_grad(&mut model, &batch, cfg.lambda, &cfg.fnn, &mut mode, true);
            match step {
                Ok((loss, grads)) => {
                    adam.apply(&mut model, &grads, cfg);
                    epoch_recon += loss.recon;
                    epoch_fnn += loss.fnn;
                    for (acc, f) in epoch_fbar.iter_mut().zip(&loss.diagnostics.f_bar) {
                        *acc += f;
                    }
                }
                Err(e) => {
                    let err =
                        Error::numerical(format!("epoch {epoch}, batch {bi}: {e}"));
                    return Err(wrap(err, model));
                }
            }
        }
        let inv = 1.0 / batches_per_epoch as f64;
        let val_pass = super::forward_infer(&model, x_val.rows());
        let val_loss = match val_pass {
            Ok(p) => {
                let bt = (x_val.n_rows() * t) as f64;
                (&p.reconstruction - x_val.rows())
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    / bt
            }
            Err(e) => return Err(wrap(e, model)),
        };
        if !val_loss.is_finite() {
            let err = Error::numerical(format!("epoch {epoch}: validation loss not finite"));
            return Err(wrap(err, model));
        }
        model.history.push(EpochRecord {
            recon_loss: epoch_recon * inv,
            fnn_loss: epoch_fnn * inv,
            val_loss,
            f_bar: epoch_fbar.iter().map(|v| v * inv).collect(),
        });
    }
    Ok(model)
}

fn init_model_seeded(t: usize, cfg: &TrainConfig) -> Result<TrainedAutoencoder> {
    super::init_model_with(t, cfg.latent, cfg.seed, cfg)
}
