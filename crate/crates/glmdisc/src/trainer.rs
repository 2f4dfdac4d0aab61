//! The glmdisc training loop.
//!
//! Minibatch RMSProp ascent on the relaxed log-likelihood jointly over the
//! softmax scores and the logistic coefficients; after every epoch the current
//! relaxation is hardened, refit exactly by maximum likelihood, and scored by
//! BIC. The model retained at the end is the one of the best-scoring epoch,
//! not the last: the ascent only proposes quantizations.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{level_translations, Dataset, FeatureKind, RawValue, Schema};
use crate::error::{Error, Result};
use crate::glm::{self, FitResult, LogisticParams, DEFAULT_RIDGE};
use crate::numeric::{bernoulli_loglik, sigmoid};
use crate::quantization::{FeatureQuantizer, Quantization};
use crate::soft::{extract_hard, init_soft, soft_forward_into, SoftFeatureParams, SoftQuantization};

/// Starting level counts, one per feature or one broadcast to all.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelBudget {
    Uniform(usize),
    PerFeature(Vec<usize>),
}

impl LevelBudget {
    fn resolve(&self, d: usize) -> Result<Vec<usize>> {
        let m = match self {
            LevelBudget::Uniform(m) => vec![*m; d],
            LevelBudget::PerFeature(ms) => {
                if ms.len() != d {
                    return Err(Error::InvalidConfig(format!(
                        "{} level budgets for {} features",
                        ms.len(),
                        d
                    )));
                }
                ms.clone()
            }
        };
        if m.iter().any(|&v| v == 0) {
            return Err(Error::InvalidConfig("every level budget must be at least 1".into()));
        }
        Ok(m)
    }
}

/// Model selection criterion computed at each epoch's refit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Bic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub m_max: LevelBudget,
    pub epochs: usize,
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub criterion: Criterion,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            m_max: LevelBudget::Uniform(10),
            epochs: 40,
            learning_rate: 0.01,
            rms_decay: 0.9,
            rms_epsilon: 1e-8,
            batch_size: 128,
            seed: 0,
            criterion: Criterion::Bic,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if !(self.rms_decay > 0.0 && self.rms_decay < 1.0) {
            return Err(Error::InvalidConfig("RMS decay must lie in (0, 1)".into()));
        }
        if !(self.rms_epsilon > 0.0 && self.rms_epsilon.is_finite()) {
            return Err(Error::InvalidConfig("RMS epsilon must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

/// One epoch's hardened quantization, its exact refit, and the relaxed
/// log-likelihood the ascent reached.
#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: usize,
    pub hard_q: Quantization,
    pub fit: FitResult,
    pub relaxed_loglik: f64,
}

/// The trained model: the best epoch's quantization and refit coefficients,
/// plus the full per-epoch history.
#[derive(Debug, Clone)]
pub struct GlmdiscModel {
    schema: Schema,
    best_epoch: usize,
    quantization: Quantization,
    params: LogisticParams,
    bic: f64,
    history: Vec<EpochRecord>,
}

impl GlmdiscModel {
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn quantization(&self) -> &Quantization {
        &self.quantization
    }

    pub fn params(&self) -> &LogisticParams {
        &self.params
    }

    pub fn bic(&self) -> f64 {
        self.bic
    }

    pub fn history(&self) -> &[EpochRecord] {
        &self.history
    }

    pub(crate) fn from_parts(
        schema: Schema,
        best_epoch: usize,
        quantization: Quantization,
        params: LogisticParams,
        bic: f64,
        history: Vec<EpochRecord>,
    ) -> Self {
        Self { schema, best_epoch, quantization, params, bic, history }
    }

    /// P(y=1) rowwise. The dataset may encode categorical levels in its own
    /// order; labels are matched by name against the training schema.
    pub fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        if !self.schema.compatible_layout(ds.schema()) {
            return Err(Error::SchemaMismatch(
                "dataset features do not match the model schema".into(),
            ));
        }
        let translations = level_translations(&self.schema, ds.schema());
        let mut out = Vec::with_capacity(ds.n());
        let mut levels = vec![0usize; ds.d()];
        for i in 0..ds.n() {
            for j in 0..ds.d() {
                levels[j] = match (self.quantization.feature(j), ds.raw(i, j)) {
                    (FeatureQuantizer::Continuous(q), RawValue::Continuous(x)) => q.apply(x),
                    (FeatureQuantizer::Categorical(q), RawValue::Categorical(code)) => {
                        let model_code = translations[j]
                            .as_ref()
                            .expect("categorical feature has a translation table")[code]
                            .ok_or_else(|| Error::UnknownLevel {
                                feature: self.schema.feature_name(j).to_string(),
                                label: ds.schema().levels(j)[code].clone(),
                                row: i,
                            })?;
                        q.apply(model_code)?
                    }
                    _ => unreachable!("compatible_layout guarantees matching kinds"),
                };
            }
            let mut z = self.params.theta0;
            for (j, &level) in levels.iter().enumerate() {
                z += self.params.blocks[j][level];
            }
            out.push(sigmoid(z));
        }
        Ok(out)
    }
}

fn check_relaxed_shapes(sq: &SoftQuantization, params: &LogisticParams, ds: &Dataset) -> Result<()> {
    if sq.d() != ds.d() {
        return Err(Error::ShapeMismatch(format!(
            "relaxation over {} features, dataset has {}",
            sq.d(),
            ds.d()
        )));
    }
    if params.blocks.len() != sq.d() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficient blocks for {} features",
            params.blocks.len(),
            sq.d()
        )));
    }
    for j in 0..sq.d() {
        if params.blocks[j].len() != sq.feature(j).m() {
            return Err(Error::ShapeMismatch(format!(
                "feature {}: block of {} coefficients for {} soft levels",
                j,
                params.blocks[j].len(),
                sq.feature(j).m()
            )));
        }
        let kinds_match = match sq.feature(j) {
            SoftFeatureParams::Continuous(_) => ds.schema().kind(j) == FeatureKind::Continuous,
            SoftFeatureParams::Categorical(_) => ds.schema().kind(j) == FeatureKind::Categorical,
        };
        if !kinds_match {
            return Err(Error::ShapeMismatch(format!(
                "feature {}: relaxation kind disagrees with the dataset schema",
                j
            )));
        }
    }
    Ok(())
}

fn relaxed_logit(
    sq: &SoftQuantization,
    params: &LogisticParams,
    ds: &Dataset,
    row: usize,
    wbufs: &mut [Vec<f64>],
) -> f64 {
    let mut z = params.theta0;
    for j in 0..sq.d() {
        soft_forward_into(sq.feature(j), ds.raw(row, j), &mut wbufs[j]);
        let block = &params.blocks[j];
        z += block.iter().zip(&wbufs[j]).map(|(t, w)| t * w).sum::<f64>();
    }
    z
}

/// Log-likelihood of the logistic model fed with softmax level weights in
/// place of one-hot dummies.
pub fn relaxed_loglik(sq: &SoftQuantization, params: &LogisticParams, ds: &Dataset) -> Result<f64> {
    check_relaxed_shapes(sq, params, ds)?;
    let mut wbufs: Vec<Vec<f64>> = sq.per_feature().iter().map(|p| Vec::with_capacity(p.m())).collect();
    let mut total = 0.0;
    for i in 0..ds.n() {
        let z = relaxed_logit(sq, params, ds, i, &mut wbufs);
        total += bernoulli_loglik(ds.target()[i], z);
    }
    Ok(total)
}

/// Gradients of the batch-mean relaxed log-likelihood with respect to every
/// softmax score and every free coefficient. Containers mirror the parameter
/// shapes; pinned coefficient positions stay exactly zero.
#[derive(Debug, Clone)]
pub struct RelaxedGradients {
    pub alpha: SoftQuantization,
    pub theta: LogisticParams,
}

pub fn relaxed_gradients(
    sq: &SoftQuantization,
    params: &LogisticParams,
    ds: &Dataset,
    batch: &[usize],
) -> Result<RelaxedGradients> {
    check_relaxed_shapes(sq, params, ds)?;
    assert!(!batch.is_empty(), "gradient over an empty batch");
    let d = sq.d();
    let mut alpha = sq.zeros_like();
    let mut theta = LogisticParams::zeros(&sq.level_counts());
    let mut wbufs: Vec<Vec<f64>> = sq.per_feature().iter().map(|p| Vec::with_capacity(p.m())).collect();
    for &i in batch {
        let z = relaxed_logit(sq, params, ds, i, &mut wbufs);
        let r = f64::from(ds.target()[i]) - sigmoid(z);
        theta.theta0 += r;
        for j in 0..d {
            let block = &params.blocks[j];
            let w = &wbufs[j];
            let m = block.len();
            // last coefficient of every block is pinned to 0
            for h in 0..m - 1 {
                theta.blocks[j][h] += r * w[h];
            }
            let theta_bar: f64 = block.iter().zip(w).map(|(t, wh)| t * wh).sum();
            match (alpha.feature_mut(j), ds.raw(i, j)) {
                (SoftFeatureParams::Continuous(g), RawValue::Continuous(x)) => {
                    for h in 0..m {
                        let c = r * w[h] * (block[h] - theta_bar);
                        g.alpha0[h] += c;
                        g.alpha1[h] += c * x;
                    }
                }
                (SoftFeatureParams::Categorical(g), RawValue::Categorical(code)) => {
                    for h in 0..m {
                        let c = r * w[h] * (block[h] - theta_bar);
                        g.set(h, code, g.get(h, code) + c);
                    }
                }
                _ => unreachable!("shapes were checked"),
            }
        }
    }
    let scale = 1.0 / batch.len() as f64;
    for arr in alpha.arrays_mut() {
        for v in arr.iter_mut() {
            *v *= scale;
        }
    }
    theta.theta0 *= scale;
    for block in &mut theta.blocks {
        for v in block.iter_mut() {
            *v *= scale;
        }
    }
    Ok(RelaxedGradients { alpha, theta })
}

/// Per-coordinate second-moment accumulators, one vector per parameter array.
#[derive(Debug, Clone)]
pub struct RmsPropState {
    v: Vec<Vec<f64>>,
}

impl RmsPropState {
    pub fn new(shapes: &[usize]) -> Self {
        Self { v: shapes.iter().map(|&len| vec![0.0; len]).collect() }
    }
}

/// One RMSProp ascent step: v <- decay v + (1-decay) g^2, then
/// p <- p + lr g / sqrt(v + eps).
pub fn rmsprop_step(
    state: &mut RmsPropState,
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    lr: f64,
    decay: f64,
    epsilon: f64,
) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.v.len());
    for (k, (p_arr, g_arr)) in params.iter_mut().zip(grads).enumerate() {
        let v = &mut state.v[k];
        assert_eq!(p_arr.len(), g_arr.len());
        assert_eq!(p_arr.len(), v.len());
        for idx in 0..p_arr.len() {
            let g = g_arr[idx];
            v[idx] = decay * v[idx] + (1.0 - decay) * g * g;
            p_arr[idx] += lr * g / (v[idx] + epsilon).sqrt();
        }
    }
}

fn param_slices<'a>(
    sq: &'a mut SoftQuantization,
    theta: &'a mut LogisticParams,
) -> Vec<&'a mut [f64]> {
    let mut out: Vec<&mut [f64]> =
        sq.arrays_mut().into_iter().map(|v| v.as_mut_slice()).collect();
    out.push(std::slice::from_mut(&mut theta.theta0));
    for block in &mut theta.blocks {
        out.push(block.as_mut_slice());
    }
    out
}

fn grad_slices(g: &RelaxedGradients) -> Vec<&[f64]> {
    let mut out = g.alpha.arrays();
    out.push(std::slice::from_ref(&g.theta.theta0));
    for block in &g.theta.blocks {
        out.push(block.as_slice());
    }
    out
}

/// Index into `history` of the best epoch: minimum criterion value, ties
/// resolved toward the earlier epoch.
fn select_best(history: &[EpochRecord]) -> usize {
    let mut best = 0;
    for (k, rec) in history.iter().enumerate().skip(1) {
        if rec.fit.bic < history[best].fit.bic {
            best = k;
        }
    }
    best
}

/// Runs the full loop on a training set. Deterministic given the seed.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<GlmdiscModel> {
    cfg.validate()?;
    if ds.n() < 2 {
        return Err(Error::ShapeMismatch("training needs at least two rows".into()));
    }
    if !ds.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let m_start = cfg.m_max.resolve(ds.d())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sq = init_soft(ds, &m_start, &mut rng);
    let mut theta = LogisticParams::zeros(&m_start);
    let shapes: Vec<usize> = grad_slices(&RelaxedGradients {
        alpha: sq.zeros_like(),
        theta: LogisticParams::zeros(&m_start),
    })
    .iter()
    .map(|s| s.len())
    .collect();
    let mut state = RmsPropState::new(&shapes);
    let mut indices: Vec<usize> = (0..ds.n()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        indices.shuffle(&mut rng);
        for batch in indices.chunks(cfg.batch_size) {
            let grads = relaxed_gradients(&sq, &theta, ds, batch)?;
            let g = grad_slices(&grads);
            let mut p = param_slices(&mut sq, &mut theta);
            rmsprop_step(&mut state, &mut p, &g, cfg.learning_rate, cfg.rms_decay, cfg.rms_epsilon);
        }
        let hard_q = extract_hard(&sq, ds)?;
        let design = hard_q.quantize(ds)?.to_design_matrix();
        let fit = glm::fit_mle(&design, ds.target(), DEFAULT_RIDGE)?;
        let relaxed = relaxed_loglik(&sq, &theta, ds)?;
        history.push(EpochRecord { epoch, hard_q, fit, relaxed_loglik: relaxed });
    }
    let best = select_best(&history);
    let chosen = &history[best];
    Ok(GlmdiscModel {
        schema: ds.schema().clone(),
        best_epoch: chosen.epoch,
        quantization: chosen.hard_q.clone(),
        params: chosen.fit.params.clone(),
        bic: chosen.fit.bic,
        history,
    })
}

/// One trace record per epoch, enough to redraw how the quantization evolved.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub epoch: usize,
    pub bic: f64,
    pub quantization: Quantization,
}

pub fn emit_trace(model: &GlmdiscModel) -> Vec<TraceRecord> {
    model
        .history
        .iter()
        .map(|rec| TraceRecord {
            epoch: rec.epoch,
            bic: rec.fit.bic,
            quantization: rec.hard_q.clone(),
        })
        .collect()
}
