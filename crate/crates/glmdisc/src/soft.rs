//! Softmax relaxation of hard quantizers.
//!
//! Every feature gets one softmax weight per candidate level: affine scores
//! `alpha0[h] + alpha1[h] * x` for continuous features, one score per observed
//! level for categorical ones. Hardening keeps the argmax level of each point;
//! for continuous features the argmax regions of affine scores are intervals,
//! so the hard quantizer falls out as cutpoints at data midpoints.

use rand::Rng;

use crate::data::{Dataset, FeatureKind, RawValue};
use crate::error::{Error, Result};
use crate::quantization::{
    CategoricalQuantizer, ContinuousQuantizer, FeatureQuantizer, Quantization,
};

/// Scores `alpha0[h] + alpha1[h] * x` over m candidate levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftContinuousParams {
    pub alpha0: Vec<f64>,
    pub alpha1: Vec<f64>,
}

impl SoftContinuousParams {
    pub fn zeros(m: usize) -> Self {
        Self { alpha0: vec![0.0; m], alpha1: vec![0.0; m] }
    }

    pub fn m(&self) -> usize {
        debug_assert_eq!(self.alpha0.len(), self.alpha1.len());
        self.alpha0.len()
    }
}

/// One score per (candidate level h, observed level v) pair, row-major m x l.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftCategoricalParams {
    m: usize,
    l: usize,
    alpha: Vec<f64>,
}

impl SoftCategoricalParams {
    pub fn zeros(m: usize, l: usize) -> Self {
        assert!(m > 0 && l > 0);
        Self { m, l, alpha: vec![0.0; m * l] }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn get(&self, h: usize, v: usize) -> f64 {
        self.alpha[h * self.l + v]
    }

    pub fn set(&mut self, h: usize, v: usize, value: f64) {
        self.alpha[h * self.l + v] = value;
    }

    pub(crate) fn alpha_mut(&mut self) -> &mut Vec<f64> {
        &mut self.alpha
    }

    pub(crate) fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SoftFeatureParams {
    Continuous(SoftContinuousParams),
    Categorical(SoftCategoricalParams),
}

impl SoftFeatureParams {
    pub fn m(&self) -> usize {
        match self {
            SoftFeatureParams::Continuous(p) => p.m(),
            SoftFeatureParams::Categorical(p) => p.m(),
        }
    }

    /// Flat parameter count: 2m for continuous, m*l for categorical.
    pub fn n_params(&self) -> usize {
        match self {
            SoftFeatureParams::Continuous(p) => 2 * p.m(),
            SoftFeatureParams::Categorical(p) => p.m() * p.l(),
        }
    }
}

/// Relaxation parameters for every feature of a schema.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftQuantization {
    per_feature: Vec<SoftFeatureParams>,
}

impl SoftQuantization {
    pub fn new(per_feature: Vec<SoftFeatureParams>) -> Self {
        Self { per_feature }
    }

    pub fn d(&self) -> usize {
        self.per_feature.len()
    }

    pub fn feature(&self, j: usize) -> &SoftFeatureParams {
        &self.per_feature[j]
    }

    pub fn feature_mut(&mut self, j: usize) -> &mut SoftFeatureParams {
        &mut self.per_feature[j]
    }

    pub fn per_feature(&self) -> &[SoftFeatureParams] {
        &self.per_feature
    }

    pub fn level_counts(&self) -> Vec<usize> {
        self.per_feature.iter().map(|p| p.m()).collect()
    }

    /// Same shape with every parameter zeroed; the container gradients and
    /// optimizer state live in.
    pub fn zeros_like(&self) -> Self {
        let per_feature = self
            .per_feature
            .iter()
            .map(|p| match p {
                SoftFeatureParams::Continuous(c) => {
                    SoftFeatureParams::Continuous(SoftContinuousParams::zeros(c.m()))
                }
                SoftFeatureParams::Categorical(c) => {
                    SoftFeatureParams::Categorical(SoftCategoricalParams::zeros(c.m(), c.l()))
                }
            })
            .collect();
        Self { per_feature }
    }

    /// The underlying parameter arrays of every feature, in a fixed order.
    pub(crate) fn arrays_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = Vec::new();
        for p in &mut self.per_feature {
            match p {
                SoftFeatureParams::Continuous(c) => {
                    out.push(&mut c.alpha0);
                    out.push(&mut c.alpha1);
                }
                SoftFeatureParams::Categorical(c) => out.push(c.alpha_mut()),
            }
        }
        out
    }

    pub(crate) fn arrays(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for p in &self.per_feature {
            match p {
                SoftFeatureParams::Continuous(c) => {
                    out.push(&c.alpha0);
                    out.push(&c.alpha1);
                }
                SoftFeatureParams::Categorical(c) => out.push(c.alpha()),
            }
        }
        out
    }
}

/// Soft partition of one continuous feature's observed range into m
/// contiguous cells: level g scores -k/2 (x - c_g)^2 up to a shared term —
/// affine in x — with jittered equally spaced centers c_g, and k set so a
/// point sitting on a neighbouring center sees a log-weight gap of ln 2.
fn soft_partition(m: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> SoftContinuousParams {
    let mut p = SoftContinuousParams::zeros(m);
    let range = hi - lo;
    if m == 1 || !range.is_finite() || range <= 0.0 {
        // no usable spread: tiny random offsets so no two levels are tied
        for a in p.alpha0.iter_mut() {
            *a = rng.random_range(-0.01..0.01);
        }
        return p;
    }
    let delta = range / m as f64;
    let k = 2.0 * std::f64::consts::LN_2 / (delta * delta);
    for g in 0..m {
        let jitter = rng.random_range(-0.3..0.3);
        let c = lo + delta * (g as f64 + 0.5 + jitter);
        p.alpha0[g] = -0.5 * k * c * c;
        p.alpha1[g] = k * c;
    }
    p
}

/// Fresh relaxation: every continuous feature starts as a soft partition of
/// its observed range into m contiguous cells, every categorical feature as a
/// soft random grouping of its raw levels.
///
/// What matters here is that each level begins owning some region of its
/// feature. The score gradient of level g is proportional to
/// w_g (theta_g - theta_bar): a level whose weight is near-uniform everywhere
/// competes for no region in particular, the coefficients of its rivals learn
/// the same signal, and the loser's weight collapses — after which its
/// gradient is pinned near zero and the level is lost for good. Starting from
/// a partition instead gives every level a home segment whose local event
/// rate its coefficient can learn from the first batches.
pub fn init_soft(ds: &Dataset, m_start: &[usize], rng: &mut impl Rng) -> SoftQuantization {
    let schema = ds.schema();
    assert_eq!(schema.d(), m_start.len());
    let per_feature = (0..schema.d())
        .map(|j| {
            let m = m_start[j].max(1);
            match schema.kind(j) {
                FeatureKind::Continuous => {
                    let col = ds.continuous_column(j);
                    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    SoftFeatureParams::Continuous(soft_partition(m, lo, hi, rng))
                }
                FeatureKind::Categorical => {
                    let l = schema.n_levels(j);
                    // each raw level prefers one random group with half of its
                    // weight; the rest is spread over the other groups
                    let tau = (m as f64).ln().max(std::f64::consts::LN_2);
                    let mut p = SoftCategoricalParams::zeros(m, l);
                    for v in 0..l {
                        let g = rng.random_range(0..m);
                        p.set(g, v, tau);
                    }
                    SoftFeatureParams::Categorical(p)
                }
            }
        })
        .collect();
    SoftQuantization::new(per_feature)
}

fn scores_into(sp: &SoftFeatureParams, x: RawValue, out: &mut Vec<f64>) {
    out.clear();
    match (sp, x) {
        (SoftFeatureParams::Continuous(p), RawValue::Continuous(v)) => {
            out.extend(p.alpha0.iter().zip(&p.alpha1).map(|(a0, a1)| a0 + a1 * v));
        }
        (SoftFeatureParams::Categorical(p), RawValue::Categorical(code)) => {
            assert!(code < p.l(), "level code {code} out of range for l={}", p.l());
            out.extend((0..p.m()).map(|h| p.get(h, code)));
        }
        _ => panic!("feature kind does not match the raw value"),
    }
}

fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s /= sum;
    }
}

/// Softmax level weights of one observation. Always sums to 1.
pub fn soft_forward(sp: &SoftFeatureParams, x: RawValue) -> Vec<f64> {
    let mut w = Vec::with_capacity(sp.m());
    soft_forward_into(sp, x, &mut w);
    w
}

pub(crate) fn soft_forward_into(sp: &SoftFeatureParams, x: RawValue, out: &mut Vec<f64>) {
    scores_into(sp, x, out);
    softmax_in_place(out);
}

/// Jacobian of the softmax weights with respect to every parameter of the
/// feature: rows are weights (m of them), columns follow the flat parameter
/// layout (`alpha0` then `alpha1` for continuous, row-major `alpha[h][v]` for
/// categorical). Rows and columns each sum to zero because the weights sum to
/// a constant.
pub fn soft_jacobian(sp: &SoftFeatureParams, x: RawValue) -> Vec<Vec<f64>> {
    let w = soft_forward(sp, x);
    let m = sp.m();
    let mut jac = vec![vec![0.0; sp.n_params()]; m];
    match (sp, x) {
        (SoftFeatureParams::Continuous(_), RawValue::Continuous(v)) => {
            for h in 0..m {
                for g in 0..m {
                    let dwds = w[h] * (f64::from(u8::from(h == g)) - w[g]);
                    jac[h][g] = dwds;
                    jac[h][m + g] = v * dwds;
                }
            }
        }
        (SoftFeatureParams::Categorical(p), RawValue::Categorical(code)) => {
            let l = p.l();
            for h in 0..m {
                for g in 0..m {
                    let dwds = w[h] * (f64::from(u8::from(h == g)) - w[g]);
                    jac[h][g * l + code] = dwds;
                }
            }
        }
        _ => panic!("feature kind does not match the raw value"),
    }
    jac
}

/// Argmax level of one observation. Exact score ties resolve to the level
/// whose score dominates immediately to the left of `x` (the smaller slope)
/// for continuous features, and to the lowest level index for categorical
/// ones.
pub fn map_assign(sp: &SoftFeatureParams, x: RawValue) -> usize {
    match (sp, x) {
        (SoftFeatureParams::Continuous(p), RawValue::Continuous(v)) => {
            let mut best = 0;
            let mut best_score = p.alpha0[0] + p.alpha1[0] * v;
            for h in 1..p.m() {
                let s = p.alpha0[h] + p.alpha1[h] * v;
                if s > best_score || (s == best_score && p.alpha1[h] < p.alpha1[best]) {
                    best = h;
                    best_score = s;
                }
            }
            best
        }
        (SoftFeatureParams::Categorical(p), RawValue::Categorical(code)) => {
            assert!(code < p.l(), "level code {code} out of range for l={}", p.l());
            let mut best = 0;
            let mut best_score = p.get(0, code);
            for h in 1..p.m() {
                let s = p.get(h, code);
                if s > best_score {
                    best = h;
                    best_score = s;
                }
            }
            best
        }
        _ => panic!("feature kind does not match the raw value"),
    }
}

/// Hardens the relaxation on a training set: continuous features get cutpoints
/// at midpoints between consecutive observed values whose argmax level
/// changes (relabeled left to right), categorical features group levels by
/// their argmax image. Groups that receive no training rows are folded away.
pub fn extract_hard(sq: &SoftQuantization, ds: &Dataset) -> Result<Quantization> {
    if sq.d() != ds.d() {
        return Err(Error::ShapeMismatch(format!(
            "relaxation over {} features, dataset has {}",
            sq.d(),
            ds.d()
        )));
    }
    let mut per_feature = Vec::with_capacity(sq.d());
    for j in 0..sq.d() {
        let fq = match (sq.feature(j), ds.schema().kind(j)) {
            (sp @ SoftFeatureParams::Continuous(_), FeatureKind::Continuous) => {
                let mut values = ds.continuous_column(j).to_vec();
                values.sort_by(|a, b| a.partial_cmp(b).expect("dataset values are finite"));
                values.dedup();
                let mut cuts: Vec<f64> = Vec::new();
                let mut prev: Option<(f64, usize)> = None;
                for &x in &values {
                    let level = map_assign(sp, RawValue::Continuous(x));
                    if let Some((px, pl)) = prev {
                        if level != pl {
                            let mut cut = (px + x) / 2.0;
                            // guard the degenerate case of adjacent floats: the
                            // boundary itself belongs to the lower interval
                            if cut >= x {
                                cut = px;
                            }
                            if cuts.last().is_none_or(|&c| c < cut) {
                                cuts.push(cut);
                            }
                        }
                    }
                    prev = Some((x, level));
                }
                FeatureQuantizer::Continuous(ContinuousQuantizer::new(cuts)?)
            }
            (sp @ SoftFeatureParams::Categorical(p), FeatureKind::Categorical) => {
                let l = p.l();
                if l != ds.schema().n_levels(j) {
                    return Err(Error::ShapeMismatch(format!(
                        "feature {:?}: relaxation over {} levels, schema has {}",
                        ds.schema().feature_name(j),
                        l,
                        ds.schema().n_levels(j)
                    )));
                }
                let mut group_index: Vec<Option<usize>> = vec![None; p.m()];
                let mut next = 0;
                let group_of = (0..l)
                    .map(|v| {
                        let image = map_assign(sp, RawValue::Categorical(v));
                        *group_index[image].get_or_insert_with(|| {
                            let g = next;
                            next += 1;
                            g
                        })
                    })
                    .collect();
                FeatureQuantizer::Categorical(CategoricalQuantizer::new(group_of)?)
            }
            _ => {
                return Err(Error::ShapeMismatch(format!(
                    "feature {:?}: relaxation kind disagrees with schema",
                    ds.schema().feature_name(j)
                )));
            }
        };
        per_feature.push(fq);
    }
    Quantization::new(per_feature).compact(ds)
}
