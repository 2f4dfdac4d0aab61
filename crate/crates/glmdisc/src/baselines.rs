//! Comparison methods: additive linear logistic regression on raw features,
//! and the classical two-step pipeline of univariate supervised quantization
//! (entropy/MDL splitting for continuous features, pairwise chi-squared level
//! merging for categorical ones) followed by a logistic refit.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::glm::{self, DesignBlock, DesignMatrix, FitResult, DEFAULT_RIDGE};
use crate::quantization::{
    CategoricalQuantizer, ContinuousQuantizer, FeatureQuantizer, Quantization,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MdlpConfig {
    /// Smallest admissible side of any split.
    pub min_bin_count: usize,
}

impl Default for MdlpConfig {
    fn default() -> Self {
        Self { min_bin_count: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiMergeConfig {
    /// Significance level of the chi-squared independence test that stops
    /// merging.
    pub significance: f64,
}

impl Default for ChiMergeConfig {
    fn default() -> Self {
        Self { significance: 0.05 }
    }
}

/// Design over raw features: one unpinned column per continuous feature, one
/// pinned one-hot block per categorical feature.
pub fn allr_design(ds: &Dataset) -> DesignMatrix {
    let blocks: Vec<DesignBlock> = (0..ds.d())
        .map(|j| match ds.schema().kind(j) {
            FeatureKind::Continuous => DesignBlock { size: 1, pinned_last: false },
            FeatureKind::Categorical => {
                DesignBlock { size: ds.schema().n_levels(j), pinned_last: true }
            }
        })
        .collect();
    let mut design = DesignMatrix::zeros(blocks, ds.n());
    let mut offset = 0;
    for j in 0..ds.d() {
        match ds.schema().kind(j) {
            FeatureKind::Continuous => {
                for (i, &x) in ds.continuous_column(j).iter().enumerate() {
                    design.set(i, offset, x);
                }
                offset += 1;
            }
            FeatureKind::Categorical => {
                for (i, &code) in ds.categorical_column(j).iter().enumerate() {
                    design.set(i, offset + code, 1.0);
                }
                offset += ds.schema().n_levels(j);
            }
        }
    }
    design
}

/// Additive linear logistic regression on non-quantized features.
pub fn fit_allr(ds: &Dataset) -> Result<FitResult> {
    if !ds.has_both_classes() {
        return Err(Error::SingleClass);
    }
    glm::fit_mle(&allr_design(ds), ds.target(), DEFAULT_RIDGE)
}

/// Base-2 entropy of a (zeros, ones) split.
fn entropy(zeros: usize, ones: usize) -> f64 {
    let n = (zeros + ones) as f64;
    let mut e = 0.0;
    for &c in &[zeros, ones] {
        if c > 0 {
            let p = c as f64 / n;
            e -= p * p.log2();
        }
    }
    e
}

fn class_count(zeros: usize, ones: usize) -> usize {
    usize::from(zeros > 0) + usize::from(ones > 0)
}

/// Recursive entropy splitting with the Fayyad-Irani MDL acceptance rule.
/// Candidate cuts sit only at boundary points: between adjacent runs of equal
/// values whose union carries both classes.
pub fn mdlp_discretize(x: &[f64], y: &[u8], cfg: &MdlpConfig) -> Result<ContinuousQuantizer> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch("feature and target lengths differ".into()));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("feature value {v}")));
    }
    if cfg.min_bin_count == 0 {
        return Err(Error::InvalidConfig("min_bin_count must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("values are finite"));
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let ys: Vec<u8> = order.iter().map(|&i| y[i]).collect();
    // ones[i] = count of positives among the first i sorted points
    let mut ones = vec![0usize; xs.len() + 1];
    for i in 0..xs.len() {
        ones[i + 1] = ones[i] + usize::from(ys[i] == 1);
    }
    let mut cuts = Vec::new();
    split_segment(&xs, &ones, 0, xs.len(), cfg.min_bin_count, &mut cuts);
    ContinuousQuantizer::new(cuts)
}

/// In-order recursion over [lo, hi), pushing accepted cutpoints sorted.
fn split_segment(
    xs: &[f64],
    ones: &[usize],
    lo: usize,
    hi: usize,
    min_bin: usize,
    cuts: &mut Vec<f64>,
) {
    let n = hi - lo;
    if n < 2 * min_bin {
        return;
    }
    let seg_ones = ones[hi] - ones[lo];
    let seg_zeros = n - seg_ones;
    if seg_ones == 0 || seg_zeros == 0 {
        return;
    }
    let ent_s = entropy(seg_zeros, seg_ones);
    let mut best: Option<(f64, usize)> = None;
    let mut i = lo + 1;
    while i < hi {
        if xs[i - 1] == xs[i] {
            i += 1;
            continue;
        }
        // runs of equal values adjacent to this gap
        let run_lo = (lo..i).rev().take_while(|&k| xs[k] == xs[i - 1]).last().unwrap_or(i - 1);
        let mut run_hi = i;
        while run_hi < hi && xs[run_hi] == xs[i] {
            run_hi += 1;
        }
        let union_ones = ones[run_hi] - ones[run_lo];
        let union_zeros = (run_hi - run_lo) - union_ones;
        let is_boundary = union_ones > 0 && union_zeros > 0;
        let n1 = i - lo;
        let n2 = hi - i;
        if is_boundary && n1 >= min_bin && n2 >= min_bin {
            let left_ones = ones[i] - ones[lo];
            let left_zeros = n1 - left_ones;
            let right_ones = ones[hi] - ones[i];
            let right_zeros = n2 - right_ones;
            let gain = ent_s
                - (n1 as f64 / n as f64) * entropy(left_zeros, left_ones)
                - (n2 as f64 / n as f64) * entropy(right_zeros, right_ones);
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, i));
            }
        }
        i += 1;
    }
    let Some((gain, at)) = best else { return };
    let n1 = at - lo;
    let left_ones = ones[at] - ones[lo];
    let left_zeros = n1 - left_ones;
    let right_ones = ones[hi] - ones[at];
    let right_zeros = (hi - at) - right_ones;
    let k = class_count(seg_zeros, seg_ones) as f64;
    let k1 = class_count(left_zeros, left_ones) as f64;
    let k2 = class_count(right_zeros, right_ones) as f64;
    let ent1 = entropy(left_zeros, left_ones);
    let ent2 = entropy(right_zeros, right_ones);
    let delta = (3f64.powf(k) - 2.0).log2() - (k * ent_s - k1 * ent1 - k2 * ent2);
    let nf = n as f64;
    let threshold = (nf - 1.0).log2() / nf + delta / nf;
    if gain <= threshold {
        return;
    }
    let cut = (xs[at - 1] + xs[at]) / 2.0;
    split_segment(xs, ones, lo, at, min_bin, cuts);
    if cuts.last().is_none_or(|&c| c < cut) {
        cuts.push(cut);
    }
    split_segment(xs, ones, at, hi, min_bin, cuts);
}

/// Chi-squared statistic of a 2x2 group-by-target table with a 0.5 continuity
/// floor on empty cells; expectations come from the floored margins.
fn pair_chi2(a: (usize, usize), b: (usize, usize)) -> f64 {
    let o = [
        [a.0 as f64, a.1 as f64],
        [b.0 as f64, b.1 as f64],
    ]
    .map(|row| row.map(|v| if v == 0.0 { 0.5 } else { v }));
    let row_tot = [o[0][0] + o[0][1], o[1][0] + o[1][1]];
    let col_tot = [o[0][0] + o[1][0], o[0][1] + o[1][1]];
    let total = row_tot[0] + row_tot[1];
    let mut chi2 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let e = row_tot[r] * col_tot[c] / total;
            let d = o[r][c] - e;
            chi2 += d * d / e;
        }
    }
    chi2
}

/// Bottom-up merging of categorical levels: repeatedly fuse the pair of
/// groups with the smallest pairwise chi-squared statistic against the target
/// while that statistic stays below the critical value. Ties go to the
/// lowest-index pair; the fused group keeps the earlier position.
pub fn chimerge_group(
    codes: &[usize],
    n_levels: usize,
    y: &[u8],
    cfg: &ChiMergeConfig,
) -> Result<CategoricalQuantizer> {
    if codes.len() != y.len() {
        return Err(Error::ShapeMismatch("feature and target lengths differ".into()));
    }
    if n_levels == 0 {
        return Err(Error::InvalidConfig("a categorical feature needs at least one level".into()));
    }
    if !(cfg.significance > 0.0 && cfg.significance < 1.0) {
        return Err(Error::InvalidConfig("significance must lie in (0, 1)".into()));
    }
    if let Some(&code) = codes.iter().find(|&&code| code >= n_levels) {
        return Err(Error::LevelOutOfRange { code, len: n_levels });
    }
    let critical = ChiSquared::new(1.0)
        .expect("one degree of freedom")
        .inverse_cdf(1.0 - cfg.significance);
    // per current group: member levels and (zeros, ones) target counts
    let mut members: Vec<Vec<usize>> = (0..n_levels).map(|v| vec![v]).collect();
    let mut counts: Vec<(usize, usize)> = vec![(0, 0); n_levels];
    for (&code, &yi) in codes.iter().zip(y) {
        if yi == 1 {
            counts[code].1 += 1;
        } else {
            counts[code].0 += 1;
        }
    }
    while members.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                let chi2 = pair_chi2(counts[a], counts[b]);
                if best.is_none_or(|(c, _, _)| chi2 < c) {
                    best = Some((chi2, a, b));
                }
            }
        }
        let (chi2, a, b) = best.expect("at least one pair");
        if chi2 >= critical {
            break;
        }
        let moved = members.remove(b);
        members[a].extend(moved);
        let (zb, ob) = counts.remove(b);
        counts[a].0 += zb;
        counts[a].1 += ob;
    }
    let mut group_of = vec![0usize; n_levels];
    for (g, levels) in members.iter().enumerate() {
        for &v in levels {
            group_of[v] = g;
        }
    }
    CategoricalQuantizer::new(group_of)
}

/// Univariate quantization of every feature followed by a logistic refit on
/// the quantized design. Groups or intervals left empty by the data are
/// folded away before fitting.
pub fn fit_mdlp_chi2_pipeline(
    ds: &Dataset,
    mdlp: &MdlpConfig,
    chimerge: &ChiMergeConfig,
) -> Result<(Quantization, FitResult)> {
    if !ds.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let per_feature = (0..ds.d())
        .map(|j| match ds.schema().kind(j) {
            FeatureKind::Continuous => mdlp_discretize(ds.continuous_column(j), ds.target(), mdlp)
                .map(FeatureQuantizer::Continuous),
            FeatureKind::Categorical => chimerge_group(
                ds.categorical_column(j),
                ds.schema().n_levels(j),
                ds.target(),
                chimerge,
            )
            .map(FeatureQuantizer::Categorical),
        })
        .collect::<Result<Vec<_>>>()?;
    let q = Quantization::new(per_feature).compact(ds)?;
    let design = q.quantize(ds)?.to_design_matrix();
    let fit = glm::fit_mle(&design, ds.target(), DEFAULT_RIDGE)?;
    Ok((q, fit))
}
