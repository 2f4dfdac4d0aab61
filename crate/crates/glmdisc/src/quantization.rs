//! Hard quantizers: interval cutpoints for continuous features and level
//! groupings for categorical ones, plus the one-hot design they induce.

use crate::data::{Dataset, FeatureKind, Schema};
use crate::error::{Error, Result};
use crate::glm::{DesignBlock, DesignMatrix};

/// Right-closed intervals `(c[h-1], c[h]]` over strictly increasing cutpoints;
/// `m = cutpoints.len() + 1` levels, with the first interval open at -inf and
/// the last at +inf.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousQuantizer {
    cutpoints: Vec<f64>,
}

impl ContinuousQuantizer {
    pub fn new(cutpoints: Vec<f64>) -> Result<Self> {
        for w in cutpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidQuantizer(format!(
                    "cutpoints not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if cutpoints.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidQuantizer("non-finite cutpoint".into()));
        }
        Ok(Self { cutpoints })
    }

    pub fn cutpoints(&self) -> &[f64] {
        &self.cutpoints
    }

    pub fn num_levels(&self) -> usize {
        self.cutpoints.len() + 1
    }

    /// Level index of `x`: the count of cutpoints strictly below it, so a
    /// value sitting exactly on a cutpoint maps to the lower interval.
    pub fn apply(&self, x: f64) -> usize {
        debug_assert!(!x.is_nan());
        self.cutpoints.partition_point(|c| *c < x)
    }
}

/// Surjective map from level codes `0..l` onto group indices `0..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalQuantizer {
    group_of: Vec<usize>,
    num_groups: usize,
}

impl CategoricalQuantizer {
    pub fn new(group_of: Vec<usize>) -> Result<Self> {
        if group_of.is_empty() {
            return Err(Error::InvalidQuantizer("grouping over zero levels".into()));
        }
        let num_groups = group_of.iter().max().copied().unwrap_or(0) + 1;
        let mut seen = vec![false; num_groups];
        for &g in &group_of {
            seen[g] = true;
        }
        if let Some(g) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidQuantizer(format!(
                "group {g} of {num_groups} has no levels"
            )));
        }
        Ok(Self { group_of, num_groups })
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    pub fn num_levels(&self) -> usize {
        self.group_of.len()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn apply(&self, code: usize) -> Result<usize> {
        self.group_of
            .get(code)
            .copied()
            .ok_or(Error::LevelOutOfRange { code, len: self.group_of.len() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureQuantizer {
    Continuous(ContinuousQuantizer),
    Categorical(CategoricalQuantizer),
}

impl FeatureQuantizer {
    pub fn num_levels(&self) -> usize {
        match self {
            FeatureQuantizer::Continuous(q) => q.num_levels(),
            FeatureQuantizer::Categorical(q) => q.num_groups(),
        }
    }
}

/// One quantizer per feature, aligned with a dataset's schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantization {
    per_feature: Vec<FeatureQuantizer>,
}

impl Quantization {
    pub fn new(per_feature: Vec<FeatureQuantizer>) -> Self {
        Self { per_feature }
    }

    pub fn d(&self) -> usize {
        self.per_feature.len()
    }

    pub fn feature(&self, j: usize) -> &FeatureQuantizer {
        &self.per_feature[j]
    }

    pub fn per_feature(&self) -> &[FeatureQuantizer] {
        &self.per_feature
    }

    /// Total number of quantized levels, summed over features.
    pub fn order(&self) -> usize {
        self.per_feature.iter().map(|q| q.num_levels()).sum()
    }

    /// Level counts per feature.
    pub fn level_counts(&self) -> Vec<usize> {
        self.per_feature.iter().map(|q| q.num_levels()).collect()
    }

    fn check_schema(&self, schema: &Schema) -> Result<()> {
        if self.d() != schema.d() {
            return Err(Error::ShapeMismatch(format!(
                "quantization over {} features, schema has {}",
                self.d(),
                schema.d()
            )));
        }
        for j in 0..self.d() {
            match (&self.per_feature[j], schema.kind(j)) {
                (FeatureQuantizer::Continuous(_), FeatureKind::Continuous) => {}
                (FeatureQuantizer::Categorical(q), FeatureKind::Categorical) => {
                    if q.num_levels() != schema.n_levels(j) {
                        return Err(Error::ShapeMismatch(format!(
                            "feature {:?}: grouping over {} levels, schema has {}",
                            schema.feature_name(j),
                            q.num_levels(),
                            schema.n_levels(j)
                        )));
                    }
                }
                _ => {
                    return Err(Error::ShapeMismatch(format!(
                        "feature {:?}: quantizer kind disagrees with schema",
                        schema.feature_name(j)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Maps every row of `ds` to its per-feature level indices.
    pub fn quantize(&self, ds: &Dataset) -> Result<QuantizedDesign> {
        self.check_schema(ds.schema())?;
        let n = ds.n();
        let mut levels = Vec::with_capacity(self.d());
        for (j, fq) in self.per_feature.iter().enumerate() {
            let col = match fq {
                FeatureQuantizer::Continuous(q) => {
                    ds.continuous_column(j).iter().map(|&x| q.apply(x)).collect::<Vec<_>>()
                }
                FeatureQuantizer::Categorical(q) => {
                    let mut col = Vec::with_capacity(n);
                    for &code in ds.categorical_column(j) {
                        col.push(q.apply(code)?);
                    }
                    col
                }
            };
            levels.push(col);
        }
        Ok(QuantizedDesign { n_rows: n, block_sizes: self.level_counts(), levels })
    }

    /// Drops levels with zero occupancy on `ds`: an empty interval merges into
    /// its left neighbor (right neighbor when it is the first interval), and an
    /// empty categorical group is removed with its unobserved levels reassigned
    /// to the lowest surviving group. Observed rows never change level, only
    /// their indices are renumbered. A dataset with no rows leaves the
    /// quantization unchanged.
    pub fn compact(&self, ds: &Dataset) -> Result<Quantization> {
        self.check_schema(ds.schema())?;
        if ds.n() == 0 {
            return Ok(self.clone());
        }
        let mut per_feature = Vec::with_capacity(self.d());
        for (j, fq) in self.per_feature.iter().enumerate() {
            per_feature.push(match fq {
                FeatureQuantizer::Continuous(q) => {
                    let mut occupancy = vec![0usize; q.num_levels()];
                    for &x in ds.continuous_column(j) {
                        occupancy[q.apply(x)] += 1;
                    }
                    let kept: Vec<usize> =
                        (0..q.num_levels()).filter(|&h| occupancy[h] > 0).collect();
                    // Keep the left edge of every occupied interval except the
                    // first: empty runs merge leftward, a leading empty run
                    // merges rightward.
                    let cutpoints =
                        kept[1..].iter().map(|&h| q.cutpoints()[h - 1]).collect::<Vec<_>>();
                    FeatureQuantizer::Continuous(ContinuousQuantizer::new(cutpoints)?)
                }
                FeatureQuantizer::Categorical(q) => {
                    let mut occupancy = vec![0usize; q.num_groups()];
                    for &code in ds.categorical_column(j) {
                        occupancy[q.apply(code)?] += 1;
                    }
                    let mut new_index = vec![usize::MAX; q.num_groups()];
                    let mut next = 0;
                    for g in 0..q.num_groups() {
                        if occupancy[g] > 0 {
                            new_index[g] = next;
                            next += 1;
                        }
                    }
                    let group_of = q
                        .group_of()
                        .iter()
                        .map(|&g| if new_index[g] == usize::MAX { 0 } else { new_index[g] })
                        .collect();
                    FeatureQuantizer::Categorical(CategoricalQuantizer::new(group_of)?)
                }
            });
        }
        Ok(Quantization { per_feature })
    }
}

/// Per-row level assignments under a quantization. Each feature block is
/// one-hot by construction; [`QuantizedDesign::one_hot_row`] materializes the
/// dummy encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedDesign {
    n_rows: usize,
    block_sizes: Vec<usize>,
    /// levels[feature][row]
    levels: Vec<Vec<usize>>,
}

impl QuantizedDesign {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn n_cols(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn level(&self, feature: usize, row: usize) -> usize {
        self.levels[feature][row]
    }

    pub fn one_hot_row(&self, row: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols()];
        let mut offset = 0;
        for (j, &m) in self.block_sizes.iter().enumerate() {
            out[offset + self.levels[j][row]] = 1.0;
            offset += m;
        }
        out
    }

    /// Dense design with one pinned one-hot block per feature.
    pub fn to_design_matrix(&self) -> DesignMatrix {
        let blocks: Vec<DesignBlock> = self
            .block_sizes
            .iter()
            .map(|&m| DesignBlock { size: m, pinned_last: true })
            .collect();
        let mut dm = DesignMatrix::zeros(blocks, self.n_rows);
        for i in 0..self.n_rows {
            let mut offset = 0;
            for (j, &m) in self.block_sizes.iter().enumerate() {
                dm.set(i, offset + self.levels[j][i], 1.0);
                offset += m;
            }
        }
        dm
    }
}
