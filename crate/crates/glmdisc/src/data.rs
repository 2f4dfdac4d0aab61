//! Datasets, schemas, CSV ingestion, and train/test splitting.
//!
//! A schema config file names the binary target and assigns each feature a
//! kind. Categorical level labels are learned from the data in first-appearance
//! order at load time and stay fixed afterwards, so codes are stable across
//! splits of the same dataset and across save/load round trips.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

/// Column layout of a dataset: feature names and kinds in column order, the
/// target name, and the observed level labels of every categorical feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    feature_names: Vec<String>,
    kinds: Vec<FeatureKind>,
    target_name: String,
    /// Level labels per feature in first-appearance order; empty for
    /// continuous features.
    levels: Vec<Vec<String>>,
}

impl Schema {
    pub fn new(
        feature_names: Vec<String>,
        kinds: Vec<FeatureKind>,
        target_name: String,
        levels: Vec<Vec<String>>,
    ) -> Result<Self> {
        if feature_names.len() != kinds.len() || feature_names.len() != levels.len() {
            return Err(Error::ShapeMismatch(format!(
                "schema arrays disagree: {} names, {} kinds, {} level lists",
                feature_names.len(),
                kinds.len(),
                levels.len()
            )));
        }
        let mut seen = HashMap::new();
        for name in feature_names.iter().chain(std::iter::once(&target_name)) {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(Error::SchemaMismatch(format!("duplicate column name {name:?}")));
            }
        }
        for (j, kind) in kinds.iter().enumerate() {
            match kind {
                FeatureKind::Continuous if !levels[j].is_empty() => {
                    return Err(Error::SchemaMismatch(format!(
                        "continuous feature {:?} carries level labels",
                        feature_names[j]
                    )));
                }
                _ => {}
            }
        }
        Ok(Self { feature_names, kinds, target_name, levels })
    }

    pub fn d(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_name(&self, j: usize) -> &str {
        &self.feature_names[j]
    }

    pub fn kind(&self, j: usize) -> FeatureKind {
        self.kinds[j]
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// Observed level labels of feature `j`; empty for continuous features.
    pub fn levels(&self, j: usize) -> &[String] {
        &self.levels[j]
    }

    pub fn n_levels(&self, j: usize) -> usize {
        self.levels[j].len()
    }

    /// Same column names and kinds, ignoring learned levels.
    pub fn compatible_layout(&self, other: &Schema) -> bool {
        self.feature_names == other.feature_names
            && self.kinds == other.kinds
            && self.target_name == other.target_name
    }
}

/// Schema config file: `{"target": "y", "features": {"x1": "continuous", ...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub target: String,
    pub features: BTreeMap<String, FeatureKind>,
}

impl SchemaConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(fs::write(path, text)?)
    }
}

/// In-memory dataset: column-major feature storage plus a 0/1 target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    /// One column per continuous feature, in feature order.
    continuous: Vec<Vec<f64>>,
    /// One column of level codes per categorical feature, in feature order.
    categorical: Vec<Vec<usize>>,
    target: Vec<u8>,
    /// Per feature: index of its column within its kind's storage.
    slots: Vec<usize>,
}

/// A single cell, tagged by feature kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RawValue {
    Continuous(f64),
    Categorical(usize),
}

impl Dataset {
    pub fn new(
        schema: Schema,
        continuous: Vec<Vec<f64>>,
        categorical: Vec<Vec<usize>>,
        target: Vec<u8>,
    ) -> Result<Self> {
        let slots = storage_slots(&schema);
        let n_cont = schema.kinds().iter().filter(|k| **k == FeatureKind::Continuous).count();
        if continuous.len() != n_cont || categorical.len() != schema.d() - n_cont {
            return Err(Error::ShapeMismatch(format!(
                "expected {} continuous and {} categorical columns",
                n_cont,
                schema.d() - n_cont
            )));
        }
        let n = target.len();
        for col in &continuous {
            if col.len() != n {
                return Err(Error::ShapeMismatch("continuous column length != target length".into()));
            }
            if let Some(v) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("continuous value {v}")));
            }
        }
        for (c, col) in categorical.iter().enumerate() {
            if col.len() != n {
                return Err(Error::ShapeMismatch("categorical column length != target length".into()));
            }
            let j = schema
                .kinds()
                .iter()
                .enumerate()
                .filter(|(_, k)| **k == FeatureKind::Categorical)
                .map(|(j, _)| j)
                .nth(c)
                .expect("column count checked above");
            let l = schema.n_levels(j);
            if let Some(code) = col.iter().find(|code| **code >= l) {
                return Err(Error::LevelOutOfRange { code: *code, len: l });
            }
        }
        if let Some(y) = target.iter().find(|y| **y > 1) {
            return Err(Error::SchemaMismatch(format!("target value {y} outside {{0,1}}")));
        }
        Ok(Self { schema, continuous, categorical, target, slots })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n(&self) -> usize {
        self.target.len()
    }

    pub fn d(&self) -> usize {
        self.schema.d()
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    pub fn raw(&self, row: usize, j: usize) -> RawValue {
        match self.schema.kind(j) {
            FeatureKind::Continuous => RawValue::Continuous(self.continuous[self.slots[j]][row]),
            FeatureKind::Categorical => RawValue::Categorical(self.categorical[self.slots[j]][row]),
        }
    }

    /// Column of a continuous feature. Panics if `j` is categorical.
    pub fn continuous_column(&self, j: usize) -> &[f64] {
        assert_eq!(self.schema.kind(j), FeatureKind::Continuous);
        &self.continuous[self.slots[j]]
    }

    /// Column of level codes of a categorical feature. Panics if `j` is continuous.
    pub fn categorical_column(&self, j: usize) -> &[usize] {
        assert_eq!(self.schema.kind(j), FeatureKind::Categorical);
        &self.categorical[self.slots[j]]
    }

    pub fn has_both_classes(&self) -> bool {
        self.target.iter().any(|y| *y == 1) && self.target.iter().any(|y| *y == 0)
    }

    /// Rows at `indices`, sharing this dataset's schema (level codes stay aligned).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let continuous = self
            .continuous
            .iter()
            .map(|col| indices.iter().map(|&i| col[i]).collect())
            .collect();
        let categorical = self
            .categorical
            .iter()
            .map(|col| indices.iter().map(|&i| col[i]).collect())
            .collect();
        let target = indices.iter().map(|&i| self.target[i]).collect();
        Dataset {
            schema: self.schema.clone(),
            continuous,
            categorical,
            target,
            slots: self.slots.clone(),
        }
    }

    /// Writes the dataset as CSV: features in schema order, target last.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.schema.feature_names().iter().map(|s| s.as_str()).collect();
        header.push(self.schema.target_name());
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut rec = Vec::with_capacity(self.d() + 1);
            for j in 0..self.d() {
                match self.raw(i, j) {
                    RawValue::Continuous(v) => rec.push(format!("{v}")),
                    RawValue::Categorical(code) => rec.push(self.schema.levels(j)[code].clone()),
                }
            }
            rec.push(format!("{}", self.target[i]));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Schema config matching this dataset (kinds + target, no levels).
    pub fn schema_config(&self) -> SchemaConfig {
        let features = self
            .schema
            .feature_names()
            .iter()
            .cloned()
            .zip(self.schema.kinds().iter().copied())
            .collect();
        SchemaConfig { target: self.schema.target_name().to_string(), features }
    }
}

/// For each categorical feature, a table from `data`-schema level codes to
/// `model`-schema level codes (None where the label is unseen by the model).
/// Continuous features get no table. Both schemas must share feature layout.
pub(crate) fn level_translations(
    model: &Schema,
    data: &Schema,
) -> Vec<Option<Vec<Option<usize>>>> {
    (0..model.d())
        .map(|j| match model.kind(j) {
            FeatureKind::Continuous => None,
            FeatureKind::Categorical => {
                let table = data
                    .levels(j)
                    .iter()
                    .map(|label| model.levels(j).iter().position(|l| l == label))
                    .collect();
                Some(table)
            }
        })
        .collect()
}

fn storage_slots(schema: &Schema) -> Vec<usize> {
    let mut n_cont = 0;
    let mut n_cat = 0;
    schema
        .kinds()
        .iter()
        .map(|k| match k {
            FeatureKind::Continuous => {
                n_cont += 1;
                n_cont - 1
            }
            FeatureKind::Categorical => {
                n_cat += 1;
                n_cat - 1
            }
        })
        .collect()
}

/// Split recipe: deterministic shuffle, `ceil(n * test_fraction)` test rows.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

/// Splits into (train, test). Both parts keep the full schema, so categorical
/// codes stay aligned even when a split misses some level.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::SchemaMismatch(format!(
            "test_fraction {} outside (0, 1)",
            spec.test_fraction
        )));
    }
    let n = ds.n();
    let n_test = (n as f64 * spec.test_fraction).ceil() as usize;
    if n < 2 || n_test == 0 || n_test >= n {
        return Err(Error::DegenerateSplit);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let mut test_idx: Vec<usize> = idx[..n_test].to_vec();
    let mut train_idx: Vec<usize> = idx[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((ds.subset(&train_idx), ds.subset(&test_idx)))
}

/// Loads a CSV against a schema config, learning categorical levels in
/// first-appearance order. The header must contain exactly the configured
/// feature columns plus the target, in any column order.
pub fn load_csv(path: impl AsRef<Path>, config: &SchemaConfig) -> Result<Dataset> {
    load_csv_impl(path, config, None)
}

/// Loads a CSV against a closed schema (e.g. the one a model was trained on).
/// Labels absent from the schema produce [`Error::UnknownLevel`] with the
/// offending row.
pub fn load_csv_closed(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let config = SchemaConfig {
        target: schema.target_name().to_string(),
        features: schema
            .feature_names()
            .iter()
            .cloned()
            .zip(schema.kinds().iter().copied())
            .collect(),
    };
    load_csv_impl(path, &config, Some(schema))
}

fn load_csv_impl(
    path: impl AsRef<Path>,
    config: &SchemaConfig,
    closed: Option<&Schema>,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let header: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();

    let target_col = header
        .iter()
        .position(|name| *name == config.target)
        .ok_or_else(|| Error::SchemaMismatch(format!("target column {:?} not in header", config.target)))?;

    let mut feature_names = Vec::new();
    let mut kinds = Vec::new();
    let mut columns = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if c == target_col {
            continue;
        }
        let kind = config.features.get(name).copied().ok_or_else(|| {
            Error::SchemaMismatch(format!("column {name:?} not declared in schema config"))
        })?;
        feature_names.push(name.clone());
        kinds.push(kind);
        columns.push(c);
    }
    if feature_names.len() != config.features.len() {
        let missing: Vec<&String> = config
            .features
            .keys()
            .filter(|name| !feature_names.contains(name))
            .collect();
        return Err(Error::SchemaMismatch(format!("columns {missing:?} missing from header")));
    }
    if let Some(schema) = closed {
        if schema.feature_names() != feature_names.as_slice() || schema.kinds() != kinds.as_slice() {
            return Err(Error::SchemaMismatch(
                "data file columns do not match the model schema".into(),
            ));
        }
    }

    let d = feature_names.len();
    let mut level_labels: Vec<Vec<String>> = match closed {
        Some(schema) => (0..d).map(|j| schema.levels(j).to_vec()).collect(),
        None => vec![Vec::new(); d],
    };
    let mut level_codes: Vec<HashMap<String, usize>> = level_labels
        .iter()
        .map(|labels| labels.iter().enumerate().map(|(c, s)| (s.clone(), c)).collect())
        .collect();

    let mut continuous: Vec<Vec<f64>> = Vec::new();
    let mut categorical: Vec<Vec<usize>> = Vec::new();
    let mut slots = Vec::with_capacity(d);
    for kind in &kinds {
        match kind {
            FeatureKind::Continuous => {
                slots.push(continuous.len());
                continuous.push(Vec::new());
            }
            FeatureKind::Categorical => {
                slots.push(categorical.len());
                categorical.push(Vec::new());
            }
        }
    }

    let mut target = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = record.get(target_col).unwrap_or("");
        match cell {
            "0" => target.push(0),
            "1" => target.push(1),
            "" => {
                return Err(Error::MissingValue { row, column: config.target.clone() });
            }
            other => {
                return Err(Error::SchemaMismatch(format!(
                    "target value {other:?} at row {row} outside {{0,1}}"
                )));
            }
        }
        for (j, &c) in columns.iter().enumerate() {
            let cell = record.get(c).unwrap_or("");
            match kinds[j] {
                FeatureKind::Continuous => {
                    let parsed = cell.parse::<f64>().ok().filter(|v| v.is_finite());
                    match parsed {
                        Some(v) => continuous[slots[j]].push(v),
                        None => {
                            return Err(Error::MissingValue { row, column: feature_names[j].clone() });
                        }
                    }
                }
                FeatureKind::Categorical => {
                    if cell.is_empty() {
                        return Err(Error::MissingValue { row, column: feature_names[j].clone() });
                    }
                    let code = match level_codes[j].get(cell) {
                        Some(&code) => code,
                        None if closed.is_none() => {
                            let code = level_labels[j].len();
                            level_labels[j].push(cell.to_string());
                            level_codes[j].insert(cell.to_string(), code);
                            code
                        }
                        None => {
                            return Err(Error::UnknownLevel {
                                feature: feature_names[j].clone(),
                                label: cell.to_string(),
                                row,
                            });
                        }
                    };
                    categorical[slots[j]].push(code);
                }
            }
        }
    }

    for (j, kind) in kinds.iter().enumerate() {
        if *kind == FeatureKind::Categorical && level_labels[j].is_empty() && !target.is_empty() {
            return Err(Error::SchemaMismatch(format!(
                "categorical feature {:?} has no observed levels",
                feature_names[j]
            )));
        }
    }

    let schema = Schema::new(feature_names, kinds, config.target.clone(), level_labels)?;
    Dataset::new(schema, continuous, categorical, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn mixed_config() -> SchemaConfig {
        SchemaConfig {
            target: "y".into(),
            features: [
                ("age".into(), FeatureKind::Continuous),
                ("purpose".into(), FeatureKind::Categorical),
            ]
            .into_iter()
            .collect(),
        }
    }

    #[test]
    fn loads_mixed_columns_and_learns_levels_in_first_appearance_order() {
        let f = write_tmp("age,purpose,y\n31,car,0\n45,rent,1\n22,car,1\n");
        let ds = load_csv(f.path(), &mixed_config()).unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.schema().levels(1), &["car".to_string(), "rent".to_string()]);
        assert_eq!(ds.continuous_column(0), &[31.0, 45.0, 22.0]);
        assert_eq!(ds.categorical_column(1), &[0, 1, 0]);
        assert_eq!(ds.target(), &[0, 1, 1]);
    }

    #[test]
    fn empty_cell_is_rejected_with_position() {
        let f = write_tmp("age,purpose,y\n31,,0\n");
        match load_csv(f.path(), &mixed_config()) {
            Err(Error::MissingValue { row, column }) => {
                assert_eq!(row, 0);
                assert_eq!(column, "purpose");
            }
            other => panic!("expected MissingValue, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_continuous_cell_is_rejected() {
        let f = write_tmp("age,purpose,y\nNaN,car,0\n");
        assert!(matches!(
            load_csv(f.path(), &mixed_config()),
            Err(Error::MissingValue { .. })
        ));
    }

    #[test]
    fn target_outside_binary_domain_is_a_schema_mismatch() {
        let f = write_tmp("age,purpose,y\n31,car,2\n");
        assert!(matches!(
            load_csv(f.path(), &mixed_config()),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn header_and_config_must_agree() {
        let f = write_tmp("age,color,y\n31,red,0\n");
        assert!(matches!(
            load_csv(f.path(), &mixed_config()),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn closed_load_reports_unknown_level_with_row() {
        let f = write_tmp("age,purpose,y\n31,car,0\n45,rent,1\n");
        let ds = load_csv(f.path(), &mixed_config()).unwrap();
        let f2 = write_tmp("age,purpose,y\n50,car,0\n50,boat,1\n");
        match load_csv_closed(f2.path(), ds.schema()) {
            Err(Error::UnknownLevel { feature, label, row }) => {
                assert_eq!(feature, "purpose");
                assert_eq!(label, "boat");
                assert_eq!(row, 1);
            }
            other => panic!("expected UnknownLevel, got {other:?}"),
        }
    }

    #[test]
    fn save_then_reload_is_identity() {
        let f = write_tmp("age,purpose,y\n31.25,car,0\n45,rent,1\n22.5,car,1\n");
        let ds = load_csv(f.path(), &mixed_config()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        ds.save_csv(out.path()).unwrap();
        let ds2 = load_csv(out.path(), &ds.schema_config()).unwrap();
        assert_eq!(ds, ds2);
    }

    #[test]
    fn split_sizes_follow_ceiling_and_parts_are_disjoint() {
        let f = write_tmp(
            "age,purpose,y\n1,a,0\n2,a,1\n3,a,0\n4,b,1\n5,b,0\n6,b,1\n7,a,0\n8,a,1\n9,b,0\n10,b,1\n",
        );
        let ds = load_csv(f.path(), &mixed_config()).unwrap();
        let (train, test) = split(&ds, &SplitSpec { test_fraction: 0.3, seed: 9 }).unwrap();
        assert_eq!(test.n(), 3);
        assert_eq!(train.n(), 7);
        let mut ages: Vec<f64> = train
            .continuous_column(0)
            .iter()
            .chain(test.continuous_column(0))
            .copied()
            .collect();
        ages.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(ages, (1..=10).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let f = write_tmp("age,purpose,y\n1,a,0\n2,a,1\n3,b,0\n4,b,1\n5,a,0\n");
        let ds = load_csv(f.path(), &mixed_config()).unwrap();
        let spec = SplitSpec { test_fraction: 0.4, seed: 3 };
        let (tr1, te1) = split(&ds, &spec).unwrap();
        let (tr2, te2) = split(&ds, &spec).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        let (tr3, _) = split(&ds, &SplitSpec { test_fraction: 0.4, seed: 4 }).unwrap();
        assert!(tr1 != tr3 || tr1.n() == tr3.n());
    }

    #[test]
    fn degenerate_splits_are_rejected() {
        let f = write_tmp("age,purpose,y\n1,a,0\n");
        let ds = load_csv(f.path(), &mixed_config()).unwrap();
        assert!(matches!(
            split(&ds, &SplitSpec { test_fraction: 0.3, seed: 0 }),
            Err(Error::DegenerateSplit)
        ));
    }

    #[test]
    fn splits_share_the_parent_schema() {
        let f = write_tmp("age,purpose,y\n1,a,0\n2,b,1\n3,c,0\n4,a,1\n5,b,0\n");
        let ds = load_csv(f.path(), &mixed_config()).unwrap();
        let (train, test) = split(&ds, &SplitSpec { test_fraction: 0.2, seed: 0 }).unwrap();
        assert_eq!(train.schema(), ds.schema());
        assert_eq!(test.schema(), ds.schema());
    }
}
