//! Portable scorecard models.
//!
//! Every method (glmdisc, the raw-feature regression, the univariate
//! pipeline) exports to the same JSON document: schema, per-feature
//! quantizers (absent for the raw regression), coefficient blocks, fit
//! statistics, and, for glmdisc, the per-epoch history needed to trace how
//! the quantization evolved.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{level_translations, Dataset, FeatureKind, Schema};
use crate::error::{Error, Result};
use crate::glm::{FitResult, LogisticParams};
use crate::numeric::sigmoid;
use crate::quantization::{
    CategoricalQuantizer, ContinuousQuantizer, FeatureQuantizer, Quantization,
};
use crate::trainer::{emit_trace, GlmdiscModel, TrainConfig};

pub const FORMAT_TAG: &str = "glmdisc-scorecard/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Glmdisc,
    Allr,
    MdlpChi2,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Glmdisc => "glmdisc",
            Method::Allr => "allr",
            Method::MdlpChi2 => "mdlp-chi2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub n_train: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub best_epoch: Option<usize>,
}

/// One epoch of a glmdisc run, compressed for the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: usize,
    pub bic: f64,
    pub m_hat: Vec<usize>,
    /// Per feature: cutpoints joined by ";" or "label:group" pairs.
    pub details: Vec<String>,
}

/// JSON-friendly form of one feature's quantizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QuantizerSpec {
    Continuous { cutpoints: Vec<f64> },
    Categorical { groups: BTreeMap<String, usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorecardModel {
    format: String,
    method: Method,
    schema: Schema,
    /// None for the raw-feature regression.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    quantizers: Option<Vec<QuantizerSpec>>,
    theta0: f64,
    theta_blocks: Vec<Vec<f64>>,
    loglik: f64,
    nu: usize,
    bic: f64,
    meta: TrainMeta,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    history: Option<Vec<EpochSummary>>,
}

fn quantizer_details(fq: &FeatureQuantizer, schema: &Schema, j: usize) -> String {
    match fq {
        FeatureQuantizer::Continuous(q) => q
            .cutpoints()
            .iter()
            .map(|c| format!("{c}"))
            .collect::<Vec<_>>()
            .join(";"),
        FeatureQuantizer::Categorical(q) => q
            .group_of()
            .iter()
            .enumerate()
            .map(|(code, g)| format!("{}:{}", schema.levels(j)[code], g))
            .collect::<Vec<_>>()
            .join(";"),
    }
}

fn quantizer_specs(q: &Quantization, schema: &Schema) -> Vec<QuantizerSpec> {
    q.per_feature()
        .iter()
        .enumerate()
        .map(|(j, fq)| match fq {
            FeatureQuantizer::Continuous(cq) => {
                QuantizerSpec::Continuous { cutpoints: cq.cutpoints().to_vec() }
            }
            FeatureQuantizer::Categorical(cq) => QuantizerSpec::Categorical {
                groups: cq
                    .group_of()
                    .iter()
                    .enumerate()
                    .map(|(code, &g)| (schema.levels(j)[code].clone(), g))
                    .collect(),
            },
        })
        .collect()
}

fn quantization_from_specs(specs: &[QuantizerSpec], schema: &Schema) -> Result<Quantization> {
    if specs.len() != schema.d() {
        return Err(Error::InvalidModel(format!(
            "{} quantizers for {} features",
            specs.len(),
            schema.d()
        )));
    }
    let per_feature = specs
        .iter()
        .enumerate()
        .map(|(j, spec)| match (spec, schema.kind(j)) {
            (QuantizerSpec::Continuous { cutpoints }, FeatureKind::Continuous) => {
                Ok(FeatureQuantizer::Continuous(ContinuousQuantizer::new(cutpoints.clone())?))
            }
            (QuantizerSpec::Categorical { groups }, FeatureKind::Categorical) => {
                if groups.len() != schema.n_levels(j) {
                    return Err(Error::InvalidModel(format!(
                        "feature {:?}: {} grouped labels for {} schema levels",
                        schema.feature_name(j),
                        groups.len(),
                        schema.n_levels(j)
                    )));
                }
                let group_of = schema
                    .levels(j)
                    .iter()
                    .map(|label| {
                        groups.get(label).copied().ok_or_else(|| {
                            Error::InvalidModel(format!(
                                "feature {:?}: level {label:?} missing from the group map",
                                schema.feature_name(j)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(FeatureQuantizer::Categorical(CategoricalQuantizer::new(group_of)?))
            }
            _ => Err(Error::InvalidModel(format!(
                "feature {:?}: quantizer kind disagrees with the schema",
                schema.feature_name(j)
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Quantization::new(per_feature))
}

impl ScorecardModel {
    pub fn from_glmdisc(model: &GlmdiscModel, cfg: &TrainConfig, n_train: usize) -> Self {
        let schema = model.schema().clone();
        let best = &model.history()[model.best_epoch() - 1];
        let history = emit_trace(model)
            .into_iter()
            .map(|rec| EpochSummary {
                epoch: rec.epoch,
                bic: rec.bic,
                m_hat: rec.quantization.level_counts(),
                details: rec
                    .quantization
                    .per_feature()
                    .iter()
                    .enumerate()
                    .map(|(j, fq)| quantizer_details(fq, &schema, j))
                    .collect(),
            })
            .collect();
        Self {
            format: FORMAT_TAG.to_string(),
            method: Method::Glmdisc,
            quantizers: Some(quantizer_specs(model.quantization(), &schema)),
            theta0: model.params().theta0,
            theta_blocks: model.params().blocks.clone(),
            loglik: best.fit.loglik,
            nu: best.fit.nu,
            bic: model.bic(),
            meta: TrainMeta {
                n_train,
                seed: Some(cfg.seed),
                epochs: Some(cfg.epochs),
                best_epoch: Some(model.best_epoch()),
            },
            history: Some(history),
            schema,
        }
    }

    pub fn from_allr(fit: &FitResult, schema: &Schema, n_train: usize) -> Self {
        Self {
            format: FORMAT_TAG.to_string(),
            method: Method::Allr,
            schema: schema.clone(),
            quantizers: None,
            theta0: fit.params.theta0,
            theta_blocks: fit.params.blocks.clone(),
            loglik: fit.loglik,
            nu: fit.nu,
            bic: fit.bic,
            meta: TrainMeta { n_train, seed: None, epochs: None, best_epoch: None },
            history: None,
        }
    }

    pub fn from_mdlp_chi2(
        q: &Quantization,
        fit: &FitResult,
        schema: &Schema,
        n_train: usize,
    ) -> Self {
        Self {
            format: FORMAT_TAG.to_string(),
            method: Method::MdlpChi2,
            schema: schema.clone(),
            quantizers: Some(quantizer_specs(q, schema)),
            theta0: fit.params.theta0,
            theta_blocks: fit.params.blocks.clone(),
            loglik: fit.loglik,
            nu: fit.nu,
            bic: fit.bic,
            meta: TrainMeta { n_train, seed: None, epochs: None, best_epoch: None },
            history: None,
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn bic(&self) -> f64 {
        self.bic
    }

    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    pub fn history(&self) -> Option<&[EpochSummary]> {
        self.history.as_deref()
    }

    pub fn params(&self) -> LogisticParams {
        LogisticParams { theta0: self.theta0, blocks: self.theta_blocks.clone() }
    }

    pub fn quantization(&self) -> Result<Option<Quantization>> {
        match &self.quantizers {
            None => Ok(None),
            Some(specs) => Ok(Some(quantization_from_specs(specs, &self.schema)?)),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let model: ScorecardModel = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        model.validate()?;
        Ok(model)
    }

    /// Structural checks applied to documents from disk.
    fn validate(&self) -> Result<()> {
        if self.format != FORMAT_TAG {
            return Err(Error::InvalidModel(format!(
                "unsupported format {:?}, expected {FORMAT_TAG:?}",
                self.format
            )));
        }
        // rebuild the schema through its validating constructor
        let d = self.schema.d();
        let rebuilt = Schema::new(
            self.schema.feature_names().to_vec(),
            self.schema.kinds().to_vec(),
            self.schema.target_name().to_string(),
            (0..d).map(|j| self.schema.levels(j).to_vec()).collect(),
        )?;
        if rebuilt != self.schema {
            return Err(Error::InvalidModel("schema failed revalidation".into()));
        }
        if self.theta_blocks.len() != d {
            return Err(Error::InvalidModel(format!(
                "{} coefficient blocks for {} features",
                self.theta_blocks.len(),
                d
            )));
        }
        if !self.theta0.is_finite()
            || self.theta_blocks.iter().flatten().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidModel("non-finite coefficient".into()));
        }
        match self.quantization()? {
            Some(q) => {
                for (j, fq) in q.per_feature().iter().enumerate() {
                    if self.theta_blocks[j].len() != fq.num_levels() {
                        return Err(Error::InvalidModel(format!(
                            "feature {:?}: {} coefficients for {} levels",
                            self.schema.feature_name(j),
                            self.theta_blocks[j].len(),
                            fq.num_levels()
                        )));
                    }
                }
            }
            None => {
                if self.method != Method::Allr {
                    return Err(Error::InvalidModel(
                        "quantized methods must carry quantizers".into(),
                    ));
                }
                for j in 0..d {
                    let expect = match self.schema.kind(j) {
                        FeatureKind::Continuous => 1,
                        FeatureKind::Categorical => self.schema.n_levels(j),
                    };
                    if self.theta_blocks[j].len() != expect {
                        return Err(Error::InvalidModel(format!(
                            "feature {:?}: {} coefficients, expected {expect}",
                            self.schema.feature_name(j),
                            self.theta_blocks[j].len()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// P(y=1) rowwise, translating the dataset's categorical codes by label.
    pub fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        if !self.schema.compatible_layout(ds.schema()) {
            return Err(Error::SchemaMismatch(
                "dataset features do not match the model schema".into(),
            ));
        }
        match self.quantization()? {
            Some(q) => {
                let stand_in = GlmdiscModel::from_parts(
                    self.schema.clone(),
                    self.meta.best_epoch.unwrap_or(1),
                    q,
                    self.params(),
                    self.bic,
                    Vec::new(),
                );
                stand_in.predict(ds)
            }
            None => self.predict_raw(ds),
        }
    }

    fn predict_raw(&self, ds: &Dataset) -> Result<Vec<f64>> {
        let translations = level_translations(&self.schema, ds.schema());
        let mut out = Vec::with_capacity(ds.n());
        for i in 0..ds.n() {
            let mut z = self.theta0;
            for j in 0..ds.d() {
                match ds.schema().kind(j) {
                    FeatureKind::Continuous => {
                        z += self.theta_blocks[j][0] * ds.continuous_column(j)[i];
                    }
                    FeatureKind::Categorical => {
                        let code = ds.categorical_column(j)[i];
                        let model_code = translations[j]
                            .as_ref()
                            .expect("categorical feature has a translation table")[code]
                            .ok_or_else(|| Error::UnknownLevel {
                                feature: self.schema.feature_name(j).to_string(),
                                label: ds.schema().levels(j)[code].clone(),
                                row: i,
                            })?;
                        z += self.theta_blocks[j][model_code];
                    }
                }
            }
            out.push(sigmoid(z));
        }
        Ok(out)
    }

    /// Human-readable scorecard: one line per interval or level group with
    /// its additive score contribution.
    pub fn scorecard_text(&self) -> Result<String> {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "method: {}", self.method.as_str());
        let _ = writeln!(s, "trained on {} rows", self.meta.n_train);
        let _ = writeln!(
            s,
            "log-likelihood {:.4}, {} free parameters, BIC {:.4}",
            self.loglik, self.nu, self.bic
        );
        let _ = writeln!(s, "intercept: {:+.4}", self.theta0);
        match self.quantization()? {
            Some(q) => {
                for (j, fq) in q.per_feature().iter().enumerate() {
                    let _ = writeln!(s, "{}:", self.schema.feature_name(j));
                    match fq {
                        FeatureQuantizer::Continuous(cq) => {
                            let cuts = cq.cutpoints();
                            for h in 0..cq.num_levels() {
                                let lo = if h == 0 {
                                    "-inf".to_string()
                                } else {
                                    format!("{:.6}", cuts[h - 1])
                                };
                                let hi = if h == cuts.len() {
                                    "+inf)".to_string()
                                } else {
                                    format!("{:.6}]", cuts[h])
                                };
                                let mark =
                                    if h == cq.num_levels() - 1 { "  (reference)" } else { "" };
                                let _ = writeln!(
                                    s,
                                    "  ({lo}, {hi}: {:+.4}{mark}",
                                    self.theta_blocks[j][h]
                                );
                            }
                        }
                        FeatureQuantizer::Categorical(cq) => {
                            for g in 0..cq.num_groups() {
                                let labels: Vec<&str> = cq
                                    .group_of()
                                    .iter()
                                    .enumerate()
                                    .filter(|(_, gg)| **gg == g)
                                    .map(|(code, _)| self.schema.levels(j)[code].as_str())
                                    .collect();
                                let mark =
                                    if g == cq.num_groups() - 1 { "  (reference)" } else { "" };
                                let _ = writeln!(
                                    s,
                                    "  {{{}}}: {:+.4}{mark}",
                                    labels.join(", "),
                                    self.theta_blocks[j][g]
                                );
                            }
                        }
                    }
                }
            }
            None => {
                for j in 0..self.schema.d() {
                    match self.schema.kind(j) {
                        FeatureKind::Continuous => {
                            let _ = writeln!(
                                s,
                                "{}: {:+.4} per unit",
                                self.schema.feature_name(j),
                                self.theta_blocks[j][0]
                            );
                        }
                        FeatureKind::Categorical => {
                            let _ = writeln!(s, "{}:", self.schema.feature_name(j));
                            for (code, label) in self.schema.levels(j).iter().enumerate() {
                                let mark = if code == self.schema.n_levels(j) - 1 {
                                    "  (reference)"
                                } else {
                                    ""
                                };
                                let _ = writeln!(
                                    s,
                                    "  {{{label}}}: {:+.4}{mark}",
                                    self.theta_blocks[j][code]
                                );
                            }
                        }
                    }
                }
            }
        }
        Ok(s)
    }

    /// Per-epoch trace as CSV with one row per (epoch, feature).
    pub fn trace_csv(&self) -> Result<String> {
        let Some(history) = &self.history else {
            return Err(Error::InvalidModel(
                "this model carries no training history to trace".into(),
            ));
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["epoch", "bic", "feature", "m_hat", "cutpoints_or_groups"])?;
        for rec in history {
            for j in 0..self.schema.d() {
                w.write_record([
                    rec.epoch.to_string(),
                    format!("{}", rec.bic),
                    self.schema.feature_name(j).to_string(),
                    rec.m_hat[j].to_string(),
                    rec.details[j].clone(),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidModel(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{fit_allr, fit_mdlp_chi2_pipeline, ChiMergeConfig, MdlpConfig};
    use crate::trainer::{train, LevelBudget};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tempfile::tempdir;

    fn mixed_dataset(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = Schema::new(
            vec!["x".into(), "c".into()],
            vec![FeatureKind::Continuous, FeatureKind::Categorical],
            "y".into(),
            vec![Vec::new(), vec!["red".into(), "green".into(), "blue".into()]],
        )
        .unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let codes: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let y: Vec<u8> = (0..n)
            .map(|i| {
                let z = (if x[i] > 0.5 { 1.2 } else { -1.2 })
                    + (if codes[i] == 0 { 0.8 } else { 0.0 });
                u8::from(rng.random_bool(sigmoid(z)))
            })
            .collect();
        Dataset::new(schema, vec![x], vec![codes], y).unwrap()
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            m_max: LevelBudget::Uniform(3),
            epochs: 3,
            batch_size: 64,
            seed: 9,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn glmdisc_scorecard_round_trips_through_json() {
        let ds = mixed_dataset(400, 1);
        let cfg = small_cfg();
        let model = train(&ds, &cfg).unwrap();
        let card = ScorecardModel::from_glmdisc(&model, &cfg, ds.n());
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        card.save(&path).unwrap();
        let loaded = ScorecardModel::load(&path).unwrap();
        assert_eq!(card, loaded);
        assert_eq!(loaded.method(), Method::Glmdisc);
        assert_eq!(loaded.meta().best_epoch, Some(model.best_epoch()));
        let a = card.predict(&ds).unwrap();
        let b = loaded.predict(&ds).unwrap();
        assert_eq!(a, b);
        let direct = model.predict(&ds).unwrap();
        for (p, q) in a.iter().zip(&direct) {
            assert_relative_eq!(p, q, epsilon = 1e-15);
        }
    }

    #[test]
    fn allr_scorecard_predicts_from_raw_values() {
        let ds = mixed_dataset(300, 2);
        let fit = fit_allr(&ds).unwrap();
        let card = ScorecardModel::from_allr(&fit, ds.schema(), ds.n());
        let probs = card.predict(&ds).unwrap();
        for i in 0..ds.n() {
            let z = fit.params.theta0
                + fit.params.blocks[0][0] * ds.continuous_column(0)[i]
                + fit.params.blocks[1][ds.categorical_column(1)[i]];
            assert_relative_eq!(probs[i], sigmoid(z), epsilon = 1e-15);
        }
        let dir = tempdir().unwrap();
        let path = dir.path().join("allr.json");
        card.save(&path).unwrap();
        let loaded = ScorecardModel::load(&path).unwrap();
        assert_eq!(card, loaded);
        assert!(loaded.history().is_none());
    }

    #[test]
    fn pipeline_scorecard_round_trips() {
        let ds = mixed_dataset(400, 3);
        let (q, fit) =
            fit_mdlp_chi2_pipeline(&ds, &MdlpConfig::default(), &ChiMergeConfig::default())
                .unwrap();
        let card = ScorecardModel::from_mdlp_chi2(&q, &fit, ds.schema(), ds.n());
        let dir = tempdir().unwrap();
        let path = dir.path().join("pipeline.json");
        card.save(&path).unwrap();
        let loaded = ScorecardModel::load(&path).unwrap();
        assert_eq!(loaded.method(), Method::MdlpChi2);
        let got = loaded.quantization().unwrap().unwrap();
        assert_eq!(&got, &q);
    }

    #[test]
    fn load_rejects_foreign_and_tampered_documents() {
        let ds = mixed_dataset(200, 4);
        let cfg = small_cfg();
        let model = train(&ds, &cfg).unwrap();
        let card = ScorecardModel::from_glmdisc(&model, &cfg, ds.n());
        let dir = tempdir().unwrap();

        let path = dir.path().join("bad_tag.json");
        let mut doc = serde_json::to_value(&card).unwrap();
        doc["format"] = serde_json::Value::String("something-else/9".into());
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        assert!(matches!(ScorecardModel::load(&path), Err(Error::InvalidModel(_))));

        let path = dir.path().join("bad_blocks.json");
        let mut doc = serde_json::to_value(&card).unwrap();
        doc["theta_blocks"][0] = serde_json::json!([0.1, 0.2, 0.3, 0.4, 0.5]);
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        assert!(matches!(ScorecardModel::load(&path), Err(Error::InvalidModel(_))));

        let path = dir.path().join("bad_group.json");
        let mut doc = serde_json::to_value(&card).unwrap();
        // drop one label from the categorical group map
        let groups = doc["quantizers"][1]["groups"].as_object_mut().unwrap();
        groups.remove("red");
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        assert!(matches!(ScorecardModel::load(&path), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn scorecard_text_lists_intervals_groups_and_references() {
        let ds = mixed_dataset(400, 5);
        let cfg = small_cfg();
        let model = train(&ds, &cfg).unwrap();
        let card = ScorecardModel::from_glmdisc(&model, &cfg, ds.n());
        let text = card.scorecard_text().unwrap();
        assert!(text.contains("method: glmdisc"));
        assert!(text.contains("(-inf,"));
        assert!(text.contains("(reference)"));
        assert!(text.contains("intercept:"));

        let fit = fit_allr(&ds).unwrap();
        let raw = ScorecardModel::from_allr(&fit, ds.schema(), ds.n());
        let text = raw.scorecard_text().unwrap();
        assert!(text.contains("per unit"));
    }

    #[test]
    fn trace_csv_has_the_documented_header_and_row_grid() {
        let ds = mixed_dataset(300, 6);
        let cfg = TrainConfig { epochs: 4, ..small_cfg() };
        let model = train(&ds, &cfg).unwrap();
        let card = ScorecardModel::from_glmdisc(&model, &cfg, ds.n());
        let csv_text = card.trace_csv().unwrap();
        let mut lines = csv_text.lines();
        assert_eq!(lines.next(), Some("epoch,bic,feature,m_hat,cutpoints_or_groups"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 4 * 2);
        // the best epoch's BIC appears in the trace
        let best = format!("{}", model.bic());
        assert!(rows.iter().any(|r| r.contains(&best)));

        let fit = fit_allr(&ds).unwrap();
        let raw = ScorecardModel::from_allr(&fit, ds.schema(), ds.n());
        assert!(matches!(raw.trace_csv(), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn predict_flags_unknown_levels_by_label() {
        let ds = mixed_dataset(300, 7);
        let cfg = small_cfg();
        let model = train(&ds, &cfg).unwrap();
        let card = ScorecardModel::from_glmdisc(&model, &cfg, ds.n());
        let schema = Schema::new(
            vec!["x".into(), "c".into()],
            vec![FeatureKind::Continuous, FeatureKind::Categorical],
            "y".into(),
            vec![Vec::new(), vec!["red".into(), "violet".into()]],
        )
        .unwrap();
        let probe =
            Dataset::new(schema, vec![vec![0.4, 0.6]], vec![vec![0, 1]], vec![0, 1]).unwrap();
        match card.predict(&probe).unwrap_err() {
            Error::UnknownLevel { label, row, .. } => {
                assert_eq!(label, "violet");
                assert_eq!(row, 1);
            }
            other => panic!("expected UnknownLevel, got {other:?}"),
        }
    }
}
