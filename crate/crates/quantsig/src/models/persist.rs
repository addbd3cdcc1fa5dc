//! Binary on-disk format for trained models and fitted transforms.
//!
//! Layout: 8-byte magic `QSMODEL1`, u32 format version, a length-prefixed
//! family tag, then self-describing field records (name, type tag, payload)
//! until end of file. All integers are little-endian; reals are stored as
//! raw f64 bits, so round-trips are bit-exact. Loaders re-validate
//! structural invariants (tree child indices, matrix shapes) and report
//! anything inconsistent as a corrupt record rather than panicking.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use super::gbt::{GbtModel, RegNode, RegTree};
use super::knn::{KnnMetric, KnnModel};
use super::linear::LinearModel;
use super::logistic::LogisticModel;
use super::lstm::LstmModel;
use super::mlp::MlpModel;
use super::naive_bayes::{BnbModel, GnbModel};
use super::svm::SvmModel;
use super::tree::{Node, TreeModel};
use super::{ClassifierModel, ForestModel, RegressorModel};
use crate::preprocess::{PcaModel, ScalerParams};

pub const MODEL_MAGIC: &[u8; 8] = b"QSMODEL1";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("file does not start with the model magic")]
    BadMagic,
    #[error("unsupported model format version {0}")]
    VersionUnsupported(u32),
    #[error("corrupt model record: {0}")]
    CorruptRecord(String),
    #[error("model file i/o failed: {0}")]
    Io(#[from] std::io::Error),
}

fn corrupt(msg: impl fmt::Display) -> PersistError {
    PersistError::CorruptRecord(msg.to_string())
}

/// Everything the pipeline persists: trained models plus the fitted
/// transforms needed to replay a run on fresh data.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelArtifact {
    Classifier(ClassifierModel),
    Regressor(RegressorModel),
    Scaler(ScalerParams),
    Pca(PcaModel),
}

// ---------------------------------------------------------------- encoding

const TAG_U64: u8 = 0;
const TAG_F64: u8 = 1;
const TAG_STR: u8 = 2;
const TAG_VEC_F64: u8 = 3;
const TAG_MAT_F64: u8 = 4;
const TAG_VEC_U64: u8 = 5;
const TAG_VEC_STR: u8 = 6;

#[derive(Debug, Clone, PartialEq)]
enum Value {
    U64(u64),
    F64(f64),
    Str(String),
    VecF64(Vec<f64>),
    /// Row-major with explicit shape.
    Mat { rows: u32, cols: u32, data: Vec<f64> },
    VecU64(Vec<u64>),
    VecStr(Vec<String>),
}

struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    fn new(family: &str) -> Self {
        let mut buf = Vec::with_capacity(256);
        buf.extend_from_slice(MODEL_MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(family.len() as u32).to_le_bytes());
        buf.extend_from_slice(family.as_bytes());
        Encoder { buf }
    }

    fn raw_str(&mut self, s: &str) {
        self.buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn field(&mut self, name: &str, value: &Value) {
        self.raw_str(name);
        match value {
            Value::U64(v) => {
                self.buf.push(TAG_U64);
                self.buf.extend_from_slice(&v.to_le_bytes());
            }
            Value::F64(v) => {
                self.buf.push(TAG_F64);
                self.buf.extend_from_slice(&v.to_le_bytes());
            }
            Value::Str(s) => {
                self.buf.push(TAG_STR);
                self.raw_str(s);
            }
            Value::VecF64(v) => {
                self.buf.push(TAG_VEC_F64);
                self.buf.extend_from_slice(&(v.len() as u32).to_le_bytes());
                for x in v {
                    self.buf.extend_from_slice(&x.to_le_bytes());
                }
            }
            Value::Mat { rows, cols, data } => {
                self.buf.push(TAG_MAT_F64);
                self.buf.extend_from_slice(&rows.to_le_bytes());
                self.buf.extend_from_slice(&cols.to_le_bytes());
                for x in data {
                    self.buf.extend_from_slice(&x.to_le_bytes());
                }
            }
            Value::VecU64(v) => {
                self.buf.push(TAG_VEC_U64);
                self.buf.extend_from_slice(&(v.len() as u32).to_le_bytes());
                for x in v {
                    self.buf.extend_from_slice(&x.to_le_bytes());
                }
            }
            Value::VecStr(v) => {
                self.buf.push(TAG_VEC_STR);
                self.buf.extend_from_slice(&(v.len() as u32).to_le_bytes());
                for s in v {
                    self.raw_str(s);
                }
            }
        }
    }

    fn u64(&mut self, name: &str, v: u64) {
        self.field(name, &Value::U64(v));
    }
    fn f64(&mut self, name: &str, v: f64) {
        self.field(name, &Value::F64(v));
    }
    fn str(&mut self, name: &str, v: &str) {
        self.field(name, &Value::Str(v.to_string()));
    }
    fn vec_f64(&mut self, name: &str, v: &[f64]) {
        self.field(name, &Value::VecF64(v.to_vec()));
    }
    fn mat(&mut self, name: &str, rows: &[Vec<f64>]) {
        let r = rows.len() as u32;
        let c = rows.first().map_or(0, |row| row.len()) as u32;
        let data: Vec<f64> = rows.iter().flat_map(|row| row.iter().copied()).collect();
        self.field(name, &Value::Mat { rows: r, cols: c, data });
    }
    fn mat_flat(&mut self, name: &str, rows: u32, cols: u32, data: &[f64]) {
        self.field(name, &Value::Mat { rows, cols, data: data.to_vec() });
    }
    fn vec_u64(&mut self, name: &str, v: &[u64]) {
        self.field(name, &Value::VecU64(v.to_vec()));
    }
    fn vec_str(&mut self, name: &str, v: &[String]) {
        self.field(name, &Value::VecStr(v.to_vec()));
    }
}

/// Classification-tree nodes as rows: kind, feature, threshold, left,
/// right, count0, count1 (kind 0 = split, 1 = leaf).
fn class_tree_rows(tree: &TreeModel) -> Vec<Vec<f64>> {
    tree.nodes
        .iter()
        .map(|n| match n {
            Node::Split { feature, threshold, left, right } => {
                vec![0.0, *feature as f64, *threshold, *left as f64, *right as f64, 0.0, 0.0]
            }
            Node::Leaf { counts } => {
                vec![1.0, 0.0, 0.0, 0.0, 0.0, counts[0] as f64, counts[1] as f64]
            }
        })
        .collect()
}

/// Regression-tree nodes as rows: kind, feature, threshold, left, right,
/// leaf value.
fn reg_tree_rows(tree: &RegTree) -> Vec<Vec<f64>> {
    tree.nodes
        .iter()
        .map(|n| match n {
            RegNode::Split { feature, threshold, left, right } => {
                vec![0.0, *feature as f64, *threshold, *left as f64, *right as f64, 0.0]
            }
            RegNode::Leaf { value } => vec![1.0, 0.0, 0.0, 0.0, 0.0, *value],
        })
        .collect()
}

pub(crate) fn encode(artifact: &ModelArtifact) -> Vec<u8> {
    let mut e = match artifact {
        ModelArtifact::Classifier(m) => {
            let mut e = Encoder::new(m.family().name());
            match m {
                ClassifierModel::Logistic(m) => {
                    e.vec_f64("weights", &m.weights);
                    e.f64("bias", m.bias);
                    e.vec_f64("loss_history", &m.loss_history);
                }
                ClassifierModel::Gnb(m) => {
                    e.vec_f64("priors", &m.priors);
                    e.mat("means", &[m.means[0].clone(), m.means[1].clone()]);
                    e.mat("variances", &[m.variances[0].clone(), m.variances[1].clone()]);
                }
                ClassifierModel::Bnb(m) => {
                    e.vec_f64("priors", &m.priors);
                    e.mat("feature_probs", &[m.feature_probs[0].clone(), m.feature_probs[1].clone()]);
                }
                ClassifierModel::Dt(m) => {
                    e.u64("n_features", m.n_features as u64);
                    e.mat("nodes", &class_tree_rows(m));
                }
                ClassifierModel::Rf(m) => {
                    e.u64("n_features", m.trees[0].n_features as u64);
                    e.u64("n_trees", m.trees.len() as u64);
                    e.vec_u64("tree_seeds", &m.tree_seeds);
                    for (i, tree) in m.trees.iter().enumerate() {
                        e.mat(&format!("tree_{i}"), &class_tree_rows(tree));
                    }
                }
                ClassifierModel::Knn(m) => {
                    e.mat("x", &m.x);
                    e.vec_u64("y", &m.y.iter().map(|&v| u64::from(v)).collect::<Vec<_>>());
                    e.u64("k", m.k as u64);
                    e.str(
                        "metric",
                        match m.metric {
                            KnnMetric::Euclidean => "euclidean",
                            KnnMetric::Manhattan => "manhattan",
                        },
                    );
                }
                ClassifierModel::LinearSvm(m) => {
                    e.vec_f64("weights", &m.weights);
                    e.f64("bias", m.bias);
                    e.vec_f64("objective_history", &m.objective_history);
                }
                ClassifierModel::Gbt(m) => {
                    e.u64("n_features", m.n_features as u64);
                    e.f64("initial_log_odds", m.initial_log_odds);
                    e.f64("learning_rate", m.learning_rate);
                    e.u64("n_trees", m.trees.len() as u64);
                    for (i, tree) in m.trees.iter().enumerate() {
                        e.mat(&format!("tree_{i}"), &reg_tree_rows(tree));
                    }
                }
                ClassifierModel::Mlp(m) => {
                    e.mat("w1", &m.w1);
                    e.vec_f64("b1", &m.b1);
                    e.vec_f64("w2", &m.w2);
                    e.f64("b2", m.b2);
                    e.vec_f64("loss_history", &m.loss_history);
                }
            }
            e
        }
        ModelArtifact::Regressor(RegressorModel::Linear(m)) => {
            let mut e = Encoder::new("linear");
            e.vec_f64("weights", &m.weights);
            e.f64("intercept", m.intercept);
            e.vec_str("feature_names", &m.feature_names);
            e
        }
        ModelArtifact::Regressor(RegressorModel::Lstm(m)) => {
            let hs = m.hidden_size as u32;
            let mut e = Encoder::new("lstm");
            e.u64("hidden_size", m.hidden_size as u64);
            e.u64("window_length", m.window_length as u64);
            e.f64("scale_min", m.scale_min);
            e.f64("scale_max", m.scale_max);
            for (q, gate) in ["i", "f", "o", "g"].iter().enumerate() {
                e.vec_f64(&format!("w_x_{gate}"), &m.w_x[q]);
                e.mat_flat(&format!("u_h_{gate}"), hs, hs, &m.u_h[q]);
                e.vec_f64(&format!("b_{gate}"), &m.b[q]);
            }
            e.vec_f64("w_out", &m.w_out);
            e.f64("b_out", m.b_out);
            e.vec_f64("loss_history", &m.loss_history);
            e
        }
        ModelArtifact::Scaler(s) => {
            let mut e = Encoder::new("scaler");
            e.vec_str("column_names", &s.column_names);
            e.vec_f64("min", &s.min);
            e.vec_f64("max", &s.max);
            e
        }
        ModelArtifact::Pca(p) => {
            let mut e = Encoder::new("pca");
            e.vec_f64("mean", &p.mean);
            e.mat("components", &p.components);
            e.vec_f64("eigenvalues", &p.eigenvalues);
            e
        }
    };
    std::mem::take(&mut e.buf)
}

// ---------------------------------------------------------------- decoding

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PersistError> {
        if self.at + n > self.bytes.len() {
            return Err(corrupt("unexpected end of file"));
        }
        let out = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, PersistError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, PersistError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, PersistError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, PersistError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| corrupt("string is not valid utf-8"))
    }

    fn done(&self) -> bool {
        self.at == self.bytes.len()
    }
}

struct Fields {
    map: HashMap<String, Value>,
}

impl Fields {
    fn take(&mut self, name: &str) -> Result<Value, PersistError> {
        self.map.remove(name).ok_or_else(|| corrupt(format!("missing field `{name}`")))
    }

    fn u64(&mut self, name: &str) -> Result<u64, PersistError> {
        match self.take(name)? {
            Value::U64(v) => Ok(v),
            _ => Err(corrupt(format!("field `{name}` has the wrong type"))),
        }
    }

    fn usize(&mut self, name: &str) -> Result<usize, PersistError> {
        Ok(self.u64(name)? as usize)
    }

    fn f64(&mut self, name: &str) -> Result<f64, PersistError> {
        match self.take(name)? {
            Value::F64(v) => Ok(v),
            _ => Err(corrupt(format!("field `{name}` has the wrong type"))),
        }
    }

    fn string(&mut self, name: &str) -> Result<String, PersistError> {
        match self.take(name)? {
            Value::Str(v) => Ok(v),
            _ => Err(corrupt(format!("field `{name}` has the wrong type"))),
        }
    }

    fn vec_f64(&mut self, name: &str) -> Result<Vec<f64>, PersistError> {
        match self.take(name)? {
            Value::VecF64(v) => Ok(v),
            _ => Err(corrupt(format!("field `{name}` has the wrong type"))),
        }
    }

    fn mat(&mut self, name: &str) -> Result<Vec<Vec<f64>>, PersistError> {
        match self.take(name)? {
            Value::Mat { rows, cols, data } => Ok(data
                .chunks(cols.max(1) as usize)
                .take(rows as usize)
                .map(|c| c.to_vec())
                .collect()),
            _ => Err(corrupt(format!("field `{name}` has the wrong type"))),
        }
    }

    fn mat_flat(&mut self, name: &str) -> Result<(usize, usize, Vec<f64>), PersistError> {
        match self.take(name)? {
            Value::Mat { rows, cols, data } => Ok((rows as usize, cols as usize, data)),
            _ => Err(corrupt(format!("field `{name}` has the wrong type"))),
        }
    }

    fn vec_u64(&mut self, name: &str) -> Result<Vec<u64>, PersistError> {
        match self.take(name)? {
            Value::VecU64(v) => Ok(v),
            _ => Err(corrupt(format!("field `{name}` has the wrong type"))),
        }
    }

    fn vec_str(&mut self, name: &str) -> Result<Vec<String>, PersistError> {
        match self.take(name)? {
            Value::VecStr(v) => Ok(v),
            _ => Err(corrupt(format!("field `{name}` has the wrong type"))),
        }
    }
}

fn read_fields(r: &mut Reader) -> Result<Fields, PersistError> {
    let mut map = HashMap::new();
    while !r.done() {
        let name = r.string()?;
        let value = match r.u8()? {
            TAG_U64 => Value::U64(r.u64()?),
            TAG_F64 => Value::F64(r.f64()?),
            TAG_STR => Value::Str(r.string()?),
            TAG_VEC_F64 => {
                let n = r.u32()? as usize;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push(r.f64()?);
                }
                Value::VecF64(v)
            }
            TAG_MAT_F64 => {
                let rows = r.u32()?;
                let cols = r.u32()?;
                let n = rows as usize * cols as usize;
                let mut data = Vec::with_capacity(n);
                for _ in 0..n {
                    data.push(r.f64()?);
                }
                Value::Mat { rows, cols, data }
            }
            TAG_VEC_U64 => {
                let n = r.u32()? as usize;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push(r.u64()?);
                }
                Value::VecU64(v)
            }
            TAG_VEC_STR => {
                let n = r.u32()? as usize;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push(r.string()?);
                }
                Value::VecStr(v)
            }
            tag => return Err(corrupt(format!("unknown field type tag {tag}"))),
        };
        map.insert(name, value);
    }
    Ok(Fields { map })
}

fn as_index(v: f64, what: &str) -> Result<usize, PersistError> {
    if v < 0.0 || v.fract() != 0.0 || v > (1u64 << 53) as f64 {
        return Err(corrupt(format!("{what} {v} is not a valid index")));
    }
    Ok(v as usize)
}

fn class_tree_from_rows(
    n_features: usize,
    rows: Vec<Vec<f64>>,
) -> Result<TreeModel, PersistError> {
    let mut nodes = Vec::with_capacity(rows.len());
    for row in &rows {
        if row.len() != 7 {
            return Err(corrupt("tree node row must have 7 entries"));
        }
        nodes.push(match row[0] as u8 {
            0 => Node::Split {
                feature: as_index(row[1], "split feature")?,
                threshold: row[2],
                left: as_index(row[3], "left child")?,
                right: as_index(row[4], "right child")?,
            },
            1 => Node::Leaf {
                counts: [as_index(row[5], "leaf count")?, as_index(row[6], "leaf count")?],
            },
            k => return Err(corrupt(format!("unknown tree node kind {k}"))),
        });
    }
    let model = TreeModel { n_features, nodes };
    model.validate().map_err(|e| corrupt(format!("invalid tree structure: {e}")))?;
    Ok(model)
}

fn reg_tree_from_rows(n_features: usize, rows: Vec<Vec<f64>>) -> Result<RegTree, PersistError> {
    let n = rows.len();
    let mut nodes = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != 6 {
            return Err(corrupt("regression node row must have 6 entries"));
        }
        nodes.push(match row[0] as u8 {
            0 => {
                let feature = as_index(row[1], "split feature")?;
                let left = as_index(row[3], "left child")?;
                let right = as_index(row[4], "right child")?;
                if feature >= n_features || left <= i || right <= i || left >= n || right >= n {
                    return Err(corrupt(format!("regression node {i} is inconsistent")));
                }
                RegNode::Split { feature, threshold: row[2], left, right }
            }
            1 => RegNode::Leaf { value: row[5] },
            k => return Err(corrupt(format!("unknown tree node kind {k}"))),
        });
    }
    if nodes.is_empty() {
        return Err(corrupt("regression tree has no nodes"));
    }
    Ok(RegTree { nodes })
}

fn gate_array<T>(mut f: impl FnMut(usize) -> Result<T, PersistError>) -> Result<[T; 4], PersistError> {
    Ok([f(0)?, f(1)?, f(2)?, f(3)?])
}

pub(crate) fn decode(bytes: &[u8]) -> Result<ModelArtifact, PersistError> {
    if bytes.len() < MODEL_MAGIC.len() || &bytes[..MODEL_MAGIC.len()] != MODEL_MAGIC {
        return Err(PersistError::BadMagic);
    }
    let mut r = Reader { bytes, at: MODEL_MAGIC.len() };
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(PersistError::VersionUnsupported(version));
    }
    let family = r.string()?;
    let mut f = read_fields(&mut r)?;

    let artifact = match family.as_str() {
        "logistic" => ModelArtifact::Classifier(ClassifierModel::Logistic(LogisticModel {
            weights: f.vec_f64("weights")?,
            bias: f.f64("bias")?,
            loss_history: f.vec_f64("loss_history")?,
        })),
        "gnb" => {
            let priors = f.vec_f64("priors")?;
            let mut means = f.mat("means")?;
            let mut variances = f.mat("variances")?;
            if priors.len() != 2 || means.len() != 2 || variances.len() != 2 {
                return Err(corrupt("gaussian model needs exactly two classes"));
            }
            ModelArtifact::Classifier(ClassifierModel::Gnb(GnbModel {
                priors: [priors[0], priors[1]],
                means: [std::mem::take(&mut means[0]), std::mem::take(&mut means[1])],
                variances: [std::mem::take(&mut variances[0]), std::mem::take(&mut variances[1])],
            }))
        }
        "bnb" => {
            let priors = f.vec_f64("priors")?;
            let mut probs = f.mat("feature_probs")?;
            if priors.len() != 2 || probs.len() != 2 {
                return Err(corrupt("bernoulli model needs exactly two classes"));
            }
            ModelArtifact::Classifier(ClassifierModel::Bnb(BnbModel {
                priors: [priors[0], priors[1]],
                feature_probs: [std::mem::take(&mut probs[0]), std::mem::take(&mut probs[1])],
            }))
        }
        "dt" => {
            let n_features = f.usize("n_features")?;
            let rows = f.mat("nodes")?;
            ModelArtifact::Classifier(ClassifierModel::Dt(class_tree_from_rows(n_features, rows)?))
        }
        "rf" => {
            let n_features = f.usize("n_features")?;
            let n_trees = f.usize("n_trees")?;
            let tree_seeds = f.vec_u64("tree_seeds")?;
            if tree_seeds.len() != n_trees || n_trees == 0 {
                return Err(corrupt("forest seed list does not match tree count"));
            }
            let mut trees = Vec::with_capacity(n_trees);
            for i in 0..n_trees {
                trees.push(class_tree_from_rows(n_features, f.mat(&format!("tree_{i}"))?)?);
            }
            ModelArtifact::Classifier(ClassifierModel::Rf(ForestModel { trees, tree_seeds }))
        }
        "knn" => {
            let x = f.mat("x")?;
            let y: Vec<u8> = f
                .vec_u64("y")?
                .into_iter()
                .map(|v| {
                    if v > 1 {
                        Err(corrupt(format!("label {v} is not binary")))
                    } else {
                        Ok(v as u8)
                    }
                })
                .collect::<Result<_, _>>()?;
            if x.len() != y.len() || x.is_empty() {
                return Err(corrupt("stored rows and labels disagree"));
            }
            let metric = match f.string("metric")?.as_str() {
                "euclidean" => KnnMetric::Euclidean,
                "manhattan" => KnnMetric::Manhattan,
                other => return Err(corrupt(format!("unknown metric `{other}`"))),
            };
            ModelArtifact::Classifier(ClassifierModel::Knn(KnnModel {
                x,
                y,
                k: f.usize("k")?,
                metric,
            }))
        }
        "svm" => ModelArtifact::Classifier(ClassifierModel::LinearSvm(SvmModel {
            weights: f.vec_f64("weights")?,
            bias: f.f64("bias")?,
            objective_history: f.vec_f64("objective_history")?,
        })),
        "gbt" => {
            let n_features = f.usize("n_features")?;
            let n_trees = f.usize("n_trees")?;
            let mut trees = Vec::with_capacity(n_trees);
            for i in 0..n_trees {
                trees.push(reg_tree_from_rows(n_features, f.mat(&format!("tree_{i}"))?)?);
            }
            if trees.is_empty() {
                return Err(corrupt("boosted model has no trees"));
            }
            ModelArtifact::Classifier(ClassifierModel::Gbt(GbtModel {
                n_features,
                initial_log_odds: f.f64("initial_log_odds")?,
                learning_rate: f.f64("learning_rate")?,
                trees,
            }))
        }
        "mlp" => {
            let w1 = f.mat("w1")?;
            let b1 = f.vec_f64("b1")?;
            let w2 = f.vec_f64("w2")?;
            if w1.is_empty() || w1.len() != b1.len() || w1.len() != w2.len() {
                return Err(corrupt("hidden layer shapes disagree"));
            }
            ModelArtifact::Classifier(ClassifierModel::Mlp(MlpModel {
                w1,
                b1,
                w2,
                b2: f.f64("b2")?,
                loss_history: f.vec_f64("loss_history")?,
            }))
        }
        "linear" => ModelArtifact::Regressor(RegressorModel::Linear(LinearModel {
            weights: f.vec_f64("weights")?,
            intercept: f.f64("intercept")?,
            feature_names: f.vec_str("feature_names")?,
        })),
        "lstm" => {
            let hidden_size = f.usize("hidden_size")?;
            if hidden_size == 0 {
                return Err(corrupt("hidden_size must be positive"));
            }
            let w_x = gate_array(|q| f.vec_f64(&format!("w_x_{}", ["i", "f", "o", "g"][q])))?;
            let u_h = gate_array(|q| {
                let (rows, cols, data) = f.mat_flat(&format!("u_h_{}", ["i", "f", "o", "g"][q]))?;
                if rows != hidden_size || cols != hidden_size {
                    return Err(corrupt("recurrent matrix shape disagrees with hidden_size"));
                }
                Ok(data)
            })?;
            let b = gate_array(|q| f.vec_f64(&format!("b_{}", ["i", "f", "o", "g"][q])))?;
            for q in 0..4 {
                if w_x[q].len() != hidden_size || b[q].len() != hidden_size {
                    return Err(corrupt("gate vector shape disagrees with hidden_size"));
                }
            }
            let w_out = f.vec_f64("w_out")?;
            if w_out.len() != hidden_size {
                return Err(corrupt("output head shape disagrees with hidden_size"));
            }
            ModelArtifact::Regressor(RegressorModel::Lstm(LstmModel {
                hidden_size,
                window_length: f.usize("window_length")?,
                scale_min: f.f64("scale_min")?,
                scale_max: f.f64("scale_max")?,
                w_x,
                u_h,
                b,
                w_out,
                b_out: f.f64("b_out")?,
                loss_history: f.vec_f64("loss_history")?,
            }))
        }
        "scaler" => {
            let column_names = f.vec_str("column_names")?;
            let min = f.vec_f64("min")?;
            let max = f.vec_f64("max")?;
            if column_names.len() != min.len() || min.len() != max.len() {
                return Err(corrupt("scaler vectors disagree in length"));
            }
            ModelArtifact::Scaler(ScalerParams { column_names, min, max })
        }
        "pca" => {
            let mean = f.vec_f64("mean")?;
            let components = f.mat("components")?;
            if components.iter().any(|row| row.len() != mean.len()) {
                return Err(corrupt("component width disagrees with mean"));
            }
            ModelArtifact::Pca(PcaModel {
                mean,
                components,
                eigenvalues: f.vec_f64("eigenvalues")?,
            })
        }
        other => return Err(corrupt(format!("unknown model family `{other}`"))),
    };
    Ok(artifact)
}

pub fn save_model(artifact: &ModelArtifact, path: &Path) -> Result<(), PersistError> {
    Ok(std::fs::write(path, encode(artifact))?)
}

pub fn load_model(path: &Path) -> Result<ModelArtifact, PersistError> {
    decode(&std::fs::read(path)?)
}
