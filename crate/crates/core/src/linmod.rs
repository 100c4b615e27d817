//! One-vs-rest linear classifiers over sparse features.
//!
//! * `ridge`: per label, least squares on ±1 targets with an L2 penalty,
//!   solved by conjugate gradient on the normal equations without forming
//!   `XᵀX`.
//! * `sgd_hinge`: per label, stochastic subgradient descent on the hinge loss
//!   with L2 regularization and learning rate `eta0 / (1 + lambda * t)`.
//! * `linear_svc`: the same SGD trainer with the squared hinge loss, standing
//!   in for a dedicated linear SVM solver.
//!
//! The intercept is an extra constant feature that is not penalized.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TechniqueLabel;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ridge,
    SgdHinge,
    LinearSvc,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ridge" => Ok(Algorithm::Ridge),
            "sgd_hinge" | "sgd" => Ok(Algorithm::SgdHinge),
            "linear_svc" => Ok(Algorithm::LinearSvc),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub ridge_alpha: f64,
    pub fit_intercept: bool,
    /// Stop conjugate gradient once the residual 2-norm drops below this.
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub sgd_epochs: usize,
    pub sgd_eta0: f64,
    /// L2 strength for SGD; also the learning-rate decay constant.
    pub sgd_lambda: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algorithm: Algorithm::Ridge,
            ridge_alpha: 1.0,
            fit_intercept: true,
            cg_tol: 1e-8,
            cg_max_iter: 10_000,
            sgd_epochs: 5,
            sgd_eta0: 0.1,
            sgd_lambda: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.ridge_alpha, "ridge_alpha")?;
        positive(self.cg_tol, "cg_tol")?;
        positive(self.sgd_eta0, "sgd_eta0")?;
        positive(self.sgd_lambda, "sgd_lambda")?;
        if self.sgd_epochs == 0 || self.cg_max_iter == 0 {
            return Err(Error::Config("sgd_epochs and cg_max_iter must be positive".into()));
        }
        if self.sgd_eta0 * self.sgd_lambda >= 1.0 {
            return Err(Error::Config(
                "sgd_eta0 * sgd_lambda must be below 1 for the weight decay step".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    labels: Vec<TechniqueLabel>,
    /// One dense row per label.
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    dim: usize,
}

const MODEL_MAGIC: &str = "propmap-linear-model";
const MODEL_VERSION: u32 = 1;

impl LinearModel {
    pub fn new(
        labels: Vec<TechniqueLabel>,
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
        dim: usize,
    ) -> Result<Self> {
        if labels.is_empty() || weights.len() != labels.len() || biases.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} labels, {} weight rows, {} biases",
                labels.len(),
                weights.len(),
                biases.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| w.len() != dim) {
            return Err(Error::Shape(format!(
                "weight row of length {} for dimension {dim}",
                w.len()
            )));
        }
        if !weights.iter().flatten().chain(&biases).all(|v| v.is_finite()) {
            return Err(Error::Config("model contains non-finite values".into()));
        }
        Ok(LinearModel {
            labels,
            weights,
            biases,
            dim,
        })
    }

    pub fn labels(&self) -> &[TechniqueLabel] {
        &self.labels
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, x: &SparseMatrix) -> Result<()> {
        if x.n_cols() != self.dim {
            return Err(Error::Shape(format!(
                "input has {} columns, model expects {}",
                x.n_cols(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `X Wᵀ + b`, one row per input row, one column per label.
    pub fn decision_scores(&self, x: &SparseMatrix) -> Result<Vec<Vec<f64>>> {
        self.check_dim(x)?;
        Ok(x.rows()
            .map(|row| {
                self.weights
                    .iter()
                    .zip(&self.biases)
                    .map(|(w, b)| row.dot(w) + b)
                    .collect()
            })
            .collect())
    }

    /// Highest-scoring label per row; ties go to the earlier label.
    pub fn predict(&self, x: &SparseMatrix) -> Result<Vec<TechniqueLabel>> {
        Ok(self
            .decision_scores(x)?
            .iter()
            .map(|scores| {
                let mut best = 0;
                for (i, &s) in scores.iter().enumerate() {
                    if s > scores[best] {
                        best = i;
                    }
                }
                self.labels[best]
            })
            .collect())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("{MODEL_MAGIC}\t{MODEL_VERSION}\ndim\t{}\n", self.dim);
        for ((label, w), b) in self.labels.iter().zip(&self.weights).zip(&self.biases) {
            let _ = write!(out, "{label}\t{b}");
            for v in w {
                let _ = write!(out, "\t{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(content: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::format(format!("model:{line}"), msg);
        let mut lines = content.lines();
        let header = lines.next().unwrap_or("");
        if header != format!("{MODEL_MAGIC}\t{MODEL_VERSION}") {
            return Err(err(1, format!("unsupported model header {header:?}")));
        }
        let dim: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("dim\t"))
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| err(2, "expected `dim<TAB><n>`".into()))?;
        let (mut labels, mut weights, mut biases) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let mut cols = line.split('\t');
            let label: TechniqueLabel = cols.next().unwrap_or("").parse()?;
            let nums: Vec<f64> = cols
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(i + 3, e.to_string()))?;
            if nums.len() != dim + 1 {
                return Err(err(i + 3, format!("expected {} values, found {}", dim + 1, nums.len())));
            }
            labels.push(label);
            biases.push(nums[0]);
            weights.push(nums[1..].to_vec());
        }
        Self::new(labels, weights, biases, dim)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&content)
    }
}

/// Distinct labels of `y`, in canonical label order.
fn label_set(y: &[TechniqueLabel]) -> Vec<TechniqueLabel> {
    let mut labels = y.to_vec();
    labels.sort();
    labels.dedup();
    labels
}

pub fn train(x: &SparseMatrix, y: &[TechniqueLabel], config: &TrainConfig) -> Result<LinearModel> {
    config.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::Shape(format!("need at least 2 training rows, got {}", y.len())));
    }
    let labels = label_set(y);
    if labels.len() < 2 {
        return Err(Error::DegenerateLabels(labels[0].to_string()));
    }

    let targets: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| y.iter().map(|&yi| if yi == l { 1.0 } else { -1.0 }).collect())
        .collect();

    let (weights, biases) = match config.algorithm {
        Algorithm::Ridge => targets
            .iter()
            .map(|t| ridge_binary(x, t, config))
            .unzip(),
        Algorithm::SgdHinge | Algorithm::LinearSvc => {
            let loss = if config.algorithm == Algorithm::SgdHinge {
                Loss::Hinge
            } else {
                Loss::SquaredHinge
            };
            let orders = epoch_orders(x.n_rows(), config.sgd_epochs, config.seed);
            targets
                .iter()
                .map(|t| sgd_binary(x, t, loss, &orders, config))
                .unzip()
        }
    };
    LinearModel::new(labels, weights, biases, x.n_cols())
}

/// Matrix-free `(X̃ᵀX̃ + αD) p` where `X̃ = [X 1]` when fitting an intercept
/// and `D` leaves the intercept unpenalized. `p` carries the intercept last.
fn normal_matvec(x: &SparseMatrix, alpha: f64, fit_intercept: bool, p: &[f64]) -> Vec<f64> {
    let d = x.n_cols();
    let (pw, pb) = (&p[..d], if fit_intercept { p[d] } else { 0.0 });
    let xp: Vec<f64> = x.rows().map(|r| r.dot(pw) + pb).collect();
    let mut out = x.t_mul_vec(&xp);
    for (o, &w) in out.iter_mut().zip(pw) {
        *o += alpha * w;
    }
    if fit_intercept {
        out.push(xp.iter().sum());
    }
    out
}

fn normal_rhs(x: &SparseMatrix, t: &[f64], fit_intercept: bool) -> Vec<f64> {
    let mut rhs = x.t_mul_vec(t);
    if fit_intercept {
        rhs.push(t.iter().sum());
    }
    rhs
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn ridge_binary(x: &SparseMatrix, t: &[f64], config: &TrainConfig) -> (Vec<f64>, f64) {
    let d = x.n_cols();
    let n = d + usize::from(config.fit_intercept);
    let alpha = config.ridge_alpha;
    let rhs = normal_rhs(x, t, config.fit_intercept);
    let mut sol = vec![0.0; n];

    // The recurrence residual drifts from the true one; restart from the
    // current iterate until the true residual meets the tolerance.
    for _restart in 0..4 {
        let ax = normal_matvec(x, alpha, config.fit_intercept, &sol);
        let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut rr = dot(&r, &r);
        if rr.sqrt() <= config.cg_tol {
            break;
        }
        let mut p = r.clone();
        for _ in 0..config.cg_max_iter {
            let ap = normal_matvec(x, alpha, config.fit_intercept, &p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let step = rr / pap;
            for i in 0..n {
                sol[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            let rr_new = dot(&r, &r);
            if rr_new.sqrt() <= config.cg_tol {
                break;
            }
            let beta = rr_new / rr;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            rr = rr_new;
        }
    }
    let bias = if config.fit_intercept { sol.pop().unwrap() } else { 0.0 };
    (sol, bias)
}

/// Infinity norm of the ridge normal-equation residual
/// `(X̃ᵀX̃ + αD) [w; b] − X̃ᵀt` at a given solution.
pub fn ridge_residual_inf(
    x: &SparseMatrix,
    targets: &[f64],
    alpha: f64,
    fit_intercept: bool,
    weights: &[f64],
    bias: f64,
) -> f64 {
    let mut sol = weights.to_vec();
    if fit_intercept {
        sol.push(bias);
    }
    let a = normal_matvec(x, alpha, fit_intercept, &sol);
    let b = normal_rhs(x, targets, fit_intercept);
    a.iter()
        .zip(&b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Loss {
    Hinge,
    SquaredHinge,
}

/// One shuffled visiting order per epoch, shared by every label.
fn epoch_orders(n: usize, epochs: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..epochs)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order
        })
        .collect()
}

fn sgd_binary(
    x: &SparseMatrix,
    t: &[f64],
    loss: Loss,
    orders: &[Vec<usize>],
    config: &TrainConfig,
) -> (Vec<f64>, f64) {
    let lambda = config.sgd_lambda;
    // w = scale * v, so the decay step is O(1)
    let mut v = vec![0.0; x.n_cols()];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut step = 0u64;
    for order in orders {
        for &i in order {
            let eta = config.sgd_eta0 / (1.0 + lambda * step as f64);
            step += 1;
            let row = x.row(i);
            let y = t[i];
            let margin = y * (scale * row.dot(&v) + bias);
            scale *= 1.0 - eta * lambda;
            if margin < 1.0 {
                let g = match loss {
                    Loss::Hinge => y,
                    Loss::SquaredHinge => 2.0 * y * (1.0 - margin),
                };
                row.axpy_into(eta * g / scale, &mut v);
                if config.fit_intercept {
                    bias += eta * g;
                }
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
    }
    v.iter_mut().for_each(|w| *w *= scale);
    (v, bias)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TechniqueLabel::{Doubt, FlagWaving, Slogans};

    fn separable() -> (SparseMatrix, Vec<TechniqueLabel>) {
        let x = SparseMatrix::from_dense(&[
            vec![2.0, 1.0],
            vec![1.5, 2.0],
            vec![-1.0, -2.0],
            vec![-2.0, -0.5],
        ])
        .unwrap();
        (x, vec![Doubt, Doubt, Slogans, Slogans])
    }

    fn all_algorithms() -> Vec<TrainConfig> {
        vec![
            TrainConfig::default(),
            TrainConfig {
                algorithm: Algorithm::SgdHinge,
                sgd_epochs: 50,
                sgd_eta0: 0.5,
                ..Default::default()
            },
            TrainConfig {
                algorithm: Algorithm::LinearSvc,
                sgd_epochs: 50,
                sgd_eta0: 0.1,
                ..Default::default()
            },
        ]
    }

    #[test]
    fn orthogonal_one_hot_docs() {
        let x = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let y = vec![Doubt, FlagWaving];
        for cfg in all_algorithms() {
            let m = train(&x, &y, &cfg).unwrap();
            assert_eq!(m.predict(&x).unwrap(), y, "{:?}", cfg.algorithm);
        }
    }

    #[test]
    fn separable_training_accuracy() {
        let (x, y) = separable();
        for cfg in all_algorithms() {
            let m = train(&x, &y, &cfg).unwrap();
            assert_eq!(m.predict(&x).unwrap(), y, "{:?}", cfg.algorithm);
            for (scores, label) in m.decision_scores(&x).unwrap().iter().zip(&y) {
                let k = m.labels().iter().position(|l| l == label).unwrap();
                assert!(scores.iter().enumerate().all(|(j, &s)| j == k || s < scores[k]));
            }
        }
    }

    #[test]
    fn sgd_hinge_reaches_zero_loss_on_separable_data() {
        let (x, y) = separable();
        let cfg = TrainConfig {
            algorithm: Algorithm::SgdHinge,
            sgd_epochs: 50,
            sgd_eta0: 0.5,
            sgd_lambda: 1e-4,
            ..Default::default()
        };
        let m = train(&x, &y, &cfg).unwrap();
        let scores = m.decision_scores(&x).unwrap();
        for (k, label) in m.labels().iter().enumerate() {
            let hinge: f64 = scores
                .iter()
                .zip(&y)
                .map(|(s, yi)| {
                    let t = if yi == label { 1.0 } else { -1.0 };
                    (1.0 - t * s[k]).max(0.0)
                })
                .sum();
            assert_eq!(hinge, 0.0, "label {label}");
        }
    }

    #[test]
    fn shape_and_label_errors() {
        let x = SparseMatrix::from_dense(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(matches!(
            train(&x, &[Doubt, Slogans], &TrainConfig::default()),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            train(&x, &[Doubt, Doubt, Doubt], &TrainConfig::default()),
            Err(Error::DegenerateLabels(_))
        ));
        let (x2, y2) = separable();
        let m = train(&x2, &y2, &TrainConfig::default()).unwrap();
        assert!(matches!(m.predict(&x), Err(Error::Shape(_))));
    }

    #[test]
    fn decision_scores_are_linear() {
        let (x, y) = separable();
        let m = train(
            &x,
            &y,
            &TrainConfig {
                fit_intercept: false,
                ..Default::default()
            },
        )
        .unwrap();
        let zero = SparseMatrix::from_dense(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(m.decision_scores(&zero).unwrap()[0], m.biases());

        let row = SparseMatrix::from_dense(&[vec![0.7, -0.3]]).unwrap();
        let doubled = SparseMatrix::from_dense(&[vec![1.4, -0.6]]).unwrap();
        let s1 = &m.decision_scores(&row).unwrap()[0];
        let s2 = &m.decision_scores(&doubled).unwrap()[0];
        for (a, b) in s1.iter().zip(s2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
        assert_eq!(m.predict(&row).unwrap(), m.predict(&doubled).unwrap());
    }

    #[test]
    fn zero_model_predicts_first_label() {
        let m = LinearModel::new(
            vec![FlagWaving, Doubt, Slogans],
            vec![vec![0.0; 2]; 3],
            vec![0.0; 3],
            2,
        )
        .unwrap();
        let x = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(m.predict(&x).unwrap(), vec![FlagWaving, FlagWaving]);
        let one = SparseMatrix::from_dense(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(m.predict(&one).unwrap().len(), 1);
    }

    #[test]
    fn ridge_weights_shrink_with_alpha() {
        let (x, y) = separable();
        let norms: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&alpha| {
                let m = train(
                    &x,
                    &y,
                    &TrainConfig {
                        ridge_alpha: alpha,
                        ..Default::default()
                    },
                )
                .unwrap();
                m.weights()[0].iter().map(|w| w * w).sum::<f64>().sqrt()
            })
            .collect();
        assert!(norms[0] > norms[1] && norms[1] > norms[2], "{norms:?}");
    }

    #[test]
    fn model_tsv_round_trip() {
        let (x, y) = separable();
        for cfg in all_algorithms() {
            let m = train(&x, &y, &cfg).unwrap();
            let back = LinearModel::from_tsv(&m.to_tsv()).unwrap();
            assert_eq!(back, m);
        }
        assert!(LinearModel::from_tsv("other\t1\n").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig {
            ridge_alpha: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            sgd_eta0: 10.0,
            sgd_lambda: 0.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert_eq!("linear_svc".parse::<Algorithm>().unwrap(), Algorithm::LinearSvc);
        assert!("svm".parse::<Algorithm>().is_err());
    }
}
