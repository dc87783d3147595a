//! Random Vector Functional Link network.
//!
//! A single hidden layer with fixed random weights, direct input-to-output
//! links and an output bias. Only the output layer is learned, in closed form,
//! by ridge regression against one-hot targets. The design matrix column order
//! is `[hidden | inputs | 1]`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{DataError, NumericError};
use crate::numerics::{ridge_solve, RidgeForm};

pub const MIN_HIDDEN: usize = 3;
pub const MAX_HIDDEN: usize = 203;
pub const MIN_RIDGE_EXPONENT: i32 = -5;
pub const MAX_RIDGE_EXPONENT: i32 = 14;
/// Exponents `t` of the weight range `S = 2^t`.
pub const SCALE_EXPONENTS: [f64; 7] = [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// `exp(−x²)`
    Radbas,
    Sine,
    /// `max(0, 1 − |x|)`
    Tribas,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Radbas, Activation::Sine, Activation::Tribas];

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Radbas => (-x * x).exp(),
            Activation::Sine => x.sin(),
            Activation::Tribas => (1.0 - x.abs()).max(0.0),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Radbas => "radbas",
            Activation::Sine => "sine",
            Activation::Tribas => "tribas",
        })
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "radbas" => Ok(Activation::Radbas),
            "sine" | "sin" => Ok(Activation::Sine),
            "tribas" => Ok(Activation::Tribas),
            other => Err(format!("unknown activation {other:?}")),
        }
    }
}

/// Elementwise activation.
pub fn activate(values: &[f64], kind: Activation) -> Vec<f64> {
    values.iter().map(|&v| kind.apply(v)).collect()
}

/// Hyperparameters of one network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RvflConfig {
    hidden_neurons: usize,
    ridge_exponent: i32,
    activation: Activation,
    scale_exponent: f64,
}

impl RvflConfig {
    pub fn new(
        hidden_neurons: usize,
        ridge_exponent: i32,
        activation: Activation,
        scale_exponent: f64,
    ) -> Result<Self, DataError> {
        if !(MIN_HIDDEN..=MAX_HIDDEN).contains(&hidden_neurons) {
            return Err(DataError::Invalid(format!(
                "hidden neurons {hidden_neurons} outside {MIN_HIDDEN}..={MAX_HIDDEN}"
            )));
        }
        if !(MIN_RIDGE_EXPONENT..=MAX_RIDGE_EXPONENT).contains(&ridge_exponent) {
            return Err(DataError::Invalid(format!(
                "ridge exponent {ridge_exponent} outside {MIN_RIDGE_EXPONENT}..={MAX_RIDGE_EXPONENT}"
            )));
        }
        if !SCALE_EXPONENTS.contains(&scale_exponent) {
            return Err(DataError::Invalid(format!(
                "scale exponent {scale_exponent} not on the half-step grid -1.5..=1.5"
            )));
        }
        Ok(RvflConfig {
            hidden_neurons,
            ridge_exponent,
            activation,
            scale_exponent,
        })
    }

    pub fn hidden_neurons(&self) -> usize {
        self.hidden_neurons
    }

    pub fn ridge_exponent(&self) -> i32 {
        self.ridge_exponent
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn scale_exponent(&self) -> f64 {
        self.scale_exponent
    }

    /// Ridge parameter `λ = 2^(−ridge_exponent)`.
    pub fn lambda(&self) -> f64 {
        2f64.powi(-self.ridge_exponent)
    }

    /// Weight range `S = 2^scale_exponent`.
    pub fn scale(&self) -> f64 {
        2f64.powf(self.scale_exponent)
    }
}

/// Draws every hyperparameter uniformly from its grid.
pub fn sample_config<R: Rng + ?Sized>(rng: &mut R) -> RvflConfig {
    let hidden_neurons = rng.random_range(MIN_HIDDEN..=MAX_HIDDEN);
    let ridge_exponent = rng.random_range(MIN_RIDGE_EXPONENT..=MAX_RIDGE_EXPONENT);
    let activation = Activation::ALL[rng.random_range(0..Activation::ALL.len())];
    let scale_exponent = SCALE_EXPONENTS[rng.random_range(0..SCALE_EXPONENTS.len())];
    RvflConfig {
        hidden_neurons,
        ridge_exponent,
        activation,
        scale_exponent,
    }
}

/// A trained network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RvflModel {
    config: RvflConfig,
    n_features: usize,
    num_classes: usize,
    /// `d × N`, row-major.
    hidden_weights: Vec<f64>,
    hidden_bias: Vec<f64>,
    /// `(N + d + 1) × C`, row-major.
    output_weights: Vec<f64>,
}

impl RvflModel {
    pub fn config(&self) -> &RvflConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn hidden_weights(&self) -> &[f64] {
        &self.hidden_weights
    }

    pub fn hidden_bias(&self) -> &[f64] {
        &self.hidden_bias
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    /// Width of the design matrix: hidden units, direct links and bias.
    pub fn design_width(&self) -> usize {
        self.config.hidden_neurons + self.n_features + 1
    }

    fn design_row_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let n_hidden = self.config.hidden_neurons;
        out.extend_from_slice(&self.hidden_bias);
        for (xj, wrow) in x.iter().zip(self.hidden_weights.chunks_exact(n_hidden)) {
            for (o, w) in out.iter_mut().zip(wrow) {
                *o += xj * w;
            }
        }
        let act = self.config.activation;
        out.iter_mut().for_each(|v| *v = act.apply(*v));
        out.extend_from_slice(x);
        out.push(1.0);
    }

    /// One row of the design matrix `[activate(xW + b), x, 1]`.
    pub fn design_row(&self, x: &[f64]) -> Result<Vec<f64>, DataError> {
        self.check_dim(x.len())?;
        let mut row = Vec::with_capacity(self.design_width());
        self.design_row_into(x, &mut row);
        Ok(row)
    }

    /// Raw class scores (no softmax); only their order is meaningful.
    pub fn score(&self, x: &[f64]) -> Result<Vec<f64>, DataError> {
        self.check_dim(x.len())?;
        Ok(self.score_unchecked(x))
    }

    pub(crate) fn score_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.design_width());
        self.design_row_into(x, &mut row);
        let c = self.num_classes;
        let mut scores = vec![0.0; c];
        for (dv, wrow) in row.iter().zip(self.output_weights.chunks_exact(c)) {
            for (s, w) in scores.iter_mut().zip(wrow) {
                *s += dv * w;
            }
        }
        scores
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize, DataError> {
        Ok(argmax(&self.score(x)?))
    }

    /// `‖DW − Y‖² + λ‖W‖²` for arbitrary output weights on the given rows.
    pub fn objective(&self, data: &Dataset, rows: &[usize], output_weights: &[f64]) -> f64 {
        let c = self.num_classes;
        let lambda = self.config.lambda();
        let mut total: f64 = output_weights.iter().map(|w| w * w).sum::<f64>() * lambda;
        let mut row = Vec::with_capacity(self.design_width());
        for &i in rows {
            self.design_row_into(data.row(i), &mut row);
            for k in 0..c {
                let pred: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(j, dv)| dv * output_weights[j * c + k])
                    .sum();
                let target = if data.label(i) == k { 1.0 } else { 0.0 };
                total += (pred - target) * (pred - target);
            }
        }
        total
    }

    fn check_dim(&self, found: usize) -> Result<(), DataError> {
        if found != self.n_features {
            return Err(DataError::DimensionMismatch {
                expected: self.n_features,
                found,
            });
        }
        Ok(())
    }
}

/// Trains on `rows` of `data`, choosing the primal or dual closed form by
/// the shape of the design matrix.
pub fn train_rvfl<R: Rng + ?Sized>(
    data: &Dataset,
    rows: &[usize],
    config: RvflConfig,
    rng: &mut R,
) -> Result<RvflModel, NumericError> {
    train_rvfl_with_form(data, rows, config, rng, RidgeForm::Auto)
}

pub fn train_rvfl_with_form<R: Rng + ?Sized>(
    data: &Dataset,
    rows: &[usize],
    config: RvflConfig,
    rng: &mut R,
    form: RidgeForm,
) -> Result<RvflModel, NumericError> {
    if rows.is_empty() {
        return Err(NumericError::Shape("no training rows".into()));
    }
    let d = data.n_features();
    let c = data.num_classes();
    let n_hidden = config.hidden_neurons;
    let s = config.scale();
    let hidden_weights: Vec<f64> = (0..d * n_hidden).map(|_| rng.random_range(-s..=s)).collect();
    let hidden_bias: Vec<f64> = (0..n_hidden).map(|_| rng.random_range(0.0..=s)).collect();
    let mut model = RvflModel {
        config,
        n_features: d,
        num_classes: c,
        hidden_weights,
        hidden_bias,
        output_weights: Vec::new(),
    };

    let width = model.design_width();
    let mut design = DMatrix::<f64>::zeros(rows.len(), width);
    let mut targets = DMatrix::<f64>::zeros(rows.len(), c);
    let mut buf = Vec::with_capacity(width);
    for (r, &i) in rows.iter().enumerate() {
        model.design_row_into(data.row(i), &mut buf);
        for (j, v) in buf.iter().enumerate() {
            design[(r, j)] = *v;
        }
        targets[(r, data.label(i))] = 1.0;
    }
    let solution = ridge_solve(&design, &targets, config.lambda(), form)?;
    let w = solution.weights;
    model.output_weights = (0..width)
        .flat_map(|j| (0..c).map(move |k| (j, k)))
        .map(|(j, k)| w[(j, k)])
        .collect();
    if model.output_weights.iter().any(|v| !v.is_finite()) {
        return Err(NumericError::NonFinite);
    }
    Ok(model)
}

/// Index of the largest value; ties go to the lower index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Indices of the highest and second-highest scores, ties to the lower index.
///
/// # Panics
/// If fewer than two scores are given.
pub fn top_two(scores: &[f64]) -> (usize, usize) {
    assert!(scores.len() >= 2, "top_two needs at least two classes");
    let first = argmax(scores);
    let mut second = usize::from(first == 0);
    for (i, v) in scores.iter().enumerate() {
        if i != first && *v > scores[second] {
            second = i;
        }
    }
    (first, second)
}
