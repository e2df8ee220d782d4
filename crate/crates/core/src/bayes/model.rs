use std::path::Path;

use crate::error::{Error, Result};

use super::mcmc::LogTarget;

/// Candidate predictor columns of the Pima file, in file order.
pub const PIMA_PREDICTORS: [&str; 7] = ["npreg", "glu", "bp", "skin", "bmi", "ped", "age"];
/// Predictors entering the model: pregnancies, plasma glucose, body mass
/// index, diabetes pedigree, age.
pub const PIMA_SELECTED: [&str; 5] = ["npreg", "glu", "bmi", "ped", "age"];
/// Binary outcome column; accepts 0/1 or No/Yes.
pub const PIMA_OUTCOME: &str = "type";

const PIMA_ROWS: usize = 532;

/// Logistic regression with a N(0, I) prior on the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// Row-major design, first column the intercept.
    design: Vec<f64>,
    response: Vec<f64>,
    columns: Vec<String>,
}

fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

impl LogisticModel {
    /// Builds the model from raw predictor columns: each column is
    /// standardized to mean 0 and sample standard deviation 1, and an
    /// intercept column is prepended.
    pub fn from_columns(
        names: &[&str],
        predictors: &[Vec<f64>],
        response: Vec<f64>,
    ) -> Result<Self> {
        let rows = response.len();
        if rows < 2 {
            return Err(Error::Data("at least two observations are required".into()));
        }
        if names.len() != predictors.len() {
            return Err(Error::Data(
                "one name per predictor column is required".into(),
            ));
        }
        if let Some(y) = response.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::Data(format!("response must be 0 or 1, found {y}")));
        }
        let mut standardized = Vec::with_capacity(predictors.len());
        for (name, col) in names.iter().zip(predictors) {
            if col.len() != rows {
                return Err(Error::Data(format!(
                    "column {name} has {} rows, expected {rows}",
                    col.len()
                )));
            }
            let mean = crate::stats::mean(col);
            let sd = crate::stats::variance(col).sqrt();
            if !(sd > 0.0) {
                return Err(Error::Data(format!("column {name} is constant")));
            }
            standardized.push(col.iter().map(|v| (v - mean) / sd).collect::<Vec<_>>());
        }
        let p = predictors.len() + 1;
        let mut design = Vec::with_capacity(rows * p);
        for r in 0..rows {
            design.push(1.0);
            design.extend(standardized.iter().map(|c| c[r]));
        }
        let mut columns = vec!["intercept".to_string()];
        columns.extend(names.iter().map(|s| s.to_string()));
        Ok(Self {
            design,
            response,
            columns,
        })
    }

    pub fn rows(&self) -> usize {
        self.response.len()
    }

    /// Number of coefficients, intercept included.
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn design_row(&self, r: usize) -> &[f64] {
        let p = self.dim();
        &self.design[r * p..(r + 1) * p]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Log posterior up to an additive constant, and its gradient.
    pub fn log_post_and_grad(&self, beta: &[f64]) -> (f64, Vec<f64>) {
        let p = self.dim();
        assert_eq!(beta.len(), p, "coefficient vector has wrong length");
        let mut logp = -0.5 * beta.iter().map(|b| b * b).sum::<f64>();
        let mut grad: Vec<f64> = beta.iter().map(|b| -b).collect();
        for (row, &y) in self.design.chunks_exact(p).zip(&self.response) {
            let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            logp += y * eta - softplus(eta);
            let resid = y - logistic(eta);
            for (g, a) in grad.iter_mut().zip(row) {
                *g += a * resid;
            }
        }
        (logp, grad)
    }
}

impl LogTarget for LogisticModel {
    fn dim(&self) -> usize {
        LogisticModel::dim(self)
    }

    fn log_density_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.log_post_and_grad(x)
    }
}

fn parse_outcome(raw: &str, line: usize) -> Result<f64> {
    match raw.trim() {
        "1" | "Yes" | "yes" => Ok(1.0),
        "0" | "No" | "no" => Ok(0.0),
        other => Err(Error::Data(format!(
            "line {line}: outcome must be 0/1 or No/Yes, found {other:?}"
        ))),
    }
}

/// Loads the 532-row Pima file (header row; columns `npreg, glu, bp, skin,
/// bmi, ped, age, type`) and builds the five-predictor model.
pub fn load_pima(path: impl AsRef<Path>) -> Result<LogisticModel> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .clone();
    let index_of = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Data(format!("{}: missing column {name:?}", path.display())))
    };
    for name in PIMA_PREDICTORS {
        index_of(name)?;
    }
    let outcome_idx = index_of(PIMA_OUTCOME)?;
    let selected: Vec<usize> = PIMA_SELECTED
        .iter()
        .map(|n| index_of(n))
        .collect::<Result<_>>()?;

    let mut columns = vec![Vec::new(); selected.len()];
    let mut response = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record =
            record.map_err(|e| Error::Data(format!("{}: line {line}: {e}", path.display())))?;
        for (col, &idx) in columns.iter_mut().zip(&selected) {
            let raw = record.get(idx).unwrap_or("");
            let v: f64 = raw.trim().parse().map_err(|_| {
                Error::Data(format!(
                    "{}: line {line}: cannot parse {raw:?}",
                    path.display()
                ))
            })?;
            col.push(v);
        }
        response.push(parse_outcome(record.get(outcome_idx).unwrap_or(""), line)?);
    }
    if response.len() != PIMA_ROWS {
        return Err(Error::Data(format!(
            "{}: expected {PIMA_ROWS} rows, found {}",
            path.display(),
            response.len()
        )));
    }
    LogisticModel::from_columns(&PIMA_SELECTED, &columns, response)
}
