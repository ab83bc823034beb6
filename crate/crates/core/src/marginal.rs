//! Marginal likelihoods and Bayes factors for Gaussian linear models.
//!
//! Every model is scored against the base model: `log_marginal(M_B) = 0`.
//! The default evaluator is a unit-information g-prior on the non-base
//! coefficients after residualizing on the base columns, with flat priors on
//! the base coefficients and on `σ²`:
//!
//! ```text
//! log BF(M : M_B) = (n − k_B − k)/2 · ln(1 + g) − (n − k_B)/2 · ln(1 + g(1 − R²))
//! ```
//!
//! where `k_B` is the rank of the base design, `k` the extra rank added by
//! `Υ(M)`, and `R² = 1 − RSS_M / RSS_B`.
//!
//! [`ModelScorer`] factors the full design once, `X = QR`, so that scoring a
//! model only needs a small pivoted QR of the matching columns of `R`.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Qr;
use crate::space::{Model, ModelSpace};
use crate::term::Term;

/// Values of one term at every row of `mains`.
pub fn term_column(mains: &DMatrix<f64>, term: &Term) -> Vec<f64> {
    let n = mains.nrows();
    let mut col = vec![1.0; n];
    for j in 0..term.dim() {
        let e = term.exponent(j) as i32;
        if e == 0 {
            continue;
        }
        for (i, v) in col.iter_mut().enumerate() {
            *v *= mains[(i, j)].powi(e);
        }
    }
    col
}

/// Design matrix with one column per term, in the given order.
pub fn design_matrix(mains: &DMatrix<f64>, terms: &[Term]) -> DMatrix<f64> {
    let n = mains.nrows();
    let mut data = Vec::with_capacity(n * terms.len());
    for t in terms {
        data.extend(term_column(mains, t));
    }
    DMatrix::from_vec(n, terms.len(), data)
}

/// Columns `M_B ∪ Υ(M)` in canonical term order.
pub fn build_design(dataset: &Dataset, space: &ModelSpace, m: &Model) -> Result<DMatrix<f64>> {
    check_dims(dataset, space)?;
    if !space.is_valid(m) {
        return Err(Error::InvalidModel);
    }
    Ok(design_matrix(dataset.mains(), &space.model_terms(m)))
}

/// Base terms, then the nodes of `m` by index.
fn model_columns(space: &ModelSpace, m: &Model) -> Vec<Term> {
    let mut terms = space.base_terms().to_vec();
    terms.extend(m.iter().map(|i| space.term(i)));
    terms
}

fn check_dims(dataset: &Dataset, space: &ModelSpace) -> Result<()> {
    if dataset.p() != space.p() {
        return Err(Error::DimensionMismatch {
            expected: space.p(),
            found: dataset.p(),
        });
    }
    Ok(())
}

/// Least-squares summaries a marginal likelihood is computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionStats {
    pub n: usize,
    pub rank_base: usize,
    /// Rank added by the non-base columns.
    pub rank_extra: usize,
    pub rss_base: f64,
    pub rss_model: f64,
}

/// A rule turning regression summaries into `log BF(M : M_B)`.
pub trait MarginalEvaluator: Send + Sync + fmt::Debug {
    fn log_bf(&self, stats: &RegressionStats) -> Result<f64>;

    /// Factor applied to the least-squares fit of the non-base columns in
    /// the posterior mean.
    fn shrinkage(&self, n: usize) -> f64;

    fn describe(&self) -> String;
}

/// Zellner g-prior; `g = n` unless set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GPrior {
    g: Option<f64>,
}

impl GPrior {
    pub fn unit_information() -> Self {
        Self { g: None }
    }

    pub fn with_g(g: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Config(format!("g must be positive, got {g}")));
        }
        Ok(Self { g: Some(g) })
    }

    pub fn g(&self, n: usize) -> f64 {
        self.g.unwrap_or(n as f64)
    }
}

impl MarginalEvaluator for GPrior {
    fn log_bf(&self, s: &RegressionStats) -> Result<f64> {
        let dim = s.rank_base + s.rank_extra;
        if s.n <= dim {
            return Err(Error::Saturated { n: s.n, rank: dim });
        }
        let g = self.g(s.n);
        let one_minus_r2 = if s.rss_base > 0.0 {
            (s.rss_model / s.rss_base).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let n = s.n as f64;
        let kb = s.rank_base as f64;
        let k = s.rank_extra as f64;
        Ok((n - kb - k) / 2.0 * g.ln_1p() - (n - kb) / 2.0 * (g * one_minus_r2).ln_1p())
    }

    fn shrinkage(&self, n: usize) -> f64 {
        let g = self.g(n);
        g / (1.0 + g)
    }

    fn describe(&self) -> String {
        match self.g {
            Some(g) => format!("g-prior (g = {g})"),
            None => "g-prior (g = n)".into(),
        }
    }
}

/// Thread-safe map from model to log marginal.
#[derive(Debug, Default)]
pub struct MarginalCache {
    map: RwLock<HashMap<Model, f64>>,
}

impl MarginalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, m: &Model) -> Option<f64> {
        self.map.read().expect("cache lock poisoned").get(m).copied()
    }

    /// Inserting a key again must carry the same value within `1e-9`.
    pub fn insert(&self, m: Model, value: f64) -> Result<()> {
        let mut map = self.map.write().expect("cache lock poisoned");
        match map.get(&m) {
            Some(&old) if (old - value).abs() > 1e-9 => Err(Error::CacheConflict { old, new: value }),
            Some(_) => Ok(()),
            None => {
                map.insert(m, value);
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Scores models of one space on one dataset.
#[derive(Debug)]
pub struct ModelScorer<'a> {
    space: &'a ModelSpace,
    n: usize,
    /// Rows kept from the triangular factor, `min(n, columns)`.
    rows: usize,
    base_cols: usize,
    /// Upper-trapezoidal factor of `[X_B | X_Υ(M_F)]`, column-major.
    r: Vec<f64>,
    /// Leading `rows` entries of `Qᵀy`.
    z: Vec<f64>,
    /// Squared norm of the remaining entries of `Qᵀy`.
    r0: f64,
    rank_base: usize,
    rss_base: f64,
    evaluator: Box<dyn MarginalEvaluator>,
    cache: Option<MarginalCache>,
}

impl<'a> ModelScorer<'a> {
    pub fn new<E>(dataset: &Dataset, space: &'a ModelSpace, evaluator: E) -> Result<Self>
    where
        E: MarginalEvaluator + 'static,
    {
        check_dims(dataset, space)?;
        let n = dataset.n();
        let full = design_matrix(dataset.mains(), &model_columns(space, &space.full_model()));
        let cols = full.ncols();
        let qr = Qr::new(full.as_slice().to_vec(), n, cols, false);
        let mut qty = dataset.y().to_vec();
        qr.apply_qt(&mut qty);
        let rows = n.min(cols);
        let mut r = vec![0.0; rows * cols];
        for j in 0..cols {
            for i in 0..rows.min(j + 1) {
                r[j * rows + i] = qr.r(i, j);
            }
        }
        let r0 = qty[rows..].iter().map(|v| v * v).sum();
        let mut scorer = Self {
            space,
            n,
            rows,
            base_cols: space.base_terms().len(),
            r,
            z: qty[..rows].to_vec(),
            r0,
            rank_base: 0,
            rss_base: 0.0,
            evaluator: Box::new(evaluator),
            cache: Some(MarginalCache::new()),
        };
        let (rank_base, rss_base) = scorer.fit(&Model::empty());
        if n <= rank_base {
            return Err(Error::Saturated { n, rank: rank_base });
        }
        scorer.rank_base = rank_base;
        scorer.rss_base = rss_base;
        Ok(scorer)
    }

    /// Turns the cache on or off.
    pub fn with_cache(mut self, enabled: bool) -> Self {
        self.cache = enabled.then(MarginalCache::new);
        self
    }

    pub fn space(&self) -> &'a ModelSpace {
        self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn evaluator(&self) -> &dyn MarginalEvaluator {
        self.evaluator.as_ref()
    }

    pub fn cache(&self) -> Option<&MarginalCache> {
        self.cache.as_ref()
    }

    fn columns(&self, m: &Model) -> Vec<usize> {
        (0..self.base_cols)
            .chain(m.iter().map(|i| self.base_cols + i))
            .collect()
    }

    fn sub_qr(&self, cols: &[usize]) -> Qr {
        let mut a = Vec::with_capacity(self.rows * cols.len());
        for &c in cols {
            a.extend_from_slice(&self.r[c * self.rows..(c + 1) * self.rows]);
        }
        Qr::new(a, self.rows, cols.len(), true)
    }

    /// Rank and residual sum of squares of `M_B ∪ Υ(m)`.
    fn fit(&self, m: &Model) -> (usize, f64) {
        let qr = self.sub_qr(&self.columns(m));
        let mut z = self.z.clone();
        qr.apply_qt(&mut z);
        let rank = qr.rank();
        (rank, self.r0 + z[rank..].iter().map(|v| v * v).sum::<f64>())
    }

    pub fn stats(&self, m: &Model) -> RegressionStats {
        let (rank, rss) = self.fit(m);
        RegressionStats {
            n: self.n,
            rank_base: self.rank_base,
            rank_extra: rank.saturating_sub(self.rank_base),
            rss_base: self.rss_base,
            rss_model: rss,
        }
    }

    /// `log BF(M : M_B)`.
    pub fn log_marginal(&self, m: &Model) -> Result<f64> {
        if !self.space.is_valid(m) {
            return Err(Error::InvalidModel);
        }
        if m.is_empty() {
            return Ok(0.0);
        }
        if let Some(v) = self.cache.as_ref().and_then(|c| c.get(m)) {
            return Ok(v);
        }
        let v = self.evaluator.log_bf(&self.stats(m))?;
        if let Some(c) = &self.cache {
            c.insert(*m, v)?;
        }
        Ok(v)
    }

    /// Scores several models in parallel; results follow the input order.
    pub fn log_marginals(&self, models: &[Model]) -> Result<Vec<f64>> {
        models.par_iter().map(|m| self.log_marginal(m)).collect()
    }

    /// Posterior-mean coefficients on the base columns followed by the nodes
    /// of `m` in index order: the
    /// least-squares fit shrunk toward the base-only fit.
    pub fn coefficients(&self, m: &Model) -> Result<Vec<f64>> {
        if !self.space.is_valid(m) {
            return Err(Error::InvalidModel);
        }
        let cols = self.columns(m);
        let full = self.sub_qr(&cols).solve(&self.z);
        let base = self.sub_qr(&cols[..self.base_cols]).solve(&self.z);
        let s = if m.is_empty() {
            0.0
        } else {
            self.evaluator.shrinkage(self.n)
        };
        Ok(full
            .iter()
            .enumerate()
            .map(|(j, &b)| s * b + (1.0 - s) * base.get(j).copied().unwrap_or(0.0))
            .collect())
    }

    /// Posterior-mean prediction at `mains`, which must already be coded the
    /// same way as the training mains.
    pub fn predict(&self, m: &Model, mains: &DMatrix<f64>) -> Result<Vec<f64>> {
        if mains.ncols() != self.space.p() {
            return Err(Error::DimensionMismatch {
                expected: self.space.p(),
                found: mains.ncols(),
            });
        }
        let beta = self.coefficients(m)?;
        let x = design_matrix(mains, &model_columns(self.space, m));
        Ok((0..x.nrows())
            .map(|i| (0..x.ncols()).map(|j| x[(i, j)] * beta[j]).sum())
            .collect())
    }
}

/// `log BF(M : M_B)` fitted directly on the `n`-row designs, without the
/// shared factorization.
pub fn log_bf_direct(
    dataset: &Dataset,
    space: &ModelSpace,
    m: &Model,
    evaluator: &dyn MarginalEvaluator,
) -> Result<f64> {
    let n = dataset.n();
    let fit = |x: DMatrix<f64>| {
        let qr = Qr::new(x.as_slice().to_vec(), n, x.ncols(), true);
        (qr.rank(), qr.rss(dataset.y()))
    };
    let (rank_base, rss_base) = fit(build_design(dataset, space, &Model::empty())?);
    let (rank, rss_model) = fit(build_design(dataset, space, m)?);
    evaluator.log_bf(&RegressionStats {
        n,
        rank_base,
        rank_extra: rank.saturating_sub(rank_base),
        rss_base,
        rss_model,
    })
}

/// `β′X′(I − H_M)Xβ / (nσ²)`: the share of the true mean `Σ β_α x^α` left
/// unexplained by the columns of `m`.
pub fn directed_distance(
    dataset: &Dataset,
    space: &ModelSpace,
    truth: &[(Term, f64)],
    m: &Model,
    sigma2: f64,
) -> Result<f64> {
    let n = dataset.n();
    let mut mean = vec![0.0; n];
    for (t, b) in truth {
        if t.dim() != dataset.p() {
            return Err(Error::DimensionMismatch {
                expected: dataset.p(),
                found: t.dim(),
            });
        }
        for (acc, v) in mean.iter_mut().zip(term_column(dataset.mains(), t)) {
            *acc += b * v;
        }
    }
    let x = build_design(dataset, space, m)?;
    let qr = Qr::new(x.as_slice().to_vec(), n, x.ncols(), true);
    Ok(qr.rss(&mean) / (n as f64 * sigma2))
}
