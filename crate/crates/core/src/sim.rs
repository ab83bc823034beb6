//! Simulation designs, selection scores and the concentration experiments.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimate::{exact_posterior, tvd, PosteriorTable};
use crate::marginal::{term_column, GPrior, ModelScorer};
use crate::prior::{ModelPrior, PriorSpec};
use crate::sampler::{self, SamplerConfig};
use crate::space::{Heredity, Model, ModelSpace};
use crate::term::Term;

/// How signal strength varies with term order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Allocation {
    /// Same coefficient at every order.
    Equal,
    /// Halved at each higher order.
    Decreasing,
    /// Doubled at each higher order.
    Increasing,
}

impl Allocation {
    /// Unscaled coefficient of a term of the given order.
    pub fn weight(self, order: u32) -> f64 {
        let o = order as i32;
        match self {
            Allocation::Equal => 1.0,
            Allocation::Decreasing => 2f64.powi(1 - o),
            Allocation::Increasing => 2f64.powi(o - 1),
        }
    }
}

impl FromStr for Allocation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equal" => Ok(Self::Equal),
            "decreasing" => Ok(Self::Decreasing),
            "increasing" => Ok(Self::Increasing),
            _ => Err(Error::Config(format!("unknown allocation {s:?}"))),
        }
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Allocation::Equal => "equal",
            Allocation::Decreasing => "decreasing",
            Allocation::Increasing => "increasing",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign {
    pub n: usize,
    /// `Var̂(X_T β) / σ²` with `σ² = 1`.
    pub snr: f64,
    pub allocation: Allocation,
    /// Terms with nonzero coefficients; they need not satisfy any heredity
    /// condition.
    pub true_terms: Vec<Term>,
}

impl SimDesign {
    pub fn validate(&self, space: &ModelSpace) -> Result<()> {
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::Config(format!("snr must be positive, got {}", self.snr)));
        }
        let cols = space.base_terms().len() + space.node_count();
        if self.n <= cols {
            return Err(Error::Config(format!(
                "n = {} must exceed the {cols} columns of the full model",
                self.n
            )));
        }
        if let Some(t) = self.true_terms.iter().find(|t| t.dim() != space.p()) {
            return Err(Error::DimensionMismatch {
                expected: space.p(),
                found: t.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Simulated {
    pub dataset: Dataset,
    /// Realized coefficients of the true terms.
    pub coefficients: Vec<(Term, f64)>,
}

/// Draws standard normal mains and `y = X_T β + ε`, `ε ~ N(0, I)`, with `β`
/// rescaled so that the sample variance of `X_T β` equals the SNR.
pub fn generate<R: Rng + ?Sized>(design: &SimDesign, space: &ModelSpace, rng: &mut R) -> Result<Simulated> {
    design.validate(space)?;
    let n = design.n;
    let p = space.p();
    let data: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    let mains = DMatrix::from_vec(n, p, data);
    let mut mean = vec![0.0; n];
    let pattern: Vec<f64> = design
        .true_terms
        .iter()
        .map(|t| design.allocation.weight(t.order()))
        .collect();
    for (t, b) in design.true_terms.iter().zip(&pattern) {
        for (acc, v) in mean.iter_mut().zip(term_column(&mains, t)) {
            *acc += b * v;
        }
    }
    let mu = mean.iter().sum::<f64>() / n as f64;
    let var = mean.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64;
    let c = if var > 0.0 { (design.snr / var).sqrt() } else { 0.0 };
    let y = mean
        .iter()
        .map(|m| c * m + rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(Simulated {
        dataset: Dataset::new(y, mains)?,
        coefficients: design
            .true_terms
            .iter()
            .copied()
            .zip(pattern.iter().map(|b| c * b))
            .collect(),
    })
}

/// Seed of replication `rep`.
pub fn replication_seed(seed: u64, rep: usize) -> u64 {
    seed.wrapping_add((rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Nodes of the space that appear among `terms`.
pub fn true_model(space: &ModelSpace, terms: &[Term]) -> Model {
    Model::from_indices(terms.iter().filter_map(|t| space.node_index(t)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionScore {
    pub tp_rate: f64,
    pub fp_rate: f64,
    /// Renormalized probability; 0 when the true model was never evaluated.
    pub true_model_prob: f64,
    pub true_model_rank: Option<usize>,
    pub found: bool,
}

/// True- and false-positive rates of a selected model.
pub fn selection_rates(selected: &Model, truth: &Model, space: &ModelSpace) -> (f64, f64) {
    let tp = if truth.is_empty() {
        1.0
    } else {
        selected.intersection(truth).len() as f64 / truth.len() as f64
    };
    let negatives = space.full_model().difference(truth).len();
    let fp = if negatives == 0 {
        0.0
    } else {
        selected.difference(truth).len() as f64 / negatives as f64
    };
    (tp, fp)
}

pub fn score(table: &PosteriorTable, truth: &Model, space: &ModelSpace) -> Result<SelectionScore> {
    let hpm = table.hpm().ok_or(Error::EmptyTable)?;
    let (tp_rate, fp_rate) = selection_rates(&hpm, truth, space);
    let p = table.renormalize()?;
    let rank = table.rank_of(truth);
    Ok(SelectionScore {
        tp_rate,
        fp_rate,
        true_model_prob: p.get(truth).copied().unwrap_or(0.0),
        true_model_rank: rank,
        found: rank.is_some(),
    })
}

/// Median of a nonempty sample; the mean of the middle pair for even sizes.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Three mains, two squares and two interactions over five predictors.
pub fn selection_preset_terms() -> Vec<Term> {
    ["x1", "x2", "x3", "x1^2", "x2^2", "x1*x2", "x2*x3"]
        .iter()
        .map(|s| Term::parse(s, 5).expect("preset terms parse"))
        .collect()
}

/// Four terms over three predictors, closed under strong heredity.
pub fn concentration_preset_terms() -> Vec<Term> {
    ["x1", "x2", "x1^2", "x1*x2"]
        .iter()
        .map(|s| Term::parse(s, 3).expect("preset terms parse"))
        .collect()
}

fn for_each_rep<T, F>(reps: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| f(r, &mut ChaCha8Rng::seed_from_u64(replication_seed(seed, r))))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRow {
    pub rep: usize,
    pub n: usize,
    pub snr: f64,
    pub prior: String,
    pub score: SelectionScore,
}

/// For each replication, one dataset and one sampler run per prior.
pub fn selection_experiment(
    space: &ModelSpace,
    design: &SimDesign,
    priors: &[PriorSpec],
    sampler: &SamplerConfig,
    reps: usize,
    seed: u64,
) -> Result<Vec<SelectionRow>> {
    let truth = true_model(space, &design.true_terms);
    let bound: Vec<ModelPrior> = priors
        .iter()
        .map(|s| ModelPrior::new(space, *s))
        .collect::<Result<_>>()?;
    let rows = for_each_rep(reps, seed, |rep, rng| {
        let sim = generate(design, space, rng)?;
        let scorer = ModelScorer::new(&sim.dataset, space, GPrior::default())?;
        let mut out = Vec::new();
        for (k, prior) in bound.iter().enumerate() {
            let config = SamplerConfig {
                seed: rng.random::<u64>() ^ k as u64,
                ..sampler.clone()
            };
            let run = sampler::run(&scorer, prior, &config)?;
            out.push(SelectionRow {
                rep,
                n: design.n,
                snr: design.snr,
                prior: prior.spec().label(),
                score: score(&run.table, &truth, space)?,
            });
        }
        Ok(out)
    })?;
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvdRow {
    pub rep: usize,
    pub n: usize,
    pub tvd_renormalized: f64,
    pub tvd_frequency: f64,
    pub n_evaluated: usize,
}

/// Distance of both estimators from the enumerated posterior.
pub fn tvd_experiment(
    space: &ModelSpace,
    design: &SimDesign,
    prior: PriorSpec,
    sampler: &SamplerConfig,
    reps: usize,
    seed: u64,
    cap: u64,
) -> Result<Vec<TvdRow>> {
    let prior = ModelPrior::new(space, prior)?;
    for_each_rep(reps, seed, |rep, rng| {
        let sim = generate(design, space, rng)?;
        let scorer = ModelScorer::new(&sim.dataset, space, GPrior::default())?;
        let exact = exact_posterior(&scorer, &prior, cap)?.renormalize()?;
        let config = SamplerConfig {
            seed: rng.random(),
            ..sampler.clone()
        };
        let run = sampler::run(&scorer, &prior, &config)?;
        Ok(TvdRow {
            rep,
            n: design.n,
            tvd_renormalized: tvd(&run.table.renormalize()?, &exact),
            tvd_frequency: tvd(&run.table.frequency()?, &exact),
            n_evaluated: run.table.len(),
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationRow {
    pub rep: usize,
    pub n: usize,
    /// Exact posterior probability of the strong-heredity closure of the
    /// true terms.
    pub prob: f64,
}

/// Exact posterior of the closure of the true terms along a grid of sample
/// sizes. `design.n` is ignored.
pub fn theorem1_experiment(
    space: &ModelSpace,
    design: &SimDesign,
    ns: &[usize],
    prior: PriorSpec,
    reps: usize,
    seed: u64,
    cap: u64,
) -> Result<Vec<ConcentrationRow>> {
    if space.heredity() != Heredity::Strong {
        return Err(Error::Config(
            "the concentration experiment needs a strong-heredity space".into(),
        ));
    }
    let closure = space.shc_closure(&design.true_terms)?;
    let prior = ModelPrior::new(space, prior)?;
    let mut rows = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        let d = SimDesign { n, ..design.clone() };
        rows.extend(for_each_rep(reps, replication_seed(seed, 1000 + k), |rep, rng| {
            let sim = generate(&d, space, rng)?;
            let scorer = ModelScorer::new(&sim.dataset, space, GPrior::default())?;
            let p = exact_posterior(&scorer, &prior, cap)?.renormalize()?;
            Ok(ConcentrationRow {
                rep,
                n,
                prob: p.get(&closure).copied().unwrap_or(0.0),
            })
        })?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSplitRow {
    pub rep: usize,
    pub n: usize,
    /// Weak-heredity posterior of `{x1, x1x2}`.
    pub mass_1: f64,
    /// Weak-heredity posterior of `{x2, x1x2}`.
    pub mass_2: f64,
    pub combined: f64,
    /// `mass_1 / combined`.
    pub share_1: f64,
    /// Strong-heredity posterior of `{x1, x2, x1x2}` on the same data.
    pub strong_mass: f64,
}

/// `y = β x1x2 + ε` over the two-predictor quadratic surface, scored
/// exactly under weak and strong heredity.
pub fn theorem2_experiment(n: usize, snr: f64, prior: PriorSpec, reps: usize, seed: u64) -> Result<Vec<MassSplitRow>> {
    let weak = ModelSpace::full_surface(2, 2, Heredity::Weak)?;
    let strong = weak.with_heredity(Heredity::Strong);
    let design = SimDesign {
        n,
        snr,
        allocation: Allocation::Equal,
        true_terms: vec![Term::parse("x1*x2", 2)?],
    };
    let m1 = weak.parse_model("x1,x1*x2")?;
    let m2 = weak.parse_model("x2,x1*x2")?;
    let ms = strong.parse_model("x1,x2,x1*x2")?;
    let wp = ModelPrior::new(&weak, prior)?;
    let sp = ModelPrior::new(&strong, prior)?;
    for_each_rep(reps, seed, |rep, rng| {
        let sim = generate(&design, &weak, rng)?;
        let ws = ModelScorer::new(&sim.dataset, &weak, GPrior::default())?;
        let pw = exact_posterior(&ws, &wp, u64::MAX)?.renormalize()?;
        let ss = ModelScorer::new(&sim.dataset, &strong, GPrior::default())?;
        let ps = exact_posterior(&ss, &sp, u64::MAX)?.renormalize()?;
        let (mass_1, mass_2) = (pw[&m1], pw[&m2]);
        let combined = mass_1 + mass_2;
        Ok(MassSplitRow {
            rep,
            n,
            mass_1,
            mass_2,
            combined,
            share_1: if combined > 0.0 { mass_1 / combined } else { 0.0 },
            strong_mass: ps[&ms],
        })
    })
}
