//! Posterior summaries over the models a sampler has evaluated.

use std::cmp::Ordering;

use indexmap::IndexMap;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::marginal::ModelScorer;
use crate::prior::ModelPrior;
use crate::space::{Model, ModelSpace};
use crate::term::Term;

/// Model probabilities keyed by model.
pub type ProbabilityMap = IndexMap<Model, f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub log_marginal: f64,
    pub log_prior: f64,
    pub visits: u64,
}

impl TableEntry {
    pub fn log_post(&self) -> f64 {
        self.log_marginal + self.log_prior
    }
}

/// Every model whose marginal was computed, with its visit count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PosteriorTable {
    entries: IndexMap<Model, TableEntry>,
    iterations: u64,
}

impl PosteriorTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a table from stored entries.
    pub fn from_entries<I: IntoIterator<Item = (Model, TableEntry)>>(entries: I, iterations: u64) -> Self {
        Self {
            entries: entries.into_iter().collect(),
            iterations,
        }
    }

    /// Adds a model if absent; an existing entry keeps its values.
    pub fn record(&mut self, m: Model, log_marginal: f64, log_prior: f64) {
        self.entries.entry(m).or_insert(TableEntry {
            log_marginal,
            log_prior,
            visits: 0,
        });
    }

    /// Counts one iteration spent at `m`, which must already be recorded.
    pub fn visit(&mut self, m: &Model) -> Result<()> {
        let e = self
            .entries
            .get_mut(m)
            .ok_or_else(|| Error::Config("visited a model that was never scored".into()))?;
        e.visits += 1;
        self.iterations += 1;
        Ok(())
    }

    pub fn get(&self, m: &Model) -> Option<&TableEntry> {
        self.entries.get(m)
    }

    pub fn contains(&self, m: &Model) -> bool {
        self.entries.contains_key(m)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Model, &TableEntry)> {
        self.entries.iter()
    }

    /// `p̂(M) ∝ m(y|M) π(M)` over the table.
    pub fn renormalize(&self) -> Result<ProbabilityMap> {
        let max = self
            .entries
            .values()
            .map(TableEntry::log_post)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::EmptyTable);
        }
        let lse = max
            + self
                .entries
                .values()
                .map(|e| (e.log_post() - max).exp())
                .sum::<f64>()
                .ln();
        Ok(self
            .entries
            .iter()
            .map(|(m, e)| (*m, (e.log_post() - lse).exp()))
            .collect())
    }

    /// Share of iterations spent at each visited model.
    pub fn frequency(&self) -> Result<ProbabilityMap> {
        if self.iterations == 0 {
            return Err(Error::EmptyTable);
        }
        let total = self.iterations as f64;
        Ok(self
            .entries
            .iter()
            .filter(|(_, e)| e.visits > 0)
            .map(|(m, e)| (*m, e.visits as f64 / total))
            .collect())
    }

    /// Models by decreasing posterior; ties go to the smaller model key.
    pub fn ranked(&self) -> Vec<(Model, f64)> {
        let mut v: Vec<(Model, f64)> = self.entries.iter().map(|(m, e)| (*m, e.log_post())).collect();
        v.sort_by(|a, b| match b.1.partial_cmp(&a.1) {
            Some(Ordering::Equal) | None => a.0.cmp(&b.0),
            Some(o) => o,
        });
        v
    }

    pub fn hpm(&self) -> Option<Model> {
        self.ranked().first().map(|(m, _)| *m)
    }

    /// The `k` most probable models with their renormalized probabilities.
    pub fn top_k(&self, k: usize) -> Result<Vec<RankedModel>> {
        let p = self.renormalize()?;
        Ok(self
            .ranked()
            .into_iter()
            .take(k)
            .map(|(model, log_post)| RankedModel {
                model,
                log_post,
                prob: p[&model],
            })
            .collect())
    }

    /// 1-based rank under [`PosteriorTable::ranked`].
    pub fn rank_of(&self, target: &Model) -> Option<usize> {
        if !self.contains(target) {
            return None;
        }
        self.ranked().iter().position(|(m, _)| m == target).map(|i| i + 1)
    }

    /// `P(α ∈ M | y)` for every node, indexed like [`ModelSpace::nodes`].
    pub fn inclusion_probabilities(&self, space: &ModelSpace) -> Result<Vec<f64>> {
        let p = self.renormalize()?;
        let mut inc = vec![0.0; space.node_count()];
        for (m, w) in &p {
            for i in m.iter() {
                inc[i] += w;
            }
        }
        Ok(inc)
    }

    /// The same evaluations scored under another prior. Visit counts carry
    /// over unchanged.
    pub fn reprior(&self, prior: &ModelPrior) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|(m, e)| {
                Ok((
                    *m,
                    TableEntry {
                        log_prior: prior.log_prior(m)?,
                        ..*e
                    },
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            entries,
            iterations: self.iterations,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedModel {
    pub model: Model,
    pub log_post: f64,
    pub prob: f64,
}

/// `½ Σ |p − q|` over the union of keys.
pub fn tvd(p: &ProbabilityMap, q: &ProbabilityMap) -> f64 {
    let mut s: f64 = p
        .iter()
        .map(|(m, a)| (a - q.get(m).copied().unwrap_or(0.0)).abs())
        .sum();
    s += q
        .iter()
        .filter(|(m, _)| !p.contains_key(*m))
        .map(|(_, b)| b.abs())
        .sum::<f64>();
    0.5 * s
}

/// Scores every model of an enumerable space.
pub fn exact_posterior(scorer: &ModelScorer, prior: &ModelPrior, cap: u64) -> Result<PosteriorTable> {
    let models = scorer.space().enumerate(cap)?;
    let lm = scorer.log_marginals(&models)?;
    let mut table = PosteriorTable::new();
    for (m, v) in models.into_iter().zip(lm) {
        table.record(m, v, prior.log_prior_unchecked(&m));
    }
    Ok(table)
}

/// Prediction averaged over the `k` most probable models, weights
/// renormalized over those `k`.
pub fn model_average_predict(
    table: &PosteriorTable,
    scorer: &ModelScorer,
    mains: &DMatrix<f64>,
    k: usize,
) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Config("need at least one model to average".into()));
    }
    let top = table.ranked();
    let top = &top[..k.min(top.len())];
    let Some(&(_, max)) = top.first() else {
        return Err(Error::EmptyTable);
    };
    let weights: Vec<f64> = top.iter().map(|(_, lp)| (lp - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut out = vec![0.0; mains.nrows()];
    for ((m, _), w) in top.iter().zip(weights) {
        for (acc, v) in out.iter_mut().zip(scorer.predict(m, mains)?) {
            *acc += w / total * v;
        }
    }
    Ok(out)
}

/// Report-ready view of a table.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub renormalized: ProbabilityMap,
    pub frequency: Option<ProbabilityMap>,
    pub hpm: Model,
    pub top_k: Vec<RankedModel>,
    pub inclusion: Vec<(Term, f64)>,
    /// Probability and rank of a designated model, if it was evaluated.
    pub target: Option<(f64, usize)>,
}

impl PosteriorSummary {
    pub fn new(table: &PosteriorTable, space: &ModelSpace, k: usize, target: Option<&Model>) -> Result<Self> {
        let renormalized = table.renormalize()?;
        let frequency = table.frequency().ok();
        let inclusion = space
            .nodes()
            .iter()
            .copied()
            .zip(table.inclusion_probabilities(space)?)
            .collect();
        let target = target.and_then(|t| Some((renormalized.get(t).copied()?, table.rank_of(t)?)));
        Ok(Self {
            hpm: table.hpm().ok_or(Error::EmptyTable)?,
            top_k: table.top_k(k)?,
            renormalized,
            frequency,
            inclusion,
            target,
        })
    }

    pub fn tvd_renorm_vs_freq(&self) -> Option<f64> {
        self.frequency.as_ref().map(|f| tvd(&self.renormalized, f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(v: &[(usize, f64)]) -> ProbabilityMap {
        v.iter().map(|&(i, p)| (Model::from_indices([i]), p)).collect()
    }

    #[test]
    fn tvd_examples() {
        let p = map(&[(0, 0.8), (1, 0.2)]);
        let q = map(&[(0, 0.6), (1, 0.4)]);
        assert!((tvd(&p, &q) - 0.2).abs() < 1e-15);
        assert_eq!(tvd(&p, &p), 0.0);
        assert_eq!(tvd(&map(&[(0, 1.0)]), &map(&[(1, 1.0)])), 1.0);
    }

    #[test]
    fn single_entry_renormalizes_to_one() {
        let mut t = PosteriorTable::new();
        t.record(Model::empty(), -3.0, -1.0);
        assert_eq!(t.renormalize().unwrap()[&Model::empty()], 1.0);
        assert!(PosteriorTable::new().renormalize().is_err());
    }

    #[test]
    fn impossible_model_changes_nothing() {
        let mut t = PosteriorTable::new();
        t.record(Model::empty(), 0.0, -1.0);
        t.record(Model::from_indices([0]), 1.0, -2.0);
        let before = t.renormalize().unwrap();
        t.record(Model::from_indices([1]), f64::NEG_INFINITY, -2.0);
        let after = t.renormalize().unwrap();
        assert!(tvd(&before, &after) < 1e-12);
    }

    #[test]
    fn frequency_counts_visits() {
        let mut t = PosteriorTable::new();
        let a = Model::empty();
        let b = Model::from_indices([0]);
        t.record(a, 0.0, 0.0);
        t.record(b, 0.0, 0.0);
        assert!(t.frequency().is_err());
        for m in [a, a, b, a] {
            t.visit(&m).unwrap();
        }
        let f = t.frequency().unwrap();
        assert_eq!(f[&a], 0.75);
        assert_eq!(f[&b], 0.25);
        assert!(t.visit(&Model::from_indices([5])).is_err());
    }

    #[test]
    fn ranks_break_ties_by_key() {
        let mut t = PosteriorTable::new();
        let b = Model::from_indices([1]);
        let a = Model::from_indices([0]);
        t.record(b, 0.0, 0.0);
        t.record(a, 0.0, 0.0);
        t.record(Model::empty(), -1.0, 0.0);
        assert_eq!(t.hpm(), Some(a.min(b)));
        let mut ranks: Vec<usize> = t.iter().map(|(m, _)| t.rank_of(m).unwrap()).collect();
        ranks.sort();
        assert_eq!(ranks, vec![1, 2, 3]);
        assert_eq!(t.rank_of(&Model::from_indices([7])), None);
    }
}
