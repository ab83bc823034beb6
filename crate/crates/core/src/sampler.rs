//! Metropolis-Hastings walk over a model space.
//!
//! Three kernels are mixed at every iteration:
//!
//! * **local**: toggle one node of `E(M) ∪ C(M)`, or stay, with probability
//!   `λ·p(M′ | y, 𝓜_M) + (1 − λ)/N` over the neighborhood `𝓜_M`;
//! * **intermediate**: walk the orders in ascending or descending sequence,
//!   making one local-style move restricted to each order;
//! * **global**: draw from the prior, accepted with the Bayes factor.
//!
//! Every model whose marginal is computed goes into the [`PosteriorTable`],
//! so the table supports the renormalization estimator as well as visit
//! frequencies.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimate::PosteriorTable;
use crate::marginal::ModelScorer;
use crate::prior::ModelPrior;
use crate::space::{Model, ModelSpace};

const LN_HALF: f64 = -std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    Local,
    Intermediate,
    Global,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Local, Kernel::Intermediate, Kernel::Global];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Local => "local",
            Kernel::Intermediate => "intermediate",
            Kernel::Global => "global",
        })
    }
}

/// Probabilities of picking each kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelWeights {
    pub local: f64,
    pub intermediate: f64,
    pub global: f64,
}

impl Default for KernelWeights {
    fn default() -> Self {
        Self {
            local: 0.5,
            intermediate: 0.4,
            global: 0.1,
        }
    }
}

impl KernelWeights {
    pub fn new(local: f64, intermediate: f64, global: f64) -> Result<Self> {
        let w = Self {
            local,
            intermediate,
            global,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.local, self.intermediate, self.global];
        if all.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Config("kernel weights must be nonnegative".into()));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Config("kernel weights must sum to 1".into()));
        }
        Ok(())
    }
}

impl FromStr for KernelWeights {
    type Err = Error;
    /// `"local,intermediate,global"`.
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("cannot parse kernel weights {s:?}")))?;
        match v[..] {
            [a, b, c] => Self::new(a, b, c),
            _ => Err(Error::Config("kernel weights need three values".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub weights: KernelWeights,
    /// Weight on the renormalized posterior in local-style proposals.
    pub lambda: f64,
    pub iterations: u64,
    pub seed: u64,
    /// Starting model; the base model when `None`.
    pub start: Option<Model>,
    pub keep_trace: bool,
}

impl SamplerConfig {
    pub fn new(iterations: u64, seed: u64) -> Self {
        Self {
            weights: KernelWeights::default(),
            lambda: 0.5,
            iterations,
            seed,
            start: None,
            keep_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Source of `log m(y|M) + log π(M)` for batches of models.
pub trait LogPosterior {
    fn log_posterior(&mut self, models: &[Model]) -> Result<Vec<f64>>;
}

/// `{M}` followed by each toggle of `E(M) ∪ C(M)`, optionally restricted
/// to the nodes in `mask`.
pub fn neighborhood(space: &ModelSpace, m: &Model, mask: Option<&Model>) -> Vec<Model> {
    let mut moves = space.toggleable(m);
    if let Some(mask) = mask {
        moves = moves.intersection(mask);
    }
    std::iter::once(*m).chain(moves.iter().map(|i| m.toggled(i))).collect()
}

/// `λ·softmax(log_post) + (1 − λ)/N`.
pub fn mixture_probabilities(log_post: &[f64], lambda: f64) -> Vec<f64> {
    let n = log_post.len() as f64;
    let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = if max == f64::NEG_INFINITY {
        vec![1.0; log_post.len()]
    } else {
        log_post.iter().map(|l| (l - max).exp()).collect()
    };
    let total: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|v| lambda * v / total + (1.0 - lambda) / n).collect();
    debug_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    p
}

/// Neighborhood of `m` (restricted to `mask`) and its proposal probabilities.
pub fn stage_distribution<S: LogPosterior + ?Sized>(
    space: &ModelSpace,
    score: &mut S,
    m: &Model,
    mask: Option<&Model>,
    lambda: f64,
) -> Result<(Vec<Model>, Vec<f64>)> {
    let nbhd = neighborhood(space, m, mask);
    let lp = score.log_posterior(&nbhd)?;
    Ok((nbhd, mixture_probabilities(&lp, lambda)))
}

fn log_prob_of<S: LogPosterior + ?Sized>(
    space: &ModelSpace,
    score: &mut S,
    from: &Model,
    to: &Model,
    mask: Option<&Model>,
    lambda: f64,
) -> Result<f64> {
    let (nbhd, p) = stage_distribution(space, score, from, mask, lambda)?;
    Ok(nbhd
        .iter()
        .position(|m| m == to)
        .map_or(f64::NEG_INFINITY, |i| p[i].ln()))
}

/// `log q(from → to)` under the local kernel.
pub fn local_log_q<S: LogPosterior + ?Sized>(
    space: &ModelSpace,
    score: &mut S,
    from: &Model,
    to: &Model,
    lambda: f64,
) -> Result<f64> {
    log_prob_of(space, score, from, to, None, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascending,
    Descending,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Ascending => Direction::Descending,
            Direction::Descending => Direction::Ascending,
        }
    }
}

/// Orders visited by an intermediate jump, one stage each.
pub fn stage_orders(space: &ModelSpace, direction: Direction) -> Vec<u32> {
    let mut o = space.orders().to_vec();
    if direction == Direction::Descending {
        o.reverse();
    }
    o
}

/// `log(1/2) + Σ log(stage probability)` for a sequence of intermediate
/// models, `path[0]` being the start and `path[k+1]` the result of stage `k`.
pub fn path_log_q<S: LogPosterior + ?Sized>(
    space: &ModelSpace,
    score: &mut S,
    path: &[Model],
    direction: Direction,
    lambda: f64,
) -> Result<f64> {
    let orders = stage_orders(space, direction);
    debug_assert_eq!(path.len(), orders.len() + 1);
    let mut lq = LN_HALF;
    for (k, &o) in orders.iter().enumerate() {
        let mask = space.order_mask(o);
        lq += log_prob_of(space, score, &path[k], &path[k + 1], Some(&mask), lambda)?;
    }
    Ok(lq)
}

/// Same path replayed backwards in the opposite direction.
pub fn reverse_path_log_q<S: LogPosterior + ?Sized>(
    space: &ModelSpace,
    score: &mut S,
    path: &[Model],
    direction: Direction,
    lambda: f64,
) -> Result<f64> {
    let rev: Vec<Model> = path.iter().rev().copied().collect();
    path_log_q(space, score, &rev, direction.reversed(), lambda)
}

/// One possible outcome of an intermediate jump.
#[derive(Debug, Clone, PartialEq)]
pub struct IntermediatePath {
    pub direction: Direction,
    pub models: Vec<Model>,
    pub log_q_forward: f64,
    pub log_q_reverse: f64,
}

impl IntermediatePath {
    pub fn proposal(&self) -> Model {
        *self.models.last().expect("paths hold at least the start model")
    }
}

/// Every path an intermediate jump from `m` can take, with its forward and
/// reverse probabilities. Exponential in the number of orders; meant for
/// small spaces.
pub fn intermediate_paths<S: LogPosterior + ?Sized>(
    space: &ModelSpace,
    score: &mut S,
    m: &Model,
    lambda: f64,
) -> Result<Vec<IntermediatePath>> {
    let mut out = Vec::new();
    for direction in [Direction::Ascending, Direction::Descending] {
        let orders = stage_orders(space, direction);
        let mut partial: Vec<(Vec<Model>, f64)> = vec![(vec![*m], LN_HALF)];
        for &o in &orders {
            let mask = space.order_mask(o);
            let mut next = Vec::new();
            for (path, lq) in partial {
                let cur = *path.last().unwrap();
                let (nbhd, p) = stage_distribution(space, score, &cur, Some(&mask), lambda)?;
                for (cand, pc) in nbhd.into_iter().zip(p) {
                    let mut np = path.clone();
                    np.push(cand);
                    next.push((np, lq + pc.ln()));
                }
            }
            partial = next;
        }
        for (models, log_q_forward) in partial {
            let log_q_reverse = reverse_path_log_q(space, score, &models, direction, lambda)?;
            out.push(IntermediatePath {
                direction,
                models,
                log_q_forward,
                log_q_reverse,
            });
        }
    }
    Ok(out)
}

fn draw<R: Rng + ?Sized>(rng: &mut R, p: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, v) in p.iter().enumerate() {
        acc += v;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

fn accept<R: Rng + ?Sized>(rng: &mut R, log_ratio: f64) -> bool {
    log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp()
}

/// Marginals from a [`ModelScorer`] plus a prior, recorded into a table.
#[derive(Debug)]
pub struct TrackedPosterior<'s, 'a> {
    scorer: &'s ModelScorer<'a>,
    prior: &'s ModelPrior<'a>,
    table: PosteriorTable,
}

impl<'s, 'a> TrackedPosterior<'s, 'a> {
    pub fn new(scorer: &'s ModelScorer<'a>, prior: &'s ModelPrior<'a>) -> Self {
        Self {
            scorer,
            prior,
            table: PosteriorTable::new(),
        }
    }

    pub fn table(&self) -> &PosteriorTable {
        &self.table
    }

    pub fn into_table(self) -> PosteriorTable {
        self.table
    }

    fn log_marginal(&self, m: &Model) -> f64 {
        self.table.get(m).expect("model scored before use").log_marginal
    }
}

impl LogPosterior for TrackedPosterior<'_, '_> {
    fn log_posterior(&mut self, models: &[Model]) -> Result<Vec<f64>> {
        let mut missing: Vec<Model> = models.iter().filter(|m| !self.table.contains(m)).copied().collect();
        missing.sort_unstable();
        missing.dedup();
        if !missing.is_empty() {
            let lm = self.scorer.log_marginals(&missing)?;
            for (m, v) in missing.iter().zip(lm) {
                self.table.record(*m, v, self.prior.log_prior(m)?);
            }
        }
        Ok(models.iter().map(|m| self.table.get(m).unwrap().log_post()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: u64,
    /// State after the accept/reject decision.
    pub model: Model,
    pub kernel: Kernel,
    pub accepted: bool,
    pub log_post: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: PosteriorTable,
    pub trace: Vec<TraceRecord>,
    pub proposed: [u64; 3],
    pub accepted: [u64; 3],
}

impl RunOutput {
    pub fn acceptance_rate(&self) -> f64 {
        let p: u64 = self.proposed.iter().sum();
        if p == 0 {
            0.0
        } else {
            self.accepted.iter().sum::<u64>() as f64 / p as f64
        }
    }

    pub fn kernel_acceptance_rate(&self, k: Kernel) -> Option<f64> {
        let p = self.proposed[k.index()];
        (p > 0).then(|| self.accepted[k.index()] as f64 / p as f64)
    }
}

/// Runs the chain. The prior drives both the posterior and the global
/// proposals.
pub fn run(scorer: &ModelScorer, prior: &ModelPrior, config: &SamplerConfig) -> Result<RunOutput> {
    config.validate()?;
    let space = scorer.space();
    if space.node_count() != prior.space().node_count() {
        return Err(Error::Config("prior and scorer belong to different spaces".into()));
    }
    if config.weights.global > 0.0 && !prior.can_sample() {
        return Err(Error::Config(
            "global jumps need a prior that can be sampled; set the global weight to 0".into(),
        ));
    }
    let mut current = config.start.unwrap_or_default();
    if !space.is_valid(&current) {
        return Err(Error::InvalidModel);
    }
    let lambda = config.lambda;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut post = TrackedPosterior::new(scorer, prior);
    let mut lp_cur = post.log_posterior(&[current])?[0];
    let mut out = RunOutput {
        table: PosteriorTable::new(),
        trace: Vec::new(),
        proposed: [0; 3],
        accepted: [0; 3],
    };
    let w = config.weights;
    for iter in 0..config.iterations {
        let u: f64 = rng.random();
        let kernel = if u < w.local {
            Kernel::Local
        } else if u < w.local + w.intermediate {
            Kernel::Intermediate
        } else {
            Kernel::Global
        };
        let (proposal, log_ratio) = match kernel {
            Kernel::Local => {
                let (nbhd, p) = stage_distribution(space, &mut post, &current, None, lambda)?;
                let j = draw(&mut rng, &p);
                let proposal = nbhd[j];
                let lq_rev = local_log_q(space, &mut post, &proposal, &current, lambda)?;
                let lp_new = post.log_posterior(&[proposal])?[0];
                (proposal, lp_new - lp_cur + lq_rev - p[j].ln())
            }
            Kernel::Intermediate => {
                let direction = if rng.random::<bool>() {
                    Direction::Ascending
                } else {
                    Direction::Descending
                };
                let mut path = vec![current];
                let mut lq_fwd = LN_HALF;
                for o in stage_orders(space, direction) {
                    let mask = space.order_mask(o);
                    let (nbhd, p) = stage_distribution(space, &mut post, path.last().unwrap(), Some(&mask), lambda)?;
                    let j = draw(&mut rng, &p);
                    lq_fwd += p[j].ln();
                    path.push(nbhd[j]);
                }
                let lq_rev = reverse_path_log_q(space, &mut post, &path, direction, lambda)?;
                let proposal = *path.last().unwrap();
                let lp_new = post.log_posterior(&[proposal])?[0];
                (proposal, lp_new - lp_cur + lq_rev - lq_fwd)
            }
            Kernel::Global => {
                let proposal = prior.sample(&mut rng)?;
                post.log_posterior(&[proposal])?;
                (proposal, post.log_marginal(&proposal) - post.log_marginal(&current))
            }
        };
        let ok = accept(&mut rng, log_ratio);
        out.proposed[kernel.index()] += 1;
        if ok {
            out.accepted[kernel.index()] += 1;
            current = proposal;
            lp_cur = post.log_posterior(&[current])?[0];
        }
        post.table.visit(&current)?;
        if config.keep_trace {
            out.trace.push(TraceRecord {
                iter,
                model: current,
                kernel,
                accepted: ok,
                log_post: lp_cur,
            });
        }
    }
    out.table = post.into_table();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Heredity;

    #[test]
    fn mixture_bounds() {
        let lp = [0.0, 3.0, -2.0, 1.0];
        let p = mixture_probabilities(&lp, 0.5);
        let n = lp.len() as f64;
        for v in &p {
            assert!(*v >= 0.5 / n - 1e-15 && *v <= 0.5 * (1.0 + 1.0 / n) + 1e-15);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let flat = mixture_probabilities(&[2.0; 5], 0.5);
        assert!(flat.iter().all(|v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn neighborhood_of_base_model() {
        let space = ModelSpace::full_surface(2, 2, Heredity::Strong).unwrap();
        let nb = neighborhood(&space, &Model::empty(), None);
        // base plus x1 and x2
        assert_eq!(nb.len(), 3);
        assert!(nb.iter().all(|m| space.is_valid(m)));
    }

    #[test]
    fn weights_parse_and_validate() {
        let w: KernelWeights = "0.5, 0.4, 0.1".parse().unwrap();
        assert_eq!(w, KernelWeights::default());
        assert!("0.5,0.5".parse::<KernelWeights>().is_err());
        assert!(KernelWeights::new(0.5, 0.6, -0.1).is_err());
        let mut c = SamplerConfig::new(0, 1);
        assert!(c.validate().is_err());
        c.iterations = 1;
        c.lambda = 1.5;
        assert!(c.validate().is_err());
    }
}
