#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polysel::prior::ModelPrior;
use polysel::sampler::{intermediate_paths, local_log_q, stage_distribution, KernelWeights, LogPosterior};
use polysel::sim::{self, Allocation, SimDesign};
use polysel::{Dataset, Heredity, Model, ModelSpace, Term};

pub fn quad(p: usize, h: Heredity) -> ModelSpace {
    ModelSpace::full_surface(p, 2, h).unwrap()
}

pub fn terms(p: usize, names: &[&str]) -> Vec<Term> {
    names.iter().map(|s| Term::parse(s, p).unwrap()).collect()
}

pub fn simulate(space: &ModelSpace, n: usize, snr: f64, truth: &[&str], seed: u64) -> Dataset {
    let design = SimDesign {
        n,
        snr,
        allocation: Allocation::Equal,
        true_terms: terms(space.p(), truth),
    };
    sim::generate(&design, space, &mut ChaCha8Rng::seed_from_u64(seed))
        .unwrap()
        .dataset
}

/// Log posteriors looked up from a fixed map.
pub struct Fixed(pub HashMap<Model, f64>);

impl LogPosterior for Fixed {
    fn log_posterior(&mut self, models: &[Model]) -> polysel::Result<Vec<f64>> {
        Ok(models.iter().map(|m| self.0[m]).collect())
    }
}

/// Transition matrix of the kernel mixture, rows indexed like `models`.
pub fn transition_matrix(
    space: &ModelSpace,
    models: &[Model],
    log_marginal: &HashMap<Model, f64>,
    prior: &ModelPrior,
    w: KernelWeights,
    lambda: f64,
) -> DMatrix<f64> {
    let idx: HashMap<Model, usize> = models.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let lp: HashMap<Model, f64> = models
        .iter()
        .map(|m| (*m, log_marginal[m] + prior.log_prior(m).unwrap()))
        .collect();
    let mut score = Fixed(lp.clone());
    let k = models.len();
    let mut p = DMatrix::zeros(k, k);
    for (i, m) in models.iter().enumerate() {
        let (nbhd, q) = stage_distribution(space, &mut score, m, None, lambda).unwrap();
        for (c, qc) in nbhd.iter().zip(&q) {
            if c != m {
                let back = local_log_q(space, &mut score, c, m, lambda).unwrap();
                let r = lp[c] - lp[m] + back - qc.ln();
                p[(i, idx[c])] += w.local * qc * r.exp().min(1.0);
            }
        }
        for path in intermediate_paths(space, &mut score, m, lambda).unwrap() {
            let c = path.proposal();
            if c != *m {
                let r = lp[&c] - lp[m] + path.log_q_reverse - path.log_q_forward;
                p[(i, idx[&c])] += w.intermediate * path.log_q_forward.exp() * r.exp().min(1.0);
            }
        }
        for c in models {
            if c != m {
                let r = log_marginal[c] - log_marginal[m];
                p[(i, idx[c])] += w.global * prior.log_prior(c).unwrap().exp() * r.exp().min(1.0);
            }
        }
        let off: f64 = p.row(i).sum();
        p[(i, i)] = 1.0 - off;
    }
    p
}

/// Left eigenvector for eigenvalue 1, normalized to sum 1.
pub fn stationary(p: &DMatrix<f64>) -> DVector<f64> {
    let k = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(k, k);
    let mut b = DVector::zeros(k);
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    b[k - 1] = 1.0;
    a.lu().solve(&b).unwrap()
}
