mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{quad, terms};
use polysel::estimate::exact_posterior;
use polysel::marginal::{build_design, design_matrix, GPrior, ModelScorer};
use polysel::prior::{ModelPrior, PriorFamily, PriorSpec, Scheme};
use polysel::sim::{self, Allocation, SimDesign};
use polysel::space::Heredity;
use polysel::{Model, ModelSpace};

#[test]
fn realized_signal_to_noise_across_three_orders() {
    let space = ModelSpace::full_surface(2, 3, Heredity::Strong).unwrap();
    let design = SimDesign {
        n: 10_000,
        snr: 2.0,
        allocation: Allocation::Equal,
        true_terms: terms(2, &["x1", "x1^2", "x1^3", "x2"]),
    };
    let sim = sim::generate(&design, &space, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let ts: Vec<_> = sim.coefficients.iter().map(|(t, _)| *t).collect();
    let x = design_matrix(sim.dataset.mains(), &ts);
    let beta = nalgebra::DVector::from_iterator(ts.len(), sim.coefficients.iter().map(|(_, b)| *b));
    let signal = x * beta;
    let y = nalgebra::DVector::from_column_slice(sim.dataset.y());
    let noise = &y - &signal;
    let var = |v: &nalgebra::DVector<f64>| {
        let m = v.mean();
        v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / v.len() as f64
    };
    let ratio = var(&signal) / var(&noise);
    assert!((ratio - 2.0).abs() <= 0.2, "{ratio}");
    // Equal allocation gives every term the same coefficient.
    let b0 = sim.coefficients[0].1;
    assert!(b0 > 0.0 && sim.coefficients.iter().all(|(_, b)| (b - b0).abs() < 1e-12));
}

#[test]
fn allocation_halves_by_order() {
    let space = ModelSpace::full_surface(1, 3, Heredity::Strong).unwrap();
    for (alloc, ratio) in [(Allocation::Decreasing, 0.5), (Allocation::Increasing, 2.0)] {
        let design = SimDesign {
            n: 200,
            snr: 1.0,
            allocation: alloc,
            true_terms: terms(1, &["x1", "x1^2", "x1^3"]),
        };
        let sim = sim::generate(&design, &space, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b: Vec<f64> = sim.coefficients.iter().map(|(_, b)| *b).collect();
        assert!((b[1] / b[0] - ratio).abs() < 1e-12 && (b[2] / b[1] - ratio).abs() < 1e-12);
    }
}

fn choose(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn full_design_shape() {
    for (p, d) in [(2usize, 2u32), (3, 3), (4, 2)] {
        let space = ModelSpace::full_surface(p, d, Heredity::Strong).unwrap();
        let design = SimDesign {
            n: 80,
            snr: 1.0,
            allocation: Allocation::Equal,
            true_terms: vec![],
        };
        let data = sim::generate(&design, &space, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap()
            .dataset;
        let x = build_design(&data, &space, &space.full_model()).unwrap();
        assert_eq!((x.nrows(), x.ncols()), (80, choose(p + d as usize, d as usize)));
    }
}

#[test]
fn pure_noise_selects_the_base_model() {
    let space = quad(2, Heredity::Strong);
    let prior = ModelPrior::new(&space, PriorSpec::new(PriorFamily::Hop, Scheme::ChildPenalty)).unwrap();
    let design = SimDesign {
        n: 2_000,
        snr: 1e-12,
        allocation: Allocation::Equal,
        true_terms: terms(2, &["x1"]),
    };
    let mut hits = 0;
    for rep in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(sim::replication_seed(5, rep));
        let data = sim::generate(&design, &space, &mut rng).unwrap().dataset;
        let scorer = ModelScorer::new(&data, &space, GPrior::default()).unwrap();
        let table = exact_posterior(&scorer, &prior, 100).unwrap();
        hits += (table.hpm() == Some(Model::empty())) as usize;
    }
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn closures() {
    let space = quad(3, Heredity::Strong);
    let valid = sim::concentration_preset_terms();
    assert_eq!(space.shc_closure(&valid).unwrap(), sim::true_model(&space, &valid));
    let sq = terms(3, &["x1^2"]);
    assert_eq!(space.shc_closure(&sq).unwrap(), space.parse_model("x1,x1^2").unwrap());
}

#[test]
fn experiments_are_reproducible() {
    let space = quad(3, Heredity::Strong);
    let design = SimDesign {
        n: 60,
        snr: 1.0,
        allocation: Allocation::Equal,
        true_terms: sim::concentration_preset_terms(),
    };
    let priors = [PriorSpec::new(PriorFamily::Hip, Scheme::ChildPenalty)];
    let cfg = polysel::SamplerConfig::new(500, 0);
    let a = sim::selection_experiment(&space, &design, &priors, &cfg, 3, 12).unwrap();
    let b = sim::selection_experiment(&space, &design, &priors, &cfg, 3, 12).unwrap();
    assert_eq!(a, b);
    for r in &a {
        let s = r.score;
        assert!((0.0..=1.0).contains(&s.tp_rate) && (0.0..=1.0).contains(&s.fp_rate));
        assert_eq!(s.found, s.true_model_rank.is_some());
    }
    let t = sim::theorem2_experiment(500, 1.0, priors[0], 3, 1).unwrap();
    assert!(t
        .iter()
        .all(|r| (r.combined - r.mass_1 - r.mass_2).abs() < 1e-15 && r.combined <= 1.0 + 1e-12));
    let bad = SimDesign { snr: 0.0, ..design };
    assert!(sim::selection_experiment(&space, &bad, &priors, &cfg, 1, 0).is_err());
}
