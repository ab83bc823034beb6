mod common;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::quad;
use polysel::prior::{ModelPrior, PriorFamily, PriorSpec, Scheme};
use polysel::space::Heredity;
use polysel::term::generate_full_surface;
use polysel::{Model, ModelSpace, Term};

/// Prior probabilities for the two-predictor quadratic strong-heredity
/// space, columns HIP, HOP, HUP, HLP/HTP under (1,1) then
/// (1,ch).
const REFERENCE: [(&str, [(u32, u32); 8]); 13] = [
    ("", [(1, 4), (4, 9), (1, 3), (1, 2), (1, 3), (5, 7), (1, 3), (1, 2)]),
    (
        "x1",
        [(1, 8), (1, 9), (1, 12), (1, 12), (1, 12), (5, 56), (1, 12), (1, 12)],
    ),
    (
        "x2",
        [(1, 8), (1, 9), (1, 12), (1, 12), (1, 12), (5, 56), (1, 12), (1, 12)],
    ),
    (
        "x1,x1^2",
        [(1, 8), (1, 9), (1, 12), (1, 12), (1, 12), (5, 168), (1, 12), (1, 12)],
    ),
    (
        "x2,x2^2",
        [(1, 8), (1, 9), (1, 12), (1, 12), (1, 12), (5, 168), (1, 12), (1, 12)],
    ),
    (
        "x1,x2",
        [(1, 32), (3, 64), (1, 12), (1, 12), (1, 60), (1, 72), (1, 18), (1, 24)],
    ),
    (
        "x1,x2,x1^2",
        [(1, 32), (1, 64), (1, 36), (1, 60), (1, 60), (1, 168), (1, 36), (1, 72)],
    ),
    (
        "x1,x2,x1*x2",
        [(1, 32), (1, 64), (1, 36), (1, 60), (1, 60), (1, 168), (1, 18), (1, 24)],
    ),
    (
        "x1,x2,x2^2",
        [(1, 32), (1, 64), (1, 36), (1, 60), (1, 60), (1, 168), (1, 36), (1, 72)],
    ),
    (
        "x1,x2,x1^2,x1*x2",
        [
            (1, 32),
            (1, 192),
            (1, 36),
            (1, 120),
            (1, 30),
            (1, 252),
            (1, 36),
            (1, 72),
        ],
    ),
    (
        "x1,x2,x1^2,x2^2",
        [
            (1, 32),
            (1, 192),
            (1, 36),
            (1, 120),
            (1, 30),
            (1, 252),
            (1, 18),
            (1, 72),
        ],
    ),
    (
        "x1,x2,x1*x2,x2^2",
        [
            (1, 32),
            (1, 192),
            (1, 36),
            (1, 120),
            (1, 30),
            (1, 252),
            (1, 36),
            (1, 72),
        ],
    ),
    (
        "x1,x2,x1^2,x1*x2,x2^2",
        [(1, 32), (1, 576), (1, 12), (1, 120), (1, 6), (1, 252), (1, 18), (1, 72)],
    ),
];

fn reference_columns() -> [[PriorSpec; 2]; 8] {
    use PriorFamily::*;
    use Scheme::*;
    [
        [PriorSpec::new(Hip, AllOnes); 2],
        [PriorSpec::new(Hip, ChildPenalty); 2],
        [PriorSpec::new(Hop, AllOnes); 2],
        [PriorSpec::new(Hop, ChildPenalty); 2],
        [PriorSpec::new(Hup, AllOnes); 2],
        [PriorSpec::new(Hup, ChildPenalty); 2],
        [PriorSpec::new(Hlp, AllOnes), PriorSpec::new(Htp, AllOnes)],
        [PriorSpec::new(Hlp, ChildPenalty), PriorSpec::new(Htp, ChildPenalty)],
    ]
}

fn all_specs() -> Vec<PriorSpec> {
    let mut v = vec![PriorSpec::new(PriorFamily::Epp, Scheme::AllOnes)];
    for f in &PriorFamily::ALL[1..] {
        for s in [Scheme::AllOnes, Scheme::ChildPenalty] {
            v.push(PriorSpec::new(*f, s));
        }
    }
    v
}

#[test]
fn reference_grid_is_reproduced() {
    let space = quad(2, Heredity::Strong);
    for (c, specs) in reference_columns().iter().enumerate() {
        for spec in specs {
            let prior = ModelPrior::new(&space, *spec).unwrap();
            for (model, row) in &REFERENCE {
                let m = space.parse_model(model).unwrap();
                let (num, den) = row[c];
                let want = num as f64 / den as f64;
                let got = prior.log_prior(&m).unwrap().exp();
                assert!(
                    (got - want).abs() <= 1e-12 * want,
                    "{} {model}: {got} vs {num}/{den}",
                    spec.label()
                );
            }
        }
    }
}

#[test]
fn priors_normalize() {
    for (p, tol) in [(2, 1e-10), (3, 1e-10), (5, 1e-8)] {
        for h in [Heredity::Strong, Heredity::Weak] {
            if p == 5 && h == Heredity::Weak {
                continue;
            }
            let space = quad(p, h);
            let models = space.enumerate(u64::MAX).unwrap();
            for spec in all_specs() {
                let prior = ModelPrior::new(&space, spec).unwrap();
                let total: f64 = models.iter().map(|m| prior.log_prior(m).unwrap().exp()).sum();
                assert!((total - 1.0).abs() <= tol, "p={p} {h} {}: {total}", spec.label());
            }
        }
    }
}

#[test]
fn penalized_whm_priors_normalize() {
    let space = quad(3, Heredity::Weak);
    let models = space.enumerate(u64::MAX).unwrap();
    for f in [PriorFamily::Hip, PriorFamily::Hlp, PriorFamily::Htp] {
        for s in [Scheme::AllOnes, Scheme::ChildPenalty] {
            let prior = ModelPrior::new(&space, PriorSpec::new(f, s).with_parent_penalty()).unwrap();
            let total: f64 = models.iter().map(|m| prior.log_prior(m).unwrap().exp()).sum();
            assert!((total - 1.0).abs() < 1e-10, "{}: {total}", prior.spec().label());
        }
    }
}

#[test]
fn epp_is_uniform() {
    let space = quad(2, Heredity::Strong);
    let prior = ModelPrior::new(&space, PriorSpec::new(PriorFamily::Epp, Scheme::AllOnes)).unwrap();
    assert!((prior.log_prior(&Model::empty()).unwrap() - (1.0f64 / 13.0).ln()).abs() < 1e-14);
}

#[test]
fn child_penalty_never_rewards_growth() {
    let space = quad(2, Heredity::Strong);
    for f in [
        PriorFamily::Hip,
        PriorFamily::Hop,
        PriorFamily::Hup,
        PriorFamily::Hlp,
        PriorFamily::Htp,
    ] {
        let prior = ModelPrior::new(&space, PriorSpec::new(f, Scheme::ChildPenalty)).unwrap();
        for m in space.enumerate(u64::MAX).unwrap() {
            let base = prior.log_prior(&m).unwrap();
            for i in space.addable_children(&m).iter() {
                let bigger = prior.log_prior(&m.toggled(i)).unwrap();
                assert!(bigger <= base + 1e-12, "{f:?}: adding node {i} to {m:?}");
            }
        }
    }
}

#[test]
fn length_and_type_priors_agree_up_to_order_three() {
    let full = generate_full_surface(3, 3).unwrap();
    let space = ModelSpace::new(vec![Term::intercept(3).unwrap()], full, Heredity::Strong).unwrap();
    let models = space.enumerate(10_000_000).unwrap();
    for s in [Scheme::AllOnes, Scheme::ChildPenalty] {
        let hlp = ModelPrior::new(&space, PriorSpec::new(PriorFamily::Hlp, s)).unwrap();
        let htp = ModelPrior::new(&space, PriorSpec::new(PriorFamily::Htp, s)).unwrap();
        for m in &models {
            let (a, b) = (hlp.log_prior(m).unwrap(), htp.log_prior(m).unwrap());
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn length_and_type_priors_differ_at_order_four() {
    // x1^2*x2^2 and x1^3*x2 share order and length but not type.
    let space = ModelSpace::full_surface(2, 4, Heredity::Strong).unwrap();
    let models = space.enumerate(10_000_000).unwrap();
    let hlp = ModelPrior::new(&space, PriorSpec::new(PriorFamily::Hlp, Scheme::AllOnes)).unwrap();
    let htp = ModelPrior::new(&space, PriorSpec::new(PriorFamily::Htp, Scheme::AllOnes)).unwrap();
    let gap = models
        .iter()
        .map(|m| (hlp.log_prior(m).unwrap() - htp.log_prior(m).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(gap > 1e-3);
}

#[test]
fn hip_ones_is_fixed_half_inclusion() {
    let space = quad(3, Heredity::Strong);
    let prior = ModelPrior::new(&space, PriorSpec::new(PriorFamily::Hip, Scheme::AllOnes)).unwrap();
    for m in space.enumerate(u64::MAX).unwrap() {
        let k = m.len() + space.addable_children(&m).len();
        let want = -(k as f64) * std::f64::consts::LN_2;
        assert!((prior.log_prior(&m).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn sampled_frequencies_match_reference_columns() {
    let space = quad(2, Heredity::Strong);
    let draws = 1_000_000u32;
    for (c, specs) in reference_columns().iter().enumerate() {
        let prior = ModelPrior::new(&space, specs[0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + c as u64);
        let mut counts: HashMap<Model, u32> = HashMap::new();
        for _ in 0..draws {
            let m = prior.sample(&mut rng).unwrap();
            assert!(space.is_valid(&m));
            *counts.entry(m).or_default() += 1;
        }
        assert_eq!(counts.len(), 13, "{}: every model is reachable", specs[0].label());
        for (model, row) in &REFERENCE {
            let m = space.parse_model(model).unwrap();
            let (num, den) = row[c];
            let p = num as f64 / den as f64;
            let f = counts[&m] as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!(
                (f - p).abs() <= 3.0 * se,
                "{} {model}: {f} vs {p} (se {se})",
                specs[0].label()
            );
        }
    }
}

#[test]
fn sampling_respects_other_spaces() {
    let space = quad(3, Heredity::Weak);
    let models = space.enumerate(u64::MAX).unwrap();
    let draws = 400_000u32;
    for spec in [
        PriorSpec::new(PriorFamily::Hip, Scheme::ChildPenalty).with_parent_penalty(),
        PriorSpec::new(PriorFamily::Hop, Scheme::ChildPenalty),
        PriorSpec::new(PriorFamily::Hup, Scheme::AllOnes),
        PriorSpec::new(PriorFamily::Htp, Scheme::ChildPenalty),
    ] {
        let prior = ModelPrior::new(&space, spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts: HashMap<Model, u32> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(prior.sample(&mut rng).unwrap()).or_default() += 1;
        }
        // Total variation between empirical and exact stays at the
        // sampling-noise scale.
        let tv: f64 = 0.5
            * models
                .iter()
                .map(|m| {
                    (counts.get(m).copied().unwrap_or(0) as f64 / draws as f64 - prior.log_prior(m).unwrap().exp())
                        .abs()
                })
                .sum::<f64>();
        assert!(tv < 0.02, "{}: {tv}", spec.label());
    }
}

#[test]
fn trivial_space_always_samples_the_base() {
    let t = Term::parse("x1", 1).unwrap();
    let space = ModelSpace::new(
        vec![Term::intercept(1).unwrap(), t],
        vec![Term::intercept(1).unwrap(), t],
        Heredity::Strong,
    )
    .unwrap();
    let prior = ModelPrior::new(&space, PriorSpec::new(PriorFamily::Hop, Scheme::ChildPenalty)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        assert_eq!(prior.sample(&mut rng).unwrap(), Model::empty());
    }
    assert_eq!(prior.log_prior(&Model::empty()).unwrap(), 0.0);
}
