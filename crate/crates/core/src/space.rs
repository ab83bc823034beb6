//! Model spaces nested between a base model and a full model.
//!
//! The selectable nodes `Υ(M_F) = M_F \ M_B` are indexed in canonical term
//! order, and a [`Model`] is the bitset of selected nodes. Since every parent
//! has a lower order than its child, a parent always has a lower index.

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::term::{generate_full_surface, Term};

/// Maximum number of selectable nodes in a space.
pub const MAX_NODES: usize = 256;
const WORDS: usize = MAX_NODES / 64;

/// A set of selectable nodes, used both for models and for node masks.
///
/// The derived ordering serves as the canonical model key for tie-breaking.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Model {
    words: [u64; WORDS],
}

impl Model {
    /// The base model (no selectable node included).
    pub const fn empty() -> Self {
        Self { words: [0; WORDS] }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(idx: I) -> Self {
        let mut m = Self::empty();
        for i in idx {
            m.insert(i);
        }
        m
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    /// Copy with node `i` flipped.
    #[inline]
    pub fn toggled(&self, i: usize) -> Self {
        let mut m = *self;
        m.words[i / 64] ^= 1 << (i % 64);
        m
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &Model) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Model) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn intersection(&self, other: &Model) -> Model {
        let mut m = *self;
        m.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a &= b);
        m
    }

    pub fn union(&self, other: &Model) -> Model {
        let mut m = *self;
        m.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a |= b);
        m
    }

    pub fn difference(&self, other: &Model) -> Model {
        let mut m = *self;
        m.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a &= !b);
        m
    }

    /// Included node indices, ascending.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }

    /// Hex rendering of the bitset, most significant word first.
    pub fn key_string(&self) -> String {
        let mut s = String::with_capacity(WORDS * 16);
        for w in self.words.iter().rev() {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heredity {
    /// Every parent of an included term is included.
    Strong,
    /// At least one parent of an included term is included.
    Weak,
}

impl FromStr for Heredity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strong" | "shc" | "s" => Ok(Heredity::Strong),
            "weak" | "whc" | "w" => Ok(Heredity::Weak),
            other => Err(Error::Config(format!("unknown heredity {other:?}"))),
        }
    }
}

impl fmt::Display for Heredity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heredity::Strong => "strong",
            Heredity::Weak => "weak",
        })
    }
}

#[derive(Debug, Clone)]
struct NodeInfo {
    order: u32,
    /// Parents among the selectable nodes.
    parents: Model,
    /// Children among the selectable nodes.
    children: Model,
    /// Parents inside the base model.
    base_parents: usize,
    /// Size of the full parent set, `length(α)`.
    n_parents: usize,
}

/// Count of models in a space, exact or bounded below by an enumeration cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelCount {
    Exact(BigUint),
    AtLeast(u64),
}

impl fmt::Display for ModelCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelCount::Exact(n) => write!(f, "{n}"),
            ModelCount::AtLeast(n) => write!(f, ">= {n}"),
        }
    }
}

/// All models that contain the base, nest in the full model and satisfy a
/// heredity condition.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    p: usize,
    heredity: Heredity,
    base: Vec<Term>,
    nodes: Vec<Term>,
    index: HashMap<Term, usize>,
    info: Vec<NodeInfo>,
    orders: Vec<u32>,
    quadratic: bool,
}

impl ModelSpace {
    pub fn new(base: Vec<Term>, full: Vec<Term>, heredity: Heredity) -> Result<Self> {
        let p = full
            .first()
            .map(Term::dim)
            .ok_or_else(|| Error::InvalidSpace("full model is empty".into()))?;
        if let Some(t) = base.iter().chain(&full).find(|t| t.dim() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: t.dim(),
            });
        }
        let mut full = full;
        full.sort_unstable();
        full.dedup();
        let mut base = base;
        base.sort_unstable();
        base.dedup();
        let in_full: std::collections::HashSet<Term> = full.iter().copied().collect();
        let in_base: std::collections::HashSet<Term> = base.iter().copied().collect();
        if let Some(t) = base.iter().find(|t| !in_full.contains(t)) {
            return Err(Error::InvalidSpace(format!("base term {t} is not in the full model")));
        }
        for (set, name) in [(&in_full, "full"), (&in_base, "base")] {
            for t in set.iter() {
                if let Some(par) = t.parents().into_iter().find(|q| !set.contains(q)) {
                    return Err(Error::InvalidSpace(format!(
                        "{name} model is not strongly hereditary: {t} lacks parent {par}"
                    )));
                }
            }
        }
        let nodes: Vec<Term> = full.iter().filter(|t| !in_base.contains(t)).copied().collect();
        if nodes.len() > MAX_NODES {
            return Err(Error::InvalidSpace(format!(
                "{} selectable terms exceed the limit of {MAX_NODES}",
                nodes.len()
            )));
        }
        let index: HashMap<Term, usize> = nodes.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut info: Vec<NodeInfo> = nodes
            .iter()
            .map(|t| {
                let pars = t.parents();
                NodeInfo {
                    order: t.order(),
                    parents: Model::from_indices(pars.iter().filter_map(|q| index.get(q).copied())),
                    children: Model::empty(),
                    base_parents: pars.iter().filter(|q| in_base.contains(q)).count(),
                    n_parents: pars.len(),
                }
            })
            .collect();
        for i in 0..nodes.len() {
            let parents: Vec<usize> = info[i].parents.iter().collect();
            for q in parents {
                info[q].children.insert(i);
            }
        }
        let mut orders: Vec<u32> = info.iter().map(|n| n.order).collect();
        orders.dedup();
        let quadratic = p <= crate::term::MAX_VARS
            && base.len() == 1
            && base[0].is_intercept()
            && generate_full_surface(p, 2).map(|s| s == full).unwrap_or(false);
        Ok(Self {
            p,
            heredity,
            base,
            nodes,
            index,
            info,
            orders,
            quadratic,
        })
    }

    /// Full surface of the given degree over an intercept-only base.
    pub fn full_surface(p: usize, degree: u32, heredity: Heredity) -> Result<Self> {
        let full = generate_full_surface(p, degree)?;
        Self::new(vec![Term::intercept(p)?], full, heredity)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn heredity(&self) -> Heredity {
        self.heredity
    }

    /// Same base and full models under another heredity condition.
    pub fn with_heredity(&self, heredity: Heredity) -> Self {
        Self {
            heredity,
            ..self.clone()
        }
    }

    pub fn base_terms(&self) -> &[Term] {
        &self.base
    }

    /// Selectable nodes `Υ(M_F)` in index order.
    pub fn nodes(&self) -> &[Term] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn term(&self, i: usize) -> Term {
        self.nodes[i]
    }

    pub fn node_index(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn node_order(&self, i: usize) -> u32 {
        self.info[i].order
    }

    /// Parents of node `i` among the selectable nodes.
    pub fn node_parents(&self, i: usize) -> &Model {
        &self.info[i].parents
    }

    /// `|P(α)|` counting parents in the base as well.
    pub fn parent_count(&self, i: usize) -> usize {
        self.info[i].n_parents
    }

    /// Parents of node `i` missing from `m`; base parents are always present.
    pub fn missing_parents(&self, i: usize, m: &Model) -> usize {
        let info = &self.info[i];
        info.n_parents - info.base_parents - info.parents.intersection(m).len()
    }

    /// Distinct node orders, ascending (`J_min ..= J_max`).
    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// Mask of the nodes of a given order.
    pub fn order_mask(&self, order: u32) -> Model {
        Model::from_indices((0..self.nodes.len()).filter(|&i| self.info[i].order == order))
    }

    /// Mask of every selectable node, i.e. the full model.
    pub fn full_model(&self) -> Model {
        Model::from_indices(0..self.nodes.len())
    }

    /// True when the space is the full quadratic surface over an intercept-only base.
    pub fn is_full_quadratic(&self) -> bool {
        self.quadratic
    }

    /// Whether node `i` may be present given the rest of `m`.
    #[inline]
    pub fn eligible(&self, i: usize, m: &Model) -> bool {
        let info = &self.info[i];
        match self.heredity {
            Heredity::Strong => info.parents.is_subset(m),
            Heredity::Weak => info.n_parents == 0 || info.base_parents > 0 || info.parents.intersects(m),
        }
    }

    pub fn is_valid(&self, m: &Model) -> bool {
        m.is_subset(&self.full_model()) && m.iter().all(|i| self.eligible(i, m))
    }

    fn removable(&self, i: usize, m: &Model) -> bool {
        let without = m.toggled(i);
        self.info[i]
            .children
            .intersection(m)
            .iter()
            .all(|c| self.eligible(c, &without))
    }

    /// Included nodes whose removal keeps the model valid, `E(M)`.
    pub fn extreme_nodes(&self, m: &Model) -> Model {
        Model::from_indices(m.iter().filter(|&i| self.removable(i, m)))
    }

    /// Excluded nodes whose addition keeps the model valid, `C(M)`.
    pub fn addable_children(&self, m: &Model) -> Model {
        Model::from_indices((0..self.nodes.len()).filter(|&i| !m.contains(i) && self.eligible(i, m)))
    }

    /// `E(M) ∪ C(M)`: the nodes whose inclusion can be flipped.
    pub fn toggleable(&self, m: &Model) -> Model {
        self.extreme_nodes(m).union(&self.addable_children(m))
    }

    /// Visits every valid model once, depth-first over the node order with
    /// exclusion tried before inclusion. The base model comes first.
    pub fn for_each_model<F>(&self, mut f: F) -> ControlFlow<()>
    where
        F: FnMut(&Model) -> ControlFlow<()>,
    {
        fn rec<F>(space: &ModelSpace, i: usize, m: &mut Model, f: &mut F) -> ControlFlow<()>
        where
            F: FnMut(&Model) -> ControlFlow<()>,
        {
            if i == space.nodes.len() {
                return f(m);
            }
            rec(space, i + 1, m, f)?;
            if space.eligible(i, m) {
                m.insert(i);
                let r = rec(space, i + 1, m, f);
                m.remove(i);
                r?;
            }
            ControlFlow::Continue(())
        }
        let mut m = Model::empty();
        rec(self, 0, &mut m, &mut f)
    }

    /// All models, or [`Error::CapExceeded`] when there are more than `cap`.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<Model>> {
        if cap == 0 {
            return Err(Error::Config("enumeration cap must be positive".into()));
        }
        let mut out = Vec::new();
        let flow = self.for_each_model(|m| {
            if out.len() as u64 >= cap {
                return ControlFlow::Break(());
            }
            out.push(*m);
            ControlFlow::Continue(())
        });
        match flow {
            ControlFlow::Break(()) => Err(Error::CapExceeded { cap }),
            ControlFlow::Continue(()) => Ok(out),
        }
    }

    /// Exact size via the quadratic closed form when it applies, otherwise by
    /// enumeration up to `cap`.
    pub fn count_models(&self, cap: u64) -> ModelCount {
        if let Ok(n) = self.closed_form_count() {
            return ModelCount::Exact(n);
        }
        let mut n = 0u64;
        let flow = self.for_each_model(|_| {
            if n >= cap {
                return ControlFlow::Break(());
            }
            n += 1;
            ControlFlow::Continue(())
        });
        match flow {
            ControlFlow::Break(()) => ModelCount::AtLeast(cap),
            ControlFlow::Continue(()) => ModelCount::Exact(BigUint::from(n)),
        }
    }

    pub fn closed_form_count(&self) -> Result<BigUint> {
        if !self.quadratic {
            return Err(Error::NotQuadratic);
        }
        Ok(count_quadratic_space(self.p, self.heredity))
    }

    /// Resolves terms to a model; base terms are accepted and ignored.
    pub fn model_from_terms(&self, terms: &[Term]) -> Result<Model> {
        let mut m = Model::empty();
        for t in terms {
            if t.dim() != self.p {
                return Err(Error::DimensionMismatch {
                    expected: self.p,
                    found: t.dim(),
                });
            }
            match self.index.get(t) {
                Some(&i) => m.insert(i),
                None if self.base.contains(t) => {}
                None => return Err(Error::InvalidSpace(format!("term {t} is not in the full model"))),
            }
        }
        Ok(m)
    }

    /// Parses a comma-separated term list such as `x1,x2,x1*x2`.
    pub fn parse_model(&self, s: &str) -> Result<Model> {
        let terms: Vec<Term> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| Term::parse(t, self.p))
            .collect::<Result<_>>()?;
        self.model_from_terms(&terms)
    }

    /// Base terms plus included nodes, in canonical order.
    pub fn model_terms(&self, m: &Model) -> Vec<Term> {
        let mut v: Vec<Term> = self
            .base
            .iter()
            .copied()
            .chain(m.iter().map(|i| self.nodes[i]))
            .collect();
        v.sort_unstable();
        v
    }

    pub fn model_names(&self, m: &Model) -> Vec<String> {
        self.model_terms(m).iter().map(Term::to_string).collect()
    }

    /// Smallest strongly hereditary model containing `terms`: every node that
    /// precedes one of them.
    pub fn shc_closure(&self, terms: &[Term]) -> Result<Model> {
        let mut m = Model::empty();
        for t in terms {
            if !self.index.contains_key(t) && !self.base.contains(t) {
                return Err(Error::InvalidSpace(format!("term {t} is not in the full model")));
            }
            for (i, n) in self.nodes.iter().enumerate() {
                if n.precedes(t)? {
                    m.insert(i);
                }
            }
        }
        Ok(m)
    }

    /// Graphviz rendering of a model's DAG.
    pub fn export_dot(&self, m: &Model) -> String {
        let terms = self.model_terms(m);
        let mut out = String::from("digraph model {\n");
        for t in &terms {
            out.push_str(&format!("  \"{t}\";\n"));
        }
        for child in &terms {
            for parent in child.parents() {
                if terms.contains(&parent) {
                    out.push_str(&format!("  \"{parent}\" -> \"{child}\";\n"));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    (1..=k).fold(BigUint::from(1u32), |acc, i| acc * (n + 1 - i) / i)
}

/// Number of models in the full quadratic surface over `p` mains with an
/// intercept-only base.
///
/// Conditioning on the set of `k` included mains, the eligible second-order
/// nodes are fixed and may be chosen freely: the `k` squares plus either the
/// `C(k,2)` interactions among included mains (strong) or the
/// `C(p,2) - C(p-k,2)` interactions touching one (weak).
pub fn count_quadratic_space(p: usize, heredity: Heredity) -> BigUint {
    let p = p as u64;
    let pairs = |n: u64| n * n.saturating_sub(1) / 2;
    (0..=p)
        .map(|k| {
            let free = match heredity {
                Heredity::Strong => k + pairs(k),
                Heredity::Weak => k + pairs(p) - pairs(p - k),
            };
            binomial(p, k) << free as usize
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad2(h: Heredity) -> ModelSpace {
        ModelSpace::full_surface(2, 2, h).unwrap()
    }

    fn model(s: &ModelSpace, spec: &str) -> Model {
        s.parse_model(spec).unwrap()
    }

    #[test]
    fn bitset_basics() {
        let mut m = Model::empty();
        m.insert(3);
        m.insert(200);
        assert!(m.contains(200) && m.contains(3) && !m.contains(4));
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![3, 200]);
        assert_eq!(m.len(), 2);
        assert_eq!(m.toggled(3).len(), 1);
        assert!(Model::from_indices([3]).is_subset(&m));
    }

    #[test]
    fn validity_examples() {
        let s = quad2(Heredity::Strong);
        assert!(!s.is_valid(&model(&s, "x1,x1^2,x1*x2")));
        let w = quad2(Heredity::Weak);
        assert!(w.is_valid(&model(&w, "x1,x1^2,x1*x2")));
        assert!(!w.is_valid(&model(&w, "x2,x1*x2,x2^2,x1^2")));
    }

    #[test]
    fn extreme_node_examples() {
        let s = quad2(Heredity::Strong);
        let m = model(&s, "x1,x2,x1*x2");
        assert_eq!(s.extreme_nodes(&m), model(&s, "x1*x2"));
        let w = quad2(Heredity::Weak);
        let m = model(&w, "x1,x1^2,x1*x2");
        assert_eq!(w.extreme_nodes(&m), model(&w, "x1^2,x1*x2"));
        assert!(s.extreme_nodes(&Model::empty()).is_empty());
    }

    #[test]
    fn addable_children_examples() {
        let s = quad2(Heredity::Strong);
        assert_eq!(s.addable_children(&Model::empty()), model(&s, "x1,x2"));
        assert_eq!(s.addable_children(&model(&s, "x1,x2")), model(&s, "x1^2,x1*x2,x2^2"));
        let w = quad2(Heredity::Weak);
        assert_eq!(w.addable_children(&model(&w, "x1")), model(&w, "x2,x1^2,x1*x2"));
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(quad2(Heredity::Strong).enumerate(100).unwrap().len(), 13);
        let s5 = ModelSpace::full_surface(5, 2, Heredity::Strong).unwrap();
        assert_eq!(s5.enumerate(1_000_000).unwrap().len(), 38_619);
        let t = Term::intercept(2).unwrap();
        let trivial = ModelSpace::new(vec![t], vec![t], Heredity::Strong).unwrap();
        assert_eq!(trivial.enumerate(10).unwrap(), vec![Model::empty()]);
        assert_eq!(s5.enumerate(10_000), Err(Error::CapExceeded { cap: 10_000 }));
    }

    #[test]
    fn closed_form_counts() {
        assert_eq!(count_quadratic_space(5, Heredity::Strong), BigUint::from(38_619u32));
        assert_eq!(
            count_quadratic_space(8, Heredity::Strong),
            BigUint::from(70_927_591_153u64)
        );
        assert_eq!(
            count_quadratic_space(8, Heredity::Weak),
            BigUint::from(649_061_074_945u64)
        );
    }

    #[test]
    fn closed_form_matches_enumeration() {
        for p in 1..=4 {
            for h in [Heredity::Strong, Heredity::Weak] {
                let s = ModelSpace::full_surface(p, 2, h).unwrap();
                let n = s.enumerate(10_000_000).unwrap().len();
                assert_eq!(count_quadratic_space(p, h), BigUint::from(n), "p={p} {h}");
            }
        }
    }

    #[test]
    fn non_quadratic_space_has_no_closed_form() {
        let s = ModelSpace::full_surface(2, 3, Heredity::Strong).unwrap();
        assert_eq!(s.closed_form_count(), Err(Error::NotQuadratic));
        assert!(matches!(s.count_models(1_000), ModelCount::Exact(_)));
        assert_eq!(s.count_models(3), ModelCount::AtLeast(3));
    }

    #[test]
    fn enumerated_models_respect_heredity_and_moves() {
        for s in [
            quad2(Heredity::Strong),
            quad2(Heredity::Weak),
            ModelSpace::full_surface(3, 2, Heredity::Weak).unwrap(),
            ModelSpace::full_surface(5, 2, Heredity::Strong).unwrap(),
        ] {
            let all = s.enumerate(1_000_000).unwrap();
            let set: std::collections::HashSet<Model> = all.iter().copied().collect();
            assert_eq!(set.len(), all.len());
            for m in &all {
                assert!(s.is_valid(m));
                for i in s.extreme_nodes(m).iter() {
                    assert!(set.contains(&m.toggled(i)));
                }
                for i in s.addable_children(m).iter() {
                    assert!(set.contains(&m.toggled(i)));
                }
                // the complement of E ∪ C never yields a valid toggle
                for i in (0..s.node_count()).filter(|&i| !s.toggleable(m).contains(i)) {
                    assert!(!s.is_valid(&m.toggled(i)));
                }
            }
        }
    }

    #[test]
    fn models_recoverable_from_extreme_and_children_sets() {
        let s = ModelSpace::full_surface(3, 2, Heredity::Strong).unwrap();
        let all = s.enumerate(100_000).unwrap();
        let by_e: HashMap<Model, Model> = all.iter().map(|m| (s.extreme_nodes(m), *m)).collect();
        let by_c: HashMap<Model, Model> = all.iter().map(|m| (s.addable_children(m), *m)).collect();
        assert_eq!(by_e.len(), all.len());
        assert_eq!(by_c.len(), all.len());

        let w = ModelSpace::full_surface(3, 2, Heredity::Weak).unwrap();
        let all = w.enumerate(100_000).unwrap();
        let by_pair: HashMap<(Model, Model), Model> = all
            .iter()
            .map(|m| ((w.extreme_nodes(m), w.addable_children(m)), *m))
            .collect();
        assert_eq!(by_pair.len(), all.len());
    }

    #[test]
    fn enumeration_is_deterministic() {
        let s = ModelSpace::full_surface(3, 2, Heredity::Weak).unwrap();
        assert_eq!(s.enumerate(100_000).unwrap(), s.enumerate(100_000).unwrap());
        assert_eq!(s.enumerate(100_000).unwrap()[0], Model::empty());
    }

    #[test]
    fn dot_export() {
        let s = quad2(Heredity::Strong);
        assert_eq!(s.export_dot(&Model::empty()), "digraph model {\n  \"1\";\n}\n");
        let d = s.export_dot(&model(&s, "x1"));
        assert_eq!(d.matches(';').count(), 3);
        assert!(d.contains("\"1\" -> \"x1\""));
        let d = s.export_dot(&s.full_model());
        assert_eq!(d.matches("->").count(), 6);
        assert_eq!(d.lines().filter(|l| l.ends_with(';') && !l.contains("->")).count(), 6);
    }

    #[test]
    fn space_construction_errors() {
        let p = |s: &str| Term::parse(s, 2).unwrap();
        // full model missing a parent
        assert!(ModelSpace::new(vec![p("1")], vec![p("1"), p("x1*x2"), p("x1")], Heredity::Strong).is_err());
        // base not inside full
        assert!(ModelSpace::new(vec![p("1"), p("x2")], vec![p("1"), p("x1")], Heredity::Strong).is_err());
    }

    #[test]
    fn shc_closure_examples() {
        let s = quad2(Heredity::Strong);
        let sq = Term::parse("x1^2", 2).unwrap();
        assert_eq!(s.shc_closure(&[sq]).unwrap(), model(&s, "x1,x1^2"));
        let valid = model(&s, "x1,x2,x1*x2");
        assert_eq!(s.shc_closure(&s.model_terms(&valid)).unwrap(), valid);
    }
}
