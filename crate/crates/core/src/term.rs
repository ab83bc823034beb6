//! Polynomial terms as exponent multi-indices and the partial order between them.
//!
//! A [`Term`] with exponents `(2, 0, 1)` is the monomial `x1^2*x3`. Terms are
//! ordered component-wise: `a` precedes `b` when every exponent of `a` is at
//! most the matching exponent of `b`. Decrementing a single positive exponent
//! yields a parent; incrementing one yields a child.
//!
//! Exponents are packed four bits apiece into a `u128`, which caps the number
//! of variables at [`MAX_VARS`] and the degree at [`MAX_DEGREE`].

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported number of main effects.
pub const MAX_VARS: usize = 32;
/// Largest supported polynomial degree.
pub const MAX_DEGREE: u32 = 15;

const BITS: u32 = 4;
const MASK: u128 = 0xF;

/// A monomial identified by its exponent vector.
///
/// The derived ordering is the canonical node order used everywhere in the
/// crate: ascending total order, then descending lexicographic on the
/// exponents so that `x1` sorts before `x2` and `x1^2` before `x1*x2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    packed: u128,
    dim: u8,
}

impl Term {
    pub fn new(exponents: &[u32]) -> Result<Self> {
        if exponents.is_empty() || exponents.len() > MAX_VARS {
            return Err(Error::TermLimit(format!(
                "a term needs between 1 and {MAX_VARS} variables, got {}",
                exponents.len()
            )));
        }
        let total: u32 = exponents.iter().sum();
        if total > MAX_DEGREE {
            return Err(Error::TermLimit(format!(
                "order {total} exceeds the maximum degree {MAX_DEGREE}"
            )));
        }
        let packed = exponents
            .iter()
            .enumerate()
            .fold(0u128, |acc, (j, &e)| acc | (u128::from(e) << (BITS * j as u32)));
        Ok(Self {
            packed,
            dim: exponents.len() as u8,
        })
    }

    /// The all-zeros term in `p` variables.
    pub fn intercept(p: usize) -> Result<Self> {
        Self::new(&vec![0; p])
    }

    /// The main effect `x_{j+1}` in `p` variables (`j` is zero-based).
    pub fn main_effect(p: usize, j: usize) -> Result<Self> {
        let mut e = vec![0; p];
        *e.get_mut(j).ok_or(Error::DimensionMismatch {
            expected: p,
            found: j + 1,
        })? = 1;
        Self::new(&e)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn exponent(&self, j: usize) -> u32 {
        debug_assert!(j < self.dim());
        ((self.packed >> (BITS * j as u32)) & MASK) as u32
    }

    pub fn exponents(&self) -> Vec<u32> {
        (0..self.dim()).map(|j| self.exponent(j)).collect()
    }

    /// Sum of the exponents.
    pub fn order(&self) -> u32 {
        (0..self.dim()).map(|j| self.exponent(j)).sum()
    }

    /// Number of nonzero exponents.
    pub fn length(&self) -> usize {
        (0..self.dim()).filter(|&j| self.exponent(j) > 0).count()
    }

    /// Nonzero exponents sorted ascending.
    pub fn term_type(&self) -> Vec<u32> {
        let mut t: Vec<u32> = self.exponents().into_iter().filter(|&e| e > 0).collect();
        t.sort_unstable();
        t
    }

    pub fn length_and_type(&self) -> (usize, Vec<u32>) {
        (self.length(), self.term_type())
    }

    pub fn is_intercept(&self) -> bool {
        self.packed == 0
    }

    /// Component-wise `self <= other`.
    pub fn precedes(&self, other: &Term) -> Result<bool> {
        self.check_dim(other)?;
        Ok((0..self.dim()).all(|j| self.exponent(j) <= other.exponent(j)))
    }

    /// Terms that immediately precede this one: one positive exponent decremented.
    pub fn parents(&self) -> Vec<Term> {
        (0..self.dim())
            .filter(|&j| self.exponent(j) > 0)
            .map(|j| Term {
                packed: self.packed - (1u128 << (BITS * j as u32)),
                dim: self.dim,
            })
            .collect()
    }

    /// Members of `full` obtained by incrementing exactly one exponent.
    pub fn children_within<'a, I>(&self, full: I) -> Vec<Term>
    where
        I: IntoIterator<Item = &'a Term>,
    {
        full.into_iter()
            .filter(|c| c.dim == self.dim && c.parents().contains(self))
            .copied()
            .collect()
    }

    /// Evaluates the monomial at one observation of the main effects.
    pub fn eval(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|j| match self.exponent(j) {
                0 => 1.0,
                1 => x[j],
                e => x[j].powi(e as i32),
            })
            .product()
    }

    /// Renders as an exponent tuple such as `(2,0,1)`.
    pub fn tuple_string(&self) -> String {
        let parts: Vec<String> = self.exponents().iter().map(u32::to_string).collect();
        format!("({})", parts.join(","))
    }

    /// Parses `1`, `x1`, `x1^2*x3` or a tuple `(2,0,1)` in `p` variables.
    pub fn parse(s: &str, p: usize) -> Result<Term> {
        let s = s.trim();
        let bad = || Error::TermParse(s.to_string());
        if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let e: Vec<u32> = inner
                .split(',')
                .map(|v| v.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            if e.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: e.len(),
                });
            }
            return Term::new(&e);
        }
        let mut e = vec![0u32; p];
        if s != "1" {
            for factor in s.split('*') {
                let factor = factor.trim();
                let rest = factor.strip_prefix('x').ok_or_else(bad)?;
                let (var, pow) = match rest.split_once('^') {
                    Some((v, k)) => (v, k.parse::<u32>().map_err(|_| bad())?),
                    None => (rest, 1),
                };
                let j: usize = var.parse().map_err(|_| bad())?;
                if j == 0 || j > p {
                    return Err(bad());
                }
                e[j - 1] += pow;
            }
        }
        Term::new(&e)
    }

    fn check_dim(&self, other: &Term) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then_with(|| self.order().cmp(&other.order()))
            .then_with(|| {
                (0..self.dim())
                    .map(|j| other.exponent(j).cmp(&self.exponent(j)))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_intercept() {
            return f.write_str("1");
        }
        let mut first = true;
        for j in 0..self.dim() {
            let e = self.exponent(j);
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "x{}", j + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

/// Number of terms of order at most `degree` in `p` variables, `C(p + degree, degree)`.
pub fn surface_size(p: usize, degree: u32) -> Result<usize> {
    let mut acc: u128 = 1;
    for i in 1..=u128::from(degree) {
        acc = acc
            .checked_mul(p as u128 + i)
            .ok_or_else(|| Error::TermLimit("surface size overflows".into()))?
            / i;
    }
    usize::try_from(acc).map_err(|_| Error::TermLimit("surface size overflows".into()))
}

/// Every term of order at most `degree` in `p` variables, intercept included,
/// in canonical order.
pub fn generate_full_surface(p: usize, degree: u32) -> Result<Vec<Term>> {
    if p == 0 || p > MAX_VARS {
        return Err(Error::TermLimit(format!(
            "number of variables must be in 1..={MAX_VARS}, got {p}"
        )));
    }
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::TermLimit(format!(
            "degree must be in 1..={MAX_DEGREE}, got {degree}"
        )));
    }
    let size = surface_size(p, degree)?;
    let mut out = Vec::with_capacity(size);
    let mut exps = vec![0u32; p];
    fn rec(j: usize, left: u32, exps: &mut [u32], out: &mut Vec<Term>) -> Result<()> {
        if j == exps.len() {
            out.push(Term::new(exps)?);
            return Ok(());
        }
        for e in 0..=left {
            exps[j] = e;
            rec(j + 1, left - e, exps, out)?;
        }
        exps[j] = 0;
        Ok(())
    }
    rec(0, degree, &mut exps, &mut out)?;
    out.sort_unstable();
    debug_assert_eq!(out.len(), size);
    Ok(out)
}
