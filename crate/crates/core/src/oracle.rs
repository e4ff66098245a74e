//! Brute-force ground truth for hereditarily finite chains.
//!
//! Powers are built as full function tables and ordered by scanning for the
//! first differing position; nothing here goes through the comparator of
//! the chain module except for the (finite) base and exponent themselves.

use std::cmp::Ordering;

use crate::chain::{self, ChainDesc, Elem};
use crate::error::{ChainError, Result};

/// A finite chain together with its elements in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteModel {
    pub chain: ChainDesc,
    pub elems: Vec<Elem>,
}

impl FiniteModel {
    /// Enumerates a finite chain through the chain module.
    pub fn of(chain: &ChainDesc) -> Result<Self> {
        Ok(FiniteModel {
            chain: chain.clone(),
            elems: chain::enumerate(chain)?,
        })
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn position(&self, e: &Elem) -> Option<usize> {
        self.elems.iter().position(|x| x == e)
    }
}

/// All functions `exp → base`, sorted by first difference in ascending
/// exponent order, rendered as canonical maps.
pub fn brute_power(base: &ChainDesc, zero: &Elem, exp: &ChainDesc) -> Result<FiniteModel> {
    let values = chain::enumerate(base)?;
    let positions = chain::enumerate(exp)?;
    if !values.contains(zero) {
        return Err(ChainError::not_member(base, zero));
    }
    let total = (values.len() as u128).checked_pow(positions.len() as u32);
    if total.is_none_or(|t| t > chain::ENUMERATION_LIMIT) {
        return Err(ChainError::NotFinite(format!("pow({base}, {zero}, {exp})")));
    }

    // rank of each base value; functions are vectors of ranks
    let mut tables: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in &positions {
        tables = tables
            .into_iter()
            .flat_map(|t| {
                (0..values.len()).map(move |r| {
                    let mut t = t.clone();
                    t.push(r);
                    t
                })
            })
            .collect();
    }
    tables.sort_by(|a, b| first_difference(a, b));

    let elems = tables
        .into_iter()
        .map(|t| {
            Elem::Map(
                positions
                    .iter()
                    .zip(t)
                    .filter(|(_, r)| values[*r] != *zero)
                    .map(|(p, r)| (p.clone(), values[r].clone()))
                    .collect(),
            )
        })
        .collect();
    Ok(FiniteModel {
        chain: ChainDesc::Pow {
            base: Box::new(base.clone()),
            zero: zero.clone(),
            exp: Box::new(exp.clone()),
        },
        elems,
    })
}

fn first_difference(a: &[usize], b: &[usize]) -> Ordering {
    a.iter()
        .zip(b)
        .find(|(x, y)| x != y)
        .map_or(Ordering::Equal, |(x, y)| x.cmp(y))
}

/// Outcome of a convexity or upward-closure check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Holds,
    /// `lo < gap < hi` with `lo`, `hi` in the subset and `gap` outside it.
    Gap { lo: Elem, gap: Elem, hi: Elem },
    /// `low` is in the subset, `above > low` is not.
    NotUpwardClosed { low: Elem, above: Elem },
    /// A subset element is not in the model.
    Foreign(Elem),
}

impl Check {
    pub fn holds(&self) -> bool {
        matches!(self, Check::Holds)
    }
}

fn marks(model: &FiniteModel, subset: &[Elem]) -> std::result::Result<Vec<bool>, Elem> {
    let mut marked = vec![false; model.len()];
    for e in subset {
        match model.position(e) {
            Some(i) => marked[i] = true,
            None => return Err(e.clone()),
        }
    }
    Ok(marked)
}

/// No model element strictly between two subset members lies outside the subset.
pub fn check_convex(model: &FiniteModel, subset: &[Elem]) -> Check {
    let marked = match marks(model, subset) {
        Ok(m) => m,
        Err(e) => return Check::Foreign(e),
    };
    let (Some(lo), Some(hi)) = (
        marked.iter().position(|m| *m),
        marked.iter().rposition(|m| *m),
    ) else {
        return Check::Holds;
    };
    match (lo..=hi).find(|i| !marked[*i]) {
        Some(gap) => Check::Gap {
            lo: model.elems[lo].clone(),
            gap: model.elems[gap].clone(),
            hi: model.elems[hi].clone(),
        },
        None => Check::Holds,
    }
}

/// The subset is upward closed in the model.
pub fn check_final_segment(model: &FiniteModel, subset: &[Elem]) -> Check {
    let marked = match marks(model, subset) {
        Ok(m) => m,
        Err(e) => return Check::Foreign(e),
    };
    let Some(lo) = marked.iter().position(|m| *m) else {
        return Check::Holds;
    };
    match (lo..marked.len()).find(|i| !marked[*i]) {
        Some(i) => Check::NotUpwardClosed {
            low: model.elems[lo].clone(),
            above: model.elems[i].clone(),
        },
        None => Check::Holds,
    }
}
