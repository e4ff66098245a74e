//! Chain descriptors, element values and the structural operations on them.
//!
//! Every chain is built from a fixed set of constructors. Comparison is total
//! and decidable on members; structural predicates that the implemented rules
//! cannot settle answer [`ExtBool::Unknown`] or [`Lookup::Unknown`].

use std::cmp::Ordering;

use crate::error::{ChainError, Result};
use crate::fixpoint;

/// Upper bound on the number of elements [`enumerate`] will materialize.
pub const ENUMERATION_LIMIT: u128 = 1 << 20;

/// Which lexicographic functional equation a fixed-point chain solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EqKind {
    /// `(Δ^Γ)^{≤0} ≃ Γ`
    Eq1,
    /// `Δ^Γ ≃ Γ`
    Eq2,
    /// `(Δ^Γ)^{<0} ≃ Γ`
    Eq3,
}

impl EqKind {
    pub fn number(self) -> u8 {
        match self {
            EqKind::Eq1 => 1,
            EqKind::Eq2 => 2,
            EqKind::Eq3 => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(EqKind::Eq1),
            2 => Some(EqKind::Eq2),
            3 => Some(EqKind::Eq3),
            _ => None,
        }
    }

    /// Whether the stage chains use the strict segment below zero.
    pub(crate) fn strict(self) -> bool {
        self == EqKind::Eq3
    }
}

/// Symbolic description of a chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChainDesc {
    /// `f0 < f1 < … < f(n-1)`
    Fin(u64),
    /// `n0 < n1 < …`
    Omega,
    /// `… < s2 < s1 < s0`
    OmegaStar,
    /// Lexicographic power `base^exp` with designated zero, finitely supported.
    Pow {
        base: Box<ChainDesc>,
        zero: Elem,
        exp: Box<ChainDesc>,
    },
    /// Initial segment `of^{≤bound}`.
    SegLe { of: Box<ChainDesc>, bound: Elem },
    /// Strict initial segment `of^{<bound}`.
    SegLt { of: Box<ChainDesc>, bound: Elem },
    /// Finite lexicographic product; factor `i` sits at position `FinIdx(i)`.
    HetProd(Vec<(ChainDesc, Elem)>),
    /// The union chain of the stage chains for one functional equation.
    Fix {
        kind: EqKind,
        base: Box<ChainDesc>,
        zero: Elem,
    },
}

/// Element values. Which variants are meaningful depends on the chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Elem {
    FinIdx(u64),
    Nat(u64),
    /// `StarIdx(0)` is the top of ω*.
    StarIdx(u64),
    /// Canonical finitely supported map: ascending keys, no zero values.
    Map(Vec<(Elem, Elem)>),
    /// Element of stage `n` of a fixed-point chain.
    Stage(u32, Box<Elem>),
    Tuple(Vec<Elem>),
}

impl Elem {
    /// The map with empty support, written `0` in a power.
    pub fn zero_map() -> Elem {
        Elem::Map(Vec::new())
    }

    pub fn stage(n: u32, inner: Elem) -> Elem {
        Elem::Stage(n, Box::new(inner))
    }

    pub fn as_map(&self) -> Option<&[(Elem, Elem)]> {
        match self {
            Elem::Map(pairs) => Some(pairs),
            _ => None,
        }
    }

    /// Maximum constructor nesting of the value.
    pub fn depth(&self) -> usize {
        match self {
            Elem::FinIdx(_) | Elem::Nat(_) | Elem::StarIdx(_) => 0,
            Elem::Map(pairs) => {
                1 + pairs
                    .iter()
                    .map(|(k, v)| k.depth().max(v.depth()))
                    .max()
                    .unwrap_or(0)
            }
            Elem::Stage(_, inner) => 1 + inner.depth(),
            Elem::Tuple(values) => 1 + values.iter().map(Elem::depth).max().unwrap_or(0),
        }
    }
}

/// Three-valued answer for structural predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtBool {
    True,
    False,
    Unknown,
}

impl From<bool> for ExtBool {
    fn from(b: bool) -> Self {
        if b {
            ExtBool::True
        } else {
            ExtBool::False
        }
    }
}

/// Result of a structural lookup: found, provably absent, or undecided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lookup<T> {
    Found(T),
    Absent,
    Unknown,
}

impl<T> Lookup<T> {
    pub fn found(self) -> Option<T> {
        match self {
            Lookup::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn exists(&self) -> ExtBool {
        match self {
            Lookup::Found(_) => ExtBool::True,
            Lookup::Absent => ExtBool::False,
            Lookup::Unknown => ExtBool::Unknown,
        }
    }
}

/// Cardinality as far as the structural rules can tell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Card {
    /// Finite; `None` when the count overflows.
    Finite(Option<u128>),
    Infinite,
    Unknown,
}

impl ChainDesc {
    pub fn fin(n: u64) -> Result<ChainDesc> {
        let c = ChainDesc::Fin(n);
        c.validate()?;
        Ok(c)
    }

    pub fn pow(base: ChainDesc, zero: Elem, exp: ChainDesc) -> Result<ChainDesc> {
        let c = ChainDesc::Pow {
            base: Box::new(base),
            zero,
            exp: Box::new(exp),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn seg_le(of: ChainDesc, bound: Elem) -> Result<ChainDesc> {
        let c = ChainDesc::SegLe {
            of: Box::new(of),
            bound,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn seg_lt(of: ChainDesc, bound: Elem) -> Result<ChainDesc> {
        let c = ChainDesc::SegLt {
            of: Box::new(of),
            bound,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn het_prod(factors: Vec<(ChainDesc, Elem)>) -> Result<ChainDesc> {
        let c = ChainDesc::HetProd(factors);
        c.validate()?;
        Ok(c)
    }

    pub fn fix(kind: EqKind, base: ChainDesc, zero: Elem) -> Result<ChainDesc> {
        let c = ChainDesc::Fix {
            kind,
            base: Box::new(base),
            zero,
        };
        c.validate()?;
        Ok(c)
    }

    /// Checks the construction-time invariants recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            ChainDesc::Fin(0) => Err(ChainError::Invariant("empty chain".into())),
            ChainDesc::Fin(_) | ChainDesc::Omega | ChainDesc::OmegaStar => Ok(()),
            ChainDesc::Pow { base, zero, exp } => {
                base.validate()?;
                exp.validate()?;
                require_member(base, zero, "zero")
            }
            ChainDesc::SegLe { of, bound } => {
                of.validate()?;
                require_member(of, bound, "bound")
            }
            ChainDesc::SegLt { of, bound } => {
                of.validate()?;
                require_member(of, bound, "bound")?;
                if is_first(of, bound) == ExtBool::True {
                    return Err(ChainError::Invariant(
                        "empty chain: strict segment below the least element".into(),
                    ));
                }
                Ok(())
            }
            ChainDesc::HetProd(factors) => {
                if factors.is_empty() {
                    return Err(ChainError::Invariant("empty factor list".into()));
                }
                for (factor, zero) in factors {
                    factor.validate()?;
                    require_member(factor, zero, "zero")?;
                }
                Ok(())
            }
            ChainDesc::Fix { kind, base, zero } => {
                base.validate()?;
                require_member(base, zero, "zero")?;
                match kind {
                    EqKind::Eq1 => Ok(()),
                    EqKind::Eq2 => match is_last(base, zero) {
                        ExtBool::True => Ok(()),
                        ExtBool::False => Err(ChainError::Invariant("zero not last".into())),
                        ExtBool::Unknown => Err(ChainError::Invariant(
                            "cannot establish that zero is last".into(),
                        )),
                    },
                    EqKind::Eq3 => match predecessor(base, zero) {
                        Lookup::Found(_) => Ok(()),
                        Lookup::Absent => Err(ChainError::Invariant(
                            "no last element below zero".into(),
                        )),
                        Lookup::Unknown => Err(ChainError::Invariant(
                            "cannot derive the last element below zero".into(),
                        )),
                    },
                }
            }
        }
    }

    /// Exponent chain of a power.
    pub fn exponent(&self) -> Option<&ChainDesc> {
        match self {
            ChainDesc::Pow { exp, .. } => Some(exp),
            _ => None,
        }
    }
}

fn require_member(chain: &ChainDesc, e: &Elem, what: &str) -> Result<()> {
    if member(chain, e) {
        Ok(())
    } else {
        Err(ChainError::Invariant(format!(
            "{what} {e} is not a member of {chain}"
        )))
    }
}

/// Whether `e` is a well-formed element of `c`.
pub fn member(c: &ChainDesc, e: &Elem) -> bool {
    match (c, e) {
        (ChainDesc::Fin(n), Elem::FinIdx(i)) => i < n,
        (ChainDesc::Omega, Elem::Nat(_)) => true,
        (ChainDesc::OmegaStar, Elem::StarIdx(_)) => true,
        (ChainDesc::Pow { base, zero, exp }, Elem::Map(pairs)) => {
            pairs
                .iter()
                .all(|(k, v)| member(exp, k) && member(base, v) && v != zero)
                && pairs
                    .windows(2)
                    .all(|w| cmp_members(exp, &w[0].0, &w[1].0) == Ordering::Less)
        }
        (ChainDesc::SegLe { of, bound }, _) => {
            member(of, e) && cmp_members(of, e, bound) != Ordering::Greater
        }
        (ChainDesc::SegLt { of, bound }, _) => {
            member(of, e) && cmp_members(of, e, bound) == Ordering::Less
        }
        (ChainDesc::HetProd(factors), Elem::Tuple(values)) => {
            factors.len() == values.len()
                && factors.iter().zip(values).all(|((f, _), v)| member(f, v))
        }
        (ChainDesc::Fix { kind, base, zero }, _) => fixpoint::member_fix(*kind, base, zero, e),
        _ => false,
    }
}

/// Total comparison of two members of `c`.
pub fn compare(c: &ChainDesc, a: &Elem, b: &Elem) -> Result<Ordering> {
    for e in [a, b] {
        if !member(c, e) {
            return Err(ChainError::not_member(c, e));
        }
    }
    Ok(cmp_members(c, a, b))
}

/// Comparison without the membership check. Callers guarantee membership.
pub(crate) fn cmp_members(c: &ChainDesc, a: &Elem, b: &Elem) -> Ordering {
    match (c, a, b) {
        (ChainDesc::Fin(_), Elem::FinIdx(i), Elem::FinIdx(j)) => i.cmp(j),
        (ChainDesc::Omega, Elem::Nat(i), Elem::Nat(j)) => i.cmp(j),
        (ChainDesc::OmegaStar, Elem::StarIdx(i), Elem::StarIdx(j)) => j.cmp(i),
        (ChainDesc::Pow { base, zero, exp }, Elem::Map(x), Elem::Map(y)) => {
            lex_cmp(x, y, zero, |p, q| cmp_members(exp, p, q), |p, q| {
                cmp_members(base, p, q)
            })
        }
        (ChainDesc::SegLe { of, .. } | ChainDesc::SegLt { of, .. }, _, _) => {
            cmp_members(of, a, b)
        }
        (ChainDesc::HetProd(factors), Elem::Tuple(x), Elem::Tuple(y)) => factors
            .iter()
            .zip(x.iter().zip(y))
            .map(|((f, _), (p, q))| cmp_members(f, p, q))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal),
        (ChainDesc::Fix { kind, base, zero }, _, _) => {
            fixpoint::cmp_fix(*kind, base, zero, a, b)
        }
        _ => unreachable!("comparison of non-members {a} and {b} in {c}"),
    }
}

/// Lexicographic comparison of two canonical maps: the value at the least
/// position where they differ decides.
pub(crate) fn lex_cmp(
    x: &[(Elem, Elem)],
    y: &[(Elem, Elem)],
    zero: &Elem,
    key_cmp: impl Fn(&Elem, &Elem) -> Ordering,
    val_cmp: impl Fn(&Elem, &Elem) -> Ordering,
) -> Ordering {
    let (mut i, mut j) = (0, 0);
    loop {
        match (x.get(i), y.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some((_, v)), None) => return val_cmp(v, zero),
            (None, Some((_, w))) => return val_cmp(zero, w),
            (Some((k, v)), Some((l, w))) => match key_cmp(k, l) {
                Ordering::Less => return val_cmp(v, zero),
                Ordering::Greater => return val_cmp(zero, w),
                Ordering::Equal => {
                    let o = val_cmp(v, w);
                    if o.is_ne() {
                        return o;
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

/// Last element of `c`, if the structural rules decide it.
pub fn last(c: &ChainDesc) -> Lookup<Elem> {
    extreme(c, End::Top)
}

/// Least element of `c`, if the structural rules decide it.
pub fn first(c: &ChainDesc) -> Lookup<Elem> {
    extreme(c, End::Bottom)
}

pub fn has_last(c: &ChainDesc) -> ExtBool {
    last(c).exists()
}

pub fn is_last(c: &ChainDesc, e: &Elem) -> ExtBool {
    match last(c) {
        Lookup::Found(l) => (cmp_members(c, &l, e) == Ordering::Equal).into(),
        Lookup::Absent => ExtBool::False,
        Lookup::Unknown => ExtBool::Unknown,
    }
}

pub fn is_first(c: &ChainDesc, e: &Elem) -> ExtBool {
    match first(c) {
        Lookup::Found(l) => (cmp_members(c, &l, e) == Ordering::Equal).into(),
        Lookup::Absent => ExtBool::False,
        Lookup::Unknown => ExtBool::Unknown,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum End {
    Top,
    Bottom,
}

fn extreme(c: &ChainDesc, end: End) -> Lookup<Elem> {
    match c {
        ChainDesc::Fin(n) => Lookup::Found(Elem::FinIdx(match end {
            End::Top => n - 1,
            End::Bottom => 0,
        })),
        ChainDesc::Omega => match end {
            End::Top => Lookup::Absent,
            End::Bottom => Lookup::Found(Elem::Nat(0)),
        },
        ChainDesc::OmegaStar => match end {
            End::Top => Lookup::Found(Elem::StarIdx(0)),
            End::Bottom => Lookup::Absent,
        },
        ChainDesc::Pow { base, zero, exp } => {
            let zero_at_end = match end {
                End::Top => is_last(base, zero),
                End::Bottom => is_first(base, zero),
            };
            match zero_at_end {
                ExtBool::True => Lookup::Found(Elem::zero_map()),
                ExtBool::Unknown => Lookup::Unknown,
                // The extreme, if any, takes the extreme base value at
                // every position; it has finite support only over a finite
                // exponent.
                ExtBool::False => match extreme(base, end) {
                    Lookup::Found(m) => match size(exp) {
                        Card::Finite(_) => match enumerate(exp) {
                            Ok(positions) => Lookup::Found(Elem::Map(
                                positions.into_iter().map(|p| (p, m.clone())).collect(),
                            )),
                            Err(_) => Lookup::Unknown,
                        },
                        Card::Infinite => Lookup::Absent,
                        Card::Unknown => Lookup::Unknown,
                    },
                    other => other,
                },
            }
        }
        ChainDesc::SegLe { of, bound } => match end {
            End::Top => Lookup::Found(bound.clone()),
            End::Bottom => first(of),
        },
        ChainDesc::SegLt { of, bound } => match end {
            End::Top => predecessor(of, bound),
            End::Bottom => first(of),
        },
        ChainDesc::HetProd(factors) => {
            let mut values = Vec::with_capacity(factors.len());
            let mut unknown = false;
            for (f, _) in factors {
                match extreme(f, end) {
                    Lookup::Found(v) => values.push(v),
                    Lookup::Absent => return Lookup::Absent,
                    Lookup::Unknown => unknown = true,
                }
            }
            if unknown {
                Lookup::Unknown
            } else {
                Lookup::Found(Elem::Tuple(values))
            }
        }
        ChainDesc::Fix { kind, base, zero } => match end {
            End::Top => match fixpoint::stage0_top(*kind, base, zero) {
                Some(top) => Lookup::Found(Elem::stage(0, top)),
                None => Lookup::Unknown,
            },
            End::Bottom => {
                if size(c) == Card::Finite(Some(1)) {
                    extreme(c, End::Top)
                } else {
                    Lookup::Unknown
                }
            }
        },
    }
}

/// Immediate predecessor of `e` in `c`.
pub fn predecessor(c: &ChainDesc, e: &Elem) -> Lookup<Elem> {
    match (c, e) {
        (ChainDesc::Fin(_), Elem::FinIdx(0)) | (ChainDesc::Omega, Elem::Nat(0)) => Lookup::Absent,
        (ChainDesc::Fin(_), Elem::FinIdx(i)) => Lookup::Found(Elem::FinIdx(i - 1)),
        (ChainDesc::Omega, Elem::Nat(i)) => Lookup::Found(Elem::Nat(i - 1)),
        (ChainDesc::OmegaStar, Elem::StarIdx(k)) => Lookup::Found(Elem::StarIdx(k + 1)),
        // Initial segments are downward closed, so the ambient predecessor stays inside.
        (ChainDesc::SegLe { of, .. } | ChainDesc::SegLt { of, .. }, _) => predecessor(of, e),
        (ChainDesc::Pow { .. } | ChainDesc::HetProd(_), _) => match size(c) {
            Card::Finite(Some(n)) if n <= ENUMERATION_LIMIT => match enumerate(c) {
                Ok(all) => match all.iter().position(|x| x == e) {
                    Some(0) => Lookup::Absent,
                    Some(i) => Lookup::Found(all[i - 1].clone()),
                    None => Lookup::Unknown,
                },
                Err(_) => Lookup::Unknown,
            },
            _ => Lookup::Unknown,
        },
        _ => Lookup::Unknown,
    }
}

/// Cardinality of `c` as far as the structural rules decide.
pub fn size(c: &ChainDesc) -> Card {
    match c {
        ChainDesc::Fin(n) => Card::Finite(Some(*n as u128)),
        ChainDesc::Omega | ChainDesc::OmegaStar => Card::Infinite,
        ChainDesc::Pow { base, exp, .. } => match (size(base), size(exp)) {
            (Card::Finite(Some(1)), _) => Card::Finite(Some(1)),
            (Card::Finite(b), Card::Finite(x)) => Card::Finite(match (b, x) {
                (Some(b), Some(x)) => u32::try_from(x).ok().and_then(|x| b.checked_pow(x)),
                _ => None,
            }),
            (Card::Finite(_), Card::Infinite) | (Card::Infinite, _) => Card::Infinite,
            _ => Card::Unknown,
        },
        ChainDesc::SegLe { of, bound } | ChainDesc::SegLt { of, bound } => {
            let strict = matches!(c, ChainDesc::SegLt { .. });
            match (of.as_ref(), bound) {
                (ChainDesc::Omega, Elem::Nat(i)) => {
                    Card::Finite(Some(*i as u128 + u128::from(!strict)))
                }
                (ChainDesc::OmegaStar, _) => Card::Infinite,
                _ => match size(of) {
                    Card::Finite(Some(n)) if n <= ENUMERATION_LIMIT => match enumerate(c) {
                        Ok(all) => Card::Finite(Some(all.len() as u128)),
                        Err(_) => Card::Unknown,
                    },
                    Card::Finite(_) => Card::Finite(None),
                    _ => Card::Unknown,
                },
            }
        }
        ChainDesc::HetProd(factors) => {
            let mut total = Some(1u128);
            for (f, _) in factors {
                match size(f) {
                    Card::Finite(n) => total = total.zip(n).and_then(|(a, b)| a.checked_mul(b)),
                    other => return other,
                }
            }
            Card::Finite(total)
        }
        ChainDesc::Fix { kind, base, zero } => {
            match size(&fixpoint::stage0_desc(*kind, base, zero)) {
                Card::Finite(Some(1)) => Card::Finite(Some(1)),
                Card::Finite(_) | Card::Infinite => Card::Infinite,
                Card::Unknown => Card::Unknown,
            }
        }
    }
}

/// Every element of a hereditarily finite chain, in ascending order.
pub fn enumerate(c: &ChainDesc) -> Result<Vec<Elem>> {
    match c {
        ChainDesc::Fin(n) => {
            if *n as u128 > ENUMERATION_LIMIT {
                return Err(ChainError::NotFinite(c.to_string()));
            }
            Ok((0..*n).map(Elem::FinIdx).collect())
        }
        ChainDesc::Omega | ChainDesc::OmegaStar | ChainDesc::Fix { .. } => {
            Err(ChainError::NotFinite(c.to_string()))
        }
        ChainDesc::Pow { base, zero, exp } => {
            let values = enumerate(base)?;
            let positions = enumerate(exp)?;
            let total = u32::try_from(positions.len())
                .ok()
                .and_then(|p| (values.len() as u128).checked_pow(p));
            if total.is_none_or(|t| t > ENUMERATION_LIMIT) {
                return Err(ChainError::NotFinite(c.to_string()));
            }
            let mut out = Vec::new();
            let mut digits = vec![0usize; positions.len()];
            loop {
                out.push(Elem::Map(
                    positions
                        .iter()
                        .zip(&digits)
                        .filter(|(_, &d)| values[d] != *zero)
                        .map(|(p, &d)| (p.clone(), values[d].clone()))
                        .collect(),
                ));
                if !odometer(&mut digits, values.len()) {
                    break;
                }
            }
            out.sort_by(|a, b| cmp_members(c, a, b));
            Ok(out)
        }
        ChainDesc::SegLe { of, bound } | ChainDesc::SegLt { of, bound } => {
            let strict = matches!(c, ChainDesc::SegLt { .. });
            if let (ChainDesc::Omega, Elem::Nat(i)) = (of.as_ref(), bound) {
                let end = if strict { *i } else { i + 1 };
                if end as u128 > ENUMERATION_LIMIT {
                    return Err(ChainError::NotFinite(c.to_string()));
                }
                return Ok((0..end).map(Elem::Nat).collect());
            }
            Ok(enumerate(of)?
                .into_iter()
                .filter(|e| {
                    let o = cmp_members(of, e, bound);
                    o.is_lt() || (!strict && o.is_eq())
                })
                .collect())
        }
        ChainDesc::HetProd(factors) => {
            let lists = factors
                .iter()
                .map(|(f, _)| enumerate(f))
                .collect::<Result<Vec<_>>>()?;
            let total = lists
                .iter()
                .try_fold(1u128, |acc, l| acc.checked_mul(l.len() as u128));
            if total.is_none_or(|t| t > ENUMERATION_LIMIT) {
                return Err(ChainError::NotFinite(c.to_string()));
            }
            // Big-endian odometer: the first factor is most significant, so
            // the output is already ascending.
            let mut out = Vec::new();
            let mut digits = vec![0usize; lists.len()];
            loop {
                out.push(Elem::Tuple(
                    lists.iter().zip(&digits).map(|(l, &d)| l[d].clone()).collect(),
                ));
                let mut i = digits.len();
                loop {
                    if i == 0 {
                        return Ok(out);
                    }
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < lists[i].len() {
                        break;
                    }
                    digits[i] = 0;
                }
            }
        }
    }
}

/// Little-endian increment; false once every combination has been visited.
fn odometer(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}
