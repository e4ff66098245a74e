//! Fixed-point chains for the three lexicographic functional equations.
//!
//! Stage chains are `Γ₀ = Δ^{≤0}` (or `Δ^{<0}` for the third equation) and
//! `Γₙ₊₁ = (Δ^{Γₙ})^{≤0}` (resp. `^{<0}`). The embedding `e₀` sends `δ` to the
//! map with value `δ` at the top of `Γ₀`; `eₙ₊₁` relabels supports along
//! `eₙ`. Each image is a final segment, and the union chain `Γ` is stored as
//! `Stage(n, x)` with `n` minimal, so structural equality is order equality.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::chain::{
    self, cmp_members, lex_cmp, member, ChainDesc, Elem, EqKind, ExtBool, Lookup,
};
use crate::error::{ChainError, Result};
use crate::lexpow::{relabel, singleton, Claims, Embedding, Iso};
use crate::sample::{SampleConfig, Sampler};

/// Recursion bound for inverse oracles that unfold a foreign solution.
const PULLBACK_FUEL: usize = 256;

/// `Γ₀` as a descriptor: the (strict) initial segment of the base below zero.
pub(crate) fn stage0_desc(kind: EqKind, base: &ChainDesc, zero: &Elem) -> ChainDesc {
    let of = Box::new(base.clone());
    let bound = zero.clone();
    if kind.strict() {
        ChainDesc::SegLt { of, bound }
    } else {
        ChainDesc::SegLe { of, bound }
    }
}

/// Top of `Γ₀`: zero itself, or its predecessor for the third equation.
pub(crate) fn stage0_top(kind: EqKind, base: &ChainDesc, zero: &Elem) -> Option<Elem> {
    if kind.strict() {
        chain::predecessor(base, zero).found()
    } else {
        Some(zero.clone())
    }
}

/// Descriptor of the stage chain `Γₙ`.
pub fn stage_desc(kind: EqKind, base: &ChainDesc, zero: &Elem, n: u32) -> ChainDesc {
    let mut desc = stage0_desc(kind, base, zero);
    for _ in 0..n {
        let of = Box::new(ChainDesc::Pow {
            base: Box::new(base.clone()),
            zero: zero.clone(),
            exp: Box::new(desc),
        });
        let bound = Elem::zero_map();
        desc = if kind.strict() {
            ChainDesc::SegLt { of, bound }
        } else {
            ChainDesc::SegLe { of, bound }
        };
    }
    desc
}

/// One stage chain `Γₙ` of a construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageChain {
    pub kind: EqKind,
    pub base: ChainDesc,
    pub zero: Elem,
    pub n: u32,
    pub desc: ChainDesc,
}

pub fn stage_chain(kind: EqKind, base: &ChainDesc, zero: &Elem, n: u32) -> Result<StageChain> {
    Fixed::solvable(kind, base, zero)?;
    Ok(StageChain {
        kind,
        base: base.clone(),
        zero: zero.clone(),
        n,
        desc: stage_desc(kind, base, zero, n),
    })
}

/// Raw stage-level operations for one `(kind, base, zero)`.
#[derive(Clone)]
pub(crate) struct Fixed<'a> {
    pub(crate) kind: EqKind,
    pub(crate) base: &'a ChainDesc,
    pub(crate) zero: &'a Elem,
    pub(crate) top0: Elem,
}

impl<'a> Fixed<'a> {
    pub(crate) fn new(kind: EqKind, base: &'a ChainDesc, zero: &'a Elem) -> Option<Self> {
        Some(Fixed {
            kind,
            base,
            zero,
            top0: stage0_top(kind, base, zero)?,
        })
    }

    /// Like `new`, but reports why the equation has no solution here.
    pub(crate) fn solvable(kind: EqKind, base: &'a ChainDesc, zero: &'a Elem) -> Result<Self> {
        base.validate()?;
        if !member(base, zero) {
            return Err(ChainError::not_member(base, zero));
        }
        match kind {
            EqKind::Eq1 => {}
            EqKind::Eq2 => match chain::is_last(base, zero) {
                ExtBool::True => {}
                ExtBool::False => return Err(ChainError::NotSolvable("zero not last".into())),
                ExtBool::Unknown => {
                    return Err(ChainError::Undecided("whether zero is last".into()))
                }
            },
            EqKind::Eq3 => match chain::predecessor(base, zero) {
                Lookup::Found(_) => {}
                Lookup::Absent => {
                    return Err(ChainError::NotSolvable("no last element below zero".into()))
                }
                Lookup::Unknown => {
                    return Err(ChainError::Undecided(
                        "the last element below zero".into(),
                    ))
                }
            },
        }
        Ok(Fixed::new(kind, base, zero).expect("solvability implies a stage-0 top"))
    }

    pub(crate) fn strict(&self) -> bool {
        self.kind.strict()
    }

    pub(crate) fn gamma(&self) -> ChainDesc {
        ChainDesc::Fix {
            kind: self.kind,
            base: Box::new(self.base.clone()),
            zero: self.zero.clone(),
        }
    }

    pub(crate) fn power(&self) -> ChainDesc {
        ChainDesc::Pow {
            base: Box::new(self.base.clone()),
            zero: self.zero.clone(),
            exp: Box::new(self.gamma()),
        }
    }

    /// `(Δ^Γ)^{≤0}`, `Δ^Γ` or `(Δ^Γ)^{<0}` depending on the equation.
    pub(crate) fn iso_domain(&self) -> ChainDesc {
        let power = self.power();
        match self.kind {
            EqKind::Eq1 => ChainDesc::SegLe {
                of: Box::new(power),
                bound: Elem::zero_map(),
            },
            EqKind::Eq2 => power,
            EqKind::Eq3 => ChainDesc::SegLt {
                of: Box::new(power),
                bound: Elem::zero_map(),
            },
        }
    }

    /// Whether a canonical map lies in the segment below the empty map.
    fn below_zero(&self, pairs: &[(Elem, Elem)]) -> bool {
        match pairs.first() {
            None => !self.strict(),
            Some((_, v)) => cmp_members(self.base, v, self.zero) == Ordering::Less,
        }
    }

    pub(crate) fn stage_member(&self, n: u32, x: &Elem) -> bool {
        if n == 0 {
            return member(self.base, x)
                && match cmp_members(self.base, x, self.zero) {
                    Ordering::Less => true,
                    Ordering::Equal => !self.strict(),
                    Ordering::Greater => false,
                };
        }
        let Elem::Map(pairs) = x else {
            return false;
        };
        pairs.iter().all(|(k, v)| {
            self.stage_member(n - 1, k) && member(self.base, v) && v != self.zero
        }) && pairs
            .windows(2)
            .all(|w| self.stage_cmp(n - 1, &w[0].0, &w[1].0) == Ordering::Less)
            && self.below_zero(pairs)
    }

    pub(crate) fn stage_cmp(&self, n: u32, x: &Elem, y: &Elem) -> Ordering {
        if n == 0 {
            return cmp_members(self.base, x, y);
        }
        match (x, y) {
            (Elem::Map(a), Elem::Map(b)) => lex_cmp(
                a,
                b,
                self.zero,
                |p, q| self.stage_cmp(n - 1, p, q),
                |p, q| cmp_members(self.base, p, q),
            ),
            _ => unreachable!("stage {n} elements are maps"),
        }
    }

    /// `eₙ : Γₙ → Γₙ₊₁`.
    pub(crate) fn up(&self, n: u32, x: &Elem) -> Elem {
        if n == 0 {
            return singleton(&self.top0, x, self.zero);
        }
        match x {
            Elem::Map(pairs) => Elem::Map(
                pairs
                    .iter()
                    .map(|(k, v)| (self.up(n - 1, k), v.clone()))
                    .collect(),
            ),
            _ => unreachable!("stage {n} elements are maps"),
        }
    }

    /// Preimage under `eₙ` of an element of `Γₙ₊₁`, if it lies in the image.
    pub(crate) fn down(&self, n: u32, y: &Elem) -> Option<Elem> {
        let pairs = y.as_map()?;
        if n == 0 {
            return match pairs {
                [] if !self.strict() => Some(self.zero.clone()),
                [(k, v)] if *k == self.top0 => Some(v.clone()),
                _ => None,
            };
        }
        pairs
            .iter()
            .map(|(k, v)| Some((self.down(n - 1, k)?, v.clone())))
            .collect::<Option<Vec<_>>>()
            .map(Elem::Map)
    }

    pub(crate) fn lift_to(&self, from: u32, to: u32, x: &Elem) -> Elem {
        let mut x = x.clone();
        for n in from..to {
            x = self.up(n, &x);
        }
        x
    }

    pub(crate) fn normalize(&self, mut n: u32, x: &Elem) -> (u32, Elem) {
        let mut x = x.clone();
        while n > 0 {
            match self.down(n - 1, &x) {
                Some(d) => {
                    x = d;
                    n -= 1;
                }
                None => break,
            }
        }
        (n, x)
    }

    pub(crate) fn member(&self, e: &Elem) -> bool {
        match e {
            Elem::Stage(n, x) => {
                self.stage_member(*n, x) && (*n == 0 || self.down(n - 1, x).is_none())
            }
            _ => false,
        }
    }

    pub(crate) fn cmp(&self, a: &Elem, b: &Elem) -> Ordering {
        match (a, b) {
            (Elem::Stage(m, x), Elem::Stage(n, y)) => {
                let k = (*m).max(*n);
                let (x, y) = (self.lift_to(*m, k, x), self.lift_to(*n, k, y));
                self.stage_cmp(k, &x, &y)
            }
            _ => unreachable!("fixed-point elements are stage elements"),
        }
    }

    /// Map over `Γ` (normalized stage keys) to the corresponding element of `Γ`.
    pub(crate) fn iso_to_raw(&self, s: &[(Elem, Elem)]) -> Elem {
        let stage_of = |k: &Elem| match k {
            Elem::Stage(m, _) => *m,
            _ => unreachable!("keys of a map over the fixed chain are stage elements"),
        };
        let n = s.iter().map(|(k, _)| stage_of(k)).max().unwrap_or(0);
        let pairs = s
            .iter()
            .map(|(k, v)| {
                let Elem::Stage(m, inner) = k else { unreachable!() };
                (self.lift_to(*m, n, inner), v.clone())
            })
            .collect();
        let (m, x) = self.normalize(n + 1, &Elem::Map(pairs));
        Elem::stage(m, x)
    }

    pub(crate) fn iso_from_raw(&self, g: &Elem) -> Elem {
        let Elem::Stage(n, x) = g else {
            unreachable!("fixed-point elements are stage elements")
        };
        if *n == 0 {
            let key = Elem::stage(0, self.top0.clone());
            return singleton(&key, x, self.zero);
        }
        match x.as_ref() {
            Elem::Map(pairs) => Elem::Map(
                pairs
                    .iter()
                    .map(|(k, v)| {
                        let (m, k) = self.normalize(n - 1, k);
                        (Elem::stage(m, k), v.clone())
                    })
                    .collect(),
            ),
            _ => unreachable!("stage {n} elements are maps"),
        }
    }

    fn check_domain(&self, s: &Elem) -> Result<()> {
        let power = self.power();
        if !member(&power, s) {
            return Err(ChainError::not_member(&power, s));
        }
        let pairs = s.as_map().expect("members of a power are maps");
        if !self.below_zero(pairs) {
            return Err(ChainError::WrongSegment {
                segment: self.iso_domain().to_string(),
                elem: s.to_string(),
            });
        }
        Ok(())
    }
}

pub(crate) fn member_fix(kind: EqKind, base: &ChainDesc, zero: &Elem, e: &Elem) -> bool {
    Fixed::new(kind, base, zero).is_some_and(|fx| fx.member(e))
}

pub(crate) fn cmp_fix(kind: EqKind, base: &ChainDesc, zero: &Elem, a: &Elem, b: &Elem) -> Ordering {
    Fixed::new(kind, base, zero)
        .expect("members of a fixed chain imply a stage-0 top")
        .cmp(a, b)
}

/// The final-segment embedding `eₙ : Γₙ → Γₙ₊₁`.
pub fn stage_embed(kind: EqKind, base: &ChainDesc, zero: &Elem, n: u32) -> Result<Embedding> {
    let fx = Fixed::solvable(kind, base, zero).map_err(hypothesis)?;
    let (kind, base, zero) = (kind, base.clone(), zero.clone());
    let source = stage_desc(kind, &base, &zero, n);
    let target = stage_desc(kind, &base, &zero, n + 1);
    let top0 = fx.top0.clone();
    let (b1, z1, t1) = (base.clone(), zero.clone(), top0.clone());
    let src = source.clone();
    Ok(Embedding::new(
        source,
        target,
        move |x| {
            let fx = Fixed {
                kind,
                base: &b1,
                zero: &z1,
                top0: t1.clone(),
            };
            if !fx.stage_member(n, x) {
                return Err(ChainError::not_member(&src, x));
            }
            Ok(fx.up(n, x))
        },
        move |y| {
            let fx = Fixed {
                kind,
                base: &base,
                zero: &zero,
                top0: top0.clone(),
            };
            if !fx.stage_member(n + 1, y) {
                return None;
            }
            fx.down(n, y)
        },
    )
    .with_claims(Claims {
        convex: true,
        final_segment: true,
    }))
}

fn hypothesis(e: ChainError) -> ChainError {
    match e {
        ChainError::NotSolvable(r) | ChainError::Undecided(r) => ChainError::HypothesisFailed(r),
        other => other,
    }
}

/// Canonical representative of a stage element: the least stage holding it.
pub fn normalize(kind: EqKind, base: &ChainDesc, zero: &Elem, e: &Elem) -> Result<Elem> {
    let fx = Fixed::solvable(kind, base, zero).map_err(hypothesis)?;
    match e {
        Elem::Stage(n, x) if fx.stage_member(*n, x) => {
            let (m, y) = fx.normalize(*n, x);
            Ok(Elem::stage(m, y))
        }
        _ => Err(ChainError::not_member(&fx.gamma(), e)),
    }
}

/// Element of the segment of `Δ^Γ` to the corresponding element of `Γ`.
pub fn iso_to(kind: EqKind, base: &ChainDesc, zero: &Elem, s: &Elem) -> Result<Elem> {
    let fx = Fixed::solvable(kind, base, zero)?;
    fx.check_domain(s)?;
    Ok(fx.iso_to_raw(s.as_map().expect("checked")))
}

/// Inverse of [`iso_to`].
pub fn iso_from(kind: EqKind, base: &ChainDesc, zero: &Elem, g: &Elem) -> Result<Elem> {
    let fx = Fixed::solvable(kind, base, zero)?;
    if !fx.member(g) {
        return Err(ChainError::not_member(&fx.gamma(), g));
    }
    Ok(fx.iso_from_raw(g))
}

/// A chain `gamma` together with an isomorphism between the equation's
/// segment of `Δ^gamma` (`iso.to.source`) and `gamma`.
#[derive(Clone, Debug)]
pub struct Solution {
    pub kind: EqKind,
    pub base: ChainDesc,
    pub zero: Elem,
    pub gamma: ChainDesc,
    pub iso: Iso,
    /// The solution is the one-element chain.
    pub trivial: bool,
}

/// Builds the fixed-point solution, or reports the failed criterion.
pub fn solve(kind: EqKind, base: &ChainDesc, zero: &Elem) -> Result<Solution> {
    let fx = Fixed::solvable(kind, base, zero)?;
    let gamma = fx.gamma();
    let domain = fx.iso_domain();
    let trivial = chain::size(&gamma) == chain::Card::Finite(Some(1));
    let (b1, z1, b2, z2) = (base.clone(), zero.clone(), base.clone(), zero.clone());
    let iso = Iso::from_maps(
        domain,
        gamma.clone(),
        move |s| iso_to(kind, &b1, &z1, s),
        move |g| iso_from(kind, &b2, &z2, g),
    );
    Ok(Solution {
        kind,
        base: base.clone(),
        zero: zero.clone(),
        gamma,
        iso,
        trivial,
    })
}

/// The solution `Γ'` = `Δ^Γ` of the second equation obtained from a solution
/// `Γ` by relabelling: `Δ^{Γ'} → Γ'` sends keys through `Δ^Γ → Γ`.
pub fn power_copy(sol: &Solution) -> Result<Solution> {
    if sol.kind != EqKind::Eq2 {
        return Err(ChainError::HypothesisFailed(
            "relabelled copies are built from solutions of the second equation".into(),
        ));
    }
    let gamma = sol.iso.to.source.clone();
    let domain = ChainDesc::Pow {
        base: Box::new(sol.base.clone()),
        zero: sol.zero.clone(),
        exp: Box::new(gamma.clone()),
    };
    let (to, from) = (sol.iso.to.clone(), sol.iso.from.clone());
    let (g1, g2, d) = (gamma.clone(), sol.gamma.clone(), domain.clone());
    let (g3, d3) = (gamma.clone(), domain.clone());
    let iso = Iso::from_maps(
        domain,
        gamma.clone(),
        move |s| {
            if !member(&d, s) {
                return Err(ChainError::not_member(&d, s));
            }
            relabel(s, &g2, |k| to.apply(k))
        },
        move |y| {
            if !member(&g3, y) {
                return Err(ChainError::not_member(&g3, y));
            }
            let out = relabel(y, &g1, |k| from.apply(k))?;
            debug_assert!(member(&d3, &out));
            Ok(out)
        },
    );
    Ok(Solution {
        kind: EqKind::Eq2,
        base: sol.base.clone(),
        zero: sol.zero.clone(),
        gamma,
        iso,
        trivial: sol.trivial,
    })
}

type IndexOf = Arc<dyn Fn(&Elem) -> Option<u64> + Send + Sync>;
type At = Arc<dyn Fn(u64) -> Elem + Send + Sync>;

/// Structural witness that ω* embeds as a final segment: decidable
/// membership with index extraction, and the element at each index.
#[derive(Clone)]
pub struct OmegaTail {
    pub chain: ChainDesc,
    index_of: IndexOf,
    at: At,
}

impl OmegaTail {
    /// Tail index of `e` (0 is the top), or `None` outside the tail.
    pub fn index_of(&self, e: &Elem) -> Option<u64> {
        (self.index_of)(e)
    }

    pub fn at(&self, k: u64) -> Elem {
        (self.at)(k)
    }

    /// The witness as an embedding of ω* into the chain.
    pub fn embedding(&self) -> Embedding {
        let (at, index_of) = (self.at.clone(), self.index_of.clone());
        Embedding::new(
            ChainDesc::OmegaStar,
            self.chain.clone(),
            move |x| match x {
                Elem::StarIdx(k) => Ok(at(*k)),
                other => Err(ChainError::not_member(&ChainDesc::OmegaStar, other)),
            },
            move |y| index_of(y).map(Elem::StarIdx),
        )
        .with_claims(Claims {
            convex: true,
            final_segment: true,
        })
    }
}

impl fmt::Debug for OmegaTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OmegaTail")
            .field("chain", &self.chain.to_string())
            .finish_non_exhaustive()
    }
}

/// Derives an ω*-tail witness from the structure of `c`, when one is known.
pub fn tail_witness(c: &ChainDesc) -> Option<OmegaTail> {
    let make = |index_of: IndexOf, at: At| OmegaTail {
        chain: c.clone(),
        index_of,
        at,
    };
    match c {
        ChainDesc::OmegaStar => Some(make(
            Arc::new(|e| match e {
                Elem::StarIdx(k) => Some(*k),
                _ => None,
            }),
            Arc::new(Elem::StarIdx),
        )),
        ChainDesc::SegLe { of, bound } | ChainDesc::SegLt { of, bound } => {
            let inner = tail_witness(of)?;
            let offset = inner.index_of(bound)? + u64::from(matches!(c, ChainDesc::SegLt { .. }));
            let inner2 = inner.clone();
            Some(make(
                Arc::new(move |e| inner.index_of(e)?.checked_sub(offset)),
                Arc::new(move |k| inner2.at(k + offset)),
            ))
        }
        ChainDesc::Pow { base, zero, exp } => {
            if chain::is_last(base, zero) != ExtBool::True {
                return None;
            }
            let top = chain::last(exp).found()?;
            let inner = tail_witness(base)?;
            let (inner2, zero, zero2, top2) = (inner.clone(), zero.clone(), zero.clone(), top.clone());
            Some(make(
                Arc::new(move |e| match e.as_map()? {
                    [] => inner.index_of(&zero),
                    [(k, v)] if *k == top => inner.index_of(v),
                    _ => None,
                }),
                Arc::new(move |k| singleton(&top2, &inner2.at(k), &zero2)),
            ))
        }
        ChainDesc::Fix { kind, base, zero } => {
            let inner = tail_witness(&stage0_desc(*kind, base, zero))?;
            let inner2 = inner.clone();
            Some(make(
                Arc::new(move |e| match e {
                    Elem::Stage(0, x) => inner.index_of(x),
                    _ => None,
                }),
                Arc::new(move |k| Elem::stage(0, inner2.at(k))),
            ))
        }
        _ => None,
    }
}

/// `gamma ≃ gamma ∖ {last}`: tail elements move one step down, everything
/// else stays.
pub fn shift_iso(gamma: &ChainDesc) -> Result<Iso> {
    let tail = tail_witness(gamma).ok_or_else(|| ChainError::NoTailWitness(gamma.to_string()))?;
    shift_iso_with(&tail)
}

pub fn shift_iso_with(tail: &OmegaTail) -> Result<Iso> {
    let gamma = tail.chain.clone();
    let top = tail.at(0);
    let without_top = ChainDesc::SegLt {
        of: Box::new(gamma.clone()),
        bound: top,
    };
    let (t1, t2) = (tail.clone(), tail.clone());
    let (g, w) = (gamma.clone(), without_top.clone());
    Ok(Iso::from_maps(
        gamma,
        without_top,
        move |x| {
            if !member(&g, x) {
                return Err(ChainError::not_member(&g, x));
            }
            Ok(t1.index_of(x).map_or_else(|| x.clone(), |k| t1.at(k + 1)))
        },
        move |y| {
            if !member(&w, y) {
                return Err(ChainError::not_member(&w, y));
            }
            Ok(match t2.index_of(y) {
                Some(k) if k > 0 => t2.at(k - 1),
                _ => y.clone(),
            })
        },
    ))
}

/// One chain solving all three equations at once.
#[derive(Clone, Debug)]
pub struct SimultaneousSolution {
    pub gamma: ChainDesc,
    pub iso1: Iso,
    pub iso2: Iso,
    pub iso3: Iso,
    /// ω* as a final segment of `gamma`.
    pub tail: Embedding,
    /// `gamma ≃ gamma ∖ {last}`.
    pub shift: Iso,
}

/// Requires zero last in the base and an ω*-tail in the base.
pub fn simultaneous(base: &ChainDesc, zero: &Elem) -> Result<SimultaneousSolution> {
    base.validate()?;
    if !member(base, zero) {
        return Err(ChainError::not_member(base, zero));
    }
    if chain::is_last(base, zero) != ExtBool::True {
        return Err(ChainError::HypothesisFailed("zero not last".into()));
    }
    if tail_witness(base).is_none() {
        return Err(ChainError::HypothesisFailed("no ω* tail".into()));
    }
    let first = solve(EqKind::Eq1, base, zero)?;
    let gamma = first.gamma.clone();
    let fx = Fixed::new(EqKind::Eq1, base, zero).expect("first equation always has a stage-0 top");
    let power = fx.power();
    let negative = ChainDesc::SegLt {
        of: Box::new(power.clone()),
        bound: Elem::zero_map(),
    };

    let iso2 = Iso {
        to: first.iso.to.clone().with_source(power.clone()),
        from: first.iso.from.clone().with_target(power),
    };
    let tail = tail_witness(&gamma).expect("the base tail carries into stage 0");
    let shift = shift_iso_with(&tail)?;

    let (to2, up) = (iso2.to.clone(), shift.from.clone());
    let (from2, down) = (iso2.from.clone(), shift.to.clone());
    let neg = negative.clone();
    let iso3 = Iso::from_maps(
        negative,
        gamma.clone(),
        move |s| {
            if !member(&neg, s) {
                return Err(ChainError::WrongSegment {
                    segment: neg.to_string(),
                    elem: s.to_string(),
                });
            }
            up.apply(&to2.apply(s)?)
        },
        move |g| from2.apply(&down.apply(g)?),
    );

    Ok(SimultaneousSolution {
        gamma,
        iso1: first.iso,
        iso2,
        iso3,
        tail: tail.embedding(),
        shift,
    })
}

/// Embeds the fixed-point solution of the second equation as a final segment
/// of another solution over the same base and zero.
pub fn minimal_embed(base: &ChainDesc, zero: &Elem, other: &Solution) -> Result<Embedding> {
    if other.kind != EqKind::Eq2 || other.base != *base || other.zero != *zero {
        return Err(ChainError::HypothesisFailed(
            "the other solution must solve the second equation over the same base and zero"
                .into(),
        ));
    }
    Fixed::solvable(EqKind::Eq2, base, zero).map_err(hypothesis)?;
    let source = ChainDesc::Fix {
        kind: EqKind::Eq2,
        base: Box::new(base.clone()),
        zero: zero.clone(),
    };
    let j = other.iso.clone();
    let top = j.to.apply(&Elem::zero_map())?;

    let (b1, z1, j1, t1, src) = (base.clone(), zero.clone(), j.clone(), top, source.clone());
    let forward = move |g: &Elem| -> Result<Elem> {
        let fx = Fixed::new(EqKind::Eq2, &b1, &z1).expect("validated");
        if !fx.member(g) {
            return Err(ChainError::not_member(&src, g));
        }
        let Elem::Stage(n, x) = g else { unreachable!() };
        embed_stage(&fx, &j1, &t1, *n, x)
    };

    let (b2, z2, j2) = (base.clone(), zero.clone(), j);
    let inverse = move |y: &Elem| -> Option<Elem> {
        let fx = Fixed::new(EqKind::Eq2, &b2, &z2).expect("validated");
        pull_back(&fx, &j2, y, PULLBACK_FUEL)
    };

    Ok(Embedding::new(source, other.gamma.clone(), forward, inverse).with_claims(Claims {
        convex: true,
        final_segment: true,
    }))
}

/// Image of `Stage(n, x)`: stage 0 goes through the top position of the
/// other solution, later stages relabel keys and apply its isomorphism.
fn embed_stage(fx: &Fixed, j: &Iso, top: &Elem, n: u32, x: &Elem) -> Result<Elem> {
    let over_other = if n == 0 {
        singleton(top, x, fx.zero)
    } else {
        relabel(x, &j.to.target, |k| embed_stage(fx, j, top, n - 1, k))?
    };
    j.to.apply(&over_other)
}

fn pull_back(fx: &Fixed, j: &Iso, y: &Elem, fuel: usize) -> Option<Elem> {
    let fuel = fuel.checked_sub(1)?;
    let m = j.from.apply(y).ok()?;
    let mut pairs = m
        .as_map()?
        .iter()
        .map(|(k, v)| Some((pull_back(fx, j, k, fuel)?, v.clone())))
        .collect::<Option<Vec<_>>>()?;
    pairs.sort_by(|a, b| fx.cmp(&a.0, &b.0));
    Some(fx.iso_to_raw(&pairs))
}

/// Produces the final-segment embedding of the base into a solution of the
/// second equation and checks it on sampled elements.
pub fn verify_special(
    base: &ChainDesc,
    zero: &Elem,
    sol: &Solution,
    cfg: &SampleConfig,
) -> Result<Embedding> {
    if sol.kind != EqKind::Eq2 || sol.base != *base || sol.zero != *zero {
        return Err(ChainError::HypothesisFailed(
            "expected a solution of the second equation over the same base and zero".into(),
        ));
    }
    let top = sol.iso.to.apply(&Elem::zero_map())?;
    let (j_to, j_from, z1, z2, t1, t2) = (
        sol.iso.to.clone(),
        sol.iso.from.clone(),
        zero.clone(),
        zero.clone(),
        top.clone(),
        top,
    );
    let emb = Embedding::new(
        base.clone(),
        sol.gamma.clone(),
        move |d| j_to.apply(&singleton(&t1, d, &z1)),
        move |y| match j_from.apply(y).ok()?.as_map()? {
            [] => Some(z2.clone()),
            [(k, v)] if *k == t2 => Some(v.clone()),
            _ => None,
        },
    )
    .with_claims(Claims {
        convex: true,
        final_segment: true,
    });

    let mut sampler = Sampler::new(cfg.seed);
    let mut deltas = sampler.elems(base, cfg.count, cfg.depth)?;
    deltas.sort_by(|a, b| cmp_members(base, a, b));
    deltas.dedup();
    let images = deltas
        .iter()
        .map(|d| emb.apply(d))
        .collect::<Result<Vec<_>>>()?;
    for (w, iw) in deltas.windows(2).zip(images.windows(2)) {
        if cmp_members(&sol.gamma, &iw[0], &iw[1]) != Ordering::Less {
            return Err(ChainError::CheckFailed {
                reason: "embedding of the base is not order-preserving".into(),
                left: w[0].to_string(),
                right: w[1].to_string(),
            });
        }
    }
    let lowest = images.first().cloned();
    for y in sampler.elems(&sol.gamma, cfg.count, cfg.depth)? {
        let Some(low) = &lowest else { break };
        if cmp_members(&sol.gamma, low, &y) == Ordering::Greater {
            continue;
        }
        match emb.preimage(&y) {
            Some(d) if emb.apply(&d).as_ref() == Ok(&y) => {}
            _ => {
                return Err(ChainError::CheckFailed {
                    reason: "image is not upward closed".into(),
                    left: low.to_string(),
                    right: y.to_string(),
                })
            }
        }
    }
    Ok(emb)
}
