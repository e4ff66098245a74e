//! Lexicographic powers and finite heterogeneous products: supports, the
//! `d ⊕ S` operation, characteristic functions, lifted embeddings, the
//! canonical embedding of the base, and truncation.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::chain::{self, cmp_members, member, ChainDesc, Elem, ExtBool, Lookup};
use crate::error::{ChainError, Result};

/// Finite set of positions, strictly ascending in the position chain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportSet(Vec<Elem>);

impl SupportSet {
    /// Sorts and deduplicates `elems` under the order of `positions`.
    pub fn new(positions: &ChainDesc, mut elems: Vec<Elem>) -> Result<Self> {
        if let Some(bad) = elems.iter().find(|e| !member(positions, e)) {
            return Err(ChainError::not_member(positions, bad));
        }
        elems.sort_by(|a, b| cmp_members(positions, a, b));
        elems.dedup();
        Ok(SupportSet(elems))
    }

    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    pub fn elems(&self) -> &[Elem] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: &Elem) -> bool {
        self.0.contains(e)
    }

    pub fn into_vec(self) -> Vec<Elem> {
        self.0
    }
}

/// Chooses, for each position, an element of that factor above its zero.
#[derive(Clone)]
pub struct OneSelector(Arc<dyn Fn(&Elem) -> Elem + Send + Sync>);

impl OneSelector {
    pub fn constant(one: Elem) -> Self {
        OneSelector(Arc::new(move |_| one.clone()))
    }

    pub fn from_fn(f: impl Fn(&Elem) -> Elem + Send + Sync + 'static) -> Self {
        OneSelector(Arc::new(f))
    }

    pub fn choose(&self, position: &Elem) -> Elem {
        (self.0)(position)
    }
}

impl fmt::Debug for OneSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("OneSelector")
    }
}

/// Properties an embedding claims about its image.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Claims {
    pub convex: bool,
    pub final_segment: bool,
}

type ForwardFn = Arc<dyn Fn(&Elem) -> Result<Elem> + Send + Sync>;
type InverseFn = Arc<dyn Fn(&Elem) -> Option<Elem> + Send + Sync>;

/// An order-preserving map between chains together with an inverse-image
/// oracle. `preimage` answers `None` for target elements outside the image.
#[derive(Clone)]
pub struct Embedding {
    pub source: ChainDesc,
    pub target: ChainDesc,
    pub claims: Claims,
    forward: ForwardFn,
    inverse: InverseFn,
}

impl Embedding {
    pub fn new(
        source: ChainDesc,
        target: ChainDesc,
        forward: impl Fn(&Elem) -> Result<Elem> + Send + Sync + 'static,
        inverse: impl Fn(&Elem) -> Option<Elem> + Send + Sync + 'static,
    ) -> Self {
        Embedding {
            source,
            target,
            claims: Claims::default(),
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
        }
    }

    pub fn with_claims(mut self, claims: Claims) -> Self {
        self.claims = claims;
        self
    }

    pub fn identity(c: ChainDesc) -> Self {
        Embedding::new(c.clone(), c, |x| Ok(x.clone()), |y| Some(y.clone())).with_claims(Claims {
            convex: true,
            final_segment: true,
        })
    }

    pub fn apply(&self, x: &Elem) -> Result<Elem> {
        (self.forward)(x)
    }

    pub fn preimage(&self, y: &Elem) -> Option<Elem> {
        (self.inverse)(y)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Embedding) -> Embedding {
        let (f, g) = (self.forward.clone(), next.forward.clone());
        let (fi, gi) = (self.inverse.clone(), next.inverse.clone());
        Embedding::new(
            self.source.clone(),
            next.target.clone(),
            move |x| g(&f(x)?),
            move |y| fi(&gi(y)?),
        )
    }

    /// Same maps, different source descriptor (e.g. a sub-chain).
    pub fn with_source(mut self, source: ChainDesc) -> Self {
        self.source = source;
        self
    }

    /// Same maps, different target descriptor.
    pub fn with_target(mut self, target: ChainDesc) -> Self {
        self.target = target;
        self
    }
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Embedding")
            .field("source", &self.source.to_string())
            .field("target", &self.target.to_string())
            .field("claims", &self.claims)
            .finish_non_exhaustive()
    }
}

/// A two-way isomorphism.
#[derive(Clone, Debug)]
pub struct Iso {
    pub to: Embedding,
    pub from: Embedding,
}

impl Iso {
    /// Builds an isomorphism from two mutually inverse total maps.
    pub fn from_maps(
        left: ChainDesc,
        right: ChainDesc,
        to: impl Fn(&Elem) -> Result<Elem> + Send + Sync + 'static,
        from: impl Fn(&Elem) -> Result<Elem> + Send + Sync + 'static,
    ) -> Iso {
        let to = Arc::new(to);
        let from = Arc::new(from);
        let claims = Claims {
            convex: true,
            final_segment: true,
        };
        let (t1, f1) = (to.clone(), from.clone());
        Iso {
            to: Embedding::new(left.clone(), right.clone(), move |x| t1(x), move |y| {
                f1(y).ok()
            })
            .with_claims(claims),
            from: Embedding::new(right, left, move |y| from(y), move |x| to(x).ok())
                .with_claims(claims),
        }
    }

    pub fn inverse(&self) -> Iso {
        Iso {
            to: self.from.clone(),
            from: self.to.clone(),
        }
    }
}

/// Uniform view of a power or a finite heterogeneous product as a family
/// indexed by a position chain.
#[derive(Clone, Copy)]
pub(crate) enum Hahn<'a> {
    Pow {
        base: &'a ChainDesc,
        zero: &'a Elem,
        exp: &'a ChainDesc,
    },
    Het(&'a [(ChainDesc, Elem)]),
}

impl<'a> Hahn<'a> {
    pub(crate) fn of(c: &'a ChainDesc) -> Result<Self> {
        match c {
            ChainDesc::Pow { base, zero, exp } => Ok(Hahn::Pow { base, zero, exp }),
            ChainDesc::HetProd(factors) => Ok(Hahn::Het(factors)),
            other => Err(ChainError::WrongShape {
                expected: "a power or heterogeneous product",
                got: other.to_string(),
            }),
        }
    }

    /// The chain of positions.
    pub(crate) fn positions(&self) -> ChainDesc {
        match self {
            Hahn::Pow { exp, .. } => (*exp).clone(),
            Hahn::Het(factors) => ChainDesc::Fin(factors.len() as u64),
        }
    }

    pub(crate) fn factor(&self, pos: &Elem) -> Option<(&'a ChainDesc, &'a Elem)> {
        match self {
            Hahn::Pow { base, zero, .. } => Some((base, zero)),
            Hahn::Het(factors) => match pos {
                Elem::FinIdx(i) => factors.get(*i as usize).map(|(c, z)| (c, z)),
                _ => None,
            },
        }
    }

    pub(crate) fn value_at(&self, e: &Elem, pos: &Elem) -> Elem {
        match (self, e) {
            (Hahn::Pow { zero, exp, .. }, Elem::Map(pairs)) => pairs
                .iter()
                .find(|(k, _)| cmp_members(exp, k, pos) == Ordering::Equal)
                .map_or_else(|| (*zero).clone(), |(_, v)| v.clone()),
            (Hahn::Het(_), Elem::Tuple(values)) => match pos {
                Elem::FinIdx(i) => values[*i as usize].clone(),
                _ => unreachable!("heterogeneous positions are FinIdx"),
            },
            _ => unreachable!("value_at on a non-member"),
        }
    }

    /// Positions where `e` differs from the designated zero, ascending.
    pub(crate) fn support(&self, e: &Elem) -> Vec<Elem> {
        match (self, e) {
            (Hahn::Pow { .. }, Elem::Map(pairs)) => pairs.iter().map(|(k, _)| k.clone()).collect(),
            (Hahn::Het(factors), Elem::Tuple(values)) => factors
                .iter()
                .zip(values)
                .enumerate()
                .filter(|(_, ((_, z), v))| z != *v)
                .map(|(i, _)| Elem::FinIdx(i as u64))
                .collect(),
            _ => unreachable!("support of a non-member"),
        }
    }

    /// Rebuilds `e` with the given values at the updated positions.
    pub(crate) fn assign(
        &self,
        e: &Elem,
        updates: impl IntoIterator<Item = (Elem, Elem)>,
    ) -> Elem {
        match (self, e) {
            (Hahn::Pow { zero, exp, .. }, Elem::Map(pairs)) => {
                let mut out: Vec<(Elem, Elem)> = pairs.clone();
                for (pos, val) in updates {
                    out.retain(|(k, _)| cmp_members(exp, k, &pos) != Ordering::Equal);
                    if val != **zero {
                        out.push((pos, val));
                    }
                }
                out.sort_by(|a, b| cmp_members(exp, &a.0, &b.0));
                Elem::Map(out)
            }
            (Hahn::Het(_), Elem::Tuple(values)) => {
                let mut out = values.clone();
                for (pos, val) in updates {
                    if let Elem::FinIdx(i) = pos {
                        out[i as usize] = val;
                    }
                }
                Elem::Tuple(out)
            }
            _ => unreachable!("assign on a non-member"),
        }
    }
}

/// Canonical map from arbitrary `(key, value)` pairs: sorted keys, zero values dropped.
pub fn canon_map(
    base: &ChainDesc,
    zero: &Elem,
    exp: &ChainDesc,
    pairs: Vec<(Elem, Elem)>,
) -> Result<Elem> {
    for (k, v) in &pairs {
        if !member(exp, k) {
            return Err(ChainError::not_member(exp, k));
        }
        if !member(base, v) {
            return Err(ChainError::not_member(base, v));
        }
    }
    let mut pairs = pairs;
    pairs.sort_by(|a, b| cmp_members(exp, &a.0, &b.0));
    if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(ChainError::DuplicateKey(w[0].0.to_string()));
    }
    pairs.retain(|(_, v)| v != zero);
    Ok(Elem::Map(pairs))
}

/// Support of a canonical map element: its key list.
pub fn support(e: &Elem) -> Result<SupportSet> {
    match e {
        Elem::Map(pairs) => Ok(SupportSet(pairs.iter().map(|(k, _)| k.clone()).collect())),
        other => Err(ChainError::WrongShape {
            expected: "a map element",
            got: other.to_string(),
        }),
    }
}

/// `d ⊕ S`: `d` with the selected one at every position of `s`.
/// `d` must be zero on `s`.
pub fn oplus(c: &ChainDesc, d: &Elem, s: &SupportSet, one: &OneSelector) -> Result<Elem> {
    let view = Hahn::of(c)?;
    if !member(c, d) {
        return Err(ChainError::not_member(c, d));
    }
    let positions = view.positions();
    let mut updates = Vec::with_capacity(s.len());
    for pos in s.elems() {
        if !member(&positions, pos) {
            return Err(ChainError::not_member(&positions, pos));
        }
        let (factor, zero) = view.factor(pos).expect("member position has a factor");
        if view.value_at(d, pos) != *zero {
            return Err(ChainError::Overlap(pos.to_string()));
        }
        let one_here = one.choose(pos);
        if !member(factor, &one_here) || cmp_members(factor, zero, &one_here) != Ordering::Less {
            return Err(ChainError::BadOne(one_here.to_string()));
        }
        updates.push((pos.clone(), one_here));
    }
    Ok(view.assign(d, updates))
}

/// Characteristic function of `s`: `one` on `s`, zero elsewhere.
pub fn chi(c: &ChainDesc, s: &SupportSet, one: &Elem) -> Result<Elem> {
    let ChainDesc::Pow { base, zero, .. } = c else {
        return Err(ChainError::WrongShape {
            expected: "a power",
            got: c.to_string(),
        });
    };
    if !member(base, one) || cmp_members(base, zero, one) != Ordering::Less {
        return Err(ChainError::BadOne(one.to_string()));
    }
    oplus(c, &Elem::zero_map(), s, &OneSelector::constant(one.clone()))
}

/// Lifts `phi: Γ → Γ'` to `Δ^Γ → Δ^Γ'` by relabelling supports along `phi`.
/// The inverse is defined exactly on maps supported inside the image of `phi`.
pub fn lift(phi: &Embedding, base: &ChainDesc, zero: &Elem) -> Embedding {
    let source = ChainDesc::Pow {
        base: Box::new(base.clone()),
        zero: zero.clone(),
        exp: Box::new(phi.source.clone()),
    };
    let target = ChainDesc::Pow {
        base: Box::new(base.clone()),
        zero: zero.clone(),
        exp: Box::new(phi.target.clone()),
    };
    let (fwd, inv) = (phi.clone(), phi.clone());
    Embedding::new(
        source,
        target,
        move |s| relabel(s, &fwd.target, |k| fwd.apply(k)),
        move |t| {
            let pairs = t.as_map()?;
            let mut out = Vec::with_capacity(pairs.len());
            for (k, v) in pairs {
                out.push((inv.preimage(k)?, v.clone()));
            }
            out.sort_by(|a, b| cmp_members(&inv.source, &a.0, &b.0));
            Some(Elem::Map(out))
        },
    )
}

/// Maps every key of a canonical map through `f`, keeping values, and
/// re-sorts under `keys`.
pub(crate) fn relabel(
    s: &Elem,
    keys: &ChainDesc,
    f: impl Fn(&Elem) -> Result<Elem>,
) -> Result<Elem> {
    let Elem::Map(pairs) = s else {
        return Err(ChainError::WrongShape {
            expected: "a map element",
            got: s.to_string(),
        });
    };
    let mut out = pairs
        .iter()
        .map(|(k, v)| Ok((f(k)?, v.clone())))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| cmp_members(keys, &a.0, &b.0));
    Ok(Elem::Map(out))
}

/// Embeds the base into `base^exp` at the last position of `exp`; zero goes
/// to the empty map. Convex; a final segment when zero is last in the base.
pub fn embed_delta(base: &ChainDesc, zero: &Elem, exp: &ChainDesc) -> Result<Embedding> {
    let top = match chain::last(exp) {
        Lookup::Found(l) => l,
        _ => return Err(ChainError::NoLastElement),
    };
    let target = ChainDesc::Pow {
        base: Box::new(base.clone()),
        zero: zero.clone(),
        exp: Box::new(exp.clone()),
    };
    let (z1, z2, t1, t2) = (zero.clone(), zero.clone(), top.clone(), top);
    Ok(Embedding::new(
        base.clone(),
        target,
        move |d| Ok(singleton(&t1, d, &z1)),
        move |y| match y.as_map()? {
            [] => Some(z2.clone()),
            [(k, v)] if *k == t2 => Some(v.clone()),
            _ => None,
        },
    )
    .with_claims(Claims {
        convex: true,
        final_segment: chain::is_last(base, zero) == ExtBool::True,
    }))
}

/// Canonical map with `value` at `key` and zero elsewhere.
pub(crate) fn singleton(key: &Elem, value: &Elem, zero: &Elem) -> Elem {
    if value == zero {
        Elem::zero_map()
    } else {
        Elem::Map(vec![(key.clone(), value.clone())])
    }
}

/// Agrees with `s` at positions `≤ beta` and is zero above.
pub fn truncate(c: &ChainDesc, s: &Elem, beta: &Elem) -> Result<Elem> {
    let view = Hahn::of(c)?;
    if !member(c, s) {
        return Err(ChainError::not_member(c, s));
    }
    let positions = view.positions();
    if !member(&positions, beta) {
        return Err(ChainError::not_member(&positions, beta));
    }
    let above: Vec<(Elem, Elem)> = view
        .support(s)
        .into_iter()
        .filter(|p| cmp_members(&positions, p, beta) == Ordering::Greater)
        .map(|p| {
            let zero = view.factor(&p).expect("position has a factor").1.clone();
            (p, zero)
        })
        .collect();
    Ok(view.assign(s, above))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::compare;

    fn f(i: u64) -> Elem {
        Elem::FinIdx(i)
    }
    fn n(i: u64) -> Elem {
        Elem::Nat(i)
    }
    fn map(pairs: &[(Elem, Elem)]) -> Elem {
        Elem::Map(pairs.to_vec())
    }
    fn pow(base: ChainDesc, zero: Elem, exp: ChainDesc) -> ChainDesc {
        ChainDesc::pow(base, zero, exp).unwrap()
    }
    fn fin2() -> ChainDesc {
        ChainDesc::Fin(2)
    }

    #[test]
    fn canon_map_examples() {
        let (b, e) = (fin2(), fin2());
        assert_eq!(canon_map(&b, &f(0), &e, vec![(f(1), f(0))]).unwrap(), map(&[]));
        assert_eq!(
            canon_map(&b, &f(0), &e, vec![(f(1), f(1)), (f(0), f(1))]).unwrap(),
            map(&[(f(0), f(1)), (f(1), f(1))])
        );
        assert!(matches!(
            canon_map(&b, &f(0), &e, vec![(f(0), f(1)), (f(0), f(1))]),
            Err(ChainError::DuplicateKey(_))
        ));
        assert!(matches!(
            canon_map(&b, &f(0), &e, vec![(f(2), f(1))]),
            Err(ChainError::NotAMember { .. })
        ));
    }

    #[test]
    fn support_examples() {
        assert!(support(&map(&[])).unwrap().is_empty());
        assert_eq!(support(&map(&[(n(2), f(1))])).unwrap().elems(), &[n(2)]);
        assert_eq!(
            support(&map(&[(f(0), f(1)), (f(1), f(1))])).unwrap().elems(),
            &[f(0), f(1)]
        );
    }

    #[test]
    fn oplus_examples() {
        let c = pow(fin2(), f(0), fin2());
        let one = OneSelector::constant(f(1));
        let s = SupportSet::new(&fin2(), vec![f(1)]).unwrap();
        assert_eq!(oplus(&c, &map(&[]), &s, &one).unwrap(), map(&[(f(1), f(1))]));
        assert_eq!(
            oplus(&c, &map(&[(f(0), f(1))]), &s, &one).unwrap(),
            map(&[(f(0), f(1)), (f(1), f(1))])
        );
        assert!(matches!(
            oplus(&c, &map(&[(f(1), f(1))]), &s, &one),
            Err(ChainError::Overlap(_))
        ));
        assert!(matches!(
            oplus(&c, &map(&[]), &s, &OneSelector::constant(f(0))),
            Err(ChainError::BadOne(_))
        ));
    }

    #[test]
    fn oplus_on_het_prod() {
        let h = ChainDesc::het_prod(vec![(fin2(), f(0)), (ChainDesc::Fin(3), f(1))]).unwrap();
        let s = SupportSet::new(&ChainDesc::Fin(2), vec![f(1)]).unwrap();
        let one = OneSelector::from_fn(|p| if *p == f(1) { f(2) } else { f(1) });
        let d = Elem::Tuple(vec![f(1), f(1)]);
        assert_eq!(oplus(&h, &d, &s, &one).unwrap(), Elem::Tuple(vec![f(1), f(2)]));
        let bad = Elem::Tuple(vec![f(1), f(0)]);
        assert!(matches!(oplus(&h, &bad, &s, &one), Err(ChainError::Overlap(_))));
    }

    #[test]
    fn chi_examples() {
        let c = pow(fin2(), f(0), fin2());
        assert_eq!(chi(&c, &SupportSet::empty(), &f(1)).unwrap(), map(&[]));
        let small = chi(&c, &SupportSet::new(&fin2(), vec![f(1)]).unwrap(), &f(1)).unwrap();
        let big = chi(&c, &SupportSet::new(&fin2(), vec![f(0), f(1)]).unwrap(), &f(1)).unwrap();
        assert_eq!(compare(&c, &small, &big).unwrap(), Ordering::Less);
        let w = pow(fin2(), f(0), ChainDesc::Omega);
        assert_eq!(
            chi(&w, &SupportSet::new(&ChainDesc::Omega, vec![n(0)]).unwrap(), &f(1)).unwrap(),
            map(&[(n(0), f(1))])
        );
        assert!(matches!(
            chi(&c, &SupportSet::empty(), &f(0)),
            Err(ChainError::BadOne(_))
        ));
    }

    #[test]
    fn lift_examples() {
        let id = Embedding::identity(fin2());
        let lifted = lift(&id, &fin2(), &f(0));
        for s in chain::enumerate(&pow(fin2(), f(0), fin2())).unwrap() {
            assert_eq!(lifted.apply(&s).unwrap(), s);
        }

        let phi = Embedding::new(
            ChainDesc::Fin(1),
            fin2(),
            |x| match x {
                Elem::FinIdx(0) => Ok(Elem::FinIdx(1)),
                _ => Err(ChainError::NoLastElement),
            },
            |y| (*y == Elem::FinIdx(1)).then_some(Elem::FinIdx(0)),
        );
        let lifted = lift(&phi, &fin2(), &f(0));
        assert_eq!(lifted.apply(&map(&[(f(0), f(1))])).unwrap(), map(&[(f(1), f(1))]));
        assert_eq!(lifted.preimage(&map(&[(f(0), f(1))])), None);
        assert_eq!(lifted.preimage(&map(&[(f(1), f(1))])), Some(map(&[(f(0), f(1))])));
    }

    #[test]
    fn embed_delta_examples() {
        let base = ChainDesc::Fin(3);
        let e = embed_delta(&base, &f(1), &fin2()).unwrap();
        assert_eq!(e.apply(&f(1)).unwrap(), map(&[]));
        let e0 = embed_delta(&base, &f(0), &fin2()).unwrap();
        assert_eq!(e0.apply(&f(0)).unwrap(), map(&[]));
        assert_eq!(e.apply(&f(0)).unwrap(), map(&[(f(1), f(0))]));
        assert!(e.claims.convex);
        assert!(!e.claims.final_segment);
        assert_eq!(e.preimage(&map(&[(f(0), f(0))])), None);
        assert!(matches!(
            embed_delta(&base, &f(1), &ChainDesc::Omega),
            Err(ChainError::NoLastElement)
        ));
        let top = embed_delta(&base, &f(2), &fin2()).unwrap();
        assert!(top.claims.final_segment);
    }

    #[test]
    fn truncate_examples() {
        let c = pow(fin2(), f(0), ChainDesc::Omega);
        let s = map(&[(n(0), f(1)), (n(5), f(1))]);
        assert_eq!(truncate(&c, &s, &n(3)).unwrap(), map(&[(n(0), f(1))]));
        assert_eq!(truncate(&c, &s, &n(5)).unwrap(), s);
        assert_eq!(truncate(&c, &map(&[(n(5), f(1))]), &n(3)).unwrap(), map(&[]));
        assert!(matches!(
            truncate(&c, &s, &f(0)),
            Err(ChainError::NotAMember { .. })
        ));
    }
}
