//! Seeded random elements of arbitrary chain descriptors.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{self, cmp_members, member, ChainDesc, Elem, EqKind, ExtBool, Lookup};
use crate::error::{ChainError, Result};
use crate::fixpoint::Fixed;

/// Sampling parameters shared by verifiers and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: usize,
    /// Maximum nesting depth of generated elements.
    pub depth: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 0,
            count: 200,
            depth: 4,
        }
    }
}

const REJECTION_TRIES: usize = 64;

pub struct Sampler {
    rng: ChaCha8Rng,
    /// Largest support drawn for map elements.
    pub max_support: usize,
    /// Indices drawn for `Omega` and `OmegaStar` lie below this.
    pub max_index: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_support: 3,
            max_index: 8,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn elems(&mut self, c: &ChainDesc, count: usize, depth: usize) -> Result<Vec<Elem>> {
        (0..count).map(|_| self.elem(c, depth)).collect()
    }

    /// A member of `c` with nesting depth at most `depth` where the chain
    /// allows it.
    pub fn elem(&mut self, c: &ChainDesc, depth: usize) -> Result<Elem> {
        match c {
            ChainDesc::Fin(0) => Err(ChainError::Invariant("empty chain".into())),
            ChainDesc::Fin(n) => Ok(Elem::FinIdx(self.rng.gen_range(0..*n))),
            ChainDesc::Omega => Ok(Elem::Nat(self.rng.gen_range(0..self.max_index))),
            ChainDesc::OmegaStar => Ok(Elem::StarIdx(self.rng.gen_range(0..self.max_index))),
            ChainDesc::Pow { base, zero, exp } => self.map(base, zero, exp, depth),
            ChainDesc::HetProd(factors) => factors
                .iter()
                .map(|(f, _)| self.elem(f, depth.saturating_sub(1)))
                .collect::<Result<Vec<_>>>()
                .map(Elem::Tuple),
            ChainDesc::SegLe { of, bound } => self.segment(c, of, bound, false, depth),
            ChainDesc::SegLt { of, bound } => self.segment(c, of, bound, true, depth),
            ChainDesc::Fix { kind, base, zero } => self.fix(*kind, base, zero, depth),
        }
    }

    /// A nonzero base value, if the base has one.
    fn nonzero(&mut self, base: &ChainDesc, zero: &Elem, depth: usize) -> Result<Option<Elem>> {
        for _ in 0..REJECTION_TRIES {
            let v = self.elem(base, depth)?;
            if v != *zero {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    /// A base value strictly below zero, if one exists.
    fn negative(&mut self, base: &ChainDesc, zero: &Elem, depth: usize) -> Result<Option<Elem>> {
        if chain::is_first(base, zero) == ExtBool::True {
            return Ok(None);
        }
        let below = ChainDesc::SegLt {
            of: Box::new(base.clone()),
            bound: zero.clone(),
        };
        self.elem(&below, depth).map(Some)
    }

    /// Up to `max_support` distinct keys, ascending under `cmp`.
    fn keys(
        &mut self,
        gen: &mut dyn FnMut(&mut Self) -> Result<Elem>,
        cmp: &dyn Fn(&Elem, &Elem) -> Ordering,
    ) -> Result<Vec<Elem>> {
        let k = self.rng.gen_range(0..=self.max_support);
        let mut keys = (0..k).map(|_| gen(self)).collect::<Result<Vec<_>>>()?;
        keys.sort_by(|a, b| cmp(a, b));
        keys.dedup();
        Ok(keys)
    }

    fn map(&mut self, base: &ChainDesc, zero: &Elem, exp: &ChainDesc, depth: usize) -> Result<Elem> {
        if depth == 0 {
            return Ok(Elem::zero_map());
        }
        let keys = self.keys(
            &mut |s| s.elem(exp, depth - 1),
            &|a, b| cmp_members(exp, a, b),
        )?;
        let mut pairs = Vec::with_capacity(keys.len());
        for k in keys {
            if let Some(v) = self.nonzero(base, zero, depth - 1)? {
                pairs.push((k, v));
            }
        }
        Ok(Elem::Map(pairs))
    }

    fn segment(
        &mut self,
        c: &ChainDesc,
        of: &ChainDesc,
        bound: &Elem,
        strict: bool,
        depth: usize,
    ) -> Result<Elem> {
        match (of, bound) {
            (ChainDesc::Omega, Elem::Nat(b)) => {
                let hi = if strict { *b } else { b + 1 };
                if hi == 0 {
                    return Err(ChainError::Invariant("empty chain".into()));
                }
                return Ok(Elem::Nat(self.rng.gen_range(0..hi)));
            }
            (ChainDesc::OmegaStar, Elem::StarIdx(b)) => {
                let lo = if strict { b + 1 } else { *b };
                return Ok(Elem::StarIdx(lo + self.rng.gen_range(0..self.max_index)));
            }
            (ChainDesc::Pow { base, zero, exp }, Elem::Map(b)) if b.is_empty() => {
                return self.negative_map(base, zero, strict, depth, &mut |s, d| s.elem(exp, d), &|a, b| {
                    cmp_members(exp, a, b)
                });
            }
            _ => {}
        }
        for _ in 0..REJECTION_TRIES {
            let e = self.elem(of, depth)?;
            if member(c, &e) {
                return Ok(e);
            }
        }
        if !strict {
            return Ok(bound.clone());
        }
        match chain::predecessor(of, bound) {
            Lookup::Found(p) => Ok(p),
            _ => Err(ChainError::Undecided(format!("no sample found in {c}"))),
        }
    }

    /// A map below (or at) the empty map: its least key carries a value
    /// below zero.
    fn negative_map(
        &mut self,
        base: &ChainDesc,
        zero: &Elem,
        strict: bool,
        depth: usize,
        key: &mut dyn FnMut(&mut Self, usize) -> Result<Elem>,
        cmp: &dyn Fn(&Elem, &Elem) -> Ordering,
    ) -> Result<Elem> {
        let depth = depth.max(1);
        let mut keys = self.keys(&mut |s| key(s, depth - 1), cmp)?;
        if strict && keys.is_empty() {
            keys.push(key(self, depth - 1)?);
        }
        let mut pairs = Vec::with_capacity(keys.len());
        for (i, k) in keys.into_iter().enumerate() {
            let v = if i == 0 {
                self.negative(base, zero, depth - 1)?
            } else {
                self.nonzero(base, zero, depth - 1)?
            };
            match v {
                Some(v) => pairs.push((k, v)),
                None if i == 0 => break,
                None => {}
            }
        }
        if strict && pairs.is_empty() {
            return Err(ChainError::Undecided(
                "no base value below zero for a negative map".into(),
            ));
        }
        Ok(Elem::Map(pairs))
    }

    fn fix(&mut self, kind: EqKind, base: &ChainDesc, zero: &Elem, depth: usize) -> Result<Elem> {
        let fx = Fixed::new(kind, base, zero)
            .ok_or_else(|| ChainError::Undecided("fixed chain has no stage-0 top".into()))?;
        let top_stage = depth.saturating_sub(1).min(3) as u32;
        let n = self.rng.gen_range(0..=top_stage);
        let x = self.stage(&fx, n, depth.saturating_sub(1))?;
        let (m, y) = fx.normalize(n, &x);
        Ok(Elem::stage(m, y))
    }

    /// A raw element of the stage chain `Γₙ`.
    pub(crate) fn stage(&mut self, fx: &Fixed, n: u32, depth: usize) -> Result<Elem> {
        if n == 0 {
            let g0 = crate::fixpoint::stage_desc(fx.kind, fx.base, fx.zero, 0);
            return self.elem(&g0, depth);
        }
        let inner = |s: &mut Self, d: usize| s.stage(fx, n - 1, d);
        let mut key = inner;
        match self.negative_map(
            fx.base,
            fx.zero,
            fx.strict(),
            depth,
            &mut key,
            &|a, b| fx.stage_cmp(n - 1, a, b),
        ) {
            Ok(x) => Ok(x),
            // no room below zero: the stage collapses to its top
            Err(_) if !fx.strict() => Ok(Elem::zero_map()),
            Err(e) => Err(e),
        }
    }

    /// Shuffles in place with the sampler's generator.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

/// Random valid chain descriptor for round-trip and fuzz tests.
pub fn random_chain(sampler: &mut Sampler, depth: usize) -> ChainDesc {
    loop {
        let c = random_candidate(sampler, depth);
        if c.validate().is_ok() {
            return c;
        }
    }
}

fn random_candidate(sampler: &mut Sampler, depth: usize) -> ChainDesc {
    let rng = sampler.rng();
    let leaf = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => ChainDesc::Fin(rng.gen_range(1..5)),
        1 => ChainDesc::Omega,
        _ => ChainDesc::OmegaStar,
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..7) {
        0 | 1 => leaf(rng),
        2 => {
            let base = random_chain(sampler, depth - 1);
            let exp = random_chain(sampler, depth - 1);
            let zero = sampler.elem(&base, 2).unwrap_or(Elem::zero_map());
            ChainDesc::Pow {
                base: Box::new(base),
                zero,
                exp: Box::new(exp),
            }
        }
        3 => {
            let of = random_chain(sampler, depth - 1);
            let bound = sampler.elem(&of, 2).unwrap_or(Elem::zero_map());
            ChainDesc::SegLe {
                of: Box::new(of),
                bound,
            }
        }
        4 => {
            let of = random_chain(sampler, depth - 1);
            let bound = sampler.elem(&of, 2).unwrap_or(Elem::zero_map());
            ChainDesc::SegLt {
                of: Box::new(of),
                bound,
            }
        }
        5 => {
            let k = sampler.rng().gen_range(1..4);
            let factors = (0..k)
                .map(|_| {
                    let c = random_chain(sampler, depth - 1);
                    let z = sampler.elem(&c, 2).unwrap_or(Elem::zero_map());
                    (c, z)
                })
                .collect();
            ChainDesc::HetProd(factors)
        }
        _ => {
            let kind = EqKind::from_number(sampler.rng().gen_range(1..=3)).expect("1..=3");
            let base = random_chain(sampler, depth - 1);
            let zero = sampler.elem(&base, 2).unwrap_or(Elem::zero_map());
            ChainDesc::Fix {
                kind,
                base: Box::new(base),
                zero,
            }
        }
    }
}
