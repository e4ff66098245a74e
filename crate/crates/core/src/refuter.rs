//! Budget-bounded refutation of purported embeddings.
//!
//! [`refute_convex`] runs the matrix construction against a claimed convex
//! embedding `ι: Γ' → H` of a cofinal `Γ' ⊆ Γ` into a power or product `H`
//! indexed by `Γ`. [`refute_iso_second`] runs the characteristic-function
//! sequence against a claimed isomorphism `Γ ≃ Δ^Γ`. Both return concrete
//! witnesses that [`recheck_convex`] and [`recheck_iso_second`] validate using
//! only `compare` and the supplied maps.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::chain::{cmp_members, compare, member, ChainDesc, Elem};
use crate::error::{ChainError, Result};
use crate::lexpow::{chi, oplus, truncate, Embedding, Hahn, OneSelector, SupportSet};

pub type Successor = Arc<dyn Fn(&Elem) -> Option<Elem> + Send + Sync>;
pub type Cofinal = Arc<dyn Fn(&Elem) -> Elem + Send + Sync>;

/// A claimed convex embedding together with the witnesses the construction
/// needs: a strictly larger element for each element of `Γ'`, an element of
/// `Γ'` above each position, and a one above each factor's zero.
#[derive(Clone)]
pub struct RefuterInput {
    /// Power or heterogeneous product indexed by `Γ`.
    pub target: ChainDesc,
    /// `Γ' → target`, claimed convex.
    pub iota: Embedding,
    /// Starting element `β⁽⁰⁾` of `Γ'`.
    pub seed: Elem,
    /// `None` means no larger element is known; the run then stops with no claim.
    pub successor: Successor,
    pub cofinal: Cofinal,
    pub one: OneSelector,
    pub budget: usize,
}

impl fmt::Debug for RefuterInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RefuterInput")
            .field("target", &self.target.to_string())
            .field("iota", &self.iota)
            .field("seed", &self.seed.to_string())
            .field("budget", &self.budget)
            .finish_non_exhaustive()
    }
}

/// Which caller-supplied claim a [`Witness::BadInput`] falsifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    /// `successor(x) > x`; evidence `[x, successor(x)]`.
    Successor,
    /// `cofinal(γ) ≥ γ` and lies in `Γ'`; evidence `[γ, cofinal(γ)]`.
    Cofinal,
    /// The inverse oracle is a left inverse; evidence `[c, preimage(c), apply(preimage(c))]`.
    Inverse,
    /// Preimages lie in the source chain; evidence `[c, preimage(c)]`.
    Source,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Claim::Successor => "successor",
            Claim::Cofinal => "cofinal",
            Claim::Inverse => "inverse",
            Claim::Source => "source",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// `ι(a) < c < ι(b)` and the inverse oracle answers `None` at `c`.
    ConvexityGap { a: Elem, b: Elem, c: Elem },
    /// `x` and `y` compare differently from `fx = f(x)` and `fy = f(y)`.
    OrderViolation {
        step: usize,
        x: Elem,
        y: Elem,
        fx: Elem,
        fy: Elem,
    },
    /// The claimed isomorphism has no preimage for `elem`.
    InverseMiss { elem: Elem },
    BadInput { claim: Claim, evidence: Vec<Elem> },
}

impl Witness {
    pub fn kind(&self) -> &'static str {
        match self {
            Witness::ConvexityGap { .. } => "ConvexityGap",
            Witness::OrderViolation { .. } => "OrderViolation",
            Witness::InverseMiss { .. } => "InverseMiss",
            Witness::BadInput { .. } => "BadInput",
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::ConvexityGap { a, b, c } => {
                write!(f, "ConvexityGap a={a} b={b} c={c}")
            }
            Witness::OrderViolation { step, x, y, fx, fy } => {
                write!(f, "OrderViolation step={step} x={x} y={y} fx={fx} fy={fy}")
            }
            Witness::InverseMiss { elem } => write!(f, "InverseMiss elem={elem}"),
            Witness::BadInput { claim, evidence } => {
                write!(f, "BadInput claim={claim} evidence=[")?;
                for (i, e) in evidence.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// One step of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStep {
    /// First-row step `n`.
    Row {
        n: usize,
        beta: Elem,
        mu: Elem,
        nu: Elem,
        sigma: Elem,
        tau: Elem,
        next_beta: Elem,
        d: Elem,
        preimage: Option<Elem>,
    },
    /// Matrix entry `γ_index⁽column⁾`, queried at `value`.
    Cell {
        column: usize,
        index: usize,
        value: Elem,
        preimage: Option<Elem>,
    },
    /// `γ_index = i⁻¹(chi)`.
    Chi {
        index: usize,
        chi: Elem,
        preimage: Option<Elem>,
    },
}

fn opt(e: &Option<Elem>) -> String {
    e.as_ref().map_or_else(|| "none".to_string(), Elem::to_string)
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStep::Row {
                n,
                beta,
                mu,
                nu,
                sigma,
                tau,
                next_beta,
                d,
                preimage,
            } => write!(
                f,
                "row n={n} beta={beta} mu={mu} nu={nu} sigma={sigma} tau={tau} next_beta={next_beta} d={d} preimage={}",
                opt(preimage)
            ),
            TraceStep::Cell {
                column,
                index,
                value,
                preimage,
            } => write!(
                f,
                "cell column={column} index={index} value={value} preimage={}",
                opt(preimage)
            ),
            TraceStep::Chi {
                index,
                chi,
                preimage,
            } => write!(f, "chi index={index} chi={chi} preimage={}", opt(preimage)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Witness {
        witness: Witness,
        trace: Vec<TraceStep>,
    },
    /// No witness within the budget, or the input ran out of larger elements.
    Exhausted { trace: Vec<TraceStep> },
}

impl Outcome {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Outcome::Witness { witness, .. } => Some(witness),
            Outcome::Exhausted { .. } => None,
        }
    }

    pub fn trace(&self) -> &[TraceStep] {
        match self {
            Outcome::Witness { trace, .. } | Outcome::Exhausted { trace } => trace,
        }
    }
}

/// Early exit of a run: a witness, or the input has nothing more to offer.
enum Stop {
    Found(Box<Witness>),
    Exhausted,
}

impl From<Witness> for Stop {
    fn from(w: Witness) -> Self {
        Stop::Found(Box::new(w))
    }
}

/// Least position where two elements of a power or product differ.
fn first_difference(view: &Hahn, positions: &ChainDesc, x: &Elem, y: &Elem) -> Option<Elem> {
    let mut keys = view.support(x);
    keys.extend(view.support(y));
    keys.sort_by(|a, b| cmp_members(positions, a, b));
    keys.dedup();
    keys.into_iter()
        .find(|p| view.value_at(x, p) != view.value_at(y, p))
}

struct ConvexRun<'a> {
    input: &'a RefuterInput,
    view: Hahn<'a>,
    positions: ChainDesc,
    trace: Vec<TraceStep>,
    steps: usize,
    /// `γ₀⁽ⁿ⁾`, `ν⁽ⁿ⁻¹⁾` and `ι γ₀⁽ⁿ⁾` per column `n ≥ 1` (index `n − 1`).
    heads: Vec<(Elem, Elem, Elem)>,
    columns: Vec<Vec<Elem>>,
}

impl<'a> ConvexRun<'a> {
    fn source(&self) -> &ChainDesc {
        &self.input.iota.source
    }

    fn iota(&self, x: &Elem) -> Result<Elem> {
        self.input.iota.apply(x)
    }

    fn successor(&self, x: &Elem) -> std::result::Result<Elem, Stop> {
        let Some(s) = (self.input.successor)(x) else {
            return Err(Stop::Exhausted);
        };
        if !member(self.source(), &s) || cmp_members(self.source(), x, &s) != Ordering::Less {
            return Err(Witness::BadInput {
                claim: Claim::Successor,
                evidence: vec![x.clone(), s],
            }
            .into());
        }
        Ok(s)
    }

    fn cofinal(&self, g: &Elem) -> std::result::Result<Elem, Stop> {
        let c = (self.input.cofinal)(g);
        if !member(self.source(), &c)
            || !member(&self.positions, &c)
            || cmp_members(&self.positions, &c, g) == Ordering::Less
        {
            return Err(Witness::BadInput {
                claim: Claim::Cofinal,
                evidence: vec![g.clone(), c],
            }
            .into());
        }
        Ok(c)
    }

    /// Checks `ι x < ι y` for `x < y`.
    fn ordered(&self, x: &Elem, y: &Elem, fx: &Elem, fy: &Elem) -> std::result::Result<(), Stop> {
        if cmp_members(&self.input.target, fx, fy) != Ordering::Less {
            return Err(Witness::OrderViolation {
                step: self.steps,
                x: x.clone(),
                y: y.clone(),
                fx: fx.clone(),
                fy: fy.clone(),
            }
            .into());
        }
        Ok(())
    }

    /// Asks the oracle for a preimage of `c`, known to lie strictly between
    /// `ι a` and `ι b`.
    fn query(&self, a: &Elem, b: &Elem, c: &Elem) -> std::result::Result<Elem, Stop> {
        match self.input.iota.preimage(c) {
            None => Err(Witness::ConvexityGap {
                a: a.clone(),
                b: b.clone(),
                c: c.clone(),
            }
            .into()),
            Some(g) if !member(self.source(), &g) => Err(Witness::BadInput {
                claim: Claim::Source,
                evidence: vec![c.clone(), g],
            }
            .into()),
            Some(g) => {
                let back = self.iota(&g).map_err(|_| Stop::Exhausted)?;
                if back != *c {
                    return Err(Witness::BadInput {
                        claim: Claim::Inverse,
                        evidence: vec![c.clone(), g, back],
                    }
                    .into());
                }
                Ok(g)
            }
        }
    }

    fn tick(&mut self) -> std::result::Result<(), Stop> {
        if self.steps >= self.input.budget {
            return Err(Stop::Exhausted);
        }
        self.steps += 1;
        Ok(())
    }

    /// First-row step: from `β⁽ⁿ⁾` to `γ₀⁽ⁿ⁺¹⁾` and `β⁽ⁿ⁺¹⁾`.
    fn row(&mut self, n: usize, beta: &Elem) -> std::result::Result<Elem, Stop> {
        self.tick()?;
        let mu = self.successor(beta)?;
        let nu = self.successor(&mu)?;
        let target = &self.input.target;
        let [ib, im, iv] = [beta, &mu, &nu].map(|x| self.iota(x));
        let (ib, im, iv) = (
            ib.map_err(|_| Stop::Exhausted)?,
            im.map_err(|_| Stop::Exhausted)?,
            iv.map_err(|_| Stop::Exhausted)?,
        );
        self.ordered(beta, &mu, &ib, &im)?;
        self.ordered(&mu, &nu, &im, &iv)?;
        let sigma = first_difference(&self.view, &self.positions, &ib, &im)
            .expect("distinct elements differ somewhere");
        let tau = first_difference(&self.view, &self.positions, &im, &iv)
            .expect("distinct elements differ somewhere");
        let top = match cmp_members(&self.positions, &sigma, &tau) {
            Ordering::Less => &tau,
            _ => &sigma,
        };
        let next_beta = self.cofinal(top)?;
        let d = truncate(target, &im, &next_beta).map_err(|_| Stop::Exhausted)?;
        debug_assert_eq!(cmp_members(target, &ib, &d), Ordering::Less);
        debug_assert_eq!(cmp_members(target, &d, &iv), Ordering::Less);

        let answer = self.query(beta, &nu, &d);
        self.trace.push(TraceStep::Row {
            n,
            beta: beta.clone(),
            mu,
            nu: nu.clone(),
            sigma,
            tau,
            next_beta: next_beta.clone(),
            d: d.clone(),
            preimage: answer.as_ref().ok().cloned(),
        });
        let g = answer?;
        // β⁽ⁿ⁾ < γ₀⁽ⁿ⁺¹⁾ follows from ι β⁽ⁿ⁾ < d
        if cmp_members(self.source(), beta, &g) != Ordering::Less {
            return Err(Witness::OrderViolation {
                step: self.steps,
                x: beta.clone(),
                y: g,
                fx: ib,
                fy: d,
            }
            .into());
        }
        self.heads.push((g.clone(), nu, d));
        self.columns.push(vec![g]);
        Ok(next_beta)
    }

    /// Entry `γ_index⁽column⁾` from the first `index` entries of the next column.
    fn cell(&mut self, column: usize, index: usize) -> std::result::Result<(), Stop> {
        self.tick()?;
        let (head, upper, ihead) = self.heads[column - 1].clone();
        let set = self.columns[column + 1][..index].to_vec();
        let s = SupportSet::new(&self.positions, set.clone()).map_err(|_| {
            Stop::from(Witness::BadInput {
                claim: Claim::Cofinal,
                evidence: set,
            })
        })?;
        let value = oplus(&self.input.target, &ihead, &s, &self.input.one).map_err(|_| Stop::Exhausted)?;
        let answer = self.query(&head, &upper, &value);
        self.trace.push(TraceStep::Cell {
            column,
            index,
            value: value.clone(),
            preimage: answer.as_ref().ok().cloned(),
        });
        let g = answer?;
        let prev = self.columns[column]
            .last()
            .expect("columns start with their head")
            .clone();
        let fprev = self.iota(&prev).map_err(|_| Stop::Exhausted)?;
        if cmp_members(self.source(), &prev, &g) != Ordering::Less {
            return Err(Witness::OrderViolation {
                step: self.steps,
                x: prev,
                y: g,
                fx: fprev,
                fy: value,
            }
            .into());
        }
        self.columns[column].push(g);
        Ok(())
    }

    fn run(&mut self) -> std::result::Result<(), Stop> {
        let mut beta = self.input.seed.clone();
        if !member(self.source(), &beta) {
            return Err(Witness::BadInput {
                claim: Claim::Source,
                evidence: vec![beta],
            }
            .into());
        }
        for n in 0.. {
            beta = self.row(n, &beta)?;
            // columns 1..=k now have heads; fill the anti-diagonal below them
            let k = self.heads.len();
            for index in 1..k {
                self.cell(k - index, index)?;
            }
        }
        unreachable!("the row loop only ends through an early exit")
    }
}

/// Runs the matrix construction against `input.iota`.
pub fn refute_convex(input: &RefuterInput) -> Result<Outcome> {
    if input.budget == 0 {
        return Err(ChainError::BudgetZero);
    }
    let view = Hahn::of(&input.target)?;
    let mut run = ConvexRun {
        input,
        view,
        positions: view.positions(),
        trace: Vec::new(),
        steps: 0,
        heads: Vec::new(),
        // column 0 is a placeholder so that column n sits at index n
        columns: vec![Vec::new()],
    };
    let stop = run.run().expect_err("the run ends through an early exit");
    let trace = run.trace;
    Ok(match stop {
        Stop::Found(witness) => Outcome::Witness { witness: *witness, trace },
        Stop::Exhausted => Outcome::Exhausted { trace },
    })
}

/// Runs `γ₀ = i⁻¹(0)`, `γ_μ = i⁻¹(χ{γ_ν : ν < μ})` against a claimed
/// isomorphism `i: gamma → base^gamma` given by its forward map and inverse oracle.
pub fn refute_iso_second(
    base: &ChainDesc,
    zero: &Elem,
    gamma: &ChainDesc,
    claimed: &Embedding,
    one: &Elem,
    budget: usize,
) -> Result<Outcome> {
    if !member(base, one) || cmp_members(base, zero, one) != Ordering::Less {
        return Err(ChainError::BadOne(one.to_string()));
    }
    if budget == 0 {
        return Err(ChainError::BudgetZero);
    }
    let power = ChainDesc::Pow {
        base: Box::new(base.clone()),
        zero: zero.clone(),
        exp: Box::new(gamma.clone()),
    };
    let mut trace = Vec::new();
    let mut seq: Vec<(Elem, Elem)> = Vec::new();
    let witness = loop {
        let index = seq.len();
        if index >= budget {
            return Ok(Outcome::Exhausted { trace });
        }
        let set = SupportSet::new(gamma, seq.iter().map(|(g, _)| g.clone()).collect())?;
        let c = chi(&power, &set, one)?;
        let answer = claimed.preimage(&c);
        trace.push(TraceStep::Chi {
            index,
            chi: c.clone(),
            preimage: answer.clone(),
        });
        let Some(g) = answer else {
            break Witness::InverseMiss { elem: c };
        };
        if !member(gamma, &g) {
            break Witness::BadInput {
                claim: Claim::Source,
                evidence: vec![c, g],
            };
        }
        match claimed.apply(&g) {
            Ok(back) if back == c => {}
            Ok(back) => {
                break Witness::BadInput {
                    claim: Claim::Inverse,
                    evidence: vec![c, g, back],
                }
            }
            Err(_) => {
                break Witness::BadInput {
                    claim: Claim::Source,
                    evidence: vec![c, g],
                }
            }
        }
        if let Some((prev, fprev)) = seq.last() {
            if cmp_members(gamma, prev, &g) != Ordering::Less {
                break Witness::OrderViolation {
                    step: index,
                    x: prev.clone(),
                    y: g,
                    fx: fprev.clone(),
                    fy: c,
                };
            }
        }
        seq.push((g, c));
    };
    Ok(Outcome::Witness { witness, trace })
}

fn order_disagrees(src: &ChainDesc, dst: &ChainDesc, f: &Embedding, w: &Witness) -> Result<bool> {
    let Witness::OrderViolation { x, y, fx, fy, .. } = w else {
        return Ok(false);
    };
    Ok(f.apply(x)? == *fx && f.apply(y)? == *fy && compare(src, x, y)? != compare(dst, fx, fy)?)
}

fn bad_input(input_source: &ChainDesc, f: &Embedding, claim: Claim, ev: &[Elem]) -> Result<bool> {
    Ok(match (claim, ev) {
        (Claim::Inverse, [c, g, back]) => {
            f.preimage(c).as_ref() == Some(g) && f.apply(g)? == *back && back != c
        }
        (Claim::Source, [c, g]) => {
            f.preimage(c).as_ref() == Some(g) && (!member(input_source, g) || f.apply(g).is_err())
        }
        (Claim::Source, [e]) => !member(input_source, e),
        _ => false,
    })
}

/// Validates a witness from [`refute_convex`] with direct comparisons and
/// calls to the supplied maps.
pub fn recheck_convex(input: &RefuterInput, w: &Witness) -> Result<bool> {
    let (src, dst) = (&input.iota.source, &input.target);
    let positions = Hahn::of(dst)?.positions();
    match w {
        Witness::ConvexityGap { a, b, c } => Ok(member(src, a)
            && member(src, b)
            && compare(dst, &input.iota.apply(a)?, c)? == Ordering::Less
            && compare(dst, c, &input.iota.apply(b)?)? == Ordering::Less
            && input.iota.preimage(c).is_none()),
        Witness::OrderViolation { .. } => order_disagrees(src, dst, &input.iota, w),
        Witness::InverseMiss { .. } => Ok(false),
        Witness::BadInput { claim, evidence } => Ok(match (claim, evidence.as_slice()) {
            (Claim::Successor, [x, s]) => {
                (input.successor)(x).as_ref() == Some(s)
                    && (!member(src, s) || compare(src, x, s)? != Ordering::Less)
            }
            (Claim::Cofinal, [g, c]) => {
                (input.cofinal)(g) == *c
                    && (!member(src, c)
                        || !member(&positions, c)
                        || compare(&positions, c, g)? == Ordering::Less)
            }
            (Claim::Cofinal, set) => set.iter().any(|e| !member(&positions, e)),
            (claim, ev) => bad_input(src, &input.iota, *claim, ev)?,
        }),
    }
}

/// Validates a witness from [`refute_iso_second`].
pub fn recheck_iso_second(
    base: &ChainDesc,
    zero: &Elem,
    gamma: &ChainDesc,
    claimed: &Embedding,
    w: &Witness,
) -> Result<bool> {
    let power = ChainDesc::Pow {
        base: Box::new(base.clone()),
        zero: zero.clone(),
        exp: Box::new(gamma.clone()),
    };
    match w {
        Witness::InverseMiss { elem } => Ok(member(&power, elem) && claimed.preimage(elem).is_none()),
        Witness::OrderViolation { .. } => order_disagrees(gamma, &power, claimed, w),
        Witness::BadInput { claim, evidence } => bad_input(gamma, claimed, *claim, evidence),
        Witness::ConvexityGap { .. } => Ok(false),
    }
}

/// `n_k ↦ one` on `{n0, …, n(k−1)}`, zero elsewhere: an embedding of ω into
/// `base^ω` whose image is not convex.
pub fn chi_prefix(base: &ChainDesc, zero: &Elem, one: &Elem) -> Embedding {
    let target = ChainDesc::Pow {
        base: Box::new(base.clone()),
        zero: zero.clone(),
        exp: Box::new(ChainDesc::Omega),
    };
    let (one1, one2) = (one.clone(), one.clone());
    Embedding::new(
        ChainDesc::Omega,
        target,
        move |x| match x {
            Elem::Nat(k) => Ok(Elem::Map(
                (0..*k).map(|i| (Elem::Nat(i), one1.clone())).collect(),
            )),
            other => Err(ChainError::not_member(&ChainDesc::Omega, other)),
        },
        move |y| {
            let pairs = y.as_map()?;
            pairs
                .iter()
                .enumerate()
                .all(|(i, (k, v))| *k == Elem::Nat(i as u64) && *v == one2)
                .then_some(Elem::Nat(pairs.len() as u64))
        },
    )
    .with_claims(crate::lexpow::Claims {
        convex: true,
        final_segment: false,
    })
}

/// `n ↦ n+1` on ω.
pub fn omega_successor() -> Successor {
    Arc::new(|x| match x {
        Elem::Nat(k) => Some(Elem::Nat(k + 1)),
        _ => None,
    })
}

/// `γ ↦ γ`, for `Γ' = Γ`.
pub fn identity_cofinal() -> Cofinal {
    Arc::new(Elem::clone)
}

/// Successor and cofinal maps read off a finite source chain.
pub fn finite_witnesses(source: &ChainDesc, positions: &ChainDesc) -> Result<(Successor, Cofinal)> {
    let elems = crate::chain::enumerate(source)?;
    let (e1, e2) = (elems.clone(), elems);
    let (src, pos) = (source.clone(), positions.clone());
    let successor: Successor = Arc::new(move |x| {
        let i = e1.iter().position(|e| e == x)?;
        e1.get(i + 1).cloned()
    });
    let cofinal: Cofinal = Arc::new(move |g| {
        e2.iter()
            .find(|e| member(&pos, e) && cmp_members(&pos, g, e) != Ordering::Greater)
            .cloned()
            .unwrap_or_else(|| crate::chain::last(&src).found().unwrap_or_else(|| g.clone()))
    });
    Ok((successor, cofinal))
}
