//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::cmp::Ordering;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use lexchain::chain::{self, compare, member, ChainDesc, Elem, EqKind, ExtBool};
use lexchain::fixpoint::{self, minimal_embed, power_copy, simultaneous, solve, Solution};
use lexchain::lexpow::{lift, oplus, Embedding, Iso, OneSelector, SupportSet};
use lexchain::oracle::{brute_power, check_convex, check_final_segment};
use lexchain::refuter::{
    self, recheck_iso_second, refute_convex, refute_iso_second, RefuterInput, Witness,
};
use lexchain::sample::{random_chain, Sampler};
use lexchain::{format_chain, format_elem, parse_chain, parse_elem, ChainError};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:.2?}, limit {limit:?}"))
}

fn f(i: u64) -> Elem {
    Elem::FinIdx(i)
}

fn finite_grid() -> Vec<(ChainDesc, Elem, ChainDesc)> {
    let mut out = Vec::new();
    for d in [2u64, 3] {
        for z in 0..d {
            for g in 1..=3 {
                out.push((ChainDesc::Fin(d), f(z), ChainDesc::Fin(g)));
            }
        }
    }
    out
}

fn oracle_agreement() -> Check {
    let start = Instant::now();
    let mut pairs = 0usize;
    for (base, zero, exp) in finite_grid() {
        let model = brute_power(&base, &zero, &exp).map_err(|e| e.to_string())?;
        let pow = &model.chain;
        let mut here = 0usize;
        for (i, a) in model.elems.iter().enumerate() {
            for (j, b) in model.elems.iter().enumerate() {
                let got = compare(pow, a, b).map_err(|e| e.to_string())?;
                ensure(got == i.cmp(&j), || format!("{pow}: {a} vs {b} gave {got:?}"))?;
                here += 1;
            }
        }
        ensure(here == model.len() * model.len(), || format!("{pow}: only {here} pairs"))?;
        pairs += here;
    }
    within(start, Duration::from_secs(5), "oracle agreement")?;
    Ok(format!("{} instances, {pairs} ordered pairs", finite_grid().len()))
}

/// `Fin(m) → Fin(k)` onto the final segment of size `m`.
fn final_segment(m: u64, k: u64) -> Embedding {
    let shift = k - m;
    Embedding::new(
        ChainDesc::Fin(m),
        ChainDesc::Fin(k),
        move |x| match x {
            Elem::FinIdx(i) => Ok(f(i + shift)),
            other => Err(ChainError::not_member(&ChainDesc::Fin(m), other)),
        },
        move |y| match y {
            Elem::FinIdx(i) if *i >= shift => Some(f(i - shift)),
            _ => None,
        },
    )
}

fn convex_final_segments() -> Check {
    let start = Instant::now();
    let (mut convex, mut upward) = (0, 0);
    for (base, zero, exp) in finite_grid() {
        let ChainDesc::Fin(k) = exp else { unreachable!() };
        let model = brute_power(&base, &zero, &exp).map_err(|e| e.to_string())?;
        let zero_last = chain::is_last(&base, &zero) == ExtBool::True;
        for m in 1..=k {
            let lifted = lift(&final_segment(m, k), &base, &zero);
            let small = brute_power(&base, &zero, &ChainDesc::Fin(m)).map_err(|e| e.to_string())?;
            let image = small
                .elems
                .iter()
                .map(|s| lifted.apply(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            let c = check_convex(&model, &image);
            ensure(c.holds(), || format!("{base} {zero} F={m}/{k}: {c:?}"))?;
            convex += 1;
            if zero_last {
                let u = check_final_segment(&model, &image);
                ensure(u.holds(), || format!("{base} {zero} F={m}/{k}: {u:?}"))?;
                upward += 1;
            }
        }
    }
    within(start, Duration::from_secs(5), "convexity checks")?;
    Ok(format!("{convex} convex images, {upward} final segments"))
}

fn oplus_monotone() -> Check {
    const PER_CHAIN: usize = 500;
    let mut sampler = Sampler::new(2024);
    let one = OneSelector::constant(f(1));
    let mut done = 0;
    for (text, positions) in [("pow(fin(3), f0, fin(3))", 3u64), ("pow(fin(2), f0, omega)", 12)] {
        let c = parse_chain(text).map_err(|e| e.to_string())?;
        let ChainDesc::Pow { base, exp, .. } = &c else { unreachable!() };
        let values = chain::enumerate(base).map_err(|e| e.to_string())?;
        let pos = |i: u64| match **exp {
            ChainDesc::Omega => Elem::Nat(i),
            _ => f(i),
        };
        let mut n = 0;
        while n < PER_CHAIN {
            let rng = sampler.rng();
            let mut idx: Vec<u64> = (0..positions).collect();
            for i in (1..idx.len()).rev() {
                idx.swap(i, rng.gen_range(0..=i));
            }
            let s_len = rng.gen_range(1..=4.min(idx.len()));
            let d_len = rng.gen_range(0..=4.min(idx.len() - s_len));
            let s_pos: Vec<Elem> = idx[..s_len].iter().map(|&i| pos(i)).collect();
            let d_pairs: Vec<(Elem, Elem)> = idx[s_len..s_len + d_len]
                .iter()
                .map(|&i| (pos(i), values[rng.gen_range(1..values.len())].clone()))
                .collect();
            let keep = rng.gen_range(0..s_len);
            let mut sub = s_pos.clone();
            for i in (1..sub.len()).rev() {
                sub.swap(i, rng.gen_range(0..=i));
            }
            sub.truncate(keep);
            let d = lexchain::lexpow::canon_map(base, &f(0), exp, d_pairs).map_err(|e| e.to_string())?;
            let big = SupportSet::new(exp, s_pos).map_err(|e| e.to_string())?;
            let small = SupportSet::new(exp, sub).map_err(|e| e.to_string())?;
            let lo = oplus(&c, &d, &small, &one).map_err(|e| e.to_string())?;
            let hi = oplus(&c, &d, &big, &one).map_err(|e| e.to_string())?;
            let got = compare(&c, &lo, &hi).map_err(|e| e.to_string())?;
            ensure(got == Ordering::Less, || format!("{c}: d={d} S'={small:?} S={big:?} gave {got:?}"))?;
            n += 1;
        }
        done += n;
    }
    Ok(format!("{done} instances"))
}

/// Round trip on every sample and order agreement on every pair.
fn check_iso(iso: &Iso, samples: &[Elem], domain_of_order: &ChainDesc, gamma: &ChainDesc) -> Result<usize, String> {
    let images = samples
        .iter()
        .map(|s| iso.to.apply(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    for (s, g) in samples.iter().zip(&images) {
        ensure(member(gamma, g), || format!("{g} not in {gamma}"))?;
        let back = iso.from.apply(g).map_err(|e| e.to_string())?;
        ensure(back == *s, || format!("round trip {s} -> {g} -> {back}"))?;
    }
    let mut pairs = 0;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let a = chain::compare(domain_of_order, &samples[i], &samples[j]).map_err(|e| e.to_string())?;
            let b = chain::compare(gamma, &images[i], &images[j]).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("order of {} and {} not preserved", samples[i], samples[j]))?;
            pairs += 1;
        }
    }
    Ok(pairs)
}

fn eq1_iso() -> Check {
    let mut notes = Vec::new();
    for (base, zero) in [("fin(2)", "f1"), ("fin(3)", "f1"), ("omegastar", "s0")] {
        let start = Instant::now();
        let (b, z) = (parse_chain(base).map_err(|e| e.to_string())?, parse_elem(zero).map_err(|e| e.to_string())?);
        let sol = solve(EqKind::Eq1, &b, &z).map_err(|e| e.to_string())?;
        let samples = Sampler::new(1).elems(&sol.iso.to.source, 1000, 4).map_err(|e| e.to_string())?;
        let deep = samples.iter().map(Elem::depth).max().unwrap_or(0);
        ensure(deep <= 4, || format!("sample nesting {deep} exceeds 4"))?;
        let pairs = check_iso(&sol.iso, &samples, &sol.iso.to.source, &sol.gamma)?;
        within(start, Duration::from_secs(30), base)?;
        notes.push(format!("{base}: 1000 samples, {pairs} pairs, {:.1?}", start.elapsed()));
    }
    Ok(notes.join("; "))
}

fn eq2() -> Check {
    let mut checked = 0;
    for (base, zero) in [(ChainDesc::Fin(2), f(1)), (ChainDesc::OmegaStar, Elem::StarIdx(0))] {
        let sol2 = solve(EqKind::Eq2, &base, &zero).map_err(|e| e.to_string())?;
        let power = &sol2.iso.to.source;
        for s in Sampler::new(3).elems(power, 500, 4).map_err(|e| e.to_string())? {
            let c = compare(power, &s, &Elem::zero_map()).map_err(|e| e.to_string())?;
            ensure(c != Ordering::Greater, || format!("{s} above the empty map in {power}"))?;
            checked += 1;
        }
        // the first-equation maps, used on all of Δ^Γ
        let sol1 = solve(EqKind::Eq1, &base, &zero).map_err(|e| e.to_string())?;
        let whole = ChainDesc::Pow {
            base: Box::new(base.clone()),
            zero: zero.clone(),
            exp: Box::new(sol1.gamma.clone()),
        };
        let as_second = Iso {
            to: sol1.iso.to.clone().with_source(whole.clone()),
            from: sol1.iso.from.clone().with_target(whole.clone()),
        };
        let samples = Sampler::new(4).elems(&whole, 300, 4).map_err(|e| e.to_string())?;
        check_iso(&as_second, &samples, &whole, &sol1.gamma)?;
    }
    match solve(EqKind::Eq2, &ChainDesc::Fin(2), &f(0)) {
        Err(ChainError::NotSolvable(r)) => ensure(r == "zero not last", || r.clone())?,
        other => return Err(format!("solve(2, fin(2), f0) gave {other:?}")),
    }
    Ok(format!("{checked} maps at or below zero; first-equation iso verified; fin(2)/f0 not solvable"))
}

fn eq3() -> Check {
    let sol = solve(EqKind::Eq3, &ChainDesc::Fin(3), &f(2)).map_err(|e| e.to_string())?;
    let ChainDesc::SegLt { of: power, .. } = &sol.iso.to.source else {
        return Err("unexpected domain".into());
    };
    let samples = Sampler::new(6).elems(&sol.iso.to.source, 1000, 4).map_err(|e| e.to_string())?;
    for s in &samples {
        let g = sol.iso.to.apply(s).map_err(|e| e.to_string())?;
        let back = sol.iso.from.apply(&g).map_err(|e| e.to_string())?;
        ensure(back == *s, || format!("round trip {s} -> {g} -> {back}"))?;
    }
    for g in Sampler::new(7).elems(&sol.gamma, 1000, 4).map_err(|e| e.to_string())? {
        let s = sol.iso.from.apply(&g).map_err(|e| e.to_string())?;
        let c = compare(power, &s, &Elem::zero_map()).map_err(|e| e.to_string())?;
        ensure(c == Ordering::Less, || format!("iso_from({g}) = {s} is not below zero"))?;
    }
    for (base, zero) in [(ChainDesc::Omega, Elem::Nat(0)), (ChainDesc::Fin(2), f(0))] {
        match solve(EqKind::Eq3, &base, &zero) {
            Err(ChainError::NotSolvable(_)) => {}
            other => return Err(format!("solve(3, {base}, {zero}) gave {other:?}")),
        }
    }
    Ok("fin(3)/f2 solved with 1000 round trips and 1000 negative images; omega/n0 and fin(2)/f0 not solvable".into())
}

fn simultaneous_solution() -> Check {
    let start = Instant::now();
    let sim = simultaneous(&ChainDesc::OmegaStar, &Elem::StarIdx(0)).map_err(|e| e.to_string())?;
    let mut sampler = Sampler::new(8);
    let mut pairs = 0;
    for iso in [&sim.iso1, &sim.iso2, &sim.iso3] {
        let samples = sampler.elems(&iso.to.source, 500, 4).map_err(|e| e.to_string())?;
        pairs += check_iso(iso, &samples, &iso.to.source, &sim.gamma)?;
    }
    let shift = fixpoint::shift_iso(&sim.gamma).map_err(|e| e.to_string())?;
    for s in sampler.elems(&sim.iso3.to.source, 500, 4).map_err(|e| e.to_string())? {
        let direct = sim.iso3.to.apply(&s).map_err(|e| e.to_string())?;
        let via = sim
            .iso2
            .to
            .apply(&s)
            .and_then(|g| shift.from.apply(&g))
            .map_err(|e| e.to_string())?;
        ensure(direct == via, || format!("iso3({s}) = {direct}, composite gives {via}"))?;
    }
    within(start, Duration::from_secs(30), "simultaneous")?;
    Ok(format!("3 isos x 500 samples, {pairs} pairs, iso3 matches the shifted iso2"))
}

fn increasing_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    (k - 1..n)
        .flat_map(|last| {
            increasing_subsets(last, k - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            })
        })
        .collect()
}

fn refuter_finite() -> Check {
    let start = Instant::now();
    let base = ChainDesc::Fin(2);
    let mut cases = 0;
    for g in 2..=4u64 {
        let gamma = ChainDesc::Fin(g);
        let power = ChainDesc::Pow {
            base: Box::new(base.clone()),
            zero: f(0),
            exp: Box::new(gamma.clone()),
        };
        let elems = chain::enumerate(&power).map_err(|e| e.to_string())?;
        for pick in increasing_subsets(elems.len(), g as usize) {
            let images: Vec<Elem> = pick.iter().map(|&i| elems[i].clone()).collect();
            let (fw, bw) = (images.clone(), images);
            let claimed = Embedding::new(
                gamma.clone(),
                power.clone(),
                move |x| match x {
                    Elem::FinIdx(i) => Ok(fw[*i as usize].clone()),
                    other => Err(ChainError::not_member(&ChainDesc::Fin(g), other)),
                },
                move |y| bw.iter().position(|e| e == y).map(|i| f(i as u64)),
            );
            let out = refute_iso_second(&base, &f(0), &gamma, &claimed, &f(1), 64).map_err(|e| e.to_string())?;
            let w = out.witness().ok_or_else(|| format!("no witness for {pick:?} on fin({g})"))?;
            let steps = out.trace().len();
            ensure(steps <= g as usize + 1, || format!("{steps} steps on fin({g})"))?;
            let valid = recheck_iso_second(&base, &f(0), &gamma, &claimed, w).map_err(|e| e.to_string())?;
            ensure(valid, || format!("witness {w} did not re-validate"))?;
            cases += 1;
        }
    }
    within(start, Duration::from_secs(10), "finite refutation")?;
    Ok(format!("{cases} claimed injections refuted, all witnesses re-validated"))
}

fn refuter_prefix() -> Check {
    let base = ChainDesc::Fin(2);
    let iota = refuter::chi_prefix(&base, &f(0), &f(1));
    let input = RefuterInput {
        target: iota.target.clone(),
        iota,
        seed: Elem::Nat(0),
        successor: refuter::omega_successor(),
        cofinal: refuter::identity_cofinal(),
        one: OneSelector::constant(f(1)),
        budget: 20,
    };
    let out = refute_convex(&input).map_err(|e| e.to_string())?;
    let Some(Witness::ConvexityGap { a, b, c }) = out.witness() else {
        return Err(format!("expected a convexity gap, got {out:?}"));
    };
    let target = &input.target;
    let (ia, ib) = (
        input.iota.apply(a).map_err(|e| e.to_string())?,
        input.iota.apply(b).map_err(|e| e.to_string())?,
    );
    ensure(compare(target, &ia, c) == Ok(Ordering::Less), || format!("{ia} not below {c}"))?;
    ensure(compare(target, c, &ib) == Ok(Ordering::Less), || format!("{c} not below {ib}"))?;
    ensure(compare(target, &ia, &ib) == Ok(Ordering::Less), || format!("{ia} not below {ib}"))?;
    ensure(input.iota.preimage(c).is_none(), || format!("{c} has a preimage"))?;
    Ok(format!("gap a={a} b={b} c={c} after {} steps", out.trace().len()))
}

fn final_segment_on_samples(emb: &Embedding, sol: &Solution, other: &Solution, seed: u64) -> Result<(), String> {
    let xs = Sampler::new(seed).elems(&sol.gamma, 200, 4).map_err(|e| e.to_string())?;
    let ys = xs
        .iter()
        .map(|x| emb.apply(x))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let a = compare(&sol.gamma, &xs[i], &xs[j]).map_err(|e| e.to_string())?;
            let b = compare(&other.gamma, &ys[i], &ys[j]).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("order of {} and {} not preserved", xs[i], xs[j]))?;
        }
    }
    let lowest = ys
        .iter()
        .min_by(|p, q| compare(&other.gamma, p, q).unwrap_or(Ordering::Equal))
        .ok_or("no samples")?;
    for y in Sampler::new(seed + 1).elems(&other.gamma, 200, 4).map_err(|e| e.to_string())? {
        if compare(&other.gamma, lowest, &y).map_err(|e| e.to_string())? != Ordering::Greater {
            let back = emb.preimage(&y).ok_or_else(|| format!("{y} lies above {lowest} but has no preimage"))?;
            ensure(emb.apply(&back).as_ref() == Ok(&y), || format!("preimage of {y} maps elsewhere"))?;
        }
    }
    Ok(())
}

fn minimality() -> Check {
    let (base, zero) = (ChainDesc::OmegaStar, Elem::StarIdx(0));
    let sol = solve(EqKind::Eq2, &base, &zero).map_err(|e| e.to_string())?;
    let own = minimal_embed(&base, &zero, &sol).map_err(|e| e.to_string())?;
    for g in Sampler::new(10).elems(&sol.gamma, 200, 4).map_err(|e| e.to_string())? {
        let n = fixpoint::normalize(EqKind::Eq2, &base, &zero, &g).map_err(|e| e.to_string())?;
        let img = own.apply(&n).map_err(|e| e.to_string())?;
        ensure(img == n, || format!("self-embedding moved {n} to {img}"))?;
    }
    let copy = power_copy(&sol).map_err(|e| e.to_string())?;
    let into_copy = minimal_embed(&base, &zero, &copy).map_err(|e| e.to_string())?;
    final_segment_on_samples(&into_copy, &sol, &copy, 11)?;
    Ok("identity on 200 samples; order-preserving final segment in the relabelled copy".into())
}

fn cli_contract() -> Check {
    let mut sampler = Sampler::new(99);
    for i in 0..1000 {
        let c = random_chain(&mut sampler, 3);
        let text = format_chain(&c);
        let back = parse_chain(&text).map_err(|e| format!("#{i} {text}: {e}"))?;
        ensure(back == c, || format!("#{i} {text} parsed differently"))?;
        if let Ok(e) = sampler.elem(&c, 3) {
            let t = format_elem(&e);
            ensure(parse_elem(&t).as_ref() == Ok(&e), || format!("#{i} element {t}"))?;
        }
    }
    let cases = common::golden_cases();
    ensure(cases.len() >= 6, || format!("only {} golden cases", cases.len()))?;
    for (name, expected, actual) in &cases {
        ensure(expected == actual, || format!("golden {name}:\n{actual}"))?;
    }
    let codes: &[(&[&str], i32)] = &[
        (&["cmp", "pow(fin(2),f0,fin(2))", "{}", "{f1:f1}"], 0),
        (&["solve", "2", "omegastar", "s0"], 0),
        (&["solve", "3", "omega", "n0"], 2),
        (&["--budget", "20", "refute-convex", "pow(fin(2), f0, omega)"], 2),
        (&["--budget", "10", "refute-eq2", "fin(2)", "f0", "fin(4)"], 2),
        (&["cmp", "fin(0)", "f0", "f0"], 1),
        (&["cmp", "pow(fin(2) f0, omega)", "{}", "{}"], 1),
        (&["enumerate", "omega"], 1),
    ];
    for (args, code) in codes {
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let (stdout, got) = common::run_bin(&args);
        ensure(got == *code, || format!("{args:?} exited {got}, expected {code}: {stdout}"))?;
    }
    let (stdout, _) = common::run_bin(&["cmp".into(), "pow(fin(2),f0,fin(2))".into(), "{}".into(), "{f1:f1}".into()]);
    ensure(stdout.trim() == "LESS", || stdout.clone())?;
    Ok(format!("1000 expressions round-trip, {} golden files, {} exit codes", cases.len(), codes.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("oracle agreement", oracle_agreement),
        ("convexity and final segments", convex_final_segments),
        ("oplus monotonicity", oplus_monotone),
        ("first-equation isomorphism", eq1_iso),
        ("second equation", eq2),
        ("third equation", eq3),
        ("simultaneous solution", simultaneous_solution),
        ("refuter completeness (finite)", refuter_finite),
        ("refuter on the prefix embedding", refuter_prefix),
        ("minimality", minimality),
        ("command line", cli_contract),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
