//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances and limits are pinned below.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use zxcliff::circuit::{gate_matrix_product, WireBuilder};
use zxcliff::harness::bench;
use zxcliff::normal_forms::{cc1_contains, matrix_key};
use zxcliff::optimiser::is_gate_form;
use zxcliff::rewrite::{apply_match, find_matches, rewrite_first, rewrite_metric, Trace};
use zxcliff::ruleset::audit;
use zxcliff::{
    cc1_table, cc2_contains, cc2_family, default_ruleset, find_path_cover, interpret, is_circuit_like, optimise,
    random_clifford_circuit, replay, scalar_free_equal, simple_form, translate, Circuit, Diagram, Gate,
    OptimiseResult, OptimiserConfig, PauliMetric, Phase, VertexKind,
};

const TOL: f64 = 1e-9;
const KEY_DECIMALS: i32 = 9;

struct Outcome {
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = std::thread::available_parallelism().map_or(4, |n| n.get());
    let chunk = items.len().div_ceil(jobs).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    })
}

fn same(a: &Circuit, b: &Circuit) -> bool {
    match (gate_matrix_product(a), gate_matrix_product(b)) {
        (Ok(x), Ok(y)) => scalar_free_equal(&x, &y, TOL).unwrap_or(false),
        _ => false,
    }
}

/// Replay result and byte-stability of one run, for criterion 8.
#[derive(Default)]
struct ReplayTally {
    runs: usize,
    replayed: usize,
    stable: usize,
}

impl ReplayTally {
    fn add(&mut self, other: ReplayTally) {
        self.runs += other.runs;
        self.replayed += other.replayed;
        self.stable += other.stable;
    }
}

fn check_run(c: &Circuit, cfg: &OptimiserConfig, r: &OptimiseResult) -> ReplayTally {
    let replayed = replay(&r.trace, default_ruleset()).is_ok_and(|d| d.iso_equal(&r.diagram));
    let again = optimise(c, cfg).map(|r2| r2.trace.to_json());
    let stable = again.is_ok_and(|j| j == r.trace.to_json());
    ReplayTally {
        runs: 1,
        replayed: replayed as usize,
        stable: stable as usize,
    }
}

fn rule_audit() -> (bool, String) {
    let rows = audit(default_ruleset());
    let bad: Vec<&str> = rows.iter().filter(|r| !r.sound).map(|r| r.name.as_str()).collect();
    (bad.is_empty(), format!("{}/{} rules and passes sound {:?}", rows.len() - bad.len(), rows.len(), bad))
}

fn line(kinds: &[VertexKind]) -> Diagram {
    let mut b = WireBuilder::new(1);
    for k in kinds {
        b.push(0, *k);
    }
    b.finish()
}

fn cc1() -> (bool, String) {
    let entries = cc1_table().entries();
    let mats: Vec<_> = entries.iter().map(|e| interpret(&e.diagram).unwrap()).collect();
    let mut distinct = true;
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            distinct &= !scalar_free_equal(&mats[i], &mats[j], TOL).unwrap();
        }
    }
    // Every spider line of up to three vertices has a CC1 equivalent no longer than itself.
    let mut kinds = Vec::new();
    for q in 0..4 {
        kinds.push(VertexKind::Z(Phase::new(q)));
        kinds.push(VertexKind::X(Phase::new(q)));
    }
    let mut words: Vec<Vec<VertexKind>> = vec![vec![]];
    let mut frontier = words.clone();
    for _ in 0..3 {
        frontier = frontier
            .iter()
            .flat_map(|w| kinds.iter().map(move |k| [w.clone(), vec![*k]].concat()))
            .collect();
        words.extend(frontier.iter().cloned());
    }
    let mut minimal = true;
    let mut covered = true;
    for w in &words {
        let m = interpret(&line(w)).unwrap();
        match mats.iter().position(|x| scalar_free_equal(x, &m, TOL).unwrap()) {
            Some(i) => minimal &= entries[i].len() <= w.len(),
            None => covered = false,
        }
    }
    (
        entries.len() == 24 && distinct && minimal && covered,
        format!(
            "{} entries, pairwise distinct {distinct}, {} lines of <= 3 spiders: covered {covered}, minimal {minimal}",
            entries.len(),
            words.len()
        ),
    )
}

fn cc2() -> (bool, String) {
    let fam = cc2_family();
    let keys: Vec<Vec<i64>> = par_map(fam.members(), |m| matrix_key(&interpret(&m.diagram()).unwrap(), KEY_DECIMALS));
    let distinct: HashSet<&Vec<i64>> = keys.iter().collect();
    // Circuits and diagrams of members agree on a sample.
    let agree = fam
        .members()
        .iter()
        .step_by(37)
        .all(|m| scalar_free_equal(&gate_matrix_product(&m.circuit()).unwrap(), &interpret(&m.diagram()).unwrap(), TOL).unwrap());
    (
        fam.len() == 11520 && distinct.len() == 11520 && agree,
        format!("{} members, {} distinct oracle keys, circuit/diagram agree {agree}", fam.len(), distinct.len()),
    )
}

fn one_qubit(tally: &mut ReplayTally) -> (bool, String) {
    let gens = [Gate::S(0), Gate::V(0), Gate::Z(0), Gate::X(0), Gate::H(0)];
    let words: Vec<usize> = (0..5usize.pow(6)).collect();
    let cfg = OptimiserConfig::default();
    let results = par_map(&words, |w| {
        let mut n = *w;
        let mut c = Circuit::new(1);
        for _ in 0..6 {
            c.push(gens[n % 5]).unwrap();
            n /= 5;
        }
        match optimise(&c, &cfg) {
            Ok(r) => (cc1_contains(&r.diagram) && same(&c, &r.circuit), check_run(&c, &cfg, &r)),
            Err(_) => (false, ReplayTally::default()),
        }
    });
    let ok = results.iter().filter(|r| r.0).count();
    for (_, t) in results {
        tally.add(t);
    }
    (ok == words.len(), format!("{ok}/{} words reach CC1 with semantics preserved", words.len()))
}

fn two_qubit(tally: &mut ReplayTally) -> (bool, String) {
    let seeds: Vec<u64> = (0..500).map(|i| 50_000 + i).collect();
    let on = OptimiserConfig::default();
    let off = OptimiserConfig {
        semantic_fallback: false,
        ..Default::default()
    };
    let results = par_map(&seeds, |s| {
        let c = random_clifford_circuit(2, 20, *s);
        let a = optimise(&c, &on).ok();
        let b = optimise(&c, &off).ok();
        let a_ok = a.as_ref().is_some_and(|r| cc2_contains(&r.diagram) && same(&c, &r.circuit));
        let b_ok = b
            .as_ref()
            .is_some_and(|r| same(&c, &r.circuit) && r.stats.output_size <= r.stats.input_size);
        let mut t = ReplayTally::default();
        for (r, cfg) in [(&a, &on), (&b, &off)] {
            if let Some(r) = r {
                t.add(check_run(&c, cfg, r));
            }
        }
        (a_ok, b_ok, t)
    });
    let a = results.iter().filter(|r| r.0).count();
    let b = results.iter().filter(|r| r.1).count();
    for (_, _, t) in results {
        tally.add(t);
    }
    (
        a == 500 && b == 500,
        format!("fallback on: {a}/500 in CC2 and equivalent; fallback off: {b}/500 equivalent and not larger"),
    )
}

fn random_benchmark(tally: &mut ReplayTally) -> (bool, String) {
    let cfg = OptimiserConfig::default();
    let jobs = std::thread::available_parallelism().map_or(4, |n| n.get());
    let reports: Vec<_> = (1..=3).map(|w| bench(w, 20, 50, 1, jobs, &cfg)).collect();
    for r in &reports {
        let seeds: Vec<u64> = r.runs.iter().map(|x| x.seed).collect();
        for t in par_map(&seeds, |s| {
            let c = random_clifford_circuit(r.width, 20, *s);
            optimise(&c, &cfg).map(|res| check_run(&c, &cfg, &res)).unwrap_or_default()
        }) {
            tally.add(t);
        }
    }
    let verified = reports.iter().all(|r| r.all_verified() && r.runs.len() == 50);
    let (w1, w2, w3) = (reports[0].mean_out, reports[1].ratio, reports[2].ratio);
    (
        verified && w1 <= 3.0 && w2 <= 0.45 && w3 <= 0.55,
        format!(
            "w1 mean out {w1:.2} (<= 3); w2 ratio {w2:.3} (<= 0.45); w3 ratio {w3:.3} (<= 0.55); verified {verified}"
        ),
    )
}

fn extraction() -> (bool, String) {
    let cases: Vec<u64> = (0..200).collect();
    let results = par_map(&cases, |i| {
        let width = 1 + (*i % 4) as usize;
        let depth = 1 + (*i as usize * 7) % 30;
        let c = random_clifford_circuit(width, depth, 90_000 + i);
        let d = simple_form(&translate(&c));
        let Ok(pc) = find_path_cover(&d) else { return false };
        let flow_ok = pc.flow.verify(&d).is_ok() && pc.verify(&d).is_ok();
        let Ok(out) = zxcliff::extract_circuit(&d, &pc) else { return false };
        flow_ok && same(&c, &out)
    });
    let ok = results.iter().filter(|b| **b).count();
    (ok == 200, format!("{ok}/200 round trips equivalent with valid flow"))
}

fn negative_control() -> (bool, String) {
    let c = Circuit::from_gates(3, [Gate::Cnot(1, 2), Gate::Cnot(0, 1), Gate::Z(1)]).unwrap();
    let d = translate(&c);
    let rules = default_ruleset();
    let Some(rule) = rules.cnot_commute().iter().find(|r| r.name == "GreenPiCx") else {
        return (false, "GreenPiCx missing".into());
    };
    let outs: Vec<Diagram> = find_matches(rule, &d)
        .iter()
        .filter_map(|m| apply_match(rule, &d, m).ok())
        .collect();
    let bad: Vec<&Diagram> = outs.iter().filter(|o| find_path_cover(o).is_err()).collect();
    let rejected = !bad.is_empty() && bad.iter().all(|o| !is_circuit_like(o));
    let mut t = Trace::new();
    let first = rewrite_first(std::slice::from_ref(rule), &d, &mut t);
    let first_is_bad = first.is_some_and(|f| find_path_cover(&f).is_err());
    let chosen = rewrite_metric(std::slice::from_ref(rule), &d, PauliMetric::of, &mut t);
    let good = chosen.is_some_and(|o| is_gate_form(&o));
    let opt = optimise(&c, &OptimiserConfig::default()).is_ok_and(|r| is_circuit_like(&r.diagram));
    (
        rejected && good && opt,
        format!(
            "{} of {} matches give a non-circuit, all rejected {rejected}; first match is one of them {first_is_bad}; metric picks a circuit {good}; optimiser output circuit-like {opt}",
            bad.len(),
            outs.len()
        ),
    )
}

fn timed(limit_secs: u64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (pass, detail) = f();
    Outcome {
        pass,
        detail,
        elapsed: t.elapsed(),
        limit: Duration::from_secs(limit_secs),
    }
}

fn main() -> ExitCode {
    let mut tally = ReplayTally::default();
    let mut results = vec![
        (1, "rule soundness audit", timed(10, rule_audit)),
        (2, "CC1 correctness", timed(5, cc1)),
        (3, "CC2 correctness", timed(60, cc2)),
        (4, "one-qubit completeness", timed(300, || one_qubit(&mut tally))),
        (5, "two-qubit completeness", timed(300, || two_qubit(&mut tally))),
        (6, "random-circuit benchmark", timed(600, || random_benchmark(&mut tally))),
        (7, "extraction round trip", timed(120, extraction)),
    ];
    let replay_pass = tally.runs > 0 && tally.replayed == tally.runs && tally.stable == tally.runs;
    results.push((
        8,
        "proof-trace replay",
        Outcome {
            pass: replay_pass,
            detail: format!(
                "{}/{} replays iso-equal, {}/{} traces byte-stable",
                tally.replayed, tally.runs, tally.stable, tally.runs
            ),
            elapsed: Duration::ZERO,
            limit: Duration::MAX,
        },
    ));
    results.push((9, "negative control", timed(10, negative_control)));

    println!("acceptance (tol {TOL:e}, oracle keys at {KEY_DECIMALS} decimals)");
    let mut failed = 0;
    for (n, name, o) in &results {
        let in_time = o.elapsed <= o.limit;
        let pass = o.pass && in_time;
        failed += !pass as usize;
        let limit = if o.limit == Duration::MAX { "n/a".to_string() } else { format!("{}s", o.limit.as_secs()) };
        println!(
            "criterion {n} {}: {} [{:.1}s, limit {limit}] {}",
            name,
            if pass { "PASS" } else { "FAIL" },
            o.elapsed.as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
