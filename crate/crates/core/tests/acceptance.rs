//! Acceptance run: one PASS/FAIL line per criterion. Built without the test
//! harness so the lines always reach the terminal.

use std::collections::{BTreeSet, HashMap};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::thread;
use std::time::{Duration, Instant};

use qgame_core::analysis::{
    brute_force_mono_clique, check_certificate, dense_pattern_labels, extract_clique, mono_dense_subset,
    pair_disjointness, verify_maker_strategy, verify_pairing, AllBlue, AllRed, CliqueCertificate, Colour,
    DenominatorParity, DenseCase, ExtractOptions, VertexColouring,
};
use qgame_core::breaker::{strategy_by_id, PairingBreaker, RandomStrategy};
use qgame_core::engine::replay;
use qgame_core::maker::{MakerConfig, QStrategy};
use qgame_core::{
    class_between, class_compare, enum_q, enum_unit_interval, run_game, ClassId, EnumerationIndex, GameState,
    Partition, Rational, Trace, UniversalStream,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LONG: u64 = 100_000;
const SEEDS: [u64; 3] = [1, 2, 3];
const THRESHOLD: usize = 3;

fn idx(i: u64) -> EnumerationIndex {
    EnumerationIndex::new(i).unwrap()
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

struct Run {
    seed: u64,
    trace: Trace,
    state: GameState,
    elapsed: Duration,
}

fn q_vs_random(turns: u64, seed: u64) -> Run {
    let cfg = MakerConfig::default();
    let mut maker = QStrategy::new(cfg);
    let mut breaker = RandomStrategy::new(Some(seed));
    let t = Instant::now();
    let (trace, state) = run_game(&mut maker, &mut breaker, turns, seed).expect("legal run");
    Run { seed, trace, state, elapsed: t.elapsed() }
}

/// The three long runs against random Breakers, shared by two criteria.
fn long_runs() -> &'static [Run] {
    static RUNS: OnceLock<Vec<Run>> = OnceLock::new();
    RUNS.get_or_init(|| {
        thread::scope(|s| {
            let hs: Vec<_> = SEEDS.iter().map(|&seed| s.spawn(move || q_vs_random(LONG, seed))).collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        })
    })
}

fn c1_isomorphism() -> Verdict {
    let t = Instant::now();
    let part = Partition::default();
    let log = part.matched_prefix(1000).unwrap();
    let mut bad = 0usize;
    for i in 0..log.len() {
        for j in i + 1..log.len() {
            if log[i].0.cmp(&log[j].0) != log[i].1.cmp(&log[j].1) {
                bad += 1;
            }
        }
    }
    let mut trips = 0usize;
    for (d, r) in &log {
        if &part.iso_forward(d).unwrap() != r || &part.iso_backward(r).unwrap() != d {
            trips += 1;
        }
    }
    let el = t.elapsed();
    verdict(
        bad == 0 && trips == 0 && el < Duration::from_secs(10),
        format!("{} pairs, {bad} order violations, {trips} round-trip failures, {el:.2?}", 1000 * 999 / 2),
    )
}

fn c2_partition() -> Verdict {
    let t = Instant::now();
    let part = Partition::default();
    let mut sample: Vec<(Rational, ClassId)> =
        (1..=1000).map(|i| enum_unit_interval(idx(i))).map(|r| (r.clone(), part.class_of(&r).unwrap())).collect();
    sample.sort_by(|a, b| a.0.cmp(&b.0));
    // a class reappearing after a different one is an interleaving
    let mut last: HashMap<&ClassId, usize> = HashMap::new();
    let mut interleavings = 0usize;
    let mut order_breaks = 0usize;
    for (k, (_, c)) in sample.iter().enumerate() {
        if let Some(&prev) = last.get(c) {
            if prev + 1 != k {
                interleavings += 1;
            }
        }
        last.insert(c, k);
        if k > 0 && class_compare(&sample[k - 1].1, c) == std::cmp::Ordering::Greater {
            order_breaks += 1;
        }
    }
    let classes: Vec<&ClassId> = last.keys().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut between_bad = 0usize;
    let mut between_checked = 0usize;
    for a in &classes {
        for b in &classes {
            if class_compare(a, b) == std::cmp::Ordering::Less {
                between_checked += 1;
                let m = class_between(a, b).unwrap();
                if class_compare(a, &m) != std::cmp::Ordering::Less || class_compare(&m, b) != std::cmp::Ordering::Less
                {
                    between_bad += 1;
                }
            }
        }
    }
    let el = t.elapsed();
    verdict(
        interleavings == 0 && order_breaks == 0 && between_bad == 0 && el < Duration::from_secs(10),
        format!(
            "{} classes, {interleavings} interleavings, {order_breaks} order breaks, {between_bad}/{between_checked} bad betweens, {el:.2?}",
            classes.len()
        ),
    )
}

/// Materializes the stream from an explicit word list, independently of the
/// library's generator.
fn naive_stream(n: usize) -> Vec<u32> {
    let mut words: Vec<Vec<u32>> = Vec::new();
    let mut out = Vec::with_capacity(n);
    let mut weight = 2u32;
    let mut t = 0usize;
    while out.len() < n {
        t += 1;
        while words.len() < t {
            let mut batch: Vec<Vec<u32>> = Vec::new();
            let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
            while let Some(cur) = stack.pop() {
                let w = cur.len() as u32 + cur.iter().sum::<u32>();
                if w == weight && !cur.is_empty() {
                    batch.push(cur);
                    continue;
                }
                for v in 1..weight {
                    if w + 1 + v <= weight {
                        let mut next = cur.clone();
                        next.push(v);
                        stack.push(next);
                    }
                }
            }
            batch.sort();
            words.extend(batch);
            weight += 1;
        }
        for w in &words[..t] {
            out.extend_from_slice(w);
        }
    }
    out.truncate(n);
    out
}

fn c3_stream() -> Verdict {
    let t = Instant::now();
    let mut words: Vec<Vec<u32>> = Vec::new();
    for len in 1..=3u32 {
        for code in 0..3u32.pow(len) {
            words.push((0..len).map(|p| code / 3u32.pow(p) % 3 + 1).collect());
        }
    }
    let s = UniversalStream::new();
    let mut results = Vec::new();
    let mut need = 0usize;
    for w in &words {
        for m in 1..=5 {
            let start = s.occurrence_start(w, m);
            need = need.max(start + w.len());
            results.push((w.clone(), m, s.occurrence_next(w, m)));
        }
    }
    let naive = naive_stream(need);
    let mut mismatches = 0usize;
    for (w, m, got) in &results {
        let mut count = 0;
        let mut expected = None;
        for st in 0..naive.len() - w.len() {
            if naive[st..st + w.len()] == w[..] {
                count += 1;
                if count == *m {
                    expected = Some(naive[st + w.len()]);
                    break;
                }
            }
        }
        if expected != Some(*got) {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!(
            "{} queries over {} words, {mismatches} mismatches, prefix {need}, {:.2?}",
            results.len(),
            words.len(),
            t.elapsed()
        ),
    )
}

fn c4_maker_replay() -> Verdict {
    let runs = long_runs();
    let mut ok = true;
    let mut parts = Vec::new();
    for run in runs {
        let t = Instant::now();
        let replay = verify_maker_strategy(&run.trace, &MakerConfig::default()).unwrap();
        let vertices = run.state.maker_vertex_count();
        let first_ok = replay.first_connection_ok == vertices - 1;
        let class_ok = replay.class_placement_ok == replay.class_placement_checked;
        let f_ok = replay.max_f.0 <= replay.max_f.1;
        let fine = replay.report.is_ok() && replay.divergence.is_none() && first_ok && class_ok && f_ok;
        let time_ok = run.elapsed < Duration::from_secs(300);
        ok &= fine && time_ok;
        parts.push(format!(
            "seed {}: divergence={:?} first-connection {}/{} class-placement {}/{} max F {}/{} occurrence-fallbacks {} run {:.1?} replay {:.1?}",
            run.seed,
            replay.divergence,
            replay.first_connection_ok,
            vertices - 1,
            replay.class_placement_ok,
            replay.class_placement_checked,
            replay.max_f.0,
            replay.max_f.1,
            replay.occurrence_budget,
            run.elapsed,
            t.elapsed()
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c5_disjointness() -> Verdict {
    let t = Instant::now();
    let r = pair_disjointness(10_000);
    let el = t.elapsed();
    verdict(
        r.is_ok() && el < Duration::from_secs(30),
        format!("10000 pairs, {} collisions, {el:.2?}", r.violations.len()),
    )
}

fn c6_dense_game() -> Verdict {
    let cfg = MakerConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    let runs: [(&str, Box<dyn qgame_core::Strategy>); 2] =
        [("q-strategy", Box::new(QStrategy::new(cfg))), ("random Maker", Box::new(RandomStrategy::new(Some(4))))];
    for (name, mut maker) in runs {
        let t = Instant::now();
        let mut breaker = PairingBreaker::new();
        let (trace, _) = run_game(maker.as_mut(), &mut breaker, LONG, 4).unwrap();
        let r = verify_pairing(&trace).unwrap();
        ok &= r.is_ok();
        let paired = r.notes.iter().find(|n| n.starts_with("paired")).cloned().unwrap_or_default();
        let dens = r.notes.iter().find(|n| n.starts_with("density")).cloned().unwrap_or_default();
        parts.push(format!("{name}: {} violations, {paired}, {dens}, {:.1?}", r.violations.len(), t.elapsed()));
    }
    verdict(ok, parts.join("; "))
}

/// Independent O(n²) longest-chain DP.
fn chain(vals: &[Rational], increasing: bool) -> usize {
    let mut best = vec![1usize; vals.len()];
    for i in 0..vals.len() {
        for j in 0..i {
            if (increasing && vals[j] < vals[i]) || (!increasing && vals[j] > vals[i]) {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

fn c7_ramsey_oracle() -> Verdict {
    let t = Instant::now();
    let mut bad = Vec::new();
    for n in 1..=12u64 {
        let vals: Vec<Rational> = (1..=n).map(|i| enum_q(idx(i))).collect();
        let (blue, red) = (brute_force_mono_clique(n, Colour::Blue), brute_force_mono_clique(n, Colour::Red));
        if blue != chain(&vals, true) || red != chain(&vals, false) {
            bad.push(n);
        }
    }
    let el = t.elapsed();
    verdict(bad.is_empty() && el < Duration::from_secs(60), format!("n=1..12, mismatches at {bad:?}, {el:.2?}"))
}

/// One single-field corruption of `cert`.
fn mutate(cert: &CliqueCertificate, state: &GameState, rng: &mut ChaCha8Rng) -> (String, CliqueCertificate) {
    let mut c = cert.clone();
    let m = c.m();
    let other_vertex = |rng: &mut ChaCha8Rng, avoid: &Rational| loop {
        let v = state.maker_vertex(rng.gen_range(0..state.maker_vertex_count()));
        if v != avoid {
            return v.clone();
        }
    };
    let s = rng.gen_range(0..c.steps.len());
    let kind = rng.gen_range(0..13);
    let label = match kind {
        0 => {
            let i = rng.gen_range(0..m);
            c.vertices[i] = other_vertex(rng, &cert.vertices[i]);
            "vertex"
        }
        1 => {
            let i = rng.gen_range(1..m);
            let l = c.classes[i].as_ref().unwrap().label() + &Rational::frac(1, 7);
            c.classes[i] = Some(ClassId(l));
            "class"
        }
        2 => {
            c.steps[s].gap =
                if c.steps[s].gap > 1 && rng.gen_bool(0.5) { c.steps[s].gap - 1 } else { c.steps[s].gap + 1 };
            "gap"
        }
        3 => {
            c.steps[s].x += 1;
            "x"
        }
        4 => {
            c.steps[s].class = ClassId(c.steps[s].class.label() - &Rational::frac(1, 3));
            "step class"
        }
        5 => {
            c.steps[s].count =
                if c.steps[s].count > 0 && rng.gen_bool(0.5) { c.steps[s].count - 1 } else { c.steps[s].count + 1 };
            "count"
        }
        6 => {
            let j = rng.gen_range(0..c.steps[s].members.len());
            c.steps[s].members[j] = other_vertex(rng, &cert.steps[s].members[j]);
            "member"
        }
        7 => {
            c.steps[s].members.pop();
            "member list"
        }
        8 => {
            c.steps[s].f_size += 1;
            "f"
        }
        9 => {
            c.steps[s].rank =
                if c.steps[s].rank > 0 && rng.gen_bool(0.5) { c.steps[s].rank - 1 } else { c.steps[s].rank + 1 };
            "rank"
        }
        10 => {
            c.steps[s].next_gap_classes += 1;
            "next"
        }
        11 => {
            c.threshold = if rng.gen_bool(0.5) { c.threshold + 1 } else { c.threshold - 1 };
            "threshold"
        }
        _ => {
            c.steps[s].k += 1;
            "k"
        }
    };
    (label.to_string(), c)
}

fn c8_extraction() -> Verdict {
    let opts = ExtractOptions { m_max: 8, threshold: THRESHOLD, node_budget: 500_000 };
    let part = Partition::default();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut certs: Vec<(CliqueCertificate, &GameState)> = Vec::new();
    let short: Vec<Vec<Run>> = thread::scope(|s| {
        let hs: Vec<_> = SEEDS
            .iter()
            .map(|&seed| s.spawn(move || vec![q_vs_random(1_000, seed), q_vs_random(10_000, seed)]))
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for (k, run) in long_runs().iter().enumerate() {
        let mut ms = Vec::new();
        for r in [&short[k][0], &short[k][1], run] {
            let cert = extract_clique(&r.state, &part, opts).unwrap();
            let report = check_certificate(&cert, &r.state, &part);
            ok &= report.is_ok();
            ms.push(cert.m());
            certs.push((cert, &r.state));
        }
        let monotone = ms.windows(2).all(|w| w[0] <= w[1]);
        ok &= monotone;
        parts.push(format!("seed {}: m={ms:?}", run.seed));
    }
    // fuzz: certificates with at least one step
    let pool: Vec<&(CliqueCertificate, &GameState)> = certs.iter().filter(|(c, _)| c.m() >= 3).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut rejected = 0;
    let mut accepted_kinds = Vec::new();
    let total = if pool.is_empty() { 0 } else { 100 };
    for _ in 0..total {
        let (cert, state) = pool[rng.gen_range(0..pool.len())];
        let (kind, bad) = mutate(cert, state, &mut rng);
        // corrupted certificates also go through the text form
        let parsed = CliqueCertificate::parse(&bad.to_text()).unwrap();
        if !check_certificate(&parsed, state, &part).is_ok() {
            rejected += 1;
        } else {
            accepted_kinds.push(kind);
        }
    }
    ok &= total == 100 && rejected == total;
    parts.push(format!("fuzz {rejected}/{total} rejected (threshold {THRESHOLD})"));
    if !accepted_kinds.is_empty() {
        parts.push(format!("accepted corruptions: {accepted_kinds:?}"));
    }
    verdict(ok, parts.join("; "))
}

fn c9_determinism() -> Verdict {
    let cfg = MakerConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for breaker in ["random:9", "pairing", "blocking"] {
        let texts: Vec<String> = (0..2)
            .map(|_| {
                let mut m = strategy_by_id("q-strategy", &cfg).unwrap();
                let mut b = strategy_by_id(breaker, &cfg).unwrap();
                run_game(m.as_mut(), b.as_mut(), 10_000, 9).unwrap().0.to_text()
            })
            .collect();
        let parsed = Trace::parse(&texts[0]).unwrap();
        let same = texts[0] == texts[1] && parsed.to_text() == texts[0];
        let replayed = replay(&parsed).is_ok();
        let rederived = verify_maker_strategy(&parsed, &cfg).unwrap().divergence.is_none();
        ok &= same && replayed && rederived;
        parts.push(format!("{breaker}: identical={same} replay={replayed} re-derived={rederived}"));
    }
    verdict(ok, parts.join("; "))
}

/// Every pair of labels from levels `0..=d` of the midpoint tree, for each
/// `d` whose next level is complete, must have a chosen label between them.
fn betweenness_gaps(labels: &[Rational]) -> (usize, usize) {
    let mut complete_levels = 0;
    while (1usize << (complete_levels + 1)) - 1 <= labels.len() {
        complete_levels += 1;
    }
    let inner = (1usize << (complete_levels - 1)) - 1;
    let (mut checked, mut missing) = (0, 0);
    for i in 0..inner {
        for j in 0..inner {
            if labels[i] < labels[j] {
                checked += 1;
                if !labels.iter().any(|l| &labels[i] < l && l < &labels[j]) {
                    missing += 1;
                }
            }
        }
    }
    (checked, missing)
}

fn c10_dense_subset() -> Verdict {
    let part = Partition::default();
    let oracles: [(&dyn VertexColouring, DenseCase); 3] = [
        (&AllBlue, DenseCase::AllBlueClass),
        (&AllRed, DenseCase::RedInEveryClass),
        (&DenominatorParity, DenseCase::RedInEveryClass),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (oracle, expected) in oracles {
        let sub = match mono_dense_subset(oracle, &part, 8, 1000).unwrap() {
            Ok(s) => s,
            Err(inc) => {
                ok = false;
                parts.push(format!("{}: {inc}", oracle.name()));
                continue;
            }
        };
        let mono = sub.elements.iter().all(|e| oracle.colour(e) == sub.colour);
        let placed = sub.elements.iter().zip(&sub.classes).all(|(e, c)| &part.class_of(e).unwrap() == c);
        let mut line = format!("{}: {} mono={mono} classes-ok={placed}", oracle.name(), sub.case.tag());
        ok &= mono && placed && sub.case == expected && sub.elements.len() == 8;
        if sub.case == DenseCase::RedInEveryClass {
            let labels: Vec<Rational> = sub.classes.iter().map(|c| c.label().clone()).collect();
            let distinct = labels.iter().collect::<BTreeSet<_>>().len() == labels.len();
            let pattern = labels == dense_pattern_labels(8);
            let (checked, missing) = betweenness_gaps(&labels);
            ok &= distinct && pattern && missing == 0;
            line.push_str(&format!(" distinct={distinct} pattern={pattern} between {}/{checked}", checked - missing));
        }
        parts.push(line);
    }
    verdict(ok, parts.join("; "))
}

fn main() -> ExitCode {
    type Check = fn() -> Verdict;
    let criteria: [(&str, Check); 10] = [
        ("back-and-forth isomorphism", c1_isomorphism),
        ("partition soundness", c2_partition),
        ("universal sequence", c3_stream),
        ("maker strategy replay", c4_maker_replay),
        ("pairing disjointness", c5_disjointness),
        ("dense game soundness", c6_dense_game),
        ("ramsey colouring oracle", c7_ramsey_oracle),
        ("clique extraction", c8_extraction),
        ("trace determinism", c9_determinism),
        ("monochromatic dense subset", c10_dense_subset),
    ];
    // optional criterion numbers on the command line restrict the run
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected: Vec<usize> = (1..=10).filter(|k| only.is_empty() || only.contains(k)).collect();
    let start = Instant::now();
    let results: Vec<(Verdict, Duration)> = thread::scope(|s| {
        let hs: Vec<_> = selected
            .iter()
            .map(|&k| {
                let f = criteria[k - 1].1;
                s.spawn(move || {
                    let t = Instant::now();
                    let v = f();
                    (v, t.elapsed())
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap_or_else(|_| (verdict(false, "panicked"), Duration::ZERO))).collect()
    });
    let mut failed = 0;
    for (&k, (v, el)) in selected.iter().zip(&results) {
        if !v.pass {
            failed += 1;
        }
        let name = criteria[k - 1].0;
        println!("criterion {k:>2} {} [{el:.1?}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {}/{} passed in {:.1?}", selected.len() - failed, selected.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
