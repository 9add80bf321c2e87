use std::collections::BTreeMap;
use std::panic;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use rzkp_core::games::{challenge_pmf, play_rounds, sample_challenge, GameKind};
use rzkp_core::graph::{
    extend_with_gadgets, extended_counts, find_three_coloring, gen_planted, validate_coloring,
    Coloring, Graph, PlantedInstance,
};
use rzkp_core::net::codec::decode;
use rzkp_core::net::{run_verifier_session, spawn_prover, ProverConfig, Role, SessionConfig};
use rzkp_core::quantum::audit::{audit_all, AuditConfig};
use rzkp_core::quantum::linalg::{diag_projector, CMatrix};
use rzkp_core::quantum::random::{haar_unitary, random_density, random_pvm};
use rzkp_core::quantum::{sequential_coloring, Assignment};
use rzkp_core::soundness::{scaling_probe, Variant};
use rzkp_core::strategies::{
    brute_force_vertex3col_value, fixed_coloring_pair, honest_pair, mismatched_pair, pair_for_kind,
    transcript_uniformity,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

fn brute_colorable(g: &Graph) -> bool {
    let n = g.vertex_count() as u32;
    (0..3u64.pow(n)).any(|code| {
        let c: Vec<u64> = (0..n).map(|v| (code / 3u64.pow(v)) % 3).collect();
        g.edges().iter().all(|&(i, j)| c[i] != c[j])
    })
}

fn k3_instance() -> PlantedInstance {
    PlantedInstance::new(Graph::complete(3), Coloring(vec![0, 1, 2])).unwrap()
}

fn c1_table_reproduction() -> Check {
    let out = Command::new(env!("CARGO_BIN_EXE_rzkp"))
        .args(["bounds", "--k", "100", "--variant", "appendix", "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("exit {:?}", out.status.code()))?;
    let doc: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let rows = doc["result"]["rows"].as_array().ok_or("no rows")?;
    let expected = [
        (200, 380, 8.54, 40, 78280, 176060),
        (600, 1122, 5.95, 44, 714912, 1608324),
        (900, 1695, 1.54, 46, 1612320, 3627390),
    ];
    ensure(rows.len() == 3, || format!("{} rows", rows.len()))?;
    let mut shown = Vec::new();
    for (row, (n, m, mant, exp, ne, me)) in rows.iter().zip(expected) {
        let got_m = row["rounds"]["mantissa"].as_f64().ok_or("mantissa")?;
        let got_e = row["rounds"]["exponent"].as_i64().ok_or("exponent")?;
        ensure(row["n"] == n && row["m"] == m, || format!("row order {row}"))?;
        ensure(got_e == exp && (got_m / mant - 1.0).abs() < 0.01, || {
            format!("({n},{m}): {got_m}e{got_e} vs {mant}e{exp}")
        })?;
        ensure(row["n_ext"] == ne && row["m_ext"] == me, || {
            format!("({n},{m}): extended {} {}", row["n_ext"], row["m_ext"])
        })?;
        shown.push(row["rounds_text"].as_str().unwrap_or("?").to_string());
    }
    Ok(format!("rounds {}", shown.join(", ")))
}

fn c2_gadget_closed_form() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut small = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=12);
        let p = rng.gen_range(0.1..0.9);
        let g = random_graph(n, p, &mut rng);
        let ext = extend_with_gadgets(&g);
        let closed = extended_counts(n as u64, g.edge_count() as u64).map_err(|e| e.to_string())?;
        let got = (ext.full.vertex_count() as u64, ext.full.edge_count() as u64);
        ensure(got == closed, || format!("n={n} m={}: {got:?} vs {closed:?}", g.edge_count()))?;
        if n <= 5 {
            small += 1;
            let base = brute_colorable(&g);
            let extended = find_three_coloring(&ext.full);
            if let Some(c) = &extended {
                ensure(validate_coloring(&ext.full, c).unwrap().is_empty(), || "bad extended coloring".into())?;
            }
            ensure(base == extended.is_some(), || format!("colorability differs for {:?}", g.edges()))?;
        }
    }
    Ok(format!("200 graphs, {small} with n <= 5"))
}

fn c3_classical_value() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut non_colorable = 0;
    for _ in 0..100 {
        let n = rng.gen_range(4..=10);
        let p = rng.gen_range(0.3..0.95);
        let g = random_graph(n, p, &mut rng);
        if g.edge_count() == 0 {
            continue;
        }
        let v = brute_force_vertex3col_value(&g).map_err(|e| e.to_string())?;
        let m = g.edge_count() as u64;
        if brute_colorable(&g) {
            ensure(v.numer == v.denom, || format!("colorable graph has value {}/{}", v.numer, v.denom))?;
        } else {
            non_colorable += 1;
            ensure(v.numer * m <= (m - 1) * v.denom, || format!("value {}/{} exceeds 1 - 1/{m}", v.numer, v.denom))?;
        }
    }
    ensure(non_colorable >= 20, || format!("only {non_colorable} non-colorable graphs"))?;
    let k4 = brute_force_vertex3col_value(&Graph::complete(4)).map_err(|e| e.to_string())?;
    let r = k4.ratio();
    ensure((*r.numer(), *r.denom()) == (5, 6), || format!("K4 value {r}"))?;
    Ok(format!("{non_colorable} non-colorable graphs bounded, K4 = {r}"))
}

fn c4_completeness() -> Check {
    let inst = gen_planted(20, 40, 4).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for kind in GameKind::all_default() {
        let pair = pair_for_kind(honest_pair(&inst, 44), kind);
        let (s, _) = play_rounds(kind, &inst.graph, &pair, 100_000, 4, false).map_err(|e| e.to_string())?;
        ensure(s.accepts == s.rounds, || format!("{}: {}/{}", kind.name(), s.accepts, s.rounds))?;
        parts.push(format!("{} {}/{}", kind.name(), s.accepts, s.rounds));
    }
    Ok(parts.join(", "))
}

fn c5_challenge_distribution() -> Check {
    let c4_pendant = Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)]).unwrap();
    let mut worst: f64 = 0.0;
    for (gname, g) in [("K3", Graph::complete(3)), ("C4+pendant", c4_pendant)] {
        for kind in GameKind::all_default() {
            let pmf = challenge_pmf(kind, &g).map_err(|e| e.to_string())?;
            let total: f64 = pmf.values().sum();
            ensure((total - 1.0).abs() < 1e-12, || format!("{gname} {}: pmf sums to {total}", kind.name()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let draws = 1_000_000;
            let mut counts = BTreeMap::new();
            for _ in 0..draws {
                *counts.entry(sample_challenge(kind, &g, &mut rng).unwrap()).or_insert(0u64) += 1;
            }
            ensure(counts.keys().all(|c| pmf.contains_key(c)), || "sample outside support".into())?;
            let tv = pmf
                .iter()
                .map(|(c, p)| (counts.get(c).copied().unwrap_or(0) as f64 / draws as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            ensure(tv < 0.005, || format!("{gname} {}: tv {tv}", kind.name()))?;
            worst = worst.max(tv);
        }
    }
    Ok(format!("max TV {worst:.5} over 8 (graph, game) pairs"))
}

fn c6_zero_knowledge() -> Check {
    let inst = k3_instance();
    let rounds = 1_000_000;
    let (_, log) = play_rounds(GameKind::AltRzkp, &inst.graph, &honest_pair(&inst, 6), rounds, 6, true)
        .map_err(|e| e.to_string())?;
    let log = log.unwrap();
    let mut honest_max: f64 = 0.0;
    for &e in inst.graph.edges() {
        let r = transcript_uniformity(&log, e).map_err(|e| e.to_string())?;
        ensure(r.support == 54, || format!("support {} on {e:?}", r.support))?;
        honest_max = honest_max.max(r.tv);
    }
    ensure(honest_max < 0.01, || format!("honest TV {honest_max}"))?;
    let (_, log) = play_rounds(GameKind::AltRzkp, &inst.graph, &fixed_coloring_pair(&inst.witness, 6), rounds, 6, true)
        .map_err(|e| e.to_string())?;
    let log = log.unwrap();
    let mut fixed_min = f64::MAX;
    for &e in inst.graph.edges() {
        fixed_min = fixed_min.min(transcript_uniformity(&log, e).map_err(|e| e.to_string())?.tv);
    }
    ensure(fixed_min > 0.1, || format!("negative control TV {fixed_min}"))?;
    Ok(format!("honest max TV {honest_max:.5}, no-permutation min TV {fixed_min:.3}"))
}

fn c7_certificate_audit() -> Check {
    let audit = audit_all(&AuditConfig {
        samples: 350,
        max_dim: 4,
        seed: 7,
    })
    .map_err(|e| e.to_string())?;
    let quantum: usize = ["k3_chain", "k3_assignment", "extended_path_assignment"]
        .iter()
        .map(|s| audit.sections[*s].strategies)
        .sum();
    ensure(quantum >= 1000, || format!("only {quantum} strategies"))?;
    let mut checked: BTreeMap<&str, u64> = BTreeMap::new();
    for rep in audit.sections.values() {
        for (name, t) in &rep.tallies {
            for want in [
                "gentle_measurement",
                "tracial",
                "tracial_pair_commutator",
                "tracial_pair_transpose",
                "commutation",
                "edge_coloring",
                "pinching_chain",
                "normal_trace",
            ] {
                if name == want {
                    *checked.entry(want).or_default() += t.checked;
                }
            }
        }
    }
    ensure(checked.len() == 8 && checked.values().all(|&c| c > 0), || format!("missing checks: {checked:?}"))?;
    let v = audit.total_violations();
    ensure(v == 0, || {
        let ex: Vec<_> = audit.sections.values().flat_map(|r| r.examples.iter()).take(3).collect();
        format!("{v} violations, e.g. {ex:?}")
    })?;
    let total: u64 = audit.sections.values().flat_map(|r| r.tallies.values()).map(|t| t.checked).sum();
    Ok(format!("{quantum} quantum strategies, {total} inequality instances, 0 violations"))
}

fn c8_sequential_extraction() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let labels: Vec<_> = (0..3).map(rzkp_core::games::Response::VertexA).collect();
    let mut worst: f64 = 0.0;
    for d in [3, 4, 5] {
        let mut projs = BTreeMap::new();
        for v in 0..3 {
            let pvm = random_pvm(d, &labels, &mut rng);
            for alpha in 0..3u8 {
                let p = pvm.get(&labels[alpha as usize]).cloned().unwrap_or_else(|| CMatrix::zeros(d, d));
                projs.insert((v, alpha), p);
            }
        }
        let a = Assignment {
            rho: random_density(d, d, &mut rng),
            projs,
        };
        let order = [2, 0, 1];
        let draws = 100_000;
        let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
        for _ in 0..draws {
            *counts.entry(sequential_coloring(&a, &order, &mut rng).unwrap().0).or_default() += 1;
        }
        let mut tv = 0.0;
        for code in 0..27usize {
            let c: Vec<u8> = (0..3).map(|v| ((code / 3usize.pow(v)) % 3) as u8).collect();
            let mut k = CMatrix::identity(d, d);
            for &v in &order {
                k = a.proj(v, c[v]).unwrap() * k;
            }
            let p = (&k * &a.rho * k.adjoint()).trace().re;
            tv += (counts.get(&c).copied().unwrap_or(0) as f64 / draws as f64 - p).abs() / 2.0;
        }
        ensure(tv < 0.01, || format!("d={d}: TV {tv}"))?;
        worst = worst.max(tv);
    }
    let perms: [[u8; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let u = haar_unitary(6, &mut rng);
    let mut projs = BTreeMap::new();
    for v in 0..3 {
        for alpha in 0..3u8 {
            let idx: Vec<usize> = (0..6).filter(|&k| perms[k][v] == alpha).collect();
            projs.insert((v, alpha), &u * diag_projector(6, idx) * u.adjoint());
        }
    }
    let a = Assignment {
        rho: random_density(6, 3, &mut rng),
        projs,
    };
    let k3 = Graph::complete(3);
    let mut order = vec![0, 1, 2];
    for _ in 0..10_000 {
        order.shuffle(&mut rng);
        let c = sequential_coloring(&a, &order, &mut rng).unwrap();
        ensure(validate_coloring(&k3, &c).unwrap().is_empty(), || format!("improper {c:?}"))?;
    }
    Ok(format!("max TV {worst:.5}; 10000/10000 proper colorings from the commuting assignment"))
}

fn c9_networked_equivalence() -> Check {
    let inst = gen_planted(12, 20, 9).map_err(|e| e.to_string())?;
    let prover = |inst: &PlantedInstance, role| {
        let cfg = ProverConfig {
            role,
            instance: inst.clone(),
            shared_seed: 99,
            delay: Duration::ZERO,
        };
        spawn_prover("127.0.0.1:0", cfg, Some(1)).map(|(a, _)| a.to_string()).map_err(|e| e.to_string())
    };
    let session = |a, b, rounds| SessionConfig {
        rounds,
        deadline: Duration::from_millis(100),
        seed: 19,
        prover_a: a,
        prover_b: b,
        kind: GameKind::AltRzkp,
        handshake_timeout: Duration::from_secs(5),
    };
    let rep = run_verifier_session(&session(prover(&inst, Role::A)?, prover(&inst, Role::B)?, 10_000), &inst.graph)
        .map_err(|e| e.to_string())?;
    ensure(rep.session_accepted && rep.accepted == 10_000, || {
        format!("honest: {} accepted, {} check, {} timeout", rep.accepted, rep.rejected_check, rep.rejected_timeout)
    })?;

    let other = PlantedInstance::new(inst.graph.clone(), inst.witness.permuted(&[1, 0, 2])).unwrap();
    let n = 4000;
    let rep = run_verifier_session(&session(prover(&inst, Role::A)?, prover(&other, Role::B)?, n), &inst.graph)
        .map_err(|e| e.to_string())?;
    let pair = mismatched_pair(&inst.witness, &other.witness, 99);
    let (sim, _) = play_rounds(GameKind::AltRzkp, &inst.graph, &pair, 100_000, 1, false).map_err(|e| e.to_string())?;
    let p_net = 1.0 - rep.accepted as f64 / n as f64;
    let p_sim = 1.0 - sim.win_rate;
    let sigma = (p_sim * (1.0 - p_sim) * (1.0 / n as f64 + 1.0 / 100_000.0)).sqrt();
    ensure(rep.rejected_timeout == 0 && (p_net - p_sim).abs() <= 4.0 * sigma, || {
        format!("mismatched rejection {p_net:.4} vs simulated {p_sim:.4} (sigma {sigma:.4})")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut valid = 0;
    for _ in 0..1_000_000 {
        let len = rng.gen_range(0..48);
        let mut buf: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        if len >= 5 && rng.gen_bool(0.5) {
            buf[..4].copy_from_slice(&(len as u32 - 4).to_be_bytes());
            buf[4] = rng.gen_range(1..8);
        }
        if decode(&buf).is_ok() {
            valid += 1;
        }
    }
    Ok(format!(
        "10000/10000 honest rounds accepted; mismatched rejection {p_net:.4} vs {p_sim:.4}; 10^6 fuzz frames, {valid} decoded"
    ))
}

fn c10_scaling() -> Check {
    let pts: Vec<(u64, u64)> = [200u64, 400, 600, 900].iter().map(|&n| (n, n * 19 / 10)).collect();
    let s = scaling_probe(&pts, 4, Variant::AppendixChain).map_err(|e| e.to_string())?;
    ensure((s - 8.0).abs() <= 0.5, || format!("exponent {s}"))?;
    Ok(format!("fitted exponent {s:.3}"))
}

fn main() {
    let criteria: [(u8, &str, u64, fn() -> Check); 10] = [
        (1, "round-count table reproduction", 1, c1_table_reproduction),
        (2, "gadget construction matches closed form", 30, c2_gadget_closed_form),
        (3, "classical value bound", 120, c3_classical_value),
        (4, "completeness of honest provers", 30, c4_completeness),
        (5, "challenge distribution exactness", 60, c5_challenge_distribution),
        (6, "transcript uniformity", 120, c6_zero_knowledge),
        (7, "certificate audit", 300, c7_certificate_audit),
        (8, "sequential extraction oracle", 60, c8_sequential_extraction),
        (9, "networked equivalence and fuzzing", 120, c9_networked_equivalence),
        (10, "scaling exponent", 1, c10_scaling),
    ];
    let mut failures = 0;
    for (id, name, limit_s, run) in criteria {
        let start = Instant::now();
        let res = panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let el = start.elapsed();
        let res = match res {
            Ok(d) if el > Duration::from_secs(limit_s) => Err(format!("{d}; took longer than {limit_s}s")),
            r => r,
        };
        let (tag, detail) = match res {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failures += 1;
                ("FAIL", e)
            }
        };
        println!("criterion {id:>2} {tag} [{:.2}s] {name}: {detail}", el.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
