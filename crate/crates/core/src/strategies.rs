//! Classical prover strategies and the exact classical-value oracle.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{
    Challenge, Constraint, QueryA, QueryB, Response, StrategyPair, Transcript,
};
use crate::graph::{Color, Coloring, Graph, Labelling, PlantedInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("brute force limited to 16 vertices, got {0}")]
    TooLarge(usize),
    #[error("graph has no edges")]
    NoEdges,
    #[error("no transcript rounds for edge {0:?}")]
    NoSamples((usize, usize)),
    #[error("coloring has {got} entries, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
}

/// Deterministic source of the provers' pre-agreed per-round randomness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundLabeller {
    base: Coloring,
    seed: u64,
    permute: bool,
}

impl RoundLabeller {
    /// Fresh color permutation and fresh splits every round.
    pub fn honest(witness: Coloring, seed: u64) -> Self {
        RoundLabeller {
            base: witness,
            seed,
            permute: true,
        }
    }

    /// Fixed colors; only the additive splits are refreshed.
    pub fn fixed(coloring: Coloring, seed: u64) -> Self {
        RoundLabeller {
            base: coloring,
            seed,
            permute: false,
        }
    }

    fn rng(&self, round: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.seed.to_le_bytes());
        seed[8..16].copy_from_slice(b"provers!");
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(round);
        rng
    }

    pub fn coloring(&self, round: u64) -> Coloring {
        self.labelling(round).1
    }

    pub fn labelling(&self, round: u64) -> (Labelling, Coloring) {
        let mut rng = self.rng(round);
        let mut pi: [Color; 3] = [0, 1, 2];
        if self.permute {
            pi.shuffle(&mut rng);
        }
        let c = self.base.permuted(&pi);
        let shares = c
            .as_slice()
            .iter()
            .map(|&ci| {
                let w0: Color = rng.gen_range(0..3);
                (w0, (ci + 3 - w0) % 3)
            })
            .collect();
        (Labelling(shares), c)
    }

    pub fn answer_a(&self, round: u64, q: &QueryA) -> Option<Response> {
        let (w, c) = self.labelling(round);
        let n = c.len();
        Some(match *q {
            QueryA::Edge(i, j) => {
                if i >= n || j >= n {
                    return None;
                }
                Response::AltRzkpA([w.0[i].0, w.0[i].1, w.0[j].0, w.0[j].1])
            }
            QueryA::Constraint(Constraint::Vertex(i)) => {
                let ci = *c.0.get(i)?;
                Response::BcsA((0..3).map(|a| u8::from(ci == a)).collect())
            }
            QueryA::Constraint(Constraint::Edge { i, j, color }) => Response::BcsA(vec![
                u8::from(*c.0.get(i)? == color),
                u8::from(*c.0.get(j)? == color),
            ]),
            QueryA::Vertex(i) => Response::VertexA(*c.0.get(i)?),
        })
    }

    pub fn answer_b(&self, round: u64, q: &QueryB) -> Option<Response> {
        let (w, c) = self.labelling(round);
        let n = c.len();
        Some(match *q {
            QueryB::EdgeBit { edge: (i, j), bit } => {
                if i >= n || j >= n || bit > 1 {
                    return None;
                }
                Response::AltRzkpB([w.share(i, bit), w.share(j, bit)])
            }
            QueryB::Vertex(i) => Response::VertexB(*c.0.get(i)?),
            QueryB::VertexColor { vertex, color } => {
                Response::BcsB(u8::from(*c.0.get(vertex)? == color))
            }
        })
    }
}

/// Two classical provers, each driven by its own labeller. Honest provers
/// share one labeller; a mismatched pair gives them different colorings.
#[derive(Debug, Clone)]
pub struct ClassicalPair {
    pub a: RoundLabeller,
    pub b: RoundLabeller,
    /// AltEdge A-answers are two colors rather than four shares.
    pub alt_edge: bool,
}

impl ClassicalPair {
    pub fn for_alt_edge(mut self) -> Self {
        self.alt_edge = true;
        self
    }
}

pub fn honest_pair(inst: &PlantedInstance, seed: u64) -> ClassicalPair {
    let l = RoundLabeller::honest(inst.witness.clone(), seed);
    ClassicalPair {
        a: l.clone(),
        b: l,
        alt_edge: false,
    }
}

pub fn fixed_coloring_pair(c: &Coloring, seed: u64) -> ClassicalPair {
    let l = RoundLabeller::fixed(c.clone(), seed);
    ClassicalPair {
        a: l.clone(),
        b: l,
        alt_edge: false,
    }
}

/// Provers that pre-agreed on a seed but hold different colorings.
pub fn mismatched_pair(ca: &Coloring, cb: &Coloring, seed: u64) -> ClassicalPair {
    ClassicalPair {
        a: RoundLabeller::honest(ca.clone(), seed),
        b: RoundLabeller::honest(cb.clone(), seed),
        alt_edge: false,
    }
}

impl StrategyPair for ClassicalPair {
    fn answer_a(&self, round: u64, query: &QueryA) -> Option<Response> {
        match (self.alt_edge, query) {
            (true, &QueryA::Edge(i, j)) => {
                let c = self.a.coloring(round);
                Some(Response::AltEdgeA([*c.0.get(i)?, *c.0.get(j)?]))
            }
            _ => self.a.answer_a(round, query),
        }
    }

    fn answer_b(&self, round: u64, query: &QueryB) -> Option<Response> {
        match (self.alt_edge, query) {
            (true, &QueryB::Vertex(i)) => Some(Response::AltEdgeB(*self.b.coloring(round).0.get(i)?)),
            _ => self.b.answer_b(round, query),
        }
    }
}

/// Strategy pair adapter that answers every kind correctly: AltEdge uses
/// color answers, the rest use the underlying pair.
pub fn pair_for_kind(pair: ClassicalPair, kind: crate::games::GameKind) -> ClassicalPair {
    if matches!(kind, crate::games::GameKind::AltEdge) {
        pair.for_alt_edge()
    } else {
        ClassicalPair {
            alt_edge: false,
            ..pair
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalValue {
    pub numer: u64,
    pub denom: u64,
    pub argmax: Coloring,
}

impl ClassicalValue {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.numer, self.denom)
    }
}

/// Best edge-verification win rate over all 3-colorings, as an exact
/// fraction, together with the lexicographically smallest optimal coloring.
pub fn brute_force_vertex3col_value(g: &Graph) -> Result<ClassicalValue, StrategyError> {
    let n = g.vertex_count();
    if n > 16 {
        return Err(StrategyError::TooLarge(n));
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(StrategyError::NoEdges);
    }
    // Vertex 0 is pinned to color 0.
    let free = n - 1;
    let total = 3u64.pow(free as u32);
    let decode = |mut k: u64, buf: &mut [Color]| {
        buf[0] = 0;
        for v in (1..n).rev() {
            buf[v] = (k % 3) as Color;
            k /= 3;
        }
    };
    let edges = g.edges();
    let (best, idx) = (0..total)
        .into_par_iter()
        .fold(
            || (usize::MAX, u64::MAX, vec![0 as Color; n]),
            |(best, idx, mut buf), k| {
                decode(k, &mut buf);
                let bad = edges.iter().filter(|&&(i, j)| buf[i] == buf[j]).count();
                if bad < best || (bad == best && k < idx) {
                    (bad, k, buf)
                } else {
                    (best, idx, buf)
                }
            },
        )
        .map(|(b, i, _)| (b, i))
        .reduce(|| (usize::MAX, u64::MAX), |x, y| x.min(y));
    let mut argmax = vec![0; n];
    decode(idx, &mut argmax);
    let r = Ratio::new((m - best) as u64, m as u64);
    Ok(ClassicalValue {
        numer: *r.numer(),
        denom: *r.denom(),
        argmax: Coloring(argmax),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub edge: (usize, usize),
    pub samples: u64,
    pub counts: BTreeMap<String, u64>,
    pub support: usize,
    pub tv: f64,
}

/// The 54 share quadruples `(w_i0, w_i1, w_j0, w_j1)` whose sums differ.
pub fn admissible_quadruples() -> Vec<[Color; 4]> {
    let mut out = Vec::with_capacity(54);
    for q in 0..81u8 {
        let w = [q / 27, (q / 9) % 3, (q / 3) % 3, q % 3];
        if (w[0] + w[1]) % 3 != (w[2] + w[3]) % 3 {
            out.push(w);
        }
    }
    out
}

fn tv_from_uniform<K: Ord>(counts: &BTreeMap<K, u64>, support: &[K]) -> f64 {
    let total: u64 = counts.values().sum();
    let u = 1.0 / support.len() as f64;
    let mut tv = 0.0;
    for k in support {
        let p = *counts.get(k).unwrap_or(&0) as f64 / total as f64;
        tv += (p - u).abs();
    }
    for (k, &c) in counts {
        if support.binary_search(k).is_err() {
            tv += c as f64 / total as f64;
        }
    }
    tv / 2.0
}

fn fmt_key(k: &[Color]) -> String {
    k.iter().map(|c| char::from(b'0' + c)).collect()
}

/// Empirical distance of prover A's answers on `edge` from the uniform
/// distribution over the admissible quadruples.
pub fn transcript_uniformity(
    log: &[Transcript],
    edge: (usize, usize),
) -> Result<UniformityReport, StrategyError> {
    let mut counts: BTreeMap<[Color; 4], u64> = BTreeMap::new();
    for t in log {
        if let (Challenge::AltRzkp { edge_a, .. }, (Some(Response::AltRzkpA(w)), _)) =
            (&t.challenge, &t.responses)
        {
            if *edge_a == edge {
                *counts.entry(*w).or_insert(0) += 1;
            }
        }
    }
    finish(edge, counts, &admissible_quadruples())
}

/// Same statistic for prover B's pair on `edge`, against uniform on F_3².
pub fn response_b_uniformity(
    log: &[Transcript],
    edge: (usize, usize),
) -> Result<UniformityReport, StrategyError> {
    let mut counts: BTreeMap<[Color; 2], u64> = BTreeMap::new();
    for t in log {
        if let (Challenge::AltRzkp { edge_b, .. }, (_, Some(Response::AltRzkpB(w)))) =
            (&t.challenge, &t.responses)
        {
            if *edge_b == edge {
                *counts.entry(*w).or_insert(0) += 1;
            }
        }
    }
    let support: Vec<[Color; 2]> = (0..9u8).map(|k| [k / 3, k % 3]).collect();
    finish(edge, counts, &support)
}

fn finish<const N: usize>(
    edge: (usize, usize),
    counts: BTreeMap<[Color; N], u64>,
    support: &[[Color; N]],
) -> Result<UniformityReport, StrategyError> {
    let samples: u64 = counts.values().sum();
    if samples == 0 {
        return Err(StrategyError::NoSamples(edge));
    }
    let tv = tv_from_uniform(&counts, support);
    Ok(UniformityReport {
        edge,
        samples,
        support: counts.len(),
        counts: counts.iter().map(|(k, &v)| (fmt_key(k), v)).collect(),
        tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{play_rounds, verdict, GameKind};
    use crate::graph::{gen_planted, is_three_colorable};

    #[test]
    fn admissible_count() {
        assert_eq!(admissible_quadruples().len(), 54);
    }

    #[test]
    fn honest_pair_is_complete_for_every_kind() {
        let inst = gen_planted(12, 25, 4).unwrap();
        for kind in [
            GameKind::AltRzkp,
            GameKind::AltEdge,
            GameKind::Bcs { lambda: 0.4 },
            GameKind::Vertex { lambda: 0.6 },
        ] {
            let pair = pair_for_kind(honest_pair(&inst, 9), kind);
            let (s, _) = play_rounds(kind, &inst.graph, &pair, 5000, 2, false).unwrap();
            assert_eq!(s.accepts, 5000, "{kind:?}");
        }
    }

    #[test]
    fn fixed_coloring_on_k4() {
        let g = Graph::complete(4);
        let c = Coloring(vec![0, 1, 2, 0]);
        let pair = fixed_coloring_pair(&c, 1);
        let kind = GameKind::Vertex { lambda: 0.0 };
        let pmf = crate::games::challenge_pmf(kind, &g).unwrap();
        let exact: f64 = pmf
            .iter()
            .map(|(ch, p)| {
                let (qa, qb) = ch.split();
                let v = verdict(
                    kind,
                    ch,
                    &pair.answer_a(0, &qa).unwrap(),
                    &pair.answer_b(0, &qb).unwrap(),
                );
                if v.is_accept() {
                    *p
                } else {
                    0.0
                }
            })
            .sum();
        assert!((exact - 5.0 / 6.0).abs() < 1e-12);
        let (s, _) = play_rounds(GameKind::Vertex { lambda: 1.0 }, &g, &pair, 500, 0, false).unwrap();
        assert_eq!(s.accepts, 500);
    }

    #[test]
    fn brute_force_examples() {
        let v = brute_force_vertex3col_value(&Graph::complete(4)).unwrap();
        assert_eq!(v.ratio(), Ratio::new(5, 6));
        assert_eq!(v.argmax.get(0), 0);
        assert_eq!(brute_force_vertex3col_value(&Graph::complete(3)).unwrap().ratio(), Ratio::from_integer(1));
        assert_eq!(brute_force_vertex3col_value(&Graph::cycle(5)).unwrap().ratio(), Ratio::from_integer(1));
        assert_eq!(
            brute_force_vertex3col_value(&Graph::complete(17)).unwrap_err(),
            StrategyError::TooLarge(17)
        );
    }

    #[test]
    fn brute_force_matches_colorability_and_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(3..=8);
            let mut raw = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.6) {
                        raw.push((i, j));
                    }
                }
            }
            let g = Graph::new(n, &raw).unwrap();
            if g.edge_count() == 0 {
                continue;
            }
            let v = brute_force_vertex3col_value(&g).unwrap().ratio();
            let colorable = is_three_colorable(&g);
            assert_eq!(v == Ratio::from_integer(1), colorable);
            if !colorable {
                assert!(v <= Ratio::new(g.edge_count() as u64 - 1, g.edge_count() as u64));
            }
        }
    }

    #[test]
    fn a_ignores_b_half() {
        let inst = gen_planted(6, 9, 1).unwrap();
        let pair = honest_pair(&inst, 3);
        let qa = QueryA::Edge(inst.graph.edges()[0].0, inst.graph.edges()[0].1);
        let r = pair.answer_a(7, &qa);
        for round in [7u64, 7, 7] {
            let _ = pair.answer_b(round, &QueryB::EdgeBit { edge: inst.graph.edges()[1], bit: 1 });
            assert_eq!(pair.answer_a(7, &qa), r);
        }
    }

    #[test]
    fn uniformity_positive_and_negative() {
        let inst = PlantedInstance::new(Graph::complete(3), Coloring(vec![0, 1, 2])).unwrap();
        let honest = honest_pair(&inst, 11);
        let (_, log) = play_rounds(GameKind::AltRzkp, &inst.graph, &honest, 60_000, 1, true).unwrap();
        let log = log.unwrap();
        let rep = transcript_uniformity(&log, (0, 1)).unwrap();
        assert_eq!(rep.support, 54);
        assert!(rep.tv < 0.05, "{}", rep.tv);
        assert!(response_b_uniformity(&log, (0, 1)).unwrap().tv < 0.05);
        let fixed = fixed_coloring_pair(&inst.witness, 11);
        let (_, log) = play_rounds(GameKind::AltRzkp, &inst.graph, &fixed, 20_000, 1, true).unwrap();
        let rep = transcript_uniformity(&log.unwrap(), (0, 1)).unwrap();
        assert!(rep.support <= 9);
        assert!(rep.tv > 0.1);
        assert_eq!(
            transcript_uniformity(&[], (0, 1)).unwrap_err(),
            StrategyError::NoSamples((0, 1))
        );
    }
}
