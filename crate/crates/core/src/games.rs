//! The four 3-coloring non-local games: challenge samplers, exact challenge
//! distributions, verdict functions and a round-play harness.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Color, Graph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("game graph has no edges")]
    EmptyGraph,
    #[error("mixture weight {0} is outside [0, 1]")]
    BadMixture(f64),
    #[error("challenge does not belong to game {0:?}")]
    WrongGame(GameKind),
}

/// Game variant. `Bcs` and `Vertex` carry the weight of their edge-constraint
/// and well-definition branch respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameKind {
    AltRzkp,
    AltEdge,
    /// `lambda` = probability of an edge constraint `(i, j, alpha)`.
    Bcs { lambda: f64 },
    /// `lambda` = probability of a well-definition challenge `(i, i)`.
    Vertex { lambda: f64 },
}

impl GameKind {
    pub const DEFAULT_LAMBDA: f64 = 0.5;

    pub fn bcs() -> Self {
        GameKind::Bcs {
            lambda: Self::DEFAULT_LAMBDA,
        }
    }

    pub fn vertex() -> Self {
        GameKind::Vertex {
            lambda: Self::DEFAULT_LAMBDA,
        }
    }

    /// Edge-verification-only BCS game.
    pub fn bcs_edges() -> Self {
        GameKind::Bcs { lambda: 1.0 }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        match *self {
            GameKind::Bcs { lambda } | GameKind::Vertex { lambda }
                if !(0.0..=1.0).contains(&lambda) =>
            {
                Err(GameError::BadMixture(lambda))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GameKind::AltRzkp => "alt-rzkp",
            GameKind::AltEdge => "alt-edge",
            GameKind::Bcs { .. } => "bcs",
            GameKind::Vertex { .. } => "vertex",
        }
    }

    pub fn all_default() -> [GameKind; 4] {
        [
            GameKind::AltRzkp,
            GameKind::AltEdge,
            GameKind::bcs(),
            GameKind::vertex(),
        ]
    }
}

/// BCS constraint sent to prover A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `i_0 + i_1 + i_2 = 1`.
    Vertex(usize),
    /// `i_alpha * j_alpha = 0` for edge `(i, j)`.
    Edge { i: usize, j: usize, color: Color },
}

/// Prover A's half of a challenge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryA {
    Edge(usize, usize),
    Constraint(Constraint),
    Vertex(usize),
}

/// Prover B's half of a challenge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryB {
    EdgeBit { edge: (usize, usize), bit: u8 },
    Vertex(usize),
    VertexColor { vertex: usize, color: Color },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "snake_case")]
pub enum Challenge {
    AltRzkp {
        edge_a: (usize, usize),
        edge_b: (usize, usize),
        bit: u8,
    },
    AltEdge {
        edge: (usize, usize),
        vertex: usize,
    },
    Bcs {
        constraint: Constraint,
        vertex: usize,
        color: Color,
    },
    Vertex {
        a: usize,
        b: usize,
    },
}

impl Challenge {
    /// Splits into the two prover halves. Neither half carries information
    /// about the other beyond what the game itself reveals.
    pub fn split(&self) -> (QueryA, QueryB) {
        match *self {
            Challenge::AltRzkp {
                edge_a,
                edge_b,
                bit,
            } => (
                QueryA::Edge(edge_a.0, edge_a.1),
                QueryB::EdgeBit { edge: edge_b, bit },
            ),
            Challenge::AltEdge { edge, vertex } => {
                (QueryA::Edge(edge.0, edge.1), QueryB::Vertex(vertex))
            }
            Challenge::Bcs {
                constraint,
                vertex,
                color,
            } => (
                QueryA::Constraint(constraint),
                QueryB::VertexColor { vertex, color },
            ),
            Challenge::Vertex { a, b } => (QueryA::Vertex(a), QueryB::Vertex(b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    /// `(w_i^0, w_i^1, w_j^0, w_j^1)`.
    AltRzkpA([Color; 4]),
    /// `(w~_{i'}^b, w~_{j'}^b)`.
    AltRzkpB([Color; 2]),
    /// `(c_i, c_j)`.
    AltEdgeA([Color; 2]),
    AltEdgeB(Color),
    /// Indicator bits of the constraint variables, in constraint order.
    BcsA(Vec<u8>),
    BcsB(u8),
    VertexA(Color),
    VertexB(Color),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    EdgeVerification,
    WellDefinition,
    ConstraintSatisfaction,
    Malformed,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn reason(&self) -> Option<RejectReason> {
        match self {
            Verdict::Accept => None,
            Verdict::Reject(r) => Some(*r),
        }
    }
}

fn pick<T: Copy, R: Rng + ?Sized>(rng: &mut R, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())]
}

fn canonical(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Draws one challenge from the game's distribution.
pub fn sample_challenge<R: Rng + ?Sized>(
    kind: GameKind,
    g: &Graph,
    rng: &mut R,
) -> Result<Challenge, GameError> {
    kind.validate()?;
    if g.edge_count() == 0 {
        return Err(GameError::EmptyGraph);
    }
    let edges = g.edges();
    Ok(match kind {
        GameKind::AltRzkp => {
            let (i, j) = pick(rng, edges);
            let bit = rng.gen_range(0..2u8);
            let shared = if rng.gen_bool(0.5) { i } else { j };
            let other = pick(rng, g.neighbors(shared));
            Challenge::AltRzkp {
                edge_a: (i, j),
                edge_b: canonical(shared, other),
                bit,
            }
        }
        GameKind::AltEdge => {
            let (i, j) = pick(rng, edges);
            let vertex = if rng.gen_bool(0.5) { i } else { j };
            Challenge::AltEdge {
                edge: (i, j),
                vertex,
            }
        }
        GameKind::Bcs { lambda } => {
            if rng.gen::<f64>() < lambda {
                let (i, j) = pick(rng, edges);
                let color = rng.gen_range(0..3u8);
                let vertex = if rng.gen_bool(0.5) { i } else { j };
                Challenge::Bcs {
                    constraint: Constraint::Edge { i, j, color },
                    vertex,
                    color,
                }
            } else {
                let i = rng.gen_range(0..g.vertex_count());
                Challenge::Bcs {
                    constraint: Constraint::Vertex(i),
                    vertex: i,
                    color: rng.gen_range(0..3u8),
                }
            }
        }
        GameKind::Vertex { lambda } => {
            if rng.gen::<f64>() < lambda {
                let i = rng.gen_range(0..g.vertex_count());
                Challenge::Vertex { a: i, b: i }
            } else {
                let (i, j) = pick(rng, edges);
                Challenge::Vertex { a: i, b: j }
            }
        }
    })
}

/// Exact challenge distribution (zero-probability challenges omitted).
pub fn challenge_pmf(kind: GameKind, g: &Graph) -> Result<BTreeMap<Challenge, f64>, GameError> {
    kind.validate()?;
    if g.edge_count() == 0 {
        return Err(GameError::EmptyGraph);
    }
    let m = g.edge_count() as f64;
    let n = g.vertex_count() as f64;
    let mut pmf = BTreeMap::new();
    let mut add = |ch: Challenge, p: f64| {
        if p > 0.0 {
            *pmf.entry(ch).or_insert(0.0) += p;
        }
    };
    match kind {
        GameKind::AltRzkp => {
            for &(i, j) in g.edges() {
                let di = g.degree(i) as f64;
                let dj = g.degree(j) as f64;
                for &(ip, jp) in g.edges() {
                    let delta = |a: usize, b: usize| f64::from(u8::from(a == b));
                    let p = ((delta(i, ip) + delta(i, jp)) / (2.0 * di)
                        + (delta(j, jp) + delta(j, ip)) / (2.0 * dj))
                        / (2.0 * m);
                    for bit in 0..2 {
                        add(
                            Challenge::AltRzkp {
                                edge_a: (i, j),
                                edge_b: (ip, jp),
                                bit,
                            },
                            p,
                        );
                    }
                }
            }
        }
        GameKind::AltEdge => {
            for &(i, j) in g.edges() {
                for vertex in [i, j] {
                    add(
                        Challenge::AltEdge {
                            edge: (i, j),
                            vertex,
                        },
                        1.0 / (2.0 * m),
                    );
                }
            }
        }
        GameKind::Bcs { lambda } => {
            for &(i, j) in g.edges() {
                for color in 0..3 {
                    for vertex in [i, j] {
                        add(
                            Challenge::Bcs {
                                constraint: Constraint::Edge { i, j, color },
                                vertex,
                                color,
                            },
                            lambda / (6.0 * m),
                        );
                    }
                }
            }
            for i in 0..g.vertex_count() {
                for color in 0..3 {
                    add(
                        Challenge::Bcs {
                            constraint: Constraint::Vertex(i),
                            vertex: i,
                            color,
                        },
                        (1.0 - lambda) / (3.0 * n),
                    );
                }
            }
        }
        GameKind::Vertex { lambda } => {
            for i in 0..g.vertex_count() {
                add(Challenge::Vertex { a: i, b: i }, lambda / n);
            }
            for &(i, j) in g.edges() {
                add(Challenge::Vertex { a: i, b: j }, (1.0 - lambda) / m);
            }
        }
    }
    Ok(pmf)
}

fn bit_ok(b: u8) -> bool {
    b < 2
}

fn color_ok(c: Color) -> bool {
    c < 3
}

const MALFORMED: Verdict = Verdict::Reject(RejectReason::Malformed);

/// Pure verifier decision for one round.
pub fn verdict(kind: GameKind, ch: &Challenge, ra: &Response, rb: &Response) -> Verdict {
    match (kind, ch, ra, rb) {
        (
            GameKind::AltRzkp,
            &Challenge::AltRzkp {
                edge_a: (i, j),
                edge_b: (ip, jp),
                bit,
            },
            Response::AltRzkpA(w),
            Response::AltRzkpB(wt),
        ) => {
            if !w.iter().chain(wt.iter()).all(|&c| color_ok(c)) || !bit_ok(bit) {
                return MALFORMED;
            }
            if (w[0] + w[1]) % 3 == (w[2] + w[3]) % 3 {
                return Verdict::Reject(RejectReason::EdgeVerification);
            }
            let b = bit as usize;
            // A's share for vertex v (v is i or j) and B's share for v (v is i' or j').
            let a_share = |v: usize| if v == i { w[b] } else { w[2 + b] };
            let b_share = |v: usize| if v == ip { wt[0] } else { wt[1] };
            let shared = [i, j].into_iter().filter(|&v| v == ip || v == jp);
            let mut any = false;
            for v in shared {
                any = true;
                if a_share(v) != b_share(v) {
                    return Verdict::Reject(RejectReason::WellDefinition);
                }
            }
            if any {
                Verdict::Accept
            } else {
                MALFORMED
            }
        }
        (
            GameKind::AltEdge,
            &Challenge::AltEdge {
                edge: (i, j),
                vertex,
            },
            Response::AltEdgeA(c),
            &Response::AltEdgeB(ct),
        ) => {
            if !color_ok(c[0]) || !color_ok(c[1]) || !color_ok(ct) || (vertex != i && vertex != j)
            {
                return MALFORMED;
            }
            if c[0] == c[1] {
                return Verdict::Reject(RejectReason::EdgeVerification);
            }
            let expected = if vertex == i { c[0] } else { c[1] };
            if expected != ct {
                return Verdict::Reject(RejectReason::WellDefinition);
            }
            Verdict::Accept
        }
        (
            GameKind::Bcs { .. },
            &Challenge::Bcs {
                constraint,
                vertex,
                color,
            },
            Response::BcsA(bits),
            &Response::BcsB(bt),
        ) => {
            if !bits.iter().all(|&b| bit_ok(b)) || !bit_ok(bt) || !color_ok(color) {
                return MALFORMED;
            }
            let shared = match constraint {
                Constraint::Vertex(i) => {
                    if bits.len() != 3 || vertex != i {
                        return MALFORMED;
                    }
                    if bits.iter().map(|&b| u32::from(b)).sum::<u32>() != 1 {
                        return Verdict::Reject(RejectReason::ConstraintSatisfaction);
                    }
                    bits[color as usize]
                }
                Constraint::Edge { i, j, color: alpha } => {
                    if bits.len() != 2 || alpha != color || (vertex != i && vertex != j) {
                        return MALFORMED;
                    }
                    if bits[0] * bits[1] != 0 {
                        return Verdict::Reject(RejectReason::ConstraintSatisfaction);
                    }
                    if vertex == i {
                        bits[0]
                    } else {
                        bits[1]
                    }
                }
            };
            if shared != bt {
                return Verdict::Reject(RejectReason::WellDefinition);
            }
            Verdict::Accept
        }
        (
            GameKind::Vertex { .. },
            &Challenge::Vertex { a, b },
            &Response::VertexA(ca),
            &Response::VertexB(cb),
        ) => {
            if !color_ok(ca) || !color_ok(cb) {
                return MALFORMED;
            }
            if a == b {
                if ca != cb {
                    return Verdict::Reject(RejectReason::WellDefinition);
                }
            } else if ca == cb {
                return Verdict::Reject(RejectReason::EdgeVerification);
            }
            Verdict::Accept
        }
        _ => MALFORMED,
    }
}

/// Two non-communicating provers. Each half sees only its own query and the
/// round's shared randomness, which implementations derive from `round`.
pub trait StrategyPair: Sync {
    fn answer_a(&self, round: u64, query: &QueryA) -> Option<Response>;
    fn answer_b(&self, round: u64, query: &QueryB) -> Option<Response>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub round: u64,
    pub challenge: Challenge,
    pub responses: (Option<Response>, Option<Response>),
    pub verdict: Verdict,
    pub reason: Option<RejectReason>,
}

impl Transcript {
    pub fn new(
        round: u64,
        challenge: Challenge,
        ra: Option<Response>,
        rb: Option<Response>,
        verdict: Verdict,
    ) -> Self {
        Transcript {
            round,
            challenge,
            responses: (ra, rb),
            verdict,
            reason: verdict.reason(),
        }
    }

    /// Recomputes the verdict from the stored challenge and responses.
    pub fn is_consistent(&self, kind: GameKind) -> bool {
        let recomputed = match &self.responses {
            (Some(ra), Some(rb)) => verdict(kind, &self.challenge, ra, rb),
            _ => MALFORMED,
        };
        (self.verdict == recomputed || self.reason == Some(RejectReason::Timeout))
            && self.reason == self.verdict.reason()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinStats {
    pub rounds: u64,
    pub accepts: u64,
    pub win_rate: f64,
    pub wilson_95: (f64, f64),
    /// Set when `rounds == 0`; `win_rate` is then 1 by convention.
    pub degenerate: bool,
}

impl WinStats {
    pub fn from_counts(rounds: u64, accepts: u64) -> Self {
        if rounds == 0 {
            return WinStats {
                rounds,
                accepts,
                win_rate: 1.0,
                wilson_95: (0.0, 1.0),
                degenerate: true,
            };
        }
        let n = rounds as f64;
        let p = accepts as f64 / n;
        let z = 1.959_963_984_540_054_f64;
        let denom = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        WinStats {
            rounds,
            accepts,
            win_rate: p,
            wilson_95: ((centre - half).max(0.0), (centre + half).min(1.0)),
            degenerate: false,
        }
    }
}

/// Verifier randomness for round `round` of a session seeded with `seed`.
pub fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

/// Plays one round: sample, query both halves, decide.
pub fn play_round<S: StrategyPair + ?Sized>(
    kind: GameKind,
    g: &Graph,
    strategy: &S,
    seed: u64,
    round: u64,
) -> Result<Transcript, GameError> {
    let mut rng = round_rng(seed, round);
    let challenge = sample_challenge(kind, g, &mut rng)?;
    let (qa, qb) = challenge.split();
    let ra = strategy.answer_a(round, &qa);
    let rb = strategy.answer_b(round, &qb);
    let v = match (&ra, &rb) {
        (Some(a), Some(b)) => verdict(kind, &challenge, a, b),
        _ => MALFORMED,
    };
    Ok(Transcript::new(round, challenge, ra, rb, v))
}

/// Plays `rounds` independent rounds. Each round draws its challenge from an
/// independent substream of `seed`, so the result does not depend on the
/// thread schedule.
pub fn play_rounds<S: StrategyPair + ?Sized>(
    kind: GameKind,
    g: &Graph,
    strategy: &S,
    rounds: u64,
    seed: u64,
    keep_log: bool,
) -> Result<(WinStats, Option<Vec<Transcript>>), GameError> {
    kind.validate()?;
    if g.edge_count() == 0 {
        return Err(GameError::EmptyGraph);
    }
    if keep_log {
        let log: Vec<Transcript> = (0..rounds)
            .into_par_iter()
            .map(|r| play_round(kind, g, strategy, seed, r))
            .collect::<Result<_, _>>()?;
        let accepts = log.iter().filter(|t| t.verdict.is_accept()).count() as u64;
        Ok((WinStats::from_counts(rounds, accepts), Some(log)))
    } else {
        let accepts = (0..rounds)
            .into_par_iter()
            .map(|r| play_round(kind, g, strategy, seed, r).map(|t| u64::from(t.verdict.is_accept())))
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        Ok((WinStats::from_counts(rounds, accepts), None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::complete(3)
    }

    #[test]
    fn pmf_examples() {
        let pmf = challenge_pmf(GameKind::AltRzkp, &k3()).unwrap();
        let p = pmf[&Challenge::AltRzkp {
            edge_a: (0, 1),
            edge_b: (0, 2),
            bit: 0,
        }];
        assert!((p - 1.0 / 24.0).abs() < 1e-15);
        let pmf = challenge_pmf(GameKind::Vertex { lambda: 0.5 }, &k3()).unwrap();
        assert!((pmf[&Challenge::Vertex { a: 0, b: 0 }] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn pmf_sums_to_one() {
        let graphs = [k3(), Graph::path(4), Graph::cycle(5), Graph::complete(5)];
        for g in &graphs {
            for kind in [
                GameKind::AltRzkp,
                GameKind::AltEdge,
                GameKind::Bcs { lambda: 0.3 },
                GameKind::Bcs { lambda: 1.0 },
                GameKind::Vertex { lambda: 0.0 },
                GameKind::Vertex { lambda: 0.7 },
            ] {
                let total: f64 = challenge_pmf(kind, g).unwrap().values().sum();
                assert!((total - 1.0).abs() < 1e-12, "{kind:?} {total}");
            }
        }
    }

    #[test]
    fn single_edge_alt_edge_support() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let pmf = challenge_pmf(GameKind::AltEdge, &g).unwrap();
        assert_eq!(pmf.len(), 2);
        assert!(pmf.values().all(|&p| p == 0.5));
        let mut rng = round_rng(1, 0);
        for _ in 0..100 {
            let ch = sample_challenge(GameKind::AltEdge, &g, &mut rng).unwrap();
            assert!(pmf.contains_key(&ch));
        }
    }

    #[test]
    fn sampler_invariants() {
        let mut rng = round_rng(3, 0);
        let g = Graph::cycle(5);
        for _ in 0..2000 {
            let Challenge::AltRzkp { edge_a, edge_b, .. } =
                sample_challenge(GameKind::AltRzkp, &g, &mut rng).unwrap()
            else {
                unreachable!()
            };
            assert!(g.has_edge(edge_b.0, edge_b.1) && edge_b.0 < edge_b.1);
            assert!([edge_a.0, edge_a.1].iter().any(|v| *v == edge_b.0 || *v == edge_b.1));
            let Challenge::Bcs {
                constraint: Constraint::Edge { i, j, color: alpha },
                vertex,
                color,
            } = sample_challenge(GameKind::Bcs { lambda: 1.0 }, &k3(), &mut rng).unwrap()
            else {
                panic!("lambda = 1 must give edge constraints")
            };
            assert!(vertex == i || vertex == j);
            assert_eq!(alpha, color);
        }
    }

    #[test]
    fn empty_graph_rejected() {
        let g = Graph::new(3, &[]).unwrap();
        assert_eq!(
            challenge_pmf(GameKind::AltEdge, &g).unwrap_err(),
            GameError::EmptyGraph
        );
        let mut rng = round_rng(0, 0);
        assert!(sample_challenge(GameKind::AltRzkp, &g, &mut rng).is_err());
        assert!(challenge_pmf(GameKind::Bcs { lambda: 1.5 }, &k3()).is_err());
    }

    #[test]
    fn verdict_examples() {
        let ch = Challenge::AltRzkp {
            edge_a: (0, 1),
            edge_b: (0, 1),
            bit: 0,
        };
        assert_eq!(
            verdict(
                GameKind::AltRzkp,
                &ch,
                &Response::AltRzkpA([0, 1, 1, 1]),
                &Response::AltRzkpB([0, 1])
            ),
            Verdict::Accept
        );
        assert_eq!(
            verdict(
                GameKind::AltRzkp,
                &ch,
                &Response::AltRzkpA([0, 1, 2, 2]),
                &Response::AltRzkpB([0, 2])
            ),
            Verdict::Reject(RejectReason::EdgeVerification)
        );
        // Both shared vertices are checked when the edges coincide.
        assert_eq!(
            verdict(
                GameKind::AltRzkp,
                &ch,
                &Response::AltRzkpA([0, 1, 1, 1]),
                &Response::AltRzkpB([0, 2])
            ),
            Verdict::Reject(RejectReason::WellDefinition)
        );
        let bcs = Challenge::Bcs {
            constraint: Constraint::Vertex(0),
            vertex: 0,
            color: 1,
        };
        assert_eq!(
            verdict(
                GameKind::bcs(),
                &bcs,
                &Response::BcsA(vec![1, 1, 0]),
                &Response::BcsB(1)
            ),
            Verdict::Reject(RejectReason::ConstraintSatisfaction)
        );
    }

    #[test]
    fn alt_rzkp_partial_overlap_checks_only_shared_vertex() {
        // A gets (0,1), B gets (1,2) with bit 1: only vertex 1 is compared.
        let ch = Challenge::AltRzkp {
            edge_a: (0, 1),
            edge_b: (1, 2),
            bit: 1,
        };
        let ra = Response::AltRzkpA([0, 0, 2, 2]); // c0 = 0, c1 = 1, w_1^1 = 2
        assert!(verdict(GameKind::AltRzkp, &ch, &ra, &Response::AltRzkpB([2, 0])).is_accept());
        assert_eq!(
            verdict(GameKind::AltRzkp, &ch, &ra, &Response::AltRzkpB([1, 0])),
            Verdict::Reject(RejectReason::WellDefinition)
        );
    }

    #[test]
    fn malformed_responses() {
        let ch = Challenge::Vertex { a: 0, b: 1 };
        let kind = GameKind::vertex();
        assert_eq!(
            verdict(kind, &ch, &Response::VertexA(3), &Response::VertexB(0)),
            MALFORMED
        );
        assert_eq!(
            verdict(kind, &ch, &Response::AltEdgeB(0), &Response::VertexB(0)),
            MALFORMED
        );
        assert_eq!(
            verdict(GameKind::AltEdge, &ch, &Response::VertexA(0), &Response::VertexB(1)),
            MALFORMED
        );
        let ch = Challenge::Bcs {
            constraint: Constraint::Edge { i: 0, j: 1, color: 2 },
            vertex: 1,
            color: 2,
        };
        assert_eq!(
            verdict(GameKind::bcs(), &ch, &Response::BcsA(vec![0, 1, 0]), &Response::BcsB(1)),
            MALFORMED
        );
        assert!(verdict(GameKind::bcs(), &ch, &Response::BcsA(vec![0, 1]), &Response::BcsB(1)).is_accept());
    }

    #[test]
    fn wilson_interval() {
        let s = WinStats::from_counts(100, 50);
        assert!((s.win_rate - 0.5).abs() < 1e-15);
        assert!(s.wilson_95.0 < 0.5 && s.wilson_95.1 > 0.5);
        assert!((s.wilson_95.0 - 0.4038).abs() < 1e-3);
        let z = WinStats::from_counts(0, 0);
        assert!(z.degenerate && z.win_rate == 1.0);
    }

    struct Silent;
    impl StrategyPair for Silent {
        fn answer_a(&self, _: u64, _: &QueryA) -> Option<Response> {
            None
        }
        fn answer_b(&self, _: u64, _: &QueryB) -> Option<Response> {
            Some(Response::VertexB(0))
        }
    }

    #[test]
    fn missing_response_is_malformed() {
        let (stats, log) = play_rounds(GameKind::vertex(), &k3(), &Silent, 10, 0, true).unwrap();
        assert_eq!(stats.accepts, 0);
        let log = log.unwrap();
        assert!(log.iter().all(|t| t.reason == Some(RejectReason::Malformed)));
        assert!(log.iter().all(|t| t.is_consistent(GameKind::vertex())));
        let (zero, _) = play_rounds(GameKind::vertex(), &k3(), &Silent, 0, 0, false).unwrap();
        assert!(zero.degenerate);
    }
}
