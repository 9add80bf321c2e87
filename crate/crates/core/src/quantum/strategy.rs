//! Quantum strategies: validation, exact winning probability, Born-rule play.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde_json::{json, Value};

use super::linalg::{
    identity, is_projector, max_abs, psi_matrix, reduced_b, zeros, CMatrix, CVector,
    C64,
};
use super::{QuantumError, TOL};
use crate::games::{
    challenge_pmf, round_rng, sample_challenge, verdict, Challenge, GameKind, QueryA, QueryB,
    Response, StrategyPair, WinStats,
};
use crate::graph::Graph;

/// Projective measurement with labelled outcomes. Outcomes not listed have
/// the zero projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm {
    pub outcomes: Vec<(Response, CMatrix)>,
}

impl Pvm {
    pub fn new(outcomes: Vec<(Response, CMatrix)>) -> Self {
        Pvm { outcomes }
    }

    pub fn get(&self, r: &Response) -> Option<&CMatrix> {
        self.outcomes.iter().find(|(o, _)| o == r).map(|(_, p)| p)
    }

    fn check(&self, d: usize, label: &str) -> Result<(), QuantumError> {
        let mut total = zeros(d);
        for (_, p) in &self.outcomes {
            if p.nrows() != d || p.ncols() != d {
                return Err(QuantumError::DimensionMismatch(label.to_string()));
            }
            if !is_projector(p, TOL) {
                return Err(QuantumError::NotProjector(label.to_string()));
            }
            total += p;
        }
        if max_abs(&(total - identity(d))) > TOL {
            return Err(QuantumError::Incomplete(label.to_string()));
        }
        Ok(())
    }

    /// Conjugates every projector by `u`.
    pub fn conjugated(&self, u: &CMatrix) -> Pvm {
        Pvm {
            outcomes: self
                .outcomes
                .iter()
                .map(|(r, p)| (r.clone(), u * p * u.adjoint()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumStrategy {
    pub d_a: usize,
    pub d_b: usize,
    pub psi: CVector,
    pub pvm_a: BTreeMap<QueryA, Pvm>,
    pub pvm_b: BTreeMap<QueryB, Pvm>,
}

impl QuantumStrategy {
    pub fn new(
        d_a: usize,
        d_b: usize,
        psi: CVector,
        pvm_a: BTreeMap<QueryA, Pvm>,
        pvm_b: BTreeMap<QueryB, Pvm>,
    ) -> Result<Self, QuantumError> {
        let s = QuantumStrategy {
            d_a,
            d_b,
            psi,
            pvm_a,
            pvm_b,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        if self.d_a == 0 || self.d_b == 0 || self.psi.len() != self.d_a * self.d_b {
            return Err(QuantumError::DimensionMismatch(format!(
                "state of length {} for dims {}x{}",
                self.psi.len(),
                self.d_a,
                self.d_b
            )));
        }
        let norm = self.psi.norm();
        if (norm - 1.0).abs() > TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        for (q, pvm) in &self.pvm_a {
            pvm.check(self.d_a, &format!("A {q:?}"))?;
        }
        for (q, pvm) in &self.pvm_b {
            pvm.check(self.d_b, &format!("B {q:?}"))?;
        }
        Ok(())
    }

    pub fn psi_matrix(&self) -> CMatrix {
        psi_matrix(&self.psi, self.d_a, self.d_b)
    }

    /// Prover B's reduced state.
    pub fn rho_b(&self) -> CMatrix {
        reduced_b(&self.psi_matrix())
    }

    pub fn pvm_a(&self, q: &QueryA) -> Result<&Pvm, QuantumError> {
        self.pvm_a
            .get(q)
            .ok_or_else(|| QuantumError::MissingPvm(format!("A {q:?}")))
    }

    pub fn pvm_b(&self, q: &QueryB) -> Result<&Pvm, QuantumError> {
        self.pvm_b
            .get(q)
            .ok_or_else(|| QuantumError::MissingPvm(format!("B {q:?}")))
    }

    /// Applies the local change of basis `U_A (x) U_B` to the state and to
    /// every measurement.
    pub fn change_basis(&self, ua: &CMatrix, ub: &CMatrix) -> QuantumStrategy {
        let m = self.psi_matrix();
        let m2 = ua * m * ub.transpose();
        let psi = CVector::from_fn(self.d_a * self.d_b, |k, _| m2[(k / self.d_b, k % self.d_b)]);
        QuantumStrategy {
            d_a: self.d_a,
            d_b: self.d_b,
            psi,
            pvm_a: self.pvm_a.iter().map(|(q, p)| (*q, p.conjugated(ua))).collect(),
            pvm_b: self.pvm_b.iter().map(|(q, p)| (*q, p.conjugated(ub))).collect(),
        }
    }

    /// Joint outcome distribution for one challenge:
    /// `<psi| A^x_a (x) B^y_b |psi>` for every listed outcome pair.
    pub fn joint(&self, ch: &Challenge) -> Result<Vec<(Response, Response, f64)>, QuantumError> {
        let (qa, qb) = ch.split();
        let pa = self.pvm_a(&qa)?;
        let pb = self.pvm_b(&qb)?;
        let m = self.psi_matrix();
        let mut out = Vec::with_capacity(pa.outcomes.len() * pb.outcomes.len());
        for (ra, p) in &pa.outcomes {
            let z = m.adjoint() * p * &m;
            for (rb, q) in &pb.outcomes {
                let v: C64 = z.component_mul(q).sum();
                out.push((ra.clone(), rb.clone(), v.re));
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let mat = |m: &CMatrix| -> Value {
            (0..m.nrows())
                .map(|r| {
                    (0..m.ncols())
                        .map(|c| json!([m[(r, c)].re, m[(r, c)].im]))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
                .into()
        };
        let fam = |pvm: &Pvm| -> Value {
            pvm.outcomes
                .iter()
                .map(|(r, p)| json!({"outcome": r, "projector": mat(p)}))
                .collect::<Vec<_>>()
                .into()
        };
        json!({
            "d_a": self.d_a,
            "d_b": self.d_b,
            "psi": self.psi.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>(),
            "pvm_a": self.pvm_a.iter().map(|(q, p)| json!({"query": q, "pvm": fam(p)})).collect::<Vec<_>>(),
            "pvm_b": self.pvm_b.iter().map(|(q, p)| json!({"query": q, "pvm": fam(p)})).collect::<Vec<_>>(),
        })
    }
}

/// Queries that occur with positive probability in the game.
pub fn support_queries(
    kind: GameKind,
    g: &Graph,
) -> Result<(BTreeSet<QueryA>, BTreeSet<QueryB>), QuantumError> {
    let pmf = challenge_pmf(kind, g)?;
    let mut qa = BTreeSet::new();
    let mut qb = BTreeSet::new();
    for ch in pmf.keys() {
        let (a, b) = ch.split();
        qa.insert(a);
        qb.insert(b);
    }
    Ok((qa, qb))
}

/// Exact winning probability `sum_xy p_xy sum_ab V <psi|A^x_a (x) B^y_b|psi>`.
pub fn win_probability(kind: GameKind, g: &Graph, s: &QuantumStrategy) -> Result<f64, QuantumError> {
    let pmf = challenge_pmf(kind, g)?;
    let m = s.psi_matrix();
    let mut total = 0.0;
    for (ch, p) in &pmf {
        let (qa, qb) = ch.split();
        let pa = s.pvm_a(&qa)?;
        let pb = s.pvm_b(&qb)?;
        let mut win = 0.0;
        for (ra, pa_op) in &pa.outcomes {
            let accepted: Vec<&CMatrix> = pb
                .outcomes
                .iter()
                .filter(|(rb, _)| verdict(kind, ch, ra, rb).is_accept())
                .map(|(_, q)| q)
                .collect();
            if accepted.is_empty() {
                continue;
            }
            let z = m.adjoint() * pa_op * &m;
            for q in accepted {
                win += z.component_mul(q).sum().re;
            }
        }
        total += p * win;
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&total) {
        return Err(QuantumError::Numerical(format!("win probability {total}")));
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Plays `rounds` rounds, sampling both provers' outcomes by the Born rule.
pub fn monte_carlo_win(
    kind: GameKind,
    g: &Graph,
    s: &QuantumStrategy,
    rounds: u64,
    seed: u64,
) -> Result<WinStats, QuantumError> {
    let mut cache: BTreeMap<Challenge, Vec<(f64, bool)>> = BTreeMap::new();
    let mut accepts = 0;
    for r in 0..rounds {
        let mut rng = round_rng(seed, r);
        let ch = sample_challenge(kind, g, &mut rng)?;
        if !cache.contains_key(&ch) {
            let joint = s
                .joint(&ch)?
                .into_iter()
                .map(|(ra, rb, p)| (p.max(0.0), verdict(kind, &ch, &ra, &rb).is_accept()))
                .collect();
            cache.insert(ch, joint);
        }
        let joint = &cache[&ch];
        let total: f64 = joint.iter().map(|x| x.0).sum();
        let mut u = rng.gen::<f64>() * total;
        let mut won = false;
        for &(p, ok) in joint {
            if u < p {
                won = ok;
                break;
            }
            u -= p;
        }
        accepts += u64::from(won);
    }
    Ok(WinStats::from_counts(rounds, accepts))
}

/// Embeds a mixture of classical rounds as a diagonal strategy:
/// `psi = sum_r sqrt(w_r) |r>|r>`, with round `r`'s answers as the outcome
/// of the basis vector `r`.
pub fn embed_classical<S: StrategyPair + ?Sized>(
    kind: GameKind,
    g: &Graph,
    pair: &S,
    rounds: &[u64],
    weights: &[f64],
) -> Result<QuantumStrategy, QuantumError> {
    let d = rounds.len();
    if d == 0 || weights.len() != d {
        return Err(QuantumError::DimensionMismatch("weights vs rounds".into()));
    }
    let total: f64 = weights.iter().sum();
    let mut psi = CVector::zeros(d * d);
    for (r, w) in weights.iter().enumerate() {
        psi[r * d + r] = C64::new((w / total).sqrt(), 0.0);
    }
    let (qas, qbs) = support_queries(kind, g)?;
    let group = |answers: Vec<Option<Response>>, label: String| -> Result<Pvm, QuantumError> {
        let mut by: BTreeMap<Response, Vec<usize>> = BTreeMap::new();
        for (r, a) in answers.into_iter().enumerate() {
            let a = a.ok_or_else(|| QuantumError::MissingPvm(label.clone()))?;
            by.entry(a).or_default().push(r);
        }
        Ok(Pvm::new(
            by.into_iter()
                .map(|(resp, idx)| (resp, super::linalg::diag_projector(d, idx)))
                .collect(),
        ))
    };
    let mut pvm_a = BTreeMap::new();
    for q in qas {
        let ans = rounds.iter().map(|&r| pair.answer_a(r, &q)).collect();
        pvm_a.insert(q, group(ans, format!("A {q:?}"))?);
    }
    let mut pvm_b = BTreeMap::new();
    for q in qbs {
        let ans = rounds.iter().map(|&r| pair.answer_b(r, &q)).collect();
        pvm_b.insert(q, group(ans, format!("B {q:?}"))?);
    }
    QuantumStrategy::new(d, d, psi, pvm_a, pvm_b)
}

/// Product-state embedding of one deterministic round.
pub fn embed_deterministic<S: StrategyPair + ?Sized>(
    kind: GameKind,
    g: &Graph,
    pair: &S,
    round: u64,
) -> Result<QuantumStrategy, QuantumError> {
    embed_classical(kind, g, pair, &[round], &[1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Coloring, PlantedInstance};
    use crate::strategies::{fixed_coloring_pair, honest_pair, pair_for_kind};

    #[test]
    fn deterministic_embeddings() {
        let k3 = Graph::complete(3);
        let pair = fixed_coloring_pair(&Coloring(vec![0, 1, 2]), 0);
        let s = embed_deterministic(GameKind::vertex(), &k3, &pair, 0).unwrap();
        assert_eq!((s.d_a, s.d_b), (1, 1));
        assert!((win_probability(GameKind::vertex(), &k3, &s).unwrap() - 1.0).abs() < 1e-12);

        let k4 = Graph::complete(4);
        let pair = fixed_coloring_pair(&Coloring(vec![0, 1, 2, 0]), 0);
        let kind = GameKind::Vertex { lambda: 0.0 };
        let s = embed_deterministic(kind, &k4, &pair, 0).unwrap();
        assert!((win_probability(kind, &k4, &s).unwrap() - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn honest_mixture_wins_every_game() {
        let inst = PlantedInstance::new(Graph::path(4), Coloring(vec![0, 1, 0, 2])).unwrap();
        for kind in GameKind::all_default() {
            let pair = pair_for_kind(honest_pair(&inst, 5), kind);
            let s = embed_classical(kind, &inst.graph, &pair, &[0, 1, 2], &[0.2, 0.3, 0.5]).unwrap();
            let w = win_probability(kind, &inst.graph, &s).unwrap();
            assert!((w - 1.0).abs() < 1e-12, "{kind:?} {w}");
        }
    }

    #[test]
    fn validation_errors() {
        let k3 = Graph::complete(3);
        let pair = fixed_coloring_pair(&Coloring(vec![0, 1, 2]), 0);
        let s = embed_deterministic(GameKind::vertex(), &k3, &pair, 0).unwrap();
        let mut bad = s.clone();
        bad.psi[0] = C64::new(2.0, 0.0);
        assert!(matches!(bad.validate(), Err(QuantumError::NotNormalized(_))));
        let mut bad = s.clone();
        let q = *bad.pvm_a.keys().next().unwrap();
        bad.pvm_a.get_mut(&q).unwrap().outcomes[0].1[(0, 0)] = C64::new(0.5, 0.0);
        assert!(matches!(bad.validate(), Err(QuantumError::NotProjector(_))));
        let mut bad = s;
        bad.pvm_b.clear();
        assert!(matches!(
            win_probability(GameKind::vertex(), &k3, &bad),
            Err(QuantumError::MissingPvm(_))
        ));
    }
}
