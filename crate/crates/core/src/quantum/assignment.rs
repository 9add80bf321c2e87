//! Almost-satisfying assignments extracted from BCS strategies, their norm
//! defects, and the inequality certificates that bound them.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use super::linalg::{commutator, frobenius, identity, max_abs, psd_sqrt, CMatrix, C64};
use super::strategy::{win_probability, QuantumStrategy};
use super::{QuantumError, CERT_TOL, TOL};
use crate::games::{verdict, Challenge, Constraint, GameKind, QueryB, Response};
use crate::graph::{Color, ExtendedGraph, Graph};

/// Prover B's reduced state and projectors `B^i_alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub rho: CMatrix,
    pub projs: BTreeMap<(usize, Color), CMatrix>,
}

impl Assignment {
    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn proj(&self, v: usize, alpha: Color) -> Result<&CMatrix, QuantumError> {
        self.projs
            .get(&(v, alpha))
            .ok_or(QuantumError::MissingProjector(v, alpha))
    }

    pub fn vertices(&self) -> usize {
        self.projs.keys().map(|k| k.0 + 1).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rho": mat_json(&self.rho),
            "projectors": self.projs.iter().map(|((v, a), p)| json!({
                "vertex": v, "color": a, "projector": mat_json(p)
            })).collect::<Vec<_>>(),
        })
    }
}

fn mat_json(m: &CMatrix) -> Value {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| json!([m[(r, c)].re, m[(r, c)].im]))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into()
}

/// `B^i_alpha = B~^{i alpha}_1` and `rho = Tr_A |psi><psi|`.
pub fn extract_assignment(s: &QuantumStrategy, g: &Graph) -> Result<Assignment, QuantumError> {
    let d = s.d_b;
    let mut projs = BTreeMap::new();
    for v in 0..g.vertex_count() {
        let mut total = CMatrix::zeros(d, d);
        for alpha in 0..3u8 {
            let pvm = s.pvm_b(&QueryB::VertexColor {
                vertex: v,
                color: alpha,
            })?;
            let p = pvm
                .get(&Response::BcsB(1))
                .cloned()
                .unwrap_or_else(|| CMatrix::zeros(d, d));
            total += &p;
            projs.insert((v, alpha), p);
        }
        if max_abs(&(total - identity(d))) > TOL {
            return Err(QuantumError::NotVertexComplete(v));
        }
        for a in 0..3u8 {
            for b in a + 1..3 {
                if max_abs(&commutator(&projs[&(v, a)], &projs[&(v, b)])) > TOL {
                    return Err(QuantumError::NotVertexComplete(v));
                }
            }
        }
    }
    let rho = s.rho_b();
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > TOL {
        return Err(QuantumError::Numerical(format!("trace of rho is {tr}")));
    }
    Ok(Assignment { rho, projs })
}

/// `(i, j, alpha, k)` with `(i, j)` an edge and `k` in `{i, j}`.
pub type EpsKey = (usize, usize, Color, usize);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsTable {
    pub entries: BTreeMap<String, f64>,
    #[serde(skip)]
    pub eps: BTreeMap<EpsKey, f64>,
    /// `<psi| Y^{ij alpha k} (x) X^{k alpha} |psi>` per challenge.
    #[serde(skip)]
    pub observables: BTreeMap<EpsKey, f64>,
    /// `1 - p_win^EV` from the game-level evaluation.
    pub aggregate: f64,
    pub edge_count: usize,
}

impl EpsTable {
    pub fn get(&self, k: &EpsKey) -> Result<f64, QuantumError> {
        self.eps
            .get(k)
            .copied()
            .ok_or_else(|| QuantumError::InputMismatch(format!("no epsilon for {k:?}")))
    }

    pub fn mean(&self) -> f64 {
        self.eps.values().sum::<f64>() / (6 * self.edge_count) as f64
    }
}

fn key_str(parts: &[usize]) -> String {
    parts
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Per-challenge edge-verification failure probabilities of a BCS strategy.
pub fn eps_table(s: &QuantumStrategy, g: &Graph) -> Result<EpsTable, QuantumError> {
    let kind = GameKind::bcs_edges();
    let mut eps = BTreeMap::new();
    let mut observables = BTreeMap::new();
    for &(i, j) in g.edges() {
        for alpha in 0..3u8 {
            for k in [i, j] {
                let ch = Challenge::Bcs {
                    constraint: Constraint::Edge { i, j, color: alpha },
                    vertex: k,
                    color: alpha,
                };
                let mut win = 0.0;
                let mut obs = 0.0;
                for (ra, rb, p) in s.joint(&ch)? {
                    if verdict(kind, &ch, &ra, &rb).is_accept() {
                        win += p;
                    }
                    if let (Response::BcsA(bits), Response::BcsB(bt)) = (&ra, &rb) {
                        let ak = if k == i { bits[0] } else { bits[1] };
                        obs += if ak == *bt { p } else { -p };
                    }
                }
                let e = 1.0 - win;
                if !(-1e-9..=1.0 + 1e-9).contains(&e) {
                    return Err(QuantumError::Numerical(format!("epsilon {e} for {:?}", (i, j, alpha, k))));
                }
                eps.insert((i, j, alpha, k), e.clamp(0.0, 1.0));
                observables.insert((i, j, alpha, k), obs);
            }
        }
    }
    let aggregate = 1.0 - win_probability(kind, g, s)?;
    Ok(EpsTable {
        entries: eps
            .iter()
            .map(|(&(i, j, a, k), &e)| (key_str(&[i, j, a as usize, k]), e))
            .collect(),
        eps,
        observables,
        aggregate,
        edge_count: g.edge_count(),
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormReport {
    /// `||[B^v_alpha, rho^1/2]||_F`.
    pub tracial: BTreeMap<(usize, Color), f64>,
    /// `||[B^i_alpha, B^j_beta] rho^1/2||_F` over edges.
    pub commutator: BTreeMap<(usize, usize, Color, Color), f64>,
    /// `||B^i_alpha B^j_alpha rho^1/2||_F` over edges.
    pub edge_coloring: BTreeMap<(usize, usize, Color), f64>,
    /// Commutator norms over non-adjacent base pairs.
    pub gadget: BTreeMap<(usize, usize, Color, Color), f64>,
}

impl NormReport {
    pub fn scaled(&self, f: f64) -> NormReport {
        fn sc<K: Ord + Copy>(m: &BTreeMap<K, f64>, f: f64) -> BTreeMap<K, f64> {
            m.iter().map(|(k, v)| (*k, v * f)).collect()
        }
        NormReport {
            tracial: sc(&self.tracial, f),
            commutator: sc(&self.commutator, f),
            edge_coloring: sc(&self.edge_coloring, f),
            gadget: sc(&self.gadget, f),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tracial": self.tracial.iter().map(|(&(v, a), x)| json!({"key": [v, a], "norm": x})).collect::<Vec<_>>(),
            "commutator": self.commutator.iter().map(|(&(i, j, a, b), x)| json!({"key": [i, j, a, b], "norm": x})).collect::<Vec<_>>(),
            "edge_coloring": self.edge_coloring.iter().map(|(&(i, j, a), x)| json!({"key": [i, j, a], "norm": x})).collect::<Vec<_>>(),
            "gadget": self.gadget.iter().map(|(&(i, j, a, b), x)| json!({"key": [i, j, a, b], "norm": x})).collect::<Vec<_>>(),
        })
    }
}

fn edge_graph<'a>(base: &'a Graph, ext: Option<&'a ExtendedGraph>) -> &'a Graph {
    ext.map(|e| &e.full).unwrap_or(base)
}

/// Tracial, commutation, edge-coloring and (with `ext`) gadget norms.
pub fn assignment_norms(
    a: &Assignment,
    base: &Graph,
    ext: Option<&ExtendedGraph>,
) -> Result<NormReport, QuantumError> {
    let g = edge_graph(base, ext);
    let sq = psd_sqrt(&a.rho)?;
    let mut nr = NormReport::default();
    for v in 0..g.vertex_count() {
        for alpha in 0..3u8 {
            nr.tracial
                .insert((v, alpha), frobenius(&commutator(a.proj(v, alpha)?, &sq)));
        }
    }
    let pair_norms = |i: usize, j: usize, out: &mut BTreeMap<_, f64>| -> Result<(), QuantumError> {
        for alpha in 0..3u8 {
            for beta in 0..3u8 {
                let c = commutator(a.proj(i, alpha)?, a.proj(j, beta)?) * &sq;
                out.insert((i, j, alpha, beta), frobenius(&c));
            }
        }
        Ok(())
    };
    for &(i, j) in g.edges() {
        pair_norms(i, j, &mut nr.commutator)?;
        for alpha in 0..3u8 {
            let m = a.proj(i, alpha)? * a.proj(j, alpha)? * &sq;
            nr.edge_coloring.insert((i, j, alpha), frobenius(&m));
        }
    }
    if ext.is_some() {
        for (i, j) in base.non_adjacent_pairs() {
            pair_norms(i, j, &mut nr.gadget)?;
        }
    }
    Ok(nr)
}

/// `sqrt(2 eps (2 - eps))`.
pub fn tracial_slack(eps: f64) -> f64 {
    (2.0 * eps * (2.0 - eps)).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub inequality: String,
    pub key: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct BoundCheck {
    pub checked: usize,
    /// Per inequality: instances checked and the largest `lhs / rhs` seen
    /// among instances with `rhs > 1e-6`.
    pub per_inequality: BTreeMap<String, (usize, f64)>,
    pub violations: Vec<Violation>,
}

impl BoundCheck {
    fn record(&mut self, name: &str, key: String, lhs: f64, rhs: f64) {
        self.checked += 1;
        let entry = self.per_inequality.entry(name.to_string()).or_insert((0, 0.0));
        entry.0 += 1;
        if rhs > 1e-6 {
            entry.1 = entry.1.max(lhs / rhs);
        }
        if lhs > rhs + CERT_TOL {
            self.violations.push(Violation {
                inequality: name.to_string(),
                key,
                lhs,
                rhs,
                margin: rhs - lhs,
            });
        }
    }

    pub fn merge(&mut self, other: &BoundCheck) {
        self.checked += other.checked;
        for (k, (n, r)) in &other.per_inequality {
            let e = self.per_inequality.entry(k.clone()).or_insert((0, 0.0));
            e.0 += n;
            e.1 = e.1.max(*r);
        }
        self.violations.extend(other.violations.iter().cloned());
    }
}

fn get<K: Ord + std::fmt::Debug, V: Copy>(m: &BTreeMap<K, V>, k: &K) -> Result<V, QuantumError> {
    m.get(k)
        .copied()
        .ok_or_else(|| QuantumError::InputMismatch(format!("missing norm {k:?}")))
}

/// Evaluates every certificate instance and collects the violations.
pub fn check_bounds(
    nr: &NormReport,
    et: &EpsTable,
    base: &Graph,
    ext: Option<&ExtendedGraph>,
) -> Result<BoundCheck, QuantumError> {
    let g = edge_graph(base, ext);
    if et.edge_count != g.edge_count() {
        return Err(QuantumError::InputMismatch(format!(
            "table has {} edges, graph has {}",
            et.edge_count,
            g.edge_count()
        )));
    }
    let mut out = BoundCheck::default();
    let s = |k: &EpsKey| et.get(k).map(tracial_slack);

    let mean = et.mean();
    out.record(
        "aggregate",
        "mean".into(),
        (mean - et.aggregate).abs(),
        1e-9,
    );
    for &(i, j) in g.edges() {
        for alpha in 0..3u8 {
            let ei = et.get(&(i, j, alpha, i))?;
            let ej = et.get(&(i, j, alpha, j))?;
            let (si, sj) = (tracial_slack(ei), tracial_slack(ej));
            for (k, ek, sk) in [(i, ei, si), (j, ej, sj)] {
                let key = (i, j, alpha, k);
                let obs = get(&et.observables, &key)?;
                out.record("observable", key_str(&[i, j, alpha as usize, k]), 1.0 - 2.0 * ek - obs, 0.0);
                let tr = get(&nr.tracial, &(k, alpha))?;
                out.record("tracial", key_str(&[i, j, alpha as usize, k]), tr, si + sj);
                out.record("tracial_single", key_str(&[i, j, alpha as usize, k]), tr, sk);
            }
            for beta in 0..3u8 {
                let c = get(&nr.commutator, &(i, j, alpha, beta))?;
                let sb = s(&(i, j, beta, j))?;
                out.record(
                    "commutation",
                    key_str(&[i, j, alpha as usize, beta as usize]),
                    c,
                    si + sb,
                );
            }
            let ec = get(&nr.edge_coloring, &(i, j, alpha))?;
            out.record(
                "edge_coloring",
                key_str(&[i, j, alpha as usize]),
                ec,
                si + sj + (0.5 * (ei + ej)).sqrt(),
            );
        }
    }
    if let Some(ext) = ext {
        for (i, j) in base.non_adjacent_pairs() {
            let gadget = ext
                .gadget_for(i, j)
                .ok_or_else(|| QuantumError::InputMismatch(format!("no gadget for {:?}", (i, j))))?;
            let mut bound = 0.0;
            for &(u, v) in &gadget.edges {
                for gamma in 0..3u8 {
                    let eu = et.get(&(u, v, gamma, u))?;
                    let ev = et.get(&(u, v, gamma, v))?;
                    bound += 4.0 * (0.5 * (eu + ev)).sqrt()
                        + 19.0 * (tracial_slack(eu) + tracial_slack(ev));
                }
            }
            for alpha in 0..3u8 {
                for beta in 0..3u8 {
                    let c = get(&nr.gadget, &(i, j, alpha, beta))?;
                    out.record(
                        "gadget_commutation",
                        key_str(&[i, j, alpha as usize, beta as usize]),
                        c,
                        bound,
                    );
                }
            }
        }
    }
    Ok(out)
}
