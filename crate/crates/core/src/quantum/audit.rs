//! Randomized sweeps that evaluate every inequality certificate on many
//! strategies. Each sample draws from its own RNG substream.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::assignment::{assignment_norms, check_bounds, eps_table, extract_assignment, tracial_slack, BoundCheck, Violation};
use super::linalg::{
    frobenius, operator_norm, polar_isometry, psd_sqrt, psi_matrix, reduced_b, CMatrix, C64,
};
use super::random::{
    haar_unitary, near_honest, random_density, random_hermitian, random_hermitian_unitary, random_normal,
    random_pvm, random_state, random_strategy,
};
use super::reduce::{reduce_edge_to_bcs, reduce_rzkp_to_edge};
use super::strategy::{win_probability, QuantumStrategy};
use super::QuantumError;
use crate::games::{GameKind, Response};
use crate::graph::{find_three_coloring, Coloring, ExtendedGraph, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditConfig {
    pub samples: usize,
    pub max_dim: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct Tally {
    pub checked: u64,
    pub violations: u64,
    /// Largest `lhs / rhs` seen (1 would be tight).
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct AuditReport {
    pub strategies: usize,
    pub tallies: BTreeMap<String, Tally>,
    pub examples: Vec<Violation>,
}

impl AuditReport {
    pub fn total_violations(&self) -> u64 {
        self.tallies.values().map(|t| t.violations).sum()
    }

    fn record(&mut self, name: &str, key: String, lhs: f64, rhs: f64) {
        let t = self.tallies.entry(name.to_string()).or_default();
        t.checked += 1;
        if rhs > 1e-6 {
            t.worst_ratio = t.worst_ratio.max(lhs / rhs);
        }
        if lhs > rhs + super::CERT_TOL {
            t.violations += 1;
            if self.examples.len() < 16 {
                self.examples.push(Violation {
                    inequality: name.to_string(),
                    key,
                    lhs,
                    rhs,
                    margin: rhs - lhs,
                });
            }
        }
    }

    fn absorb(&mut self, check: &BoundCheck) {
        for (name, &(n, ratio)) in &check.per_inequality {
            let t = self.tallies.entry(name.clone()).or_default();
            t.checked += n as u64;
            t.worst_ratio = t.worst_ratio.max(ratio);
        }
        for v in &check.violations {
            self.tallies.entry(v.inequality.clone()).or_default().violations += 1;
            if self.examples.len() < 16 {
                self.examples.push(v.clone());
            }
        }
    }

    pub fn merge(&mut self, other: AuditReport) {
        self.strategies += other.strategies;
        for (k, t) in other.tallies {
            let e = self.tallies.entry(k).or_default();
            e.checked += t.checked;
            e.violations += t.violations;
            e.worst_ratio = e.worst_ratio.max(t.worst_ratio);
        }
        for v in other.examples {
            if self.examples.len() < 16 {
                self.examples.push(v);
            }
        }
    }
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sweep<F>(cfg: &AuditConfig, f: F) -> Result<AuditReport, QuantumError>
where
    F: Fn(&mut ChaCha8Rng, &mut AuditReport) -> Result<(), QuantumError> + Sync,
{
    let parts: Vec<AuditReport> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(cfg.seed, k);
            let mut rep = AuditReport {
                strategies: 1,
                ..Default::default()
            };
            f(&mut rng, &mut rep).map(|_| rep)
        })
        .collect::<Result<_, _>>()?;
    let mut out = AuditReport::default();
    for p in parts {
        out.merge(p);
    }
    Ok(out)
}

fn witness(g: &Graph) -> Result<Coloring, QuantumError> {
    find_three_coloring(g).ok_or_else(|| QuantumError::Numerical("audit graph must be 3-colorable".into()))
}

/// Either a perturbed honest strategy (small to moderate epsilon) or a fully
/// random one.
fn draw_strategy(
    kind: GameKind,
    g: &Graph,
    w: &Coloring,
    max_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<QuantumStrategy, QuantumError> {
    if rng.gen_bool(0.75) {
        let d = rng.gen_range(1..=max_dim);
        let t = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..0.6f64).powi(2) };
        let psi_t = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..0.5) };
        near_honest(kind, g, w, d, t, psi_t, rng)
    } else {
        let da = rng.gen_range(1..=max_dim);
        let db = rng.gen_range(1..=max_dim);
        random_strategy(kind, g, da, db, rng)
    }
}

fn bcs_certificates(
    edge: &QuantumStrategy,
    g: &Graph,
    base: &Graph,
    ext: Option<&ExtendedGraph>,
    rep: &mut AuditReport,
) -> Result<(), QuantumError> {
    let edge_win = win_probability(GameKind::AltEdge, g, edge)?;
    let bcs = reduce_edge_to_bcs(edge, g)?;
    let ev = win_probability(GameKind::bcs_edges(), g, &bcs)?;
    rep.record("edge_to_bcs", String::new(), 1.0 - ev, 1.0 - edge_win);
    let a = extract_assignment(&bcs, g)?;
    let et = eps_table(&bcs, g)?;
    let nr = assignment_norms(&a, base, ext)?;
    rep.absorb(&check_bounds(&nr, &et, base, ext)?);
    Ok(())
}

/// Random Alt-RZKP strategies on `g`: the gentle-measurement bound for the
/// first reduction, then every assignment certificate down the chain.
pub fn audit_gentle_chain(g: &Graph, cfg: &AuditConfig) -> Result<AuditReport, QuantumError> {
    let w = witness(g)?;
    sweep(cfg, |rng, rep| {
        let s = draw_strategy(GameKind::AltRzkp, g, &w, cfg.max_dim, rng)?;
        let eps = 1.0 - win_probability(GameKind::AltRzkp, g, &s)?;
        let edge = reduce_rzkp_to_edge(&s, g)?;
        let out = win_probability(GameKind::AltEdge, g, &edge)?;
        rep.record("gentle_measurement", format!("eps={eps:.3e}"), 1.0 - out, eps + 2.0 * eps.sqrt());
        bcs_certificates(&edge, g, g, None, rep)
    })
}

/// Random Alt-Edge strategies on `g` (or on the extended graph), reduced to
/// BCS and checked against every assignment certificate.
pub fn audit_assignments(
    base: &Graph,
    ext: Option<&ExtendedGraph>,
    cfg: &AuditConfig,
) -> Result<AuditReport, QuantumError> {
    let g = ext.map(|e| &e.full).unwrap_or(base);
    let w = witness(g)?;
    sweep(cfg, |rng, rep| {
        let s = draw_strategy(GameKind::AltEdge, g, &w, cfg.max_dim, rng)?;
        bcs_certificates(&s, g, base, ext, rep)
    })
}

/// `<Y (x) X> >= 1 - eps` implies both tracial inequalities.
pub fn audit_tracial_pairs(cfg: &AuditConfig) -> Result<AuditReport, QuantumError> {
    sweep(cfg, |rng, rep| {
        let d_b = rng.gen_range(1..=cfg.max_dim);
        let correlated = rng.gen_bool(0.6);
        let d_a = if correlated { d_b } else { rng.gen_range(1..=cfg.max_dim) };
        let psi = if correlated && rng.gen_bool(0.5) {
            // Schmidt form with random coefficients, rotated on A.
            let c = random_state(d_b, rng).map(|z| C64::new(z.norm(), 0.0));
            let u = haar_unitary(d_a, rng);
            let mut m = CMatrix::zeros(d_a, d_b);
            for k in 0..d_b {
                m[(k, k)] = c[k];
            }
            let m = u * m;
            super::linalg::CVector::from_fn(d_a * d_b, |k, _| m[(k / d_b, k % d_b)])
        } else {
            random_state(d_a * d_b, rng)
        };
        let m = psi_matrix(&psi, d_a, d_b);
        let x = random_hermitian_unitary(d_b, rng);
        let y = if correlated {
            // Y close to the operator that X induces on A's side.
            let w = polar_isometry(&m.transpose());
            let guess = w.adjoint() * &x * &w;
            let sym = (&guess + guess.adjoint()) * C64::new(0.5, 0.0);
            let (vals, vecs) = super::linalg::hermitian_eigen(&sym.transpose());
            let signs = CMatrix::from_fn(d_a, d_a, |r, c| {
                if r == c {
                    C64::new(if vals[r] >= 0.0 { 1.0 } else { -1.0 }, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let y0 = &vecs * signs * vecs.adjoint();
            let t = rng.gen_range(0.0..0.5f64).powi(2);
            let u = super::linalg::unitary_exp(&random_hermitian(d_a, rng), t);
            &u * y0 * u.adjoint()
        } else {
            random_hermitian_unitary(d_a, rng)
        };
        let val = super::linalg::expectation(&m, &y, &x).re;
        let eps = 1.0 - val;
        let rho = reduced_b(&m);
        let sq = psd_sqrt(&rho)?;
        let w = polar_isometry(&m.transpose());
        let y_tilde = &w * y.transpose() * w.adjoint();
        let bound = tracial_slack(eps);
        let key = format!("eps={eps:.3e}");
        rep.record("tracial_pair_commutator", key.clone(), frobenius(&(&x * &sq - &sq * &x)), bound);
        if eps <= 1.0 {
            rep.record("tracial_pair_transpose", key, frobenius(&(&x * &sq - &sq * y_tilde)), bound);
        }
        Ok(())
    })
}

/// Nested pinching chains of random complete projective measurements.
pub fn audit_pinching(cfg: &AuditConfig) -> Result<AuditReport, QuantumError> {
    sweep(cfg, |rng, rep| {
        let d = rng.gen_range(1..=cfg.max_dim);
        let n = rng.gen_range(2..=5);
        let labels: Vec<Response> = (0..4u8).map(Response::VertexA).collect();
        let pvms: Vec<Vec<CMatrix>> = (0..n)
            .map(|_| {
                let k = rng.gen_range(2..=4);
                let pvm = random_pvm(d, &labels[..k], rng);
                let mut ops: Vec<CMatrix> = pvm.outcomes.into_iter().map(|(_, p)| p).collect();
                while ops.len() < 2 {
                    ops.push(CMatrix::zeros(d, d));
                }
                ops
            })
            .collect();
        let fixed_level = rng.gen_range(0..n - 1);
        let mut x = pvms[n - 1][rng.gen_range(0..pvms[n - 1].len())].clone();
        for level in (0..n - 1).rev() {
            x = if level == fixed_level {
                let p = &pvms[level][rng.gen_range(0..pvms[level].len())];
                p * x * p
            } else {
                pvms[level].iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p * &x * p)
            };
        }
        rep.record("pinching_chain", format!("d={d},n={n}"), operator_norm(&x), 1.0);
        Ok(())
    })
}

/// `|Tr(A rho^1/2)| <= ||A||_F` for normal `A`.
pub fn audit_normal_trace(cfg: &AuditConfig) -> Result<AuditReport, QuantumError> {
    sweep(cfg, |rng, rep| {
        let d = rng.gen_range(1..=cfg.max_dim);
        let a = random_normal(d, rng);
        let env = rng.gen_range(1..=cfg.max_dim);
        let rho = random_density(d, env, rng);
        let lhs = (&a * psd_sqrt(&rho)?).trace().norm();
        rep.record("normal_trace", format!("d={d}"), lhs, frobenius(&a));
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullAudit {
    pub config: AuditConfig,
    pub sections: BTreeMap<String, AuditReport>,
}

impl FullAudit {
    pub fn strategies(&self) -> usize {
        self.sections.values().map(|r| r.strategies).sum()
    }

    pub fn total_violations(&self) -> u64 {
        self.sections.values().map(|r| r.total_violations()).sum()
    }
}

/// All sweeps: the reduction chain on K3, assignment certificates on K3 and
/// on the gadget-extended path graph, and the three operator inequalities.
pub fn audit_all(cfg: &AuditConfig) -> Result<FullAudit, QuantumError> {
    let k3 = Graph::complete(3);
    let ext = crate::graph::extend_with_gadgets(&Graph::path(3));
    let gentle_dim = cfg.max_dim.min(3);
    let mut sections = BTreeMap::new();
    sections.insert(
        "k3_chain".to_string(),
        audit_gentle_chain(&k3, &AuditConfig { max_dim: gentle_dim, ..*cfg })?,
    );
    sections.insert(
        "k3_assignment".to_string(),
        audit_assignments(&k3, None, &AuditConfig { seed: cfg.seed ^ 1, ..*cfg })?,
    );
    sections.insert(
        "extended_path_assignment".to_string(),
        audit_assignments(&ext.base, Some(&ext), &AuditConfig { seed: cfg.seed ^ 2, ..*cfg })?,
    );
    let op_cfg = AuditConfig {
        max_dim: cfg.max_dim.max(8),
        seed: cfg.seed ^ 3,
        ..*cfg
    };
    sections.insert("tracial_pairs".to_string(), audit_tracial_pairs(&op_cfg)?);
    sections.insert("pinching".to_string(), audit_pinching(&op_cfg)?);
    sections.insert("normal_trace".to_string(), audit_normal_trace(&op_cfg)?);
    Ok(FullAudit {
        config: *cfg,
        sections,
    })
}
