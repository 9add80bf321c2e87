//! Random unitaries, states, measurements and strategies for audits.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{diag_projector, hermitian_eigen, unitary_exp, CMatrix, CVector, C64};
use super::strategy::{embed_classical, support_queries, Pvm, QuantumStrategy};
use super::QuantumError;
use crate::games::{Constraint, GameKind, QueryA, QueryB, Response};
use crate::graph::{Coloring, Graph, PlantedInstance};
use crate::strategies::{honest_pair, pair_for_kind};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary via QR with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(d, d, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..d {
            q[(row, k)] *= phase;
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(d, d, rng);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| gaussian(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Reduced state of a random pure state on `d x env`.
pub fn random_density<R: Rng + ?Sized>(d: usize, env: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(d, env, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Hermitian unitary `U diag(+-1) U^dagger`.
pub fn random_hermitian_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(d, rng);
    let signs = CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::new(if rng.gen_bool(0.5) { 1.0 } else { -1.0 }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &u * signs * u.adjoint()
}

/// Random normal matrix `U diag(z) U^dagger`.
pub fn random_normal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(d, rng);
    let diag = CMatrix::from_fn(d, d, |r, c| if r == c { gaussian(rng) } else { C64::new(0.0, 0.0) });
    &u * diag * u.adjoint()
}

/// Random projective measurement: each basis vector is assigned a uniform
/// outcome, then the basis is rotated by a Haar unitary.
pub fn random_pvm<R: Rng + ?Sized>(d: usize, outcomes: &[Response], rng: &mut R) -> Pvm {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..d {
        groups.entry(rng.gen_range(0..outcomes.len())).or_default().push(k);
    }
    let u = haar_unitary(d, rng);
    Pvm::new(
        groups
            .into_iter()
            .map(|(o, idx)| {
                let p = diag_projector(d, idx);
                (outcomes[o].clone(), &u * p * u.adjoint())
            })
            .collect(),
    )
}

fn colors() -> impl Iterator<Item = u8> {
    0..3u8
}

/// Every syntactically valid answer to `q` under `kind`.
pub fn alphabet_a(kind: GameKind, q: &QueryA) -> Vec<Response> {
    match (kind, q) {
        (GameKind::AltRzkp, _) => (0..81u8)
            .map(|k| Response::AltRzkpA([k / 27, (k / 9) % 3, (k / 3) % 3, k % 3]))
            .collect(),
        (GameKind::AltEdge, _) => colors()
            .flat_map(|a| colors().map(move |b| Response::AltEdgeA([a, b])))
            .collect(),
        (_, QueryA::Constraint(Constraint::Vertex(_))) => (0..8u8)
            .map(|k| Response::BcsA(vec![k >> 2, (k >> 1) & 1, k & 1]))
            .collect(),
        (_, QueryA::Constraint(Constraint::Edge { .. })) => (0..4u8)
            .map(|k| Response::BcsA(vec![k >> 1, k & 1]))
            .collect(),
        _ => colors().map(Response::VertexA).collect(),
    }
}

pub fn alphabet_b(kind: GameKind, q: &QueryB) -> Vec<Response> {
    match (kind, q) {
        (_, QueryB::EdgeBit { .. }) => (0..9u8).map(|k| Response::AltRzkpB([k / 3, k % 3])).collect(),
        (GameKind::AltEdge, _) => colors().map(Response::AltEdgeB).collect(),
        (_, QueryB::VertexColor { .. }) => (0..2u8).map(Response::BcsB).collect(),
        _ => colors().map(Response::VertexB).collect(),
    }
}

/// Fully random strategy: random state, independent random measurements.
pub fn random_strategy<R: Rng + ?Sized>(
    kind: GameKind,
    g: &Graph,
    d_a: usize,
    d_b: usize,
    rng: &mut R,
) -> Result<QuantumStrategy, QuantumError> {
    let (qas, qbs) = support_queries(kind, g)?;
    let psi = random_state(d_a * d_b, rng);
    let pvm_a = qas
        .into_iter()
        .map(|q| (q, random_pvm(d_a, &alphabet_a(kind, &q), rng)))
        .collect();
    let pvm_b = qbs
        .into_iter()
        .map(|q| (q, random_pvm(d_b, &alphabet_b(kind, &q), rng)))
        .collect();
    QuantumStrategy::new(d_a, d_b, psi, pvm_a, pvm_b)
}

/// Rotates every measurement by `exp(i t H)` (independent `H` per query) and
/// mixes `psi_t` of a random state into the shared state.
pub fn perturb<R: Rng + ?Sized>(
    s: &QuantumStrategy,
    t: f64,
    psi_t: f64,
    rng: &mut R,
) -> Result<QuantumStrategy, QuantumError> {
    let rot = |d: usize, pvm: &Pvm, rng: &mut R| pvm.conjugated(&unitary_exp(&random_hermitian(d, rng), t));
    let pvm_a = s.pvm_a.iter().map(|(q, p)| (*q, rot(s.d_a, p, rng))).collect();
    let pvm_b = s.pvm_b.iter().map(|(q, p)| (*q, rot(s.d_b, p, rng))).collect();
    let noise = random_state(s.psi.len(), rng);
    let psi = &s.psi + noise * C64::new(psi_t, 0.0);
    let n = psi.norm();
    QuantumStrategy::new(s.d_a, s.d_b, psi / C64::new(n, 0.0), pvm_a, pvm_b)
}

/// Honest classical strategy over `d` random rounds, embedded diagonally,
/// then perturbed.
pub fn near_honest<R: Rng + ?Sized>(
    kind: GameKind,
    g: &Graph,
    witness: &Coloring,
    d: usize,
    t: f64,
    psi_t: f64,
    rng: &mut R,
) -> Result<QuantumStrategy, QuantumError> {
    let inst = PlantedInstance::new(g.clone(), witness.clone())
        .map_err(|e| QuantumError::Numerical(e.to_string()))?;
    let pair = pair_for_kind(honest_pair(&inst, rng.gen()), kind);
    let rounds: Vec<u64> = (0..d as u64).collect();
    let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s = embed_classical(kind, g, &pair, &rounds, &weights)?;
    perturb(&s, t, psi_t, rng)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.into_iter().fold(f64::INFINITY, f64::min)
}
