//! Constructive strategy transformers along the reduction chain.
//!
//! Local classical randomness (B's neighbor and bit choice, A's neighbor
//! choice) is realized by a uniformly prepared ancilla of dimension `L`; the
//! choice made for ancilla index `l` is `l mod (number of choices)`, which is
//! uniform whenever the number of choices divides `L`.

use std::collections::BTreeMap;

use super::linalg::{identity, kron, zeros, CMatrix, CVector, C64};
use super::strategy::{Pvm, QuantumStrategy};
use super::QuantumError;
use crate::games::{Constraint, QueryA, QueryB, Response};
use crate::graph::{Color, Graph};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm_of(values: impl Iterator<Item = usize>) -> usize {
    values.filter(|&v| v > 0).fold(1, |acc, v| acc / gcd(acc, v) * v)
}

fn canonical(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// `psi` with a uniform ancilla of dimension `l` appended to one side
/// (and a `|0>` register of dimension `r` after it, for side B).
fn extend_state(s: &QuantumStrategy, anc_a: usize, anc_b: usize, reg_b: usize) -> CVector {
    let (d_a, d_b) = (s.d_a, s.d_b);
    let nd_a = d_a * anc_a;
    let nd_b = d_b * anc_b * reg_b;
    let amp = 1.0 / ((anc_a * anc_b) as f64).sqrt();
    let mut psi = CVector::zeros(nd_a * nd_b);
    for a in 0..d_a {
        for b in 0..d_b {
            let v = s.psi[a * d_b + b] * amp;
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for la in 0..anc_a {
                for lb in 0..anc_b {
                    let ia = a * anc_a + la;
                    let ib = (b * anc_b + lb) * reg_b;
                    psi[ia * nd_b + ib] = v;
                }
            }
        }
    }
    psi
}

/// Places `block` (indexed by `x * inner + r`) into the ancilla block `l`
/// of a matrix indexed by `(x * anc + l) * inner + r`.
fn embed_block(big: &mut CMatrix, block: &CMatrix, anc: usize, l: usize, inner: usize) {
    let outer = block.nrows() / inner;
    for x in 0..outer {
        for r in 0..inner {
            for x2 in 0..outer {
                for r2 in 0..inner {
                    let v = block[(x * inner + r, x2 * inner + r2)];
                    if v != C64::new(0.0, 0.0) {
                        big[((x * anc + l) * inner + r, (x2 * anc + l) * inner + r2)] = v;
                    }
                }
            }
        }
    }
}

fn shift(k: usize) -> CMatrix {
    let mut s = zeros(3);
    for r in 0..3 {
        s[((r + k) % 3, r)] = C64::new(1.0, 0.0);
    }
    s
}

fn basis_projector(d: usize, k: usize) -> CMatrix {
    let mut p = zeros(d);
    p[(k, k)] = C64::new(1.0, 0.0);
    p
}

/// Marginal of B's pair measurement on the share of vertex `v`.
fn share_marginal(pvm: &Pvm, edge: (usize, usize), v: usize, d: usize) -> Result<[CMatrix; 3], QuantumError> {
    let mut out = [zeros(d), zeros(d), zeros(d)];
    for (r, p) in &pvm.outcomes {
        let Response::AltRzkpB(w) = r else {
            return Err(QuantumError::WrongGame);
        };
        let x = if v == edge.0 { w[0] } else { w[1] };
        if x > 2 {
            return Err(QuantumError::WrongGame);
        }
        out[x as usize] += p;
    }
    Ok(out)
}

/// Alt-RZKP strategy to Alt-Edge strategy. A relabels `c = w0 + w1`; B,
/// asked for vertex `v`, picks a uniform incident edge and bit `b`,
/// measures its share `b` then its share `1 - b` of `v`, and answers the sum.
pub fn reduce_rzkp_to_edge(s: &QuantumStrategy, g: &Graph) -> Result<QuantumStrategy, QuantumError> {
    s.validate()?;
    let anc = lcm_of((0..g.vertex_count()).map(|v| 2 * g.degree(v)));
    let mut pvm_a = BTreeMap::new();
    for &(i, j) in g.edges() {
        let q = QueryA::Edge(i, j);
        let mut by: BTreeMap<[Color; 2], CMatrix> = BTreeMap::new();
        for (r, p) in &s.pvm_a(&q)?.outcomes {
            let Response::AltRzkpA(w) = r else {
                return Err(QuantumError::WrongGame);
            };
            let key = [(w[0] + w[1]) % 3, (w[2] + w[3]) % 3];
            *by.entry(key).or_insert_with(|| zeros(s.d_a)) += p;
        }
        let outcomes = by
            .into_iter()
            .map(|(c, p)| (Response::AltEdgeA(c), p))
            .collect();
        pvm_a.insert(q, Pvm::new(outcomes));
    }

    let d_b = s.d_b;
    let inner = 3;
    let nd_b = d_b * anc * inner;
    let mut pvm_b = BTreeMap::new();
    for v in 0..g.vertex_count() {
        let nbrs = g.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        let choices = 2 * nbrs.len();
        let mut per_choice = Vec::with_capacity(choices);
        for ch in 0..choices {
            let edge = canonical(v, nbrs[ch / 2]);
            let bit = (ch % 2) as u8;
            let first = share_marginal(s.pvm_b(&QueryB::EdgeBit { edge, bit })?, edge, v, d_b)?;
            let second = share_marginal(s.pvm_b(&QueryB::EdgeBit { edge, bit: 1 - bit })?, edge, v, d_b)?;
            // U records the first outcome x into the register: sum_x P_x (x) S^x.
            let mut u = zeros(d_b * inner);
            for (x, px) in first.iter().enumerate() {
                u += kron(px, &shift(x));
            }
            let mut blocks = [zeros(d_b * inner), zeros(d_b * inner), zeros(d_b * inner)];
            for x in 0..3 {
                for (y, qy) in second.iter().enumerate() {
                    blocks[(x + y) % 3] += kron(qy, &basis_projector(inner, x));
                }
            }
            let ud = u.adjoint();
            per_choice.push(blocks.map(|blk| &ud * blk * &u));
        }
        let mut outs = [zeros(nd_b), zeros(nd_b), zeros(nd_b)];
        for l in 0..anc {
            let blocks = &per_choice[l % choices];
            for c in 0..3 {
                embed_block(&mut outs[c], &blocks[c], anc, l, inner);
            }
        }
        let outcomes = outs
            .into_iter()
            .enumerate()
            .map(|(c, p)| (Response::AltEdgeB(c as Color), p))
            .collect();
        pvm_b.insert(QueryB::Vertex(v), Pvm::new(outcomes));
    }
    let psi = extend_state(s, 1, anc, inner);
    QuantumStrategy::new(s.d_a, nd_b, psi, pvm_a, pvm_b)
}

fn color_marginals(pvm: &Pvm, d: usize) -> Result<[CMatrix; 3], QuantumError> {
    let mut out = [zeros(d), zeros(d), zeros(d)];
    for (r, p) in &pvm.outcomes {
        match r {
            Response::AltEdgeB(c) if *c < 3 => out[*c as usize] += p,
            _ => return Err(QuantumError::WrongGame),
        }
    }
    Ok(out)
}

fn edge_colors(r: &Response) -> Result<[Color; 2], QuantumError> {
    match r {
        Response::AltEdgeA(c) if c[0] < 3 && c[1] < 3 => Ok(*c),
        _ => Err(QuantumError::WrongGame),
    }
}

fn indicators(c: Color) -> Vec<u8> {
    (0..3).map(|a| u8::from(a == c)).collect()
}

/// Alt-Edge strategy to a vertex-complete color-commuting BCS strategy.
/// `B~^{k beta}_1 = B^k_beta`; A answers edge constraints with the color
/// indicators of one edge measurement, and vertex constraints by measuring a
/// uniformly chosen incident edge.
pub fn reduce_edge_to_bcs(s: &QuantumStrategy, g: &Graph) -> Result<QuantumStrategy, QuantumError> {
    s.validate()?;
    let anc = lcm_of((0..g.vertex_count()).map(|v| g.degree(v)));
    let d_a = s.d_a;
    let nd_a = d_a * anc;
    let id_anc = identity(anc);

    let mut pvm_b = BTreeMap::new();
    for k in 0..g.vertex_count() {
        let marg = if g.degree(k) == 0 {
            [identity(s.d_b), zeros(s.d_b), zeros(s.d_b)]
        } else {
            color_marginals(s.pvm_b(&QueryB::Vertex(k))?, s.d_b)?
        };
        for beta in 0..3u8 {
            let one = marg[beta as usize].clone();
            let zero = identity(s.d_b) - &one;
            pvm_b.insert(
                QueryB::VertexColor {
                    vertex: k,
                    color: beta,
                },
                Pvm::new(vec![(Response::BcsB(0), zero), (Response::BcsB(1), one)]),
            );
        }
    }

    let mut pvm_a = BTreeMap::new();
    for &(i, j) in g.edges() {
        let src = s.pvm_a(&QueryA::Edge(i, j))?;
        for alpha in 0..3u8 {
            let mut by: BTreeMap<Vec<u8>, CMatrix> = BTreeMap::new();
            for (r, p) in &src.outcomes {
                let c = edge_colors(r)?;
                let key = vec![u8::from(c[0] == alpha), u8::from(c[1] == alpha)];
                *by.entry(key).or_insert_with(|| zeros(nd_a)) += kron(p, &id_anc);
            }
            pvm_a.insert(
                QueryA::Constraint(Constraint::Edge { i, j, color: alpha }),
                Pvm::new(by.into_iter().map(|(b, p)| (Response::BcsA(b), p)).collect()),
            );
        }
    }
    for v in 0..g.vertex_count() {
        let nbrs = g.neighbors(v);
        let q = QueryA::Constraint(Constraint::Vertex(v));
        if nbrs.is_empty() {
            pvm_a.insert(q, Pvm::new(vec![(Response::BcsA(indicators(0)), identity(nd_a))]));
            continue;
        }
        let mut by: BTreeMap<Vec<u8>, CMatrix> = BTreeMap::new();
        for l in 0..anc {
            let u = nbrs[l % nbrs.len()];
            let edge = canonical(v, u);
            let ancilla = super::linalg::diag_projector(anc, [l]);
            for (r, p) in &s.pvm_a(&QueryA::Edge(edge.0, edge.1))?.outcomes {
                let c = edge_colors(r)?;
                let cv = if v == edge.0 { c[0] } else { c[1] };
                *by.entry(indicators(cv)).or_insert_with(|| zeros(nd_a)) += kron(p, &ancilla);
            }
        }
        pvm_a.insert(
            q,
            Pvm::new(by.into_iter().map(|(b, p)| (Response::BcsA(b), p)).collect()),
        );
    }
    let psi = extend_state(s, anc, 1, 1);
    QuantumStrategy::new(nd_a, s.d_b, psi, pvm_a, pvm_b)
}
