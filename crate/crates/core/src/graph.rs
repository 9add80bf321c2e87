//! Graphs, colorings, planted instances and the commutativity-gadget extension.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// A color in F_3.
pub type Color = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) has an endpoint outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("coloring has length {got}, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("color {0} is not in F_3")]
    BadColor(u8),
    #[error("witness coloring is not proper")]
    ImproperWitness,
    #[error("{requested} edges requested but only {available} bichromatic pairs exist")]
    Infeasible { requested: usize, available: usize },
    #[error("planted instances need at least 3 vertices")]
    TooFewVertices,
    #[error("edge count {m} exceeds n(n-1)/2 for n = {n}")]
    TooManyEdges { n: u64, m: u64 },
    #[error("max degree {max_deg} exceeds n - 1 for n = {n}")]
    DegreeTooLarge { n: u64, max_deg: u64 },
    #[error("malformed graph file: {0}")]
    Parse(String),
}

/// Simple undirected graph on vertices `0..n`. Edges are stored as `(i, j)`
/// with `i < j`, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a normalized graph from arbitrary edge pairs.
    pub fn new(n: usize, raw_edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut edges = Vec::with_capacity(raw_edges.len());
        for &(a, b) in raw_edges {
            if a >= n || b >= n {
                return Err(GraphError::OutOfRange(a, b, n));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        edges.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        Ok(Graph { n, edges, adjacency })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Graph::new(n, &edges).expect("complete graph is valid")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges).expect("cycle is valid")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::new(n, &edges).expect("path is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (i, j) = (a.min(b), a.max(b));
        self.edges.binary_search(&(i, j)).is_ok()
    }

    /// Edges incident to `v`, each in canonical `(min, max)` orientation,
    /// ordered by the other endpoint.
    pub fn incident_edges(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency[v].iter().map(move |&u| (v.min(u), v.max(u)))
    }

    /// Unordered vertex pairs `(i, j)`, `i < j`, that are not edges, in
    /// lexicographic order.
    pub fn non_adjacent_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.has_edge(i, j))
            .collect()
    }

    /// Canonical bytes: JSON with sorted keys, sorted edges, no whitespace.
    pub fn canonical_json(&self) -> String {
        GraphFile::from_graph(self, None).to_canonical_json()
    }

    /// SHA-256 of the canonical serialization (witness excluded).
    pub fn canonical_hash(&self) -> [u8; 32] {
        Sha256::digest(self.canonical_json().as_bytes()).into()
    }
}

/// Per-vertex colors in F_3.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring(pub Vec<Color>);

impl Coloring {
    pub fn new(colors: Vec<Color>) -> Result<Self, GraphError> {
        if let Some(&bad) = colors.iter().find(|&&c| c > 2) {
            return Err(GraphError::BadColor(bad));
        }
        Ok(Coloring(colors))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: usize) -> Color {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[Color] {
        &self.0
    }

    /// Applies a color permutation `pi` (pi[c] is the image of c).
    pub fn permuted(&self, pi: &[Color; 3]) -> Coloring {
        Coloring(self.0.iter().map(|&c| pi[c as usize]).collect())
    }
}

/// Additive shares `(w0, w1)` per vertex with `w0 + w1 = c (mod 3)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labelling(pub Vec<(Color, Color)>);

impl Labelling {
    pub fn share(&self, v: usize, bit: u8) -> Color {
        let (w0, w1) = self.0[v];
        if bit == 0 {
            w0
        } else {
            w1
        }
    }

    pub fn color(&self, v: usize) -> Color {
        let (w0, w1) = self.0[v];
        (w0 + w1) % 3
    }

    /// Checks that the shares sum to `c` at every vertex.
    pub fn matches(&self, c: &Coloring) -> bool {
        self.0.len() == c.len() && (0..c.len()).all(|v| self.color(v) == c.get(v))
    }
}

/// Monochromatic edges of `g` under `c`, in sorted order.
pub fn validate_coloring(g: &Graph, c: &Coloring) -> Result<Vec<(usize, usize)>, GraphError> {
    if c.len() != g.vertex_count() {
        return Err(GraphError::LengthMismatch {
            expected: g.vertex_count(),
            got: c.len(),
        });
    }
    Ok(g.edges()
        .iter()
        .copied()
        .filter(|&(i, j)| c.get(i) == c.get(j))
        .collect())
}

/// Backtracking search for a proper 3-coloring; returns the first one found.
pub fn find_three_coloring(g: &Graph) -> Option<Coloring> {
    let n = g.vertex_count();
    // Visit high-degree vertices first, then keep neighbors close in the order.
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    for &start in &by_degree {
        if placed[start] {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        placed[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in g.neighbors(v) {
                if !placed[u] {
                    placed[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }

    let mut colors: Vec<Option<Color>> = vec![None; n];
    fn go(g: &Graph, order: &[usize], pos: usize, colors: &mut [Option<Color>]) -> bool {
        let Some(&v) = order.get(pos) else {
            return true;
        };
        for c in 0..3u8 {
            if g.neighbors(v).iter().all(|&u| colors[u] != Some(c)) {
                colors[v] = Some(c);
                if go(g, order, pos + 1, colors) {
                    return true;
                }
            }
        }
        colors[v] = None;
        false
    }
    if go(g, &order, 0, &mut colors) {
        Some(Coloring(colors.into_iter().map(|c| c.unwrap_or(0)).collect()))
    } else {
        None
    }
}

pub fn is_three_colorable(g: &Graph) -> bool {
    find_three_coloring(g).is_some()
}

/// A graph together with a proper coloring that certifies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedInstance {
    pub graph: Graph,
    pub witness: Coloring,
}

impl PlantedInstance {
    pub fn new(graph: Graph, witness: Coloring) -> Result<Self, GraphError> {
        if !validate_coloring(&graph, &witness)?.is_empty() {
            return Err(GraphError::ImproperWitness);
        }
        Ok(PlantedInstance { graph, witness })
    }
}

/// Samples a balanced random witness, then `m` distinct bichromatic pairs
/// uniformly without replacement. Deterministic in `seed`.
pub fn gen_planted(n: usize, m: usize, seed: u64) -> Result<PlantedInstance, GraphError> {
    if n < 3 {
        return Err(GraphError::TooFewVertices);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut colors: Vec<Color> = (0..n).map(|v| (v % 3) as Color).collect();
    colors.shuffle(&mut rng);
    let witness = Coloring(colors);

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| witness.get(i) != witness.get(j))
        .collect();
    if m > pairs.len() {
        return Err(GraphError::Infeasible {
            requested: m,
            available: pairs.len(),
        });
    }
    let chosen: Vec<(usize, usize)> = rand::seq::index::sample(&mut rng, pairs.len(), m)
        .into_iter()
        .map(|k| pairs[k])
        .collect();
    let graph = Graph::new(n, &chosen)?;
    PlantedInstance::new(graph, witness)
}

/// One triangular-prism gadget: triangles (a, b, c) and (d, e, f), matching
/// edges (a, d), (b, e), (c, f). `a` and `e` are the base pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gadget {
    pub pair: (usize, usize),
    /// Role vertices in order a, b, c, d, e, f (indices into the full graph).
    pub roles: [usize; 6],
    /// The nine gadget edges, canonical orientation.
    pub edges: [(usize, usize); 9],
}

impl Gadget {
    pub fn a(&self) -> usize {
        self.roles[0]
    }

    pub fn e(&self) -> usize {
        self.roles[4]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedGraph {
    pub base: Graph,
    pub full: Graph,
    pub gadgets: Vec<Gadget>,
}

impl ExtendedGraph {
    pub fn gadget_for(&self, i: usize, j: usize) -> Option<&Gadget> {
        let key = (i.min(j), i.max(j));
        self.gadgets
            .binary_search_by_key(&key, |gd| gd.pair)
            .ok()
            .map(|k| &self.gadgets[k])
    }
}

/// Attaches a prism gadget to every non-adjacent pair of `g`.
pub fn extend_with_gadgets(g: &Graph) -> ExtendedGraph {
    let n = g.vertex_count();
    let pairs = g.non_adjacent_pairs();
    let mut next = n;
    let mut all_edges: Vec<(usize, usize)> = g.edges().to_vec();
    let mut gadgets = Vec::with_capacity(pairs.len());
    for (i, j) in pairs {
        let (a, e) = (i, j);
        let (b, c, d, f) = (next, next + 1, next + 2, next + 3);
        next += 4;
        let raw = [
            (a, b),
            (b, c),
            (a, c),
            (d, e),
            (e, f),
            (d, f),
            (a, d),
            (b, e),
            (c, f),
        ];
        let edges = raw.map(|(u, v)| (u.min(v), u.max(v)));
        all_edges.extend_from_slice(&edges);
        gadgets.push(Gadget {
            pair: (i, j),
            roles: [a, b, c, d, e, f],
            edges,
        });
    }
    let full = Graph::new(next, &all_edges).expect("gadget wiring is valid");
    ExtendedGraph {
        base: g.clone(),
        full,
        gadgets,
    }
}

/// Closed-form `(|V'|, |E'|)` of the gadget extension.
pub fn extended_counts(n: u64, m: u64) -> Result<(u64, u64), GraphError> {
    let n128 = n as u128;
    let m128 = m as u128;
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if m128 > n128 * (n128 - 1) / 2 {
        return Err(GraphError::TooManyEdges { n, m });
    }
    let vertices = 2 * n128 * n128 - n128 - 4 * m128;
    let edges = 9 * n128 * (n128 - 1) / 2 - 8 * m128;
    Ok((vertices as u64, edges as u64))
}

/// Smallest degree of a base vertex inside the extended graph.
pub fn min_extended_degree(n: u64, max_deg: u64) -> Result<u64, GraphError> {
    if n == 0 || max_deg > n - 1 {
        return Err(GraphError::DegreeTooLarge { n, max_deg });
    }
    Ok(3 * n - 3 - 2 * max_deg)
}

/// JSON graph file: `{"edges": [[i, j], ...], "n": int, "witness": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub edges: Vec<[usize; 2]>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Color>>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph, witness: Option<&Coloring>) -> Self {
        GraphFile {
            edges: g.edges().iter().map(|&(i, j)| [i, j]).collect(),
            n: g.vertex_count(),
            witness: witness.map(|c| c.0.clone()),
        }
    }

    pub fn from_instance(inst: &PlantedInstance) -> Self {
        GraphFile::from_graph(&inst.graph, Some(&inst.witness))
    }

    /// Field order matches sorted key order, so compact serde output is canonical.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("graph file serializes")
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))
    }

    pub fn graph(&self) -> Result<Graph, GraphError> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::new(self.n, &edges)
    }

    pub fn witness(&self) -> Result<Option<Coloring>, GraphError> {
        self.witness.clone().map(Coloring::new).transpose()
    }

    pub fn instance(&self) -> Result<Option<PlantedInstance>, GraphError> {
        let g = self.graph()?;
        match self.witness()? {
            Some(w) => Ok(Some(PlantedInstance::new(g, w)?)),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive 3-colorability for tiny graphs; independent of the backtracker.
    fn brute_colorable(g: &Graph) -> bool {
        let n = g.vertex_count() as u32;
        (0..3u64.pow(n)).any(|mut code| {
            let mut c = vec![0u8; n as usize];
            for slot in c.iter_mut() {
                *slot = (code % 3) as u8;
                code /= 3;
            }
            g.edges().iter().all(|&(i, j)| c[i] != c[j])
        })
    }

    #[test]
    fn make_graph_normalizes() {
        let g = Graph::new(3, &[(0, 1), (2, 1), (0, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        let g = Graph::new(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn make_graph_errors() {
        assert_eq!(Graph::new(4, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert!(matches!(
            Graph::new(3, &[(0, 3)]),
            Err(GraphError::OutOfRange(0, 3, 3))
        ));
        assert_eq!(Graph::new(0, &[]), Err(GraphError::Empty));
    }

    #[test]
    fn planted_examples() {
        let inst = gen_planted(6, 9, 1).unwrap();
        assert_eq!(inst.graph.edge_count(), 9);
        assert!(validate_coloring(&inst.graph, &inst.witness)
            .unwrap()
            .is_empty());
        for seed in 0..5 {
            let k3 = gen_planted(3, 3, seed).unwrap();
            assert_eq!(k3.graph, Graph::complete(3));
        }
        assert!(matches!(
            gen_planted(4, 7, 3),
            Err(GraphError::Infeasible { .. })
        ));
        assert_eq!(gen_planted(2, 1, 0), Err(GraphError::TooFewVertices));
    }

    #[test]
    fn planted_is_deterministic() {
        let a = gen_planted(30, 50, 42).unwrap();
        let b = gen_planted(30, 50, 42).unwrap();
        assert_eq!(
            GraphFile::from_instance(&a).to_canonical_json(),
            GraphFile::from_instance(&b).to_canonical_json()
        );
        let c = gen_planted(30, 50, 43).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn validate_coloring_examples() {
        let k3 = Graph::complete(3);
        assert!(validate_coloring(&k3, &Coloring(vec![0, 1, 2]))
            .unwrap()
            .is_empty());
        assert_eq!(
            validate_coloring(&k3, &Coloring(vec![0, 0, 1])).unwrap(),
            vec![(0, 1)]
        );
        assert!(matches!(
            validate_coloring(&k3, &Coloring(vec![0, 1])),
            Err(GraphError::LengthMismatch { .. })
        ));
        // K4 has no proper 3-coloring: all 81 colorings violate something.
        let k4 = Graph::complete(4);
        for code in 0..81u32 {
            let c: Vec<u8> = (0..4).map(|k| ((code / 3u32.pow(k)) % 3) as u8).collect();
            assert!(!validate_coloring(&k4, &Coloring(c)).unwrap().is_empty());
        }
    }

    #[test]
    fn extension_of_complete_graph_is_trivial() {
        let k4 = Graph::complete(4);
        let ext = extend_with_gadgets(&k4);
        assert!(ext.gadgets.is_empty());
        assert_eq!(ext.full, k4);
    }

    #[test]
    fn extension_of_path() {
        let ext = extend_with_gadgets(&Graph::path(3));
        assert_eq!(ext.gadgets.len(), 1);
        assert_eq!(ext.gadgets[0].pair, (0, 2));
        assert_eq!(ext.full.vertex_count(), 7);
        assert_eq!(ext.full.edge_count(), 11);
        assert_eq!(extended_counts(3, 2).unwrap(), (7, 11));
        let gd = &ext.gadgets[0];
        assert_eq!(gd.roles, [0, 3, 4, 5, 2, 6]);
        assert!(!ext.full.has_edge(gd.a(), gd.e()));
    }

    #[test]
    fn extended_counts_table_rows() {
        assert_eq!(extended_counts(200, 380).unwrap(), (78280, 176060));
        assert_eq!(extended_counts(600, 1122).unwrap(), (714912, 1608324));
        assert_eq!(extended_counts(900, 1695).unwrap(), (1612320, 3627390));
        // Large n stays exact.
        let (v, _) = extended_counts(1_000_000, 0).unwrap();
        assert_eq!(v, 2 * 1_000_000u64 * 1_000_000 - 1_000_000);
        assert!(extended_counts(3, 4).is_err());
    }

    #[test]
    fn min_degree_examples() {
        assert_eq!(min_extended_degree(200, 4).unwrap(), 589);
        assert_eq!(min_extended_degree(3, 2).unwrap(), 2);
        assert_eq!(min_extended_degree(2, 1).unwrap(), 1);
        // K3 extension: no gadgets, every vertex keeps degree 2.
        let ext = extend_with_gadgets(&Graph::complete(3));
        assert!((0..3).all(|v| ext.full.degree(v) == 2));
        // Path 0-1-2: vertex 1 (degree 2) is the max-degree vertex; it gets no gadget.
        let ext = extend_with_gadgets(&Graph::path(3));
        let min_base = (0..3).map(|v| ext.full.degree(v)).min().unwrap();
        assert_eq!(min_base as u64, min_extended_degree(3, 2).unwrap());
    }

    #[test]
    fn backtracker_agrees_with_enumeration() {
        assert!(is_three_colorable(&Graph::cycle(5)));
        assert!(!is_three_colorable(&Graph::complete(4)));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rand::Rng::gen_range(&mut rng, 1..=7);
            let edges: Vec<_> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|_| rand::Rng::gen_bool(&mut rng, 0.6))
                .collect();
            let g = Graph::new(n, &edges).unwrap();
            assert_eq!(is_three_colorable(&g), brute_colorable(&g));
            if let Some(c) = find_three_coloring(&g) {
                assert!(validate_coloring(&g, &c).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn graph_file_is_canonical() {
        let inst = gen_planted(5, 4, 7).unwrap();
        let text = GraphFile::from_instance(&inst).to_canonical_json();
        assert!(text.starts_with("{\"edges\":[["));
        assert!(!text.contains(' '));
        let back = GraphFile::parse(&text).unwrap();
        assert_eq!(back.instance().unwrap().unwrap(), inst);
        assert_eq!(
            Graph::complete(3).canonical_json(),
            r#"{"edges":[[0,1],[0,2],[1,2]],"n":3}"#
        );
    }
}
