//! Gate graphs, light-cone level sets and their intersections, and the
//! Gromov four-point δ.
//!
//! A gate graph has one vertex per site and an edge between every pair of
//! sites some gate acts on together, so a z-site gate becomes a z-clique.
//! With i and j at distance t, I(i,j,s) = L_i(s) ∩ L_j(t−s) is the set of
//! geodesic vertices at distance s from i and D_t = max_s |I(i,j,s)|.
//!
//! δ is reported under the four-point definition: for every quadruple the
//! three pairwise sums d(x,y)+d(z,w) are sorted and the gap between the two
//! largest is at most 2δ. Under this definition every pair x, x' ∈ I(i,j,s)
//! satisfies d(x, x') ≤ 2δ.

use std::collections::BTreeSet;

use num_complex::Complex64;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::visit::EdgeRef;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{CayleyTree, Color, TwoColoring};

pub const DEFAULT_DELTA_CAP: usize = 300;
pub const DELTA_DEFINITION: &str = "four-point";

#[derive(Clone, Debug)]
pub struct GateGraph {
    graph: UnGraph<(), u32>,
}

impl GateGraph {
    /// Graph on n sites with the given weighted edges. Repeated edges keep
    /// the shortest length.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut graph: UnGraph<(), u32> = UnGraph::with_capacity(n, edges.len());
        for _ in 0..n {
            graph.add_node(());
        }
        for &(a, b, len) in edges {
            if a >= n || b >= n {
                return Err(Error::Invalid(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            if a == b {
                return Err(Error::Invalid(format!("self-loop at {a}")));
            }
            if len == 0 {
                return Err(Error::Invalid(format!("edge ({a}, {b}) has length 0")));
            }
            let (na, nb) = (NodeIndex::new(a), NodeIndex::new(b));
            match graph.find_edge(na, nb) {
                Some(e) => graph[e] = graph[e].min(len),
                None => {
                    graph.add_edge(na, nb, len);
                }
            }
        }
        Ok(Self { graph })
    }

    /// Every gate becomes a clique of unit edges.
    pub fn from_gates(n: usize, gates: &[Vec<usize>]) -> Result<Self> {
        let mut edges = Vec::new();
        for g in gates {
            if g.len() < 2 {
                return Err(Error::Invalid(format!("gate {g:?} acts on fewer than 2 sites")));
            }
            for (k, &a) in g.iter().enumerate() {
                for &b in &g[k + 1..] {
                    edges.push((a, b, 1));
                }
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Parse "u v [length]" lines; blank lines and '#' comments are skipped.
    /// The vertex count is one more than the largest index.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Invalid(format!("line {}: expected 'u v [length]'", lineno + 1));
            if f.len() < 2 || f.len() > 3 {
                return Err(bad());
            }
            let a: usize = f[0].parse().map_err(|_| bad())?;
            let b: usize = f[1].parse().map_err(|_| bad())?;
            let len: u32 = match f.get(2) {
                Some(s) => s.parse().map_err(|_| bad())?,
                None => 1,
            };
            n = n.max(a + 1).max(b + 1);
            edges.push((a, b, len));
        }
        Self::from_edges(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (a, b, len) in self.edges() {
            if len == 1 {
                out.push_str(&format!("{a} {b}\n"));
            } else {
                out.push_str(&format!("{a} {b} {len}\n"));
            }
        }
        out
    }

    pub fn n_vertices(&self) -> usize {
        self.graph.node_count()
    }

    pub fn n_edges(&self) -> usize {
        self.graph.edge_count()
    }

    /// Edges (a, b, length) with a < b, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        let mut e: Vec<(usize, usize, u32)> = self
            .graph
            .edge_references()
            .map(|r| {
                let (a, b) = (r.source().index(), r.target().index());
                (a.min(b), a.max(b), *r.weight())
            })
            .collect();
        e.sort_unstable();
        e
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self.graph.neighbors(NodeIndex::new(v)).map(|x| x.index()).collect();
        n.sort_unstable();
        n
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n_vertices() {
            return Err(Error::Invalid(format!("vertex {v} outside 0..{}", self.n_vertices())));
        }
        Ok(())
    }

    /// Distances from `i`; `None` for unreachable vertices.
    pub fn distances_from(&self, i: usize) -> Result<Vec<Option<u32>>> {
        self.check_vertex(i)?;
        let scores = dijkstra(&self.graph, NodeIndex::new(i), None, |e| *e.weight());
        let mut d = vec![None; self.n_vertices()];
        for (node, s) in scores {
            d[node.index()] = Some(s);
        }
        Ok(d)
    }

    pub fn is_connected(&self) -> bool {
        self.n_vertices() == 0 || self.distances_from(0).map(|d| d.iter().all(Option::is_some)).unwrap_or(false)
    }

    /// Row-major all-pairs distances; errors if the graph is disconnected.
    pub fn distance_matrix(&self) -> Result<Vec<u32>> {
        let n = self.n_vertices();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for (j, d) in self.distances_from(i)?.into_iter().enumerate() {
                out.push(d.ok_or_else(|| Error::Invalid(format!("vertices {i} and {j} are disconnected")))?);
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Builders

/// The Cayley tree's own adjacency.
pub fn tree_graph(tree: &CayleyTree) -> GateGraph {
    let edges: Vec<(usize, usize, u32)> = (1..tree.n_vertices())
        .map(|v| (tree.parent(v).expect("non-origin vertex"), v, 1))
        .collect();
    GateGraph::from_edges(tree.n_vertices(), &edges).expect("tree edges are valid")
}

/// Gate graph of the z-site circuit: every complete cluster of either color
/// becomes a clique. Edges of incomplete boundary clusters are kept as
/// plain edges so the graph stays connected.
pub fn tree_gate_graph(tree: &CayleyTree) -> GateGraph {
    let col = TwoColoring::new(tree);
    let mut gates: Vec<Vec<usize>> = Vec::new();
    for c in [Color::A, Color::B] {
        gates.extend(col.clusters(c).into_iter().map(|cl| cl.members));
    }
    let mut covered = BTreeSet::new();
    for g in &gates {
        for &v in &g[1..] {
            covered.insert((g[0].min(v), g[0].max(v)));
        }
    }
    for v in 1..tree.n_vertices() {
        let p = tree.parent(v).expect("non-origin vertex");
        if !covered.contains(&(p, v)) {
            gates.push(vec![p, v]);
        }
    }
    GateGraph::from_gates(tree.n_vertices(), &gates).expect("clusters are valid")
}

/// Index of `coords` in a grid with side lengths `dims`, first axis most
/// significant.
pub fn grid_index(dims: &[usize], coords: &[usize]) -> usize {
    dims.iter().zip(coords).fold(0, |acc, (&d, &c)| acc * d + c)
}

/// Nearest-neighbour 2-site gates on a hypercubic grid.
pub fn grid(dims: &[usize]) -> Result<GateGraph> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Invalid(format!("bad grid dimensions {dims:?}")));
    }
    let n: usize = dims.iter().product();
    let mut edges = Vec::new();
    let mut coords = vec![0usize; dims.len()];
    for v in 0..n {
        let mut rest = v;
        for k in (0..dims.len()).rev() {
            coords[k] = rest % dims[k];
            rest /= dims[k];
        }
        for k in 0..dims.len() {
            if coords[k] + 1 < dims[k] {
                let mut c = coords.clone();
                c[k] += 1;
                edges.push((v, grid_index(dims, &c), 1));
            }
        }
    }
    GateGraph::from_edges(n, &edges)
}

/// 4-site gates on every plaquette of an n × n square lattice: the grid
/// plus both diagonals of each square.
pub fn square_plaquette(n: usize) -> Result<GateGraph> {
    if n < 2 {
        return Err(Error::Invalid("plaquette lattice needs n >= 2".into()));
    }
    let idx = |x: usize, y: usize| x * n + y;
    let mut gates = Vec::new();
    for x in 0..n - 1 {
        for y in 0..n - 1 {
            gates.push(vec![idx(x, y), idx(x + 1, y), idx(x, y + 1), idx(x + 1, y + 1)]);
        }
    }
    GateGraph::from_gates(n * n, &gates)
}

/// Patch of the regular {p, q} tiling: the central p-gon and every face
/// reachable from it by crossing at most `layers` edges. Vertices are
/// numbered in order of discovery (central face first, counterclockwise).
/// Only hyperbolic tilings, (p−2)(q−2) > 4, are supported.
pub fn hyperbolic_patch(p: usize, q: usize, layers: usize) -> Result<GateGraph> {
    Ok(hyperbolic_patch_with_coords(p, q, layers)?.0)
}

/// [`hyperbolic_patch`] together with the Poincaré-disk coordinates of the
/// vertices.
pub fn hyperbolic_patch_with_coords(p: usize, q: usize, layers: usize) -> Result<(GateGraph, Vec<Complex64>)> {
    if p < 3 || q < 3 || (p - 2) * (q - 2) <= 4 {
        return Err(Error::Invalid(format!("{{{p},{q}}} is not a hyperbolic tiling")));
    }
    let (pf, qf) = (p as f64, q as f64);
    let pi = std::f64::consts::PI;
    // hyperbolic circumradius of the central face, then its disk radius
    let cosh_r = (1.0 / (pi / pf).tan()) * (1.0 / (pi / qf).tan());
    let radius = (cosh_r.acosh() / 2.0).tanh();
    let central: Vec<Complex64> = (0..p)
        .map(|k| Complex64::from_polar(radius, 2.0 * pi * k as f64 / pf))
        .collect();

    const TOL: f64 = 1e-9;
    let mut vertices: Vec<Complex64> = Vec::new();
    let intern = |z: Complex64, vertices: &mut Vec<Complex64>| -> usize {
        if let Some(k) = vertices.iter().position(|w| (w - z).norm() < TOL) {
            return k;
        }
        vertices.push(z);
        vertices.len() - 1
    };
    let mut faces: Vec<(Complex64, Vec<Complex64>)> = vec![(Complex64::new(0.0, 0.0), central)];
    let mut edges = BTreeSet::new();
    let mut frontier = vec![0usize];
    for layer in 0..=layers {
        let mut next = Vec::new();
        for &f in &frontier {
            let (center, corners) = faces[f].clone();
            let ids: Vec<usize> = corners.iter().map(|&z| intern(z, &mut vertices)).collect();
            for k in 0..p {
                let (a, b) = (ids[k], ids[(k + 1) % p]);
                edges.insert((a.min(b), a.max(b)));
            }
            if layer == layers {
                continue;
            }
            for k in 0..p {
                let (a, b) = (corners[k], corners[(k + 1) % p]);
                let c = reflect_in_geodesic(center, a, b);
                if faces.iter().any(|(w, _)| (w - c).norm() < TOL) {
                    continue;
                }
                let img: Vec<Complex64> = corners.iter().map(|&z| reflect_in_geodesic(z, a, b)).collect();
                faces.push((c, img));
                next.push(faces.len() - 1);
            }
        }
        frontier = next;
    }
    let edges: Vec<(usize, usize, u32)> = edges.into_iter().map(|(a, b)| (a, b, 1)).collect();
    Ok((GateGraph::from_edges(vertices.len(), &edges)?, vertices))
}

/// Reflection of `z` in the hyperbolic geodesic through `a` and `b`
/// (Poincaré disk): inversion in the circle orthogonal to the unit circle,
/// or a Euclidean reflection if the geodesic is a diameter.
fn reflect_in_geodesic(z: Complex64, a: Complex64, b: Complex64) -> Complex64 {
    // center c solves Re(a c̄) = (|a|² + 1)/2 and the same for b
    let det = a.re * b.im - a.im * b.re;
    if det.abs() < 1e-12 {
        let u = if a.norm() > b.norm() { a / a.norm() } else { b / b.norm() };
        return u * u * z.conj();
    }
    let (ra, rb) = ((a.norm_sqr() + 1.0) / 2.0, (b.norm_sqr() + 1.0) / 2.0);
    let c = Complex64::new((ra * b.im - rb * a.im) / det, (a.re * rb - b.re * ra) / det);
    let rho2 = c.norm_sqr() - 1.0;
    c + rho2 / (z - c).conj()
}

// ---------------------------------------------------------------------------
// Level sets and intersections

/// L_i(t): vertices at distance exactly t from i.
pub fn level_set(g: &GateGraph, i: usize, t: u32) -> Result<Vec<usize>> {
    Ok(g.distances_from(i)?
        .into_iter()
        .enumerate()
        .filter(|(_, d)| *d == Some(t))
        .map(|(v, _)| v)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub i: usize,
    pub j: usize,
    pub t: u32,
    /// I(i,j,s) for s = 0..=t.
    pub sets: Vec<Vec<usize>>,
    pub d_t: usize,
}

impl LevelSetReport {
    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }
}

pub fn intersections(g: &GateGraph, i: usize, j: usize) -> Result<LevelSetReport> {
    let di = g.distances_from(i)?;
    let dj = g.distances_from(j)?;
    let t = di[j].ok_or_else(|| Error::Invalid(format!("vertices {i} and {j} are disconnected")))?;
    let mut sets = vec![Vec::new(); t as usize + 1];
    for v in 0..g.n_vertices() {
        if let (Some(a), Some(b)) = (di[v], dj[v]) {
            if a + b == t {
                sets[a as usize].push(v);
            }
        }
    }
    let d_t = sets.iter().map(Vec::len).max().unwrap_or(0);
    Ok(LevelSetReport { i, j, t, sets, d_t })
}

// ---------------------------------------------------------------------------
// Four-point δ

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    pub delta: f64,
    pub quadruple: [usize; 4],
    pub n_vertices: usize,
    pub definition: String,
    /// Set when δ comes from sampled quadruples (a lower bound).
    pub approximate: bool,
}

/// Twice the four-point gap of one quadruple.
fn gap(d: &[u32], n: usize, x: usize, y: usize, z: usize, w: usize) -> u32 {
    let s1 = d[x * n + y] + d[z * n + w];
    let s2 = d[x * n + z] + d[y * n + w];
    let s3 = d[x * n + w] + d[y * n + z];
    let (hi, mid) = if s1 >= s2 {
        if s2 >= s3 {
            (s1, s2)
        } else if s1 >= s3 {
            (s1, s3)
        } else {
            (s3, s1)
        }
    } else if s1 >= s3 {
        (s2, s1)
    } else if s2 >= s3 {
        (s2, s3)
    } else {
        (s3, s2)
    };
    hi - mid
}

/// Exact four-point δ over all quadruples. Graphs above `cap` vertices are
/// refused; use [`four_point_delta_sampled`] for those.
pub fn four_point_delta(g: &GateGraph, cap: usize) -> Result<HyperbolicityReport> {
    let n = g.n_vertices();
    if n > cap {
        return Err(Error::CapExceeded { needed: n, cap });
    }
    let d = g.distance_matrix()?;
    let mut best = (0u32, [0usize; 4]);
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                for w in z + 1..n {
                    let v = gap(&d, n, x, y, z, w);
                    if v > best.0 {
                        best = (v, [x, y, z, w]);
                    }
                }
            }
        }
    }
    Ok(HyperbolicityReport {
        delta: best.0 as f64 / 2.0,
        quadruple: best.1,
        n_vertices: n,
        definition: DELTA_DEFINITION.into(),
        approximate: false,
    })
}

/// Lower bound on δ from `samples` random quadruples.
pub fn four_point_delta_sampled(g: &GateGraph, samples: usize, seed: u64) -> Result<HyperbolicityReport> {
    let n = g.n_vertices();
    if n < 4 {
        return Err(Error::Invalid("four-point δ needs at least 4 vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts: Vec<usize> = (0..n).collect();
    let mut rows: std::collections::HashMap<usize, Vec<Option<u32>>> = Default::default();
    let mut best = (0u32, [0usize; 4]);
    for _ in 0..samples {
        let q: Vec<usize> = verts.choose_multiple(&mut rng, 4).copied().collect();
        let mut dist = |a: usize, b: usize| -> Result<u32> {
            if !rows.contains_key(&a) {
                rows.insert(a, g.distances_from(a)?);
            }
            rows[&a][b].ok_or_else(|| Error::Invalid(format!("vertices {a} and {b} are disconnected")))
        };
        let s1 = dist(q[0], q[1])? + dist(q[2], q[3])?;
        let s2 = dist(q[0], q[2])? + dist(q[1], q[3])?;
        let s3 = dist(q[0], q[3])? + dist(q[1], q[2])?;
        let mut s = [s1, s2, s3];
        s.sort_unstable();
        if s[2] - s[1] > best.0 {
            best = (s[2] - s[1], [q[0], q[1], q[2], q[3]]);
        }
    }
    Ok(HyperbolicityReport {
        delta: best.0 as f64 / 2.0,
        quadruple: best.1,
        n_vertices: n,
        definition: DELTA_DEFINITION.into(),
        approximate: true,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionCheck {
    pub pairs_checked: usize,
    pub max_diameter: u32,
    /// (i, j, s) attaining the largest diameter.
    pub worst: (usize, usize, u32),
    pub bound: f64,
    pub holds: bool,
}

/// Largest distance between two vertices of the same I(i,j,s) over the
/// given pairs, compared with 2δ.
pub fn bounded_intersection_check(g: &GateGraph, pairs: &[(usize, usize)], delta: f64) -> Result<IntersectionCheck> {
    let mut rows: std::collections::HashMap<usize, Vec<Option<u32>>> = Default::default();
    let mut max_diameter = 0;
    let mut worst = (0, 0, 0);
    for &(i, j) in pairs {
        let rep = intersections(g, i, j)?;
        for (s, set) in rep.sets.iter().enumerate() {
            for (k, &a) in set.iter().enumerate() {
                if !rows.contains_key(&a) {
                    rows.insert(a, g.distances_from(a)?);
                }
                for &b in &set[k + 1..] {
                    let d = rows[&a][b].expect("same component");
                    if d > max_diameter {
                        max_diameter = d;
                        worst = (i, j, s as u32);
                    }
                }
            }
        }
    }
    let bound = 2.0 * delta;
    Ok(IntersectionCheck {
        pairs_checked: pairs.len(),
        max_diameter,
        worst,
        bound,
        holds: max_diameter as f64 <= bound,
    })
}

/// Every unordered pair of distinct vertices.
pub fn all_pairs(g: &GateGraph) -> Vec<(usize, usize)> {
    let n = g.n_vertices();
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}
