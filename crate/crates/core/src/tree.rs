//! Cayley trees, the 2-coloring of their edges into z-site clusters, light
//! cones and leg-annotated light-cone paths, and the proper z-edge-coloring
//! used for 2-site brickwork circuits.
//!
//! Vertices are integers in breadth-first order. The unrooted tree has an
//! origin with z children and every other interior vertex has z−1
//! children; the rooted tree's root has z−1 children.
//!
//! Time steps are counted along the direction the operator moves: step 1
//! is the first layer an operator placed at the origin encounters.

use std::collections::{BTreeSet, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    /// Clusters whose hub sits at even depth.
    A,
    /// Clusters whose hub sits at odd depth.
    B,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::A => Color::B,
            Color::B => Color::A,
        }
    }

    pub fn of_depth(depth: usize) -> Color {
        if depth % 2 == 0 {
            Color::A
        } else {
            Color::B
        }
    }

    /// Color active at step τ (1-based) when step 1 has color `first`.
    pub fn at_step(first: Color, tau: usize) -> Color {
        if tau % 2 == 1 {
            first
        } else {
            first.other()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleyTree {
    z: usize,
    depth: usize,
    rooted: bool,
    level_start: Vec<usize>,
}

impl CayleyTree {
    pub fn new(z: usize, depth: usize, rooted: bool) -> Result<Self> {
        if z < 2 {
            return Err(Error::Invalid(format!("coordination z = {z} must be >= 2")));
        }
        if depth < 1 {
            return Err(Error::Invalid("depth must be >= 1".into()));
        }
        let mut level_start: Vec<usize> = vec![0, 1];
        let mut size = 1usize;
        for d in 1..=depth {
            size = if d == 1 && !rooted { z } else { size * (z - 1) };
            let next = level_start[d]
                .checked_add(size)
                .ok_or_else(|| Error::Invalid("tree too large".into()))?;
            level_start.push(next);
        }
        Ok(Self {
            z,
            depth,
            rooted,
            level_start,
        })
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_rooted(&self) -> bool {
        self.rooted
    }

    pub fn n_vertices(&self) -> usize {
        self.level_start[self.depth + 1]
    }

    pub fn level(&self, d: usize) -> Range<usize> {
        self.level_start[d]..self.level_start[d + 1]
    }

    /// Vertices at depth ≤ r.
    pub fn ball(&self, r: usize) -> Range<usize> {
        0..self.level_start[r.min(self.depth) + 1]
    }

    pub fn depth_of(&self, v: usize) -> usize {
        debug_assert!(v < self.n_vertices());
        self.level_start.partition_point(|&s| s <= v) - 1
    }

    fn n_children_at(&self, d: usize) -> usize {
        if d >= self.depth {
            0
        } else if d == 0 && !self.rooted {
            self.z
        } else {
            self.z - 1
        }
    }

    pub fn children(&self, v: usize) -> Range<usize> {
        let d = self.depth_of(v);
        let k = self.n_children_at(d);
        if k == 0 {
            return 0..0;
        }
        let start = if d == 0 {
            1
        } else {
            self.level_start[d + 1] + (v - self.level_start[d]) * k
        };
        start..start + k
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let d = self.depth_of(v);
        match d {
            0 => None,
            1 => Some(0),
            _ => Some(self.level_start[d - 1] + (v - self.level_start[d]) / (self.z - 1)),
        }
    }

    /// Position of `v` among its parent's children.
    pub fn child_index(&self, v: usize) -> Option<usize> {
        let p = self.parent(v)?;
        Some(v - self.children(p).start)
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.parent(v).into_iter().collect();
        out.extend(self.children(v));
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.children(v).len() + usize::from(self.parent(v).is_some())
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n_vertices()).map(|v| self.neighbors(v)).collect()
    }

    /// Unique path from `u` to `v`, both endpoints included.
    pub fn path(&self, u: usize, v: usize) -> Vec<usize> {
        let (mut a, mut b) = (u, v);
        let (mut up, mut down) = (vec![a], vec![b]);
        while self.depth_of(a) > self.depth_of(b) {
            a = self.parent(a).expect("deeper vertex has a parent");
            up.push(a);
        }
        while self.depth_of(b) > self.depth_of(a) {
            b = self.parent(b).expect("deeper vertex has a parent");
            down.push(b);
        }
        while a != b {
            a = self.parent(a).expect("not at origin");
            b = self.parent(b).expect("not at origin");
            up.push(a);
            down.push(b);
        }
        down.pop();
        up.extend(down.into_iter().rev());
        up
    }

    pub fn distance(&self, u: usize, v: usize) -> usize {
        self.path(u, v).len() - 1
    }

    /// Canonical label: "r" followed by the child index (base 36) of every
    /// step from the origin.
    pub fn label(&self, v: usize) -> String {
        let mut idx = Vec::new();
        let mut cur = v;
        while let Some(k) = self.child_index(cur) {
            idx.push(k);
            cur = self.parent(cur).expect("child has parent");
        }
        let mut s = String::from("r");
        for k in idx.into_iter().rev() {
            s.push(std::char::from_digit(k as u32, 36).expect("z <= 37"));
        }
        s
    }

    pub fn vertex_from_label(&self, label: &str) -> Result<usize> {
        let rest = label
            .strip_prefix('r')
            .ok_or_else(|| Error::Invalid(format!("vertex label '{label}' must start with 'r'")))?;
        let mut v = 0;
        for ch in rest.chars() {
            let k = ch
                .to_digit(36)
                .ok_or_else(|| Error::Invalid(format!("bad vertex label '{label}'")))?
                as usize;
            let c = self.children(v);
            if k >= c.len() {
                return Err(Error::Invalid(format!("vertex label '{label}' leaves the tree")));
            }
            v = c.start + k;
        }
        Ok(v)
    }

    /// z[(z−1)^r − 1]/(z−2): number of sites in the unrooted light cone of
    /// radius r (r for z = 2).
    pub fn n_lightcone(z: usize, r: usize) -> usize {
        if z == 2 {
            return 2 * r;
        }
        z * ((z - 1).pow(r as u32) - 1) / (z - 2)
    }
}

/// A z-site cluster: `members[0]` is the hub (leg 1), the remaining members
/// are the leaf-side sites in increasing vertex order (legs 2..=z).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cluster {
    pub color: Color,
    pub members: Vec<usize>,
}

impl Cluster {
    pub fn hub(&self) -> usize {
        self.members[0]
    }

    /// 1-based leg of `v` in this cluster.
    pub fn leg_of(&self, v: usize) -> Option<usize> {
        self.members.iter().position(|&m| m == v).map(|p| p + 1)
    }
}

/// Edge 2-coloring of a tree. Each vertex v has one "pointer" neighbour
/// f(v): the hub of the cluster in which v is a leaf-side member. Every
/// other incident edge belongs to v's own cluster (v is its hub), whose
/// color is the parity of v's depth.
///
/// In the rooted tree f(v) is the parent (the root's pointer lies outside
/// the tree). In the unrooted tree the origin has z neighbours, so one of
/// its edges must belong to a child's cluster: along the ray of first
/// children f(v) is the first child, elsewhere the parent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoColoring {
    tree: CayleyTree,
}

impl TwoColoring {
    pub fn new(tree: &CayleyTree) -> Self {
        Self { tree: tree.clone() }
    }

    pub fn tree(&self) -> &CayleyTree {
        &self.tree
    }

    pub fn on_ray(&self, v: usize) -> bool {
        !self.tree.rooted && v == self.tree.level_start[self.tree.depth_of(v)]
    }

    pub fn pointer(&self, v: usize) -> Option<usize> {
        if self.on_ray(v) {
            let c = self.tree.children(v);
            (!c.is_empty()).then_some(c.start)
        } else {
            self.tree.parent(v)
        }
    }

    pub fn hub_color(&self, h: usize) -> Color {
        Color::of_depth(self.tree.depth_of(h))
    }

    /// Members of the cluster hubbed at `h`, whether or not complete.
    fn raw_members(&self, h: usize) -> Vec<usize> {
        let mut leaves: Vec<usize> = self
            .tree
            .neighbors(h)
            .into_iter()
            .filter(|&w| self.pointer(w) == Some(h))
            .collect();
        leaves.sort_unstable();
        let mut m = vec![h];
        m.extend(leaves);
        m
    }

    /// The cluster hubbed at `h`, if it has all z members inside the tree.
    pub fn cluster_with_hub(&self, h: usize) -> Option<Cluster> {
        let members = self.raw_members(h);
        (members.len() == self.tree.z).then(|| Cluster {
            color: self.hub_color(h),
            members,
        })
    }

    /// Hub of the cluster of color `c` containing `v` (the cluster may be
    /// incomplete or lie outside the tree).
    pub fn hub_of(&self, v: usize, c: Color) -> Option<usize> {
        if self.hub_color(v) == c {
            Some(v)
        } else {
            self.pointer(v)
        }
    }

    /// Complete cluster of color `c` containing `v`.
    pub fn cluster_of(&self, v: usize, c: Color) -> Option<Cluster> {
        self.hub_of(v, c).and_then(|h| self.cluster_with_hub(h))
    }

    /// Every complete cluster of color `c`, ordered by hub.
    pub fn clusters(&self, c: Color) -> Vec<Cluster> {
        (0..self.tree.n_vertices())
            .filter(|&h| self.hub_color(h) == c)
            .filter_map(|h| self.cluster_with_hub(h))
            .collect()
    }

    /// Hub of the cluster containing edge (u, v).
    pub fn edge_hub(&self, u: usize, v: usize) -> Result<usize> {
        if self.pointer(u) == Some(v) {
            Ok(v)
        } else if self.pointer(v) == Some(u) {
            Ok(u)
        } else {
            Err(Error::Invalid(format!("{u} and {v} are not adjacent")))
        }
    }

    pub fn edge_color(&self, u: usize, v: usize) -> Result<Color> {
        Ok(self.hub_color(self.edge_hub(u, v)?))
    }

    /// Sites reached after each step by an operator starting at `origin`:
    /// entry τ is the support after τ steps (entry 0 = {origin}).
    pub fn lightcone_sets(&self, origin: usize, first: Color, steps: usize) -> Vec<BTreeSet<usize>> {
        let mut sets = vec![BTreeSet::from([origin])];
        for tau in 1..=steps {
            let c = Color::at_step(first, tau);
            let prev = &sets[tau - 1];
            let mut next = prev.clone();
            let hubs: BTreeSet<usize> = prev.iter().filter_map(|&v| self.hub_of(v, c)).collect();
            for h in hubs {
                if let Some(cl) = self.cluster_with_hub(h) {
                    next.extend(cl.members);
                }
            }
            sets.push(next);
        }
        sets
    }

    /// First step at which an operator from `i` can reach `j`, by layered
    /// reachability.
    pub fn arrival_time_bfs(&self, i: usize, j: usize, first: Color, max_steps: usize) -> Option<usize> {
        let mut cur: HashSet<usize> = HashSet::from([i]);
        if i == j {
            return Some(0);
        }
        for tau in 1..=max_steps {
            let c = Color::at_step(first, tau);
            let hubs: HashSet<usize> = cur.iter().filter_map(|&v| self.hub_of(v, c)).collect();
            for h in hubs {
                if let Some(cl) = self.cluster_with_hub(h) {
                    cur.extend(cl.members);
                }
            }
            if cur.contains(&j) {
                return Some(tau);
            }
        }
        None
    }

    /// Leg-annotated light-cone path from `i` to `j`.
    pub fn path_to_channel_sequence(&self, i: usize, j: usize, first: Color) -> Result<LightConePath> {
        if i == j {
            return Err(Error::Invalid("light-cone path needs distinct endpoints".into()));
        }
        let verts = self.tree.path(i, j);
        let mut runs: Vec<(usize, usize, usize)> = Vec::new(); // (hub, from, to)
        for w in verts.windows(2) {
            let h = self.edge_hub(w[0], w[1])?;
            match runs.last_mut() {
                Some(last) if last.0 == h => last.2 = w[1],
                _ => runs.push((h, w[0], w[1])),
            }
        }
        let mut steps = Vec::new();
        let first_run_color = self.hub_color(runs[0].0);
        if first_run_color != first {
            let cl = self.cluster_of(i, first).ok_or_else(|| incomplete(i))?;
            let leg = cl.leg_of(i).expect("member");
            steps.push(PathStep {
                from: i,
                to: i,
                hub: cl.hub(),
                color: first,
                e: leg,
                e_tilde: leg,
            });
        }
        for (h, from, to) in runs {
            let cl = self.cluster_with_hub(h).ok_or_else(|| incomplete(h))?;
            steps.push(PathStep {
                from,
                to,
                hub: h,
                color: cl.color,
                e: cl.leg_of(from).expect("member"),
                e_tilde: cl.leg_of(to).expect("member"),
            });
        }
        let mut vertices = vec![i];
        vertices.extend(steps.iter().map(|s| s.to));
        Ok(LightConePath {
            z: self.tree.z,
            vertices,
            steps,
            first_layer: first,
        })
    }

    /// Number of steps for an operator at `i` to reach `j`: one per maximal
    /// same-color run of path edges, plus one initial wait when the first
    /// run's color differs from the first layer.
    pub fn arrival_time(&self, i: usize, j: usize, first: Color) -> Result<usize> {
        if i == j {
            return Ok(0);
        }
        let verts = self.tree.path(i, j);
        let mut hubs: Vec<usize> = Vec::new();
        for w in verts.windows(2) {
            let h = self.edge_hub(w[0], w[1])?;
            if self.cluster_with_hub(h).is_none() {
                return Err(incomplete(h));
            }
            if hubs.last() != Some(&h) {
                hubs.push(h);
            }
        }
        Ok(hubs.len() + usize::from(self.hub_color(hubs[0]) != first))
    }

    /// Serializable adjacency plus per-edge colors (child, parent, color).
    pub fn to_json(&self) -> TreeJson {
        let t = &self.tree;
        let edges = (1..t.n_vertices())
            .map(|v| {
                let p = t.parent(v).expect("non-origin");
                (p, v, self.edge_color(p, v).expect("adjacent"))
            })
            .collect();
        TreeJson {
            z: t.z,
            depth: t.depth,
            rooted: t.rooted,
            labels: (0..t.n_vertices()).map(|v| t.label(v)).collect(),
            edges,
        }
    }
}

fn incomplete(v: usize) -> Error {
    Error::Invalid(format!("path uses an incomplete boundary cluster at vertex {v}"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeJson {
    pub z: usize,
    pub depth: usize,
    pub rooted: bool,
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize, Color)>,
}

/// One step of a light-cone path: the gate hubbed at `hub` moves the
/// operator from leg `e` (vertex `from`) to leg `e_tilde` (vertex `to`).
/// A step with `from == to` is a wait step (e = ẽ).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub from: usize,
    pub to: usize,
    pub hub: usize,
    pub color: Color,
    pub e: usize,
    pub e_tilde: usize,
}

impl PathStep {
    pub fn is_wait(&self) -> bool {
        self.from == self.to
    }

    pub fn is_leaf_to_leaf(&self) -> bool {
        !self.is_wait() && self.e > 1 && self.e_tilde > 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LightConePath {
    pub z: usize,
    /// Vertex after each step (t + 1 entries, repeats at wait steps).
    pub vertices: Vec<usize>,
    pub steps: Vec<PathStep>,
    pub first_layer: Color,
}

impl LightConePath {
    pub fn t(&self) -> usize {
        self.steps.len()
    }

    pub fn leg_pairs(&self) -> Vec<(usize, usize)> {
        self.steps.iter().map(|s| (s.e, s.e_tilde)).collect()
    }

    pub fn has_wait(&self) -> bool {
        self.steps.iter().any(PathStep::is_wait)
    }

    pub fn leaf_to_leaf_count(&self) -> usize {
        self.steps.iter().filter(|s| s.is_leaf_to_leaf()).count()
    }

    /// Synthetic path of `t` identical steps (e, ẽ), for channel products
    /// along constant-direction paths.
    pub fn constant(z: usize, e: usize, e_tilde: usize, t: usize) -> Self {
        Self {
            z,
            vertices: vec![0; t + 1],
            steps: (0..t)
                .map(|k| PathStep {
                    from: 0,
                    to: 0,
                    hub: 0,
                    color: Color::at_step(Color::A, k + 1),
                    e,
                    e_tilde,
                })
                .collect(),
            first_layer: Color::A,
        }
    }
}

// ---------------------------------------------------------------------------
// 2-site brickwork geometry

/// Proper edge coloring with z colors on the unrooted tree: the origin's
/// k-th child edge has color k, and the children of any other vertex take
/// the colors different from its parent edge, in increasing order. At step
/// τ the gates on edges of color (τ−1) mod z act.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZColoring2Site {
    tree: CayleyTree,
}

/// One hop of a 2-site path with the number of steps the operator waits
/// at `from` before hopping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hop {
    pub from: usize,
    pub to: usize,
    pub color: usize,
    pub wait: usize,
}

impl ZColoring2Site {
    pub fn new(tree: &CayleyTree) -> Result<Self> {
        if tree.is_rooted() {
            return Err(Error::Unsupported("the z-coloring is defined on the unrooted tree".into()));
        }
        Ok(Self { tree: tree.clone() })
    }

    pub fn tree(&self) -> &CayleyTree {
        &self.tree
    }

    /// Color of the edge between `v` and its parent.
    pub fn parent_edge_color(&self, v: usize) -> usize {
        let p = self.tree.parent(v).expect("non-origin vertex");
        let k = self.tree.child_index(v).expect("non-origin vertex");
        if p == 0 {
            k
        } else {
            let pc = self.parent_edge_color(p);
            if k < pc {
                k
            } else {
                k + 1
            }
        }
    }

    pub fn edge_color(&self, u: usize, v: usize) -> Result<usize> {
        if self.tree.parent(v) == Some(u) {
            Ok(self.parent_edge_color(v))
        } else if self.tree.parent(u) == Some(v) {
            Ok(self.parent_edge_color(u))
        } else {
            Err(Error::Invalid(format!("{u} and {v} are not adjacent")))
        }
    }

    pub fn step_color(&self, tau: usize) -> usize {
        (tau - 1) % self.tree.z
    }

    /// Edges (parent, child) of the given color.
    pub fn edges_of_color(&self, c: usize) -> Vec<(usize, usize)> {
        (1..self.tree.n_vertices())
            .filter(|&v| self.parent_edge_color(v) == c)
            .map(|v| (self.tree.parent(v).expect("non-origin"), v))
            .collect()
    }

    /// Hops of the fastest light-cone path from `i` to `j` with their wait
    /// counts. The first hop waits (c₁ − 0) mod z steps; later hops wait
    /// (c' − c − 1) mod z steps (at most z − 2).
    pub fn classify_path(&self, i: usize, j: usize) -> Result<Vec<Hop>> {
        let z = self.tree.z;
        let verts = self.tree.path(i, j);
        let mut hops = Vec::new();
        let mut next_color = 0usize;
        for w in verts.windows(2) {
            let c = self.edge_color(w[0], w[1])?;
            let wait = (c + z - next_color) % z;
            hops.push(Hop {
                from: w[0],
                to: w[1],
                color: c,
                wait,
            });
            next_color = (c + 1) % z;
        }
        Ok(hops)
    }

    /// Arrival time: hops plus waits.
    pub fn arrival_time(&self, i: usize, j: usize) -> Result<usize> {
        Ok(self.classify_path(i, j)?.iter().map(|h| 1 + h.wait).sum())
    }

    /// Vertex at depth `d` reached from the origin by always hopping
    /// without waiting.
    pub fn fastest_descendant(&self, d: usize) -> usize {
        let mut v = 0;
        for step in 0..d.min(self.tree.depth) {
            let want = step % self.tree.z;
            v = self
                .tree
                .children(v)
                .find(|&c| self.parent_edge_color(c) == want)
                .expect("every color present below an interior vertex");
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let t = CayleyTree::new(3, 7, false).unwrap();
        assert_eq!(t.ball(7).len(), 1 + CayleyTree::n_lightcone(3, 7));
        assert_eq!(CayleyTree::n_lightcone(3, 7), 381);
        let r = CayleyTree::new(3, 7, true).unwrap();
        assert_eq!(r.n_vertices(), 255);
        let line = CayleyTree::new(2, 4, false).unwrap();
        assert_eq!(line.n_vertices(), 9);
        for v in 0..line.n_vertices() {
            assert!(line.degree(v) <= 2);
        }
    }

    #[test]
    fn parent_child_consistency() {
        for rooted in [false, true] {
            let t = CayleyTree::new(4, 4, rooted).unwrap();
            for v in 0..t.n_vertices() {
                for c in t.children(v) {
                    assert_eq!(t.parent(c), Some(v));
                    assert_eq!(t.depth_of(c), t.depth_of(v) + 1);
                }
                assert_eq!(t.vertex_from_label(&t.label(v)).unwrap(), v);
                if t.depth_of(v) < t.depth() && v != 0 {
                    assert_eq!(t.degree(v), 4);
                }
            }
        }
    }

    #[test]
    fn every_interior_vertex_in_two_clusters() {
        for (z, d) in [(3, 4), (4, 3), (2, 5)] {
            let t = CayleyTree::new(z, d, false).unwrap();
            let col = TwoColoring::new(&t);
            for v in 0..t.n_vertices() {
                if t.depth_of(v) + 1 >= d {
                    continue;
                }
                let a = col.cluster_of(v, Color::A).expect("complete");
                let b = col.cluster_of(v, Color::B).expect("complete");
                assert!(a.members.contains(&v) && b.members.contains(&v));
                assert_eq!(a.members.len(), z);
            }
        }
    }

    #[test]
    fn arrival_bound_and_single_turn() {
        let t = CayleyTree::new(3, 4, true).unwrap();
        let col = TwoColoring::new(&t);
        for i in 0..t.n_vertices() {
            for j in 0..t.n_vertices() {
                if i == j {
                    continue;
                }
                for first in [Color::A, Color::B] {
                    let at = col.arrival_time(i, j, first).unwrap();
                    let r = t.distance(i, j);
                    assert!(at + 1 >= r && at <= r + 1);
                    assert_eq!(col.arrival_time_bfs(i, j, first, 20), Some(at));
                    // waits at the root or a boundary leaf need a cluster outside the tree
                    if let Ok(p) = col.path_to_channel_sequence(i, j, first) {
                        assert_eq!(p.t(), at);
                        assert!(p.leaf_to_leaf_count() <= 1);
                    } else {
                        assert!(i == 0 || t.depth_of(i) == t.depth());
                    }
                }
            }
        }
    }

    #[test]
    fn descending_path_is_constant_direction() {
        let t = CayleyTree::new(3, 5, true).unwrap();
        let col = TwoColoring::new(&t);
        let mut v = 0;
        for _ in 0..4 {
            v = t.children(v).last().unwrap();
        }
        let p = col.path_to_channel_sequence(0, v, Color::A).unwrap();
        assert_eq!(p.leg_pairs(), vec![(1, 3); 4]);
        let p = col.path_to_channel_sequence(v, 0, Color::B).unwrap();
        assert_eq!(p.leg_pairs(), vec![(3, 1); 4]);
        let w = t.children(t.parent(v).unwrap()).start;
        let p = col.path_to_channel_sequence(0, w, Color::A).unwrap();
        assert_eq!(p.leg_pairs(), vec![(1, 3), (1, 3), (1, 3), (1, 2)]);
    }

    #[test]
    fn unrooted_lightcone_sizes() {
        let t = CayleyTree::new(3, 8, false).unwrap();
        let col = TwoColoring::new(&t);
        let sets = col.lightcone_sets(0, Color::A, 6);
        for (r, s) in sets.iter().enumerate().skip(1) {
            assert_eq!(s.len(), CayleyTree::n_lightcone(3, r), "r={r}");
        }
    }

    #[test]
    fn z_coloring_is_proper() {
        let t = CayleyTree::new(3, 5, false).unwrap();
        let zc = ZColoring2Site::new(&t).unwrap();
        for v in 0..t.n_vertices() {
            let mut cols: Vec<usize> = t.neighbors(v).iter().map(|&w| zc.edge_color(v, w).unwrap()).collect();
            cols.sort_unstable();
            cols.dedup();
            assert_eq!(cols.len(), t.degree(v));
        }
        let f = zc.fastest_descendant(5);
        assert!(zc.classify_path(0, f).unwrap().iter().all(|h| h.wait == 0));
        assert_eq!(zc.arrival_time(0, f).unwrap(), 5);
    }
}
