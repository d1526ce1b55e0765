//! Stabilizer simulation of Clifford circuits on Cayley trees.
//!
//! Two engines share the same circuit layouts. [`StabilizerTableau`] is a
//! dense bit-packed tableau over every vertex of a finite tree and is meant
//! for small trees and cross-checks. [`region_entropy`] works in the
//! Heisenberg picture: it evolves the 2|A| single-site Paulis of a region
//! backwards to t = 0 and counts, over GF(2), how many independent
//! syndromes they leave on the initial stabilizer group. Because the
//! initial group is maximal,
//!
//!   S_A = rank(K) − |A|,
//!
//! where row a of K lists the initial generators anticommuting with U†P_aU.
//! Only the backward light cone of A is ever touched, so the tree may be
//! far larger than what a dense tableau could hold.
//!
//! Entropies are in units of ln 2.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{CliffordMap, PauliString};
use crate::tree::{CayleyTree, Color, TwoColoring, ZColoring2Site};

// ---------------------------------------------------------------------------
// Circuit layouts

/// Where the initial GHZ blocks sit and which sites each gate acts on.
pub trait CircuitLayout {
    fn tree(&self) -> &CayleyTree;

    /// Sites of the initial GHZ block containing `v`, in leg order. A block
    /// of one site is the state |+⟩.
    fn block(&self, v: usize) -> Vec<usize>;

    /// Sites, in leg order, of the gate acting on `v` at step τ (1-based).
    /// `Ok(None)` means no gate touches `v` at that step; an error means the
    /// gate would need sites outside the finite tree.
    fn gate(&self, v: usize, tau: usize) -> Result<Option<Vec<usize>>>;

    /// Every gate of step τ, each listed once.
    fn layer(&self, tau: usize) -> Vec<Vec<usize>>;
}

/// z-site gates on the clusters of the edge 2-coloring, GHZ states on the
/// clusters of `ghz` and the first layer on the other color.
#[derive(Clone, Debug)]
pub struct ClusterLayout {
    coloring: TwoColoring,
    ghz: Color,
}

impl ClusterLayout {
    pub fn new(tree: &CayleyTree, ghz: Color) -> Self {
        Self {
            coloring: TwoColoring::new(tree),
            ghz,
        }
    }

    pub fn coloring(&self) -> &TwoColoring {
        &self.coloring
    }

    pub fn ghz_color(&self) -> Color {
        self.ghz
    }

    pub fn first_layer(&self) -> Color {
        self.ghz.other()
    }
}

impl CircuitLayout for ClusterLayout {
    fn tree(&self) -> &CayleyTree {
        self.coloring.tree()
    }

    fn block(&self, v: usize) -> Vec<usize> {
        match self.coloring.cluster_of(v, self.ghz) {
            Some(c) => c.members,
            None => vec![v],
        }
    }

    fn gate(&self, v: usize, tau: usize) -> Result<Option<Vec<usize>>> {
        let c = Color::at_step(self.first_layer(), tau);
        let Some(h) = self.coloring.hub_of(v, c) else {
            return Ok(None);
        };
        match self.coloring.cluster_with_hub(h) {
            Some(cl) => Ok(Some(cl.members)),
            None => Err(Error::Invalid(format!(
                "gate hubbed at {h} is cut by the tree boundary; use a deeper tree"
            ))),
        }
    }

    fn layer(&self, tau: usize) -> Vec<Vec<usize>> {
        self.coloring
            .clusters(Color::at_step(self.first_layer(), tau))
            .into_iter()
            .map(|c| c.members)
            .collect()
    }
}

/// 2-site gates on the edges of a proper z-edge-coloring, color (τ−1) mod z
/// at step τ, with Bell pairs on the edges of color z−1.
#[derive(Clone, Debug)]
pub struct BrickworkLayout {
    coloring: ZColoring2Site,
}

impl BrickworkLayout {
    pub fn new(tree: &CayleyTree) -> Result<Self> {
        Ok(Self {
            coloring: ZColoring2Site::new(tree)?,
        })
    }

    pub fn bell_color(&self) -> usize {
        self.coloring.tree().z() - 1
    }

    fn edge(&self, v: usize, color: usize) -> Option<Vec<usize>> {
        let tree = self.coloring.tree();
        if v != 0 && self.coloring.parent_edge_color(v) == color {
            let p = tree.parent(v).expect("non-origin vertex");
            return Some(vec![p, v]);
        }
        tree.children(v)
            .find(|&c| self.coloring.parent_edge_color(c) == color)
            .map(|c| vec![v, c])
    }
}

impl CircuitLayout for BrickworkLayout {
    fn tree(&self) -> &CayleyTree {
        self.coloring.tree()
    }

    fn block(&self, v: usize) -> Vec<usize> {
        self.edge(v, self.bell_color()).unwrap_or_else(|| vec![v])
    }

    fn gate(&self, v: usize, tau: usize) -> Result<Option<Vec<usize>>> {
        let tree = self.coloring.tree();
        let e = self.edge(v, self.coloring.step_color(tau));
        if e.is_none() && tree.depth_of(v) == tree.depth() {
            return Err(Error::Invalid(format!(
                "site {v} lies on the tree boundary; use a deeper tree"
            )));
        }
        Ok(e)
    }

    fn layer(&self, tau: usize) -> Vec<Vec<usize>> {
        self.coloring
            .edges_of_color(self.coloring.step_color(tau))
            .into_iter()
            .map(|(p, c)| vec![p, c])
            .collect()
    }
}

/// Distinct blocks covering every vertex, ordered by first member.
fn all_blocks(layout: &dyn CircuitLayout) -> Vec<Vec<usize>> {
    let mut seen = BTreeMap::new();
    for v in 0..layout.tree().n_vertices() {
        let b = layout.block(v);
        seen.entry(b[0]).or_insert(b);
    }
    seen.into_values().collect()
}

// ---------------------------------------------------------------------------
// Dense tableau

/// N commuting, independent Hermitian Pauli generators on N qubits. Row k
/// is (−1)^sign[k] · ⊗_v σ(x_v, z_v) with σ(1, 1) = Y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Vec<bool>,
}

fn get_bit(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(row: &mut [u64], i: usize, b: bool) {
    let m = 1u64 << (i % 64);
    if b {
        row[i / 64] |= m;
    } else {
        row[i / 64] &= !m;
    }
}

impl StabilizerTableau {
    /// All qubits in |0⟩.
    pub fn zero_state(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut t = Self {
            n,
            words,
            x: vec![0; n * words],
            z: vec![0; n * words],
            sign: vec![false; n],
        };
        for k in 0..n {
            set_bit(t.z_row_mut(k), k, true);
        }
        t
    }

    /// Product of GHZ states (|0…0⟩ + |1…1⟩)/√2 on disjoint blocks, with
    /// generators X^{⊗m} and Z_iZ_{i+1}. The blocks must partition 0..n.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut t = Self::zero_state(n);
        let mut covered = vec![false; n];
        let mut row = 0;
        for b in blocks {
            if b.is_empty() {
                return Err(Error::Invalid("empty GHZ block".into()));
            }
            for &v in b {
                if v >= n || covered[v] {
                    return Err(Error::Invalid(format!("site {v} repeated or out of range")));
                }
                covered[v] = true;
            }
            t.clear_row(row);
            for &v in b {
                set_bit(t.x_row_mut(row), v, true);
            }
            row += 1;
            for w in b.windows(2) {
                t.clear_row(row);
                set_bit(t.z_row_mut(row), w[0], true);
                set_bit(t.z_row_mut(row), w[1], true);
                row += 1;
            }
        }
        if row != n {
            return Err(Error::Invalid(format!("blocks cover {row} of {n} sites")));
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn clear_row(&mut self, k: usize) {
        self.x_row_mut(k).fill(0);
        self.z_row_mut(k).fill(0);
        self.sign[k] = false;
    }

    fn x_row(&self, k: usize) -> &[u64] {
        &self.x[k * self.words..(k + 1) * self.words]
    }

    fn z_row(&self, k: usize) -> &[u64] {
        &self.z[k * self.words..(k + 1) * self.words]
    }

    fn x_row_mut(&mut self, k: usize) -> &mut [u64] {
        &mut self.x[k * self.words..(k + 1) * self.words]
    }

    fn z_row_mut(&mut self, k: usize) -> &mut [u64] {
        &mut self.z[k * self.words..(k + 1) * self.words]
    }

    /// Generator k as (sign, x bits, z bits) per site.
    pub fn generator(&self, k: usize) -> (bool, Vec<bool>, Vec<bool>) {
        let xs = (0..self.n).map(|v| get_bit(self.x_row(k), v)).collect();
        let zs = (0..self.n).map(|v| get_bit(self.z_row(k), v)).collect();
        (self.sign[k], xs, zs)
    }

    fn symplectic(&self, a: usize, b: usize) -> bool {
        let mut acc = 0u32;
        for w in 0..self.words {
            acc += (self.x_row(a)[w] & self.z_row(b)[w]).count_ones();
            acc += (self.z_row(a)[w] & self.x_row(b)[w]).count_ones();
        }
        acc % 2 == 1
    }

    /// Errors unless the generators commute pairwise and are independent.
    pub fn check_invariants(&self) -> Result<()> {
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.symplectic(a, b) {
                    return Err(Error::Invalid(format!("generators {a} and {b} anticommute")));
                }
            }
        }
        let rows: Vec<Vec<u64>> = (0..self.n)
            .map(|k| [self.x_row(k), self.z_row(k)].concat())
            .collect();
        let rank = gf2_rank_dense(rows);
        if rank != self.n {
            return Err(Error::Invalid(format!("generator rank {rank} < {}", self.n)));
        }
        Ok(())
    }

    /// Conjugate every generator by a Clifford gate on `sites` (leg k+1 =
    /// sites[k]): g ↦ U g U†.
    pub fn apply(&mut self, map: &CliffordMap, sites: &[usize]) -> Result<()> {
        if map.n() != sites.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}-site map on {} sites",
                map.n(),
                sites.len()
            )));
        }
        for k in 0..self.n {
            let (mut lx, mut lz) = (0u32, 0u32);
            for (leg, &v) in sites.iter().enumerate() {
                lx |= u32::from(get_bit(self.x_row(k), v)) << leg;
                lz |= u32::from(get_bit(self.z_row(k), v)) << leg;
            }
            if lx == 0 && lz == 0 {
                continue;
            }
            let (img, flip) = conjugate_hermitian(map, lx, lz);
            for (leg, &v) in sites.iter().enumerate() {
                set_bit(self.x_row_mut(k), v, img.x >> leg & 1 == 1);
                set_bit(self.z_row_mut(k), v, img.z >> leg & 1 == 1);
            }
            self.sign[k] ^= flip;
        }
        Ok(())
    }

    /// Entanglement entropy of `region`: rank of the generators restricted
    /// to the region minus |A|.
    pub fn entropy(&self, region: &[usize]) -> usize {
        let region: BTreeSet<usize> = region.iter().copied().collect();
        let m = region.len();
        let words = (2 * m).div_ceil(64).max(1);
        let rows: Vec<Vec<u64>> = (0..self.n)
            .map(|k| {
                let mut r = vec![0u64; words];
                for (i, &v) in region.iter().enumerate() {
                    set_bit(&mut r, 2 * i, get_bit(self.x_row(k), v));
                    set_bit(&mut r, 2 * i + 1, get_bit(self.z_row(k), v));
                }
                r
            })
            .collect();
        gf2_rank_dense(rows) - m
    }
}

/// Image of the Hermitian string with masks (x, z) and whether its sign
/// flips relative to the Hermitian representative.
fn conjugate_hermitian(map: &CliffordMap, x: u32, z: u32) -> (PauliString, bool) {
    let img = map.apply(&PauliString::hermitian(x, z));
    let herm = PauliString::hermitian(img.x, img.z);
    let diff = (4 + img.phase as u32 - herm.phase as u32) % 4;
    debug_assert!(diff % 2 == 0, "Clifford image of a Hermitian string is Hermitian");
    (img, diff == 2)
}

/// Rank over GF(2) of bit-packed rows of equal length.
pub fn gf2_rank_dense(mut rows: Vec<Vec<u64>>) -> usize {
    let Some(words) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut rank = 0;
    for col in 0..words * 64 {
        let (w, m) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & m != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = std::mem::take(&mut rows[rank]);
        for row in rows.iter_mut().skip(rank + 1) {
            if row[w] & m != 0 {
                for (a, b) in row[w..].iter_mut().zip(&pivot[w..]) {
                    *a ^= b;
                }
            }
        }
        rows[rank] = pivot;
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Initial GHZ tableau for a layout covering the whole tree.
pub fn init_state(layout: &dyn CircuitLayout) -> Result<StabilizerTableau> {
    StabilizerTableau::from_blocks(layout.tree().n_vertices(), &all_blocks(layout))
}

/// GHZ states on every complete cluster of `state_color`; the remaining
/// sites start in |+⟩.
pub fn init_ghz(tree: &CayleyTree, state_color: Color) -> Result<StabilizerTableau> {
    init_state(&ClusterLayout::new(tree, state_color))
}

/// Apply steps 1..=steps of the layout with the same gate everywhere and
/// return the tableau after every step (entry 0 is the input).
pub fn run_circuit(
    tableau: &StabilizerTableau,
    layout: &dyn CircuitLayout,
    map: &CliffordMap,
    steps: usize,
) -> Result<Vec<StabilizerTableau>> {
    if tableau.n() != layout.tree().n_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "tableau has {} qubits, tree has {} sites",
            tableau.n(),
            layout.tree().n_vertices()
        )));
    }
    let mut out = vec![tableau.clone()];
    let mut cur = tableau.clone();
    for tau in 1..=steps {
        for sites in layout.layer(tau) {
            cur.apply(map, &sites)?;
        }
        out.push(cur.clone());
    }
    Ok(out)
}

/// KIM-type circuit: the same z-site Clifford on every cluster, colors
/// alternating from `first`.
pub fn run_kim_circuit(
    tableau: &StabilizerTableau,
    tree: &CayleyTree,
    map: &CliffordMap,
    steps: usize,
    first: Color,
) -> Result<Vec<StabilizerTableau>> {
    if map.n() != tree.z() {
        return Err(Error::DimensionMismatch(format!(
            "{}-site map on a z = {} tree",
            map.n(),
            tree.z()
        )));
    }
    run_circuit(tableau, &ClusterLayout::new(tree, first.other()), map, steps)
}

// ---------------------------------------------------------------------------
// Heisenberg-picture entropy

/// Sparse Pauli: site → bits (1 = X, 2 = Z).
type SparsePauli = HashMap<usize, u8>;

fn heisenberg_image(
    layout: &dyn CircuitLayout,
    inverse: &CliffordMap,
    mut p: SparsePauli,
    steps: usize,
) -> Result<SparsePauli> {
    for tau in (1..=steps).rev() {
        let mut gates: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in p.keys() {
            if let Some(g) = layout.gate(v, tau)? {
                gates.entry(g[0]).or_insert(g);
            }
        }
        for sites in gates.values() {
            let (mut lx, mut lz) = (0u32, 0u32);
            for (leg, v) in sites.iter().enumerate() {
                let b = p.get(v).copied().unwrap_or(0);
                lx |= u32::from(b & 1) << leg;
                lz |= u32::from(b >> 1) << leg;
            }
            let (img, _) = conjugate_hermitian(inverse, lx, lz);
            for (leg, &v) in sites.iter().enumerate() {
                let b = (img.x >> leg & 1) as u8 | ((img.z >> leg & 1) as u8) << 1;
                if b == 0 {
                    p.remove(&v);
                } else {
                    p.insert(v, b);
                }
            }
        }
    }
    Ok(p)
}

/// Initial generators anticommuting with `p`, as sorted column ids. Block
/// with first member h and k members contributes columns h·(z+1) + j: j = 0
/// for X^{⊗k}, j = i+1 for Z_iZ_{i+1}.
fn syndrome(layout: &dyn CircuitLayout, p: &SparsePauli) -> Vec<u64> {
    let stride = layout.tree().z() as u64 + 1;
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &v in p.keys() {
        let b = layout.block(v);
        blocks.entry(b[0]).or_insert(b);
    }
    let mut cols = Vec::new();
    for (h, b) in blocks {
        let bits: Vec<u8> = b.iter().map(|v| p.get(v).copied().unwrap_or(0)).collect();
        let base = h as u64 * stride;
        if bits.iter().filter(|&&x| x & 2 != 0).count() % 2 == 1 {
            cols.push(base);
        }
        for (i, w) in bits.windows(2).enumerate() {
            if (w[0] ^ w[1]) & 1 != 0 {
                cols.push(base + i as u64 + 1);
            }
        }
    }
    cols.sort_unstable();
    cols
}

fn xor_sorted(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Incremental GF(2) row echelon form over sparse rows keyed by their
/// smallest column.
#[derive(Default)]
struct SparseEchelon {
    pivots: HashMap<u64, Vec<u64>>,
}

impl SparseEchelon {
    fn insert(&mut self, mut row: Vec<u64>) -> bool {
        while let Some(&lead) = row.first() {
            match self.pivots.get(&lead) {
                Some(p) => row = xor_sorted(&row, p),
                None => {
                    self.pivots.insert(lead, row);
                    return true;
                }
            }
        }
        false
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Entropy of `region` after `steps` steps of the layout with the same
/// Clifford gate everywhere, from the layout's GHZ initial state.
pub fn region_entropy(
    layout: &dyn CircuitLayout,
    map: &CliffordMap,
    region: &[usize],
    steps: usize,
) -> Result<usize> {
    let inverse = map.inverse();
    let region: BTreeSet<usize> = region.iter().copied().collect();
    let mut echelon = SparseEchelon::default();
    for &v in &region {
        if v >= layout.tree().n_vertices() {
            return Err(Error::Invalid(format!("site {v} is not in the tree")));
        }
        for bits in [1u8, 2u8] {
            let img = heisenberg_image(layout, &inverse, HashMap::from([(v, bits)]), steps)?;
            echelon.insert(syndrome(layout, &img));
        }
    }
    Ok(echelon.rank() - region.len())
}

// ---------------------------------------------------------------------------
// Light-cone regions and closed-form curves

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeKind {
    /// Light cone of radius r around the origin of the unrooted tree,
    /// z-site gates.
    Unrooted,
    /// First r + 1 generations (depth ≤ r) of the rooted tree, z-site gates.
    Rooted,
    /// Depth ≤ r of the unrooted tree under the 2-site brickwork circuit.
    TwoSite,
}

/// Whether the region boundary cuts the initial GHZ states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryShift {
    /// No GHZ state crosses the boundary: S(0) = 0.
    Aligned,
    /// Every boundary cluster is a GHZ state: growth shifted by one step.
    Shifted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: TreeKind,
    pub center: usize,
    pub r: usize,
    pub shift: BoundaryShift,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub region: RegionSpec,
    /// Simulated S(t), t = 0..=T.
    pub entropy: Vec<usize>,
    /// Closed-form S(t).
    pub formula: Vec<f64>,
}

impl EntropyCurve {
    /// Steps where the simulation and the closed form disagree.
    pub fn mismatches(&self) -> Vec<usize> {
        self.entropy
            .iter()
            .zip(&self.formula)
            .enumerate()
            .filter(|(_, (&s, &f))| s as f64 != f)
            .map(|(t, _)| t)
            .collect()
    }

    pub fn matches(&self) -> bool {
        self.mismatches().is_empty()
    }
}

/// c·(z−1)^k·(1 − (z−1)^{−s})/(z−2), optionally capped, evaluated as an
/// exact fraction so integer values come out exact.
fn capped_growth(z: usize, c: u128, k: usize, s: usize, cap: Option<u128>) -> f64 {
    let b = (z - 1) as u128;
    let num = c * (b.pow((k + s) as u32) - b.pow(k as u32));
    let den = (z as u128 - 2) * b.pow(s as u32);
    match cap {
        Some(cap) if num >= cap * den => cap as f64,
        _ => num as f64 / den as f64,
    }
}

fn active_step(t: usize, shift: BoundaryShift) -> usize {
    let active = match shift {
        BoundaryShift::Aligned => t % 2 == 0,
        BoundaryShift::Shifted => t % 2 == 1,
    };
    if active {
        t
    } else {
        t + 1
    }
}

/// Unrooted light-cone region of radius r: growth z(z−1)^r/(z−2)·(1 −
/// (z−1)^{−t}) at the active parity, one step ahead at the other parity,
/// capped at z((z−1)^r − 1)/(z−2). The cap is reached at t = r.
pub fn unrooted_formula(z: usize, r: usize, t: usize, shift: BoundaryShift) -> f64 {
    let sat = z as u128 * ((z as u128 - 1).pow(r as u32) - 1) / (z as u128 - 2);
    capped_growth(z, z as u128, r, active_step(t, shift), Some(sat))
}

/// Rooted region of depth ≤ r: growth (z−1)^{r+1}/(z−2)·(1 − (z−1)^{−t}),
/// capped at ((z−1)^{r+1} − 1)/(z−2). The cap is reached at t = r or r + 1,
/// whichever has the inactive parity.
pub fn rooted_formula(z: usize, r: usize, t: usize, shift: BoundaryShift) -> f64 {
    let sat = ((z as u128 - 1).pow(r as u32 + 1) - 1) / (z as u128 - 2);
    capped_growth(z, 1, r + 1, active_step(t, shift), Some(sat))
}

/// 2-site brickwork from Bell pairs: (z−1)^r + 2(z−1)^r(1 − (z−1)^{−t})/(z−2)
/// for t ≤ r, constant afterwards.
pub fn two_site_formula(z: usize, r: usize, t: usize) -> f64 {
    let a = (z as u128 - 1).pow(r as u32);
    let grown = capped_growth(z, 2, r, t.min(r), None);
    a as f64 + grown
}

/// Light cone of radius r around the unrooted origin (first step on color
/// A) and the GHZ color realizing the requested boundary shift.
pub fn unrooted_region(tree: &CayleyTree, r: usize, shift: BoundaryShift) -> (Vec<usize>, Color) {
    let col = TwoColoring::new(tree);
    let sets = col.lightcone_sets(0, Color::A, r);
    let outer = Color::at_step(Color::A, r.max(1));
    // clusters of the last step's color are complete inside the cone
    let ghz = match shift {
        BoundaryShift::Aligned => outer,
        BoundaryShift::Shifted => outer.other(),
    };
    let region = if r == 0 {
        vec![0]
    } else {
        sets[r].iter().copied().collect()
    };
    (region, ghz)
}

/// Depth ≤ r of the rooted tree and the GHZ color realizing the shift.
pub fn rooted_region(tree: &CayleyTree, r: usize, shift: BoundaryShift) -> (Vec<usize>, Color) {
    // boundary edges belong to clusters hubbed at depth r
    let ghz = match shift {
        BoundaryShift::Aligned => Color::of_depth(r + 1),
        BoundaryShift::Shifted => Color::of_depth(r),
    };
    (tree.ball(r).collect(), ghz)
}

fn check_curve_args(z: usize, map: &CliffordMap, gate_sites: usize) -> Result<()> {
    if z < 3 {
        return Err(Error::Invalid(format!("entropy curves need z >= 3, got {z}")));
    }
    if map.n() != gate_sites {
        return Err(Error::DimensionMismatch(format!(
            "{}-site map, layout needs {gate_sites}",
            map.n()
        )));
    }
    Ok(())
}

/// Simulated and closed-form S(t), t = 0..=steps, for the z-site circuit
/// with gate `map` on a light-cone region of radius r.
pub fn entanglement_curve(
    kind: TreeKind,
    map: &CliffordMap,
    z: usize,
    r: usize,
    steps: usize,
    shift: BoundaryShift,
) -> Result<EntropyCurve> {
    check_curve_args(z, map, z)?;
    let depth = r + steps + 2;
    let (tree, region, ghz) = match kind {
        TreeKind::Unrooted => {
            let tree = CayleyTree::new(z, depth, false)?;
            let (region, ghz) = unrooted_region(&tree, r, shift);
            (tree, region, ghz)
        }
        TreeKind::Rooted => {
            let tree = CayleyTree::new(z, depth, true)?;
            let (region, ghz) = rooted_region(&tree, r, shift);
            (tree, region, ghz)
        }
        TreeKind::TwoSite => {
            return Err(Error::Invalid(
                "use entanglement_curve_2site for the brickwork circuit".into(),
            ))
        }
    };
    let layout = ClusterLayout::new(&tree, ghz);
    let mut entropy = Vec::with_capacity(steps + 1);
    let mut formula = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        entropy.push(region_entropy(&layout, map, &region, t)?);
        formula.push(match kind {
            TreeKind::Unrooted => unrooted_formula(z, r, t, shift),
            _ => rooted_formula(z, r, t, shift),
        });
    }
    Ok(EntropyCurve {
        region: RegionSpec {
            kind,
            center: 0,
            r,
            shift,
            size: region.len(),
        },
        entropy,
        formula,
    })
}

/// Simulated and closed-form S(t) for the 2-site brickwork circuit with
/// Bell pairs on the last color and region depth ≤ r.
pub fn entanglement_curve_2site(
    map: &CliffordMap,
    z: usize,
    r: usize,
    steps: usize,
) -> Result<EntropyCurve> {
    check_curve_args(z, map, 2)?;
    let tree = CayleyTree::new(z, r + steps + 2, false)?;
    let layout = BrickworkLayout::new(&tree)?;
    let region: Vec<usize> = tree.ball(r).collect();
    let mut entropy = Vec::with_capacity(steps + 1);
    let mut formula = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        entropy.push(region_entropy(&layout, map, &region, t)?);
        formula.push(two_site_formula(z, r, t));
    }
    Ok(EntropyCurve {
        region: RegionSpec {
            kind: TreeKind::TwoSite,
            center: 0,
            r,
            shift: BoundaryShift::Shifted,
            size: region.len(),
        },
        entropy,
        formula,
    })
}
