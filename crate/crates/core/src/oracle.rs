//! Dense brute-force reference: exact Heisenberg evolution on light-cone
//! truncated trees, exact correlators and OTOCs, Pauli-string
//! decomposition, light-cone weights and the average-OTOC bound.
//!
//! Operators are full q^N × q^N matrices over the region's sites, local
//! site 0 most significant. A region keeps only the gates that can act
//! nontrivially on the quantity being computed: gates touching the forward
//! support of the evolved operator and, for two-point quantities, the
//! backward cone of the probe site.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::GateAssignment;
use crate::linalg::{
    conjugate_local, embed, ipow, mul_local_left, partial_trace_keep, trace, CMat, C64, ZERO,
};
use crate::pauli::{overlap, OperatorBasis};
use crate::tree::{Color, TwoColoring};

/// Largest composite dimension q^N a dense region may have.
pub const DEFAULT_DENSE_CAP: usize = 1 << 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionLayer {
    pub color: Color,
    /// Local site indices of each gate, in leg order.
    pub gates: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseRegion {
    q: usize,
    sites: Vec<usize>,
    layers: Vec<RegionLayer>,
}

/// Clusters applied at each step to an operator starting at `origin`,
/// with the support after every step.
fn forward_clusters(
    col: &TwoColoring,
    origin: usize,
    first: Color,
    steps: usize,
) -> Result<(Vec<Vec<Vec<usize>>>, Vec<BTreeSet<usize>>)> {
    let mut support = vec![BTreeSet::from([origin])];
    let mut clusters = Vec::with_capacity(steps);
    for tau in 1..=steps {
        let c = Color::at_step(first, tau);
        let prev = &support[tau - 1];
        let hubs: BTreeSet<usize> = prev.iter().filter_map(|&v| col.hub_of(v, c)).collect();
        let mut layer = Vec::new();
        let mut next = prev.clone();
        for h in hubs {
            let cl = col.cluster_with_hub(h).ok_or_else(|| {
                Error::Invalid(format!(
                    "light cone from {origin} leaves the tree at step {tau} (cluster at {h}); use a deeper tree"
                ))
            })?;
            next.extend(cl.members.iter().copied());
            layer.push(cl.members);
        }
        clusters.push(layer);
        support.push(next);
    }
    Ok((clusters, support))
}

impl DenseRegion {
    fn build(
        q: usize,
        first: Color,
        mut extra: BTreeSet<usize>,
        clusters: Vec<Vec<Vec<usize>>>,
        cap: usize,
    ) -> Result<Self> {
        for layer in &clusters {
            for c in layer {
                extra.extend(c.iter().copied());
            }
        }
        let sites: Vec<usize> = extra.into_iter().collect();
        let needed = (q as u128).checked_pow(sites.len() as u32).unwrap_or(u128::MAX);
        if needed > cap as u128 {
            return Err(Error::CapExceeded {
                needed: needed.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        let local = |v: usize| sites.binary_search(&v).expect("site in region");
        let layers = clusters
            .into_iter()
            .enumerate()
            .map(|(k, layer)| RegionLayer {
                color: Color::at_step(first, k + 1),
                gates: layer
                    .into_iter()
                    .map(|c| c.into_iter().map(local).collect())
                    .collect(),
            })
            .collect();
        Ok(Self { q, sites, layers })
    }

    /// Full forward light cone of `origin` after `steps` steps.
    pub fn forward(
        col: &TwoColoring,
        q: usize,
        origin: usize,
        first: Color,
        steps: usize,
        cap: usize,
    ) -> Result<Self> {
        let (clusters, _) = forward_clusters(col, origin, first, steps)?;
        Self::build(q, first, BTreeSet::from([origin]), clusters, cap)
    }

    /// Gates in the forward cone of `origin` and the backward cone of
    /// `target` (observed after `steps` steps).
    pub fn causal(
        col: &TwoColoring,
        q: usize,
        origin: usize,
        target: usize,
        first: Color,
        steps: usize,
        cap: usize,
    ) -> Result<Self> {
        let (mut clusters, _) = forward_clusters(col, origin, first, steps)?;
        let mut back = BTreeSet::from([target]);
        for layer in clusters.iter_mut().rev() {
            layer.retain(|c| c.iter().any(|v| back.contains(v)));
            for c in layer.iter() {
                back.extend(c.iter().copied());
            }
        }
        Self::build(q, first, BTreeSet::from([origin, target]), clusters, cap)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        ipow(self.q, self.sites.len())
    }

    pub fn layers(&self) -> &[RegionLayer] {
        &self.layers
    }

    pub fn local_index(&self, v: usize) -> Option<usize> {
        self.sites.binary_search(&v).ok()
    }

    fn local(&self, v: usize) -> Result<usize> {
        self.local_index(v)
            .ok_or_else(|| Error::Invalid(format!("vertex {v} is not in the dense region")))
    }

    /// Single-site operator on tree vertex `v`, embedded in the region.
    pub fn embed_site(&self, op: &CMat, v: usize) -> Result<CMat> {
        if op.shape() != (self.q, self.q) {
            return Err(Error::DimensionMismatch(format!("expected {q}x{q} operator", q = self.q)));
        }
        Ok(embed(op, self.q, self.n_sites(), &[self.local(v)?]))
    }
}

fn check_assignment(region: &DenseRegion, assign: &GateAssignment) -> Result<()> {
    assign.validate()?;
    if assign.q() != region.q {
        return Err(Error::DimensionMismatch(format!(
            "gate q = {} on a q = {} region",
            assign.q(),
            region.q
        )));
    }
    if let Some(g) = region.layers.iter().flat_map(|l| &l.gates).next() {
        if g.len() != assign.z() {
            return Err(Error::DimensionMismatch(format!(
                "{}-site gate on {}-site clusters",
                assign.z(),
                g.len()
            )));
        }
    }
    Ok(())
}

/// A_τ = L_τ† A_{τ−1} L_τ over the region's layers, starting from `op` on
/// vertex `origin`. Returns A after every step (entry 0 is the embedding).
pub fn heisenberg_evolve(
    region: &DenseRegion,
    assign: &GateAssignment,
    op: &CMat,
    origin: usize,
) -> Result<Vec<CMat>> {
    check_assignment(region, assign)?;
    let n = region.n_sites();
    let mut a = region.embed_site(op, origin)?;
    let mut out = vec![a.clone()];
    for layer in &region.layers {
        let g = assign.gate(layer.color).matrix();
        for sites in &layer.gates {
            a = conjugate_local(&a, g, region.q, n, sites);
        }
        out.push(a.clone());
    }
    Ok(out)
}

/// tr(A†A)/q^N.
pub fn normalized_norm_sq(a: &CMat) -> f64 {
    let d = a.nrows() as f64;
    a.iter().map(|x| x.norm_sqr()).sum::<f64>() / d
}

/// Reduced single-site operator tr_{≠v}(A)/q^{N−1}.
pub fn reduce_to_site(region: &DenseRegion, a: &CMat, v: usize) -> Result<CMat> {
    let n = region.n_sites();
    let k = region.local(v)?;
    Ok(partial_trace_keep(a, region.q, n, &[k]) / C64::from(ipow(region.q, n - 1) as f64))
}

/// c = tr[σ_β(j)† σ_α(i, t)]/q^N.
#[allow(clippy::too_many_arguments)]
pub fn correlator_exact(
    col: &TwoColoring,
    assign: &GateAssignment,
    first: Color,
    i: usize,
    j: usize,
    t: usize,
    alpha: &CMat,
    beta: &CMat,
    cap: usize,
) -> Result<C64> {
    let region = DenseRegion::causal(col, assign.q(), i, j, first, t, cap)?;
    let a = heisenberg_evolve(&region, assign, alpha, i)?.pop().expect("t+1 entries");
    overlap(beta, &reduce_to_site(&region, &a, j)?)
}

/// C = tr[σ_β(j) σ_α(i,t) σ_β(j) σ_α(i,t)]/q^N.
#[allow(clippy::too_many_arguments)]
pub fn otoc_exact(
    col: &TwoColoring,
    assign: &GateAssignment,
    first: Color,
    i: usize,
    j: usize,
    t: usize,
    alpha: &CMat,
    beta: &CMat,
    cap: usize,
) -> Result<f64> {
    let region = DenseRegion::causal(col, assign.q(), i, j, first, t, cap)?;
    let a = heisenberg_evolve(&region, assign, alpha, i)?.pop().expect("t+1 entries");
    Ok(otoc_value(&region, &a, beta, j)?.re)
}

/// tr[B A B A]/q^N with B = `beta` on vertex `v`.
pub fn otoc_value(region: &DenseRegion, a: &CMat, beta: &CMat, v: usize) -> Result<C64> {
    let k = region.local(v)?;
    let ba = mul_local_left(beta, a, region.q, region.n_sites(), &[k]);
    Ok(trace_of_square(&ba) / C64::from(a.nrows() as f64))
}

fn trace_of_square(m: &CMat) -> C64 {
    let n = m.nrows();
    let mut s = ZERO;
    for r in 0..n {
        for c in 0..n {
            s += m[(r, c)] * m[(c, r)];
        }
    }
    s
}

/// Coefficients c_S = tr(S† A)/q^N over product-basis strings; string
/// index Σ_k α_k (q²)^{N−1−k}.
pub fn pauli_decompose(a: &CMat, q: usize, n: usize, cap: usize) -> Result<Vec<C64>> {
    let d = ipow(q, n);
    if d > cap {
        return Err(Error::CapExceeded { needed: d, cap });
    }
    if a.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("{:?} operator for {n} sites", a.shape())));
    }
    let basis = OperatorBasis::new(q)?;
    let k = basis.coefficient_map();
    let q2 = q * q;
    // interleave (r_1 c_1 r_2 c_2 ...)
    let mut v = vec![ZERO; d * d];
    let rdig: Vec<Vec<usize>> = (0..d).map(|x| crate::linalg::digits(x, q, n)).collect();
    for r in 0..d {
        for c in 0..d {
            let idx = (0..n).fold(0, |acc, s| acc * q2 + rdig[r][s] * q + rdig[c][s]);
            v[idx] = a[(r, c)];
        }
    }
    let mut tmp = vec![ZERO; q2];
    for s in 0..n {
        let inner = ipow(q2, n - 1 - s);
        let outer = ipow(q2, s);
        for o in 0..outer {
            for i in 0..inner {
                let base = o * q2 * inner + i;
                for (alpha, t) in tmp.iter_mut().enumerate() {
                    *t = (0..q2).map(|p| k[(alpha, p)] * v[base + p * inner]).sum();
                }
                for (alpha, t) in tmp.iter().enumerate() {
                    v[base + alpha * inner] = *t;
                }
            }
        }
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    /// Weight on strings acting nontrivially somewhere in R.
    pub w: f64,
    /// w_n: weight on strings with exactly n non-identity sites in R.
    pub w_n: Vec<f64>,
    pub r_size: usize,
}

/// Weights of the coefficients `c` relative to R, given as local site
/// indices.
pub fn lightcone_weight(c: &[C64], q: usize, n: usize, r: &[usize]) -> WeightReport {
    let q2 = q * q;
    let mut w_n = vec![0.0; r.len() + 1];
    for (idx, x) in c.iter().enumerate() {
        let p = x.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let support = r
            .iter()
            .filter(|&&s| (idx / ipow(q2, n - 1 - s)) % q2 != 0)
            .count();
        w_n[support] += p;
    }
    WeightReport {
        w: w_n[1..].iter().sum(),
        w_n,
        r_size: r.len(),
    }
}

/// Ō averaged directly over the vertices in R and the q²−1 nontrivial
/// basis elements.
pub fn otoc_average_direct(region: &DenseRegion, a: &CMat, r: &[usize]) -> Result<f64> {
    let basis = OperatorBasis::new(region.q)?;
    let mut sum = 0.0;
    for &v in r {
        for b in &basis.elements()[1..] {
            sum += otoc_value(region, a, b, v)?.re;
        }
    }
    Ok(sum / (r.len() * (basis.len() - 1)) as f64)
}

/// Ō from the string coefficients, using that a string commutes with a
/// single-site Pauli iff it carries I or that Pauli there. Qubits only.
pub fn otoc_average_from_coefficients(c: &[C64], n: usize, r: &[usize]) -> Result<f64> {
    let q2 = 4usize;
    if c.len() != ipow(q2, n) {
        return Err(Error::DimensionMismatch("coefficient count".into()));
    }
    let qq = q2 as f64;
    let mut sum = 0.0;
    for &s in r {
        let stride = ipow(q2, n - 1 - s);
        let identity_weight: f64 = c
            .iter()
            .enumerate()
            .filter(|(idx, _)| (idx / stride) % q2 == 0)
            .map(|(_, x)| x.norm_sqr())
            .sum();
        sum += -(qq - 3.0) / (qq - 1.0) + 2.0 * (qq - 2.0) / (qq - 1.0) * identity_weight;
    }
    Ok(sum / r.len() as f64)
}

/// Right-hand side (2w/|R|)(q²−2)/(q²−1).
pub fn otoc_bound_rhs(w: f64, r_size: usize, q: usize) -> f64 {
    let qq = (q * q) as f64;
    2.0 * w / r_size as f64 * (qq - 2.0) / (qq - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub t: usize,
    pub w: f64,
    pub w_n: Vec<f64>,
    pub r_size: usize,
    pub o_bar_direct: f64,
    pub o_bar_coefficients: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn residual(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn two_way_gap(&self) -> f64 {
        (self.o_bar_direct - self.o_bar_coefficients).abs()
    }
}

/// Sites first reached at step t (the outermost light cone).
pub fn frontier(col: &TwoColoring, origin: usize, first: Color, t: usize) -> Result<Vec<usize>> {
    let (_, support) = forward_clusters(col, origin, first, t)?;
    if t == 0 {
        return Ok(vec![origin]);
    }
    Ok(support[t].difference(&support[t - 1]).copied().collect())
}

/// Evolve `op` from `origin` for t steps and evaluate the weight on the
/// outermost light cone, Ō both ways, and the bound. Qubits only.
pub fn otoc_average_and_bound(
    col: &TwoColoring,
    assign: &GateAssignment,
    first: Color,
    origin: usize,
    t: usize,
    op: &CMat,
    cap: usize,
) -> Result<BoundCheck> {
    if assign.q() != 2 {
        return Err(Error::Unsupported("the average-OTOC bound uses qubit Pauli strings".into()));
    }
    let region = DenseRegion::forward(col, 2, origin, first, t, cap)?;
    let a = heisenberg_evolve(&region, assign, op, origin)?.pop().expect("entries");
    let n = region.n_sites();
    let r_vertices = frontier(col, origin, first, t)?;
    let r: Vec<usize> = r_vertices
        .iter()
        .map(|&v| region.local(v))
        .collect::<Result<_>>()?;
    let c = pauli_decompose(&a, 2, n, cap)?;
    let weights = lightcone_weight(&c, 2, n, &r);
    let o_direct = otoc_average_direct(&region, &a, &r_vertices)?;
    let o_coeff = otoc_average_from_coefficients(&c, n, &r)?;
    let rhs = otoc_bound_rhs(weights.w, r.len(), 2);
    Ok(BoundCheck {
        t,
        w: weights.w,
        w_n: weights.w_n,
        r_size: r.len(),
        o_bar_direct: o_direct,
        o_bar_coefficients: o_coeff,
        lhs: 1.0 - o_direct,
        rhs,
    })
}

/// Weight on the outermost light cone after t steps, 1 − ‖tr_R A_t‖²,
/// computed without representing the outermost sites: each new gate of
/// step t is replaced by the map it induces on its single input site from
/// the previous support once its other outputs are traced out.
pub fn frontier_weight(
    col: &TwoColoring,
    assign: &GateAssignment,
    first: Color,
    origin: usize,
    t: usize,
    op: &CMat,
    cap: usize,
) -> Result<f64> {
    if t == 0 {
        return Ok(1.0);
    }
    let q = assign.q();
    let region = DenseRegion::forward(col, q, origin, first, t - 1, cap)?;
    let mut a = heisenberg_evolve(&region, assign, op, origin)?.pop().expect("entries");
    let a0 = normalized_norm_sq(&a);
    let n = region.n_sites();
    let c = Color::at_step(first, t);
    let g = assign.gate(c);
    let support: BTreeSet<usize> = region.sites().iter().copied().collect();
    let hubs: BTreeSet<usize> = support.iter().filter_map(|&v| col.hub_of(v, c)).collect();
    let mut reductions = Vec::new();
    for h in hubs {
        let cl = col
            .cluster_with_hub(h)
            .ok_or_else(|| Error::Invalid(format!("light cone leaves the tree at step {t}")))?;
        let inside: Vec<usize> = cl.members.iter().copied().filter(|v| support.contains(v)).collect();
        if inside.len() == cl.members.len() {
            let sites: Vec<usize> = inside.iter().map(|&v| region.local(v)).collect::<Result<_>>()?;
            a = conjugate_local(&a, g.matrix(), q, n, &sites);
        } else if inside.len() == 1 {
            let leg = cl.leg_of(inside[0]).expect("member");
            reductions.push((region.local(inside[0])?, leg));
        } else {
            return Err(Error::Invalid(format!(
                "cluster at {h} meets the support in {} sites",
                inside.len()
            )));
        }
    }
    for (site, leg) in reductions {
        let phi = stay_superoperator(g, leg)?;
        a = crate::linalg::apply_site_superop(&a, &phi, q, n, site);
    }
    Ok(1.0 - normalized_norm_sq(&a) / a0)
}

/// Y ↦ tr_{≠e}[U† Y(e) U]/q^{z−1} on row-major flattened q×q matrices.
fn stay_superoperator(g: &crate::gate::Gate, e: usize) -> Result<CMat> {
    let (q, z) = (g.q(), g.z());
    let m = g.matrix();
    let norm = C64::from(ipow(q, z - 1) as f64);
    let mut phi = CMat::zeros(q * q, q * q);
    for r in 0..q {
        for c in 0..q {
            let mut unit = CMat::zeros(q, q);
            unit[(r, c)] = C64::from(1.0);
            let p = m.adjoint() * embed(&unit, q, z, &[e - 1]) * m;
            let red = partial_trace_keep(&p, q, z, &[e - 1]) / norm;
            for r2 in 0..q {
                for c2 in 0..q {
                    phi[(r2 * q + c2, r * q + c)] = red[(r2, c2)];
                }
            }
        }
    }
    Ok(phi)
}

/// Correlators of the evolved operator with every single-site basis
/// element at every site of the forward cone: entry (vertex, β, value).
pub fn single_site_profile(
    col: &TwoColoring,
    assign: &GateAssignment,
    first: Color,
    origin: usize,
    t: usize,
    op: &CMat,
    cap: usize,
) -> Result<Vec<(usize, usize, C64)>> {
    let q = assign.q();
    let region = DenseRegion::forward(col, q, origin, first, t, cap)?;
    let a = heisenberg_evolve(&region, assign, op, origin)?.pop().expect("entries");
    let basis = OperatorBasis::new(q)?;
    let mut out = Vec::new();
    for &v in region.sites() {
        let red = reduce_to_site(&region, &a, v)?;
        for (beta, b) in basis.elements().iter().enumerate().skip(1) {
            out.push((v, beta, overlap(b, &red)?));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeProfile {
    pub t: usize,
    /// Largest |c| over sites reached before step t, all non-identity β.
    pub interior_max: f64,
    /// Largest |c| over sites first reached at step t.
    pub cone_max: f64,
    /// Neighbours of the origin whose branch holds a cone value above the
    /// threshold.
    pub live_branches: Vec<usize>,
    pub n_branches: usize,
}

impl ConeProfile {
    pub fn branch_fraction(&self) -> f64 {
        self.live_branches.len() as f64 / self.n_branches as f64
    }
}

/// Split the single-site correlators of the evolved operator into the
/// interior of the light cone and its outermost shell, and record which
/// branches around the origin carry cone values above `threshold`.
#[allow(clippy::too_many_arguments)]
pub fn cone_profile(
    col: &TwoColoring,
    assign: &GateAssignment,
    first: Color,
    origin: usize,
    t: usize,
    op: &CMat,
    threshold: f64,
    cap: usize,
) -> Result<ConeProfile> {
    let tree = col.tree();
    let sets = col.lightcone_sets(origin, first, t);
    let arrival = |v: usize| (0..=t).find(|&k| sets[k].contains(&v)).expect("site in the cone");
    let mut interior_max: f64 = 0.0;
    let mut cone_max: f64 = 0.0;
    let mut live = BTreeSet::new();
    for (v, _, c) in single_site_profile(col, assign, first, origin, t, op, cap)? {
        let m = c.norm();
        if arrival(v) < t {
            interior_max = interior_max.max(m);
        } else {
            cone_max = cone_max.max(m);
            if m > threshold && v != origin {
                live.insert(tree.path(origin, v)[1]);
            }
        }
    }
    Ok(ConeProfile {
        t,
        interior_max,
        cone_max,
        live_branches: live.into_iter().collect(),
        n_branches: tree.degree(origin),
    })
}

/// tr(A)/q^N, the identity component.
pub fn identity_component(a: &CMat) -> C64 {
    trace(a) / C64::from(a.nrows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::Gate;
    use crate::generation::{generate_tree_unitary, GenerationConfig};
    use crate::linalg::{haar_unitary, kron};
    use crate::pauli::{pauli_x, pauli_z};
    use crate::tree::CayleyTree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn haar(seed: u64) -> GateAssignment {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        GateAssignment::Uniform(Gate::new(2, 3, haar_unitary(8, &mut rng)).unwrap())
    }

    fn tu(seed: u64) -> GateAssignment {
        GateAssignment::Uniform(generate_tree_unitary(&GenerationConfig::new(2, 3, seed)).unwrap().gate)
    }

    fn coloring() -> TwoColoring {
        TwoColoring::new(&CayleyTree::new(3, 5, false).unwrap())
    }

    #[test]
    fn pauli_decompose_examples() {
        let x1 = kron(&pauli_x(), &CMat::identity(2, 2));
        let c = pauli_decompose(&x1, 2, 2, DEFAULT_DENSE_CAP).unwrap();
        // X on site 0: index 1·4 + 0
        assert!((c[4] - C64::from(1.0)).norm() < 1e-12);
        assert!((c.iter().map(|x| x.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = (kron(&pauli_x(), &pauli_z()) + kron(&pauli_z(), &pauli_x())) * C64::from(s);
        let c = pauli_decompose(&a, 2, 2, DEFAULT_DENSE_CAP).unwrap();
        assert!((c[4 + 3] - C64::from(s)).norm() < 1e-12);
        assert!((c[3 * 4 + 1] - C64::from(s)).norm() < 1e-12);
    }

    #[test]
    fn evolution_preserves_norm() {
        let col = coloring();
        let region = DenseRegion::forward(&col, 2, 0, Color::A, 2, DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(region.n_sites(), 9);
        let ops = heisenberg_evolve(&region, &haar(1), &pauli_x(), 0).unwrap();
        for a in &ops {
            assert!((normalized_norm_sq(a) - 1.0).abs() < 1e-12);
        }
        let c = pauli_decompose(&ops[2], 2, 9, DEFAULT_DENSE_CAP).unwrap();
        assert!((c.iter().map(|x| x.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(c.iter().all(|x| x.im.abs() < 1e-12));
    }

    #[test]
    fn causal_region_matches_forward() {
        let col = coloring();
        let assign = haar(2);
        let forward = DenseRegion::forward(&col, 2, 0, Color::B, 2, DEFAULT_DENSE_CAP).unwrap();
        let a = heisenberg_evolve(&forward, &assign, &pauli_x(), 0).unwrap().pop().unwrap();
        for &j in forward.sites() {
            let exact = correlator_exact(&col, &assign, Color::B, 0, j, 2, &pauli_x(), &pauli_z(), DEFAULT_DENSE_CAP)
                .unwrap();
            let full = overlap(&pauli_z(), &reduce_to_site(&forward, &a, j).unwrap()).unwrap();
            assert!((exact - full).norm() < 1e-12);
            let o1 = otoc_exact(&col, &assign, Color::B, 0, j, 2, &pauli_x(), &pauli_z(), DEFAULT_DENSE_CAP).unwrap();
            let o2 = otoc_value(&forward, &a, &pauli_z(), j).unwrap().re;
            assert!((o1 - o2).abs() < 1e-12);
        }
    }

    #[test]
    fn spacelike_pair() {
        let col = coloring();
        let assign = haar(3);
        // vertex 20 is outside the two-step cone of the origin
        let c = correlator_exact(&col, &assign, Color::A, 0, 20, 2, &pauli_x(), &pauli_z(), DEFAULT_DENSE_CAP).unwrap();
        assert!(c.norm() < 1e-14);
        let o = otoc_exact(&col, &assign, Color::A, 0, 20, 2, &pauli_x(), &pauli_z(), DEFAULT_DENSE_CAP).unwrap();
        assert!((o - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let col = coloring();
        let err = DenseRegion::forward(&col, 2, 0, Color::A, 3, DEFAULT_DENSE_CAP).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn bound_examples() {
        assert!((otoc_bound_rhs(1.0, 6, 2) - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(otoc_bound_rhs(0.0, 6, 2), 0.0);
    }

    #[test]
    fn tree_unitary_weight_is_one() {
        let col = coloring();
        let assign = tu(4);
        for first in [Color::A, Color::B] {
            for t in 1..=2 {
                let b = otoc_average_and_bound(&col, &assign, first, 0, t, &pauli_x(), DEFAULT_DENSE_CAP).unwrap();
                assert!((b.w - 1.0).abs() < 1e-10, "{b:?}");
                assert!(b.two_way_gap() < 1e-10);
                assert!(b.residual() >= -1e-10);
                let fw = frontier_weight(&col, &assign, first, 0, t, &pauli_x(), DEFAULT_DENSE_CAP).unwrap();
                assert!((fw - b.w).abs() < 1e-10);
            }
            let w3 = frontier_weight(&col, &assign, first, 0, 3, &pauli_x(), DEFAULT_DENSE_CAP).unwrap();
            assert!((w3 - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn generic_weight_reduction_agrees() {
        let col = coloring();
        let assign = haar(5);
        for t in 1..=2 {
            let b = otoc_average_and_bound(&col, &assign, Color::A, 0, t, &pauli_z(), DEFAULT_DENSE_CAP).unwrap();
            let fw = frontier_weight(&col, &assign, Color::A, 0, t, &pauli_z(), DEFAULT_DENSE_CAP).unwrap();
            assert!((fw - b.w).abs() < 1e-10);
            assert!(b.two_way_gap() < 1e-10);
            assert!(b.residual() >= -1e-10);
            assert!((b.w_n.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_fraction_follows_first_color() {
        let col = coloring();
        let assign = tu(3);
        let x = pauli_x();
        for (first, live) in [(Color::A, 2), (Color::B, 1)] {
            for t in 1..=2 {
                let p = cone_profile(&col, &assign, first, 0, t, &x, 1e-8, DEFAULT_DENSE_CAP).unwrap();
                assert!(p.interior_max < 1e-10, "{p:?}");
                assert_eq!(p.live_branches.len(), live, "{first:?} t={t}");
            }
        }
        let p = cone_profile(&col, &haar(9), Color::A, 0, 2, &x, 1e-8, DEFAULT_DENSE_CAP).unwrap();
        assert!(p.interior_max > 1e-3);
    }
}
