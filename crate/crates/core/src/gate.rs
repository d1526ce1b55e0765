//! The z-site gate, its index reshuffles, predicates and explicit
//! constructions.
//!
//! A gate is a q^z × q^z matrix with rows indexing outputs and columns
//! indexing inputs. Legs are numbered 1..=z in the public API; leg 1 is the
//! cluster hub (root side), legs 2..=z the leaf-side sites in canonical
//! child order.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    embed, identity, ipow, is_finite, kron_all, regroup, scaled_isometry_residual,
    unitarity_residual, CMat, Leg, C64, I, ONE, ZERO,
};
use crate::pauli::{pauli_x, pauli_y, pauli_z};
use crate::tree::Color;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Longitudinal field for which the kicked-Ising gate at J = b = π/4 is
/// Clifford (any multiple of π/2 works; π/8 does not).
pub const CLIFFORD_FIELD: f64 = std::f64::consts::FRAC_PI_2;

pub const GATE_LAYOUT: &str = "row-major outputs×inputs, site-1 most significant";

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    q: usize,
    z: usize,
    matrix: CMat,
}

impl Gate {
    pub fn new(q: usize, z: usize, matrix: CMat) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidDimension(q));
        }
        if z < 1 {
            return Err(Error::Invalid("z must be >= 1".into()));
        }
        let d = ipow(q, z);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "gate with q={q}, z={z} needs {d}x{d}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !is_finite(&matrix) {
            return Err(Error::Invalid("gate has non-finite entries".into()));
        }
        Ok(Self { q, z, matrix })
    }

    pub fn identity(q: usize, z: usize) -> Result<Self> {
        Self::new(q, z, identity(ipow(q, z)))
    }

    /// Gate acting as `op` on the listed legs (1-based) and trivially
    /// elsewhere.
    pub fn from_local(q: usize, z: usize, op: &CMat, legs: &[usize]) -> Result<Self> {
        check_legs(legs, z)?;
        if op.nrows() != ipow(q, legs.len()) || op.ncols() != op.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "local operator on {} legs must be {}x{}",
                legs.len(),
                ipow(q, legs.len()),
                ipow(q, legs.len())
            )));
        }
        let sites: Vec<usize> = legs.iter().map(|l| l - 1).collect();
        Self::new(q, z, embed(op, q, z, &sites))
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn adjoint(&self) -> Gate {
        Gate {
            q: self.q,
            z: self.z,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self · other`: `other` acts first.
    pub fn then_after(&self, other: &Gate) -> Result<Gate> {
        if self.q != other.q || self.z != other.z {
            return Err(Error::DimensionMismatch("composing gates of different shape".into()));
        }
        Gate::new(self.q, self.z, &self.matrix * &other.matrix)
    }

    pub fn to_file(&self, metadata: BTreeMap<String, serde_json::Value>) -> GateFile {
        GateFile {
            q: self.q,
            z: self.z,
            layout: GATE_LAYOUT.to_string(),
            entries: self.matrix_row_major().iter().map(|c| [c.re, c.im]).collect(),
            metadata,
        }
    }

    fn matrix_row_major(&self) -> Vec<C64> {
        let d = self.dim();
        let mut v = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                v.push(self.matrix[(r, c)]);
            }
        }
        v
    }

    pub fn to_json(&self, metadata: BTreeMap<String, serde_json::Value>) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file(metadata))?)
    }

    pub fn from_json(s: &str) -> Result<(Gate, BTreeMap<String, serde_json::Value>)> {
        let f: GateFile = serde_json::from_str(s)?;
        let g = f.to_gate()?;
        Ok((g, f.metadata))
    }

    pub fn load(path: &Path) -> Result<(Gate, BTreeMap<String, serde_json::Value>)> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Which gate acts on the clusters of each color.
#[derive(Clone, Debug, PartialEq)]
pub enum GateAssignment {
    Uniform(Gate),
    ByColor { a: Gate, b: Gate },
}

impl GateAssignment {
    pub fn gate(&self, color: Color) -> &Gate {
        match (self, color) {
            (GateAssignment::Uniform(g), _) => g,
            (GateAssignment::ByColor { a, .. }, Color::A) => a,
            (GateAssignment::ByColor { b, .. }, Color::B) => b,
        }
    }

    pub fn q(&self) -> usize {
        self.gate(Color::A).q()
    }

    pub fn z(&self) -> usize {
        self.gate(Color::A).z()
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.gate(Color::A), self.gate(Color::B));
        if a.q() != b.q() || a.z() != b.z() {
            return Err(Error::DimensionMismatch(format!(
                "color gates differ: (q={}, z={}) vs (q={}, z={})",
                a.q(),
                a.z(),
                b.q(),
                b.z()
            )));
        }
        Ok(())
    }
}

/// On-disk gate representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateFile {
    pub q: usize,
    pub z: usize,
    pub layout: String,
    pub entries: Vec<[f64; 2]>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl GateFile {
    pub fn to_gate(&self) -> Result<Gate> {
        if self.layout != GATE_LAYOUT {
            return Err(Error::Invalid(format!("unknown layout '{}'", self.layout)));
        }
        let d = ipow(self.q, self.z);
        if self.entries.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                d * d,
                self.entries.len()
            )));
        }
        let data: Vec<C64> = self.entries.iter().map(|e| C64::new(e[0], e[1])).collect();
        Gate::new(self.q, self.z, CMat::from_row_slice(d, d, &data))
    }
}

fn check_leg(leg: usize, z: usize) -> Result<()> {
    if leg == 0 || leg > z {
        Err(Error::LegOutOfRange { leg, z })
    } else {
        Ok(())
    }
}

fn check_legs(legs: &[usize], z: usize) -> Result<()> {
    for (k, &l) in legs.iter().enumerate() {
        check_leg(l, z)?;
        if legs[..k].contains(&l) {
            return Err(Error::Invalid(format!("leg {l} repeated")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateReport {
    pub passed: bool,
    pub residuals: Vec<Residual>,
    pub tolerance: f64,
}

impl PredicateReport {
    fn from_residuals(residuals: Vec<Residual>, tolerance: f64) -> Self {
        let passed = residuals.iter().all(|r| r.value < tolerance);
        Self {
            passed,
            residuals,
            tolerance,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }
}

/// Leg grouping of the tree-unitarity reshuffle for (1-based) leg `p`:
/// rows are every output and input leg except `p`, columns (out_p, in_p).
pub fn tree_condition_legs(z: usize, p: usize) -> (Vec<Leg>, Vec<Leg>) {
    let p0 = p - 1;
    let mut rows: Vec<Leg> = (0..z).filter(|&k| k != p0).map(Leg::Out).collect();
    rows.extend((0..z).filter(|&k| k != p0).map(Leg::In));
    (rows, vec![Leg::Out(p0), Leg::In(p0)])
}

/// Leg grouping of the maximum-velocity reshuffle for operator flow from
/// output leg `i` to input leg `j` (1-based): input `j` is exchanged with
/// output `i`.
pub fn max_velocity_legs(z: usize, i: usize, j: usize) -> (Vec<Leg>, Vec<Leg>) {
    let (i0, j0) = (i - 1, j - 1);
    let mut rows = vec![Leg::Out(i0)];
    rows.extend((0..z).filter(|&k| k != j0).map(Leg::In));
    let mut cols: Vec<Leg> = (0..z).filter(|&k| k != i0).map(Leg::Out).collect();
    cols.push(Leg::In(j0));
    (rows, cols)
}

/// The q^{2(z−1)} × q² matrix M_R(p).
pub fn reshuffle_tree(u: &Gate, p: usize) -> Result<CMat> {
    check_leg(p, u.z)?;
    let (rows, cols) = tree_condition_legs(u.z, p);
    Ok(regroup(&u.matrix, u.q, u.z, &rows, &cols))
}

/// The square reshuffle whose unitarity is the maximum-velocity condition
/// i → j.
pub fn reshuffle_max_velocity(u: &Gate, i: usize, j: usize) -> Result<CMat> {
    check_leg(i, u.z)?;
    check_leg(j, u.z)?;
    if i == j {
        return Err(Error::InvalidDirection { from: i, to: j });
    }
    let (rows, cols) = max_velocity_legs(u.z, i, j);
    Ok(regroup(&u.matrix, u.q, u.z, &rows, &cols))
}

/// Residual ‖M_R(p)† M_R(p) − q^{z−2}·1‖_F.
pub fn tree_condition_residual(u: &Gate, p: usize) -> Result<f64> {
    let m = reshuffle_tree(u, p)?;
    Ok(scaled_isometry_residual(&m, tree_scale_sq(u.q, u.z)))
}

/// q^{z−2}, as a real number so that z = 1 is harmless.
pub fn tree_scale_sq(q: usize, z: usize) -> f64 {
    (q as f64).powi(z as i32 - 2)
}

pub fn is_unitary(u: &Gate, tol: f64) -> PredicateReport {
    PredicateReport::from_residuals(
        vec![Residual {
            label: "unitarity".into(),
            value: unitarity_residual(&u.matrix),
        }],
        tol,
    )
}

/// Unitarity plus the z reshuffled isometry conditions.
pub fn is_tree_unitary(u: &Gate, tol: f64) -> PredicateReport {
    let mut res = vec![Residual {
        label: "unitarity".into(),
        value: unitarity_residual(&u.matrix),
    }];
    for p in 1..=u.z {
        res.push(Residual {
            label: format!("tree leg {p}"),
            value: tree_condition_residual(u, p).expect("leg in range"),
        });
    }
    PredicateReport::from_residuals(res, tol)
}

pub fn is_max_velocity(u: &Gate, i: usize, j: usize, tol: f64) -> Result<PredicateReport> {
    let m = reshuffle_max_velocity(u, i, j)?;
    Ok(PredicateReport::from_residuals(
        vec![Residual {
            label: format!("max velocity {i}->{j}"),
            value: unitarity_residual(&m),
        }],
        tol,
    ))
}

/// Maximum-velocity directions (i, j) that pass at `tol`.
pub fn max_velocity_directions(u: &Gate, tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 1..=u.z {
        for j in 1..=u.z {
            if i != j && is_max_velocity(u, i, j, tol).expect("valid legs").passed {
                out.push((i, j));
            }
        }
    }
    out
}

/// Unitarity across every balanced bipartition of the 2z legs. Each
/// bipartition is listed once, by the side containing output leg 1.
pub fn is_perfect_tensor(u: &Gate, tol: f64) -> PredicateReport {
    let z = u.z;
    let legs: Vec<Leg> = (0..z).map(Leg::Out).chain((0..z).map(Leg::In)).collect();
    let mut res = Vec::new();
    for mask in 0u32..(1u32 << (2 * z)) {
        if mask & 1 == 0 || mask.count_ones() as usize != z {
            continue;
        }
        let rows: Vec<Leg> = (0..2 * z).filter(|k| mask >> k & 1 == 1).map(|k| legs[k]).collect();
        let cols: Vec<Leg> = (0..2 * z).filter(|k| mask >> k & 1 == 0).map(|k| legs[k]).collect();
        let m = regroup(&u.matrix, u.q, z, &rows, &cols);
        res.push(Residual {
            label: format!("{rows:?}|{cols:?}"),
            value: unitarity_residual(&m),
        });
    }
    PredicateReport::from_residuals(res, tol)
}

/// Leg groupings of the three hexagonal unitarity conditions of a 3-site
/// gate. Legs sit on a hexagon in the cyclic order out1, out2, out3, in3,
/// in2, in1; each condition groups three consecutive legs.
pub fn triunitary_conditions() -> Vec<(Vec<Leg>, Vec<Leg>)> {
    let ring = [
        Leg::Out(0),
        Leg::Out(1),
        Leg::Out(2),
        Leg::In(2),
        Leg::In(1),
        Leg::In(0),
    ];
    (0..3)
        .map(|s| {
            let rows = (0..3).map(|k| ring[(s + k) % 6]).collect();
            let cols = (3..6).map(|k| ring[(s + k) % 6]).rev().collect();
            (rows, cols)
        })
        .collect()
}

pub fn is_triunitary(u: &Gate, tol: f64) -> Result<PredicateReport> {
    if u.z != 3 {
        return Err(Error::Unsupported("tri-unitarity is defined for z = 3".into()));
    }
    let res = triunitary_conditions()
        .iter()
        .enumerate()
        .map(|(k, (rows, cols))| Residual {
            label: format!("hexagon direction {k}"),
            value: unitarity_residual(&regroup(&u.matrix, u.q, 3, rows, cols)),
        })
        .collect();
    Ok(PredicateReport::from_residuals(res, tol))
}

// ---------------------------------------------------------------------------
// Pauli strings and Clifford conjugation tables (q = 2)

/// i^phase · X^x Z^z, with bit k of `x`/`z` acting on leg k+1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub x: u32,
    pub z: u32,
    pub phase: u8,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0, phase: 0 };

    pub fn x_on(k: usize) -> Self {
        Self { x: 1 << k, z: 0, phase: 0 }
    }

    pub fn z_on(k: usize) -> Self {
        Self { x: 0, z: 1 << k, phase: 0 }
    }

    /// Hermitian string with the given X and Z masks (Y where both are set).
    pub fn hermitian(x: u32, z: u32) -> Self {
        Self {
            x,
            z,
            phase: ((x & z).count_ones() % 4) as u8,
        }
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        let swap = 2 * (self.z & other.x).count_ones();
        PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: ((self.phase as u32 + other.phase as u32 + swap) % 4) as u8,
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Dense 2^n × 2^n matrix.
    pub fn to_matrix(&self, n: usize) -> CMat {
        let d = 1usize << n;
        let mut m = CMat::zeros(d, d);
        let xi = site_mask_to_index(self.x, n);
        let zi = site_mask_to_index(self.z, n);
        let ph = [ONE, I, -ONE, -I][self.phase as usize % 4];
        for c in 0..d {
            let sign = if (zi & c).count_ones() % 2 == 0 { ONE } else { -ONE };
            m[(c ^ xi, c)] = ph * sign;
        }
        m
    }
}

/// Reverse site order: bit k (leg k+1) becomes index bit n−1−k.
fn site_mask_to_index(mask: u32, n: usize) -> usize {
    let mut out = 0usize;
    for k in 0..n {
        if mask >> k & 1 == 1 {
            out |= 1 << (n - 1 - k);
        }
    }
    out
}

/// Conjugation action P ↦ U P U† of a Clifford gate, tabulated for every
/// Pauli string X^x Z^z on the gate's legs (index x | z << n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliffordMap {
    n: usize,
    table: Vec<PauliString>,
}

impl CliffordMap {
    pub fn identity(n: usize) -> Self {
        let mut table = Vec::with_capacity(1 << (2 * n));
        for idx in 0..1u32 << (2 * n) {
            table.push(PauliString {
                x: idx & ((1 << n) - 1),
                z: idx >> n,
                phase: 0,
            });
        }
        Self { n, table }
    }

    fn from_generators(n: usize, xs: &[PauliString], zs: &[PauliString]) -> Self {
        let mut table = Vec::with_capacity(1 << (2 * n));
        for idx in 0..1u32 << (2 * n) {
            let (x, z) = (idx & ((1 << n) - 1), idx >> n);
            let mut img = PauliString::IDENTITY;
            for k in 0..n {
                if x >> k & 1 == 1 {
                    img = img.mul(&xs[k]);
                }
            }
            for k in 0..n {
                if z >> k & 1 == 1 {
                    img = img.mul(&zs[k]);
                }
            }
            table.push(img);
        }
        Self { n, table }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn image_x(&self, k: usize) -> PauliString {
        self.table[1 << k]
    }

    pub fn image_z(&self, k: usize) -> PauliString {
        self.table[1 << (self.n + k)]
    }

    /// Image of an arbitrary string, phase included.
    pub fn apply(&self, p: &PauliString) -> PauliString {
        let img = self.table[(p.x | (p.z << self.n)) as usize];
        PauliString {
            phase: ((img.phase as u32 + p.phase as u32) % 4) as u8,
            ..img
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == CliffordMap::identity(self.n)
    }

    /// Conjugation table of U†·U (the inverse map).
    pub fn inverse(&self) -> CliffordMap {
        let mut table = vec![PauliString::IDENTITY; self.table.len()];
        for (idx, img) in self.table.iter().enumerate() {
            let key = (img.x | (img.z << self.n)) as usize;
            table[key] = PauliString {
                x: idx as u32 & ((1 << self.n) - 1),
                z: idx as u32 >> self.n,
                phase: ((4 - img.phase as u32) % 4) as u8,
            };
        }
        CliffordMap { n: self.n, table }
    }
}

/// Coefficient of `m` on the string X^x Z^z: tr((X^x Z^z)† m)/2^n.
fn pauli_coefficient(m: &CMat, x: u32, z: u32, n: usize) -> C64 {
    let d = 1usize << n;
    let xi = site_mask_to_index(x, n);
    let zi = site_mask_to_index(z, n);
    let mut acc = ZERO;
    for c in 0..d {
        let v = m[(c ^ xi, c)];
        if (zi & c).count_ones() % 2 == 0 {
            acc += v;
        } else {
            acc -= v;
        }
    }
    acc / d as f64
}

/// Single signed Pauli string equal to `m`, if there is one (coefficients 0
/// or unit-modulus in {±1, ±i} within 1e-10).
fn as_single_string(m: &CMat, n: usize) -> Option<PauliString> {
    let mut found = None;
    for z in 0..1u32 << n {
        for x in 0..1u32 << n {
            let c = pauli_coefficient(m, x, z, n);
            if c.norm() < 1e-10 {
                continue;
            }
            if found.is_some() {
                return None;
            }
            let phase = [ONE, I, -ONE, -I]
                .iter()
                .position(|p| (c - p).norm() < 1e-10)?;
            found = Some(PauliString {
                x,
                z,
                phase: phase as u8,
            });
        }
    }
    found
}

/// Conjugation table of U if U is Clifford, `None` otherwise.
pub fn is_clifford(u: &Gate) -> Result<Option<CliffordMap>> {
    if u.q != 2 {
        return Err(Error::Unsupported(format!("Clifford detection needs q = 2, got {}", u.q)));
    }
    let n = u.z;
    let ud = u.matrix.adjoint();
    let mut xs = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    for k in 0..n {
        for (gen, out) in [(PauliString::x_on(k), &mut xs), (PauliString::z_on(k), &mut zs)] {
            let img = &u.matrix * gen.to_matrix(n) * &ud;
            match as_single_string(&img, n) {
                Some(p) => out.push(p),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(CliffordMap::from_generators(n, &xs, &zs)))
}

// ---------------------------------------------------------------------------
// Constructions

/// Kicked-Ising gate parameters (angles in radians).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KimParams {
    pub z: usize,
    pub j: f64,
    pub b: f64,
    pub h: Vec<f64>,
}

impl KimParams {
    /// The self-dual point J = b = π/4 with uniform field.
    pub fn self_dual(z: usize, h: f64) -> Self {
        let a = std::f64::consts::FRAC_PI_4;
        Self {
            z,
            j: a,
            b: a,
            h: vec![h; z],
        }
    }
}

/// exp(−iJ Z_a Z_b − i(h_a Z_a + h_b Z_b)/2) on legs a, b of a z-site gate
/// (diagonal).
fn ising_factor(z: usize, a: usize, b: usize, j: f64, ha: f64, hb: f64) -> Vec<C64> {
    let d = 1usize << z;
    (0..d)
        .map(|idx| {
            let s = |leg: usize| if idx >> (z - 1 - leg) & 1 == 0 { 1.0 } else { -1.0 };
            let (sa, sb) = (s(a), s(b));
            let phase = -(j * sa * sb + (ha * sa + hb * sb) / 2.0);
            C64::from_polar(1.0, phase)
        })
        .collect()
}

fn kick(b: f64) -> CMat {
    identity(2) * C64::from(b.cos()) - pauli_y() * (I * b.sin())
}

fn ising_kick_ising(z: usize, j: f64, b: f64, h: &[f64], pairs: &[(usize, usize)]) -> CMat {
    let d = 1usize << z;
    let mut diag = vec![ONE; d];
    for &(a, c) in pairs {
        for (x, f) in diag.iter_mut().zip(ising_factor(z, a, c, j, h[a], h[c])) {
            *x *= f;
        }
    }
    let k = kron_all(&vec![kick(b); z]);
    let mut u = k;
    for r in 0..d {
        for c in 0..d {
            u[(r, c)] *= diag[r] * diag[c];
        }
    }
    u
}

/// U = ∏ I_{1k} · ∏_j K_j · ∏ I_{1k} with Ising factors on the hub–leaf
/// bonds (1, k), k = 2..=z.
pub fn kim_gate(p: &KimParams) -> Result<Gate> {
    if p.z < 2 {
        return Err(Error::Invalid("kicked Ising gate needs z >= 2".into()));
    }
    if p.h.len() != p.z {
        return Err(Error::DimensionMismatch(format!(
            "need {} fields, got {}",
            p.z,
            p.h.len()
        )));
    }
    let pairs: Vec<(usize, usize)> = (1..p.z).map(|k| (0, k)).collect();
    Gate::new(2, p.z, ising_kick_ising(p.z, p.j, p.b, &p.h, &pairs))
}

/// Same as [`kim_gate`] but with Ising factors between all pairs of legs.
pub fn hadamard_construction_gate(z: usize, h: &[f64]) -> Result<Gate> {
    if z < 2 || h.len() != z {
        return Err(Error::Invalid(format!("need z >= 2 and z fields (z = {z})")));
    }
    let a = std::f64::consts::FRAC_PI_4;
    let mut pairs = Vec::new();
    for i in 0..z {
        for k in i + 1..z {
            pairs.push((i, k));
        }
    }
    Gate::new(2, z, ising_kick_ising(z, a, a, h, &pairs))
}

/// SWAP of two q-level sites.
pub fn swap_matrix(q: usize) -> CMat {
    let mut m = CMat::zeros(q * q, q * q);
    for a in 0..q {
        for b in 0..q {
            m[(b * q + a, a * q + b)] = ONE;
        }
    }
    m
}

/// Qubit dual-unitary gate (u₁⊗u₂)·exp(−i(π/4 XX + π/4 YY + J ZZ))·(v₁⊗v₂).
pub fn dual_unitary_qubit(jz: f64, before: [&CMat; 2], after: [&CMat; 2]) -> Result<Gate> {
    let xx = pauli_x().kronecker(&pauli_x());
    let yy = pauli_y().kronecker(&pauli_y());
    let zz = pauli_z().kronecker(&pauli_z());
    let a = std::f64::consts::FRAC_PI_4;
    // XX, YY, ZZ commute, so the exponential factorizes
    let e = |theta: f64, p: &CMat| identity(4) * C64::from(theta.cos()) - p * (I * theta.sin());
    let core = e(a, &xx) * e(a, &yy) * e(jz, &zz);
    let m = after[0].kronecker(after[1]) * core * before[0].kronecker(before[1]);
    Gate::new(2, 2, m)
}

pub fn random_dual_unitary<R: Rng + ?Sized>(rng: &mut R) -> Gate {
    let us: Vec<CMat> = (0..4).map(|_| crate::linalg::haar_unitary(2, rng)).collect();
    let jz = rng.random_range(0.0..std::f64::consts::PI);
    dual_unitary_qubit(jz, [&us[0], &us[1]], [&us[2], &us[3]]).expect("shapes fixed")
}

pub fn is_dual_unitary(v: &Gate, tol: f64) -> Result<PredicateReport> {
    if v.z != 2 {
        return Err(Error::Invalid("dual-unitarity is a 2-site property".into()));
    }
    let mut r = is_unitary(v, tol).residuals;
    r.extend(is_max_velocity(v, 1, 2, tol)?.residuals);
    Ok(PredicateReport::from_residuals(r, tol))
}

/// Three-site gate V₂ on legs (1,3) after V₁ on legs (1,2), both
/// dual-unitary.
pub fn dual_pair(v1: &Gate, v2: &Gate, tol: f64) -> Result<Gate> {
    for v in [v1, v2] {
        let rep = is_dual_unitary(v, tol)?;
        if !rep.passed {
            return Err(Error::Invalid(format!(
                "constituent is not dual-unitary (residual {:e})",
                rep.max_residual()
            )));
        }
    }
    if v1.q != v2.q {
        return Err(Error::DimensionMismatch("constituents differ in q".into()));
    }
    let q = v1.q;
    let a = Gate::from_local(q, 3, &v2.matrix, &[1, 3])?;
    let b = Gate::from_local(q, 3, &v1.matrix, &[1, 2])?;
    a.then_after(&b)
}

/// Cyclic shift sending input leg k to output leg k+1 (and z to 1),
/// applied after a gate controlled by legs 1..z−1 acting on leg z with
/// `targets[c]` for control configuration c (row-major over the controls).
pub fn controlled_swap(q: usize, z: usize, targets: &[CMat]) -> Result<Gate> {
    if z < 2 {
        return Err(Error::Invalid("need z >= 2".into()));
    }
    let nc = ipow(q, z - 1);
    if targets.len() != nc {
        return Err(Error::DimensionMismatch(format!(
            "need {nc} target unitaries, got {}",
            targets.len()
        )));
    }
    let d = ipow(q, z);
    let mut c = CMat::zeros(d, d);
    for (cfg, t) in targets.iter().enumerate() {
        if t.shape() != (q, q) || unitarity_residual(t) > 1e-10 {
            return Err(Error::Invalid(format!("target {cfg} is not a {q}x{q} unitary")));
        }
        c.view_mut((cfg * q, cfg * q), (q, q)).copy_from(t);
    }
    let mut shift = CMat::zeros(d, d);
    for idx in 0..d {
        let dg = crate::linalg::digits(idx, q, z);
        let mut out = vec![0; z];
        for k in 0..z {
            out[(k + 1) % z] = dg[k];
        }
        shift[(crate::linalg::compose(&out, q), idx)] = ONE;
    }
    Gate::new(q, z, shift * c)
}

/// Which pair of legs receives the SWAP in [`triunitary_derived`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwapChoice {
    Legs23,
    Legs12,
}

/// SWAP on the chosen legs applied after a tri-unitary gate.
pub fn triunitary_derived(v_tri: &Gate, choice: SwapChoice, tol: f64) -> Result<Gate> {
    let rep = is_triunitary(v_tri, tol)?;
    if !rep.passed {
        return Err(Error::Invalid(format!(
            "constituent is not tri-unitary (residual {:e})",
            rep.max_residual()
        )));
    }
    let legs = match choice {
        SwapChoice::Legs23 => [2, 3],
        SwapChoice::Legs12 => [1, 2],
    };
    let s = Gate::from_local(v_tri.q, 3, &swap_matrix(v_tri.q), &legs)?;
    s.then_after(v_tri)
}

/// U · (⊗_k before_k), then (⊗_k after_k) · U: single-site unitaries on
/// every input and/or output leg.
pub fn dress(u: &Gate, before: Option<&[CMat]>, after: Option<&[CMat]>) -> Result<Gate> {
    let mut m = u.matrix.clone();
    for (ops, left) in [(before, false), (after, true)] {
        let Some(ops) = ops else { continue };
        if ops.len() != u.z || ops.iter().any(|o| o.shape() != (u.q, u.q)) {
            return Err(Error::DimensionMismatch(format!(
                "need {} single-site {}x{} unitaries",
                u.z, u.q, u.q
            )));
        }
        if ops.iter().any(|o| unitarity_residual(o) > 1e-10) {
            return Err(Error::Invalid("dressing operator is not unitary".into()));
        }
        let k = kron_all(ops);
        m = if left { k * m } else { m * k };
    }
    Gate::new(u.q, u.z, m)
}

/// U · W_{ab}: a 2-site unitary on input legs a, b applied before U.
pub fn dress_two_site(u: &Gate, w: &CMat, legs: (usize, usize)) -> Result<Gate> {
    if unitarity_residual(w) > 1e-10 {
        return Err(Error::Invalid("dressing operator is not unitary".into()));
    }
    let wg = Gate::from_local(u.q, u.z, w, &[legs.0, legs.1])?;
    u.then_after(&wg)
}

/// Controlled phase exp(−iφ/4 (Z_a − 1)(Z_b − 1)) on legs a, b (qubits).
pub fn controlled_phase(z: usize, a: usize, b: usize, phi: f64) -> Result<Gate> {
    check_legs(&[a, b], z)?;
    let d = 1usize << z;
    let mut m = CMat::zeros(d, d);
    for idx in 0..d {
        let one = |leg: usize| idx >> (z - leg) & 1 == 1;
        // (Z−1) is −2 on |1⟩ and 0 on |0⟩
        m[(idx, idx)] = if one(a) && one(b) { C64::from_polar(1.0, -phi) } else { ONE };
    }
    Gate::new(2, z, m)
}
