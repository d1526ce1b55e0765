//! Dense complex linear algebra shared by the gate, channel and oracle code.
//!
//! Multi-site indices are row-major with site 1 (index 0 here) the most
//! significant digit.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn ipow(q: usize, n: usize) -> usize {
    q.pow(n as u32)
}

/// Digits of `index` in base `q`, most significant first.
pub fn digits(mut index: usize, q: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for k in (0..n).rev() {
        d[k] = index % q;
        index /= q;
    }
    d
}

pub fn compose(d: &[usize], q: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * q + x)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    let mut out = CMat::from_element(1, 1, ONE);
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

/// ‖M†M − 1‖_F.
pub fn unitarity_residual(m: &CMat) -> f64 {
    let n = m.ncols();
    (m.adjoint() * m - identity(n)).norm()
}

/// ‖M†M − c·1‖_F.
pub fn scaled_isometry_residual(m: &CMat, c: f64) -> f64 {
    let n = m.ncols();
    (m.adjoint() * m - identity(n) * C64::from(c)).norm()
}

/// One index of a z-leg gate tensor, 0-based site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leg {
    Out(usize),
    In(usize),
}

struct Strides {
    out_row: Vec<usize>,
    out_col: Vec<usize>,
    in_row: Vec<usize>,
    in_col: Vec<usize>,
}

fn strides(q: usize, z: usize, rows: &[Leg], cols: &[Leg]) -> Strides {
    assert_eq!(rows.len() + cols.len(), 2 * z, "regroup needs every leg once");
    let mut s = Strides {
        out_row: vec![0; z],
        out_col: vec![0; z],
        in_row: vec![0; z],
        in_col: vec![0; z],
    };
    let mut seen = vec![false; 2 * z];
    for (p, leg) in rows.iter().enumerate() {
        let w = ipow(q, rows.len() - 1 - p);
        match *leg {
            Leg::Out(k) => {
                assert!(!seen[k]);
                seen[k] = true;
                s.out_row[k] = w;
            }
            Leg::In(k) => {
                assert!(!seen[z + k]);
                seen[z + k] = true;
                s.in_row[k] = w;
            }
        }
    }
    for (p, leg) in cols.iter().enumerate() {
        let w = ipow(q, cols.len() - 1 - p);
        match *leg {
            Leg::Out(k) => {
                assert!(!seen[k]);
                seen[k] = true;
                s.out_col[k] = w;
            }
            Leg::In(k) => {
                assert!(!seen[z + k]);
                seen[z + k] = true;
                s.in_col[k] = w;
            }
        }
    }
    s
}

/// Reinterpret a q^z × q^z gate as a tensor with 2z legs and regroup the
/// legs into the given row and column lists.
pub fn regroup(u: &CMat, q: usize, z: usize, rows: &[Leg], cols: &[Leg]) -> CMat {
    let s = strides(q, z, rows, cols);
    let d = ipow(q, z);
    let mut out = CMat::zeros(ipow(q, rows.len()), ipow(q, cols.len()));
    let mut od = vec![0; z];
    let mut nd = vec![0; z];
    for r in 0..d {
        fill_digits(r, q, &mut od);
        let (mut rr, mut rc) = (0, 0);
        for k in 0..z {
            rr += od[k] * s.out_row[k];
            rc += od[k] * s.out_col[k];
        }
        for c in 0..d {
            fill_digits(c, q, &mut nd);
            let (mut cr, mut cc) = (rr, rc);
            for k in 0..z {
                cr += nd[k] * s.in_row[k];
                cc += nd[k] * s.in_col[k];
            }
            out[(cr, cc)] = u[(r, c)];
        }
    }
    out
}

/// Inverse of [`regroup`] with the same leg lists.
pub fn ungroup(m: &CMat, q: usize, z: usize, rows: &[Leg], cols: &[Leg]) -> CMat {
    let s = strides(q, z, rows, cols);
    let d = ipow(q, z);
    let mut out = CMat::zeros(d, d);
    let mut od = vec![0; z];
    let mut nd = vec![0; z];
    for r in 0..d {
        fill_digits(r, q, &mut od);
        let (mut rr, mut rc) = (0, 0);
        for k in 0..z {
            rr += od[k] * s.out_row[k];
            rc += od[k] * s.out_col[k];
        }
        for c in 0..d {
            fill_digits(c, q, &mut nd);
            let (mut cr, mut cc) = (rr, rc);
            for k in 0..z {
                cr += nd[k] * s.in_row[k];
                cc += nd[k] * s.in_col[k];
            }
            out[(r, c)] = m[(cr, cc)];
        }
    }
    out
}

fn fill_digits(mut index: usize, q: usize, d: &mut [usize]) {
    for k in (0..d.len()).rev() {
        d[k] = index % q;
        index /= q;
    }
}

/// Partial trace of an n-site operator keeping the listed sites (in the
/// listed order).
pub fn partial_trace_keep(m: &CMat, q: usize, n: usize, keep: &[usize]) -> CMat {
    let d = ipow(q, n);
    let k = keep.len();
    let mut is_kept = vec![false; n];
    for &s in keep {
        is_kept[s] = true;
    }
    let mut out = CMat::zeros(ipow(q, k), ipow(q, k));
    let mut rd = vec![0; n];
    let mut cd = vec![0; n];
    for r in 0..d {
        fill_digits(r, q, &mut rd);
        for c in 0..d {
            fill_digits(c, q, &mut cd);
            if (0..n).any(|s| !is_kept[s] && rd[s] != cd[s]) {
                continue;
            }
            let ri = keep.iter().fold(0, |a, &s| a * q + rd[s]);
            let ci = keep.iter().fold(0, |a, &s| a * q + cd[s]);
            out[(ri, ci)] += m[(r, c)];
        }
    }
    out
}

/// Embed a k-site operator acting on `sites` (operator site p ↔ `sites[p]`)
/// into an n-site space.
pub fn embed(op: &CMat, q: usize, n: usize, sites: &[usize]) -> CMat {
    let d = ipow(q, n);
    let mut on_site = vec![false; n];
    for &s in sites {
        on_site[s] = true;
    }
    let mut out = CMat::zeros(d, d);
    let mut rd = vec![0; n];
    let mut cd = vec![0; n];
    for r in 0..d {
        fill_digits(r, q, &mut rd);
        for c in 0..d {
            fill_digits(c, q, &mut cd);
            if (0..n).any(|s| !on_site[s] && rd[s] != cd[s]) {
                continue;
            }
            let ri = sites.iter().fold(0, |a, &s| a * q + rd[s]);
            let ci = sites.iter().fold(0, |a, &s| a * q + cd[s]);
            out[(r, c)] = op[(ri, ci)];
        }
    }
    out
}

/// Column offsets of every local configuration of `sites` inside an n-site
/// index, local site 0 most significant.
fn local_offsets(q: usize, n: usize, sites: &[usize]) -> Vec<usize> {
    let k = sites.len();
    (0..ipow(q, k))
        .map(|l| {
            digits(l, q, k)
                .iter()
                .zip(sites)
                .map(|(&x, &s)| x * ipow(q, n - 1 - s))
                .sum()
        })
        .collect()
}

/// Indices whose digits on `sites` are all zero.
fn local_bases(q: usize, n: usize, sites: &[usize]) -> Vec<usize> {
    let mut on_site = vec![false; n];
    for &s in sites {
        on_site[s] = true;
    }
    let mut d = vec![0; n];
    (0..ipow(q, n))
        .filter(|&i| {
            fill_digits(i, q, &mut d);
            (0..n).all(|s| !on_site[s] || d[s] == 0)
        })
        .collect()
}

/// A · (G on `sites`) without forming the embedded matrix.
pub fn mul_local_right(a: &CMat, g: &CMat, q: usize, n: usize, sites: &[usize]) -> CMat {
    let offs = local_offsets(q, n, sites);
    let mut out = CMat::zeros(a.nrows(), a.ncols());
    for base in local_bases(q, n, sites) {
        for (lc, &oc) in offs.iter().enumerate() {
            let mut col = out.column_mut(base + oc);
            for (lr, &or) in offs.iter().enumerate() {
                let w = g[(lr, lc)];
                if w != ZERO {
                    col.axpy(w, &a.column(base + or), ONE);
                }
            }
        }
    }
    out
}

/// (G on `sites`) · A without forming the embedded matrix.
pub fn mul_local_left(g: &CMat, a: &CMat, q: usize, n: usize, sites: &[usize]) -> CMat {
    mul_local_right(&a.transpose(), &g.transpose(), q, n, sites).transpose()
}

/// G† A G for a gate acting on `sites`.
pub fn conjugate_local(a: &CMat, g: &CMat, q: usize, n: usize, sites: &[usize]) -> CMat {
    mul_local_left(&g.adjoint(), &mul_local_right(a, g, q, n, sites), q, n, sites)
}

/// Apply a single-site superoperator to site `s` of an n-site operator.
/// `phi` is q²×q² acting on row-major flattened q×q matrices.
pub fn apply_site_superop(a: &CMat, phi: &CMat, q: usize, n: usize, s: usize) -> CMat {
    let stride = ipow(q, n - 1 - s);
    let d = ipow(q, n);
    let mut out = CMat::zeros(d, d);
    for rb in local_bases(q, n, &[s]) {
        for cb in local_bases(q, n, &[s]) {
            for r in 0..q {
                for c in 0..q {
                    let x = a[(rb + r * stride, cb + c * stride)];
                    if x == ZERO {
                        continue;
                    }
                    for r2 in 0..q {
                        for c2 in 0..q {
                            let w = phi[(r2 * q + c2, r * q + c)];
                            out[(rb + r2 * stride, cb + c2 * stride)] += w * x;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Singular value decomposition with values sorted in descending order.
pub fn svd_sorted(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    (u, svd.singular_values.iter().copied().collect(), v_t)
}

/// Polar (isometric) factor W V† of a matrix with at least as many rows as
/// columns.
pub fn polar_factor(m: &CMat) -> Result<CMat> {
    if m.nrows() < m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "polar factor needs rows >= cols, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let (u, s, v_t) = svd_sorted(m);
    let smin = s.last().copied().unwrap_or(0.0);
    if smin < 1e-14 {
        return Err(Error::DegeneratePolar(smin));
    }
    Ok(u * v_t)
}

/// Complex Ginibre matrix: i.i.d. entries with E|x|² = 1, drawn row-major,
/// real part before imaginary part.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let mut out = CMat::zeros(rows, cols);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for r in 0..rows {
        for c in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out[(r, c)] = C64::new(re * s, im * s);
        }
    }
    out
}

/// Haar-random unitary from the polar factor of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    loop {
        let g = ginibre(dim, dim, rng);
        if let Ok(u) = polar_factor(&g) {
            return u;
        }
    }
}

/// Eigenvalues of a square complex matrix from its Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|k| t[(k, k)]).collect()
}

/// Orthonormal basis (columns) of the numerical null space of `m`.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    let n = m.ncols();
    // pad to square so the SVD returns a full right basis
    let padded = if m.nrows() < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, s, v_t) = svd_sorted(&padded);
    let scale = s.first().copied().unwrap_or(0.0).max(1.0);
    let rank = s.iter().filter(|&&x| x > tol * scale).count();
    let v = v_t.adjoint();
    v.columns(rank, n - rank).into_owned()
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}
