//! Hermitian trace-orthonormal single-site operator bases.
//!
//! The basis is ordered: identity, symmetric off-diagonal, antisymmetric
//! off-diagonal, diagonal. For q = 2 this is {I, X, Y, Z}; for q > 2 the
//! generalized Gell-Mann matrices are rescaled by √(q/2) so that
//! tr(σ_α σ_β)/q = δ_αβ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{embed, trace, CMat, C64, I, ONE, ZERO};

#[derive(Clone, Debug)]
pub struct OperatorBasis {
    q: usize,
    elements: Vec<CMat>,
}

/// Coefficients of an operator in an [`OperatorBasis`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorVector {
    pub q: usize,
    pub coefficients: Vec<C64>,
}

impl OperatorBasis {
    pub fn new(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidDimension(q));
        }
        let unit = |r: usize, c: usize| {
            let mut m = CMat::zeros(q, q);
            m[(r, c)] = ONE;
            m
        };
        let scale = C64::from((q as f64 / 2.0).sqrt());
        let mut elements = vec![CMat::identity(q, q)];
        for j in 0..q {
            for k in j + 1..q {
                elements.push((unit(j, k) + unit(k, j)) * scale);
            }
        }
        for j in 0..q {
            for k in j + 1..q {
                elements.push((unit(j, k) * (-I) + unit(k, j) * I) * scale);
            }
        }
        for l in 1..q {
            let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut m = CMat::zeros(q, q);
            for d in 0..l {
                m[(d, d)] = ONE;
            }
            m[(l, l)] = C64::from(-(l as f64));
            elements.push(m * C64::from(norm) * scale);
        }
        Ok(Self { q, elements })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn element(&self, alpha: usize) -> &CMat {
        &self.elements[alpha]
    }

    /// G_αβ = tr(σ_α σ_β)/q.
    pub fn gram(&self) -> CMat {
        let n = self.len();
        CMat::from_fn(n, n, |a, b| {
            overlap(&self.elements[a], &self.elements[b]).expect("same q")
        })
    }

    /// Coefficients c_α = (σ_α|A).
    pub fn vectorize(&self, a: &CMat) -> Result<OperatorVector> {
        check_square(a, self.q)?;
        let coefficients = self
            .elements
            .iter()
            .map(|s| overlap(s, a).expect("checked"))
            .collect();
        Ok(OperatorVector {
            q: self.q,
            coefficients,
        })
    }

    /// A = Σ_α c_α σ_α.
    pub fn devectorize(&self, v: &OperatorVector) -> Result<CMat> {
        if v.q != self.q || v.coefficients.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector for q={} with {} coefficients, basis q={}",
                v.q,
                v.coefficients.len(),
                self.q
            )));
        }
        let mut out = CMat::zeros(self.q, self.q);
        for (c, s) in v.coefficients.iter().zip(&self.elements) {
            out += s * *c;
        }
        Ok(out)
    }

    /// Matrix K with K[α, r·q + c] = conj(σ_α[r, c]) / q, mapping a row-major
    /// flattened single-site operator to its coefficients.
    pub fn coefficient_map(&self) -> CMat {
        let q = self.q;
        let qf = q as f64;
        CMat::from_fn(q * q, q * q, |a, p| {
            self.elements[a][(p / q, p % q)].conj() / qf
        })
    }

    /// Unit vector on basis element `alpha`.
    pub fn unit(&self, alpha: usize) -> OperatorVector {
        let mut coefficients = vec![ZERO; self.len()];
        coefficients[alpha] = ONE;
        OperatorVector {
            q: self.q,
            coefficients,
        }
    }
}

impl OperatorVector {
    pub fn from_real(q: usize, coeffs: &[f64]) -> Self {
        Self {
            q,
            coefficients: coeffs.iter().map(|&x| C64::from(x)).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            q: self.q,
            coefficients: self.coefficients.iter().map(|c| c / n).collect(),
        }
    }

    /// (a|b) = Σ conj(a_α) b_α.
    pub fn dot(&self, other: &Self) -> C64 {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn as_column(&self) -> nalgebra::DVector<C64> {
        nalgebra::DVector::from_column_slice(&self.coefficients)
    }
}

fn check_square(a: &CMat, q: usize) -> Result<()> {
    if a.nrows() != q || a.ncols() != q {
        return Err(Error::DimensionMismatch(format!(
            "expected {q}x{q} operator, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// (a|b) = tr(a† b)/q with q the matrix dimension.
pub fn overlap(a: &CMat, b: &CMat) -> Result<C64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let q = a.nrows() as f64;
    Ok(trace(&(a.adjoint() * b)) / q)
}

/// σ(e) = 1^{⊗e−1} ⊗ σ ⊗ 1^{⊗z−e}, with legs numbered from 1.
pub fn embed_on_leg(sigma: &CMat, e: usize, z: usize) -> Result<CMat> {
    if e == 0 || e > z {
        return Err(Error::LegOutOfRange { leg: e, z });
    }
    if sigma.nrows() != sigma.ncols() {
        return Err(Error::DimensionMismatch("operator must be square".into()));
    }
    Ok(embed(sigma, sigma.nrows(), z, &[e - 1]))
}

pub fn pauli_i() -> CMat {
    CMat::identity(2, 2)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Parse a single-qubit operator label into normalized Pauli coefficients.
/// Accepts combinations of the letters x, y, z (e.g. "xz" = (X+Z)/√2,
/// "yz" = (Y+Z)/√2) or an explicit list "ax,ay,az".
pub fn parse_qubit_operator(label: &str) -> Result<OperatorVector> {
    let l = label.trim().to_ascii_lowercase();
    let mut c = [0.0f64; 4];
    if l.contains(',') {
        let parts: Vec<&str> = l.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Invalid(format!("operator '{label}': need 3 components")));
        }
        for (k, p) in parts.iter().enumerate() {
            c[k + 1] = p
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("operator '{label}'")))?;
        }
    } else {
        for ch in l.chars() {
            match ch {
                'x' => c[1] += 1.0,
                'y' => c[2] += 1.0,
                'z' => c[3] += 1.0,
                _ => return Err(Error::Invalid(format!("operator '{label}'"))),
            }
        }
    }
    let v = OperatorVector::from_real(2, &c);
    if v.norm() == 0.0 {
        return Err(Error::Invalid(format!("operator '{label}' is zero")));
    }
    Ok(v.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ginibre, partial_trace_keep};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn qubit_basis_is_pauli() {
        let b = OperatorBasis::new(2).unwrap();
        assert_eq!(b.element(1), &pauli_x());
        assert_eq!(b.element(2), &pauli_y());
        assert_eq!(b.element(3), &pauli_z());
        assert!((overlap(&pauli_x(), &pauli_y()).unwrap()).norm() < 1e-15);
        assert!((overlap(&pauli_x(), &pauli_x()).unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn invalid_q() {
        assert!(matches!(OperatorBasis::new(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn overlaps() {
        let x = pauli_x();
        let z = pauli_z();
        assert!(overlap(&pauli_i(), &x).unwrap().norm() < 1e-15);
        let xz = (&x + &z) * C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let v = overlap(&xz, &z).unwrap();
        assert!((v.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(overlap(&x, &CMat::identity(4, 4)).is_err());
    }

    #[test]
    fn embedding() {
        let x = pauli_x();
        let e = embed_on_leg(&x, 1, 2).unwrap();
        assert_eq!(e, x.kronecker(&pauli_i()));
        let e = embed_on_leg(&pauli_z(), 3, 3).unwrap();
        assert_eq!(e, pauli_i().kronecker(&pauli_i()).kronecker(&pauli_z()));
        let e = embed_on_leg(&pauli_i(), 2, 3).unwrap();
        assert_eq!(e, CMat::identity(8, 8));
        assert!(embed_on_leg(&x, 4, 3).is_err());
        assert!(embed_on_leg(&x, 0, 3).is_err());
    }

    #[test]
    fn embed_then_trace_out() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let s = ginibre(3, 3, &mut rng);
        for e in 1..=3 {
            let full = embed_on_leg(&s, e, 3).unwrap();
            let back = partial_trace_keep(&full, 3, 3, &[e - 1]) / C64::from(9.0);
            assert!((back - &s).norm() < 1e-14);
        }
    }

    #[test]
    fn parse_labels() {
        let v = parse_qubit_operator("xz").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.coefficients[1].re - h).abs() < 1e-15);
        assert!((v.coefficients[3].re - h).abs() < 1e-15);
        assert!(parse_qubit_operator("q").is_err());
        let w = parse_qubit_operator("0,0,2").unwrap();
        assert_eq!(w.coefficients[3], ONE);
    }

    proptest! {
        #[test]
        fn gram_is_identity(q in 2usize..7) {
            let b = OperatorBasis::new(q).unwrap();
            let g = b.gram();
            prop_assert!((g - CMat::identity(q * q, q * q)).norm() < 1e-12);
            prop_assert_eq!(b.element(0), &CMat::identity(q, q));
            for s in &b.elements()[1..] {
                prop_assert!(trace(s).norm() < 1e-12);
                prop_assert!((s - s.adjoint()).norm() < 1e-12);
            }
        }

        #[test]
        fn vectorize_roundtrip(q in 2usize..6, seed in any::<u64>()) {
            let b = OperatorBasis::new(q).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let a = ginibre(q, q, &mut rng);
            let v = b.vectorize(&a).unwrap();
            let back = b.devectorize(&v).unwrap();
            prop_assert!((back - &a).norm() < 1e-12);
            let k = b.coefficient_map();
            let flat = nalgebra::DVector::from_fn(q * q, |p, _| a[(p / q, p % q)]);
            let c = k * flat;
            for (x, y) in c.iter().zip(&v.coefficients) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn vectorize_basis_exact(q in 2usize..6) {
            let b = OperatorBasis::new(q).unwrap();
            for a in 0..b.len() {
                let v = b.vectorize(b.element(a)).unwrap();
                for (k, c) in v.coefficients.iter().enumerate() {
                    let want = if k == a { ONE } else { ZERO };
                    prop_assert!((c - want).norm() < 1e-12);
                }
            }
        }
    }
}
