//! Light-cone correlation channels M_{eẽ} and OTOC transfer matrices
//! T_{eẽ} as explicit superoperator matrices, path products and asymptotic
//! OTOC values.
//!
//! Channels act in the Heisenberg direction: the operator sits on output leg
//! e of the gate and is pulled back to input leg ẽ,
//! M_{eẽ}(σ) = tr_{≠ẽ}[U† σ(e) U]/q^{z−1}.
//!
//! The OTOC transfer matrix acts on two replicas of one site. Coordinates
//! are taken in the product basis σ_a ⊗ σ_b with index a·q² + b. Legs of
//! the gate other than e carry the identity pairing 1⊗1 on the input side,
//! legs other than ẽ are closed with the swap pairing on the output side.
//! With this convention the right fixed point |R) is 1⊗1, the left fixed
//! point (L| is the swap pairing, and a light-cone OTOC reads
//! (σ_β| T_t ⋯ T_1 |σ_α) with |σ_α) = σ_α⊗σ_α and
//! (σ_β|X) = tr[(σ_β⊗σ_β) SWAP X]/q.

use std::collections::HashMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{Gate, GateAssignment};
use crate::linalg::{eigenvalues, embed, ipow, null_space, partial_trace_keep, CMat, C64, ONE, ZERO};
use crate::pauli::{overlap, OperatorBasis, OperatorVector};
use crate::tree::{Color, LightConePath};

/// Eigenvalues with modulus above this count as unit-modulus.
pub const UNIT_CIRCLE_TOL: f64 = 1e-8;

/// Path length used when the unit-modulus eigenspace cannot be resolved.
pub const FALLBACK_STEPS: usize = 200;

#[derive(Clone, Debug)]
pub struct CorrChannel {
    pub q: usize,
    pub z: usize,
    pub e: usize,
    pub e_tilde: usize,
    /// (σ_β|M|σ_α) at row β, column α.
    pub matrix: CMat,
}

impl CorrChannel {
    /// Distance of M|1) from |1).
    pub fn unitality_residual(&self) -> f64 {
        let mut unit = DVector::zeros(self.matrix.nrows());
        unit[0] = ONE;
        (self.matrix.column(0) - unit).norm()
    }

    pub fn spectral_radius(&self) -> f64 {
        eigenvalues(&self.matrix)
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct OtocChannel {
    pub q: usize,
    pub z: usize,
    pub e: usize,
    pub e_tilde: usize,
    pub matrix: CMat,
}

impl OtocChannel {
    pub fn spectral_radius(&self) -> f64 {
        eigenvalues(&self.matrix)
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues with |λ| > 1 − [`UNIT_CIRCLE_TOL`].
    pub fn unit_eigenvalues(&self) -> Vec<C64> {
        eigenvalues(&self.matrix)
            .into_iter()
            .filter(|l| l.norm() > 1.0 - UNIT_CIRCLE_TOL)
            .collect()
    }

    /// Largest modulus strictly inside the unit circle; sets the rate at
    /// which path OTOCs approach their asymptote.
    pub fn subleading_modulus(&self) -> f64 {
        eigenvalues(&self.matrix)
            .iter()
            .map(|l| l.norm())
            .filter(|&m| m <= 1.0 - UNIT_CIRCLE_TOL)
            .fold(0.0, f64::max)
    }
}

fn check_legs(u: &Gate, e: usize, e_tilde: usize) -> Result<()> {
    for leg in [e, e_tilde] {
        if leg == 0 || leg > u.z() {
            return Err(Error::LegOutOfRange { leg, z: u.z() });
        }
    }
    Ok(())
}

/// U† σ_a(e) U for every basis element σ_a.
fn pulled_back(u: &Gate, basis: &OperatorBasis, e: usize) -> Vec<CMat> {
    let (q, z) = (u.q(), u.z());
    let m = u.matrix();
    basis
        .elements()
        .iter()
        .map(|s| m.adjoint() * embed(s, q, z, &[e - 1]) * m)
        .collect()
}

fn corr_matrix(u: &Gate, e: usize, e_tilde: usize) -> Result<CMat> {
    check_legs(u, e, e_tilde)?;
    let (q, z) = (u.q(), u.z());
    let basis = OperatorBasis::new(q)?;
    let norm = C64::from(ipow(q, z - 1) as f64);
    let n = basis.len();
    let mut out = CMat::zeros(n, n);
    for (a, p) in pulled_back(u, &basis, e).iter().enumerate() {
        let reduced = partial_trace_keep(p, q, z, &[e_tilde - 1]) / norm;
        for b in 0..n {
            out[(b, a)] = overlap(basis.element(b), &reduced)?;
        }
    }
    Ok(out)
}

/// M_{eẽ} for a hop e ≠ ẽ.
pub fn correlation_channel(u: &Gate, e: usize, e_tilde: usize) -> Result<CorrChannel> {
    if e == e_tilde {
        return Err(Error::InvalidDirection { from: e, to: e_tilde });
    }
    Ok(CorrChannel {
        q: u.q(),
        z: u.z(),
        e,
        e_tilde,
        matrix: corr_matrix(u, e, e_tilde)?,
    })
}

/// M_{ee}: the operator stays on its site while a gate acts on it. Such
/// steps occur as the initial wait when the first layer does not move the
/// operator toward its target.
pub fn stay_channel(u: &Gate, e: usize) -> Result<CorrChannel> {
    Ok(CorrChannel {
        q: u.q(),
        z: u.z(),
        e,
        e_tilde: e,
        matrix: corr_matrix(u, e, e)?,
    })
}

fn otoc_matrix(u: &Gate, e: usize, e_tilde: usize) -> Result<CMat> {
    check_legs(u, e, e_tilde)?;
    let (q, z) = (u.q(), u.z());
    let basis = OperatorBasis::new(q)?;
    let n = basis.len();
    let rest: Vec<usize> = (0..z).filter(|&k| k != e_tilde - 1).collect();
    let dr = ipow(q, z - 1);
    let probes: Vec<CMat> = basis
        .elements()
        .iter()
        .map(|s| embed(&s.adjoint(), q, z, &[e_tilde - 1]))
        .collect();
    // F[(a,c), (x,y)] = tr_ẽ[P_a σ_c(ẽ)†][x, y]
    let mut f = CMat::zeros(n * n, dr * dr);
    let mut ft = CMat::zeros(n * n, dr * dr);
    for (a, p) in pulled_back(u, &basis, e).iter().enumerate() {
        for (c, probe) in probes.iter().enumerate() {
            let nac = partial_trace_keep(&(p * probe), q, z, &rest);
            for x in 0..dr {
                for y in 0..dr {
                    f[(a * n + c, x * dr + y)] = nac[(x, y)];
                    ft[(a * n + c, y * dr + x)] = nac[(x, y)];
                }
            }
        }
    }
    // S[(a,c),(b,d)] = tr(N_ac N_bd)
    let s = &f * ft.transpose();
    let norm = C64::from(ipow(q, z + 1) as f64);
    let mut t = CMat::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    t[(c * n + d, a * n + b)] = s[(a * n + c, b * n + d)] / norm;
                }
            }
        }
    }
    Ok(t)
}

/// T_{eẽ} for a hop e ≠ ẽ.
pub fn otoc_channel(u: &Gate, e: usize, e_tilde: usize) -> Result<OtocChannel> {
    if e == e_tilde {
        return Err(Error::InvalidDirection { from: e, to: e_tilde });
    }
    Ok(OtocChannel {
        q: u.q(),
        z: u.z(),
        e,
        e_tilde,
        matrix: otoc_matrix(u, e, e_tilde)?,
    })
}

/// T_{ee}, the two-replica counterpart of [`stay_channel`].
pub fn otoc_stay_channel(u: &Gate, e: usize) -> Result<OtocChannel> {
    Ok(OtocChannel {
        q: u.q(),
        z: u.z(),
        e,
        e_tilde: e,
        matrix: otoc_matrix(u, e, e)?,
    })
}

/// |σ_α) = σ_α ⊗ σ_α in product-basis coordinates.
pub fn replica_ket(alpha: &OperatorVector) -> DVector<C64> {
    let c = &alpha.coefficients;
    let n = c.len();
    DVector::from_fn(n * n, |k, _| c[k / n] * c[k % n])
}

/// Row vector of the functional X ↦ tr[(σ_β⊗σ_β) SWAP X]/q.
pub fn replica_bra(beta: &OperatorVector) -> Result<DVector<C64>> {
    let basis = OperatorBasis::new(beta.q)?;
    let b = basis.devectorize(beta)?;
    let n = basis.len();
    let q = C64::from(beta.q as f64);
    let mut out = DVector::zeros(n * n);
    for c in 0..n {
        let bc = &b * basis.element(c);
        for d in 0..n {
            out[c * n + d] = (&bc * &b * basis.element(d)).trace() / q;
        }
    }
    Ok(out)
}

/// Right fixed point 1⊗1.
pub fn pairing_identity(q: usize) -> DVector<C64> {
    let mut v = DVector::zeros(q.pow(4));
    v[0] = ONE;
    v
}

/// Left fixed point: X ↦ tr[SWAP X]/q.
pub fn pairing_swap(q: usize) -> DVector<C64> {
    let n = q * q;
    DVector::from_fn(n * n, |k, _| if k / n == k % n { ONE } else { ZERO })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSeries {
    pub legs: Vec<(usize, usize)>,
    /// Entry t is the correlator after the first t steps.
    pub values: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocSeries {
    pub legs: Vec<(usize, usize)>,
    pub values: Vec<f64>,
}

fn step_gate<'a>(assign: &'a GateAssignment, color: Color) -> &'a Gate {
    assign.gate(color)
}

fn check_vectors(q: usize, alpha: &OperatorVector, beta: &OperatorVector) -> Result<()> {
    for v in [alpha, beta] {
        if v.q != q || v.coefficients.len() != q * q {
            return Err(Error::DimensionMismatch(format!(
                "operator for q={} with {} coefficients on a q={q} circuit",
                v.q,
                v.coefficients.len()
            )));
        }
    }
    Ok(())
}

/// c_αβ(t) = (σ_β| M_t ⋯ M_1 |σ_α) along every prefix of the path.
pub fn correlator_path(
    assign: &GateAssignment,
    path: &LightConePath,
    alpha: &OperatorVector,
    beta: &OperatorVector,
) -> Result<CorrelatorSeries> {
    assign.validate()?;
    check_vectors(assign.q(), alpha, beta)?;
    let mut cache: HashMap<(Color, usize, usize), CMat> = HashMap::new();
    let b = beta.as_column();
    let mut v = alpha.as_column();
    let mut values = vec![b.dotc(&v)];
    for step in &path.steps {
        let key = (step.color, step.e, step.e_tilde);
        if !cache.contains_key(&key) {
            let m = corr_matrix(step_gate(assign, step.color), step.e, step.e_tilde)?;
            cache.insert(key, m);
        }
        v = &cache[&key] * v;
        values.push(b.dotc(&v));
    }
    Ok(CorrelatorSeries {
        legs: path.leg_pairs(),
        values,
    })
}

/// C_αβ(t) = (σ_β| T_t ⋯ T_1 |σ_α) along every prefix of the path.
pub fn otoc_path(
    assign: &GateAssignment,
    path: &LightConePath,
    alpha: &OperatorVector,
    beta: &OperatorVector,
) -> Result<OtocSeries> {
    assign.validate()?;
    check_vectors(assign.q(), alpha, beta)?;
    let mut cache: HashMap<(Color, usize, usize), CMat> = HashMap::new();
    let f = replica_bra(beta)?;
    let mut v = replica_ket(alpha);
    let mut values = vec![f.dot(&v).re];
    for step in &path.steps {
        let key = (step.color, step.e, step.e_tilde);
        if !cache.contains_key(&key) {
            let m = otoc_matrix(step_gate(assign, step.color), step.e, step.e_tilde)?;
            cache.insert(key, m);
        }
        v = &cache[&key] * v;
        values.push(f.dot(&v).re);
    }
    Ok(OtocSeries {
        legs: path.leg_pairs(),
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoteMethod {
    /// Projection onto the eigenvalue-1 eigenspace.
    Spectral,
    /// Unit-modulus eigenvalues other than 1 or a defective cluster: the
    /// value is read off a long channel product instead.
    LongProduct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymptote {
    pub value: f64,
    pub unit_eigenvalues: usize,
    pub method: AsymptoteMethod,
}

/// Late-time OTOC on the constant-direction path of `t`.
pub fn otoc_asymptote(t: &OtocChannel, alpha: &OperatorVector, beta: &OperatorVector) -> Result<Asymptote> {
    check_vectors(t.q, alpha, beta)?;
    let f = replica_bra(beta)?;
    let v = replica_ket(alpha);
    let units = t.unit_eigenvalues();
    let all_one = units.iter().all(|l| (l - ONE).norm() < 1e-6);
    let n = t.matrix.nrows();
    let shifted = &t.matrix - CMat::identity(n, n);
    let right = null_space(&shifted, 1e-7);
    let left = null_space(&shifted.adjoint(), 1e-7);
    if all_one && right.ncols() == units.len() && left.ncols() == units.len() {
        // projector R (L† R)⁻¹ L†
        let overlap = left.adjoint() * &right;
        if let Some(inv) = overlap.try_inverse() {
            let p = &right * inv * left.adjoint();
            let value = f.dot(&(p * v)).re;
            return Ok(Asymptote {
                value,
                unit_eigenvalues: units.len(),
                method: AsymptoteMethod::Spectral,
            });
        }
    }
    let mut w = v;
    for _ in 0..FALLBACK_STEPS {
        w = &t.matrix * w;
    }
    Ok(Asymptote {
        value: f.dot(&w).re,
        unit_eigenvalues: units.len(),
        method: AsymptoteMethod::LongProduct,
    })
}

/// Channels of a 2-site brickwork gate with the operator on leg 1: hop
/// M₁ = M_{12}, stay M₂ = M_{11}, and their OTOC counterparts.
#[derive(Clone, Debug)]
pub struct TwoSiteChannels {
    pub m1: CMat,
    pub m2: CMat,
    pub t1: CMat,
    pub t2: CMat,
}

impl TwoSiteChannels {
    /// M₁ M₂^m: wait m steps, then hop.
    pub fn hop_after_wait(&self, m: usize) -> CMat {
        let mut out = self.m1.clone();
        for _ in 0..m {
            out = &out * &self.m2;
        }
        out
    }

    pub fn otoc_hop_after_wait(&self, m: usize) -> CMat {
        let mut out = self.t1.clone();
        for _ in 0..m {
            out = &out * &self.t2;
        }
        out
    }

    /// Correlator along hops with the given wait counts.
    pub fn correlator(&self, waits: &[usize], alpha: &OperatorVector, beta: &OperatorVector) -> C64 {
        let mut v = alpha.as_column();
        for &m in waits {
            v = self.hop_after_wait(m) * v;
        }
        beta.as_column().dotc(&v)
    }

    pub fn otoc(&self, waits: &[usize], alpha: &OperatorVector, beta: &OperatorVector) -> Result<f64> {
        let f = replica_bra(beta)?;
        let mut v = replica_ket(alpha);
        for &m in waits {
            v = self.otoc_hop_after_wait(m) * v;
        }
        Ok(f.dot(&v).re)
    }
}

pub fn twosite_channels(v: &Gate) -> Result<TwoSiteChannels> {
    if v.z() != 2 {
        return Err(Error::DimensionMismatch(format!("2-site gate expected, got z = {}", v.z())));
    }
    Ok(TwoSiteChannels {
        m1: corr_matrix(v, 1, 2)?,
        m2: corr_matrix(v, 1, 1)?,
        t1: otoc_matrix(v, 1, 2)?,
        t2: otoc_matrix(v, 1, 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{
        hadamard_construction_gate, is_max_velocity, kim_gate, random_dual_unitary, KimParams,
    };
    use crate::generation::{generate_tree_unitary, GenerationConfig};
    use crate::linalg::haar_unitary;
    use crate::pauli::parse_qubit_operator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn haar_gate(q: usize, z: usize, seed: u64) -> Gate {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Gate::new(q, z, haar_unitary(ipow(q, z), &mut rng)).unwrap()
    }

    fn tu_gate(seed: u64) -> Gate {
        generate_tree_unitary(&GenerationConfig::new(2, 3, seed)).unwrap().gate
    }

    #[test]
    fn unital_and_contracting() {
        for (q, z) in [(2, 2), (2, 3), (3, 3)] {
            let u = haar_gate(q, z, 1);
            for e in 1..=z {
                for et in 1..=z {
                    let m = if e == et {
                        stay_channel(&u, e).unwrap()
                    } else {
                        correlation_channel(&u, e, et).unwrap()
                    };
                    assert!(m.unitality_residual() < 1e-12);
                    assert!(m.spectral_radius() <= 1.0 + 1e-10);
                }
            }
        }
    }

    #[test]
    fn equal_legs_rejected() {
        let u = haar_gate(2, 3, 2);
        assert!(matches!(correlation_channel(&u, 2, 2), Err(Error::InvalidDirection { .. })));
        assert!(matches!(otoc_channel(&u, 1, 1), Err(Error::InvalidDirection { .. })));
    }

    #[test]
    fn hadamard_construction_kills_correlations() {
        let u = hadamard_construction_gate(3, &[0.3, 0.7, 1.1]).unwrap();
        for e in 1..=3 {
            for et in (1..=3).filter(|&k| k != e) {
                let m = correlation_channel(&u, e, et).unwrap().matrix;
                assert!(m.view((0, 1), (4, 3)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn max_velocity_selects_output() {
        let u = kim_gate(&KimParams::self_dual(3, 0.4)).unwrap();
        for (i, j) in [(1, 2), (3, 1)] {
            assert!(is_max_velocity(&u, i, j, 1e-10).unwrap().passed);
            for et in (1..=3).filter(|&k| k != j) {
                let m = corr_matrix(&u, i, et).unwrap();
                assert!(m.view((0, 1), (4, 3)).norm() < 1e-12, "{i}->{et}");
            }
        }
    }

    #[test]
    fn tree_unitary_stay_vanishes() {
        let u = tu_gate(3);
        for e in 1..=3 {
            let m = stay_channel(&u, e).unwrap().matrix;
            assert!(m.view((0, 1), (4, 3)).norm() < 1e-10);
        }
    }

    #[test]
    fn otoc_fixed_points() {
        let u = haar_gate(2, 3, 4);
        let t = otoc_channel(&u, 2, 3).unwrap();
        let r = pairing_identity(2);
        let l = pairing_swap(2);
        assert!((&t.matrix * &r - &r).norm() < 1e-12);
        assert!((t.matrix.transpose() * &l - &l).norm() < 1e-12);
        let a = parse_qubit_operator("xz").unwrap();
        let b = parse_qubit_operator("y").unwrap();
        let one = C64::from(1.0);
        assert!((replica_bra(&b).unwrap().dot(&r) - one).norm() < 1e-12);
        assert!((l.dot(&replica_ket(&a)) - one).norm() < 1e-12);
        assert!((l.dot(&r) - one).norm() < 1e-12);
        assert!(t.spectral_radius() <= 1.0 + 1e-10);
    }

    #[test]
    fn otoc_start_value() {
        // same-site OTOC at t = 0: tr(BABA)/q
        let a = parse_qubit_operator("x").unwrap();
        let b = parse_qubit_operator("z").unwrap();
        let f = replica_bra(&b).unwrap();
        assert!((f.dot(&replica_ket(&a)).re + 1.0).abs() < 1e-12);
        assert!((f.dot(&replica_ket(&b)).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generic_tree_unitary_otoc_trivial() {
        let u = tu_gate(7);
        let t = otoc_channel(&u, 2, 3).unwrap();
        assert_eq!(t.unit_eigenvalues().len(), 1);
        let a = parse_qubit_operator("xz").unwrap();
        let b = parse_qubit_operator("z").unwrap();
        let asym = otoc_asymptote(&t, &a, &b).unwrap();
        assert_eq!(asym.method, AsymptoteMethod::Spectral);
        assert!((asym.value - 1.0).abs() < 1e-8);
        // convergence goes as |λ₂|^t and this gate has a small gap
        let lam2 = t.subleading_modulus();
        assert!(lam2 < 1.0);
        let steps = 400;
        let path = LightConePath::constant(3, 2, 3, steps);
        let s = otoc_path(&GateAssignment::Uniform(u), &path, &a, &b).unwrap();
        let dev = (s.values[steps] - asym.value).abs();
        assert!(dev < 1e-6 && dev < 1e3 * lam2.powi(steps as i32) + 1e-12, "{dev} {lam2}");
    }

    #[test]
    fn kim_otoc_asymptote() {
        let u = kim_gate(&KimParams::self_dual(3, 0.6)).unwrap();
        let t = otoc_channel(&u, 1, 2).unwrap();
        let a = parse_qubit_operator("xz").unwrap();
        for (label, expect) in [("y", -0.5), ("yz", -0.25)] {
            let b = parse_qubit_operator(label).unwrap();
            let asym = otoc_asymptote(&t, &a, &b).unwrap();
            assert!((asym.value - expect).abs() < 1e-8, "{label}: {asym:?}");
        }
    }

    #[test]
    fn dual_unitary_twosite() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let v = random_dual_unitary(&mut rng);
        let ch = twosite_channels(&v).unwrap();
        assert!(ch.m2.view((0, 1), (4, 3)).norm() < 1e-12);
        let units = |m: &CMat| {
            eigenvalues(m)
                .iter()
                .filter(|l| l.norm() > 1.0 - UNIT_CIRCLE_TOL)
                .count()
        };
        assert!(units(&ch.t1) >= 2);
        // a slow step mixes the extra eigenvector away
        let slow = &ch.t1 * &ch.t2;
        assert_eq!(units(&slow), 1);
    }

    #[test]
    fn twosite_matches_general_channels() {
        let v = haar_gate(2, 2, 6);
        let ch = twosite_channels(&v).unwrap();
        assert_eq!(ch.m1, correlation_channel(&v, 1, 2).unwrap().matrix);
        assert_eq!(ch.t2, otoc_stay_channel(&v, 1).unwrap().matrix);
        let w = ch.hop_after_wait(2);
        assert!((w - &ch.m1 * &ch.m2 * &ch.m2).norm() < 1e-14);
    }
}
