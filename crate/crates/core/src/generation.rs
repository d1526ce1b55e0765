//! Random tree-unitary gates by alternating nearest-isometry projections,
//! and the local dimension of the solution manifold.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{
    max_velocity_legs, tree_condition_legs, tree_scale_sq, triunitary_conditions, Gate,
};
use crate::linalg::{
    ginibre, ipow, polar_factor, regroup, scaled_isometry_residual, ungroup, CMat,
    Leg, C64,
};

/// A reshuffle of the gate tensor required to be a scaled isometry:
/// M† M = scale_sq · 1 for M = regroup(U, rows, cols).
#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub label: String,
    pub rows: Vec<Leg>,
    pub cols: Vec<Leg>,
    pub scale_sq: f64,
}

impl Condition {
    pub fn unitarity(z: usize) -> Self {
        Self {
            label: "unitarity".into(),
            rows: (0..z).map(Leg::Out).collect(),
            cols: (0..z).map(Leg::In).collect(),
            scale_sq: 1.0,
        }
    }

    pub fn tree(q: usize, z: usize, p: usize) -> Self {
        let (rows, cols) = tree_condition_legs(z, p);
        Self {
            label: format!("tree leg {p}"),
            rows,
            cols,
            scale_sq: tree_scale_sq(q, z),
        }
    }

    pub fn max_velocity(z: usize, i: usize, j: usize) -> Self {
        let (rows, cols) = max_velocity_legs(z, i, j);
        Self {
            label: format!("max velocity {i}->{j}"),
            rows,
            cols,
            scale_sq: 1.0,
        }
    }

    pub fn residual(&self, m: &CMat, q: usize, z: usize) -> f64 {
        scaled_isometry_residual(&regroup(m, q, z, &self.rows, &self.cols), self.scale_sq)
    }

    /// Nearest point (in Frobenius norm) satisfying this condition alone.
    pub fn project(&self, m: &CMat, q: usize, z: usize) -> Result<CMat> {
        let r = regroup(m, q, z, &self.rows, &self.cols);
        let p = nearest_isometry(&r, self.scale_sq.sqrt())?;
        Ok(ungroup(&p, q, z, &self.rows, &self.cols))
    }
}

/// Unitarity followed by the z tree conditions; a max-velocity constraint
/// (i, j) replaces the tree condition for leg i, which it implies.
pub fn tree_unitary_conditions(q: usize, z: usize, constraints: &[(usize, usize)]) -> Vec<Condition> {
    let mut out = vec![Condition::unitarity(z)];
    for p in 1..=z {
        match constraints.iter().filter(|c| c.0 == p).collect::<Vec<_>>().as_slice() {
            [] => out.push(Condition::tree(q, z, p)),
            cs => out.extend(cs.iter().map(|&&(i, j)| Condition::max_velocity(z, i, j))),
        }
    }
    out
}

/// Unitarity plus the three hexagonal conditions of a 3-site gate.
pub fn triunitary_condition_set() -> Vec<Condition> {
    triunitary_conditions()
        .into_iter()
        .enumerate()
        .map(|(k, (rows, cols))| Condition {
            label: format!("hexagon direction {k}"),
            rows,
            cols,
            scale_sq: 1.0,
        })
        .collect()
}

/// scale · N where M = N √(M†M) is the polar decomposition.
pub fn nearest_isometry(m: &CMat, scale: f64) -> Result<CMat> {
    Ok(polar_factor(m)? * C64::from(scale))
}

/// One sweep of projections, in order.
pub fn project_conditions(m: &CMat, q: usize, z: usize, conditions: &[Condition]) -> Result<CMat> {
    let mut cur = m.clone();
    for c in conditions {
        cur = c.project(&cur, q, z)?;
    }
    Ok(cur)
}

pub fn max_residual(m: &CMat, q: usize, z: usize, conditions: &[Condition]) -> f64 {
    conditions
        .iter()
        .map(|c| c.residual(m, q, z))
        .fold(0.0, f64::max)
}

/// T_c: nearest unitary, then each tree condition p = 1..z.
pub fn project_tc(m: &CMat, q: usize, z: usize) -> Result<CMat> {
    project_conditions(m, q, z, &tree_unitary_conditions(q, z, &[]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub q: usize,
    pub z: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    /// Required maximum-velocity directions (output leg, input leg).
    pub constraints: Vec<(usize, usize)>,
}

impl GenerationConfig {
    pub fn new(q: usize, z: usize, seed: u64) -> Self {
        Self {
            q,
            z,
            seed,
            max_iterations: 5000,
            convergence_tol: 1e-12,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraints(mut self, constraints: Vec<(usize, usize)>) -> Self {
        self.constraints = constraints;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::InvalidDimension(self.q));
        }
        if self.z < 2 {
            return Err(Error::Invalid("generation needs z >= 2".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Invalid("convergence tolerance must be positive".into()));
        }
        for &(i, j) in &self.constraints {
            if i == j {
                return Err(Error::InvalidDirection { from: i, to: j });
            }
            for l in [i, j] {
                if l == 0 || l > self.z {
                    return Err(Error::LegOutOfRange { leg: l, z: self.z });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GenerationResult {
    pub gate: Gate,
    /// Max condition residual after each sweep.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

const STAGNATION_WINDOW: usize = 50;
const STAGNATION_TOL: f64 = 1e-15;

/// Iterate projection sweeps from a seeded Ginibre matrix until every
/// condition residual is below `tol`.
pub fn generate_with_conditions(
    q: usize,
    z: usize,
    seed: u64,
    conditions: &[Condition],
    max_iterations: usize,
    tol: f64,
) -> Result<GenerationResult> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = ipow(q, z);
    let mut m = ginibre(d, d, &mut rng);
    let mut trace = Vec::new();
    for it in 1..=max_iterations {
        m = project_conditions(&m, q, z, conditions)?;
        let r = max_residual(&m, q, z, conditions);
        trace.push(r);
        if r < tol {
            return Ok(GenerationResult {
                gate: Gate::new(q, z, m)?,
                trace,
                iterations: it,
            });
        }
        if it > STAGNATION_WINDOW && trace[it - 1 - STAGNATION_WINDOW] - r < STAGNATION_TOL {
            return Err(Error::Diverged {
                iterations: it,
                residual: r,
                trace,
            });
        }
    }
    let residual = trace.last().copied().unwrap_or(f64::INFINITY);
    Err(Error::Diverged {
        iterations: max_iterations,
        residual,
        trace,
    })
}

pub fn generate_tree_unitary(cfg: &GenerationConfig) -> Result<GenerationResult> {
    cfg.validate()?;
    let conds = tree_unitary_conditions(cfg.q, cfg.z, &cfg.constraints);
    generate_with_conditions(cfg.q, cfg.z, cfg.seed, &conds, cfg.max_iterations, cfg.convergence_tol)
}

pub fn generate_triunitary(q: usize, seed: u64, max_iterations: usize, tol: f64) -> Result<GenerationResult> {
    generate_with_conditions(q, 3, seed, &triunitary_condition_set(), max_iterations, tol)
}

/// Which constraints define the manifold in [`manifold_dimension`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintSet {
    UnitarityOnly,
    TreeUnitary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dimension: usize,
    pub rank: usize,
    pub parameters: usize,
    pub singular_values: Vec<f64>,
    pub fd_step: f64,
    pub rank_threshold: f64,
    pub gap_ratio: f64,
}

pub const DEFAULT_FD_STEP: f64 = 1e-6;
pub const DEFAULT_RANK_TOL: f64 = 1e-6;
const MIN_GAP_RATIO: f64 = 10.0;

/// Real constraint vector: Re/Im parts of U†U − 1 and of every
/// M_R(p)† M_R(p) − q^{z−2}·1.
fn constraint_vector(m: &CMat, q: usize, z: usize, set: ConstraintSet) -> Vec<f64> {
    let mut f = Vec::new();
    let mut push = |a: &CMat, scale_sq: f64| {
        let g = a.adjoint() * a;
        for r in 0..g.nrows() {
            for c in 0..g.ncols() {
                let v = g[(r, c)] - if r == c { C64::from(scale_sq) } else { C64::from(0.0) };
                f.push(v.re);
                f.push(v.im);
            }
        }
    };
    push(m, 1.0);
    if set == ConstraintSet::TreeUnitary {
        for p in 1..=z {
            let c = Condition::tree(q, z, p);
            push(&regroup(m, q, z, &c.rows, &c.cols), c.scale_sq);
        }
    }
    f
}

/// Local dimension of the constraint manifold at `u`: parameters minus
/// the numerical rank of the central-difference Jacobian.
pub fn manifold_dimension(
    u: &Gate,
    set: ConstraintSet,
    fd_step: f64,
    rank_tol: f64,
) -> Result<DimensionReport> {
    let (q, z) = (u.q(), u.z());
    let d = u.dim();
    let n_params = 2 * d * d;
    let base = u.matrix();
    let n_f = constraint_vector(base, q, z, set).len();
    let mut jac = nalgebra::DMatrix::<f64>::zeros(n_f, n_params);
    for k in 0..n_params {
        let (entry, imag) = (k / 2, k % 2 == 1);
        let (r, c) = (entry / d, entry % d);
        let delta = if imag { C64::new(0.0, fd_step) } else { C64::new(fd_step, 0.0) };
        let mut plus = base.clone();
        plus[(r, c)] += delta;
        let mut minus = base.clone();
        minus[(r, c)] -= delta;
        let fp = constraint_vector(&plus, q, z, set);
        let fm = constraint_vector(&minus, q, z, set);
        for i in 0..n_f {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * fd_step);
        }
    }
    let sv: Vec<f64> = {
        let mut s: Vec<f64> = jac.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
        s
    };
    let smax = sv.first().copied().unwrap_or(0.0);
    let threshold = rank_tol * smax;
    let rank = sv.iter().filter(|&&s| s >= threshold).count();
    let gap_ratio = if rank == 0 {
        f64::INFINITY
    } else if rank == sv.len() {
        f64::INFINITY
    } else {
        sv[rank - 1] / sv[rank].max(f64::MIN_POSITIVE)
    };
    if gap_ratio < MIN_GAP_RATIO {
        return Err(Error::AmbiguousRank {
            ratio: gap_ratio,
            cut: rank,
            spectrum: sv,
        });
    }
    Ok(DimensionReport {
        dimension: n_params - rank,
        rank,
        parameters: n_params,
        singular_values: sv,
        fd_step,
        rank_threshold: threshold,
        gap_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{is_max_velocity, is_tree_unitary, kim_gate, KimParams};
    use crate::linalg::{identity, unitarity_residual};

    #[test]
    fn nearest_isometry_examples() {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::from(2.0), C64::from(0.5)]));
        let n = nearest_isometry(&m, 1.0).unwrap();
        assert!((n - identity(2)).norm() < 1e-14);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let g = ginibre(16, 4, &mut rng);
        let n = nearest_isometry(&g, 2f64.sqrt()).unwrap();
        assert!(scaled_isometry_residual(&n, 2.0) < 1e-12);
        let again = nearest_isometry(&n, 2f64.sqrt()).unwrap();
        assert!((again - &n).norm() < 1e-13);
        assert!(matches!(nearest_isometry(&CMat::zeros(4, 2), 1.0), Err(Error::DegeneratePolar(_))));
    }

    #[test]
    fn kim_is_fixed_point() {
        let g = kim_gate(&KimParams::self_dual(3, 0.2)).unwrap();
        let p = project_tc(g.matrix(), 2, 3).unwrap();
        assert!((p - g.matrix()).norm() < 1e-12);
    }

    #[test]
    fn generates_tree_unitary_and_dual_unitary() {
        let r = generate_tree_unitary(&GenerationConfig::new(2, 3, 42)).unwrap();
        assert!(is_tree_unitary(&r.gate, 1e-10).passed);
        assert!(r.trace[9] < r.trace[0]);
        let r2 = generate_tree_unitary(&GenerationConfig::new(2, 2, 7)).unwrap();
        assert!(is_max_velocity(&r2.gate, 1, 2, 1e-10).unwrap().passed);
        assert!(unitarity_residual(r2.gate.matrix()) < 1e-10);
    }

    #[test]
    fn constrained_generation() {
        // constrained runs converge more slowly than plain tree-unitary ones
        let mut cfg = GenerationConfig::new(2, 3, 0).with_constraints(vec![(2, 3)]);
        cfg.max_iterations = 20_000;
        let r = generate_tree_unitary(&cfg).unwrap();
        assert!(is_max_velocity(&r.gate, 2, 3, 1e-10).unwrap().passed);
        assert!(is_tree_unitary(&r.gate, 1e-10).passed);
    }

    #[test]
    fn determinism() {
        let a = generate_tree_unitary(&GenerationConfig::new(2, 3, 99)).unwrap();
        let b = generate_tree_unitary(&GenerationConfig::new(2, 3, 99)).unwrap();
        assert_eq!(a.gate, b.gate);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn triunitary_seeds_derived_tree_unitaries() {
        use crate::gate::{is_triunitary, max_velocity_directions, triunitary_derived, SwapChoice};
        let v = generate_triunitary(2, 1, 20_000, 1e-12).unwrap();
        assert!(is_triunitary(&v.gate, 1e-10).unwrap().passed);
        for (choice, dirs) in [(SwapChoice::Legs23, [(1, 3), (2, 1)]), (SwapChoice::Legs12, [(2, 3), (3, 1)])] {
            let g = triunitary_derived(&v.gate, choice, 1e-10).unwrap();
            assert!(is_tree_unitary(&g, 1e-10).passed);
            let found = max_velocity_directions(&g, 1e-9);
            assert!(dirs.iter().all(|d| found.contains(d)), "{choice:?}: {found:?}");
        }
    }
}
