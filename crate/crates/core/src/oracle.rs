//! Independent reference computations for testing: high-accuracy transition
//! matrices, trajectory simulation under piecewise-constant inputs, support
//! quadrature of set-valued integrals, and sampled Hausdorff estimates.
//!
//! Nothing here shares a code path with the certified approximations in
//! [`crate::system`] and [`crate::reach`]; consistency tests between the two
//! sides are only meaningful because the schemes and step controls differ.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::system::LtvSystem;
use crate::zonotope::Zonotope;

/// A piecewise-constant input signal on a strictly increasing time grid.
/// Values are expected to lie in the system's input set; the vertex and
/// sample constructors guarantee that by construction.
#[derive(Debug, Clone)]
pub struct InputSignal {
    grid: Vec<f64>,
    values: Vec<DVector<f64>>,
}

impl InputSignal {
    pub fn new(grid: Vec<f64>, values: Vec<DVector<f64>>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidParameter(
                "input grid needs at least two points".into(),
            ));
        }
        if values.len() + 1 != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} grid points require {} interval values, got {}",
                grid.len(),
                grid.len() - 1,
                values.len()
            )));
        }
        if !grid.iter().all(|t| t.is_finite()) {
            return Err(Error::NonFinite("input grid".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "input grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(t0: f64, tf: f64, value: DVector<f64>) -> Result<Self> {
        Self::new(vec![t0, tf], vec![value])
    }

    /// Equispaced pieces, each set to a random sign-pattern vertex of `u`.
    pub fn random_vertices(
        u: &Zonotope,
        t0: f64,
        tf: f64,
        pieces: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let pieces = pieces.max(1);
        let grid: Vec<f64> = (0..=pieces)
            .map(|k| t0 + (tf - t0) * (k as f64) / (pieces as f64))
            .collect();
        let values = (0..pieces).map(|_| random_vertex(u, rng)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    /// Inserts extra grid points (values are unchanged); lets a simulation
    /// record the state at arbitrary times.
    pub fn with_grid_points(&self, times: &[f64]) -> Result<Self> {
        let mut grid = self.grid.clone();
        for &t in times {
            if t <= grid[0] || t >= grid[grid.len() - 1] {
                continue;
            }
            let pos = grid.partition_point(|&g| g < t);
            if grid[pos] != t {
                grid.insert(pos, t);
            }
        }
        let mut values = Vec::with_capacity(grid.len() - 1);
        for w in grid.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let j = self
                .grid
                .partition_point(|&g| g <= mid)
                .saturating_sub(1)
                .min(self.values.len() - 1);
            values.push(self.values[j].clone());
        }
        Self::new(grid, values)
    }
}

/// A random sign-pattern vertex `c + G * sigma`, `sigma in {-1, 1}^q`.
pub fn random_vertex(u: &Zonotope, rng: &mut impl Rng) -> DVector<f64> {
    let mut v = u.center().clone();
    for j in 0..u.generator_count() {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        v += u.generators().column(j) * sign;
    }
    v
}

/// A random point `c + G * lambda`, `lambda in [-1, 1]^q`.
pub fn random_point(u: &Zonotope, rng: &mut impl Rng) -> DVector<f64> {
    let mut v = u.center().clone();
    for j in 0..u.generator_count() {
        v += u.generators().column(j) * rng.gen_range(-1.0..=1.0);
    }
    v
}

/// States of one simulated solution, sampled at the input signal's grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

fn rk4_step<F>(f: &F, t: f64, y: &DMatrix<f64>, h: f64) -> DMatrix<f64>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &(y + &k1 * (0.5 * h)));
    let k3 = f(t + 0.5 * h, &(y + &k2 * (0.5 * h)));
    let k4 = f(t + h, &(y + &k3 * h));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Classical fourth-order integration of the matrix equation
/// `d/dt phi(t, s) = A(t) phi(t, s)`, `phi(s, s) = I`.
pub fn reference_transition(sys: &LtvSystem, s: f64, t: f64, substeps: usize) -> Result<DMatrix<f64>> {
    if t < s {
        return Err(Error::InvalidParameter(
            "reference_transition requires s <= t".into(),
        ));
    }
    let n = sys.state_dim();
    let mut phi = DMatrix::identity(n, n);
    if t == s {
        return Ok(phi);
    }
    let substeps = substeps.max(1);
    let h = (t - s) / substeps as f64;
    let f = |tau: f64, m: &DMatrix<f64>| sys.a(tau) * m;
    for k in 0..substeps {
        phi = rk4_step(&f, s + k as f64 * h, &phi, h);
    }
    Ok(phi)
}

/// [`reference_transition`] with the substep count doubled until the result
/// changes by less than `1e-10` in the operator maximum norm.
pub fn reference_transition_auto(sys: &LtvSystem, s: f64, t: f64) -> Result<DMatrix<f64>> {
    let mut substeps = 16;
    let mut phi = reference_transition(sys, s, t, substeps)?;
    loop {
        substeps *= 2;
        let finer = reference_transition(sys, s, t, substeps)?;
        let diff = crate::system::operator_norm_inf(&(&finer - &phi));
        phi = finer;
        if diff < 1e-10 || substeps >= 1 << 20 {
            return Ok(phi);
        }
    }
}

/// Integrates one solution of the system under a piecewise-constant input,
/// recording the state at every grid point of the signal. Each interval is
/// integrated with `substeps` fourth-order steps, so input switching times
/// never fall inside an integration step.
pub fn simulate(
    sys: &LtvSystem,
    x0: &DVector<f64>,
    u: &InputSignal,
    substeps: usize,
) -> Result<Trajectory> {
    if x0.len() != sys.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state of length {} for dimension {}",
            x0.len(),
            sys.state_dim()
        )));
    }
    let substeps = substeps.max(1);
    let mut times = Vec::with_capacity(u.grid().len());
    let mut states = Vec::with_capacity(u.grid().len());
    let mut x = DMatrix::from_column_slice(x0.len(), 1, x0.as_slice());
    times.push(u.grid()[0]);
    states.push(x0.clone());
    for (j, w) in u.grid().windows(2).enumerate() {
        let value = &u.values()[j];
        if value.len() != sys.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "input value of length {} for input dimension {}",
                value.len(),
                sys.input_dim()
            )));
        }
        let f = |t: f64, y: &DMatrix<f64>| {
            let mut dy = sys.a(t) * y;
            dy += sys.b(t) * value;
            dy
        };
        let h = (w[1] - w[0]) / substeps as f64;
        for k in 0..substeps {
            x = rk4_step(&f, w[0] + k as f64 * h, &x, h);
        }
        times.push(w[1]);
        states.push(DVector::from_column_slice(x.as_slice()));
    }
    Ok(Trajectory { times, states })
}

/// Support of the set-valued integral `I(a,b) = int_a^b phi(b,s) B(s) U ds`
/// in direction `dir`, by midpoint quadrature of the per-time supports
/// (support functions commute with set integration).
///
/// The transition matrices `phi(b, s)` are obtained in a single backward
/// sweep of `d/ds phi(b,s) = -phi(b,s) A(s)` from `s = b`.
pub fn set_integral_quadrature(
    sys: &LtvSystem,
    a: f64,
    b: f64,
    dir: &DVector<f64>,
    subintervals: usize,
) -> Result<f64> {
    if b < a {
        return Err(Error::InvalidParameter(
            "set_integral_quadrature requires a <= b".into(),
        ));
    }
    if dir.len() != sys.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "direction of length {} for dimension {}",
            dir.len(),
            sys.state_dim()
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let k = subintervals.max(1);
    let ds = (b - a) / k as f64;
    let n = sys.state_dim();
    let mut psi = DMatrix::identity(n, n);
    let f = |s: f64, m: &DMatrix<f64>| -(m * sys.a(s));
    let mut total = 0.0;
    // Half steps: odd positions are the subinterval midpoints.
    for i in 1..=2 * k {
        psi = rk4_step(&f, b - (i - 1) as f64 * (0.5 * ds), &psi, -0.5 * ds);
        if i % 2 == 1 {
            let s = b - i as f64 * (0.5 * ds);
            let l_u = (psi.clone() * sys.b(s)).transpose() * dir;
            total += sys.input_set().support(&l_u)? * ds;
        }
    }
    Ok(total)
}

/// Maximum absolute support difference over the sampled directions: a lower
/// bound for the Hausdorff distance w.r.t. the maximum norm, exact in the
/// limit of dense sampling on the 1-norm unit sphere.
pub fn hausdorff_sampled(z1: &Zonotope, z2: &Zonotope, directions: &[DVector<f64>]) -> Result<f64> {
    if z1.dim() != z2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "hausdorff_sampled of dimensions {} and {}",
            z1.dim(),
            z2.dim()
        )));
    }
    let mut worst = 0.0f64;
    for dir in directions {
        let d = (z1.support(dir)? - z2.support(dir)?).abs();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// All `2n` signed axis directions followed by `extra` seeded pseudorandom
/// draws from the unit sphere of the 1-norm (the dual sphere of the maximum
/// norm).
pub fn direction_set(dim: usize, extra: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut dirs = Vec::with_capacity(2 * dim + extra);
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = 1.0;
        dirs.push(e.clone());
        e[i] = -1.0;
        dirs.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let mut v = DVector::zeros(dim);
        let mut norm1 = 0.0;
        while norm1 == 0.0 {
            for i in 0..dim {
                let mag: f64 = -(rng.gen_range(f64::MIN_POSITIVE..1.0)).ln();
                v[i] = if rng.gen::<bool>() { mag } else { -mag };
            }
            norm1 = v.iter().map(|x| x.abs()).sum();
        }
        dirs.push(v / norm1);
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::HarmonicPencil;
    use nalgebra::{dmatrix, dvector};

    fn scalar_sys(u: Zonotope) -> LtvSystem {
        LtvSystem::from_pencils(
            HarmonicPencil::constant(dmatrix![-1.0]).unwrap(),
            HarmonicPencil::constant(dmatrix![1.0]).unwrap(),
            0.0,
            2.0,
            Zonotope::singleton(dvector![1.0]).unwrap(),
            u,
            None,
        )
        .unwrap()
    }

    #[test]
    fn transition_identity_and_nilpotent() {
        let sys = scalar_sys(Zonotope::singleton(dvector![0.0]).unwrap());
        let id = reference_transition(&sys, 0.5, 0.5, 10).unwrap();
        assert_eq!(id, DMatrix::identity(1, 1));

        let nil = LtvSystem::from_pencils(
            HarmonicPencil::constant(dmatrix![0.0, 1.0; 0.0, 0.0]).unwrap(),
            HarmonicPencil::constant(dmatrix![0.0; 1.0]).unwrap(),
            0.0,
            2.0,
            Zonotope::singleton(dvector![0.0, 0.0]).unwrap(),
            Zonotope::singleton(dvector![0.0]).unwrap(),
            None,
        )
        .unwrap();
        let phi = reference_transition(&nil, 0.0, 1.3, 16).unwrap();
        assert!((phi - dmatrix![1.0, 1.3; 0.0, 1.0]).abs().max() < 1e-12);
    }

    #[test]
    fn simulate_scalar_decay() {
        let sys = scalar_sys(Zonotope::singleton(dvector![0.0]).unwrap());
        let u = InputSignal::constant(0.0, 2.0, dvector![0.0]).unwrap();
        let traj = simulate(&sys, &dvector![1.0], &u, 1000).unwrap();
        let end = traj.states.last().unwrap()[0];
        assert!((end - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn simulate_zero_stays_zero() {
        let sys = scalar_sys(Zonotope::singleton(dvector![0.0]).unwrap());
        let u = InputSignal::constant(0.0, 2.0, dvector![0.0]).unwrap();
        let traj = simulate(&sys, &dvector![0.0], &u, 50).unwrap();
        assert!(traj.states.iter().all(|x| x[0] == 0.0));
    }

    #[test]
    fn simulate_superposition() {
        let sys = scalar_sys(Zonotope::singleton(dvector![0.0]).unwrap());
        let u = InputSignal::constant(0.0, 2.0, dvector![0.0]).unwrap();
        let a = simulate(&sys, &dvector![0.7], &u, 200).unwrap();
        let b = simulate(&sys, &dvector![0.3], &u, 200).unwrap();
        let ab = simulate(&sys, &dvector![1.0], &u, 200).unwrap();
        for i in 0..a.states.len() {
            assert!((a.states[i][0] + b.states[i][0] - ab.states[i][0]).abs() < 1e-10);
        }
    }

    #[test]
    fn set_integral_scalar_case() {
        let u = Zonotope::new(dvector![0.0], dmatrix![1.0]).unwrap();
        let sys = LtvSystem::from_pencils(
            HarmonicPencil::constant(dmatrix![-1.0]).unwrap(),
            HarmonicPencil::constant(dmatrix![1.0]).unwrap(),
            0.0,
            2.0,
            Zonotope::singleton(dvector![1.0]).unwrap(),
            u,
            None,
        )
        .unwrap();
        let s = set_integral_quadrature(&sys, 0.0, 1.0, &dvector![1.0], 10_000).unwrap();
        let exact = 1.0 - (-1.0f64).exp();
        assert!((s - exact).abs() < 1e-6, "quadrature {s} vs {exact}");

        assert_eq!(
            set_integral_quadrature(&sys, 0.5, 0.5, &dvector![1.0], 100).unwrap(),
            0.0
        );
        let trivial = scalar_sys(Zonotope::singleton(dvector![0.0]).unwrap());
        assert_eq!(
            set_integral_quadrature(&trivial, 0.0, 1.0, &dvector![1.0], 100).unwrap(),
            0.0
        );
    }

    #[test]
    fn hausdorff_sampled_cases() {
        let dirs = direction_set(1, 0, 0);
        let a = Zonotope::new(dvector![0.0], dmatrix![1.0]).unwrap();
        let b = Zonotope::new(dvector![0.5], dmatrix![1.0]).unwrap();
        assert_eq!(hausdorff_sampled(&a, &a, &dirs).unwrap(), 0.0);
        assert_eq!(hausdorff_sampled(&a, &b, &dirs).unwrap(), 0.5);

        let dirs2 = direction_set(2, 0, 0);
        let c = Zonotope::new(dvector![0.0, 0.0], DMatrix::identity(2, 2)).unwrap();
        let d = Zonotope::new(dvector![0.0, 0.0], DMatrix::identity(2, 2) * 2.0).unwrap();
        assert_eq!(hausdorff_sampled(&c, &d, &dirs2).unwrap(), 1.0);
    }

    #[test]
    fn direction_set_on_unit_sphere() {
        let dirs = direction_set(3, 40, 7);
        assert_eq!(dirs.len(), 6 + 40);
        for d in &dirs {
            let n1: f64 = d.iter().map(|x| x.abs()).sum();
            assert!((n1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn signal_refinement_keeps_values() {
        let sig = InputSignal::new(
            vec![0.0, 1.0, 2.0],
            vec![dvector![1.0], dvector![-1.0]],
        )
        .unwrap();
        let fine = sig.with_grid_points(&[0.25, 1.5, 1.0]).unwrap();
        assert_eq!(fine.grid(), &[0.0, 0.25, 1.0, 1.5, 2.0]);
        assert_eq!(fine.values()[0], dvector![1.0]);
        assert_eq!(fine.values()[1], dvector![1.0]);
        assert_eq!(fine.values()[2], dvector![-1.0]);
        assert_eq!(fine.values()[3], dvector![-1.0]);
    }

    #[test]
    fn signal_rejects_bad_grid() {
        assert!(InputSignal::new(vec![0.0, 0.0], vec![dvector![1.0]]).is_err());
        assert!(InputSignal::new(vec![0.0], vec![]).is_err());
        assert!(InputSignal::new(vec![0.0, 1.0], vec![]).is_err());
    }
}
