//! The footbridge benchmark family and the study drivers built on it.
//!
//! A pinned-pinned beam under a cosine-modulated pedestrian load and a
//! bounded disturbance,
//!
//! ```text
//! m q_tt + EI q_yyyy + c q_t = f0 cos(omega t) q + w,   |w| <= wbar,
//! q(t, 0) = q(t, L) = q_yy(t, 0) = q_yy(t, L) = 0,
//! q(0, y) = q_t(0, y) = 0,
//! ```
//!
//! is discretized in space by second-order centered differences on the grid
//! `y_i = i L / Nd`. The zero-curvature boundary conditions are themselves
//! discretized by one-sided second differences, `q_0 - 2 q_1 + q_2 = 0` with
//! `q_0 = 0` (mirrored on the right), which eliminates `q_1 = q_2 / 2` and
//! `q_{Nd-1} = q_{Nd-2} / 2` and leaves the `Nd - 3` interior unknowns
//! `q_2 .. q_{Nd-2}`. That one-sided reading is the unique one matching the
//! `Nd - 3` unknown count; the eliminated nodes are half their neighbor and
//! therefore never attain the displacement maximum.
//!
//! With `x = (z, z')` the result is a linear time-varying system of
//! dimension `n = 2 (Nd - 3)` whose coefficient matrix is affine in
//! `cos(omega t)`, i.e. a harmonic pencil; for `Nd = 4` it is a damped,
//! disturbed cosine-modulated oscillator.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::oracle::hausdorff_sampled;
use crate::reach::{reach_sequence, tube_sequence, TubeStep};
use crate::system::{matrix_to_rows, LtvSystem, MatrixOrPencil, PencilSpec, SystemSpec, TermSpec};
use crate::zonotope::Zonotope;

/// Physical and discretization parameters of the footbridge model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootbridgeParams {
    /// Bridge length `L`.
    pub length: f64,
    /// Mass per unit length `m`.
    pub mass: f64,
    /// Damping coefficient `c`.
    pub damping: f64,
    /// Bending stiffness `EI`.
    pub stiffness: f64,
    /// Load amplitude `f0`.
    pub load_amplitude: f64,
    /// Load frequency `omega`.
    pub omega: f64,
    /// Disturbance bound `wbar`.
    pub wbar: f64,
    /// Spatial discretization parameter `Nd >= 4`.
    pub nd: usize,
    pub t0: f64,
    pub tf: f64,
}

impl Default for FootbridgeParams {
    /// The reference parameter set: `L = 10`, `m = 2`,
    /// `c = EI = f0 = omega = 1`, `wbar = 0.01`, horizon `[0, 20]`, `Nd = 4`.
    fn default() -> Self {
        Self {
            length: 10.0,
            mass: 2.0,
            damping: 1.0,
            stiffness: 1.0,
            load_amplitude: 1.0,
            omega: 1.0,
            wbar: 0.01,
            nd: 4,
            t0: 0.0,
            tf: 20.0,
        }
    }
}

impl FootbridgeParams {
    fn validate(&self) -> Result<()> {
        if self.nd < 4 {
            return Err(Error::InvalidParameter("Nd must be ≥ 4".into()));
        }
        if !(self.length > 0.0 && self.mass > 0.0) {
            return Err(Error::InvalidParameter(
                "bridge length and mass must be positive".into(),
            ));
        }
        if !(self.wbar >= 0.0) {
            return Err(Error::InvalidParameter(
                "disturbance bound must be nonnegative".into(),
            ));
        }
        let all = [
            self.length,
            self.mass,
            self.damping,
            self.stiffness,
            self.load_amplitude,
            self.omega,
            self.wbar,
            self.t0,
            self.tf,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("footbridge parameters".into()));
        }
        Ok(())
    }

    /// Number of interior unknowns `Nd - 3`.
    pub fn interior_nodes(&self) -> usize {
        self.nd - 3
    }

    /// State dimension `2 (Nd - 3)`.
    pub fn state_dim(&self) -> usize {
        2 * self.interior_nodes()
    }
}

/// The `(Nd-3) x (Nd-3)` fourth-difference matrix on the interior unknowns:
/// the stencil `[1, -4, 6, -4, 1]` with `q_0 = q_Nd = 0` and the boundary
/// eliminations `q_1 = q_2 / 2`, `q_{Nd-1} = q_{Nd-2} / 2` folded in.
/// Pentadiagonal and symmetric in its interior rows, centro-symmetric as a
/// whole.
pub fn fourth_difference_matrix(nd: usize) -> Result<DMatrix<f64>> {
    if nd < 4 {
        return Err(Error::InvalidParameter("Nd must be ≥ 4".into()));
    }
    let k = nd - 3;
    let mut d4 = DMatrix::zeros(k, k);
    for i in 0..k {
        let node = i + 2;
        for (offset, coeff) in [(-2i64, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)] {
            let l = node as i64 + offset;
            if l <= 0 || l >= nd as i64 {
                continue; // q_0 = q_Nd = 0
            }
            let l = l as usize;
            if l == 1 {
                d4[(i, 0)] += 0.5 * coeff; // q_1 = q_2 / 2
            } else if l == nd - 1 {
                d4[(i, k - 1)] += 0.5 * coeff; // q_{Nd-1} = q_{Nd-2} / 2
            } else {
                d4[(i, l - 2)] += coeff;
            }
        }
    }
    Ok(d4)
}

/// The footbridge model as a declarative system description.
pub fn footbridge_spec(p: &FootbridgeParams) -> Result<SystemSpec> {
    p.validate()?;
    let k = p.interior_nodes();
    let n = 2 * k;
    let hy = p.length / p.nd as f64;
    let d4 = fourth_difference_matrix(p.nd)?;

    // A0 = [[0, I], [-(EI / (m hy^4)) D4, -(c/m) I]]; the load contributes
    // +(f0/m) cos(omega t) on the lower-left block.
    let mut a0 = DMatrix::zeros(n, n);
    a0.view_mut((0, k), (k, k)).copy_from(&DMatrix::identity(k, k));
    a0.view_mut((k, 0), (k, k))
        .copy_from(&(&d4 * (-p.stiffness / (p.mass * hy.powi(4)))));
    a0.view_mut((k, k), (k, k))
        .copy_from(&(DMatrix::identity(k, k) * (-p.damping / p.mass)));

    let mut cos_coeff = DMatrix::zeros(n, n);
    cos_coeff
        .view_mut((k, 0), (k, k))
        .copy_from(&(DMatrix::identity(k, k) * (p.load_amplitude / p.mass)));

    let mut b = DMatrix::zeros(n, k);
    b.view_mut((k, 0), (k, k)).copy_from(&DMatrix::identity(k, k));

    let x0 = Zonotope::singleton(DVector::zeros(n))?;
    let u = Zonotope::ball_inf(k, p.wbar / p.mass)?;

    Ok(SystemSpec {
        t0: p.t0,
        tf: p.tf,
        a: PencilSpec {
            a0: matrix_to_rows(&a0),
            terms: vec![TermSpec {
                omega: p.omega,
                cos: Some(matrix_to_rows(&cos_coeff)),
                sin: None,
            }],
        },
        b: MatrixOrPencil::Matrix(matrix_to_rows(&b)),
        x0,
        u,
        bounds: None,
    })
}

/// Instantiates the footbridge model with conservatively derived bounds.
pub fn build_footbridge(p: &FootbridgeParams) -> Result<LtvSystem> {
    footbridge_spec(p)?.build()
}

/// Upper bound on the nodal displacement `|q(t, y_i)|` over the whole
/// horizon: the largest interval-hull extreme over the position coordinates
/// of every tube segment.
pub fn displacement_bound<I>(tube: I, nd: usize) -> Result<f64>
where
    I: IntoIterator<Item = Result<TubeStep>>,
{
    if nd < 4 {
        return Err(Error::InvalidParameter("Nd must be ≥ 4".into()));
    }
    let k = nd - 3;
    let mut bound = 0.0f64;
    let mut steps = 0usize;
    for step in tube {
        let step = step?;
        if step.lambda.dim() != 2 * k {
            return Err(Error::DimensionMismatch(format!(
                "tube of dimension {} for Nd = {nd} (expected {})",
                step.lambda.dim(),
                2 * k
            )));
        }
        let hull = step.lambda.interval_hull();
        for c in 0..k {
            bound = bound.max(hull.lower[c].abs()).max(hull.upper[c].abs());
        }
        steps += 1;
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("tube stream is empty".into()));
    }
    Ok(bound)
}

/// What the per-`N` terminal reach sets are compared against.
#[derive(Debug, Clone)]
pub enum ConvergenceTarget {
    /// The terminal set of the finest run in the list (self-convergence).
    FinestRun,
    /// A known terminal reachable set, e.g. an analytic solution.
    Analytic(Zonotope),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_steps: usize,
    /// Sampled-support Hausdorff estimate for the terminal reach set.
    pub error: f64,
    /// Empirical order w.r.t. the previous row, where defined.
    pub order: Option<f64>,
}

/// Runs the reach recurrence for every `N` in `ns` and reports terminal
/// errors and empirical convergence orders between consecutive rows.
pub fn convergence_study(
    sys: &LtvSystem,
    ns: &[usize],
    target: &ConvergenceTarget,
    directions: &[DVector<f64>],
) -> Result<Vec<ConvergenceRow>> {
    if ns.len() < 2 {
        return Err(Error::InvalidParameter(
            "convergence study needs at least two values of N".into(),
        ));
    }
    if ns.iter().any(|&n| n == 0) || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "N values must be strictly increasing and ≥ 1".into(),
        ));
    }
    let mut terminals = Vec::with_capacity(ns.len());
    for &n in ns {
        let last = reach_sequence(sys, n)?
            .last()
            .expect("sequence is nonempty")?;
        terminals.push(last.omega);
    }
    let reference = match target {
        ConvergenceTarget::FinestRun => terminals.last().expect("nonempty").clone(),
        ConvergenceTarget::Analytic(z) => z.clone(),
    };
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for (&n, term) in ns.iter().zip(&terminals) {
        let error = hausdorff_sampled(term, &reference, directions)?;
        let order = match rows.last() {
            Some(prev) if prev.error > 0.0 && error > 0.0 => {
                Some((prev.error / error).ln() / (n as f64 / prev.n_steps as f64).ln())
            }
            _ => None,
        };
        rows.push(ConvergenceRow {
            n_steps: n,
            error,
            order,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub nd: usize,
    pub state_dim: usize,
    /// Total float components across all tube generators,
    /// `sum_i n * (2p + 1 + (2i - 1)(q + n))`.
    pub generator_components: usize,
    pub seconds: f64,
}

/// Computes the full tube at fixed `N` for each spatial resolution and
/// records the stored generator volume and the wall time.
pub fn scaling_study(
    base: &FootbridgeParams,
    nds: &[usize],
    n_steps: usize,
) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::with_capacity(nds.len());
    for &nd in nds {
        let params = FootbridgeParams { nd, ..*base };
        let sys = build_footbridge(&params)?;
        let n = sys.state_dim();
        let start = Instant::now();
        let mut components = 0usize;
        for step in tube_sequence(&sys, n_steps)? {
            let step = step?;
            components += n * step.lambda.generator_count();
        }
        rows.push(ScalingRow {
            nd,
            state_dim: n,
            generator_components: components,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}
