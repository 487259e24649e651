//! Linear time-varying system model `x'(t) = A(t) x(t) + B(t) u(t)` with the
//! data needed for guaranteed reachability: operator-norm bounds on the
//! coefficient matrices and their derivatives, zonotopic uncertainty sets,
//! and a transition-matrix approximation with a certified local error bound.
//!
//! All norms here are maximum norms; for matrices that is the induced norm,
//! i.e. the maximum absolute row sum.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zonotope::Zonotope;

/// Induced maximum norm of a matrix: the largest absolute row sum.
pub fn operator_norm_inf(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        let mut row = 0.0;
        for j in 0..m.ncols() {
            row += m[(i, j)].abs();
        }
        worst = worst.max(row);
    }
    worst
}

/// Operator-norm bounds on `A`, its first two derivatives, `B`, and the
/// derivative of `B`, valid over the whole time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    #[serde(rename = "M_A")]
    pub m_a: f64,
    #[serde(rename = "M_Adot")]
    pub m_a_dot: f64,
    #[serde(rename = "M_Addot")]
    pub m_a_ddot: f64,
    #[serde(rename = "M_B")]
    pub m_b: f64,
    #[serde(rename = "M_Bdot")]
    pub m_b_dot: f64,
}

impl BoundSet {
    pub fn new(m_a: f64, m_a_dot: f64, m_a_ddot: f64, m_b: f64, m_b_dot: f64) -> Result<Self> {
        let all = [m_a, m_a_dot, m_a_ddot, m_b, m_b_dot];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("bound set".into()));
        }
        if m_a <= 0.0 {
            return Err(Error::InvalidParameter("M_A must be positive".into()));
        }
        if m_a_dot < 0.0 || m_a_ddot < 0.0 || m_b < 0.0 || m_b_dot < 0.0 {
            return Err(Error::InvalidParameter(
                "derivative and input bounds must be nonnegative".into(),
            ));
        }
        Ok(Self {
            m_a,
            m_a_dot,
            m_a_ddot,
            m_b,
            m_b_dot,
        })
    }
}

/// One sinusoidal term `C cos(omega t) + S sin(omega t)` of a harmonic pencil.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTerm {
    pub omega: f64,
    pub cos_coeff: DMatrix<f64>,
    pub sin_coeff: DMatrix<f64>,
}

/// A matrix-valued map `t -> A0 + sum_k (C_k cos(omega_k t) + S_k sin(omega_k t))`.
///
/// This declarative family covers the benchmark systems (the footbridge
/// coefficient matrix is affine in `cos(omega t)`) and admits exact
/// derivatives and conservative norm bounds, so hypothesis data never has to
/// be guessed.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicPencil {
    a0: DMatrix<f64>,
    terms: Vec<HarmonicTerm>,
}

impl HarmonicPencil {
    pub fn new(a0: DMatrix<f64>, terms: Vec<HarmonicTerm>) -> Result<Self> {
        if !a0.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("pencil constant term".into()));
        }
        for (k, term) in terms.iter().enumerate() {
            if term.cos_coeff.shape() != a0.shape() || term.sin_coeff.shape() != a0.shape() {
                return Err(Error::DimensionMismatch(format!(
                    "pencil term {k} shape differs from constant term"
                )));
            }
            if !term.omega.is_finite()
                || !term.cos_coeff.iter().all(|v| v.is_finite())
                || !term.sin_coeff.iter().all(|v| v.is_finite())
            {
                return Err(Error::NonFinite(format!("pencil term {k}")));
            }
        }
        Ok(Self { a0, terms })
    }

    pub fn constant(a0: DMatrix<f64>) -> Result<Self> {
        Self::new(a0, Vec::new())
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a0.shape()
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let mut m = self.a0.clone();
        for term in &self.terms {
            let (c, s) = ((term.omega * t).cos(), (term.omega * t).sin());
            m += &term.cos_coeff * c + &term.sin_coeff * s;
        }
        m
    }

    /// Analytic time derivative of [`eval`](Self::eval).
    pub fn eval_derivative(&self, t: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.a0.nrows(), self.a0.ncols());
        for term in &self.terms {
            let (c, s) = ((term.omega * t).cos(), (term.omega * t).sin());
            m += &term.cos_coeff * (-term.omega * s) + &term.sin_coeff * (term.omega * c);
        }
        m
    }

    /// Conservative bounds `(sup ||A||, sup ||A'||, sup ||A''||)` from the
    /// elementwise triangle inequality: each sinusoid is bounded by the
    /// absolute values of its coefficients.
    pub fn derived_bounds(&self) -> (f64, f64, f64) {
        let (rows, cols) = self.a0.shape();
        let mut b0 = self.a0.abs();
        let mut b1 = DMatrix::zeros(rows, cols);
        let mut b2 = DMatrix::zeros(rows, cols);
        for term in &self.terms {
            let mag = term.cos_coeff.abs() + term.sin_coeff.abs();
            b0 += &mag;
            b1 += &mag * term.omega.abs();
            b2 += &mag * (term.omega * term.omega);
        }
        (
            operator_norm_inf(&b0),
            operator_norm_inf(&b1),
            operator_norm_inf(&b2),
        )
    }
}

type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// A linear time-varying control system on a compact interval, with matrix
/// evaluators, norm bounds, and zonotopic uncertainty in the initial state
/// and the input. Immutable once constructed; the evaluators must be pure.
#[derive(Clone)]
pub struct LtvSystem {
    state_dim: usize,
    input_dim: usize,
    t0: f64,
    tf: f64,
    a: MatrixFn,
    a_dot: MatrixFn,
    b: MatrixFn,
    bounds: BoundSet,
    x0: Zonotope,
    u: Zonotope,
}

impl std::fmt::Debug for LtvSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LtvSystem")
            .field("state_dim", &self.state_dim)
            .field("input_dim", &self.input_dim)
            .field("t0", &self.t0)
            .field("tf", &self.tf)
            .field("bounds", &self.bounds)
            .finish_non_exhaustive()
    }
}

impl LtvSystem {
    /// Builds a system from explicit evaluators. `a_dot` must be the true
    /// derivative of `a`; finite-difference stand-ins would invalidate the
    /// local error bound, so none are synthesized here.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t0: f64,
        tf: f64,
        a: MatrixFn,
        a_dot: MatrixFn,
        b: MatrixFn,
        bounds: BoundSet,
        x0: Zonotope,
        u: Zonotope,
    ) -> Result<Self> {
        if !(t0.is_finite() && tf.is_finite()) {
            return Err(Error::NonFinite("time interval".into()));
        }
        if t0 >= tf {
            return Err(Error::InvalidParameter("t0 must be less than tf".into()));
        }
        let state_dim = x0.dim();
        let input_dim = u.dim();
        let sys = Self {
            state_dim,
            input_dim,
            t0,
            tf,
            a,
            a_dot,
            b,
            bounds,
            x0,
            u,
        };
        for t in [t0, 0.5 * (t0 + tf), tf] {
            sys.check_shapes(t)?;
        }
        Ok(sys)
    }

    /// Builds a system from harmonic pencils for `A` and `B`. Bounds are
    /// derived conservatively unless overridden; overrides are rejected if
    /// a sampled evaluation exceeds them.
    pub fn from_pencils(
        a: HarmonicPencil,
        b: HarmonicPencil,
        t0: f64,
        tf: f64,
        x0: Zonotope,
        u: Zonotope,
        bounds_override: Option<BoundSet>,
    ) -> Result<Self> {
        let (ar, ac) = a.shape();
        if ar != ac {
            return Err(Error::DimensionMismatch(format!(
                "A pencil must be square, got {ar}x{ac}"
            )));
        }
        let (br, bc) = b.shape();
        if br != ar {
            return Err(Error::DimensionMismatch(format!(
                "B pencil has {br} rows but the state dimension is {ar}"
            )));
        }
        if x0.dim() != ar {
            return Err(Error::DimensionMismatch(format!(
                "X0 has dimension {} but the state dimension is {ar}",
                x0.dim()
            )));
        }
        if u.dim() != bc {
            return Err(Error::DimensionMismatch(format!(
                "U has dimension {} but B has {bc} columns",
                u.dim()
            )));
        }
        let bounds = match bounds_override {
            Some(bs) => bs,
            None => {
                let (m_a, m_a_dot, m_a_ddot) = a.derived_bounds();
                let (m_b, m_b_dot, _) = b.derived_bounds();
                BoundSet::new(m_a, m_a_dot, m_a_ddot, m_b, m_b_dot)?
            }
        };
        let a_eval = a.clone();
        let a_dot_eval = a;
        let b_eval = b;
        let sys = Self::new(
            t0,
            tf,
            Arc::new(move |t| a_eval.eval(t)),
            Arc::new(move |t| a_dot_eval.eval_derivative(t)),
            Arc::new(move |t| b_eval.eval(t)),
            bounds,
            x0,
            u,
        )?;
        sys.validate_bounds(64)?;
        Ok(sys)
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn bounds(&self) -> &BoundSet {
        &self.bounds
    }

    pub fn initial_set(&self) -> &Zonotope {
        &self.x0
    }

    pub fn input_set(&self) -> &Zonotope {
        &self.u
    }

    pub fn a(&self, t: f64) -> DMatrix<f64> {
        (self.a)(t)
    }

    pub fn a_dot(&self, t: f64) -> DMatrix<f64> {
        (self.a_dot)(t)
    }

    pub fn b(&self, t: f64) -> DMatrix<f64> {
        (self.b)(t)
    }

    fn check_shapes(&self, t: f64) -> Result<()> {
        let a = self.a(t);
        let ad = self.a_dot(t);
        let b = self.b(t);
        if a.shape() != (self.state_dim, self.state_dim)
            || ad.shape() != (self.state_dim, self.state_dim)
        {
            return Err(Error::DimensionMismatch(format!(
                "A evaluator returned shape {:?}, expected ({n}, {n})",
                a.shape(),
                n = self.state_dim
            )));
        }
        if b.shape() != (self.state_dim, self.input_dim) {
            return Err(Error::DimensionMismatch(format!(
                "B evaluator returned shape {:?}, expected ({}, {})",
                b.shape(),
                self.state_dim,
                self.input_dim
            )));
        }
        if !(a.iter().all(|v| v.is_finite())
            && ad.iter().all(|v| v.is_finite())
            && b.iter().all(|v| v.is_finite()))
        {
            return Err(Error::NonFinite(format!("matrix evaluator at t = {t}")));
        }
        Ok(())
    }

    /// Samples the evaluators on an equispaced grid and rejects the bound
    /// set if any sampled operator norm exceeds it (tolerance 1e-9).
    pub fn validate_bounds(&self, samples: usize) -> Result<()> {
        let samples = samples.max(2);
        let tol = 1e-9;
        for k in 0..samples {
            let t = self.t0 + (self.tf - self.t0) * (k as f64) / ((samples - 1) as f64);
            let na = operator_norm_inf(&self.a(t));
            if na > self.bounds.m_a + tol {
                return Err(Error::InvalidParameter(format!(
                    "bound M_A = {} violated: ||A({t})|| = {na}",
                    self.bounds.m_a
                )));
            }
            let nad = operator_norm_inf(&self.a_dot(t));
            if nad > self.bounds.m_a_dot + tol {
                return Err(Error::InvalidParameter(format!(
                    "bound M_Adot = {} violated: ||Adot({t})|| = {nad}",
                    self.bounds.m_a_dot
                )));
            }
            let nb = operator_norm_inf(&self.b(t));
            if nb > self.bounds.m_b + tol {
                return Err(Error::InvalidParameter(format!(
                    "bound M_B = {} violated: ||B({t})|| = {nb}",
                    self.bounds.m_b
                )));
            }
        }
        Ok(())
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-9 * (1.0 + (self.tf - self.t0).abs());
        if t < self.t0 - slack || t > self.tf + slack {
            return Err(Error::TimeOutOfRange {
                t,
                t0: self.t0,
                tf: self.tf,
            });
        }
        Ok(())
    }

    /// Second-order Taylor approximation of the transition matrix,
    ///
    /// `phi~(s+h, s) = I + h A(s) + h^2 (A'(s) + A(s)^2) / 2`,
    ///
    /// whose deviation from the true transition matrix is at most
    /// [`theta`](Self::theta)`(h)`.
    pub fn transition_approx(&self, s: f64, h: f64) -> Result<DMatrix<f64>> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter("step size must be positive".into()));
        }
        self.check_time(s)?;
        self.check_time(s + h)?;
        let a = self.a(s);
        let a_dot = self.a_dot(s);
        let n = self.state_dim;
        Ok(DMatrix::identity(n, n) + &a * h + (a_dot + &a * &a) * (0.5 * h * h))
    }

    /// Certified local error bound for [`transition_approx`](Self::transition_approx):
    ///
    /// `theta(h) = (1 + 3 M_Adot / M_A^2 + M_Addot / M_A^3)
    ///             * (exp(h M_A) - h^2 M_A^2 / 2 - h M_A - 1)`.
    ///
    /// Monotonically increasing with `theta(h) = O(h^3)` as `h -> 0`.
    pub fn theta(&self, h: f64) -> f64 {
        debug_assert!(h >= 0.0);
        let BoundSet {
            m_a,
            m_a_dot,
            m_a_ddot,
            ..
        } = self.bounds;
        let factor = 1.0 + 3.0 * m_a_dot / (m_a * m_a) + m_a_ddot / (m_a * m_a * m_a);
        let hm = h * m_a;
        factor * (hm.exp() - 0.5 * hm * hm - hm - 1.0)
    }
}

// ---------------------------------------------------------------------------
// JSON description
// ---------------------------------------------------------------------------

/// Declarative system description, the on-disk format consumed by the CLI:
///
/// ```json
/// {"t0": 0.0, "tf": 2.0,
///  "A": {"A0": [[0.0, 1.0], [-1.0, -0.1]],
///        "terms": [{"omega": 1.0, "cos": [[0.0, 0.0], [-0.5, 0.0]]}]},
///  "B": [[0.0], [1.0]],
///  "X0": {"center": [1.0, 0.0], "generators": []},
///  "U": {"center": [0.0], "generators": [[0.1]]},
///  "bounds": {"M_A": 1.6, "M_Adot": 0.5, "M_Addot": 0.5, "M_B": 1.0, "M_Bdot": 0.0}}
/// ```
///
/// Matrices are row-major nested arrays; `B` may be a plain matrix or a
/// pencil object; `bounds` is optional and overrides the derived values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    pub t0: f64,
    pub tf: f64,
    #[serde(rename = "A")]
    pub a: PencilSpec,
    #[serde(rename = "B")]
    pub b: MatrixOrPencil,
    #[serde(rename = "X0")]
    pub x0: Zonotope,
    #[serde(rename = "U")]
    pub u: Zonotope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundSet>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PencilSpec {
    #[serde(rename = "A0")]
    pub a0: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cos: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sin: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixOrPencil {
    Matrix(Vec<Vec<f64>>),
    Pencil(PencilSpec),
}

/// Parses a row-major nested list into a matrix, requiring rectangular shape.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::DimensionMismatch(format!(
                "matrix row {i} has length {} but row 0 has length {ncols}",
                row.len()
            )));
        }
    }
    Ok(DMatrix::from_row_iterator(
        nrows,
        ncols,
        rows.iter().flatten().copied(),
    ))
}

/// Row-major nested list of a matrix, the inverse of [`matrix_from_rows`].
pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl PencilSpec {
    pub fn to_pencil(&self) -> Result<HarmonicPencil> {
        let a0 = matrix_from_rows(&self.a0)?;
        let shape = a0.shape();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let cos_coeff = match &t.cos {
                Some(rows) => matrix_from_rows(rows)?,
                None => DMatrix::zeros(shape.0, shape.1),
            };
            let sin_coeff = match &t.sin {
                Some(rows) => matrix_from_rows(rows)?,
                None => DMatrix::zeros(shape.0, shape.1),
            };
            terms.push(HarmonicTerm {
                omega: t.omega,
                cos_coeff,
                sin_coeff,
            });
        }
        HarmonicPencil::new(a0, terms)
    }
}

impl MatrixOrPencil {
    pub fn to_pencil(&self) -> Result<HarmonicPencil> {
        match self {
            MatrixOrPencil::Matrix(rows) => HarmonicPencil::constant(matrix_from_rows(rows)?),
            MatrixOrPencil::Pencil(spec) => spec.to_pencil(),
        }
    }
}

impl SystemSpec {
    /// Instantiates the described system, deriving or validating bounds.
    pub fn build(&self) -> Result<LtvSystem> {
        LtvSystem::from_pencils(
            self.a.to_pencil()?,
            self.b.to_pencil()?,
            self.t0,
            self.tf,
            self.x0.clone(),
            self.u.clone(),
            self.bounds,
        )
    }
}
