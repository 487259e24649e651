//! The core recurrence: guaranteed zonotopic over-approximations of
//! reachable sets and reachable tubes on an equidistant time grid.
//!
//! For a grid `t_i = t0 + i h`, `h = (tf - t0) / N`, the reach sets satisfy
//!
//! ```text
//! Omega_0 = X0
//! Omega_i = phi~(t_i, t_{i-1}) Omega_{i-1} + h B(t_i) U
//!           + (alpha_h + theta_h m_{i-1}) B_inf
//! ```
//!
//! and the tube segments enclose the convex hull of consecutive reach sets,
//!
//! ```text
//! Lambda_i = enclose(Omega_{i-1}, phi~ Omega_{i-1} + h B(t_i) c_U)
//!            + h B(t_i) G_U [-1,1]^q
//!            + (alpha_h + beta_h + (gamma_h + theta_h) m_{i-1}) B_inf
//! ```
//!
//! where `m_{i-1}` is the maximum norm of the previous reach set and the
//! inflation radii `alpha`, `beta`, `gamma`, `theta` are closed forms of the
//! hypothesis bounds. Every true trajectory is contained in these sets, and
//! the Hausdorff error decays like `O(1/N)`.
//!
//! The recurrence is strictly sequential and deterministic: fixed evaluation
//! order, no parallel reductions, identical inputs give bit-identical
//! output. Steps are emitted one at a time and never retained; the only
//! state carried across steps is the previous center and generator matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::system::LtvSystem;
use crate::zonotope::Zonotope;

/// The step-size dependent inflation radii of the recurrence:
///
/// ```text
/// r(s)     = exp(s M_A) - 1 - s M_A
/// beta(s)  = s^2 M_Bdot ||U||
/// alpha(s) = r(s) ||U|| (M_Bdot + M_A M_B) / M_A^2
/// gamma(s) = r(s) (1 + M_Adot / M_A^2)
/// ```
///
/// together with the transition-approximation bound `theta(s)`. All five
/// vanish at `s = 0`, and `alpha(s)/s` is monotonically increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflationCoefficients {
    pub h: f64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
}

/// Evaluates the closed-form inflation radii at step size `h > 0`.
/// `||U||` is the maximum norm of the input set.
pub fn inflation(sys: &LtvSystem, h: f64) -> InflationCoefficients {
    debug_assert!(h > 0.0, "step size must be positive");
    let b = sys.bounds();
    let norm_u = sys.input_set().norm_inf();
    let r = (h * b.m_a).exp() - 1.0 - h * b.m_a;
    InflationCoefficients {
        h,
        r,
        alpha: r * norm_u * (b.m_b_dot + b.m_a * b.m_b) / (b.m_a * b.m_a),
        beta: h * h * b.m_b_dot * norm_u,
        gamma: r * (1.0 + b.m_a_dot / (b.m_a * b.m_a)),
        theta: sys.theta(h),
    }
}

/// Knobs for the recurrence. `safety_margin` multiplies every inflation
/// radius by `1 + 1e-12` to absorb the rounding of the radius arithmetic
/// itself, which is not performed with directed rounding. On by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachOptions {
    pub safety_margin: bool,
}

impl Default for ReachOptions {
    fn default() -> Self {
        Self {
            safety_margin: true,
        }
    }
}

const SAFETY_FACTOR: f64 = 1.0 + 1e-12;

/// One reach-set record: `Omega_i` at grid time `t_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachStep {
    pub index: usize,
    pub t: f64,
    pub omega: Zonotope,
}

/// The two inflation radii applied in step `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRadii {
    /// `alpha_h + theta_h m_{i-1}`, appended to `Omega_i`.
    pub reach: f64,
    /// `alpha_h + beta_h + (gamma_h + theta_h) m_{i-1}`, appended to `Lambda_i`.
    pub tube: f64,
}

/// One tube record: the segment over `[t_{i-1}, t_i]` together with the
/// reach set at its right endpoint and the bookkeeping values of the step.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeStep {
    pub index: usize,
    pub t_prev: f64,
    pub t: f64,
    /// Reach-set over-approximation `Omega_i`.
    pub omega: Zonotope,
    /// Tube-segment over-approximation `Lambda_i` with
    /// `2p + 1 + (2i - 1)(q + n)` generators.
    pub lambda: Zonotope,
    /// `m_{i-1} = ||Omega_{i-1}||_inf`.
    pub m_prev: f64,
    pub radii: StepRadii,
}

struct Stepper<'a> {
    sys: &'a LtvSystem,
    n_steps: usize,
    h: f64,
    coeffs: InflationCoefficients,
    margin: f64,
    center: DVector<f64>,
    generators: DMatrix<f64>,
    index: usize,
}

struct Advance {
    t_prev: f64,
    t: f64,
    m_prev: f64,
    radii: StepRadii,
    /// `(b_{i-1}, F_{i-1})` before the step.
    prev: Zonotope,
    /// `phi~(t_i, t_{i-1}) F_{i-1}`, reused by the tube enclosure.
    mapped_generators: DMatrix<f64>,
    /// `h B(t_i) G_U`.
    input_block: DMatrix<f64>,
    omega: Zonotope,
}

impl<'a> Stepper<'a> {
    fn new(sys: &'a LtvSystem, n_steps: usize, options: ReachOptions) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter("N must be ≥ 1".into()));
        }
        let h = (sys.tf() - sys.t0()) / n_steps as f64;
        Ok(Self {
            sys,
            n_steps,
            h,
            coeffs: inflation(sys, h),
            margin: if options.safety_margin {
                SAFETY_FACTOR
            } else {
                1.0
            },
            center: sys.initial_set().center().clone(),
            generators: sys.initial_set().generators().clone(),
            index: 0,
        })
    }

    fn norm_prev(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.center.len() {
            let mut row = self.center[i].abs();
            for j in 0..self.generators.ncols() {
                row += self.generators[(i, j)].abs();
            }
            worst = worst.max(row);
        }
        worst
    }

    fn advance(&mut self) -> Result<Advance> {
        let i = self.index + 1;
        debug_assert!(i <= self.n_steps);
        let t_prev = self.sys.t0() + (i - 1) as f64 * self.h;
        let t = self.sys.t0() + i as f64 * self.h;
        let n = self.sys.state_dim();
        let u = self.sys.input_set();

        let phi = self.sys.transition_approx(t_prev, self.h)?;
        let b_mat = self.sys.b(t);
        let m_prev = self.norm_prev();
        let radii = StepRadii {
            reach: (self.coeffs.alpha + self.coeffs.theta * m_prev) * self.margin,
            tube: (self.coeffs.alpha
                + self.coeffs.beta
                + (self.coeffs.gamma + self.coeffs.theta) * m_prev)
                * self.margin,
        };

        let mapped_generators = &phi * &self.generators;
        let input_block = (&b_mat * u.generators()) * self.h;
        let new_center = &phi * &self.center + (&b_mat * u.center()) * self.h;

        let q_prev = self.generators.ncols();
        let q_in = input_block.ncols();
        let mut new_generators = DMatrix::zeros(n, q_prev + q_in + n);
        new_generators
            .view_mut((0, 0), (n, q_prev))
            .copy_from(&mapped_generators);
        new_generators
            .view_mut((0, q_prev), (n, q_in))
            .copy_from(&input_block);
        for k in 0..n {
            new_generators[(k, q_prev + q_in + k)] = radii.reach;
        }

        let prev = Zonotope::new(
            std::mem::replace(&mut self.center, new_center),
            std::mem::replace(&mut self.generators, new_generators),
        )
        .map_err(|e| overflow(i, e))?;
        let omega = Zonotope::new(self.center.clone(), self.generators.clone())
            .map_err(|e| overflow(i, e))?;
        self.index = i;

        Ok(Advance {
            t_prev,
            t,
            m_prev,
            radii,
            prev,
            mapped_generators,
            input_block,
            omega,
        })
    }
}

fn overflow(step: usize, cause: Error) -> Error {
    Error::Overflow {
        step,
        what: cause.to_string(),
    }
}

/// Streaming reach-set sequence `(t_i, Omega_i)` for `i in [0; N]`.
/// `Omega_0 = X0` is emitted first. After `i` steps, `Omega_i` has exactly
/// `p + i (q + n)` generators.
pub fn reach_sequence(sys: &LtvSystem, n_steps: usize) -> Result<ReachSequence<'_>> {
    reach_sequence_with(sys, n_steps, ReachOptions::default())
}

pub fn reach_sequence_with(
    sys: &LtvSystem,
    n_steps: usize,
    options: ReachOptions,
) -> Result<ReachSequence<'_>> {
    Ok(ReachSequence {
        stepper: Stepper::new(sys, n_steps, options)?,
        emitted_initial: false,
        failed: false,
    })
}

pub struct ReachSequence<'a> {
    stepper: Stepper<'a>,
    emitted_initial: bool,
    failed: bool,
}

impl ReachSequence<'_> {
    pub fn step_size(&self) -> f64 {
        self.stepper.h
    }

    pub fn coefficients(&self) -> InflationCoefficients {
        self.stepper.coeffs
    }
}

impl Iterator for ReachSequence<'_> {
    type Item = Result<ReachStep>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if !self.emitted_initial {
            self.emitted_initial = true;
            return Some(Ok(ReachStep {
                index: 0,
                t: self.stepper.sys.t0(),
                omega: self.stepper.sys.initial_set().clone(),
            }));
        }
        if self.stepper.index >= self.stepper.n_steps {
            return None;
        }
        match self.stepper.advance() {
            Ok(adv) => Some(Ok(ReachStep {
                index: self.stepper.index,
                t: adv.t,
                omega: adv.omega,
            })),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Streaming tube sequence `Lambda_i` for `i in [1; N]`, each step paired
/// with the reach set `Omega_i` at its right endpoint.
pub fn tube_sequence(sys: &LtvSystem, n_steps: usize) -> Result<TubeSequence<'_>> {
    tube_sequence_with(sys, n_steps, ReachOptions::default())
}

pub fn tube_sequence_with(
    sys: &LtvSystem,
    n_steps: usize,
    options: ReachOptions,
) -> Result<TubeSequence<'_>> {
    Ok(TubeSequence {
        stepper: Stepper::new(sys, n_steps, options)?,
        failed: false,
    })
}

pub struct TubeSequence<'a> {
    stepper: Stepper<'a>,
    failed: bool,
}

impl TubeSequence<'_> {
    pub fn step_size(&self) -> f64 {
        self.stepper.h
    }

    pub fn coefficients(&self) -> InflationCoefficients {
        self.stepper.coeffs
    }
}

impl Iterator for TubeSequence<'_> {
    type Item = Result<TubeStep>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.stepper.index >= self.stepper.n_steps {
            return None;
        }
        let step = self.make_step();
        if step.is_err() {
            self.failed = true;
        }
        Some(step)
    }
}

impl TubeSequence<'_> {
    fn make_step(&mut self) -> Result<TubeStep> {
        let adv = self.stepper.advance()?;
        let i = self.stepper.index;
        let n = self.stepper.sys.state_dim();

        // Second enclosure operand is (b_i, phi~ F_{i-1}). Both operands
        // carry p + (i-1)(q + n) generators by construction; anything else
        // is a bug, not an input defect.
        let mapped_prev = Zonotope::new(adv.omega.center().clone(), adv.mapped_generators.clone())
            .map_err(|e| overflow(i, e))?;
        assert_eq!(
            adv.prev.generator_count(),
            mapped_prev.generator_count(),
            "enclosure operands must have equal generator counts"
        );
        let hull = adv.prev.enclose(&mapped_prev).map_err(|e| overflow(i, e))?;

        let q_hull = hull.generator_count();
        let q_in = adv.input_block.ncols();
        let mut h_gens = DMatrix::zeros(n, q_hull + q_in + n);
        h_gens
            .view_mut((0, 0), (n, q_hull))
            .copy_from(hull.generators());
        h_gens
            .view_mut((0, q_hull), (n, q_in))
            .copy_from(&adv.input_block);
        for k in 0..n {
            h_gens[(k, q_hull + q_in + k)] = adv.radii.tube;
        }
        let lambda =
            Zonotope::new(hull.center().clone(), h_gens).map_err(|e| overflow(i, e))?;

        Ok(TubeStep {
            index: i,
            t_prev: adv.t_prev,
            t: adv.t,
            omega: adv.omega,
            lambda,
            m_prev: adv.m_prev,
            radii: adv.radii,
        })
    }
}
