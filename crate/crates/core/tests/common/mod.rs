//! Shared fixtures for the integration suites: deterministic test systems
//! and a trajectory-containment checker driven by the oracle integrator.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tubereach_core::benchmark::{build_footbridge, FootbridgeParams};
use tubereach_core::oracle::{self, InputSignal};
use tubereach_core::reach::{tube_sequence, TubeStep};
use tubereach_core::system::{HarmonicPencil, HarmonicTerm, LtvSystem};
use tubereach_core::zonotope::Zonotope;

/// Test seed, overridable through `TUBEREACH_SEED` for reproduction runs.
pub fn seed(default: u64) -> u64 {
    std::env::var("TUBEREACH_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

pub fn scalar_decay(tf: f64) -> LtvSystem {
    LtvSystem::from_pencils(
        HarmonicPencil::constant(DMatrix::from_element(1, 1, -1.0)).unwrap(),
        HarmonicPencil::constant(DMatrix::from_element(1, 1, 1.0)).unwrap(),
        0.0,
        tf,
        Zonotope::singleton(DVector::from_element(1, 1.0)).unwrap(),
        Zonotope::singleton(DVector::zeros(1)).unwrap(),
        None,
    )
    .unwrap()
}

pub fn mathieu_footbridge() -> LtvSystem {
    build_footbridge(&FootbridgeParams::default()).unwrap()
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..=scale))
}

/// A seeded damped harmonic-pencil system with zonotopic uncertainty on
/// `[0, 2]`. `time_varying_b` adds a sinusoidal term to `B` so that the
/// derivative bound `M_Bdot` is nonzero.
pub fn random_pencil_system(seed: u64, n: usize, time_varying_b: bool) -> LtvSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 2usize;

    let mut a0 = random_matrix(&mut rng, n, n, 0.8);
    for i in 0..n {
        a0[(i, i)] -= 1.2;
    }
    let a = HarmonicPencil::new(
        a0,
        vec![HarmonicTerm {
            omega: rng.gen_range(0.5..=2.0),
            cos_coeff: random_matrix(&mut rng, n, n, 0.25),
            sin_coeff: random_matrix(&mut rng, n, n, 0.25),
        }],
    )
    .unwrap();

    let b0 = random_matrix(&mut rng, n, m, 0.7);
    let b_terms = if time_varying_b {
        vec![HarmonicTerm {
            omega: rng.gen_range(0.5..=2.0),
            cos_coeff: random_matrix(&mut rng, n, m, 0.2),
            sin_coeff: random_matrix(&mut rng, n, m, 0.2),
        }]
    } else {
        Vec::new()
    };
    let b = HarmonicPencil::new(b0, b_terms).unwrap();

    let p = (seed % 3) as usize;
    let x0 = Zonotope::new(
        DVector::from_fn(n, |_, _| rng.gen_range(-0.3..=0.3)),
        random_matrix(&mut rng, n, p, 0.15),
    )
    .unwrap();
    let q = 1 + (seed % 2) as usize;
    let u = Zonotope::new(
        DVector::from_fn(m, |_, _| rng.gen_range(-0.05..=0.05)),
        random_matrix(&mut rng, m, q, 0.08),
    )
    .unwrap();

    LtvSystem::from_pencils(a, b, 0.0, 2.0, x0, u, None).unwrap()
}

/// Result of a soundness sweep: how many support comparisons ran and the
/// worst violation observed (positive means a trajectory left the sets).
pub struct SoundnessReport {
    pub checks: usize,
    pub worst_violation: f64,
}

/// Simulates `trajectories` random vertex-input solutions and checks
/// support containment in `Omega_i` at every grid time and in `Lambda_i`
/// at `intra` interior times per step, against `2n` axis directions plus
/// `extra_dirs` random ones.
pub fn soundness_sweep(
    sys: &LtvSystem,
    n_steps: usize,
    trajectories: usize,
    extra_dirs: usize,
    intra: usize,
    seed: u64,
) -> SoundnessReport {
    let steps: Vec<TubeStep> = tube_sequence(sys, n_steps)
        .unwrap()
        .map(|s| s.unwrap())
        .collect();
    let h = (sys.tf() - sys.t0()) / n_steps as f64;
    let dirs = oracle::direction_set(sys.state_dim(), extra_dirs, seed);

    // Support tables: omega[0] is X0, omega[i] is the reach set at t_i.
    let mut omega_supports: Vec<Vec<f64>> = Vec::with_capacity(n_steps + 1);
    omega_supports.push(
        dirs.iter()
            .map(|d| sys.initial_set().support(d).unwrap())
            .collect(),
    );
    for step in &steps {
        omega_supports.push(dirs.iter().map(|d| step.omega.support(d).unwrap()).collect());
    }
    let lambda_supports: Vec<Vec<f64>> = steps
        .iter()
        .map(|step| dirs.iter().map(|d| step.lambda.support(d).unwrap()).collect())
        .collect();

    // Sample times: grid plus `intra` strictly interior points per step.
    #[derive(Clone, Copy)]
    enum Slot {
        Grid(usize),
        Intra(usize),
    }
    let mut slots: Vec<(f64, Slot)> = Vec::new();
    for i in 0..=n_steps {
        slots.push((sys.t0() + i as f64 * h, Slot::Grid(i)));
    }
    for i in 1..=n_steps {
        let t_prev = sys.t0() + (i - 1) as f64 * h;
        for k in 1..=intra {
            slots.push((
                t_prev + h * k as f64 / (intra + 1) as f64,
                Slot::Intra(i),
            ));
        }
    }
    slots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    slots.dedup_by(|a, b| a.0 == b.0);

    // The signal grid reuses the slot times verbatim so that the simulated
    // trajectory reports states at bit-identical instants.
    let base_grid: Vec<f64> = (0..=n_steps).map(|i| sys.t0() + i as f64 * h).collect();
    let intra_times: Vec<f64> = slots
        .iter()
        .filter(|(_, s)| matches!(s, Slot::Intra(_)))
        .map(|(t, _)| *t)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut checks = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for traj_idx in 0..trajectories {
        let values = (0..n_steps)
            .map(|_| oracle::random_vertex(sys.input_set(), &mut rng))
            .collect();
        let base = InputSignal::new(base_grid.clone(), values).unwrap();
        let signal = base.with_grid_points(&intra_times).unwrap();
        let x0 = if traj_idx % 2 == 0 {
            oracle::random_vertex(sys.initial_set(), &mut rng)
        } else {
            oracle::random_point(sys.initial_set(), &mut rng)
        };
        let traj = oracle::simulate(sys, &x0, &signal, 8).unwrap();

        let mut slot_iter = slots.iter().peekable();
        for (t, x) in traj.times.iter().zip(&traj.states) {
            let Some(&&(st, slot)) = slot_iter.peek() else {
                break;
            };
            if *t != st {
                continue; // a pure switching point, not a check time
            }
            slot_iter.next();
            for (k, dir) in dirs.iter().enumerate() {
                let value = dir.dot(x);
                let bound = match slot {
                    Slot::Grid(i) => omega_supports[i][k],
                    Slot::Intra(i) => lambda_supports[i - 1][k],
                };
                worst = worst.max(value - bound);
                checks += 1;
            }
        }
        assert!(slot_iter.peek().is_none(), "missed sample times");
    }
    SoundnessReport {
        checks,
        worst_violation: worst,
    }
}
