//! Avoidance verification against unsafe regions.
//!
//! Supports of zonotopes are exact, so "the tube stays out of the halfspace
//! `{x : a^T x >= b}`" reduces to one comparison per tube step. A `Safe`
//! verdict is sound: the over-approximation contains every true trajectory,
//! so the true tube avoids the region too. `Unknown` claims nothing — the
//! over-approximation may simply be too coarse.
//!
//! Verification consumes the tube as a stream; nothing is retained beyond
//! per-region running maxima, so checking can be fused with tube
//! computation without materializing the `O(n^2 N^2)` result.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reach::TubeStep;

/// The unsafe halfspace `{x : a^T x >= b}` with normal `a` and offset `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HalfspaceJson", into = "HalfspaceJson")]
pub struct Halfspace {
    normal: DVector<f64>,
    offset: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct HalfspaceJson {
    a: Vec<f64>,
    b: f64,
}

impl TryFrom<HalfspaceJson> for Halfspace {
    type Error = Error;

    fn try_from(raw: HalfspaceJson) -> Result<Self> {
        Halfspace::new(DVector::from_vec(raw.a), raw.b)
    }
}

impl From<Halfspace> for HalfspaceJson {
    fn from(h: Halfspace) -> Self {
        HalfspaceJson {
            a: h.normal.iter().copied().collect(),
            b: h.offset,
        }
    }
}

impl Halfspace {
    pub fn new(normal: DVector<f64>, offset: f64) -> Result<Self> {
        if !normal.iter().all(|v| v.is_finite()) || !offset.is_finite() {
            return Err(Error::NonFinite("halfspace".into()));
        }
        if normal.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter(
                "halfspace normal must be nonzero".into(),
            ));
        }
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> &DVector<f64> {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Safe,
    Unknown,
}

/// Outcome of an avoidance check. `status` is `Safe` exactly when
/// `margin > 0`; `witness_step` is the tube step attaining the extremal
/// support, i.e. the step that would have to shrink for the margin to grow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub margin: f64,
    pub witness_step: usize,
}

impl Verdict {
    fn from_margin(margin: f64, witness_step: usize) -> Self {
        Verdict {
            status: if margin > 0.0 {
                Status::Safe
            } else {
                Status::Unknown
            },
            margin,
            witness_step,
        }
    }
}

/// Unsafe-region description: a list of halfspaces interpreted per `mode`.
///
/// `avoid_any` treats each halfspace as a separate unsafe region that the
/// tube must avoid. `avoid_polytope` treats the conjunction
/// `{x : a_j^T x <= b_j for all j}` as one unsafe polytope and applies the
/// sufficient separating-facet test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub halfspaces: Vec<Halfspace>,
    pub mode: RegionMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionMode {
    AvoidAny,
    AvoidPolytope,
}

/// Streams the tube once and records, for every direction, the maximum
/// support over all steps and the step attaining it.
fn max_supports<I>(tube: I, dirs: &[DVector<f64>]) -> Result<Vec<(f64, usize)>>
where
    I: IntoIterator<Item = Result<TubeStep>>,
{
    let mut best: Vec<(f64, usize)> = vec![(f64::NEG_INFINITY, 0); dirs.len()];
    let mut steps = 0usize;
    for step in tube {
        let step = step?;
        steps += 1;
        for (k, dir) in dirs.iter().enumerate() {
            let s = step.lambda.support(dir)?;
            if s > best[k].0 {
                best[k] = (s, step.index);
            }
        }
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("tube stream is empty".into()));
    }
    Ok(best)
}

/// Checks that the tube avoids the unsafe halfspace `{x : a^T x >= b}`.
/// The margin is exactly `b - max_i support(Lambda_i, a)`.
pub fn verify_halfspace<I>(tube: I, hs: &Halfspace) -> Result<Verdict>
where
    I: IntoIterator<Item = Result<TubeStep>>,
{
    let best = max_supports(tube, std::slice::from_ref(&hs.normal))?;
    let (max_support, witness) = best[0];
    Ok(Verdict::from_margin(hs.offset - max_support, witness))
}

/// Sufficient disjointness test against the polytope
/// `{x : a_j^T x <= b_j for all j}`: safe if some facet separates, i.e. the
/// whole tube lies in `{x : a_j^T x > b_j}`. Incomplete by design — an
/// exact emptiness test would need a feasibility solver — so `Unknown`
/// never claims an intersection exists.
pub fn verify_polytope_sufficient<I>(tube: I, facets: &[Halfspace]) -> Result<Verdict>
where
    I: IntoIterator<Item = Result<TubeStep>>,
{
    if facets.is_empty() {
        return Err(Error::InvalidParameter(
            "polytope needs at least one facet".into(),
        ));
    }
    let dirs: Vec<DVector<f64>> = facets.iter().map(|f| -&f.normal).collect();
    let best = max_supports(tube, &dirs)?;
    let mut verdict: Option<Verdict> = None;
    for (facet, &(max_neg_support, witness)) in facets.iter().zip(&best) {
        // min over the tube of a_j^T x, minus the facet offset.
        let margin = -max_neg_support - facet.offset;
        let candidate = Verdict::from_margin(margin, witness);
        if verdict.is_none_or(|v| candidate.margin > v.margin) {
            verdict = Some(candidate);
        }
    }
    Ok(verdict.expect("at least one facet"))
}

/// Dispatches on the region mode, streaming the tube exactly once.
pub fn verify_region<I>(tube: I, region: &Region) -> Result<Verdict>
where
    I: IntoIterator<Item = Result<TubeStep>>,
{
    if region.halfspaces.is_empty() {
        return Err(Error::InvalidParameter(
            "region needs at least one halfspace".into(),
        ));
    }
    match region.mode {
        RegionMode::AvoidPolytope => verify_polytope_sufficient(tube, &region.halfspaces),
        RegionMode::AvoidAny => {
            let dirs: Vec<DVector<f64>> =
                region.halfspaces.iter().map(|h| h.normal.clone()).collect();
            let best = max_supports(tube, &dirs)?;
            let mut verdict: Option<Verdict> = None;
            for (hs, &(max_support, witness)) in region.halfspaces.iter().zip(&best) {
                let candidate = Verdict::from_margin(hs.offset - max_support, witness);
                // The tube must avoid every region: the worst margin decides.
                if verdict.is_none_or(|v| candidate.margin < v.margin) {
                    verdict = Some(candidate);
                }
            }
            Ok(verdict.expect("at least one halfspace"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reach::{tube_sequence_with, ReachOptions};
    use crate::system::{HarmonicPencil, LtvSystem};
    use crate::zonotope::Zonotope;
    use nalgebra::{dmatrix, dvector};

    fn scalar_decay() -> LtvSystem {
        LtvSystem::from_pencils(
            HarmonicPencil::constant(dmatrix![-1.0]).unwrap(),
            HarmonicPencil::constant(dmatrix![1.0]).unwrap(),
            0.0,
            2.0,
            Zonotope::singleton(dvector![1.0]).unwrap(),
            Zonotope::singleton(dvector![0.0]).unwrap(),
            None,
        )
        .unwrap()
    }

    fn scalar_tube(n: usize) -> impl Iterator<Item = crate::error::Result<TubeStep>> + 'static {
        // Leaked system keeps the test setup simple; tests only.
        let sys: &'static LtvSystem = Box::leak(Box::new(scalar_decay()));
        tube_sequence_with(
            sys,
            n,
            ReachOptions {
                safety_margin: false,
            },
        )
        .unwrap()
    }

    #[test]
    fn scalar_halfspace_margins() {
        let hs = Halfspace::new(dvector![1.0], 1.1).unwrap();
        let verdict = verify_halfspace(scalar_tube(20), &hs).unwrap();
        assert_eq!(verdict.status, Status::Safe);
        assert_eq!(verdict.witness_step, 1);
        assert!((verdict.margin - 0.09465816384870473).abs() < 1e-15);

        let hs2 = Halfspace::new(dvector![1.0], 1.0).unwrap();
        let verdict2 = verify_halfspace(scalar_tube(20), &hs2).unwrap();
        assert_eq!(verdict2.status, Status::Unknown);
        assert!((verdict2.margin + 0.005341836151295354).abs() < 1e-15);
    }

    #[test]
    fn region_containing_start_is_unknown() {
        // X0 center is strictly inside the unsafe region; soundness forbids Safe.
        let hs = Halfspace::new(dvector![1.0], 0.5).unwrap();
        let verdict = verify_halfspace(scalar_tube(10), &hs).unwrap();
        assert_eq!(verdict.status, Status::Unknown);
        assert!(verdict.margin < 0.0);
    }

    #[test]
    fn polytope_separating_facet() {
        // Tube stays within roughly [0.13, 1.01]; the box [5 ± 0.1] is far
        // outside, so its lower facet separates.
        let facets = vec![
            Halfspace::new(dvector![1.0], 5.1).unwrap(),
            Halfspace::new(dvector![-1.0], -4.9).unwrap(),
        ];
        let verdict = verify_polytope_sufficient(scalar_tube(20), &facets).unwrap();
        assert_eq!(verdict.status, Status::Safe);

        // A polytope containing the whole tube is never proven avoided.
        let big = vec![Halfspace::new(dvector![1.0], 10.0).unwrap()];
        let verdict2 = verify_polytope_sufficient(scalar_tube(20), &big).unwrap();
        assert_eq!(verdict2.status, Status::Unknown);

        // Far-side polytope, single facet: {x : x <= -1}.
        let far = vec![Halfspace::new(dvector![1.0], -1.0).unwrap()];
        let verdict3 = verify_polytope_sufficient(scalar_tube(20), &far).unwrap();
        assert_eq!(verdict3.status, Status::Safe);
    }

    #[test]
    fn region_modes_dispatch() {
        let region = Region {
            halfspaces: vec![
                Halfspace::new(dvector![1.0], 1.1).unwrap(),
                Halfspace::new(dvector![-1.0], 0.2).unwrap(),
            ],
            mode: RegionMode::AvoidAny,
        };
        let verdict = verify_region(scalar_tube(20), &region).unwrap();
        // Second region {-x >= 0.2} i.e. x <= -0.2 is also avoided; the
        // binding margin is the smaller of the two.
        assert_eq!(verdict.status, Status::Safe);
        let first = verify_halfspace(scalar_tube(20), &region.halfspaces[0]).unwrap();
        let second = verify_halfspace(scalar_tube(20), &region.halfspaces[1]).unwrap();
        assert_eq!(verdict.margin, first.margin.min(second.margin));
    }

    #[test]
    fn dimension_mismatch_and_empty_stream() {
        let hs = Halfspace::new(dvector![1.0, 0.0], 1.0).unwrap();
        assert!(verify_halfspace(scalar_tube(5), &hs).is_err());
        let empty: Vec<crate::error::Result<TubeStep>> = Vec::new();
        let hs1 = Halfspace::new(dvector![1.0], 1.0).unwrap();
        assert!(verify_halfspace(empty, &hs1).is_err());
    }

    #[test]
    fn halfspace_validation_and_json() {
        assert!(Halfspace::new(dvector![0.0, 0.0], 1.0).is_err());
        assert!(Halfspace::new(dvector![f64::NAN], 1.0).is_err());
        let region: Region = serde_json::from_str(
            r#"{"halfspaces": [{"a": [1.0, 0.0], "b": 2.5}], "mode": "avoid_any"}"#,
        )
        .unwrap();
        assert_eq!(region.mode, RegionMode::AvoidAny);
        assert_eq!(region.halfspaces[0].offset(), 2.5);
        let text = serde_json::to_string(&region).unwrap();
        let back: Region = serde_json::from_str(&text).unwrap();
        assert_eq!(back, region);
    }

    #[test]
    fn verdict_json_shape() {
        let v = Verdict {
            status: Status::Safe,
            margin: 0.25,
            witness_step: 3,
        };
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(
            text,
            r#"{"status":"safe","margin":0.25,"witness_step":3}"#
        );
    }
}
