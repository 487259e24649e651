//! Zonotopes and the exact set operations the reachability recurrence needs.
//!
//! A zonotope `Z(c, G) = c + G·[-1,1]^q` is described by its center `c` and
//! the columns of its generator matrix `G`. Zonotopes are closed under
//! Minkowski sums and linear maps, and their support functions, maximum
//! norms, and interval hulls have closed forms, which is what makes the
//! recurrence in [`crate::reach`] purely linear-algebraic.
//!
//! Zero generator columns are retained, never dropped: the generator-count
//! bookkeeping of the algorithm is exact, so a column of zeros is as
//! meaningful as any other.

mod polygon;

pub use polygon::ConvexPolygon;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A zonotope `c + G·[-1,1]^q` in R^n. Immutable after construction; all
/// operations are pure functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZonotopeJson", into = "ZonotopeJson")]
pub struct Zonotope {
    center: DVector<f64>,
    generators: DMatrix<f64>,
}

/// Wire format: `{"center": [...], "generators": [[col1], [col2], ...]}`
/// with generators listed column by column.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ZonotopeJson {
    center: Vec<f64>,
    generators: Vec<Vec<f64>>,
}

impl TryFrom<ZonotopeJson> for Zonotope {
    type Error = Error;

    fn try_from(raw: ZonotopeJson) -> Result<Self> {
        let n = raw.center.len();
        let q = raw.generators.len();
        let mut gens = DMatrix::zeros(n, q);
        for (j, col) in raw.generators.iter().enumerate() {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "generator column {j} has length {} but center has length {n}",
                    col.len()
                )));
            }
            for (i, &v) in col.iter().enumerate() {
                gens[(i, j)] = v;
            }
        }
        Zonotope::new(DVector::from_vec(raw.center), gens)
    }
}

impl From<Zonotope> for ZonotopeJson {
    fn from(z: Zonotope) -> Self {
        ZonotopeJson {
            center: z.center.iter().copied().collect(),
            generators: (0..z.generators.ncols())
                .map(|j| z.generators.column(j).iter().copied().collect())
                .collect(),
        }
    }
}

impl Zonotope {
    /// Builds a zonotope, checking that every entry is finite and that the
    /// generator matrix has one row per state coordinate.
    pub fn new(center: DVector<f64>, generators: DMatrix<f64>) -> Result<Self> {
        if generators.nrows() != center.len() {
            return Err(Error::DimensionMismatch(format!(
                "generator matrix has {} rows but center has length {}",
                generators.nrows(),
                center.len()
            )));
        }
        if !center.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("zonotope center".into()));
        }
        if !generators.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("zonotope generators".into()));
        }
        Ok(Self { center, generators })
    }

    /// The singleton `{center}`, a zonotope with zero generators.
    pub fn singleton(center: DVector<f64>) -> Result<Self> {
        let n = center.len();
        Self::new(center, DMatrix::zeros(n, 0))
    }

    /// The scaled unit ball of the maximum norm, `Z(0, radius * I)`.
    pub fn ball_inf(dim: usize, radius: f64) -> Result<Self> {
        Self::new(
            DVector::zeros(dim),
            DMatrix::from_diagonal_element(dim, dim, radius),
        )
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn generator_count(&self) -> usize {
        self.generators.ncols()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    /// Exact Minkowski sum: centers add, generator columns concatenate.
    pub fn minkowski_sum(&self, other: &Zonotope) -> Result<Zonotope> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "minkowski_sum of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let mut gens = DMatrix::zeros(self.dim(), self.generator_count() + other.generator_count());
        gens.view_mut((0, 0), (self.dim(), self.generator_count()))
            .copy_from(&self.generators);
        gens.view_mut(
            (0, self.generator_count()),
            (self.dim(), other.generator_count()),
        )
        .copy_from(&other.generators);
        Zonotope::new(&self.center + &other.center, gens)
    }

    /// Exact image under a linear map: `L·Z(c, G) = Z(L·c, L·G)`.
    pub fn linear_map(&self, map: &DMatrix<f64>) -> Result<Zonotope> {
        if map.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "linear map with {} columns applied to dimension {}",
                map.ncols(),
                self.dim()
            )));
        }
        Zonotope::new(map * &self.center, map * &self.generators)
    }

    /// The set norm `sup_{x in Z} ||x||_inf`, which for a zonotope equals
    /// `max_i (|c_i| + sum_j |G_{i,j}|)`.
    pub fn norm_inf(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            let mut row = self.center[i].abs();
            for j in 0..self.generator_count() {
                row += self.generators[(i, j)].abs();
            }
            worst = worst.max(row);
        }
        worst
    }

    /// Exact support function `max_{x in Z} dir^T x = dir^T c + sum_j |dir^T g_j|`.
    pub fn support(&self, dir: &DVector<f64>) -> Result<f64> {
        if dir.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "support direction of length {} for dimension {}",
                dir.len(),
                self.dim()
            )));
        }
        if !dir.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("support direction".into()));
        }
        let mut s = dir.dot(&self.center);
        for j in 0..self.generator_count() {
            s += dir.dot(&self.generators.column(j).clone_owned()).abs();
        }
        Ok(s)
    }

    /// Encloses the convex hull of two zonotopes with equal generator counts:
    ///
    /// `enclose(Z(b,F), Z(c,G)) = Z((b+c)/2, ((F+G)/2, (b-c)/2, (F-G)/2))`.
    ///
    /// The result has `2p + 1` generators and contains `conv(self ∪ other)`;
    /// the Hausdorff distance to that hull is at most the maximum absolute
    /// row sum of `F - G`.
    pub fn enclose(&self, other: &Zonotope) -> Result<Zonotope> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "enclose of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        if self.generator_count() != other.generator_count() {
            return Err(Error::DimensionMismatch(format!(
                "enclose of generator counts {} and {}; pad the shorter operand first",
                self.generator_count(),
                other.generator_count()
            )));
        }
        let n = self.dim();
        let p = self.generator_count();
        let center = (&self.center + &other.center) * 0.5;
        let mut gens = DMatrix::zeros(n, 2 * p + 1);
        gens.view_mut((0, 0), (n, p))
            .copy_from(&((&self.generators + &other.generators) * 0.5));
        gens.set_column(p, &((&self.center - &other.center) * 0.5));
        gens.view_mut((0, p + 1), (n, p))
            .copy_from(&((&self.generators - &other.generators) * 0.5));
        Zonotope::new(center, gens)
    }

    /// Tight axis-aligned bounding box, `[c_i - r_i, c_i + r_i]` with
    /// `r_i = sum_j |G_{i,j}|`.
    pub fn interval_hull(&self) -> IntervalHull {
        let mut lower = self.center.clone();
        let mut upper = self.center.clone();
        for i in 0..self.dim() {
            let mut r = 0.0;
            for j in 0..self.generator_count() {
                r += self.generators[(i, j)].abs();
            }
            lower[i] -= r;
            upper[i] += r;
        }
        IntervalHull { lower, upper }
    }

    /// Selects two coordinates, a linear-map special case used for plotting.
    pub fn project(&self, dims: (usize, usize)) -> Result<Zonotope> {
        let (a, b) = dims;
        if a >= self.dim() || b >= self.dim() {
            return Err(Error::InvalidParameter(format!(
                "projection indices ({a}, {b}) out of range for dimension {}",
                self.dim()
            )));
        }
        let mut map = DMatrix::zeros(2, self.dim());
        map[(0, a)] = 1.0;
        map[(1, b)] = 1.0;
        self.linear_map(&map)
    }

    /// Exact boundary polygon of a two-dimensional zonotope, vertices in
    /// counterclockwise order.
    ///
    /// Generators are normalized into angle range `[0, π)`, collinear ones
    /// are merged, and the boundary is walked edge by edge; degenerate
    /// inputs (rank < 2) yield a segment or a single point.
    pub fn to_polygon(&self) -> Result<ConvexPolygon> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "to_polygon requires dimension 2, got {}",
                self.dim()
            )));
        }
        let c = [self.center[0], self.center[1]];
        // Normalize so every generator points into the upper half plane.
        let mut gens: Vec<[f64; 2]> = Vec::new();
        for j in 0..self.generator_count() {
            let (x, y) = (self.generators[(0, j)], self.generators[(1, j)]);
            if x == 0.0 && y == 0.0 {
                continue;
            }
            if y < 0.0 || (y == 0.0 && x < 0.0) {
                gens.push([-x, -y]);
            } else {
                gens.push([x, y]);
            }
        }
        gens.sort_by(|a, b| {
            a[1].atan2(a[0])
                .partial_cmp(&b[1].atan2(b[0]))
                .expect("finite angles")
        });
        // Merge collinear neighbors so each boundary edge direction is unique.
        let mut merged: Vec<[f64; 2]> = Vec::new();
        for g in gens {
            match merged.last_mut() {
                Some(last) if last[0] * g[1] - last[1] * g[0] == 0.0 => {
                    last[0] += g[0];
                    last[1] += g[1];
                }
                _ => merged.push(g),
            }
        }
        if merged.is_empty() {
            return Ok(ConvexPolygon::from_vertices(vec![c]));
        }
        if merged.len() == 1 {
            let g = merged[0];
            return Ok(ConvexPolygon::from_vertices(vec![
                [c[0] - g[0], c[1] - g[1]],
                [c[0] + g[0], c[1] + g[1]],
            ]));
        }
        let mut v = c;
        for g in &merged {
            v = [v[0] - g[0], v[1] - g[1]];
        }
        let mut vertices = Vec::with_capacity(2 * merged.len());
        vertices.push(v);
        for g in &merged {
            v = [v[0] + 2.0 * g[0], v[1] + 2.0 * g[1]];
            vertices.push(v);
        }
        for g in merged.iter().take(merged.len() - 1) {
            v = [v[0] - 2.0 * g[0], v[1] - 2.0 * g[1]];
            vertices.push(v);
        }
        Ok(ConvexPolygon::from_vertices(vertices))
    }
}

/// Tight componentwise box of a zonotope.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalHull {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}
