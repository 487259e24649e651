//! Exact planar convex geometry for the two-dimensional test oracle and
//! plot export: convex hulls, support functions, containment, Minkowski
//! sums, and the Hausdorff distance w.r.t. the maximum norm.
//!
//! Distances are exact up to floating round-off. The point-to-polygon
//! distance uses the fact that `P + eps*B_inf` is again a polygon whose edge
//! normals are those of `P` together with the four axis directions, so
//! `dist(v, P) = max_u (u·v - h_P(u)) / ||u||_1` over that finite normal set.

/// A convex polygon with vertices in counterclockwise order. One vertex is a
/// point, two vertices are a segment; both arise from degenerate zonotopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

impl ConvexPolygon {
    /// Wraps an already-ordered counterclockwise vertex list.
    pub(crate) fn from_vertices(vertices: Vec<[f64; 2]>) -> Self {
        debug_assert!(!vertices.is_empty());
        Self { vertices }
    }

    /// Convex hull of a point set (monotone chain); collinear boundary
    /// points are dropped.
    pub fn hull_of(points: &[[f64; 2]]) -> Self {
        assert!(!points.is_empty(), "hull of empty point set");
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        pts.dedup();
        if pts.len() <= 2 {
            return Self { vertices: pts };
        }
        let mut lower: Vec<[f64; 2]> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<[f64; 2]> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.is_empty() {
            // All points collinear: keep the two extremes.
            lower = vec![pts[0], pts[pts.len() - 1]];
        }
        Self { vertices: lower }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Support function `max_v dir·v`.
    pub fn support(&self, dir: [f64; 2]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dir[0] * v[0] + dir[1] * v[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Distance of a point to the polygon w.r.t. the maximum norm; zero for
    /// points inside.
    pub fn distance_inf(&self, p: [f64; 2]) -> f64 {
        let mut worst = 0.0f64;
        for u in self.constraint_normals() {
            let norm1 = u[0].abs() + u[1].abs();
            if norm1 == 0.0 {
                continue;
            }
            let violation = (u[0] * p[0] + u[1] * p[1] - self.support(u)) / norm1;
            worst = worst.max(violation);
        }
        worst
    }

    /// True when every vertex of `inner` is within `tol` (max norm) of `self`.
    pub fn contains(&self, inner: &ConvexPolygon, tol: f64) -> bool {
        inner.vertices.iter().all(|&v| self.distance_inf(v) <= tol)
    }

    /// Exact Hausdorff distance w.r.t. the maximum norm between two convex
    /// polygons: the directed distances are attained at vertices.
    pub fn hausdorff_inf(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
        let d_ab = a
            .vertices
            .iter()
            .map(|&v| b.distance_inf(v))
            .fold(0.0f64, f64::max);
        let d_ba = b
            .vertices
            .iter()
            .map(|&v| a.distance_inf(v))
            .fold(0.0f64, f64::max);
        d_ab.max(d_ba)
    }

    /// Minkowski sum, computed as the hull of pairwise vertex sums.
    pub fn minkowski_sum(a: &ConvexPolygon, b: &ConvexPolygon) -> ConvexPolygon {
        let mut sums = Vec::with_capacity(a.vertices.len() * b.vertices.len());
        for va in &a.vertices {
            for vb in &b.vertices {
                sums.push([va[0] + vb[0], va[1] + vb[1]]);
            }
        }
        Self::hull_of(&sums)
    }

    /// Hull of the union of two polygons (convex hull of both vertex sets).
    pub fn hull_of_union(a: &ConvexPolygon, b: &ConvexPolygon) -> ConvexPolygon {
        let mut pts = a.vertices.clone();
        pts.extend_from_slice(&b.vertices);
        Self::hull_of(&pts)
    }

    pub fn is_counterclockwise(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return true;
        }
        let mut area2 = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            area2 += p[0] * q[1] - q[0] * p[1];
        }
        area2 >= 0.0
    }

    /// Outward edge normals plus the four axis directions; the constraint
    /// set of `P + eps*B_inf` for every eps >= 0.
    fn constraint_normals(&self) -> Vec<[f64; 2]> {
        let mut normals = vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let n = self.vertices.len();
        if n >= 2 {
            for i in 0..n {
                let p = self.vertices[i];
                let q = self.vertices[(i + 1) % n];
                let d = [q[0] - p[0], q[1] - p[1]];
                if d == [0.0, 0.0] {
                    continue;
                }
                normals.push([d[1], -d[0]]);
                if n == 2 {
                    // A segment needs both sides; cyclic iteration already
                    // yields the reversed edge, so nothing extra here.
                }
            }
        }
        normals
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}
