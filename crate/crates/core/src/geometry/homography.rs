use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GeometryError, ImagePoint, OverheadPoint};

/// Projective divisors smaller than this are treated as points at infinity.
const W_EPS: f64 = 1e-12;
/// Minimum |det| of the (3,3)-normalized matrix.
const DET_EPS: f64 = 1e-12;
/// Relative area below which three anchors count as collinear.
const COLLINEAR_EPS: f64 = 1e-9;
/// Smallest acceptable |pivot| relative to the largest in the 8×8 solve.
const PIVOT_EPS: f64 = 1e-12;

/// One image ↔ overhead correspondence, typically a crosswalk vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorPair {
    pub image: ImagePoint,
    pub overhead: OverheadPoint,
}

impl AnchorPair {
    pub fn new(image: ImagePoint, overhead: OverheadPoint) -> Self {
        Self { image, overhead }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorSide {
    Image,
    Overhead,
}

impl fmt::Display for AnchorSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnchorSide::Image => "image",
            AnchorSide::Overhead => "overhead",
        })
    }
}

/// Checks that no three of the four points are collinear (or coincide).
pub fn check_general_position(
    points: &[[f64; 2]; 4],
    side: AnchorSide,
) -> Result<(), GeometryError> {
    for &(a, b, c) in &[(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        let (pa, pb, pc) = (points[a], points[b], points[c]);
        if pa.iter().chain(&pb).chain(&pc).any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let ab = [pb[0] - pa[0], pb[1] - pa[1]];
        let ac = [pc[0] - pa[0], pc[1] - pa[1]];
        let bc = [pc[0] - pb[0], pc[1] - pb[1]];
        let cross = ab[0] * ac[1] - ab[1] * ac[0];
        let longest = [ab, ac, bc]
            .iter()
            .map(|v| v[0] * v[0] + v[1] * v[1])
            .fold(0.0, f64::max);
        if longest == 0.0 || cross.abs() <= COLLINEAR_EPS * longest {
            return Err(GeometryError::DegenerateAnchors { side, a, b, c });
        }
    }
    Ok(())
}

/// Planar projective map from the oblique image to the overhead frame.
///
/// The matrix is stored as given; [`Homography::estimate`] returns it with
/// element (3,3) scaled to 1. Projection is invariant to the overall scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl Homography {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Wraps a raw matrix, rejecting non-finite or singular ones.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self, GeometryError> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let h = Self { m };
        let det = det3(&h.normalized().m);
        if det.is_nan() || det.abs() <= DET_EPS {
            return Err(GeometryError::SingularMatrix { det });
        }
        Ok(h)
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    /// Scales the matrix so that element (3,3) is 1; left unchanged when that
    /// element is zero.
    pub fn normalized(&self) -> Self {
        let s = self.m[2][2];
        if s == 0.0 {
            return *self;
        }
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|v| *v /= s);
        Self { m }
    }

    /// Exact four-pair direct linear solve.
    ///
    /// Both point sets are first conditioned with a similarity transform
    /// (centroid to origin, mean radius √2), then the eight unknowns of the
    /// conditioned matrix are found by Gaussian elimination with partial
    /// pivoting and the result is mapped back.
    pub fn estimate(anchors: &[AnchorPair; 4]) -> Result<Self, GeometryError> {
        let src: [[f64; 2]; 4] = anchors.map(|a| a.image.into());
        let dst: [[f64; 2]; 4] = anchors.map(|a| a.overhead.into());
        check_general_position(&src, AnchorSide::Image)?;
        check_general_position(&dst, AnchorSide::Overhead)?;

        let (t_src, src_n) = condition(&src);
        let (t_dst, dst_n) = condition(&dst);

        let mut a = [[0.0f64; 9]; 8];
        for i in 0..4 {
            let [x, y] = src_n[i];
            let [u, v] = dst_n[i];
            a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
            a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
        }
        let h = solve8(a)?;
        let hn = [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]];

        let m = matmul(&t_dst.inverse_matrix(), &matmul(&hn, &t_src.matrix()));
        Self::from_matrix(m).map(|h| h.normalized())
    }

    /// Applies the map to raw coordinates.
    pub fn apply(&self, x: f64, y: f64) -> Result<(f64, f64), GeometryError> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let m = &self.m;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        if w.abs() < W_EPS {
            return Err(GeometryError::PointAtInfinity { w });
        }
        Ok((
            (m[0][0] * x + m[0][1] * y + m[0][2]) / w,
            (m[1][0] * x + m[1][1] * y + m[1][2]) / w,
        ))
    }

    pub fn project(&self, p: ImagePoint) -> Result<OverheadPoint, GeometryError> {
        self.apply(p.x, p.y).map(|(x, y)| OverheadPoint::new(x, y))
    }

    pub fn inverse(&self) -> Result<Self, GeometryError> {
        let m = &self.m;
        let det = det3(m);
        if det == 0.0 || !det.is_finite() {
            return Err(GeometryError::SingularMatrix { det });
        }
        let c = |r0: usize, c0: usize, r1: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let adj = [
            [c(1, 1, 2, 2), -c(0, 1, 2, 2), c(0, 1, 1, 2)],
            [-c(1, 0, 2, 2), c(0, 0, 2, 2), -c(0, 0, 1, 2)],
            [c(1, 0, 2, 1), -c(0, 0, 2, 1), c(0, 0, 1, 1)],
        ];
        Self::from_matrix(adj.map(|row| row.map(|v| v / det))).map(|h| h.normalized())
    }

    /// Euclidean error (overhead px) of each anchor after projection.
    pub fn residuals(&self, anchors: &[AnchorPair; 4]) -> [f64; 4] {
        anchors.map(|a| match self.project(a.image) {
            Ok(p) => p.distance(&a.overhead),
            Err(_) => f64::INFINITY,
        })
    }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Similarity moving a point set's centroid to the origin with mean radius √2.
#[derive(Debug, Clone, Copy)]
struct Conditioner {
    scale: f64,
    cx: f64,
    cy: f64,
}

impl Conditioner {
    fn matrix(&self) -> [[f64; 3]; 3] {
        let s = self.scale;
        [
            [s, 0.0, -s * self.cx],
            [0.0, s, -s * self.cy],
            [0.0, 0.0, 1.0],
        ]
    }

    fn inverse_matrix(&self) -> [[f64; 3]; 3] {
        [
            [1.0 / self.scale, 0.0, self.cx],
            [0.0, 1.0 / self.scale, self.cy],
            [0.0, 0.0, 1.0],
        ]
    }
}

fn condition(pts: &[[f64; 2]; 4]) -> (Conditioner, [[f64; 2]; 4]) {
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / 4.0;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / 4.0;
    let mean_r = pts
        .iter()
        .map(|p| (p[0] - cx).hypot(p[1] - cy))
        .sum::<f64>()
        / 4.0;
    let scale = std::f64::consts::SQRT_2 / mean_r;
    let out = pts.map(|p| [scale * (p[0] - cx), scale * (p[1] - cy)]);
    (Conditioner { scale, cx, cy }, out)
}

/// Solves the augmented 8×9 system in place.
fn solve8(mut a: [[f64; 9]; 8]) -> Result<[f64; 8], GeometryError> {
    let mut max_pivot = 0.0f64;
    let mut min_pivot = f64::INFINITY;
    for col in 0..8 {
        let pivot_row = (col..8)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, pivot_row);
        let p = a[col][col];
        max_pivot = max_pivot.max(p.abs());
        min_pivot = min_pivot.min(p.abs());
        if p == 0.0 {
            return Err(GeometryError::Singular { pivot_ratio: 0.0 });
        }
        for r in col + 1..8 {
            let f = a[r][col] / p;
            if f != 0.0 {
                let pivot_row = a[col];
                for (v, pv) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= f * pv;
                }
            }
        }
    }
    let ratio = min_pivot / max_pivot;
    if ratio.is_nan() || ratio <= PIVOT_EPS {
        return Err(GeometryError::Singular { pivot_ratio: ratio });
    }
    let mut x = [0.0; 8];
    for r in (0..8).rev() {
        let s: f64 = (r + 1..8).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][8] - s) / a[r][r];
    }
    Ok(x)
}
