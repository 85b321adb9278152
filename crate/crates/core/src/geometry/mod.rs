//! Ground contact points and the image → overhead planar mapping.
//!
//! Overhead frame convention: the crosswalk long axis runs along +x and the
//! origin sits at the crosswalk corner nearest the camera. Overhead
//! coordinates are pixels of a virtual top-down image; divide by the
//! scene's pixels-per-meter to get meters.

mod contact;
mod homography;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use contact::{
    contact_point, pedestrian_contact_point, vehicle_contact_point, ContactPoint, ContactSource,
    LaneAxis, DEFAULT_LEAD_FRACTION,
};
pub use homography::{check_general_position, AnchorPair, AnchorSide, Homography};

/// A point in the oblique camera image, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ImagePoint {
    pub x: f64,
    pub y: f64,
}

/// A point in the overhead virtual frame, in overhead pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct OverheadPoint {
    pub x: f64,
    pub y: f64,
}

macro_rules! point_impl {
    ($t:ident) => {
        impl $t {
            pub const fn new(x: f64, y: f64) -> Self {
                Self { x, y }
            }

            pub fn distance(&self, other: &Self) -> f64 {
                (self.x - other.x).hypot(self.y - other.y)
            }

            pub fn is_finite(&self) -> bool {
                self.x.is_finite() && self.y.is_finite()
            }
        }

        impl From<[f64; 2]> for $t {
            fn from(v: [f64; 2]) -> Self {
                Self { x: v[0], y: v[1] }
            }
        }

        impl From<$t> for [f64; 2] {
            fn from(p: $t) -> Self {
                [p.x, p.y]
            }
        }
    };
}

point_impl!(ImagePoint);
point_impl!(OverheadPoint);

impl OverheadPoint {
    /// Converts overhead pixels to meters.
    pub fn to_meters(&self, pixels_per_meter: f64) -> (f64, f64) {
        (self.x / pixels_per_meter, self.y / pixels_per_meter)
    }

    pub fn from_meters(x_m: f64, y_m: f64, pixels_per_meter: f64) -> Self {
        Self::new(x_m * pixels_per_meter, y_m * pixels_per_meter)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(
        "degenerate anchor configuration: {side} anchors {a}, {b}, {c} are collinear or coincide"
    )]
    DegenerateAnchors {
        side: AnchorSide,
        a: usize,
        b: usize,
        c: usize,
    },
    #[error("singular anchor system (smallest/largest pivot ratio {pivot_ratio:.3e})")]
    Singular { pivot_ratio: f64 },
    #[error("homography matrix is singular (|det| = {det:.3e})")]
    SingularMatrix { det: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("point maps to infinity (w = {w:.3e})")]
    PointAtInfinity { w: f64 },
}
