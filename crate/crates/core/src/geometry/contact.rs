//! Ground contact ("ground tip") points in the oblique image.

use serde::{Deserialize, Serialize};

use super::ImagePoint;
use crate::ingest::{Detection, ObjectClass};

/// Share of the bounding box, measured along the travel direction from the
/// front, searched for a vehicle's leading mask vertices.
pub const DEFAULT_LEAD_FRACTION: f64 = 0.25;

/// Central axis of a vehicle lane in image coordinates. Travel runs from
/// `from` toward `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneAxis {
    pub from: ImagePoint,
    pub to: ImagePoint,
}

impl LaneAxis {
    pub fn new(from: ImagePoint, to: ImagePoint) -> Self {
        Self { from, to }
    }

    fn direction(&self) -> Option<[f64; 2]> {
        let dx = self.to.x - self.from.x;
        let dy = self.to.y - self.from.y;
        let len = dx.hypot(dy);
        (len > 0.0 && len.is_finite()).then(|| [dx / len, dy / len])
    }

    /// Perpendicular distance from `p` to the (infinite) axis line.
    pub fn distance_to(&self, p: &ImagePoint) -> f64 {
        match self.direction() {
            Some([ux, uy]) => ((p.x - self.from.x) * uy - (p.y - self.from.y) * ux).abs(),
            None => p.distance(&self.from),
        }
    }

    /// Orthogonal projection of `p` onto the axis line.
    pub fn project(&self, p: &ImagePoint) -> ImagePoint {
        match self.direction() {
            Some([ux, uy]) => {
                let t = (p.x - self.from.x) * ux + (p.y - self.from.y) * uy;
                ImagePoint::new(self.from.x + t * ux, self.from.y + t * uy)
            }
            None => self.from,
        }
    }
}

/// How a contact point was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactSource {
    /// Supplied in the detection record.
    Precomputed,
    /// Derived from the segmentation mask.
    Mask,
    /// Bounding-box bottom-center; the detection had neither mask nor contact.
    Bbox,
    /// Bounding-box bottom-center because no lane axis was configured.
    BboxNoLaneAxis,
}

impl ContactSource {
    pub fn is_fallback(self) -> bool {
        matches!(self, ContactSource::Bbox | ContactSource::BboxNoLaneAxis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPoint {
    pub point: ImagePoint,
    pub source: ContactSource,
}

fn bbox_fallback(d: &Detection, source: ContactSource) -> ContactPoint {
    ContactPoint {
        point: d.bbox.bottom_center(),
        source,
    }
}

/// Lowest vertex (max y), ties to smallest x, then smallest y.
fn lowest<'a>(it: impl Iterator<Item = &'a ImagePoint>) -> Option<ImagePoint> {
    it.copied().reduce(|best, p| {
        if p.y > best.y || (p.y == best.y && p.x < best.x) {
            p
        } else {
            best
        }
    })
}

/// Midpoint between a pedestrian's two tiptoe points.
///
/// The mask is split at the bbox center column; the lowest vertex of each half
/// is a tiptoe candidate. With one half empty the single lowest vertex is used.
/// Without a mask the bbox bottom-center is returned as a fallback.
pub fn pedestrian_contact_point(d: &Detection) -> ContactPoint {
    let Some(mask) = d.mask.as_deref().filter(|m| !m.is_empty()) else {
        return bbox_fallback(d, ContactSource::Bbox);
    };
    let cx = d.bbox.center_x();
    let left = lowest(mask.iter().filter(|p| p.x < cx));
    let right = lowest(mask.iter().filter(|p| p.x >= cx));
    let point = match (left, right) {
        (Some(l), Some(r)) => ImagePoint::new((l.x + r.x) / 2.0, (l.y + r.y) / 2.0),
        (Some(p), None) | (None, Some(p)) => p,
        (None, None) => unreachable!("non-empty mask"),
    };
    ContactPoint {
        point,
        source: ContactSource::Mask,
    }
}

/// Vehicle ground tip from the mask and the lane's central axis.
///
/// Among mask vertices inside the leading `lead_fraction` of the bbox (measured
/// along the axis travel direction), the one nearest the axis is projected
/// onto it. Ties go to the smallest x.
pub fn vehicle_contact_point(
    d: &Detection,
    lane_axis: Option<&LaneAxis>,
    lead_fraction: f64,
) -> ContactPoint {
    let Some(mask) = d.mask.as_deref().filter(|m| !m.is_empty()) else {
        return bbox_fallback(d, ContactSource::Bbox);
    };
    let Some((axis, [ux, uy])) = lane_axis.and_then(|a| a.direction().map(|u| (a, u))) else {
        return bbox_fallback(d, ContactSource::BboxNoLaneAxis);
    };

    let along = |x: f64, y: f64| x * ux + y * uy;
    let b = &d.bbox;
    let corners = [
        along(b.x_min, b.y_min),
        along(b.x_max, b.y_min),
        along(b.x_min, b.y_max),
        along(b.x_max, b.y_max),
    ];
    let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = hi - lead_fraction.clamp(0.0, 1.0) * (hi - lo);

    let mut leading: Vec<&ImagePoint> = mask.iter().filter(|p| along(p.x, p.y) >= cut).collect();
    if leading.is_empty() {
        // the mask sits behind the box front; fall back to its frontmost vertex
        let front = mask
            .iter()
            .map(|p| along(p.x, p.y))
            .fold(f64::NEG_INFINITY, f64::max);
        leading = mask.iter().filter(|p| along(p.x, p.y) == front).collect();
    }
    let nearest = leading
        .into_iter()
        .min_by(|p, q| {
            axis.distance_to(p)
                .total_cmp(&axis.distance_to(q))
                .then(p.x.total_cmp(&q.x))
                .then(p.y.total_cmp(&q.y))
        })
        .expect("leading set is non-empty");
    ContactPoint {
        point: axis.project(nearest),
        source: ContactSource::Mask,
    }
}

/// Contact point for any detection: a precomputed point wins, otherwise the
/// class-specific rule. Vehicles use the lane axis nearest their bbox
/// bottom-center.
pub fn contact_point(d: &Detection, lane_axes: &[LaneAxis], lead_fraction: f64) -> ContactPoint {
    if let Some(point) = d.contact {
        return ContactPoint {
            point,
            source: ContactSource::Precomputed,
        };
    }
    match d.class {
        ObjectClass::Pedestrian => pedestrian_contact_point(d),
        ObjectClass::Vehicle => {
            let anchor = d.bbox.bottom_center();
            let axis = lane_axes
                .iter()
                .min_by(|a, b| a.distance_to(&anchor).total_cmp(&b.distance_to(&anchor)));
            vehicle_contact_point(d, axis, lead_fraction)
        }
    }
}
