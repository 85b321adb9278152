//! Per-frame view of a feature table, used for histograms, boxplots and
//! correlation across object classes.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::features::FeatureTable;
use crate::ingest::ObjectClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    VehicleSpeed,
    VehicleAcceleration,
    PedestrianSpeed,
    VehiclePedestrianDistance,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::VehicleSpeed,
        Feature::VehicleAcceleration,
        Feature::PedestrianSpeed,
        Feature::VehiclePedestrianDistance,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Feature::VehicleSpeed => "vehicle_speed_kmh",
            Feature::VehicleAcceleration => "vehicle_accel_kmh_per_s",
            Feature::PedestrianSpeed => "pedestrian_speed_kmh",
            Feature::VehiclePedestrianDistance => "vehicle_pedestrian_dist_m",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Feature::VehicleSpeed => "Vehicle speed (km/h)",
            Feature::VehicleAcceleration => "Vehicle acceleration (km/h/s)",
            Feature::PedestrianSpeed => "Pedestrian speed (km/h)",
            Feature::VehiclePedestrianDistance => "Vehicle-pedestrian distance (m)",
        }
    }

    /// All present values of this feature in record order. Distance is taken
    /// from vehicle records so each vehicle–pedestrian gap is counted once.
    pub fn values(self, table: &FeatureTable) -> Vec<f64> {
        table
            .rows
            .iter()
            .filter_map(|r| match (self, r.class) {
                (Feature::VehicleSpeed, ObjectClass::Vehicle) => Some(r.speed_kmh),
                (Feature::VehicleAcceleration, ObjectClass::Vehicle) => r.accel_kmh_per_s,
                (Feature::PedestrianSpeed, ObjectClass::Pedestrian) => Some(r.speed_kmh),
                (Feature::VehiclePedestrianDistance, ObjectClass::Vehicle) => r.dist_m,
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// Features of all objects in one (clip, frame).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameRow {
    pub clip_id: String,
    pub frame: u64,
    /// Mean over vehicle records.
    pub vehicle_speed: Option<f64>,
    /// Mean over vehicle records carrying an acceleration.
    pub vehicle_accel: Option<f64>,
    /// Mean over pedestrian records.
    pub pedestrian_speed: Option<f64>,
    /// Smallest vehicle-to-nearest-pedestrian distance.
    pub distance: Option<f64>,
}

impl FrameRow {
    pub fn get(&self, f: Feature) -> Option<f64> {
        match f {
            Feature::VehicleSpeed => self.vehicle_speed,
            Feature::VehicleAcceleration => self.vehicle_accel,
            Feature::PedestrianSpeed => self.pedestrian_speed,
            Feature::VehiclePedestrianDistance => self.distance,
        }
    }
}

#[derive(Default)]
struct Acc {
    veh_speed: Vec<f64>,
    veh_accel: Vec<f64>,
    ped_speed: Vec<f64>,
    dist: Vec<f64>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Collapses feature records to one row per (clip, frame), ordered by clip
/// then frame.
pub fn frame_table(table: &FeatureTable) -> Vec<FrameRow> {
    let mut groups: BTreeMap<(&str, u64), Acc> = BTreeMap::new();
    for r in &table.rows {
        let acc = groups.entry((r.clip_id.as_str(), r.frame)).or_default();
        match r.class {
            ObjectClass::Vehicle => {
                acc.veh_speed.push(r.speed_kmh);
                acc.veh_accel.extend(r.accel_kmh_per_s);
                acc.dist.extend(r.dist_m);
            }
            ObjectClass::Pedestrian => acc.ped_speed.push(r.speed_kmh),
        }
    }
    groups
        .into_iter()
        .map(|((clip, frame), a)| FrameRow {
            clip_id: clip.to_string(),
            frame,
            vehicle_speed: mean(&a.veh_speed),
            vehicle_accel: mean(&a.veh_accel),
            pedestrian_speed: mean(&a.ped_speed),
            distance: a.dist.iter().copied().min_by(f64::total_cmp),
        })
        .collect()
}
