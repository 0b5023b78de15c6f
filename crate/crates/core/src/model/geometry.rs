use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::{Dimensions, FieldOfView, LocalObject, SensorMeta, StateVector};

/// The 11 check points of an object: 8 box corners, the center, and the
/// front and rear face midpoints at mid-height.
pub fn bounding_box_points(state: &StateVector, dims: &Dimensions) -> [Point3<f64>; 11] {
    let (s, c) = dims.heading.sin_cos();
    let center = state.position();
    let (hl, hw, hh) = (dims.length / 2.0, dims.width / 2.0, dims.height / 2.0);
    let place = |dx: f64, dy: f64, dz: f64| {
        Point3::new(
            center.x + c * dx - s * dy,
            center.y + s * dx + c * dy,
            center.z + dz,
        )
    };
    [
        place(hl, hw, -hh),
        place(hl, -hw, -hh),
        place(-hl, -hw, -hh),
        place(-hl, hw, -hh),
        place(hl, hw, hh),
        place(hl, -hw, hh),
        place(-hl, -hw, hh),
        place(-hl, hw, hh),
        center,
        place(hl, 0.0, 0.0),
        place(-hl, 0.0, 0.0),
    ]
}

/// A sensor pose: mount point plus orthonormal forward/left/up axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    pub origin: Point3<f64>,
    forward: Vector3<f64>,
    left: Vector3<f64>,
    up: Vector3<f64>,
}

impl SensorFrame {
    pub fn new(origin: Point3<f64>, yaw: f64, pitch: f64) -> Self {
        let (sy, cy) = yaw.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        Self {
            origin,
            forward: Vector3::new(cp * cy, cp * sy, sp),
            left: Vector3::new(-sy, cy, 0.0),
            up: Vector3::new(-sp * cy, -sp * sy, cp),
        }
    }

    pub fn to_sensor(&self, p: &Point3<f64>) -> Vector3<f64> {
        let d = p - self.origin;
        Vector3::new(self.forward.dot(&d), self.left.dot(&d), self.up.dot(&d))
    }

    pub fn to_global(&self, q: &Vector3<f64>) -> Point3<f64> {
        self.origin + self.forward * q.x + self.left * q.y + self.up * q.z
    }

    /// Rotates a sensor-frame direction into the global frame.
    pub fn rotate_to_global(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.forward * v.x + self.left * v.y + self.up * v.z
    }

    pub fn rotate_to_sensor(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(self.forward.dot(v), self.left.dot(v), self.up.dot(v))
    }

    /// `(range, azimuth, elevation)` of a global point.
    pub fn spherical(&self, p: &Point3<f64>) -> (f64, f64, f64) {
        let q = self.to_sensor(p);
        spherical_of(&q)
    }
}

pub(crate) fn spherical_of(q: &Vector3<f64>) -> (f64, f64, f64) {
    let ground = q.x.hypot(q.y);
    (q.norm(), q.y.atan2(q.x), q.z.atan2(ground))
}

pub(crate) fn inside_fov(frame: &SensorFrame, fov: &FieldOfView, p: &Point3<f64>) -> bool {
    let (range, az, el) = frame.spherical(p);
    range <= fov.range
        && (fov.covers_full_azimuth() || az.abs() <= fov.horizontal / 2.0)
        && el.abs() <= fov.vertical / 2.0
}

/// True iff any point lies inside the sensor's field of view.
pub fn in_fov(points: &[Point3<f64>], sensor: &SensorMeta) -> bool {
    let frame = sensor.frame();
    points.iter().any(|p| inside_fov(&frame, &sensor.fov, p))
}

/// Per-component excess of a point beyond the field of view. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FovDistance {
    pub range: f64,
    pub azimuth: f64,
    pub elevation: f64,
}

pub fn fov_distance(state: &StateVector, sensor: &SensorMeta) -> FovDistance {
    let (range, az, el) = sensor.frame().spherical(&state.position());
    let fov = &sensor.fov;
    FovDistance {
        range: (range - fov.range).max(0.0),
        azimuth: if fov.covers_full_azimuth() {
            0.0
        } else {
            (az.abs() - fov.horizontal / 2.0).max(0.0)
        },
        elevation: (el.abs() - fov.vertical / 2.0).max(0.0),
    }
}

/// Box with yaw-only orientation, as used for all road objects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Point3<f64>,
    pub half_extents: Vector3<f64>,
    pub heading: f64,
}

impl OrientedBox {
    pub fn new(center: Point3<f64>, dims: &Dimensions) -> Self {
        Self {
            center,
            half_extents: Vector3::new(dims.length / 2.0, dims.width / 2.0, dims.height / 2.0),
            heading: dims.heading,
        }
    }

    fn to_local(self, p: &Point3<f64>) -> Vector3<f64> {
        let (s, c) = self.heading.sin_cos();
        let d = p - self.center;
        Vector3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        let q = self.to_local(p);
        (0..3).all(|i| q[i].abs() <= self.half_extents[i])
    }

    pub fn bounding_radius(&self) -> f64 {
        self.half_extents.norm()
    }
}

/// Slab test of the closed segment `a → b` against the box.
pub fn segment_hits_box(a: &Point3<f64>, b: &Point3<f64>, bx: &OrientedBox) -> bool {
    let la = bx.to_local(a);
    let lb = bx.to_local(b);
    let d = lb - la;
    let (mut t_min, mut t_max) = (0.0_f64, 1.0_f64);
    for i in 0..3 {
        let h = bx.half_extents[i];
        if d[i].abs() < 1e-12 {
            if la[i].abs() > h {
                return false;
            }
            continue;
        }
        let mut t1 = (-h - la[i]) / d[i];
        let mut t2 = (h - la[i]) / d[i];
        if t1 > t2 {
            std::mem::swap(&mut t1, &mut t2);
        }
        t_min = t_min.max(t1);
        t_max = t_max.min(t2);
        if t_min > t_max {
            return false;
        }
    }
    // grazing contact does not obstruct
    t_max - t_min > 1e-9
}

pub(crate) fn points_visible(
    origin: &Point3<f64>,
    points: &[Point3<f64>],
    blockers: &[OrientedBox],
) -> bool {
    if blockers.is_empty() {
        return true;
    }
    let reach = points
        .iter()
        .map(|p| (p - origin).norm())
        .fold(0.0_f64, f64::max);
    let relevant: Vec<&OrientedBox> = blockers
        .iter()
        .filter(|b| (b.center - origin).norm() - b.bounding_radius() <= reach)
        .collect();
    points
        .iter()
        .any(|p| !relevant.iter().any(|b| segment_hits_box(origin, p, b)))
}

/// True iff at least one of the target's check points can be seen from the
/// sensor mount past every blocker's bounding box.
pub fn line_of_sight(target: &LocalObject, blockers: &[LocalObject], sensor: &SensorMeta) -> bool {
    let boxes: Vec<OrientedBox> = blockers
        .iter()
        .filter(|b| !(b.sensor_id == target.sensor_id && b.track_id == target.track_id))
        .map(LocalObject::oriented_box)
        .collect();
    points_visible(&sensor.position, &target.check_points(), &boxes)
}
