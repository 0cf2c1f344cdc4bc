use nalgebra::{Vector2, Vector3};

use super::pose::RigidPose;
use crate::error::{Error, Result};

/// Axis-aligned image box `[xmin, xmax, ymin, ymax]` in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Box2D {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Box2D {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let b = Self {
            xmin,
            xmax,
            ymin,
            ymax,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.as_array().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("2D box"));
        }
        if self.xmin > self.xmax || self.ymin > self.ymax {
            return Err(Error::InvalidParameter(format!("unordered box {self:?}")));
        }
        Ok(())
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.xmin, self.xmax, self.ymin, self.ymax]
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Vector2<f64> {
        Vector2::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    pub fn contains(&self, other: &Box2D) -> bool {
        self.xmin <= other.xmin
            && self.xmax >= other.xmax
            && self.ymin <= other.ymin
            && self.ymax >= other.ymax
    }

    pub fn intersection_area(&self, other: &Box2D) -> f64 {
        let w = self.xmax.min(other.xmax) - self.xmin.max(other.xmin);
        let h = self.ymax.min(other.ymax) - self.ymin.max(other.ymin);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Intersection over union; 0 when both boxes have zero area.
    pub fn iou(&self, other: &Box2D) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

/// Componentwise min/max over a point set.
pub fn box_of_points(pts: &[Vector2<f64>]) -> Result<Box2D> {
    let first = pts.first().ok_or(Error::Empty("point set"))?;
    let mut b = Box2D {
        xmin: first.x,
        xmax: first.x,
        ymin: first.y,
        ymax: first.y,
    };
    for p in &pts[1..] {
        b.xmin = b.xmin.min(p.x);
        b.xmax = b.xmax.max(p.x);
        b.ymin = b.ymin.min(p.y);
        b.ymax = b.ymax.max(p.y);
    }
    Ok(b)
}

/// Oriented 3D box: `pose` maps the box frame to the world, `half_extents`
/// are measured along the box axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox3D {
    pub pose: RigidPose,
    pub half_extents: Vector3<f64>,
}

impl OrientedBox3D {
    pub fn new(pose: RigidPose, half_extents: Vector3<f64>) -> Result<Self> {
        let b = Self { pose, half_extents };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.half_extents.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("box half extents"));
        }
        if self.half_extents.iter().any(|&v| v <= 0.0) {
            return Err(Error::DegenerateBox(self.half_extents.into()));
        }
        Ok(())
    }

    pub fn center(&self) -> Vector3<f64> {
        *self.pose.translation()
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    /// The 8 corners in world coordinates; bit `k` of the index selects the
    /// sign along axis `k`.
    pub fn corners(&self) -> [Vector3<f64>; 8] {
        std::array::from_fn(|i| self.pose.transform(&corner_offset(&self.half_extents, i)))
    }

    /// Whether a world point lies inside (boundary included).
    pub fn contains_point(&self, p: &Vector3<f64>) -> bool {
        let local = self.pose.rotation().transpose() * (p - self.pose.translation());
        (0..3).all(|k| local[k].abs() <= self.half_extents[k])
    }

    /// Re-expresses the box in another frame: `to_frame` maps the current
    /// frame into the new one.
    pub fn transformed(&self, to_frame: &RigidPose) -> OrientedBox3D {
        OrientedBox3D {
            pose: to_frame.compose(&self.pose),
            half_extents: self.half_extents,
        }
    }
}

pub(crate) fn corner_offset(half: &Vector3<f64>, i: usize) -> Vector3<f64> {
    Vector3::new(
        if i & 1 == 0 { -half.x } else { half.x },
        if i & 2 == 0 { -half.y } else { half.y },
        if i & 4 == 0 { -half.z } else { half.z },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    #[test]
    fn box_of_three_points() {
        let b = box_of_points(&[v(100.0, 50.0), v(120.0, 40.0), v(110.0, 60.0)]).unwrap();
        assert_eq!(b.as_array(), [100.0, 120.0, 40.0, 60.0]);
    }

    #[test]
    fn single_point_is_degenerate_box() {
        assert_eq!(
            box_of_points(&[v(5.0, 7.0)]).unwrap().as_array(),
            [5.0, 5.0, 7.0, 7.0]
        );
    }

    #[test]
    fn empty_point_set_is_error() {
        assert!(matches!(box_of_points(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn iou_of_shifted_boxes() {
        let a = Box2D::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let b = Box2D::new(5.0, 15.0, 0.0, 10.0).unwrap();
        assert!((a.iou(&b) - 50.0 / 150.0).abs() < 1e-15);
        assert_eq!(a.iou(&a), 1.0);
    }

    proptest! {
        #[test]
        fn box_is_monotone_under_supersets(
            base in prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), 1..20),
            extra in prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), 0..20),
        ) {
            let pts: Vec<_> = base.iter().map(|&(x, y)| v(x, y)).collect();
            let mut sup = pts.clone();
            sup.extend(extra.iter().map(|&(x, y)| v(x, y)));
            let small = box_of_points(&pts).unwrap();
            let big = box_of_points(&sup).unwrap();
            prop_assert!(big.contains(&small));
        }
    }
}
