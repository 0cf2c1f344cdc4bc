//! Approximately equal-distance sampling of a super-quadric surface.
//!
//! The surface is the spherical product of two superellipses. Rings of
//! constant η are placed at equal arc length along a representative meridian,
//! and each ring is split at equal arc length along its horizontal
//! superellipse, with point counts proportional to the ring perimeter. The
//! grid keeps the raw angle pairs, so the same angles can be re-evaluated for
//! a perturbed shape (the optimizer differentiates with the angles fixed).

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_4;

use nalgebra::Vector3;

use super::superquadric::{sgnpow, Shape};
use crate::error::{Error, Result};

/// Smallest sample count that still yields the six axis extremes plus one band.
pub const MIN_SAMPLES: usize = 26;

/// Default sample count used throughout the pipeline.
pub const DEFAULT_SAMPLES: usize = 1000;

/// One surface direction, stored as the cosines/sines of (η, ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceAngle {
    pub cos_eta: f64,
    pub sin_eta: f64,
    pub cos_omega: f64,
    pub sin_omega: f64,
}

impl SurfaceAngle {
    /// Canonical-frame surface point for `shape`.
    #[inline]
    pub fn point(&self, shape: &Shape) -> Vector3<f64> {
        let ce = sgnpow(self.cos_eta, shape.eps1);
        let a = &shape.alpha;
        Vector3::new(
            a.x * ce * sgnpow(self.cos_omega, shape.eps2),
            a.y * ce * sgnpow(self.sin_omega, shape.eps2),
            a.z * sgnpow(self.sin_eta, shape.eps1),
        )
    }
}

/// Fixed set of surface angles.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    angles: Vec<SurfaceAngle>,
}

impl SurfaceGrid {
    /// Angles giving roughly `count` evenly spaced points on `shape`.
    pub fn equal_distance(shape: &Shape, count: usize) -> Result<Self> {
        if count < MIN_SAMPLES {
            return Err(Error::InsufficientSamples {
                min: MIN_SAMPLES,
                got: count,
            });
        }
        shape.validate()?;
        let quadrant = ArcTable::new(|t| {
            (
                shape.alpha.x * sgnpow(t.cos(), shape.eps2),
                shape.alpha.y * sgnpow(t.sin(), shape.eps2),
            )
        });
        let perimeter = 4.0 * quadrant.total();
        let r_eff = perimeter / (2.0 * std::f64::consts::PI);
        let meridian = ArcTable::new(|t| {
            (
                r_eff * sgnpow(t.cos(), shape.eps1),
                shape.alpha.z * sgnpow(t.sin(), shape.eps1),
            )
        });

        let layout = Layout::solve(&meridian, quadrant.total(), shape.eps1, count);
        Ok(Self {
            angles: layout.angles(&meridian, &quadrant),
        })
    }

    pub fn from_angles(angles: Vec<SurfaceAngle>) -> Self {
        Self { angles }
    }

    pub fn angles(&self) -> &[SurfaceAngle] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn points(&self, shape: &Shape) -> Vec<Vector3<f64>> {
        self.angles.iter().map(|a| a.point(shape)).collect()
    }
}

/// Roughly `count` canonical-frame points on the surface of `shape`; always
/// contains the six axis extremes.
pub fn sample_surface(shape: &Shape, count: usize) -> Result<Vec<Vector3<f64>>> {
    Ok(SurfaceGrid::equal_distance(shape, count)?.points(shape))
}

/// Cumulative chord length of a planar curve over t ∈ [0, π/2], tabulated on
/// a grid that is log-clustered at both ends where small exponents put all
/// the curvature.
struct ArcTable {
    t: Vec<f64>,
    s: Vec<f64>,
}

impl ArcTable {
    fn new(curve: impl Fn(f64) -> (f64, f64)) -> Self {
        let t = clustered_grid();
        let mut s = Vec::with_capacity(t.len());
        let mut prev = curve(t[0]);
        let mut acc = 0.0;
        for &ti in &t {
            let p = curve(ti);
            acc += ((p.0 - prev.0).powi(2) + (p.1 - prev.1).powi(2)).sqrt();
            s.push(acc);
            prev = p;
        }
        Self { t, s }
    }

    fn total(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// Parameter at the given fraction of total arc length.
    fn invert(&self, frac: f64) -> f64 {
        let target = frac * self.total();
        let i = self.s.partition_point(|&v| v < target);
        if i == 0 {
            return self.t[0];
        }
        if i >= self.s.len() {
            return FRAC_PI_2;
        }
        let (s0, s1) = (self.s[i - 1], self.s[i]);
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        if s1 <= s0 {
            t0
        } else {
            t0 + (target - s0) / (s1 - s0) * (t1 - t0)
        }
    }
}

fn clustered_grid() -> Vec<f64> {
    const LOG_STEPS: usize = 500;
    const LIN_STEPS: usize = 400;
    let mut half: Vec<f64> = (0..=LOG_STEPS)
        .map(|k| FRAC_PI_4 * 10f64.powf(-10.0 + 10.0 * k as f64 / LOG_STEPS as f64))
        .chain((1..LIN_STEPS).map(|k| FRAC_PI_4 * k as f64 / LIN_STEPS as f64))
        .collect();
    half.push(0.0);
    half.sort_by(f64::total_cmp);
    half.dedup();
    let mut grid = half.clone();
    grid.extend(half.iter().rev().skip(1).map(|&t| FRAC_PI_2 - t));
    grid
}

/// Ring structure for one spacing: `rings[k]` holds the per-quadrant point
/// count of the ring at meridian fraction k/m (k = 0 is the equator).
struct Layout {
    rings: Vec<usize>,
}

impl Layout {
    fn for_spacing(meridian: &ArcTable, quadrant_len: f64, eps1: f64, spacing: f64) -> Self {
        let m = ((meridian.total() / spacing).round() as usize).max(1);
        let rings = (0..m)
            .map(|k| {
                let eta = meridian.invert(k as f64 / m as f64);
                let scale = if k == 0 { 1.0 } else { sgnpow(eta.cos(), eps1) };
                ((scale * quadrant_len / spacing).round() as usize).max(1)
            })
            .collect();
        Self { rings }
    }

    fn count(&self) -> usize {
        let rings: usize = self.rings.iter().skip(1).map(|q| 8 * q).sum();
        2 + 4 * self.rings[0] + rings
    }

    /// Bisects the spacing until the point count is as close as possible to
    /// `count`.
    fn solve(meridian: &ArcTable, quadrant_len: f64, eps1: f64, count: usize) -> Self {
        let mut lo = meridian.total() * 1e-4;
        let mut hi = 2.0 * meridian.total() + quadrant_len;
        let mut best = Self::for_spacing(meridian, quadrant_len, eps1, hi);
        let mut best_err = best.count().abs_diff(count);
        for _ in 0..60 {
            let mid = (lo * hi).sqrt();
            let layout = Self::for_spacing(meridian, quadrant_len, eps1, mid);
            let n = layout.count();
            let err = n.abs_diff(count);
            if err < best_err {
                best_err = err;
                best = layout;
            }
            if n == count {
                break;
            }
            if n > count {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best
    }

    fn angles(&self, meridian: &ArcTable, quadrant: &ArcTable) -> Vec<SurfaceAngle> {
        let m = self.rings.len();
        let mut out = Vec::with_capacity(self.count());
        for (k, &q) in self.rings.iter().enumerate() {
            let (ce, se) = if k == 0 {
                (1.0, 0.0)
            } else {
                let eta = meridian.invert(k as f64 / m as f64);
                (eta.cos(), eta.sin())
            };
            let omegas = quadrant_angles(quadrant, q);
            push_ring(&mut out, ce, se, &omegas);
            if k > 0 {
                push_ring(&mut out, ce, -se, &omegas);
            }
        }
        for se in [1.0, -1.0] {
            out.push(SurfaceAngle {
                cos_eta: 0.0,
                sin_eta: se,
                cos_omega: 1.0,
                sin_omega: 0.0,
            });
        }
        out
    }
}

/// (cos ω, sin ω) at quadrant arc fractions j/q for j = 0..=q; the end
/// points are exact.
fn quadrant_angles(quadrant: &ArcTable, q: usize) -> Vec<(f64, f64)> {
    (0..=q)
        .map(|j| {
            if j == 0 {
                (1.0, 0.0)
            } else if j == q {
                (0.0, 1.0)
            } else {
                let w = quadrant.invert(j as f64 / q as f64);
                (w.cos(), w.sin())
            }
        })
        .collect()
}

/// Mirrors one quadrant into a full ring covering ω ∈ [−π, π), 4q points.
fn push_ring(out: &mut Vec<SurfaceAngle>, ce: f64, se: f64, omegas: &[(f64, f64)]) {
    let q = omegas.len() - 1;
    let mut push = |c: f64, s: f64| {
        out.push(SurfaceAngle {
            cos_eta: ce,
            sin_eta: se,
            cos_omega: c,
            sin_omega: s,
        })
    };
    for &(c, s) in &omegas[..q] {
        push(c, s);
    }
    for &(c, s) in &omegas[1..] {
        push(-c, s);
    }
    for &(c, s) in &omegas[..q] {
        push(-c, -s);
    }
    for &(c, s) in &omegas[1..] {
        push(c, -s);
    }
}
