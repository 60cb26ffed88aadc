// SPDX-License-Identifier: Apache-2.0

use crate::coord::Point;
use crate::gdsii::GdsTransform;

/// 2×3 affine map in floating point. Hierarchies are composed in this form
/// and rounded to integer dbu only once, at the leaf vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
        tx: 0.0,
        ty: 0.0,
    };

    /// Reflect about x (optional), scale, rotate counter-clockwise, translate.
    pub fn from_gds(t: &GdsTransform) -> Affine {
        let (cos, sin) = cos_sin_deg(t.angle_deg);
        let m = t.magnification;
        let flip = if t.reflect_x { -1.0 } else { 1.0 };
        Affine {
            a: m * cos,
            b: -m * sin * flip,
            c: m * sin,
            d: m * cos * flip,
            tx: t.translate.x as f64,
            ty: t.translate.y as f64,
        }
    }

    pub fn translation(x: f64, y: f64) -> Affine {
        Affine {
            tx: x,
            ty: y,
            ..Affine::IDENTITY
        }
    }

    /// `self ∘ inner`: applies `inner` first.
    pub fn then_inner(&self, inner: &Affine) -> Affine {
        Affine {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
            tx: self.a * inner.tx + self.b * inner.ty + self.tx,
            ty: self.c * inner.tx + self.d * inner.ty + self.ty,
        }
    }

    pub fn apply_f(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a * x + self.b * y + self.tx,
            self.c * x + self.d * y + self.ty,
        )
    }

    /// Maps and rounds to the nearest dbu, ties away from zero.
    pub fn apply_round(&self, x: f64, y: f64) -> Point {
        let (x, y) = self.apply_f(x, y);
        Point::new(x.round() as i64, y.round() as i64)
    }

    /// Determinant sign < 0 means orientation is flipped.
    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }
}

/// Cosine and sine of an angle in degrees, exact at multiples of 90°.
fn cos_sin_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (1.0, 0.0)
    } else if r == 90.0 {
        (0.0, 1.0)
    } else if r == 180.0 {
        (-1.0, 0.0)
    } else if r == 270.0 {
        (0.0, -1.0)
    } else {
        let rad = r.to_radians();
        (rad.cos(), rad.sin())
    }
}

/// Applies a single GDSII transform to a point.
pub fn apply_transform(p: Point, t: &GdsTransform) -> Point {
    Affine::from_gds(t).apply_round(p.x as f64, p.y as f64)
}
