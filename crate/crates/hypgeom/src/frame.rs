//! Frames of H³ as elements of PSL(2,C).
//!
//! The base frame Ψ₀ sits at (0,1) with tangent vector (0,1) (straight up)
//! and normal vector (1,0). A matrix g stands for the frame g·Ψ₀ = Ψ₀·g, so
//! left multiplication moves frames by isometries and right multiplication by
//! the generators below moves a frame along its own axes.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::moebius::{c, canonicalize, complex_distance, Geodesic, HPoint, Isometry, SpherePoint, C};

/// A(w) = diag(e^w, e^−w): right action translates by 2·Re w and turns the normal by 2·Im w.
pub fn gen_a(w: C) -> Isometry {
    Isometry::from_sl2(w.exp(), c(0.0, 0.0), c(0.0, 0.0), (-w).exp())
}

/// B(θ): right action turns the tangent by θ towards minus the normal.
pub fn gen_b(theta: f64) -> Isometry {
    let (s, co) = (theta / 2.0).sin_cos();
    Isometry::from_sl2(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    A,
    B,
}

pub fn generator(kind: GeneratorKind, w: C) -> Result<Isometry> {
    match kind {
        GeneratorKind::A => Ok(gen_a(w)),
        GeneratorKind::B if w.im != 0.0 => Err(GeomError::NonRealAngle(w.im)),
        GeneratorKind::B => Ok(gen_b(w.re)),
    }
}

/// Tangent vector in Euclidean components: horizontal part and vertical part.
pub type Vector = (C, f64);

/// Point, tangent and normal of a frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameVectors {
    pub point: HPoint,
    pub tangent: Vector,
    pub normal: Vector,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frame(pub Isometry);

impl Frame {
    pub fn base() -> Self {
        Frame(Isometry::identity())
    }

    pub fn matrix(&self) -> Isometry {
        self.0
    }

    pub fn point(&self) -> HPoint {
        self.0.act(HPoint::origin())
    }

    /// Geodesic through the frame in its tangent direction: g(0) → g(∞).
    pub fn tangent_geodesic(&self) -> Geodesic {
        self.0.act_geodesic(&Geodesic::vertical())
    }

    /// Geodesic through the frame in its normal direction: g(−1) → g(1).
    pub fn normal_geodesic(&self) -> Geodesic {
        self.0.act_geodesic(&Geodesic {
            rep: SpherePoint::finite(-1.0, 0.0),
            att: SpherePoint::finite(1.0, 0.0),
        })
    }

    pub fn vectors(&self) -> FrameVectors {
        let q = Quat::point(HPoint::origin());
        FrameVectors {
            point: self.point(),
            tangent: pushforward(&self.0, q, Quat::new(c(0.0, 0.0), c(1.0, 0.0))).vector(),
            normal: pushforward(&self.0, q, Quat::new(c(1.0, 0.0), c(0.0, 0.0))).vector(),
        }
    }
}

/// Ψ·h, the frame with matrix g·h.
pub fn right_act(f: &Frame, h: &Isometry) -> Frame {
    Frame(f.0 * *h)
}

/// g·Ψ.
pub fn left_act(g: &Isometry, f: &Frame) -> Frame {
    Frame(*g * f.0)
}

/// d(g) = min(‖G − I‖, ‖G + I‖) in the Frobenius norm.
pub fn isometry_size(g: &Isometry) -> f64 {
    g.psl_dist(&Isometry::identity())
}

/// The isometry u→v with u·(u→v) = v, and its size.
pub fn displacement_metric(u: &Frame, v: &Frame) -> (Isometry, f64) {
    let g = u.0.inverse() * v.0;
    (g, isometry_size(&g))
}

/// Recover the rotation angle of the tangent from Ψ to Ψ·B(θ). Tests of continuity use it.
pub fn bending_angle(u: &Frame, v: &Frame) -> f64 {
    let a = u.vectors();
    let b = v.vectors();
    let t = a.point.t;
    let dot = (a.tangent.0.conj() * b.tangent.0).re + a.tangent.1 * b.tangent.1;
    (dot / (t * t)).clamp(-1.0, 1.0).acos()
}

/// Quaternion z + w·j, used for the derivative of a Möbius map on H³.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Quat {
    z: C,
    w: C,
}

impl Quat {
    fn new(z: C, w: C) -> Self {
        Quat { z, w }
    }

    fn point(p: HPoint) -> Self {
        Quat::new(p.z, c(p.t, 0.0))
    }

    fn scalar(z: C) -> Self {
        Quat::new(z, c(0.0, 0.0))
    }

    fn mul(self, o: Quat) -> Quat {
        Quat::new(
            self.z * o.z - self.w * o.w.conj(),
            self.z * o.w + self.w * o.z.conj(),
        )
    }

    fn add(self, o: Quat) -> Quat {
        Quat::new(self.z + o.z, self.w + o.w)
    }

    fn sub(self, o: Quat) -> Quat {
        Quat::new(self.z - o.z, self.w - o.w)
    }

    fn inv(self) -> Quat {
        let n = self.z.norm_sqr() + self.w.norm_sqr();
        Quat::new(self.z.conj() / n, -self.w / n)
    }

    fn vector(self) -> Vector {
        (self.z, self.w.re)
    }
}

/// Derivative of q ↦ (aq + b)(cq + d)⁻¹ applied to h.
fn pushforward(g: &Isometry, q: Quat, h: Quat) -> Quat {
    let (a, b, cc, d) = (
        Quat::scalar(g.a()),
        Quat::scalar(g.b()),
        Quat::scalar(g.c()),
        Quat::scalar(g.d()),
    );
    let den_inv = cc.mul(q).add(d).inv();
    let num = a.mul(q).add(b);
    a.mul(h)
        .mul(den_inv)
        .sub(num.mul(den_inv).mul(cc).mul(h).mul(den_inv))
}

/// Frame at the foot on `g1` of the common perpendicular to `g1` and `g2`.
///
/// The tangent runs along `g1` and the normal geodesic is the common
/// perpendicular oriented towards `g2`. Also returns the distance between the
/// two geodesics.
pub fn perpendicular_frame(g1: &Geodesic, g2: &Geodesic) -> Result<(Frame, f64)> {
    let dist = complex_distance(g1, g2)?.re();
    let (pn, pd) = g1.rep.hom();
    let (qn, qd) = g1.att.hom();
    // z ↦ (z − p)/(z − q) in homogeneous form
    let t = canonicalize([[pd, -pn], [qd, -qn]])?;
    let (r, s) = match (t.apply(g2.rep).as_finite(), t.apply(g2.att).as_finite()) {
        (Some(r), Some(s)) => (r, s),
        _ => return Err(GeomError::SharedEndpoint),
    };
    let mut u = (r * s).sqrt();
    // the foot of the perpendicular on g2 must lie on the same side as u
    let uh = (u / u.norm()).conj();
    let den = ((s - r) * uh).im;
    let side = if den.abs() > 1e-14 * (s - r).norm() {
        let k = -(r * uh).im / den;
        ((r + (s - r) * k) * uh).re
    } else {
        (r * uh).re
    };
    if side < 0.0 {
        u = -u;
    }
    Ok((Frame(t.inverse() * gen_a(u.ln() * 0.5)), dist))
}

/// Frame at angle π/2 turn: helper for continuous joints.
pub fn quarter_turn() -> Isometry {
    gen_b(FRAC_PI_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::tests::{arb_c, arb_isometry};
    use crate::moebius::{point_to_geodesic_distance, ComplexLength};
    use proptest::prelude::*;

    fn close(a: Vector, b: Vector, tol: f64) -> bool {
        (a.0 - b.0).norm() + (a.1 - b.1).abs() < tol
    }

    #[test]
    fn generator_examples() {
        let x: f64 = 0.37;
        let e = (2.0 * x).exp();
        let v = right_act(&Frame::base(), &gen_a(c(x, 0.0))).vectors();
        assert!((v.point.t - e).abs() < 1e-14 && v.point.z.norm() < 1e-14);
        assert!(close(v.tangent, (c(0.0, 0.0), e), 1e-13));
        assert!(close(v.normal, (c(e, 0.0), 0.0), 1e-13));

        let y: f64 = 0.9;
        let v = right_act(&Frame::base(), &gen_a(c(0.0, y))).vectors();
        assert!(close(v.normal, (C::from_polar(1.0, 2.0 * y), 0.0), 1e-14));
        assert!(close(v.tangent, (c(0.0, 0.0), 1.0), 1e-14));

        let th: f64 = 1.1;
        let v = right_act(&Frame::base(), &gen_b(th)).vectors();
        assert!(close(v.tangent, (c(-th.sin(), 0.0), th.cos()), 1e-14));

        assert_eq!(
            generator(GeneratorKind::B, c(1.0, 0.5)),
            Err(GeomError::NonRealAngle(0.5))
        );
    }

    #[test]
    fn displacement_examples() {
        let u = Frame(gen_a(c(0.3, 0.2)) * gen_b(0.4));
        let (g, d) = displacement_metric(&u, &u);
        assert!(g.approx_eq(&Isometry::identity(), 1e-14));
        assert!(d < 1e-14);
        let t = 1e-3;
        let v = right_act(&u, &gen_a(c(t, 0.0)));
        let (_, d) = displacement_metric(&u, &v);
        // ‖A(t) − I‖_F computed directly
        let direct = ((t.exp() - 1.0).powi(2) + ((-t).exp() - 1.0).powi(2)).sqrt();
        assert!((d - direct).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn frames_are_orthonormal(g in arb_isometry()) {
            let v = Frame(g).vectors();
            let t = v.point.t;
            let dot = |p: Vector, q: Vector| ((p.0.conj() * q.0).re + p.1 * q.1) / (t * t);
            prop_assert!((dot(v.tangent, v.tangent) - 1.0).abs() < 1e-9);
            prop_assert!((dot(v.normal, v.normal) - 1.0).abs() < 1e-9);
            prop_assert!(dot(v.tangent, v.normal).abs() < 1e-9);
        }

        #[test]
        fn actions_commute_and_compose(g in arb_isometry(), h1 in arb_isometry(), h2 in arb_isometry()) {
            let f = Frame::base();
            prop_assert!(right_act(&f, &h1).0.approx_eq(&left_act(&h1, &f).0, 1e-12));
            let lhs = left_act(&g, &right_act(&f, &h1));
            let rhs = right_act(&left_act(&g, &f), &h1);
            prop_assert!(lhs.0.approx_eq(&rhs.0, 1e-12));
            let twice = right_act(&right_act(&Frame(g), &h1), &h2);
            prop_assert!(twice.0.approx_eq(&right_act(&Frame(g), &(h1 * h2)).0, 1e-12));
        }

        #[test]
        fn displacement_left_invariant(w in arb_isometry(), u in arb_isometry(), v in arb_isometry()) {
            let (_, d1) = displacement_metric(&Frame(u), &Frame(v));
            let (_, d2) = displacement_metric(&left_act(&w, &Frame(u)), &left_act(&w, &Frame(v)));
            prop_assert!((d1 - d2).abs() < 1e-9 * d1.max(1.0));
        }

        #[test]
        fn zero_displacement_iff_identity(g in arb_isometry()) {
            let d = isometry_size(&g);
            prop_assert_eq!(d < 1e-12, g.approx_eq(&Isometry::identity(), 1e-12));
        }

        #[test]
        fn perpendicular_frame_meets_both(p in arb_c(3.0), q in arb_c(3.0), r in arb_c(3.0), s in arb_c(3.0)) {
            let pts = [p, q, r, s];
            for i in 0..4 {
                for j in 0..i {
                    prop_assume!((pts[i] - pts[j]).norm() > 0.05);
                }
            }
            let g1 = Geodesic::new(SpherePoint::Finite(p), SpherePoint::Finite(q)).unwrap();
            let g2 = Geodesic::new(SpherePoint::Finite(r), SpherePoint::Finite(s)).unwrap();
            prop_assume!(complex_distance(&g1, &g2).unwrap().re() > 1e-3);
            let (f, d) = perpendicular_frame(&g1, &g2).unwrap();
            let perp = f.normal_geodesic();
            prop_assert!(point_to_geodesic_distance(f.point(), &g1).unwrap() < 1e-9);
            let right = std::f64::consts::FRAC_PI_2;
            prop_assert!(complex_distance(&g1, &perp).unwrap().dist(ComplexLength::from_parts(0.0, right)) < 1e-7
                || complex_distance(&g1, &perp).unwrap().dist(ComplexLength::from_parts(0.0, -right)) < 1e-7);
            // walking along the normal for the distance lands on g2
            let walker = right_act(&f, &(gen_b(-right) * gen_a(c(d * 0.5, 0.0))));
            prop_assert!(point_to_geodesic_distance(walker.point(), &g2).unwrap() < 1e-7);
            prop_assert!(point_to_geodesic_distance(walker.point(), &perp).unwrap() < 1e-7);
        }

        #[test]
        #[test]
        fn quarter_turn_is_recoverable(g in arb_isometry(), th in 0.05f64..3.0) {
            let f = Frame(g);
            let b = bending_angle(&f, &right_act(&f, &gen_b(th)));
            prop_assert!((b - th).abs() < 1e-7);
        }
    }
}
