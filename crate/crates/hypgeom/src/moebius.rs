//! PSL(2,C) arithmetic in the upper half-space model.
//!
//! Matrices are stored as SL(2,C) representatives with a fixed sign, so two
//! isometries can be compared entrywise. Points of the Riemann sphere carry an
//! explicit point at infinity and are handled in homogeneous coordinates
//! internally.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

pub type C = Complex64;

/// Tolerance for algebraic invariants (determinant, idempotence).
pub const TOL_INVARIANT: f64 = 1e-12;
/// Tolerance for derived geometric quantities.
pub const TOL_DERIVED: f64 = 1e-9;
/// Tolerance used when deciding the type of an isometry.
pub const TOL_CLASSIFY: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Reduce an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// A complex number modulo 2πi: real part is a length, imaginary part an angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ComplexLength(C);

impl ComplexLength {
    pub fn new(z: C) -> Self {
        ComplexLength(C::new(z.re, wrap_angle(z.im)))
    }

    pub fn from_parts(re: f64, im: f64) -> Self {
        Self::new(C::new(re, im))
    }

    pub fn zero() -> Self {
        ComplexLength(C::new(0.0, 0.0))
    }

    pub fn value(self) -> C {
        self.0
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    /// Distance in C/2πiZ.
    pub fn dist(self, other: ComplexLength) -> f64 {
        let dre = self.0.re - other.0.re;
        let dim = wrap_angle(self.0.im - other.0.im);
        dre.hypot(dim)
    }

    /// Scale the underlying representative, then renormalize.
    pub fn scale(self, k: f64) -> Self {
        Self::new(self.0 * k)
    }
}

impl From<C> for ComplexLength {
    fn from(z: C) -> Self {
        Self::new(z)
    }
}

impl From<[f64; 2]> for ComplexLength {
    fn from(v: [f64; 2]) -> Self {
        Self::from_parts(v[0], v[1])
    }
}

impl From<ComplexLength> for [f64; 2] {
    fn from(l: ComplexLength) -> Self {
        [l.0.re, l.0.im]
    }
}

impl Add for ComplexLength {
    type Output = ComplexLength;
    fn add(self, o: ComplexLength) -> ComplexLength {
        ComplexLength::new(self.0 + o.0)
    }
}

impl Sub for ComplexLength {
    type Output = ComplexLength;
    fn sub(self, o: ComplexLength) -> ComplexLength {
        ComplexLength::new(self.0 - o.0)
    }
}

impl Neg for ComplexLength {
    type Output = ComplexLength;
    fn neg(self) -> ComplexLength {
        ComplexLength::new(-self.0)
    }
}

impl fmt::Display for ComplexLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.0.re, self.0.im)
    }
}

/// Point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(C),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        SpherePoint::Finite(C::new(re, im))
    }

    /// Homogeneous coordinates (n, d), normalized to unit length.
    pub fn hom(self) -> (C, C) {
        match self {
            SpherePoint::Infinity => (C::new(1.0, 0.0), C::new(0.0, 0.0)),
            SpherePoint::Finite(z) => {
                let r = (1.0 + z.norm_sqr()).sqrt();
                (z / r, C::new(1.0 / r, 0.0))
            }
        }
    }

    pub fn from_hom(n: C, d: C) -> Self {
        if d == C::new(0.0, 0.0) {
            return SpherePoint::Infinity;
        }
        let z = n / d;
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn as_finite(self) -> Option<C> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Chordal distance on the Riemann sphere, in [0, 1].
    pub fn chordal(self, other: SpherePoint) -> f64 {
        let (n1, d1) = self.hom();
        let (n2, d2) = other.hom();
        bracket((n1, d1), (n2, d2)).norm()
    }
}

/// n1·d2 − n2·d1, the homogeneous form of z1 − z2.
pub(crate) fn bracket(p: (C, C), q: (C, C)) -> C {
    p.0 * q.1 - q.0 * p.1
}

/// Point (z, t) of upper half-space, t > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    pub z: C,
    pub t: f64,
}

impl HPoint {
    pub fn new(z: C, t: f64) -> Self {
        HPoint { z, t }
    }

    /// The base point (0, 1).
    pub fn origin() -> Self {
        HPoint::new(C::new(0.0, 0.0), 1.0)
    }

    /// Hyperbolic distance.
    pub fn distance(&self, o: &HPoint) -> f64 {
        let e2 = (self.z - o.z).norm_sqr() + (self.t - o.t).powi(2);
        2.0 * (e2.sqrt() / (2.0 * (self.t * o.t).sqrt())).asinh()
    }
}

/// Oriented geodesic of H³ given by its endpoints on the sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geodesic {
    pub rep: SpherePoint,
    pub att: SpherePoint,
}

impl Geodesic {
    pub fn new(rep: SpherePoint, att: SpherePoint) -> Result<Self> {
        if rep.chordal(att) <= TOL_INVARIANT {
            return Err(GeomError::DegenerateGeodesic);
        }
        Ok(Geodesic { rep, att })
    }

    /// The vertical geodesic from 0 to ∞.
    pub fn vertical() -> Self {
        Geodesic {
            rep: SpherePoint::finite(0.0, 0.0),
            att: SpherePoint::Infinity,
        }
    }

    pub fn reversed(self) -> Self {
        Geodesic {
            rep: self.att,
            att: self.rep,
        }
    }

    /// Point on the geodesic at signed distance `s` from its top (or from
    /// height 1 when the geodesic is vertical).
    pub fn point_at(&self, s: f64) -> HPoint {
        match (self.rep, self.att) {
            (SpherePoint::Finite(z), SpherePoint::Infinity) => HPoint::new(z, s.exp()),
            (SpherePoint::Infinity, SpherePoint::Finite(z)) => HPoint::new(z, (-s).exp()),
            (SpherePoint::Finite(p), SpherePoint::Finite(q)) => {
                let centre = (p + q) * 0.5;
                let r = (q - p).norm() * 0.5;
                let dir = (q - p) / (2.0 * r);
                // tanh(s) is the horizontal offset, sech(s) the height, on the unit semicircle
                HPoint::new(centre + dir * (r * s.tanh()), r / s.cosh())
            }
            (SpherePoint::Infinity, SpherePoint::Infinity) => unreachable!("degenerate geodesic"),
        }
    }
}

/// Type of a PSL(2,C) element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsometryKind {
    Identity,
    Parabolic,
    Elliptic,
    Loxodromic,
}

/// SL(2,C) representative of a PSL(2,C) element, with the canonical sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 4]", into = "[[f64; 2]; 4]")]
pub struct Isometry {
    a: C,
    b: C,
    c: C,
    d: C,
}

fn sign_rule(a: C, b: C, c: C, d: C) -> Isometry {
    let lead = [a, b, c, d].into_iter().find(|z| z.norm() > TOL_INVARIANT);
    let flip = match lead {
        Some(z) => !(z.re > 0.0 || (z.re == 0.0 && z.im > 0.0)),
        None => false,
    };
    if flip {
        Isometry {
            a: -a,
            b: -b,
            c: -c,
            d: -d,
        }
    } else {
        Isometry { a, b, c, d }
    }
}

/// Scale `m` to determinant one and apply the canonical sign.
pub fn canonicalize(m: [[C; 2]; 2]) -> Result<Isometry> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() <= 1e-24 || !det.norm().is_finite() {
        return Err(GeomError::SingularMatrix(det.norm()));
    }
    let s = det.sqrt();
    Ok(sign_rule(m[0][0] / s, m[0][1] / s, m[1][0] / s, m[1][1] / s))
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry {
            a: c(1.0, 0.0),
            b: c(0.0, 0.0),
            c: c(0.0, 0.0),
            d: c(1.0, 0.0),
        }
    }

    /// Build from entries assumed to have determinant one. Only the sign rule is applied.
    pub fn from_sl2(a: C, b: C, c: C, d: C) -> Self {
        sign_rule(a, b, c, d)
    }

    pub fn from_matrix(m: [[C; 2]; 2]) -> Result<Self> {
        canonicalize(m)
    }

    pub fn entries(&self) -> [C; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn matrix(&self) -> [[C; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn a(&self) -> C {
        self.a
    }
    pub fn b(&self) -> C {
        self.b
    }
    pub fn c(&self) -> C {
        self.c
    }
    pub fn d(&self) -> C {
        self.d
    }

    pub fn det(&self) -> C {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C {
        self.a + self.d
    }

    pub fn frobenius(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    pub fn inverse(&self) -> Self {
        sign_rule(self.d, -self.b, -self.c, self.a)
    }

    /// Distance to `other` in PSL(2,C): min over the two lifts of the Frobenius norm.
    pub fn psl_dist(&self, o: &Isometry) -> f64 {
        let p = (self.a - o.a).norm_sqr()
            + (self.b - o.b).norm_sqr()
            + (self.c - o.c).norm_sqr()
            + (self.d - o.d).norm_sqr();
        let m = (self.a + o.a).norm_sqr()
            + (self.b + o.b).norm_sqr()
            + (self.c + o.c).norm_sqr()
            + (self.d + o.d).norm_sqr();
        p.min(m).sqrt()
    }

    /// Relative PSL distance, for matrices with large entries.
    pub fn approx_eq(&self, o: &Isometry, tol: f64) -> bool {
        self.psl_dist(o) <= tol * self.frobenius().max(o.frobenius()).max(1.0)
    }

    /// Möbius action on the Riemann sphere.
    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        let (n, d) = p.hom();
        SpherePoint::from_hom(self.a * n + self.b * d, self.c * n + self.d * d)
    }

    pub(crate) fn apply_hom(&self, p: (C, C)) -> (C, C) {
        let n = self.a * p.0 + self.b * p.1;
        let d = self.c * p.0 + self.d * p.1;
        let r = (n.norm_sqr() + d.norm_sqr()).sqrt();
        (n / r, d / r)
    }

    /// Poincaré extension to upper half-space.
    pub fn act(&self, p: HPoint) -> HPoint {
        let czd = self.c * p.z + self.d;
        let den = czd.norm_sqr() + self.c.norm_sqr() * p.t * p.t;
        let z = ((self.a * p.z + self.b) * czd.conj() + self.a * self.c.conj() * (p.t * p.t)) / den;
        HPoint::new(z, p.t / den)
    }

    pub fn act_geodesic(&self, g: &Geodesic) -> Geodesic {
        Geodesic {
            rep: self.apply(g.rep),
            att: self.apply(g.att),
        }
    }

    pub fn classify(&self) -> IsometryKind {
        self.classify_with(TOL_CLASSIFY)
    }

    pub fn classify_with(&self, tol: f64) -> IsometryKind {
        if self.psl_dist(&Isometry::identity()) <= tol {
            return IsometryKind::Identity;
        }
        let tr = self.trace();
        if (tr * tr - 4.0).norm() <= tol * tr.norm_sqr().max(1.0) {
            return IsometryKind::Parabolic;
        }
        if tr.im.abs() <= tol && tr.re.abs() < 2.0 {
            return IsometryKind::Elliptic;
        }
        IsometryKind::Loxodromic
    }

    fn require_loxodromic(&self) -> Result<()> {
        match self.classify() {
            IsometryKind::Identity => Err(GeomError::Identity),
            IsometryKind::Parabolic => Err(GeomError::Parabolic),
            IsometryKind::Elliptic => Err(GeomError::Elliptic),
            IsometryKind::Loxodromic => Ok(()),
        }
    }

    /// Eigenvalue of larger modulus.
    pub fn dominant_eigenvalue(&self) -> C {
        dominant_root(self.trace())
    }
}

/// Larger-modulus root of λ² − tr·λ + 1 = 0.
pub(crate) fn dominant_root(tr: C) -> C {
    let h = tr * 0.5;
    let s = (h * h - 1.0).sqrt();
    let (p, m) = (h + s, h - s);
    if p.norm() >= m.norm() {
        p
    } else {
        m
    }
}

impl Mul for Isometry {
    type Output = Isometry;
    fn mul(self, o: Isometry) -> Isometry {
        sign_rule(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl From<Isometry> for [[f64; 2]; 4] {
    fn from(g: Isometry) -> Self {
        g.entries().map(|z| [z.re, z.im])
    }
}

impl TryFrom<[[f64; 2]; 4]> for Isometry {
    type Error = GeomError;
    fn try_from(v: [[f64; 2]; 4]) -> Result<Self> {
        let e = v.map(|p| C::new(p[0], p[1]));
        canonicalize([[e[0], e[1]], [e[2], e[3]]])
    }
}

/// Fold an angle into (−π/2, π/2]; a PSL element only fixes λ up to sign.
pub(crate) fn fold_half(im: f64) -> f64 {
    let mut y = wrap_angle(im);
    if y > FRAC_PI_2 {
        y -= PI;
    } else if y <= -FRAC_PI_2 {
        y += PI;
    }
    y
}

/// Complex half-length: hl with Re hl > 0 and g conjugate to diag(e^hl, e^−hl).
///
/// The imaginary part is folded into (−π/2, π/2] because ±g are the same
/// isometry; the full complex length 2·hl is then well defined mod 2πi.
pub fn half_length(g: &Isometry) -> Result<ComplexLength> {
    g.require_loxodromic()?;
    let hl = g.dominant_eigenvalue().ln();
    Ok(ComplexLength(C::new(hl.re, fold_half(hl.im))))
}

fn larger(p: (C, C), q: (C, C)) -> (C, C) {
    if p.0.norm_sqr() + p.1.norm_sqr() >= q.0.norm_sqr() + q.1.norm_sqr() {
        p
    } else {
        q
    }
}

/// Homogeneous fixed points (repelling, attracting) of a matrix with dominant eigenvalue λ.
///
/// Attracting: b/(λ−a) = (λ−d)/c. Repelling: bλ/(1−aλ) = (1−dλ)/(cλ).
/// Each pair of formulas is evaluated in homogeneous form and the better
/// conditioned one is kept.
pub(crate) fn fixed_points_hom(a: C, b: C, c: C, d: C, lam: C) -> ((C, C), (C, C)) {
    let att = larger((b, lam - a), (lam - d, c));
    let rep = larger((b * lam, 1.0 - a * lam), (1.0 - d * lam, c * lam));
    (rep, att)
}

/// Oriented axis (repelling → attracting fixed point).
pub fn axis(g: &Isometry) -> Result<Geodesic> {
    g.require_loxodromic()?;
    let lam = g.dominant_eigenvalue();
    let (rep, att) = fixed_points_hom(g.a, g.b, g.c, g.d, lam);
    Ok(Geodesic {
        rep: SpherePoint::from_hom(rep.0, rep.1),
        att: SpherePoint::from_hom(att.0, att.1),
    })
}

/// Signed complex distance between two oriented geodesics.
///
/// g1 is moved to (0, ∞) and the repelling end of g2 to 1; with x the image of
/// the attracting end of g2, d = ln((1+√x)/(1−√x)). The principal root gives
/// Re d ≥ 0; orientation information is carried by Im d.
pub fn complex_distance(g1: &Geodesic, g2: &Geodesic) -> Result<ComplexLength> {
    let p1 = g1.rep.hom();
    let p2 = g1.att.hom();
    let p3 = g2.rep.hom();
    let p4 = g2.att.hom();
    for (p, q) in [(p1, p3), (p1, p4), (p2, p3), (p2, p4)] {
        if bracket(p, q).norm() <= TOL_INVARIANT {
            return Err(GeomError::SharedEndpoint);
        }
    }
    let x = bracket(p4, p1) * bracket(p3, p2) / (bracket(p4, p2) * bracket(p3, p1));
    let s = x.sqrt();
    Ok(ComplexLength::new(((1.0 + s) / (1.0 - s)).ln()))
}

/// sinh of the distance from (0,1) to the geodesic with homogeneous endpoints p, q:
/// |1 + z1·conj(z2)| / |z1 − z2|.
pub(crate) fn sinh_dist_origin(p: (C, C), q: (C, C)) -> f64 {
    let num = p.1 * q.1.conj() + p.0 * q.0.conj();
    num.norm() / bracket(p, q).norm()
}

/// Hyperbolic distance from `p` to the axis of `g`.
pub fn point_to_axis_distance(p: HPoint, g: &Isometry) -> Result<f64> {
    check_height(&p)?;
    g.require_loxodromic()?;
    let h = to_point(&p);
    let h = h.inverse() * *g * h;
    let lam = h.dominant_eigenvalue();
    let (rep, att) = fixed_points_hom(h.a, h.b, h.c, h.d, lam);
    Ok(sinh_dist_origin(att, rep).asinh())
}

/// Hyperbolic distance from `p` to a geodesic given by its endpoints.
pub fn point_to_geodesic_distance(p: HPoint, g: &Geodesic) -> Result<f64> {
    check_height(&p)?;
    let back = to_point(&p).inverse();
    let rep = back.apply_hom(g.rep.hom());
    let att = back.apply_hom(g.att.hom());
    Ok(sinh_dist_origin(att, rep).asinh())
}

fn check_height(p: &HPoint) -> Result<()> {
    if p.t <= 0.0 || !p.t.is_finite() {
        return Err(GeomError::OutOfRange(format!("height t = {}", p.t)));
    }
    Ok(())
}

/// Isometry taking (0, 1) to `p` by a dilation and a horizontal translation.
fn to_point(p: &HPoint) -> Isometry {
    let st = p.t.sqrt();
    Isometry::from_sl2(c(st, 0.0), p.z / st, c(0.0, 0.0), c(1.0 / st, 0.0))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub fn diag(w: C) -> Isometry {
        Isometry::from_sl2(w.exp(), c(0.0, 0.0), c(0.0, 0.0), (-w).exp())
    }

    pub fn arb_c(r: f64) -> impl Strategy<Value = C> {
        (-r..r, -r..r).prop_map(|(x, y)| C::new(x, y))
    }

    pub fn arb_isometry() -> impl Strategy<Value = Isometry> {
        (arb_c(2.0), arb_c(2.0), arb_c(2.0), arb_c(2.0))
            .prop_filter_map("singular", |(a, b, cc, d)| {
                let det = a * d - b * cc;
                if det.norm() < 0.1 {
                    None
                } else {
                    canonicalize([[a, b], [cc, d]]).ok()
                }
            })
    }

    #[test]
    fn canonicalize_examples() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        assert_eq!(canonicalize([[one, zero], [zero, one]]).unwrap(), Isometry::identity());
        assert_eq!(canonicalize([[-one, zero], [zero, -one]]).unwrap(), Isometry::identity());
        let e = std::f64::consts::E;
        let g = canonicalize([[c(2.0 * e, 0.0), zero], [zero, c(2.0 / e, 0.0)]]).unwrap();
        assert!((g.a() - e).norm() < 1e-14);
        assert!((g.d() - 1.0 / e).norm() < 1e-14);
        assert!((g.det() - 1.0).norm() < TOL_INVARIANT);
        assert!(canonicalize([[one, one], [one, one]]).is_err());
    }

    #[test]
    fn half_length_examples() {
        let w = c(1.0, PI / 6.0);
        let hl = half_length(&diag(w)).unwrap();
        assert!((hl.value() - w).norm() < 1e-14);
        let rot = Isometry::from_sl2(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(half_length(&rot), Err(GeomError::Elliptic));
        assert_eq!(half_length(&Isometry::identity()), Err(GeomError::Identity));
        let par = Isometry::from_sl2(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(half_length(&par), Err(GeomError::Parabolic));
    }

    #[test]
    fn half_length_is_sign_independent() {
        // −A(w) is the same isometry; its eigenvalues are −e^{±w}
        let w = c(0.4, 1.3);
        let g = diag(w);
        let minus = Isometry {
            a: -g.a,
            b: -g.b,
            c: -g.c,
            d: -g.d,
        };
        let h1 = half_length(&g).unwrap();
        let h2 = half_length(&minus).unwrap();
        assert!(h1.dist(h2) < 1e-14);
        assert!(h1.im() > -FRAC_PI_2 && h1.im() <= FRAC_PI_2);
    }

    #[test]
    fn axis_examples() {
        let ax = axis(&diag(c(1.0, 0.0))).unwrap();
        assert_eq!(ax.rep, SpherePoint::finite(0.0, 0.0));
        assert_eq!(ax.att, SpherePoint::Infinity);
        let rot = Isometry::from_sl2(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert!(axis(&rot).is_err());
    }

    #[test]
    fn complex_distance_examples() {
        let v = Geodesic::vertical();
        let g = Geodesic::new(SpherePoint::finite(1.0, 0.0), SpherePoint::finite(0.25, 0.0)).unwrap();
        let d = complex_distance(&v, &g).unwrap();
        assert!((d.value() - c(3f64.ln(), 0.0)).norm() < 1e-14);
        let g = Geodesic::new(SpherePoint::finite(-1.0, 0.0), SpherePoint::finite(1.0, 0.0)).unwrap();
        let d = complex_distance(&v, &g).unwrap();
        assert!((d.value() - c(0.0, FRAC_PI_2)).norm() < 1e-14);
        let g = Geodesic::new(SpherePoint::finite(0.0, 0.0), SpherePoint::finite(1.0, 0.0)).unwrap();
        assert_eq!(complex_distance(&v, &g), Err(GeomError::SharedEndpoint));
    }

    #[test]
    fn point_to_axis_examples() {
        let g = diag(c(1.0, 0.0));
        assert!(point_to_axis_distance(HPoint::origin(), &g).unwrap().abs() < 1e-14);
        let p = HPoint::new(c(0.0, 0.0), std::f64::consts::E);
        assert!(point_to_axis_distance(p, &g).unwrap().abs() < 1e-14);
        // horizontal offset x at height 1 from the vertical axis: sinh D = |x|
        let p = HPoint::new(c(0.0, 2.0), 1.0);
        assert!((point_to_axis_distance(p, &g).unwrap() - 2f64.asinh()).abs() < 1e-14);
    }

    #[test]
    fn geodesic_point_at_lies_on_semicircle() {
        let g = Geodesic::new(SpherePoint::finite(-1.0, 1.0), SpherePoint::finite(3.0, 0.0)).unwrap();
        let p0 = g.point_at(0.0);
        let p1 = g.point_at(0.7);
        assert!((p0.distance(&p1) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let g = canonicalize([[c(1.0, 2.0), c(0.5, 0.0)], [c(0.0, -1.0), c(2.0, 0.3)]]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: Isometry = serde_json::from_str(&s).unwrap();
        assert!(back.approx_eq(&g, 1e-15));
        let l = ComplexLength::from_parts(1.5, -0.25);
        assert_eq!(serde_json::to_string(&l).unwrap(), "[1.5,-0.25]");
    }

    proptest! {
        #[test]
        fn canonicalize_idempotent_and_sign_stable(g in arb_isometry()) {
            let again = canonicalize(g.matrix()).unwrap();
            prop_assert!(again.psl_dist(&g) < 1e-13);
            let neg = g.matrix().map(|r| r.map(|z| -z));
            let n = canonicalize(neg).unwrap();
            prop_assert!((n.a() - g.a()).norm() + (n.b() - g.b()).norm() < 1e-13);
            prop_assert!((g.det() - 1.0).norm() <= TOL_INVARIANT);
        }

        #[test]
        fn half_length_conjugation_invariant(g in arb_isometry(), x in 0.05f64..3.0, y in -1.5f64..1.5) {
            let h = diag(c(x, y));
            let conj = g * h * g.inverse();
            let hl = half_length(&conj).unwrap();
            prop_assert!(hl.dist(ComplexLength::from_parts(x, y)) < 1e-10);
        }

        #[test]
        fn axis_is_conjugated_axis(g in arb_isometry()) {
            let h = g * diag(c(1.0, 0.0)) * g.inverse();
            let ax = axis(&h).unwrap();
            prop_assert!(ax.rep.chordal(g.apply(SpherePoint::finite(0.0, 0.0))) < 1e-10);
            prop_assert!(ax.att.chordal(g.apply(SpherePoint::Infinity)) < 1e-10);
        }

        #[test]
        fn complex_distance_moebius_invariant(t in arb_isometry(), e in prop::array::uniform4(arb_c(3.0))) {
            let pts = e.map(SpherePoint::Finite);
            let g1 = Geodesic::new(pts[0], pts[1]);
            let g2 = Geodesic::new(pts[2], pts[3]);
            prop_assume!(g1.is_ok() && g2.is_ok());
            let (g1, g2) = (g1.unwrap(), g2.unwrap());
            let d = complex_distance(&g1, &g2);
            prop_assume!(d.is_ok());
            let d = d.unwrap();
            // stay away from the branch cut of the principal root
            prop_assume!(d.re() > 1e-3);
            let dt = complex_distance(&t.act_geodesic(&g1), &t.act_geodesic(&g2)).unwrap();
            prop_assert!(d.dist(dt) < 1e-9, "{} vs {}", d, dt);
            prop_assert!(d.re() >= 0.0);
            // swapping the pair keeps the value
            let ds = complex_distance(&g2, &g1).unwrap();
            prop_assert!(d.dist(ds) < 1e-9);
        }

        #[test]
        fn intersecting_geodesics_have_zero_real_distance(a in 0.1f64..3.0, b in 0.1f64..3.0, phi in 0.1f64..3.0) {
            // endpoints on opposite sides of 0 along one line: the semicircle crosses the vertical axis
            let u = C::from_polar(1.0, phi);
            let g2 = Geodesic::new(SpherePoint::Finite(-u * a), SpherePoint::Finite(u * b)).unwrap();
            let d = complex_distance(&Geodesic::vertical(), &g2).unwrap();
            prop_assert!(d.re().abs() < 1e-9);
            // same side: disjoint
            let g3 = Geodesic::new(SpherePoint::Finite(u * a), SpherePoint::Finite(u * (a + b))).unwrap();
            let d3 = complex_distance(&Geodesic::vertical(), &g3).unwrap();
            prop_assert!(d3.re() > 1e-6);
        }

        #[test]
        fn point_to_geodesic_matches_sampling(p in arb_c(3.0), q in arb_c(3.0), zx in -2.0f64..2.0, zy in -2.0f64..2.0, lt in -1.0f64..1.0) {
            prop_assume!((p - q).norm() > 0.1);
            let g = Geodesic::new(SpherePoint::Finite(p), SpherePoint::Finite(q)).unwrap();
            let x = HPoint::new(c(zx, zy), lt.exp());
            let d = point_to_geodesic_distance(x, &g).unwrap();
            prop_assert!((d - sample_min_distance(&x, &g)).abs() < 1e-6);
        }

        #[test]
        fn point_to_axis_matches_sampling(g in arb_isometry(), zx in -2.0f64..2.0, zy in -2.0f64..2.0, lt in -1.0f64..1.0) {
            prop_assume!(g.classify() == IsometryKind::Loxodromic);
            let hl = half_length(&g).unwrap();
            prop_assume!(hl.re() > 1e-3);
            let p = HPoint::new(c(zx, zy), lt.exp());
            let d = point_to_axis_distance(p, &g).unwrap();
            let ax = axis(&g).unwrap();
            let oracle = sample_min_distance(&p, &ax);
            prop_assert!((d - oracle).abs() < 1e-6, "{} vs {}", d, oracle);
        }
    }

    /// Distance from p to a geodesic by dense sampling plus golden-section refinement.
    pub fn sample_min_distance(p: &HPoint, g: &Geodesic) -> f64 {
        let f = |s: f64| p.distance(&g.point_at(s));
        let n = 4000;
        let (lo, hi) = (-40.0, 40.0);
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=n {
            let s = lo + (hi - lo) * k as f64 / n as f64;
            let v = f(s);
            if v < best.0 {
                best = (v, s);
            }
        }
        let h = (hi - lo) / n as f64;
        let (mut a, mut b) = (best.1 - h, best.1 + h);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let x1 = b - gr * (b - a);
            let x2 = a + gr * (b - a);
            if f(x1) < f(x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        f(0.5 * (a + b)).min(best.0)
    }
}
