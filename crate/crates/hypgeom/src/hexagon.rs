//! Right-angled hexagons, the degenerate hexagon of two nearly opposite
//! perpendiculars, and spacing of orthogeodesic feet along an ideal triangle side.
//!
//! Hexagon sides are listed in cyclic order. Side k lies on a line whose two
//! neighbours are the lines of sides k−1 and k+1, and its complex length is
//! the complex distance between those neighbours. The cosine law reads
//!
//! cosh s_k = (cosh s_{k−1} cosh s_{k+1} + cosh s_{k+3}) / (sinh s_{k−1} sinh s_{k+1}).

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::frame::{gen_a, gen_b, perpendicular_frame, right_act, Frame};
use crate::moebius::{
    c, complex_distance, point_to_geodesic_distance, ComplexLength, Geodesic, HPoint, Isometry, C,
};

/// Residual allowed by [`Hexagon::new`].
pub const HEXAGON_TOL: f64 = 1e-10;

/// arccosh with Re ≥ 0.
pub fn acosh(z: C) -> C {
    // the two roots multiply to 1; the larger one avoids cancellation and has Re ≥ 0
    let s = (z * z - 1.0).sqrt();
    if (z + s).norm() >= (z - s).norm() {
        (z + s).ln()
    } else {
        (z - s).ln()
    }
}

fn asinh(z: C) -> C {
    let s = (z * z + 1.0).sqrt();
    if (z + s).norm() >= (s - z).norm() {
        (z + s).ln()
    } else {
        -(s - z).ln()
    }
}

/// Side opposite to 2d in a right-angled hexagon where l1, l3 are the sides next to 2d.
pub fn hexagon_opposite(l1: ComplexLength, l3: ComplexLength, twod: ComplexLength) -> Result<ComplexLength> {
    if l1.re() <= 0.0 || l3.re() <= 0.0 {
        return Err(GeomError::OutOfRange("sides next to 2d need positive length".into()));
    }
    let (l1, l3) = (l1.value(), l3.value());
    let den = l1.sinh() * l3.sinh();
    if den.norm() < 1e-14 {
        return Err(GeomError::BranchAmbiguity(den.norm()));
    }
    let ch = twod.value().cosh() * den - l1.cosh() * l3.cosh();
    Ok(ComplexLength::new(acosh(ch)))
}

/// Relative residual of the cosine law for a side with neighbours p, n and opposite o.
fn law_residual(s: C, p: C, n: C, o: C) -> f64 {
    let lhs = s.cosh() * p.sinh() * n.sinh();
    let pc = p.cosh() * n.cosh();
    let oc = o.cosh();
    (lhs - pc - oc).norm() / (lhs.norm() + pc.norm() + oc.norm())
}

/// ‖W ∓ I‖ for W = ∏ A(s_k/2)·B(π/2), scaled by the size of the factors.
///
/// W = ±I exactly when six lines meeting at right angles with these complex
/// distances close up.
fn closure_defect(sides: &[C; 6]) -> f64 {
    let quarter = gen_b(FRAC_PI_2);
    let mut w = Isometry::identity();
    let mut scale = 1.0;
    for s in sides {
        w = w * gen_a(*s * 0.5) * quarter;
        scale *= (s.re * 0.5).cosh();
    }
    w.psl_dist(&Isometry::identity()) / scale
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hexagon {
    pub sides: [ComplexLength; 6],
}

impl Hexagon {
    pub fn new(sides: [ComplexLength; 6]) -> Result<Self> {
        let h = Hexagon { sides };
        let r = h.max_residual();
        if !(r <= HEXAGON_TOL) {
            return Err(GeomError::HypothesisViolated(format!("cosine law residual {r:e}")));
        }
        Ok(h)
    }

    /// Hexagon with sides s0, s2, s4 given; the other three come from the cosine law.
    ///
    /// The law fixes each of them only up to sign, so the sign pattern is the
    /// one for which the hexagon actually closes.
    pub fn from_alternate(alt: [ComplexLength; 3]) -> Result<Self> {
        let h = alt.map(|x| x.value());
        let mut opp = [C::new(0.0, 0.0); 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let den = h[j].sinh() * h[k].sinh();
            if den.norm() < 1e-14 {
                return Err(GeomError::BranchAmbiguity(den.norm()));
            }
            opp[i] = acosh((h[j].cosh() * h[k].cosh() + h[i].cosh()) / den);
        }
        // s1 sits between s0 and s2, so it is opposite s4
        let layout = |sg: [f64; 3]| [h[0], opp[2] * sg[2], h[1], opp[0] * sg[0], h[2], opp[1] * sg[1]];
        let signs = sign_patterns();
        let best = pick(signs.iter().map(|sg| layout(*sg)));
        Ok(Hexagon {
            sides: best.map(ComplexLength::new),
        })
    }

    /// Cosine-law residual for side k.
    pub fn residual(&self, k: usize) -> f64 {
        let s = |i: usize| self.sides[i % 6].value();
        law_residual(s(k), s(k + 5), s(k + 1), s(k + 3))
    }

    pub fn residuals(&self) -> [f64; 6] {
        std::array::from_fn(|k| self.residual(k))
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().fold(0.0, f64::max)
    }

    pub fn closure_defect(&self) -> f64 {
        closure_defect(&self.sides.map(|s| s.value()))
    }
}

fn sign_patterns() -> Vec<[f64; 3]> {
    (0..8)
        .map(|m| std::array::from_fn(|i| if m >> i & 1 == 0 { 1.0 } else { -1.0 }))
        .collect()
}

/// First candidate that closes, otherwise the one with the smallest defect.
fn pick(cands: impl Iterator<Item = [C; 6]>) -> [C; 6] {
    let mut best: Option<([C; 6], f64)> = None;
    for s in cands {
        let d = closure_defect(&s);
        if d < 1e-11 {
            return s;
        }
        if best.map_or(true, |(_, e)| d < e) {
            best = Some((s, d));
        }
    }
    best.expect("at least one candidate").0
}

/// Measure the hexagon cut out by three pairwise disjoint lines and their common perpendiculars.
///
/// Each line is reoriented so that it runs from its foot on the previous
/// perpendicular to its foot on the next one. Sides are listed starting with
/// the side on `lines[0]`, then the perpendicular from `lines[0]` to `lines[1]`,
/// and so on.
pub fn hexagon_from_lines(lines: [Geodesic; 3]) -> Result<Hexagon> {
    let mut cuffs = lines;
    for k in 0..3 {
        let (next, _) = perpendicular_frame(&lines[k], &lines[(k + 1) % 3])?;
        let (prev, _) = perpendicular_frame(&lines[k], &lines[(k + 2) % 3])?;
        // position of the previous foot along the line, seen from the next foot
        let h = next.matrix().inverse().act(prev.point()).t;
        if h > 1.0 {
            cuffs[k] = lines[k].reversed();
        }
    }
    let mut all = Vec::with_capacity(6);
    for k in 0..3 {
        all.push(cuffs[k]);
        all.push(perpendicular_frame(&cuffs[k], &cuffs[(k + 1) % 3])?.0.normal_geodesic());
    }
    let mut sides = [ComplexLength::zero(); 6];
    for k in 0..6 {
        sides[k] = complex_distance(&all[(k + 5) % 6], &all[(k + 1) % 6])?;
    }
    Ok(Hexagon { sides })
}

/// The degenerate hexagon (a, x, c, y, b, z) cut out by two perpendiculars ζ₁, ζ₂ to a line τ.
///
/// x, y are the distances from τ to the two segments' lines along ζ₁, ζ₂ and
/// c is the distance between ζ₁ and ζ₂ along τ. Returns z, the distance between
/// the two lines, and a, b, the offsets of ζ₁, ζ₂ from their common perpendicular.
pub fn quad_solve(
    x: ComplexLength,
    y: ComplexLength,
    cc: ComplexLength,
) -> Result<(ComplexLength, ComplexLength, ComplexLength)> {
    let (x, y, cv) = (x.value(), y.value(), cc.value());
    for s in [x.sinh(), y.sinh()] {
        if s.norm() < 1e-14 {
            return Err(GeomError::BranchAmbiguity(s.norm()));
        }
    }
    let ipi = c(0.0, PI);
    let rhs = (x + y).cosh() + x.sinh() * y.sinh() * ((cv - ipi).cosh() - 1.0);
    let z0 = acosh(rhs);
    let mut cands = Vec::new();
    for z in [ipi + z0, ipi - z0] {
        let sz = z.sinh();
        if sz.norm() < 1e-14 {
            return Err(GeomError::BranchAmbiguity(sz.norm()));
        }
        let a0 = asinh(y.sinh() * cv.sinh() / sz);
        let b0 = asinh(x.sinh() * cv.sinh() / sz);
        for a in [a0, ipi - a0] {
            for b in [b0, ipi - b0] {
                cands.push([a, x, cv, y, b, z]);
            }
        }
    }
    let s = pick(cands.into_iter());
    Ok((ComplexLength::new(s[5]), ComplexLength::new(s[0]), ComplexLength::new(s[4])))
}

/// Complex distance from the geodesic −1 → 0 to the geodesic z_k → ∞, z_k = e^{−kλ}·z0.
pub fn ortho_spacing(lambda: ComplexLength, z0: C, k: i64) -> ComplexLength {
    let z = (-lambda.value() * k as f64).exp() * z0;
    let r = (z * z + z).sqrt();
    let p = -(1.0 + 2.0 * z + 2.0 * r);
    let q = -(1.0 + 2.0 * z - 2.0 * r);
    // the two roots are reciprocal; the larger one has Re d ≥ 0
    let e = if p.norm() >= q.norm() { p } else { q };
    ComplexLength::new(e.ln())
}

/// Randomness of one foot configuration, drawn independently of its scale.
#[derive(Clone, Copy, Debug)]
pub struct FootDraw {
    /// directions of the two lines orthogonal to the vertical axis
    pub alpha: [f64; 2],
    /// traceless perturbations (a, b, c) of the two lines
    pub tilt: [[C; 3]; 2],
    /// displacement of X_i along its segment, in units of ω/4
    pub slide: [f64; 2],
    /// rotation of ζ_i about its segment, in units of ω/4
    pub turn: [f64; 2],
}

impl FootDraw {
    pub fn sample<R: Rng>(r: &mut R) -> Self {
        let mut u = || r.gen_range(-1.0..1.0);
        let alpha = [u() * PI, u() * PI];
        let tilt = std::array::from_fn(|_| std::array::from_fn(|_| c(u(), u())));
        FootDraw {
            alpha,
            tilt,
            slide: [u(), u()],
            turn: [u(), u()],
        }
    }
}

/// Measurements on one foot configuration.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FootSample {
    pub omega: f64,
    /// how far the segment endpoints stray from δ₁, δ₂
    pub drift: [f64; 2],
    /// |d_C(ζ₁, ζ₂) − iπ|
    pub zeta_defect: f64,
    /// d(X_i, Y_i)
    pub dist: [f64; 2],
}

impl FootSample {
    pub fn max_dist(&self) -> f64 {
        self.dist[0].max(self.dist[1])
    }
}

fn exp_traceless(m: [C; 3], eta: f64) -> Isometry {
    let [a, b, cc] = m.map(|x| x * eta);
    let r = (a * a + b * cc).sqrt();
    let (ch, sh) = if r.norm() < 1e-6 {
        (1.0 + r * r * 0.5, C::new(1.0, 0.0) + r * r / 6.0)
    } else {
        (r.cosh(), r.sinh() / r)
    };
    Isometry::from_sl2(ch + sh * a, sh * b, sh * cc, ch - sh * a)
}

/// Builds two segments of length `seg_len` within ω of lines δ₁, δ₂ whose common
/// perpendicular ξ has length `sep`, picks points X_i on the segments whose
/// perpendiculars ζ_i are nearly opposite, and measures d(X_i, Y_i) where Y_i
/// are the feet of ξ.
///
/// δ₁, δ₂ are orthogonal to the vertical axis at heights 1 and e^sep, so the
/// feet Y_i are known exactly. The segments are images of pieces of δ_i under
/// small isometries near Y_i. X_i starts at the foot Z_i of the common
/// perpendicular of the two segments and is moved by at most ω/4.
pub fn foot_configuration(draw: &FootDraw, sep: f64, seg_len: f64, omega: f64) -> Result<FootSample> {
    let heights = [0.0, sep];
    let feet = heights.map(|h| HPoint::new(c(0.0, 0.0), h.exp()));
    let base: [Frame; 2] = std::array::from_fn(|i| {
        Frame(gen_a(c(heights[i], draw.alpha[i]) * 0.5) * gen_b(-FRAC_PI_2))
    });
    let deltas = base.map(|f| f.tangent_geodesic());
    let ends = |f: &Frame| {
        [-1.0, 1.0].map(|s| right_act(f, &gen_a(c(s * seg_len * 0.25, 0.0))).point())
    };

    let mut lines = deltas;
    let mut drift = [0.0; 2];
    for i in 0..2 {
        let lift = gen_a(c(heights[i] * 0.5, 0.0));
        let moved = |eta: f64| lift * exp_traceless(draw.tilt[i], eta) * lift.inverse();
        let stray = |eta: f64| -> Result<f64> {
            let g = moved(eta);
            let mut m: f64 = 0.0;
            for p in ends(&base[i]) {
                m = m.max(point_to_geodesic_distance(g.act(p), &deltas[i])?);
            }
            Ok(m)
        };
        let probe = 1e-3 * (-seg_len * 0.5).exp();
        let s0 = stray(probe)?;
        if s0 <= 0.0 {
            return Err(GeomError::HypothesisViolated("perturbation does not move the line".into()));
        }
        let mut eta = 0.5 * omega * probe / s0;
        while stray(eta)? >= omega {
            eta *= 0.5;
        }
        drift[i] = stray(eta)?;
        lines[i] = moved(eta).act_geodesic(&deltas[i]);
    }

    let (f1, _) = perpendicular_frame(&lines[0], &lines[1])?;
    let (f2, _) = perpendicular_frame(&lines[1], &lines[0])?;
    // sliding X₁ by t swings ζ₁ by about t·e^{sep/2} at the far end, so the
    // step shrinks until the perpendiculars are within ω of each other
    let mut step = omega * 0.25;
    for _ in 0..80 {
        let place = |f: &Frame, i: usize| {
            right_act(f, &gen_a(c(draw.slide[i] * step, draw.turn[i] * step) * 0.5))
        };
        let x = [place(&f1, 0), place(&f2, 1)];
        // both perpendiculars run from the first segment towards the second, as
        // consecutive sides of the degenerate hexagon in `quad_solve`
        let zeta = [x[0].normal_geodesic(), x[1].normal_geodesic().reversed()];
        let zeta_defect = complex_distance(&zeta[0], &zeta[1])?.dist(ComplexLength::from_parts(0.0, PI));
        if zeta_defect < omega {
            return Ok(FootSample {
                omega,
                drift,
                zeta_defect,
                dist: [0, 1].map(|i| x[i].point().distance(&feet[i])),
            });
        }
        step *= 0.5;
    }
    Err(GeomError::HypothesisViolated("perpendiculars never within ω of opposite".into()))
}
