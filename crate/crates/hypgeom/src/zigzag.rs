//! Zigzag cycles: two long segments joined by two detours of complex length close to iπ.
//!
//! A zigzag is described by its half-lengths with the detours offset by iπ/2:
//! l₁ = hl(s₁), l₂ = hl(s₂) − iπ/2, l₃ = hl(s₃), l₄ = hl(s₄) − iπ/2. Its holonomy is
//! A(l₁)B(π/2)A(l₂ + iπ/2)B(π/2)A(l₃)B(π/2)A(l₄ + iπ/2)B(π/2).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::frame::Frame;
use crate::moebius::{
    axis, canonicalize, dominant_root, fixed_points_hom, half_length, point_to_geodesic_distance, sinh_dist_origin,
    ComplexLength, HPoint, Isometry, IsometryKind, C,
};
use crate::segment::{cycle_holonomy, FramedCycle};

/// Entries (a, b, c, d) of the holonomy in closed form.
pub fn zigzag_entries(l: [ComplexLength; 4]) -> [C; 4] {
    let [l1, l2, l3, l4] = l.map(|x| x.value());
    let (e1, e3) = (l1.exp(), l3.exp());
    let (f1, f3) = (1.0 / e1, 1.0 / e3);
    let (c2, s2, c4, s4) = (l2.cosh(), l2.sinh(), l4.cosh(), l4.sinh());
    [
        e1 * (e3 * c2 * c4 - f3 * s2 * s4),
        e1 * (e3 * c2 * s4 - f3 * s2 * c4),
        f1 * (f3 * c2 * s4 - e3 * s2 * c4),
        f1 * (f3 * c2 * c4 - e3 * s2 * s4),
    ]
}

pub fn zigzag_holonomy(l1: ComplexLength, l2: ComplexLength, l3: ComplexLength, l4: ComplexLength) -> Isometry {
    let [a, b, c, d] = zigzag_entries([l1, l2, l3, l4]);
    Isometry::from_sl2(a, b, c, d)
}

/// The continuous cycle with segments 2l₁, 2l₂ + iπ, 2l₃, 2l₄ + iπ.
pub fn zigzag_cycle(l: [ComplexLength; 4]) -> FramedCycle {
    let ipi = ComplexLength::from_parts(0.0, PI);
    FramedCycle::continuous(vec![
        l[0].scale(2.0),
        l[1].scale(2.0) + ipi,
        l[2].scale(2.0),
        l[3].scale(2.0) + ipi,
    ])
}

/// Distance from the start of s₁, the point (0,1), to the axis of the holonomy.
///
/// sinh D = |1 + z₁·conj(z₂)| / |z₁ − z₂| with z₁, z₂ the fixed points.
pub fn zigzag_axis_distance(l1: ComplexLength, l2: ComplexLength, l3: ComplexLength, l4: ComplexLength) -> Result<f64> {
    let [a, b, c, d] = zigzag_entries([l1, l2, l3, l4]);
    if Isometry::from_sl2(a, b, c, d).classify() != IsometryKind::Loxodromic {
        return Err(GeomError::NotClosable);
    }
    let lam = dominant_root(a + d);
    let (rep, att) = fixed_points_hom(a, b, c, d, lam);
    Ok(sinh_dist_origin(att, rep).asinh())
}

/// Distances from the four joints to the axis.
///
/// Entry k is the start of segment k + 1. The start of s₃ is the same formula
/// with the cycle rotated. The other two joints end a long segment, and are
/// handled by reading the cycle backwards.
pub fn zigzag_joint_distances(l: [ComplexLength; 4]) -> Result<[f64; 4]> {
    let [l1, l2, l3, l4] = l;
    Ok([
        zigzag_axis_distance(l1, l2, l3, l4)?,
        zigzag_axis_distance(l1, l4, l3, l2)?,
        zigzag_axis_distance(l3, l4, l1, l2)?,
        zigzag_axis_distance(l3, l2, l1, l4)?,
    ])
}

/// Quantities used in the distance estimate: |b| + |c| + 2, |(a+d)² − 4| and sinh D.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ZigzagTerms {
    pub b_plus_c: f64,
    pub trace_gap: f64,
    pub sinh_d: f64,
}

pub fn zigzag_terms(l: [ComplexLength; 4]) -> Result<ZigzagTerms> {
    let [a, b, c, d] = zigzag_entries(l);
    let tr = a + d;
    Ok(ZigzagTerms {
        b_plus_c: b.norm() + c.norm() + 2.0,
        trace_gap: (tr * tr - 4.0).norm(),
        sinh_d: zigzag_axis_distance(l[0], l[1], l[2], l[3])?.sinh(),
    })
}

/// (48ε + 8e^{−2L}, B·e^{−R/2}).
pub fn zigzag_bounds(l: f64, eps: f64, r: f64, b: f64) -> Result<(f64, f64)> {
    if !(l > 0.0 && r > 0.0) {
        return Err(GeomError::OutOfRange(format!("L = {l}, R = {r} must be positive")));
    }
    Ok((48.0 * eps + 8.0 * (-2.0 * l).exp(), b * (-r / 2.0).exp()))
}

/// Distance from `q` to the segment of length `len` leaving the frame `g` along its tangent.
fn segment_distance(q: HPoint, g: &Isometry, len: f64) -> f64 {
    let p = g.inverse().act(q);
    let s = (p.z.norm_sqr() + p.t * p.t).sqrt().ln().clamp(0.0, len);
    p.distance(&HPoint::new(C::new(0.0, 0.0), s.exp()))
}

/// Sampled Hausdorff distance between the broken path of a cycle and the axis of its holonomy.
///
/// Each segment and one period of the axis are cut into `n` equal pieces.
/// Distances from sample points to the other set are exact: to the axis by the
/// closed formula, to the path by projecting onto each segment of the
/// neighbouring periods. Refining n → 2n only adds samples, so the estimate
/// can only grow.
pub fn hausdorff_oracle(cy: &FramedCycle, n: usize) -> Result<f64> {
    let n = n.max(1);
    let x = cycle_holonomy(cy);
    let ax = axis(&x).map_err(|_| GeomError::NotClosable)?;
    let hl = half_length(&x).map_err(|_| GeomError::NotClosable)?;
    let frames = cy.frames(Frame::base());
    let lens: Vec<f64> = cy.segments.iter().map(|w| w.re()).collect();
    if lens.iter().any(|l| *l < 0.0) {
        return Err(GeomError::OutOfRange("segment of negative length".into()));
    }

    let mut path_to_axis: f64 = 0.0;
    for (f, len) in frames.iter().zip(&lens) {
        for j in 0..=n {
            let s = len * j as f64 / n as f64;
            let p = f.matrix().act(HPoint::new(C::new(0.0, 0.0), s.exp()));
            path_to_axis = path_to_axis.max(point_to_geodesic_distance(p, &ax)?);
        }
    }

    // axis straightened to the vertical line, starting level with the first joint
    let (pn, pd) = ax.rep.hom();
    let (qn, qd) = ax.att.hom();
    let t = canonicalize([[pd, -pn], [qd, -qn]])?;
    let a0 = t.act(HPoint::origin());
    let h0 = (a0.z.norm_sqr() + a0.t * a0.t).sqrt().ln();
    let period = 2.0 * hl.re();
    let back = t.inverse();
    let xinv = x.inverse();
    let mut lifted = Vec::new();
    for g in [xinv, Isometry::identity(), x] {
        for (f, len) in frames.iter().zip(&lens) {
            lifted.push((g * f.matrix(), *len));
        }
    }
    let mut axis_to_path: f64 = 0.0;
    for j in 0..=n {
        let u = h0 + period * j as f64 / n as f64;
        let q = back.act(HPoint::new(C::new(0.0, 0.0), u.exp()));
        let d = lifted
            .iter()
            .map(|(g, len)| segment_distance(q, g, *len))
            .fold(f64::INFINITY, f64::min);
        axis_to_path = axis_to_path.max(d);
    }
    Ok(path_to_axis.max(axis_to_path))
}
