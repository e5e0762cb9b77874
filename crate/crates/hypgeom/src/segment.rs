//! Framed segments and cycles of framed segments.
//!
//! A segment is stored intrinsically: its complex length w (length plus
//! phase) and, when it needs to be placed in H³, a start frame. The
//! terminal frame is start·A(w/2). A cycle is a list of segment lengths
//! with a joint after each segment; joint (θ, ψ) is realized as A(iψ/2)·B(θ),
//! so a continuous cycle has every joint equal to (π/2, 0).

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::frame::{gen_a, gen_b, right_act, Frame};
use crate::moebius::{c, half_length, ComplexLength, Isometry, C};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FramedSegment {
    pub start: Frame,
    pub w: ComplexLength,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    Reverse,
    Flip,
    ReverseFlip,
}

impl FramedSegment {
    pub fn new(start: Frame, w: ComplexLength) -> Result<Self> {
        if w.re() < 0.0 {
            return Err(GeomError::OutOfRange(format!("segment length {} < 0", w.re())));
        }
        Ok(FramedSegment { start, w })
    }

    pub fn terminal(&self) -> Frame {
        right_act(&self.start, &gen_a(self.w.value() * 0.5))
    }

    /// Complex length read off the two end frames.
    pub fn measured_length(&self) -> Option<ComplexLength> {
        length_between(&self.start, &self.terminal())
    }
}

/// If v = u·A(w/2), return w (mod 2πi); None when u⁻¹v is not diagonal.
pub fn length_between(u: &Frame, v: &Frame) -> Option<ComplexLength> {
    let g = u.0.inverse() * v.0;
    let scale = g.frobenius();
    if (g.b().norm() + g.c().norm()) > 1e-9 * scale {
        return None;
    }
    Some(ComplexLength::new(g.a().ln() * 2.0))
}

/// Orientation reversal and framing flip.
pub fn transform(s: &FramedSegment, kind: Transform) -> FramedSegment {
    let half_turn = gen_a(c(0.0, FRAC_PI_2));
    match kind {
        Transform::Flip => FramedSegment {
            start: right_act(&s.start, &half_turn),
            w: s.w,
        },
        // start at the old terminal point, tangent reversed, same normal
        Transform::Reverse => FramedSegment {
            start: right_act(&s.terminal(), &(gen_b(PI) * half_turn)),
            w: s.w,
        },
        Transform::ReverseFlip => transform(&transform(s, Transform::Flip), Transform::Reverse),
    }
}

/// Joint rotation between consecutive segments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Joint {
    pub theta: f64,
    pub psi: f64,
}

impl Joint {
    pub const CONTINUOUS: Joint = Joint {
        theta: FRAC_PI_2,
        psi: 0.0,
    };

    pub fn new(theta: f64, psi: f64) -> Self {
        Joint { theta, psi }
    }

    pub fn isometry(&self) -> Isometry {
        gen_a(c(0.0, self.psi * 0.5)) * gen_b(self.theta)
    }

    pub fn is_continuous(&self) -> bool {
        (self.theta - FRAC_PI_2).abs() <= 1e-12 && self.psi.abs() <= 1e-12
    }
}

impl From<[f64; 2]> for Joint {
    fn from(v: [f64; 2]) -> Self {
        Joint::new(v[0], v[1])
    }
}

impl From<Joint> for [f64; 2] {
    fn from(j: Joint) -> Self {
        [j.theta, j.psi]
    }
}

/// Closed cycle of framed segments: segment i is followed by joint i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramedCycle {
    pub segments: Vec<ComplexLength>,
    pub joints: Vec<Joint>,
}

impl FramedCycle {
    pub fn new(segments: Vec<ComplexLength>, joints: Vec<Joint>) -> Result<Self> {
        if segments.is_empty() {
            return Err(GeomError::OutOfRange("cycle needs at least one segment".into()));
        }
        if segments.len() != joints.len() {
            return Err(GeomError::OutOfRange(format!(
                "{} segments but {} joints",
                segments.len(),
                joints.len()
            )));
        }
        Ok(FramedCycle { segments, joints })
    }

    /// Continuous cycle: every joint is a right angle with matching framings.
    pub fn continuous(segments: Vec<ComplexLength>) -> Self {
        let n = segments.len();
        FramedCycle {
            segments,
            joints: vec![Joint::CONTINUOUS; n],
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn is_continuous(&self) -> bool {
        self.joints.iter().all(Joint::is_continuous)
    }

    /// Cyclic rotation by k places.
    pub fn rotated(&self, k: usize) -> Self {
        let n = self.len();
        FramedCycle {
            segments: (0..n).map(|i| self.segments[(i + k) % n]).collect(),
            joints: (0..n).map(|i| self.joints[(i + k) % n]).collect(),
        }
    }

    /// Start frames of every segment, and the frame reached after the last joint.
    pub fn frames(&self, start: Frame) -> Vec<Frame> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut f = start;
        out.push(f);
        for (w, j) in self.segments.iter().zip(&self.joints) {
            f = right_act(&f, &(gen_a(w.value() * 0.5) * j.isometry()));
            out.push(f);
        }
        out
    }
}

/// ∏ A(w_i/2)·A(iψ_i/2)·B(θ_i).
pub fn cycle_holonomy(cy: &FramedCycle) -> Isometry {
    let mut g = Isometry::identity();
    for (w, j) in cy.segments.iter().zip(&cy.joints) {
        g = g * gen_a(w.value() * 0.5) * j.isometry();
    }
    g
}

/// Complex length of the closed geodesic freely homotopic to the cycle.
pub fn closed_length(cy: &FramedCycle) -> Result<ComplexLength> {
    let hl = half_length(&cycle_holonomy(cy)).map_err(|_| GeomError::NotClosable)?;
    Ok(ComplexLength::new(hl.value() * 2.0))
}

/// Thresholds for the tameness conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TameParams {
    pub l: f64,
    pub d: f64,
    pub delta: f64,
    pub theta: f64,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TamenessReport {
    /// every segment longer than 2L and every bending angle below θ
    pub l_theta: bool,
    /// continuous, even count, long odd segments, short even segments with bounded log|sinh|
    pub l_d_delta: bool,
    /// continuous 4-cycle with long odd segments and even segments within 2ε of iπ
    pub zigzag: bool,
    /// per-segment failures, as (index, reason)
    pub failures: Vec<(usize, String)>,
}

/// Evaluate the (L,θ), (L,d,Δ) and (L,ε)-zigzag conditions.
pub fn tameness_check(cy: &FramedCycle, p: &TameParams) -> TamenessReport {
    let mut failures = Vec::new();
    let long = |w: &ComplexLength| w.re() > 2.0 * p.l;

    let mut l_theta = true;
    for (i, (w, j)) in cy.segments.iter().zip(&cy.joints).enumerate() {
        if !long(w) {
            l_theta = false;
            failures.push((i, format!("length {} <= 2L", w.re())));
        }
        if j.theta >= p.theta {
            l_theta = false;
            failures.push((i, format!("bending angle {} >= theta", j.theta)));
        }
    }

    let continuous = cy.is_continuous();
    let even = cy.len() % 2 == 0;
    let mut l_d_delta = continuous && even;
    let mut zigzag = continuous && cy.len() == 4;
    for (i, w) in cy.segments.iter().enumerate() {
        if i % 2 == 0 {
            if !long(w) {
                l_d_delta = false;
                zigzag = false;
            }
        } else {
            if w.re() > 2.0 * p.d {
                l_d_delta = false;
                failures.push((i, format!("detour length {} > 2d", w.re())));
            }
            let s = (w.value() * 0.5).sinh().norm();
            if !(s > 0.0 && s.ln().abs() <= p.delta) {
                l_d_delta = false;
                failures.push((i, format!("|ln|sinh(w/2)|| exceeds delta ({s})")));
            }
            if (w.value() - c(0.0, PI)).norm() >= 2.0 * p.eps {
                zigzag = false;
            }
        }
    }
    TamenessReport {
        l_theta,
        l_d_delta,
        zigzag,
        failures,
    }
}

/// Lengths of the segments of a cycle as complex numbers (unnormalized sum helper).
pub(crate) fn total(ws: impl IntoIterator<Item = ComplexLength>) -> C {
    ws.into_iter().map(|w| w.value()).sum()
}
