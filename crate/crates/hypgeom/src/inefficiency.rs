//! Inefficiency of angles and of short detours, and the closure prediction
//! for tame continuous cycles.
//!
//! For a continuous cycle s₁…s₂ₘ whose odd segments are long, the closed
//! geodesic has complex length close to Σ 𝐥(sᵢ) − Σ (I_l + i·I_φ)(dᵢ), where
//! 2dᵢ is the complex length of the i-th even segment.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::moebius::{wrap_angle, ComplexLength, C};
use crate::segment::{closed_length, total, FramedCycle};

/// I(θ) = 2·ln sec(θ/2).
pub fn angle_inefficiency(theta: f64) -> Result<f64> {
    if !(0.0..PI).contains(&theta) {
        return Err(GeomError::OutOfRange(format!("angle {theta} not in [0, π)")));
    }
    Ok(-2.0 * (theta / 2.0).cos().ln())
}

/// I_l(d) + i·I_φ(d) with I_l(d) = Re 2d − 2 ln|sinh d| and I_φ(d) = Im 2d − 2 Arg sinh d.
pub fn complex_inefficiency(d: C) -> Result<C> {
    let s = d.sinh();
    if d.norm() == 0.0 || s.norm() < 1e-300 {
        return Err(GeomError::ZeroDetour);
    }
    Ok(C::new(2.0 * d.re - 2.0 * s.norm().ln(), 2.0 * d.im - 2.0 * s.arg()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosurePrediction {
    pub actual: ComplexLength,
    pub predicted: ComplexLength,
    pub residual_length: f64,
    /// distance from 0 in R/2πZ, in [0, π]
    pub residual_phase: f64,
}

impl ClosurePrediction {
    fn compare(actual: ComplexLength, predicted: C) -> Self {
        let predicted = ComplexLength::new(predicted);
        ClosurePrediction {
            actual,
            predicted,
            residual_length: (actual.re() - predicted.re()).abs(),
            residual_phase: wrap_angle(actual.im() - predicted.im()).abs(),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_length.max(self.residual_phase)
    }
}

/// Sum-of-inefficiencies prediction for a continuous cycle with an even number of segments.
pub fn predict_closure(cy: &FramedCycle) -> Result<ClosurePrediction> {
    if !cy.is_continuous() {
        return Err(GeomError::NotContinuous("joints must all be (π/2, 0)".into()));
    }
    if cy.len() % 2 != 0 {
        return Err(GeomError::NotContinuous(format!("odd segment count {}", cy.len())));
    }
    let actual = closed_length(cy)?;
    let mut predicted = total(cy.segments.iter().copied());
    for w in cy.segments.iter().skip(1).step_by(2) {
        predicted -= complex_inefficiency(w.value() * 0.5)?;
    }
    Ok(ClosurePrediction::compare(actual, predicted))
}

/// Angle form for consecutive cycles: length Σ l − Σ I(θᵢ), phase Σ φ.
///
/// Every joint must have ψ = 0 and bending angle in [0, π).
pub fn predict_angle_closure(cy: &FramedCycle) -> Result<ClosurePrediction> {
    let actual = closed_length(cy)?;
    let mut predicted = total(cy.segments.iter().copied());
    for j in &cy.joints {
        if j.psi != 0.0 {
            return Err(GeomError::OutOfRange("framing mismatch at joint".into()));
        }
        predicted -= angle_inefficiency(j.theta)?;
    }
    Ok(ClosurePrediction::compare(actual, predicted))
}
