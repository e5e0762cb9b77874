//! Seeded random inputs shared by tests and verification suites.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::moebius::{ComplexLength, C};
use crate::segment::FramedCycle;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn angle<R: Rng>(r: &mut R) -> f64 {
    r.gen_range(-PI..PI)
}

pub fn complex_in<R: Rng>(r: &mut R, re: (f64, f64), im: (f64, f64)) -> C {
    C::new(r.gen_range(re.0..re.1), r.gen_range(im.0..im.1))
}

/// Parameters of a random (L, d, Δ)-tame continuous cycle with 2m segments.
#[derive(Clone, Copy, Debug)]
pub struct TameDraw {
    pub m: usize,
    pub d: f64,
    pub delta: f64,
}

/// Odd segments get length 2L + U[0,2); even segments are drawn with length
/// at most 2d and |ln|sinh(w/2)|| ≤ Δ. The draws do not depend on L, so the
/// same seed at two values of L gives matched cycles.
pub fn tame_cycle<R: Rng>(r: &mut R, p: &TameDraw, l: f64) -> FramedCycle {
    let mut ws = Vec::with_capacity(2 * p.m);
    for _ in 0..p.m {
        let long = ComplexLength::from_parts(2.0 * l + r.gen_range(0.0..2.0), angle(r));
        let short = loop {
            let w = C::new(r.gen_range(0.0..2.0 * p.d), angle(r));
            let s = (w * 0.5).sinh().norm();
            if s > 0.0 && s.ln().abs() <= p.delta {
                break ComplexLength::new(w);
            }
        };
        ws.push(long);
        ws.push(short);
    }
    FramedCycle::continuous(ws)
}

/// Half-lengths (l₁, l₂, l₃, l₄) of a random (L, ε)-zigzag: Re l₁, Re l₃ in
/// (L, L + 1], l₂ and l₄ uniform in the half disc of radius ε with Re ≥ 0
/// (the detours have nonnegative length).
pub fn zigzag_halves<R: Rng>(r: &mut R, l: f64, eps: f64) -> [ComplexLength; 4] {
    let disc = |r: &mut R| C::from_polar(eps * r.gen_range(0.0f64..1.0).sqrt(), angle(r) * 0.5);
    let l1 = ComplexLength::from_parts(l + 1.0 - r.gen_range(0.0..1.0), angle(r));
    let l2 = ComplexLength::new(disc(r));
    let l3 = ComplexLength::from_parts(l + 1.0 - r.gen_range(0.0..1.0), angle(r));
    let l4 = ComplexLength::new(disc(r));
    [l1, l2, l3, l4]
}
