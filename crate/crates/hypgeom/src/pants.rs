//! Pants from cuff half-lengths, shears along a shared cuff, the spinning
//! construction and the integer fit that equalises spun cuff lengths.
//!
//! A pants with half-lengths (h₀, h₁, h₂) is two copies of the right-angled
//! hexagon with alternate sides h₀, h₁, h₂. Positions along cuff i are
//! complex numbers mod (2hᵢ, 2πi) measured from the foot of the orthogeodesic
//! to cuff i+2, with the normal pointing along the orthogeodesic.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::frame::{gen_a, gen_b, perpendicular_frame, right_act, Frame};
use crate::hexagon::Hexagon;
use crate::inefficiency::complex_inefficiency;
use crate::matching::{lattice_norm, TorsorPoint};
use crate::moebius::{wrap_angle, ComplexLength, Geodesic, C};
use crate::segment::{closed_length, length_between, FramedCycle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pants {
    pub hl: [ComplexLength; 3],
    /// d[i] is the orthogeodesic between cuffs i+1 and i+2
    pub d: [ComplexLength; 3],
    /// feet on cuff i of the orthogeodesics to cuffs i+2 and i+1
    pub feet: [[C; 2]; 3],
    /// feet on cuff i of its third connection, one per hexagon
    pub third: [[C; 2]; 3],
}

impl Pants {
    /// The two orthogeodesic feet on cuff i as points of N¹(√Cᵢ). They coincide.
    pub fn foot_torsor(&self, i: usize) -> [TorsorPoint; 2] {
        self.feet[i].map(|z| TorsorPoint::new(z, self.hl[i]))
    }

    /// Hexagon with cuff i first: [hᵢ, d_{i+2}, h_{i+1}, dᵢ, h_{i+2}, d_{i+1}].
    pub fn hexagon(&self, i: usize) -> Hexagon {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        Hexagon {
            sides: [self.hl[i], self.d[k], self.hl[j], self.d[i], self.hl[k], self.d[j]],
        }
    }
}

/// Frames at the starts of the first `k` sides of a hexagon walk from the base frame.
fn walk(sides: &[ComplexLength; 6], k: usize) -> Vec<Frame> {
    let mut f = Frame::base();
    let mut out = vec![f];
    for s in sides.iter().take(k) {
        f = right_act(&f, &(gen_a(s.value() * 0.5) * gen_b(FRAC_PI_2)));
        out.push(f);
    }
    out
}

/// Position along side 0 of the foot of the perpendicular from side 3.
fn opposite_foot(sides: &[ComplexLength; 6]) -> Result<C> {
    let frames = walk(sides, 3);
    let (foot, _) = perpendicular_frame(&Geodesic::vertical(), &frames[3].tangent_geodesic())?;
    let w = length_between(&Frame::base(), &foot)
        .ok_or_else(|| GeomError::HypothesisViolated("perpendicular foot off the cuff".into()))?;
    Ok(w.value() - C::new(0.0, PI))
}

pub fn build_pants(hl1: ComplexLength, hl2: ComplexLength, hl3: ComplexLength) -> Result<Pants> {
    let hl = [hl1, hl2, hl3];
    if let Some(h) = hl.iter().find(|h| h.re() <= 0.0) {
        return Err(GeomError::OutOfRange(format!("cuff half-length {h} must have Re > 0")));
    }
    let hex = Hexagon::from_alternate(hl)?;
    let d = [hex.sides[3], hex.sides[5], hex.sides[1]];
    let mut pants = Pants {
        hl,
        d,
        feet: hl.map(|h| [C::new(0.0, 0.0), h.value()]),
        third: [[C::new(0.0, 0.0); 2]; 3],
    };
    for i in 0..3 {
        let s = pants.hexagon(i).sides;
        let p = opposite_foot(&s)?;
        // the second hexagon is the first walked backwards, starting at the foot towards cuff i+1
        let q = opposite_foot(&[s[0], s[5], s[4], s[3], s[2], s[1]])?;
        pants.third[i] = [p, hl[i].value() + q];
    }
    Ok(pants)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Shears {
    /// short shear in C/(hl·Z + 2πi·Z)
    pub s: TorsorPoint,
    /// long shear, each mod (2hl, 2πi)
    pub t1: TorsorPoint,
    pub t2: TorsorPoint,
    /// |t₁ + t₂ − 2s| in C/(2hl·Z + 2πi·Z)
    pub gap: f64,
}

/// Shears between `p1` and `p2` glued along cuff `cuff.0` of p1 and `cuff.1` of p2.
///
/// `offset` is the position on the cuff, in p1's coordinates, of p2's first
/// foot. p2 lies on the other side, so it runs along the cuff backwards and
/// its own coordinate u sits at offset − u.
pub fn shears(p1: &Pants, p2: &Pants, cuff: (usize, usize), offset: C) -> Result<Shears> {
    let (i, j) = cuff;
    if i > 2 || j > 2 {
        return Err(GeomError::OutOfRange(format!("cuff index {cuff:?}")));
    }
    let hl = p1.hl[i];
    if hl.dist(p2.hl[j]) > 1e-10 {
        return Err(GeomError::CuffMismatch);
    }
    let h = hl.value();
    let long = ComplexLength::new(h * 2.0);
    let a = p1.feet[i][0];
    let b = offset - p2.feet[j][0];
    let s = TorsorPoint::new(b - a, hl);
    let alpha = p1.third[i];
    let beta = p2.third[j].map(|z| offset - z);
    let t1 = TorsorPoint::new(beta[0] - alpha[0], long);
    let t2 = TorsorPoint::new(beta[1] - alpha[1], long);
    let gap = lattice_norm(t1.value() + t2.value() - s.value() * 2.0, h * 2.0);
    Ok(Shears { s, t1, t2, gap })
}

/// Shear along the side of the ideal triangulation facing cuff j.
pub fn ideal_shear(hl: [ComplexLength; 3], j: usize) -> ComplexLength {
    let v = |k: usize| hl[k % 3].value();
    ComplexLength::new(v(j + 1) + v(j + 2) - v(j))
}

/// Cuff and connection data of a non-separating pants pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinBase {
    /// complex lengths 𝐥(Cᵢ)
    pub cuffs: [ComplexLength; 3],
    /// [𝐥(η_{i,i+1}), 𝐥(η_{i,i−1})]
    pub eta: [[ComplexLength; 2]; 3],
    /// 𝐥(𝔟ᵢ), the orthogeodesic crossing P₂
    pub b: [ComplexLength; 3],
    /// 𝐥(𝔡ᵢ), the orthogeodesic crossing P₁ backwards
    pub d: [ComplexLength; 3],
}

impl SpinBase {
    /// Two copies of `p` glued with short shear `shear[k]` along cuff k.
    pub fn from_pants(p: &Pants, shear: [C; 3]) -> Self {
        SpinBase {
            cuffs: p.hl.map(|h| ComplexLength::new(h.value() * 2.0)),
            eta: std::array::from_fn(|i| [shear[(i + 1) % 3], shear[(i + 2) % 3]].map(ComplexLength::new)),
            b: p.d,
            d: p.d,
        }
    }

    /// All cuffs of half-length ln(2+√3), zero shear.
    pub fn regular() -> Self {
        let h = ComplexLength::from_parts((2.0 + 3f64.sqrt()).ln(), 0.0);
        let p = build_pants(h, h, h).expect("regular pants");
        Self::from_pants(&p, [C::new(0.0, 0.0); 3])
    }

    /// σᵢ = 𝐥(η_{i,i+1}) + 𝐥(η_{i,i−1}) + 𝐥(𝔟ᵢ) + 𝐥(𝔡ᵢ) − I(𝐥(𝔟ᵢ)/2) − I(𝐥(𝔡ᵢ)/2).
    pub fn sigma(&self, i: usize) -> Result<C> {
        let (b, d) = (self.b[i].value(), self.d[i].value());
        Ok(self.eta[i][0].value() + self.eta[i][1].value() + b + d
            - complex_inefficiency(b * 0.5)?
            - complex_inefficiency(d * 0.5)?)
    }

    pub fn sigmas(&self) -> Result<[C; 3]> {
        Ok([self.sigma(0)?, self.sigma(1)?, self.sigma(2)?])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSpec {
    pub base: SpinBase,
    pub n: [u32; 3],
}

impl SpinSpec {
    pub fn new(base: SpinBase, n: [u32; 3]) -> Result<Self> {
        if n.contains(&0) {
            return Err(GeomError::OutOfRange(format!("spin counts {n:?} must be positive")));
        }
        Ok(SpinSpec { base, n })
    }

    /// The continuous cycle 𝔞ᵢ𝔟ᵢ𝔠ᵢ𝔡ᵢ spinning n_{i+1} times around C_{i+1}
    /// and n_{i−1} times around C_{i−1}.
    pub fn cycle(&self, i: usize) -> FramedCycle {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let b = &self.base;
        let a = b.eta[i][0].value() + b.cuffs[j].value() * self.n[j] as f64;
        let c = b.eta[i][1].value() + b.cuffs[k].value() * self.n[k] as f64;
        FramedCycle::continuous(vec![ComplexLength::new(a), b.b[i], ComplexLength::new(c), b.d[i]])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinPrediction {
    pub actual: ComplexLength,
    pub predicted: ComplexLength,
    pub residual: f64,
}

pub fn spin_prediction(spec: &SpinSpec, i: usize) -> Result<SpinPrediction> {
    let actual = closed_length(&spec.cycle(i))?;
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    let b = &spec.base;
    let predicted = b.cuffs[j].value() * spec.n[j] as f64 + b.cuffs[k].value() * spec.n[k] as f64 + b.sigma(i)?;
    let diff = actual.value() - predicted;
    Ok(SpinPrediction {
        actual,
        predicted: ComplexLength::new(predicted),
        residual: diff.re.hypot(wrap_angle(diff.im)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeFit {
    pub n: [u32; 3],
    /// the common target R′ for Re(nᵢ𝐥(Cᵢ) − σᵢ)
    pub r_prime: f64,
    /// 2R = Σ Re nᵢ𝐥(Cᵢ) − R′
    pub r: f64,
    pub errors: [f64; 3],
    pub m1: f64,
}

impl LatticeFit {
    pub fn max_error(&self) -> f64 {
        self.errors.into_iter().fold(0.0, f64::max)
    }
}

const FIT_TOL: f64 = 1e-9;

/// Exhaustive search for nᵢ ≥ 1 with Re(nᵢ𝐥(Cᵢ) − σᵢ) all close to a common R′.
///
/// R′ ranges over [R′₀, R′₀ + 2·max Re 𝐥(Cᵢ)] with R′₀ = max(2R₀ + 2Σ|σᵢ|, 3m₁) + 1
/// and m₁ = max Re 𝐥(Cᵢ)/2 + 1e−9. Ties go to the smaller Σnᵢ.
pub fn lattice_fit(lengths: [ComplexLength; 3], sigmas: [C; 3], r0: f64) -> Result<LatticeFit> {
    if lengths.iter().any(|l| l.re() <= 0.0) || r0 <= 0.0 {
        return Err(GeomError::OutOfRange("lengths and R0 must be positive".into()));
    }
    let re: [f64; 3] = lengths.map(|l| l.re());
    let sre = sigmas.map(|s| s.re);
    let top = re.into_iter().fold(0.0, f64::max);
    let m1 = top / 2.0 + FIT_TOL;
    let lo_r = (2.0 * r0 + 2.0 * sigmas.iter().map(|s| s.norm()).sum::<f64>()).max(3.0 * m1) + 1.0;
    let hi_r = lo_r + 2.0 * top;
    let range = |i: usize| {
        let lo = ((lo_r + sre[i] - m1) / re[i]).floor().max(1.0) as u32;
        let hi = ((hi_r + sre[i] + m1) / re[i]).ceil().max(1.0) as u32;
        lo..=hi
    };
    let mut best: Option<(f64, u32, [u32; 3], f64)> = None;
    for n0 in range(0) {
        for n1 in range(1) {
            for n2 in range(2) {
                let n = [n0, n1, n2];
                let g: [f64; 3] = std::array::from_fn(|i| n[i] as f64 * re[i] - sre[i]);
                let (gmin, gmax) = g.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                let rp = ((gmin + gmax) / 2.0).clamp(lo_r, hi_r);
                let err = g.iter().map(|x| (x - rp).abs()).fold(0.0, f64::max);
                let sum = n0 + n1 + n2;
                let better = match best {
                    None => true,
                    Some((e, s, _, _)) => err < e - 1e-12 || (err <= e + 1e-12 && sum < s),
                };
                if better {
                    best = Some((err, sum, n, rp));
                }
            }
        }
    }
    let (err, _, n, rp) = best.ok_or(GeomError::SearchExhausted)?;
    if err >= m1 {
        return Err(GeomError::SearchExhausted);
    }
    let errors = std::array::from_fn(|i| (n[i] as f64 * re[i] - sre[i] - rp).abs());
    let total: f64 = (0..3).map(|i| n[i] as f64 * re[i]).sum();
    Ok(LatticeFit {
        n,
        r_prime: rp,
        r: (total - rp) / 2.0,
        errors,
        m1,
    })
}

/// Half-lengths and shears of a pants decomposition with the spin counts and R that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub hl: [ComplexLength; 3],
    pub shears: [ComplexLength; 3],
    pub n: [u32; 3],
    #[serde(rename = "R")]
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodnessReport {
    /// δ − |hlᵢ − R|, positive when good
    pub hl_margins: [f64; 3],
    /// distance of Re sᵢ inside the band, positive when inside
    pub shear_margins: [f64; 3],
    pub pass: bool,
}

pub fn goodness_check(decomp: &Decomposition, r: f64, delta: f64, band: (f64, f64)) -> GoodnessReport {
    let hl_margins = decomp.hl.map(|h| delta - (h.value() - r).norm());
    let shear_margins = decomp.shears.map(|s| (s.re() - band.0).min(band.1 - s.re()));
    let pass = hl_margins.iter().chain(&shear_margins).all(|m| *m > 0.0);
    GoodnessReport {
        hl_margins,
        shear_margins,
        pass,
    }
}

/// Output of [`spin_decomposition`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpunDecomposition {
    pub decomposition: Decomposition,
    pub fit: LatticeFit,
    pub residuals: [f64; 3],
    /// m = m₂ + π with m₂ = (m₁ + √2·ε)/2
    pub m: f64,
}

/// Fit spin counts for `base`, spin, and attach ideal-triangulation shears.
///
/// `eps` is the spin residual allowance entering m₂.
pub fn spin_decomposition(base: &SpinBase, r0: f64, eps: f64) -> Result<SpunDecomposition> {
    let fit = lattice_fit(base.cuffs, base.sigmas()?, r0)?;
    let spec = SpinSpec::new(*base, fit.n)?;
    let mut hl = [ComplexLength::zero(); 3];
    let mut residuals = [0.0; 3];
    for i in 0..3 {
        let p = spin_prediction(&spec, i)?;
        hl[i] = ComplexLength::new(p.actual.value() * 0.5);
        residuals[i] = p.residual;
    }
    let shears = std::array::from_fn(|j| ideal_shear(hl, j));
    let m = (fit.m1 + SQRT_2 * eps) / 2.0 + PI;
    Ok(SpunDecomposition {
        decomposition: Decomposition { hl, shears, n: fit.n, r: fit.r },
        fit,
        residuals,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::gen_b;
    use crate::hexagon::acosh;
    use crate::moebius::Isometry;
    use crate::sampling::rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn cl(re: f64, im: f64) -> ComplexLength {
        ComplexLength::from_parts(re, im)
    }

    fn random_hl<R: Rng>(r: &mut R) -> ComplexLength {
        cl(r.gen_range(0.3..4.0), r.gen_range(-1.2..1.2))
    }

    /// cos/sinh closure word on the hexagon of cuff i, as a plain product.
    fn hexagon_word(p: &Pants) -> Isometry {
        let s = [p.hl[0], p.d[2], p.hl[1], p.d[0], p.hl[2], p.d[1]];
        s.iter()
            .fold(Isometry::identity(), |m, w| m * gen_a(w.value() * 0.5) * gen_b(FRAC_PI_2))
    }

    fn wrapped(z: C) -> f64 {
        z.re.hypot(wrap_angle(z.im))
    }

    #[test]
    fn regular_pants() {
        let t = (2.0 + 3f64.sqrt()).ln();
        let p = build_pants(cl(t, 0.0), cl(t, 0.0), cl(t, 0.0)).unwrap();
        for d in p.d {
            assert!(d.dist(cl(t, 0.0)) < 1e-12, "{d}");
        }
        // third connection feet at the midpoints by symmetry
        for i in 0..3 {
            assert!(wrapped(p.third[i][0] - t / 2.0) < 1e-9, "{:?}", p.third[i]);
            assert!(wrapped(p.third[i][1] - 1.5 * t) < 1e-9);
        }
    }

    #[test]
    fn fuchsian_pants_have_real_seams() {
        let mut r = rng(1);
        for _ in 0..200 {
            let hl: [ComplexLength; 3] = std::array::from_fn(|_| cl(r.gen_range(0.2..5.0), 0.0));
            let p = build_pants(hl[0], hl[1], hl[2]).unwrap();
            for i in 0..3 {
                assert!(p.d[i].im().abs() < 1e-9 && p.d[i].re() > 0.0);
                let (a, b, c) = (hl[i].re(), hl[(i + 1) % 3].re(), hl[(i + 2) % 3].re());
                let want = ((b.cosh() * c.cosh() + a.cosh()) / (b.sinh() * c.sinh())).acosh();
                assert!((p.d[i].re() - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn random_pants_close() {
        let mut r = rng(2);
        for _ in 0..1000 {
            let p = build_pants(random_hl(&mut r), random_hl(&mut r), random_hl(&mut r)).unwrap();
            let w = hexagon_word(&p);
            assert!(w.approx_eq(&Isometry::identity(), 1e-9), "{:?}", p);
            for i in 0..3 {
                let s = p.hexagon(i).sides;
                assert!(p.hexagon(i).closure_defect() < 1e-9);
                let back = Hexagon { sides: [s[0], s[5], s[4], s[3], s[2], s[1]] };
                assert!(back.closure_defect() < 1e-9 && back.max_residual() < 1e-10);
                let h = p.hl.map(|x| x.value());
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                let lhs = p.d[i].value().cosh();
                let rhs = (h[j].cosh() * h[k].cosh() + h[i].cosh()) / (h[j].sinh() * h[k].sinh());
                assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
            }
        }
    }

    #[test]
    fn rejects_nonpositive_cuffs() {
        assert!(build_pants(cl(0.0, 1.0), cl(1.0, 0.0), cl(1.0, 0.0)).is_err());
    }

    #[test]
    fn measured_feet_differ_by_half_length() {
        // the feet on cuff 0 are the feet of its common perpendiculars with cuffs 1 and 2
        let mut r = rng(3);
        for _ in 0..300 {
            let p = build_pants(random_hl(&mut r), random_hl(&mut r), random_hl(&mut r)).unwrap();
            let sides = p.hexagon(0).sides;
            let frames = walk(&sides, 4);
            let cuff0 = Geodesic::vertical();
            let (to2, d1) = perpendicular_frame(&cuff0, &frames[4].tangent_geodesic()).unwrap();
            let (to1, d2) = perpendicular_frame(&cuff0, &frames[2].tangent_geodesic()).unwrap();
            assert!((d1 - p.d[1].re()).abs() < 1e-9 && (d2 - p.d[2].re()).abs() < 1e-9);
            let gap = length_between(&to2, &to1).unwrap();
            assert!(wrapped(gap.value() - p.hl[0].value()) < 1e-9, "{gap} vs {}", p.hl[0]);
            let start = length_between(&Frame::base(), &to2).unwrap();
            assert!(wrapped(start.value() - C::new(0.0, PI)) < 1e-9);
            let [u, v] = p.foot_torsor(0);
            assert!(u.dist(&v) < 1e-12);
        }
    }

    #[test]
    fn third_feet_split_the_cuff() {
        // the two hexagons cut each cuff at p and hl + (hl − p)
        let mut r = rng(4);
        for _ in 0..300 {
            let p = build_pants(random_hl(&mut r), random_hl(&mut r), random_hl(&mut r)).unwrap();
            for i in 0..3 {
                let [x, y] = p.third[i];
                assert!(wrapped(x + y - p.hl[i].value() * 2.0) < 1e-8, "{x} {y} {}", p.hl[i]);
            }
        }
    }

    #[test]
    fn shear_examples() {
        let p = build_pants(cl(2.0, 0.3), cl(2.5, -0.2), cl(3.0, 0.0)).unwrap();
        let s = shears(&p, &p, (0, 0), C::new(0.0, 0.0)).unwrap();
        assert!(s.s.value().norm() < 1e-12);
        let s = shears(&p, &p, (1, 1), p.hl[1].value()).unwrap();
        assert!(s.s.dist(&TorsorPoint::new(C::new(0.0, 0.0), p.hl[1])) < 1e-12);
        let q = build_pants(cl(2.0, 0.3), cl(1.0, 0.0), cl(1.0, 0.0)).unwrap();
        assert!(shears(&p, &q, (0, 0), C::new(0.5, 0.0)).is_ok());
        assert_eq!(shears(&p, &q, (1, 1), C::new(0.5, 0.0)), Err(GeomError::CuffMismatch));
    }

    #[test]
    fn ideal_shear_examples() {
        let r = 12.0;
        let hl = [cl(r, 0.0); 3];
        for j in 0..3 {
            assert!(ideal_shear(hl, j).dist(cl(r, 0.0)) < 1e-12);
        }
        let m = 0.7;
        let hl = [cl(r - m, 0.1), cl(r, -0.2), cl(r + m, 0.3)];
        for j in 0..3 {
            let s = ideal_shear(hl, j).re();
            assert!(r - 3.0 * m < s && s < r + 3.0 * m);
        }
        assert!((ideal_shear(hl, 0).re() - (r + 2.0 * m)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_detours_carry_no_inefficiency() {
        let mut base = SpinBase::regular();
        base.b = [cl(0.0, PI); 3];
        base.d = [cl(0.0, PI); 3];
        for i in 0..3 {
            let s = base.sigma(i).unwrap();
            let eta = base.eta[i][0].value() + base.eta[i][1].value();
            assert!(wrapped(s - eta) < 1e-12);
        }
    }

    #[test]
    fn regular_spin_residuals() {
        let base = SpinBase::regular();
        for n in [20, 25, 40] {
            let spec = SpinSpec::new(base, [n; 3]).unwrap();
            for i in 0..3 {
                let p = spin_prediction(&spec, i).unwrap();
                assert!(p.residual < SQRT_2 * 1e-3, "n = {n}: {:?}", p);
            }
        }
        assert!(SpinSpec::new(base, [0, 1, 1]).is_err());
    }

    /// Least-squares slope of ln residual against n.
    fn decay_slope(base: &SpinBase, ns: std::ops::RangeInclusive<u32>) -> f64 {
        let pts: Vec<(f64, f64)> = ns
            .map(|n| {
                let p = spin_prediction(&SpinSpec::new(*base, [n; 3]).unwrap(), 0).unwrap();
                (n as f64, p.residual.ln())
            })
            .collect();
        let k = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn spin_residual_decays_at_cuff_length_rate() {
        // the leading error is e^{−Re 𝐥(C)} per extra turn, twice the half-length
        let base = SpinBase::regular();
        let slope = decay_slope(&base, 2..=8);
        let cuff = base.cuffs[0].re();
        assert!((slope + cuff).abs() < 0.2 * cuff, "slope {slope}, cuff {cuff}");
    }

    #[test]
    fn spin_residual_decreases_on_random_bases() {
        let mut r = rng(5);
        for _ in 0..50 {
            let p = build_pants(cl(r.gen_range(0.8..1.6), r.gen_range(-0.3..0.3)), cl(r.gen_range(0.8..1.6), 0.0), cl(r.gen_range(0.8..1.6), 0.2)).unwrap();
            let shear: [C; 3] = std::array::from_fn(|_| C::new(r.gen_range(0.0..1.0), r.gen_range(-1.0..1.0)));
            let base = SpinBase::from_pants(&p, shear);
            let n0: u32 = r.gen_range(3..8);
            for i in 0..3 {
                let a = spin_prediction(&SpinSpec::new(base, [n0; 3]).unwrap(), i).unwrap();
                let b = spin_prediction(&SpinSpec::new(base, [n0 + 5; 3]).unwrap(), i).unwrap();
                assert!(b.residual < a.residual || b.residual < 1e-12, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn lattice_exact_point() {
        let f = lattice_fit([cl(2.0, 0.0); 3], [C::new(0.0, 0.0); 3], 40.0).unwrap();
        // R′ must exceed 2R₀ + 1 = 81; the first exact lattice point is 82
        assert_eq!(f.n, [41, 41, 41]);
        assert!((f.r_prime - 82.0).abs() < 1e-12 && f.max_error() < 1e-12);
        assert!((f.r - 82.0).abs() < 1e-12);
    }

    /// Independent brute force over nᵢ ∈ [1, 200] with R′ on a fine grid.
    fn brute_force_error(re: [f64; 3], lo: f64, hi: f64) -> f64 {
        let mut best = f64::INFINITY;
        let mut rp = lo;
        while rp <= hi {
            let e = re
                .iter()
                .map(|l| (1..=200).map(|n| (n as f64 * l - rp).abs()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            best = best.min(e);
            rp += 1e-3;
        }
        best
    }

    #[test]
    fn lattice_fit_within_m1() {
        let lengths = [cl(2.0, 0.0), cl(2.1, 0.4), cl(2.3, -1.0)];
        let f = lattice_fit(lengths, [C::new(0.0, 0.0); 3], 40.0).unwrap();
        assert!((f.m1 - 1.15).abs() < 1e-8);
        assert!(f.errors.iter().all(|e| *e < 1.15), "{f:?}");
        let oracle = brute_force_error([2.0, 2.1, 2.3], 81.0, 81.0 + 4.6);
        assert!(f.max_error() <= oracle + 1e-3, "{} vs {oracle}", f.max_error());
        for i in 0..3 {
            let g = f.n[i] as f64 * lengths[i].re();
            assert!(((g - f.r_prime).abs() - f.errors[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_fit_errors() {
        assert!(lattice_fit([cl(0.0, 0.0), cl(1.0, 0.0), cl(1.0, 0.0)], [C::new(0.0, 0.0); 3], 1.0).is_err());
        assert!(lattice_fit([cl(1.0, 0.0); 3], [C::new(0.0, 0.0); 3], 0.0).is_err());
    }

    #[test]
    fn goodness_examples() {
        let r = 10.0;
        let d = Decomposition {
            hl: [cl(r, 0.0); 3],
            shears: [cl(r, 0.0); 3],
            n: [1, 1, 1],
            r,
        };
        let band = (r - 1.0, r + 1.0);
        assert!(goodness_check(&d, r, 0.1, band).pass);
        let mut bad = d.clone();
        bad.shears[1] = cl(band.1 + 0.1, 0.0);
        let rep = goodness_check(&bad, r, 0.1, band);
        assert!(!rep.pass);
        assert!(rep.shear_margins[1] < 0.0 && rep.shear_margins[0] > 0.0 && rep.shear_margins[2] > 0.0);
        let json = serde_json::to_value(&d).unwrap();
        assert!(json.get("R").is_some() && json["hl"].as_array().unwrap().len() == 3);
    }

    #[test]
    fn spun_decompositions_are_good() {
        let mut r = rng(6);
        for seed in 0..20 {
            let base = if seed == 0 {
                SpinBase::regular()
            } else {
                let p = build_pants(random_hl(&mut r), random_hl(&mut r), random_hl(&mut r)).unwrap();
                let shear: [C; 3] = std::array::from_fn(|_| C::new(r.gen_range(0.0..1.0), r.gen_range(-1.0..1.0)));
                SpinBase::from_pants(&p, shear)
            };
            let out = spin_decomposition(&base, 40.0, 1e-3).unwrap();
            let d = &out.decomposition;
            assert!(d.r > 40.0);
            assert!(out.residuals.iter().all(|x| *x < SQRT_2 * 1e-3), "{:?}", out.residuals);
            let m = out.m;
            let rep = goodness_check(d, d.r, m, (d.r - 4.0 * m, d.r + 4.0 * m));
            assert!(rep.pass, "seed {seed}: {rep:?}");
            // real half-lengths within m₂ of R
            for h in d.hl {
                assert!((h.re() - d.r).abs() < m - PI);
            }
        }
    }

    #[test]
    fn acosh_matches_for_seams() {
        let t = (2.0 + 3f64.sqrt()).ln();
        // cosh d = t/(t − 1) with t = cosh hl = 2
        assert!((acosh(C::new(2.0, 0.0)) - C::new(t, 0.0)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn long_shears_sum_to_twice_short(
            h in (0.3f64..4.0, -1.2f64..1.2),
            o1 in (0.3f64..4.0, -1.2f64..1.2),
            o2 in (0.3f64..4.0, -1.2f64..1.2),
            o3 in (0.3f64..4.0, -1.2f64..1.2),
            o4 in (0.3f64..4.0, -1.2f64..1.2),
            off in (-10.0f64..10.0, -4.0f64..4.0),
        ) {
            let k = cl(h.0, h.1);
            let p1 = build_pants(k, cl(o1.0, o1.1), cl(o2.0, o2.1)).unwrap();
            let p2 = build_pants(cl(o3.0, o3.1), k, cl(o4.0, o4.1)).unwrap();
            let s = shears(&p1, &p2, (0, 1), C::new(off.0, off.1)).unwrap();
            prop_assert!(s.gap < 1e-8, "{:?}", s);
        }

        #[test]
        fn ideal_shears_sum_to_half_lengths(
            a in (0.1f64..20.0, -3.0f64..3.0),
            b in (0.1f64..20.0, -3.0f64..3.0),
            c in (0.1f64..20.0, -3.0f64..3.0),
        ) {
            let hl = [cl(a.0, a.1), cl(b.0, b.1), cl(c.0, c.1)];
            let sum: C = (0..3).map(|j| ideal_shear(hl, j).value()).sum();
            let want: C = hl.iter().map(|h| h.value()).sum();
            prop_assert!(wrapped(sum - want) < 1e-12);
        }
    }
}
