//! Frame distortion: the product estimate for conjugated translations,
//! homologous transport along sequences of geodesics, and the comparison of
//! an assembly with its perfect model.
//!
//! Frame distances use the Frobenius quasi-metric of [`isometry_size`]:
//! d(u, v) = min ‖u⁻¹v ∓ I‖.
//!
//! In this module a frame sits *on* a geodesic γ when its normal geodesic is
//! γ. Then X(a) = A(a/2) moves the frame a distance a along its tangent (off
//! γ) and Y(b) moves it a distance b along γ.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::frame::{gen_a, gen_b, isometry_size, perpendicular_frame, Frame};
use crate::matching::{lattice_rep, tau_shift, Assembly, AssembledPants, Gluing};
use crate::moebius::{c, complex_distance, wrap_angle, ComplexLength, Geodesic, Isometry, C};
use crate::pants::{build_pants, Pants};
use crate::sampling::{angle, rng};

/// Plain 2×2 complex matrix. Sums of SL(2,C) elements leave the group, and
/// products must not pick up the PSL sign normalisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        Mat2([[o, z], [z, o]])
    }

    pub fn zero() -> Self {
        Mat2([[c(0.0, 0.0); 2]; 2])
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2(std::array::from_fn(|i| {
            std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j])
        }))
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] - o.0[i][j])))
    }

    pub fn det(&self) -> C {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        let f = self.frobenius().powi(2);
        let d = self.det().norm();
        ((f + (f * f - 4.0 * d * d).max(0.0).sqrt()) / 2.0).sqrt()
    }
}

/// X(t) = exp(t·diag(½, −½)).
pub fn x_mat(t: C) -> Mat2 {
    let z = c(0.0, 0.0);
    Mat2([[(t * 0.5).exp(), z], [z, (-t * 0.5).exp()]])
}

/// θ(s) = exp(s·[[0, −½], [½, 0]]).
pub fn theta_mat(s: f64) -> Mat2 {
    let (sn, cs) = (s / 2.0).sin_cos();
    Mat2([[c(cs, 0.0), c(-sn, 0.0)], [c(sn, 0.0), c(cs, 0.0)]])
}

/// Y(t) = θ(π/2)X(t)θ(−π/2), in closed form.
pub fn y_mat(t: C) -> Mat2 {
    let (ch, sh) = ((t * 0.5).cosh(), (t * 0.5).sinh());
    Mat2([[ch, sh], [sh, ch]])
}

fn conj_term(a: C, b: C) -> Mat2 {
    y_mat(b).mul(&x_mat(a)).mul(&y_mat(-b))
}

/// Inputs of the product estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductInputs {
    pub a: Vec<C>,
    pub b: Vec<C>,
    pub a2: Vec<C>,
    pub b2: Vec<C>,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProductEstimate {
    /// ‖∏ Y(bᵢ)X(aᵢ)Y(−bᵢ) − ∏ Y(b′ᵢ)X(a′ᵢ)Y(−b′ᵢ)‖
    pub lhs: f64,
    /// the same with sums in place of products
    pub sum_lhs: f64,
    /// 12·e^{A+2B}·B·ε
    pub bound: f64,
    pub product_holds: bool,
    pub sum_holds: bool,
}

/// Checks the hypotheses of the estimate, naming the first that fails.
pub fn check_hypotheses(p: &ProductInputs) -> Result<()> {
    let bad = |m: String| Err(GeomError::HypothesisViolated(m));
    let n = p.a.len();
    if n == 0 || p.b.len() != n || p.a2.len() != n || p.b2.len() != n {
        return bad("sequences must be nonempty and of equal length".into());
    }
    if !(p.big_a > 0.0 && p.big_b > 0.0 && p.eps > 0.0) {
        return bad("A, B and ε must be positive".into());
    }
    if !(p.eps < (1.0 / p.big_a).min(1.0 / p.big_b)) {
        return bad(format!("ε = {} is not below min(1/A, 1/B)", p.eps));
    }
    let total: f64 = p.a.iter().zip(&p.b).map(|(a, b)| a.norm() * b.norm().exp()).sum();
    if !(total <= p.big_b) {
        return bad(format!("Σ|aᵢ|e^|bᵢ| = {total} exceeds B = {}", p.big_b));
    }
    for i in 0..n {
        let lhs = 2.0 * p.a[i].norm() * (p.b[i].re.abs() + 1.0).exp();
        if !(lhs <= p.big_a) {
            return bad(format!("condition 1 at i = {i}: 2|aᵢ|e^(|Re bᵢ|+1) = {lhs} > A"));
        }
        if !((p.b[i] - p.b2[i]).norm() < p.eps) {
            return bad(format!("condition 2 at i = {i}: |bᵢ − b′ᵢ| ≥ ε"));
        }
        if !((p.a[i] - p.a2[i]).norm() < p.eps * p.a[i].norm()) {
            return bad(format!("condition 3 at i = {i}: |aᵢ − a′ᵢ| ≥ ε|aᵢ|"));
        }
    }
    Ok(())
}

pub fn product_bound(big_a: f64, big_b: f64, eps: f64) -> f64 {
    12.0 * (big_a + 2.0 * big_b).exp() * big_b * eps
}

pub fn product_estimate(p: &ProductInputs) -> Result<ProductEstimate> {
    check_hypotheses(p)?;
    let (mut prod, mut prod2) = (Mat2::identity(), Mat2::identity());
    let (mut sum, mut sum2) = (Mat2::zero(), Mat2::zero());
    for i in 0..p.a.len() {
        let (t, t2) = (conj_term(p.a[i], p.b[i]), conj_term(p.a2[i], p.b2[i]));
        prod = prod.mul(&t);
        prod2 = prod2.mul(&t2);
        sum = sum.add(&t);
        sum2 = sum2.add(&t2);
    }
    let lhs = prod.sub(&prod2).op_norm();
    let sum_lhs = sum.sub(&sum2).op_norm();
    let bound = product_bound(p.big_a, p.big_b, p.eps);
    Ok(ProductEstimate {
        lhs,
        sum_lhs,
        bound,
        product_holds: lhs <= bound,
        sum_holds: sum_lhs <= bound,
    })
}

/// Random inputs meeting the hypotheses: n ≤ `max_n`, A, B ≤ 2, ε ≤ 10⁻².
pub fn sample_product_inputs<R: Rng>(r: &mut R, max_n: usize) -> ProductInputs {
    let n = r.gen_range(1..=max_n);
    let big_a = r.gen_range(0.1..=2.0);
    let big_b = r.gen_range(0.1..=2.0);
    let eps = 10f64.powf(r.gen_range(-4.0..=-2.0));
    let b: Vec<C> = (0..n).map(|_| c(r.gen_range(-2.0..2.0), angle(r))).collect();
    let raw: Vec<C> = (0..n).map(|_| C::from_polar(r.gen_range(0.1..1.0), angle(r))).collect();
    let total: f64 = raw.iter().zip(&b).map(|(a, b)| a.norm() * b.norm().exp()).sum();
    let per = raw
        .iter()
        .zip(&b)
        .map(|(a, b)| big_a / (2.0 * a.norm() * (b.re.abs() + 1.0).exp()))
        .fold(f64::INFINITY, f64::min);
    let scale = (big_b / total).min(per) * r.gen_range(0.3..0.999);
    let a: Vec<C> = raw.iter().map(|z| z * scale).collect();
    let disc = |r: &mut R| C::from_polar(0.999 * r.gen_range(0.0f64..1.0).sqrt(), angle(r));
    let b2 = b.iter().map(|z| z + disc(r) * eps).collect();
    let a2 = a.iter().map(|z| z * (c(1.0, 0.0) + disc(r) * eps)).collect();
    ProductInputs { a, b, a2, b2, big_a, big_b, eps }
}

/// X(a) as an isometry.
pub fn gen_x(t: C) -> Isometry {
    gen_a(t * 0.5)
}

/// Y(b) as an isometry: translation along the normal geodesic −1 → 1.
pub fn gen_y(t: C) -> Isometry {
    let (ch, sh) = ((t * 0.5).cosh(), (t * 0.5).sinh());
    Isometry::from_sl2(ch, sh, sh, ch)
}

/// t with m = ±X(t), None when m is not diagonal. Im t is folded into (−π, π].
fn x_parameter(m: &Isometry) -> Option<C> {
    if m.b().norm() + m.c().norm() > 1e-7 * m.frobenius() {
        return None;
    }
    let t = m.a().ln() * 2.0;
    Some(c(t.re, wrap_angle(t.im)))
}

fn y_parameter(m: &Isometry) -> Option<C> {
    let r = gen_b(-FRAC_PI_2);
    x_parameter(&(r.inverse() * *m * r))
}

/// A sequence of geodesics with consecutive members disjoint and joined by a
/// common orthogonal ηᵢ.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSequence {
    pub geodesics: Vec<Geodesic>,
    /// frame on γᵢ at the foot of ηᵢ, tangent along ηᵢ
    pub feet: Vec<Frame>,
    /// uᵢ: complex distance from γᵢ to γᵢ₊₁ along ηᵢ
    pub u: Vec<C>,
    /// vᵢ: complex distance along γᵢ from the foot of ηᵢ₋₁ to the foot of ηᵢ;
    /// v₀ and vₙ are undefined and stored as 0
    pub v: Vec<C>,
}

fn not_semi_linear(i: usize, why: &str) -> GeomError {
    GeomError::NotSemiLinear(format!("γ{i}, γ{}: {why}", i + 1))
}

impl GeodesicSequence {
    pub fn new(geodesics: Vec<Geodesic>) -> Result<Self> {
        let n = geodesics.len().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| {
            GeomError::NotSemiLinear("need at least two geodesics".into())
        })?;
        let mut feet = Vec::with_capacity(n);
        let mut arrivals = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        for i in 0..n {
            let (g, h) = (&geodesics[i], &geodesics[i + 1]);
            let (fp, dist) = perpendicular_frame(g, h).map_err(|_| not_semi_linear(i, "shared endpoint"))?;
            if !(dist > 1e-12) {
                return Err(not_semi_linear(i, "geodesics meet"));
            }
            let (fq, _) = perpendicular_frame(h, g).map_err(|_| not_semi_linear(i, "shared endpoint"))?;
            let p = Frame(fp.0 * gen_b(-FRAC_PI_2) * gen_a(c(0.0, FRAC_PI_2)));
            let q = Frame(fq.0 * gen_b(FRAC_PI_2));
            let ui = x_parameter(&(p.0.inverse() * q.0)).ok_or_else(|| not_semi_linear(i, "feet misaligned"))?;
            feet.push(p);
            arrivals.push(q);
            u.push(ui);
        }
        let mut v = vec![c(0.0, 0.0); n + 1];
        for i in 1..n {
            v[i] = y_parameter(&(arrivals[i - 1].0.inverse() * feet[i].0))
                .ok_or_else(|| not_semi_linear(i, "feet not on a common geodesic"))?;
        }
        Ok(GeodesicSequence { geodesics, feet, u, v })
    }

    /// The sequence with the given uᵢ, vᵢ, starting from γ₀ = (−1 → 1) with
    /// η₀ leaving its foot at (0, 1) straight up. `v` has length n + 1 and its
    /// end entries are ignored.
    pub fn from_data(u: &[C], v: &[C]) -> Result<Self> {
        let n = u.len();
        if n == 0 || v.len() != n + 1 {
            return Err(GeomError::OutOfRange(format!("{} values of u need {} of v", n, n + 1)));
        }
        let mut f = Frame::base();
        let mut geodesics = vec![f.normal_geodesic()];
        for i in 0..n {
            f = Frame(f.0 * gen_x(u[i]));
            geodesics.push(f.normal_geodesic());
            if i + 1 < n {
                f = Frame(f.0 * gen_y(v[i + 1]));
            }
        }
        Self::new(geodesics)
    }

    /// Number of gaps n; the sequence has n + 1 geodesics.
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Coplanar with coherent orientations: every uᵢ and vᵢ real.
    pub fn is_linear(&self, tol: f64) -> bool {
        self.u.iter().chain(&self.v).all(|z| z.im.abs() < tol)
    }

    /// b with x0·Y(b) the frame at the foot of η₀.
    pub fn foot_offset(&self, x0: &Frame) -> Result<C> {
        y_parameter(&(x0.0.inverse() * self.feet[0].0))
            .ok_or_else(|| GeomError::HypothesisViolated("start frame is not on γ₀".into()))
    }
}

/// The homologous frames x₀, …, xₙ: xᵢ₊₁ = xᵢ·Y(bᵢ)X(uᵢ)Y(−bᵢ) with bᵢ₊₁ = bᵢ + vᵢ₊₁.
pub fn homologous_frames(seq: &GeodesicSequence, x0: &Frame) -> Result<Vec<Frame>> {
    let mut b = seq.foot_offset(x0)?;
    let mut out = vec![*x0];
    let mut x = *x0;
    for i in 0..seq.len() {
        x = Frame(x.0 * gen_y(b) * gen_x(seq.u[i]) * gen_y(-b));
        out.push(x);
        b += seq.v[i + 1];
    }
    Ok(out)
}

/// e(x0): the frame on γ′₀ at the same offset from the foot of η′₀ as x0 from the foot of η₀.
pub fn corresponding_frame(seq: &GeodesicSequence, seq2: &GeodesicSequence, x0: &Frame) -> Result<Frame> {
    let b = seq.foot_offset(x0)?;
    Ok(Frame(seq2.feet[0].0 * gen_y(-b)))
}

/// d(u→v, u′→v′) = d(u⁻¹v, u′⁻¹v′).
pub fn displacement_gap(u: &Frame, v: &Frame, u2: &Frame, v2: &Frame) -> f64 {
    let g = u.0.inverse() * v.0;
    let h = u2.0.inverse() * v2.0;
    isometry_size(&(g.inverse() * h))
}

pub fn frame_distance(u: &Frame, v: &Frame) -> f64 {
    isometry_size(&(u.0.inverse() * v.0))
}

/// d(x₀→xₙ, x′₀→x′ₙ) under homologous transport on both sequences.
pub fn endpoint_distortion(seq: &GeodesicSequence, seq2: &GeodesicSequence, x0: &Frame, x0p: &Frame) -> Result<f64> {
    if seq.len() != seq2.len() {
        return Err(GeomError::OutOfRange("sequences of different lengths".into()));
    }
    let xs = homologous_frames(seq, x0)?;
    let ys = homologous_frames(seq2, x0p)?;
    Ok(displacement_gap(&xs[0], &xs[seq.len()], &ys[0], &ys[seq.len()]))
}

/// Graph of a frame map on a finite set.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FrameCorrespondence {
    pub pairs: Vec<(Frame, Frame)>,
}

impl FrameCorrespondence {
    /// max d(u→v, e(u)→e(v)) over distinct u, v with d(u, v) < d.
    pub fn distortion(&self, d: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, (u, eu)) in self.pairs.iter().enumerate() {
            for (v, ev) in &self.pairs[i + 1..] {
                if frame_distance(u, v) < d {
                    worst = worst.max(displacement_gap(u, v, eu, ev));
                }
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SequenceParams {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub eps: f64,
    pub b_minus: f64,
    pub b_plus: f64,
    /// quasiconformal constant of the supplied endpoint correspondence; recorded, not checked
    #[serde(rename = "K")]
    pub k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub index: usize,
    /// positive when the condition holds
    pub margin: f64,
    pub pass: bool,
}

fn cond(name: &str, index: usize, margin: f64) -> Condition {
    Condition { name: name.into(), index, margin, pass: margin > 0.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceReport {
    pub well_matched: Vec<Condition>,
    pub related: Vec<Condition>,
    /// the sum bound on the linear sequence, when its hypotheses hold
    pub sum_bound: Option<Condition>,
    pub params: SequenceParams,
}

impl SequenceReport {
    pub fn well_matched_ok(&self) -> bool {
        self.well_matched.iter().all(|c| c.pass)
    }

    pub fn related_ok(&self) -> bool {
        self.related.iter().all(|c| c.pass)
    }
}

fn wrapped_gap(a: C, b: C) -> f64 {
    let d = a - b;
    d.re.hypot(wrap_angle(d.im))
}

/// Well-matched conditions between `seq` and `seq2`, related conditions
/// between `seq` and `seq3`, and the sum bound on `seq3`.
pub fn sequence_checks(
    seq: &GeodesicSequence,
    seq2: &GeodesicSequence,
    seq3: &GeodesicSequence,
    p: &SequenceParams,
) -> Result<SequenceReport> {
    let n = seq.len();
    if seq2.len() != n || seq3.len() != n {
        return Err(GeomError::OutOfRange("sequences of different lengths".into()));
    }
    let er = (p.r / 2.0).exp();
    let band = |x: f64, lo: f64, hi: f64| (x - lo).min(hi - x);
    let mut wm = Vec::new();
    let mut rel = Vec::new();
    for i in 1..n {
        wm.push(cond("re v in (B-, B+)", i, band(seq.v[i].re, p.b_minus, p.b_plus)));
        wm.push(cond(
            "|v' - v| < B- eps / 2R",
            i,
            p.b_minus * p.eps / (2.0 * p.r) - wrapped_gap(seq2.v[i], seq.v[i]),
        ));
    }
    for i in 0..n {
        wm.push(cond("|u| e^(R/2) in (1/B, B)", i, band(seq.u[i].norm() * er, 1.0 / p.b, p.b)));
        wm.push(cond(
            "|u' - u| < eps |u|",
            i,
            p.eps * seq.u[i].norm() - wrapped_gap(seq2.u[i], seq.u[i]),
        ));
        let m = band(seq.u[i].norm() * er, 1.0 / p.b, p.b).min(band(seq3.u[i].norm() * er, 1.0 / p.b, p.b));
        rel.push(cond("|u|, |u''| e^(R/2) in (1/B, B)", i, m));
    }
    for i in 1..n {
        let m = band(seq.v[i].re, p.b_minus, p.b_plus).min(band(seq3.v[i].re, p.b_minus, p.b_plus));
        rel.push(cond("re v, re v'' in (B-, B+)", i, m));
        rel.push(cond("|re v - re v''| < 1/R", i, 1.0 / p.r - (seq.v[i].re - seq3.v[i].re).abs()));
    }
    Ok(SequenceReport {
        well_matched: wm,
        related: rel,
        sum_bound: sum_bound_slack(seq3).map(|s| cond("sum bound", 0, s)),
        params: *p,
    })
}

/// D + 2 ln D − ln u₀ − ln uₙ₋₁ + 3 − |Σ₁ⁿ⁻¹ vᵢ| with D = d(γ₀, γₙ), for a
/// linear sequence with u₀, uₙ₋₁ < 1. None when the bound does not apply.
pub fn sum_bound_slack(seq: &GeodesicSequence) -> Option<f64> {
    let n = seq.len();
    if !seq.is_linear(1e-9) {
        return None;
    }
    let (u0, un) = (seq.u[0].re, seq.u[n - 1].re);
    if !(u0 > 0.0 && u0 < 1.0 && un > 0.0 && un < 1.0) {
        return None;
    }
    let d = complex_distance(&seq.geodesics[0], &seq.geodesics[n]).ok()?.re();
    if !(d > 0.0) {
        return None;
    }
    let sum: f64 = seq.v[1..n].iter().map(|z| z.re).sum();
    Some(d + 2.0 * d.ln() - u0.ln() - un.ln() + 3.0 - sum.abs())
}

/// Distance cutoff used by [`perfect_model_scan`].
pub const DEFAULT_SCAN_DISTANCE: f64 = 10.0;

/// Half-lengths and shears of the perfect model, per curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelTargets {
    pub hl: [ComplexLength; 3],
    pub shears: [C; 3],
}

impl ModelTargets {
    /// The first pants' half-lengths and the shear recorded on each curve.
    pub fn from_assembly(asm: &Assembly) -> Result<Self> {
        let first = asm.pants.first().ok_or_else(|| GeomError::OutOfRange("empty assembly".into()))?;
        let mut shears = [None; 3];
        for g in &asm.gluings {
            shears[g.curve.min(2)].get_or_insert(g.shear);
        }
        let mut out = [c(0.0, 0.0); 3];
        for k in 0..3 {
            out[k] = shears[k].ok_or_else(|| GeomError::OutOfRange(format!("no gluing on curve {k}")))?;
        }
        Ok(ModelTargets { hl: first.pants.pants.hl, shears: out })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelScan {
    pub model: Assembly,
    pub max_distortion: f64,
    /// frame pairs within the cutoff
    pub pairs: usize,
    /// hexagon lifts developed, over all roots
    pub hexagons: usize,
}

/// Compare `asm` with its perfect model, targets taken from the assembly itself.
pub fn perfect_model_scan(asm: &Assembly, d: f64) -> Result<ModelScan> {
    perfect_model_scan_with(asm, &ModelTargets::from_assembly(asm)?, d)
}

/// Develops the universal cover of the perfect model and of `asm` side by
/// side and returns max d(u→v, e(u)→e(v)) over boundary frames u, v with
/// d(u, v) < d in the model. The frames are the corners of the hexagon lifts
/// on the cuffs; e sends each corner of the model to the same corner of `asm`.
pub fn perfect_model_scan_with(asm: &Assembly, targets: &ModelTargets, d: f64) -> Result<ModelScan> {
    let model_pants = build_pants(targets.hl[0], targets.hl[1], targets.hl[2])?;
    let model = model_assembly(asm, &model_pants, targets)?;
    let mgeo = Geometry::new(&model_pants);
    let agoe: Vec<Geometry> = asm.pants.iter().map(|p| Geometry::new(&p.pants.pants)).collect();
    let partner = gluing_table(asm, targets)?;
    let dev = Development { model: &mgeo, actual: &agoe, partner: &partner, d };
    let mut worst: f64 = 0.0;
    let (mut pairs, mut hexagons) = (0, 0);
    for p in 0..asm.pants.len() {
        for odd in [false, true] {
            let (w, n, h) = dev.scan_root(p, odd)?;
            worst = worst.max(w);
            pairs += n;
            hexagons += h;
        }
    }
    Ok(ModelScan { model, max_distortion: worst, pairs, hexagons })
}

/// Perfect pants everywhere, each negative foot moved to τ of its partner.
fn model_assembly(asm: &Assembly, pants: &Pants, t: &ModelTargets) -> Result<Assembly> {
    let mut nodes: Vec<AssembledPants> = asm
        .pants
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.pants.pants = pants.clone();
            q.pants.feet = std::array::from_fn(|k| crate::matching::TorsorPoint::new(p.pants.feet[k].value(), t.hl[k]));
            q
        })
        .collect();
    let mut gluings = Vec::with_capacity(asm.gluings.len());
    for g in &asm.gluings {
        let s = t.shears[g.curve.min(2)];
        let fa = nodes[g.a].pants.feet[g.cuff_a];
        nodes[g.b].pants.feet[g.cuff_b] = tau_shift(&fa, s);
        gluings.push(Gluing { shear: s, error: 0.0, ..*g });
    }
    Ok(Assembly { pants: nodes, gluings })
}

/// For each pants and cuff: the glued pants, its cuff, and the offsets σ
/// (model, actual) of the partner's foot in this pants' cuff coordinate.
type Partner = Vec<[Option<(usize, usize, C, C)>; 3]>;

fn gluing_table(asm: &Assembly, t: &ModelTargets) -> Result<Partner> {
    let mut out: Partner = vec![[None; 3]; asm.pants.len()];
    let ipi = c(0.0, PI);
    for g in &asm.gluings {
        let (fa, fb) = (asm.pants[g.a].pants.feet[g.cuff_a], asm.pants[g.b].pants.feet[g.cuff_b]);
        let delta = lattice_rep(fb.value() - fa.value() - ipi - g.shear, fa.modulus().value());
        let actual = ipi + g.shear + delta;
        let model = ipi + t.shears[g.curve.min(2)];
        out[g.a][g.cuff_a] = Some((g.b, g.cuff_b, model, actual));
        out[g.b][g.cuff_b] = Some((g.a, g.cuff_a, model, actual));
    }
    if let Some(p) = out.iter().position(|r| r.iter().any(Option::is_none)) {
        return Err(GeomError::HypothesisViolated(format!("pants {p} has an unglued cuff")));
    }
    Ok(out)
}

/// Corner frames of one hexagon of a pants and the transforms between them.
///
/// Corner 2k is the start of side k of the walk [h₀, d₂, h₁, d₀, h₂, d₁]
/// (tangent along the side), corner 2k+1 its end. Cuff i is side 2i.
struct Geometry {
    hl: [C; 3],
    /// w[x][y] = C_x⁻¹·C_y, multiplied out along the cheaper way round
    w: Vec<Vec<Isometry>>,
    max_side: f64,
}

impl Geometry {
    fn new(p: &Pants) -> Self {
        let sides = p.hexagon(0).sides;
        let steps: Vec<Isometry> = (0..12)
            .map(|j| if j % 2 == 0 { gen_a(sides[j / 2].value() * 0.5) } else { gen_b(FRAC_PI_2) })
            .collect();
        let cost: Vec<f64> = (0..12).map(|j| if j % 2 == 0 { sides[j / 2].re().abs() } else { 0.0 }).collect();
        let mut w = vec![vec![Isometry::identity(); 12]; 12];
        for x in 0..12 {
            for y in 0..12 {
                let fwd: f64 = (0..(y + 12 - x) % 12).map(|k| cost[(x + k) % 12]).sum();
                let bwd: f64 = (0..(x + 12 - y) % 12).map(|k| cost[(y + k) % 12]).sum();
                w[x][y] = if fwd <= bwd {
                    (0..(y + 12 - x) % 12).fold(Isometry::identity(), |m, k| m * steps[(x + k) % 12])
                } else {
                    (1..=(x + 12 - y) % 12).fold(Isometry::identity(), |m, k| m * steps[(x + 12 - k) % 12].inverse())
                };
            }
        }
        let max_side = sides.iter().map(|s| s.re().abs()).fold(0.0, f64::max);
        Geometry { hl: p.hl.map(|h| h.value()), w, max_side }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Entry {
    Root,
    Seam(usize),
    Cuff(usize),
}

/// A hexagon lift, placed by the frame of one of its corners in both developments.
#[derive(Clone, Copy, Debug)]
struct Node {
    pants: usize,
    corner: usize,
    model: Isometry,
    actual: Isometry,
    odd: bool,
    entry: Entry,
}

struct Development<'a> {
    model: &'a Geometry,
    actual: &'a [Geometry],
    partner: &'a Partner,
    d: f64,
}

const MAX_HEXAGONS: usize = 200_000;

fn flip() -> Isometry {
    gen_b(PI) * gen_a(c(0.0, FRAC_PI_2))
}

impl Development<'_> {
    fn corner(&self, n: &Node, x: usize) -> (Frame, Frame) {
        (
            Frame(n.model * self.model.w[n.corner][x]),
            Frame(n.actual * self.actual[n.pants].w[n.corner][x]),
        )
    }

    /// The six corners on cuff sides.
    fn samples(&self, n: &Node) -> Vec<(Frame, Frame)> {
        (0..3).flat_map(|i| [4 * i, 4 * i + 1]).map(|x| self.corner(n, x)).collect()
    }

    fn cheaper(&self, n: &Node, a: usize, b: usize) -> usize {
        let g = &self.model.w;
        if g[n.corner][a].frobenius() <= g[n.corner][b].frobenius() {
            a
        } else {
            b
        }
    }

    fn children(&self, n: &Node) -> Vec<Node> {
        let mut out = Vec::new();
        let half = gen_a(c(0.0, FRAC_PI_2));
        for k in [1, 3, 5] {
            if n.entry == Entry::Seam(k) {
                continue;
            }
            let e = self.cheaper(n, 2 * k, 2 * k + 1);
            let (m, a) = self.corner(n, e);
            out.push(Node {
                pants: n.pants,
                corner: e,
                model: m.0 * half,
                actual: a.0 * half,
                odd: !n.odd,
                entry: Entry::Seam(k),
            });
        }
        for i in 0..3 {
            let adjacent = matches!(n.entry, Entry::Seam(k) if k == (2 * i + 1) % 6 || k == (2 * i + 5) % 6);
            if adjacent || n.entry == Entry::Cuff(i) {
                continue;
            }
            let (q, j, sm, sa) = self.partner[n.pants][i].expect("checked by gluing_table");
            let e = self.cheaper(n, 4 * i, 4 * i + 1);
            let (fm, fa) = self.corner(n, e);
            let orient = if n.odd { half * flip() } else { half };
            let (km, ka) = (fm.0 * orient, fa.0 * orient);
            let (hm, ha) = (self.model.hl[i], self.actual[n.pants].hl[i]);
            let (hqm, hqa) = (self.model.hl[j], self.actual[q].hl[j]);
            let sign = if n.odd { -1.0 } else { 1.0 };
            let (pm, pa) = if e == 4 * i { (c(0.0, 0.0), c(0.0, 0.0)) } else { (hm * sign, ha * sign) };
            // choose the lift of the partner whose cuff side ends nearest the gate
            let wm = sm - pm;
            let base = (wm.re / (2.0 * hm.re)).round() as i64;
            let mut best = (f64::INFINITY, 0i64, false);
            for m in base - 2..=base + 2 {
                for far in [false, true] {
                    let u = if far { hqm } else { c(0.0, 0.0) };
                    let x = (wm - hm * (2 * m) as f64 - u).re.abs();
                    if x < best.0 {
                        best = (x, m, far);
                    }
                }
            }
            let (_, m, far) = best;
            let place = |k: Isometry, w: C, h: C, hq: C| {
                let u = if far { hq } else { c(0.0, 0.0) };
                k * gen_a((w - h * (2 * m) as f64 - u + c(0.0, PI)) * 0.5) * flip()
            };
            out.push(Node {
                pants: q,
                corner: if far { 4 * j + 1 } else { 4 * j },
                model: place(km, wm, hm, hqm),
                actual: place(ka, sa - pa, ha, hqa),
                odd: false,
                entry: Entry::Cuff(j),
            });
        }
        out
    }

    /// Develops around one root hexagon. Returns (max gap, pair count, hexagon count).
    fn scan_root(&self, p: usize, odd: bool) -> Result<(f64, usize, usize)> {
        let root = if odd {
            let f = self.model.w[0][2];
            let g = self.actual[p].w[0][2];
            let half = gen_a(c(0.0, FRAC_PI_2));
            Node { pants: p, corner: 2, model: f * half, actual: g * half, odd, entry: Entry::Root }
        } else {
            let id = Isometry::identity();
            Node { pants: p, corner: 0, model: id, actual: id, odd, entry: Entry::Root }
        };
        let roots = self.samples(&root);
        let points: Vec<_> = roots.iter().map(|(m, _)| m.point()).collect();
        // ‖g‖² = 2 cosh d(o, g·o), so d(u, v) < D forces the base points within ρ
        let rho = ((self.d + SQRT_2).powi(2) / 2.0).max(1.0).acosh();
        let reach = rho + self.model.max_side / 2.0 + 0.5;
        let near = |n: &Node| {
            (0..12).any(|x| {
                let q = Frame(n.model * self.model.w[n.corner][x]).point();
                points.iter().any(|p| p.distance(&q) <= reach)
            })
        };
        let mut queue = VecDeque::from([root]);
        let mut frames = Vec::new();
        let mut count = 0;
        while let Some(n) = queue.pop_front() {
            count += 1;
            if count > MAX_HEXAGONS {
                return Err(GeomError::SearchExhausted);
            }
            frames.extend(self.samples(&n));
            for ch in self.children(&n) {
                if near(&ch) {
                    queue.push_back(ch);
                }
            }
        }
        let mut worst: f64 = 0.0;
        let mut pairs = 0;
        for (i, (um, ua)) in roots.iter().enumerate() {
            for (j, (vm, va)) in frames.iter().enumerate() {
                if i == j || frame_distance(um, vm) >= self.d {
                    continue;
                }
                pairs += 1;
                worst = worst.max(displacement_gap(um, vm, ua, va));
            }
        }
        Ok((worst, pairs, count))
    }
}

/// Window of admissible cross-ratios: |w| ≤ max_abs, |w| ≥ min_sep, |w − 1| ≥ min_sep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossRatioWindow {
    pub min_sep: f64,
    pub max_abs: f64,
}

impl Default for CrossRatioWindow {
    fn default() -> Self {
        CrossRatioWindow { min_sep: 0.1, max_abs: 10.0 }
    }
}

impl CrossRatioWindow {
    pub fn contains(&self, w: C) -> bool {
        w.norm() <= self.max_abs && w.norm() >= self.min_sep && (w - 1.0).norm() >= self.min_sep
    }
}

/// [z₁, z₂; z₃, z₄] = (z₁ − z₃)(z₂ − z₄) / ((z₁ − z₄)(z₂ − z₃)).
pub fn cross_ratio(z: [C; 4]) -> Result<C> {
    for i in 0..4 {
        for j in i + 1..4 {
            if z[i] == z[j] {
                return Err(GeomError::DegenerateQuadruple);
            }
        }
    }
    Ok((z[0] - z[2]) * (z[1] - z[3]) / ((z[0] - z[3]) * (z[1] - z[2])))
}

/// Quadruples examined exhaustively up to this count; beyond it, sampled.
pub const EXHAUSTIVE_QUADRUPLES: usize = 100_000;

fn quad_gap(pairs: &[(C, C)], ix: [usize; 4], window: &CrossRatioWindow) -> Result<Option<f64>> {
    let w = cross_ratio(ix.map(|i| pairs[i].0))?;
    if !window.contains(w) {
        return Ok(None);
    }
    Ok(Some((cross_ratio(ix.map(|i| pairs[i].1))? - w).norm()))
}

fn check_pairs(pairs: &[(C, C)]) -> Result<()> {
    if pairs.len() < 4 {
        return Err(GeomError::OutOfRange(format!("{} pairs, need at least 4", pairs.len())));
    }
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if pairs[i].0 == pairs[j].0 || pairs[i].1 == pairs[j].1 {
                return Err(GeomError::DegenerateQuadruple);
            }
        }
    }
    Ok(())
}

/// Max cross-ratio displacement over quadruples (i < j < k < l) whose source
/// cross-ratio lies in the window. Exhaustive for small inputs, otherwise
/// sampled with a fixed seed.
pub fn quasisymmetry_defect(pairs: &[(C, C)], window: &CrossRatioWindow) -> Result<f64> {
    check_pairs(pairs)?;
    let n = pairs.len();
    let total = n * (n - 1) * (n - 2) * (n - 3) / 24;
    if total > EXHAUSTIVE_QUADRUPLES {
        return quasisymmetry_defect_sampled(pairs, window, EXHAUSTIVE_QUADRUPLES, 0);
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    if let Some(g) = quad_gap(pairs, [i, j, k, l], window)? {
                        worst = worst.max(g);
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Max displacement over `samples` random ordered quadruples of distinct indices.
pub fn quasisymmetry_defect_sampled(pairs: &[(C, C)], window: &CrossRatioWindow, samples: usize, seed: u64) -> Result<f64> {
    check_pairs(pairs)?;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let ix = sample(&mut r, pairs.len(), 4).into_vec();
        if let Some(g) = quad_gap(pairs, [ix[0], ix[1], ix[2], ix[3]], window)? {
            worst = worst.max(g);
        }
    }
    Ok(worst)
}
