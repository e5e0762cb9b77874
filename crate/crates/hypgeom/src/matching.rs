//! The unit-normal torsor of a cuff, matching of feet and assembly of pants.
//!
//! Unit normals to a closed geodesic γ modulo translation by 𝐡𝐥(γ) form the
//! torus N¹(√γ) = C/(𝐡𝐥·Z + 2πi·Z). Feet of good pants along γ live there.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::moebius::{wrap_angle, ComplexLength, C};
use crate::pants::Pants;
use crate::sampling::rng;

/// A point of C/(hl·Z + 2πi·Z), stored in [0, Re hl) × (−π, π].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsorPoint {
    value: ComplexLength,
    modulus: ComplexLength,
}

impl TorsorPoint {
    /// Panics if Re hl ≤ 0.
    pub fn new(z: C, hl: ComplexLength) -> Self {
        assert!(hl.re() > 0.0, "torsor modulus must have positive real part");
        TorsorPoint {
            value: ComplexLength::new(reduce(z, hl.value())),
            modulus: hl,
        }
    }

    pub fn value(&self) -> C {
        self.value.value()
    }

    pub fn modulus(&self) -> ComplexLength {
        self.modulus
    }

    pub fn shift(&self, s: C) -> Self {
        TorsorPoint::new(self.value() + s, self.modulus)
    }

    /// Quotient distance min over the lattice of |v − w − λ|.
    pub fn dist(&self, o: &TorsorPoint) -> f64 {
        lattice_norm(self.value() - o.value(), self.modulus.value())
    }
}

fn reduce(z: C, hl: C) -> C {
    let k = (z.re / hl.re).floor();
    let mut w = z - hl * k;
    if w.re >= hl.re {
        w -= hl;
    }
    if w.re < 0.0 {
        w += hl;
    }
    C::new(w.re.max(0.0), wrap_angle(w.im))
}

/// min over λ ∈ hl·Z + 2πi·Z of |z − λ|.
pub fn lattice_norm(z: C, hl: C) -> f64 {
    lattice_rep(z, hl).norm()
}

/// The representative z − λ of least modulus, λ ∈ hl·Z + 2πi·Z.
pub fn lattice_rep(z: C, hl: C) -> C {
    let w = reduce(z, hl);
    // for a fixed multiple of hl the best multiple of 2πi is the rounding of Im
    let span = (PI / hl.re).ceil() as i64 + 1;
    (-span..=span + 1)
        .map(|a| {
            let v = w - hl * a as f64;
            C::new(v.re, wrap_angle(v.im))
        })
        .min_by(|x, y| x.norm().total_cmp(&y.norm()))
        .expect("nonempty range")
}

/// Measure of the torsor, Re hl · 2π.
pub fn torsor_area(hl: ComplexLength) -> f64 {
    hl.re() * TAU
}

/// τ(v) = v + iπ + s.
pub fn tau_shift(v: &TorsorPoint, s: C) -> TorsorPoint {
    v.shift(C::new(0.0, PI) + s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Foot {
    pub point: TorsorPoint,
    /// +1 if the pants induces the curve's orientation on its cuff, −1 otherwise
    pub orientation: i8,
    pub pants_id: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FootSet {
    pub hl: ComplexLength,
    pub feet: Vec<Foot>,
}

#[derive(Serialize, Deserialize)]
struct FootRow {
    value_re: f64,
    value_im: f64,
    orientation: i8,
    pants_id: usize,
}

impl FootSet {
    pub fn new(hl: ComplexLength, feet: Vec<Foot>) -> Result<Self> {
        if feet.iter().any(|f| f.point.modulus() != hl) {
            return Err(GeomError::OutOfRange("feet on different torsors".into()));
        }
        if feet.iter().any(|f| f.orientation.abs() != 1) {
            return Err(GeomError::OutOfRange("orientation must be ±1".into()));
        }
        Ok(FootSet { hl, feet })
    }

    pub fn positive(&self) -> Vec<usize> {
        (0..self.feet.len()).filter(|&i| self.feet[i].orientation > 0).collect()
    }

    pub fn negative(&self) -> Vec<usize> {
        (0..self.feet.len()).filter(|&i| self.feet[i].orientation < 0).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for f in &self.feet {
            let v = f.point.value();
            out.serialize(FootRow {
                value_re: v.re,
                value_im: v.im,
                orientation: f.orientation,
                pants_id: f.pants_id,
            })
            .map_err(io_err)?;
        }
        out.flush().map_err(|e| GeomError::Io(e.to_string()))
    }

    /// The CSV carries no modulus, so it is passed in.
    pub fn read_csv<R: std::io::Read>(r: R, hl: ComplexLength) -> Result<Self> {
        let mut feet = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize::<FootRow>() {
            let row = row.map_err(io_err)?;
            feet.push(Foot {
                point: TorsorPoint::new(C::new(row.value_re, row.value_im), hl),
                orientation: row.orientation,
                pants_id: row.pants_id,
            });
        }
        FootSet::new(hl, feet)
    }
}

fn io_err(e: csv::Error) -> GeomError {
    GeomError::Io(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleMode {
    Uniform,
    /// n/2 points v with partners τ(v) + δ, |δ| < jitter
    TauSymmetric { s: C, jitter: f64 },
}

fn uniform_point<R: Rng>(r: &mut R, hl: ComplexLength) -> TorsorPoint {
    TorsorPoint::new(C::new(r.gen_range(0.0..hl.re()), r.gen_range(-PI..PI)), hl)
}

pub fn sample_feet(n: usize, hl: ComplexLength, mode: SampleMode, seed: u64) -> Result<FootSet> {
    if n == 0 {
        return Err(GeomError::OutOfRange("empty foot set".into()));
    }
    let mut r = rng(seed);
    let feet = match mode {
        SampleMode::Uniform => (0..n)
            .map(|i| Foot {
                point: uniform_point(&mut r, hl),
                orientation: if r.gen_bool(0.5) { 1 } else { -1 },
                pants_id: i,
            })
            .collect(),
        SampleMode::TauSymmetric { s, jitter } => {
            if n % 2 == 1 {
                return Err(GeomError::OddCount(n));
            }
            let mut feet = Vec::with_capacity(n);
            for k in 0..n / 2 {
                let v = uniform_point(&mut r, hl);
                // radius strictly below jitter
                let delta = C::from_polar(jitter * r.gen_range(0.0f64..1.0).sqrt(), r.gen_range(-PI..PI));
                feet.push(Foot { point: v, orientation: 1, pants_id: 2 * k });
                feet.push(Foot {
                    point: tau_shift(&v, s).shift(delta),
                    orientation: -1,
                    pants_id: 2 * k + 1,
                });
            }
            feet
        }
    };
    FootSet::new(hl, feet)
}

/// A perfect matching of positive to negative feet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Matching {
    /// (positive foot, negative foot) as indices into the foot set
    pub pairs: Vec<(usize, usize)>,
    /// torsor distance from the negative foot to τ of the positive foot
    pub errors: Vec<f64>,
}

/// Bipartite graph between positive and negative feet; edge iff d(foot⁻, τ(foot⁺)) < tol.
fn adjacency(fs: &FootSet, pos: &[usize], neg: &[usize], s: C, tol: f64) -> Vec<Vec<usize>> {
    pos.iter()
        .map(|&p| {
            let t = tau_shift(&fs.feet[p].point, s);
            (0..neg.len()).filter(|&j| fs.feet[neg[j]].point.dist(&t) < tol).collect()
        })
        .collect()
}

fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
    for &v in &adj[u] {
        if !seen[v] {
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
    }
    false
}

/// Left vertices reachable from `start` by alternating paths: a Hall-deficient set
/// when `start` is unmatched in a maximum matching.
fn alternating_reach(start: usize, adj: &[Vec<usize>], owner: &[Option<usize>]) -> Vec<usize> {
    let mut left = vec![false; adj.len()];
    let mut right = vec![false; owner.len()];
    let mut stack = vec![start];
    left[start] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !right[v] {
                right[v] = true;
                if let Some(w) = owner[v] {
                    if !left[w] {
                        left[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
    }
    (0..adj.len()).filter(|&u| left[u]).collect()
}

fn transpose(adj: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    let mut t = vec![Vec::new(); n];
    for (u, vs) in adj.iter().enumerate() {
        for &v in vs {
            t[v].push(u);
        }
    }
    t
}

/// Maximum matching by augmenting paths. Without a perfect matching, returns
/// Infeasible whose witness S (foot indices, all of one orientation) has
/// fewer than |S| neighbours.
pub fn match_feet(fs: &FootSet, s: C, tol: f64) -> Result<Matching> {
    if tol <= 0.0 {
        return Err(GeomError::OutOfRange(format!("tolerance {tol} must be positive")));
    }
    let (pos, neg) = (fs.positive(), fs.negative());
    let adj = adjacency(fs, &pos, &neg, s, tol);
    let mut owner = vec![None; neg.len()];
    let mut free = None;
    for u in 0..pos.len() {
        let mut seen = vec![false; neg.len()];
        if !augment(u, &adj, &mut seen, &mut owner) && free.is_none() {
            free = Some(u);
        }
    }
    if let Some(u) = free {
        let witness = alternating_reach(u, &adj, &owner).into_iter().map(|i| pos[i]).collect();
        return Err(GeomError::Infeasible { curve: 0, witness });
    }
    if let Some(v) = owner.iter().position(|o| o.is_none()) {
        // every positive foot is matched, so the surplus is on the negative side
        let back = transpose(&adj, neg.len());
        let mut mate = vec![None; pos.len()];
        for (j, o) in owner.iter().enumerate() {
            if let Some(i) = o {
                mate[*i] = Some(j);
            }
        }
        let witness = alternating_reach(v, &back, &mate).into_iter().map(|j| neg[j]).collect();
        return Err(GeomError::Infeasible { curve: 0, witness });
    }
    let mut pairs: Vec<(usize, usize)> = owner
        .iter()
        .enumerate()
        .map(|(j, o)| (pos[o.expect("perfect")], neg[j]))
        .collect();
    pairs.sort_unstable();
    let errors = pairs
        .iter()
        .map(|&(p, q)| fs.feet[q].point.dist(&tau_shift(&fs.feet[p].point, s)))
        .collect();
    Ok(Matching { pairs, errors })
}

/// Axis-aligned rectangle [x, x+w] × [y, y+h] in torsor coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// Cut a rectangle into pieces inside the fundamental domain [0, Re hl) × [−π, π).
fn unfold(r: &Rect, hl: C) -> Vec<Rect> {
    let width = hl.re;
    let (w, h) = (r.w.min(width), r.h.min(TAU));
    let k = (r.x / width).floor();
    let (x, y) = (r.x - k * width, r.y - k * hl.im);
    let mut cols = vec![(x, y, w.min(width - x))];
    if x + w > width {
        // the part past the seam re-enters shifted by −hl
        cols.push((0.0, y - hl.im, x + w - width));
    }
    let mut out = Vec::new();
    for (x, y, w) in cols {
        let y0 = (y + PI).rem_euclid(TAU) - PI;
        out.push(Rect { x, y: y0, w, h: h.min(PI - y0) });
        if y0 + h > PI {
            out.push(Rect { x, y: -PI, w, h: y0 + h - PI });
        }
    }
    out
}

/// Exact area of a union of rectangles in the plane, by sweeping over x.
fn union_area(rs: &[Rect]) -> f64 {
    let mut xs: Vec<f64> = rs.iter().flat_map(|r| [r.x, r.x + r.w]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut area = 0.0;
    for win in xs.windows(2) {
        let mid = 0.5 * (win[0] + win[1]);
        let mut ys: Vec<(f64, f64)> = rs
            .iter()
            .filter(|r| r.x <= mid && mid < r.x + r.w)
            .map(|r| (r.y, r.y + r.h))
            .collect();
        ys.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cover = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        for (a, b) in ys {
            cur = match cur {
                Some((c, d)) if a <= d => Some((c, d.max(b))),
                Some((c, d)) => {
                    cover += d - c;
                    Some((a, b))
                }
                None => Some((a, b)),
            };
        }
        if let Some((c, d)) = cur {
            cover += d - c;
        }
        area += cover * (win[1] - win[0]);
    }
    area
}

/// Area of a union of rectangles on the torsor C/(hl·Z + 2πi·Z).
pub fn torus_area(rs: &[Rect], hl: ComplexLength) -> f64 {
    let pieces: Vec<Rect> = rs.iter().flat_map(|r| unfold(r, hl.value())).collect();
    union_area(&pieces)
}

/// Sup-metric η-neighbourhood of a rectangle.
pub fn expand(r: &Rect, eta: f64) -> Rect {
    Rect {
        x: r.x - eta,
        y: r.y - eta,
        w: r.w + 2.0 * eta,
        h: r.h + 2.0 * eta,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Growth {
    pub ratio: f64,
    /// 1 + η/(2R̄)
    pub bound: f64,
    pub holds: bool,
}

/// |N_η(A)|/|A| for a union A of rectangles, against 1 + η/(2R̄).
pub fn neighborhood_growth(rects: &[Rect], hl: ComplexLength, eta: f64, rbar: f64) -> Result<Growth> {
    if rects.is_empty() || eta <= 0.0 || rbar <= 0.0 || rects.iter().any(|r| r.w <= 0.0 || r.h <= 0.0) {
        return Err(GeomError::OutOfRange("need nonempty rectangles, η > 0, R̄ > 0".into()));
    }
    let grown: Vec<Rect> = rects.iter().map(|r| expand(r, eta)).collect();
    let outer = torus_area(&grown, hl);
    if outer > 0.5 * torsor_area(hl) {
        return Err(GeomError::NotApplicable);
    }
    let ratio = outer / torus_area(rects, hl);
    let bound = 1.0 + eta / (2.0 * rbar);
    Ok(Growth {
        ratio,
        bound,
        holds: ratio > bound,
    })
}

/// A pants of the pool with its foot on each curve; cuff k lies on curve k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolPants {
    pub pants: Pants,
    pub feet: [TorsorPoint; 3],
    pub orientation: [i8; 3],
}

impl PoolPants {
    /// The oppositely oriented copy: coordinates along each cuff reverse, so v ↦ −v.
    pub fn reversed(&self) -> Self {
        PoolPants {
            pants: self.pants.clone(),
            feet: self.feet.map(|f| TorsorPoint::new(-f.value(), f.modulus())),
            orientation: self.orientation.map(|o| -o),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssembledPants {
    /// index into the pool
    pub source: usize,
    pub reversed: bool,
    pub pants: PoolPants,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gluing {
    pub a: usize,
    pub cuff_a: usize,
    pub b: usize,
    pub cuff_b: usize,
    pub shear: C,
    pub curve: usize,
    /// d(foot_b, τ(foot_a)) in the torsor
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assembly {
    #[serde(rename = "nodes")]
    pub pants: Vec<AssembledPants>,
    #[serde(rename = "edges")]
    pub gluings: Vec<Gluing>,
}

impl Assembly {
    /// Every cuff glued once, glued cuffs agree, orientations are opposite and
    /// every gluing is within `tol` of its shear.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let mut seen = vec![[0u8; 3]; self.pants.len()];
        let bad = |m: String| Err(GeomError::HypothesisViolated(m));
        for g in &self.gluings {
            let (Some(pa), Some(pb)) = (self.pants.get(g.a), self.pants.get(g.b)) else {
                return bad(format!("gluing {g:?} names a missing pants"));
            };
            if g.cuff_a > 2 || g.cuff_b > 2 {
                return bad(format!("gluing {g:?} names a missing cuff"));
            }
            seen[g.a][g.cuff_a] += 1;
            seen[g.b][g.cuff_b] += 1;
            if pa.pants.pants.hl[g.cuff_a].dist(pb.pants.pants.hl[g.cuff_b]) > tol {
                return bad(format!("cuff lengths differ at {g:?}"));
            }
            if pa.pants.orientation[g.cuff_a] != -pb.pants.orientation[g.cuff_b] {
                return bad(format!("orientations agree at {g:?}"));
            }
            let err = pb.pants.feet[g.cuff_b].dist(&tau_shift(&pa.pants.feet[g.cuff_a], g.shear));
            if err >= tol || (err - g.error).abs() > 1e-12 {
                return bad(format!("gluing error {err:e} at {g:?}"));
            }
        }
        if let Some(i) = seen.iter().position(|c| c.iter().any(|&k| k != 1)) {
            return bad(format!("pants {i} has cuff gluing counts {:?}", seen[i]));
        }
        Ok(())
    }
}

/// Doubling trick: each pool pants and its reversed copy enter, so each curve
/// carries as many positive as negative feet. The feet on curve k are matched
/// with shear `shears[k]` and matched cuffs are glued.
pub fn assemble(pool: &[PoolPants], shears: [C; 3], tol: f64) -> Result<Assembly> {
    let pants: Vec<AssembledPants> = pool
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            [
                AssembledPants { source: i, reversed: false, pants: p.clone() },
                AssembledPants { source: i, reversed: true, pants: p.reversed() },
            ]
        })
        .collect();
    let mut gluings = Vec::new();
    for (k, &s) in shears.iter().enumerate() {
        let Some(first) = pants.first() else { break };
        let hl = first.pants.feet[k].modulus();
        let feet = pants
            .iter()
            .enumerate()
            .map(|(c, p)| Foot {
                point: p.pants.feet[k],
                orientation: p.pants.orientation[k],
                pants_id: c,
            })
            .collect();
        let fs = FootSet::new(hl, feet)?;
        let m = match_feet(&fs, s, tol).map_err(|e| match e {
            GeomError::Infeasible { witness, .. } => GeomError::Infeasible { curve: k, witness },
            e => e,
        })?;
        for (&(p, q), &error) in m.pairs.iter().zip(&m.errors) {
            gluings.push(Gluing {
                a: fs.feet[p].pants_id,
                cuff_a: k,
                b: fs.feet[q].pants_id,
                cuff_b: k,
                shear: s,
                curve: k,
                error,
            });
        }
    }
    let asm = Assembly { pants, gluings };
    asm.validate(tol)?;
    Ok(asm)
}

/// One pants whose doubling is a perfect closed assembly: its feet sit at −(iπ + sₖ)/2.
pub fn perfect_pool(pants: &Pants, shears: [C; 3]) -> Vec<PoolPants> {
    vec![PoolPants {
        pants: pants.clone(),
        feet: std::array::from_fn(|k| TorsorPoint::new(-(C::new(0.0, PI) + shears[k]) * 0.5, pants.hl[k])),
        orientation: [1; 3],
    }]
}

/// Pool whose foot on curve k is foot j of `sets[k]`, all sets of equal size.
pub fn pool_from_feet(pants: &Pants, sets: &[FootSet; 3]) -> Result<Vec<PoolPants>> {
    let n = sets[0].feet.len();
    if sets.iter().any(|s| s.feet.len() != n) {
        return Err(GeomError::OutOfRange("foot sets of different sizes".into()));
    }
    for k in 0..3 {
        if sets[k].hl.dist(pants.hl[k]) > 1e-12 {
            return Err(GeomError::CuffMismatch);
        }
    }
    Ok((0..n)
        .map(|j| PoolPants {
            pants: pants.clone(),
            feet: std::array::from_fn(|k| sets[k].feet[j].point),
            orientation: std::array::from_fn(|k| sets[k].feet[j].orientation),
        })
        .collect())
}
