//! The suites. Each trial returns one [`CaseResult`].

use std::f64::consts::{PI, SQRT_2};

use hypgeom::distortion::{perfect_model_scan, product_estimate, sample_product_inputs};
use hypgeom::hexagon::Hexagon;
use hypgeom::inefficiency::predict_closure;
use hypgeom::matching::{assemble, match_feet, pool_from_feet, sample_feet, FootSet, SampleMode};
use hypgeom::moebius::{axis, half_length, point_to_axis_distance, HPoint, IsometryKind};
use hypgeom::pants::{build_pants, goodness_check, spin_decomposition, SpinBase};
use hypgeom::sampling::{complex_in, rng, tame_cycle, zigzag_halves, TameDraw};
use hypgeom::segment::cycle_holonomy;
use hypgeom::zigzag::{zigzag_axis_distance, zigzag_bounds, zigzag_cycle};
use hypgeom::{ComplexLength, GeomError, Isometry, C};
use rand::Rng;

use crate::{CaseResult, Params, VerifyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Positive,
    Count,
    Real,
}

pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub kind: Kind,
    pub help: &'static str,
}

const fn p(name: &'static str, default: f64, kind: Kind, help: &'static str) -> ParamSpec {
    ParamSpec { name, default, kind, help }
}

pub struct Suite {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [ParamSpec],
    pub default_trials: usize,
    pub trial: fn(&Params, usize, u64) -> CaseResult,
}

pub const NAMES: [&str; 8] = ["moebius", "inefficiency", "hexagon", "zigzag", "pants", "matching", "distortion", "pipeline"];

pub static SUITES: [Suite; 8] = [
    Suite {
        name: "moebius",
        about: "half-length conjugation invariance and axis invariance of random loxodromics",
        params: &[
            p("tol", 1e-9, Kind::Positive, "residual tolerance"),
            p("scale", 2.0, Kind::Positive, "entries drawn from [-scale, scale]^2"),
        ],
        default_trials: 1000,
        trial: moebius_trial,
    },
    Suite {
        name: "inefficiency",
        about: "sum of inefficiencies on random (L, d, Delta)-tame continuous cycles",
        params: &[
            p("tol", 1e-4, Kind::Positive, "residual tolerance"),
            p("L", 15.0, Kind::Positive, "long segments have length 2L + U[0,2)"),
            p("m", 3.0, Kind::Count, "number of long/short pairs"),
            p("d", 1.0, Kind::Positive, "short segments have length at most 2d"),
            p("delta", 2.0, Kind::Positive, "bound on |ln|sinh(w/2)|| for short segments"),
        ],
        default_trials: 1000,
        trial: inefficiency_trial,
    },
    Suite {
        name: "hexagon",
        about: "cosine-law residuals of right-angled hexagons from random alternate sides",
        params: &[
            p("tol", 1e-10, Kind::Positive, "residual tolerance"),
            p("re_max", 6.0, Kind::Positive, "real parts drawn from [0.2, re_max]"),
        ],
        default_trials: 1000,
        trial: hexagon_trial,
    },
    Suite {
        name: "zigzag",
        about: "sinh D <= 48 eps + 8 exp(-2L) on random (L, eps)-zigzags, D against the point-to-axis oracle",
        params: &[
            p("tol", 1e-6, Kind::Positive, "agreement of D with the oracle"),
            p("L", 10.0, Kind::Positive, "half-length of the long segments"),
            p("eps", 1e-4, Kind::Positive, "detour size"),
        ],
        default_trials: 1000,
        trial: zigzag_trial,
    },
    Suite {
        name: "pants",
        about: "lattice fit, spinning residuals and goodness on random pants bases",
        params: &[
            p("r0", 40.0, Kind::Positive, "minimal R"),
            p("eps", 1e-3, Kind::Positive, "spin residual allowance"),
        ],
        default_trials: 1000,
        trial: pants_trial,
    },
    Suite {
        name: "matching",
        about: "perfect matchings of tau-symmetric foot sets with jitter below tol",
        params: &[
            p("tol", 1e-3, Kind::Positive, "matching tolerance"),
            p("n", 40.0, Kind::Count, "feet per set (even)"),
            p("jitter", 0.5, Kind::Positive, "jitter as a fraction of tol"),
            p("hl_re", 3.0, Kind::Positive, "Re of the cuff half-length"),
            p("hl_im", 0.2, Kind::Real, "Im of the cuff half-length"),
            p("shear_re", 1.0, Kind::Real, "Re of the shear"),
            p("shear_im", 0.0, Kind::Real, "Im of the shear"),
        ],
        default_trials: 1000,
        trial: matching_trial,
    },
    Suite {
        name: "distortion",
        about: "product-form matrix estimate on random admissible inputs; sum form in the notes",
        params: &[p("max_n", 50.0, Kind::Count, "longest product")],
        default_trials: 1000,
        trial: distortion_trial,
    },
    Suite {
        name: "pipeline",
        about: "lattice fit, spin, goodness, tau-symmetric feet, assembly and perfect-model scan",
        params: &[
            p("tol", 1e-3, Kind::Positive, "matching tolerance"),
            p("r0", 1.0, Kind::Positive, "minimal R"),
            p("eps", 1e-3, Kind::Positive, "spin residual allowance"),
            p("pool", 2.0, Kind::Count, "pants in the pool before doubling"),
            p("jitter", 1e-4, Kind::Positive, "foot jitter"),
            p("shear", 1.0, Kind::Real, "real gluing shear on every curve"),
            p("D", 10.0, Kind::Positive, "distortion cutoff distance"),
            p("max_distortion", 1.0, Kind::Positive, "largest accepted distortion"),
        ],
        default_trials: 3,
        trial: pipeline_trial,
    },
];

pub fn lookup(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

impl Suite {
    pub fn defaults(&self) -> Params {
        self.params.iter().map(|p| (p.name.to_string(), p.default)).collect()
    }

    pub fn check(&self, params: &Params) -> Result<(), VerifyError> {
        for spec in self.params {
            let v = params[spec.name];
            let bad = |why: &str| Err(VerifyError::BadParams(spec.name.into(), why.into()));
            match spec.kind {
                Kind::Positive if !(v > 0.0) => return bad("must be positive"),
                Kind::Count if !(v >= 1.0 && v.fract() == 0.0 && v <= 1e6) => return bad("must be a positive integer"),
                _ => {}
            }
        }
        if self.name == "matching" && params["n"] as usize % 2 == 1 {
            return Err(VerifyError::BadParams("n".into(), "must be even".into()));
        }
        Ok(())
    }
}

fn case(i: usize) -> String {
    format!("trial {i}")
}

fn finish(i: usize, r: Result<(f64, Option<String>), GeomError>) -> CaseResult {
    match r {
        Ok((m, note)) => CaseResult { note, ..CaseResult::new(case(i), m) },
        Err(e) => CaseResult::error(case(i), &e),
    }
}

fn random_loxodromic<R: Rng>(r: &mut R, scale: f64) -> Isometry {
    loop {
        let m: [[C; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| complex_in(r, (-scale, scale), (-scale, scale))));
        if let Ok(g) = Isometry::from_matrix(m) {
            if g.classify() == IsometryKind::Loxodromic {
                return g;
            }
        }
    }
}

fn moebius_trial(p: &Params, i: usize, seed: u64) -> CaseResult {
    let mut r = rng(seed);
    let g = random_loxodromic(&mut r, p["scale"]);
    let h = random_loxodromic(&mut r, p["scale"]);
    let run = || {
        let conj = h * g * h.inverse();
        let hl_gap = half_length(&g)?.dist(half_length(&conj)?);
        let ax = axis(&g)?;
        let moved = g.act_geodesic(&ax);
        let axis_gap = moved.rep.chordal(ax.rep).max(moved.att.chordal(ax.att));
        // the image of g's axis under h is the axis of the conjugate
        let ah = h.act_geodesic(&ax);
        let ac = axis(&conj)?;
        let conj_gap = ah.rep.chordal(ac.rep).max(ah.att.chordal(ac.att));
        let worst = hl_gap.max(axis_gap).max(conj_gap);
        Ok((1.0 - worst / p["tol"], None))
    };
    finish(i, run())
}

fn inefficiency_trial(p: &Params, i: usize, seed: u64) -> CaseResult {
    let draw = TameDraw { m: p["m"] as usize, d: p["d"], delta: p["delta"] };
    let cy = tame_cycle(&mut rng(seed), &draw, p["L"]);
    finish(i, predict_closure(&cy).map(|pr| (1.0 - pr.max_residual() / p["tol"], None)))
}

fn hexagon_trial(p: &Params, i: usize, seed: u64) -> CaseResult {
    let mut r = rng(seed);
    let alt = std::array::from_fn(|_| ComplexLength::new(complex_in(&mut r, (0.2, p["re_max"]), (-PI, PI))));
    finish(i, Hexagon::from_alternate(alt).map(|h| (1.0 - h.max_residual() / p["tol"], None)))
}

fn zigzag_trial(p: &Params, i: usize, seed: u64) -> CaseResult {
    let l = zigzag_halves(&mut rng(seed), p["L"], p["eps"]);
    let run = || {
        let (bound, _) = zigzag_bounds(p["L"], p["eps"], 1.0, 1.0)?;
        let d = zigzag_axis_distance(l[0], l[1], l[2], l[3])?;
        let oracle = point_to_axis_distance(HPoint::origin(), &cycle_holonomy(&zigzag_cycle(l)))?;
        let m = (1.0 - d.sinh() / bound).min(1.0 - (d - oracle).abs() / p["tol"]);
        Ok((m, Some(format!("sinh D = {:e}, bound {:e}", d.sinh(), bound))))
    };
    finish(i, run())
}

fn pants_trial(p: &Params, i: usize, seed: u64) -> CaseResult {
    let mut r = rng(seed);
    let eps = p["eps"];
    let mut run = || {
        let hl: [ComplexLength; 3] = std::array::from_fn(|_| ComplexLength::new(complex_in(&mut r, (0.3, 4.0), (-1.2, 1.2))));
        let pants = build_pants(hl[0], hl[1], hl[2])?;
        let shear = std::array::from_fn(|_| complex_in(&mut r, (0.0, 1.0), (-1.0, 1.0)));
        let out = spin_decomposition(&SpinBase::from_pants(&pants, shear), p["r0"], eps)?;
        let d = &out.decomposition;
        let good = goodness_check(d, d.r, out.m, (d.r - 4.0 * out.m, d.r + 4.0 * out.m));
        let good_margin = good.hl_margins.iter().chain(&good.shear_margins).fold(f64::INFINITY, |a, b| a.min(*b)) / out.m;
        let fit_margin = 1.0 - out.fit.max_error() / out.fit.m1;
        let spin_margin = 1.0 - out.residuals.iter().fold(0.0f64, |a, b| a.max(*b)) / (SQRT_2 * eps);
        Ok((good_margin.min(fit_margin).min(spin_margin), Some(format!("n = {:?}, R = {}", d.n, d.r))))
    };
    finish(i, run())
}

fn matching_trial(p: &Params, i: usize, seed: u64) -> CaseResult {
    let tol = p["tol"];
    let hl = ComplexLength::from_parts(p["hl_re"], p["hl_im"]);
    let s = C::new(p["shear_re"], p["shear_im"]);
    let mode = SampleMode::TauSymmetric { s, jitter: p["jitter"] * tol };
    let run = || {
        let fs = sample_feet(p["n"] as usize, hl, mode, seed)?;
        let m = match_feet(&fs, s, tol)?;
        let worst = m.errors.iter().fold(0.0f64, |a, b| a.max(*b));
        Ok((1.0 - worst / tol, None))
    };
    finish(i, run())
}

fn distortion_trial(p: &Params, i: usize, seed: u64) -> CaseResult {
    let inputs = sample_product_inputs(&mut rng(seed), p["max_n"] as usize);
    let run = || {
        let e = product_estimate(&inputs)?;
        let note = format!("n = {}, lhs = {:e}, sum_lhs = {:e}, bound = {:e}, sum form holds: {}", inputs.a.len(), e.lhs, e.sum_lhs, e.bound, e.sum_holds);
        Ok((1.0 - e.lhs / e.bound, Some(note)))
    };
    finish(i, run())
}

/// Outcome of one pipeline run.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PipelineRun {
    pub n: [u32; 3],
    #[serde(rename = "R")]
    pub r: f64,
    pub spin_residual: f64,
    pub goodness_margin: f64,
    pub assembled_pants: usize,
    pub max_gluing_error: f64,
    pub max_distortion: f64,
    pub pairs: usize,
    pub hexagons: usize,
}

pub fn pipeline(p: &Params, seed: u64) -> Result<PipelineRun, GeomError> {
    let out = spin_decomposition(&SpinBase::regular(), p["r0"], p["eps"])?;
    let d = &out.decomposition;
    let good = goodness_check(d, d.r, out.m, (d.r - 4.0 * out.m, d.r + 4.0 * out.m));
    if !good.pass {
        return Err(GeomError::HypothesisViolated(format!("decomposition is not good: {good:?}")));
    }
    let pants = build_pants(d.hl[0], d.hl[1], d.hl[2])?;
    let s = C::new(p["shear"], 0.0);
    let mode = SampleMode::TauSymmetric { s, jitter: p["jitter"] };
    let n = 2 * p["pool"] as usize;
    let mut sets: Vec<FootSet> = Vec::with_capacity(3);
    for k in 0..3 {
        sets.push(sample_feet(n, d.hl[k], mode, seed.wrapping_add(k as u64))?);
    }
    let sets: [FootSet; 3] = sets.try_into().expect("three curves");
    let pool = pool_from_feet(&pants, &sets)?;
    let asm = assemble(&pool, [s; 3], p["tol"])?;
    let scan = perfect_model_scan(&asm, p["D"])?;
    Ok(PipelineRun {
        n: d.n,
        r: d.r,
        spin_residual: out.residuals.iter().fold(0.0, |a, b| a.max(*b)),
        goodness_margin: good.hl_margins.iter().chain(&good.shear_margins).fold(f64::INFINITY, |a, b| a.min(*b)),
        assembled_pants: asm.pants.len(),
        max_gluing_error: asm.gluings.iter().map(|g| g.error).fold(0.0, f64::max),
        max_distortion: scan.max_distortion,
        pairs: scan.pairs,
        hexagons: scan.hexagons,
    })
}

fn pipeline_trial(p: &Params, i: usize, seed: u64) -> CaseResult {
    finish(
        i,
        pipeline(p, seed).map(|run| {
            let mut m = 1.0 - run.max_distortion / p["max_distortion"];
            if run.pairs == 0 {
                m = -1.0;
            }
            (m, Some(serde_json::to_string(&run).expect("serializes")))
        }),
    )
}
