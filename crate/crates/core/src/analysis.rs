//! End-to-end pipeline from a validated problem to invariants, regions and
//! harness reports.

use crate::error::{Error, Result};
use crate::geometry::{build_polyhedron, DiagonalSupport, NewtonPolyhedron};
use crate::problem::ProblemSpec;
use crate::rational::{to_f64, Q};
use crate::regions::{build_profile, build_regions, lq_slice, A0Input, RegionSet, Slice, SmoothingProfile};
use crate::sharpness::{run_sharpness_multi, BoxTestConfig, KernelSpec, SharpnessReport};
use crate::sublevel::{fit_growth, measure_schedule, predicted_a0, GrowthFit, Measurement, SublevelOptions};
use crate::zeros::{o_of, ZeroOrderReport};

#[derive(Debug, Clone)]
pub struct Analysis {
    pub polyhedron: NewtonPolyhedron,
    pub support: DiagonalSupport,
    pub zeros: ZeroOrderReport,
    pub predicted_a0: Option<Q>,
    /// Present when `a0` had to be fitted from sublevel measurements.
    pub sublevel: Option<SublevelRun>,
    pub profile: SmoothingProfile,
    pub regions: RegionSet,
    pub slice: Slice,
}

#[derive(Debug, Clone)]
pub struct SublevelRun {
    pub r: f64,
    pub measurements: Vec<Measurement>,
    pub fit: GrowthFit,
    pub predicted_a0: Option<Q>,
}

impl SublevelRun {
    /// Relative distance of the fitted exponent from the predicted one.
    pub fn relative_error(&self) -> Option<f64> {
        self.predicted_a0.as_ref().map(|p| {
            let p = to_f64(p);
            (self.fit.a0_hat - p).abs() / p
        })
    }
}

/// Relative tolerance used when comparing a fitted `a0` with its prediction.
pub const A0_TOLERANCE: f64 = 0.05;

pub fn analyze(spec: &ProblemSpec, seed: u64) -> Result<Analysis> {
    let polyhedron = build_polyhedron(&spec.phase)?;
    let support = polyhedron.diagonal_support();
    let zeros = o_of(&spec.phase, &polyhedron, spec.overrides.o)?;
    let o = zeros.o_of_s;
    let predicted = predicted_a0(&polyhedron, &spec.blocks, o)?;
    let mut sublevel = None;
    let a0 = match (&spec.overrides.a0, &predicted) {
        (Some(a), _) => A0Input::user(a.clone()),
        (None, Some(p)) => A0Input::predicted(p.clone()),
        (None, None) => {
            let run = run_sublevel_with(spec, &polyhedron, predicted.clone(), seed)?;
            let input = A0Input::fitted(run.fit.a0_hat, run.fit.unstable)?;
            sublevel = Some(run);
            input
        }
    };
    let d0 = sublevel.as_ref().map(|s| s.fit.d0_hat);
    let profile = build_profile(
        support.d.clone(),
        o,
        a0,
        d0,
        &spec.blocks,
        spec.kernel.bounded_below,
    )?;
    let regions = build_regions(&profile);
    let slice = lq_slice(&regions);
    Ok(Analysis {
        polyhedron,
        support,
        zeros,
        predicted_a0: predicted,
        sublevel,
        profile,
        regions,
        slice,
    })
}

/// Measures the weighted sublevel sets of `S*` on the configured schedule and fits `(a0, d0)`.
pub fn run_sublevel(spec: &ProblemSpec, seed: u64) -> Result<SublevelRun> {
    let polyhedron = build_polyhedron(&spec.phase)?;
    let o = o_of(&spec.phase, &polyhedron, spec.overrides.o)?.o_of_s;
    let predicted = predicted_a0(&polyhedron, &spec.blocks, o)?;
    run_sublevel_with(spec, &polyhedron, predicted, seed)
}

fn run_sublevel_with(
    spec: &ProblemSpec,
    polyhedron: &NewtonPolyhedron,
    predicted: Option<Q>,
    seed: u64,
) -> Result<SublevelRun> {
    let cfg = &spec.sublevel;
    let opts = SublevelOptions {
        budget: cfg.budget,
        seed,
        r0: to_f64(&cfg.r0),
        ..SublevelOptions::default()
    };
    let r = to_f64(&cfg.r);
    let eps = cfg.eps_schedule()?;
    let measurements = measure_schedule(polyhedron.vertices(), &spec.blocks, r, &eps, &opts)?;
    let fit = fit_growth(&measurements, spec.dimension, r)?;
    Ok(SublevelRun {
        r,
        measurements,
        fit,
        predicted_a0: predicted,
    })
}

/// Box-test configuration derived from the problem's sharpness section.
pub fn box_test_config(spec: &ProblemSpec, support: &DiagonalSupport) -> Result<BoxTestConfig> {
    let sh = &spec.sharpness;
    let n = spec.dimension;
    let mut cfg = BoxTestConfig::new(
        support,
        to_f64(&spec.kernel.support),
        sh.s.clone(),
        sh.p.recip(),
        sh.q.recip(),
    );
    cfg.r_schedule = sh.r.iter().map(to_f64).collect();
    cfg.n_box = sh.n_box;
    cfg.max_doublings = sh.max_doublings;
    cfg.quad_subdiv = sh.quad_subdiv;
    if let Some(g) = &sh.grid {
        cfg.grid = g.clone();
    }
    if let Some(h) = &sh.half_widths {
        cfg.half_widths = h.iter().map(to_f64).collect();
    }
    if cfg.grid.len() != n + 1 || cfg.half_widths.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: cfg.grid.len(),
        });
    }
    Ok(cfg)
}

pub fn kernel_spec(spec: &ProblemSpec) -> KernelSpec {
    KernelSpec {
        blocks: spec.blocks.clone(),
        factor: to_f64(&spec.kernel.factor),
        support: to_f64(&spec.kernel.support),
    }
}

/// Runs the box test for each `s`, sharing the averaged test functions.
pub fn run_box_test(spec: &ProblemSpec, s_values: &[Q]) -> Result<Vec<SharpnessReport>> {
    let polyhedron = build_polyhedron(&spec.phase)?;
    let support = polyhedron.diagonal_support();
    let cfg = box_test_config(spec, &support)?;
    run_sharpness_multi(&cfg, s_values, &spec.phase, &kernel_spec(spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_spec;
    use crate::rational::{q, qi};
    use crate::regions::A0Source;

    #[test]
    fn example_two_pipeline() {
        let spec = parse_spec("dimension = 2\nterms = [{ exps = [3, 0], coeff = 1 }, { exps = [0, 3], coeff = 1 }]\n").unwrap();
        let a = analyze(&spec, 0).unwrap();
        assert_eq!(a.support.d, q(3, 2));
        assert_eq!(a.profile.a0, q(2, 3));
        assert_eq!(a.profile.a0_source, A0Source::Predicted);
        assert!(a.sublevel.is_none());
    }

    #[test]
    fn weighted_cubic_pipeline() {
        let spec = parse_spec(
            "dimension = 1\nterms = [{ exps = [3], coeff = 1 }]\n[[block]]\nvars = [1]\nalpha = \"1/2\"\n",
        )
        .unwrap();
        let a = analyze(&spec, 0).unwrap();
        assert_eq!(a.profile.g, q(1, 6));
        assert_eq!(a.profile.k, q(3, 2));
    }

    #[test]
    fn user_a0_wins() {
        let spec = parse_spec(
            "dimension = 1\nterms = [{ exps = [2], coeff = 1 }]\n[overrides]\na0 = \"1/4\"\n",
        )
        .unwrap();
        let a = analyze(&spec, 0).unwrap();
        assert_eq!(a.profile.a0_source, A0Source::User);
        assert_eq!(a.profile.g, q(1, 4));
        assert_eq!(a.predicted_a0, Some(q(1, 2)));
        assert_eq!(a.profile.k, qi(1));
    }
}
