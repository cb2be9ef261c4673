//! Weighted sublevel measures `int_{t in (0,r)^n, S*(t) < eps} prod |t_k|^{-alpha_k} dt`
//! and the fit of `eps^{a0} |ln eps|^{d0}` to a schedule of them.
//!
//! The box is cut into product-dyadic cells, one dyadic ladder per coordinate.
//! Since `S*` is nondecreasing in every `|t_i|`, each cell is decided as empty,
//! full or partial from its two extreme corners; only partial cells (and cells
//! whose weight has no closed-form integral) are sampled.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{NewtonPolyhedron, Point};
use crate::poly::{BlockStructure, StarFunction};
use crate::rational::{to_f64, Q};

#[derive(Debug, Clone, Copy)]
pub struct SublevelOptions {
    /// Total number of Monte Carlo samples, split across sampled cells.
    pub budget: usize,
    pub seed: u64,
    /// Largest admissible box size.
    pub r0: f64,
    /// Use `t_i = u_i^{1/(1 - alpha_i)}` on one-dimensional blocks.
    pub substitute: bool,
    /// Dyadic levels per coordinate; `None` picks a default from the dimension.
    pub levels: Option<usize>,
    /// Bisection rounds applied to boundary cells.
    pub refine_depth: usize,
    /// Stop bisecting once the boundary would exceed this many cells.
    pub refine_cells: usize,
}

impl Default for SublevelOptions {
    fn default() -> Self {
        Self {
            budget: 100_000,
            seed: 0,
            r0: 0.25,
            substitute: true,
            levels: None,
            refine_depth: 16,
            refine_cells: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub eps: f64,
    pub measure: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Coord {
    /// Substituted coordinate `u` of a one-dimensional block; `t = u^power`.
    Substituted { power: f64, jacobian: f64 },
    /// Plain coordinate `t`.
    Plain,
}

#[derive(Debug, Clone)]
struct BlockPlan {
    vars: Vec<usize>,
    alpha: f64,
    /// Weighted plain block: weight `|t_k|^{-alpha}` must be sampled.
    weighted: bool,
}

struct Plan {
    star: StarFunction,
    coords: Vec<Coord>,
    /// Upper end of each coordinate range (`r` or `r^{1 - alpha}`).
    top: Vec<f64>,
    blocks: Vec<BlockPlan>,
    levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellClass {
    Empty,
    Full,
    Partial,
}

#[derive(Debug, Clone)]
struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Blocks sampled in polar form: weighted blocks whose coordinates all sit in the bottom cell.
    polar: Vec<bool>,
    /// Deterministic part of the per-sample estimator.
    factor: f64,
    /// Upper bound on the cell's weighted mass, used for sample allocation.
    mass: f64,
    /// Whether a full cell's contribution is exactly `factor`.
    exact_when_full: bool,
}

fn default_levels(n: usize) -> usize {
    match n {
        1 | 2 => 60,
        3 => 50,
        4 => 20,
        5 => 10,
        _ => 5,
    }
}

/// Area of the part of the unit sphere in `R^l` lying in the open positive orthant.
fn orthant_sphere_area(l: usize) -> f64 {
    let half = l as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half_integer(l) / 2f64.powi(l as i32)
}

/// `Gamma(l / 2)` for a positive integer `l`.
fn gamma_half_integer(l: usize) -> f64 {
    let mut g = if l % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if l % 2 == 0 { 1.0 } else { 0.5 };
    while x + 1e-9 < l as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

impl Plan {
    fn new(
        vertices: &[Point],
        blocks: &BlockStructure,
        r: f64,
        opts: &SublevelOptions,
    ) -> Result<Self> {
        let n = blocks.dim();
        if vertices.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: vertices[0].len(),
            });
        }
        let star = StarFunction::new(vertices)?;
        let mut coords = vec![Coord::Plain; n];
        let mut top = vec![r; n];
        let mut plans = Vec::new();
        for b in blocks.blocks() {
            let alpha = to_f64(&b.alpha);
            if b.size() == 1 && opts.substitute {
                let v = b.vars[0];
                coords[v] = Coord::Substituted {
                    power: 1.0 / (1.0 - alpha),
                    jacobian: 1.0 / (1.0 - alpha),
                };
                top[v] = r.powf(1.0 - alpha);
            } else {
                plans.push(BlockPlan {
                    vars: b.vars.clone(),
                    alpha,
                    weighted: alpha > 0.0,
                });
            }
        }
        Ok(Self {
            star,
            coords,
            top,
            blocks: plans,
            levels: opts.levels.unwrap_or_else(|| default_levels(n)),
        })
    }

    fn to_t(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.coords)
            .map(|(&x, c)| match c {
                Coord::Substituted { power, .. } => x.powf(*power),
                Coord::Plain => x,
            })
            .collect()
    }

    fn interval(&self, coord: usize, level: usize) -> (f64, f64) {
        let top = self.top[coord];
        let hi = top * 0.5f64.powi(level as i32);
        if level == self.levels {
            (0.0, hi)
        } else {
            (hi * 0.5, hi)
        }
    }

    fn cell(&self, index: usize) -> Cell {
        let n = self.coords.len();
        let radix = self.levels + 1;
        let mut rest = index;
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        let mut at_bottom = vec![false; n];
        for i in 0..n {
            let level = rest % radix;
            rest /= radix;
            let (a, b) = self.interval(i, level);
            lo[i] = a;
            hi[i] = b;
            at_bottom[i] = level == self.levels;
        }
        let polar = self
            .blocks
            .iter()
            .map(|b| b.weighted && b.vars.iter().all(|&v| at_bottom[v]))
            .collect();
        self.cell_from_box(lo, hi, polar)
    }

    fn cell_from_box(&self, lo: Vec<f64>, hi: Vec<f64>, polar: Vec<bool>) -> Cell {
        let mut factor = 1.0;
        for (i, c) in self.coords.iter().enumerate() {
            if let Coord::Substituted { jacobian, .. } = c {
                factor *= (hi[i] - lo[i]) * jacobian;
            }
        }
        let mut mass_extra = 1.0;
        let mut exact_when_full = true;
        for (k, b) in self.blocks.iter().enumerate() {
            if polar[k] {
                exact_when_full = false;
                let l = b.vars.len();
                let rho_max = hi[b.vars[0]] * (l as f64).sqrt();
                let e = l as f64 - b.alpha;
                factor *= orthant_sphere_area(l) * rho_max.powf(e) / e;
            } else {
                let vol: f64 = b.vars.iter().map(|&v| hi[v] - lo[v]).product();
                factor *= vol;
                if b.weighted {
                    exact_when_full = false;
                    let rho_lo = b.vars.iter().map(|&v| lo[v] * lo[v]).sum::<f64>().sqrt();
                    mass_extra *= rho_lo.powf(-b.alpha);
                }
            }
        }
        Cell {
            lo,
            hi,
            polar,
            factor,
            mass: factor * mass_extra,
            exact_when_full,
        }
    }

    /// The `2^n` halves of a cell; never called on polar cells.
    fn split(&self, cell: &Cell) -> Vec<Cell> {
        let n = cell.lo.len();
        (0..1usize << n)
            .map(|mask| {
                let mut lo = cell.lo.clone();
                let mut hi = cell.hi.clone();
                for i in 0..n {
                    let mid = 0.5 * (cell.lo[i] + cell.hi[i]);
                    if mask >> i & 1 == 1 {
                        lo[i] = mid;
                    } else {
                        hi[i] = mid;
                    }
                }
                self.cell_from_box(lo, hi, cell.polar.clone())
            })
            .collect()
    }

    fn classify(&self, cell: &Cell, eps: f64) -> CellClass {
        if self.star.eval(&self.to_t(&cell.lo)) >= eps {
            CellClass::Empty
        } else if self.star.eval(&self.to_t(&cell.hi)) < eps {
            CellClass::Full
        } else {
            CellClass::Partial
        }
    }

    fn cell_count(&self) -> usize {
        (self.levels + 1).pow(self.coords.len() as u32)
    }

    /// One draw of the unbiased estimator of the cell's weighted sublevel mass.
    fn sample(&self, cell: &Cell, eps: f64, rng: &mut ChaCha8Rng) -> f64 {
        let n = self.coords.len();
        let mut u = vec![0.0; n];
        for i in 0..n {
            u[i] = rng.gen_range(cell.lo[i]..=cell.hi[i]);
        }
        let mut value = cell.factor;
        for (k, b) in self.blocks.iter().enumerate() {
            if cell.polar[k] {
                let l = b.vars.len();
                let side = cell.hi[b.vars[0]];
                let rho_max = side * (l as f64).sqrt();
                let dir: Vec<f64> = (0..l)
                    .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
                    .collect();
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                let w: f64 = rng.gen();
                let rho = rho_max * w.powf(1.0 / (l as f64 - b.alpha));
                for (j, &v) in b.vars.iter().enumerate() {
                    u[v] = rho * dir[j] / norm;
                    if u[v] > side {
                        value = 0.0;
                    }
                }
            } else if b.weighted {
                let rho = b.vars.iter().map(|&v| u[v] * u[v]).sum::<f64>().sqrt();
                value *= rho.powf(-b.alpha);
            }
        }
        if value == 0.0 {
            return 0.0;
        }
        let t = self.to_t(&u);
        if self.star.eval(&t) < eps {
            value
        } else {
            0.0
        }
    }
}

fn validate(r: f64, eps: f64, opts: &SublevelOptions) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Input(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Input(format!("r = {r} must be positive")));
    }
    if r > opts.r0 {
        return Err(Error::Input(format!(
            "r = {r} exceeds the configured r0 = {}",
            opts.r0
        )));
    }
    if opts.budget < 10_000 {
        return Err(Error::Input(format!(
            "sample budget {} is below the minimum of 10^4",
            opts.budget
        )));
    }
    Ok(())
}

/// Estimate of the weighted measure of `{t in (0,r)^n : S*(t) < eps}`.
pub fn measure_sublevel(
    vertices: &[Point],
    blocks: &BlockStructure,
    r: f64,
    eps: f64,
    opts: &SublevelOptions,
) -> Result<Measurement> {
    validate(r, eps, opts)?;
    let plan = Plan::new(vertices, blocks, r, opts)?;
    Ok(measure_with_plan(&plan, eps, opts))
}

/// [`measure_sublevel`] over a schedule of `eps` values.
pub fn measure_schedule(
    vertices: &[Point],
    blocks: &BlockStructure,
    r: f64,
    eps: &[f64],
    opts: &SublevelOptions,
) -> Result<Vec<Measurement>> {
    for &e in eps {
        validate(r, e, opts)?;
    }
    let plan = Plan::new(vertices, blocks, r, opts)?;
    Ok(eps.iter().map(|&e| measure_with_plan(&plan, e, opts)).collect())
}

fn measure_with_plan(plan: &Plan, eps: f64, opts: &SublevelOptions) -> Measurement {
    let mut exact = 0.0;
    let mut sampled: Vec<Cell> = Vec::new();
    let mut partial: Vec<Cell> = Vec::new();
    for index in 0..plan.cell_count() {
        let cell = plan.cell(index);
        match plan.classify(&cell, eps) {
            CellClass::Empty => {}
            CellClass::Full if cell.exact_when_full => exact += cell.factor,
            CellClass::Partial if !cell.polar.iter().any(|&p| p) => partial.push(cell),
            _ => sampled.push(cell),
        }
    }
    // Bisect boundary cells while the partial set stays small. The cap does not
    // depend on the budget, so the budget only controls Monte Carlo error.
    let fan_out = 1usize << plan.coords.len();
    for _ in 0..opts.refine_depth {
        if partial.is_empty() || partial.len() * fan_out > opts.refine_cells {
            break;
        }
        let mut next = Vec::new();
        for cell in &partial {
            for child in plan.split(cell) {
                match plan.classify(&child, eps) {
                    CellClass::Empty => {}
                    CellClass::Full if child.exact_when_full => exact += child.factor,
                    CellClass::Full => sampled.push(child),
                    CellClass::Partial => next.push(child),
                }
            }
        }
        partial = next;
    }
    sampled.extend(partial);

    let total_mass: f64 = sampled.iter().map(|c| c.mass).sum();
    let parts: Vec<(f64, f64)> = sampled
        .par_iter()
        .enumerate()
        .map(|(stream, cell)| {
            let share = if total_mass > 0.0 && cell.mass.is_finite() {
                (opts.budget as f64 * cell.mass / total_mass) as usize
            } else {
                0
            };
            let count = share.max(8);
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(stream as u64);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let x = plan.sample(cell, eps, &mut rng);
                sum += x;
                sum_sq += x * x;
            }
            let m = count as f64;
            let mean = sum / m;
            let var = (sum_sq / m - mean * mean).max(0.0);
            (mean, var / m)
        })
        .collect();

    let mut measure = exact;
    let mut variance = 0.0;
    for (mean, var) in parts {
        measure += mean;
        variance += var;
    }
    Measurement {
        eps,
        measure,
        stderr: variance.sqrt(),
    }
}

/// Geometric schedule of `count` values from `eps_min` to `eps_max`.
pub fn geometric_schedule(eps_min: f64, eps_max: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(eps_min > 0.0) || !(eps_max > eps_min) {
        return Err(Error::Input(
            "schedule needs 0 < eps_min < eps_max and at least two points".into(),
        ));
    }
    let ratio = (eps_max / eps_min).ln() / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                eps_max
            } else {
                eps_min * (ratio * i as f64).exp()
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitCandidate {
    pub d0: usize,
    pub a0: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub a0_hat: f64,
    pub d0_hat: usize,
    /// `min` and `max` of `mu / (eps^a0 |ln eps|^d0)` over the schedule.
    pub lower_constant: f64,
    pub upper_constant: f64,
    pub eps_schedule: Vec<f64>,
    pub r: f64,
    /// RMS residual of the selected regression, in natural-log units.
    pub residual: f64,
    /// Set when the measurements decrease in eps by more than three standard errors.
    pub unstable: bool,
    pub candidates: Vec<FitCandidate>,
}

/// Least-squares fit of `ln mu = a0 ln eps + d0 ln|ln eps| + c` with `d0` an
/// integer in `0..dim`, chosen by smallest residual.
pub fn fit_growth(measurements: &[Measurement], dim: usize, r: f64) -> Result<GrowthFit> {
    if measurements.len() < 6 {
        return Err(Error::Fit(format!(
            "need at least 6 measurements, got {}",
            measurements.len()
        )));
    }
    let mut pts = measurements.to_vec();
    pts.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let (lo, hi) = (pts[0].eps, pts[pts.len() - 1].eps);
    if hi / lo < 1e3 * (1.0 - 1e-9) {
        return Err(Error::Fit(format!(
            "eps schedule spans {:.2} decades; at least 3 are needed",
            (hi / lo).log10()
        )));
    }
    if let Some(bad) = pts.iter().find(|m| !(m.measure > 0.0) || !(m.eps < 1.0)) {
        return Err(Error::Fit(format!(
            "measure {} at eps {} cannot be fitted on a log scale",
            bad.measure, bad.eps
        )));
    }
    let unstable = pts.windows(2).any(|w| {
        let tol = 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        w[1].measure < w[0].measure - tol
    });

    let xs: Vec<f64> = pts.iter().map(|m| m.eps.ln()).collect();
    let ll: Vec<f64> = pts.iter().map(|m| m.eps.ln().abs().ln()).collect();
    let mut candidates = Vec::new();
    for d0 in 0..dim.max(1) {
        let ys: Vec<f64> = pts
            .iter()
            .zip(&ll)
            .map(|(m, l)| m.measure.ln() - d0 as f64 * l)
            .collect();
        let (a, c) = linear_fit(&xs, &ys);
        let rss: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - a * x - c).powi(2))
            .sum();
        candidates.push(FitCandidate {
            d0,
            a0: a,
            residual: (rss / xs.len() as f64).sqrt(),
        });
    }
    let best = candidates
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .expect("at least one candidate")
        .clone();
    if !(best.a0 > 0.0) {
        return Err(Error::Fit(format!(
            "fitted exponent {} is not positive",
            best.a0
        )));
    }
    let ratios: Vec<f64> = pts
        .iter()
        .zip(&ll)
        .map(|(m, l)| m.measure / (m.eps.powf(best.a0) * (best.d0 as f64 * l).exp()))
        .collect();
    Ok(GrowthFit {
        a0_hat: best.a0,
        d0_hat: best.d0,
        lower_constant: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        upper_constant: ratios.iter().copied().fold(0.0, f64::max),
        eps_schedule: pts.iter().map(|m| m.eps).collect(),
        r,
        residual: best.residual,
        unstable,
        candidates,
    })
}

/// Ordinary least squares `y = a x + c`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

/// `1/d(S)` for unweighted phases and `1/d(R)` for one-dimensional blocks,
/// both only when `o(S) <= 2`.
pub fn predicted_a0(
    polyhedron: &NewtonPolyhedron,
    blocks: &BlockStructure,
    o: u32,
) -> Result<Option<Q>> {
    if o > 2 {
        return Ok(None);
    }
    if blocks.all_alpha_zero() {
        return Ok(Some(Q::one() / polyhedron.newton_distance()));
    }
    if blocks.all_singletons() {
        let d = polyhedron.rescale(blocks)?.newton_distance();
        if d.is_zero() {
            return Ok(None);
        }
        return Ok(Some(Q::one() / d));
    }
    Ok(None)
}
