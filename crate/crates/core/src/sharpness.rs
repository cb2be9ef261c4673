//! Box test for the sharpness of the plane `P`: scaled test functions
//! `f_{r,N}`, the multiplier `|xi_{n+1}|^s`, a gridded version of the averaging
//! operator `T`, and the growth exponent of `||D^s T f||_q / ||f||_p` as `r -> 0`.
//!
//! Grids are laid out in physical coordinates but scale with `r` (axis `i`
//! spans `W_i r^{b_i}`), so the same discrete problem is solved at every `r`
//! apart from the fixed kernel support.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::DiagonalSupport;
use crate::poly::{BlockStructure, SparsePolynomial};
use crate::rational::{self, to_f64, Q};
use crate::sublevel::linear_fit;

/// A rectangular grid; the last axis is the `x_{n+1}` direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub lo: Vec<f64>,
    pub step: Vec<f64>,
}

impl Grid {
    /// Grid with `dims[i]` points covering `[-half[i], half[i])`.
    pub fn centered(dims: &[usize], half: &[f64]) -> Self {
        Self {
            dims: dims.to_vec(),
            lo: half.iter().map(|h| -h).collect(),
            step: dims
                .iter()
                .zip(half)
                .map(|(&m, h)| 2.0 * h / m as f64)
                .collect(),
        }
    }

    pub fn axes(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row_len(&self) -> usize {
        *self.dims.last().expect("at least one axis")
    }

    pub fn rows(&self) -> usize {
        self.len() / self.row_len()
    }

    pub fn coord(&self, axis: usize, index: usize) -> f64 {
        self.lo[axis] + index as f64 * self.step[axis]
    }

    pub fn cell_volume(&self) -> f64 {
        self.step.iter().product()
    }

    /// Multi-index over the leading axes of a row number (last leading axis fastest).
    pub fn row_index(&self, mut row: usize) -> Vec<usize> {
        let lead = self.axes() - 1;
        let mut idx = vec![0; lead];
        for a in (0..lead).rev() {
            idx[a] = row % self.dims[a];
            row /= self.dims[a];
        }
        idx
    }

    fn row_number(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &m)| acc * m + i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    /// Row-major, last axis contiguous.
    pub data: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            data: vec![Complex64::zero(); n],
        }
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        let m = self.grid.row_len();
        &self.data[row * m..(row + 1) * m]
    }

    /// Discrete `L^p` norm with the grid cell as quadrature weight.
    pub fn norm_lp(&self, p: f64) -> f64 {
        let sum: f64 = self.data.iter().map(|z| z.norm().powf(p)).sum();
        (sum * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Even bump: 1 on `[-1, 1]`, 0 outside `(-2, 2)`, quintic smoothstep between.
pub fn psi(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let u = 2.0 - a;
        u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Smooth bump supported in `(1, 2)`; the spectrum of `psi_1`.
pub fn spectral_bump(eta: f64) -> f64 {
    if eta <= 1.0 || eta >= 2.0 {
        0.0
    } else {
        (-1.0 / ((eta - 1.0) * (2.0 - eta))).exp()
    }
}

/// Ordinary frequencies (cycles per unit length) of an FFT of length `m`, spacing `step`.
pub fn fft_frequencies(m: usize, step: f64) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let k = if k < m.div_ceil(2) { k as f64 } else { k as f64 - m as f64 };
            k / (m as f64 * step)
        })
        .collect()
}

/// Samples of `sum_k |eta_k|^s B(eta_k) e^{2 pi i eta_k y}` on `m` points of
/// `[-half, half)`, normalised so that the `s = 0` profile equals 1 at `y = 0`.
/// With `s = 0` this is `psi_1`; otherwise it is `Psi_s`.
pub fn reference_profile(m: usize, half: f64, s: f64) -> Vec<Complex64> {
    let step = 2.0 * half / m as f64;
    let freqs = fft_frequencies(m, step);
    let total: f64 = freqs.iter().map(|&e| spectral_bump(e)).sum();
    let mut spec: Vec<Complex64> = freqs
        .iter()
        .map(|&eta| {
            let b = spectral_bump(eta);
            if b == 0.0 {
                return Complex64::zero();
            }
            // phase e^{2 pi i eta lo} puts y = 0 at the grid centre
            let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * eta * half);
            phase * (b * eta.abs().powf(s) / total)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut spec);
    spec
}

/// `D^s`: multiplier `|xi|^s` along the last axis (zero at `xi = 0` unless `s = 0`).
pub fn apply_ds(field: &Field, s: f64) -> Field {
    let m = field.grid.row_len();
    if s == 0.0 {
        return field.clone();
    }
    let step = *field.grid.step.last().expect("axes");
    let mult: Vec<f64> = fft_frequencies(m, step)
        .iter()
        .map(|&x| if x == 0.0 { 0.0 } else { x.abs().powf(s) / m as f64 })
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut out = field.clone();
    out.data.par_chunks_mut(m).for_each(|row| {
        fwd.process(row);
        for (z, &w) in row.iter_mut().zip(&mult) {
            *z *= w;
        }
        inv.process(row);
    });
    out
}

/// `K(t) = factor * prod_k |t_k|^{-alpha_k}` on the box `|t_i| <= support`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub blocks: BlockStructure,
    pub factor: f64,
    pub support: f64,
}

impl KernelSpec {
    pub fn unit(dim: usize, support: f64) -> Self {
        Self {
            blocks: BlockStructure::unweighted(dim),
            factor: 1.0,
            support,
        }
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        if t.iter().any(|x| x.abs() > self.support) {
            return 0.0;
        }
        self.factor * self.blocks.weight(t)
    }
}

/// `Tf(x) = int f(x' - t, x_{n+1} - S(t)) K(t) dt` on the grid of `field`.
///
/// Nodes sit at cell centres of a lattice `subdiv` times finer than the grid,
/// so they never touch the coordinate hyperplanes; the field is interpolated
/// multilinearly and taken to vanish off the grid.
pub fn apply_t(
    field: &Field,
    phase: &SparsePolynomial,
    kernel: &KernelSpec,
    subdiv: usize,
) -> Result<Field> {
    let grid = &field.grid;
    let n = grid.axes() - 1;
    if phase.dim() != n || kernel.blocks.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phase.dim(),
        });
    }
    let m = grid.row_len();
    let tau: Vec<f64> = grid.step[..n].iter().map(|h| h / subdiv.max(1) as f64).collect();
    if tau.iter().any(|&t| kernel.support < 0.5 * t) {
        return Err(Error::Domain(
            "kernel support is narrower than one quadrature cell".into(),
        ));
    }

    // bounding box (index space, leading axes) of rows carrying nonzero values
    let mut bb_lo = vec![usize::MAX; n];
    let mut bb_hi = vec![0usize; n];
    for r in 0..grid.rows() {
        if field.row(r).iter().any(|z| *z != Complex64::zero()) {
            for (a, &i) in grid.row_index(r).iter().enumerate() {
                bb_lo[a] = bb_lo[a].min(i);
                bb_hi[a] = bb_hi[a].max(i);
            }
        }
    }
    let mut out = Field::zeros(grid.clone());
    if bb_lo[0] == usize::MAX {
        return Ok(out);
    }
    let src_lo: Vec<f64> = (0..n).map(|a| grid.coord(a, bb_lo[a]) - grid.step[a]).collect();
    let src_hi: Vec<f64> = (0..n).map(|a| grid.coord(a, bb_hi[a]) + grid.step[a]).collect();
    let step_last = grid.step[n];
    let span_last = step_last * m as f64;
    let max_shift = std::sync::atomic::AtomicU64::new(0);
    let terms = phase.float_terms();
    let eval_phase = |t: &[f64]| -> f64 {
        terms
            .iter()
            .map(|(e, c)| c * crate::poly::monomial(e, t))
            .sum()
    };

    out.data.par_chunks_mut(m).enumerate().for_each(|(row, out_row)| {
        let idx = grid.row_index(row);
        let x: Vec<f64> = (0..n).map(|a| grid.coord(a, idx[a])).collect();
        // node index range per axis: t = (j + 1/2) tau
        let mut ranges = Vec::with_capacity(n);
        for a in 0..n {
            let t_min = (x[a] - src_hi[a]).max(-kernel.support);
            let t_max = (x[a] - src_lo[a]).min(kernel.support);
            if t_min > t_max {
                return;
            }
            let j0 = (t_min / tau[a] - 0.5).ceil() as i64;
            let j1 = (t_max / tau[a] - 0.5).floor() as i64;
            if j0 > j1 {
                return;
            }
            ranges.push((j0, j1));
        }
        let mut combined = vec![Complex64::zero(); m];
        let mut j: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let mut t = vec![0.0; n];
        let cell: f64 = tau.iter().product();
        loop {
            for a in 0..n {
                t[a] = (j[a] as f64 + 0.5) * tau[a];
            }
            let w = kernel.eval(&t) * cell;
            if w != 0.0 {
                let st = eval_phase(&t);
                if st.abs() >= span_last {
                    max_shift.fetch_max(st.abs().to_bits(), std::sync::atomic::Ordering::Relaxed);
                }
                // combine the 2^n neighbouring source rows
                combined.iter_mut().for_each(|z| *z = Complex64::zero());
                let mut any = false;
                let base: Vec<(i64, f64)> = (0..n)
                    .map(|a| {
                        let u = (x[a] - t[a] - grid.lo[a]) / grid.step[a];
                        let i0 = u.floor();
                        (i0 as i64, u - i0)
                    })
                    .collect();
                for corner in 0..(1usize << n) {
                    let mut cw = w;
                    let mut src = Vec::with_capacity(n);
                    let mut inside = true;
                    for a in 0..n {
                        let up = corner >> a & 1 == 1;
                        let i = base[a].0 + i64::from(up);
                        cw *= if up { base[a].1 } else { 1.0 - base[a].1 };
                        if i < 0 || i >= grid.dims[a] as i64 {
                            inside = false;
                            break;
                        }
                        src.push(i as usize);
                    }
                    if !inside || cw == 0.0 {
                        continue;
                    }
                    let src_row = field.row(grid.row_number(&src));
                    for (c, v) in combined.iter_mut().zip(src_row) {
                        *c += v * cw;
                    }
                    any = true;
                }
                if any {
                    // value at x_last - S(t): index j - S/step
                    let sigma = -st / step_last;
                    let shift = sigma.floor();
                    let frac = sigma - shift;
                    let shift = shift as i64;
                    for (jj, o) in out_row.iter_mut().enumerate() {
                        let k = jj as i64 + shift;
                        let mut v = Complex64::zero();
                        if k >= 0 && (k as usize) < m {
                            v += combined[k as usize] * (1.0 - frac);
                        }
                        if k + 1 >= 0 && ((k + 1) as usize) < m && frac != 0.0 {
                            v += combined[(k + 1) as usize] * frac;
                        }
                        *o += v;
                    }
                }
            }
            // advance the node multi-index
            let mut a = 0;
            loop {
                if a == n {
                    return;
                }
                j[a] += 1;
                if j[a] <= ranges[a].1 {
                    break;
                }
                j[a] = ranges[a].0;
                a += 1;
            }
        }
    });
    let worst = f64::from_bits(max_shift.load(std::sync::atomic::Ordering::Relaxed));
    if worst > 0.0 {
        return Err(Error::Domain(format!(
            "kernel displaces x_{{n+1}} by {worst:.3e}, beyond the grid length {span_last:.3e}"
        )));
    }
    Ok(out)
}

/// Parameters of the box test.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxTestConfig {
    /// Supporting normal, `sum b_i = 1`.
    pub b: Vec<Q>,
    /// `b_{n+1} = d sum b_i`.
    pub b_next: Q,
    pub d: Q,
    /// Initial box-shrink factor `N`.
    pub n_box: usize,
    /// Maximum number of times `N` is doubled when the window check fails.
    pub max_doublings: usize,
    /// Strictly decreasing values in `(0, 1)`.
    pub r_schedule: Vec<f64>,
    pub s: Q,
    pub p_inv: Q,
    pub q_inv: Q,
    /// Points per axis, last axis included.
    pub grid: Vec<usize>,
    /// Half-widths in units of the axis scale (`r^{b_i}`, `c_i` or `r^{b_{n+1}}`).
    pub half_widths: Vec<f64>,
    /// Scales `c_i` used instead of `r^{b_i}` on axes with `b_i = 0`.
    pub const_dims: Vec<f64>,
    /// Quadrature nodes per grid cell along each leading axis.
    pub quad_subdiv: usize,
}

impl BoxTestConfig {
    /// Default layout for a given supporting normal and kernel support.
    pub fn new(support: &DiagonalSupport, kernel_support: f64, s: Q, p_inv: Q, q_inv: Q) -> Self {
        let n = support.b.len();
        let mut grid = vec![1024; n];
        grid.push(4096);
        let mut half_widths = vec![4.0; n];
        half_widths.push(128.0);
        Self {
            b: support.b.clone(),
            b_next: &support.d * support.b_sum(),
            d: support.d.clone(),
            n_box: 8,
            max_doublings: 3,
            r_schedule: vec![0.125, 0.0625, 0.03125, 0.015625],
            s,
            p_inv,
            q_inv,
            grid,
            half_widths,
            const_dims: vec![kernel_support / 4.0; n],
            quad_subdiv: 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// `(sum b_i)(1 - s d + (d+1)/q - (d+1)/p)`.
    pub fn predicted_exponent(&self) -> Q {
        let sum_b: Q = self.b.iter().sum();
        let d1 = &self.d + Q::one();
        sum_b * (Q::one() - &self.s * &self.d + &d1 * &self.q_inv - &d1 * &self.p_inv)
    }

    fn axis_scale(&self, axis: usize, r: f64) -> f64 {
        if axis == self.dim() {
            r.powf(to_f64(&self.b_next))
        } else if self.b[axis].is_zero() {
            self.const_dims[axis]
        } else {
            r.powf(to_f64(&self.b[axis]))
        }
    }

    pub fn grid_at(&self, r: f64) -> Grid {
        let half: Vec<f64> = (0..=self.dim())
            .map(|a| self.half_widths[a] * self.axis_scale(a, r))
            .collect();
        Grid::centered(&self.grid, &half)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.grid.len() != n + 1 || self.half_widths.len() != n + 1 || self.const_dims.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                got: self.grid.len(),
            });
        }
        if self.b_next != &self.d * self.b.iter().sum::<Q>() {
            return Err(Error::Input("b_{n+1} must equal d * sum b_i".into()));
        }
        if self.r_schedule.len() < 4 {
            return Err(Error::Input("need at least 4 values of r".into()));
        }
        if self
            .r_schedule
            .windows(2)
            .any(|w| !(w[1] < w[0]))
            || self.r_schedule.iter().any(|&r| !(r > 0.0 && r < 1.0))
        {
            return Err(Error::Input(
                "r schedule must be strictly decreasing inside (0, 1)".into(),
            ));
        }
        let first = self.r_schedule[0];
        let last = *self.r_schedule.last().expect("nonempty");
        if first / last < 8.0 - 1e-12 {
            return Err(Error::Input("r schedule must span a factor of at least 8".into()));
        }
        for x in [&self.p_inv, &self.q_inv] {
            if !(x.is_positive_strict() && *x < Q::one()) {
                return Err(Error::Domain("1/p and 1/q must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    /// At least 16 cells across `r^{b_i}/N` on the leading axes and 8 points per
    /// period of the top frequency on the last axis.
    fn check_resolution(&self, n_box: usize) -> Result<()> {
        let n = self.dim();
        for a in 0..n {
            let cells_across = self.grid[a] as f64 / (2.0 * self.half_widths[a] * n_box as f64);
            if cells_across < 16.0 {
                return Err(Error::Resolution(format!(
                    "axis {} has {:.1} cells across the box width r^b/N (N = {n_box}); need 16, i.e. at least {} points",
                    a + 1,
                    cells_across,
                    (32.0 * self.half_widths[a] * n_box as f64).ceil()
                )));
            }
        }
        let per_period = self.grid[n] as f64 / (2.0 * self.half_widths[n] * 2.0);
        if per_period < 8.0 {
            return Err(Error::Resolution(format!(
                "last axis has {per_period:.1} points per period of the top frequency; need 8, i.e. at least {} points",
                (32.0 * self.half_widths[n]).ceil()
            )));
        }
        Ok(())
    }
}

trait StrictPositive {
    fn is_positive_strict(&self) -> bool;
}

impl StrictPositive for Q {
    fn is_positive_strict(&self) -> bool {
        *self > Q::zero()
    }
}

/// `f_{r,N}(x) = psi_1(x_{n+1}/r^{b_{n+1}}) prod psi(N x_i / r^{b_i})`.
pub fn build_test_function(cfg: &BoxTestConfig, r: f64, n_box: usize) -> Result<Field> {
    cfg.check_resolution(n_box)?;
    let n = cfg.dim();
    let grid = cfg.grid_at(r);
    let profile = reference_profile(cfg.grid[n], cfg.half_widths[n], 0.0);
    let m = grid.row_len();
    let mut field = Field::zeros(grid.clone());
    field.data.par_chunks_mut(m).enumerate().for_each(|(row, out)| {
        let idx = grid.row_index(row);
        let mut amp = 1.0;
        for a in 0..n {
            amp *= psi(n_box as f64 * grid.coord(a, idx[a]) / cfg.axis_scale(a, r));
        }
        if amp != 0.0 {
            for (o, p) in out.iter_mut().zip(&profile) {
                *o = p * amp;
            }
        }
    });
    Ok(field)
}

/// Anchor and tolerances for the window lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    /// `p*`, the maximiser of `|Psi_s|` (reference coordinates).
    pub anchor: f64,
    pub eps0: f64,
    pub delta0: f64,
}

/// `eps0 = |Psi_s(p*)|/2`; `delta0` the largest half-radius on which
/// `|Psi_s| > eps0` and the phase stays within `pi/4` of its value at `p*`.
pub fn discover_window(profile: &[Complex64], half: f64) -> Window {
    let m = profile.len();
    let step = 2.0 * half / m as f64;
    let (imax, vmax) = profile
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.norm()))
        .fold((0, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let eps0 = vmax / 2.0;
    let arg0 = profile[imax].arg();
    let ok = |i: usize| {
        let z = profile[i];
        let mut da = (z.arg() - arg0).abs();
        if da > std::f64::consts::PI {
            da = 2.0 * std::f64::consts::PI - da;
        }
        z.norm() > eps0 && da < std::f64::consts::FRAC_PI_4
    };
    let mut reach = 1usize;
    while reach < m / 2 {
        let left = imax.checked_sub(reach).map_or(false, ok);
        let right = imax + reach < m && ok(imax + reach);
        if !(left && right) {
            break;
        }
        reach += 1;
    }
    Window {
        anchor: -half + imax as f64 * step,
        eps0,
        delta0: reach as f64 * step / 2.0,
    }
}

/// Sup of `|S|` over a lattice on the box `|t_i| < r^{b_i}/(2N)`.
fn sup_phase_on_box(phase: &SparsePolynomial, cfg: &BoxTestConfig, r: f64, n_box: usize) -> f64 {
    let n = cfg.dim();
    let per_axis = 9usize;
    let count = per_axis.pow(n as u32);
    let mut best: f64 = 0.0;
    let mut t = vec![0.0; n];
    for k in 0..count {
        let mut rest = k;
        for (a, ta) in t.iter_mut().enumerate() {
            let i = rest % per_axis;
            rest /= per_axis;
            let h = cfg.axis_scale(a, r) / (2.0 * n_box as f64);
            *ta = -h + 2.0 * h * i as f64 / (per_axis - 1) as f64;
        }
        best = best.max(phase.eval_unchecked(&t).abs());
    }
    best
}

/// Smallest `N = n_box * 2^j` (j up to `max_doublings`) with
/// `sup |S| <= delta0 r^{b_{n+1}}` on every box of the schedule.
pub fn choose_n(cfg: &BoxTestConfig, phase: &SparsePolynomial, window: &Window) -> usize {
    let mut n_box = cfg.n_box;
    for _ in 0..cfg.max_doublings {
        let ok = cfg.r_schedule.iter().all(|&r| {
            sup_phase_on_box(phase, cfg, r, n_box) <= window.delta0 * cfg.axis_scale(cfg.dim(), r)
        });
        if ok {
            break;
        }
        n_box *= 2;
    }
    n_box
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharpnessVerdict {
    GrowthObserved,
    NoGrowth,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioPoint {
    pub r: f64,
    pub ratio: f64,
    pub norm_q: f64,
    pub norm_p: f64,
    /// `min |D^s T f|` over the window.
    pub window_lb: f64,
    /// `window_lb / r^{sum b - s b_{n+1}}`.
    pub eps1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub per_r: Vec<RatioPoint>,
    pub fitted_slope: f64,
    #[serde(with = "rational::serde_q")]
    pub predicted_exponent: Q,
    pub predicted_exponent_value: f64,
    pub verdict: SharpnessVerdict,
    pub reason: String,
    #[serde(with = "rational::serde_q")]
    pub s: Q,
    #[serde(with = "rational::serde_q")]
    pub p_inv: Q,
    #[serde(with = "rational::serde_q")]
    pub q_inv: Q,
    #[serde(with = "rational::serde_qvec")]
    pub b: Vec<Q>,
    #[serde(with = "rational::serde_q")]
    pub b_next: Q,
    pub n_box: usize,
    pub grid: Vec<usize>,
    pub window: Window,
}

/// Slopes at or below `-MARGIN` count as growth, at or above `MARGIN` as decay.
pub const MARGIN: f64 = 0.05;
/// Allowed relative distance between fitted and predicted exponents.
pub const RELATIVE_TOLERANCE: f64 = 0.15;

pub fn verdict_for(ratios: &[(f64, f64)], predicted: f64) -> (f64, SharpnessVerdict, String) {
    let xs: Vec<f64> = ratios.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = ratios.iter().map(|(_, v)| v.ln()).collect();
    let (slope, _) = linear_fit(&xs, &ys);
    let increasing = ratios.windows(2).all(|w| w[1].1 > w[0].1);
    let decreasing = ratios.windows(2).all(|w| w[1].1 < w[0].1);
    if !(increasing || decreasing) || !slope.is_finite() {
        return (
            slope,
            SharpnessVerdict::Inconclusive,
            "norm ratios are not monotone in r".into(),
        );
    }
    if slope <= -MARGIN {
        let rel = (slope - predicted).abs() / predicted.abs();
        if predicted < 0.0 && rel <= RELATIVE_TOLERANCE {
            (
                slope,
                SharpnessVerdict::GrowthObserved,
                format!("slope {slope:.4} within {:.1}% of the predicted {predicted:.4}", rel * 100.0),
            )
        } else {
            (
                slope,
                SharpnessVerdict::Inconclusive,
                format!("growth observed but slope {slope:.4} is not within 15% of the predicted {predicted:.4}"),
            )
        }
    } else if slope >= MARGIN {
        (
            slope,
            SharpnessVerdict::NoGrowth,
            format!("ratio decays as r -> 0 (slope {slope:.4})"),
        )
    } else {
        (
            slope,
            SharpnessVerdict::Inconclusive,
            format!("slope {slope:.4} lies in the band (-{MARGIN}, {MARGIN})"),
        )
    }
}

pub fn run_sharpness(
    cfg: &BoxTestConfig,
    phase: &SparsePolynomial,
    kernel: &KernelSpec,
) -> Result<SharpnessReport> {
    run_sharpness_multi(cfg, std::slice::from_ref(&cfg.s), phase, kernel).map(|mut v| v.remove(0))
}

/// The box test for several values of `s`, sharing `T f_{r,N}` between them.
pub fn run_sharpness_multi(
    cfg: &BoxTestConfig,
    s_values: &[Q],
    phase: &SparsePolynomial,
    kernel: &KernelSpec,
) -> Result<Vec<SharpnessReport>> {
    cfg.validate()?;
    let n = cfg.dim();
    if phase.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phase.dim(),
        });
    }
    let p = 1.0 / to_f64(&cfg.p_inv);
    let q = 1.0 / to_f64(&cfg.q_inv);
    let sum_b: f64 = cfg.b.iter().map(to_f64).sum();
    let b_next = to_f64(&cfg.b_next);

    // window parameters and N from the smallest |s| profile are shared; recompute per s
    let windows: Vec<Window> = s_values
        .iter()
        .map(|s| {
            discover_window(
                &reference_profile(cfg.grid[n], cfg.half_widths[n], to_f64(s)),
                cfg.half_widths[n],
            )
        })
        .collect();
    let n_box = windows
        .iter()
        .map(|w| choose_n(cfg, phase, w))
        .max()
        .unwrap_or(cfg.n_box);

    let mut points: Vec<Vec<RatioPoint>> = vec![Vec::new(); s_values.len()];
    for &r in &cfg.r_schedule {
        let f = build_test_function(cfg, r, n_box)?;
        let norm_p = f.norm_lp(p);
        let tf = apply_t(&f, phase, kernel, cfg.quad_subdiv)?;
        drop(f);
        for (si, s) in s_values.iter().enumerate() {
            let s = to_f64(s);
            let h = apply_ds(&tf, s);
            let norm_q = h.norm_lp(q);
            let window_lb = window_minimum(&h, cfg, r, n_box, &windows[si]);
            let scale = r.powf(sum_b - s * b_next);
            points[si].push(RatioPoint {
                r,
                ratio: norm_q / norm_p,
                norm_q,
                norm_p,
                window_lb,
                eps1: window_lb / scale,
            });
        }
    }

    let mut reports = Vec::with_capacity(s_values.len());
    for ((s, per_r), window) in s_values.iter().zip(points).zip(windows) {
        let mut one = cfg.clone();
        one.s = s.clone();
        let predicted = one.predicted_exponent();
        let pairs: Vec<(f64, f64)> = per_r.iter().map(|p| (p.r, p.ratio)).collect();
        let (slope, verdict, reason) = verdict_for(&pairs, to_f64(&predicted));
        reports.push(SharpnessReport {
            per_r,
            fitted_slope: slope,
            predicted_exponent_value: to_f64(&predicted),
            predicted_exponent: predicted,
            verdict,
            reason,
            s: s.clone(),
            p_inv: cfg.p_inv.clone(),
            q_inv: cfg.q_inv.clone(),
            b: cfg.b.clone(),
            b_next: cfg.b_next.clone(),
            n_box,
            grid: cfg.grid.clone(),
            window,
        });
    }
    Ok(reports)
}

/// `min |h|` over `|x_{n+1} - r^{b_{n+1}} p*| < delta0 r^{b_{n+1}}`, `|x_i| < r^{b_i}/(2N)`.
fn window_minimum(h: &Field, cfg: &BoxTestConfig, r: f64, n_box: usize, w: &Window) -> f64 {
    let grid = &h.grid;
    let n = cfg.dim();
    let last_scale = cfg.axis_scale(n, r);
    let m = grid.row_len();
    let cols: Vec<usize> = (0..m)
        .filter(|&j| (grid.coord(n, j) - last_scale * w.anchor).abs() < w.delta0 * last_scale)
        .collect();
    let mut best = f64::INFINITY;
    for row in 0..grid.rows() {
        let idx = grid.row_index(row);
        let inside = (0..n).all(|a| grid.coord(a, idx[a]).abs() < cfg.axis_scale(a, r) / (2.0 * n_box as f64));
        if !inside {
            continue;
        }
        let vals = h.row(row);
        for &j in &cols {
            best = best.min(vals[j].norm());
        }
    }
    if best.is_finite() {
        best
    } else {
        f64::NAN
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn small_cfg(s: Q) -> BoxTestConfig {
        let support = DiagonalSupport {
            d: qi(3),
            b: vec![qi(1)],
            value: qi(3),
        };
        let mut cfg = BoxTestConfig::new(&support, 0.25, s, q(1, 2), q(1, 4));
        cfg.grid = vec![256, 1024];
        cfg.half_widths = vec![2.0, 32.0];
        cfg.n_box = 4;
        cfg
    }

    #[test]
    fn bump_shape() {
        assert_eq!(psi(0.5), 1.0);
        assert_eq!(psi(-1.0), 1.0);
        assert_eq!(psi(2.5), 0.0);
        assert!((psi(1.5) - 0.5).abs() < 1e-12);
        assert!(psi(1.2) > psi(1.8));
        assert_eq!(psi(1.3), psi(-1.3));
    }

    #[test]
    fn psi1_spectrum_is_confined_to_one_two() {
        let (m, half) = (1024, 32.0);
        let mut prof = reference_profile(m, half, 0.0);
        assert!((prof[m / 2].re - 1.0).abs() < 1e-12 && prof[m / 2].im.abs() < 1e-12);
        FftPlanner::new().plan_fft_forward(m).process(&mut prof);
        let freqs = fft_frequencies(m, 2.0 * half / m as f64);
        let peak = prof.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (z, f) in prof.iter().zip(&freqs) {
            if *f <= 1.0 || *f >= 2.0 {
                assert!(z.norm() < 1e-8 * peak, "leak at {f}");
            }
        }
    }

    #[test]
    fn ds_identity_composition_and_scaling() {
        let cfg = small_cfg(q(1, 10));
        let f = build_test_function(&cfg, 0.5, 4).unwrap();
        assert_eq!(apply_ds(&f, 0.0), f);
        let a = apply_ds(&apply_ds(&f, 0.3), -0.1);
        let b = apply_ds(&f, 0.2);
        let diff = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-9 * b.max_abs(), "{diff}");

        // D^s f_r = r^{-s b_{n+1}} Psi_s(x / r^{b_{n+1}}) on the centre row
        let s = 0.3;
        let psis = reference_profile(1024, 32.0, s);
        for r in [0.5, 0.25] {
            let g = apply_ds(&build_test_function(&cfg, r, 4).unwrap(), s);
            let row = g.row(128);
            let scale = r.powf(-3.0 * s);
            let err = row
                .iter()
                .zip(&psis)
                .map(|(a, b)| (a - b * scale).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-9 * scale, "r = {r}: {err}");
        }
    }

    #[test]
    fn averaging_a_constant() {
        // field = 1 everywhere on a large box, K = 1 on [-1/4, 1/4]: Tf = 1/2 away from the edges
        let grid = Grid::centered(&[64, 256], &[2.0, 4.0]);
        let mut f = Field::zeros(grid);
        f.data.iter_mut().for_each(|z| *z = Complex64::one());
        let phase = SparsePolynomial::from_int_terms(1, &[(&[2], 1)]).unwrap();
        let tf = apply_t(&f, &phase, &KernelSpec::unit(1, 0.25), 2).unwrap();
        let v = tf.row(32)[128];
        assert!((v.re - 0.5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn averaging_matches_dense_quadrature() {
        // S = t^2, K = 1 on [-1/4, 1/4], smooth compactly supported field
        let grid = Grid::centered(&[512, 512], &[1.0, 0.5]);
        let mut f = Field::zeros(grid.clone());
        let g = |x1: f64, x2: f64| psi(4.0 * x1) * psi(8.0 * x2) * (3.0 * x2).cos();
        for i in 0..512 {
            for j in 0..512 {
                f.data[i * 512 + j] = Complex64::new(g(grid.coord(0, i), grid.coord(1, j)), 0.0);
            }
        }
        let phase = SparsePolynomial::from_int_terms(1, &[(&[2], 1)]).unwrap();
        let tf = apply_t(&f, &phase, &KernelSpec::unit(1, 0.25), 2).unwrap();
        let i0 = 256; // x1 = 0
        for j in (100..420).step_by(32) {
            let x2 = grid.coord(1, j);
            let dense: f64 = (0..200_000)
                .map(|k| {
                    let t = -0.25 + (k as f64 + 0.5) * 0.5 / 200_000.0;
                    g(-t, x2 - t * t)
                })
                .sum::<f64>()
                * 0.5
                / 200_000.0;
            let got = tf.row(i0)[j].re;
            assert!((got - dense).abs() < 2e-3, "x2 = {x2}: {got} vs {dense}");
        }
    }

    #[test]
    fn whole_cell_shifts_commute_with_t() {
        let grid = Grid::centered(&[128, 256], &[1.0, 1.0]);
        let mut f = Field::zeros(grid.clone());
        for i in 40..60 {
            for j in 100..140 {
                f.data[i * 256 + j] = Complex64::new(((i * 7 + j) % 11) as f64, 1.0);
            }
        }
        let mut shifted = Field::zeros(grid.clone());
        for i in 0..123 {
            for j in 0..256 {
                shifted.data[(i + 5) * 256 + j] = f.data[i * 256 + j];
            }
        }
        let phase = SparsePolynomial::from_int_terms(1, &[(&[3], 1)]).unwrap();
        let kernel = KernelSpec::unit(1, 0.25);
        let a = apply_t(&f, &phase, &kernel, 2).unwrap();
        let b = apply_t(&shifted, &phase, &kernel, 2).unwrap();
        for i in 20..100 {
            for j in 0..256 {
                let d = (a.data[i * 256 + j] - b.data[(i + 5) * 256 + j]).norm();
                assert!(d < 1e-12, "({i}, {j}): {d}");
            }
        }
    }

    #[test]
    fn norm_of_test_function_scales_like_r_to_the_two() {
        // ||f_r||_2 ~ r^{(1+3)/2}
        let cfg = small_cfg(qi(0));
        let a = build_test_function(&cfg, 0.5, 4).unwrap().norm_lp(2.0);
        let b = build_test_function(&cfg, 0.25, 4).unwrap().norm_lp(2.0);
        let slope = (a / b).ln() / 2f64.ln();
        assert!((slope - 2.0).abs() < 1e-9, "{slope}");
    }

    #[test]
    fn resolution_is_enforced() {
        let mut cfg = small_cfg(qi(0));
        cfg.grid = vec![64, 1024];
        assert!(matches!(build_test_function(&cfg, 0.5, 4), Err(Error::Resolution(_))));
        cfg.grid = vec![256, 256];
        assert!(matches!(build_test_function(&cfg, 0.5, 4), Err(Error::Resolution(_))));
    }

    #[test]
    fn predicted_exponent_bookkeeping() {
        assert_eq!(small_cfg(q(1, 10)).predicted_exponent(), q(-3, 10));
        assert_eq!(small_cfg(q(-1, 10)).predicted_exponent(), q(3, 10));
        assert_eq!(small_cfg(qi(0)).predicted_exponent(), qi(0));
    }

    #[test]
    fn verdict_rules() {
        let grow: Vec<(f64, f64)> = [0.125, 0.0625, 0.03125, 0.015625]
            .iter()
            .map(|&r: &f64| (r, r.powf(-0.3)))
            .collect();
        assert_eq!(verdict_for(&grow, -0.3).1, SharpnessVerdict::GrowthObserved);
        assert_eq!(verdict_for(&grow, -0.6).1, SharpnessVerdict::Inconclusive);
        let decay: Vec<(f64, f64)> = grow.iter().map(|&(r, v)| (r, 1.0 / v)).collect();
        assert_eq!(verdict_for(&decay, 0.3).1, SharpnessVerdict::NoGrowth);
        let flat: Vec<(f64, f64)> = grow.iter().map(|&(r, _)| (r, 1.0 + r)).collect();
        assert_eq!(verdict_for(&flat, 0.0).1, SharpnessVerdict::Inconclusive);
        let zigzag = vec![(0.5, 1.0), (0.25, 2.0), (0.125, 1.5), (0.0625, 3.0)];
        assert_eq!(verdict_for(&zigzag, -0.3).1, SharpnessVerdict::Inconclusive);
    }

    #[test]
    fn window_of_psi_s() {
        let prof = reference_profile(1024, 32.0, 0.1);
        let w = discover_window(&prof, 32.0);
        assert!(w.eps0 > 0.0 && w.delta0 > 0.0);
        assert!(w.anchor.abs() < 2.0);
    }

    #[test]
    fn small_box_test_shows_growth() {
        let cfg = BoxTestConfig {
            r_schedule: vec![0.5, 0.25, 0.125, 0.0625],
            ..small_cfg(q(1, 10))
        };
        let phase = SparsePolynomial::from_int_terms(1, &[(&[3], 1)]).unwrap();
        let reports =
            run_sharpness_multi(&cfg, &[q(1, 10), q(-1, 10)], &phase, &KernelSpec::unit(1, 0.25)).unwrap();
        assert_eq!(reports[0].verdict, SharpnessVerdict::GrowthObserved, "{:?}", reports[0]);
        assert_eq!(reports[1].verdict, SharpnessVerdict::NoGrowth, "{:?}", reports[1]);
    }
}
