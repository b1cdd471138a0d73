//! Total-variation reconstruction from sub-sampled Walsh measurements.
//!
//! Solves `min sum_i ||D_i x||  s.t.  Phi x = y` through the augmented Lagrangian
//!
//! ```text
//! L(x, w, nu, lambda) = sum_i ( ||w_i|| - nu_i^T (D_i x - w_i) + beta/2 ||D_i x - w_i||^2 )
//!                       - lambda^T (Phi x - y) + mu/2 ||Phi x - y||^2
//! ```
//!
//! alternating an exact shrinkage step in `w`, a projected gradient step in `x`
//! (Barzilai-Borwein step length with backtracking), and multiplier updates.
//!
//! Internally intensities are divided by 255 and `Phi` is scaled by `1/sqrt(N)`
//! so its rows are orthonormal; the measurement operator is applied with the
//! fast Walsh-Hadamard transform. Everything is indexed by natural row so the
//! result does not depend on the order in which rows were acquired.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gray::GrayImage;
use crate::hadamard::{fwht, HadamardMatrix};
use crate::sampling::MeasurementSet;

const INTENSITY_SCALE: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TvType {
    Isotropic,
    Anisotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Fidelity penalty weight.
    pub mu: f64,
    /// Gradient-splitting penalty weight.
    pub beta: f64,
    /// Relative-change stopping threshold between outer iterations.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Project iterates onto `x >= 0`.
    pub nonneg: bool,
    pub tv_type: TvType,
    /// Keep a per-outer-iteration trace in the result.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu: 256.0,
            beta: 32.0,
            tol: 1e-4,
            max_outer: 300,
            max_inner: 20,
            nonneg: true,
            tv_type: TvType::Isotropic,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("beta", self.beta), ("tol", self.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "solver {name} must be positive, got {v}"
                )));
            }
        }
        if !(8.0 * self.beta + self.mu).is_finite() {
            return Err(Error::Config(
                "solver penalties mu and beta are too large".into(),
            ));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config(
                "solver iteration limits must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Total variation of the iterate, in pixel units.
    pub objective: f64,
    /// `||Phi x - y|| / ||y||`.
    pub residual: f64,
}

pub fn write_trace_csv<W: Write>(trace: &[TraceRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "iteration,objective,residual")?;
    for t in trace {
        writeln!(out, "{},{},{}", t.iteration, t.objective, t.residual)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Reconstruction clamped to `[0, 255]`.
    pub image: GrayImage,
    pub outer_iterations: usize,
    /// Total variation of the returned image.
    pub final_objective: f64,
    /// Relative measurement residual of the returned image.
    pub final_residual: f64,
    pub converged: bool,
    pub trace: Vec<TraceRecord>,
}

// ---------------------------------------------------------------------------
// discrete gradient

/// Forward differences, zero on the far edge: `(x[i][j+1] - x[i][j], x[i+1][j] - x[i][j])`.
fn gradient_into(x: &[f64], side: usize, out: &mut [[f64; 2]]) {
    for i in 0..side {
        for j in 0..side {
            let k = i * side + j;
            let h = if j + 1 < side { x[k + 1] - x[k] } else { 0.0 };
            let v = if i + 1 < side {
                x[k + side] - x[k]
            } else {
                0.0
            };
            out[k] = [h, v];
        }
    }
}

/// Adjoint of [`gradient_into`] (a negative divergence).
fn gradient_adjoint_into(w: &[[f64; 2]], side: usize, out: &mut [f64]) {
    for i in 0..side {
        for j in 0..side {
            let k = i * side + j;
            let mut acc = 0.0;
            if j + 1 < side {
                acc -= w[k][0];
            }
            if j > 0 {
                acc += w[k - 1][0];
            }
            if i + 1 < side {
                acc -= w[k][1];
            }
            if i > 0 {
                acc += w[k - side][1];
            }
            out[k] = acc;
        }
    }
}

/// Per-pixel `(horizontal, vertical)` forward differences of `x`.
pub fn discrete_gradient(x: &GrayImage) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; x.len()];
    gradient_into(x.pixels(), x.side(), &mut out);
    out
}

/// `D^T w` for a row-major field of per-pixel gradients.
pub fn gradient_adjoint(w: &[[f64; 2]], side: usize) -> Result<Vec<f64>> {
    if w.len() != side * side {
        return Err(Error::Shape(format!(
            "{} gradient vectors do not match a {side}x{side} grid",
            w.len()
        )));
    }
    let mut out = vec![0.0; w.len()];
    gradient_adjoint_into(w, side, &mut out);
    Ok(out)
}

pub fn total_variation(x: &GrayImage, tv_type: TvType) -> f64 {
    discrete_gradient(x)
        .iter()
        .map(|g| match tv_type {
            TvType::Isotropic => g[0].hypot(g[1]),
            TvType::Anisotropic => g[0].abs() + g[1].abs(),
        })
        .sum()
}

// ---------------------------------------------------------------------------
// shrinkage

/// `max(||z|| - t, 0) z / ||z||`, the minimizer of `||w|| + 1/(2t) ||w - z||^2`.
pub fn shrink(z: [f64; 2], threshold: f64) -> [f64; 2] {
    let norm = z[0].hypot(z[1]);
    if norm <= threshold {
        return [0.0, 0.0];
    }
    let scale = (norm - threshold) / norm;
    [z[0] * scale, z[1] * scale]
}

/// Scalar soft threshold, the anisotropic counterpart of [`shrink`].
pub fn soft_threshold(z: f64, threshold: f64) -> f64 {
    z.signum() * (z.abs() - threshold).max(0.0)
}

// ---------------------------------------------------------------------------
// measurement operator

/// `Phi / sqrt(N)` restricted to a set of natural rows, mapping row-major images
/// to natural-indexed coefficient vectors (zero on unselected rows).
#[derive(Debug, Clone)]
pub struct SensingOperator {
    side: usize,
    mask: Vec<bool>,
    scale: f64,
}

impl SensingOperator {
    pub fn new(side: usize, rows: &[usize]) -> Result<Self> {
        let n = side
            .checked_mul(side)
            .filter(|n| n.is_power_of_two())
            .ok_or_else(|| Error::Shape(format!("side {side} is not a power of two")))?;
        let mut mask = vec![false; n];
        for &r in rows {
            if r >= n {
                return Err(Error::Shape(format!("row index {r} outside [0, {n})")));
            }
            if std::mem::replace(&mut mask[r], true) {
                return Err(Error::Config(format!("row {r} measured more than once")));
            }
        }
        Ok(Self {
            side,
            mask,
            scale: 1.0 / (n as f64).sqrt(),
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn is_selected(&self, row: usize) -> bool {
        self.mask[row]
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let r = self.side;
        for i in 0..r {
            for j in 0..r {
                out[j * r + i] = x[i * r + j];
            }
        }
        fwht(out);
        for (o, &m) in out.iter_mut().zip(&self.mask) {
            *o = if m { *o * self.scale } else { 0.0 };
        }
    }

    pub fn adjoint_into(&self, coeffs: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        for ((s, &c), &m) in scratch.iter_mut().zip(coeffs).zip(&self.mask) {
            *s = if m { c * self.scale } else { 0.0 };
        }
        fwht(scratch);
        let r = self.side;
        for i in 0..r {
            for j in 0..r {
                out[i * r + j] = scratch[j * r + i];
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn adjoint(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let mut scratch = vec![0.0; self.len()];
        self.adjoint_into(coeffs, &mut out, &mut scratch);
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// x-subproblem

/// The part of the augmented Lagrangian that is smooth in `x` for fixed
/// `w`, `nu` and `lambda` (internal units, natural-indexed `b` and `lambda`).
#[derive(Debug, Clone)]
pub struct SmoothPart<'a> {
    pub op: &'a SensingOperator,
    pub b: &'a [f64],
    pub w: &'a [[f64; 2]],
    pub nu: &'a [[f64; 2]],
    pub lambda: &'a [f64],
    pub mu: f64,
    pub beta: f64,
}

/// Cached linear images of an iterate.
#[derive(Debug, Clone)]
struct Iterate {
    x: Vec<f64>,
    dx: Vec<[f64; 2]>,
    ax: Vec<f64>,
}

impl Iterate {
    fn new(x: Vec<f64>, op: &SensingOperator) -> Self {
        let mut dx = vec![[0.0; 2]; x.len()];
        gradient_into(&x, op.side, &mut dx);
        let ax = op.apply(&x);
        Self { x, dx, ax }
    }

    fn update(&mut self, op: &SensingOperator) {
        gradient_into(&self.x, op.side, &mut self.dx);
        op.apply_into(&self.x, &mut self.ax);
    }
}

impl SmoothPart<'_> {
    fn tv_value(&self, dx: &[[f64; 2]]) -> f64 {
        dx.iter()
            .zip(self.w)
            .zip(self.nu)
            .map(|((d, w), nu)| {
                let r = [d[0] - w[0], d[1] - w[1]];
                -(nu[0] * r[0] + nu[1] * r[1]) + 0.5 * self.beta * (r[0] * r[0] + r[1] * r[1])
            })
            .sum()
    }

    fn fidelity_value(&self, ax: &[f64]) -> f64 {
        ax.iter()
            .zip(self.b)
            .zip(self.lambda)
            .map(|((a, b), l)| {
                let r = a - b;
                -l * r + 0.5 * self.mu * r * r
            })
            .sum()
    }

    fn value_of(&self, it: &Iterate) -> f64 {
        self.tv_value(&it.dx) + self.fidelity_value(&it.ax)
    }

    /// `A^T (mu (A x - b) - lambda)`.
    fn fidelity_gradient(&self, ax: &[f64], out: &mut [f64], scratch: &mut [f64], tmp: &mut [f64]) {
        for ((t, (a, b)), l) in tmp.iter_mut().zip(ax.iter().zip(self.b)).zip(self.lambda) {
            *t = self.mu * (a - b) - l;
        }
        self.op.adjoint_into(tmp, out, scratch);
    }

    /// `D^T (beta (D x - w) - nu)`, added into `out`.
    fn add_tv_gradient(
        &self,
        dx: &[[f64; 2]],
        out: &mut [f64],
        field: &mut [[f64; 2]],
        tmp: &mut [f64],
    ) {
        for (((f, d), w), nu) in field.iter_mut().zip(dx).zip(self.w).zip(self.nu) {
            *f = [
                self.beta * (d[0] - w[0]) - nu[0],
                self.beta * (d[1] - w[1]) - nu[1],
            ];
        }
        gradient_adjoint_into(field, self.op.side, tmp);
        for (o, t) in out.iter_mut().zip(tmp.iter()) {
            *o += t;
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value_of(&Iterate::new(x.to_vec(), self.op))
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let it = Iterate::new(x.to_vec(), self.op);
        let n = x.len();
        let mut g = vec![0.0; n];
        let (mut scratch, mut tmp) = (vec![0.0; n], vec![0.0; n]);
        self.fidelity_gradient(&it.ax, &mut g, &mut scratch, &mut tmp);
        let mut field = vec![[0.0; 2]; n];
        self.add_tv_gradient(&it.dx, &mut g, &mut field, &mut tmp);
        g
    }
}

// ---------------------------------------------------------------------------
// solver

pub fn reconstruct(
    ms: &MeasurementSet,
    h: &HadamardMatrix,
    cfg: &SolverConfig,
) -> Result<ReconstructionResult> {
    let side = h.pattern_side().ok_or_else(|| {
        Error::Shape(format!(
            "Hadamard order {} does not correspond to a square image",
            h.order()
        ))
    })?;
    reconstruct_from(&ms.y_noisy, &ms.row_indices, side, cfg)
}

/// Reconstructs a `side x side` image from projections `y[m]` onto natural rows `rows[m]`.
pub fn reconstruct_from(
    y: &[f64],
    rows: &[usize],
    side: usize,
    cfg: &SolverConfig,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    if y.len() != rows.len() {
        return Err(Error::Shape(format!(
            "{} measurements for {} rows",
            y.len(),
            rows.len()
        )));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::Config(format!("non-finite measurement {bad}")));
    }
    let op = SensingOperator::new(side, rows)?;
    let n = op.len();
    let data_scale = op.scale / INTENSITY_SCALE;
    let mut b = vec![0.0; n];
    for (&r, &v) in rows.iter().zip(y) {
        b[r] = v * data_scale;
    }
    let b_norm = norm(&b);

    let (mu, beta) = (cfg.mu, cfg.beta);
    // Lipschitz bound of the x-subproblem gradient: ||D||^2 <= 8, ||A|| <= 1.
    let min_step = 1.0 / (8.0 * beta + mu);

    let mut x0 = op.adjoint(&b);
    if cfg.nonneg {
        x0.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    let mut cur = Iterate::new(x0, &op);
    let mut trial = cur.clone();

    let mut w = vec![[0.0; 2]; n];
    let mut nu = vec![[0.0; 2]; n];
    let mut lambda = vec![0.0; n];

    let mut grad_fid = vec![0.0; n];
    let mut grad_fid_trial = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let (mut scratch, mut tmp) = (vec![0.0; n], vec![0.0; n]);
    let mut field = vec![[0.0; 2]; n];
    let mut step_len = min_step;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut outer_iterations = 0;

    {
        let sp = SmoothPart {
            op: &op,
            b: &b,
            w: &w,
            nu: &nu,
            lambda: &lambda,
            mu,
            beta,
        };
        sp.fidelity_gradient(&cur.ax, &mut grad_fid, &mut scratch, &mut tmp);
    }

    for outer in 1..=cfg.max_outer {
        outer_iterations = outer;
        let x_prev_outer = cur.x.clone();

        for _ in 0..cfg.max_inner {
            let inv_beta = 1.0 / beta;
            for ((wi, d), nui) in w.iter_mut().zip(&cur.dx).zip(&nu) {
                let z = [d[0] - nui[0] * inv_beta, d[1] - nui[1] * inv_beta];
                *wi = match cfg.tv_type {
                    TvType::Isotropic => shrink(z, inv_beta),
                    TvType::Anisotropic => [
                        soft_threshold(z[0], inv_beta),
                        soft_threshold(z[1], inv_beta),
                    ],
                };
            }
            let sp = SmoothPart {
                op: &op,
                b: &b,
                w: &w,
                nu: &nu,
                lambda: &lambda,
                mu,
                beta,
            };

            g.copy_from_slice(&grad_fid);
            sp.add_tv_gradient(&cur.dx, &mut g, &mut field, &mut tmp);
            let f0 = sp.value_of(&cur);
            if !f0.is_finite() {
                return Err(Error::Diverged { iterations: outer });
            }

            // projected gradient step with backtracking on the quadratic upper model
            let mut alpha = step_len.max(min_step);
            let f1 = loop {
                for ((t, x), gi) in trial.x.iter_mut().zip(&cur.x).zip(&g) {
                    let v = x - alpha * gi;
                    *t = if cfg.nonneg { v.max(0.0) } else { v };
                }
                trial.update(&op);
                let f1 = sp.value_of(&trial);
                let (mut lin, mut sq) = (0.0, 0.0);
                for ((t, x), gi) in trial.x.iter().zip(&cur.x).zip(&g) {
                    let d = t - x;
                    lin += gi * d;
                    sq += d * d;
                }
                if f1 <= f0 + lin + sq / (2.0 * alpha) || alpha <= min_step {
                    break f1;
                }
                alpha = (alpha * 0.5).max(min_step);
            };
            if !f1.is_finite() {
                return Err(Error::Diverged { iterations: outer });
            }

            sp.fidelity_gradient(&trial.ax, &mut grad_fid_trial, &mut scratch, &mut tmp);
            g_trial.copy_from_slice(&grad_fid_trial);
            sp.add_tv_gradient(&trial.dx, &mut g_trial, &mut field, &mut tmp);

            // Barzilai-Borwein length from the step just taken; the Hessian does not depend on w
            let (mut ss, mut sy) = (0.0, 0.0);
            for (((t, x), gt), gc) in trial.x.iter().zip(&cur.x).zip(&g_trial).zip(&g) {
                let s = t - x;
                ss += s * s;
                sy += s * (gt - gc);
            }
            step_len = if sy > 0.0 { ss / sy } else { min_step };

            let change = ss.sqrt() / norm(&cur.x).max(f64::MIN_POSITIVE);
            std::mem::swap(&mut cur, &mut trial);
            std::mem::swap(&mut grad_fid, &mut grad_fid_trial);
            if change < cfg.tol {
                break;
            }
        }

        for ((nui, d), wi) in nu.iter_mut().zip(&cur.dx).zip(&w) {
            nui[0] -= beta * (d[0] - wi[0]);
            nui[1] -= beta * (d[1] - wi[1]);
        }
        for ((l, a), bi) in lambda.iter_mut().zip(&cur.ax).zip(&b) {
            *l -= mu * (a - bi);
        }
        // lambda moved, so the cached fidelity gradient is stale
        {
            let sp = SmoothPart {
                op: &op,
                b: &b,
                w: &w,
                nu: &nu,
                lambda: &lambda,
                mu,
                beta,
            };
            sp.fidelity_gradient(&cur.ax, &mut grad_fid, &mut scratch, &mut tmp);
        }

        let residual = relative_residual(&cur.ax, &b, b_norm);
        if cfg.record_trace {
            let tv: f64 = cur
                .dx
                .iter()
                .map(|d| match cfg.tv_type {
                    TvType::Isotropic => d[0].hypot(d[1]),
                    TvType::Anisotropic => d[0].abs() + d[1].abs(),
                })
                .sum();
            trace.push(TraceRecord {
                iteration: outer,
                objective: tv * INTENSITY_SCALE,
                residual,
            });
        }
        if !residual.is_finite() {
            return Err(Error::Diverged { iterations: outer });
        }

        let prev_norm = norm(&x_prev_outer);
        let change = dist(&cur.x, &x_prev_outer);
        let rel = if prev_norm > 0.0 {
            change / prev_norm
        } else if change == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if rel < cfg.tol {
            converged = true;
            break;
        }
    }

    let pixels: Vec<f64> = cur.x.iter().map(|v| v * INTENSITY_SCALE).collect();
    let image = GrayImage::new(side, pixels)
        .map_err(|_| Error::Diverged {
            iterations: outer_iterations,
        })?
        .clamped();
    let final_objective = total_variation(&image, cfg.tv_type);
    let final_residual = {
        let scaled: Vec<f64> = image.pixels().iter().map(|v| v / INTENSITY_SCALE).collect();
        relative_residual(&op.apply(&scaled), &b, b_norm)
    };
    Ok(ReconstructionResult {
        image,
        outer_iterations,
        final_objective,
        final_residual,
        converged,
        trace,
    })
}

fn relative_residual(ax: &[f64], b: &[f64], b_norm: f64) -> f64 {
    let r = dist(ax, b);
    if b_norm > 0.0 {
        r / b_norm
    } else {
        r
    }
}
