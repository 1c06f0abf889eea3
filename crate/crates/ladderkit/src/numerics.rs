//! Floating-point counterweight to the symbolic engine: grids, quadrature,
//! Hamiltonian residuals, an independent shooting-method eigensolver, and
//! the Liouville normal-form transformation. Everything here only trusts
//! sampled values, so agreement with the exact chain states is a genuine
//! cross-check rather than a tautology.

use std::collections::BTreeMap;

use crate::staeckel::SeparatedEquation;
use crate::states::ExpPolyState;
use crate::symexpr::SymExprError;
use crate::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum NumericsError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("input is not normalized (norm = {0})")]
    NotNormalized(f64),
    #[error("no eigenvalue bracketed: mismatch has equal sign at both window ends ({lo}, {hi})")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("integration is stiff: {0}")]
    Stiff(String),
    #[error("weight function is not positive at grid point {0}")]
    NonPositiveWeight(usize),
    #[error(transparent)]
    Sym(#[from] SymExprError),
}

// ---------- grids ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Uniform,
    Geometric,
}

#[derive(Debug, Clone)]
pub struct RadialGrid<S: Scalar> {
    pub r_min: S,
    pub r_max: S,
    pub spacing: Spacing,
    points: Vec<S>,
}

impl<S: Scalar> RadialGrid<S> {
    pub fn new(r_min: S, r_max: S, n: usize, spacing: Spacing) -> Result<Self, NumericsError> {
        if !(r_min > S::zero() && r_min < r_max) {
            return Err(NumericsError::Grid(format!(
                "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if n < 16 {
            return Err(NumericsError::Grid(format!("need at least 16 points, got {n}")));
        }
        let nf = S::from_usize(n - 1).unwrap();
        let points = match spacing {
            Spacing::Uniform => {
                let h = (r_max - r_min) / nf;
                (0..n)
                    .map(|i| r_min + h * S::from_usize(i).unwrap())
                    .collect()
            }
            Spacing::Geometric => {
                let q = (r_max / r_min).ln() / nf;
                (0..n)
                    .map(|i| r_min * (q * S::from_usize(i).unwrap()).exp())
                    .collect()
            }
        };
        Ok(RadialGrid {
            r_min,
            r_max,
            spacing,
            points,
        })
    }

    /// Default production grid: geometric, resolving both the origin power
    /// law and the exponential tail of a state with the given length scale.
    pub fn default_radial(length_scale: S) -> Self {
        let r_min = S::from_f64(1e-6).unwrap();
        let r_max = S::from_f64(40.0).unwrap() * length_scale;
        RadialGrid::new(r_min, r_max, 4096, Spacing::Geometric).unwrap()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    pub fn sample(&self, f: impl Fn(S) -> S) -> Vec<S> {
        self.points.iter().map(|&r| f(r)).collect()
    }
}

// ---------- quadrature ----------

/// Composite Simpson integration of pointwise values on a (possibly
/// nonuniform) grid; the final interval falls back to the trapezoid rule
/// when the interval count is odd.
fn integrate<S: Scalar>(values: &[S], x: &[S]) -> S {
    debug_assert_eq!(values.len(), x.len());
    let n = x.len();
    let mut acc = S::zero();
    let mut i = 0;
    let six = S::from_f64(6.0).unwrap();
    let two = S::from_f64(2.0).unwrap();
    while i + 2 < n {
        let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
        let (f0, f1, f2) = (values[i], values[i + 1], values[i + 2]);
        acc = acc
            + (h0 + h1) / six
                * ((two - h1 / h0) * f0 + (h0 + h1) * (h0 + h1) / (h0 * h1) * f1
                    + (two - h0 / h1) * f2);
        i += 2;
    }
    if i + 1 < n {
        acc = acc + (x[i + 1] - x[i]) * (values[i] + values[i + 1]) / two;
    }
    acc
}

/// Simpson estimate of the weighted norm integral of X^2 r^w dr.
pub fn quadrature_norm<S: Scalar>(
    samples: &[S],
    grid: &RadialGrid<S>,
    w: u32,
) -> Result<S, NumericsError> {
    assert_eq!(samples.len(), grid.len());
    let mut values = Vec::with_capacity(samples.len());
    for (i, (&v, &r)) in samples.iter().zip(grid.points()).enumerate() {
        if !v.is_finite() {
            return Err(NumericsError::NonFinite(i));
        }
        values.push(v * v * r.powi(w as i32));
    }
    Ok(integrate(&values, grid.points()))
}

/// Inner product of two normalized sample vectors under the r^2 measure.
pub fn overlap<S: Scalar>(
    a: &[S],
    b: &[S],
    grid: &RadialGrid<S>,
) -> Result<S, NumericsError> {
    let tol = S::from_f64(1e-6).unwrap();
    for s in [a, b] {
        let norm = quadrature_norm(s, grid, 2)?;
        if (norm - S::one()).abs() > tol {
            return Err(NumericsError::NotNormalized(norm.to_f64().unwrap()));
        }
    }
    let values: Vec<S> = a
        .iter()
        .zip(b)
        .zip(grid.points())
        .map(|((&x, &y), &r)| x * y * r * r)
        .collect();
    Ok(integrate(&values, grid.points()))
}

/// Normalize samples in place under the r^2 measure; returns the norm.
pub fn normalize<S: Scalar>(
    samples: &mut [S],
    grid: &RadialGrid<S>,
) -> Result<S, NumericsError> {
    let norm = quadrature_norm(samples, grid, 2)?.sqrt();
    for v in samples.iter_mut() {
        *v = *v / norm;
    }
    Ok(norm)
}

// ---------- closed-form norms ----------

fn gamma_half_integer(twice_z: u64) -> f64 {
    // Gamma(z) for z = twice_z / 2 >= 1/2, reduced to Gamma(1/2) or Gamma(1)
    let base = if (twice_z & 1) == 1 { 0.5 } else { 1.0 };
    let mut z = twice_z as f64 / 2.0;
    let mut acc = if (twice_z & 1) == 1 {
        std::f64::consts::PI.sqrt()
    } else {
        1.0
    };
    while z > base + 0.25 {
        z -= 1.0;
        acc *= z;
    }
    acc
}

/// Analytic value of the norm integral of X^2 r^2 dr for states with a pure
/// exponential (gamma = 0, via factorial moments — exact rational) or a pure
/// Gaussian (beta = 0, via half-integer Gamma moments). None otherwise.
pub fn closed_form_norm_integral(state: &ExpPolyState) -> Option<f64> {
    use num_rational::BigRational;
    use num_traits::{Signed, ToPrimitive, Zero};
    if state.alpha < 0 {
        return None;
    }
    // Q(r) = P(r)^2 r^{2 alpha + 2}
    let mut q = vec![BigRational::zero(); 2 * state.p.len().max(1) - 1];
    for (i, a) in state.p.iter().enumerate() {
        for (j, b) in state.p.iter().enumerate() {
            q[i + j] += a * b;
        }
    }
    let shift = (2 * state.alpha + 2) as usize;
    if state.gamma.is_zero() && state.beta.is_negative() {
        // integral of r^m e^{2 beta r} = m! / (-2 beta)^{m+1}, exact
        let rate = -&state.beta * BigRational::from_integer(2.into());
        let mut total = BigRational::zero();
        for (i, c) in q.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let m = i + shift;
            let mut term = c / rate.pow((m + 1) as i32);
            for k in 2..=m {
                term *= BigRational::from_integer(k.into());
            }
            total += term;
        }
        let v = total.to_f64()?;
        return (v > 0.0).then_some(v * state.norm * state.norm);
    }
    if state.beta.is_zero() && state.gamma.is_negative() {
        // integral of r^m e^{2 gamma r^2} = Gamma((m+1)/2) / (2 a^{(m+1)/2})
        let a = -2.0 * state.gamma.to_f64()?;
        let mut total = 0.0;
        for (i, c) in q.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let m = (i + shift) as u64;
            total += c.to_f64()? * gamma_half_integer(m + 1) / (2.0 * a.powf((m + 1) as f64 / 2.0));
        }
        return (total > 0.0).then_some(total * state.norm * state.norm);
    }
    None
}

/// Norm of the state under the r^2 measure: closed form when available,
/// quadrature on a default grid otherwise.
pub fn state_norm(state: &ExpPolyState) -> Result<f64, NumericsError> {
    if let Some(integral) = closed_form_norm_integral(state) {
        return Ok(integral.sqrt());
    }
    use num_traits::ToPrimitive;
    let beta: f64 = state.beta.to_f64().unwrap_or(0.0);
    let gamma: f64 = state.gamma.to_f64().unwrap_or(0.0);
    let scale = if gamma < 0.0 {
        (-1.0 / gamma).sqrt()
    } else if beta < 0.0 {
        -1.0 / beta
    } else {
        return Err(NumericsError::Grid(format!(
            "state does not decay (beta = {beta}, gamma = {gamma})"
        )));
    };
    let grid = RadialGrid::default_radial(scale * (state.degree() as f64 + 1.0));
    let samples = grid.sample(|r| state.eval_f64(r));
    Ok(quadrature_norm(&samples, &grid, 2)?.sqrt())
}

// ---------- Hamiltonian residuals ----------

/// Pointwise H X with H = d^2/dr^2 + (f'/f) d/dr + coupling, using the
/// state's exact symbolic derivatives.
pub fn hamiltonian_apply(
    state: &ExpPolyState,
    eq: &SeparatedEquation,
    bindings: &BTreeMap<String, f64>,
    grid: &RadialGrid<f64>,
) -> Result<Vec<f64>, NumericsError> {
    let d1 = state.derivative();
    let d2 = d1.derivative();
    let logd = eq
        .log_derivative()
        .map_err(|e| NumericsError::Grid(e.to_string()))?;
    let coupling = eq.coupling_term();
    grid.points()
        .iter()
        .map(|&r| {
            Ok(d2.eval_f64(r)
                + logd.eval_f64(r, bindings)? * d1.eval_f64(r)
                + coupling.eval_f64(r, bindings)? * state.eval_f64(r))
        })
        .collect()
}

/// Max relative residual of H X = -epsilon X over the grid, excluding the
/// two points nearest r_min where 1/r and 1/r^2 amplify rounding noise.
/// With epsilon = 0 the absolute residual is returned instead.
pub fn hamiltonian_residual(
    state: &ExpPolyState,
    epsilon: f64,
    eq: &SeparatedEquation,
    bindings: &BTreeMap<String, f64>,
    grid: &RadialGrid<f64>,
) -> Result<f64, NumericsError> {
    let hx = hamiltonian_apply(state, eq, bindings, grid)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (i, (&h, &r)) in hx.iter().zip(grid.points()).enumerate() {
        if i < 2 {
            continue;
        }
        let x = state.eval_f64(r);
        worst = worst.max((h + epsilon * x).abs());
        scale = scale.max((epsilon * x).abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Quadrature Rayleigh quotient <X, H X> / <X, X> under the r^2 measure;
/// returns an estimate of -epsilon.
pub fn rayleigh_quotient(
    state: &ExpPolyState,
    eq: &SeparatedEquation,
    bindings: &BTreeMap<String, f64>,
    grid: &RadialGrid<f64>,
) -> Result<f64, NumericsError> {
    let hx = hamiltonian_apply(state, eq, bindings, grid)?;
    let x: Vec<f64> = grid.sample(|r| state.eval_f64(r));
    let num: Vec<f64> = x
        .iter()
        .zip(&hx)
        .zip(grid.points())
        .map(|((&a, &b), &r)| a * b * r * r)
        .collect();
    Ok(integrate(&num, grid.points()) / quadrature_norm(&x, grid, 2)?)
}

// ---------- shooting oracle ----------

#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// normalized eigenfunction samples on the grid
    pub samples: Vec<f64>,
    /// separation constant in the convention H X = -epsilon X
    pub epsilon: f64,
    pub nodes: usize,
    pub match_index: usize,
    /// largest integration substep used
    pub max_step: f64,
}

struct Ode<'a> {
    g: Box<dyn Fn(f64) -> f64 + 'a>,
    w: Box<dyn Fn(f64) -> f64 + 'a>,
}

impl Ode<'_> {
    /// X'' = -g X' - (w + eps) X as a first-order system.
    fn rhs(&self, r: f64, y: [f64; 2], eps: f64) -> [f64; 2] {
        [y[1], -(self.g)(r) * y[1] - ((self.w)(r) + eps) * y[0]]
    }

    fn rk4_span(&self, r0: f64, r1: f64, mut y: [f64; 2], eps: f64, max_step: &mut f64) -> [f64; 2] {
        let span = r1 - r0;
        let rate = ((self.w)(r0.min(r1).max(1e-300)) + eps).abs().sqrt() + 1.0;
        let steps = ((span.abs() * rate / 0.05).ceil() as usize).max(1);
        let h = span / steps as f64;
        *max_step = max_step.max(h.abs());
        let mut r = r0;
        for _ in 0..steps {
            let k1 = self.rhs(r, y, eps);
            let k2 = self.rhs(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]], eps);
            let k3 = self.rhs(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]], eps);
            let k4 = self.rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]], eps);
            y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            r += h;
        }
        y
    }

    /// Integrate along `idx` (any direction), renormalizing to avoid
    /// overflow; returns samples proportional to the solution.
    fn trace(
        &self,
        points: &[f64],
        idx: impl Iterator<Item = usize> + Clone,
        init: [f64; 2],
        eps: f64,
        max_step: &mut f64,
    ) -> (Vec<f64>, [f64; 2]) {
        let order: Vec<usize> = idx.collect();
        let mut samples = vec![init[0]];
        let mut y = init;
        for pair in order.windows(2) {
            y = self.rk4_span(points[pair[0]], points[pair[1]], y, eps, max_step);
            if y[0].abs() > 1e200 || y[1].abs() > 1e200 {
                let s = y[0].abs().max(y[1].abs());
                y[0] /= s;
                y[1] /= s;
                for v in samples.iter_mut() {
                    *v /= s;
                }
            }
            samples.push(y[0]);
        }
        (samples, y)
    }
}

/// Scaled Wronskian of the outward and inward branches at the matching
/// point. Unlike a raw log-derivative difference this has no poles in the
/// eigenvalue parameter, so a sign change brackets a genuine eigenvalue.
fn matching_defect(
    ode: &Ode,
    points: &[f64],
    l: u32,
    m: usize,
    eps: f64,
    max_step: &mut f64,
) -> f64 {
    let r0 = points[0];
    let out0 = [r0.powi(l as i32), (l as f64) * r0.powi(l as i32 - 1)];
    let (_, yo) = ode.trace(points, 0..=m, out0, eps, max_step);
    let rn = points[points.len() - 1];
    let kappa = (-((ode.w)(rn) + eps)).max(0.0).sqrt().max(1e-3);
    let inn0 = [1.0, -kappa];
    let (_, yi) = ode.trace(points, (m..points.len()).rev(), inn0, eps, max_step);
    let w = yo[1] * yi[0] - yi[1] * yo[0];
    w / ((yo[1] * yi[0]).abs() + (yi[1] * yo[0]).abs() + f64::MIN_POSITIVE)
}

/// Independent eigensolver: fourth-order integration outward from a series
/// start X ~ r^l and inward from a decaying tail, with bisection on the
/// log-derivative mismatch at the outer turning point. The window must
/// bracket exactly one eigenvalue (in the H X = -epsilon X convention).
pub fn shooting_oracle(
    eq: &SeparatedEquation,
    bindings: &BTreeMap<String, f64>,
    l: u32,
    window: (f64, f64),
    grid: &RadialGrid<f64>,
) -> Result<OracleSolution, NumericsError> {
    let logd = eq
        .log_derivative()
        .map_err(|e| NumericsError::Grid(e.to_string()))?;
    let coupling = eq.coupling_term();
    let g = move |r: f64| logd.eval_f64(r, bindings).unwrap_or(f64::NAN);
    let w = move |r: f64| coupling.eval_f64(r, bindings).unwrap_or(f64::NAN);
    let ode = Ode {
        g: Box::new(g),
        w: Box::new(w),
    };
    let points = grid.points();
    let n = points.len();

    // H X = -eps X reads X'' + g X' + (w + eps) X = 0, so eps itself is the
    // spectral shift; match at the outer edge of the allowed region w + eps > 0
    let mid_eps = 0.5 * (window.0 + window.1);
    let mut m = points
        .iter()
        .rposition(|&r| (ode.w)(r) + mid_eps > 0.0)
        .unwrap_or(n / 2);
    m = m.clamp(4, n - 5);

    let mut ms = 0.0f64;
    let shoot = |eps: f64, ms: &mut f64| matching_defect(&ode, points, l, m, eps, ms);
    let (mut lo, mut hi) = window;
    let (mut d_lo, d_hi) = (shoot(lo, &mut ms), shoot(hi, &mut ms));
    if !(d_lo * d_hi < 0.0) {
        return Err(NumericsError::NoSignChange {
            lo: window.0,
            hi: window.1,
        });
    }
    let mut eps = 0.5 * (lo + hi);
    for _ in 0..80 {
        eps = 0.5 * (lo + hi);
        let d = shoot(eps, &mut ms);
        if !d.is_finite() {
            return Err(NumericsError::Stiff(format!("mismatch is not finite at {eps}")));
        }
        if d * d_lo <= 0.0 {
            hi = eps;
        } else {
            lo = eps;
            d_lo = d;
        }
        if (hi - lo).abs() < 1e-13 * eps.abs().max(1.0) {
            break;
        }
    }

    // assemble the eigenfunction from both branches
    let r0 = points[0];
    let out0 = [r0.powi(l as i32), (l as f64) * r0.powi(l as i32 - 1)];
    let (out, yo) = ode.trace(points, 0..=m, out0, eps, &mut ms);
    let rn = points[n - 1];
    let kappa = (-((ode.w)(rn) + eps)).max(0.0).sqrt().max(1e-3);
    let (inn, yi) = ode.trace(points, (m..n).rev(), [1.0, -kappa], eps, &mut ms);
    let scale = yo[0] / yi[0];
    let mut samples = Vec::with_capacity(n);
    samples.extend_from_slice(&out[..m]);
    samples.extend(inn.iter().rev().map(|&v| v * scale));
    normalize(&mut samples, grid)?;
    let peak = samples.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if let Some(first) = samples.iter().find(|v| v.abs() > 1e-3 * peak) {
        if *first < 0.0 {
            for v in samples.iter_mut() {
                *v = -*v;
            }
        }
    }
    let mut nodes = 0;
    let mut last = 0.0f64;
    for &v in &samples {
        if v.abs() < 1e-8 * peak {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            nodes += 1;
        }
        last = v;
    }
    Ok(OracleSolution {
        samples,
        epsilon: eps,
        nodes,
        match_index: m,
        max_step: ms,
    })
}

// ---------- Liouville normal form ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeExponent {
    Quarter,
    Half,
}

#[derive(Debug, Clone)]
pub struct NormalFormResult<S: Scalar> {
    /// transformed abscissa x(theta) = integral of sqrt(rho / p)
    pub x: Vec<S>,
    /// transformed function y = (p rho)^e psi
    pub y: Vec<S>,
    /// max |y'' + (q/rho + lambda) y| relative to max |lambda y|
    pub residual: S,
    pub exponent: AmplitudeExponent,
}

fn second_derivative<S: Scalar>(y: &[S], x: &[S], i: usize) -> S {
    let n = x.len();
    let two = S::from_f64(2.0).unwrap();
    let h0 = x[i] - x[i - 1];
    let h1 = x[i + 1] - x[i];
    let uniform = (h1 - h0).abs() < S::from_f64(1e-12).unwrap() * h0.abs();
    if uniform && i >= 2 && i + 2 < n {
        // fourth-order five-point stencil
        let c = S::from_f64(12.0).unwrap() * h0 * h0;
        return (-y[i - 2] + S::from_f64(16.0).unwrap() * y[i - 1]
            - S::from_f64(30.0).unwrap() * y[i]
            + S::from_f64(16.0).unwrap() * y[i + 1]
            - y[i + 2])
            / c;
    }
    two * (h0 * y[i + 1] - (h0 + h1) * y[i] + h1 * y[i - 1]) / (h0 * h1 * (h0 + h1))
}

/// Transform (p psi')' + q psi + lambda rho psi = 0 toward the normal form
/// y'' + (q/rho + lambda) y = 0 via x = integral sqrt(rho/p),
/// y = (p rho)^e psi, and measure the finite-difference residual.
pub fn liouville_normal_form<S: Scalar>(
    p: impl Fn(S) -> S,
    rho: impl Fn(S) -> S,
    q_over_rho: impl Fn(S) -> S,
    psi: &[S],
    grid: &RadialGrid<S>,
    lambda: S,
    exponent: AmplitudeExponent,
) -> Result<NormalFormResult<S>, NumericsError> {
    let pts = grid.points();
    let n = pts.len();
    assert_eq!(psi.len(), n);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut acc = S::zero();
    let mut prev = S::zero();
    for (i, &t) in pts.iter().enumerate() {
        let (pv, rv) = (p(t), rho(t));
        if !(pv > S::zero() && rv > S::zero()) {
            return Err(NumericsError::NonPositiveWeight(i));
        }
        let integrand = (rv / pv).sqrt();
        if i > 0 {
            acc = acc + (t - pts[i - 1]) * (integrand + prev) / S::from_f64(2.0).unwrap();
        }
        prev = integrand;
        x.push(acc);
        let amp = match exponent {
            AmplitudeExponent::Quarter => (pv * rv).powf(S::from_f64(0.25).unwrap()),
            AmplitudeExponent::Half => (pv * rv).sqrt(),
        };
        y.push(amp * psi[i]);
    }
    let mut worst = S::zero();
    let mut scale = S::zero();
    for i in 2..n - 2 {
        let d2 = second_derivative(&y, &x, i);
        let res = d2 + (q_over_rho(pts[i]) + lambda) * y[i];
        worst = worst.max(res.abs());
        scale = scale.max((lambda * y[i]).abs());
    }
    let residual = if scale > S::zero() { worst / scale } else { worst };
    Ok(NormalFormResult {
        x,
        y,
        residual,
        exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{generate_chain, radial_equation, Potential};
    use num_rational::BigRational;

    fn f64_bindings() -> BTreeMap<String, f64> {
        let mut b = BTreeMap::new();
        b.insert("K".into(), 2.0);
        b.insert("s".into(), 1.0);
        b.insert("l".into(), 0.0); // angular index enters through k2, set per use
        b
    }

    fn coulomb_bindings(l: f64) -> BTreeMap<String, f64> {
        let mut b = f64_bindings();
        b.insert("l".into(), l);
        b
    }

    #[test]
    fn quadrature_matches_analytic_integrals() {
        let grid = RadialGrid::new(1e-6, 40.0, 4096, Spacing::Geometric).unwrap();
        let s = grid.sample(|r: f64| (-r).exp());
        let v = quadrature_norm(&s, &grid, 2).unwrap();
        assert!((v - 0.25).abs() / 0.25 < 1e-8, "got {v}");

        let grid = RadialGrid::new(1e-6, 80.0, 4096, Spacing::Geometric).unwrap();
        let s = grid.sample(|r: f64| r * (-r / 2.0).exp());
        let v = quadrature_norm(&s, &grid, 2).unwrap();
        assert!((v - 24.0).abs() / 24.0 < 1e-8, "got {v}");

        let zero = vec![0.0; grid.len()];
        assert_eq!(quadrature_norm(&zero, &grid, 2).unwrap(), 0.0);
    }

    #[test]
    fn quadrature_is_fourth_order() {
        let defect = |n: usize| {
            let grid = RadialGrid::new(1e-6, 40.0, n, Spacing::Uniform).unwrap();
            let s = grid.sample(|r: f64| (-r).exp());
            (quadrature_norm(&s, &grid, 2).unwrap() - 0.25).abs()
        };
        let (coarse, fine) = (defect(257), defect(513));
        assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn quadrature_in_f32() {
        let grid = RadialGrid::<f32>::new(1e-3, 40.0, 2048, Spacing::Geometric).unwrap();
        let s = grid.sample(|r: f32| (-r).exp());
        let v = quadrature_norm(&s, &grid, 2).unwrap();
        assert!((v - 0.25).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn closed_form_norms_match_quadrature() {
        let mk = |p: Vec<i64>, alpha: i64, beta: (i64, i64), gamma: (i64, i64)| ExpPolyState {
            p: p.into_iter().map(|v| BigRational::from_integer(v.into())).collect(),
            alpha,
            beta: BigRational::new(beta.0.into(), beta.1.into()),
            gamma: BigRational::new(gamma.0.into(), gamma.1.into()),
            n: 1,
            l: 0,
            epsilon: BigRational::from_integer(0.into()),
            norm: 1.0,
        };
        // integral of r^2 e^{-2r} = 1/4
        let s = mk(vec![1], 0, (-1, 1), (0, 1));
        assert_eq!(closed_form_norm_integral(&s), Some(0.25));
        // integral of r^4 e^{-r} = 24
        let s = mk(vec![1], 1, (-1, 2), (0, 1));
        assert_eq!(closed_form_norm_integral(&s), Some(24.0));
        // integral of r^2 e^{-r^2} = sqrt(pi)/4
        let s = mk(vec![1], 0, (0, 1), (-1, 2));
        let v = closed_form_norm_integral(&s).unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 4.0).abs() < 1e-15);
        // polynomial prefactor, cross-checked against quadrature
        let s = mk(vec![3, 0, -2], 0, (0, 1), (-1, 2));
        let grid = RadialGrid::new(1e-6, 30.0, 4096, Spacing::Geometric).unwrap();
        let samples = grid.sample(|r| s.eval_f64(r));
        let q = quadrature_norm(&samples, &grid, 2).unwrap();
        let c = closed_form_norm_integral(&s).unwrap();
        assert!((q - c).abs() / c < 1e-9, "quadrature {q} closed form {c}");
        assert!((state_norm(&s).unwrap() - c.sqrt()).abs() < 1e-15);
        // growing states have no norm
        let s = mk(vec![1], 0, (1, 1), (0, 1));
        assert_eq!(closed_form_norm_integral(&s), None);
        assert!(state_norm(&s).is_err());
    }

    #[test]
    fn residual_examples() {
        let (eq, _) = radial_equation(Potential::Coulomb).unwrap();
        let mut consts = BTreeMap::new();
        consts.insert("K".to_string(), BigRational::from_integer(2.into()));
        let chain = generate_chain(&eq, "l", 1, &consts).unwrap();
        let ground = chain.find(1, 0).unwrap();
        // r_min = 1e-3 keeps the 1/r terms below the f64 cancellation floor
        let grid = RadialGrid::new(1e-3, 40.0, 4096, Spacing::Geometric).unwrap();
        let r = hamiltonian_residual(ground, -1.0, &eq, &coulomb_bindings(0.0), &grid).unwrap();
        assert!(r < 1e-12, "residual {r}");
        // wrong eigenvalue forces an order-unity residual
        let r = hamiltonian_residual(ground, -2.0, &eq, &coulomb_bindings(0.0), &grid).unwrap();
        assert!(r > 0.1, "residual {r}");

        let (eq, _) = radial_equation(Potential::Oscillator).unwrap();
        let mut consts = BTreeMap::new();
        consts.insert("s".to_string(), BigRational::from_integer(1.into()));
        let chain = generate_chain(&eq, "l", 1, &consts).unwrap();
        let ground = chain.find(1, 0).unwrap();
        let r = hamiltonian_residual(ground, 3.0, &eq, &coulomb_bindings(0.0), &grid).unwrap();
        assert!(r < 1e-12, "residual {r}");
        // Rayleigh quotient estimates -epsilon = -3
        let rq = rayleigh_quotient(ground, &eq, &coulomb_bindings(0.0), &grid).unwrap();
        assert!((rq + 3.0).abs() < 1e-6, "rayleigh {rq}");
    }

    #[test]
    fn shooting_finds_hydrogen_levels() {
        let (eq, _) = radial_equation(Potential::Coulomb).unwrap();
        let grid = RadialGrid::default_radial(2.0);
        let sol = shooting_oracle(&eq, &coulomb_bindings(0.0), 0, (-1.5, -0.5), &grid).unwrap();
        assert!((sol.epsilon + 1.0).abs() < 1e-8, "epsilon {}", sol.epsilon);
        assert_eq!(sol.nodes, 0);

        let sol = shooting_oracle(&eq, &coulomb_bindings(0.0), 0, (-0.3, -0.2), &grid).unwrap();
        assert!((sol.epsilon + 0.25).abs() < 1e-8, "epsilon {}", sol.epsilon);
        assert_eq!(sol.nodes, 1);
        // boundary decay
        let peak = sol.samples.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(sol.samples.last().unwrap().abs() < 1e-10 * peak);

        // empty window errors
        assert!(matches!(
            shooting_oracle(&eq, &coulomb_bindings(0.0), 0, (-0.9, -0.5), &grid),
            Err(NumericsError::NoSignChange { .. })
        ));
    }

    #[test]
    fn shooting_finds_oscillator_ground_state() {
        let (eq, _) = radial_equation(Potential::Oscillator).unwrap();
        let grid = RadialGrid::default_radial(1.0);
        let sol = shooting_oracle(&eq, &coulomb_bindings(0.0), 0, (2.0, 4.0), &grid).unwrap();
        assert!((sol.epsilon - 3.0).abs() < 1e-8, "epsilon {}", sol.epsilon);
        assert_eq!(sol.nodes, 0);
    }

    #[test]
    fn overlap_detects_orthogonality() {
        let (eq, _) = radial_equation(Potential::Coulomb).unwrap();
        let grid = RadialGrid::default_radial(2.0);
        let a = shooting_oracle(&eq, &coulomb_bindings(0.0), 0, (-1.5, -0.5), &grid).unwrap();
        let b = shooting_oracle(&eq, &coulomb_bindings(0.0), 0, (-0.3, -0.2), &grid).unwrap();
        let same = overlap(&a.samples, &a.samples, &grid).unwrap();
        assert!((same - 1.0).abs() < 1e-10);
        let cross = overlap(&a.samples, &b.samples, &grid).unwrap();
        assert!(cross.abs() < 1e-8, "cross {cross}");
        // unnormalized inputs are rejected
        let scaled: Vec<f64> = a.samples.iter().map(|v| 2.0 * v).collect();
        assert!(matches!(
            overlap(&scaled, &b.samples, &grid),
            Err(NumericsError::NotNormalized(_))
        ));
    }

    #[test]
    fn normal_form_prefers_quarter_exponent() {
        // n = 1 Coulomb state, p = rho = r^2: y = rX is the exact reduction
        let grid = RadialGrid::new(1e-3, 30.0, 6001, Spacing::Uniform).unwrap();
        let psi = grid.sample(|r: f64| (-r).exp());
        let q_over_rho = |r: f64| 2.0 / r; // coupling for l = 0, K = 2
        let res = liouville_normal_form(
            |r: f64| r * r,
            |r| r * r,
            q_over_rho,
            &psi,
            &grid,
            -1.0,
            AmplitudeExponent::Quarter,
        )
        .unwrap();
        assert!(res.residual < 1e-6, "residual {}", res.residual);
        // x is strictly increasing and equals r - r_min here
        assert!(res.x.windows(2).all(|w| w[1] > w[0]));

        let res = liouville_normal_form(
            |r: f64| r * r,
            |r| r * r,
            q_over_rho,
            &psi,
            &grid,
            -1.0,
            AmplitudeExponent::Half,
        )
        .unwrap();
        assert!(res.residual >= 1e-2, "residual {}", res.residual);
    }

    #[test]
    fn normal_form_identity_transform() {
        let grid = RadialGrid::new(0.1, 10.0, 512, Spacing::Uniform).unwrap();
        let psi = grid.sample(|r: f64| (0.3 * r).sin());
        let res = liouville_normal_form(
            |_: f64| 1.0,
            |_| 1.0,
            |_| 0.0,
            &psi,
            &grid,
            0.09,
            AmplitudeExponent::Quarter,
        )
        .unwrap();
        for (x, (r, y)) in res.x.iter().zip(grid.points().iter().zip(&res.y)) {
            assert!((x - (r - 0.1)).abs() < 1e-12);
            assert!((y - (0.3 * r).sin()).abs() < 1e-12);
        }
        assert!(res.residual < 1e-5);
    }
}
