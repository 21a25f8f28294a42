//! The Vladimirov-Taibleson fractional operator on `Q_p^n` in two
//! independently computed forms, Riesz kernels, and the radial and bilinear
//! integral identities built on them.
//!
//! Spectral form: conjugate the radial symbol `|xi|^alpha` by the exact
//! Fourier transform. Hypersingular form: integrate the kernel
//! `k(y) = c_k |y|^{-alpha-n}` against first differences, sphere by sphere.
//! Both reduce to finite exact sums for step functions, with the radial tail
//! `|x| > p^M` carried in closed form rather than truncated: there the
//! operator equals `-c_k (integral of f) |x|^{-alpha-n}` exactly.

use num_complex::Complex64;

use crate::accum::{KahanC64, KahanF64};
use crate::error::{Error, Result};
use crate::padic::RadialValue;
use crate::schwartz::{character_dot, StepFunction};

/// Operator parameters: the order `alpha`, the prime, and the dimension.
/// Radial formulas use sphere measures `p^{jn}(1 - p^{-n})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VtParams {
    pub alpha: f64,
    pub prime: u32,
    pub dim: usize,
}

impl VtParams {
    pub fn new(alpha: f64, prime: u32, dim: usize) -> Result<Self> {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::AlphaOutOfRange(alpha, "(0, inf)"));
        }
        if prime < 2 {
            return Err(Error::InvalidPrime(prime));
        }
        Ok(VtParams { alpha, prime, dim })
    }

    pub fn p(&self) -> f64 {
        self.prime as f64
    }

    pub fn n(&self) -> i32 {
        self.dim as i32
    }

    /// `p^x`.
    pub fn pw(&self, x: f64) -> f64 {
        self.p().powf(x)
    }

    fn check_fn(&self, f: &StepFunction) -> Result<()> {
        if f.prime() != self.prime {
            return Err(Error::PrimeMismatch(f.prime(), self.prime));
        }
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch(f.dim(), self.dim));
        }
        Ok(())
    }
}

/// Radial function `amplitude * |y|^exponent`, evaluated on spheres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialKernel {
    pub amplitude: f64,
    pub exponent: f64,
}

impl RadialKernel {
    pub fn eval_at_exp(&self, prime: u32, j: i32) -> f64 {
        self.amplitude * (prime as f64).powf(self.exponent * j as f64)
    }
}

/// Normalizing constant of the hypersingular kernel:
/// `(p^alpha - 1) / (1 - p^{-alpha-n})`.
pub fn kernel_constant(params: &VtParams) -> f64 {
    let a = params.alpha;
    let n = params.dim as f64;
    (params.pw(a) - 1.0) / (1.0 - params.pw(-a - n))
}

/// The hypersingular kernel as a radial function.
pub fn hypersingular_kernel(params: &VtParams) -> RadialKernel {
    RadialKernel {
        amplitude: kernel_constant(params),
        exponent: -params.alpha - params.dim as f64,
    }
}

/// `integral over {|y| >= p^{-m+1}} of the kernel`, in closed form.
fn kernel_total_from_scale(params: &VtParams, m: i32) -> f64 {
    let a = params.alpha;
    let n = params.dim as f64;
    kernel_constant(params) * (1.0 - params.pw(-n)) * params.pw((m - 1) as f64 * a)
        / (1.0 - params.pw(-a))
}

/// `integral over {|z| > p^M} of |z|^{-alpha-n} dz`, in closed form.
fn bare_kernel_tail(params: &VtParams, support_exp: i32) -> f64 {
    let a = params.alpha;
    let n = params.dim as f64;
    (1.0 - params.pw(-n)) * params.pw(-(support_exp + 1) as f64 * a) / (1.0 - params.pw(-a))
}

/// Result of applying the operator to a step function: exact values on the
/// support grid plus the exact radial tail `tail_coeff * |x|^{-alpha-n}`
/// valid for `|x| > p^tail_from_exp`.
#[derive(Debug, Clone)]
pub struct OperatorOutput {
    pub step: StepFunction,
    pub tail_coeff: Complex64,
    pub tail_from_exp: i32,
    pub alpha: f64,
}

impl OperatorOutput {
    /// Value on the sphere `|x| = p^t`, `t > tail_from_exp`.
    pub fn tail_value(&self, prime: u32, dim: usize, t: i32) -> Complex64 {
        self.tail_coeff * (prime as f64).powf(-(self.alpha + dim as f64) * t as f64)
    }

    /// Sup-norm gap against another output: grid values plus the leading
    /// tail sphere, relative to the larger sup.
    pub fn rel_sup_gap(&self, other: &OperatorOutput) -> Result<f64> {
        let diff = self.step.max_abs_diff(&other.step)?;
        let p = self.step.prime() as f64;
        let tail_scale = p.powf(-(self.alpha + self.step.dim() as f64)
            * (self.tail_from_exp + 1) as f64);
        let tail_diff = (self.tail_coeff - other.tail_coeff).norm() * tail_scale;
        let den = self
            .step
            .max_abs()
            .max(other.step.max_abs())
            .max(self.tail_coeff.norm() * tail_scale)
            .max(f64::MIN_POSITIVE);
        Ok((diff + tail_diff) / den)
    }
}

/// Hypersingular route: at each grid point `x`,
/// `f(x) * TOT - sum_j f_j k(|c_j - x|) p^{-mn}`, all radii exact.
pub fn apply_hypersingular(f: &StepFunction, params: &VtParams) -> Result<OperatorOutput> {
    params.check_fn(f)?;
    let view = f.grid_view()?;
    let n = params.dim as f64;
    let a = params.alpha;
    let ck = kernel_constant(params);
    let m = f.scale();
    let tot = kernel_total_from_scale(params, m);
    let cell_measure = view.cell_measure();
    let nonzero: Vec<usize> = (0..view.len()).filter(|&i| view.values[i].norm_sqr() != 0.0).collect();
    let mut out_terms: Vec<(crate::padic::Cell, Complex64)> = Vec::new();
    for i in 0..view.len() {
        let mut acc = KahanC64::new();
        for &j in &nonzero {
            if j == i {
                continue;
            }
            let t = view
                .distance_exp(i, j)
                .expect("distinct grid cells have positive distance");
            let k = ck * params.pw(-(a + n) * t as f64);
            acc.add(view.values[j] * (-k * cell_measure));
        }
        let val = view.values[i] * tot + acc.value();
        if val.re != 0.0 || val.im != 0.0 {
            out_terms.push((
                crate::padic::Cell::new(view.centers[i].clone(), -f.scale()),
                val,
            ));
        }
    }
    let step = StepFunction::from_terms(f.prime(), f.dim(), &out_terms)?;
    let tail_coeff = -ck * f.integrate();
    Ok(OperatorOutput { step, tail_coeff, tail_from_exp: f.support_exp(), alpha: a })
}

/// Spectral route: `F^{-1}[ |xi|^alpha F f ]` using the exact transform;
/// the cell of the dual grid containing `xi = 0` integrates the symbol as a
/// geometric series.
pub fn apply_spectral(f: &StepFunction, params: &VtParams) -> Result<OperatorOutput> {
    params.check_fn(f)?;
    let a = params.alpha;
    let n = params.dim as f64;
    let g = f.fourier()?;
    // g lives on B(p^m) with cells of radius p^{-M}
    let dual_scale = g.scale();
    let dual_measure = g.cell_measure();
    let zero_cell_weight =
        (1.0 - params.pw(-n)) * params.pw(-(dual_scale as f64) * (a + n)) / (1.0 - params.pw(-a - n));
    let dual_terms: Vec<(crate::padic::PadicPoint, Option<i32>, Complex64)> = g
        .terms()
        .map(|(cell, v)| {
            let e = crate::padic::abs_exp(&cell.center);
            (cell.center, e, v)
        })
        .collect();
    let mut fhat_zero = Complex64::new(0.0, 0.0);
    for (_, e, v) in &dual_terms {
        if e.is_none() {
            fhat_zero = *v;
        }
    }
    let view = f.grid_view()?;
    let mut out_terms: Vec<(crate::padic::Cell, Complex64)> = Vec::new();
    for i in 0..view.len() {
        let x = &view.centers[i];
        let mut acc = KahanC64::new();
        for (d, e, v) in &dual_terms {
            match e {
                None => acc.add(v * zero_cell_weight),
                Some(t) => {
                    let chi = character_dot(d, x)?.0.conj();
                    acc.add(v * chi * params.pw(a * *t as f64) * dual_measure);
                }
            }
        }
        let val = acc.value();
        if val.re != 0.0 || val.im != 0.0 {
            out_terms.push((
                crate::padic::Cell::new(x.clone(), -f.scale()),
                val,
            ));
        }
    }
    let step = StepFunction::from_terms(f.prime(), f.dim(), &out_terms)?;
    let tail_coeff = -kernel_constant(params) * fhat_zero;
    Ok(OperatorOutput { step, tail_coeff, tail_from_exp: f.support_exp(), alpha: a })
}

/// `Gamma_{K^n}(gamma) = (1 - p^{gamma-n}) / (1 - p^{-gamma})`.
pub fn riesz_gamma(params: &VtParams, gamma: f64) -> Result<f64> {
    let n = params.dim as f64;
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::GammaExcluded(gamma, "gamma must be positive"));
    }
    if gamma == n {
        return Err(Error::GammaExcluded(gamma, "gamma = n is the excluded pole"));
    }
    Ok((1.0 - params.pw(gamma - n)) / (1.0 - params.pw(-gamma)))
}

/// Exact integral of the Riesz kernel `f_gamma = |x|^{gamma-n} / Gamma`
/// over one cell of radius `p^-m`: a constant for an off-origin cell, a
/// geometric series for the cell containing 0.
fn riesz_cell_integral(params: &VtParams, gamma: f64, abs_exp: Option<i32>, m: i32) -> Result<f64> {
    let n = params.dim as f64;
    let g = riesz_gamma(params, gamma)?;
    Ok(match abs_exp {
        Some(t) => params.pw((gamma - n) * t as f64) * params.pw(-(m as f64) * n) / g,
        None => (1.0 - params.pw(-n)) * params.pw(-(m as f64) * gamma) / (1.0 - params.pw(-gamma)) / g,
    })
}

/// `integral f_gamma(x) phi(x) dx`, exact radial summation per cell.
pub fn riesz_kernel_pairing(
    phi: &StepFunction,
    gamma: f64,
    params: &VtParams,
) -> Result<Complex64> {
    params.check_fn(phi)?;
    let m = phi.scale();
    let mut acc = KahanC64::new();
    for (cell, v) in phi.terms() {
        let w = riesz_cell_integral(params, gamma, crate::padic::abs_exp(&cell.center), m)?;
        acc.add(v * w);
    }
    Ok(acc.value())
}

/// Pair the Riesz kernel against a full operator output, tail included:
/// the tail contributes `coeff / Gamma * (1-p^{-n}) * sum_{j>M} p^{j(gamma-alpha-n)}`.
pub fn riesz_pair_with_output(
    out: &OperatorOutput,
    gamma: f64,
    params: &VtParams,
) -> Result<Complex64> {
    let step_part = riesz_kernel_pairing(&out.step, gamma, params)?;
    let n = params.dim as f64;
    let g = riesz_gamma(params, gamma)?;
    let expo = gamma - out.alpha - n;
    if expo >= 0.0 {
        return Err(Error::GammaExcluded(gamma, "tail pairing diverges for gamma >= alpha + n"));
    }
    let tail = (1.0 - params.pw(-n)) * params.pw((out.tail_from_exp + 1) as f64 * expo)
        / (1.0 - params.pw(expo))
        / g;
    Ok(step_part + out.tail_coeff * tail)
}

/// `<f_alpha, D^alpha phi>`, which recovers `phi(0)` when the Riesz kernel
/// of the same order is the fundamental solution. `route` selects the
/// operator representation.
pub fn fundamental_solution_pairing(
    phi: &StepFunction,
    params: &VtParams,
    spectral_route: bool,
) -> Result<Complex64> {
    if params.alpha >= params.dim as f64 {
        return Err(Error::AlphaOutOfRange(params.alpha, "(0, n)"));
    }
    let out = if spectral_route {
        apply_spectral(phi, params)?
    } else {
        apply_hypersingular(phi, params)?
    };
    riesz_pair_with_output(&out, params.alpha, params)
}

/// Both sides of the radial identity
/// `|x|^alpha = (1-p^alpha)/(1-p^{-alpha-n}) * integral |xi|^{-alpha-n} (chi(x.xi)-1) dxi`,
/// the right side evaluated as its two-regime geometric series.
pub fn radial_identity_check(x_abs: &RadialValue, params: &VtParams) -> Result<(f64, f64)> {
    let a = params.alpha;
    let n = params.dim as f64;
    if x_abs.is_zero() {
        return Ok((0.0, 0.0));
    }
    let m = x_abs
        .as_power()
        .ok_or(Error::Config("|x| must be a power of p".into()))? as f64;
    let lhs = params.pw(a * m);
    // sphere j = -m+1 contributes -p^{(-m+1)n}; spheres j >= -m+2 contribute
    // -(1-p^{-n}) p^{jn} each, against the weight p^{-j(alpha+n)}
    let first = -params.pw((m - 1.0) * (a + n)) * params.pw((1.0 - m) * n);
    let rest = -(1.0 - params.pw(-n)) * params.pw((m - 2.0) * a) / (1.0 - params.pw(-a));
    let integral = first + rest;
    let rhs = (1.0 - params.pw(a)) / (1.0 - params.pw(-a - n)) * integral;
    Ok((lhs, rhs))
}

/// Pointwise bilinear form
/// `a_alpha * integral (u(x)-u(x+y))(v(x)-v(x+y)) |y|^{-n-alpha} dy`
/// on the common grid, with the exterior region summed in closed form.
pub fn carre_du_champ(
    u: &StepFunction,
    v: &StepFunction,
    params: &VtParams,
) -> Result<StepFunction> {
    params.check_fn(u)?;
    params.check_fn(v)?;
    let (ua, va) = u.aligned(v)?;
    let uvw = ua.grid_view()?;
    let vvw = va.grid_view()?;
    let a = params.alpha;
    let n = params.dim as f64;
    let aa = kernel_constant(params);
    let cell_measure = uvw.cell_measure();
    let ext = bare_kernel_tail(params, ua.support_exp());
    let mut out_terms = Vec::new();
    for i in 0..uvw.len() {
        let mut acc = KahanC64::new();
        for j in 0..uvw.len() {
            if j == i {
                continue;
            }
            let du = uvw.values[i] - uvw.values[j];
            let dv = vvw.values[i] - vvw.values[j];
            if du.norm_sqr() == 0.0 || dv.norm_sqr() == 0.0 {
                continue;
            }
            let t = uvw.distance_exp(i, j).expect("distinct cells");
            acc.add(du * dv * (params.pw(-(a + n) * t as f64) * cell_measure));
        }
        acc.add(uvw.values[i] * vvw.values[i] * ext);
        let val = acc.value() * aa;
        if val.re != 0.0 || val.im != 0.0 {
            out_terms.push((crate::padic::Cell::new(uvw.centers[i].clone(), -ua.scale()), val));
        }
    }
    StepFunction::from_terms(u.prime(), u.dim(), &out_terms)
}

/// Both sides of the product-rule identity
/// `u D^alpha v + v D^alpha u - D^alpha(uv) = carre_du_champ(u, v)`
/// as step functions on the common grid. The left side runs through the
/// spectral route, the right through direct kernel sums.
pub fn bilinear_identity_lhs_rhs(
    u: &StepFunction,
    v: &StepFunction,
    params: &VtParams,
) -> Result<(StepFunction, StepFunction)> {
    if !u.is_real(0.0) || !v.is_real(0.0) {
        return Err(Error::NotRealValued);
    }
    let (ua, va) = u.aligned(v)?;
    let du = apply_spectral(&ua, params)?;
    let dv = apply_spectral(&va, params)?;
    let uv = ua.mul(&va)?;
    let duv = apply_spectral(&uv.refine_to(ua.support_exp(), ua.scale())?, params)?;
    let lhs = ua
        .mul(&dv.step)?
        .add(&va.mul(&du.step)?)?
        .sub(&duv.step)?;
    let rhs = carre_du_champ(&ua, &va, params)?;
    Ok((lhs, rhs))
}

/// The Hilbert-space inner product behind the Galerkin method:
/// `(v, w) = 1/2 double-integral (v(x)-v(x+y))(w(x)-w(x+y)) k(y) dx dy`,
/// computed by exact cell-pair sums. Serves as the independent assembly
/// oracle for the closed-form Gram entries.
pub fn hypersingular_energy(
    v: &StepFunction,
    w: &StepFunction,
    params: &VtParams,
) -> Result<f64> {
    params.check_fn(v)?;
    params.check_fn(w)?;
    let (va, wa) = v.aligned(w)?;
    let vv = va.grid_view()?;
    let wv = wa.grid_view()?;
    let a = params.alpha;
    let n = params.dim as f64;
    let ck = kernel_constant(params);
    let cm = vv.cell_measure();
    let mut acc = KahanF64::new();
    for i in 0..vv.len() {
        for j in (i + 1)..vv.len() {
            let dv = vv.values[i].re - vv.values[j].re;
            let dw = wv.values[i].re - wv.values[j].re;
            if dv == 0.0 || dw == 0.0 {
                continue;
            }
            let t = vv.distance_exp(i, j).expect("distinct cells");
            acc.add(dv * dw * ck * params.pw(-(a + n) * t as f64) * cm * cm);
        }
    }
    let ext = ck * bare_kernel_tail(params, va.support_exp());
    for i in 0..vv.len() {
        acc.add(vv.values[i].re * wv.values[i].re * cm * ext);
    }
    Ok(acc.value())
}
