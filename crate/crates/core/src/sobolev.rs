//! Gagliardo seminorms in two independently computed forms, executable
//! checkers for the fractional Sobolev, Poincare and Poincare-Wirtinger
//! inequalities, the Rayleigh-quotient best constant, capacity bounds, and
//! the weighted positivity identity.
//!
//! None of the inequality constants are hard-coded: every checker reports
//! the empirical ratio of its two sides, and the Rayleigh solver certifies
//! the scale-m best constant as an eigenvalue.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accum::KahanF64;
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, solve_spd, SymMatrix};
use crate::operator::{
    apply_spectral, kernel_constant, riesz_gamma, riesz_kernel_pairing, VtParams,
};
use crate::padic::{
    abs_exp, ball_relation, Ball, BallRelation, Cell, OpenSetDecomposition, PadicPoint,
};
use crate::schwartz::StepFunction;

/// Default cap on the cell count of dense eigensolves and constrained solves.
pub const MATRIX_CELL_CAP: usize = 4096;

/// Both evaluations of the squared seminorm and their relative gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeminormReport {
    pub value_double_integral: f64,
    pub value_spectral: f64,
    pub relative_gap: f64,
}

/// Outcome of one inequality check: the two sides and their ratio. The
/// meaning of `lhs`/`rhs` follows the inequality being checked.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs_seminorm: f64,
    pub empirical_constant: f64,
    pub corpus_id: String,
    pub pass: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityVariant {
    /// Seminorm over the ball only; constants are admissible, so the
    /// infimum is always zero. Kept as the literal reading.
    BallSeminorm,
    /// Seminorm of the zero-extension over the whole space; nondegenerate.
    GlobalSeminorm,
}

/// Constrained minimization data for the capacity bound.
#[derive(Debug, Clone)]
pub struct CapacityProblem {
    pub e_cells: Vec<Cell>,
    pub ball_exp: i32,
    pub scale: i32,
    pub variant: CapacityVariant,
}

fn require_fractional(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha, "(0, 1)"));
    }
    Ok(())
}

/// `integral over {|y| > p^M} of |y|^{-n-expo} dy`.
fn pair_tail(params: &VtParams, expo: f64, support_exp: i32) -> f64 {
    let n = params.dim as f64;
    (1.0 - params.pw(-n)) * params.pw(-expo * (support_exp + 1) as f64) / (1.0 - params.pw(-expo))
}

/// Spectral weight constant: `A(xi) = c1 |xi|^{2 alpha}` over the whole
/// space, fixed by the radial integral identity applied at order `2 alpha`.
fn spectral_weight_c1(params: &VtParams, alpha: f64) -> f64 {
    let n = params.dim as f64;
    2.0 * (1.0 - params.pw(-2.0 * alpha - n)) / (params.pw(2.0 * alpha) - 1.0)
}

/// Deficit constant for the ball-restricted weight:
/// `A_N(xi) = c1 |xi|^{2 alpha} - c2(N)` on nontrivial cosets.
fn spectral_weight_c2(params: &VtParams, alpha: f64, n_exp: i32) -> f64 {
    let n = params.dim as f64;
    2.0 * (1.0 - params.pw(-n)) * params.pw(-2.0 * alpha * (n_exp + 1) as f64)
        / (1.0 - params.pw(-2.0 * alpha))
}

fn double_integral_global(u: &StepFunction, params: &VtParams, alpha: f64) -> Result<f64> {
    let view = u.grid_view()?;
    let n = params.dim as f64;
    let cm = view.cell_measure();
    let mut acc = KahanF64::new();
    for i in 0..view.len() {
        for j in (i + 1)..view.len() {
            let d2 = (view.values[i] - view.values[j]).norm_sqr();
            if d2 == 0.0 {
                continue;
            }
            let t = view.distance_exp(i, j).expect("distinct cells");
            acc.add(2.0 * d2 * params.pw(-(n + 2.0 * alpha) * t as f64) * cm * cm);
        }
    }
    let out = pair_tail(params, 2.0 * alpha, u.support_exp());
    for i in 0..view.len() {
        let v2 = view.values[i].norm_sqr();
        if v2 != 0.0 {
            acc.add(2.0 * v2 * cm * out);
        }
    }
    Ok(acc.value())
}

fn double_integral_ball(
    u: &StepFunction,
    params: &VtParams,
    alpha: f64,
    ball: &Ball,
) -> Result<f64> {
    let shifted = shift_to_ball_grid(&u.restrict_ball(ball)?, ball)?;
    let view = shifted.grid_view()?;
    let n = params.dim as f64;
    let cm = view.cell_measure();
    let mut acc = KahanF64::new();
    for i in 0..view.len() {
        for j in (i + 1)..view.len() {
            let d2 = (view.values[i] - view.values[j]).norm_sqr();
            if d2 == 0.0 {
                continue;
            }
            let t = view.distance_exp(i, j).expect("distinct cells");
            acc.add(2.0 * d2 * params.pw(-(n + 2.0 * alpha) * t as f64) * cm * cm);
        }
    }
    Ok(acc.value())
}

/// Re-key a function supported in a centered ball so its support exponent
/// equals the ball radius: full-grid enumeration then stays inside the ball.
fn shift_to_ball_grid(u: &StepFunction, ball: &Ball) -> Result<StepFunction> {
    if !ball.center.is_zero() {
        return Err(Error::Config("ball seminorms expect centered balls".into()));
    }
    let terms: Vec<(Cell, Complex64)> = u.terms().collect();
    for (c, _) in &terms {
        if ball_relation(ball, &c.as_ball())? == BallRelation::Disjoint {
            return Err(Error::SupportViolation("support exceeds the ball"));
        }
    }
    let f = StepFunction::from_terms(u.prime(), u.dim(), &terms)?;
    f.refine_to(ball.radius_exp.max(f.support_exp()), u.scale().max(-ball.radius_exp))
}

fn spectral_global(u: &StepFunction, params: &VtParams, alpha: f64) -> Result<f64> {
    let g = u.fourier()?;
    let c1 = spectral_weight_c1(params, alpha);
    let n = params.dim as f64;
    let s = g.scale();
    let dual_measure = g.cell_measure();
    let zero_weight = (1.0 - params.pw(-n)) * params.pw(-(s as f64) * (2.0 * alpha + n))
        / (1.0 - params.pw(-2.0 * alpha - n));
    let mut acc = KahanF64::new();
    for (cell, v) in g.terms() {
        let w = match abs_exp(&cell.center) {
            Some(t) => params.pw(2.0 * alpha * t as f64) * dual_measure,
            None => zero_weight,
        };
        acc.add(v.norm_sqr() * w * c1);
    }
    Ok(acc.value())
}

fn spectral_ball(u: &StepFunction, params: &VtParams, alpha: f64, ball: &Ball) -> Result<f64> {
    let ur = shift_to_ball_grid(&u.restrict_ball(ball)?, ball)?;
    let n_exp = ball.radius_exp;
    let g = ur.fourier()?;
    let c1 = spectral_weight_c1(params, alpha);
    let c2 = spectral_weight_c2(params, alpha, n_exp);
    let n = params.dim as f64;
    // normalized discrete dual measure for the Plancherel identity on B_N
    let weight = params.pw(-(n_exp as f64) * n);
    let mut acc = KahanF64::new();
    for (cell, v) in g.terms() {
        if let Some(t) = abs_exp(&cell.center) {
            acc.add(v.norm_sqr() * (c1 * params.pw(2.0 * alpha * t as f64) - c2) * weight);
        }
        // the trivial coset carries zero weight
    }
    Ok(acc.value())
}

/// The squared Gagliardo seminorm computed two ways: exact cell-pair double
/// integral, and the Plancherel route with the radial weight. `domain = None`
/// integrates over the whole space (zero extension), `Some(ball)` over the
/// ball squared with the discrete dual group.
pub fn gagliardo_seminorm(
    u: &StepFunction,
    alpha: f64,
    domain: Option<&Ball>,
) -> Result<SeminormReport> {
    require_fractional(alpha)?;
    let params = VtParams::new(alpha, u.prime(), u.dim())?;
    let (d, s) = match domain {
        None => (
            double_integral_global(u, &params, alpha)?,
            spectral_global(u, &params, alpha)?,
        ),
        Some(ball) => (
            double_integral_ball(u, &params, alpha, ball)?,
            spectral_ball(u, &params, alpha, ball)?,
        ),
    };
    let gap = (d - s).abs() / d.abs().max(s.abs()).max(f64::MIN_POSITIVE);
    Ok(SeminormReport { value_double_integral: d, value_spectral: s, relative_gap: gap })
}

/// `||u||_{L^{alpha*}} <= C [u]_alpha` with `alpha* = 2n/(n - 2 alpha)`,
/// admissible for `0 < alpha < min(1, n/2)`.
pub fn check_fractional_sobolev(
    u: &StepFunction,
    alpha: f64,
    corpus_id: &str,
) -> Result<InequalityReport> {
    let n = u.dim() as f64;
    if !(alpha > 0.0 && alpha < 1.0f64.min(n / 2.0)) {
        return Err(Error::AlphaOutOfRange(alpha, "(0, min(1, n/2))"));
    }
    if u.is_zero() {
        return Ok(InequalityReport {
            lhs: 0.0,
            rhs_seminorm: 0.0,
            empirical_constant: 0.0,
            corpus_id: corpus_id.into(),
            pass: true,
            degenerate: true,
        });
    }
    let params = VtParams::new(alpha, u.prime(), u.dim())?;
    let a_star = 2.0 * n / (n - 2.0 * alpha);
    let mut acc = KahanF64::new();
    for (_, v) in u.terms() {
        acc.add(v.norm().powf(a_star));
    }
    let lhs = (acc.value() * u.cell_measure()).powf(1.0 / a_star);
    let rhs = double_integral_global(u, &params, alpha)?.sqrt();
    let ratio = lhs / rhs;
    Ok(InequalityReport {
        lhs,
        rhs_seminorm: rhs,
        empirical_constant: ratio,
        corpus_id: corpus_id.into(),
        pass: ratio.is_finite(),
        degenerate: false,
    })
}

/// `integral_Omega |u|^2 <= C * global double seminorm` for `u` vanishing
/// outside `Omega`. Both sides are squared quantities here.
pub fn check_poincare(
    u: &StepFunction,
    alpha: f64,
    omega: &OpenSetDecomposition,
    corpus_id: &str,
) -> Result<InequalityReport> {
    let n = u.dim() as f64;
    if !(alpha > 0.0 && alpha < 1.0f64.min(n / 2.0)) {
        return Err(Error::AlphaOutOfRange(alpha, "(0, min(1, n/2))"));
    }
    for (cell, _) in u.terms() {
        let inside = omega.balls().iter().any(|b| {
            matches!(
                ball_relation(b, &cell.as_ball()),
                Ok(BallRelation::AContainsB | BallRelation::Equal)
            )
        });
        if !inside {
            return Err(Error::SupportViolation("u must vanish outside Omega"));
        }
    }
    if u.is_zero() {
        return Ok(InequalityReport {
            lhs: 0.0,
            rhs_seminorm: 0.0,
            empirical_constant: 0.0,
            corpus_id: corpus_id.into(),
            pass: true,
            degenerate: true,
        });
    }
    let params = VtParams::new(alpha, u.prime(), u.dim())?;
    let lhs = u.l2_norm_sq();
    let rhs = double_integral_global(u, &params, alpha)?;
    let ratio = lhs / rhs;
    Ok(InequalityReport {
        lhs,
        rhs_seminorm: rhs,
        empirical_constant: ratio,
        corpus_id: corpus_id.into(),
        pass: ratio.is_finite(),
        degenerate: false,
    })
}

/// Mean value `p^{-Nn} integral_{B_N} u`.
pub fn mean_on_ball(u: &StepFunction, ball: &Ball) -> Result<Complex64> {
    let ur = u.restrict_ball(ball)?;
    let n = u.dim() as i32;
    Ok(ur.integrate() * (u.prime() as f64).powi(-ball.radius_exp * n))
}

/// `||u - mean||_{L^2(B_N)} <= C [u]_{alpha,N}`; both sides reported as
/// norms (not squares).
pub fn check_poincare_wirtinger(
    u: &StepFunction,
    alpha: f64,
    n_exp: i32,
    corpus_id: &str,
) -> Result<InequalityReport> {
    require_fractional(alpha)?;
    let ball = Ball::new(PadicPoint::zero(u.prime(), u.dim()), n_exp);
    let ur = shift_to_ball_grid(&u.restrict_ball(&ball)?, &ball)?;
    let mean = mean_on_ball(&ur, &ball)?;
    let ones = full_ball_indicator(u.prime(), u.dim(), n_exp, ur.scale())?;
    let centered = ur.sub(&ones.scaled(mean))?;
    let lhs = centered.l2_norm_sq().sqrt();
    let params = VtParams::new(alpha, u.prime(), u.dim())?;
    let rhs = double_integral_ball(&ur, &params, alpha, &ball)?.sqrt();
    let degenerate = rhs == 0.0;
    let ratio = if degenerate { 0.0 } else { lhs / rhs };
    Ok(InequalityReport {
        lhs,
        rhs_seminorm: rhs,
        empirical_constant: ratio,
        corpus_id: corpus_id.into(),
        pass: degenerate || ratio.is_finite(),
        degenerate,
    })
}

fn full_ball_indicator(prime: u32, dim: usize, n_exp: i32, scale: i32) -> Result<StepFunction> {
    StepFunction::indicator_ball(&Ball::new(PadicPoint::zero(prime, dim), n_exp))?
        .refine_to(n_exp, scale)
}

/// Pair-weight Laplacian of the ball seminorm on the scale-`m` grid:
/// `[u]^2_{alpha,N} = u^T L u` for cell coefficient vectors `u`.
fn seminorm_laplacian(
    prime: u32,
    dim: usize,
    n_exp: i32,
    scale: i32,
    alpha: f64,
) -> Result<(SymMatrix, StepFunction)> {
    let params = VtParams::new(alpha, prime, dim)?;
    let grid_fn = full_ball_indicator(prime, dim, n_exp, scale)?;
    let view = grid_fn.grid_view()?;
    let n_cells = view.len();
    if n_cells > MATRIX_CELL_CAP {
        return Err(Error::GridTooLarge { cells: n_cells as u128, cap: MATRIX_CELL_CAP as u128 });
    }
    let n = dim as f64;
    let cm = view.cell_measure();
    let mut l = SymMatrix::zeros(n_cells);
    for i in 0..n_cells {
        let mut diag = KahanF64::new();
        for j in 0..n_cells {
            if i == j {
                continue;
            }
            let t = view.distance_exp(i, j).expect("distinct cells");
            let w = params.pw(-(n + 2.0 * alpha) * t as f64) * cm * cm;
            diag.add(w);
            if j > i {
                l.set(i, j, -2.0 * w);
            }
        }
        l.set(i, i, 2.0 * diag.value());
    }
    Ok((l, grid_fn))
}

/// Certified best constant for the mean-zero Poincare-Wirtinger inequality
/// at scale `m`: the smallest Rayleigh quotient of the seminorm over
/// mean-zero cell functions on `B_N`, by a dense symmetric eigensolve.
#[derive(Debug, Clone)]
pub struct RayleighResult {
    pub lambda_min: f64,
    pub best_constant: f64,
    pub minimizer: StepFunction,
}

pub fn best_constant_rayleigh(
    prime: u32,
    dim: usize,
    n_exp: i32,
    scale: i32,
    alpha: f64,
) -> Result<RayleighResult> {
    require_fractional(alpha)?;
    let (l, grid_fn) = seminorm_laplacian(prime, dim, n_exp, scale, alpha)?;
    let (vals, vecs) = jacobi_eigen(&l);
    // the kernel direction is the constant vector; the next eigenvalue is
    // the mean-zero minimum of the Rayleigh quotient
    let lambda2 = vals[1];
    let cm = (prime as f64).powi(-scale * dim as i32);
    let lambda_min = lambda2 / cm;
    let vec = &vecs[1];
    let terms: Vec<(Cell, Complex64)> = grid_fn
        .grid_view()?
        .centers
        .iter()
        .zip(vec)
        .map(|(c, &v)| (Cell::new(c.clone(), -scale), Complex64::new(v, 0.0)))
        .collect();
    let minimizer = StepFunction::from_terms(prime, dim, &terms)?;
    Ok(RayleighResult { lambda_min, best_constant: lambda_min.powf(-0.5), minimizer })
}

/// One row of a best-constant refinement sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayleighSweepRow {
    pub alpha: f64,
    pub n_exp: i32,
    pub scale: i32,
    pub lambda_min: f64,
    /// Largest observed Poincare-Wirtinger ratio on a seeded corpus at this
    /// scale; stays at or below `lambda_min^{-1/2}` when the solve is right.
    pub ratio_max: f64,
}

/// Sweep the certified best constant over scales and orders: the CSV-facing
/// refinement study (dense solves stay small because the sweep walks `m`
/// instead of pushing one huge eigenproblem).
pub fn rayleigh_sweep(
    prime: u32,
    dim: usize,
    n_exp: i32,
    scales: &[i32],
    alphas: &[f64],
    corpus_seed: u64,
) -> Result<Vec<RayleighSweepRow>> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        for &m in scales {
            let r = best_constant_rayleigh(prime, dim, n_exp, m, alpha)?;
            let spec = crate::corpus::CorpusSpec {
                prime,
                dim,
                support_exp: n_exp,
                scale: m,
                density: 0.7,
                real: true,
            };
            let mut ratio_max = 0.0f64;
            for (i, u) in crate::corpus::corpus(corpus_seed, &spec, 8)?.iter().enumerate() {
                let rep = check_poincare_wirtinger(u, alpha, n_exp, &format!("sweep-{i}"))?;
                if !rep.degenerate {
                    ratio_max = ratio_max.max(rep.empirical_constant);
                }
            }
            rows.push(RayleighSweepRow { alpha, n_exp, scale: m, lambda_min: r.lambda_min, ratio_max });
        }
    }
    Ok(rows)
}

/// Upper bound on the capacity of `e` inside `B_N`: minimize the quadratic
/// form over scale-`m` cell functions pinned to 1 on `e`. Decreases weakly
/// as the scale refines.
pub fn capacity_upper(
    problem: &CapacityProblem,
    alpha: f64,
    prime: u32,
    dim: usize,
) -> Result<f64> {
    require_fractional(alpha)?;
    if problem.e_cells.is_empty() {
        return Err(Error::EmptyConstraint("capacity needs a nonempty compact set"));
    }
    let params = VtParams::new(alpha, prime, dim)?;
    let ball = Ball::new(PadicPoint::zero(prime, dim), problem.ball_exp);
    for c in &problem.e_cells {
        if c.scale() > problem.scale {
            return Err(Error::UnresolvableAtScale(problem.scale));
        }
        match ball_relation(&ball, &c.as_ball())? {
            BallRelation::AContainsB | BallRelation::Equal => {}
            _ => return Err(Error::SupportViolation("e must sit inside B_N")),
        }
    }
    let (mut q, grid_fn) = seminorm_laplacian(prime, dim, problem.ball_exp, problem.scale, alpha)?;
    let view = grid_fn.grid_view()?;
    if problem.variant == CapacityVariant::GlobalSeminorm {
        let out = pair_tail(&params, 2.0 * alpha, problem.ball_exp);
        let cm = view.cell_measure();
        for i in 0..view.len() {
            let d = q.get(i, i);
            q.set(i, i, d + 2.0 * cm * out);
        }
    }
    // pin every grid cell covered by an e-cell to 1
    let mut fixed = vec![false; view.len()];
    for (i, center) in view.centers.iter().enumerate() {
        let cell_ball = Ball::new(center.clone(), -problem.scale);
        for e in &problem.e_cells {
            if matches!(
                ball_relation(&e.as_ball(), &cell_ball)?,
                BallRelation::AContainsB | BallRelation::Equal
            ) {
                fixed[i] = true;
            }
        }
    }
    if !fixed.iter().any(|&f| f) {
        return Err(Error::EmptyConstraint("e does not meet the grid"));
    }
    let free: Vec<usize> = (0..view.len()).filter(|&i| !fixed[i]).collect();
    let mut u = vec![0.0f64; view.len()];
    for (i, &f) in fixed.iter().enumerate() {
        if f {
            u[i] = 1.0;
        }
    }
    if !free.is_empty() {
        let nf = free.len();
        let qff = SymMatrix::from_fn(nf, |a, b| q.get(free[a], free[b]));
        let mut rhs = vec![0.0f64; nf];
        for (a, &i) in free.iter().enumerate() {
            let mut s = KahanF64::new();
            for (j, &fj) in fixed.iter().enumerate() {
                if fj {
                    s.add(q.get(i, j));
                }
            }
            rhs[a] = -s.value();
        }
        let sol = solve_spd(&qff, &rhs)?;
        for (a, &i) in free.iter().enumerate() {
            u[i] = sol[a];
        }
    }
    Ok(q.quadratic_form(&u).max(0.0))
}

/// Capacity-weighted Poincare check: `cap(e, B_N) ||u||^2 <= C [u]^2` for
/// `u` supported in a child ball of `B_N` at positive distance from `e`.
pub fn check_capacity_inequality(
    u: &StepFunction,
    e_cells: &[Cell],
    alpha: f64,
    n_exp: i32,
    corpus_id: &str,
) -> Result<InequalityReport> {
    if !u.is_real(0.0) {
        return Err(Error::NotRealValued);
    }
    if u.is_zero() {
        return Ok(InequalityReport {
            lhs: 0.0,
            rhs_seminorm: 0.0,
            empirical_constant: 0.0,
            corpus_id: corpus_id.into(),
            pass: true,
            degenerate: true,
        });
    }
    // locate the child ball of B_N carrying the support
    let mut child: Option<Ball> = None;
    for (cell, _) in u.terms() {
        let cb = Ball::new(cell.center.clone(), n_exp - 1);
        match &child {
            None => child = Some(cb),
            Some(existing) => {
                if ball_relation(existing, &cb)? != BallRelation::Equal {
                    return Err(Error::SupportViolation(
                        "u must live in a single child ball of B_N",
                    ));
                }
            }
        }
        for e in e_cells {
            if ball_relation(&e.as_ball(), &cell.as_ball())? != BallRelation::Disjoint {
                return Err(Error::SupportViolation("supp u must avoid e"));
            }
        }
    }
    let child = child.expect("nonzero function has a support cell");
    let problem = CapacityProblem {
        e_cells: e_cells.to_vec(),
        ball_exp: n_exp,
        scale: u.scale(),
        variant: CapacityVariant::GlobalSeminorm,
    };
    let cap = capacity_upper(&problem, alpha, u.prime(), u.dim())?;
    let params = VtParams::new(alpha, u.prime(), u.dim())?;
    // seminorm over the child ball; translate so the grid is centered
    let shifted = recenter(u, &child)?;
    let centered_ball = Ball::new(PadicPoint::zero(u.prime(), u.dim()), n_exp - 1);
    let sem = double_integral_ball(&shifted, &params, alpha, &centered_ball)?;
    let lhs = cap * u.l2_norm_sq();
    let ratio = if sem == 0.0 { 0.0 } else { lhs / sem };
    Ok(InequalityReport {
        lhs,
        rhs_seminorm: sem,
        empirical_constant: ratio,
        corpus_id: corpus_id.into(),
        pass: ratio.is_finite(),
        degenerate: sem == 0.0,
    })
}

/// Translate a function supported in `ball` so the ball is centered at 0.
/// Translation leaves every radial quantity invariant.
fn recenter(u: &StepFunction, ball: &Ball) -> Result<StepFunction> {
    if ball.center.is_zero() {
        return Ok(u.clone());
    }
    let t = negate_mod(&ball.center, u.scale());
    u.translate(&t)
}

/// `-x` reduced mod `p^scale` (finite digit expansion of the complement).
fn negate_mod(x: &PadicPoint, scale: i32) -> PadicPoint {
    let p = x.prime();
    let coords = x
        .coords()
        .iter()
        .map(|c| {
            if c.is_zero() {
                return crate::padic::PadicCoord::zero();
            }
            let start = c.valuation;
            let len = (scale - start).max(0) as usize;
            let mut digits = Vec::new();
            for k in 0..len {
                let d = c.digits.get(k).copied().unwrap_or(0);
                if k == 0 {
                    digits.push((p - d) % p);
                } else {
                    digits.push(p - 1 - d);
                }
            }
            crate::padic::PadicCoord { valuation: start, digits }
        })
        .collect();
    PadicPoint::new(p, coords).expect("digits in range").reduce_mod(scale)
}

/// Both sides of the weighted positivity identity
/// `2 integral (D^alpha u) u f_alpha = u(0)^2 + a_alpha double-integral
/// |u(x)-u(y)|^2 |x-y|^{-n-alpha} f_alpha(x) dx dy`.
#[allow(clippy::needless_range_loop)] // the pair loop drives distance_exp(i, j)
pub fn weighted_positivity(u: &StepFunction, params: &VtParams) -> Result<(f64, f64)> {
    if !u.is_real(0.0) {
        return Err(Error::NotRealValued);
    }
    let alpha = params.alpha;
    let n = params.dim as f64;
    if !(alpha > 0.0 && alpha < n) {
        return Err(Error::AlphaOutOfRange(alpha, "(0, n)"));
    }
    if u.is_zero() {
        return Ok((0.0, 0.0));
    }
    // left side: spectral route for the operator, exact Riesz pairing
    let du = apply_spectral(u, params)?;
    let product = du.step.mul(u)?;
    let lhs = 2.0 * riesz_kernel_pairing(&product, alpha, params)?.re;

    // right side: direct kernel sums with the Riesz weight per cell
    let view = u.grid_view()?;
    let cm = view.cell_measure();
    let aa = kernel_constant(params);
    let gamma = riesz_gamma(params, alpha)?;
    let m = u.scale();
    let fa: Vec<f64> = view
        .centers
        .iter()
        .map(|c| riesz_cell_int(params, alpha, abs_exp(c), m, gamma))
        .collect();
    let mut acc = KahanF64::new();
    for i in 0..view.len() {
        for j in 0..view.len() {
            if i == j {
                continue;
            }
            let d2 = (view.values[i] - view.values[j]).norm_sqr();
            if d2 == 0.0 {
                continue;
            }
            let t = view.distance_exp(i, j).expect("distinct cells");
            acc.add(d2 * params.pw(-(n + alpha) * t as f64) * cm * fa[i]);
        }
    }
    // x in a cell, y beyond the support ball, and then the reverse order:
    // integral_{|x| > p^M} f_alpha(x) |x|^{-n-alpha} dx = p^{-n(M+1)} / Gamma
    let out_y = pair_tail(params, alpha, u.support_exp());
    let t_out = params.pw(-n * (u.support_exp() + 1) as f64) / gamma;
    for (value, fa_i) in view.values.iter().zip(&fa) {
        let v2 = value.norm_sqr();
        if v2 != 0.0 {
            acc.add(v2 * fa_i * out_y);
            acc.add(v2 * cm * t_out);
        }
    }
    let u0 = u.evaluate(&PadicPoint::zero(u.prime(), u.dim()))?.re;
    let rhs = u0 * u0 + aa * acc.value();
    Ok((lhs, rhs))
}

fn riesz_cell_int(params: &VtParams, order: f64, e: Option<i32>, m: i32, gamma: f64) -> f64 {
    let n = params.dim as f64;
    match e {
        Some(t) => params.pw((order - n) * t as f64) * params.pw(-(m as f64) * n) / gamma,
        None => {
            (1.0 - params.pw(-n)) * params.pw(-(m as f64) * order) / (1.0 - params.pw(-order))
                / gamma
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_ball(p: u32) -> Ball {
        Ball::new(PadicPoint::zero(p, 1), 0)
    }

    #[test]
    fn seminorm_of_constant_on_ball_is_zero() {
        let u = StepFunction::indicator_ball(&unit_ball(2)).unwrap();
        let rep = gagliardo_seminorm(&u, 0.4, Some(&unit_ball(2))).unwrap();
        assert!(rep.value_double_integral.abs() < 1e-15);
        assert!(rep.value_spectral.abs() < 1e-12);
    }

    #[test]
    fn seminorm_rejects_alpha_one() {
        let u = StepFunction::indicator_ball(&unit_ball(2)).unwrap();
        assert!(gagliardo_seminorm(&u, 1.0, None).is_err());
    }

    #[test]
    fn seminorm_dual_route_hand_case() {
        // u = 1 on 2Z_2, -1 on 1+2Z_2: ball seminorm over Z_2 equals 2 at
        // alpha = 1/2 (single cell pair at distance 1), global equals 3.
        let even = StepFunction::indicator_cell(&Cell::new(PadicPoint::zero(2, 1), -1)).unwrap();
        let odd = StepFunction::indicator_cell(&Cell::new(
            PadicPoint::from_integer_scaled(2, 1, 0),
            -1,
        ))
        .unwrap();
        let u = even.sub(&odd).unwrap();
        let rep = gagliardo_seminorm(&u, 0.5, Some(&unit_ball(2))).unwrap();
        assert!((rep.value_double_integral - 2.0).abs() < 1e-14);
        assert!(rep.relative_gap < 1e-12);
        let rep_g = gagliardo_seminorm(&u, 0.5, None).unwrap();
        assert!((rep_g.value_double_integral - 3.0).abs() < 1e-14);
        assert!(rep_g.relative_gap < 1e-12);
    }

    #[test]
    fn translation_invariance_of_seminorm() {
        let u = StepFunction::from_terms(
            3,
            1,
            &[
                (Cell::new(PadicPoint::zero(3, 1), -1), Complex64::new(1.0, 0.0)),
                (
                    Cell::new(PadicPoint::from_integer_scaled(3, 2, 0), -1),
                    Complex64::new(-0.5, 0.0),
                ),
            ],
        )
        .unwrap();
        let a = PadicPoint::from_integer_scaled(3, 7, 0);
        let ut = u.translate(&a).unwrap();
        let r1 = gagliardo_seminorm(&u, 0.3, None).unwrap();
        let r2 = gagliardo_seminorm(&ut, 0.3, None).unwrap();
        assert!((r1.value_double_integral - r2.value_double_integral).abs() < 1e-14);
    }

    #[test]
    fn poincare_wirtinger_constant_function_lhs_zero() {
        let u = StepFunction::indicator_ball(&unit_ball(2)).unwrap();
        let rep = check_poincare_wirtinger(&u, 0.5, 0, "const").unwrap();
        assert!(rep.lhs.abs() < 1e-14);
        assert!(rep.degenerate);
    }

    #[test]
    fn capacity_ball_variant_vanishes() {
        let e = Cell::new(PadicPoint::zero(2, 1), 0);
        let problem = CapacityProblem {
            e_cells: vec![e],
            ball_exp: 0,
            scale: 2,
            variant: CapacityVariant::BallSeminorm,
        };
        let cap = capacity_upper(&problem, 0.5, 2, 1).unwrap();
        assert!(cap.abs() < 1e-12);
    }

    #[test]
    fn capacity_monotone_in_e() {
        let e1 = vec![Cell::new(PadicPoint::zero(2, 1), -2)];
        let e2 = vec![
            Cell::new(PadicPoint::zero(2, 1), -2),
            Cell::new(PadicPoint::from_integer_scaled(2, 1, 0), -2),
        ];
        let mk = |cells: Vec<Cell>| CapacityProblem {
            e_cells: cells,
            ball_exp: 0,
            scale: 3,
            variant: CapacityVariant::GlobalSeminorm,
        };
        let c1 = capacity_upper(&mk(e1), 0.5, 2, 1).unwrap();
        let c2 = capacity_upper(&mk(e2), 0.5, 2, 1).unwrap();
        assert!(c1 > 0.0);
        assert!(c1 <= c2 + 1e-12);
    }

    #[test]
    fn weighted_positivity_zero_and_unit() {
        let params = VtParams::new(0.5, 2, 1).unwrap();
        let z = StepFunction::zero(2, 1);
        assert_eq!(weighted_positivity(&z, &params).unwrap(), (0.0, 0.0));

        let u = StepFunction::indicator_ball(&unit_ball(2)).unwrap();
        let (l, r) = weighted_positivity(&u, &params).unwrap();
        assert!((l - r).abs() < 1e-10, "lhs {l} rhs {r}");
        assert!(l >= 1.0 - 1e-10, "u(0)^2 = 1 contributes: {l}");
    }
}
