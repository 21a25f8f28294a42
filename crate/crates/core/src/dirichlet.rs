//! Galerkin solution of the nonlocal Dirichlet problem: equation
//! `D^alpha u = f` on an open set with prescribed exterior values.
//!
//! The Gram matrix of the energy inner product is assembled from a
//! three-regime closed form per entry (no quadrature); the exterior
//! condition enters the load vector exactly through closed-form radial
//! tails, so no exterior mesh exists. Assembly and solve run in a
//! diagonally normalized basis to keep extreme scale ranges inside f64.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accum::KahanF64;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SymMatrix};
use crate::operator::{apply_hypersingular, kernel_constant, VtParams};
use crate::padic::{
    abs_exp, ball_relation, Ball, BallRelation, Cell, ComparisonHypothesis, DomainFamily,
    OpenSetDecomposition, PadicPoint,
};
use crate::schwartz::StepFunction;

/// Basis-size cap for the dense direct solver.
pub const BASIS_CELL_CAP: usize = 4096;

/// Exterior data `g` on the complement of the domain.
#[derive(Debug, Clone)]
pub enum ExteriorData {
    Zero,
    /// Step function supported away from the domain.
    Step(StepFunction),
    /// `amplitude * |x|^exponent` on the whole complement (radial tag);
    /// requires a family-tagged domain so the complement is radial.
    Radial { amplitude: f64, exponent: f64 },
}

impl ExteriorData {
    pub fn is_nonnegative(&self) -> bool {
        match self {
            ExteriorData::Zero => true,
            ExteriorData::Step(g) => g.terms().all(|(_, v)| v.im == 0.0 && v.re >= 0.0),
            ExteriorData::Radial { amplitude, .. } => *amplitude >= 0.0,
        }
    }
}

/// The Dirichlet problem data: domain, order, interior load, exterior values.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub omega: OpenSetDecomposition,
    pub alpha: f64,
    pub f: StepFunction,
    pub g: ExteriorData,
}

/// Assembled and solved Galerkin system over a disjoint cell basis.
/// `gram_scaled` holds `G_ij / sqrt(G_ii G_jj)`; `diag_sqrt[i]` recovers the
/// unnormalized coefficient of cell `i` as `solution_scaled[i] / diag_sqrt[i]`.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub params: VtParams,
    pub basis: Vec<Cell>,
    pub ball_of: Vec<usize>,
    pub gram_scaled: SymMatrix,
    pub diag_sqrt: Vec<f64>,
    pub rhs_scaled: Vec<f64>,
    pub solution_scaled: Vec<f64>,
    pub residual_rel: f64,
}

impl GalerkinSystem {
    /// Value of the solution on each basis cell.
    pub fn cell_values(&self) -> Vec<f64> {
        self.solution_scaled
            .iter()
            .zip(&self.diag_sqrt)
            .map(|(c, d)| c / d)
            .collect()
    }

    /// Energy `u^T G u` of the solution.
    pub fn energy(&self) -> f64 {
        self.gram_scaled.quadratic_form(&self.solution_scaled)
    }

    /// Unnormalized Gram entry, recomputed from the closed form.
    pub fn gram_entry(&self, i: usize, j: usize) -> f64 {
        gram_entry_raw(&self.params, &self.basis[i], &self.basis[j])
    }

    /// The solution as a step function (uniform shallow bases only).
    pub fn solution_step(&self) -> Result<StepFunction> {
        let terms: Vec<(Cell, Complex64)> = self
            .basis
            .iter()
            .zip(self.cell_values())
            .map(|(c, v)| (c.clone(), Complex64::new(v, 0.0)))
            .collect();
        StepFunction::from_terms(self.params.prime, self.params.dim, &terms)
    }
}

/// Closed-form Gram entry `(1_{c_i}, 1_{c_j})` of the energy inner product,
/// valid for disjoint cells of mixed scales: the spectral integral
/// `p^{-(m_i+m_j)n} integral_{|xi| <= p^{min m}} |xi|^alpha chi((c_i-c_j) xi) dxi`
/// collapses to one closed-form term per center distance.
pub fn gram_entry_raw(params: &VtParams, a: &Cell, b: &Cell) -> f64 {
    let n = params.dim as f64;
    let alpha = params.alpha;
    let mi = a.scale() as f64;
    let mj = b.scale() as f64;
    match a.center.distance_exp(&b.center).expect("same prime/dim") {
        None => {
            debug_assert_eq!(a.scale(), b.scale(), "basis cells must be disjoint");
            params.pw(mi * (alpha - n)) * (1.0 - params.pw(-n)) / (1.0 - params.pw(-alpha - n))
        }
        Some(t) => {
            -kernel_constant(params) * params.pw(-(alpha + n) * t as f64) * params.pw(-(mi + mj) * n)
        }
    }
}

/// Unnormalized Gram matrix of the energy inner product over a disjoint
/// cell basis, every entry from the closed form. Desk-scale sizes; the
/// solver itself works in the diagonally normalized form instead.
pub fn assemble_gram_matrix(params: &VtParams, basis: &[Cell]) -> SymMatrix {
    SymMatrix::from_fn(basis.len(), |i, j| gram_entry_raw(params, &basis[i], &basis[j]))
}

fn gram_entry_scaled(params: &VtParams, a: &Cell, b: &Cell, t: Option<i32>) -> f64 {
    let n = params.dim as f64;
    let alpha = params.alpha;
    match t {
        None => 1.0,
        Some(t) => {
            let half = (a.scale() as f64 + b.scale() as f64) / 2.0;
            -(params.pw(alpha) - 1.0) / (1.0 - params.pw(-n))
                * params.pw(-(alpha + n) * (t as f64 + half))
        }
    }
}

fn diag_sqrt_of(params: &VtParams, cell: &Cell) -> f64 {
    let n = params.dim as f64;
    let alpha = params.alpha;
    let c_d = (1.0 - params.pw(-n)) / (1.0 - params.pw(-alpha - n));
    c_d.sqrt() * params.pw(cell.scale() as f64 * (alpha - n) / 2.0)
}

/// Uniform scale-`m` cell basis over the domain balls inside `B(p^support_exp)`.
pub fn uniform_basis(
    omega: &OpenSetDecomposition,
    scale_m: i32,
    support_exp: i32,
) -> Result<(Vec<Cell>, Vec<usize>)> {
    let mut basis = Vec::new();
    let mut ball_of = Vec::new();
    let envelope = Ball::new(PadicPoint::zero(omega.prime(), omega.dim()), support_exp);
    for (k, b) in omega.balls().iter().enumerate() {
        if b.radius_exp < -scale_m {
            return Err(Error::UnresolvableAtScale(scale_m));
        }
        match ball_relation(&envelope, b)? {
            BallRelation::AContainsB | BallRelation::Equal => {}
            _ => continue,
        }
        let levels = (scale_m + b.radius_exp) as u32;
        for cell in subdivide(&Cell::new(b.center.clone(), b.radius_exp), levels)? {
            basis.push(cell);
            ball_of.push(k);
        }
        if basis.len() > BASIS_CELL_CAP {
            return Err(Error::GridTooLarge {
                cells: basis.len() as u128,
                cap: BASIS_CELL_CAP as u128,
            });
        }
    }
    Ok((basis, ball_of))
}

/// Per-ball basis for truncated family domains: balls finer than the
/// resolution scale are skipped (the approximation solves on the resolvable
/// truncation), and each kept ball is subdivided at most `extra_cap` levels.
pub fn family_basis(
    omega: &OpenSetDecomposition,
    resolve_m: i32,
    extra_cap: i32,
) -> Result<(Vec<Cell>, Vec<usize>)> {
    let mut basis = Vec::new();
    let mut ball_of = Vec::new();
    for (k, b) in omega.balls().iter().enumerate() {
        if b.radius_exp < -resolve_m {
            continue;
        }
        let levels = (resolve_m + b.radius_exp).min(extra_cap).max(0) as u32;
        for cell in subdivide(&Cell::new(b.center.clone(), b.radius_exp), levels)? {
            basis.push(cell);
            ball_of.push(k);
        }
    }
    Ok((basis, ball_of))
}

/// Split a cell `levels` times into its descendants.
pub fn subdivide(cell: &Cell, levels: u32) -> Result<Vec<Cell>> {
    let mut cur = vec![cell.clone()];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(cur.len() * cell.prime() as usize);
        for c in cur {
            next.extend(c.children());
        }
        cur = next;
        if cur.len() > BASIS_CELL_CAP {
            return Err(Error::GridTooLarge {
                cells: cur.len() as u128,
                cap: BASIS_CELL_CAP as u128,
            });
        }
    }
    Ok(cur)
}

/// Interior load `integral_{cell_i} f`, exact across scale mismatches.
fn interior_loads(f: &StepFunction, basis: &[Cell]) -> Result<Vec<f64>> {
    let mut out = vec![0.0f64; basis.len()];
    if f.is_zero() {
        return Ok(out);
    }
    let terms: Vec<(Cell, Complex64)> = f.terms().collect();
    for (i, bc) in basis.iter().enumerate() {
        let mut acc = KahanF64::new();
        for (fc, v) in &terms {
            match ball_relation(&bc.as_ball(), &fc.as_ball())? {
                BallRelation::AContainsB | BallRelation::Equal => {
                    acc.add(v.re * fc.measure().to_f64());
                }
                BallRelation::BContainsA => {
                    acc.add(v.re * bc.measure().to_f64());
                }
                BallRelation::Disjoint => {}
            }
        }
        out[i] = acc.value();
    }
    Ok(out)
}

/// `I_k = integral_{complement} g(x) k(x - x_k) dx`: the coupling of the
/// exterior data into domain ball `k`. Constant across each ball because
/// `|x - z|` does not depend on `z` inside the ball.
fn exterior_coupling(
    omega: &OpenSetDecomposition,
    g: &ExteriorData,
    params: &VtParams,
) -> Result<Vec<f64>> {
    let balls = omega.balls();
    match g {
        ExteriorData::Zero => Ok(vec![0.0; balls.len()]),
        ExteriorData::Step(gstep) => {
            let terms: Vec<(Cell, Complex64)> = gstep.terms().collect();
            for (c, _) in &terms {
                for b in balls {
                    if ball_relation(b, &c.as_ball())? != BallRelation::Disjoint {
                        return Err(Error::SupportViolation(
                            "exterior data must avoid the domain",
                        ));
                    }
                }
            }
            let ck = kernel_constant(params);
            let n = params.dim as f64;
            let a = params.alpha;
            let gm = gstep.cell_measure();
            balls
                .iter()
                .map(|b| {
                    let mut acc = KahanF64::new();
                    for (c, v) in &terms {
                        let t = c
                            .center
                            .distance_exp(&b.center)?
                            .expect("exterior cell cannot contain the ball center");
                        acc.add(v.re * ck * params.pw(-(a + n) * t as f64) * gm);
                    }
                    Ok(acc.value())
                })
                .collect()
        }
        ExteriorData::Radial { amplitude, exponent } => {
            radial_exterior_coupling(omega, *amplitude, *exponent, params)
        }
    }
}

/// Exact coupling for radial exterior data on a family domain, whose
/// complement is a union of full spheres plus a ball around the origin.
fn radial_exterior_coupling(
    omega: &OpenSetDecomposition,
    amp: f64,
    expo: f64,
    params: &VtParams,
) -> Result<Vec<f64>> {
    let a = params.alpha;
    let n = params.dim as f64;
    if expo >= a || expo + n <= 0.0 {
        return Err(Error::DivergentMoment);
    }
    // sphere exponents fully covered by the (truncated) domain
    let in_domain: Vec<i32> = match omega.family() {
        DomainFamily::PuncturedDisk { depth } => (0..*depth as i32).map(|j| -j).collect(),
        DomainFamily::SphereUnion { lambdas } => lambdas.iter().map(|l| -(*l as i32)).collect(),
        DomainFamily::Explicit => return Err(Error::ExteriorUnresolvable),
    };
    let ck = kernel_constant(params);
    let shell = 1.0 - params.pw(-n);
    omega
        .balls()
        .iter()
        .map(|b| {
            let tau = abs_exp(&b.center)
                .ok_or(Error::Config("family ball centered at the origin".into()))?
                as f64;
            // spheres above tau: distance p^s; full geometric tail minus the
            // finitely many domain spheres in range
            let upper_full = params.pw((tau + 1.0) * (expo - a)) / (1.0 - params.pw(expo - a));
            let mut upper_listed = KahanF64::new();
            for &s in &in_domain {
                if (s as f64) > tau {
                    upper_listed.add(params.pw(s as f64 * (expo - a)));
                }
            }
            // spheres below tau: distance p^tau; the kernel factor
            // p^{-tau(alpha+n)} is folded into each exponent so extreme
            // scales never leave the f64 range
            let lower_full =
                params.pw(tau * (expo - a) - (expo + n)) / (1.0 - params.pw(-(expo + n)));
            let mut lower_listed = KahanF64::new();
            for &s in &in_domain {
                if (s as f64) < tau {
                    lower_listed.add(params.pw(s as f64 * (expo + n) - tau * (a + n)));
                }
            }
            let upper = upper_full - upper_listed.value();
            let lower = lower_full - lower_listed.value();
            Ok(amp * ck * shell * (upper + lower))
        })
        .collect()
}

/// Assemble and solve on an explicit disjoint-cell basis.
pub fn solve_on_basis(
    problem: &DirichletProblem,
    basis: Vec<Cell>,
    ball_of: Vec<usize>,
) -> Result<GalerkinSystem> {
    let params = VtParams::new(problem.alpha, problem.omega.prime(), problem.omega.dim())?;
    if !problem.f.is_real(0.0) {
        return Err(Error::NotRealValued);
    }
    let nb = basis.len();
    if nb == 0 {
        return Err(Error::EmptyConstraint("empty Galerkin basis"));
    }
    if nb > BASIS_CELL_CAP {
        return Err(Error::GridTooLarge { cells: nb as u128, cap: BASIS_CELL_CAP as u128 });
    }
    let diag_sqrt: Vec<f64> = basis.iter().map(|c| diag_sqrt_of(&params, c)).collect();
    for d in &diag_sqrt {
        if !d.is_finite() || *d == 0.0 {
            return Err(Error::ExponentRange(*d));
        }
    }
    let dist: Vec<Vec<Option<i32>>> = (0..nb)
        .map(|i| {
            (0..nb)
                .map(|j| basis[i].center.distance_exp(&basis[j].center).unwrap())
                .collect()
        })
        .collect();
    let gram_scaled = SymMatrix::from_fn(nb, |i, j| {
        gram_entry_scaled(&params, &basis[i], &basis[j], dist[i][j])
    });
    let fl = interior_loads(&problem.f, &basis)?;
    let coupling = exterior_coupling(&problem.omega, &problem.g, &params)?;
    let n = params.dim as f64;
    let mut rhs_scaled = vec![0.0f64; nb];
    for i in 0..nb {
        let cell_measure = params.pw(-(basis[i].scale() as f64) * n);
        let b = fl[i] + cell_measure * coupling[ball_of[i]];
        rhs_scaled[i] = b / diag_sqrt[i];
        if !rhs_scaled[i].is_finite() {
            return Err(Error::ExponentRange(rhs_scaled[i]));
        }
    }
    let chol = Cholesky::factor(&gram_scaled)?;
    let solution_scaled = chol.solve(&rhs_scaled);
    let r = gram_scaled.matvec(&solution_scaled);
    let bnorm = rhs_scaled
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for i in 0..nb {
        worst = worst.max((r[i] - rhs_scaled[i]).abs());
    }
    Ok(GalerkinSystem {
        params,
        basis,
        ball_of,
        gram_scaled,
        diag_sqrt,
        rhs_scaled,
        solution_scaled,
        residual_rel: worst / bnorm,
    })
}

/// Independent assembly route for cross-checking the closed-form Gram
/// entries: diagonals by explicit sphere-by-sphere kernel summation (with a
/// geometric remainder), off-diagonals by direct kernel evaluation at the
/// exact center distance.
pub fn hypersingular_gram_oracle(params: &VtParams, basis: &[Cell]) -> Result<SymMatrix> {
    let n = params.dim as f64;
    let a = params.alpha;
    let ck = kernel_constant(params);
    let nb = basis.len();
    let mut m = SymMatrix::zeros(nb);
    for i in 0..nb {
        for j in i..nb {
            let v = if i == j {
                let mi = basis[i].scale();
                // sum K(p^s) mes(S_s) over spheres |y| = p^s, s >= -m+1
                let mut acc = KahanF64::new();
                let spheres = 200;
                for s in (-mi + 1)..(-mi + 1 + spheres) {
                    let kernel = ck * params.pw(-(a + n) * s as f64);
                    let mes = params.pw(n * s as f64) * (1.0 - params.pw(-n));
                    acc.add(kernel * mes);
                }
                let from = (-mi + 1 + spheres) as f64;
                let tail = ck * (1.0 - params.pw(-n)) * params.pw(-a * from) / (1.0 - params.pw(-a));
                acc.add(tail);
                params.pw(-(mi as f64) * n) * acc.value()
            } else {
                let t = basis[i]
                    .center
                    .distance_exp(&basis[j].center)?
                    .expect("disjoint cells");
                -ck * params.pw(-(a + n) * t as f64)
                    * params.pw(-((basis[i].scale() + basis[j].scale()) as f64) * n)
            };
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// Uniform-scale Galerkin solve over the domain truncated to `B(p^support_exp)`.
pub fn solve_dirichlet(
    problem: &DirichletProblem,
    scale_m: i32,
    support_exp: i32,
) -> Result<GalerkinSystem> {
    let (basis, ball_of) = uniform_basis(&problem.omega, scale_m, support_exp)?;
    solve_on_basis(problem, basis, ball_of)
}

/// Explicit solution of the homogeneous equation on a ball with exterior
/// data: the interior value is the single constant
/// `(1-p^{-alpha})/(1-p^{-n}) * p^{-N alpha} * integral g |x|^{-n-alpha}`.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub interior_constant: f64,
    pub omega_radius_exp: i32,
    pub exterior: ExteriorData,
    pub prime: u32,
    pub dim: usize,
}

impl PoissonSolution {
    /// Materialize as a step function (step or zero exterior data only).
    pub fn to_step(&self) -> Result<StepFunction> {
        let inner = StepFunction::indicator_ball(&Ball::new(
            PadicPoint::zero(self.prime, self.dim),
            self.omega_radius_exp,
        ))?
        .scaled(Complex64::new(self.interior_constant, 0.0));
        match &self.exterior {
            ExteriorData::Step(g) => g.add(&inner),
            ExteriorData::Zero => Ok(inner),
            ExteriorData::Radial { .. } => {
                Err(Error::Config("radial exterior has no finite step form".into()))
            }
        }
    }
}

/// Solve `D^alpha u = 0` on `B(p^{-N-1})` with `u = g` on `{|x| >= p^{-N}}`.
pub fn poisson_extend_ball(
    g: &ExteriorData,
    n_exp: i32,
    alpha: f64,
    prime: u32,
    dim: usize,
) -> Result<PoissonSolution> {
    let params = VtParams::new(alpha, prime, dim)?;
    let n = dim as f64;
    let moment = match g {
        ExteriorData::Zero => 0.0,
        ExteriorData::Step(gs) => {
            if gs.prime() != prime {
                return Err(Error::PrimeMismatch(gs.prime(), prime));
            }
            if gs.dim() != dim {
                return Err(Error::DimensionMismatch(gs.dim(), dim));
            }
            let gm = gs.cell_measure();
            let mut acc = KahanF64::new();
            for (c, v) in gs.terms() {
                let t = abs_exp(&c.center)
                    .ok_or(Error::SupportViolation("exterior data must avoid the ball"))?;
                if t < -n_exp {
                    return Err(Error::SupportViolation("exterior data must avoid the ball"));
                }
                acc.add(v.re * params.pw(-(n + alpha) * t as f64) * gm);
            }
            acc.value()
        }
        ExteriorData::Radial { amplitude, exponent } => {
            if *exponent >= alpha {
                return Err(Error::DivergentMoment);
            }
            amplitude * (1.0 - params.pw(-n)) * params.pw(-(n_exp as f64) * (exponent - alpha))
                / (1.0 - params.pw(*exponent - alpha))
        }
    };
    let constant = (1.0 - params.pw(-alpha)) / (1.0 - params.pw(-n))
        * params.pw(-(n_exp as f64) * alpha)
        * moment;
    Ok(PoissonSolution {
        interior_constant: constant,
        omega_radius_exp: -n_exp - 1,
        exterior: g.clone(),
        prime,
        dim,
    })
}

/// Numerical Green function on the ball `B(p^N)`: the solution with load
/// `measure(y)^{-1} 1_y`.
pub fn green_numeric(n_exp: i32, source: &Cell, scale_m: i32, alpha: f64) -> Result<GalerkinSystem> {
    let prime = source.prime();
    let dim = source.dim();
    let ball = Ball::new(PadicPoint::zero(prime, dim), n_exp);
    if !matches!(
        ball_relation(&ball, &source.as_ball())?,
        BallRelation::AContainsB | BallRelation::Equal
    ) {
        return Err(Error::SupportViolation("source cell must lie inside the ball"));
    }
    let omega = OpenSetDecomposition::explicit(prime, dim, vec![ball])?
        .with_hypothesis(ComparisonHypothesis::TranslationInvariant);
    let inv_measure = (prime as f64).powi(source.scale() * dim as i32);
    let f = StepFunction::indicator_cell(source)?.scaled(Complex64::new(inv_measure, 0.0));
    let problem = DirichletProblem { omega, alpha, f, g: ExteriorData::Zero };
    solve_dirichlet(&problem, scale_m, n_exp)
}

/// Nonnegativity and the `G <= C |x-y|^{alpha-n}` bound, fitted across all
/// source/observation pairs of one ball.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenReport {
    pub ball_exp: i32,
    pub scale: i32,
    pub min_value: f64,
    pub fitted_constant: f64,
    pub symmetry_gap: f64,
}

pub fn green_bound_check(
    prime: u32,
    dim: usize,
    n_exp: i32,
    scale_m: i32,
    alpha: f64,
) -> Result<GreenReport> {
    let ball = Ball::new(PadicPoint::zero(prime, dim), n_exp);
    let cells = subdivide(
        &Cell::new(ball.center.clone(), ball.radius_exp),
        (scale_m + n_exp) as u32,
    )?;
    let params = VtParams::new(alpha, prime, dim)?;
    let n = dim as f64;
    // one factorization, one triangular solve per source cell
    let nb = cells.len();
    let dist: Vec<Vec<Option<i32>>> = (0..nb)
        .map(|i| {
            (0..nb)
                .map(|j| cells[i].center.distance_exp(&cells[j].center).unwrap())
                .collect()
        })
        .collect();
    let gram_scaled =
        SymMatrix::from_fn(nb, |i, j| gram_entry_scaled(&params, &cells[i], &cells[j], dist[i][j]));
    let chol = Cholesky::factor(&gram_scaled)?;
    let diag_sqrt: Vec<f64> = cells.iter().map(|c| diag_sqrt_of(&params, c)).collect();
    let mut min_value = f64::INFINITY;
    let mut fitted = 0.0f64;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(nb);
    for (jsrc, src) in cells.iter().enumerate() {
        // load of measure(y)^{-1} 1_y against the normalized basis
        let mut rhs = vec![0.0f64; nb];
        rhs[jsrc] = 1.0 / diag_sqrt[jsrc];
        let sol = chol.solve(&rhs);
        let vals: Vec<f64> =
            sol.iter().zip(&diag_sqrt).map(|(c, d)| c / d).collect();
        for (i, v) in vals.iter().enumerate() {
            min_value = min_value.min(*v);
            if let Some(t) = src.center.distance_exp(&cells[i].center)? {
                fitted = fitted.max(v * params.pw((n - alpha) * t as f64));
            }
        }
        columns.push(vals);
    }
    let mut symmetry_gap = 0.0f64;
    let mut scale_ref = 0.0f64;
    for (i, col) in columns.iter().enumerate() {
        for (j, other) in columns.iter().enumerate().skip(i + 1) {
            symmetry_gap = symmetry_gap.max((col[j] - other[i]).abs());
            scale_ref = scale_ref.max(col[j].abs());
        }
    }
    Ok(GreenReport {
        ball_exp: n_exp,
        scale: scale_m,
        min_value,
        fitted_constant: fitted,
        symmetry_gap: symmetry_gap / scale_ref.max(f64::MIN_POSITIVE),
    })
}

/// Positivity conclusion of the comparison theorem: with `f >= 0`, `g >= 0`
/// and a tagged hypothesis on the domain, the solution stays nonnegative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub min_value: f64,
    pub pass: bool,
    pub hypothesis: String,
}

pub fn comparison_check(
    problem: &DirichletProblem,
    system: &GalerkinSystem,
    tolerance: f64,
) -> Result<ComparisonReport> {
    let hyp = problem.omega.hypothesis().ok_or(Error::HypothesisMissing)?;
    for (_, v) in problem.f.terms() {
        if v.im != 0.0 || v.re < 0.0 {
            return Err(Error::Degenerate("comparison check requires f >= 0"));
        }
    }
    if !problem.g.is_nonnegative() {
        return Err(Error::Degenerate("comparison check requires g >= 0"));
    }
    let min_value = system.cell_values().into_iter().fold(f64::INFINITY, f64::min);
    Ok(ComparisonReport {
        min_value,
        pass: min_value >= -tolerance,
        hypothesis: match hyp {
            ComparisonHypothesis::NonemptyBoundary => "nonempty-boundary".into(),
            ComparisonHypothesis::TranslationInvariant => "translation-invariant".into(),
        },
    })
}

/// Apply the operator to the zero-extended Galerkin solution and measure
/// how far `D^alpha u` strays from `f` on the domain cells (uniform shallow
/// bases only).
pub fn strong_residual_on_domain(
    problem: &DirichletProblem,
    system: &GalerkinSystem,
) -> Result<f64> {
    let u = system.solution_step()?;
    let out = apply_hypersingular(&u, &system.params)?;
    let mut worst = 0.0f64;
    for (cell, v) in out.step.terms() {
        let inside = problem.omega.balls().iter().any(|b| {
            matches!(
                ball_relation(b, &cell.as_ball()),
                Ok(BallRelation::AContainsB | BallRelation::Equal)
            )
        });
        if inside {
            let fv = problem.f.evaluate(&cell.center)?.re;
            worst = worst.max((v.re - fv).abs());
        }
    }
    Ok(worst)
}
