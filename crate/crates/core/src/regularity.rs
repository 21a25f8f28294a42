//! Boundary-regularity experiments at the accumulation point 0: the two
//! example domain families (union of shrinking spheres, punctured disk),
//! exact verification of the annulus measure-density condition, and
//! empirical Hoelder-exponent estimation from log-log decay of the solution.

use serde::{Deserialize, Serialize};

use crate::accum::KahanF64;
use crate::dirichlet::{family_basis, solve_on_basis, DirichletProblem, ExteriorData};
use crate::error::{Error, Result};
use crate::operator::{kernel_constant, VtParams};
use crate::padic::{
    abs_exp, annulus_complement_measure, Ball, ComparisonHypothesis, DomainFamily,
    OpenSetDecomposition, PadicPoint, RadialValue,
};
use crate::schwartz::StepFunction;

/// Strictly increasing shell exponents with quasi-geometric growth:
/// `1 < R- <= lambda_{k+1}/lambda_k <= R+`, starting at 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaSequence {
    pub lambdas: Vec<u32>,
    pub r_minus: f64,
    pub r_plus: f64,
}

impl LambdaSequence {
    pub fn new(lambdas: Vec<u32>, r_minus: f64, r_plus: f64) -> Result<Self> {
        if lambdas.is_empty() || lambdas[0] != 1 {
            return Err(Error::InvalidLambdaSequence("sequence must start at 1".into()));
        }
        if !(r_minus > 1.0 && r_minus <= r_plus && r_plus.is_finite()) {
            return Err(Error::InvalidLambdaSequence(format!(
                "need 1 < R- <= R+ < inf, got {r_minus}, {r_plus}"
            )));
        }
        for w in lambdas.windows(2) {
            let ratio = w[1] as f64 / w[0] as f64;
            if !(ratio >= r_minus && ratio <= r_plus) {
                return Err(Error::InvalidLambdaSequence(format!(
                    "ratio {}/{} outside [{r_minus}, {r_plus}]",
                    w[1], w[0]
                )));
            }
        }
        Ok(LambdaSequence { lambdas, r_minus, r_plus })
    }

    /// Pure geometric sequence `1, ratio, ratio^2, ...`.
    pub fn geometric(ratio: u32, count: usize) -> Result<Self> {
        let mut lambdas = Vec::with_capacity(count);
        let mut cur = 1u32;
        for _ in 0..count {
            lambdas.push(cur);
            cur = cur
                .checked_mul(ratio)
                .ok_or_else(|| Error::InvalidLambdaSequence("ratio overflow".into()))?;
        }
        LambdaSequence::new(lambdas, ratio as f64, ratio as f64)
    }
}

/// Union of spheres `S(p^{-lambda_k})`, each emitted as its `p - 1` disjoint
/// balls of radius `p^{-lambda-1}`, truncated after `depth` shells. The
/// regular example requires `R- > 2`; pass `allow_small_ratio` to build
/// counter-examples anyway.
pub fn make_sphere_union_domain(
    seq: &LambdaSequence,
    prime: u32,
    depth: usize,
    allow_small_ratio: bool,
) -> Result<OpenSetDecomposition> {
    if !allow_small_ratio && seq.r_minus <= 2.0 {
        return Err(Error::InvalidLambdaSequence(
            "the regular example needs R- > 2 (override to experiment)".into(),
        ));
    }
    let depth = depth.min(seq.lambdas.len());
    let lambdas: Vec<u32> = seq.lambdas[..depth].to_vec();
    let mut balls = Vec::new();
    for &l in &lambdas {
        for d in 1..prime as u64 {
            let center = PadicPoint::from_integer_scaled(prime, d, l as i32);
            balls.push(Ball::new(center, -(l as i32) - 1));
        }
    }
    let tail_exp = -(lambdas.last().copied().unwrap_or(1) as i32) - 1;
    Ok(OpenSetDecomposition::from_parts(
        prime,
        1,
        balls,
        DomainFamily::SphereUnion { lambdas },
        true,
        Some(tail_exp),
        Some(ComparisonHypothesis::NonemptyBoundary),
    ))
}

/// The punctured unit ball listed shell by shell:
/// balls `k p^j + p^{j+1} Z_p` for `0 <= j < depth`, `1 <= k < p`.
pub fn make_punctured_disk(prime: u32, depth: u32) -> OpenSetDecomposition {
    let mut balls = Vec::new();
    for j in 0..depth {
        for k in 1..prime as u64 {
            let center = PadicPoint::from_integer_scaled(prime, k, j as i32);
            balls.push(Ball::new(center, -(j as i32) - 1));
        }
    }
    OpenSetDecomposition::from_parts(
        prime,
        1,
        balls,
        DomainFamily::PuncturedDisk { depth },
        true,
        Some(-(depth as i32)),
        Some(ComparisonHypothesis::NonemptyBoundary),
    )
}

/// Exact density check of the annulus condition
/// `mes[(B(r_k) \ B(r_{k+1})) inter complement] >= nu r_k`, `r_k = p^{-lambda_k}`.
#[derive(Debug, Clone)]
pub struct MeasureDensityReport {
    pub nu: RadialValue,
    pub nu_f64: f64,
    pub pass: bool,
    pub per_annulus: Vec<RadialValue>,
}

pub fn check_measure_density(
    omega: &OpenSetDecomposition,
    seq: &LambdaSequence,
    prime: u32,
) -> Result<MeasureDensityReport> {
    let mut nu: Option<RadialValue> = None;
    let mut per = Vec::new();
    for w in seq.lambdas.windows(2) {
        let r_out = RadialValue::power(prime, -(w[0] as i64));
        let r_in = RadialValue::power(prime, -(w[1] as i64));
        let complement = annulus_complement_measure(omega, &r_out, &r_in)?;
        // ratio to r_k is exact: divide by the pure power
        let ratio = complement.div_power(-(w[0] as i64));
        per.push(ratio.clone());
        nu = Some(match nu {
            None => ratio,
            Some(cur) => {
                if ratio.cmp_exact(&cur) == std::cmp::Ordering::Less {
                    ratio
                } else {
                    cur
                }
            }
        });
    }
    let nu = nu.ok_or(Error::InsufficientRange { got: seq.lambdas.len(), need: 2 })?;
    let pass = !nu.is_zero();
    let nu_f64 = nu.to_f64();
    Ok(MeasureDensityReport { nu, nu_f64, pass, per_annulus: per })
}

/// Closed-form lower bound of the regular example: `p^{-1} (1 - p^{-(R- - 2)})`
/// for an integer ratio `R-`.
pub fn sphere_union_density_bound(prime: u32, r_minus: u32) -> RadialValue {
    assert!(r_minus > 2, "bound applies for R- > 2");
    RadialValue::power(prime, -1)
        .sub(&RadialValue::power(prime, -(r_minus as i64) + 1))
        .expect("positive for R- > 2")
}

/// Ordinary least squares on (x, y) points: slope and r^2.
pub fn log_log_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}

/// One decay sample: shell exponent, radius, sup of |u| on the shell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShellSample {
    pub lambda: u32,
    pub ln_radius: f64,
    pub radius: f64,
    pub sup_abs_u: f64,
}

/// Result of the Hoelder-exponent experiment at the boundary point 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub samples: Vec<ShellSample>,
    pub gamma_fit: f64,
    pub fit_r2: f64,
    pub nu_observed: f64,
    pub condition_52_pass: bool,
    pub degenerate: bool,
    pub resolved_per_scale: Vec<(i32, usize)>,
    pub fit_window: (usize, usize),
}

/// Number of extra subdivision levels given to each resolved domain ball.
const EXTRA_LEVELS_CAP: i32 = 2;

/// Solve the Dirichlet problem on the family domain at every scale in
/// `m_list`, record the sup of |u| on each resolved shell, and fit the
/// decay exponent on log-log axes. The coarsest shell and the two finest
/// are excluded from the fit window (truncation pollution).
pub fn estimate_holder_exponent(
    omega: &OpenSetDecomposition,
    seq: &LambdaSequence,
    alpha: f64,
    f: &StepFunction,
    g: &ExteriorData,
    m_list: &[i32],
) -> Result<RegularityReport> {
    let prime = omega.prime();
    let boundary = crate::padic::boundary_accumulation_points(omega, 12, 2);
    if !boundary.points.iter().any(|x| x.is_zero()) {
        return Err(Error::SupportViolation("0 must be an accumulation point of the domain"));
    }
    if let ExteriorData::Radial { exponent, .. } = g {
        if *exponent <= 0.0 {
            return Err(Error::Config("boundary data must vanish at 0: exponent > 0".into()));
        }
    }
    let mut m_sorted: Vec<i32> = m_list.to_vec();
    m_sorted.sort_unstable();
    let mut resolved_per_scale = Vec::new();
    let mut final_samples: Vec<ShellSample> = Vec::new();
    for &m in &m_sorted {
        let (basis, ball_of) = family_basis(omega, m, EXTRA_LEVELS_CAP)?;
        let mut resolved_lambdas: Vec<u32> = Vec::new();
        for &k in &ball_of {
            let lambda = (-omega.balls()[k].radius_exp - 1) as u32;
            if !resolved_lambdas.contains(&lambda) {
                resolved_lambdas.push(lambda);
            }
        }
        resolved_per_scale.push((m, resolved_lambdas.len()));
        if basis.is_empty() {
            continue;
        }
        let problem = DirichletProblem {
            omega: omega.clone(),
            alpha,
            f: f.clone(),
            g: g.clone(),
        };
        let system = solve_on_basis(&problem, basis, ball_of)?;
        let values = system.cell_values();
        let mut samples: Vec<ShellSample> = Vec::new();
        for &lambda in &resolved_lambdas {
            let mut sup = 0.0f64;
            for (i, value) in values.iter().enumerate() {
                let cell_lambda = abs_exp(&omega.balls()[system.ball_of[i]].center)
                    .map(|t| (-t) as u32);
                if cell_lambda == Some(lambda) {
                    sup = sup.max(value.abs());
                }
            }
            let lnp = (prime as f64).ln();
            samples.push(ShellSample {
                lambda,
                ln_radius: -(lambda as f64) * lnp,
                radius: (prime as f64).powf(-(lambda as f64)),
                sup_abs_u: sup,
            });
        }
        samples.sort_by_key(|s| s.lambda);
        final_samples = samples;
    }
    if final_samples.len() < 4 {
        return Err(Error::InsufficientRange { got: final_samples.len(), need: 4 });
    }
    let density = check_measure_density(omega, seq, prime);
    let (nu_observed, condition_52_pass) = match density {
        Ok(rep) => (rep.nu_f64, rep.pass),
        Err(_) => (0.0, false),
    };
    // fit window: drop the coarsest shell and the two finest
    let lo = 1usize;
    let hi = final_samples.len().saturating_sub(2);
    let window: Vec<(f64, f64)> = final_samples[lo..hi]
        .iter()
        .filter(|s| s.sup_abs_u > 0.0)
        .map(|s| (s.ln_radius, s.sup_abs_u.ln()))
        .collect();
    if window.len() < 2 {
        let degenerate = final_samples.iter().all(|s| s.sup_abs_u == 0.0);
        if degenerate {
            return Ok(RegularityReport {
                samples: final_samples,
                gamma_fit: f64::NAN,
                fit_r2: f64::NAN,
                nu_observed,
                condition_52_pass,
                degenerate: true,
                resolved_per_scale,
                fit_window: (lo, hi),
            });
        }
        return Err(Error::InsufficientRange { got: window.len(), need: 2 });
    }
    let (gamma_fit, fit_r2) = log_log_fit(&window);
    Ok(RegularityReport {
        samples: final_samples,
        gamma_fit,
        fit_r2,
        nu_observed,
        condition_52_pass,
        degenerate: false,
        resolved_per_scale,
        fit_window: (lo, hi),
    })
}

/// Log-log slope of the closed-form profile `c |x|^{alpha-1}` over the
/// listed shells, through the same fit machinery and exclusion window.
pub fn fundamental_profile_fit(prime: u32, alpha: f64, shells: &[u32]) -> Result<(f64, f64)> {
    if shells.len() < 4 {
        return Err(Error::InsufficientRange { got: shells.len(), need: 4 });
    }
    let p = prime as f64;
    let c = (1.0 - p.powf(-alpha)) / (1.0 - p.powf(-alpha - 1.0));
    let lnp = p.ln();
    let mut shells = shells.to_vec();
    shells.sort_unstable();
    let lo = 1usize;
    let hi = shells.len().saturating_sub(2);
    let pts: Vec<(f64, f64)> = shells[lo..hi]
        .iter()
        .map(|&l| {
            let lnr = -(l as f64) * lnp;
            (lnr, c.ln() + (alpha - 1.0) * lnr)
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientRange { got: pts.len(), need: 2 });
    }
    Ok(log_log_fit(&pts))
}

/// Residual report for the truncated fundamental solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicityReport {
    pub sup_residual: f64,
    pub shell_residuals: Vec<(i32, f64)>,
    pub outer_tail_bound: f64,
    pub value_at_unit: f64,
    pub depth: u32,
}

/// Apply the hypersingular operator to the fundamental-solution profile
/// `c |x|^{alpha-1}` represented radially on `p^{-depth} <= |x| <= p^{depth+4}`.
/// The spike below the truncation is integrated in closed form; the omitted
/// outer tail contributes the reported geometric bound.
pub fn fundamental_solution_harmonicity_check(
    prime: u32,
    alpha: f64,
    depth: u32,
) -> Result<HarmonicityReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha, "(0, 1)"));
    }
    let params = VtParams::new(alpha, prime, 1)?;
    let p = prime as f64;
    let c = (1.0 - p.powf(-alpha)) / (1.0 - p.powf(-alpha - 1.0));
    let d = depth as i32;
    let outer = d + 4;
    let profile = |j: i32| -> f64 {
        if j < -d || j > outer {
            0.0
        } else {
            c * params.pw((alpha - 1.0) * j as f64)
        }
    };
    let mes = |j: i32| -> f64 { params.pw(j as f64) * (1.0 - 1.0 / p) };
    let kernel = |j: i32| -> f64 { kernel_constant(&params) * params.pw(-(alpha + 1.0) * j as f64) };
    // exact integral of the spike below the truncation
    let spike_int =
        c * (1.0 - 1.0 / p) * params.pw(-(d as f64 + 1.0) * alpha) / (1.0 - params.pw(-alpha));
    // u integrated over {|z| <= p^s}
    let cum_below = |s: i32| -> f64 {
        let mut acc = KahanF64::new();
        acc.add(spike_int);
        let mut j = -d;
        while j <= s {
            acc.add(profile(j) * mes(j));
            j += 1;
        }
        acc.value()
    };
    let mut shell_residuals = Vec::new();
    let mut sup = 0.0f64;
    for t in (-d + 2)..=(-1) {
        let ut = profile(t);
        let mut acc = KahanF64::new();
        // sphere |y| = p^t maps onto {|z| <= p^{t-1}} plus part of the
        // sphere |z| = p^t itself
        let i_t = cum_below(t - 1) + ut * (mes(t) - params.pw((t - 1) as f64));
        acc.add(kernel(t) * (ut * mes(t) - i_t));
        for j in (t + 1)..=outer {
            acc.add(kernel(j) * (ut - profile(j)) * mes(j));
        }
        // spheres beyond the outer truncation see u(x+y) = 0
        let tail = kernel_constant(&params) * (1.0 - 1.0 / p)
            * params.pw(-(outer as f64 + 1.0) * alpha)
            / (1.0 - params.pw(-alpha));
        acc.add(ut * tail);
        let r = acc.value().abs();
        shell_residuals.push((t, r));
        sup = sup.max(r);
    }
    // omitted true-profile mass beyond the outer cutoff
    let outer_tail_bound = c * kernel_constant(&params) * params.pw(-(outer as f64 + 1.0));
    Ok(HarmonicityReport {
        sup_residual: sup,
        shell_residuals,
        outer_tail_bound,
        value_at_unit: profile(0),
        depth,
    })
}
