//! Seminorm and inequality checkers against independent oracles: the
//! LDL-inertia eigenvalue bisection for the Rayleigh constant, Gauss-Jordan
//! for the constrained capacity solve, and brute-force double sums for the
//! Poincare example.

mod common;

use num_complex::Complex64;
use vt_core::corpus::{corpus, default_spec, rng_for};
use vt_core::linalg::{jacobi_eigen, SymMatrix};
use vt_core::operator::VtParams;
use vt_core::padic::{Ball, Cell, OpenSetDecomposition, PadicPoint};
use vt_core::schwartz::StepFunction;
use vt_core::sobolev::{
    best_constant_rayleigh, capacity_upper, check_capacity_inequality, check_fractional_sobolev,
    check_poincare, check_poincare_wirtinger, gagliardo_seminorm, mean_on_ball,
    weighted_positivity, CapacityProblem, CapacityVariant,
};

fn unit_ball(p: u32) -> Ball {
    Ball::new(PadicPoint::zero(p, 1), 0)
}

#[test]
fn seminorm_dual_route_corpus() {
    for p in [2u32, 3] {
        for alpha in [0.3, 0.5, 0.8] {
            let spec = default_spec(p, 1, false);
            for u in corpus(61, &spec, 6).unwrap() {
                let rep = gagliardo_seminorm(&u, alpha, None).unwrap();
                assert!(rep.relative_gap <= 1e-9, "global gap {}", rep.relative_gap);
                let ball = Ball::new(PadicPoint::zero(p, 1), spec.support_exp);
                let repb = gagliardo_seminorm(&u, alpha, Some(&ball)).unwrap();
                assert!(repb.relative_gap <= 1e-9, "ball gap {}", repb.relative_gap);
            }
        }
    }
}

#[test]
fn fractional_sobolev_corpus_and_scaling() {
    let spec = default_spec(2, 1, false);
    let us = corpus(71, &spec, 12).unwrap();
    let mut max_ratio = 0.0f64;
    for u in &us {
        let rep = check_fractional_sobolev(u, 0.3, "corpus").unwrap();
        if rep.degenerate {
            continue;
        }
        assert!(rep.pass);
        max_ratio = max_ratio.max(rep.empirical_constant);
        // scaling invariance of the ratio under u -> c u
        let scaled = u.scaled(Complex64::new(3.5, 0.0));
        let rep2 = check_fractional_sobolev(&scaled, 0.3, "scaled").unwrap();
        assert!(
            (rep.empirical_constant - rep2.empirical_constant).abs()
                <= 1e-10 * rep.empirical_constant.max(1.0)
        );
    }
    assert!(max_ratio.is_finite() && max_ratio > 0.0);
    // alpha outside (0, 1/2) is rejected in one dimension
    assert!(check_fractional_sobolev(&us[0], 0.5, "bad").is_err());
}

#[test]
fn poincare_example_brute_force() {
    // u = 1_{Z_p}, Omega = B(1), p = 2, alpha = 0.3
    let p = 2u32;
    let alpha = 0.3;
    let u = StepFunction::indicator_ball(&unit_ball(p)).unwrap();
    let omega =
        OpenSetDecomposition::explicit(p, 1, vec![Ball::new(PadicPoint::zero(p, 1), 1)]).unwrap();
    let rep = check_poincare(&u, alpha, &omega, "example").unwrap();
    assert!((rep.lhs - 1.0).abs() < 1e-15);

    // brute force of [u]^2: pairs (x in Z_2, y outside) contribute
    // 2 * sum_{j>=1} p^{-j(1+2a)} mes(S_j) * mes(Z_2)
    let pf = p as f64;
    let brute = 2.0 * (1.0 - 1.0 / pf) * pf.powf(-2.0 * alpha) / (1.0 - pf.powf(-2.0 * alpha));
    assert!(
        (rep.rhs_seminorm - brute).abs() <= 1e-12,
        "seminorm {} vs brute {brute}",
        rep.rhs_seminorm
    );
    assert!(rep.pass);

    // support violation is rejected
    let outside = StepFunction::indicator_cell(&Cell::new(
        PadicPoint::from_integer_scaled(p, 1, -2),
        0,
    ))
    .unwrap();
    assert!(check_poincare(&outside, alpha, &omega, "bad").is_err());
}

#[test]
fn poincare_wirtinger_mean_shift_invariance() {
    let p = 2u32;
    let spec = default_spec(p, 1, false);
    let u = &corpus(83, &spec, 1).unwrap()[0];
    let ball = unit_ball(p);
    let ur = u.restrict_ball(&ball).unwrap();
    let rep1 = check_poincare_wirtinger(&ur, 0.5, 0, "base").unwrap();
    // adding a constant on the ball changes neither side
    let ones = StepFunction::indicator_ball(&ball).unwrap().scaled(Complex64::new(2.5, 0.0));
    let shifted = ur.add(&ones).unwrap();
    let rep2 = check_poincare_wirtinger(&shifted, 0.5, 0, "shifted").unwrap();
    assert!((rep1.lhs - rep2.lhs).abs() <= 1e-12);
    assert!((rep1.rhs_seminorm - rep2.rhs_seminorm).abs() <= 1e-12);
}

#[test]
fn rayleigh_constant_matches_inertia_bisection_oracle() {
    // p=2, N=0, m=2, alpha=0.5: lambda_min from the Jacobi path must match
    // the LDL-inertia bisection on the same quadratic form to 1e-10
    let p = 2u32;
    let (n_exp, scale, alpha) = (0i32, 2i32, 0.5f64);
    let r = best_constant_rayleigh(p, 1, n_exp, scale, alpha).unwrap();
    assert!(r.lambda_min > 0.0);

    // rebuild the pair-weight Laplacian directly from cell data
    let cells = vt_core::dirichlet::subdivide(&Cell::new(PadicPoint::zero(p, 1), 0), 2).unwrap();
    let nm = cells.len();
    let params = VtParams::new(alpha, p, 1).unwrap();
    let cm = (p as f64).powi(-scale);
    let mut l = SymMatrix::zeros(nm);
    for i in 0..nm {
        let mut diag = 0.0;
        for j in 0..nm {
            if i == j {
                continue;
            }
            let t = cells[i].center.distance_exp(&cells[j].center).unwrap().unwrap();
            let w = params.pw(-(1.0 + 2.0 * alpha) * t as f64) * cm * cm;
            diag += w;
            if j > i {
                l.set(i, j, -2.0 * w);
            }
        }
        l.set(i, i, 2.0 * diag);
    }
    let upper = 2.0 * (0..nm).map(|i| l.get(i, i)).fold(0.0f64, f64::max) + 1.0;
    let lambda2 = common::kth_eigenvalue_bisect(&l, 2, 0.0, upper);
    let oracle = lambda2 / cm;
    assert!(
        (r.lambda_min - oracle).abs() <= 1e-10 * oracle.max(1.0),
        "jacobi {} vs bisection {oracle}",
        r.lambda_min
    );
}

#[test]
fn rayleigh_tightness_at_minimizer() {
    let r = best_constant_rayleigh(2, 1, 0, 3, 0.5).unwrap();
    let ball = unit_ball(2);
    let u = &r.minimizer;
    let sem = gagliardo_seminorm(u, 0.5, Some(&ball)).unwrap().value_double_integral;
    let mean = mean_on_ball(u, &ball).unwrap();
    let centered = u
        .sub(&StepFunction::indicator_ball(&ball).unwrap().scaled(mean))
        .unwrap();
    let l2 = centered.l2_norm_sq();
    let gap = (l2 - sem / r.lambda_min).abs() / l2.max(f64::MIN_POSITIVE);
    assert!(gap <= 1e-9, "tightness gap {gap}");
}

#[test]
fn rayleigh_lambda_nonincreasing_in_scale() {
    let mut last = f64::INFINITY;
    for m in 1..=3 {
        let r = best_constant_rayleigh(2, 1, 0, m, 0.4).unwrap();
        assert!(r.lambda_min <= last + 1e-12);
        last = r.lambda_min;
    }
}

#[test]
fn capacity_matches_gauss_jordan_oracle() {
    // global variant, e = one scale-2 cell of Z_2, solved at m = 3
    let p = 2u32;
    let alpha = 0.5;
    let e = vec![Cell::new(PadicPoint::zero(p, 1), -2)];
    let problem = CapacityProblem {
        e_cells: e.clone(),
        ball_exp: 0,
        scale: 3,
        variant: CapacityVariant::GlobalSeminorm,
    };
    let cap = capacity_upper(&problem, alpha, p, 1).unwrap();
    assert!(cap > 0.0);

    // oracle: assemble the same quadratic form by hand, eliminate by
    // Gauss-Jordan instead of Cholesky
    let cells = vt_core::dirichlet::subdivide(&Cell::new(PadicPoint::zero(p, 1), 0), 3).unwrap();
    let nm = cells.len();
    let params = VtParams::new(alpha, p, 1).unwrap();
    let cm = (p as f64).powi(-3);
    let pf = p as f64;
    let out_tail = (1.0 - 1.0 / pf) * pf.powf(-2.0 * alpha) / (1.0 - pf.powf(-2.0 * alpha));
    let mut q = SymMatrix::zeros(nm);
    for i in 0..nm {
        let mut diag = 0.0;
        for j in 0..nm {
            if i == j {
                continue;
            }
            let t = cells[i].center.distance_exp(&cells[j].center).unwrap().unwrap();
            let w = params.pw(-(1.0 + 2.0 * alpha) * t as f64) * cm * cm;
            diag += w;
            if j > i {
                q.set(i, j, -2.0 * w);
            }
        }
        q.set(i, i, 2.0 * diag + 2.0 * cm * out_tail);
    }
    let fixed: Vec<bool> = cells
        .iter()
        .map(|c| {
            vt_core::padic::ball_relation(&e[0].as_ball(), &c.as_ball())
                .map(|r| {
                    matches!(
                        r,
                        vt_core::padic::BallRelation::AContainsB
                            | vt_core::padic::BallRelation::Equal
                    )
                })
                .unwrap_or(false)
        })
        .collect();
    let free: Vec<usize> = (0..nm).filter(|&i| !fixed[i]).collect();
    let qff = SymMatrix::from_fn(free.len(), |a, b| q.get(free[a], free[b]));
    let rhs: Vec<f64> = free
        .iter()
        .map(|&i| {
            -(0..nm)
                .filter(|&j| fixed[j])
                .map(|j| q.get(i, j))
                .sum::<f64>()
        })
        .collect();
    let sol = common::gauss_jordan_solve(&qff, &rhs);
    let mut full = vec![0.0; nm];
    for (i, &f) in fixed.iter().enumerate() {
        if f {
            full[i] = 1.0;
        }
    }
    for (a, &i) in free.iter().enumerate() {
        full[i] = sol[a];
    }
    let oracle = q.quadratic_form(&full);
    assert!(
        (cap - oracle).abs() <= 1e-10 * oracle.max(1.0),
        "capacity {cap} vs oracle {oracle}"
    );
}

#[test]
fn capacity_decreases_under_refinement() {
    let p = 2u32;
    let e = vec![Cell::new(PadicPoint::zero(p, 1), -2)];
    let mut last = f64::INFINITY;
    for m in 2..=4 {
        let problem = CapacityProblem {
            e_cells: e.clone(),
            ball_exp: 0,
            scale: m,
            variant: CapacityVariant::GlobalSeminorm,
        };
        let cap = capacity_upper(&problem, 0.5, p, 1).unwrap();
        assert!(cap <= last + 1e-12, "capacity grew under refinement");
        last = cap;
    }
}

#[test]
fn capacity_requires_nonempty_e() {
    let problem = CapacityProblem {
        e_cells: vec![],
        ball_exp: 0,
        scale: 2,
        variant: CapacityVariant::GlobalSeminorm,
    };
    assert!(capacity_upper(&problem, 0.5, 2, 1).is_err());
}

#[test]
fn capacity_inequality_corpus() {
    // e near 0, u supported in the child ball 1 + 2Z_2 at distance 1
    let p = 2u32;
    let e = vec![Cell::new(PadicPoint::zero(p, 1), -2)];
    let mut rng = rng_for(29);
    use rand::Rng;
    let mut max_ratio = 0.0f64;
    for _ in 0..10 {
        let cells = vt_core::dirichlet::subdivide(
            &Cell::new(PadicPoint::from_integer_scaled(p, 1, 0), -1),
            2,
        )
        .unwrap();
        let terms: Vec<(Cell, Complex64)> = cells
            .iter()
            .map(|c| (c.clone(), Complex64::new(rng.gen_range(-1.0..1.0), 0.0)))
            .collect();
        let u = StepFunction::from_terms(p, 1, &terms).unwrap();
        if u.is_zero() {
            continue;
        }
        let rep = check_capacity_inequality(&u, &e, 0.5, 0, "corpus").unwrap();
        assert!(rep.pass);
        max_ratio = max_ratio.max(rep.empirical_constant);
        // scaling invariance
        let rep2 =
            check_capacity_inequality(&u.scaled(Complex64::new(2.0, 0.0)), &e, 0.5, 0, "s")
                .unwrap();
        assert!((rep.empirical_constant - rep2.empirical_constant).abs() <= 1e-10);
    }
    assert!(max_ratio.is_finite());
}

#[test]
fn weighted_positivity_corpus() {
    let mut worst = 0.0f64;
    let mut min_side = f64::INFINITY;
    for p in [2u32, 3] {
        for alpha in [0.3, 0.5, 0.9] {
            let params = VtParams::new(alpha, p, 1).unwrap();
            let spec = default_spec(p, 1, true);
            for u in corpus(53, &spec, 5).unwrap() {
                let (l, r) = weighted_positivity(&u, &params).unwrap();
                worst = worst.max((l - r).abs());
                min_side = min_side.min(l).min(r);
            }
        }
    }
    assert!(worst <= 1e-8, "equality gap {worst}");
    assert!(min_side >= -1e-12, "negative side {min_side}");
}

#[test]
fn two_dimensional_seminorm_and_rayleigh() {
    // the seminorm dual route and the mean-zero Rayleigh machinery work on
    // Q_p^2 with the max-norm
    let spec = vt_core::corpus::CorpusSpec {
        prime: 2,
        dim: 2,
        support_exp: 1,
        scale: 1,
        density: 0.7,
        real: false,
    };
    for u in corpus(19, &spec, 4).unwrap() {
        let rep = gagliardo_seminorm(&u, 0.6, None).unwrap();
        assert!(rep.relative_gap <= 1e-9, "2-dim global gap {}", rep.relative_gap);
        let ball = Ball::new(PadicPoint::zero(2, 2), 1);
        let repb = gagliardo_seminorm(&u, 0.6, Some(&ball)).unwrap();
        assert!(repb.relative_gap <= 1e-9, "2-dim ball gap {}", repb.relative_gap);
    }

    let r = best_constant_rayleigh(2, 2, 0, 1, 0.5).unwrap();
    assert!(r.lambda_min > 0.0);
    // tightness at the minimizer carries over to n = 2
    let ball = Ball::new(PadicPoint::zero(2, 2), 0);
    let sem = gagliardo_seminorm(&r.minimizer, 0.5, Some(&ball))
        .unwrap()
        .value_double_integral;
    let mean = mean_on_ball(&r.minimizer, &ball).unwrap();
    let centered = r
        .minimizer
        .sub(&StepFunction::indicator_ball(&ball).unwrap().scaled(mean))
        .unwrap();
    let l2 = centered.l2_norm_sq();
    assert!((l2 - sem / r.lambda_min).abs() <= 1e-9 * l2.max(f64::MIN_POSITIVE));
}

#[test]
fn capacity_inequality_zero_input_is_degenerate() {
    let e = vec![Cell::new(PadicPoint::zero(2, 1), -2)];
    let rep =
        check_capacity_inequality(&StepFunction::zero(2, 1), &e, 0.5, 0, "zero").unwrap();
    assert!(rep.degenerate && rep.pass);
    assert_eq!((rep.lhs, rep.rhs_seminorm), (0.0, 0.0));
}

#[test]
fn poincare_ratio_scaling_invariance() {
    let p = 2u32;
    let spec = default_spec(p, 1, false);
    let omega = OpenSetDecomposition::explicit(
        p,
        1,
        vec![Ball::new(PadicPoint::zero(p, 1), spec.support_exp)],
    )
    .unwrap();
    let u = corpus(37, &spec, 1).unwrap().remove(0);
    if u.is_zero() {
        return;
    }
    let r1 = check_poincare(&u, 0.3, &omega, "base").unwrap();
    let r2 = check_poincare(&u.scaled(Complex64::new(-4.0, 0.0)), 0.3, &omega, "scaled").unwrap();
    assert!(
        (r1.empirical_constant - r2.empirical_constant).abs()
            <= 1e-10 * r1.empirical_constant.max(1.0)
    );
}

#[test]
fn gram_spd_smallest_eigenvalue_positive() {
    // the energy Gram over the scale-3 grid of Z_2 is SPD
    let cells = vt_core::dirichlet::subdivide(&Cell::new(PadicPoint::zero(2, 1), 0), 3).unwrap();
    let params = VtParams::new(0.5, 2, 1).unwrap();
    let g = vt_core::dirichlet::assemble_gram_matrix(&params, &cells);
    assert_eq!(g.max_asymmetry(), 0.0);
    let (vals, _) = jacobi_eigen(&g);
    assert!(vals[0] > 0.0, "gram not positive definite: {}", vals[0]);
}
