//! The operator-level identities: dual-route equivalence, symbol
//! correctness, self-adjointness, positivity of the quadratic form, the
//! fundamental-solution pairing, the radial identity and the bilinear
//! product rule, with expected values frozen from closed-form evaluation.

mod common;

use num_complex::Complex64;
use vt_core::corpus::{corpus, default_spec};
use vt_core::operator::{
    apply_hypersingular, apply_spectral, bilinear_identity_lhs_rhs, carre_du_champ,
    fundamental_solution_pairing, kernel_constant, radial_identity_check, riesz_gamma,
    riesz_kernel_pairing, VtParams,
};
use vt_core::padic::{abs_exp, Ball, Cell, PadicPoint, RadialValue};
use vt_core::schwartz::StepFunction;

fn unit_indicator(p: u32) -> StepFunction {
    StepFunction::indicator_ball(&Ball::new(PadicPoint::zero(p, 1), 0)).unwrap()
}

#[test]
fn dual_route_equivalence_small_corpus() {
    for (p, n) in [(2u32, 1usize), (3, 1), (5, 1), (2, 2)] {
        for alpha in [0.3, 0.9, 1.5] {
            let params = VtParams::new(alpha, p, n).unwrap();
            let spec = default_spec(p, n, false);
            for (i, f) in corpus(11, &spec, 4).unwrap().iter().enumerate() {
                let a = apply_spectral(f, &params).unwrap();
                let b = apply_hypersingular(f, &params).unwrap();
                let gap = a.rel_sup_gap(&b).unwrap();
                assert!(gap <= 1e-9, "gap {gap:.3e} at p={p} n={n} alpha={alpha} #{i}");
            }
        }
    }
}

#[test]
fn symbol_multiplies_the_transform() {
    // F(D^alpha f) = |xi|^alpha F(f) pointwise on dual cells
    let p = 3u32;
    let alpha = 0.7;
    let params = VtParams::new(alpha, p, 1).unwrap();
    let spec = default_spec(p, 1, false);
    for f in corpus(23, &spec, 4).unwrap() {
        let df = apply_spectral(&f, &params).unwrap();
        let lhs = df.step.fourier().unwrap();
        let fhat = f.fourier().unwrap();
        for (cell, v) in lhs.terms() {
            let symbol = match abs_exp(&cell.center) {
                Some(t) => (p as f64).powf(alpha * t as f64),
                // the dual cell through 0 averages the symbol; skip it here
                None => continue,
            };
            let want = fhat.evaluate(&cell.center).unwrap() * symbol;
            assert!((v - want).norm() <= 1e-10, "symbol mismatch {v} vs {want}");
        }
    }
}

#[test]
fn self_adjoint_and_nonnegative() {
    let p = 2u32;
    let alpha = 0.5;
    let params = VtParams::new(alpha, p, 1).unwrap();
    let spec = default_spec(p, 1, true);
    let fs = corpus(31, &spec, 6).unwrap();
    for pair in fs.chunks(2) {
        if pair.len() < 2 {
            break;
        }
        let (u, v) = (&pair[0], &pair[1]);
        let du = apply_spectral(u, &params).unwrap();
        let dv = apply_spectral(v, &params).unwrap();
        let lhs = du.step.mul(v).unwrap().integrate();
        let rhs = dv.step.mul(u).unwrap().integrate();
        assert!((lhs - rhs).norm() <= 1e-10, "self-adjointness gap");
        let quad = du.step.mul(u).unwrap().integrate().re;
        assert!(quad >= -1e-12, "quadratic form went negative: {quad}");
    }
}

#[test]
fn unit_ball_values_frozen() {
    // (D^alpha 1_{Z_p})(x) = (1 - p^-1)/(1 - p^{-1-alpha}) for |x| <= 1
    // and -(p^alpha - 1)/(1 - p^{-alpha-1}) |x|^{-alpha-1} outside
    let p = 2u32;
    let alpha = 0.5;
    let pf = p as f64;
    let params = VtParams::new(alpha, p, 1).unwrap();
    let f = unit_indicator(p);
    let out = apply_hypersingular(&f, &params).unwrap();
    let inside = out.step.evaluate(&PadicPoint::zero(p, 1)).unwrap().re;
    assert!((inside - (1.0 - 0.5) / (1.0 - pf.powf(-1.5))).abs() < 1e-13);
    let c_out = -(pf.powf(alpha) - 1.0) / (1.0 - pf.powf(-alpha - 1.0));
    for t in 1..5 {
        let got = out.tail_value(p, 1, t).re;
        let want = c_out * pf.powf(-(alpha + 1.0) * t as f64);
        assert!((got - want).abs() < 1e-13);
    }
}

#[test]
fn radial_identity_examples() {
    // p=2, alpha=0.5, |x|=1
    let params = VtParams::new(0.5, 2, 1).unwrap();
    let (l, r) = radial_identity_check(&RadialValue::power(2, 0), &params).unwrap();
    assert!((l - 1.0).abs() < 1e-15 && (l - r).abs() <= 1e-12);
    // p=3, alpha=0.7, |x|=3
    let params = VtParams::new(0.7, 3, 1).unwrap();
    let (l, r) = radial_identity_check(&RadialValue::power(3, 1), &params).unwrap();
    assert!((l - 3.0f64.powf(0.7)).abs() < 1e-13);
    assert!((l - r).abs() <= 1e-12 * l.max(1.0));
    // sweep the acceptance grid
    for p in [2u32, 3, 5] {
        for alpha in [0.3, 0.7, 1.2] {
            for n in [1usize, 2] {
                let params = VtParams::new(alpha, p, n).unwrap();
                for e in -3..=3 {
                    let (l, r) = radial_identity_check(&RadialValue::power(p, e), &params).unwrap();
                    assert!(
                        (l - r).abs() <= 1e-12 * l.max(1.0),
                        "identity gap at p={p} alpha={alpha} n={n} e={e}: {l} vs {r}"
                    );
                }
            }
        }
    }
}

#[test]
fn gamma_factor_values() {
    let params = VtParams::new(0.5, 2, 1).unwrap();
    assert!((riesz_gamma(&params, 0.5).unwrap() - 1.0).abs() < 1e-15);
    assert!(riesz_gamma(&params, 1.0).is_err());
    assert!(riesz_gamma(&params, 0.0).is_err());
    // n = 2: Gamma(alpha) = (1 - p^{alpha-2})/(1 - p^{-alpha})
    let params2 = VtParams::new(0.5, 2, 2).unwrap();
    let g = riesz_gamma(&params2, 0.5).unwrap();
    let want = (1.0 - 2.0f64.powf(-1.5)) / (1.0 - 2.0f64.powf(-0.5));
    assert!((g - want).abs() < 1e-15);
}

#[test]
fn fundamental_solution_recovers_point_values() {
    // phi = 1_{Z_p}: pairing = phi(0) = 1
    let params = VtParams::new(0.5, 2, 1).unwrap();
    let phi = unit_indicator(2);
    for spectral in [true, false] {
        let got = fundamental_solution_pairing(&phi, &params, spectral).unwrap();
        assert!((got.re - 1.0).abs() <= 1e-8, "pairing {got}");
        assert!(got.im.abs() <= 1e-12);
    }

    // phi = indicator of the unit sphere: phi(0) = 0
    let big = StepFunction::indicator_ball(&Ball::new(PadicPoint::zero(2, 1), 0)).unwrap();
    let small =
        StepFunction::indicator_cell(&Cell::new(PadicPoint::zero(2, 1), -1)).unwrap();
    let sphere = big.sub(&small).unwrap();
    let got = fundamental_solution_pairing(&sphere, &params, true).unwrap();
    assert!(got.norm() <= 1e-8, "sphere pairing should vanish: {got}");

    // random corpus across p in {2,3}, alpha in {0.3, 0.5, 0.9}
    for p in [2u32, 3] {
        for alpha in [0.3, 0.5, 0.9] {
            let params = VtParams::new(alpha, p, 1).unwrap();
            let spec = default_spec(p, 1, false);
            for f in corpus(47, &spec, 3).unwrap() {
                let got = fundamental_solution_pairing(&f, &params, false).unwrap();
                let want = f.evaluate(&PadicPoint::zero(p, 1)).unwrap();
                assert!(
                    (got - want).norm() <= 1e-8,
                    "delta pairing gap {} at p={p} alpha={alpha}",
                    (got - want).norm()
                );
            }
        }
    }
}

#[test]
fn riesz_pairing_of_unit_ball_closed_form() {
    // integral of |x|^{gamma-1}/Gamma over Z_p = (1-p^-1)/(1-p^-gamma)/Gamma
    let p = 3u32;
    let gamma = 0.4;
    let params = VtParams::new(0.5, p, 1).unwrap();
    let f = unit_indicator(p);
    let got = riesz_kernel_pairing(&f, gamma, &params).unwrap().re;
    let pf = p as f64;
    let g = riesz_gamma(&params, gamma).unwrap();
    let want = (1.0 - 1.0 / pf) / (1.0 - pf.powf(-gamma)) / g;
    assert!((got - want).abs() < 1e-13);
}

#[test]
fn bilinear_identity_on_named_pair() {
    // u = 1_{Z_p}, v = 1_{pZ_p} at p=2, alpha=0.5
    let u = unit_indicator(2);
    let v = StepFunction::indicator_cell(&Cell::new(PadicPoint::zero(2, 1), -1)).unwrap();
    let params = VtParams::new(0.5, 2, 1).unwrap();
    let (lhs, rhs) = bilinear_identity_lhs_rhs(&u, &v, &params).unwrap();
    assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-9);

    // v = u: lhs = 2 u D^alpha u - D^alpha(u^2)
    let (lhs, rhs) = bilinear_identity_lhs_rhs(&u, &u, &params).unwrap();
    assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-9);
    let du = apply_spectral(&u, &params).unwrap();
    let direct = u
        .mul(&du.step)
        .unwrap()
        .scaled(Complex64::new(2.0, 0.0))
        .sub(&apply_spectral(&u.mul(&u).unwrap(), &params).unwrap().step)
        .unwrap();
    assert!(lhs.max_abs_diff(&direct).unwrap() <= 1e-12);
}

#[test]
fn bilinear_identity_random_pairs() {
    let spec = default_spec(2, 1, true);
    let fs = corpus(13, &spec, 6).unwrap();
    let params = VtParams::new(0.8, 2, 1).unwrap();
    for pair in fs.chunks(2) {
        if pair.len() < 2 {
            break;
        }
        let (l, r) = bilinear_identity_lhs_rhs(&pair[0], &pair[1], &params).unwrap();
        assert!(l.max_abs_diff(&r).unwrap() <= 1e-9);
    }
}

#[test]
fn carre_du_champ_outside_support_matches_kernel_constant() {
    // beyond the support both sides reduce to a_alpha * integral uv |z-x|^{-n-a},
    // which pins a_alpha to the hypersingular kernel constant
    let u = unit_indicator(2);
    let params = VtParams::new(0.5, 2, 1).unwrap();
    let c = carre_du_champ(&u, &u, &params).unwrap();
    let at_zero = c.evaluate(&PadicPoint::zero(2, 1)).unwrap().re;
    // on Z_2 every y with |y| > 1 contributes (u(x) - 0)^2 = 1:
    // value = a_alpha * sum_{j>=1} p^{-j alpha} (1 - 1/p)
    let pf = 2.0f64;
    let want = kernel_constant(&params)
        * (1.0 - 1.0 / pf)
        * pf.powf(-0.5)
        / (1.0 - pf.powf(-0.5));
    assert!((at_zero - want).abs() < 1e-13, "{at_zero} vs {want}");
}

#[test]
fn coarse_cells_negative_scale() {
    // indicator of B(p^2): a single cell coarser than the unit ball, so the
    // working scale is negative; both routes and the tail stay exact
    let p = 3u32;
    let alpha = 0.6;
    let pf = p as f64;
    let f = StepFunction::indicator_ball(&Ball::new(PadicPoint::zero(p, 1), 2)).unwrap();
    assert_eq!(f.scale(), -2);
    let params = VtParams::new(alpha, p, 1).unwrap();
    let a = apply_spectral(&f, &params).unwrap();
    let b = apply_hypersingular(&f, &params).unwrap();
    assert!(a.rel_sup_gap(&b).unwrap() <= 1e-12);
    // dilation of the unit-ball closed form: value on the ball is
    // (1 - p^-1)/(1 - p^{-1-alpha}) * p^{-2 alpha}
    let inside = a.step.evaluate(&PadicPoint::zero(p, 1)).unwrap().re;
    let want = (1.0 - 1.0 / pf) / (1.0 - pf.powf(-1.0 - alpha)) * pf.powf(-2.0 * alpha);
    assert!((inside - want).abs() <= 1e-13, "{inside} vs {want}");
    // tail coefficient is -c_k * measure(B(p^2)) = -c_k p^2
    let tail = a.tail_coeff.re;
    let want_tail = -kernel_constant(&params) * pf.powi(2);
    assert!((tail - want_tail).abs() <= 1e-10);
}

#[test]
fn unramified_extension_cross_check() {
    // every radial quantity of the n-dimensional operator at base p must
    // agree with the one-dimensional operator of order alpha/n over the
    // residue-cardinality base p^n
    for p in [2u32, 3] {
        for n in [2usize, 3] {
            for alpha in [0.4, 0.9, 1.5] {
                let multi = VtParams::new(alpha, p, n).unwrap();
                let one = VtParams::new(alpha / n as f64, p.pow(n as u32), 1).unwrap();
                let k_multi = kernel_constant(&multi);
                let k_one = kernel_constant(&one);
                assert!(
                    (k_multi - k_one).abs() <= 1e-14 * k_multi,
                    "kernel constants differ: {k_multi} vs {k_one}"
                );
                if alpha < n as f64 {
                    let g_multi = riesz_gamma(&multi, alpha).unwrap();
                    let g_one = riesz_gamma(&one, alpha / n as f64).unwrap();
                    assert!(
                        (g_multi - g_one).abs() <= 1e-14 * g_multi.abs(),
                        "gamma factors differ: {g_multi} vs {g_one}"
                    );
                }
                // radial identity right sides coincide sphere by sphere:
                // |x|^alpha at max-norm p^e equals (p^n)^{(alpha/n) e}
                for e in -2..=2 {
                    let (_, rhs_multi) =
                        radial_identity_check(&RadialValue::power(p, e), &multi).unwrap();
                    let (_, rhs_one) =
                        radial_identity_check(&RadialValue::power(p.pow(n as u32), e), &one)
                            .unwrap();
                    assert!(
                        (rhs_multi - rhs_one).abs() <= 1e-12 * rhs_multi.abs().max(1.0),
                        "radial identity differs at e={e}: {rhs_multi} vs {rhs_one}"
                    );
                }
            }
        }
    }
}

#[test]
fn operator_rejects_mismatched_params() {
    let f = unit_indicator(2);
    let params = VtParams::new(0.5, 3, 1).unwrap();
    assert!(apply_spectral(&f, &params).is_err());
    assert!(VtParams::new(0.0, 2, 1).is_err());
    assert!(VtParams::new(-1.0, 2, 1).is_err());
}
