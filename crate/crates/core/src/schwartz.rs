//! The step-function algebra over `Q_p^n`: finite complex linear
//! combinations of disjoint-cell indicators, with exact integration, the
//! rank-zero additive character, and the exact Fourier transform.
//!
//! A step function supported in `B(p^M)` and constant on cells of radius
//! `p^-m` transforms into one supported in `B(p^m)` and constant on cells of
//! radius `p^-M`; the transform of a single cell indicator is
//! `chi(c xi) p^{-mn} 1_{|xi| <= p^m}`, so everything stays closed-form.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::accum::KahanC64;
use crate::error::{Error, Result};
use crate::padic::{abs_exp, Ball, Cell, OpenSetDecomposition, PadicCoord, PadicPoint};

/// Cap on the number of cells any full-grid operation will enumerate.
pub const GRID_CAP: u128 = 1 << 20;

/// Unit-modulus value of the additive character.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacterValue(pub Complex64);

fn pow_u128(p: u32, e: u32) -> Result<u128> {
    (p as u128)
        .checked_pow(e)
        .ok_or(Error::GridTooLarge { cells: u128::MAX, cap: GRID_CAP })
}

/// `exp(2 pi i * frac_p(x))` where `frac_p` keeps the negative-power digits.
/// This is the fixed rank-zero character: identically 1 on the integers and
/// nontrivial at `1/p`. One-dimensional input.
pub fn character(x: &PadicPoint) -> Result<CharacterValue> {
    if x.dim() != 1 {
        return Err(Error::DimensionMismatch(x.dim(), 1));
    }
    let c = &x.coords()[0];
    frac_to_character(x.prime(), coord_frac(x.prime(), c))
}

/// `chi(x . xi)` with the dot product taken exactly.
pub fn character_dot(x: &PadicPoint, xi: &PadicPoint) -> Result<CharacterValue> {
    let (m, e) = x.dot_scaled(xi)?;
    frac_to_character(x.prime(), scaled_frac(x.prime(), m, e))
}

fn coord_frac(prime: u32, c: &PadicCoord) -> (BigUint, u32) {
    if c.is_zero() || c.valuation >= 0 {
        return (BigUint::zero(), 0);
    }
    let k = (-c.valuation) as u32;
    let mut num = BigUint::zero();
    let p = BigUint::from(prime);
    for (i, &d) in c.digits.iter().enumerate().take(k as usize) {
        num += BigUint::from(d) * p.pow(i as u32);
    }
    (num, k)
}

fn scaled_frac(prime: u32, m: BigUint, e: i32) -> (BigUint, u32) {
    if m.is_zero() || e >= 0 {
        return (BigUint::zero(), 0);
    }
    let k = (-e) as u32;
    let num = m % BigUint::from(prime).pow(k);
    (num, k)
}

fn frac_to_character(prime: u32, (num, k): (BigUint, u32)) -> Result<CharacterValue> {
    if num.is_zero() {
        return Ok(CharacterValue(Complex64::new(1.0, 0.0)));
    }
    // The angle must be exact in f64: require p^k < 2^53.
    if k as f64 * (prime as f64).log2() >= 53.0 {
        return Err(Error::PrecisionExceeded(k as i64));
    }
    let den = (prime as f64).powi(k as i32);
    let angle = TAU * num.to_f64().unwrap() / den;
    Ok(CharacterValue(Complex64::from_polar(1.0, angle)))
}

type Key = Vec<u128>;

/// Finite linear combination of disjoint-cell indicators: the computational
/// realization of a compactly supported locally constant function.
///
/// Invariants: support contained in `B(p^support_exp)`, every cell of radius
/// `p^-scale`, `support_exp + scale >= 0`, cells pairwise disjoint by
/// construction (keyed storage), zero-valued cells not stored.
#[derive(Debug, Clone)]
pub struct StepFunction {
    prime: u32,
    dim: usize,
    support_exp: i32,
    scale: i32,
    terms: BTreeMap<Key, Complex64>,
}

impl StepFunction {
    pub fn zero(prime: u32, dim: usize) -> Self {
        StepFunction { prime, dim, support_exp: 0, scale: 0, terms: BTreeMap::new() }
    }

    pub fn indicator_cell(cell: &Cell) -> Result<Self> {
        let support_exp = support_needed(&cell.center, cell.radius_exp);
        let scale = -cell.radius_exp;
        let mut f = StepFunction {
            prime: cell.prime(),
            dim: cell.dim(),
            support_exp,
            scale,
            terms: BTreeMap::new(),
        };
        let key = f.key_of(&cell.center)?;
        f.terms.insert(key, Complex64::new(1.0, 0.0));
        Ok(f)
    }

    pub fn indicator_ball(ball: &Ball) -> Result<Self> {
        Self::indicator_cell(&Cell::new(ball.center.clone(), ball.radius_exp))
    }

    /// Sum of weighted cell indicators; overlapping inputs add.
    pub fn from_terms(prime: u32, dim: usize, terms: &[(Cell, Complex64)]) -> Result<Self> {
        if terms.is_empty() {
            return Ok(StepFunction::zero(prime, dim));
        }
        let support = terms
            .iter()
            .map(|(c, _)| support_needed(&c.center, c.radius_exp))
            .max()
            .unwrap();
        let scale = terms.iter().map(|(c, _)| -c.radius_exp).max().unwrap();
        let mut out =
            StepFunction { prime, dim, support_exp: support, scale, terms: BTreeMap::new() };
        for (cell, v) in terms {
            if cell.prime() != prime {
                return Err(Error::PrimeMismatch(cell.prime(), prime));
            }
            if cell.dim() != dim {
                return Err(Error::DimensionMismatch(cell.dim(), dim));
            }
            let ind = StepFunction::indicator_cell(cell)?.refine_to(support, scale)?;
            for (k, w) in ind.terms {
                *out.terms.entry(k).or_insert_with(Complex64::zero) += v * w;
            }
        }
        out.terms.retain(|_, v| !(v.re == 0.0 && v.im == 0.0));
        Ok(out)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_exp(&self) -> i32 {
        self.support_exp
    }

    pub fn scale(&self) -> i32 {
        self.scale
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.values().all(|v| v.im.abs() <= tol)
    }

    fn side(&self) -> Result<u128> {
        let e = self.support_exp + self.scale;
        debug_assert!(e >= 0, "support_exp + scale must be nonnegative");
        pow_u128(self.prime, e as u32)
    }

    fn key_of(&self, center: &PadicPoint) -> Result<Key> {
        let side = self.side()?;
        center
            .coords()
            .iter()
            .map(|c| {
                if c.is_zero() {
                    return Ok(0u128);
                }
                if c.valuation < -self.support_exp {
                    return Err(Error::SupportViolation("cell outside the support ball"));
                }
                let mut acc: u128 = 0;
                for &d in c.digits.iter().rev() {
                    acc = acc
                        .checked_mul(self.prime as u128)
                        .and_then(|a| a.checked_add(d as u128))
                        .ok_or(Error::GridTooLarge { cells: u128::MAX, cap: GRID_CAP })?;
                }
                let shift = (c.valuation + self.support_exp) as u32;
                let acc = acc
                    .checked_mul(pow_u128(self.prime, shift)?)
                    .ok_or(Error::GridTooLarge { cells: u128::MAX, cap: GRID_CAP })?;
                if acc >= side {
                    return Err(Error::SupportViolation("cell outside the support ball"));
                }
                Ok(acc)
            })
            .collect()
    }

    fn center_of(&self, key: &Key) -> PadicPoint {
        let coords = key
            .iter()
            .map(|&k| {
                let mut a = k;
                let mut digits = Vec::new();
                while a > 0 {
                    digits.push((a % self.prime as u128) as u32);
                    a /= self.prime as u128;
                }
                let mut c = PadicCoord { valuation: -self.support_exp, digits };
                // canonical form via the public constructor path
                if c.digits.is_empty() {
                    c = PadicCoord::zero();
                }
                c
            })
            .collect();
        PadicPoint::new(self.prime, coords).expect("digits in range").reduce_mod(self.scale)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Cell, Complex64)> + '_ {
        self.terms.iter().map(move |(k, v)| {
            (Cell::new(self.center_of(k), -self.scale), *v)
        })
    }

    /// Cell measure `p^{-scale * n}` shared by every term.
    pub fn cell_measure(&self) -> f64 {
        (self.prime as f64).powi(-self.scale * self.dim as i32)
    }

    /// Re-express on a coarser support ball / finer cell scale. Values are
    /// unchanged; each cell splits into `p^{n * (scale' - scale)}` children.
    pub fn refine_to(&self, support_exp: i32, scale: i32) -> Result<Self> {
        if support_exp < self.support_exp || scale < self.scale {
            return Err(Error::Config("refine_to cannot coarsen".into()));
        }
        let mut out = StepFunction {
            prime: self.prime,
            dim: self.dim,
            support_exp,
            scale,
            terms: BTreeMap::new(),
        };
        let split = scale - self.scale;
        let per_coord = pow_u128(self.prime, split as u32)?;
        let total = per_coord.checked_pow(self.dim as u32).ok_or(Error::GridTooLarge {
            cells: u128::MAX,
            cap: GRID_CAP,
        })?;
        let n_cells = (self.terms.len() as u128).saturating_mul(total);
        if n_cells > GRID_CAP {
            return Err(Error::GridTooLarge { cells: n_cells, cap: GRID_CAP });
        }
        let shift = pow_u128(self.prime, (self.support_exp + self.scale).max(0) as u32)?;
        let support_shift = pow_u128(self.prime, (support_exp - self.support_exp) as u32)?;
        for (key, &v) in &self.terms {
            // old key scaled into the new grid, then all child offsets added
            let base: Key = key.iter().map(|&k| k * support_shift).collect();
            let mut combo = vec![0u128; self.dim];
            loop {
                let new_key: Key = base
                    .iter()
                    .zip(&combo)
                    .map(|(&b, &c)| b + c * shift * support_shift)
                    .collect();
                out.terms.insert(new_key, v);
                let mut j = 0;
                loop {
                    if j == self.dim {
                        break;
                    }
                    combo[j] += 1;
                    if combo[j] < per_coord {
                        break;
                    }
                    combo[j] = 0;
                    j += 1;
                }
                if j == self.dim {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Common grid refinement: the coarsest scale and smallest support ball
    /// resolving both operands.
    pub fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        self.compatible(other)?;
        let support = self.support_exp.max(other.support_exp);
        let scale = self.scale.max(other.scale);
        Ok((self.refine_to(support, scale)?, other.refine_to(support, scale)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.aligned(other)?;
        for (k, v) in b.terms {
            *a.terms.entry(k).or_insert_with(Complex64::zero) += v;
        }
        a.terms.retain(|_, v| !(v.re == 0.0 && v.im == 0.0));
        Ok(a)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut neg = other.clone();
        neg.scale_by(Complex64::new(-1.0, 0.0));
        self.add(&neg)
    }

    pub fn scale_by(&mut self, c: Complex64) {
        if c.re == 0.0 && c.im == 0.0 {
            self.terms.clear();
            return;
        }
        for v in self.terms.values_mut() {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.scale_by(c);
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.aligned(other)?;
        a.terms = a
            .terms
            .into_iter()
            .filter_map(|(k, v)| b.terms.get(&k).map(|w| (k, v * w)))
            .filter(|(_, v)| !(v.re == 0.0 && v.im == 0.0))
            .collect();
        Ok(a)
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.conj();
        }
        out
    }

    pub fn translate(&self, a: &PadicPoint) -> Result<Self> {
        if a.prime() != self.prime {
            return Err(Error::PrimeMismatch(a.prime(), self.prime));
        }
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch(a.dim(), self.dim));
        }
        let a_exp = abs_exp(a).unwrap_or(-self.scale);
        let support = self.support_exp.max(a_exp).max(-self.scale);
        let mut out = StepFunction {
            prime: self.prime,
            dim: self.dim,
            support_exp: support,
            scale: self.scale,
            terms: BTreeMap::new(),
        };
        for (k, &v) in &self.terms {
            let c = self.center_of(k).add(a)?.reduce_mod(self.scale);
            let key = out.key_of(&c)?;
            let e = out.terms.entry(key).or_insert(Complex64::zero());
            *e += v;
        }
        out.terms.retain(|_, v| !(v.re == 0.0 && v.im == 0.0));
        Ok(out)
    }

    pub fn restrict_ball(&self, ball: &Ball) -> Result<Self> {
        let scale = self.scale.max(-ball.radius_exp);
        let mut f = self.refine_to(self.support_exp.max(ball.radius_exp), scale)?;
        let keys: Vec<Key> = f
            .terms
            .keys()
            .filter(|k| !ball.contains_point(&f.center_of(k)).unwrap_or(false))
            .cloned()
            .collect();
        for k in keys {
            f.terms.remove(&k);
        }
        Ok(f)
    }

    pub fn restrict_domain(&self, omega: &OpenSetDecomposition) -> Result<Self> {
        let finest = omega.balls().iter().map(|b| -b.radius_exp).max().unwrap_or(self.scale);
        let mut f = self.refine_to(self.support_exp, self.scale.max(finest))?;
        let keys: Vec<Key> = f
            .terms
            .keys()
            .filter(|k| !omega.contains_point(&f.center_of(k)).unwrap_or(false))
            .cloned()
            .collect();
        for k in keys {
            f.terms.remove(&k);
        }
        Ok(f)
    }

    pub fn evaluate(&self, x: &PadicPoint) -> Result<Complex64> {
        if let Some(e) = abs_exp(x) {
            if e > self.support_exp {
                return Ok(Complex64::zero());
            }
        }
        let key = self.key_of(&x.reduce_mod(self.scale))?;
        Ok(self.terms.get(&key).copied().unwrap_or_else(Complex64::zero))
    }

    /// Exact Haar integral: `sum value * p^{-scale n}` with compensated
    /// summation of the values.
    pub fn integrate(&self) -> Complex64 {
        let mut acc = KahanC64::new();
        for v in self.terms.values() {
            acc.add(*v);
        }
        acc.value() * self.cell_measure()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let mut acc = KahanC64::new();
        for v in self.terms.values() {
            acc.add(Complex64::new(v.norm_sqr(), 0.0));
        }
        acc.value().re * self.cell_measure()
    }

    pub fn l2_inner(&self, other: &Self) -> Result<Complex64> {
        let (a, b) = self.aligned(other)?;
        let mut acc = KahanC64::new();
        for (k, v) in &a.terms {
            if let Some(w) = b.terms.get(k) {
                acc.add(v * w.conj());
            }
        }
        Ok(acc.value() * a.cell_measure())
    }

    /// Forward transform `xi -> integral chi(x xi) f(x) dx`, exact on the
    /// swapped grid: output support `B(p^scale)`, output cells of radius
    /// `p^-support_exp`.
    pub fn fourier(&self) -> Result<Self> {
        self.transform(false)
    }

    /// Inverse transform, `chi(-x xi)` in place of `chi(x xi)`.
    pub fn inverse_fourier(&self) -> Result<Self> {
        self.transform(true)
    }

    fn transform(&self, inverse: bool) -> Result<Self> {
        let out_support = self.scale;
        let out_scale = self.support_exp;
        let mut out = StepFunction {
            prime: self.prime,
            dim: self.dim,
            support_exp: out_support,
            scale: out_scale,
            terms: BTreeMap::new(),
        };
        let inputs: Vec<(PadicPoint, Complex64)> =
            self.terms.iter().map(|(k, v)| (self.center_of(k), *v)).collect();
        let measure = self.cell_measure();
        let grid = out.full_grid()?;
        for key in grid {
            let zeta = out.center_of(&key);
            let mut acc = KahanC64::new();
            for (c, v) in &inputs {
                let chi = character_dot(c, &zeta)?.0;
                let chi = if inverse { chi.conj() } else { chi };
                acc.add(v * chi);
            }
            let val = acc.value() * measure;
            if val.re != 0.0 || val.im != 0.0 {
                out.terms.insert(key, val);
            }
        }
        Ok(out)
    }

    /// All keys of the full grid over the support ball at the current scale.
    pub(crate) fn full_grid(&self) -> Result<Vec<Key>> {
        let side = self.side()?;
        let count = side.checked_pow(self.dim as u32).ok_or(Error::GridTooLarge {
            cells: u128::MAX,
            cap: GRID_CAP,
        })?;
        if count > GRID_CAP {
            return Err(Error::GridTooLarge { cells: count, cap: GRID_CAP });
        }
        let mut keys = Vec::with_capacity(count as usize);
        let mut combo = vec![0u128; self.dim];
        loop {
            keys.push(combo.clone());
            let mut j = 0;
            loop {
                if j == self.dim {
                    return Ok(keys);
                }
                combo[j] += 1;
                if combo[j] < side {
                    break;
                }
                combo[j] = 0;
                j += 1;
            }
        }
    }

    /// Dense view on the full grid: centers, values (zeros included), and
    /// fast exact pairwise distances.
    pub fn grid_view(&self) -> Result<GridView> {
        let keys = self.full_grid()?;
        let centers: Vec<PadicPoint> = keys.iter().map(|k| self.center_of(k)).collect();
        let values: Vec<Complex64> = keys
            .iter()
            .map(|k| self.terms.get(k).copied().unwrap_or_else(Complex64::zero))
            .collect();
        Ok(GridView {
            prime: self.prime,
            dim: self.dim,
            support_exp: self.support_exp,
            scale: self.scale,
            keys,
            centers,
            values,
        })
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    /// Largest pointwise gap against `other` over the union grid.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let (a, b) = self.aligned(other)?;
        let mut worst = 0.0f64;
        for (k, v) in &a.terms {
            let w = b.terms.get(k).copied().unwrap_or_else(Complex64::zero);
            worst = worst.max((v - w).norm());
        }
        for (k, w) in &b.terms {
            if !a.terms.contains_key(k) {
                worst = worst.max(w.norm());
            }
        }
        Ok(worst)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn support_needed(center: &PadicPoint, radius_exp: i32) -> i32 {
    abs_exp(center).unwrap_or(radius_exp).max(radius_exp)
}

/// Dense full-grid view of a step function. `distance_exp(i, j)` returns the
/// exponent `t` with `|c_i - c_j| = p^t` using integer key arithmetic, which
/// keeps the hot paths of the operator modules free of bignum work.
pub struct GridView {
    pub prime: u32,
    pub dim: usize,
    pub support_exp: i32,
    pub scale: i32,
    pub keys: Vec<Key>,
    pub centers: Vec<PadicPoint>,
    pub values: Vec<Complex64>,
}

impl GridView {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn cell_measure(&self) -> f64 {
        (self.prime as f64).powi(-self.scale * self.dim as i32)
    }

    /// Index of the cell containing the origin.
    pub fn zero_index(&self) -> Option<usize> {
        self.keys.iter().position(|k| k.iter().all(|&c| c == 0))
    }

    pub fn distance_exp(&self, i: usize, j: usize) -> Option<i32> {
        let p = self.prime as u128;
        let mut best: Option<i32> = None;
        for d in 0..self.dim {
            let (a, b) = (self.keys[i][d], self.keys[j][d]);
            if a == b {
                continue;
            }
            let mut diff = a.abs_diff(b);
            let mut v = 0i32;
            while diff % p == 0 {
                diff /= p;
                v += 1;
            }
            // keys carry an implicit factor p^{support_exp}
            let t = self.support_exp - v;
            best = Some(match best {
                Some(cur) => cur.max(t),
                None => t,
            });
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::RadialValue;

    fn unit_ball(p: u32) -> Ball {
        Ball::new(PadicPoint::zero(p, 1), 0)
    }

    #[test]
    fn character_examples() {
        // identically 1 on the integers
        let x = PadicPoint::from_integer_scaled(2, 7, 0);
        assert!((character(&x).unwrap().0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // chi(1/2) = -1
        let h = PadicPoint::from_integer_scaled(2, 1, -1);
        assert!((character(&h).unwrap().0 - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        // chi(3/4) = -i
        let q = PadicPoint::from_integer_scaled(2, 3, -2);
        assert!((character(&q).unwrap().0 - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn integrate_examples() {
        let f = StepFunction::indicator_ball(&unit_ball(3)).unwrap();
        assert!((f.integrate() - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        // 1_{2Z_2} - 1_{1+2Z_2} integrates to zero
        let even = StepFunction::indicator_cell(&Cell::new(PadicPoint::zero(2, 1), -1)).unwrap();
        let odd = StepFunction::indicator_cell(&Cell::new(
            PadicPoint::from_integer_scaled(2, 1, 0),
            -1,
        ))
        .unwrap();
        let f = even.sub(&odd).unwrap();
        assert!(f.integrate().norm() < 1e-15);

        // indicator of the sphere {|x| = 3} integrates to 3 - 1 = 2
        let big = StepFunction::indicator_ball(&Ball::new(PadicPoint::zero(3, 1), 1)).unwrap();
        let small = StepFunction::indicator_ball(&unit_ball(3)).unwrap();
        let sphere = big.sub(&small).unwrap();
        assert!((sphere.integrate() - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let exact = RadialValue::power(3, 1)
            .sub(&RadialValue::power(3, 0))
            .unwrap();
        assert_eq!(exact.to_f64(), 2.0);
    }

    #[test]
    fn fourier_unit_ball_is_fixed() {
        for p in [2u32, 3, 5] {
            let f = StepFunction::indicator_ball(&unit_ball(p)).unwrap();
            let g = f.fourier().unwrap();
            assert!(f.max_abs_diff(&g).unwrap() < 1e-14);
        }
    }

    #[test]
    fn fourier_small_ball() {
        // F[1_{pZ_p}] = p^{-1} 1_{|xi| <= p}
        let p = 3u32;
        let f = StepFunction::indicator_cell(&Cell::new(PadicPoint::zero(p, 1), -1)).unwrap();
        let g = f.fourier().unwrap();
        assert_eq!(g.support_exp(), 1);
        assert_eq!(g.scale(), f.support_exp());
        let expect = StepFunction::indicator_ball(&Ball::new(PadicPoint::zero(p, 1), 1))
            .unwrap()
            .scaled(Complex64::new(1.0 / p as f64, 0.0));
        assert!(g.max_abs_diff(&expect).unwrap() < 1e-14);
    }

    #[test]
    fn support_constancy_swap() {
        let f = StepFunction::from_terms(
            2,
            1,
            &[
                (Cell::new(PadicPoint::from_integer_scaled(2, 1, -1), -2), Complex64::new(1.5, 0.2)),
                (Cell::new(PadicPoint::from_integer_scaled(2, 3, 0), -2), Complex64::new(-0.5, 1.0)),
            ],
        )
        .unwrap();
        let g = f.fourier().unwrap();
        assert_eq!(g.support_exp(), f.scale());
        assert_eq!(g.scale(), f.support_exp());
        let back = g.inverse_fourier().unwrap();
        assert!(f.max_abs_diff(&back).unwrap() < 1e-12);
    }

    #[test]
    fn pointwise_algebra() {
        let f = StepFunction::indicator_ball(&unit_ball(2)).unwrap();
        let g = f.sub(&f).unwrap();
        assert!(g.is_zero());

        // translate(1_{Z_p}, a) = 1_{Z_p} for |a| <= 1
        let a = PadicPoint::from_integer_scaled(2, 3, 0);
        let t = f.translate(&a).unwrap();
        assert!(f.max_abs_diff(&t).unwrap() == 0.0);

        // restrict(1_{B(p)}, Z_p) = 1_{Z_p}
        let big = StepFunction::indicator_ball(&Ball::new(PadicPoint::zero(2, 1), 1)).unwrap();
        let r = big.restrict_ball(&unit_ball(2)).unwrap();
        assert!(r.max_abs_diff(&f).unwrap() < 1e-15);
    }

    #[test]
    fn restrict_to_open_set() {
        use crate::padic::OpenSetDecomposition;
        // restrict 1_{B(2)} to the two balls {|x| <= 1/2} and 1 + 2Z_2
        let big = StepFunction::indicator_ball(&Ball::new(PadicPoint::zero(2, 1), 1)).unwrap();
        let omega = OpenSetDecomposition::explicit(
            2,
            1,
            vec![
                Ball::new(PadicPoint::zero(2, 1), -1),
                Ball::new(PadicPoint::from_integer_scaled(2, 1, 0), -1),
            ],
        )
        .unwrap();
        let r = big.restrict_domain(&omega).unwrap();
        assert!((r.integrate().re - 1.0).abs() < 1e-15);
        assert!(r
            .evaluate(&PadicPoint::from_integer_scaled(2, 1, -1))
            .unwrap()
            .norm()
            < 1e-15);
        // step functions travel across threads
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<StepFunction>();
    }

    #[test]
    fn evaluate_and_grid() {
        let f = StepFunction::from_terms(
            2,
            1,
            &[(Cell::new(PadicPoint::from_integer_scaled(2, 1, 0), -1), Complex64::new(2.0, 0.0))],
        )
        .unwrap();
        let x = PadicPoint::from_integer_scaled(2, 3, 0); // 3 = 1 + 2 lies in 1 + 2Z_2
        assert!((f.evaluate(&x).unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let y = PadicPoint::zero(2, 1);
        assert!(f.evaluate(&y).unwrap().norm() < 1e-15);

        let view = f.grid_view().unwrap();
        assert_eq!(view.len(), 2);
        let d = view.distance_exp(0, 1).unwrap();
        assert_eq!(d, 0); // |0 - 1| = 1 = 2^0
    }
}
