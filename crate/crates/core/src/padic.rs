//! Exact arithmetic and measure theory on `Q_p` and `Q_p^n`.
//!
//! Points carry finite digit expansions, all radii and Haar measures are
//! exact rationals of the form `mantissa * p^exponent`, and the ultrametric
//! dichotomy (two balls are nested or disjoint, never partially overlapping)
//! is decidable for every pair. The `n`-dimensional norm is the max-norm,
//! taking values `p^N`; it is the only norm stored in this layer.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default bound on digit positions handled before an operation refuses to
/// answer rather than silently dropping information.
pub const DEFAULT_PRECISION_LIMIT: i64 = 4096;

/// Exact nonnegative rational of the form `mantissa * p^exponent` with the
/// mantissa coprime to `p` (unless zero). Holds absolute values, radii and
/// Haar measures; keeping these exact removes all quadrature error from the
/// radial combinatorics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadialValue {
    prime: u32,
    mantissa: BigUint,
    exponent: i64,
}

impl RadialValue {
    pub fn zero(prime: u32) -> Self {
        RadialValue { prime, mantissa: BigUint::zero(), exponent: 0 }
    }

    /// `p^exponent`.
    pub fn power(prime: u32, exponent: i64) -> Self {
        RadialValue { prime, mantissa: BigUint::from(1u32), exponent }
    }

    pub fn new(prime: u32, mantissa: BigUint, exponent: i64) -> Self {
        let mut v = RadialValue { prime, mantissa, exponent };
        v.normalize();
        v
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        let p = BigUint::from(self.prime);
        while (&self.mantissa % &p).is_zero() {
            self.mantissa /= &p;
            self.exponent += 1;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// For a pure power of `p` returns the exponent.
    pub fn as_power(&self) -> Option<i64> {
        if self.mantissa == BigUint::from(1u32) { Some(self.exponent) } else { None }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let e = self.exponent.min(other.exponent);
        let m = self.shifted_mantissa(e) + other.shifted_mantissa(e);
        Ok(RadialValue::new(self.prime, m, e))
    }

    /// `self - other`; errors on a negative result since radial quantities
    /// are nonnegative by construction.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        let e = self.exponent.min(other.exponent);
        let a = self.shifted_mantissa(e);
        let b = other.shifted_mantissa(e);
        if b > a {
            return Err(Error::Degenerate("radial subtraction went negative"));
        }
        Ok(RadialValue::new(self.prime, a - b, e))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(RadialValue::new(
            self.prime,
            &self.mantissa * &other.mantissa,
            self.exponent + other.exponent,
        ))
    }

    /// Exact quotient by a pure power `p^k`.
    pub fn div_power(&self, k: i64) -> Self {
        let mut v = self.clone();
        if !v.is_zero() {
            v.exponent -= k;
        }
        v
    }

    fn shifted_mantissa(&self, e: i64) -> BigUint {
        debug_assert!(e <= self.exponent);
        let shift = (self.exponent - e) as u32;
        &self.mantissa * BigUint::from(self.prime).pow(shift)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        assert_eq!(self.prime, other.prime, "cannot compare across primes");
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let e = self.exponent.min(other.exponent);
        self.shifted_mantissa(e).cmp(&other.shifted_mantissa(e))
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits();
        // Split the mantissa when it would overflow a double on its own.
        if bits > 512 {
            return self.ln().exp();
        }
        let m = self.mantissa.to_f64().unwrap_or(f64::INFINITY);
        m * (self.prime as f64).powi(self.exponent.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    /// Natural log, stable for extreme exponents (used by log-log fits).
    pub fn ln(&self) -> f64 {
        assert!(!self.is_zero(), "ln of zero radial value");
        let mut m = self.mantissa.clone();
        let mut extra = 0.0f64;
        let chunk = BigUint::from(1u64) << 52;
        while m > chunk {
            let b = m.bits() - 52;
            m >>= b;
            extra += b as f64 * std::f64::consts::LN_2;
        }
        m.to_f64().unwrap().ln() + extra + self.exponent as f64 * (self.prime as f64).ln()
    }
}

/// One coordinate of a point of `Q_p`: the value `sum_k digits[k] * p^(valuation+k)`.
/// Canonical form: empty digits for zero, otherwise first and last digit nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicCoord {
    pub valuation: i32,
    pub digits: Vec<u32>,
}

impl PadicCoord {
    pub fn zero() -> Self {
        PadicCoord { valuation: 0, digits: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    fn canonicalize(&mut self) {
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
        let leading = self.digits.iter().take_while(|d| **d == 0).count();
        if leading > 0 {
            self.digits.drain(..leading);
            self.valuation += leading as i32;
        }
        if self.digits.is_empty() {
            self.valuation = 0;
        }
    }

    /// Scaled-integer view: `(a, e)` with value `a * p^e`, `a` coprime to `p`.
    fn to_scaled(&self, prime: u32) -> (BigUint, i32) {
        if self.is_zero() {
            return (BigUint::zero(), 0);
        }
        let p = BigUint::from(prime);
        let mut acc = BigUint::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * &p + BigUint::from(d);
        }
        (acc, self.valuation)
    }

    fn from_scaled(prime: u32, mut a: BigUint, e: i32) -> Self {
        if a.is_zero() {
            return PadicCoord::zero();
        }
        let p = BigUint::from(prime);
        let mut digits = Vec::new();
        while !a.is_zero() {
            let d = (&a % &p).to_u32().unwrap();
            digits.push(d);
            a /= &p;
        }
        let mut c = PadicCoord { valuation: e, digits };
        c.canonicalize();
        c
    }
}

/// A point of `Q_p^n` with all coordinates over the same prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicPoint {
    prime: u32,
    coords: Vec<PadicCoord>,
}

impl PadicPoint {
    pub fn new(prime: u32, coords: Vec<PadicCoord>) -> Result<Self> {
        if prime < 2 {
            return Err(Error::InvalidPrime(prime));
        }
        let mut coords = coords;
        for c in coords.iter_mut() {
            if c.digits.len() as i64 > DEFAULT_PRECISION_LIMIT {
                return Err(Error::PrecisionExceeded(c.digits.len() as i64));
            }
            for &d in &c.digits {
                if d >= prime {
                    return Err(Error::DigitOutOfRange { digit: d, prime });
                }
            }
            c.canonicalize();
        }
        if coords.is_empty() {
            return Err(Error::DimensionMismatch(0, 1));
        }
        Ok(PadicPoint { prime, coords })
    }

    pub fn zero(prime: u32, dim: usize) -> Self {
        PadicPoint { prime, coords: vec![PadicCoord::zero(); dim] }
    }

    /// One-dimensional point `k * p^e` for a nonnegative integer `k`.
    pub fn from_integer_scaled(prime: u32, k: u64, e: i32) -> Self {
        let c = PadicCoord::from_scaled(prime, BigUint::from(k), e);
        PadicPoint { prime, coords: vec![c] }
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[PadicCoord] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Coordinatewise sum; exact (digit vectors are finite).
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let (ma, ea) = a.to_scaled(self.prime);
                let (mb, eb) = b.to_scaled(self.prime);
                if ma.is_zero() {
                    return b.clone();
                }
                if mb.is_zero() {
                    return a.clone();
                }
                let e = ea.min(eb);
                let p = BigUint::from(self.prime);
                let s = ma * p.pow((ea - e) as u32) + mb * p.pow((eb - e) as u32);
                PadicCoord::from_scaled(self.prime, s, e)
            })
            .collect();
        Ok(PadicPoint { prime: self.prime, coords })
    }

    /// Valuation of `a - b` per coordinate; `None` when the coordinates agree.
    fn coord_diff_valuation(&self, other: &Self, j: usize) -> Option<i32> {
        let (ma, ea) = self.coords[j].to_scaled(self.prime);
        let (mb, eb) = other.coords[j].to_scaled(self.prime);
        if ma.is_zero() && mb.is_zero() {
            return None;
        }
        let e = if ma.is_zero() {
            eb
        } else if mb.is_zero() {
            ea
        } else {
            ea.min(eb)
        };
        let p = BigInt::from(self.prime);
        let big_a = BigInt::from(ma) * p.pow((ea - e).max(0) as u32);
        let big_b = BigInt::from(mb) * p.pow((eb - e).max(0) as u32);
        let mut d = big_a - big_b;
        if d.is_zero() {
            return None;
        }
        if d.is_negative() {
            d = -d;
        }
        let mut v = e;
        let p = BigInt::from(self.prime);
        while (&d % &p).is_zero() {
            d /= &p;
            v += 1;
        }
        Some(v)
    }

    /// Max-norm distance `|a - b|` as an exact radial value.
    pub fn distance(&self, other: &Self) -> Result<RadialValue> {
        self.compatible(other)?;
        let mut best: Option<i32> = None;
        for j in 0..self.dim() {
            if let Some(v) = self.coord_diff_valuation(other, j) {
                best = Some(match best {
                    Some(b) => b.min(v),
                    None => v,
                });
            }
        }
        Ok(match best {
            Some(v) => RadialValue::power(self.prime, -(v as i64)),
            None => RadialValue::zero(self.prime),
        })
    }

    /// The exponent `t` with `|a - b| = p^t`, or `None` for equal points.
    pub fn distance_exp(&self, other: &Self) -> Result<Option<i32>> {
        self.compatible(other)?;
        let mut best: Option<i32> = None;
        for j in 0..self.dim() {
            if let Some(v) = self.coord_diff_valuation(other, j) {
                best = Some(match best {
                    Some(b) => b.min(v),
                    None => v,
                });
            }
        }
        Ok(best.map(|v| -v))
    }

    /// Reduce every coordinate mod `p^scale`, the canonical center of the
    /// scale-`scale` cell containing this point.
    pub fn reduce_mod(&self, scale: i32) -> Self {
        let coords = self
            .coords
            .iter()
            .map(|c| {
                if c.is_zero() || c.valuation >= scale {
                    return PadicCoord::zero();
                }
                let keep = (scale - c.valuation) as usize;
                let mut digits: Vec<u32> = c.digits.iter().copied().take(keep).collect();
                digits.truncate(keep);
                let mut r = PadicCoord { valuation: c.valuation, digits };
                r.canonicalize();
                r
            })
            .collect();
        PadicPoint { prime: self.prime, coords }
    }

    /// Dot product `sum_j a_j b_j` as a scaled integer `(m, e)` meaning `m * p^e`.
    pub(crate) fn dot_scaled(&self, other: &Self) -> Result<(BigUint, i32)> {
        self.compatible(other)?;
        let mut acc = BigUint::zero();
        let mut acc_e = 0i32;
        for j in 0..self.dim() {
            let (ma, ea) = self.coords[j].to_scaled(self.prime);
            let (mb, eb) = other.coords[j].to_scaled(self.prime);
            if ma.is_zero() || mb.is_zero() {
                continue;
            }
            let m = ma * mb;
            let e = ea + eb;
            if acc.is_zero() {
                acc = m;
                acc_e = e;
            } else {
                let common = acc_e.min(e);
                let p = BigUint::from(self.prime);
                acc = acc * p.pow((acc_e - common) as u32) + m * p.pow((e - common) as u32);
                acc_e = common;
            }
        }
        Ok((acc, acc_e))
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    /// Renders each coordinate as `d0,d1,...@valuation` (ascending powers),
    /// coordinates joined by `;`. Zero renders as `0`.
    pub fn encode(&self) -> String {
        self.coords
            .iter()
            .map(|c| {
                if c.is_zero() {
                    "0".to_string()
                } else {
                    let ds: Vec<String> = c.digits.iter().map(|d| d.to_string()).collect();
                    format!("{}@{}", ds.join(","), c.valuation)
                }
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn decode(prime: u32, s: &str) -> Result<Self> {
        let coords = s
            .split(';')
            .map(|part| {
                let part = part.trim();
                if part == "0" {
                    return Ok(PadicCoord::zero());
                }
                let (digs, val) = part
                    .split_once('@')
                    .ok_or_else(|| Error::Config(format!("bad coordinate `{part}`")))?;
                let valuation: i32 = val
                    .parse()
                    .map_err(|_| Error::Config(format!("bad valuation `{val}`")))?;
                let digits = digs
                    .split(',')
                    .map(|d| {
                        d.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::Config(format!("bad digit `{d}`")))
                    })
                    .collect::<Result<Vec<u32>>>()?;
                Ok(PadicCoord { valuation, digits })
            })
            .collect::<Result<Vec<_>>>()?;
        PadicPoint::new(prime, coords)
    }
}

/// `|x|`: `p^{-v}` in one dimension, the max over coordinates otherwise.
/// Zero maps to exact zero.
pub fn abs_value(x: &PadicPoint) -> RadialValue {
    let mut best: Option<i64> = None;
    for c in x.coords() {
        if !c.is_zero() {
            let e = -(c.valuation as i64);
            best = Some(match best {
                Some(b) => b.max(e),
                None => e,
            });
        }
    }
    match best {
        Some(e) => RadialValue::power(x.prime(), e),
        None => RadialValue::zero(x.prime()),
    }
}

/// The exponent `t` with `|x| = p^t`, or `None` for `x = 0`.
pub fn abs_exp(x: &PadicPoint) -> Option<i32> {
    let mut best: Option<i32> = None;
    for c in x.coords() {
        if !c.is_zero() {
            let e = -c.valuation;
            best = Some(match best {
                Some(b) => b.max(e),
                None => e,
            });
        }
    }
    best
}

/// Closed max-norm ball `{x : |x - center| <= p^radius_exp}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub center: PadicPoint,
    pub radius_exp: i32,
}

/// Outcome of comparing two balls. Partial overlap is impossible in an
/// ultrametric space and is never returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallRelation {
    Disjoint,
    Equal,
    AContainsB,
    BContainsA,
}

impl Ball {
    pub fn new(center: PadicPoint, radius_exp: i32) -> Self {
        Ball { center, radius_exp }
    }

    pub fn prime(&self) -> u32 {
        self.center.prime()
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains_point(&self, x: &PadicPoint) -> Result<bool> {
        let d = self.center.distance_exp(x)?;
        Ok(match d {
            None => true,
            Some(t) => t <= self.radius_exp,
        })
    }

    /// Haar measure `p^{n * radius_exp}`, exact.
    pub fn measure(&self) -> RadialValue {
        RadialValue::power(self.prime(), self.dim() as i64 * self.radius_exp as i64)
    }
}

/// Decide the nesting relation of two balls; exactly one variant holds.
pub fn ball_relation(a: &Ball, b: &Ball) -> Result<BallRelation> {
    if a.prime() != b.prime() {
        return Err(Error::PrimeMismatch(a.prime(), b.prime()));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let d = a.center.distance_exp(&b.center)?;
    let touch = match d {
        None => true,
        Some(t) => t <= a.radius_exp.max(b.radius_exp),
    };
    Ok(if !touch {
        BallRelation::Disjoint
    } else if a.radius_exp == b.radius_exp {
        // Centers within the common radius: the very same ball.
        match d {
            Some(t) if t > a.radius_exp => BallRelation::Disjoint,
            _ => BallRelation::Equal,
        }
    } else if a.radius_exp > b.radius_exp {
        BallRelation::AContainsB
    } else {
        BallRelation::BContainsA
    })
}

/// Measure of the sphere `{|x| = p^j}` in `Q_p^n`: `p^{jn} - p^{(j-1)n}`.
pub fn sphere_measure(prime: u32, dim: usize, j: i32) -> RadialValue {
    let n = dim as i64;
    let pn = BigUint::from(prime).pow(dim as u32);
    RadialValue::new(prime, pn - BigUint::from(1u32), (j as i64 - 1) * n)
}

/// Haar measure of a ball, normalized so the unit ball has measure 1.
pub fn haar_measure(b: &Ball) -> RadialValue {
    b.measure()
}

/// A coset `c + p^m (Z_p)^n` viewed as a quadrature atom; `radius_exp = -m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub center: PadicPoint,
    pub radius_exp: i32,
}

impl Cell {
    pub fn new(center: PadicPoint, radius_exp: i32) -> Self {
        let center = center.reduce_mod(-radius_exp);
        Cell { center, radius_exp }
    }

    pub fn scale(&self) -> i32 {
        -self.radius_exp
    }

    pub fn prime(&self) -> u32 {
        self.center.prime()
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn measure(&self) -> RadialValue {
        RadialValue::power(self.prime(), self.dim() as i64 * self.radius_exp as i64)
    }

    pub fn as_ball(&self) -> Ball {
        Ball::new(self.center.clone(), self.radius_exp)
    }

    /// The `p^n` child cells one scale finer.
    pub fn children(&self) -> Vec<Cell> {
        let p = self.prime();
        let n = self.dim();
        let m = self.scale();
        let mut out = Vec::with_capacity((p as usize).pow(n as u32));
        let mut digit_combo = vec![0u32; n];
        loop {
            let offset_coords: Vec<PadicCoord> = digit_combo
                .iter()
                .map(|&d| {
                    if d == 0 {
                        PadicCoord::zero()
                    } else {
                        PadicCoord { valuation: m, digits: vec![d] }
                    }
                })
                .collect();
            let offset = PadicPoint { prime: p, coords: offset_coords };
            let center = self.center.add(&offset).expect("same prime and dim");
            out.push(Cell { center, radius_exp: self.radius_exp - 1 });
            // Odometer over base-p digit combinations.
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                digit_combo[k] += 1;
                if digit_combo[k] < p {
                    break;
                }
                digit_combo[k] = 0;
                k += 1;
            }
        }
    }
}

/// Named families of disjoint-ball decompositions.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainFamily {
    Explicit,
    /// `Z_p \ {0}` listed down to `depth` shells.
    PuncturedDisk { depth: u32 },
    /// Union of spheres `S(p^{-lambda_k})`, truncated after `lambda.len()` shells.
    SphereUnion { lambdas: Vec<u32> },
}

/// Hypothesis tag consumed by the comparison check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonHypothesis {
    NonemptyBoundary,
    TranslationInvariant,
}

/// Finite (possibly truncated) list of pairwise-disjoint balls describing an
/// open set. Truncated families carry the radius bound of the omitted tail so
/// operations that would need the tail can fail loudly.
#[derive(Debug, Clone)]
pub struct OpenSetDecomposition {
    prime: u32,
    dim: usize,
    balls: Vec<Ball>,
    family: DomainFamily,
    truncated: bool,
    /// Tail lives inside `{|x| <= p^tail_exp}` when truncated.
    tail_exp: Option<i32>,
    hypothesis: Option<ComparisonHypothesis>,
}

impl OpenSetDecomposition {
    pub fn explicit(prime: u32, dim: usize, balls: Vec<Ball>) -> Result<Self> {
        for w in 0..balls.len() {
            for v in (w + 1)..balls.len() {
                if ball_relation(&balls[w], &balls[v])? != BallRelation::Disjoint {
                    return Err(Error::Config(format!("balls {w} and {v} are not disjoint")));
                }
            }
        }
        Ok(OpenSetDecomposition {
            prime,
            dim,
            balls,
            family: DomainFamily::Explicit,
            truncated: false,
            tail_exp: None,
            hypothesis: None,
        })
    }

    pub(crate) fn from_parts(
        prime: u32,
        dim: usize,
        balls: Vec<Ball>,
        family: DomainFamily,
        truncated: bool,
        tail_exp: Option<i32>,
        hypothesis: Option<ComparisonHypothesis>,
    ) -> Self {
        OpenSetDecomposition { prime, dim, balls, family, truncated, tail_exp, hypothesis }
    }

    pub fn with_hypothesis(mut self, h: ComparisonHypothesis) -> Self {
        self.hypothesis = Some(h);
        self
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn family(&self) -> &DomainFamily {
        &self.family
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn tail_exp(&self) -> Option<i32> {
        self.tail_exp
    }

    pub fn hypothesis(&self) -> Option<ComparisonHypothesis> {
        self.hypothesis
    }

    /// Total measure of the listed balls, exact.
    pub fn listed_measure(&self) -> RadialValue {
        let mut acc = RadialValue::zero(self.prime);
        for b in &self.balls {
            acc = acc.add(&b.measure()).expect("same prime");
        }
        acc
    }

    pub fn contains_point(&self, x: &PadicPoint) -> Result<bool> {
        for b in &self.balls {
            if b.contains_point(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Exact measure of `(B(0, r_out) \ B(0, r_in)) \ Omega` where both radii are
/// powers of `p`. Fails when a truncated tail could intersect the annulus.
pub fn annulus_complement_measure(
    omega: &OpenSetDecomposition,
    r_out: &RadialValue,
    r_in: &RadialValue,
) -> Result<RadialValue> {
    let p = omega.prime();
    let n = omega.dim() as i64;
    let out_exp = r_out
        .as_power()
        .ok_or(Error::Config("r_out must be a power of p".into()))?;
    let in_exp = r_in
        .as_power()
        .ok_or(Error::Config("r_in must be a power of p".into()))?;
    if in_exp >= out_exp {
        return Err(Error::Config("need r_in < r_out".into()));
    }
    if let Some(tail) = omega.tail_exp() {
        // Tail overlaps the annulus iff its bounding ball reaches above r_in.
        if omega.is_truncated() && (tail as i64) > in_exp {
            return Err(Error::TailAmbiguous);
        }
    }
    let full = RadialValue::power(p, n * out_exp)
        .sub(&RadialValue::power(p, n * in_exp))
        .expect("r_out > r_in");
    let mut covered = RadialValue::zero(p);
    for b in omega.balls() {
        let c_abs = abs_exp(&b.center);
        let rho = b.radius_exp as i64;
        let contribution = match c_abs {
            Some(t) if (t as i64) > rho => {
                // Ball sits entirely on the sphere |x| = p^t.
                if (t as i64) > in_exp && (t as i64) <= out_exp {
                    RadialValue::power(p, n * rho)
                } else {
                    RadialValue::zero(p)
                }
            }
            _ => {
                // Ball contains the origin; it is B(0, p^rho).
                let top = rho.min(out_exp);
                if top > in_exp {
                    RadialValue::power(p, n * top)
                        .sub(&RadialValue::power(p, n * in_exp))
                        .expect("top > in")
                } else {
                    RadialValue::zero(p)
                }
            }
        };
        covered = covered.add(&contribution)?;
    }
    full.sub(&covered)
        .map_err(|_| Error::Config("listed balls exceed the annulus".into()))
}

/// Result of the boundary search: representatives of center clusters whose
/// radii shrink to zero, plus the scale down to which the clusters persist.
#[derive(Debug, Clone)]
pub struct BoundaryReport {
    pub points: Vec<PadicPoint>,
    pub confidence_depth: i32,
}

/// Cluster representatives of accumulation points of the centers, following
/// the characterization of the boundary as the finite limit points of the
/// center sequence. `min_count` centers with radii below the scale are
/// required at every scale for a cluster to survive.
pub fn boundary_accumulation_points(
    omega: &OpenSetDecomposition,
    resolution: i32,
    min_count: usize,
) -> BoundaryReport {
    let mut best: Vec<PadicPoint> = Vec::new();
    let mut depth = 0i32;
    for s in 1..=resolution {
        let mut clusters: BTreeMap<String, (PadicPoint, usize)> = BTreeMap::new();
        for b in omega.balls() {
            if b.radius_exp < -s {
                let rep = b.center.reduce_mod(s);
                let key = rep.encode();
                let e = clusters.entry(key).or_insert_with(|| (rep, 0));
                e.1 += 1;
            }
        }
        let survivors: Vec<PadicPoint> = clusters
            .into_values()
            .filter(|(_, c)| *c >= min_count)
            .map(|(rep, _)| rep)
            .collect();
        if survivors.is_empty() {
            break;
        }
        best = survivors;
        depth = s;
    }
    BoundaryReport { points: best, confidence_depth: depth }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(p: u32, k: u64, e: i32) -> PadicPoint {
        PadicPoint::from_integer_scaled(p, k, e)
    }

    #[test]
    fn abs_value_examples() {
        // zero
        assert!(abs_value(&PadicPoint::zero(2, 1)).is_zero());
        // 1/2 has absolute value 2
        let half = pt(2, 1, -1);
        assert_eq!(abs_value(&half), RadialValue::power(2, 1));
        // (9, 1/3) in Q_3^2 has max-norm 3
        let x = PadicPoint::new(
            3,
            vec![
                PadicCoord { valuation: 2, digits: vec![1] },
                PadicCoord { valuation: -1, digits: vec![1] },
            ],
        )
        .unwrap();
        assert_eq!(abs_value(&x), RadialValue::power(3, 1));
    }

    #[test]
    fn ball_relation_examples() {
        let b0 = Ball::new(pt(2, 0, 0), 0);
        let b1 = Ball::new(pt(2, 1, 0), -1);
        assert_eq!(ball_relation(&b0, &b1).unwrap(), BallRelation::AContainsB);

        let a = Ball::new(pt(2, 0, 0), -1);
        let b = Ball::new(pt(2, 1, 0), -1);
        assert_eq!(ball_relation(&a, &b).unwrap(), BallRelation::Disjoint);

        let c = Ball::new(pt(3, 0, 0), 0);
        let d = Ball::new(pt(3, 0, 0), 0);
        assert_eq!(ball_relation(&c, &d).unwrap(), BallRelation::Equal);
    }

    #[test]
    fn ball_relation_rejects_mismatch() {
        let a = Ball::new(pt(2, 0, 0), 0);
        let b = Ball::new(pt(3, 0, 0), 0);
        assert!(ball_relation(&a, &b).is_err());
    }

    #[test]
    fn haar_measure_examples() {
        let b = Ball::new(pt(3, 0, 0), -2);
        let m = haar_measure(&b);
        assert_eq!(m, RadialValue::power(3, -2));

        // sphere {|y| = 2} at p = 2: measure 2 - 1 = 1
        let s = sphere_measure(2, 1, 1);
        assert_eq!(s, RadialValue::new(2, BigUint::from(1u32), 0));

        let unit2 = Ball::new(PadicPoint::zero(2, 2), 0);
        assert_eq!(haar_measure(&unit2), RadialValue::power(2, 0));
    }

    #[test]
    fn measure_additivity_children() {
        let cell = Cell::new(pt(3, 2, -1), 1);
        let kids = cell.children();
        assert_eq!(kids.len(), 3);
        let mut acc = RadialValue::zero(3);
        for k in &kids {
            acc = acc.add(&k.measure()).unwrap();
        }
        assert_eq!(acc, cell.measure());
    }

    #[test]
    fn radial_value_arithmetic() {
        let a = RadialValue::power(2, -3);
        let b = RadialValue::power(2, -1);
        let s = b.sub(&a).unwrap();
        // 1/2 - 1/8 = 3/8
        assert_eq!(s, RadialValue::new(2, BigUint::from(3u32), -3));
        assert_eq!(s.to_f64(), 0.375);
        assert!(a.cmp_exact(&b) == Ordering::Less);
    }

    #[test]
    fn annulus_complement_empty_domain() {
        let omega = OpenSetDecomposition::explicit(2, 1, vec![]).unwrap();
        let m = annulus_complement_measure(
            &omega,
            &RadialValue::power(2, -1),
            &RadialValue::power(2, -3),
        )
        .unwrap();
        // full annulus: 1/2 - 1/8 = 3/8
        assert_eq!(m, RadialValue::new(2, BigUint::from(3u32), -3));
    }

    #[test]
    fn single_ball_has_no_boundary() {
        let omega =
            OpenSetDecomposition::explicit(2, 1, vec![Ball::new(pt(2, 0, 0), 0)]).unwrap();
        let report = boundary_accumulation_points(&omega, 12, 3);
        assert!(report.points.is_empty());
    }

    #[test]
    fn point_encode_roundtrip() {
        let x = PadicPoint::new(
            5,
            vec![
                PadicCoord { valuation: -2, digits: vec![3, 0, 4] },
                PadicCoord::zero(),
            ],
        )
        .unwrap();
        let s = x.encode();
        let y = PadicPoint::decode(5, &s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn reduce_mod_drops_fine_digits() {
        let x = pt(2, 0b1011, -2); // digits 1,1,0,1 from valuation -2
        let r = x.reduce_mod(1);
        // keeps digit positions -2, -1, 0
        assert_eq!(r, pt(2, 0b011, -2));
    }

    #[test]
    fn precision_limit_is_enforced() {
        let digits = vec![1u32; DEFAULT_PRECISION_LIMIT as usize + 1];
        let r = PadicPoint::new(2, vec![PadicCoord { valuation: 0, digits }]);
        assert!(matches!(r, Err(Error::PrecisionExceeded(_))));
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<PadicPoint>();
        assert_send_sync::<RadialValue>();
        assert_send_sync::<Ball>();
        assert_send_sync::<Cell>();
        assert_send_sync::<OpenSetDecomposition>();
    }
}
