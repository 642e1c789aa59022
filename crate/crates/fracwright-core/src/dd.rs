//! Double-double arithmetic.
//!
//! A [`Dd`] value represents a real number as an unevaluated sum `hi + lo`
//! of two `f64`s with `|lo| <= ulp(hi)/2`, giving roughly 31 significant
//! decimal digits. The series for the Wright function alternates with
//! terms that can exceed the final sum by many orders of magnitude, so
//! plain `f64` accumulation loses all digits long before the certified
//! evaluation domain ends; the error-free transformations below keep the
//! cancellation budget at ~1e-32 per operation instead of ~1e-16.
//!
//! [`ScaledDd`] extends the dynamic range with an explicit power-of-two
//! exponent, so series coefficients like `1/Gamma(-172.3)` (magnitude
//! ~1e309) can be carried through a term product without overflow.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Splitter for Dekker's exact product: 2^27 + 1.
const SPLIT: f64 = 134_217_729.0;

/// Error-free sum: returns `(s, e)` with `s = fl(a+b)` and `a+b = s+e` exactly.
#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

/// Error-free sum assuming `|a| >= |b|`.
#[inline(always)]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via Dekker splitting: `a*b = p + e` exactly.
/// Exact provided no intermediate overflow (|a|,|b| < ~2^996).
#[inline(always)]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let ta = SPLIT * a;
    let a_hi = ta - (ta - a);
    let a_lo = a - a_hi;
    let tb = SPLIT * b;
    let b_hi = tb - (tb - b);
    let b_lo = b - b_hi;
    let e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo;
    (p, e)
}

/// Double-double number: `hi + lo` with non-overlapping mantissas.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const DD_ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
pub const DD_ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
pub const DD_PI: Dd = Dd {
    hi: 3.141592653589793,
    lo: 1.2246467991473532e-16,
};
pub const DD_LN2: Dd = Dd {
    hi: 0.6931471805599453,
    lo: 2.3190468138462996e-17,
};
/// ln(2*pi)/2, the constant term of Stirling's series.
pub const DD_HALF_LN_2PI: Dd = Dd {
    hi: 0.9189385332046728,
    lo: -3.8782941580672414e-17,
};

impl Dd {
    #[inline(always)]
    pub fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    /// Renormalized from an exact unevaluated sum.
    #[inline(always)]
    pub fn from_sum(a: f64, b: f64) -> Self {
        let (s, e) = two_sum(a, b);
        Dd { hi: s, lo: e }
    }

    /// Exact product of two doubles.
    #[inline(always)]
    pub fn from_prod(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    #[inline(always)]
    pub fn to_f64(self) -> f64 {
        self.hi
    }

    #[inline(always)]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline(always)]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    /// Exact scaling by 2^e (both components scale exactly while normal).
    #[inline(always)]
    pub fn ldexp(self, e: i32) -> Self {
        let f = pow2(e);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    #[inline(always)]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, mut e) = two_sum(self.hi, b);
        e += self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline(always)]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, mut e) = two_prod(self.hi, b);
        e += self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline(always)]
    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        // remainder = self - q1*b, accurate to dd
        let (d, mut de) = two_sum(self.hi, -p);
        de += self.lo - e;
        let q2 = (d + de) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub fn recip(self) -> Self {
        DD_ONE / self
    }

    /// exp(self) as a normalized mantissa and power-of-two exponent.
    /// Valid for |self| up to ~1e9 nats.
    pub fn exp_scaled(self) -> (Dd, i32) {
        if self.hi == 0.0 && self.lo == 0.0 {
            return (DD_ONE, 0);
        }
        let k = (self.hi / DD_LN2.hi).round();
        // r = self - k*ln2, |r| <= ln2/2 + eps
        let r = self - DD_LN2.mul_f64(k);
        // Taylor for exp(r); |r| <= 0.35 converges in ~24 terms
        let mut sum = DD_ONE + r;
        let mut term = r;
        let mut n = 2.0;
        loop {
            term = term * r;
            term = term.div_f64(n);
            sum = sum + term;
            if term.hi.abs() < 1e-35 {
                break;
            }
            n += 1.0;
            debug_assert!(n < 40.0);
        }
        (sum, k as i32)
    }

    /// exp(self); overflows/underflows to inf/0 outside the f64 range.
    pub fn exp(self) -> Self {
        if self.hi > 710.0 {
            return Dd::new(f64::INFINITY, 0.0);
        }
        if self.hi < -746.0 {
            return DD_ZERO;
        }
        let (m, e) = self.exp_scaled();
        m.ldexp(e)
    }

    /// Natural log, requires a positive finite value.
    /// One Newton correction on the f64 seed reaches full dd accuracy.
    pub fn ln(self) -> Self {
        debug_assert!(self.hi > 0.0);
        let l0 = self.hi.ln();
        // e = x*exp(-l0) - 1 is O(1e-16)
        let e = (self * Dd::from(-l0).exp()).add_f64(-1.0);
        let corr = e - e * e.mul_f64(0.5);
        Dd::from(l0) + corr
    }
}

impl From<f64> for Dd {
    #[inline(always)]
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline(always)]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline(always)]
    fn add(self, o: Dd) -> Dd {
        let (s1, e1) = two_sum(self.hi, o.hi);
        let (s2, e2) = two_sum(self.lo, o.lo);
        let (s1, mut e1) = quick_two_sum(s1, e1 + s2);
        e1 += e2;
        let (hi, lo) = quick_two_sum(s1, e1);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline(always)]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline(always)]
    fn mul(self, o: Dd) -> Dd {
        let (p, mut e) = two_prod(self.hi, o.hi);
        e += self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o.mul_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o.mul_f64(q2);
        let q3 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::from_sum(s, e + q3)
    }
}

/// 2^e as f64; splits the scaling for exponents outside the normal range.
#[inline(always)]
fn pow2(e: i32) -> f64 {
    if (-1022..=1023).contains(&e) {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e > 1023 {
        f64::INFINITY
    } else if e < -1074 {
        0.0
    } else {
        // subnormal range: exact only where the result is representable
        f64::from_bits(1u64 << (e + 1074))
    }
}

/// Binary exponent of a finite nonzero f64 (ilogb).
#[inline(always)]
fn ilogb(x: f64) -> i32 {
    let bits = x.abs().to_bits();
    let raw = (bits >> 52) as i32;
    if raw > 0 {
        raw - 1023
    } else {
        // subnormal
        let scaled = x * 9007199254740992.0; // 2^53
        ((scaled.abs().to_bits() >> 52) as i32) - 1023 - 53
    }
}

/// Double-double with an explicit power-of-two exponent: value = mant * 2^exp2.
/// `mant.hi == 0` encodes an exact zero. Keeps the mantissa in [1, 2).
#[derive(Clone, Copy, Debug)]
pub struct ScaledDd {
    pub mant: Dd,
    pub exp2: i32,
}

pub const SCALED_ZERO: ScaledDd = ScaledDd {
    mant: DD_ZERO,
    exp2: 0,
};

impl ScaledDd {
    pub fn from_dd(x: Dd) -> Self {
        if x.hi == 0.0 {
            return SCALED_ZERO;
        }
        let e = ilogb(x.hi);
        ScaledDd {
            mant: x.ldexp(-e),
            exp2: e,
        }
    }

    pub fn from_exp_of(log: Dd) -> Self {
        let (m, e) = log.exp_scaled();
        ScaledDd { mant: m, exp2: e }.normalized()
    }

    #[inline(always)]
    pub fn is_zero(self) -> bool {
        self.mant.hi == 0.0
    }

    #[inline(always)]
    pub fn normalized(self) -> Self {
        if self.mant.hi == 0.0 {
            return SCALED_ZERO;
        }
        let e = ilogb(self.mant.hi);
        ScaledDd {
            mant: self.mant.ldexp(-e),
            exp2: self.exp2 + e,
        }
    }

    #[inline(always)]
    pub fn mul(self, o: ScaledDd) -> Self {
        if self.is_zero() || o.is_zero() {
            return SCALED_ZERO;
        }
        ScaledDd {
            mant: self.mant * o.mant,
            exp2: self.exp2 + o.exp2,
        }
        .normalized()
    }

    #[inline(always)]
    pub fn mul_f64(self, b: f64) -> Self {
        if self.is_zero() || b == 0.0 {
            return SCALED_ZERO;
        }
        ScaledDd {
            mant: self.mant.mul_f64(b),
            exp2: self.exp2,
        }
        .normalized()
    }

    #[inline(always)]
    pub fn div_f64(self, b: f64) -> Self {
        if self.is_zero() {
            return SCALED_ZERO;
        }
        ScaledDd {
            mant: self.mant.div_f64(b),
            exp2: self.exp2,
        }
        .normalized()
    }

    /// Materialize into a plain dd; saturates to 0 / +-inf outside range.
    #[inline(always)]
    pub fn to_dd(self) -> Dd {
        if self.is_zero() || self.exp2 < -1100 {
            return DD_ZERO;
        }
        if self.exp2 > 1023 {
            return Dd::new(f64::copysign(f64::INFINITY, self.mant.hi), 0.0);
        }
        self.mant.ldexp(self.exp2)
    }

    /// log2 of the magnitude, for overflow screening.
    pub fn log2_abs(self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mant.hi.abs().log2() + self.exp2 as f64
    }
}

/// sin(pi*x) with exact argument reduction on the integer part.
/// Accurate in absolute terms near every integer, which is what the
/// reflection formula for 1/Gamma needs.
pub fn sin_pi(x: Dd) -> Dd {
    let n = x.hi.round();
    // r = x - n is exact: both are representable and close
    let r = x.add_f64(-n);
    let t = DD_PI * r;
    // Taylor: |t| <= pi/2
    let t2 = t * t;
    let mut term = t;
    let mut sum = t;
    let mut k = 1.0;
    loop {
        term = term * t2;
        term = term.div_f64(-(2.0 * k) * (2.0 * k + 1.0));
        sum = sum + term;
        if term.hi.abs() < 1e-36 {
            break;
        }
        k += 1.0;
        debug_assert!(k < 25.0);
    }
    if (n as i64) & 1 == 0 {
        sum
    } else {
        -sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_dd_close(got: Dd, want_hi: f64, want_lo: f64, tol: f64) {
        let want = Dd::new(want_hi, want_lo);
        let diff = (got - want).abs().to_f64();
        let scale = want.abs().to_f64().max(1e-300);
        assert!(
            diff <= tol * scale,
            "got {:?}, want {:?}, rel diff {:e}",
            got,
            want,
            diff / scale
        );
    }

    #[test]
    fn add_mul_exactness() {
        let a = Dd::from(1.0).div_f64(3.0);
        let b = a.mul_f64(3.0);
        assert!((b - DD_ONE).abs().to_f64() < 1e-30);

        // (1 + 1e-20) - 1 recovers the tiny part
        let x = Dd::from(1.0) + Dd::from(1e-20);
        let y = x - Dd::from(1.0);
        assert!((y.to_f64() - 1e-20).abs() < 1e-35);
    }

    #[test]
    fn division_roundtrip() {
        let a = Dd::new(7.1, 3.3e-17);
        let b = Dd::new(-2.9, 1.1e-17);
        let q = a / b;
        let r = q * b - a;
        assert!(r.abs().to_f64() < 1e-30);
    }

    #[test]
    fn exp_ln_roundtrip() {
        for &x in &[1e-3, 0.5, 1.0, 2.5, 10.0, 100.0, 650.0] {
            let v = Dd::from(x);
            let e = v.exp();
            let l = e.ln();
            assert_dd_close(l, x, 0.0, 1e-29);
        }
        // exp(1) = e to dd precision
        assert_dd_close(
            Dd::from(1.0).exp(),
            2.718281828459045,
            1.4456468917292502e-16,
            1e-30,
        );
    }

    #[test]
    fn exp_negative_and_scaled() {
        // exp(-50) against frozen reference
        let v = Dd::from(-50.0).exp();
        assert_dd_close(v, 1.9287498479639178e-22, -7.339198838671533e-39, 1e-29);

        let s = ScaledDd::from_exp_of(Dd::from(1000.0));
        assert!((s.log2_abs() - 1000.0 / std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn sin_pi_values() {
        // sin(pi*0.5) = 1, sin(pi*integer) = 0 exactly after reduction
        assert_dd_close(sin_pi(Dd::from(0.5)), 1.0, 0.0, 1e-30);
        assert_eq!(sin_pi(Dd::from(3.0)).to_f64(), 0.0);
        assert_eq!(sin_pi(Dd::from(-7.0)).to_f64(), 0.0);
        // sin(pi*(1/3)) = sqrt(3)/2
        let got = sin_pi(Dd::from(1.0).div_f64(3.0));
        assert_dd_close(got, 0.8660254037844386, 1.0945442037221308e-17, 1e-29);
        // sign on the odd branch: sin(pi*1.5) = -1
        assert_dd_close(sin_pi(Dd::from(1.5)), -1.0, 0.0, 1e-30);
    }

    #[test]
    fn scaled_arithmetic_extends_range() {
        // (2^600) * (2^600) would overflow f64 but not ScaledDd
        let a = ScaledDd::from_dd(DD_ONE).mul(ScaledDd {
            mant: DD_ONE,
            exp2: 600,
        });
        let b = a.mul(a);
        assert_eq!(b.exp2, 1200);
        assert!(b.to_dd().hi.is_infinite());
        let small = b.mul(ScaledDd {
            mant: DD_ONE,
            exp2: -1190,
        });
        assert_eq!(small.to_dd().to_f64(), 1024.0);
    }

    #[test]
    fn ldexp_and_pow2() {
        assert_eq!(pow2(3), 8.0);
        assert_eq!(pow2(-1), 0.5);
        assert_eq!(ilogb(1.5), 0);
        assert_eq!(ilogb(0.75), -1);
        assert_eq!(ilogb(1024.0), 10);
        let x = Dd::new(1.5, 1e-17);
        let y = x.ldexp(4);
        assert_eq!(y.hi, 24.0);
        assert_eq!(y.lo, 1.6e-16);
    }
}
