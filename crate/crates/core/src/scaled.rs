//! Mantissa + base-2 exponent arithmetic.
//!
//! Transfer-matrix products, solution traces, and kernel sums grow like
//! `exp(c n)` in localized or off-spectrum regimes, far past the `f64` range
//! for the trace lengths this crate handles. [`Scaled`] keeps a loosely
//! normalized mantissa and an `i64` exponent so norms, determinants and
//! Hilbert-Schmidt sums stay exact in scale while individual entries would
//! have overflowed long ago.

use crate::scalar::{cast, Real};

/// Half-width of the mantissa band; normalization pulls |mantissa| back into
/// `[2^-BAND, 2^BAND)` whenever it drifts out.
const BAND: i64 = 256;

/// A real number `mantissa * 2^exp2` with a wide-range exponent.
#[derive(Clone, Copy, Debug)]
pub struct Scaled<R: Real> {
    mantissa: R,
    exp2: i64,
}

impl<R: Real> Scaled<R> {
    pub fn zero() -> Self {
        Scaled { mantissa: R::zero(), exp2: 0 }
    }

    pub fn one() -> Self {
        Scaled { mantissa: R::one(), exp2: 0 }
    }

    /// Wrap a plain value.
    pub fn new(value: R) -> Self {
        Scaled { mantissa: value, exp2: 0 }.normalized()
    }

    /// Assemble from parts; normalizes.
    pub fn from_parts(mantissa: R, exp2: i64) -> Self {
        Scaled { mantissa, exp2 }.normalized()
    }

    pub fn mantissa(&self) -> R {
        self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == R::zero()
    }

    pub fn is_sign_positive(&self) -> bool {
        self.mantissa > R::zero()
    }

    fn normalized(mut self) -> Self {
        if self.mantissa == R::zero() {
            self.exp2 = 0;
            return self;
        }
        debug_assert!(self.mantissa.is_finite(), "scaled mantissa must be finite");
        let k = self.mantissa.abs().log2();
        let shift = k.floor().to_i64().unwrap_or(0);
        if shift.abs() >= BAND {
            self.mantissa = self.mantissa * cast::<R>(2.0).powi(-shift as i32);
            self.exp2 += shift;
        }
        self
    }

    /// Canonical form with |mantissa| in [1, 2).
    fn canonical(&self) -> (R, i64) {
        if self.is_zero() {
            return (R::zero(), i64::MIN);
        }
        let k = self.mantissa.abs().log2().floor().to_i64().unwrap_or(0);
        (self.mantissa * cast::<R>(2.0).powi(-k as i32), self.exp2 + k)
    }

    pub fn mul(&self, other: Self) -> Self {
        Scaled {
            mantissa: self.mantissa * other.mantissa,
            exp2: self.exp2 + other.exp2,
        }
        .normalized()
    }

    pub fn mul_real(&self, factor: R) -> Self {
        Scaled { mantissa: self.mantissa * factor, exp2: self.exp2 }.normalized()
    }

    pub fn add(&self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return *self;
        }
        // Align to the larger exponent; the smaller term vanishes once the
        // gap exceeds the f64 dynamic range plus the mantissa band.
        let (hi, lo) = if self.exp2 >= other.exp2 { (*self, other) } else { (other, *self) };
        let gap = hi.exp2 - lo.exp2;
        if gap > 2 * BAND + 1100 {
            return hi;
        }
        let scaled_lo = lo.mantissa * cast::<R>(2.0).powi(-gap as i32);
        Scaled { mantissa: hi.mantissa + scaled_lo, exp2: hi.exp2 }.normalized()
    }

    pub fn sub(&self, other: Self) -> Self {
        self.add(other.neg())
    }

    pub fn neg(&self) -> Self {
        Scaled { mantissa: -self.mantissa, exp2: self.exp2 }
    }

    pub fn abs(&self) -> Self {
        Scaled { mantissa: self.mantissa.abs(), exp2: self.exp2 }
    }

    /// Square root; requires a nonnegative value.
    pub fn sqrt(&self) -> Self {
        debug_assert!(self.mantissa >= R::zero());
        if self.is_zero() {
            return Self::zero();
        }
        let (m, e) = if self.exp2 % 2 == 0 {
            (self.mantissa, self.exp2)
        } else {
            (self.mantissa * cast::<R>(2.0), self.exp2 - 1)
        };
        Scaled { mantissa: m.sqrt(), exp2: e / 2 }.normalized()
    }

    pub fn recip(&self) -> Self {
        Scaled { mantissa: self.mantissa.recip(), exp2: -self.exp2 }.normalized()
    }

    pub fn square(&self) -> Self {
        self.mul(*self)
    }

    /// Natural log of the absolute value; the value must be nonzero.
    pub fn ln_abs(&self) -> R {
        debug_assert!(!self.is_zero());
        self.mantissa.abs().ln() + cast::<R>(self.exp2 as f64) * cast::<R>(std::f64::consts::LN_2)
    }

    /// Collapse to a plain scalar, saturating to 0 or +/- infinity outside
    /// the representable range.
    pub fn to_real(&self) -> R {
        if self.is_zero() {
            return R::zero();
        }
        if self.exp2.abs() > 2200 {
            return if self.exp2 > 0 {
                if self.mantissa > R::zero() { R::infinity() } else { R::neg_infinity() }
            } else {
                R::zero()
            };
        }
        self.mantissa * cast::<R>(2.0).powi(self.exp2 as i32)
    }

    /// Total order consistent with the represented values.
    pub fn cmp_value(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let sa = if self.is_zero() { 0 } else if self.mantissa > R::zero() { 1 } else { -1 };
        let sb = if other.is_zero() { 0 } else if other.mantissa > R::zero() { 1 } else { -1 };
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Equal;
        }
        let (ma, ea) = self.canonical();
        let (mb, eb) = other.canonical();
        let mag = match ea.cmp(&eb) {
            Equal => ma.abs().partial_cmp(&mb.abs()).unwrap_or(Equal),
            o => o,
        };
        if sa > 0 { mag } else { mag.reverse() }
    }

    pub fn max_value(&self, other: Self) -> Self {
        if self.cmp_value(&other) == std::cmp::Ordering::Less { other } else { *self }
    }
}
