//! Real scalar abstraction.
//!
//! The q-series, Al-Salam–Carlitz and Hamburger modules are written once
//! against [`Real`] and instantiated with `f64` for fast closed-form work and
//! with [`Mp`] for the Hankel pipeline, whose moments grow like `q^{-k²/4}`.
//!
//! Precision is carried by the values themselves. Binary operations on
//! [`Mp`] round to the larger of the two operand precisions, so constants
//! produced by [`Real::lift`] or [`FromPrimitive`] mix freely with working
//! values.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use dashu_float::ops::SquareRoot;
use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Ordered real field with the elementary functions the crate needs.
pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// Mantissa bits carried by this value.
    fn precision_bits(&self) -> usize;

    /// `v` rounded to the precision of `self`.
    fn lift(&self, v: f64) -> Self;

    /// Unit roundoff `2^(1-p)` at the precision of `self`.
    fn epsilon(&self) -> Self;

    /// π at the precision of `self`.
    fn pi(&self) -> Self;

    fn sqrt(&self) -> Self;

    /// Natural logarithm; the argument must be positive.
    fn ln(&self) -> Self;

    fn exp(&self) -> Self;

    /// `ln(1 + self)`; the argument must exceed −1.
    fn ln_1p(&self) -> Self;

    fn is_finite(&self) -> bool;

    /// Lossy conversion, saturating to ±∞.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Integer power by repeated squaring.
    fn powi(&self, n: i64) -> Self {
        let mut base = self.clone();
        let mut e = n.unsigned_abs();
        let mut acc = self.lift(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * &base;
            }
        }
        if n < 0 {
            self.lift(1.0) / acc
        } else {
            acc
        }
    }

    fn square(&self) -> Self {
        self.clone() * self
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn precision_bits(&self) -> usize {
        f64::MANTISSA_DIGITS as usize
    }

    fn lift(&self, v: f64) -> Self {
        v
    }

    fn epsilon(&self) -> Self {
        f64::EPSILON
    }

    fn pi(&self) -> Self {
        std::f64::consts::PI
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn ln_1p(&self) -> Self {
        f64::ln_1p(*self)
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn powi(&self, n: i64) -> Self {
        match i32::try_from(n) {
            Ok(n) => f64::powi(*self, n),
            Err(_) => f64::powf(*self, n as f64),
        }
    }
}

type Inner = FBig<HalfEven, 2>;

/// Binary multiprecision float with per-value precision.
///
/// Exact constants such as [`Zero::zero`] carry no precision of their own
/// and adopt the precision of whatever they are combined with.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Mp(Inner);

const F64_BITS: usize = f64::MANTISSA_DIGITS as usize;

impl Mp {
    /// `v` at `bits` of precision.
    pub fn with_precision(v: f64, bits: usize) -> Mp {
        let x = Inner::try_from(v).expect("finite f64");
        Mp(x.with_precision(bits.max(1)).value())
    }

    /// Parses a decimal literal (`-1.25`, `3e-40`, `17`) and rounds it once
    /// to `bits` of precision.
    pub fn parse(s: &str, bits: usize) -> Option<Mp> {
        let s = s.trim();
        let s = s.strip_prefix('+').unwrap_or(s);
        let s = s.replace('E', "e");
        let s = s.replace("e+", "e");
        let d: FBig<HalfEven, 10> = s.parse::<DBig>().ok()?.with_rounding();
        Some(Mp(d.with_base_and_precision::<2>(bits.max(1)).value()))
    }

    /// Same value rounded to `bits`.
    pub fn to_precision(&self, bits: usize) -> Mp {
        Mp(self.0.clone().with_precision(bits.max(1)).value())
    }

    fn working_bits(&self) -> usize {
        match self.0.precision() {
            0 => F64_BITS,
            p => p,
        }
    }

    fn anchored(&self) -> Inner {
        if self.0.precision() == 0 {
            self.0.clone().with_precision(F64_BITS).value()
        } else {
            self.0.clone()
        }
    }

    fn is_exact_zero(&self) -> bool {
        self.0 == Inner::ZERO
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp({self}; {} bits)", self.0.precision())
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = match f.precision() {
            Some(p) => p.max(1),
            None => ((self.working_bits() as f64) * std::f64::consts::LOG10_2).floor() as usize,
        };
        let d = self
            .0
            .clone()
            .with_base_and_precision::<10>(digits.max(1))
            .value();
        write!(f, "{d}")
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Mp {
            type Output = Mp;
            fn $method(self, rhs: Mp) -> Mp {
                Mp($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Mp> for Mp {
            type Output = Mp;
            fn $method(self, rhs: &'a Mp) -> Mp {
                Mp($tr::$method(self.0, &rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Mp> for &'a Mp {
            type Output = Mp;
            fn $method(self, rhs: &'b Mp) -> Mp {
                Mp($tr::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Mp {
    type Output = Mp;
    fn div(self, rhs: Mp) -> Mp {
        &self / &rhs
    }
}

impl<'a> Div<&'a Mp> for Mp {
    type Output = Mp;
    fn div(self, rhs: &'a Mp) -> Mp {
        &self / rhs
    }
}

impl<'b> Div<&'b Mp> for &Mp {
    type Output = Mp;
    fn div(self, rhs: &'b Mp) -> Mp {
        assert!(!rhs.is_exact_zero(), "Mp division by zero");
        if self.0.precision() == 0 && rhs.0.precision() == 0 {
            Mp(self.anchored() / &rhs.0)
        } else {
            Mp(&self.0 / &rhs.0)
        }
    }
}

impl Rem for Mp {
    type Output = Mp;
    fn rem(self, rhs: Mp) -> Mp {
        let quotient = (&self / &rhs).0.trunc();
        let q = Mp(quotient);
        self - q * rhs
    }
}

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(-self.0)
    }
}

impl Neg for &Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(-self.0.clone())
    }
}

impl Zero for Mp {
    fn zero() -> Mp {
        Mp(Inner::ZERO)
    }

    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
}

impl One for Mp {
    fn one() -> Mp {
        Mp(Inner::ONE)
    }
}

impl Num for Mp {
    type FromStrRadixErr = crate::Error;

    fn from_str_radix(s: &str, radix: u32) -> Result<Mp, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(crate::Error::Input(format!("radix {radix} not supported")));
        }
        let digits = s.chars().filter(char::is_ascii_digit).count();
        let bits = ((digits as f64) / std::f64::consts::LOG10_2).ceil() as usize + 16;
        Mp::parse(s, bits.max(F64_BITS))
            .ok_or_else(|| crate::Error::Input(format!("cannot parse {s:?} as a number")))
    }
}

impl Signed for Mp {
    fn abs(&self) -> Mp {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    fn abs_sub(&self, other: &Mp) -> Mp {
        if self <= other {
            Mp::zero()
        } else {
            self - other
        }
    }

    fn signum(&self) -> Mp {
        if self.is_exact_zero() {
            Mp::zero()
        } else if self.is_negative() {
            -Mp::one()
        } else {
            Mp::one()
        }
    }

    fn is_positive(&self) -> bool {
        self.0 > Inner::ZERO
    }

    fn is_negative(&self) -> bool {
        self.0 < Inner::ZERO
    }
}

impl FromPrimitive for Mp {
    fn from_i64(n: i64) -> Option<Mp> {
        Some(Mp(Inner::from(n)))
    }

    fn from_u64(n: u64) -> Option<Mp> {
        Some(Mp(Inner::from(n)))
    }

    fn from_f64(v: f64) -> Option<Mp> {
        Inner::try_from(v).ok().map(Mp)
    }
}

impl ToPrimitive for Mp {
    fn to_i64(&self) -> Option<i64> {
        i64::try_from(self.0.trunc().to_int().value()).ok()
    }

    fn to_u64(&self) -> Option<u64> {
        u64::try_from(self.0.trunc().to_int().value()).ok()
    }

    fn to_f64(&self) -> Option<f64> {
        Some(self.0.to_f64().value())
    }
}

impl Real for Mp {
    fn precision_bits(&self) -> usize {
        self.working_bits()
    }

    fn lift(&self, v: f64) -> Mp {
        Mp::with_precision(v, self.working_bits())
    }

    fn epsilon(&self) -> Mp {
        let one = Inner::ONE.with_precision(self.working_bits()).value();
        Mp(one >> (self.working_bits() as isize - 1))
    }

    fn pi(&self) -> Mp {
        Mp(Inner::pi(self.working_bits()))
    }

    fn sqrt(&self) -> Mp {
        if self.is_exact_zero() {
            return Mp::zero();
        }
        assert!(!self.is_negative(), "sqrt of a negative Mp");
        Mp(self.anchored().sqrt())
    }

    fn ln(&self) -> Mp {
        assert!(self.is_positive(), "ln of a non-positive Mp");
        Mp(self.anchored().ln())
    }

    fn exp(&self) -> Mp {
        Mp(self.anchored().exp())
    }

    fn ln_1p(&self) -> Mp {
        // dashu does not terminate for arguments at or below -1.
        assert!(self.0 > Inner::NEG_ONE, "ln_1p argument must exceed -1");
        Mp(self.anchored().ln_1p())
    }

    fn is_finite(&self) -> bool {
        !self.0.repr().is_infinite()
    }
}
