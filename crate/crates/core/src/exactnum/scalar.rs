use std::fmt::{Debug, Display};

use super::Rational;

/// Number type the LP and bound code is generic over: exact rationals or
/// doubles with a fixed tolerance.
pub trait Scalar: Clone + Debug + Display + PartialEq + Send + Sync + 'static {
    /// Mode name used in reports.
    const MODE: &'static str;
    /// Tolerance for certificate checks (zero for exact arithmetic).
    const VERIFY_TOL: f64;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Exact rational value (`None` for non-finite floats).
    fn to_rational(&self) -> Option<Rational>;
    fn to_f64(&self) -> f64;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;

    /// Zero test used by pivoting (tolerant in float mode).
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;

    /// `self <= o` up to `tol` (exact when `tol` is zero).
    fn le_tol(&self, o: &Self, tol: f64) -> bool;
    fn eq_tol(&self, o: &Self, tol: f64) -> bool {
        self.le_tol(o, tol) && o.le_tol(self, tol)
    }

    /// Report string: `p/q` for rationals, decimal for floats.
    fn to_report_string(&self) -> String;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(n))
    }

    fn sum<'a, I: IntoIterator<Item = &'a Self>>(it: I) -> Self
    where
        Self: 'a,
    {
        it.into_iter().fold(Self::zero(), |acc, x| acc.add(x))
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b.le_tol(&a, 0.0) {
            b
        } else {
            a
        }
    }
}

impl Scalar for Rational {
    const MODE: &'static str = "exact";
    const VERIFY_TOL: f64 = 0.0;

    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Rational::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Rational::is_negative(self)
    }
    fn le_tol(&self, o: &Self, tol: f64) -> bool {
        if tol == 0.0 {
            self <= o
        } else {
            Rational::to_f64(&(self - o)) <= tol
        }
    }
    fn to_report_string(&self) -> String {
        self.to_fraction_string()
    }
}

/// Pivot tolerance for the float simplex.
pub const FLOAT_EPS: f64 = 1e-9;

impl Scalar for f64 {
    const MODE: &'static str = "float";
    const VERIFY_TOL: f64 = 1e-7;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn to_rational(&self) -> Option<Rational> {
        Rational::from_f64(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.abs() <= FLOAT_EPS
    }
    fn is_positive(&self) -> bool {
        *self > FLOAT_EPS
    }
    fn is_negative(&self) -> bool {
        *self < -FLOAT_EPS
    }
    fn le_tol(&self, o: &Self, tol: f64) -> bool {
        self - o <= tol * (1.0 + o.abs().max(self.abs()))
    }
    fn to_report_string(&self) -> String {
        format!("{self}")
    }
}
