//! Arithmetic over `Z_d` and the d-th roots of unity.
//!
//! Everything symbolic in the crate is expressed with [`Dit`] and
//! [`PhasePower`], so label and phase identities are checked exactly. Only
//! [`zeta`] and [`Coefficient::to_complex`] cross over into floating point.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported level count.
pub const MAX_DIM: u32 = 16;

/// Level count `d` of every qudit in a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if (2..=MAX_DIM).contains(&d) {
            Ok(Self(d))
        } else {
            Err(Error::Dimension(d))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// Reduces any integer into `[0, d)`.
    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.0 as i64) as u32
    }

    pub fn dit(self, v: i64) -> Dit {
        Dit { value: self.reduce(v), dim: self }
    }

    pub fn phase(self, t: i64) -> PhasePower {
        PhasePower { exp: self.reduce(t), dim: self }
    }

    /// All `d` elements of `Z_d` in order.
    pub fn dits(self) -> impl Iterator<Item = Dit> {
        (0..self.0).map(move |value| Dit { value, dim: self })
    }

    /// `d^n`, or `None` on overflow.
    pub fn checked_pow(self, n: usize) -> Option<u128> {
        let mut acc: u128 = 1;
        for _ in 0..n {
            acc = acc.checked_mul(self.0 as u128)?;
        }
        Some(acc)
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;

    fn try_from(d: u32) -> Result<Self> {
        Self::new(d)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of `Z_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dit {
    value: u32,
    dim: Dimension,
}

impl Dit {
    pub fn new(dim: Dimension, value: u32) -> Result<Self> {
        if value < dim.get() {
            Ok(Self { value, dim })
        } else {
            Err(Error::DigitOutOfRange { digit: value, dim: dim.get() })
        }
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn dim(self) -> Dimension {
        self.dim
    }

    fn same_dim(self, other: Dit) {
        assert_eq!(self.dim, other.dim, "mixed-dimension dit arithmetic");
    }
}

impl Add for Dit {
    type Output = Dit;

    fn add(self, rhs: Dit) -> Dit {
        self.same_dim(rhs);
        self.dim.dit(self.value as i64 + rhs.value as i64)
    }
}

impl Sub for Dit {
    type Output = Dit;

    fn sub(self, rhs: Dit) -> Dit {
        self.same_dim(rhs);
        self.dim.dit(self.value as i64 - rhs.value as i64)
    }
}

impl Neg for Dit {
    type Output = Dit;

    fn neg(self) -> Dit {
        self.dim.dit(-(self.value as i64))
    }
}

impl Mul for Dit {
    type Output = Dit;

    fn mul(self, rhs: Dit) -> Dit {
        self.same_dim(rhs);
        self.dim.dit(self.value as i64 * rhs.value as i64)
    }
}

impl fmt::Display for Dit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `ζ^t` with `ζ = e^{2πi/d}`, stored as the exponent `t mod d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhasePower {
    exp: u32,
    dim: Dimension,
}

impl PhasePower {
    pub fn one(dim: Dimension) -> Self {
        Self { exp: 0, dim }
    }

    #[inline]
    pub fn exponent(self) -> u32 {
        self.exp
    }

    pub fn dim(self) -> Dimension {
        self.dim
    }

    pub fn to_complex(self) -> Complex64 {
        zeta(self.dim, self.exp as i64)
    }

    pub fn inverse(self) -> Self {
        self.dim.phase(-(self.exp as i64))
    }
}

impl Mul for PhasePower {
    type Output = PhasePower;

    fn mul(self, rhs: PhasePower) -> PhasePower {
        assert_eq!(self.dim, rhs.dim, "mixed-dimension phase arithmetic");
        self.dim.phase(self.exp as i64 + rhs.exp as i64)
    }
}

/// A coefficient of the form `ζ^t / (√d)^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coefficient {
    pub phase: PhasePower,
    /// Power `s` of `1/√d`.
    pub inv_sqrt_d: u32,
}

impl Coefficient {
    pub fn to_complex(self) -> Complex64 {
        let d = self.phase.dim().get() as f64;
        self.phase.to_complex() * d.sqrt().powi(-(self.inv_sqrt_d as i32))
    }
}

/// `exp(2πi·t/d)`.
pub fn zeta(dim: Dimension, t: i64) -> Complex64 {
    // Reducing first keeps the angle in [0, 2π) so large |t| loses no precision.
    let t = dim.reduce(t);
    Complex64::from_polar(1.0, TAU * t as f64 / dim.get() as f64)
}

/// Numerically evaluates `(1/d) Σ_j ζ^{j·m}`, which is 1 when `d | m` and 0 otherwise.
pub fn delta_sum_check(dim: Dimension, m: i64) -> Complex64 {
    let d = dim.get() as i64;
    let sum: Complex64 = (0..d).map(|j| zeta(dim, j * m)).sum();
    sum / d as f64
}

/// Big-endian radix-`d` packing: `digits[0]` is the most significant digit.
pub fn pack_index(dim: Dimension, digits: &[u32]) -> Result<usize> {
    let d = dim.as_usize();
    digits.iter().try_fold(0usize, |acc, &digit| {
        if digit >= dim.get() {
            Err(Error::DigitOutOfRange { digit, dim: dim.get() })
        } else {
            Ok(acc * d + digit as usize)
        }
    })
}

/// Inverse of [`pack_index`] for an `n`-digit register.
pub fn unpack_index(dim: Dimension, n: usize, mut index: usize) -> Vec<u32> {
    let d = dim.as_usize();
    let mut digits = vec![0u32; n];
    for slot in digits.iter_mut().rev() {
        *slot = (index % d) as u32;
        index /= d;
    }
    digits
}
