//! Exact univariate polynomials over the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    /// Coefficients in increasing degree, without trailing zeros.
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    /// Lagrange interpolation through `points` (distinct abscissas), in
    /// Newton form, expanded to monomials.
    pub fn interpolate(points: &[(i64, BigRational)]) -> Self {
        let n = points.len();
        let xs: Vec<BigRational> = points.iter().map(|(x, _)| BigRational::from_integer((*x).into())).collect();
        let mut dd: Vec<BigRational> = points.iter().map(|(_, y)| y.clone()).collect();
        for level in 1..n {
            for i in (level..n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
            }
        }
        // Horner on the Newton basis.
        let mut acc = RationalPoly::zero();
        for i in (0..n).rev() {
            acc = acc.mul_linear(&xs[i]);
            acc = acc.add_constant(&dd[i]);
        }
        acc
    }

    /// `self · (X − root)`.
    fn mul_linear(&self, root: &BigRational) -> Self {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= c * root;
        }
        RationalPoly::new(out)
    }

    fn add_constant(&self, c: &BigRational) -> Self {
        let mut out = self.coeffs.clone();
        if out.is_empty() {
            out.push(BigRational::zero());
        }
        out[0] += c;
        RationalPoly::new(out)
    }

    /// Degree, with the zero polynomial having degree `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coefficient(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn eval(&self, x: i64) -> BigRational {
        let x = BigRational::from_integer(x.into());
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * &x + c)
    }

    pub fn is_integer_valued_at(&self, x: i64) -> bool {
        self.eval(x).denom().is_one()
    }
}

pub fn rational(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·X")?,
                _ => write!(f, "{c}·X^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_quadratic() {
        let pts: Vec<_> = (0..5).map(|x: i64| (x, rational(2 + x * x))).collect();
        let p = RationalPoly::interpolate(&pts);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.coefficient(0), rational(2));
        assert_eq!(p.coefficient(1), rational(0));
        assert_eq!(p.eval(10), rational(102));
        assert_eq!(p.to_string(), "1·X^2 + 2");
    }

    #[test]
    fn zero_poly() {
        let p = RationalPoly::interpolate(&[(1, rational(0)), (2, rational(0))]);
        assert_eq!(p.degree(), None);
        assert_eq!(p.to_string(), "0");
    }
}
