//! First-order jets: a value together with its partial derivatives along
//! every chart coordinate.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value and exact first partials of a scalar function at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub partials: Vec<f64>,
}

impl Jet1 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet1 {
            value,
            partials: vec![0.0; dim],
        }
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut partials = vec![0.0; dim];
        partials[index] = 1.0;
        Jet1 { value, partials }
    }

    pub fn dim(&self) -> usize {
        self.partials.len()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.partials.iter().all(|p| p.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet1 {
            value: self.value * s,
            partials: self.partials.iter().map(|p| p * s).collect(),
        }
    }

    pub fn recip(&self) -> Self {
        let inv = 1.0 / self.value;
        let f = -inv * inv;
        Jet1 {
            value: inv,
            partials: self.partials.iter().map(|p| p * f).collect(),
        }
    }

    fn zip(&self, other: &Jet1, value: f64, f: impl Fn(f64, f64) -> f64) -> Jet1 {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        Jet1 {
            value,
            partials: self
                .partials
                .iter()
                .zip(&other.partials)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for &Jet1 {
    type Output = Jet1;
    fn add(self, rhs: &Jet1) -> Jet1 {
        self.zip(rhs, self.value + rhs.value, |a, b| a + b)
    }
}

impl Sub for &Jet1 {
    type Output = Jet1;
    fn sub(self, rhs: &Jet1) -> Jet1 {
        self.zip(rhs, self.value - rhs.value, |a, b| a - b)
    }
}

impl Mul for &Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: &Jet1) -> Jet1 {
        let (u, v) = (self.value, rhs.value);
        self.zip(rhs, u * v, |a, b| a * v + u * b)
    }
}

impl Div for &Jet1 {
    type Output = Jet1;
    fn div(self, rhs: &Jet1) -> Jet1 {
        self * &rhs.recip()
    }
}

impl Neg for &Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet1 {
            type Output = Jet1;
            fn $m(self, rhs: Jet1) -> Jet1 {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_by_hand() {
        // f = x*y at (3, 4): value 12, partials (4, 3)
        let x = Jet1::variable(3.0, 0, 2);
        let y = Jet1::variable(4.0, 1, 2);
        let f = &x * &y;
        assert_eq!(f.value, 12.0);
        assert_eq!(f.partials, vec![4.0, 3.0]);
    }

    #[test]
    fn quotient_rule() {
        // f = x / y at (3, 4): partials (1/4, -3/16)
        let x = Jet1::variable(3.0, 0, 2);
        let y = Jet1::variable(4.0, 1, 2);
        let f = &x / &y;
        assert!((f.value - 0.75).abs() < 1e-15);
        assert!((f.partials[0] - 0.25).abs() < 1e-15);
        assert!((f.partials[1] + 3.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn constant_has_zero_partials() {
        let c = Jet1::constant(2.5, 3);
        assert_eq!(c.partials, vec![0.0; 3]);
        assert!(c.is_finite());
    }
}
