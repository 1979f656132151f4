//! Forward-mode automatic differentiation.
//!
//! Constraint functions and the drift field are written once, generic over
//! [`Scalar`], and evaluated with `f64` for values, [`Dual<f64>`] for first
//! derivatives and `Dual<Dual<f64>>` when a derivative of a Lie derivative is
//! needed (second-order lifting).

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest magnitude allowed for d/dx acos(x). The true derivative is
/// unbounded at x = ±1.
pub const ACOS_SLOPE_CAP: f64 = 1e6;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Primal (f64) part.
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn acos(self) -> Self;

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }

    fn powi4(self) -> Self {
        let sq = self * self;
        sq * sq
    }

    /// max(0, x); the derivative is taken as zero on the inactive side.
    fn relu(self) -> Self {
        if self.value() > 0.0 {
            self
        } else {
            Self::cst(0.0)
        }
    }

    /// Clamp into [-1, 1]; saturated values carry zero derivative.
    fn clamp_unit(self) -> Self {
        let v = self.value();
        if v > 1.0 {
            Self::cst(1.0)
        } else if v < -1.0 {
            Self::cst(-1.0)
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn acos(self) -> Self {
        f64::acos(self)
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// Dual number `re + eps·ε` with ε² = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Self {
            re,
            eps: T::cst(0.0),
        }
    }

    pub fn variable(re: T) -> Self {
        Self {
            re,
            eps: T::cst(1.0),
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::cst(1.0) / o.re;
        let re = self.re * inv;
        Self::new(re, (self.eps - re * o.eps) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }

    fn value(&self) -> f64 {
        self.re.value()
    }

    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Self::new(r, self.eps / (r.scale(2.0)))
    }

    fn sin(self) -> Self {
        Self::new(self.re.sin(), self.eps * self.re.cos())
    }

    fn cos(self) -> Self {
        Self::new(self.re.cos(), -(self.eps * self.re.sin()))
    }

    fn acos(self) -> Self {
        let one_minus = T::cst(1.0) - self.re * self.re;
        let slope = if one_minus.value() <= 1.0 / (ACOS_SLOPE_CAP * ACOS_SLOPE_CAP) {
            T::cst(-ACOS_SLOPE_CAP)
        } else {
            -(T::cst(1.0) / one_minus.sqrt())
        };
        Self::new(self.re.acos(), self.eps * slope)
    }

    fn scale(self, k: f64) -> Self {
        Self::new(self.re.scale(k), self.eps.scale(k))
    }
}

/// Directional derivative of `fun` at `x` along `dir`, evaluated in one pass.
pub fn directional<T, const N: usize, F>(fun: F, x: &[T; N], dir: &[T; N]) -> (T, T)
where
    T: Scalar,
    F: Fn(&[Dual<T>; N]) -> Dual<T>,
{
    let xd: [Dual<T>; N] = std::array::from_fn(|k| Dual::new(x[k], dir[k]));
    let out = fun(&xd);
    (out.re, out.eps)
}

/// Full gradient by `N` forward passes.
pub fn gradient<T, const N: usize, F>(fun: F, x: &[T; N]) -> [T; N]
where
    T: Scalar,
    F: Fn(&[Dual<T>; N]) -> Dual<T>,
{
    std::array::from_fn(|j| {
        let xd: [Dual<T>; N] = std::array::from_fn(|k| {
            if k == j {
                Dual::variable(x[k])
            } else {
                Dual::constant(x[k])
            }
        });
        fun(&xd).eps
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::variable(3.0_f64);
        let y = x * x / (x + Dual::cst(1.0));
        // d/dx x²/(x+1) = (x² + 2x)/(x+1)²
        assert_relative_eq!(y.eps, 15.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn trig_derivatives() {
        let x = Dual::variable(0.3_f64);
        assert_relative_eq!(x.sin().eps, 0.3_f64.cos());
        assert_relative_eq!(x.cos().eps, -0.3_f64.sin());
        assert_relative_eq!(x.acos().eps, -1.0 / (1.0 - 0.09_f64).sqrt());
        assert_relative_eq!(x.sqrt().eps, 0.5 / 0.3_f64.sqrt());
    }

    #[test]
    fn acos_slope_is_capped_at_the_poles() {
        let x = Dual::variable(1.0_f64);
        let y = x.acos();
        assert_eq!(y.re, 0.0);
        assert_eq!(y.eps, -ACOS_SLOPE_CAP);
        let z = Dual::variable(-1.0_f64).acos();
        assert!(z.eps.is_finite());
    }

    #[test]
    fn nested_duals_give_second_derivatives() {
        // f(x) = x^4 => f'' = 12 x²
        let x = 1.5_f64;
        let xd = Dual::new(Dual::variable(x), Dual::cst(1.0));
        let y = xd.powi4();
        assert_relative_eq!(y.eps.eps, 12.0 * x * x, epsilon = 1e-12);
    }

    #[test]
    fn relu_and_clamp_kill_derivative_on_inactive_side() {
        assert_eq!(Dual::variable(-0.5_f64).relu().eps, 0.0);
        assert_eq!(Dual::variable(0.5_f64).relu().eps, 1.0);
        assert_eq!(Dual::variable(1.5_f64).clamp_unit(), Dual::cst(1.0));
    }

    #[test]
    fn directional_matches_gradient_dot() {
        let f = |x: &[Dual<f64>; 3]| x[0] * x[1] + x[2].sin();
        let x = [0.2, -0.7, 1.1];
        let dir = [0.3, 0.5, -2.0];
        let g = gradient(f, &x);
        let (_, d) = directional(f, &x, &dir);
        let dot: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        assert_relative_eq!(d, dot, epsilon = 1e-14);
    }
}
