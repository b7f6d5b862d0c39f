//! Coefficient rings for Grassmann elements.
//!
//! Three rings are provided: double-precision complex numbers, exact
//! complex rationals, and truncated Laurent series in a small parameter.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A commutative ring with complex conjugation, used as the coefficient
/// field of a Grassmann algebra.
pub trait Coefficient:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    fn from_i64(n: i64) -> Self;
    /// Exact conversion of a double; rational rings take the binary value.
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Multiplicative inverse, `None` when the value is not invertible.
    fn recip(&self) -> Option<Self>;
    /// Size used for pruning and deviation reports.
    fn magnitude(&self) -> f64;

    fn i() -> Self {
        Self::from_c64(Complex64::new(0.0, 1.0))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) * Self::from_i64(den).recip().expect("nonzero denominator")
    }
}

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn recip(&self) -> Option<Self> {
        if Coefficient::is_zero(self) {
            None
        } else {
            Some(self.inv())
        }
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Exact complex rational `re + i im`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }
}

fn ratio_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite double")
}

fn ratio_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl fmt::Debug for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.re, self.im)
    }
}

impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for ExactComplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for ExactComplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for ExactComplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for ExactComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Coefficient for ExactComplex {
    fn zero() -> Self {
        Self { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn one() -> Self {
        Self { re: BigRational::one(), im: BigRational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }
    fn from_i64(n: i64) -> Self {
        Self::from_ints(n, 0)
    }
    fn from_c64(z: Complex64) -> Self {
        Self { re: ratio_from_f64(z.re), im: ratio_from_f64(z.im) }
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
    fn recip(&self) -> Option<Self> {
        let d = &self.re * &self.re + &self.im * &self.im;
        if d.is_zero() {
            return None;
        }
        Some(Self { re: &self.re / &d, im: -(&self.im / &d) })
    }
    fn magnitude(&self) -> f64 {
        let re = ratio_to_f64(&self.re.abs());
        let im = ratio_to_f64(&self.im.abs());
        re.hypot(im)
    }
}

/// Lowest power of the expansion parameter kept by [`Laurent`].
pub const LAURENT_MIN: i32 = -4;
/// Highest power kept by [`Laurent`].
pub const LAURENT_MAX: i32 = 4;
const LAURENT_LEN: usize = (LAURENT_MAX - LAURENT_MIN + 1) as usize;

/// Laurent series `sum_k c_k d^k` in a small parameter `d`, truncated to
/// `LAURENT_MIN <= k <= LAURENT_MAX`.
#[derive(Clone, Copy, PartialEq)]
pub struct Laurent {
    c: [Complex64; LAURENT_LEN],
}

impl Laurent {
    pub fn constant(z: Complex64) -> Self {
        let mut s = Self::zero_series();
        s.c[Self::slot(0)] = z;
        s
    }

    /// The expansion parameter itself.
    pub fn delta() -> Self {
        let mut s = Self::zero_series();
        s.c[Self::slot(1)] = Complex64::new(1.0, 0.0);
        s
    }

    /// `a + b d`.
    pub fn linear(a: f64, b: f64) -> Self {
        let mut s = Self::constant(Complex64::new(a, 0.0));
        s.c[Self::slot(1)] = Complex64::new(b, 0.0);
        s
    }

    fn zero_series() -> Self {
        Self { c: [Complex64::new(0.0, 0.0); LAURENT_LEN] }
    }

    fn slot(k: i32) -> usize {
        (k - LAURENT_MIN) as usize
    }

    pub fn coeff(&self, k: i32) -> Complex64 {
        if (LAURENT_MIN..=LAURENT_MAX).contains(&k) {
            self.c[Self::slot(k)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set_coeff(&mut self, k: i32, v: Complex64) {
        self.c[Self::slot(k)] = v;
    }

    /// Lowest power with a nonzero coefficient.
    pub fn order(&self) -> Option<i32> {
        (LAURENT_MIN..=LAURENT_MAX).find(|&k| self.coeff(k) != Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut s = *self;
        for c in s.c.iter_mut() {
            *c *= z;
        }
        s
    }

    /// Multiply by `d^k`.
    pub fn shift(&self, k: i32) -> Self {
        let mut s = Self::zero_series();
        for j in LAURENT_MIN..=LAURENT_MAX {
            let t = j + k;
            if (LAURENT_MIN..=LAURENT_MAX).contains(&t) {
                s.c[Self::slot(t)] = self.coeff(j);
            }
        }
        s
    }

    /// `exp` of a series with no negative powers.
    pub fn exp(&self) -> Self {
        debug_assert!((LAURENT_MIN..0).all(|k| self.coeff(k) == Complex64::new(0.0, 0.0)));
        let c0 = self.coeff(0);
        let mut x = *self;
        x.set_coeff(0, Complex64::new(0.0, 0.0));
        let mut term = Self::constant(Complex64::new(1.0, 0.0));
        let mut sum = term;
        for n in 1..=LAURENT_MAX {
            term = (term * x).scale(Complex64::new(1.0 / n as f64, 0.0));
            sum = sum + term;
        }
        sum.scale(c0.exp())
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "[")?;
        for k in LAURENT_MIN..=LAURENT_MAX {
            let c = self.coeff(k);
            if c != Complex64::new(0.0, 0.0) {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "{c}*d^{k}")?;
                first = false;
            }
        }
        write!(f, "]")
    }
}

impl Add for Laurent {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Laurent {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for Laurent {
    type Output = Self;
    fn neg(mut self) -> Self {
        for a in self.c.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Laurent {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut s = Self::zero_series();
        for i in LAURENT_MIN..=LAURENT_MAX {
            let a = self.coeff(i);
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in LAURENT_MIN..=LAURENT_MAX {
                let t = i + j;
                if (LAURENT_MIN..=LAURENT_MAX).contains(&t) {
                    s.c[Self::slot(t)] += a * o.coeff(j);
                }
            }
        }
        s
    }
}

impl Coefficient for Laurent {
    fn zero() -> Self {
        Self::zero_series()
    }
    fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }
    fn is_zero(&self) -> bool {
        self.order().is_none()
    }
    fn conj(&self) -> Self {
        let mut s = *self;
        for c in s.c.iter_mut() {
            *c = c.conj();
        }
        s
    }
    fn from_i64(n: i64) -> Self {
        Self::constant(Complex64::new(n as f64, 0.0))
    }
    fn from_c64(z: Complex64) -> Self {
        Self::constant(z)
    }
    fn to_c64(&self) -> Complex64 {
        self.coeff(0)
    }
    fn recip(&self) -> Option<Self> {
        let m = self.order()?;
        let lead = self.coeff(m);
        // x = lead d^m (1 + u), 1/x = d^-m / lead * sum (-u)^n
        let mut u = self.shift(-m).scale(lead.inv());
        u.set_coeff(0, Complex64::new(0.0, 0.0));
        let mut term = Self::one();
        let mut sum = term;
        for _ in 1..=(LAURENT_MAX - LAURENT_MIN) {
            term = -(term * u);
            sum = sum + term;
        }
        Some(sum.scale(lead.inv()).shift(-m))
    }
    fn magnitude(&self) -> f64 {
        self.c.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const ZETA: [f64; 6] = [
    0.0,
    0.0,
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_369_9,
];

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `Gamma(n + d)` as a Laurent series in `d`, for integer `n`.
pub fn gamma_shifted(n: i64) -> Laurent {
    if n >= 1 {
        // ln Gamma(n+d) = ln Gamma(n) + sum_m psi_{m-1}(n) d^m / m!
        let mut log = Laurent::zero_series();
        let psi0 = -EULER_GAMMA + (1..n).map(|k| 1.0 / k as f64).sum::<f64>();
        log.set_coeff(1, Complex64::new(psi0, 0.0));
        for m in 2..=LAURENT_MAX {
            let order = (m - 1) as u32;
            let tail: f64 = (1..n).map(|k| (k as f64).powi(-(m))).sum();
            let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
            let psi = sign * factorial(order) * (ZETA[m as usize] - tail);
            log.set_coeff(m, Complex64::new(psi / factorial(m as u32), 0.0));
        }
        log.exp().scale(Complex64::new(factorial((n - 1) as u32), 0.0))
    } else {
        // Gamma(n+d) = Gamma(1+d) / prod_{j=n}^{0} (j+d)
        let mut den = Laurent::one();
        for j in n..=0 {
            den = den * Laurent::linear(j as f64, 1.0);
        }
        gamma_shifted(1) * den.recip().expect("nonzero series")
    }
}

/// `Gamma(n + c d)` for integer `n` and `c` in {-1, 0, 1}.
pub fn gamma_laurent(n: i64, c: i32) -> Laurent {
    match c {
        0 => {
            assert!(n >= 1, "Gamma pole at nonpositive integer");
            Laurent::constant(Complex64::new(factorial((n - 1) as u32), 0.0))
        }
        1 => gamma_shifted(n),
        -1 => gamma_shifted(n).conj_delta(),
        _ => panic!("unsupported shift multiplier {c}"),
    }
}

impl Laurent {
    /// Substitute `d -> -d`.
    pub fn conj_delta(&self) -> Self {
        let mut s = *self;
        for k in LAURENT_MIN..=LAURENT_MAX {
            if k % 2 != 0 {
                s.set_coeff(k, -self.coeff(k));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn gamma_series_matches_finite_difference() {
        // Gamma(3+d) at d=1e-3 against the truncated series
        let g = gamma_shifted(3);
        let d: f64 = 1e-3;
        let val: f64 = (LAURENT_MIN..=LAURENT_MAX).map(|k| g.coeff(k).re * d.powi(k)).sum();
        // Gamma(3.001) from the reflection-free Stirling-free product Gamma(x+1)=x Gamma(x)
        let expect = 2.001 * 1.001 * gamma_shifted(1).coeff(0).re
            * (1.0 - EULER_GAMMA * d + (EULER_GAMMA.powi(2) / 2.0 + ZETA[2] / 2.0) * d * d);
        assert!((val - expect).abs() < 1e-8);
    }

    #[test]
    fn gamma_pole_residues() {
        // Res Gamma at -m is (-1)^m / m!
        for m in 0..4i64 {
            let g = gamma_shifted(-m);
            let expect = if m % 2 == 0 { 1.0 } else { -1.0 } / factorial(m as u32);
            assert!(close(g.coeff(-1), expect), "m={m} {:?}", g);
        }
    }

    #[test]
    fn laurent_recip_roundtrip() {
        let x = Laurent::linear(0.0, 2.0) + Laurent::delta() * Laurent::delta();
        let y = x.recip().unwrap();
        let p = x * y;
        assert!(close(p.coeff(0), 1.0));
        for k in [-3, -2, -1, 1, 2] {
            assert!(p.coeff(k).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_recip() {
        let z = ExactComplex::from_ints(3, 4);
        let w = z.recip().unwrap();
        assert_eq!(z * w, ExactComplex::one());
    }
}
