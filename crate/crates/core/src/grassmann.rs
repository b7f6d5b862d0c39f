//! Grassmann algebra over a finite pool of generator pairs.
//!
//! Generator `2p` is `z(p)` (written ζ_p) and generator `2p+1` is its star
//! partner `zs(p)`. A monomial is stored as a bitmask; the generators of a
//! monomial are understood in ascending index order.
//!
//! ```
//! use supersym_core::grassmann::{Gen, GrassmannElement};
//! let z = GrassmannElement::<num_complex::Complex64>::generator(1, Gen::zeta(0)).unwrap();
//! assert!(z.gproduct(&z).unwrap().is_zero());
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Coefficient, ExactComplex};

/// Largest supported number of generator pairs.
pub const MAX_PAIRS: u32 = 32;

/// Index of a single anticommuting generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gen(pub u32);

impl Gen {
    pub fn zeta(p: u32) -> Gen {
        Gen(2 * p)
    }

    pub fn zeta_star(p: u32) -> Gen {
        Gen(2 * p + 1)
    }

    pub fn pair(self) -> u32 {
        self.0 / 2
    }

    pub fn is_starred(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn partner(self) -> Gen {
        Gen(self.0 ^ 1)
    }

    fn bit(self) -> u64 {
        1u64 << self.0
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_starred() {
            write!(f, "zs({})", self.pair())
        } else {
            write!(f, "z({})", self.pair())
        }
    }
}

/// Rule for starring products and starred generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum ConjugationConvention {
    /// `z** = -z`, `(ab)* = a* b*`.
    #[default]
    MinusSign,
    /// `z** = z`, `(ab)* = b* a*`.
    OrderReversal,
}

/// Sign of `m_a * m_b` brought to ascending order, or `None` if they share a
/// generator.
#[inline]
pub fn product_sign(a: u64, b: u64) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        swaps += (a >> j).count_ones();
    }
    Some(swaps % 2 == 1)
}

/// Polynomial in the generators of a pool with coefficients in `C`.
#[derive(Clone)]
pub struct GrassmannElement<C: Coefficient = Complex64> {
    pairs: u32,
    terms: BTreeMap<u64, C>,
    convention: Option<ConjugationConvention>,
}

fn check_pool(pairs: u32) -> Result<()> {
    if pairs > MAX_PAIRS {
        Err(Error::PoolTooLarge(pairs))
    } else {
        Ok(())
    }
}

fn merge_convention(
    a: Option<ConjugationConvention>,
    b: Option<ConjugationConvention>,
) -> Result<Option<ConjugationConvention>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::ConventionMix),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        _ => Ok(None),
    }
}

impl<C: Coefficient> GrassmannElement<C> {
    pub fn zero(pairs: u32) -> Self {
        check_pool(pairs).expect("pool size");
        Self { pairs, terms: BTreeMap::new(), convention: None }
    }

    pub fn scalar(pairs: u32, c: C) -> Self {
        let mut e = Self::zero(pairs);
        e.insert(0, c);
        e
    }

    pub fn one(pairs: u32) -> Self {
        Self::scalar(pairs, C::one())
    }

    pub fn generator(pairs: u32, g: Gen) -> Result<Self> {
        Self::monomial(pairs, &[g], C::one())
    }

    /// `c * g_1 g_2 ... g_n` in the given (not necessarily sorted) order.
    pub fn monomial(pairs: u32, gens: &[Gen], c: C) -> Result<Self> {
        check_pool(pairs)?;
        let mut mask = 0u64;
        let mut negative = false;
        for &g in gens {
            if g.0 >= 2 * pairs {
                return Err(Error::GeneratorOutOfRange { index: g.0, pairs });
            }
            match product_sign(mask, g.bit()) {
                None => return Ok(Self::zero(pairs)),
                Some(s) => {
                    negative ^= s;
                    mask |= g.bit();
                }
            }
        }
        let mut e = Self::zero(pairs);
        e.insert(mask, if negative { -c } else { c });
        Ok(e)
    }

    pub fn pairs(&self) -> u32 {
        self.pairs
    }

    pub fn convention(&self) -> Option<ConjugationConvention> {
        self.convention
    }

    /// Re-home the element in a pool of at least the same size.
    pub fn with_pool(&self, pairs: u32) -> Result<Self> {
        check_pool(pairs)?;
        if pairs < self.pairs {
            if let Some(m) = self.terms.keys().find(|&&m| m >> (2 * pairs) != 0) {
                return Err(Error::GeneratorOutOfRange { index: 63 - m.leading_zeros(), pairs });
            }
        }
        Ok(Self { pairs, terms: self.terms.clone(), convention: self.convention })
    }

    fn insert(&mut self, mask: u64, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mask) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Iterate over `(mask, coefficient)` in ascending mask order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &C)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, mask: u64) -> C {
        self.terms.get(&mask).cloned().unwrap_or_else(C::zero)
    }

    /// Coefficient of the product of `gens` taken in ascending order.
    pub fn coeff_of(&self, gens: &[Gen]) -> C {
        self.coeff(gens.iter().fold(0, |m, g| m | g.bit()))
    }

    /// Coefficient of the monomial containing every generator of the pool.
    pub fn top(&self) -> C {
        self.coeff(full_mask(self.pairs))
    }

    pub fn body(&self) -> C {
        self.coeff(0)
    }

    pub fn soul(&self) -> Self {
        let mut s = self.clone();
        s.terms.remove(&0);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.count_ones()).max().unwrap_or(0)
    }

    /// Drop coefficients whose magnitude does not exceed `threshold`.
    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| !c.is_zero() && c.magnitude() > threshold);
    }

    pub fn pruned(mut self, threshold: f64) -> Self {
        self.prune(threshold);
        self
    }

    fn check_same_pool(&self, other: &Self) -> Result<()> {
        if self.pairs != other.pairs {
            Err(Error::PoolMismatch { left: self.pairs, right: other.pairs })
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_pool(other)?;
        let mut out = self.clone();
        out.convention = merge_convention(self.convention, other.convention)?;
        for (m, c) in other.terms() {
            out.insert(m, c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.clone().neg())
    }

    /// Grassmann product `self * other`.
    pub fn gproduct(&self, other: &Self) -> Result<Self> {
        self.check_same_pool(other)?;
        let mut out = Self::zero(self.pairs);
        out.convention = merge_convention(self.convention, other.convention)?;
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                if let Some(neg) = product_sign(ma, mb) {
                    let c = ca.clone() * cb.clone();
                    out.insert(ma | mb, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// `self += sign * a * b` in place.
    pub fn add_product(&mut self, a: &Self, b: &Self, negate: bool) -> Result<()> {
        self.check_same_pool(a)?;
        a.check_same_pool(b)?;
        self.convention = merge_convention(self.convention, merge_convention(a.convention, b.convention)?)?;
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                if let Some(neg) = product_sign(ma, mb) {
                    let c = ca.clone() * cb.clone();
                    self.insert(ma | mb, if neg != negate { -c } else { c });
                }
            }
        }
        Ok(())
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.pairs);
        out.convention = self.convention;
        for (m, v) in self.terms() {
            out.insert(m, v.clone() * c.clone());
        }
        out
    }

    pub fn add_scalar(&self, c: C) -> Self {
        let mut out = self.clone();
        out.insert(0, c);
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(self.pairs);
        out.convention = self.convention;
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Star every generator and conjugate every coefficient.
    pub fn conjugate(&self, conv: ConjugationConvention) -> Result<Self> {
        if let Some(c) = self.convention {
            if c != conv {
                return Err(Error::ConventionMix);
            }
        }
        let mut out = Self::zero(self.pairs);
        out.convention = Some(conv);
        for (m, c) in self.terms() {
            let mut gens: Vec<u32> = bits(m).collect();
            if conv == ConjugationConvention::OrderReversal {
                gens.reverse();
            }
            let mut mask = 0u64;
            let mut negative = false;
            for g in gens {
                let g = Gen(g);
                if g.is_starred() && conv == ConjugationConvention::MinusSign {
                    negative = !negative;
                }
                let s = product_sign(mask, g.partner().bit()).expect("distinct generators");
                negative ^= s;
                mask |= g.partner().bit();
            }
            let c = c.conj();
            out.insert(mask, if negative { -c } else { c });
        }
        Ok(out)
    }

    /// Evaluate `f(self)` from `f^(n)(body)`, `n = 0, 1, ...`.
    pub fn apply_even_series(&self, derivs: &[C]) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::NotEven);
        }
        let soul = self.soul();
        let mut out = Self::zero(self.pairs);
        out.convention = self.convention;
        let mut power = Self::one(self.pairs);
        let mut n = 0usize;
        while !power.is_zero() {
            let Some(d) = derivs.get(n) else {
                return Err(Error::InsufficientDerivatives { needed: n + 1, given: derivs.len() });
            };
            out = &out + &power.scale(d);
            n += 1;
            power = (&power * &soul).scale(&C::from_ratio(1, n as i64));
        }
        Ok(out)
    }

    /// `exp` of an element with zero body; exact in every coefficient ring.
    pub fn exp_nilpotent(&self) -> Result<Self> {
        if !self.body().is_zero() {
            return Err(Error::Domain("exp_nilpotent needs a zero body".into()));
        }
        let n = self.pairs as usize + 1;
        self.apply_even_series(&vec![C::one(); n])
    }

    /// Multiplicative inverse of an even element with invertible body.
    pub fn inverse(&self) -> Result<Self> {
        let b = self.body();
        let inv = b.recip().ok_or_else(|| Error::Domain(format!("{b:?}")))?;
        let n = self.pairs as usize + 1;
        let mut derivs = Vec::with_capacity(n);
        let mut d = inv.clone();
        for k in 0..n {
            derivs.push(d.clone());
            d = -(d * inv.clone()) * C::from_i64(k as i64 + 1);
        }
        self.apply_even_series(&derivs)
    }

    /// Left derivative with respect to generator `g`.
    pub fn left_derivative(&self, g: Gen) -> Result<Self> {
        if g.0 >= 2 * self.pairs {
            return Err(Error::GeneratorOutOfRange { index: g.0, pairs: self.pairs });
        }
        let mut out = Self::zero(self.pairs);
        out.convention = self.convention;
        let below = g.bit() - 1;
        for (m, c) in self.terms() {
            if m & g.bit() != 0 {
                let c = c.clone();
                let neg = (m & below).count_ones() % 2 == 1;
                out.insert(m & !g.bit(), if neg { -c } else { c });
            }
        }
        Ok(out)
    }

    /// Berezin integral `∫ self dθ_{order[0]} dθ_{order[1]} ...`: the
    /// differential adjacent to the integrand is taken first. Each
    /// generator is moved to the right end of its monomial and removed,
    /// with factor `norm`.
    pub fn berezin_integrate_with(&self, order: &[Gen], norm: &C) -> Result<Self> {
        let mut seen = 0u64;
        for &g in order {
            if g.0 >= 2 * self.pairs {
                return Err(Error::GeneratorOutOfRange { index: g.0, pairs: self.pairs });
            }
            if seen & g.bit() != 0 {
                return Err(Error::Config(format!("generator {g} listed twice")));
            }
            seen |= g.bit();
        }
        let mut cur = self.clone();
        for &g in order {
            let mut next = Self::zero(self.pairs);
            next.convention = cur.convention;
            for (m, c) in cur.terms() {
                if m & g.bit() != 0 {
                    let neg = (m >> (g.0 + 1)).count_ones() % 2 == 1;
                    let c = c.clone() * norm.clone();
                    next.insert(m & !g.bit(), if neg { -c } else { c });
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Berezin integral with the default normalization `1/sqrt(2 pi)`.
    pub fn berezin_integrate(&self, order: &[Gen]) -> Result<Self> {
        self.berezin_integrate_with(order, &default_berezin_norm())
    }

    /// `sum_{k <= rank} (-1)^k / k! f^(k)(y0) bilinear^k`.
    pub fn superdelta_expand(fderivs: &[C], bilinear: &Self, rank: usize) -> Result<Self> {
        if fderivs.len() < rank + 1 {
            return Err(Error::InsufficientDerivatives { needed: rank + 1, given: fderivs.len() });
        }
        let mut out = Self::zero(bilinear.pairs);
        let mut power = Self::one(bilinear.pairs);
        for (k, f) in fderivs.iter().take(rank + 1).enumerate() {
            let c = if k % 2 == 0 { f.clone() } else { -f.clone() };
            out = &out + &power.scale(&c);
            power = (&power * bilinear).scale(&C::from_ratio(1, k as i64 + 1));
        }
        Ok(out)
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (m, c) in self.terms() {
            worst = worst.max((c.clone() - other.coeff(m)).magnitude());
        }
        for (m, c) in other.terms() {
            if !self.terms.contains_key(&m) {
                worst = worst.max(c.magnitude());
            }
        }
        worst
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> GrassmannElement<D> {
        let mut out = GrassmannElement::<D>::zero(self.pairs);
        out.convention = self.convention;
        for (m, c) in self.terms() {
            out.insert(m, f(c));
        }
        out
    }
}

/// Mask of every generator in a pool of `pairs` pairs.
pub fn full_mask(pairs: u32) -> u64 {
    if pairs == 32 {
        u64::MAX
    } else {
        (1u64 << (2 * pairs)) - 1
    }
}

fn bits(m: u64) -> impl Iterator<Item = u32> {
    let mut rest = m;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let j = rest.trailing_zeros();
            rest &= rest - 1;
            Some(j)
        }
    })
}

pub fn default_berezin_norm<C: Coefficient>() -> C {
    C::from_c64(Complex64::new(1.0 / (2.0 * PI).sqrt(), 0.0))
}

/// Elementary functions of even elements with floating coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EvenFunction {
    Exp,
    Recip,
    Ln,
    /// `x^p` on the principal branch.
    Pow(f64),
    /// `x^n` for integer `n`, valid for negative bodies.
    PowInt(i32),
}

impl EvenFunction {
    /// `f^(n)(x)` for `n = 0..count`.
    pub fn derivatives(self, x: Complex64, count: usize) -> Result<Vec<Complex64>> {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(count);
        match self {
            EvenFunction::Exp => {
                let e = x.exp();
                out.resize(count, e);
            }
            EvenFunction::Recip => return EvenFunction::PowInt(-1).derivatives(x, count),
            EvenFunction::Ln => {
                if x == zero {
                    return Err(Error::Domain("ln at 0".into()));
                }
                out.push(x.ln());
                let mut d = x.inv();
                for k in 1..count {
                    out.push(d);
                    d = -d * x.inv() * k as f64;
                }
            }
            EvenFunction::Pow(p) => {
                if x == zero && p < count as f64 {
                    return Err(Error::Domain(format!("x^{p} at 0")));
                }
                let mut c = Complex64::new(1.0, 0.0);
                for k in 0..count {
                    out.push(c * x.powc(Complex64::new(p - k as f64, 0.0)));
                    c *= p - k as f64;
                }
            }
            EvenFunction::PowInt(p) => {
                if x == zero && p < 0 {
                    return Err(Error::Domain(format!("x^{p} at 0")));
                }
                let mut c = 1.0f64;
                for k in 0..count {
                    let e = p - k as i32;
                    let v = if c == 0.0 { zero } else { x.powi(e) * c };
                    out.push(v);
                    c *= e as f64;
                }
            }
        }
        Ok(out)
    }
}

impl GrassmannElement<Complex64> {
    pub fn apply(&self, f: EvenFunction) -> Result<Self> {
        let d = f.derivatives(self.body(), self.pairs as usize + 1)?;
        self.apply_even_series(&d)
    }

    pub fn exp(&self) -> Result<Self> {
        self.apply(EvenFunction::Exp)
    }

    pub fn ln(&self) -> Result<Self> {
        self.apply(EvenFunction::Ln)
    }
}

impl<C: Coefficient> PartialEq for GrassmannElement<C> {
    fn eq(&self, other: &Self) -> bool {
        self.pairs == other.pairs && self.terms == other.terms
    }
}

impl<C: Coefficient> fmt::Debug for GrassmannElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G[{}]{{", self.pairs)?;
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:?}")?;
            for g in bits(m) {
                write!(f, " {}", Gen(g))?;
            }
        }
        write!(f, "}}")
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $call:ident) => {
        impl<C: Coefficient> $tr<&GrassmannElement<C>> for &GrassmannElement<C> {
            type Output = GrassmannElement<C>;
            /// # Panics
            /// On pool mismatch or mixed conjugation conventions; use the
            /// `try_*` / `gproduct` forms to recover.
            fn $m(self, rhs: &GrassmannElement<C>) -> GrassmannElement<C> {
                self.$call(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl<C: Coefficient> $tr for GrassmannElement<C> {
            type Output = GrassmannElement<C>;
            fn $m(self, rhs: GrassmannElement<C>) -> GrassmannElement<C> {
                (&self).$m(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, gproduct);

impl<C: Coefficient> Neg for GrassmannElement<C> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl<C: Coefficient> Neg for &GrassmannElement<C> {
    type Output = GrassmannElement<C>;
    fn neg(self) -> GrassmannElement<C> {
        -self.clone()
    }
}

/// Text form of coefficients used by [`GrassmannElement::emit`].
pub trait TextCoefficient: Coefficient {
    fn emit(&self) -> String;
    fn parse(s: &str) -> Result<Self>;
}

fn split_pair(s: &str) -> Result<(&str, &str)> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected (re,im), got {s:?}")))?;
    inner.split_once(',').ok_or_else(|| Error::Parse(format!("missing comma in {s:?}")))
}

impl TextCoefficient for Complex64 {
    fn emit(&self) -> String {
        format!("({:?},{:?})", self.re, self.im)
    }
    fn parse(s: &str) -> Result<Self> {
        let (re, im) = split_pair(s)?;
        let p = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}")));
        Ok(Complex64::new(p(re)?, p(im)?))
    }
}

impl TextCoefficient for ExactComplex {
    fn emit(&self) -> String {
        format!("({},{})", self.re, self.im)
    }
    fn parse(s: &str) -> Result<Self> {
        let (re, im) = split_pair(s)?;
        let p = |t: &str| {
            t.trim()
                .parse::<num_rational::BigRational>()
                .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
        };
        Ok(ExactComplex::new(p(re)?, p(im)?))
    }
}

impl<C: TextCoefficient> GrassmannElement<C> {
    /// `G=<pairs>: <coeff> * z(p) zs(q) + ...`; `0` for the zero element.
    pub fn emit(&self) -> String {
        let mut s = format!("G={}:", self.pairs);
        if self.is_zero() {
            s.push_str(" 0");
            return s;
        }
        for (i, (m, c)) in self.terms().enumerate() {
            s.push_str(if i == 0 { " " } else { " + " });
            s.push_str(&c.emit());
            if m != 0 {
                s.push_str(" *");
                for g in bits(m) {
                    s.push_str(&format!(" {}", Gen(g)));
                }
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (head, body) =
            text.split_once(':').ok_or_else(|| Error::Parse("missing `G=<pairs>:` header".into()))?;
        let pairs: u32 = head
            .trim()
            .strip_prefix("G=")
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header {head:?}")))?;
        let mut out = Self::zero(pairs);
        let body = body.trim();
        if body == "0" {
            return Ok(out);
        }
        for term in body.split(" + ") {
            let (coef, gens) = match term.split_once(" * ") {
                Some((c, g)) => (c, g),
                None => (term, ""),
            };
            let c = C::parse(coef)?;
            let mut list = Vec::new();
            for tok in gens.split_whitespace() {
                list.push(parse_gen(tok)?);
            }
            let m = Self::monomial(pairs, &list, c)?;
            out = out.try_add(&m)?;
        }
        Ok(out)
    }
}

fn parse_gen(tok: &str) -> Result<Gen> {
    let num = |s: &str| s.parse::<u32>().map_err(|e| Error::Parse(format!("{tok:?}: {e}")));
    if let Some(r) = tok.strip_prefix("zs(").and_then(|r| r.strip_suffix(')')) {
        Ok(Gen::zeta_star(num(r)?))
    } else if let Some(r) = tok.strip_prefix("z(").and_then(|r| r.strip_suffix(')')) {
        Ok(Gen::zeta(num(r)?))
    } else {
        Err(Error::Parse(format!("unknown generator {tok:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = GrassmannElement<Complex64>;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn g(pairs: u32, gen: Gen) -> E {
        E::generator(pairs, gen).unwrap()
    }

    #[test]
    fn nilpotent_and_anticommuting() {
        let z1 = g(2, Gen::zeta(0));
        let z2 = g(2, Gen::zeta(1));
        assert!((&z1 * &z1).is_zero());
        assert_eq!(&z2 * &z1, -(&z1 * &z2));
        let z3 = g(2, Gen::zeta_star(1));
        let pair = &z1 * &z2;
        assert_eq!(&pair * &z3, &z3 * &pair);
    }

    #[test]
    fn conjugation_rules() {
        let z = g(1, Gen::zeta(0));
        let zz = z.conjugate(ConjugationConvention::MinusSign).unwrap();
        assert_eq!(zz.conjugate(ConjugationConvention::MinusSign).unwrap(), -z.clone());
        let zr = z.conjugate(ConjugationConvention::OrderReversal).unwrap();
        assert_eq!(zr.conjugate(ConjugationConvention::OrderReversal).unwrap(), z.clone());
        let modsq = &g(1, Gen::zeta_star(0)) * &z;
        for conv in [ConjugationConvention::MinusSign, ConjugationConvention::OrderReversal] {
            assert_eq!(modsq.conjugate(conv).unwrap(), modsq);
        }
        let s = E::scalar(1, Complex64::new(1.0, 2.0));
        assert_eq!(
            s.conjugate(ConjugationConvention::MinusSign).unwrap(),
            E::scalar(1, Complex64::new(1.0, -2.0))
        );
    }

    #[test]
    fn mixing_conventions_is_rejected() {
        let z = g(1, Gen::zeta(0));
        let a = z.conjugate(ConjugationConvention::MinusSign).unwrap();
        let b = z.conjugate(ConjugationConvention::OrderReversal).unwrap();
        assert_eq!(a.gproduct(&b), Err(Error::ConventionMix));
        assert_eq!(a.conjugate(ConjugationConvention::OrderReversal), Err(Error::ConventionMix));
    }

    #[test]
    fn pool_mismatch() {
        assert!(matches!(g(1, Gen::zeta(0)).gproduct(&g(2, Gen::zeta(0))), Err(Error::PoolMismatch { .. })));
    }

    #[test]
    fn even_series() {
        let a = c(0.7);
        let q = (&g(1, Gen::zeta_star(0)) * &g(1, Gen::zeta(0))).scale(&a);
        assert_eq!(q.exp().unwrap(), q.add_scalar(c(1.0)));
        assert_eq!(E::zero(1).exp().unwrap(), E::one(1));
        let inv = (-q.clone()).add_scalar(c(1.0)).inverse().unwrap();
        assert_eq!(inv, q.add_scalar(c(1.0)));
        assert!(matches!(q.ln(), Err(Error::Domain(_))));
        assert_eq!(g(1, Gen::zeta(0)).exp(), Err(Error::NotEven));
    }

    #[test]
    fn berezin_examples() {
        let nu = 1.0 / (2.0 * PI).sqrt();
        let z = g(1, Gen::zeta(0));
        assert!(E::one(1).berezin_integrate(&[Gen::zeta(0)]).unwrap().is_zero());
        assert!((z.berezin_integrate(&[Gen::zeta(0)]).unwrap().body() - c(nu)).norm() < 1e-15);
        let a = c(1.3);
        let q = (&g(1, Gen::zeta_star(0)) * &z).scale(&a).exp().unwrap();
        let v = q.berezin_integrate(&[Gen::zeta(0), Gen::zeta_star(0)]).unwrap();
        assert!((v.body() - a / (2.0 * PI)).norm() < 1e-15);
        assert!(z.berezin_integrate(&[Gen::zeta(0), Gen::zeta(0)]).is_err());
    }

    #[test]
    fn superdelta() {
        let z = g(1, Gen::zeta(0));
        let bil = &g(1, Gen::zeta_star(0)) * &z;
        let r = E::superdelta_expand(&[c(2.0), c(3.0)], &bil, 1).unwrap();
        assert_eq!(r, bil.scale(&c(-3.0)).add_scalar(c(2.0)));
        let one = E::superdelta_expand(&[c(1.0), c(0.0)], &bil, 1).unwrap();
        assert_eq!(one, E::one(1));
        assert!(bil.pow(2).is_zero());
        assert!(E::superdelta_expand(&[c(1.0)], &bil, 1).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let e = (&g(2, Gen::zeta(0)) * &g(2, Gen::zeta_star(1))).scale(&Complex64::new(0.1, -3e-20))
            + E::scalar(2, c(2.5));
        let s = e.emit();
        assert_eq!(E::parse(&s).unwrap(), e);
        assert_eq!(E::parse(&E::zero(3).emit()).unwrap(), E::zero(3));
        assert!(E::parse("G=1: (1.0,0.0) * z(3)").is_err());
    }
}
