//! Color-flavor transformation for `U(1)` with one flavor of each kind, and
//! Monte Carlo averages over the circular unitary ensemble.
//!
//! Both sides of the transformation are expanded as series in the
//! commuting source components. The commuting components take numeric
//! values scaled by a bookkeeping variable `t`; the anticommuting
//! components stay formal generators. The commuting entries of the coset
//! matrices are integrated in closed form by Beta integrals continued in
//! the exponent `N + d`, and the result is read off at `d = 0`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ensembles::{mc_value, sample, EnsembleClass, EnsembleSpec, McValue};
use crate::error::{Error, Result};
use crate::grassmann::{Gen, GrassmannElement};
use crate::scalar::{gamma_laurent, Coefficient, Laurent};

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ------------------------------------------------------------ polynomials

/// Variables of [`Poly`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    /// Source magnitude.
    T = 0,
    A = 1,
    ABar = 2,
    B = 3,
    BBar = 4,
    /// `1 / (1 -+ |a|^2)`.
    UInv = 5,
    /// `1 / (1 -+ |b|^2)`.
    WInv = 6,
    /// Shift of the exponent `N`.
    Delta = 7,
}

const VARS: usize = 8;

type Exponents = [u8; VARS];

/// Sparse polynomial with complex coefficients, truncated in the degree of
/// [`Var::T`].
#[derive(Clone, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Exponents, Complex64>,
    cap: u8,
}

impl Poly {
    pub fn constant(c: Complex64) -> Self {
        let mut p = Self { terms: BTreeMap::new(), cap: u8::MAX };
        p.insert([0; VARS], c);
        p
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; VARS];
        e[v as usize] = 1;
        let mut p = Self { terms: BTreeMap::new(), cap: u8::MAX };
        p.insert(e, cx(1.0, 0.0));
        p
    }

    /// Same polynomial with `t` degree limited to `cap`.
    pub fn capped(mut self, cap: u8) -> Self {
        self.cap = self.cap.min(cap);
        let c = self.cap;
        self.terms.retain(|e, _| e[0] <= c);
        self
    }

    fn insert(&mut self, e: Exponents, c: Complex64) {
        if e[0] > self.cap {
            return;
        }
        let slot = self.terms.entry(e).or_insert(cx(0.0, 0.0));
        *slot += c;
        if *slot == cx(0.0, 0.0) {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut p = Self { terms: BTreeMap::new(), cap: self.cap };
        for (e, v) in &self.terms {
            p.insert(*e, v * c);
        }
        p
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl Add for Poly {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut p = Self { terms: BTreeMap::new(), cap: self.cap.min(o.cap) };
        for (e, c) in self.terms.into_iter().chain(o.terms) {
            p.insert(e, c);
        }
        p
    }
}

impl Sub for Poly {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Poly {
    type Output = Self;
    fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -*c;
        }
        self
    }
}

impl Mul for Poly {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut p = Self { terms: BTreeMap::new(), cap: self.cap.min(o.cap) };
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let mut e = [0u8; VARS];
                for k in 0..VARS {
                    e[k] = ea[k] + eb[k];
                }
                p.insert(e, ca * cb);
            }
        }
        p
    }
}

impl Coefficient for Poly {
    fn zero() -> Self {
        Self { terms: BTreeMap::new(), cap: u8::MAX }
    }
    fn one() -> Self {
        Self::constant(cx(1.0, 0.0))
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn conj(&self) -> Self {
        let mut p = self.clone();
        for c in p.terms.values_mut() {
            *c = c.conj();
        }
        p
    }
    fn from_i64(n: i64) -> Self {
        Self::constant(cx(n as f64, 0.0))
    }
    fn from_c64(z: Complex64) -> Self {
        Self::constant(z)
    }
    fn to_c64(&self) -> Complex64 {
        self.terms.get(&[0; VARS]).copied().unwrap_or(cx(0.0, 0.0))
    }
    fn recip(&self) -> Option<Self> {
        match self.terms.iter().next() {
            Some((e, c)) if self.terms.len() == 1 && *e == [0; VARS] => Some(Self::constant(c.inv())),
            _ => None,
        }
    }
    fn magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

// ------------------------------------------------------------ configuration

/// Integration sheet of one commuting coset entry `x`, with partner
/// `x~ = +conj(x)` on the unit disc and `x~ = -conj(x)` on the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sheet {
    Disc,
    Plane,
}

impl Sheet {
    fn sign(self) -> f64 {
        match self {
            Sheet::Disc => 1.0,
            Sheet::Plane => -1.0,
        }
    }

    /// `∫ d^2x |x|^{2p} (1 -+ |x|^2)^{e0 + c d}` up to the common factor `pi`.
    fn integral(self, p: u8, e0: i64, c: i32) -> Laurent {
        let p = i64::from(p);
        let gp = Laurent::constant(cx((1..=p).product::<i64>() as f64, 0.0));
        let (num, den) = match self {
            Sheet::Disc => (gamma_laurent(e0 + 1, c), gamma_laurent(e0 + p + 2, c)),
            Sheet::Plane => (gamma_laurent(-e0 - p - 1, -c), gamma_laurent(-e0, -c)),
        };
        gp * num * den.recip().expect("gamma series is invertible")
    }
}

/// Integration domain of the commuting coset entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetDomain {
    pub boson: Sheet,
    pub fermion: Sheet,
}

impl Default for CosetDomain {
    fn default() -> Self {
        Self { boson: Sheet::Disc, fermion: Sheet::Plane }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CftConfig {
    pub n: usize,
    pub kplus: usize,
    pub kminus: usize,
    /// Highest number of commuting bilinears kept.
    pub order: usize,
    pub domain: CosetDomain,
    /// Largest tolerated coefficient of a negative power of `d`.
    pub pole_tolerance: f64,
}

impl Default for CftConfig {
    fn default() -> Self {
        Self { n: 1, kplus: 1, kminus: 1, order: 4, domain: CosetDomain::default(), pole_tolerance: 1e-9 }
    }
}

impl CftConfig {
    pub fn with_order(order: usize) -> Self {
        Self { order, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 1 || self.kplus != 1 || self.kminus != 1 {
            return Err(Error::Config("only N = 1 with one flavor of each kind is supported".into()));
        }
        if !(2..=8).contains(&self.order) {
            return Err(Error::Config(format!("order {} outside 2..=8", self.order)));
        }
        Ok(())
    }

    fn cap(&self) -> u8 {
        2 * self.order as u8
    }
}

/// Values of the commuting source components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CftSource {
    pub z_plus: Complex64,
    pub z_minus: Complex64,
}

impl CftSource {
    pub fn zero() -> Self {
        Self { z_plus: cx(0.0, 0.0), z_minus: cx(0.0, 0.0) }
    }

    /// Complex Gaussian components with standard deviation `0.7`.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = || {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            cx(re, im) * 0.7 / 2f64.sqrt()
        };
        Self { z_plus: g(), z_minus: g() }
    }
}

// ------------------------------------------------------------ series

pub const F_PLUS: Gen = Gen(0);
pub const F_PLUS_STAR: Gen = Gen(1);
pub const F_MINUS: Gen = Gen(2);
pub const F_MINUS_STAR: Gen = Gen(3);
const ALPHA: Gen = Gen(4);
const BETA: Gen = Gen(5);
const ALPHA_T: Gen = Gen(6);
const BETA_T: Gen = Gen(7);
const PAIRS: u32 = 4;

/// Coefficient table indexed by the degree in the commuting source
/// components and a monomial in the anticommuting ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CftSeries {
    pub order: usize,
    pub source: CftSource,
    /// Keyed by `(degree, mask)` with the generators of [`F_PLUS`],
    /// [`F_PLUS_STAR`], [`F_MINUS`], [`F_MINUS_STAR`] as bits 0..4.
    pub coefficients: BTreeMap<(u32, u64), Complex64>,
    /// Largest coefficient of a negative power of the regulator.
    pub pole_residual: f64,
}

#[derive(Serialize)]
struct CftRow {
    degree: u32,
    monomial: String,
    re: f64,
    im: f64,
}

fn monomial_name(mask: u64) -> String {
    const NAMES: [&str; 4] = ["f+", "f+*", "f-", "f-*"];
    let parts: Vec<&str> = (0..4).filter(|b| mask >> b & 1 == 1).map(|b| NAMES[b]).collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

impl CftSeries {
    pub fn coeff(&self, degree: u32, mask: u64) -> Complex64 {
        self.coefficients.get(&(degree, mask)).copied().unwrap_or(cx(0.0, 0.0))
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<_> = self.coefficients.keys().chain(other.coefficients.keys()).collect();
        keys.into_iter().map(|&(d, m)| (self.coeff(d, m) - other.coeff(d, m)).norm()).fold(0.0, f64::max)
    }

    /// Entries whose odd monomial has no partner in the commuting sector.
    pub fn odd_sector(&self) -> BTreeMap<u64, Complex64> {
        self.coefficients.iter().filter(|((d, _), _)| *d == 0).map(|(&(_, m), &c)| (m, c)).collect()
    }

    pub fn truncated(&self, order: usize) -> Self {
        let mut s = self.clone();
        s.order = order;
        s.coefficients.retain(|(d, _), _| *d as usize <= 2 * order);
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<CftRow> = self
            .coefficients
            .iter()
            .map(|(&(degree, mask), c)| CftRow { degree, monomial: monomial_name(mask), re: c.re, im: c.im })
            .collect();
        serde_json::json!({
            "order": self.order,
            "source": self.source,
            "pole_residual": self.pole_residual,
            "coefficients": rows,
        })
    }
}

fn poly_scalar(c: Complex64, t: u8, cap: u8) -> Poly {
    let mut e = [0; VARS];
    e[0] = t;
    let mut p = Poly { terms: BTreeMap::new(), cap };
    p.insert(e, c);
    p
}

fn g(gen: Gen) -> GrassmannElement<Poly> {
    GrassmannElement::generator(PAIRS, gen).expect("generator in pool")
}

fn bilinear(left: Gen, right: Gen, c: Poly) -> GrassmannElement<Poly> {
    GrassmannElement::monomial(PAIRS, &[left, right], c).expect("generators in pool")
}

/// `exp` of an ordinary polynomial whose terms all carry `t`.
fn exp_poly(x: &Poly) -> Poly {
    let mut sum = Poly::one().capped(x.cap);
    let mut term = sum.clone();
    for k in 1.. {
        term = (term * x.clone()).scale(cx(1.0 / k as f64, 0.0));
        if term.is_empty() {
            break;
        }
        sum = sum + term.clone();
    }
    sum
}

/// Collect a Grassmann element with `t`-only coefficients into a series.
fn collect(e: &GrassmannElement<Poly>, cfg: &CftConfig, src: CftSource) -> Result<CftSeries> {
    let mut coefficients = BTreeMap::new();
    for (mask, p) in e.terms() {
        if mask >> 4 != 0 {
            return Err(Error::Parity(format!("coset generator left in monomial {mask:#x}")));
        }
        for (ex, c) in p.terms() {
            if ex[1..].iter().any(|&k| k != 0) {
                return Err(Error::Config("unintegrated coset variable".into()));
            }
            *coefficients.entry((u32::from(ex[0]), mask)).or_insert(cx(0.0, 0.0)) += c;
        }
    }
    Ok(CftSeries { order: cfg.order, source: src, coefficients, pole_residual: 0.0 })
}

/// Phase average of `exp(e^{i phi} Psi_+^* Psi_+ + e^{-i phi} Psi_-^* Psi_-)`.
/// Only terms with equal powers of both bilinears survive the average,
/// giving `sum_n (P_+ P_-)^n / (n!)^2`.
pub fn cft_lhs(cfg: &CftConfig, src: CftSource) -> Result<CftSeries> {
    cfg.validate()?;
    let cap = cfg.cap();
    let scalar = |c: Complex64, t: u8| GrassmannElement::scalar(PAIRS, poly_scalar(c, t, cap));
    let plus = &scalar(src.z_plus.norm_sqr().into(), 2) + &bilinear(F_PLUS_STAR, F_PLUS, Poly::one());
    let minus = &scalar(src.z_minus.norm_sqr().into(), 2) + &bilinear(F_MINUS_STAR, F_MINUS, Poly::one());
    let x = &plus * &minus;
    let mut out = GrassmannElement::<Poly>::one(PAIRS);
    let mut power = out.clone();
    for n in 1.. {
        power = (&power * &x).scale(&Poly::constant(cx(1.0 / (n * n) as f64, 0.0)));
        if power.is_zero() {
            break;
        }
        out = &out + &power;
    }
    collect(&out, cfg, src)
}

/// Integrand of the coset side before the commuting integrals:
/// `sdet^{N+d}(1 - L~ L) exp(Psi_+^* L Psi_- + Psi_-^* L~ Psi_+)` with the
/// odd coset entries integrated out.
fn coset_integrand(cfg: &CftConfig, src: CftSource) -> Result<GrassmannElement<Poly>> {
    let cap = cfg.cap();
    let p = |v: Var| Poly::var(v).capped(cap);
    let sa = cfg.domain.boson.sign();
    let sb = cfg.domain.fermion.sign();
    let a = p(Var::A);
    let at = p(Var::ABar).scale(cx(sa, 0.0));
    let b = p(Var::B);
    let bt = p(Var::BBar).scale(cx(sb, 0.0));
    let zp = src.z_plus;
    let zm = src.z_minus;

    // commuting part of the exponent
    let x0 = poly_scalar(zp.conj() * zm, 2, cap) * a.clone() + poly_scalar(zm.conj() * zp, 2, cap) * at.clone();
    let t1 = |c: Complex64| poly_scalar(c, 1, cap);
    let xn = &(&(&bilinear(ALPHA, F_MINUS, t1(zp.conj())) + &bilinear(F_PLUS_STAR, BETA, t1(zm)))
        + &(&bilinear(ALPHA_T, F_PLUS, t1(zm.conj())) + &bilinear(F_MINUS_STAR, BETA_T, t1(zp))))
        + &(&bilinear(F_PLUS_STAR, F_MINUS, b.clone()) + &bilinear(F_MINUS_STAR, F_PLUS, bt.clone()));
    let source = xn.exp_nilpotent()?.scale(&exp_poly(&x0));

    // sdet(1 - L~ L) = (u / w) (1 + n)
    let s = |e: &GrassmannElement<Poly>, c: Poly| e.scale(&c);
    let one = GrassmannElement::<Poly>::one(PAIRS);
    let at_b = &g(ALPHA_T) * &g(BETA);
    let bt_a = &g(BETA_T) * &g(ALPHA);
    let a_over_u = &one - &s(&at_b, p(Var::UInv));
    let d_inv = &one + &s(&bt_a, p(Var::WInv));
    let sigma = -&(&s(&g(ALPHA), at) + &s(&g(ALPHA_T), b));
    let rho = -&(&s(&g(BETA_T), a) + &s(&g(BETA), bt));
    let uw = p(Var::UInv) * p(Var::WInv);
    let one_n = &(&a_over_u - &s(&(&(&sigma * &d_inv) * &rho), uw)) * &d_inv;
    let nil = &one_n - &one;

    // (1 + n)^{N + d} by the binomial series
    let nu = Poly::constant(cx(cfg.n as f64, 0.0)) + p(Var::Delta);
    let mut weight = one.clone();
    let mut power = one.clone();
    let mut binom = Poly::one();
    for k in 0u32.. {
        power = &power * &nil;
        if power.is_zero() {
            break;
        }
        binom = binom * (nu.clone() - Poly::constant(cx(k as f64, 0.0))).scale(cx(1.0 / (k + 1) as f64, 0.0));
        weight = &weight + &s(&power, binom.clone());
    }

    let integrand = &weight * &source;
    integrand.berezin_integrate_with(&[ALPHA, BETA, ALPHA_T, BETA_T], &Poly::one())
}

/// Coset side of the color-flavor transformation, normalized so that the
/// value at vanishing sources is one.
pub fn cft_rhs(cfg: &CftConfig, src: CftSource) -> Result<CftSeries> {
    cfg.validate()?;
    let reduced = coset_integrand(cfg, src)?;
    let n = cfg.n as i64;
    let mut raw: BTreeMap<(u32, u64), Laurent> = BTreeMap::new();
    for (mask, poly) in reduced.terms() {
        for (e, c) in poly.terms() {
            let [t, pa, qa, pb, qb, i, j, d] = *e;
            if pa != qa || pb != qb {
                continue;
            }
            // u^{N + d - i} and w^{-N - d - j}
            let ia = cfg.domain.boson.integral(pa, n - i64::from(i), 1);
            let ib = cfg.domain.fermion.integral(pb, -n - i64::from(j), -1);
            let v = (ia * ib).shift(i32::from(d)).scale(*c);
            let slot = raw.entry((u32::from(t), mask)).or_insert_with(Laurent::zero);
            *slot = *slot + v;
        }
    }
    let norm = raw.get(&(0, 0)).copied().ok_or_else(|| Error::Convergence("coset normalization vanishes".into()))?;
    let inv = norm.recip().ok_or_else(|| Error::Convergence("coset normalization vanishes".into()))?;
    let mut coefficients = BTreeMap::new();
    let mut pole_residual: f64 = 0.0;
    for (key, v) in raw {
        let r = if key == (0, 0) { Laurent::one() } else { v * inv };
        for k in crate::scalar::LAURENT_MIN..0 {
            pole_residual = pole_residual.max(r.coeff(k).norm());
        }
        if r.coeff(0) != cx(0.0, 0.0) {
            coefficients.insert(key, r.coeff(0));
        }
    }
    if pole_residual > cfg.pole_tolerance {
        return Err(Error::Convergence(format!("regulator pole of size {pole_residual:.2e} survives")));
    }
    Ok(CftSeries { order: cfg.order, source: src, coefficients, pole_residual })
}

/// Side-by-side comparison over seeded sources.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CftComparison {
    pub config: CftConfig,
    pub seeds: Vec<u64>,
    pub deviations: Vec<f64>,
    pub coefficients_compared: usize,
    pub max_deviation: f64,
    pub normalization_deviation: f64,
    pub passed: bool,
}

pub fn cft_compare(cfg: &CftConfig, seeds: &[u64], tol: f64) -> Result<CftComparison> {
    let zero = CftSource::zero();
    let normalization_deviation = (cft_rhs(cfg, zero)?.coeff(0, 0) - 1.0).norm();
    let mut deviations = Vec::with_capacity(seeds.len());
    let mut compared = 0;
    for &seed in seeds {
        let src = CftSource::seeded(seed);
        let l = cft_lhs(cfg, src)?;
        let r = cft_rhs(cfg, src)?;
        compared += l.coefficients.len().max(r.coefficients.len());
        deviations.push(l.max_deviation(&r));
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(CftComparison {
        config: cfg.clone(),
        seeds: seeds.to_vec(),
        deviations,
        coefficients_compared: compared,
        max_deviation,
        normalization_deviation,
        passed: max_deviation <= tol && normalization_deviation == 0.0,
    })
}

// ------------------------------------------------------------ CUE average

/// Angles of the determinant ratio; `theta` entries need a positive
/// imaginary part.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CueAngles {
    pub theta_plus: Vec<Complex64>,
    pub phi_plus: Vec<Complex64>,
    pub theta_minus: Vec<Complex64>,
    pub phi_minus: Vec<Complex64>,
}

impl CueAngles {
    pub fn validate(&self) -> Result<()> {
        if self.theta_plus.len() != self.phi_plus.len() || self.theta_minus.len() != self.phi_minus.len() {
            return Err(Error::Config("theta and phi lengths differ".into()));
        }
        if self.theta_plus.iter().chain(&self.theta_minus).any(|t| t.im <= 0.0) {
            return Err(Error::Config("theta needs a positive imaginary increment".into()));
        }
        Ok(())
    }
}

fn det_factor(angle: Complex64, phases: &[f64], sign: f64) -> Complex64 {
    let q = (Complex64::i() * angle).exp();
    phases.iter().map(|&th| 1.0 - q * Complex64::from_polar(1.0, sign * th)).product()
}

/// Determinant-ratio product for one sample of eigenphases.
pub fn cue_ratio(phases: &[f64], angles: &CueAngles) -> Complex64 {
    let mut v = cx(1.0, 0.0);
    for (t, p) in angles.theta_plus.iter().zip(&angles.phi_plus) {
        v *= det_factor(*p, phases, 1.0) / det_factor(*t, phases, 1.0);
    }
    for (t, p) in angles.theta_minus.iter().zip(&angles.phi_minus) {
        v *= det_factor(*p, phases, -1.0) / det_factor(*t, phases, -1.0);
    }
    v
}

fn check_cue(spec: &EnsembleSpec) -> Result<()> {
    if spec.class != EnsembleClass::Cue {
        return Err(Error::Config(format!("expected the CUE, got {:?}", spec.class)));
    }
    Ok(())
}

/// Haar average of the determinant-ratio product.
pub fn cue_genfun_mc(spec: &EnsembleSpec, angles: &CueAngles, rtol: Option<f64>) -> Result<McValue> {
    check_cue(spec)?;
    angles.validate()?;
    let batch = sample(spec)?;
    let vals: Vec<Complex64> = batch.spectra.iter().map(|s| cue_ratio(s, angles)).collect();
    mc_value(&vals, rtol)
}

/// Level density at `theta` from the derivative of the generating
/// function with one advanced flavor at `phi = theta + i eps`.
pub fn cue_r1(spec: &EnsembleSpec, theta: f64, eps: f64) -> Result<(f64, f64)> {
    check_cue(spec)?;
    if eps <= 0.0 {
        return Err(Error::Config("eps must be positive".into()));
    }
    let q = Complex64::from_polar((-eps).exp(), theta);
    let batch = sample(spec)?;
    let vals: Vec<Complex64> = batch
        .spectra
        .iter()
        .map(|s| {
            // i d/dphi log det(1 - e^{i phi} U^dagger) = sum q l / (1 - q l)
            let d: Complex64 = s.iter().map(|&th| {
                let l = q * Complex64::from_polar(1.0, -th);
                l / (1.0 - l)
            }).sum();
            cx((s.len() as f64 + 2.0 * d.re) / (2.0 * PI), 0.0)
        })
        .collect();
    let v = mc_value(&vals, None)?;
    Ok((v.value.re, v.stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::trapezoid_periodic;

    #[test]
    fn zero_source_is_one() {
        let cfg = CftConfig::default();
        let l = cft_lhs(&cfg, CftSource::zero()).unwrap();
        let r = cft_rhs(&cfg, CftSource::zero()).unwrap();
        assert_eq!(l.coeff(0, 0), cx(1.0, 0.0));
        assert_eq!(r.coeff(0, 0), cx(1.0, 0.0));
    }

    #[test]
    fn odd_sector_terminates_and_agrees() {
        let cfg = CftConfig::default();
        let l = cft_lhs(&cfg, CftSource::zero()).unwrap();
        let r = cft_rhs(&cfg, CftSource::zero()).unwrap();
        assert_eq!(l.odd_sector().len(), 2);
        let d = l.max_deviation(&r);
        assert!(d < 1e-12, "{l:?}\n{r:?}");
    }

    #[test]
    fn lhs_matches_phase_quadrature() {
        // coefficient of t^4 from a double trapezoid over phi and over t on the unit circle
        let src = CftSource::seeded(3);
        let (x, y) = (src.z_plus.norm_sqr(), src.z_minus.norm_sqr());
        let (phis, ts) = (trapezoid_periodic(64), trapezoid_periodic(64));
        let mut c4 = cx(0.0, 0.0);
        for (phi, wp) in phis.iter() {
            for (s, ws) in ts.iter() {
                let t = Complex64::from_polar(1.0, s);
                let e = Complex64::from_polar(1.0, phi);
                let f = (e * t * t * x + t * t * y / e).exp();
                c4 += f * t.powi(-4) * wp * ws;
            }
        }
        c4 /= 4.0 * PI * PI;
        let l = cft_lhs(&CftConfig::default(), src).unwrap();
        assert!((l.coeff(4, 0) - c4).norm() < 1e-10, "{c4} {}", l.coeff(4, 0));
        assert!((c4 - x * y).norm() < 1e-10);
    }

    #[test]
    fn sides_agree() {
        let cfg = CftConfig::default();
        for seed in 0..3 {
            let src = CftSource::seeded(seed);
            let l = cft_lhs(&cfg, src).unwrap();
            let r = cft_rhs(&cfg, src).unwrap();
            let d = l.max_deviation(&r);
            assert!(d < 1e-8, "seed {seed}: {d}\n{l:?}\n{r:?}");
        }
    }

    #[test]
    fn domain_choice_cancels_in_normalization() {
        let src = CftSource::seeded(7);
        let base = cft_rhs(&CftConfig::default(), src).unwrap();
        for boson in [Sheet::Disc, Sheet::Plane] {
            for fermion in [Sheet::Disc, Sheet::Plane] {
                let cfg = CftConfig { domain: CosetDomain { boson, fermion }, ..CftConfig::default() };
                assert!(cft_rhs(&cfg, src).unwrap().max_deviation(&base) < 1e-12);
            }
        }
    }

    #[test]
    fn comparison_detects_mismatch() {
        let cfg = CftConfig::default();
        let l = cft_lhs(&cfg, CftSource::seeded(1)).unwrap();
        let r = cft_rhs(&cfg, CftSource::seeded(2)).unwrap();
        assert!(l.max_deviation(&r) > 1e-3);
        let c = cft_compare(&cfg, &[4, 5], 1e-8).unwrap();
        assert!(c.passed && c.coefficients_compared >= 16, "{c:?}");
        let json = l.to_json();
        assert_eq!(json["coefficients"].as_array().unwrap().len(), l.coefficients.len());
    }

    #[test]
    fn truncation_stable() {
        let src = CftSource::seeded(11);
        let lo = cft_rhs(&CftConfig::with_order(2), src).unwrap();
        let hi = cft_rhs(&CftConfig::with_order(4), src).unwrap();
        assert!(hi.truncated(2).max_deviation(&lo) < 1e-12);
    }

    #[test]
    fn cue_identical_angles_and_phase_oracle() {
        let spec = EnsembleSpec::new(EnsembleClass::Cue, 4, 1, 200);
        let t = cx(0.3, 0.2);
        let ang = CueAngles { theta_plus: vec![t], phi_plus: vec![t], theta_minus: vec![t], phi_minus: vec![t] };
        let v = cue_genfun_mc(&spec, &ang, None).unwrap();
        assert_eq!(v.value, cx(1.0, 0.0));
        assert_eq!(v.stderr, 0.0);

        let ang = CueAngles { theta_plus: vec![cx(0.3, 0.5)], phi_plus: vec![cx(0.6, 0.0)], ..CueAngles::default() };
        let q = trapezoid_periodic(256);
        let exact: Complex64 = q.iter().map(|(th, w)| cue_ratio(&[th], &ang) * w).sum::<Complex64>() / (2.0 * PI);
        let spec = EnsembleSpec::new(EnsembleClass::Cue, 1, 5, 40_000);
        let v = cue_genfun_mc(&spec, &ang, None).unwrap();
        assert!((v.value - exact).norm() < 1e-3 + 3.0 * v.stderr, "{v:?} {exact}");
    }

    #[test]
    fn cue_density_is_flat() {
        let spec = EnsembleSpec::new(EnsembleClass::Cue, 6, 2, 400);
        for th in [0.0, 1.3, -2.5] {
            let (r, se) = cue_r1(&spec, th, 0.3).unwrap();
            assert!((r - 6.0 / (2.0 * PI)).abs() < 4.0 * se + 1e-12, "{th} {r} {se}");
        }
    }
}
