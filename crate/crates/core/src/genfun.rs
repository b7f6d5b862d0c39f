//! Supersymmetric representation of the Gaussian generating function.
//!
//! Gaussian weight: `P(H) ∝ exp(-beta tr H^2 / 2)`. For `k = 1`,
//! `beta = 2` the generating function is
//!
//! ```text
//! Z(x + J) = < det(H - x + i eps - J) / det(H - x + i eps + J) >
//!          = ∫ d[sigma] exp(-str sigma^2) sdet^{-N}(sigma - x^± - J)
//! ```
//!
//! with `sigma = [[a, alpha], [beta, i b]]` integrated in Cartesian
//! coordinates, so no boundary terms arise. The measure `d[sigma]` is
//! normalized so that the Hubbard-Stratonovich identity holds with unit
//! constant (see [`hs_measure_constant`]).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duality::{Beta, VectorBundle};
use crate::error::{Error, Result};
use crate::grassmann::{default_berezin_norm, EvenFunction, Gen, GrassmannElement};
use crate::quadrature::{composite_legendre, gauss_hermite, gauss_laguerre, gauss_legendre, trapezoid_periodic};
use crate::scalar::Coefficient;
use crate::superlinalg::{SuperMatrix, TransposeConvention};

type E = GrassmannElement<Complex64>;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Energies, sources and increments of a generating function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub beta: Beta,
    pub x: Vec<f64>,
    pub j: Vec<f64>,
    pub eps: f64,
    pub metric: Vec<i8>,
}

impl SourceConfig {
    /// Single-point configuration with `L = +1`.
    pub fn k1(x: f64, j: f64, eps: f64) -> Self {
        Self { beta: Beta::Unitary, x: vec![x], j: vec![j], eps, metric: vec![1] }
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("increment must be positive, got {}", self.eps)));
        }
        if self.j.len() != self.k() || self.metric.len() != self.k() {
            return Err(Error::Config("x, J and L need one entry per source".into()));
        }
        Ok(())
    }

    /// Same configuration with source `p` set to `j`.
    pub fn with_source(&self, p: usize, j: f64) -> Self {
        let mut s = self.clone();
        s.j[p] = j;
        s
    }
}

// ---------------------------------------------------------------- keystone

/// Coefficient-level comparison of `exp(-tr K^2 / 2 beta)` and
/// `exp(-str B^2 / 2 beta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeystoneReport {
    pub beta: Beta,
    pub n: usize,
    pub k: usize,
    /// Largest coefficient deviation of the two exponentials.
    pub max_deviation: f64,
    pub exact: bool,
    pub passed: bool,
}

/// Exact keystone check in any coefficient ring: bodies of the two
/// exponents must coincide and the exponentials of the nilpotent parts
/// must agree coefficient by coefficient.
pub fn keystone_check_exact<C: Coefficient>(bundle: &VectorBundle) -> Result<KeystoneReport> {
    let pair = bundle.dual_pair::<C>()?;
    let c = C::from_ratio(-1, 2 * i64::from(bundle.beta.value()));
    let tk = pair.k.try_mul(&pair.k)?.trace()?.scale(&c);
    let tb = pair.b.try_mul(&pair.b)?.supertrace()?.scale(&c);
    let body_equal = tk.body() == tb.body();
    let ek = tk.soul().exp_nilpotent()?;
    let eb = tb.soul().exp_nilpotent()?;
    let dev = ek.max_deviation(&eb).max((tk.body() - tb.body()).magnitude());
    Ok(KeystoneReport {
        beta: bundle.beta,
        n: bundle.n,
        k: bundle.k,
        max_deviation: dev,
        exact: true,
        passed: body_equal && ek == eb,
    })
}

/// Floating keystone check with the full exponential of each side.
pub fn keystone_check(bundle: &VectorBundle, tol: f64) -> Result<KeystoneReport> {
    let pair = bundle.dual_pair::<Complex64>()?;
    let c = cx(-1.0 / (2.0 * bundle.beta.as_f64()), 0.0);
    let phi_k = pair.k.try_mul(&pair.k)?.trace()?.scale(&c).exp()?;
    let phi_b = pair.b.try_mul(&pair.b)?.supertrace()?.scale(&c).exp()?;
    let dev = phi_k.max_deviation(&phi_b) / phi_k.max_coeff().max(1e-300);
    Ok(KeystoneReport { beta: bundle.beta, n: bundle.n, k: bundle.k, max_deviation: dev, exact: false, passed: dev <= tol })
}

// ------------------------------------------------------ Hubbard-Stratonovich

/// Quadrature settings for the `k = 1` superspace integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsConfig {
    /// Substitute `b -> i b` in the fermion-fermion entry of `sigma`.
    pub wick_rotation: bool,
    /// Initial Gauss-Hermite node count per commuting entry.
    pub nodes: usize,
    /// Largest node count tried by doubling.
    pub max_nodes: usize,
    /// Node-doubling residual required before comparison.
    pub convergence_tol: f64,
    /// Normalization constant of the identity; 1 for `k = 1`.
    pub c_beta: f64,
}

impl Default for HsConfig {
    fn default() -> Self {
        Self { wick_rotation: true, nodes: 24, max_nodes: 384, convergence_tol: 1e-7, c_beta: 1.0 }
    }
}

/// `i pi ∫ exp(-2 alpha beta) d alpha d beta`: the value of the
/// unnormalized Cartesian integral `∫ da db d alpha d beta exp(-str
/// sigma^2)` with the Wick Jacobian. `d[sigma]` is this flat measure
/// divided by the constant.
pub fn hs_measure_constant() -> Complex64 {
    let (al, be) = sigma_odd(1, 0);
    let e = (&al * &be).scale(&cx(-2.0, 0.0)).exp().expect("even");
    let top = e.berezin_integrate(&[Gen::zeta(0), Gen::zeta_star(0)]).expect("in pool").body();
    cx(0.0, PI) * top
}

fn sigma_odd(pairs: u32, p: u32) -> (E, E) {
    (E::generator(pairs, Gen::zeta(p)).expect("in pool"), E::generator(pairs, Gen::zeta_star(p)).expect("in pool"))
}

/// `[[a, alpha], [beta, d]]` over a pool whose last pair holds the odd
/// entries.
pub fn sigma_matrix(pairs: u32, a: Complex64, d: Complex64) -> SuperMatrix<Complex64> {
    let (al, be) = sigma_odd(pairs, pairs - 1);
    SuperMatrix::from_blocks(pairs, vec![vec![E::scalar(pairs, a)]], vec![vec![al]], vec![vec![be]], vec![vec![E::scalar(pairs, d)]])
        .expect("graded")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsReport {
    pub n: usize,
    pub b_scale: f64,
    pub nodes: usize,
    pub convergence_residual: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Right side of the Hubbard-Stratonovich identity for a `1/1`
/// supermatrix `b` (pool with one spare pair for `sigma`), at `n` nodes.
fn hs_rhs(b: &SuperMatrix<Complex64>, n: usize) -> Result<E> {
    let pairs = b.pairs();
    let rule = gauss_hermite(n);
    let kappa = hs_measure_constant();
    let odd = [Gen::zeta(pairs - 1), Gen::zeta_star(pairs - 1)];
    let parts: Vec<Result<E>> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(&ta, &wa)| {
            let mut acc = E::zero(pairs);
            for (tb, wb) in rule.iter() {
                let sigma = sigma_matrix(pairs, cx(ta, 0.0), cx(0.0, tb));
                let s2 = sigma.try_mul(&sigma)?.supertrace()?;
                let sb = sigma.try_mul(b)?.supertrace()?;
                // Gaussian body exp(-a^2 - b^2) is carried by the weights
                let expo = (-s2).add_scalar(cx(ta * ta + tb * tb, 0.0)) + sb.scale(&cx(0.0, 1.0));
                let val = expo.exp()?.berezin_integrate(&odd)?;
                acc = &acc + &val.scale(&cx(wa * wb, 0.0));
            }
            Ok(acc)
        })
        .collect();
    let mut sum = E::zero(pairs);
    for p in parts {
        sum = &sum + &p?;
    }
    // Wick Jacobian db -> i db
    Ok(sum.scale(&(cx(0.0, 1.0) / kappa)))
}

/// Check `exp(-str B^2 / 4) = ∫ d[sigma] exp(-str sigma^2 + i str sigma B)`
/// for `k = 1`, `beta = 2`, `L = 1`.
pub fn hs_verify(bundle: &VectorBundle, b_scale: f64, cfg: &HsConfig, tol: f64) -> Result<HsReport> {
    if bundle.beta != Beta::Unitary || bundle.k != 1 || !bundle.metric.iter().all(|&l| l == 1) {
        return Err(Error::Config("hs_verify needs beta = 2, k = 1, L = 1".into()));
    }
    if !cfg.wick_rotation {
        return Err(Error::Divergence("fermion-fermion Gaussian exp(+b^2) without Wick rotation".into()));
    }
    let pairs = bundle.pairs() + 1;
    let b = bundle.dual_pair::<Complex64>()?.b.with_pool(pairs)?.scale(&cx(b_scale, 0.0));
    let lhs = b.try_mul(&b)?.supertrace()?.scale(&cx(-0.25, 0.0)).exp()?;
    let mut n = cfg.nodes;
    let mut prev = hs_rhs(&b, n)?;
    loop {
        if 2 * n > cfg.max_nodes {
            return Err(Error::Convergence(format!("Hubbard-Stratonovich quadrature at {n} nodes")));
        }
        let next = hs_rhs(&b, 2 * n)?;
        let resid = next.max_deviation(&prev);
        n *= 2;
        if resid < cfg.convergence_tol {
            let rhs = next.scale(&cx(cfg.c_beta, 0.0));
            let dev = rhs.max_deviation(&lhs);
            return Ok(HsReport {
                n: bundle.n,
                b_scale,
                nodes: n,
                convergence_residual: resid,
                max_deviation: dev,
                tolerance: tol,
                passed: dev <= tol,
            });
        }
        prev = next;
    }
}

// --------------------------------------------- Gaussian superintegral

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperintegralReport {
    pub n: usize,
    /// `L_1^{-N}`, the sign relating the Gaussian integral to the
    /// superdeterminant; suppressed in the closed form.
    pub metric_sign: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

/// `sigma L - x^± - J` for `k = 1`; `J` enters as `diag(-J, +J)`.
fn shifted_sigma(sigma: &SuperMatrix<Complex64>, src: &SourceConfig) -> Result<SuperMatrix<Complex64>> {
    let pairs = sigma.pairs();
    let l = f64::from(src.metric[0]);
    let xpm = cx(src.x[0], -l * src.eps);
    let j = src.j[0];
    let shift = SuperMatrix::from_scalars(
        pairs,
        sigma.row_grading().to_vec(),
        &[xpm - j, cx(0.0, 0.0), cx(0.0, 0.0), xpm + j],
    )?;
    let lm = SuperMatrix::from_scalars(
        pairs,
        sigma.row_grading().to_vec(),
        &[cx(l, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)],
    )?;
    sigma.try_mul(&lm)?.try_sub(&shift)
}

/// Compare `∫ d[Psi] exp(i Psi^dagger (L^{1/2}(L^{1/2} sigma L^{1/2} - x^± -
/// J) L^{1/2} ⊗ 1_N) Psi)` with `sdet^{-N}(sigma L - x^± - J)`.
///
/// `sigma` is a `1/1` supermatrix over its own pool; `N <= 3`. Each `Psi`
/// component is integrated with `d^2 z / pi` rotated onto the ray of
/// steepest descent, and `-2 pi dzeta dzeta*`.
pub fn gaussian_superintegral_check(sigma: &SuperMatrix<Complex64>, src: &SourceConfig, n: usize, tol: f64) -> Result<SuperintegralReport> {
    src.validate()?;
    if n == 0 || n > 3 {
        return Err(Error::Config("Gaussian superintegral supports 1 <= N <= 3".into()));
    }
    let sp = sigma.pairs();
    let pairs = sp + n as u32;
    let sig = sigma.with_pool(pairs)?;
    let l = f64::from(src.metric[0]);
    let lh = if l < 0.0 { cx(0.0, 1.0) } else { cx(1.0, 0.0) };
    let lhm = SuperMatrix::from_scalars(pairs, sig.row_grading().to_vec(), &[lh, cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)])?;
    let shift = {
        let xpm = cx(src.x[0], -l * src.eps);
        let j = src.j[0];
        SuperMatrix::from_scalars(pairs, sig.row_grading().to_vec(), &[xpm - j, cx(0.0, 0.0), cx(0.0, 0.0), xpm + j])?
    };
    let inner = lhm.try_mul(&sig)?.try_mul(&lhm)?.try_sub(&shift)?;
    let m = lhm.try_mul(&inner)?.try_mul(&lhm)?;
    let m0 = m.get(0, 0).body();
    if m0.im <= 0.0 {
        return Err(Error::Divergence(format!(
            "bosonic Gaussian exp(i m |z|^2) with Im m = {} <= 0; the increment sign must follow the metric",
            m0.im
        )));
    }
    // rho = |z|^2 = i t / m0, t >= 0
    let dir = cx(0.0, 1.0) / m0;
    let nu = default_berezin_norm::<Complex64>();
    let fermion_factor = cx(-1.0, 0.0) / (nu * nu);
    let eval = |nt: usize| -> Result<E> {
        let lag = gauss_laguerre(nt, 0.0);
        let phis = trapezoid_periodic(8);
        let mut per: Vec<(Complex64, Complex64, f64)> = Vec::new();
        for (t, wt) in lag.iter() {
            for (phi, wp) in phis.iter() {
                let rho = dir * t;
                let r = rho.sqrt();
                // z = r e^{i phi}; z* = r e^{-i phi} continued along the ray
                let z = r * Complex64::from_polar(1.0, phi);
                let zs = r * Complex64::from_polar(1.0, -phi);
                per.push((z, zs, wt * wp / (2.0 * PI) * t.exp()));
            }
        }
        let mut total = E::zero(pairs);
        let combos = per.len().pow(n as u32);
        for idx in 0..combos {
            let mut rest = idx;
            let mut expo = E::zero(pairs);
            let mut weight = dir.powu(n as u32);
            for comp in 0..n {
                let (z, zs, w) = per[rest % per.len()];
                rest /= per.len();
                weight *= w;
                let p = sp + comp as u32;
                let (f, fs) = (E::generator(pairs, Gen::zeta(p))?, E::generator(pairs, Gen::zeta_star(p))?);
                let zsz = E::scalar(pairs, zs);
                let zz = E::scalar(pairs, z);
                let q = &(&(&zsz * m.get(0, 0)) * &zz) + &(&(&zsz * m.get(0, 1)) * &f);
                let q = &q + &(&(&(&fs * m.get(1, 0)) * &zz) + &(&(&fs * m.get(1, 1)) * &f));
                expo = &expo + &q.scale(&cx(0.0, 1.0));
            }
            let mut val = expo.exp()?;
            for comp in 0..n {
                let p = sp + comp as u32;
                val = val.berezin_integrate(&[Gen::zeta(p), Gen::zeta_star(p)])?.scale(&fermion_factor);
            }
            total = &total + &val.scale(&weight);
        }
        Ok(total)
    };
    let lo = eval(12)?;
    let hi = eval(24)?;
    let resid = hi.max_deviation(&lo);
    if resid > 1e-7 * hi.max_coeff().max(1.0) {
        return Err(Error::Convergence(format!("superintegral node doubling residual {resid:.2e}")));
    }
    let lhs = hi.with_pool(sp)?;
    let sdet = shifted_sigma(sigma, src)?.sdet()?;
    let rhs = sdet.apply(EvenFunction::PowInt(-(n as i32)))?;
    let sign = l.powi(-(n as i32));
    let dev = lhs.max_deviation(&rhs.scale(&cx(sign, 0.0))) / rhs.max_coeff().max(1e-300);
    Ok(SuperintegralReport { n, metric_sign: sign, max_deviation: dev, passed: dev <= tol })
}

// ------------------------------------------------------------ z_super_k1

/// Quadrature settings for [`z_super_k1`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZSuperConfig {
    pub nodes: usize,
    pub max_nodes: usize,
    pub convergence_tol: f64,
}

impl Default for ZSuperConfig {
    fn default() -> Self {
        Self { nodes: 48, max_nodes: 384, convergence_tol: 1e-8 }
    }
}

/// `Z_1(x + J)` for `beta = 2` from the `1/1` superspace integral.
///
/// Both commuting entries are integrated along lines shifted through the
/// saddle `s_0` of [`pastur_saddle`]; the fermion-fermion entry carries
/// the Wick rotation.
pub fn z_super_k1(src: &SourceConfig, n: usize, cfg: &ZSuperConfig) -> Result<Complex64> {
    src.validate()?;
    if src.k() != 1 || src.beta != Beta::Unitary || src.metric[0] != 1 {
        return Err(Error::Config("z_super_k1 needs k = 1, beta = 2, L = 1".into()));
    }
    let x = src.x[0];
    let ha = (2.0 * n as f64 - x * x).max(0.0).sqrt() / 2.0;
    let hb = -x / 2.0;
    let pole_distance = ha + src.eps;
    let spacing = PI / (2.0 * cfg.max_nodes as f64).sqrt();
    if pole_distance < 0.5 * spacing {
        return Err(Error::Resolution(format!(
            "pole at distance {pole_distance:.2e} from the contour, node spacing {spacing:.2e}"
        )));
    }
    let run = |nodes: usize| -> Result<Complex64> {
        let rule = gauss_hermite(nodes);
        let kappa = hs_measure_constant();
        let odd = [Gen::zeta(0), Gen::zeta_star(0)];
        let parts: Vec<Result<Complex64>> = rule
            .nodes
            .par_iter()
            .zip(rule.weights.par_iter())
            .map(|(&ta, &wa)| {
                let a = cx(ta, ha);
                let wa = wa * cx(0.0, -2.0 * ta * ha).exp() * (ha * ha).exp();
                let mut acc = cx(0.0, 0.0);
                for (tb, wb) in rule.iter() {
                    let b = cx(tb, hb);
                    let wb = wb * cx(0.0, -2.0 * tb * hb).exp() * (hb * hb).exp();
                    let sigma = sigma_matrix(1, a, cx(0.0, 1.0) * b);
                    let s2 = sigma.try_mul(&sigma)?.supertrace()?;
                    let gauss = (-s2).add_scalar(a * a + b * b);
                    let sd = shifted_sigma(&sigma, src)?.sdet()?.apply(EvenFunction::PowInt(-(n as i32)))?;
                    let val = (&gauss.exp()? * &sd).berezin_integrate(&odd)?.body();
                    acc += wb * val;
                }
                Ok(wa * acc)
            })
            .collect();
        let mut sum = cx(0.0, 0.0);
        for p in parts {
            sum += p?;
        }
        Ok(sum * cx(0.0, 1.0) / kappa)
    };
    let mut nodes = cfg.nodes;
    let mut prev = run(nodes)?;
    while 2 * nodes <= cfg.max_nodes {
        nodes *= 2;
        let next = run(nodes)?;
        if (next - prev).norm() < cfg.convergence_tol * next.norm().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Convergence(format!("z_super_k1 at {nodes} nodes, last change {:.2e}", (prev - run(nodes / 2)?).norm())))
}

// --------------------------------------------------------- correlations

/// Source-derivative settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeConfig {
    pub h: f64,
    /// Allowed relative disagreement of the two step sizes.
    pub rtol: f64,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        Self { h: 1e-3, rtol: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnePoint {
    /// `(1 / 2 pi) dZ/dJ` at `J = 0`.
    pub r_hat: Complex64,
    /// Imaginary part of `r_hat`: the level density smoothed by a
    /// Lorentzian of width `eps`.
    pub r1: f64,
}

/// `R-hat_1` from central differences at steps `h` and `h / 2` combined by
/// Richardson extrapolation.
pub fn correlations_from_sources(zfun: &(dyn Fn(f64) -> Result<Complex64> + Sync), cfg: &DerivativeConfig) -> Result<OnePoint> {
    let d = |h: f64| -> Result<Complex64> { Ok((zfun(h)? - zfun(-h)?) / (2.0 * h)) };
    let d1 = d(cfg.h)?;
    let d2 = d(cfg.h / 2.0)?;
    if (d1 - d2).norm() > cfg.rtol * d2.norm().max(1e-12) {
        return Err(Error::Differentiation(format!("steps {} and {} disagree: {d1} vs {d2}", cfg.h, cfg.h / 2.0)));
    }
    let r_hat = (4.0 * d2 - d1) / 3.0 / (2.0 * PI);
    Ok(OnePoint { r_hat, r1: r_hat.im })
}

/// Intercept of the least-squares line through `(eps_i, v_i)`.
pub fn extrapolate_to_zero(eps: &[f64], values: &[f64]) -> f64 {
    let n = eps.len() as f64;
    let mx = eps.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxy: f64 = eps.iter().zip(values).map(|(e, v)| (e - mx) * (v - my)).sum();
    let sxx: f64 = eps.iter().map(|e| (e - mx).powi(2)).sum();
    my - sxy / sxx * mx
}

// ----------------------------------------------------------- identities

/// Result of the `1/1` delta-function identity for one test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaIdentityReport {
    pub function: String,
    pub regulators: Vec<f64>,
    pub max_deviation: f64,
    pub fitted_normalization: Complex64,
    pub passed: bool,
}

/// Polynomial test functions of a `1/1` supermatrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    One,
    Str,
    StrSquared,
}

impl TestFunction {
    fn eval(self, rho: &SuperMatrix<Complex64>) -> Result<E> {
        Ok(match self {
            TestFunction::One => E::one(rho.pairs()),
            TestFunction::Str => rho.supertrace()?,
            TestFunction::StrSquared => rho.try_mul(rho)?.supertrace()?,
        })
    }

    /// Polynomial degree in the commuting entries.
    fn degree(self) -> usize {
        match self {
            TestFunction::One => 0,
            TestFunction::Str => 1,
            TestFunction::StrSquared => 2,
        }
    }
}

/// `f(B) = c^2 ∫ d[rho] f(rho) ∫ d[sigma] exp(-i str sigma (rho - B))` for a
/// `1/1` supermatrix `B` (last two pool pairs free for `rho` and
/// `sigma`).
///
/// The commuting `sigma` entries carry a Gaussian regulator
/// `exp(-eta (s_1^2 + s_2^2))`; the result is a polynomial of degree
/// `deg f / 2` in `eta`, so evaluating at that many plus one regulators
/// and extrapolating to `eta = 0` is exact. The constant `c^2` is fitted
/// from `f = 1`.
pub fn delta_identity(b: &SuperMatrix<Complex64>, f: TestFunction, tol: f64) -> Result<DeltaIdentityReport> {
    let pairs = b.pairs();
    if pairs < 2 {
        return Err(Error::Config("delta identity needs two spare generator pairs".into()));
    }
    let (rp, sp) = (pairs - 2, pairs - 1);
    let etas: Vec<f64> = (0..=f.degree() / 2).map(|i| 0.5 / (1 << i) as f64).collect();
    let norm_val = delta_integral(b, TestFunction::One, etas[0], rp, sp)?;
    let c2 = norm_val.body().inv();
    let mut vals = Vec::new();
    for &eta in &etas {
        let v = delta_integral(b, f, eta, rp, sp)?;
        let one = delta_integral(b, TestFunction::One, eta, rp, sp)?;
        vals.push(v.scale(&one.body().inv()));
    }
    // polynomial extrapolation in eta to 0 (Lagrange at eta = 0)
    let mut result = E::zero(pairs);
    for (i, v) in vals.iter().enumerate() {
        let mut li = 1.0;
        for (j, ej) in etas.iter().enumerate() {
            if i != j {
                li *= (0.0 - ej) / (etas[i] - ej);
            }
        }
        result = &result + &v.scale(&cx(li, 0.0));
    }
    let expect = f.eval(b)?;
    let dev = result.max_deviation(&expect) / expect.max_coeff().max(1.0);
    Ok(DeltaIdentityReport {
        function: format!("{f:?}"),
        regulators: etas,
        max_deviation: dev,
        fitted_normalization: c2,
        passed: dev <= tol,
    })
}

fn delta_integral(b: &SuperMatrix<Complex64>, f: TestFunction, eta: f64, rp: u32, sp: u32) -> Result<E> {
    let pairs = b.pairs();
    let (b11, b22) = (b.get(0, 0).clone(), b.get(1, 1).clone());
    let (r_al, r_be) = sigma_odd(pairs, rp);
    let (s_al, s_be) = sigma_odd(pairs, sp);
    let width = (2.0 * eta).sqrt();
    let rho_rule = gauss_legendre(48).mapped(-12.0 * width, 12.0 * width);
    let s_rule = gauss_hermite(96);
    // G(u) = ∫ ds exp(-eta s^2 - i s u), u even; returned as function of the node
    let g = |u: &E, sign: f64| -> Result<E> {
        let mut acc = E::zero(pairs);
        for (y, w) in s_rule.iter() {
            let s = y / eta.sqrt();
            acc = &acc + &u.scale(&cx(0.0, -sign * s)).exp()?.scale(&cx(w / eta.sqrt(), 0.0));
        }
        Ok(acc)
    };
    let mut g1 = Vec::with_capacity(rho_rule.len());
    let mut g2 = Vec::with_capacity(rho_rule.len());
    for (t, _) in rho_rule.iter() {
        let u1 = b11.scale(&cx(-1.0, 0.0)).add_scalar(b11.body() + t);
        let u2 = b22.scale(&cx(-1.0, 0.0)).add_scalar(b22.body() + t);
        g1.push(g(&u1, 1.0)?);
        g2.push(g(&u2, -1.0)?);
    }
    // odd part of -i str sigma (rho - B): sigma_odd times (rho_odd - B_odd)
    let d_mu = &r_al - b.get(0, 1);
    let d_nu = &r_be - b.get(1, 0);
    let odd_expo = (&(&s_al * &d_nu) - &(&s_be * &d_mu)).scale(&cx(0.0, -1.0));
    let odd_exp = odd_expo.exp()?;
    let mut total = E::zero(pairs);
    for (i, (t1, w1)) in rho_rule.iter().enumerate() {
        for (j, (t2, w2)) in rho_rule.iter().enumerate() {
            let rho = SuperMatrix::from_blocks(
                pairs,
                vec![vec![E::scalar(pairs, cx(b11.body().re + t1, b11.body().im))]],
                vec![vec![r_al.clone()]],
                vec![vec![r_be.clone()]],
                vec![vec![E::scalar(pairs, cx(b22.body().re + t2, b22.body().im))]],
            )?;
            let fr = f.eval(&rho)?;
            let term = &(&(&fr * &g1[i]) * &g2[j]) * &odd_exp;
            total = &total + &term.scale(&cx(w1 * w2, 0.0));
        }
    }
    total.berezin_integrate(&[Gen::zeta(sp), Gen::zeta_star(sp), Gen::zeta(rp), Gen::zeta_star(rp)])
}

/// Ingham-Siegel integral `∫_{S > 0} exp(-tr R S) det^m S d[S]` over
/// Hermitian `N x N` matrices, `N ∈ {1, 2}`, with flat measure.
pub fn ingham_siegel(r: &[Complex64], n: usize, m: u32) -> Result<f64> {
    match n {
        1 => {
            let r = r[0].re;
            if r <= 0.0 {
                return Err(Error::Divergence("Ingham-Siegel needs R > 0".into()));
            }
            let rule = gauss_laguerre(40, 0.0);
            Ok(rule.iter().map(|(t, w)| w * (t / r).powi(m as i32) / r).sum())
        }
        2 => {
            let (r11, r22, r12) = (r[0].re, r[3].re, r[1]);
            if r11 <= 0.0 || r11 * r22 - r12.norm_sqr() <= 0.0 {
                return Err(Error::Divergence("Ingham-Siegel needs R positive definite".into()));
            }
            let eval = |nl: usize, nu: usize, np: usize| -> f64 {
                let lag = gauss_laguerre(nl, f64::from(m) + 1.0);
                let us = composite_legendre(0.0, 1.0, 4, nu);
                let phis = trapezoid_periodic(np);
                let rabs = r12.norm();
                // S = [[a, c], [c*, d]], c = sqrt(a d) u e^{i phi}; d^2c = a d u du dphi
                // tr RS = r11 a + r22 d + 2 Re(r12 c*)
                let mut total = 0.0;
                for (x, wx) in lag.iter() {
                    let a = x / r11;
                    for (y, wy) in lag.iter() {
                        let d = y / r22;
                        let mut inner = 0.0;
                        for (u, wu) in us.iter() {
                            let mut ph = 0.0;
                            for (phi, wp) in phis.iter() {
                                ph += wp * (-2.0 * (a * d).sqrt() * u * rabs * phi.cos()).exp();
                            }
                            inner += wu * u * (1.0 - u * u).powi(m as i32) * ph;
                        }
                        // weights carry x^{m+1} e^{-x}, y^{m+1} e^{-y}
                        total += wx * wy * inner;
                    }
                }
                total / (r11 * r22).powi(m as i32 + 2)
            };
            let lo = eval(32, 8, 32);
            let hi = eval(48, 12, 48);
            if (hi - lo).abs() > 1e-10 * hi.abs() {
                return Err(Error::Convergence(format!("Ingham-Siegel quadrature {lo} vs {hi}")));
            }
            Ok(hi)
        }
        _ => Err(Error::Config("Ingham-Siegel supports N = 1, 2".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InghamSiegelReport {
    pub n: usize,
    pub m: u32,
    pub fitted_exponent: f64,
    pub expected_exponent: f64,
    pub fitted_constant: f64,
    pub exponent_error: f64,
    pub passed: bool,
}

/// Fit `log I(R) = log C + p log det R` over a family of positive
/// definite `R` and compare `p` with `-(m + N)`.
pub fn ingham_siegel_fit(n: usize, m: u32, tol: f64) -> Result<InghamSiegelReport> {
    let family: Vec<Vec<Complex64>> = match n {
        1 => [0.5, 0.8, 1.0, 1.7, 2.9].iter().map(|&r| vec![cx(r, 0.0)]).collect(),
        2 => [(0.9, 1.1, 0.2, 0.1), (1.4, 0.7, -0.15, 0.2), (2.0, 1.5, 0.3, -0.25), (0.6, 0.8, 0.05, 0.1), (1.2, 2.2, -0.3, -0.2)]
            .iter()
            .map(|&(a, d, re, im)| vec![cx(a, 0.0), cx(re, im), cx(re, -im), cx(d, 0.0)])
            .collect(),
        _ => return Err(Error::Config("Ingham-Siegel supports N = 1, 2".into())),
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in &family {
        let det = if n == 1 { r[0].re } else { (r[0] * r[3] - r[1] * r[2]).re };
        xs.push(det.ln());
        ys.push(ingham_siegel(r, n, m)?.ln());
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let intercept = my - slope * mx;
    let expected = -(f64::from(m) + n as f64);
    let err = (slope - expected).abs();
    Ok(InghamSiegelReport {
        n,
        m,
        fitted_exponent: slope,
        expected_exponent: expected,
        fitted_constant: intercept.exp(),
        exponent_error: err,
        passed: err < tol,
    })
}

// --------------------------------------------------------------- saddle

/// Solutions of `s (x - s) = N / 2 gamma`: complex conjugate pair inside
/// the spectrum, two real branches outside.
pub fn pastur_saddle(x: f64, n: usize, gamma: f64) -> (Complex64, Complex64) {
    let r2 = 2.0 * n as f64 / gamma;
    let disc = r2 - x * x;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (cx(x / 2.0, s / 2.0), cx(x / 2.0, -s / 2.0))
    } else {
        let s = (-disc).sqrt();
        (cx((x + s) / 2.0, 0.0), cx((x - s) / 2.0, 0.0))
    }
}

/// Large-`N` level density `(2 / pi) |Im s_0|` implied by the saddle.
pub fn semicircle_density(x: f64, n: usize, gamma: f64) -> f64 {
    2.0 / PI * pastur_saddle(x, n, gamma).0.im.abs()
}

/// Dagger used by the superspace routines of this module.
pub fn adjoint(m: &SuperMatrix<Complex64>) -> SuperMatrix<Complex64> {
    m.dagger(TransposeConvention::MuMinus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_examples() {
        let (a, b) = pastur_saddle(0.0, 2, 1.0);
        assert!((a - cx(0.0, 1.0)).norm() < 1e-15 && (b - cx(0.0, -1.0)).norm() < 1e-15);
        let edge = (4.0f64).sqrt();
        let (a, _) = pastur_saddle(edge, 2, 1.0);
        assert!(a.im.abs() < 1e-15 && (a.re - edge / 2.0).abs() < 1e-15);
        for x in [-1.3, 0.2, 0.9, 3.5] {
            let (s, _) = pastur_saddle(x, 3, 2.0);
            assert!((s * (x - s) - cx(0.75, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn extrapolation_recovers_line() {
        let v = extrapolate_to_zero(&[0.2, 0.1, 0.05], &[1.4, 1.2, 1.1]);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_constant_is_nonzero() {
        let k = hs_measure_constant();
        // i pi * (-2) * (1/2pi) * sign
        assert!((k.norm() - 1.0).abs() < 1e-14, "{k}");
    }

    fn bundle(n: usize, seed: u64) -> VectorBundle {
        VectorBundle::random(Beta::Unitary, n, vec![1], seed, false).unwrap()
    }

    #[test]
    fn keystone_all_beta() {
        for beta in [Beta::Orthogonal, Beta::Unitary, Beta::Symplectic] {
            let b = VectorBundle::random(beta, 2, vec![1], 3, true).unwrap();
            let r = keystone_check_exact::<crate::scalar::ExactComplex>(&b).unwrap();
            assert!(r.passed, "{r:?}");
            let b = VectorBundle::random(beta, 2, vec![1, -1], 5, false).unwrap();
            let r = keystone_check(&b, 1e-12).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn hs_identity_k1() {
        for n in [1, 2] {
            let r = hs_verify(&bundle(n, 11), 0.7, &HsConfig::default(), 1e-8).unwrap();
            eprintln!("{r:?}");
            assert!(r.passed, "{r:?}");
        }
        let cfg = HsConfig { wick_rotation: false, ..HsConfig::default() };
        assert!(matches!(hs_verify(&bundle(1, 1), 1.0, &cfg, 1e-8), Err(Error::Divergence(_))));
    }

    #[test]
    fn superintegral_matches_sdet() {
        let sig = sigma_matrix(1, cx(0.3, 0.1), cx(-0.2, 0.4));
        for n in 1..=2 {
            let r = gaussian_superintegral_check(&sig, &SourceConfig::k1(0.4, 0.1, 0.5), n, 1e-9).unwrap();
            eprintln!("{r:?}");
            assert!(r.passed, "{r:?}");
        }
    }

    fn z_exact_n1(x: f64, j: f64, eps: f64) -> Complex64 {
        let rule = composite_legendre(-12.0, 12.0, 600, 16);
        let mut s = cx(0.0, 0.0);
        for (h, w) in rule.iter() {
            s += w * (-h * h).exp() * cx(h - x - j, eps) / cx(h - x + j, eps);
        }
        s / PI.sqrt()
    }

    #[test]
    fn z_super_n1() {
        for (x, j) in [(0.3, 0.1), (-0.5, 0.05), (1.2, -0.2)] {
            let z = z_super_k1(&SourceConfig::k1(x, j, 0.3), 1, &ZSuperConfig::default()).unwrap();
            let e = z_exact_n1(x, j, 0.3);
            eprintln!("{z} {e}");
            assert!((z - e).norm() < 1e-8);
        }
    }

    #[test]
    fn delta_identity_1_1() {
        let b = bundle(1, 4).dual_pair::<Complex64>().unwrap().b.with_pool(3).unwrap();
        for f in [TestFunction::Str, TestFunction::StrSquared] {
            let r = delta_identity(&b, f, 1e-8).unwrap();
            eprintln!("{r:?}");
            assert!(r.passed);
        }
    }

    #[test]
    fn ingham_siegel_exponent() {
        for n in [1, 2] {
            let r = ingham_siegel_fit(n, 2, 1e-6).unwrap();
            eprintln!("{r:?}");
            assert!(r.passed);
        }
    }
}
