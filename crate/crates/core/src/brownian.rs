//! Crossover ensembles `H(t) = H0 + sqrt(2t) H` and the `k = 1`, `beta = 2`
//! diffusion of the generating function in radial superspace.
//!
//! Radial coordinates `s = diag(s_1, s_2)` (boson, fermion). The boson
//! entry runs parallel to the real axis through `Im r_1`, the fermion entry
//! parallel to the imaginary axis through `Re r_2`; they cross at
//! `s_0 = Re r_2 + i Im r_1`, where the angular coordinates degenerate and
//! the boundary term `Z0(s_0) exp(-str (s_0 - r)^2 / 2t)` appears.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{map_samples, mean_stderr, ratio_statistic, sample_gaussian, spectrum_of, EnsembleClass, EnsembleSpec, SpectrumBatch};
use crate::error::{Error, Result};
use crate::genfun::SourceConfig;
use crate::grassmann::{Gen, GrassmannElement};
use crate::quadrature::{composite_legendre, trapezoid_periodic};
use crate::superlinalg::{berezinian_linear, grading, SuperMatrix};

type E = GrassmannElement<Complex64>;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ------------------------------------------------------------ evolve

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// `H0 = diag(values)`.
    Diagonal { values: Vec<f64> },
    /// Fresh diagonal matrix per sample, entries uniform in `[-w, w]`.
    Poisson { width: f64 },
    /// Dense matrix, row-major real and imaginary parts.
    Matrix { re: Vec<f64>, im: Vec<f64> },
}

impl InitialCondition {
    /// Mean level spacing of `H0` over its spectral span.
    pub fn mean_spacing(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(Error::Config("mean spacing needs N >= 2".into()));
        }
        let span = match self {
            InitialCondition::Diagonal { values } => {
                let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                hi - lo
            }
            InitialCondition::Poisson { width } => 2.0 * width,
            InitialCondition::Matrix { re, im } => {
                let d = (re.len() as f64).sqrt().round() as usize;
                let m = DMatrix::from_fn(d, d, |i, j| cx(re[i * d + j], im.get(i * d + j).copied().unwrap_or(0.0)));
                let ev = m.symmetric_eigenvalues();
                ev.max() - ev.min()
            }
        };
        let spacing = span / if matches!(self, InitialCondition::Poisson { .. }) { n as f64 } else { (n - 1) as f64 };
        if !(spacing > 0.0) {
            return Err(Error::Domain("initial spectrum is degenerate".into()));
        }
        Ok(spacing)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverSpec {
    pub initial: InitialCondition,
    pub class: EnsembleClass,
    pub n: usize,
    /// Fictitious time `t = alpha^2 / 2`.
    pub t: f64,
    pub seed: u64,
    pub samples: usize,
}

impl CrossoverSpec {
    pub fn from_alpha(initial: InitialCondition, class: EnsembleClass, n: usize, alpha: f64, seed: u64, samples: usize) -> Self {
        Self { initial, class, n, t: alpha * alpha / 2.0, seed, samples }
    }

    pub fn alpha(&self) -> f64 {
        (2.0 * self.t).sqrt()
    }
}

fn dim(class: EnsembleClass, n: usize) -> usize {
    if class == EnsembleClass::Gse {
        2 * n
    } else {
        n
    }
}

/// `H0` in the representation of the target class.
fn initial_matrix(spec: &CrossoverSpec, rng: &mut ChaCha8Rng) -> Result<DMatrix<Complex64>> {
    use rand::Rng;
    let n = spec.n;
    let d = dim(spec.class, n);
    let diag = |v: &[f64]| {
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = cx(v[i % n], 0.0);
        }
        m
    };
    match &spec.initial {
        InitialCondition::Diagonal { values } => {
            if values.len() != n {
                return Err(Error::Shape(format!("{} diagonal entries for N = {n}", values.len())));
            }
            Ok(diag(values))
        }
        InitialCondition::Poisson { width } => {
            let v: Vec<f64> = (0..n).map(|_| width * (2.0 * rng.random::<f64>() - 1.0)).collect();
            Ok(diag(&v))
        }
        InitialCondition::Matrix { re, im } => {
            if re.len() != d * d || im.len() != d * d {
                return Err(Error::Shape(format!("H0 must have {d} x {d} entries")));
            }
            let m = DMatrix::from_fn(d, d, |i, j| cx(re[i * d + j], im[i * d + j]));
            if (&m - m.adjoint()).camax() > 1e-12 {
                return Err(Error::Domain("H0 is not Hermitian".into()));
            }
            match spec.class {
                EnsembleClass::Goe if im.iter().any(|&x| x != 0.0) => Err(Error::Domain("H0 is not real symmetric".into())),
                EnsembleClass::Gse if (crate::ensembles::dual(&m) - &m).camax() > 1e-12 => {
                    Err(Error::Domain("H0 is not quaternion self-dual".into()))
                }
                _ => Ok(m),
            }
        }
    }
}

/// Spectra of `H0 + sqrt(2t) H` with `H` from the Gaussian class.
pub fn evolve(spec: &CrossoverSpec) -> Result<SpectrumBatch> {
    if spec.class.is_circular() {
        return Err(Error::Config("crossover needs a Gaussian target class".into()));
    }
    if spec.t < 0.0 {
        return Err(Error::Domain("fictitious time must be non-negative".into()));
    }
    EnsembleSpec::new(spec.class, spec.n, spec.seed, spec.samples).validate()?;
    {
        // class check once, before sampling
        let mut rng = crate::ensembles::chunk_rng(spec.seed, usize::MAX);
        initial_matrix(spec, &mut rng)?;
    }
    let scale = (2.0 * spec.t).sqrt();
    let res = map_samples(spec.seed, spec.samples, |rng| {
        let h0 = initial_matrix(spec, rng).expect("checked");
        let h = if spec.t == 0.0 { h0 } else { h0 + sample_gaussian(spec.class, spec.n, rng) * cx(scale, 0.0) };
        spectrum_of(spec.class, h)
    });
    let verified = res.iter().all(|(_, ok)| *ok);
    Ok(SpectrumBatch {
        spec: EnsembleSpec::new(spec.class, spec.n, spec.seed, spec.samples),
        spectra: res.into_iter().map(|(s, _)| s).collect(),
        degeneracy_verified: (spec.class == EnsembleClass::Gse).then_some(verified),
        unfolded: false,
        window: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverPoint {
    pub t: f64,
    /// `t / D^2` with `D` the mean spacing of the initial spectrum.
    pub tau: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

/// Mean spacing-ratio statistic along a time grid.
pub fn crossover_sweep(base: &CrossoverSpec, times: &[f64]) -> Result<Vec<CrossoverPoint>> {
    let d = base.initial.mean_spacing(base.n)?;
    times
        .iter()
        .map(|&t| {
            let spec = CrossoverSpec { t, ..base.clone() };
            let batch = evolve(&spec)?;
            let (ratio, ratio_stderr) = ratio_statistic(&batch);
            Ok(CrossoverPoint { t, tau: t / (d * d), ratio, ratio_stderr })
        })
        .collect()
}

// ---------------------------------------------------- initial condition

/// `prod_n (s_2 + lambda_n) / (s_1 + lambda_n)`, the `k = 1` value of
/// `sdet^{-1}(s ⊗ 1 + 1 ⊗ H0)`.
pub fn z0_initial(s1: Complex64, s2: Complex64, eigenvalues: &[f64], tol: f64) -> Result<Complex64> {
    let mut z = cx(1.0, 0.0);
    for &l in eigenvalues {
        let den = s1 + l;
        if den.norm() < tol {
            return Err(Error::Singularity(format!("s_1 = {s1} within {tol:e} of -lambda = {}", -l)));
        }
        z *= (s2 + l) / den;
    }
    Ok(z)
}

/// Eigenvalues of a Hermitian `H0`.
pub fn spectrum(h0: &DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = h0.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

// ------------------------------------------------------------ propagator

/// `u = exp([[0, alpha], [beta, 0]])` and its inverse; the series stops
/// after the quadratic term.
fn angular(pairs: u32) -> (SuperMatrix<Complex64>, SuperMatrix<Complex64>) {
    let al = E::generator(pairs, Gen::zeta(0)).expect("pool");
    let be = E::generator(pairs, Gen::zeta_star(0)).expect("pool");
    let z = E::zero(pairs);
    let m = SuperMatrix::from_blocks(pairs, vec![vec![z.clone()]], vec![vec![al]], vec![vec![be]], vec![vec![z]]).expect("graded");
    let one = SuperMatrix::identity(pairs, grading(1, 1));
    let m2 = m.try_mul(&m).expect("square").scale(&cx(0.5, 0.0));
    let u = one.try_add(&m).and_then(|x| x.try_add(&m2)).expect("square");
    let ui = one.try_sub(&m).and_then(|x| x.try_add(&m2)).expect("square");
    (u, ui)
}

fn radial(pairs: u32, s1: Complex64, s2: Complex64) -> SuperMatrix<Complex64> {
    SuperMatrix::from_scalars(pairs, grading(1, 1), &[s1, cx(0.0, 0.0), cx(0.0, 0.0), s2]).expect("graded")
}

/// Berezinian of `(s_1, s_2, alpha, beta) -> sigma = u^{-1} s u`, from the
/// block Jacobian `[[d sigma_even / d s, d sigma_even / d theta], [d
/// sigma_odd / d s, d sigma_odd / d theta]]`.
pub fn berezinian_k1(s1: Complex64, s2: Complex64) -> Result<E> {
    let pairs = 1;
    let (u, ui) = angular(pairs);
    let sig = |a: Complex64, b: Complex64| ui.try_mul(&radial(pairs, a, b)).and_then(|x| x.try_mul(&u));
    let sigma = sig(s1, s2)?;
    // sigma is linear in s
    let d1 = sig(cx(1.0, 0.0), cx(0.0, 0.0))?;
    let d2 = sig(cx(0.0, 0.0), cx(1.0, 0.0))?;
    let even = [(0, 0), (1, 1)];
    let odd = [(0, 1), (1, 0)];
    let thetas = [Gen::zeta(0), Gen::zeta_star(0)];
    let mut data = Vec::with_capacity(16);
    for &(i, j) in even.iter().chain(odd.iter()) {
        data.push(d1.get(i, j).clone());
        data.push(d2.get(i, j).clone());
        for &g in &thetas {
            data.push(sigma.get(i, j).left_derivative(g)?);
        }
    }
    let jac = SuperMatrix::new(pairs, grading(2, 2), grading(2, 2), data)?;
    berezinian_linear(&jac)
}

/// Body of [`berezinian_k1`]; proportional to `1 / (s_1 - s_2)^2`.
pub fn b1(s1: Complex64, s2: Complex64) -> Result<Complex64> {
    Ok(berezinian_k1(s1, s2)?.body())
}

/// `∫ d alpha d beta exp((1/t) str u^{-1} s u r)`, exact.
pub fn angular_integral(s: (Complex64, Complex64), r: (Complex64, Complex64), t: f64) -> Result<Complex64> {
    let pairs = 1;
    let (u, ui) = angular(pairs);
    let x = ui.try_mul(&radial(pairs, s.0, s.1))?.try_mul(&u)?.try_mul(&radial(pairs, r.0, r.1))?;
    let e = x.supertrace()?.scale(&cx(1.0 / t, 0.0)).exp()?;
    Ok(e.berezin_integrate(&[Gen::zeta(0), Gen::zeta_star(0)])?.body())
}

/// Constants fixed once from the symbolic results: the angular integral
/// `kappa (s_1 - s_2)(r_1 - r_2) / t exp(str sr / t)` and the Berezinian
/// `kappa_b / (s_1 - s_2)^2`.
fn constants() -> (Complex64, Complex64) {
    use std::sync::OnceLock;
    static K: OnceLock<(Complex64, Complex64)> = OnceLock::new();
    *K.get_or_init(|| {
        let s = (cx(2.0, 0.0), cx(1.0, 0.0));
        let r = (cx(1.0, 0.0), cx(0.0, 0.0));
        let y = angular_integral(s, r, 1.0).expect("pool");
        let kappa = y / cx(2.0, 0.0).exp();
        let kb = b1(s.0, s.1).expect("pool");
        (kappa, kb)
    })
}

/// `c = 1 / (2 pi i kappa kappa_b)`: the bulk integral of the propagator
/// against the Berezinian plus the boundary term is then 1.
pub fn propagator_constant() -> Complex64 {
    let (k, kb) = constants();
    cx(1.0, 0.0) / (cx(0.0, 2.0 * PI) * k * kb)
}

/// `Gamma_1(s, r, t) = c exp(-str(s^2 + r^2) / 2t) ∫ d mu(u) exp(str u^{-1} s u r / t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorValue {
    pub value: Complex64,
    /// Weight `exp(-str (s_0 - r)^2 / 2t)` of the boundary contribution at
    /// the crossing point of the contours through `r`.
    pub boundary: Complex64,
}

pub fn propagator_k1(s: (Complex64, Complex64), r: (Complex64, Complex64), t: f64) -> Result<PropagatorValue> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("fictitious time must be positive, got {t}")));
    }
    let gauss = (-(s.0 * s.0 - s.1 * s.1 + r.0 * r.0 - r.1 * r.1) / (2.0 * t)).exp();
    let y = angular_integral(s, r, t)?;
    Ok(PropagatorValue { value: propagator_constant() * gauss * y, boundary: boundary_weight(r, t) })
}

/// `B_1(s) Gamma_1(s, r, t)` from the constants of the symbolic results.
fn kernel(s: (Complex64, Complex64), r: (Complex64, Complex64), t: f64) -> Complex64 {
    let (k, kb) = constants();
    let e = (-((s.0 - r.0).powi(2) - (s.1 - r.1).powi(2)) / (2.0 * t)).exp();
    propagator_constant() * k * kb * (r.0 - r.1) / (t * (s.0 - s.1)) * e
}

pub fn crossing_point(r: (Complex64, Complex64)) -> Complex64 {
    cx(r.1.re, r.0.im)
}

fn boundary_weight(r: (Complex64, Complex64), t: f64) -> Complex64 {
    let s0 = crossing_point(r);
    (-((s0 - r.0).powi(2) - (s0 - r.1).powi(2)) / (2.0 * t)).exp()
}

/// Quadrature settings of the radial integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialQuadrature {
    pub panels: usize,
    pub order: usize,
    pub angles: usize,
    /// Radial cutoff in units of `sqrt(t)` beyond the Gaussian centres.
    pub reach: f64,
}

impl Default for RadialQuadrature {
    fn default() -> Self {
        Self { panels: 24, order: 16, angles: 256, reach: 11.0 }
    }
}

impl RadialQuadrature {
    fn doubled(&self) -> Self {
        Self { panels: 2 * self.panels, order: self.order, angles: 2 * self.angles, reach: self.reach }
    }
}

/// Bulk and boundary parts of a radial integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialResult {
    pub bulk: Complex64,
    pub boundary: Complex64,
    pub total: Complex64,
    /// Change of the total under node doubling.
    pub residual: f64,
}

fn radial_once(
    f: &(dyn Fn(Complex64, Complex64) -> Result<Complex64> + Sync),
    r: (Complex64, Complex64),
    t: f64,
    extra: &[(Complex64, Complex64)],
    q: &RadialQuadrature,
) -> Result<Complex64> {
    use rayon::prelude::*;
    let s0 = crossing_point(r);
    // centres in the (X, Y) plane, s_1 = s_0 + X, s_2 = s_0 + i Y
    let centre = |p: (Complex64, Complex64)| ((p.0 - s0).re, ((p.1 - s0) / cx(0.0, 1.0)).re);
    let mut reach = 0.0f64;
    for p in std::iter::once(r).chain(extra.iter().copied()) {
        let (x, y) = centre(p);
        reach = reach.max(x.hypot(y));
    }
    let rho_max = reach + q.reach * t.sqrt();
    let rho = composite_legendre(0.0, rho_max, q.panels, q.order);
    let th = trapezoid_periodic(q.angles);
    let parts: Vec<Result<Complex64>> = rho
        .nodes
        .par_iter()
        .zip(rho.weights.par_iter())
        .map(|(&rh, &wr)| {
            let mut acc = cx(0.0, 0.0);
            for (theta, wt) in th.iter() {
                let s1 = s0 + rh * theta.cos();
                let s2 = s0 + cx(0.0, rh * theta.sin());
                acc += wt * kernel((s1, s2), r, t) * f(s1, s2)?;
            }
            // d s_1 d s_2 = i rho d rho d theta
            Ok(acc * cx(0.0, wr * rh))
        })
        .collect();
    let mut sum = cx(0.0, 0.0);
    for p in parts {
        sum += p?;
    }
    Ok(sum)
}

/// `∫ Gamma_1(s, r, t) f(s) B_1(s) d[s]` including the boundary term
/// `f(s_0, s_0) exp(-str (s_0 - r)^2 / 2t)`. `extra` lists other points the
/// integrand is concentrated at.
pub fn radial_integral(
    f: &(dyn Fn(Complex64, Complex64) -> Result<Complex64> + Sync),
    r: (Complex64, Complex64),
    t: f64,
    extra: &[(Complex64, Complex64)],
    q: &RadialQuadrature,
) -> Result<RadialResult> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("fictitious time must be positive, got {t}")));
    }
    let s0 = crossing_point(r);
    let boundary = f(s0, s0)? * boundary_weight(r, t);
    let lo = radial_once(f, r, t, extra, q)?;
    let hi = radial_once(f, r, t, extra, &q.doubled())?;
    let residual = (hi - lo).norm();
    if residual > 1e-6 * hi.norm().max(1.0) {
        return Err(Error::Convergence(format!("radial quadrature changed by {residual:.2e} under doubling")));
    }
    Ok(RadialResult { bulk: hi, boundary, total: hi + boundary, residual })
}

/// Radial point for energy `x`, source `j`, increment `eps` with `L = 1`:
/// `r_1 = -x + i eps + j`, `r_2 = -x + i eps - j`.
pub fn radial_point(x: f64, j: f64, eps: f64) -> (Complex64, Complex64) {
    (cx(-x + j, eps), cx(-x - j, eps))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionReport {
    pub t: f64,
    pub x: f64,
    pub j: f64,
    pub eps: f64,
    pub radial: Complex64,
    pub bulk: Complex64,
    pub boundary: Complex64,
    pub monte_carlo: Complex64,
    pub monte_carlo_stderr: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `Z_1(r, t)` from the radial convolution and from Monte Carlo over
/// `H0 + sqrt(2t) H`, `H` from the GUE.
pub fn convolution_check(
    h0: &[f64],
    src: &SourceConfig,
    t: f64,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ConvolutionReport> {
    src.validate()?;
    if h0.len() > 8 {
        return Err(Error::Config("convolution check supports N <= 8".into()));
    }
    let (x, j, eps) = (src.x[0], src.j[0], src.eps);
    let r = radial_point(x, j, eps);
    let f = |s1: Complex64, s2: Complex64| z0_initial(s1, s2, h0, 1e-12);
    let rad = radial_integral(&f, r, t, &[], &RadialQuadrature::default())?;
    let spec = CrossoverSpec {
        initial: InitialCondition::Diagonal { values: h0.to_vec() },
        class: EnsembleClass::Gue,
        n: h0.len(),
        t,
        seed,
        samples,
    };
    let batch = evolve(&spec)?;
    let vals: Vec<Complex64> = batch.spectra.iter().map(|s| crate::ensembles::ratio_product(s, src)).collect();
    let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
    let im: Vec<f64> = vals.iter().map(|v| v.im).collect();
    let (mr, er) = mean_stderr(&re);
    let (mi, ei) = mean_stderr(&im);
    let mc = cx(mr, mi);
    let dev = (rad.total - mc).norm();
    Ok(ConvolutionReport {
        t,
        x,
        j,
        eps,
        radial: rad.total,
        bulk: rad.bulk,
        boundary: rad.boundary,
        monte_carlo: mc,
        monte_carlo_stderr: er.hypot(ei),
        deviation: dev,
        tolerance: tol,
        passed: dev <= tol,
    })
}

/// Closed form of [`propagator_k1`] assembled from the symbolic constants.
pub fn propagator_closed(s: (Complex64, Complex64), r: (Complex64, Complex64), t: f64) -> Complex64 {
    let (k, _) = constants();
    let e = (-((s.0 - r.0).powi(2) - (s.1 - r.1).powi(2)) / (2.0 * t)).exp();
    propagator_constant() * k * (s.0 - s.1) * (r.0 - r.1) / t * e
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorCheck {
    pub name: String,
    pub value: Complex64,
    pub expected: Complex64,
    pub boundary: Complex64,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropagatorCheck {
    fn new(name: &str, res: RadialResult, expected: Complex64, tol: f64) -> Self {
        let deviation = (res.total - expected).norm() / expected.norm().max(1e-3);
        Self { name: name.into(), value: res.total, expected, boundary: res.boundary, deviation, tolerance: tol, passed: deviation <= tol }
    }
}

/// `∫ Gamma_1(s, r, t) B_1(s) d[s] = 1`.
pub fn normalization_check(r: (Complex64, Complex64), t: f64, tol: f64) -> Result<PropagatorCheck> {
    let one = |_: Complex64, _: Complex64| Ok(cx(1.0, 0.0));
    let res = radial_integral(&one, r, t, &[], &RadialQuadrature::default())?;
    Ok(PropagatorCheck::new("normalization", res, cx(1.0, 0.0), tol))
}

/// `∫ Gamma_1(s, q, t_1) Gamma_1(q, r, t_2) B_1(q) d[q] = Gamma_1(s, r, t_1 + t_2)`.
pub fn semigroup_check(s: (Complex64, Complex64), r: (Complex64, Complex64), t1: f64, t2: f64, tol: f64) -> Result<PropagatorCheck> {
    let f = |q1: Complex64, q2: Complex64| Ok(propagator_closed(s, (q1, q2), t1));
    let q = RadialQuadrature::default();
    let q = RadialQuadrature { reach: q.reach * (t1 / t2).max(1.0).sqrt(), ..q };
    let res = radial_integral(&f, r, t2, &[s], &q)?;
    Ok(PropagatorCheck::new("semigroup", res, propagator_closed(s, r, t1 + t2), tol))
}

/// Convolution of the propagator with a smooth test function at small `t`
/// against the value of the function at `r`.
pub fn delta_limit_check(r: (Complex64, Complex64), t: f64, tol: f64) -> Result<PropagatorCheck> {
    let f = |s1: Complex64, s2: Complex64| Ok((0.3 * s1 - 0.2 * s2).exp() * (s2 + 2.0) / (s1 + 2.0));
    let res = radial_integral(&f, r, t, &[], &RadialQuadrature::default())?;
    let expected = f(r.0, r.1)?;
    Ok(PropagatorCheck::new("delta-limit", res, expected, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn berezinian_is_inverse_square() {
        let kb = b1(cx(2.0, 0.0), cx(1.0, 0.0)).unwrap();
        for (a, b) in [(cx(0.3, 0.1), cx(-0.2, 0.7)), (cx(1.5, 0.0), cx(0.0, 2.0))] {
            let v = b1(a, b).unwrap();
            assert!((v * (a - b).powi(2) - kb).norm() < 1e-12);
        }
    }

    #[test]
    fn angular_integral_structure() {
        let s = (cx(0.4, 0.1), cx(-0.3, 0.5));
        let r = (cx(1.1, 0.2), cx(0.2, -0.4));
        let t = 0.7;
        let (kappa, _) = constants();
        let y = angular_integral(s, r, t).unwrap();
        let expect = kappa * (s.0 - s.1) * (r.0 - r.1) / t * ((s.0 * r.0 - s.1 * r.1) / t).exp();
        assert!((y - expect).norm() < 1e-12);
    }

    #[test]
    fn kernel_matches_symbolic() {
        let r = (cx(0.2, 0.3), cx(-0.5, 0.3));
        for s in [(cx(0.1, 0.3), cx(-0.5, 0.9)), (cx(1.4, 0.3), cx(-0.5, -1.2))] {
            let sym = b1(s.0, s.1).unwrap() * propagator_k1(s, r, 0.4).unwrap().value;
            assert!((sym - kernel(s, r, 0.4)).norm() < 1e-12 * sym.norm());
        }
    }

    #[test]
    fn z0_examples() {
        let s1 = cx(0.5, 0.2);
        let s2 = cx(-0.3, 0.1);
        let z = z0_initial(s1, s2, &[0.0; 3], 1e-12).unwrap();
        assert!((z - (s2 / s1).powi(3)).norm() < 1e-14);
        assert_eq!(z0_initial(s1, s1, &[0.3, -1.0], 1e-12).unwrap(), cx(1.0, 0.0));
        assert!(matches!(z0_initial(cx(-0.3, 0.0), s2, &[0.3], 1e-9), Err(Error::Singularity(_))));
        assert!(matches!(propagator_k1((s1, s2), (s1, s2), 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn normalization_semigroup_delta() {
        for (r, t) in [(radial_point(0.3, 0.2, 0.1), 0.5), (radial_point(-0.7, 0.05, 0.3), 1.0)] {
            let c = normalization_check(r, t, 1e-6).unwrap();
            assert!(c.passed, "{c:?}");
        }
        let r = radial_point(0.3, 0.2, 0.1);
        let s = radial_point(-0.2, 0.4, 0.1);
        for (t1, t2) in [(0.3, 0.5), (0.5, 0.2)] {
            let c = semigroup_check(s, r, t1, t2, 1e-6).unwrap();
            eprintln!("{c:?}");
            assert!(c.passed, "{c:?}");
        }
        let c = delta_limit_check(r, 1e-3, 1e-2).unwrap();
        eprintln!("{c:?}");
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn evolve_time_zero_and_alpha() {
        let init = InitialCondition::Diagonal { values: vec![-1.0, 0.5, 2.0] };
        let spec = CrossoverSpec { initial: init.clone(), class: EnsembleClass::Gue, n: 3, t: 0.0, seed: 1, samples: 4 };
        let b = evolve(&spec).unwrap();
        assert!(b.spectra.iter().all(|s| s == &vec![-1.0, 0.5, 2.0]));
        let a = CrossoverSpec::from_alpha(init.clone(), EnsembleClass::Gue, 3, 0.8, 5, 10);
        let t = CrossoverSpec { t: 0.32, ..a.clone() };
        assert_eq!(evolve(&a).unwrap(), evolve(&t).unwrap());
        let bad = CrossoverSpec {
            initial: InitialCondition::Matrix { re: vec![0.0; 4], im: vec![0.0, 1.0, -1.0, 0.0] },
            class: EnsembleClass::Goe,
            n: 2,
            t: 0.1,
            seed: 1,
            samples: 2,
        };
        assert!(matches!(evolve(&bad), Err(Error::Domain(_))));
    }
}
