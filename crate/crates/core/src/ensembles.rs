//! Gaussian and circular random-matrix ensembles and spectral statistics.
//!
//! Gaussian classes are sampled from `P(H) ∝ exp(-beta tr H^2 / 2)`; the
//! GSE uses the `2N x 2N` complex representation with the trace taken
//! there. The semicircle radius is then `sqrt(2N / gamma)` for all three
//! classes.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::duality::Beta;
use crate::error::{Error, Result};
use crate::genfun::SourceConfig;
use crate::quadrature::gauss_legendre;

/// Largest matrix dimension accepted by the samplers.
pub const MAX_DIMENSION: usize = 2048;
/// Samples drawn from one random stream.
pub const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleClass {
    Goe,
    Gue,
    Gse,
    Coe,
    Cue,
    Cse,
}

impl EnsembleClass {
    pub fn beta(self) -> Beta {
        match self {
            EnsembleClass::Goe | EnsembleClass::Coe => Beta::Orthogonal,
            EnsembleClass::Gue | EnsembleClass::Cue => Beta::Unitary,
            EnsembleClass::Gse | EnsembleClass::Cse => Beta::Symplectic,
        }
    }

    pub fn is_circular(self) -> bool {
        matches!(self, EnsembleClass::Coe | EnsembleClass::Cue | EnsembleClass::Cse)
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "goe" => EnsembleClass::Goe,
            "gue" => EnsembleClass::Gue,
            "gse" => EnsembleClass::Gse,
            "coe" => EnsembleClass::Coe,
            "cue" => EnsembleClass::Cue,
            "cse" => EnsembleClass::Cse,
            other => return Err(Error::Config(format!("unknown ensemble class {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub class: EnsembleClass,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
}

impl EnsembleSpec {
    pub fn new(class: EnsembleClass, n: usize, seed: u64, samples: usize) -> Self {
        Self { class, n, seed, samples }
    }

    pub fn beta(&self) -> Beta {
        self.class.beta()
    }

    /// Semicircle radius `sqrt(2N / gamma)`.
    pub fn radius(&self) -> f64 {
        (2.0 * self.n as f64 / self.beta().gamma()).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let dim = if self.class == EnsembleClass::Gse || self.class == EnsembleClass::Cse { 2 * self.n } else { self.n };
        if self.n == 0 {
            return Err(Error::Config("matrix dimension must be positive".into()));
        }
        if dim > MAX_DIMENSION {
            return Err(Error::Resource(format!("dimension {dim} exceeds {MAX_DIMENSION}")));
        }
        Ok(())
    }

    /// Hex digest of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("serializable");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Sorted spectra; phase angles in `[0, 2 pi)` for circular classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBatch {
    pub spec: EnsembleSpec,
    pub spectra: Vec<Vec<f64>>,
    /// `Some(true)` when every quaternion spectrum was doubly degenerate.
    pub degeneracy_verified: Option<bool>,
    pub unfolded: bool,
    /// Retained window in unfolded units.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
}

impl SpectrumBatch {
    pub fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        self.spectra.iter().flatten().copied()
    }

    pub fn num_levels(&self) -> usize {
        self.spectra.iter().map(Vec::len).sum()
    }
}

fn normal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

fn cnormal(rng: &mut ChaCha8Rng, sd: f64) -> Complex64 {
    Complex64::new(normal(rng, sd), normal(rng, sd))
}

/// One matrix of a Gaussian class, complex representation.
pub fn sample_gaussian(class: EnsembleClass, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    match class {
        EnsembleClass::Goe => {
            let mut h = DMatrix::zeros(n, n);
            for i in 0..n {
                h[(i, i)] = Complex64::new(normal(rng, 1.0), 0.0);
                for j in i + 1..n {
                    let v = Complex64::new(normal(rng, 0.5f64.sqrt()), 0.0);
                    h[(i, j)] = v;
                    h[(j, i)] = v;
                }
            }
            h
        }
        EnsembleClass::Gue => {
            let mut h = DMatrix::zeros(n, n);
            for i in 0..n {
                h[(i, i)] = Complex64::new(normal(rng, 0.5f64.sqrt()), 0.0);
                for j in i + 1..n {
                    let v = cnormal(rng, 0.5);
                    h[(i, j)] = v;
                    h[(j, i)] = v.conj();
                }
            }
            h
        }
        EnsembleClass::Gse => {
            // [[A, B], [-B*, A*]], A Hermitian, B antisymmetric
            let mut h = DMatrix::zeros(2 * n, 2 * n);
            let sd = 0.25;
            for i in 0..n {
                let d = Complex64::new(normal(rng, 8f64.sqrt().recip()), 0.0);
                h[(i, i)] = d;
                h[(n + i, n + i)] = d;
                for j in i + 1..n {
                    let a = cnormal(rng, sd);
                    let b = cnormal(rng, sd);
                    h[(i, j)] = a;
                    h[(j, i)] = a.conj();
                    h[(n + i, n + j)] = a.conj();
                    h[(n + j, n + i)] = a;
                    h[(i, n + j)] = b;
                    h[(j, n + i)] = -b;
                    h[(n + i, j)] = -b.conj();
                    h[(n + j, i)] = b.conj();
                }
            }
            h
        }
        _ => panic!("not a Gaussian class"),
    }
}

/// Haar unitary from QR of a complex Ginibre matrix with the phases of
/// `diag R` divided out.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| cnormal(rng, 0.5f64.sqrt()));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// `J U^T J^{-1}` with `J = [[0, 1], [-1, 0]] ⊗ 1_N`.
pub fn dual(u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = u.nrows() / 2;
    let t = u.transpose();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        for j in 0..2 * n {
            // (J T J^T)_{ij}
            let (si, ii) = if i < n { (1.0, i + n) } else { (-1.0, i - n) };
            let (sj, jj) = if j < n { (1.0, j + n) } else { (-1.0, j - n) };
            out[(i, j)] = t[(ii, jj)] * (si * sj);
        }
    }
    out
}

/// One matrix of a circular class.
pub fn sample_circular(class: EnsembleClass, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    match class {
        EnsembleClass::Cue => haar_unitary(n, rng),
        EnsembleClass::Coe => {
            let u = haar_unitary(n, rng);
            u.transpose() * u
        }
        EnsembleClass::Cse => {
            let u = haar_unitary(2 * n, rng);
            dual(&u) * u
        }
        _ => panic!("not a circular class"),
    }
}

fn hermitian_spectrum(h: DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn unitary_phases(u: DMatrix<Complex64>) -> Vec<f64> {
    let ev = Schur::new(u).eigenvalues().expect("triangular factor");
    let mut ph: Vec<f64> = ev.iter().map(|z| z.arg().rem_euclid(2.0 * PI)).collect();
    ph.sort_by(f64::total_cmp);
    ph
}

/// Keep one level of each degenerate pair; reports whether all pairs
/// agreed to `tol`.
fn collapse(levels: &[f64], tol: f64) -> (Vec<f64>, bool) {
    let mut ok = true;
    let mut out = Vec::with_capacity(levels.len() / 2);
    for p in levels.chunks(2) {
        if p.len() != 2 || (p[1] - p[0]).abs() > tol {
            ok = false;
        }
        out.push(0.5 * (p[0] + p[p.len() - 1]));
    }
    (out, ok)
}

/// Per-chunk generator: master seed with the chunk index as stream.
pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Spectrum of one sampled matrix, degeneracy collapsed.
pub fn spectrum_of(class: EnsembleClass, m: DMatrix<Complex64>) -> (Vec<f64>, bool) {
    let levels = if class.is_circular() { unitary_phases(m) } else { hermitian_spectrum(m) };
    match class {
        EnsembleClass::Gse => {
            let scale = levels.iter().fold(1.0f64, |a, b| a.max(b.abs()));
            collapse(&levels, 1e-10 * scale)
        }
        EnsembleClass::Cse => {
            // a pair may straddle 0 = 2 pi
            let mut l = levels;
            if l.len() >= 2 && (l[0] + 2.0 * PI - l[l.len() - 1]).abs() < 1e-8 && (l[1] - l[0]).abs() > 1e-8 {
                let last = l.pop().expect("nonempty");
                l.insert(0, last - 2.0 * PI);
            }
            let (mut c, ok) = collapse(&l, 1e-10);
            for v in c.iter_mut() {
                *v = v.rem_euclid(2.0 * PI);
            }
            c.sort_by(f64::total_cmp);
            (c, ok)
        }
        _ => (levels, true),
    }
}

/// Run `f` once per sample with deterministic per-chunk streams.
pub fn map_samples<T: Send>(seed: u64, samples: usize, f: impl Fn(&mut ChaCha8Rng) -> T + Sync) -> Vec<T> {
    let chunks = samples.div_ceil(CHUNK);
    let out: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let count = CHUNK.min(samples - c * CHUNK);
            (0..count).map(|_| f(&mut rng)).collect()
        })
        .collect();
    out.into_iter().flatten().collect()
}

pub fn sample(spec: &EnsembleSpec) -> Result<SpectrumBatch> {
    spec.validate()?;
    let class = spec.class;
    let n = spec.n;
    let res = map_samples(spec.seed, spec.samples, |rng| {
        let m = if class.is_circular() { sample_circular(class, n, rng) } else { sample_gaussian(class, n, rng) };
        spectrum_of(class, m)
    });
    let verified = res.iter().all(|(_, ok)| *ok);
    let spectra = res.into_iter().map(|(s, _)| s).collect();
    let quaternion = matches!(class, EnsembleClass::Gse | EnsembleClass::Cse);
    Ok(SpectrumBatch { spec: spec.clone(), spectra, degeneracy_verified: quaternion.then_some(verified), unfolded: false, window: None })
}

/// Analytic `<tr H^2>`: number of real degrees of freedom over beta.
pub fn second_moment(class: EnsembleClass, n: usize) -> f64 {
    let n = n as f64;
    match class {
        EnsembleClass::Goe => n * (n + 1.0) / 2.0,
        EnsembleClass::Gue => n * n / 2.0,
        EnsembleClass::Gse => n * (2.0 * n - 1.0) / 4.0,
        _ => f64::NAN,
    }
}

// ----------------------------------------------------------- estimates

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    R1,
    Spacing,
    Y2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub kind: EstimatorKind,
    /// Bin edges (`values.len() + 1` entries).
    pub edges: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub metadata: serde_json::Value,
    /// Set when more than 20% of bins have relative error above 50%.
    pub low_statistics: bool,
}

impl CorrelationEstimate {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// `∫ values` over the grid.
    pub fn integral(&self) -> (f64, f64) {
        let mut v = 0.0;
        let mut e = 0.0;
        for i in 0..self.values.len() {
            v += self.values[i] * self.width(i);
            e += (self.stderr[i] * self.width(i)).powi(2);
        }
        (v, e.sqrt())
    }

    /// CSV with a leading `# config:` line.
    pub fn to_csv(&self, config: &serde_json::Value) -> String {
        let mut s = format!("# config: {}\n", serde_json::to_string(config).expect("json"));
        s.push_str("x,value,stderr\n");
        for (i, c) in self.centers().iter().enumerate() {
            s.push_str(&format!("{c:.10e},{:.10e},{:.10e}\n", self.values[i], self.stderr[i]));
        }
        s
    }

    fn flag(&mut self) {
        let bad = self.values.iter().zip(&self.stderr).filter(|(v, e)| !(e.abs() <= 0.5 * v.abs())).count();
        self.low_statistics = bad * 5 > self.values.len();
    }
}

/// Freedman-Diaconis bin width of a sample.
pub fn freedman_diaconis(data: &[f64]) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
    2.0 * (q(0.75) - q(0.25)) / (v.len() as f64).cbrt()
}

/// Uniform bin edges covering `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
}

/// Default grid: Freedman-Diaconis width over the pooled levels.
pub fn default_edges(batch: &SpectrumBatch) -> Vec<f64> {
    let all: Vec<f64> = batch.levels().collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = freedman_diaconis(&all).max((hi - lo) * 1e-4);
    let bins = ((hi - lo) / w).ceil().max(1.0) as usize;
    uniform_edges(lo, lo + bins as f64 * w, bins)
}

fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    if x < edges[0] || x >= edges[edges.len() - 1] {
        return None;
    }
    let i = edges.partition_point(|&e| e <= x);
    Some(i - 1)
}

/// Histogram of the level density normalized to `∫ R_1 = N`.
pub fn estimate_r1(batch: &SpectrumBatch, edges: &[f64]) -> Result<CorrelationEstimate> {
    if batch.spectra.is_empty() {
        return Err(Error::Statistics("empty batch".into()));
    }
    let mut counts = vec![0.0f64; edges.len() - 1];
    for x in batch.levels() {
        if let Some(i) = bin_index(edges, x) {
            counts[i] += 1.0;
        }
    }
    let m = batch.spectra.len() as f64;
    let mut est = CorrelationEstimate {
        kind: EstimatorKind::R1,
        edges: edges.to_vec(),
        values: Vec::new(),
        stderr: Vec::new(),
        metadata: serde_json::json!({"spec": batch.spec, "binning": "explicit", "bins": counts.len()}),
        low_statistics: false,
    };
    for (i, c) in counts.iter().enumerate() {
        let w = edges[i + 1] - edges[i];
        est.values.push(c / (m * w));
        est.stderr.push(if *c > 0.0 { c.sqrt() / (m * w) } else { f64::INFINITY });
    }
    est.flag();
    Ok(est)
}

/// Monte Carlo `pi^{-1} Im tr (x - i eps - H)^{-1}` with its standard error.
pub fn resolvent_r1(batch: &SpectrumBatch, x: f64, eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0) {
        return Err(Error::Config("increment must be positive".into()));
    }
    let vals: Vec<f64> = batch
        .spectra
        .iter()
        .map(|s| s.iter().map(|l| eps / ((x - l).powi(2) + eps * eps)).sum::<f64>() / PI)
        .collect();
    Ok(mean_stderr(&vals))
}

pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// Semicircle density of `N` levels with radius `sqrt(2N / gamma)`.
pub fn semicircle(x: f64, n: usize, gamma: f64) -> f64 {
    let r2 = 2.0 * n as f64 / gamma;
    if x * x >= r2 {
        0.0
    } else {
        2.0 * n as f64 / (PI * r2) * (r2 - x * x).sqrt()
    }
}

/// Bin average of `f` over `[a, b]`.
pub fn bin_average(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre(24).mapped(a, b);
    rule.iter().map(|(x, w)| w * f(x)).sum::<f64>() / (b - a)
}

// ------------------------------------------------------------ unfolding

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum UnfoldMethod {
    /// `N F(x / R)` with the semicircle distribution; levels whose
    /// unfolded position lies outside the central `keep` fraction are
    /// discarded.
    SemicircleCdf { keep: f64 },
    /// Least-squares polynomial fit to the ensemble-averaged staircase.
    PolynomialFit { degree: usize, keep: f64 },
    /// `N theta / 2 pi` for circular classes.
    CircleUniform,
}

impl Default for UnfoldMethod {
    fn default() -> Self {
        UnfoldMethod::SemicircleCdf { keep: 0.8 }
    }
}

/// Fitted unfolding map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingMap {
    pub method: UnfoldMethod,
    pub radius: f64,
    pub n: usize,
    /// Polynomial coefficients in the scaled variable `x / scale`.
    pub coeffs: Vec<f64>,
    pub scale: f64,
    /// Retained window in the original variable.
    pub window: (f64, f64),
}

fn semicircle_cdf(u: f64) -> f64 {
    let u = u.clamp(-1.0, 1.0);
    0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
}

impl UnfoldingMap {
    pub fn fit(batch: &SpectrumBatch, method: &UnfoldMethod) -> Result<Self> {
        let n = batch.spec.n;
        let radius = batch.spec.radius();
        match method {
            UnfoldMethod::SemicircleCdf { keep } => {
                let lo = inverse_cdf(0.5 - keep / 2.0) * radius;
                let hi = inverse_cdf(0.5 + keep / 2.0) * radius;
                Ok(Self { method: method.clone(), radius, n, coeffs: vec![], scale: radius, window: (lo, hi) })
            }
            UnfoldMethod::CircleUniform => {
                Ok(Self { method: method.clone(), radius, n, coeffs: vec![], scale: 1.0, window: (0.0, 2.0 * PI) })
            }
            UnfoldMethod::PolynomialFit { degree, keep } => {
                let m = batch.spectra.len() as f64;
                let mut all: Vec<f64> = batch.levels().collect();
                all.sort_by(f64::total_cmp);
                let total = all.len();
                // staircase averaged over samples: rank / M at each level
                let lo_i = ((1.0 - keep) / 2.0 * total as f64) as usize;
                let hi_i = ((1.0 + keep) / 2.0 * total as f64) as usize;
                let stride = ((hi_i - lo_i) / 4000).max(1);
                let scale = all[total - 1].abs().max(all[0].abs()).max(1e-12);
                let pts: Vec<(f64, f64)> =
                    (lo_i..hi_i).step_by(stride).map(|i| (all[i] / scale, (i as f64 + 0.5) / m)).collect();
                let d = degree + 1;
                let a = DMatrix::from_fn(pts.len(), d, |i, j| pts[i].0.powi(j as i32));
                let b = nalgebra::DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
                let sol = a.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::Unfolding(e.to_string()))?;
                let map = Self {
                    method: method.clone(),
                    radius,
                    n,
                    coeffs: sol.iter().copied().collect(),
                    scale,
                    window: (all[lo_i], all[hi_i.min(total - 1)]),
                };
                let (a0, b0) = map.window;
                for k in 0..=400 {
                    let x = a0 + (b0 - a0) * k as f64 / 400.0;
                    if map.derivative(x) <= 0.0 {
                        return Err(Error::Unfolding(format!("fitted staircase not monotone at {x}")));
                    }
                }
                Ok(map)
            }
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self.method {
            UnfoldMethod::SemicircleCdf { .. } => self.n as f64 * semicircle_cdf(x / self.radius),
            UnfoldMethod::CircleUniform => self.n as f64 * x / (2.0 * PI),
            UnfoldMethod::PolynomialFit { .. } => {
                let u = x / self.scale;
                self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
            }
        }
    }

    /// Local density implied by the map.
    pub fn derivative(&self, x: f64) -> f64 {
        match self.method {
            UnfoldMethod::SemicircleCdf { .. } => semicircle(x, self.n, 2.0 * self.n as f64 / (self.radius * self.radius)),
            UnfoldMethod::CircleUniform => self.n as f64 / (2.0 * PI),
            UnfoldMethod::PolynomialFit { .. } => {
                let u = x / self.scale;
                let mut d = 0.0;
                for (j, c) in self.coeffs.iter().enumerate().skip(1) {
                    d += j as f64 * c * u.powi(j as i32 - 1);
                }
                d / self.scale
            }
        }
    }
}

fn inverse_cdf(p: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if semicircle_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Apply the map and keep the levels inside its window.
pub fn unfold(batch: &SpectrumBatch, method: &UnfoldMethod) -> Result<(SpectrumBatch, UnfoldingMap)> {
    let map = UnfoldingMap::fit(batch, method)?;
    let (lo, hi) = map.window;
    let spectra: Vec<Vec<f64>> = batch
        .spectra
        .iter()
        .map(|s| s.iter().filter(|&&x| x >= lo && x <= hi).map(|&x| map.apply(x)).collect())
        .collect();
    for s in &spectra {
        if s.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Unfolding("unfolded spectrum not monotone".into()));
        }
    }
    let window = Some((map.apply(lo), map.apply(hi)));
    Ok((SpectrumBatch { spec: batch.spec.clone(), spectra, degeneracy_verified: batch.degeneracy_verified, unfolded: true, window }, map))
}

fn periodic(batch: &SpectrumBatch) -> bool {
    batch.spec.class.is_circular()
}

/// Nearest-neighbour spacings of an unfolded batch; circular classes
/// include the wrap-around spacing.
pub fn spacings(batch: &SpectrumBatch) -> Vec<f64> {
    let n = batch.spec.n as f64;
    let mut out = Vec::new();
    for s in &batch.spectra {
        out.extend(s.windows(2).map(|w| w[1] - w[0]));
        if periodic(batch) && s.len() > 1 {
            out.push(s[0] + n - s[s.len() - 1]);
        }
    }
    out
}

pub fn mean_spacing(batch: &SpectrumBatch) -> f64 {
    let s = spacings(batch);
    s.iter().sum::<f64>() / s.len() as f64
}

/// Spacing density on `edges`.
pub fn spacing_distribution(batch: &SpectrumBatch, edges: &[f64]) -> CorrelationEstimate {
    let s = spacings(batch);
    let total = s.len() as f64;
    let mut counts = vec![0.0f64; edges.len() - 1];
    for x in &s {
        if let Some(i) = bin_index(edges, *x) {
            counts[i] += 1.0;
        }
    }
    let mut est = CorrelationEstimate {
        kind: EstimatorKind::Spacing,
        edges: edges.to_vec(),
        values: counts.iter().enumerate().map(|(i, c)| c / (total * (edges[i + 1] - edges[i]))).collect(),
        stderr: counts.iter().enumerate().map(|(i, c)| c.sqrt() / (total * (edges[i + 1] - edges[i]))).collect(),
        metadata: serde_json::json!({"spec": batch.spec, "spacings": s.len()}),
        low_statistics: false,
    };
    est.flag();
    est
}

/// Two-level cluster function `Y_2 = 1 - R_2` from pair counting in the
/// unfolded window; per-sample estimates give the error bars.
pub fn local_statistics(batch: &SpectrumBatch, edges: &[f64]) -> Result<CorrelationEstimate> {
    if !batch.unfolded {
        return Err(Error::Config("local statistics need an unfolded batch".into()));
    }
    let bins = edges.len() - 1;
    let xi_max = edges[bins];
    let per: Vec<Vec<f64>> = batch
        .spectra
        .iter()
        .filter(|s| s.len() > 1)
        .map(|s| {
            let mut c = vec![0.0f64; bins];
            if periodic(batch) {
                let n = batch.spec.n as f64;
                for i in 0..s.len() {
                    for j in 0..s.len() {
                        if i != j {
                            let d = (s[j] - s[i]).rem_euclid(n);
                            if let Some(b) = bin_index(edges, d) {
                                c[b] += 1.0;
                            }
                        }
                    }
                }
                for (b, v) in c.iter_mut().enumerate() {
                    *v = 1.0 - *v / (n * (edges[b + 1] - edges[b]));
                }
            } else {
                let w = match batch.window {
                    Some((lo, hi)) => hi - lo,
                    None => s[s.len() - 1] - s[0],
                };
                for i in 0..s.len() {
                    for j in i + 1..s.len() {
                        let d = s[j] - s[i];
                        if d >= xi_max {
                            break;
                        }
                        if let Some(b) = bin_index(edges, d) {
                            c[b] += 1.0;
                        }
                    }
                }
                for (b, v) in c.iter_mut().enumerate() {
                    let (a, e) = (edges[b], edges[b + 1]);
                    // ∫_a^e (W - xi) dxi
                    let norm = (w - 0.5 * (a + e)) * (e - a);
                    *v = 1.0 - *v / norm;
                }
            }
            c
        })
        .collect();
    if per.is_empty() {
        return Err(Error::Statistics("no spectra with two or more levels".into()));
    }
    let mut values = Vec::with_capacity(bins);
    let mut stderr = Vec::with_capacity(bins);
    for b in 0..bins {
        let col: Vec<f64> = per.iter().map(|c| c[b]).collect();
        let (m, e) = mean_stderr(&col);
        values.push(m);
        stderr.push(e);
    }
    let mut est = CorrelationEstimate {
        kind: EstimatorKind::Y2,
        edges: edges.to_vec(),
        values,
        stderr,
        metadata: serde_json::json!({"spec": batch.spec, "samples": per.len(), "periodic": periodic(batch)}),
        low_statistics: false,
    };
    est.flag();
    Ok(est)
}

/// `(sin pi xi / pi xi)^2`.
pub fn sine_kernel_y2(xi: f64) -> f64 {
    if xi.abs() < 1e-12 {
        1.0
    } else {
        let s = (PI * xi).sin() / (PI * xi);
        s * s
    }
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// One-sample KS distance against a continuous CDF.
pub fn ks_one_sample(data: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Mean of `min(r, 1/r)` over consecutive spacing ratios; needs no
/// unfolding. Poisson: `2 ln 2 - 1`; GUE about 0.60.
pub fn ratio_statistic(batch: &SpectrumBatch) -> (f64, f64) {
    let mut vals = Vec::new();
    for s in &batch.spectra {
        for w in s.windows(3) {
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            if a > 0.0 && b > 0.0 {
                vals.push(a.min(b) / a.max(b));
            }
        }
    }
    mean_stderr(&vals)
}

// --------------------------------------------------- direct generating function

/// Monte Carlo generating function with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McValue {
    pub value: Complex64,
    pub stderr: f64,
    pub samples: usize,
}

/// Determinant-ratio product of one spectrum.
pub fn ratio_product(levels: &[f64], src: &SourceConfig) -> Complex64 {
    let mut z = Complex64::new(1.0, 0.0);
    for p in 0..src.k() {
        let inc = f64::from(src.metric[p]) * src.eps;
        for &l in levels {
            let num = Complex64::new(l - src.x[p] - src.j[p], inc);
            let den = Complex64::new(l - src.x[p] + src.j[p], inc);
            z *= num / den;
        }
    }
    z
}

/// `< prod_p det(H - x_p + i L_p eps - J_p) / det(H - x_p + i L_p eps + J_p) >`.
pub fn zk_direct(spec: &EnsembleSpec, src: &SourceConfig, rtol: Option<f64>) -> Result<McValue> {
    src.validate()?;
    if src.k() > 2 {
        return Err(Error::Config("zk_direct supports k <= 2".into()));
    }
    let batch = sample(spec)?;
    zk_from_batch(&batch, src, rtol)
}

pub fn zk_from_batch(batch: &SpectrumBatch, src: &SourceConfig, rtol: Option<f64>) -> Result<McValue> {
    let vals: Vec<Complex64> = batch.spectra.iter().map(|s| ratio_product(s, src)).collect();
    mc_value(&vals, rtol)
}

/// Sample mean with its standard error; `rtol` bounds the relative error.
pub fn mc_value(vals: &[Complex64], rtol: Option<f64>) -> Result<McValue> {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<Complex64>() / n;
    let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0).max(1.0);
    let se = (var / n).sqrt();
    if let Some(t) = rtol {
        if se > t * mean.norm() {
            return Err(Error::Statistics(format!("relative error {:.2e} above {t:.2e}", se / mean.norm())));
        }
    }
    Ok(McValue { value: mean, stderr: se, samples: vals.len() })
}

// ------------------------------------------------------------ cache

/// On-disk batch cache keyed by the spec digest.
#[derive(Clone, Debug)]
pub struct BatchCache {
    dir: PathBuf,
}

impl BatchCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self { dir: dir.as_ref().to_path_buf() })
    }

    fn path(&self, spec: &EnsembleSpec) -> PathBuf {
        self.dir.join(format!("{}.bin", spec.digest()))
    }

    pub fn load(&self, spec: &EnsembleSpec) -> Result<Option<SpectrumBatch>> {
        let p = self.path(spec);
        if !p.exists() {
            return Ok(None);
        }
        let bytes = fs::read(p)?;
        decode_batch(spec, &bytes).map(Some)
    }

    pub fn store(&self, batch: &SpectrumBatch) -> Result<()> {
        fs::write(self.path(&batch.spec), encode_batch(batch))?;
        Ok(())
    }

    pub fn get_or_sample(&self, spec: &EnsembleSpec) -> Result<SpectrumBatch> {
        if let Some(b) = self.load(spec)? {
            return Ok(b);
        }
        let b = sample(spec)?;
        self.store(&b)?;
        Ok(b)
    }
}

/// Layout: `u64` sample count, then per sample a `u64` length and
/// little-endian `f64` levels, then one flag byte.
fn encode_batch(b: &SpectrumBatch) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend((b.spectra.len() as u64).to_le_bytes());
    for s in &b.spectra {
        out.extend((s.len() as u64).to_le_bytes());
        for x in s {
            out.extend(x.to_le_bytes());
        }
    }
    out.push(match b.degeneracy_verified {
        None => 0,
        Some(false) => 1,
        Some(true) => 2,
    });
    out
}

fn decode_batch(spec: &EnsembleSpec, bytes: &[u8]) -> Result<SpectrumBatch> {
    let mut pos = 0usize;
    let mut word = || -> Result<[u8; 8]> {
        let w: [u8; 8] = bytes.get(pos..pos + 8).ok_or_else(|| Error::Parse("truncated cache entry".into()))?.try_into().expect("8 bytes");
        pos += 8;
        Ok(w)
    };
    let count = u64::from_le_bytes(word()?) as usize;
    let mut spectra = Vec::with_capacity(count);
    for _ in 0..count {
        let len = u64::from_le_bytes(word()?) as usize;
        let mut s = Vec::with_capacity(len);
        for _ in 0..len {
            s.push(f64::from_le_bytes(word()?));
        }
        spectra.push(s);
    }
    let flag = match bytes.get(pos) {
        Some(0) => None,
        Some(1) => Some(false),
        Some(2) => Some(true),
        _ => return Err(Error::Parse("bad cache flag".into())),
    };
    Ok(SpectrumBatch { spec: spec.clone(), spectra, degeneracy_verified: flag, unfolded: false, window: None })
}

/// Uniform random variates in `[0, 1)` from a stream, for tests of the
/// estimators.
pub fn uniform_sample(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = chunk_rng(seed, 0);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gse_doubly_degenerate() {
        let b = sample(&EnsembleSpec::new(EnsembleClass::Gse, 2, 3, 50)).unwrap();
        assert_eq!(b.degeneracy_verified, Some(true));
        assert!(b.spectra.iter().all(|s| s.len() == 2));
        let b = sample(&EnsembleSpec::new(EnsembleClass::Cse, 3, 3, 30)).unwrap();
        assert_eq!(b.degeneracy_verified, Some(true));
    }

    #[test]
    fn gaussian_second_moments() {
        for (class, n) in [(EnsembleClass::Goe, 4), (EnsembleClass::Gue, 4), (EnsembleClass::Gse, 3)] {
            let vals = map_samples(9, 4000, |rng| {
                let h = sample_gaussian(class, n, rng);
                (&h * &h).trace().re
            });
            let (m, e) = mean_stderr(&vals);
            assert!((m - second_moment(class, n)).abs() < 4.0 * e, "{class:?} {m} {e}");
        }
    }

    #[test]
    fn gue_hermitian_and_gse_self_dual() {
        let mut rng = chunk_rng(1, 0);
        let h = sample_gaussian(EnsembleClass::Gue, 5, &mut rng);
        assert_eq!(h, h.adjoint());
        let h = sample_gaussian(EnsembleClass::Gse, 3, &mut rng);
        assert_eq!(h, h.adjoint());
        assert_eq!(dual(&h), h);
    }

    #[test]
    fn cue_one_uniform_phase() {
        let b = sample(&EnsembleSpec::new(EnsembleClass::Cue, 1, 5, 3000)).unwrap();
        let ph: Vec<f64> = b.levels().collect();
        let d = ks_one_sample(&ph, |x| x / (2.0 * PI));
        // 1% critical value 1.63 / sqrt(n)
        assert!(d < 1.63 / (ph.len() as f64).sqrt(), "{d}");
    }

    #[test]
    fn determinism_and_cache() {
        let spec = EnsembleSpec::new(EnsembleClass::Goe, 6, 77, 130);
        let a = sample(&spec).unwrap();
        let b = sample(&spec).unwrap();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let cache = BatchCache::new(dir.path()).unwrap();
        cache.store(&a).unwrap();
        assert_eq!(cache.load(&spec).unwrap().unwrap(), a);
    }

    #[test]
    fn zk_direct_normalized() {
        let spec = EnsembleSpec::new(EnsembleClass::Gue, 4, 2, 100);
        let z = zk_direct(&spec, &SourceConfig::k1(0.3, 0.0, 0.1), None).unwrap();
        assert_eq!(z.value, Complex64::new(1.0, 0.0));
        assert_eq!(z.stderr, 0.0);
    }

    #[test]
    fn ks_distances() {
        let a = uniform_sample(1, 2000);
        let b = uniform_sample(2, 2000);
        assert!(ks_two_sample(&a, &b) < 0.06);
        let c: Vec<f64> = b.iter().map(|x| x * 0.5).collect();
        assert!(ks_two_sample(&a, &c) > 0.4);
    }
}
