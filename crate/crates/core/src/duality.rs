//! Ordinary/superspace duality of dyadic sums.
//!
//! A bundle of commuting vectors `z_p` and anticommuting vectors `zeta_p`
//! is packed into a rectangular supermatrix `A`. Then `K = A L A^dagger` is
//! an ordinary matrix and `B = L^{1/2} A^dagger A L^{1/2}` a supermatrix
//! with `tr K^m = str B^m` for every `m`.
//!
//! The adjoint used here puts the supertranspose sign on the
//! boson-fermion block ([`TransposeConvention::MuMinus`]); with it `K`
//! equals `sum_p (L_p z_p z_p^dagger - zeta_p zeta_p^dagger)` and `B` is
//! Hermitian for `L = 1`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{ConjugationConvention, Gen, GrassmannElement};
use crate::scalar::Coefficient;
use crate::superlinalg::{grading, Metric, Parity, SuperMatrix, TransposeConvention};

/// Dyson index of the matrix symmetry class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Beta {
    Orthogonal,
    Unitary,
    Symplectic,
}

impl Beta {
    pub fn value(self) -> u8 {
        match self {
            Beta::Orthogonal => 1,
            Beta::Unitary => 2,
            Beta::Symplectic => 4,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// Multiplicity of each eigenvalue in the complex representation,
    /// also the exponent on the determinant ratio.
    pub fn gamma(self) -> f64 {
        if self == Beta::Symplectic {
            2.0
        } else {
            1.0
        }
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Beta::Orthogonal),
            2 => Ok(Beta::Unitary),
            4 => Ok(Beta::Symplectic),
            _ => Err(Error::Config(format!("beta must be 1, 2 or 4, got {v}"))),
        }
    }
}

impl From<Beta> for u8 {
    fn from(b: Beta) -> u8 {
        b.value()
    }
}

/// Commuting vectors plus metric; the anticommuting partners are the
/// pool generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorBundle {
    pub beta: Beta,
    pub n: usize,
    pub k: usize,
    /// `k` vectors of length `n`; `2k` for `beta = 4`, paired as
    /// `(2p, 2p+1)`.
    pub bosons: Vec<Vec<Complex64>>,
    /// `L_p = +-1`, one per source.
    pub metric: Vec<i8>,
}

impl VectorBundle {
    pub fn new(beta: Beta, n: usize, bosons: Vec<Vec<Complex64>>, metric: Vec<i8>) -> Result<Self> {
        let per = if beta == Beta::Symplectic { 2 } else { 1 };
        if bosons.len() % per != 0 || bosons.iter().any(|v| v.len() != n) {
            return Err(Error::Shape("vector bundle dimensions".into()));
        }
        let k = bosons.len() / per;
        if metric.len() != k || metric.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Config("metric needs one +-1 entry per source".into()));
        }
        Ok(Self { beta, n, k, bosons, metric })
    }

    /// Random bundle; with `integers` the entries are small Gaussian
    /// integers so that floating arithmetic stays exact.
    pub fn random(beta: Beta, n: usize, metric: Vec<i8>, seed: u64, integers: bool) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let per = if beta == Beta::Symplectic { 2 } else { 1 };
        let count = metric.len() * per;
        let bosons = (0..count)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if integers {
                            Complex64::new(rng.random_range(-2..=2) as f64, rng.random_range(-2..=2) as f64)
                        } else {
                            let re: f64 = StandardNormal.sample(&mut rng);
                            let im: f64 = StandardNormal.sample(&mut rng);
                            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(beta, n, bosons, metric)
    }

    /// Number of generator pairs: one per component of each anticommuting
    /// vector.
    pub fn pairs(&self) -> u32 {
        (self.bosons.len() * self.n) as u32
    }

    /// Generator pair carrying component `i` of anticommuting vector `v`.
    pub fn fermion_pair(&self, v: usize, i: usize) -> u32 {
        (v * self.n + i) as u32
    }

    fn column_count(&self) -> usize {
        if self.beta == Beta::Unitary {
            self.k
        } else {
            2 * self.k
        }
    }

    fn row_count(&self) -> usize {
        if self.beta == Beta::Symplectic {
            2 * self.n
        } else {
            self.n
        }
    }

    /// Metric on the columns of `A`.
    pub fn column_metric(&self) -> Metric {
        let rep = if self.beta == Beta::Unitary { 1 } else { 2 };
        let bosonic = self.metric.iter().flat_map(|&s| std::iter::repeat_n(s, rep)).collect();
        Metric { bosonic, fermions: self.column_count() }
    }

    /// The rectangular supermatrix `A`.
    pub fn a_matrix<C: Coefficient>(&self) -> Result<SuperMatrix<C>> {
        let pairs = self.pairs();
        let (rows, nb) = (self.row_count(), self.column_count());
        let cols = 2 * nb;
        let zero = GrassmannElement::<C>::zero(pairs);
        let mut data = vec![zero; rows * cols];
        let scal = |z: Complex64| GrassmannElement::<C>::scalar(pairs, C::from_c64(z));
        let gen = |g: Gen, sign: i64| -> Result<GrassmannElement<C>> {
            Ok(GrassmannElement::<C>::generator(pairs, g)?.scale(&C::from_i64(sign)))
        };
        for i in 0..self.n {
            for p in 0..self.k {
                match self.beta {
                    Beta::Unitary => {
                        data[i * cols + p] = scal(self.bosons[p][i]);
                        data[i * cols + nb + p] = gen(Gen::zeta(self.fermion_pair(p, i)), 1)?;
                    }
                    Beta::Orthogonal => {
                        let z = self.bosons[p][i];
                        let f = self.fermion_pair(p, i);
                        data[i * cols + 2 * p] = scal(z);
                        data[i * cols + 2 * p + 1] = scal(z.conj());
                        data[i * cols + nb + 2 * p] = gen(Gen::zeta(f), 1)?;
                        data[i * cols + nb + 2 * p + 1] = gen(Gen::zeta_star(f), 1)?;
                    }
                    Beta::Symplectic => {
                        let (z1, z2) = (self.bosons[2 * p][i], self.bosons[2 * p + 1][i]);
                        let (f1, f2) = (self.fermion_pair(2 * p, i), self.fermion_pair(2 * p + 1, i));
                        let (r1, r2) = (2 * i, 2 * i + 1);
                        data[r1 * cols + 2 * p] = scal(z1);
                        data[r2 * cols + 2 * p] = scal(z2);
                        data[r1 * cols + 2 * p + 1] = scal(-z2.conj());
                        data[r2 * cols + 2 * p + 1] = scal(z1.conj());
                        data[r1 * cols + nb + 2 * p] = gen(Gen::zeta(f1), 1)?;
                        data[r2 * cols + nb + 2 * p] = gen(Gen::zeta(f2), 1)?;
                        data[r1 * cols + nb + 2 * p + 1] = gen(Gen::zeta_star(f2), -1)?;
                        data[r2 * cols + nb + 2 * p + 1] = gen(Gen::zeta_star(f1), 1)?;
                    }
                }
            }
        }
        SuperMatrix::new(pairs, vec![Parity::Boson; rows], grading(nb, nb), data)
    }

    pub fn dual_pair<C: Coefficient>(&self) -> Result<DualPair<C>> {
        let a = self.a_matrix::<C>()?;
        let pairs = self.pairs();
        let metric = self.column_metric();
        let l = metric.matrix::<C>(pairs);
        let lh = metric.sqrt_matrix::<C>(pairs);
        let ad = a.dagger(TransposeConvention::MuMinus);
        let k = a.try_mul(&l)?.try_mul(&ad)?;
        let b = lh.try_mul(&ad)?.try_mul(&a)?.try_mul(&lh)?;
        Ok(DualPair { a, k, b })
    }
}

/// `A`, the ordinary matrix `K` and the supermatrix `B` of one bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPair<C: Coefficient = Complex64> {
    pub a: SuperMatrix<C>,
    pub k: SuperMatrix<C>,
    pub b: SuperMatrix<C>,
}

/// Deviations of `tr K^m - str B^m` for `m = 1..=m_max`.
pub fn trace_duality_deviations<C: Coefficient>(pair: &DualPair<C>, m_max: usize) -> Result<Vec<f64>> {
    Ok(trace_pairs(pair, m_max)?.iter().map(|(tk, sb)| tk.max_deviation(sb)).collect())
}

fn trace_pairs<C: Coefficient>(pair: &DualPair<C>, m_max: usize) -> Result<Vec<(GrassmannElement<C>, GrassmannElement<C>)>> {
    if pair.k.row_grading().contains(&Parity::Fermion) {
        return Err(Error::Shape("K must be bosonic".into()));
    }
    let tk = pair.k.power_supertraces(m_max)?;
    let sb = pair.b.power_supertraces(m_max)?;
    Ok(tk.into_iter().zip(sb).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub beta: Beta,
    pub n: usize,
    pub k: usize,
    pub metric: Vec<i8>,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Check `tr K^m = str B^m` for `m = 1..=m_max` with absolute tolerance
/// `tol` relative to the size of `tr K^m`.
pub fn verify_trace_duality<C: Coefficient>(bundle: &VectorBundle, m_max: usize, tol: f64) -> Result<DualityReport> {
    let pair = bundle.dual_pair::<C>()?;
    let scaled: Vec<f64> =
        trace_pairs(&pair, m_max)?.iter().map(|(tk, sb)| tk.max_deviation(sb) / tk.max_coeff().max(1.0)).collect();
    let max = scaled.iter().copied().fold(0.0, f64::max);
    Ok(DualityReport {
        beta: bundle.beta,
        n: bundle.n,
        k: bundle.k,
        metric: bundle.metric.clone(),
        deviations: scaled,
        max_deviation: max,
        tolerance: tol,
        passed: max <= tol,
    })
}

/// A violated Hermiticity condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub matrix: String,
    pub row: usize,
    pub col: usize,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiticityReport {
    pub k_hermitian: bool,
    /// Real symmetric (`beta = 1`) or self-dual (`beta = 4`) structure of
    /// `K`; always true for `beta = 2`.
    pub k_structure: bool,
    pub b_hermitian: bool,
    pub violations: Vec<Violation>,
}

fn adjoint_violations<C: Coefficient>(name: &str, m: &SuperMatrix<C>, tol: f64, out: &mut Vec<Violation>) -> bool {
    let d = m.dagger(TransposeConvention::MuMinus);
    let mut ok = true;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let dev = m.get(i, j).max_deviation(d.get(i, j));
            if dev > tol {
                ok = false;
                out.push(Violation { matrix: name.into(), row: i, col: j, deviation: dev });
            }
        }
    }
    ok
}

/// Check `K^dagger = K`, the class structure of `K`, and `B^dagger = B`.
pub fn hermiticity_check<C: Coefficient>(bundle: &VectorBundle, tol: f64) -> Result<HermiticityReport> {
    let pair = bundle.dual_pair::<C>()?;
    let mut violations = Vec::new();
    let k_hermitian = adjoint_violations("K", &pair.k, tol, &mut violations);
    let b_hermitian = adjoint_violations("B", &pair.b, tol, &mut violations);
    let n = pair.k.nrows();
    let mut k_structure = true;
    for i in 0..n {
        for j in 0..n {
            let other = match bundle.beta {
                Beta::Unitary => continue,
                Beta::Orthogonal => pair.k.get(j, i).clone(),
                Beta::Symplectic => self_dual_partner(&pair.k, i, j),
            };
            let dev = pair.k.get(i, j).max_deviation(&other);
            if dev > tol {
                k_structure = false;
                violations.push(Violation { matrix: "K-structure".into(), row: i, col: j, deviation: dev });
            }
        }
    }
    Ok(HermiticityReport { k_hermitian, k_structure, b_hermitian, violations })
}

/// Entry `(i, j)` of `J K^T J^T` with `J = 1 (x) [[0, 1], [-1, 0]]`.
fn self_dual_partner<C: Coefficient>(k: &SuperMatrix<C>, i: usize, j: usize) -> GrassmannElement<C> {
    let jmap = |r: usize| -> (usize, i64) {
        if r % 2 == 0 {
            (r + 1, 1)
        } else {
            (r - 1, -1)
        }
    };
    let (ri, si) = jmap(i);
    let (rj, sj) = jmap(j);
    k.get(rj, ri).scale(&C::from_i64(si * sj))
}

/// Entrywise conjugate of a purely bosonic matrix; used to compare `K`
/// against its defining dyadic sum.
pub fn conjugate_bosonic<C: Coefficient>(m: &SuperMatrix<C>) -> Result<SuperMatrix<C>> {
    m.conjugate(ConjugationConvention::MinusSign)
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = GrassmannElement<Complex64>;

    #[test]
    fn unitary_b_matches_scalar_product_table() {
        let b = VectorBundle::random(Beta::Unitary, 3, vec![1, 1], 5, true).unwrap();
        let pair = b.dual_pair::<Complex64>().unwrap();
        let pairs = b.pairs();
        let z = |p: usize, i: usize| E::scalar(pairs, b.bosons[p][i]);
        let zc = |p: usize, i: usize| E::scalar(pairs, b.bosons[p][i].conj());
        let f = |p: usize, i: usize| E::generator(pairs, Gen::zeta(b.fermion_pair(p, i))).unwrap();
        let fc = |p: usize, i: usize| E::generator(pairs, Gen::zeta_star(b.fermion_pair(p, i))).unwrap();
        for p in 0..2 {
            for q in 0..2 {
                let mut zz = E::zero(pairs);
                let mut zf = E::zero(pairs);
                let mut fz = E::zero(pairs);
                let mut ff = E::zero(pairs);
                for i in 0..3 {
                    zz = &zz + &(&zc(p, i) * &z(q, i));
                    zf = &zf + &(&zc(p, i) * &f(q, i));
                    fz = &fz - &(&fc(p, i) * &z(q, i));
                    ff = &ff - &(&fc(p, i) * &f(q, i));
                }
                assert_eq!(pair.b.get(p, q), &zz);
                assert_eq!(pair.b.get(p, 2 + q), &zf);
                assert_eq!(pair.b.get(2 + p, q), &fz);
                assert_eq!(pair.b.get(2 + p, 2 + q), &ff);
            }
        }
    }

    #[test]
    fn k_is_dyadic_sum() {
        let b = VectorBundle::random(Beta::Unitary, 2, vec![1, -1], 9, true).unwrap();
        let pair = b.dual_pair::<Complex64>().unwrap();
        let pairs = b.pairs();
        for i in 0..2 {
            for j in 0..2 {
                let mut e = E::zero(pairs);
                for p in 0..2 {
                    let l = Complex64::new(b.metric[p] as f64, 0.0);
                    e = &e + &E::scalar(pairs, l * b.bosons[p][i] * b.bosons[p][j].conj());
                    let fi = E::generator(pairs, Gen::zeta(b.fermion_pair(p, i))).unwrap();
                    let fj = E::generator(pairs, Gen::zeta_star(b.fermion_pair(p, j))).unwrap();
                    e = &e - &(&fi * &fj);
                }
                assert_eq!(pair.k.get(i, j), &e);
            }
        }
    }

    #[test]
    fn hermiticity_depends_on_metric() {
        for beta in [Beta::Orthogonal, Beta::Unitary, Beta::Symplectic] {
            let b = VectorBundle::random(beta, 2, vec![1], 3, true).unwrap();
            let r = hermiticity_check::<Complex64>(&b, 0.0).unwrap();
            assert!(r.k_hermitian && r.b_hermitian && r.k_structure, "{beta:?} {:?}", r.violations);
            let b = VectorBundle::random(beta, 2, vec![-1], 3, true).unwrap();
            let r = hermiticity_check::<Complex64>(&b, 0.0).unwrap();
            assert!(r.k_hermitian && r.k_structure && !r.b_hermitian, "{beta:?}");
        }
    }

    #[test]
    fn trace_duality_all_classes() {
        use crate::scalar::ExactComplex;
        for beta in [Beta::Orthogonal, Beta::Unitary, Beta::Symplectic] {
            let b = VectorBundle::random(beta, 2, vec![1, -1], 11, true).unwrap();
            let r = verify_trace_duality::<ExactComplex>(&b, 4, 0.0).unwrap();
            assert!(r.passed, "{beta:?} {:?}", r.deviations);
            let b = VectorBundle::random(beta, 2, vec![-1], 12, false).unwrap();
            let r = verify_trace_duality::<Complex64>(&b, 4, 1e-12).unwrap();
            assert!(r.passed, "{beta:?} {:?}", r.deviations);
        }
    }

    #[test]
    fn beta_serde() {
        assert_eq!(serde_json::to_string(&Beta::Symplectic).unwrap(), "4");
        assert!(serde_json::from_str::<Beta>("3").is_err());
    }
}
