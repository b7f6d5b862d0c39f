//! Gaussian quadrature rules.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of a one-dimensional rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Affine map of a rule on `[-1, 1]` to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadRule {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        QuadRule {
            nodes: self.nodes.iter().map(|x| m + h * x).collect(),
            weights: self.weights.iter().map(|w| w * h).collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Family {
    Hermite,
    Laguerre(u64),
    Legendre,
}

/// Three-term recurrence of the orthonormal polynomials:
/// `x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}`.
fn jacobi(family: Family, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n + 1];
    let mu0 = match family {
        Family::Hermite => {
            for k in 1..=n {
                b[k] = (k as f64 / 2.0).sqrt();
            }
            PI.sqrt()
        }
        Family::Laguerre(bits) => {
            let alpha = f64::from_bits(bits);
            for (k, ak) in a.iter_mut().enumerate() {
                *ak = 2.0 * k as f64 + alpha + 1.0;
            }
            for k in 1..=n {
                b[k] = (k as f64 * (k as f64 + alpha)).sqrt();
            }
            gamma(alpha + 1.0)
        }
        Family::Legendre => {
            for k in 1..=n {
                let k = k as f64;
                b[k as usize] = k / (4.0 * k * k - 1.0).sqrt();
            }
            2.0
        }
    };
    (a, b, mu0)
}

fn gamma(x: f64) -> f64 {
    // Lanczos, g = 7
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut s = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * s
}

fn compute(family: Family, n: usize) -> QuadRule {
    let (a, b, mu0) = jacobi(family, n);
    let mut t = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = a[i];
        if i + 1 < n {
            t[(i, i + 1)] = b[i + 1];
            t[(i + 1, i)] = b[i + 1];
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let p0 = 1.0 / mu0.sqrt();
    let eval = |x: f64| {
        // returns p_n, p_n', sum_{k<n} p_k^2
        let (mut pm, mut p) = (0.0, p0);
        let (mut dm, mut d) = (0.0, 0.0);
        let mut sum = 0.0;
        for k in 0..n {
            sum += p * p;
            let pn = ((x - a[k]) * p - b[k] * pm) / b[k + 1];
            let dn = (p + (x - a[k]) * d - b[k] * dm) / b[k + 1];
            pm = p;
            p = pn;
            dm = d;
            d = dn;
        }
        (p, d, sum)
    };
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d, _) = eval(*x);
            if d != 0.0 && p.is_finite() && d.is_finite() {
                let step = p / d;
                if step.abs() < 1e-3 * (1.0 + x.abs()) {
                    *x -= step;
                }
            }
        }
        let (_, _, s) = eval(*x);
        weights.push(1.0 / s);
    }
    QuadRule { nodes, weights }
}

fn cached(family: Family, n: usize) -> Arc<QuadRule> {
    static CACHE: OnceLock<Mutex<HashMap<(Family, usize), Arc<QuadRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("cache lock").get(&(family, n)) {
        return r.clone();
    }
    let r = Arc::new(compute(family, n));
    cache.lock().expect("cache lock").insert((family, n), r.clone());
    r
}

/// Gauss-Hermite rule for `∫ f(x) exp(-x^2) dx` over the real line.
pub fn gauss_hermite(n: usize) -> Arc<QuadRule> {
    cached(Family::Hermite, n)
}

/// Generalized Gauss-Laguerre rule for `∫_0^∞ f(x) x^alpha exp(-x) dx`.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Arc<QuadRule> {
    cached(Family::Laguerre(alpha.to_bits()), n)
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<QuadRule> {
    cached(Family::Legendre, n)
}

/// Periodic trapezoid rule on `[0, 2 pi)`.
pub fn trapezoid_periodic(n: usize) -> QuadRule {
    let h = 2.0 * PI / n as f64;
    QuadRule { nodes: (0..n).map(|j| j as f64 * h).collect(), weights: vec![h; n] }
}

/// Composite Gauss-Legendre on `[a, b]` split into `panels` pieces.
pub fn composite_legendre(a: f64, b: f64, panels: usize, order: usize) -> QuadRule {
    let base = gauss_legendre(order);
    let mut out = QuadRule { nodes: Vec::new(), weights: Vec::new() };
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let r = base.mapped(a + p as f64 * h, a + (p + 1) as f64 * h);
        out.nodes.extend(r.nodes);
        out.weights.extend(r.weights);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let r = gauss_hermite(40);
        let m0: f64 = r.weights.iter().sum();
        let m2: f64 = r.iter().map(|(x, w)| w * x * x).sum();
        let m8: f64 = r.iter().map(|(x, w)| w * x.powi(8)).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-14);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((m8 - 105.0 / 16.0 * PI.sqrt()).abs() < 1e-12);
        let big = gauss_hermite(200);
        let s: f64 = big.iter().map(|(x, w)| w * (x).cos()).sum();
        assert!((s - PI.sqrt() * (-0.25f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn laguerre_and_legendre() {
        let r = gauss_laguerre(30, 0.0);
        let m3: f64 = r.iter().map(|(x, w)| w * x.powi(3)).sum();
        assert!((m3 - 6.0).abs() < 1e-11);
        let r = gauss_laguerre(20, 1.0);
        let m1: f64 = r.iter().map(|(x, w)| w * x).sum();
        assert!((m1 - 2.0).abs() < 1e-12);
        let l = gauss_legendre(12).mapped(0.0, 2.0);
        let v: f64 = l.iter().map(|(x, w)| w * x.powi(5)).sum();
        assert!((v - 64.0 / 6.0).abs() < 1e-12);
    }
}
