//! Seeded random elements for property checks and benchmarks.

use num_complex::Complex64;
use rand::Rng;

use crate::grassmann::{Gen, GrassmannElement};
use crate::scalar::Coefficient;
use crate::superlinalg::{grading, SuperMatrix};

/// Which monomials a random element may contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grade {
    Even,
    Odd,
    Any,
}

/// Random coefficient with small Gaussian-integer parts, exactly
/// representable in every coefficient ring.
pub fn gaussian_integer<C: Coefficient, R: Rng + ?Sized>(rng: &mut R, bound: i64) -> C {
    let re = rng.random_range(-bound..=bound);
    let im = rng.random_range(-bound..=bound);
    C::from_c64(Complex64::new(re as f64, im as f64))
}

/// Random element with `terms` monomials of the requested grade.
pub fn random_element<C: Coefficient, R: Rng + ?Sized>(
    rng: &mut R,
    pairs: u32,
    grade: Grade,
    terms: usize,
    bound: i64,
) -> GrassmannElement<C> {
    let mut out = GrassmannElement::zero(pairs);
    let ngen = 2 * pairs;
    for _ in 0..terms {
        let mut gens = Vec::new();
        for g in 0..ngen {
            if rng.random_bool(0.35) {
                gens.push(Gen(g));
            }
        }
        let want_odd = match grade {
            Grade::Even => Some(false),
            Grade::Odd => Some(true),
            Grade::Any => None,
        };
        if let Some(odd) = want_odd {
            if (gens.len() % 2 == 1) != odd {
                if gens.is_empty() || (ngen > 0 && rng.random_bool(0.5) && gens.len() < ngen as usize) {
                    let free: Vec<u32> = (0..ngen).filter(|g| !gens.contains(&Gen(*g))).collect();
                    if free.is_empty() {
                        gens.pop();
                    } else {
                        gens.push(Gen(free[rng.random_range(0..free.len())]));
                    }
                } else {
                    gens.pop();
                }
            }
            if (gens.len() % 2 == 1) != odd {
                continue;
            }
        }
        let c = gaussian_integer::<C, R>(rng, bound);
        out = &out + &GrassmannElement::monomial(pairs, &gens, c).expect("in range");
    }
    out
}

/// Random boson-top supermatrix whose bodies are `shift` on the diagonal
/// plus small integers, keeping both diagonal blocks invertible.
pub fn random_supermatrix<C: Coefficient, R: Rng + ?Sized>(
    rng: &mut R,
    pairs: u32,
    k1: usize,
    k2: usize,
    shift: i64,
) -> SuperMatrix<C> {
    let g = grading(k1, k2);
    let n = k1 + k2;
    let mut m = SuperMatrix::zeros(pairs, g.clone(), g);
    for i in 0..n {
        for j in 0..n {
            let odd = (i < k1) != (j < k1);
            let e = if odd {
                random_element(rng, pairs, Grade::Odd, 2, 2)
            } else {
                let mut e = random_element(rng, pairs, Grade::Even, 2, 1);
                let body: i64 = rng.random_range(-1..=1) + if i == j { shift } else { 0 };
                e = e.soul().add_scalar(C::from_i64(body));
                e
            };
            m.set(i, j, e).expect("graded entry");
        }
    }
    m
}
