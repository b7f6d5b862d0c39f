//! Verification suites: seeded property checks over every module, collected
//! into a [`SuiteReport`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::brownian::{convolution_check, delta_limit_check, normalization_check, radial_point, semigroup_check};
use crate::colorflavor::{cft_compare, cft_lhs, cft_rhs, cue_genfun_mc, CftConfig, CftSource, CueAngles};
use crate::duality::{hermiticity_check, verify_trace_duality, Beta, VectorBundle};
use crate::ensembles::{zk_direct, EnsembleClass, EnsembleSpec};
use crate::error::{Error, Result};
use crate::genfun::{
    delta_identity, gaussian_superintegral_check, hs_verify, ingham_siegel_fit, keystone_check, keystone_check_exact,
    sigma_matrix, z_super_k1, HsConfig, SourceConfig, TestFunction, ZSuperConfig,
};
use crate::grassmann::{ConjugationConvention, Gen, GrassmannElement};
use crate::report::{CheckResult, SuiteReport};
use crate::scalar::{Coefficient, ExactComplex};
use crate::superlinalg::{SuperMatrix, SuperVectorLayout, TransposeConvention};
use crate::testing::{random_element, random_supermatrix, Grade};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Duality,
    Genfun,
    Brownian,
    Colorflavor,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 5] = [Suite::Algebra, Suite::Duality, Suite::Genfun, Suite::Brownian, Suite::Colorflavor];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "duality" => Ok(Suite::Duality),
            "genfun" => Ok(Suite::Genfun),
            "brownian" => Ok(Suite::Brownian),
            "colorflavor" => Ok(Suite::Colorflavor),
            "all" => Ok(Suite::All),
            _ => Err(Error::Config(format!("unknown suite {s}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Duality => "duality",
            Suite::Genfun => "genfun",
            Suite::Brownian => "brownian",
            Suite::Colorflavor => "colorflavor",
            Suite::All => "all",
        }
    }
}

/// Deliberate defects for exercising the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the sign of every superdeterminant.
    SdetSign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub algebra_cases: usize,
    pub matrix_cases: usize,
    /// Bundles per symmetry class in the duality suite.
    pub bundles: usize,
    /// Restrict the duality suite to one class and size.
    pub beta: Option<Beta>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub mc_samples: usize,
    pub cft_seeds: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            algebra_cases: 1000,
            matrix_cases: 500,
            bundles: 50,
            beta: None,
            n: None,
            k: None,
            mc_samples: 200_000,
            cft_seeds: 20,
            fault: None,
        }
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(suite.name(), serde_json::to_value(cfg).expect("serializable config"));
    let list: Vec<Suite> = if suite == Suite::All { Suite::MODULES.to_vec() } else { vec![suite] };
    for s in list {
        let checks = match s {
            Suite::Algebra => {
                let mut c = algebra_checks(cfg)?;
                c.extend(supermatrix_checks(cfg)?);
                c
            }
            Suite::Duality => duality_checks(cfg)?,
            Suite::Genfun => genfun_checks(cfg)?,
            Suite::Brownian => brownian_checks(cfg)?,
            Suite::Colorflavor => colorflavor_checks(cfg)?,
            Suite::All => unreachable!(),
        };
        report.checks.extend(checks);
    }
    Ok(report)
}

// ------------------------------------------------------------ algebra

type Ex = GrassmannElement<ExactComplex>;
type Fl = GrassmannElement<Complex64>;

const POOL: u32 = 3;

fn random_float<R: Rng>(rng: &mut R, grade: Grade) -> Fl {
    let e: Fl = random_element(rng, POOL, grade, 4, 3);
    e.map_coeffs(|c| c * Complex64::new(rng_scale(c), 0.0))
}

// deterministic non-integer rescaling so that float products round
fn rng_scale(c: &Complex64) -> f64 {
    1.0 + 0.1 * (c.re * 1.7 + c.im * 0.3).sin()
}

fn parity_twist<C: Coefficient>(x: &GrassmannElement<C>) -> Result<GrassmannElement<C>> {
    let mut out = GrassmannElement::zero(x.pairs());
    for (m, c) in x.terms() {
        let gens: Vec<Gen> = (0..64).filter(|b| m >> b & 1 == 1).map(Gen).collect();
        let c = if gens.len() % 2 == 1 { -c.clone() } else { c.clone() };
        out = &out + &GrassmannElement::monomial(x.pairs(), &gens, c)?;
    }
    Ok(out)
}

fn rel(dev: f64, scale: f64) -> f64 {
    dev / scale.max(1.0)
}

fn algebra_checks(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.algebra_cases;
    let mut anti: f64 = 0.0;
    let mut even_comm: f64 = 0.0;
    let mut assoc: f64 = 0.0;
    let mut distr: f64 = 0.0;
    let mut nil: f64 = 0.0;
    let mut inv_minus: f64 = 0.0;
    let mut inv_rev: f64 = 0.0;
    let mut assoc_f: f64 = 0.0;
    let mut exp_inv: f64 = 0.0;
    for _ in 0..n {
        let x: Ex = random_element(&mut rng, POOL, Grade::Odd, 4, 3);
        let y: Ex = random_element(&mut rng, POOL, Grade::Odd, 4, 3);
        let z: Ex = random_element(&mut rng, POOL, Grade::Any, 4, 3);
        let e: Ex = random_element(&mut rng, POOL, Grade::Even, 4, 3);
        anti = anti.max((&x * &y + &y * &x).max_coeff());
        even_comm = even_comm.max((&e * &z - &z * &e).max_coeff());
        assoc = assoc.max((&(&x * &y) * &z).max_deviation(&(&x * &(&y * &z))));
        distr = distr.max((&z * &(&x + &y)).max_deviation(&(&z * &x + &z * &y)));
        nil = nil.max((&x * &x).max_coeff());
        let mm = z.conjugate(ConjugationConvention::MinusSign)?.conjugate(ConjugationConvention::MinusSign)?;
        inv_minus = inv_minus.max(mm.max_deviation(&parity_twist(&z)?));
        let rr = z.conjugate(ConjugationConvention::OrderReversal)?.conjugate(ConjugationConvention::OrderReversal)?;
        inv_rev = inv_rev.max(rr.max_deviation(&z));

        let (a, b, c) = (random_float(&mut rng, Grade::Any), random_float(&mut rng, Grade::Any), random_float(&mut rng, Grade::Any));
        let lhs = &(&a * &b) * &c;
        assoc_f = assoc_f.max(rel(lhs.max_deviation(&(&a * &(&b * &c))), lhs.max_coeff()));
        let ev = random_float(&mut rng, Grade::Even).soul().add_scalar(Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let prod = &ev.exp()? * &(-&ev).exp()?;
        exp_inv = exp_inv.max(prod.max_deviation(&Fl::one(POOL)));
    }
    let mut reality: f64 = 0.0;
    for p in 0..POOL {
        let q = Ex::monomial(POOL, &[Gen::zeta_star(p), Gen::zeta(p)], ExactComplex::one())?;
        for conv in [ConjugationConvention::MinusSign, ConjugationConvention::OrderReversal] {
            reality = reality.max(q.conjugate(conv)?.max_deviation(&q));
        }
    }
    let (berezin_f, berezin_x) = berezin_exp(&mut rng, n)?;
    let detail = serde_json::json!({ "cases": n, "pairs": POOL });
    Ok(vec![
        CheckResult::from_deviation("anticommutativity", anti, 0.0).with_detail(detail.clone()),
        CheckResult::from_deviation("even-elements-commute", even_comm, 0.0),
        CheckResult::from_deviation("associativity", assoc, 0.0),
        CheckResult::from_deviation("associativity-float", assoc_f, 1e-12),
        CheckResult::from_deviation("distributivity", distr, 0.0),
        CheckResult::from_deviation("nilpotency", nil, 0.0),
        CheckResult::from_deviation("conjugation-involution-minus-sign", inv_minus, 0.0),
        CheckResult::from_deviation("conjugation-involution-order-reversal", inv_rev, 0.0),
        CheckResult::from_deviation("bilinear-reality", reality, 0.0),
        CheckResult::from_deviation("berezin-exp", berezin_f, 1e-12),
        CheckResult::from_deviation("berezin-exp-exact", berezin_x, 0.0),
        CheckResult::from_deviation("exp-inverse", exp_inv, 1e-12),
    ])
}

/// `∫∫ exp(a z* z) dz dz* = a / 2 pi` in float mode and `= a` with unit
/// normalization in exact mode.
fn berezin_exp<R: Rng>(rng: &mut R, cases: usize) -> Result<(f64, f64)> {
    let order = [Gen::zeta(0), Gen::zeta_star(0)];
    let (mut df, mut dx): (f64, f64) = (0.0, 0.0);
    for _ in 0..cases {
        let a = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let q = Fl::monomial(1, &[Gen::zeta_star(0), Gen::zeta(0)], a)?.exp()?;
        let v = q.berezin_integrate(&order)?.body();
        df = df.max((v - a / (2.0 * PI)).norm() / (a / (2.0 * PI)).norm());
        let ax = ExactComplex::from_ints(rng.random_range(-50..=50), rng.random_range(-50..=50));
        let q = Ex::monomial(1, &[Gen::zeta_star(0), Gen::zeta(0)], ax.clone())?;
        let q = q.exp_nilpotent()?;
        let v = q.berezin_integrate_with(&order, &ExactComplex::one())?.body();
        dx = dx.max((v - ax).magnitude());
    }
    Ok((df, dx))
}

// ------------------------------------------------------------ supermatrices

fn sdet(m: &SuperMatrix<Complex64>, cfg: &VerifyConfig) -> Result<Fl> {
    let s = m.sdet()?;
    Ok(if cfg.fault == Some(Fault::SdetSign) { -s } else { s })
}

fn supermatrix_checks(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let pairs = 2;
    let (mut cyc, mut mult, mut forms, mut dag, mut sexp, mut real): (f64, f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..cfg.matrix_cases {
        let a: SuperMatrix<Complex64> = random_supermatrix(&mut rng, pairs, 2, 2, 3);
        let b: SuperMatrix<Complex64> = random_supermatrix(&mut rng, pairs, 2, 2, 3);
        let ab = a.try_mul(&b)?;
        let s1 = ab.supertrace()?;
        cyc = cyc.max(rel(s1.max_deviation(&b.try_mul(&a)?.supertrace()?), s1.max_coeff()));
        let sab = sdet(&ab, cfg)?;
        mult = mult.max(rel(sab.max_deviation(&(&sdet(&a, cfg)? * &sdet(&b, cfg)?)), sab.max_coeff()));
        let sa = sdet(&a, cfg)?;
        forms = forms.max(rel(sa.max_deviation(&a.sdet_second_form()?), sa.max_coeff()));
        for conv in [TransposeConvention::NuMinus, TransposeConvention::MuMinus] {
            dag = dag.max(a.dagger(conv).dagger(conv).max_deviation(&a));
        }
        let small = random_supermatrix::<Complex64, _>(&mut rng, pairs, 2, 2, 0).scale(&Complex64::new(0.3, 0.0));
        let lhs = sdet(&small.exp()?, cfg)?;
        let rhs = small.supertrace()?.exp()?;
        sexp = sexp.max(rel(lhs.max_deviation(&rhs), rhs.max_coeff()));

        let bos = (0..2).map(|_| Fl::scalar(pairs, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))).collect();
        let fer = (0..2).map(|_| random_element(&mut rng, pairs, Grade::Odd, 3, 2)).collect();
        let psi = SuperMatrix::supervector(pairs, bos, fer, SuperVectorLayout::BosonTop)?;
        let norm = psi.dagger(TransposeConvention::NuMinus).try_mul(&psi)?;
        let v = norm.get(0, 0);
        real = real.max(v.conjugate(ConjugationConvention::MinusSign)?.max_deviation(v));
    }
    let detail = serde_json::json!({ "cases": cfg.matrix_cases, "grading": "2/2", "pairs": pairs });
    Ok(vec![
        CheckResult::from_deviation("str-cyclicity", cyc, 1e-10).with_detail(detail),
        CheckResult::from_deviation("sdet-multiplicativity", mult, 1e-10),
        CheckResult::from_deviation("sdet-two-forms", forms, 1e-10),
        CheckResult::from_deviation("dagger-involution", dag, 1e-10),
        CheckResult::from_deviation("sdet-exp-str", sexp, 1e-10),
        CheckResult::from_deviation("scalar-product-reality", real, 1e-10),
    ])
}

// ------------------------------------------------------------ duality

fn duality_checks(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let betas = match cfg.beta {
        Some(b) => vec![b],
        None => vec![Beta::Orthogonal, Beta::Unitary, Beta::Symplectic],
    };
    let ns: Vec<usize> = cfg.n.map_or((1..=4).collect(), |n| vec![n]);
    let ks: Vec<usize> = cfg.k.map_or((1..=2).collect(), |k| vec![k]);
    let mut sizes = Vec::new();
    for &n in &ns {
        for &k in &ks {
            sizes.push((n, k));
        }
    }
    let mut out = Vec::new();
    for beta in betas {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ u64::from(beta.value()));
        let (mut dev, mut exact_dev): (f64, f64) = (0.0, 0.0);
        let mut herm_fail = 0usize;
        for i in 0..cfg.bundles.max(sizes.len()) {
            let (n, k) = sizes[i % sizes.len()];
            let metric: Vec<i8> = (0..k).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
            let seed = rng.random();
            // small Gaussian integers keep double arithmetic exact
            let b = VectorBundle::random(beta, n, metric, seed, true)?;
            dev = dev.max(verify_trace_duality::<Complex64>(&b, 4, 0.0)?.max_deviation);
            if n <= 2 && i < 2 * sizes.len() {
                exact_dev = exact_dev.max(verify_trace_duality::<ExactComplex>(&b, 4, 0.0)?.max_deviation);
            }
            let h = hermiticity_check::<Complex64>(&b, 0.0)?;
            let euclid = b.metric.iter().all(|&l| l == 1);
            if !h.k_hermitian || !h.k_structure || h.b_hermitian != euclid {
                herm_fail += 1;
            }
        }
        let detail = serde_json::json!({ "bundles": cfg.bundles.max(sizes.len()), "sizes": sizes, "m_max": 4 });
        let b = beta.value();
        out.push(CheckResult::from_deviation(format!("trace-duality beta={b}"), dev, 0.0).with_detail(detail));
        out.push(CheckResult::from_deviation(format!("trace-duality-exact beta={b}"), exact_dev, 0.0));
        out.push(CheckResult::from_deviation(format!("hermiticity beta={b}"), herm_fail as f64, 0.0));
    }
    Ok(out)
}

// ------------------------------------------------------------ generating functions

fn genfun_checks(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6e6);
    for beta in [Beta::Orthogonal, Beta::Unitary] {
        let mut dev: f64 = 0.0;
        let mut count = 0;
        for n in 1..=3 {
            for k in 1..=2 {
                let metric = if k == 1 { vec![1] } else { vec![1, -1] };
                let b = VectorBundle::random(beta, n, metric, rng.random(), true)?;
                let r = keystone_check_exact::<ExactComplex>(&b)?;
                dev = dev.max(r.max_deviation);
                count += 1;
            }
        }
        let b = beta.value();
        out.push(CheckResult::from_deviation(format!("keystone-exact beta={b}"), dev, 0.0).with_detail(serde_json::json!({ "bundles": count })));
        let bf = VectorBundle::random(beta, 2, vec![1, -1], rng.random(), false)?;
        out.push(CheckResult::from_deviation(format!("keystone-float beta={b}"), keystone_check(&bf, 1e-12)?.max_deviation, 1e-12));
    }

    let mut hs_dev: f64 = 0.0;
    let mut hs_res: f64 = 0.0;
    for n in [1, 2] {
        let b = VectorBundle::random(Beta::Unitary, n, vec![1], rng.random(), false)?;
        let r = hs_verify(&b, 0.7, &HsConfig::default(), 1e-6)?;
        hs_dev = hs_dev.max(r.max_deviation);
        hs_res = hs_res.max(r.convergence_residual);
    }
    out.push(CheckResult::from_deviation("hubbard-stratonovich", hs_dev, 1e-6).with_detail(serde_json::json!({ "convergence_residual": hs_res })));
    out.push(CheckResult::from_deviation("hubbard-stratonovich-convergence", hs_res, 1e-7));

    let sig = sigma_matrix(1, Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4));
    let mut dev: f64 = 0.0;
    for n in 1..=2 {
        dev = dev.max(gaussian_superintegral_check(&sig, &SourceConfig::k1(0.4, 0.1, 0.5), n, 1e-9)?.max_deviation);
    }
    out.push(CheckResult::from_deviation("gaussian-superintegral", dev, 1e-9));

    let (z_dev, z_detail) = z_super_normalization()?;
    out.push(CheckResult::from_deviation("z-super-normalization", z_dev, 1e-3).with_detail(z_detail));
    let spec = EnsembleSpec::new(EnsembleClass::Gue, 8, cfg.seed, 200);
    let v = zk_direct(&spec, &SourceConfig::k1(0.3, 0.0, 0.1), None)?;
    let d = (v.value - Complex64::new(1.0, 0.0)).norm() + v.stderr;
    out.push(CheckResult::from_deviation("zk-direct-normalization", d, 0.0));

    let b = VectorBundle::random(Beta::Unitary, 1, vec![1], rng.random(), false)?.dual_pair::<Complex64>()?.b.with_pool(3)?;
    let mut dev: f64 = 0.0;
    for f in [TestFunction::Str, TestFunction::StrSquared] {
        dev = dev.max(delta_identity(&b, f, 1e-8)?.max_deviation);
    }
    out.push(CheckResult::from_deviation("superdelta-identity", dev, 1e-8));

    let mut dev: f64 = 0.0;
    let mut fits = Vec::new();
    for n in [1, 2] {
        for m in [0, 1] {
            let r = ingham_siegel_fit(n, m, 1e-6)?;
            dev = dev.max(r.exponent_error);
            fits.push(serde_json::json!({ "n": n, "m": m, "exponent": r.fitted_exponent }));
        }
    }
    out.push(CheckResult::from_deviation("ingham-siegel-exponent", dev, 1e-6).with_detail(serde_json::Value::Array(fits)));
    Ok(out)
}

/// `z_super_k1` at `J = 0` for `N` in {1, 5, 20} and five points inside
/// the spectrum.
pub fn z_super_normalization() -> Result<(f64, serde_json::Value)> {
    let mut dev: f64 = 0.0;
    let mut rows = Vec::new();
    for n in [1usize, 5, 20] {
        let edge = (2.0 * n as f64).sqrt();
        for f in [-0.6, -0.3, 0.0, 0.25, 0.5] {
            let x = f * edge;
            let z = z_super_k1(&SourceConfig::k1(x, 0.0, 0.1), n, &ZSuperConfig::default())?;
            let d = (z - 1.0).norm();
            dev = dev.max(d);
            rows.push(serde_json::json!({ "n": n, "x": x, "deviation": d }));
        }
    }
    Ok((dev, serde_json::Value::Array(rows)))
}

// ------------------------------------------------------------ superspace diffusion

fn brownian_checks(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let r = radial_point(0.3, 0.2, 0.1);
    let s = radial_point(-0.2, 0.4, 0.1);
    let mut out = Vec::new();
    let mut dev: f64 = 0.0;
    for t in [0.1, 0.5, 1.0] {
        dev = dev.max(normalization_check(r, t, 1e-4)?.deviation);
    }
    out.push(CheckResult::from_deviation("propagator-normalization", dev, 1e-4));
    let mut dev: f64 = 0.0;
    for (t1, t2) in [(0.3, 0.5), (0.5, 0.2), (0.1, 1.0)] {
        dev = dev.max(semigroup_check(s, r, t1, t2, 1e-4)?.deviation);
    }
    out.push(CheckResult::from_deviation("propagator-semigroup", dev, 1e-4));
    out.push(CheckResult::from_deviation("propagator-delta-limit", delta_limit_check(r, 1e-3, 1e-2)?.deviation, 1e-2));
    let src = SourceConfig::k1(0.3, 0.1, 0.2);
    let mut rows = Vec::new();
    let mut dev: f64 = 0.0;
    for (i, t) in [0.1, 0.5, 1.0].into_iter().enumerate() {
        let c = convolution_check(&[1.0, -1.0], &src, t, cfg.mc_samples, cfg.seed.wrapping_add(i as u64), 1e-2)?;
        dev = dev.max(c.deviation);
        rows.push(serde_json::to_value(&c).expect("serializable"));
    }
    out.push(CheckResult::from_deviation("convolution-vs-monte-carlo", dev, 1e-2).with_detail(serde_json::Value::Array(rows)));
    Ok(out)
}

// ------------------------------------------------------------ color-flavor

fn colorflavor_checks(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let cft = CftConfig::default();
    let seeds: Vec<u64> = (0..cfg.cft_seeds as u64).map(|i| cfg.seed.wrapping_mul(1000).wrapping_add(i)).collect();
    let c = cft_compare(&cft, &seeds, 1e-8)?;
    let mut out = vec![
        CheckResult::from_deviation("color-flavor-coefficients", c.max_deviation, 1e-8)
            .with_detail(serde_json::json!({ "seeds": seeds.len(), "coefficients": c.coefficients_compared, "order": cft.order })),
        CheckResult::from_deviation("color-flavor-normalization", c.normalization_deviation, 0.0),
    ];
    let zero = CftSource::zero();
    let odd = cft_lhs(&cft, zero)?.max_deviation(&cft_rhs(&cft, zero)?);
    out.push(CheckResult::from_deviation("color-flavor-odd-sector", odd, 1e-12));
    let src = CftSource::seeded(cfg.seed);
    let lo = cft_rhs(&CftConfig::with_order(2), src)?;
    let hi = cft_rhs(&cft, src)?;
    out.push(CheckResult::from_deviation("color-flavor-truncation-stability", hi.truncated(2).max_deviation(&lo), 1e-12));

    let t = Complex64::new(0.4, 0.3);
    let same = CueAngles { theta_plus: vec![t], phi_plus: vec![t], theta_minus: vec![t], phi_minus: vec![t] };
    let v = cue_genfun_mc(&EnsembleSpec::new(EnsembleClass::Cue, 5, cfg.seed, 200), &same, None)?;
    out.push(CheckResult::from_deviation("cue-identical-angles", (v.value - 1.0).norm() + v.stderr, 0.0));
    let ang = CueAngles { theta_plus: vec![Complex64::new(0.3, 0.5)], phi_plus: vec![Complex64::new(0.6, 0.0)], ..CueAngles::default() };
    let quad = crate::quadrature::trapezoid_periodic(256);
    let exact: Complex64 = quad.iter().map(|(th, w)| crate::colorflavor::cue_ratio(&[th], &ang) * w).sum::<Complex64>() / (2.0 * PI);
    let v = cue_genfun_mc(&EnsembleSpec::new(EnsembleClass::Cue, 1, cfg.seed, 40_000), &ang, None)?;
    let d = ((v.value - exact).norm() - 3.0 * v.stderr).max(0.0);
    out.push(
        CheckResult::from_deviation("cue-phase-quadrature", d, 1e-3)
            .with_detail(serde_json::json!({ "mc": [v.value.re, v.value.im], "stderr": v.stderr, "quadrature": [exact.re, exact.im] })),
    );
    if c.max_deviation.is_nan() {
        return Err(Error::Convergence("color-flavor comparison produced NaN".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig { algebra_cases: 60, matrix_cases: 30, bundles: 8, n: Some(2), mc_samples: 20_000, cft_seeds: 3, ..VerifyConfig::default() }
    }

    #[test]
    fn algebra_suite_passes() {
        let r = run_suite(Suite::Algebra, &small()).unwrap();
        for c in &r.checks {
            eprintln!("{}", c.line());
        }
        assert!(r.passed());
    }

    #[test]
    fn sdet_fault_is_detected() {
        let cfg = VerifyConfig { fault: Some(Fault::SdetSign), ..small() };
        let r = run_suite(Suite::Algebra, &cfg).unwrap();
        let failed: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"sdet-multiplicativity"), "{failed:?}");
    }

    #[test]
    fn duality_and_colorflavor_pass() {
        for s in [Suite::Duality, Suite::Colorflavor] {
            let r = run_suite(s, &small()).unwrap();
            for c in &r.checks {
                eprintln!("{}", c.line());
            }
            assert!(r.passed());
        }
    }

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::MODULES.iter().chain([Suite::All].iter()) {
            assert_eq!(Suite::parse(s.name()).unwrap(), *s);
        }
        assert!(Suite::parse("nope").is_err());
    }
}
