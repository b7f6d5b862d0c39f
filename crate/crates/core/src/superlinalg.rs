//! Graded matrices with Grassmann-valued entries.
//!
//! Rows and columns carry a parity: bosonic (even) or fermionic (odd). The
//! entry `(i, j)` must be even when row and column parities agree and odd
//! otherwise. For the usual boson-top layout a square supermatrix reads
//! `[[a, mu], [nu, b]]` with `a` bosonic-bosonic and `b`
//! fermionic-fermionic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{ConjugationConvention, GrassmannElement};
use crate::scalar::Coefficient;

/// Grading of a row or column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Boson,
    Fermion,
}

impl Parity {
    pub fn odd(self) -> bool {
        self == Parity::Fermion
    }
}

/// Where the minus sign of the supertranspose sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum TransposeConvention {
    /// `[[a, mu], [nu, b]]^T = [[a^T, -nu^T], [mu^T, b^T]]`.
    #[default]
    NuMinus,
    /// `[[a, mu], [nu, b]]^T = [[a^T, nu^T], [-mu^T, b^T]]`.
    MuMinus,
}

/// Ordering of bosonic and fermionic components in a supervector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuperVectorLayout {
    BosonTop,
    FermionTop,
}

type Entry<C> = GrassmannElement<C>;
type Square<C> = Vec<Vec<Entry<C>>>;

/// Graded matrix over a Grassmann algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperMatrix<C: Coefficient = Complex64> {
    pairs: u32,
    rows: Vec<Parity>,
    cols: Vec<Parity>,
    data: Vec<Entry<C>>,
}

/// Grading with `bosons` bosonic slots followed by `fermions` fermionic ones.
pub fn grading(bosons: usize, fermions: usize) -> Vec<Parity> {
    let mut g = vec![Parity::Boson; bosons];
    g.extend(std::iter::repeat_n(Parity::Fermion, fermions));
    g
}

impl<C: Coefficient> SuperMatrix<C> {
    pub fn new(pairs: u32, rows: Vec<Parity>, cols: Vec<Parity>, data: Vec<Entry<C>>) -> Result<Self> {
        if data.len() != rows.len() * cols.len() {
            return Err(Error::Shape(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows.len(),
                cols.len()
            )));
        }
        let m = Self { pairs, rows, cols, data };
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let e = m.get(i, j);
                if e.pairs() != pairs {
                    return Err(Error::PoolMismatch { left: pairs, right: e.pairs() });
                }
                let want_odd = m.rows[i].odd() != m.cols[j].odd();
                let ok = if want_odd { e.is_odd() } else { e.is_even() };
                if !ok {
                    return Err(Error::Parity(format!(
                        "entry ({i},{j}) must be {}",
                        if want_odd { "odd" } else { "even" }
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn zeros(pairs: u32, rows: Vec<Parity>, cols: Vec<Parity>) -> Self {
        let n = rows.len() * cols.len();
        Self { pairs, rows, cols, data: vec![Entry::zero(pairs); n] }
    }

    pub fn identity(pairs: u32, grade: Vec<Parity>) -> Self {
        let mut m = Self::zeros(pairs, grade.clone(), grade);
        for i in 0..m.nrows() {
            let n = m.ncols();
            m.data[i * n + i] = Entry::one(pairs);
        }
        m
    }

    /// Square boson-top supermatrix from its four blocks.
    pub fn from_blocks(pairs: u32, a: Square<C>, mu: Square<C>, nu: Square<C>, b: Square<C>) -> Result<Self> {
        let k1 = a.len();
        let k2 = b.len();
        let mut data = Vec::with_capacity((k1 + k2) * (k1 + k2));
        for i in 0..k1 + k2 {
            for j in 0..k1 + k2 {
                let e = match (i < k1, j < k1) {
                    (true, true) => a.get(i).and_then(|r| r.get(j)),
                    (true, false) => mu.get(i).and_then(|r| r.get(j - k1)),
                    (false, true) => nu.get(i - k1).and_then(|r| r.get(j)),
                    (false, false) => b.get(i - k1).and_then(|r| r.get(j - k1)),
                };
                data.push(e.cloned().ok_or_else(|| Error::Shape("block dimensions".into()))?);
            }
        }
        Self::new(pairs, grading(k1, k2), grading(k1, k2), data)
    }

    /// Supermatrix with scalar entries on the bosonic-bosonic and
    /// fermionic-fermionic positions.
    pub fn from_scalars(pairs: u32, grade: Vec<Parity>, values: &[C]) -> Result<Self> {
        let n = grade.len();
        let data = values.iter().map(|v| Entry::scalar(pairs, v.clone())).collect();
        let m = Self::new(pairs, grade.clone(), grade, data)?;
        if values.len() != n * n {
            return Err(Error::Shape("scalar matrix".into()));
        }
        Ok(m)
    }

    /// Supervector as a one-column supermatrix.
    pub fn supervector(pairs: u32, bosons: Vec<Entry<C>>, fermions: Vec<Entry<C>>, layout: SuperVectorLayout) -> Result<Self> {
        let (rows, data) = match layout {
            SuperVectorLayout::BosonTop => {
                let g = grading(bosons.len(), fermions.len());
                (g, bosons.into_iter().chain(fermions).collect())
            }
            SuperVectorLayout::FermionTop => {
                let mut g = vec![Parity::Fermion; fermions.len()];
                g.extend(std::iter::repeat_n(Parity::Boson, bosons.len()));
                (g, fermions.into_iter().chain(bosons).collect())
            }
        };
        Self::new(pairs, rows, vec![Parity::Boson], data)
    }

    pub fn pairs(&self) -> u32 {
        self.pairs
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_grading(&self) -> &[Parity] {
        &self.rows
    }

    pub fn col_grading(&self) -> &[Parity] {
        &self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Entry<C> {
        &self.data[i * self.ncols() + j]
    }

    /// Replace an entry, checking its parity.
    pub fn set(&mut self, i: usize, j: usize, e: Entry<C>) -> Result<()> {
        let want_odd = self.rows[i].odd() != self.cols[j].odd();
        if e.pairs() != self.pairs {
            return Err(Error::PoolMismatch { left: self.pairs, right: e.pairs() });
        }
        if !(if want_odd { e.is_odd() } else { e.is_even() }) {
            return Err(Error::Parity(format!("entry ({i},{j})")));
        }
        let n = self.ncols();
        self.data[i * n + j] = e;
        Ok(())
    }

    pub fn with_pool(&self, pairs: u32) -> Result<Self> {
        let data = self.data.iter().map(|e| e.with_pool(pairs)).collect::<Result<_>>()?;
        Ok(Self { pairs, rows: self.rows.clone(), cols: self.cols.clone(), data })
    }

    pub fn map_entries(&self, f: impl Fn(&Entry<C>) -> Entry<C>) -> Self {
        Self {
            pairs: self.pairs,
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    fn is_square_graded(&self) -> bool {
        self.rows == self.cols
    }

    /// Blocks `(a, mu, nu, b)` selected by parity.
    pub fn blocks(&self) -> Result<(Square<C>, Square<C>, Square<C>, Square<C>)> {
        if !self.is_square_graded() {
            return Err(Error::Shape("blocks need matching row and column grading".into()));
        }
        let bos: Vec<usize> = (0..self.nrows()).filter(|&i| !self.rows[i].odd()).collect();
        let fer: Vec<usize> = (0..self.nrows()).filter(|&i| self.rows[i].odd()).collect();
        let pick = |r: &[usize], c: &[usize]| -> Square<C> {
            r.iter().map(|&i| c.iter().map(|&j| self.get(i, j).clone()).collect()).collect()
        };
        Ok((pick(&bos, &bos), pick(&bos, &fer), pick(&fer, &bos), pick(&fer, &fer)))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.pairs != other.pairs {
            return Err(Error::PoolMismatch { left: self.pairs, right: other.pairs });
        }
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{} with different inner grading",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        let mut data = Vec::with_capacity(self.nrows() * other.ncols());
        for i in 0..self.nrows() {
            for j in 0..other.ncols() {
                let mut acc = Entry::zero(self.pairs);
                for k in 0..self.ncols() {
                    acc.add_product(self.get(i, k), other.get(k, j), false)?;
                }
                data.push(acc);
            }
        }
        Ok(Self { pairs: self.pairs, rows: self.rows.clone(), cols: other.cols.clone(), data })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape("addition of differently graded matrices".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.try_add(b)).collect::<Result<_>>()?;
        Ok(Self { pairs: self.pairs, rows: self.rows.clone(), cols: self.cols.clone(), data })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(&(-C::one())))
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map_entries(|e| e.scale(c))
    }

    /// Multiply every entry on the left by an even element.
    pub fn scale_even(&self, x: &Entry<C>) -> Result<Self> {
        if !x.is_even() {
            return Err(Error::NotEven);
        }
        let data = self.data.iter().map(|e| x.gproduct(e)).collect::<Result<_>>()?;
        Ok(Self { pairs: self.pairs, rows: self.rows.clone(), cols: self.cols.clone(), data })
    }

    /// Supertranspose.
    pub fn stranspose(&self, conv: TransposeConvention) -> Self {
        let (r, c) = (self.nrows(), self.ncols());
        let mut data = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                let flip = match conv {
                    TransposeConvention::NuMinus => self.rows[i].odd() && !self.cols[j].odd(),
                    TransposeConvention::MuMinus => !self.rows[i].odd() && self.cols[j].odd(),
                };
                let e = self.get(i, j);
                data.push(if flip { -e } else { e.clone() });
            }
        }
        Self { pairs: self.pairs, rows: self.cols.clone(), cols: self.rows.clone(), data }
    }

    /// Conjugate every entry.
    pub fn conjugate(&self, conv: ConjugationConvention) -> Result<Self> {
        let data = self.data.iter().map(|e| e.conjugate(conv)).collect::<Result<_>>()?;
        Ok(Self { pairs: self.pairs, rows: self.rows.clone(), cols: self.cols.clone(), data })
    }

    /// Superadjoint: supertranspose followed by entrywise conjugation under
    /// the minus-sign rule.
    pub fn dagger(&self, conv: TransposeConvention) -> Self {
        self.stranspose(conv).conjugate(ConjugationConvention::MinusSign).expect("single convention")
    }

    /// `sum_i (-1)^{parity(i)} M_ii`.
    pub fn supertrace(&self) -> Result<Entry<C>> {
        if !self.is_square_graded() {
            return Err(Error::Shape("supertrace of a non-square matrix".into()));
        }
        let mut acc = Entry::zero(self.pairs);
        for i in 0..self.nrows() {
            let e = self.get(i, i);
            acc = if self.rows[i].odd() { acc.try_sub(e)? } else { acc.try_add(e)? };
        }
        Ok(acc)
    }

    /// `str(self * other)` without forming the product.
    pub fn supertrace_product(&self, other: &Self) -> Result<Entry<C>> {
        if self.pairs != other.pairs {
            return Err(Error::PoolMismatch { left: self.pairs, right: other.pairs });
        }
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::Shape("supertrace of a non-square product".into()));
        }
        let mut acc = Entry::zero(self.pairs);
        for i in 0..self.nrows() {
            for k in 0..self.ncols() {
                acc.add_product(self.get(i, k), other.get(k, i), self.rows[i].odd())?;
            }
        }
        Ok(acc)
    }

    /// `str M^m` for `m = 1..=m_max`, forming powers only up to `ceil(m_max / 2)`.
    pub fn power_supertraces(&self, m_max: usize) -> Result<Vec<Entry<C>>> {
        let mut powers = vec![self.clone()];
        while powers.len() < m_max.div_ceil(2) {
            let next = powers[powers.len() - 1].try_mul(self)?;
            powers.push(next);
        }
        (1..=m_max)
            .map(|m| {
                let a = m.div_ceil(2);
                if m == a {
                    powers[a - 1].supertrace()
                } else {
                    powers[a - 1].supertrace_product(&powers[m - a - 1])
                }
            })
            .collect()
    }

    /// Ordinary trace, for purely bosonic matrices.
    pub fn trace(&self) -> Result<Entry<C>> {
        if self.rows.iter().any(|p| p.odd()) || !self.is_square_graded() {
            return Err(Error::Shape("trace needs a square bosonic matrix".into()));
        }
        self.supertrace()
    }

    /// Superdeterminant `det(a - mu b^-1 nu) / det b`.
    pub fn sdet(&self) -> Result<Entry<C>> {
        let (a, mu, nu, b) = self.blocks()?;
        if b.is_empty() {
            return even_det(&a, self.pairs);
        }
        let binv = even_inverse(&b, self.pairs).map_err(|_| Error::SingularBlock("fermion-fermion block".into()))?;
        let schur = sub(&a, &mat_mul(&mat_mul(&mu, &binv, self.pairs)?, &nu, self.pairs)?)?;
        let top = even_det(&schur, self.pairs)?;
        let detb = even_det(&b, self.pairs)?;
        top.gproduct(&detb.inverse()?)
    }

    /// Superdeterminant `det a / det(b - nu a^-1 mu)`.
    pub fn sdet_second_form(&self) -> Result<Entry<C>> {
        let (a, mu, nu, b) = self.blocks()?;
        let deta = even_det(&a, self.pairs)?;
        if b.is_empty() {
            return Ok(deta);
        }
        let ainv = even_inverse(&a, self.pairs).map_err(|_| Error::SingularBlock("boson-boson block".into()))?;
        let schur = sub(&b, &mat_mul(&mat_mul(&nu, &ainv, self.pairs)?, &mu, self.pairs)?)?;
        let den = even_det(&schur, self.pairs)?;
        deta.gproduct(&den.inverse().map_err(|_| Error::SingularBlock("boson-boson complement".into()))?)
    }

    /// Inverse from the body inverse and a terminating Neumann series in
    /// the nilpotent part.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square_graded() {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.nrows();
        let body: Vec<Vec<C>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j).body()).collect()).collect();
        let binv = numeric_inverse(body).ok_or_else(|| Error::SingularBlock("body of supermatrix".into()))?;
        let vals: Vec<C> = binv.into_iter().flatten().collect();
        let binv = Self::from_scalars(self.pairs, self.rows.clone(), &vals)?;
        let soul = self.map_entries(|e| e.soul());
        let x = binv.try_mul(&soul)?.scale(&(-C::one()));
        let mut term = Self::identity(self.pairs, self.rows.clone());
        let mut sum = term.clone();
        for _ in 0..(2 * self.pairs + 1) {
            term = term.try_mul(&x)?;
            if term.data.iter().all(|e| e.is_zero()) {
                break;
            }
            sum = sum.try_add(&term)?;
        }
        sum.try_mul(&binv)
    }

    /// Largest coefficient deviation between two equally graded matrices.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.max_deviation(b)).fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.data.iter().map(|e| e.max_coeff()).fold(0.0, f64::max)
    }

    pub fn entries(&self) -> &[Entry<C>] {
        &self.data
    }
}

impl SuperMatrix<Complex64> {
    /// Matrix exponential by scaling and squaring of a Taylor series.
    pub fn exp(&self) -> Result<Self> {
        if !self.is_square_graded() {
            return Err(Error::Shape("exp of a non-square matrix".into()));
        }
        let norm = (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.get(i, j).max_coeff()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut squarings = 0u32;
        while norm / 2f64.powi(squarings as i32) > 0.25 {
            squarings += 1;
        }
        let x = self.scale(&Complex64::new(0.5f64.powi(squarings as i32), 0.0));
        let mut term = Self::identity(self.pairs, self.rows.clone());
        let mut sum = term.clone();
        for k in 1..40 {
            term = term.try_mul(&x)?.scale(&Complex64::new(1.0 / k as f64, 0.0));
            sum = sum.try_add(&term)?;
            if term.max_coeff() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.try_mul(&sum)?;
        }
        Ok(sum)
    }
}

fn mat_mul<C: Coefficient>(a: &Square<C>, b: &Square<C>, pairs: u32) -> Result<Square<C>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    let mut out = Vec::with_capacity(a.len());
    for row in a {
        if row.len() != inner {
            return Err(Error::Shape("block product".into()));
        }
        let mut r = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut acc = Entry::zero(pairs);
            for k in 0..inner {
                acc = acc.try_add(&row[k].gproduct(&b[k][j])?)?;
            }
            r.push(acc);
        }
        out.push(r);
    }
    Ok(out)
}

fn sub<C: Coefficient>(a: &Square<C>, b: &Square<C>) -> Result<Square<C>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.try_sub(y)).collect())
        .collect()
}

/// Determinant of a square matrix of even elements.
pub fn even_det<C: Coefficient>(m: &Square<C>, pairs: u32) -> Result<Entry<C>> {
    let n = m.len();
    if n == 0 {
        return Ok(Entry::one(pairs));
    }
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let (p, mag) = (0..n)
        .map(|i| (i, m[i][0].body().magnitude()))
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if mag == 0.0 {
        // nilpotent first column: cofactor expansion
        let mut acc = Entry::zero(pairs);
        for i in 0..n {
            if m[i][0].is_zero() {
                continue;
            }
            let minor: Square<C> = (0..n).filter(|&r| r != i).map(|r| m[r][1..].to_vec()).collect();
            let t = m[i][0].gproduct(&even_det(&minor, pairs)?)?;
            acc = if i % 2 == 0 { acc.try_add(&t)? } else { acc.try_sub(&t)? };
        }
        return Ok(acc);
    }
    let pivot = &m[p][0];
    let pinv = pivot.inverse()?;
    let mut rest: Square<C> = Vec::with_capacity(n - 1);
    for i in (0..n).filter(|&i| i != p) {
        let f = m[i][0].gproduct(&pinv)?;
        let row = (1..n).map(|j| m[i][j].try_sub(&f.gproduct(&m[p][j])?)).collect::<Result<Vec<_>>>()?;
        rest.push(row);
    }
    let d = pivot.gproduct(&even_det(&rest, pairs)?)?;
    Ok(if p % 2 == 1 { -d } else { d })
}

/// Inverse of a square matrix of even elements with invertible body.
pub fn even_inverse<C: Coefficient>(m: &Square<C>, pairs: u32) -> Result<Square<C>> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv: Square<C> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Entry::one(pairs) } else { Entry::zero(pairs) }).collect()).collect();
    for col in 0..n {
        let (p, mag) = (col..n)
            .map(|i| (i, a[i][col].body().magnitude()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= 0.0 {
            return Err(Error::SingularBlock(format!("column {col}")));
        }
        a.swap(col, p);
        inv.swap(col, p);
        let pinv = a[col][col].inverse()?;
        for j in 0..n {
            a[col][j] = a[col][j].gproduct(&pinv)?;
            inv[col][j] = inv[col][j].gproduct(&pinv)?;
        }
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..n {
                a[i][j] = a[i][j].try_sub(&f.gproduct(&a[col][j])?)?;
                inv[i][j] = inv[i][j].try_sub(&f.gproduct(&inv[col][j])?)?;
            }
        }
    }
    Ok(inv)
}

fn numeric_inverse<C: Coefficient>(mut a: Vec<Vec<C>>) -> Option<Vec<Vec<C>>> {
    let n = a.len();
    let mut inv: Vec<Vec<C>> = (0..n).map(|i| (0..n).map(|j| if i == j { C::one() } else { C::zero() }).collect()).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude()))?;
        if a[p][col].is_zero() {
            return None;
        }
        a.swap(col, p);
        inv.swap(col, p);
        let r = a[col][col].recip()?;
        for j in 0..n {
            a[col][j] = a[col][j].clone() * r.clone();
            inv[col][j] = inv[col][j].clone() * r.clone();
        }
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..n {
                a[i][j] = a[i][j].clone() - f.clone() * a[col][j].clone();
                inv[i][j] = inv[i][j].clone() - f.clone() * inv[col][j].clone();
            }
        }
    }
    Some(inv)
}

/// Diagonal metric: `L_p = +1 / -1` on bosonic slots, `+1` on fermionic ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metric {
    pub bosonic: Vec<i8>,
    pub fermions: usize,
}

impl Metric {
    pub fn euclidean(bosons: usize, fermions: usize) -> Self {
        Self { bosonic: vec![1; bosons], fermions }
    }

    pub fn is_euclidean(&self) -> bool {
        self.bosonic.iter().all(|&s| s == 1)
    }

    fn grade(&self) -> Vec<Parity> {
        grading(self.bosonic.len(), self.fermions)
    }

    pub fn matrix<C: Coefficient>(&self, pairs: u32) -> SuperMatrix<C> {
        self.diag(pairs, |s| C::from_i64(s as i64))
    }

    /// `L^{1/2}` with `sqrt(-1) = i`.
    pub fn sqrt_matrix<C: Coefficient>(&self, pairs: u32) -> SuperMatrix<C> {
        self.diag(pairs, |s| if s < 0 { C::i() } else { C::one() })
    }

    fn diag<C: Coefficient>(&self, pairs: u32, f: impl Fn(i8) -> C) -> SuperMatrix<C> {
        let n = self.bosonic.len() + self.fermions;
        let mut m = SuperMatrix::zeros(pairs, self.grade(), self.grade());
        for i in 0..n {
            let s = self.bosonic.get(i).copied().unwrap_or(1);
            m.data[i * n + i] = Entry::scalar(pairs, f(s));
        }
        m
    }
}

/// Supergroup families recognised by [`check_supergroup`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SupergroupFamily {
    /// `u^dagger u = 1`.
    Unitary,
    /// `u^dagger L u = L`.
    PseudoUnitary(Metric),
    /// Unitary and `u^T J u = J` with `J` the orthosymplectic form.
    UnitaryOrthosymplectic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupergroupReport {
    pub family: SupergroupFamily,
    pub residual: f64,
    pub member: bool,
}

/// Test membership of `u` in a supergroup family; `tol` bounds the
/// largest coefficient of the defining residual.
pub fn check_supergroup(u: &SuperMatrix<Complex64>, family: SupergroupFamily, tol: f64) -> Result<SupergroupReport> {
    let id = SuperMatrix::identity(u.pairs, u.rows.clone());
    let ud = u.dagger(TransposeConvention::NuMinus);
    let residual = match &family {
        SupergroupFamily::Unitary => ud.try_mul(u)?.max_deviation(&id),
        SupergroupFamily::PseudoUnitary(metric) => {
            let l = metric.matrix::<Complex64>(u.pairs);
            ud.try_mul(&l)?.try_mul(u)?.max_deviation(&l)
        }
        SupergroupFamily::UnitaryOrthosymplectic => {
            let j = orthosymplectic_form(u)?;
            let a = ud.try_mul(u)?.max_deviation(&id);
            let b = u.stranspose(TransposeConvention::NuMinus).try_mul(&j)?.try_mul(u)?.max_deviation(&j);
            a.max(b)
        }
    };
    Ok(SupergroupReport { family, residual, member: residual <= tol })
}

fn orthosymplectic_form(u: &SuperMatrix<Complex64>) -> Result<SuperMatrix<Complex64>> {
    let (a, _, _, b) = u.blocks()?;
    let (k1, k2) = (a.len(), b.len());
    if k2 % 2 != 0 {
        return Err(Error::Shape("orthosymplectic group needs an even fermionic dimension".into()));
    }
    let n = k1 + k2;
    let mut vals = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..k1 {
        vals[i * n + i] = Complex64::new(1.0, 0.0);
    }
    for p in 0..k2 / 2 {
        let (r, s) = (k1 + 2 * p, k1 + 2 * p + 1);
        vals[r * n + s] = Complex64::new(1.0, 0.0);
        vals[s * n + r] = Complex64::new(-1.0, 0.0);
    }
    SuperMatrix::from_scalars(u.pairs, grading(k1, k2), &vals)
}

/// Berezinian of a linear change of variables given its block Jacobian
/// `[[dy/dz, dy/dzeta], [deta/dz, deta/dzeta]]`.
pub fn berezinian_linear<C: Coefficient>(jacobian: &SuperMatrix<C>) -> Result<Entry<C>> {
    jacobian.sdet()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::Gen;

    type E = GrassmannElement<Complex64>;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn s(pairs: u32, x: f64) -> E {
        E::scalar(pairs, c(x))
    }

    fn g(pairs: u32, gen: Gen) -> E {
        E::generator(pairs, gen).unwrap()
    }

    #[test]
    fn sdet_of_fermionic_block_is_inverse_det() {
        let m = SuperMatrix::from_blocks(0, vec![], vec![], vec![], vec![vec![s(0, 4.0)]]).unwrap();
        assert_eq!(m.sdet().unwrap().body(), c(0.25));
    }

    #[test]
    fn one_one_sdet_matches_closed_form() {
        let (al, be) = (g(1, Gen::zeta(0)), g(1, Gen::zeta_star(0)));
        let m = SuperMatrix::from_blocks(1, vec![vec![s(1, 2.0)]], vec![vec![al.clone()]], vec![vec![be.clone()]], vec![vec![s(1, 3.0)]])
            .unwrap();
        // (a - alpha beta / b) / b
        let expect = (s(1, 2.0) - (&al * &be).scale(&c(1.0 / 3.0))).scale(&c(1.0 / 3.0));
        assert!(m.sdet().unwrap().max_deviation(&expect) < 1e-15);
        assert!(m.sdet_second_form().unwrap().max_deviation(&expect) < 1e-15);
    }

    #[test]
    fn parity_is_enforced() {
        let r = SuperMatrix::from_blocks(1, vec![vec![g(1, Gen::zeta(0))]], vec![vec![s(1, 0.0)]], vec![vec![s(1, 0.0)]], vec![vec![s(1, 1.0)]]);
        assert!(matches!(r, Err(Error::Parity(_))));
    }

    #[test]
    fn singular_fermion_block() {
        let m = SuperMatrix::from_blocks(0, vec![vec![s(0, 1.0)]], vec![vec![s(0, 0.0)]], vec![vec![s(0, 0.0)]], vec![vec![s(0, 0.0)]])
            .unwrap();
        assert!(matches!(m.sdet(), Err(Error::SingularBlock(_))));
    }

    #[test]
    fn transpose_conventions_are_mutually_inverse() {
        let (al, be) = (g(1, Gen::zeta(0)), g(1, Gen::zeta_star(0)));
        let m = SuperMatrix::from_blocks(1, vec![vec![s(1, 2.0)]], vec![vec![al]], vec![vec![be]], vec![vec![s(1, 3.0)]]).unwrap();
        let t = m.stranspose(TransposeConvention::NuMinus).stranspose(TransposeConvention::MuMinus);
        assert_eq!(t, m);
        let tt = m.stranspose(TransposeConvention::NuMinus).stranspose(TransposeConvention::NuMinus);
        assert_eq!(tt.get(0, 1), &-m.get(0, 1));
    }

    #[test]
    fn supervector_layouts() {
        let v = SuperMatrix::supervector(1, vec![s(1, 1.0)], vec![g(1, Gen::zeta(0))], SuperVectorLayout::FermionTop).unwrap();
        assert_eq!(v.row_grading(), &[Parity::Fermion, Parity::Boson]);
        let m = Metric { bosonic: vec![-1], fermions: 1 };
        let l2 = m.sqrt_matrix::<Complex64>(0);
        assert_eq!(l2.try_mul(&l2).unwrap(), m.matrix(0));
    }

    #[test]
    fn supergroup_membership() {
        let id = SuperMatrix::<Complex64>::identity(0, grading(1, 2));
        assert!(check_supergroup(&id, SupergroupFamily::UnitaryOrthosymplectic, 1e-12).unwrap().member);
        let bad = id.scale(&c(2.0));
        assert!(!check_supergroup(&bad, SupergroupFamily::Unitary, 1e-12).unwrap().member);
        let l = Metric { bosonic: vec![1, -1], fermions: 0 };
        let (ch, sh) = (0.3f64.cosh(), 0.3f64.sinh());
        let boost = SuperMatrix::from_scalars(0, grading(2, 0), &[c(ch), c(sh), c(sh), c(ch)]).unwrap();
        assert!(check_supergroup(&boost, SupergroupFamily::PseudoUnitary(l), 1e-12).unwrap().member);
        assert!(!check_supergroup(&boost, SupergroupFamily::Unitary, 1e-12).unwrap().member);
    }
}
