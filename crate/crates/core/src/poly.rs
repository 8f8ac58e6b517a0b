//! Complex polynomials: univariate (in `p` or `ζ`), small polynomial
//! matrices over them, and multivariate polynomials in `(x, t)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Univariate polynomial with complex coefficients, lowest degree first.
#[derive(Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `z`.
    pub fn var() -> Self {
        Poly::new(vec![ZERO, ONE])
    }

    /// `∏ (z − rᵢ)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots
            .iter()
            .fold(Poly::constant(ONE), |acc, &r| &acc * &Poly::new(vec![-r, ONE]))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the stored coefficient vector (`None` for the zero polynomial).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree after discarding leading coefficients below `rel_tol · max|cₖ|`.
    pub fn effective_degree(&self, rel_tol: f64) -> Option<usize> {
        let scale = self.max_abs();
        if scale == 0.0 {
            return None;
        }
        self.coeffs.iter().rposition(|c| c.norm() > rel_tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn truncated(&self, rel_tol: f64) -> Poly {
        match self.effective_degree(rel_tol) {
            None => Poly::zero(),
            Some(d) => Poly::new(self.coeffs[..=d].to_vec()),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Long division: `self = q · divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        let dd = divisor
            .degree()
            .ok_or_else(|| Error::Argument("division by the zero polynomial".into()))?;
        let lead = divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![ZERO; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= q * d;
            }
            rem[k + dd] = ZERO;
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// All roots via eigenvalues of the companion matrix, each polished by a
    /// few Newton steps.
    ///
    /// Leading coefficients below `1e-13 · max|cₖ|` are dropped first, so the
    /// number of returned roots is the effective degree.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let p = self.truncated(1e-13);
        let deg = match p.degree() {
            None => return Err(Error::Numerical("roots of the zero polynomial".into())),
            Some(d) => d,
        };
        if deg == 0 {
            return Ok(Vec::new());
        }
        let lead = p.coeffs[deg];
        // companion matrix: ones on the subdiagonal, −cᵢ/c_d in the last column
        let mut companion = vec![vec![ZERO; deg]; deg];
        for i in 1..deg {
            companion[i][i - 1] = ONE;
        }
        for (i, row) in companion.iter_mut().enumerate() {
            row[deg - 1] = -p.coeffs[i] / lead;
        }
        let eig = hessenberg_eigenvalues(companion)
            .ok_or_else(|| Error::Numerical(format!("companion eigenvalues did not converge for {p:?}")))?;
        let dp = p.derivative();
        let roots = eig
            .into_iter()
            .map(|z0| {
                let mut z = z0;
                for _ in 0..3 {
                    let d = dp.eval(z);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = p.eval(z) / d;
                    let next = z - step;
                    if !(next.re.is_finite() && next.im.is_finite()) || p.eval(next).norm() >= p.eval(z).norm() {
                        break;
                    }
                    z = next;
                }
                z
            })
            .collect();
        Ok(roots)
    }
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR
/// with Wilkinson shifts, deflation and periodic exceptional shifts.
fn hessenberg_eigenvalues(mut h: Vec<Vec<Complex64>>) -> Option<Vec<Complex64>> {
    let n = h.len();
    let mut eig = vec![ZERO; n];
    if n == 0 {
        return Some(eig);
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[0][0];
            return Some(eig);
        }
        let mut l = hi;
        while l > 0 {
            let scale = h[l][l].norm() + h[l - 1][l - 1].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if h[l][l - 1].norm() <= eps * scale {
                h[l][l - 1] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[hi][hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 200 * n {
            return None;
        }
        let (a, b) = (h[hi - 1][hi - 1], h[hi - 1][hi]);
        let (c, d) = (h[hi][hi - 1], h[hi][hi]);
        let mu = if iter.is_multiple_of(10) {
            // exceptional shift breaks symmetric stagnation
            d + Complex64::new(0.75, 0.4375) * h[hi][hi - 1].norm()
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = d - b * c / (half + disc);
            let m2 = d - b * c / (half - disc);
            let pick = |m: Complex64| {
                if m.re.is_finite() && m.im.is_finite() {
                    Some(m)
                } else {
                    None
                }
            };
            match (pick(m1), pick(m2)) {
                (Some(x), Some(y)) => {
                    if (x - d).norm() <= (y - d).norm() {
                        x
                    } else {
                        y
                    }
                }
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => d,
            }
        };
        for k in l..=hi {
            h[k][k] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (x, y) = (h[k][k], h[k + 1][k]);
            let nrm = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cr, s) = if nrm == 0.0 {
                (1.0, ZERO)
            } else if x.norm() == 0.0 {
                (0.0, ONE)
            } else {
                (x.norm() / nrm, (x / x.norm()) * y.conj() / nrm)
            };
            for j in k..=hi {
                let (u, v) = (h[k][j], h[k + 1][j]);
                h[k][j] = u * cr + s * v;
                h[k + 1][j] = -s.conj() * u + v * cr;
            }
            rots.push((cr, s));
        }
        for (off, &(cr, s)) in rots.iter().enumerate() {
            let k = l + off;
            for row in h.iter_mut().take((k + 2).min(hi + 1)).skip(l) {
                let (u, v) = (row[k], row[k + 1]);
                row[k] = u * cr + v * s.conj();
                row[k + 1] = -u * s + v * cr;
            }
        }
        for k in l..=hi {
            h[k][k] += mu;
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-ONE)
    }
}

/// Square matrix of univariate polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    n: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(n: usize) -> Self {
        PolyMatrix {
            n,
            entries: vec![Poly::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Poly) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        PolyMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.entries[i * self.n + j] = p;
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(Poly::degree).max()
    }

    pub fn eval(&self, z: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).eval(z))
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        if self.n != rhs.n {
            return Err(Error::Argument(format!(
                "polynomial matrix size mismatch: {} vs {}",
                self.n, rhs.n
            )));
        }
        Ok(PolyMatrix::from_fn(self.n, |i, j| {
            (0..self.n).fold(Poly::zero(), |acc, k| &acc + &(self.get(i, k) * rhs.get(k, j)))
        }))
    }

    /// Determinant of the minor on `rows[first..]` × `cols` (bitmask), by
    /// cofactor expansion along the first remaining row with memoisation.
    fn minor_det(&self, rows: &[usize], cols: u32, memo: &mut BTreeMap<(usize, u32), Poly>) -> Poly {
        let depth = self.n - rows.len();
        if rows.is_empty() {
            return Poly::constant(ONE);
        }
        if let Some(p) = memo.get(&(depth, cols)) {
            return p.clone();
        }
        let r = rows[0];
        let mut acc = Poly::zero();
        let mut sign = 1.0;
        for c in 0..self.n {
            if cols & (1 << c) == 0 {
                continue;
            }
            let entry = self.get(r, c);
            if !entry.is_zero() {
                let sub = self.minor_det(&rows[1..], cols & !(1 << c), memo);
                let term = &sub * entry;
                acc = if sign > 0.0 { &acc + &term } else { &acc - &term };
            }
            sign = -sign;
        }
        memo.insert((depth, cols), acc.clone());
        acc
    }

    fn det_without(&self, row: Option<usize>, col: Option<usize>) -> Poly {
        let rows: Vec<usize> = (0..self.n).filter(|&r| Some(r) != row).collect();
        let mut cols: u32 = if self.n == 0 { 0 } else { (1u32 << self.n) - 1 };
        if let Some(c) = col {
            cols &= !(1 << c);
        }
        self.minor_det(&rows, cols, &mut BTreeMap::new())
    }

    pub fn det(&self) -> Poly {
        self.det_without(None, None)
    }

    /// Transposed matrix of cofactors: `adj[i][j] = (−1)^{i+j} M_{j,i}`.
    pub fn adjugate(&self) -> PolyMatrix {
        if self.n == 1 {
            return PolyMatrix::from_fn(1, |_, _| Poly::constant(ONE));
        }
        PolyMatrix::from_fn(self.n, |i, j| {
            let m = self.det_without(Some(j), Some(i));
            if (i + j) % 2 == 0 {
                m
            } else {
                -&m
            }
        })
    }
}

/// Multivariate polynomial in `(x₁, …, xₙ, t)`; the last exponent slot is `t`.
#[derive(Clone, PartialEq, Default)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly(")?;
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)·{:?}", c.re, c.im, e)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

/// Readable form such as `2·x1^2 + (0-1i)·x2·t`; variables are 1-based.
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.nvars - 1;
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            for (v, &k) in e.iter().enumerate().filter(|(_, &k)| k > 0) {
                let name = if v == n { "t".to_string() } else { format!("x{}", v + 1) };
                if k == 1 {
                    write!(f, "·{name}")?;
                } else {
                    write!(f, "·{name}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

impl MultiPoly {
    /// Zero polynomial in `space_dims` space variables plus time.
    pub fn zero(space_dims: usize) -> Self {
        MultiPoly {
            nvars: space_dims + 1,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space_dims: usize, c: Complex64) -> Self {
        let mut p = MultiPoly::zero(space_dims);
        p.add_term(&vec![0; space_dims], 0, c);
        p
    }

    pub fn monomial(x_exp: &[u32], t_exp: u32, c: Complex64) -> Self {
        let mut p = MultiPoly::zero(x_exp.len());
        p.add_term(x_exp, t_exp, c);
        p
    }

    pub fn space_dims(&self) -> usize {
        self.nvars - 1
    }

    pub fn add_term(&mut self, x_exp: &[u32], t_exp: u32, c: Complex64) {
        assert_eq!(x_exp.len() + 1, self.nvars, "exponent length mismatch");
        let mut key = x_exp.to_vec();
        key.push(t_exp);
        let slot = self.terms.entry(key).or_insert(ZERO);
        *slot += c;
        if *slot == ZERO {
            let mut key = x_exp.to_vec();
            key.push(t_exp);
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Complex64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no term depends on any variable.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn constant_term(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|(e, _)| e.iter().all(|&k| k == 0))
            .map(|(_, &c)| c)
            .unwrap_or(ZERO)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn t_degree(&self) -> u32 {
        self.terms.keys().map(|e| e[self.nvars - 1]).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Complex64 {
        debug_assert_eq!(x.len() + 1, self.nvars);
        let mut acc = ZERO;
        for (e, &c) in &self.terms {
            let mut m = 1.0;
            for (xi, &k) in x.iter().zip(e) {
                m *= xi.powi(k as i32);
            }
            m *= t.powi(e[self.nvars - 1] as i32);
            acc += c * m;
        }
        acc
    }

    /// `∂/∂v` where `v < space_dims` is a space variable and `v == space_dims` is `t`.
    pub fn partial(&self, var: usize) -> MultiPoly {
        let mut out = MultiPoly {
            nvars: self.nvars,
            terms: BTreeMap::new(),
        };
        for (e, &c) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e.clone();
                e2[var] -= 1;
                *out.terms.entry(e2).or_insert(ZERO) += c * e[var] as f64;
            }
        }
        out.terms.retain(|_, c| *c != ZERO);
        out
    }

    pub fn partial_t(&self, order: u32) -> MultiPoly {
        (0..order).fold(self.clone(), |p, _| p.partial(self.nvars - 1))
    }

    /// `D^α = (i∂₁)^{α₁} ⋯ (i∂ₙ)^{αₙ}` in the space variables.
    pub fn d_alpha(&self, alpha: &[u32]) -> MultiPoly {
        let mut p = self.clone();
        let mut order = 0;
        for (v, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                p = p.partial(v);
            }
            order += k;
        }
        p.scale(i_pow(order))
    }

    /// Substitutes `t = 0`.
    pub fn at_t0(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(self.space_dims());
        out.terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[self.nvars - 1] == 0)
            .map(|(e, &c)| (e.clone(), c))
            .collect();
        out
    }

    /// Substitutes `x_var = value`.
    pub fn substitute_space(&self, var: usize, value: f64) -> MultiPoly {
        let mut out = MultiPoly::zero(self.space_dims());
        for (e, &c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[var];
            e2[var] = 0;
            let x_e = &e2[..self.nvars - 1];
            out.add_term(x_e, e2[self.nvars - 1], c * value.powi(k as i32));
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> MultiPoly {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.terms.retain(|_, v| *v != ZERO);
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `iᵏ`.
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            *out.terms.entry(e.clone()).or_insert(ZERO) += c;
        }
        out.terms.retain(|_, c| *c != ZERO);
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &rhs.scale(-ONE)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = MultiPoly {
            nvars: self.nvars,
            terms: BTreeMap::new(),
        };
        for (ea, &a) in &self.terms {
            for (eb, &b) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *out.terms.entry(e).or_insert(ZERO) += a * b;
            }
        }
        out.terms.retain(|_, c| *c != ZERO);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn division_identity() {
        let a = Poly::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0), c(1.0, -1.0)]);
        let d = Poly::new(vec![c(0.5, 0.0), c(1.0, 1.0), c(3.0, 0.0)]);
        let (q, r) = a.div_rem(&d).unwrap();
        assert!(r.degree().unwrap() < 2);
        let back = &(&q * &d) + &r;
        for k in 0..5 {
            assert!((back.coeff(k) - a.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn roots_of_known_polynomial() {
        let rts = [c(1.0, 0.0), c(-2.0, 1.0), c(0.0, -3.0)];
        let p = Poly::from_roots(&rts);
        let mut got = p.roots().unwrap();
        assert_eq!(got.len(), 3);
        for r in rts {
            let (i, best) = got
                .iter()
                .enumerate()
                .map(|(i, g)| (i, (g - r).norm()))
                .fold((0, f64::MAX), |a, b| if b.1 < a.1 { b } else { a });
            assert!(best < 1e-12, "{r} not found");
            got.remove(i);
        }
    }

    #[test]
    fn effective_degree_drops_tiny_leading() {
        let p = Poly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1e-20, 0.0)]);
        assert_eq!(p.effective_degree(1e-13), Some(1));
        assert_eq!(p.roots().unwrap().len(), 1);
    }

    #[test]
    fn adjugate_2x2() {
        let m = PolyMatrix::from_fn(2, |i, j| Poly::from_real(&[(i * 2 + j) as f64 + 1.0, 1.0]));
        let adj = m.adjugate();
        assert_eq!(adj.get(0, 0), m.get(1, 1));
        assert_eq!(adj.get(1, 1), m.get(0, 0));
        assert_eq!(*adj.get(0, 1), -m.get(0, 1));
        assert_eq!(*adj.get(1, 0), -m.get(1, 0));
    }

    #[test]
    fn d_alpha_uses_i_derivative() {
        // D₁ x₁² = 2i x₁ ; D₁² x₁² = -2
        let p = MultiPoly::monomial(&[2, 0], 0, c(1.0, 0.0));
        let d1 = p.d_alpha(&[1, 0]);
        assert_eq!(d1, MultiPoly::monomial(&[1, 0], 0, c(0.0, 2.0)));
        let d2 = p.d_alpha(&[2, 0]);
        assert_eq!(d2, MultiPoly::constant(2, c(-2.0, 0.0)));
    }

    #[test]
    fn substitute_and_t0() {
        let mut p = MultiPoly::monomial(&[1, 1], 1, c(2.0, 0.0));
        p.add_term(&[2, 0], 0, c(1.0, 0.0));
        assert_eq!(p.at_t0(), MultiPoly::monomial(&[2, 0], 0, c(1.0, 0.0)));
        let q = p.substitute_space(0, 3.0);
        assert_eq!(q.eval(&[100.0, 2.0], 0.5), p.eval(&[3.0, 2.0], 0.5));
    }
}
