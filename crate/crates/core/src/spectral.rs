//! Band-limited fields on periodic boxes and their generalized Sobolev norms.
//!
//! A [`SpectralField`] stores Fourier coefficients `c_k` of
//! `u(x) = Σ_k c_k exp(i Σ_d 2π k_d x_d / L_d)` on a box of periods `L_d`.
//! The last axis is time-like when `has_time` is set. Coefficients are kept
//! row-major over axes, each axis in FFT order (`0, 1, …, n/2−1, −n/2, …, −1`).
//!
//! Norms are the quadrature form of the Fourier-side definitions:
//!
//! ```text
//! ‖u‖²_{s,s/2;φ} = |box| Σ_k r(ξ,η)^{2s} φ²(r(ξ,η)) |c_k|²,   r = (1 + |ξ|² + |η|)^{1/2}
//! ‖u‖²_{s;φ}     = |box| Σ_k ⟨ξ⟩^{2s} φ²(⟨ξ⟩) |c_k|²,          ⟨ξ⟩ = (1 + |ξ|²)^{1/2}
//! ```
//!
//! where `|box|` is the product of the periods, so `s = 0, φ ≡ 1` gives the
//! L₂ norm over one period cell. Domain norms elsewhere in the crate are norms
//! of one explicit periodic extension and are only equivalent-norm surrogates
//! of the restriction (infimum) norms.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weights::{log_grid, RegularityIndex};

const HEADER: &str = "# spectral-field v1";

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    space_dims: usize,
    has_time: bool,
    grid: Vec<usize>,
    periods: Vec<f64>,
    coeffs: Vec<Complex64>,
}

/// Signed frequency of FFT-order index `i` on an axis of `n` points.
pub fn signed_freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn fft_index(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k < -half || k >= half {
        None
    } else if k >= 0 {
        Some(k as usize)
    } else {
        Some((k + n as i64) as usize)
    }
}

/// Neumaier-compensated running sum; deterministic for a fixed input order.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl SpectralField {
    /// Zero field. `grid` and `periods` list space axes first, then time if
    /// `has_time`.
    pub fn zeros(space_dims: usize, has_time: bool, grid: &[usize], periods: &[f64]) -> Result<Self> {
        let axes = space_dims + has_time as usize;
        if space_dims == 0 {
            return Err(Error::Argument("a field needs at least one space dimension".into()));
        }
        if grid.len() != axes || periods.len() != axes {
            return Err(Error::Argument(format!(
                "expected {axes} axes, got grid {:?} and periods {:?}",
                grid, periods
            )));
        }
        if let Some(n) = grid.iter().find(|&&n| n == 0 || n % 2 != 0) {
            return Err(Error::Argument(format!(
                "mode counts must be positive and even, got {n}"
            )));
        }
        if let Some(l) = periods.iter().find(|&&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::Argument(format!("periods must be positive, got {l}")));
        }
        let total = grid.iter().product();
        Ok(SpectralField {
            space_dims,
            has_time,
            grid: grid.to_vec(),
            periods: periods.to_vec(),
            coeffs: vec![Complex64::new(0.0, 0.0); total],
        })
    }

    pub fn from_coeffs(
        space_dims: usize,
        has_time: bool,
        grid: &[usize],
        periods: &[f64],
        coeffs: Vec<Complex64>,
    ) -> Result<Self> {
        let mut f = Self::zeros(space_dims, has_time, grid, periods)?;
        if coeffs.len() != f.coeffs.len() {
            return Err(Error::Argument(format!(
                "coefficient count {} does not match grid {:?}",
                coeffs.len(),
                grid
            )));
        }
        f.coeffs = coeffs;
        Ok(f)
    }

    /// Field whose collocation values at `x_j = j L / n` are `values`
    /// (row-major), via the forward FFT with `1/M` normalisation.
    pub fn from_samples(
        space_dims: usize,
        has_time: bool,
        grid: &[usize],
        periods: &[f64],
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let mut f = Self::from_coeffs(space_dims, has_time, grid, periods, values)?;
        fft_nd(&mut f.coeffs, &f.grid, false);
        let inv = 1.0 / f.coeffs.len() as f64;
        for c in &mut f.coeffs {
            *c *= inv;
        }
        Ok(f)
    }

    /// Collocation values at the grid points (inverse FFT).
    pub fn to_samples(&self) -> Vec<Complex64> {
        let mut v = self.coeffs.clone();
        fft_nd(&mut v, &self.grid, true);
        v
    }

    pub fn space_dims(&self) -> usize {
        self.space_dims
    }

    pub fn has_time(&self) -> bool {
        self.has_time
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Volume of one period cell.
    pub fn measure(&self) -> f64 {
        self.periods.iter().product()
    }

    fn flat_index(&self, freq: &[i64]) -> Option<usize> {
        if freq.len() != self.grid.len() {
            return None;
        }
        let mut idx = 0;
        for (&k, &n) in freq.iter().zip(&self.grid) {
            idx = idx * n + fft_index(k, n)?;
        }
        Some(idx)
    }

    /// Signed frequency vector of flat index `idx`.
    pub fn freq_of(&self, mut idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.grid.len()];
        for a in (0..self.grid.len()).rev() {
            let n = self.grid[a];
            out[a] = signed_freq(idx % n, n);
            idx /= n;
        }
        out
    }

    pub fn mode(&self, freq: &[i64]) -> Option<Complex64> {
        self.flat_index(freq).map(|i| self.coeffs[i])
    }

    pub fn set_mode(&mut self, freq: &[i64], value: Complex64) -> Result<()> {
        let i = self
            .flat_index(freq)
            .ok_or_else(|| Error::Argument(format!("frequency {freq:?} not representable on grid {:?}", self.grid)))?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Physical wavenumbers `2π k_d / L_d` of a frequency vector.
    pub fn wavenumbers(&self, freq: &[i64]) -> Vec<f64> {
        freq.iter()
            .zip(&self.periods)
            .map(|(&k, &l)| 2.0 * PI * k as f64 / l)
            .collect()
    }

    /// Iterates `(frequency vector, coefficient)` in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &c)| (self.freq_of(i), c))
    }

    pub fn scaled(&self, c: Complex64) -> SpectralField {
        let mut out = self.clone();
        for v in &mut out.coeffs {
            *v *= c;
        }
        out
    }

    /// Same function on another grid: modes outside the new grid are dropped,
    /// new modes are zero.
    pub fn resized(&self, grid: &[usize]) -> Result<SpectralField> {
        let mut out = SpectralField::zeros(self.space_dims, self.has_time, grid, &self.periods)?;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != Complex64::new(0.0, 0.0) {
                if let Some(j) = out.flat_index(&self.freq_of(i)) {
                    out.coeffs[j] = c;
                }
            }
        }
        Ok(out)
    }

    /// L₂ norm over one period cell from the coefficients (Parseval).
    pub fn l2_norm(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for c in &self.coeffs {
            acc.add(c.norm_sqr());
        }
        (self.measure() * acc.value()).sqrt()
    }

    /// L₂ norm over one period cell from collocation values.
    pub fn l2_norm_from_samples(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for v in self.to_samples() {
            acc.add(v.norm_sqr());
        }
        (self.measure() / self.coeffs.len() as f64 * acc.value()).sqrt()
    }

    /// Calls `visit(flat index, frequency, |ξ|², η)` for every mode in
    /// storage order.
    pub fn for_each_mode(&self, mut visit: impl FnMut(usize, &[i64], f64, f64)) {
        let axes = self.grid.len();
        let tables: Vec<Vec<(i64, f64)>> = self
            .grid
            .iter()
            .zip(&self.periods)
            .map(|(&n, &l)| {
                (0..n)
                    .map(|i| {
                        let k = signed_freq(i, n);
                        (k, 2.0 * PI * k as f64 / l)
                    })
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; axes];
        let mut freq: Vec<i64> = tables.iter().map(|t| t[0].0).collect();
        for flat in 0..self.coeffs.len() {
            let mut xi2 = 0.0;
            for (a, t) in tables.iter().enumerate().take(self.space_dims) {
                let w = t[idx[a]].1;
                xi2 += w * w;
            }
            let eta = if self.has_time {
                tables[axes - 1][idx[axes - 1]].1
            } else {
                0.0
            };
            visit(flat, &freq, xi2, eta);
            let mut a = axes;
            while a > 0 {
                a -= 1;
                idx[a] += 1;
                if idx[a] < self.grid[a] {
                    freq[a] = tables[a][idx[a]].0;
                    break;
                }
                idx[a] = 0;
                freq[a] = tables[a][0].0;
            }
        }
    }

    /// `sqrt(|box| Σ w(k)² |c_k|²)` for a per-mode weight.
    pub fn weighted_norm(&self, what: &str, weight: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let mut acc = CompensatedSum::default();
        let mut bad: Option<Vec<i64>> = None;
        self.for_each_mode(|i, freq, xi2, eta| {
            let a = self.coeffs[i].norm_sqr();
            if a == 0.0 || bad.is_some() {
                return;
            }
            let w = weight(xi2, eta);
            let term = w * w * a;
            if term.is_finite() {
                acc.add(term);
            } else {
                bad = Some(freq.to_vec());
            }
        });
        if let Some(mode) = bad {
            return Err(Error::Range {
                what: what.to_string(),
                mode,
            });
        }
        let total = self.measure() * acc.value();
        if !total.is_finite() {
            return Err(Error::Range {
                what: what.to_string(),
                mode: Vec::new(),
            });
        }
        Ok(total.sqrt())
    }

    /// Same as [`weighted_norm`](Self::weighted_norm) with the squared
    /// weights given per mode, in storage order.
    pub fn weighted_norm_table(&self, what: &str, weight_sq: &[f64]) -> Result<f64> {
        if weight_sq.len() != self.coeffs.len() {
            return Err(Error::Argument(format!(
                "{what}: weight table of length {} for {} modes",
                weight_sq.len(),
                self.coeffs.len()
            )));
        }
        let mut acc = CompensatedSum::default();
        for (i, (c, &w2)) in self.coeffs.iter().zip(weight_sq).enumerate() {
            let a = c.norm_sqr();
            if a == 0.0 {
                continue;
            }
            let term = w2 * a;
            if !term.is_finite() {
                return Err(Error::Range {
                    what: what.to_string(),
                    mode: self.freq_of(i),
                });
            }
            acc.add(term);
        }
        let total = self.measure() * acc.value();
        if !total.is_finite() {
            return Err(Error::Range {
                what: what.to_string(),
                mode: Vec::new(),
            });
        }
        Ok(total.sqrt())
    }

    /// Writes the documented text container.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[String]| v.join(" ");
        let _ = writeln!(s, "{HEADER}");
        let _ = writeln!(s, "space_dims {}", self.space_dims);
        let _ = writeln!(s, "time {}", self.has_time as u8);
        let _ = writeln!(
            s,
            "grid {}",
            join(&self.grid.iter().map(|n| n.to_string()).collect::<Vec<_>>())
        );
        let _ = writeln!(
            s,
            "periods {}",
            join(&self.periods.iter().map(|l| format!("{l:?}")).collect::<Vec<_>>())
        );
        let _ = writeln!(s, "coeffs {}", self.coeffs.len());
        for c in &self.coeffs {
            let _ = writeln!(s, "{:?} {:?}", c.re, c.im);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<SpectralField> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, message: String| Error::Parse {
            line: line + 1,
            column: 1,
            message,
        };
        let mut next = |expect: &str| -> Result<(usize, Vec<String>)> {
            let (no, l) = lines
                .next()
                .ok_or_else(|| perr(0, format!("unexpected end of input, expected {expect}")))?;
            Ok((no, l.split_whitespace().map(str::to_string).collect()))
        };
        let (no, head) = next("header")?;
        if head.join(" ") != HEADER {
            return Err(perr(no, format!("expected header '{HEADER}'")));
        }
        let keyed = |no: usize, toks: Vec<String>, key: &str| -> Result<Vec<String>> {
            match toks.split_first() {
                Some((k, rest)) if k == key => Ok(rest.to_vec()),
                _ => Err(perr(no, format!("expected '{key}'"))),
            }
        };
        let num = |no: usize, t: &str| -> Result<f64> {
            t.parse::<f64>().map_err(|e| perr(no, format!("bad number '{t}': {e}")))
        };
        let int = |no: usize, t: &str| -> Result<usize> {
            t.parse::<usize>()
                .map_err(|e| perr(no, format!("bad integer '{t}': {e}")))
        };
        let (no, t) = next("space_dims")?;
        let v = keyed(no, t, "space_dims")?;
        let space_dims = int(no, v.first().map(String::as_str).unwrap_or(""))?;
        let (no, t) = next("time")?;
        let v = keyed(no, t, "time")?;
        let has_time = int(no, v.first().map(String::as_str).unwrap_or(""))? != 0;
        let (no, t) = next("grid")?;
        let grid = keyed(no, t, "grid")?
            .iter()
            .map(|s| int(no, s))
            .collect::<Result<Vec<_>>>()?;
        let (no, t) = next("periods")?;
        let periods = keyed(no, t, "periods")?
            .iter()
            .map(|s| num(no, s))
            .collect::<Result<Vec<_>>>()?;
        let (no, t) = next("coeffs")?;
        let v = keyed(no, t, "coeffs")?;
        let count = int(no, v.first().map(String::as_str).unwrap_or(""))?;
        let mut coeffs = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, t) = next("coefficient")?;
            if t.len() != 2 {
                return Err(perr(no, "expected 're im'".into()));
            }
            coeffs.push(Complex64::new(num(no, &t[0])?, num(no, &t[1])?));
        }
        SpectralField::from_coeffs(space_dims, has_time, &grid, &periods, coeffs)
    }
}

fn fft_nd(data: &mut [Complex64], grid: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total = data.len();
    let mut stride = total;
    for &n in grid {
        stride /= n;
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let block = n * stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

/// `r(ξ,η) = (1 + |ξ|² + |η|)^{1/2}`.
pub fn aniso_radius(xi2: f64, eta: f64) -> f64 {
    (1.0 + xi2 + eta.abs()).sqrt()
}

/// `r(ξ,η)^s φ(r(ξ,η))`.
pub fn aniso_weight(xi: &[f64], eta: f64, idx: &RegularityIndex) -> f64 {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    idx.weight(aniso_radius(xi2, eta))
}

/// `⟨ξ⟩^s φ(⟨ξ⟩)`.
pub fn iso_weight(xi: &[f64], idx: &RegularityIndex) -> f64 {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    idx.weight((1.0 + xi2).sqrt())
}

/// Anisotropic norm `‖u‖_{H^{s,s/2;φ}}` of a space-time field.
pub fn aniso_norm(field: &SpectralField, idx: &RegularityIndex) -> Result<f64> {
    if !field.has_time {
        return Err(Error::Argument("anisotropic norm needs a time axis".into()));
    }
    field.weighted_norm("anisotropic norm", |xi2, eta| idx.weight(aniso_radius(xi2, eta)))
}

/// Isotropic norm `‖u‖_{H^{s;φ}}` of a space-only field.
pub fn iso_norm(field: &SpectralField, idx: &RegularityIndex) -> Result<f64> {
    if field.has_time {
        return Err(Error::Argument(
            "isotropic norm is defined for space-only fields".into(),
        ));
    }
    field.weighted_norm("isotropic norm", |xi2, _| idx.weight((1.0 + xi2).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingConstants {
    /// `‖·‖_{s0} ≤ c_low ‖·‖_{s,φ}`.
    pub c_low: f64,
    /// `‖·‖_{s,φ} ≤ c_high ‖·‖_{s1}`.
    pub c_high: f64,
    /// Band limit in `r` for which the constants are valid.
    pub r_max: f64,
}

/// Maximises `g` on `[1, r_max]`: dense log grid, then golden-section
/// refinement around the best grid point.
fn sup_on_band(g: impl Fn(f64) -> f64, r_max: f64) -> f64 {
    let count = 4096;
    let grid = log_grid(1.0, r_max, count);
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &r) in grid.iter().enumerate() {
        let v = g(r);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)].ln();
    let hi = grid[(best_i + 1).min(count - 1)].ln();
    let (mut a, mut b) = (lo, hi);
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if g(c.exp()) > g(d.exp()) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(g(((a + b) / 2.0).exp()))
}

/// Constants of the chained embeddings `H^{s1} ↪ H^{s;φ} ↪ H^{s0}` on fields
/// band-limited to `r ≤ r_max`.
pub fn embedding_constants(s0: f64, idx: &RegularityIndex, s1: f64, r_max: f64) -> Result<EmbeddingConstants> {
    if !(s0 < idx.s && idx.s < s1) {
        return Err(Error::Argument(format!(
            "embedding orders must satisfy s0 < s < s1, got {s0}, {}, {s1}",
            idx.s
        )));
    }
    if !(r_max >= 1.0 && r_max.is_finite()) {
        return Err(Error::Argument(format!("band limit {r_max} must be finite and >= 1")));
    }
    let s = idx.s;
    let phi = &idx.phi;
    // the sup may sit on a tabulated edge; fail loudly rather than extrapolate
    phi.eval(r_max)?;
    let c_high = sup_on_band(|r| r.powf(s - s1) * phi.at(r), r_max);
    let c_low = sup_on_band(|r| r.powf(s0 - s) / phi.at(r), r_max);
    Ok(EmbeddingConstants { c_low, c_high, r_max })
}
