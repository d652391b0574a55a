//! Real divergence-capable vector fields on the torus with dual
//! physical/spectral representations.
//!
//! The spectral array is canonical; the physical samples are a lazily
//! filled cache (write-once, then shared read-only).  All norms follow
//! the conventions
//!
//! * `L^2`  — exact Parseval sum,
//! * `L^r`, `1 <= r < inf` — rectangle rule on the 2x zero-padded grid
//!   (trigonometric interpolation, then pointwise `|u|^r`),
//! * `L^inf` — maximum of the pointwise Euclidean magnitude over the
//!   field's own grid,
//! * `H^s`  — sharp Fourier sum `(sum_{k/=0} |2 pi k/L|^{2s} |uhat|^2 L^3)^{1/2}`.

use rustfft::num_complex::Complex;
use std::sync::OnceLock;

use crate::error::Error;
use crate::fft::{inverse_padded, Fft3};
use crate::grid::TorusGrid;
use crate::Result;

type C = Complex<f64>;

/// Velocity/forcing field with cached dual representation.
#[derive(Debug)]
pub struct VectorField {
    grid: TorusGrid,
    spectral: [Vec<C>; 3],
    physical: OnceLock<[Vec<f64>; 3]>,
    dealiased: bool,
    div_free: bool,
}

impl Clone for VectorField {
    fn clone(&self) -> Self {
        // The physical cache is cheap to regenerate; don't drag it along.
        Self {
            grid: self.grid,
            spectral: self.spectral.clone(),
            physical: OnceLock::new(),
            dealiased: self.dealiased,
            div_free: self.div_free,
        }
    }
}

impl VectorField {
    pub fn zeros(grid: TorusGrid) -> Self {
        let len = grid.spectral_len();
        Self {
            grid,
            spectral: [
                vec![C::new(0.0, 0.0); len],
                vec![C::new(0.0, 0.0); len],
                vec![C::new(0.0, 0.0); len],
            ],
            physical: OnceLock::new(),
            dealiased: true,
            div_free: true,
        }
    }

    /// Build from physical samples (x-fastest, `N^3` per component).
    /// Rejects non-finite values.
    pub fn from_physical(grid: TorusGrid, samples: [Vec<f64>; 3]) -> Result<Self> {
        for comp in &samples {
            assert_eq!(comp.len(), grid.physical_len());
            if comp.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSamples);
            }
        }
        let fft = Fft3::get(grid.n());
        let spectral = [
            fft.forward(&samples[0]),
            fft.forward(&samples[1]),
            fft.forward(&samples[2]),
        ];
        let field = Self {
            grid,
            spectral,
            physical: OnceLock::new(),
            dealiased: false,
            div_free: false,
        };
        // The originals are the exact physical image of these coefficients.
        let _ = field.physical.set(samples);
        Ok(field)
    }

    pub fn from_spectral(grid: TorusGrid, spectral: [Vec<C>; 3]) -> Self {
        for comp in &spectral {
            assert_eq!(comp.len(), grid.spectral_len());
        }
        Self {
            grid,
            spectral,
            physical: OnceLock::new(),
            dealiased: false,
            div_free: false,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn spectral(&self) -> &[Vec<C>; 3] {
        &self.spectral
    }

    pub fn is_dealiased(&self) -> bool {
        self.dealiased
    }

    pub fn is_div_free_flagged(&self) -> bool {
        self.div_free
    }

    pub(crate) fn set_flags(&mut self, dealiased: bool, div_free: bool) {
        self.dealiased = dealiased;
        self.div_free = div_free;
    }

    /// Coefficient of mode `k` (any signed integer wavevector in range).
    pub fn mode(&self, comp: usize, k: [i64; 3]) -> C {
        let g = &self.grid;
        let (k, conj) = canonical(g, k);
        let idx = g.spec_idx(g.unsigned(k[2]), g.unsigned(k[1]), k[0] as usize);
        let v = self.spectral[comp][idx];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    /// Set `uhat(k) = v` and `uhat(-k) = conj(v)`.
    pub fn set_mode(&mut self, comp: usize, k: [i64; 3], v: C) {
        let g = &self.grid;
        let (kc, conj) = canonical(g, k);
        let val = if conj { v.conj() } else { v };
        let idx = g.spec_idx(g.unsigned(kc[2]), g.unsigned(kc[1]), kc[0] as usize);
        self.spectral[comp][idx] = val;
        if kc[0] == 0 {
            // mirror lives on the same stored plane
            let midx = g.spec_idx(g.unsigned(-kc[2]), g.unsigned(-kc[1]), 0);
            self.spectral[comp][midx] = val.conj();
        }
        self.physical = OnceLock::new();
        self.dealiased = false;
        self.div_free = false;
    }

    pub fn mean_coefficient(&self, comp: usize) -> C {
        self.spectral[comp][0]
    }

    pub fn is_zero_mean(&self, tol: f64) -> bool {
        self.spectral.iter().all(|c| c[0].norm() <= tol)
    }

    pub fn zero_mean(&mut self) {
        for comp in self.spectral.iter_mut() {
            comp[0] = C::new(0.0, 0.0);
        }
        self.physical = OnceLock::new();
    }

    /// Physical samples (x-fastest), computed once and cached.
    pub fn physical(&self) -> &[Vec<f64>; 3] {
        self.physical.get_or_init(|| {
            let fft = Fft3::get(self.grid.n());
            [
                fft.inverse(&self.spectral[0]),
                fft.inverse(&self.spectral[1]),
                fft.inverse(&self.spectral[2]),
            ]
        })
    }

    /// Trig interpolation onto the 2x grid (used by the `L^r` quadrature).
    pub fn padded_physical(&self) -> [Vec<f64>; 3] {
        let m = 2 * self.grid.n();
        [
            inverse_padded(&self.spectral[0], &self.grid, m),
            inverse_padded(&self.spectral[1], &self.grid, m),
            inverse_padded(&self.spectral[2], &self.grid, m),
        ]
    }

    /// Coefficient-wise `(I - k k^T / |k|^2)`; `uhat(0)` untouched.
    pub fn leray_project(&self) -> Self {
        let g = self.grid;
        let mut out = [
            self.spectral[0].clone(),
            self.spectral[1].clone(),
            self.spectral[2].clone(),
        ];
        g.for_each_mode(|idx, k, _| {
            let ksq = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            if ksq == 0.0 {
                return;
            }
            let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
            let dot = kf[0] * out[0][idx] + kf[1] * out[1][idx] + kf[2] * out[2][idx];
            let s = dot / ksq;
            for a in 0..3 {
                out[a][idx] -= s * kf[a];
            }
        });
        Self {
            grid: g,
            spectral: out,
            physical: OnceLock::new(),
            dealiased: self.dealiased,
            div_free: true,
        }
    }

    /// Zero every coefficient with any `|k_i| > k_max` (2/3 rule).
    pub fn dealias(&self) -> Self {
        let g = self.grid;
        let kc = g.k_max() as i64;
        let mut out = [
            self.spectral[0].clone(),
            self.spectral[1].clone(),
            self.spectral[2].clone(),
        ];
        g.for_each_mode(|idx, k, _| {
            if k[0].abs() > kc || k[1].abs() > kc || k[2].abs() > kc {
                for comp in out.iter_mut() {
                    comp[idx] = C::new(0.0, 0.0);
                }
            }
        });
        Self {
            grid: g,
            spectral: out,
            physical: OnceLock::new(),
            dealiased: true,
            div_free: self.div_free,
        }
    }

    /// Multiply every coefficient by the radial symbol `f(|k|)`.
    pub fn apply_radial(&self, f: impl Fn(f64) -> f64) -> Self {
        let g = self.grid;
        let mut out = [
            self.spectral[0].clone(),
            self.spectral[1].clone(),
            self.spectral[2].clone(),
        ];
        g.for_each_mode(|idx, k, _| {
            let kk = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
            let m = f(kk);
            for comp in out.iter_mut() {
                if m == 0.0 {
                    comp[idx] = C::new(0.0, 0.0);
                } else {
                    comp[idx] *= m;
                }
            }
        });
        Self {
            grid: g,
            spectral: out,
            physical: OnceLock::new(),
            dealiased: self.dealiased,
            div_free: self.div_free,
        }
    }

    /// Spectral derivative `d/dx_axis` of every component.  Nyquist
    /// columns get the symmetric-pair derivative, which is zero.
    pub fn derivative(&self, axis: usize) -> Self {
        let g = self.grid;
        let kappa0 = g.kappa0();
        let half = (g.n() / 2) as i64;
        let mut out = [
            self.spectral[0].clone(),
            self.spectral[1].clone(),
            self.spectral[2].clone(),
        ];
        g.for_each_mode(|idx, k, _| {
            let ka = k[axis];
            let factor = if ka.abs() == half {
                C::new(0.0, 0.0)
            } else {
                C::new(0.0, kappa0 * ka as f64)
            };
            for comp in out.iter_mut() {
                comp[idx] *= factor;
            }
        });
        Self {
            grid: g,
            spectral: out,
            physical: OnceLock::new(),
            dealiased: self.dealiased,
            div_free: false,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for comp in out.spectral.iter_mut() {
            for c in comp.iter_mut() {
                *c *= s;
            }
        }
        out
    }

    fn zip(&self, other: &Self, f: impl Fn(C, C) -> C) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut spectral = self.spectral.clone();
        for (comp, ocomp) in spectral.iter_mut().zip(&other.spectral) {
            for (c, o) in comp.iter_mut().zip(ocomp) {
                *c = f(*c, *o);
            }
        }
        Self {
            grid: self.grid,
            spectral,
            physical: OnceLock::new(),
            dealiased: self.dealiased && other.dealiased,
            div_free: self.div_free && other.div_free,
        }
    }

    /// Exact `L^2` norm via Parseval.
    pub fn l2_norm(&self) -> f64 {
        let vol = self.grid.length().powi(3);
        let mut sum = 0.0;
        self.grid.for_each_mode(|idx, _, w| {
            for comp in &self.spectral {
                sum += w * comp[idx].norm_sqr();
            }
        });
        (vol * sum).sqrt()
    }

    /// `L^r` norm; see module docs for the conventions per `r`.
    pub fn lebesgue_norm(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 1.0 {
            return Err(Error::InvalidLebesgueExponent(r));
        }
        if r == 2.0 {
            return Ok(self.l2_norm());
        }
        if r.is_infinite() {
            let phys = self.physical();
            let mut max = 0.0f64;
            for i in 0..self.grid.physical_len() {
                let m2 = phys[0][i] * phys[0][i] + phys[1][i] * phys[1][i] + phys[2][i] * phys[2][i];
                if m2 > max {
                    max = m2;
                }
            }
            return Ok(max.sqrt());
        }
        let padded = self.padded_physical();
        let m = 2 * self.grid.n();
        let cell = (self.grid.length() / m as f64).powi(3);
        let mut sum = 0.0;
        for i in 0..m * m * m {
            let m2 = padded[0][i] * padded[0][i]
                + padded[1][i] * padded[1][i]
                + padded[2][i] * padded[2][i];
            sum += m2.powf(0.5 * r);
        }
        Ok((sum * cell).powf(1.0 / r))
    }

    /// Sharp Fourier `H^s` norm over `k /= 0`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        if s < 0.0 && !self.is_zero_mean(1e-14 * self.l2_norm().max(1e-300)) {
            return Err(Error::MeanNotZero);
        }
        let vol = self.grid.length().powi(3);
        let mut sum = 0.0;
        self.grid.for_each_mode(|idx, k, w| {
            if k == [0, 0, 0] {
                return;
            }
            let kap2 = self.grid.kappa_sq(k);
            let factor = kap2.powf(s);
            for comp in &self.spectral {
                sum += w * factor * comp[idx].norm_sqr();
            }
        });
        Ok((vol * sum).sqrt())
    }

    /// `||grad u||_2^2`, the enstrophy-type seminorm used throughout.
    pub fn grad_sq_norm(&self) -> f64 {
        let vol = self.grid.length().powi(3);
        let mut sum = 0.0;
        self.grid.for_each_mode(|idx, k, w| {
            let kap2 = self.grid.kappa_sq(k);
            for comp in &self.spectral {
                sum += w * kap2 * comp[idx].norm_sqr();
            }
        });
        vol * sum
    }

    /// `L^2` inner product `(u, v)`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let vol = self.grid.length().powi(3);
        let mut sum = 0.0;
        self.grid.for_each_mode(|idx, _, w| {
            for (a, b) in self.spectral.iter().zip(&other.spectral) {
                sum += w * (a[idx] * b[idx].conj()).re;
            }
        });
        vol * sum
    }

    /// Relative divergence size `max_k |k.uhat| / max_k |k| |uhat|`.
    pub fn divergence_ratio(&self) -> f64 {
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        self.grid.for_each_mode(|idx, k, _| {
            let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
            let knorm = (kf[0] * kf[0] + kf[1] * kf[1] + kf[2] * kf[2]).sqrt();
            let dot = kf[0] * self.spectral[0][idx]
                + kf[1] * self.spectral[1][idx]
                + kf[2] * self.spectral[2][idx];
            let mag = (self.spectral[0][idx].norm_sqr()
                + self.spectral[1][idx].norm_sqr()
                + self.spectral[2][idx].norm_sqr())
            .sqrt();
            num = num.max(dot.norm());
            den = den.max(knorm * mag);
        });
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Largest finite check across all coefficients.
    pub fn is_finite(&self) -> bool {
        self.spectral
            .iter()
            .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }
}

/// Map any in-range signed wavevector onto its stored representative:
/// returns (`k'` with `k'[0] >= 0`, needs-conjugate).
fn canonical(g: &TorusGrid, k: [i64; 3]) -> ([i64; 3], bool) {
    let half = (g.n() / 2) as i64;
    for &ki in &k {
        assert!(
            (-half..=half).contains(&ki),
            "wavevector component {ki} out of range for N={}",
            g.n()
        );
    }
    if k[0] < 0 {
        ([-k[0], -k[1], -k[2]], true)
    } else {
        (k, false)
    }
}
