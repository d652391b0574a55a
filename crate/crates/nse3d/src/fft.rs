//! Real 3D transforms between physical samples and Fourier coefficients.
//!
//! Built on per-axis plans: real-to-complex along the contiguous x-axis,
//! complex passes along y and z.  Coefficients follow the Fourier-series
//! convention `u(x) = sum_k uhat(k) exp(i 2 pi k.x / L)`, so a forward
//! transform scales the raw DFT by `1/N^3` and the inverse applies no
//! scaling.  Plans are cached per grid size and shared.

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::grid::TorusGrid;

type C = Complex<f64>;

pub struct Fft3 {
    n: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    cfwd: Arc<dyn Fft<f64>>,
    cinv: Arc<dyn Fft<f64>>,
}

static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

impl Fft3 {
    /// Shared plan set for grids with `n` points per dimension.
    pub fn get(n: usize) -> Arc<Fft3> {
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        map.entry(n)
            .or_insert_with(|| {
                let mut rp = RealFftPlanner::<f64>::new();
                let mut cp = FftPlanner::<f64>::new();
                Arc::new(Fft3 {
                    n,
                    r2c: rp.plan_fft_forward(n),
                    c2r: rp.plan_fft_inverse(n),
                    cfwd: cp.plan_fft_forward(n),
                    cinv: cp.plan_fft_inverse(n),
                })
            })
            .clone()
    }

    /// Physical samples (x-fastest, length `n^3`) to Fourier coefficients
    /// (length `n*n*(n/2+1)`).
    pub fn forward(&self, phys: &[f64]) -> Vec<C> {
        let n = self.n;
        let nxc = n / 2 + 1;
        assert_eq!(phys.len(), n * n * n);
        let mut spec = vec![C::new(0.0, 0.0); n * n * nxc];

        // x: r2c on contiguous lines
        let mut line = vec![0.0f64; n];
        let mut out = vec![C::new(0.0, 0.0); nxc];
        let mut scratch = self.r2c.make_scratch_vec();
        for zy in 0..n * n {
            line.copy_from_slice(&phys[zy * n..(zy + 1) * n]);
            self.r2c
                .process_with_scratch(&mut line, &mut out, &mut scratch)
                .expect("r2c");
            spec[zy * nxc..(zy + 1) * nxc].copy_from_slice(&out);
        }

        self.complex_pass_y(&mut spec, &self.cfwd);
        self.complex_pass_z(&mut spec, &self.cfwd);

        let scale = 1.0 / (n * n * n) as f64;
        for c in spec.iter_mut() {
            *c *= scale;
        }
        spec
    }

    /// Fourier coefficients back to physical samples on the same grid.
    pub fn inverse(&self, spec: &[C]) -> Vec<f64> {
        let n = self.n;
        let nxc = n / 2 + 1;
        assert_eq!(spec.len(), n * n * nxc);
        let mut work = spec.to_vec();
        self.inverse_in_place(&mut work)
    }

    fn inverse_in_place(&self, work: &mut [C]) -> Vec<f64> {
        let n = self.n;
        let nxc = n / 2 + 1;
        self.complex_pass_z(work, &self.cinv);
        self.complex_pass_y(work, &self.cinv);

        let mut phys = vec![0.0f64; n * n * n];
        let mut line = vec![C::new(0.0, 0.0); nxc];
        let mut out = vec![0.0f64; n];
        let mut scratch = self.c2r.make_scratch_vec();
        for zy in 0..n * n {
            line.copy_from_slice(&work[zy * nxc..(zy + 1) * nxc]);
            // Hermitian data carries rounding dust on the self-conjugate bins.
            line[0].im = 0.0;
            line[n / 2].im = 0.0;
            self.c2r
                .process_with_scratch(&mut line, &mut out, &mut scratch)
                .expect("c2r");
            phys[zy * n..(zy + 1) * n].copy_from_slice(&out);
        }
        phys
    }

    // One complex FFT pass over all y-lines (stride nxc within a z-slab).
    fn complex_pass_y(&self, data: &mut [C], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let nxc = n / 2 + 1;
        let mut line = vec![C::new(0.0, 0.0); n];
        let mut scratch = vec![C::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for iz in 0..n {
            let slab = &mut data[iz * n * nxc..(iz + 1) * n * nxc];
            for ix in 0..nxc {
                for iy in 0..n {
                    line[iy] = slab[iy * nxc + ix];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for iy in 0..n {
                    slab[iy * nxc + ix] = line[iy];
                }
            }
        }
    }

    // One complex FFT pass over all z-lines (stride n*nxc).
    fn complex_pass_z(&self, data: &mut [C], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let nxc = n / 2 + 1;
        let plane = n * nxc;
        let mut line = vec![C::new(0.0, 0.0); n];
        let mut scratch = vec![C::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for yk in 0..plane {
            for iz in 0..n {
                line[iz] = data[iz * plane + yk];
            }
            plan.process_with_scratch(&mut line, &mut scratch);
            for iz in 0..n {
                data[iz * plane + yk] = line[iz];
            }
        }
    }
}

/// Evaluate the trigonometric interpolant of `spec` (coefficients on the
/// source grid) on the finer `dst_n`-point grid by zero-padded inverse
/// transform.  Nyquist content on the source grid is split evenly between
/// the `+N/2` and `-N/2` images, which is the interpolant of minimal
/// oscillation.  Lines that received no coefficients are skipped, so
/// narrow-band fields (dyadic shells) transform cheaply.
pub fn inverse_padded(spec: &[C], src: &TorusGrid, dst_n: usize) -> Vec<f64> {
    let n = src.n();
    let m = dst_n;
    assert!(m >= n + 2, "padded grid must exceed source by Nyquist room");
    assert!(m % 2 == 0);
    let nxc = src.nxc();
    let mxc = m / 2 + 1;
    assert_eq!(spec.len(), src.spectral_len());

    let mut work = vec![C::new(0.0, 0.0); m * m * mxc];
    let half = (n / 2) as i64;
    let midx = |kz: usize, ky: usize, ix: usize| (kz * m + ky) * mxc + ix;
    let wrap_m = |k: i64| -> usize {
        if k >= 0 {
            k as usize
        } else {
            (k + m as i64) as usize
        }
    };

    // Per-axis expansions: (signed target component, weight).
    let expand = |k: i64| -> Vec<(i64, f64)> {
        if k == -half {
            vec![(-half, 0.5), (half, 0.5)]
        } else {
            vec![(k, 1.0)]
        }
    };

    // Extents actually written, tracked per axis for line skipping below.
    let mut y_used = vec![false; m];
    let mut x_hi = 0usize;

    for iz in 0..n {
        let kz = src.signed(iz);
        for iy in 0..n {
            let ky = src.signed(iy);
            for ix in 0..nxc {
                let c = spec[src.spec_idx(iz, iy, ix)];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let zs = expand(kz);
                let ys = expand(ky);
                if ix < n / 2 {
                    x_hi = x_hi.max(ix);
                    for &(z, wz) in &zs {
                        for &(y, wy) in &ys {
                            y_used[wrap_m(y)] = true;
                            work[midx(wrap_m(z), wrap_m(y), ix)] += c * (wz * wy);
                        }
                    }
                } else {
                    // Stored x-Nyquist stands for the +/-N/2 pair.  Half the
                    // value goes to +N/2; the -N/2 image is then supplied
                    // implicitly by the half-layout's conjugate mirror.
                    x_hi = x_hi.max(n / 2);
                    for &(z, wz) in &zs {
                        for &(y, wy) in &ys {
                            y_used[wrap_m(y)] = true;
                            work[midx(wrap_m(z), wrap_m(y), n / 2)] += c * (0.5 * wz * wy);
                        }
                    }
                }
            }
        }
    }

    let fft = Fft3::get(m);
    let live_y: Vec<usize> = (0..m).filter(|&i| y_used[i]).collect();

    // z-pass over lines (iy live, ix <= x_hi)
    {
        let plan = &fft.cinv;
        let mut line = vec![C::new(0.0, 0.0); m];
        let mut scratch = vec![C::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let plane = m * mxc;
        for &iy in &live_y {
            for ix in 0..=x_hi {
                let base = iy * mxc + ix;
                for iz in 0..m {
                    line[iz] = work[iz * plane + base];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for iz in 0..m {
                    work[iz * plane + base] = line[iz];
                }
            }
        }
    }
    // y-pass over lines (iz all, ix <= x_hi)
    {
        let plan = &fft.cinv;
        let mut line = vec![C::new(0.0, 0.0); m];
        let mut scratch = vec![C::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for iz in 0..m {
            let slab = &mut work[iz * m * mxc..(iz + 1) * m * mxc];
            for ix in 0..=x_hi {
                for iy in 0..m {
                    line[iy] = slab[iy * mxc + ix];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for iy in 0..m {
                    slab[iy * mxc + ix] = line[iy];
                }
            }
        }
    }
    // x-pass: c2r over all lines
    let mut phys = vec![0.0f64; m * m * m];
    {
        let mut line = vec![C::new(0.0, 0.0); mxc];
        let mut out = vec![0.0f64; m];
        let mut scratch = fft.c2r.make_scratch_vec();
        for zy in 0..m * m {
            line.copy_from_slice(&work[zy * mxc..(zy + 1) * mxc]);
            line[0].im = 0.0;
            line[m / 2].im = 0.0;
            fft.c2r
                .process_with_scratch(&mut line, &mut out, &mut scratch)
                .expect("c2r");
            phys[zy * m..(zy + 1) * m].copy_from_slice(&out);
        }
    }
    phys
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n, 1.0).unwrap()
    }

    #[test]
    fn roundtrip_random() {
        for &n in &[8usize, 16] {
            let g = grid(n);
            let fft = Fft3::get(n);
            let phys: Vec<f64> = (0..g.physical_len())
                .map(|i| ((i * 2654435761 + 12345) % 10007) as f64 / 10007.0 - 0.5)
                .collect();
            let spec = fft.forward(&phys);
            let back = fft.inverse(&spec);
            let scale = phys.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
            let err = phys
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(err / scale < 1e-12, "roundtrip err {err}");
        }
    }

    #[test]
    fn single_mode_coefficients() {
        // u(x) = A sin(2 pi x / L) -> coefficients -/+ i A/2 at k = (+/-1,0,0)
        let n = 8;
        let g = grid(n);
        let fft = Fft3::get(n);
        let a = 1.7;
        let mut phys = vec![0.0f64; g.physical_len()];
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    phys[(iz * n + iy) * n + ix] =
                        a * (2.0 * std::f64::consts::PI * ix as f64 / n as f64).sin();
                }
            }
        }
        let spec = fft.forward(&phys);
        // stored k=(1,0,0): expect -i A/2 (sin = (e^{ix} - e^{-ix}) / 2i)
        let c = spec[g.spec_idx(0, 0, 1)];
        assert!((c.re).abs() < 1e-14);
        assert!((c.im + a / 2.0).abs() < 1e-14);
        let nonzero: usize = spec
            .iter()
            .filter(|c| (c.re * c.re + c.im * c.im).sqrt() > 1e-12)
            .count();
        assert_eq!(nonzero, 1); // half-spectrum stores one of the pair
    }

    #[test]
    fn padded_interpolation_matches_exact() {
        // band-limited field evaluated on the doubled grid equals the analytic value
        let n = 8;
        let g = grid(n);
        let fft = Fft3::get(n);
        let mut phys = vec![0.0f64; g.physical_len()];
        let tau = 2.0 * std::f64::consts::PI;
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let (x, y, z) = (
                        ix as f64 / n as f64,
                        iy as f64 / n as f64,
                        iz as f64 / n as f64,
                    );
                    phys[(iz * n + iy) * n + ix] =
                        (tau * x).sin() * (tau * y).cos() + 0.5 * (tau * 2.0 * z).cos();
                }
            }
        }
        let spec = fft.forward(&phys);
        let m = 2 * n;
        let fine = inverse_padded(&spec, &g, m);
        for iz in 0..m {
            for iy in 0..m {
                for ix in 0..m {
                    let (x, y, z) = (
                        ix as f64 / m as f64,
                        iy as f64 / m as f64,
                        iz as f64 / m as f64,
                    );
                    let want = (tau * x).sin() * (tau * y).cos() + 0.5 * (tau * 2.0 * z).cos();
                    let got = fine[(iz * m + iy) * m + ix];
                    assert!((want - got).abs() < 1e-12, "at {ix},{iy},{iz}");
                }
            }
        }
    }

    #[test]
    fn padded_nyquist_split_is_exact_cosine() {
        // pure x-Nyquist mode: samples (-1)^ix, interpolant cos(pi N x / L)
        let n = 8;
        let g = grid(n);
        let fft = Fft3::get(n);
        let mut phys = vec![0.0f64; g.physical_len()];
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    phys[(iz * n + iy) * n + ix] = if ix % 2 == 0 { 1.0 } else { -1.0 };
                }
            }
        }
        let spec = fft.forward(&phys);
        let m = 2 * n;
        let fine = inverse_padded(&spec, &g, m);
        for ix in 0..m {
            let x = ix as f64 / m as f64;
            let want = (std::f64::consts::PI * n as f64 * x).cos();
            let got = fine[ix];
            assert!((want - got).abs() < 1e-12, "ix={ix}: {got} vs {want}");
        }
    }
}
