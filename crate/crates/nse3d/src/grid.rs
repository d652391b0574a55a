//! Discretization of the periodic box `[0,L]^3`.
//!
//! Physical samples live on the uniform `N^3` grid in x-fastest order
//! (x, then y, then z).  Spectral coefficients are indexed by integer
//! wavevectors `k` with each component in `[-N/2, N/2)`; the x-axis is
//! stored half-range (`kx = 0..=N/2`) because all fields are real.

/// Cubic torus grid: side length `L`, `N` points per dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    n: usize,
    length: f64,
    k_max: usize,
}

impl TorusGrid {
    /// `n` must be even and at least 8; `length > 0`.
    pub fn new(n: usize, length: f64) -> crate::Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(crate::error::ConfigError::Range {
                key: "N".into(),
                value: n.to_string(),
                range: "even integer >= 8".into(),
            }
            .into());
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(crate::error::ConfigError::Range {
                key: "L".into(),
                value: length.to_string(),
                range: "finite and > 0".into(),
            }
            .into());
        }
        Ok(Self {
            n,
            length,
            k_max: n / 3,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Dealiasing cutoff `floor(N/3)` (2/3 rule): modes with any
    /// `|k_i| > k_max` are discarded by [`dealias`](crate::field::VectorField::dealias).
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `lambda_0 = 1/L`, the coarsest dyadic wavenumber.
    pub fn lambda0(&self) -> f64 {
        1.0 / self.length
    }

    /// `kappa_0 = 2*pi/L`, the smallest physical wavenumber magnitude.
    pub fn kappa0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// Physical wavenumber vector `2*pi*k/L` magnitude squared.
    pub fn kappa_sq(&self, k: [i64; 3]) -> f64 {
        let s = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        let f = self.kappa0();
        f * f * s
    }

    /// Grid spacing `L/N`.
    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of complex coefficients along the stored (half-range) x-axis.
    pub fn nxc(&self) -> usize {
        self.n / 2 + 1
    }

    /// Number of physical samples.
    pub fn physical_len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Number of stored spectral coefficients.
    pub fn spectral_len(&self) -> usize {
        self.n * self.n * self.nxc()
    }

    /// Flat spectral index for stored coefficient `(iz, iy, ix)`.
    #[inline]
    pub fn spec_idx(&self, iz: usize, iy: usize, ix: usize) -> usize {
        (iz * self.n + iy) * self.nxc() + ix
    }

    /// Signed wavevector component for a full-range FFT index.
    /// Index `n/2` maps to `-n/2` so components lie in `[-N/2, N/2)`.
    #[inline]
    pub fn signed(&self, i: usize) -> i64 {
        if i <= self.n / 2 && i != self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Full-range FFT index for a signed component.
    #[inline]
    pub fn unsigned(&self, k: i64) -> usize {
        if k >= 0 {
            k as usize
        } else {
            (k + self.n as i64) as usize
        }
    }

    /// Visit every stored coefficient: `f(flat_index, k, weight)` where
    /// `weight` is 2 for interior `kx` (the conjugate mirror is implicit)
    /// and 1 on the self-conjugate planes `kx = 0` and `kx = N/2`.
    ///
    /// `k[0]` is reported as the stored non-negative value; for the
    /// `kx = N/2` plane this stands for the merged `+/-N/2` pair.
    pub fn for_each_mode<F: FnMut(usize, [i64; 3], f64)>(&self, mut f: F) {
        let n = self.n;
        let nxc = self.nxc();
        let mut idx = 0;
        for iz in 0..n {
            let kz = self.signed(iz);
            for iy in 0..n {
                let ky = self.signed(iy);
                for ix in 0..nxc {
                    let w = if ix == 0 || ix == n / 2 { 1.0 } else { 2.0 };
                    f(idx, [ix as i64, ky, kz], w);
                    idx += 1;
                }
            }
        }
    }
}
