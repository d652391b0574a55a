//! Littlewood-Paley dyadic decomposition.
//!
//! A fixed smooth radial profile `chi` with
//!
//! ```text
//! chi(xi) = 1 for xi <= 3/4,    chi(xi) = 0 for xi >= 1,
//! ```
//!
//! generates the dyadic family `phi(xi) = chi(xi/2) - chi(xi)`,
//! `phi_q(xi) = phi(2^{-q} xi)` for `q >= 0` and `phi_{-1} = chi`, which
//! telescopes to a partition of unity.  The q-th shell projection of a
//! field multiplies `uhat(k)` by `phi_q(|k|)` where `|k|` is the integer
//! wavevector magnitude, so the shell wavenumber is `lambda_q = 2^q / L`.
//!
//! The low-pass `u_{<=Q} = sum_{q<=Q} u_q` therefore has the symbol
//! `chi(2^{-(Q+1)} |k|)`: it passes `|k| <= (3/4) 2^{Q+1}` untouched and
//! vanishes for `|k| >= 2^{Q+1}`.  Two fields with identical coefficients
//! on `|k| < 2^{Q+1}` have bit-identical low-passes.
//!
//! Everything here is pure; per-shell projections are independent.

use std::collections::HashMap;

use crate::error::Error;
use crate::field::VectorField;
use crate::grid::TorusGrid;
use crate::Result;

/// Smooth transition `exp(-1/t)`, extended by zero.
fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Radial cutoff: exactly 1 on `[0, 3/4]`, exactly 0 on `[1, inf)`,
/// smooth and nonincreasing in between.
pub fn chi(xi: f64) -> f64 {
    let t = ((xi - 0.75) * 4.0).clamp(0.0, 1.0);
    let a = bump(1.0 - t);
    let b = bump(t);
    a / (a + b)
}

/// Dyadic annulus profile `phi(xi) = chi(xi/2) - chi(xi)`, supported on
/// `(3/4, 2)`.
pub fn phi(xi: f64) -> f64 {
    chi(xi / 2.0) - chi(xi)
}

/// `phi_q`: the annulus at scale `2^q` for `q >= 0`, the core `chi` at
/// `q = -1`.
pub fn phi_q(q: i64, xi: f64) -> f64 {
    if q == -1 {
        chi(xi)
    } else {
        phi(xi / (1u64 << q as u64) as f64)
    }
}

/// Shell wavenumber `lambda_q = 2^q / L` (finite `q >= -1`).
pub fn lambda_q(grid: &TorusGrid, q: i64) -> f64 {
    2f64.powi(q as i32) / grid.length()
}

/// Largest shell index whose annulus meets the dealiased band.  Shells
/// above it are identically zero for dealiased fields, so quantifiers
/// over "all p > q" run to this index and are vacuous beyond (a
/// truncation effect of the finite grid).
pub fn shell_index_max(grid: &TorusGrid) -> i64 {
    let top = 3f64.sqrt() * grid.k_max() as f64;
    let mut q = 0i64;
    while 0.75 * 2f64.powi(q as i32 + 1) < top {
        q += 1;
    }
    q
}

/// Littlewood-Paley projection `Delta_q u`: multiply `uhat(k)` by
/// `phi_q(|k|)`.  Zero-mean for `q >= 0`.
pub fn project_shell(u: &VectorField, q: i64) -> VectorField {
    assert!(q >= -1, "shell index must be >= -1");
    u.apply_radial(|kk| phi_q(q, kk))
}

/// Low-mode part `u_{<=Q}`: multiply by `chi(2^{-(Q+1)} |k|)`.
pub fn project_below(u: &VectorField, big_q: i64) -> VectorField {
    assert!(big_q >= -1, "cutoff index must be >= -1");
    let scale = 2f64.powi((big_q + 1) as i32);
    u.apply_radial(|kk| chi(kk / scale))
}

/// Per-shell `L^r` norms for `q = -1 ..= shell_index_max`; index `i`
/// holds shell `q = i - 1`.  Shells beyond the table are exactly zero
/// for dealiased fields.
pub fn shell_norms(u: &VectorField, r: f64) -> Result<Vec<f64>> {
    if r.is_nan() || r <= 1.0 {
        return Err(Error::InvalidLebesgueExponent(r));
    }
    let qmax = shell_index_max(u.grid());
    let mut out = Vec::with_capacity((qmax + 2) as usize);
    for q in -1..=qmax {
        out.push(project_shell(u, q).lebesgue_norm(r)?);
    }
    Ok(out)
}

/// Measured Bernstein quotient `||u_q||_r / (lambda_q^{3(1/s - 1/r)} ||u_q||_s)`
/// for a field supported on shell `q`.
pub fn bernstein_ratio(u_q: &VectorField, q: i64, s: f64, r: f64) -> Result<f64> {
    if s.is_nan() || s < 1.0 || r < s {
        return Err(Error::InvalidLebesgueExponent(if s < 1.0 { s } else { r }));
    }
    let ns = u_q.lebesgue_norm(s)?;
    if ns == 0.0 {
        return Err(Error::ZeroShellNorm);
    }
    let nr = u_q.lebesgue_norm(r)?;
    let lam = lambda_q(u_q.grid(), q);
    let expo = 3.0 * (1.0 / s - if r.is_infinite() { 0.0 } else { 1.0 / r });
    Ok(nr / (lam.powf(expo) * ns))
}

/// All shells of one field, with a per-exponent norm cache.
pub struct ShellDecomposition {
    shells: Vec<VectorField>,
    q_max: i64,
    norm_cache: HashMap<u64, Vec<f64>>,
}

impl ShellDecomposition {
    pub fn new(u: &VectorField) -> Self {
        let q_max = shell_index_max(u.grid());
        let shells = (-1..=q_max).map(|q| project_shell(u, q)).collect();
        Self {
            shells,
            q_max,
            norm_cache: HashMap::new(),
        }
    }

    pub fn q_max(&self) -> i64 {
        self.q_max
    }

    /// Shell `q` (in `-1 ..= q_max`).
    pub fn shell(&self, q: i64) -> &VectorField {
        &self.shells[(q + 1) as usize]
    }

    /// `sum_q u_q` over all resolved shells.
    pub fn reconstruct(&self) -> VectorField {
        let mut acc = self.shells[0].clone();
        for s in &self.shells[1..] {
            acc = acc.add(s);
        }
        acc
    }

    /// Per-shell `L^r` norms, cached per exponent; index `i` is shell `i-1`.
    pub fn norms(&mut self, r: f64) -> Result<Vec<f64>> {
        if let Some(v) = self.norm_cache.get(&r.to_bits()) {
            return Ok(v.clone());
        }
        let mut out = Vec::with_capacity(self.shells.len());
        for s in &self.shells {
            out.push(s.lebesgue_norm(r)?);
        }
        self.norm_cache.insert(r.to_bits(), out.clone());
        Ok(out)
    }
}
