//! Pseudo-spectral time integration of the forced incompressible
//! Navier-Stokes equations on the torus.
//!
//! The pressure gradient is eliminated by the Leray projection, so the
//! advanced equation is `u_t = -P[(u.grad)u] + nu Lap u + f` on
//! divergence-free, zero-mean, dealiased coefficients.  Time stepping is
//! fourth-order exponential time differencing (Cox-Matthews ETDRK4): the
//! viscous factor `exp(-nu kappa^2 dt)` is treated exactly, the
//! nonlinearity and forcing explicitly.  The advective term is evaluated
//! pseudo-spectrally in convective form: transform `u` and `grad u` to
//! physical space, multiply pointwise, transform back, dealias, project.
//!
//! A single solver state is advanced by one owner; all per-step
//! temporaries are local, so independent runs may proceed concurrently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;

use crate::error::Error;
use crate::fft::Fft3;
use crate::field::VectorField;
use crate::grid::TorusGrid;
use crate::Result;

type C = Complex<f64>;

/// Deterministic body force, zero-mean and divergence-free.
#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    None,
    /// ABC-type steady forcing on wavenumber `k_f`:
    /// `A (sin kz + cos ky, sin kx + cos kz, sin ky + cos kx)`.
    SteadyLowMode { amplitude: f64, k_f: usize },
    /// Explicit coefficient list: `(k, [fx, fy, fz])`; conjugate partners
    /// are implied.  Projected and dealiased on construction.
    Custom(Vec<([i64; 3], [C; 3])>),
}

impl ForcingSpec {
    /// Realize the force as a spectral field on `grid`.
    pub fn build(&self, grid: &TorusGrid) -> VectorField {
        let mut f = VectorField::zeros(*grid);
        match self {
            ForcingSpec::None => {}
            ForcingSpec::SteadyLowMode { amplitude, k_f } => {
                let a = *amplitude;
                let k = *k_f as i64;
                // sin -> -i a/2 at +k; cos -> a/2 at +k
                f.set_mode(0, [0, 0, k], C::new(0.0, -a / 2.0));
                f.set_mode(0, [0, k, 0], C::new(a / 2.0, 0.0));
                f.set_mode(1, [k, 0, 0], C::new(0.0, -a / 2.0));
                f.set_mode(1, [0, 0, k], C::new(a / 2.0, 0.0));
                f.set_mode(2, [0, k, 0], C::new(0.0, -a / 2.0));
                f.set_mode(2, [k, 0, 0], C::new(a / 2.0, 0.0));
            }
            ForcingSpec::Custom(modes) => {
                for (k, amps) in modes {
                    for comp in 0..3 {
                        f.set_mode(comp, *k, amps[comp]);
                    }
                }
            }
        }
        let mut f = f.dealias().leray_project();
        f.zero_mean();
        f
    }
}

/// Seeded random divergence-free field with spectrum `E(k) ~ k^4 exp(-k^2/k0^2)`.
///
/// Every mode draws from its own stream keyed by the integer wavevector,
/// so grids of different resolution agree on shared modes (up to the
/// overall normalization, whose band tail is negligible for `k0` well
/// inside the dealiased band).  `rms` sets the root-mean-square velocity.
pub fn random_divergence_free(grid: &TorusGrid, seed: u64, rms: f64, k0: f64) -> VectorField {
    let mut f = VectorField::zeros(*grid);
    let kc = grid.k_max() as i64;
    for kz in -kc..=kc {
        for ky in -kc..=kc {
            for kx in 0..=kc {
                // canonical half-space representative of each +/-k pair
                let canonical =
                    kx > 0 || (kx == 0 && ky > 0) || (kx == 0 && ky == 0 && kz > 0);
                if !canonical {
                    continue;
                }
                let ksq = (kx * kx + ky * ky + kz * kz) as f64;
                let kk = ksq.sqrt();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(mode_key(kx, ky, kz));
                let mut a = [C::new(0.0, 0.0); 3];
                for comp in a.iter_mut() {
                    let (re, im) = (std_normal(&mut rng), std_normal(&mut rng));
                    *comp = C::new(re, im);
                }
                // divergence-free: remove the component along k
                let kf = [kx as f64, ky as f64, kz as f64];
                let dot = kf[0] * a[0] + kf[1] * a[1] + kf[2] * a[2];
                for (comp, &ki) in a.iter_mut().zip(&kf) {
                    *comp -= dot * (ki / ksq);
                }
                let amp = kk * (-ksq / (2.0 * k0 * k0)).exp();
                for comp in 0..3 {
                    f.set_mode(comp, [kx, ky, kz], a[comp] * amp);
                }
            }
        }
    }
    let mut f = f.dealias().leray_project();
    f.zero_mean();
    let target = rms * grid.length().powf(1.5);
    let now = f.l2_norm();
    if now > 0.0 {
        f = f.scale(target / now);
    }
    f
}

fn mode_key(kx: i64, ky: i64, kz: i64) -> u64 {
    (((kx + 512) as u64) << 40) | (((ky + 512) as u64) << 20) | ((kz + 512) as u64)
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on (0,1] uniforms
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Trajectory point: time, step counter, and the (divergence-free,
/// zero-mean, dealiased) velocity.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub step: u64,
    pub u: VectorField,
}

impl SolverState {
    pub fn new(u: VectorField) -> Self {
        let mut u = u.dealias().leray_project();
        u.zero_mean();
        Self { t: 0.0, step: 0, u }
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub u_max: f64,
    /// Advective CFL bound `0.5 dx / |u|_inf`; a step larger than this is
    /// flagged but not rejected.
    pub cfl_dt: f64,
    pub cfl_violated: bool,
}

/// Energy-budget sample: `(energy, enstrophy, injection)` =
/// `(1/2 ||u||_2^2, ||grad u||_2^2, (f, u))`.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBudget {
    pub energy: f64,
    pub enstrophy: f64,
    pub injection: f64,
}

pub fn energy_budget(u: &VectorField, forcing: &VectorField) -> EnergyBudget {
    EnergyBudget {
        energy: 0.5 * u.l2_norm().powi(2),
        enstrophy: u.grad_sq_norm(),
        injection: forcing.inner(u),
    }
}

/// Cox-Matthews ETDRK4 with exact viscous integrating factor, planned
/// for a fixed `(grid, nu, dt)`.
pub struct Etdrk4 {
    grid: TorusGrid,
    nu: f64,
    dt: f64,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
    q_half: Vec<f64>,
    w1: Vec<f64>,
    w2: Vec<f64>,
    w3: Vec<f64>,
}

impl Etdrk4 {
    pub fn new(grid: TorusGrid, nu: f64, dt: f64) -> Self {
        assert!(dt > 0.0 && nu >= 0.0);
        let len = grid.spectral_len();
        let mut e_full = vec![0.0; len];
        let mut e_half = vec![0.0; len];
        let mut q_half = vec![0.0; len];
        let mut w1 = vec![0.0; len];
        let mut w2 = vec![0.0; len];
        let mut w3 = vec![0.0; len];
        grid.for_each_mode(|idx, k, _| {
            let z = -nu * grid.kappa_sq(k) * dt;
            let zh = 0.5 * z;
            e_full[idx] = z.exp();
            e_half[idx] = zh.exp();
            q_half[idx] = 0.5 * dt * phi1(zh);
            w1[idx] = dt * (phi1(z) - 3.0 * phi2(z) + 4.0 * phi3(z));
            w2[idx] = 2.0 * dt * (phi2(z) - 2.0 * phi3(z));
            w3[idx] = dt * (4.0 * phi3(z) - phi2(z));
        });
        Self {
            grid,
            nu,
            dt,
            e_full,
            e_half,
            q_half,
            w1,
            w2,
            w3,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `-P[(u.grad)u] + f`, the explicit part of the right-hand side.
    pub fn nonlinear_rhs(&self, u: &VectorField, forcing: &VectorField) -> Result<VectorField> {
        let rhs = nonlinear_term(u)?;
        Ok(rhs.add(forcing))
    }

    /// Advance one step.  Returns the new state plus CFL diagnostics.
    /// Aborts with the state's time and step if non-finite values appear.
    pub fn step(&self, state: &SolverState, forcing: &VectorField) -> Result<(SolverState, StepInfo)> {
        let u = &state.u;
        let nonfinite = || Error::NonFiniteState {
            t: state.t,
            step: state.step,
        };

        let n1 = self
            .nonlinear_rhs(u, forcing)
            .map_err(|_| nonfinite())?;

        // CFL from the physical image of u (already materialized by the
        // nonlinear evaluation above).
        let u_max = u.lebesgue_norm(f64::INFINITY).expect("inf norm");
        let cfl_dt = 0.5 * self.grid.dx() / u_max.max(1e-300);
        let info = StepInfo {
            u_max,
            cfl_dt,
            cfl_violated: self.dt > cfl_dt,
        };

        let a = self.combine2(u, &self.e_half, &n1, &self.q_half);
        let n2 = self.nonlinear_rhs(&a, forcing).map_err(|_| nonfinite())?;
        let b = self.combine2(u, &self.e_half, &n2, &self.q_half);
        let n3 = self.nonlinear_rhs(&b, forcing).map_err(|_| nonfinite())?;
        // c = E2 a + q (2 n3 - n1)
        let two_n3_minus_n1 = n3.scale(2.0).sub(&n1);
        let c = self.combine2(&a, &self.e_half, &two_n3_minus_n1, &self.q_half);
        let n4 = self.nonlinear_rhs(&c, forcing).map_err(|_| nonfinite())?;

        let mut spectral = [
            vec![C::new(0.0, 0.0); self.grid.spectral_len()],
            vec![C::new(0.0, 0.0); self.grid.spectral_len()],
            vec![C::new(0.0, 0.0); self.grid.spectral_len()],
        ];
        for comp in 0..3 {
            let uc = &u.spectral()[comp];
            let c1 = &n1.spectral()[comp];
            let c2 = &n2.spectral()[comp];
            let c3 = &n3.spectral()[comp];
            let c4 = &n4.spectral()[comp];
            let out = &mut spectral[comp];
            for i in 0..out.len() {
                out[i] = uc[i] * self.e_full[i]
                    + c1[i] * self.w1[i]
                    + (c2[i] + c3[i]) * self.w2[i]
                    + c4[i] * self.w3[i];
            }
        }
        let mut new_u = VectorField::from_spectral(self.grid, spectral)
            .dealias()
            .leray_project();
        new_u.zero_mean();
        if !new_u.is_finite() {
            return Err(nonfinite());
        }
        Ok((
            SolverState {
                t: state.t + self.dt,
                step: state.step + 1,
                u: new_u,
            },
            info,
        ))
    }

    // E .* base + Q .* rhs, coefficient-wise real weights
    fn combine2(&self, base: &VectorField, e: &[f64], rhs: &VectorField, q: &[f64]) -> VectorField {
        let len = self.grid.spectral_len();
        let mut spectral = [
            vec![C::new(0.0, 0.0); len],
            vec![C::new(0.0, 0.0); len],
            vec![C::new(0.0, 0.0); len],
        ];
        for comp in 0..3 {
            let b = &base.spectral()[comp];
            let r = &rhs.spectral()[comp];
            let out = &mut spectral[comp];
            for i in 0..len {
                out[i] = b[i] * e[i] + r[i] * q[i];
            }
        }
        let mut f = VectorField::from_spectral(self.grid, spectral);
        f.set_flags(true, true);
        f
    }
}

/// `-P[(u.grad)u]`, dealiased and projected; zero-mean by construction.
pub fn nonlinear_term(u: &VectorField) -> Result<VectorField> {
    let grid = *u.grid();
    let n = grid.n();
    let fft = Fft3::get(n);
    let phys = u.physical();
    for comp in phys {
        if comp.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSamples);
        }
    }

    let kappa0 = grid.kappa0();
    let half = (n / 2) as i64;
    let len = grid.physical_len();
    let mut conv = [vec![0.0f64; len], vec![0.0f64; len], vec![0.0f64; len]];
    let mut dspec = vec![C::new(0.0, 0.0); grid.spectral_len()];
    for i in 0..3 {
        for axis in 0..3 {
            // d u_i / d x_axis, spectrally
            let src = &u.spectral()[i];
            grid.for_each_mode(|idx, k, _| {
                let ka = k[axis];
                dspec[idx] = if ka.abs() == half {
                    C::new(0.0, 0.0)
                } else {
                    src[idx] * C::new(0.0, kappa0 * ka as f64)
                };
            });
            let dphys = fft.inverse(&dspec);
            let uj = &phys[axis];
            let acc = &mut conv[i];
            for p in 0..len {
                acc[p] += uj[p] * dphys[p];
            }
        }
    }

    let spectral = [
        fft.forward(&conv[0]),
        fft.forward(&conv[1]),
        fft.forward(&conv[2]),
    ];
    let mut out = VectorField::from_spectral(grid, spectral)
        .scale(-1.0)
        .dealias()
        .leray_project();
    out.zero_mean();
    if !out.is_finite() {
        return Err(Error::NonFiniteSamples);
    }
    Ok(out)
}

/// Relaxation outcome with convergence history.
#[derive(Debug)]
pub struct RelaxOutcome {
    pub field: VectorField,
    pub steps: u64,
    pub residuals: Vec<f64>,
    /// Set when the Grashof-like ratio suggests the small-force regime is
    /// violated (caller asked for a steady state anyway).
    pub grashof_warning: Option<f64>,
}

/// Time-march to a steady state of the forced equation.
///
/// Starts from the Stokes solution `uhat = fhat / (nu kappa^2)` and
/// advances until `||u(t+D) - u(t)||_2 / D <= tol * nu * lambda0^2 * ||u||_2`.
pub fn relax_to_steady(
    grid: &TorusGrid,
    forcing: &VectorField,
    nu: f64,
    tol: f64,
) -> Result<RelaxOutcome> {
    assert!(nu > 0.0 && tol > 0.0);
    let g = *grid;
    // Stokes initial guess
    let mut stokes = forcing.apply_radial(|_| 1.0); // clone with flags kept
    {
        let mut spectral = stokes.spectral().clone();
        g.for_each_mode(|idx, k, _| {
            let ks = g.kappa_sq(k);
            let factor = if ks == 0.0 { 0.0 } else { 1.0 / (nu * ks) };
            for comp in spectral.iter_mut() {
                comp[idx] *= factor;
            }
        });
        stokes = VectorField::from_spectral(g, spectral).dealias().leray_project();
        stokes.zero_mean();
    }

    let grashof_warning = {
        let kappa0 = g.kappa0();
        let fh = forcing.sobolev_norm(-1.0)?;
        let gnum = fh / (nu * nu * kappa0.sqrt());
        (gnum > 1.0).then_some(gnum)
    };

    let u_scale = stokes.lebesgue_norm(f64::INFINITY).expect("inf");
    let dt = (0.25 * g.dx() / u_scale.max(1e-12)).min(0.25 / (nu * g.lambda0().powi(2)) / 100.0);
    let stepper = Etdrk4::new(g, nu, dt);
    let mut state = SolverState::new(stokes);

    let check_every = ((0.5 / (nu * g.kappa0().powi(2))) / dt).ceil().max(1.0) as u64;
    let max_steps = 400_000u64;
    let mut residuals = Vec::new();
    let mut prev = state.u.clone();
    loop {
        let (next, _) = stepper.step(&state, forcing)?;
        state = next;
        if state.step % check_every == 0 {
            let elapsed = check_every as f64 * dt;
            let resid = state.u.sub(&prev).l2_norm() / elapsed;
            residuals.push(resid);
            let threshold = tol * nu * g.lambda0().powi(2) * state.u.l2_norm().max(1e-300);
            if resid <= threshold {
                return Ok(RelaxOutcome {
                    field: state.u,
                    steps: state.step,
                    residuals,
                    grashof_warning,
                });
            }
            prev = state.u.clone();
        }
        if state.step >= max_steps {
            let tail = residuals.iter().rev().take(8).copied().collect();
            return Err(Error::NoConvergence {
                max_steps,
                tail,
            });
        }
    }
}

// phi functions of exponential integrators, real argument; series below
// |z| = 1/2 to dodge cancellation.
fn phi1(z: f64) -> f64 {
    if z.abs() < 0.5 {
        phi_series(z, 1)
    } else {
        z.exp_m1() / z
    }
}

fn phi2(z: f64) -> f64 {
    if z.abs() < 0.5 {
        phi_series(z, 2)
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

fn phi3(z: f64) -> f64 {
    if z.abs() < 0.5 {
        phi_series(z, 3)
    } else {
        (z.exp_m1() - z - 0.5 * z * z) / (z * z * z)
    }
}

// phi_j(z) = sum_{n>=0} z^n / (n + j)!
fn phi_series(z: f64, j: u32) -> f64 {
    let mut fact = 1.0f64;
    for i in 1..=j {
        fact *= i as f64;
    }
    let mut term = 1.0 / fact;
    let mut sum = term;
    for n in 1..=18u32 {
        term *= z / (n + j) as f64;
        sum += term;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = std::f64::consts::TAU;

    fn grid(n: usize, l: f64) -> TorusGrid {
        TorusGrid::new(n, l).unwrap()
    }

    fn sine_shear(g: &TorusGrid, a: f64) -> VectorField {
        let mut f = VectorField::zeros(*g);
        f.set_mode(1, [1, 0, 0], C::new(0.0, -a / 2.0));
        f.dealias().leray_project()
    }

    fn taylor_green_2d(g: &TorusGrid, a: f64) -> VectorField {
        // (sin x cos y, -cos x sin y, 0) on L = 2 pi, single |k|=sqrt(2) pair set
        let mut f = VectorField::zeros(*g);
        // sin x cos y = 1/4 i (e^{-i(x+y)} + e^{-i(x-y)} - e^{i(x+y)} - e^{i(x-y)})
        // coefficients: at k=(1,1,0): -i/4; k=(1,-1,0): -i/4 (conjugates implied)
        f.set_mode(0, [1, 1, 0], C::new(0.0, -a / 4.0));
        f.set_mode(0, [1, -1, 0], C::new(0.0, -a / 4.0));
        // -cos x sin y: at k=(1,1,0): +i a/4; at k=(1,-1,0): -i a/4... sign check below
        f.set_mode(1, [1, 1, 0], C::new(0.0, a / 4.0));
        f.set_mode(1, [1, -1, 0], C::new(0.0, -a / 4.0));
        f.dealias()
    }

    #[test]
    fn taylor_green_construction_is_exact() {
        let g = grid(16, TAU);
        let f = taylor_green_2d(&g, 1.0);
        let n = g.n();
        let phys = f.physical();
        for iz in 0..2 {
            for iy in 0..n {
                for ix in 0..n {
                    let x = TAU * ix as f64 / n as f64;
                    let y = TAU * iy as f64 / n as f64;
                    let i = (iz * n + iy) * n + ix;
                    assert!((phys[0][i] - x.sin() * y.cos()).abs() < 1e-13);
                    assert!((phys[1][i] + x.cos() * y.sin()).abs() < 1e-13);
                    assert!(phys[2][i].abs() < 1e-14);
                }
            }
        }
        assert!(f.divergence_ratio() < 1e-14);
    }

    #[test]
    fn abc_forcing_is_divfree_lowmode() {
        let g = grid(16, TAU);
        let f = ForcingSpec::SteadyLowMode {
            amplitude: 0.3,
            k_f: 1,
        }
        .build(&g);
        assert!(f.divergence_ratio() < 1e-14);
        assert!(f.is_zero_mean(1e-15));
        let mut above = 0.0f64;
        g.for_each_mode(|idx, k, _| {
            if k[0] * k[0] + k[1] * k[1] + k[2] * k[2] > 4 {
                for comp in 0..3 {
                    above = above.max(f.spectral()[comp][idx].norm());
                }
            }
        });
        assert_eq!(above, 0.0);
    }

    #[test]
    fn shear_nonlinearity_vanishes() {
        let g = grid(16, TAU);
        let u = sine_shear(&g, 1.3);
        let nl = nonlinear_term(&u).unwrap();
        assert!(nl.l2_norm() < 1e-14);
    }

    #[test]
    fn taylor_green_nonlinearity_is_pure_gradient() {
        let g = grid(16, TAU);
        let u = taylor_green_2d(&g, 1.0);
        let nl = nonlinear_term(&u).unwrap();
        let scale = u.grad_sq_norm().sqrt() * u.lebesgue_norm(f64::INFINITY).unwrap();
        assert!(nl.l2_norm() / scale < 1e-10, "{}", nl.l2_norm());
    }

    #[test]
    fn nonlinearity_conserves_energy() {
        let g = grid(16, TAU);
        let u = random_divergence_free(&g, 42, 0.8, 2.0);
        let nl = nonlinear_term(&u).unwrap();
        let ip = nl.inner(&u).abs();
        let scale = u.l2_norm() * u.grad_sq_norm().sqrt() * u.lebesgue_norm(f64::INFINITY).unwrap();
        assert!(ip / scale < 1e-12, "skew-symmetry violated: {ip:.3e}");
    }

    #[test]
    fn single_mode_viscous_decay_is_exact() {
        let g = grid(8, TAU);
        let nu = 0.3;
        let a = 0.9;
        let dt = 0.05;
        let steps = 10;
        let stepper = Etdrk4::new(g, nu, dt);
        let forcing = ForcingSpec::None.build(&g);
        let mut state = SolverState::new(sine_shear(&g, a));
        for _ in 0..steps {
            let (s, _) = stepper.step(&state, &forcing).unwrap();
            state = s;
        }
        let t = dt * steps as f64;
        let want = a * (-nu * t).exp(); // kappa^2 = 1 at |k|=1, L=2 pi
        let got = 2.0 * state.u.mode(1, [1, 0, 0]).norm();
        assert!(
            ((got - want) / want).abs() < 1e-12,
            "{got} vs {want}"
        );
    }

    #[test]
    fn taylor_green_decays_in_closed_form() {
        let g = grid(16, TAU);
        let nu = 0.1;
        let dt = 1e-3;
        let steps = 100;
        let stepper = Etdrk4::new(g, nu, dt);
        let forcing = ForcingSpec::None.build(&g);
        let u0 = taylor_green_2d(&g, 1.0);
        let mut state = SolverState::new(u0.clone());
        for _ in 0..steps {
            let (s, _) = stepper.step(&state, &forcing).unwrap();
            state = s;
        }
        let t = dt * steps as f64;
        let exact = u0.scale((-2.0 * nu * t).exp());
        let err = state.u.sub(&exact).l2_norm() / exact.l2_norm();
        assert!(err < 1e-10, "relative error {err:.3e}");
    }

    #[test]
    fn cfl_flagging() {
        let g = grid(8, TAU);
        let stepper_bad = Etdrk4::new(g, 0.1, 10.0);
        let forcing = ForcingSpec::None.build(&g);
        let state = SolverState::new(sine_shear(&g, 1.0));
        let (_, info) = stepper_bad.step(&state, &forcing).unwrap();
        assert!(info.cfl_violated);
        assert!((info.u_max - 1.0).abs() < 1e-12);

        let stepper_ok = Etdrk4::new(g, 0.1, 0.01);
        let (_, info) = stepper_ok.step(&state, &forcing).unwrap();
        assert!(!info.cfl_violated);
    }

    #[test]
    fn energy_budget_cases() {
        let g = grid(16, TAU);
        // u orthogonal to f: disjoint mode supports
        let f = ForcingSpec::SteadyLowMode {
            amplitude: 0.5,
            k_f: 1,
        }
        .build(&g);
        let mut u = VectorField::zeros(g);
        u.set_mode(1, [3, 0, 0], C::new(0.0, -0.4));
        let u = u.dealias().leray_project();
        let eb = energy_budget(&u, &f);
        assert!(eb.injection.abs() < 1e-14);
        assert!((eb.energy - 0.5 * u.l2_norm().powi(2)).abs() < 1e-14);

        // unforced run: energy strictly nonincreasing, state invariants
        // (zero mean, divergence-free, dealiased) restored every step
        let stepper = Etdrk4::new(g, 0.05, 5e-3);
        let zero_f = ForcingSpec::None.build(&g);
        let mut state = SolverState::new(random_divergence_free(&g, 7, 0.5, 2.0));
        let mut prev = energy_budget(&state.u, &zero_f).energy;
        for _ in 0..20 {
            let (s, _) = stepper.step(&state, &zero_f).unwrap();
            state = s;
            let e = energy_budget(&state.u, &zero_f).energy;
            assert!(e <= prev * (1.0 + 1e-12), "energy grew: {e} > {prev}");
            prev = e;
            assert!(state.u.divergence_ratio() <= 1e-12);
            assert!(state.u.is_zero_mean(0.0), "mean must be exactly zero");
            assert!(state.u.is_dealiased());
        }
    }

    #[test]
    fn random_ic_properties_and_grid_consistency() {
        let g = grid(16, TAU);
        let u = random_divergence_free(&g, 11, 0.7, 2.0);
        assert!(u.divergence_ratio() < 1e-13);
        assert!(u.is_zero_mean(1e-15));
        let rms = u.l2_norm() / g.length().powf(1.5);
        assert!((rms - 0.7).abs() < 1e-12);

        // shared modes agree across resolutions up to one global factor
        let g2 = grid(24, TAU);
        let u2 = random_divergence_free(&g2, 11, 0.7, 2.0);
        let ka = [1i64, 2, 0];
        let ratio = u.mode(1, ka).norm() / u2.mode(1, ka).norm();
        for &k in &[[2i64, 0, 1], [0, 3, -1], [1, -1, 2], [3, 1, 0]] {
            for comp in 0..3 {
                let a = u.mode(comp, k);
                let b = u2.mode(comp, k);
                if a.norm() < 1e-12 {
                    continue;
                }
                assert!(
                    ((a / b).norm() - ratio).abs() / ratio < 1e-3,
                    "mode {k:?} comp {comp}: {} vs {}",
                    a / b,
                    ratio
                );
            }
        }
    }

    #[test]
    fn relax_to_steady_stokes_regime() {
        let g = grid(16, TAU);
        let nu = 0.5;
        // zero forcing -> zero steady state immediately
        let zero = ForcingSpec::None.build(&g);
        let out = relax_to_steady(&g, &zero, nu, 1e-7).unwrap();
        assert!(out.field.l2_norm() < 1e-14);

        // tiny single-mode force: steady state within 1% of Stokes
        let amp = 1e-4;
        let f = ForcingSpec::SteadyLowMode {
            amplitude: amp,
            k_f: 1,
        }
        .build(&g);
        let out = relax_to_steady(&g, &f, nu, 1e-7).unwrap();
        assert!(out.grashof_warning.is_none());
        let mut spec = f.spectral().clone();
        g.for_each_mode(|idx, k, _| {
            let ks = g.kappa_sq(k);
            let factor = if ks == 0.0 { 0.0 } else { 1.0 / (nu * ks) };
            for comp in spec.iter_mut() {
                comp[idx] *= factor;
            }
        });
        let stokes = VectorField::from_spectral(g, spec);
        let rel = out.field.sub(&stokes).l2_norm() / stokes.l2_norm();
        assert!(rel < 0.01, "distance from Stokes: {rel:.3e}");

        // at the steady state the energy balance closes: injection
        // matches dissipation well inside the 5% budget
        let eb = energy_budget(&out.field, &f);
        let dissipation = nu * eb.enstrophy;
        assert!(
            (eb.injection - dissipation).abs() <= 0.05 * dissipation,
            "injection {} vs dissipation {}",
            eb.injection,
            dissipation
        );
    }

    #[test]
    fn relaxed_state_is_self_consistent_under_stepping() {
        // step the returned field over T = 1/(nu lambda_0^2) and check the
        // drift stays within a factor 10 of the convergence tolerance
        let g = grid(16, 1.0); // lambda_0 = 1
        let nu = 0.5;
        let tol = 1e-6;
        let f = ForcingSpec::SteadyLowMode {
            amplitude: 0.01,
            k_f: 1,
        }
        .build(&g);
        let out = relax_to_steady(&g, &f, nu, tol).unwrap();
        let t_total = 1.0 / (nu * g.lambda0().powi(2));
        let dt = 0.01;
        let stepper = Etdrk4::new(g, nu, dt);
        let mut state = SolverState::new(out.field.clone());
        let steps = (t_total / dt).round() as u64;
        for _ in 0..steps {
            let (s, _) = stepper.step(&state, &f).unwrap();
            state = s;
        }
        let drift = state.u.sub(&out.field).l2_norm();
        let bound = 10.0 * tol * out.field.l2_norm();
        assert!(drift <= bound, "drift {drift:.3e} vs bound {bound:.3e}");
    }
}
