//! Diagnostics on solver output: regular/singular split, concentration radii,
//! sign projection, virial quantities, `d`, `g_R`, cone energies and the
//! scaling-exponent fit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::{self, densities, Region};
use crate::mesh::FieldState;
use crate::profile::{RadialProfile, ScaledW};
use crate::quadrature;
use crate::solver::{self, cutoff, cutoff_derivative, Stepper};

/// Bisection steps for radii; the bracket shrinks far below any mesh spacing.
const BISECTION_STEPS: usize = 80;

/// Regular part `v` restarted from exterior data at `t₀`, and `a = u − v`.
#[derive(Debug, Clone)]
pub struct SingularSplit {
    pub t_est: f64,
    pub t0: f64,
    pub margin: f64,
    /// `v = u` at `t₀` for `r ≥ inner_radius = (T_est − t₀) + margin`.
    pub inner_radius: f64,
    /// Frames with `t ≤ t₀`, oldest first.
    pub u_frames: Vec<FieldState>,
    pub v_frames: Vec<FieldState>,
    pub a_frames: Vec<FieldState>,
}

impl SingularSplit {
    /// The split at `t₀`.
    pub fn latest(&self) -> (&FieldState, &FieldState) {
        let k = self.a_frames.len() - 1;
        (&self.a_frames[k], &self.v_frames[k])
    }

    /// Per frame `(t, ∫_{r ≥ (T_est − t) + margin} |∇a|² + (∂ₜa)², ‖(a, ∂ₜa)‖²)`:
    /// the energy of `a` outside its cone next to its total energy.
    pub fn exterior_energy(&self) -> Result<Vec<(f64, f64, f64)>> {
        self.a_frames
            .iter()
            .map(|a| {
                let r_max = a.mesh.r_max();
                let cone = ((self.t_est - a.t) + self.margin).min(r_max);
                let out = ground_state::energy(a, Region::Annulus(cone, r_max))?;
                let all = ground_state::energy(a, Region::Full)?;
                Ok((a.t, out.gradient_sq + out.kinetic_sq, all.gradient_sq + all.kinetic_sq))
            })
            .collect()
    }
}

/// Default margin `2h + 2dt` for a mesh of maximal spacing `h` at CFL `cfl`.
pub fn default_margin(h: f64, cfl: f64) -> f64 {
    2.0 * h + 2.0 * cfl * h
}

/// Restart `v` at the latest frame `t₀ < T_est` from `ψ·u(t₀)`, with `ψ = 0`
/// for `r ≤ R/2` and `ψ = 1` for `r ≥ R = (T_est − t₀) + margin`, then evolve
/// `v` backward to every earlier frame.
pub fn singular_part(frames: &[FieldState], t_est: f64, margin: f64, nonlinear: bool) -> Result<SingularSplit> {
    if frames.is_empty() || !(frames[0].t < t_est) {
        return Err(Error::InvalidInput(format!(
            "T_est = {t_est} is not after the first snapshot"
        )));
    }
    let last = frames[frames.len() - 1].t;
    if t_est > last + (last - frames[0].t).max(1.0) {
        return Err(Error::InvalidInput(format!(
            "T_est = {t_est} is not bracketed by the snapshots (last at {last})"
        )));
    }
    if !(margin >= 0.0) {
        return Err(Error::InvalidParameter("margin must be nonnegative".into()));
    }
    let k0 = frames.iter().rposition(|f| f.t < t_est).unwrap();
    let u0 = &frames[k0];
    let inner = (t_est - u0.t) + margin;
    let r = u0.nodes();
    let mut v0 = u0.clone();
    for (i, &ri) in r.iter().enumerate() {
        let psi = 1.0 - cutoff(2.0 * ri / inner);
        v0.h[i] *= psi;
        v0.hdot[i] *= psi;
    }
    let mesh = u0.mesh.clone();
    let stepper = Stepper::new(mesh.clone(), nonlinear);
    let dt = solver::CFL_MAX * mesh.min_spacing();
    // Backward evolution through time reversal.
    let mut reversed = v0.clone();
    reversed.t = -v0.t;
    reversed.hdot.iter_mut().for_each(|p| *p = -*p);
    let targets: Vec<f64> = frames[..k0].iter().rev().map(|f| -f.t).collect();
    let back = solver::evolve_to(&stepper, &reversed, dt, &targets);
    let mut v_frames: Vec<FieldState> = back
        .into_iter()
        .rev()
        .map(|mut s| {
            s.t = -s.t;
            s.hdot.iter_mut().for_each(|p| *p = -*p);
            s
        })
        .collect();
    v_frames.push(v0);
    let u_frames = frames[..=k0].to_vec();
    let a_frames = u_frames
        .iter()
        .zip(&v_frames)
        .map(|(u, v)| u.difference(v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SingularSplit {
        t_est,
        t0: u0.t,
        margin,
        inner_radius: inner,
        u_frames,
        v_frames,
        a_frames,
    })
}

/// Smallest `ρ` with `∫₀^ρ density ≥ threshold` (`None` if never reached).
fn inner_radius(nodes: &[f64], density: &[f64], threshold: f64) -> Option<f64> {
    let r_max = nodes[nodes.len() - 1];
    let cum = |x: f64| quadrature::integrate_samples(nodes, density, 0.0, x);
    if cum(r_max) < threshold {
        return None;
    }
    if threshold <= 0.0 {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0, r_max);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if cum(mid) >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `(∂ₜa)² + |∇a|²` density in `dr` (with `4π`).
fn energy_density(field: &FieldState) -> Vec<f64> {
    let d = densities(field);
    d.gradient
        .iter()
        .zip(&d.kinetic)
        .map(|(g, k)| 4.0 * PI * (g + k))
        .collect()
}

/// `μ`: smallest radius whose ball holds `(2/5)‖∇W‖²` of the energy of `a`.
pub fn radius_mu(a: &FieldState) -> Option<f64> {
    inner_radius(a.nodes(), &energy_density(a), 0.4 * ground_state::grad_w_sq())
}

/// `ν`: smallest radius outside which `u` holds at most `½‖∇W‖²`.
pub fn radius_nu(u: &FieldState) -> Option<f64> {
    let dens = energy_density(u);
    let full = ground_state::energy(u, Region::Full).ok()?;
    let total = full.gradient_sq + full.kinetic_sq;
    let half = 0.5 * ground_state::grad_w_sq();
    if total <= half {
        return Some(0.0);
    }
    // ∫_{≥ρ} ≤ half  ⇔  ∫_{≤ρ} ≥ total − half
    inner_radius(u.nodes(), &dens, total - half)
}

/// `λ₁`: smallest radius whose ball holds `∫_{|x|≤1}|∇W|²` of `|∇a|²`.
pub fn radius_lambda1(a: &FieldState) -> Option<f64> {
    let d = densities(a);
    let dens: Vec<f64> = d.gradient.iter().map(|g| 4.0 * PI * g).collect();
    inner_radius(a.nodes(), &dens, ground_state::grad_w_inside(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub lambda1: Option<f64>,
}

pub fn concentration_radii(u: &FieldState, a: &FieldState) -> Radii {
    Radii {
        mu: radius_mu(a),
        nu: radius_nu(u),
        lambda1: radius_lambda1(a),
    }
}

/// `∫∇a·∇W_λ dx`, with `a` continued harmonically past `R_max`.
pub fn gradient_pairing_with_w(a: &FieldState, lambda: f64) -> f64 {
    let w = ScaledW::new(lambda, 1.0);
    let r = a.nodes();
    let rur = a.r_times_ur();
    let dens: Vec<f64> = rur
        .iter()
        .zip(r)
        .map(|(g, &ri)| g * ri * w.derivative(ri))
        .collect();
    let r_max = a.mesh.r_max();
    let edge = a.h[r.len() - 1] / r_max;
    4.0 * PI * (quadrature::integrate_samples(r, &dens, 0.0, r_max) + edge * r_max * w.value(r_max))
}

/// `f = ∫∇a·∇W_{λ₁}`.
pub fn sign_projection(a: &FieldState, lambda1: f64) -> f64 {
    gradient_pairing_with_w(a, lambda1)
}

/// `d = 8∫(∂ₜu)² + 4(∫|∇u|² − ‖∇W‖²)`.
pub fn d_functional(u: &FieldState) -> Result<f64> {
    let e = ground_state::energy(u, Region::Full)?;
    Ok(8.0 * e.kinetic_sq + 4.0 * (e.gradient_sq - ground_state::grad_w_sq()))
}

/// Conserved energy of a field: with or without the potential term.
pub fn field_energy(u: &FieldState, nonlinear: bool) -> Result<f64> {
    let e = ground_state::energy(u, Region::Full)?;
    Ok(if nonlinear {
        e.total_energy
    } else {
        0.5 * (e.gradient_sq + e.kinetic_sq)
    })
}

/// `(z₁, z₂)` integrands of one field: `∫u∂ₜu` and `∫x·∇u ∂ₜu`.
fn virial_pair(u: &FieldState) -> (f64, f64) {
    let r = u.nodes();
    let rmax = u.mesh.r_max();
    let rur = u.r_times_ur();
    let z1: Vec<f64> = u.h.iter().zip(&u.hdot).map(|(h, p)| h * p).collect();
    let z2: Vec<f64> = rur
        .iter()
        .zip(&u.hdot)
        .zip(r)
        .map(|((g, p), ri)| g * p * ri)
        .collect();
    (
        4.0 * PI * quadrature::integrate_samples(r, &z1, 0.0, rmax),
        4.0 * PI * quadrature::integrate_samples(r, &z2, 0.0, rmax),
    )
}

/// Analytic `(z₁′, z₂′)` contributions of one field.
fn virial_rhs(u: &FieldState, nonlinear: bool) -> Result<(f64, f64)> {
    let e = ground_state::energy(u, Region::Full)?;
    let pot = if nonlinear { e.potential } else { 0.0 };
    Ok((
        e.kinetic_sq - e.gradient_sq + pot,
        -1.5 * e.kinetic_sq + 0.5 * (e.gradient_sq - pot),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialSeries {
    pub t: Vec<f64>,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
    pub z: Vec<f64>,
    pub dz1_fd: Vec<f64>,
    pub dz2_fd: Vec<f64>,
    pub dz_fd: Vec<f64>,
    pub dz1_rhs: Vec<f64>,
    pub dz2_rhs: Vec<f64>,
    pub dz_rhs: Vec<f64>,
}

impl VirialSeries {
    /// `max_t |FD derivative − analytic|` for `(z₁, z₂, Z)`, skipping the two
    /// end points where the time stencil is one-sided.
    pub fn defects(&self) -> (f64, f64, f64) {
        let n = self.t.len();
        let m = |a: &[f64], b: &[f64]| {
            (1..n - 1)
                .map(|i| (a[i] - b[i]).abs())
                .fold(0.0, f64::max)
        };
        (
            m(&self.dz1_fd, &self.dz1_rhs),
            m(&self.dz2_fd, &self.dz2_rhs),
            m(&self.dz_fd, &self.dz_rhs),
        )
    }
}

/// `z₁ = ∫(u∂ₜu − v∂ₜv)`, `z₂ = ∫(x·∇u ∂ₜu − x·∇v ∂ₜv)`, `Z = z₁/2 + z₂`,
/// their three-point time derivatives and analytic right-hand sides.
pub fn virial_series(u_frames: &[FieldState], v_frames: Option<&[FieldState]>, nonlinear: bool) -> Result<VirialSeries> {
    if u_frames.len() < 3 {
        return Err(Error::InvalidInput("virial series needs ≥ 3 snapshots".into()));
    }
    if let Some(v) = v_frames {
        if v.len() != u_frames.len() {
            return Err(Error::InvalidInput("u and v frame counts differ".into()));
        }
    }
    let n = u_frames.len();
    let mut s = VirialSeries {
        t: Vec::with_capacity(n),
        z1: Vec::with_capacity(n),
        z2: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        dz1_fd: Vec::new(),
        dz2_fd: Vec::new(),
        dz_fd: Vec::new(),
        dz1_rhs: Vec::with_capacity(n),
        dz2_rhs: Vec::with_capacity(n),
        dz_rhs: Vec::with_capacity(n),
    };
    for (k, u) in u_frames.iter().enumerate() {
        let (mut a1, mut a2) = virial_pair(u);
        let (mut b1, mut b2) = virial_rhs(u, nonlinear)?;
        if let Some(v) = v_frames {
            let (c1, c2) = virial_pair(&v[k]);
            let (d1, d2) = virial_rhs(&v[k], nonlinear)?;
            a1 -= c1;
            a2 -= c2;
            b1 -= d1;
            b2 -= d2;
        }
        s.t.push(u.t);
        s.z1.push(a1);
        s.z2.push(a2);
        s.z.push(0.5 * a1 + a2);
        s.dz1_rhs.push(b1);
        s.dz2_rhs.push(b2);
        s.dz_rhs.push(0.5 * b1 + b2);
    }
    s.dz1_fd = quadrature::differentiate_series(&s.t, &s.z1);
    s.dz2_fd = quadrature::differentiate_series(&s.t, &s.z2);
    s.dz_fd = quadrature::differentiate_series(&s.t, &s.z);
    Ok(s)
}

/// `∫_{|x|≥R} u²/|x|² + |∇u|² + (∂ₜu)² + u⁶`.
pub fn tail_energy(u: &FieldState, radius: f64) -> Result<f64> {
    if radius >= u.mesh.r_max() {
        return Ok(0.0);
    }
    let e = ground_state::energy(u, Region::Exterior(radius))?;
    Ok(e.hardy_sq + e.gradient_sq + e.kinetic_sq + e.potential)
}

/// `g_R = 2∫u∂ₜu φ(|x|/R)`.
pub fn g_r(u: &FieldState, radius: f64) -> f64 {
    let r = u.nodes();
    let dens: Vec<f64> = u
        .h
        .iter()
        .zip(&u.hdot)
        .zip(r)
        .map(|((h, p), ri)| h * p * cutoff(ri / radius))
        .collect();
    8.0 * PI * quadrature::integrate_samples(r, &dens, 0.0, (2.0 * radius).min(u.mesh.r_max()))
}

/// `g_R′ = 2∫(∂ₜu)²φ_R − 2∫|∇u|²φ_R − 2∫u ∇u·∇φ_R + 2∫u⁶φ_R` (last term only
/// in nonlinear mode).
pub fn g_r_derivative(u: &FieldState, radius: f64, nonlinear: bool) -> f64 {
    let r = u.nodes();
    let d = densities(u);
    let rur = u.r_times_ur();
    let uu = u.u();
    let dens: Vec<f64> = (0..r.len())
        .map(|i| {
            let s = r[i] / radius;
            let phi = cutoff(s);
            let mut v = (d.kinetic[i] - d.gradient[i]) * phi;
            v -= uu[i] * rur[i] * r[i] * cutoff_derivative(s) / radius;
            if nonlinear {
                v += d.potential[i] * phi;
            }
            v
        })
        .collect();
    8.0 * PI * quadrature::integrate_samples(r, &dens, 0.0, (2.0 * radius).min(u.mesh.r_max()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrSeries {
    pub radius: f64,
    pub t: Vec<f64>,
    pub g: Vec<f64>,
    pub g_fd: Vec<f64>,
    pub g_rhs: Vec<f64>,
    pub d: Vec<f64>,
    /// `A_R = g_R′ − d`.
    pub a_r: Vec<f64>,
    pub tail: Vec<f64>,
    /// `12(E(W, 0) − E(u))`: the part of `A_R` not controlled by the tail.
    pub energy_offset: Vec<f64>,
}

impl GrSeries {
    /// `max |g_FD − g_R′|` over interior frames.
    pub fn derivative_defect(&self) -> f64 {
        let n = self.t.len();
        (1..n.saturating_sub(1))
            .map(|i| (self.g_fd[i] - self.g_rhs[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Does `|A_R − 12(E(W) − E(u))| ≤ 5·tail` hold at every frame?
    pub fn tail_bound_holds(&self) -> bool {
        self.a_r
            .iter()
            .zip(&self.energy_offset)
            .zip(&self.tail)
            .all(|((a, o), t)| (a - o).abs() <= 5.0 * t + 1e-9 * (1.0 + o.abs()))
    }
}

pub fn g_r_series(frames: &[FieldState], radius: f64, nonlinear: bool) -> Result<GrSeries> {
    if frames.len() < 3 {
        return Err(Error::InvalidInput("g_R series needs ≥ 3 snapshots".into()));
    }
    if !(radius > 0.0) || 2.0 * radius > frames[0].mesh.r_max() {
        return Err(Error::OutOfDomain(format!(
            "R = {radius} needs 0 < 2R ≤ R_max"
        )));
    }
    let e_w = ground_state::grad_w_sq() / 3.0;
    let mut s = GrSeries {
        radius,
        t: Vec::new(),
        g: Vec::new(),
        g_fd: Vec::new(),
        g_rhs: Vec::new(),
        d: Vec::new(),
        a_r: Vec::new(),
        tail: Vec::new(),
        energy_offset: Vec::new(),
    };
    for u in frames {
        let rhs = g_r_derivative(u, radius, nonlinear);
        let d = d_functional(u)?;
        s.t.push(u.t);
        s.g.push(g_r(u, radius));
        s.g_rhs.push(rhs);
        s.d.push(d);
        s.a_r.push(rhs - d);
        s.tail.push(tail_energy(u, radius)?);
        s.energy_offset.push(12.0 * (e_w - field_energy(u, nonlinear)?));
    }
    s.g_fd = quadrature::differentiate_series(&s.t, &s.g);
    Ok(s)
}

/// `ρ(R)`: running supremum of [`tail_energy`] over the frames.
pub fn rho_tail(frames: &[FieldState], radius: f64) -> Result<Vec<f64>> {
    let mut sup = 0.0f64;
    frames
        .iter()
        .map(|u| {
            sup = sup.max(tail_energy(u, radius)?);
            Ok(sup)
        })
        .collect()
}

/// `∫_{r ≤ k(T_est − t)} |∇u|² + (∂ₜu)²` per frame (0 once `t ≥ T_est`).
pub fn cone_energy(frames: &[FieldState], t_est: f64, k: f64) -> Result<Vec<(f64, f64)>> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("cone factor must be positive, got {k}")));
    }
    frames
        .iter()
        .map(|u| {
            let rad = (k * (t_est - u.t)).min(u.mesh.r_max());
            if rad <= 0.0 {
                return Ok((u.t, 0.0));
            }
            let e = ground_state::energy(u, Region::Ball(rad))?;
            Ok((u.t, e.gradient_sq + e.kinetic_sq))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    /// Fitted `1 + ν̂`: slope of `log λ₁` against `log(T_est − t)`.
    pub slope: f64,
    pub nu_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Slope ≤ 0: no concentration toward `T_est`.
    pub non_concentrating: bool,
}

/// Least-squares fit of `log λ₁ = (1 + ν)·log(T_est − t) + c`.
pub fn fit_exponent(times: &[f64], lambdas: &[Option<f64>], t_est: f64) -> Result<FitRecord> {
    if times.len() != lambdas.len() {
        return Err(Error::InvalidInput("times and λ₁ lengths differ".into()));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(lambdas)
        .filter_map(|(&t, l)| match l {
            Some(l) if *l > 0.0 && t < t_est && l.is_finite() => Some(((t_est - t).ln(), l.ln())),
            _ => None,
        })
        .collect();
    let n = pts.len();
    if n < 10 {
        return Err(Error::FitUnavailable(format!("{n} usable points, need ≥ 10")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::FitUnavailable("all points at one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(FitRecord {
        slope,
        nu_hat: slope - 1.0,
        intercept,
        r_squared,
        points: n,
        non_concentrating: slope <= 1e-9,
    })
}

/// Options for [`diagnostics_series`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsOptions {
    pub nonlinear: bool,
    pub g_radii: Vec<f64>,
    pub ball_radii: Vec<f64>,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            nonlinear: true,
            g_radii: Vec::new(),
            ball_radii: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub energy: f64,
    pub sup_u: f64,
    pub radii: Radii,
    pub f: Option<f64>,
    pub z1: f64,
    pub z2: f64,
    pub z: f64,
    pub d: f64,
    pub g: Vec<f64>,
    pub ball_energy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub options: DiagnosticsOptions,
    pub rows: Vec<DiagnosticRow>,
}

/// Per-frame diagnostics with `a = u − v` (`a = u` when `v` is absent).
pub fn diagnostics_series(
    u_frames: &[FieldState],
    v_frames: Option<&[FieldState]>,
    options: &DiagnosticsOptions,
) -> Result<DiagnosticsSeries> {
    if let Some(v) = v_frames {
        if v.len() != u_frames.len() {
            return Err(Error::InvalidInput("u and v frame counts differ".into()));
        }
    }
    if u_frames.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidInput("frame times must increase strictly".into()));
    }
    let mut rows = Vec::with_capacity(u_frames.len());
    for (k, u) in u_frames.iter().enumerate() {
        let a = match v_frames {
            Some(v) => u.difference(&v[k])?,
            None => u.clone(),
        };
        let radii = concentration_radii(u, &a);
        let f = radii.lambda1.map(|l| sign_projection(&a, l));
        let (mut z1, mut z2) = virial_pair(u);
        if let Some(v) = v_frames {
            let (c1, c2) = virial_pair(&v[k]);
            z1 -= c1;
            z2 -= c2;
        }
        let g = options
            .g_radii
            .iter()
            .map(|&rad| g_r(u, rad))
            .collect();
        let ball_energy = options
            .ball_radii
            .iter()
            .map(|&rad| {
                let e = ground_state::energy(u, Region::Ball(rad.min(u.mesh.r_max())))?;
                Ok(e.gradient_sq + e.kinetic_sq)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(DiagnosticRow {
            t: u.t,
            energy: field_energy(u, options.nonlinear)?,
            sup_u: u.sup_abs_u(),
            radii,
            f,
            z1,
            z2,
            z: 0.5 * z1 + z2,
            d: d_functional(u)?,
            g,
            ball_energy,
        });
    }
    Ok(DiagnosticsSeries {
        options: options.clone(),
        rows,
    })
}
