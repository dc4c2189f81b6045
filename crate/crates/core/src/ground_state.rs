//! The ground state `W`, its rescalings, the energy functional and the
//! variational predicates built on `‖∇W‖²`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::FieldState;
use crate::profile::RadialProfile;
use crate::quadrature;

const QUAD_TOL: f64 = 1e-14;

/// Dimension, scale and sign of a rescaled ground state `ι·λ^{-(N-2)/2}·W(x/λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateParams {
    pub dimension: u32,
    pub scale: f64,
    pub sign: i8,
}

impl GroundStateParams {
    pub fn new(dimension: u32, scale: f64, sign: i8) -> Result<Self> {
        let p = Self {
            dimension,
            scale,
            sign,
        };
        p.validate()?;
        Ok(p)
    }

    /// The unscaled positive ground state in dimension 3.
    pub fn unit() -> Self {
        Self {
            dimension: 3,
            scale: 1.0,
            sign: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        check_dimension(self.dimension)?;
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::InvalidParameter(format!("sign must be ±1, got {}", self.sign)));
        }
        Ok(())
    }
}

fn check_dimension(n: u32) -> Result<()> {
    if (3..=5).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dimension must be 3, 4 or 5, got {n}")))
    }
}

/// `N(N−2)`, the constant inside `W`.
fn shape_constant(n: u32) -> f64 {
    let n = n as f64;
    n * (n - 2.0)
}

/// Area of the unit sphere `S^{N−1}`.
pub fn sphere_area(n: u32) -> f64 {
    match n {
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        _ => unreachable!("dimension checked by caller"),
    }
}

/// `W_λ(r)` with sign, in dimension `N`.
pub fn eval_w(r: f64, params: &GroundStateParams) -> Result<f64> {
    params.validate()?;
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
    }
    let n = params.dimension as f64;
    let s = r / params.scale;
    let e = (n - 2.0) / 2.0;
    Ok(params.sign as f64
        * params.scale.powf(-e)
        * (1.0 + s * s / shape_constant(params.dimension)).powf(-e))
}

/// Radial derivative of `W_λ` (with sign).
pub fn eval_w_derivative(r: f64, params: &GroundStateParams) -> Result<f64> {
    params.validate()?;
    let n = params.dimension as f64;
    let a = shape_constant(params.dimension);
    let s = r / params.scale;
    Ok(-params.sign as f64 * params.scale.powf(-n / 2.0) * (n - 2.0) * s / a
        * (1.0 + s * s / a).powf(-n / 2.0))
}

/// `∫_lo^∞ r^p (1 + r²/α)^{-q} dr`: adaptive Gauss–Kronrod up to
/// `R_cut = max(lo, 10√α)` and the convergent large-`r` series beyond it.
///
/// Requires `p − 2q < −1` for convergence.
pub fn power_integral_from(p: f64, q: f64, alpha: f64, lo: f64) -> f64 {
    debug_assert!(p - 2.0 * q < -1.0);
    let r_cut = lo.max(10.0 * alpha.sqrt());
    let f = |r: f64| r.powf(p) * (1.0 + r * r / alpha).powf(-q);
    let inner = if r_cut > lo {
        quadrature::integrate(f, lo, r_cut, QUAD_TOL)
    } else {
        0.0
    };
    inner + power_tail(p, q, alpha, r_cut)
}

/// `∫_lo^hi r^p (1 + r²/α)^{-q} dr` on a bounded interval.
pub fn power_integral_between(p: f64, q: f64, alpha: f64, lo: f64, hi: f64) -> f64 {
    quadrature::integrate(
        |r: f64| r.powf(p) * (1.0 + r * r / alpha).powf(-q),
        lo,
        hi,
        QUAD_TOL,
    )
}

/// Term-by-term integral of `α^q r^{p−2q} Σₖ C(−q,k)(α/r²)^k` over `[R, ∞)`.
fn power_tail(p: f64, q: f64, alpha: f64, r: f64) -> f64 {
    let x = alpha / (r * r);
    let mut coeff = 1.0; // C(−q, k)
    let mut xk = 1.0;
    let mut sum = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let expo = 2.0 * q + 2.0 * kf - p - 1.0;
        let term = coeff * xk / expo;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() && k > 2 {
            break;
        }
        coeff *= -(q + kf) / (kf + 1.0);
        xk *= x;
    }
    alpha.powf(q) * r.powf(p - 2.0 * q + 1.0) * sum
}

/// `∫|∇W|²`, `E(W,0)`, `∫|W|^{2N/(N−2)}` and the positivity threshold `y*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WConstants {
    pub grad_norm_sq: f64,
    pub energy_w: f64,
    pub potential_w: f64,
    pub sobolev_threshold: f64,
}

fn compute_constants(n: u32) -> WConstants {
    let nf = n as f64;
    let a = shape_constant(n);
    let area = sphere_area(n);
    // |W'|² r^{N−1} = ((N−2)/a)² r^{N+1} (1 + r²/a)^{−N}
    let grad = area * ((nf - 2.0) / a).powi(2) * power_integral_from(nf + 1.0, nf, a, 0.0);
    // |W|^{2N/(N−2)} r^{N−1} = r^{N−1} (1 + r²/a)^{−N}
    let potential = area * power_integral_from(nf - 1.0, nf, a, 0.0);
    let energy = 0.5 * grad - (nf - 2.0) / (2.0 * nf) * potential;
    WConstants {
        grad_norm_sq: grad,
        energy_w: energy,
        potential_w: potential,
        sobolev_threshold: (nf / (nf - 2.0)).powf((nf - 2.0) / 2.0) * grad,
    }
}

/// Ground-state constants, computed by quadrature on first use and cached.
pub fn w_constants(n: u32) -> Result<WConstants> {
    check_dimension(n)?;
    static CACHE: [OnceLock<WConstants>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    Ok(*CACHE[(n - 3) as usize].get_or_init(|| compute_constants(n)))
}

/// `‖∇W‖²` in dimension 3.
pub fn grad_w_sq() -> f64 {
    w_constants(3).expect("dimension 3 is supported").grad_norm_sq
}

/// `∫_{|x|≤ρ} |∇W|²` in dimension 3.
pub fn grad_w_inside(rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    4.0 * PI / 9.0 * power_integral_between(4.0, 3.0, 3.0, 0.0, rho)
}

/// `∫_{|x|≥ρ} |∇W|²` in dimension 3.
pub fn grad_w_outside(rho: f64) -> f64 {
    4.0 * PI / 9.0 * power_integral_from(4.0, 3.0, 3.0, rho.max(0.0))
}

/// `∫_{ℝ³} W^p dx` for `p > 3`.
pub fn w_power_integral(p: f64) -> f64 {
    4.0 * PI * power_integral_from(2.0, p / 2.0, 3.0, 0.0)
}

/// `⟨∇W₁, ∇W_ρ⟩ / ‖∇W‖²` in dimension 3; depends only on the scale ratio.
pub fn gradient_pairing(ratio: f64) -> f64 {
    let w1 = crate::profile::ScaledW::new(1.0, 1.0);
    let w2 = crate::profile::ScaledW::new(ratio, 1.0);
    let g = |r: f64| w1.derivative(r) * w2.derivative(r) * r * r;
    // Split at the two characteristic scales so the quadrature sees both bumps.
    let (s1, s2) = if ratio < 1.0 { (ratio, 1.0) } else { (1.0, ratio) };
    let val = quadrature::integrate(g, 0.0, s1, 1e-15)
        + quadrature::integrate(g, s1, s2, 1e-15)
        + quadrature::integrate_to_infinity(g, s2, 1e-15);
    4.0 * PI * val / grad_w_sq()
}

/// Region over which [`energy`] integrates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Full,
    Ball(f64),
    Annulus(f64, f64),
    Exterior(f64),
}

/// Gradient, kinetic, potential and Hardy integrals of a field over a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub gradient_sq: f64,
    pub kinetic_sq: f64,
    pub potential: f64,
    pub hardy_sq: f64,
    /// `½·gradient + ½·kinetic − ⅙·potential` over the region.
    pub total_energy: f64,
    pub region: Region,
}

impl EnergyReport {
    fn assemble(gradient_sq: f64, kinetic_sq: f64, potential: f64, hardy_sq: f64, region: Region) -> Self {
        Self {
            gradient_sq,
            kinetic_sq,
            potential,
            hardy_sq,
            total_energy: 0.5 * gradient_sq + 0.5 * kinetic_sq - potential / 6.0,
            region,
        }
    }

    /// `E(v, 0)`: the energy without the kinetic term.
    pub fn static_energy(&self) -> f64 {
        0.5 * self.gradient_sq - self.potential / 6.0
    }
}

/// Per-node integrands (in `dr`, without the `4π`) used by the mesh energies.
pub(crate) struct Densities {
    pub gradient: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub potential: Vec<f64>,
    pub hardy: Vec<f64>,
}

pub(crate) fn densities(field: &FieldState) -> Densities {
    let r = field.nodes();
    let u = field.u();
    let rur = field.r_times_ur();
    Densities {
        gradient: rur.iter().map(|v| v * v).collect(),
        kinetic: field.hdot.iter().map(|v| v * v).collect(),
        potential: u.iter().zip(r).map(|(u, r)| u.powi(6) * r * r).collect(),
        hardy: u.iter().map(|u| u * u).collect(),
    }
}

/// Localized energy integrals of a sampled field (N = 3).
///
/// On [`Region::Full`] the field is continued beyond `R_max` by its harmonic
/// tail `u(R)·R/r` (the minimal-energy Ḣ¹ extension), whose gradient, Hardy
/// and potential contributions are added in closed form.
pub fn energy(field: &FieldState, region: Region) -> Result<EnergyReport> {
    let r_max = field.mesh.r_max();
    let slack = 1e-12 * r_max;
    let (a, b) = match region {
        Region::Full => (0.0, r_max),
        Region::Ball(r) => (0.0, r),
        Region::Annulus(r0, r1) => (r0, r1),
        Region::Exterior(r) => (r, r_max),
    };
    if !(a >= 0.0) || !(b <= r_max + slack) || a > b {
        return Err(Error::OutOfDomain(format!(
            "region {region:?} not inside [0, {r_max}]"
        )));
    }
    let b = b.min(r_max);
    let d = densities(field);
    let r = field.nodes();
    let int = |v: &[f64]| 4.0 * PI * quadrature::integrate_samples(r, v, a, b);
    let mut grad = int(&d.gradient);
    let kin = int(&d.kinetic);
    let mut pot = int(&d.potential);
    let mut hardy = int(&d.hardy);
    if matches!(region, Region::Full | Region::Exterior(_)) {
        let u_edge = field.h[r.len() - 1] / r_max;
        grad += 4.0 * PI * r_max * u_edge * u_edge;
        hardy += 4.0 * PI * r_max * u_edge * u_edge;
        pot += 4.0 * PI * u_edge.powi(6) * r_max.powi(3) / 3.0;
    }
    Ok(EnergyReport::assemble(grad, kin, pot, hardy, region))
}

/// Energy integrals of closed-form profiles over `ℝ³` by adaptive quadrature.
pub fn energy_of_profiles(u0: &dyn RadialProfile, u1: &dyn RadialProfile) -> EnergyReport {
    let tol = 1e-13;
    let int = |f: &dyn Fn(f64) -> f64| {
        4.0 * PI
            * (quadrature::integrate(f, 0.0, 1.0, tol)
                + quadrature::integrate(f, 1.0, 10.0, tol)
                + quadrature::integrate_to_infinity(f, 10.0, tol))
    };
    let grad = int(&|r: f64| (u0.derivative(r) * r).powi(2));
    let kin = int(&|r: f64| (u1.value(r) * r).powi(2));
    let pot = int(&|r: f64| u0.value(r).powi(6) * r * r);
    let hardy = int(&|r: f64| u0.value(r).powi(2));
    EnergyReport::assemble(grad, kin, pot, hardy, Region::Full)
}

/// Outcome of the variational predicates for `v = u₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalReport {
    /// `‖∇v‖² ≤ ‖∇W‖²` and `E(v,0) ≤ E(W,0)`.
    pub hypothesis_holds: bool,
    /// Whether `‖∇v‖² ≤ N·E(v,0)` (only meaningful under the hypothesis).
    pub bound_holds: bool,
    /// Whether `‖∇v‖² ≤ y*` (the positivity premise).
    pub positivity_premise: bool,
    /// Whether `E(v,0) ≥ 0`.
    pub positivity_holds: bool,
}

impl VariationalReport {
    /// True when some implication has a true premise and a false conclusion.
    pub fn violated(&self) -> bool {
        (self.hypothesis_holds && !self.bound_holds)
            || (self.positivity_premise && !self.positivity_holds)
    }
}

/// Evaluate the predicates on an energy report (N = 3). `slack` is a
/// relative tolerance (in units of `‖∇W‖²`) granted to every comparison in
/// the direction that favors the conclusions.
pub fn variational_check_report(report: &EnergyReport, slack: f64) -> Result<VariationalReport> {
    let grad = report.gradient_sq;
    let pot = report.potential;
    if !grad.is_finite() || !pot.is_finite() || grad < 0.0 || pot < 0.0 {
        return Err(Error::InvalidData("field energies must be finite and nonnegative".into()));
    }
    let c = w_constants(3)?;
    let eps = slack * c.grad_norm_sq;
    let e = report.static_energy();
    let hypothesis = grad <= c.grad_norm_sq - eps && e <= c.energy_w - eps;
    Ok(VariationalReport {
        hypothesis_holds: hypothesis,
        bound_holds: grad <= 3.0 * e + eps,
        positivity_premise: grad <= c.sobolev_threshold - eps,
        positivity_holds: e >= -eps,
    })
}

/// Variational predicates for a sampled field, with a `1e−6` relative slack
/// absorbing mesh quadrature error.
pub fn variational_check(field: &FieldState) -> Result<VariationalReport> {
    let report = energy(field, Region::Full)?;
    variational_check_report(&report, 1e-6)
}

/// Discrete `L²(ℝ³)` norm of `Δu + u⁵` over interior nodes, with the
/// Laplacian taken through `Δu = ∂²_r h / r`.
pub fn elliptic_residual(field: &FieldState) -> Result<f64> {
    let r = field.nodes();
    let n = r.len();
    if n < 5 {
        return Err(Error::InvalidData("need at least 3 interior nodes".into()));
    }
    let h = &field.h;
    let mut sum = 0.0;
    for i in 1..n - 1 {
        let h0 = r[i] - r[i - 1];
        let h1 = r[i + 1] - r[i];
        let d2 = 2.0 / (h0 + h1) * ((h[i + 1] - h[i]) / h1 - (h[i] - h[i - 1]) / h0);
        let u = h[i] / r[i];
        // (Δu + u⁵)·r
        let res = d2 + r[i] * u.powi(5);
        sum += res * res * 0.5 * (h0 + h1);
    }
    Ok((4.0 * PI * sum).sqrt())
}
