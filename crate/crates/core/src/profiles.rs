//! Greedy extraction of rescaled signed ground states `ι·W_λ` from a snapshot,
//! with Pythagorean and orthogonality checks.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::{self, Region};
use crate::mesh::{FieldState, RadialMesh};
use crate::profile::{RadialProfile, ScaledW};
use crate::quadrature;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub max_profiles: usize,
    pub correlation_floor: f64,
    pub separation_factor: f64,
    /// Search interval for `λ`; defaults to `[4·min_spacing, R_max/4]`.
    #[serde(default)]
    pub lambda_range: Option<(f64, f64)>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            max_profiles: 6,
            correlation_floor: 0.3,
            separation_factor: 10.0,
            lambda_range: None,
        }
    }
}

/// Accepted coefficients lie in `[SNAP_MIN, SNAP_MAX]` in absolute value.
pub const SNAP_MIN: f64 = 0.7;
pub const SNAP_MAX: f64 = 1.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractedProfile {
    pub iota: i8,
    pub lambda: f64,
    pub raw_coefficient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractionStatus {
    Complete,
    /// `max_profiles` reached while some correlation was still above the floor.
    OverBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PythagoreanDefects {
    pub grad_defect: f64,
    pub kinetic_defect: f64,
    pub energy_defect: f64,
}

#[derive(Debug, Clone)]
pub struct ProfileDecomposition {
    /// Sorted by decreasing `λ`.
    pub profiles: Vec<ExtractedProfile>,
    /// Candidates whose coefficient fell outside the snapping window.
    pub rejected: Vec<ExtractedProfile>,
    pub residual: FieldState,
    pub residual_grad_sq: f64,
    pub residual_kin_sq: f64,
    pub pythagorean_defect: f64,
    /// Best correlation found at each greedy step (including the final one).
    pub correlation_history: Vec<f64>,
    pub status: ExtractionStatus,
}

/// Decomposition JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub profiles: Vec<ExtractedProfile>,
    pub residual_grad_sq: f64,
    pub residual_kin_sq: f64,
    pub defects: PythagoreanDefects,
    pub status: ExtractionStatus,
}

/// `∫∇a·∇W_λ / ‖∇W‖²` for a precomputed `r·∂_r a` (harmonic tail included).
struct Correlator<'a> {
    nodes: &'a [f64],
    rur: Vec<f64>,
    edge: f64,
    norm: f64,
}

impl<'a> Correlator<'a> {
    fn new(a: &'a FieldState) -> Self {
        let r = a.nodes();
        let r_max = a.mesh.r_max();
        Self {
            nodes: r,
            rur: a.r_times_ur(),
            edge: a.h[r.len() - 1] / r_max,
            norm: ground_state::grad_w_sq(),
        }
    }

    fn at(&self, lambda: f64) -> f64 {
        let w = ScaledW::new(lambda, 1.0);
        let r = self.nodes;
        let r_max = r[r.len() - 1];
        let dens: Vec<f64> = self
            .rur
            .iter()
            .zip(r)
            .map(|(g, &ri)| g * ri * w.derivative(ri))
            .collect();
        4.0 * PI
            * (quadrature::integrate_samples(r, &dens, 0.0, r_max) + self.edge * r_max * w.value(r_max))
            / self.norm
    }
}

/// Least-squares coefficient `⟨∇a, ∇W_λ⟩/‖∇W‖²` of `W_λ` in `a`.
pub fn correlate_scale(a: &FieldState, lambda: f64) -> f64 {
    Correlator::new(a).at(lambda)
}

fn search_range(mesh: &RadialMesh, config: &ExtractConfig) -> Result<(f64, f64)> {
    let (lo, hi) = config
        .lambda_range
        .unwrap_or((4.0 * mesh.min_spacing(), 0.25 * mesh.r_max()));
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::InvalidParameter(format!("empty scale range [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

/// Best `(log λ, c)` of `|c|` over `[x_lo, x_hi]` minus the excluded windows.
fn best_scale(corr: &Correlator, x_lo: f64, x_hi: f64, excluded: &[(f64, f64)]) -> Option<(f64, f64)> {
    let allowed = |x: f64| excluded.iter().all(|&(a, b)| x <= a || x >= b);
    let decades = (x_hi - x_lo) / std::f64::consts::LN_10;
    let count = ((3.0 * decades).ceil() as usize).max(8);
    let seeds: Vec<f64> = (0..=count)
        .map(|k| x_lo + (x_hi - x_lo) * k as f64 / count as f64)
        .collect();
    let values: Vec<Option<f64>> = seeds
        .par_iter()
        .map(|&x| allowed(x).then(|| corr.at(x.exp())))
        .collect();
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |x: f64, c: f64| {
        if allowed(x) && best.map_or(true, |(_, b)| c.abs() > b.abs()) {
            best = Some((x, c));
        }
    };
    let local: Vec<usize> = (0..seeds.len())
        .filter(|&k| {
            let Some(v) = values[k] else { return false };
            let left = if k > 0 { values[k - 1].map_or(0.0, f64::abs) } else { 0.0 };
            let right = values.get(k + 1).copied().flatten().map_or(0.0, f64::abs);
            v.abs() >= left && v.abs() >= right
        })
        .collect();
    let refined: Vec<(f64, f64)> = local
        .par_iter()
        .map(|&k| {
            let a = seeds[k.saturating_sub(1)];
            let b = seeds[(k + 1).min(seeds.len() - 1)];
            golden_max(|x| corr.at(x.exp()).abs(), a, b, seeds[k])
        })
        .map(|x| (x, corr.at(x.exp())))
        .collect();
    for (k, v) in values.iter().enumerate() {
        if let Some(v) = v {
            consider(seeds[k], *v);
        }
    }
    for (x, c) in refined {
        consider(x, c);
    }
    best
}

/// Golden-section maximization of a unimodal `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, start: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > 1e-9 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    if f(x) >= f(start) {
        x
    } else {
        start
    }
}

fn subtract_w(field: &mut FieldState, coeff: f64, lambda: f64) {
    let w = ScaledW::new(lambda, coeff);
    let r = field.mesh.nodes().to_vec();
    for (h, ri) in field.h.iter_mut().zip(&r) {
        *h -= ri * w.value(*ri);
    }
}

/// Mesh `‖∇W_λ‖²` (with the harmonic tail), so that defects compare like with like.
fn mesh_w_norm(mesh: &Arc<RadialMesh>, lambda: f64) -> Result<ground_state::EnergyReport> {
    let w = ScaledW::new(lambda, 1.0);
    let f = FieldState::from_profiles(mesh.clone(), 0.0, |r| w.value(r), |_| 0.0);
    ground_state::energy(&f, Region::Full)
}

/// Greedy matching pursuit over the signed dictionary `{±W_λ}`.
pub fn extract(a: &FieldState, config: &ExtractConfig) -> Result<ProfileDecomposition> {
    if !(config.separation_factor > 1.0) || !(config.correlation_floor > 0.0) {
        return Err(Error::InvalidParameter(
            "separation_factor must exceed 1 and correlation_floor be positive".into(),
        ));
    }
    let (lo, hi) = search_range(&a.mesh, config)?;
    let (x_lo, x_hi) = (lo.ln(), hi.ln());
    let sep = config.separation_factor.ln();
    let mut residual = a.clone();
    let mut excluded: Vec<(f64, f64)> = Vec::new();
    let mut profiles = Vec::new();
    let mut rejected = Vec::new();
    let mut history = Vec::new();
    let mut status = ExtractionStatus::Complete;
    loop {
        let corr = Correlator::new(&residual);
        let Some((x, c)) = best_scale(&corr, x_lo, x_hi, &excluded) else {
            break;
        };
        history.push(c);
        if c.abs() < config.correlation_floor {
            break;
        }
        if profiles.len() >= config.max_profiles {
            status = ExtractionStatus::OverBudget;
            break;
        }
        let found = ExtractedProfile {
            iota: if c > 0.0 { 1 } else { -1 },
            lambda: x.exp(),
            raw_coefficient: c,
        };
        excluded.push((x - sep, x + sep));
        if !(SNAP_MIN..=SNAP_MAX).contains(&c.abs()) {
            rejected.push(found);
            continue;
        }
        subtract_w(&mut residual, found.iota as f64, found.lambda);
        profiles.push(found);
    }
    backfit(&mut residual, &mut profiles, 0.5 * sep);
    profiles.sort_by(|p, q| q.lambda.total_cmp(&p.lambda));
    let res = ground_state::energy(&residual, Region::Full)?;
    let mut dec = ProfileDecomposition {
        profiles,
        rejected,
        residual,
        residual_grad_sq: res.gradient_sq,
        residual_kin_sq: res.kinetic_sq,
        pythagorean_defect: 0.0,
        correlation_history: history,
        status,
    };
    dec.pythagorean_defect = pythagorean_check(a, &dec)?.grad_defect;
    Ok(dec)
}

/// Re-fits each scale against the snapshot minus the other profiles, which
/// removes the bias that cross-scale pairings put on the greedy picks.
fn backfit(residual: &mut FieldState, profiles: &mut [ExtractedProfile], window: f64) {
    for _ in 0..BACKFIT_SWEEPS {
        let mut moved = 0.0f64;
        for p in profiles.iter_mut() {
            subtract_w(residual, -(p.iota as f64), p.lambda);
            let corr = Correlator::new(residual);
            let x0 = p.lambda.ln();
            let x = golden_max(|x| corr.at(x.exp()) * p.iota as f64, x0 - window, x0 + window, x0);
            moved = moved.max((x - x0).abs());
            p.lambda = x.exp();
            p.raw_coefficient = corr.at(p.lambda);
            subtract_w(residual, p.iota as f64, p.lambda);
        }
        if moved < 1e-8 {
            break;
        }
    }
}

const BACKFIT_SWEEPS: usize = 8;

/// Defects of the gradient, kinetic and energy expansions
/// `‖∇a‖² = Σ‖∇W_λⱼ‖² + ‖∇w‖²`, `‖∂ₜa‖² = ‖∂ₜw‖²`, `E(a) = Σ E(W_λⱼ) + E(w)`.
pub fn pythagorean_check(a: &FieldState, dec: &ProfileDecomposition) -> Result<PythagoreanDefects> {
    let ea = ground_state::energy(a, Region::Full)?;
    let er = ground_state::energy(&dec.residual, Region::Full)?;
    let mut grad = 0.0;
    let mut energy = 0.0;
    for p in &dec.profiles {
        let w = mesh_w_norm(&a.mesh, p.lambda)?;
        grad += w.gradient_sq;
        energy += w.total_energy;
    }
    Ok(PythagoreanDefects {
        grad_defect: (ea.gradient_sq - grad - er.gradient_sq).abs(),
        kinetic_defect: (ea.kinetic_sq - er.kinetic_sq).abs(),
        energy_defect: (ea.total_energy - energy - er.total_energy).abs(),
    })
}

/// Normalized pairings `⟨∇W_λⱼ, ∇W_λₖ⟩/‖∇W‖²` (empty below two profiles).
pub fn orthogonality_matrix(dec: &ProfileDecomposition) -> Vec<Vec<f64>> {
    let n = dec.profiles.len();
    if n < 2 {
        return Vec::new();
    }
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| ground_state::gradient_pairing(dec.profiles[k].lambda / dec.profiles[j].lambda))
                .collect()
        })
        .collect()
}

impl ProfileDecomposition {
    pub fn record(&self, a: &FieldState) -> Result<DecompositionRecord> {
        Ok(DecompositionRecord {
            profiles: self.profiles.clone(),
            residual_grad_sq: self.residual_grad_sq,
            residual_kin_sq: self.residual_kin_sq,
            defects: pythagorean_check(a, self)?,
            status: self.status,
        })
    }
}

/// Graded mesh resolving every scale in `[min_scale, max_scale]`: spacing
/// `max_scale/20` outside, shrinking by 5% per cell toward the origin down to
/// `min_scale/200`, and `R_max = 50·max_scale`.
pub fn multiscale_mesh(min_scale: f64, max_scale: f64) -> Result<RadialMesh> {
    if !(min_scale > 0.0) || !(max_scale >= min_scale) {
        return Err(Error::InvalidParameter("need 0 < min_scale ≤ max_scale".into()));
    }
    let h = max_scale / 20.0;
    let ratio = 1.05f64;
    let inner = ((h / (min_scale / 200.0)).ln() / ratio.ln()).ceil().max(1.0) as usize;
    RadialMesh::geometric(h, ratio, inner, 50.0 * max_scale)
}

/// Synthetic test snapshot: `Σ ιⱼW_λⱼ` plus smooth random noise with
/// `‖∇noise‖ = level·‖∇W‖` in `u` and `‖noise‖ = level·‖∇W‖` in `∂ₜu`.
pub fn synthetic_snapshot<R: Rng>(
    mesh: Arc<RadialMesh>,
    bubbles: &[(i8, f64)],
    noise_level: f64,
    rng: &mut R,
) -> Result<FieldState> {
    let r = mesh.nodes().to_vec();
    let mut field = FieldState::zeros(mesh.clone(), 0.0);
    for &(iota, lambda) in bubbles {
        subtract_w(&mut field, -(iota as f64), lambda);
    }
    if noise_level > 0.0 {
        let lo = (4.0 * mesh.min_spacing()).ln();
        let hi = (0.25 * mesh.r_max()).ln();
        let bump = |rng: &mut R| {
            let center = rng.gen_range(lo..hi).exp();
            let width = center * rng.gen_range(0.3..1.0);
            let amp = rng.gen_range(-1.0..1.0) / center.sqrt();
            (center, width, amp)
        };
        let mut noise = FieldState::zeros(mesh.clone(), 0.0);
        for _ in 0..8 {
            let (c0, w0, a0) = bump(rng);
            let (c1, w1, a1) = bump(rng);
            for (i, &ri) in r.iter().enumerate() {
                let z0 = (ri - c0) / w0;
                let z1 = (ri - c1) / w1;
                noise.h[i] += ri * a0 * (-z0 * z0).exp();
                noise.hdot[i] += ri * a1 * (-z1 * z1).exp() / c1;
            }
        }
        noise.h[0] = 0.0;
        noise.hdot[0] = 0.0;
        let e = ground_state::energy(&noise, Region::Full)?;
        let target = noise_level * ground_state::grad_w_sq().sqrt();
        let su = if e.gradient_sq > 0.0 { target / e.gradient_sq.sqrt() } else { 0.0 };
        let sv = if e.kinetic_sq > 0.0 { target / e.kinetic_sq.sqrt() } else { 0.0 };
        for i in 0..r.len() {
            field.h[i] += su * noise.h[i];
            field.hdot[i] += sv * noise.hdot[i];
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn snapshot(bubbles: &[(i8, f64)], noise: f64, seed: u64) -> FieldState {
        let min = bubbles.iter().map(|b| b.1).fold(1.0, f64::min);
        let max = bubbles.iter().map(|b| b.1).fold(1.0, f64::max);
        let mesh = Arc::new(multiscale_mesh(min, max).unwrap());
        synthetic_snapshot(mesh, bubbles, noise, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn correlate_examples() {
        let a = snapshot(&[(1, 0.3)], 0.0, 0);
        assert!((correlate_scale(&a, 0.3) - 1.0).abs() < 1e-4);
        let mut b = a.clone();
        b.h.iter_mut().for_each(|h| *h *= -3.0);
        assert!((correlate_scale(&b, 0.3) + 3.0).abs() < 3e-4);
        let two = snapshot(&[(1, 1.0), (1, 1e-3)], 0.0, 0);
        let expected = 1.0 + ground_state::gradient_pairing(1e-3);
        assert!((correlate_scale(&two, 1.0) - expected).abs() < 1e-3);
    }

    #[test]
    fn empty_and_single() {
        let mesh = Arc::new(multiscale_mesh(0.01, 1.0).unwrap());
        let z = FieldState::zeros(mesh, 0.0);
        let d = extract(&z, &ExtractConfig::default()).unwrap();
        assert!(d.profiles.is_empty());
        assert_eq!(d.pythagorean_defect, 0.0);
        assert!(orthogonality_matrix(&d).is_empty());

        let a = snapshot(&[(1, 0.01)], 1e-3, 1);
        let d = extract(&a, &ExtractConfig::default()).unwrap();
        assert_eq!(d.profiles.len(), 1);
        assert_eq!(d.profiles[0].iota, 1);
        assert!((d.profiles[0].lambda / 0.01 - 1.0).abs() < 0.01, "{:?}", d.profiles);
        assert_eq!(d.status, ExtractionStatus::Complete);
    }

    #[test]
    fn two_bubbles_opposite_signs() {
        let a = snapshot(&[(1, 1.0), (-1, 1e-3)], 1e-3, 2);
        let d = extract(&a, &ExtractConfig::default()).unwrap();
        assert_eq!(d.profiles.len(), 2, "{:?}", d.profiles);
        assert_eq!((d.profiles[0].iota, d.profiles[1].iota), (1, -1));
        assert!((d.profiles[0].lambda - 1.0).abs() < 0.01);
        assert!((d.profiles[1].lambda / 1e-3 - 1.0).abs() < 0.01, "{:?} {:?}", d.profiles, d.correlation_history);
        let m = orthogonality_matrix(&d);
        assert!((m[0][0] - 1.0).abs() < 1e-9 && m[0][1] < 0.1);
    }

    #[test]
    fn rejects_large_coefficients() {
        let mut a = snapshot(&[(1, 0.1)], 0.0, 0);
        a.h.iter_mut().for_each(|h| *h *= 3.0);
        let d = extract(&a, &ExtractConfig::default()).unwrap();
        assert!(d.profiles.is_empty());
        assert!((d.rejected[0].raw_coefficient - 3.0).abs() < 1e-3);
    }

    #[test]
    fn over_budget_is_reported() {
        let a = snapshot(&[(1, 1.0), (1, 1e-3)], 0.0, 0);
        let cfg = ExtractConfig { max_profiles: 1, ..Default::default() };
        let d = extract(&a, &cfg).unwrap();
        assert_eq!(d.status, ExtractionStatus::OverBudget);
        assert_eq!(d.profiles.len(), 1);
    }

    #[test]
    fn noise_has_requested_level() {
        let mesh = Arc::new(multiscale_mesh(0.01, 1.0).unwrap());
        let n = synthetic_snapshot(mesh, &[], 1e-3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let e = ground_state::energy(&n, Region::Full).unwrap();
        let target = 1e-6 * ground_state::grad_w_sq();
        assert!((e.gradient_sq / target - 1.0).abs() < 1e-9);
        assert!((e.kinetic_sq / target - 1.0).abs() < 1e-9);
    }
}
