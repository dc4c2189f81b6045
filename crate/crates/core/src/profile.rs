//! Closed-form radial profiles `r ↦ u(r)` with their radial derivatives.

use std::sync::Arc;

/// A radial function on `[0, ∞)` with known derivative.
pub trait RadialProfile: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
}

/// `ι·λ^{-1/2}·W(r/λ)` in dimension 3, with `W(r) = (1 + r²/3)^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledW {
    pub scale: f64,
    pub sign: f64,
}

impl ScaledW {
    pub fn new(scale: f64, sign: f64) -> Self {
        Self { scale, sign }
    }
}

impl RadialProfile for ScaledW {
    fn value(&self, r: f64) -> f64 {
        let s = r / self.scale;
        self.sign / self.scale.sqrt() / (1.0 + s * s / 3.0).sqrt()
    }

    fn derivative(&self, r: f64) -> f64 {
        let s = r / self.scale;
        -self.sign / self.scale.powf(1.5) * (s / 3.0) * (1.0 + s * s / 3.0).powf(-1.5)
    }
}

/// `amp · exp(−(r − center)²/width²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub amp: f64,
    pub center: f64,
    pub width: f64,
}

impl Gaussian {
    pub fn centered(amp: f64, width: f64) -> Self {
        Self {
            amp,
            center: 0.0,
            width,
        }
    }
}

impl RadialProfile for Gaussian {
    fn value(&self, r: f64) -> f64 {
        let z = (r - self.center) / self.width;
        self.amp * (-z * z).exp()
    }

    fn derivative(&self, r: f64) -> f64 {
        let z = (r - self.center) / self.width;
        -2.0 * z / self.width * self.amp * (-z * z).exp()
    }
}

/// Smooth compactly supported bump `amp·(1 − ((r−c)/w)²)³` on `|r − c| < w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactBump {
    pub amp: f64,
    pub center: f64,
    pub width: f64,
}

impl RadialProfile for CompactBump {
    fn value(&self, r: f64) -> f64 {
        let z = (r - self.center) / self.width;
        if z.abs() >= 1.0 {
            0.0
        } else {
            self.amp * (1.0 - z * z).powi(3)
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        let z = (r - self.center) / self.width;
        if z.abs() >= 1.0 {
            0.0
        } else {
            -6.0 * z / self.width * self.amp * (1.0 - z * z).powi(2)
        }
    }
}

/// Zero profile.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl RadialProfile for Zero {
    fn value(&self, _r: f64) -> f64 {
        0.0
    }
    fn derivative(&self, _r: f64) -> f64 {
        0.0
    }
}

/// `Σ cₖ·pₖ`.
#[derive(Clone, Default)]
pub struct Combination {
    terms: Vec<(f64, Arc<dyn RadialProfile>)>,
}

impl Combination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, coeff: f64, p: impl RadialProfile + 'static) -> Self {
        self.terms.push((coeff, Arc::new(p)));
        self
    }

    pub fn push(&mut self, coeff: f64, p: Arc<dyn RadialProfile>) {
        self.terms.push((coeff, p));
    }
}

impl RadialProfile for Combination {
    fn value(&self, r: f64) -> f64 {
        self.terms.iter().map(|(c, p)| c * p.value(r)).sum()
    }

    fn derivative(&self, r: f64) -> f64 {
        self.terms.iter().map(|(c, p)| c * p.derivative(r)).sum()
    }
}

/// Energy-critical rescaling `λ^{-1/2}·p(r/λ)` of any profile (N = 3).
#[derive(Clone)]
pub struct Rescaled<P> {
    pub inner: P,
    pub scale: f64,
}

impl<P: RadialProfile> RadialProfile for Rescaled<P> {
    fn value(&self, r: f64) -> f64 {
        self.inner.value(r / self.scale) / self.scale.sqrt()
    }

    fn derivative(&self, r: f64) -> f64 {
        self.inner.derivative(r / self.scale) / self.scale.powf(1.5)
    }
}

impl<P: RadialProfile + ?Sized> RadialProfile for Arc<P> {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        (**self).derivative(r)
    }
}

impl<P: RadialProfile + ?Sized> RadialProfile for &P {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        (**self).derivative(r)
    }
}
