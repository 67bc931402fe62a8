//! von Mises-Fisher distribution: normalising constant, density and sampling.

use rand::Rng as _;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::seed::{self, Rng};
use crate::special::ln_bessel_i;
use crate::sphere::{check_dims, SpherePoint, UnitVector};

/// Mean direction and concentration of a vMF distribution on `S^{d-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VmfParams {
    mu: UnitVector,
    kappa: f64,
}

impl VmfParams {
    pub fn new(mu: UnitVector, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(invalid(format!("concentration must be finite and >= 0, got {kappa}")));
        }
        Ok(Self { mu, kappa })
    }

    pub fn mu(&self) -> &UnitVector {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }
}

/// `ln c_d(κ)`, the log normalising constant of the vMF density.
///
/// At `κ = 0` this is minus the log surface area of `S^{d-1}`.
pub fn log_normalizing_constant(kappa: f64, d: usize) -> Result<f64> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(invalid(format!("concentration must be finite and >= 0, got {kappa}")));
    }
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    let half = d as f64 / 2.0;
    if kappa == 0.0 {
        return Ok(statrs::function::gamma::ln_gamma(half)
            - std::f64::consts::LN_2
            - half * std::f64::consts::PI.ln());
    }
    let nu = half - 1.0;
    Ok(nu * kappa.ln() - half * (2.0 * std::f64::consts::PI).ln() - ln_bessel_i(nu, kappa))
}

pub fn log_density(x: &UnitVector, p: &VmfParams) -> Result<f64> {
    check_dims(p.dim(), x.dim())?;
    Ok(log_normalizing_constant(p.kappa, p.dim())? + p.kappa * p.mu.dot_unchecked(x))
}

/// Mean resultant length `A_d(κ) = I_{d/2}(κ) / I_{d/2-1}(κ)`.
pub fn mean_resultant_length(kappa: f64, d: usize) -> Result<f64> {
    if d < 2 || !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(invalid(format!("A_d(κ) needs d >= 2, κ >= 0 (got d={d}, κ={kappa})")));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    let half = d as f64 / 2.0;
    Ok((ln_bessel_i(half, kappa) - ln_bessel_i(half - 1.0, kappa)).exp())
}

/// `n` i.i.d. draws from `p`, reproducible per seed.
pub fn sample(p: &VmfParams, n: usize, seed: u64) -> Result<Vec<UnitVector>> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let mut rng = seed::rng(seed);
    Ok(sample_with(p, n, &mut rng))
}

pub fn sample_uniform(d: usize, n: usize, seed: u64) -> Result<Vec<UnitVector>> {
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    let mut rng = seed::rng(seed);
    Ok((0..n).map(|_| uniform_point(d, &mut rng)).collect())
}

/// Uniform point on `S^{d-1}` via a normalised Gaussian vector.
pub(crate) fn uniform_point(d: usize, rng: &mut Rng) -> UnitVector {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(u) = crate::sphere::normalize(&g) {
            return u;
        }
    }
}

/// Draws with the tangent-normal decomposition `x = wμ + sqrt(1-w²)v`:
/// `w` by Wood's rejection sampler, `v` uniform on the sphere orthogonal to μ.
pub(crate) fn sample_with(p: &VmfParams, n: usize, rng: &mut Rng) -> Vec<UnitVector> {
    let d = p.dim();
    if p.kappa == 0.0 {
        return (0..n).map(|_| uniform_point(d, rng)).collect();
    }
    let sampler = CosineSampler::new(p.kappa, d);
    let mu = p.mu.as_slice();
    (0..n)
        .map(|_| {
            let w = sampler.draw(rng);
            let v = tangent_direction(mu, rng);
            let s = (1.0 - w * w).max(0.0).sqrt();
            let coords: Vec<f64> = mu.iter().zip(&v).map(|(m, t)| w * m + s * t).collect();
            crate::sphere::normalize(&coords).expect("vMF draw lies on the sphere")
        })
        .collect()
}

fn tangent_direction(mu: &[f64], rng: &mut Rng) -> Vec<f64> {
    loop {
        let mut g: Vec<f64> = mu.iter().map(|_| StandardNormal.sample(rng)).collect();
        let proj: f64 = g.iter().zip(mu).map(|(a, b)| a * b).sum();
        g.iter_mut().zip(mu).for_each(|(a, m)| *a -= proj * m);
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            g.iter_mut().for_each(|a| *a /= norm);
            return g;
        }
    }
}

/// Rejection sampler for the cosine `w = μ'x` of a vMF draw.
struct CosineSampler {
    kappa: f64,
    dm1: f64,
    b: f64,
    x0: f64,
    c: f64,
    beta: Beta<f64>,
}

impl CosineSampler {
    fn new(kappa: f64, d: usize) -> Self {
        let dm1 = (d - 1) as f64;
        // b = (-2κ + sqrt(4κ² + (d-1)²)) / (d-1), rationalised for large κ
        let b = dm1 / (2.0 * kappa + (4.0 * kappa * kappa + dm1 * dm1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + dm1 * (1.0 - x0 * x0).ln();
        let beta = Beta::new(dm1 / 2.0, dm1 / 2.0).expect("positive shape");
        Self { kappa, dm1, b, x0, c, beta }
    }

    fn draw(&self, rng: &mut Rng) -> f64 {
        loop {
            let z = self.beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = rng.random();
            if self.kappa * w + self.dm1 * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                return w;
            }
        }
    }
}
