//! Chi-squared tail probabilities and variates.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::function::gamma::{gamma_ur, ln_gamma};

/// Upper tail `P(X > x)` of a central chi-squared with `dof` degrees of
/// freedom.
pub fn central_sf(dof: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof / 2.0, x / 2.0)
}

/// Upper tail `P(X > x)` of a noncentral chi-squared.
///
/// Uses the Poisson mixture `sum_j Pois(j; ncp/2) Q(dof/2 + j, x/2)`,
/// summed over the part of the Poisson mass that is not negligible. The
/// regularized gamma is evaluated once at the lowest index and carried
/// upward with `Q(a+1, y) = Q(a, y) + y^a e^-y / Gamma(a+1)`.
pub fn noncentral_sf(dof: f64, ncp: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if ncp <= 0.0 {
        return central_sf(dof, x);
    }
    // Lower-tail concentration for noncentral chi-squared:
    // P(X <= k + l - 2 sqrt((k + 2l) t)) <= exp(-t). With t = 800 the
    // remaining mass is far below f64 resolution.
    let spread = (dof + 2.0 * ncp).sqrt();
    if x < dof + ncp - 2.0 * spread * 800f64.sqrt() {
        return 1.0;
    }

    let mu = ncp / 2.0;
    let width = 40.0 * mu.sqrt() + 60.0;
    let lo = (mu - width).max(0.0).floor();
    let hi = (mu + width).ceil();
    let y = x / 2.0;
    let ln_y = y.ln();

    let mut a = dof / 2.0 + lo;
    let mut q = gamma_ur(a, y);
    let mut ln_w = -mu + lo * mu.ln() - ln_gamma(lo + 1.0);
    let mut total = 0.0;
    let mut j = lo;
    while j <= hi {
        total += ln_w.exp() * q;
        q += (a * ln_y - y - ln_gamma(a + 1.0)).exp();
        a += 1.0;
        j += 1.0;
        ln_w += mu.ln() - j.ln();
    }
    total.clamp(0.0, 1.0)
}

/// Draws a noncentral chi-squared variate as `(Z + sqrt(ncp))^2 + chi2(dof-1)`.
#[derive(Debug, Clone, Copy)]
pub struct NoncentralChiSquared {
    shift: f64,
    rest: Option<ChiSquared<f64>>,
}

impl NoncentralChiSquared {
    /// `dof` must be at least 1.
    pub fn new(dof: usize, ncp: f64) -> Self {
        assert!(dof >= 1, "chi-squared needs at least one degree of freedom");
        let rest = (dof > 1).then(|| ChiSquared::new((dof - 1) as f64).expect("positive dof"));
        Self {
            shift: ncp.max(0.0).sqrt(),
            rest,
        }
    }
}

impl Distribution<f64> for NoncentralChiSquared {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let head = (z + self.shift) * (z + self.shift);
        head + self.rest.map_or(0.0, |c| c.sample(rng))
    }
}
