//! Numerical checks of the modelling hypotheses.
//!
//! The Hölder check is piecewise: pairs `(s, t)` separated by a declared
//! jump of `t -> tau(s,t) rho(t)` are skipped, and `s` exactly on a jump is
//! ignored ("almost all s").

use std::fmt;

use crate::model::kernel::{consistency_residual, holder_ratio, SYMMETRY_TOLERANCE};
use crate::model::ModelSpec;
use crate::quadrature::GradedGauss;

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed violation measure (same units as `threshold`).
    pub worst: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<13} {}  worst = {:.3e}  threshold = {:.3e}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.worst,
                c.threshold
            )?;
        }
        Ok(())
    }
}

fn check(name: &'static str, worst: f64, threshold: f64) -> HypothesisCheck {
    HypothesisCheck {
        name,
        passed: worst <= threshold,
        worst,
        threshold,
    }
}

/// Runs every checkable hypothesis on `samples` sample points per axis.
pub fn validate_hypotheses(model: &ModelSpec, samples: usize) -> ValidationReport {
    let samples = samples.max(2);
    let (lo, hi) = model.support();
    let kernel = model.kernel();
    let rho = model.rho();
    let f = model.f();
    let profile = model.profile();

    // Symmetry of tau and sigma^2.
    let pair_pts = samples.min(400);
    let spts: Vec<f64> = (0..pair_pts)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / pair_pts as f64)
        .collect();
    let mut sym = profile.symmetry_defect();
    for (i, &s) in spts.iter().enumerate() {
        for &t in &spts[..i] {
            sym = sym.max((kernel.eval(s, t) - kernel.eval(t, s)).abs());
        }
    }

    // Boundedness of f, sigma^2 and tau.
    let m = f.bound();
    let xs: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
    let mut bounded = xs
        .iter()
        .map(|&x| (f.eval(x).abs() - m).max(0.0))
        .fold(0.0, f64::max);
    let grid_pts = samples.min(200);
    for i in 0..grid_pts {
        let x = (i as f64 + 0.5) / grid_pts as f64;
        for j in 0..grid_pts {
            let y = (j as f64 + 0.5) / grid_pts as f64;
            let v = profile.eval(x, y);
            bounded = bounded.max(-v).max(v - profile.bound());
        }
    }
    for &s in &spts {
        for &t in &spts {
            bounded = bounded.max(kernel.eval(s, t).abs() - kernel.bound());
        }
    }
    bounded = bounded.max((rho.spectral_bound() - m).max(0.0));

    // rho is a probability density.
    let mut b = rho.breakpoints();
    b.push(lo);
    b.push(hi);
    b.sort_by(f64::total_cmp);
    b.dedup();
    let mass: f64 = GradedGauss::default().integrate_pieces(|s| rho.pdf(s), &b);
    let negative = spts.iter().map(|&s| (-rho.pdf(s)).max(0.0)).fold(0.0, f64::max);
    let density_defect = (mass - 1.0).abs().max(negative);

    // Push-forward of uniform([0,1]) by f against rho (Kolmogorov distance).
    let mut images: Vec<f64> = (1..=samples).map(|i| f.eval(i as f64 / samples as f64)).collect();
    images.sort_by(f64::total_cmp);
    let n = samples as f64;
    let ks = images
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = rho.cdf(v);
            ((i + 1) as f64 / n - c).abs().max((i as f64 / n - c).abs())
        })
        .fold(0.0, f64::max);
    let ks_threshold = 2.0 / n + 1.0 / model.resolution() as f64;

    // sigma^2(x,y) = tau(f(x), f(y)).
    let consistency = consistency_residual(profile, f, kernel, 100);

    let holder = kernel.holder();
    let ratio = holder_ratio(kernel, rho, holder.alpha, holder.eta0, samples, 13);

    ValidationReport {
        checks: vec![
            check("symmetry", sym, SYMMETRY_TOLERANCE),
            check("boundedness", bounded, 1e-12),
            check("density", density_defect, 1e-6),
            check("push-forward", ks, ks_threshold),
            check("consistency", consistency, 10.0 / model.resolution() as f64),
            check("holder", ratio, holder.constant * (1.0 + 1e-9)),
        ],
    }
}
