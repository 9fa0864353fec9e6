//! Semicircle flow `ρ_t = λ_{c+t}`: finite-difference residual of
//! `∂_t ρ + ∂_s(ρ H[ρ]) = 0` under grid refinement, and the solver against
//! the semigroup identity.
//!
//! cargo run --release --example burgers_flow

use bandpert::burgers::{burgers_residual, semicircle_grid, semigroup_check, DensityFlow, SemigroupConfig};
use bandpert::hilbert::PvQuadratureConfig;

fn main() -> anyhow::Result<()> {
    let c = 1.0;
    let mut previous: Option<f64> = None;
    println!("{:>8} {:>8} {:>14} {:>8}", "dt", "ds", "max residual", "ratio");
    for level in 0..4 {
        let scale = 0.5f64.powi(level);
        let (dt, ds) = (0.05 * scale, 0.02 * scale);
        let slices = 2usize.pow(level as u32) * 4 + 1;
        let times: Vec<f64> = (0..slices).map(|k| k as f64 * dt).collect();
        let grid = semicircle_grid(c + times[slices - 1], ds)?;
        let flow = DensityFlow::semicircle(c, &times, &grid)?;
        let table = burgers_residual(&flow, &PvQuadratureConfig::for_width(5.0))?;
        let r = table.max_within(0.9);
        let ratio = previous.map(|p| format!("{:.2}", p / r)).unwrap_or_default();
        println!("{dt:>8.4} {ds:>8.4} {r:>14.3e} {ratio:>8}");
        previous = Some(r);
    }

    let report = semigroup_check(c, 0.25, &SemigroupConfig::default())?;
    println!("\nsolver at ε = 0.25 from λ_1 vs λ_1.25: sup error {:.3e}", report.sup_error);
    Ok(())
}
