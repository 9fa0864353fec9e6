//! Principal-value Hilbert transforms against their closed forms, and the
//! truncated transform θ_η with its error bound.
//!
//! cargo run --release --example hilbert_transform

use bandpert::hilbert::{density_fn, hilbert_closed_form, hilbert_pv, theta_bound, theta_eta, PvQuadratureConfig, ReferenceDensity};
use bandpert::model::{Example, LimitDensity, ModelSpec};

fn main() -> anyhow::Result<()> {
    let cfg = PvQuadratureConfig::default();
    let cases = [
        ("uniform", LimitDensity::UniformOn01, vec![0.1, 0.5, 0.9, 1.5]),
        ("triangular", LimitDensity::TriangularPulse, vec![-0.5, 0.0, 0.25, 2.0]),
        ("semicircle", LimitDensity::semicircle(1.0)?, vec![0.0, 1.0, 1.9, 3.0]),
    ];
    println!("{:>14} {:>6} {:>16} {:>16} {:>9}", "density", "s", "p.v. quadrature", "closed form", "error");
    for (name, rho, points) in &cases {
        let kind = ReferenceDensity::from_density(rho).expect("reference density");
        let u = density_fn(rho);
        for &s in points {
            let numeric = hilbert_pv(&u, s, &cfg)?;
            let exact = hilbert_closed_form(kind, s);
            println!(
                "{name:>14} {s:>6.2} {numeric:>16.10} {exact:>16.10} {:>9.1e}",
                (numeric - exact).abs()
            );
        }
    }

    // θ_η(s) → ρ(s) H[τ(s,·)ρ](s) as η → 0, within the Hölder bound.
    let model = ModelSpec::example(Example::TriangularGoe)?;
    let s = 0.3;
    let limit = -bandpert::correction::correction_value(&model, s, &cfg)?;
    println!("\ntriangular pulse, s = {s}: ρH[ρ] = {limit:.8}");
    for eta in [1e-1, 1e-2, 1e-3, 1e-4] {
        let th = theta_eta(&model, s, eta, &cfg)?;
        println!("  η = {eta:.0e}  θ_η = {th:.8}  |θ_η - limit| = {:.2e}", (th - limit).abs());
    }
    println!("  bound at η₀: {:.3e}", theta_bound(&model, s));
    Ok(())
}
