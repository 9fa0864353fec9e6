//! First-order response of the Cauchy transform, `d/dε C_ε(z)` at ε = 0,
//! three ways: the double integral Λ(g_z), the pairing `-∫ g_z' F`, and
//! extrapolated finite differences of the self-consistent solver.
//!
//! cargo run --release --example lambda_functional

use bandpert::cauchy::{first_order_slope, FieldProblem, SolverConfig};
use bandpert::correction::{lambda_from_correction, lambda_functional};
use bandpert::hilbert::PvQuadratureConfig;
use bandpert::model::{Example, ModelSpec};
use num_complex::Complex64;

fn main() -> anyhow::Result<()> {
    let solver = SolverConfig::default();
    let eps_list = [0.04, 0.02, 0.01, 0.005];
    for example in [
        Example::UniformBand { width: 0.2 },
        Example::TriangularGoe,
        Example::Semicircle { variance: 1.0 },
    ] {
        let model = ModelSpec::example(example)?;
        let problem = FieldProblem::from_model(&model, solver.nodes)?;
        let pv = PvQuadratureConfig::for_model(&model);
        println!("{}", example.name());
        for z in [Complex64::new(0.5, 0.5), Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0)] {
            let lam = lambda_functional(&model, z)?;
            let pairing = lambda_from_correction(&model, z, &pv)?;
            let slope = first_order_slope(&problem, z, &eps_list, &solver)?;
            println!(
                "  z = {z:.2}: Λ = {:.8}  -∫g'F = {:.8}  solver slope = {:.8} (±{:.1e})",
                lam.value, pairing, slope.value, slope.error_estimate
            );
        }
    }
    Ok(())
}
