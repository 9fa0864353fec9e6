//! Monte Carlo: eigenvalues of `D_n + sqrt(ε/n) X_n` for the uniform density
//! with a band profile, replicate-averaged CDF shift against the correction F.
//!
//! cargo run --release --example simulate_shift [-- n replicates]

use bandpert::correction::correction_value;
use bandpert::grid::UniformGrid;
use bandpert::hilbert::PvQuadratureConfig;
use bandpert::model::{Example, ModelSpec};
use bandpert::sim::{replicate_average, run_replicates, sample_perturbed};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(800);
    let replicates: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(8);
    let (eps, seed) = (0.01, 7);

    let model = ModelSpec::example(Example::UniformBand { width: 0.2 })?;
    let ensemble = model.ensemble();
    let baseline = sample_perturbed(n, 0.0, &ensemble, seed, 0)?;
    let samples = run_replicates(n, eps, &ensemble, seed, replicates)?;
    let grid = UniformGrid::new(0.02, 0.98, 25)?;
    let shift = replicate_average(&samples, &baseline, &grid)?;
    let pv = PvQuadratureConfig::for_model(&model);

    println!("n = {n}, ε = {eps}, {replicates} replicates");
    println!("{:>6} {:>10} {:>9} {:>10}", "s", "shift", "stderr", "F");
    let mut worst: f64 = 0.0;
    for (i, s) in grid.iter().enumerate() {
        let f = correction_value(&model, s, &pv)?;
        worst = worst.max((shift.mean[i] - f).abs());
        println!("{s:>6.3} {:>10.4} {:>9.4} {f:>10.4}", shift.mean[i], shift.stderr[i]);
    }
    println!("sup |shift - F| = {worst:.4}");
    Ok(())
}
