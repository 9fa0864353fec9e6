//! Correction `F = -ρ H[τ(s,·)ρ]` for the two models with a closed form.
//!
//! cargo run --release --example correction_table

use bandpert::correction::{closed_form_f, correction_f, ClosedFormExample};
use bandpert::grid::UniformGrid;
use bandpert::hilbert::PvQuadratureConfig;
use bandpert::model::{Example, ModelSpec};

fn main() -> anyhow::Result<()> {
    for example in [Example::UniformBand { width: 0.2 }, Example::TriangularGoe] {
        let model = ModelSpec::example(example)?;
        let (lo, hi) = model.support();
        let grid = UniformGrid::new(lo, hi, 21)?;
        let table = correction_f(&model, &grid, &PvQuadratureConfig::for_model(&model))?;
        let exact = ClosedFormExample::from_example(example).expect("closed form");

        println!("{}", example.name());
        println!("{:>8} {:>12} {:>12} {:>10}  flag", "s", "F", "closed", "dF");
        for (s, f, df, flag) in table.rows() {
            println!(
                "{s:>8.3} {f:>12.6} {:>12.6} {df:>10.4}  {}",
                closed_form_f(exact, s),
                flag.as_str()
            );
        }
        println!();
    }
    Ok(())
}
