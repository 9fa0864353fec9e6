//! Build a model from a JSON description and check its hypotheses; an
//! antisymmetric variance profile is rejected.
//!
//! cargo run --release --example validate_model

use bandpert::model::{validate_hypotheses, ModelConfig, ModelSpec};

const BAND: &str = r#"{
  "density": { "kind": "triangular" },
  "profile": { "kind": "band", "params": { "width": 0.3 } }
}"#;

// σ²(x, y) tabulated on a 2×2 grid, not symmetric.
const SKEWED: &str = r#"{
  "density": { "kind": "uniform" },
  "profile": { "kind": "tabulated", "params": { "size": 2, "values": [1.0, 2.0, 0.5, 1.0] } }
}"#;

fn main() -> anyhow::Result<()> {
    let cfg = ModelConfig::from_json(BAND)?;
    let model = ModelSpec::from_config(&cfg)?;
    println!("triangular density, band 0.3 (model hash {})", &cfg.hash()[..12]);
    print!("{}", validate_hypotheses(&model, 200));

    match ModelSpec::from_config(&ModelConfig::from_json(SKEWED)?) {
        Ok(m) => print!("\nskewed profile:\n{}", validate_hypotheses(&m, 200)),
        Err(e) => println!("\nskewed profile rejected: {e}"),
    }
    Ok(())
}
