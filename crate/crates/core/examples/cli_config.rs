//! Drive the command-line layer from code: resolve a config from a preset
//! plus overrides and write `escape.csv` with its metadata sidecar.
//!
//! `cargo run --release --example cli_config -- /tmp/cavity-out`

use cavity_chaos::cli_io::{main_with_args, FlatConfig, RunConfig};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "cavity-out".to_owned());
    let overrides = FlatConfig::from_json(r#"{"preset": "UU", "n_samples": 200, "cap": 5000}"#).expect("valid JSON");
    let cfg = RunConfig::from_flat(overrides).expect("valid config");
    println!("resolved: {:?}", cfg.cavity);

    let code = main_with_args([
        "cavity-chaos",
        "escape",
        "--preset",
        "UU",
        "--n-samples",
        "200",
        "--cap",
        "5000",
        "--output",
        &out,
    ]);
    std::process::exit(code);
}
