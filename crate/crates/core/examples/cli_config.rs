//! Drive an experiment through the configuration layer used by the binary:
//! parse TOML, resolve defaults, run and write JSONL.

use std::path::Path;

use z2gauge::cli::{header, run, write_output, ExperimentConfig, Format};
use z2gauge::Result;

const CONFIG: &str = r#"
task = "griffiths"

[complex]
m = 3
extents = [2, 2, 2]

[coupling]
betas = [0.25, 0.5]

[[loops]]
kind = "plaquette"
index = 0

[[loops]]
kind = "plaquette"
index = 2
"#;

fn main() -> Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let prepared = cfg.prepare(Path::new("."))?;
    println!("resolved configuration:\n{}", prepared.resolved.to_toml()?);
    let outcome = run(&prepared)?;
    let mut out = std::io::stdout().lock();
    write_output(&mut out, Format::Jsonl, &header(&prepared.resolved)?, &outcome)?;
    println!("exit code would be {}", outcome.exit_code());
    Ok(())
}
