//! Runs the fast suites in dimension one and writes the report bundle to `target/verify`.

use logconcave::harness::{run_all, RunConfig, Suite};
use logconcave::Result;

fn main() -> Result<()> {
    let cfg = RunConfig {
        dims: vec![1],
        suites: vec![Suite::Transforms, Suite::Isotropization, Suite::Inclusion, Suite::Volume, Suite::Widths],
        ..RunConfig::default()
    };
    let bundle = run_all(&cfg)?;
    for r in &bundle.reports {
        println!("{:<32} {:>4} cases, {} failed", r.suite_name, r.cases.len(), r.failures().count());
    }
    let dir = std::path::Path::new("target/verify");
    bundle.write(dir)?;
    println!("bundle in {}, exit code {}", dir.display(), bundle.exit_code());
    std::process::exit(bundle.exit_code());
}
