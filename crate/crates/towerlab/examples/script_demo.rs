//! Running a `.twr` script through the same machinery as `towerlab run`.

use towerlab::cli::{golden_scripts, run_script, RunConfig};

fn main() -> towerlab::Result<()> {
    for (name, src) in golden_scripts() {
        println!("=== {name}.twr ===");
        println!("{src}");
        let report = run_script(src, &RunConfig::default())?;
        print!("{}", report.render_human());
        assert!(report.ok);
        println!();
    }
    Ok(())
}
