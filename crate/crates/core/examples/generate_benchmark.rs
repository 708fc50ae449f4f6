//! Regenerate the eight benchmark groups and print a checksum per instance.
//!
//! `cargo run --example generate_benchmark -- out_dir` also writes the files.

use petri_fms::bench::sha256_hex;
use petri_fms::instance::{benchmark_instances, write_instance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1);
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir)?;
    }
    for inst in benchmark_instances()? {
        let text = write_instance(&inst);
        println!(
            "{} {}x{}x{} {}",
            inst.name,
            inst.n_jobs(),
            inst.n_machines,
            inst.n_tools,
            sha256_hex(text.as_bytes())
        );
        if let Some(dir) = &out {
            std::fs::write(format!("{dir}/{}.txt", inst.name), text)?;
        }
    }
    Ok(())
}
