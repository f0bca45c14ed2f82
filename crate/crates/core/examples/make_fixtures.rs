//! Writes the Angewandte fixture files into a directory (default `fixtures/`).
//!
//!     cargo run --example make_fixtures -- /tmp/angew
//!     cargo run -- pipeline --config /tmp/angew/angew.toml

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let config = citenv::fixtures::write_angew_files(std::path::Path::new(&dir))?;
    println!("{}", config.display());
    Ok(())
}
