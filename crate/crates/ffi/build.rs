#[cfg(feature = "gen_h")]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR")?;
    cbindgen::generate(&crate_dir)?.write_to_file(format!("{crate_dir}/include/ioncat.h"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    Ok(())
}

#[cfg(not(feature = "gen_h"))]
fn main() {}
