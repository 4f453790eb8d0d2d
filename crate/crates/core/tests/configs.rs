//! The TOML files under `configs/` describe exactly the built-in configs.

use std::path::PathBuf;

use depthlab_core::config::RunConfig;
use depthlab_core::reference::seeded_configs;

fn config_path(name: &str) -> PathBuf {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    if name == "reference" {
        root.join("reference.toml")
    } else {
        root.join("seeded").join(format!("{name}.toml"))
    }
}

#[test]
fn config_files_match_builtins() {
    let seeded = seeded_configs();
    assert!(seeded.len() >= 20);
    for (name, config) in seeded {
        let loaded = RunConfig::load(&config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(loaded, config, "{name}");
        assert_eq!(loaded.hash(), config.hash(), "{name}");
    }
}

#[test]
fn every_seeded_file_is_builtin() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/seeded");
    let names: Vec<&str> = seeded_configs().iter().map(|(n, _)| *n).collect();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_str().unwrap().to_string();
        assert!(names.contains(&stem.as_str()), "{stem} has no built-in counterpart");
    }
}
