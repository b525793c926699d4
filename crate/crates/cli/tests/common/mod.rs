#![allow(dead_code)]

use std::path::{Path, PathBuf};

use abspec::config::TrainConfig;

pub fn core_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

/// Desk-scale settings used for every model trained in these tests.
pub fn small_config() -> TrainConfig {
    TrainConfig {
        d_model: 16,
        n_heads: 2,
        n_layers: 1,
        d_ff: 32,
        epochs: 30,
        lr: 1e-2,
        validation_fraction: 0.0,
        ..TrainConfig::default()
    }
}

/// A corpus directory holding copies of the named fixture articles.
pub fn corpus(dir: &Path, names: &[&str]) -> PathBuf {
    let out = dir.join("corpus");
    std::fs::create_dir_all(&out).unwrap();
    for n in names {
        let src = core_fixture(&format!("articles/{n}.json"));
        std::fs::copy(src, out.join(format!("{n}.json"))).unwrap();
    }
    out
}
