#![allow(dead_code)]

use std::path::Path;

use vacobs_service::config::Config;
use vacobs_service::pipeline::{run_pipeline, PipelineSummary};
use vacobs_service::synth::{self, SynthComposition, SynthSpec};

pub fn write_fixture(dir: &Path, spec: &SynthSpec) -> (std::path::PathBuf, SynthComposition) {
    let (records, comp) = synth::generate(spec);
    let path = dir.join(format!("ads-{}.ndjson", spec.seed));
    synth::write_ndjson(&records, std::fs::File::create(&path).unwrap()).unwrap();
    (path, comp)
}

pub fn config(dir: &Path, fixture: &Path) -> Config {
    let mut cfg = Config {
        store: dir.join("obs.db"),
        model: dir.join("model.json"),
        ..Config::default()
    };
    cfg.source.fixture = Some(fixture.to_path_buf());
    cfg
}

/// Runs the pipeline over a fresh synthetic fixture in `dir`.
pub fn populated(dir: &Path, spec: &SynthSpec) -> (Config, PipelineSummary, SynthComposition) {
    let (fixture, comp) = write_fixture(dir, spec);
    let cfg = config(dir, &fixture);
    let summary = run_pipeline(&cfg).unwrap();
    (cfg, summary, comp)
}
