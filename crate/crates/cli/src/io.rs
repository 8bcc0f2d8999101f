//! File loading shared by the subcommands.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use asymgraph::features::read_features;
use asymgraph::graph::{ingest, read_edge_records};
use asymgraph::model::read_embeddings;
use asymgraph::{DirectedProductGraph, DualEmbeddings, Error, FeatureMatrix, KeyMap, ModelParams};

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Non-finite values in an input file are a data problem, not a numerical one.
fn as_data_error(e: Error) -> Error {
    match e {
        Error::NonFinite(m) => Error::Invalid(m),
        other => other,
    }
}

pub fn load_features(path: &Path) -> Result<(KeyMap, FeatureMatrix)> {
    read_features(open(path)?, &path.display().to_string())
        .map_err(as_data_error)
        .with_context(|| format!("loading features from {}", path.display()))
}

/// Reads an edge file against the key universe fixed by a feature file.
pub fn load_graph(path: &Path, keys: &KeyMap) -> Result<DirectedProductGraph> {
    let records = read_edge_records(open(path)?, &path.display().to_string())?;
    ingest(&records, keys).with_context(|| format!("building graph from {}", path.display()))
}

pub fn load_params(path: &Path) -> Result<ModelParams> {
    ModelParams::read_checkpoint(open(path)?)
        .with_context(|| format!("loading checkpoint {}", path.display()))
}

pub fn load_embeddings(path: &Path) -> Result<(KeyMap, DualEmbeddings)> {
    read_embeddings(open(path)?, &path.display().to_string())
        .map_err(as_data_error)
        .with_context(|| format!("loading embeddings from {}", path.display()))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes through a temporary file and renames, so readers never see a
/// half-written artifact.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> asymgraph::Result<()>,
{
    let tmp = path.with_extension("tmp");
    {
        let f = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        let mut w = BufWriter::new(f);
        body(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
