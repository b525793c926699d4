//! JSON model archives tagged with a kind and a format version.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct ArchiveOut<'a, T> {
    kind: &'a str,
    version: u32,
    model: &'a T,
}

#[derive(Deserialize)]
struct ArchiveIn<T> {
    kind: String,
    version: u32,
    model: T,
}

#[derive(Deserialize)]
struct Header {
    kind: String,
    version: u32,
}

pub fn to_string<T: Serialize>(kind: &str, model: &T) -> Result<String> {
    Ok(serde_json::to_string(&ArchiveOut {
        kind,
        version: FORMAT_VERSION,
        model,
    })?)
}

pub fn from_str<T: DeserializeOwned>(kind: &str, raw: &str) -> Result<T> {
    let header: Header = serde_json::from_str(raw)?;
    check(kind, &header.kind, header.version)?;
    let archive: ArchiveIn<T> = serde_json::from_str(raw)?;
    Ok(archive.model)
}

pub fn save<T: Serialize>(path: impl AsRef<Path>, kind: &str, model: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(
        &mut w,
        &ArchiveOut {
            kind,
            version: FORMAT_VERSION,
            model,
        },
    )?;
    w.flush()?;
    Ok(())
}

pub fn load<T: DeserializeOwned>(path: impl AsRef<Path>, kind: &str) -> Result<T> {
    let archive: ArchiveIn<T> = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| Error::Archive(e.to_string()))?;
    check(kind, &archive.kind, archive.version)?;
    Ok(archive.model)
}

/// Reads only the `kind` field of an archive file.
pub fn peek_kind(path: impl AsRef<Path>) -> Result<String> {
    #[derive(Deserialize)]
    struct Kind {
        kind: String,
    }
    let k: Kind = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| Error::Archive(e.to_string()))?;
    Ok(k.kind)
}

fn check(expected: &str, kind: &str, version: u32) -> Result<()> {
    if kind != expected {
        return Err(Error::Archive(format!("expected a {expected} archive, found {kind}")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::Archive(format!(
            "unsupported archive version {version} (this build reads {FORMAT_VERSION})"
        )));
    }
    Ok(())
}
