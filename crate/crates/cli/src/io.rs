//! Small readers shared by the subcommands.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::Result;
use curvecast_core::metafeatures::MetaFeatureVector;
use curvecast_core::Error;
use serde::de::DeserializeOwned;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?)
}

/// Meta-feature vectors keyed by dataset ID.
///
/// `path` is either a JSON object mapping IDs to vectors (as written by
/// `synth`) or a directory of `<id>.json` files, one vector each (as written
/// by `meta`).
pub fn read_meta_map(path: &Path) -> Result<BTreeMap<String, MetaFeatureVector>> {
    let map: BTreeMap<String, MetaFeatureVector> = if path.is_dir() {
        let mut map = BTreeMap::new();
        for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, e))? {
            let p = entry.map_err(|e| Error::io(path, e))?.path();
            if p.extension().is_some_and(|e| e == "json") && !p.to_string_lossy().ends_with(".manifest.json") {
                let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                map.insert(id, read_json(&p)?);
            }
        }
        map
    } else {
        read_json(path)?
    };
    for (id, m) in &map {
        m.validate()
            .map_err(|e| Error::format(path, format!("dataset `{id}`"), e.to_string()))?;
    }
    Ok(map)
}

/// Writes rows as CSV into a byte buffer.
pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Shortest text that parses back to the same `f64`.
pub fn real(v: f64) -> String {
    format!("{v:?}")
}
