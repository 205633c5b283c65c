use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ontology::Ontology;
use crate::scene::{Scene, ScenePrediction};

/// Reads a JSON Lines scene file and validates every scene against `ontology`.
pub fn load_scenes(path: impl AsRef<Path>, ontology: &Ontology) -> Result<Vec<Scene>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_scenes(BufReader::new(file), ontology)
}

pub fn parse_scenes(reader: impl BufRead, ontology: &Ontology) -> Result<Vec<Scene>> {
    let mut scenes = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Schema(format!("line {}: {e}", lineno + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let scene: Scene = serde_json::from_str(&line)
            .map_err(|e| Error::Schema(format!("line {}: {e}", lineno + 1)))?;
        scene.validate(ontology)?;
        scenes.push(scene);
    }
    Ok(scenes)
}

/// Writes any serializable records as JSON Lines.
pub fn write_jsonl<T: serde::Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn save_scenes(path: impl AsRef<Path>, scenes: &[Scene]) -> Result<()> {
    write_jsonl(path, scenes)
}

pub fn save_predictions(path: impl AsRef<Path>, preds: &[ScenePrediction]) -> Result<()> {
    write_jsonl(path, preds)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<ScenePrediction>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Schema(format!("predictions line {}: {e}", i + 1)))
        })
        .collect()
}

/// Keeps the `max_objects` most confident detections, preserving their order.
pub fn truncate_objects(scene: &mut Scene, max_objects: usize) {
    if scene.objects.len() <= max_objects {
        return;
    }
    let mut order: Vec<usize> = (0..scene.objects.len()).collect();
    order.sort_by(|&a, &b| {
        scene.objects[b]
            .confidence()
            .total_cmp(&scene.objects[a].confidence())
            .then(a.cmp(&b))
    });
    let mut keep = order[..max_objects].to_vec();
    keep.sort_unstable();
    let objects = std::mem::take(&mut scene.objects);
    scene.objects = objects
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.binary_search(i).is_ok())
        .map(|(_, o)| o)
        .collect();
}

/// Write-then-rename so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
