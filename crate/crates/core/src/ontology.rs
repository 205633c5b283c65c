//! Object and relation vocabularies, the relation-class to relation-type map,
//! and the head/body/tail split of relation classes.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Index of the "no relation" class in every relation vocabulary.
pub const BACKGROUND: usize = 0;

const BACKGROUND_NAME: &str = "__background__";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationType {
    /// Interactive relations (riding, eating, holding, ...).
    Interactive,
    /// Non-interactive relations (geometric and possessive: on, near, has, ...).
    NonInteractive,
}

impl RelationType {
    pub const ALL: [RelationType; 2] = [RelationType::Interactive, RelationType::NonInteractive];

    pub fn index(self) -> usize {
        match self {
            RelationType::Interactive => 0,
            RelationType::NonInteractive => 1,
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationType::Interactive => f.write_str("interactive"),
            RelationType::NonInteractive => f.write_str("non_interactive"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LongTailSplit {
    Head,
    Body,
    Tail,
}

impl LongTailSplit {
    pub const ALL: [LongTailSplit; 3] = [LongTailSplit::Head, LongTailSplit::Body, LongTailSplit::Tail];
}

impl fmt::Display for LongTailSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LongTailSplit::Head => f.write_str("head"),
            LongTailSplit::Body => f.write_str("body"),
            LongTailSplit::Tail => f.write_str("tail"),
        }
    }
}

/// On-disk layout of an ontology file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct OntologyFile {
    object_classes: Vec<String>,
    relation_classes: Vec<String>,
    type_map: BTreeMap<String, RelationType>,
    #[serde(default)]
    longtail_partition: BTreeMap<String, LongTailSplit>,
}

/// Validated vocabulary. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Ontology {
    object_classes: Vec<String>,
    relation_classes: Vec<String>,
    relation_types: Vec<Option<RelationType>>,
    partition: Vec<Option<LongTailSplit>>,
}

impl Ontology {
    /// Builds an ontology from explicit tables.
    ///
    /// `relation_classes` excludes the background class, which is inserted at index 0.
    /// Classes missing from `partition` default to [`LongTailSplit::Body`].
    pub fn new(
        object_classes: Vec<String>,
        relation_classes: Vec<String>,
        type_map: &BTreeMap<String, RelationType>,
        partition: &BTreeMap<String, LongTailSplit>,
    ) -> Result<Self> {
        let mut rels = Vec::with_capacity(relation_classes.len() + 1);
        rels.push(BACKGROUND_NAME.to_string());
        rels.extend(relation_classes);
        Self::from_file(OntologyFile {
            object_classes,
            relation_classes: rels,
            type_map: type_map.clone(),
            longtail_partition: partition.clone(),
        })
    }

    fn from_file(file: OntologyFile) -> Result<Self> {
        if file.object_classes.is_empty() {
            return Err(Error::Schema("object_classes is empty".into()));
        }
        check_unique(&file.object_classes, "object class")?;
        if file.relation_classes.is_empty() {
            return Err(Error::Schema(
                "relation_classes must start with the background class".into(),
            ));
        }
        check_unique(&file.relation_classes, "relation class")?;

        let known: HashSet<&str> = file.relation_classes[1..].iter().map(String::as_str).collect();
        for name in file.type_map.keys().chain(file.longtail_partition.keys()) {
            if !known.contains(name.as_str()) {
                return Err(Error::Schema(format!("unknown relation class: {name}")));
            }
        }

        let mut relation_types = vec![None];
        let mut partition = vec![None];
        for name in &file.relation_classes[1..] {
            let ty = file
                .type_map
                .get(name)
                .copied()
                .ok_or_else(|| Error::Schema(format!("untyped relation: {name}")))?;
            relation_types.push(Some(ty));
            partition.push(Some(
                file.longtail_partition.get(name).copied().unwrap_or(LongTailSplit::Body),
            ));
        }

        Ok(Ontology {
            object_classes: file.object_classes,
            relation_classes: file.relation_classes,
            relation_types,
            partition,
        })
    }

    fn to_file(&self) -> OntologyFile {
        let mut type_map = BTreeMap::new();
        let mut longtail_partition = BTreeMap::new();
        for (r, name) in self.relation_classes.iter().enumerate().skip(1) {
            type_map.insert(name.clone(), self.relation_types[r].expect("typed"));
            longtail_partition.insert(name.clone(), self.partition[r].expect("partitioned"));
        }
        OntologyFile {
            object_classes: self.object_classes.clone(),
            relation_classes: self.relation_classes.clone(),
            type_map,
            longtail_partition,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: OntologyFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("ontology: {e}")))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("ontology serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(&self.to_file()).expect("ontology serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn num_object_classes(&self) -> usize {
        self.object_classes.len()
    }

    /// Number of relation classes including background.
    pub fn num_relation_classes(&self) -> usize {
        self.relation_classes.len()
    }

    pub fn object_classes(&self) -> &[String] {
        &self.object_classes
    }

    pub fn relation_classes(&self) -> &[String] {
        &self.relation_classes
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.object_classes.iter().position(|c| c == name)
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relation_classes.iter().position(|c| c == name)
    }

    /// Maps a non-background relation class to its relation type.
    pub fn relation_type_of(&self, rel: usize) -> Result<RelationType> {
        if rel == BACKGROUND {
            return Err(Error::Domain("background relation has no type".into()));
        }
        self.relation_types
            .get(rel)
            .copied()
            .flatten()
            .ok_or_else(|| Error::Domain(format!("relation index {rel} out of range")))
    }

    /// Non-background relation classes of the given type, ascending.
    pub fn relations_of_type(&self, ty: RelationType) -> Vec<usize> {
        (1..self.relation_classes.len())
            .filter(|&r| self.relation_types[r] == Some(ty))
            .collect()
    }

    pub fn split_of(&self, rel: usize) -> Option<LongTailSplit> {
        self.partition.get(rel).copied().flatten()
    }

    pub fn relations_in_split(&self, split: LongTailSplit) -> Vec<usize> {
        (1..self.relation_classes.len())
            .filter(|&r| self.partition[r] == Some(split))
            .collect()
    }

    /// Copy of this ontology with the given type table.
    pub fn with_types(&self, types: &[RelationType]) -> Result<Self> {
        if types.len() + 1 != self.relation_classes.len() {
            return Err(Error::Config(format!(
                "expected {} relation types, got {}",
                self.relation_classes.len() - 1,
                types.len()
            )));
        }
        let mut out = self.clone();
        for (r, &t) in types.iter().enumerate() {
            out.relation_types[r + 1] = Some(t);
        }
        Ok(out)
    }

    /// Copy of this ontology with the head/body/tail split recomputed from
    /// per-relation GT counts (indexed by relation class, background ignored).
    pub fn with_partition_from_counts(&self, counts: &[u64]) -> Result<Self> {
        if counts.len() != self.relation_classes.len() {
            return Err(Error::Config(format!(
                "expected {} relation counts, got {}",
                self.relation_classes.len(),
                counts.len()
            )));
        }
        let mut out = self.clone();
        for (r, split) in partition_from_counts(&counts[1..]).into_iter().enumerate() {
            out.partition[r + 1] = Some(split);
        }
        Ok(out)
    }

    /// Visual Genome vocabulary: 150 object classes, 50 predicates.
    ///
    /// Predicates in the semantic super-type are interactive; geometric,
    /// possessive and miscellaneous ones are non-interactive. The long-tail
    /// split is ranked by the usual predicate frequency order.
    pub fn visual_genome() -> Self {
        let objects: Vec<String> = VG_OBJECTS.iter().map(|s| s.to_string()).collect();
        let mut type_map = BTreeMap::new();
        for &p in VG_PREDICATES {
            let ty = if VG_SEMANTIC.contains(&p) {
                RelationType::Interactive
            } else {
                RelationType::NonInteractive
            };
            type_map.insert(p.to_string(), ty);
        }
        let mut partition = BTreeMap::new();
        for (rank, &p) in VG_PREDICATES_BY_FREQUENCY.iter().enumerate() {
            let split = match rank {
                0..=2 => LongTailSplit::Head,
                3..=16 => LongTailSplit::Body,
                _ => LongTailSplit::Tail,
            };
            partition.insert(p.to_string(), split);
        }
        Ontology::new(
            objects,
            VG_PREDICATES.iter().map(|s| s.to_string()).collect(),
            &type_map,
            &partition,
        )
        .expect("builtin table is valid")
    }
}

fn check_unique(names: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::Schema(format!("duplicate {what}: {n}")));
        }
    }
    Ok(())
}

/// Head covers the most frequent classes up to half of all instances
/// (inclusive of the class crossing 50%), tail holds classes under 1% each,
/// body is everything else.
pub fn partition_from_counts(counts: &[u64]) -> Vec<LongTailSplit> {
    let total: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut out = vec![LongTailSplit::Body; counts.len()];
    if total == 0 {
        return out;
    }
    let mut covered = 0u64;
    for &c in &order {
        if 2 * covered >= total {
            if (counts[c] as f64) < 0.01 * total as f64 {
                out[c] = LongTailSplit::Tail;
            }
        } else {
            out[c] = LongTailSplit::Head;
        }
        covered += counts[c];
    }
    out
}

const VG_PREDICATES: &[&str] = &[
    "above", "across", "against", "along", "and", "at", "attached to", "behind",
    "belonging to", "between", "carrying", "covered in", "covering", "eating", "flying in",
    "for", "from", "growing on", "hanging from", "has", "holding", "in", "in front of",
    "laying on", "looking at", "lying on", "made of", "mounted on", "near", "of", "on",
    "on back of", "over", "painted on", "parked on", "part of", "playing", "riding", "says",
    "sitting on", "standing on", "to", "under", "using", "walking in", "walking on",
    "watching", "wearing", "wears", "with",
];

const VG_SEMANTIC: &[&str] = &[
    "carrying", "covered in", "covering", "eating", "flying in", "growing on", "hanging from",
    "holding", "laying on", "looking at", "lying on", "mounted on", "painted on", "parked on",
    "playing", "riding", "says", "sitting on", "standing on", "using", "walking in",
    "walking on", "watching",
];

const VG_PREDICATES_BY_FREQUENCY: &[&str] = &[
    "on", "has", "wearing", "of", "in", "near", "behind", "with", "holding", "above",
    "sitting on", "wears", "under", "riding", "in front of", "standing on", "at", "carrying",
    "attached to", "walking on", "over", "for", "looking at", "watching", "hanging from",
    "laying on", "eating", "and", "belonging to", "parked on", "using", "covering", "between",
    "along", "covered in", "part of", "lying on", "on back of", "to", "walking in",
    "mounted on", "across", "against", "from", "growing on", "painted on", "playing",
    "made of", "says", "flying in",
];

const VG_OBJECTS: &[&str] = &[
    "airplane", "animal", "arm", "bag", "banana", "basket", "beach", "bear", "bed", "bench",
    "bike", "bird", "board", "boat", "book", "boot", "bottle", "bowl", "box", "boy", "branch",
    "building", "bus", "cabinet", "cap", "car", "cat", "chair", "child", "clock", "coat",
    "counter", "cow", "cup", "curtain", "desk", "dog", "door", "drawer", "ear", "elephant",
    "engine", "eye", "face", "fence", "finger", "flag", "flower", "food", "fork", "fruit",
    "giraffe", "girl", "glass", "glove", "guy", "hair", "hand", "handle", "hat", "head",
    "helmet", "hill", "horse", "house", "jacket", "jean", "kid", "kite", "lady", "lamp",
    "laptop", "leaf", "leg", "letter", "light", "logo", "man", "men", "motorcycle", "mountain",
    "mouth", "neck", "nose", "number", "orange", "pant", "paper", "paw", "people", "person",
    "phone", "pillow", "pizza", "plane", "plant", "plate", "player", "pole", "post", "pot",
    "racket", "railing", "rock", "roof", "room", "screen", "seat", "sheep", "shelf", "shirt",
    "shoe", "short", "sidewalk", "sign", "sink", "skateboard", "ski", "skier", "sneaker",
    "snow", "sock", "stand", "street", "surfboard", "table", "tail", "tie", "tile", "tire",
    "toilet", "towel", "tower", "track", "train", "tree", "truck", "trunk", "umbrella", "vase",
    "vegetable", "vehicle", "wave", "wheel", "window", "windshield", "wing", "wire", "woman",
    "zebra",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json(type_map: &str) -> String {
        format!(
            r#"{{"object_classes":["thing"],"relation_classes":["{BACKGROUND_NAME}","r1"],"type_map":{type_map},"longtail_partition":{{"r1":"head"}}}}"#
        )
    }

    #[test]
    fn vg_table_sizes() {
        let o = Ontology::visual_genome();
        assert_eq!(o.num_object_classes(), 150);
        assert_eq!(o.num_relation_classes(), 51);
        assert_eq!(VG_PREDICATES_BY_FREQUENCY.len(), 50);
        let mut sorted: Vec<_> = VG_PREDICATES_BY_FREQUENCY.to_vec();
        sorted.sort();
        let mut expect = VG_PREDICATES.to_vec();
        expect.sort();
        assert_eq!(sorted, expect);
    }

    #[test]
    fn vg_default_types() {
        let o = Ontology::visual_genome();
        let riding = o.relation_index("riding").unwrap();
        let on = o.relation_index("on").unwrap();
        let hanging = o.relation_index("hanging from").unwrap();
        assert_eq!(o.relation_type_of(riding).unwrap(), RelationType::Interactive);
        assert_eq!(o.relation_type_of(hanging).unwrap(), RelationType::Interactive);
        assert_eq!(o.relation_type_of(on).unwrap(), RelationType::NonInteractive);
        assert!(matches!(o.relation_type_of(BACKGROUND), Err(Error::Domain(_))));
    }

    #[test]
    fn minimal_loads() {
        let o = Ontology::from_json(&minimal_json(r#"{"r1":"interactive"}"#)).unwrap();
        assert_eq!(o.num_relation_classes(), 2);
        assert_eq!(o.relation_type_of(1).unwrap(), RelationType::Interactive);
        assert_eq!(o.split_of(1), Some(LongTailSplit::Head));
    }

    #[test]
    fn untyped_relation_is_named() {
        let json = format!(
            r#"{{"object_classes":["a"],"relation_classes":["{BACKGROUND_NAME}","near","on"],"type_map":{{"near":"non_interactive"}}}}"#
        );
        let err = Ontology::from_json(&json).unwrap_err();
        assert_eq!(err.to_string(), "schema error: untyped relation: on");
    }

    #[test]
    fn duplicate_class_rejected() {
        let json = format!(
            r#"{{"object_classes":["a","a"],"relation_classes":["{BACKGROUND_NAME}","r1"],"type_map":{{"r1":"interactive"}}}}"#
        );
        assert!(matches!(Ontology::from_json(&json), Err(Error::Schema(m)) if m.contains("duplicate")));
    }

    #[test]
    fn json_round_trip() {
        let o = Ontology::visual_genome();
        let back = Ontology::from_json(&o.to_json()).unwrap();
        assert_eq!(o, back);
        assert_eq!(o.content_hash(), back.content_hash());
    }

    #[test]
    fn partition_rule() {
        // 60 + 25 + 10 + 4 + 0.5 + 0.5 (scaled by 10)
        let counts = [600, 250, 100, 40, 5, 5];
        let p = partition_from_counts(&counts);
        assert_eq!(
            p,
            vec![
                LongTailSplit::Head,
                LongTailSplit::Body,
                LongTailSplit::Body,
                LongTailSplit::Body,
                LongTailSplit::Tail,
                LongTailSplit::Tail
            ]
        );
    }
}
