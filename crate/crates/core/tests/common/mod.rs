#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use modelgate_core::model::{AssocDecl, AssocEnd, AttrDecl, ClassDecl, Multiplicity, OpDecl, Param, Upper};
use modelgate_core::{Assessor, Library, ModelUnit, QualityAttribute, Verdict};
use rand::seq::IndexedRandom;
use rand::Rng;

pub struct Fixture {
    pub name: String,
    pub source: String,
    /// `(metric_id, element_path)` pairs the instruments must report, exactly.
    pub expected: BTreeSet<(String, String)>,
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn load(dir: &str) -> Vec<Fixture> {
    let mut out = Vec::new();
    let mut paths: Vec<_> = std::fs::read_dir(fixture_dir().join(dir)).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    for path in paths {
        let source = std::fs::read_to_string(&path).unwrap();
        let expected = source
            .lines()
            .filter_map(|l| l.strip_prefix("// expect: ").or_else(|| l.strip_prefix("// also: ")))
            .map(|rest| {
                let (m, p) = rest.split_once(' ').unwrap();
                (m.to_string(), p.to_string())
            })
            .collect();
        out.push(Fixture { name: path.file_stem().unwrap().to_string_lossy().into_owned(), source, expected });
    }
    out
}

pub fn clean_fixtures() -> Vec<Fixture> {
    load("clean")
}

pub fn seeded_fixtures() -> Vec<Fixture> {
    load("seeded")
}

pub fn media_source() -> String {
    std::fs::read_to_string(fixture_dir().join("clean/media.mdl")).unwrap()
}

pub fn seeded(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(format!("seeded/{name}.mdl"))).unwrap()
}

pub fn temp_assessor() -> (tempfile::TempDir, Assessor) {
    let dir = tempfile::tempdir().unwrap();
    Library::init(dir.path()).unwrap();
    let lib = Library::open(dir.path()).unwrap();
    (dir, Assessor::new(lib))
}

pub const WEAK: [QualityAttribute; 4] = [
    QualityAttribute::SemanticValidity,
    QualityAttribute::Completeness,
    QualityAttribute::PurposeExtraction,
    QualityAttribute::Appeal,
];

pub fn attest_all(a: &Assessor, entry: &str, verdict: Verdict) -> modelgate_core::AssessmentReport {
    let mut last = None;
    for attr in WEAK {
        last = Some(a.record_attestation(entry, attr, verdict, "tester").unwrap().1);
    }
    last.unwrap()
}

const CLASS_NAMES: [&str; 12] =
    ["Song", "SongDAO", "Playlist", "PlaylistImpl", "Album", "Artist", "Track", "Genre", "Item", "", "type", "song_list"];
const MEMBER_NAMES: [&str; 10] = ["title", "length", "name", "play", "stop", "", "new", "item2", "itemCount", "item_count"];
const TYPES: [&str; 8] = ["String", "Int", "Float", "Bool", "Date", "Song", "Playlist", "Ghost"];

fn pick<'a, R: Rng>(rng: &mut R, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).unwrap()
}

pub fn random_multiplicity<R: Rng>(rng: &mut R) -> Multiplicity {
    let lower = rng.random_range(0..3);
    let upper = if rng.random_bool(0.3) { Upper::Unbounded } else { Upper::Bounded(rng.random_range(0..4)) };
    Multiplicity::new(lower, upper)
}

pub fn random_class<R: Rng>(rng: &mut R) -> ClassDecl {
    ClassDecl {
        name: pick(rng, &CLASS_NAMES).to_string(),
        is_abstract: rng.random_bool(0.2),
        supertypes: Vec::new(),
        attributes: Vec::new(),
        operations: Vec::new(),
    }
}

/// Applies one random structural edit. Edits may introduce or remove any
/// kind of defect.
pub fn random_edit<R: Rng>(rng: &mut R, m: &mut ModelUnit) {
    let n = m.classes.len();
    match rng.random_range(0..12) {
        0 if n > 0 => {
            let ci = rng.random_range(0..n);
            m.classes[ci].name = pick(rng, &CLASS_NAMES).to_string();
        }
        1 if n > 0 => {
            m.classes.remove(rng.random_range(0..n));
        }
        2 if n > 0 => {
            let ci = rng.random_range(0..n);
            let attr = AttrDecl {
                name: pick(rng, &MEMBER_NAMES).to_string(),
                type_ref: pick(rng, &TYPES).to_string(),
                multiplicity: rng.random_bool(0.4).then(|| random_multiplicity(rng)),
            };
            m.classes[ci].attributes.push(attr);
        }
        3 if n > 0 => {
            let ci = rng.random_range(0..n);
            m.classes[ci].attributes.pop();
        }
        4 if n > 0 => {
            let ci = rng.random_range(0..n);
            let params = (0..rng.random_range(0..7))
                .map(|i| Param { name: format!("p{}", (b'a' + i as u8) as char), type_ref: pick(rng, &TYPES).to_string() })
                .collect();
            let op = OpDecl {
                name: pick(rng, &MEMBER_NAMES).to_string(),
                params,
                return_type: rng.random_bool(0.5).then(|| pick(rng, &TYPES).to_string()),
            };
            m.classes[ci].operations.push(op);
        }
        5 if n > 0 => {
            let ci = rng.random_range(0..n);
            m.classes[ci].operations.pop();
        }
        6 => {
            let end = |rng: &mut R, m: &ModelUnit| AssocEnd {
                class_ref: if m.classes.is_empty() || rng.random_bool(0.1) {
                    "Ghost".to_string()
                } else {
                    let c = &m.classes[rng.random_range(0..m.classes.len())];
                    if c.name.is_empty() { "Song".to_string() } else { c.name.clone() }
                },
                multiplicity: random_multiplicity(rng),
                role: None,
            };
            let a = AssocDecl { name: None, end_a: end(rng, m), end_b: end(rng, m) };
            m.associations.push(a);
        }
        7 if !m.associations.is_empty() => {
            let i = rng.random_range(0..m.associations.len());
            m.associations.remove(i);
        }
        8 if n > 0 => {
            let ci = rng.random_range(0..n);
            let target = pick(rng, &CLASS_NAMES);
            let sups = &mut m.classes[ci].supertypes;
            if sups.is_empty() && !target.is_empty() && target != "type" {
                sups.push(target.to_string());
            } else {
                sups.clear();
            }
        }
        9 if n > 0 => {
            // purpose churn
            m.purpose.text = ["music", "songs and playlists", "inventory", ""].choose(rng).unwrap().to_string();
        }
        _ => m.classes.push(random_class(rng)),
    }
}

pub fn random_model<R: Rng>(rng: &mut R, edits: usize) -> ModelUnit {
    let mut m = modelgate_core::parse_model(&media_source()).unwrap();
    for _ in 0..edits {
        random_edit(rng, &mut m);
    }
    m
}
