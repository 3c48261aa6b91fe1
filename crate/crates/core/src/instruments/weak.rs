use std::collections::BTreeSet;

use super::{Finding, Thresholds};
use crate::model::{paths, split_identifier, ModelUnit, PurposeSpec};

pub const STOPWORDS: [&str; 13] = ["a", "an", "the", "of", "for", "and", "or", "to", "in", "on", "with", "is", "are"];

/// Keywords the purpose commits to: the explicit list, or else the words of
/// the purpose text minus stopwords.
pub fn purpose_keywords(p: &PurposeSpec) -> BTreeSet<String> {
    if !p.keywords.is_empty() {
        return p.keywords.iter().cloned().collect();
    }
    p.text
        .split(|c: char| !c.is_alphanumeric() && c != '_')
        .flat_map(split_identifier)
        .filter(|w| !STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Fraction of purpose keywords that occur among the name tokens of the
/// model's classes, attributes and operations. 1.0 when there are no keywords.
pub fn purpose_overlap(p: &PurposeSpec, m: &ModelUnit) -> f64 {
    let keywords = purpose_keywords(p);
    if keywords.is_empty() {
        return 1.0;
    }
    let names: BTreeSet<String> = m
        .classes
        .iter()
        .flat_map(|c| {
            std::iter::once(c.name.as_str())
                .chain(c.attributes.iter().map(|a| a.name.as_str()))
                .chain(c.operations.iter().map(|o| o.name.as_str()))
        })
        .flat_map(split_identifier)
        .collect();
    keywords.intersection(&names).count() as f64 / keywords.len() as f64
}

/// Advisory only: weak findings never decide an attribute's status.
pub fn check_weak_heuristics(m: &ModelUnit, t: &Thresholds) -> Vec<Finding> {
    let overlap = purpose_overlap(&m.purpose, m);
    if overlap >= t.purpose_min_overlap {
        return Vec::new();
    }
    let keywords = purpose_keywords(&m.purpose);
    vec![Finding::new(
        "purpose-mismatch",
        paths::model(m),
        format!(
            "only {:.0}% of the purpose keywords ({}) appear in model names (expected at least {:.0}%)",
            overlap * 100.0,
            keywords.into_iter().collect::<Vec<_>>().join(", "),
            t.purpose_min_overlap * 100.0
        ),
        "check that the purpose describes this model, then attest purpose extraction",
    )]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use proptest::prelude::*;

    /// Set intersection by nested loops over plain vectors.
    fn brute_overlap(keywords: &[&str], names: &[&str]) -> f64 {
        let mut tokens: Vec<String> = Vec::new();
        for n in names {
            for t in split_identifier(n) {
                tokens.push(t);
            }
        }
        let mut hits = 0;
        for k in keywords {
            if tokens.iter().any(|t| t == k) {
                hits += 1;
            }
        }
        hits as f64 / keywords.len() as f64
    }

    #[test]
    fn two_of_three_keywords() {
        let m = parse_model(r#"model M { purpose "p" keywords playlist, song, media class Playlist {} class Song {} }"#).unwrap();
        let want = brute_overlap(&["playlist", "song", "media"], &["Playlist", "Song"]);
        assert!((want - 2.0 / 3.0).abs() < 1e-12);
        assert!((purpose_overlap(&m.purpose, &m) - want).abs() < 1e-12);
        assert!(check_weak_heuristics(&m, &Thresholds::default()).is_empty());
    }

    #[test]
    fn empty_keywords_are_vacuous() {
        let m = parse_model(r#"model M { purpose "the of and" class X {} }"#).unwrap();
        assert_eq!(purpose_overlap(&m.purpose, &m), 1.0);
    }

    #[test]
    fn no_overlap() {
        let m = parse_model(r#"model M { purpose "p" keywords inventory class Song {} class Playlist {} }"#).unwrap();
        assert_eq!(purpose_overlap(&m.purpose, &m), 0.0);
        let f = check_weak_heuristics(&m, &Thresholds::default());
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].metric_id, "purpose-mismatch");
        assert_eq!(f[0].attribute, super::super::QualityAttribute::PurposeExtraction);
    }

    #[test]
    fn all_keywords_present() {
        let m = parse_model(r#"model M { purpose "p" keywords song, title class Song { attr songTitle: String } }"#).unwrap();
        assert_eq!(purpose_overlap(&m.purpose, &m), 1.0);
        assert!(check_weak_heuristics(&m, &Thresholds::default()).is_empty());
    }

    #[test]
    fn keywords_from_text() {
        let p = PurposeSpec { text: "Manage the playlists of a MusicLibrary".into(), keywords: vec![] };
        let k: Vec<String> = purpose_keywords(&p).into_iter().collect();
        assert_eq!(k, vec!["library", "manage", "music", "playlists"]);
    }

    proptest! {
        #[test]
        fn overlap_is_a_fraction(text in "\\PC{0,40}", names in proptest::collection::vec("[A-Za-z_]{0,10}", 0..6)) {
            let mut src = format!("model M {{ purpose {text:?} ");
            for n in &names {
                src.push_str(&format!("class {n:?} {{}} "));
            }
            src.push('}');
            if let Ok(m) = parse_model(&src) {
                let s = purpose_overlap(&m.purpose, &m);
                prop_assert!((0.0..=1.0).contains(&s));
            }
        }
    }
}
