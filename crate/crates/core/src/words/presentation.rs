use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Word, WordError};

/// Finite presentation `⟨X | R⟩`. Relators are kept cyclically reduced and
/// trivial relators are dropped on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self, WordError> {
        if generators.is_empty() {
            return Err(WordError::ZeroRank);
        }
        let mut seen = HashSet::new();
        for g in &generators {
            if g.is_empty() || g.contains(char::is_whitespace) || g.contains('^') {
                return Err(WordError::Malformed(format!("bad generator name `{g}`")));
            }
            if !seen.insert(g.as_str()) {
                return Err(WordError::DuplicateName(g.clone()));
            }
        }
        let rank = generators.len();
        let mut rels = Vec::with_capacity(relators.len());
        for r in relators {
            if r.rank() != rank {
                return Err(WordError::RankMismatch {
                    left: rank,
                    right: r.rank(),
                });
            }
            let r = r.cyclically_reduced();
            if !r.is_identity() {
                rels.push(r);
            }
        }
        Ok(Presentation {
            generators,
            relators: rels,
        })
    }

    /// Parses relator strings against the generator names.
    pub fn from_strings<S: AsRef<str>>(
        generators: &[S],
        relators: &[S],
    ) -> Result<Self, WordError> {
        let names: Vec<String> = generators.iter().map(|g| g.as_ref().to_string()).collect();
        let rels = relators
            .iter()
            .map(|r| Word::parse_named(r.as_ref(), &names))
            .collect::<Result<Vec<_>, _>>()?;
        Presentation::new(names, rels)
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn relator_strings(&self) -> Vec<String> {
        self.relators
            .iter()
            .map(|r| r.display_named(&self.generators))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("presentation serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Serialize, Deserialize)]
struct PresentationFile {
    generators: Vec<String>,
    relators: Vec<String>,
}

impl Serialize for Presentation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PresentationFile {
            generators: self.generators.clone(),
            relators: self.relator_strings(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Presentation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = PresentationFile::deserialize(d)?;
        Presentation::from_strings(&f.generators, &f.relators).map_err(serde::de::Error::custom)
    }
}
