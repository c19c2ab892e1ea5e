//! Registry of discourse acts, their families and eligibility flags.
//!
//! The ontology is data: a TOML file with a `version` and a list of
//! `[[acts]]`. A default file ships with the crate.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Id of the sentinel act used when no act fits.
pub const NONE_ACT: &str = "NONE";

pub const DEFAULT_ONTOLOGY: &str = include_str!("../data/ontology.toml");

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("ontology document is malformed: {0}")]
    Malformed(String),
    #[error("duplicate act id {0:?}")]
    DuplicateActId(String),
    #[error("act {id:?} has unknown family {family:?}")]
    UnknownFamily { id: String, family: String },
    #[error("act id {id:?} does not embed its family code {family}")]
    FamilyMismatch { id: String, family: Family },
    #[error("ontology has no NONE sentinel act")]
    MissingNoneSentinel,
    #[error("ontology has no act in family {0}")]
    EmptyFamily(Family),
    #[error("unknown act id {0:?}")]
    UnknownActId(String),
    #[error("cannot read ontology file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    AQ,
    CQ,
    SI,
    RQ,
    NO,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::AQ, Family::CQ, Family::SI, Family::RQ, Family::NO];

    pub fn code(self) -> &'static str {
        match self {
            Family::AQ => "AQ",
            Family::CQ => "CQ",
            Family::SI => "SI",
            Family::RQ => "RQ",
            Family::NO => "NO",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Family::AQ => "Answer the question",
            Family::CQ => "Comment on the question",
            Family::SI => "Seek information from the asker",
            Family::RQ => "Redirect the question",
            Family::NO => "No-op",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Family {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Family::ALL.iter().copied().find(|f| f.code() == s.trim()).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscourseAct {
    pub id: String,
    /// `None` only for the sentinel.
    pub family: Option<Family>,
    pub display_name: String,
    pub interpretation_eligible: bool,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    acts: Vec<DiscourseAct>,
    version: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct OntologyDoc {
    version: String,
    acts: Vec<ActEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ActEntry {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    display_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interpretation_eligible: Option<bool>,
    #[serde(default)]
    description: String,
}

impl Ontology {
    pub fn load(document: &str) -> Result<Self, OntologyError> {
        let doc: OntologyDoc =
            toml::from_str(document).map_err(|e| OntologyError::Malformed(e.to_string()))?;
        let mut seen = HashSet::new();
        let mut acts = Vec::with_capacity(doc.acts.len());
        for entry in doc.acts {
            if !seen.insert(entry.id.clone()) {
                return Err(OntologyError::DuplicateActId(entry.id));
            }
            let family = if entry.id == NONE_ACT {
                None
            } else {
                let code = entry.family.clone().unwrap_or_default();
                let family = code.parse::<Family>().map_err(|_| OntologyError::UnknownFamily {
                    id: entry.id.clone(),
                    family: code,
                })?;
                if !entry.id.starts_with(&format!("action_{}_", family.code())) {
                    return Err(OntologyError::FamilyMismatch {
                        id: entry.id,
                        family,
                    });
                }
                Some(family)
            };
            // Unmarked acts default to eligible only in the answer family.
            let eligible = match family {
                None => false,
                Some(f) => entry.interpretation_eligible.unwrap_or(f == Family::AQ),
            };
            acts.push(DiscourseAct {
                id: entry.id,
                family,
                display_name: entry.display_name,
                interpretation_eligible: eligible,
                description: entry.description,
            });
        }
        if !seen.contains(NONE_ACT) {
            return Err(OntologyError::MissingNoneSentinel);
        }
        for family in Family::ALL {
            if !acts.iter().any(|a| a.family == Some(family)) {
                return Err(OntologyError::EmptyFamily(family));
            }
        }
        Ok(Ontology {
            acts,
            version: doc.version,
        })
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self, OntologyError> {
        Self::load(&std::fs::read_to_string(path)?)
    }

    /// The ontology shipped with the crate.
    pub fn default_ontology() -> Self {
        Self::load(DEFAULT_ONTOLOGY).expect("bundled ontology is valid")
    }

    pub fn to_toml(&self) -> String {
        let doc = OntologyDoc {
            version: self.version.clone(),
            acts: self
                .acts
                .iter()
                .map(|a| ActEntry {
                    id: a.id.clone(),
                    family: a.family.map(|f| f.code().to_string()),
                    display_name: a.display_name.clone(),
                    interpretation_eligible: Some(a.interpretation_eligible),
                    description: a.description.clone(),
                })
                .collect(),
        };
        toml::to_string(&doc).expect("ontology serializes")
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn acts(&self) -> &[DiscourseAct] {
        &self.acts
    }

    /// Acts other than the sentinel.
    pub fn proper_acts(&self) -> impl Iterator<Item = &DiscourseAct> {
        self.acts.iter().filter(|a| a.id != NONE_ACT)
    }

    pub fn get(&self, act_id: &str) -> Option<&DiscourseAct> {
        self.acts.iter().find(|a| a.id == act_id)
    }

    pub fn contains(&self, act_id: &str) -> bool {
        self.get(act_id).is_some()
    }

    pub fn is_eligible(&self, act_id: &str) -> Result<bool, OntologyError> {
        if act_id == NONE_ACT {
            return Ok(false);
        }
        self.get(act_id)
            .map(|a| a.interpretation_eligible)
            .ok_or_else(|| OntologyError::UnknownActId(act_id.to_string()))
    }

    /// Family of an act; `None` for the sentinel or unknown ids.
    pub fn family_of(&self, act_id: &str) -> Option<Family> {
        self.get(act_id).and_then(|a| a.family)
    }

    /// Family code for an act, `NONE` for the sentinel and unknown ids.
    pub fn family_token(&self, act_id: &str) -> String {
        self.family_of(act_id)
            .map(|f| f.code().to_string())
            .unwrap_or_else(|| NONE_ACT.to_string())
    }

    /// Rendering of the ontology embedded into the act-tagging prompt.
    pub fn render_for_prompt(&self) -> String {
        let mut out = String::new();
        for family in Family::ALL {
            out.push_str(&format!("{} ({})\n", family.description(), family.code()));
            for act in self.acts.iter().filter(|a| a.family == Some(family)) {
                out.push_str(&format!("- {}: {}", act.id, act.display_name));
                if !act.description.is_empty() {
                    out.push_str(&format!(". {}", act.description));
                }
                out.push('\n');
            }
        }
        out.trim_end().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_file_loads() {
        let o = Ontology::default_ontology();
        let assert = o.get("action_AQ_assert_answer").unwrap();
        assert_eq!(assert.family, Some(Family::AQ));
        assert!(assert.interpretation_eligible);
        let reject = o.get("action_CQ_reject_presupposition").unwrap();
        assert_eq!(reject.family, Some(Family::CQ));
        assert!(!reject.interpretation_eligible);
    }

    #[test]
    fn eligibility() {
        let o = Ontology::default_ontology();
        assert!(!o.is_eligible("action_CQ_reject_presupposition").unwrap());
        assert!(o.is_eligible("action_SI_clarification").unwrap());
        assert!(!o.is_eligible(NONE_ACT).unwrap());
        assert!(matches!(
            o.is_eligible("action_AQ_nope"),
            Err(OntologyError::UnknownActId(_))
        ));
    }

    const MINIMAL: &str = r#"
version = "t"
[[acts]]
id = "action_AQ_a"
family = "AQ"
display_name = "A"
[[acts]]
id = "action_CQ_c"
family = "CQ"
display_name = "C"
[[acts]]
id = "action_SI_s"
family = "SI"
display_name = "S"
[[acts]]
id = "action_RQ_r"
family = "RQ"
display_name = "R"
[[acts]]
id = "action_NO_n"
family = "NO"
display_name = "N"
"#;

    #[test]
    fn defaults_for_unmarked_flags() {
        let o = Ontology::load(&format!("{MINIMAL}[[acts]]\nid = \"NONE\"\ndisplay_name = \"None\"\n")).unwrap();
        assert!(o.is_eligible("action_AQ_a").unwrap());
        assert!(!o.is_eligible("action_NO_n").unwrap());
        assert!(!o.is_eligible("action_CQ_c").unwrap());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            Ontology::load(MINIMAL),
            Err(OntologyError::MissingNoneSentinel)
        ));
        let dup = format!(
            "{MINIMAL}[[acts]]\nid = \"action_AQ_a\"\nfamily = \"AQ\"\ndisplay_name = \"again\"\n"
        );
        assert!(matches!(Ontology::load(&dup), Err(OntologyError::DuplicateActId(id)) if id == "action_AQ_a"));
        let bad_family = format!(
            "{MINIMAL}[[acts]]\nid = \"action_ZZ_x\"\nfamily = \"ZZ\"\ndisplay_name = \"x\"\n"
        );
        assert!(matches!(
            Ontology::load(&bad_family),
            Err(OntologyError::UnknownFamily { .. })
        ));
        let mismatch = format!(
            "{MINIMAL}[[acts]]\nid = \"action_AQ_x\"\nfamily = \"CQ\"\ndisplay_name = \"x\"\n"
        );
        assert!(matches!(
            Ontology::load(&mismatch),
            Err(OntologyError::FamilyMismatch { .. })
        ));
    }

    #[test]
    fn toml_round_trip() {
        let o = Ontology::default_ontology();
        let again = Ontology::load(&o.to_toml()).unwrap();
        assert_eq!(o, again);
        assert_eq!(again.to_toml(), o.to_toml());
    }

    #[test]
    fn prompt_rendering_lists_every_act() {
        let o = Ontology::default_ontology();
        let text = o.render_for_prompt();
        for act in o.proper_acts() {
            assert!(text.contains(&act.id));
        }
    }
}
