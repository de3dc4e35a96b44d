//! The on-disk substitution description (TOML).
//!
//! ```toml
//! name = "random-walk"
//! [alphabet]
//! stride = 1
//! residue = 0
//! [[rules]]
//! region = { kind = "all" }
//! template = [-1, 1]
//! ```
//!
//! Regions are `all`, `le` / `ge` (with `bound`) and `set` (with `letters`).
//! `exceptions` give absolute images and take precedence over rules. Unknown
//! keys are rejected.

use serde::{Deserialize, Serialize};

use crate::alphabet::{Letter, Word};
use crate::error::SubstError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstitutionDef {
    pub name: String,
    pub alphabet: AlphabetDef,
    #[serde(default)]
    pub rules: Vec<RuleDef>,
    #[serde(default)]
    pub exceptions: Vec<ExceptionDef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetDef {
    pub stride: i64,
    #[serde(default)]
    pub residue: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDef {
    pub region: RegionDef,
    pub template: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionDef {
    All,
    Le { bound: i64 },
    Ge { bound: i64 },
    Set { letters: Vec<Letter> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExceptionDef {
    pub letter: Letter,
    pub image: Word,
}

impl SubstitutionDef {
    /// Parses the TOML text; diagnostics carry the line/column and field path.
    pub fn from_toml(text: &str) -> Result<Self, SubstError> {
        toml::from_str(text).map_err(|e| SubstError::Schema(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("substitution definitions always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_region_kinds() {
        let text = r#"
name = "t"
alphabet = { stride = 1 }
[[rules]]
region = { kind = "le", bound = -1 }
template = [0, 1]
[[rules]]
region = { kind = "ge", bound = 1 }
template = [-1, 0]
[[rules]]
region = { kind = "set", letters = [0] }
template = [0, 0]
"#;
        let def = SubstitutionDef::from_toml(text).unwrap();
        assert_eq!(def.rules.len(), 3);
        assert_eq!(def.rules[2].region, RegionDef::Set { letters: vec![0] });
        let again = SubstitutionDef::from_toml(&def.to_toml()).unwrap();
        assert_eq!(def, again);
    }

    #[test]
    fn rejects_unknown_keys_with_location() {
        let text = "name = \"t\"\nalphabet = { stride = 1 }\ncolour = 3\n";
        let err = SubstitutionDef::from_toml(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("colour"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn rejects_unknown_region_kind() {
        let text = "name = \"t\"\nalphabet = { stride = 1 }\n[[rules]]\nregion = { kind = \"odd\" }\ntemplate = [0, 1]\n";
        assert!(SubstitutionDef::from_toml(text).is_err());
    }
}
