use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SubtaskCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Output,
    Object,
    Scalar,
    Temp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    #[serde(rename = "type")]
    pub semantic_type: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    pub category: SubtaskCategory,
    pub description: String,
    pub returns: String,
    pub template: String,
    pub parameters: Vec<ParamSpec>,
}

impl FunctionSpec {
    pub fn params_of(&self, kind: ParamKind) -> impl Iterator<Item = &ParamSpec> {
        self.parameters.iter().filter(move |p| p.kind == kind)
    }

    pub fn output_count(&self) -> usize {
        self.params_of(ParamKind::Output).count()
    }

    pub fn object_count(&self) -> usize {
        self.params_of(ParamKind::Object).count()
    }

    /// Placeholder names used in the template, in order of appearance.
    pub fn placeholders(&self) -> Vec<String> {
        static PLACEHOLDER: LazyLock<Regex> =
            LazyLock::new(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").unwrap());
        let mut seen = Vec::new();
        for c in PLACEHOLDER.captures_iter(&self.template) {
            let name = c[1].to_string();
            if !seen.contains(&name) {
                seen.push(name);
            }
        }
        seen
    }
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("registry document is malformed: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("function {function}: {message}")]
    Invalid { function: String, message: String },
}

#[derive(Deserialize)]
struct RegistryFile {
    function: Vec<FunctionSpec>,
}

/// Read-only function library.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Registry {
    functions: Vec<FunctionSpec>,
}

const BUNDLED: &str = include_str!("../../data/registry.toml");

impl Registry {
    pub fn from_toml(text: &str) -> Result<Registry, RegistryError> {
        let file: RegistryFile = toml::from_str(text)?;
        let mut names = HashSet::new();
        for f in &file.function {
            let invalid = |message: String| RegistryError::Invalid {
                function: f.name.clone(),
                message,
            };
            if !names.insert(f.name.clone()) {
                return Err(invalid("duplicate function name".into()));
            }
            let declared: HashSet<&str> = f.parameters.iter().map(|p| p.name.as_str()).collect();
            if let Some(p) = f
                .placeholders()
                .iter()
                .find(|p| !declared.contains(p.as_str()))
            {
                return Err(invalid(format!(
                    "template placeholder {{{p}}} is not a parameter"
                )));
            }
            if f.output_count() == 0 {
                return Err(invalid("at least one output parameter is required".into()));
            }
        }
        Ok(Registry {
            functions: file.function,
        })
    }

    /// The library shipped with the crate.
    pub fn bundled() -> Registry {
        Registry::from_toml(BUNDLED).expect("bundled registry is valid")
    }

    /// Process-wide copy of [`Registry::bundled`].
    pub fn shared() -> &'static Registry {
        static SHARED: LazyLock<Registry> = LazyLock::new(Registry::bundled);
        &SHARED
    }

    pub fn functions(&self) -> &[FunctionSpec] {
        &self.functions
    }

    pub fn get(&self, name: &str) -> Option<&FunctionSpec> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn find(&self, category: SubtaskCategory, name: &str) -> Option<&FunctionSpec> {
        self.get(name).filter(|f| f.category == category)
    }

    pub fn in_category(&self, category: SubtaskCategory) -> impl Iterator<Item = &FunctionSpec> {
        self.functions
            .iter()
            .filter(move |f| f.category == category)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::bundled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_registry_covers_every_category() {
        let r = Registry::bundled();
        for c in SubtaskCategory::ALL {
            assert!(r.in_category(c).count() >= 6, "{c:?}");
        }
        assert!(r.functions().len() >= 30);
    }

    #[test]
    fn placeholders_must_be_declared() {
        let bad = r#"
[[function]]
name = "f"
category = "numerical_operations"
description = ""
returns = "scalar"
template = "?{out} = {nope};"
parameters = [{ name = "out", kind = "output", type = "scalar" }]
"#;
        let err = Registry::from_toml(bad).unwrap_err();
        assert!(err.to_string().contains("{nope}"));
    }
}
