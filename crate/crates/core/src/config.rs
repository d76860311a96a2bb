//! Run configuration shared by prediction, execution and evaluation.

use serde::Deserialize;

use crate::typing::dates::{DateGrammar, DateLocale, NumericDatePattern};

/// All tunables of a run. The defaults reproduce the built-in heuristics;
/// every field can be overridden from a TOML config file or CLI flags.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Namespace for minted row and entity IRIs.
    pub entity_namespace: String,
    /// Namespace for column properties.
    pub property_namespace: String,
    /// Namespace for transformation function IRIs and their parameters.
    pub function_namespace: String,
    /// Namespace for the mapping document's own nodes.
    pub mapping_namespace: String,
    /// Columns of at most two distinct strings whose mean length stays below
    /// this threshold are treated as string-encoded booleans.
    pub bool_length_threshold: f64,
    /// Lexicon of strings read as true (matched case-insensitively).
    pub true_lexicon: Vec<String>,
    /// Lexicon of strings read as false.
    pub false_lexicon: Vec<String>,
    /// Preferred day/month order for ambiguous numeric dates.
    pub date_locale: ConfigDateLocale,
    /// Additional numeric date patterns, e.g. `"YYYY/MM/DD"`.
    pub extra_date_patterns: Vec<String>,
    /// Distance budget for the greedy statement matching (0 prunes on the
    /// first inconsistency).
    pub matching_threshold: f64,
    /// Recognize text-only multi-section number formats (like `"Yes";;"No";`)
    /// as boolean displays.
    pub boolean_display: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConfigDateLocale {
    #[default]
    Auto,
    English,
    German,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            entity_namespace: "http://example.org/entity/".into(),
            property_namespace: "http://example.org/property/".into(),
            function_namespace: "http://example.org/function/".into(),
            mapping_namespace: "http://example.org/mapping/".into(),
            bool_length_threshold: 3.5,
            true_lexicon: ["true", "yes", "y", "1", "x", "ja"]
                .map(String::from)
                .to_vec(),
            false_lexicon: ["false", "no", "n", "0", "nein"].map(String::from).to_vec(),
            date_locale: ConfigDateLocale::Auto,
            extra_date_patterns: Vec::new(),
            matching_threshold: 0.0,
            boolean_display: true,
        }
    }
}

impl RunConfig {
    /// Parses and validates a TOML config document.
    pub fn from_toml(text: &str) -> Result<RunConfig, String> {
        let config: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.bool_length_threshold < 0.0 {
            return Err("bool_length_threshold must be non-negative".into());
        }
        if self.matching_threshold < 0.0 {
            return Err("matching_threshold must be non-negative".into());
        }
        for ns in [
            &self.entity_namespace,
            &self.property_namespace,
            &self.function_namespace,
            &self.mapping_namespace,
        ] {
            if !(ns.starts_with("http://") || ns.starts_with("https://") || ns.starts_with("urn:")) {
                return Err(format!("namespace {ns:?} is not an IRI prefix"));
            }
        }
        self.date_grammar()?;
        Ok(())
    }

    /// Builds the configured date recognizer.
    pub fn date_grammar(&self) -> Result<DateGrammar, String> {
        let locale = match self.date_locale {
            ConfigDateLocale::Auto => DateLocale::Auto,
            ConfigDateLocale::English => DateLocale::English,
            ConfigDateLocale::German => DateLocale::German,
        };
        let extra_patterns = self
            .extra_date_patterns
            .iter()
            .map(|p| NumericDatePattern::parse(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DateGrammar { locale, extra_patterns })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let config = RunConfig::default();
        assert!(config.validate().is_ok());
        assert_eq!(config.bool_length_threshold, 3.5);
        assert_eq!(config.matching_threshold, 0.0);
        assert!(config.boolean_display);
    }

    #[test]
    fn toml_overrides_defaults() {
        let config = RunConfig::from_toml(
            r#"
            # comment
            bool_length_threshold = 4.0
            true_lexicon = ["oui", "si"]
            date_locale = "german"
            extra_date_patterns = ["YYYY/MM/DD"]
            matching_threshold = 2.0
            boolean_display = false
            entity_namespace = "http://data.test/e/"
            "#,
        )
        .unwrap();
        assert_eq!(config.bool_length_threshold, 4.0);
        assert_eq!(config.true_lexicon, vec!["oui", "si"]);
        assert_eq!(config.date_locale, ConfigDateLocale::German);
        assert_eq!(config.matching_threshold, 2.0);
        assert!(!config.boolean_display);
        assert_eq!(config.entity_namespace, "http://data.test/e/");
        assert_eq!(config.false_lexicon, RunConfig::default().false_lexicon);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_toml("bool_length_threshold = -1.0").is_err());
        assert!(RunConfig::from_toml("unknown_key = 1").is_err());
        assert!(RunConfig::from_toml("entity_namespace = \"not-an-iri\"").is_err());
        assert!(RunConfig::from_toml("extra_date_patterns = [\"bogus\"]").is_err());
    }
}
