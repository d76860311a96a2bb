//! Mapping documents: emission from prediction trees, Turtle form, execution.
//!
//! A [`MappingDocument`] holds one triples map per table (logical source,
//! row-template subject map, predicate-object maps) plus the companion graph
//! of presumed entities used by entity-linking maps. Reference strings use
//! the `{column letter}.{accessor}` dialect over the sheet named by the
//! logical source; the iterator is always `row`.

mod emit;
mod execute;
mod nquads;
mod turtle;

pub use emit::emit_mapping;
pub use execute::{execute, ExecuteError};
pub use nquads::{parse_nquads, serialize_nquads, NQuadsError};
pub use turtle::{parse_turtle, serialize_turtle, TurtleError};

use crate::cell::{column_index, column_letter};
use crate::fno::{Accessor, FunctionCall, TermType};

/// A complete mapping document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MappingDocument {
    pub triples_maps: Vec<TriplesMap>,
    /// Presumed entities (label triples) backing entity-linking maps.
    pub entities: Vec<EntityDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityDecl {
    pub iri: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriplesMap {
    /// Local node name within the mapping namespace.
    pub name: String,
    /// Sheet the logical source iterates over, one entity row at a time.
    pub source: String,
    /// Subject IRI template; `{row}` expands to the 1-based row number.
    pub subject_template: String,
    pub predicate_object_maps: Vec<PredicateObjectMap>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateObjectMap {
    pub predicate: String,
    pub object_map: ObjectMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMap {
    pub reference: Reference,
    pub term_type: TermType,
    pub datatype: Option<String>,
    pub function: Option<FunctionCall>,
}

/// A cell reference: spreadsheet column letter plus accessor, rendered as
/// `A.valueInt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub column: u32,
    pub accessor: Accessor,
}

impl Reference {
    pub fn render(&self) -> String {
        format!("{}.{}", column_letter(self.column), self.accessor.name())
    }

    pub fn parse(text: &str) -> Option<Reference> {
        let (letters, accessor) = text.split_once('.')?;
        Some(Reference {
            column: column_index(letters)?,
            accessor: Accessor::from_name(accessor)?,
        })
    }
}

/// Lowercase identifier from free text: alphanumerics survive, everything
/// else collapses to single underscores.
pub fn slugify(text: &str) -> String {
    let mut slug = String::new();
    let mut pending_sep = false;
    for c in text.trim().chars() {
        if c.is_alphanumeric() {
            if pending_sep && !slug.is_empty() {
                slug.push('_');
            }
            pending_sep = false;
            for lower in c.to_lowercase() {
                slug.push(lower);
            }
        } else {
            pending_sep = true;
        }
    }
    slug
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_round_trip() {
        let reference = Reference { column: 27, accessor: Accessor::ValueRichText };
        assert_eq!(reference.render(), "AB.valueRichText");
        assert_eq!(Reference::parse("AB.valueRichText"), Some(reference));
        assert_eq!(Reference::parse("notaref"), None);
        assert_eq!(Reference::parse("A.bogus"), None);
        assert_eq!(Reference::parse("a1.value"), None);
    }

    #[test]
    fn slugs() {
        assert_eq!(slugify("Release Date"), "release_date");
        assert_eq!(slugify("  Editors / Reviewers "), "editors_reviewers");
        assert_eq!(slugify("Größe"), "größe");
        assert_eq!(slugify("§§§"), "");
        assert_eq!(slugify("already_fine"), "already_fine");
    }
}
