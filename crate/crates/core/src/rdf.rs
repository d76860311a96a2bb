//! RDF statements with cell provenance.

use std::fmt;

use crate::cell::column_letter;
use crate::fno::FnValue;
use crate::vocab;

/// An RDF term as it appears in statements: a resource IRI (blank nodes are
/// carried as `_:name` resources) or a literal with optional datatype.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Resource(String),
    Literal {
        lexical: String,
        /// Full datatype IRI; `None` is a plain string literal.
        datatype: Option<String>,
    },
}

impl Term {
    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }

    pub fn from_fn_value(value: FnValue) -> Term {
        match value {
            FnValue::Resource(iri) => Term::Resource(iri),
            FnValue::Literal { lexical, datatype } => {
                // xsd:string is the implicit literal type
                let datatype = datatype.filter(|d| d != vocab::XSD_STRING);
                Term::Literal { lexical, datatype }
            }
        }
    }
}

/// A subject-predicate-object triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Statement {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Statement {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Statement {
        Statement { subject, predicate, object }
    }
}

/// The spreadsheet cell a statement was extracted from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellCoord {
    pub sheet: String,
    pub column: u32,
    pub row: u32,
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}{}", self.sheet, column_letter(self.column), self.row + 1)
    }
}

/// A statement tagged with its originating cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProvenancedStatement {
    pub statement: Statement,
    pub cell: CellCoord,
}
