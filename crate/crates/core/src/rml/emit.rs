//! Materializes prediction trees as a mapping document.

use crate::cell::{column_letter, Table};
use crate::config::RunConfig;
use crate::fno::{Accessor, ExtractionCall, FunctionCall, Gazetteer, TermType};
use crate::templates::{spec, PredictionNode, PredictionTree, TemplateId};
use crate::vocab;

use super::{
    slugify, EntityDecl, MappingDocument, ObjectMap, PredicateObjectMap, Reference, TriplesMap,
};

/// Builds the mapping for one table: a subject map minting one IRI per row
/// and, per prediction node, a predicate-object map. Chained nodes of one
/// column share the column predicate; formatting groups get suffixed
/// predicates (`{slug}_b`, `{slug}_color_ff0000`, `{slug}_plain`). Entity
/// gazetteers surface both as function parameters and as label triples in
/// the companion entity section.
pub fn emit_mapping(
    table: &Table,
    predictions: &[(u32, PredictionTree)],
    config: &RunConfig,
) -> MappingDocument {
    let mut used_slugs: Vec<String> = Vec::new();
    let mut maps: Vec<PredicateObjectMap> = Vec::new();
    let mut entities: Vec<EntityDecl> = Vec::new();

    for (column, tree) in predictions {
        let base_slug = column_slug(table, *column, &mut used_slugs);
        let Some(root) = &tree.root else {
            continue;
        };
        emit_node_chain(root, *column, &base_slug, config, &mut maps, &mut entities);
    }

    entities.sort_by(|a, b| (&a.label, &a.iri).cmp(&(&b.label, &b.iri)));
    entities.dedup();

    MappingDocument {
        triples_maps: vec![TriplesMap {
            name: triples_map_name(table.sheet.name()),
            source: table.sheet.name().to_string(),
            subject_template: format!("{}row_{{row}}", config.entity_namespace),
            predicate_object_maps: maps,
        }],
        entities,
    }
}

fn triples_map_name(sheet_name: &str) -> String {
    let slug = slugify(sheet_name);
    if slug.is_empty() {
        "sheet".to_string()
    } else {
        slug
    }
}

/// Header slug, disambiguated with a numeric suffix on collision; headerless
/// columns fall back to their letter.
fn column_slug(table: &Table, column: u32, used: &mut Vec<String>) -> String {
    let base = table
        .header_text(column)
        .map(|t| slugify(&t))
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| format!("column_{}", column_letter(column)));
    let mut candidate = base.clone();
    let mut suffix = 1;
    while used.contains(&candidate) {
        suffix += 1;
        candidate = format!("{base}_{suffix}");
    }
    used.push(candidate.clone());
    candidate
}

fn emit_node_chain(
    node: &PredictionNode,
    column: u32,
    base_slug: &str,
    config: &RunConfig,
    maps: &mut Vec<PredicateObjectMap>,
    entities: &mut Vec<EntityDecl>,
) {
    if node.choice.template == TemplateId::FormattedText {
        emit_formatted_node(node, column, base_slug, config, maps, entities);
    } else {
        maps.push(PredicateObjectMap {
            predicate: format!("{}{}", config.property_namespace, base_slug),
            object_map: heuristic_object_map(node, column, entities),
        });
    }
    for child in &node.children {
        emit_node_chain(child, column, base_slug, config, maps, entities);
    }
}

fn heuristic_object_map(
    node: &PredictionNode,
    column: u32,
    entities: &mut Vec<EntityDecl>,
) -> ObjectMap {
    let template_spec = spec(node.choice.template);
    let function = node.choice.effective_function();
    collect_entities(&function, entities);
    ObjectMap {
        reference: Reference { column, accessor: template_spec.reference },
        term_type: template_spec.term_type,
        datatype: node.choice.effective_datatype().map(|d| d.to_string()),
        function,
    }
}

/// Formatted-text nodes emit one map per virtual-column prediction node,
/// wrapping the group's extraction function around the inner call.
fn emit_formatted_node(
    node: &PredictionNode,
    column: u32,
    base_slug: &str,
    config: &RunConfig,
    maps: &mut Vec<PredicateObjectMap>,
    entities: &mut Vec<EntityDecl>,
) {
    for virtual_prediction in &node.virtuals {
        let predicate = format!(
            "{}{}_{}",
            config.property_namespace,
            base_slug,
            virtual_prediction.key.suffix()
        );
        let selector = virtual_prediction.key.selector();
        let mut inner_node = virtual_prediction.tree.root.as_ref();
        while let Some(current) = inner_node {
            let inner_spec = spec(current.choice.template);
            let inner_function = current.choice.effective_function();
            collect_entities(&inner_function, entities);
            let datatype = match inner_spec.term_type {
                TermType::Iri => None,
                TermType::Literal => Some(
                    current
                        .choice
                        .effective_datatype()
                        .unwrap_or(vocab::XSD_STRING)
                        .to_string(),
                ),
            };
            maps.push(PredicateObjectMap {
                predicate: predicate.clone(),
                object_map: ObjectMap {
                    reference: Reference { column, accessor: Accessor::ValueRichText },
                    term_type: inner_spec.term_type,
                    datatype: datatype.clone(),
                    function: Some(FunctionCall::Extract(ExtractionCall {
                        selector: selector.clone(),
                        inner: inner_function.map(Box::new),
                        inner_term_type: inner_spec.term_type,
                        inner_datatype: datatype,
                    })),
                },
            });
            inner_node = current.children.first();
        }
    }
}

fn collect_entities(function: &Option<FunctionCall>, entities: &mut Vec<EntityDecl>) {
    fn walk(call: &FunctionCall, entities: &mut Vec<EntityDecl>) {
        match call {
            FunctionCall::EntityLinking { gazetteer } => append_gazetteer(gazetteer, entities),
            FunctionCall::Extract(extraction) => {
                if let Some(inner) = &extraction.inner {
                    walk(inner, entities);
                }
            }
            _ => {}
        }
    }
    if let Some(call) = function {
        walk(call, entities);
    }
}

fn append_gazetteer(gazetteer: &Gazetteer, entities: &mut Vec<EntityDecl>) {
    for (label, iri) in &gazetteer.entries {
        entities.push(EntityDecl { iri: iri.clone(), label: label.clone() });
    }
}
