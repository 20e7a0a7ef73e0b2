//! Function and variable extraction from ECMAScript source.
//!
//! Each function (declaration, expression or arrow, nested ones included)
//! becomes a [`FunctionRecord`] listing its local variables in order of first
//! appearance, each with a star-shaped [`RelationGraph`] of the non-local
//! member and callee names it touches.

mod analysis;
mod tokenize;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use analysis::ParsedFile;
pub use analysis::fingerprint;
pub(crate) use analysis::{analyze, Site};
pub use tokenize::{tokenize_name, STOPWORDS};

/// How a variable relates to a pivot name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelType {
    FieldAccess,
    MethodCall,
    Argument,
    Assignment,
}

impl RelType {
    pub const ALL: [RelType; 4] =
        [RelType::FieldAccess, RelType::MethodCall, RelType::Argument, RelType::Assignment];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for RelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One `(pivot, relation)` spoke of a relation graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationEdge {
    pub pivot: String,
    pub rel: RelType,
}

impl RelationEdge {
    /// # Panics
    /// If `pivot` is empty or contains whitespace.
    pub fn new(pivot: impl Into<String>, rel: RelType) -> Self {
        let pivot = pivot.into();
        assert!(
            !pivot.is_empty() && !pivot.chars().any(char::is_whitespace),
            "invalid pivot {pivot:?}"
        );
        RelationEdge { pivot, rel }
    }
}

/// A variable and the deduplicated set of edges around it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationGraph {
    pub variable: String,
    pub edges: BTreeSet<RelationEdge>,
}

impl RelationGraph {
    pub fn new(variable: impl Into<String>) -> Self {
        RelationGraph { variable: variable.into(), edges: BTreeSet::new() }
    }

    pub fn with_edges(
        variable: impl Into<String>,
        edges: impl IntoIterator<Item = RelationEdge>,
    ) -> Self {
        RelationGraph { variable: variable.into(), edges: edges.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceLocus {
    pub path: String,
    pub start: u32,
    pub end: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    /// Preorder position of the function within its file. The index
    /// reassigns corpus-wide ids.
    pub function_id: usize,
    pub function_name: String,
    pub name_tokens: Vec<String>,
    pub locus: SourceLocus,
    pub variables: Vec<(String, RelationGraph)>,
}

impl FunctionRecord {
    pub fn graph(&self, variable: &str) -> Option<&RelationGraph> {
        self.variables.iter().find(|(name, _)| name == variable).map(|(_, g)| g)
    }

    pub fn variable_names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|(name, _)| name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}:{line}:{column}: {message}")]
pub struct ParseError {
    pub path: String,
    pub offset: u32,
    /// 1-based.
    pub line: u32,
    /// 1-based, in characters.
    pub column: u32,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(path: &str, source: &str, offset: u32, message: String) -> Self {
        let offset = offset.min(source.len() as u32);
        let mut cut = offset as usize;
        while !source.is_char_boundary(cut) {
            cut -= 1;
        }
        let before = &source[..cut];
        let line = before.matches('\n').count() as u32 + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = before[line_start..].chars().count() as u32 + 1;
        ParseError { path: path.to_string(), offset, line, column, message }
    }
}

/// Extracts every function in `source`.
///
/// ```
/// let fns = name_loom::parse_functions("function g(a){ a.m(); }", "g.js").unwrap();
/// assert_eq!(fns[0].function_name, "g");
/// assert_eq!(fns[0].variables[0].1.len(), 2);
/// ```
pub fn parse_functions(source: &str, path: &str) -> Result<Vec<FunctionRecord>, ParseError> {
    Ok(records(&analyze(source, path)?))
}

/// A local variable: all same-named symbols a function owns.
#[derive(Debug, Clone)]
pub(crate) struct LocalVar {
    pub name: String,
    pub symbols: Vec<usize>,
    pub first: u32,
}

/// Local variables of each function, in first-appearance order.
pub(crate) fn locals(parsed: &ParsedFile) -> Vec<Vec<LocalVar>> {
    let mut out: Vec<Vec<LocalVar>> = vec![Vec::new(); parsed.functions.len()];
    for (id, symbol) in parsed.symbols.iter().enumerate() {
        if !symbol.is_local() {
            continue;
        }
        let vars = &mut out[symbol.owner.unwrap_or_default()];
        let first = symbol.first_offset();
        match vars.iter_mut().find(|v| v.name == symbol.name) {
            Some(var) => {
                var.symbols.push(id);
                var.first = var.first.min(first);
            }
            None => vars.push(LocalVar { name: symbol.name.clone(), symbols: vec![id], first }),
        }
    }
    for vars in &mut out {
        vars.sort_by_key(|v| v.first);
    }
    out
}

pub(crate) fn records(parsed: &ParsedFile) -> Vec<FunctionRecord> {
    let mut symbol_edges: Vec<BTreeSet<&RelationEdge>> = vec![BTreeSet::new(); parsed.symbols.len()];
    for (symbol, edge) in &parsed.edges {
        symbol_edges[*symbol].insert(edge);
    }
    locals(parsed)
        .into_iter()
        .zip(&parsed.functions)
        .enumerate()
        .map(|(function_id, (vars, info))| FunctionRecord {
            function_id,
            function_name: info.name.clone(),
            name_tokens: tokenize_name(&info.name),
            locus: SourceLocus { path: parsed.path.clone(), start: info.start, end: info.end },
            variables: vars
                .into_iter()
                .map(|var| {
                    let edges = var
                        .symbols
                        .iter()
                        .flat_map(|&s| symbol_edges[s].iter().map(|e| (*e).clone()));
                    let graph = RelationGraph::with_edges(var.name.clone(), edges);
                    (var.name, graph)
                })
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use RelType::*;

    fn edges(list: &[(&str, RelType)]) -> BTreeSet<RelationEdge> {
        list.iter().map(|(p, r)| RelationEdge::new(*p, *r)).collect()
    }

    fn only(source: &str) -> FunctionRecord {
        let mut fns = parse_functions(source, "t.js").unwrap();
        assert_eq!(fns.len(), 1);
        fns.remove(0)
    }

    #[test]
    fn empty_function() {
        let f = only("function f(){}");
        assert_eq!(f.function_name, "f");
        assert_eq!(f.name_tokens, ["f"]);
        assert!(f.variables.is_empty());
    }

    #[test]
    fn sibling_functions_keep_their_own_locals() {
        let fns =
            parse_functions("function a(){ var x = 1; x.p; }\nfunction b(x){ x.q(); }", "t.js")
                .unwrap();
        assert_eq!(fns.len(), 2);
        assert_eq!(fns[0].graph("x").unwrap().edges, edges(&[("p", FieldAccess)]));
        assert_eq!(
            fns[1].graph("x").unwrap().edges,
            edges(&[("q", FieldAccess), ("q", MethodCall)])
        );
    }

    #[test]
    fn assignment_and_field_access() {
        let f = only("function h(o, t){ var i = o.getData(t); if(i.length){} }");
        assert_eq!(
            f.graph("i").unwrap().edges,
            edges(&[("getData", Assignment), ("length", FieldAccess)])
        );
        assert_eq!(f.graph("t").unwrap().edges, edges(&[("getData", Argument)]));
        assert_eq!(
            f.graph("o").unwrap().edges,
            edges(&[("getData", FieldAccess), ("getData", MethodCall)])
        );
        assert_eq!(f.variable_names().collect::<Vec<_>>(), ["o", "t", "i"]);
    }

    #[test]
    fn unused_variable_has_no_edges() {
        let f = only("function h(){ var lonely; }");
        assert!(f.graph("lonely").unwrap().is_empty());
    }

    #[test]
    fn bare_callee_and_new_pivots() {
        let f = only("function h(s){ var n = parseInt(s); var d = new Date(n); return d; }");
        assert_eq!(f.graph("n").unwrap().edges, edges(&[("parseInt", Assignment), ("Date", Argument)]));
        assert_eq!(f.graph("s").unwrap().edges, edges(&[("parseInt", Argument)]));
        assert_eq!(f.graph("d").unwrap().edges, edges(&[("Date", Assignment)]));
    }

    #[test]
    fn local_callee_is_not_a_pivot() {
        let f = only("function h(cb, v){ cb(v); }");
        assert!(f.graph("v").unwrap().is_empty());
    }

    #[test]
    fn string_literal_members() {
        let f = only("function h(o){ o['name']; o['has space']; o[k]; o['']; }");
        assert_eq!(f.graph("o").unwrap().edges, edges(&[("name", FieldAccess)]));
    }

    #[test]
    fn chained_members_use_final_property() {
        let f = only("function h(o){ var t = o.a.b.c; o.x.y.z(); }");
        assert_eq!(f.graph("t").unwrap().edges, edges(&[("c", Assignment)]));
        assert_eq!(
            f.graph("o").unwrap().edges,
            edges(&[("a", FieldAccess), ("x", FieldAccess)])
        );
    }

    #[test]
    fn logical_rhs_contributes_both_sides() {
        let f = only("function h(e){ var r = e.clipboardData || e.dataTransfer; }");
        assert_eq!(
            f.graph("r").unwrap().edges,
            edges(&[("clipboardData", Assignment), ("dataTransfer", Assignment)])
        );
    }

    #[test]
    fn closures_feed_the_owner() {
        let fns = parse_functions(
            "function outer(list){ list.forEach(function(item){ list.push(item); }); }",
            "t.js",
        )
        .unwrap();
        assert_eq!(fns.len(), 2);
        assert_eq!(fns[0].variable_names().collect::<Vec<_>>(), ["list"]);
        assert_eq!(
            fns[0].graph("list").unwrap().edges,
            edges(&[
                ("forEach", FieldAccess),
                ("forEach", MethodCall),
                ("push", FieldAccess),
                ("push", MethodCall)
            ])
        );
        assert_eq!(fns[1].graph("item").unwrap().edges, edges(&[("push", Argument)]));
    }

    #[test]
    fn block_scoped_duplicates_merge() {
        let f = only("function h(){ { let x = a.b; } { let x = c.d; } }");
        assert_eq!(f.variables.len(), 1);
        assert_eq!(f.graph("x").unwrap().edges, edges(&[("b", Assignment), ("d", Assignment)]));
    }

    #[test]
    fn derived_function_names() {
        let src = "obj.responseJson = function(x){};\nvar load = function(){};\n\
                   var o = { fetchAll: () => 1, save(){} };\n(function(){})();\n\
                   class K { run(){} }";
        let names: Vec<String> =
            parse_functions(src, "t.js").unwrap().into_iter().map(|f| f.function_name).collect();
        assert_eq!(names, ["responseJson", "load", "fetchAll", "save", "", "run"]);
    }

    #[test]
    fn globals_and_function_names_are_not_variables() {
        let fns = parse_functions("var g = 1; function h(p){ function inner(){} class C {} g = p; }", "t.js")
            .unwrap();
        assert_eq!(fns[0].variable_names().collect::<Vec<_>>(), ["p"]);
    }

    #[test]
    fn catch_parameters_are_variables() {
        let f = only("function h(){ try {} catch (err) { err.message; } }");
        assert_eq!(f.graph("err").unwrap().edges, edges(&[("message", FieldAccess)]));
    }

    #[test]
    fn parse_error_reports_position() {
        let err = parse_functions("var a = 1;\nfunction (", "bad.js").unwrap_err();
        assert_eq!(err.path, "bad.js");
        assert_eq!(err.line, 2);
        assert!(err.column >= 1);
    }

    #[test]
    fn rel_codes_round_trip() {
        for rel in RelType::ALL {
            assert_eq!(RelType::from_code(rel.code()), Some(rel));
        }
        assert_eq!(RelType::from_code(4), None);
    }

    #[test]
    #[should_panic]
    fn whitespace_pivot_rejected() {
        RelationEdge::new("a b", FieldAccess);
    }
}
