//! Adapter from the oxc AST and semantic model to owned, parser-independent
//! tables. Nothing outside this module touches oxc types.

use std::collections::{BTreeSet, HashMap, HashSet};

use oxc_allocator::Allocator;
use oxc_ast::ast::{
    Argument, AssignmentOperator, AssignmentTarget, BindingPattern, ChainElement, Expression,
    MemberExpression, PropertyKey,
};
use oxc_ast::AstKind;
use oxc_parser::Parser;
use oxc_semantic::{AstNode, Scoping, SemanticBuilder, SymbolFlags};
use oxc_span::{GetSpan, SourceType};

use super::{ParseError, RelType, RelationEdge};

/// One textual occurrence of an identifier and the scope it sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Site {
    pub start: u32,
    pub end: u32,
    pub scope: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct SymbolInfo {
    pub name: String,
    pub scope: u32,
    /// var/let/const, formal parameters and catch parameters.
    pub renamable: bool,
    /// Innermost function whose scope declares this symbol.
    pub owner: Option<usize>,
    pub decls: Vec<Site>,
    pub refs: Vec<Site>,
}

impl SymbolInfo {
    pub fn sites(&self) -> impl Iterator<Item = &Site> {
        self.decls.iter().chain(self.refs.iter())
    }

    pub fn first_offset(&self) -> u32 {
        self.sites().map(|s| s.start).min().unwrap_or(u32::MAX)
    }

    /// A local is a renamable binding owned by some function.
    pub fn is_local(&self) -> bool {
        self.renamable && self.owner.is_some()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct UnresolvedRef {
    pub name: String,
    pub site: Site,
}

#[derive(Debug, Clone)]
pub(crate) struct FunctionInfo {
    pub start: u32,
    pub end: u32,
    pub name: String,
}

/// Owned scope/symbol tables for one parsed file.
#[derive(Debug, Clone)]
pub struct ParsedFile {
    pub(crate) source: String,
    pub(crate) path: String,
    pub(crate) scope_parents: Vec<Option<u32>>,
    pub(crate) symbols: Vec<SymbolInfo>,
    pub(crate) unresolved: Vec<UnresolvedRef>,
    /// Start offsets of identifiers written in shorthand property form
    /// (`{a}`), which need a `key: ` prefix when renamed.
    pub(crate) shorthand: HashSet<u32>,
    pub(crate) functions: Vec<FunctionInfo>,
    /// Relation edges keyed by the symbol they attach to.
    pub(crate) edges: Vec<(usize, RelationEdge)>,
    /// Direct `eval` or `with` anywhere in the file.
    pub(crate) dynamic_scope: bool,
}

impl ParsedFile {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub(crate) fn is_scope_within(&self, mut scope: u32, ancestor: u32) -> bool {
        loop {
            if scope == ancestor {
                return true;
            }
            match self.scope_parents[scope as usize] {
                Some(parent) => scope = parent,
                None => return false,
            }
        }
    }
}

pub(crate) fn analyze(source: &str, path: &str) -> Result<ParsedFile, ParseError> {
    let allocator = Allocator::default();
    let parsed = Parser::new(&allocator, source, SourceType::unambiguous()).parse();
    if let Some(diag) = parsed.diagnostics.first() {
        let offset = diag
            .labels
            .first()
            .map(|label| label.offset())
            .unwrap_or(0);
        return Err(ParseError::new(path, source, offset, diag.message.to_string()));
    }
    let program = parsed.program;
    let built = SemanticBuilder::new().with_build_nodes(true).build(&program);
    let semantic = built.semantic;
    let scoping = semantic.scoping();
    let nodes = semantic.nodes();

    let scope_parents: Vec<Option<u32>> = (0..scoping.scopes_len())
        .map(|i| {
            scoping
                .scope_parent_id(oxc_semantic::ScopeId::from_usize(i))
                .map(|p| p.index() as u32)
        })
        .collect();

    let mut functions = Vec::new();
    let mut function_of_scope = vec![None; scope_parents.len()];
    for node in nodes.iter() {
        let (span, scope) = match node.kind() {
            AstKind::Function(func) => (func.span, func.scope_id.get()),
            AstKind::ArrowFunctionExpression(arrow) => (arrow.span, arrow.scope_id.get()),
            _ => continue,
        };
        let Some(scope) = scope else { continue };
        function_of_scope[scope.index()] = Some(functions.len());
        functions.push(FunctionInfo {
            start: span.start,
            end: span.end,
            name: derive_function_name(node, &semantic),
        });
    }

    let mut symbols: Vec<SymbolInfo> = scoping
        .symbol_ids()
        .map(|id| {
            let flags = scoping.symbol_flags(id);
            let scope = scoping.symbol_scope_id(id).index() as u32;
            let renamable = flags.intersects(
                SymbolFlags::Variable | SymbolFlags::ConstVariable | SymbolFlags::CatchVariable,
            ) && !flags.intersects(SymbolFlags::Function | SymbolFlags::Class | SymbolFlags::Import);
            let owner = owning_function(scope, &scope_parents, &function_of_scope);
            SymbolInfo {
                name: scoping.symbol_name(id).to_string(),
                scope,
                renamable,
                owner,
                decls: Vec::new(),
                refs: Vec::new(),
            }
        })
        .collect();

    let mut unresolved = Vec::new();
    let mut shorthand = HashSet::new();
    let mut dynamic_scope = false;
    for node in nodes.iter() {
        let scope = node.scope_id().index() as u32;
        match node.kind() {
            AstKind::BindingIdentifier(ident) => {
                if let Some(symbol) = ident.symbol_id.get() {
                    symbols[symbol.index()].decls.push(Site {
                        start: ident.span.start,
                        end: ident.span.end,
                        scope,
                    });
                }
            }
            AstKind::IdentifierReference(ident) => {
                let site = Site { start: ident.span.start, end: ident.span.end, scope };
                match resolve(scoping, ident) {
                    Some(symbol) => symbols[symbol].refs.push(site),
                    None => {
                        if ident.name == "eval" {
                            dynamic_scope = true;
                        }
                        unresolved.push(UnresolvedRef { name: ident.name.to_string(), site });
                    }
                }
            }
            AstKind::WithStatement(_) => dynamic_scope = true,
            AstKind::ObjectProperty(prop) if prop.shorthand => {
                shorthand.insert(prop.value.span().start);
            }
            AstKind::AssignmentTargetPropertyIdentifier(prop) => {
                shorthand.insert(prop.binding.span.start);
            }
            AstKind::BindingProperty(prop) if prop.shorthand => {
                let target = match &prop.value {
                    BindingPattern::AssignmentPattern(pattern) => pattern.left.span(),
                    other => other.span(),
                };
                shorthand.insert(target.start);
            }
            _ => {}
        }
    }

    let mut collector = EdgeCollector { scoping, symbols: &symbols, source, edges: Vec::new() };
    for node in nodes.iter() {
        collector.visit(node);
    }
    let edges = collector.edges;

    Ok(ParsedFile {
        source: source.to_string(),
        path: path.to_string(),
        scope_parents,
        symbols,
        unresolved,
        shorthand,
        functions,
        edges,
        dynamic_scope,
    })
}

/// Preorder sequence of AST node kinds in which local bindings are replaced
/// by first-occurrence labels. Two sources have equal fingerprints iff their
/// ASTs are identical up to a consistent renaming of locals.
pub fn fingerprint(source: &str, path: &str) -> Result<Vec<String>, ParseError> {
    let parsed = analyze(source, path)?;
    let allocator = Allocator::default();
    let ret = Parser::new(&allocator, source, SourceType::unambiguous()).parse();
    let built = SemanticBuilder::new().with_build_nodes(true).build(&ret.program);
    let semantic = built.semantic;
    let scoping = semantic.scoping();
    let mut labels: HashMap<usize, usize> = HashMap::new();
    let mut label = |symbol: Option<usize>, name: &str| -> String {
        match symbol.filter(|&s| parsed.symbols[s].is_local()) {
            Some(s) => {
                let next = labels.len();
                format!("#{}", labels.entry(s).or_insert(next))
            }
            None => name.to_string(),
        }
    };
    let mut out = Vec::new();
    for node in semantic.nodes().iter() {
        let kind = node.kind();
        let text = match kind {
            AstKind::BindingIdentifier(id) => label(id.symbol_id.get().map(|s| s.index()), &id.name),
            AstKind::IdentifierReference(id) => label(resolve(scoping, id), &id.name),
            AstKind::IdentifierName(id) => id.name.to_string(),
            AstKind::StringLiteral(_)
            | AstKind::NumericLiteral(_)
            | AstKind::BooleanLiteral(_)
            | AstKind::RegExpLiteral(_)
            | AstKind::BigIntLiteral(_)
            | AstKind::TemplateElement(_) => {
                let span = kind.span();
                source[span.start as usize..span.end as usize].to_string()
            }
            _ => String::new(),
        };
        out.push(format!("{:?} {text}", kind.ty()));
    }
    Ok(out)
}

fn owning_function(
    mut scope: u32,
    parents: &[Option<u32>],
    function_of_scope: &[Option<usize>],
) -> Option<usize> {
    loop {
        if let Some(f) = function_of_scope[scope as usize] {
            return Some(f);
        }
        scope = parents[scope as usize]?;
    }
}

fn resolve(scoping: &Scoping, ident: &oxc_ast::ast::IdentifierReference) -> Option<usize> {
    let reference = ident.reference_id.get()?;
    scoping.get_reference(reference).symbol_id().map(|s| s.index())
}

fn derive_function_name(node: &AstNode, semantic: &oxc_semantic::Semantic) -> String {
    if let AstKind::Function(func) = node.kind() {
        if let Some(id) = &func.id {
            return id.name.to_string();
        }
    }
    let nodes = semantic.nodes();
    for parent in nodes.ancestors(node.id()) {
        match parent.kind() {
            AstKind::ParenthesizedExpression(_) => continue,
            AstKind::VariableDeclarator(decl) => {
                return match &decl.id {
                    BindingPattern::BindingIdentifier(id) => id.name.to_string(),
                    _ => String::new(),
                };
            }
            AstKind::AssignmentExpression(assign) => {
                return match &assign.left {
                    AssignmentTarget::AssignmentTargetIdentifier(id) => id.name.to_string(),
                    target => target
                        .as_member_expression()
                        .and_then(|m| m.static_property_name())
                        .map(|s| s.to_string())
                        .unwrap_or_default(),
                };
            }
            AstKind::ObjectProperty(prop) => return property_key_name(&prop.key),
            AstKind::MethodDefinition(method) => return property_key_name(&method.key),
            AstKind::PropertyDefinition(prop) => return property_key_name(&prop.key),
            _ => return String::new(),
        }
    }
    String::new()
}

fn property_key_name(key: &PropertyKey) -> String {
    match key {
        PropertyKey::StaticIdentifier(id) => id.name.to_string(),
        PropertyKey::StringLiteral(lit) => lit.value.to_string(),
        _ => String::new(),
    }
}

struct EdgeCollector<'s> {
    scoping: &'s Scoping,
    symbols: &'s [SymbolInfo],
    source: &'s str,
    edges: Vec<(usize, RelationEdge)>,
}

impl EdgeCollector<'_> {
    fn visit(&mut self, node: &AstNode) {
        match node.kind() {
            AstKind::StaticMemberExpression(member) => {
                if let Some(symbol) = self.local_of(&member.object) {
                    self.push(symbol, member.property.name.as_str(), RelType::FieldAccess);
                }
            }
            AstKind::ComputedMemberExpression(member) => {
                if let Some(symbol) = self.local_of(&member.object) {
                    if let Some(pivot) = self.literal_pivot(&member.expression) {
                        self.push(symbol, &pivot, RelType::FieldAccess);
                    }
                }
            }
            AstKind::CallExpression(call) => {
                if let Some(member) = call.callee.get_inner_expression().as_member_expression() {
                    if let (Some(symbol), Some(pivot)) =
                        (self.local_of(member.object()), self.member_pivot(member))
                    {
                        self.push(symbol, &pivot, RelType::MethodCall);
                    }
                }
                if let Some(pivot) = self.callee_pivot(&call.callee) {
                    self.arguments(&call.arguments, &pivot);
                }
            }
            AstKind::NewExpression(call) => {
                if let Some(pivot) = self.callee_pivot(&call.callee) {
                    self.arguments(&call.arguments, &pivot);
                }
            }
            AstKind::AssignmentExpression(assign) => {
                if assign.operator != AssignmentOperator::Assign {
                    return;
                }
                if let AssignmentTarget::AssignmentTargetIdentifier(id) = &assign.left {
                    if let Some(symbol) = self.local_ident(id) {
                        self.assignment(symbol, &assign.right);
                    }
                }
            }
            AstKind::VariableDeclarator(decl) => {
                let (BindingPattern::BindingIdentifier(id), Some(init)) = (&decl.id, &decl.init)
                else {
                    return;
                };
                if let Some(symbol) = id.symbol_id.get().map(|s| s.index()) {
                    if self.symbols[symbol].is_local() {
                        self.assignment(symbol, init);
                    }
                }
            }
            _ => {}
        }
    }

    fn push(&mut self, symbol: usize, pivot: &str, rel: RelType) {
        if pivot.is_empty() || pivot.chars().any(char::is_whitespace) {
            return;
        }
        self.edges.push((symbol, RelationEdge::new(pivot, rel)));
    }

    fn local_ident(&self, ident: &oxc_ast::ast::IdentifierReference) -> Option<usize> {
        resolve(self.scoping, ident).filter(|&s| self.symbols[s].is_local())
    }

    fn local_of(&self, expr: &Expression) -> Option<usize> {
        match expr.get_inner_expression() {
            Expression::Identifier(ident) => self.local_ident(ident),
            _ => None,
        }
    }

    /// String-literal member keys count only when they survive verbatim in
    /// the source and contain no whitespace.
    fn literal_pivot(&self, expr: &Expression) -> Option<String> {
        match expr.get_inner_expression() {
            Expression::StringLiteral(lit) => {
                let value = lit.value.as_str();
                let raw = &self.source[lit.span.start as usize..lit.span.end as usize];
                (raw.contains(value) && !value.is_empty()).then(|| value.to_string())
            }
            _ => None,
        }
    }

    fn member_pivot(&self, member: &MemberExpression) -> Option<String> {
        match member {
            MemberExpression::StaticMemberExpression(m) => Some(m.property.name.to_string()),
            MemberExpression::ComputedMemberExpression(m) => self.literal_pivot(&m.expression),
            MemberExpression::PrivateFieldExpression(_) => None,
        }
    }

    /// The pivot a call contributes: the final member name, or a bare callee
    /// that is not itself a renamable local.
    fn callee_pivot(&self, callee: &Expression) -> Option<String> {
        let callee = callee.get_inner_expression();
        if let Some(member) = callee.as_member_expression() {
            return self.member_pivot(member);
        }
        match callee {
            Expression::Identifier(ident) => match resolve(self.scoping, ident) {
                Some(s) if self.symbols[s].is_local() => None,
                _ => Some(ident.name.to_string()),
            },
            _ => None,
        }
    }

    fn arguments(&mut self, args: &[Argument], pivot: &str) {
        for arg in args {
            if let Some(expr) = arg.as_expression() {
                if let Some(symbol) = self.local_of(expr) {
                    self.push(symbol, pivot, RelType::Argument);
                }
            }
        }
    }

    fn assignment(&mut self, symbol: usize, rhs: &Expression) {
        let mut pivots = BTreeSet::new();
        self.value_pivots(rhs, &mut pivots);
        for pivot in pivots {
            self.push(symbol, &pivot, RelType::Assignment);
        }
    }

    fn value_pivots(&self, expr: &Expression, out: &mut BTreeSet<String>) {
        let expr = expr.get_inner_expression();
        if let Some(member) = expr.as_member_expression() {
            out.extend(self.member_pivot(member));
            return;
        }
        match expr {
            Expression::CallExpression(call) => out.extend(self.callee_pivot(&call.callee)),
            Expression::NewExpression(call) => out.extend(self.callee_pivot(&call.callee)),
            Expression::LogicalExpression(logical) => {
                self.value_pivots(&logical.left, out);
                self.value_pivots(&logical.right, out);
            }
            Expression::ConditionalExpression(cond) => {
                self.value_pivots(&cond.consequent, out);
                self.value_pivots(&cond.alternate, out);
            }
            Expression::SequenceExpression(seq) => {
                if let Some(last) = seq.expressions.last() {
                    self.value_pivots(last, out);
                }
            }
            Expression::AwaitExpression(await_expr) => self.value_pivots(&await_expr.argument, out),
            Expression::ChainExpression(chain) => match &chain.expression {
                ChainElement::CallExpression(call) => out.extend(self.callee_pivot(&call.callee)),
                element => {
                    if let Some(member) = element.as_member_expression() {
                        out.extend(self.member_pivot(member));
                    }
                }
            },
            _ => {}
        }
    }
}
