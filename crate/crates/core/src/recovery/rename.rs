//! Scope-aware renaming of local bindings by span edits.

use std::collections::HashSet;

use crate::extraction::{ParsedFile, Site};

const RESERVED: &[&str] = &[
    "arguments", "await", "break", "case", "catch", "class", "const", "continue", "debugger",
    "default", "delete", "do", "else", "enum", "eval", "export", "extends", "false", "finally",
    "for", "function", "if", "implements", "import", "in", "instanceof", "interface", "let",
    "new", "null", "package", "private", "protected", "public", "return", "static", "super",
    "switch", "this", "throw", "true", "try", "typeof", "undefined", "var", "void", "while",
    "with", "yield", "NaN", "Infinity",
];

pub(crate) fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

/// Tracks the current name of every symbol in a file and validates renames
/// against shadowing and capture.
pub(crate) struct Renamer<'p> {
    file: &'p ParsedFile,
    current: Vec<String>,
}

impl<'p> Renamer<'p> {
    pub fn new(file: &'p ParsedFile) -> Self {
        Renamer { file, current: file.symbols.iter().map(|s| s.name.clone()).collect() }
    }

    #[cfg(test)]
    pub fn current(&self, symbol: usize) -> &str {
        &self.current[symbol]
    }

    fn within(&self, site: &Site, scope: u32) -> bool {
        self.file.is_scope_within(site.scope, scope)
    }

    /// Whether `symbol` can take `name` without changing what any identifier
    /// in the file resolves to.
    pub fn can_rename(&self, symbol: usize, name: &str) -> bool {
        if !is_identifier(name) || is_reserved(name) {
            return false;
        }
        if self.current[symbol] == name {
            return true;
        }
        let info = &self.file.symbols[symbol];
        if !info.renamable {
            return false;
        }
        let scope = info.scope;
        for (other, t) in self.file.symbols.iter().enumerate() {
            if other == symbol || self.current[other] != name {
                continue;
            }
            if t.scope == scope {
                return false;
            }
            // `t` nested inside our scope would capture our uses below it.
            if self.file.is_scope_within(t.scope, scope)
                && info.sites().any(|s| self.within(s, t.scope))
            {
                return false;
            }
            // We would capture uses of an outer `t` inside our scope.
            if self.file.is_scope_within(scope, t.scope) && t.sites().any(|s| self.within(s, scope)) {
                return false;
            }
        }
        !self.file.unresolved.iter().any(|u| u.name == name && self.within(&u.site, scope))
    }

    pub fn rename(&mut self, symbol: usize, name: &str) {
        self.current[symbol] = name.to_string();
    }

    /// Renames all `symbols` together if each rename is valid; otherwise
    /// changes nothing.
    pub fn try_rename_all(&mut self, symbols: &[usize], name: &str) -> bool {
        let saved: Vec<String> = symbols.iter().map(|&s| self.current[s].clone()).collect();
        for &s in symbols {
            if !self.can_rename(s, name) {
                for (&s, old) in symbols.iter().zip(saved) {
                    self.current[s] = old;
                }
                return false;
            }
            self.rename(s, name);
        }
        true
    }

    /// The source text with every rename applied.
    pub fn apply(&self) -> String {
        let source = self.file.source();
        let mut edits: Vec<(u32, u32, String)> = Vec::new();
        for (id, info) in self.file.symbols.iter().enumerate() {
            let new = &self.current[id];
            if *new == info.name {
                continue;
            }
            for site in info.sites() {
                let text = if self.file.shorthand.contains(&site.start) {
                    format!("{}: {new}", &source[site.start as usize..site.end as usize])
                } else {
                    new.clone()
                };
                edits.push((site.start, site.end, text));
            }
        }
        edits.sort_by_key(|e| e.0);
        let mut seen = HashSet::new();
        let mut out = String::with_capacity(source.len());
        let mut pos = 0usize;
        for (start, end, text) in edits {
            if !seen.insert(start) {
                continue;
            }
            out.push_str(&source[pos..start as usize]);
            out.push_str(&text);
            pos = end as usize;
        }
        out.push_str(&source[pos..]);
        out
    }
}
