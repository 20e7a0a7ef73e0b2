//! Seeded, scope-aware alpha-renaming of local variables.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::extraction::{analyze, locals, ParseError};
use crate::recovery::rename::{is_reserved, Renamer};

/// Original names of one minified function's variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthFunction {
    /// Preorder position of the function in its file.
    pub index: usize,
    pub name: String,
    /// `(minified, original)` pairs in first-appearance order.
    pub variables: Vec<(String, String)>,
}

/// Ground truth for one minified file.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub functions: Vec<TruthFunction>,
}

#[derive(Debug, Clone)]
pub struct Minified {
    pub source: String,
    pub truth: GroundTruth,
    /// The file uses direct `eval` or `with` and was left unchanged.
    pub dynamic_scope: bool,
}

/// Short names in the order `a`..`z`, `aa`, `ab`, ...
fn short_name(mut n: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (n % 26) as u8);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Renames every local variable to a fresh short name.
///
/// Each variable gets a name unused anywhere else in the file, assigned in a
/// seeded random order. Globals, properties and function or class names are
/// untouched.
///
/// ```
/// use name_loom::evaluation::alpha_minify;
/// let out = alpha_minify("function f(first, second){ return first.x + second; }", "f.js", 7).unwrap();
/// assert_eq!(out.truth.functions[0].variables.len(), 2);
/// assert!(!out.source.contains("first"));
/// ```
pub fn alpha_minify(source: &str, path: &str, seed: u64) -> Result<Minified, ParseError> {
    let parsed = analyze(source, path)?;
    let groups = locals(&parsed);
    let mut truth = GroundTruth {
        functions: parsed
            .functions
            .iter()
            .zip(&groups)
            .enumerate()
            .map(|(index, (f, vars))| TruthFunction {
                index,
                name: f.name.clone(),
                variables: vars.iter().map(|v| (v.name.clone(), v.name.clone())).collect(),
            })
            .collect(),
    };
    if parsed.dynamic_scope {
        return Ok(Minified { source: source.to_string(), truth, dynamic_scope: true });
    }

    let taken: HashSet<&str> = parsed
        .symbols
        .iter()
        .map(|s| s.name.as_str())
        .chain(parsed.unresolved.iter().map(|u| u.name.as_str()))
        .collect();
    let mut order: Vec<(usize, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(f, vars)| (0..vars.len()).map(move |v| (f, v)))
        .collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut renamer = Renamer::new(&parsed);
    let mut counter = 0;
    for (f, v) in order {
        let name = loop {
            let candidate = short_name(counter);
            counter += 1;
            if !taken.contains(candidate.as_str()) && !is_reserved(&candidate) {
                break candidate;
            }
        };
        if renamer.try_rename_all(&groups[f][v].symbols, &name) {
            truth.functions[f].variables[v].0 = name;
        }
    }
    Ok(Minified { source: renamer.apply(), truth, dynamic_scope: false })
}
