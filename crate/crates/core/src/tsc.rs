//! Task-specific context: how strongly a variable name is tied to functions
//! carrying a given name, or sharing one of its tokens.

use serde::{Deserialize, Serialize};

use crate::extraction::tokenize_name;
use crate::index::{CorpusIndex, FnMatch, NameId};
use crate::svc::sort_by_score;

/// Which task score recovery uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TscMode {
    #[default]
    #[serde(alias = "full")]
    FullName,
    #[serde(alias = "token")]
    Tokenized,
}

fn jaccard((both, a, b): (usize, usize, usize)) -> f64 {
    let denom = a + b - both;
    if denom == 0 {
        0.0
    } else {
        both as f64 / denom as f64
    }
}

/// `N(vn, fn) / (N(vn) + N(fn) - N(vn, fn))` over functions named `fn_name`.
pub fn task_score(index: &CorpusIndex, name: NameId, fn_name: &str) -> f64 {
    jaccard(index.count_name_with_function_name(name, fn_name, FnMatch::FullName))
}

/// The same ratio computed against functions containing a single token.
pub fn token_score(index: &CorpusIndex, name: NameId, token: &str) -> f64 {
    jaccard(index.count_name_with_function_name(name, token, FnMatch::Token))
}

/// Best [`token_score`] over the tokens of `fn_name`; 0 without tokens.
pub fn task_score_tokenized(index: &CorpusIndex, name: NameId, fn_name: &str) -> f64 {
    tokenize_name(fn_name)
        .iter()
        .map(|t| token_score(index, name, t))
        .fold(0.0, f64::max)
}

pub fn score(index: &CorpusIndex, name: NameId, fn_name: &str, mode: TscMode) -> f64 {
    match mode {
        TscMode::FullName => task_score(index, name, fn_name),
        TscMode::Tokenized => task_score_tokenized(index, name, fn_name),
    }
}

/// Every name with a positive task score for `fn_name`, best first (ties by
/// name), at most `limit` of them.
pub fn task_candidates(
    index: &CorpusIndex,
    fn_name: &str,
    mode: TscMode,
    limit: usize,
) -> Vec<(NameId, f64)> {
    if fn_name.is_empty() {
        return Vec::new();
    }
    let mut pool = match mode {
        TscMode::FullName => index.names_in_functions(fn_name, FnMatch::FullName),
        TscMode::Tokenized => tokenize_name(fn_name)
            .iter()
            .flat_map(|t| index.names_in_functions(t, FnMatch::Token))
            .collect(),
    }
    .into_iter()
    .map(|name| (name, score(index, name, fn_name, mode)))
    .filter(|&(_, s)| s > 0.0)
    .collect::<Vec<_>>();
    sort_by_score(&mut pool, index, |&(n, s)| (n, s));
    pool.truncate(limit);
    pool
}
