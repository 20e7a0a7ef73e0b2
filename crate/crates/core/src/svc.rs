//! Single-variable context: how well a stored usage of a name matches the
//! relation graph of the variable being recovered.

use serde::Serialize;

use crate::extraction::RelationGraph;
use crate::index::{CorpusIndex, NameId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SvcCandidate {
    pub name: NameId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchError {
    #[error("variable {0:?} has no relation edges")]
    EmptyQuery(String),
}

/// Fraction of `query`'s edges that also occur in `stored`.
///
/// Not symmetric: only the query's edges form the denominator.
///
/// ```
/// use name_loom::{RelationEdge, RelationGraph, RelType::*};
/// use name_loom::svc::match_score;
/// let q = RelationGraph::with_edges("v", [RelationEdge::new("a", FieldAccess), RelationEdge::new("b", MethodCall)]);
/// let s = RelationGraph::with_edges("w", [RelationEdge::new("a", FieldAccess)]);
/// assert_eq!(match_score(&q, &s), Ok(0.5));
/// ```
pub fn match_score(query: &RelationGraph, stored: &RelationGraph) -> Result<f64, MatchError> {
    if query.is_empty() {
        return Err(MatchError::EmptyQuery(query.variable.clone()));
    }
    let found = query.edges.intersection(&stored.edges).count();
    Ok(found as f64 / query.len() as f64)
}

/// Every name with a stored usage scoring at least `phi`, scored by its best
/// usage. Sorted by score descending, then name ascending.
pub fn single_var_candidates(
    query: &RelationGraph,
    index: &CorpusIndex,
    phi: f64,
) -> Result<Vec<SvcCandidate>, MatchError> {
    if query.is_empty() {
        return Err(MatchError::EmptyQuery(query.variable.clone()));
    }
    let total = query.len() as f64;
    let mut out: Vec<SvcCandidate> = index
        .candidates_by_edges(query)
        .into_iter()
        .filter_map(|(name, usages)| {
            let best = usages.iter().map(|&(_, matched)| matched).max()?;
            let score = best as f64 / total;
            (score >= phi).then_some(SvcCandidate { name, score })
        })
        .collect();
    sort_by_score(&mut out, index, |c| (c.name, c.score));
    Ok(out)
}

/// Sorts descending by score with ties broken by ascending name string.
pub(crate) fn sort_by_score<T>(
    items: &mut [T],
    index: &CorpusIndex,
    key: impl Fn(&T) -> (NameId, f64),
) {
    items.sort_by(|a, b| {
        let (na, sa) = key(a);
        let (nb, sb) = key(b);
        sb.total_cmp(&sa).then_with(|| index.name(na).cmp(index.name(nb)))
    });
}
