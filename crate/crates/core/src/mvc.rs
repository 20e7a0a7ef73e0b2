//! Multiple-variable context: how often a set of names is declared together
//! in one function, and the averaged score of a joint assignment.
//!
//! Averages are computed by summing the terms in ascending order, which makes
//! every score a function of the multiset of terms alone. An assignment grown
//! one name at a time therefore scores bit-for-bit the same as one scored from
//! scratch.

use std::cell::RefCell;
use std::collections::HashMap;

use itertools::Itertools;

use crate::index::{CorpusIndex, NameId};

/// `|functions declaring all names| / |functions declaring any|`, 0 when no
/// function declares any of them.
pub fn assoc(index: &CorpusIndex, names: &[NameId]) -> f64 {
    let (all, any) = index.count_all(names);
    if any == 0 {
        0.0
    } else {
        all as f64 / any as f64
    }
}

/// Sum of `values` taken in ascending order.
pub fn ordered_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

pub fn ordered_mean(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        ordered_sum(values) / values.len() as f64
    }
}

fn canonical(names: &[NameId]) -> Vec<NameId> {
    let mut names = names.to_vec();
    names.sort();
    names.dedup();
    names
}

/// Mean [`assoc`] over all subsets of size `min(j, |names|)`.
pub fn mc_score(index: &CorpusIndex, names: &[NameId], j: usize) -> f64 {
    AssocCache::new(index).mc_score(names, j)
}

/// `gamma * mc_score + theta * mean(st)` for an assignment of
/// `(name, st_score)` pairs.
pub fn mc_score_combined(
    index: &CorpusIndex,
    assignment: &[(NameId, f64)],
    j: usize,
    gamma: f64,
    theta: f64,
) -> f64 {
    AssocCache::new(index).combined(assignment, j, gamma, theta)
}

/// Memoizes [`assoc`] for one recovery session.
pub struct AssocCache<'a> {
    index: &'a CorpusIndex,
    memo: RefCell<HashMap<Vec<NameId>, f64>>,
}

impl<'a> AssocCache<'a> {
    pub fn new(index: &'a CorpusIndex) -> Self {
        AssocCache { index, memo: RefCell::new(HashMap::new()) }
    }

    pub fn index(&self) -> &'a CorpusIndex {
        self.index
    }

    /// `names` must be sorted and unique.
    fn assoc_sorted(&self, names: &[NameId]) -> f64 {
        if let Some(&v) = self.memo.borrow().get(names) {
            return v;
        }
        let v = assoc(self.index, names);
        self.memo.borrow_mut().insert(names.to_vec(), v);
        v
    }

    pub fn assoc(&self, names: &[NameId]) -> f64 {
        self.assoc_sorted(&canonical(names))
    }

    pub fn mc_score(&self, names: &[NameId], j: usize) -> f64 {
        McState::from_names(self, names, j).mc()
    }

    pub fn combined(&self, assignment: &[(NameId, f64)], j: usize, gamma: f64, theta: f64) -> f64 {
        let names: Vec<NameId> = assignment.iter().map(|a| a.0).collect();
        let mut st: Vec<f64> = assignment.iter().map(|a| a.1).collect();
        gamma * self.mc_score(&names, j) + theta * ordered_mean(&mut st)
    }
}

/// The subset associations of a growing name set, kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct McState {
    j: usize,
    names: Vec<NameId>,
    terms: Vec<f64>,
    sum: f64,
}

impl McState {
    pub fn empty(j: usize) -> Self {
        McState { j: j.max(1), names: Vec::new(), terms: Vec::new(), sum: 0.0 }
    }

    pub fn from_names(cache: &AssocCache, names: &[NameId], j: usize) -> Self {
        let names = canonical(names);
        let size = j.max(1).min(names.len());
        let mut terms: Vec<f64> = if size == 0 {
            Vec::new()
        } else {
            names.iter().copied().combinations(size).map(|s| cache.assoc_sorted(&s)).collect()
        };
        let sum = ordered_sum(&mut terms);
        McState { j: j.max(1), names, terms, sum }
    }

    pub fn names(&self) -> &[NameId] {
        &self.names
    }

    /// Mean subset association; 0 for an empty set.
    pub fn mc(&self) -> f64 {
        if self.terms.is_empty() {
            0.0
        } else {
            self.sum / self.terms.len() as f64
        }
    }

    /// The state after adding `name`. Duplicates leave it unchanged.
    pub fn extended(&self, cache: &AssocCache, name: NameId) -> McState {
        let Err(pos) = self.names.binary_search(&name) else {
            return self.clone();
        };
        let mut names = self.names.clone();
        names.insert(pos, name);
        if names.len() <= self.j {
            return McState::from_names(cache, &names, self.j);
        }
        let mut terms = self.terms.clone();
        for rest in self.names.iter().copied().combinations(self.j - 1) {
            let mut subset = rest;
            let at = subset.binary_search(&name).unwrap_err();
            subset.insert(at, name);
            let v = cache.assoc_sorted(&subset);
            let at = terms.partition_point(|t| t.total_cmp(&v).is_lt());
            terms.insert(at, v);
        }
        let sum = terms.iter().sum();
        McState { j: self.j, names, terms, sum }
    }
}
