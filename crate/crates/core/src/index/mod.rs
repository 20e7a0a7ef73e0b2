//! The corpus index: interned names, stored relation graphs and the posting
//! lists every context scorer reads.
//!
//! An index is built once from a directory of `.js` files (or from records
//! handed to [`IndexBuilder`] directly), then is immutable. Co-occurrence
//! counts are answered at query time by intersecting posting lists.

pub mod postings;
mod store;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::extraction::{
    parse_functions, tokenize_name, FunctionRecord, ParseError, RelType, RelationEdge,
    RelationGraph, STOPWORDS,
};
pub use store::{LoadError, SaveError, FORMAT_MAJOR, FORMAT_MINOR};

/// Interned variable name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NameId(pub u32);

/// A relation edge with its pivot interned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    pub pivot: u32,
    pub rel: RelType,
}

/// One usage of a name: the function it occurs in and its edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredGraph {
    pub function: u32,
    /// Sorted, unique.
    pub edges: Vec<EdgeKey>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionEntry {
    pub name: String,
    pub file: u32,
    pub start: u32,
    pub end: u32,
    /// Sorted, unique.
    pub names: Vec<NameId>,
}

/// How a function name is matched in task-context queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FnMatch {
    #[default]
    FullName,
    Token,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexCounts {
    pub files: usize,
    pub skipped_files: usize,
    pub duplicate_files: usize,
    pub functions: usize,
    pub names: usize,
    pub pivots: usize,
    pub graphs: usize,
    pub edges: usize,
    pub mean_edges_per_graph: f64,
    pub mean_graphs_per_function: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMeta {
    pub format: String,
    pub version_major: u16,
    pub version_minor: u16,
    pub tool_version: String,
    pub built_at: u64,
    pub dedup: String,
    pub stopwords: Vec<String>,
    pub counts: IndexCounts,
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("corpus directory not found: {0}")]
    MissingDir(PathBuf),
    #[error("empty corpus: no parseable .js files")]
    EmptyCorpus,
    #[error("cannot read corpus directory {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusIndex {
    pub(crate) names: Vec<String>,
    pub(crate) name_lookup: HashMap<String, NameId>,
    pub(crate) pivots: Vec<String>,
    pub(crate) pivot_lookup: HashMap<String, u32>,
    pub(crate) files: Vec<String>,
    pub(crate) functions: Vec<FunctionEntry>,
    pub(crate) graphs: Vec<Vec<StoredGraph>>,
    pub(crate) edge_postings: BTreeMap<EdgeKey, Vec<(NameId, u32)>>,
    pub(crate) name_postings: Vec<Vec<u32>>,
    pub(crate) fn_name_postings: BTreeMap<String, Vec<u32>>,
    pub(crate) token_postings: BTreeMap<String, Vec<u32>>,
    pub(crate) meta: IndexMeta,
}

const EMPTY: &[u32] = &[];

impl CorpusIndex {
    pub fn meta(&self) -> &IndexMeta {
        &self.meta
    }

    pub fn name_id(&self, name: &str) -> Option<NameId> {
        self.name_lookup.get(name).copied()
    }

    /// # Panics
    /// If `id` was not issued by this index.
    pub fn name(&self, id: NameId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn name_count(&self) -> usize {
        self.names.len()
    }

    pub fn name_ids(&self) -> impl Iterator<Item = NameId> {
        (0..self.names.len() as u32).map(NameId)
    }

    pub fn function_count(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[FunctionEntry] {
        &self.functions
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn pivot(&self, id: u32) -> &str {
        &self.pivots[id as usize]
    }

    pub fn edge_key(&self, edge: &RelationEdge) -> Option<EdgeKey> {
        let pivot = *self.pivot_lookup.get(&edge.pivot)?;
        Some(EdgeKey { pivot, rel: edge.rel })
    }

    /// Every stored usage of `name`, ordinal = position.
    pub fn graphs(&self, name: NameId) -> &[StoredGraph] {
        self.graphs.get(name.0 as usize).map_or(&[], Vec::as_slice)
    }

    /// A stored graph with its pivots resolved back to strings.
    pub fn relation_graph(&self, name: NameId, ordinal: u32) -> Option<RelationGraph> {
        let stored = self.graphs(name).get(ordinal as usize)?;
        Some(RelationGraph::with_edges(
            self.name(name),
            stored.edges.iter().map(|e| RelationEdge::new(self.pivot(e.pivot), e.rel)),
        ))
    }

    pub fn edge_postings(&self, edge: &RelationEdge) -> &[(NameId, u32)] {
        self.edge_key(edge)
            .and_then(|k| self.edge_postings.get(&k))
            .map_or(&[], Vec::as_slice)
    }

    /// Functions whose body declares `name`.
    pub fn name_postings(&self, name: NameId) -> &[u32] {
        self.name_postings.get(name.0 as usize).map_or(EMPTY, Vec::as_slice)
    }

    /// Functions named `key` (FullName) or whose name has token `key` (Token).
    pub fn function_postings(&self, key: &str, mode: FnMatch) -> &[u32] {
        let table = match mode {
            FnMatch::FullName => &self.fn_name_postings,
            FnMatch::Token => &self.token_postings,
        };
        table.get(key).map_or(EMPTY, Vec::as_slice)
    }

    /// `(|∩ postings|, |∪ postings|)` over the given names. Unknown ids count
    /// as empty postings; duplicates are ignored.
    pub fn count_all(&self, names: &[NameId]) -> (usize, usize) {
        let unique: BTreeSet<NameId> = names.iter().copied().collect();
        let lists: Vec<&[u32]> = unique.iter().map(|&n| self.name_postings(n)).collect();
        (postings::intersect_count(&lists), postings::union_count(&lists))
    }

    /// `(N_both, N_name, N_fn)`: functions declaring `name` and matching
    /// `key`, functions declaring `name`, functions matching `key`.
    pub fn count_name_with_function_name(
        &self,
        name: NameId,
        key: &str,
        mode: FnMatch,
    ) -> (usize, usize, usize) {
        let vn = self.name_postings(name);
        let fns = self.function_postings(key, mode);
        (postings::pair_intersect_count(vn, fns), vn.len(), fns.len())
    }

    /// For every stored graph sharing at least one edge with `query`, the
    /// number of shared edges, grouped by name.
    pub fn candidates_by_edges(&self, query: &RelationGraph) -> BTreeMap<NameId, Vec<(u32, usize)>> {
        let mut hits: BTreeMap<(NameId, u32), usize> = BTreeMap::new();
        for edge in &query.edges {
            for &posting in self.edge_postings(edge) {
                *hits.entry(posting).or_default() += 1;
            }
        }
        let mut out: BTreeMap<NameId, Vec<(u32, usize)>> = BTreeMap::new();
        for ((name, ordinal), count) in hits {
            out.entry(name).or_default().push((ordinal, count));
        }
        out
    }

    /// Names declared in any function matched by `key`.
    pub fn names_in_functions(&self, key: &str, mode: FnMatch) -> BTreeSet<NameId> {
        self.function_postings(key, mode)
            .iter()
            .flat_map(|&f| self.functions[f as usize].names.iter().copied())
            .collect()
    }

    pub fn save(&self, dir: &Path) -> Result<(), SaveError> {
        store::save(self, dir)
    }

    pub fn load(dir: &Path) -> Result<CorpusIndex, LoadError> {
        store::load(dir)
    }
}

/// Accumulates functions into a [`CorpusIndex`].
///
/// ```
/// use name_loom::{IndexBuilder, index::FnMatch};
/// let mut b = IndexBuilder::new().timestamp(0);
/// b.add_source("a.js", "function getData(data, i){ data.push(i); }").unwrap();
/// b.add_source("b.js", "function other(data){ data.length; }").unwrap();
/// let index = b.finish().unwrap();
/// let data = index.name_id("data").unwrap();
/// assert_eq!(index.name_postings(data), [0, 1]);
/// assert_eq!(index.count_name_with_function_name(data, "get", FnMatch::Token), (1, 2, 1));
/// ```
#[derive(Debug, Default)]
pub struct IndexBuilder {
    timestamp: Option<u64>,
    jobs: Option<usize>,
    names: Vec<String>,
    name_lookup: HashMap<String, NameId>,
    pivots: Vec<String>,
    pivot_lookup: HashMap<String, u32>,
    files: Vec<String>,
    functions: Vec<FunctionEntry>,
    graphs: Vec<Vec<StoredGraph>>,
    seen_content: HashSet<[u8; 32]>,
    skipped_files: usize,
    duplicate_files: usize,
}

impl IndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build time recorded in the metadata, in seconds since the epoch.
    /// Defaults to the current time; fix it for reproducible output.
    pub fn timestamp(mut self, secs: u64) -> Self {
        self.timestamp = Some(secs);
        self
    }

    /// Worker threads for parsing in [`IndexBuilder::build_dir`].
    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = Some(jobs.max(1));
        self
    }

    /// Parses and adds one file. Returns `Ok(false)` when identical content
    /// was already added. A parse failure is counted as a skipped file.
    pub fn add_source(&mut self, path: &str, source: &str) -> Result<bool, ParseError> {
        if !self.seen_content.insert(Sha256::digest(source.as_bytes()).into()) {
            self.duplicate_files += 1;
            return Ok(false);
        }
        match parse_functions(source, path) {
            Ok(records) => {
                self.add_records(path, &records);
                Ok(true)
            }
            Err(err) => {
                self.skipped_files += 1;
                Err(err)
            }
        }
    }

    /// Adds already-extracted functions as one file.
    pub fn add_records(&mut self, path: &str, records: &[FunctionRecord]) {
        let file = self.files.len() as u32;
        self.files.push(path.to_string());
        for record in records {
            let function = self.functions.len() as u32;
            let mut names = Vec::with_capacity(record.variables.len());
            for (variable, graph) in &record.variables {
                let name = self.intern_name(variable);
                names.push(name);
                let mut edges: Vec<EdgeKey> = graph
                    .edges
                    .iter()
                    .map(|e| EdgeKey { pivot: self.intern_pivot(&e.pivot), rel: e.rel })
                    .collect();
                edges.sort();
                edges.dedup();
                let usages = &mut self.graphs[name.0 as usize];
                if usages.last().is_some_and(|g| g.function == function) {
                    let merged = usages.last_mut().expect("checked");
                    merged.edges.extend(edges);
                    merged.edges.sort();
                    merged.edges.dedup();
                } else {
                    usages.push(StoredGraph { function, edges });
                }
            }
            names.sort();
            names.dedup();
            self.functions.push(FunctionEntry {
                name: record.function_name.clone(),
                file,
                start: record.locus.start,
                end: record.locus.end,
                names,
            });
        }
    }

    fn intern_name(&mut self, name: &str) -> NameId {
        if let Some(&id) = self.name_lookup.get(name) {
            return id;
        }
        let id = NameId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.name_lookup.insert(name.to_string(), id);
        self.graphs.push(Vec::new());
        id
    }

    fn intern_pivot(&mut self, pivot: &str) -> u32 {
        if let Some(&id) = self.pivot_lookup.get(pivot) {
            return id;
        }
        let id = self.pivots.len() as u32;
        self.pivots.push(pivot.to_string());
        self.pivot_lookup.insert(pivot.to_string(), id);
        id
    }

    /// Indexes every `.js` file under `root`, in lexicographic path order.
    pub fn build_dir(mut self, root: &Path) -> Result<CorpusIndex, BuildError> {
        let files = corpus_files(root)?;

        let parse = |(rel, path): &(String, PathBuf)| -> Option<([u8; 32], Result<Vec<FunctionRecord>, ParseError>)> {
            match std::fs::read_to_string(path) {
                Ok(source) => {
                    let digest = Sha256::digest(source.as_bytes()).into();
                    Some((digest, parse_functions(&source, rel)))
                }
                Err(err) => {
                    log::warn!("{rel}: {err}");
                    None
                }
            }
        };
        let parsed: Vec<_> = match self.jobs {
            Some(jobs) => rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| BuildError::Io { path: root.to_path_buf(), source: std::io::Error::other(e) })?
                .install(|| files.par_iter().map(parse).collect()),
            None => files.par_iter().map(parse).collect(),
        };
        for ((rel, _), outcome) in files.iter().zip(parsed) {
            let Some((digest, result)) = outcome else {
                self.skipped_files += 1;
                continue;
            };
            if !self.seen_content.insert(digest) {
                log::debug!("{rel}: duplicate content, skipped");
                self.duplicate_files += 1;
                continue;
            }
            match result {
                Ok(records) => self.add_records(rel, &records),
                Err(err) => {
                    log::warn!("skipping {err}");
                    self.skipped_files += 1;
                }
            }
        }
        self.finish()
    }

    /// Finalizes the posting lists. Fails when no file was indexed.
    pub fn finish(self) -> Result<CorpusIndex, BuildError> {
        if self.files.is_empty() {
            return Err(BuildError::EmptyCorpus);
        }
        let mut edge_postings: BTreeMap<EdgeKey, Vec<(NameId, u32)>> = BTreeMap::new();
        for (name, usages) in self.graphs.iter().enumerate() {
            for (ordinal, graph) in usages.iter().enumerate() {
                for &edge in &graph.edges {
                    edge_postings.entry(edge).or_default().push((NameId(name as u32), ordinal as u32));
                }
            }
        }
        let mut name_postings = vec![Vec::new(); self.names.len()];
        let mut fn_name_postings: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        let mut token_postings: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (id, function) in self.functions.iter().enumerate() {
            let id = id as u32;
            for name in &function.names {
                name_postings[name.0 as usize].push(id);
            }
            if function.name.is_empty() {
                continue;
            }
            fn_name_postings.entry(function.name.clone()).or_default().push(id);
            let tokens: BTreeSet<String> = tokenize_name(&function.name).into_iter().collect();
            for token in tokens {
                token_postings.entry(token).or_default().push(id);
            }
        }

        let graph_count: usize = self.graphs.iter().map(Vec::len).sum();
        let edge_count: usize = self.graphs.iter().flatten().map(|g| g.edges.len()).sum();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let counts = IndexCounts {
            files: self.files.len(),
            skipped_files: self.skipped_files,
            duplicate_files: self.duplicate_files,
            functions: self.functions.len(),
            names: self.names.len(),
            pivots: self.pivots.len(),
            graphs: graph_count,
            edges: edge_count,
            mean_edges_per_graph: ratio(edge_count, graph_count),
            mean_graphs_per_function: ratio(graph_count, self.functions.len()),
        };
        let built_at = self.timestamp.unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        });
        let meta = IndexMeta {
            format: "name-loom-index".to_string(),
            version_major: FORMAT_MAJOR,
            version_minor: FORMAT_MINOR,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            built_at,
            dedup: "sha256-content".to_string(),
            stopwords: STOPWORDS.iter().map(|s| s.to_string()).collect(),
            counts,
        };
        Ok(CorpusIndex {
            names: self.names,
            name_lookup: self.name_lookup,
            pivots: self.pivots,
            pivot_lookup: self.pivot_lookup,
            files: self.files,
            functions: self.functions,
            graphs: self.graphs,
            edge_postings,
            name_postings,
            fn_name_postings,
            token_postings,
            meta,
        })
    }
}

/// Every `.js` file under `root` as `(relative path, full path)`, sorted by
/// relative path.
pub fn corpus_files(root: &Path) -> Result<Vec<(String, PathBuf)>, BuildError> {
    if !root.is_dir() {
        return Err(BuildError::MissingDir(root.to_path_buf()));
    }
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(root).follow_links(true) {
        let entry = entry.map_err(|e| BuildError::Io {
            path: e.path().unwrap_or(root).to_path_buf(),
            source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("walk error")),
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "js") {
            files.push((relative_name(root, entry.path()), entry.into_path()));
        }
    }
    files.sort();
    Ok(files)
}

fn relative_name(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}
