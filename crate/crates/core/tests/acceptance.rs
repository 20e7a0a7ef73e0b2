//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails or exceeds its time limit.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use name_loom::evaluation::{alpha_minify, ast_fingerprint, evaluate, EvalOptions};
use name_loom::index::{corpus_files, FnMatch};
use name_loom::recovery::{mvar, Candidate, CandidateList};
use name_loom::svc::{match_score, single_var_candidates};
use name_loom::tsc::{task_score, task_score_tokenized};
use name_loom::{
    mvc, parse_functions, recover_file, tokenize_name, CorpusIndex, FunctionRecord, IndexBuilder, RecoveryConfig,
    RelType, RelationEdge, RelationGraph,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TC_TOLERANCE: f64 = 1e-9;
const BEAM_SCORE_TOLERANCE: f64 = 1e-12;
const SELF_RECOVERY_MIN: f64 = 0.90;
const PER_VARIABLE_MS_MAX: f64 = 50.0;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixture_index(dirs: &[&str]) -> CorpusIndex {
    let mut builder = IndexBuilder::new().timestamp(0);
    for dir in dirs {
        for (rel, path) in corpus_files(&fixtures().join(dir)).unwrap() {
            builder.add_source(&format!("{dir}/{rel}"), &fs::read_to_string(path).unwrap()).unwrap();
        }
    }
    builder.finish().unwrap()
}

// ---------------------------------------------------------------- TC example

fn tc_worked_example() -> Result<String, String> {
    let mut src = String::new();
    for k in 0..5 {
        let var = if k < 3 { "dataTransfer" } else { "content" };
        src.push_str(&format!("function getClipboardContent({var}) {{}}\n"));
    }
    for k in 0..18 {
        src.push_str(&format!("function handler{k}(dataTransfer) {{}}\n"));
    }
    let mut builder = IndexBuilder::new().timestamp(0);
    builder.add_source("tc.js", &src).unwrap();
    let index = builder.finish().unwrap();
    let name = index.name_id("dataTransfer").ok_or("dataTransfer not indexed")?;
    let counts = index.count_name_with_function_name(name, "getClipboardContent", FnMatch::FullName);
    ensure(counts == (3, 21, 5), || format!("counts {counts:?}, expected (3, 21, 5)"))?;
    let tc = task_score(&index, name, "getClipboardContent");
    ensure((tc - 3.0 / 23.0).abs() <= TC_TOLERANCE, || format!("TC = {tc}"))?;
    ensure((tc - 0.13).abs() < 0.005, || format!("TC = {tc} does not round to 0.13"))?;
    Ok(format!("TC = {tc:.12}"))
}

// -------------------------------------------------------------- graph score

const PIVOTS: [&str; 10] = ["length", "push", "get", "set", "map", "value", "id", "then", "parse", "apply"];

fn random_edge(rng: &mut ChaCha8Rng) -> RelationEdge {
    let pivot = PIVOTS[rng.random_range(0..PIVOTS.len())];
    RelationEdge::new(pivot, RelType::ALL[rng.random_range(0..RelType::ALL.len())])
}

fn random_graph(rng: &mut ChaCha8Rng, variable: &str, max_edges: usize) -> RelationGraph {
    let n = rng.random_range(0..=max_edges);
    RelationGraph::with_edges(variable, (0..n).map(|_| random_edge(rng)))
}

fn graph_scores() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut self_checks = 0;
    while self_checks < 100 {
        let g = random_graph(&mut rng, "v", 8);
        if g.is_empty() {
            continue;
        }
        let s = match_score(&g, &g).unwrap();
        ensure(s == 1.0, || format!("rho(G, G) = {s}"))?;
        self_checks += 1;
    }
    let q = RelationGraph::with_edges("q", [RelationEdge::new("a", RelType::FieldAccess), RelationEdge::new("b", RelType::MethodCall)]);
    let s = RelationGraph::with_edges("s", [RelationEdge::new("a", RelType::FieldAccess)]);
    let half = match_score(&q, &s).unwrap();
    ensure(half == 0.5, || format!("1-of-2 = {half}"))?;

    let mut trials = 0;
    while trials < 1000 {
        let query = random_graph(&mut rng, "q", 5);
        if query.is_empty() {
            continue;
        }
        let stored = random_graph(&mut rng, "s", 5);
        let before = match_score(&query, &stored).unwrap();
        ensure((0.0..=1.0).contains(&before), || format!("rho = {before} out of range"))?;
        let mut grown = stored.clone();
        grown.edges.insert(random_edge(&mut rng));
        let after = match_score(&query, &grown).unwrap();
        ensure(after >= before && after <= 1.0, || format!("adding a stored edge moved rho {before} -> {after}"))?;
        trials += 1;
    }
    Ok("100 self matches, 1-of-2 = 0.5, 1000 monotone trials".into())
}

// --------------------------------------------------------- oracle equivalence

const FN_NAMES: [&str; 10] = [
    "getData", "setData", "loadUser", "saveUser", "getUserName", "parseJson", "renderList", "handleClick", "onLoad",
    "fetchData",
];
const VAR_NAMES: [&str; 11] = ["data", "i", "user", "name", "list", "item", "json", "event", "value", "result", "key"];

fn random_records(rng: &mut ChaCha8Rng) -> Vec<FunctionRecord> {
    let count = rng.random_range(1..=50);
    (0..count)
        .map(|k| {
            let function_name = FN_NAMES[rng.random_range(0..FN_NAMES.len())].to_string();
            let mut vars: Vec<&str> = VAR_NAMES.to_vec();
            let keep = rng.random_range(0..=5);
            rand::seq::SliceRandom::shuffle(vars.as_mut_slice(), rng);
            FunctionRecord {
                function_id: k,
                name_tokens: tokenize_name(&function_name),
                function_name,
                locus: name_loom::extraction::SourceLocus { path: "gen.js".into(), start: k as u32, end: k as u32 + 1 },
                variables: vars[..keep].iter().map(|v| (v.to_string(), random_graph(rng, v, 4))).collect(),
            }
        })
        .collect()
}

/// Full scans over the generating records.
struct Naive<'a> {
    records: &'a [FunctionRecord],
}

impl Naive<'_> {
    fn has(&self, f: &FunctionRecord, name: &str) -> bool {
        f.variables.iter().any(|(v, _)| v == name)
    }

    fn count_all(&self, names: &[&str]) -> (usize, usize) {
        let all = self.records.iter().filter(|f| names.iter().all(|n| self.has(f, n))).count();
        let any = self.records.iter().filter(|f| names.iter().any(|n| self.has(f, n))).count();
        (all, any)
    }

    fn assoc(&self, names: &[&str]) -> f64 {
        let (all, any) = self.count_all(names);
        if any == 0 {
            0.0
        } else {
            all as f64 / any as f64
        }
    }

    fn jaccard(&self, name: &str, matches: impl Fn(&FunctionRecord) -> bool) -> f64 {
        let both = self.records.iter().filter(|f| matches(f) && self.has(f, name)).count();
        let n_name = self.records.iter().filter(|f| self.has(f, name)).count();
        let n_fn = self.records.iter().filter(|f| matches(f)).count();
        let denom = n_name + n_fn - both;
        if denom == 0 {
            0.0
        } else {
            both as f64 / denom as f64
        }
    }

    fn task_score(&self, name: &str, fn_name: &str) -> f64 {
        self.jaccard(name, |f| f.function_name == fn_name)
    }

    fn task_score_tokenized(&self, name: &str, fn_name: &str) -> f64 {
        tokenize_name(fn_name)
            .iter()
            .map(|t| self.jaccard(name, |f| tokenize_name(&f.function_name).contains(t)))
            .fold(0.0, f64::max)
    }

    fn svc(&self, query: &RelationGraph, phi: f64) -> Vec<(String, f64)> {
        let mut best: BTreeMap<&str, usize> = BTreeMap::new();
        for f in self.records {
            for (name, graph) in &f.variables {
                let shared = query.edges.intersection(&graph.edges).count();
                let slot = best.entry(name).or_default();
                *slot = (*slot).max(shared);
            }
        }
        let mut out: Vec<(String, f64)> = best
            .into_iter()
            .map(|(n, shared)| (n.to_string(), shared as f64 / query.edges.len() as f64))
            .filter(|&(_, s)| s > 0.0 && s >= phi)
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

fn random_name_set<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> Vec<&'a str> {
    let size = rng.random_range(1..=3.min(pool.len()));
    let mut names: Vec<&str> = pool.to_vec();
    rand::seq::SliceRandom::shuffle(names.as_mut_slice(), rng);
    names.truncate(size);
    names
}

fn compare_queries(index: &CorpusIndex, naive: &Naive, rng: &mut ChaCha8Rng, rounds: usize) -> Result<usize, String> {
    let known: Vec<&str> = VAR_NAMES.iter().copied().filter(|n| index.name_id(n).is_some()).collect();
    let mut checked = 0;
    if known.is_empty() {
        return Ok(0);
    }
    for _ in 0..rounds {
        let names = random_name_set(rng, &known);
        let ids: Vec<_> = names.iter().map(|n| index.name_id(n).unwrap()).collect();
        ensure(index.count_all(&ids) == naive.count_all(&names), || format!("countAll {names:?}"))?;
        let (a, b) = (mvc::assoc(index, &ids), naive.assoc(&names));
        ensure(a == b, || format!("assoc {names:?}: {a} vs {b}"))?;

        let name = names[0];
        let fn_name = FN_NAMES[rng.random_range(0..FN_NAMES.len())];
        let (a, b) = (task_score(index, ids[0], fn_name), naive.task_score(name, fn_name));
        ensure(a == b, || format!("taskScore({name}, {fn_name}): {a} vs {b}"))?;
        let (a, b) = (task_score_tokenized(index, ids[0], fn_name), naive.task_score_tokenized(name, fn_name));
        ensure(a == b, || format!("taskScoreTokenized({name}, {fn_name}): {a} vs {b}"))?;

        let query = loop {
            let g = random_graph(rng, "q", 4);
            if !g.is_empty() {
                break g;
            }
        };
        let phi = [0.25, 0.5, 0.8, 1.0][rng.random_range(0..4)];
        let got: Vec<(String, f64)> = single_var_candidates(&query, index, phi)
            .unwrap()
            .into_iter()
            .map(|c| (index.name(c.name).to_string(), c.score))
            .collect();
        let want = naive.svc(&query, phi);
        ensure(got == want, || format!("singleVarCandidates phi={phi}: {got:?} vs {want:?}"))?;
        checked += 1;
    }
    Ok(checked)
}

fn oracle_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a11ce);
    let mut queries = 0;
    for _ in 0..50 {
        let records = random_records(&mut rng);
        let mut builder = IndexBuilder::new().timestamp(0);
        builder.add_records("gen.js", &records);
        let index = builder.finish().unwrap();
        queries += compare_queries(&index, &Naive { records: &records }, &mut rng, 20)?;
    }
    Ok(format!("50 corpora, {queries} query rounds"))
}

// ------------------------------------------------------------ beam exactness

struct BeamInstance {
    functions: Vec<Vec<usize>>,
    lists: Vec<Vec<(usize, f64)>>,
    edges: Vec<usize>,
    gamma: f64,
    theta: f64,
}

const POOL: usize = 6;

fn beam_instance(rng: &mut ChaCha8Rng) -> BeamInstance {
    let functions = (0..rng.random_range(1..=6))
        .map(|_| (0..POOL).filter(|_| rng.random_bool(0.4)).collect::<Vec<_>>())
        .collect();
    let vars = rng.random_range(1..=4);
    let lists = (0..vars)
        .map(|_| {
            let mut names: Vec<usize> = (0..POOL).collect();
            rand::seq::SliceRandom::shuffle(names.as_mut_slice(), rng);
            names.truncate(rng.random_range(1..=4));
            names.into_iter().map(|n| (n, rng.random_range(0..=100) as f64 / 100.0)).collect()
        })
        .collect();
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    BeamInstance {
        functions,
        lists,
        edges: (0..vars).map(|_| rng.random_range(0..4)).collect(),
        gamma: grid[rng.random_range(0..grid.len())],
        theta: grid[rng.random_range(0..grid.len())],
    }
}

/// Joint score computed directly from function membership.
fn joint_score(inst: &BeamInstance, all_functions: &[Vec<usize>], assignment: &[(usize, f64)]) -> f64 {
    let assoc = |set: &[usize]| {
        let all = all_functions.iter().filter(|f| set.iter().all(|n| f.contains(n))).count();
        let any = all_functions.iter().filter(|f| set.iter().any(|n| f.contains(n))).count();
        if any == 0 {
            0.0
        } else {
            all as f64 / any as f64
        }
    };
    let names: Vec<usize> = assignment.iter().map(|a| a.0).collect();
    let size = 2.min(names.len());
    let terms: Vec<f64> = names.iter().copied().combinations(size).map(|s| assoc(&s)).collect();
    let mc = terms.iter().sum::<f64>() / terms.len() as f64;
    let st = assignment.iter().map(|a| a.1).sum::<f64>() / assignment.len() as f64;
    inst.gamma * mc + inst.theta * st
}

fn beam_exactness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbea7);
    let names: Vec<String> = (0..POOL).map(|n| format!("n{n}")).collect();
    let (mut done, mut unique) = (0, 0);
    while done < 200 {
        let inst = beam_instance(&mut rng);
        let mut all_functions = inst.functions.clone();
        all_functions.push((0..POOL).collect());
        let best = inst
            .lists
            .iter()
            .map(|l| l.iter().copied())
            .multi_cartesian_product()
            .filter(|combo| combo.iter().map(|c| c.0).all_unique())
            .map(|combo| (joint_score(&inst, &all_functions, &combo), combo))
            .collect::<Vec<_>>();
        let Some(max) = best.iter().map(|b| b.0).reduce(f64::max) else {
            continue;
        };

        let mut src: String = inst
            .functions
            .iter()
            .enumerate()
            .map(|(k, f)| format!("function f{k}({}) {{}}\n", f.iter().map(|&n| names[n].as_str()).join(",")))
            .collect();
        src.push_str(&format!("function all() {{ var {}; }}\n", names.join(",")));
        let mut builder = IndexBuilder::new().timestamp(0);
        builder.add_source("beam.js", &src).unwrap();
        let index = builder.finish().unwrap();
        let lists: Vec<CandidateList> = inst
            .lists
            .iter()
            .enumerate()
            .map(|(v, l)| CandidateList {
                variable: format!("v{v}"),
                edges: inst.edges[v],
                entries: l
                    .iter()
                    .map(|&(n, st)| Candidate { name: index.name_id(&names[n]).unwrap(), st, sc: st, tc: 0.0 })
                    .collect(),
            })
            .collect();
        let config = RecoveryConfig { beam_k: 256, gamma: inst.gamma, theta: inst.theta, ..Default::default() };
        let beam = mvar(&index, &lists, &config).map_err(|e| e.to_string())?;
        let top = &beam[0];
        ensure(top.fallbacks() == 0, || "top-1 uses a duplicate fallback".into())?;
        let got: Vec<(usize, f64)> = top
            .picks
            .iter()
            .map(|p| {
                let p = p.expect("all variables assigned");
                (index.name(p.name)[1..].parse().unwrap(), p.st)
            })
            .collect();
        let score = joint_score(&inst, &all_functions, &got);
        ensure((score - max).abs() <= BEAM_SCORE_TOLERANCE, || {
            format!("top-1 {got:?} scores {score}, exhaustive max {max}")
        })?;
        let argmax: Vec<&Vec<(usize, f64)>> =
            best.iter().filter(|b| max - b.0 <= BEAM_SCORE_TOLERANCE).map(|b| &b.1).collect();
        if argmax.len() == 1 {
            unique += 1;
            ensure(*argmax[0] == got, || format!("top-1 {got:?}, unique argmax {:?}", argmax[0]))?;
        }
        done += 1;
    }
    Ok(format!("200 instances, {unique} with a unique argmax matched exactly, rest matched the max score"))
}

// ------------------------------------------------------------- self recovery

fn clipboard_pair() -> Result<String, String> {
    let index = fixture_index(&["clipboard"]);
    let minified = fs::read_to_string(fixtures().join("clipboard_min.js")).unwrap();
    let out = recover_file(&minified, "clipboard_min.js", &index, &RecoveryConfig::default(), false)
        .map_err(|e| e.to_string())?;
    let applied: BTreeMap<&str, &str> =
        out.report.functions[0].variables.iter().map(|v| (v.variable.as_str(), v.applied.as_str())).collect();
    for (var, name) in [("r", "dataTransfer"), ("n", "data"), ("f", "contentType")] {
        ensure(applied.get(var) == Some(&name), || format!("{var} -> {:?}, expected {name}", applied.get(var)))?;
    }
    Ok("r->dataTransfer n->data f->contentType".into())
}

fn self_recovery() -> Result<String, String> {
    let corpus = fixtures().join("corpus");
    let index = IndexBuilder::new().timestamp(0).build_dir(&corpus).map_err(|e| e.to_string())?;
    let report = evaluate(&corpus, &index, &EvalOptions::default()).map_err(|e| e.to_string())?;
    ensure(report.accuracy >= SELF_RECOVERY_MIN, || {
        format!("accuracy {:.4} ({}/{}) < {SELF_RECOVERY_MIN}", report.accuracy, report.hits, report.total)
    })?;
    let pair = clipboard_pair()?;
    Ok(format!("accuracy {:.4} ({}/{}); {pair}", report.accuracy, report.hits, report.total))
}

fn ablation_ordering() -> Result<String, String> {
    let corpus = fixtures().join("corpus");
    let index = IndexBuilder::new().timestamp(0).build_dir(&corpus).map_err(|e| e.to_string())?;
    let report = evaluate(&corpus, &index, &EvalOptions { ablate: true, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let acc: BTreeMap<&str, f64> = report.ablation.iter().map(|r| (r.contexts.as_str(), r.accuracy)).collect();
    let chain = ["TSC+SVC+MVC", "TSC+SVC", "SVC", "TSC"];
    let values: Vec<f64> = chain.iter().map(|c| acc[c]).collect();
    let shown = chain.iter().zip(&values).map(|(c, v)| format!("{c} {:.3}", v)).join(" >= ");
    ensure(values.windows(2).all(|w| w[0] >= w[1]), || format!("ordering violated: {shown}"))?;
    Ok(shown)
}

// ------------------------------------------------------ determinism, storage

fn determinism_and_round_trip() -> Result<String, String> {
    let corpus = fixtures().join("corpus");
    let index = IndexBuilder::new().timestamp(0).build_dir(&corpus).map_err(|e| e.to_string())?;
    let opts = EvalOptions { minify_seed: 42, ablate: true, ..Default::default() };
    let run = || serde_json::to_string(&evaluate(&corpus, &index, &opts).unwrap()).unwrap();
    ensure(run() == run(), || "evaluation reports differ".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x70ad);
    let records = loop {
        let r = random_records(&mut rng);
        if r.len() >= 30 {
            break r;
        }
    };
    let mut builder = IndexBuilder::new().timestamp(0);
    builder.add_records("gen.js", &records);
    let original = builder.finish().unwrap();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    original.save(dir.path()).map_err(|e| e.to_string())?;
    let loaded = CorpusIndex::load(dir.path()).map_err(|e| e.to_string())?;

    let known: Vec<&str> = VAR_NAMES.iter().copied().filter(|n| original.name_id(n).is_some()).collect();
    for q in 0..500 {
        let names = random_name_set(&mut rng, &known);
        let ids = |ix: &CorpusIndex| names.iter().map(|n| ix.name_id(n).unwrap()).collect::<Vec<_>>();
        let (a, b) = (ids(&original), ids(&loaded));
        let fn_name = FN_NAMES[rng.random_range(0..FN_NAMES.len())];
        let query = random_graph(&mut rng, "q", 4);
        let same = match q % 5 {
            0 => original.count_all(&a) == loaded.count_all(&b),
            1 => mvc::mc_score(&original, &a, 2) == mvc::mc_score(&loaded, &b, 2),
            2 => {
                task_score(&original, a[0], fn_name) == task_score(&loaded, b[0], fn_name)
                    && task_score_tokenized(&original, a[0], fn_name) == task_score_tokenized(&loaded, b[0], fn_name)
            }
            3 => query.edges.iter().all(|e| original.edge_postings(e) == loaded.edge_postings(e)),
            _ => {
                query.is_empty()
                    || single_var_candidates(&query, &original, 0.5) == single_var_candidates(&query, &loaded, 0.5)
            }
        };
        ensure(same, || format!("query {q} differs after reload"))?;
    }
    Ok("identical reports; 500 queries identical after save/load".into())
}

// ------------------------------------------------------------ minifier

fn pivot_multiset(source: &str) -> Result<BTreeMap<(usize, String), usize>, String> {
    let mut out = BTreeMap::new();
    for record in parse_functions(source, "m.js").map_err(|e| e.to_string())? {
        for (_, graph) in &record.variables {
            for edge in &graph.edges {
                *out.entry((record.function_id, format!("{}/{}", edge.pivot, edge.rel))).or_default() += 1;
            }
        }
    }
    Ok(out)
}

fn minifier_soundness() -> Result<String, String> {
    let dirs = ["corpus", "clipboard", "clipboard_extra", "four"];
    let index = fixture_index(&dirs);
    let mut files = 0;
    let mut renamed = 0;
    for dir in dirs {
        for (rel, path) in corpus_files(&fixtures().join(dir)).unwrap() {
            let source = fs::read_to_string(path).unwrap();
            for seed in 0..4 {
                let minified = alpha_minify(&source, &rel, seed).map_err(|e| e.to_string())?;
                renamed += minified.truth.functions.iter().map(|f| f.variables.len()).sum::<usize>();
                ensure(pivot_multiset(&minified.source)? == pivot_multiset(&source)?, || format!("{rel}: pivots changed"))?;
                let fp = ast_fingerprint(&minified.source, &rel).map_err(|e| format!("{rel}: {e}"))?;
                let recovered = recover_file(&minified.source, &rel, &index, &RecoveryConfig::default(), false)
                    .map_err(|e| e.to_string())?;
                let again = alpha_minify(&recovered.source, &rel, seed + 100).map_err(|e| e.to_string())?;
                ensure(ast_fingerprint(&again.source, &rel).map_err(|e| e.to_string())? == fp, || {
                    format!("{rel} seed {seed}: re-minified output is not isomorphic")
                })?;
            }
            files += 1;
        }
    }
    Ok(format!("{files} files x 4 seeds, {renamed} renamed variables"))
}

fn throughput() -> Result<String, String> {
    let corpus = fixtures().join("corpus");
    let index = IndexBuilder::new().timestamp(0).build_dir(&corpus).map_err(|e| e.to_string())?;
    let report = evaluate(&corpus, &index, &EvalOptions { timings: true, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let ms = report.mean_variable_ms.ok_or("no timings")?;
    ensure(ms <= PER_VARIABLE_MS_MAX, || format!("{ms:.3} ms per variable"))?;
    Ok(format!("{ms:.3} ms per variable over {} variables", report.total))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, u64, Check); 9] = [
        ("tc-example", "task score worked example is 3/23", 1, tc_worked_example),
        ("graph-score", "graph match score unit suite", 5, graph_scores),
        ("oracle-equivalence", "index queries equal full-scan oracles", 30, oracle_equivalence),
        ("beam-exactness", "wide beam finds the exhaustive argmax", 30, beam_exactness),
        ("self-recovery", "fixture self-recovery and clipboard pair", 10, self_recovery),
        ("ablation-ordering", "context combinations keep their accuracy ordering", 30, ablation_ordering),
        ("determinism", "reproducible reports and index round trip", 20, determinism_and_round_trip),
        ("minifier-soundness", "minifier preserves structure and pivots", 10, minifier_soundness),
        ("throughput", "per-variable recovery time", 30, throughput),
    ];
    let mut failed = 0;
    for (id, title, limit, check) in criteria {
        let limit = Duration::from_secs(limit);
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = started.elapsed();
        let (ok, detail) = match outcome {
            Ok(detail) if elapsed <= limit => (true, detail),
            Ok(detail) => (false, format!("{detail}; over time limit")),
            Err(err) => (false, err),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {id:<20} {title}: {detail} [{:.2}s/{}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
