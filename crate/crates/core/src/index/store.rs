//! On-disk index layout.
//!
//! An index directory holds `meta.json` and `index.bin`. The binary file is
//!
//! ```text
//! "NLIX"  u16 major  u16 minor  u32 section_count
//! section*: [u8; 4] tag  u64 payload_len  payload  u32 crc32(payload)
//! ```
//!
//! All integers are little-endian; strings are a `u32` byte length followed
//! by UTF-8. Section payloads, in file order:
//!
//! | tag    | payload |
//! |--------|---------|
//! | `NAME` | `u32 n`, n strings (index = name id) |
//! | `PIVT` | `u32 n`, n strings (index = pivot id) |
//! | `FILE` | `u32 n`, n relative paths |
//! | `FUNC` | `u32 n`, per function: name, `u32 file`, `u32 start`, `u32 end`, `u32 k`, k name ids |
//! | `GRPH` | `u32 names`, per name: `u32 g`, per graph: `u32 function`, `u32 e`, e × (`u32 pivot`, `u8 rel`) |
//! | `EPST` | `u32 n`, per edge: `u32 pivot`, `u8 rel`, `u32 k`, k × (`u32 name`, `u32 ordinal`) |
//! | `NPST` | `u32 names`, per name: `u32 k`, k function ids |
//! | `FNPS` | `u32 n`, per function name: string, `u32 k`, k function ids |
//! | `TOKP` | `u32 n`, per token: string, `u32 k`, k function ids |
//!
//! Relation codes: 0 FieldAccess, 1 MethodCall, 2 Argument, 3 Assignment.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use super::postings::is_strictly_sorted;
use super::{CorpusIndex, EdgeKey, FunctionEntry, IndexMeta, NameId, StoredGraph};
use crate::extraction::RelType;

pub const FORMAT_MAJOR: u16 = 1;
pub const FORMAT_MINOR: u16 = 0;
const MAGIC: &[u8; 4] = b"NLIX";
const TAGS: [&[u8; 4]; 9] =
    [b"NAME", b"PIVT", b"FILE", b"FUNC", b"GRPH", b"EPST", b"NPST", b"FNPS", b"TOKP"];
pub(crate) const BIN_FILE: &str = "index.bin";
pub(crate) const META_FILE: &str = "meta.json";

#[derive(Debug, thiserror::Error)]
pub enum SaveError {
    #[error("posting list not strictly sorted in section {0}")]
    Unsorted(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("not an index file (bad magic bytes)")]
    BadMagic,
    #[error("index format {found_major}.{found_minor} is incompatible with {FORMAT_MAJOR}.x")]
    VersionMismatch { found_major: u16, found_minor: u16 },
    #[error("index file truncated")]
    Truncated,
    #[error("checksum mismatch in section {0}")]
    Checksum(String),
    #[error("malformed index: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("section entry count exceeds u32"));
    }
    fn str(&mut self, s: &str) {
        self.len(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn ids(&mut self, ids: &[u32]) {
        self.len(ids.len());
        for &id in ids {
            self.u32(id);
        }
    }
}

fn check(ok: bool, section: &'static str) -> Result<(), SaveError> {
    if ok {
        Ok(())
    } else {
        Err(SaveError::Unsorted(section))
    }
}

pub(crate) fn encode(index: &CorpusIndex) -> Result<Vec<u8>, SaveError> {
    let mut sections: Vec<Vec<u8>> = Vec::with_capacity(TAGS.len());
    let strings = |list: &[String]| {
        let mut w = Writer(Vec::new());
        w.len(list.len());
        for s in list {
            w.str(s);
        }
        w.0
    };
    sections.push(strings(&index.names));
    sections.push(strings(&index.pivots));
    sections.push(strings(&index.files));

    let mut w = Writer(Vec::new());
    w.len(index.functions.len());
    for f in &index.functions {
        check(is_strictly_sorted(&f.names), "FUNC")?;
        w.str(&f.name);
        w.u32(f.file);
        w.u32(f.start);
        w.u32(f.end);
        w.len(f.names.len());
        for n in &f.names {
            w.u32(n.0);
        }
    }
    sections.push(w.0);

    let mut w = Writer(Vec::new());
    w.len(index.graphs.len());
    for usages in &index.graphs {
        w.len(usages.len());
        for g in usages {
            check(is_strictly_sorted(&g.edges), "GRPH")?;
            w.u32(g.function);
            w.len(g.edges.len());
            for e in &g.edges {
                w.u32(e.pivot);
                w.u8(e.rel.code());
            }
        }
    }
    sections.push(w.0);

    let mut w = Writer(Vec::new());
    w.len(index.edge_postings.len());
    for (key, list) in &index.edge_postings {
        check(is_strictly_sorted(list), "EPST")?;
        w.u32(key.pivot);
        w.u8(key.rel.code());
        w.len(list.len());
        for (name, ordinal) in list {
            w.u32(name.0);
            w.u32(*ordinal);
        }
    }
    sections.push(w.0);

    let mut w = Writer(Vec::new());
    w.len(index.name_postings.len());
    for list in &index.name_postings {
        check(is_strictly_sorted(list), "NPST")?;
        w.ids(list);
    }
    sections.push(w.0);

    for (table, tag) in [(&index.fn_name_postings, "FNPS"), (&index.token_postings, "TOKP")] {
        let mut w = Writer(Vec::new());
        w.len(table.len());
        for (key, list) in table {
            check(is_strictly_sorted(list), tag)?;
            w.str(key);
            w.ids(list);
        }
        sections.push(w.0);
    }

    let mut out = Writer(Vec::new());
    out.0.extend_from_slice(MAGIC);
    out.0.extend_from_slice(&FORMAT_MAJOR.to_le_bytes());
    out.0.extend_from_slice(&FORMAT_MINOR.to_le_bytes());
    out.len(sections.len());
    for (tag, payload) in TAGS.iter().zip(&sections) {
        out.0.extend_from_slice(*tag);
        out.0.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.0.extend_from_slice(payload);
        out.u32(crc32fast::hash(payload));
    }
    Ok(out.0)
}

pub(crate) fn save(index: &CorpusIndex, dir: &Path) -> Result<(), SaveError> {
    let bytes = encode(index)?;
    fs::create_dir_all(dir)?;
    let mut meta = serde_json::to_string_pretty(&index.meta)?;
    meta.push('\n');
    fs::write(dir.join(META_FILE), meta)?;
    fs::write(dir.join(BIN_FILE), bytes)?;
    Ok(())
}

pub(crate) fn load(dir: &Path) -> Result<CorpusIndex, LoadError> {
    let bytes = fs::read(dir.join(BIN_FILE))?;
    let meta: IndexMeta = serde_json::from_slice(&fs::read(dir.join(META_FILE))?)
        .map_err(|e| LoadError::Malformed(format!("{META_FILE}: {e}")))?;
    decode(&bytes, meta)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LoadError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(LoadError::Truncated)?;
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }
    fn u8(&mut self) -> Result<u8, LoadError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, LoadError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }
    fn u32(&mut self) -> Result<u32, LoadError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, LoadError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    /// A count, sanity-checked against the bytes left so corrupt input cannot
    /// trigger huge allocations.
    fn count(&mut self) -> Result<usize, LoadError> {
        let n = self.u32()? as usize;
        if n > self.buf.len() - self.pos {
            return Err(malformed("entry count exceeds section size"));
        }
        Ok(n)
    }
    fn str(&mut self) -> Result<String, LoadError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| malformed("invalid UTF-8 string"))
    }
    fn ids(&mut self) -> Result<Vec<u32>, LoadError> {
        let n = self.count()?;
        (0..n).map(|_| self.u32()).collect()
    }
    fn rel(&mut self) -> Result<RelType, LoadError> {
        RelType::from_code(self.u8()?).ok_or_else(|| malformed("unknown relation code"))
    }
    fn strings(&mut self) -> Result<Vec<String>, LoadError> {
        let n = self.count()?;
        (0..n).map(|_| self.str()).collect()
    }
    fn finish(&self, tag: &str) -> Result<(), LoadError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(malformed(&format!("trailing bytes in section {tag}")))
        }
    }
}

fn malformed(msg: &str) -> LoadError {
    LoadError::Malformed(msg.to_string())
}

pub(crate) fn decode(bytes: &[u8], meta: IndexMeta) -> Result<CorpusIndex, LoadError> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(LoadError::BadMagic);
    }
    let mut r = Reader { buf: bytes, pos: 4 };
    let major = r.u16()?;
    let minor = r.u16()?;
    if major != FORMAT_MAJOR {
        return Err(LoadError::VersionMismatch { found_major: major, found_minor: minor });
    }
    let count = r.u32()? as usize;
    let mut payloads: HashMap<[u8; 4], &[u8]> = HashMap::new();
    for _ in 0..count {
        let tag: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
        let len = usize::try_from(r.u64()?).map_err(|_| LoadError::Truncated)?;
        let payload = r.take(len)?;
        let crc = r.u32()?;
        let name = String::from_utf8_lossy(&tag).into_owned();
        if crc32fast::hash(payload) != crc {
            return Err(LoadError::Checksum(name));
        }
        payloads.insert(tag, payload);
    }
    let section = |tag: &[u8; 4]| -> Result<Reader<'_>, LoadError> {
        let buf = payloads.get(tag).ok_or_else(|| {
            malformed(&format!("missing section {}", String::from_utf8_lossy(tag)))
        })?;
        Ok(Reader { buf, pos: 0 })
    };

    let mut s = section(b"NAME")?;
    let names = s.strings()?;
    s.finish("NAME")?;
    let mut s = section(b"PIVT")?;
    let pivots = s.strings()?;
    s.finish("PIVT")?;
    let mut s = section(b"FILE")?;
    let files = s.strings()?;
    s.finish("FILE")?;

    let name_ok = |id: u32| (id as usize) < names.len();
    let mut s = section(b"FUNC")?;
    let n = s.count()?;
    let mut functions = Vec::with_capacity(n);
    for _ in 0..n {
        let name = s.str()?;
        let file = s.u32()?;
        let start = s.u32()?;
        let end = s.u32()?;
        let ids = s.ids()?;
        if (file as usize) >= files.len() || !ids.iter().all(|&i| name_ok(i)) || !is_strictly_sorted(&ids) {
            return Err(malformed("bad function entry"));
        }
        functions.push(FunctionEntry { name, file, start, end, names: ids.into_iter().map(NameId).collect() });
    }
    s.finish("FUNC")?;

    let mut s = section(b"GRPH")?;
    let n = s.count()?;
    if n != names.len() {
        return Err(malformed("graph table size differs from name table"));
    }
    let mut graphs = Vec::with_capacity(n);
    for _ in 0..n {
        let g = s.count()?;
        let mut usages = Vec::with_capacity(g);
        for _ in 0..g {
            let function = s.u32()?;
            let e = s.count()?;
            let mut edges = Vec::with_capacity(e);
            for _ in 0..e {
                let pivot = s.u32()?;
                let rel = s.rel()?;
                if (pivot as usize) >= pivots.len() {
                    return Err(malformed("pivot id out of range"));
                }
                edges.push(EdgeKey { pivot, rel });
            }
            if (function as usize) >= functions.len() || !is_strictly_sorted(&edges) {
                return Err(malformed("bad graph entry"));
            }
            usages.push(StoredGraph { function, edges });
        }
        graphs.push(usages);
    }
    s.finish("GRPH")?;

    let mut s = section(b"EPST")?;
    let n = s.count()?;
    let mut edge_postings = BTreeMap::new();
    for _ in 0..n {
        let key = EdgeKey { pivot: s.u32()?, rel: s.rel()? };
        let k = s.count()?;
        let mut list = Vec::with_capacity(k);
        for _ in 0..k {
            let name = s.u32()?;
            let ordinal = s.u32()?;
            let valid = graphs
                .get(name as usize)
                .and_then(|g: &Vec<StoredGraph>| g.get(ordinal as usize))
                .is_some_and(|g| g.edges.binary_search(&key).is_ok());
            if !valid {
                return Err(malformed("edge posting does not resolve to a graph with that edge"));
            }
            list.push((NameId(name), ordinal));
        }
        if !is_strictly_sorted(&list) {
            return Err(malformed("unsorted edge posting"));
        }
        edge_postings.insert(key, list);
    }
    s.finish("EPST")?;

    let function_ok = |id: &u32| (*id as usize) < functions.len();
    let mut s = section(b"NPST")?;
    let n = s.count()?;
    if n != names.len() {
        return Err(malformed("name posting table size differs from name table"));
    }
    let mut name_postings = Vec::with_capacity(n);
    for _ in 0..n {
        let list = s.ids()?;
        if !is_strictly_sorted(&list) || !list.iter().all(function_ok) {
            return Err(malformed("bad name posting"));
        }
        name_postings.push(list);
    }
    s.finish("NPST")?;

    let keyed = |tag: &[u8; 4]| -> Result<BTreeMap<String, Vec<u32>>, LoadError> {
        let mut s = section(tag)?;
        let n = s.count()?;
        let mut table = BTreeMap::new();
        for _ in 0..n {
            let key = s.str()?;
            let list = s.ids()?;
            if !is_strictly_sorted(&list) || !list.iter().all(function_ok) {
                return Err(malformed("bad function posting"));
            }
            table.insert(key, list);
        }
        s.finish(std::str::from_utf8(tag).unwrap_or("?"))?;
        Ok(table)
    };
    let fn_name_postings = keyed(b"FNPS")?;
    let token_postings = keyed(b"TOKP")?;

    let name_lookup = names.iter().enumerate().map(|(i, n)| (n.clone(), NameId(i as u32))).collect();
    let pivot_lookup = pivots.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect();
    Ok(CorpusIndex {
        names,
        name_lookup,
        pivots,
        pivot_lookup,
        files,
        functions,
        graphs,
        edge_postings,
        name_postings,
        fn_name_postings,
        token_postings,
        meta,
    })
}
