//! WordNet database loader and path similarity.
//!
//! Reads the Princeton database files (`index.*`, `data.*`, `*.exc`) for
//! nouns and, when present, verbs. Hypernym and instance-hypernym pointers
//! form the graph; every synset without a hypernym hangs off one virtual
//! root, so any two synsets are connected.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

#[derive(Debug, thiserror::Error)]
pub enum WordNetError {
    #[error("missing WordNet file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt WordNet file {}, line {line}: {message}", path.display())]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("hypernym cycle through synset {0}")]
    Cycle(SynsetId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartOfSpeech {
    Noun,
    Verb,
}

impl PartOfSpeech {
    fn from_char(c: &str) -> Option<Self> {
        match c {
            "n" => Some(PartOfSpeech::Noun),
            "v" => Some(PartOfSpeech::Verb),
            _ => None,
        }
    }

    fn file_suffix(self) -> &'static str {
        match self {
            PartOfSpeech::Noun => "noun",
            PartOfSpeech::Verb => "verb",
        }
    }
}

/// A synset, identified by part of speech and byte offset in its data file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetId {
    pub pos: PartOfSpeech,
    pub offset: u32,
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.pos {
            PartOfSpeech::Noun => 'n',
            PartOfSpeech::Verb => 'v',
        };
        write!(f, "{p}{:08}", self.offset)
    }
}

/// Path similarity in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

const NOUN_DETACHMENTS: [(&str, &str); 8] = [
    ("s", ""),
    ("ses", "s"),
    ("xes", "x"),
    ("zes", "z"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("men", "man"),
    ("ies", "y"),
];

pub struct WordNetGraph {
    ids: Vec<SynsetId>,
    node_of: HashMap<SynsetId, u32>,
    hypernyms: Vec<Vec<u32>>,
    /// Undirected adjacency; the extra last node is the virtual root.
    adjacency: Vec<Vec<u32>>,
    lemmas: HashMap<String, Vec<u32>>,
    exceptions: HashMap<String, Vec<String>>,
    cache: Mutex<HashMap<(String, String), f64>>,
}

impl fmt::Debug for WordNetGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WordNetGraph")
            .field("synsets", &self.ids.len())
            .field("lemmas", &self.lemmas.len())
            .finish()
    }
}

fn read_file(path: &Path) -> Result<String, WordNetError> {
    match std::fs::read(path) {
        Ok(bytes) => Ok(String::from_utf8_lossy(&bytes).into_owned()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(WordNetError::MissingFile(path.to_path_buf())),
        Err(source) => Err(WordNetError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}

/// Non-header lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with("  ") && !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
}

struct Builder {
    ids: Vec<SynsetId>,
    node_of: HashMap<SynsetId, u32>,
    raw_hypernyms: Vec<Vec<SynsetId>>,
    lemmas: HashMap<String, Vec<u32>>,
}

impl Builder {
    fn load_data(&mut self, path: &Path, pos: PartOfSpeech) -> Result<(), WordNetError> {
        let text = read_file(path)?;
        for (line, record) in records(&text) {
            let corrupt = |message: String| WordNetError::Corrupt {
                path: path.to_path_buf(),
                line,
                message,
            };
            let body = record.split('|').next().unwrap_or("");
            let f: Vec<&str> = body.split_whitespace().collect();
            let field = |i: usize| {
                f.get(i)
                    .copied()
                    .ok_or_else(|| corrupt(format!("record ends early at field {i}")))
            };
            let offset: u32 = field(0)?.parse().map_err(|_| corrupt("bad synset offset".into()))?;
            let w_cnt = usize::from_str_radix(field(3)?, 16).map_err(|_| corrupt("bad word count".into()))?;
            let p_at = 4 + 2 * w_cnt;
            let p_cnt: usize = field(p_at)?.parse().map_err(|_| corrupt("bad pointer count".into()))?;
            let mut hyper = Vec::new();
            for k in 0..p_cnt {
                let base = p_at + 1 + 4 * k;
                let symbol = field(base)?;
                if symbol == "@" || symbol == "@i" {
                    let target: u32 = field(base + 1)?
                        .parse()
                        .map_err(|_| corrupt("bad pointer offset".into()))?;
                    let tpos = PartOfSpeech::from_char(field(base + 2)?)
                        .ok_or_else(|| corrupt("hypernym into unsupported part of speech".into()))?;
                    hyper.push(SynsetId {
                        pos: tpos,
                        offset: target,
                    });
                }
            }
            let id = SynsetId { pos, offset };
            if self.node_of.contains_key(&id) {
                return Err(corrupt(format!("duplicate synset {id}")));
            }
            self.node_of.insert(id, self.ids.len() as u32);
            self.ids.push(id);
            self.raw_hypernyms.push(hyper);
        }
        Ok(())
    }

    fn load_index(&mut self, path: &Path, pos: PartOfSpeech) -> Result<(), WordNetError> {
        let text = read_file(path)?;
        for (line, record) in records(&text) {
            let corrupt = |message: String| WordNetError::Corrupt {
                path: path.to_path_buf(),
                line,
                message,
            };
            let f: Vec<&str> = record.split_whitespace().collect();
            if f.len() < 4 {
                return Err(corrupt("record too short".into()));
            }
            let synset_cnt: usize = f[2].parse().map_err(|_| corrupt("bad synset count".into()))?;
            let p_cnt: usize = f[3].parse().map_err(|_| corrupt("bad pointer count".into()))?;
            let first = 4 + p_cnt + 2;
            if f.len() != first + synset_cnt || synset_cnt == 0 {
                return Err(corrupt(format!(
                    "expected {synset_cnt} synset offsets, found {}",
                    f.len().saturating_sub(first)
                )));
            }
            let entry = self.lemmas.entry(f[0].to_lowercase()).or_default();
            for off in &f[first..] {
                let offset: u32 = off.parse().map_err(|_| corrupt(format!("bad offset `{off}`")))?;
                let id = SynsetId { pos, offset };
                let node = *self
                    .node_of
                    .get(&id)
                    .ok_or_else(|| corrupt(format!("unknown synset {id}")))?;
                if !entry.contains(&node) {
                    entry.push(node);
                }
            }
        }
        Ok(())
    }
}

fn load_exceptions(path: &Path) -> Result<HashMap<String, Vec<String>>, WordNetError> {
    let text = read_file(path)?;
    let mut out: HashMap<String, Vec<String>> = HashMap::new();
    for (line, record) in records(&text) {
        let mut f = record.split_whitespace();
        let (Some(form), Some(base)) = (f.next(), f.next()) else {
            return Err(WordNetError::Corrupt {
                path: path.to_path_buf(),
                line,
                message: "exception line needs a form and at least one base".into(),
            });
        };
        let bases = out.entry(form.to_string()).or_default();
        bases.push(base.to_string());
        bases.extend(f.map(str::to_string));
    }
    Ok(out)
}

impl WordNetGraph {
    /// Loads `index.noun`, `data.noun` and `noun.exc` (required) plus
    /// `index.verb` / `data.verb` when both exist.
    pub fn load(dir: &Path) -> Result<Self, WordNetError> {
        let mut b = Builder {
            ids: Vec::new(),
            node_of: HashMap::new(),
            raw_hypernyms: Vec::new(),
            lemmas: HashMap::new(),
        };
        b.load_data(&dir.join("data.noun"), PartOfSpeech::Noun)?;
        b.load_index(&dir.join("index.noun"), PartOfSpeech::Noun)?;
        let exceptions = load_exceptions(&dir.join("noun.exc"))?;

        let verb = PartOfSpeech::Verb;
        let (vi, vd) = (
            dir.join(format!("index.{}", verb.file_suffix())),
            dir.join(format!("data.{}", verb.file_suffix())),
        );
        if vi.exists() && vd.exists() {
            b.load_data(&vd, verb)?;
            b.load_index(&vi, verb)?;
        } else {
            log::warn!("no verb files in {}; loading nouns only", dir.display());
        }

        let n = b.ids.len();
        let mut hypernyms = Vec::with_capacity(n);
        for (i, raw) in b.raw_hypernyms.iter().enumerate() {
            let mut hs = Vec::with_capacity(raw.len());
            for target in raw {
                let node = b.node_of.get(target).ok_or_else(|| WordNetError::Corrupt {
                    path: dir.join(format!("data.{}", b.ids[i].pos.file_suffix())),
                    line: 0,
                    message: format!("synset {} points at unknown hypernym {target}", b.ids[i]),
                })?;
                hs.push(*node);
            }
            hypernyms.push(hs);
        }
        let nouns_only: Vec<Vec<u32>> = b
            .ids
            .iter()
            .zip(&hypernyms)
            .map(|(id, hs)| {
                if id.pos == PartOfSpeech::Noun {
                    hs.clone()
                } else {
                    Vec::new()
                }
            })
            .collect();
        check_acyclic(&nouns_only, &b.ids)?;
        if let Err(WordNetError::Cycle(at)) = check_acyclic(&hypernyms, &b.ids) {
            // WordNet 3.0 ships one verb cycle; distances are undirected, so it is harmless
            log::info!("verb hypernym cycle through synset {at}");
        }

        let root = n as u32;
        let mut adjacency = vec![Vec::new(); n + 1];
        for (i, hs) in hypernyms.iter().enumerate() {
            if hs.is_empty() {
                adjacency[i].push(root);
                adjacency[n].push(i as u32);
            }
            for &h in hs {
                adjacency[i].push(h);
                adjacency[h as usize].push(i as u32);
            }
        }

        attach_orphan_components(&mut adjacency);

        Ok(WordNetGraph {
            ids: b.ids,
            node_of: b.node_of,
            hypernyms,
            adjacency,
            lemmas: b.lemmas,
            exceptions,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn synset_count(&self) -> usize {
        self.ids.len()
    }

    pub fn synsets(&self) -> &[SynsetId] {
        &self.ids
    }

    pub fn lemma_count(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_indexed(&self, lemma: &str) -> bool {
        self.lemmas.contains_key(lemma)
    }

    pub fn synsets_of(&self, lemma: &str) -> Vec<SynsetId> {
        self.lemmas
            .get(lemma)
            .map(|nodes| nodes.iter().map(|&n| self.ids[n as usize]).collect())
            .unwrap_or_default()
    }

    pub fn hypernyms(&self, id: SynsetId) -> Vec<SynsetId> {
        self.node_of
            .get(&id)
            .map(|&n| {
                self.hypernyms[n as usize]
                    .iter()
                    .map(|&h| self.ids[h as usize])
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Base forms of `word` found in the lemma index, or `{word}` if none.
    pub fn lemmatize(&self, word: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if self.is_indexed(word) {
            out.insert(word.to_string());
        }
        if let Some(bases) = self.exceptions.get(word) {
            out.extend(bases.iter().filter(|b| self.is_indexed(b)).cloned());
        } else {
            for (suffix, replacement) in NOUN_DETACHMENTS {
                if let Some(stem) = word.strip_suffix(suffix) {
                    let cand = format!("{stem}{replacement}");
                    if !cand.is_empty() && self.is_indexed(&cand) {
                        out.insert(cand);
                    }
                }
            }
        }
        if out.is_empty() {
            out.insert(word.to_string());
        }
        out
    }

    fn nodes_for(&self, word: &str) -> Vec<u32> {
        let mut nodes: Vec<u32> = self
            .lemmatize(word)
            .iter()
            .filter_map(|l| self.lemmas.get(l))
            .flatten()
            .copied()
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Fewest undirected edges from any node in `from` to any node in `to`.
    fn bfs_distance(&self, from: &[u32], to: &[u32]) -> Option<usize> {
        let total = self.adjacency.len();
        let mut is_target = vec![false; total];
        for &t in to {
            is_target[t as usize] = true;
        }
        let mut dist = vec![u32::MAX; total];
        let mut queue = VecDeque::new();
        for &s in from {
            if is_target[s as usize] {
                return Some(0);
            }
            dist[s as usize] = 0;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &self.adjacency[u as usize] {
                if dist[v as usize] == u32::MAX {
                    if is_target[v as usize] {
                        return Some(du as usize + 1);
                    }
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Shortest path length between two synsets (virtual root included).
    pub fn distance(&self, a: SynsetId, b: SynsetId) -> Option<usize> {
        let (&na, &nb) = (self.node_of.get(&a)?, self.node_of.get(&b)?);
        self.bfs_distance(&[na], &[nb])
    }

    /// Max over sense pairs of `1 / (1 + shortest path)`.
    ///
    /// Words with no synsets (after lemmatization) score 1 against an
    /// identical string and 0 otherwise.
    pub fn path_similarity(&self, w1: &str, w2: &str) -> SimilarityScore {
        let key = if w1 <= w2 {
            (w1.to_string(), w2.to_string())
        } else {
            (w2.to_string(), w1.to_string())
        };
        if let Some(&v) = self.cache.lock().expect("similarity cache poisoned").get(&key) {
            return SimilarityScore(v);
        }
        let (a, b) = (&key.0, &key.1);
        let na = self.nodes_for(a);
        let nb = self.nodes_for(b);
        let value = if na.is_empty() || nb.is_empty() {
            if a == b {
                1.0
            } else {
                0.0
            }
        } else {
            match self.bfs_distance(&na, &nb) {
                Some(d) => 1.0 / (1.0 + d as f64),
                None => 0.0,
            }
        };
        self.cache.lock().expect("similarity cache poisoned").insert(key, value);
        SimilarityScore(value)
    }
}

/// Links each component that cannot reach the root (a hypernym cycle with no
/// exit) to the root through its first node.
fn attach_orphan_components(adjacency: &mut [Vec<u32>]) {
    let root = adjacency.len() - 1;
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::new();
    for start in std::iter::once(root).chain(0..root) {
        if seen[start] {
            continue;
        }
        if start != root {
            adjacency[start].push(root as u32);
            adjacency[root].push(start as u32);
        }
        seen[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v as usize);
                }
            }
        }
    }
}

fn check_acyclic(hypernyms: &[Vec<u32>], ids: &[SynsetId]) -> Result<(), WordNetError> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; hypernyms.len()];
    for start in 0..hypernyms.len() {
        if state[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        state[start] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&h) = hypernyms[node].get(*next) {
                *next += 1;
                match state[h as usize] {
                    0 => {
                        state[h as usize] = 1;
                        stack.push((h as usize, 0));
                    }
                    1 => return Err(WordNetError::Cycle(ids[h as usize])),
                    _ => {}
                }
            } else {
                state[node] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}
