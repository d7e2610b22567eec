//! Text formats: edge lists, state CSVs and JSON lines of posterior samples.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use netrecon_core::dynamics::StateMatrix;
use netrecon_core::inference::GraphSample;
use netrecon_core::Adjacency;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] netrecon_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| IoError::File {
        path: path.to_owned(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| IoError::File {
            path: dir.to_owned(),
            source,
        })?;
    }
    File::create(path).map(BufWriter::new).map_err(|source| IoError::File {
        path: path.to_owned(),
        source,
    })
}

/// Writes `contents` next to `path` and renames it into place, so readers
/// never see a half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    let mut w = create(&tmp)?;
    w.write_all(contents)?;
    w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    fs::rename(&tmp, path).map_err(|source| IoError::File {
        path: path.to_owned(),
        source,
    })
}

/// One `u v` line per edge (0-indexed, `u < v`), after a `# nodes N` header
/// that keeps isolated nodes.
pub fn write_edge_list<W: Write>(mut w: W, a: &Adjacency) -> Result<()> {
    writeln!(w, "# nodes {}", a.node_count())?;
    for (u, v) in a.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

/// Reads an edge list. The node count comes from `nodes`, else from a
/// `# nodes N` header, else from the largest index seen. Other `#` lines and
/// blank lines are skipped.
pub fn read_edge_list<R: BufRead>(r: R, nodes: Option<usize>) -> Result<Adjacency> {
    let mut header = None;
    let mut edges = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let parse_err = |message: String| IoError::Parse {
            line: k + 1,
            message,
        };
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("nodes") {
                header = Some(
                    n.trim()
                        .parse()
                        .map_err(|e| parse_err(format!("bad node count: {e}")))?,
                );
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next = || -> Result<usize> {
            let f = fields
                .next()
                .ok_or_else(|| parse_err("expected two node indices".into()))?;
            f.parse()
                .map_err(|e| parse_err(format!("bad node index {f:?}: {e}")))
        };
        let (u, v) = (next()?, next()?);
        if fields.next().is_some() {
            return Err(parse_err("trailing fields after the edge".into()));
        }
        edges.push((u.min(v), u.max(v)));
    }
    let n = nodes.or(header).unwrap_or_else(|| {
        edges
            .iter()
            .map(|&(_, v)| v + 1)
            .max()
            .unwrap_or(0)
    });
    Ok(Adjacency::from_edges(n, edges)?)
}

pub fn save_edge_list(path: &Path, a: &Adjacency) -> Result<()> {
    let mut w = create(path)?;
    write_edge_list(&mut w, a)?;
    w.flush()?;
    Ok(())
}

pub fn load_edge_list(path: &Path, nodes: Option<usize>) -> Result<Adjacency> {
    read_edge_list(open(path)?, nodes)
}

/// One CSV row per time step, one 0/1 column per node, no header.
pub fn write_states_csv<W: Write>(w: W, x: &StateMatrix) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in x.rows() {
        out.write_record(row.iter().map(|s| if *s == 1 { "1" } else { "0" }))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_states_csv<R: std::io::Read>(r: R) -> Result<StateMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| match f {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(IoError::Parse {
                    line: k + 1,
                    message: format!("state {other:?} is not 0 or 1"),
                }),
            })
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    Ok(StateMatrix::from_rows(&rows)?)
}

pub fn save_states_csv(path: &Path, x: &StateMatrix) -> Result<()> {
    write_states_csv(create(path)?, x)
}

pub fn load_states_csv(path: &Path) -> Result<StateMatrix> {
    read_states_csv(open(path)?)
}

/// A retained network as stored in the samples file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub chain: usize,
    pub step: u64,
    pub log_posterior: f64,
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SampleRecord {
    pub fn from_sample(s: &GraphSample) -> Self {
        Self {
            chain: s.chain,
            step: s.step,
            log_posterior: s.log_posterior,
            nodes: s.graph.node_count(),
            edges: s.graph.edges().collect(),
        }
    }

    pub fn graph(&self) -> Result<Adjacency> {
        Ok(Adjacency::from_edges(self.nodes, self.edges.iter().copied())?)
    }
}

pub fn write_samples_jsonl<'a, W, I>(mut w: W, samples: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a GraphSample>,
{
    for s in samples {
        serde_json::to_writer(&mut w, &SampleRecord::from_sample(s))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_jsonl<R: BufRead>(r: R) -> Result<Vec<SampleRecord>> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| IoError::Parse {
            line: k + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn save_samples_jsonl(path: &Path, samples: &[GraphSample]) -> Result<()> {
    write_samples_jsonl(create(path)?, samples)
}

pub fn load_samples_jsonl(path: &Path) -> Result<Vec<SampleRecord>> {
    read_samples_jsonl(open(path)?)
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn save_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_atomic(path, &bytes)
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}
