//! Observed data: sparse symmetric weighted interactions plus node attributes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const EDGE_FILE: &str = "edges.txt";
pub const ATTR_FILE: &str = "attributes.csv";

/// A sparse symmetric weighted network with node attributes and optional
/// ground-truth labels.
///
/// Interactions are stored as the upper triangle (`i < j`, no self-loops);
/// the presence matrix is implicit (`A_ij = 1(X_ij != 0)`). A per-node
/// adjacency index supports `O(deg)` row scans.
#[derive(Debug, Clone)]
pub struct Dataset {
    n: usize,
    attr_dim: usize,
    edges: Vec<(u32, u32, f64)>,
    adj_offsets: Vec<usize>,
    adj: Vec<(u32, f64)>,
    y: Vec<f64>,
    z_true: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(
        n: usize,
        attr_dim: usize,
        mut edges: Vec<(u32, u32, f64)>,
        y: Vec<f64>,
        z_true: Option<Vec<usize>>,
    ) -> Result<Self> {
        if y.len() != n * attr_dim {
            return Err(Error::Validation(format!(
                "attribute array has {} values, expected n*d = {}",
                y.len(),
                n * attr_dim
            )));
        }
        if let Some(z) = &z_true {
            if z.len() != n {
                return Err(Error::Validation(format!(
                    "label vector has length {}, expected {n}",
                    z.len()
                )));
            }
        }
        for &(i, j, w) in &edges {
            if i == j {
                return Err(Error::Validation(format!("self-loop on node {i}")));
            }
            if i > j {
                return Err(Error::Validation(format!(
                    "edge ({i}, {j}) not in upper-triangle order"
                )));
            }
            if j as usize >= n {
                return Err(Error::Validation(format!("edge ({i}, {j}) out of range for n={n}")));
            }
            if w == 0.0 || !w.is_finite() {
                return Err(Error::Validation(format!(
                    "edge ({i}, {j}) has unsupported weight {w}"
                )));
            }
        }
        edges.sort_unstable_by_key(|&(i, j, _)| (i, j));
        if edges.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::Validation("duplicate edge".into()));
        }

        let mut deg = vec![0usize; n];
        for &(i, j, _) in &edges {
            deg[i as usize] += 1;
            deg[j as usize] += 1;
        }
        let mut adj_offsets = vec![0usize; n + 1];
        for i in 0..n {
            adj_offsets[i + 1] = adj_offsets[i] + deg[i];
        }
        let mut cursor = adj_offsets.clone();
        let mut adj = vec![(0u32, 0.0f64); adj_offsets[n]];
        for &(i, j, w) in &edges {
            adj[cursor[i as usize]] = (j, w);
            cursor[i as usize] += 1;
            adj[cursor[j as usize]] = (i, w);
            cursor[j as usize] += 1;
        }

        Ok(Dataset { n, attr_dim, edges, adj_offsets, adj, y, z_true })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn attr_dim(&self) -> usize {
        self.attr_dim
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Upper-triangle edges `(i, j, weight)` sorted lexicographically.
    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    /// Neighbors of `i` with edge weights, sorted by neighbor index.
    #[inline]
    pub fn neighbors(&self, i: usize) -> &[(u32, f64)] {
        &self.adj[self.adj_offsets[i]..self.adj_offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.adj_offsets[i + 1] - self.adj_offsets[i]
    }

    /// Attribute row of node `i`.
    #[inline]
    pub fn attr(&self, i: usize) -> &[f64] {
        &self.y[i * self.attr_dim..(i + 1) * self.attr_dim]
    }

    pub fn z_true(&self) -> Option<&[usize]> {
        self.z_true.as_deref()
    }

    /// Write `edges.txt` and `attributes.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_edges(&mut BufWriter::new(File::create(dir.join(EDGE_FILE))?))?;
        self.write_attributes(&mut BufWriter::new(File::create(dir.join(ATTR_FILE))?))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Self::from_files(&dir.join(EDGE_FILE), &dir.join(ATTR_FILE))
    }

    pub fn from_files(edges_path: &Path, attrs_path: &Path) -> Result<Self> {
        let (n, edges) = read_edges(edges_path)?;
        let (rows, attr_dim, labels) = read_attributes(attrs_path)?;
        if rows.len() / attr_dim.max(1) != n || rows.len() != n * attr_dim {
            return Err(Error::Validation(format!(
                "attribute file has {} rows, edge header says n={n}",
                rows.len() / attr_dim.max(1)
            )));
        }
        Dataset::new(n, attr_dim, edges, rows, labels)
    }

    pub fn write_edges<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# csbm-edges v1 n={}", self.n)?;
        for &(i, j, x) in &self.edges {
            writeln!(w, "{i} {j} {x}")?;
        }
        Ok(())
    }

    pub fn write_attributes<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut header: Vec<String> = (0..self.attr_dim).map(|d| format!("y{d}")).collect();
        if self.z_true.is_some() {
            header.push("label".into());
        }
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.n {
            let mut fields: Vec<String> = self.attr(i).iter().map(|v| v.to_string()).collect();
            if let Some(z) = &self.z_true {
                fields.push(z[i].to_string());
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Parse an edge file. Returns the declared node count and the edge list.
#[allow(clippy::type_complexity)]
pub fn read_edges(path: &Path) -> Result<(usize, Vec<(u32, u32, f64)>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty edge file".into() })?;
    let first = first?;
    let n = parse_edge_header(&first)
        .ok_or_else(|| Error::Parse { line: 1, msg: format!("bad header {first:?}") })?;

    let mut edges = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (i, j, w) = match (it.next(), it.next(), it.next(), it.next()) {
            (Some(i), Some(j), Some(w), None) => (i, j, w),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected \"i j w\", got {line:?}"),
                })
            }
        };
        let parse_u32 = |s: &str| {
            s.parse::<u32>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad node index {s:?}"),
            })
        };
        let i = parse_u32(i)?;
        let j = parse_u32(j)?;
        let w: f64 = w.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad weight {w:?}"),
        })?;
        if i == j {
            return Err(Error::Parse { line: lineno, msg: format!("self-loop on node {i}") });
        }
        if i > j {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("edge ({i}, {j}) must be listed with i < j"),
            });
        }
        if j as usize >= n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("node {j} out of range for n={n}"),
            });
        }
        edges.push((i, j, w));
    }
    Ok((n, edges))
}

fn parse_edge_header(line: &str) -> Option<usize> {
    let rest = line.strip_prefix("# csbm-edges v1")?.trim();
    rest.strip_prefix("n=")?.parse().ok()
}

/// Parse an attribute CSV. Returns the flat row-major attribute array, the
/// attribute dimension, and labels when a final `label` column is present.
#[allow(clippy::type_complexity)]
pub fn read_attributes(path: &Path) -> Result<(Vec<f64>, usize, Option<Vec<usize>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty attribute file".into() })?;
    let header = header?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let has_labels = cols.last() == Some(&"label");
    let attr_dim = cols.len() - usize::from(has_labels);
    if attr_dim == 0 {
        return Err(Error::Parse { line: 1, msg: "no attribute columns".into() });
    }

    let mut y = Vec::new();
    let mut labels = if has_labels { Some(Vec::new()) } else { None };
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {} fields, got {}", cols.len(), fields.len()),
            });
        }
        for f in &fields[..attr_dim] {
            let v: f64 = f.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad attribute value {f:?}"),
            })?;
            y.push(v);
        }
        if let Some(ls) = labels.as_mut() {
            let l: usize = fields[attr_dim].trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad label {:?}", fields[attr_dim]),
            })?;
            ls.push(l);
        }
    }
    Ok((y, attr_dim, labels))
}
