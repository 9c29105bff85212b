//! Text formats for hyperedge lists, inter-edge lists, ground truth,
//! dense matrices and run manifests.
//!
//! All formats are UTF-8, whitespace separated, with `#` comment lines.
//!
//! * hyperedges: `weight id id id …` (at least two ids)
//! * inter-edges: `layer_a layer_b i j weight`
//! * ground truth: `node_id community_id`
//! * matrices: CSV, one row per line, 17 significant digits
//! * manifest: `key = value` lines

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, HypergraphLayer, InterEdge, InterEdgeSet, MultiHypergraph};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_hyperedge_file(path: impl AsRef<Path>, num_nodes: Option<usize>) -> Result<HypergraphLayer> {
    let path = path.as_ref();
    parse_hyperedges(&read_text(path)?, path, num_nodes)
}

/// Parses hyperedge-list text; `origin` only labels error messages.
pub fn parse_hyperedges(text: &str, origin: &Path, num_nodes: Option<usize>) -> Result<HypergraphLayer> {
    let mut edges = Vec::new();
    let mut max_id = None::<usize>;
    for (line_no, line) in data_lines(text) {
        let mut fields = line.split_whitespace();
        let weight: f64 = fields
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| Error::parse(origin, line_no, "weight is not a number"))?;
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::parse(origin, line_no, format!("negative or non-finite weight {weight}")));
        }
        let ids = fields
            .map(|f| f.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(origin, line_no, "node id is not a non-negative integer"))?;
        if ids.len() < 2 {
            return Err(Error::parse(origin, line_no, format!("hyperedge of size {} < 2", ids.len())));
        }
        if let Some(n) = num_nodes {
            if let Some(&bad) = ids.iter().find(|&&v| v >= n) {
                return Err(Error::parse(origin, line_no, format!("node id {bad} >= declared node count {n}")));
            }
        }
        max_id = max_id.max(ids.iter().copied().max());
        let e = Hyperedge::new(ids, weight).map_err(|e| Error::parse(origin, line_no, e.to_string()))?;
        edges.push(e);
    }
    let n = match (num_nodes, max_id) {
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => {
            return Err(Error::parse(origin, 0, "no hyperedges and no declared node count"));
        }
    };
    HypergraphLayer::new(n, edges)
}

pub fn parse_inter_edge_file(path: impl AsRef<Path>) -> Result<Vec<InterEdgeSet>> {
    let path = path.as_ref();
    parse_inter_edges(&read_text(path)?, path)
}

pub fn parse_inter_edges(text: &str, origin: &Path) -> Result<Vec<InterEdgeSet>> {
    let mut by_pair: BTreeMap<(usize, usize), Vec<InterEdge>> = BTreeMap::new();
    for (line_no, line) in data_lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected `layer_a layer_b i j weight`, got {} fields", fields.len()),
            ));
        }
        let idx = |k: usize| {
            fields[k]
                .parse::<usize>()
                .map_err(|_| Error::parse(origin, line_no, format!("field {} is not an index", k + 1)))
        };
        let (la, lb, i, j) = (idx(0)?, idx(1)?, idx(2)?, idx(3)?);
        let weight: f64 = fields[4]
            .parse()
            .map_err(|_| Error::parse(origin, line_no, "weight is not a number"))?;
        if la == lb {
            return Err(Error::parse(origin, line_no, format!("self-pair: layer {la} to itself")));
        }
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::parse(origin, line_no, format!("negative or non-finite weight {weight}")));
        }
        let (key, edge) = if la < lb {
            ((la, lb), InterEdge { i, j, weight })
        } else {
            ((lb, la), InterEdge { i: j, j: i, weight })
        };
        by_pair.entry(key).or_default().push(edge);
    }
    by_pair
        .into_iter()
        .map(|((a, b), edges)| InterEdgeSet::new(a, b, edges))
        .collect()
}

pub fn parse_ground_truth_file(path: impl AsRef<Path>) -> Result<BTreeMap<usize, usize>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut truth = BTreeMap::new();
    for (line_no, line) in data_lines(&text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [n, c] => n.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
            _ => None,
        };
        let (node, comm) = parsed.ok_or_else(|| Error::parse(path, line_no, "expected `node_id community_id`"))?;
        if truth.insert(node, comm).is_some() {
            return Err(Error::parse(path, line_no, format!("node {node} labeled twice")));
        }
    }
    Ok(truth)
}

/// Formats a float with 17 significant digits, shortest form that still
/// round-trips exactly (`0`, `1`, `0.1`, `1e-300`, ...).
pub fn format_float(x: f64) -> String {
    // Both `{}` and `{:e}` print the shortest digits that parse back exactly.
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Array2<f64>) -> Result<()> {
    let path = path.as_ref();
    if let Some(bad) = m.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("matrix entry {bad} is not finite")));
    }
    write_text(path, &matrix_to_csv(m))
}

pub fn matrix_to_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(path, line_no + 1, "cell is not a number"))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(path, line_no + 1, "ragged matrix row"));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))
}

pub fn hyperedges_to_string(layer: &HypergraphLayer) -> String {
    let mut out = String::new();
    for e in layer.hyperedges() {
        let _ = write!(out, "{}", format_float(e.weight()));
        for v in e.nodes() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_hyperedge_file(path: impl AsRef<Path>, layer: &HypergraphLayer) -> Result<()> {
    write_text(path.as_ref(), &hyperedges_to_string(layer))
}

pub fn inter_edges_to_string(sets: &[InterEdgeSet]) -> String {
    let mut out = String::new();
    for s in sets {
        for e in s.edges() {
            let _ = writeln!(out, "{} {} {} {} {}", s.layer_a(), s.layer_b(), e.i, e.j, format_float(e.weight));
        }
    }
    out
}

pub fn write_inter_edge_file(path: impl AsRef<Path>, sets: &[InterEdgeSet]) -> Result<()> {
    write_text(path.as_ref(), &inter_edges_to_string(sets))
}

pub fn write_ground_truth_file(path: impl AsRef<Path>, truth: &BTreeMap<usize, usize>) -> Result<()> {
    let mut out = String::new();
    for (n, c) in truth {
        let _ = writeln!(out, "{n} {c}");
    }
    write_text(path.as_ref(), &out)
}

/// Flat `key = value` configuration. Keys are kept sorted so that writing a
/// manifest back is deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: BTreeMap<String, String>,
    base_dir: PathBuf,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut m = Self::parse(&read_text(path)?, path)?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (line_no, line) in data_lines(text) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, line_no, "expected `key = value`"))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::parse(origin, line_no, "empty key"));
            }
            entries.insert(key.to_string(), v.trim().to_string());
        }
        Ok(Manifest {
            entries,
            base_dir: PathBuf::new(),
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.insert(key.into(), value.to_string());
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Manifest(format!("cannot parse `{key} = {v}`"))),
        }
    }

    /// Resolves a path value relative to the manifest's directory.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|v| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                self.base_dir.join(p)
            }
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_text())
    }

    /// Number of layers: the explicit `layers` key, or the count of
    /// consecutive `layer.<i>.edges` keys.
    pub fn num_layers(&self) -> Result<usize> {
        if let Some(n) = self.get_parsed::<usize>("layers")? {
            return Ok(n);
        }
        Ok((0..).take_while(|i| self.get(&format!("layer.{i}.edges")).is_some()).count())
    }

    /// Per-layer community counts from `layer.<i>.k`, if all are present.
    pub fn k_per_layer(&self) -> Result<Option<Vec<usize>>> {
        let n = self.num_layers()?;
        let ks = (0..n)
            .map(|i| self.get_parsed::<usize>(&format!("layer.{i}.k")))
            .collect::<Result<Vec<_>>>()?;
        Ok(ks.into_iter().collect())
    }

    /// Loads every layer (with optional `layer.<i>.nodes` and
    /// `layer.<i>.truth`) and the optional `inter_edges` file.
    pub fn load_multi_hypergraph(&self) -> Result<MultiHypergraph> {
        let n = self.num_layers()?;
        if n == 0 {
            return Err(Error::Manifest("no `layer.0.edges` entry".into()));
        }
        let mut layers = Vec::with_capacity(n);
        for i in 0..n {
            let edges = self
                .path(&format!("layer.{i}.edges"))
                .ok_or_else(|| Error::Manifest(format!("missing `layer.{i}.edges`")))?;
            let nodes = self.get_parsed::<usize>(&format!("layer.{i}.nodes"))?;
            let mut layer = parse_hyperedge_file(&edges, nodes)?;
            if let Some(truth_path) = self.path(&format!("layer.{i}.truth")) {
                let truth = parse_ground_truth_file(&truth_path)?;
                // Truth may mention isolated nodes beyond the largest hyperedge id.
                let max_truth = truth.keys().next_back().map_or(0, |&m| m + 1);
                if nodes.is_none() && max_truth > layer.num_nodes() {
                    layer = HypergraphLayer::new(max_truth, layer.hyperedges().to_vec())?;
                }
                layer = layer.with_ground_truth(truth)?;
            }
            layers.push(layer);
        }
        let inter = match self.path("inter_edges") {
            Some(p) => parse_inter_edge_file(p)?,
            None => Vec::new(),
        };
        MultiHypergraph::new(layers, inter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn parse(text: &str) -> Result<HypergraphLayer> {
        parse_hyperedges(text, Path::new("<test>"), None)
    }

    #[test]
    fn parses_weighted_hyperedges() {
        let layer = parse("1 0 1 2\n2 0 1").unwrap();
        assert_eq!(layer.num_nodes(), 3);
        let got: Vec<_> = layer
            .hyperedges()
            .iter()
            .map(|e| (e.nodes().to_vec(), e.weight()))
            .collect();
        assert_eq!(got, vec![(vec![0, 1], 2.0), (vec![0, 1, 2], 1.0)]);
    }

    #[test]
    fn merges_duplicates_in_any_order() {
        let layer = parse("1 0 1\n1 1 0").unwrap();
        assert_eq!(layer.hyperedges().len(), 1);
        assert_eq!(layer.hyperedges()[0].weight(), 2.0);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse("# header\n1 0 1\n1 0").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("size 1"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("x 0 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("-1 0 1"), Err(Error::Parse { .. })));
        assert!(matches!(parse("1 0 0"), Err(Error::Parse { .. })));
        let bounded = parse_hyperedges("1 0 5", Path::new("t"), Some(5));
        assert!(matches!(bounded, Err(Error::Parse { .. })));
    }

    #[test]
    fn inter_edges_normalize_and_reject_self_pairs() {
        let a = parse_inter_edges("0 1 3 7 1.0", Path::new("t")).unwrap();
        let b = parse_inter_edges("1 0 7 3 1.0", Path::new("t")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].edges(), &[InterEdge { i: 3, j: 7, weight: 1.0 }]);
        assert!(parse_inter_edges("0 0 1 2 1.0", Path::new("t")).is_err());
        assert!(parse_inter_edges("0 1 1 2 -1", Path::new("t")).is_err());
        assert!(parse_inter_edges("0 1 1 2", Path::new("t")).is_err());
        let merged = parse_inter_edges("0 1 1 2 1\n1 0 2 1 0.5", Path::new("t")).unwrap();
        assert_eq!(merged[0].edges()[0].weight, 1.5);
    }

    #[test]
    fn matrix_csv_format() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        write_matrix(&p, &array![[0.0]]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "0\n");
        write_matrix(&p, &array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "1,0\n0,1\n");
        let m = array![[0.1, 1.0 / 3.0], [2.5e-300, 123456789.12345679]];
        write_matrix(&p, &m).unwrap();
        assert_eq!(read_matrix(&p).unwrap(), m);
        assert!(write_matrix(&p, &array![[f64::NAN]]).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let text = "# run\nlayer.0.edges = a.txt\nlayer.0.k = 3\nlayer.1.edges = b.txt\nlayer.1.k=2\n";
        let m = Manifest::parse(text, Path::new("m")).unwrap();
        assert_eq!(m.num_layers().unwrap(), 2);
        assert_eq!(m.k_per_layer().unwrap(), Some(vec![3, 2]));
        let again = Manifest::parse(&m.to_text(), Path::new("m")).unwrap();
        assert_eq!(again.entries().collect::<Vec<_>>(), m.entries().collect::<Vec<_>>());
        assert!(Manifest::parse("novalue", Path::new("m")).is_err());
    }
}
