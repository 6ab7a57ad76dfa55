//! Reading and writing graphs and membership matrices.
//!
//! Edge lists are UTF-8, one `src<TAB>dst` pair per line (any whitespace
//! also separates fields when the line has no tab), with an optional third
//! weight column. Lines starting with `#` are comments, except the label
//! directives `#@nodes`, `#@rows` and `#@cols`, which list node labels in
//! order so that isolated nodes survive a round trip.
//!
//! Matrix Market input must be `coordinate` with `pattern`, `integer` or
//! `real` values that are all 0 or 1; labels become 1-based indices.

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use dimmsb_core::types::index_labels;
use dimmsb_core::{BiAdjacency, Matrix, MembershipMatrix};

pub use dimmsb_core::{common_submatrix, degree_filter, largest_weak_component, DegreeFilterOutcome};

use crate::error::{Error, Result};
use crate::provenance::Provenance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    MatrixMarket,
}

impl GraphFormat {
    /// `.mtx` and `.mm` are Matrix Market; anything else is an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("mtx") | Some("mm") => GraphFormat::MatrixMarket,
            _ => GraphFormat::EdgeList,
        }
    }
}

impl FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tsv" | "edge-list" | "edgelist" => Ok(GraphFormat::EdgeList),
            "mtx" | "matrix-market" => Ok(GraphFormat::MatrixMarket),
            other => Err(format!("unknown graph format '{other}' (use tsv or mtx)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    /// Rows and columns share one label universe.
    pub square: bool,
    /// Reject weights other than 0 and 1; otherwise any nonzero weight is an edge.
    pub strict_binary: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { square: true, strict_binary: true }
    }
}

#[derive(Default)]
struct LabelIndex {
    labels: Vec<String>,
    position: HashMap<String, usize>,
}

impl LabelIndex {
    fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.position.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.position.insert(label.to_string(), i);
        i
    }
}

fn fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).filter(|f| !f.is_empty()).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// `Some(true)` for an edge, `Some(false)` for an explicit zero.
fn edge_weight(token: &str, line: usize, strict: bool) -> Result<bool> {
    let value: f64 = token.parse().map_err(|_| Error::parse(line, format!("bad weight '{token}'")))?;
    if value == 0.0 {
        Ok(false)
    } else if value == 1.0 || (!strict && value.is_finite()) {
        Ok(true)
    } else {
        Err(Error::NonBinaryWeight { line, value: token.to_string() })
    }
}

pub fn parse_edge_list(text: &str, opts: &LoadOptions) -> Result<BiAdjacency> {
    let mut rows = LabelIndex::default();
    let mut cols = LabelIndex::default();
    let mut edges = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        if let Some(directive) = line.strip_prefix("#@") {
            let mut parts = fields(directive).into_iter();
            let kind = parts.next().unwrap_or("");
            let (to_rows, to_cols) = match kind {
                "nodes" => (true, true),
                "rows" => (true, opts.square),
                "cols" => (opts.square, true),
                _ => (false, false),
            };
            for label in parts {
                if to_rows {
                    rows.intern(label);
                }
                if to_cols {
                    cols.intern(label);
                }
            }
            continue;
        }
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let f = fields(line);
        if f.len() != 2 && f.len() != 3 {
            return Err(Error::parse(line_no, format!("expected 'src dst [weight]', found {} fields", f.len())));
        }
        let present = match f.get(2) {
            Some(w) => edge_weight(w, line_no, opts.strict_binary)?,
            None => true,
        };
        let (i, j) = if opts.square {
            let i = rows.intern(f[0]);
            cols.intern(f[0]);
            let j = rows.intern(f[1]);
            cols.intern(f[1]);
            (i, j)
        } else {
            (rows.intern(f[0]), cols.intern(f[1]))
        };
        if present {
            edges.push((i, j));
        }
    }
    Ok(BiAdjacency::new(rows.labels.len(), cols.labels.len(), edges, rows.labels, cols.labels)?)
}

pub fn parse_matrix_market(text: &str, opts: &LoadOptions) -> Result<BiAdjacency> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim_end_matches('\r')));
    let (_, banner) = lines.next().ok_or_else(|| Error::parse(1, "missing %%MatrixMarket banner"))?;
    let banner: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if banner.len() != 5 || banner[0] != "%%matrixmarket" || banner[1] != "matrix" {
        return Err(Error::parse(1, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    if banner[2] != "coordinate" {
        return Err(Error::parse(1, format!("unsupported layout '{}', only coordinate", banner[2])));
    }
    let pattern = match banner[3].as_str() {
        "pattern" => true,
        "integer" | "real" => false,
        other => return Err(Error::parse(1, format!("unsupported field '{other}'"))),
    };
    let symmetric = match banner[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::parse(1, format!("unsupported symmetry '{other}'"))),
    };
    let mut content = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (size_line, size) = content.next().ok_or_else(|| Error::parse(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(size_line, format!("bad size token '{t}'"))))
        .collect::<Result<_>>()?;
    let [n_rows, n_cols, nnz] = dims[..] else {
        return Err(Error::parse(size_line, "size line needs 'rows cols entries'"));
    };
    if symmetric && n_rows != n_cols {
        return Err(Error::parse(size_line, "symmetric matrix must be square"));
    }
    let mut edges = Vec::with_capacity(nnz);
    let mut seen = 0;
    let mut last_line = size_line;
    for (line_no, line) in content {
        last_line = line_no;
        let f: Vec<&str> = line.split_whitespace().collect();
        let expected = if pattern { 2 } else { 3 };
        if f.len() != expected {
            return Err(Error::parse(line_no, format!("expected {expected} fields, found {}", f.len())));
        }
        let index = |t: &str, bound: usize| -> Result<usize> {
            let v: usize = t.parse().map_err(|_| Error::parse(line_no, format!("bad index '{t}'")))?;
            if v == 0 || v > bound {
                return Err(Error::parse(line_no, format!("index {v} outside 1..={bound}")));
            }
            Ok(v - 1)
        };
        let (i, j) = (index(f[0], n_rows)?, index(f[1], n_cols)?);
        seen += 1;
        let present = if pattern { true } else { edge_weight(f[2], line_no, opts.strict_binary)? };
        if present {
            edges.push((i, j));
            if symmetric && i != j {
                edges.push((j, i));
            }
        }
    }
    if seen != nnz {
        return Err(Error::parse(last_line, format!("header declares {nnz} entries, found {seen}")));
    }
    Ok(BiAdjacency::with_index_labels(n_rows, n_cols, edges)?)
}

pub fn parse_graph(text: &str, format: GraphFormat, opts: &LoadOptions) -> Result<BiAdjacency> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(text, opts),
        GraphFormat::MatrixMarket => parse_matrix_market(text, opts),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// True when an edge list declares separate `#@rows` or `#@cols` universes.
pub fn declares_rectangular(text: &str) -> bool {
    text.lines().any(|l| {
        l.strip_prefix("#@").and_then(|d| fields(d).into_iter().next()).is_some_and(|k| k == "rows" || k == "cols")
    })
}

pub fn load_edge_list(path: &Path, format: GraphFormat, opts: &LoadOptions) -> Result<BiAdjacency> {
    parse_graph(&read_text(path)?, format, opts)
}

fn check_label(label: &str) -> io::Result<()> {
    if label.is_empty() || label.starts_with('#') || label.contains(['\t', '\n', '\r']) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("label {label:?} cannot be written to an edge list"),
        ));
    }
    Ok(())
}

fn write_directive(out: &mut impl Write, name: &str, labels: &[String]) -> io::Result<()> {
    write!(out, "#@{name}")?;
    for l in labels {
        check_label(l)?;
        write!(out, "\t{l}")?;
    }
    writeln!(out)
}

pub fn write_edge_list(a: &BiAdjacency, out: &mut impl Write, provenance: Option<&Provenance>) -> io::Result<()> {
    if let Some(p) = provenance {
        out.write_all(p.render("#").as_bytes())?;
    }
    if a.is_square_aligned() {
        write_directive(out, "nodes", a.row_labels())?;
    } else {
        write_directive(out, "rows", a.row_labels())?;
        write_directive(out, "cols", a.col_labels())?;
    }
    for (i, j) in a.edges() {
        writeln!(out, "{}\t{}", a.row_labels()[i], a.col_labels()[j])?;
    }
    Ok(())
}

pub fn write_matrix_market(a: &BiAdjacency, out: &mut impl Write, provenance: Option<&Provenance>) -> io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate pattern general")?;
    if let Some(p) = provenance {
        out.write_all(p.render("%").as_bytes())?;
    }
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j) in a.edges() {
        writeln!(out, "{} {}", i + 1, j + 1)?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, result: io::Result<()>, mut out: BufWriter<fs::File>) -> Result<()> {
    result.and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn save_graph(path: &Path, a: &BiAdjacency, format: GraphFormat, provenance: Option<&Provenance>) -> Result<()> {
    let mut out = create(path)?;
    let res = match format {
        GraphFormat::EdgeList => write_edge_list(a, &mut out, provenance),
        GraphFormat::MatrixMarket => write_matrix_market(a, &mut out, provenance),
    };
    finish(path, res, out)
}

/// CSV with header `label,π_1,...,π_K`, preceded by `#` metadata lines.
/// Floats use the shortest representation that parses back exactly.
pub fn write_membership_csv(
    pi: &MembershipMatrix,
    out: &mut impl Write,
    provenance: Option<&Provenance>,
) -> Result<()> {
    if let Some(p) = provenance {
        out.write_all(p.render("#").as_bytes()).map_err(csv::Error::from)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string()];
    header.extend((1..=pi.k()).map(|c| format!("π_{c}")));
    w.write_record(&header)?;
    let labels = pi.labels().map(<[String]>::to_vec).unwrap_or_else(|| index_labels(pi.n()));
    for (i, label) in labels.iter().enumerate() {
        let mut record = vec![label.clone()];
        record.extend(pi.weights().row(i).iter().map(|x| x.to_string()));
        w.write_record(&record)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_membership_csv(input: impl Read) -> Result<MembershipMatrix> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("label") || header.len() < 2 {
        return Err(Error::parse(1, "membership header must be 'label,π_1,...,π_K'"));
    }
    let k = header.len() - 1;
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != k + 1 {
            return Err(Error::parse(line, format!("expected {} fields, found {}", k + 1, record.len())));
        }
        labels.push(record[0].to_string());
        for field in record.iter().skip(1) {
            values.push(field.trim().parse::<f64>().map_err(|_| Error::parse(line, format!("bad weight '{field}'")))?);
        }
    }
    let weights = Matrix::from_row_slice(labels.len(), k, &values);
    Ok(MembershipMatrix::new(weights)?.with_labels(labels)?)
}

pub fn save_membership(path: &Path, pi: &MembershipMatrix, provenance: Option<&Provenance>) -> Result<()> {
    let mut out = create(path)?;
    write_membership_csv(pi, &mut out, provenance)?;
    finish(path, Ok(()), out)
}

pub fn load_membership(path: &Path) -> Result<MembershipMatrix> {
    read_membership_csv(fs::File::open(path).map_err(|e| Error::io(path, e))?)
}

/// Plain numeric CSV, one matrix row per line, `#` metadata first.
pub fn write_dense_csv(m: &Matrix, out: &mut impl Write, provenance: Option<&Provenance>) -> io::Result<()> {
    if let Some(p) = provenance {
        out.write_all(p.render("#").as_bytes())?;
    }
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn parse_dense_csv(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| Error::parse(n + 1, format!("bad number '{t}'"))))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(n + 1, format!("expected {} columns, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    let n_cols = rows.first().map_or(0, Vec::len);
    Ok(Matrix::from_row_iterator(rows.len(), n_cols, rows.into_iter().flatten()))
}

pub fn save_dense(path: &Path, m: &Matrix, provenance: Option<&Provenance>) -> Result<()> {
    let mut out = create(path)?;
    let res = write_dense_csv(m, &mut out, provenance);
    finish(path, res, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> LoadOptions {
        LoadOptions::default()
    }

    fn rect() -> LoadOptions {
        LoadOptions { square: false, strict_binary: true }
    }

    #[test]
    fn square_flag_controls_universe() {
        let text = "a b\na c\n";
        let s = parse_edge_list(text, &square()).unwrap();
        assert_eq!(s.row_labels(), ["a", "b", "c"]);
        assert_eq!(s.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        let r = parse_edge_list(text, &rect()).unwrap();
        assert_eq!((r.nrows(), r.ncols()), (1, 2));
        assert_eq!(r.col_labels(), ["b", "c"]);
    }

    #[test]
    fn empty_and_duplicates() {
        let e = parse_edge_list("", &square()).unwrap();
        assert_eq!((e.nrows(), e.ncols(), e.nnz()), (0, 0, 0));
        let d = parse_edge_list("# comment\nx\ty\nx\ty\n\ny\tx\t1\n", &square()).unwrap();
        assert_eq!(d.nnz(), 2);
    }

    #[test]
    fn weights() {
        assert!(matches!(parse_edge_list("a b 0.5\n", &square()), Err(Error::NonBinaryWeight { line: 1, .. })));
        let loose = LoadOptions { square: true, strict_binary: false };
        assert_eq!(parse_edge_list("a b 0.5\n", &loose).unwrap().nnz(), 1);
        let zero = parse_edge_list("a b 0\n", &square()).unwrap();
        assert_eq!((zero.nrows(), zero.nnz()), (2, 0));
        assert!(matches!(parse_edge_list("a\n", &square()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("a b c d\n", &square()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn edge_list_round_trip_keeps_isolated_nodes() {
        let a = BiAdjacency::new(
            3,
            2,
            [(0, 1), (2, 0)],
            vec!["r1".into(), "r 2".into(), "r3".into()],
            vec!["c1".into(), "c2".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_edge_list(&a, &mut buf, Some(&Provenance::new("test"))).unwrap();
        let back = parse_edge_list(std::str::from_utf8(&buf).unwrap(), &rect()).unwrap();
        assert_eq!(back, a);

        let sq = BiAdjacency::with_index_labels(4, 4, [(0, 1), (1, 0)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&sq, &mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(parse_edge_list(&text, &square()).unwrap(), sq);
        assert_eq!(parse_edge_list(&text, &rect()).unwrap(), sq);
    }

    #[test]
    fn matrix_market() {
        let text = "%%MatrixMarket matrix coordinate integer general\n% c\n3 2 3\n1 1 1\n3 2 1\n2 2 0\n";
        let a = parse_matrix_market(text, &square()).unwrap();
        assert_eq!((a.nrows(), a.ncols()), (3, 2));
        assert_eq!(a.edges().collect::<Vec<_>>(), vec![(0, 0), (2, 1)]);
        assert_eq!(a.row_labels(), ["1", "2", "3"]);

        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 2.0\n";
        assert!(matches!(parse_matrix_market(bad, &square()), Err(Error::NonBinaryWeight { line: 3, .. })));
        let range = "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n3 1\n";
        assert!(matches!(parse_matrix_market(range, &square()), Err(Error::Parse { line: 3, .. })));
        let count = "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 1\n";
        assert!(matches!(parse_matrix_market(count, &square()), Err(Error::Parse { .. })));
        let sym = "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n";
        assert_eq!(parse_matrix_market(sym, &square()).unwrap().nnz(), 2);
        assert!(parse_matrix_market("1 1 0\n", &square()).is_err());
    }

    #[test]
    fn matrix_market_round_trip() {
        let a = BiAdjacency::with_index_labels(3, 5, [(0, 4), (1, 1), (2, 0), (2, 3)]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf, Some(&Provenance::new("t").with_seed(1))).unwrap();
        let back = parse_matrix_market(std::str::from_utf8(&buf).unwrap(), &square()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn membership_round_trip() {
        let pi = MembershipMatrix::from_rows(&[
            vec![0.1, 0.2, 0.7],
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap()
        .with_labels(vec!["x,1".into(), "y".into(), "z".into()])
        .unwrap();
        let mut buf = Vec::new();
        write_membership_csv(&pi, &mut buf, Some(&Provenance::new("fit"))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("label,π_1,π_2,π_3\n"));
        let back = read_membership_csv(text.as_bytes()).unwrap();
        assert_eq!(back, pi);
    }

    #[test]
    fn dense_round_trip() {
        let m = Matrix::from_row_slice(2, 3, &[0.1, 0.25, 1.0 / 3.0, 0.0, 1.0, 0.7]);
        let mut buf = Vec::new();
        write_dense_csv(&m, &mut buf, Some(&Provenance::new("simulate"))).unwrap();
        assert_eq!(parse_dense_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), m);
        assert!(parse_dense_csv("1,2\n3\n").is_err());
    }

    #[test]
    fn format_from_path() {
        assert_eq!(GraphFormat::from_path(Path::new("g.mtx")), GraphFormat::MatrixMarket);
        assert_eq!(GraphFormat::from_path(Path::new("g.tsv")), GraphFormat::EdgeList);
        assert_eq!("mtx".parse::<GraphFormat>(), Ok(GraphFormat::MatrixMarket));
    }

    #[test]
    fn row_and_column_directives_mark_rectangular_files() {
        assert!(declares_rectangular("#@rows\ta\n#@cols\tx\na\tx\n"));
        assert!(declares_rectangular("#@cols x y\n"));
        assert!(!declares_rectangular("#@nodes\ta\tb\na\tb\n"));
        assert!(!declares_rectangular("# rows are blogs\na\tb\n"));
    }
}
