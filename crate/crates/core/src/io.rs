//! On-disk formats: the canonical matrix JSON document and trajectory files.
//!
//! Matrix document:
//!
//! ```json
//! {"kind": "spin", "s": "1/2", "beta": 1.5707963267948966,
//!  "labels": ["1/2", "-1/2"], "rows": [[0.5, 0.5], [0.5, 0.5]],
//!  "params": {...}, "version": 1}
//! ```
//!
//! Trajectory file: one JSON header line
//! `{"labels": [...], "seed": 42, "steps": n, "rng": "...", ...}` followed by
//! one outcome label per line, `steps + 1` lines in total.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::markov::{Label, StochasticMatrix, Trajectory, RNG_ALGORITHM};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Spin,
    Qubit,
    Generic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub kind: MatrixKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<HalfInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub labels: Vec<Label>,
    pub rows: Vec<Vec<f64>>,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub version: u32,
}

impl MatrixDocument {
    pub fn new(kind: MatrixKind, matrix: &StochasticMatrix) -> Self {
        MatrixDocument {
            kind,
            s: None,
            n: None,
            beta: None,
            labels: matrix.labels().to_vec(),
            rows: matrix.rows().to_vec(),
            params: Map::new(),
            version: FORMAT_VERSION,
        }
    }

    /// Validated matrix. Rows must satisfy the usual stochastic checks.
    pub fn to_matrix(&self) -> Result<StochasticMatrix> {
        if self.version != FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported matrix document version {} (expected {FORMAT_VERSION})",
                self.version
            )));
        }
        StochasticMatrix::new(self.labels.clone(), self.rows.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format { line: e.line(), message: e.to_string() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub labels: Vec<Label>,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub steps: usize,
    pub rng: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    pub version: u32,
}

impl TrajectoryHeader {
    pub fn for_trajectory(t: &Trajectory, config: Option<Value>) -> Self {
        TrajectoryHeader {
            labels: t.labels.clone(),
            seed: t.seed,
            stream: t.stream,
            steps: t.steps(),
            rng: RNG_ALGORITHM.to_owned(),
            config,
            version: FORMAT_VERSION,
        }
    }
}

pub fn write_trajectory<W: Write>(mut out: W, t: &Trajectory, config: Option<Value>) -> std::io::Result<()> {
    let header = TrajectoryHeader::for_trajectory(t, config);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let rendered: Vec<String> = t.labels.iter().map(|l| l.to_string()).collect();
    for &s in &t.states {
        out.write_all(rendered[s].as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Parses a trajectory file. Errors carry 1-based line numbers.
pub fn read_trajectory<R: BufRead>(reader: R) -> Result<(Trajectory, TrajectoryHeader)> {
    let mut lines = reader.lines();
    let io_err = |line: usize, e: std::io::Error| Error::Format { line, message: e.to_string() };
    let header_line = match lines.next() {
        Some(l) => l.map_err(|e| io_err(1, e))?,
        None => return Err(Error::Format { line: 1, message: "missing header line".into() }),
    };
    let header: TrajectoryHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::Format { line: 1, message: format!("bad header: {e}") })?;

    let mut states = Vec::with_capacity(header.steps + 1);
    for (offset, line) in lines.enumerate() {
        let number = offset + 2;
        let line = line.map_err(|e| io_err(number, e))?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let label = Label::parse(text);
        let index = header
            .labels
            .iter()
            .position(|l| *l == label || l.to_string() == text)
            .ok_or_else(|| Error::Format { line: number, message: format!("unknown outcome `{text}`") })?;
        states.push(index);
    }
    if states.len() != header.steps + 1 {
        return Err(Error::Format {
            line: states.len() + 1,
            message: format!("header promises {} outcomes, found {}", header.steps + 1, states.len()),
        });
    }
    let trajectory = Trajectory { labels: header.labels.clone(), states, seed: header.seed, stream: header.stream };
    Ok((trajectory, header))
}

/// CSV rendering: a header row `from,<labels>` then one row per state.
pub fn matrix_to_csv(matrix: &StochasticMatrix) -> String {
    let mut out = String::from("from");
    for l in matrix.labels() {
        out.push(',');
        out.push_str(&l.to_string());
    }
    out.push('\n');
    for (label, row) in matrix.labels().iter().zip(matrix.rows()) {
        out.push_str(&label.to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`matrix_to_csv`]. Blank lines and `#` comments are skipped;
/// errors carry 1-based line numbers.
pub fn matrix_from_csv(text: &str) -> Result<StochasticMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let l = l.trim();
        !l.is_empty() && !l.starts_with('#')
    });
    let (_, header) = lines.next().ok_or_else(|| Error::Format { line: 1, message: "empty matrix file".into() })?;
    let labels: Vec<Label> = header.split(',').skip(1).map(|t| Label::parse(t.trim())).collect();
    let mut rows = Vec::with_capacity(labels.len());
    for (i, line) in lines {
        let number = i + 1;
        let mut cells = line.split(',').map(str::trim);
        let label = Label::parse(cells.next().unwrap_or_default());
        if labels.get(rows.len()) != Some(&label) {
            return Err(Error::Format { line: number, message: format!("row label `{label}` out of order") });
        }
        let row = cells
            .map(|c| c.parse::<f64>().map_err(|_| Error::Format { line: number, message: format!("not a number: `{c}`") }))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != labels.len() {
            return Err(Error::Format {
                line: number,
                message: format!("expected {} entries, found {}", labels.len(), row.len()),
            });
        }
        rows.push(row);
    }
    StochasticMatrix::new(labels, rows)
}

/// Reads either format, deciding on the first non-blank character.
pub fn parse_matrix(text: &str) -> Result<StochasticMatrix> {
    if text.trim_start().starts_with('{') {
        MatrixDocument::from_json(text)?.to_matrix()
    } else {
        matrix_from_csv(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{simulate_chain, Distribution, RngState};
    use crate::spin::{spin_transition_matrix, SpinChainSpec};
    use proptest::prelude::*;

    #[test]
    fn matrix_document_round_trips_exactly() {
        let spec = SpinChainSpec::new(HalfInt::from_twice(3), 0.731).unwrap();
        let m = spin_transition_matrix(&spec).unwrap();
        let mut doc = MatrixDocument::new(MatrixKind::Spin, &m);
        doc.s = Some(spec.s);
        doc.beta = Some(spec.beta);
        let text = doc.to_json();
        assert!(text.starts_with(r#"{"kind":"spin","s":"3/2","beta":0.731,"labels":["3/2","1/2","-1/2","-3/2"]"#));
        let back = MatrixDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_matrix().unwrap(), m);
    }

    #[test]
    fn generic_matrix_with_named_labels() {
        let text = r#"{"kind":"generic","labels":["a","b"],"rows":[[0,1],[1,0]],"version":1}"#;
        let m = MatrixDocument::from_json(text).unwrap().to_matrix().unwrap();
        assert_eq!(m.labels(), &[Label::Name("a".into()), Label::Name("b".into())]);
    }

    #[test]
    fn bad_matrix_documents() {
        let e = MatrixDocument::from_json("{\n\"kind\": \"spin\",\n\"labels\": [,]}").unwrap_err();
        assert!(matches!(e, Error::Format { line: 3, .. }), "{e:?}");
        let wrong_version = r#"{"kind":"generic","labels":["0"],"rows":[[1]],"version":2}"#;
        assert!(MatrixDocument::from_json(wrong_version).unwrap().to_matrix().is_err());
        let not_stochastic = r#"{"kind":"generic","labels":["0","1"],"rows":[[0.5,0.6],[1,0]],"version":1}"#;
        assert!(MatrixDocument::from_json(not_stochastic).unwrap().to_matrix().is_err());
    }

    #[test]
    fn trajectory_file_layout() {
        let t = Trajectory { labels: Label::halves([HalfInt::HALF, -HalfInt::HALF]), states: vec![0, 1, 1], seed: 9, stream: 0 };
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &t, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(header["seed"], 9);
        assert_eq!(header["steps"], 2);
        assert_eq!(header["rng"], RNG_ALGORITHM);
        assert_eq!(lines.collect::<Vec<_>>(), ["1/2", "-1/2", "-1/2"]);
    }

    #[test]
    fn trajectory_errors_name_the_line() {
        let header = r#"{"labels":["0","1"],"seed":1,"steps":2,"rng":"x","version":1}"#;
        let bad_label = format!("{header}\n0\n7\n1\n");
        assert!(matches!(read_trajectory(bad_label.as_bytes()), Err(Error::Format { line: 3, .. })));
        let short = format!("{header}\n0\n1\n");
        assert!(matches!(read_trajectory(short.as_bytes()), Err(Error::Format { .. })));
        assert!(matches!(read_trajectory("not json\n0\n".as_bytes()), Err(Error::Format { line: 1, .. })));
        assert!(matches!(read_trajectory("".as_bytes()), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let m = spin_transition_matrix(&SpinChainSpec::new(HalfInt::from_int(2), 0.7).unwrap()).unwrap();
        let text = matrix_to_csv(&m);
        assert!(text.starts_with("from,2,1,0,-1,-2\n2,"));
        assert_eq!(text.lines().count(), 6);
        assert_eq!(parse_matrix(&text).unwrap(), m);
        assert_eq!(parse_matrix(&format!("# {{\"seed\":0}}\n{text}")).unwrap(), m);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let bad_number = "from,a,b\na,1,0\nb,x,1\n";
        assert!(matches!(matrix_from_csv(bad_number), Err(Error::Format { line: 3, .. })));
        let short_row = "from,a,b\na,1\nb,0,1\n";
        assert!(matches!(matrix_from_csv(short_row), Err(Error::Format { line: 2, .. })));
        let wrong_label = "from,a,b\nb,1,0\n";
        assert!(matches!(matrix_from_csv(wrong_label), Err(Error::Format { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn trajectory_round_trip(seed in any::<u64>(), steps in 0usize..300) {
            let m = spin_transition_matrix(&SpinChainSpec::new(HalfInt::from_int(1), 1.1).unwrap()).unwrap();
            let initial = Distribution::uniform(m.labels().to_vec()).unwrap();
            let t = simulate_chain(&m, &initial, steps, &mut RngState::from_seed(seed)).unwrap();
            let mut buf = Vec::new();
            write_trajectory(&mut buf, &t, Some(serde_json::json!({"kind": "test"}))).unwrap();
            let (back, header) = read_trajectory(buf.as_slice()).unwrap();
            prop_assert_eq!(back, t);
            prop_assert_eq!(header.config, Some(serde_json::json!({"kind": "test"})));
        }
    }
}
