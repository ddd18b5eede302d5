//! System files, JSON vectors and matrices, CSV tables and atomic writes.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, Field, C64};
use crate::model::{jordan_matrix, DeclaredForm, JordanBlock, LtiSystem};

/// A matrix or vector entry: a bare number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Pair([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(x) => c(x, 0.0),
            Entry::Pair([re, im]) => c(re, im),
        }
    }

    fn encode(z: C64, field: Field) -> Entry {
        match field {
            Field::Real => Entry::Real(z.re),
            Field::Complex => Entry::Pair([z.re, z.im]),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub eig: [f64; 2],
    pub size: usize,
}

/// On-disk layout of a system file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<Field>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<DeclaredForm>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<Entry>>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan_blocks: Option<Vec<BlockSpec>>,
}

fn matrix_from_rows(name: &str, rows: &[Vec<Entry>], field: Option<Field>) -> Result<CMat> {
    if rows.is_empty() {
        return Err(Error::Input(format!("{name} has no rows")));
    }
    let cols = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Input(format!(
                "{name} row {} has {} entries, expected {cols}",
                i + 1,
                row.len()
            )));
        }
        for (j, e) in row.iter().enumerate() {
            let at = || format!("{name}[{}][{}]", i + 1, j + 1);
            match (field, e) {
                (Some(Field::Complex), Entry::Real(_)) => {
                    return Err(Error::Input(format!(
                        "{}: complex-field entries must be [re, im] pairs",
                        at()
                    )))
                }
                (Some(Field::Real), Entry::Pair([_, im])) if *im != 0.0 => {
                    return Err(Error::Input(format!(
                        "{}: nonzero imaginary part in a real-field system",
                        at()
                    )))
                }
                _ => {}
            }
            let z = e.value();
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Input(format!("{}: entry is not finite", at())));
            }
        }
    }
    Ok(CMat::from_fn(rows.len(), cols, |i, j| rows[i][j].value()))
}

fn rows_of(m: &CMat, field: Field) -> Vec<Vec<Entry>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| Entry::encode(m[(i, j)], field))
                .collect()
        })
        .collect()
}

impl SystemFile {
    pub fn into_system(self) -> Result<LtiSystem> {
        let form = self.form.unwrap_or(if self.jordan_blocks.is_some() {
            DeclaredForm::Jordan
        } else {
            DeclaredForm::General
        });
        let b = matrix_from_rows("B", &self.b, self.field)?;
        let mut sys = match form {
            DeclaredForm::General => {
                if self.jordan_blocks.is_some() {
                    return Err(Error::Input(
                        "jordan_blocks given but form is \"general\"".into(),
                    ));
                }
                let rows = self
                    .a
                    .as_ref()
                    .ok_or_else(|| Error::Input("missing field \"A\"".into()))?;
                LtiSystem::new(matrix_from_rows("A", rows, self.field)?, b)?
            }
            DeclaredForm::Jordan => {
                let specs = self.jordan_blocks.as_ref().ok_or_else(|| {
                    Error::Input("form \"jordan\" requires \"jordan_blocks\"".into())
                })?;
                let blocks: Vec<JordanBlock> = specs
                    .iter()
                    .map(|s| JordanBlock::new(c(s.eig[0], s.eig[1]), s.size))
                    .collect();
                if let Some(rows) = &self.a {
                    let a = matrix_from_rows("A", rows, self.field)?;
                    let expected = jordan_matrix(&blocks);
                    if a.shape() != expected.shape() || a != expected {
                        return Err(Error::Input(
                            "\"A\" does not match the declared jordan_blocks".into(),
                        ));
                    }
                }
                LtiSystem::jordan(blocks, b)?
            }
        };
        if let Some(field) = self.field {
            if field == Field::Real && sys.field == Field::Complex {
                return Err(Error::Input(
                    "field \"real\" declared but the system has complex entries".into(),
                ));
            }
            sys.field = field;
        }
        sys.validate()?;
        Ok(sys)
    }

    pub fn from_system(sys: &LtiSystem) -> Self {
        let jordan = sys.form == DeclaredForm::Jordan;
        SystemFile {
            field: Some(sys.field),
            form: Some(sys.form),
            a: Some(rows_of(&sys.a, sys.field)),
            b: rows_of(&sys.b, sys.field),
            jordan_blocks: jordan.then(|| {
                sys.jordan_blocks
                    .iter()
                    .flatten()
                    .map(|b| BlockSpec {
                        eig: [b.eig.re, b.eig.im],
                        size: b.size,
                    })
                    .collect()
            }),
        }
    }
}

/// Parses a system from JSON text; `origin` prefixes error messages.
pub fn parse_system(text: &str, origin: &str) -> Result<LtiSystem> {
    let file: SystemFile = serde_json::from_str(text)
        .map_err(|e| Error::Input(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
    file.into_system()
        .map_err(|e| Error::Input(format!("{origin}: {}", strip_input(e))))
}

fn strip_input(e: Error) -> String {
    match e {
        Error::Input(msg) => msg,
        other => other.to_string(),
    }
}

pub fn read_system(path: &Path) -> Result<LtiSystem> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_system(&text, &path.display().to_string())
}

pub fn system_to_json(sys: &LtiSystem) -> String {
    serde_json::to_string_pretty(&SystemFile::from_system(sys)).expect("serializable") + "\n"
}

pub fn write_system(path: &Path, sys: &LtiSystem) -> Result<()> {
    write_atomic(path, system_to_json(sys).as_bytes())
}

/// Parses a JSON vector of numbers or `[re, im]` pairs.
pub fn parse_vector(text: &str, name: &str) -> Result<CVec> {
    let entries: Vec<Entry> = serde_json::from_str(text)
        .map_err(|e| Error::Input(format!("--{name}: expected a JSON vector ({e})")))?;
    if entries.is_empty() {
        return Err(Error::Input(format!("--{name}: empty vector")));
    }
    let v = CVec::from_iterator(entries.len(), entries.into_iter().map(Entry::value));
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input(format!("--{name}: entries must be finite")));
    }
    Ok(v)
}

/// Parses a JSON matrix (array of rows).
pub fn parse_matrix(text: &str, name: &str) -> Result<CMat> {
    let rows: Vec<Vec<Entry>> = serde_json::from_str(text)
        .map_err(|e| Error::Input(format!("--{name}: expected a JSON matrix ({e})")))?;
    matrix_from_rows(&format!("--{name}"), &rows, None)
}

/// JSON form of a matrix: bare numbers when every entry is real.
pub fn matrix_json(m: &CMat) -> Value {
    serde_json::to_value(rows_of(m, Field::of(m))).expect("serializable")
}

pub fn vector_json(v: &CVec) -> Value {
    let field = Field::of(&CMat::from_column_slice(v.len(), 1, v.as_slice()));
    serde_json::to_value(
        v.iter()
            .map(|&z| Entry::encode(z, field))
            .collect::<Vec<_>>(),
    )
    .expect("serializable")
}

pub fn complex_list_json(zs: &[C64]) -> Value {
    serde_json::to_value(zs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).expect("serializable")
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Input(format!("{}: {e}", path.display()));
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    write_atomic(path, text.as_bytes())
}

/// In-memory CSV table, rendered with the `csv` writer.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Csv {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: impl IntoIterator<Item = S>) {
        let cells: Vec<String> = cells.into_iter().map(|s| s.as_ref().to_string()).collect();
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for record in std::iter::once(&self.header).chain(&self.rows) {
            w.write_record(record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

/// Shortest round-trip decimal form of `x`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
