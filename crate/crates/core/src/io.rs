//! CSV artifacts and run manifests.
//!
//! Dialect: comma separated, header row, LF endings, floats printed with 17
//! significant digits so every value round-trips exactly.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::Grid;
use crate::states::{CompositeState, DensityOperator};
use crate::wigner::WignerTable;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Accumulates a CSV document in memory.
#[derive(Debug, Default, Clone)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Self::default();
        c.text.push_str(&header.join(","));
        c.text.push('\n');
        c
    }

    /// A `#`-prefixed metadata line followed by the header.
    pub fn with_comment(comment: &str, header: &[&str]) -> Self {
        let mut c = Self { text: format!("# {comment}\n") };
        c.text.push_str(&header.join(","));
        c.text.push('\n');
        c
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(path, &self.text).map_err(|e| Error::io(path, e))
    }
}

fn grid_comment(grid: &Grid) -> String {
    format!("n={},length={},center={}", grid.n(), fmt_f64(grid.length()), fmt_f64(grid.center()))
}

pub fn write_vector_csv(path: &Path, column: &str, values: &Array1<f64>) -> Result<()> {
    let mut c = Csv::new(&[column]);
    for &v in values {
        c.row(&[fmt_f64(v)]);
    }
    c.write(path)
}

/// Kernel `ϱ(q_i, q_j)` in long format `(i, j, re, im)`, row-major.
pub fn density_csv(rho: &DensityOperator) -> Csv {
    let mut c = Csv::with_comment(&grid_comment(rho.grid()), &["i", "j", "re", "im"]);
    for ((i, j), z) in rho.kernel().indexed_iter() {
        c.row(&[i.to_string(), j.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
    }
    c
}

pub fn state_csv(phi: &CompositeState) -> Csv {
    let comment = format!("system:{};environment:{}", grid_comment(phi.grid1()), grid_comment(phi.grid2()));
    let mut c = Csv::with_comment(&comment, &["k", "l", "re", "im"]);
    for ((k, l), z) in phi.amplitudes().indexed_iter() {
        c.row(&[k.to_string(), l.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
    }
    c
}

pub fn wigner_csv(table: &WignerTable) -> Csv {
    let mut c = Csv::new(&["q", "p", "w"]);
    for ((k, j), &w) in table.values.indexed_iter() {
        c.row(&[fmt_f64(table.q[k]), fmt_f64(table.p[j]), fmt_f64(w)]);
    }
    c
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#')).skip(1)
}

fn parse_f64(s: &str, path: &Path, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{}:{}: cannot parse '{}' as a number", path.display(), line + 1, s.trim())))
}

fn parse_index(s: &str, n: usize, path: &Path, line: usize) -> Result<usize> {
    match s.trim().parse::<usize>() {
        Ok(i) if i < n => Ok(i),
        _ => Err(Error::Config(format!("{}:{}: index '{}' outside 0..{n}", path.display(), line + 1, s.trim()))),
    }
}

/// A single-column table of `n` values after a header row.
pub fn read_vector_csv(path: &Path, n: usize) -> Result<Array1<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values = data_lines(&text).map(|(i, l)| parse_f64(l, path, i)).collect::<Result<Vec<f64>>>()?;
    if values.len() != n {
        return Err(Error::Config(format!("{}: expected {n} values, found {}", path.display(), values.len())));
    }
    Ok(Array1::from(values))
}

/// Long-format `(k, l, v)` table filling an `n1 × n2` matrix exactly once.
pub fn read_matrix_csv(path: &Path, n1: usize, n2: usize) -> Result<Array2<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut m = Array2::from_elem((n1, n2), f64::NAN);
    let mut seen = 0usize;
    for (i, line) in data_lines(&text) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::Config(format!("{}:{}: expected k,l,v", path.display(), i + 1)));
        }
        let (k, l) = (parse_index(f[0], n1, path, i)?, parse_index(f[1], n2, path, i)?);
        if !m[[k, l]].is_nan() {
            return Err(Error::Config(format!("{}:{}: duplicate entry ({k}, {l})", path.display(), i + 1)));
        }
        m[[k, l]] = parse_f64(f[2], path, i)?;
        seen += 1;
    }
    if seen != n1 * n2 {
        return Err(Error::Config(format!("{}: expected {} entries, found {seen}", path.display(), n1 * n2)));
    }
    Ok(m)
}

pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    let mut c = Csv::new(&["k", "l", "v"]);
    for ((k, l), &v) in m.indexed_iter() {
        c.row(&[k.to_string(), l.to_string(), fmt_f64(v)]);
    }
    c.write(path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Provenance record of a run. Contains no timestamps, so identical inputs
/// give identical manifests.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub sign: String,
    pub version: String,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config_text: &str, seed: u64, sign: &str) -> Self {
        Self {
            command: command.into(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            sign: sign.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            files: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let files = self.files.iter().map(|f| format!("\"{f}\"")).collect::<Vec<_>>().join(", ");
        format!(
            "command = \"{}\"\nconfig_sha256 = \"{}\"\nseed = {}\nsign = \"{}\"\nversion = \"{}\"\nfiles = [{}]\n",
            self.command, self.config_sha256, self.seed, self.sign, self.version, files
        )
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.toml");
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        std::fs::write(&path, self.render()).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;
    use crate::C64;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn vector_and_matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let v = Array1::from(vec![0.5, -1.25, 1.0 / 7.0]);
        write_vector_csv(&dir.path().join("v.csv"), "v", &v).unwrap();
        assert_eq!(read_vector_csv(&dir.path().join("v.csv"), 3).unwrap(), v);
        assert!(read_vector_csv(&dir.path().join("v.csv"), 4).is_err());
        let m = Array2::from_shape_fn((2, 3), |(i, j)| i as f64 - 0.3 * j as f64);
        write_matrix_csv(&dir.path().join("m.csv"), &m).unwrap();
        assert_eq!(read_matrix_csv(&dir.path().join("m.csv"), 2, 3).unwrap(), m);
        assert!(read_matrix_csv(&dir.path().join("m.csv"), 3, 3).is_err());
    }

    #[test]
    fn density_csv_layout() {
        let g = make_grid(2, 2.0, 0.0).unwrap();
        let psi = Array1::from(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]) * C64::new(1.0 / g.step().sqrt(), 0.0);
        let rho = DensityOperator::pure(g, psi.view()).unwrap();
        let text = density_csv(&rho).as_str().to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# n=2,length="));
        assert_eq!(lines[1], "i,j,re,im");
        assert_eq!(lines.len(), 6);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn manifest_is_deterministic() {
        let a = Manifest::new("run", "x = 1\n", 42, "-").render();
        let b = Manifest::new("run", "x = 1\n", 42, "-").render();
        assert_eq!(a, b);
        assert_ne!(a, Manifest::new("run", "x = 2\n", 42, "-").render());
    }
}
