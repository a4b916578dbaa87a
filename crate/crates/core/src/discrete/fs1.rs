//! FS1 field snapshot files and CSV line exports.
//!
//! An FS1 file is a short text header followed by raw little-endian `f64`
//! payload:
//!
//! ```text
//! FS1
//! grid <n0> <n1> <n2> <L0> <L1> <L2>
//! time <t>
//! fields <name> <name> ...
//! components <c> <c> ...
//! scalar 8
//! byteorder little
//! end
//! ```
//!
//! The payload holds each field in header order, each component as one
//! x-fastest array of `n0 * n1 * n2` values.

use std::io::{BufRead, Write};

use super::field::{GridField, ScalarField, VectorField};
use super::Grid3;
use crate::error::{Error, Result};

pub const MAGIC: &str = "FS1";

#[derive(Clone, Debug, PartialEq)]
pub struct NamedField {
    pub name: String,
    pub components: usize,
    pub data: Vec<f64>,
}

impl NamedField {
    pub fn scalar(name: &str, f: &ScalarField) -> Self {
        Self {
            name: name.into(),
            components: 1,
            data: f.data().to_vec(),
        }
    }

    pub fn vector(name: &str, f: &VectorField) -> Self {
        Self {
            name: name.into(),
            components: 3,
            data: f.data().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub grid: Grid3,
    pub time: f64,
    pub fields: Vec<NamedField>,
}

impl Snapshot {
    pub fn new(grid: Grid3, time: f64) -> Self {
        Self {
            grid,
            time,
            fields: Vec::new(),
        }
    }

    pub fn with(mut self, f: NamedField) -> Self {
        self.fields.push(f);
        self
    }

    pub fn field(&self, name: &str) -> Option<&NamedField> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        let n = self.grid.n();
        let l = self.grid.lengths();
        for f in &self.fields {
            if f.name.is_empty() || f.name.contains(char::is_whitespace) {
                return Err(Error::Format(format!("bad field name {:?}", f.name)));
            }
            let want = f.components * self.grid.len();
            if f.data.len() != want {
                return Err(Error::ShapeMismatch {
                    expected: want,
                    got: f.data.len(),
                });
            }
        }
        let names: Vec<&str> = self.fields.iter().map(|f| f.name.as_str()).collect();
        let comps: Vec<String> = self.fields.iter().map(|f| f.components.to_string()).collect();
        let header = format!(
            "{MAGIC}\ngrid {} {} {} {:?} {:?} {:?}\ntime {:?}\nfields {}\ncomponents {}\nscalar 8\nbyteorder little\nend\n",
            n[0],
            n[1],
            n[2],
            l[0],
            l[1],
            l[2],
            self.time,
            names.join(" "),
            comps.join(" ")
        );
        let io = |e: std::io::Error| Error::Format(e.to_string());
        w.write_all(header.as_bytes()).map_err(io)?;
        let mut buf = Vec::with_capacity(8 * self.fields.iter().map(|f| f.data.len()).sum::<usize>());
        for f in &self.fields {
            for v in &f.data {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf).map_err(io)
    }

    pub fn read<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut line = String::new();
        let mut next = |r: &mut R| -> Result<String> {
            line.clear();
            r.read_line(&mut line)
                .map_err(|e| Error::Format(e.to_string()))?;
            Ok(line.trim_end_matches('\n').to_string())
        };
        let bad = |m: String| Error::Format(m);
        if next(r)? != MAGIC {
            return Err(bad("missing FS1 magic".into()));
        }
        let mut grid = None;
        let mut time = None;
        let mut names: Vec<String> = Vec::new();
        let mut comps: Vec<usize> = Vec::new();
        loop {
            let l = next(r)?;
            let mut parts = l.split_whitespace();
            let key = parts.next().ok_or_else(|| bad("truncated header".into()))?;
            let rest: Vec<&str> = parts.collect();
            match key {
                "grid" => {
                    if rest.len() != 6 {
                        return Err(bad(format!("grid line {l:?}")));
                    }
                    let p = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("grid value {s:?}")));
                    let q = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("grid size {s:?}")));
                    grid = Some(Grid3::new(
                        [q(rest[0])?, q(rest[1])?, q(rest[2])?],
                        [p(rest[3])?, p(rest[4])?, p(rest[5])?],
                    )?);
                }
                "time" => {
                    time = Some(
                        rest.first()
                            .and_then(|s| s.parse::<f64>().ok())
                            .ok_or_else(|| bad(format!("time line {l:?}")))?,
                    );
                }
                "fields" => names = rest.iter().map(|s| s.to_string()).collect(),
                "components" => {
                    comps = rest
                        .iter()
                        .map(|s| s.parse().map_err(|_| bad(format!("component count {s:?}"))))
                        .collect::<Result<_>>()?;
                }
                "scalar" => {
                    if rest != ["8"] {
                        return Err(bad(format!("unsupported scalar width {rest:?}")));
                    }
                }
                "byteorder" => {
                    if rest != ["little"] {
                        return Err(bad(format!("unsupported byte order {rest:?}")));
                    }
                }
                "end" => break,
                other => return Err(bad(format!("unknown header key {other:?}"))),
            }
        }
        let grid = grid.ok_or_else(|| bad("header lacks grid".into()))?;
        let time = time.ok_or_else(|| bad("header lacks time".into()))?;
        if names.len() != comps.len() {
            return Err(bad("fields and components lines differ in length".into()));
        }
        let mut fields = Vec::with_capacity(names.len());
        for (name, c) in names.into_iter().zip(comps) {
            let count = c * grid.len();
            let mut raw = vec![0u8; 8 * count];
            r.read_exact(&mut raw)
                .map_err(|e| bad(format!("payload for {name}: {e}")))?;
            let data = raw
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect();
            fields.push(NamedField {
                name,
                components: c,
                data,
            });
        }
        Ok(Self { grid, time, fields })
    }
}

/// Formats a float for CSV/text output; shortest round-trip representation.
pub fn fmt_f64(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v:?}")
    }
}

/// Writes every field along the grid line through `(.., j, k)` rotated onto
/// `axis`, one row per point: `s,<field>_<c>...`.
pub fn write_csv_line<W: Write>(
    w: &mut W,
    snap: &Snapshot,
    axis: usize,
    fixed: [usize; 2],
) -> Result<()> {
    let g = &snap.grid;
    let n = g.n();
    let io = |e: std::io::Error| Error::Format(e.to_string());
    let mut header = vec![["x", "y", "z"][axis].to_string()];
    for f in &snap.fields {
        for c in 0..f.components {
            header.push(if f.components == 1 {
                f.name.clone()
            } else {
                format!("{}_{}", f.name, ["x", "y", "z"].get(c).copied().unwrap_or("?"))
            });
        }
    }
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    let dx = g.dx()[axis];
    for s in 0..n[axis] {
        let mut c = [0usize; 3];
        c[axis] = s;
        let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
        c[others[0]] = fixed[0];
        c[others[1]] = fixed[1];
        let idx = g.index(c[0], c[1], c[2]);
        let mut row = vec![fmt_f64(s as f64 * dx)];
        for f in &snap.fields {
            for comp in 0..f.components {
                row.push(fmt_f64(f.data[comp * g.len() + idx]));
            }
        }
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::Vec3;

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = Grid3::new([4, 5, 6], [1.0, 0.1, std::f64::consts::PI]).unwrap();
        let e = VectorField::from_fn(&g, |x| Vec3::new(x.x.sin(), 1.0 / 3.0, -x.z));
        let rho = ScalarField::from_fn(&g, |x| x.y.exp());
        let snap = Snapshot::new(g, 0.1 + 0.2)
            .with(NamedField::vector("E", &e))
            .with(NamedField::scalar("rho", &rho));
        let mut buf = Vec::new();
        snap.write(&mut buf).unwrap();
        let back = Snapshot::read(&mut buf.as_slice()).unwrap();
        assert_eq!(back, snap);
        let header_end = buf.windows(4).position(|w| w == b"end\n").unwrap() + 4;
        assert_eq!(buf.len() - header_end, 8 * 4 * g.len());
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(Snapshot::read(&mut "FS2\n".as_bytes()).is_err());
        let txt = "FS1\ngrid 4 4 4 1 1 1\ntime 0\nfields a\ncomponents 1\nscalar 4\n";
        assert!(Snapshot::read(&mut txt.as_bytes()).is_err());
        let txt = "FS1\ngrid 4 4 4 1 1 1\ntime 0\nfields a\ncomponents 1\nend\n";
        assert!(Snapshot::read(&mut txt.as_bytes()).is_err());
    }

    #[test]
    fn csv_line_has_header_and_rows() {
        let g = Grid3::new([4, 4, 4], [1.0; 3]).unwrap();
        let snap = Snapshot::new(g, 0.0)
            .with(NamedField::scalar("rho", &ScalarField::from_fn(&g, |x| x.x)));
        let mut out = Vec::new();
        write_csv_line(&mut out, &snap, 0, [0, 0]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,rho");
        assert_eq!(lines[2], "0.25,0.25");
        assert_eq!(lines.len(), 5);
    }
}
