//! Codebook JSON files.
//!
//! Layout: `{"scheme", "N", "sigma2", "centroids": [[re, im], ...], "metadata"}`,
//! centroids in index order. Every float is written with 17 significant digits so
//! a load of a saved codebook reproduces it bit for bit.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::codebook::{Codebook, Metadata, Scheme};
use crate::error::{Error, Result};
use crate::Complex;

/// Writes floats as `{:.16e}` and breaks lines only at the two outermost levels.
#[derive(Default)]
pub struct SigDigitsFormatter {
    depth: usize,
    has_value: Vec<bool>,
}

const PRETTY_DEPTH: usize = 2;

impl SigDigitsFormatter {
    fn newline<W: ?Sized + Write>(&self, w: &mut W, depth: usize) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..depth {
            w.write_all(b"  ")?;
        }
        Ok(())
    }

    fn open<W: ?Sized + Write>(&mut self, w: &mut W, c: &[u8]) -> io::Result<()> {
        self.depth += 1;
        self.has_value.push(false);
        w.write_all(c)
    }

    fn close<W: ?Sized + Write>(&mut self, w: &mut W, c: &[u8]) -> io::Result<()> {
        let had = self.has_value.pop().unwrap_or(false);
        let d = self.depth;
        self.depth -= 1;
        if had && d <= PRETTY_DEPTH {
            self.newline(w, d - 1)?;
        }
        w.write_all(c)
    }

    fn element<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        if self.depth <= PRETTY_DEPTH {
            self.newline(w, self.depth)?;
        } else if !first {
            w.write_all(b" ")?;
        }
        if let Some(h) = self.has_value.last_mut() {
            *h = true;
        }
        Ok(())
    }
}

impl Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.open(w, b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.close(w, b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.element(w, first)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.open(w, b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.close(w, b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.element(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}

/// Serializes any value with [`SigDigitsFormatter`].
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter::default());
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits utf-8")
}

#[derive(Serialize)]
struct CodebookFile<'a> {
    scheme: &'a str,
    #[serde(rename = "N")]
    n: usize,
    sigma2: f64,
    centroids: Vec<[f64; 2]>,
    metadata: &'a Metadata,
}

pub fn codebook_to_json(codebook: &Codebook) -> String {
    to_json_string(&CodebookFile {
        scheme: codebook.scheme().as_str(),
        n: codebook.len(),
        sigma2: codebook.sigma2(),
        centroids: codebook.centroids().iter().map(|c| [c.re, c.im]).collect(),
        metadata: codebook.metadata(),
    })
}

pub fn codebook_from_json(text: &str) -> Result<Codebook> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::format("<root>", e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::format("<root>", "expected a JSON object"))?;
    let field = |name: &str| {
        obj.get(name)
            .ok_or_else(|| Error::format(name, "missing"))
    };

    let scheme: Scheme = field("scheme")?
        .as_str()
        .ok_or_else(|| Error::format("scheme", "expected a string"))?
        .parse()
        .map_err(|e: String| Error::format("scheme", e))?;
    let n = field("N")?
        .as_u64()
        .ok_or_else(|| Error::format("N", "expected a non-negative integer"))? as usize;
    if n == 0 {
        return Err(Error::format("N", "must be at least 1"));
    }
    let sigma2 = field("sigma2")?
        .as_f64()
        .ok_or_else(|| Error::format("sigma2", "expected a number"))?;
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::format("sigma2", format!("must be positive, got {sigma2}")));
    }
    let list = field("centroids")?
        .as_array()
        .ok_or_else(|| Error::format("centroids", "expected an array"))?;
    if list.len() != n {
        return Err(Error::format(
            "centroids",
            format!("holds {} entries but N = {n}", list.len()),
        ));
    }
    let mut centroids = Vec::with_capacity(n);
    for (i, item) in list.iter().enumerate() {
        let name = format!("centroids[{i}]");
        let pair = item
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::format(&name, "expected [re, im]"))?;
        let re = pair[0].as_f64();
        let im = pair[1].as_f64();
        match (re, im) {
            (Some(re), Some(im)) if re.is_finite() && im.is_finite() => {
                centroids.push(Complex::new(re, im))
            }
            _ => return Err(Error::format(&name, "components must be finite numbers")),
        }
    }
    let metadata: Metadata = match obj.get("metadata") {
        None | Some(Value::Null) => Metadata::new(),
        Some(Value::Object(m)) => m.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        Some(_) => return Err(Error::format("metadata", "expected an object")),
    };

    let mut cb = Codebook::new(scheme, sigma2, centroids)
        .map_err(|e| Error::format("centroids", e.to_string()))?;
    for (k, v) in metadata {
        cb.set_meta(k, v);
    }
    Ok(cb)
}

pub fn save_codebook(codebook: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, codebook_to_json(codebook)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    codebook_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{spiral_centroids, Scheme};

    fn sample() -> Codebook {
        spiral_centroids(&[0.0, 0.1, 1.0 / 3.0, 2.5], Scheme::LloydMaxGQ, 0.75)
            .unwrap()
            .with_meta("iterations", 12)
            .with_meta("final_distortion", 1.0 / 7.0)
            .with_meta("converged", true)
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = codebook_to_json(&sample());
        assert!(s.contains("\"sigma2\": 7.5000000000000000e-1"), "{s}");
        assert!(s.contains("\"N\": 4"));
    }

    #[test]
    fn round_trip_is_exact() {
        let cb = sample();
        let back = codebook_from_json(&codebook_to_json(&cb)).unwrap();
        assert_eq!(back, cb);
        for (a, b) in cb.centroids().iter().zip(back.centroids()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn zero_n_rejected() {
        let s = r#"{"scheme":"HighRateGQ","N":0,"sigma2":1.0,"centroids":[],"metadata":{}}"#;
        match codebook_from_json(s) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "N"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_finite_centroid_rejected() {
        let s = r#"{"scheme":"HighRateGQ","N":2,"sigma2":1.0,"centroids":[[0,0],[1e999,0]],"metadata":{}}"#;
        assert!(matches!(codebook_from_json(s), Err(Error::Format { .. })));
        let s = r#"{"scheme":"HighRateGQ","N":1,"sigma2":1.0,"centroids":[[null,0]],"metadata":{}}"#;
        match codebook_from_json(s) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "centroids[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn count_mismatch_and_bad_scheme() {
        let s = r#"{"scheme":"HighRateGQ","N":2,"sigma2":1.0,"centroids":[[0,0]],"metadata":{}}"#;
        assert!(matches!(codebook_from_json(s), Err(Error::Format { .. })));
        let s = r#"{"scheme":"Hexagonal","N":1,"sigma2":1.0,"centroids":[[0,0]],"metadata":{}}"#;
        match codebook_from_json(s) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "scheme"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_round_trip_and_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cb.json");
        let cb = sample();
        save_codebook(&cb, &p).unwrap();
        assert_eq!(load_codebook(&p).unwrap(), cb);
        assert!(matches!(load_codebook(dir.path().join("missing.json")), Err(Error::Io { .. })));
    }
}
