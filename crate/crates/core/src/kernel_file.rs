//! JSON kernel files.
//!
//! ```json
//! {"q": 2, "N": 2, "lambda": [2.0, 2.0], "entries": [{"idx": [1, 2], "val": 0.5}]}
//! ```
//!
//! `lambda` is optional and defaults to all ones.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::kernels::{SymmetricKernel, WeightVector};
use crate::numfmt::format_significant;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    q: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(default)]
    lambda: Option<Vec<f64>>,
    entries: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    idx: Vec<u32>,
    val: f64,
}

pub fn parse_kernel_file(text: &str) -> Result<(SymmetricKernel, WeightVector)> {
    let raw: RawFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let f = SymmetricKernel::build(
        raw.q,
        raw.n,
        raw.entries.into_iter().map(|e| (e.idx, e.val)),
    )?;
    let w = match raw.lambda {
        None => WeightVector::ones(raw.n)?,
        Some(l) => {
            if l.len() != raw.n {
                return Err(Error::WeightLengthMismatch {
                    size: raw.n,
                    weights: l.len(),
                });
            }
            WeightVector::new(l)?
        }
    };
    Ok((f, w))
}

/// Canonical text: entries in increasing tuple order, one per line, numbers
/// with 17 significant digits.
pub fn serialize_kernel_file(f: &SymmetricKernel, w: &WeightVector) -> String {
    let num = |x: f64| {
        let s = format_significant(x, 17);
        if s.contains(['.', 'e']) {
            s
        } else {
            format!("{s}.0")
        }
    };
    let lambda: Vec<String> = w.as_slice().iter().map(|&x| num(x)).collect();
    let mut entries: Vec<(&[u32], f64)> = f.iter().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    let mut out = format!(
        "{{\"q\": {}, \"N\": {}, \"lambda\": [{}], \"entries\": [",
        f.order(),
        f.size(),
        lambda.join(", ")
    );
    for (k, (t, v)) in entries.iter().enumerate() {
        let idx: Vec<String> = t.iter().map(u32::to_string).collect();
        out.push_str(if k == 0 { "\n  " } else { ",\n  " });
        out.push_str(&format!(
            "{{\"idx\": [{}], \"val\": {}}}",
            idx.join(", "),
            num(*v)
        ));
    }
    out.push_str(if entries.is_empty() { "]}\n" } else { "\n]}\n" });
    out
}
