//! Text interchange formats: matrices, states, and expansion dumps.
//!
//! A document is a sequence of `key = value` lines; `#` starts a comment.
//! Matrices carry `rows`, `cols` and `entries`; states carry `dims` and
//! `entries`. Entries are a flat list of interleaved re,im pairs in
//! row-major / little-endian order.

use crate::error::{Error, Result};
use crate::forms::DoubleGroupExpansion;
use crate::matrix::ComplexMatrix;
use crate::state::QuditState;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Raw parsed document: key -> (line number, value text).
fn parse_document(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    let mut pending_key: Option<(String, usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, start, mut acc)) = pending_key.take() {
            acc.push(' ');
            acc.push_str(line);
            if balanced(&acc) {
                out.insert(key, (start, acc));
            } else {
                pending_key = Some((key, start, acc));
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::Parse {
            line: line_no,
            msg: "expected 'key = value'".into(),
        })?;
        let key = key.trim().to_string();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Parse {
                line: line_no,
                msg: "malformed key".into(),
            });
        }
        if out.contains_key(&key) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate key '{key}'"),
            });
        }
        let value = value.trim().to_string();
        if balanced(&value) {
            out.insert(key, (line_no, value));
        } else {
            pending_key = Some((key, line_no, value));
        }
    }
    if let Some((key, start, _)) = pending_key {
        return Err(Error::Parse {
            line: start,
            msg: format!("unterminated list for key '{key}'"),
        });
    }
    Ok(out)
}

fn balanced(v: &str) -> bool {
    v.chars().filter(|&c| c == '[').count() == v.chars().filter(|&c| c == ']').count()
}

fn parse_f64_list(line: usize, v: &str) -> Result<Vec<f64>> {
    let inner = v
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or(Error::Parse {
            line,
            msg: "expected a [ ... ] list".into(),
        })?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("bad number '{s}'"),
            })
        })
        .collect()
}

fn parse_usize_list(line: usize, v: &str) -> Result<Vec<usize>> {
    parse_f64_list(line, v)?
        .into_iter()
        .map(|f| {
            if f.fract() == 0.0 && f >= 0.0 {
                Ok(f as usize)
            } else {
                Err(Error::Parse {
                    line,
                    msg: format!("expected a nonnegative integer, got {f}"),
                })
            }
        })
        .collect()
}

fn take<'a>(
    doc: &'a BTreeMap<String, (usize, String)>,
    key: &str,
) -> Result<&'a (usize, String)> {
    doc.get(key).ok_or(Error::Parse {
        line: 0,
        msg: format!("missing required key '{key}'"),
    })
}

fn reject_unknown(doc: &BTreeMap<String, (usize, String)>, allowed: &[&str]) -> Result<()> {
    for (k, (line, _)) in doc {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Parse {
                line: *line,
                msg: format!("unknown key '{k}'"),
            });
        }
    }
    Ok(())
}

fn to_complex(line: usize, flat: Vec<f64>) -> Result<Vec<Complex64>> {
    if flat.len() % 2 != 0 {
        return Err(Error::Parse {
            line,
            msg: "entries must be re,im pairs".into(),
        });
    }
    Ok(flat.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let doc = parse_document(text)?;
    reject_unknown(&doc, &["rows", "cols", "entries"])?;
    let (l1, rows_v) = take(&doc, "rows")?;
    let rows = parse_usize_list(*l1, &format!("[{rows_v}]"))?[0];
    let (l2, cols_v) = take(&doc, "cols")?;
    let cols = parse_usize_list(*l2, &format!("[{cols_v}]"))?[0];
    let (l3, entries_v) = take(&doc, "entries")?;
    let entries = to_complex(*l3, parse_f64_list(*l3, entries_v)?)?;
    ComplexMatrix::from_flat(rows, cols, entries)
}

pub fn parse_state(text: &str) -> Result<QuditState> {
    let doc = parse_document(text)?;
    reject_unknown(&doc, &["dims", "entries"])?;
    let (l1, dims_v) = take(&doc, "dims")?;
    let dims = parse_usize_list(*l1, dims_v)?;
    let (l2, entries_v) = take(&doc, "entries")?;
    let entries = to_complex(*l2, parse_f64_list(*l2, entries_v)?)?;
    let state = QuditState::from_amplitudes(dims, entries)?;
    if (state.norm() - 1.0).abs() > crate::state::NORM_TOL {
        return Err(Error::InvalidForm(format!(
            "state norm {} is not 1",
            state.norm()
        )));
    }
    Ok(state)
}

fn fmt_f64(x: f64) -> String {
    // Fixed formatting keeps emitted documents byte-stable.
    format!("{x:.17e}")
}

pub fn write_matrix(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    s.push_str(&format!("rows = {}\ncols = {}\nentries = [", m.rows(), m.cols()));
    for (i, e) in m.entries().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&fmt_f64(e.re));
        s.push_str(", ");
        s.push_str(&fmt_f64(e.im));
    }
    s.push_str("]\n");
    s
}

pub fn write_state(st: &QuditState) -> String {
    let mut s = String::new();
    s.push_str("dims = [");
    for (i, d) in st.dims().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&d.to_string());
    }
    s.push_str("]\nentries = [");
    for (i, e) in st.amplitudes().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&fmt_f64(e.re));
        s.push_str(", ");
        s.push_str(&fmt_f64(e.im));
    }
    s.push_str("]\n");
    s
}

/// Double-group coefficient dump: one `(j,k,l,m) -> (re, im)` record per
/// nonzero coefficient, in index order.
pub fn write_double_group_dump(exp: &DoubleGroupExpansion) -> String {
    let mut out = String::new();
    let ab = exp
        .pair
        .group
        .abelian
        .as_ref()
        .expect("pauli pairing group is abelian");
    for (f, &c) in exp.coeffs.iter().enumerate() {
        if c.norm() <= crate::forms::COEFF_ZERO_TOL {
            continue;
        }
        let co = &ab.coords[f];
        let tuple = co
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!("({tuple}) -> ({:.12}, {:.12})\n", c.re, c.im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::gen_pauli_x;

    #[test]
    fn matrix_roundtrip() {
        let x = gen_pauli_x(3).unwrap();
        let text = write_matrix(&x);
        let back = parse_matrix(&text).unwrap();
        assert!(x.max_abs_diff(&back) < 1e-15);
    }

    #[test]
    fn state_roundtrip_and_errors() {
        let s = QuditState::basis_state(&[2, 3], &[1, 2]).unwrap();
        let text = write_state(&s);
        let back = parse_state(&text).unwrap();
        assert_eq!(back.dims(), s.dims());
        assert!(crate::state::equal_up_to_phase(&s, &back, 1e-12).unwrap());

        let bad = "dims = [2]\nentries = [1, 0]\nwhat = 3\n";
        match parse_state(bad) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("what"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let unnormalized = "dims = [2]\nentries = [2, 0, 0, 0]\n";
        assert!(parse_state(unnormalized).is_err());
    }

    #[test]
    fn multiline_entries() {
        let text = "rows = 2\ncols = 1\nentries = [1, 0,\n 0, 0]\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.rows(), 2);
    }
}
