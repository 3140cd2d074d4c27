//! Text formats: model files, sample files, vote matrices and key=value
//! configuration files.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SlideError};
use crate::model::{CouplingMatrix, Dataset};

/// Renders `p <int>` followed by one `i j value` line per edge (`i < j`).
pub fn format_model(j: &CouplingMatrix) -> String {
    let mut out = format!("p {}\n", j.p());
    for (a, b, v) in j.edges() {
        writeln!(out, "{a} {b} {v:.16e}").unwrap();
    }
    out
}

pub fn parse_model(text: &str) -> Result<CouplingMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = lines
        .next()
        .ok_or(SlideError::Parse { line: 1, msg: "missing `p <int>` header".into() })?;
    let p = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["p", n] => n.parse::<usize>().map_err(|e| SlideError::Parse { line, msg: e.to_string() })?,
        _ => return Err(SlideError::Parse { line, msg: format!("expected `p <int>`, found {header:?}") }),
    };
    let mut j = CouplingMatrix::zeros(p);
    for (line, l) in lines {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(SlideError::Parse { line, msg: format!("expected `i j value`, found {l:?}") });
        }
        let parse_idx = |s: &str| {
            s.parse::<usize>().map_err(|e| SlideError::Parse { line, msg: format!("bad index {s:?}: {e}") })
        };
        let (a, b) = (parse_idx(fields[0])?, parse_idx(fields[1])?);
        let v: f64 = fields[2]
            .parse()
            .map_err(|e| SlideError::Parse { line, msg: format!("bad value {:?}: {e}", fields[2]) })?;
        if a >= b || b >= p {
            return Err(SlideError::Parse { line, msg: format!("edge ({a}, {b}) needs i < j < p = {p}") });
        }
        if !v.is_finite() {
            return Err(SlideError::Parse { line, msg: "non-finite coupling".into() });
        }
        j.set(a, b, v);
    }
    Ok(j)
}

pub fn read_model(path: &Path) -> Result<CouplingMatrix> {
    parse_model(&std::fs::read_to_string(path)?)
}

/// Renders the `# n=<int> p=<int>` header and one row of `+1`/`-1` tokens
/// per sample.
pub fn format_samples(data: &Dataset) -> String {
    let mut out = String::with_capacity(data.n() * data.p() * 3 + 32);
    writeln!(out, "# n={} p={}", data.n(), data.p()).unwrap();
    for row in data.rows() {
        let tokens: Vec<&str> = row.iter().map(|&s| if s > 0 { "+1" } else { "-1" }).collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_samples(text: &str) -> Result<Dataset> {
    let mut header: Option<(usize, usize)> = None;
    let mut spins = Vec::new();
    let mut p: Option<usize> = None;
    let mut rows = 0usize;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix('#') {
            if rows == 0 && header.is_none() {
                header = parse_header(rest, line)?;
            }
            continue;
        }
        let mut width = 0;
        for tok in l.split_whitespace() {
            let s = match tok {
                "+1" | "1" => 1,
                "-1" => -1,
                other => {
                    return Err(SlideError::Parse { line, msg: format!("spin token {other:?} is not +1/-1") })
                }
            };
            spins.push(s);
            width += 1;
        }
        match p {
            None => p = Some(width),
            Some(q) if q != width => {
                return Err(SlideError::Parse { line, msg: format!("row has {width} spins, expected {q}") })
            }
            _ => {}
        }
        rows += 1;
    }
    let p = p.or(header.map(|h| h.1)).ok_or(SlideError::Parse { line: 1, msg: "no samples".into() })?;
    if let Some((n, hp)) = header {
        if hp != p || n != rows {
            return Err(SlideError::Parse {
                line: 1,
                msg: format!("header says n={n} p={hp}, body has n={rows} p={p}"),
            });
        }
    }
    if rows == 0 {
        return Err(SlideError::Parse { line: 1, msg: "no samples".into() });
    }
    Dataset::new(p, spins)
}

fn parse_header(rest: &str, line: usize) -> Result<Option<(usize, usize)>> {
    let mut n = None;
    let mut p = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("n", v)) => n = v.parse().ok(),
            Some(("p", v)) => p = v.parse().ok(),
            _ => {}
        }
    }
    match (n, p) {
        (Some(n), Some(p)) => Ok(Some((n, p))),
        (None, None) => Ok(None),
        _ => Err(SlideError::Parse { line, msg: "malformed `# n=<int> p=<int>` header".into() }),
    }
}

pub fn read_samples(path: &Path) -> Result<Dataset> {
    parse_samples(&std::fs::read_to_string(path)?)
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (key, value) = l
            .split_once('=')
            .ok_or(SlideError::Parse { line: k + 1, msg: format!("expected key=value, found {l:?}") })?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// What a vote token stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoteToken {
    Plus,
    Minus,
    Missing,
}

/// How missing votes become spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    Impute(i8),
    Reject,
}

impl Default for MissingPolicy {
    /// Missing votes count as Nay.
    fn default() -> Self {
        MissingPolicy::Impute(-1)
    }
}

/// Delimiter, token map and missing-vote policy for [`ingest_vote_matrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct VoteFormat {
    pub delimiter: char,
    pub has_header: bool,
    pub tokens: HashMap<String, VoteToken>,
    pub missing: MissingPolicy,
}

impl VoteFormat {
    /// Reads the key=value form:
    ///
    /// ```text
    /// delimiter = ,
    /// header = false
    /// plus = Yea|Y
    /// minus = Nay|N
    /// missing = ?|NA
    /// impute = -1        # or +1, or reject
    /// ```
    ///
    /// Token lists are `|`-separated. `delimiter = tab` selects a tab.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let kv = parse_key_values(text)?;
        let delimiter = match kv.get("delimiter").map(String::as_str) {
            None | Some("") => ',',
            Some("tab") | Some("\\t") => '\t',
            Some("space") => ' ',
            Some(s) if s.chars().count() == 1 => s.chars().next().unwrap(),
            Some(s) => return Err(SlideError::InvalidArgument(format!("delimiter must be one character, got {s:?}"))),
        };
        let has_header = match kv.get("header").map(String::as_str) {
            None | Some("false") | Some("no") | Some("0") => false,
            Some("true") | Some("yes") | Some("1") => true,
            Some(s) => return Err(SlideError::InvalidArgument(format!("header must be true/false, got {s:?}"))),
        };
        let mut tokens = HashMap::new();
        for (key, kind) in [("plus", VoteToken::Plus), ("minus", VoteToken::Minus), ("missing", VoteToken::Missing)] {
            if let Some(list) = kv.get(key) {
                for tok in list.split('|') {
                    tokens.insert(tok.trim().to_string(), kind);
                }
            }
        }
        let missing = match kv.get("impute").map(String::as_str) {
            None | Some("-1") | Some("nay") => MissingPolicy::Impute(-1),
            Some("+1") | Some("1") | Some("yea") => MissingPolicy::Impute(1),
            Some("reject") => MissingPolicy::Reject,
            Some(s) => return Err(SlideError::InvalidArgument(format!("impute must be -1, +1 or reject, got {s:?}"))),
        };
        for (key, _) in kv.iter() {
            if !matches!(key.as_str(), "delimiter" | "header" | "plus" | "minus" | "missing" | "impute") {
                return Err(SlideError::InvalidArgument(format!("unknown vote config key {key:?}")));
            }
        }
        Ok(Self { delimiter, has_header, tokens, missing })
    }
}

/// Maps a delimited vote matrix to spins: rows are samples, columns are
/// variables. Row and column numbers in errors are 1-based.
pub fn ingest_vote_matrix(text: &str, format: &VoteFormat) -> Result<Dataset> {
    let mut spins = Vec::new();
    let mut width: Option<usize> = None;
    let mut row = 0usize;
    for (k, raw) in text.lines().enumerate() {
        if k == 0 && format.has_header {
            continue;
        }
        let l = raw.trim_end_matches('\r');
        if l.trim().is_empty() {
            continue;
        }
        row += 1;
        let fields: Vec<&str> = l.split(format.delimiter).map(str::trim).collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(SlideError::RaggedRow { row, expected: w, found: fields.len() })
            }
            _ => {}
        }
        for (c, tok) in fields.iter().enumerate() {
            let spin = match format.tokens.get(*tok) {
                Some(VoteToken::Plus) => 1,
                Some(VoteToken::Minus) => -1,
                Some(VoteToken::Missing) => match format.missing {
                    MissingPolicy::Impute(v) => v,
                    MissingPolicy::Reject => {
                        return Err(SlideError::UnknownToken { token: tok.to_string(), row, col: c + 1 })
                    }
                },
                None => return Err(SlideError::UnknownToken { token: tok.to_string(), row, col: c + 1 }),
            };
            spins.push(spin);
        }
    }
    let p = width.ok_or(SlideError::Parse { line: 1, msg: "empty vote matrix".into() })?;
    Dataset::new(p, spins)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn senate_format() -> VoteFormat {
        VoteFormat::from_key_values("delimiter = ,\nplus = Yea\nminus = Nay\nmissing = ?\n").unwrap()
    }

    #[test]
    fn votes_with_missing_as_nay() {
        let data = ingest_vote_matrix("Yea,Nay\nYea,Yea\n?,Nay\n", &senate_format()).unwrap();
        assert_eq!(data.as_slice(), &[1, -1, 1, 1, -1, -1]);
    }

    #[test]
    fn all_yea() {
        let data = ingest_vote_matrix("Yea,Yea,Yea\nYea,Yea,Yea\n", &senate_format()).unwrap();
        assert!(data.as_slice().iter().all(|&s| s == 1));
    }

    #[test]
    fn unknown_token_is_located() {
        let err = ingest_vote_matrix("Yea,Nay\nPresent,Yea\n", &senate_format()).unwrap_err();
        match err {
            SlideError::UnknownToken { token, row, col } => {
                assert_eq!((token.as_str(), row, col), ("Present", 2, 1));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn ragged_vote_rows() {
        let err = ingest_vote_matrix("Yea,Nay\nYea\n", &senate_format()).unwrap_err();
        assert!(matches!(err, SlideError::RaggedRow { row: 2, expected: 2, found: 1 }));
    }

    #[test]
    fn missing_policy_override() {
        let mut f = senate_format();
        f.missing = MissingPolicy::Impute(1);
        assert_eq!(ingest_vote_matrix("?,Nay\n", &f).unwrap().as_slice(), &[1, -1]);
        f.missing = MissingPolicy::Reject;
        assert!(ingest_vote_matrix("?,Nay\n", &f).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let j = CouplingMatrix::from_edges(4, &[(0, 1, 0.1), (2, 3, -1.0 / 3.0)]).unwrap();
        let text = format_model(&j);
        assert!(text.starts_with("p 4\n"));
        assert_eq!(parse_model(&text).unwrap(), j);
    }

    #[test]
    fn model_parse_errors_carry_lines() {
        let err = parse_model("p 3\n0 1 0.5\n2 1 0.3\n").unwrap_err();
        assert!(matches!(err, SlideError::Parse { line: 3, .. }));
    }

    #[test]
    fn samples_round_trip_and_header() {
        let data = Dataset::from_rows(&[vec![1, -1, 1], vec![-1, -1, 1]]).unwrap();
        let text = format_samples(&data);
        assert!(text.starts_with("# n=2 p=3\n"));
        assert_eq!(parse_samples(&text).unwrap(), data);
    }

    #[test]
    fn samples_reject_zero_one() {
        let err = parse_samples("1 0\n0 1\n").unwrap_err();
        assert!(matches!(err, SlideError::Parse { line: 1, .. }));
        assert!(parse_samples("# n=3 p=2\n+1 -1\n").is_err());
    }
}
