//! Presentation file parsing and canonical emission.
//!
//! One declaration per line, `#` starts a comment, CRLF tolerated:
//!
//! ```text
//! prime: 3
//! ngens: 3
//! power 1: 1
//! comm 2 1: g3
//! sigma: g1^2, g2^2, g3
//! ```
//!
//! Words are space-separated `g<k>` or `g<k>^<e>` tokens with 1-based
//! generator numbers; `1` or an empty word is the identity. `prime` and
//! `ngens` must come before any relation. Missing `power` lines default to
//! the identity (exponent-p generators).

use std::collections::BTreeMap;
use std::fmt;

use propp_core::fp_linalg::is_odd_prime;
use propp_core::pc::{PcPresentation, Word};

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone)]
pub struct ParsedFile {
    pub pres: PcPresentation,
    pub sigma: Option<Vec<Word>>,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, col, msg: msg.into() }
}

/// Parse one word starting at 1-based column `base` of line `line_no`.
fn parse_word(text: &str, line_no: usize, base: usize, ngens: usize) -> Result<Word, ParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "1" {
        return Ok(Word::identity());
    }
    let mut terms: Vec<(usize, u32)> = Vec::new();
    let mut offset = 0usize;
    for token in text.split(' ') {
        let col = base + offset;
        offset += token.chars().count() + 1;
        if token.is_empty() {
            continue;
        }
        let rest = token
            .strip_prefix('g')
            .ok_or_else(|| err(line_no, col, format!("expected g<k> or g<k>^<e>, got '{}'", token)))?;
        let (gen_str, exp_str) = match rest.split_once('^') {
            Some((g, e)) => (g, Some(e)),
            None => (rest, None),
        };
        let gen: usize = gen_str
            .parse()
            .map_err(|_| err(line_no, col, format!("bad generator number '{}'", token)))?;
        if gen == 0 || gen > ngens {
            return Err(err(
                line_no,
                col,
                format!("generator g{} out of range 1..={}", gen, ngens),
            ));
        }
        let exp: u32 = match exp_str {
            None => 1,
            Some(e) => e
                .parse()
                .map_err(|_| err(line_no, col, format!("bad exponent in '{}'", token)))?,
        };
        if exp == 0 {
            return Err(err(line_no, col, "exponent must be at least 1"));
        }
        terms.push((gen - 1, exp));
    }
    if terms.is_empty() {
        return Err(err(line_no, base, "empty word; write 1 for the identity"));
    }
    Ok(Word::from_terms(terms))
}

fn parse_index(s: &str, line_no: usize, col: usize, what: &str) -> Result<usize, ParseError> {
    s.parse::<usize>().map_err(|_| err(line_no, col, format!("bad {} '{}'", what, s)))
}

pub fn parse_presentation(text: &str) -> Result<ParsedFile, ParseError> {
    let mut prime: Option<u32> = None;
    let mut ngens: Option<usize> = None;
    let mut powers: Vec<Option<Word>> = Vec::new();
    let mut comms: BTreeMap<(usize, usize), Word> = BTreeMap::new();
    let mut sigma: Option<Vec<Word>> = None;
    let mut last_line = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let colon = line
            .find(':')
            .ok_or_else(|| err(line_no, 1, "expected '<keyword>: <value>'"))?;
        let head = &line[..colon];
        let value = &line[colon + 1..];
        let value_col = colon + 2 + value.chars().take_while(|c| *c == ' ').count();
        let value = value.trim_start();
        let parts: Vec<&str> = head.split_whitespace().collect();
        if parts.is_empty() {
            return Err(err(line_no, 1, "missing keyword before ':'"));
        }
        match parts[0] {
            "prime" => {
                if parts.len() != 1 {
                    return Err(err(line_no, 1, "prime takes no indices"));
                }
                if prime.is_some() {
                    return Err(err(line_no, 1, "prime declared twice"));
                }
                let p: u32 = value
                    .trim()
                    .parse()
                    .map_err(|_| err(line_no, value_col, format!("bad prime '{}'", value.trim())))?;
                if p % 2 == 0 {
                    return Err(err(line_no, value_col, format!("p must be odd (got {})", p)));
                }
                if !is_odd_prime(p) {
                    return Err(err(line_no, value_col, format!("{} is not an odd prime", p)));
                }
                prime = Some(p);
            }
            "ngens" => {
                if ngens.is_some() {
                    return Err(err(line_no, 1, "ngens declared twice"));
                }
                let n: usize = value
                    .trim()
                    .parse()
                    .map_err(|_| err(line_no, value_col, format!("bad ngens '{}'", value.trim())))?;
                ngens = Some(n);
                powers = vec![None; n];
            }
            "power" => {
                let n = ngens.ok_or_else(|| err(line_no, 1, "ngens must come before power"))?;
                if parts.len() != 2 {
                    return Err(err(line_no, 1, "power needs one generator index"));
                }
                let i = parse_index(parts[1], line_no, 1, "generator index")?;
                if i == 0 || i > n {
                    return Err(err(line_no, 1, format!("power index {} out of range 1..={}", i, n)));
                }
                if powers[i - 1].is_some() {
                    return Err(err(line_no, 1, format!("power {} declared twice", i)));
                }
                powers[i - 1] = Some(parse_word(value, line_no, value_col, n)?);
            }
            "comm" => {
                let n = ngens.ok_or_else(|| err(line_no, 1, "ngens must come before comm"))?;
                if parts.len() != 3 {
                    return Err(err(line_no, 1, "comm needs two generator indices"));
                }
                let j = parse_index(parts[1], line_no, 1, "generator index")?;
                let i = parse_index(parts[2], line_no, 1, "generator index")?;
                if j == 0 || j > n || i == 0 || i > n {
                    return Err(err(line_no, 1, format!("comm indices must lie in 1..={}", n)));
                }
                if j <= i {
                    return Err(err(line_no, 1, "comm indices must satisfy j > i"));
                }
                if comms.contains_key(&(j - 1, i - 1)) {
                    return Err(err(line_no, 1, format!("comm {} {} declared twice", j, i)));
                }
                comms.insert((j - 1, i - 1), parse_word(value, line_no, value_col, n)?);
            }
            "sigma" => {
                let n = ngens.ok_or_else(|| err(line_no, 1, "ngens must come before sigma"))?;
                if sigma.is_some() {
                    return Err(err(line_no, 1, "sigma declared twice"));
                }
                let mut images = Vec::with_capacity(n);
                let mut col = value_col;
                let pieces: Vec<&str> = value.split(',').collect();
                if pieces.len() != n {
                    return Err(err(
                        line_no,
                        value_col,
                        format!("sigma needs {} comma-separated words, got {}", n, pieces.len()),
                    ));
                }
                for piece in pieces {
                    images.push(parse_word(piece, line_no, col, n)?);
                    col += piece.chars().count() + 1;
                }
                sigma = Some(images);
            }
            other => {
                return Err(err(line_no, 1, format!("unknown keyword '{}'", other)));
            }
        }
    }

    let p = prime.ok_or_else(|| err(last_line.max(1), 1, "missing 'prime:' declaration"))?;
    let n = ngens.ok_or_else(|| err(last_line.max(1), 1, "missing 'ngens:' declaration"))?;
    let powers: Vec<Word> = powers.into_iter().map(|w| w.unwrap_or_else(Word::identity)).collect();
    let pres = PcPresentation::new(p, n, powers, comms)
        .map_err(|e| err(1, 1, format!("presentation invalid: {}", e)))?;
    Ok(ParsedFile { pres, sigma })
}

/// Canonical file text. Parsing it back yields an identical presentation
/// (and sigma words), which the report echo relies on.
pub fn emit_parsed(pres: &PcPresentation, sigma: Option<&[Word]>) -> String {
    let mut out = propp_core::suites::presentation_text(pres);
    if let Some(images) = sigma {
        out.push_str(&format!("sigma: {}\n", propp_core::suites::sigma_text(images)));
    }
    out
}
