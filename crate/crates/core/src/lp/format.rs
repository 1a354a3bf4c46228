//! CPLEX-style LP text: `Minimize`, `Subject To`, `Bounds` and `End`
//! sections, `\` comments, named rows and columns. Every column is listed
//! in the objective (zero coefficients included) so that column order
//! survives a round trip; columns without a bounds line default to
//! `[0, +inf)`.

use std::collections::HashMap;
use std::fmt::Write;

use super::{LinearProgram, LpError, Sense};

const TERMS_PER_LINE: usize = 8;

fn clean_name(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect();
    if s.is_empty() || !s.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        s.insert(0, '_');
    }
    s
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    for (k, (c, name)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        if k == 0 {
            let _ = write!(out, "{c} {name}");
        } else if c.is_sign_negative() {
            let _ = write!(out, " - {} {name}", -c);
        } else {
            let _ = write!(out, " + {c} {name}");
        }
    }
}

pub fn export_lp(lp: &LinearProgram) -> String {
    let cols: Vec<String> = lp.col_names.iter().map(|n| clean_name(n)).collect();
    let mut out = String::from("\\ linear program\nMinimize\n obj: ");
    write_terms(&mut out, lp.objective.iter().zip(&cols).map(|(c, n)| (*c, n.clone())));
    out.push_str("\nSubject To\n");
    for (r, range) in lp.row_ranges().into_iter().enumerate() {
        let _ = write!(out, " {}: ", clean_name(&lp.row_names[r]));
        write_terms(&mut out, lp.triplets[range].iter().map(|t| (t.value, cols[t.col].clone())));
        let op = match lp.senses[r] {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", lp.rhs[r]);
    }
    out.push_str("Bounds\n");
    let fmt_bound = |v: f64| {
        if v == f64::INFINITY {
            "+inf".to_string()
        } else if v == f64::NEG_INFINITY {
            "-inf".to_string()
        } else {
            format!("{v}")
        }
    };
    for (j, name) in cols.iter().enumerate() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo == 0.0 && hi == f64::INFINITY {
            continue;
        }
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", fmt_bound(lo), fmt_bound(hi));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> LpError {
    LpError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_.[]!\"#$%&()/,;?@`'{}|~".contains(c)
}

fn tokenize_line(text: &str, line: usize, out: &mut Vec<Token>) -> Result<(), LpError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let push = |tok, out: &mut Vec<Token>| out.push(Token { tok, line, col });
        match c {
            '+' => {
                push(Tok::Plus, out);
                i += 1;
            }
            '-' => {
                push(Tok::Minus, out);
                i += 1;
            }
            ':' => {
                push(Tok::Colon, out);
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j], '<' | '>' | '=') {
                    j += 1;
                }
                let op: String = chars[i..j].iter().collect();
                let sense = match op.as_str() {
                    "<" | "<=" | "=<" => Sense::Le,
                    ">" | ">=" | "=>" => Sense::Ge,
                    "=" => Sense::Eq,
                    _ => return Err(err(line, col, format!("unknown operator {op}"))),
                };
                push(Tok::Cmp(sense), out);
                i = j;
            }
            '0'..='9' | '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && matches!(chars[j], 'e' | 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && matches!(chars[k], '+' | '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        j = k;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let v = s
                    .parse::<f64>()
                    .map_err(|_| err(line, col, format!("malformed number {s}")))?;
                push(Tok::Num(v), out);
                i = j;
            }
            c if is_ident_char(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let lower = s.to_ascii_lowercase();
                let tok = if lower == "inf" || lower == "infinity" {
                    Tok::Num(f64::INFINITY)
                } else {
                    Tok::Ident(s)
                };
                push(tok, out);
                i = j;
            }
            other => return Err(err(line, col, format!("unexpected character {other:?}"))),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    End,
}

fn header(line: &str) -> Option<Section> {
    let words: Vec<String> = line.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    match words.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["minimize"] | ["minimise"] | ["minimum"] | ["min"] => Some(Section::Objective),
        ["subject", "to"] | ["such", "that"] | ["st"] | ["s.t."] => Some(Section::Constraints),
        ["bounds"] | ["bound"] => Some(Section::Bounds),
        ["end"] => Some(Section::End),
        _ => None,
    }
}

struct Builder {
    lp: LinearProgram,
    index: HashMap<String, usize>,
}

impl Builder {
    fn col(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.lp.add_col(name, 0.0, 0.0, f64::INFINITY);
        self.index.insert(name.to_string(), j);
        j
    }
}

/// Reads `[sign] [number] name` terms until a comparison or the end.
fn parse_terms(
    toks: &[Token],
    pos: &mut usize,
    b: &mut Builder,
) -> Result<Vec<(usize, f64)>, LpError> {
    let mut terms = Vec::new();
    while *pos < toks.len() {
        let start = &toks[*pos];
        let mut sign = 1.0;
        let mut explicit_sign = false;
        while let Some(t) = toks.get(*pos) {
            match t.tok {
                Tok::Plus => {}
                Tok::Minus => sign = -sign,
                _ => break,
            }
            explicit_sign = true;
            *pos += 1;
        }
        if !terms.is_empty() && !explicit_sign {
            if matches!(toks.get(*pos).map(|t| &t.tok), Some(Tok::Cmp(_))) {
                break;
            }
            let t = &toks[*pos];
            return Err(err(t.line, t.col, "expected + or - between terms"));
        }
        if terms.is_empty() && !explicit_sign && matches!(start.tok, Tok::Cmp(_)) {
            break;
        }
        let mut coef = 1.0;
        if let Some(Token { tok: Tok::Num(v), .. }) = toks.get(*pos) {
            coef = *v;
            *pos += 1;
        }
        match toks.get(*pos) {
            Some(Token { tok: Tok::Ident(name), .. }) => {
                let j = b.col(name);
                terms.push((j, sign * coef));
                *pos += 1;
            }
            Some(t) => return Err(err(t.line, t.col, "expected a variable name")),
            None => {
                let t = toks.last().unwrap_or(start);
                return Err(err(t.line, t.col + 1, "expected a variable name"));
            }
        }
        if matches!(toks.get(*pos).map(|t| &t.tok), Some(Tok::Cmp(_))) {
            break;
        }
    }
    Ok(terms)
}

fn signed_number(toks: &[Token], pos: &mut usize, line: usize) -> Result<f64, LpError> {
    let mut sign = 1.0;
    while let Some(t) = toks.get(*pos) {
        match t.tok {
            Tok::Plus => {}
            Tok::Minus => sign = -sign,
            _ => break,
        }
        *pos += 1;
    }
    match toks.get(*pos) {
        Some(Token { tok: Tok::Num(v), .. }) => {
            *pos += 1;
            Ok(sign * v)
        }
        Some(t) => Err(err(t.line, t.col, "expected a number")),
        None => Err(err(line, 1, "expected a number")),
    }
}

fn take_label(toks: &[Token], pos: &mut usize) -> Option<String> {
    if let (Some(Token { tok: Tok::Ident(n), .. }), Some(Token { tok: Tok::Colon, .. })) =
        (toks.get(*pos), toks.get(*pos + 1))
    {
        *pos += 2;
        return Some(n.clone());
    }
    None
}

fn parse_bound(toks: &[Token], b: &mut Builder, line: usize) -> Result<(), LpError> {
    let mut pos = 0;
    let first = &toks[0];
    // name free | name op num | num op name [op num]
    if let Tok::Ident(name) = &first.tok {
        if let Some(Token { tok: Tok::Ident(kw), .. }) = toks.get(1) {
            if kw.eq_ignore_ascii_case("free") && toks.len() == 2 {
                let j = b.col(name);
                b.lp.lower[j] = f64::NEG_INFINITY;
                b.lp.upper[j] = f64::INFINITY;
                return Ok(());
            }
        }
        let j = b.col(name);
        pos += 1;
        let op = match toks.get(pos) {
            Some(Token { tok: Tok::Cmp(s), .. }) => *s,
            Some(t) => return Err(err(t.line, t.col, "expected a comparison")),
            None => return Err(err(line, first.col, "incomplete bound")),
        };
        pos += 1;
        let v = signed_number(toks, &mut pos, line)?;
        match op {
            Sense::Le => b.lp.upper[j] = v,
            Sense::Ge => b.lp.lower[j] = v,
            Sense::Eq => {
                b.lp.lower[j] = v;
                b.lp.upper[j] = v;
            }
        }
    } else {
        let lo = signed_number(toks, &mut pos, line)?;
        match toks.get(pos) {
            Some(Token { tok: Tok::Cmp(Sense::Le), .. }) => pos += 1,
            Some(t) => return Err(err(t.line, t.col, "expected <=")),
            None => return Err(err(line, first.col, "incomplete bound")),
        }
        let j = match toks.get(pos) {
            Some(Token { tok: Tok::Ident(n), .. }) => b.col(n),
            Some(t) => return Err(err(t.line, t.col, "expected a variable name")),
            None => return Err(err(line, first.col, "incomplete bound")),
        };
        pos += 1;
        b.lp.lower[j] = lo;
        if pos < toks.len() {
            match &toks[pos].tok {
                Tok::Cmp(Sense::Le) => pos += 1,
                _ => return Err(err(toks[pos].line, toks[pos].col, "expected <=")),
            }
            b.lp.upper[j] = signed_number(toks, &mut pos, line)?;
        }
    }
    if let Some(t) = toks.get(pos) {
        return Err(err(t.line, t.col, "trailing tokens in bound"));
    }
    Ok(())
}

pub fn import_lp(text: &str) -> Result<LinearProgram, LpError> {
    let mut b = Builder {
        lp: LinearProgram::new(),
        index: HashMap::new(),
    };
    let mut section = Section::Preamble;
    let mut objective_tokens: Vec<Token> = Vec::new();
    let mut objective_line = 0;
    let mut constraint_tokens: Vec<Token> = Vec::new();
    let mut seen_objective = false;
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let body = raw.split('\\').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        if let Some(s) = header(body) {
            if s == Section::Objective {
                seen_objective = true;
                objective_line = line;
            }
            section = s;
            continue;
        }
        let mut toks = Vec::new();
        tokenize_line(body, line, &mut toks)?;
        match section {
            Section::Preamble => {
                if body.trim_start().to_ascii_lowercase().starts_with("max") {
                    return Err(err(line, 1, "only minimisation is supported"));
                }
                return Err(err(line, 1, "expected Minimize section"));
            }
            Section::Objective => objective_tokens.extend(toks),
            Section::Constraints => constraint_tokens.extend(toks),
            Section::Bounds => {
                // Bounds can only be applied once all columns are known.
                constraint_tokens.push(Token {
                    tok: Tok::Ident("\u{0}bounds".into()),
                    line,
                    col: 0,
                });
                constraint_tokens.extend(toks);
            }
            Section::End => return Err(err(line, 1, "content after End")),
        }
    }
    if !seen_objective {
        return Err(err(1, 1, "missing Minimize section"));
    }
    let mut pos = 0;
    take_label(&objective_tokens, &mut pos);
    if pos >= objective_tokens.len() {
        return Err(err(objective_line, 1, "empty objective section"));
    }
    let obj = parse_terms(&objective_tokens, &mut pos, &mut b)?;
    if let Some(t) = objective_tokens.get(pos) {
        return Err(err(t.line, t.col, "unexpected token in objective"));
    }
    for (j, c) in obj {
        b.lp.objective[j] += c;
    }

    // Split the row stream from the bound lines.
    let split = constraint_tokens
        .iter()
        .position(|t| t.tok == Tok::Ident("\u{0}bounds".into()))
        .unwrap_or(constraint_tokens.len());
    let (rows, bounds) = constraint_tokens.split_at(split);
    let mut pos = 0;
    while pos < rows.len() {
        let start = rows[pos].clone();
        let name = take_label(rows, &mut pos).unwrap_or_else(|| format!("r{}", b.lp.n_rows()));
        let terms = parse_terms(rows, &mut pos, &mut b)?;
        let sense = match rows.get(pos) {
            Some(Token { tok: Tok::Cmp(s), .. }) => *s,
            Some(t) => return Err(err(t.line, t.col, "expected a comparison")),
            None => return Err(err(start.line, start.col, "row has no comparison")),
        };
        pos += 1;
        let rhs = signed_number(rows, &mut pos, start.line)?;
        if terms.is_empty() || terms.iter().all(|(_, c)| *c == 0.0) {
            return Err(err(start.line, start.col, "row has no coefficients"));
        }
        if !rhs.is_finite() {
            return Err(err(start.line, start.col, "right-hand side must be finite"));
        }
        b.lp.add_row(name, &terms, sense, rhs);
    }
    let mut by_line: Vec<Vec<Token>> = Vec::new();
    for t in bounds {
        if t.tok == Tok::Ident("\u{0}bounds".into()) {
            by_line.push(Vec::new());
        } else if let Some(l) = by_line.last_mut() {
            l.push(t.clone());
        }
    }
    for toks in by_line.iter().filter(|l| !l.is_empty()) {
        parse_bound(toks, &mut b, toks[0].line)?;
    }
    b.lp
        .validate()
        .map_err(|e| err(last_line, 1, e.to_string()))?;
    Ok(b.lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Triplet;

    #[test]
    fn hand_written_two_rows() {
        let text = "\\ toy\nMinimize\n obj: x + 2 y\nSubject To\n c1: x + y >= 1\n c2: 3 x - 0.5 y <= 4\nBounds\n y <= 10\nEnd\n";
        let lp = import_lp(text).unwrap();
        assert_eq!(lp.col_names, vec!["x", "y"]);
        assert_eq!(lp.objective, vec![1.0, 2.0]);
        assert_eq!(
            lp.triplets,
            vec![
                Triplet { row: 0, col: 0, value: 1.0 },
                Triplet { row: 0, col: 1, value: 1.0 },
                Triplet { row: 1, col: 0, value: 3.0 },
                Triplet { row: 1, col: 1, value: -0.5 },
            ]
        );
        assert_eq!(lp.senses, vec![Sense::Ge, Sense::Le]);
        assert_eq!(lp.rhs, vec![1.0, 4.0]);
        assert_eq!(lp.upper, vec![f64::INFINITY, 10.0]);
    }

    #[test]
    fn empty_objective_is_an_error() {
        let e = import_lp("Minimize\nSubject To\n c: x <= 1\nEnd\n").unwrap_err();
        assert!(matches!(e, LpError::Parse { line: 1, .. }), "{e:?}");
        let e = import_lp("Minimize\n obj:\nSubject To\n c: x <= 1\nEnd\n").unwrap_err();
        assert!(matches!(e, LpError::Parse { .. }));
    }

    #[test]
    fn error_positions() {
        let e = import_lp("Minimize\n obj: x\nSubject To\n c: x <= 1 ^\nEnd\n").unwrap_err();
        assert_eq!(e, err(4, 12, "unexpected character '^'"));
        let e = import_lp("Minimize\n obj: x y\nEnd\n").unwrap_err();
        assert!(matches!(e, LpError::Parse { line: 2, column: 9, .. }), "{e:?}");
    }

    #[test]
    fn round_trip_with_bounds() {
        let mut lp = LinearProgram::new();
        let a = lp.add_col("a", 0.1, f64::NEG_INFINITY, f64::INFINITY);
        let b = lp.add_col("b", 0.0, -2.5, 1e-7);
        let c = lp.add_col("c", -1.0 / 3.0, 0.0, f64::INFINITY);
        let d = lp.add_col("d", 2.0, 1.0, f64::INFINITY);
        let cols: Vec<(usize, f64)> = (0..20).map(|k| ([a, b, c, d][k % 4], 1.0 + k as f64 / 7.0)).collect();
        lp.add_row("wide", &cols, Sense::Le, 1e10);
        lp.add_row("eq", &[(b, -1.0), (d, 2.0 / 3.0)], Sense::Eq, -0.25);
        lp.add_row("ge", &[(c, 5e-13)], Sense::Ge, -3.0);
        let back = import_lp(&export_lp(&lp)).unwrap();
        assert_eq!(back, lp);
    }
}
