//! Text formats for polynomial systems and start points, and the JSON report.
//!
//! A system file starts with a `vars` line naming the unknowns, followed by
//! one polynomial per line:
//!
//! ```text
//! # comments run to the end of the line
//! vars x y z
//! x^4
//! x^2*y + y^4
//! z + z^2 - 7*x^3 - 8*x^2
//! ```
//!
//! Factors inside a term are joined by an explicit `*`. Exponents are
//! non-negative integers. Complex coefficients are written `(a+bi)`.
//! A start file holds one number per line in `vars` order.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::interval::{CInterval, Interval};
use crate::poly::{PolySystem, Polynomial};
use crate::scalar::Scalar;
use crate::viss::VissResult;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: undeclared variable `{name}`")]
    UndeclaredVariable { line: usize, column: usize, name: String },
    #[error("line {line}, column {column}: exponent must be a non-negative integer")]
    BadExponent { line: usize, column: usize },
    #[error("line {line}, column {column}: complex coefficient in a real system")]
    ComplexInReal { line: usize, column: usize },
    #[error("missing `vars` header")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("expected {expected} values, found {found}")]
    WrongCount { expected: usize, found: usize },
}

/// Non-empty logical lines with comments and `\r` removed, paired with
/// their 1-based line numbers.
fn logical_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let body = raw.split('#').next().unwrap_or("");
        (!body.trim().is_empty()).then_some((i + 1, body))
    })
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor { src, pos: 0, line }
    }

    fn column(&self) -> usize {
        self.src[..self.pos].chars().count() + 1
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.column(),
            message: message.into(),
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    fn name(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        if !self.peek().is_some_and(is_name_start) {
            return None;
        }
        while self.peek().is_some_and(is_name_char) {
            self.bump();
        }
        Some(&self.src[start..self.pos])
    }

    /// Unsigned decimal literal.
    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let col = self.column();
        let mut digits = 0;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            digits += 1;
        }
        if self.peek() == Some('.') {
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
                digits += 1;
            }
        }
        if digits == 0 {
            self.pos = start;
            return Err(self.err("expected a number"));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            } else {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or(ParseError::Syntax {
                line: self.line,
                column: col,
                message: format!("invalid number `{text}`"),
            })
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let v = self.number()?;
        Ok(if neg { -v } else { v })
    }

    /// `(a)`, `(a+bi)`, `(a-bi)` or `(bi)`, after the opening parenthesis.
    fn complex_body(&mut self) -> Result<(f64, f64), ParseError> {
        let first = self.signed_number()?;
        if self.eat('i') {
            self.expect(')')?;
            return Ok((0.0, first));
        }
        if self.eat(')') {
            return Ok((first, 0.0));
        }
        let neg = if self.eat('-') {
            true
        } else if self.eat('+') {
            false
        } else {
            return Err(self.err("expected `+`, `-` or `)` in complex literal"));
        };
        let im = self.number()?;
        if !self.eat('i') {
            return Err(self.err("expected `i` after imaginary part"));
        }
        self.expect(')')?;
        Ok((first, if neg { -im } else { im }))
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let line = self.line;
        let column = self.column();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let ok = self.pos > start && !matches!(self.peek(), Some('.' | 'e' | 'E'));
        if !ok {
            return Err(ParseError::BadExponent { line, column });
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| ParseError::BadExponent { line, column })
    }
}

fn to_scalar<T: Scalar>(re: f64, im: f64, line: usize, column: usize) -> Result<T, ParseError> {
    T::from_parts(re, im).ok_or(ParseError::ComplexInReal { line, column })
}

fn parse_poly<T: Scalar>(cur: &mut Cursor<'_>, names: &[String]) -> Result<Polynomial<T>, ParseError> {
    let n = names.len();
    let mut p = Polynomial::zero(n);
    let mut first = true;
    loop {
        if cur.at_end() {
            if first {
                return Err(cur.err("expected a term"));
            }
            break;
        }
        let neg = if cur.eat('-') {
            true
        } else if cur.eat('+') || first {
            false
        } else {
            return Err(cur.err("expected `+` or `-` between terms"));
        };
        first = false;
        let mut coef = T::one();
        let mut exps = vec![0u32; n];
        loop {
            cur.skip_ws();
            let line = cur.line;
            let column = cur.column();
            match cur.peek() {
                Some('(') => {
                    cur.bump();
                    let (re, im) = cur.complex_body()?;
                    coef *= to_scalar::<T>(re, im, line, column)?;
                }
                Some(c) if c.is_ascii_digit() || c == '.' => {
                    let v = cur.number()?;
                    coef *= T::from_real(v);
                }
                Some(c) if is_name_start(c) => {
                    let name = cur.name().expect("name start checked");
                    let var = names
                        .iter()
                        .position(|v| v == name)
                        .ok_or_else(|| ParseError::UndeclaredVariable {
                            line,
                            column,
                            name: name.to_string(),
                        })?;
                    let e = if cur.eat('^') { cur.exponent()? } else { 1 };
                    exps[var] += e;
                }
                _ => return Err(cur.err("expected a coefficient or variable")),
            }
            if !cur.eat('*') {
                break;
            }
        }
        if neg {
            coef = -coef;
        }
        let term = Polynomial::from_terms(n, [(exps, coef)]).expect("exponent length matches");
        p = &p + &term;
        cur.skip_ws();
        if cur.peek() == Some(';') {
            cur.bump();
            if !cur.at_end() {
                return Err(cur.err("unexpected text after `;`"));
            }
            break;
        }
    }
    Ok(p)
}

fn parse_header(line: usize, body: &str) -> Result<Vec<String>, ParseError> {
    let mut words = body.split_whitespace();
    if words.next() != Some("vars") {
        return Err(ParseError::MissingHeader);
    }
    let names: Vec<String> = words.map(str::to_string).collect();
    if names.is_empty() {
        return Err(ParseError::Header {
            line,
            message: "no variables declared".into(),
        });
    }
    for (i, name) in names.iter().enumerate() {
        let mut chars = name.chars();
        let valid = chars.next().is_some_and(is_name_start) && chars.all(is_name_char);
        if !valid {
            return Err(ParseError::Header {
                line,
                message: format!("invalid variable name `{name}`"),
            });
        }
        if names[..i].contains(name) {
            return Err(ParseError::Header {
                line,
                message: format!("variable `{name}` declared twice"),
            });
        }
    }
    Ok(names)
}

/// Parses a system file.
pub fn parse_system<T: Scalar>(text: &str) -> Result<PolySystem<T>, ParseError> {
    let mut lines = logical_lines(text);
    let (hline, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let names = parse_header(hline, header)?;
    let mut polys = Vec::new();
    for (line, body) in lines {
        let mut cur = Cursor::new(body, line);
        polys.push(parse_poly::<T>(&mut cur, &names)?);
    }
    Ok(PolySystem::new(polys, names).expect("names validated and arity shared"))
}

/// Parses a start file with exactly `n` values.
pub fn parse_start<T: Scalar>(text: &str, n: usize) -> Result<Vec<T>, ParseError> {
    let mut out = Vec::with_capacity(n);
    for (line, body) in logical_lines(text) {
        let mut cur = Cursor::new(body, line);
        cur.skip_ws();
        let column = cur.column();
        let (re, im) = if cur.eat('(') {
            cur.complex_body()?
        } else {
            (cur.signed_number()?, 0.0)
        };
        if !cur.at_end() {
            return Err(cur.err("one value per line expected"));
        }
        out.push(to_scalar::<T>(re, im, line, column)?);
    }
    if out.len() != n {
        return Err(ParseError::WrongCount {
            expected: n,
            found: out.len(),
        });
    }
    Ok(out)
}

fn format_coef<T: Scalar>(c: T, leading: bool, out: &mut String) -> bool {
    // Returns true when the coefficient was written explicitly.
    let (re, im) = (c.re(), c.im());
    if im != 0.0 {
        out.push_str(if leading { "" } else { " + " });
        let sign = if im < 0.0 { '-' } else { '+' };
        let _ = write!(out, "({re:?}{sign}{:?}i)", im.abs());
        return true;
    }
    match (leading, re < 0.0) {
        (true, true) => out.push('-'),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
    if re.abs() == 1.0 {
        return false;
    }
    let _ = write!(out, "{:?}", re.abs());
    true
}

/// Formats one polynomial with the given variable names.
pub fn format_poly<T: Scalar>(p: &Polynomial<T>, names: &[String]) -> String {
    let mut out = String::new();
    for (i, (m, &c)) in p.terms().rev().enumerate() {
        let wrote = format_coef(c, i == 0, &mut out);
        let mut need_star = wrote;
        for (v, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            if need_star {
                out.push('*');
            }
            out.push_str(&names[v]);
            if e > 1 {
                let _ = write!(out, "^{e}");
            }
            need_star = true;
        }
        if !need_star {
            out.push('1');
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Formats a system in the format read by [`parse_system`].
pub fn format_system<T: Scalar>(s: &PolySystem<T>) -> String {
    let mut out = String::from("vars");
    for n in s.var_names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    for p in s.polys() {
        out.push_str(&format_poly(p, s.var_names()));
        out.push('\n');
    }
    out
}

/// Interval endpoints written as shortest round-trip decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InclusionJson {
    Real([String; 2]),
    Complex { re: [String; 2], im: [String; 2] },
}

/// Conversion of an enclosure to its report form.
pub trait ToInclusionJson {
    fn to_json(&self) -> InclusionJson;
}

fn endpoints(i: &Interval) -> [String; 2] {
    [format!("{:?}", i.inf()), format!("{:?}", i.sup())]
}

impl ToInclusionJson for Interval {
    fn to_json(&self) -> InclusionJson {
        InclusionJson::Real(endpoints(self))
    }
}

impl ToInclusionJson for CInterval {
    fn to_json(&self) -> InclusionJson {
        InclusionJson::Complex {
            re: endpoints(&self.re),
            im: endpoints(&self.im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionJson {
    pub order: usize,
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub final_size: usize,
    pub newton_steps: usize,
    pub inflation_rounds: usize,
    pub residual_norm: f64,
    pub sigma_min_final: f64,
    pub selections: Vec<SelectionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// The JSON certificate report. Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub system: String,
    pub n: usize,
    pub certified: bool,
    pub deflations: usize,
    pub corank_sequence: Vec<usize>,
    pub sigma_min_before: Option<f64>,
    pub sigma_min_after: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_inclusions: Option<Vec<InclusionJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_inclusions: Option<Vec<InclusionJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_inclusions: Option<Vec<InclusionJson>>,
    pub perturbed_system_text: String,
    pub eps: f64,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Report {
    pub fn from_result<T>(name: &str, r: &VissResult<T>) -> Report
    where
        T: Scalar,
        T::Enclosure: ToInclusionJson,
    {
        let certified = r.is_certified();
        let boxes = |b: &[T::Enclosure]| certified.then(|| b.iter().map(ToInclusionJson::to_json).collect());
        let cert = &r.certificate;
        Report {
            system: name.to_string(),
            n: r.layout.n(),
            certified,
            deflations: r.deflation_count,
            corank_sequence: r.corank_sequence.clone(),
            sigma_min_before: finite(r.sigma_min_before),
            sigma_min_after: finite(r.sigma_min_after),
            x_inclusions: boxes(&r.x_box),
            lambda_inclusions: boxes(&r.lambda_box),
            b_inclusions: boxes(&r.b_box),
            perturbed_system_text: format_system(&r.f_tilde),
            eps: r.eps,
            runtime_ms: r.runtime.as_secs_f64() * 1e3,
            diagnostics: Some(Diagnostics {
                final_size: r.system.len(),
                newton_steps: cert.newton_steps,
                inflation_rounds: cert.inflation_rounds,
                residual_norm: cert.residual_norm,
                sigma_min_final: cert.sigma_min_final,
                selections: r
                    .selections
                    .iter()
                    .map(|s| SelectionJson {
                        order: s.order,
                        columns: s.columns_one_based(),
                        rows: s.rows_one_based(),
                    })
                    .collect(),
                reason: cert.reason.clone(),
            }),
        }
    }

    /// Report for a run that stopped before verification.
    pub fn failure(name: &str, n: usize, eps: f64, coranks: Vec<usize>, reason: String, runtime_ms: f64) -> Report {
        Report {
            system: name.to_string(),
            n,
            certified: false,
            deflations: coranks.len().saturating_sub(1),
            corank_sequence: coranks,
            sigma_min_before: None,
            sigma_min_after: None,
            x_inclusions: None,
            lambda_inclusions: None,
            b_inclusions: None,
            perturbed_system_text: String::new(),
            eps,
            runtime_ms,
            diagnostics: Some(Diagnostics {
                final_size: 0,
                newton_steps: 0,
                inflation_rounds: 0,
                residual_norm: f64::NAN,
                sigma_min_final: f64::NAN,
                selections: Vec::new(),
                reason: Some(reason),
            }),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// JSON report for a VISS result.
pub fn emit_report<T>(name: &str, r: &VissResult<T>) -> String
where
    T: Scalar,
    T::Enclosure: ToInclusionJson,
{
    Report::from_result(name, r).to_json_pretty()
}

/// The checked-in JSON schema for [`Report`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    const DZ1: &str = "vars x1 x2 x3 x4\nx1^4 - x2*x3*x4\nx2^4 - x1*x3*x4\nx3^4 - x1*x2*x4\nx4^4 - x1*x2*x3\n";

    #[test]
    fn parses_examples() {
        let s = parse_system::<f64>(DZ1).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.nvars(), 4);
        let u = parse_system::<f64>("vars x\nx^2 - 2").unwrap();
        assert_eq!(u.polys()[0].coefficient(&[0]), -2.0);
        let t = parse_system::<f64>("vars x y\nx^2*y + y^4").unwrap();
        let p = &t.polys()[0];
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.coefficient(&[2, 1]), 1.0);
        assert_eq!(p.coefficient(&[0, 4]), 1.0);
    }

    #[test]
    fn comments_crlf_and_constants() {
        let s = parse_system::<f64>("# header\r\nvars a b # names\r\n\r\n-3*a*b + 2.5e-1 - b # tail\r\n").unwrap();
        let p = &s.polys()[0];
        assert_eq!(p.coefficient(&[1, 1]), -3.0);
        assert_eq!(p.coefficient(&[0, 0]), 0.25);
        assert_eq!(p.coefficient(&[0, 1]), -1.0);
    }

    #[test]
    fn complex_literals() {
        let s = parse_system::<Complex64>("vars z\n(1.5-2i)*z^2 + (3i) - (2)").unwrap();
        let p = &s.polys()[0];
        assert_eq!(p.coefficient(&[2]), Complex64::new(1.5, -2.0));
        assert_eq!(p.coefficient(&[0]), Complex64::new(-2.0, 3.0));
        let err = parse_system::<f64>("vars z\n(1+2i)*z").unwrap_err();
        assert!(matches!(err, ParseError::ComplexInReal { line: 2, column: 1 }));
    }

    #[test]
    fn error_positions() {
        assert!(matches!(
            parse_system::<f64>("vars x\nx + y"),
            Err(ParseError::UndeclaredVariable { line: 2, column: 5, .. })
        ));
        assert!(matches!(
            parse_system::<f64>("vars x\nx^1.5"),
            Err(ParseError::BadExponent { line: 2, column: 3 })
        ));
        assert!(matches!(
            parse_system::<f64>("vars x\nx^-1"),
            Err(ParseError::BadExponent { .. })
        ));
        assert!(matches!(
            parse_system::<f64>("vars x y\nx y"),
            Err(ParseError::Syntax { line: 2, .. })
        ));
        assert!(matches!(parse_system::<f64>("x + 1"), Err(ParseError::MissingHeader)));
        assert!(matches!(
            parse_system::<f64>("vars x x\nx"),
            Err(ParseError::Header { .. })
        ));
    }

    #[test]
    fn start_files() {
        let v = parse_start::<f64>(".0003445\n9.502e-4\n# c\n-3\n+1\n", 4).unwrap();
        assert_eq!(v, vec![0.0003445, 9.502e-4, -3.0, 1.0]);
        let c = parse_start::<Complex64>("(2+0i)\n(0-1.7320508075688772i)\n", 2).unwrap();
        assert_eq!(c[1], Complex64::new(0.0, -1.7320508075688772));
        assert_eq!(
            parse_start::<f64>("1\n2\n", 3),
            Err(ParseError::WrongCount { expected: 3, found: 2 })
        );
    }

    #[test]
    fn formatting() {
        let s = parse_system::<f64>("vars x y\n-x^2*y + 0.1 - y^4 + 3*x").unwrap();
        assert_eq!(format_poly(&s.polys()[0], s.var_names()), "-y^4 - x^2*y + 3.0*x + 0.1");
        let z = parse_system::<f64>("vars x\nx - x").unwrap();
        assert_eq!(format_system(&z), "vars x\n0\n");
        let one = parse_system::<f64>("vars x\n1 - x").unwrap();
        assert_eq!(format_poly(&one.polys()[0], one.var_names()), "-x + 1");
    }

    fn arb_coef() -> impl Strategy<Value = f64> {
        prop_oneof![
            (-20i32..20).prop_map(f64::from),
            -1e6..1e6f64,
            (-300i32..300, -9.9..9.9f64).prop_map(|(e, m)| m * 10f64.powi(e)),
        ]
        .prop_filter("finite", |c| c.is_finite())
    }

    fn arb_system() -> impl Strategy<Value = PolySystem<f64>> {
        (1usize..4, 1usize..4).prop_flat_map(|(nv, np)| {
            prop::collection::vec(
                prop::collection::vec((prop::collection::vec(0u32..5, nv), arb_coef()), 0..6),
                np,
            )
            .prop_map(move |polys| {
                let names = (0..nv).map(|i| format!("v{i}")).collect();
                PolySystem::new(
                    polys
                        .into_iter()
                        .map(|ts| Polynomial::from_terms(nv, ts).unwrap())
                        .collect(),
                    names,
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn round_trip(s in arb_system()) {
            let text = format_system(&s);
            let back = parse_system::<f64>(&text).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn complex_round_trip(re in arb_coef(), im in arb_coef(), e in 0u32..4) {
            let p = Polynomial::from_terms(1, [(vec![e], Complex64::new(re, im))]).unwrap();
            let s = PolySystem::new(vec![p], vec!["z".into()]).unwrap();
            let back = parse_system::<Complex64>(&format_system(&s)).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
