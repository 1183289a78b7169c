//! Plain-text polynomial generators.
//!
//! ```text
//! poly   := [sign] term (sign term)*
//! term   := coef [ '*' mono ] [comp] | mono [comp]
//! mono   := var ('*' var)*
//! var    := 'z' INT [ '^' INT ]          variables are 1-based: z1 .. zm
//! comp   := '(' 'c' INT ')'              component, 0-based, default c0
//! coef   := decimal number, e.g. 2, 0.5, 1e-3
//! ```
//!
//! Whitespace is ignored. Repeated variables multiply (`z1*z1 = z1^2`) and
//! repeated terms are summed.

use thiserror::Error;

use crate::graded_basis::MultiIndex;
use crate::scalar::{Real, Scalar};
use crate::submodule_builder::{PolynomialGenerator, Term};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} at character {position}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    at: usize,
    text: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            chars: text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(),
            at: 0,
            text,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|c| c.1)
    }

    fn position(&self) -> usize {
        self.chars
            .get(self.at)
            .map(|c| self.text[..c.0].chars().count())
            .unwrap_or_else(|| self.text.chars().count())
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.position(),
            message: message.into(),
        }
    }

    fn integer(&mut self, what: &str) -> Result<usize, ParseError> {
        let start = self.at;
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.at += 1;
        }
        if s.is_empty() {
            self.at = start;
            return Err(self.error(format!("expected {what}")));
        }
        s.parse().map_err(|_| self.error(format!("{what} too large")))
    }

    fn number(&mut self) -> Option<f64> {
        let start = self.at;
        let mut s = String::new();
        while let Some(c) = self.peek() {
            let exponent_sign = matches!(c, '+' | '-') && matches!(s.chars().last(), Some('e' | 'E'));
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exponent_sign {
                s.push(c);
                self.at += 1;
            } else {
                break;
            }
        }
        match s.parse::<f64>() {
            Ok(v) if !s.is_empty() => Some(v),
            _ => {
                self.at = start;
                None
            }
        }
    }
}

/// Parse one generator over `num_vars` variables and `multiplicity`
/// components.
pub fn parse_generator<S: Scalar>(
    text: &str,
    num_vars: usize,
    multiplicity: usize,
) -> Result<PolynomialGenerator<S>, ParseError> {
    let mut cur = Cursor::new(text);
    let mut terms: Vec<(Vec<u32>, usize, f64)> = Vec::new();
    let mut first = true;
    loop {
        let sign = if cur.eat('-') {
            -1.0
        } else if cur.eat('+') || first {
            1.0
        } else {
            return Err(cur.error("expected `+` or `-`"));
        };
        first = false;
        if cur.peek().is_none() {
            return Err(cur.error("expected a term"));
        }

        let mut exps = vec![0u32; num_vars];
        let mut coef = 1.0;
        let mut has_mono = true;
        if let Some(c) = cur.number() {
            coef = c;
            has_mono = cur.eat('*');
        }
        if has_mono {
            loop {
                if !cur.eat('z') {
                    return Err(cur.error("expected a variable `z<i>`"));
                }
                let var_pos = cur.position();
                let var = cur.integer("variable index")?;
                if var == 0 || var > num_vars {
                    return Err(ParseError {
                        position: var_pos,
                        message: format!("variable z{var} outside z1..z{num_vars}"),
                    });
                }
                let power = if cur.eat('^') { cur.integer("exponent")? } else { 1 };
                exps[var - 1] += power as u32;
                if !cur.eat('*') {
                    break;
                }
            }
        }
        let mut component = 0;
        if cur.eat('(') {
            if !cur.eat('c') {
                return Err(cur.error("expected `c<idx>` inside parentheses"));
            }
            let comp_pos = cur.position();
            component = cur.integer("component index")?;
            if component >= multiplicity {
                return Err(ParseError {
                    position: comp_pos,
                    message: format!("component c{component} outside c0..c{}", multiplicity - 1),
                });
            }
            if !cur.eat(')') {
                return Err(cur.error("expected `)`"));
            }
        }
        match terms.iter_mut().find(|t| t.0 == exps && t.1 == component) {
            Some(t) => t.2 += sign * coef,
            None => terms.push((exps, component, sign * coef)),
        }
        if cur.peek().is_none() {
            break;
        }
        if !matches!(cur.peek(), Some('+' | '-')) {
            let c = cur.peek().unwrap_or(' ');
            return Err(cur.error(format!("unexpected `{c}`")));
        }
    }
    let terms = terms
        .into_iter()
        .map(|(e, c, v)| Term {
            index: MultiIndex::new(e),
            component: c,
            coefficient: S::of_f64(v),
        })
        .collect();
    PolynomialGenerator::new(terms).map_err(|e| ParseError {
        position: 0,
        message: e.to_string(),
    })
}

/// Render a real generator back into the grammar above.
pub fn format_generator<S: Scalar>(g: &PolynomialGenerator<S>) -> String {
    let mut out = String::new();
    for (i, t) in g.terms().iter().enumerate() {
        let c = t.coefficient.real().to_f64_lossy();
        if i > 0 {
            out.push_str(if c < 0.0 { " - " } else { " + " });
        } else if c < 0.0 {
            out.push('-');
        }
        let mag = c.abs();
        let vars: Vec<String> = t
            .index
            .exponents()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(v, &e)| if e == 1 { format!("z{}", v + 1) } else { format!("z{}^{e}", v + 1) })
            .collect();
        if vars.is_empty() {
            out.push_str(&format!("{mag:?}"));
        } else {
            if mag != 1.0 {
                out.push_str(&format!("{mag:?}*"));
            }
            out.push_str(&vars.join("*"));
        }
        if t.component != 0 {
            out.push_str(&format!("(c{})", t.component));
        }
    }
    out
}
