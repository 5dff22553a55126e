//! Compact notation for party-symmetric inequalities.
//!
//! `(ijk)` stands for the sum of `<A_a B_b C_c>` over the distinct
//! rearrangements `abc` of `ijk`, so `(112)` has three terms and `(123)` six.
//! A bare integer is the constant term. `8 +(110) -2(331)` therefore reads
//! `8 + [(110)] - 2 [(331)] >= 0`.

use std::iter::Peekable;
use std::str::CharIndices;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{distinct_permutations, BellError, BellInequality, Scenario};
use crate::linalg::IntVector;

/// Class representatives: non-increasing multi-indices other than `0..0`,
/// in lexicographic order.
fn representatives(s: &Scenario) -> impl Iterator<Item = Vec<usize>> + '_ {
    s.multi_indices().skip(1).filter(|m| m.windows(2).all(|w| w[0] >= w[1]))
}

/// Number of symmetric correlations with a nonzero coefficient, not counting
/// the constant term.
pub fn symmetric_term_count(b: &BellInequality) -> usize {
    let s = b.scenario();
    representatives(&s).filter(|rep| distinct_permutations(rep).iter().any(|m| !b.coeff(m).is_zero())).count()
}

pub fn format_symmetric(b: &BellInequality) -> Result<String, BellError> {
    let s = b.scenario();
    if s.settings() > 9 {
        return Err(BellError::Notation(format!("settings {} do not fit in single digits", s.settings())));
    }
    if !b.is_party_symmetric() {
        return Err(BellError::NotSymmetric);
    }
    let mut tokens = Vec::new();
    if !b.bound().is_zero() {
        tokens.push(b.bound().to_string());
    }
    for rep in representatives(&s) {
        let c = b.coeff(&rep);
        if c.is_zero() {
            continue;
        }
        let sign = if c.is_negative() { '-' } else { '+' };
        let magnitude = c.abs();
        let digits: String = rep.iter().map(|i| char::from_digit(*i as u32, 10).expect("single digit")).collect();
        if magnitude.is_one() {
            tokens.push(format!("{sign}({digits})"));
        } else {
            tokens.push(format!("{sign}{magnitude}({digits})"));
        }
    }
    Ok(tokens.join(" "))
}

struct Parser<'a> {
    chars: Peekable<CharIndices<'a>>,
    len: usize,
}

impl Parser<'_> {
    fn pos(&mut self) -> usize {
        self.chars.peek().map_or(self.len, |&(i, _)| i)
    }

    fn skip_ws(&mut self) {
        while self.chars.next_if(|(_, c)| c.is_whitespace()).is_some() {}
    }

    fn error(&mut self, message: impl Into<String>) -> BellError {
        BellError::Parse { position: self.pos(), message: message.into() }
    }

    fn sign(&mut self) -> Option<i32> {
        match self.chars.peek().map(|&(_, c)| c) {
            Some('+') => {
                self.chars.next();
                Some(1)
            }
            Some('-' | '\u{2212}') => {
                self.chars.next();
                Some(-1)
            }
            _ => None,
        }
    }

    fn integer(&mut self) -> Option<BigInt> {
        let mut digits = String::new();
        while let Some((_, c)) = self.chars.next_if(|(_, c)| c.is_ascii_digit()) {
            digits.push(c);
        }
        (!digits.is_empty()).then(|| digits.parse().expect("ascii digits"))
    }

    /// `<=`, `>=`, `≤` or `≥`; `Some(true)` for lower bounds.
    fn relation(&mut self) -> Result<Option<bool>, BellError> {
        let Some(&(_, c)) = self.chars.peek() else { return Ok(None) };
        let lower = match c {
            '\u{2265}' => true,
            '\u{2264}' => false,
            '>' | '<' => {
                self.chars.next();
                if self.chars.next_if(|&(_, c)| c == '=').is_none() {
                    return Err(self.error("expected '='"));
                }
                return Ok(Some(c == '>'));
            }
            _ => return Ok(None),
        };
        self.chars.next();
        Ok(Some(lower))
    }
}

/// Parses the notation of [`format_symmetric`]. A trailing `>= c` or `<= c`
/// is folded into the constant term, so `(11) <= 2` gives `2 - (11) >= 0`.
pub fn parse_symmetric(text: &str, s: &Scenario) -> Result<BellInequality, BellError> {
    let mut coeffs = vec![BigInt::zero(); s.dim()];
    let mut p = Parser { chars: text.char_indices().peekable(), len: text.len() };
    let mut first = true;
    let mut relation = None;
    loop {
        p.skip_ws();
        if p.chars.peek().is_none() {
            break;
        }
        if let Some(lower) = p.relation()? {
            relation = Some(lower);
            break;
        }
        let sign = match p.sign() {
            Some(sign) => sign,
            None if first => 1,
            None => return Err(p.error("expected '+' or '-'")),
        };
        first = false;
        p.skip_ws();
        let magnitude = p.integer();
        p.skip_ws();
        let class = if p.chars.next_if(|&(_, c)| c == '(').is_some() {
            let mut multi = Vec::new();
            loop {
                let pos = p.pos();
                match p.chars.next() {
                    Some((_, ')')) => break,
                    Some((_, c)) if c.is_ascii_digit() => {
                        let i = c.to_digit(10).expect("digit") as usize;
                        if i > s.settings() {
                            return Err(BellError::Parse {
                                position: pos,
                                message: format!("setting {i} out of range"),
                            });
                        }
                        multi.push(i);
                    }
                    Some(_) => return Err(BellError::Parse { position: pos, message: "expected digit or ')'".into() }),
                    None => return Err(BellError::Parse { position: pos, message: "unclosed '('".into() }),
                }
            }
            if multi.len() != s.parties() {
                return Err(p.error(format!("expected {} indices, found {}", s.parties(), multi.len())));
            }
            Some(multi)
        } else {
            None
        };
        let value = match (&magnitude, &class) {
            (None, None) => return Err(p.error("expected a term")),
            (Some(m), _) => m * sign,
            (None, Some(_)) => BigInt::from(sign),
        };
        match class {
            Some(multi) => {
                for m in distinct_permutations(&multi) {
                    coeffs[s.index(&m)] += &value;
                }
            }
            None => coeffs[0] += value,
        }
    }
    if let Some(lower) = relation {
        p.skip_ws();
        let sign = p.sign().unwrap_or(1);
        p.skip_ws();
        let rhs = p.integer().ok_or_else(|| p.error("expected a bound"))? * sign;
        p.skip_ws();
        if p.chars.peek().is_some() {
            return Err(p.error("trailing input"));
        }
        if lower {
            coeffs[0] -= rhs;
        } else {
            for c in coeffs.iter_mut() {
                *c = -&*c;
            }
            coeffs[0] += rhs;
        }
    }
    BellInequality::new(*s, IntVector::new(coeffs))
}
