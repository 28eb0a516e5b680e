//! The `.crn` network description format.
//!
//! ```text
//! # Example 1 with k = 2
//! species A d=1
//! species B d=2
//! species C d=3
//! A + 2 B <-> B + C @ 1, 1
//! hint alpha A=1 B=1 C=2
//! ```
//!
//! Species declarations come first, then reactions, then optional `hint`
//! lines. `->` takes one rate, `<->` takes a forward and a backward rate.
//! Numbers are integers, decimals (`0.25`, `1e-3`) or fractions (`3/4`) and
//! are stored exactly. A lone `0` denotes the empty complex. `#` starts a
//! comment.

use std::fmt::Write as _;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::netmodel::{NetError, Reaction, ReactionNetwork};

/// Largest stoichiometric coefficient accepted in a complex.
pub const MAX_STOICH: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: undeclared species `{name}`")]
    UndeclaredSpecies { name: String, line: usize },
    #[error("line {line}: reactant and product complexes are identical")]
    ZeroNetStoichiometry { line: usize },
    #[error("line {line}: rate constants must be positive")]
    NonpositiveRate { line: usize },
    #[error("line {line}, column {column}: expected {expected}")]
    SyntaxError {
        line: usize,
        column: usize,
        expected: String,
    },
    #[error("line {line}: species `{name}` declared twice")]
    DuplicateSpecies { name: String, line: usize },
    #[error("line {line}: diffusion coefficient must be positive")]
    NonpositiveDiffusion { line: usize },
    #[error("line {line}, column {column}: stoichiometric coefficient must be in 1..={MAX_STOICH}")]
    CoefficientOutOfRange { line: usize, column: usize },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::UndeclaredSpecies { line, .. }
            | ParseError::ZeroNetStoichiometry { line }
            | ParseError::NonpositiveRate { line }
            | ParseError::SyntaxError { line, .. }
            | ParseError::DuplicateSpecies { line, .. }
            | ParseError::NonpositiveDiffusion { line }
            | ParseError::CoefficientOutOfRange { line, .. } => *line,
        }
    }
}

/// Optional Lyapunov hints: weights `α` for a linear mass function and
/// anchor concentrations `z` for a shifted entropy. Missing species
/// default to `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LyapunovHints {
    pub alpha: Option<Vec<BigRational>>,
    pub z: Option<Vec<BigRational>>,
}

impl LyapunovHints {
    pub fn is_empty(&self) -> bool {
        self.alpha.is_none() && self.z.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkFile {
    pub network: ReactionNetwork,
    pub hints: LyapunovHints,
}

pub fn parse_network(text: &str) -> Result<ReactionNetwork, ParseError> {
    parse_network_file(text).map(|f| f.network)
}

pub fn parse_network_file(text: &str) -> Result<NetworkFile, ParseError> {
    let mut species: Vec<String> = Vec::new();
    let mut diffusion: Vec<BigRational> = Vec::new();
    let mut pending: Vec<(usize, PendingReaction)> = Vec::new();
    let mut hint_lines: Vec<(usize, Vec<Token>)> = Vec::new();
    let mut section = Section::Species;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = lex(content, line)?;
        let Some(first) = tokens.first() else {
            continue;
        };
        match &first.kind {
            Tok::Ident(kw) if kw == "species" => {
                if section != Section::Species {
                    return Err(syntax(first, line, "a reaction or `hint` line"));
                }
                let (name, d) = parse_species(&tokens, line)?;
                if species.contains(&name) {
                    return Err(ParseError::DuplicateSpecies { name, line });
                }
                if !d.is_positive() {
                    return Err(ParseError::NonpositiveDiffusion { line });
                }
                species.push(name);
                diffusion.push(d);
            }
            Tok::Ident(kw) if kw == "hint" => {
                section = Section::Hints;
                hint_lines.push((line, tokens));
            }
            _ => {
                if section == Section::Hints {
                    return Err(syntax(first, line, "`hint`"));
                }
                section = Section::Reactions;
                pending.push((line, parse_reaction(&tokens, line)?));
            }
        }
    }

    let m = species.len();
    let lookup = |name: &str, line: usize| -> Result<usize, ParseError> {
        species
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| ParseError::UndeclaredSpecies {
                name: name.to_string(),
                line,
            })
    };
    let mut reactions = Vec::with_capacity(pending.len());
    for (line, p) in pending {
        let complex = |side: &[(u32, String, usize)]| -> Result<Vec<u32>, ParseError> {
            let mut c = vec![0u32; m];
            for (coef, name, column) in side {
                let i = lookup(name, line)?;
                c[i] += coef;
                if c[i] > MAX_STOICH {
                    return Err(ParseError::CoefficientOutOfRange { line, column: *column });
                }
            }
            Ok(c)
        };
        let lhs = complex(&p.lhs)?;
        let rhs = complex(&p.rhs)?;
        let reaction = Reaction::new(lhs, rhs, p.forward, p.backward).map_err(|e| match e {
            NetError::ZeroNetStoichiometry => ParseError::ZeroNetStoichiometry { line },
            _ => ParseError::NonpositiveRate { line },
        })?;
        reactions.push(reaction);
    }

    let mut hints = LyapunovHints::default();
    for (line, tokens) in hint_lines {
        let kind = match tokens.get(1) {
            Some(Token { kind: Tok::Ident(k), .. }) if k == "alpha" || k == "z" => k.clone(),
            Some(t) => return Err(syntax(t, line, "`alpha` or `z`")),
            None => return Err(eol(&tokens, line, "`alpha` or `z`")),
        };
        let mut values = vec![BigRational::one(); m];
        let mut i = 2;
        while i < tokens.len() {
            let name = match &tokens[i].kind {
                Tok::Ident(n) => n.clone(),
                _ => return Err(syntax(&tokens[i], line, "species name")),
            };
            expect(&tokens, i + 1, line, Tok::Eq, "`=`")?;
            let v = number_at(&tokens, i + 2, line)?;
            if !v.is_positive() {
                return Err(syntax(&tokens[i + 2], line, "positive number"));
            }
            values[lookup(&name, line)?] = v;
            i += 3;
        }
        if kind == "alpha" {
            hints.alpha = Some(values);
        } else {
            hints.z = Some(values);
        }
    }

    let network = ReactionNetwork::new(species, reactions, diffusion)
        .expect("species, diffusion and reactions validated while parsing");
    Ok(NetworkFile { network, hints })
}

/// Canonical `.crn` text for a network. Parsing the output yields an equal
/// network.
pub fn pretty_print(net: &ReactionNetwork) -> String {
    let mut out = String::new();
    for (name, d) in net.species().iter().zip(net.diffusion()) {
        let _ = writeln!(out, "species {name} d={}", fmt_rational(d));
    }
    for r in net.reactions() {
        let lhs = fmt_complex(net, &r.reactant);
        let rhs = fmt_complex(net, &r.product);
        if r.is_reversible() {
            let _ = writeln!(
                out,
                "{lhs} <-> {rhs} @ {}, {}",
                fmt_rational(&r.rate_forward),
                fmt_rational(&r.rate_backward)
            );
        } else {
            let _ = writeln!(out, "{lhs} -> {rhs} @ {}", fmt_rational(&r.rate_forward));
        }
    }
    out
}

pub fn pretty_print_file(file: &NetworkFile) -> String {
    let mut out = pretty_print(&file.network);
    let species = file.network.species();
    for (kind, values) in [("alpha", &file.hints.alpha), ("z", &file.hints.z)] {
        if let Some(v) = values {
            let parts: Vec<String> = species
                .iter()
                .zip(v)
                .map(|(s, x)| format!("{s}={}", fmt_rational(x)))
                .collect();
            let _ = writeln!(out, "hint {kind} {}", parts.join(" "));
        }
    }
    out
}

fn fmt_complex(net: &ReactionNetwork, c: &[u32]) -> String {
    let terms: Vec<String> = net
        .species()
        .iter()
        .zip(c)
        .filter(|(_, &e)| e > 0)
        .map(|(s, &e)| if e == 1 { s.clone() } else { format!("{e} {s}") })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

pub fn fmt_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses a decimal (`1.25`, `2e-3`), integer or fraction literal exactly.
pub fn parse_number(s: &str) -> Option<BigRational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let valid = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    let sign_stripped = int_part.strip_prefix('-').unwrap_or(int_part);
    if !valid(sign_stripped) || !valid(frac_part) {
        return None;
    }
    let digits = format!("{sign_stripped}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().unwrap_or_default());
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let pow = num::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    if int_part.starts_with('-') {
        value = -value;
    }
    Some(value)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Species,
    Reactions,
    Hints,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(String),
    Number(String),
    Plus,
    Arrow,
    BiArrow,
    At,
    Comma,
    Eq,
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    column: usize,
}

struct PendingReaction {
    lhs: Vec<(u32, String, usize)>,
    rhs: Vec<(u32, String, usize)>,
    forward: BigRational,
    backward: BigRational,
}

fn lex(line_text: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line_text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if two.starts_with("<->") {
            out.push(Token { kind: Tok::BiArrow, column });
            i += 3;
            continue;
        }
        if two.starts_with("->") {
            out.push(Token { kind: Tok::Arrow, column });
            i += 2;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '@' => Some(Tok::At),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token { kind, column });
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        if c.is_ascii_digit() || c == '.' || c == '-' {
            let start = i;
            if c == '-' {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut plain = c != '-';
            if i < chars.len() && chars[i] == '.' {
                plain = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // exponent only when followed by digits, so `2e` + name still lexes
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                    plain = false;
                }
            }
            if i < chars.len() && chars[i] == '/' {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j > i + 1 && plain {
                    i = j;
                    plain = false;
                }
            }
            let text: String = chars[start..i].iter().collect();
            if text == "-" || text == "." || text == "-." {
                return Err(ParseError::SyntaxError {
                    line,
                    column,
                    expected: "number".into(),
                });
            }
            let kind = if plain { Tok::Int(text) } else { Tok::Number(text) };
            out.push(Token { kind, column });
            continue;
        }
        return Err(ParseError::SyntaxError {
            line,
            column,
            expected: "name, number or operator".into(),
        });
    }
    Ok(out)
}

fn describe(t: &Tok) -> &'static str {
    match t {
        Tok::Ident(_) => "name",
        Tok::Int(_) | Tok::Number(_) => "number",
        Tok::Plus => "`+`",
        Tok::Arrow => "`->`",
        Tok::BiArrow => "`<->`",
        Tok::At => "`@`",
        Tok::Comma => "`,`",
        Tok::Eq => "`=`",
    }
}

fn syntax(t: &Token, line: usize, expected: &str) -> ParseError {
    ParseError::SyntaxError {
        line,
        column: t.column,
        expected: format!("{expected}, found {}", describe(&t.kind)),
    }
}

fn eol(tokens: &[Token], line: usize, expected: &str) -> ParseError {
    let column = tokens.last().map(|t| t.column + 1).unwrap_or(1);
    ParseError::SyntaxError {
        line,
        column,
        expected: format!("{expected}, found end of line"),
    }
}

fn expect(tokens: &[Token], i: usize, line: usize, kind: Tok, what: &str) -> Result<(), ParseError> {
    match tokens.get(i) {
        Some(t) if t.kind == kind => Ok(()),
        Some(t) => Err(syntax(t, line, what)),
        None => Err(eol(tokens, line, what)),
    }
}

fn number_at(tokens: &[Token], i: usize, line: usize) -> Result<BigRational, ParseError> {
    match tokens.get(i) {
        Some(Token {
            kind: Tok::Int(s) | Tok::Number(s),
            column,
        }) => parse_number(s).ok_or(ParseError::SyntaxError {
            line,
            column: *column,
            expected: "number".into(),
        }),
        Some(t) => Err(syntax(t, line, "number")),
        None => Err(eol(tokens, line, "number")),
    }
}

fn parse_species(tokens: &[Token], line: usize) -> Result<(String, BigRational), ParseError> {
    let name = match tokens.get(1) {
        Some(Token { kind: Tok::Ident(n), .. }) if n != "species" && n != "hint" => n.clone(),
        Some(t) => return Err(syntax(t, line, "species name")),
        None => return Err(eol(tokens, line, "species name")),
    };
    match tokens.get(2) {
        Some(Token { kind: Tok::Ident(d), .. }) if d == "d" => {}
        Some(t) => return Err(syntax(t, line, "`d=`")),
        None => return Err(eol(tokens, line, "`d=`")),
    }
    expect(tokens, 3, line, Tok::Eq, "`=`")?;
    let d = number_at(tokens, 4, line)?;
    if let Some(t) = tokens.get(5) {
        return Err(syntax(t, line, "end of line"));
    }
    Ok((name, d))
}

fn parse_side(
    tokens: &[Token],
    mut i: usize,
    line: usize,
) -> Result<(Vec<(u32, String, usize)>, usize), ParseError> {
    // lone `0`: empty complex
    if let Some(Token { kind: Tok::Int(s), .. }) = tokens.get(i) {
        let next_is_name = matches!(tokens.get(i + 1), Some(Token { kind: Tok::Ident(_), .. }));
        if s.trim_start_matches('0').is_empty() && !next_is_name {
            return Ok((Vec::new(), i + 1));
        }
    }
    let mut terms = Vec::new();
    loop {
        let mut coef = 1u32;
        let column = tokens.get(i).map(|t| t.column).unwrap_or(1);
        if let Some(Token { kind: Tok::Int(s), column }) = tokens.get(i) {
            coef = match s.parse::<u32>() {
                Ok(c) if (1..=MAX_STOICH).contains(&c) => c,
                _ => {
                    return Err(ParseError::CoefficientOutOfRange {
                        line,
                        column: *column,
                    })
                }
            };
            i += 1;
        }
        match tokens.get(i) {
            Some(Token { kind: Tok::Ident(n), .. }) => terms.push((coef, n.clone(), column)),
            Some(t) => return Err(syntax(t, line, "species name")),
            None => return Err(eol(tokens, line, "species name")),
        }
        i += 1;
        match tokens.get(i) {
            Some(Token { kind: Tok::Plus, .. }) => i += 1,
            _ => return Ok((terms, i)),
        }
    }
}

fn parse_reaction(tokens: &[Token], line: usize) -> Result<PendingReaction, ParseError> {
    let (lhs, mut i) = parse_side(tokens, 0, line)?;
    let reversible = match tokens.get(i) {
        Some(Token { kind: Tok::Arrow, .. }) => false,
        Some(Token { kind: Tok::BiArrow, .. }) => true,
        Some(t) => return Err(syntax(t, line, "`+`, `->` or `<->`")),
        None => return Err(eol(tokens, line, "`->` or `<->`")),
    };
    let (rhs, j) = parse_side(tokens, i + 1, line)?;
    i = j;
    expect(tokens, i, line, Tok::At, "`@`")?;
    let forward = number_at(tokens, i + 1, line)?;
    i += 2;
    let backward = if reversible {
        expect(tokens, i, line, Tok::Comma, "`,` and a backward rate")?;
        let b = number_at(tokens, i + 1, line)?;
        i += 2;
        if !b.is_positive() {
            return Err(ParseError::NonpositiveRate { line });
        }
        b
    } else {
        BigRational::zero()
    };
    if let Some(t) = tokens.get(i) {
        return Err(syntax(t, line, "end of line"));
    }
    if !forward.is_positive() {
        return Err(ParseError::NonpositiveRate { line });
    }
    Ok(PendingReaction {
        lhs,
        rhs,
        forward,
        backward,
    })
}
