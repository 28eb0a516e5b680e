//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use super::NetError;

/// Exponent vector of a monomial `u_1^e_1 ... u_m^e_m`.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// vectors lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    /// The constant monomial `1` in `nvars` variables.
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    /// The monomial `u_var`.
    pub fn var(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Evaluates `u^e` by repeated multiplication, variables in index order.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let mut acc = 1.0;
        for (&x, &e) in u.iter().zip(&self.0) {
            if e > 0 {
                acc *= x.powi(e as i32);
            }
        }
        acc
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in a fixed number of variables. Zero coefficients are never
/// stored, and iteration follows the graded-lex monomial order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging
    /// duplicates.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (BigRational, Vec<u32>)>,
    {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length mismatch");
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * mono` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, mono: Monomial, c: BigRational) {
        debug_assert_eq!(mono.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    pub fn coeff(&self, mono: &Monomial) -> BigRational {
        self.terms.get(mono).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    /// Maximum total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Polynomial, c: &BigRational) {
        assert_eq!(self.nvars, other.nvars);
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v * c);
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_scaled(other, &BigRational::one());
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_scaled(other, &-BigRational::one());
        out
    }

    /// Partial derivative with respect to `var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] -= 1;
            out.add_term(Monomial(exps), c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Floating-point evaluation. Terms are summed in graded-lex order.
    pub fn eval(&self, u: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| rational_to_f64(c) * m.eval(u))
            .sum()
    }

    /// Largest degree among monomials with a positive coefficient.
    pub fn max_positive_degree(&self) -> Option<u32> {
        self.terms
            .iter()
            .filter(|(_, c)| c.is_positive())
            .map(|(m, _)| m.degree())
            .max()
    }
}

/// A vector field `f = (f_1, ..., f_m)` of polynomials sharing `m` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVec {
    nvars: usize,
    components: Vec<Polynomial>,
}

impl PolyVec {
    pub fn zero(m: usize) -> Self {
        PolyVec {
            nvars: m,
            components: (0..m).map(|_| Polynomial::zero(m)).collect(),
        }
    }

    pub fn new(components: Vec<Polynomial>) -> Result<Self, NetError> {
        let nvars = components.len();
        if let Some(bad) = components.iter().position(|p| p.nvars() != nvars) {
            return Err(NetError::DimensionMismatch {
                expected: nvars,
                found: components[bad].nvars(),
            });
        }
        Ok(PolyVec { nvars, components })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn scale(&self, c: &BigRational) -> PolyVec {
        PolyVec {
            nvars: self.nvars,
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// `Σ_i w_i f_i` for the given weights.
    pub fn weighted_sum(&self, weights: &[BigRational]) -> Polynomial {
        assert_eq!(weights.len(), self.components.len());
        let mut out = Polynomial::zero(self.nvars);
        for (p, w) in self.components.iter().zip(weights) {
            out.add_scaled(p, w);
        }
        out
    }

    /// All distinct monomials appearing in any component, in graded-lex order.
    pub fn support(&self) -> Vec<Monomial> {
        let mut all: Vec<Monomial> = self
            .components
            .iter()
            .flat_map(|p| p.monomials().cloned())
            .collect();
        all.sort();
        all.dedup();
        all
    }

    /// Pointwise evaluation `f(u)`.
    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>, NetError> {
        if u.len() != self.nvars {
            return Err(NetError::DimensionMismatch {
                expected: self.nvars,
                found: u.len(),
            });
        }
        Ok(self.components.iter().map(|p| p.eval(u)).collect())
    }

    /// Symbolic Jacobian; entry `[i][j]` is `∂f_i/∂u_j`.
    pub fn jacobian(&self) -> Vec<Vec<Polynomial>> {
        self.components
            .iter()
            .map(|p| (0..self.nvars).map(|j| p.derivative(j)).collect())
            .collect()
    }

    /// The one-sided growth exponent: the largest degree of a monomial with
    /// positive coefficient in any component, `0` if there is none.
    pub fn growth_degree(&self) -> u32 {
        self.components
            .iter()
            .filter_map(Polynomial::max_positive_degree)
            .max()
            .unwrap_or(0)
    }

    /// Deterministic text form: a header, then for each component a `f i`
    /// line followed by one `coeff num/den : e1 ... em` line per monomial.
    pub fn to_text(&self) -> String {
        let mut out = format!("rdnet-polyvec/1 m={}\n", self.nvars);
        for (i, p) in self.components.iter().enumerate() {
            out.push_str(&format!("f {i}\n"));
            for (mono, c) in p.terms() {
                let exps: Vec<String> = mono.exponents().iter().map(u32::to_string).collect();
                out.push_str(&format!(
                    "coeff {}/{} : {}\n",
                    c.numer(),
                    c.denom(),
                    exps.join(" ")
                ));
            }
        }
        out
    }

    /// Inverse of [`PolyVec::to_text`].
    pub fn from_text(text: &str) -> Result<PolyVec, NetError> {
        let bad = |line: usize, msg: &str| NetError::Format {
            line,
            message: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty input"))?;
        let m: usize = header
            .strip_prefix("rdnet-polyvec/1 m=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(1, "expected `rdnet-polyvec/1 m=<m>` header"))?;
        let mut comps: Vec<Polynomial> = Vec::with_capacity(m);
        for (idx, raw) in lines {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("f ") {
                let i: usize = rest.trim().parse().map_err(|_| bad(lineno, "bad component index"))?;
                if i != comps.len() {
                    return Err(bad(lineno, "components out of order"));
                }
                comps.push(Polynomial::zero(m));
                continue;
            }
            let rest = line
                .strip_prefix("coeff ")
                .ok_or_else(|| bad(lineno, "expected `coeff` or `f` line"))?;
            let (c, e) = rest
                .split_once(':')
                .ok_or_else(|| bad(lineno, "missing `:`"))?;
            let (num, den) = c
                .trim()
                .split_once('/')
                .ok_or_else(|| bad(lineno, "coefficient must be num/den"))?;
            let num: BigInt = num.parse().map_err(|_| bad(lineno, "bad numerator"))?;
            let den: BigInt = den.parse().map_err(|_| bad(lineno, "bad denominator"))?;
            if den.is_zero() {
                return Err(bad(lineno, "zero denominator"));
            }
            let exps: Vec<u32> = e
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| bad(lineno, "bad exponent"))?;
            if exps.len() != m {
                return Err(bad(lineno, "exponent count does not match m"));
            }
            let p = comps
                .last_mut()
                .ok_or_else(|| bad(lineno, "monomial before first component"))?;
            p.add_term(Monomial(exps), BigRational::new(num, den));
        }
        if comps.len() != m {
            return Err(bad(text.lines().count(), "wrong number of components"));
        }
        PolyVec::new(comps)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let (sign, abs) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if k == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let vars: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("u{}", i + 1)
                    } else {
                        format!("u{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{abs}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

pub fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(terms: &[(i64, &[u32])], n: usize) -> Polynomial {
        Polynomial::from_terms(n, terms.iter().map(|(c, e)| (int(*c), e.to_vec())))
    }

    #[test]
    fn graded_lex_puts_degree_first() {
        let a = Monomial::new(vec![2, 0]);
        let b = Monomial::new(vec![0, 3]);
        let c = Monomial::new(vec![1, 1]);
        assert!(a < b);
        assert!(c < a);
    }

    #[test]
    fn cancellation_drops_terms() {
        let mut p = p1(&[(1, &[1, 0])], 2);
        p.add_term(Monomial::new(vec![1, 0]), int(-1));
        assert!(p.is_zero());
    }

    #[test]
    fn derivative_power_rule() {
        let p = p1(&[(1, &[2])], 1);
        assert_eq!(p.derivative(0), p1(&[(2, &[1])], 1));
    }

    #[test]
    fn text_round_trip() {
        let f = PolyVec::new(vec![
            p1(&[(-1, &[1, 2]), (1, &[0, 0])], 2),
            Polynomial::from_terms(2, [(ratio(3, 4), vec![0, 1])]),
        ])
        .unwrap();
        let text = f.to_text();
        assert_eq!(
            text,
            "rdnet-polyvec/1 m=2\nf 0\ncoeff 1/1 : 0 0\ncoeff -1/1 : 1 2\nf 1\ncoeff 3/4 : 0 1\n"
        );
        assert_eq!(PolyVec::from_text(&text).unwrap(), f);
    }

    #[test]
    fn from_text_rejects_garbage() {
        assert!(PolyVec::from_text("rdnet-polyvec/1 m=1\ncoeff 1/0 : 1\n").is_err());
        assert!(PolyVec::from_text("nope").is_err());
    }

    #[test]
    fn display_is_readable() {
        let p = p1(&[(-1, &[1, 2]), (2, &[0, 0])], 2);
        assert_eq!(p.to_string(), "-u1*u2^2 + 2");
    }
}
