//! Sparse Laurent polynomials with big-integer coefficients.
//!
//! A polynomial lives over a fixed [`VarTable`]; the exponent vector of every
//! term has one entry per variable. Terms are kept in a `BTreeMap`, so the
//! canonical text form (terms sorted lexicographically by exponent vector)
//! falls out of iteration order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("operands use different variable tables")]
    VarMismatch,
    #[error("duplicate variable name `{0}`")]
    DuplicateVar(String),
    #[error("not divisible")]
    NotDivisible,
    #[error("division by zero polynomial")]
    ZeroDivisor,
    #[error("negative power of non-monomial value for variable {0}")]
    NonMonomialInverse(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Ordered variable names. Mutable cluster variables come first, then frozen.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarTable {
    names: Vec<String>,
}

impl VarTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Arc<Self>, LaurentError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(LaurentError::DuplicateVar(n.clone()));
            }
        }
        Ok(Arc::new(VarTable { names }))
    }

    /// `x1..xn` followed by `u1..um`.
    pub fn cluster(n: usize, m: usize) -> Arc<Self> {
        let names = (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=m).map(|i| format!("u{i}")));
        VarTable::new(names).expect("generated names are distinct")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

const DENSE_LIMIT: u64 = 1 << 22;

/// Initial map size for a product: never more than the number of distinct
/// keys possible, and capped so large operands grow the map lazily.
fn product_capacity(n1: usize, n2: usize, keys: u64) -> usize {
    let pairs = (n1 as u64).saturating_mul(n2 as u64);
    pairs.min(keys).min(1 << 20) as usize
}

fn same_table(a: &Arc<VarTable>, b: &Arc<VarTable>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    vars: Arc<VarTable>,
    terms: BTreeMap<Vec<i32>, BigInt>,
}

impl LaurentPoly {
    pub fn zero(vars: &Arc<VarTable>) -> Self {
        LaurentPoly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn one(vars: &Arc<VarTable>) -> Self {
        Self::monomial(vars, vec![0; vars.len()], BigInt::one())
    }

    pub fn constant(vars: &Arc<VarTable>, c: impl Into<BigInt>) -> Self {
        Self::monomial(vars, vec![0; vars.len()], c.into())
    }

    pub fn var(vars: &Arc<VarTable>, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, e, BigInt::one())
    }

    pub fn monomial(vars: &Arc<VarTable>, exps: Vec<i32>, coeff: impl Into<BigInt>) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent vector length");
        let coeff = coeff.into();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps, coeff);
        }
        LaurentPoly { vars: vars.clone(), terms }
    }

    /// Builds a polynomial from possibly repeated, possibly zero terms.
    pub fn from_terms(
        vars: &Arc<VarTable>,
        terms: impl IntoIterator<Item = (Vec<i32>, BigInt)>,
    ) -> Self {
        let mut acc: HashMap<Vec<i32>, BigInt> = HashMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent vector length");
            *acc.entry(e).or_insert_with(BigInt::zero) += c;
        }
        Self::from_accumulator(vars, acc)
    }

    fn from_accumulator(vars: &Arc<VarTable>, acc: HashMap<Vec<i32>, BigInt>) -> Self {
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        LaurentPoly { vars: vars.clone(), terms }
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
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

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[i32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn min_coeff(&self) -> Option<BigInt> {
        self.terms.values().min().cloned()
    }

    /// Componentwise minimum exponent; `None` for the zero polynomial.
    pub fn min_exponents(&self) -> Option<Vec<i32>> {
        let mut it = self.terms.keys();
        let mut m = it.next()?.clone();
        for e in it {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).min(*b);
            }
        }
        Some(m)
    }

    pub fn max_exponents(&self) -> Option<Vec<i32>> {
        let mut it = self.terms.keys();
        let mut m = it.next()?.clone();
        for e in it {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).max(*b);
            }
        }
        Some(m)
    }

    pub fn is_nonneg(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LaurentError> {
        if !same_table(&self.vars, &other.vars) {
            return Err(LaurentError::VarMismatch);
        }
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            match terms.get_mut(e) {
                Some(v) => {
                    *v += c;
                    if v.is_zero() {
                        terms.remove(e);
                    }
                }
                None => {
                    terms.insert(e.clone(), c.clone());
                }
            }
        }
        Ok(LaurentPoly { vars: self.vars.clone(), terms })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, LaurentError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, LaurentError> {
        if !same_table(&self.vars, &other.vars) {
            return Err(LaurentError::VarMismatch);
        }
        if let Some(p) = self.mul_packed(other) {
            return Ok(p);
        }
        let mut acc: HashMap<Vec<i32>, BigInt> =
            HashMap::with_capacity(product_capacity(self.terms.len(), other.terms.len(), u64::MAX));
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        Ok(Self::from_accumulator(&self.vars, acc))
    }

    /// Product with exponent vectors packed into mixed-radix `u64` keys, so
    /// adding keys adds exponents. `None` when the box is too large.
    fn mul_packed(&self, other: &Self) -> Option<Self> {
        let (lo1, hi1) = (self.min_exponents()?, self.max_exponents()?);
        let (lo2, hi2) = (other.min_exponents()?, other.max_exponents()?);
        let nv = self.vars.len();
        let mut radix = Vec::with_capacity(nv);
        let mut stride = Vec::with_capacity(nv);
        let mut acc: u64 = 1;
        for i in 0..nv {
            let span = (hi1[i] as i64 - lo1[i] as i64) + (hi2[i] as i64 - lo2[i] as i64) + 1;
            stride.push(acc);
            radix.push(span as u64);
            acc = acc.checked_mul(span as u64).filter(|&v| v < (1u64 << 62))?;
        }
        let pack = |e: &[i32], lo: &[i32]| -> u64 {
            e.iter().zip(lo).zip(&stride).map(|((&x, &l), &s)| (x - l) as u64 * s).sum()
        };
        let unpack = |k: u64| -> Vec<i32> {
            (0..nv).map(|i| ((k / stride[i]) % radix[i]) as i32 + lo1[i] + lo2[i]).collect()
        };
        if let Some(terms) = self.mul_small(other, acc, &|e| pack(e, &lo1), &|e| pack(e, &lo2)) {
            let terms = terms.into_iter().map(|(k, c)| (unpack(k), BigInt::from(c))).collect();
            return Some(LaurentPoly { vars: self.vars.clone(), terms });
        }
        let k2: Vec<(u64, &BigInt)> = other.terms.iter().map(|(e, c)| (pack(e, &lo2), c)).collect();
        let mut sums: HashMap<u64, BigInt> = HashMap::with_capacity(product_capacity(self.terms.len(), k2.len(), acc));
        for (e1, c1) in &self.terms {
            let a = pack(e1, &lo1);
            for (b, c2) in &k2 {
                *sums.entry(a + b).or_insert_with(BigInt::zero) += c1 * *c2;
            }
        }
        let terms = sums.into_iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (unpack(k), c)).collect();
        Some(LaurentPoly { vars: self.vars.clone(), terms })
    }

    /// Machine-integer product for packed keys below `size`, when every
    /// coefficient fits in `i64` and no sum can leave `i128`. Nonzero
    /// entries only.
    fn mul_small(
        &self,
        other: &Self,
        size: u64,
        pack1: &dyn Fn(&[i32]) -> u64,
        pack2: &dyn Fn(&[i32]) -> u64,
    ) -> Option<Vec<(u64, i128)>> {
        let small = |p: &Self, pack: &dyn Fn(&[i32]) -> u64| -> Option<(Vec<(u64, i64)>, u64)> {
            let mut out = Vec::with_capacity(p.terms.len());
            let mut max = 0u64;
            for (e, c) in &p.terms {
                let v = c.to_i64()?;
                max = max.max(v.unsigned_abs());
                out.push((pack(e), v));
            }
            Some((out, max))
        };
        let (t1, m1) = small(self, pack1)?;
        let (t2, m2) = small(other, pack2)?;
        let bits = |x: u64| 64 - x.leading_zeros();
        if bits(m1) + bits(m2) + bits(t1.len().min(t2.len()) as u64) > 126 {
            return None;
        }
        if size <= DENSE_LIMIT.min(4 * (t1.len() * t2.len()) as u64) {
            let mut dense = vec![0i128; size as usize];
            for &(a, c1) in &t1 {
                for &(b, c2) in &t2 {
                    dense[(a + b) as usize] += c1 as i128 * c2 as i128;
                }
            }
            return Some(dense.into_iter().enumerate().filter(|(_, c)| *c != 0).map(|(k, c)| (k as u64, c)).collect());
        }
        let mut sums: HashMap<u64, i128> = HashMap::with_capacity(product_capacity(t1.len(), t2.len(), size));
        for &(a, c1) in &t1 {
            for &(b, c2) in &t2 {
                *sums.entry(a + b).or_insert(0) += c1 as i128 * c2 as i128;
            }
        }
        Some(sums.into_iter().filter(|(_, c)| *c != 0).collect())
    }

    /// Multiplies by `coeff * x^exps`.
    pub fn mul_monomial(&self, exps: &[i32], coeff: &BigInt) -> Self {
        if coeff.is_zero() {
            return Self::zero(&self.vars);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.iter().zip(exps).map(|(a, b)| a + b).collect(), c * coeff))
            .collect();
        LaurentPoly { vars: self.vars.clone(), terms }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        self.mul_monomial(&vec![0; self.vars.len()], k)
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.vars);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Inverse of a monomial.
    pub fn monomial_inverse(&self) -> Option<Self> {
        if !self.is_monomial() {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        if !c.is_one() && !(-c).is_one() {
            return None;
        }
        let e: Vec<i32> = e.iter().map(|x| -x).collect();
        Some(Self::monomial(&self.vars, e, c.clone()))
    }

    /// Exact quotient `self / den`.
    ///
    /// Both operands are shifted into the polynomial ring, divided by
    /// graded-lex leading terms, and the quotient is shifted back.
    pub fn div_exact(&self, den: &Self) -> Result<Self, LaurentError> {
        if !same_table(&self.vars, &den.vars) {
            return Err(LaurentError::VarMismatch);
        }
        if den.is_zero() {
            return Err(LaurentError::ZeroDivisor);
        }
        if self.is_zero() {
            return Ok(Self::zero(&self.vars));
        }
        let nmin = self.min_exponents().expect("nonzero");
        let dmin = den.min_exponents().expect("nonzero");
        let shift = |p: &Self, m: &[i32]| -> BTreeMap<Grlex, BigInt> {
            p.terms
                .iter()
                .map(|(e, c)| (Grlex(e.iter().zip(m).map(|(a, b)| a - b).collect()), c.clone()))
                .collect()
        };
        let d = shift(den, &dmin);
        let mut rem = shift(self, &nmin);
        let (lead, lc) = d.iter().next_back().map(|(k, v)| (k.0.clone(), v.clone())).expect("nonzero");
        let mut quot: Vec<(Vec<i32>, BigInt)> = Vec::new();
        while let Some((lt, c)) = rem.iter().next_back().map(|(k, v)| (k.0.clone(), v.clone())) {
            if lt.iter().zip(&lead).any(|(a, b)| a < b) {
                return Err(LaurentError::NotDivisible);
            }
            let (qc, r) = c.div_rem(&lc);
            if !r.is_zero() {
                return Err(LaurentError::NotDivisible);
            }
            let qe: Vec<i32> = lt.iter().zip(&lead).map(|(a, b)| a - b).collect();
            for (de, dc) in &d {
                let key = Grlex(qe.iter().zip(&de.0).map(|(a, b)| a + b).collect());
                let delta = &qc * dc;
                match rem.get_mut(&key) {
                    Some(v) => {
                        *v -= delta;
                        if v.is_zero() {
                            rem.remove(&key);
                        }
                    }
                    None => {
                        rem.insert(key, -delta);
                    }
                }
            }
            quot.push((qe, qc));
        }
        let back: Vec<i32> = nmin.iter().zip(&dmin).map(|(a, b)| a - b).collect();
        let terms = quot
            .into_iter()
            .map(|(e, c)| (e.iter().zip(&back).map(|(a, b)| a + b).collect(), c))
            .collect();
        Ok(LaurentPoly { vars: self.vars.clone(), terms })
    }

    /// True iff `num / den` is a Laurent polynomial.
    pub fn is_laurent_in(num: &Self, den: &Self) -> Result<bool, LaurentError> {
        match num.div_exact(den) {
            Ok(_) => Ok(true),
            Err(LaurentError::NotDivisible) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Substitutes `assignment[i]` for variable `i`; other variables stay.
    ///
    /// Values must share this polynomial's table. Negative powers are only
    /// accepted for monomial values.
    pub fn substitute(&self, assignment: &BTreeMap<usize, LaurentPoly>) -> Result<Self, LaurentError> {
        for v in assignment.values() {
            if !same_table(&self.vars, &v.vars) {
                return Err(LaurentError::VarMismatch);
            }
        }
        let mut powers: HashMap<(usize, i32), LaurentPoly> = HashMap::new();
        let mut acc: HashMap<Vec<i32>, BigInt> = HashMap::new();
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let mut term = Self::one(&self.vars);
            for (&i, val) in assignment {
                let k = e[i];
                rest[i] = 0;
                if k == 0 {
                    continue;
                }
                if !powers.contains_key(&(i, k)) {
                    let p = if k > 0 {
                        val.pow(k as u32)
                    } else {
                        val.monomial_inverse()
                            .ok_or(LaurentError::NonMonomialInverse(i))?
                            .pow((-k) as u32)
                    };
                    powers.insert((i, k), p);
                }
                term = &term * &powers[&(i, k)];
            }
            for (te, tc) in term.terms {
                let ex: Vec<i32> = te.iter().zip(&rest).map(|(a, b)| a + b).collect();
                *acc.entry(ex).or_insert_with(BigInt::zero) += tc * c;
            }
        }
        Ok(Self::from_accumulator(&self.vars, acc))
    }

    /// Re-expresses the polynomial over another table with the same variable
    /// count, keeping positions.
    pub fn with_table(&self, vars: &Arc<VarTable>) -> Self {
        assert_eq!(vars.len(), self.vars.len(), "table size");
        LaurentPoly { vars: vars.clone(), terms: self.terms.clone() }
    }

    /// Parses the canonical text form.
    pub fn parse(vars: &Arc<VarTable>, text: &str) -> Result<Self, LaurentError> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(LaurentError::Parse("empty input".into()));
        }
        if text == "0" {
            return Ok(Self::zero(vars));
        }
        // a minus starts a new term unless it follows `^` or another sign
        let mut tokens = vec![String::new()];
        let mut prev = None;
        for ch in text.chars() {
            match ch {
                '+' => tokens.push(String::new()),
                '-' if !matches!(prev, None | Some('^') | Some('+')) => tokens.push("-".into()),
                _ => tokens.last_mut().unwrap().push(ch),
            }
            prev = Some(ch);
        }
        let mut out = Vec::new();
        for tok in &tokens {
            out.push(parse_term(vars, tok)?);
        }
        Ok(Self::from_terms(vars, out))
    }
}

fn parse_term(vars: &Arc<VarTable>, tok: &str) -> Result<(Vec<i32>, BigInt), LaurentError> {
    let bad = || LaurentError::Parse(format!("bad term `{tok}`"));
    let (neg, body) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, tok),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let mut exps = vec![0i32; vars.len()];
    let mut coeff = BigInt::one();
    for (pos, factor) in body.split('*').enumerate() {
        if factor.is_empty() {
            return Err(bad());
        }
        if pos == 0 && factor.chars().all(|c| c.is_ascii_digit()) {
            coeff = factor.parse().map_err(|_| bad())?;
            continue;
        }
        let (name, e) = match factor.split_once('^') {
            Some((n, e)) => (n, e.parse::<i32>().map_err(|_| bad())?),
            None => (factor, 1),
        };
        let i = vars
            .index_of(name)
            .ok_or_else(|| LaurentError::Parse(format!("unknown variable `{name}`")))?;
        exps[i] += e;
    }
    if neg {
        coeff = -coeff;
    }
    Ok((exps, coeff))
}

/// Exponent vector ordered by total degree, then lexicographically.
#[derive(Clone, PartialEq, Eq)]
struct Grlex(Vec<i32>);

impl Ord for Grlex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a: i64 = self.0.iter().map(|&x| x as i64).sum();
        let b: i64 = other.0.iter().map(|&x| x as i64).sum();
        a.cmp(&b).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Grlex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| {
                    let name = &self.vars.names[i];
                    if k == 1 { name.clone() } else { format!("{name}^{k}") }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else if (-c).is_one() {
                write!(f, "-{}", factors.join("*"))?;
            } else {
                write!(f, "{c}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

// Operator forms panic on mismatched tables; use the checked_* methods when
// the tables may differ.
impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.checked_add(rhs).expect("variable tables differ")
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.checked_sub(rhs).expect("variable tables differ")
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.checked_mul(rhs).expect("variable tables differ")
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}
