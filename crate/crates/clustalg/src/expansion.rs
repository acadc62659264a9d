//! Explicit expansions of `x_{1;t'}^p x_{2;t'}^q` along a rank-2 mutation
//! sequence from `t'` to `t` in directions 1 and 2, in the presence of spectator
//! vertices.
//!
//! Conventions: `n` counts seeds, so `t` is reached from `t'` after `n - 1`
//! mutations. Going from `t` back to `t'` starts in direction 1. Spectator `f`
//! carries `ξ_f` arrows `f -> 1` and `ω_f` arrows `2 -> f` at `t`; a negative
//! count reverses the arrows. Spectators are stored as frozen rows, which is
//! harmless since only 1 and 2 ever mutate.
//!
//! Three formulas are provided:
//! * [`expand_compatible`]: sum over families of compatible pairs, in `x_t`;
//! * [`expand_tau`]: sum over `τ` sequences, in the cluster of `μ_1(t)`;
//! * [`expand_split`]: the `f1 + f2` split with nonnegative coefficients.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chebyshev::{c_small, modified_binomial, partial_sums_recursive, ChebError, Form};
use crate::dyck::{pair_counts, CountEngine, DyckError, PairCounts};
use crate::laurent::{LaurentError, LaurentPoly, VarTable};
use crate::par::Exec;
use crate::rank3::{classify_sequence, ArrowTriple, SeqClass};
use crate::seed::{ExchangeMatrix, MutationWord, Seed, SeedError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("r must be positive for the rank-2 formulas, got {0}")]
    NonPositiveR(i64),
    #[error("seed count must be at least 1, got {0}")]
    SeedCount(i64),
    #[error("exponents must be nonnegative, got p={0}, q={1}")]
    NegativeExponent(i64, i64),
    #[error("directions {0} and {1} must be distinct mutable vertices")]
    Directions(usize, usize),
    #[error("exponent {0} does not fit in 32 bits")]
    ExponentRange(i64),
    #[error("a = {a} is below A_n / r (r a - A_n = {deficit})")]
    SmallA { a: i64, deficit: i64 },
    #[error("word must alternate between two directions")]
    NotAlternating,
    #[error(transparent)]
    Seed(#[from] SeedError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Dyck(#[from] DyckError),
    #[error(transparent)]
    Cheb(#[from] ChebError),
}

type Result<T> = std::result::Result<T, ExpansionError>;

fn exp32(v: i64) -> Result<i32> {
    i32::try_from(v).map_err(|_| ExpansionError::ExponentRange(v))
}

fn exps(vals: impl IntoIterator<Item = i64>) -> Result<Vec<i32>> {
    vals.into_iter().map(exp32).collect()
}

/// Data of one rank-2 sequence with spectators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionContext {
    r: i64,
    n: i64,
    p: i64,
    q: i64,
    spectators: Vec<(i64, i64)>,
    table_t: Arc<VarTable>,
    table_mu1: Arc<VarTable>,
}

impl ExpansionContext {
    pub fn new(r: i64, n: i64, p: i64, q: i64, spectators: Vec<(i64, i64)>) -> Result<Self> {
        if r <= 0 {
            return Err(ExpansionError::NonPositiveR(r));
        }
        if n < 1 {
            return Err(ExpansionError::SeedCount(n));
        }
        if p < 0 || q < 0 {
            return Err(ExpansionError::NegativeExponent(p, q));
        }
        let k = spectators.len();
        let table_t = VarTable::cluster(2, k);
        let names = ["x1~".to_string(), "x2".to_string()]
            .into_iter()
            .chain((1..=k).map(|i| format!("u{i}")));
        let table_mu1 = VarTable::new(names)?;
        Ok(ExpansionContext { r, n, p, q, spectators, table_t, table_mu1 })
    }

    /// Context for directions `d1`, `d2` (0-based) of a full matrix at `t`.
    ///
    /// Every other row becomes a spectator, in row order; their indices are
    /// returned alongside. If `b_{d1,d2} < 0` the whole matrix is negated
    /// first, which leaves every cluster variable unchanged.
    pub fn from_matrix(
        b: &ExchangeMatrix,
        d1: usize,
        d2: usize,
        n: i64,
        p: i64,
        q: i64,
    ) -> Result<(Self, Vec<usize>)> {
        let nm = b.n_mutable();
        if d1 == d2 || d1 >= nm || d2 >= nm {
            return Err(ExpansionError::Directions(d1, d2));
        }
        let sign = if b.get(d1, d2) < 0 { -1 } else { 1 };
        let rows: Vec<usize> = (0..b.rows().len()).filter(|&i| i != d1 && i != d2).collect();
        let specs = rows.iter().map(|&f| (sign * b.get(f, d1), -sign * b.get(f, d2))).collect();
        Ok((Self::new(sign * b.get(d1, d2), n, p, q, specs)?, rows))
    }

    /// Same sequence and spectators, other exponents.
    pub fn with_exponents(&self, p: i64, q: i64) -> Result<Self> {
        if p < 0 || q < 0 {
            return Err(ExpansionError::NegativeExponent(p, q));
        }
        Ok(ExpansionContext { p, q, ..self.clone() })
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn spectators(&self) -> &[(i64, i64)] {
        &self.spectators
    }

    /// Variables `x1, x2, u1, …` of the seed `t`.
    pub fn table_t(&self) -> &Arc<VarTable> {
        &self.table_t
    }

    /// Variables `x1~, x2, u1, …` of the seed `μ_1(t)`.
    pub fn table_mu1(&self) -> &Arc<VarTable> {
        &self.table_mu1
    }

    pub fn form(&self) -> Form {
        Form::for_seed_count(self.n)
    }

    /// `(P, Q)` with `A_i = P c_{i+1} + Q c_i`.
    pub fn leading(&self) -> (i64, i64) {
        self.form().leading(self.p, self.q)
    }

    pub fn alpha(&self) -> i64 {
        self.leading().1
    }

    pub fn a(&self, i: i64) -> i64 {
        let (pp, qq) = self.leading();
        pp * c_small(self.r, i + 1) + qq * c_small(self.r, i)
    }

    /// `(a_{1,i}, a_{2,i})` for `i = 1..=p+q`, before clamping at zero.
    pub fn copies(&self) -> Vec<(i64, i64)> {
        let (r, n) = (self.r, self.n);
        (1..=self.p + self.q)
            .map(|i| {
                if i <= self.alpha() {
                    (c_small(r, n - 1), c_small(r, n - 2))
                } else {
                    (c_small(r, n), c_small(r, n - 1))
                }
            })
            .collect()
    }

    /// Exchange matrix at `t`: rows `1, 2`, then one frozen row per spectator.
    pub fn matrix(&self) -> ExchangeMatrix {
        let mut rows = vec![vec![0, self.r], vec![-self.r, 0]];
        rows.extend(self.spectators.iter().map(|&(xi, om)| vec![xi, -om]));
        ExchangeMatrix::new(2, self.spectators.len(), rows).expect("rank-2 block is skew-symmetric")
    }

    pub fn mu1_matrix(&self) -> ExchangeMatrix {
        self.matrix().mutate(0).expect("direction 1 exists")
    }

    /// Arrows `f -> 2` in `μ_1(Q_t)`.
    pub fn xi_prime(&self, f: usize) -> i64 {
        self.mu1_matrix().get(2 + f, 1)
    }

    /// Arrows `1 -> f` in `μ_1(Q_t)`, which is `ξ_f`.
    pub fn omega_prime(&self, f: usize) -> i64 {
        self.spectators[f].0
    }

    /// The exchange binomial `x1 x̃1` at `t`, over `table`.
    pub fn exchange_binomial(&self, table: &Arc<VarTable>) -> Result<LaurentPoly> {
        Ok(Seed::initial_with(self.matrix(), table.clone())?.exchange_binomial(0)?)
    }

    /// For `r = 1` the sequence has period 5 with 1 and 2 swapped; returns
    /// the equivalent shorter context when `n ≥ 6`.
    pub fn reduced(&self) -> Option<Self> {
        if self.r != 1 || self.n < 6 {
            return None;
        }
        let mut c = self.clone();
        while c.n >= 6 {
            c.n -= 5;
            std::mem::swap(&mut c.p, &mut c.q);
        }
        Some(c)
    }
}

/// Ground truth by literal mutation, with products memoized per `(p, q)`.
#[derive(Debug, Clone)]
pub struct RankTwoOracle {
    at_t: [LaurentPoly; 2],
    at_mu1: [LaurentPoly; 2],
    powers_t: HashMap<(i64, i64), LaurentPoly>,
    powers_mu1: HashMap<(i64, i64), LaurentPoly>,
}

fn alternating(start: usize, len: i64) -> MutationWord {
    MutationWord::new((0..len.max(0) as usize).map(|i| (start + i) % 2))
}

impl RankTwoOracle {
    /// Exponents of `ctx` are ignored; only the sequence matters.
    pub fn new(ctx: &ExpansionContext) -> Result<Self> {
        let t = Seed::initial_with(ctx.matrix(), ctx.table_t.clone())?;
        let at_t = t.mutate_word(&alternating(0, ctx.n - 1))?;
        let mu1 = Seed::initial_with(ctx.mu1_matrix(), ctx.table_mu1.clone())?;
        let word = if ctx.n == 1 { alternating(0, 1) } else { alternating(1, ctx.n - 2) };
        let at_mu1 = mu1.mutate_word(&word)?;
        let pick = |s: &Seed| [s.cluster()[0].clone(), s.cluster()[1].clone()];
        Ok(RankTwoOracle {
            at_t: pick(&at_t),
            at_mu1: pick(&at_mu1),
            powers_t: HashMap::new(),
            powers_mu1: HashMap::new(),
        })
    }

    fn power(
        base: &[LaurentPoly; 2],
        memo: &mut HashMap<(i64, i64), LaurentPoly>,
        p: i64,
        q: i64,
    ) -> LaurentPoly {
        if let Some(v) = memo.get(&(p, q)) {
            return v.clone();
        }
        let v = if p == 0 && q == 0 {
            LaurentPoly::one(base[0].vars())
        } else if p > 0 {
            &Self::power(base, memo, p - 1, q) * &base[0]
        } else {
            &Self::power(base, memo, p, q - 1) * &base[1]
        };
        memo.insert((p, q), v.clone());
        v
    }

    /// `x_{1;t'}^p x_{2;t'}^q` in the variables of `t`.
    pub fn at_t(&mut self, p: i64, q: i64) -> LaurentPoly {
        Self::power(&self.at_t, &mut self.powers_t, p, q)
    }

    /// The same element in the variables of `μ_1(t)`.
    pub fn at_mu1(&mut self, p: i64, q: i64) -> LaurentPoly {
        Self::power(&self.at_mu1, &mut self.powers_mu1, p, q)
    }
}

/// Number of families with `(|S1|, |S2|) = (k1, k2)`.
pub type FamilyCounts = BTreeMap<(i64, i64), BigInt>;

fn convolve(a: &FamilyCounts, b: &PairCounts) -> FamilyCounts {
    let mut out = FamilyCounts::new();
    for (&(x, y), c1) in a {
        for (k1, k2, c2) in b.nonzero() {
            *out.entry((x + k1 as i64, y + k2 as i64)).or_insert_with(BigInt::zero) += c1 * c2;
        }
    }
    out
}

type FamilyKey = (i64, Vec<(i64, i64)>, CountEngine);

fn family_memo() -> &'static Mutex<HashMap<FamilyKey, FamilyCounts>> {
    static MEMO: OnceLock<Mutex<HashMap<FamilyKey, FamilyCounts>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Counts for families `(S1^i, S2^i)`, one compatible pair per copy.
pub fn family_counts(ctx: &ExpansionContext, engine: CountEngine, exec: Exec) -> Result<FamilyCounts> {
    let key = (ctx.r, ctx.copies(), engine);
    if let Some(fc) = family_memo().lock().expect("memo lock").get(&key) {
        return Ok(fc.clone());
    }
    let mut acc = FamilyCounts::from([((0, 0), BigInt::one())]);
    for &(a1, a2) in &key.1 {
        acc = convolve(&acc, &*pair_counts(a1, a2, ctx.r, engine, exec)?);
    }
    family_memo().lock().expect("memo lock").insert(key, acc.clone());
    Ok(acc)
}

/// Counts for single compatible pairs on `D^{A_{n-1} x A_{n-2}}`.
pub fn single_path_counts(ctx: &ExpansionContext, engine: CountEngine, exec: Exec) -> Result<FamilyCounts> {
    let pc = pair_counts(ctx.a(ctx.n - 1), ctx.a(ctx.n - 2), ctx.r, engine, exec)?;
    let mut acc = FamilyCounts::new();
    for (k1, k2, c) in pc.nonzero() {
        acc.insert((k1 as i64, k2 as i64), c.clone());
    }
    Ok(acc)
}

/// `M_f`, the minimum of `ξ_f (A_{n-1} - |S1|) - ω_f |S2|` over all families.
///
/// Each copy contributes independently and reaches its extremes at
/// `(S1, S2) = (all, ∅)`, `(∅, ∅)` or `(∅, all)`.
pub fn m_f(ctx: &ExpansionContext, f: usize) -> i64 {
    let (xi, om) = ctx.spectators[f];
    let base = xi * ctx.a(ctx.n - 1);
    base + ctx
        .copies()
        .into_iter()
        .map(|(a1, a2)| (-xi * a1.max(0)).min(0).min(-om * a2.max(0)))
        .sum::<i64>()
}

/// `M_f` by direct minimization over the support of `counts`.
pub fn m_f_brute(ctx: &ExpansionContext, counts: &FamilyCounts, f: usize) -> i64 {
    let (xi, om) = ctx.spectators[f];
    let an1 = ctx.a(ctx.n - 1);
    counts
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(&(k1, k2), _)| xi * (an1 - k1) - om * k2)
        .min()
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct CompatExpansion {
    /// Over `ctx.table_t()`.
    pub poly: LaurentPoly,
    pub m: Vec<i64>,
    pub counts: FamilyCounts,
    /// Context actually summed over (after the `r = 1` reduction).
    pub effective: ExpansionContext,
}

/// The compatible-pair sum for given counts and spectator shifts.
pub fn expand_compatible_from(ctx: &ExpansionContext, counts: &FamilyCounts, m: &[i64]) -> Result<LaurentPoly> {
    let (r, an1, an2) = (ctx.r, ctx.a(ctx.n - 1), ctx.a(ctx.n - 2));
    let mut terms = Vec::with_capacity(counts.len());
    for (&(k1, k2), c) in counts {
        let e = [r * k2 - an1, r * k1 - an2].into_iter().chain(
            ctx.spectators.iter().zip(m).map(|(&(xi, om), mf)| xi * (an1 - k1) - om * k2 - mf),
        );
        terms.push((exps(e)?, c.clone()));
    }
    Ok(LaurentPoly::from_terms(&ctx.table_t, terms))
}

/// The compatible-pair sum. For `r = 1` and `n ≥ 6` every copy's path is
/// empty and the raw sum is wrong, so the period-5 reduction applies first.
pub fn expand_compatible(ctx: &ExpansionContext, engine: CountEngine, exec: Exec) -> Result<CompatExpansion> {
    let eff = ctx.reduced().unwrap_or_else(|| ctx.clone());
    let m_zero = vec![0; eff.spectators.len()];
    if eff.n == 1 {
        let poly = LaurentPoly::monomial(&eff.table_t, exps(unit_exps(&eff, eff.p, eff.q))?, 1);
        return Ok(CompatExpansion { poly, m: m_zero, counts: FamilyCounts::new(), effective: eff });
    }
    let counts = family_counts(&eff, engine, exec)?;
    let m: Vec<i64> = (0..eff.spectators.len()).map(|f| m_f(&eff, f)).collect();
    let poly = expand_compatible_from(&eff, &counts, &m)?;
    Ok(CompatExpansion { poly, m, counts, effective: eff })
}

fn unit_exps(ctx: &ExpansionContext, e1: i64, e2: i64) -> Vec<i64> {
    let mut v = vec![e1, e2];
    v.resize(2 + ctx.spectators.len(), 0);
    v
}

/// One admissible `τ` sequence and its weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauTerm {
    pub taus: Vec<i64>,
    #[serde(serialize_with = "ser_bigint")]
    pub coef: BigInt,
    /// `s_{N-3}`
    pub s_prev: i64,
    /// `s_{N-2}`
    pub s_last: i64,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// An element of `L`: a prefix `τ'_0..τ'_{N-4}` and the `k` closing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LEntry {
    pub prefix: Vec<i64>,
    pub k: i64,
    pub s_prev: i64,
    pub s_last: i64,
}

/// All `τ'` with `0 ≤ τ'_i ≤ τ_i` on the prefix and `s'_{N-3} = k c_{N-2}`,
/// `s'_{N-2} = k c_{N-1}` for some `0 ≤ k ≤ kmax`.
pub fn l_set(r: i64, big_n: i64, prefix: &[i64], kmax: i64) -> Vec<LEntry> {
    let (cn2, cn1) = (c_small(r, big_n - 2), c_small(r, big_n - 1));
    let mut out = Vec::new();
    let mut cur = vec![0i64; prefix.len()];
    loop {
        let s = partial_sums_recursive(&cur, r);
        let s_prev = *s.last().unwrap();
        for k in 0..=kmax {
            if s_prev == k * cn2 {
                out.push(LEntry { prefix: cur.clone(), k, s_prev, s_last: k * cn1 });
            }
        }
        // odometer
        let mut i = 0;
        while i < cur.len() && cur[i] == prefix[i] {
            cur[i] = 0;
            i += 1;
        }
        if i == cur.len() {
            break;
        }
        cur[i] += 1;
    }
    out
}

fn dominated(e: &LEntry, f: &LEntry) -> bool {
    if e.prefix == f.prefix {
        e.k < f.k
    } else {
        e.prefix.iter().zip(&f.prefix).all(|(a, b)| a <= b)
    }
}

/// Maximal elements of [`l_set`]: larger prefixes win componentwise, and
/// among equal prefixes the larger `k` wins.
pub fn l_max(r: i64, big_n: i64, prefix: &[i64], kmax: i64) -> Vec<LEntry> {
    let l = l_set(r, big_n, prefix, kmax);
    l.iter().filter(|e| !l.iter().any(|f| dominated(e, f))).cloned().collect()
}

/// Admissible `τ_0..τ_{N-3}` for the sequence `a(i)`.
///
/// The first `N-3` entries range over `0..=a(i+1) - r s_i`. The last one
/// runs down from `a(N-2) - r s_{N-3}` to `-(|a(N-2)| + r |s_{N-3}| + 1)`
/// and must pass the `L_max` inequality against every maximal element.
/// With `fix_last`, only sequences with `s_{N-2}` equal to it are kept.
pub fn tau_terms(
    r: i64,
    big_n: i64,
    a: &dyn Fn(i64) -> i64,
    kmax: i64,
    fix_last: Option<i64>,
) -> Result<Vec<TauTerm>> {
    let m = big_n - 2;
    if m <= 0 {
        return Ok(vec![TauTerm { taus: vec![], coef: BigInt::one(), s_prev: 0, s_last: 0 }]);
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    tau_rec(r, big_n, a, kmax, fix_last, &mut prefix, &mut out)?;
    Ok(out)
}

fn tau_rec(
    r: i64,
    big_n: i64,
    a: &dyn Fn(i64) -> i64,
    kmax: i64,
    fix_last: Option<i64>,
    prefix: &mut Vec<i64>,
    out: &mut Vec<TauTerm>,
) -> Result<()> {
    let m = (big_n - 2) as usize;
    let i = prefix.len();
    let s = partial_sums_recursive(prefix, r);
    if i + 1 < m {
        for t in 0..=a(i as i64 + 1) - r * s[i] {
            prefix.push(t);
            tau_rec(r, big_n, a, kmax, fix_last, prefix, out)?;
            prefix.pop();
        }
        return Ok(());
    }
    let s_prev = s[i];
    let up = a(big_n - 2) - r * s_prev;
    let lo = -(a(big_n - 2).abs() + r * s_prev.abs() + 1);
    let mx = l_max(r, big_n, prefix, kmax);
    let (an3, an2) = (a(big_n - 3), a(big_n - 2));
    let s_before = if i >= 1 { s[i - 1] } else { 0 };
    for t in (lo..=up).rev() {
        let s_last = r * s_prev - s_before + t;
        if fix_last.is_some_and(|v| v != s_last) {
            continue;
        }
        if !mx.iter().all(|e| (s_last - e.s_last) * an3 >= (s_prev - e.s_prev) * an2) {
            continue;
        }
        prefix.push(t);
        let ss = partial_sums_recursive(prefix, r);
        let mut coef = BigInt::one();
        for (j, &tj) in prefix.iter().enumerate() {
            coef *= modified_binomial(a(j as i64 + 1) - r * ss[j], tj)?;
            if coef.is_zero() {
                break;
            }
        }
        if !coef.is_zero() {
            out.push(TauTerm { taus: prefix.clone(), coef, s_prev, s_last });
        }
        prefix.pop();
    }
    Ok(())
}

/// How the exact spectator shift compares with the case rule that reads it
/// off the classification of the `(1, 2, f)` subquiver sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MPrimeDiag {
    pub spectator: usize,
    pub class: Option<SeqClass>,
    /// `0` if almost cyclic, `ξ'_f A_{n-2} - ω'_f A_{n-3}` if acyclic.
    pub rule: Option<i64>,
    pub exact: i64,
}

impl MPrimeDiag {
    pub fn rule_matches(&self) -> bool {
        self.rule == Some(self.exact)
    }

    /// Almost cyclic sequences must need no shift.
    pub fn almost_cyclic_consistent(&self) -> bool {
        !matches!(self.class, Some(c) if c.is_almost_cyclic()) || self.exact == 0
    }
}

#[derive(Debug, Clone)]
pub struct TauExpansion {
    /// Over `ctx.table_mu1()`.
    pub poly: LaurentPoly,
    pub terms: Vec<TauTerm>,
    pub m_prime: Vec<i64>,
    pub diagnostics: Vec<MPrimeDiag>,
    /// Context actually summed over (after the `r = 1` reduction).
    pub effective: ExpansionContext,
}

fn tau_core(ctx: &ExpansionContext) -> Result<(Vec<TauTerm>, Vec<i64>, Vec<MPrimeDiag>)> {
    let a = |i: i64| ctx.a(i);
    let terms = tau_terms(ctx.r, ctx.n, &a, ctx.leading().0, None)?;
    let k = ctx.spectators.len();
    let mut m_prime = Vec::with_capacity(k);
    let mut diags = Vec::with_capacity(k);
    for f in 0..k {
        let (xp, op) = (ctx.xi_prime(f), ctx.omega_prime(f));
        let exact = terms.iter().map(|t| xp * t.s_last - op * t.s_prev).min().unwrap_or(0);
        let class = classify_sequence(ArrowTriple::new(ctx.r, ctx.spectators[f].0, ctx.spectators[f].1), ctx.n - 1).ok();
        let rule = class.map(|c| {
            if c.is_almost_cyclic() { 0 } else { xp * ctx.a(ctx.n - 2) - op * ctx.a(ctx.n - 3) }
        });
        m_prime.push(exact);
        diags.push(MPrimeDiag { spectator: f, class, rule, exact });
    }
    Ok((terms, m_prime, diags))
}

fn tau_term_exps(ctx: &ExpansionContext, t: &TauTerm, m_prime: &[i64]) -> Result<Vec<i32>> {
    let (r, an1, an2) = (ctx.r, ctx.a(ctx.n - 1), ctx.a(ctx.n - 2));
    let fe = (0..ctx.spectators.len())
        .map(|f| ctx.xi_prime(f) * t.s_last - ctx.omega_prime(f) * t.s_prev - m_prime[f]);
    exps([an1 - r * t.s_last, r * t.s_prev - an2].into_iter().chain(fe))
}

/// The `τ` sum, in the cluster of `μ_1(t)`.
pub fn expand_tau(ctx: &ExpansionContext) -> Result<TauExpansion> {
    let eff = ctx.reduced().unwrap_or_else(|| ctx.clone());
    let k = eff.spectators.len();
    if eff.n == 1 {
        // x1^p x2^q with x1 = (exchange binomial) / x̃1
        let bino = eff.exchange_binomial(&eff.table_mu1)?;
        let mono = LaurentPoly::monomial(&eff.table_mu1, exps(unit_exps(&eff, -eff.p, eff.q))?, 1);
        let poly = &bino.pow(eff.p as u32) * &mono;
        return Ok(TauExpansion { poly, terms: vec![], m_prime: vec![0; k], diagnostics: vec![], effective: eff });
    }
    let (terms, m_prime, diagnostics) = tau_core(&eff)?;
    let mut out = Vec::with_capacity(terms.len());
    for t in &terms {
        out.push((tau_term_exps(&eff, t, &m_prime)?, t.coef.clone()));
    }
    let poly = LaurentPoly::from_terms(&eff.table_mu1, out);
    Ok(TauExpansion { poly, terms, m_prime, diagnostics, effective: eff })
}

/// Rewrites a polynomial in `x̃1, x2, u…` into `x1, x2, u…` via
/// `x̃1 = (exchange binomial) / x1`, clearing negative powers of `x̃1` by
/// exact division.
pub fn rewrite_to_t(ctx: &ExpansionContext, poly: &LaurentPoly) -> Result<LaurentPoly> {
    let bino = ctx.exchange_binomial(&ctx.table_t)?;
    let kneg = poly.terms().map(|(e, _)| -e[0]).max().unwrap_or(0).max(0);
    let mut by_k: BTreeMap<i32, Vec<(Vec<i32>, BigInt)>> = BTreeMap::new();
    for (e, c) in poly.terms() {
        let mut rest = e.clone();
        rest[0] = -e[0];
        by_k.entry(e[0] + kneg).or_default().push((rest, c.clone()));
    }
    let mut acc = Vec::new();
    let mut pw = LaurentPoly::one(&ctx.table_t);
    let mut at = 0i32;
    for (k, group) in by_k {
        while at < k {
            pw = &pw * &bino;
            at += 1;
        }
        let g = LaurentPoly::from_terms(&ctx.table_t, group);
        acc.extend((&g * &pw).terms().map(|(e, c)| (e.clone(), c.clone())));
    }
    let sum = LaurentPoly::from_terms(&ctx.table_t, acc);
    if kneg == 0 {
        return Ok(sum);
    }
    Ok(sum.div_exact(&bino.pow(kneg as u32))?)
}

/// `f1` lives in `μ_1(t)` with only nonnegative powers of `x̃1`; `f2` lives
/// in `t` with only positive powers of `x1`.
#[derive(Debug, Clone)]
pub struct SplitExpansion {
    pub f1: LaurentPoly,
    pub f2: LaurentPoly,
}

impl SplitExpansion {
    /// `f1 + f2` in the variables of `t`.
    pub fn combined(&self, ctx: &ExpansionContext) -> Result<LaurentPoly> {
        Ok(rewrite_to_t(ctx, &self.f1)?.checked_add(&self.f2)?)
    }
}

pub fn expand_split(ctx: &ExpansionContext, engine: CountEngine, exec: Exec) -> Result<SplitExpansion> {
    let eff = ctx.reduced().unwrap_or_else(|| ctx.clone());
    if eff.n == 1 {
        let e = exps(unit_exps(&eff, eff.p, eff.q))?;
        let (f1, f2) = if eff.p == 0 {
            (LaurentPoly::monomial(&eff.table_mu1, e, 1), LaurentPoly::zero(&eff.table_t))
        } else {
            (LaurentPoly::zero(&eff.table_mu1), LaurentPoly::monomial(&eff.table_t, e, 1))
        };
        return Ok(SplitExpansion { f1, f2 });
    }
    let (terms, m_prime, _) = tau_core(&eff)?;
    let (r, an1) = (eff.r, eff.a(eff.n - 1));
    let mut t1 = Vec::new();
    for t in terms.iter().filter(|t| an1 - r * t.s_last >= 0) {
        t1.push((tau_term_exps(&eff, t, &m_prime)?, t.coef.clone()));
    }
    let f1 = LaurentPoly::from_terms(&eff.table_mu1, t1);
    let counts = family_counts(&eff, engine, exec)?;
    let m: Vec<i64> = (0..eff.spectators.len()).map(|f| m_f(&eff, f)).collect();
    let upper: FamilyCounts =
        counts.into_iter().filter(|&((_, k2), _)| r * k2 - an1 > 0).collect();
    let f2 = expand_compatible_from(&eff, &upper, &m)?;
    Ok(SplitExpansion { f1, f2 })
}

/// Smallest exponent of any spectator variable, `None` without spectators
/// or terms.
pub fn min_spectator_exponent(poly: &LaurentPoly) -> Option<i32> {
    poly.terms().flat_map(|(e, _)| e[2..].iter().copied().collect::<Vec<_>>()).min()
}

/// Outcome of the divisibility check for one `(r, n, p, q, a)`.
#[derive(Debug, Clone)]
pub struct DivisibilityOutcome {
    /// Over `x1, x2`.
    pub sum: LaurentPoly,
    /// `r a - A_n`.
    pub exponent: i64,
    pub quotient: Option<LaurentPoly>,
    pub terms: usize,
}

impl DivisibilityOutcome {
    pub fn passes(&self) -> bool {
        self.quotient.as_ref().is_some_and(|q| q.is_nonneg())
    }
}

/// Sums over `τ_0..τ_{n-2}` with `s_{n-1} = a` and divides by
/// `(1 + x1^r)^{r a - A_n}`.
pub fn check_divisibility(r: i64, n: i64, p: i64, q: i64, form: Form, a: i64) -> Result<DivisibilityOutcome> {
    if r <= 0 {
        return Err(ExpansionError::NonPositiveR(r));
    }
    if n < 2 {
        return Err(ExpansionError::SeedCount(n));
    }
    if p < 0 || q < 0 {
        return Err(ExpansionError::NegativeExponent(p, q));
    }
    let (pp, qq) = form.leading(p, q);
    let av = |i: i64| pp * c_small(r, i + 1) + qq * c_small(r, i);
    let deficit = r * a - av(n);
    if deficit < 0 {
        return Err(ExpansionError::SmallA { a, deficit });
    }
    let table = VarTable::cluster(2, 0);
    let terms = tau_terms(r, n + 1, &av, pp, Some(a))?;
    let mut out = Vec::with_capacity(terms.len());
    for t in &terms {
        out.push((exps([r * t.s_prev - av(n - 1), r * (av(n - 1) - a) - av(n - 2)])?, t.coef.clone()));
    }
    let sum = LaurentPoly::from_terms(&table, out);
    let one_plus = LaurentPoly::from_terms(
        &table,
        [(vec![0, 0], BigInt::one()), (vec![exp32(r)?, 0], BigInt::one())],
    );
    let quotient = match sum.div_exact(&one_plus.pow(deficit as u32)) {
        Ok(qt) => Some(qt),
        Err(LaurentError::NotDivisible) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(DivisibilityOutcome { sum, exponent: deficit, quotient, terms: terms.len() })
}

/// Options for [`check_context`].
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub engine: CountEngine,
    /// Also rewrite the `τ` sum into `x_t` through exact division.
    pub rewrite_tau: bool,
    /// Also compare with the single-path variant of the pair sum.
    pub single_path: bool,
    /// Also compare `M_f` with brute-force minimization.
    pub brute_m: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { engine: CountEngine::Auto, rewrite_tau: true, single_path: false, brute_m: true }
    }
}

/// Formula-versus-oracle verdicts for one context.
#[derive(Debug, Clone, Serialize)]
pub struct ContextReport {
    pub r: i64,
    pub n: i64,
    pub p: i64,
    pub q: i64,
    pub spectators: Vec<(i64, i64)>,
    pub compat: bool,
    pub tau: bool,
    pub tau_rewritten: Option<bool>,
    pub split: bool,
    pub single_path: Option<bool>,
    pub m_f_brute: Option<bool>,
    pub spectator_exponents_nonneg: bool,
    pub split_coeffs_nonneg: bool,
    pub m_prime: Vec<MPrimeDiag>,
    pub tau_terms: usize,
}

impl ContextReport {
    /// Every formula matched the oracle and every sign condition held.
    pub fn passes(&self) -> bool {
        self.compat
            && self.tau
            && self.tau_rewritten != Some(false)
            && self.split
            && self.single_path != Some(false)
            && self.m_f_brute != Some(false)
            && self.spectator_exponents_nonneg
            && self.split_coeffs_nonneg
    }
}

pub fn check_context(
    ctx: &ExpansionContext,
    oracle: &mut RankTwoOracle,
    opts: CheckOptions,
    exec: Exec,
) -> Result<ContextReport> {
    let truth_t = oracle.at_t(ctx.p, ctx.q);
    let truth_mu1 = oracle.at_mu1(ctx.p, ctx.q);

    let cmp = expand_compatible(ctx, opts.engine, exec)?;
    let compat = cmp.poly == truth_t;
    let eff = &cmp.effective;
    let m_f_brute = (opts.brute_m && eff.n >= 2).then(|| {
        (0..eff.spectators.len()).all(|f| m_f(eff, f) == m_f_brute(eff, &cmp.counts, f))
    });
    let single_path = if opts.single_path && eff.n >= 2 {
        let counts = single_path_counts(eff, opts.engine, exec)?;
        Some(expand_compatible_from(eff, &counts, &cmp.m)? == truth_t)
    } else {
        None
    };

    let tau = expand_tau(ctx)?;
    let tau_ok = tau.poly == truth_mu1;
    let tau_rewritten = if opts.rewrite_tau { Some(rewrite_to_t(ctx, &tau.poly)? == truth_t) } else { None };

    let split = expand_split(ctx, opts.engine, exec)?;
    let split_ok = split.combined(ctx)? == truth_t;

    let nonneg = |p: &LaurentPoly| min_spectator_exponent(p).is_none_or(|m| m >= 0);
    let spectator_exponents_nonneg = nonneg(&tau.poly) && nonneg(&split.f1) && nonneg(&split.f2);
    let split_coeffs_nonneg = split.f1.is_nonneg() && split.f2.is_nonneg();

    Ok(ContextReport {
        r: ctx.r,
        n: ctx.n,
        p: ctx.p,
        q: ctx.q,
        spectators: ctx.spectators.clone(),
        compat,
        tau: tau_ok,
        tau_rewritten,
        split: split_ok,
        single_path,
        m_f_brute,
        spectator_exponents_nonneg,
        split_coeffs_nonneg,
        m_prime: tau.diagnostics,
        tau_terms: tau.terms.len(),
    })
}

/// Multisets of up to `max_count` spectators with `|ξ|, |ω| ≤ bound`.
pub fn spectator_configs(max_count: usize, bound: i64) -> Vec<Vec<(i64, i64)>> {
    let singles: Vec<(i64, i64)> =
        (-bound..=bound).flat_map(|x| (-bound..=bound).map(move |w| (x, w))).collect();
    let mut out = vec![vec![]];
    let mut layer: Vec<(Vec<(i64, i64)>, usize)> = vec![(vec![], 0)];
    for _ in 0..max_count {
        let mut next = Vec::new();
        for (cfg, from) in &layer {
            for (j, &s) in singles.iter().enumerate().skip(*from) {
                let mut c = cfg.clone();
                c.push(s);
                next.push((c, j));
            }
        }
        out.extend(next.iter().map(|(c, _)| c.clone()));
        layer = next;
    }
    out
}

/// A rectangular family of contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub rs: Vec<i64>,
    pub ns: Vec<i64>,
    pub max_pq: i64,
    pub max_spectators: usize,
    pub bound: i64,
}

impl Grid {
    pub fn full() -> Self {
        Grid { rs: vec![1, 2, 3], ns: (2..=6).collect(), max_pq: 3, max_spectators: 2, bound: 2 }
    }

    pub fn quick() -> Self {
        Grid { rs: vec![1, 2, 3], ns: (2..=6).collect(), max_pq: 3, max_spectators: 1, bound: 1 }
    }

    /// `(r, n, spectators)` groups sharing one oracle, in sweep order.
    pub fn groups(&self) -> Vec<(i64, i64, Vec<(i64, i64)>)> {
        let specs = spectator_configs(self.max_spectators, self.bound);
        let mut out = Vec::new();
        for &r in &self.rs {
            for &n in &self.ns {
                for s in &specs {
                    out.push((r, n, s.clone()));
                }
            }
        }
        out
    }

    pub fn exponent_pairs(&self) -> Vec<(i64, i64)> {
        (0..=self.max_pq).flat_map(|p| (0..=self.max_pq - p).map(move |q| (p, q))).collect()
    }
}

/// Checks every context of `grid`; groups run under `exec`.
pub fn sweep(grid: &Grid, opts: CheckOptions, exec: Exec) -> Result<Vec<ContextReport>> {
    let pairs = grid.exponent_pairs();
    let groups = grid.groups();
    let per_group = exec.map(&groups, |(r, n, specs)| -> Result<Vec<ContextReport>> {
        let base = ExpansionContext::new(*r, *n, 0, 0, specs.clone())?;
        let mut oracle = RankTwoOracle::new(&base)?;
        pairs
            .iter()
            .map(|&(p, q)| check_context(&base.with_exponents(p, q)?, &mut oracle, opts, Exec::Sequential))
            .collect()
    });
    let mut out = Vec::new();
    for g in per_group {
        out.extend(g?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub name: String,
    pub passed: bool,
}

/// Formula checks on the alternating tail of a word.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    /// 1-based directions playing the roles of 1 and 2.
    pub directions: (usize, usize),
    pub seeds: i64,
    pub r: i64,
    pub skipped: Option<String>,
    pub checks: Vec<CrossCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub word: Vec<usize>,
    /// Mutations actually carried out.
    pub steps_done: usize,
    /// Set when the size budget stopped the word early: the size bound
    /// (`log2`) of the exchange that was not attempted.
    pub stopped_at_bound: Option<f64>,
    pub laurent: bool,
    pub all_nonneg: bool,
    pub min_coeff: Option<String>,
    pub max_terms: usize,
    pub failures: Vec<String>,
    pub tail: Option<TailReport>,
}

impl PositivityReport {
    /// No violation among the variables that were computed.
    pub fn no_failures(&self) -> bool {
        self.laurent
            && self.all_nonneg
            && self.tail.as_ref().is_none_or(|t| t.checks.iter().all(|c| c.passed))
    }

    /// The whole word was verified.
    pub fn passes(&self) -> bool {
        self.no_failures() && self.stopped_at_bound.is_none()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PositivityOptions {
    pub tail_checks: bool,
    /// Tails are only checked when `c_n^[r]` stays at most this.
    pub tail_size_limit: i64,
    /// Stop before an exchange whose numerator could exceed `2^budget` terms.
    pub size_budget_log2: Option<f64>,
}

impl Default for PositivityOptions {
    fn default() -> Self {
        PositivityOptions { tail_checks: true, tail_size_limit: 60, size_budget_log2: None }
    }
}

/// Runs the mutation oracle along `w` and checks each new cluster variable
/// for nonnegative coefficients as it appears. Each step divides exactly, so
/// completing a step certifies the Laurent property for its variable.
pub fn verify_positivity(b0: &ExchangeMatrix, w: &MutationWord, opts: PositivityOptions) -> Result<PositivityReport> {
    let mut seed = Seed::initial(b0.clone());
    let mut failures = Vec::new();
    let mut laurent = true;
    let mut all_nonneg = true;
    let mut steps_done = 0;
    let mut stopped_at_bound = None;
    let mut min_coeff: Option<BigInt> = None;
    let mut max_terms = seed.cluster().iter().map(|p| p.len()).max().unwrap_or(0);
    for (step, &k) in w.dirs().iter().enumerate() {
        if let Some(budget) = opts.size_budget_log2 {
            let bound = seed.exchange_log2_bound(k)?;
            if bound > budget {
                stopped_at_bound = Some(bound);
                break;
            }
        }
        match seed.mutate(k) {
            Ok(s) => seed = s,
            Err(SeedError::Laurent(LaurentError::NotDivisible)) => {
                laurent = false;
                failures.push(format!("step {}: mutation in direction {} is not Laurent", step + 1, k + 1));
                break;
            }
            Err(e) => return Err(e.into()),
        }
        steps_done += 1;
        let x = &seed.cluster()[k];
        if !x.is_nonneg() {
            all_nonneg = false;
            failures.push(format!("step {}: x{} has a negative coefficient: {x}", step + 1, k + 1));
        }
        min_coeff = min_coeff.into_iter().chain(x.min_coeff()).min();
        max_terms = max_terms.max(x.len());
    }
    let complete = laurent && stopped_at_bound.is_none();
    let tail = if opts.tail_checks && complete { tail_report(b0, w, opts)? } else { None };
    Ok(PositivityReport {
        word: w.one_based(),
        steps_done,
        stopped_at_bound,
        laurent,
        all_nonneg,
        min_coeff: min_coeff.map(|c| c.to_string()),
        max_terms,
        failures,
        tail,
    })
}

fn tail_report(b0: &ExchangeMatrix, w: &MutationWord, opts: PositivityOptions) -> Result<Option<TailReport>> {
    let d = w.dirs();
    let len = d.len();
    if len < 2 {
        return Ok(None);
    }
    let (a, b) = (d[len - 2], d[len - 1]);
    let mut start = len - 2;
    while start > 0 && d[start - 1] == if (len - start) % 2 == 0 { b } else { a } {
        start -= 1;
    }
    let (d1, d2) = (d[start], d[start + 1]);
    let tail_len = (len - start) as i64;
    let seeds = tail_len + 1;
    let mut bt = b0.clone();
    for &k in &d[..start] {
        bt = bt.mutate(k)?;
    }
    let r = bt.get(d1, d2).abs();
    let mut report = TailReport { directions: (d1 + 1, d2 + 1), seeds, r, skipped: None, checks: vec![] };
    if r == 0 {
        report.skipped = Some("directions do not interact".into());
        return Ok(Some(report));
    }
    if crate::chebyshev::c(r, seeds).abs() > BigInt::from(opts.tail_size_limit) {
        report.skipped = Some(format!("c_{seeds} too large for r = {r}"));
        return Ok(Some(report));
    }
    let (base, rows) = ExpansionContext::from_matrix(&bt, d1, d2, seeds, 0, 0)?;
    let full = Seed::initial(bt.clone()).mutate_word(&MutationWord::new(d[start..].iter().copied()))?;
    let mut oracle = RankTwoOracle::new(&base)?;
    // ctx variable j sits at full index map[j]
    let map: Vec<usize> = [d1, d2].into_iter().chain(rows).collect();
    let full_vars = full.vars().clone();
    let relabel = |p: &LaurentPoly| relabel(p, &full_vars, &map);
    for (p, q) in [(1, 0), (0, 1)] {
        let ctx = base.with_exponents(p, q)?;
        let truth = if p == 1 { &full.cluster()[d1] } else { &full.cluster()[d2] };
        let tag = if p == 1 { "x_d1" } else { "x_d2" };
        let cmp = expand_compatible(&ctx, CountEngine::Auto, Exec::Sequential)?;
        report.checks.push(CrossCheck { name: format!("{tag} compatible pairs"), passed: &relabel(&cmp.poly) == truth });
        let tau = expand_tau(&ctx)?;
        report.checks.push(CrossCheck { name: format!("{tag} tau sum"), passed: tau.poly == oracle.at_mu1(p, q) });
        let split = expand_split(&ctx, CountEngine::Auto, Exec::Sequential)?;
        let ok = split.f1.is_nonneg() && split.f2.is_nonneg() && &relabel(&split.combined(&ctx)?) == truth;
        report.checks.push(CrossCheck { name: format!("{tag} split"), passed: ok });
    }
    Ok(Some(report))
}

/// Moves a polynomial over a context table into the full seed table;
/// context variable `j` becomes full variable `map[j]`.
pub fn relabel(poly: &LaurentPoly, full: &Arc<VarTable>, map: &[usize]) -> LaurentPoly {
    LaurentPoly::from_terms(
        full,
        poly.terms().map(|(e, c)| {
            let mut v = vec![0i32; full.len()];
            for (j, &x) in e.iter().enumerate() {
                v[map[j]] += x;
            }
            (v, c.clone())
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Oracle,
    Compat,
    Tau,
    Mixed,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Oracle, Method::Compat, Method::Tau, Method::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Compat => "compat",
            Method::Tau => "tau",
            Method::Mixed => "mixed",
        }
    }
}

/// An alternating word read as a rank-2 context over the initial seed.
#[derive(Debug, Clone)]
pub struct WordContext {
    /// 0-based directions playing the roles of 1 and 2.
    pub directions: (usize, usize),
    pub ctx: ExpansionContext,
    /// Context variable `j` is full variable `map[j]`.
    pub map: Vec<usize>,
}

/// The word must alternate `d1, d2, d1, …`. A single letter is accepted
/// when there are exactly two mutable vertices.
pub fn word_context(b0: &ExchangeMatrix, w: &MutationWord, p: i64, q: i64) -> Result<WordContext> {
    let d = w.dirs();
    let (d1, d2) = match d {
        [] => return Err(ExpansionError::NotAlternating),
        [k] if b0.n_mutable() == 2 => (*k, 1 - *k),
        [_] => return Err(ExpansionError::NotAlternating),
        [a, b, ..] => (*a, *b),
    };
    if d.iter().enumerate().any(|(i, &k)| k != if i % 2 == 0 { d1 } else { d2 }) {
        return Err(ExpansionError::NotAlternating);
    }
    let (ctx, rows) = ExpansionContext::from_matrix(b0, d1, d2, d.len() as i64 + 1, p, q)?;
    let map = [d1, d2].into_iter().chain(rows).collect();
    Ok(WordContext { directions: (d1, d2), ctx, map })
}

#[derive(Debug, Clone)]
pub struct WordExpansion {
    pub method: Method,
    /// `x_{d1}^p x_{d2}^q` at the end of the word, in the initial variables.
    pub poly: LaurentPoly,
    /// The τ-sum as produced, before rewriting out of the mutated variable.
    pub native: Option<LaurentPoly>,
}

/// Expands `x_{d1}^p x_{d2}^q` at the end of an alternating word with the
/// chosen method.
pub fn expand_word(b0: &ExchangeMatrix, w: &MutationWord, p: i64, q: i64, method: Method, exec: Exec) -> Result<WordExpansion> {
    let wc = word_context(b0, w, p, q)?;
    let full = VarTable::cluster(b0.n_mutable(), b0.n_frozen());
    let back = |poly: &LaurentPoly| relabel(poly, &full, &wc.map);
    let (poly, native) = match method {
        Method::Oracle => {
            let end = Seed::initial_with(b0.clone(), full.clone())?.mutate_word(w)?;
            let (d1, d2) = wc.directions;
            let poly = &end.cluster()[d1].pow(p as u32) * &end.cluster()[d2].pow(q as u32);
            (poly, None)
        }
        Method::Compat => (back(&expand_compatible(&wc.ctx, CountEngine::Auto, exec)?.poly), None),
        Method::Tau => {
            let tau = expand_tau(&wc.ctx)?;
            (back(&rewrite_to_t(&wc.ctx, &tau.poly)?), Some(tau.poly))
        }
        Method::Mixed => (back(&expand_split(&wc.ctx, CountEngine::Auto, exec)?.combined(&wc.ctx)?), None),
    };
    Ok(WordExpansion { method, poly, native })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mutation_is_the_exchange_binomial() {
        let ctx = ExpansionContext::new(2, 2, 1, 0, vec![]).unwrap();
        let poly = expand_compatible(&ctx, CountEngine::Auto, Exec::Sequential).unwrap().poly;
        let want = LaurentPoly::parse(ctx.table_t(), "x1^-1 + x1^-1*x2^2").unwrap();
        assert_eq!(poly, want);
        let split = expand_split(&ctx, CountEngine::Auto, Exec::Sequential).unwrap();
        assert!(split.f2.is_zero());
        assert_eq!(split.f1, LaurentPoly::parse(ctx.table_mu1(), "x1~").unwrap());
    }

    #[test]
    fn kronecker_four_seeds() {
        let ctx = ExpansionContext::new(2, 4, 1, 0, vec![]).unwrap();
        let mut o = RankTwoOracle::new(&ctx).unwrap();
        let rep = check_context(&ctx, &mut o, CheckOptions::default(), Exec::Sequential).unwrap();
        assert!(rep.passes(), "{rep:?}");
    }

    #[test]
    fn m_f_trivial_and_brute() {
        let ctx = ExpansionContext::new(2, 4, 1, 1, vec![(0, 0), (1, 0), (-2, 1)]).unwrap();
        assert_eq!(m_f(&ctx, 0), 0);
        let counts = family_counts(&ctx, CountEngine::Enumerate, Exec::Sequential).unwrap();
        for f in 0..3 {
            assert_eq!(m_f(&ctx, f), m_f_brute(&ctx, &counts, f));
        }
    }

    #[test]
    fn l_max_examples() {
        let mx = l_max(2, 5, &[0, 0], 2);
        assert_eq!(mx.len(), 1);
        assert_eq!((mx[0].prefix.clone(), mx[0].k), (vec![0, 0], 0));
        for e in l_set(3, 6, &[2, 3, 1], 0) {
            assert_eq!((e.s_prev, e.s_last), (0, 0));
        }
    }

    #[test]
    fn divisibility_trivial_exponent() {
        // A_n = r a: nothing to divide
        let out = check_divisibility(2, 3, 2, 0, Form::First, 3).unwrap();
        assert_eq!(out.exponent, 0);
        assert_eq!(out.quotient.as_ref(), Some(&out.sum));
    }

    #[test]
    fn spectator_multisets() {
        assert_eq!(spectator_configs(2, 2).len(), 1 + 25 + 325);
        assert_eq!(spectator_configs(1, 1).len(), 10);
    }

    #[test]
    fn from_matrix_negates() {
        let b = ExchangeMatrix::new(2, 1, vec![vec![0, -3], vec![3, 0], vec![1, 2]]).unwrap();
        let (ctx, rows) = ExpansionContext::from_matrix(&b, 0, 1, 3, 1, 0).unwrap();
        assert_eq!(ctx.r(), 3);
        assert_eq!(ctx.spectators(), &[(-1, 2)]);
        assert_eq!(rows, vec![2]);
    }

    #[test]
    fn word_methods_agree() {
        let b = ExchangeMatrix::new(3, 1, vec![vec![0, -2, 1], vec![2, 0, -1], vec![-1, 1, 0], vec![1, 0, 2]]).unwrap();
        let w = MutationWord::from_one_based(&[2, 1, 2, 1]).unwrap();
        for (p, q) in [(1, 0), (0, 1), (1, 1)] {
            let truth = expand_word(&b, &w, p, q, Method::Oracle, Exec::Sequential).unwrap().poly;
            for m in [Method::Compat, Method::Tau, Method::Mixed] {
                assert_eq!(expand_word(&b, &w, p, q, m, Exec::Sequential).unwrap().poly, truth, "{m:?} {p} {q}");
            }
        }
        let bad = MutationWord::from_one_based(&[1, 2, 3]).unwrap();
        assert_eq!(word_context(&b, &bad, 1, 0).unwrap_err(), ExpansionError::NotAlternating);
    }
}
