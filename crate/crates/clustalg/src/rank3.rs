//! Rank-3 quivers under alternating mutation in directions 1 and 2.
//!
//! Even steps have the shape `1 -r-> 2 -ω-> 3 -ξ-> 1`; odd steps have
//! `2 -r-> 1 -ω-> 3 -ξ-> 2`. Negative ξ or ω mean reversed arrows.

use serde::Serialize;
use thiserror::Error;

use crate::chebyshev::c_small;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Rank3Error {
    #[error("r must be nonnegative, got {0}")]
    NegativeR(i64),
    #[error("r = 1 sequence of length {0} is not classified (residue {1} after period reduction)")]
    LongRankOne(i64, i64),
    #[error("no condition of the definition matches (r={r}, xi={xi}, omega={omega}, m={m})")]
    Unclassified { r: i64, xi: i64, omega: i64, m: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ArrowTriple {
    pub r: i64,
    pub xi: i64,
    pub omega: i64,
}

impl ArrowTriple {
    pub fn new(r: i64, xi: i64, omega: i64) -> Self {
        ArrowTriple { r, xi, omega }
    }

    /// The 3x3 exchange matrix of the even-shape quiver.
    pub fn matrix(&self) -> [[i64; 3]; 3] {
        let ArrowTriple { r, xi, omega } = *self;
        [[0, r, -xi], [-r, 0, omega], [xi, -omega, 0]]
    }
}

/// `s̄(n) = c_{n+1} ξ - c_n ω`.
pub fn sbar(r: i64, xi: i64, omega: i64, n: i64) -> i64 {
    c_small(r, n + 1) * xi - c_small(r, n) * omega
}

/// Which closed form produced an evolved triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvolveCase {
    Cyclic,
    Switch,
    AfterSwitch,
    BothNegative,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Evolved {
    pub xi_bar: i64,
    pub omega_bar: i64,
    /// True for odd `n`: the r-edge points from 2 to 1.
    pub reversed: bool,
    pub case: EvolveCase,
}

/// `(ξ̄(n), ω̄(n))` after `n` alternating mutations starting in direction 1.
///
/// The case is chosen by the first index `j ≥ 1` with `s̄(j) < 0`; before it
/// the cyclic formula holds, at it the switch formula, after it the third.
/// For `r = 1` the sequence has period 5 up to swapping 1 and 2, so `n` is
/// reduced modulo 5 first.
pub fn evolve_arrows(q0: ArrowTriple, n: i64) -> Evolved {
    let ArrowTriple { r, xi, omega } = q0;
    let reversed = n % 2 == 1;
    let done = |x: i64, w: i64, case| Evolved { xi_bar: x, omega_bar: w, reversed, case };
    let n_eff = if r == 1 { n % 5 } else { n };
    if n_eff == 0 {
        return done(xi, omega, EvolveCase::Identity);
    }
    let n = n_eff;
    if xi < 0 && omega < 0 {
        return done(
            -c_small(r, n + 1) * omega - c_small(r, n) * xi,
            -c_small(r, n) * omega - c_small(r, n - 1) * xi,
            EvolveCase::BothNegative,
        );
    }
    let s = |i: i64| sbar(r, xi, omega, i);
    match (1..=n).find(|&i| s(i) < 0) {
        None => done(s(n + 1), s(n), EvolveCase::Cyclic),
        Some(j) if j == n => done(-s(n - 1), s(n), EvolveCase::Switch),
        Some(_) => done(-s(n - 1), -s(n - 2), EvolveCase::AfterSwitch),
    }
}

/// Case selection exactly as the rephrased statement reads: strict `>` for
/// "cyclic so far", `≤` at the switch. Returns `None` when no case applies.
pub fn evolve_case_verbatim(q0: ArrowTriple, n: i64) -> Option<(EvolveCase, i64, i64)> {
    let ArrowTriple { r, xi, omega } = q0;
    if n == 0 {
        return Some((EvolveCase::Identity, xi, omega));
    }
    if xi < 0 && omega < 0 {
        return Some((
            EvolveCase::BothNegative,
            -c_small(r, n + 1) * omega - c_small(r, n) * xi,
            -c_small(r, n) * omega - c_small(r, n - 1) * xi,
        ));
    }
    let s = |i: i64| sbar(r, xi, omega, i);
    if (1..=n).all(|i| s(i) > 0) {
        return Some((EvolveCase::Cyclic, s(n + 1), s(n)));
    }
    if s(n) <= 0 && (1..n).all(|i| s(i) > 0) {
        return Some((EvolveCase::Switch, -s(n - 1), s(n)));
    }
    if n >= 2 && s(n - 1) <= 0 {
        return Some((EvolveCase::AfterSwitch, -s(n - 1), -s(n - 2)));
    }
    None
}

/// Arrow counts read off the 3x3 matrix after `n` literal mutations.
pub fn evolve_by_mutation(q0: ArrowTriple, n: i64) -> (i64, i64) {
    let mut b = q0.matrix();
    let mut k = 0usize;
    for _ in 0..n {
        let old = b;
        for i in 0..3 {
            for j in 0..3 {
                b[i][j] = if i == k || j == k {
                    -old[i][j]
                } else {
                    old[i][j] + old[i][k].signum() * (old[i][k] * old[k][j]).max(0)
                };
            }
        }
        k = 1 - k;
    }
    if n % 2 == 0 { (b[2][0], b[1][2]) } else { (b[2][1], b[0][2]) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeqClass {
    AlmostCyclic(u8),
    Acyclic(u8),
}

impl SeqClass {
    pub fn is_almost_cyclic(self) -> bool {
        matches!(self, SeqClass::AlmostCyclic(_))
    }

    pub fn condition(self) -> u8 {
        match self {
            SeqClass::AlmostCyclic(c) | SeqClass::Acyclic(c) => c,
        }
    }
}

/// `c_n ξ - c_{n-1} ω` for `n = 1..=m`, the quantities the conditions test.
pub fn condition_trace(q0: ArrowTriple, m: i64) -> Vec<i64> {
    (1..=m).map(|n| sbar(q0.r, q0.xi, q0.omega, n - 1)).collect()
}

/// Classifies `(Q_0, …, Q_m)` by the seven conditions.
///
/// A both-negative start is first moved one step along (the next quiver has
/// one of ξ, ω nonnegative). For `r = 1`, `m` is reduced modulo 5; residues
/// 3 and 4 stay unclassified.
pub fn classify_sequence(q0: ArrowTriple, m: i64) -> Result<SeqClass, Rank3Error> {
    let ArrowTriple { r, xi, omega } = q0;
    if r < 0 {
        return Err(Rank3Error::NegativeR(r));
    }
    if xi < 0 && omega < 0 && m >= 1 && r != 0 {
        let e = evolve_arrows(q0, 1);
        return classify_sequence(ArrowTriple::new(r, e.xi_bar, e.omega_bar), m - 1);
    }
    if r == 0 {
        return Ok(SeqClass::AlmostCyclic(5));
    }
    let m_eff = if r == 1 { m % 5 } else { m };
    if r == 1 && m_eff > 2 {
        return Err(Rank3Error::LongRankOne(m, m_eff));
    }
    let vals = condition_trace(q0, m_eff);
    let all_pos = vals.iter().all(|&v| v > 0);
    let all_nonpos = vals.iter().all(|&v| v <= 0);
    if r >= 2 {
        if all_pos {
            return Ok(SeqClass::AlmostCyclic(1));
        }
        if all_nonpos {
            return Ok(SeqClass::AlmostCyclic(2));
        }
        if m_eff >= 2 {
            let hit = (1..m_eff).any(|n| {
                c_small(r, n + 1) * xi - c_small(r, n) * omega <= 0
                    && c_small(r, n - 1) * omega - c_small(r, n) * xi < 0
            });
            if hit {
                return Ok(SeqClass::Acyclic(6));
            }
        }
    } else {
        if all_pos {
            return Ok(SeqClass::AlmostCyclic(3));
        }
        if all_nonpos {
            return Ok(SeqClass::AlmostCyclic(4));
        }
        if m_eff == 2 && xi <= 0 && omega > 0 {
            return Ok(SeqClass::Acyclic(7));
        }
    }
    Err(Rank3Error::Unclassified { r, xi, omega, m })
}
