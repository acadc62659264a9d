//! Extended exchange matrices, seed mutation, quivers and the mutation oracle.
//!
//! Directions are 0-based in this module's API; the JSON word format and the
//! CLI use 1-based directions and convert at the boundary.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{LaurentError, LaurentPoly, VarTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeedError {
    #[error("matrix shape: expected {expected} rows of {cols} entries")]
    Shape { expected: usize, cols: usize },
    #[error("matrix is skew-symmetrizable but not skew-symmetric")]
    SkewSymmetrizable,
    #[error("mutable block is not skew-symmetric at ({0},{1})")]
    NotSkewSymmetric(usize, usize),
    #[error("direction {0} out of range")]
    Direction(usize),
    #[error("quiver has a 2-cycle between {0} and {1}")]
    TwoCycle(usize, usize),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// Extended exchange matrix: `n + m` rows, `n` columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangeMatrix {
    n: usize,
    m: usize,
    rows: Vec<Vec<i64>>,
}

impl ExchangeMatrix {
    pub fn new(n: usize, m: usize, rows: Vec<Vec<i64>>) -> Result<Self, SeedError> {
        if rows.len() != n + m || rows.iter().any(|r| r.len() != n) {
            return Err(SeedError::Shape { expected: n + m, cols: n });
        }
        for i in 0..n {
            for j in 0..n {
                if rows[i][j] != -rows[j][i] {
                    return Err(if is_skew_symmetrizable(&rows, n) {
                        SeedError::SkewSymmetrizable
                    } else {
                        SeedError::NotSkewSymmetric(i, j)
                    });
                }
            }
        }
        Ok(ExchangeMatrix { n, m, rows })
    }

    /// Square skew-symmetric matrix without frozen rows.
    pub fn square(rows: Vec<Vec<i64>>) -> Result<Self, SeedError> {
        let n = rows.len();
        Self::new(n, 0, rows)
    }

    pub fn n_mutable(&self) -> usize {
        self.n
    }

    pub fn n_frozen(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn mutate(&self, k: usize) -> Result<Self, SeedError> {
        if k >= self.n {
            return Err(SeedError::Direction(k));
        }
        let mut rows = self.rows.clone();
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, b) in row.iter_mut().enumerate() {
                if i == k || j == k {
                    *b = -self.rows[i][j];
                } else {
                    let bik = self.rows[i][k];
                    let bkj = self.rows[k][j];
                    *b = self.rows[i][j] + bik.signum() * (bik * bkj).max(0);
                }
            }
        }
        Ok(ExchangeMatrix { n: self.n, m: self.m, rows })
    }

    /// Same x-pattern, every entry negated.
    pub fn negated(&self) -> Self {
        let rows = self.rows.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        ExchangeMatrix { n: self.n, m: self.m, rows }
    }

    /// Frozen block read as tropical coefficients: `y[j][i]` is the exponent
    /// of `u_i` in `y_j`.
    pub fn y_exponents(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|j| (0..self.m).map(|i| self.rows[self.n + i][j]).collect())
            .collect()
    }

    pub fn to_file(&self) -> SeedFile {
        SeedFile { n: self.n, m: self.m, matrix: self.rows.clone() }
    }
}

fn is_skew_symmetrizable(rows: &[Vec<i64>], n: usize) -> bool {
    // sign-skew-symmetric, and d_i b_ij = -d_j b_ji solvable over positive rationals
    let mut d: Vec<Option<(i64, i64)>> = vec![None; n];
    for s in 0..n {
        if d[s].is_some() {
            continue;
        }
        d[s] = Some((1, 1));
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            let (ni, di) = d[i].unwrap();
            for j in 0..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a == 0) != (b == 0) || (a != 0 && a.signum() == b.signum()) {
                    return false;
                }
                if a == 0 || i == j {
                    continue;
                }
                // d_j = d_i * a / (-b)
                let (nj, dj) = (ni * a.abs(), di * b.abs());
                match d[j] {
                    None => {
                        d[j] = Some((nj, dj));
                        stack.push(j);
                    }
                    Some((x, y)) => {
                        if x * dj != nj * y {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Tropical coefficient mutation read directly off the y-tuple: the
/// coefficient semifield is `Trop(u_1..u_m)` with `⊕ = min` of exponents.
pub fn mutate_y(y: &[Vec<i64>], b: &ExchangeMatrix, k: usize) -> Vec<Vec<i64>> {
    let yk = &y[k];
    let one_plus_yk: Vec<i64> = yk.iter().map(|&e| e.min(0)).collect();
    y.iter()
        .enumerate()
        .map(|(j, yj)| {
            if j == k {
                return yk.iter().map(|e| -e).collect();
            }
            let bkj = b.get(k, j);
            yj.iter()
                .zip(yk)
                .zip(&one_plus_yk)
                .map(|((&e, &ek), &s)| e + ek * bkj.max(0) - bkj * s)
                .collect()
        })
        .collect()
}

/// Arrow counts of the mutable block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    pub vertices: usize,
    pub arrows: BTreeMap<(usize, usize), u64>,
}

pub fn quiver_of(b: &ExchangeMatrix) -> Quiver {
    let mut arrows = BTreeMap::new();
    for i in 0..b.n {
        for j in 0..b.n {
            if b.rows[i][j] > 0 {
                arrows.insert((i, j), b.rows[i][j] as u64);
            }
        }
    }
    Quiver { vertices: b.n, arrows }
}

pub fn matrix_of(q: &Quiver) -> Result<ExchangeMatrix, SeedError> {
    let n = q.vertices;
    let mut rows = vec![vec![0i64; n]; n];
    for (&(i, j), &c) in &q.arrows {
        if i >= n || j >= n {
            return Err(SeedError::Direction(i.max(j)));
        }
        if c == 0 {
            continue;
        }
        if i == j || q.arrows.get(&(j, i)).copied().unwrap_or(0) > 0 {
            return Err(SeedError::TwoCycle(i, j));
        }
        rows[i][j] = c as i64;
        rows[j][i] = -(c as i64);
    }
    ExchangeMatrix::square(rows)
}

/// A path in the exchange tree; adjacent repeats cancel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MutationWord {
    dirs: Vec<usize>,
}

impl MutationWord {
    /// From 0-based directions, normalized.
    pub fn new(dirs: impl IntoIterator<Item = usize>) -> Self {
        let mut out: Vec<usize> = Vec::new();
        for d in dirs {
            if out.last() == Some(&d) {
                out.pop();
            } else {
                out.push(d);
            }
        }
        MutationWord { dirs: out }
    }

    /// From 1-based directions; 0 is rejected.
    pub fn from_one_based(dirs: &[usize]) -> Result<Self, SeedError> {
        if dirs.contains(&0) {
            return Err(SeedError::Direction(0));
        }
        Ok(Self::new(dirs.iter().map(|d| d - 1)))
    }

    pub fn dirs(&self) -> &[usize] {
        &self.dirs
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.dirs.iter().map(|d| d + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    matrix: ExchangeMatrix,
    cluster: Vec<LaurentPoly>,
    vars: Arc<VarTable>,
}

impl Seed {
    /// Root seed: cluster is `x1..xn` over the table `x1..xn, u1..um`.
    pub fn initial(matrix: ExchangeMatrix) -> Self {
        let vars = VarTable::cluster(matrix.n, matrix.m);
        Self::initial_with(matrix, vars).expect("table sized from matrix")
    }

    pub fn initial_with(matrix: ExchangeMatrix, vars: Arc<VarTable>) -> Result<Self, SeedError> {
        if vars.len() != matrix.n + matrix.m {
            return Err(SeedError::Shape { expected: vars.len(), cols: matrix.n });
        }
        let cluster = (0..matrix.n).map(|i| LaurentPoly::var(&vars, i)).collect();
        Ok(Seed { matrix, cluster, vars })
    }

    pub fn matrix(&self) -> &ExchangeMatrix {
        &self.matrix
    }

    pub fn cluster(&self) -> &[LaurentPoly] {
        &self.cluster
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    fn value_of_row(&self, i: usize) -> LaurentPoly {
        if i < self.matrix.n {
            self.cluster[i].clone()
        } else {
            LaurentPoly::var(&self.vars, i)
        }
    }

    /// The two monomials of the exchange relation in direction `k`, over
    /// mutable and frozen rows.
    pub fn exchange_binomial(&self, k: usize) -> Result<LaurentPoly, SeedError> {
        if k >= self.matrix.n {
            return Err(SeedError::Direction(k));
        }
        let mut plus = LaurentPoly::one(&self.vars);
        let mut minus = LaurentPoly::one(&self.vars);
        for i in 0..self.matrix.n + self.matrix.m {
            let b = self.matrix.rows[i][k];
            if b > 0 {
                plus = &plus * &self.value_of_row(i).pow(b as u32);
            } else if b < 0 {
                minus = &minus * &self.value_of_row(i).pow((-b) as u32);
            }
        }
        Ok(&plus + &minus)
    }

    /// `log2` of an upper bound on the number of terms in the exchange
    /// numerator for direction `k`: each monomial's exponents fit in the box
    /// spanned by its factors. Cheap; nothing is expanded.
    pub fn exchange_log2_bound(&self, k: usize) -> Result<f64, SeedError> {
        if k >= self.matrix.n {
            return Err(SeedError::Direction(k));
        }
        let nv = self.vars.len();
        let mut vol = 0f64;
        for sign in [1i64, -1] {
            let mut span = vec![0f64; nv];
            for (i, x) in self.cluster.iter().enumerate() {
                let e = sign * self.matrix.rows[i][k];
                if e <= 0 {
                    continue;
                }
                let (lo, hi) = (x.min_exponents().unwrap_or_default(), x.max_exponents().unwrap_or_default());
                for (v, s) in span.iter_mut().enumerate() {
                    *s += e as f64 * (hi[v] - lo[v]) as f64;
                }
            }
            vol += span.iter().map(|s| s + 1.0).product::<f64>();
        }
        Ok(vol.log2())
    }

    pub fn mutate(&self, k: usize) -> Result<Seed, SeedError> {
        let num = self.exchange_binomial(k)?;
        let new = num.div_exact(&self.cluster[k])?;
        let mut cluster = self.cluster.clone();
        cluster[k] = new;
        Ok(Seed { matrix: self.matrix.mutate(k)?, cluster, vars: self.vars.clone() })
    }

    pub fn mutate_word(&self, w: &MutationWord) -> Result<Seed, SeedError> {
        let mut s = self.clone();
        for &k in w.dirs() {
            s = s.mutate(k)?;
        }
        Ok(s)
    }
}

/// Cluster at the end of `w`, expressed in the initial variables. Every step
/// goes through exact division, so success certifies the Laurent property.
pub fn oracle_expand(b0: &ExchangeMatrix, w: &MutationWord) -> Result<Vec<LaurentPoly>, SeedError> {
    Ok(Seed::initial(b0.clone()).mutate_word(w)?.cluster)
}

/// Seed file layout: `{"n": .., "m": .., "matrix": [[..], ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedFile {
    pub n: usize,
    pub m: usize,
    pub matrix: Vec<Vec<i64>>,
}

impl SeedFile {
    pub fn into_matrix(self) -> Result<ExchangeMatrix, SeedError> {
        ExchangeMatrix::new(self.n, self.m, self.matrix)
    }
}

/// Word file layout: `{"word": [..]}`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordFile {
    pub word: Vec<usize>,
}

impl WordFile {
    pub fn into_word(self, n: usize) -> Result<MutationWord, SeedError> {
        if let Some(&d) = self.word.iter().find(|&&d| d == 0 || d > n) {
            return Err(SeedError::Direction(d));
        }
        MutationWord::from_one_based(&self.word)
    }
}

/// Coefficient statistics for a cluster, used by reports.
pub fn min_coefficient(cluster: &[LaurentPoly]) -> Option<BigInt> {
    cluster.iter().filter_map(|p| p.min_coeff()).min()
}

/// Uniform skew-symmetric `n x n` block with entries in `[-bound, bound]`
/// above the diagonal, plus `m` frozen rows with entries in the same range.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, bound: i64) -> ExchangeMatrix {
    let mut rows = vec![vec![0i64; n]; n + m];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(-bound..=bound);
            rows[i][j] = v;
            rows[j][i] = -v;
        }
    }
    for row in rows.iter_mut().skip(n) {
        for x in row.iter_mut() {
            *x = rng.random_range(-bound..=bound);
        }
    }
    ExchangeMatrix::new(n, m, rows).expect("skew-symmetric by construction")
}

/// A reduced word of exactly `len` letters over `n` directions.
pub fn random_word<R: Rng + ?Sized>(rng: &mut R, n: usize, len: usize) -> MutationWord {
    if n < 2 {
        return MutationWord::new((0..len.min(n)).map(|_| 0));
    }
    let mut dirs = Vec::with_capacity(len);
    for _ in 0..len {
        let mut d = rng.random_range(0..n - 1);
        if let Some(&last) = dirs.last() {
            if d >= last {
                d += 1;
            }
        } else {
            d = rng.random_range(0..n);
        }
        dirs.push(d);
    }
    MutationWord::new(dirs)
}
