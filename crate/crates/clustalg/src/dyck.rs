//! Maximal Dyck paths, wraparound subpaths and r-compatible pairs.
//!
//! Edges are 1-based as in the usual pictures: `u_1..u_{a1}` left to right,
//! `v_1..v_{a2}` bottom to top. Subsets of edges are bitmasks (bit `i-1`
//! for edge `i`), which caps either side at 64 edges.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::chebyshev::binomial_nonneg;
use crate::par::Exec;

pub const DEFAULT_ENUM_CAP: usize = 24;
const AUTO_ENUM_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DyckError {
    #[error("point ({0}, {1}) is not on the path")]
    NotOnPath(i64, i64),
    #[error("a1 + a2 = {0} exceeds the enumeration cap {1}")]
    CapExceeded(usize, usize),
    #[error("edge index {0} out of range")]
    EdgeIndex(usize),
    #[error("r must be positive")]
    NonPositiveR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Step {
    H(usize),
    V(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyckPath {
    a1: usize,
    a2: usize,
    steps: Vec<Step>,
    points: Vec<(i64, i64)>,
}

/// The maximal Dyck path of type `a1 x a2`; negative sides count as 0.
pub fn max_dyck(a1: i64, a2: i64) -> DyckPath {
    let (a1, a2) = (a1.max(0) as usize, a2.max(0) as usize);
    let mut steps = Vec::with_capacity(a1 + a2);
    let mut h = 0usize;
    if a1 == 0 {
        steps.extend((1..=a2).map(Step::V));
    } else {
        for i in 1..=a1 {
            steps.push(Step::H(i));
            let target = i * a2 / a1;
            while h < target {
                h += 1;
                steps.push(Step::V(h));
            }
        }
    }
    DyckPath::from_steps(a1, a2, steps)
}

impl DyckPath {
    fn from_steps(a1: usize, a2: usize, steps: Vec<Step>) -> Self {
        let mut points = vec![(0i64, 0i64)];
        let (mut x, mut y) = (0i64, 0i64);
        for s in &steps {
            match s {
                Step::H(_) => x += 1,
                Step::V(_) => y += 1,
            }
            points.push((x, y));
        }
        DyckPath { a1, a2, steps, points }
    }

    pub fn a1(&self) -> usize {
        self.a1
    }

    pub fn a2(&self) -> usize {
        self.a2
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// All lattice points, `(0,0)` through `(a1,a2)`.
    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    /// Endpoints and turning points.
    pub fn corners(&self) -> Vec<(i64, i64)> {
        let n = self.steps.len();
        let mut out = vec![self.points[0]];
        for j in 1..n {
            let turn = matches!(
                (self.steps[j - 1], self.steps[j]),
                (Step::H(_), Step::V(_)) | (Step::V(_), Step::H(_))
            );
            if turn {
                out.push(self.points[j]);
            }
        }
        if n > 0 {
            out.push(self.points[n]);
        }
        out
    }

    /// Position of a point, with `(a1,a2)` identified with `(0,0)`.
    pub fn position(&self, p: (i64, i64)) -> Result<usize, DyckError> {
        let n = self.steps.len();
        self.points[..n.max(1)]
            .iter()
            .position(|&q| q == p)
            .or_else(|| (p == self.points[n]).then_some(0))
            .ok_or(DyckError::NotOnPath(p.0, p.1))
    }

    /// Index into `steps` of `u_i`.
    fn h_pos(&self, i: usize) -> usize {
        self.steps.iter().position(|&s| s == Step::H(i)).expect("edge index")
    }

    fn v_pos(&self, i: usize) -> usize {
        self.steps.iter().position(|&s| s == Step::V(i)).expect("edge index")
    }

    /// The subpath from `a` to `b`, going Northeast and wrapping at the end.
    pub fn subpath(&self, a: (i64, i64), b: (i64, i64)) -> Result<Subpath, DyckError> {
        let n = self.steps.len();
        let pa = self.position(a)?;
        let pb = self.position(b)?;
        if n == 0 {
            return Ok(Subpath::default());
        }
        let mut len = (pb + n - pa) % n;
        if len == 0 {
            len = n;
        }
        let mut sp = Subpath::default();
        for t in 0..len {
            match self.steps[(pa + t) % n] {
                Step::H(i) => sp.h.insert(i),
                Step::V(i) => sp.v.insert(i),
            };
            if t > 0 {
                sp.interior.push(self.points[(pa + t) % n]);
            }
        }
        Ok(sp)
    }

    /// The subpath by the two-case set formula instead of walking the path.
    pub fn subpath_by_formula(&self, a: (i64, i64), b: (i64, i64)) -> Subpath {
        let ((i, j), (i2, j2)) = (a, b);
        let ne = a != b && i <= i2 && j <= j2;
        let mut sp = Subpath::default();
        for k in 1..=self.a1 as i64 {
            let inside = if ne { i < k && k <= i2 } else { !(i2 < k && k <= i) };
            if inside {
                sp.h.insert(k as usize);
            }
        }
        for l in 1..=self.a2 as i64 {
            let inside = if ne { j < l && l <= j2 } else { !(j2 < l && l <= j) };
            if inside {
                sp.v.insert(l as usize);
            }
        }
        sp
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Subpath {
    pub h: BTreeSet<usize>,
    pub v: BTreeSet<usize>,
    pub interior: Vec<(i64, i64)>,
}

/// A step sequence stays weakly below the diagonal from `(0,0)` to `(a1,a2)`.
pub fn is_dyck(a1: usize, a2: usize, steps: &[Step]) -> bool {
    let (mut x, mut y) = (0i64, 0i64);
    for s in steps {
        match s {
            Step::H(_) => x += 1,
            Step::V(_) => y += 1,
        }
        if y * a1 as i64 > x * a2 as i64 {
            return false;
        }
    }
    x == a1 as i64 && y == a2 as i64
}

/// Every lattice point strictly above the path is strictly above the diagonal.
pub fn is_maximal(a1: usize, a2: usize, steps: &[Step]) -> bool {
    if !is_dyck(a1, a2, steps) {
        return false;
    }
    let mut top = vec![0i64; a1 + 1];
    let (mut x, mut y) = (0usize, 0i64);
    for s in steps {
        match s {
            Step::H(_) => x += 1,
            Step::V(_) => y += 1,
        }
        top[x] = top[x].max(y);
    }
    (0..=a1).all(|x| {
        (top[x] + 1..=a2 as i64).all(|y| y * a1 as i64 > x as i64 * a2 as i64)
    })
}

/// Precomputed edge layout for repeated compatibility checks on one path.
#[derive(Debug, Clone)]
pub struct CompatChecker {
    path: DyckPath,
    r: usize,
    h_at: Vec<usize>,
    v_at: Vec<usize>,
    is_h: Vec<bool>,
    /// Edge label (1-based) at each doubled position.
    label: Vec<usize>,
}

impl CompatChecker {
    pub fn new(a1: i64, a2: i64, r: i64) -> Result<Self, DyckError> {
        if r <= 0 {
            return Err(DyckError::NonPositiveR);
        }
        let path = max_dyck(a1, a2);
        let h_at = (1..=path.a1).map(|i| path.h_pos(i)).collect();
        let v_at = (1..=path.a2).map(|i| path.v_pos(i)).collect();
        let n = path.len();
        let mut is_h = Vec::with_capacity(2 * n);
        let mut label = Vec::with_capacity(2 * n);
        for k in 0..2 * n {
            match path.steps[k % n.max(1)] {
                Step::H(i) => {
                    is_h.push(true);
                    label.push(i);
                }
                Step::V(i) => {
                    is_h.push(false);
                    label.push(i);
                }
            }
        }
        Ok(CompatChecker { path, r: r as usize, h_at, v_at, is_h, label })
    }

    pub fn path(&self) -> &DyckPath {
        &self.path
    }

    /// The literal definition: for each `u ∈ S1`, `v ∈ S2`, some interior
    /// point `A` of `EF` balances `AF` against `S2` or `EA` against `S1`.
    pub fn is_compatible(&self, s1: u64, s2: u64) -> bool {
        if s1 == 0 || s2 == 0 {
            return true;
        }
        let n = self.path.len();
        // prefix counts over the doubled path
        let mut ph = vec![0usize; 2 * n + 1];
        let mut pv = vec![0usize; 2 * n + 1];
        let mut ph_s = vec![0usize; 2 * n + 1];
        let mut pv_s = vec![0usize; 2 * n + 1];
        for k in 0..2 * n {
            let bit = 1u64 << (self.label[k] - 1);
            let h = self.is_h[k];
            ph[k + 1] = ph[k] + h as usize;
            pv[k + 1] = pv[k] + !h as usize;
            ph_s[k + 1] = ph_s[k] + (h && s1 & bit != 0) as usize;
            pv_s[k + 1] = pv_s[k] + (!h && s2 & bit != 0) as usize;
        }
        let r = self.r;
        for u in bits(s1) {
            let a = self.h_at[u - 1];
            for v in bits(s2) {
                let f = (self.v_at[v - 1] + 1) % n;
                let mut len = (f + n - a) % n;
                if len == 0 {
                    len = n;
                }
                let end = a + len;
                let ok = (1..len).any(|t| {
                    let m = a + t;
                    ph[end] - ph[m] == r * (pv_s[end] - pv_s[m])
                        || pv[m] - pv[a] == r * (ph_s[m] - ph_s[a])
                });
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask & (1u64 << i) != 0).map(|i| i + 1)
}

/// Bitmask of a 1-based edge list.
pub fn mask_of(edges: &[usize], count: usize) -> Result<u64, DyckError> {
    let mut m = 0u64;
    for &e in edges {
        if e == 0 || e > count || e > 64 {
            return Err(DyckError::EdgeIndex(e));
        }
        m |= 1u64 << (e - 1);
    }
    Ok(m)
}

pub fn edges_of(mask: u64) -> Vec<usize> {
    bits(mask).collect()
}

/// Compatibility with edges given as 1-based index lists.
pub fn is_compatible(a1: i64, a2: i64, s1: &[usize], s2: &[usize], r: i64) -> Result<bool, DyckError> {
    let ch = CompatChecker::new(a1, a2, r)?;
    let m1 = mask_of(s1, ch.path.a1)?;
    let m2 = mask_of(s2, ch.path.a2)?;
    Ok(ch.is_compatible(m1, m2))
}

/// Every compatible pair, ordered by `S1` mask then `S2` mask.
pub fn enumerate_compatible_pairs(
    a1: i64,
    a2: i64,
    r: i64,
    cap: usize,
    exec: Exec,
) -> Result<Vec<(u64, u64)>, DyckError> {
    let ch = CompatChecker::new(a1, a2, r)?;
    let (n1, n2) = (ch.path.a1, ch.path.a2);
    if n1 + n2 > cap {
        return Err(DyckError::CapExceeded(n1 + n2, cap));
    }
    let per_s1 = exec.map_range(1u64 << n1, |m1| {
        (0..1u64 << n2).filter(|&m2| ch.is_compatible(m1, m2)).map(|m2| (m1, m2)).collect::<Vec<_>>()
    });
    Ok(per_s1.into_iter().flatten().collect())
}

/// Number of compatible pairs with `|S1| = k1`, `|S2| = k2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCounts {
    a1: usize,
    a2: usize,
    table: Vec<BigInt>,
}

impl PairCounts {
    fn zeros(a1: usize, a2: usize) -> Self {
        PairCounts { a1, a2, table: vec![BigInt::zero(); (a1 + 1) * (a2 + 1)] }
    }

    pub fn a1(&self) -> usize {
        self.a1
    }

    pub fn a2(&self) -> usize {
        self.a2
    }

    pub fn get(&self, k1: usize, k2: usize) -> &BigInt {
        &self.table[k1 * (self.a2 + 1) + k2]
    }

    fn get_mut(&mut self, k1: usize, k2: usize) -> &mut BigInt {
        &mut self.table[k1 * (self.a2 + 1) + k2]
    }

    /// Nonzero entries as `(k1, k2, count)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        (0..=self.a1).flat_map(move |k1| (0..=self.a2).map(move |k2| (k1, k2)))
            .map(move |(k1, k2)| (k1, k2, self.get(k1, k2)))
            .filter(|(_, _, c)| !c.is_zero())
    }

    pub fn total(&self) -> BigInt {
        self.table.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CountEngine {
    /// Enumerate when `a1 + a2` is small, recurse otherwise.
    #[default]
    Auto,
    Enumerate,
    Recursive,
}

/// Counts by exhaustive enumeration.
pub fn pair_counts_enumerated(a1: i64, a2: i64, r: i64, exec: Exec) -> Result<PairCounts, DyckError> {
    let pairs = enumerate_compatible_pairs(a1, a2, r, DEFAULT_ENUM_CAP, exec)?;
    let mut pc = PairCounts::zeros(a1.max(0) as usize, a2.max(0) as usize);
    for (m1, m2) in pairs {
        *pc.get_mut(m1.count_ones() as usize, m2.count_ones() as usize) += 1;
    }
    Ok(pc)
}

/// Counts by the greedy-element recursion for rank-2 coefficients:
/// `c(0,0) = 1` and `c(p,q)` is the larger of the two alternating sums
/// `Σ_k (-1)^{k-1} c(p-k,q) C(a2-rq+k-1, k)` and
/// `Σ_k (-1)^{k-1} c(p,q-k) C(a1-rp+k-1, k)`, with `p = |S2|`, `q = |S1|`.
pub fn pair_counts_recursive(a1: i64, a2: i64, r: i64) -> PairCounts {
    let (n1, n2) = (a1.max(0) as usize, a2.max(0) as usize);
    let (a1, a2) = (n1 as i64, n2 as i64);
    // binomials C(m, k) for the arguments that occur: m < a + k with a <= max(a1, a2)
    let top = n1.max(n2) * 2 + 2;
    let mut pascal = vec![vec![BigInt::zero(); top + 1]; top + 1];
    for m in 0..=top {
        pascal[m][0] = BigInt::one();
        for k in 1..=m {
            pascal[m][k] = &pascal[m - 1][k - 1] + &pascal[m - 1][k];
        }
    }
    let binom = |m: i64, k: usize| -> BigInt {
        if m < 0 || k as i64 > m {
            BigInt::zero()
        } else if (m as usize) <= top {
            pascal[m as usize][k].clone()
        } else {
            binomial_nonneg(m, k as i64)
        }
    };
    // c[p][q]
    let mut c = vec![vec![BigInt::zero(); n1 + 1]; n2 + 1];
    c[0][0] = BigInt::one();
    for p in 0..=n2 {
        for q in 0..=n1 {
            if p == 0 && q == 0 {
                continue;
            }
            let mut s1 = BigInt::zero();
            for k in 1..=p {
                let term = &c[p - k][q] * binom(a2 - r * q as i64 + k as i64 - 1, k);
                if k % 2 == 1 { s1 += term } else { s1 -= term }
            }
            let mut s2 = BigInt::zero();
            for k in 1..=q {
                let term = &c[p][q - k] * binom(a1 - r * p as i64 + k as i64 - 1, k);
                if k % 2 == 1 { s2 += term } else { s2 -= term }
            }
            c[p][q] = s1.max(s2);
        }
    }
    let mut pc = PairCounts::zeros(n1, n2);
    for (p, row) in c.into_iter().enumerate() {
        for (q, v) in row.into_iter().enumerate() {
            *pc.get_mut(q, p) = v;
        }
    }
    pc
}

type CountKey = (i64, i64, i64, bool);

fn count_memo() -> &'static Mutex<HashMap<CountKey, Arc<PairCounts>>> {
    static MEMO: OnceLock<Mutex<HashMap<CountKey, Arc<PairCounts>>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Pair counts by the chosen engine, memoized per process.
pub fn pair_counts(a1: i64, a2: i64, r: i64, engine: CountEngine, exec: Exec) -> Result<Arc<PairCounts>, DyckError> {
    if r <= 0 {
        return Err(DyckError::NonPositiveR);
    }
    let (a1, a2) = (a1.max(0), a2.max(0));
    let enumerate = match engine {
        CountEngine::Enumerate => true,
        CountEngine::Recursive => false,
        CountEngine::Auto => (a1 + a2) as usize <= AUTO_ENUM_LIMIT,
    };
    let key = (a1, a2, r, enumerate);
    if let Some(pc) = count_memo().lock().expect("memo lock").get(&key) {
        return Ok(pc.clone());
    }
    let pc = Arc::new(if enumerate {
        pair_counts_enumerated(a1, a2, r, exec)?
    } else {
        pair_counts_recursive(a1, a2, r)
    });
    count_memo().lock().expect("memo lock").insert(key, pc.clone());
    Ok(pc)
}
