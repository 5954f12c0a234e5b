//! Brute-force enumeration of the integral points of a hyperplane system
//! inside the box `[−r, r]ⁿ`.
//!
//! The solution lattice `p + Σ c_j v_j` is first brought into column echelon
//! form, so that basis vector `j` vanishes on every coordinate before its
//! pivot row. Fixing `c_0, …, c_{j−1}` then pins down every coordinate above
//! pivot `j`, and the box constraint on the pivot coordinate gives an exact
//! integer range for `c_j`. Enumeration visits the coefficients in
//! lexicographic order.

use std::thread;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, DensityValue};
use crate::density::{self, HyperplaneSystem};
use crate::error::{Error, Result};
use crate::intlinalg;

/// Environment variable overriding the number of counting threads.
pub const THREADS_ENV: &str = "LATTICE_DENSITY_THREADS";

/// The affine lattice `base + span_ℤ(basis)` in echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    base: Vec<i64>,
    basis: Vec<Vec<i64>>,
    pivots: Vec<usize>,
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::Overflow(format!("{x} does not fit in 64 bits")))
}

/// Column echelon form of a full-rank set of integer vectors.
fn echelon(mut cols: Vec<Vec<BigInt>>) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let d = cols.len();
    let n = cols.first().map_or(0, Vec::len);
    let mut pivots = Vec::with_capacity(d);
    let mut t = 0;
    for i in 0..n {
        if t == d {
            break;
        }
        loop {
            let nonzero: Vec<usize> = (t..d).filter(|&j| !cols[j][i].is_zero()).collect();
            let Some(&jmin) = nonzero.iter().min_by_key(|&&j| cols[j][i].abs()) else {
                break;
            };
            if nonzero.len() == 1 {
                cols.swap(t, jmin);
                if cols[t][i].is_negative() {
                    for x in cols[t].iter_mut() {
                        *x = -&*x;
                    }
                }
                pivots.push(i);
                t += 1;
                break;
            }
            let pivot_col = cols[jmin].clone();
            for &j in &nonzero {
                if j == jmin {
                    continue;
                }
                let q = &cols[j][i] / &pivot_col[i];
                for (x, p) in cols[j].iter_mut().zip(&pivot_col) {
                    *x -= &q * p;
                }
            }
        }
    }
    assert_eq!(t, d, "null-space basis is not linearly independent");
    (cols, pivots)
}

impl Lattice {
    pub fn of_system(sys: &HyperplaneSystem) -> Result<Self> {
        let null = intlinalg::nullspace_basis(sys.matrix());
        let (cols, pivots) = echelon(null.vectors().to_vec());
        let base = sys.base_point().iter().map(to_i64).collect::<Result<Vec<_>>>()?;
        let basis = cols
            .iter()
            .map(|v| v.iter().map(to_i64).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Lattice {
            base,
            basis,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    /// Range of the outermost coefficient `c_0` for box half-width `r`.
    pub fn outer_range(&self, r: u64) -> Option<(i64, i64)> {
        let it = PointIter::new(self, r, None);
        if self.dim() == 0 || !it.head_ok() {
            return None;
        }
        it.level_range(0)
    }

    pub fn points(&self, r: u64) -> PointIter<'_> {
        PointIter::new(self, r, None)
    }

    /// Points whose outer coefficient lies in `chunk`, in the same order.
    pub fn points_in_chunk(&self, r: u64, chunk: (i64, i64)) -> PointIter<'_> {
        PointIter::new(self, r, Some(chunk))
    }

    /// Rows fixed by `c_0, …, c_j` but not by `c_0, …, c_{j−1}`.
    fn block(&self, j: usize) -> std::ops::Range<usize> {
        let end = self.pivots.get(j + 1).copied().unwrap_or(self.ambient_dim());
        self.pivots[j]..end
    }
}

/// Streaming enumeration of `Δ₁(r)`.
///
/// [`PointIter::next_point`] lends the current point without allocating;
/// the `Iterator` impl clones it. [`PointIter::next_line`] instead yields
/// whole runs of the innermost coefficient.
pub struct PointIter<'a> {
    lattice: &'a Lattice,
    r: i128,
    chunk: Option<(i64, i64)>,
    c: Vec<i64>,
    hi: Vec<i64>,
    x: Vec<i128>,
    out: Vec<i64>,
    level: usize,
    state: IterState,
}

/// The points `start + t·dir` for `0 ≤ t < len`, all inside the box.
#[derive(Clone, Copy, Debug)]
pub struct Line<'b> {
    pub start: &'b [i64],
    pub dir: &'b [i64],
    pub len: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum IterState {
    Fresh,
    Running,
    Done,
}

impl<'a> PointIter<'a> {
    fn new(lattice: &'a Lattice, r: u64, chunk: Option<(i64, i64)>) -> Self {
        let d = lattice.dim();
        PointIter {
            lattice,
            r: r as i128,
            chunk,
            c: vec![0; d],
            hi: vec![0; d],
            x: lattice.base.iter().map(|&v| v as i128).collect(),
            out: vec![0; lattice.ambient_dim()],
            level: 0,
            state: IterState::Fresh,
        }
    }

    /// Coordinates that no coefficient can move.
    fn head_ok(&self) -> bool {
        let head = self.lattice.pivots.first().copied().unwrap_or(self.lattice.ambient_dim());
        self.x[..head].iter().all(|v| v.abs() <= self.r)
    }

    /// Exact range of `c_j` keeping its block of rows inside the box, given
    /// the current `c_0, …, c_{j−1}` and `c_j = 0` in `x`.
    fn level_range(&self, j: usize) -> Option<(i64, i64)> {
        let r = self.r;
        let (mut lo, mut hi) = (i128::MIN, i128::MAX);
        for i in self.lattice.block(j) {
            let v = self.lattice.basis[j][i] as i128;
            let x = self.x[i];
            if v == 0 {
                if x.abs() > r {
                    return None;
                }
                continue;
            }
            let (a, b) = if v > 0 { (-r - x, r - x) } else { (r - x, -r - x) };
            lo = lo.max(Integer::div_ceil(&a, &v));
            hi = hi.min(Integer::div_floor(&b, &v));
        }
        if j == 0 {
            if let Some((clo, chi)) = self.chunk {
                lo = lo.max(clo as i128);
                hi = hi.min(chi as i128);
            }
        }
        // the pivot row has a nonzero entry, so both ends are finite
        (lo <= hi).then_some((lo as i64, hi as i64))
    }

    fn add_column(&mut self, j: usize, times: i64) {
        let t = times as i128;
        for (x, v) in self.x.iter_mut().zip(&self.lattice.basis[j]) {
            *x += t * *v as i128;
        }
    }

    fn emit(&mut self) -> &[i64] {
        for (o, x) in self.out.iter_mut().zip(&self.x) {
            *o = *x as i64;
        }
        &self.out
    }

    /// Moves to the next admissible choice of `c_0, …, c_{depth−1}`.
    fn advance(&mut self, depth: usize) -> bool {
        let mut descend = match self.state {
            IterState::Done => return false,
            IterState::Fresh => {
                self.state = IterState::Running;
                if !self.head_ok() {
                    self.state = IterState::Done;
                    return false;
                }
                true
            }
            IterState::Running => false,
        };
        loop {
            if descend {
                if self.level == depth {
                    return true;
                }
                let j = self.level;
                match self.level_range(j) {
                    Some((lo, hi)) => {
                        self.c[j] = lo;
                        self.hi[j] = hi;
                        self.add_column(j, lo);
                        self.level = j + 1;
                    }
                    None => descend = false,
                }
            } else {
                if self.level == 0 {
                    self.state = IterState::Done;
                    return false;
                }
                let j = self.level - 1;
                if self.c[j] < self.hi[j] {
                    self.c[j] += 1;
                    self.add_column(j, 1);
                    descend = true;
                } else {
                    self.add_column(j, -self.c[j]);
                    self.c[j] = 0;
                    self.level = j;
                }
            }
        }
    }

    pub fn next_point(&mut self) -> Option<&[i64]> {
        let d = self.lattice.dim();
        if !self.advance(d) {
            return None;
        }
        if d == 0 && self.chunk.is_some_and(|(lo, hi)| lo > 0 || hi < 0) {
            self.state = IterState::Done;
            return None;
        }
        Some(self.emit())
    }

    /// Next maximal run of points along the last basis vector. Lattices of
    /// dimension 0 have no lines.
    pub fn next_line(&mut self) -> Option<Line<'_>> {
        let d = self.lattice.dim();
        if d == 0 {
            return None;
        }
        loop {
            if !self.advance(d - 1) {
                return None;
            }
            if let Some((lo, hi)) = self.level_range(d - 1) {
                let lo128 = lo as i128;
                for ((o, x), v) in self.out.iter_mut().zip(&self.x).zip(&self.lattice.basis[d - 1]) {
                    *o = (*x + lo128 * *v as i128) as i64;
                }
                return Some(Line {
                    start: &self.out,
                    dir: &self.lattice.basis[d - 1],
                    len: (hi as i128 - lo128 + 1) as u64,
                });
            }
        }
    }
}

impl Iterator for PointIter<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        self.next_point().map(<[i64]>::to_vec)
    }
}

/// All integral points of `sys` in `[−r, r]ⁿ`.
pub fn enumerate_points(sys: &HyperplaneSystem, r: u64) -> Result<Vec<Vec<i64>>> {
    Ok(Lattice::of_system(sys)?.points(r).collect())
}

/// Counts of integral points and of points passing a k-free sieve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCount {
    pub r: u64,
    pub total: u64,
    pub hits: u64,
    #[serde(with = "crate::serde_big::ratio")]
    pub ratio: BigRational,
    pub ratio_f64: f64,
    pub k: u32,
    /// Sieve against `gcd(x, b)` instead of `gcd(x)` when present.
    pub b: Option<i64>,
    /// Hits recomputed by the order-k Möbius sieve; only when `b ≠ 0`.
    pub sieve_hits: Option<u64>,
}

/// How hits are counted when no `b` is given.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Inclusion–exclusion along each line wherever the constant
    /// coordinates have a nonzero gcd, per-point gcds elsewhere.
    Lines,
    /// A gcd for every point.
    PerPoint,
}

/// `kfree[g]` for `g ≤ limit`: no prime `q` with `q^k | g`; `kfree[0]` is false.
fn k_free_table(limit: usize, k: u32) -> Vec<bool> {
    let mut table = vec![true; limit + 1];
    table[0] = false;
    for q in arith::primes_up_to(arith::integer_root(limit as u64, k)) {
        let qk = q.pow(k) as usize;
        let mut m = qk;
        while m <= limit {
            table[m] = false;
            m += qk;
        }
    }
    table
}

/// Binary gcd.
fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    Integer::extended_gcd(&a, &m).x.rem_euclid(m)
}

/// `#{0 ≤ t < len : m | start_i + t·dir_i for all i}`, by solving the linear
/// congruences in `t` and merging them.
fn count_congruent(line: &Line<'_>, m: u64) -> u64 {
    let m = m as i128;
    let (mut a, mut modulus) = (0i128, 1i128);
    for (&x, &v) in line.start.iter().zip(line.dir) {
        let x = (x as i128).rem_euclid(m);
        let v = (v as i128).rem_euclid(m);
        if v == 0 {
            if x != 0 {
                return 0;
            }
            continue;
        }
        let rhs = (m - x) % m;
        let g = v.gcd(&m);
        if rhs % g != 0 {
            return 0;
        }
        let m1 = m / g;
        let t1 = (rhs / g) % m1 * mod_inverse(v / g, m1) % m1;
        // t ≡ a (mod modulus) and t ≡ t1 (mod m1)
        let g = modulus.gcd(&m1);
        let diff = t1 - a;
        if diff % g != 0 {
            return 0;
        }
        let step = m1 / g;
        let s = (diff / g).rem_euclid(step) * mod_inverse((modulus / g).rem_euclid(step), step) % step;
        a += modulus * s;
        modulus *= step;
        a = a.rem_euclid(modulus);
    }
    let len = line.len as i128;
    if a >= len {
        0
    } else {
        ((len - 1 - a) / modulus + 1) as u64
    }
}

/// Lines shorter than this are counted point by point.
const MIN_SIEVE_LINE: u64 = 32;
/// At most `2^MAX_SIEVE_PRIMES` inclusion–exclusion terms per line.
const MAX_SIEVE_PRIMES: usize = 10;

struct Counter {
    k: u32,
    b: u64,
    strategy: Strategy,
    table: Vec<bool>,
    /// `(d, μ_k(d))` over divisors of `b` with `μ_k(d) ≠ 0`.
    sieve: Vec<(u64, i8)>,
    /// Trial divisors for the gcd of a line's constant coordinates.
    small_primes: Vec<u64>,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    total: u64,
    hits: u64,
    lambda_signed: i128,
}

impl Counter {
    fn new(k: u32, b: Option<i64>, r: u64, strategy: Strategy) -> Result<Self> {
        let b = b.map_or(0, i64::unsigned_abs);
        let limit = if b == 0 { r } else { r.min(b) };
        let table = k_free_table(limit.min(1 << 26) as usize, k);
        let sieve = if b == 0 {
            Vec::new()
        } else {
            arith::factorize(&BigInt::from(b))?
                .divisors()
                .into_iter()
                .map(|d| Ok((d, arith::mobius_k(k, d)?)))
                .filter(|r: &Result<(u64, i8)>| r.as_ref().map_or(true, |&(_, mu)| mu != 0))
                .collect::<Result<Vec<_>>>()?
        };
        let small_primes = arith::primes_up_to(arith::integer_root(r, 2) + 1);
        Ok(Counter {
            k,
            b,
            strategy,
            table,
            sieve,
            small_primes,
        })
    }

    fn is_k_free(&self, g: u64) -> bool {
        match self.table.get(g as usize) {
            Some(&v) => v,
            None => arith::factorize(&BigInt::from(g))
                .map(|f| f.primes_with_power(self.k).is_empty())
                .unwrap_or(false),
        }
    }

    fn hit(&self, x: &[i64]) -> bool {
        let mut g = self.b;
        for &v in x {
            g = gcd_u64(g, v.unsigned_abs());
            if g == 1 {
                return true;
            }
        }
        self.is_k_free(g)
    }

    fn sieve_term(&self, x: &[i64]) -> i128 {
        let mut acc = 0i128;
        for &(d, mu) in &self.sieve {
            let d = d as i64;
            if x.iter().all(|v| v % d == 0) {
                acc += mu as i128;
            }
        }
        acc
    }

    /// Primes `q` with `q^k | g`, or `None` when `g` has a factor beyond
    /// the trial divisors.
    fn k_power_primes(&self, mut g: u64) -> Option<Vec<u64>> {
        let mut out = Vec::new();
        for &q in &self.small_primes {
            if q * q > g {
                break;
            }
            let mut e = 0;
            while g.is_multiple_of(q) {
                g /= q;
                e += 1;
            }
            if e >= self.k {
                out.push(q);
            }
        }
        if g > 1 {
            let last = *self.small_primes.last().unwrap_or(&1);
            if g > last.saturating_mul(last) {
                return None;
            }
            if self.k == 1 {
                out.push(g);
            }
        }
        Some(out)
    }

    /// Hits on a line by inclusion–exclusion, when it applies.
    fn line_hits(&self, line: &Line<'_>) -> Option<u64> {
        if self.b != 0 || self.strategy == Strategy::PerPoint || line.len < MIN_SIEVE_LINE {
            return None;
        }
        let g0 = line
            .start
            .iter()
            .zip(line.dir)
            .filter(|(_, &v)| v == 0)
            .fold(0u64, |g, (&x, _)| gcd_u64(g, x.unsigned_abs()));
        if g0 == 0 {
            return None;
        }
        let primes = self.k_power_primes(g0)?;
        if primes.len() > MAX_SIEVE_PRIMES {
            return None;
        }
        let mut hits = 0i128;
        for mask in 0u32..(1 << primes.len()) {
            let mut d = 1u64;
            for (i, &q) in primes.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    d *= q.pow(self.k);
                }
            }
            let n = count_congruent(line, d) as i128;
            hits += if mask.count_ones() % 2 == 0 { n } else { -n };
        }
        Some(hits as u64)
    }

    fn run(&self, lattice: &Lattice, r: u64, chunk: Option<(i64, i64)>) -> Result<Tally> {
        let mut t = Tally::default();
        let mut it = PointIter::new(lattice, r, chunk);
        if lattice.dim() == 0 {
            while let Some(x) = it.next_point() {
                t.total += 1;
                t.hits += self.hit(x) as u64;
                t.lambda_signed += self.sieve_term(x);
            }
            return Ok(t);
        }
        let overflow = || Error::Overflow("point count exceeds u64".into());
        let mut x = vec![0i64; lattice.ambient_dim()];
        while let Some(line) = it.next_line() {
            t.total = t.total.checked_add(line.len).ok_or_else(overflow)?;
            for &(d, mu) in &self.sieve {
                t.lambda_signed += mu as i128 * count_congruent(&line, d) as i128;
            }
            if let Some(h) = self.line_hits(&line) {
                t.hits += h;
                continue;
            }
            x.copy_from_slice(line.start);
            for step in 0..line.len {
                if step > 0 {
                    for (xi, &v) in x.iter_mut().zip(line.dir) {
                        *xi += v;
                    }
                }
                t.hits += self.hit(&x) as u64;
            }
        }
        Ok(t)
    }
}

pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Splits `[lo, hi]` into at most `parts` contiguous chunks.
fn split_range((lo, hi): (i64, i64), parts: usize) -> Vec<(i64, i64)> {
    let len = (hi - lo + 1) as u64;
    let parts = (parts as u64).clamp(1, len);
    let step = len.div_ceil(parts) as i64;
    let mut out = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = (start + step - 1).min(hi);
        out.push((start, end));
        start = end + 1;
    }
    out
}

/// Counts `Δ₁(r)` and the k-free points in it, using `chunks` partitions of
/// the outer coefficient range. The totals do not depend on `chunks`.
///
/// With a nonzero `b` every hit is a direct gcd, and the order-k Möbius
/// sieve over the divisors of `b` is evaluated independently and must agree.
pub fn count_sieved_chunked(
    sys: &HyperplaneSystem,
    r: u64,
    k: u32,
    b: Option<i64>,
    chunks: usize,
) -> Result<BoxCount> {
    count_with_strategy(sys, r, k, b, chunks, Strategy::Lines)
}

pub fn count_with_strategy(
    sys: &HyperplaneSystem,
    r: u64,
    k: u32,
    b: Option<i64>,
    chunks: usize,
    strategy: Strategy,
) -> Result<BoxCount> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if r == 0 {
        return Err(Error::domain("box half-width must be positive"));
    }
    let lattice = Lattice::of_system(sys)?;
    let counter = Counter::new(k, b, r, strategy)?;
    let tallies: Vec<Tally> = match lattice.outer_range(r) {
        Some(range) if chunks > 1 => {
            let parts = split_range(range, chunks);
            thread::scope(|s| {
                let handles: Vec<_> = parts
                    .iter()
                    .map(|&chunk| {
                        let (lattice, counter) = (&lattice, &counter);
                        s.spawn(move || counter.run(lattice, r, Some(chunk)))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("counting thread panicked"))
                    .collect::<Result<Vec<_>>>()
            })?
        }
        _ => vec![counter.run(&lattice, r, None)?],
    };
    let mut total = 0u64;
    let mut hits = 0u64;
    let mut lambda = 0i128;
    for t in tallies {
        total = total
            .checked_add(t.total)
            .ok_or_else(|| Error::Overflow("point count exceeds u64".into()))?;
        hits += t.hits;
        lambda += t.lambda_signed;
    }
    let sieve_hits = (!counter.sieve.is_empty()).then_some(lambda as u64);
    if let Some(s) = sieve_hits {
        assert_eq!(s, hits, "Möbius sieve and direct gcd counts disagree");
    }
    let ratio = if total == 0 {
        BigRational::zero()
    } else {
        BigRational::new(hits.into(), total.into())
    };
    Ok(BoxCount {
        r,
        total,
        hits,
        ratio_f64: arith::ratio_to_f64(&ratio),
        ratio,
        k,
        b,
        sieve_hits,
    })
}

/// [`count_sieved_chunked`] with the thread count from the environment.
pub fn count_sieved(sys: &HyperplaneSystem, r: u64, k: u32, b: Option<i64>) -> Result<BoxCount> {
    count_sieved_chunked(sys, r, k, b, thread_count())
}

/// Exact density of points `x` on `sys` with `gcd(x, b)` k-free.
///
/// With `y = V⁻¹x` the gcd becomes `gcd(b', b, y_{m+1}, …)`, so the anchor
/// is replaced by `gcd(b', b)`.
pub fn predicted_density(sys: &HyperplaneSystem, k: u32, b: Option<i64>) -> Result<DensityValue> {
    let result = density::density_of_system(sys, k)?;
    let Some(b) = b.filter(|&b| b != 0) else {
        return Ok(result.density);
    };
    let anchor = result.anchor_gcd.gcd(&BigInt::from(b));
    let (n, m) = (result.ambient, result.codim);
    if m == n {
        let visible = arith::factorize(&anchor)?.primes_with_power(k).is_empty();
        return Ok(DensityValue::SinglePoint { visible });
    }
    arith::euler_product(k, (n - m) as u32, &anchor)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    #[serde(flatten)]
    pub count: BoxCount,
    pub predicted: f64,
    pub deviation: f64,
    /// Deviation more than doubled relative to the previous row.
    pub growth_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
    pub predicted: DensityValue,
    pub final_deviation: f64,
}

impl ConvergenceTrace {
    pub fn flagged(&self) -> bool {
        self.rows.iter().any(|r| r.growth_flag)
    }
}

/// Box counts at each `r` of the schedule, compared with the exact density.
pub fn convergence_trace(
    sys: &HyperplaneSystem,
    k: u32,
    b: Option<i64>,
    schedule: &[u64],
) -> Result<ConvergenceTrace> {
    if schedule.is_empty() {
        return Err(Error::Precondition("empty r schedule".into()));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("r schedule must be strictly increasing".into()));
    }
    let predicted = predicted_density(sys, k, b)?;
    let target = predicted.to_f64();
    let mut rows: Vec<TraceRow> = Vec::with_capacity(schedule.len());
    for &r in schedule {
        let count = count_sieved(sys, r, k, b)?;
        let deviation = (count.ratio_f64 - target).abs();
        let growth_flag = rows
            .last()
            .is_some_and(|prev| deviation > 2.0 * prev.deviation && deviation > 1e-12);
        rows.push(TraceRow {
            count,
            predicted: target,
            deviation,
            growth_flag,
        });
    }
    let final_deviation = rows.last().map_or(0.0, |r| r.deviation);
    Ok(ConvergenceTrace {
        rows,
        predicted,
        final_deviation,
    })
}

/// Smallest `r` such that the box `[−r, r]ⁿ` contains an integral point.
pub fn find_r0(sys: &HyperplaneSystem) -> Result<u64> {
    let lattice = Lattice::of_system(sys)?;
    let start = sys
        .base_point()
        .iter()
        .map(|x| x.magnitude().to_u64())
        .try_fold(0u64, |acc, x| x.map(|x| acc.max(x)))
        .ok_or_else(|| Error::Overflow("base point exceeds u64".into()))?;
    let nonempty = |r: u64| lattice.points(r).next_point().is_some();
    let (mut lo, mut hi) = (0u64, start);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if nonempty(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    pub r: u64,
    pub r0: u64,
    pub actual: u64,
    /// `(2⌊(r − r₀)/c⌋ + 1)^(n−m)` with `c` from the null-space basis.
    #[serde(with = "crate::serde_big::int")]
    pub bound: BigInt,
    /// `⌊(r − r₀)/Σ|a_i|⌋^(n−1)` for a single equation.
    pub hyperplane_bound: Option<String>,
    #[serde(with = "crate::serde_big::int")]
    pub c: BigInt,
    pub ok: bool,
}

pub fn lower_bound_check(sys: &HyperplaneSystem, r: u64) -> Result<LowerBoundCheck> {
    let r0 = find_r0(sys)?;
    if r < r0 {
        return Err(Error::Precondition(format!("r = {r} is below r0 = {r0}")));
    }
    let null = intlinalg::nullspace_basis(sys.matrix());
    let dim = null.dim();
    let slack = BigInt::from(r - r0);
    let c = null.c.clone().unwrap_or_else(|| BigInt::from(1));
    let bound = num_traits::pow(BigInt::from(2) * (&slack / &c) + 1, dim);

    let row = sys.matrix().row(0);
    let hyperplane_bound = (sys.equations() == 1 && row.iter().any(|x| !x.is_zero())).then(|| {
        let sum = intlinalg::hyperplane_constant(row);
        num_traits::pow(&slack / sum, sys.ambient_dim() - 1)
    });

    let lattice = Lattice::of_system(sys)?;
    let mut actual = 0u64;
    let mut it = lattice.points(r);
    while it.next_point().is_some() {
        actual += 1;
    }
    let big_actual = BigInt::from(actual);
    let ok = big_actual >= bound && hyperplane_bound.as_ref().is_none_or(|h| &big_actual >= h);
    Ok(LowerBoundCheck {
        r,
        r0,
        actual,
        bound,
        hyperplane_bound: hyperplane_bound.map(|h| h.to_string()),
        c,
        ok,
    })
}
