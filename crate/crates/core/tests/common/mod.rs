//! Independent oracles shared by the property suites and the acceptance run.
//!
//! Nothing here calls back into the algorithms under test: determinants are
//! Laplace expansions, gcds are Euclid on machine integers, Möbius values come
//! from trial division, and point sets come from scanning the whole box.

#![allow(dead_code, clippy::needless_range_loop)]

use lattice_density::arith::{self, DensityValue};
use lattice_density::density::{self, HyperplaneSystem};
use lattice_density::densityset;
use lattice_density::enumerate::{self, Strategy};
use lattice_density::intlinalg::{self, IntMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gcd_all(x: &[i64]) -> i128 {
    x.iter().fold(0, |g, &v| gcd(g, v as i128))
}

pub fn det(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|row| (0..n).filter(|&c| c != j).map(|c| row[c]).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor)
            })
            .sum(),
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// gcd of all `k × k` minors.
pub fn minor_gcd(a: &[Vec<i64>], k: usize) -> i128 {
    let (s, n) = (a.len(), a[0].len());
    let mut g = 0;
    for rows in subsets(s, k) {
        for cols in subsets(n, k) {
            let m: Vec<Vec<i128>> = rows
                .iter()
                .map(|&i| cols.iter().map(|&j| a[i][j] as i128).collect())
                .collect();
            g = gcd(g, det(&m));
        }
    }
    g
}

pub fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn matrix(rows: &[Vec<i64>]) -> IntMatrix {
    IntMatrix::from_rows(rows.to_vec()).expect("rectangular")
}

fn to_i128_rows(m: &IntMatrix) -> Vec<Vec<i128>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| x.to_i128().expect("small entry")).collect())
        .collect()
}

fn mat_mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum())
                .collect()
        })
        .collect()
}

/// Elementary column operations `(i, j, f)`: add `f` times one coordinate
/// to another. Returns `W` and `W⁻¹`, built from the operations directly.
pub fn unimodular_pair(n: usize, ops: &[(usize, usize, i64)]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let id = |n: usize| -> Vec<Vec<i64>> {
        (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect()
    };
    let (mut w, mut winv) = (id(n), id(n));
    for &(i, j, f) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            // negate a row: its own inverse
            for c in 0..n {
                w[i][c] = -w[i][c];
            }
            for row in winv.iter_mut() {
                row[i] = -row[i];
            }
            continue;
        }
        // W ← E·W with E = I + f e_i e_jᵀ, W⁻¹ ← W⁻¹·E⁻¹
        for c in 0..n {
            w[i][c] += f * w[j][c];
        }
        for row in winv.iter_mut() {
            row[j] -= f * row[i];
        }
    }
    (w, winv)
}

fn mul_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn mul_rows(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

/// All `x ∈ [−r, r]ⁿ` with `A·x = rhs`.
pub fn scan_box(a: &[Vec<i64>], rhs: &[i64], r: i64) -> Vec<Vec<i64>> {
    let n = a[0].len();
    let mut out = Vec::new();
    let mut x = vec![-r; n];
    loop {
        if mul_vec(a, &x) == rhs {
            out.push(x.clone());
        }
        let mut i = 0;
        while i < n && x[i] == r {
            x[i] = -r;
            i += 1;
        }
        if i == n {
            return out;
        }
        x[i] += 1;
    }
}

/// `g ≠ 0` and no prime `q` with `q^k | g`, by trial division.
pub fn k_free(g: i128, k: u32) -> bool {
    let mut g = g.abs();
    if g == 0 {
        return false;
    }
    let mut q = 2;
    while q * q <= g {
        let mut e = 0;
        while g % q == 0 {
            g /= q;
            e += 1;
        }
        if e >= k {
            return false;
        }
        q += 1;
    }
    !(g > 1 && k == 1)
}

pub fn mobius_oracle(d: u64) -> i64 {
    let (mut d, mut sign, mut q) = (d, 1, 2);
    while q * q <= d {
        if d % q == 0 {
            d /= q;
            if d % q == 0 {
                return 0;
            }
            sign = -sign;
        }
        q += 1;
    }
    if d > 1 {
        -sign
    } else {
        sign
    }
}

pub fn mobius_k_oracle(k: u32, d: u64) -> i64 {
    let m = (1..=d).find(|m| m.pow(k) >= d).unwrap_or(1);
    if m.pow(k) == d {
        mobius_oracle(m)
    } else {
        0
    }
}

/// `Σ_{d|b} μ_k(d) / d^t`.
pub fn mobius_sum(k: u32, t: u32, b: u64) -> BigRational {
    (1..=b)
        .filter(|d| b.is_multiple_of(*d))
        .map(|d| {
            BigRational::new(
                BigInt::from(mobius_k_oracle(k, d)),
                num_traits::pow(BigInt::from(d), t as usize),
            )
        })
        .sum()
}

/// `J_t(b)/b^t` via `Σ_{d|b} μ(d)(b/d)^t / b^t`.
pub fn jordan_quotient(t: u32, b: u64) -> BigRational {
    let j: BigInt = (1..=b)
        .filter(|d| b.is_multiple_of(*d))
        .map(|d| BigInt::from(mobius_oracle(d)) * num_traits::pow(BigInt::from(b / d), t as usize))
        .sum();
    BigRational::new(j, num_traits::pow(BigInt::from(b), t as usize))
}

// ---- property checks, each returning a description of the first failure ----

pub fn check_snf(a: &[Vec<i64>]) -> Check {
    let m = matrix(a);
    let snf = intlinalg::smith_normal_form(&m);
    let (u, v, d) = (to_i128_rows(&snf.u), to_i128_rows(&snf.v), to_i128_rows(&snf.d));
    let a128: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    ensure!(mat_mul(&mat_mul(&u, &a128), &v) == d, "U·A·V ≠ D for {a:?}");
    ensure!(det(&u).abs() == 1 && det(&v).abs() == 1, "U or V not unimodular for {a:?}");
    let factors: Vec<i128> = snf.invariant_factors.iter().map(|x| x.to_i128().unwrap()).collect();
    for (i, row) in d.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let expected = if i == j { factors.get(i).copied().unwrap_or(0) } else { 0 };
            ensure!(x == expected, "D is not diag(invariant factors) for {a:?}");
        }
    }
    ensure!(factors.iter().all(|&f| f > 0), "non-positive invariant factor for {a:?}");
    ensure!(factors.windows(2).all(|w| w[1] % w[0] == 0), "divisibility chain fails for {a:?}");
    let mut prod = 1i128;
    for i in 1..=a.len().min(a[0].len()) {
        let g = minor_gcd(a, i);
        let expected = if i <= factors.len() {
            prod *= factors[i - 1];
            prod
        } else {
            0
        };
        ensure!(g == expected, "minor gcd of order {i} is {g}, factors give {expected} for {a:?}");
    }
    Ok(())
}

pub fn check_gcd_invariance(n: usize, ops: &[(usize, usize, i64)], x: &[i64]) -> Check {
    let (w, winv) = unimodular_pair(n, ops);
    let wm = matrix(&w);
    ensure!(intlinalg::is_unimodular(&wm).unwrap(), "W not unimodular");
    let id: Vec<Vec<i64>> = mul_rows(&w, &winv);
    ensure!(id.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &v)| v == (i == j) as i64)), "W·W⁻¹ ≠ I");
    let wx = wm.mul_vec(&big(x)).unwrap();
    let lib = intlinalg::vec_gcd(&wx).unwrap();
    let oracle = gcd_all(x);
    ensure!(lib == BigInt::from(oracle), "gcd(Wx) = {lib} but gcd(x) = {oracle} for x = {x:?}");
    Ok(())
}

pub fn system(a: &[Vec<i64>], p: &[i64]) -> HyperplaneSystem {
    HyperplaneSystem::from_base_point(matrix(a), big(p)).expect("consistent by construction")
}

/// Direct gcd count over an exhaustive scan against the library's sieve.
pub fn check_sieve_vs_direct(a: &[Vec<i64>], p: &[i64], b: i64, k: u32, r: u64, chunks: usize) -> Check {
    let sys = system(a, p);
    let count = enumerate::count_sieved_chunked(&sys, r, k, Some(b), chunks).map_err(|e| e.to_string())?;
    let rhs = mul_vec(a, p);
    let pts = scan_box(a, &rhs, r as i64);
    let hits = pts
        .iter()
        .filter(|x| k_free(gcd(gcd_all(x), b as i128), k))
        .count() as u64;
    ensure!(count.total == pts.len() as u64, "total {} vs scan {}", count.total, pts.len());
    ensure!(count.hits == hits, "hits {} vs scan {hits}", count.hits);
    if b != 0 {
        ensure!(count.sieve_hits == Some(hits), "sieve {:?} vs scan {hits}", count.sieve_hits);
    }
    // visibility without b, by both strategies
    let plain = pts.iter().filter(|x| k_free(gcd_all(x), k)).count() as u64;
    for strategy in [Strategy::Lines, Strategy::PerPoint] {
        let c = enumerate::count_with_strategy(&sys, r, k, None, chunks, strategy).map_err(|e| e.to_string())?;
        ensure!(c.hits == plain, "{strategy:?}: hits {} vs scan {plain}", c.hits);
    }
    Ok(())
}

pub fn check_dm1(a: &[Vec<i64>], p: &[i64], k: u32) -> Result<bool, String> {
    let sys = system(a, p);
    let full = density::density_of_system(&sys, k).map_err(|e| e.to_string())?;
    match density::dm1_shortcut(&sys, k).map_err(|e| e.to_string())? {
        Some(short) => {
            ensure!(short.density == full.density, "dm=1 {} vs full {}", short.density, full.density);
            Ok(true)
        }
        None => Ok(false),
    }
}

pub fn check_enumeration(a: &[Vec<i64>], p: &[i64], r: u64) -> Check {
    let sys = system(a, p);
    let mut got = enumerate::enumerate_points(&sys, r).map_err(|e| e.to_string())?;
    let mut expected = scan_box(a, &mul_vec(a, p), r as i64);
    got.sort();
    expected.sort();
    ensure!(got == expected, "enumeration differs from scan for A = {a:?}, p = {p:?}, r = {r}");
    Ok(())
}

pub fn check_lower_bound(a: &[Vec<i64>], p: &[i64], extra: u64) -> Check {
    let sys = system(a, p);
    let r0 = enumerate::find_r0(&sys).map_err(|e| e.to_string())?;
    ensure!(!scan_box(a, &mul_vec(a, p), r0 as i64).is_empty(), "no point at r0 = {r0}");
    if r0 > 0 {
        ensure!(scan_box(a, &mul_vec(a, p), r0 as i64 - 1).is_empty(), "r0 = {r0} not minimal");
    }
    for r in [r0.max(1), r0 + extra / 2 + 1, r0 + extra + 1] {
        let l = enumerate::lower_bound_check(&sys, r).map_err(|e| e.to_string())?;
        ensure!(l.ok, "lower bound fails at r = {r}: {l:?}");
    }
    Ok(())
}

/// Solves `B·c = x` over ℚ and checks `c` is integral.
fn integral_combination(basis: &[Vec<BigInt>], x: &[i64]) -> bool {
    let d = basis.len();
    let n = x.len();
    let mut rows: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = basis.iter().map(|v| BigRational::from_integer(v[i].clone())).collect();
            row.push(BigRational::from_integer(x[i].into()));
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..d {
        let Some(i) = (pivot_row..n).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, i);
        let inv = rows[pivot_row][col].recip();
        for v in rows[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for i in 0..n {
            if i != pivot_row && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for c in 0..=d {
                    let sub = &f * &rows[pivot_row][c];
                    rows[i][c] -= sub;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|r| !r[d].is_zero()) {
        return false;
    }
    (0..pivot_row).all(|i| rows[i][d].is_integer())
}

pub fn check_nullspace(a: &[Vec<i64>], r: i64) -> Check {
    let m = matrix(a);
    let null = intlinalg::nullspace_basis(&m);
    let rank = intlinalg::rank(&m);
    ensure!(null.dim() == a[0].len() - rank, "null space has dimension {}", null.dim());
    for v in null.vectors() {
        ensure!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero), "A·v ≠ 0");
    }
    let zero = vec![0; a.len()];
    for x0 in scan_box(a, &zero, r) {
        ensure!(integral_combination(null.vectors(), &x0), "{x0:?} not an integral combination for A = {a:?}");
    }
    Ok(())
}

pub fn check_unimodular_invariance(a: &[Vec<i64>], p: &[i64], ops: &[(usize, usize, i64)], k: u32) -> Check {
    let n = p.len();
    let (w, winv) = unimodular_pair(n, ops);
    let aw = mul_rows(a, &w);
    let wp = mul_vec(&winv, p);
    let before = density::density_of_system(&system(a, p), k).map_err(|e| e.to_string())?;
    let after = density::density_of_system(&system(&aw, &wp), k).map_err(|e| e.to_string())?;
    ensure!(before.density == after.density, "{} vs {} under W", before.density, after.density);
    Ok(())
}

pub fn check_sandwich(a: &[Vec<i64>], p: &[i64], k: u32) -> Check {
    let res = density::density_of_system(&system(a, p), k).map_err(|e| e.to_string())?;
    if let DensityValue::FiniteProduct { value, .. } = &res.density {
        let t = k * (res.ambient - res.codim) as u32;
        let (lo, _) = arith::inv_zeta_bracket(t, 1e-12).unwrap();
        let v = arith::ratio_to_f64(value);
        ensure!(v >= lo * (1.0 - 1e-12) && *value <= BigRational::one(), "{v} outside [1/ζ({t}), 1]");
    }
    Ok(())
}

pub fn check_greedy_lines(alpha: f64, n: u32, steps: usize) -> Check {
    let g = densityset::greedy_approximate_bounded(alpha, n, steps, 1_000_000).map_err(|e| e.to_string())?;
    for step in 1..=g.primes.len() {
        let (a, b) = densityset::hyperplane_for_approximation(&g, step).unwrap();
        let res = density::density_of_hyperplane(&a, &b, 1).map_err(|e| e.to_string())?;
        ensure!(res.density.exact().as_ref() == Some(&g.partials[step - 1]), "step {step} density mismatch");
        ensure!(g.partials[step - 1] >= BigRational::from_float(alpha).unwrap(), "partial below target");
    }
    Ok(())
}

/// Deviation `| |Δ_b(r)| − ∏_{p|b}(1 − p⁻²)(2r)² | / r` on `x₁ = b` in ℝ³.
pub fn coprime_deviation(b: i64, r: u64) -> f64 {
    let sys = HyperplaneSystem::hyperplane(big(&[1, 0, 0]), BigInt::from(b)).unwrap();
    let c = enumerate::count_sieved_chunked(&sys, r, 1, None, 1).unwrap();
    let product: f64 = (2..=b)
        .filter(|&q| b % q == 0 && (2..q).all(|s| q % s != 0))
        .map(|q| 1.0 - 1.0 / (q * q) as f64)
        .product();
    let volume = (2 * r) as f64 * (2 * r) as f64;
    (c.hits as f64 - product * volume).abs() / r as f64
}
