//! Structure of the density sets
//! `D_n = { ∏_{p|b} (1 − p⁻ⁿ) : b ∈ ℤ }`.
//!
//! Taking `−log` turns `D_n` into the finite subsums of `a_p = −log(1 − p⁻ⁿ)`,
//! so the closure of `D_n` is an achievement set. When `a_p ≤ Σ_{q>p} a_q`
//! for every prime `p` outside a finite set `F`, the subsums of the tail
//! fill an interval, and the closure is the union of its `2^|F|` translates.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{self, ratio_to_f64};
use crate::error::{Error, Result};
use crate::fmt::sig12;

/// Largest prime the greedy search will consider.
pub const DEFAULT_PRIME_BOUND: u64 = 10_000_000;

fn factor(p: u64, n: u32) -> BigRational {
    let pn = num_traits::pow(BigInt::from(p), n as usize);
    BigRational::new(&pn - 1u32, pn)
}

/// Greedy Euler-product approximation of a target density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyApproximation {
    pub target: f64,
    pub n: u32,
    pub primes: Vec<u64>,
    #[serde(with = "ratio_vec")]
    pub partials: Vec<BigRational>,
    pub partial_values: Vec<f64>,
    /// `partial − target` after each step; never negative.
    pub residuals: Vec<f64>,
    /// The run stopped early because no admissible prime exists below the bound.
    pub exhausted: bool,
    /// Whether the product over all primes beyond the last choice can still
    /// bring the partial product down to the target.
    pub tail_can_bridge: bool,
}

mod ratio_vec {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(crate::serde_big::ratio_to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| crate::serde_big::parse_ratio(s).ok_or_else(|| D::Error::custom(s.clone())))
            .collect()
    }
}

/// Primes in ascending order, sieved lazily up to a hard bound.
struct PrimeSource {
    primes: Vec<u64>,
    sieved_to: u64,
    bound: u64,
}

impl PrimeSource {
    fn new(bound: u64) -> Self {
        let sieved_to = bound.min(1000);
        PrimeSource {
            primes: arith::primes_up_to(sieved_to),
            sieved_to,
            bound,
        }
    }

    fn grow(&mut self) -> bool {
        if self.sieved_to >= self.bound {
            return false;
        }
        self.sieved_to = self.sieved_to.saturating_mul(16).min(self.bound);
        self.primes = arith::primes_up_to(self.sieved_to);
        true
    }
}

pub fn greedy_approximate(alpha: f64, n: u32, steps: usize) -> Result<GreedyApproximation> {
    greedy_approximate_bounded(alpha, n, steps, DEFAULT_PRIME_BOUND)
}

/// At each step picks the smallest prime `p` beyond the previous choice with
/// `partial · (1 − p⁻ⁿ) ≥ α`. Comparisons are exact against the binary value
/// of `alpha`.
pub fn greedy_approximate_bounded(
    alpha: f64,
    n: u32,
    steps: usize,
    prime_bound: u64,
) -> Result<GreedyApproximation> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("target {alpha} is outside (0, 1)")));
    }
    if n == 0 || steps == 0 {
        return Err(Error::domain("n and steps must be positive"));
    }
    let target = BigRational::from_float(alpha).expect("finite target");
    let mut source = PrimeSource::new(prime_bound);
    let mut partial = BigRational::one();
    let mut last = 1u64;
    let mut out = GreedyApproximation {
        target: alpha,
        n,
        primes: Vec::new(),
        partials: Vec::new(),
        partial_values: Vec::new(),
        residuals: Vec::new(),
        exhausted: false,
        tail_can_bridge: true,
    };
    let admissible = |partial: &BigRational, p: u64| partial * factor(p, n) >= target;

    for _ in 0..steps {
        // admissibility is monotone in p, so binary search the sieved primes
        let chosen = loop {
            let start = source.primes.partition_point(|&p| p <= last);
            let candidates = &source.primes[start..];
            if candidates.last().is_some_and(|&p| admissible(&partial, p)) {
                let idx = candidates.partition_point(|&p| !admissible(&partial, p));
                break Some(candidates[idx]);
            }
            if !source.grow() {
                break None;
            }
        };
        let Some(p) = chosen else {
            out.exhausted = true;
            break;
        };
        partial *= factor(p, n);
        last = p;
        let value = ratio_to_f64(&partial);
        out.primes.push(p);
        out.partials.push(partial.clone());
        out.partial_values.push(value);
        out.residuals.push(ratio_to_f64(&(&partial - &target)));
    }

    if n >= 2 {
        // ∏_{q>last} (1 − q⁻ⁿ) ≥ truncated · (1 − ∫_B^∞ x⁻ⁿ dx)
        let bound = source.sieved_to as f64;
        let truncated: f64 = source
            .primes
            .iter()
            .filter(|&&q| q > last)
            .map(|&q| 1.0 - (q as f64).powi(-(n as i32)))
            .product();
        let tail_lo = truncated * (1.0 - bound.powf(1.0 - n as f64) / (n as f64 - 1.0));
        out.tail_can_bridge = ratio_to_f64(&partial) * tail_lo <= alpha;
    }
    Ok(out)
}

/// The line (or hyperplane in `ℝ^(n+1)`) `(b−1)x + b·y = b` whose density is
/// the partial product after `step` steps, where `b` is the product of the
/// chosen primes. Steps are numbered from 1.
pub fn hyperplane_for_approximation(
    approx: &GreedyApproximation,
    step: usize,
) -> Result<(Vec<BigInt>, BigInt)> {
    if step == 0 || step > approx.primes.len() {
        return Err(Error::domain(format!(
            "step {step} outside 1..={}",
            approx.primes.len()
        )));
    }
    let b: BigInt = approx.primes[..step].iter().map(|&p| BigInt::from(p)).product();
    let mut a = vec![&b - 1u32, b.clone()];
    a.resize(approx.n as usize + 1, BigInt::from(0));
    Ok((a, b))
}

/// Certificate that `(1 − 2⁻ⁿ, ∏_{p≠2} (1 − p⁻ⁿ))` contains no density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub n: u32,
    pub prime: u64,
    #[serde(with = "crate::serde_big::ratio")]
    pub left: BigRational,
    pub left_value: f64,
    /// `(1/ζ(n)) / (1 − 2⁻ⁿ)` within the requested tolerance.
    pub right: f64,
    /// Rigorous lower bound on the right endpoint.
    pub right_lower: f64,
    /// Independent lower bound from the truncated product over odd primes.
    pub product_lower: f64,
    /// `right_lower − left`.
    pub margin: f64,
}

impl GapCertificate {
    pub fn is_valid(&self) -> bool {
        self.margin > 0.0
    }
}

/// Primes used by the truncated-product cross-check.
const GAP_PRODUCT_BOUND: u64 = 100_000;

pub fn gap_certificate(n: u32, tol: f64) -> Result<GapCertificate> {
    if n < 2 {
        return Err(Error::domain("gap certificates need n >= 2"));
    }
    let left = factor(2, n);
    let left_value = ratio_to_f64(&left);
    let (zlo, zhi) = arith::inv_zeta_bracket(n, tol)?;
    // left_value is within an ulp of 1 − 2⁻ⁿ, which is exact in binary for n < 53
    let right_lower = zlo / left_value * (1.0 - 4.0 * f64::EPSILON);
    let right = 0.5 * (zlo + zhi) / left_value;

    let truncated: f64 = arith::primes_up_to(GAP_PRODUCT_BOUND)
        .iter()
        .skip(1)
        .map(|&p| 1.0 - (p as f64).powi(-(n as i32)))
        .product();
    let tail = (GAP_PRODUCT_BOUND as f64).powf(1.0 - n as f64) / (n as f64 - 1.0);
    let product_lower = truncated * (1.0 - tail) * (1.0 - 1e-12);

    let best_lower = right_lower.max(product_lower);
    Ok(GapCertificate {
        n,
        prime: 2,
        left,
        left_value,
        right,
        right_lower: best_lower,
        product_lower,
        margin: best_lower - left_value,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeCheck {
    pub p: u64,
    /// `1/(pⁿ − 1)`, an upper bound for `a_p`.
    pub lhs: f64,
    /// Lower bound for `Σ_{q>p} q⁻ⁿ`, itself a lower bound for `Σ_{q>p} a_q`.
    pub tail_lower: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: u32,
    pub prime_bound: u64,
    /// Smallest prime from which every checked prime passes.
    pub threshold: Option<u64>,
    pub failing: Vec<u64>,
    pub checks: Vec<PrimeCheck>,
}

/// `Σ_{q>x} q⁻ⁿ ≥ n/(x^(n−1)(log x^(n−1) + 1)) − π(x)/xⁿ`, valid for `x ≥ 17`.
pub fn prime_tail_lower_bound(n: u32, x: f64, pi_x: u64) -> f64 {
    if x < 17.0 {
        return 0.0;
    }
    let nf = n as f64;
    let xn1 = x.powf(nf - 1.0);
    let bound = nf / (xn1 * ((nf - 1.0) * x.ln() + 1.0)) - pi_x as f64 / (xn1 * x);
    bound.max(0.0)
}

/// Tests the sufficient condition `1/(pⁿ − 1) ≤ Σ_{q>p} q⁻ⁿ` for every prime
/// `p ≤ prime_bound`. The tail sum is exact over primes up to the bound plus
/// the analytic lower bound beyond it.
pub fn finite_union_threshold(n: u32, prime_bound: u64) -> Result<ThresholdReport> {
    if n < 2 {
        return Err(Error::domain("the finite-union criterion needs n >= 2"));
    }
    if prime_bound < 2 {
        return Err(Error::domain("prime bound must be at least 2"));
    }
    let primes = arith::primes_up_to(prime_bound);
    let beyond = prime_tail_lower_bound(n, prime_bound as f64, primes.len() as u64);
    let ni = n as i32;
    // suffix[i] = Σ_{j > i} primes[j]⁻ⁿ, accumulated from the smallest terms
    let mut suffix = vec![0.0f64; primes.len()];
    let mut acc = 0.0f64;
    for i in (0..primes.len()).rev() {
        suffix[i] = acc;
        acc += (primes[i] as f64).powi(-ni);
    }
    let mut checks = Vec::with_capacity(primes.len());
    let mut failing = Vec::new();
    for (i, &p) in primes.iter().enumerate() {
        let pf = p as f64;
        let lhs = 1.0 / (pf.powi(ni) - 1.0);
        // shave relative rounding off the lower bound
        let tail_lower = (suffix[i] + beyond) * (1.0 - 1e-12);
        let pass = lhs <= tail_lower;
        if !pass {
            failing.push(p);
        }
        checks.push(PrimeCheck {
            p,
            lhs,
            tail_lower,
            pass,
        });
    }
    let threshold = match failing.last() {
        None => primes.first().copied(),
        Some(&last) => primes.iter().copied().find(|&p| p > last),
    };
    Ok(ThresholdReport {
        n,
        prime_bound,
        threshold,
        failing,
        checks,
    })
}

/// Exact check of `a_p ≤ Σ_{q>p} a_q`, i.e.
/// `∏_{q≤p} (1 − q⁻ⁿ) · (1 − p⁻ⁿ) ≥ 1/ζ(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionCheck {
    pub n: u32,
    pub p: u64,
    #[serde(with = "crate::serde_big::ratio")]
    pub product: BigRational,
    pub product_value: f64,
    pub inv_zeta_lo: f64,
    pub inv_zeta_hi: f64,
    /// `None` when the float enclosure cannot separate the two sides.
    pub holds: Option<bool>,
}

pub fn subsum_criterion(n: u32, p: u64, tol: f64) -> Result<CriterionCheck> {
    if n < 2 || !arith::is_prime(p) {
        return Err(Error::domain("need n >= 2 and a prime p"));
    }
    let mut product = factor(p, n);
    for q in arith::primes_up_to(p) {
        product *= factor(q, n);
    }
    let value = ratio_to_f64(&product);
    let (lo, hi) = arith::inv_zeta_bracket(n, tol)?;
    let slack = 4.0 * f64::EPSILON * value;
    let holds = if value - slack >= hi {
        Some(true)
    } else if value + slack < lo {
        Some(false)
    } else {
        None
    };
    Ok(CriterionCheck {
        n,
        p,
        product_value: value,
        product,
        inv_zeta_lo: lo,
        inv_zeta_hi: hi,
        holds,
    })
}

/// Exact description of an interval endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExactEndpoint {
    Rational {
        #[serde(with = "crate::serde_big::ratio")]
        value: BigRational,
    },
    /// `coefficient / ζ(argument)`.
    ZetaMultiple {
        #[serde(with = "crate::serde_big::ratio")]
        coefficient: BigRational,
        argument: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub value: f64,
    pub exact: ExactEndpoint,
}

impl Endpoint {
    fn rational(value: BigRational) -> Self {
        Endpoint {
            value: ratio_to_f64(&value),
            exact: ExactEndpoint::Rational { value },
        }
    }

    fn zeta_multiple(coefficient: BigRational, argument: u32, inv_zeta: f64) -> Self {
        Endpoint {
            value: ratio_to_f64(&coefficient) * inv_zeta,
            exact: ExactEndpoint::ZetaMultiple {
                coefficient,
                argument,
            },
        }
    }

    fn scaled(&self, f: &BigRational, inv_zeta: f64) -> Self {
        match &self.exact {
            ExactEndpoint::Rational { value } => Endpoint::rational(value * f),
            ExactEndpoint::ZetaMultiple {
                coefficient,
                argument,
            } => Endpoint::zeta_multiple(coefficient * f, *argument, inv_zeta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Interval {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lo.value - tol <= x && x <= self.hi.value + tol
    }
}

/// Sorted, pairwise disjoint closed intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    pub n: u32,
    pub intervals: Vec<Interval>,
    /// Primes whose presence or absence separates the pieces.
    pub split_primes: Vec<u64>,
    pub certified: bool,
    pub note: Option<String>,
}

impl IntervalUnion {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x, tol))
    }

    /// Open gaps between consecutive intervals.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals
            .windows(2)
            .map(|w| (w[0].hi.value, w[1].lo.value))
            .collect()
    }
}

const ENDPOINT_TOL: f64 = 1e-14;
const MAX_INTERVALS: usize = 1 << 16;

/// Union of the translates `∏_{p∈S} (1 − p⁻ⁿ) · [T, 1]` over subsets `S` of
/// `split_primes`, where `T = ∏_{p ∉ split_primes} (1 − p⁻ⁿ)`.
fn translate_union(n: u32, split_primes: &[u64]) -> Result<Vec<Interval>> {
    let inv_zeta = arith::inv_zeta(n, ENDPOINT_TOL)?;
    let mut split_product = BigRational::one();
    for &p in split_primes {
        split_product *= factor(p, n);
    }
    let base = Interval {
        lo: Endpoint::zeta_multiple(split_product.recip(), n, inv_zeta),
        hi: Endpoint::rational(BigRational::one()),
    };
    let mut intervals = vec![base];
    for &p in split_primes.iter().rev() {
        let f = factor(p, n);
        let shifted: Vec<Interval> = intervals
            .iter()
            .map(|i| Interval {
                lo: i.lo.scaled(&f, inv_zeta),
                hi: i.hi.scaled(&f, inv_zeta),
            })
            .collect();
        intervals.extend(shifted);
        intervals.sort_by(|a, b| a.lo.value.partial_cmp(&b.lo.value).unwrap_or(Ordering::Equal));
        let mut merged: Vec<Interval> = Vec::with_capacity(intervals.len());
        for i in intervals {
            match merged.last_mut() {
                Some(last) if i.lo.value <= last.hi.value => {
                    if i.hi.value > last.hi.value {
                        last.hi = i.hi;
                    }
                }
                _ => merged.push(i),
            }
        }
        if merged.len() > MAX_INTERVALS {
            return Err(Error::Precondition(format!(
                "interval decomposition exceeds {MAX_INTERVALS} pieces"
            )));
        }
        intervals = merged;
    }
    Ok(intervals)
}

/// Closure of `D_2`: the four translates of the `p ≥ 5` interval by the
/// subsets of `{2, 3}`.
pub fn d2_intervals() -> IntervalUnion {
    let split = vec![2, 3];
    IntervalUnion {
        n: 2,
        intervals: translate_union(2, &split).expect("n = 2 construction"),
        split_primes: split,
        certified: true,
        note: None,
    }
}

pub const NON_CERTIFIED_NOTE: &str =
    "non-certified: the subsum criterion is verified only for primes up to the bound";

/// Interval decomposition for general `n`, splitting on every prime below
/// the threshold of [`finite_union_threshold`].
pub fn dn_intervals(n: u32, prime_bound: u64) -> Result<IntervalUnion> {
    if n == 2 {
        return Ok(d2_intervals());
    }
    let report = finite_union_threshold(n, prime_bound)?;
    let threshold = report.threshold.ok_or_else(|| {
        Error::Precondition(format!("no threshold found below {prime_bound}"))
    })?;
    let split: Vec<u64> = arith::primes_up_to(threshold - 1);
    Ok(IntervalUnion {
        n,
        intervals: translate_union(n, &split)?,
        split_primes: split,
        certified: false,
        note: Some(NON_CERTIFIED_NOTE.to_string()),
    })
}

/// One point of `D_n`: the density attached to a square-free `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub primes: Vec<u64>,
    #[serde(with = "crate::serde_big::int")]
    pub b: BigInt,
    #[serde(with = "crate::serde_big::ratio")]
    pub value: BigRational,
    pub value_f64: f64,
}

pub const DEFAULT_MAX_PRIMES: usize = 24;

/// Densities of every square-free product of primes up to `prime_bound`,
/// sorted by value.
pub fn dn_sample(n: u32, prime_bound: u64, max_primes: usize) -> Result<Vec<SamplePoint>> {
    if n == 0 || prime_bound == 0 {
        return Err(Error::domain("n and prime bound must be positive"));
    }
    let primes = arith::primes_up_to(prime_bound);
    if primes.len() > max_primes {
        return Err(Error::TooManyPrimes {
            count: primes.len(),
            limit: max_primes,
        });
    }
    let factors: Vec<BigRational> = primes.iter().map(|&p| factor(p, n)).collect();
    let mut out = Vec::with_capacity(1 << primes.len());
    let mut chosen = Vec::new();
    collect_subsets(&primes, &factors, 0, &mut chosen, BigRational::one(), &mut out);
    out.sort_by(|a, b| {
        a.value_f64
            .partial_cmp(&b.value_f64)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.value.cmp(&b.value))
            .then_with(|| a.b.cmp(&b.b))
    });
    Ok(out)
}

fn collect_subsets(
    primes: &[u64],
    factors: &[BigRational],
    i: usize,
    chosen: &mut Vec<u64>,
    value: BigRational,
    out: &mut Vec<SamplePoint>,
) {
    if i == primes.len() {
        let b = chosen.iter().map(|&p| BigInt::from(p)).product();
        out.push(SamplePoint {
            primes: chosen.clone(),
            b,
            value_f64: ratio_to_f64(&value),
            value,
        });
        return;
    }
    collect_subsets(primes, factors, i + 1, chosen, value.clone(), out);
    chosen.push(primes[i]);
    collect_subsets(primes, factors, i + 1, chosen, value * &factors[i], out);
    chosen.pop();
}

pub const SAMPLE_CSV_HEADER: &str = "primes,b,numerator,denominator,value";

/// CSV rendering of a sample; primes are space separated.
pub fn sample_csv(points: &[SamplePoint]) -> String {
    let mut s = String::with_capacity(points.len() * 48);
    s.push_str(SAMPLE_CSV_HEADER);
    s.push('\n');
    for pt in points {
        let primes: Vec<String> = pt.primes.iter().map(u64::to_string).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            primes.join(" "),
            pt.b,
            pt.value.numer(),
            pt.value.denom(),
            sig12(pt.value_f64)
        );
    }
    s
}

/// Whether `x` lies strictly inside one of the gaps, allowing `tol` at the ends.
pub fn in_gap(union: &IntervalUnion, x: f64, tol: f64) -> bool {
    union
        .gaps()
        .iter()
        .any(|&(lo, hi)| x > lo + tol && x < hi - tol)
}
