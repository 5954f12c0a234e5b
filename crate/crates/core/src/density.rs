//! The exact density engine.
//!
//! For a system `A·x = A·p` with Smith normal form `U·A·V = D` and rank `m`,
//! the change of variables `y = V⁻¹·x` maps the solution lattice onto
//! `{(p'_1, …, p'_m, y_{m+1}, …, y_n)}` where `p' = V⁻¹·p`. Since `V⁻¹` is
//! unimodular it preserves gcds, so the density of k-free points is the
//! Euler product over the primes `q` with `q^k | gcd(p'_1, …, p'_m)` with
//! exponent `k·(n − m)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, DensityValue};
use crate::error::{Error, Result};
use crate::intlinalg::{self, IntMatrix, SnfDecomposition};

/// The integral points of `A·x = b`, stored with one known integral point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneSystem {
    a: IntMatrix,
    #[serde(with = "crate::serde_big::int_vec")]
    base_point: Vec<BigInt>,
    #[serde(with = "crate::serde_big::int_vec")]
    rhs: Vec<BigInt>,
}

impl HyperplaneSystem {
    /// The system `A·x = A·p`.
    pub fn from_base_point(a: IntMatrix, p: Vec<BigInt>) -> Result<Self> {
        let rhs = a.mul_vec(&p)?;
        let (a, rhs) = normalize_single_row(a, rhs)?;
        Ok(HyperplaneSystem {
            a,
            base_point: p,
            rhs,
        })
    }

    /// The system `A·x = b`; fails when it has no integral solution.
    pub fn from_rhs(a: IntMatrix, b: Vec<BigInt>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::domain(format!(
                "right-hand side has {} entries for {} equations",
                b.len(),
                a.rows()
            )));
        }
        let (a, rhs) = normalize_single_row(a, b)?;
        let base_point = solve_integral(&a, &rhs)?;
        Ok(HyperplaneSystem {
            a,
            base_point,
            rhs,
        })
    }

    /// The single hyperplane `a·x = b`.
    pub fn hyperplane(a: Vec<BigInt>, b: BigInt) -> Result<Self> {
        if a.iter().all(Zero::is_zero) {
            return Err(Error::domain("hyperplane normal vector is zero"));
        }
        let n = a.len();
        Self::from_rhs(IntMatrix::new(1, n, a)?, vec![b])
    }

    /// All of `ℤⁿ`, written as the trivial equation `0·x = 0`.
    pub fn full_space(n: usize) -> Self {
        HyperplaneSystem {
            a: IntMatrix::zeros(1, n),
            base_point: vec![BigInt::zero(); n],
            rhs: vec![BigInt::zero()],
        }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn base_point(&self) -> &[BigInt] {
        &self.base_point
    }

    pub fn rhs(&self) -> &[BigInt] {
        &self.rhs
    }

    pub fn ambient_dim(&self) -> usize {
        self.a.cols()
    }

    pub fn equations(&self) -> usize {
        self.a.rows()
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.a.mul_vec(x).is_ok_and(|ax| ax == self.rhs)
    }
}

/// Divides a single equation through by the content of its coefficients.
fn normalize_single_row(a: IntMatrix, rhs: Vec<BigInt>) -> Result<(IntMatrix, Vec<BigInt>)> {
    if a.rows() != 1 {
        return Ok((a, rhs));
    }
    let g = intlinalg::vec_gcd(a.row(0))?;
    if g.is_zero() {
        if !rhs[0].is_zero() {
            return Err(Error::NoIntegralPoints);
        }
        return Ok((a, rhs));
    }
    if g == BigInt::from(1) {
        return Ok((a, rhs));
    }
    if !rhs[0].is_multiple_of(&g) {
        return Err(Error::NoIntegralPoints);
    }
    let row: Vec<BigInt> = a.row(0).iter().map(|x| x / &g).collect();
    Ok((IntMatrix::new(1, a.cols(), row)?, vec![&rhs[0] / &g]))
}

/// An integral solution of `A·p = b` built from the Smith normal form.
pub fn solve_integral(a: &IntMatrix, b: &[BigInt]) -> Result<Vec<BigInt>> {
    solve_with_snf(&intlinalg::smith_normal_form(a), b)
}

fn solve_with_snf(snf: &SnfDecomposition, b: &[BigInt]) -> Result<Vec<BigInt>> {
    let ub = snf.u.mul_vec(b)?;
    let m = snf.rank();
    let mut y = vec![BigInt::zero(); snf.v.rows()];
    for (i, c) in ub.iter().enumerate() {
        if i < m {
            let (q, r) = c.div_rem(&snf.invariant_factors[i]);
            if !r.is_zero() {
                return Err(Error::NoIntegralPoints);
            }
            y[i] = q;
        } else if !c.is_zero() {
            return Err(Error::NoIntegralPoints);
        }
    }
    snf.v.mul_vec(&y)
}

/// Which formula produced a density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityPath {
    /// No constraints: the classical `1/ζ(kn)`.
    FullSpace,
    /// A single primitive equation `a·x = b`.
    GeneralHyperplane,
    /// Last invariant factor is 1, so `b' = gcd(A·p)`.
    DmOne,
    /// General Smith normal form route.
    FullSnf,
    /// Zero-dimensional intersections and lines through the origin, where the
    /// product formula is extended by convention.
    Extrapolated,
}

impl DensityPath {
    pub fn label(self) -> &'static str {
        match self {
            DensityPath::FullSpace => "full space",
            DensityPath::GeneralHyperplane => "general hyperplane",
            DensityPath::DmOne => "dm=1",
            DensityPath::FullSnf => "full SNF",
            DensityPath::Extrapolated => "extrapolated case",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityResult {
    pub density: DensityValue,
    /// Rank `m` of the coefficient matrix.
    pub codim: usize,
    pub ambient: usize,
    pub k: u32,
    #[serde(with = "crate::serde_big::int")]
    pub anchor_gcd: BigInt,
    #[serde(with = "crate::serde_big::int_vec")]
    pub transformed_prefix: Vec<BigInt>,
    pub path: DensityPath,
    pub extrapolated: bool,
    pub snf: SnfDecomposition,
}

impl DensityResult {
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.snf.invariant_factors
    }
}

fn is_k_free(g: &BigInt, k: u32) -> Result<bool> {
    if g.is_zero() {
        return Ok(false);
    }
    Ok(arith::factorize(g)?.primes_with_power(k).is_empty())
}

fn density_value(k: u32, n: usize, m: usize, anchor: &BigInt) -> Result<DensityValue> {
    if m == n {
        return Ok(DensityValue::SinglePoint {
            visible: is_k_free(anchor, k)?,
        });
    }
    let t = u32::try_from(n - m).map_err(|_| Error::Overflow("dimension exceeds u32".into()))?;
    arith::euler_product(k, t, anchor)
}

fn is_extrapolated(n: usize, m: usize, anchor: &BigInt) -> bool {
    m == n || (anchor.is_zero() && n - m == 1)
}

/// Density of k-free points on the intersection described by `sys`.
pub fn density_of_system(sys: &HyperplaneSystem, k: u32) -> Result<DensityResult> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let snf = intlinalg::smith_normal_form(sys.matrix());
    let m = snf.rank();
    let n = sys.ambient_dim();
    let v_inv = snf.v.inverse_unimodular()?;
    let transformed = v_inv.mul_vec(sys.base_point())?;
    let prefix = transformed[..m].to_vec();
    let anchor = prefix.iter().fold(BigInt::zero(), |g, x| g.gcd(x));

    let density = density_value(k, n, m, &anchor)?;
    let extrapolated = is_extrapolated(n, m, &anchor);
    let path = if m == 0 {
        DensityPath::FullSpace
    } else if extrapolated {
        DensityPath::Extrapolated
    } else if sys.equations() == 1 {
        DensityPath::GeneralHyperplane
    } else if snf.last_factor().is_some_and(|d| *d == BigInt::from(1)) {
        DensityPath::DmOne
    } else {
        DensityPath::FullSnf
    };
    Ok(DensityResult {
        density,
        codim: m,
        ambient: n,
        k,
        anchor_gcd: anchor,
        transformed_prefix: prefix,
        path,
        extrapolated,
        snf,
    })
}

/// Density of k-free points on the hyperplane `a·x = b`.
pub fn density_of_hyperplane(a: &[BigInt], b: &BigInt, k: u32) -> Result<DensityResult> {
    let sys = HyperplaneSystem::hyperplane(a.to_vec(), b.clone())?;
    let result = density_of_system(&sys, k)?;
    let n = sys.ambient_dim();
    let b = &sys.rhs()[0];
    if k == 1 && n >= 2 && !b.is_zero() {
        if let Some(babs) = b.magnitude().to_u64() {
            let t = (n - 1) as u32;
            let jordan = arith::jordan_totient(t, babs)?;
            let expected = BigRational::new(jordan, num_traits::pow(BigInt::from(babs), t as usize));
            assert_eq!(
                result.density.exact(),
                Some(expected),
                "SNF route disagrees with the Jordan totient quotient for {a:?} = {b}"
            );
        }
    }
    Ok(result)
}

/// The hyperplane through `n` points of `ℤⁿ` and its visible-point density.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointsDensity {
    /// Coefficients of the interpolating equation before normalization.
    #[serde(with = "crate::serde_big::int_vec")]
    pub coefficients: Vec<BigInt>,
    #[serde(with = "crate::serde_big::int")]
    pub constant: BigInt,
    /// `|det|` of the matrix whose rows are the points.
    #[serde(with = "crate::serde_big::int")]
    pub determinant: BigInt,
    /// gcd of the coefficients; the determinant formula applies verbatim when it is 1.
    #[serde(with = "crate::serde_big::int")]
    pub content: BigInt,
    pub result: DensityResult,
}

/// Density of visible points on the hyperplane through the given points.
///
/// Expanding `det [[p_1, 1]; …; [p_n, 1]; [x, 1]] = 0` along the last row
/// gives `Σ C_j x_j + det(P) = 0`.
pub fn density_from_points(points: &[Vec<BigInt>]) -> Result<PointsDensity> {
    let n = points.len();
    if n == 0 || points.iter().any(|p| p.len() != n) {
        return Err(Error::domain("need n points with n coordinates each"));
    }
    let mut bordered = IntMatrix::zeros(n, n + 1);
    for (i, p) in points.iter().enumerate() {
        for (j, x) in p.iter().enumerate() {
            bordered[(i, j)] = x.clone();
        }
        bordered[(i, n)] = BigInt::from(1);
    }
    // cofactor of entry (n, j) in the (n+1)x(n+1) bordered matrix
    let cofactor = |skip: usize| -> Result<BigInt> {
        let data: Vec<BigInt> = (0..n)
            .flat_map(|i| (0..=n).filter(move |&j| j != skip).map(move |j| (i, j)))
            .map(|(i, j)| bordered[(i, j)].clone())
            .collect();
        let det = IntMatrix::new(n, n, data)?.determinant()?;
        Ok(if (n + skip).is_multiple_of(2) { det } else { -det })
    };
    let coefficients = (0..n).map(cofactor).collect::<Result<Vec<_>>>()?;
    if coefficients.iter().all(Zero::is_zero) {
        return Err(Error::NotGeneralPosition);
    }
    let constant = cofactor(n)?;
    let rows = IntMatrix::from_rows(points.to_vec())?;
    let determinant = rows.determinant()?.magnitude().clone().into();
    let content = intlinalg::vec_gcd(&coefficients)?;
    let result = density_of_hyperplane(&coefficients, &-&constant, 1)?;
    Ok(PointsDensity {
        coefficients,
        constant,
        determinant,
        content,
        result,
    })
}

/// The shortcut `b' = gcd(A·p)`, valid when the last invariant factor is 1.
pub fn dm1_shortcut(sys: &HyperplaneSystem, k: u32) -> Result<Option<DensityResult>> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let snf = intlinalg::smith_normal_form(sys.matrix());
    if snf.last_factor() != Some(&BigInt::from(1)) {
        return Ok(None);
    }
    let m = snf.rank();
    let n = sys.ambient_dim();
    let anchor = intlinalg::vec_gcd(sys.rhs())?;
    Ok(Some(DensityResult {
        density: density_value(k, n, m, &anchor)?,
        codim: m,
        ambient: n,
        k,
        extrapolated: is_extrapolated(n, m, &anchor),
        anchor_gcd: anchor,
        transformed_prefix: Vec::new(),
        path: DensityPath::DmOne,
        snf,
    }))
}

/// JSON system description: `{"A": [[...]], "b": [...]}` or `{"A": [[...]], "p": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<i64>>,
}

impl SystemFile {
    pub fn into_system(self) -> Result<HyperplaneSystem> {
        let a = IntMatrix::from_rows(self.a).map_err(|e| Error::Parse(e.to_string()))?;
        let big = |v: Vec<i64>| v.into_iter().map(BigInt::from).collect::<Vec<_>>();
        match (self.b, self.p) {
            (Some(b), None) => HyperplaneSystem::from_rhs(a, big(b)),
            (None, Some(p)) => {
                if p.len() != a.cols() {
                    return Err(Error::Parse(format!(
                        "base point has {} coordinates, matrix has {} columns",
                        p.len(),
                        a.cols()
                    )));
                }
                HyperplaneSystem::from_base_point(a, big(p))
            }
            _ => Err(Error::Parse("system file needs exactly one of \"b\" or \"p\"".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn plane(a: &[i64], b: i64, k: u32) -> DensityResult {
        density_of_hyperplane(&ints(a), &BigInt::from(b), k).unwrap()
    }

    #[test]
    fn solve_integral_examples() {
        let id = IntMatrix::identity(2);
        assert_eq!(solve_integral(&id, &ints(&[3, 4])).unwrap(), ints(&[3, 4]));
        let a = IntMatrix::from_i64(&[&[2, -1]]);
        let p = solve_integral(&a, &ints(&[5])).unwrap();
        assert_eq!(a.mul_vec(&p).unwrap(), ints(&[5]));
        let a = IntMatrix::from_i64(&[&[2]]);
        assert_eq!(solve_integral(&a, &ints(&[5])), Err(Error::NoIntegralPoints));
        // inconsistent: x + y = 1 and x + y = 2
        let a = IntMatrix::from_i64(&[&[1, 1], &[1, 1]]);
        assert_eq!(solve_integral(&a, &ints(&[1, 2])), Err(Error::NoIntegralPoints));
    }

    #[test]
    fn line_two_x_minus_y() {
        let r = plane(&[2, -1], 5, 1);
        assert_eq!(r.density.exact().unwrap(), q(4, 5));
        assert_eq!(r.path, DensityPath::GeneralHyperplane);
        assert_eq!(r.codim, 1);
        assert_eq!(r.anchor_gcd.magnitude(), BigInt::from(5).magnitude());
    }

    #[test]
    fn hyperplane_through_origin() {
        let r = plane(&[1, 0, 0], 0, 1);
        assert_eq!(r.density, DensityValue::InverseZeta { argument: 2 });
        assert!((r.density.to_f64() - 0.6079271).abs() < 1e-6);
        for a in [&[1i64, 1, 1][..], &[2, 3], &[1, 5, -7, 2]] {
            let n = a.len() as u32;
            assert_eq!(plane(a, 0, 1).density, DensityValue::InverseZeta { argument: n - 1 });
        }
    }

    #[test]
    fn unit_rhs_has_density_one() {
        for a in [&[1i64, 1, 1][..], &[2, 3], &[4, -6, 9], &[3, 5]] {
            for b in [1, -1] {
                assert_eq!(plane(a, b, 1).density.exact().unwrap(), BigRational::one());
            }
        }
    }

    #[test]
    fn two_planes_in_space() {
        let a = IntMatrix::from_i64(&[&[1, 0, 0], &[0, 1, 0]]);
        let sys = HyperplaneSystem::from_rhs(a, ints(&[6, 10])).unwrap();
        let r = density_of_system(&sys, 1).unwrap();
        assert_eq!(r.density.exact().unwrap(), q(1, 2));
        assert_eq!(r.path, DensityPath::DmOne);
        let short = dm1_shortcut(&sys, 1).unwrap().unwrap();
        assert_eq!(short.density, r.density);
        assert_eq!(short.anchor_gcd, BigInt::from(2));
    }

    #[test]
    fn k_free_plane() {
        let r = plane(&[1, 0, 0], 12, 2);
        assert_eq!(r.density.exact().unwrap(), q(15, 16));
        assert_eq!(r.density, DensityValue::finite_product(vec![2], 4));
    }

    #[test]
    fn hyperplane_examples() {
        assert_eq!(plane(&[1, 1, 1], 6, 1).density.exact().unwrap(), q(2, 3));
        assert_eq!(plane(&[2, 3], 7, 1).density.exact().unwrap(), q(6, 7));
        assert_eq!(plane(&[-2, 1], -5, 1).density.exact().unwrap(), q(4, 5));
    }

    #[test]
    fn hyperplane_normalization() {
        // 4x + 6y = 10 is 2x + 3y = 5
        let r = plane(&[4, 6], 10, 1);
        assert_eq!(r.density.exact().unwrap(), q(4, 5));
        assert_eq!(
            density_of_hyperplane(&ints(&[4, 6]), &BigInt::from(5), 1),
            Err(Error::NoIntegralPoints)
        );
        assert!(density_of_hyperplane(&ints(&[0, 0]), &BigInt::from(5), 1).is_err());
    }

    #[test]
    fn points_route() {
        let r = density_from_points(&[ints(&[1, 0, 0]), ints(&[0, 1, 0]), ints(&[0, 0, 1])]).unwrap();
        assert_eq!(r.determinant, BigInt::one());
        assert_eq!(r.result.density.exact().unwrap(), BigRational::one());
        assert_eq!(r.coefficients, ints(&[-1, -1, -1]));
        assert_eq!(r.constant, BigInt::one());

        let r = density_from_points(&[ints(&[2, 0]), ints(&[0, 3])]).unwrap();
        assert_eq!(r.determinant, BigInt::from(6));
        assert_eq!(r.result.density.exact().unwrap(), q(1, 3));
        let direct = plane(&[3, 2], 6, 1);
        assert_eq!(direct.density, r.result.density);
        assert_eq!(r.content, BigInt::one());
    }

    #[test]
    fn points_route_with_content() {
        // y = 1 through (1,1) and (3,1): det = -2 but every point is visible
        let r = density_from_points(&[ints(&[1, 1]), ints(&[3, 1])]).unwrap();
        assert_eq!(r.determinant, BigInt::from(2));
        assert_eq!(r.content, BigInt::from(2));
        assert_eq!(r.result.density.exact().unwrap(), BigRational::one());
    }

    #[test]
    fn points_degenerate() {
        assert_eq!(
            density_from_points(&[ints(&[2, 4]), ints(&[2, 4])]),
            Err(Error::NotGeneralPosition)
        );
        // a line through the origin is fine and has density 1/ζ(1) = 0
        let r = density_from_points(&[ints(&[1, 1]), ints(&[2, 2])]).unwrap();
        assert_eq!(r.result.density, DensityValue::InverseZeta { argument: 1 });
        assert!(r.result.extrapolated);
        assert!(density_from_points(&[ints(&[1, 2])]).is_err());
    }

    #[test]
    fn dm1_not_applicable() {
        let a = IntMatrix::from_i64(&[&[1, 1, 1], &[1, -1, 1]]);
        let sys = HyperplaneSystem::from_base_point(a, ints(&[0, 2, 4])).unwrap();
        assert!(dm1_shortcut(&sys, 1).unwrap().is_none());
        let r = density_of_system(&sys, 1).unwrap();
        assert_eq!(r.path, DensityPath::FullSnf);
        assert_eq!(r.invariant_factors(), &ints(&[1, 2])[..]);
        // x + y + z = 6, -x... : the line is (t, 2, 4 - t); gcd(t, 2, 4 - t) = gcd(t, 2)
        assert_eq!(r.density.exact().unwrap(), q(1, 2));
    }

    #[test]
    fn single_hyperplane_dm1_always_applies() {
        for (a, b) in [(&[2i64, -1][..], 5), (&[1, 1, 1], 6), (&[3, 5, 7], 0)] {
            let sys = HyperplaneSystem::hyperplane(ints(a), BigInt::from(b)).unwrap();
            let short = dm1_shortcut(&sys, 1).unwrap().unwrap();
            assert_eq!(short.density, density_of_system(&sys, 1).unwrap().density);
        }
    }

    #[test]
    fn zero_dimensional_intersections() {
        let id = IntMatrix::identity(2);
        let visible = HyperplaneSystem::from_rhs(id.clone(), ints(&[3, 4])).unwrap();
        let r = density_of_system(&visible, 1).unwrap();
        assert_eq!(r.density, DensityValue::SinglePoint { visible: true });
        assert!(r.extrapolated);
        let hidden = HyperplaneSystem::from_rhs(id.clone(), ints(&[4, 6])).unwrap();
        assert_eq!(
            density_of_system(&hidden, 1).unwrap().density,
            DensityValue::SinglePoint { visible: false }
        );
        // gcd 2 is square-free, so the point is 2-free
        assert_eq!(
            density_of_system(&hidden, 2).unwrap().density,
            DensityValue::SinglePoint { visible: true }
        );
        let origin = HyperplaneSystem::from_rhs(id, ints(&[0, 0])).unwrap();
        assert_eq!(
            density_of_system(&origin, 1).unwrap().density,
            DensityValue::SinglePoint { visible: false }
        );
    }

    #[test]
    fn lines_through_origin() {
        let r = plane(&[1, -1], 0, 1);
        assert_eq!(r.density, DensityValue::InverseZeta { argument: 1 });
        assert_eq!(r.density.to_f64(), 0.0);
        assert!(r.extrapolated);
        let r = plane(&[1, -1], 0, 2);
        assert_eq!(r.density, DensityValue::InverseZeta { argument: 2 });
    }

    #[test]
    fn full_space_density() {
        let r = density_of_system(&HyperplaneSystem::full_space(3), 1).unwrap();
        assert_eq!(r.density, DensityValue::InverseZeta { argument: 3 });
        assert_eq!(r.path, DensityPath::FullSpace);
        let r = density_of_system(&HyperplaneSystem::full_space(2), 2).unwrap();
        assert_eq!(r.density, DensityValue::InverseZeta { argument: 4 });
    }

    #[test]
    fn jordan_identity_for_axis_planes() {
        for n in 2..=4usize {
            for b in 1..=500u64 {
                let mut a = vec![0i64; n];
                a[0] = 1;
                let r = plane(&a, b as i64, 1);
                let t = (n - 1) as u32;
                let expected = BigRational::new(
                    arith::jordan_totient(t, b).unwrap(),
                    num_traits::pow(BigInt::from(b), t as usize),
                );
                assert_eq!(r.density.exact().unwrap(), expected);
            }
        }
    }

    #[test]
    fn k_one_matches_visible() {
        for (a, b) in [(&[2i64, -1][..], 5), (&[1, 0, 0], 12), (&[3, 4, 5], 60)] {
            let r = plane(a, b, 1);
            let n = a.len() as u32;
            let expected = arith::euler_product(1, n - 1, &BigInt::from(b)).unwrap();
            assert_eq!(r.density, expected);
        }
    }

    #[test]
    fn system_file_parsing() {
        let f: SystemFile = serde_json::from_str(r#"{"A": [[1,0,0],[0,1,0]], "b": [6, 10]}"#).unwrap();
        let sys = f.into_system().unwrap();
        assert_eq!(density_of_system(&sys, 1).unwrap().density.exact().unwrap(), q(1, 2));
        let f: SystemFile = serde_json::from_str(r#"{"A": [[1,1,1],[1,-1,1]], "p": [0,2,4]}"#).unwrap();
        assert_eq!(f.into_system().unwrap().rhs(), &ints(&[6, 2])[..]);
        let both: SystemFile = serde_json::from_str(r#"{"A": [[1]], "b": [1], "p": [1]}"#).unwrap();
        assert!(matches!(both.into_system(), Err(Error::Parse(_))));
        let bad: SystemFile = serde_json::from_str(r#"{"A": [[2]], "b": [5]}"#).unwrap();
        assert_eq!(bad.into_system(), Err(Error::NoIntegralPoints));
    }

    #[test]
    fn result_json_round_trip() {
        let a = IntMatrix::from_i64(&[&[1, 1, 1], &[1, -1, 1]]);
        let sys = HyperplaneSystem::from_base_point(a, ints(&[0, 2, 4])).unwrap();
        for k in 1..3 {
            let r = density_of_system(&sys, k).unwrap();
            let s = serde_json::to_string(&r).unwrap();
            assert_eq!(serde_json::from_str::<DensityResult>(&s).unwrap(), r);
        }
        let s = serde_json::to_string(&sys).unwrap();
        assert_eq!(serde_json::from_str::<HyperplaneSystem>(&s).unwrap(), sys);
    }
}
