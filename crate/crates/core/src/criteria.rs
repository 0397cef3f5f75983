//! Hypothesis engines for the factoriality criteria. Every inequality is
//! checked in exact rational arithmetic and kept in two renderings: the
//! symbolic statement and the instantiated numbers, which
//! [`evaluate_inequality`] can re-check independently.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Echelon;
use crate::lincond::{defect, DefectReport};
use crate::poly::HomoPoly;
use crate::projgeom::{PointSet, ProjPoint, ProjectiveSpace};
use crate::sing::nodal_instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    MainBullet1,
    MainBullet2,
    MainBullet3,
    Prop3r4,
    ThmDoubleSolid,
    ThmHypersurface,
    ThmCi1,
    ThmCi2,
    ThmDoubleHypersurface,
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriterionId::MainBullet1 => "main_bullet1",
            CriterionId::MainBullet2 => "main_bullet2",
            CriterionId::MainBullet3 => "main_bullet3",
            CriterionId::Prop3r4 => "prop_3r4",
            CriterionId::ThmDoubleSolid => "thm_double_solid",
            CriterionId::ThmHypersurface => "thm_hypersurface",
            CriterionId::ThmCi1 => "thm_ci1",
            CriterionId::ThmCi2 => "thm_ci2",
            CriterionId::ThmDoubleHypersurface => "thm_double_hypersurface",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "<" => Relation::Lt,
            "<=" => Relation::Le,
            ">" => Relation::Gt,
            ">=" => Relation::Ge,
            "=" => Relation::Eq,
            _ => return None,
        })
    }

    fn holds(self, a: &BigRational, b: &BigRational) -> bool {
        match self {
            Relation::Lt => a < b,
            Relation::Le => a <= b,
            Relation::Gt => a > b,
            Relation::Ge => a >= b,
            Relation::Eq => a == b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Inequality {
    /// ASCII form of the statement, e.g. `|Sigma| < (2r-1)r`.
    pub statement: String,
    /// Both sides evaluated, e.g. `44 < 45`.
    pub instantiated: String,
    pub holds: bool,
}

impl Inequality {
    fn new(statement: &str, lhs: BigRational, rel: Relation, rhs: BigRational) -> Self {
        let holds = rel.holds(&lhs, &rhs);
        Inequality {
            statement: statement.to_string(),
            instantiated: format!("{lhs} {} {rhs}", rel.symbol()),
            holds,
        }
    }
}

/// Re-evaluates an instantiated inequality such as `47 <= 40` or `16 <= 50/3`.
pub fn evaluate_inequality(text: &str) -> Result<bool> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    let [lhs, op, rhs] = parts.as_slice() else {
        return Err(Error::Syntax(format!("expected `a op b`, got {text:?}")));
    };
    let rel =
        Relation::parse(op).ok_or_else(|| Error::Syntax(format!("unknown relation {op:?}")))?;
    let num = |s: &str| {
        s.parse::<BigRational>()
            .map_err(|_| Error::Syntax(format!("not a rational number: {s:?}")))
    };
    Ok(rel.holds(&num(lhs)?, &num(rhs)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionVerdict {
    pub criterion_id: CriterionId,
    pub applies: bool,
    pub inequalities: Vec<Inequality>,
    pub certified_degree: Option<i64>,
    /// Exact parameter values, rationals rendered as `a/b`.
    pub parameters: BTreeMap<String, String>,
    /// Set when the verdict rests on a hypothesis that was not checked here.
    pub conditional: Option<String>,
    pub notes: Vec<String>,
}

impl CriterionVerdict {
    fn build(
        id: CriterionId,
        inequalities: Vec<Inequality>,
        degree: i64,
        params: &[(&str, String)],
    ) -> Self {
        let applies = inequalities.iter().all(|i| i.holds);
        CriterionVerdict {
            criterion_id: id,
            applies,
            certified_degree: applies.then_some(degree),
            inequalities,
            parameters: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            conditional: None,
            notes: Vec::new(),
        }
    }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn floor_i64(x: &BigRational) -> i64 {
    let f = x.floor().to_integer();
    i64::try_from(f).expect("small value")
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadParams(msg.into())
}

/// Denominator of the rational grid searched for `mu`.
pub const MU_DENOMINATOR: i64 = 60;

/// Checks one bullet of the main criterion at a given `mu` (ignored for
/// bullet 1).
pub fn main_bullet(
    bullet: u8,
    n: i64,
    lambda: i64,
    size: i64,
    xi: i64,
    mu: &BigRational,
) -> Result<CriterionVerdict> {
    check_main_params(n, lambda, size, xi)?;
    let sigma = q(size);
    let lam = q(lambda);
    let mut params = vec![
        ("n", n.to_string()),
        ("lambda", lambda.to_string()),
        ("|Sigma|", size.to_string()),
        ("xi", xi.to_string()),
    ];
    let (id, ineqs) = match bullet {
        1 => {
            let half_up = (lambda + 1) / 2;
            let target = floor_i64(&(ratio(3 * lambda, 2) - q(3)));
            (
                CriterionId::MainBullet1,
                vec![
                    Inequality::new("xi = floor(3lambda/2 - 3)", q(xi), Relation::Eq, q(target)),
                    Inequality::new(
                        "|Sigma| < lambda*ceil(lambda/2)",
                        sigma,
                        Relation::Lt,
                        q(lambda * half_up),
                    ),
                ],
            )
        }
        2 | 3 => {
            if !mu.is_positive() {
                return Err(bad("mu must be a positive rational"));
            }
            params.push(("mu", mu.to_string()));
            if bullet == 2 {
                let three_mu = q(3) * mu;
                (
                    CriterionId::MainBullet2,
                    vec![
                        Inequality::new(
                            "xi = floor(3mu - 3)",
                            q(xi),
                            Relation::Eq,
                            q(floor_i64(&(&three_mu - q(3)))),
                        ),
                        Inequality::new("|Sigma| <= lambda*mu", sigma, Relation::Le, &lam * mu),
                        Inequality::new(
                            "floor(3mu) - mu - 2 >= lambda",
                            q(floor_i64(&three_mu)) - mu - q(2),
                            Relation::Ge,
                            lam.clone(),
                        ),
                        Inequality::new("lambda >= mu", lam, Relation::Ge, mu.clone()),
                    ],
                )
            } else {
                (
                    CriterionId::MainBullet3,
                    vec![
                        Inequality::new(
                            "xi = floor(n*mu)",
                            q(xi),
                            Relation::Eq,
                            q(floor_i64(&(q(n) * mu))),
                        ),
                        Inequality::new("|Sigma| <= lambda*mu", sigma, Relation::Le, &lam * mu),
                        Inequality::new("(n-1)mu >= lambda", q(n - 1) * mu, Relation::Ge, lam),
                    ],
                )
            }
        }
        _ => return Err(bad(format!("no bullet {bullet}"))),
    };
    Ok(CriterionVerdict::build(id, ineqs, xi, &params))
}

fn check_main_params(n: i64, lambda: i64, size: i64, xi: i64) -> Result<()> {
    if n < 2 || lambda < 2 || size < 0 || xi < 0 {
        return Err(bad("need n >= 2, lambda >= 2, |Sigma| >= 0, xi >= 0"));
    }
    Ok(())
}

/// Candidate values of `mu` for bullets 2 and 3: the grid `t/60` over the
/// feasible range, plus boundary values solved in closed form. Sorted,
/// deduplicated.
pub fn mu_candidates(bullet: u8, n: i64, lambda: i64, size: i64, xi: i64) -> Vec<BigRational> {
    let top = match bullet {
        2 => ratio(xi + 4, 3),
        _ => ratio(xi + 1, n),
    }
    .max(q(lambda + 3));
    let steps = floor_i64(&(top * q(MU_DENOMINATOR)));
    let mut out: Vec<BigRational> = (1..=steps).map(|t| ratio(t, MU_DENOMINATOR)).collect();
    out.extend([
        ratio(size, lambda),
        ratio(lambda, n - 1),
        ratio(xi, n),
        ratio(xi + 3, 3),
        q(lambda),
    ]);
    out.retain(|m| m.is_positive());
    out.sort();
    out.dedup();
    out
}

/// First certifying bullet of the main criterion; for bullets 2 and 3 the
/// smallest certifying `mu` among [`mu_candidates`] is reported.
pub fn theorem_main_certify(n: i64, lambda: i64, size: i64, xi: i64) -> Result<CriterionVerdict> {
    check_main_params(n, lambda, size, xi)?;
    let first = main_bullet(1, n, lambda, size, xi, &BigRational::one())?;
    if first.applies {
        return Ok(first);
    }
    for bullet in [2, 3] {
        for mu in mu_candidates(bullet, n, lambda, size, xi) {
            let v = main_bullet(bullet, n, lambda, size, xi, &mu)?;
            if v.applies {
                return Ok(v);
            }
        }
    }
    let mut out = first;
    out.notes.push(format!(
        "no mu in the searched grid (denominator {MU_DENOMINATOR}) satisfies bullet 2 or 3"
    ));
    Ok(out)
}

/// `|Sigma| < (2r-1)(r-eps)` gives independence in degree `3r-4-eps`,
/// provided at most `(2r-1)k` points lie on any curve of degree `k`. Pass the
/// certified incidence slope `lambda` when one is known; without it the
/// verdict is marked conditional.
pub fn prop_3r4_certify(
    r: i64,
    eps: i64,
    size: i64,
    incidence_lambda: Option<i64>,
) -> Result<CriterionVerdict> {
    if r < 2 || eps < 0 || size < 0 {
        return Err(bad("need r >= 2, eps >= 0, |Sigma| >= 0"));
    }
    let degree = 3 * r - 4 - eps;
    if degree < 0 {
        return Err(bad(format!("degree 3r-4-eps = {degree} is negative")));
    }
    let mut ineqs = vec![Inequality::new(
        "|Sigma| < (2r-1)(r-eps)",
        q(size),
        Relation::Lt,
        q((2 * r - 1) * (r - eps)),
    )];
    let mut params = vec![
        ("r", r.to_string()),
        ("eps", eps.to_string()),
        ("|Sigma|", size.to_string()),
    ];
    if let Some(l) = incidence_lambda {
        ineqs.push(Inequality::new(
            "lambda <= 2r-1",
            q(l),
            Relation::Le,
            q(2 * r - 1),
        ));
        params.push(("lambda", l.to_string()));
    }
    let mut v = CriterionVerdict::build(CriterionId::Prop3r4, ineqs, degree, &params);
    if incidence_lambda.is_none() {
        v.conditional =
            Some("assumes at most (2r-1)k points of Sigma on every curve of degree k".into());
    }
    Ok(v)
}

pub fn app_double_solid(r: i64, nsing: i64) -> Result<CriterionVerdict> {
    if r < 2 || nsing < 0 {
        return Err(bad("need r >= 2, nsing >= 0"));
    }
    let ineqs = vec![Inequality::new(
        "|Sing(S)| < (2r-1)r",
        q(nsing),
        Relation::Lt,
        q((2 * r - 1) * r),
    )];
    Ok(CriterionVerdict::build(
        CriterionId::ThmDoubleSolid,
        ineqs,
        3 * r - 4,
        &[("r", r.to_string()), ("|Sing(S)|", nsing.to_string())],
    ))
}

pub fn app_hypersurface(d: i64, nsing: i64) -> Result<CriterionVerdict> {
    if d < 3 || nsing < 0 {
        return Err(bad("need d >= 3, nsing >= 0"));
    }
    let ineqs = vec![Inequality::new(
        "|Sing(V)| <= 2(d-1)^2/3",
        q(nsing),
        Relation::Le,
        ratio(2 * (d - 1) * (d - 1), 3),
    )];
    Ok(CriterionVerdict::build(
        CriterionId::ThmHypersurface,
        ineqs,
        2 * d - 5,
        &[("d", d.to_string()), ("|Sing(V)|", nsing.to_string())],
    ))
}

fn check_ci(m: i64, k: i64, nsing: i64) -> Result<()> {
    if k < 1 || m < k || nsing < 0 {
        return Err(bad("need m >= k >= 1, nsing >= 0"));
    }
    Ok(())
}

const SMOOTH_G: &str = "assumes the hypersurface G is smooth";

pub fn app_ci1(m: i64, k: i64, nsing: i64) -> Result<CriterionVerdict> {
    check_ci(m, k, nsing)?;
    let ineqs = vec![
        Inequality::new(
            "|Sing(Y)| <= (m+k-2)(2m+k-6)/5",
            q(nsing),
            Relation::Le,
            ratio((m + k - 2) * (2 * m + k - 6), 5),
        ),
        Inequality::new("m >= 7", q(m), Relation::Ge, q(7)),
    ];
    let mut v = CriterionVerdict::build(
        CriterionId::ThmCi1,
        ineqs,
        2 * m + k - 6,
        &[
            ("m", m.to_string()),
            ("k", k.to_string()),
            ("|Sing(Y)|", nsing.to_string()),
        ],
    );
    v.conditional = Some(SMOOTH_G.into());
    Ok(v)
}

pub fn app_ci2(m: i64, k: i64, nsing: i64) -> Result<CriterionVerdict> {
    check_ci(m, k, nsing)?;
    let ineqs = vec![
        Inequality::new(
            "|Sing(Y)| <= (2m+k-3)(m+k-2)/3",
            q(nsing),
            Relation::Le,
            ratio((2 * m + k - 3) * (m + k - 2), 3),
        ),
        Inequality::new("m >= k+6", q(m), Relation::Ge, q(k + 6)),
    ];
    let mut v = CriterionVerdict::build(
        CriterionId::ThmCi2,
        ineqs,
        2 * m + k - 6,
        &[
            ("m", m.to_string()),
            ("k", k.to_string()),
            ("|Sing(Y)|", nsing.to_string()),
        ],
    );
    v.conditional = Some(SMOOTH_G.into());
    Ok(v)
}

pub fn app_double_hypersurface(d: i64, r: i64, nsing: i64) -> Result<CriterionVerdict> {
    if d < 2 || 2 * r < d || nsing < 0 {
        return Err(bad("need d >= 2, 2r >= d, nsing >= 0"));
    }
    let ineqs = vec![
        Inequality::new(
            "|Sing(R)| <= (2r+d-2)r/2",
            q(nsing),
            Relation::Le,
            ratio((2 * r + d - 2) * r, 2),
        ),
        Inequality::new("r >= d+7", q(r), Relation::Ge, q(d + 7)),
    ];
    Ok(CriterionVerdict::build(
        CriterionId::ThmDoubleHypersurface,
        ineqs,
        3 * r + d - 5,
        &[
            ("d", d.to_string()),
            ("r", r.to_string()),
            ("|Sing(R)|", nsing.to_string()),
        ],
    ))
}

/// `f = scalar * (g_r^2 - g_1 g_{2r-1})` with `g_1` a plane. The identity is
/// checked term by term whenever a witness is built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodalSurfaceWitness {
    plane: HomoPoly,
    g_r: HomoPoly,
    g_2r1: HomoPoly,
    scalar: crate::field::Scalar,
}

impl NodalSurfaceWitness {
    pub fn new(
        f: &HomoPoly,
        plane: HomoPoly,
        g_r: HomoPoly,
        g_2r1: HomoPoly,
        scalar: crate::field::Scalar,
    ) -> Option<Self> {
        let field = f.field();
        if plane.degree() != 1 || field.is_zero(&scalar) || g_r.degree() * 2 != f.degree() {
            return None;
        }
        let rhs = g_r
            .square()
            .sub(&plane.mul(&g_2r1).ok()?)
            .ok()?
            .scale(&scalar);
        (rhs == *f).then_some(NodalSurfaceWitness {
            plane,
            g_r,
            g_2r1,
            scalar,
        })
    }

    pub fn plane(&self) -> &HomoPoly {
        &self.plane
    }

    pub fn g_r(&self) -> &HomoPoly {
        &self.g_r
    }

    pub fn g_2r_minus_1(&self) -> &HomoPoly {
        &self.g_2r1
    }

    pub fn scalar(&self) -> &crate::field::Scalar {
        &self.scalar
    }
}

impl Serialize for NodalSurfaceWitness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("NodalSurfaceWitness", 5)?;
        st.serialize_field("plane", &self.plane.to_text())?;
        st.serialize_field("g1", &self.plane.to_text())?;
        st.serialize_field("g_r", &self.g_r.to_text())?;
        st.serialize_field("g_2r_minus_1", &self.g_2r1.to_text())?;
        st.serialize_field("scalar", &self.scalar)?;
        st.end()
    }
}

/// Tries one plane: the restriction of `f` must be a square up to scalar, and
/// `f - scalar * G^2` must be divisible by the plane.
pub fn try_plane(f: &HomoPoly, plane: &HomoPoly) -> Option<NodalSurfaceWitness> {
    let field = f.field();
    let chart = (0..f.nvars())
        .find(|&i| !field.is_zero(&plane.coeff(&crate::poly::Monomial::var(f.nvars(), i))))?;
    let restricted = f.restrict_to_plane(plane, chart).ok()?;
    let (_, lc) = restricted.leading_term()?;
    let scalar = lc.clone();
    let normalized = restricted.scale(&field.inv(&scalar)?);
    let root = normalized.poly_sqrt().ok()?;
    let positions: Vec<usize> = (0..f.nvars()).filter(|&i| i != chart).collect();
    let g_r = root.embed(f.nvars(), &positions);
    let h = f.scale(&field.inv(&scalar)?).sub(&g_r.square()).ok()?;
    let quotient = h.divide_by_linear(plane)?;
    NodalSurfaceWitness::new(f, plane.clone(), g_r, quotient.neg(), scalar)
}

fn plane_through(a: &ProjPoint, b: &ProjPoint, c: &ProjPoint) -> Option<HomoPoly> {
    let f = a.field();
    let rows = [
        a.coords().to_vec(),
        b.coords().to_vec(),
        c.coords().to_vec(),
    ];
    let ech = Echelon::from_rows(f, a.coords().len(), &rows);
    (ech.rank() == 3).then(|| HomoPoly::linear(&ech.kernel()[0], f))
}

/// Planes spanned by triples of `sing` that contain at least `min_count`
/// points of it, each listed once.
pub fn candidate_planes(sing: &PointSet, min_count: usize) -> Vec<HomoPoly> {
    let pts = sing.points();
    let f = sing.field();
    let mut seen: Vec<Vec<crate::field::Scalar>> = Vec::new();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let Some(plane) = plane_through(&pts[i], &pts[j], &pts[k]) else {
                    continue;
                };
                let key = ProjPoint::canonicalize(plane.to_dense(), f)
                    .unwrap()
                    .coords()
                    .to_vec();
                if seen.contains(&key) {
                    continue;
                }
                seen.push(key);
                let count = pts
                    .iter()
                    .filter(|p| f.is_zero(&plane.eval(p.coords()).unwrap()))
                    .count();
                if count >= min_count {
                    out.push(plane);
                }
            }
        }
    }
    out
}

/// Looks for `f = g_r^2 - g_1 g_{2r-1}` on planes through node triples that
/// carry at least `2r` nodes, then on `extra_planes`. `None` only means that
/// no candidate plane produced a witness.
pub fn detect_nodal_surface_form(
    f: &HomoPoly,
    sing: &PointSet,
    extra_planes: &[HomoPoly],
) -> Option<NodalSurfaceWitness> {
    if f.nvars() != 4 || f.degree() % 2 == 1 || f.field().characteristic() == 2 {
        return None;
    }
    candidate_planes(sing, f.degree() as usize)
        .iter()
        .chain(extra_planes)
        .find_map(|plane| try_plane(f, plane))
}

/// Largest prime for which [`detect_nodal_surface_form_exhaustive`] runs.
pub const EXHAUSTIVE_PLANE_PRIME: u64 = 31;

/// Fallback: tries every plane of `P^3(F_p)`, for `p <= 31`.
pub fn detect_nodal_surface_form_exhaustive(f: &HomoPoly) -> Result<Option<NodalSurfaceWitness>> {
    let field = f.field();
    let p = field.modulus().ok_or(Error::NeedsPrimeField)?;
    if p > EXHAUSTIVE_PLANE_PRIME {
        return Err(bad(format!(
            "exhaustive plane search needs p <= {EXHAUSTIVE_PLANE_PRIME}"
        )));
    }
    if f.nvars() != 4 {
        return Err(Error::WrongAmbient {
            expected: 3,
            got: f.nvars() - 1,
        });
    }
    Ok(ProjectiveSpace::new(3, p).iter().find_map(|c| {
        let coeffs: Vec<_> = c.iter().map(|&x| field.from_u64(x)).collect();
        try_plane(f, &HomoPoly::linear(&coeffs, field))
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HongParkStatus {
    Factorial,
    NonfactorialStructured,
    NonfactorialUnstructured,
    OutOfRange,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct HongParkVerdict {
    pub status: HongParkStatus,
    pub r: u32,
    pub nsing: usize,
    /// `(2r-1)r + 1`.
    pub bound: usize,
    pub nodal: bool,
    pub defect: Option<DefectReport>,
    pub witness: Option<NodalSurfaceWitness>,
    pub evidence: &'static str,
    pub notes: Vec<String>,
}

/// Classifies the double solid branched over `f = 0` in `P^3(F_p)`: defect
/// of the nodes in degree `3r-4`, then the structural detector.
pub fn hong_park_classify(f: &HomoPoly, r: u32, cap: u64) -> Result<HongParkVerdict> {
    if f.nvars() != 4 {
        return Err(Error::WrongAmbient {
            expected: 3,
            got: f.nvars().saturating_sub(1),
        });
    }
    if r < 2 {
        return Err(bad("need r >= 2"));
    }
    if f.degree() != 2 * r {
        return Err(Error::DegreeMismatch(format!(
            "degree {} is not 2r = {}",
            f.degree(),
            2 * r
        )));
    }
    let inst = nodal_instance(vec![f.clone()], cap)?;
    let bound = ((2 * r - 1) * r + 1) as usize;
    let mut verdict = HongParkVerdict {
        status: HongParkStatus::Unknown,
        r,
        nsing: inst.node_count(),
        bound,
        nodal: inst.clean,
        defect: None,
        witness: None,
        evidence: "mod-p evidence",
        notes: inst.warnings.clone(),
    };
    if !inst.clean {
        verdict
            .notes
            .push("singular points are not all ordinary double points".into());
        return Ok(verdict);
    }
    if inst.node_count() > bound {
        verdict.status = HongParkStatus::OutOfRange;
        return Ok(verdict);
    }
    let report = defect(&inst.sing, 3 * r - 4);
    let dependent = report.defect > 0;
    verdict.defect = Some(report);
    if !dependent {
        verdict.status = HongParkStatus::Factorial;
        return Ok(verdict);
    }
    verdict.witness = detect_nodal_surface_form(f, &inst.sing, &[]);
    verdict.status = if verdict.witness.is_some() {
        HongParkStatus::NonfactorialStructured
    } else {
        verdict.notes.push(
            "no witness found among candidate planes; detector miss or mod-p artifact".into(),
        );
        HongParkStatus::NonfactorialUnstructured
    };
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::poly::parse_poly;
    use crate::projgeom::DEFAULT_SCAN_CAP;

    fn holds_all(v: &CriterionVerdict) -> bool {
        v.inequalities
            .iter()
            .all(|i| evaluate_inequality(&i.instantiated).unwrap() == i.holds)
    }

    #[test]
    fn main_examples() {
        let v = theorem_main_certify(3, 9, 44, 10).unwrap();
        assert_eq!(
            (v.criterion_id, v.applies, v.certified_degree),
            (CriterionId::MainBullet1, true, Some(10))
        );
        assert_eq!(v.inequalities[1].instantiated, "44 < 45");
        let v = theorem_main_certify(3, 2, 2, 0).unwrap();
        assert!(!v.applies);
        let v = main_bullet(3, 4, 4, 8, 8, &q(2)).unwrap();
        assert!(v.applies);
        assert!(theorem_main_certify(4, 4, 8, 8).unwrap().applies);
        assert!(holds_all(&v));
        assert!(theorem_main_certify(1, 4, 8, 8).is_err());
    }

    #[test]
    fn prop_examples() {
        let v = prop_3r4_certify(5, 0, 44, None).unwrap();
        assert_eq!((v.applies, v.certified_degree), (true, Some(11)));
        assert!(v.conditional.is_some());
        assert!(!prop_3r4_certify(5, 0, 45, None).unwrap().applies);
        let v = prop_3r4_certify(3, 1, 9, Some(5)).unwrap();
        assert_eq!(
            (v.applies, v.certified_degree, v.conditional.clone()),
            (true, Some(4), None)
        );
    }

    #[test]
    fn application_examples() {
        assert!(app_double_solid(2, 5).unwrap().applies);
        assert!(!app_double_solid(2, 6).unwrap().applies);
        assert!(app_double_solid(3, 14).unwrap().applies);
        let v = app_hypersurface(6, 16).unwrap();
        assert_eq!(v.inequalities[0].instantiated, "16 <= 50/3");
        assert!(v.applies);
        assert!(!app_hypersurface(6, 17).unwrap().applies);
        assert!(app_hypersurface(3, 2).unwrap().applies);
        let v = app_ci1(7, 2, 14).unwrap();
        assert_eq!(
            (v.applies, v.inequalities[0].instantiated.as_str()),
            (true, "14 <= 14")
        );
        assert!(!app_ci1(7, 2, 21).unwrap().applies);
        assert!(!app_ci1(6, 2, 0).unwrap().applies);
        assert!(!app_ci2(8, 2, 47).unwrap().applies);
        let v = app_double_hypersurface(2, 9, 81).unwrap();
        assert_eq!((v.applies, v.certified_degree), (true, Some(24)));
        assert!(app_hypersurface(2, 0).is_err());
        assert!(app_ci1(2, 3, 0).is_err());
    }

    #[test]
    fn inequality_parser() {
        assert!(evaluate_inequality("16 <= 50/3").unwrap());
        assert!(!evaluate_inequality("17 <= 50/3").unwrap());
        assert!(evaluate_inequality("-1 < 0").unwrap());
        assert!(evaluate_inequality("1 <== 2").is_err());
        assert!(evaluate_inequality("1 <").is_err());
    }

    #[test]
    fn constructed_witness_plane_x() {
        let f = FieldSpec::prime(101).unwrap();
        let gr = parse_poly("x^2 + y*z", 4, f).unwrap();
        let cubic = parse_poly("y^3 + 2*z^3 - w^3 + x*y*w", 4, f).unwrap();
        let x = parse_poly("x", 4, f).unwrap();
        let poly = gr.square().sub(&x.mul(&cubic).unwrap()).unwrap();
        let w = detect_nodal_surface_form(&poly, &PointSet::new(3, f), &[x.clone()]).unwrap();
        assert_eq!(w.plane(), &x);
        let rebuilt = w
            .g_r()
            .square()
            .sub(&w.plane().mul(w.g_2r_minus_1()).unwrap())
            .unwrap();
        assert_eq!(rebuilt.scale(w.scalar()), poly);
    }

    #[test]
    fn smooth_quartic_is_factorial() {
        let f = FieldSpec::prime(101).unwrap();
        let fermat = parse_poly("x^4 + y^4 + z^4 + w^4", 4, f).unwrap();
        let v = hong_park_classify(&fermat, 2, DEFAULT_SCAN_CAP).unwrap();
        assert_eq!((v.status, v.nsing), (HongParkStatus::Factorial, 0));
        assert!(detect_nodal_surface_form(&fermat, &PointSet::new(3, f), &[]).is_none());
        assert!(matches!(
            hong_park_classify(&fermat, 3, DEFAULT_SCAN_CAP),
            Err(Error::DegreeMismatch(_))
        ));
    }
}
