//! Linear conditions imposed by finite point sets on forms of a fixed
//! degree: evaluation matrices, the defect `|Sigma| - rank`, separator
//! certificates, the separator combiner, curve-incidence counts, intersection
//! certificates and the blow-up base-point checker.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::linalg::{bareiss_rank, fraction_free_profile, integer_row, Echelon};
use crate::poly::{monomial_basis, HomoPoly, Monomial};
use crate::projgeom::{PointSet, ProjPoint, ProjectiveSpace};
use crate::sing::CompiledPoly;

/// A linear functional on forms of degree `xi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Functional {
    /// `F -> F(P)`.
    Point(ProjPoint),
    /// `F -> d/dt F(P + t v)` at `t = 0`.
    Directional {
        point: ProjPoint,
        direction: Vec<Scalar>,
    },
}

/// Values of a list of functionals on the monomial basis of degree `xi`.
#[derive(Clone, Debug)]
pub struct EvalMatrix {
    pub functionals: Vec<Functional>,
    pub columns: Vec<Monomial>,
    pub entries: Vec<Vec<Scalar>>,
    pub xi: u32,
    pub field: FieldSpec,
}

impl EvalMatrix {
    pub fn rank(&self) -> usize {
        Echelon::from_rows(self.field, self.columns.len(), &self.entries).rank()
    }
}

/// Evaluation row of `point` on `basis`.
pub fn point_row(point: &ProjPoint, basis: &[Monomial]) -> Vec<Scalar> {
    let f = point.field();
    basis.iter().map(|m| m.eval(&f, point.coords())).collect()
}

/// Row of the functional `F -> sum_i v_i dF/dx_i (P)` on `basis`.
pub fn directional_row(point: &ProjPoint, direction: &[Scalar], basis: &[Monomial]) -> Vec<Scalar> {
    let f = point.field();
    let coords = point.coords();
    basis
        .iter()
        .map(|m| {
            let e = m.exponents();
            let mut acc = f.zero();
            for (i, v) in direction.iter().enumerate() {
                if e[i] == 0 || f.is_zero(v) {
                    continue;
                }
                let mut d = e.to_vec();
                d[i] -= 1;
                let term = Monomial::new(d).eval(&f, coords);
                let scaled = f.mul(&f.mul(&term, &f.from_u64(e[i] as u64)), v);
                acc = f.add(&acc, &scaled);
            }
            acc
        })
        .collect()
}

fn functional_row(fun: &Functional, basis: &[Monomial]) -> Vec<Scalar> {
    match fun {
        Functional::Point(p) => point_row(p, basis),
        Functional::Directional { point, direction } => directional_row(point, direction, basis),
    }
}

/// Evaluation matrix of `set` at degree `xi`, followed by one directional
/// row per `(point, direction)` in `extra`. Rows are built in parallel.
pub fn evaluation_matrix(
    set: &PointSet,
    xi: u32,
    extra: &[(ProjPoint, Vec<Scalar>)],
) -> EvalMatrix {
    let columns = monomial_basis(set.ambient_dim() + 1, xi);
    let functionals: Vec<Functional> = set
        .iter()
        .cloned()
        .map(Functional::Point)
        .chain(extra.iter().map(|(p, v)| Functional::Directional {
            point: p.clone(),
            direction: v.clone(),
        }))
        .collect();
    let entries = functionals
        .par_iter()
        .map(|fun| functional_row(fun, &columns))
        .collect();
    EvalMatrix {
        functionals,
        columns,
        entries,
        xi,
        field: set.field(),
    }
}

/// Outcome of a defect computation. `defect` equals `h^1(I_Sigma(xi))`.
#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub size: usize,
    pub rank: usize,
    pub defect: usize,
    pub xi: u32,
    pub field: FieldSpec,
    /// Points whose row lies in the span of the rows before them.
    pub dependent_points: Vec<ProjPoint>,
    #[serde(skip)]
    pub dependent_indices: Vec<usize>,
}

/// Rank of the evaluation matrix, via modular elimination over `F_p` and
/// Bareiss fraction-free elimination over `QQ`, scanning rows in set order.
pub fn defect(set: &PointSet, xi: u32) -> DefectReport {
    let m = evaluation_matrix(set, xi, &[]);
    let independent: Vec<bool> = if set.field().is_prime_field() {
        let mut ech = Echelon::new(set.field(), m.columns.len());
        m.entries.iter().map(|r| ech.insert(r.clone())).collect()
    } else {
        let ints: Vec<_> = m
            .entries
            .iter()
            .map(|r| {
                let rats: Vec<BigRational> = r
                    .iter()
                    .map(|s| match s {
                        Scalar::Rat(q) => q.clone(),
                        Scalar::Mod(_) => unreachable!("rational set"),
                    })
                    .collect();
                integer_row(&rats)
            })
            .collect();
        let profile = fraction_free_profile(&ints);
        debug_assert_eq!(profile.iter().filter(|b| **b).count(), bareiss_rank(&ints));
        profile
    };
    let rank = independent.iter().filter(|b| **b).count();
    let dependent_indices: Vec<usize> = independent
        .iter()
        .enumerate()
        .filter(|(_, b)| !**b)
        .map(|(i, _)| i)
        .collect();
    DefectReport {
        size: set.len(),
        rank,
        defect: set.len() - rank,
        xi,
        field: set.field(),
        dependent_points: dependent_indices
            .iter()
            .map(|&i| set.points()[i].clone())
            .collect(),
        dependent_indices,
    }
}

pub fn is_independent(set: &PointSet, xi: u32) -> bool {
    defect(set, xi).defect == 0
}

/// A form of degree `xi` vanishing on `Sigma \ P` and not at `P`. Both
/// conditions are checked whenever a certificate is constructed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatorCertificate {
    point: ProjPoint,
    form: HomoPoly,
}

impl SeparatorCertificate {
    /// Verifies the two defining evaluations against `set`.
    pub fn new(set: &PointSet, point: ProjPoint, form: HomoPoly) -> Result<Self> {
        let f = set.field();
        if !set.contains(&point) {
            return Err(Error::NotInSet);
        }
        if form.nvars() != set.ambient_dim() + 1 {
            return Err(Error::DimensionMismatch(
                "separator in the wrong space".into(),
            ));
        }
        if f.is_zero(&form.eval(point.coords())?) {
            return Err(Error::BadParams(format!("form vanishes at {point}")));
        }
        for q in set.iter().filter(|q| **q != point) {
            if !f.is_zero(&form.eval(q.coords())?) {
                return Err(Error::BadParams(format!("form does not vanish at {q}")));
            }
        }
        Ok(SeparatorCertificate { point, form })
    }

    pub fn point(&self) -> &ProjPoint {
        &self.point
    }

    pub fn form(&self) -> &HomoPoly {
        &self.form
    }

    pub fn degree(&self) -> u32 {
        self.form.degree()
    }

    /// Re-checks the certificate against a (possibly larger) set.
    pub fn verify(&self, set: &PointSet) -> bool {
        Self::new(set, self.point.clone(), self.form.clone()).is_ok()
    }
}

impl Serialize for SeparatorCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SeparatorCertificate", 2)?;
        st.serialize_field("point", &self.point)?;
        st.serialize_field("form_text", &self.form.to_text())?;
        st.end()
    }
}

/// Proof that no separator exists: the row of `point` equals
/// `sum c_j * row(Q_j)` over the other points.
#[derive(Clone, Debug, Serialize)]
pub struct SeparatorFailure {
    pub point: ProjPoint,
    pub combination: Vec<(ProjPoint, Scalar)>,
}

#[derive(Clone, Debug)]
pub enum SeparatorOutcome {
    Certificate(SeparatorCertificate),
    Dependent(SeparatorFailure),
}

impl SeparatorOutcome {
    pub fn certificate(self) -> Option<SeparatorCertificate> {
        match self {
            SeparatorOutcome::Certificate(c) => Some(c),
            SeparatorOutcome::Dependent(_) => None,
        }
    }
}

/// Solves "vanish on `Sigma \ P`" and picks a solution not vanishing at `P`.
pub fn separator(set: &PointSet, point: &ProjPoint, xi: u32) -> Result<SeparatorOutcome> {
    let idx = set.index_of(point).ok_or(Error::NotInSet)?;
    let f = set.field();
    let basis = monomial_basis(set.ambient_dim() + 1, xi);
    let others = set.without(idx);
    let m = evaluation_matrix(&others, xi, &[]);
    let target = point_row(point, &basis);
    let kernel = Echelon::from_rows(f, basis.len(), &m.entries).kernel();
    let dot = |u: &[Scalar], v: &[Scalar]| {
        u.iter()
            .zip(v)
            .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
    };
    if let Some(k) = kernel.iter().find(|k| !f.is_zero(&dot(k, &target))) {
        let form = HomoPoly::from_dense(set.ambient_dim() + 1, xi, f, k);
        return Ok(SeparatorOutcome::Certificate(SeparatorCertificate::new(
            set,
            point.clone(),
            form,
        )?));
    }
    // dependency among the rows: kernel of the transposed system [others; P]
    let nrows = others.len() + 1;
    let transposed: Vec<Vec<Scalar>> = (0..basis.len())
        .map(|c| {
            m.entries
                .iter()
                .map(|r| r[c].clone())
                .chain(std::iter::once(target[c].clone()))
                .collect()
        })
        .collect();
    let deps = Echelon::from_rows(f, nrows, &transposed).kernel();
    let dep = deps
        .iter()
        .find(|d| !f.is_zero(&d[nrows - 1]))
        .expect("row of P is dependent when no separator exists");
    let scale = f.neg(&f.inv(&dep[nrows - 1]).unwrap());
    let combination = others
        .iter()
        .zip(dep)
        .filter(|(_, c)| !f.is_zero(c))
        .map(|(q, c)| (q.clone(), f.mul(c, &scale)))
        .collect();
    Ok(SeparatorOutcome::Dependent(SeparatorFailure {
        point: point.clone(),
        combination,
    }))
}

/// Separators for every point, or `None` as soon as one point fails.
pub fn all_separators(set: &PointSet, xi: u32) -> Result<Option<Vec<SeparatorCertificate>>> {
    let mut out = Vec::with_capacity(set.len());
    for p in set.iter() {
        match separator(set, p, xi)? {
            SeparatorOutcome::Certificate(c) => out.push(c),
            SeparatorOutcome::Dependent(_) => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Combines separators of `lambda` at degree `xi` and of `delta` at degree
/// `xi - zeta` with a form `g` of degree `zeta` vanishing on `lambda` and at
/// no point of `delta` into separators of `lambda ∪ delta` at degree `xi`.
///
/// For `Q_i` in `delta` the certificate is `G_i = g * s_i`. For `Q` in
/// `lambda` it is `F + sum mu_i G_i` with `mu_i = -F(Q_i) / G_i(Q_i)`.
/// Output order: `lambda` first, then `delta`.
pub fn swap_combine(
    lambda: &PointSet,
    seps_lambda: &[SeparatorCertificate],
    delta: &PointSet,
    seps_delta: &[SeparatorCertificate],
    g: &HomoPoly,
) -> Result<Vec<SeparatorCertificate>> {
    let f = lambda.field();
    if delta.field() != f || g.field() != f {
        return Err(Error::FieldMismatch);
    }
    if lambda.iter().any(|p| delta.contains(p)) {
        return Err(Error::Overlap);
    }
    if seps_lambda.len() != lambda.len() || seps_delta.len() != delta.len() {
        return Err(Error::BadParams(
            "one separator per point is required".into(),
        ));
    }
    let xi = seps_lambda
        .first()
        .map(|s| s.degree())
        .unwrap_or(g.degree());
    if g.degree() > xi {
        return Err(Error::DegreeMismatch(format!(
            "auxiliary degree {} exceeds {xi}",
            g.degree()
        )));
    }
    if seps_lambda.iter().any(|s| s.degree() != xi)
        || seps_delta.iter().any(|s| s.degree() + g.degree() != xi)
    {
        return Err(Error::DegreeMismatch(
            "separator degrees must be xi on lambda and xi - zeta on delta".into(),
        ));
    }
    for p in lambda {
        if !f.is_zero(&g.eval(p.coords())?) {
            return Err(Error::BadParams(format!(
                "auxiliary form does not vanish at {p}"
            )));
        }
    }
    for q in delta {
        if f.is_zero(&g.eval(q.coords())?) {
            return Err(Error::GVanishesOnDelta);
        }
    }
    for (p, s) in lambda.iter().zip(seps_lambda) {
        if s.point() != p || !s.verify(lambda) {
            return Err(Error::BadParams(format!(
                "invalid separator supplied for {p}"
            )));
        }
    }
    for (q, s) in delta.iter().zip(seps_delta) {
        if s.point() != q || !s.verify(delta) {
            return Err(Error::BadParams(format!(
                "invalid separator supplied for {q}"
            )));
        }
    }
    let union = PointSet::from_points(
        lambda.ambient_dim(),
        f,
        lambda.iter().chain(delta.iter()).cloned(),
    )?;
    let lifted: Vec<HomoPoly> = seps_delta
        .iter()
        .map(|s| g.mul(s.form()))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(union.len());
    for s in seps_lambda {
        let mut form = s.form().clone();
        for (q, gi) in delta.iter().zip(&lifted) {
            let mu = f.neg(&f.div(&s.form().eval(q.coords())?, &gi.eval(q.coords())?));
            form = form.add(&gi.scale(&mu))?;
        }
        out.push(SeparatorCertificate::new(&union, s.point().clone(), form)?);
    }
    for (q, gi) in delta.iter().zip(lifted) {
        out.push(SeparatorCertificate::new(&union, q.clone(), gi)?);
    }
    Ok(out)
}

/// The line through two distinct points, as an echelon basis.
fn line_through(a: &ProjPoint, b: &ProjPoint) -> Echelon {
    Echelon::from_rows(
        a.field(),
        a.coords().len(),
        [&a.coords().to_vec(), &b.coords().to_vec()],
    )
}

/// Maximum number of points of `set` on a line, with a witness pair of
/// indices spanning a maximal line.
pub fn max_on_lines(set: &PointSet) -> Result<(usize, (usize, usize))> {
    if set.len() < 2 {
        return Err(Error::TooFew(2));
    }
    let pts = set.points();
    let mut best = (2, (0, 1));
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let line = line_through(&pts[i], &pts[j]);
            let count = 2 + pts
                .iter()
                .enumerate()
                .filter(|(k, q)| *k != i && *k != j && line.contains(q.coords()))
                .count();
            if count > best.0 {
                best = (count, (i, j));
            }
        }
    }
    Ok(best)
}

/// Upper limit on the size of sets handed to [`max_on_conics`].
pub const MAX_CONIC_SET: usize = 40;

fn form_from_line(line: &Echelon, field: FieldSpec) -> HomoPoly {
    let k = line.kernel();
    HomoPoly::linear(&k[0], field)
}

fn count_zeros(form: &HomoPoly, set: &PointSet) -> usize {
    let f = set.field();
    set.iter()
        .filter(|p| f.is_zero(&form.eval(p.coords()).unwrap()))
        .count()
}

/// Best pair of lines: maximum of `|(L ∪ L') ∩ Sigma|`.
fn best_line_pair(set: &PointSet) -> (usize, HomoPoly) {
    let f = set.field();
    let pts = set.points();
    let mut best: Option<(usize, HomoPoly)> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let line = line_through(&pts[i], &pts[j]);
            let on: Vec<bool> = pts.iter().map(|q| line.contains(q.coords())).collect();
            let rest: Vec<ProjPoint> = pts
                .iter()
                .zip(&on)
                .filter(|(_, b)| !**b)
                .map(|(q, _)| q.clone())
                .collect();
            let first = form_from_line(&line, f);
            let (extra, second) = match rest.len() {
                0 => (0, first.clone()),
                1 => {
                    // any line through the single remaining point
                    let other = (0..3)
                        .map(|c| {
                            let mut e = vec![f.zero(); 3];
                            e[c] = f.one();
                            ProjPoint::canonicalize(e, f).unwrap()
                        })
                        .find(|e| *e != rest[0])
                        .unwrap();
                    (1, form_from_line(&line_through(&rest[0], &other), f))
                }
                _ => {
                    let rest_set = PointSet::from_points(2, f, rest).unwrap();
                    let (c, (a, b)) = max_on_lines(&rest_set).unwrap();
                    let l2 = line_through(&rest_set.points()[a], &rest_set.points()[b]);
                    (c, form_from_line(&l2, f))
                }
            };
            let count = on.iter().filter(|b| **b).count() + extra;
            if best.as_ref().is_none_or(|(c, _)| count > *c) {
                best = Some((count, first.mul(&second).unwrap()));
            }
        }
    }
    best.expect("at least two points")
}

/// Maximum number of points of `set ⊂ P^2` on a conic, with a witness conic.
/// Every 5-subset with a unique conic through it is tried; 5-subsets with a
/// pencil of conics have four collinear points and are covered by line pairs.
pub fn max_on_conics(set: &PointSet) -> Result<(usize, HomoPoly)> {
    if set.ambient_dim() != 2 {
        return Err(Error::WrongAmbient {
            expected: 2,
            got: set.ambient_dim(),
        });
    }
    if set.len() > MAX_CONIC_SET {
        return Err(Error::TooLarge {
            size: set.len() as u128,
            cap: MAX_CONIC_SET as u64,
        });
    }
    let f = set.field();
    let basis = monomial_basis(3, 2);
    let rows: Vec<Vec<Scalar>> = set.iter().map(|p| point_row(p, &basis)).collect();
    if set.len() <= 5 {
        let k = Echelon::from_rows(f, 6, &rows).kernel();
        return Ok((set.len(), HomoPoly::from_dense(3, 2, f, &k[0])));
    }
    let (mut best, mut witness) = best_line_pair(set);
    let n = set.len();
    let mut idx = [0usize, 1, 2, 3, 4];
    loop {
        let ech = Echelon::from_rows(f, 6, idx.iter().map(|&i| &rows[i]));
        if ech.rank() == 5 {
            let conic = HomoPoly::from_dense(3, 2, f, &ech.kernel()[0]);
            let c = count_zeros(&conic, set);
            if c > best {
                best = c;
                witness = conic;
            }
        }
        // next 5-combination in lexicographic order
        let mut k = 5;
        loop {
            if k == 0 {
                return Ok((best, witness));
            }
            k -= 1;
            if idx[k] < n - 5 + k {
                break;
            }
        }
        idx[k] += 1;
        for t in k + 1..5 {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Forms of a common degree `m` whose common zero locus over `F_p` is exactly
/// the point set; by Bezout at most `m * k` of its points lie on a curve of
/// degree `k`.
#[derive(Clone, Debug, Serialize)]
pub struct IncidenceCertificate {
    generators: Vec<HomoPoly>,
    degree: u32,
}

impl IncidenceCertificate {
    pub fn generators(&self) -> &[HomoPoly] {
        &self.generators
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Certified bound on the number of points on a curve of degree `k`.
    pub fn bound(&self, k: u32) -> u64 {
        self.degree as u64 * k as u64
    }
}

/// Checks by full scan that the common zeros of `generators` are exactly
/// `set`; on success certifies `nu_k <= m k`.
pub fn incidence_bound_from_intersection(
    set: &PointSet,
    generators: &[HomoPoly],
    cap: u64,
) -> Result<IncidenceCertificate> {
    let f = set.field();
    let p = f.modulus().ok_or(Error::NeedsPrimeField)?;
    let first = generators
        .first()
        .ok_or_else(|| Error::BadParams("no generators".into()))?;
    let m = first.degree();
    if generators.iter().any(|g| g.degree() != m) {
        return Err(Error::DegreeMismatch(
            "generators must share one degree".into(),
        ));
    }
    if generators
        .iter()
        .any(|g| g.nvars() != set.ambient_dim() + 1 || g.field() != f)
    {
        return Err(Error::DimensionMismatch(
            "generators live in another space".into(),
        ));
    }
    let compiled = generators
        .iter()
        .map(CompiledPoly::new)
        .collect::<Result<Vec<_>>>()?;
    let space = ProjectiveSpace::new(set.ambient_dim(), p);
    let zeros = space.par_filter(cap, |c| compiled.iter().all(|g| g.eval(c) == 0))?;
    let zero_set: Vec<ProjPoint> = zeros
        .iter()
        .map(|c| ProjPoint::from_residues(c, f))
        .collect();
    let mut diff: Vec<String> = zero_set
        .iter()
        .filter(|q| !set.contains(q))
        .map(|q| q.to_string())
        .collect();
    let zero_lookup = PointSet::from_points(set.ambient_dim(), f, zero_set)?;
    diff.extend(
        set.iter()
            .filter(|q| !zero_lookup.contains(q))
            .map(|q| q.to_string()),
    );
    if !diff.is_empty() {
        return Err(Error::LocusMismatch(diff));
    }
    Ok(IncidenceCertificate {
        generators: generators.to_vec(),
        degree: m,
    })
}

/// Three-valued verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tristate {
    Yes,
    No,
    Unknown,
}

/// One instance of the curve-incidence hypothesis for degree `k`.
#[derive(Clone, Debug, Serialize)]
pub struct IncidenceCheck {
    pub k: u32,
    /// `k (xi + 3 - k) - 2`.
    pub limit: u64,
    /// Exact `nu_k` (k <= 2) or the best available upper bound.
    pub value: u64,
    pub exact: bool,
    pub status: Tristate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseWitness {
    Point {
        point: ProjPoint,
    },
    Direction {
        point: ProjPoint,
        direction: Vec<Scalar>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ScanResult {
    Free,
    BasePoint { witness: BaseWitness, total: usize },
    NotScanned,
}

#[derive(Clone, Debug, Serialize)]
pub struct BeseReport {
    pub xi: u32,
    pub delta: usize,
    /// `max(h (xi + 3 - h) - 1, h^2)` with `h = floor((xi + 3) / 2)`.
    pub delta_bound: u64,
    pub delta_ok: bool,
    pub incidence: Vec<IncidenceCheck>,
    pub hypotheses_hold: Tristate,
    pub scan_label: &'static str,
    pub scan_result: ScanResult,
}

/// Sufficient conditions for `|xi H - sum E_i|` on the blow-up of `set ⊂ P^2`
/// to be base-point free, together with an exhaustive scan for `F_p`-rational
/// base points and first-order infinitely near base points.
///
/// `nu_1` and `nu_2` are computed exactly; for `k >= 3` the bound is the
/// smaller of `|set|` and the certificate's `m k`.
pub fn bese_check(
    set: &PointSet,
    xi: u32,
    certificate: Option<&IncidenceCertificate>,
    cap: u64,
) -> Result<BeseReport> {
    if xi < 3 {
        return Err(Error::XiTooSmall(xi));
    }
    if set.ambient_dim() != 2 {
        return Err(Error::WrongAmbient {
            expected: 2,
            got: set.ambient_dim(),
        });
    }
    let delta = set.len();
    let s = xi as u64 + 3;
    let h = s / 2;
    let delta_bound = (h * (s - h) - 1).max(h * h);
    let delta_ok = delta as u64 <= delta_bound;
    let mut incidence = Vec::new();
    for k in 1..=h {
        let limit = k * (s - k) - 2;
        let (value, exact) = match k {
            1 => (
                if delta >= 2 {
                    max_on_lines(set)?.0 as u64
                } else {
                    delta as u64
                },
                true,
            ),
            2 if delta <= MAX_CONIC_SET => (max_on_conics(set)?.0 as u64, true),
            _ => {
                let trivial = delta as u64;
                let cert = certificate.map_or(u64::MAX, |c| c.bound(k as u32));
                (trivial.min(cert), false)
            }
        };
        let status = match (value <= limit, exact) {
            (true, _) => Tristate::Yes,
            (false, true) => Tristate::No,
            (false, false) => Tristate::Unknown,
        };
        incidence.push(IncidenceCheck {
            k: k as u32,
            limit,
            value,
            exact,
            status,
        });
    }
    let hypotheses_hold = if !delta_ok || incidence.iter().any(|c| c.status == Tristate::No) {
        Tristate::No
    } else if incidence.iter().any(|c| c.status == Tristate::Unknown) {
        Tristate::Unknown
    } else {
        Tristate::Yes
    };
    let scan_result = match set.field().modulus() {
        Some(p) => base_point_scan(set, xi, p, cap)?,
        None => ScanResult::NotScanned,
    };
    Ok(BeseReport {
        xi,
        delta,
        delta_bound,
        delta_ok,
        incidence,
        hypotheses_hold,
        scan_label: "F_p-rational scan",
        scan_result,
    })
}

/// The `p + 1` tangent directions at `point`, spanned by the two coordinate
/// vectors off the point's pivot.
pub fn tangent_directions(point: &ProjPoint) -> Vec<Vec<Scalar>> {
    let f = point.field();
    let p = f.modulus().expect("prime field");
    let n = point.coords().len();
    let pivot = point.pivot();
    let free: Vec<usize> = (0..n).filter(|&c| c != pivot).collect();
    assert_eq!(free.len(), 2, "tangent directions are enumerated in P^2");
    ProjectiveSpace::new(1, p)
        .iter()
        .map(|st| {
            let mut v = vec![f.zero(); n];
            v[free[0]] = f.from_u64(st[0]);
            v[free[1]] = f.from_u64(st[1]);
            v
        })
        .collect()
}

fn base_point_scan(set: &PointSet, xi: u32, p: u64, cap: u64) -> Result<ScanResult> {
    let f = set.field();
    let basis = monomial_basis(3, xi);
    let rows = evaluation_matrix(set, xi, &[]).entries;
    let span = Echelon::from_rows(f, basis.len(), &rows);
    let space = ProjectiveSpace::new(2, p);
    let hits = space.par_filter(cap, |c| {
        let q = ProjPoint::from_residues(c, f);
        !set.contains(&q) && span.contains(&point_row(&q, &basis))
    })?;
    let mut witnesses: Vec<BaseWitness> = hits
        .iter()
        .map(|c| BaseWitness::Point {
            point: ProjPoint::from_residues(c, f),
        })
        .collect();
    let directional: Vec<Vec<BaseWitness>> = set
        .points()
        .par_iter()
        .map(|pt| {
            tangent_directions(pt)
                .into_iter()
                .filter(|v| span.contains(&directional_row(pt, v, &basis)))
                .map(|v| BaseWitness::Direction {
                    point: pt.clone(),
                    direction: v,
                })
                .collect()
        })
        .collect();
    witnesses.extend(directional.into_iter().flatten());
    Ok(match witnesses.first() {
        None => ScanResult::Free,
        Some(w) => ScanResult::BasePoint {
            witness: w.clone(),
            total: witnesses.len(),
        },
    })
}
