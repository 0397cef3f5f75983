//! Singular loci of hypersurfaces and codimension-two complete intersections
//! over `F_p` by exhaustive scan, plus ordinary-double-point checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{mul_mod, FieldSpec, Scalar};
use crate::linalg::Echelon;
use crate::poly::HomoPoly;
use crate::projgeom::{PointSet, ProjPoint, ProjectiveSpace};

/// A polynomial over `F_p` flattened for fast repeated evaluation on residue
/// vectors.
#[derive(Clone, Debug)]
pub(crate) struct CompiledPoly {
    p: u64,
    degree: usize,
    terms: Vec<(Vec<u32>, u64)>,
}

impl CompiledPoly {
    pub(crate) fn new(f: &HomoPoly) -> Result<Self> {
        let p = f.field().modulus().ok_or(Error::NeedsPrimeField)?;
        Ok(CompiledPoly {
            p,
            degree: f.degree() as usize,
            terms: f
                .terms()
                .map(|(m, c)| (m.exponents().to_vec(), FieldSpec::residue(c)))
                .collect(),
        })
    }

    fn powers(&self, coords: &[u64]) -> Vec<Vec<u64>> {
        coords
            .iter()
            .map(|&x| {
                let mut row = Vec::with_capacity(self.degree + 1);
                let mut acc = 1u64;
                row.push(1);
                for _ in 0..self.degree {
                    acc = acc * x % self.p;
                    row.push(acc);
                }
                row
            })
            .collect()
    }

    fn eval_with(&self, powers: &[Vec<u64>]) -> u64 {
        let p = self.p;
        let mut sum = 0u64;
        for (exps, c) in &self.terms {
            let mut t = *c;
            for (v, &e) in exps.iter().enumerate() {
                if e > 0 {
                    t = t * powers[v][e as usize] % p;
                }
            }
            sum += t;
            if sum >= p {
                sum -= p;
            }
        }
        sum
    }

    pub(crate) fn eval(&self, coords: &[u64]) -> u64 {
        self.eval_with(&self.powers(coords))
    }
}

fn to_scalars(field: FieldSpec, coords: &[u64]) -> Vec<Scalar> {
    coords.iter().map(|&c| field.from_u64(c)).collect()
}

fn check_scan_input(f: &HomoPoly) -> Result<u64> {
    let p = f.field().modulus().ok_or(Error::NeedsPrimeField)?;
    if f.is_zero() || f.degree() < 2 {
        return Err(Error::BadParams(
            "singular locus needs a nonzero form of degree >= 2".into(),
        ));
    }
    if (f.degree() as u64).is_multiple_of(p) {
        return Err(Error::CharDividesDegree {
            p,
            degree: f.degree(),
        });
    }
    Ok(p)
}

/// All points of `P^n(F_p)` where `f` and every partial derivative vanish,
/// in enumeration order. Every hit is re-verified with Horner evaluation.
pub fn singular_points(f: &HomoPoly, cap: u64) -> Result<PointSet> {
    let p = check_scan_input(f)?;
    let field = f.field();
    let n = f.nvars() - 1;
    let space = ProjectiveSpace::new(n, p);
    let value = CompiledPoly::new(f)?;
    let grad = f.gradient();
    let compiled_grad = grad
        .iter()
        .map(CompiledPoly::new)
        .collect::<Result<Vec<_>>>()?;
    let hits = space.par_filter(cap, |c| {
        let pw = value.powers(c);
        value.eval_with(&pw) == 0 && compiled_grad.iter().all(|g| g.eval_with(&pw) == 0)
    })?;
    let mut set = PointSet::new(n, field);
    for c in hits {
        let coords = to_scalars(field, &c);
        assert!(
            field.is_zero(&f.eval_horner(&coords)?)
                && grad.iter().all(|g| g
                    .eval_horner(&coords)
                    .map(|v| field.is_zero(&v))
                    .unwrap_or(false)),
            "scan hit failed re-verification"
        );
        set.push(ProjPoint::from_residues(&c, field))?;
    }
    Ok(set)
}

/// Points of `{F = G = 0}` where the 2 x (n+1) Jacobian has rank at most 1.
pub fn ci_singular_points(big: &HomoPoly, small: &HomoPoly, cap: u64) -> Result<PointSet> {
    let p = big.field().modulus().ok_or(Error::NeedsPrimeField)?;
    if big.field() != small.field() {
        return Err(Error::FieldMismatch);
    }
    if big.nvars() != small.nvars() {
        return Err(Error::DimensionMismatch(
            "complete intersection in different spaces".into(),
        ));
    }
    let field = big.field();
    let n = big.nvars() - 1;
    let space = ProjectiveSpace::new(n, p);
    let cf = CompiledPoly::new(big)?;
    let cg = CompiledPoly::new(small)?;
    let gf = big
        .gradient()
        .iter()
        .map(CompiledPoly::new)
        .collect::<Result<Vec<_>>>()?;
    let gg = small
        .gradient()
        .iter()
        .map(CompiledPoly::new)
        .collect::<Result<Vec<_>>>()?;
    let hits = space.par_filter(cap, |c| {
        if cf.eval(c) != 0 || cg.eval(c) != 0 {
            return false;
        }
        let a: Vec<u64> = gf.iter().map(|g| g.eval(c)).collect();
        let b: Vec<u64> = gg.iter().map(|g| g.eval(c)).collect();
        jacobian_rank_le_one(&a, &b, p)
    })?;
    let mut set = PointSet::new(n, field);
    for c in hits {
        set.push(ProjPoint::from_residues(&c, field))?;
    }
    Ok(set)
}

fn jacobian_rank_le_one(a: &[u64], b: &[u64], p: u64) -> bool {
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if mul_mod(a[i], b[j], p) != mul_mod(a[j], b[i], p) {
                return false;
            }
        }
    }
    true
}

fn minor_without(m: &[Vec<Scalar>], skip: usize) -> Vec<Vec<Scalar>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| *j != skip)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

fn refuse_small_char(field: FieldSpec, degree: u32) -> Result<()> {
    let p = field.characteristic();
    if p != 0 && p <= degree as u64 {
        return Err(Error::CharTooSmall(p));
    }
    Ok(())
}

/// Rank of the affine Hessian of `f` at the singular point `point`, in the
/// chart where the point's first nonzero coordinate is 1. The affine second
/// partials are the projective ones with the chart row and column removed.
pub fn hessian_rank_at(f: &HomoPoly, point: &ProjPoint) -> Result<usize> {
    refuse_small_char(f.field(), f.degree())?;
    let field = f.field();
    for g in f.gradient() {
        if !field.is_zero(&g.eval(point.coords())?) {
            return Err(Error::NotSingular);
        }
    }
    let h = f.hessian_at(point.coords())?;
    let affine = minor_without(&h, point.pivot());
    let n = affine.len();
    Ok(Echelon::from_rows(field, n, &affine).rank())
}

/// Whether `point` is an ordinary double point of the complete intersection
/// `{F = G = 0}`: with `grad F = c grad G` there (affine chart), the form
/// `Hess F - c Hess G` restricted to the tangent hyperplane of `G` must be
/// nondegenerate.
pub fn ci_is_node(big: &HomoPoly, small: &HomoPoly, point: &ProjPoint) -> Result<bool> {
    refuse_small_char(big.field(), big.degree().max(small.degree()))?;
    let field = big.field();
    let coords = point.coords();
    let pivot = point.pivot();
    let affine_grad = |f: &HomoPoly| -> Result<Vec<Scalar>> {
        let mut out = Vec::new();
        for (i, g) in f.gradient().iter().enumerate() {
            if i != pivot {
                out.push(g.eval(coords)?);
            }
        }
        Ok(out)
    };
    let (mut lead, mut other) = (small, big);
    let mut g_lead = affine_grad(lead)?;
    let mut g_other = affine_grad(other)?;
    if g_lead.iter().all(|x| field.is_zero(x)) {
        std::mem::swap(&mut lead, &mut other);
        std::mem::swap(&mut g_lead, &mut g_other);
    }
    let Some(k) = g_lead.iter().position(|x| !field.is_zero(x)) else {
        return Ok(false);
    };
    let c = field.div(&g_other[k], &g_lead[k]);
    if g_other
        .iter()
        .zip(&g_lead)
        .any(|(o, l)| !field.is_zero(&field.sub(o, &field.mul(&c, l))))
    {
        return Err(Error::NotSingular);
    }
    let ho = minor_without(&other.hessian_at(coords)?, pivot);
    let hl = minor_without(&lead.hessian_at(coords)?, pivot);
    let n = ho.len();
    let h: Vec<Vec<Scalar>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| field.sub(&ho[i][j], &field.mul(&c, &hl[i][j])))
                .collect()
        })
        .collect();
    let tangent = Echelon::from_rows(field, n, std::iter::once(&g_lead)).kernel();
    let restricted: Vec<Vec<Scalar>> = tangent
        .iter()
        .map(|u| {
            tangent
                .iter()
                .map(|v| {
                    let mut acc = field.zero();
                    for i in 0..n {
                        for j in 0..n {
                            let t = field.mul(&field.mul(&u[i], &h[i][j]), &v[j]);
                            acc = field.add(&acc, &t);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(Echelon::from_rows(field, tangent.len(), &restricted).rank() == tangent.len())
}

/// A hypersurface (one defining form) or complete intersection (two forms)
/// with its scanned singular locus and per-point node flags.
#[derive(Clone, Debug, Serialize)]
pub struct NodalInstance {
    pub defining: Vec<HomoPoly>,
    pub ambient_dim: usize,
    #[serde(serialize_with = "serialize_points")]
    pub sing: PointSet,
    pub node_flags: Vec<bool>,
    pub clean: bool,
    pub warnings: Vec<String>,
}

fn serialize_points<S: serde::Serializer>(
    set: &PointSet,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.iter())
}

impl NodalInstance {
    /// Scans the singular locus; flags are left unset until
    /// [`verify_nodal`] runs.
    pub fn scan(defining: Vec<HomoPoly>, cap: u64) -> Result<Self> {
        let sing = match defining.as_slice() {
            [f] => singular_points(f, cap)?,
            [big, small] => ci_singular_points(big, small, cap)?,
            _ => {
                return Err(Error::BadParams(
                    "expected one or two defining forms".into(),
                ))
            }
        };
        let ambient_dim = defining[0].nvars() - 1;
        Ok(NodalInstance {
            defining,
            ambient_dim,
            sing,
            node_flags: Vec::new(),
            clean: false,
            warnings: Vec::new(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.sing.len()
    }

    /// Threshold above which the locus is presumed positive-dimensional.
    pub fn isolation_threshold(&self) -> usize {
        let degree = self.defining.iter().map(|f| f.degree()).max().unwrap_or(0) as usize;
        5 * degree * self.ambient_dim
    }
}

/// Fills node flags: a point is an ODP when the (restricted) affine Hessian
/// has full rank. Isolation is read off the finiteness of the scan, with a
/// size threshold flagging positive-dimensional loci.
pub fn verify_nodal(mut inst: NodalInstance) -> Result<NodalInstance> {
    inst.node_flags = match inst.defining.as_slice() {
        [f] => inst
            .sing
            .iter()
            .map(|pt| hessian_rank_at(f, pt).map(|r| r == inst.ambient_dim))
            .collect::<Result<_>>()?,
        [big, small] => inst
            .sing
            .iter()
            .map(|pt| ci_is_node(big, small, pt))
            .collect::<Result<_>>()?,
        _ => {
            return Err(Error::BadParams(
                "expected one or two defining forms".into(),
            ))
        }
    };
    inst.clean = inst.node_flags.iter().all(|&b| b);
    inst.warnings.clear();
    if inst.sing.len() > inst.isolation_threshold() {
        inst.clean = false;
        inst.warnings.push(format!(
            "NotIsolated: {} singular points exceed the threshold {}",
            inst.sing.len(),
            inst.isolation_threshold()
        ));
    }
    Ok(inst)
}

/// Scan plus node verification in one step.
pub fn nodal_instance(defining: Vec<HomoPoly>, cap: u64) -> Result<NodalInstance> {
    verify_nodal(NodalInstance::scan(defining, cap)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::projgeom::DEFAULT_SCAN_CAP;

    fn fp(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn fermat_quartic_is_smooth() {
        let f = parse_poly("x^4 + y^4 + z^4 + w^4", 4, fp(101)).unwrap();
        assert!(singular_points(&f, DEFAULT_SCAN_CAP).unwrap().is_empty());
    }

    #[test]
    fn quadric_cone_vertex() {
        let f = parse_poly("x^2 + y^2 + z^2", 4, fp(101)).unwrap();
        let inst = nodal_instance(vec![f.clone()], DEFAULT_SCAN_CAP).unwrap();
        assert_eq!(
            inst.sing.points(),
            [ProjPoint::from_i64(&[0, 0, 0, 1], fp(101)).unwrap()]
        );
        assert!(inst.clean);
        assert_eq!(hessian_rank_at(&f, &inst.sing.points()[0]).unwrap(), 3);
    }

    #[test]
    fn hessian_examples() {
        let f = parse_poly("x^2*w + y^2*w", 4, fp(101)).unwrap();
        let origin = ProjPoint::from_i64(&[0, 0, 0, 1], fp(101)).unwrap();
        assert_eq!(hessian_rank_at(&f, &origin).unwrap(), 2);
        let smooth = parse_poly("x^2 + y^2 + z^2 + w^2", 4, fp(101)).unwrap();
        assert_eq!(hessian_rank_at(&smooth, &origin), Err(Error::NotSingular));
        let f7 = parse_poly("x^7*w + y^8", 4, fp(7)).unwrap();
        let pt = ProjPoint::from_i64(&[0, 0, 1, 0], fp(7)).unwrap();
        assert_eq!(hessian_rank_at(&f7, &pt), Err(Error::CharTooSmall(7)));
    }

    #[test]
    fn nonisolated_locus_is_flagged() {
        let f = parse_poly("x^2*w^2", 4, fp(31)).unwrap();
        let inst = nodal_instance(vec![f], DEFAULT_SCAN_CAP).unwrap();
        // the gradient (2xw^2, 0, 0, 2x^2w) vanishes on both planes x = 0 and w = 0
        assert!(inst.sing.len() >= 31);
        assert!(!inst.clean);
        assert!(inst.warnings[0].starts_with("NotIsolated"));
    }

    #[test]
    fn char_dividing_degree_is_refused() {
        let f = parse_poly("x^5 + y^5 + z^5", 3, fp(5)).unwrap();
        assert_eq!(
            singular_points(&f, DEFAULT_SCAN_CAP),
            Err(Error::CharDividesDegree { p: 5, degree: 5 })
        );
    }

    #[test]
    fn degenerate_complete_intersection() {
        let f = fp(7);
        let big = parse_poly("x^2", 4, f).unwrap();
        let small = parse_poly("y", 4, f).unwrap();
        let sing = ci_singular_points(&big, &small, DEFAULT_SCAN_CAP).unwrap();
        // the whole line x = y = 0
        assert_eq!(sing.len(), 8);
        assert!(sing
            .iter()
            .all(|p| f.is_zero(&p.coords()[0]) && f.is_zero(&p.coords()[1])));
    }

    #[test]
    fn smooth_complete_intersection() {
        let f = fp(31);
        let mut found = false;
        for seed in 0..5 {
            let a = HomoPoly::random(4, 2, f, 100 + seed);
            let b = HomoPoly::random(4, 2, f, 200 + seed);
            if ci_singular_points(&a, &b, DEFAULT_SCAN_CAP)
                .unwrap()
                .is_empty()
            {
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn ci_node_at_cone_vertex() {
        // the quadric cone x^2 + y^2 + z^2 = 0 inside the hyperplane u = 0 of
        // P^4 has a single node at its vertex
        let f = fp(11);
        let big = parse_poly("x^2 + y^2 + z^2", 5, f).unwrap();
        let small = parse_poly("u", 5, f).unwrap();
        let sing = ci_singular_points(&big, &small, DEFAULT_SCAN_CAP).unwrap();
        assert_eq!(sing.len(), 1);
        assert!(ci_is_node(&big, &small, &sing.points()[0]).unwrap());
        let flat = parse_poly("x^2 + y^2", 5, f).unwrap();
        let sing = ci_singular_points(&flat, &small, DEFAULT_SCAN_CAP).unwrap();
        assert!(sing.iter().all(|p| !ci_is_node(&flat, &small, p).unwrap()));
    }
}
