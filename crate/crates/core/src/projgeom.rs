//! Projective points and point sets, exhaustive enumeration of `P^n(F_p)`,
//! and projections from linear centers.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::linalg::Echelon;

/// Default cap on the number of points an exhaustive scan may visit.
pub const DEFAULT_SCAN_CAP: u64 = 10_000_000;

/// A point of `P^n` in canonical form: the first nonzero coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProjPoint {
    coords: Vec<Scalar>,
    field: FieldSpec,
}

impl ProjPoint {
    /// Scales `coords` so that the first nonzero entry is 1.
    pub fn canonicalize(coords: Vec<Scalar>, field: FieldSpec) -> Result<Self> {
        coords.iter().try_for_each(|c| field.check(c))?;
        let pivot = coords
            .iter()
            .position(|c| !field.is_zero(c))
            .ok_or(Error::ZeroVector)?;
        let inv = field.inv(&coords[pivot]).unwrap();
        let coords = coords.iter().map(|c| field.mul(c, &inv)).collect();
        Ok(ProjPoint { coords, field })
    }

    pub fn from_i64(coords: &[i64], field: FieldSpec) -> Result<Self> {
        Self::canonicalize(coords.iter().map(|&c| field.from_i64(c)).collect(), field)
    }

    pub(crate) fn from_residues(coords: &[u64], field: FieldSpec) -> Self {
        Self::canonicalize(coords.iter().map(|&c| field.from_u64(c)).collect(), field)
            .expect("nonzero residue vector")
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Index of the first nonzero coordinate (which equals 1).
    pub fn pivot(&self) -> usize {
        self.coords
            .iter()
            .position(|c| !self.field.is_zero(c))
            .unwrap()
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// An ordered set of distinct points sharing an ambient space and field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    ambient_dim: usize,
    field: FieldSpec,
    points: Vec<ProjPoint>,
    index: HashMap<ProjPoint, usize>,
}

impl PointSet {
    pub fn new(ambient_dim: usize, field: FieldSpec) -> Self {
        PointSet {
            ambient_dim,
            field,
            points: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn from_points(
        ambient_dim: usize,
        field: FieldSpec,
        points: impl IntoIterator<Item = ProjPoint>,
    ) -> Result<Self> {
        let mut set = PointSet::new(ambient_dim, field);
        for p in points {
            set.push(p)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, point: ProjPoint) -> Result<()> {
        if point.field != self.field {
            return Err(Error::FieldMismatch);
        }
        if point.ambient_dim() != self.ambient_dim {
            return Err(Error::WrongAmbient {
                expected: self.ambient_dim,
                got: point.ambient_dim(),
            });
        }
        if self.index.contains_key(&point) {
            return Err(Error::DuplicatePoint(point.to_string()));
        }
        self.index.insert(point.clone(), self.points.len());
        self.points.push(point);
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ProjPoint> {
        self.points.iter()
    }

    pub fn get(&self, i: usize) -> Option<&ProjPoint> {
        self.points.get(i)
    }

    pub fn index_of(&self, p: &ProjPoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        self.index.contains_key(p)
    }

    /// The set with the point at `i` removed.
    pub fn without(&self, i: usize) -> PointSet {
        let mut out = PointSet::new(self.ambient_dim, self.field);
        for (j, p) in self.points.iter().enumerate() {
            if j != i {
                out.push(p.clone()).expect("distinct");
            }
        }
        out
    }

    /// Renders the point-set file format.
    pub fn to_file_text(&self) -> String {
        let mut out = format!("P {} {}\n", self.ambient_dim, self.field);
        for p in &self.points {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the point-set file format: header `P <n> <fieldspec>`, one
    /// comma-separated point per line, `#` comment lines.
    pub fn parse_file(text: &str) -> Result<PointSet> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Syntax("missing point-set header".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [tag, n, spec] = parts[..] else {
            return Err(Error::Syntax(format!("bad header {header:?}")));
        };
        if tag != "P" {
            return Err(Error::Syntax(format!("bad header {header:?}")));
        }
        let n: usize = n
            .parse()
            .map_err(|_| Error::Syntax(format!("bad dimension in {header:?}")))?;
        let field: FieldSpec = spec.parse()?;
        let mut set = PointSet::new(n, field);
        for line in lines {
            let coords = line
                .split(',')
                .map(|c| field.parse_scalar(c))
                .collect::<Result<Vec<_>>>()?;
            if coords.len() != n + 1 {
                return Err(Error::WrongAmbient {
                    expected: n,
                    got: coords.len().saturating_sub(1),
                });
            }
            set.push(ProjPoint::canonicalize(coords, field)?)?;
        }
        Ok(set)
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a ProjPoint;
    type IntoIter = std::slice::Iter<'a, ProjPoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// `P^n(F_p)` with a fixed enumeration order: points whose first nonzero
/// coordinate sits at position 0 come first, then position 1, and so on;
/// within a block the free coordinates after the pivot run lexicographically.
#[derive(Clone, Copy, Debug)]
pub struct ProjectiveSpace {
    n: usize,
    p: u64,
}

impl ProjectiveSpace {
    pub fn new(n: usize, p: u64) -> Self {
        ProjectiveSpace { n, p }
    }

    /// `(p^(n+1) - 1) / (p - 1)`.
    pub fn count(&self) -> u128 {
        let p = self.p as u128;
        (0..=self.n).map(|i| p.pow(i as u32)).sum()
    }

    pub fn check_cap(&self, cap: u64) -> Result<u64> {
        let size = self.count();
        if size > cap as u128 {
            Err(Error::TooLarge { size, cap })
        } else {
            Ok(size as u64)
        }
    }

    fn block_size(&self, pivot: usize) -> u64 {
        self.p.pow((self.n - pivot) as u32)
    }

    /// Coordinates of the point at position `index` of the enumeration.
    pub fn point_at(&self, mut index: u64) -> Vec<u64> {
        let mut pivot = 0;
        while index >= self.block_size(pivot) {
            index -= self.block_size(pivot);
            pivot += 1;
        }
        let mut coords = vec![0u64; self.n + 1];
        coords[pivot] = 1;
        for slot in (pivot + 1..=self.n).rev() {
            coords[slot] = index % self.p;
            index /= self.p;
        }
        coords
    }

    /// Advances `coords` to the next point in enumeration order; returns
    /// `false` after the last point.
    pub fn advance(&self, coords: &mut [u64]) -> bool {
        let pivot = coords.iter().position(|&c| c != 0).unwrap();
        for slot in (pivot + 1..=self.n).rev() {
            coords[slot] += 1;
            if coords[slot] < self.p {
                return true;
            }
            coords[slot] = 0;
        }
        if pivot == self.n {
            return false;
        }
        coords[pivot] = 0;
        coords[pivot + 1] = 1;
        true
    }

    /// Sequential iterator over all points.
    pub fn iter(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let mut next = Some(self.point_at(0));
        std::iter::from_fn(move || {
            let cur = next.take()?;
            let mut succ = cur.clone();
            if self.advance(&mut succ) {
                next = Some(succ);
            }
            Some(cur)
        })
    }

    /// Collects, in enumeration order, the points accepted by `keep`. The
    /// index range is split into disjoint chunks processed in parallel.
    pub fn par_filter<F>(&self, cap: u64, keep: F) -> Result<Vec<Vec<u64>>>
    where
        F: Fn(&[u64]) -> bool + Sync,
    {
        let total = self.check_cap(cap)?;
        let chunk = 1u64 << 14;
        let nchunks = total.div_ceil(chunk);
        let parts: Vec<Vec<Vec<u64>>> = (0..nchunks)
            .into_par_iter()
            .map(|c| {
                let start = c * chunk;
                let end = (start + chunk).min(total);
                let mut coords = self.point_at(start);
                let mut hits = Vec::new();
                for i in start..end {
                    if keep(&coords) {
                        hits.push(coords.clone());
                    }
                    if i + 1 < end {
                        self.advance(&mut coords);
                    }
                }
                hits
            })
            .collect();
        Ok(parts.into_iter().flatten().collect())
    }
}

/// Enumerates `P^n(F_p)` as canonical points, refusing scans above `cap`.
pub fn enumerate_projective(n: usize, field: FieldSpec, cap: u64) -> Result<Vec<ProjPoint>> {
    let p = field.modulus().ok_or(Error::NeedsPrimeField)?;
    let space = ProjectiveSpace::new(n, p);
    space.check_cap(cap)?;
    Ok(space
        .iter()
        .map(|c| ProjPoint::from_residues(&c, field))
        .collect())
}

/// Projective dimension of the span of `points` (`-1` for none).
pub fn span_dim(points: &[ProjPoint]) -> isize {
    let Some(first) = points.first() else {
        return -1;
    };
    let e = Echelon::from_rows(
        first.field,
        first.coords.len(),
        points.iter().map(|p| &p.coords),
    );
    e.rank() as isize - 1
}

/// A projection center `Omega` (spanned by `generators`) together with the
/// coordinate subspace `Pi` (coordinates in `target`) it projects onto.
#[derive(Clone, Debug)]
pub struct LinearCenter {
    generators: Vec<ProjPoint>,
    target: Vec<usize>,
    field: FieldSpec,
    n: usize,
}

/// Image of a point set under a projection.
#[derive(Clone, Debug)]
pub struct Projection {
    pub image: PointSet,
    /// `image_of[i]` is the index in `image` of the image of point `i`.
    pub image_of: Vec<usize>,
    /// Pairs of source indices with the same image.
    pub collisions: Vec<(usize, usize)>,
}

impl Projection {
    pub fn injective(&self) -> bool {
        self.collisions.is_empty()
    }
}

impl LinearCenter {
    /// Validates independence of the generators and that `Omega` misses `Pi`.
    pub fn new(generators: Vec<ProjPoint>, target: Vec<usize>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::BadParams("center needs at least one generator".into()))?;
        let field = first.field;
        let n = first.ambient_dim();
        if generators.len() + target.len() != n + 1 {
            return Err(Error::BadParams(format!(
                "{} generators and {} target coordinates do not fit P^{n}",
                generators.len(),
                target.len()
            )));
        }
        if target.iter().any(|&t| t > n) {
            return Err(Error::BadParams("target coordinate out of range".into()));
        }
        if span_dim(&generators) != generators.len() as isize - 1 {
            return Err(Error::BadParams("center generators are dependent".into()));
        }
        let center = LinearCenter {
            generators,
            target,
            field,
            n,
        };
        if center.solve_matrix().is_none() {
            return Err(Error::BadParams("center meets the target subspace".into()));
        }
        Ok(center)
    }

    pub fn generators(&self) -> &[ProjPoint] {
        &self.generators
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    fn off_target(&self) -> Vec<usize> {
        (0..=self.n).filter(|c| !self.target.contains(c)).collect()
    }

    /// Inverse of the matrix whose columns are the generators restricted to
    /// the off-target coordinates; `None` when `Omega` meets `Pi`.
    fn solve_matrix(&self) -> Option<Vec<Vec<Scalar>>> {
        let f = self.field;
        let off = self.off_target();
        let k = off.len();
        // [W | I] where column j of W is generator j on the off-target coordinates
        let mut aug: Vec<Vec<Scalar>> = (0..k)
            .map(|i| {
                let mut row: Vec<Scalar> = self
                    .generators
                    .iter()
                    .map(|g| g.coords[off[i]].clone())
                    .collect();
                row.extend((0..k).map(|j| f.from_u64((i == j) as u64)));
                row
            })
            .collect();
        for col in 0..k {
            let sel = (col..k).find(|&r| !f.is_zero(&aug[r][col]))?;
            aug.swap(col, sel);
            let inv = f.inv(&aug[col][col]).unwrap();
            for x in aug[col].iter_mut() {
                *x = f.mul(x, &inv);
            }
            for r in 0..k {
                if r != col && !f.is_zero(&aug[r][col]) {
                    let factor = aug[r][col].clone();
                    let pivot_row = aug[col].clone();
                    for (x, y) in aug[r].iter_mut().zip(&pivot_row) {
                        *x = f.sub(x, &f.mul(&factor, y));
                    }
                }
            }
        }
        Some(aug.into_iter().map(|r| r[k..].to_vec()).collect())
    }

    /// Image of `point` in `P^m`, the unique point of `Pi` on the span of
    /// `Omega` and `point`, written in the target coordinates.
    pub fn project_point(&self, point: &ProjPoint) -> Result<ProjPoint> {
        if point.field != self.field {
            return Err(Error::FieldMismatch);
        }
        if point.ambient_dim() != self.n {
            return Err(Error::WrongAmbient {
                expected: self.n,
                got: point.ambient_dim(),
            });
        }
        let f = self.field;
        let off = self.off_target();
        let inv = self.solve_matrix().expect("validated center");
        // coefficients a with sum_j a_j g_j = -point on the off-target coordinates
        let rhs: Vec<Scalar> = off.iter().map(|&c| f.neg(&point.coords[c])).collect();
        let a: Vec<Scalar> = inv
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&rhs)
                    .fold(f.zero(), |acc, (x, r)| f.add(&acc, &f.mul(x, r)))
            })
            .collect();
        let image: Vec<Scalar> = self
            .target
            .iter()
            .map(|&c| {
                self.generators
                    .iter()
                    .zip(&a)
                    .fold(point.coords[c].clone(), |acc, (g, aj)| {
                        f.add(&acc, &f.mul(aj, &g.coords[c]))
                    })
            })
            .collect();
        ProjPoint::canonicalize(image, f).map_err(|_| Error::CenterHit)
    }

    /// Projects every point; collisions are reported, never merged silently.
    pub fn project_set(&self, set: &PointSet) -> Result<Projection> {
        let mut image = PointSet::new(self.target.len() - 1, self.field);
        let mut image_of = Vec::with_capacity(set.len());
        let mut first_source: Vec<usize> = Vec::new();
        let mut collisions = Vec::new();
        for (i, p) in set.iter().enumerate() {
            let q = self.project_point(p)?;
            match image.index_of(&q) {
                Some(j) => {
                    collisions.push((first_source[j], i));
                    image_of.push(j);
                }
                None => {
                    image_of.push(image.len());
                    first_source.push(i);
                    image.push(q)?;
                }
            }
        }
        Ok(Projection {
            image,
            image_of,
            collisions,
        })
    }
}

/// Seeded random center for a projection `P^n -> P^m` onto the first `m + 1`
/// coordinates.
pub fn random_center(n: usize, m: usize, field: FieldSpec, seed: u64) -> Result<LinearCenter> {
    if !(2 <= m && m < n) {
        return Err(Error::BadParams(format!(
            "need 2 <= m < n, got m={m}, n={n}"
        )));
    }
    let p = field.modulus().ok_or(Error::NeedsPrimeField)?;
    let mut rng = SplitMix64::seed_from_u64(seed);
    for _ in 0..100 {
        let gens: Option<Vec<ProjPoint>> = (0..n - m)
            .map(|_| {
                let coords: Vec<Scalar> = (0..=n)
                    .map(|_| field.from_u64(rng.gen_range(0..p)))
                    .collect();
                ProjPoint::canonicalize(coords, field).ok()
            })
            .collect();
        if let Some(gens) = gens {
            if let Ok(c) = LinearCenter::new(gens, (0..=m).collect()) {
                return Ok(c);
            }
        }
    }
    Err(Error::FieldTooSmall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn fp(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let f = fp(7);
        assert_eq!(
            ProjPoint::from_i64(&[0, 2, 4], f).unwrap().to_string(),
            "0,1,2"
        );
        assert_eq!(
            ProjPoint::from_i64(&[3, 0, 0], f).unwrap().to_string(),
            "1,0,0"
        );
        assert_eq!(ProjPoint::from_i64(&[0, 0, 0], f), Err(Error::ZeroVector));
    }

    #[test]
    fn enumeration_counts_and_uniqueness() {
        assert_eq!(ProjectiveSpace::new(1, 3).count(), 4);
        assert_eq!(ProjectiveSpace::new(2, 5).count(), 31);
        assert_eq!(ProjectiveSpace::new(3, 101).count(), 1_040_604);
        for p in [3u64, 5, 7] {
            for n in 1..=3 {
                let pts = enumerate_projective(n, fp(p), DEFAULT_SCAN_CAP).unwrap();
                assert_eq!(pts.len() as u128, ProjectiveSpace::new(n, p).count());
                let uniq: HashSet<_> = pts.iter().collect();
                assert_eq!(uniq.len(), pts.len());
                let space = ProjectiveSpace::new(n, p);
                for (i, q) in pts.iter().enumerate().step_by(7) {
                    assert_eq!(ProjPoint::from_residues(&space.point_at(i as u64), fp(p)), *q);
                }
            }
        }
        assert!(matches!(
            enumerate_projective(5, fp(101), 1000),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn par_filter_matches_sequential() {
        let space = ProjectiveSpace::new(3, 7);
        let keep = |c: &[u64]| (c[0] + 2 * c[1] + c[3] * c[2]) % 7 == 0;
        let seq: Vec<Vec<u64>> = space.iter().filter(|c| keep(c)).collect();
        assert_eq!(space.par_filter(DEFAULT_SCAN_CAP, keep).unwrap(), seq);
    }

    #[test]
    fn projection_examples() {
        let f = fp(101);
        let c = LinearCenter::new(
            vec![ProjPoint::from_i64(&[0, 0, 0, 1], f).unwrap()],
            vec![0, 1, 2],
        )
        .unwrap();
        let img = c
            .project_point(&ProjPoint::from_i64(&[2, 3, 5, 7], f).unwrap())
            .unwrap();
        assert_eq!(img, ProjPoint::from_i64(&[2, 3, 5], f).unwrap());
        assert_eq!(
            c.project_point(&ProjPoint::from_i64(&[0, 0, 0, 1], f).unwrap()),
            Err(Error::CenterHit)
        );
        let c = LinearCenter::new(
            vec![ProjPoint::from_i64(&[1, 1, 1], f).unwrap()],
            vec![0, 1],
        )
        .unwrap();
        let img = c
            .project_point(&ProjPoint::from_i64(&[1, 0, 1], f).unwrap())
            .unwrap();
        assert_eq!(img, ProjPoint::from_i64(&[0, 1], f).unwrap());
    }

    #[test]
    fn collisions_are_reported() {
        let f = fp(11);
        let c = LinearCenter::new(
            vec![ProjPoint::from_i64(&[0, 0, 1], f).unwrap()],
            vec![0, 1],
        )
        .unwrap();
        let set = PointSet::from_points(
            2,
            f,
            [[1, 2, 0], [1, 2, 5], [1, 3, 0]]
                .iter()
                .map(|c| ProjPoint::from_i64(c, f).unwrap()),
        )
        .unwrap();
        let proj = c.project_set(&set).unwrap();
        assert!(!proj.injective());
        assert_eq!(proj.collisions, vec![(0, 1)]);
        assert_eq!(proj.image.len(), 2);
        let empty = c.project_set(&PointSet::new(2, f)).unwrap();
        assert!(empty.image.is_empty() && empty.injective());
    }

    #[test]
    fn span_dims() {
        let f = fp(101);
        let pts = |cs: &[[i64; 3]]| -> Vec<ProjPoint> {
            cs.iter()
                .map(|c| ProjPoint::from_i64(c, f).unwrap())
                .collect()
        };
        assert_eq!(span_dim(&pts(&[[1, 0, 0], [0, 1, 0], [1, 1, 0]])), 1);
        assert_eq!(span_dim(&pts(&[[1, 2, 3]])), 0);
        let p3: Vec<ProjPoint> = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [1, 1, 1, 1]]
            .iter()
            .map(|c| ProjPoint::from_i64(c, f).unwrap())
            .collect();
        assert_eq!(span_dim(&p3), 3);
    }

    #[test]
    fn random_centers() {
        let f = fp(101);
        let c = random_center(3, 2, f, 1).unwrap();
        assert_eq!(c.generators().len(), 1);
        let c = random_center(4, 2, f, 1).unwrap();
        assert_eq!(c.generators().len(), 2);
        assert_eq!(
            random_center(4, 2, f, 1).unwrap().generators(),
            c.generators()
        );
        assert!(random_center(3, 3, f, 1).is_err());
    }

    #[test]
    fn point_file_round_trip_and_errors() {
        let text = "# nodes\nP 2 Fp:7\n0,2,4\n3,0,0\n";
        let set = PointSet::parse_file(text).unwrap();
        assert_eq!(set.to_file_text(), "P 2 Fp:7\n0,1,2\n1,0,0\n");
        assert_eq!(PointSet::parse_file(&set.to_file_text()).unwrap(), set);
        assert!(matches!(
            PointSet::parse_file("P 2 Fp:7\n1,1,1\n2,2,2\n"),
            Err(Error::DuplicatePoint(_))
        ));
        assert!(PointSet::parse_file("P 2 Fp:7\n1,1\n").is_err());
        let q = PointSet::parse_file("P 1 QQ\n1/2,3\n").unwrap();
        assert_eq!(q.to_file_text(), "P 1 QQ\n1,6\n");
    }
}
