//! Seeded generators for three extremal non-factorial families. Every
//! instance is accepted only after its singular locus has been scanned and
//! the expected node count and node flags re-verified.
//!
//! The "general" choices are drawn so that all nodes are `F_p`-rational: the
//! restriction of the data to the distinguished plane is built from curves
//! that split over `F_p`, and the rest is random in the ideal of the plane.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::linalg::Echelon;
use crate::poly::{HomoPoly, Monomial};
use crate::sing::{nodal_instance, singular_points, NodalInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    DoubleSolidEq15,
    HypersurfaceXgyf,
    CiPlane,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::DoubleSolidEq15 => "double_solid_eq15",
            Family::HypersurfaceXgyf => "hypersurface_xgyf",
            Family::CiPlane => "ci_plane",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double_solid_eq15" => Ok(Family::DoubleSolidEq15),
            "hypersurface_xgyf" => Ok(Family::HypersurfaceXgyf),
            "ci_plane" => Ok(Family::CiPlane),
            other => Err(Error::BadParams(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    DoubleSolidEq15 { r: u32 },
    HypersurfaceXgyf { d: u32 },
    CiPlane { m: u32, k: u32 },
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySpec {
    pub params: FamilyParams,
    pub field: FieldSpec,
    pub seed: u64,
    pub max_retries: u32,
    /// CI family only: also scan `F` and `G` for singularities.
    pub check_smooth: bool,
}

impl FamilySpec {
    pub fn new(params: FamilyParams, field: FieldSpec, seed: u64) -> Self {
        FamilySpec {
            params,
            field,
            seed,
            max_retries: 5,
            check_smooth: false,
        }
    }

    pub fn family(&self) -> Family {
        match self.params {
            FamilyParams::DoubleSolidEq15 { .. } => Family::DoubleSolidEq15,
            FamilyParams::HypersurfaceXgyf { .. } => Family::HypersurfaceXgyf,
            FamilyParams::CiPlane { .. } => Family::CiPlane,
        }
    }

    /// Node count the family is known to have.
    pub fn expected_nodes(&self) -> usize {
        match self.params {
            FamilyParams::DoubleSolidEq15 { r } => ((2 * r - 1) * r) as usize,
            FamilyParams::HypersurfaceXgyf { d } => ((d - 1) * (d - 1)) as usize,
            FamilyParams::CiPlane { m, k } => ((m + k - 2).pow(2) - (m - 1) * (k - 1)) as usize,
        }
    }

    fn validate(&self) -> Result<u64> {
        let p = self.field.modulus().ok_or(Error::NeedsPrimeField)?;
        let (ok, top) = match self.params {
            FamilyParams::DoubleSolidEq15 { r } => (r >= 2, 2 * r),
            FamilyParams::HypersurfaceXgyf { d } => (d >= 3, d),
            FamilyParams::CiPlane { m, k } => (m >= k && k >= 2, m),
        };
        if !ok {
            return Err(Error::BadParams(format!(
                "parameters out of range: {:?}",
                self.params
            )));
        }
        if p <= top as u64 {
            return Err(Error::CharTooSmall(p));
        }
        Ok(p)
    }
}

/// An accepted instance with the named building blocks of its equation.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyInstance {
    pub family: Family,
    pub params: FamilyParams,
    pub seed_used: u64,
    pub attempts: u32,
    pub expected_nodes: usize,
    pub instance: NodalInstance,
    pub components: Vec<(String, HomoPoly)>,
    /// Per defining form, whether it is smooth (CI family with the check on).
    pub smooth: Option<Vec<bool>>,
}

impl FamilyInstance {
    pub fn component(&self, name: &str) -> Option<&HomoPoly> {
        self.components
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, g)| g)
    }
}

struct Draw {
    defining: Vec<HomoPoly>,
    components: Vec<(String, HomoPoly)>,
}

/// Dispatches on the family, retrying successive seeds.
pub fn generate(spec: &FamilySpec, cap: u64) -> Result<FamilyInstance> {
    spec.validate()?;
    let expected = spec.expected_nodes();
    let mut observed = Vec::new();
    for attempt in 0..spec.max_retries.max(1) {
        let seed = spec.seed.wrapping_add(attempt as u64);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let draw = match spec.params {
            FamilyParams::DoubleSolidEq15 { r } => draw_double_solid(r, spec.field, &mut rng),
            FamilyParams::HypersurfaceXgyf { d } => draw_hypersurface(d, spec.field, &mut rng),
            FamilyParams::CiPlane { m, k } => draw_ci(m, k, spec.field, &mut rng),
        };
        let inst = nodal_instance(draw.defining, cap)?;
        if inst.node_count() == expected && inst.clean {
            let smooth = if spec.check_smooth && spec.family() == Family::CiPlane {
                Some(
                    inst.defining
                        .iter()
                        .map(|g| singular_points(g, cap).map(|s| s.is_empty()))
                        .collect::<Result<_>>()?,
                )
            } else {
                None
            };
            return Ok(FamilyInstance {
                family: spec.family(),
                params: spec.params,
                seed_used: seed,
                attempts: attempt + 1,
                expected_nodes: expected,
                instance: inst,
                components: draw.components,
                smooth,
            });
        }
        observed.push((seed, inst.node_count()));
    }
    Err(Error::DegenerateDraw { observed })
}

/// Example family with `f = g_r^2 - g_1 g_{2r-1}` in `P^3`.
pub fn gen_double_solid_nonfactorial(spec: &FamilySpec, cap: u64) -> Result<FamilyInstance> {
    expect_family(spec, Family::DoubleSolidEq15)?;
    generate(spec, cap)
}

/// Example family with `V = x g + y f` in `P^4`.
pub fn gen_hypersurface_nonfactorial(spec: &FamilySpec, cap: u64) -> Result<FamilyInstance> {
    expect_family(spec, Family::HypersurfaceXgyf)?;
    generate(spec, cap)
}

/// Complete intersections in `P^5` containing the plane `x = y = z = 0`.
pub fn gen_ci_nonfactorial(spec: &FamilySpec, cap: u64) -> Result<FamilyInstance> {
    expect_family(spec, Family::CiPlane)?;
    generate(spec, cap)
}

fn expect_family(spec: &FamilySpec, family: Family) -> Result<()> {
    if spec.family() != family {
        return Err(Error::BadParams(format!(
            "expected family {family}, got {}",
            spec.family()
        )));
    }
    Ok(())
}

fn random_poly(
    nvars: usize,
    degree: u32,
    field: FieldSpec,
    rng: &mut Xoshiro256PlusPlus,
) -> HomoPoly {
    HomoPoly::random(nvars, degree, field, rng.gen())
}

fn nonzero_scalar(field: FieldSpec, rng: &mut Xoshiro256PlusPlus) -> crate::field::Scalar {
    let p = field.modulus().expect("prime field");
    field.from_u64(rng.gen_range(1..p))
}

/// Product of `count` random nonzero linear forms in `nvars` variables.
fn split_form(
    nvars: usize,
    count: u32,
    field: FieldSpec,
    rng: &mut Xoshiro256PlusPlus,
) -> HomoPoly {
    let mut out = HomoPoly::constant(nvars, field.one(), field);
    for _ in 0..count {
        let line = loop {
            let l = random_poly(nvars, 1, field, rng);
            if !l.is_zero() {
                break l;
            }
        };
        out = out.mul(&line).expect("same space");
    }
    out
}

/// `form(plane coords) + sum_j x_j R_j` with random `R_j`, where the plane is
/// cut out by the variables in `ideal_vars`.
fn lift_from_plane(
    plane_part: &HomoPoly,
    nvars: usize,
    plane_vars: &[usize],
    ideal_vars: &[usize],
    rng: &mut Xoshiro256PlusPlus,
) -> HomoPoly {
    let f = plane_part.field();
    let mut out = plane_part.embed(nvars, plane_vars);
    if plane_part.degree() == 0 {
        return out;
    }
    for &v in ideal_vars {
        let r = random_poly(nvars, plane_part.degree() - 1, f, rng);
        out = out
            .add(&HomoPoly::var(nvars, v, f).mul(&r).unwrap())
            .unwrap();
    }
    out
}

/// Random invertible substitution of the variables of `P^n`.
fn random_gl(
    n: usize,
    field: FieldSpec,
    rng: &mut Xoshiro256PlusPlus,
) -> Vec<Vec<crate::field::Scalar>> {
    loop {
        let m: Vec<Vec<_>> = (0..n)
            .map(|_| random_poly(n, 1, field, rng).to_dense())
            .collect();
        if Echelon::from_rows(field, n, &m).rank() == n {
            return m;
        }
    }
}

/// Cubic `C(x, y, z)` with `C(s^2, st, t^2) = prod (t_i s - s_i t)` over six
/// distinct points of `P^1`, so `C` cuts the conic `xz = y^2` exactly in the
/// six rational points `(s_i^2 : s_i t_i : t_i^2)`.
fn conic_pullback_cubic(field: FieldSpec, rng: &mut Xoshiro256PlusPlus) -> HomoPoly {
    let p = field.modulus().unwrap();
    let mut params: Vec<(u64, u64)> = Vec::new();
    while params.len() < 6 {
        // (1 : a) for a in F_p, with index p standing for (0 : 1)
        let a = rng.gen_range(0..=p);
        let pt = if a == p { (0, 1) } else { (1, a) };
        if !params.contains(&pt) {
            params.push(pt);
        }
    }
    let mut binary = HomoPoly::constant(2, field.one(), field);
    for &(s, t) in &params {
        let lin = HomoPoly::linear(&[field.from_u64(t), field.neg(&field.from_u64(s))], field);
        binary = binary.mul(&lin).unwrap();
    }
    // s^a t^(6-a) pulled back from these cubic monomials
    let targets: [[u32; 3]; 7] = [
        [0, 0, 3],
        [0, 1, 2],
        [1, 0, 2],
        [1, 1, 1],
        [2, 0, 1],
        [2, 1, 0],
        [3, 0, 0],
    ];
    let terms = (0..=6u32).map(|a| {
        (
            Monomial::new(targets[a as usize].to_vec()),
            binary.coeff(&Monomial::new(vec![a, 6 - a])),
        )
    });
    HomoPoly::from_terms(3, 3, field, terms).unwrap()
}

fn draw_double_solid(r: u32, field: FieldSpec, rng: &mut Xoshiro256PlusPlus) -> Draw {
    let (gr_plane, g2_plane) = if r == 2 {
        let conic = HomoPoly::from_terms(
            3,
            2,
            field,
            [
                (Monomial::new(vec![1, 0, 1]), field.one()),
                (Monomial::new(vec![0, 2, 0]), field.from_i64(-1)),
            ],
        )
        .unwrap();
        let cubic = conic_pullback_cubic(field, rng)
            .add(&conic.mul(&random_poly(3, 1, field, rng)).unwrap())
            .unwrap();
        (conic, cubic)
    } else {
        (
            split_form(3, r, field, rng),
            split_form(3, 2 * r - 1, field, rng),
        )
    };
    let w = HomoPoly::var(4, 3, field);
    let gr = lift_from_plane(&gr_plane, 4, &[0, 1, 2], &[3], rng);
    let g2 = lift_from_plane(&g2_plane, 4, &[0, 1, 2], &[3], rng);
    let gl = random_gl(4, field, rng);
    let apply = |g: &HomoPoly| g.compose_linear(&gl, 4).unwrap();
    let (g1, gr, g2) = (apply(&w), apply(&gr), apply(&g2));
    let f = gr.square().sub(&g1.mul(&g2).unwrap()).unwrap();
    Draw {
        defining: vec![f],
        components: vec![("g1".into(), g1), ("g_r".into(), gr), ("g_2r-1".into(), g2)],
    }
}

fn draw_hypersurface(d: u32, field: FieldSpec, rng: &mut Xoshiro256PlusPlus) -> Draw {
    let plane = [2, 3, 4];
    let ideal = [0, 1];
    let g_plane = split_form(3, d - 1, field, rng);
    let f_plane = split_form(3, d - 1, field, rng);
    let g = lift_from_plane(&g_plane, 5, &plane, &ideal, rng);
    let f = lift_from_plane(&f_plane, 5, &plane, &ideal, rng);
    let x = HomoPoly::var(5, 0, field);
    let y = HomoPoly::var(5, 1, field);
    let v = x.mul(&g).unwrap().add(&y.mul(&f).unwrap()).unwrap();
    Draw {
        defining: vec![v],
        components: vec![("g".into(), g), ("f".into(), f)],
    }
}

/// `F = xA + yB + zC`, `G = xA' + yB' + zC'`. On the plane the matrix
/// `[[A, B, C], [A', B', C']]` drops rank exactly at the nodes; it is built
/// as `[[A0, B0, 0], [A', B', C']]` plus `h` times the second row, with the
/// entries arranged so that every 2x2 minor splits into lines.
fn draw_ci(m: u32, k: u32, field: FieldSpec, rng: &mut Xoshiro256PlusPlus) -> Draw {
    let (a0, b0, a1, b1, c1);
    if m == k {
        // minors: A0 D2 and the pair A0 = B0 = 0
        let t = nonzero_scalar(field, rng);
        let a = split_form(3, m - 1, field, rng);
        let b = split_form(3, m - 1, field, rng);
        let d2 = split_form(3, k - 1, field, rng);
        a1 = a.scale(&t);
        b1 = d2.add(&b.scale(&t)).unwrap();
        c1 = split_form(3, k - 1, field, rng);
        a0 = a;
        b0 = b;
    } else {
        // minors: B' E with A0 = sigma B0 + E
        let sigma = nonzero_scalar(field, rng);
        let b = split_form(3, m - 1, field, rng);
        let e = split_form(3, m - 1, field, rng);
        let bp = split_form(3, k - 1, field, rng);
        a0 = b.scale(&sigma).add(&e).unwrap();
        b0 = b;
        a1 = bp.scale(&sigma);
        b1 = bp;
        c1 = split_form(3, k - 1, field, rng);
    }
    let h = if m == k {
        HomoPoly::constant(3, nonzero_scalar(field, rng), field)
    } else {
        random_poly(3, m - k, field, rng)
    };
    let row0 = [
        a0.add(&h.mul(&a1).unwrap()).unwrap(),
        b0.add(&h.mul(&b1).unwrap()).unwrap(),
        h.mul(&c1).unwrap(),
    ];
    let row1 = [a1, b1, c1];
    let plane = [3, 4, 5];
    let ideal = [0, 1, 2];
    let mut assemble = |row: &[HomoPoly; 3]| {
        let mut out = HomoPoly::zero(6, row[0].degree() + 1, field);
        for (j, entry) in row.iter().enumerate() {
            let lifted = lift_from_plane(entry, 6, &plane, &ideal, rng);
            out = out
                .add(&HomoPoly::var(6, j, field).mul(&lifted).unwrap())
                .unwrap();
        }
        out
    };
    let big = assemble(&row0);
    let small = assemble(&row1);
    Draw {
        defining: vec![big.clone(), small.clone()],
        components: vec![("F".into(), big), ("G".into(), small)],
    }
}
