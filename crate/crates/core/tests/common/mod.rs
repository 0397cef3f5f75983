#![allow(dead_code)]

use factlab::families::{generate, FamilyInstance, FamilyParams, FamilySpec};
use factlab::projgeom::DEFAULT_SCAN_CAP;
use factlab::{FieldSpec, PointSet, ProjPoint};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub fn fp(p: u64) -> FieldSpec {
    FieldSpec::prime(p).unwrap()
}

/// The r = 2 double solid fixture over F_101.
pub fn double_solid_r2() -> FamilyInstance {
    let spec = FamilySpec::new(FamilyParams::DoubleSolidEq15 { r: 2 }, fp(101), 1);
    generate(&spec, DEFAULT_SCAN_CAP).unwrap()
}

/// `count` distinct seeded points of `P^n(F_p)`.
pub fn random_points(n: usize, p: u64, count: usize, rng: &mut Xoshiro256PlusPlus) -> PointSet {
    let f = fp(p);
    let mut set = PointSet::new(n, f);
    while set.len() < count {
        let coords: Vec<i64> = (0..=n).map(|_| rng.gen_range(0..p as i64)).collect();
        if let Ok(pt) = ProjPoint::from_i64(&coords, f) {
            if !set.contains(&pt) {
                set.push(pt).unwrap();
            }
        }
    }
    set
}

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Residue of a prime-field scalar, read through its decimal rendering so
/// oracles stay independent of the library's arithmetic.
pub fn residue(s: &factlab::Scalar) -> u64 {
    s.to_string().parse().unwrap()
}
