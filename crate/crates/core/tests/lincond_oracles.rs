mod common;

use common::{double_solid_r2, fp, random_points, residue, rng};
use factlab::linalg::rank_mod_p;
use factlab::lincond::{
    all_separators, bese_check, defect, evaluation_matrix, incidence_bound_from_intersection,
    is_independent, max_on_conics, max_on_lines, separator, swap_combine, ScanResult,
    SeparatorCertificate, SeparatorOutcome, Tristate,
};
use factlab::projgeom::{random_center, DEFAULT_SCAN_CAP};
use factlab::{monomial_basis, HomoPoly, PointSet, ProjPoint};
use rand::Rng;

fn exponents(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    if nvars == 1 {
        return vec![vec![degree]];
    }
    (0..=degree)
        .flat_map(|a| {
            exponents(nvars - 1, degree - a)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, a);
                    rest
                })
        })
        .collect()
}

fn pow_mod(b: u64, e: u32, p: u64) -> u64 {
    (0..e).fold(1, |acc, _| acc * b % p)
}

/// Values of every monomial of degree `xi` at each point, mod p.
fn value_table(points: &[Vec<u64>], xi: u32, p: u64) -> Vec<Vec<u64>> {
    let mons = exponents(points[0].len(), xi);
    points
        .iter()
        .map(|c| {
            mons.iter()
                .map(|e| {
                    e.iter()
                        .zip(c)
                        .fold(1, |acc, (&k, &x)| acc * pow_mod(x, k, p) % p)
                })
                .collect()
        })
        .collect()
}

/// Runs `visit` on every nonzero coefficient vector of length `n` over F_p.
fn for_all_forms(n: usize, p: u64, mut visit: impl FnMut(&[u64])) {
    let mut c = vec![0u64; n];
    loop {
        let mut i = 0;
        while i < n {
            c[i] += 1;
            if c[i] < p {
                break;
            }
            c[i] = 0;
            i += 1;
        }
        if i == n {
            return;
        }
        visit(&c);
    }
}

/// Zero pattern of a form on the points, as a bit mask.
fn zero_mask(table: &[Vec<u64>], c: &[u64], p: u64) -> u32 {
    table.iter().enumerate().fold(0, |mask, (i, row)| {
        let v = row.iter().zip(c).fold(0, |acc, (a, b)| (acc + a * b) % p);
        if v == 0 {
            mask | (1 << i)
        } else {
            mask
        }
    })
}

/// Every point has a separator among ALL nonzero forms of degree `xi`.
fn brute_force_independent(points: &[Vec<u64>], xi: u32, p: u64) -> bool {
    let table = value_table(points, xi, p);
    let full = (1u32 << points.len()) - 1;
    let mut found = 0u32;
    for_all_forms(table[0].len(), p, |c| {
        let mask = zero_mask(&table, c, p);
        let missing = full & !mask;
        if missing.count_ones() == 1 {
            found |= missing;
        }
    });
    found == full
}

fn residues(set: &PointSet) -> Vec<Vec<u64>> {
    set.iter()
        .map(|pt| pt.coords().iter().map(residue).collect())
        .collect()
}

#[test]
fn rank_test_agrees_with_exhaustive_separator_search() {
    let mut rng = rng(2024);
    let mut agree = 0;
    for case in 0..100 {
        let p = if case % 2 == 0 { 5 } else { 7 };
        let size = rng.gen_range(1..=8);
        let xi = rng.gen_range(0..=2);
        let set = random_points(2, p, size, &mut rng);
        let ours = is_independent(&set, xi);
        let oracle = brute_force_independent(&residues(&set), xi, p);
        assert_eq!(
            ours,
            oracle,
            "case {case}: p={p} xi={xi} set={}",
            set.to_file_text()
        );
        agree += 1;
        // monotone in the degree, and dropping a point lowers the rank by at most one
        let here = defect(&set, xi);
        assert!(defect(&set, xi + 1).defect <= here.defect);
        assert_eq!(here.defect == 0, here.dependent_points.is_empty());
        for i in 0..set.len() {
            assert!(defect(&set.without(i), xi).rank + 1 >= here.rank);
        }
    }
    assert_eq!(agree, 100);
}

#[test]
fn separators_match_defect_and_reverify() {
    let mut rng = rng(7);
    for _ in 0..30 {
        let set = random_points(2, 11, rng.gen_range(2..=9), &mut rng);
        let xi = rng.gen_range(1..=3);
        let d = defect(&set, xi).defect;
        let seps = all_separators(&set, xi).unwrap();
        assert_eq!(seps.is_some(), d == 0);
        for s in seps.into_iter().flatten() {
            let f = set.field();
            assert!(!f.is_zero(&s.form().eval(s.point().coords()).unwrap()));
            assert!(set
                .iter()
                .filter(|q| *q != s.point())
                .all(|q| f.is_zero(&s.form().eval(q.coords()).unwrap())));
        }
    }
}

fn brute_max_on_curves(points: &[Vec<u64>], degree: u32, p: u64) -> usize {
    let table = value_table(points, degree, p);
    let mut best = 0;
    for_all_forms(table[0].len(), p, |c| {
        best = best.max(zero_mask(&table, c, p).count_ones() as usize);
    });
    best
}

#[test]
fn line_and_conic_counts_agree_with_brute_force() {
    let mut rng = rng(99);
    for p in [3, 5] {
        for _ in 0..15 {
            let size = rng.gen_range(2..=10);
            let set = random_points(2, p, size, &mut rng);
            let pts = residues(&set);
            assert_eq!(
                max_on_lines(&set).unwrap().0,
                brute_max_on_curves(&pts, 1, p)
            );
            let (count, conic) = max_on_conics(&set).unwrap();
            assert_eq!(
                count,
                brute_max_on_curves(&pts, 2, p),
                "{}",
                set.to_file_text()
            );
            let on = set
                .iter()
                .filter(|q| set.field().is_zero(&conic.eval(q.coords()).unwrap()))
                .count();
            assert_eq!(on, count);
        }
    }
}

#[test]
fn double_solid_nodes_defect_and_separators() {
    let inst = double_solid_r2();
    let nodes = &inst.instance.sing;
    assert_eq!(defect(nodes, 2).defect, 1);
    assert!(is_independent(nodes, 3));
    for pt in nodes.iter() {
        assert!(matches!(
            separator(nodes, pt, 2).unwrap(),
            SeparatorOutcome::Dependent(_)
        ));
        assert!(separator(nodes, pt, 3).unwrap().certificate().is_some());
    }
    let m = evaluation_matrix(nodes, 2, &[]);
    assert_eq!((m.entries.len(), m.columns.len(), m.rank()), (6, 10, 5));
}

#[test]
fn star_property_on_the_node_conic() {
    let inst = double_solid_r2();
    let nodes = &inst.instance.sing;
    assert_eq!(max_on_lines(nodes).unwrap().0, 2);
    let center = random_center(3, 2, nodes.field(), 11).unwrap();
    let proj = center.project_set(nodes).unwrap();
    assert!(proj.injective());
    let (count, conic) = max_on_conics(&proj.image).unwrap();
    assert_eq!(count, 6);
    let f = nodes.field();
    for pt in proj.image.iter() {
        let grad: Vec<_> = conic
            .gradient()
            .iter()
            .map(|g| g.eval(pt.coords()).unwrap())
            .collect();
        assert!(
            grad.iter().any(|v| !f.is_zero(v)),
            "node {pt} is singular on the conic"
        );
    }
}

#[test]
fn gradient_intersection_certifies_slope_three() {
    let inst = double_solid_r2();
    let f = &inst.instance.defining[0];
    let cert =
        incidence_bound_from_intersection(&inst.instance.sing, &f.gradient(), DEFAULT_SCAN_CAP)
            .unwrap();
    assert_eq!((cert.degree(), cert.bound(2)), (3, 6));
    let missing = inst.instance.sing.without(0);
    match incidence_bound_from_intersection(&missing, &f.gradient(), DEFAULT_SCAN_CAP) {
        Err(factlab::Error::LocusMismatch(d)) => {
            assert_eq!(d, vec![inst.instance.sing.points()[0].to_string()])
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn combiner_on_conic_nodes_plus_two_points() {
    let inst = double_solid_r2();
    let lambda = inst.instance.sing.clone();
    let f = lambda.field();
    let seps_lambda = all_separators(&lambda, 3).unwrap().unwrap();
    let mut rng = rng(5);
    let quadrics =
        factlab::linalg::Echelon::from_rows(f, 10, &evaluation_matrix(&lambda, 2, &[]).entries)
            .kernel();
    let (delta, g) = loop {
        let delta = random_points(3, 101, 2, &mut rng);
        if delta.iter().any(|q| lambda.contains(q)) {
            continue;
        }
        // mix the kernel vectors with independent weights
        let mut form = vec![f.zero(); 10];
        for k in &quadrics {
            let w = f.from_u64(rng.gen_range(1..101));
            for (a, b) in form.iter_mut().zip(k) {
                *a = f.add(a, &f.mul(&w, b));
            }
        }
        let g = HomoPoly::from_dense(4, 2, f, &form);
        if delta
            .iter()
            .all(|q| !f.is_zero(&g.eval(q.coords()).unwrap()))
        {
            break (delta, g);
        }
    };
    let seps_delta = all_separators(&delta, 1).unwrap().unwrap();
    let out = swap_combine(&lambda, &seps_lambda, &delta, &seps_delta, &g).unwrap();
    let union = PointSet::from_points(3, f, lambda.iter().chain(delta.iter()).cloned()).unwrap();
    assert_eq!(out.len(), 8);
    for cert in &out {
        assert_eq!(cert.degree(), 3);
        assert!(
            SeparatorCertificate::new(&union, cert.point().clone(), cert.form().clone()).is_ok()
        );
    }
}

#[test]
fn bese_generic_six_points() {
    let mut rng = rng(31);
    let set = random_points(2, 101, 6, &mut rng);
    let report = bese_check(&set, 3, None, DEFAULT_SCAN_CAP).unwrap();
    assert_eq!(report.hypotheses_hold, Tristate::Yes);
    assert_eq!(report.scan_result, ScanResult::Free);
    assert_eq!(report.scan_label, "F_p-rational scan");
    // independent rank oracle on random outside points
    let basis = monomial_basis(3, 3);
    let base_rows: Vec<Vec<u64>> = evaluation_matrix(&set, 3, &[])
        .entries
        .iter()
        .map(|r| r.iter().map(residue).collect())
        .collect();
    let base_rank = rank_mod_p(&base_rows, 101);
    let mut tested = 0;
    while tested < 20 {
        let q = random_points(2, 101, 1, &mut rng).points()[0].clone();
        if set.contains(&q) {
            continue;
        }
        let mut rows = base_rows.clone();
        rows.push(
            factlab::lincond::point_row(&q, &basis)
                .iter()
                .map(residue)
                .collect(),
        );
        assert_eq!(rank_mod_p(&rows, 101), base_rank + 1);
        tested += 1;
    }
}

#[test]
fn bese_boundary_and_smoke_cases() {
    let f = fp(101);
    // six points on the conic xz = y^2
    let conic_pts = PointSet::from_points(
        2,
        f,
        (1..=6).map(|t: i64| ProjPoint::from_i64(&[1, t, t * t], f).unwrap()),
    )
    .unwrap();
    let r = bese_check(&conic_pts, 3, None, DEFAULT_SCAN_CAP).unwrap();
    let k2 = r.incidence.iter().find(|c| c.k == 2).unwrap();
    assert_eq!((k2.value, k2.limit, k2.status), (6, 6, Tristate::Yes));
    assert_ne!(r.scan_result, ScanResult::NotScanned);
    // all thirteen points of P^2(F_3)
    let f3 = fp(3);
    let all = PointSet::from_points(
        2,
        f3,
        factlab::projgeom::enumerate_projective(2, f3, DEFAULT_SCAN_CAP).unwrap(),
    )
    .unwrap();
    let a = bese_check(&all, 3, None, DEFAULT_SCAN_CAP).unwrap();
    let b = bese_check(&all, 3, None, DEFAULT_SCAN_CAP).unwrap();
    assert_eq!(a.hypotheses_hold, Tristate::No);
    assert_eq!(a.scan_result, b.scan_result);
}
