//! Acceptance run: one PASS/FAIL line per criterion, failing at the end if
//! any criterion failed.

use std::fs;
use std::time::{Duration, Instant};

use factlab::criteria::{app_double_solid, app_hypersurface};
use factlab::families::{
    gen_ci_nonfactorial, gen_double_solid_nonfactorial, gen_hypersurface_nonfactorial,
    FamilyInstance, FamilyParams, FamilySpec,
};
use factlab::linalg::Echelon;
use factlab::lincond::{
    all_separators, bese_check, defect, evaluation_matrix, is_independent, max_on_conics,
    max_on_lines, swap_combine, ScanResult, SeparatorCertificate, Tristate,
};
use factlab::projgeom::{random_center, DEFAULT_SCAN_CAP};
use factlab::{parse_poly, FieldSpec, HomoPoly, PointSet, ProjPoint};
use factlab_cli::{cmd_classify, RunConfig};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

fn fp(p: u64) -> FieldSpec {
    FieldSpec::prime(p).unwrap()
}

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn random_points(n: usize, p: u64, count: usize, rng: &mut Xoshiro256PlusPlus) -> PointSet {
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

fn residue(s: &factlab::Scalar) -> u64 {
    s.to_string().parse().unwrap()
}

fn spec(params: FamilyParams, p: u64) -> FamilySpec {
    FamilySpec::new(params, fp(p), 1)
}

fn all_nodes(inst: &FamilyInstance) -> bool {
    inst.instance.clean && inst.instance.node_flags.iter().all(|&b| b)
}

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    if elapsed <= Duration::from_secs(limit_s) {
        Ok(())
    } else {
        Err(format!("took {elapsed:.1?}, limit {limit_s}s"))
    }
}

fn double_solid(r: u32) -> FamilyInstance {
    gen_double_solid_nonfactorial(
        &spec(FamilyParams::DoubleSolidEq15 { r }, 101),
        DEFAULT_SCAN_CAP,
    )
    .unwrap()
}

fn criterion_1() -> Check {
    let mut parts = Vec::new();
    for (r, expected) in [(2u32, 6usize), (3, 15)] {
        let start = Instant::now();
        let inst = double_solid(r);
        within(start.elapsed(), 60)?;
        let n = inst.instance.node_count();
        if n != expected || !all_nodes(&inst) || inst.attempts > 5 {
            return Err(format!(
                "r={r}: {n} nodes, all nodal {}, attempts {}",
                all_nodes(&inst),
                inst.attempts
            ));
        }
        parts.push(format!("r={r}: {n} nodes"));
    }
    Ok(parts.join(", "))
}

fn criterion_2() -> Check {
    let inst = double_solid(2);
    let (d2, d3) = (
        defect(&inst.instance.sing, 2).defect,
        defect(&inst.instance.sing, 3).defect,
    );
    ensure(
        d2 == 1 && d3 == 0,
        format!("defect(2)={d2}, defect(3)={d3}"),
    )
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let gen = |d| {
        gen_hypersurface_nonfactorial(
            &spec(FamilyParams::HypersurfaceXgyf { d }, 31),
            DEFAULT_SCAN_CAP,
        )
        .unwrap()
    };
    let (i3, i4) = (gen(3), gen(4));
    within(start.elapsed(), 120)?;
    let (n3, n4) = (i3.instance.node_count(), i4.instance.node_count());
    let (d3, d4) = (
        defect(&i3.instance.sing, 1).defect,
        defect(&i4.instance.sing, 3).defect,
    );
    ensure(
        n3 == 4 && d3 == 1 && n4 == 9 && d4 >= 1 && all_nodes(&i3) && all_nodes(&i4),
        format!("d=3: {n3} nodes, defect(1)={d3}; d=4: {n4} nodes, defect(3)={d4}"),
    )
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (m, k) in [(2u32, 2u32), (3, 2)] {
        let expected = ((m + k - 2).pow(2) - (m - 1) * (k - 1)) as usize;
        let inst = gen_ci_nonfactorial(&spec(FamilyParams::CiPlane { m, k }, 11), DEFAULT_SCAN_CAP)
            .unwrap();
        let n = inst.instance.node_count();
        if n != expected || !all_nodes(&inst) {
            return Err(format!("(m,k)=({m},{k}): {n} nodes, expected {expected}"));
        }
        parts.push(format!("(m,k)=({m},{k}): {n} nodes"));
    }
    within(start.elapsed(), 600)?;
    Ok(parts.join(", "))
}

/// Monomial exponent vectors of the given degree.
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

/// Every point has a form of degree xi vanishing on all the others but not
/// on it, searching over all coefficient vectors.
fn brute_force_independent(points: &[Vec<u64>], xi: u32, p: u64) -> bool {
    let mons = exponents(3, xi);
    let table: Vec<Vec<u64>> = points
        .iter()
        .map(|c| {
            mons.iter()
                .map(|e| e.iter().zip(c).fold(1, |acc, (&k, &x)| acc * x.pow(k) % p))
                .collect()
        })
        .collect();
    let full = (1u32 << points.len()) - 1;
    let mut found = 0u32;
    let mut coeffs = vec![0u64; mons.len()];
    'outer: loop {
        let mut i = 0;
        while i < coeffs.len() {
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
        if i == coeffs.len() {
            break 'outer;
        }
        let nonzero = table.iter().enumerate().fold(0u32, |mask, (j, row)| {
            let v = row
                .iter()
                .zip(&coeffs)
                .fold(0, |acc, (a, b)| (acc + a * b) % p);
            if v != 0 {
                mask | (1 << j)
            } else {
                mask
            }
        });
        if nonzero.count_ones() == 1 {
            found |= nonzero;
        }
    }
    found == full
}

fn criterion_5() -> Check {
    let mut rng = rng(2024);
    let mut agree = 0;
    for case in 0..100 {
        let p = if case % 2 == 0 { 5 } else { 7 };
        let size = rng.gen_range(1..=8);
        let xi = rng.gen_range(0..=2);
        let set = random_points(2, p, size, &mut rng);
        let pts: Vec<Vec<u64>> = set
            .iter()
            .map(|q| q.coords().iter().map(residue).collect())
            .collect();
        if is_independent(&set, xi) == brute_force_independent(&pts, xi, p) {
            agree += 1;
        }
    }
    ensure(agree == 100, format!("{agree}/100 agree"))
}

fn criterion_6() -> Check {
    let inst = double_solid(2);
    let nodes = &inst.instance.sing;
    let lines = max_on_lines(nodes).unwrap().0;
    let proj = random_center(3, 2, nodes.field(), 11)
        .unwrap()
        .project_set(nodes)
        .unwrap();
    if !proj.injective() {
        return Err("projection collapsed nodes".into());
    }
    let (conics, conic) = max_on_conics(&proj.image).unwrap();
    let f = nodes.field();
    let smooth = proj.image.iter().all(|pt| {
        conic
            .gradient()
            .iter()
            .any(|g| !f.is_zero(&g.eval(pt.coords()).unwrap()))
    });
    ensure(
        lines == 2 && conics == 6 && smooth,
        format!("max_on_lines={lines}, max_on_conics={conics} (k(d-1)=6), nodes smooth on conic: {smooth}"),
    )
}

fn criterion_7() -> Check {
    let set = random_points(2, 101, 6, &mut rng(31));
    let start = Instant::now();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| bese_check(&set, 3, None, DEFAULT_SCAN_CAP).unwrap())
    };
    let one = run(1);
    let many = run(4);
    within(start.elapsed(), 30)?;
    let same = serde_json::to_string(&one).unwrap() == serde_json::to_string(&many).unwrap();
    ensure(
        one.hypotheses_hold == Tristate::Yes && one.scan_result == ScanResult::Free && same,
        format!(
            "hypotheses {:?}, scan {:?}, identical at 1 and 4 threads: {same}",
            one.hypotheses_hold, one.scan_result
        ),
    )
}

fn criterion_8() -> Check {
    let start = Instant::now();
    let bad: Vec<i64> = (2..=50)
        .filter(|&r| {
            let edge = (2 * r - 1) * r;
            !app_double_solid(r, edge - 1).unwrap().applies
                || app_double_solid(r, edge).unwrap().applies
        })
        .collect();
    let hyp = app_hypersurface(6, 16).unwrap().applies && !app_hypersurface(6, 17).unwrap().applies;
    within(start.elapsed(), 1)?;
    ensure(
        bad.is_empty() && hyp,
        format!("failing r: {bad:?}, d=6 16/17 boundary ok: {hyp}"),
    )
}

fn config(field: FieldSpec) -> RunConfig {
    RunConfig {
        field: Some(field),
        threads: 1,
        seed: 0,
        scan_cap: DEFAULT_SCAN_CAP,
        output: None,
    }
}

fn criterion_9() -> Check {
    let f = fp(101);
    let dir = tempfile::tempdir().unwrap();
    let inst = double_solid(2);
    let surface = &inst.instance.defining[0];
    let fixture = dir.path().join("fixture.poly");
    fs::write(&fixture, format!("{surface}\n")).unwrap();
    let report = cmd_classify(&fixture, 2, &config(f)).unwrap().report;
    let w = &report["witness"];
    let text = |k: &str| parse_poly(w[k].as_str().unwrap(), 4, f).unwrap();
    let scalar = parse_poly(w["scalar"].as_str().unwrap(), 4, f).unwrap();
    let rebuilt = text("g_r")
        .square()
        .sub(&text("plane").mul(&text("g_2r_minus_1")).unwrap())
        .unwrap()
        .mul(&scalar)
        .unwrap();
    let structured = report["status"] == "nonfactorial_structured" && &rebuilt == surface;

    let quartic = dir.path().join("smooth.poly");
    fs::write(&quartic, "x^4 + y^4 + z^4 + w^4\n").unwrap();
    let smooth = cmd_classify(&quartic, 2, &config(f)).unwrap().report;
    let factorial = smooth["status"] == "factorial" && smooth["nsing"] == 0;
    ensure(
        structured && factorial,
        format!(
            "fixture {} with identity {}, smooth quartic {}",
            report["status"],
            &rebuilt == surface,
            smooth["status"]
        ),
    )
}

fn criterion_10() -> Check {
    let inst = double_solid(2);
    let lambda = inst.instance.sing.clone();
    let f = lambda.field();
    let seps_lambda = all_separators(&lambda, 3)
        .unwrap()
        .ok_or("conic nodes dependent at degree 3")?;
    let quadrics = Echelon::from_rows(f, 10, &evaluation_matrix(&lambda, 2, &[]).entries).kernel();
    let mut rng = rng(5);
    let (delta, g) = loop {
        let delta = random_points(3, 101, 2, &mut rng);
        if delta.iter().any(|q| lambda.contains(q)) {
            continue;
        }
        let mut form = vec![f.zero(); 10];
        for k in &quadrics {
            let c = f.from_u64(rng.gen_range(1..101));
            for (a, b) in form.iter_mut().zip(k) {
                *a = f.add(a, &f.mul(&c, b));
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
    let seps_delta = all_separators(&delta, 1)
        .unwrap()
        .ok_or("delta dependent")?;
    let out =
        swap_combine(&lambda, &seps_lambda, &delta, &seps_delta, &g).map_err(|e| e.to_string())?;
    let union = PointSet::from_points(3, f, lambda.iter().chain(delta.iter()).cloned()).unwrap();
    let verified = out
        .iter()
        .filter(|c| SeparatorCertificate::new(&union, c.point().clone(), c.form().clone()).is_ok())
        .count();
    ensure(
        out.len() == 8 && verified == 8,
        format!("{} certificates, {verified} re-verified", out.len()),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("double solid node counts", criterion_1),
        ("double solid defect", criterion_2),
        ("hypersurface node counts and defects", criterion_3),
        ("complete intersection node counts", criterion_4),
        ("rank test vs brute-force separators", criterion_5),
        ("line and conic incidence on the nodes", criterion_6),
        ("base-point checker on generic points", criterion_7),
        ("criterion boundary sweep", criterion_8),
        ("double solid classification", criterion_9),
        ("separator combiner", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        match &result {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                println!("FAIL criterion {}: {name}: {detail} [{elapsed:.2?}]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
