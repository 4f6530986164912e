//! The eight acceptance criteria, one PASS/FAIL line each.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use heyde_cli::config::parse_syntax;
use heyde_cli::{run_text, Overrides, Report, Verdict};
use heyde_core::distribution::ExactChar;
use heyde_core::fdm::{cascade_identity_check, GroupFunction};
use heyde_core::gaussian::{gaussian_pair_condition, mat_mul, mat_vec, sample_real_feq, transpose, GaussianParams};
use heyde_core::group::{annihilator, automorphisms, check_heyde_condition, invariant_subgroups, p_component, subgroups};
use heyde_core::heyde::{
    enumerate_valid_automorphisms, extract_decomposition, is_conditionally_symmetric, satisfies_feq,
    solve_partner, FEQ_TOLERANCE,
};
use heyde_core::linalg::{determinant, Matrix};
use heyde_core::rational::{self, int, ratio, Rational};
use heyde_core::{sampling, Bounds, FiniteAbelianGroup, GroupMap, RationalDistribution, Subgroup};
use rand::Rng;

fn z(orders: &[i64]) -> FiniteAbelianGroup {
    FiniteAbelianGroup::new(orders).unwrap()
}

fn valid_deltas(g: &FiniteAbelianGroup) -> Vec<GroupMap> {
    enumerate_valid_automorphisms(g, &Bounds::default()).unwrap().valid
}

/// `rho * m_F * E_x` with `rho` random on the 2-component.
fn structured<R: Rng>(rng: &mut R, g: &FiniteAbelianGroup, f: &Subgroup) -> RationalDistribution {
    let two = p_component(g, 2);
    let local = sampling::distribution(rng, &z(&[two.order() as i64]), 8);
    let mut masses = vec![rational::zero(); g.order()];
    for (m, &i) in local.masses().iter().zip(two.indices()) {
        masses[i] = m.clone();
    }
    let rho = RationalDistribution::new(g, masses).unwrap();
    let x = g.element_at(rng.gen_range(0..g.order()));
    rho.convolve(&RationalDistribution::haar(f)).unwrap().shift(&x)
}

fn criterion_1() -> String {
    let started = Instant::now();
    let mut rng = sampling::rng(1);
    let groups: Vec<FiniteAbelianGroup> = [&[5][..], &[7], &[3, 3], &[2, 2], &[9]].iter().map(|o| z(o)).collect();
    let cases: Vec<(FiniteAbelianGroup, GroupMap, Vec<Subgroup>)> = groups
        .iter()
        .flat_map(|g| {
            valid_deltas(g).into_iter().map(move |d| {
                let inv = invariant_subgroups(g, &d, &Bounds::default()).unwrap();
                (g.clone(), d, inv)
            })
        })
        .collect();
    let (mut total, mut symmetric) = (0usize, 0usize);
    while total < 1200 {
        for (g, delta, inv) in &cases {
            // half plain random pairs, half pairs with the structure of a solution
            let (mu1, mu2) = if total % 2 == 0 {
                (sampling::distribution(&mut rng, g, 8), sampling::distribution(&mut rng, g, 8))
            } else {
                let f = &inv[rng.gen_range(0..inv.len())];
                (structured(&mut rng, g, f), structured(&mut rng, g, f))
            };
            let exact = is_conditionally_symmetric(&mu1, &mu2, delta).unwrap().is_symmetric();
            let feq = satisfies_feq(&mu1, &mu2, delta, FEQ_TOLERANCE).unwrap().holds;
            assert_eq!(exact, feq, "disagreement on {g}, delta {delta}: {mu1} / {mu2}");
            total += 1;
            symmetric += usize::from(exact);
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    assert!(symmetric > 0 && symmetric < total);
    format!(
        "{total} instances over {} (group, delta) cases agree, {symmetric} symmetric, {:.1} s",
        cases.len(),
        elapsed.as_secs_f64()
    )
}

/// Every presentation `Z_{d1} x ... x Z_{dk}` with `2 <= d1 <= ... <= dk` and order at most `max`.
fn presentations(max: i64) -> Vec<Vec<i64>> {
    fn rec(min: i64, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        out.push(cur.clone());
        for d in min..=left {
            cur.push(d);
            rec(d, left / d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(2, max, &mut Vec::new(), &mut out);
    out.retain(|o| !o.is_empty());
    out
}

fn criterion_2() -> String {
    let (mut groups, mut subs, mut points) = (0, 0, 0);
    for orders in presentations(36) {
        let g = z(&orders);
        groups += 1;
        for k in subgroups(&g, &Bounds::default()).unwrap() {
            subs += 1;
            let ann = annihilator(&g, &k).unwrap();
            let m = RationalDistribution::haar(&k);
            for y in g.elements() {
                let c = m.char_fn(&y).unwrap();
                let inside = ann.contains(&y);
                assert_eq!(c.exact, Some(if inside { ExactChar::One } else { ExactChar::Zero }), "{g} {k:?} {y}");
                assert!((c.value.re - f64::from(u8::from(inside))).abs() < 1e-12 && c.value.im.abs() < 1e-12);
                points += 1;
            }
            assert_eq!(annihilator(&g, &ann).unwrap(), k, "duality on {g}");
        }
    }
    format!("{groups} presentations, {subs} subgroups, {points} character values exact")
}

fn endomorphisms(g: &FiniteAbelianGroup) -> Vec<GroupMap> {
    let k = g.rank();
    let d: Vec<i64> = g.orders().iter().map(|&x| x as i64).collect();
    let total: i64 = (0..k * k).map(|c| d[c / k]).product();
    (0..total)
        .filter_map(|mut code| {
            let mut m = vec![vec![0i64; k]; k];
            for c in 0..k * k {
                let (r, col) = (c / k, c % k);
                m[r][col] = code % d[r];
                code /= d[r];
            }
            GroupMap::endomorphism(&m, g).ok()
        })
        .collect()
}

fn criterion_3() -> String {
    let mut parts = Vec::new();
    for orders in [&[5][..], &[6], &[3, 3], &[2, 4]] {
        let g = z(orders);
        let ends = endomorphisms(&g);
        for f in &ends {
            let adj = f.adjoint();
            for x in g.elements() {
                for y in g.elements() {
                    assert_eq!(g.pairing(&f.apply(&x), &y), g.pairing(&x, &adj.apply(&y)), "{f} on {g}");
                }
            }
        }
        parts.push(format!("{g}: {}", ends.len()));
    }
    format!("endomorphisms checked ({})", parts.join(", "))
}

fn criterion_4() -> String {
    let started = Instant::now();
    let g = z(&[5]);
    let delta = GroupMap::scalar(&g, 2);
    let zero = RationalDistribution::point_mass(&g, &g.zero()).unwrap();
    let mut mu2s = vec![RationalDistribution::haar(&Subgroup::whole(&g))];
    mu2s.extend(g.elements().map(|x| RationalDistribution::point_mass(&g, &x).unwrap()));
    let mut checked = 0;
    for mu2 in &mu2s {
        let sol = solve_partner(mu2, &delta).unwrap();
        assert!(!sol.is_empty(), "no partner for {mu2}");
        // the polytope is the convex hull of its vertices; test them and their barycenter
        let mut members = sol.vertices.clone();
        let n = int(sol.vertices.len() as i64);
        let bary: Vec<Rational> = (0..g.order())
            .map(|i| sol.vertices.iter().map(|v| v.masses()[i].clone()).sum::<Rational>() / &n)
            .collect();
        members.push(RationalDistribution::new(&g, bary).unwrap());
        for mu1 in &members {
            assert!(sol.contains(mu1));
            let d = extract_decomposition(mu1, mu2, &delta, &Bounds::default()).unwrap();
            assert_eq!(d.rho, [zero.clone(), zero.clone()]);
            assert!(d.f.is_trivial() || d.f.is_whole());
            assert!(d.f.is_invariant_under(&delta));
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    format!("{} choices of mu2, {checked} partners decomposed as m_F * E_x, {:.2} s", mu2s.len(), elapsed.as_secs_f64())
}

fn criterion_5() -> String {
    let mut parts = Vec::new();
    for n in [6i64, 4] {
        let g = z(&[n]);
        let scan = enumerate_valid_automorphisms(&g, &Bounds::default()).unwrap();
        assert!(scan.valid.is_empty());
        // the trace covers every unit of Z_n, each with a nonzero kernel element of I + delta
        let units = (1..n).filter(|&u| num_integer::gcd(u, n) == 1).count();
        assert_eq!(scan.rejected.len(), units);
        assert_eq!(automorphisms(&g, &Bounds::default()).unwrap().len(), units);
        let mut trace = Vec::new();
        for (d, x) in &scan.rejected {
            assert_ne!(*x, g.zero());
            assert_eq!(g.add(x, &d.apply(x)), g.zero());
            assert!(!check_heyde_condition(d).unwrap().holds());
            trace.push(format!("{d}:{x}"));
        }
        parts.push(format!("Z{n} [{}]", trace.join(" ")));
    }
    format!("no valid delta; traces {}", parts.join(", "))
}

/// Exponent of `phi1(u + sv) phi2(u + s eps v)` as a quadratic form in `(u, v)`.
fn exponent(g1: &GaussianParams, g2: &GaussianParams, eps: &Matrix, sign: i64) -> (Matrix, Vec<Rational>) {
    let n = g1.dim();
    let s = int(sign);
    let lift = |m: &dyn Fn(usize, usize) -> Rational| -> Matrix {
        (0..n)
            .map(|r| (0..2 * n).map(|c| if c < n { int(i64::from(c == r)) } else { m(r, c - n) }).collect())
            .collect()
    };
    let l1 = lift(&|r, c| if r == c { s.clone() } else { int(0) });
    let l2 = lift(&|r, c| &s * &eps[r][c]);
    let q1 = mat_mul(&mat_mul(&transpose(&l1), g1.covariance()), &l1);
    let q2 = mat_mul(&mat_mul(&transpose(&l2), g2.covariance()), &l2);
    let q: Matrix = (0..2 * n)
        .map(|i| (0..2 * n).map(|j| &q1[i][j] + &q2[i][j] + &q1[j][i] + &q2[j][i]).collect())
        .collect();
    let lin = (0..2 * n)
        .map(|c| (0..n).map(|r| &l1[r][c] * &g1.mean()[r] + &l2[r][c] * &g2.mean()[r]).sum())
        .collect();
    (q, lin)
}

/// The equation holds identically iff the exponents at `v` and `-v` agree as polynomials.
fn symbolic_oracle(g1: &GaussianParams, g2: &GaussianParams, eps: &Matrix) -> bool {
    exponent(g1, g2, eps, 1) == exponent(g1, g2, eps, -1)
}

fn random_psd<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let b: Matrix = (0..n).map(|_| sampling::rational_vector(rng, n, 2, 3)).collect();
    mat_mul(&transpose(&b), &b)
}

fn admissible(eps: &Matrix) -> bool {
    let n = eps.len();
    let shifted: Matrix = (0..n)
        .map(|i| (0..n).map(|j| &eps[i][j] + int(i64::from(i == j))).collect())
        .collect();
    determinant(eps) != rational::zero() && determinant(&shifted) != rational::zero()
}

fn criterion_6() -> String {
    let started = Instant::now();
    let mut rng = sampling::rng(6);
    let (mut passing, mut failing) = (0, 0);
    let mut worst_pass = 0.0f64;
    let mut weakest_fail = f64::INFINITY;
    for i in 0..50 {
        let n = 1 + i % 2;
        let (g1, g2, eps) = loop {
            let eps: Matrix;
            let (a1, t1);
            let a2 = random_psd(&mut rng, n);
            let t2 = sampling::rational_vector(&mut rng, n, 4, 4);
            if i % 2 == 0 {
                // eps = -P with P positive definite commuting with A2 = P + cI, A1 = P A2
                let p = random_psd(&mut rng, n);
                let c = ratio(rng.gen_range(1..=4), rng.gen_range(1..=3));
                let a2: Matrix = (0..n)
                    .map(|r| (0..n).map(|s| &p[r][s] + if r == s { c.clone() } else { int(0) }).collect())
                    .collect();
                a1 = mat_mul(&p, &a2);
                t1 = mat_vec(&p, &t2);
                eps = p.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
                let g2 = GaussianParams::new(a2, t2).unwrap();
                if admissible(&eps) {
                    break (GaussianParams::new(a1, t1).unwrap(), g2, eps);
                }
                continue;
            }
            eps = (0..n).map(|_| sampling::rational_vector(&mut rng, n, 3, 2)).collect();
            a1 = random_psd(&mut rng, n);
            t1 = sampling::rational_vector(&mut rng, n, 4, 4);
            if admissible(&eps) {
                break (GaussianParams::new(a1, t1).unwrap(), GaussianParams::new(a2, t2).unwrap(), eps);
            }
        };
        let oracle = symbolic_oracle(&g1, &g2, &eps);
        let predicted = gaussian_pair_condition(&g1, &g2, &eps).unwrap();
        assert_eq!(oracle, predicted, "pair condition disagrees with the expansion: {g1:?} {g2:?}");
        if predicted {
            let s = sample_real_feq(&g1, &g2, &eps, &mut rng, 400, f64::INFINITY).unwrap();
            assert!(s.max_residual < 1e-9, "predicted pass, residual {}", s.max_residual);
            worst_pass = worst_pass.max(s.max_residual);
            passing += 1;
        } else {
            let s = sample_real_feq(&g1, &g2, &eps, &mut rng, 4000, 1e-3).unwrap();
            assert!(s.max_residual > 1e-3, "predicted fail, residual {} ({g1:?} {g2:?} {eps:?})", s.max_residual);
            weakest_fail = weakest_fail.min(s.max_residual);
            failing += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    format!(
        "{passing} predicted pass (max residual {worst_pass:.1e}), {failing} predicted fail (min residual {weakest_fail:.1e}), {:.1} s",
        elapsed.as_secs_f64()
    )
}

fn criterion_7() -> String {
    let mut rng = sampling::rng(7);
    let mut checks = 0usize;
    for orders in [&[5][..], &[3, 3]] {
        let g = z(orders);
        let epss: Vec<GroupMap> = valid_deltas(&g).iter().map(GroupMap::adjoint).collect();
        for _ in 0..500 {
            let eps = &epss[rng.gen_range(0..epss.len())];
            let phi1 = GroupFunction::new(&g, sampling::rational_vector(&mut rng, g.order(), 6, 5)).unwrap();
            let phi2 = GroupFunction::new(&g, sampling::rational_vector(&mut rng, g.order(), 6, 5)).unwrap();
            let [k1, k2, k3] = std::array::from_fn(|_| g.element_at(rng.gen_range(0..g.order())));
            for u in g.elements() {
                for v in g.elements() {
                    assert!(cascade_identity_check(&phi1, &phi2, eps, &k1, &k2, &k3, &u, &v));
                    checks += 1;
                }
            }
        }
    }
    let g = z(&[2, 4]);
    let mut polynomial = 0;
    for i in 0..200 {
        let f = if i % 4 == 0 {
            GroupFunction::constant(&g, sampling::rational(&mut rng, 6, 5))
        } else {
            GroupFunction::new(&g, sampling::rational_vector(&mut rng, g.order(), 6, 5)).unwrap()
        };
        assert!(f.polynomial_implies_constant());
        polynomial += usize::from(f.is_polynomial(g.order()));
    }
    format!("{checks} exact cascade checks; 200 functions on Z2 x Z4, {polynomial} polynomial, all constant")
}

fn criterion_8() -> String {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut configs: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    configs.sort();
    assert_eq!(configs.len(), 10);
    let (mut fails, mut kernel_errors) = (0, 0);
    for cfg in &configs {
        let text = std::fs::read_to_string(cfg).unwrap();
        let expected = std::fs::read_to_string(cfg.with_extension("report")).unwrap();
        let (config, _) = parse_syntax(&text).unwrap();
        assert_eq!(config.render(), text, "{} is not canonical", cfg.display());
        let report = run_text(&text, &Overrides::default());
        assert_eq!(report.render_machine(), expected, "{} differs", cfg.display());
        let back = Report::parse(&expected).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.render_machine(), expected);
        match report.verdict {
            Verdict::Fail => {
                assert!(report.witnesses().next().is_some());
                fails += 1;
            }
            Verdict::Error if report.get("witness.kernel").is_some() => kernel_errors += 1,
            _ => {}
        }
    }
    assert!(fails >= 1 && kernel_errors >= 1);
    format!("{} pairs bit-exact ({fails} FAIL with witness, {kernel_errors} kernel ERROR)", configs.len())
}

fn main() {
    let criteria: [(&str, fn() -> String); 8] = [
        ("symmetry test vs characteristic-function equation", criterion_1),
        ("Haar characteristic functions and annihilator duality", criterion_2),
        ("adjoint duality over all endomorphisms", criterion_3),
        ("partners on Z5 with delta = 2 are shifted Haar measures", criterion_4),
        ("no valid delta on Z6 and Z4", criterion_5),
        ("Gaussian pair condition predicts sampled residuals", criterion_6),
        ("cascade identity and polynomial functions", criterion_7),
        ("CLI golden files", criterion_8),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {}: FAIL  {name}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
