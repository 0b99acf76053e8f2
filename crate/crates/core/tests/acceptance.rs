//! Desk-scale acceptance sweep for the whole library: every guarantee the
//! crate makes is exercised here end to end, one test per guarantee, each
//! ending in a single PASS line with the observed margin.
//!
//! Exact-backend checks assert literal equality of rationals; float-backend
//! checks assert the documented tolerances. Nothing here is allowed to
//! sample fewer cases or loosen a bound to go green.

use std::time::{Duration, Instant};

use balgeo::dynamics::{
    conjugacy_cylinders, conjugate_to_lebesgue, imbalance_profile, make_sine_branches,
    partition_check, transfer_fixed_density, verify_sine_bound, ExpandingMap,
};
use balgeo::harmonic::{fourier, rigidity_chain, weyl_l2_nu};
use balgeo::measure::{
    make_bernoulli, make_markov, make_uniform, markov_stationary, CylinderMeasure,
};
use balgeo::orders::{order_profile, ENUMERATION_CAP};
use balgeo::{Rational, Word};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURE_SEED: u64 = 0x5EED_CAB1E;

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn normalize(tallies: &[u32]) -> Vec<Rational> {
    let total: i64 = tallies.iter().map(|&t| t as i64).sum();
    tallies.iter().map(|&t| ratio(t as i64, total)).collect()
}

/// Fifty deterministic full-support rational fixtures: alternating product
/// and Markov measures, bases 2 and 3, depths 3 through 8.
fn rational_fixture_set() -> Vec<CylinderMeasure<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED);
    let mut out = Vec::with_capacity(50);
    for k in 0..50u32 {
        let p: u32 = if rng.gen_bool(0.5) { 2 } else { 3 };
        let depth: u32 = rng.gen_range(3..=8);
        let mu = if k % 2 == 0 {
            let tallies: Vec<u32> = (0..p).map(|_| rng.gen_range(1..=20)).collect();
            make_bernoulli(p, &normalize(&tallies), depth).expect("valid digit law")
        } else {
            let rows: Vec<Vec<Rational>> = (0..p)
                .map(|_| {
                    let t: Vec<u32> = (0..p).map(|_| rng.gen_range(1..=20)).collect();
                    normalize(&t)
                })
                .collect();
            let initial =
                markov_stationary(p, &rows).expect("positive rows have a stationary law");
            make_markov(p, &rows, &initial, depth).expect("stationary start")
        };
        out.push(mu);
    }
    out
}

/// The sine-perturbed doubling family coded to depth 12.
fn sine_fixture() -> CylinderMeasure<f64> {
    let system = make_sine_branches(2, 0.1).expect("valid perturbation");
    conjugacy_cylinders(&system, 12).expect("codes to depth 12")
}

/// The three-digit product fixture with an exact unit balance constant.
fn product_fixture() -> CylinderMeasure<f64> {
    make_bernoulli::<f64>(3, &[0.5, 1.0 / 3.0, 1.0 / 6.0], 12).expect("valid digit law")
}

#[test]
fn smoothing_closed_form_equals_translation_average_exactly() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED ^ 1);
    let mut levels = 0usize;
    for mu in &rational_fixture_set() {
        let p = mu.p() as usize;
        let fine = mu.weights();
        let cells = fine.len();
        for n in 1..mu.depth() {
            let pn = p.pow(n);
            let block = cells / pn;
            // Direct definition: average the p^n translates of the measure
            // by k/p^n. A translate shifts cell indices by k·block mod
            // cells, so grouping the k-sum by residue class gives one
            // column sum per low index.
            let mut column = vec![Rational::zero(); block];
            for h in 0..pn {
                let base = h * block;
                for (r, c) in column.iter_mut().enumerate() {
                    *c = c.clone() + fine[base + r].clone();
                }
            }
            let scale = Rational::new(BigInt::one(), BigInt::from(pn));
            let direct: Vec<Rational> = (0..cells)
                .map(|i| column[i % block].clone() * scale.clone())
                .collect();

            let view = mu.smooth_nu(n).expect("exactly invariant");
            let closed = view.materialize();
            assert_eq!(
                closed.weights(),
                &direct[..],
                "smoothing mismatch at p={} depth={} n={}",
                p,
                mu.depth(),
                n
            );

            // The same sum written literally, wraparound included.
            for _ in 0..4 {
                let i = rng.gen_range(0..cells);
                let mut s = Rational::zero();
                for k in 0..pn {
                    s = s + fine[(i + k * block) % cells].clone();
                }
                assert_eq!(s * scale.clone(), direct[i].clone());
            }

            // Sampled cylinder masses at every depth, including the uniform
            // range at or above the smoothing level.
            for _ in 0..4 {
                let d = rng.gen_range(1..=mu.depth());
                let idx = rng.gen_range(0..p.pow(d));
                let w = Word::from_index(mu.p(), d as usize, &BigUint::from(idx)).unwrap();
                let lo = idx * p.pow(mu.depth() - d);
                let hi = lo + p.pow(mu.depth() - d);
                let mut s = Rational::zero();
                for cell in &direct[lo..hi] {
                    s = s + cell.clone();
                }
                let mass = view.mass(&w).unwrap();
                assert_eq!(mass, s, "cylinder mass mismatch at {w}");
                if d <= n {
                    assert_eq!(mass, Rational::new(BigInt::one(), BigInt::from(p).pow(d)));
                }
            }
            levels += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(10),
        "smoothing sweep took {elapsed:?}"
    );
    println!(
        "PASS smoothing identity: 50 fixtures, {levels} smoothing levels, exact equality in {elapsed:?}"
    );
}

#[test]
fn density_steps_and_phi_respect_the_balance_ceiling() {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED ^ 2);
    let mut steps = 0usize;
    let mut deepest = 0u32;
    for mu in &rational_fixture_set() {
        let p = mu.p();
        let n_depth = mu.depth();
        deepest = deepest.max(n_depth);
        let profile = mu.balance_profile(n_depth).unwrap();
        assert!(
            profile.c0 > Rational::zero(),
            "full-support fixture must be balanced"
        );
        let bound = ratio(p as i64, 1) / (Rational::one() + profile.c0.clone());

        // Every single-step ratio, at every depth. Positive shifts reduce
        // to the shifted word, so the m = 0 scan is exhaustive; the
        // reduction itself is spot-checked below.
        for d in 2..=n_depth {
            for idx in 0..(p as usize).pow(d) {
                let w = Word::from_index(p, d as usize, &BigUint::from(idx)).unwrap();
                let step = mu.ratio_step(0, &w).unwrap();
                assert!(step <= bound, "step ratio above p/(1+C0) at {w}");
                steps += 1;
            }
        }
        for _ in 0..8 {
            let d = rng.gen_range(2..=n_depth);
            let idx = rng.gen_range(0..(p as usize).pow(d));
            let w = Word::from_index(p, d as usize, &BigUint::from(idx)).unwrap();
            let m = rng.gen_range(0..=(d - 2));
            assert_eq!(
                mu.ratio_step(m, &w).unwrap(),
                mu.ratio_step(0, &w.shift_by(m as usize).unwrap()).unwrap()
            );
        }

        for n in 1..=4u32.min(n_depth - 1) {
            let report = mu.phi_bound_check(n, n_depth).unwrap();
            assert_eq!(report.violations, 0, "phi ceiling broken at n={n}");
            assert_eq!(report.degenerate_count, 0);
            assert!(report.max_phi <= report.bound);
        }
    }
    // The fixture set must actually reach the deeper levels.
    assert!(deepest >= 5, "fixture set never reached n = 4 coverage");
    println!("PASS balance ceiling: {steps} step ratios and phi sweeps for n <= 4, zero violations");
}

#[test]
fn orbit_tables_match_enumeration_and_stabilize_geometrically() {
    let start = Instant::now();
    // Largest level whose modulus stays under the enumeration cap.
    fn max_enumerable_level(p: u64) -> u32 {
        let mut n = 0u32;
        let mut pw = 1u64;
        while pw <= ENUMERATION_CAP / p {
            pw *= p;
            n += 1;
        }
        n
    }

    let cases: [(u64, u64, u64, u32, (i64, i64)); 6] = [
        (1, 3, 2, 1, (2, 3)),
        (1, 2, 3, 3, (1, 4)),
        (1, 2, 7, 4, (1, 8)),
        (1, 5, 2, 1, (4, 5)),
        (3, 5, 2, 1, (4, 5)),
        (4, 2, 3, 5, (1, 16)),
    ];
    let mut certified_total = 0u32;
    for (a, p, q, n0, (c1n, c1d)) in cases {
        let enum_limit = max_enumerable_level(p);
        let profile = order_profile(a, p, q, enum_limit + 2).unwrap();
        assert_eq!(profile.n0, n0, "threshold for ({a},{p},{q})");
        assert_eq!(profile.c1, ratio(c1n, c1d), "constant for ({a},{p},{q})");
        assert!(profile.verify_certificate(), "certificate for ({a},{p},{q})");

        let certified = profile.certify_by_enumeration().unwrap();
        assert_eq!(
            certified, enum_limit,
            "enumeration coverage for ({a},{p},{q})"
        );
        certified_total += certified;

        for n in profile.n0..=profile.n_max() {
            assert!(
                profile.scaling_exact(n).unwrap(),
                "geometric scaling failed at n={n} for ({a},{p},{q})"
            );
        }
    }

    // The delayed-threshold case, level by level.
    let slow = order_profile(1, 2, 7, 8).unwrap();
    let expected: [u64; 6] = [1, 2, 2, 2, 4, 8];
    for (n, t) in expected.iter().enumerate() {
        assert_eq!(slow.t(n as u32 + 1).unwrap(), &BigUint::from(*t));
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(30),
        "order sweep took {elapsed:?}"
    );
    println!(
        "PASS orbit tables: 6 seeds, {certified_total} levels certified by enumeration, in {elapsed:?}"
    );
}

#[test]
fn smoothed_weyl_averages_square_to_one_over_orbit_size() {
    // The second moment needs invariance but not balance, so a product
    // measure that starves one digit entirely is still a valid fixture here.
    let starved = make_bernoulli::<f64>(3, &[2.0 / 3.0, 1.0 / 3.0, 0.0], 12).unwrap();
    let cases: [(CylinderMeasure<f64>, u64, f64, &str); 5] = [
        (make_uniform::<f64>(2, 12).unwrap(), 3, 1e-8, "uniform p=2"),
        (make_uniform::<f64>(3, 12).unwrap(), 2, 1e-8, "uniform p=3"),
        (product_fixture(), 2, 1e-6, "product p=3"),
        (starved, 2, 1e-6, "two-digit product p=3"),
        (sine_fixture(), 3, 1e-6, "sine family p=2"),
    ];
    let mut worst = 0.0f64;
    for (mu, q, tol, label) in &cases {
        for n in 1..=3u32 {
            let rep = weyl_l2_nu(mu, n, 1, *q).unwrap();
            assert!(
                rep.deviation.abs() <= *tol,
                "{label} n={n}: deviation {} beyond {tol}",
                rep.deviation
            );
            assert_eq!(rep.expected, 1.0 / rep.t_n as f64);
            worst = worst.max(rep.deviation.abs());
        }
    }
    println!("PASS weyl second moment: worst |deviation| = {worst:.3e} across 5 fixtures, n <= 3");
}

#[test]
fn rigidity_chain_holds_with_slack_and_certified_decay() {
    let slack_floor = -1e-8;
    let mut worst_slack = f64::INFINITY;
    for (mu, q, n0, label) in [
        (product_fixture(), 2u64, 1u32, "product p=3"),
        (sine_fixture(), 3, 3, "sine family p=2"),
    ] {
        let mut bounds = Vec::new();
        let mut c0 = 0.0f64;
        for n in (n0 + 1)..=(n0 + 3) {
            let rep = rigidity_chain(&mu, 1, q, n).unwrap();
            assert_eq!(rep.n0, n0, "{label}: unexpected stabilization level");
            assert!(rep.scaling_exact, "{label} n={n}: orbit size off the line");
            assert!(
                rep.cs_slack >= slack_floor,
                "{label} n={n}: Cauchy-Schwarz slack {}",
                rep.cs_slack
            );
            assert!(
                rep.phi_slack >= slack_floor,
                "{label} n={n}: phi ceiling slack {}",
                rep.phi_slack
            );
            assert!(
                rep.final_slack >= slack_floor,
                "{label} n={n}: final bound slack {}",
                rep.final_slack
            );
            assert!(
                rep.weyl_deviation.abs() <= 1e-8,
                "{label} n={n}: weyl deviation {}",
                rep.weyl_deviation
            );
            worst_slack = worst_slack
                .min(rep.cs_slack)
                .min(rep.phi_slack)
                .min(rep.final_slack);
            c0 = rep.c0;
            bounds.push(rep.final_bound);
        }
        // One extra smoothing level divides the certified bound by 1 + C0.
        for pair in bounds.windows(2) {
            let step = pair[0] / pair[1];
            assert!(
                (step - (1.0 + c0)).abs() <= 1e-9 * (1.0 + c0),
                "{label}: bound decay factor {step} vs {}",
                1.0 + c0
            );
        }
    }
    println!(
        "PASS rigidity chain: 2 fixtures x 3 levels, worst link slack = {worst_slack:.3e}, decay factor certified"
    );
}

#[test]
fn uniform_measure_has_flat_spectrum() {
    let mu = make_uniform::<f64>(2, 12).unwrap();
    let mut worst = 0.0f64;
    for m in 1u64..=64 {
        let c = fourier(&mu, &BigUint::from(m)).unwrap();
        assert!(
            c.value.norm() <= 1e-12,
            "m={m}: |coefficient| = {}",
            c.value.norm()
        );
        worst = worst.max(c.value.norm());
    }
    println!("PASS flat spectrum: max |f_m| = {worst:.3e} for 1 <= m <= 64");
}

#[test]
fn sine_perturbations_stay_above_the_balance_floor() {
    let start = Instant::now();
    let mut margins = Vec::new();
    for delta in [0.05, 0.1, 0.2] {
        let report = verify_sine_bound(2, delta, 12, 0.0).unwrap();
        let floor = (1.0 - 2.0 * delta) / (1.0 + 2.0 * delta);
        assert!(
            (report.constants.floor - floor).abs() <= 1e-14,
            "closed-form floor drifted at delta={delta}"
        );
        assert!(
            report.invariance_defect < 1e-10,
            "delta={delta}: pushforward defect {}",
            report.invariance_defect
        );
        assert!(
            report.pass && report.c0 >= floor,
            "delta={delta}: measured C0 {} under floor {floor}",
            report.c0
        );
        margins.push(report.c0 - floor);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "sine sweep took {elapsed:?}"
    );
    println!(
        "PASS sine balance floor: margins {:.2e} / {:.2e} / {:.2e} at depth 12, in {elapsed:?}",
        margins[0], margins[1], margins[2]
    );
}

#[test]
fn parabolic_imbalance_ratios_collapse_monotonically() {
    let profile = imbalance_profile(0.5, 40).unwrap();
    assert_eq!(profile.rows.len(), 40);
    for pair in profile.rows.windows(2) {
        assert!(
            pair[1].ratio < pair[0].ratio,
            "imbalance not strictly decreasing at n={}",
            pair[1].n
        );
    }
    // Hand evaluation of the recursion at n = 2: the first endpoint is
    // z1 = 1 - 1/2 = 1/2, so r2 = z^{3/2}/(2z - z^{3/2}) = 1/(2*sqrt(2) - 1).
    let r2 = profile.rows[1].ratio;
    let oracle = 1.0 / (2.0 * 2.0f64.sqrt() - 1.0);
    assert!((r2 - oracle).abs() <= 1e-12);
    assert!((r2 - 0.54693).abs() <= 1e-4);
    let r10 = profile.rows[9].ratio;
    let r40 = profile.rows[39].ratio;
    assert!(r40 < r10 / 2.0, "tail not collapsing: r40={r40} r10={r10}");
    println!("PASS imbalance profile: r2 = {r2:.6}, r40/r10 = {:.4}, strictly decreasing", r40 / r10);
}

#[test]
fn perturbed_doubling_density_conjugates_to_a_balanced_code() {
    let map = ExpandingMap::new(2, 0.5).unwrap();
    let grid = 1usize << 14;
    let (density, stats) = transfer_fixed_density(&map, grid, 1e-9, 500).unwrap();
    assert!(stats.residual <= 1e-8);

    // Independent residual: push the converged density through one more
    // transfer sweep by hand and take the sup difference.
    let mut sup = 0.0f64;
    for i in 0..=grid {
        let x = i as f64 / grid as f64;
        let mut image = 0.0;
        for j in 0..2u32 {
            let y = map.branch_inverse(j, x).unwrap();
            image += density.eval(y) / map.derivative(y);
        }
        sup = sup.max((image - density.eval(x)).abs());
    }
    assert!(sup <= 1e-8, "transfer residual {sup:.3e}");
    assert!(
        (density.integral() - 1.0).abs() <= 1e-10,
        "density mass {}",
        density.integral()
    );

    let system = conjugate_to_lebesgue(&map, &density).unwrap();
    let partition = partition_check(&system, 4096).unwrap();
    assert!(
        partition.max_deviation <= 1e-6,
        "branch derivatives sum to {} away from 1",
        partition.max_deviation
    );

    let mu = conjugacy_cylinders(&system, 8).unwrap();
    assert!(
        mu.invariance_defect() < 1e-6,
        "coded pushforward defect {}",
        mu.invariance_defect()
    );
    let profile = mu.balance_profile(8).unwrap();
    assert!(profile.c0 > 0.0, "conjugated code lost balance");
    println!(
        "PASS transfer route: residual {sup:.3e}, partition defect {:.3e}, coded C0 = {:.4}",
        partition.max_deviation, profile.c0
    );
}
