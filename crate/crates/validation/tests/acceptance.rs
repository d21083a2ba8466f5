//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use gpsk::analysis::{
    self, diversity_product, o_product, v1_product, v1_shell_term, v2_product, v3_product,
};
use gpsk::channel::{frame_rng, run_bler, sample_fading, transmit_block, BlerPoint, SimConfig};
use gpsk::constellation::{
    build_diag3, build_o, build_real8_product, build_v1, build_v2, build_v3, build_v4,
    design_rhs_map, lift_real4, v1_root, v2_r, v3_shell_counts, DesignPattern, REAL4_PATTERN,
    REAL8_PATTERN,
};
use gpsk::decoders::{
    decode_differential, decode_exhaustive_diff, differential_distances, DecoderKind,
};
use gpsk::linalg::CMatrix;
use gpsk::tables::{self, V1_TABLE, V2_TABLE, V3_TABLE};
use gpsk::Constellation;
use gpsk_validation::Criterion;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::{Duration, Instant};

fn v1_table() -> Criterion {
    let mut c = Criterion::new();
    let start = Instant::now();
    for row in V1_TABLE {
        let n = row.n;
        let r = v1_root(n).unwrap();
        let brute = diversity_product(&build_v1(n).unwrap()).unwrap().value;
        c.near(&format!("V1 n={n} r"), r, row.r, tables::TABLE_TOLERANCE);
        c.near(
            &format!("V1 n={n} o-term"),
            o_product(n),
            row.o_term,
            tables::TABLE_TOLERANCE,
        );
        c.near(
            &format!("V1 n={n} shell term"),
            v1_shell_term(r),
            row.shell_term,
            tables::TABLE_TOLERANCE,
        );
        c.near(
            &format!("V1 n={n} dp"),
            brute,
            row.dp,
            tables::TABLE_TOLERANCE,
        );
        c.near(
            &format!("V1 n={n} brute vs analytic"),
            brute,
            v1_product(n).unwrap(),
            1e-9,
        );
    }
    c.within(start, Duration::from_secs(10));
    c
}

fn v2_table() -> Criterion {
    let mut c = Criterion::new();
    let start = Instant::now();
    let tol = tables::TABLE_TOLERANCE;
    for row in V2_TABLE {
        let n = row.n;
        let r = v2_r(n).unwrap();
        let brute = diversity_product(&build_v2(n).unwrap()).unwrap().value;
        c.near(&format!("V2 n={n} r"), r, row.r, tol);
        c.near(
            &format!("V2 n={n} r·sin(2π/n)"),
            r * (2.0 * PI / n as f64).sin(),
            row.r_sin,
            tol,
        );
        c.near(
            &format!("V2 n={n} sin(π/n)"),
            (PI / n as f64).sin(),
            row.sin,
            tol,
        );
        c.near(&format!("V2 n={n} dp"), brute, row.dp, tol);
        c.near(
            &format!("V2 n={n} brute vs analytic"),
            brute,
            v2_product(n).unwrap(),
            1e-9,
        );
    }
    c.within(start, Duration::from_secs(10));
    c
}

fn v3_table() -> Criterion {
    let mut c = Criterion::new();
    for row in V3_TABLE {
        let n = row.n;
        let size = v3_shell_counts(n).unwrap().total();
        c.check(size == row.size, || {
            format!("V3 n={n} size {size}, expected {}", row.size)
        });
        let dp = if n <= 8 {
            let start = Instant::now();
            let v = build_v3(n).unwrap();
            c.check(v.len() == row.size, || {
                format!("V3 n={n} built {} codewords", v.len())
            });
            let dp = diversity_product(&v).unwrap().value;
            if n == 8 {
                c.within(start, Duration::from_secs(300));
            }
            dp
        } else {
            v3_product(n)
        };
        c.near(&format!("V3 n={n} dp"), dp, row.dp, tables::TABLE_TOLERANCE);
    }
    c
}

fn corollaries() -> Criterion {
    let mut c = Criterion::new();
    for n in [12, 14, 16] {
        let dp = diversity_product(&build_v1(n).unwrap()).unwrap().value;
        c.near(
            &format!("V1 n={n}"),
            dp,
            FRAC_1_SQRT_2 * (PI / n as f64).sin(),
            1e-9,
        );
    }
    for n in [14, 16, 64] {
        let dp = diversity_product(&build_v2(n).unwrap()).unwrap().value;
        c.near(&format!("V2 n={n}"), dp, (PI / n as f64).sin(), 1e-9);
    }
    c
}

fn v4() -> Criterion {
    let mut c = Criterion::new();
    let v = build_v4(2).unwrap();
    c.check(v.len() == 103, || {
        format!("V4(2) has {} codewords", v.len())
    });
    let dp = diversity_product(&v).unwrap().value;
    c.near("V4(2) dp", dp, (PI / 8.0).sin(), 1e-9);
    c
}

fn rates() -> Criterion {
    let mut c = Criterion::new();
    c.near("rate V1(44)", build_v1(44).unwrap().rate(), 5.9594, 1e-4);
    c.near("rate V3(9)", build_v3(9).unwrap().rate(), 5.8886, 1e-4);
    c.near("rate V3(10)", build_v3(10).unwrap().rate(), 6.1290, 1e-4);
    c
}

const ORACLE_INSTANCES: usize = 10_000;

fn oracle_family(c: &mut Criterion, v: &Constellation, seed: u64) {
    let m = v.dimension();
    let n_rx = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut mismatched = 0;
    for _ in 0..ORACLE_INSTANCES {
        let rho = analysis::db_to_linear(rng.random_range(-5.0..25.0));
        let h = sample_fading(m, n_rx, &mut rng);
        let s = &v.codewords()[rng.random_range(0..v.len())];
        let k = rng.random_range(0..v.len());
        let x = transmit_block(s, &h, rho, &mut rng).unwrap();
        let y = transmit_block(&(&v.codewords()[k] * s), &h, rho, &mut rng).unwrap();

        let fast = decode_differential(&x, &y, v, DecoderKind::Fast).unwrap();
        let exh = decode_exhaustive_diff(&x, &y, v).unwrap();
        let exh_corr = 0.5 * (x.frobenius_norm_sqr() + y.frobenius_norm_sqr() - exh.metric);
        worst = worst.max((fast.metric - exh_corr).abs());

        let mut d = differential_distances(&x, &y, v).unwrap();
        d.sort_by(f64::total_cmp);
        if d[1] - d[0] > 1e-6 && fast.index != exh.index {
            mismatched += 1;
        }
    }
    c.check(worst <= 1e-9, || {
        format!("{}: worst metric gap {worst:e}", v.label())
    });
    c.check(mismatched == 0, || {
        format!("{}: {mismatched} index disagreements", v.label())
    });
}

fn oracle() -> Criterion {
    let mut c = Criterion::new();
    let start = Instant::now();
    let families = [
        build_o(8).unwrap(),
        build_v1(8).unwrap(),
        build_v2(8).unwrap(),
        build_v3(4).unwrap(),
        lift_real4(&build_o(8).unwrap()).unwrap(),
        build_v4(2).unwrap(),
    ];
    for (i, v) in families.iter().enumerate() {
        oracle_family(&mut c, v, 100 + i as u64);
    }
    c.within(start, Duration::from_secs(120));
    c
}

fn simulate(v: &Constellation, n_rx: usize, snr: Vec<f64>, blocks: usize) -> Vec<BlerPoint> {
    let mut cfg = SimConfig::new(v, n_rx, snr);
    cfg.blocks_per_point = blocks;
    cfg.seed = 2024;
    run_bler(&cfg).unwrap()
}

fn separated_below(a: &BlerPoint, b: &BlerPoint) -> bool {
    a.bler + a.ci95_halfwidth < b.bler - b.ci95_halfwidth
}

fn figures() -> Criterion {
    let mut c = Criterion::new();
    let start = Instant::now();
    let blocks = 100_000;

    let high = 12.0;
    let v3_5 = build_v3(5).unwrap();
    let v3 = simulate(&v3_5, 12, vec![high], blocks)[0];
    for other in [
        v3_5.clone(),
        build_o(23).unwrap(),
        build_v1(16).unwrap(),
        build_v2(22).unwrap(),
    ] {
        c.check((other.rate() - 4.5).abs() < 0.1, || {
            format!(
                "{} rate {:.3} outside the 4.5 band",
                other.label(),
                other.rate()
            )
        });
    }
    for other in [
        build_o(23).unwrap(),
        build_v1(16).unwrap(),
        build_v2(22).unwrap(),
    ] {
        let p = simulate(&other, 12, vec![high], blocks)[0];
        c.check(separated_below(&v3, &p), || {
            format!(
                "V3(5) {:.3e}±{:.1e} not below {} {:.3e}±{:.1e} at {high} dB",
                v3.bler,
                v3.ci95_halfwidth,
                other.label(),
                p.bler,
                p.ci95_halfwidth
            )
        });
    }

    let (low, high) = (0.0, 9.0);
    let v4 = simulate(&build_v4(2).unwrap(), 2, vec![low, high], blocks);
    let d3 = simulate(&build_diag3(), 2, vec![low, high], blocks);
    c.check(separated_below(&d3[0], &v4[0]), || {
        format!(
            "diag3 {:.3e} not below V4(2) {:.3e} at {low} dB",
            d3[0].bler, v4[0].bler
        )
    });
    c.check(separated_below(&v4[1], &d3[1]), || {
        format!(
            "V4(2) {:.3e} not below diag3 {:.3e} at {high} dB",
            v4[1].bler, d3[1].bler
        )
    });
    c.within(start, Duration::from_secs(600));
    c
}

fn all_families() -> Vec<Constellation> {
    let mut out = vec![build_diag3()];
    out.extend((2..=16).map(|n| build_o(n).unwrap()));
    out.extend((4..=16).step_by(2).map(|n| build_v1(n).unwrap()));
    out.extend((4..=22).step_by(2).map(|n| build_v2(n).unwrap()));
    out.extend((2..=8).map(|n| build_v3(n).unwrap()));
    out.extend((1..=3).map(|n| build_v4(n).unwrap()));
    out.push(lift_real4(&build_v2(8).unwrap()).unwrap());
    out.push(lift_real4(&build_v3(3).unwrap()).unwrap());
    out.push(build_real8_product(&build_o(4).unwrap(), &build_v1(4).unwrap()).unwrap());
    out
}

fn random_matrix(rng: &mut impl Rng, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn design_identity(c: &mut Criterion, pattern: &DesignPattern, rng: &mut impl Rng) {
    let n = pattern.side;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sm = pattern.matrix(&s);
        let b = design_rhs_map(pattern, &x);
        let x2: f64 = x.iter().map(|v| v * v).sum();
        for r in 0..n {
            let lhs: f64 = (0..n).map(|k| sm[(r, k)].re * x[k]).sum();
            let rhs: f64 = (0..n).map(|k| b[r * n + k] * s[k]).sum();
            worst = worst.max((lhs - rhs).abs());
            for q in 0..n {
                let g: f64 = (0..n).map(|k| b[k * n + r] * b[k * n + q]).sum();
                let want = if r == q { x2 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
    }
    c.check(worst <= 1e-12, || {
        format!("side-{n} design identity error {worst:e}")
    });
}

fn properties() -> Criterion {
    let mut c = Criterion::new();
    for v in all_families() {
        let e = v.max_unitarity_error();
        c.check(e <= 1e-12, || {
            format!("{} unitarity error {e:e}", v.label())
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for m in [2, 4, 8] {
        for _ in 0..200 {
            let a = random_matrix(&mut rng, m);
            let det = a.determinant().unwrap().norm();
            let prod: f64 = a.singular_values().unwrap().iter().product();
            c.check((det - prod).abs() <= 1e-9 * det.max(1.0), || {
                format!("side {m}: |det| {det} vs singular value product {prod}")
            });
        }
    }

    let mut b4_worst = 0.0f64;
    for _ in 0..1000 {
        let x: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let b = gpsk::constellation::b_map(x);
        let derived = design_rhs_map(&REAL4_PATTERN, &x);
        for (p, q) in b.as_slice().iter().zip(&derived) {
            b4_worst = b4_worst.max((p.re - q).abs());
        }
    }
    c.check(b4_worst <= 1e-12, || {
        format!("b_map differs from derivation by {b4_worst:e}")
    });
    design_identity(&mut c, &REAL4_PATTERN, &mut rng);
    design_identity(&mut c, &REAL8_PATTERN, &mut rng);

    let v = build_v1(8).unwrap();
    let mut cfg = SimConfig::new(&v, 2, vec![5.0, 10.0]);
    cfg.blocks_per_point = 5000;
    cfg.seed = 11;
    cfg.threads = Some(1);
    let serial = run_bler(&cfg).unwrap();
    cfg.threads = Some(4);
    let parallel = run_bler(&cfg).unwrap();
    c.check(serial == parallel, || {
        "results depend on worker count".into()
    });

    let samples = 100_000;
    let s = CMatrix::identity(2);
    let mut noise = 0.0;
    let mut signal = 0.0;
    let rho = 10.0;
    for f in 0..samples {
        let mut rng = frame_rng(5, 0, f);
        let h = sample_fading(2, 1, &mut rng);
        noise += transmit_block(&s, &h, 0.0, &mut rng)
            .unwrap()
            .frobenius_norm_sqr();
        signal += transmit_block(&s, &h, rho, &mut rng)
            .unwrap()
            .frobenius_norm_sqr();
    }
    let entries = 2.0 * samples as f64;
    let noise_power = noise / entries;
    let signal_power = signal / entries - 1.0;
    c.check((noise_power - 1.0).abs() <= 0.01, || {
        format!("noise power {noise_power}")
    });
    c.check((signal_power / rho - 1.0).abs() <= 0.01, || {
        format!("signal power {signal_power} at ρ = {rho}")
    });
    c
}

type Check = fn() -> Criterion;

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("V1 table", v1_table),
        ("V2 table", v2_table),
        ("V3 sizes and diversity", v3_table),
        ("corollaries", corollaries),
        ("V4(2)", v4),
        ("rates", rates),
        ("fast/exhaustive equivalence", oracle),
        ("figure ordering", figures),
        ("property suite", properties),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let status = if result.passed() { "PASS" } else { "FAIL" };
        println!(
            "criterion {} {name}: {status} ({:.1?})",
            i + 1,
            start.elapsed()
        );
        for f in &result.failures {
            println!("    {f}");
        }
        if !result.passed() {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
