//! Acceptance gate: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. Exits
//! nonzero when any criterion fails, except for lines listed in
//! `KNOWN_INCONSISTENT`, which still print `[FAIL]`.

use std::collections::BTreeMap;
use std::time::Instant;

use chaos_core::experiments::{counterexample_kernel, pair_partition_family, Thresholds};
use chaos_core::{
    diagnose, embed, fourth_moment_structured, moment_bruteforce, poisson_central_moment,
    product_moment_bruteforce, product_second_moment_structured, prop41_residuals, simulate, star,
    universality_run, variance_exact, MomentProvider, ProviderKind, RngSpec, SymmetricKernel,
    WeightVector,
};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The literal worked value 0.03125 contradicts the criterion's own identity
/// (Σ f⁴/λ = 4·(1/16)/2 = 0.125 for that instance).
const KNOWN_INCONSISTENT: &[&str] = &["2b"];

struct Line {
    id: &'static str,
    ok: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn random_kernel(
    rng: &mut ChaCha8Rng,
    q: usize,
    size: usize,
    max_support: usize,
) -> (SymmetricKernel, WeightVector) {
    let support = rng.random_range(1..=max_support.min(binomial(size, q)));
    let mut entries = BTreeMap::new();
    while entries.len() < support {
        let mut t: Vec<u32> = sample(rng, size, q)
            .into_iter()
            .map(|i| i as u32 + 1)
            .collect();
        t.sort_unstable();
        entries.insert(t, rng.random_range(-1.0..1.0));
    }
    let f = SymmetricKernel::build(q, size, entries).unwrap();
    let w = WeightVector::new((0..size).map(|_| rng.random_range(0.5..=4.0)).collect()).unwrap();
    (f, w)
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    let cases = 240;
    for trial in 0..cases {
        let q = 1 + trial % 3;
        let n = rng.random_range(q.max(2)..=6);
        let (f, w) = random_kernel(&mut rng, q, n, 8);
        let a = fourth_moment_structured(&f, &w).unwrap();
        let b = moment_bruteforce(&f, &MomentProvider::Poisson(w), 4).unwrap();
        worst = worst.max(rel(a, b));
    }
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: "1",
        ok: worst <= 1e-9 && secs <= 60.0,
        detail: format!(
            "fourth moment chaos route vs brute force: {cases} cases, max rel diff {worst:.2e} (≤ 1e-9), {secs:.2}s (≤ 60s)"
        ),
    }
}

fn criterion_2() -> Vec<Line> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let (f, w) = random_kernel(&mut rng, 1, n, 12);
        let gap = diagnose(&f, &w, &MomentProvider::Poisson(w.clone()))
            .unwrap()
            .gap;
        let stat: f64 = f.iter().map(|(t, v)| v.powi(4) / w.get(t[0])).sum();
        worst = worst.max((gap - stat).abs());
    }
    let f = SymmetricKernel::build(1, 4, (1..=4).map(|i| (vec![i], 0.5))).unwrap();
    let w = WeightVector::constant(4, 2.0).unwrap();
    let gap = diagnose(&f, &w, &MomentProvider::Poisson(w.clone()))
        .unwrap()
        .gap;
    let brute = moment_bruteforce(&f, &MomentProvider::Poisson(w.clone()), 4).unwrap() - 3.0;
    let expression = 4.0 * (1.0 / 16.0) / 2.0;
    vec![
        Line {
            id: "2a",
            ok: worst <= 1e-12 && (gap - expression).abs() <= 1e-12 && (brute - expression).abs() <= 1e-12,
            detail: format!(
                "q=1 gap = Σ f⁴/λ: 200 kernels, max abs diff {worst:.2e} (≤ 1e-12); worked instance gap {gap} = 4·(1/16)/2 = {expression}, brute force {brute}"
            ),
        },
        Line {
            id: "2b",
            ok: gap == 0.03125,
            detail: format!(
                "worked instance literal value 0.03125: got {gap}; the literal disagrees with its own expression 4·(1/16)/2 = {expression}"
            ),
        },
    ]
}

fn criterion_3() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_slack = f64::INFINITY;
    for trial in 0..100 {
        let q = 2 + trial % 2;
        let n = rng.random_range(q..=8);
        let (f, w) = random_kernel(&mut rng, q, n, 8);
        for r in prop41_residuals(&f, &w).unwrap() {
            min_slack = min_slack.min(r.slack);
        }
    }
    let mut max_tight = 0.0_f64;
    for _ in 0..20 {
        let pairs = rng.random_range(1..=4u32);
        let f = SymmetricKernel::build(
            2,
            2 * pairs as usize,
            (1..=pairs).map(|i| (vec![2 * i - 1, 2 * i], 0.3 + rng.random::<f64>())),
        )
        .unwrap();
        let w = WeightVector::constant(2 * pairs as usize, rng.random_range(0.5..4.0)).unwrap();
        let b1 = prop41_residuals(&f, &w)
            .unwrap()
            .into_iter()
            .find(|r| r.name == "b1[l=1]")
            .unwrap();
        max_tight = max_tight.max(b1.slack.abs());
    }
    Line {
        id: "3",
        ok: min_slack >= -1e-10 && max_tight <= 1e-10,
        detail: format!(
            "contraction inequalities a, a', b1, b2 on 100 kernels: min slack {min_slack:.3e} (≥ -1e-10); equal-λ b1[l=1] |slack| ≤ {max_tight:.1e} (≤ 1e-10)"
        ),
    }
}

fn dense_diagonal_contraction(f: &SymmetricKernel, p: usize) -> f64 {
    let (q, n) = (f.order(), f.size() as u32);
    let all = |len: usize| -> Vec<Vec<u32>> {
        (0..len).fold(vec![Vec::new()], |acc, _| {
            acc.into_iter()
                .flat_map(|t| {
                    (1..=n).map(move |i| {
                        let mut u = t.clone();
                        u.push(i);
                        u
                    })
                })
                .collect()
        })
    };
    let heads = all(p);
    all(2 * (q - p))
        .into_iter()
        .map(|k| {
            let (k1, k2) = k.split_at(q - p);
            let s: f64 = heads
                .iter()
                .map(|a| {
                    let l: Vec<u32> = a.iter().chain(k1).copied().collect();
                    let r: Vec<u32> = a.iter().chain(k2).copied().collect();
                    f.get(&l) * f.get(&r)
                })
                .sum();
            s * s
        })
        .sum()
}

fn criterion_4() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    let mut checks = 0;
    for trial in 0..60 {
        let q = 1 + trial % 4;
        let n = rng.random_range(q.max(2)..=6);
        let (f, w) = random_kernel(&mut rng, q, n, 8);
        let g = embed(&f);
        for p in 1..=q {
            let s = star(&g, &g, p, p, &w).unwrap().l2_norm_sq();
            worst = worst.max(rel(s, dense_diagonal_contraction(&f, p)));
            checks += 1;
        }
    }
    Line {
        id: "4",
        ok: worst <= 1e-10,
        detail: format!("‖g ⋆ₚᵖ g‖² via star vs direct index sum: {checks} checks, max rel diff {worst:.2e} (≤ 1e-10)"),
    }
}

fn criterion_5() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for (p, q) in [(1, 1), (1, 2), (2, 2)] {
        for _ in 0..20 {
            let n = rng.random_range(2..=5);
            let (f1, w) = random_kernel(&mut rng, p, n, 8);
            let (f2, _) = random_kernel(&mut rng, q, n, 8);
            let (_, s) = product_second_moment_structured(&f1, &f2, &w).unwrap();
            let b =
                product_moment_bruteforce(&[&f1, &f1, &f2, &f2], &MomentProvider::Poisson(w), 1e8)
                    .unwrap();
            worst = worst.max(rel(s, b));
        }
    }
    Line {
        id: "5",
        ok: worst <= 1e-9,
        detail: format!("E[(Q_p Q_q)²] brute force vs Σ k!‖G_k‖² for (1,1),(1,2),(2,2): max rel diff {worst:.2e} (≤ 1e-9)"),
    }
}

fn criterion_6() -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for size in [4, 8, 12] {
        let f = counterexample_kernel(2, size).unwrap();
        let m = (size - 1) as f64;
        let rad = moment_bruteforce(&f, &MomentProvider::Rademacher, 4).unwrap();
        let gau = moment_bruteforce(&f, &MomentProvider::Gaussian, 4).unwrap();
        let var = variance_exact(&f);
        ok &= (rad - (3.0 - 2.0 / m)).abs() <= 1e-12
            && (gau - 9.0).abs() <= 1e-12
            && (var - 1.0).abs() <= 1e-14;
        parts.push(format!(
            "N={size}: rad {rad:.12} (3-2/{m}), gauss {gau:.12}, var {var}"
        ));
    }
    Line {
        id: "6",
        ok,
        detail: format!("counterexample q=2: {}", parts.join("; ")),
    }
}

fn criterion_7() -> Line {
    let pmf = |k: i32, lambda: f64| {
        let mut p = (-lambda).exp();
        let mut total = 0.0;
        for j in 0..400 {
            if j > 0 {
                p *= lambda / j as f64;
            }
            total += p * (j as f64 - lambda).powi(k);
        }
        total
    };
    let mut worst = 0.0_f64;
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        for k in 0..=8 {
            let r = poisson_central_moment(k, lambda).unwrap();
            let t = pmf(k as i32, lambda);
            // T̃₁ = 0 exactly; compare absolutely there
            let d = if k == 1 { (r - t).abs() } else { rel(r, t) };
            worst = worst.max(d);
        }
    }
    let mut t4 = 0.0_f64;
    for lambda in [0.1, 0.5, 1.0, 3.0, 7.5] {
        t4 = t4.max(rel(
            poisson_central_moment(4, lambda).unwrap(),
            lambda + 3.0 * lambda * lambda,
        ));
    }
    Line {
        id: "7",
        ok: worst <= 1e-10 && t4 <= 1e-14,
        detail: format!("Poisson central moments vs truncated pmf (k ≤ 8): max rel diff {worst:.2e} (≤ 1e-10); T̃₄ = λ+3λ² at 5 points, max rel diff {t4:.1e}"),
    }
}

fn criterion_8() -> Line {
    let start = Instant::now();
    let id = SymmetricKernel::build(1, 1, [(vec![1], 1.0)]).unwrap();
    let r = simulate(
        &id,
        &MomentProvider::Gaussian,
        100_000,
        &RngSpec::new(42, 16).unwrap(),
        None,
    )
    .unwrap();
    let report = universality_run(
        &pair_partition_family(),
        &[
            ProviderKind::Gaussian,
            ProviderKind::Rademacher,
            ProviderKind::Poisson,
        ],
        &[8, 64],
        100_000,
        &RngSpec::new(42, 16).unwrap(),
        Thresholds::default(),
    )
    .unwrap();
    let mut ok = r.w1 <= 0.015 && r.ks <= 0.01;
    let mut parts = Vec::new();
    for t in &report.trends {
        let rows: Vec<_> = report.rows_for(t.provider).collect();
        let w1_down = rows[1].w1 < rows[0].w1;
        ok &= t.gap_decreasing && w1_down;
        parts.push(format!(
            "{}: gap {:.4}→{:.4}, w1 {:.4}→{:.4}",
            t.provider, rows[0].gap, rows[1].gap, rows[0].w1, rows[1].w1
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 120.0;
    Line {
        id: "8",
        ok,
        detail: format!(
            "gaussian identity n=1e5: w1 {:.5} (≤ 0.015), ks {:.5} (≤ 0.01); pair-partition n∈{{8,64}} |gap| strictly down and w1(64) < w1(8): {}; {secs:.1}s (≤ 120s)",
            r.w1,
            r.ks,
            parts.join("; ")
        ),
    }
}

fn criterion_9() -> Line {
    let args = |threads: &str| {
        vec![
            "chaos",
            "universality",
            "--family",
            "counterexample",
            "--q",
            "2",
            "--providers",
            "gaussian,rademacher,poisson",
            "--grid",
            "8,32,128",
            "--samples",
            "100000",
            "--seed",
            "42",
            "--threads",
            threads,
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    let a = chaos_cli::run(args("1"));
    let b = chaos_cli::run(args("8"));
    let c = chaos_cli::run(args("8"));
    let ok = a.code == 0 && !a.stdout.is_empty() && a.stdout == b.stdout && b.stdout == c.stdout;
    Line {
        id: "9",
        ok,
        detail: format!(
            "universality stdout byte-identical for --threads 1, 8, 8 ({} bytes, exit {})",
            a.stdout.len(),
            a.code
        ),
    }
}

fn main() {
    let mut lines = vec![criterion_1()];
    lines.extend(criterion_2());
    lines.extend([
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ]);
    let mut blocking = 0;
    for l in &lines {
        let tag = if l.ok { "PASS" } else { "FAIL" };
        let note = if !l.ok && KNOWN_INCONSISTENT.contains(&l.id) {
            " [known inconsistent target]"
        } else {
            ""
        };
        println!("[{tag}] criterion {}: {}{note}", l.id, l.detail);
        if !l.ok && !KNOWN_INCONSISTENT.contains(&l.id) {
            blocking += 1;
        }
    }
    let passed = lines.iter().filter(|l| l.ok).count();
    println!(
        "acceptance: {passed}/{} lines passed, {blocking} blocking failures",
        lines.len()
    );
    if blocking > 0 {
        std::process::exit(1);
    }
}
