//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use easort::amj::{self, JoinStrategy};
use easort::bounds::{
    avg_esp_random_exact, ball_bound_ee, ball_bound_errors, ball_bound_esp, ee_lower_bound,
    expected_bucket_distortion_exact, rational_to_f64,
};
use easort::easort::compute_bucket_count;
use easort::perm::{ball_size_exhaustive, d_ee, d_errors, d_esp, d_sp, for_each_permutation};
use easort::{
    cost_model, materialize, BlockStore, BlockWidth, CostParams, EasortConfig, IoParams, MetricKind, Permutation,
    VbfTree,
};
use easort_cli::trial_rng;
use rand::Rng;
use rayon::prelude::*;

const SIGMA_BAND: f64 = 3.0;
const ORACLE_REL_TOL: f64 = 0.05;
const FPR_LOW: f64 = 0.5;
const FPR_HIGH: f64 = 2.0;
const MODEL_FACTOR: f64 = 2.0;
const JOIN_INSTANCES: usize = 200;
const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

/// Generator for one trial of one criterion; `(criterion, sub)` picks a
/// disjoint stream family so no two checks share samples.
fn rng_for(criterion: u64, sub: u64, trial: u64) -> rand_chacha::ChaCha8Rng {
    trial_rng(SEED ^ (criterion << 40) ^ (sub << 20), trial)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn perm(v: &[usize]) -> Permutation {
    Permutation::new(v.to_vec()).unwrap()
}

fn w(b: usize) -> BlockWidth {
    BlockWidth::new(b).unwrap()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Whether `mean` of `trials` samples with sample deviation `sd` lies
/// within the sigma band of `target`.
fn within_sigma(mean: f64, sd: f64, trials: usize, target: f64) -> (bool, f64) {
    let se = sd / (trials as f64).sqrt();
    let z = (mean - target).abs() / se;
    (z <= SIGMA_BAND, z)
}

fn c1_fixtures() -> Outcome {
    let id = Permutation::identity(8);
    let a = perm(&[8, 2, 3, 4, 5, 6, 7, 1]);
    let b = perm(&[3, 4, 5, 2, 1, 7, 6, 8]);
    let c = perm(&[3, 2, 5, 4, 1, 7, 6, 8]);
    let checks = [
        ("d_sp a", d_sp(&a, &id).unwrap(), 14),
        ("d_sp b", d_sp(&b, &id).unwrap(), 14),
        ("d_errors a", d_errors(&a, &id).unwrap(), 2),
        ("d_esp a b=2", d_esp(&a, &id, w(2)).unwrap(), 6),
        ("d_esp c b=2", d_esp(&c, &id, w(2)).unwrap(), 6),
    ];
    for (name, got, want) in checks {
        ensure(got == want, || format!("{name} = {got}, want {want}"))?;
    }
    Ok("5 fixtures exact".into())
}

fn axioms(p: &Permutation, q: &Permutation, r: &Permutation, b: BlockWidth) -> Result<(), String> {
    for metric in MetricKind::ALL {
        let d = |x: &Permutation, y: &Permutation| metric.distance(x, y, b).unwrap();
        let (pq, qr, pr) = (d(p, q), d(q, r), d(p, r));
        let ok = d(p, p) == 0
            && pq == d(q, p)
            && pr <= pq + qr
            && d(&p.compose(r).unwrap(), &q.compose(r).unwrap()) == pq;
        ensure(ok, || format!("{} fails on {p}, {q}, {r}, b={}", metric.name(), b.get()))?;
    }
    Ok(())
}

fn c2_axioms() -> Outcome {
    let mut all = Vec::new();
    for_each_permutation(5, |p| all.push(p.clone()));
    let widths = [1, 2, 3, 5];
    all.par_iter().try_for_each(|p| {
        for q in &all {
            for r in &all {
                for &b in &widths {
                    axioms(p, q, r, w(b))?;
                }
            }
        }
        Ok::<_, String>(())
    })?;
    let mut rng = rng_for(2, 0, 0);
    for _ in 0..1000 {
        let p = Permutation::random(64, &mut rng);
        let q = Permutation::random(64, &mut rng);
        let r = Permutation::random(64, &mut rng);
        axioms(&p, &q, &r, w(rng.gen_range(1..=64)))?;
    }
    Ok(format!("{} S_5 triples x {} widths, 1000 random triples at n=64", all.len().pow(3), widths.len()))
}

fn c3_balls() -> Outcome {
    let mut checked = 0;
    for n in 1..=7usize {
        for b in 1..=3usize {
            for r in 0..=n as u64 {
                let nn = n as u64;
                let bb = b as u64;
                let pairs = [
                    (MetricKind::Errors, ball_bound_errors(nn, r)),
                    (MetricKind::ExternalErrors, ball_bound_ee(nn, bb, r)),
                    (MetricKind::Esp, ball_bound_esp(nn, bb, r)),
                ];
                for (metric, bound) in pairs {
                    let size = ball_size_exhaustive(n, w(b), r, metric).unwrap();
                    ensure(num_bigint::BigUint::from(size) <= bound, || {
                        format!("{} ball n={n} b={b} r={r}: {size} > {bound}", metric.name())
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (n, b, r, metric) balls within bounds"))
}

fn sample_metric(
    trials: usize,
    (criterion, sub): (u64, u64),
    f: impl Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
) -> Vec<f64> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| f(&mut rng_for(criterion, sub, i)))
        .collect()
}

fn c4_random_ee() -> Outcome {
    let (n, b, trials) = (1000, 10, 100_000);
    let id = Permutation::identity(n);
    let xs = sample_metric(trials, (4, 0), |rng| d_ee(&Permutation::random(n, rng), &id, w(b)).unwrap() as f64);
    let (mean, sd) = mean_sd(&xs);
    let target = (n - b) as f64;
    let (ok, z) = within_sigma(mean, sd, trials, target);
    ensure(ok, || format!("mean {mean:.3} vs {target}, z = {z:.2}"))?;
    Ok(format!("mean {mean:.3} vs {target}, z = {z:.2}"))
}

fn c5_random_esp() -> Outcome {
    let (n, trials) = (120usize, 100_000);
    let id = Permutation::identity(n);
    let mut detail = Vec::new();
    for b in [2usize, 4, 6] {
        let exact = rational_to_f64(&avg_esp_random_exact(n, b).unwrap());
        let centre = (n * n) as f64 / (3 * b) as f64;
        ensure(exact >= centre - 2.0 * b as f64 && exact <= centre, || {
            format!("b={b}: exact {exact} outside [{}, {centre}]", centre - 2.0 * b as f64)
        })?;
        let xs = sample_metric(trials, (5, b as u64), |rng| {
            d_esp(&Permutation::random(n, rng), &id, w(b)).unwrap() as f64
        });
        let (mean, sd) = mean_sd(&xs);
        let (ok, z) = within_sigma(mean, sd, trials, exact);
        ensure(ok, || format!("b={b}: mean {mean:.3} vs exact {exact:.3}, z = {z:.2}"))?;
        detail.push(format!("b={b} z={z:.2}"));
    }
    Ok(detail.join(", "))
}

struct SortSample {
    t: u64,
    d_ee: u64,
    d_esp: u64,
}

fn sort_once(keys: &[u64], m: usize, b: usize, k: usize) -> Result<SortSample, String> {
    let params = IoParams::new(keys.len(), m, b).unwrap();
    let mut store = BlockStore::new(params);
    let f = store.load_unmetered(keys);
    let run = easort::easort(&mut store, f, &EasortConfig::new(k, 0).unwrap()).map_err(|e| e.to_string())?;
    run.validate(&store).map_err(|e| format!("bucket order: {e}"))?;
    let mut out = run.output_keys(&store).unwrap();
    let p = materialize(&run, &store).unwrap();
    out.sort_unstable();
    let mut want = keys.to_vec();
    want.sort_unstable();
    ensure(out == want, || "multiset not conserved".into())?;
    let id = Permutation::identity(keys.len());
    Ok(SortSample {
        t: store.stats().t(),
        d_ee: d_ee(&p, &id, w(b)).unwrap(),
        d_esp: d_esp(&p, &id, w(b)).unwrap(),
    })
}

/// Criteria 6 and 7 share one sweep.
fn c6_c7_sweep() -> (Outcome, Outcome) {
    let (n, m, b) = (10_000usize, 100usize, 10usize);
    let p = compute_bucket_count(m, b).unwrap();
    let params = IoParams::new(n, m, b).unwrap();
    let mut esp_means = Vec::new();
    let mut c6 = Vec::new();
    let mut c7 = Ok(Vec::new());
    for k in 1..=3usize {
        let runs: Result<Vec<SortSample>, String> = (0..50u64)
            .into_par_iter()
            .map(|seed| {
                let keys: Vec<u64> = Permutation::random(n, &mut rng_for(6, 0, seed))
                    .into_vec()
                    .into_iter()
                    .map(|v| v as u64)
                    .collect();
                sort_once(&keys, m, b, k)
            })
            .collect();
        let runs = match runs {
            Ok(r) => r,
            Err(e) => return (Err(format!("k={k}: {e}")), Err("sweep failed".into())),
        };
        let limit = 2 * k as u64 * n.div_ceil(b) as u64 + 2 * (p as u64).pow(k as u32);
        let t_max = runs.iter().map(|r| r.t).max().unwrap();
        if t_max > limit {
            return (Err(format!("k={k}: t = {t_max} > {limit}")), Err("sweep failed".into()));
        }
        let esp_mean = runs.iter().map(|r| r.d_esp as f64).sum::<f64>() / runs.len() as f64;
        esp_means.push(esp_mean);
        c6.push(format!("k={k} t_max={t_max}/{limit} esp={esp_mean:.0}"));

        let ee_mean = runs.iter().map(|r| r.d_ee as f64).sum::<f64>() / (runs.len() * n) as f64;
        let mut worst_bound = f64::NEG_INFINITY;
        for r in &runs {
            let bound = ee_lower_bound(&params, r.t + r.t % 2).unwrap().value;
            worst_bound = worst_bound.max(bound);
            if (r.d_ee as f64) / (n as f64) < bound {
                c7 = Err(format!("k={k}: d_ee/n = {} < bound {bound}", r.d_ee as f64 / n as f64));
            }
        }
        if ee_mean < worst_bound {
            c7 = Err(format!("k={k}: mean d_ee/n = {ee_mean} < bound {worst_bound}"));
        }
        if let Ok(v) = &mut c7 {
            v.push(format!("k={k} mean={ee_mean:.4} bound={worst_bound:.4}"));
        }
    }
    let c6 = if esp_means.windows(2).all(|w| w[1] <= w[0]) {
        Ok(c6.join(", "))
    } else {
        Err(format!("mean d_esp not nonincreasing in k: {esp_means:?}"))
    };
    (c6, c7.map(|v| v.join(", ")))
}

fn c8_bucket_oracle() -> Outcome {
    let (n, m, b, k, trials) = (24usize, 8usize, 2usize, 1usize, 100_000usize);
    let oracle = rational_to_f64(&expected_bucket_distortion_exact(n, m, b, k).unwrap());
    let xs = sample_metric(trials, (8, 0), |rng| {
        let keys: Vec<u64> = Permutation::random(n, rng).into_vec().into_iter().map(|v| v as u64).collect();
        sort_once(&keys, m, b, k).unwrap().d_esp as f64
    });
    let (mean, _) = mean_sd(&xs);
    let rel = (mean - oracle).abs() / oracle;
    ensure(rel <= ORACLE_REL_TOL, || format!("oracle {oracle:.4} vs mean {mean:.4} (rel {rel:.4})"))?;
    Ok(format!("oracle {oracle:.4} vs mean {mean:.4} (rel {rel:.4})"))
}

fn vbf_fixture(n: usize, m: usize, b: usize, fpp: f64, seed: u64) -> (BlockStore, VbfTree, CostParams, Vec<u64>) {
    // even keys, so every odd key inside the range is absent
    let keys: Vec<u64> = Permutation::random(n, &mut rng_for(9, 0, seed))
        .into_vec()
        .into_iter()
        .map(|v| 2 * v as u64)
        .collect();
    let mut store = BlockStore::new(IoParams::new(n, m, b).unwrap());
    let f = store.load_unmetered(&keys);
    let run = easort::easort(&mut store, f, &EasortConfig::new(1, 0).unwrap()).unwrap();
    let cp = CostParams::for_run(&run).unwrap().with_fpp(fpp);
    let tree = VbfTree::bulk_build(&run, &mut store, &cp).unwrap();
    (store, tree, cp, keys)
}

fn c9_vbf() -> Outcome {
    let (n, m, b, fpp) = (10_000usize, 100usize, 10usize, 0.01);
    let (mut store, tree, _, keys) = vbf_fixture(n, m, b, fpp, 0);
    for &k in &keys {
        let r = tree.point_query(&mut store, k).map_err(|e| e.to_string())?;
        ensure(!r.hits.is_empty(), || format!("false negative for key {k}"))?;
    }

    let mut rng = rng_for(9, 1, 0);
    let (mut data, mut matched) = (0u64, 0u64);
    for _ in 0..10_000 {
        let probe = 2 * rng.gen_range(1..n as u64) + 1;
        let r = tree.point_query(&mut store, probe).unwrap();
        data += r.stats.data_reads;
        matched += r.stats.matched_bfs;
    }
    let rate = data as f64 / matched as f64;
    ensure((FPR_LOW * fpp..=FPR_HIGH * fpp).contains(&rate), || {
        format!("absent-key data reads {data} / matched filters {matched} = {rate:.4}")
    })?;

    let mut grid = Vec::new();
    for fpp in [0.05, 0.1, 0.2] {
        for b in [10usize, 32, 64] {
            let (n, m) = (20_000usize, 1024usize);
            let (mut store, tree, cp, _) = vbf_fixture(n, m, b, fpp, b as u64);
            let Ok(model) = cost_model(&cp) else {
                grid.push(format!("b={b}/fpp={fpp} degenerate"));
                continue;
            };
            let mut rng = rng_for(9, 2, b as u64);
            let (mut io, mut mbf) = (0u64, 0u64);
            let probes = 2000;
            for _ in 0..probes {
                let r = tree.point_query(&mut store, 2 * rng.gen_range(1..n as u64) + 1).unwrap();
                io += r.stats.total_io();
                mbf += r.stats.matched_bfs;
            }
            let measured = io as f64 / probes as f64;
            let predicted = model.single_query(mbf as f64 / probes as f64);
            let ratio = measured / predicted;
            ensure((1.0 / MODEL_FACTOR..=MODEL_FACTOR).contains(&ratio), || {
                format!("b={b} fpp={fpp}: measured {measured:.2} vs model {predicted:.2}")
            })?;
            grid.push(format!("b={b}/fpp={fpp} x{ratio:.2}"));
        }
    }

    let mut sorted = keys.clone();
    sorted.sort_unstable();
    for (lo, hi) in [(0, 40), (1, 1), (2, 2), (500, 9000), (7777, 7801), (19_990, 30_000), (0, u64::MAX)] {
        let mut got = tree.range_query(&mut store, lo, hi).unwrap().keys;
        got.sort_unstable();
        let want: Vec<u64> = sorted.iter().copied().filter(|k| (lo..=hi).contains(k)).collect();
        ensure(got == want, || format!("range [{lo}, {hi}] differs from scan"))?;
    }
    Ok(format!("no false negatives, absent rate {rate:.4}; model ratios: {}", grid.join(" ")))
}

fn nested_loop(left: &[u64], right: &[u64]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for &a in left {
        for &r in right {
            if amj::tuple_key(a) == amj::tuple_key(r) {
                out.push((amj::tuple_id(a), amj::tuple_id(r)));
            }
        }
    }
    out.sort_unstable();
    out
}

fn random_relation(rng: &mut impl Rng, len: usize, domain: u32, skew: bool) -> Vec<u64> {
    (0..len)
        .map(|i| {
            let u: f64 = rng.gen();
            let key = if skew { (u * u * domain as f64) as u32 } else { (u * domain as f64) as u32 };
            amj::pack_tuple(key, i as u32)
        })
        .collect()
}

fn sorted_pairs(mut v: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
    v.sort_unstable();
    v
}

fn c10_joins() -> Outcome {
    let mut case1 = 0;
    let mut case3 = 0;
    for shape in 0..2 {
        for inst in 0..JOIN_INSTANCES as u64 {
            let mut rng = rng_for(10, shape, inst);
            let b = [2usize, 4][rng.gen_range(0..2)];
            let m = b * rng.gen_range(4..=12);
            let k = rng.gen_range(1..=3);
            let domain = rng.gen_range(5..400);
            let skew = rng.gen_bool(0.5);
            let n1 = rng.gen_range(1..500);
            let n2 = rng.gen_range(0..500);
            let left = random_relation(&mut rng, n1, domain, skew);
            let right = random_relation(&mut rng, n2, domain, skew);
            let mut store = BlockStore::new(IoParams::new(10_000, m, b).unwrap());
            store.enable_trace();
            let (asr, _) = amj::approx_sort_relation(&mut store, &left, k, 0).unwrap();
            let res = if shape == 0 {
                let mut s = right.clone();
                s.sort_unstable();
                let sr = store.load_unmetered(&s);
                let strategy = if inst % 5 == 4 { JoinStrategy::Rescan } else { JoinStrategy::TempFile };
                let res = amj::join_asr_sr(&mut store, &asr, &[sr], strategy).unwrap();
                for sizes in &res.temp_sizes {
                    ensure(sizes.windows(2).all(|w| w[1] < w[0]), || {
                        format!("instance {inst}: temp sizes {sizes:?} do not shrink")
                    })?;
                    case3 += 1;
                }
                if strategy == JoinStrategy::TempFile && !asr.is_empty() && n2 > 0 {
                    let reads: Vec<usize> = store
                        .trace()
                        .iter()
                        .filter(|e| e.file == sr && e.kind == easort::io_sim::IoKind::Read)
                        .map(|e| e.index)
                        .collect();
                    ensure(reads.windows(2).all(|w| w[0] <= w[1]), || {
                        format!("instance {inst}: SR read out of order")
                    })?;
                }
                if res.cases.tolerable == asr.buckets.len() && !asr.is_empty() && n2 > 0 {
                    let sorted_left: Vec<_> = asr
                        .buckets
                        .iter()
                        .map(|bk| {
                            let mut c = store.contents_unmetered(bk.file).unwrap();
                            c.sort_unstable();
                            store.load_unmetered(&c)
                        })
                        .collect();
                    let classic = amj::classic_merge_join(&mut store, &sorted_left, &[sr]).unwrap();
                    ensure(classic.io == res.io, || {
                        format!("instance {inst}: case-1 I/O {:?} vs classic {:?}", res.io, classic.io)
                    })?;
                    case1 += 1;
                }
                res
            } else {
                let (bside, _) = amj::approx_sort_relation(&mut store, &right, rng.gen_range(1..=3), 0).unwrap();
                amj::join_asr_asr(&mut store, &asr, &bside).unwrap()
            };
            ensure(res.peak_memory <= m, || format!("instance {inst}: memory {} > {m}", res.peak_memory))?;
            ensure(sorted_pairs(res.pairs) == nested_loop(&left, &right), || {
                format!("shape {shape} instance {inst}: result differs from nested loop")
            })?;
        }
    }
    ensure(case1 > 0 && case3 > 0, || format!("coverage: {case1} case-1 and {case3} case-3 instances"))?;
    Ok(format!(
        "{} instances per shape; {case1} case-1 I/O matches, {case3} temp-file buckets shrinking",
        JOIN_INSTANCES
    ))
}

fn c11_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_easort");
    let dir = std::env::temp_dir().join(format!("easort-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let keyfile = dir.join("keys.bin");
    let key_arg = keyfile.to_str().unwrap().to_string();
    let invocations: Vec<Vec<String>> = [
        "sort --n 5000 --m 100 --b 10 --k 2 --trials 4 --seed 11",
        "sort --n 3000 --k 1 --seed 3 --duplicates 3",
        "index --n 4000 --m 200 --b 16 --k 1 --fpp 0.1 --seed 5",
        "query --n 4000 --k 2 --seed 5 --point 17 --point 9999 --range 100 300",
        "join --n 1500 --m 64 --b 4 --k 1 --seed 9 --duplicates 2 --trials 3",
        "join --shape two-side --n 1500 --n2 900 --m 64 --b 4 --k 2 --seed 9",
        "join --n 1500 --m 64 --b 4 --k 1 --seed 9 --alt-rescan",
        "bounds --n 100000 --m 1000 --b 10 --t 20000 --k 2",
    ]
    .iter()
    .map(|s| s.split(' ').map(String::from).collect())
    .chain(std::iter::once(vec![
        "gen".into(),
        "--n".into(),
        "500".into(),
        "--seed".into(),
        "7".into(),
        "--output".into(),
        key_arg.clone(),
    ]))
    .collect();
    let run = |args: &[String]| -> Result<Vec<u8>, String> {
        let out = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("{} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
        })?;
        if args[0] == "gen" {
            return std::fs::read(&keyfile).map_err(|e| e.to_string());
        }
        Ok(out.stdout)
    };
    for args in &invocations {
        let (first, second) = (run(args)?, run(args)?);
        ensure(first == second, || format!("{} differs between runs", args.join(" ")))?;
    }
    let from_file: Vec<String> = ["sort", "--input", &key_arg, "--m", "40", "--b", "4", "--k", "2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    ensure(run(&from_file)? == run(&from_file)?, || "sort --input differs".into())?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} invocations byte-identical", invocations.len() + 1))
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Duration,
}

fn report(c: &Criterion, outcome: Outcome, elapsed: Duration, failures: &mut usize) {
    let outcome = outcome.and_then(|d| {
        if elapsed > c.budget {
            Err(format!("{d}; took {elapsed:.1?}, budget {:?}", c.budget))
        } else {
            Ok(d)
        }
    });
    match outcome {
        Ok(d) => println!("criterion {:>2} [{}]: PASS ({elapsed:.1?}) {d}", c.id, c.name),
        Err(d) => {
            *failures += 1;
            println!("criterion {:>2} [{}]: FAIL ({elapsed:.1?}) {d}", c.id, c.name);
        }
    }
}

fn main() {
    let secs = Duration::from_secs;
    let plain: Vec<(Criterion, fn() -> Outcome)> = vec![
        (Criterion { id: 1, name: "metric fixtures", budget: secs(1) }, c1_fixtures),
        (Criterion { id: 2, name: "metric axioms", budget: secs(30) }, c2_axioms),
        (Criterion { id: 3, name: "ball bounds", budget: secs(60) }, c3_balls),
        (Criterion { id: 4, name: "random-permutation EE", budget: secs(60) }, c4_random_ee),
        (Criterion { id: 5, name: "random-permutation ESP", budget: secs(60) }, c5_random_esp),
    ];
    let mut failures = 0;
    for (c, f) in &plain {
        let start = Instant::now();
        let outcome = f();
        report(c, outcome, start.elapsed(), &mut failures);
    }

    let start = Instant::now();
    let (c6, c7) = c6_c7_sweep();
    let elapsed = start.elapsed();
    report(&Criterion { id: 6, name: "EASORT structure", budget: secs(300) }, c6, elapsed, &mut failures);
    report(&Criterion { id: 7, name: "EE lower bound", budget: secs(300) }, c7, elapsed, &mut failures);

    let rest: Vec<(Criterion, fn() -> Outcome)> = vec![
        (Criterion { id: 8, name: "bucket distortion oracle", budget: secs(300) }, c8_bucket_oracle),
        (Criterion { id: 9, name: "VBF-Tree", budget: secs(300) }, c9_vbf),
        (Criterion { id: 10, name: "joins", budget: secs(600) }, c10_joins),
        (Criterion { id: 11, name: "CLI determinism", budget: secs(120) }, c11_determinism),
    ];
    for (c, f) in &rest {
        let start = Instant::now();
        let outcome = f();
        report(c, outcome, start.elapsed(), &mut failures);
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
