use crate::config::{parse_pair_kernel, CoronaMode, ExperimentConfig, PairChoice, Suite};
use heislab_core::beta;
use heislab_core::corona::{self, CoronaDecomposition};
use heislab_core::flag::{self, Kernel3};
use heislab_core::heis::{self, HPoint, HorizontalSubgroup, NormKind};
use heislab_core::kernels::{random_point, sample_triples, sk_constants, symmetry_check};
use heislab_core::sampled;
use heislab_core::sio::{self, PairKernel};
use heislab_core::tame::{self, PartialTameData, TameMapSampled};
use heislab_core::{fixtures, KernelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Artifacts of a finished suite. `failures` lists checks that ran but did not hold.
#[derive(Default)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub timings: Vec<(String, f64)>,
    pub failures: Vec<String>,
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, String> {
    let r = match cfg.suite {
        Suite::GeomSelftest => geom_selftest(cfg),
        Suite::KernelsCheck => kernels_check(cfg),
        Suite::TameExtend => tame_extend(cfg),
        Suite::Corona => corona_suite(cfg),
        Suite::SioNormSweep => norm_sweep(cfg),
        Suite::BetaCarleson => beta_carleson(cfg),
        Suite::FlagsNorm => flags_norm(cfg),
    };
    r.map_err(|e| e.to_string())
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Serialize)]
struct CheckRow {
    check: &'static str,
    samples: usize,
    max_error: f64,
    tolerance: f64,
    pass: bool,
}

fn rel(a: HPoint, b: HPoint) -> f64 {
    let s = 1.0 + a.x.abs().max(a.y.abs()).max(a.t.abs());
    (a.x - b.x).abs().max((a.y - b.y).abs()).max((a.t - b.t).abs()) / s
}

fn geom_selftest(cfg: &ExperimentConfig) -> Res<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.samples;
    let (mut assoc, mut inv, mut dil, mut left, mut sym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let p = random_point(&mut rng, 3.0);
        let q = random_point(&mut rng, 3.0);
        let r = random_point(&mut rng, 3.0);
        assoc = assoc.max(rel((p * q) * r, p * (q * r)));
        inv = inv.max(rel(p * p.inv(), HPoint::ORIGIN));
        let lam = 10f64.powf(rng.gen_range(-1.3..1.3));
        let a = heis::dilate(lam, p * q)?;
        let b = heis::dilate(lam, p)? * heis::dilate(lam, q)?;
        dil = dil.max(rel(a, b) / (lam * lam).max(1.0));
        for kind in [NormKind::Koranyi, NormKind::MaxNorm] {
            let d = heis::dist(p, q, kind);
            left = left.max((heis::dist(r * p, r * q, kind) - d).abs() / d.max(1.0));
            sym = sym.max((heis::dist(q, p, kind) - d).abs() / d.max(1.0));
        }
    }
    let ratio_n = 10 * n;
    let hi = 17f64.powf(0.25);
    let mut ratio_violation = 0.0f64;
    for _ in 0..ratio_n {
        let p = random_point(&mut rng, 3.0);
        let ratio = heis::norm(p, NormKind::Koranyi) / heis::norm(p, NormKind::MaxNorm);
        ratio_violation = ratio_violation.max(1.0 - ratio).max(ratio - hi);
    }
    let row = |check, samples, max_error: f64, tolerance: f64| CheckRow { check, samples, max_error, tolerance, pass: max_error <= tolerance };
    let rows = vec![
        row("associativity", n, assoc, 1e-12),
        row("inverse", n, inv, 1e-12),
        row("dilation_automorphism", n, dil, 1e-12),
        row("left_invariance", n, left, 1e-12),
        row("metric_symmetry", n, sym, 1e-12),
        row("norm_ratio", ratio_n, ratio_violation.max(0.0), 1e-12),
    ];
    let failures = rows.iter().filter(|r| !r.pass).map(|r| format!("{}: max error {:e}", r.check, r.max_error)).collect();
    Ok(Outcome { files: vec![("geom-selftest.csv".into(), to_csv(&rows)?)], failures, ..Default::default() })
}

#[derive(Serialize)]
struct KernelRow {
    kernel: String,
    samples: usize,
    odd_violation: f64,
    horizontal_violation: f64,
    size_constant: f64,
    holder_constant: f64,
    holder_exponent: f64,
}

fn kernels_check(cfg: &ExperimentConfig) -> Res<Outcome> {
    let triples = sample_triples(cfg.samples, cfg.seed);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for name in &cfg.kernels {
        let spec = KernelSpec::parse(name).ok_or("unknown kernel")?;
        let sym = symmetry_check(spec, cfg.samples, cfg.seed)?;
        let sk = sk_constants(spec, &triples, 0.5)?;
        if !(sk.size_constant.is_finite() && sk.holder_constant.is_finite()) {
            failures.push(format!("{name}: non-finite standard-kernel constants"));
        }
        if !sym.odd && !sym.horizontally_odd && !matches!(spec, KernelSpec::ChousionisLi(_)) {
            failures.push(format!("{name}: neither odd nor horizontally odd (violation {:e})", sym.max_violation));
        }
        rows.push(KernelRow {
            kernel: spec.name(),
            samples: cfg.samples,
            odd_violation: sym.odd_violation,
            horizontal_violation: sym.horizontal_violation,
            size_constant: sk.size_constant,
            holder_constant: sk.holder_constant,
            holder_exponent: sk.holder_exponent,
        });
    }
    Ok(Outcome { files: vec![("kernels-check.csv".into(), to_csv(&rows)?)], failures, ..Default::default() })
}

#[derive(Serialize)]
struct TameRow {
    trial: usize,
    points: usize,
    input_constant: f64,
    output_constant: f64,
    ratio: f64,
    agrees: bool,
}

fn tame_extend(cfg: &ExperimentConfig) -> Res<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let grid = sampled::linspace(0.0, 1.0, 161);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for trial in 0..cfg.samples {
        let amp: f64 = rng.gen_range(0.05..0.5);
        let freq: f64 = rng.gen_range(1.0..4.0);
        let ph: f64 = rng.gen_range(0.0..6.0);
        let b1: Vec<f64> = grid.iter().map(|x| amp * (freq * x + ph).sin()).collect();
        let full = TameMapSampled::from_b1(grid.clone(), b1, 0.0, 100.0)?;
        let count = rng.gen_range(2..=20);
        let mut idx: Vec<usize> = (0..count).map(|_| rng.gen_range(0..grid.len())).collect();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() < 2 {
            idx = vec![0, grid.len() - 1];
        }
        let data = PartialTameData::new(
            idx.iter().map(|&i| grid[i]).collect(),
            idx.iter().map(|&i| full.b1[i]).collect(),
            idx.iter().map(|&i| full.b2[i]).collect(),
        )?;
        let l = tame::tameness_two_sided(&data.points, &data.phi1, &data.phi2);
        let ext = tame::extend_tame(&data, &grid)?;
        let agrees = idx.iter().enumerate().all(|(k, &i)| ext.b1[i] == data.phi1[k] && ext.b2[i] == data.phi2[k]);
        let out = ext.measured_constant();
        let ratio = if l > 0.0 { out / l } else { 0.0 };
        if !agrees || out > 18.0 * l * (1.0 + 1e-9) + 1e-12 {
            failures.push(format!("trial {trial}: agrees={agrees}, constant {out} vs data {l}"));
        }
        rows.push(TameRow { trial, points: idx.len(), input_constant: l, output_constant: out, ratio, agrees });
    }
    Ok(Outcome { files: vec![("tame-extend.csv".into(), to_csv(&rows)?)], failures, ..Default::default() })
}

#[derive(Serialize)]
struct CoronaRow {
    mode: &'static str,
    fixture: String,
    eta: f64,
    depth: i32,
    trees: usize,
    bad: usize,
    max_ratio: f64,
    bad_carleson: f64,
    top_carleson: f64,
    passed: bool,
}

fn corona_suite(cfg: &ExperimentConfig) -> Res<Outcome> {
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for name in &cfg.fixtures {
        for &eta in &cfg.etas {
            let (dec, rep): (CoronaDecomposition, _) = match cfg.mode {
                CoronaMode::Lipschitz => {
                    let (xs, ys) = fixtures::lipschitz(name, cfg.depth)?;
                    let dec = corona::lipschitz_corona(&xs, &ys, eta, cfg.depth)?;
                    let rep = corona::audit_lipschitz(&xs, &ys, &dec)?;
                    (dec, rep)
                }
                CoronaMode::Tame => {
                    let b = fixtures::tame(name, cfg.depth)?;
                    let dec = corona::tame_corona(&b, eta, cfg.depth)?;
                    let rep = corona::audit_tame(&b, &dec)?;
                    (dec, rep)
                }
            };
            let mode = match cfg.mode {
                CoronaMode::Lipschitz => "lipschitz",
                CoronaMode::Tame => "tame",
            };
            if !rep.passed() {
                out.failures.push(format!("{mode}/{name}/eta={eta}: audit failed: {:?}", rep.issues));
            }
            out.files.push((format!("corona-{mode}-{name}-eta{eta}.json"), dec.to_json()));
            rows.push(CoronaRow {
                mode,
                fixture: name.clone(),
                eta,
                depth: cfg.depth,
                trees: dec.trees.len(),
                bad: dec.bad.len(),
                max_ratio: rep.max_ratio,
                bad_carleson: rep.bad_carleson,
                top_carleson: rep.top_carleson,
                passed: rep.passed(),
            });
        }
    }
    out.files.insert(0, ("corona.csv".into(), to_csv(&rows)?));
    Ok(out)
}

#[derive(Serialize)]
struct SweepCsvRow {
    kernel: String,
    curve: String,
    epsilon: f64,
    n: usize,
    op_norm: f64,
    assembly_seconds: Option<f64>,
}

fn descending(v: &[f64]) -> Vec<f64> {
    let mut e = v.to_vec();
    e.sort_by(|a, b| b.total_cmp(a));
    e.dedup();
    e
}

fn norm_sweep(cfg: &ExperimentConfig) -> Res<Outcome> {
    let curve = fixtures::curve(&cfg.curve, cfg.n)?;
    let eps = descending(&cfg.epsilons);
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for name in &cfg.kernels {
        let kernel: Box<dyn PairKernel> = match parse_pair_kernel(name).ok_or("unknown kernel")? {
            PairChoice::Heis(k) => Box::new(k),
            PairChoice::Line(k) => Box::new(k),
        };
        for r in sio::sweep(kernel.as_ref(), &curve, &cfg.curve, &eps)? {
            if !r.op_norm.is_finite() {
                out.failures.push(format!("{name} at ε={}: non-finite operator norm", r.epsilon));
            }
            out.timings.push((format!("{}/{}", r.kernel, r.epsilon), r.assembly_seconds));
            rows.push(SweepCsvRow {
                kernel: r.kernel,
                curve: r.curve,
                epsilon: r.epsilon,
                n: r.n,
                op_norm: r.op_norm,
                assembly_seconds: cfg.timing.then_some(r.assembly_seconds),
            });
        }
    }
    out.files.push(("sio-norm-sweep.csv".into(), to_csv(&rows)?));
    Ok(out)
}

#[derive(Serialize)]
struct WglRow {
    epsilon: f64,
    depth: u32,
    cubes: usize,
    wgl_sum: f64,
}

fn beta_carleson(cfg: &ExperimentConfig) -> Res<Outcome> {
    let curve = fixtures::curve(&cfg.curve, cfg.n)?;
    let depth = cfg.depth as u32;
    let system = beta::dyadic_cubes_on_curve(&curve, depth)?;
    let sub = HorizontalSubgroup::x_axis();
    let eps = descending(&cfg.epsilons);
    let table = beta::cube_table_csv(&curve, &system, sub, cfg.c, eps[eps.len() - 1]);
    let top = system.level(0).next().ok_or("empty cube system")?;
    let wgl: Vec<WglRow> = eps
        .iter()
        .map(|&e| WglRow { epsilon: e, depth, cubes: system.cubes.len(), wgl_sum: beta::wgl_count(&curve, &system, e, top) })
        .collect();
    let mut failures = Vec::new();
    if wgl.iter().any(|r| !r.wgl_sum.is_finite()) {
        failures.push("non-finite WGL sum".to_string());
    }
    Ok(Outcome {
        files: vec![("beta-carleson.csv".into(), table), ("wgl.csv".into(), to_csv(&wgl)?)],
        failures,
        ..Default::default()
    })
}

fn flags_norm(cfg: &ExperimentConfig) -> Res<Outcome> {
    let f = fixtures::flag(&cfg.flag, cfg.t_window)?;
    let eps = descending(&cfg.epsilons);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for name in &cfg.kernels {
        let k = Kernel3::parse(name).ok_or("unknown flag kernel")?;
        for r in flag::flag_sweep(&f, &cfg.flag, k, cfg.grid, &eps)? {
            if !r.op_norm.is_finite() {
                failures.push(format!("{name} at ε={}: non-finite operator norm", r.epsilon));
            }
            rows.push(r);
        }
    }
    Ok(Outcome { files: vec![("flags-norm.csv".into(), to_csv(&rows)?)], failures, ..Default::default() })
}
