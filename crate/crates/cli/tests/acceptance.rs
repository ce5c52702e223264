//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

#[path = "../../core/tests/common/audit.rs"]
mod audit;
#[path = "../../core/tests/common/flat.rs"]
mod flat;
#[path = "../../core/tests/common/plans.rs"]
mod plans;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use greyzone::encoding::{decode_assignment_array, decode_carpool_array, decode_route_array, random_genotype, Genotype};
use greyzone::evaluator::{check_feasibility, evaluate_detailed, ObjectiveVector};
use greyzone::exact::{exact_pareto, micro_spec, EnumBudget};
use greyzone::front_io::import_vectors;
use greyzone::instance::{generate_instance, write_json, Counts, Instance, InstanceSpec, BENCHMARK_SHAPES};
use greyzone::moo::{dominates, front_metrics, FrontMetrics};
use greyzone::nsga2::{run_nsga2, NsgaParams};
use greyzone::sensitivity::{private_car_baseline, run_sensitivity, SolverConfig, SweepParam};

type Check = Result<String, String>;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_greyzone")
}

fn here(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn greyzone(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(bin()).args(args).env("RUST_LOG", "warn").output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("`greyzone {}` exited with {}: {}", args.join(" "), out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|e| e + 1).collect()
}

fn worked_examples() -> Check {
    let st: Vec<Vec<usize>> =
        decode_assignment_array(&[13, 10, 8, 1, 12, 7, 9, 5, 11, 6, 4, 3, 2], 10, 4).map_err(|e| e.to_string())?.iter().map(|s| one_based(s)).collect();
    ensure(st == vec![vec![7, 9, 5], vec![10, 8, 1], vec![], vec![6, 4, 3, 2]], || format!("station assignment {st:?}"))?;

    let cp = decode_carpool_array(&[1, 11, 2, 10, 12, 3, 9, 5, 13, 6, 4, 7, 8], 10, &[0, 1, 2], &[4, 4, 4]).map_err(|e| e.to_string())?;
    let groups: Vec<(usize, Vec<usize>)> = cp.groups.iter().map(|(c, o)| (c + 1, one_based(o))).collect();
    let mut bus = one_based(&cp.riders);
    bus.sort_unstable();
    ensure(groups == vec![(1, vec![1]), (2, vec![2, 10]), (3, vec![3, 9, 5])] && bus == vec![4, 6, 7, 8], || {
        format!("carpools {groups:?}, bus {bus:?}")
    })?;

    let routes: Vec<Vec<usize>> =
        decode_route_array(&[6, 2, 1, 7, 5, 4, 3], 4, 4, &[true; 4]).map_err(|e| e.to_string())?.iter().map(|r| one_based(r)).collect();
    ensure(routes == vec![vec![], vec![], vec![2, 1], vec![4, 3]], || format!("bus routes {routes:?}"))?;

    // The three arrays together on the ten-employee fixture.
    let inst = Instance::load(&here("../core/tests/fixtures/worked_instance.json")).map_err(|e| e.to_string())?;
    let g = Genotype::load(&here("../core/tests/fixtures/worked_genotype.json")).map_err(|e| e.to_string())?;
    let ev = evaluate_detailed(&g, &inst).map_err(|e| e.to_string())?;
    let o = ev.objectives;
    ensure(close(o.f1, 775.0, 1e-12) && close(o.f2, 53.5, 1e-12) && close(o.f3, 161_000.0, 1e-12), || format!("fixture objectives {o:?}"))?;
    Ok("3 worked decodings and the combined fixture".into())
}

fn write_spec(dir: &Path, seed: u64) -> Result<PathBuf, String> {
    let path = dir.join(format!("micro{seed}.spec.json"));
    write_json(&path, &micro_spec(seed)).map_err(|e| e.to_string())?;
    Ok(path)
}

fn oracle_equivalence() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut points = 0;
    for seed in 1..=5 {
        let spec = write_spec(dir.path(), seed)?;
        let inst_path = dir.path().join(format!("micro{seed}.json"));
        let front_path = dir.path().join(format!("micro{seed}.csv"));
        greyzone(&["gen", "--spec", spec.to_str().unwrap(), "--out", inst_path.to_str().unwrap()])?;
        greyzone(&["solve", "exact", "--method", "enum", "--instance", inst_path.to_str().unwrap(), "--out", front_path.to_str().unwrap()])?;
        let inst = Instance::load(&inst_path).map_err(|e| e.to_string())?;
        ensure(flat::genotype_count(&inst) == 345_600, || format!("micro {seed} has {} genotypes", flat::genotype_count(&inst)))?;
        let mut solved = import_vectors(&front_path).map_err(|e| e.to_string())?;
        solved.sort_by(|a, b| a.f1.total_cmp(&b.f1).then(a.f2.total_cmp(&b.f2)).then(a.f3.total_cmp(&b.f3)));
        let oracle = flat::flat_front(&inst);
        let same = solved.len() == oracle.len()
            && solved.iter().zip(&oracle).all(|(a, b)| close(a.f1, b.f1, 1e-9) && close(a.f2, b.f2, 1e-9) && close(a.f3, b.f3, 1e-9));
        ensure(same, || format!("micro {seed}: {} solver points vs {} oracle points", solved.len(), oracle.len()))?;
        points += oracle.len();
    }
    Ok(format!("5 micro instances, {points} Pareto points, {} genotypes each", 345_600))
}

fn weakly_covers(found: &[ObjectiveVector], target: &[ObjectiveVector]) -> bool {
    let tol = |x: f64| 1e-9 * (1.0 + x.abs());
    target.iter().all(|t| found.iter().any(|f| f.f1 <= t.f1 + tol(t.f1) && f.f2 <= t.f2 + tol(t.f2) && f.f3 <= t.f3 + tol(t.f3)))
}

fn nsga2_alignment() -> Check {
    let mut summary = Vec::new();
    for seed in 1..=5 {
        let inst = generate_instance(&micro_spec(seed)).map_err(|e| e.to_string())?;
        let exact = exact_pareto(&inst, &EnumBudget::default()).map_err(|e| e.to_string())?.front.objectives();
        let mut covered = 0;
        for run in 0..5 {
            let front = run_nsga2(&inst, &NsgaParams { seed: run, ..NsgaParams::default() }).map_err(|e| e.to_string())?.objectives();
            ensure(!front.iter().any(|f| exact.iter().any(|e| dominates(f, e))), || format!("micro {seed} run {run} beats the exact front"))?;
            covered += weakly_covers(&front, &exact) as usize;
        }
        ensure(covered >= 4, || format!("micro {seed}: exact front covered in {covered} of 5 runs"))?;
        summary.push(covered.to_string());
    }
    Ok(format!("runs covering the exact front per instance: {}", summary.join("/")))
}

fn benchmark_instances() -> Result<Vec<Instance>, String> {
    (1..=5).map(|i| generate_instance(&InstanceSpec::benchmark(i, 100 + i as u64)).map_err(|e| e.to_string())).collect()
}

fn fuzz() -> Check {
    for (i, inst) in benchmark_instances()?.iter().enumerate() {
        for seed in 0..10_000 {
            let ev = evaluate_detailed(&random_genotype(inst, seed), inst).map_err(|e| format!("I{} seed {seed}: {e}", i + 1))?;
            let v = check_feasibility(&ev.plan, &ev.schedule, &ev.traces, inst);
            ensure(v.is_empty(), || format!("I{} seed {seed}: {}", i + 1, v[0]))?;
        }
    }
    Ok("50000 genotypes, no violations".into())
}

fn audit_agreement() -> Check {
    let insts = benchmark_instances()?;
    let mut worst = 0.0f64;
    for k in 0..1000u64 {
        let inst = &insts[(k % 5) as usize];
        let ev = evaluate_detailed(&random_genotype(inst, 50_000 + k), inst).map_err(|e| e.to_string())?;
        let expect = audit::audit(&ev.plan, inst);
        for (m, got) in ev.objectives.as_array().into_iter().enumerate() {
            let rel = (got - expect[m]).abs() / expect[m].abs().max(1.0);
            worst = worst.max(rel);
            ensure(rel <= 1e-9, || format!("genotype {k}, f{}: {got} vs {}", m + 1, expect[m]))?;
        }
    }
    Ok(format!("1000 genotypes, worst relative error {worst:.1e}"))
}

fn table_shapes() -> Check {
    for (i, row) in BENCHMARK_SHAPES.iter().enumerate() {
        let inst = generate_instance(&InstanceSpec::benchmark(i + 1, 1)).map_err(|e| e.to_string())?;
        let got = Counts {
            stations: inst.n_stations(),
            entries: inst.n_entries(),
            employees: inst.n_employees(),
            car_owners: inst.car_owners().len(),
            buses: inst.fleets.buses.len(),
            fuel: inst.fleets.fuel.len(),
            electric: inst.fleets.electric.len(),
            hybrid: inst.fleets.hybrid.len(),
        };
        ensure(got == Counts::from_row(*row), || format!("I{}: {got:?}", i + 1))?;
    }
    Ok("13 instances match every count".into())
}

fn cli_metrics(path: &Path) -> Result<FrontMetrics, String> {
    let out = greyzone(&["metrics", "--front", path.to_str().unwrap()])?;
    serde_json::from_slice(&out).map_err(|e| e.to_string())
}

fn metric_sanity() -> Check {
    let m = cli_metrics(&here("tests/fixtures/two_points.csv"))?;
    let r3 = 3f64.sqrt();
    ensure(m.nps == 2 && m.sm.abs() <= 1e-12 && (m.dm - r3).abs() <= 1e-12 && (m.mid - r3 / 2.0).abs() <= 1e-12, || format!("two points: {m:?}"))?;
    let m = cli_metrics(&here("tests/fixtures/one_point.csv"))?;
    ensure(m == FrontMetrics { nps: 1, sm: 0.0, dm: 0.0, mid: 0.0 }, || format!("one point: {m:?}"))?;
    let mut nps = Vec::new();
    for seed in 1..=3 {
        let inst = generate_instance(&InstanceSpec::benchmark(1, seed)).map_err(|e| e.to_string())?;
        let params = NsgaParams { seed, ..NsgaParams::default() };
        let front = run_nsga2(&inst, &params).map_err(|e| e.to_string())?;
        let m = front_metrics(&front.objectives()).map_err(|e| e.to_string())?;
        ensure((1..=params.population).contains(&m.nps), || format!("I1 seed {seed}: nps {}", m.nps))?;
        nps.push(m.nps.to_string());
    }
    Ok(format!("fixtures exact; I1 NPS {}", nps.join(", ")))
}

fn sensitivity() -> Check {
    let mut inst = generate_instance(&InstanceSpec::benchmark(5, 5)).map_err(|e| e.to_string())?;
    let solver = SolverConfig::Nsga2(NsgaParams { seed: 1, ..NsgaParams::default() });
    let mut failures = Vec::new();

    // Without the carpool incentive, since it charges each idle car and so
    // grows with the fleet.
    let mut no_incentive = inst.clone();
    no_incentive.params.carpool_incentive = 0.0;
    let sizes: Vec<f64> = (0..=inst.fleets.fuel.len()).map(|k| k as f64).collect();
    let fleet = run_sensitivity(&no_incentive, SweepParam::CarpoolFleetSize, &sizes, &solver).map_err(|e| e.to_string())?;
    for w in fleet.rows.windows(2) {
        if w[1].min_f1 > w[0].min_f1 + 1e-9 {
            failures.push(format!("min f1 rises from {} to {} cars", w[0].value, w[1].value));
        }
    }

    inst.params.battery_rate = 0.3;
    let rates = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
    let battery = run_sensitivity(&inst, SweepParam::BatteryRate, &rates, &solver).map_err(|e| e.to_string())?;
    for w in battery.rows.windows(2) {
        if w[0].min_f3 > w[1].min_f3 + 1e-9 {
            failures.push(format!("min f3 at r = {} above r = {}", w[0].value, w[1].value));
        }
    }

    let baseline = private_car_baseline(&inst).map_err(|e| e.to_string())?;
    let mut above = Vec::new();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let g = plans::full_carpools(&inst, seed);
        let f3 = evaluate_detailed(&g, &inst).map_err(|e| e.to_string())?.objectives.f3;
        if f3 > baseline {
            above.push(seed.to_string());
        }
        worst = worst.max(f3);
    }
    if !above.is_empty() {
        failures.push(format!(
            "{} of 100 carpool plans emit more than the private-car baseline {baseline:.0} (plans {}, worst {worst:.0})",
            above.len(),
            above.join(", ")
        ));
    }

    let summary = format!(
        "min f1 {:.1} -> {:.1} over 0..{} cars, min f3 {:.1} -> {:.1} for r 0.3 -> 0.05",
        fleet.rows[0].min_f1,
        fleet.rows.last().unwrap().min_f1,
        sizes.len() - 1,
        battery.rows.last().unwrap().min_f3,
        battery.rows[0].min_f3,
    );
    if failures.is_empty() {
        Ok(format!("{summary}, carpool f3 <= {worst:.0} < {baseline:.0}"))
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        if entry.path().is_dir() {
            continue;
        }
        let bytes = std::fs::read(entry.path()).map_err(|e| e.to_string())?;
        out.insert(entry.file_name().to_string_lossy().into_owned(), bytes);
    }
    Ok(out)
}

/// Every seeded command, with the worker count as given, into `dir`.
fn run_all(dir: &Path, workers: &str) -> Result<(), String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let spec = write_spec(dir, 2)?;
    greyzone(&["gen", "--row", "3", "--seed", "11", "--out", &p("i3.json")])?;
    greyzone(&["gen", "--spec", spec.to_str().unwrap(), "--out", &p("micro.json")])?;
    let nsga = ["--generations", "60", "--seed", "4", "--workers", workers];
    greyzone(&[&["solve", "nsga2", "--instance", &p("i3.json"), "--out", &p("i3.csv")][..], &nsga].concat())?;
    greyzone(&["solve", "exact", "--instance", &p("micro.json"), "--enum-workers", workers, "--out", &p("micro_enum.csv")])?;
    greyzone(&["solve", "exact", "--method", "epsilon", "--primary", "3", "--instance", &p("micro.json"), "--enum-workers", workers, "--out", &p("micro_eps.csv")])?;
    greyzone(&["metrics", "--front", &p("i3.csv"), "--out", &p("i3.metrics.json")])?;
    greyzone(&["export", "--instance", &p("i3.json"), "--front", &p("i3.csv"), "--out", &p("i3.plans.json")])?;
    let sweep = ["--generations", "20", "--seed", "4", "--workers", workers];
    let out = greyzone(&[&["sensitivity", "--instance", &p("i3.json"), "--param", "battery_rate", "--values", "0.1,0.2,0.3"][..], &sweep].concat())?;
    std::fs::write(p("sweep.csv"), out).map_err(|e| e.to_string())?;
    greyzone(&[&["bench", "--row", "3", "--instance-seed", "11", "--out-dir", &p("bench")][..], &nsga].concat())?;
    Ok(())
}

fn determinism() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let c = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_all(a.path(), "1")?;
    run_all(b.path(), "1")?;
    run_all(c.path(), "4")?;
    let (fa, fb, fc) = (files(a.path())?, files(b.path())?, files(c.path())?);
    ensure(fa == fb, || "two identical runs differ".into())?;
    ensure(fa == fc, || "1 and 4 workers differ".into())?;
    let bench = files(&a.path().join("bench"))?;
    ensure(bench["front.csv"] == fa["i3.csv"] && bench["metrics.json"] == fa["i3.metrics.json"] && bench["instance.json"] == fa["i3.json"], || {
        "bench differs from gen + solve + metrics".into()
    })?;
    Ok(format!("{} output files byte-identical across 3 runs", fa.len() + bench.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Check); 9] = [
        ("worked decodings", Duration::from_secs(1), worked_examples),
        ("oracle equivalence", Duration::from_secs(60), oracle_equivalence),
        ("exact vs NSGA-II alignment", Duration::from_secs(300), nsga2_alignment),
        ("feasibility fuzzing", Duration::from_secs(120), fuzz),
        ("audit evaluator agreement", Duration::from_secs(60), audit_agreement),
        ("benchmark table shapes", Duration::from_secs(60), table_shapes),
        ("metric sanity", Duration::from_secs(60), metric_sanity),
        ("sensitivity directions", Duration::from_secs(300), sensitivity),
        ("determinism", Duration::from_secs(300), determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > limit => Err(format!("took {took:.1?}, limit {limit:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}; {:.2}s)", i + 1, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({why}; {:.2}s)", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
