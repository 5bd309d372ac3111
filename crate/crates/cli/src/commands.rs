use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use jpaf_core::engine::EngineConfig;
use jpaf_core::evaluation::metrics::taa_with_failures;
use jpaf_core::evaluation::questionnaire::{dimension_accuracy, Choice, Questionnaire};
use jpaf_core::evaluation::sweep::{run_case, score, CaseResult};
use jpaf_core::evaluation::{
    expectation_matrix, AccuracyFile, AccuracyMetrics, AccuracyRow, MetricsReport, PsaSummary, TaaBlock, TaaEntry,
    TaaFile,
};
use jpaf_core::oracle::{answer_questionnaire_item, LlmConfig};
use jpaf_core::run::run_set;
use jpaf_core::scenario::ScenarioSet;
use jpaf_core::snapshot::{AgentSnapshot, SnapshotError, SnapshotLock};
use jpaf_core::trace::{self, fmt_sig12, RowStatus, TraceRecord};
use jpaf_core::weights::{ParamViolation, WeightError};
use jpaf_core::{Dimension, MbtiType, PsychFunction, RangeParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::oracles::{self, parse_approval, FileConfig, OracleSettings};
use crate::{Cli, CliError, Command, OracleArgs, ParamArgs};

struct Ctx {
    config: FileConfig,
    config_dir: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let (config, config_dir) = match &cli.config {
        Some(p) => (
            FileConfig::load(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (FileConfig::default(), PathBuf::from(".")),
    };
    let ctx = Ctx { config, config_dir };
    match cli.command {
        Command::Init {
            mbti,
            seed,
            params,
            out,
        } => init(&ctx, &mbti, seed, &params, &out),
        Command::RunScenario {
            snapshot,
            scenario,
            oracle,
            out,
        } => run_scenario(&ctx, &snapshot, &scenario, &oracle, &out),
        Command::Questionnaire {
            snapshot,
            items,
            oracle,
            runs,
            error_mask,
            out,
            json,
        } => questionnaire(
            &ctx,
            &snapshot,
            &items,
            &oracle,
            runs,
            error_mask,
            out.as_deref(),
            json.as_deref(),
        ),
        Command::Report {
            accuracy,
            taa,
            trace,
            sweep,
            dar_tolerance,
            exclude_failed,
            json,
            plot_dir,
        } => report(ReportArgs {
            accuracy,
            taa,
            traces: trace,
            sweep,
            dar_tolerance,
            exclude_failed,
            json,
            plot_dir,
        }),
        Command::Replay {
            from,
            scenario,
            oracle,
            trace,
            snapshot,
        } => replay(&ctx, &from, &scenario, &oracle, &trace, snapshot.as_deref()),
        Command::Sweep {
            seed,
            scenarios,
            params,
            oracle,
            out,
        } => sweep(&ctx, seed, scenarios.as_deref(), &params, &oracle, out.as_deref()),
        Command::Expectations { out } => {
            let mut s = serde_json::to_string_pretty(&expectation_matrix()).expect("serializable");
            s.push('\n');
            write_file(&out, &s)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError::io(path, e))
}

fn snapshot_err(e: SnapshotError) -> CliError {
    match e {
        SnapshotError::Io { path, source } => CliError::io(&path, source),
        SnapshotError::Locked(p) => CliError::Usage(format!("{} is locked by another process", p.display())),
        other => CliError::Format(other.to_string()),
    }
}

fn describe_violation(v: ParamViolation, p: &RangeParams) -> String {
    match v {
        ParamViolation::ABelowBound => format!(
            "A < (1-6B)/2 = {} (got A = {})",
            fmt_sig12((1.0 - 6.0 * p.b) / 2.0),
            p.a
        ),
        ParamViolation::BBelowA => format!("B < A (got A = {}, B = {})", p.a, p.b),
        other => other.to_string(),
    }
}

fn resolve_params(ctx: &Ctx, args: &ParamArgs) -> Result<RangeParams, CliError> {
    let mut p = ctx.config.params.unwrap_or_default();
    if let Some(path) = &args.params {
        let src = read_file(path)?;
        p = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&src).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&src).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?
        };
    }
    if let Some(v) = args.a {
        p.a = v;
    }
    if let Some(v) = args.b {
        p.b = v;
    }
    if let Some(v) = args.delta_w {
        p.delta_w = v;
    }
    if let Some(v) = args.decay {
        p.decay_factor = v;
    }
    if let Some(v) = args.cap {
        p.dominance_cap = v;
    }
    match p.check() {
        Ok(()) => Ok(p),
        Err(WeightError::BadParams(v)) => Err(CliError::Usage(format!(
            "bad range parameters, violated: {}",
            v.iter()
                .map(|x| describe_violation(*x, &p))
                .collect::<Vec<_>>()
                .join("; ")
        ))),
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

fn settings(ctx: &Ctx, args: &OracleArgs, error_mask: BTreeSet<String>) -> Result<OracleSettings, CliError> {
    let mut llm: LlmConfig = ctx.config.llm.clone().unwrap_or_default();
    if let Some(e) = &args.endpoint {
        llm.endpoint = e.clone();
    }
    if let Some(m) = &args.model {
        llm.model = m.clone();
    }
    if let Some(t) = args.temperature {
        llm.temperature = t;
    }
    llm.debug |= args.debug;
    Ok(OracleSettings {
        spec: args.oracle,
        approval: parse_approval(&args.approve).map_err(CliError::Usage)?,
        error_mask,
        llm,
        templates: ctx.config.templates(&ctx.config_dir)?,
    })
}

fn load_set(path: &Path) -> Result<ScenarioSet, CliError> {
    ScenarioSet::from_json(&read_file(path)?).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn print_profile(s: &AgentSnapshot) {
    println!(
        "{}  dominant {}  auxiliary {}",
        s.mbti.pairing_label(),
        s.dominant,
        s.auxiliary
    );
    for f in s.base.ranking() {
        println!("  {f}  base {:<16} temp {}", fmt_sig12(s.base[f]), fmt_sig12(s.temp[f]));
    }
}

fn init(ctx: &Ctx, mbti: &str, seed: u64, params: &ParamArgs, out: &Path) -> Result<(), CliError> {
    let mbti: MbtiType = mbti.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
    let params = resolve_params(ctx, params)?;
    let snap = AgentSnapshot::new(mbti, params, seed).map_err(snapshot_err)?;
    let _lock = SnapshotLock::acquire(out).map_err(snapshot_err)?;
    snap.save_atomic(out).map_err(snapshot_err)?;
    print_profile(&snap);
    Ok(())
}

fn append_trace(path: &Path, records: &[TraceRecord]) -> Result<(), CliError> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut text = String::new();
    if fresh {
        text.push_str(&TraceRecord::header());
        text.push('\n');
    }
    for r in records {
        text.push_str(&r.to_line());
        text.push('\n');
    }
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

fn run_scenario(ctx: &Ctx, snapshot: &Path, scenario: &Path, oracle: &OracleArgs, out: &Path) -> Result<(), CliError> {
    let set = load_set(scenario)?;
    let oracle = oracles::build(&settings(ctx, oracle, BTreeSet::new())?);
    let _lock = SnapshotLock::acquire(snapshot).map_err(snapshot_err)?;
    let start = AgentSnapshot::load(snapshot).map_err(snapshot_err)?;
    let result = run_set(&start, &set, &oracle)?;
    append_trace(out, &result.records)?;
    result.snapshot.save_atomic(snapshot).map_err(snapshot_err)?;

    for e in result.snapshot.history[start.history.len()..]
        .iter()
        .filter(|e| e.proposed.is_some())
    {
        println!(
            "q{:>2} {:<26} {} -> {}{}",
            e.question_index,
            e.kind,
            e.before.mbti,
            e.after.mbti,
            if e.approved { "" } else { " (declined)" }
        );
    }
    println!("{} -> {}", start.mbti, result.snapshot.mbti);
    if result.oracle_failures > 0 {
        return Err(CliError::Oracle(format!(
            "{} of {} questions failed; see rows marked oracle_error in {}",
            result.oracle_failures,
            result.records.len(),
            out.display()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct QuestionnaireOutput {
    #[serde(rename = "type")]
    mbti: MbtiType,
    items: String,
    runs: Vec<AccuracyRow>,
    mean: AccuracyRow,
}

fn row(mbti: MbtiType, acc: &BTreeMap<Dimension, f64>) -> AccuracyRow {
    AccuracyRow {
        mbti,
        ei: acc.get(&Dimension::EI).copied(),
        sn: acc.get(&Dimension::SN).copied(),
        tf: acc.get(&Dimension::TF).copied(),
        jp: acc.get(&Dimension::JP).copied(),
    }
}

#[allow(clippy::too_many_arguments)]
fn questionnaire(
    ctx: &Ctx,
    snapshot: &Path,
    items: &Path,
    oracle: &OracleArgs,
    runs: usize,
    error_mask: Vec<String>,
    out: Option<&Path>,
    json: Option<&Path>,
) -> Result<(), CliError> {
    if runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let snap = AgentSnapshot::load(snapshot).map_err(snapshot_err)?;
    let q =
        Questionnaire::parse(&read_file(items)?).map_err(|e| CliError::Format(format!("{}: {e}", items.display())))?;
    let known: BTreeSet<&str> = q.items.iter().map(|i| i.id.as_str()).collect();
    if let Some(bad) = error_mask.iter().find(|id| !known.contains(id.as_str())) {
        return Err(CliError::Usage(format!("--error-mask names unknown item {bad:?}")));
    }
    let oracle = oracles::build(&settings(ctx, oracle, error_mask.into_iter().collect())?);
    let profile = snap.profile();

    let mut answers_tsv = String::from("run\titem\tdimension\tchoice\tpole\n");
    let mut per_run = Vec::new();
    for run in 1..=runs {
        let mut answers: Vec<(String, Choice)> = Vec::with_capacity(q.items.len());
        for item in &q.items {
            let c = answer_questionnaire_item(&oracle, &profile, snap.coordination, item)
                .map_err(|e| CliError::Oracle(format!("item {}: {e}", item.id)))?;
            let _ = writeln!(
                answers_tsv,
                "{run}\t{}\t{}\t{c}\t{}",
                item.id,
                item.dimension,
                item.pole_of(c)
            );
            answers.push((item.id.clone(), c));
        }
        let acc = dimension_accuracy(&answers, &q.items, snap.mbti).map_err(|e| CliError::Format(e.to_string()))?;
        per_run.push(acc);
    }
    let mut mean = BTreeMap::new();
    for d in Dimension::ALL {
        mean.insert(d, per_run.iter().map(|a| a[&d]).sum::<f64>() / runs as f64);
    }

    println!("{} on {} ({} items)", snap.mbti, items.display(), q.items.len());
    println!("run      EI       SN       TF       JP");
    let line = |label: &str, a: &BTreeMap<Dimension, f64>| {
        let mut s = format!("{label:<4}");
        for d in Dimension::ALL {
            let _ = write!(s, " {:>7.2}%", a[&d] * 100.0);
        }
        s
    };
    for (i, a) in per_run.iter().enumerate() {
        println!("{}", line(&(i + 1).to_string(), a));
    }
    if runs > 1 {
        println!("{}", line("mean", &mean));
    }
    if let Some(p) = out {
        write_file(p, &answers_tsv)?;
    }
    if let Some(p) = json {
        let doc = QuestionnaireOutput {
            mbti: snap.mbti,
            items: items.display().to_string(),
            runs: per_run.iter().map(|a| row(snap.mbti, a)).collect(),
            mean: row(snap.mbti, &mean),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        write_file(p, &s)?;
    }
    Ok(())
}

struct ReportArgs {
    accuracy: Vec<PathBuf>,
    taa: Vec<PathBuf>,
    traces: Vec<String>,
    sweep: Option<PathBuf>,
    dar_tolerance: f64,
    exclude_failed: bool,
    json: Option<PathBuf>,
    plot_dir: Option<PathBuf>,
}

fn report(a: ReportArgs) -> Result<(), CliError> {
    let mut r = MetricsReport::new(a.dar_tolerance);
    let fmt = |p: &Path, e: &dyn std::fmt::Display| CliError::Format(format!("{}: {e}", p.display()));

    for p in &a.accuracy {
        let f = AccuracyFile::from_json(&read_file(p)?).map_err(|e| fmt(p, &e))?;
        let (j, b) = f.tables().map_err(|e| fmt(p, &e))?;
        r.accuracy
            .push(AccuracyMetrics::compute(&f.name, &j, &b, a.dar_tolerance).map_err(|e| fmt(p, &e))?);
        r.provenance.push(f.name);
    }
    for p in &a.taa {
        let f = TaaFile::from_json(&read_file(p)?).map_err(|e| fmt(p, &e))?;
        r.taa.push(TaaBlock {
            name: f.name.clone(),
            entries: f.entries().map_err(|e| fmt(p, &e))?,
        });
        r.provenance.push(f.name);
    }
    let mut trajectories = Vec::new();
    for spec in &a.traces {
        let (ty, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--trace expects <TYPE>=<path>, got {spec:?}")))?;
        let mbti: MbtiType = ty.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
        let path = Path::new(path);
        let records = trace::parse(&read_file(path)?).map_err(|e| fmt(path, &e))?;
        let mut entries = Vec::new();
        let mut by_target: BTreeMap<PsychFunction, Vec<Option<PsychFunction>>> = BTreeMap::new();
        for rec in &records {
            by_target
                .entry(rec.target)
                .or_default()
                .push(if rec.status == RowStatus::Ok { rec.boosted } else { None });
        }
        for (target, boosted) in by_target {
            let value = taa_with_failures(&boosted, target, a.exclude_failed).map_err(|e| fmt(path, &e))?;
            entries.push(TaaEntry { mbti, target, value });
        }
        r.taa.push(TaaBlock {
            name: path.display().to_string(),
            entries,
        });
        r.provenance.push(path.display().to_string());
        trajectories.push((mbti, records));
    }
    if let Some(p) = &a.sweep {
        let results: Vec<CaseResult> = serde_json::from_str(&read_file(p)?).map_err(|e| fmt(p, &e))?;
        let s = score(&results).map_err(|e| fmt(p, &e))?;
        r.psa = Some(PsaSummary {
            matched: s.matched,
            cases: s.cases,
            psa: s.psa,
        });
        r.taa.push(TaaBlock {
            name: p.display().to_string(),
            entries: results
                .iter()
                .map(|c| TaaEntry {
                    mbti: c.mbti,
                    target: c.target,
                    value: c.taa,
                })
                .collect(),
        });
        r.provenance.push(p.display().to_string());
    }
    r.check_ranges().map_err(CliError::Invariant)?;

    print!("{}", r.render_text());
    if let Some(p) = &a.json {
        let mut s = serde_json::to_string_pretty(&r).expect("serializable");
        s.push('\n');
        write_file(p, &s)?;
    }
    if let Some(dir) = &a.plot_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write_file(&dir.join("accuracy.tsv"), &r.accuracy_tsv())?;
        write_file(&dir.join("taa.tsv"), &r.taa_tsv())?;
        for (i, (mbti, records)) in trajectories.iter().enumerate() {
            let mut s = String::from("question_index");
            for f in PsychFunction::ALL {
                let _ = write!(s, "\tbase_{f}");
            }
            for f in PsychFunction::ALL {
                let _ = write!(s, "\ttemp_{f}");
            }
            s.push_str("\tmbti\n");
            for rec in records {
                let _ = write!(s, "{}", rec.question_index);
                for w in [&rec.base, &rec.temp] {
                    for (_, v) in w.iter() {
                        let _ = write!(s, "\t{}", fmt_sig12(v));
                    }
                }
                let _ = writeln!(s, "\t{}", rec.mbti_after);
            }
            write_file(&dir.join(format!("trajectory-{}-{mbti}.tsv", i + 1)), &s)?;
        }
    }
    Ok(())
}

fn first_difference(a: &str, b: &str) -> String {
    for (i, (x, y)) in a.lines().zip(b.lines()).enumerate() {
        if x != y {
            return format!("line {}:\n  recorded: {x}\n  replayed: {y}", i + 1);
        }
    }
    format!(
        "line counts differ ({} recorded, {} replayed)",
        a.lines().count(),
        b.lines().count()
    )
}

fn replay(
    ctx: &Ctx,
    from: &Path,
    scenario: &Path,
    oracle: &OracleArgs,
    trace_path: &Path,
    expected_snapshot: Option<&Path>,
) -> Result<(), CliError> {
    let start = AgentSnapshot::load(from).map_err(snapshot_err)?;
    let set = load_set(scenario)?;
    let oracle = oracles::build(&settings(ctx, oracle, BTreeSet::new())?);
    let result = run_set(&start, &set, &oracle)?;

    let recorded = read_file(trace_path)?;
    let replayed = trace::render(&result.records);
    if recorded != replayed {
        return Err(CliError::Invariant(format!(
            "replayed trace differs from {}: {}",
            trace_path.display(),
            first_difference(&recorded, &replayed)
        )));
    }
    if let Some(p) = expected_snapshot {
        let recorded = read_file(p)?;
        let replayed = result.snapshot.to_json();
        if recorded != replayed {
            return Err(CliError::Invariant(format!(
                "replayed snapshot differs from {}: {}",
                p.display(),
                first_difference(&recorded, &replayed)
            )));
        }
    }
    println!(
        "replay identical: {} rows, final type {}",
        result.records.len(),
        result.snapshot.mbti
    );
    Ok(())
}

fn sweep(
    ctx: &Ctx,
    seed: u64,
    dir: Option<&Path>,
    params: &ParamArgs,
    oracle: &OracleArgs,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let params = resolve_params(ctx, params)?;
    let mut sets = BTreeMap::new();
    for f in PsychFunction::ALL {
        let set = match dir {
            Some(d) => {
                let p = d.join(format!("{}.json", f.label().to_ascii_lowercase()));
                if p.exists() {
                    load_set(&p)?
                } else {
                    ScenarioSet::synthetic(f)
                }
            }
            None => ScenarioSet::synthetic(f),
        };
        if set.target != f {
            return Err(CliError::Format(format!("scenario set for {f} targets {}", set.target)));
        }
        sets.insert(f, set);
    }
    let oracle = oracles::build(&settings(ctx, oracle, BTreeSet::new())?);
    let config = EngineConfig {
        params,
        ..EngineConfig::default()
    };
    let cases: Vec<(MbtiType, PsychFunction)> = MbtiType::ALL
        .iter()
        .flat_map(|&m| PsychFunction::ALL.iter().map(move |&f| (m, f)))
        .collect();
    let results: Vec<CaseResult> = cases
        .par_iter()
        .map(|&(m, f)| run_case(m, &sets[&f], seed, config, &oracle).map(|(r, _)| r))
        .collect::<Result<_, _>>()?;
    let summary = score(&results).map_err(|e| CliError::Format(e.to_string()))?;

    print!("type ");
    for f in PsychFunction::ALL {
        print!(" {:>5}", f.label());
    }
    println!();
    for m in MbtiType::ALL {
        print!("{m}");
        for f in PsychFunction::ALL {
            let r = results
                .iter()
                .find(|r| r.mbti == m && r.target == f)
                .expect("all cases ran");
            let mark = if summary.mismatches.contains(&(m, f)) { "!" } else { " " };
            print!("  {}{mark}", r.observed.final_type);
        }
        println!();
    }
    println!(
        "PSA {}/{} = {:.2}%",
        summary.matched,
        summary.cases,
        summary.psa * 100.0
    );
    if let Some(p) = out {
        let mut s = serde_json::to_string_pretty(&results).expect("serializable");
        s.push('\n');
        write_file(p, &s)?;
    }
    Ok(())
}
