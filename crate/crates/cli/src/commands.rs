use std::fs;
use std::path::{Path, PathBuf};

use scenario_forge::align::merge;
use scenario_forge::codegen::{compile, emit_script, MapCatalog, MinisimScenario, PlacementConfig};
use scenario_forge::eval::{
    evaluate, inject_detection_drop, inject_text_hallucination, injection_sweep, load_benchmark, spearman,
    EvalConfig, EvalError, InjectKind, Injection, LANE_EXTENSION_MASK,
};
use scenario_forge::ir::{emit_dsl, parse_dsl, Scenario};
use scenario_forge::pipeline::{compose, PipelineConfig};
use scenario_forge::testbed::{fuzz, run as simulate, EgoPolicy, FuzzConfig, NaiveAgent, NoOpAgent, SimConfig};
use scenario_forge::text_extract::{extract_textual_ir, ProviderConfig};
use scenario_forge::vision::{build_visual_ir, load_detections, VisionConfig};
use serde_json::json;

use crate::config::{ConfigFile, DEFAULT_SEED};
use crate::{Agent, Cli, Command, Failure};

struct Context {
    seed: u64,
    jobs: usize,
    out_dir: PathBuf,
    catalog: Option<PathBuf>,
    provider: Option<ProviderConfig>,
    vision: VisionConfig,
    verbose: bool,
}

impl Context {
    fn new(cli: &Cli) -> Result<Context, Failure> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let jobs = cli.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        let mut vision = VisionConfig::default();
        if let Some(v) = &file.vision {
            vision.confidence_floor = v.confidence_floor.unwrap_or(vision.confidence_floor);
            vision.dedup_iou = v.dedup_iou.unwrap_or(vision.dedup_iou);
            vision.front_margin = v.front_margin.unwrap_or(vision.front_margin);
        }
        let provider = cli
            .mock_responses
            .as_ref()
            .map(ProviderConfig::mock)
            .or_else(|| file.provider())
            .or_else(ProviderConfig::from_env);
        Ok(Context {
            seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            jobs,
            out_dir: cli.out_dir.clone().or(file.out_dir.clone()).unwrap_or_else(|| PathBuf::from(".")),
            catalog: cli.catalog.clone().or(file.catalog.clone()),
            provider,
            vision,
            verbose: cli.verbose > 0,
        })
    }

    fn provider(&self) -> Result<ProviderConfig, Failure> {
        self.provider.clone().ok_or_else(|| {
            Failure::Usage(
                "no completion provider: pass --mock-responses, a [provider] section in --config, \
                 or set SCENARIO_FORGE_LLM_ENDPOINT"
                    .into(),
            )
        })
    }

    fn pipeline(&self) -> Result<PipelineConfig, Failure> {
        let mut p = PipelineConfig::new(self.provider()?);
        p.vision = self.vision;
        Ok(p)
    }

    fn catalog(&self) -> Result<MapCatalog, Failure> {
        match &self.catalog {
            Some(p) => MapCatalog::load(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
            None => Ok(MapCatalog::builtin()),
        }
    }

    fn out(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out_dir.join(name))
    }

    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_ir(path: &Path) -> Result<Scenario, Failure> {
    parse_dsl(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, content).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// File name without directory and without the first matching suffix.
fn stem(path: &Path, suffixes: &[&str]) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    for s in suffixes {
        if let Some(base) = name.strip_suffix(s) {
            return base.to_string();
        }
    }
    Path::new(&name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or(name)
}

fn policy(agent: Agent) -> Box<dyn EgoPolicy> {
    match agent {
        Agent::Naive => Box::new(NaiveAgent::default()),
        Agent::Noop => Box::new(NoOpAgent),
    }
}

fn pipeline_error(e: impl std::fmt::Display) -> Failure {
    Failure::Pipeline(e.to_string())
}

fn eval_error(e: EvalError) -> Failure {
    match e {
        EvalError::NoRepetitions => Failure::Usage(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = Context::new(&cli)?;
    match cli.command {
        Command::ExtractText { description, output } => {
            let text = read(&description)?;
            let p = ctx.pipeline()?;
            let ir = extract_textual_ir(&text, &p.fewshot, &p.provider).map_err(pipeline_error)?;
            let name = format!("{}.text.scn.yaml", stem(&description, &[".txt"]));
            write(&ctx.out(&output, &name), &emit_dsl(&ir))
        }
        Command::ExtractVision { detections, output } => {
            let ds = load_detections(&detections, 0.0).map_err(|e| Failure::Input(e.to_string()))?;
            let ir = build_visual_ir(&ds, &ctx.vision);
            let name = format!("{}.visual.scn.yaml", stem(&detections, &[".json"]));
            write(&ctx.out(&output, &name), &emit_dsl(&ir))
        }
        Command::Align {
            text,
            visual,
            output,
            report,
        } => {
            let (t, v) = (read_ir(&text)?, read_ir(&visual)?);
            let (merged, rep) = merge(&t, &v);
            write(&ctx.out(&output, "out.scn.yaml"), &emit_dsl(&merged))?;
            write(&ctx.out(&report, "merge-report.json"), &rep.to_json())
        }
        Command::Compose {
            description,
            detections,
            output,
            report,
        } => {
            let text = read(&description)?;
            let ds = load_detections(&detections, 0.0).map_err(|e| Failure::Input(e.to_string()))?;
            let c = compose(&text, &ds, &ctx.pipeline()?).map_err(pipeline_error)?;
            for conflict in &c.report.conflicts {
                ctx.note(format!(
                    "conflict at {}: text `{}`, image `{}`",
                    conflict.path, conflict.text_value, conflict.visual_value
                ));
            }
            write(&ctx.out(&output, "out.scn.yaml"), &emit_dsl(&c.merged))?;
            write(&ctx.out(&report, "merge-report.json"), &c.report.to_json())
        }
        Command::Codegen { ir, target, output } => {
            let s = read_ir(&ir)?;
            let cs = compile(&s, &ctx.catalog()?, ctx.seed, &PlacementConfig::default()).map_err(pipeline_error)?;
            for d in &cs.defaults {
                ctx.note(format!("defaulted {} = {}", d.path, d.value));
            }
            let name = format!("{}{}", stem(&ir, &[".scn.yaml", ".yaml"]), target.file_suffix());
            write(&ctx.out(&output, &name), &emit_script(&cs, target))
        }
        Command::Simulate { scenario, agent } => {
            let sc = MinisimScenario::from_json(&read(&scenario)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", scenario.display())))?;
            let out = simulate(&sc, policy(agent).as_ref(), &SimConfig::default())
                .map_err(|e| Failure::Input(format!("{}: {e}", scenario.display())))?;
            for b in &out.bugs {
                println!("{:.1}s {} ({})", b.time_s, b.signature(), b.participants.join(", "));
            }
            let base = stem(&scenario, &[".minisim.json", ".json"]);
            write(&ctx.out_dir.join(format!("{base}.trace.json")), &to_json(&out.trace))?;
            write(&ctx.out_dir.join(format!("{base}.bugs.json")), &to_json(&out.bugs))
        }
        Command::Fuzz { seeds, iters, agent } => {
            let corpus = load_seeds(&seeds)?;
            let mut config = FuzzConfig::new(iters, ctx.seed);
            config.catalog = ctx.catalog()?;
            config.jobs = ctx.jobs;
            let stats = fuzz(&corpus, policy(agent).as_ref(), &config).map_err(pipeline_error)?;
            for d in &stats.dropped_seeds {
                eprintln!("dropped seed {}: {}", d.index, d.reason);
            }
            println!(
                "{} distinct bug(s) in {} iterations; first at {}",
                stats.distinct_bugs,
                stats.iterations,
                stats.first_bug_iteration.map_or("-".to_string(), |i| i.to_string())
            );
            write(&ctx.out_dir.join("fuzz-stats.json"), &stats.to_json())?;
            write(&ctx.out_dir.join("fuzz-timeline.csv"), &stats.timeline_csv())
        }
        Command::Evaluate {
            benchmark,
            reps,
            mask,
            lane_mask,
        } => {
            let records = load_benchmark(&benchmark).map_err(|e| Failure::Input(e.to_string()))?;
            let mut config = EvalConfig::new(ctx.pipeline()?, reps);
            config.jobs = ctx.jobs;
            config.mask = mask;
            if lane_mask {
                config.mask.extend(LANE_EXTENSION_MASK.iter().map(|s| s.to_string()));
            }
            let report = evaluate(&records, &config).map_err(eval_error)?;
            print!("{}", report.to_table());
            write(&ctx.out_dir.join("eval-report.json"), &report.to_json())?;
            write(&ctx.out_dir.join("eval-report.txt"), &report.to_table())
        }
        Command::Inject {
            kind,
            rate,
            input,
            benchmark,
            reps,
            output,
        } => match (input, benchmark) {
            (Some(input), _) => {
                let [rate] = rate[..] else {
                    return Err(Failure::Usage("a single --rate is needed when corrupting a file".into()));
                };
                inject_file(&ctx, kind, rate, &input, &output)
            }
            (None, Some(bench)) => inject_benchmark(&ctx, kind, &rate, &bench, reps),
            (None, None) => Err(Failure::Usage("give an input file or --benchmark".into())),
        },
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn load_seeds(dir: &Path) -> Result<Vec<Scenario>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".scn.yaml"))
        .collect();
    if paths.is_empty() {
        return Err(Failure::Input(format!("{}: no *.scn.yaml seed scenarios", dir.display())));
    }
    paths.sort();
    paths.iter().map(|p| read_ir(p)).collect()
}

fn inject_file(ctx: &Context, kind: InjectKind, rate: f64, input: &Path, output: &Option<PathBuf>) -> Result<(), Failure> {
    match kind {
        InjectKind::Text => {
            let ir = read_ir(input)?;
            let out = inject_text_hallucination(&ir, rate, ctx.seed).map_err(pipeline_error)?;
            let name = format!("{}.injected.scn.yaml", stem(input, &[".scn.yaml", ".yaml"]));
            write(&ctx.out(output, &name), &emit_dsl(&out))
        }
        InjectKind::Detections => {
            let ds = load_detections(input, 0.0).map_err(|e| Failure::Input(e.to_string()))?;
            let out = inject_detection_drop(&ds, rate, ctx.seed).map_err(pipeline_error)?;
            let name = format!("{}.injected.json", stem(input, &[".json"]));
            write(&ctx.out(output, &name), &out.to_json())
        }
    }
}

fn inject_benchmark(ctx: &Context, kind: InjectKind, rates: &[f64], bench: &Path, reps: usize) -> Result<(), Failure> {
    let records = load_benchmark(bench).map_err(|e| Failure::Input(e.to_string()))?;
    let mut config = EvalConfig::new(ctx.pipeline()?, reps);
    config.jobs = ctx.jobs;
    if let [rate] = rates[..] {
        config.injection = Some(Injection {
            kind,
            rate,
            seed: ctx.seed,
        });
        let report = evaluate(&records, &config).map_err(eval_error)?;
        print!("{}", report.to_table());
        return write(&ctx.out_dir.join("eval-report.json"), &report.to_json());
    }
    let points = injection_sweep(&records, &config, kind, rates, ctx.seed).map_err(eval_error)?;
    let means: Vec<f64> = points.iter().map(|p| p.mean_accuracy.unwrap_or(f64::NAN)).collect();
    let rho = spearman(rates, &means);
    for p in &points {
        println!("rate {:.3}  mean accuracy {:.4}", p.rate, p.mean_accuracy.unwrap_or(f64::NAN));
    }
    println!("spearman rho {}", rho.map_or("n/a".to_string(), |r| format!("{r:.4}")));
    let doc = json!({
        "kind": kind,
        "seed": ctx.seed,
        "repetitions": reps,
        "points": points,
        "spearman_rho": rho,
    });
    write(&ctx.out_dir.join("injection-sweep.json"), &to_json(&doc))
}
