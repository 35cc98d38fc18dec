use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use navq_core::agent::{AgentKind, S2Model};
use navq_core::eval;
use navq_core::navgraph::{fixtures, NavGraph};
use navq_core::pipeline::{self, BenchConfig, Models, StopTaus};
use navq_core::qmodel::{self, Mlp};
use navq_core::qoracle;
use navq_core::rollout::{self, RolloutMode};
use navq_core::verify::{self, VerifyConfig};
use navq_core::worldgen;
use serde::{Deserialize, Serialize};

use crate::cli::*;

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct WorldEntry {
    pub name: String,
    pub file: String,
    pub seed: u64,
}

/// Run metadata written next to every stage's outputs. Holds no paths or
/// timestamps, so identical runs produce identical bytes.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub stage: String,
    pub seed: u64,
    pub config: BenchConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub worlds: Vec<WorldEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_taus: Option<StopTaus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    pub files: Vec<String>,
}

impl Manifest {
    fn new(stage: &str, config: &BenchConfig) -> Self {
        Manifest {
            tool: "navq".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            stage: stage.into(),
            seed: config.seed,
            config: config.clone(),
            worlds: Vec::new(),
            stop_taus: None,
            gammas: None,
            files: Vec::new(),
        }
    }
}

/// Output directory plus the list of files written into it.
struct Out {
    dir: PathBuf,
    files: Vec<String>,
}

impl Out {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Out { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        worldgen::write_atomic(&path, contents.as_bytes())?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, mut manifest: Manifest) -> Result<()> {
        manifest.files = std::mem::take(&mut self.files);
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        worldgen::write_atomic(&self.dir.join(MANIFEST), text.as_bytes())?;
        Ok(())
    }
}

fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("missing manifest {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed manifest {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// `--config` if given, else the upstream stage's config, else defaults;
/// `--seed` overrides in every case.
fn resolve_config(cli: &Cli, upstream: Option<&Manifest>) -> Result<BenchConfig> {
    let mut cfg = match (&cli.config, upstream) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?
        }
        (None, Some(m)) => m.config.clone(),
        (None, None) => BenchConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

struct Worlds {
    manifest: Manifest,
    names: Vec<String>,
    graphs: Vec<NavGraph>,
}

fn load_worlds(dir: &Path) -> Result<Worlds> {
    let manifest = read_manifest(dir)?;
    if manifest.worlds.is_empty() {
        bail!("{} lists no worlds", dir.join(MANIFEST).display());
    }
    let graphs = manifest
        .worlds
        .iter()
        .map(|w| worldgen::load_graph(&dir.join(&w.file)))
        .collect::<Result<Vec<_>, _>>()?;
    let names = manifest.worlds.iter().map(|w| w.name.clone()).collect();
    Ok(Worlds { manifest, names, graphs })
}

/// Keeps the config's split consistent with the worlds actually on disk.
fn bind_worlds(cfg: &mut BenchConfig, worlds: &Worlds) -> Result<()> {
    cfg.n_worlds = worlds.graphs.len();
    cfg.world = worlds.manifest.config.world.clone();
    cfg.validate()?;
    Ok(())
}

pub fn gen_worlds(cli: &Cli, args: &GenWorldsArgs) -> Result<()> {
    let mut cfg = resolve_config(cli, None)?;
    if let Some(k) = args.kind {
        cfg.world.kind = k.into();
    }
    if let Some(n) = args.n {
        cfg.n_worlds = n;
    }
    if let Some(h) = args.holdout {
        cfg.n_holdout = h;
    }
    if let Some(n) = args.nodes {
        cfg.world.n_nodes = n;
    }
    let (names, configs, graphs) = pipeline::stage_worlds(&cfg)?;
    let mut out = Out::create(&args.out)?;
    let mut manifest = Manifest::new("gen-worlds", &cfg);
    for ((name, wc), g) in names.iter().zip(&configs).zip(&graphs) {
        let file = format!("{name}.json");
        out.write(&file, &worldgen::graph_to_json(g))?;
        manifest.worlds.push(WorldEntry { name: name.clone(), file, seed: wc.seed });
    }
    out.finish(manifest)?;
    println!("wrote {} worlds to {}", graphs.len(), args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct QdataStats {
    samples: usize,
    train: usize,
    val: usize,
    mean_traj_len: f64,
    gamma: f64,
    mode: RolloutMode,
}

pub fn build_qdata(cli: &Cli, args: &BuildQdataArgs) -> Result<()> {
    let worlds = load_worlds(&args.worlds)?;
    let mut cfg = resolve_config(cli, Some(&worlds.manifest))?;
    bind_worlds(&mut cfg, &worlds)?;
    if let Some(n) = args.n {
        cfg.q_samples = n;
    }
    if let Some(n) = args.val_n {
        cfg.q_val_samples = n;
    }
    if let Some(g) = args.gamma {
        cfg.oracle.gamma = g;
    }
    if let Some(m) = args.mode {
        cfg.oracle.mode = m.into();
    }
    if let Some(l) = args.max_traj_len {
        cfg.max_traj_len = l;
    }
    if let Some(k) = args.mc_rollouts {
        cfg.oracle.mc_rollouts = k;
    }
    cfg.validate()?;
    let (train, val) = pipeline::stage_qdata(&cfg, &worlds.graphs)?;
    let all = train.iter().chain(&val);
    let stats = QdataStats {
        samples: train.len() + val.len(),
        train: train.len(),
        val: val.len(),
        mean_traj_len: all.clone().map(|s| s.trajectory.len() as f64).sum::<f64>() / (train.len() + val.len()) as f64,
        gamma: cfg.oracle.gamma,
        mode: cfg.oracle.mode,
    };
    let mut out = Out::create(&args.out)?;
    out.write("train.jsonl", &qoracle::samples_to_jsonl(&train, &worlds.names))?;
    out.write("val.jsonl", &qoracle::samples_to_jsonl(&val, &worlds.names))?;
    out.write("stats.json", &to_json(&stats)?)?;
    out.finish(Manifest::new("build-qdata", &cfg))?;
    println!(
        "wrote {} training and {} validation samples (gamma {}, {}) to {}",
        train.len(),
        val.len(),
        cfg.oracle.gamma,
        cfg.oracle.mode,
        args.out.display()
    );
    Ok(())
}

pub fn train_qmodel(cli: &Cli, args: &TrainQmodelArgs) -> Result<()> {
    let worlds = load_worlds(&args.worlds)?;
    let upstream = read_manifest(&args.qdata)?;
    let mut cfg = resolve_config(cli, Some(&upstream))?;
    bind_worlds(&mut cfg, &worlds)?;
    if let Some(e) = args.epochs {
        cfg.qmodel.epochs = e;
    }
    if let Some(lr) = args.lr {
        cfg.qmodel.learning_rate = lr;
    }
    if let Some(b) = args.batch {
        cfg.qmodel.batch_size = b;
    }
    if let Some(h) = &args.hidden {
        cfg.qmodel.hidden = h.clone();
    }
    if let Some(o) = args.optimizer {
        cfg.qmodel.optimizer = o.into();
    }
    cfg.qmodel.validate()?;
    let train = qoracle::read_samples_jsonl(&args.qdata.join("train.jsonl"), &worlds.graphs, &worlds.names)?;
    let val = qoracle::read_samples_jsonl(&args.qdata.join("val.jsonl"), &worlds.graphs, &worlds.names)?;
    let n_train = cfg.split().end;
    if val.iter().any(|s| s.world < n_train) {
        bail!("validation samples must come from held-out worlds only");
    }
    let outcome = pipeline::stage_qmodel(&cfg, &worlds.graphs, &train, &val)?;
    let mut out = Out::create(&args.out)?;
    out.write("qmodel.json", &outcome.params.to_json())?;
    out.write("loss.csv", &qmodel::curve_csv(&outcome.curve))?;
    out.finish(Manifest::new("train-qmodel", &cfg))?;
    if let Some(last) = outcome.curve.last() {
        println!("epoch {}: train mse {}, val mse {}", last.epoch, last.train, last.val.unwrap_or(f64::NAN));
    }
    Ok(())
}

fn load_head(path: &Path) -> Result<S2Model> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let head: S2Model = serde_json::from_str(&text).with_context(|| format!("malformed head {}", path.display()))?;
    head.net.validate()?;
    Ok(head)
}

pub fn train_s2(cli: &Cli, args: &TrainS2Args) -> Result<()> {
    let worlds = load_worlds(&args.worlds)?;
    let upstream = read_manifest(&args.qmodel)?;
    let mut cfg = resolve_config(cli, Some(&upstream))?;
    bind_worlds(&mut cfg, &worlds)?;
    if let Some(n) = args.n {
        cfg.s2.samples = n;
    }
    if let Some(e) = args.epochs {
        cfg.s2.train.epochs = e;
    }
    if let Some(m) = args.s2_mode {
        cfg.s2.mode = m.into();
    }
    let qnet = Mlp::load(&args.qmodel.join("qmodel.json"))?;
    let heads = pipeline::stage_s2(&cfg, &worlds.graphs, &qnet)?;
    let mut out = Out::create(&args.out)?;
    let mut save = |name: &str, (model, curve): &pipeline::FittedHead| -> Result<()> {
        out.write(&format!("{name}.json"), &to_json(model)?)?;
        out.write(&format!("{name}_loss.csv"), &qmodel::curve_csv(curve))
    };
    save("history", &heads.history)?;
    if let Some(gt) = &heads.gt {
        save("gt", gt)?;
    }
    save("learned", &heads.learned)?;
    out.finish(Manifest::new("train-s2", &cfg))?;
    println!("wrote distance-to-go heads to {}", args.out.display());
    Ok(())
}

fn write_episode_outputs(out: &mut Out, prefix: &str, episodes: &[navq_core::agent::EpisodeResult], worlds: &[NavGraph], names: &[String]) -> Result<eval::MetricsReport> {
    let (report, histograms) = pipeline::summarize(episodes, worlds, names)?;
    out.write(&format!("{prefix}episodes.jsonl"), &eval::episodes_to_jsonl(episodes))?;
    out.write(&format!("{prefix}report.csv"), &report.to_csv())?;
    for (agent, h) in &histograms {
        out.write(&format!("{prefix}histogram_{agent}.csv"), &h.to_csv())?;
    }
    Ok(report)
}

pub fn run_bench(cli: &Cli, args: &RunBenchArgs) -> Result<()> {
    let worlds = load_worlds(&args.worlds)?;
    let upstream = read_manifest(&args.s2)?;
    let mut cfg = resolve_config(cli, Some(&upstream))?;
    bind_worlds(&mut cfg, &worlds)?;
    if let Some(a) = &args.agents {
        cfg.agents = a.clone();
    }
    if let Some(n) = args.episodes {
        cfg.episodes = n;
    }
    if let Some(b) = args.budget_factor {
        cfg.budget_factor = b;
    }
    if let Some(t) = args.stop_tau {
        cfg.stop_tau = t;
        cfg.stop_tau_grid.clear();
    }
    if let Some(a) = args.alpha {
        cfg.weights.alpha = a;
    }
    if let Some(b) = args.beta {
        cfg.weights.beta = b;
    }
    if let Some(f) = args.fusion {
        cfg.weights.fusion = f.into();
    }
    cfg.validate()?;
    let gt_path = args.s2.join("gt.json");
    let models = Models {
        qmodel: Mlp::load(&args.qmodel.join("qmodel.json"))?,
        s2_history: load_head(&args.s2.join("history.json"))?,
        s2_gt: if gt_path.exists() { Some(load_head(&gt_path)?) } else { None },
        s2_learned: load_head(&args.s2.join("learned.json"))?,
    };
    if models.s2_gt.is_none() && cfg.agents.contains(&AgentKind::ForesightedGtQ) {
        eprintln!("navq: skipping gtq: rollout mode {} has no exact Q-features", cfg.oracle.mode);
    }
    let taus = pipeline::calibrate_stop_taus(&cfg, &worlds.graphs, &worlds.names, &models)?;
    let episodes = pipeline::stage_episodes(&cfg, &worlds.graphs, &worlds.names, &models, &taus)?;
    let mut out = Out::create(&args.out)?;
    let report = write_episode_outputs(&mut out, "", &episodes, &worlds.graphs, &worlds.names)?;
    let mut manifest = Manifest::new("run-bench", &cfg);
    manifest.stop_taus = Some(taus);
    out.finish(manifest)?;
    print!("{}", report.to_csv());
    Ok(())
}

pub fn ablate(cli: &Cli, args: &AblateArgs) -> Result<()> {
    let mut cfg = resolve_config(cli, None)?;
    if let Some(n) = args.episodes {
        cfg.episodes = n;
    }
    if let Some(n) = args.q_samples {
        cfg.q_samples = n;
    }
    cfg.validate()?;
    let mut out = Out::create(&args.out)?;
    let mut manifest = Manifest::new("ablate", &cfg);
    let mut sweeps = Vec::new();
    if let Some(gammas) = &args.gammas {
        sweeps.push(("gamma", pipeline::ablate_gamma(&cfg, gammas)?));
        manifest.gammas = Some(gammas.clone());
    }
    if args.policy {
        sweeps.push(("policy", pipeline::ablate_policy(&cfg)?));
    }
    if let Some((_, cells)) = sweeps.first() {
        let first = &cells[0].output;
        for (name, g) in first.names.iter().zip(&first.worlds) {
            out.write(&format!("worlds/{name}.json"), &worldgen::graph_to_json(g))?;
        }
    }
    for (label, cells) in &sweeps {
        for (i, cell) in cells.iter().enumerate() {
            let o = &cell.output;
            write_episode_outputs(&mut out, &format!("{label}/cell_{i}/"), &o.episodes, &o.worlds, &o.names)?;
            out.write(&format!("{label}/cell_{i}/stop_taus.json"), &to_json(&o.stop_taus)?)?;
        }
        let table = pipeline::ablation_table(cells);
        out.write(&format!("{label}.csv"), &table.to_csv())?;
        print!("{}", table.to_csv());
    }
    out.finish(manifest)?;
    Ok(())
}

#[derive(Serialize)]
struct SupportExport {
    origin: usize,
    gamma: f64,
    mode: RolloutMode,
    candidates: Vec<rollout::CandidateSupport>,
}

pub fn export_supports(args: &ExportSupportsArgs) -> Result<()> {
    let g = match (&args.graph, args.fixture) {
        (Some(path), _) => worldgen::load_graph(path)?,
        (None, Some(f)) => match f {
            FixtureArg::Line3 => fixtures::line3(),
            FixtureArg::Star => fixtures::star(),
            FixtureArg::Diamond => fixtures::diamond(),
            FixtureArg::Cycle4 => fixtures::cycle4(),
        },
        (None, None) => bail!("either --graph or --fixture is required"),
    };
    if !g.contains(args.origin) {
        bail!("origin {} is not a node of the graph ({} nodes)", args.origin, g.len());
    }
    let mode = RolloutMode::from(args.mode);
    let candidates = rollout::export_support_map(&g, args.origin, args.gamma, mode)?;
    let export = SupportExport { origin: args.origin, gamma: args.gamma, mode, candidates };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    worldgen::write_atomic(&args.out, to_json(&export)?.as_bytes())?;
    println!("wrote {} candidate supports to {}", export.candidates.len(), args.out.display());
    Ok(())
}

pub fn verify(cli: &Cli, args: &VerifyArgs) -> Result<()> {
    let mut cfg = if args.quick {
        VerifyConfig { oracle_graphs: 5, mc_graphs: 2, mc_rollouts: 20_000, uniqueness_worlds: 5, grad_configs: 10, seed: 0 }
    } else {
        VerifyConfig::default()
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let checks = verify::run_all(&cfg)?;
    for c in &checks {
        println!("{c}");
    }
    if let Some(path) = &args.out {
        worldgen::write_atomic(path, to_json(&checks)?.as_bytes())?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}
