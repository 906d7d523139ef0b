use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use riskaverse::commit::{commit_game_with, solve_commit, CommitOptions};
use riskaverse::equilibrium::{iesds, iesds_with, is_strictly_dominated, mixed_equilibria_2p, pure_equilibria};
use riskaverse::game::expected_tensor;
use riskaverse::gamefile::load_game;
use riskaverse::rae2::{rae2_mixed_2x2, rae2_mixed_grid, Rae2Table, DEFAULT_TUPLE_CAP};
use riskaverse::simulate::{compare_equilibria, indifference_test, param_grid, sweep, SimConfig, SweepRow};
use riskaverse::{build_tensor, Concept, EquilibriumResult, Kind, MixedProfile, PayoffTensor, StochasticGame};

mod output;

use output::{equilibrium_json, Precision};

#[derive(Parser)]
#[command(name = "riskaverse", version, about = "Equilibria of finite games with random payoffs")]
struct Cli {
    /// Print numbers at full precision instead of six significant digits.
    #[arg(long, global = true)]
    raw: bool,
    /// More diagnostics on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GameArgs {
    /// Game file.
    game: PathBuf,
    /// Bind a declared parameter, e.g. `--param a=5`.
    #[arg(short, long = "param", value_name = "NAME=VALUE", value_parser = parse_binding)]
    params: Vec<(String, f64)>,
}

impl GameArgs {
    fn load(&self) -> Result<StochasticGame> {
        load_game(&self.game, &self.params).with_context(|| format!("loading {}", self.game.display()))
    }

    fn load_with(&self, name: &str, value: f64) -> Result<StochasticGame> {
        let mut params: Vec<_> = self.params.iter().filter(|(k, _)| k != name).cloned().collect();
        params.push((name.to_string(), value));
        load_game(&self.game, &params).with_context(|| format!("loading {} with {name}={value}", self.game.display()))
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ConceptArg {
    Nash,
    Rae,
    Rae2,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Pure,
    Mixed,
    All,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Experiment {
    Compare,
    Indifference,
}

#[derive(Subcommand)]
enum Command {
    /// Print the best-response probability tensor as CSV.
    Tensor {
        #[command(flatten)]
        game: GameArgs,
        /// Print expected payoffs instead.
        #[arg(long)]
        expected: bool,
    },
    /// Find equilibria; one JSON record per line.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value = "rae")]
        concept: ConceptArg,
        #[arg(long, value_enum, default_value = "all")]
        kind: KindArg,
        /// Largest number of opponent-profile assignments for rae2.
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP)]
        tuple_cap: u128,
    },
    /// Nash equilibria of the expected-payoff game.
    Nash {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value = "all")]
        kind: KindArg,
    },
    /// Report strictly dominated strategies.
    Dominate {
        #[command(flatten)]
        game: GameArgs,
        /// Eliminate iteratively and print the trace.
        #[arg(long)]
        eliminate: bool,
        #[arg(long, value_enum, default_value = "rae")]
        concept: ConceptArg,
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP)]
        tuple_cap: u128,
    },
    /// Equilibria when every player commits to one action for M rounds.
    Commit {
        #[command(flatten)]
        game: GameArgs,
        #[arg(short = 'M', long = "rounds")]
        m: usize,
        /// Lattice spacing for the convolution grid.
        #[arg(long)]
        grid_step: Option<f64>,
        /// Keep the initial grid instead of refining it.
        #[arg(long)]
        no_refine: bool,
        #[arg(long, value_enum, default_value = "all")]
        kind: KindArg,
        /// Print the commit tensor as CSV instead of equilibria.
        #[arg(long)]
        tensor: bool,
    },
    /// Monte Carlo comparison of equilibria; CSV output.
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value_t = 1_000_000)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Player whose payoffs are compared, from 1.
        #[arg(long, default_value_t = 1)]
        player: usize,
        #[arg(long, value_enum, default_value = "compare")]
        experiment: Experiment,
        /// First profile: `CONCEPT:KIND[:N]` (e.g. `rae:pure`, `nash:mixed:2`)
        /// or comma-separated labels of a pure profile (e.g. `U,R`).
        #[arg(long)]
        first: Option<String>,
        /// Second profile for `compare`, same syntax as `--first`.
        #[arg(long)]
        second: Option<String>,
        /// Repeat over `NAME=LO:HI:STEP`.
        #[arg(long, value_name = "NAME=LO:HI:STEP")]
        sweep: Option<String>,
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP)]
        tuple_cap: u128,
    },
}

fn parse_binding(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_sweep(s: &str) -> Result<(String, Vec<f64>)> {
    let (name, range) = s.split_once('=').ok_or_else(|| anyhow!("expected NAME=LO:HI:STEP, got '{s}'"))?;
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| anyhow!("'{p}' is not a number")))
        .collect::<Result<_>>()?;
    let [lo, hi, step] = parts[..] else {
        bail!("expected NAME=LO:HI:STEP, got '{s}'");
    };
    Ok((name.trim().to_string(), param_grid(lo, hi, step)?))
}

fn wants(kind: KindArg, k: Kind) -> bool {
    match kind {
        KindArg::All => true,
        KindArg::Pure => k == Kind::Pure,
        KindArg::Mixed => k == Kind::Mixed,
    }
}

fn mixed_from_tensor(t: &PayoffTensor, concept: Concept, kind: KindArg) -> Result<Vec<EquilibriumResult>> {
    if t.players() != 2 {
        if kind == KindArg::Mixed {
            bail!(riskaverse::Error::Unsupported("mixed equilibria need exactly two players".into()));
        }
        if t.players() > 2 {
            log::warn!("mixed equilibria skipped: the game has {} players", t.players());
        }
        return Ok(Vec::new());
    }
    let search = mixed_equilibria_2p(t, concept)?;
    if !search.degenerate.is_empty() {
        log::warn!("{} support pair(s) had singular indifference systems and were skipped", search.degenerate.len());
    }
    Ok(search.equilibria)
}

fn solve(game: &StochasticGame, concept: ConceptArg, kind: KindArg, tuple_cap: u128) -> Result<Vec<EquilibriumResult>> {
    let (tensor, tag) = match concept {
        ConceptArg::Nash => (expected_tensor(game), Concept::Nash),
        ConceptArg::Rae => (build_tensor(game)?.into_inner(), Concept::Rae),
        ConceptArg::Rae2 => (build_tensor(game)?.into_inner(), Concept::Rae2),
    };
    let mut out = Vec::new();
    if kind != KindArg::Mixed {
        out.extend(pure_equilibria(&tensor, tag));
    }
    if kind != KindArg::Pure {
        if concept == ConceptArg::Rae2 {
            out.extend(mixed_rae2(game, tuple_cap, kind)?);
        } else {
            out.extend(mixed_from_tensor(&tensor, tag, kind)?);
        }
    }
    Ok(out)
}

fn mixed_rae2(game: &StochasticGame, tuple_cap: u128, kind: KindArg) -> Result<Vec<EquilibriumResult>> {
    match game.shape().dims() {
        [2, 2] => match rae2_mixed_2x2(game) {
            Err(e @ riskaverse::Error::NoInteriorRoot { .. }) if kind == KindArg::All => {
                log::info!("no mixed RAE2: {e}");
                Ok(Vec::new())
            }
            other => Ok(other?),
        },
        [_, _] => {
            log::warn!("no closed form beyond 2x2; falling back to a grid search");
            Ok(rae2_mixed_grid(game, tuple_cap)?)
        }
        dims if kind == KindArg::All => {
            if dims.len() > 2 {
                log::warn!("mixed RAE2 skipped: the game has {} players", game.players());
            }
            Ok(Vec::new())
        }
        _ => bail!(riskaverse::Error::Unsupported("mixed RAE2 needs exactly two players".into())),
    }
}

fn print_records(game: &StochasticGame, eqs: &[EquilibriumResult], prec: Precision) -> Result<()> {
    let mut out = io::stdout().lock();
    for eq in eqs {
        writeln!(out, "{}", equilibrium_json(game, eq, prec))?;
    }
    Ok(())
}

fn print_tensor(game: &StochasticGame, t: &PayoffTensor, prec: Precision) -> Result<()> {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let mut header = vec!["player".to_string()];
    header.extend((1..=game.players()).map(|k| format!("s{k}")));
    header.push("value".into());
    w.write_record(&header)?;
    for i in 0..game.players() {
        for p in game.shape().iter_profiles() {
            let mut row = vec![(i + 1).to_string()];
            row.extend(game.profile_labels(&p));
            row.push(prec.text(t.get(i, &p)));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn dominate(game: &StochasticGame, concept: ConceptArg, eliminate: bool, tuple_cap: u128) -> Result<()> {
    let mut out = io::stdout().lock();
    if eliminate {
        let result = match concept {
            ConceptArg::Rae => iesds(game)?,
            ConceptArg::Nash => iesds_with(game, |g| Ok(expected_tensor(g)))?,
            ConceptArg::Rae2 => bail!(riskaverse::Error::Unsupported("iterated elimination under rae2".into())),
        };
        for (k, e) in result.trace.iter().enumerate() {
            let rec = serde_json::json!({
                "step": k + 1,
                "player": e.player + 1,
                "strategy": e.strategy,
                "dominated_by": e.dominated_by,
            });
            writeln!(out, "{rec}")?;
        }
        let remaining: Vec<&[String]> = result.game.strategies().iter().map(|s| s.labels.as_slice()).collect();
        writeln!(out, "{}", serde_json::json!({ "remaining": remaining }))?;
        return Ok(());
    }
    let tensor = match concept {
        ConceptArg::Rae => Some(build_tensor(game)?.into_inner()),
        ConceptArg::Nash => Some(expected_tensor(game)),
        ConceptArg::Rae2 => None,
    };
    for i in 0..game.players() {
        let labels = &game.strategies()[i].labels;
        let table = match tensor {
            Some(_) => None,
            None => Some(Rae2Table::new(game, i, tuple_cap)?),
        };
        if table.is_some() && labels.len() > 2 {
            log::warn!("rae2 dominance for player {} with more than two strategies is provisional", i + 1);
        }
        for s in 0..labels.len() {
            let by = match (&tensor, &table) {
                (Some(t), _) => is_strictly_dominated(t, i, s),
                (None, Some(tab)) => tab.dominated_by(s),
                (None, None) => unreachable!(),
            };
            if let Some(by) = by {
                let rec = serde_json::json!({ "player": i + 1, "strategy": labels[s], "dominated_by": labels[by] });
                writeln!(out, "{rec}")?;
            }
        }
    }
    Ok(())
}

/// Resolves a `--first`/`--second` selector on `game`.
fn select_profile(game: &StochasticGame, selector: &str, tuple_cap: u128) -> Result<MixedProfile> {
    let parts: Vec<&str> = selector.split(':').map(str::trim).collect();
    let concept = match parts[0].to_ascii_lowercase().as_str() {
        "nash" => Some(ConceptArg::Nash),
        "rae" => Some(ConceptArg::Rae),
        "rae2" => Some(ConceptArg::Rae2),
        _ => None,
    };
    let Some(concept) = concept else {
        let labels: Vec<&str> = selector.split(',').map(str::trim).collect();
        if labels.len() != game.players() {
            bail!(riskaverse::Error::InvalidArgument(format!(
                "'{selector}' is neither CONCEPT:KIND[:N] nor a profile of {} labels",
                game.players()
            )));
        }
        let profile = labels
            .iter()
            .zip(game.strategies())
            .map(|(l, set)| {
                set.index_of(l).ok_or_else(|| {
                    riskaverse::Error::InvalidArgument(format!("player {} has no strategy '{l}'", set.player + 1))
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        return Ok(MixedProfile::pure(game.shape(), &profile));
    };
    let kind = match parts.get(1).copied() {
        None | Some("all") => KindArg::All,
        Some("pure") => KindArg::Pure,
        Some("mixed") => KindArg::Mixed,
        Some(k) => bail!(riskaverse::Error::InvalidArgument(format!("unknown kind '{k}' in '{selector}'"))),
    };
    let n: usize = match parts.get(2) {
        None => 1,
        Some(n) => n
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| riskaverse::Error::InvalidArgument(format!("bad index in '{selector}'")))?,
    };
    let found: Vec<EquilibriumResult> = solve(game, concept, kind, tuple_cap)?
        .into_iter()
        .filter(|e| wants(kind, e.kind))
        .collect();
    let count = found.len();
    found.into_iter().nth(n - 1).map(|e| e.profile).ok_or_else(|| {
        anyhow!(riskaverse::Error::InvalidArgument(format!(
            "'{selector}' asks for equilibrium {n} but only {count} exist"
        )))
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    args: &GameArgs,
    rounds: u64,
    seed: u64,
    player: usize,
    experiment: Experiment,
    first: Option<String>,
    second: Option<String>,
    sweep_spec: Option<String>,
    tuple_cap: u128,
    prec: Precision,
) -> Result<()> {
    if player == 0 {
        bail!(riskaverse::Error::InvalidArgument("players are numbered from 1".into()));
    }
    let cfg = SimConfig::new(rounds, seed, player - 1);
    let (first, second) = match experiment {
        Experiment::Compare => (
            first.unwrap_or_else(|| "rae:pure".into()),
            second.unwrap_or_else(|| "nash:pure".into()),
        ),
        Experiment::Indifference => {
            if second.is_some() {
                bail!(riskaverse::Error::InvalidArgument("--second is only used by compare".into()));
            }
            (first.unwrap_or_else(|| "rae:mixed".into()), String::new())
        }
    };
    let run = |game: &StochasticGame, param: f64| -> Result<SweepRow> {
        let a = select_profile(game, &first, tuple_cap)?;
        let (concept_b, report) = match experiment {
            Experiment::Compare => {
                let b = select_profile(game, &second, tuple_cap)?;
                (second.clone(), compare_equilibria(game, &a, &b, &cfg)?)
            }
            Experiment::Indifference => {
                let labels = &game.strategies()[cfg.player].labels;
                let vs = format!("{} vs {}", labels[0], labels.get(1).map_or("?", String::as_str));
                (vs, indifference_test(game, &a, &cfg)?)
            }
        };
        Ok(SweepRow { param, concept_a: first.clone(), concept_b, report })
    };

    let rows = match sweep_spec {
        None => vec![run(&args.load()?, f64::NAN)?],
        Some(spec) => {
            let (name, grid) = parse_sweep(&spec)?;
            sweep(&grid, |a| run(&args.load_with(&name, a)?, a).with_context(|| format!("at {name}={a}")))?
        }
    };

    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["param", "concept_a", "concept_b", "rounds", "wins", "ties", "proportion", "ci3"])?;
    for r in rows {
        let param = if r.param.is_nan() { String::new() } else { prec.text(r.param) };
        w.write_record([
            param,
            r.concept_a,
            r.concept_b,
            r.report.rounds.to_string(),
            r.report.wins.to_string(),
            r.report.ties.to_string(),
            prec.text(r.report.proportion),
            prec.text(r.report.confidence_halfwidth),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let prec = Precision { raw: cli.raw };
    match cli.command {
        Command::Tensor { game, expected } => {
            let g = game.load()?;
            let t = if expected { expected_tensor(&g) } else { build_tensor(&g)?.into_inner() };
            print_tensor(&g, &t, prec)
        }
        Command::Solve { game, concept, kind, tuple_cap } => {
            let g = game.load()?;
            print_records(&g, &solve(&g, concept, kind, tuple_cap)?, prec)
        }
        Command::Nash { game, kind } => {
            let g = game.load()?;
            print_records(&g, &solve(&g, ConceptArg::Nash, kind, 0)?, prec)
        }
        Command::Dominate { game, eliminate, concept, tuple_cap } => dominate(&game.load()?, concept, eliminate, tuple_cap),
        Command::Commit { game, m, grid_step, no_refine, kind, tensor } => {
            let g = game.load()?;
            let cg = commit_game_with(&g, m, CommitOptions { grid_step, refine: !no_refine })?;
            log::info!("commit grid step {}", cg.grid_step());
            if tensor {
                return print_tensor(&g, cg.tensor(), prec);
            }
            let eqs: Vec<_> = solve_commit(&cg)?.into_iter().filter(|e| wants(kind, e.kind)).collect();
            print_records(&g, &eqs, prec)
        }
        Command::Simulate { game, rounds, seed, player, experiment, first, second, sweep, tuple_cap } => {
            simulate(&game, rounds, seed, player, experiment, first, second, sweep, tuple_cap, prec)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<riskaverse::Error>())
        .any(riskaverse::Error::is_numerical);
    if numerical {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
