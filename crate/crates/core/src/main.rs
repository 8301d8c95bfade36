use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use mihailova::fiber::{express_in_generators, member_l, ExpressBounds, Expression};
use mihailova::matrep::{eval4, power_into_f2xf2, IntMatrix, PowerOutcome, DEFAULT_POWER_BOUND};
use mihailova::pipeline::{
    self, check_shape, emit_instance, pipeline_3to1, pipeline_lemma2, Bounds, HInput,
};
use mihailova::planes::{commutant, invariant_planes_report};
use mihailova::semidir::{iso_witness, verify_hom, ActionSpec, HomWitness};
use mihailova::words::{
    AbelianZ2, FreeQuotient, PairWord, Presentation, QuotientOracle, SymmetricThree,
};

#[derive(Parser)]
#[command(
    name = "mihailova",
    version,
    about = "Mihailova fiber products and GL(4,Z) gadget instances"
)]
struct Cli {
    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the generators of L.
    Gens(Group),
    /// Decide membership of a pair in L.
    Member(WithPair),
    /// Write a member of L as a word in the generators of L.
    Express(ExpressArgs),
    /// Emit the presentations of G_h and G_1.
    EmitIsoInstance(EmitArgs),
    /// Emit the generating sets of <L, h> and L in GL(4,Z).
    EmitConjInstance(EmitArgs),
    /// Emit the isomorphism G_h -> G_1 for h given as a word in h1..hp.
    IsoWitness(IsoArgs),
    /// Check that a generator map sends every relator to the identity.
    Verify(VerifyArgs),
    /// Commutant and invariant planes of a set of 4x4 matrices.
    Planes(PlanesArgs),
    /// Find the least power of a 4x4 matrix lying in F2 x F2.
    Power(PowerArgs),
    /// Membership of h in L with an explicit isomorphism certificate.
    PipelineLemma2(Lemma2Args),
    /// Derive h in L from a conjugator g with <L, h> = g^-1 L g.
    #[command(name = "pipeline-3to1")]
    Pipeline3to1(ThreeToOneArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleChoice {
    S3,
    Zsq,
    Free,
}

#[derive(Args)]
struct Group {
    /// Quotient fixture used to decide the word problem in H.
    #[arg(long, value_enum, default_value = "s3")]
    oracle: OracleChoice,
    /// Presentation JSON; defaults to the fixture's own presentation.
    #[arg(long)]
    presentation: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    /// Left coordinate of h, e.g. "a B a".
    #[arg(long, requires = "right")]
    left: Option<String>,
    /// Right coordinate of h.
    #[arg(long, requires = "left")]
    right: Option<String>,
}

#[derive(Args)]
struct HArgs {
    /// h as a word in h1..hp.
    #[arg(long, conflicts_with_all = ["left", "right"])]
    symbol: Option<String>,
    #[command(flatten)]
    pair: PairArgs,
}

#[derive(Args)]
struct WithPair {
    #[command(flatten)]
    group: Group,
    #[arg(long)]
    left: String,
    #[arg(long)]
    right: String,
}

#[derive(Args)]
struct SearchArgs {
    /// Length bound for the breadth-first stage.
    #[arg(long, default_value_t = ExpressBounds::default().depth)]
    depth: usize,
    /// Expansion budget for the relator-insertion stage (0 disables it).
    #[arg(long, default_value_t = ExpressBounds::default().kernel_budget)]
    budget: usize,
}

impl SearchArgs {
    fn bounds(&self) -> ExpressBounds {
        ExpressBounds {
            depth: self.depth,
            kernel_budget: self.budget,
        }
    }
}

#[derive(Args)]
struct ExpressArgs {
    #[command(flatten)]
    pair: WithPair,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct EmitArgs {
    #[command(flatten)]
    group: Group,
    #[command(flatten)]
    h: HArgs,
    /// Require the gadget groups to have this shape.
    #[arg(long, value_enum)]
    target_shape: Option<TargetShape>,
    /// Also write the output pieces as separate files into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetShape {
    /// Z^4 x| F_15 (input presentation with 12 relators).
    F15,
}

#[derive(Args)]
struct IsoArgs {
    #[command(flatten)]
    group: Group,
    #[arg(long)]
    symbol: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Source presentation JSON.
    #[arg(long)]
    source: PathBuf,
    /// Target semidirect product, as its JSON list of action matrices.
    #[arg(long)]
    target_action: PathBuf,
    /// Generator map JSON.
    #[arg(long)]
    witness: PathBuf,
}

#[derive(Args)]
struct PlanesArgs {
    /// JSON list of 4x4 matrices; defaults to the images of the generators of L.
    #[arg(long, conflicts_with_all = ["symbol", "left", "right"])]
    matrices: Option<PathBuf>,
    #[command(flatten)]
    group: Group,
    /// Add h to the generators of L.
    #[command(flatten)]
    h: HArgs,
}

#[derive(Args)]
struct PowerArgs {
    /// JSON file holding one 4x4 matrix.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = DEFAULT_POWER_BOUND)]
    power_bound: u64,
}

#[derive(Args)]
struct Lemma2Args {
    #[command(flatten)]
    group: Group,
    #[command(flatten)]
    h: HArgs,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct ThreeToOneArgs {
    #[command(flatten)]
    group: Group,
    #[command(flatten)]
    h: HArgs,
    /// JSON file holding the conjugator g.
    #[arg(long)]
    conjugator: PathBuf,
    #[arg(long, default_value_t = DEFAULT_POWER_BOUND)]
    power_bound: u64,
}

type Fallible<T> = Result<T, Box<dyn std::error::Error>>;

fn read(path: &Path) -> Fallible<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Fallible<T> {
    serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Fallible<()> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

impl HArgs {
    fn input(&self) -> Fallible<Option<HInput>> {
        match (&self.symbol, &self.pair.left, &self.pair.right) {
            (Some(s), _, _) => Ok(Some(HInput::Symbol(s.clone()))),
            (None, Some(l), Some(r)) => Ok(Some(HInput::Pair(PairWord::parse(l, r)?))),
            _ => Ok(None),
        }
    }

    fn required(&self) -> Fallible<HInput> {
        self.input()?
            .ok_or_else(|| "give h with --symbol or with --left and --right".into())
    }
}

/// Runs a command that needs the oracle as a concrete type.
trait WithOracle {
    fn run<O: QuotientOracle>(self, oracle: &O, pres: Presentation) -> Fallible<(Value, i32)>;
}

fn dispatch<C: WithOracle>(group: &Group, cmd: C) -> Fallible<(Value, i32)> {
    fn go<O: QuotientOracle, C: WithOracle>(
        o: &O,
        path: &Option<PathBuf>,
        cmd: C,
    ) -> Fallible<(Value, i32)> {
        let pres = match path {
            Some(p) => Presentation::from_json(&read(p)?)?,
            None => o.presentation(),
        };
        cmd.run(o, pres)
    }
    match group.oracle {
        OracleChoice::S3 => go(&SymmetricThree, &group.presentation, cmd),
        OracleChoice::Zsq => go(&AbelianZ2, &group.presentation, cmd),
        OracleChoice::Free => go(&FreeQuotient, &group.presentation, cmd),
    }
}

struct Gens;
impl WithOracle for Gens {
    fn run<O: QuotientOracle>(self, _: &O, pres: Presentation) -> Fallible<(Value, i32)> {
        let gens = pipeline::generators(&pres)?;
        Ok((serde_json::to_value(&gens)?, 0))
    }
}

struct Member(PairWord);
impl WithOracle for Member {
    fn run<O: QuotientOracle>(self, o: &O, pres: Presentation) -> Fallible<(Value, i32)> {
        let _ = pipeline::generators(&pres)?;
        let member = member_l(o, &self.0);
        Ok((
            json!({ "pair": self.0, "oracle": o.name(), "member": member }),
            if member { 0 } else { 3 },
        ))
    }
}

struct Express(PairWord, ExpressBounds);
impl WithOracle for Express {
    fn run<O: QuotientOracle>(self, o: &O, pres: Presentation) -> Fallible<(Value, i32)> {
        let gens = pipeline::generators(&pres)?;
        if !member_l(o, &self.0) {
            return Ok((json!({ "pair": self.0, "member": false }), 3));
        }
        Ok(match express_in_generators(&gens, o, &self.0, self.1)? {
            Expression::Found { word, method } => (
                json!({
                    "pair": self.0,
                    "member": true,
                    "word": gens.format_symbol_word(&word),
                    "method": method,
                }),
                0,
            ),
            Expression::NotFoundWithinBound => (
                json!({ "pair": self.0, "member": true, "word": null, "bounds": self.1 }),
                2,
            ),
        })
    }
}

struct Emit {
    h: HInput,
    shape: Option<TargetShape>,
    out_dir: Option<PathBuf>,
    conj: bool,
}
impl WithOracle for Emit {
    fn run<O: QuotientOracle>(self, _: &O, pres: Presentation) -> Fallible<(Value, i32)> {
        let bundle = emit_instance(&pres, &self.h)?;
        if let Some(TargetShape::F15) = self.shape {
            check_shape(&bundle, 15)?;
        }
        let value = if self.conj {
            if let Some(dir) = &self.out_dir {
                write_json(dir, "with_h.json", &bundle.theorem2.with_h)?;
                write_json(dir, "without_h.json", &bundle.theorem2.without_h)?;
            }
            json!({
                "with_h": bundle.theorem2.with_h,
                "without_h": bundle.theorem2.without_h,
                "provenance": bundle.provenance,
            })
        } else {
            if let Some(dir) = &self.out_dir {
                let gens = pipeline::generators(&pres)?;
                let (h, _) = self.h.resolve(&gens)?;
                write_json(dir, "g_h.json", &bundle.theorem1.g_h)?;
                write_json(dir, "g_1.json", &bundle.theorem1.g_1)?;
                write_json(dir, "action_h.json", &ActionSpec::gadget(&gens, &h))?;
                write_json(
                    dir,
                    "action_1.json",
                    &ActionSpec::gadget(&gens, &PairWord::identity()),
                )?;
            }
            json!({
                "g_h": bundle.theorem1.g_h,
                "g_1": bundle.theorem1.g_1,
                "provenance": bundle.provenance,
            })
        };
        Ok((value, 0))
    }
}

struct Iso(String);
impl WithOracle for Iso {
    fn run<O: QuotientOracle>(self, _: &O, pres: Presentation) -> Fallible<(Value, i32)> {
        let gens = pipeline::generators(&pres)?;
        let w = pipeline::parse_symbol(&gens, &self.0)?;
        Ok((serde_json::to_value(iso_witness(&gens, &w)?)?, 0))
    }
}

struct Planes(Option<HInput>);
impl WithOracle for Planes {
    fn run<O: QuotientOracle>(self, _: &O, pres: Presentation) -> Fallible<(Value, i32)> {
        let gens = pipeline::generators(&pres)?;
        let mut ms: Vec<IntMatrix> = gens.gens().iter().map(eval4).collect();
        if let Some(h) = &self.0 {
            ms.push(eval4(&h.resolve(&gens)?.0));
        }
        planes_value(&ms)
    }
}

fn planes_value(ms: &[IntMatrix]) -> Fallible<(Value, i32)> {
    let c = commutant(ms);
    let report = invariant_planes_report(ms).ok();
    Ok((
        json!({ "commutant_dim": c.dim(), "commutant": c, "report": report }),
        0,
    ))
}

struct Lemma2(HInput, ExpressBounds);
impl WithOracle for Lemma2 {
    fn run<O: QuotientOracle>(self, o: &O, pres: Presentation) -> Fallible<(Value, i32)> {
        let bounds = Bounds {
            express: self.1,
            ..Bounds::default()
        };
        let r = pipeline_lemma2(&pres, o, &self.0, bounds)?;
        Ok((serde_json::to_value(&r)?, r.status.exit_code()))
    }
}

struct ThreeToOne(HInput, IntMatrix, u64);
impl WithOracle for ThreeToOne {
    fn run<O: QuotientOracle>(self, o: &O, pres: Presentation) -> Fallible<(Value, i32)> {
        let r = pipeline_3to1(&pres, o, &self.0, &self.1, self.2)?;
        Ok((serde_json::to_value(&r)?, r.status.exit_code()))
    }
}

fn execute(command: Command) -> Fallible<(Value, i32)> {
    match command {
        Command::Gens(g) => dispatch(&g, Gens),
        Command::Member(a) => {
            let pair = PairWord::parse(&a.left, &a.right)?;
            dispatch(&a.group, Member(pair))
        }
        Command::Express(a) => {
            let pair = PairWord::parse(&a.pair.left, &a.pair.right)?;
            dispatch(&a.pair.group, Express(pair, a.search.bounds()))
        }
        Command::EmitIsoInstance(a) => emit(a, false),
        Command::EmitConjInstance(a) => emit(a, true),
        Command::IsoWitness(a) => dispatch(&a.group, Iso(a.symbol)),
        Command::Verify(a) => {
            let src = Presentation::from_json(&read(&a.source)?)?;
            let action: ActionSpec = read_json(&a.target_action)?;
            let w: HomWitness = read_json(&a.witness)?;
            let check = verify_hom(&src, &action, &w)?;
            let code = if check.ok { 0 } else { 3 };
            Ok((serde_json::to_value(&check)?, code))
        }
        Command::Planes(a) => match &a.matrices {
            Some(path) => planes_value(&read_json::<Vec<IntMatrix>>(path)?),
            None => dispatch(&a.group, Planes(a.h.input()?)),
        },
        Command::Power(a) => {
            let g: IntMatrix = read_json(&a.matrix)?;
            let outcome = power_into_f2xf2(&g, a.power_bound)?;
            let code = match outcome {
                PowerOutcome::Found { .. } => 0,
                PowerOutcome::NotFoundWithinBound { .. } => 2,
            };
            Ok((serde_json::to_value(&outcome)?, code))
        }
        Command::PipelineLemma2(a) => {
            let h = a.h.required()?;
            dispatch(&a.group, Lemma2(h, a.search.bounds()))
        }
        Command::Pipeline3to1(a) => {
            let h = a.h.required()?;
            let g: IntMatrix = read_json(&a.conjugator)?;
            dispatch(&a.group, ThreeToOne(h, g, a.power_bound))
        }
    }
}

fn emit(a: EmitArgs, conj: bool) -> Fallible<(Value, i32)> {
    let h = a.h.required()?;
    dispatch(
        &a.group,
        Emit {
            h,
            shape: a.target_shape,
            out_dir: a.out_dir,
            conj,
        },
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok((value, code)) => {
            let text = if cli.pretty {
                serde_json::to_string_pretty(&value)
            } else {
                serde_json::to_string(&value)
            }
            .expect("JSON values always serialize");
            println!("{text}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
