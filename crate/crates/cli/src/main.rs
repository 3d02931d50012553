use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lattice_lowering::corpus::{generate_corpus, search_counterexample, CorpusSpec};
use lattice_lowering::enumeration::for_each_geometry;
use lattice_lowering::extensions::{
    exhaustive_extension_search, extend_parallel_chains_with_limit, extend_to_geometric,
    rectangular_dimension, rectangular_extension, rectangular_extension_with_cover,
    DEFAULT_SIZE_LIMIT,
};
use lattice_lowering::io::{
    emit_dot, emit_lattice, lowering_highlights, parse_lattice_file, parse_poset, TraceFile,
};
use lattice_lowering::lowering::{lower_direct, lower_via_geometry};
use lattice_lowering::{Error, ExtensionTrace, FiniteLattice, Predicate};

#[derive(Parser)]
#[command(name = "latlow", version, about = "Semimodular lattices and their length-preserving extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Direct,
    Geometry,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Geometric,
    Chains,
}

#[derive(Subcommand)]
enum Command {
    /// Print the predicate profile of a lattice.
    Check { file: PathBuf },
    /// Profile plus join-irreducibles, atoms and covers.
    Info { file: PathBuf },
    /// Lower the join-irreducible E to a cover of H.
    Lower {
        file: PathBuf,
        #[arg(long)]
        e: usize,
        #[arg(long)]
        h: usize,
        #[arg(long, value_enum, default_value = "direct")]
        route: Route,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Extend into a geometric lattice, or make a chain partition of Jir parallel.
    Extend {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "geometric")]
        mode: Mode,
        /// Chains separated by `;`, elements by `,`, e.g. `1,2;3`.
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SIZE_LIMIT)]
        limit: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Extend into a rectangular lattice of dimension width(Jir).
    Rect {
        file: PathBuf,
        /// A cover of Jir by chains (may overlap), same syntax as --partition.
        #[arg(long)]
        cover: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Find a lattice where lowering breaks PREDICATE.
    SearchCounterexample {
        #[arg(long)]
        predicate: Predicate,
        /// Search the extended corpus instead of the default one.
        #[arg(long)]
        extended: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Count the geometries on a poset, or search them for an extension of a lattice.
    EnumGeometries {
        poset: PathBuf,
        #[arg(long)]
        find_extension_of: Option<PathBuf>,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Replay a trace file and re-verify every step.
    VerifyTrace { trace: PathBuf },
}

enum Failure {
    Io(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Lib(e) => match e {
                Error::Precondition(_)
                | Error::NotAPartition(_)
                | Error::NotSemimodular(_)
                | Error::NotDistributive
                | Error::NotAChain(..)
                | Error::Index { .. } => 3,
                Error::SizeLimit { .. } | Error::BoundExceeded { .. } | Error::CapExceeded { .. } => 4,
                Error::Verification(_) | Error::Axiom(_) => 5,
                Error::Parse { .. } | Error::NotALattice { .. } | Error::Cycle(..) => 1,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.code() {
            3 => "precondition",
            4 => "size-limit",
            5 => "verification",
            _ => "input",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Out = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Out {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<FiniteLattice, Failure> {
    Ok(parse_lattice_file(&read(path)?)?.lattice)
}

fn parse_chains(spec: &str) -> Result<Vec<Vec<usize>>, Failure> {
    spec.split(';')
        .filter(|c| !c.trim().is_empty())
        .map(|c| {
            c.split(',')
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|_| Failure::Lib(Error::NotAPartition(format!("bad element `{x}`"))))
                })
                .collect()
        })
        .collect()
}

fn profile(l: &FiniteLattice) {
    let jir = l.join_irreducibles();
    println!("elements: {}", l.len());
    println!("semimodular: {}", l.is_semimodular());
    println!("distributive: {}", l.is_distributive());
    println!("modular: {}", l.is_modular());
    println!("join-distributive: {}", l.is_join_distributive());
    println!("geometric: {}", l.is_geometric());
    println!("length: {}", l.length());
    println!("jir: {}", jir.len());
    println!("atoms: {}", l.atoms().len());
    println!("width(jir): {}", jir.order.width());
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn finish_trace(t: &ExtensionTrace, output: Option<&Path>, trace: Option<&Path>) -> Out {
    t.verify()?;
    eprintln!(
        "{} steps, {} -> {} elements",
        t.steps.len(),
        t.initial.len(),
        t.final_lattice.len()
    );
    if let Some(p) = trace {
        write_or_print(Some(p), &TraceFile::from_trace(t).to_jsonl())?;
    }
    write_or_print(output, &emit_lattice(&t.final_lattice))
}

fn run(cli: Cli) -> Out {
    match cli.command {
        Command::Check { file } => {
            profile(&load(&file)?);
        }
        Command::Info { file } => {
            let l = load(&file)?;
            profile(&l);
            let jir = l.join_irreducibles();
            println!("bottom: {}", l.bottom());
            println!("top: {}", l.top());
            println!("jir elements: {}", join(&jir.elements));
            println!("jir lower covers: {}", join(&jir.lcov));
            println!("atoms list: {}", join(&l.atoms()));
            println!("covers: {}", l.order().covers().len());
        }
        Command::Lower {
            file,
            e,
            h,
            route,
            output,
            trace,
            dot,
        } => {
            let l = load(&file)?;
            let res = match route {
                Route::Direct => lower_direct(&l, e, h)?,
                Route::Geometry => lower_via_geometry(&l, e, h)?,
                Route::Both => {
                    let a = lower_direct(&l, e, h)?;
                    let b = lower_via_geometry(&l, e, h)?;
                    if a.d != b.d || !a.k.same_order(&b.k) || a.k.find_isomorphism(&b.k).is_none() {
                        return Err(Error::Verification("the two routes disagree".into()).into());
                    }
                    eprintln!("routes agree: |K| = {}, isomorphic", a.k.len());
                    a
                }
            };
            eprintln!("D = {{{}}}, e' = {}", join(&res.d), res.e_prime);
            if let Some(p) = trace {
                let t = TraceFile::from_steps(&l, std::slice::from_ref(&res));
                write_or_print(Some(&p), &t.to_jsonl())?;
            }
            if let Some(p) = dot {
                write_or_print(Some(&p), &emit_dot(&res.k, None, &lowering_highlights(&res)))?;
            }
            write_or_print(output.as_deref(), &emit_lattice(&res.k))?;
        }
        Command::Extend {
            file,
            mode,
            partition,
            limit,
            output,
            trace,
        } => {
            let l = load(&file)?;
            let t = match (mode, partition) {
                (Mode::Geometric, None) => extend_to_geometric(&l, limit)?,
                (Mode::Geometric, Some(_)) => {
                    return Err(Failure::Lib(Error::Precondition(
                        "--partition only applies to --mode chains".into(),
                    )))
                }
                (Mode::Chains, Some(spec)) => {
                    extend_parallel_chains_with_limit(&l, &parse_chains(&spec)?, limit)?
                }
                (Mode::Chains, None) => {
                    return Err(Failure::Lib(Error::Precondition(
                        "--mode chains needs --partition".into(),
                    )))
                }
            };
            if let Some(chains) = &t.chains {
                let text: Vec<String> = chains.iter().map(|c| join(c)).collect();
                eprintln!("chains: {}", text.join(" | "));
            }
            finish_trace(&t, output.as_deref(), trace.as_deref())?;
        }
        Command::Rect {
            file,
            cover,
            output,
            trace,
        } => {
            let l = load(&file)?;
            let t = match cover {
                Some(spec) => rectangular_extension_with_cover(&l, &parse_chains(&spec)?)?,
                None => rectangular_extension(&l)?,
            };
            if let Some(k) = rectangular_dimension(&t.final_lattice) {
                eprintln!("{k}-dimensional rectangular");
            }
            finish_trace(&t, output.as_deref(), trace.as_deref())?;
        }
        Command::SearchCounterexample {
            predicate,
            extended,
            output,
        } => {
            let spec = if extended {
                CorpusSpec::extended()
            } else {
                CorpusSpec::default()
            };
            let corpus = generate_corpus(&spec);
            match search_counterexample(&corpus, predicate) {
                None => println!("no counterexample for {predicate} in {} lattices", corpus.len()),
                Some(c) => {
                    println!("lattice: {}", c.name);
                    println!("e: {}", c.e);
                    println!("h: {}", c.h);
                    if let Some(s) = c.sublattice {
                        println!("sublattice of K: {}", join(&s));
                    }
                    print!("{}", emit_lattice(&c.lattice));
                    if let Some(p) = output {
                        write_or_print(Some(&p), &emit_lattice(&c.k))?;
                    }
                }
            }
        }
        Command::EnumGeometries {
            poset,
            find_extension_of,
            bound,
        } => {
            let p = parse_poset(&read(&poset)?)?;
            match find_extension_of {
                None => {
                    let mut count = 0usize;
                    let _ = for_each_geometry(&p, None, |_| {
                        count += 1;
                        std::ops::ControlFlow::Continue(())
                    });
                    println!("geometries: {count}");
                }
                Some(path) => {
                    let l = load(&path)?;
                    let bound = bound.unwrap_or(1usize << p.len().min(20));
                    let found = exhaustive_extension_search(&l, &p, bound)?;
                    println!("geometries examined: {}", found.geometries_examined);
                    match found.witness {
                        None => println!("extension: absent"),
                        Some(w) => {
                            println!("extension: found ({} elements)", w.lattice.len());
                            println!("embedding: {}", join(&w.embedding));
                            print!("{}", emit_lattice(&w.lattice));
                        }
                    }
                }
            }
        }
        Command::VerifyTrace { trace } => {
            let t = TraceFile::parse_jsonl(&read(&trace)?)?;
            let k = t.replay()?;
            println!("trace ok: final lattice has {} elements", k.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.kind(), f.message());
            ExitCode::from(f.code())
        }
    }
}
