//! `cartan-sym`: check candidate symmetry generators against catalog or
//! file-defined geometries.

use std::process::ExitCode;

use cartan_symmetry::catalog::{self, GeometryEntry, ORACLE_PAIRS};
use cartan_symmetry::checks::{
    check, equivalence_harness, oracle_study, Agreement, CheckConfig, Mode, Outcome,
    CONVERGENCE_TIMES, ORACLE_MARGIN,
};
use cartan_symmetry::geometry::GeometrySpec;
use cartan_symmetry::report::{check_report_json, check_report_text, equivalence_row};
use cartan_symmetry::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "cartan-sym",
    version,
    about = "Verify symmetry generators of spacetime geometries"
)]
struct Cli {
    /// Worker threads for sample-parallel evaluation.
    #[arg(long, global = true, env = "CARTAN_SYM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one geometry against one vector field.
    Check {
        /// Catalog name or path to a geometry file.
        #[arg(long)]
        geometry: String,
        /// Catalog name or path to a vector field file.
        #[arg(long)]
        vector: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Direct)]
        mode: ModeArg,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, value_enum, default_value_t = ReportArg::Text)]
        report: ReportArg,
    },
    /// Compare the flow-pullback oracle with the jet Lie derivative.
    Oracle {
        /// Metric geometry; defaults to the builtin study pairs.
        #[arg(long, requires = "vector")]
        geometry: Option<String>,
        #[arg(long, requires = "geometry")]
        vector: Option<String>,
        /// Base points per pair.
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List catalog geometries and vector fields.
    List,
    /// Direct vs Cartan verdicts over every compatible catalog pair.
    Matrix {
        #[command(flatten)]
        sampling: Sampling,
    },
}

#[derive(Args)]
struct Sampling {
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 40)]
    samples: usize,
    #[arg(long, default_value_t = 5)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Sampling {
    fn config(&self) -> Result<CheckConfig, Error> {
        if !(self.tol > 0.0) {
            return Err(Error::Validation("--tol must be positive".into()));
        }
        Ok(CheckConfig {
            tolerance: self.tol,
            samples: self.samples,
            frames: self.frames,
            seed: self.seed,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Direct,
    Cartan,
    Both,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Direct => Mode::Direct,
            ModeArg::Cartan => Mode::Cartan,
            ModeArg::Both => Mode::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportArg {
    Text,
    Json,
}

const EXIT_SYMMETRIC: u8 = 0;
const EXIT_NOT_SYMMETRIC: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_INPUT: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Check {
            geometry,
            vector,
            mode,
            sampling,
            report,
        } => {
            let cfg = sampling.config()?;
            let geom = catalog::resolve_geometry(&geometry)?;
            let xi = catalog::resolve_vector(&vector, &geom.spec)?;
            let result = check(&geom.spec, &xi, mode.into(), &cfg)?;
            let vector_name = catalog::resolve_vector_entry(&vector)?.name;
            match report {
                ReportArg::Text => {
                    print!("{}", check_report_text(&result, &geom.name, &vector_name))
                }
                ReportArg::Json => {
                    println!("{}", check_report_json(&result, &geom.name, &vector_name))
                }
            }
            Ok(match result.outcome() {
                Outcome::Symmetric => EXIT_SYMMETRIC,
                Outcome::NotSymmetric => EXIT_NOT_SYMMETRIC,
                Outcome::Inconclusive => EXIT_INCONCLUSIVE,
            })
        }
        Command::Oracle {
            geometry,
            vector,
            points,
            seed,
        } => oracle(geometry.zip(vector), points, seed),
        Command::List => {
            list();
            Ok(EXIT_SYMMETRIC)
        }
        Command::Matrix { sampling } => matrix(&sampling.config()?),
    }
}

fn list() {
    let cat = catalog::builtin();
    println!("geometries:");
    for g in &cat.geometries {
        let coords = g.spec.chart().coord_names().join(",");
        println!(
            "  {:<30} {:<15} ({coords})  {}",
            g.name,
            g.spec.kind().name(),
            g.description
        );
    }
    println!("vector fields:");
    for v in &cat.vectors {
        println!(
            "  {:<30} ({})  {}",
            v.name,
            v.coords.join(","),
            v.description
        );
    }
}

fn metric_of(entry: &GeometryEntry) -> Result<&cartan_symmetry::fields::MetricSpec, Error> {
    match &entry.spec {
        GeometrySpec::Riemannian(g) => Ok(g),
        other => Err(Error::Unsupported(format!(
            "the flow oracle needs a riemannian geometry, {} is {}",
            entry.name,
            other.kind().name()
        ))),
    }
}

fn oracle(pair: Option<(String, String)>, points: usize, seed: u64) -> Result<u8, Error> {
    let pairs: Vec<(String, String)> = match pair {
        Some(p) => vec![p],
        None => ORACLE_PAIRS
            .iter()
            .map(|(g, v)| (g.to_string(), v.to_string()))
            .collect(),
    };
    print!("{:<16} {:<16}", "geometry", "vector");
    for t in CONVERGENCE_TIMES {
        print!(" {:>11}", format!("t={t:.2e}"));
    }
    println!(" {:>11} {:>8}", "t=1.00e-3", "slope");
    let mut ok = true;
    for (gname, vname) in pairs {
        let geom = catalog::resolve_geometry(&gname)?;
        let g = metric_of(&geom)?;
        let xi = catalog::resolve_vector(&vname, &geom.spec)?;
        let pts = geom
            .spec
            .chart()
            .sample_points_within(points, seed, ORACLE_MARGIN)?;
        let study = oracle_study(g, &xi, &pts, &CONVERGENCE_TIMES)?;
        let at_1e3 = oracle_study(g, &xi, &pts, &[1e-3])?.errors[0];
        print!("{:<16} {:<16}", geom.name, vname);
        for e in &study.errors {
            print!(" {e:>11.3e}");
        }
        println!(" {at_1e3:>11.3e} {:>8.3}", study.slope);
        ok &= at_1e3 < 1e-5 && (1.8..=2.2).contains(&study.slope);
    }
    Ok(if ok {
        EXIT_SYMMETRIC
    } else {
        EXIT_NOT_SYMMETRIC
    })
}

fn matrix(cfg: &CheckConfig) -> Result<u8, Error> {
    let cat = catalog::builtin();
    let pairs = cat.matrix_pairs();
    println!(
        "{:<30} {:<16} {:<14} {:>10} {:<14} {:>10} agreement",
        "geometry", "vector", "direct", "max resid", "cartan", "max resid"
    );
    let (mut agree, mut disagree, mut inconclusive) = (0, 0, 0);
    for (g, v) in &pairs {
        let xi = v.bind(g.spec.chart())?;
        let eq = equivalence_harness(&g.spec, &xi, cfg)?;
        println!("{}", equivalence_row(&g.name, &v.name, &eq));
        match eq.agreement {
            Agreement::Agree => agree += 1,
            Agreement::Disagree => disagree += 1,
            Agreement::Inconclusive => inconclusive += 1,
        }
    }
    println!(
        "{} pairs: {agree} agree, {disagree} disagree, {inconclusive} inconclusive",
        pairs.len()
    );
    Ok(if disagree > 0 {
        EXIT_NOT_SYMMETRIC
    } else if inconclusive > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_SYMMETRIC
    })
}
