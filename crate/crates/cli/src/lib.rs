//! Command implementations behind the `factlab` binary. Every command returns
//! an [`Output`]: one JSON report plus any files to write, so the binary and
//! the tests share the same code path.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use factlab::criteria::{
    app_ci1, app_ci2, app_double_hypersurface, app_double_solid, app_hypersurface,
    hong_park_classify, main_bullet, prop_3r4_certify, theorem_main_certify,
};
use factlab::families::{generate, FamilyParams, FamilySpec};
use factlab::lincond::{
    bese_check, defect, incidence_bound_from_intersection, separator, SeparatorOutcome,
};
use factlab::poly::{default_var_names, parse_poly_with};
use factlab::projgeom::DEFAULT_SCAN_CAP;
use factlab::sing::nodal_instance;
use factlab::{Error, FieldSpec, HomoPoly, PointSet};
use serde_json::{json, Value};

/// Smallest accepted `--scan-cap`.
pub const MIN_SCAN_CAP: u64 = 1_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("usage: {0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Process exit code for an error. The match is exhaustive over the core
/// error type, so a new variant cannot ship without a code.
///
/// | code | meaning |
/// |------|---------|
/// | 2 | malformed or invalid input, bad parameters |
/// | 3 | enumeration larger than `--scan-cap` |
/// | 4 | field unsuitable for the operation |
/// | 5 | verification failed (locus mismatch, degenerate draws) |
/// | 6 | file system error |
pub fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Usage(_) => 2,
        CliError::Io { .. } => 6,
        CliError::Core(e) => match e {
            Error::Syntax(_)
            | Error::NotHomogeneous(..)
            | Error::UnknownVariable(_)
            | Error::InvalidField(_)
            | Error::FieldMismatch
            | Error::DimensionMismatch(_)
            | Error::NotSingular
            | Error::BadChart
            | Error::ZeroVector
            | Error::DuplicatePoint(_)
            | Error::CenterHit
            | Error::NotInSet
            | Error::Overlap
            | Error::GVanishesOnDelta
            | Error::DegreeMismatch(_)
            | Error::TooFew(_)
            | Error::WrongAmbient { .. }
            | Error::XiTooSmall(_)
            | Error::BadParams(_) => 2,
            Error::TooLarge { .. } => 3,
            Error::CharTooSmall(_)
            | Error::CharDividesDegree { .. }
            | Error::FieldTooSmall
            | Error::NeedsPrimeField => 4,
            Error::LocusMismatch(_) | Error::DegenerateDraw { .. } => 5,
        },
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "factlab",
    version,
    about = "Exact checks of linear conditions imposed by nodes"
)]
pub struct Cli {
    /// Field: `Fp:<prime>` or `QQ`. Overrides a `# field:` line in input files.
    #[arg(long, global = true)]
    pub field: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for scans.
    #[arg(long, global = true, env = "FACTLAB_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_SCAN_CAP)]
    pub scan_cap: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular points of a hypersurface or a complete intersection of two.
    Sing {
        poly_file: PathBuf,
        #[arg(long)]
        nvars: Option<usize>,
        /// Also write the nodes as a point-set file.
        #[arg(long)]
        nodes: Option<PathBuf>,
    },
    /// Rank defect of the evaluation matrix at degree xi.
    Defect {
        points_file: PathBuf,
        #[arg(long)]
        xi: u32,
    },
    /// Separator form for one point, or the dependency proving none exists.
    Separator {
        points_file: PathBuf,
        #[arg(long)]
        xi: u32,
        /// Index of the point in the file.
        #[arg(long)]
        point: usize,
    },
    /// Base-point conditions and scan for a plane point set.
    Bese {
        points_file: PathBuf,
        #[arg(long)]
        xi: u32,
        /// Forms whose common zeros are exactly the points (incidence bound).
        #[arg(long)]
        generators: Option<PathBuf>,
    },
    /// Classifies the double solid branched over a surface of degree 2r.
    Classify {
        poly_file: PathBuf,
        #[arg(long)]
        r: u32,
    },
    /// Pure-arithmetic criterion checks.
    Criteria(CriteriaArgs),
    /// Generates a verified instance of one of the extremal families.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Theorem {
    Main,
    Prop3r4,
    DoubleSolid,
    Hypersurface,
    Ci1,
    Ci2,
    DoubleHypersurface,
}

#[derive(Debug, Args)]
pub struct CriteriaArgs {
    #[arg(long, value_enum)]
    pub theorem: Theorem,
    #[arg(long)]
    pub n: Option<i64>,
    #[arg(long)]
    pub lambda: Option<i64>,
    #[arg(long)]
    pub size: Option<i64>,
    #[arg(long)]
    pub xi: Option<i64>,
    /// Main criterion only: check this bullet (1-3) instead of searching.
    #[arg(long)]
    pub bullet: Option<u8>,
    /// Rational `mu` for `--bullet 2|3`, e.g. `11/3`.
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long)]
    pub r: Option<i64>,
    #[arg(long)]
    pub eps: Option<i64>,
    #[arg(long)]
    pub nsing: Option<i64>,
    #[arg(long)]
    pub d: Option<i64>,
    #[arg(long)]
    pub m: Option<i64>,
    #[arg(long)]
    pub k: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum FamilyArg {
    DoubleSolidEq15,
    HypersurfaceXgyf,
    CiPlane,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, default_value_t = 5)]
    pub max_retries: u32,
    /// Scan the CI hypersurfaces for singularities too.
    #[arg(long)]
    pub check_smooth: bool,
    /// Directory for the polynomial, node and report files.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Settings shared by all commands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub field: Option<FieldSpec>,
    pub threads: usize,
    pub seed: u64,
    pub scan_cap: u64,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> CliResult<Self> {
        let field = cli.field.as_deref().map(str::parse).transpose()?;
        let threads = match cli.threads {
            Some(t) => t,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        if threads < 1 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        if cli.scan_cap < MIN_SCAN_CAP {
            return Err(CliError::Usage(format!(
                "--scan-cap must be at least {MIN_SCAN_CAP}"
            )));
        }
        Ok(RunConfig {
            field,
            threads,
            seed: cli.seed,
            scan_cap: cli.scan_cap,
            output: cli.output.clone(),
        })
    }

    fn resolve_field(&self, from_file: Option<FieldSpec>) -> CliResult<FieldSpec> {
        match (self.field, from_file) {
            (Some(a), Some(b)) if a != b => Err(Error::FieldMismatch.into()),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(CliError::Usage(
                "no field given: pass --field or add a `# field:` line".into(),
            )),
        }
    }
}

/// A report and the files a command wants written.
#[derive(Debug)]
pub struct Output {
    pub report: Value,
    pub files: Vec<(PathBuf, String)>,
}

impl Output {
    fn report(report: Value) -> Self {
        Output {
            report,
            files: Vec::new(),
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

/// Polynomial file: one form per line in the text grammar. Lines starting
/// with `#` are comments, except the directives `# field: <spec>` and
/// `# nvars: <n>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFile {
    pub field: FieldSpec,
    pub polys: Vec<HomoPoly>,
}

impl PolyFile {
    pub fn parse(text: &str, config: &RunConfig, nvars: Option<usize>) -> CliResult<Self> {
        let mut file_field = None;
        let mut file_nvars = None;
        let mut bodies = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(spec) = comment.strip_prefix("field:") {
                    file_field = Some(spec.trim().parse::<FieldSpec>()?);
                } else if let Some(n) = comment.strip_prefix("nvars:") {
                    let n = n
                        .trim()
                        .parse()
                        .map_err(|_| Error::Syntax(format!("bad nvars line {line:?}")))?;
                    file_nvars = Some(n);
                }
                continue;
            }
            bodies.push(line);
        }
        if bodies.is_empty() {
            return Err(Error::Syntax("no polynomial in file".into()).into());
        }
        let field = config.resolve_field(file_field)?;
        let nvars = match (nvars, file_nvars) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::DimensionMismatch(format!(
                    "--nvars {a} but the file declares {b}"
                ))
                .into())
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => infer_nvars(&bodies)?,
        };
        let names = default_var_names(nvars);
        let polys = bodies
            .iter()
            .map(|b| parse_poly_with(b, &names, field))
            .collect::<factlab::Result<Vec<_>>>()?;
        Ok(PolyFile { field, polys })
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "# field: {}\n# nvars: {}\n",
            self.field,
            self.polys[0].nvars()
        );
        for p in &self.polys {
            out.push_str(&p.to_text());
            out.push('\n');
        }
        out
    }
}

/// Smallest variable count whose default names cover every identifier.
fn infer_nvars(bodies: &[&str]) -> CliResult<usize> {
    let idents: Vec<String> = bodies
        .iter()
        .flat_map(|b| {
            b.split(|c: char| !c.is_ascii_alphanumeric())
                .filter(|t| t.starts_with(|c: char| c.is_ascii_alphabetic()))
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .collect();
    (2..=6)
        .find(|&n| {
            let names = default_var_names(n);
            idents.iter().all(|i| names.contains(i))
        })
        .or_else(|| {
            let idx: Option<Vec<usize>> = idents
                .iter()
                .map(|i| i.strip_prefix('x').and_then(|d| d.parse().ok()))
                .collect();
            idx.map(|v| v.into_iter().max().unwrap_or(0) + 1)
                .map(|n| n.max(7))
        })
        .ok_or_else(|| CliError::Usage("cannot infer the number of variables; pass --nvars".into()))
}

/// Point-set file; a file without any content lines is the empty set in the
/// plane over the configured field.
fn load_points(path: &Path, config: &RunConfig) -> CliResult<PointSet> {
    let text = read(path)?;
    let blank = text
        .lines()
        .map(str::trim)
        .all(|l| l.is_empty() || l.starts_with('#'));
    if blank {
        return Ok(PointSet::new(
            2,
            config.resolve_field(None).unwrap_or(FieldSpec::rational()),
        ));
    }
    let set = PointSet::parse_file(&text)?;
    config.resolve_field(Some(set.field()))?;
    Ok(set)
}

pub fn cmd_sing(
    path: &Path,
    nvars: Option<usize>,
    nodes: Option<&Path>,
    config: &RunConfig,
) -> CliResult<Output> {
    let file = PolyFile::parse(&read(path)?, config, nvars)?;
    let inst = nodal_instance(file.polys, config.scan_cap)?;
    let mut report = to_json(&inst);
    report["node_count"] = json!(inst.node_count());
    let mut out = Output::report(report);
    if let Some(p) = nodes {
        out.files.push((p.to_path_buf(), inst.sing.to_file_text()));
    }
    Ok(out)
}

pub fn cmd_defect(path: &Path, xi: u32, config: &RunConfig) -> CliResult<Output> {
    let set = load_points(path, config)?;
    Ok(Output::report(to_json(&defect(&set, xi))))
}

pub fn cmd_separator(path: &Path, xi: u32, index: usize, config: &RunConfig) -> CliResult<Output> {
    let set = load_points(path, config)?;
    let point = set.get(index).cloned().ok_or(Error::NotInSet)?;
    let mut report = to_json(&defect(&set, xi));
    match separator(&set, &point, xi)? {
        SeparatorOutcome::Certificate(c) => report["certificate"] = to_json(&c),
        SeparatorOutcome::Dependent(f) => report["dependency"] = to_json(&f),
    }
    Ok(Output::report(report))
}

pub fn cmd_bese(
    path: &Path,
    xi: u32,
    generators: Option<&Path>,
    config: &RunConfig,
) -> CliResult<Output> {
    let set = load_points(path, config)?;
    let cert = match generators {
        Some(g) => {
            let file = PolyFile::parse(&read(g)?, config, Some(set.ambient_dim() + 1))?;
            Some(incidence_bound_from_intersection(
                &set,
                &file.polys,
                config.scan_cap,
            )?)
        }
        None => None,
    };
    Ok(Output::report(to_json(&bese_check(
        &set,
        xi,
        cert.as_ref(),
        config.scan_cap,
    )?)))
}

pub fn cmd_classify(path: &Path, r: u32, config: &RunConfig) -> CliResult<Output> {
    let file = PolyFile::parse(&read(path)?, config, None)?;
    let [f] = file.polys.as_slice() else {
        return Err(
            Error::BadParams("classify expects exactly one surface equation".into()).into(),
        );
    };
    Ok(Output::report(to_json(&hong_park_classify(
        f,
        r,
        config.scan_cap,
    )?)))
}

fn need(value: Option<i64>, name: &str) -> CliResult<i64> {
    value.ok_or_else(|| CliError::Usage(format!("--{name} is required for this theorem")))
}

pub fn cmd_criteria(a: &CriteriaArgs) -> CliResult<Output> {
    let verdict = match a.theorem {
        Theorem::Main => {
            let (n, lambda, size, xi) = (
                need(a.n, "n")?,
                need(a.lambda, "lambda")?,
                need(a.size, "size")?,
                need(a.xi, "xi")?,
            );
            match a.bullet {
                None => theorem_main_certify(n, lambda, size, xi)?,
                Some(b) => {
                    let mu = match &a.mu {
                        Some(text) => text.parse().map_err(|_| {
                            Error::BadParams(format!("mu {text:?} is not a rational"))
                        })?,
                        None if b == 1 => num_one(),
                        None => {
                            return Err(CliError::Usage(
                                "--mu is required with --bullet 2 or 3".into(),
                            ))
                        }
                    };
                    main_bullet(b, n, lambda, size, xi, &mu)?
                }
            }
        }
        Theorem::Prop3r4 => prop_3r4_certify(
            need(a.r, "r")?,
            a.eps.unwrap_or(0),
            need(a.size, "size")?,
            a.lambda,
        )?,
        Theorem::DoubleSolid => app_double_solid(need(a.r, "r")?, need(a.nsing, "nsing")?)?,
        Theorem::Hypersurface => app_hypersurface(need(a.d, "d")?, need(a.nsing, "nsing")?)?,
        Theorem::Ci1 => app_ci1(need(a.m, "m")?, need(a.k, "k")?, need(a.nsing, "nsing")?)?,
        Theorem::Ci2 => app_ci2(need(a.m, "m")?, need(a.k, "k")?, need(a.nsing, "nsing")?)?,
        Theorem::DoubleHypersurface => {
            app_double_hypersurface(need(a.d, "d")?, need(a.r, "r")?, need(a.nsing, "nsing")?)?
        }
    };
    Ok(Output::report(to_json(&verdict)))
}

fn num_one() -> num_rational::BigRational {
    num_rational::BigRational::from_integer(1.into())
}

pub fn cmd_gen(a: &GenArgs, config: &RunConfig) -> CliResult<Output> {
    let need_u = |v: Option<u32>, name: &str| {
        v.ok_or_else(|| CliError::Usage(format!("--{name} is required for this family")))
    };
    let (params, default_p) = match a.family {
        FamilyArg::DoubleSolidEq15 => (
            FamilyParams::DoubleSolidEq15 {
                r: need_u(a.r, "r")?,
            },
            101,
        ),
        FamilyArg::HypersurfaceXgyf => (
            FamilyParams::HypersurfaceXgyf {
                d: need_u(a.d, "d")?,
            },
            31,
        ),
        FamilyArg::CiPlane => (
            FamilyParams::CiPlane {
                m: need_u(a.m, "m")?,
                k: need_u(a.k, "k")?,
            },
            11,
        ),
    };
    let field = match config.field {
        Some(f) => f,
        None => FieldSpec::prime(default_p)?,
    };
    let mut spec = FamilySpec::new(params, field, config.seed);
    spec.max_retries = a.max_retries;
    spec.check_smooth = a.check_smooth;
    let inst = generate(&spec, config.scan_cap)?;
    let mut report = to_json(&inst);
    report["node_count"] = json!(inst.instance.node_count());
    let mut out = Output::report(report);
    if let Some(dir) = &a.out_dir {
        let poly = PolyFile {
            field,
            polys: inst.instance.defining.clone(),
        };
        out.files.push((dir.join("defining.poly"), poly.render()));
        out.files
            .push((dir.join("nodes.pts"), inst.instance.sing.to_file_text()));
        out.files
            .push((dir.join("report.json"), render_report(&out.report)));
    }
    Ok(out)
}

/// Runs a parsed command line inside a thread pool of the configured size.
pub fn run(cli: &Cli) -> CliResult<(RunConfig, Output)> {
    let config = RunConfig::from_cli(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let out = pool.install(|| match &cli.command {
        Command::Sing {
            poly_file,
            nvars,
            nodes,
        } => cmd_sing(poly_file, *nvars, nodes.as_deref(), &config),
        Command::Defect { points_file, xi } => cmd_defect(points_file, *xi, &config),
        Command::Separator {
            points_file,
            xi,
            point,
        } => cmd_separator(points_file, *xi, *point, &config),
        Command::Bese {
            points_file,
            xi,
            generators,
        } => cmd_bese(points_file, *xi, generators.as_deref(), &config),
        Command::Classify { poly_file, r } => cmd_classify(poly_file, *r, &config),
        Command::Criteria(a) => cmd_criteria(a),
        Command::Gen(a) => cmd_gen(a, &config),
    })?;
    Ok((config, out))
}

pub fn render_report(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes the command's files and the report; returns the report text.
pub fn write_output(config: &RunConfig, out: &Output) -> CliResult<String> {
    for (path, text) in &out.files {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CliError::Io {
                path: parent.to_path_buf(),
                message: e.to_string(),
            })?;
        }
        fs::write(path, text).map_err(|e| CliError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
    }
    let text = render_report(&out.report);
    if let Some(path) = &config.output {
        fs::write(path, &text).map_err(|e| CliError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
    }
    Ok(text)
}
