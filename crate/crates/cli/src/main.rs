use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use alink::affine::{synth_affine, AffineParams};
use alink::analysis::{detect_lines, squaring_growth, verify_affine};
use alink::links::{predict_affine, predict_const, psi_family};
use alink::padic::{fmt_rational, parse_rational, word_from_str, word_to_string, PAdicRational};
use alink::plot::{
    self, from_csv, monna_points, raster, to_csv, to_svg, to_unit, torus3d, window, CableOverlay,
    Mode, PlotError, Surface, EXHAUSTIVE_BUDGET,
};
use alink::transducer::codec::{self, LoadOptions};
use alink::transducer::{Transducer, TransducerError};
use alink::vanderput::{
    coeffset_probe, kernel_probe, vdp_coeffs, Oracle, TransducerOracle, DEFAULT_ALPHABET_CAP,
};

#[derive(Parser)]
#[command(
    name = "alink",
    version,
    about = "Finite p-adic transducers, their torus plots and limit links"
)]
struct Cli {
    /// Worker threads for plotting and detection; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Keep unreachable states when loading machine files.
    #[arg(long, global = true)]
    no_trim: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Output {
    /// Write data here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceArg {
    Square,
    Torus,
    CylinderX,
    CylinderY,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm,
    Svg,
    Torus3d,
}

#[derive(Subcommand)]
enum Cmd {
    /// Carry machine for z -> a*z + b.
    Synth {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[command(flatten)]
        out: Output,
    },
    /// Feed digit words (most significant digit first), one --word per input.
    Run {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long = "word", required = true)]
        words: Vec<String>,
    },
    /// Strongly connected components and the ergodic split.
    Components {
        #[arg(long)]
        machine: PathBuf,
    },
    /// Machine computing second(first(z)).
    Compose {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Two-input digit-serial adder.
    Adder {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Plot layers as CSV rows k,X,Y.
    Plot {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        k: u32,
        /// Last layer; defaults to --k.
        #[arg(long)]
        k_hi: Option<u32>,
        /// `exhaustive` or `sample:N`.
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "square")]
        surface: SurfaceArg,
        #[arg(long, default_value_t = EXHAUSTIVE_BUDGET)]
        budget: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Digit-reversed view of layer k as CSV numerators over p^k.
    Monna {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Closed-form limit link of z -> a*z + b.
    Predict {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Draw the predicted cables over this plot CSV.
        #[arg(long, requires = "points")]
        svg: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 512)]
        res: usize,
    },
    /// Exact check of a machine against z -> a*z + b.
    Verify {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value_t = 1)]
        kmin: u32,
        #[arg(long)]
        kmax: u32,
        #[arg(long, default_value_t = EXHAUSTIVE_BUDGET)]
        budget: u64,
    },
    /// Search a plot CSV for straight cables.
    Detect {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 8)]
        max_num: i64,
        #[arg(long, default_value_t = 8)]
        max_den: i64,
        #[arg(long, default_value = "1/256")]
        tol: String,
    },
    /// Van der Put coefficients as CSV m,B_m,b_m.
    Vdp {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        mmax: u64,
        #[arg(long, default_value_t = 64)]
        precision: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Bounded p-kernel search on the normalized coefficients.
    Kernel {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[arg(long, default_value_t = 1024)]
        prefix: usize,
        #[arg(long, default_value_t = DEFAULT_ALPHABET_CAP)]
        cap: usize,
    },
    /// Distinct squaring coefficients below p^j, as rows j,count.
    Squaring {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long)]
        mmax: u64,
    },
    /// Convert a plot CSV to csv, pgm, svg or torus3d.
    Export {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, default_value_t = 512)]
        res: usize,
        /// Overlay the link of z -> a*z + b (svg only).
        #[arg(long, allow_hyphen_values = true, requires = "b")]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    /// A check ran and did not pass.
    Check(String),
    /// Bad flags or malformed input.
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

impl From<PlotError> for Failure {
    fn from(e: PlotError) -> Self {
        match e {
            PlotError::Io { .. } => Failure::Io(e.to_string()),
            other => usage(other),
        }
    }
}

impl From<TransducerError> for Failure {
    fn from(e: TransducerError) -> Self {
        usage(e)
    }
}

impl From<alink::analysis::AnalysisError> for Failure {
    fn from(e: alink::analysis::AnalysisError) -> Self {
        match e {
            alink::analysis::AnalysisError::Plot(p) => p.into(),
            other => usage(other),
        }
    }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_machine(path: &Path, trim: bool) -> Res<Transducer> {
    codec::load_with(&read(path)?, LoadOptions { trim })
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn padic(s: &str, p: u32) -> Res<PAdicRational> {
    PAdicRational::parse(s, p).map_err(|e| usage(format!("'{s}': {e}")))
}

fn emit(out: &Output, data: &[u8]) -> Res<()> {
    match &out.out {
        Some(path) => Ok(plot::write_file(path, data)?),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(data)
                .map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn print(s: &str) -> Res<()> {
    emit(&Output { out: None }, s.as_bytes())
}

fn parse_mode(s: &str, seed: u64) -> Res<Mode> {
    if s == "exhaustive" {
        return Ok(Mode::Exhaustive);
    }
    s.strip_prefix("sample:")
        .and_then(|n| n.parse().ok())
        .map(|n| Mode::Sampled { n, seed })
        .ok_or_else(|| usage(format!("mode '{s}' is neither 'exhaustive' nor 'sample:N'")))
}

fn dispatch(cmd: Cmd, trim: bool) -> Res<()> {
    match cmd {
        Cmd::Synth { p, a, b, out } => {
            let t = synth_affine(&padic(&a, p)?, &padic(&b, p)?).map_err(usage)?;
            emit(&out, codec::save(&t).as_bytes())
        }
        Cmd::Run { machine, words } => {
            let t = load_machine(&machine, trim)?;
            let p = t.prime();
            let inputs = words
                .iter()
                .map(|w| {
                    word_from_str(w, p)
                        .ok_or_else(|| usage(format!("'{w}' is not a base-{p} word")))
                })
                .collect::<Res<Vec<_>>>()?;
            let outs = t.run(&inputs)?;
            let text: String = outs.iter().map(|w| word_to_string(w) + "\n").collect();
            print(&text)
        }
        Cmd::Components { machine } => {
            let t = load_machine(&machine, trim)?;
            let r = t.components();
            let mut s = String::new();
            writeln!(s, "states: {}", t.num_states()).unwrap();
            writeln!(s, "components: {}", r.components.len()).unwrap();
            for (i, c) in r.components.iter().enumerate() {
                let kind = if r.ergodic.contains(&i) {
                    "ergodic"
                } else {
                    "transient"
                };
                let ids: Vec<String> = c.iter().map(usize::to_string).collect();
                writeln!(s, "component: {i} {kind} {}", ids.join(" ")).unwrap();
            }
            let tr: Vec<String> = r.transient_states.iter().map(usize::to_string).collect();
            writeln!(s, "transient: {}", tr.join(" ")).unwrap();
            writeln!(s, "minimal: {}", r.is_minimal).unwrap();
            print(&s)
        }
        Cmd::Compose { first, second, out } => {
            let t = load_machine(&first, trim)?.compose(&load_machine(&second, trim)?)?;
            emit(&out, codec::save(&t).as_bytes())
        }
        Cmd::Adder { p, out } => emit(&out, codec::save(&Transducer::adder(p)?).as_bytes()),
        Cmd::Plot {
            machine,
            k,
            k_hi,
            mode,
            seed,
            surface,
            budget,
            out,
        } => {
            let t = load_machine(&machine, trim)?;
            let mut set = window(&t, k, k_hi.unwrap_or(k), parse_mode(&mode, seed)?, budget)?;
            set.surface = match surface {
                SurfaceArg::Square => Surface::Square,
                SurfaceArg::Torus => Surface::Torus,
                SurfaceArg::CylinderX => Surface::CylinderX,
                SurfaceArg::CylinderY => Surface::CylinderY,
            };
            emit(&out, to_csv(&set.points).as_bytes())
        }
        Cmd::Monna { machine, k, out } => {
            let t = load_machine(&machine, trim)?;
            emit(&out, to_csv(&monna_points(&t, k)?).as_bytes())
        }
        Cmd::Predict {
            p,
            a,
            b,
            svg,
            points,
            res,
        } => {
            let (a, b) = (padic(&a, p)?, padic(&b, p)?);
            let pred = if a.is_zero() {
                predict_const(&b)
            } else {
                predict_affine(&a, &b)
            }
            .map_err(usage)?;
            let psi = psi_family(&a, &b).map_err(usage)?;
            let phases: Vec<String> = psi.phases.iter().map(fmt_rational).collect();
            print(&format!("{pred}phases: {}\n", phases.join(" ")))?;
            if let (Some(svg), Some(points)) = (svg, points) {
                let set = from_csv(&read(&points)?, p)?;
                let overlays = if a.is_zero() {
                    pred.intercepts
                        .iter()
                        .cloned()
                        .map(CableOverlay::horizontal)
                        .collect()
                } else {
                    pred.overlays()
                };
                plot::write_file(&svg, to_svg(&raster(&set, res)?, &overlays).as_bytes())?;
            }
            Ok(())
        }
        Cmd::Verify {
            machine,
            a,
            b,
            kmin,
            kmax,
            budget,
        } => {
            let t = load_machine(&machine, trim)?;
            let p = t.prime();
            let params = AffineParams::new(&padic(&a, p)?, &padic(&b, p)?).map_err(usage)?;
            let rep = verify_affine(&t, &params, kmin, kmax, budget)?;
            print(&rep.to_string())?;
            if rep.exact_congruence_pass {
                Ok(())
            } else {
                Err(Failure::Check("congruence fails".into()))
            }
        }
        Cmd::Detect {
            points,
            p,
            max_num,
            max_den,
            tol,
        } => {
            let set = from_csv(&read(&points)?, p)?;
            let tol = parse_rational(&tol).map_err(usage)?;
            let found = detect_lines(&set, max_num, max_den, &tol)?;
            let mut s = format!("points: {}\nlines: {}\n", set.len(), found.len());
            for c in &found {
                writeln!(s, "line: {c}").unwrap();
            }
            print(&s)?;
            if found.is_empty() {
                Err(Failure::Check("no set of cables covers the plot".into()))
            } else {
                Ok(())
            }
        }
        Cmd::Vdp {
            machine,
            mmax,
            precision,
            out,
        } => {
            let t = load_machine(&machine, trim)?;
            check_single(&t)?;
            let coeffs = vdp_coeffs(&TransducerOracle::new(&t), mmax, precision).map_err(usage)?;
            let mut s = String::from("m,B_m,b_m\n");
            for c in coeffs {
                writeln!(s, "{},{},{}", c.m, c.big_b, c.b).unwrap();
            }
            emit(&out, s.as_bytes())
        }
        Cmd::Kernel {
            machine,
            depth,
            prefix,
            cap,
        } => {
            let t = load_machine(&machine, trim)?;
            check_single(&t)?;
            let p = t.prime() as u64;
            let span = p
                .checked_pow(depth + 1)
                .and_then(|w| w.checked_mul(prefix as u64))
                .filter(|&n| n <= 1 << 26)
                .ok_or_else(|| usage("depth and prefix need more than 2^26 coefficients"))?;
            let o = TransducerOracle::new(&t);
            let seq = o.b_sequence(span).expect("machine coefficients are exact");
            let report = kernel_probe(|m| seq.symbols[m as usize], t.prime(), depth, prefix, cap)
                .map_err(usage)?;
            let cs = coeffset_probe(&o, prefix as u64, 64).map_err(usage)?;
            print(&format!(
                "{report}coefficients_below_prefix: {}\n",
                cs.values.len()
            ))
        }
        Cmd::Squaring { p, mmax } => {
            let rows = squaring_growth(mmax, p)?;
            let s: String = rows.iter().map(|(j, n)| format!("{j},{n}\n")).collect();
            print(&format!("j,count\n{s}"))
        }
        Cmd::Export {
            points,
            p,
            format,
            res,
            a,
            b,
            out,
        } => {
            let set = from_csv(&read(&points)?, p)?;
            let data = match format {
                Format::Csv => to_csv(&set.points).into_bytes(),
                Format::Pgm => raster(&set, res)?.to_pgm(),
                Format::Svg => {
                    let overlays = match b {
                        Some(b) => {
                            let a = padic(a.as_deref().unwrap_or("0"), p)?;
                            predict_affine(&a, &padic(&b, p)?)
                                .map_err(usage)?
                                .overlays()
                        }
                        None => vec![],
                    };
                    to_svg(&raster(&set, res)?, &overlays).into_bytes()
                }
                Format::Torus3d => {
                    let mut s = String::from("x,y,z\n");
                    for [x, y, z] in torus3d(&to_unit(&set), 2.0, 1.0)? {
                        writeln!(s, "{x},{y},{z}").unwrap();
                    }
                    s.into_bytes()
                }
            };
            Ok(plot::write_file(&out, &data)?)
        }
    }
}

fn check_single(t: &Transducer) -> Res<()> {
    if t.in_arity() == 1 && t.out_arity() == 1 {
        Ok(())
    } else {
        Err(usage("coefficients need a 1-input 1-output machine"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(if code == 0 { 0 } else { 2 });
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: --jobs: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.cmd, !cli.no_trim) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Check(m) | Failure::Usage(m) | Failure::Io(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
