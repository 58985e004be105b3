//! Command-line front end. Each subcommand is a thin adapter over one
//! library call and prints JSON (structures) or CSV (tables, polylines).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multicorn::angles::{count_exact_periodic, multibrot_count, multicorn_count, Angle, MapSign};
use multicorn::atlas::{boundary_trace, find_centers, find_cusps, BoundaryConfig, CenterConfig, ComponentRecord, CuspConfig};
use multicorn::dynamics::MapParams;
use multicorn::parabolic::{
    bifurcation_test, characteristic_point, ecalle_height_with_probe, return_map_index, trace_arc, ArcConfig,
    BifurcationConfig, FatouConfig,
};
use multicorn::rays::{discontinuity_experiment, dynamical_ray, parameter_ray, DiscontinuityConfig, RayConfig};
use multicorn::render::{
    colorize, overlay, render_dynamical_plane, render_parameter_plane, write_image, Coloring, ImageFormat,
    OverlayLayers, RenderConfig, Viewport,
};
use multicorn::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::experiments::{component_with_cusps, resolve_ids, run_experiment};
use crate::manifest::manifest_schema;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "MULTICORN_WORKERS";

/// A complex number written `RE,IM`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexArg(pub Complex64);

impl FromStr for ComplexArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (re, im) = s.split_once(',').unwrap_or((s, "0"));
        let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
        Ok(Self(Complex64::new(p(re)?, p(im)?)))
    }
}

/// An inclusive range `A..B` or a single value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeArg(pub u32, pub u32);

impl FromStr for RangeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let p = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("`{s}`: {e}"));
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (p(a)?, p(b.trim_start_matches('='))?),
            None => (p(s)?, p(s)?),
        };
        if a > b {
            return Err(format!("empty range `{s}`"));
        }
        Ok(Self(a, b))
    }
}

#[derive(Debug, Parser)]
#[command(name = "multicorn", version, about = "Dynamics and parameter spaces of conj(z)^d + c")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Configuration override `key.path=value` (repeatable).
    #[arg(long = "set", global = true)]
    pub overrides: Vec<String>,
    /// Seed of the multistart random number generator.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print the JSON schema of experiment manifests and exit.
    #[arg(long)]
    pub emit_schema: bool,
    /// Print the JSON schema of the configuration file and exit.
    #[arg(long)]
    pub emit_config_schema: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Space {
    Dyn,
    Par,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PlaneKind {
    Param,
    Julia,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ColoringArg {
    Escape,
    Period,
}

#[derive(Debug, Args)]
pub struct ComponentArgs {
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long)]
    pub period: usize,
    /// Component centre `RE,IM`.
    #[arg(long, allow_hyphen_values = true)]
    pub center: ComplexArg,
}

#[derive(Debug, Args)]
pub struct ArcArgs {
    #[command(flatten)]
    pub component: ComponentArgs,
    /// Arc index, counter-clockwise from the cusp of smallest argument.
    #[arg(long, default_value_t = 0)]
    pub arc: usize,
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    /// Directions used to locate the cusps.
    #[arg(long, default_value_t = 96)]
    pub cusp_directions: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CSV table of periodic-angle and component counts.
    Count {
        #[arg(long, default_value = "2..4")]
        degrees: RangeArg,
        #[arg(long, default_value = "1..12")]
        periods: RangeArg,
    },
    /// Centres of all period-K hyperbolic components (JSON).
    Centers {
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long)]
        period: usize,
    },
    /// Boundary samples of one hyperbolic component (JSON).
    Boundary {
        #[command(flatten)]
        component: ComponentArgs,
        #[arg(long, default_value_t = 360)]
        samples: usize,
    },
    /// All parabolic cusps of odd period K (JSON).
    Cusps {
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long)]
        period: usize,
    },
    /// Samples of a parabolic arc with heights and indices (CSV).
    ArcTrace(ArcArgs),
    /// Fixed-point index of the return map at a parabolic point (CSV).
    Index {
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, allow_hyphen_values = true)]
        param: ComplexArg,
        #[arg(long)]
        period: usize,
        /// Parabolic point; the characteristic point when omitted.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<ComplexArg>,
    },
    /// Critical Ecalle height at a parameter on a parabolic arc (CSV).
    EcalleHeight {
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, allow_hyphen_values = true)]
        param: ComplexArg,
        #[arg(long)]
        period: usize,
    },
    /// Arc samples with the bifurcation test applied (CSV).
    BifurcationCheck(ArcArgs),
    /// A dynamical or parameter ray as a CSV polyline.
    Ray {
        #[arg(long, value_enum)]
        space: Space,
        /// Rational angle `P/Q`.
        #[arg(long)]
        angle: Angle,
        /// Parameter `c` (dynamical rays).
        #[arg(long, allow_hyphen_values = true)]
        param: Option<ComplexArg>,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// Smallest potential reached.
        #[arg(long)]
        min_potential: Option<f64>,
    },
    /// Ray-landing discontinuity at a parabolic arc (JSON report).
    Discontinuity {
        #[arg(long, value_delimiter = ',')]
        offsets: Option<Vec<f64>>,
    },
    /// Render the parameter plane or a Julia set.
    Render {
        #[arg(value_enum)]
        plane: PlaneKind,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        center: ComplexArg,
        #[arg(long, default_value_t = 4.4)]
        width: f64,
        /// Image width in pixels.
        #[arg(long, default_value_t = 800)]
        px: usize,
        /// Image height in pixels; square when omitted.
        #[arg(long)]
        py: Option<usize>,
        /// Viewport rotation by powers of `e^{2πi/(d+1)}`.
        #[arg(long, default_value_t = 0)]
        rotation: u32,
        /// Parameter `c` of the Julia set.
        #[arg(long, allow_hyphen_values = true)]
        param: Option<ComplexArg>,
        #[arg(long, value_enum, default_value = "escape")]
        coloring: ColoringArg,
        #[arg(long, default_value_t = 500)]
        max_iter: u32,
        /// JSON file with rays, arcs, curves and points to draw.
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Output image; `.png` or `.ppm`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run experiments E0..E8 (comma-separated) or `all`.
    Experiment {
        id: String,
        /// Directory receiving manifests and artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Error with an exit code: 1 for failed verdicts, 2 for usage errors.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

fn json(value: &impl Serialize) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(fail)
}

/// Sets the global worker pool from the environment or the configuration.
pub fn configure_workers(cfg: &Config) -> Result<(), Failure> {
    let workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|e| fail(format!("{WORKERS_ENV}={v}: {e}")))?),
        Err(_) => cfg.workers,
    };
    if let Some(n) = workers {
        // A second initialisation in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn fmt_row(values: &[String]) -> String {
    values.join(",") + "\n"
}

fn arc_csv(args: &ArcArgs, bifurcation: bool) -> Result<String, Failure> {
    let c = &args.component;
    let comp = component_with_cusps(c.degree, c.period, c.center.0, args.cusp_directions);
    let trace = trace_arc(&comp, args.arc, args.samples, &ArcConfig::default()).map_err(fail)?;
    let bc = BifurcationConfig::default();
    let mut out = String::from("boundary_angle,re_c,im_c,height,re_index,im_index,bifurcates\n");
    for s in &trace.samples {
        let bif = if bifurcation {
            bifurcation_test(s, c.degree, c.period, &bc).is_some().to_string()
        } else {
            String::new()
        };
        out += &fmt_row(&[
            s.boundary_angle.to_string(),
            s.c.re.to_string(),
            s.c.im.to_string(),
            s.ecalle_height.to_string(),
            s.index.re.to_string(),
            s.index.im.to_string(),
            bif,
        ]);
    }
    Ok(out)
}

/// Executes a command, returning its standard output.
pub fn execute(command: &Command, cfg: &Config) -> Result<String, Failure> {
    let seed = cfg.seed();
    match command {
        Command::Count { degrees, periods } => {
            let mut out = String::from("d,k,phi_minus,phi_plus,s,s_star\n");
            for d in degrees.0.max(2)..=degrees.1 {
                for k in periods.0.max(1)..=periods.1 {
                    out += &fmt_row(&[
                        d.to_string(),
                        k.to_string(),
                        count_exact_periodic(d, k, MapSign::Minus).to_string(),
                        count_exact_periodic(d, k, MapSign::Plus).to_string(),
                        multibrot_count(d, k).to_string(),
                        multicorn_count(d, k).to_string(),
                    ]);
                }
            }
            Ok(out)
        }
        Command::Centers { degree, period } => {
            let cc = CenterConfig {
                seed,
                ..CenterConfig::default()
            };
            json(&find_centers(*degree, *period, &cc))
        }
        Command::Boundary { component, samples } => {
            let comp = ComponentRecord::new(component.degree, component.period, component.center.0);
            json(&boundary_trace(&comp, *samples, &BoundaryConfig::default()))
        }
        Command::Cusps { degree, period } => {
            let cc = CuspConfig {
                centers: CenterConfig {
                    seed,
                    ..CenterConfig::default()
                },
                ..CuspConfig::default()
            };
            json(&find_cusps(*degree, *period, &cc).map_err(fail)?)
        }
        Command::ArcTrace(args) => arc_csv(args, false),
        Command::BifurcationCheck(args) => arc_csv(args, true),
        Command::Index {
            degree,
            param,
            period,
            point,
        } => {
            let params = MapParams::new(*degree, param.0).map_err(fail)?;
            let z0 = match point {
                Some(p) => p.0,
                None => characteristic_point(*degree, param.0, *period).map_err(fail)?.z0,
            };
            let est = return_map_index(&params, *period, z0).map_err(fail)?;
            Ok(String::from("re_point,im_point,re_index,im_index,winding,nodes\n")
                + &fmt_row(&[
                    z0.re.to_string(),
                    z0.im.to_string(),
                    est.index.re.to_string(),
                    est.index.im.to_string(),
                    est.winding.to_string(),
                    est.nodes.to_string(),
                ]))
        }
        Command::EcalleHeight { degree, param, period } => {
            let eh = ecalle_height_with_probe(*degree, param.0, *period, None, &FatouConfig::default()).map_err(fail)?;
            Ok(String::from("re_c,im_c,height,re_beta,im_beta\n")
                + &fmt_row(&[
                    param.0.re.to_string(),
                    param.0.im.to_string(),
                    eh.height.to_string(),
                    eh.beta.re.to_string(),
                    eh.beta.im.to_string(),
                ]))
        }
        Command::Ray {
            space,
            angle,
            param,
            degree,
            min_potential,
        } => {
            let mut rc = RayConfig::default();
            let path = match space {
                Space::Dyn => {
                    let c = param.ok_or_else(|| fail("dynamical rays need --param RE,IM"))?;
                    if let Some(p) = min_potential {
                        rc.min_potential = *p;
                    }
                    dynamical_ray(&MapParams::new(*degree, c.0).map_err(fail)?, angle, &rc).map_err(fail)?
                }
                Space::Par => {
                    if let Some(p) = min_potential {
                        rc.parameter_min_potential = *p;
                    }
                    parameter_ray(*degree, angle, &rc).map_err(fail)?
                }
            };
            let mut out = String::from("potential,re,im\n");
            for (g, z) in path.potentials.iter().zip(&path.points) {
                out += &fmt_row(&[g.to_string(), z.re.to_string(), z.im.to_string()]);
            }
            Ok(out)
        }
        Command::Discontinuity { offsets } => {
            let mut dc = DiscontinuityConfig::default();
            if let Some(o) = offsets {
                dc.offsets = o.clone();
            }
            json(&discontinuity_experiment(&dc).map_err(fail)?)
        }
        Command::Render {
            plane,
            degree,
            center,
            width,
            px,
            py,
            rotation,
            param,
            coloring,
            max_iter,
            overlay: overlay_path,
            out,
        } => {
            let mut vp = Viewport::new(center.0, *width, *px, py.unwrap_or(*px)).map_err(fail)?;
            vp.rotation = *rotation;
            let rc = RenderConfig {
                max_iterations: *max_iter,
                coloring: match coloring {
                    ColoringArg::Escape => Coloring::Escape,
                    ColoringArg::Period => Coloring::Period,
                },
                ..RenderConfig::default()
            };
            let grid = match plane {
                PlaneKind::Param => render_parameter_plane(*degree, &vp, &rc),
                PlaneKind::Julia => {
                    let c = param.ok_or_else(|| fail("julia rendering needs --param RE,IM"))?;
                    render_dynamical_plane(&MapParams::new(*degree, c.0).map_err(fail)?, &vp, &rc)
                }
            }
            .map_err(fail)?;
            let mut img = colorize(&grid);
            if let Some(p) = overlay_path {
                let text = std::fs::read_to_string(p).map_err(|e| fail(format!("{}: {e}", p.display())))?;
                let layers: OverlayLayers = serde_json::from_str(&text).map_err(|e| fail(format!("{}: {e}", p.display())))?;
                img = overlay(&img, &vp, *degree, &layers);
            }
            let format = ImageFormat::from_path(out).ok_or_else(|| fail("output must end in .png or .ppm"))?;
            write_image(&img, out, format).map_err(fail)?;
            Ok(String::new())
        }
        Command::Experiment { id, out } => run_experiments(id, cfg, out.as_deref().or(cfg.output_dir.as_deref())),
    }
}

/// Runs experiments and prints one verdict line per criterion; fails with
/// exit code 1 unless every verdict passes.
fn run_experiments(list: &str, cfg: &Config, out: Option<&Path>) -> Result<String, Failure> {
    let ids = resolve_ids(list).map_err(fail)?;
    let mut text = String::new();
    let mut all = true;
    for id in ids {
        let m = run_experiment(&id, cfg, out).map_err(fail)?;
        for v in &m.verdicts {
            let line = format!(
                "{} {} {}: measured {} (threshold {})\n",
                m.id,
                if v.passed { "PASS" } else { "FAIL" },
                v.criterion,
                v.measured,
                v.threshold
            );
            print!("{line}");
            let _ = std::io::stdout().flush();
            text += &line;
        }
        for e in &m.errors {
            eprintln!("{} error: {e}", m.id);
        }
        all &= m.passed;
    }
    if all {
        Ok(String::new())
    } else {
        Err(Failure {
            code: 1,
            message: "some verdicts failed".into(),
        })
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.emit_schema || cli.emit_config_schema {
        let schema = if cli.emit_schema {
            manifest_schema()
        } else {
            serde_json::to_value(schemars::schema_for!(Config)).expect("schema serialises")
        };
        println!("{}", serde_json::to_string_pretty(&schema).expect("schema serialises"));
        return 0;
    }
    let mut cfg = match Config::load(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config: {e}");
            return 2;
        }
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let Some(command) = &cli.command else {
        eprintln!("error: no subcommand given (see --help)");
        return 2;
    };
    let result = configure_workers(&cfg).and_then(|_| execute(command, &cfg));
    match result {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
