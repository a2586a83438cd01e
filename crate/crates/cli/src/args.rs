use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// `a:b:n`, inclusive endpoints, `n` samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Range {
    pub fn samples(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.a];
        }
        (0..self.n).map(|k| self.a + (self.b - self.a) * k as f64 / (self.n - 1) as f64).collect()
    }
}

/// A float, or a fraction `p/q`.
pub fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let (p, q): (f64, f64) =
                (p.trim().parse().map_err(|_| bad(s))?, q.trim().parse().map_err(|_| bad(s))?);
            p / q
        }
        None => s.parse().map_err(|_| bad(s))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn bad(s: &str) -> String {
    format!("'{s}' is not a number")
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("range '{s}' is not of the form a:b:n"));
        };
        let (a, b) = (number(a)?, number(b)?);
        let n: usize =
            n.trim().parse().map_err(|_| format!("sample count '{n}' is not a positive integer"))?;
        if n == 0 {
            return Err("sample count must be positive".into());
        }
        if n > 1 && !(a < b) {
            return Err(format!("range '{s}' is not increasing"));
        }
        if n == 1 && a != b {
            return Err(format!("range '{s}' has one sample but distinct endpoints"));
        }
        Ok(Self { a, b, n })
    }
}

/// `lo:hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval(pub f64, pub f64);

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) =
            s.trim().split_once(':').ok_or_else(|| format!("interval '{s}' is not of the form lo:hi"))?;
        let (a, b) = (number(a)?, number(b)?);
        if !(a < b) {
            return Err(format!("interval '{s}' is not increasing"));
        }
        Ok(Self(a, b))
    }
}

/// `rho1_min:rho1_max:rho2_min:rho2_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowArg(pub [f64; 4]);

impl FromStr for WindowArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s.trim().split(':').map(number).collect::<Result<_, _>>()?;
        let [a, b, c, d] = v[..] else {
            return Err(format!("window '{s}' is not of the form a:b:c:d"));
        };
        if !(a < b && c < d) {
            return Err(format!("window '{s}' is not increasing in both axes"));
        }
        Ok(Self([a, b, c, d]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Example1,
    #[value(name = "ag_normal")]
    AgNormal,
    #[value(name = "ag_in")]
    AgIn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Trig,
    Hyper,
    Both,
}

#[derive(Debug, Parser)]
#[command(
    name = "spectral-atlas",
    version,
    about = "Spectral phase portraits of rank-one and rank-two perturbations"
)]
pub struct Cli {
    #[command(flatten)]
    pub source: Source,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Built-in problem.
    #[arg(long, global = true, value_enum, conflicts_with_all = ["spec", "decomposition"])]
    pub preset: Option<PresetName>,
    /// JSON problem spec {"matrix", "f1", "g1", "f2"?, "g2"?}.
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "decomposition")]
    pub spec: Option<PathBuf>,
    /// Decomposition JSON written by `decompose`.
    #[arg(long, global = true, value_name = "FILE")]
    pub decomposition: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Polynomials D, P1, P2, Q with a verification report.
    Decompose,
    /// Constant-eigenvalue curve.
    Curve {
        #[arg(long, allow_hyphen_values = true, value_parser = number)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true, default_value = "-12:2:281")]
        rho2_range: Range,
    },
    /// Envelope of the constant-eigenvalue curves.
    Envelope {
        #[arg(long, allow_hyphen_values = true, default_value = "-4:0:401")]
        lambda_range: Range,
    },
    /// Curves where a pair ±iω is an eigenvalue.
    Hopf {
        #[arg(long, allow_hyphen_values = true, default_value = "0.05:20:400")]
        omega_range: Range,
    },
    /// Triple-eigenvalue points and rejected candidates.
    Triples {
        #[arg(long, allow_hyphen_values = true, default_value = "-100:100")]
        lambda_interval: Interval,
    },
    /// Census labels on a grid of the (rho1, rho2) plane.
    Phase {
        #[arg(long, allow_hyphen_values = true, default_value = "-12:2:-12:2")]
        window: WindowArg,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        grid: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Relative tolerance for calling an eigenvalue real.
        #[arg(long, default_value_t = spectral_atlas::phase::DEFAULT_TOL)]
        tol: f64,
        /// Eigenvalue sweep for the SVG curve overlay.
        #[arg(long, allow_hyphen_values = true, default_value = "-10:10:801")]
        lambda_range: Range,
    },
    /// Oculomotor integrator network (presets ag_normal, ag_in).
    Integrator {
        #[command(subcommand)]
        action: IntegratorCmd,
    },
    /// Continuum integrator.
    Continuum {
        #[command(subcommand)]
        action: ContinuumCmd,
    },
    /// Nonlocal front stability.
    Rs {
        #[command(subcommand)]
        action: RsCmd,
    },
}

#[derive(Debug, Args)]
pub struct OperatingArgs {
    /// Eigenvalue held fixed along the operating curve.
    #[arg(long, allow_hyphen_values = true, value_parser = number, default_value = "-0.05")]
    pub lambda: f64,
    /// Override the curve value of rho1.
    #[arg(long, allow_hyphen_values = true, value_parser = number)]
    pub rho1: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 2e-4)]
    pub dt: f64,
}

#[derive(Debug, Subcommand)]
pub enum IntegratorCmd {
    /// Predicted and simulated gain at one operating point.
    Gain {
        #[arg(long, allow_hyphen_values = true, value_parser = number)]
        rho2: f64,
        #[command(flatten)]
        op: OperatingArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Impulse response time series.
    Impulse {
        #[arg(long, allow_hyphen_values = true, value_parser = number)]
        rho2: f64,
        #[command(flatten)]
        op: OperatingArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Gains along the constant-eigenvalue curve.
    Curve {
        #[arg(long, allow_hyphen_values = true, value_parser = number, default_value = "-0.05")]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true, default_value = "0:1.2:25")]
        rho2_range: Range,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Debug, Args)]
pub struct ContinuumArgs {
    /// Number of discrete neurons the continuum stands for.
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, value_parser = number, default_value = "1/3")]
    pub x1: f64,
    #[arg(long, value_parser = number, default_value = "1/2")]
    pub x2: f64,
}

#[derive(Debug, Subcommand)]
pub enum ContinuumCmd {
    /// Envelope swept in the frequency parameter omega.
    Envelope {
        #[command(flatten)]
        model: ContinuumArgs,
        #[arg(long, value_enum, default_value = "both")]
        branch: BranchArg,
        #[arg(long, allow_hyphen_values = true, default_value = "0.05:40:4000")]
        omega_range: Range,
    },
    /// Sign of rho1/rho2 on the hyper branch over a grid of coupling sites.
    LemmaCheck {
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Sites x = i/(grid+1), i = 1..grid, for both couplings.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long, allow_hyphen_values = true, default_value = "0.1:15:5")]
        omega_range: Range,
    },
}

#[derive(Debug, Args)]
pub struct FrontArgs {
    /// Elliptic modulus of the cubic front.
    #[arg(long, value_parser = number, default_value = "0.5")]
    pub k: f64,
    /// Grid intervals for the discretized operator.
    #[arg(long, default_value_t = 4000)]
    pub n: usize,
}

#[derive(Debug, Subcommand)]
pub enum RsCmd {
    /// Closed-form relevant eigenvalue against the discretized operator.
    Lambda1 {
        #[command(flatten)]
        front: FrontArgs,
    },
    /// Stability index of the cubic front.
    Index {
        #[command(flatten)]
        front: FrontArgs,
    },
    /// Trace stationary solutions of fixed length.
    Family {
        #[arg(long, value_parser = number, default_value = "0.5")]
        k: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.002)]
        ds: f64,
    },
}
