//! Run settings: command-line flags over a TOML file over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;
use tgkt_core::krylov::BidiagOptions;
use tgkt_core::problems::BlurVariant;
use tgkt_core::tikhonov::DiscrepancyConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    /// Tensor method, one lateral slice at a time.
    WtgktP,
    /// Global method, one lateral slice at a time.
    WgTgktP,
    /// Global method on the whole block.
    WggTgkt,
}

impl MethodName {
    pub const ALL: [MethodName; 3] = [MethodName::WtgktP, MethodName::WgTgktP, MethodName::WggTgkt];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::WtgktP => "wtgkt-p",
            MethodName::WgTgktP => "wg-tgkt-p",
            MethodName::WggTgkt => "wgg-tgkt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegName {
    Identity,
    /// Second-difference regularizer with corner entries 1.
    D1,
    /// Second-difference regularizer with corner entries 2.
    D2,
}

impl RegName {
    pub fn as_str(self) -> &'static str {
        match self {
            RegName::Identity => "identity",
            RegName::D1 => "d1",
            RegName::D2 => "d2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantName {
    #[value(alias = "example1")]
    #[serde(alias = "example1")]
    Symmetric,
    #[value(alias = "example2")]
    #[serde(alias = "example2")]
    Circulant,
}

impl VariantName {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantName::Symmetric => "symmetric",
            VariantName::Circulant => "circulant",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true).map_err(|e| anyhow::anyhow!("blur variant: {e}"))
    }
}

impl From<VariantName> for BlurVariant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::Symmetric => BlurVariant::Symmetric,
            VariantName::Circulant => BlurVariant::Circulant,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phantom {
    /// Three smooth color channels.
    RgbBlobs,
    SheppLogan,
    /// A disk drifting across `frames` gray frames.
    MovingDisk,
}

/// Flags shared by `synth`, `deblur` and `bench`. Every flag also has a
/// config-file key; unset flags fall through to the file, then defaults.
#[derive(Args, Clone, Debug, Default)]
pub struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    #[arg(long, value_enum)]
    pub reg: Option<RegName>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Relative noise level `‖E‖_{M⁻¹} / ‖B_true‖_F`.
    #[arg(long)]
    pub noise_level: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub mu_lo: Option<f64>,
    #[arg(long)]
    pub mu_hi: Option<f64>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub k_init: Option<usize>,
    #[arg(long)]
    pub reorthogonalize: bool,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub band: Option<usize>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantName>,
    /// Input images (`synth`, `bench`) or a `synth` output directory (`deblur`).
    #[arg(long = "input", num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Built-in test image used when no input is given.
    #[arg(long, value_enum)]
    pub phantom: Option<Phantom>,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    /// Noise bound used instead of the one recorded by `synth`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Write `NA` for timings so reports are byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Vec<MethodName>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub regs: Vec<RegName>,
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    method: Option<MethodName>,
    reg: Option<RegName>,
    alpha: Option<f64>,
    delta: Option<f64>,
    no_timing: Option<bool>,
    #[serde(default)]
    noise: NoiseSection,
    #[serde(default)]
    discrepancy: DiscrepancySection,
    #[serde(default)]
    blur: BlurSection,
    #[serde(default)]
    paths: PathsSection,
    #[serde(default)]
    source: SourceSection,
    #[serde(default)]
    bench: BenchSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct NoiseSection {
    level: Option<f64>,
    omega: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct DiscrepancySection {
    eta: Option<f64>,
    mu_lo: Option<f64>,
    mu_hi: Option<f64>,
    k_max: Option<usize>,
    k_init: Option<usize>,
    reorthogonalize: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct BlurSection {
    sigma: Option<f64>,
    band: Option<usize>,
    variant: Option<VariantName>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct PathsSection {
    input: Option<Vec<PathBuf>>,
    out: Option<PathBuf>,
    truth: Option<PathBuf>,
    report: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct SourceSection {
    phantom: Option<Phantom>,
    size: Option<usize>,
    frames: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct BenchSection {
    methods: Option<Vec<MethodName>>,
    regs: Option<Vec<RegName>>,
    levels: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlurParams {
    pub sigma: f64,
    pub band: usize,
    pub variant: VariantName,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub method: MethodName,
    pub reg: RegName,
    pub alpha: f64,
    pub noise_level: f64,
    pub omega: f64,
    pub seed: u64,
    pub discrepancy: DiscrepancyConfig,
    pub blur: BlurParams,
    pub inputs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub phantom: Option<Phantom>,
    pub size: usize,
    pub frames: usize,
    pub delta: Option<f64>,
    pub timing: bool,
    pub bench_methods: Vec<MethodName>,
    pub bench_regs: Vec<RegName>,
    pub bench_levels: Vec<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            method: MethodName::WggTgkt,
            reg: RegName::D1,
            alpha: 3.0,
            noise_level: 1e-3,
            omega: 0.2,
            seed: 1,
            discrepancy: DiscrepancyConfig::default(),
            blur: BlurParams {
                sigma: 3.0,
                band: 12,
                variant: VariantName::Symmetric,
            },
            inputs: Vec::new(),
            out: None,
            truth: None,
            report: None,
            phantom: None,
            size: 64,
            frames: 4,
            delta: None,
            timing: true,
            bench_methods: MethodName::ALL.to_vec(),
            bench_regs: vec![RegName::Identity, RegName::D1],
            bench_levels: vec![1e-3, 1e-2],
        }
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn nonempty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

impl Settings {
    /// Flags win over the config file, which wins over the defaults.
    pub fn resolve(args: &RunArgs) -> Result<Settings> {
        let file = match &args.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let d = Settings::default();
        let dc = d.discrepancy.clone();
        let a = args.clone();
        let discrepancy = DiscrepancyConfig {
            eta: a.eta.or(file.discrepancy.eta).unwrap_or(dc.eta),
            mu_lo: a.mu_lo.or(file.discrepancy.mu_lo).unwrap_or(dc.mu_lo),
            mu_hi: a.mu_hi.or(file.discrepancy.mu_hi).unwrap_or(dc.mu_hi),
            k_max: a.k_max.or(file.discrepancy.k_max).unwrap_or(dc.k_max),
            k_init: a.k_init.or(file.discrepancy.k_init).unwrap_or(dc.k_init),
            bidiag: BidiagOptions {
                reorthogonalize: a.reorthogonalize
                    || file.discrepancy.reorthogonalize.unwrap_or(false),
                ..dc.bidiag
            },
            ..dc
        };
        let s = Settings {
            method: a.method.or(file.method).unwrap_or(d.method),
            reg: a.reg.or(file.reg).unwrap_or(d.reg),
            alpha: a.alpha.or(file.alpha).unwrap_or(d.alpha),
            noise_level: a.noise_level.or(file.noise.level).unwrap_or(d.noise_level),
            omega: a.omega.or(file.noise.omega).unwrap_or(d.omega),
            seed: a.seed.or(file.noise.seed).unwrap_or(d.seed),
            discrepancy,
            blur: BlurParams {
                sigma: a.sigma.or(file.blur.sigma).unwrap_or(d.blur.sigma),
                band: a.band.or(file.blur.band).unwrap_or(d.blur.band),
                variant: a.variant.or(file.blur.variant).unwrap_or(d.blur.variant),
            },
            inputs: nonempty(a.inputs).or(file.paths.input).unwrap_or_default(),
            out: a.out.or(file.paths.out),
            truth: a.truth.or(file.paths.truth),
            report: a.report.or(file.paths.report),
            phantom: a.phantom.or(file.source.phantom),
            size: a.size.or(file.source.size).unwrap_or(d.size),
            frames: a.frames.or(file.source.frames).unwrap_or(d.frames),
            delta: a.delta.or(file.delta),
            timing: !(a.no_timing || file.no_timing.unwrap_or(false)),
            bench_methods: nonempty(a.methods)
                .or(file.bench.methods)
                .unwrap_or(d.bench_methods),
            bench_regs: nonempty(a.regs).or(file.bench.regs).unwrap_or(d.bench_regs),
            bench_levels: nonempty(a.levels)
                .or(file.bench.levels)
                .unwrap_or(d.bench_levels),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.discrepancy.validate()?;
        if !(self.alpha > 0.0) {
            bail!("alpha must be positive, got {}", self.alpha);
        }
        if !(self.omega > 0.0) {
            bail!("omega must be positive, got {}", self.omega);
        }
        if !(self.noise_level >= 0.0) || !self.noise_level.is_finite() {
            bail!("noise level must be nonnegative, got {}", self.noise_level);
        }
        if let Some(l) = self.bench_levels.iter().find(|l| !(**l > 0.0)) {
            bail!("bench noise levels must be positive, got {l}");
        }
        if !(self.blur.sigma > 0.0) || self.blur.band == 0 {
            bail!("blur needs sigma > 0 and band >= 1");
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                bail!("delta must be positive, got {d}");
            }
        }
        if self.size == 0 || self.frames == 0 {
            bail!("phantom size and frame count must be positive");
        }
        Ok(())
    }

    pub fn blur_spec(&self, n: usize) -> tgkt_core::problems::BlurSpec {
        tgkt_core::problems::BlurSpec {
            n,
            sigma: self.blur.sigma,
            band: self.blur.band,
            variant: self.blur.variant.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flag_file_default() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "method = \"wtgkt-p\"\nalpha = 5.0\n[noise]\nomega = 0.3\n[blur]\nvariant = \"example2\"\n",
        )
        .unwrap();
        let args = RunArgs {
            config: Some(path),
            alpha: Some(7.0),
            ..Default::default()
        };
        let s = Settings::resolve(&args).unwrap();
        assert_eq!(s.alpha, 7.0);
        assert_eq!(s.method, MethodName::WtgktP);
        assert_eq!(s.omega, 0.3);
        assert_eq!(s.blur.variant, VariantName::Circulant);
        assert_eq!(s.discrepancy.eta, 1.1);
        assert_eq!(s.discrepancy.mu_lo, 10.0);
        assert_eq!(s.discrepancy.k_init, 2);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "alpah = 2.0\n").unwrap();
        let args = RunArgs {
            config: Some(path.clone()),
            ..Default::default()
        };
        assert!(Settings::resolve(&args).is_err());
        let args = RunArgs {
            eta: Some(0.9),
            ..Default::default()
        };
        assert!(Settings::resolve(&args).is_err());
    }
}
