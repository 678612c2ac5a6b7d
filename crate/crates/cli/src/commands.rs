//! The four subcommands.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, ensure, Context, Result};
use tgkt_core::linalg::SpdOperator;
use tgkt_core::problems::{
    build_blur, build_covariance_m, build_reg_d, gen_noise, metrics, multi_squeeze, multi_twist,
    phantoms, BlurSpec, NoiseSample, NoiseSpec,
};
use tgkt_core::tikhonov::{wg_tgkt_p, wgg_tgkt, wtgkt_p, DiscrepancyConfig, Solution};
use tgkt_core::{Matrix, Tensor3, TensorOperator};

use crate::config::{MethodName, Phantom, RegName, Settings, VariantName};
use crate::formats::{read_image, read_t3b, write_pgm, write_ppm, write_t3b, ImageKind, Meta};
use crate::report::{write_csv, ReportRow};

pub const DEGRADED_FILE: &str = "degraded.t3b";
pub const TRUTH_FILE: &str = "truth.t3b";
pub const META_FILE: &str = "meta.txt";
pub const REPORT_FILE: &str = "report.csv";
pub const RESTORED_STEM: &str = "restored";

/// Test images: `frames` square matrices of one size.
#[derive(Clone, Debug)]
pub struct Source {
    pub kind: ImageKind,
    pub frames: Vec<Matrix>,
}

impl Source {
    pub fn size(&self) -> usize {
        self.frames[0].rows()
    }
}

pub fn phantom_source(phantom: Phantom, size: usize, frames: usize) -> Source {
    match phantom {
        Phantom::RgbBlobs => Source {
            kind: ImageKind::Rgb,
            frames: phantoms::rgb_blobs(size).to_vec(),
        },
        Phantom::SheppLogan => Source {
            kind: ImageKind::Gray,
            frames: vec![phantoms::shepp_logan(size)],
        },
        Phantom::MovingDisk => Source {
            kind: ImageKind::Gray,
            frames: phantoms::moving_disk(size, frames),
        },
    }
}

pub fn load_source(s: &Settings) -> Result<Source> {
    let src = if !s.inputs.is_empty() {
        let mut kinds = Vec::new();
        let mut frames = Vec::new();
        for p in &s.inputs {
            let (kind, f) = read_image(p)?;
            kinds.push(kind);
            frames.extend(f);
        }
        let kind = match kinds.as_slice() {
            [ImageKind::Rgb] => ImageKind::Rgb,
            k if k.iter().all(|&k| k == ImageKind::Gray) => ImageKind::Gray,
            _ => bail!("an RGB image must be the only input"),
        };
        Source { kind, frames }
    } else if let Some(ph) = s.phantom {
        phantom_source(ph, s.size, s.frames)
    } else {
        bail!("no input images and no phantom given");
    };
    let n = src.size();
    ensure!(
        src.frames.iter().all(|f| f.rows() == n && f.cols() == n),
        "all frames must be square and of equal size"
    );
    Ok(src)
}

pub fn regularizer(reg: RegName, n: usize, alpha: f64) -> Result<SpdOperator> {
    Ok(match reg {
        RegName::Identity => SpdOperator::identity(n, n),
        RegName::D1 => build_reg_d(n, n, 1.0, alpha)?,
        RegName::D2 => build_reg_d(n, n, 2.0, alpha)?,
    })
}

/// Blurred data `B_true = A * X_true` together with the operators.
pub struct Experiment {
    pub a: TensorOperator,
    pub m: SpdOperator,
    pub x_true: Tensor3,
    pub b_true: Tensor3,
}

pub fn experiment(spec: &BlurSpec, omega: f64, src: &Source) -> Result<Experiment> {
    let a = TensorOperator::new(build_blur(spec)?);
    let x_true = multi_twist(&src.frames)?;
    let b_true = a.apply(&x_true)?;
    let m = build_covariance_m(spec.n, spec.n, omega)?;
    Ok(Experiment { a, m, x_true, b_true })
}

pub fn add_noise(exp: &Experiment, level: f64, seed: u64) -> Result<(Tensor3, NoiseSample)> {
    let noise = gen_noise(&exp.b_true, &exp.m, &NoiseSpec { noise_level: level, seed })?;
    let b = exp.b_true.add(&noise.e)?;
    Ok((b, noise))
}

fn out_dir(s: &Settings) -> Result<&Path> {
    let dir = s.out.as_deref().context("an output directory (--out) is required")?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

pub struct SynthOutput {
    pub degraded: Tensor3,
    pub truth: Tensor3,
    pub meta: Meta,
}

pub fn synth(s: &Settings) -> Result<SynthOutput> {
    let src = load_source(s)?;
    let n = src.size();
    let exp = experiment(&s.blur_spec(n), s.omega, &src)?;
    let (b, noise) = add_noise(&exp, s.noise_level, s.seed)?;
    let mut meta = Meta::default();
    meta.set("kind", src.kind.as_str());
    meta.set("size", n);
    meta.set("frames", src.frames.len());
    meta.set("noise_level", s.noise_level);
    meta.set("delta", noise.delta);
    for (j, d) in noise.slice_deltas.iter().enumerate() {
        meta.set(&format!("delta.{j}"), d);
    }
    meta.set("seed", s.seed);
    meta.set("omega", s.omega);
    meta.set("sigma", s.blur.sigma);
    meta.set("band", s.blur.band);
    meta.set("variant", s.blur.variant.as_str());
    let dir = out_dir(s)?;
    write_t3b(&dir.join(DEGRADED_FILE), &b)?;
    write_t3b(&dir.join(TRUTH_FILE), &exp.x_true)?;
    meta.write(&dir.join(META_FILE))?;
    Ok(SynthOutput {
        degraded: b,
        truth: exp.x_true,
        meta,
    })
}

/// Noise bounds for one solve: the whole block and each lateral slice.
#[derive(Clone, Debug, PartialEq)]
pub struct Deltas {
    pub total: f64,
    pub slices: Vec<f64>,
}

pub struct RunOutput {
    /// Restored block; failed slices are left zero. `None` when the
    /// block method failed.
    pub x: Option<Tensor3>,
    pub rows: Vec<ReportRow>,
    pub solution: Option<Solution>,
}

#[allow(clippy::too_many_arguments)]
pub fn run_method(
    method: MethodName,
    reg: RegName,
    exp_a: &TensorOperator,
    m: &SpdOperator,
    l: &SpdOperator,
    b: &Tensor3,
    deltas: &Deltas,
    cfg: &DiscrepancyConfig,
    noise_level: f64,
    truth: Option<&Tensor3>,
) -> Result<RunOutput> {
    let row = |slice: Option<usize>| ReportRow {
        method: method.as_str().to_string(),
        reg: reg.as_str().to_string(),
        noise_level,
        slice,
        k: None,
        mu: None,
        discrepancy: None,
        psnr: None,
        relerr: None,
        elapsed: None,
    };
    let quality = |x: &Tensor3, t: Option<Tensor3>| -> Result<(Option<f64>, Option<f64>)> {
        match t {
            Some(t) => {
                let q = metrics(x, &t)?;
                Ok((Some(q.psnr), Some(q.relative_error)))
            }
            None => Ok((None, None)),
        }
    };
    let cfg = DiscrepancyConfig {
        allow_partial: true,
        ..cfg.clone()
    };
    let result = match method {
        MethodName::WtgktP => wtgkt_p(exp_a, b, l, m, &deltas.slices, &cfg),
        MethodName::WgTgktP => wg_tgkt_p(exp_a, b, l, m, &deltas.slices, &cfg),
        MethodName::WggTgkt => wgg_tgkt(exp_a, b, l, m, deltas.total, &cfg),
    };
    let sol = match result {
        Ok(sol) => sol,
        Err(e) => {
            eprintln!("{} with L={}: {e}", method.as_str(), reg.as_str());
            let slices: Vec<Option<usize>> = match method {
                MethodName::WggTgkt => vec![None],
                _ => (0..b.cols()).map(Some).collect(),
            };
            return Ok(RunOutput {
                x: None,
                rows: slices.into_iter().map(row).collect(),
                solution: None,
            });
        }
    };
    let mut rows = Vec::new();
    for rep in &sol.report.slices {
        let mut r = row(rep.slice);
        r.elapsed = Some(rep.elapsed);
        if let Some(err) = &rep.error {
            eprintln!(
                "{} with L={}, slice {}: {err}",
                method.as_str(),
                reg.as_str(),
                rep.slice.unwrap_or(0)
            );
            rows.push(r);
            continue;
        }
        r.k = Some(rep.k);
        r.mu = Some(rep.mu);
        r.discrepancy = Some(rep.discrepancy);
        let (psnr, relerr) = match rep.slice {
            Some(j) => quality(&sol.x.lateral_slice(j), truth.map(|t| t.lateral_slice(j)))?,
            None => quality(&sol.x, truth.cloned())?,
        };
        r.psnr = psnr;
        r.relerr = relerr;
        rows.push(r);
    }
    Ok(RunOutput {
        x: Some(sol.x.clone()),
        rows,
        solution: Some(sol),
    })
}

/// Writes `stem.ppm` for an RGB triple, `stem.pgm` for one frame and
/// numbered `stem_000.pgm, ...` otherwise. Returns the paths written.
pub fn write_frames(dir: &Path, stem: &str, kind: ImageKind, frames: &[Matrix]) -> Result<Vec<PathBuf>> {
    if kind == ImageKind::Rgb && frames.len() == 3 {
        let p = dir.join(format!("{stem}.ppm"));
        write_ppm(&p, frames)?;
        return Ok(vec![p]);
    }
    if frames.len() == 1 {
        let p = dir.join(format!("{stem}.pgm"));
        write_pgm(&p, &frames[0])?;
        return Ok(vec![p]);
    }
    let mut out = Vec::new();
    for (j, f) in frames.iter().enumerate() {
        let p = dir.join(format!("{stem}_{j:03}.pgm"));
        write_pgm(&p, f)?;
        out.push(p);
    }
    Ok(out)
}

pub struct DeblurOutput {
    pub run: RunOutput,
    pub report: PathBuf,
    pub images: Vec<PathBuf>,
}

pub fn deblur(s: &Settings) -> Result<DeblurOutput> {
    let [dir] = s.inputs.as_slice() else {
        bail!("deblur takes exactly one input: a synth output directory");
    };
    let meta = Meta::read(&dir.join(META_FILE))?;
    let b = read_t3b(&dir.join(DEGRADED_FILE))?;
    let n: usize = meta.parse_value("size")?;
    let p: usize = meta.parse_value("frames")?;
    ensure!(
        b.dims() == (n, p, n),
        "degraded data is {:?}, metadata says {n}x{p}x{n}",
        b.dims()
    );
    let truth_path = s.truth.clone().or_else(|| {
        let t = dir.join(TRUTH_FILE);
        t.exists().then_some(t)
    });
    let truth = truth_path.as_deref().map(read_t3b).transpose()?;
    if let Some(t) = &truth {
        ensure!(t.dims() == b.dims(), "truth {:?} does not match data {:?}", t.dims(), b.dims());
    }
    let deltas = match s.delta {
        Some(d) => Deltas {
            total: d,
            slices: vec![d; p],
        },
        None => Deltas {
            total: meta.parse_value("delta")?,
            slices: (0..p)
                .map(|j| meta.parse_value(&format!("delta.{j}")))
                .collect::<Result<_>>()?,
        },
    };
    if !(deltas.total > 0.0) || deltas.slices.iter().any(|d| !(*d > 0.0)) {
        bail!("recorded noise bound is zero; pass --delta");
    }
    let spec = BlurSpec {
        n,
        sigma: meta.parse_value("sigma")?,
        band: meta.parse_value("band")?,
        variant: VariantName::parse(meta.require("variant")?)?.into(),
    };
    let a = TensorOperator::new(build_blur(&spec)?);
    let m = build_covariance_m(n, n, meta.parse_value("omega")?)?;
    let l = regularizer(s.reg, n, s.alpha)?;
    let noise_level: f64 = meta.parse_value("noise_level")?;
    let run = run_method(
        s.method,
        s.reg,
        &a,
        &m,
        &l,
        &b,
        &deltas,
        &s.discrepancy,
        noise_level,
        truth.as_ref(),
    )?;
    let out = out_dir(s)?;
    let report = s.report.clone().unwrap_or_else(|| out.join(REPORT_FILE));
    write_csv(&report, &run.rows, s.timing)?;
    let mut images = Vec::new();
    if let Some(x) = &run.x {
        write_t3b(&out.join(format!("{RESTORED_STEM}.t3b")), x)?;
        let kind = ImageKind::parse(meta.require("kind")?)?;
        images = write_frames(out, RESTORED_STEM, kind, &multi_squeeze(x))?;
    }
    let failed = run.rows.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        bail!(
            "{failed} of {} solves failed; see {}",
            run.rows.len(),
            report.display()
        );
    }
    Ok(DeblurOutput {
        run,
        report,
        images,
    })
}

/// Sweeps noise level (outer), method, then regularizer, on one set of
/// test images. Failed cells are reported and the sweep goes on.
pub fn bench(s: &Settings) -> Result<Vec<ReportRow>> {
    let src = load_source(s)?;
    let n = src.size();
    let exp = experiment(&s.blur_spec(n), s.omega, &src)?;
    let regs: Vec<(RegName, SpdOperator)> = s
        .bench_regs
        .iter()
        .map(|&r| Ok((r, regularizer(r, n, s.alpha)?)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &level in &s.bench_levels {
        let (b, noise) = add_noise(&exp, level, s.seed)?;
        let deltas = Deltas {
            total: noise.delta,
            slices: noise.slice_deltas.clone(),
        };
        for &method in &s.bench_methods {
            for (reg, l) in &regs {
                let run = run_method(
                    method,
                    *reg,
                    &exp.a,
                    &exp.m,
                    l,
                    &b,
                    &deltas,
                    &s.discrepancy,
                    level,
                    Some(&exp.x_true),
                )?;
                rows.extend(run.rows);
            }
        }
    }
    let report = match (&s.report, &s.out) {
        (Some(r), _) => r.clone(),
        (None, Some(_)) => out_dir(s)?.join(REPORT_FILE),
        (None, None) => bail!("bench needs --report or --out"),
    };
    write_csv(&report, &rows, s.timing)?;
    Ok(rows)
}

fn extension(p: &Path) -> String {
    p.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// PGM/PPM to T3B (all inputs become lateral slices of one tensor) or
/// T3B to PGM/PPM. Returns the files written.
pub fn convert(inputs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    ensure!(!inputs.is_empty(), "convert needs at least one input");
    let out_ext = extension(out);
    if inputs.iter().all(|p| matches!(extension(p).as_str(), "pgm" | "ppm")) {
        ensure!(out_ext == "t3b", "images convert to a .t3b file");
        let mut frames = Vec::new();
        for p in inputs {
            frames.extend(read_image(p)?.1);
        }
        write_t3b(out, &multi_twist(&frames)?)?;
        return Ok(vec![out.to_path_buf()]);
    }
    let [input] = inputs else {
        bail!("convert takes either image files or a single .t3b file");
    };
    ensure!(extension(input) == "t3b", "unrecognized input {}", input.display());
    let frames = multi_squeeze(&read_t3b(input)?);
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .context("output needs a file name")?;
    let kind = match out_ext.as_str() {
        "ppm" => {
            ensure!(frames.len() == 3, "a PPM needs 3 lateral slices, got {}", frames.len());
            ImageKind::Rgb
        }
        "pgm" => ImageKind::Gray,
        _ => bail!("a .t3b file converts to .pgm or .ppm"),
    };
    write_frames(dir, stem, kind, &frames)
}

/// Total wall time of a run, or zero when it failed.
pub fn wall_time(run: &RunOutput) -> Duration {
    run.solution
        .as_ref()
        .map_or(Duration::ZERO, |s| s.report.wall_time)
}
