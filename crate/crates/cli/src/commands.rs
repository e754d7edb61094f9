use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use fovkit::coils::{coil_decompositions, coil_set_from_sensitivities};
use fovkit::io::{
    centered, kspace_from_raster, kspace_to_raster, load_cfov, load_mask, load_pattern, save_cfov, save_mask, save_pattern, save_pgm,
    Raster,
};
use fovkit::{
    burden, decompose, metrics, recon_direct, recon_direct_parallel, reduced_pattern, render_phantom, roemer_combine, simulate_kspace,
    solve_lsqr, solve_parallel, solve_pocs, CoilSet, Complex64, ComplexImage, Decomposition, ForwardModel, KSpaceData, PhantomSpec,
    SamplingPattern, StopReason, SupportMask,
};
use serde::Serialize;

use crate::{CoilArgs, Command, Method};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Json(serde_json::Error),
    Lib(fovkit::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use fovkit::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Json(_) => 3,
            CliError::Lib(e) => match e {
                E::InvalidParameter(_) | E::InvalidThreshold(_) | E::MultiCoilNotAllowed => 2,
                E::Io(_)
                | E::Format(_)
                | E::InvalidGrid { .. }
                | E::DimMismatch(..)
                | E::LengthMismatch { .. }
                | E::CoilCountMismatch { .. }
                | E::PatternMismatch(_)
                | E::ShapeOutOfBounds(_)
                | E::OutOfRangeFrequency { .. }
                | E::DuplicateFrequency { .. } => 3,
                E::NonFinite(_) | E::NonDivisorFactor { .. } | E::EmptySupport | E::DegenerateCoils | E::EmptyInput | E::AllZeroImage => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Json(e) => write!(f, "json: {e}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<fovkit::Error> for CliError {
    fn from(e: fovkit::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct PatternReport {
    #[serde(rename = "H_inner")]
    h_inner: usize,
    m: usize,
    burden: f64,
    samples: usize,
    inner_start_row: Option<usize>,
}

#[derive(Serialize)]
struct SimulateReport {
    normalization: f64,
    coils: usize,
    samples: usize,
    noise: f64,
    seed: u64,
}

#[derive(Serialize)]
struct ReconReport {
    method: &'static str,
    iterations: usize,
    residual_history: Vec<f64>,
    stop_reason: Option<StopReason>,
    burden: f64,
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Phantom { spec, out_img, out_mask } => {
            let spec: PhantomSpec = serde_json::from_reader(BufReader::new(File::open(spec)?))?;
            let (img, mask) = render_phantom(&spec)?;
            save_cfov(out_img, &Raster::image(img))?;
            save_mask(out_mask, &mask)?;
        }
        Command::Pattern { mask, out, report, coils } => {
            let support = load_mask(mask)?;
            let decs = match load_coils(&coils)? {
                Some(set) => coil_decompositions(&support, &set)?,
                None => vec![decompose(&support)?],
            };
            let (dec, pattern) = densest(&decs);
            save_pattern(out, &pattern)?;
            if let Some(path) = report {
                let interval = dec.inner_interval;
                write_json(
                    path,
                    &PatternReport {
                        h_inner: interval.height,
                        m: pattern.subsample_factor_m(),
                        burden: burden(&pattern).ratio(),
                        samples: pattern.count(),
                        inner_start_row: (!interval.is_empty()).then_some(interval.start),
                    },
                )?;
            }
        }
        Command::Simulate {
            img,
            pattern,
            coils,
            noise,
            seed,
            out,
            report,
        } => {
            let img = single_image(&load_cfov(img)?, "--img")?;
            let pattern = load_pattern(pattern)?;
            let coils = coils
                .map(|p| coil_set_from_sensitivities(load_cfov(p)?.layers, fovkit::coils::DEFAULT_SUPPORT_THRESHOLD))
                .transpose()?;
            let data = simulate_kspace(&img, &pattern, coils.as_ref(), noise, seed)?;
            save_cfov(out, &kspace_to_raster(&data))?;
            if let Some(path) = report {
                write_json(
                    path,
                    &SimulateReport {
                        normalization: data.normalization(),
                        coils: data.coils(),
                        samples: pattern.count(),
                        noise,
                        seed,
                    },
                )?;
            }
        }
        Command::Recon {
            method,
            data,
            pattern,
            mask,
            coils,
            tol,
            max_iters,
            out,
            report,
        } => {
            let pattern = load_pattern(pattern)?;
            let support = load_mask(mask)?;
            let data = kspace_from_raster(&load_cfov(data)?, &pattern)?;
            let coils = load_coils(&coils)?;
            let (img, rep) = recon(method, &data, &support, coils.as_ref(), tol, max_iters)?;
            save_cfov(out, &Raster::image(img))?;
            if let Some(path) = report {
                write_json(path, &rep)?;
            }
        }
        Command::Combine { imgs, sens, out } => {
            let images = load_cfov(imgs)?;
            if images.is_kspace {
                return Err(CliError::Usage("--imgs must hold images, not k-space".into()));
            }
            let set = coil_set_from_sensitivities(load_cfov(sens)?.layers, fovkit::coils::DEFAULT_SUPPORT_THRESHOLD)?;
            save_cfov(out, &Raster::image(roemer_combine(&images.layers, &set)?))?;
        }
        Command::Compare { a, b, mask, out } => {
            let a = single_image(&load_cfov(a)?, "--a")?;
            let b = single_image(&load_cfov(b)?, "--b")?;
            let mask = mask.map(load_mask).transpose()?;
            write_json(out, &metrics(&a, &b, mask.as_ref())?)?;
        }
        Command::Export { img, out, scale } => {
            if scale.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
                return Err(CliError::Usage("--scale must be positive".into()));
            }
            let raster = load_cfov(img)?;
            let mut view = root_sum_of_squares(&raster.layers);
            if raster.is_kspace {
                view = centered(&view);
            }
            save_pgm(out, &view, scale)?;
        }
    }
    Ok(())
}

fn recon(
    method: Method,
    data: &KSpaceData,
    support: &SupportMask,
    coils: Option<&CoilSet>,
    tol: f64,
    max_iters: usize,
) -> Result<(ComplexImage, ReconReport)> {
    if coils.is_none() && data.coils() > 1 {
        return Err(CliError::Usage(format!("{} coil layers in --data need --coils", data.coils())));
    }
    let mut report = ReconReport {
        method: method.name(),
        iterations: 0,
        residual_history: Vec::new(),
        stop_reason: None,
        burden: burden(data.pattern()).ratio(),
    };
    let pattern = data.pattern().clone();
    let img = match (method, coils) {
        (Method::Direct, None) => recon_direct(data, &decompose(support)?)?,
        (Method::Direct, Some(set)) => recon_direct_parallel(data, &coil_decompositions(support, set)?, set)?,
        (Method::Lsqr, None) => {
            let model = ForwardModel::new(support.clone(), pattern)?;
            let (x, rep) = solve_lsqr(&model, data.coil(0), tol, max_iters)?;
            fill_report(&mut report, rep);
            support.scatter(&x)?
        }
        (Method::Lsqr, Some(set)) => {
            let model = ForwardModel::with_coils(support.clone(), pattern, set)?;
            let (x, rep) = solve_parallel(&model, data.samples(), tol, max_iters)?;
            fill_report(&mut report, rep);
            support.scatter(&x)?
        }
        (Method::Pocs, None) => {
            let (x, rep) = solve_pocs(support, &pattern, data.coil(0), tol, max_iters)?;
            fill_report(&mut report, rep);
            x
        }
        (Method::Pocs, Some(_)) => return Err(CliError::Usage("pocs is single-coil only".into())),
    };
    Ok((img, report))
}

fn fill_report(report: &mut ReconReport, rep: fovkit::SolveReport) {
    report.iterations = rep.iterations;
    report.residual_history = rep.residual_history;
    report.stop_reason = Some(rep.stop_reason);
}

fn load_coils(args: &CoilArgs) -> Result<Option<CoilSet>> {
    let Some(path) = &args.coils else {
        return Ok(None);
    };
    let raster = load_cfov(path)?;
    if raster.is_kspace {
        return Err(CliError::Usage("--coils must hold sensitivity images".into()));
    }
    Ok(Some(coil_set_from_sensitivities(raster.layers, args.theta)?))
}

// Densest reduced pattern, ties to the first coil.
fn densest(decs: &[Decomposition]) -> (&Decomposition, SamplingPattern) {
    let mut best = (&decs[0], reduced_pattern(&decs[0]));
    for d in &decs[1..] {
        let p = reduced_pattern(d);
        if p.count() > best.1.count() {
            best = (d, p);
        }
    }
    best
}

fn single_image(raster: &Raster, flag: &str) -> Result<ComplexImage> {
    if raster.is_kspace || raster.layers.len() != 1 {
        return Err(CliError::Lib(fovkit::Error::Format(format!("{flag} must be a single-layer image"))));
    }
    Ok(raster.layers[0].clone())
}

fn root_sum_of_squares(layers: &[ComplexImage]) -> ComplexImage {
    if layers.len() == 1 {
        return layers[0].clone();
    }
    let dims = layers[0].dims();
    ComplexImage::from_fn(dims, |r, c| {
        Complex64::new(layers.iter().map(|l| l.get(r, c).norm_sqr()).sum::<f64>().sqrt(), 0.0)
    })
}

fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
