use anyhow::Context;
use bosonkit::detector::CondProbTable;
use bosonkit::ideal::ideal_distribution;
use bosonkit::interferometer::{
    dft_unitary, haar_random_unitary, matrix_from_json, matrix_to_json, UNITARITY_TOL,
};
use bosonkit::limits::size_cap;
use bosonkit::realistic::{correction_csv, correction_sweep, realistic_distribution};
use bosonkit::sampling::{postselect, sample, sample_through_detectors};
use bosonkit::{DetectorModel, Error, OutcomeDistribution, QuadratureSpec};

use crate::args::{CorrectionArgs, DetectorKind, DistArgs, Format, PkmArgs, SampleArgs, UnitaryArgs};
use crate::config::{parse_sweep, parse_unitary, resolve, resolve_detector};
use crate::output::{emit, fmt_num, round_json, to_json};
use crate::UsageError;

pub const DEFAULT_TRIALS: u64 = 100_000;

pub fn unitary(args: &UnitaryArgs) -> anyhow::Result<()> {
    if let Some(path) = &args.validate {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m = matrix_from_json(&text)?;
        let residual = m.unitarity_residual()?;
        println!("residual {} (tolerance {})", fmt_num(residual), fmt_num(UNITARITY_TOL));
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary {
                residual,
                tol: UNITARITY_TOL,
            }
            .into());
        }
        return Ok(());
    }
    let u = match (args.dft, args.haar, &args.spec) {
        (Some(n), _, _) => dft_unitary(n)?,
        (_, Some(n), _) => haar_random_unitary(n, args.seed)?,
        (_, _, Some(spec)) => parse_unitary(spec)?,
        _ => unreachable!("clap requires one source"),
    };
    eprintln!("residual {}", fmt_num(u.matrix().unitarity_residual()?));
    let mut text = matrix_to_json(u.matrix());
    text.push('\n');
    emit(&text, args.out.as_deref())
}

fn distribution_text(d: &OutcomeDistribution, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => round_json(&d.to_json()),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["pattern", "p"])?;
            for (k, p) in d.iter() {
                w.write_record([k.to_string(), fmt_num(p)])?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
    }
}

fn exact_distribution(
    u: &bosonkit::UnitaryMatrix,
    input: &bosonkit::Pattern,
    model: &DetectorModel,
) -> anyhow::Result<OutcomeDistribution> {
    Ok(match model {
        DetectorModel::IdealPnr => ideal_distribution(u, input)?,
        m => realistic_distribution(u, input, m)?,
    })
}

pub fn dist(args: &DistArgs) -> anyhow::Result<()> {
    if let Some(path) = &args.from {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let d = OutcomeDistribution::from_json(&text)?;
        let format = args.experiment.format.unwrap_or(Format::Json);
        return emit(&distribution_text(&d, format)?, args.experiment.out.as_deref());
    }
    let exp = resolve(&args.experiment)?;
    let mut d = exact_distribution(&exp.unitary, &exp.input, &exp.model)?;
    eprintln!("normalization residual {}", fmt_num(d.sum() - 1.0));
    if let Some(threshold) = args.prune {
        d = d.pruned(threshold);
    }
    emit(&distribution_text(&d, exp.format)?, exp.out.as_deref())
}

pub fn correction(args: &CorrectionArgs) -> anyhow::Result<()> {
    let cap = size_cap();
    if args.n > cap {
        return Err(Error::SizeCap { size: args.n, cap }.into());
    }
    let base = resolve_detector(&args.detector, None)?;
    let models: Vec<DetectorModel> = match &args.sweep {
        None => vec![base],
        Some(spec) => parse_sweep(spec)?
            .into_iter()
            .map(|x| swept(&base, x))
            .collect::<anyhow::Result<_>>()?,
    };
    for m in &models {
        m.validate()?;
    }
    let tables = correction_sweep(&models, args.n)?;
    let text = match args.format {
        Format::Csv => correction_csv(&tables, fmt_num),
        Format::Json => to_json(&tables),
    };
    emit(&text, args.out.as_deref())
}

fn swept(base: &DetectorModel, x: f64) -> anyhow::Result<DetectorModel> {
    Ok(match *base {
        DetectorModel::OnOffArray { eta, .. } => {
            if x < 1.0 || x.fract() != 0.0 {
                return Err(UsageError(format!("array sizes must be positive integers, got {x}")).into());
            }
            DetectorModel::OnOffArray { k: x as usize, eta }
        }
        DetectorModel::DeadTimeMono { eta, .. } => DetectorModel::DeadTimeMono { ratio: x, eta },
        DetectorModel::DeadTimeExp { gamma, eta, .. } => DetectorModel::DeadTimeExp { ratio: x, gamma, eta },
        DetectorModel::LossyPnr { .. } => DetectorModel::LossyPnr { eta: x },
        DetectorModel::IdealPnr => {
            return Err(UsageError("the ideal detector has no parameter to sweep".into()).into())
        }
    })
}

/// Fills in the sweep parameter when a sweep is given without it, so that
/// `--detector array --sweep 2:10` works without a dummy `--K`.
pub fn with_sweep_defaults(mut args: CorrectionArgs) -> CorrectionArgs {
    if args.sweep.is_some() {
        let d = &mut args.detector;
        match d.detector {
            Some(DetectorKind::Array) => d.k = d.k.or(Some(1)),
            Some(DetectorKind::DeadTimeMono) | Some(DetectorKind::DeadTimeExp) => {
                d.ratio = d.ratio.or(Some(0.0))
            }
            _ => {}
        }
    }
    args
}

pub fn sample_cmd(args: &SampleArgs) -> anyhow::Result<()> {
    let exp = resolve(&args.experiment)?;
    let trials = args.trials.or(exp.config.trials).unwrap_or(DEFAULT_TRIALS);
    let seed = args.seed.or(exp.config.seed).unwrap_or(0);
    let postselecting = args.postselect || exp.config.postselect.unwrap_or(false);
    let exact = exact_distribution(&exp.unitary, &exp.input, &exp.model)?;
    let mut report = if args.simulate_detectors {
        let ideal = ideal_distribution(&exp.unitary, &exp.input)?;
        sample_through_detectors(&ideal, &exp.model, &exact, trials, seed)?
    } else {
        sample(&exact, trials, seed)?
    };
    if postselecting {
        report = postselect(&report, exp.input.total());
        if let Some(ps) = &report.postselection {
            eprintln!(
                "acceptance {} ± {} ({} of {})",
                fmt_num(ps.acceptance),
                fmt_num(ps.acceptance_stderr),
                ps.accepted,
                ps.offered
            );
            if ps.empty {
                eprintln!("warning: no samples survived postselection");
            }
        }
    }
    let text = match exp.format {
        Format::Json => to_json(&report),
        Format::Csv => report.to_csv(fmt_num),
    };
    emit(&text, exp.out.as_deref())
}

pub fn pkm(args: &PkmArgs) -> anyhow::Result<()> {
    let model = resolve_detector(&args.detector, None)?;
    if args.quad_nodes < 2 || args.quad_tol.is_nan() || args.quad_tol <= 0.0 {
        return Err(UsageError("quadrature needs at least 2 nodes and a positive tolerance".into()).into());
    }
    let quad = QuadratureSpec {
        nodes: args.quad_nodes,
        tol: args.quad_tol,
        ..QuadratureSpec::default()
    };
    let table = CondProbTable::build_with(model, args.max_m, &quad)?;
    let text = match args.format {
        Format::Csv => table.to_csv(fmt_num),
        Format::Json => to_json(&table),
    };
    emit(&text, args.out.as_deref())
}
