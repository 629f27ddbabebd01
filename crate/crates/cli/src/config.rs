//! Experiment configuration: a JSON file merged with command-line flags,
//! flags taking precedence.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use bosonkit::interferometer::{
    balanced_beam_splitter, dft_unitary, haar_random_unitary, load_unitary, UNITARITY_TOL,
};
use bosonkit::{DetectorModel, Pattern, UnitaryMatrix};
use serde::Deserialize;

use crate::args::{DetectorArgs, DetectorKind, ExperimentArgs, Format};
use crate::UsageError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub unitary: Option<String>,
    pub input: Option<InputSpec>,
    pub detector: Option<DetectorSpec>,
    pub eta: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub ratio: Option<f64>,
    pub gamma: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub postselect: Option<bool>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum InputSpec {
    Text(String),
    Counts(Vec<usize>),
}

/// Either a bare kind, with parameters given alongside, or a full model
/// object such as `{"kind": "array", "K": 4, "eta": 1}`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DetectorSpec {
    Kind(DetectorKind),
    Model(DetectorModel),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }
}

/// Fully resolved experiment.
pub struct Experiment {
    pub unitary: UnitaryMatrix,
    pub input: Pattern,
    pub model: DetectorModel,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub config: ExperimentConfig,
}

pub fn resolve(args: &ExperimentArgs) -> anyhow::Result<Experiment> {
    let config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let spec = args
        .unitary
        .clone()
        .or_else(|| config.unitary.clone())
        .ok_or_else(|| UsageError("no interferometer given; use --unitary or a config file".into()))?;
    let unitary = parse_unitary(&spec)?;
    let input = match (&args.input, &config.input) {
        (Some(text), _) | (None, Some(InputSpec::Text(text))) => parse_pattern(text)?,
        (None, Some(InputSpec::Counts(c))) => Pattern::new(c.clone()),
        (None, None) => return Err(UsageError("no input pattern given; use --input".into()).into()),
    };
    if input.modes() != unitary.dim() {
        bail!(bosonkit::Error::Shape(format!(
            "input pattern has {} modes, interferometer has {}",
            input.modes(),
            unitary.dim()
        )));
    }
    let model = resolve_detector(&args.detector, Some(&config))?;
    Ok(Experiment {
        unitary,
        input,
        model,
        format: args.format.or(config.format).unwrap_or(Format::Json),
        out: args.out.clone().or_else(|| config.out.clone()),
        config,
    })
}

pub fn parse_pattern(text: &str) -> anyhow::Result<Pattern> {
    text.parse::<Pattern>()
        .map_err(|e| UsageError(format!("input pattern {text:?}: {e}")).into())
}

fn parse_usize(what: &str, text: &str) -> anyhow::Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| UsageError(format!("{what}: expected a non-negative integer, got {text:?}")).into())
}

/// `dft:N`, `haar:N,SEED`, `identity:N`, `bs`, or a path to a matrix file.
pub fn parse_unitary(spec: &str) -> anyhow::Result<UnitaryMatrix> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let u = match head {
        "dft" => dft_unitary(parse_usize("dft size", rest)?)?,
        "identity" => UnitaryMatrix::identity(parse_usize("identity size", rest)?),
        "bs" if rest.is_empty() => balanced_beam_splitter(),
        "haar" => {
            let (n, seed) = rest
                .split_once(',')
                .ok_or_else(|| UsageError(format!("haar spec {spec:?}: expected haar:N,SEED")))?;
            let seed: u64 = seed
                .trim()
                .parse()
                .map_err(|_| UsageError(format!("haar seed {seed:?} is not an integer")))?;
            haar_random_unitary(parse_usize("haar size", n)?, seed)?
        }
        _ => load_unitary(Path::new(spec), UNITARITY_TOL)?,
    };
    Ok(u)
}

pub fn resolve_detector(flags: &DetectorArgs, config: Option<&ExperimentConfig>) -> anyhow::Result<DetectorModel> {
    let model_in_config = config.and_then(|c| match &c.detector {
        Some(DetectorSpec::Model(m)) => Some(*m),
        _ => None,
    });
    let kind = flags
        .detector
        .or_else(|| match config.and_then(|c| c.detector.as_ref()) {
            Some(DetectorSpec::Kind(k)) => Some(*k),
            Some(DetectorSpec::Model(m)) => Some(kind_of(m)),
            None => None,
        })
        .unwrap_or(DetectorKind::Ideal);

    let from_model = |get: fn(&DetectorModel) -> Option<f64>| model_in_config.as_ref().and_then(get);
    let eta = flags
        .eta
        .or_else(|| config.and_then(|c| c.eta))
        .or_else(|| from_model(|m| Some(m.eta())))
        .unwrap_or(1.0);
    let ratio = flags
        .ratio
        .or_else(|| config.and_then(|c| c.ratio))
        .or_else(|| {
            from_model(|m| match *m {
                DetectorModel::DeadTimeMono { ratio, .. } | DetectorModel::DeadTimeExp { ratio, .. } => Some(ratio),
                _ => None,
            })
        });
    let gamma = flags.gamma.or_else(|| config.and_then(|c| c.gamma)).or_else(|| {
        from_model(|m| match *m {
            DetectorModel::DeadTimeExp { gamma, .. } => Some(gamma),
            _ => None,
        })
    });
    let k = flags.k.or_else(|| config.and_then(|c| c.k)).or(match model_in_config {
        Some(DetectorModel::OnOffArray { k, .. }) => Some(k),
        _ => None,
    });

    let need = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| UsageError(format!("detector {kind:?} needs --{name}")))
    };
    let model = match kind {
        DetectorKind::Ideal => DetectorModel::IdealPnr,
        DetectorKind::Lossy => DetectorModel::LossyPnr { eta },
        DetectorKind::Array => DetectorModel::OnOffArray {
            k: k.ok_or_else(|| UsageError("detector array needs --K".into()))?,
            eta,
        },
        DetectorKind::DeadTimeMono => DetectorModel::DeadTimeMono {
            ratio: need("ratio", ratio)?,
            eta,
        },
        DetectorKind::DeadTimeExp => DetectorModel::DeadTimeExp {
            ratio: need("ratio", ratio)?,
            gamma: need("gamma", gamma)?,
            eta,
        },
    };
    model.validate()?;
    Ok(model)
}

fn kind_of(m: &DetectorModel) -> DetectorKind {
    match m {
        DetectorModel::IdealPnr => DetectorKind::Ideal,
        DetectorModel::LossyPnr { .. } => DetectorKind::Lossy,
        DetectorModel::OnOffArray { .. } => DetectorKind::Array,
        DetectorModel::DeadTimeMono { .. } => DetectorKind::DeadTimeMono,
        DetectorModel::DeadTimeExp { .. } => DetectorKind::DeadTimeExp,
    }
}

/// Sweep points: `a:b` (integers a…b), `a:b:count` (evenly spaced, ends
/// included) or `x,y,z`.
pub fn parse_sweep(spec: &str) -> anyhow::Result<Vec<f64>> {
    let bad = || UsageError(format!("sweep {spec:?}: expected a:b, a:b:count or a comma-separated list"));
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let points = match parts.as_slice() {
        [a, b] => {
            let (a, b) = (parse_usize("sweep start", a)?, parse_usize("sweep end", b)?);
            (a..=b).map(|x| x as f64).collect()
        }
        [a, b, count] => {
            let (a, b) = (num(a)?, num(b)?);
            let count = parse_usize("sweep count", count)?;
            match count {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..count)
                    .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
                    .collect(),
            }
        }
        [list] => list.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(bad().into()),
    };
    if points.is_empty() {
        return Err(bad().into());
    }
    Ok(points)
}
