//! Flat `key = value` experiment configs.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated.

use std::collections::BTreeMap;
use std::path::PathBuf;

use semiplug::estimators::BaselineKind;
use semiplug::mcverify::Combiner;
use semiplug::models::{
    CovariateLaw, CoxModel, ErrorLaw, LocationModel, Model, StdRegressionModel, SymRegressionModel,
    TwoSampleModel,
};
use semiplug::par::Execution;
use semiplug::pipelines::{FunctionalSpec, HFunction, SubChoice};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SEMIPLUG_OUT_DIR";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("key '{key}': {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

const KEYS: &[&str] = &[
    "experiment",
    "model",
    "theta0",
    "law",
    "scale",
    "covariate",
    "sigma0",
    "lambda0",
    "t0",
    "covariate_p",
    "functional",
    "t",
    "h",
    "estimator",
    "baseline",
    "combiner",
    "zeta",
    "n_list",
    "reps",
    "drift_t",
    "master_seed",
    "mc_draws",
    "execution",
    "output",
];

/// A validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub model: Model,
    pub functional: FunctionalSpec,
    pub estimator: SubChoice,
    pub baseline: BaselineKind,
    pub combiner: Combiner,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub drift_t: f64,
    pub master_seed: u64,
    pub mc_draws: usize,
    pub execution: Execution,
    pub output: PathBuf,
}

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| invalid(key, "missing"))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_value(key, v),
        }
    }

    fn parse_required<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        parse_value(key, self.required(key)?)
    }

    fn reals(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        list(key, self.required(key)?)
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| invalid(key, format!("cannot parse '{v}'")))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(',')
        .map(|item| parse_value(key, item.trim()))
        .collect()
}

fn finite(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, "must be finite"))
    }
}

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| ConfigError::Parse {
            line: i + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected 'key = value', found '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(parse_err("empty key".into()));
        }
        if !KEYS.contains(&key) {
            return Err(parse_err(format!("unknown key '{key}'")));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(parse_err(format!("duplicate key '{key}'")));
        }
    }
    validate(&Entries(map))
}

fn model(e: &Entries) -> Result<Model, ConfigError> {
    let kind = e.required("model")?;
    let law = || -> Result<ErrorLaw, ConfigError> {
        let name = e.get("law").unwrap_or("normal");
        ErrorLaw::from_name(name, e.parse("scale", 1.0)?)
            .map_err(|err| invalid("law", err.to_string()))
    };
    let covariate = |dim: usize| -> Result<CovariateLaw, ConfigError> {
        let name = e.get("covariate").unwrap_or("normal");
        CovariateLaw::from_name(name, dim).map_err(|err| invalid("covariate", err.to_string()))
    };
    let scalar_theta = || -> Result<f64, ConfigError> {
        match e.reals("theta0")?.as_slice() {
            [t] => finite("theta0", *t),
            _ => Err(invalid("theta0", "expects one value")),
        }
    };
    let m = match kind {
        "location" => Model::Location(LocationModel {
            theta0: scalar_theta()?,
            law: law()?,
        }),
        "two-sample" => Model::TwoSample(TwoSampleModel {
            theta0: scalar_theta()?,
            law: law()?,
        }),
        "sym-regression" => {
            let theta = e.reals("theta0")?;
            Model::SymRegression(
                SymRegressionModel::new(theta.clone(), law()?, covariate(theta.len())?)
                    .map_err(|err| invalid("theta0", err.to_string()))?,
            )
        }
        "std-regression" => {
            let nu = e.reals("theta0")?;
            if nu.len() < 2 {
                return Err(invalid(
                    "theta0",
                    "expects an intercept and at least one slope",
                ));
            }
            let dim = nu.len() - 1;
            Model::StdRegression(
                StdRegressionModel::new(nu, e.parse("sigma0", 1.0)?, law()?, covariate(dim)?)
                    .map_err(|err| invalid("sigma0", err.to_string()))?,
            )
        }
        "cox" => {
            let lambda0: f64 = e.parse("lambda0", 1.0)?;
            if !(lambda0 > 0.0 && lambda0.is_finite()) {
                return Err(invalid("lambda0", "must be positive"));
            }
            let t0 = e.parse("t0", CoxModel::window_for_prob(lambda0, 0.9))?;
            Model::Cox(
                CoxModel::with_covariate(
                    scalar_theta()?,
                    lambda0,
                    t0,
                    e.parse("covariate_p", 0.5)?,
                )
                .map_err(|err| invalid("t0", err.to_string()))?,
            )
        }
        other => return Err(invalid("model", format!("unknown model '{other}'"))),
    };
    Ok(m)
}

fn functional(e: &Entries) -> Result<FunctionalSpec, ConfigError> {
    match e.required("functional")? {
        "cdf-at" => Ok(FunctionalSpec::CdfAt(finite("t", e.parse_required("t")?)?)),
        "variance" => Ok(FunctionalSpec::Variance),
        "h-moment" => Ok(FunctionalSpec::HMoment(
            HFunction::from_name(e.required("h")?).map_err(|err| invalid("h", err.to_string()))?,
        )),
        other => Err(invalid(
            "functional",
            format!("unknown functional '{other}'"),
        )),
    }
}

fn combiner(e: &Entries) -> Result<Combiner, ConfigError> {
    match e.get("combiner").unwrap_or("direct") {
        "direct" => Ok(Combiner::Direct),
        "split" => Ok(Combiner::Split),
        "discretized-direct" => {
            let zeta: f64 = e.parse_required("zeta")?;
            if !(zeta > 0.0 && zeta.is_finite()) {
                return Err(invalid("zeta", "must be positive"));
            }
            Ok(Combiner::DiscretizedDirect { zeta })
        }
        other => Err(invalid("combiner", format!("unknown combiner '{other}'"))),
    }
}

fn validate(e: &Entries) -> Result<ExperimentConfig, ConfigError> {
    let experiment = e.required("experiment")?.to_string();
    if experiment.is_empty() || experiment.contains(['/', '\\']) {
        return Err(invalid(
            "experiment",
            "must be a nonempty name without path separators",
        ));
    }
    let n_list: Vec<usize> = list("n_list", e.required("n_list")?)?;
    if n_list.is_empty() {
        return Err(invalid("n_list", "must not be empty"));
    }
    let reps: usize = e.parse_required("reps")?;
    if reps < 1 {
        return Err(invalid("reps", "must be at least 1"));
    }
    let estimator = match e.get("estimator").unwrap_or("efficient") {
        "efficient" => SubChoice::Efficient,
        "plain" => SubChoice::Plain,
        other => return Err(invalid("estimator", format!("unknown estimator '{other}'"))),
    };
    let baseline = match e.get("baseline").unwrap_or("npmle") {
        "npmle" => BaselineKind::Npmle,
        "breslow" => BaselineKind::Breslow,
        other => return Err(invalid("baseline", format!("unknown baseline '{other}'"))),
    };
    let execution = match e.get("execution").unwrap_or("parallel") {
        "parallel" => Execution::Parallel,
        "serial" => Execution::Serial,
        other => return Err(invalid("execution", format!("unknown execution '{other}'"))),
    };
    let output = match e.get("output") {
        Some(p) => PathBuf::from(p),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
            .join(&experiment),
    };
    Ok(ExperimentConfig {
        model: model(e)?,
        functional: functional(e)?,
        combiner: combiner(e)?,
        estimator,
        baseline,
        n_list,
        reps,
        drift_t: finite("drift_t", e.parse("drift_t", 0.0)?)?,
        master_seed: e.parse_required("master_seed")?,
        mc_draws: e.parse("mc_draws", 200_000)?,
        execution,
        output,
        experiment,
    })
}
