use serde::Serialize;

use qmarkov::io::FORMAT_VERSION;
use qmarkov::markov::RNG_ALGORITHM;
use qmarkov::HalfInt;

use crate::args::{Format, Source};

/// Fully resolved parameters of a run, embedded in every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<HalfInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturb: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub seed: u64,
    pub format: &'static str,
    pub rng: &'static str,
    pub version: u32,
}

impl RunConfig {
    pub fn new(command: &'static str, seed: u64, format: Format) -> Self {
        RunConfig {
            command,
            kind: None,
            s: None,
            n: None,
            beta: None,
            beta_pi: None,
            file: None,
            steps: None,
            trajectories: None,
            initial: None,
            tv_limit: None,
            tol: None,
            max_iters: None,
            n_max: None,
            betas: None,
            perturb: None,
            count: None,
            seed,
            format: format.name(),
            rng: RNG_ALGORITHM,
            version: FORMAT_VERSION,
        }
    }

    pub fn with_source(mut self, source: &Source) -> Self {
        self.kind = Some(source.kind.name());
        self.s = source.s;
        self.n = source.n;
        self.beta = source.beta();
        self.beta_pi = source.beta_pi;
        self.file = source.file.as_ref().map(|p| p.display().to_string());
        self
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configs always serialize")
    }

    /// One-line JSON form used as a comment header in CSV and table output.
    pub fn comment(&self) -> String {
        format!("# {}\n", serde_json::to_string(self).expect("configs always serialize"))
    }
}
