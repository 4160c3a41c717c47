//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! problem = shaw
//! n = 256
//! noise = 1e-3
//! seed = 42
//! kmax = 40
//! out = results/shaw
//! panels = abcd
//! tol.gamma = 1e-10
//! ```
//!
//! Problem parameters: `depth` (gravity), `kappa` (heat), and for the
//! synthetic problems `spectrum = severe | power` with `rho` or `alpha`,
//! `beta` and `matrix_seed`. `scale = desk | paper` picks the default size.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gallery::{
    make_deriv2, make_gravity, make_heat, make_picard_synthetic, make_prescribed, make_shaw, IllPosedProblem,
    SpectrumModel, GRAVITY_DEFAULT_DEPTH, HEAT_DEFAULT_KAPPA,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProblemKind {
    Shaw,
    Gravity { depth: f64 },
    Deriv2,
    Heat { kappa: f64 },
    /// `A = U Σ V^T` with `x_true = ones`.
    Prescribed { spectrum: SpectrumModel, matrix_seed: u64 },
    /// Right-hand side obeying the Picard model exactly.
    Picard { spectrum: SpectrumModel, matrix_seed: u64 },
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Shaw => "shaw",
            ProblemKind::Gravity { .. } => "gravity",
            ProblemKind::Deriv2 => "deriv2",
            ProblemKind::Heat { .. } => "heat",
            ProblemKind::Prescribed { .. } => "prescribed",
            ProblemKind::Picard { .. } => "picard",
        }
    }

    pub fn build(&self, n: usize) -> Result<IllPosedProblem> {
        match *self {
            ProblemKind::Shaw => make_shaw(n),
            ProblemKind::Gravity { depth } => make_gravity(n, depth),
            ProblemKind::Deriv2 => make_deriv2(n),
            ProblemKind::Heat { kappa } => make_heat(n, kappa),
            ProblemKind::Prescribed { spectrum, matrix_seed } => make_prescribed(n, n, spectrum, matrix_seed),
            ProblemKind::Picard { spectrum, matrix_seed } => make_picard_synthetic(n, spectrum, matrix_seed),
        }
    }

    /// Generated problem with its SVD attached.
    pub fn build_with_svd(&self, n: usize) -> Result<Arc<IllPosedProblem>> {
        let mut p = self.build(n)?;
        p.ensure_svd()?;
        Ok(Arc::new(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Panel {
    A,
    B,
    C,
    D,
}

impl Panel {
    pub const ALL: [Panel; 4] = [Panel::A, Panel::B, Panel::C, Panel::D];

    pub fn letter(self) -> char {
        match self {
            Panel::A => 'a',
            Panel::B => 'b',
            Panel::C => 'c',
            Panel::D => 'd',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub kmax: usize,
    pub out: PathBuf,
    pub panels: Vec<Panel>,
    pub scale: Scale,
    /// Per-column comparison tolerances, keyed by CSV column name.
    pub tolerances: BTreeMap<String, f64>,
}

const KNOWN_KEYS: &[&str] = &[
    "problem",
    "n",
    "noise",
    "epsilon",
    "seed",
    "kmax",
    "out",
    "panels",
    "scale",
    "depth",
    "kappa",
    "spectrum",
    "rho",
    "alpha",
    "beta",
    "matrix_seed",
];

pub const DEFAULT_KMAX: usize = 40;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses `key = value` lines into a map; later keys replace earlier ones.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected key = value, got {line:?}", lineno + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| config_err(format!("{key}: cannot parse {v:?}"))))
        .transpose()
}

fn parse_panels(text: &str) -> Result<Vec<Panel>> {
    let mut panels = Vec::new();
    for c in text.chars().filter(|c| !matches!(c, ',' | ' ')) {
        let p = match c.to_ascii_lowercase() {
            'a' => Panel::A,
            'b' => Panel::B,
            'c' => Panel::C,
            'd' => Panel::D,
            other => return Err(config_err(format!("panels: unknown panel {other:?}"))),
        };
        if !panels.contains(&p) {
            panels.push(p);
        }
    }
    panels.sort();
    Ok(panels)
}

impl ExperimentConfig {
    /// Validated configuration from a key map. Every problem is detected
    /// here, before any computation.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        for key in map.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) && !key.starts_with("tol.") {
                return Err(config_err(format!("unknown key {key:?}")));
            }
        }
        if map.contains_key("noise") && map.contains_key("epsilon") {
            return Err(config_err("give either noise or epsilon, not both"));
        }
        let scale = match map.get("scale").map(String::as_str) {
            None | Some("desk") => Scale::Desk,
            Some("paper") => Scale::Paper,
            Some(other) => return Err(config_err(format!("scale: expected desk or paper, got {other:?}"))),
        };
        let name = map.get("problem").ok_or_else(|| config_err("missing key problem"))?;
        let spectrum = || -> Result<SpectrumModel> {
            let beta = parse_num::<f64>(map, "beta")?.unwrap_or(1.0);
            let model = match map.get("spectrum").map(String::as_str) {
                Some("severe") => SpectrumModel::severe(
                    parse_num(map, "rho")?.ok_or_else(|| config_err("spectrum = severe needs rho"))?,
                    beta,
                ),
                Some("power") => SpectrumModel::power(
                    parse_num(map, "alpha")?.ok_or_else(|| config_err("spectrum = power needs alpha"))?,
                    beta,
                ),
                Some(other) => return Err(config_err(format!("spectrum: expected severe or power, got {other:?}"))),
                None => return Err(config_err(format!("problem {name} needs spectrum = severe | power"))),
            };
            model.validate().map_err(|e| config_err(e.to_string()))?;
            Ok(model)
        };
        let seed = parse_num::<u64>(map, "seed")?.unwrap_or(42);
        let matrix_seed = parse_num::<u64>(map, "matrix_seed")?.unwrap_or(seed);
        let problem = match name.as_str() {
            "shaw" => ProblemKind::Shaw,
            "gravity" => ProblemKind::Gravity {
                depth: parse_num(map, "depth")?.unwrap_or(GRAVITY_DEFAULT_DEPTH),
            },
            "deriv2" => ProblemKind::Deriv2,
            "heat" => ProblemKind::Heat {
                kappa: parse_num(map, "kappa")?.unwrap_or(HEAT_DEFAULT_KAPPA),
            },
            "prescribed" => ProblemKind::Prescribed {
                spectrum: spectrum()?,
                matrix_seed,
            },
            "picard" => ProblemKind::Picard {
                spectrum: spectrum()?,
                matrix_seed,
            },
            other => return Err(config_err(format!("unknown problem {other:?}"))),
        };
        let n = match parse_num::<usize>(map, "n")? {
            Some(n) => n,
            None => default_size(&problem, scale),
        };
        let epsilon = parse_num::<f64>(map, "noise")?
            .or(parse_num::<f64>(map, "epsilon")?)
            .unwrap_or(1e-3);
        let kmax = parse_num::<usize>(map, "kmax")?.unwrap_or(DEFAULT_KMAX.min(n.saturating_sub(1)));
        let panels = match map.get("panels") {
            Some(p) => parse_panels(p)?,
            None => Panel::ALL.to_vec(),
        };
        let mut tolerances = BTreeMap::new();
        for (key, value) in map.iter().filter(|(k, _)| k.starts_with("tol.")) {
            let tol: f64 = value
                .parse()
                .map_err(|_| config_err(format!("{key}: cannot parse {value:?}")))?;
            if !(tol >= 0.0) {
                return Err(config_err(format!("{key}: tolerance must be non-negative")));
            }
            tolerances.insert(key["tol.".len()..].to_string(), tol);
        }
        let config = ExperimentConfig {
            problem,
            n,
            epsilon,
            seed,
            kmax,
            out: PathBuf::from(map.get("out").map(String::as_str).unwrap_or("results")),
            panels,
            scale,
            tolerances,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_map(&parse_kv(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(config_err(format!("noise must lie in (0, 1), got {}", self.epsilon)));
        }
        let min_n = if matches!(self.problem, ProblemKind::Shaw) { 4 } else { 2 };
        if self.n < min_n {
            return Err(config_err(format!("n = {} is too small for {}", self.n, self.problem.name())));
        }
        if matches!(self.problem, ProblemKind::Shaw) && !self.n.is_multiple_of(2) {
            return Err(config_err(format!("shaw needs an even n, got {}", self.n)));
        }
        if self.kmax == 0 || self.kmax >= self.n {
            return Err(config_err(format!("kmax must lie in 1..n-1 = 1..{}, got {}", self.n - 1, self.kmax)));
        }
        match self.problem {
            ProblemKind::Gravity { depth } if !(depth > 0.0) => Err(config_err("depth must be positive")),
            ProblemKind::Heat { kappa } if !(kappa > 0.0) => Err(config_err("kappa must be positive")),
            _ => Ok(()),
        }
    }

    /// Canonical `key = value` echo; parsing it back gives the same config.
    pub fn to_kv(&self) -> String {
        let mut lines = vec![format!("problem = {}", self.problem.name())];
        match self.problem {
            ProblemKind::Gravity { depth } => lines.push(format!("depth = {depth:e}")),
            ProblemKind::Heat { kappa } => lines.push(format!("kappa = {kappa:e}")),
            ProblemKind::Prescribed { spectrum, matrix_seed } | ProblemKind::Picard { spectrum, matrix_seed } => {
                match spectrum {
                    SpectrumModel::Severe { rho, beta, .. } => {
                        lines.push("spectrum = severe".into());
                        lines.push(format!("rho = {rho:e}"));
                        lines.push(format!("beta = {beta:e}"));
                    }
                    SpectrumModel::Power { alpha, beta, .. } => {
                        lines.push("spectrum = power".into());
                        lines.push(format!("alpha = {alpha:e}"));
                        lines.push(format!("beta = {beta:e}"));
                    }
                    SpectrumModel::Empirical { .. } => {}
                }
                lines.push(format!("matrix_seed = {matrix_seed}"));
            }
            ProblemKind::Shaw | ProblemKind::Deriv2 => {}
        }
        lines.push(format!("n = {}", self.n));
        lines.push(format!("noise = {:e}", self.epsilon));
        lines.push(format!("seed = {}", self.seed));
        lines.push(format!("kmax = {}", self.kmax));
        lines.push(format!("out = {}", self.out.display()));
        lines.push(format!("panels = {}", self.panels.iter().map(|p| p.letter()).collect::<String>()));
        lines.push(format!(
            "scale = {}",
            match self.scale {
                Scale::Desk => "desk",
                Scale::Paper => "paper",
            }
        ));
        for (col, tol) in &self.tolerances {
            lines.push(format!("tol.{col} = {tol:e}"));
        }
        lines.join("\n") + "\n"
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={} noise={:e} seed={} kmax={}",
            self.problem.name(),
            self.n,
            self.epsilon,
            self.seed,
            self.kmax
        )
    }
}

/// 256 for the kernel problems and 200 for the synthetic ones at desk scale;
/// 10240 and 10000 at paper scale.
pub fn default_size(problem: &ProblemKind, scale: Scale) -> usize {
    let synthetic = matches!(problem, ProblemKind::Prescribed { .. } | ProblemKind::Picard { .. });
    match (scale, synthetic) {
        (Scale::Desk, false) => 256,
        (Scale::Desk, true) => 200,
        (Scale::Paper, false) => 10240,
        (Scale::Paper, true) => 10000,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = ExperimentConfig::from_text("problem = shaw\n").unwrap();
        assert_eq!((c.n, c.kmax, c.seed, c.epsilon), (256, 40, 42, 1e-3));
        assert_eq!(c.panels, Panel::ALL.to_vec());
        let c = ExperimentConfig::from_text("problem = prescribed\nspectrum = power\nalpha = 0.6\nseed = 7\n").unwrap();
        assert_eq!(c.n, 200);
        assert_eq!(
            c.problem,
            ProblemKind::Prescribed {
                spectrum: SpectrumModel::power(0.6, 1.0),
                matrix_seed: 7
            }
        );
    }

    #[test]
    fn round_trip() {
        let text = "problem = picard\nspectrum = severe\nrho = 3\nbeta = 0.5\nn = 48\nkmax = 20\npanels = d,a\ntol.gamma = 1e-9\n";
        let c = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(c.panels, vec![Panel::A, Panel::D]);
        assert_eq!(ExperimentConfig::from_text(&c.to_kv()).unwrap(), c);
    }

    #[test]
    fn errors_are_config_errors() {
        for text in [
            "problem = shaw\nkmax = 256\n",
            "problem = shaw\nn = 255\n",
            "problem = nope\n",
            "n = 10\n",
            "problem = shaw\nnoise = 1.5\n",
            "problem = shaw\ncolour = red\n",
            "problem = prescribed\n",
            "problem = prescribed\nspectrum = power\nalpha = 0.4\n",
            "problem = shaw\npanels = ae\n",
            "problem = shaw\nscale = huge\n",
            "just text\n",
        ] {
            assert!(matches!(ExperimentConfig::from_text(text), Err(Error::Config(_))), "{text:?}");
        }
    }
}
