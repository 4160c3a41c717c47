use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};

use crate::analysis::{
    analyze, bound_reports, decay_diagnostic, first_natural_order_failure, write_analysis_csv, write_bounds_csv,
    write_ritz_csv, AnalysisRecord, BoundReport, DecayPoint, SLACK,
};
use crate::error::Result;
use crate::gallery::IllPosedProblem;
use crate::golub_kahan::{BidiagState, Reorth};
use crate::lsqr::{lsqr_trace, LsqrTrace};
use crate::noise::{add_noise, picard_diagnostic, transition_index, NoisyInstance, PicardDiagnostic, PicardOptions};
use crate::random::GENERATOR;
use crate::tsvd::{tsvd_sweep, TsvdSweep};

use super::config::ExperimentConfig;
use super::svg::render_panel;
use super::table::{read_table, write_tagged, SCHEMA};

/// Factorizations are continued to completion, for the `G_k` route, up to
/// this many columns.
pub const COMPLETE_LIMIT: usize = 512;

/// CSV files of a run, in the order they are written.
pub const CSV_FILES: &[&str] = &[
    "picard.csv",
    "tsvd.csv",
    "lsqr.csv",
    "bidiag.csv",
    "analysis.csv",
    "ritz.csv",
    "bounds.csv",
    "decay.csv",
    "summary.csv",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub kstar: usize,
    /// Picard transition point.
    pub k0: usize,
    pub k0_naive: usize,
    /// Best TSVD truncation index.
    pub k0_realized: usize,
    pub best_error_lsqr: f64,
    pub best_error_tsvd: f64,
    pub first_natural_order_failure: Option<usize>,
    pub first_near_best_failure: Option<usize>,
    pub breakdown: Option<usize>,
    pub analysed_steps: usize,
    pub invariant_violations: usize,
}

pub struct RunResults {
    pub config: ExperimentConfig,
    pub problem: Arc<IllPosedProblem>,
    pub instance: NoisyInstance,
    pub picard: PicardDiagnostic,
    pub tsvd: TsvdSweep,
    pub lsqr: LsqrTrace,
    pub state: BidiagState,
    pub records: Vec<AnalysisRecord>,
    pub bounds: Vec<BoundReport>,
    pub decay: Vec<DecayPoint>,
    /// Human-readable descriptions of failed structural checks.
    pub violations: Vec<String>,
    pub summary: Summary,
}

#[derive(Clone, Debug)]
pub struct RunArtifact {
    pub dir: PathBuf,
    pub csv: Vec<PathBuf>,
    pub svg: Vec<PathBuf>,
    pub summary: Summary,
    pub violations: Vec<String>,
}

/// Generate, perturb, bidiagonalize, sweep and analyse, all in memory.
pub fn compute(config: &ExperimentConfig) -> Result<RunResults> {
    config.validate()?;
    let problem = config.problem.build_with_svd(config.n)?;
    compute_for(config, problem)
}

/// As [`compute`] with an already generated problem, so several noise
/// realizations can share one SVD.
pub fn compute_for(config: &ExperimentConfig, problem: Arc<IllPosedProblem>) -> Result<RunResults> {
    let n = problem.cols();
    let svd = problem.svd()?;
    let instance = add_noise(&problem, config.epsilon, config.seed)?;
    let picard = picard_diagnostic(&instance)?;
    let tsvd = tsvd_sweep(&instance, n)?;

    let a = &problem.a;
    let mut state = BidiagState::start(a, &instance.b, Reorth::Full)?;
    let target = if n <= COMPLETE_LIMIT { n } else { (config.kmax + 1).min(n) };
    if let Some(e) = state.run_to(a, target) {
        if state.bidiag_k() <= config.kmax {
            warn!("{config}: results truncated at step {}: {e}", state.bidiag_k());
        } else {
            info!("{config}: factorization stopped after the analysed range: {e}");
        }
    }
    let lsqr = lsqr_trace(&state, a, &instance.b, &problem.x_true, config.kmax)?;
    let records = analyze(a, svd, &state, config.kmax)?;
    let bounds = bound_reports(&picard, &problem.spectrum, &records)?;
    let gammas: Vec<f64> = records.iter().map(|r| r.gamma).collect();
    let sigma1 = svd.singular_values[0];
    let decay = decay_diagnostic(&state, &gammas, sigma1);
    let violations = check_invariants(&records, &decay, sigma1);
    for v in &violations {
        warn!("{config}: {v}");
    }

    let breakdown = state.breakdown_step().filter(|&s| s <= config.kmax + 1);
    let summary = Summary {
        kstar: lsqr.kstar,
        k0: picard.k0,
        k0_naive: picard.k0_naive,
        k0_realized: tsvd.best_k,
        best_error_lsqr: lsqr.best_error(),
        best_error_tsvd: tsvd.best_error(),
        first_natural_order_failure: first_natural_order_failure(&records),
        first_near_best_failure: records.iter().find(|r| !r.near_best).map(|r| r.k),
        breakdown,
        analysed_steps: records.len(),
        invariant_violations: violations.len(),
    };
    Ok(RunResults {
        config: config.clone(),
        problem,
        instance,
        picard,
        tsvd,
        lsqr,
        state,
        records,
        bounds,
        decay,
        violations,
        summary,
    })
}

/// Checks that hold for every problem: `σ_{k+1} ≤ γ_k`, `γ_{k+1} < γ_k`,
/// global interlacing, Mirsky gaps and the `α`/`β` bounds.
pub fn check_invariants(records: &[AnalysisRecord], decay: &[DecayPoint], sigma1: f64) -> Vec<String> {
    let slack = SLACK * sigma1;
    let mut out = Vec::new();
    for r in records {
        if r.gamma < r.sigma_kplus1 - slack {
            out.push(format!("k={}: gamma {:e} below sigma_(k+1) {:e}", r.k, r.gamma, r.sigma_kplus1));
        }
        if !r.global_interlacing {
            out.push(format!("k={}: Ritz values violate interlacing", r.k));
        }
        if !r.mirsky {
            out.push(format!("k={}: Ritz gaps exceed gamma", r.k));
        }
    }
    for w in records.windows(2) {
        if !(w[1].gamma < w[0].gamma + slack) {
            out.push(format!("k={}: gamma does not decrease", w[1].k));
        }
    }
    for d in decay {
        if !d.below_gamma {
            out.push(format!("k={}: alpha_(k+1) or beta_(k+2) not below gamma", d.k));
        }
        if !d.product_ok {
            out.push(format!("k={}: 2 alpha beta exceeds gamma^2", d.k));
        }
    }
    out
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "none".to_string(), |k| k.to_string())
}

impl RunResults {
    /// Writes every CSV and the configuration echo into `dir`.
    pub fn write_csvs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join("config.txt"),
            format!("{}# generator = {GENERATOR}\n# schema = {SCHEMA}\n", self.config.to_kv()),
        )?;
        let path = |name: &str| dir.join(name);
        write_tagged(&path("picard.csv"), |b| self.picard.write_csv(b))?;
        write_tagged(&path("tsvd.csv"), |b| self.tsvd.write_csv(b))?;
        write_tagged(&path("lsqr.csv"), |b| self.lsqr.write_csv(b))?;
        write_tagged(&path("bidiag.csv"), |b| self.state.bidiag(self.state.bidiag_k()).write_csv(b))?;
        write_tagged(&path("analysis.csv"), |b| write_analysis_csv(&self.records, &self.bounds, b))?;
        write_tagged(&path("ritz.csv"), |b| {
            write_ritz_csv(&self.records, &self.picard.sigma, b)
        })?;
        write_tagged(&path("bounds.csv"), |b| write_bounds_csv(&self.bounds, b))?;
        write_tagged(&path("decay.csv"), |b| self.write_decay_csv(b))?;
        write_tagged(&path("summary.csv"), |b| self.write_summary_csv(b))?;
        Ok(CSV_FILES.iter().map(|f| path(f)).collect())
    }

    fn write_decay_csv(&self, out: &mut Vec<u8>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "alpha_next", "beta_next", "alpha_beta_sum", "gamma", "below_gamma", "product_ok"])?;
        for d in &self.decay {
            w.write_record([
                d.k.to_string(),
                format!("{:e}", d.alpha_next),
                format!("{:e}", d.beta_next),
                format!("{:e}", d.sum()),
                format!("{:e}", d.gamma),
                (d.below_gamma as u8).to_string(),
                (d.product_ok as u8).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_summary_csv(&self, out: &mut Vec<u8>) -> Result<()> {
        let s = &self.summary;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["key", "value"])?;
        let rows = [
            ("problem", self.problem.name.clone()),
            ("n", self.config.n.to_string()),
            ("noise", format!("{:e}", self.config.epsilon)),
            ("seed", self.config.seed.to_string()),
            ("kmax", self.config.kmax.to_string()),
            ("generator", GENERATOR.to_string()),
            ("kstar", s.kstar.to_string()),
            ("k0", s.k0.to_string()),
            ("k0_naive", s.k0_naive.to_string()),
            ("k0_realized", s.k0_realized.to_string()),
            ("best_error_lsqr", format!("{:e}", s.best_error_lsqr)),
            ("best_error_tsvd", format!("{:e}", s.best_error_tsvd)),
            ("first_natural_order_failure", opt(s.first_natural_order_failure)),
            ("first_near_best_failure", opt(s.first_near_best_failure)),
            ("breakdown", opt(s.breakdown)),
            ("analysed_steps", s.analysed_steps.to_string()),
            ("invariant_violations", s.invariant_violations.to_string()),
        ];
        for (k, v) in rows {
            w.write_record([k, v.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the configuration and writes CSVs, then renders the requested
/// panels from the CSVs just written.
pub fn run(config: &ExperimentConfig) -> Result<RunArtifact> {
    let results = compute(config)?;
    let dir = config.out.clone();
    let csv = results.write_csvs(&dir)?;
    let svg = config
        .panels
        .iter()
        .map(|&p| render_panel(p, &dir))
        .collect::<Result<Vec<_>>>()?;
    info!("{config}: wrote {} CSV and {} SVG files to {}", csv.len(), svg.len(), dir.display());
    Ok(RunArtifact {
        dir,
        csv,
        svg,
        summary: results.summary,
        violations: results.violations,
    })
}

/// Key indices re-derived from the CSVs of a run directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recomputed {
    pub kstar: usize,
    pub k0: usize,
    pub k0_realized: usize,
    pub first_natural_order_failure: Option<usize>,
}

fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best + 1
}

/// Recomputes the summary indices from the traces, so they can be checked
/// against `summary.csv`.
pub fn recompute_summary(dir: &Path) -> Result<Recomputed> {
    let lsqr = read_table(&dir.join("lsqr.csv"))?;
    let tsvd = read_table(&dir.join("tsvd.csv"))?;
    let picard = read_table(&dir.join("picard.csv"))?;
    let analysis = read_table(&dir.join("analysis.csv"))?;
    let eta = picard.column_f64("eta")?.first().copied().unwrap_or(0.0);
    let k = analysis.column_usize("k")?;
    let natural = analysis.column_usize("natural_order")?;
    Ok(Recomputed {
        kstar: argmin_first(&lsqr.column_f64("rel_error")?),
        k0: transition_index(&picard.column_f64("abs_uiTb")?, eta, PicardOptions::default()),
        k0_realized: argmin_first(&tsvd.column_f64("rel_error")?),
        first_natural_order_failure: k.iter().zip(&natural).find(|(_, &f)| f == 0).map(|(k, _)| *k),
    })
}

/// Summary indices as written in `summary.csv`.
pub fn read_summary(dir: &Path) -> Result<Recomputed> {
    let t = read_table(&dir.join("summary.csv"))?;
    let index = |key: &str| -> Result<usize> {
        t.lookup(key)?
            .parse()
            .map_err(|_| crate::error::Error::Schema(format!("summary {key} is not an index")))
    };
    let failure = t.lookup("first_natural_order_failure")?;
    Ok(Recomputed {
        kstar: index("kstar")?,
        k0: index("k0")?,
        k0_realized: index("k0_realized")?,
        first_natural_order_failure: if failure == "none" {
            None
        } else {
            Some(index("first_natural_order_failure")?)
        },
    })
}
