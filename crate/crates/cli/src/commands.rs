use anyhow::{bail, Context, Result};
use dynmap::divisibility::{self, DivisibilityReport, ScanOptions, Verdict};
use dynmap::gaussian::{self, GaussianPair};
use dynmap::idempotent::{self, Regime};
use dynmap::{schur, ContractivityOptions, Error};
use serde_json::json;

use crate::config::{GridSpec, RunConfig};
use crate::output::{CsvRow, Outcome, Status};
use crate::presets;

fn scan_options(cfg: &RunConfig) -> ScanOptions {
    ScanOptions { h: cfg.h, tau_slope: cfg.tau_slope }
}

fn contractivity_options(cfg: &RunConfig) -> ContractivityOptions {
    ContractivityOptions { samples: cfg.samples, seed: cfg.seed, ..Default::default() }
}

fn scan_rows(rep: &DivisibilityReport) -> Vec<CsvRow> {
    rep.rows
        .iter()
        .map(|r| CsvRow {
            t: r.t,
            witness_id: r.witness_id,
            value: r.trace_norm,
            derivative: r.derivative,
            flag: r.derivative > rep.tau_slope,
        })
        .collect()
}

fn status_of(violation: bool) -> Status {
    if violation {
        Status::Violation
    } else {
        Status::Clean
    }
}

/// `scan-p` and `scan-cp`.
pub fn scan(cfg: &RunConfig, extended: bool) -> Result<Outcome> {
    let name = cfg.require_preset()?;
    let fam = presets::family(name, cfg)?;
    let witnesses = presets::witnesses(name, &fam, cfg, extended)?;
    let grid = cfg.grid_or(fam.t_domain());
    let opts = scan_options(cfg);
    let rep = if extended {
        divisibility::cp_divisibility_scan(&fam, &witnesses, &grid, &opts)
    } else {
        divisibility::p_divisibility_scan(&fam, &witnesses, &grid, &opts)
    }
    .with_context(|| format!("scanning `{name}`"))?;
    let mut report = rep.to_json_value();
    report["preset"] = json!(name);
    report["dim"] = json!(fam.dim());
    report["witness_count"] = json!(witnesses.len());
    Ok(Outcome {
        summary: format!("{name}: {} (max derivative {:.6e})", rep.verdict, rep.max_derivative),
        rows: Some(scan_rows(&rep)),
        status: status_of(rep.verdict.is_violation()),
        report,
    })
}

pub fn idempotent(cfg: &RunConfig) -> Result<Outcome> {
    let name = cfg.require_preset()?;
    if !idempotent::PRESETS.contains(&name) {
        bail!("`idempotent` needs one of {}, got `{name}`", idempotent::PRESETS.join(", "));
    }
    let fam = idempotent::preset_sized(name, cfg.n, cfg.k)?;
    let domain = fam.family().t_domain();
    let class_grid = cfg.grid.unwrap_or(GridSpec { points: 11, ..GridSpec::default_for(domain) }).points();
    let classification = idempotent::classify_family(&fam, &class_grid, &contractivity_options(cfg))?;
    let witnesses = presets::witnesses(name, fam.family(), cfg, false)?;
    let rep = divisibility::p_divisibility_scan(fam.family(), &witnesses, &class_grid, &scan_options(cfg))?;
    let violation = classification.regime != Regime::CpDivisible || rep.verdict.is_violation();
    Ok(Outcome {
        summary: format!(
            "{name}: regime {} (discrepancy: {}), p-scan {}",
            classification.regime, classification.any_discrepancy, rep.verdict
        ),
        report: json!({
            "preset": name,
            "regime": classification.regime,
            "classification": classification,
            "p_scan": rep.to_json_value(),
        }),
        rows: Some(scan_rows(&rep)),
        status: status_of(violation),
    })
}

pub fn schur(cfg: &RunConfig) -> Result<Outcome> {
    if let Some(p) = cfg.preset.as_deref().filter(|p| *p != "schur") {
        bail!("`schur` takes no preset other than `schur`, got `{p}`");
    }
    let n = cfg.n.unwrap_or(presets::SCHUR_DEFAULT_N);
    let fam = schur::schur_family(&schur::SchurFamilyConfig::new(n, (0.0, schur::T_MAX))?)?;
    let grid = cfg.grid_or(fam.t_domain());
    let h = cfg.h.unwrap_or_else(|| fam.default_step());
    let growth = schur::witness_growth(n, &grid, h)?;
    let opts = ScanOptions { h: Some(h), tau_slope: cfg.tau_slope };
    let p = divisibility::p_divisibility_scan(&fam, &[schur::witness(n, n)?], &grid, &opts)?;
    let cp = divisibility::cp_divisibility_scan(&fam, &[schur::cp_witness(n, n)?], &grid, &opts)?;
    let spectrum_error = grid
        .iter()
        .map(|&t| -> Result<f64> {
            let dense = schur::toeplitz_a(n, t)?.eigenvalues();
            let formula = schur::toeplitz_spectrum(n, t);
            Ok(dense.iter().zip(&formula).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        })
        .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)))?;
    let rows = growth
        .iter()
        .map(|r| CsvRow { t: r.t, witness_id: 0, value: r.trace_norm, derivative: r.derivative, flag: r.derivative > cfg.tau_slope })
        .collect();
    Ok(Outcome {
        summary: format!("schur n={n}: {} / {} (slope {:.6})", p.verdict, cp.verdict, schur::witness_slope(n)),
        status: status_of(p.verdict.is_violation() || cp.verdict.is_violation()),
        report: json!({
            "n": n,
            "slope": schur::witness_slope(n),
            "spectrum_max_error": spectrum_error,
            "p_verdict": p.verdict,
            "cp_verdict": cp.verdict,
            "growth": growth,
            "p_scan": p.to_json_value(),
            "cp_scan": cp.to_json_value(),
        }),
        rows: Some(rows),
    })
}

fn validate_channel_file(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.channel.as_ref().expect("checked by caller");
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pair = GaussianPair::from_json(&text).with_context(|| format!("validating {}", path.display()))?;
    Ok(Outcome {
        summary: format!("{}: valid {}-mode channel, det X = {:.6e}", path.display(), pair.modes(), pair.det_x()),
        report: json!({
            "m": pair.modes(),
            "det_x": pair.det_x(),
            "validity_min_eigenvalue": pair.validity_min_eigenvalue(),
            "X": gaussian::rows(pair.x()),
            "Y": gaussian::rows(pair.y()),
        }),
        rows: None,
        status: Status::Clean,
    })
}

pub fn gaussian(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.channel.is_some() {
        return validate_channel_file(cfg);
    }
    let name = cfg.require_preset()?;
    let domain = gaussian::preset_domain(name)
        .with_context(|| format!("unknown Gaussian preset `{name}`; expected one of {}", gaussian::PRESETS.join(", ")))?;
    let grid = cfg.grid_or(domain);
    let factor_checks = gaussian::preset_factors(name, grid[0]).map(|(r1, t, r2)| gaussian::check_factors(&r1, &t, &r2));
    let fam = match gaussian::preset(name) {
        Ok(f) => f,
        Err(e @ (Error::NotSymplectic { .. } | Error::InvalidDilation { .. })) => {
            return Ok(Outcome {
                summary: format!("{name}: validation failed: {e}"),
                report: json!({ "preset": name, "error": e.to_string(), "factor_checks": factor_checks }),
                rows: None,
                status: Status::Failed(e.to_string()),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let rep = gaussian::det_criterion_scan(&fam, &grid, cfg.h, cfg.tau_slope)?;
    let threshold = rep
        .rows
        .windows(2)
        .find(|w| w[0].ddet.signum() != w[1].ddet.signum())
        .and_then(|w| gaussian::derivative_sign_change(&fam, w[0].t, w[1].t, rep.h, 1e-9).ok());
    let rows = rep
        .rows
        .iter()
        .map(|r| CsvRow { t: r.t, witness_id: 0, value: r.det, derivative: r.ddet, flag: r.violation })
        .collect();
    Ok(Outcome {
        summary: match rep.first_violation {
            Some(t) => format!("{name}: NOT_P_DIVISIBLE (det X_t increases from t = {t})"),
            None => format!("{name}: det X_t non-increasing on the grid"),
        },
        status: status_of(rep.violation),
        report: json!({
            "preset": name,
            "verdict": if rep.violation { Some(Verdict::NotPDivisible) } else { None },
            "derivative_sign_change": threshold,
            "factor_checks": factor_checks,
            "scan": rep,
        }),
        rows: Some(rows),
    })
}

pub fn intermediate(cfg: &RunConfig) -> Result<Outcome> {
    let name = cfg.require_preset()?;
    let fam = presets::family(name, cfg)?;
    let (s, t) = cfg.times()?;
    let (verdict, mut report) = match divisibility::intermediate_map_with(&fam, s, t, cfg.rcond, &contractivity_options(cfg)) {
        Ok(im) => {
            let verdict = if !im.positive_evidence {
                Verdict::NotPDivisible
            } else if !im.cp {
                Verdict::NotCpDivisible
            } else {
                Verdict::CpEvidence
            };
            (verdict, im.to_json_value(s, t))
        }
        Err(Error::SingularChannel(sv)) => {
            let inc = divisibility::kernel_inclusion(&fam, s, t, cfg.rcond)?;
            let verdict = if inc.included { Verdict::DivisibleKernelOk } else { Verdict::NotDivisible };
            (verdict, json!({ "s": s, "t": t, "singular": sv, "kernel_inclusion": inc }))
        }
        Err(e) => return Err(e.into()),
    };
    report["verdict"] = json!(verdict);
    report["preset"] = json!(name);
    Ok(Outcome {
        summary: format!("{name}: {verdict} for s = {s}, t = {t}"),
        status: status_of(verdict.is_violation() || verdict == Verdict::NotPDivisible),
        report,
        rows: None,
    })
}
