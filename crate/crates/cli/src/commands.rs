//! One function per subcommand. Each returns the result document and the CSV
//! table for it.

use hcspherical::clt::CltConfig;
use hcspherical::measures::measure_moments_with;
use hcspherical::{
    clt_curve, gaussian_compare, moment_summary, oscillation_ratio_scan, run_lemma_suite, spherical_fn_grid,
    DefinitenessReport, DoubleCoset, Fault, FieldTag, GaussianReport, McPlan, MeasurePlan, MomentDesign, Result,
    Seed, VerifyConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, Resolved};

pub struct Outcome {
    pub result: Value,
    pub table: Table,
    /// Set by `verify` when a check failed.
    pub failed: bool,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn num(v: f64) -> String {
    // Shortest round-trip representation, as in the JSON output.
    serde_json::to_string(&v).unwrap_or_else(|_| "nan".into())
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("report types serialize")
}

fn plan(r: &Resolved) -> McPlan {
    McPlan::new(r.cfg.samples, Seed::new(r.cfg.seed)).with_partitions(r.cfg.partitions)
}

fn coset(r: &Resolved) -> DoubleCoset<f64> {
    DoubleCoset::new(r.cfg.field, r.chamber.clone().expect("resolved with a chamber point"))
}

pub fn run(r: &Resolved) -> Result<Outcome> {
    match r.cfg.command {
        Command::Spherical => spherical(r),
        Command::Moments => moments(r),
        Command::Clt => clt(r),
        Command::Osc => osc(r),
        Command::Verify => verify(r),
    }
}

fn lambda_header(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("lambda_{i}")).collect()
}

fn spherical(r: &Resolved) -> Result<Outcome> {
    let grid = r.grid.as_ref().expect("resolved with a grid");
    let values = spherical_fn_grid(&coset(r), grid, &plan(r))?;
    let mut header = lambda_header(r.cfg.n);
    header.extend(["re", "im", "std_error"].map(String::from));
    let rows = grid
        .iter()
        .zip(&values)
        .map(|(l, v)| {
            let mut row: Vec<String> = l.values().iter().map(|&x| num(x)).collect();
            row.extend([num(v.mean.re), num(v.mean.im), num(v.std_error)]);
            row
        })
        .collect();
    let points: Vec<Value> = grid
        .iter()
        .zip(&values)
        .map(|(l, v)| json!({"lambda": l.values(), "re": v.mean.re, "im": v.mean.im, "std_error": v.std_error}))
        .collect();
    Ok(Outcome {
        result: json!({ "samples": values.first().map_or(0, |v| v.samples), "values": points }),
        table: Table { header, rows },
        failed: false,
    })
}

fn matrix_rows(rows: &mut Vec<Vec<String>>, name: &str, m: &[Vec<f64>], se: Option<&[Vec<f64>]>) {
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let e = se.map_or(String::new(), |s| num(s[i][j]));
            rows.push(vec![name.into(), (i + 1).to_string(), (j + 1).to_string(), num(v), e]);
        }
    }
}

fn moments(r: &Resolved) -> Result<Outcome> {
    let (summary, definiteness, design) = match (&r.chamber, &r.measure) {
        (Some(_), _) => {
            let s = moment_summary(&coset(r), &plan(r))?;
            let d = DefinitenessReport::from_matrix(&s.sigma2);
            (s, d, None)
        }
        (None, Some(nu)) => {
            let design = if nu.atoms().is_some() {
                MomentDesign::Atoms
            } else {
                MomentDesign::Paired
            };
            let m = measure_moments_with(nu, &MeasurePlan::new(0, plan(r)), design)?;
            (m.moments, m.definiteness, Some(design))
        }
        (None, None) => unreachable!("resolved with a chamber point or a measure"),
    };
    let mut rows = Vec::new();
    for (i, (&v, &e)) in summary.m1.iter().zip(&summary.m1_se).enumerate() {
        rows.push(vec!["m1".into(), (i + 1).to_string(), String::new(), num(v), num(e)]);
    }
    matrix_rows(&mut rows, "m2", &summary.m2, Some(&summary.m2_se));
    matrix_rows(&mut rows, "sigma2", &summary.sigma2, Some(&summary.sigma2_se));
    for (i, &v) in definiteness.eigenvalues.iter().enumerate() {
        rows.push(vec!["sigma2_eigenvalue".into(), (i + 1).to_string(), String::new(), num(v), String::new()]);
    }
    rows.push(vec![
        "positive_definite".into(),
        String::new(),
        String::new(),
        (definiteness.positive_definite as u8).to_string(),
        String::new(),
    ]);
    if let Some(k) = &definiteness.kernel_direction {
        for (i, &v) in k.iter().enumerate() {
            rows.push(vec!["kernel_direction".into(), (i + 1).to_string(), String::new(), num(v), String::new()]);
        }
    }
    Ok(Outcome {
        result: json!({ "design": design, "moments": to_value(&summary), "definiteness": to_value(&definiteness) }),
        table: Table {
            header: ["quantity", "i", "j", "value", "std_error"].map(String::from).to_vec(),
            rows,
        },
        failed: false,
    })
}

fn clt(r: &Resolved) -> Result<Outcome> {
    let nu = r.measure.as_ref().expect("resolved with a measure");
    let ks = r.cfg.k.clone().expect("resolved with walk lengths");
    let cfg = CltConfig {
        moment_samples: r.cfg.samples,
        partitions: r.cfg.partitions,
        ..CltConfig::default()
    };
    let trials = r.cfg.trials.expect("resolved with trials");
    let curve = clt_curve(nu, &ks, trials, Seed::new(r.cfg.seed), &cfg)?;
    let reports: Vec<GaussianReport> = curve.iter().map(gaussian_compare).collect::<Result<_>>()?;
    let first = &curve[0];
    let mut rows = Vec::new();
    for (s, g) in curve.iter().zip(&reports) {
        let min_p = g.per_direction_ks.iter().map(|d| d.p_value).fold(1.0, f64::min);
        rows.push(vec![
            s.k.to_string(),
            num(g.mean_norm),
            num(g.cov_frobenius_rel_err),
            num(g.mardia_skewness),
            num(g.mardia_skewness_p),
            num(g.mardia_kurtosis_z),
            num(min_p),
            (g.degenerate_covariance as u8).to_string(),
        ]);
    }
    let points: Vec<Value> = curve
        .iter()
        .zip(&reports)
        .map(|(s, g)| {
            let mut v = json!({ "k": s.k, "report": to_value(g) });
            if r.emit_statistics {
                v["statistics"] = to_value(&s.statistics);
            }
            v
        })
        .collect();
    Ok(Outcome {
        result: json!({
            "clt_config": to_value(&cfg),
            "centering": to_value(&first.centering),
            "nu_moments": to_value(&first.nu_moments),
            "curve": points,
        }),
        table: Table {
            header: [
                "k",
                "mean_norm",
                "cov_frobenius_rel_err",
                "mardia_skewness",
                "mardia_skewness_p",
                "mardia_kurtosis_z",
                "min_ks_p_value",
                "degenerate_covariance",
            ]
            .map(String::from)
            .to_vec(),
            rows,
        },
        failed: false,
    })
}

fn osc(r: &Resolved) -> Result<Outcome> {
    let grid = r.grid.as_ref().expect("resolved with a grid");
    let rep = oscillation_ratio_scan(&coset(r), grid, &plan(r))?;
    let mut header = lambda_header(r.cfg.n);
    header.extend(
        [
            "norm",
            "ratio2",
            "ratio2_se",
            "ratio1",
            "ratio1_se",
            "ratio1_conjugate",
            "ratio1_conjugate_se",
        ]
        .map(String::from),
    );
    let rows = (0..grid.len())
        .map(|i| {
            let mut row: Vec<String> = grid[i].values().iter().map(|&x| num(x)).collect();
            row.extend([
                num(rep.norms[i]),
                num(rep.ratios2[i]),
                num(rep.ratios2_se[i]),
                num(rep.ratios1[i]),
                num(rep.ratios1_se[i]),
                num(rep.ratios1_conjugate[i]),
                num(rep.ratios1_conjugate_se[i]),
            ]);
            row
        })
        .collect();
    Ok(Outcome {
        result: to_value(&rep),
        table: Table { header, rows },
        failed: false,
    })
}

fn verify(r: &Resolved) -> Result<Outcome> {
    let d = VerifyConfig::default();
    let cfg = VerifyConfig {
        fields: if r.field_given { vec![r.cfg.field] } else { FieldTag::ALL.to_vec() },
        dims: if r.cfg.n > 0 { vec![r.cfg.n] } else { d.dims },
        instances: r.cfg.trials.unwrap_or(d.instances),
        neg_moment_samples: r.cfg.samples,
        seed: Seed::new(r.cfg.seed),
        partitions: r.cfg.partitions,
        fault: r.cfg.fault.as_ref().map(|_| Fault::CorruptUnitary),
    };
    let rep = run_lemma_suite(&cfg)?;
    let rows = rep
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                (if c.passed { "pass" } else { "fail" }).to_string(),
                c.instances.to_string(),
                num(c.max_deviation),
                num(c.tolerance),
                c.detail.clone(),
            ]
        })
        .collect();
    Ok(Outcome {
        failed: !rep.all_passed(),
        result: json!({ "verify_config": to_value(&cfg), "all_passed": rep.all_passed(), "checks": to_value(&rep.checks) }),
        table: Table {
            header: ["check", "status", "instances", "max_deviation", "tolerance", "detail"]
                .map(String::from)
                .to_vec(),
            rows,
        },
    })
}
