use std::fmt::Write;

use clap::ValueEnum;
use halley_cert::certificate::ConvergenceCertificate;
use halley_cert::hammerstein::{table1_csv, SolveCheckReport, Table1Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

/// Six significant digits.
pub fn human(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, v)
    } else {
        format!("{v:.5e}")
    }
}

/// Seventeen significant digits.
pub fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn certificate(c: &ConvergenceCertificate, format: Format) -> String {
    let kind = serde_json::to_value(c.kind).expect("enum serializes");
    let verdict = serde_json::to_value(c.verdict).expect("enum serializes");
    let (kind, verdict) = (kind.as_str().unwrap_or_default(), verdict.as_str().unwrap_or_default());
    match format {
        Format::Json => json(c),
        Format::Csv => format!(
            "kind,verdict,lhs,rhs,margin,t_star,uniqueness_radius,rate_constant\n{kind},{verdict},{},{},{},{},{},{}\n",
            full(c.criterion.lhs),
            full(c.criterion.rhs),
            full(c.criterion.margin),
            opt(c.t_star, full),
            opt(c.uniqueness_radius, full),
            opt(c.rate_constant, full),
        ),
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(s, "{kind} certificate: {verdict}");
            let _ = writeln!(
                s,
                "  criterion      {} < {}  (margin {})",
                human(c.criterion.lhs),
                human(c.criterion.rhs),
                human(c.criterion.margin)
            );
            if let (Some(t), Some(u), Some(r)) = (c.t_star, c.uniqueness_radius, c.rate_constant) {
                let _ = writeln!(s, "  existence      {}", human(t));
                let _ = writeln!(s, "  uniqueness     {}", human(u));
                let _ = writeln!(s, "  rate constant  {}", human(r));
                let _ = writeln!(s, "  k  t_k            t* - t_k");
                for (k, (t, e)) in c.sequence.iter().zip(&c.apriori_errors).enumerate() {
                    let _ = writeln!(s, "  {k:<2} {:<14} {}", human(*t), human(*e));
                }
            }
            for note in &c.notes {
                let _ = writeln!(s, "  note: {note}");
            }
            s
        }
    }
}

pub fn table1(rows: &[Table1Row], format: Format) -> String {
    match format {
        Format::Json => json(&rows),
        Format::Csv => table1_csv(rows),
        Format::Human => {
            let mut s = String::from("lambda      existence   uniqueness\n");
            for r in rows {
                let (e, u) = match (r.certified, r.existence, r.uniqueness) {
                    (false, _, _) => ("not certified".to_string(), String::new()),
                    (true, e, u) => (opt(e, human), u.map(human).unwrap_or_else(|| "inf".into())),
                };
                let _ = writeln!(s, "{:<11} {e:<11} {u}", human(r.lambda));
            }
            s
        }
    }
}

pub fn solve_report(r: &SolveCheckReport, format: Format) -> String {
    let bound_rows = r.error_bound.as_ref().map(|b| b.rows.as_slice()).unwrap_or_default();
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let mut s = String::from("k,residual,step,lf_norm,error,apriori_bound\n");
            for (k, res) in r.trace.residual_norms.iter().enumerate() {
                let row = bound_rows.get(k);
                let _ = writeln!(
                    s,
                    "{k},{},{},{},{},{}",
                    full(*res),
                    opt(k.checked_sub(1).and_then(|j| r.trace.step_norms.get(j)).copied(), full),
                    opt(r.trace.lf_norms.get(k).copied(), full),
                    opt(row.map(|b| b.error), full),
                    opt(row.map(|b| b.bound), full),
                );
            }
            s
        }
        Format::Human => {
            let mut s = String::new();
            let _ = writeln!(s, "hammerstein lambda = {}, nodes = {}", human(r.lambda), r.nodes);
            let _ = writeln!(s, "  stop reason     {:?}", r.trace.stop_reason);
            let _ = writeln!(s, "  iterations      {}", r.iterations);
            let _ = writeln!(s, "  final residual  {}", human(r.final_residual));
            let _ = writeln!(s, "  |u* - u0|       {}", human(r.distance_from_start));
            if let Some(q) = r.trace.q_order_estimate {
                let _ = writeln!(s, "  q-order         {}", human(q));
            }
            if let Some(t) = r.certificate.as_ref().and_then(|c| c.t_star) {
                let _ = writeln!(s, "  t*              {}", human(t));
            }
            if let Some(w) = r.within_existence_ball {
                let _ = writeln!(s, "  in existence ball  {}", if w { "yes" } else { "NO" });
            }
            if let Some(b) = &r.error_bound {
                let _ = writeln!(s, "  error bounds    {}", if b.all_pass { "pass" } else { "FAIL" });
                for row in &b.rows {
                    let _ = writeln!(
                        s,
                        "    k={} |x*-x_k| = {} <= {}  {}",
                        row.k,
                        human(row.error),
                        human(row.bound),
                        if row.within_bound && row.cubic_holds { "ok" } else { "fail" }
                    );
                }
            }
            for note in &r.notes {
                let _ = writeln!(s, "  note: {note}");
            }
            s
        }
    }
}
