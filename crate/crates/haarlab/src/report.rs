//! Deterministic rendering: CSV tables, JSON documents, and SVG charts.
//!
//! Golden-file stability is the point. Floats always render through
//! `fmt_f64` (17 significant digits, canonical negative zero), exact values
//! through `fmt_rat`, and JSON objects keep insertion order, so a fixed
//! config and seed reproduce every emitted byte.

use crate::exact::{fmt_f64, fmt_rat, Scalar, Value};
use crate::riesz::{Certificate, IdentityReport, LemmaReport, LpScanReport, RieszParams, TailRow};
use crate::search::{ScalingTable, SearchResult};

/// Minimal JSON document model; `render` emits compact single-line JSON
/// with keys in insertion order.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i128),
    Float(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(&'static str, Json)>),
}

impl Json {
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s);
        s
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(v) => out.push_str(&v.to_string()),
            Json::Float(x) => out.push_str(&fmt_f64(*x)),
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\r' => out.push_str("\\r"),
                        '\t' => out.push_str("\\t"),
                        c if (c as u32) < 0x20 => {
                            out.push_str(&format!("\\u{:04x}", c as u32))
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                out.push('[');
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    it.write(out);
                }
                out.push(']');
            }
            Json::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('"');
                    out.push_str(k);
                    out.push_str("\":");
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

/// Exact quantities become strings (lossless), floats become numbers.
pub fn json_value(v: &Value) -> Json {
    match v {
        Value::Int(i) => Json::Int(*i),
        Value::Exact(r) => Json::Str(fmt_rat(r)),
        Value::Float(x) => Json::Float(*x),
    }
}

fn json_scalar<T: Scalar>(v: &T) -> Json {
    json_value(&v.to_value())
}

/// CSV table: comma-separated, header row, LF line endings.
pub struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: Vec<&'static str>) -> Self {
        Csv { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn params_fields(p: &RieszParams) -> Vec<(&'static str, Json)> {
    vec![
        ("n", Json::Int(p.n as i128)),
        ("d", Json::Int(p.d as i128)),
        ("a", Json::Float(p.a)),
        ("kappa", Json::Float(p.kappa)),
        ("eps", Json::Float(p.eps)),
        ("b", Json::Float(p.b)),
        ("q", Json::Int(p.q as i128)),
        ("q_formulaic", Json::Int(p.q_formulaic as i128)),
        ("q_overridden", Json::Bool(p.q_overridden)),
        ("rho_tilde", Json::Float(p.rho_tilde_effective())),
        ("rho", Json::Float(p.rho)),
        (
            "rho_tilde_exact",
            p.rho_tilde_exact
                .as_ref()
                .map(|r| Json::Str(fmt_rat(r)))
                .unwrap_or(Json::Null),
        ),
        (
            "blocks",
            Json::Arr(
                p.partition
                    .blocks()
                    .iter()
                    .map(|(lo, hi)| {
                        Json::Arr(vec![Json::Int(*lo as i128), Json::Int(*hi as i128)])
                    })
                    .collect(),
            ),
        ),
    ]
}

pub fn certificate_json<T: Scalar>(p: &RieszParams, c: &Certificate<T>) -> Json {
    let mut fields = params_fields(p);
    fields.push(("mode", Json::Str(mode_name::<T>().into())));
    fields.push(("inner", json_scalar(&c.inner)));
    fields.push(("psi_l1", json_scalar(&c.psi_l1)));
    fields.push(("bound", json_scalar(&c.bound)));
    fields.push(("linf_exact", Json::Int(c.linf_exact as i128)));
    fields.push(("principal", json_scalar(&c.principal)));
    fields.push((
        "error_terms",
        Json::Arr(c.error_terms.iter().map(json_scalar).collect()),
    ));
    fields.push(("residual", json_scalar(&c.residual)));
    fields.push(("sound", Json::Bool(c.sound)));
    fields.push(("shape_count", Json::Int(c.shape_count as i128)));
    fields.push(("l2_floor", Json::Float(c.l2_floor)));
    fields.push(("eta", Json::Float(c.eta)));
    fields.push(("n_pow_eta", Json::Float(c.n_pow_eta)));
    fields.push(("gain", Json::Float(c.gain)));
    fields.push(("principal_reference", Json::Float(c.principal_reference)));
    Json::Obj(fields)
}

pub fn mode_name<T: Scalar>() -> &'static str {
    if T::EXACT {
        "exact"
    } else {
        "float"
    }
}

pub fn identity_json<T: Scalar>(reports: &[IdentityReport<T>]) -> Json {
    Json::Arr(
        reports
            .iter()
            .map(|r| {
                Json::Obj(vec![
                    ("block", Json::Int(r.block as i128)),
                    ("lhs", json_scalar(&r.lhs)),
                    ("principal", json_scalar(&r.principal)),
                    ("error_term", json_scalar(&r.error_term)),
                    ("residual", json_scalar(&r.residual)),
                ])
            })
            .collect(),
    )
}

/// One row per (quantity, block, p). `exact` is empty when the pipeline ran
/// in float mode or the quantity is inherently float.
pub fn lemma_csv<T: Scalar>(rep: &LemmaReport<T>) -> Csv {
    let mut csv = Csv::new(vec!["quantity", "block", "p", "exact", "float"]);
    let scalar_row = |csv: &mut Csv, name: &str, block: String, p: String, v: &T| {
        csv.push(vec![
            name.into(),
            block,
            p,
            v.to_value().exact_string(),
            f(v.to_f64()),
        ]);
    };
    scalar_row(&mut csv, "psi_l1", String::new(), String::new(), &rep.psi_l1);
    scalar_row(&mut csv, "psi_l2_sq", String::new(), String::new(), &rep.psi_l2_sq);
    csv.push(vec![
        "psi_l2".into(),
        String::new(),
        String::new(),
        String::new(),
        f(rep.psi_l2_sq.to_f64().sqrt()),
    ]);
    scalar_row(&mut csv, "psi_min", String::new(), String::new(), &rep.psi_min);
    csv.push(vec![
        "psi_neg_mass".into(),
        String::new(),
        String::new(),
        format!("{}/{}", rep.psi_neg_cells, rep.total_cells),
        f(rep.psi_neg_cells as f64 / rep.total_cells as f64),
    ]);
    for (j, v) in rep.psi_excl_l2_sq.iter().enumerate() {
        scalar_row(&mut csv, "psi_excl_l2_sq", (j + 1).to_string(), String::new(), v);
    }
    for (v_idx, v) in rep.prefix_l2_sq.iter().enumerate() {
        scalar_row(&mut csv, "prefix_l2_sq", (v_idx + 1).to_string(), String::new(), v);
    }
    let mut union_cells = 0u64;
    for (j, cells) in rep.block_neg_cells.iter().enumerate() {
        union_cells += cells;
        csv.push(vec![
            "block_neg_mass".into(),
            (j + 1).to_string(),
            String::new(),
            format!("{}/{}", cells, rep.total_cells),
            f(*cells as f64 / rep.total_cells as f64),
        ]);
    }
    csv.push(vec![
        "union_bound_neg_mass".into(),
        String::new(),
        String::new(),
        format!("{}/{}", union_cells, rep.total_cells),
        f(union_cells as f64 / rep.total_cells as f64),
    ]);
    for row in &rep.phi {
        csv.push(vec![
            "phi_linf".into(),
            row.t.to_string(),
            String::new(),
            row.linf.to_string(),
            f(row.linf as f64),
        ]);
        for (p, mom) in &row.moments {
            csv.push(vec![
                "phi_moment".into(),
                row.t.to_string(),
                p.to_string(),
                fmt_rat(mom),
                f(mom.to_f64()),
            ]);
            csv.push(vec![
                "phi_norm".into(),
                row.t.to_string(),
                p.to_string(),
                String::new(),
                f(mom.to_f64().powf(1.0 / *p as f64)),
            ]);
        }
    }
    csv
}

pub fn tails_csv(t: usize, rows: &[TailRow]) -> Csv {
    let mut csv = Csv::new(vec!["block", "x", "cells", "mass_exact", "mass", "exp_minus_x_sq"]);
    for r in rows {
        csv.push(vec![
            t.to_string(),
            f(r.x),
            r.cells.to_string(),
            fmt_rat(&r.mass),
            f(r.mass.to_f64()),
            f(r.reference),
        ]);
    }
    csv
}

pub fn lp_csv(rep: &LpScanReport) -> Csv {
    let mut csv = Csv::new(vec!["p", "moment_exact", "norm"]);
    for row in &rep.rows {
        csv.push(vec![row.p.to_string(), fmt_rat(&row.moment), f(row.norm)]);
    }
    csv
}

pub fn lp_summary_json(rep: &LpScanReport) -> Json {
    Json::Obj(vec![
        ("slope", Json::Float(rep.slope)),
        (
            "rows",
            Json::Arr(
                rep.rows
                    .iter()
                    .map(|r| {
                        Json::Obj(vec![
                            ("p", Json::Int(r.p as i128)),
                            ("moment", Json::Str(fmt_rat(&r.moment))),
                            ("norm", Json::Float(r.norm)),
                        ])
                    })
                    .collect(),
            ),
        ),
    ])
}

pub fn scaling_csv(t: &ScalingTable) -> Csv {
    let mut csv = Csv::new(vec![
        "n",
        "d",
        "trial",
        "seed",
        "linf_random",
        "linf_searched",
        "l2_floor",
        "ref_half",
        "ref_conj",
        "ref_thm",
    ]);
    for r in &t.rows {
        csv.push(vec![
            r.n.to_string(),
            r.d.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.linf_random.to_string(),
            r.linf_searched.to_string(),
            f(r.l2_floor),
            f(r.ref_half),
            f(r.ref_conj),
            f(r.ref_thm),
        ]);
    }
    csv
}

pub fn scaling_summary_json(t: &ScalingTable) -> Json {
    Json::Obj(vec![
        (
            "per_n",
            Json::Arr(
                t.summaries
                    .iter()
                    .map(|s| {
                        Json::Obj(vec![
                            ("n", Json::Int(s.n as i128)),
                            ("median_random", Json::Float(s.median_random)),
                            ("min_random", Json::Int(s.min_random as i128)),
                            ("median_searched", Json::Float(s.median_searched)),
                            ("min_searched", Json::Int(s.min_searched as i128)),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("slope_random", Json::Float(t.slope_random)),
        ("slope_searched", Json::Float(t.slope_searched)),
    ])
}

/// Sign-file JSON for a search result, with the run's metadata attached
/// under a key plain sign-file loaders ignore.
pub fn search_result_file(r: &SearchResult) -> String {
    let meta = Json::Obj(vec![
        ("strategy", Json::Str(r.strategy.name().into())),
        (
            "seed",
            r.seed.map(|s| Json::Int(s as i128)).unwrap_or(Json::Null),
        ),
        (
            "budget",
            r.budget.map(|b| Json::Int(b as i128)).unwrap_or(Json::Null),
        ),
        ("restarts", Json::Int(r.restarts as i128)),
        ("evaluations", Json::Int(r.evaluations as i128)),
        ("best_value", Json::Int(r.best_value as i128)),
        ("l2_floor", Json::Float(r.l2_floor())),
        (
            "trace",
            Json::Arr(
                r.trace
                    .iter()
                    .map(|(e, v)| {
                        Json::Arr(vec![Json::Int(*e as i128), Json::Int(*v as i128)])
                    })
                    .collect(),
            ),
        ),
    ]);
    r.best_signs.to_json_with_extra(Some(("search", meta.render())))
}

/// One named series of (x, y) points for the SVG chart.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Self-contained log-log chart: one polyline per series, decade gridlines,
/// no external assets.
pub fn svg_loglog(series: &[Series], title: &str, xlabel: &str, ylabel: &str) -> String {
    const W: f64 = 800.0;
    const H: f64 = 560.0;
    const L: f64 = 70.0;
    const R: f64 = 780.0;
    const T: f64 = 46.0;
    const B: f64 = 500.0;
    const PALETTE: [&str; 6] =
        ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for (x, y) in &s.points {
            if *x > 0.0 && *y > 0.0 {
                xs.push(x.log10());
                ys.push(y.log10());
            }
        }
    }
    let (mut x0, mut x1) = bounds(&xs);
    let (mut y0, mut y1) = bounds(&ys);
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let px = |lx: f64| L + (lx - x0) / (x1 - x0) * (R - L);
    let py = |ly: f64| B - (ly - y0) / (y1 - y0) * (B - T);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        (L + R) / 2.0,
        xml_escape(title)
    ));

    // Decade gridlines with 10^k labels.
    for k in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = px(k as f64);
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{T}\" x2=\"{x:.2}\" y2=\"{B}\" stroke=\"#dddddd\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">1e{k}</text>\n",
            B + 18.0
        ));
    }
    for k in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let y = py(k as f64);
        out.push_str(&format!(
            "<line x1=\"{L}\" y1=\"{y:.2}\" x2=\"{R}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{k}</text>\n",
            L - 8.0,
            y + 4.0
        ));
    }
    out.push_str(&format!(
        "<rect x=\"{L}\" y=\"{T}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333333\"/>\n",
        R - L,
        B - T
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        (L + R) / 2.0,
        B + 40.0,
        xml_escape(xlabel)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        (T + B) / 2.0,
        (T + B) / 2.0,
        xml_escape(ylabel)
    ));

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|(x, y)| format!("{:.2},{:.2}", px(x.log10()), py(y.log10())))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            pts.join(" "),
            color
        ));
        let ly = T + 16.0 + 18.0 * i as f64;
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" stroke-width=\"3\"/>\n",
            R - 170.0,
            R - 140.0,
            color
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            R - 132.0,
            ly + 4.0,
            xml_escape(&s.name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in v {
        lo = lo.min(*x);
        hi = hi.max(*x);
    }
    if lo.is_infinite() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

fn pad(lo: &mut f64, hi: &mut f64) {
    if *hi - *lo < 1e-9 {
        *lo -= 0.5;
        *hi += 0.5;
    } else {
        let m = (*hi - *lo) * 0.06;
        *lo -= m;
        *hi += m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn json_rendering() {
        let doc = Json::Obj(vec![
            ("a", Json::Int(3)),
            ("b", Json::Float(0.375)),
            ("c", Json::Str("x\"y".into())),
            ("d", Json::Arr(vec![Json::Bool(true), Json::Null])),
        ]);
        assert_eq!(
            doc.render(),
            "{\"a\":3,\"b\":3.7500000000000000e-1,\"c\":\"x\\\"y\",\"d\":[true,null]}"
        );
        assert_eq!(json_value(&Value::Exact(rat(3, 8))).render(), "\"3/8\"");
    }

    #[test]
    fn csv_rendering() {
        let mut csv = Csv::new(vec!["a", "b"]);
        csv.push(vec!["1".into(), "x".into()]);
        assert_eq!(csv.render(), "a,b\n1,x\n");
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let series = vec![
            Series { name: "one".into(), points: vec![(1.0, 1.0), (2.0, 4.0)] },
            Series { name: "two <&>".into(), points: vec![(1.0, 2.0), (2.0, 8.0)] },
        ];
        let svg = svg_loglog(&series, "chart", "n", "value");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("two &lt;&amp;&gt;"));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
