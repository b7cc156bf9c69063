//! Histogram of reference draws with the realized values overlaid.

use std::fmt::Write as _;

use causalcheck::ppc::CheckResult;

pub const BINS: usize = 30;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 300.0;
const MARGIN: f64 = 40.0;

/// Bin counts of `values` over `BINS` equal bins on `[lo, hi]`; values on
/// the upper edge go in the last bin, values outside are ignored.
pub fn bin_counts(values: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    let mut counts = vec![0; BINS];
    let width = (hi - lo) / BINS as f64;
    for &v in values {
        if !(lo..=hi).contains(&v) {
            continue;
        }
        let k = if width > 0.0 {
            (((v - lo) / width) as usize).min(BINS - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    counts
}

/// Bins span the reference draws; the range is widened to include the
/// realized values so an extreme realization stays visible.
pub fn histogram(result: &CheckResult, title: &str) -> String {
    let point_mass = result.realized_is_point_mass();
    let (mut lo, mut hi) = min_max(&result.t_rep);
    let (olo, ohi) = min_max(&result.t_obs);
    lo = lo.min(olo);
    hi = hi.max(ohi);
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let rep = bin_counts(&result.t_rep, lo, hi);
    let obs = if point_mass {
        vec![0; BINS]
    } else {
        bin_counts(&result.t_obs, lo, hi)
    };
    let peak = rep.iter().chain(&obs).copied().max().unwrap_or(1).max(1) as f64;

    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let bar_w = plot_w / BINS as f64;
    let x_of = |v: f64| MARGIN + (v - lo) / (hi - lo) * plot_w;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    for (counts, fill) in [(&rep, "#4c72b0"), (&obs, "#dd4444")] {
        for (k, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let h = c as f64 / peak * plot_h;
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" fill-opacity="0.5"/>"#,
                MARGIN + k as f64 * bar_w,
                HEIGHT - MARGIN - h,
                bar_w,
                h
            )
            .unwrap();
        }
    }
    if point_mass {
        let x = x_of(result.t_obs[0]);
        writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dd4444" stroke-width="2"/>"##,
            MARGIN,
            HEIGHT - MARGIN
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    )
    .unwrap();
    for (v, anchor) in [(lo, "start"), (hi, "end")] {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#,
            x_of(v),
            HEIGHT - MARGIN + 16.0,
            format_tick(v)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">tail {:.3}, {:?}</text>"#,
        WIDTH - MARGIN,
        MARGIN,
        result.tail_prob,
        result.verdict
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn format_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
