use std::fmt::Write;

use crate::dynamics::Trace;

/// One row per `(t, agent, slot)`, agents 1-based, coordinates at 17
/// significant digits.
pub fn trace_csv(trace: &Trace) -> String {
    let first = &trace.states[0];
    let mut out = String::from("t,agent,slot");
    for i in 0..first.p() {
        write!(out, ",x{i}").unwrap();
    }
    out.push('\n');
    for (t, s) in trace.states.iter().enumerate() {
        for k in 0..s.n() {
            for j in 0..s.h() {
                write!(out, "{t},{},{j}", k + 1).unwrap();
                for c in s.get(k, j).coords() {
                    write!(out, ",{c:.16e}").unwrap();
                }
                out.push('\n');
            }
        }
    }
    out
}

const W: f64 = 420.0;
const PAD: f64 = 30.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Trajectories of the first two coordinates (left) and `mu` against time
/// (right).
pub fn plot_svg(trace: &Trace, mu: &[f64]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        2.0 * W,
        W
    )
    .unwrap();
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let first = &trace.states[0];
    let coord = |k: usize, t: usize, i: usize| trace.states[t].current(k).coords().get(i).copied().unwrap_or(0.0);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for t in 0..trace.len() {
        for k in 0..first.n() {
            for i in 0..2 {
                lo[i] = lo[i].min(coord(k, t, i));
                hi[i] = hi[i].max(coord(k, t, i));
            }
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let sx = |x: f64| PAD + (x - lo[0]) / span * (W - 2.0 * PAD);
    let sy = |y: f64| W - PAD - (y - lo[1]) / span * (W - 2.0 * PAD);
    writeln!(out, r#"<text x="{PAD}" y="18">trajectories</text>"#).unwrap();
    for k in 0..first.n() {
        let pts: Vec<String> = (0..trace.len())
            .map(|t| format!("{:.2},{:.2}", sx(coord(k, t, 0)), sy(coord(k, t, 1))))
            .collect();
        let color = COLORS[k % COLORS.len()];
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"><title>agent {}</title></circle>"#,
            sx(coord(k, 0, 0)),
            sy(coord(k, 0, 1)),
            k + 1
        )
        .unwrap();
    }

    let top = mu.iter().copied().fold(0.0, f64::max).max(1e-12);
    let steps = (mu.len().max(2) - 1) as f64;
    let mx = |t: usize| W + PAD + t as f64 / steps * (W - 2.0 * PAD);
    let my = |m: f64| W - PAD - m / top * (W - 2.0 * PAD);
    writeln!(out, r#"<text x="{}" y="18">mu(V) against t, max {top:.4e}</text>"#, W + PAD).unwrap();
    writeln!(
        out,
        r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#888"/>"##,
        W + PAD,
        W - PAD,
        2.0 * W - PAD
    )
    .unwrap();
    let pts: Vec<String> = mu
        .iter()
        .enumerate()
        .map(|(t, &m)| format!("{:.2},{:.2}", mx(t), my(m)))
        .collect();
    writeln!(
        out,
        r#"<polyline fill="none" stroke="black" stroke-width="1" points="{}"/>"#,
        pts.join(" ")
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::builtin;

    #[test]
    fn csv_header_and_row_count() {
        let mut s = builtin("example4-current").unwrap();
        s.horizon = 3;
        let tr = s.run().unwrap();
        let csv = trace_csv(&tr);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,agent,slot,x0,x1");
        assert_eq!(lines.len(), 1 + 4 * 3 * 2);
        assert_eq!(lines[1], "0,1,0,0.0000000000000000e0,0.0000000000000000e0");
        assert_eq!(lines[3], "0,2,0,2.0000000000000000e0,0.0000000000000000e0");
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let tr = builtin("split-groups").unwrap().run().unwrap();
        let svg = plot_svg(&tr, &vec![1.0; tr.len()]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 4);
    }
}
