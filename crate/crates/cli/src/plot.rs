use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Line plot of normalized weight entropy against `u`, with the plateau shaded.
pub fn trajectory_svg(u: &[f64], entropy: &[f64], plateau: Option<(f64, f64)>) -> String {
    let (u_lo, u_hi) = bounds(u);
    let sx = |v: f64| MARGIN + (v - u_lo) / (u_hi - u_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - v.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some((a, b)) = plateau {
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{MARGIN}" width="{:.2}" height="{}" fill="#ffd27f" opacity="0.5"/>"##,
            sx(a),
            (sx(b) - sx(a)).max(1.0),
            HEIGHT - 2.0 * MARGIN
        );
    }
    let _ = writeln!(
        s,
        r#"<path d="M{MARGIN} {top} L{MARGIN} {bot} L{right} {bot}" fill="none" stroke="black"/>"#,
        top = MARGIN,
        bot = HEIGHT - MARGIN,
        right = WIDTH - MARGIN
    );
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{tick}</text>"#,
            MARGIN - 6.0,
            sy(tick) + 4.0
        );
    }
    for tick in [u_lo, u_hi] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{tick}</text>"#,
            sx(tick),
            HEIGHT - MARGIN + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">u</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">normalized entropy</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let points: Vec<String> = u
        .iter()
        .zip(entropy)
        .filter(|(_, e)| e.is_finite())
        .map(|(&a, &e)| format!("{:.2},{:.2}", sx(a), sy(e)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f4e99" stroke-width="2"/>"##,
        points.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

fn bounds(u: &[f64]) -> (f64, f64) {
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || hi <= lo {
        (lo.min(0.0), lo.max(0.0) + 1.0)
    } else {
        (lo, hi)
    }
}
