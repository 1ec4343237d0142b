use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::disc::SpectralScalar;
use crate::error::{Error, Result};
use crate::flows::{FlowDesign, FlowKind};
use crate::real::Real;

/// Number of contour levels, evenly spaced strictly inside (−max|ψ|, max|ψ|).
const LEVELS: usize = 15;
/// ψ < 0 turns counterclockwise under u = (−ψ_θ/r, ψ_r).
const CCW: &str = "#7b3294";
const CW: &str = "#2166ac";
const ZERO: &str = "#888888";
const SIZE: f64 = 600.0;
const MAX_ROWS: usize = 256;

/// Values below this fraction of max|ψ| count as zero when counting cells.
const SIGN_TOL: f64 = 1e-9;

/// Rows of the physical lattice kept for contouring: radii and θ samples.
struct Lattice {
    r: Vec<f64>,
    theta: Vec<f64>,
    /// values[i * theta.len() + j]
    values: Vec<f64>,
}

fn lattice<T: Real>(psi: &SpectralScalar<T>) -> Lattice {
    let g = psi.grid();
    let phys = psi.to_physical();
    let nt = g.ntheta();
    let floor = psi.max_abs_coef().to_f64().unwrap() * 1e-8;
    let top = (1..g.modes())
        .rev()
        .find(|&m| (0..g.nr()).any(|k| (psi.a(m, k).abs() + psi.b(m, k).abs()).to_f64().unwrap() > floor))
        .unwrap_or(1);
    let tstride = (nt / (12 * top).max(360)).max(1);
    let rstride = g.nr().div_ceil(MAX_ROWS).max(1);
    let mut ks: Vec<usize> = (0..g.nr()).step_by(rstride).collect();
    if *ks.last().unwrap() != g.nr() - 1 {
        ks.push(g.nr() - 1);
    }
    let js: Vec<usize> = (0..nt).step_by(tstride).collect();
    let mut values = Vec::with_capacity(ks.len() * js.len());
    for &k in &ks {
        values.extend(js.iter().map(|&j| phys[k * nt + j].to_f64().unwrap()));
    }
    Lattice {
        r: ks.iter().map(|&k| g.r_nodes()[k].to_f64().unwrap()).collect(),
        theta: js.iter().map(|&j| g.theta(j).to_f64().unwrap()).collect(),
        values,
    }
}

/// Marching squares on the (r, θ) lattice, periodic in θ. Returns segments in
/// Cartesian coordinates.
fn contour_segments(l: &Lattice, level: f64) -> Vec<[(f64, f64); 2]> {
    let (nr, nt) = (l.r.len(), l.theta.len());
    let v = |i: usize, j: usize| l.values[i * nt + j % nt];
    let th = |j: usize| if j == nt { l.theta[0] + 2.0 * std::f64::consts::PI } else { l.theta[j] };
    let point = |(i0, j0): (usize, usize), (i1, j1): (usize, usize)| {
        let (a, b) = (v(i0, j0), v(i1, j1));
        let t = if a == b { 0.5 } else { ((level - a) / (b - a)).clamp(0.0, 1.0) };
        let r = l.r[i0] + t * (l.r[i1] - l.r[i0]);
        let a = th(j0) + t * (th(j1) - th(j0));
        (r * a.cos(), r * a.sin())
    };
    let mut segs = Vec::new();
    for i in 0..nr - 1 {
        for j in 0..nt {
            // Corners counterclockwise in index space: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
            let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let above: Vec<bool> = c.iter().map(|&(a, b)| v(a, b) >= level).collect();
            let case = above.iter().enumerate().fold(0, |s, (n, &b)| s | ((b as usize) << n));
            if case == 0 || case == 15 {
                continue;
            }
            let edge = |e: usize| point(c[e], c[(e + 1) % 4]);
            let crossing: Vec<usize> = (0..4).filter(|&e| above[e] != above[(e + 1) % 4]).collect();
            if crossing.len() == 2 {
                segs.push([edge(crossing[0]), edge(crossing[1])]);
            } else {
                // Saddle: the centre value decides which corners connect.
                let centre = c.iter().map(|&(a, b)| v(a, b)).sum::<f64>() / 4.0;
                if (centre >= level) == above[0] {
                    segs.push([edge(0), edge(1)]);
                    segs.push([edge(2), edge(3)]);
                } else {
                    segs.push([edge(3), edge(0)]);
                    segs.push([edge(1), edge(2)]);
                }
            }
        }
    }
    segs
}

/// SVG with iso-contours of ψ. Identical input gives identical bytes.
pub fn svg_for_field<T: Real>(psi: &SpectralScalar<T>, title: &str) -> String {
    let l = lattice(psi);
    let amp = l.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let half = SIZE / 2.0;
    let scale = half / 1.05;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(
        s,
        "<circle cx=\"{half}\" cy=\"{half}\" r=\"{scale:.2}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>"
    );
    if amp > 0.0 {
        for n in 0..LEVELS {
            let frac = -1.0 + 2.0 * (n + 1) as f64 / (LEVELS + 1) as f64;
            let level = frac * amp;
            let segs = contour_segments(&l, level);
            if segs.is_empty() {
                continue;
            }
            let colour = if n == LEVELS / 2 {
                ZERO
            } else if level < 0.0 {
                CCW
            } else {
                CW
            };
            let _ = write!(s, "<path fill=\"none\" stroke=\"{colour}\" stroke-width=\"0.8\" data-level=\"{frac:.4}\" d=\"");
            for [a, b] in segs {
                let _ = write!(
                    s,
                    "M{:.2} {:.2}L{:.2} {:.2}",
                    half + scale * a.0,
                    half - scale * a.1,
                    half + scale * b.0,
                    half - scale * b.1
                );
            }
            s.push_str("\"/>\n");
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))
}

/// Writes the contour plot of a scalar field.
pub fn render_field<T: Real>(psi: &SpectralScalar<T>, title: &str, path: &Path) -> Result<()> {
    write_file(path, &svg_for_field(psi, title))
}

/// Writes the streamlines of a design.
pub fn render_streamlines<T: Real>(d: &FlowDesign<T>, path: &Path) -> Result<()> {
    let title = format!("{} flow, wavenumbers {:?}", d.kind(), d.wavenumbers());
    render_field(d.streamfunction(), &title, path)
}

/// Sign changes of ψ around the collocation circle at radial node k.
pub fn azimuthal_sign_changes<T: Real>(psi: &SpectralScalar<T>, k: usize) -> usize {
    let nt = psi.grid().ntheta();
    let phys = psi.to_physical();
    let amp = phys.iter().fold(0.0f64, |m, v| m.max(v.to_f64().unwrap().abs()));
    let signs: Vec<bool> = phys[k * nt..(k + 1) * nt]
        .iter()
        .map(|v| v.to_f64().unwrap())
        .filter(|v| v.abs() > SIGN_TOL * amp)
        .map(|v| v > 0.0)
        .collect();
    if signs.is_empty() {
        return 0;
    }
    (0..signs.len()).filter(|&j| signs[j] != signs[(j + 1) % signs.len()]).count()
}

/// (radius, azimuthal cell count) at the radii that characterise the design:
/// mid-radius for rolls, and each transition radius r_k for layered designs.
pub fn cell_counts<T: Real>(d: &FlowDesign<T>) -> Vec<(f64, usize)> {
    let g = d.grid();
    let r = g.r_nodes();
    let nearest = |x: f64| {
        (0..g.nr())
            .min_by(|&a, &b| {
                let da = (r[a].to_f64().unwrap() - x).abs();
                let db = (r[b].to_f64().unwrap() - x).abs();
                da.total_cmp(&db)
            })
            .unwrap()
    };
    let radii: Vec<f64> = match (d.kind(), d.plan()) {
        (FlowKind::Roll, _) | (_, None) => vec![0.5],
        (_, Some(p)) => p.r.iter().map(|x| x.to_f64().unwrap()).collect(),
    };
    radii
        .into_iter()
        .map(|x| {
            let k = nearest(x);
            (r[k].to_f64().unwrap(), azimuthal_sign_changes(d.streamfunction(), k))
        })
        .collect()
}
