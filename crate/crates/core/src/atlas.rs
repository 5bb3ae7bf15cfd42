//! Bifurcation diagrams of the zero count over the projective parameter
//! spaces: the circle [l0 : l2] for the first Melnikov function and the
//! plane [l0 : l2 : l4] for the principal part, scanned on grids, classified
//! by keyhole winding, and rendered to a deterministic SVG plus JSON Lines /
//! CSV datasets.

use crate::error::{Error, Result};
use crate::picard_fuchs::Evaluator;
use crate::zero_counter::{
    count_zeros, ContourCache, CountStatus, KeyholeContour, MelnikovParams, ZeroCount,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Parameter space of a scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Rp1,
    Rp2,
}

/// The bifurcation loci.  P-prefixed loci live on the circle [l0 : l2]
/// (l4 = 0); L-prefixed loci and the Delta segment live on the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Locus {
    /// 5 l0 + 4 l2 = 0: a zero crosses h = 0 (circle).
    P0,
    /// 5 l0 + l2 = 0: a conjugate pair crosses h = -1/4 (circle).
    PQuarter,
    /// l2 = 0: a zero crosses infinity (circle).
    PInfinity,
    /// 5 l0 + 4 l2 + 20 l4 = 0: a zero crosses h = 0 (plane).
    L0,
    /// l4 = 0 (plane).
    LQuarter,
    /// l2 = 0 (plane).
    LInfinity,
    /// 5(l0+l4) + l2 = 0 restricted to l0 (l0+l4) > 0: a conjugate pair
    /// crosses the open cut at h* = -l0 / (4(l0+l4)).
    DeltaSegment,
}

impl Locus {
    pub fn name(self) -> &'static str {
        match self {
            Locus::P0 => "P0",
            Locus::PQuarter => "P-1/4",
            Locus::PInfinity => "Pinf",
            Locus::L0 => "l0",
            Locus::LQuarter => "l-1/4",
            Locus::LInfinity => "linf",
            Locus::DeltaSegment => "Delta",
        }
    }

    pub fn for_space(space: Space) -> &'static [Locus] {
        match space {
            Space::Rp1 => &[Locus::P0, Locus::PQuarter, Locus::PInfinity],
            Space::Rp2 => &[Locus::L0, Locus::LQuarter, Locus::LInfinity, Locus::DeltaSegment],
        }
    }

    /// Unit normal of the defining line (great circle) in (l0, l2, l4).
    fn normal(self) -> [f64; 3] {
        let n: [f64; 3] = match self {
            Locus::P0 => [5.0, 4.0, 0.0],
            Locus::PQuarter => [5.0, 1.0, 0.0],
            Locus::PInfinity | Locus::LInfinity => [0.0, 1.0, 0.0],
            Locus::L0 => [5.0, 4.0, 20.0],
            Locus::LQuarter => [0.0, 0.0, 1.0],
            Locus::DeltaSegment => [5.0, 1.0, 5.0],
        };
        let s = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        [n[0] / s, n[1] / s, n[2] / s]
    }

    /// Signed distance of a normalized parameter point to the locus.  For
    /// the Delta segment the magnitude switches to the nearer endpoint when
    /// the projection falls on the inactive part of the line.
    pub fn signed_distance(self, p: &MelnikovParams) -> f64 {
        let v = p.as_array();
        let n = self.normal();
        let d = v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
        if self != Locus::DeltaSegment {
            return d;
        }
        // project onto the line and test the segment condition
        let mut q = [v[0] - d * n[0], v[1] - d * n[1], v[2] - d * n[2]];
        let qn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        let active = if qn > 0.0 {
            for x in &mut q {
                *x /= qn;
            }
            q[0] * (q[0] + q[2]) > 0.0
        } else {
            false
        };
        if active {
            d
        } else {
            // distance to the nearer endpoint [0:-5:1] or [1:0:-1] (projective)
            let e1 = [0.0, -5.0 / 26.0f64.sqrt(), 1.0 / 26.0f64.sqrt()];
            let e2 = [1.0 / 2.0f64.sqrt(), 0.0, -1.0 / 2.0f64.sqrt()];
            let dist = |e: [f64; 3]| -> f64 {
                let plus = ((v[0] - e[0]).powi(2) + (v[1] - e[1]).powi(2) + (v[2] - e[2]).powi(2))
                    .sqrt();
                let minus = ((v[0] + e[0]).powi(2) + (v[1] + e[1]).powi(2) + (v[2] + e[2]).powi(2))
                    .sqrt();
                plus.min(minus)
            };
            d.signum() * dist(e1).min(dist(e2))
        }
    }
}

/// One classified cell of a scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellRecord {
    pub chart: String,
    pub i: usize,
    pub j: usize,
    pub lambda: [f64; 3],
    pub count: u32,
    pub status: CountStatus,
    pub winding_defect: f64,
    pub nearest_locus: String,
    pub distance: f64,
}

/// Full scan output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanResult {
    pub space: Space,
    pub resolution: usize,
    pub cells: Vec<CellRecord>,
}

/// Classify one parameter point: keyhole count plus signed distances to all
/// loci of the space; the status is demoted to NearBoundary within
/// `locus_tol` of any locus.
pub fn classify_point(
    ev: &Evaluator,
    cache: &ContourCache,
    params: &MelnikovParams,
    contour: &KeyholeContour,
    space: Space,
    locus_tol: f64,
) -> Result<(ZeroCount, Vec<(Locus, f64)>)> {
    let mut z = count_zeros(ev, cache, params, contour)?;
    let dists: Vec<(Locus, f64)> =
        Locus::for_space(space).iter().map(|l| (*l, l.signed_distance(params))).collect();
    let dmin = dists.iter().map(|(_, d)| d.abs()).fold(f64::INFINITY, f64::min);
    if z.status == CountStatus::Stable && dmin < locus_tol {
        z.status = CountStatus::NearBoundary;
    }
    Ok((z, dists))
}

fn cell_params(space: Space, chart: usize, i: usize, j: usize, n: usize) -> MelnikovParams {
    match space {
        Space::Rp1 => {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            MelnikovParams::new(theta.cos(), theta.sin(), 0.0).unwrap()
        }
        Space::Rp2 => {
            let u = -1.0 + (2.0 * i as f64 + 1.0) / n as f64;
            let v = -1.0 + (2.0 * j as f64 + 1.0) / n as f64;
            let l = match chart {
                0 => [1.0, u, v],
                1 => [u, 1.0, v],
                _ => [u, v, 1.0],
            };
            MelnikovParams::new(l[0], l[1], l[2]).unwrap()
        }
    }
}

/// Scan a parameter space on a grid of the given resolution.  Cells are
/// independent work items; failures are recorded per cell, never aborting
/// the scan.
pub fn scan(
    ev: &Evaluator,
    cache: &ContourCache,
    space: Space,
    resolution: usize,
    contour: &KeyholeContour,
) -> Result<ScanResult> {
    if resolution < 16 {
        return Err(Error::InvalidInput(format!("resolution must be >= 16, got {resolution}")));
    }
    let locus_tol = 2.0 / resolution as f64;
    let jobs: Vec<(usize, usize, usize)> = match space {
        Space::Rp1 => (0..resolution).map(|i| (0usize, i, 0usize)).collect(),
        Space::Rp2 => (0..3)
            .flat_map(|c| {
                (0..resolution).flat_map(move |i| (0..resolution).map(move |j| (c, i, j)))
            })
            .collect(),
    };
    let cells: Vec<CellRecord> = jobs
        .par_iter()
        .map(|&(chart, i, j)| {
            let params = cell_params(space, chart, i, j, resolution);
            let chart_name = match space {
                Space::Rp1 => "rp1".to_string(),
                Space::Rp2 => chart.to_string(),
            };
            match classify_point(ev, cache, &params, contour, space, locus_tol) {
                Ok((z, dists)) => {
                    let (nl, nd) = dists
                        .iter()
                        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                        .map(|(l, d)| (l.name().to_string(), *d))
                        .unwrap();
                    CellRecord {
                        chart: chart_name,
                        i,
                        j,
                        lambda: params.as_array(),
                        count: z.count,
                        status: z.status,
                        winding_defect: z.winding_defect,
                        nearest_locus: nl,
                        distance: nd,
                    }
                }
                Err(_) => CellRecord {
                    chart: chart_name,
                    i,
                    j,
                    lambda: params.as_array(),
                    count: 0,
                    status: CountStatus::Failed,
                    winding_defect: f64::NAN,
                    nearest_locus: String::new(),
                    distance: f64::NAN,
                },
            }
        })
        .collect();
    Ok(ScanResult { space, resolution, cells })
}

// ---------------------------------------------------------------------------
// crossing analysis

/// Measure the zero-count jump across a locus: walk outward from `anchor`
/// (a point on the locus) along +-`dir` until both sides classify Stable,
/// then return their counts.
pub fn crossing_jump(
    ev: &Evaluator,
    cache: &ContourCache,
    anchor: [f64; 3],
    dir: [f64; 3],
    contour: &KeyholeContour,
) -> Result<(u32, u32)> {
    let side = |sign: f64| -> Result<u32> {
        for k in 1..=6 {
            let s = 0.02 * k as f64 * sign;
            let p = MelnikovParams::new(
                anchor[0] + s * dir[0],
                anchor[1] + s * dir[1],
                anchor[2] + s * dir[2],
            )?;
            let z = count_zeros(ev, cache, &p, contour)?;
            if z.status == CountStatus::Stable {
                return Ok(z.count);
            }
        }
        Err(Error::InvalidInput("no stable cell found near crossing".into()))
    };
    Ok((side(-1.0)?, side(1.0)?))
}

// ---------------------------------------------------------------------------
// regions

/// Union-find over Stable cells with equal counts; adjacent within a chart
/// by 4-neighbourhood, glued across charts via boundary-cell remapping.
fn region_ids(result: &ScanResult) -> Vec<Option<usize>> {
    let n = result.resolution;
    let cells = &result.cells;
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let index = |chart: usize, i: usize, j: usize| -> usize {
        match result.space {
            Space::Rp1 => i,
            Space::Rp2 => chart * n * n + i * n + j,
        }
    };
    let stable = |k: usize| cells[k].status == CountStatus::Stable;
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    match result.space {
        Space::Rp1 => {
            for i in 0..n {
                let a = index(0, i, 0);
                let b = index(0, (i + 1) % n, 0);
                // antipodal wrap: the circle closes with [l] ~ [-l]
                if stable(a) && stable(b) && cells[a].count == cells[b].count {
                    union(&mut parent, a, b);
                }
            }
        }
        Space::Rp2 => {
            for c in 0..3 {
                for i in 0..n {
                    for j in 0..n {
                        let a = index(c, i, j);
                        if !stable(a) {
                            continue;
                        }
                        if i + 1 < n {
                            let b = index(c, i + 1, j);
                            if stable(b) && cells[a].count == cells[b].count {
                                union(&mut parent, a, b);
                            }
                        }
                        if j + 1 < n {
                            let b = index(c, i, j + 1);
                            if stable(b) && cells[a].count == cells[b].count {
                                union(&mut parent, a, b);
                            }
                        }
                    }
                }
            }
            // glue charts: map boundary-cell centres into the other charts
            for c in 0..3 {
                for i in 0..n {
                    for j in 0..n {
                        if i != 0 && i != n - 1 && j != 0 && j != n - 1 {
                            continue;
                        }
                        let a = index(c, i, j);
                        if !stable(a) {
                            continue;
                        }
                        let l = cells[a].lambda;
                        for c2 in 0..3 {
                            if c2 == c {
                                continue;
                            }
                            let w = l[c2];
                            if w.abs() < 1e-12 {
                                continue;
                            }
                            let others: [f64; 2] = match c2 {
                                0 => [l[1] / w, l[2] / w],
                                1 => [l[0] / w, l[2] / w],
                                _ => [l[0] / w, l[1] / w],
                            };
                            if others[0].abs() > 1.0 || others[1].abs() > 1.0 {
                                continue;
                            }
                            let gi = (((others[0] + 1.0) / 2.0 * n as f64).floor() as usize).min(n - 1);
                            let gj = (((others[1] + 1.0) / 2.0 * n as f64).floor() as usize).min(n - 1);
                            let b = index(c2, gi, gj);
                            if stable(b) && cells[a].count == cells[b].count {
                                union(&mut parent, a, b);
                            }
                        }
                    }
                }
            }
        }
    }
    // canonical ids ordered by least cell index
    let mut ids = vec![None; cells.len()];
    let mut next = 0usize;
    let mut map: std::collections::HashMap<usize, usize> = Default::default();
    for k in 0..cells.len() {
        if !stable(k) {
            continue;
        }
        let r = find(&mut parent, k);
        let id = *map.entry(r).or_insert_with(|| {
            let v = next;
            next += 1;
            v
        });
        ids[k] = Some(id);
    }
    ids
}

/// Region summary rows: (region_id, count, cell_count).
pub fn region_summary(result: &ScanResult) -> Vec<(usize, u32, usize)> {
    let ids = region_ids(result);
    let mut rows: std::collections::BTreeMap<usize, (u32, usize)> = Default::default();
    for (k, id) in ids.iter().enumerate() {
        if let Some(id) = id {
            let e = rows.entry(*id).or_insert((result.cells[k].count, 0));
            e.1 += 1;
        }
    }
    rows.into_iter().map(|(id, (c, n))| (id, c, n)).collect()
}

// ---------------------------------------------------------------------------
// serialization

/// Write the dataset as JSON Lines, one record per cell in grid order.
pub fn write_dataset<W: std::io::Write>(result: &ScanResult, mut w: W) -> std::io::Result<()> {
    for cell in &result.cells {
        serde_json::to_writer(&mut w, cell)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Read a dataset produced by [`write_dataset`].
pub fn read_dataset<R: std::io::BufRead>(r: R) -> Result<ScanResult> {
    let mut cells = Vec::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::InvalidInput(format!("dataset read: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let cell: CellRecord = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidInput(format!("dataset parse: {e}")))?;
        cells.push(cell);
    }
    if cells.is_empty() {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    let space = if cells[0].chart == "rp1" { Space::Rp1 } else { Space::Rp2 };
    let resolution = match space {
        Space::Rp1 => cells.iter().map(|c| c.i).max().unwrap() + 1,
        Space::Rp2 => cells.iter().map(|c| c.i.max(c.j)).max().unwrap() + 1,
    };
    Ok(ScanResult { space, resolution, cells })
}

/// Write the region summary CSV.
pub fn write_summary<W: std::io::Write>(result: &ScanResult, mut w: W) -> std::io::Result<()> {
    writeln!(w, "region_id,count,cell_count")?;
    for (id, count, cells) in region_summary(result) {
        writeln!(w, "{id},{count},{cells}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// rendering

fn count_color(count: u32, status: CountStatus) -> &'static str {
    if status == CountStatus::Failed {
        return "#b0b0b0";
    }
    match count {
        0 => "#f4f4f2",
        1 => "#ffd166",
        2 => "#ef476f",
        3 => "#118ab2",
        _ => "#073b4c",
    }
}

/// Render a scan as an SVG 1.1 document; byte-identical for identical input.
pub fn render_svg(result: &ScanResult) -> String {
    match result.space {
        Space::Rp1 => render_rp1(result),
        Space::Rp2 => render_rp2(result),
    }
}

fn svg_header(width: f64, height: f64) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    s.push('\n');
    s.push_str(
        r##"<defs>
<pattern id="nearb" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><rect width="6" height="6" fill="none"/><line x1="0" y1="0" x2="0" y2="6" stroke="#555555" stroke-width="1.2"/></pattern>
<pattern id="failed" width="6" height="6" patternUnits="userSpaceOnUse"><rect width="6" height="6" fill="#cccccc"/><line x1="0" y1="0" x2="6" y2="6" stroke="#333333" stroke-width="1.4"/><line x1="6" y1="0" x2="0" y2="6" stroke="#333333" stroke-width="1.4"/></pattern>
</defs>
"##,
    );
    s
}

fn render_rp1(result: &ScanResult) -> String {
    let n = result.resolution;
    let (cx, cy, r0, r1) = (260.0, 260.0, 150.0, 230.0);
    let mut s = svg_header(520.0, 520.0);
    s.push_str("<g stroke=\"none\">\n");
    for cell in &result.cells {
        // each cell covers [theta, theta+pi/n) and its antipode
        let t0 = std::f64::consts::PI * cell.i as f64 / n as f64;
        let t1 = std::f64::consts::PI * (cell.i + 1) as f64 / n as f64;
        for half in 0..2 {
            let (a, b) = (t0 + half as f64 * std::f64::consts::PI, t1 + half as f64 * std::f64::consts::PI);
            let arc = |r: f64, th: f64| (cx + r * th.cos(), cy - r * th.sin());
            let (x0, y0) = arc(r1, a);
            let (x1, y1) = arc(r1, b);
            let (x2, y2) = arc(r0, b);
            let (x3, y3) = arc(r0, a);
            let color = count_color(cell.count, cell.status);
            let _ = write!(
                s,
                r#"<path d="M {x0:.3} {y0:.3} A {r1:.3} {r1:.3} 0 0 0 {x1:.3} {y1:.3} L {x2:.3} {y2:.3} A {r0:.3} {r0:.3} 0 0 1 {x3:.3} {y3:.3} Z" fill="{color}"/>"#
            );
            s.push('\n');
            if cell.status != CountStatus::Stable {
                let fill = if cell.status == CountStatus::Failed { "url(#failed)" } else { "url(#nearb)" };
                let _ = write!(
                    s,
                    r#"<path d="M {x0:.3} {y0:.3} A {r1:.3} {r1:.3} 0 0 0 {x1:.3} {y1:.3} L {x2:.3} {y2:.3} A {r0:.3} {r0:.3} 0 0 1 {x3:.3} {y3:.3} Z" fill="{fill}"/>"#
                );
                s.push('\n');
            }
        }
    }
    s.push_str("</g>\n");
    // loci ticks at P0, P-1/4, Pinf and their antipodes
    for (name, theta) in [
        ("Pinf", 0.0f64),
        ("P-1/4", std::f64::consts::PI - 5.0f64.atan()),
        ("P0", std::f64::consts::PI - (5.0f64 / 4.0).atan()),
    ] {
        for half in 0..2 {
            let th = theta + half as f64 * std::f64::consts::PI;
            let (x0, y0) = (cx + (r0 - 12.0) * th.cos(), cy - (r0 - 12.0) * th.sin());
            let (x1, y1) = (cx + (r1 + 12.0) * th.cos(), cy - (r1 + 12.0) * th.sin());
            let _ = write!(
                s,
                r##"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}" stroke="#000000" stroke-width="2"/>"##
            );
            s.push('\n');
            if half == 0 {
                let (tx, ty) = (cx + (r1 + 24.0) * th.cos(), cy - (r1 + 24.0) * th.sin());
                let _ = write!(
                    s,
                    r#"<text x="{tx:.3}" y="{ty:.3}" font-size="14" text-anchor="middle">{name}</text>"#
                );
                s.push('\n');
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn render_rp2(result: &ScanResult) -> String {
    let n = result.resolution;
    let (panel, margin) = (320.0, 40.0);
    let width = 3.0 * panel + 4.0 * margin;
    let height = panel + 2.0 * margin + 30.0;
    let mut s = svg_header(width, height);
    let cell_px = panel / n as f64;
    let chart_titles = ["chart l0 = 1 (u = l2, v = l4)", "chart l2 = 1 (u = l0, v = l4)", "chart l4 = 1 (u = l0, v = l2)"];
    for chart in 0..3usize {
        let ox = margin + chart as f64 * (panel + margin);
        let oy = margin;
        let _ = write!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="13" text-anchor="middle">{}</text>"#,
            ox + panel / 2.0,
            oy - 10.0,
            chart_titles[chart]
        );
        s.push('\n');
        for cell in result.cells.iter().filter(|c| c.chart == chart.to_string()) {
            let x = ox + cell.i as f64 * cell_px;
            // v axis points up
            let y = oy + panel - (cell.j + 1) as f64 * cell_px;
            let color = count_color(cell.count, cell.status);
            let _ = write!(
                s,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{cell_px:.3}" height="{cell_px:.3}" fill="{color}"/>"#
            );
            s.push('\n');
            if cell.status != CountStatus::Stable {
                let fill = if cell.status == CountStatus::Failed { "url(#failed)" } else { "url(#nearb)" };
                let _ = write!(
                    s,
                    r#"<rect x="{x:.3}" y="{y:.3}" width="{cell_px:.3}" height="{cell_px:.3}" fill="{fill}"/>"#
                );
                s.push('\n');
            }
        }
        // loci as clipped straight lines in chart coordinates
        for locus in [Locus::L0, Locus::LQuarter, Locus::LInfinity, Locus::DeltaSegment] {
            let nrm = locus.normal();
            // chart c: lambda = insert 1 at slot c with coords (u, v)
            // constraint: a u + b v + c0 = 0 in chart coordinates
            let (a, b, c0) = match chart {
                0 => (nrm[1], nrm[2], nrm[0]),
                1 => (nrm[0], nrm[2], nrm[1]),
                _ => (nrm[0], nrm[1], nrm[2]),
            };
            let mut pts: Vec<(f64, f64)> = Vec::new();
            let mut push = |u: f64, v: f64| {
                if (-1.0..=1.0).contains(&u) && (-1.0..=1.0).contains(&v) {
                    pts.push((u, v));
                }
            };
            if a.abs() > 1e-12 {
                push((-c0 - b * -1.0) / a, -1.0);
                push((-c0 - b * 1.0) / a, 1.0);
            }
            if b.abs() > 1e-12 {
                push(-1.0, (-c0 - a * -1.0) / b);
                push(1.0, (-c0 - a * 1.0) / b);
            }
            pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
            pts.dedup_by(|p, q| (p.0 - q.0).abs() + (p.1 - q.1).abs() < 1e-9);
            if pts.len() < 2 {
                continue;
            }
            let seg = (pts[0], pts[pts.len() - 1]);
            let to_px = |(u, v): (f64, f64)| {
                (ox + (u + 1.0) / 2.0 * panel, oy + panel - (v + 1.0) / 2.0 * panel)
            };
            let samples = 64usize;
            let mut path = String::new();
            let mut pen_up = true;
            for k in 0..=samples {
                let t = k as f64 / samples as f64;
                let u = seg.0 .0 + t * (seg.1 .0 - seg.0 .0);
                let v = seg.0 .1 + t * (seg.1 .1 - seg.0 .1);
                let lam = match chart {
                    0 => [1.0, u, v],
                    1 => [u, 1.0, v],
                    _ => [u, v, 1.0],
                };
                let visible = if locus == Locus::DeltaSegment {
                    lam[0] * (lam[0] + lam[2]) > 0.0
                } else {
                    true
                };
                if visible {
                    let (x, y) = to_px((u, v));
                    if pen_up {
                        let _ = write!(path, "M {x:.3} {y:.3} ");
                        pen_up = false;
                    } else {
                        let _ = write!(path, "L {x:.3} {y:.3} ");
                    }
                } else {
                    pen_up = true;
                }
            }
            if !path.is_empty() {
                let bold = matches!(locus, Locus::DeltaSegment | Locus::LQuarter);
                let wstroke = if bold { 3.0 } else { 1.5 };
                let _ = write!(
                    s,
                    r##"<path d="{}" fill="none" stroke="#000000" stroke-width="{wstroke}"/>"##,
                    path.trim_end()
                );
                s.push('\n');
            }
        }
        let _ = write!(
            s,
            r##"<rect x="{ox:.3}" y="{oy:.3}" width="{panel:.3}" height="{panel:.3}" fill="none" stroke="#000000" stroke-width="1"/>"##
        );
        s.push('\n');
    }
    // legend
    let ly = margin + panel + 18.0;
    let mut lx = margin;
    for (label, count) in [("0", 0u32), ("1", 1), ("2", 2), ("3", 3)] {
        let color = count_color(count, CountStatus::Stable);
        let _ = write!(
            s,
            r##"<rect x="{lx:.3}" y="{:.3}" width="14" height="14" fill="{color}" stroke="#000000" stroke-width="0.5"/><text x="{:.3}" y="{:.3}" font-size="12">{label} zeros</text>"##,
            ly - 12.0,
            lx + 20.0,
            ly
        );
        s.push('\n');
        lx += 90.0;
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use once_cell::sync::Lazy;

    static EV: Lazy<Evaluator> = Lazy::new(|| Evaluator::with_defaults().unwrap());
    static CACHE: Lazy<ContourCache> = Lazy::new(ContourCache::new);

    #[test]
    fn locus_distances() {
        // L0 passes through [0:-5:1] and [4:-5:0]
        let p = MelnikovParams::new(0.0, -5.0, 1.0).unwrap();
        assert!(Locus::L0.signed_distance(&p).abs() < 1e-12);
        let p = MelnikovParams::new(4.0, -5.0, 0.0).unwrap();
        assert!(Locus::L0.signed_distance(&p).abs() < 1e-12);
        // Delta: active on [1:-10:1] (h* = -1/8 on the cut)
        let p = MelnikovParams::new(1.0, -10.0, 1.0).unwrap();
        assert!(Locus::DeltaSegment.signed_distance(&p).abs() < 1e-12);
        // inactive part: [1:5:-2] lies on the same line but h* = 1/4 in D,
        // so the distance is to the nearer endpoint (order 1, not 0)
        let p = MelnikovParams::new(1.0, 5.0, -2.0).unwrap();
        assert!(Locus::DeltaSegment.signed_distance(&p).abs() > 0.1);
        // antipodal identification
        let a = MelnikovParams::new(0.2, -0.9, 0.3).unwrap();
        let b = MelnikovParams::new(-0.2, 0.9, -0.3).unwrap();
        for l in Locus::for_space(Space::Rp2) {
            assert!((l.signed_distance(&a).abs() - l.signed_distance(&b).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_on_p0_is_near_boundary() {
        // [4:-5:0] sits on P0 for the first Melnikov function
        let p = MelnikovParams::new(4.0, -5.0, 0.0).unwrap();
        let (z, _) = classify_point(&EV, &CACHE, &p, &KeyholeContour::default(), Space::Rp1, 0.01)
            .unwrap();
        assert_eq!(z.status, CountStatus::NearBoundary);
    }

    #[test]
    fn crossing_jumps_at_representative_points() {
        let c = KeyholeContour::default();
        // P0 (rp1): counts differ by one ([4:-5:0], transverse l0)
        let (a, b) = crossing_jump(&EV, &CACHE, [0.625, -0.78, 0.0], [1.0, 0.0, 0.0], &c).unwrap();
        assert_eq!((a as i64 - b as i64).abs(), 1, "P0 jump: {a} vs {b}");
        // PQuarter (rp1): counts differ by two
        let (a, b) = crossing_jump(&EV, &CACHE, [0.196, -0.98, 0.0], [1.0, 0.0, 0.0], &c).unwrap();
        assert_eq!((a as i64 - b as i64).abs(), 2, "PQuarter jump: {a} vs {b}");
        // PInfinity (rp1): counts differ by one
        let (a, b) = crossing_jump(&EV, &CACHE, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], &c).unwrap();
        assert_eq!((a as i64 - b as i64).abs(), 1, "Pinf jump: {a} vs {b}");
        // Delta (rp2): counts differ by two at [1:-10:1]
        let anchor = MelnikovParams::new(1.0, -10.0, 1.0).unwrap().as_array();
        let (a, b) = crossing_jump(&EV, &CACHE, anchor, [0.0, 1.0, 0.0], &c).unwrap();
        assert_eq!((a as i64 - b as i64).abs(), 2, "Delta jump: {a} vs {b}");
        // LQuarter (rp2) near its intersection with Delta, where the
        // emerging pair is wide enough of the cut to be seen: [1:-4.5:0]
        let anchor = MelnikovParams::new(1.0, -4.5, 0.0).unwrap().as_array();
        let (a, b) = crossing_jump(&EV, &CACHE, anchor, [0.0, 0.0, 1.0], &c).unwrap();
        assert_eq!((a as i64 - b as i64).abs(), 2, "LQuarter jump: {a} vs {b}");
        // L0 (rp2): one simple zero appears ([1:-8,1] -> l0 at l2=-6.25)
        let anchor = MelnikovParams::new(1.0, -6.25, 1.0).unwrap().as_array();
        let (a, b) = crossing_jump(&EV, &CACHE, anchor, [0.0, 1.0, 0.0], &c).unwrap();
        assert_eq!((a as i64 - b as i64).abs(), 1, "L0 jump: {a} vs {b}");
        // LInfinity (rp2): one zero exchanged with infinity
        let anchor = MelnikovParams::new(1.0, 0.0, -1.0).unwrap().as_array();
        let (a, b) = crossing_jump(&EV, &CACHE, anchor, [0.0, 1.0, 0.0], &c).unwrap();
        assert_eq!((a as i64 - b as i64).abs(), 1, "Linf jump: {a} vs {b}");
    }

    #[test]
    fn rp1_scan_structure() {
        let c = KeyholeContour::default();
        let result = scan(&EV, &CACHE, Space::Rp1, 180, &c).unwrap();
        assert_eq!(result.cells.len(), 180);
        // transitions at Pinf (theta = 0 = pi), P-1/4, P0 with counts 0 | 2 | 1
        let theta = |i: usize| std::f64::consts::PI * (i as f64 + 0.5) / 180.0;
        let tq = std::f64::consts::PI - 5.0f64.atan();
        let t0 = std::f64::consts::PI - (5.0f64 / 4.0).atan();
        for cell in &result.cells {
            if cell.status != CountStatus::Stable {
                continue;
            }
            let t = theta(cell.i);
            let expect = if t < tq {
                0
            } else if t < t0 {
                2
            } else {
                1
            };
            assert_eq!(cell.count, expect, "cell {} at theta {t}", cell.i);
        }
        // stable fraction is high
        let stable = result.cells.iter().filter(|c| c.status == CountStatus::Stable).count();
        assert!(stable * 10 >= 180 * 9, "only {stable}/180 stable");
    }

    #[test]
    fn dataset_roundtrip_and_determinism() {
        let c = KeyholeContour::default();
        let result = scan(&EV, &CACHE, Space::Rp1, 24, &c).unwrap();
        let mut buf1 = Vec::new();
        write_dataset(&result, &mut buf1).unwrap();
        let back = read_dataset(std::io::BufReader::new(buf1.as_slice())).unwrap();
        assert_eq!(back.space, Space::Rp1);
        assert_eq!(back.resolution, 24);
        let mut buf2 = Vec::new();
        write_dataset(&back, &mut buf2).unwrap();
        assert_eq!(buf1, buf2, "dataset round trip must be byte identical");
        let svg1 = render_svg(&result);
        let svg2 = render_svg(&back);
        assert_eq!(svg1, svg2);
        // scanning again yields identical bytes
        let again = scan(&EV, &CACHE, Space::Rp1, 24, &c).unwrap();
        let mut buf3 = Vec::new();
        write_dataset(&again, &mut buf3).unwrap();
        assert_eq!(buf1, buf3);
    }

    #[test]
    fn summary_counts_cells() {
        let c = KeyholeContour::default();
        let result = scan(&EV, &CACHE, Space::Rp1, 36, &c).unwrap();
        let rows = region_summary(&result);
        let total: usize = rows.iter().map(|r| r.2).sum();
        let stable = result.cells.iter().filter(|c| c.status == CountStatus::Stable).count();
        assert_eq!(total, stable);
        let mut csv = Vec::new();
        write_summary(&result, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("region_id,count,cell_count\n"));
    }
}
