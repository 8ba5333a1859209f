use super::{DetectedTarget, RangeVelocityMap, DB_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPeak {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Detections in descending power. `incomplete` is set when fewer maxima
/// than requested survived the guard exclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakList {
    pub targets: Vec<DetectedTarget>,
    pub incomplete: bool,
}

fn axis_distance(a: usize, b: usize, len: usize, wrap: bool) -> usize {
    let d = a.abs_diff(b);
    if wrap {
        d.min(len - d)
    } else {
        d
    }
}

/// Greedy local-maximum picking on a row-major grid. A cell is a local
/// maximum when no 8-neighbour exceeds it (ties broken by scan order, so a
/// plateau yields one cell). Accepted peaks suppress every candidate within
/// `guard` cells in Chebyshev distance. Values at or below [`DB_FLOOR`] are
/// never peaks.
pub fn find_peaks_2d(
    values: &[f64],
    rows: usize,
    cols: usize,
    wrap_rows: bool,
    wrap_cols: bool,
    n_peaks: usize,
    guard: usize,
) -> Vec<GridPeak> {
    assert_eq!(values.len(), rows * cols);
    let at = |r: usize, c: usize| values[r * cols + c];
    let neighbour = |i: usize, d: isize, len: usize, wrap: bool| -> Option<usize> {
        let j = i as isize + d;
        if (0..len as isize).contains(&j) {
            Some(j as usize)
        } else if wrap && len > 2 {
            Some(j.rem_euclid(len as isize) as usize)
        } else {
            None
        }
    };
    let mut candidates = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = at(r, c);
            if !(v > DB_FLOOR) {
                continue;
            }
            let mut is_max = true;
            'scan: for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (Some(nr), Some(nc)) = (neighbour(r, dr, rows, wrap_rows), neighbour(c, dc, cols, wrap_cols)) else {
                        continue;
                    };
                    let nv = at(nr, nc);
                    let earlier = (nr, nc) < (r, c);
                    if nv > v || (earlier && nv == v) {
                        is_max = false;
                        break 'scan;
                    }
                }
            }
            if is_max {
                candidates.push(GridPeak { row: r, col: c, value: v });
            }
        }
    }
    candidates.sort_by(|a, b| b.value.total_cmp(&a.value).then((a.row, a.col).cmp(&(b.row, b.col))));
    let mut accepted: Vec<GridPeak> = Vec::new();
    for p in candidates {
        if accepted.len() == n_peaks {
            break;
        }
        let blocked = accepted.iter().any(|q| {
            axis_distance(p.row, q.row, rows, wrap_rows) <= guard && axis_distance(p.col, q.col, cols, wrap_cols) <= guard
        });
        if !blocked {
            accepted.push(p);
        }
    }
    accepted
}

/// Peaks of a range–velocity map. Both axes are circular (delay and Doppler
/// alias), so guard regions wrap.
pub fn detect_peaks(map: &RangeVelocityMap, n_peaks: usize, guard: usize) -> PeakList {
    let found = find_peaks_2d(&map.power_db, map.rows(), map.cols(), true, true, n_peaks.max(1), guard);
    let targets: Vec<DetectedTarget> = found
        .iter()
        .map(|p| DetectedTarget {
            range_m: map.range_axis_m[p.col],
            velocity_mps: map.velocity_estimable.then(|| map.velocity_axis_mps[p.row]),
            elevation_deg: None,
            azimuth_deg: None,
            power_db: p.value,
        })
        .collect();
    PeakList { incomplete: targets.len() < n_peaks, targets }
}
