//! CSV encoders. Floats are written as `{:.14e}` so reruns are
//! byte-identical.

use std::fmt::Write;

use crate::correlations::CorrelationTrajectory;
use crate::decoherence::DecoherenceProfile;
use crate::scenarios::{GenerationPoint, PhaseDiagram, StationaryPoint};
use crate::state::{TwoQubitState, BASIS};

fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub const PROFILE_HEADER: &str = "t,gamma0,delta,gamma_plus,gamma_minus,rate_plus,rate_minus,pi_zz";

pub fn profile_csv(p: &DecoherenceProfile) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    for i in 0..p.len() {
        let row = [
            p.t_grid()[i],
            p.gamma0()[i],
            p.delta()[i],
            p.gamma_plus()[i],
            p.gamma_minus()[i],
            p.rate_plus()[i],
            p.rate_minus()[i],
            p.pi_zz()[i],
        ];
        push_row(&mut out, &row.map(num));
    }
    out
}

pub const PHASE_DIAGRAM_HEADER: &str = "c,a_B_over_aRb,label,residual,death_time,revival_count";

/// One row per cell, `a_B` outer. `death_time` is empty when the state
/// never dies.
pub fn phase_diagram_csv(d: &PhaseDiagram) -> String {
    let mut out = String::from(PHASE_DIAGRAM_HEADER);
    out.push('\n');
    for (i, &a) in d.a_b.iter().enumerate() {
        for (j, &c) in d.c.iter().enumerate() {
            let cell = &d.cells[i][j];
            push_row(
                &mut out,
                &[
                    num(c),
                    num(a),
                    cell.label.to_string(),
                    num(cell.residual),
                    cell.death_time.map(num).unwrap_or_default(),
                    cell.revival_count.to_string(),
                ],
            );
        }
    }
    out
}

pub fn stationary_csv(points: &[StationaryPoint]) -> String {
    let mut out = String::from("x,residual\n");
    for p in points {
        push_row(&mut out, &[num(p.x), num(p.residual)]);
    }
    out
}

pub fn generation_scan_csv(points: &[GenerationPoint]) -> String {
    let mut out = String::from("x,C_max,t_max\n");
    for p in points {
        push_row(&mut out, &[num(p.x), num(p.c_max), num(p.t_max)]);
    }
    out
}

/// `t,concurrence[,discord],mutual_information`. The discord column is
/// present when any point carries a value.
pub fn trajectory_csv(tr: &CorrelationTrajectory) -> String {
    let with_discord = tr.discord.iter().any(Option::is_some);
    let mut out = String::from(if with_discord {
        "t,concurrence,discord,mutual_information\n"
    } else {
        "t,concurrence,mutual_information\n"
    });
    for i in 0..tr.len() {
        let mut row = vec![num(tr.t[i]), num(tr.concurrence[i])];
        if with_discord {
            row.push(tr.discord[i].map(num).unwrap_or_default());
        }
        row.push(num(tr.mutual_information[i]));
        push_row(&mut out, &row);
    }
    out
}

/// Column names of [`density_csv`] after `t`: real and imaginary parts of
/// the upper triangle, e.g. `re_LL_LR`.
pub fn density_columns() -> Vec<String> {
    let mut cols = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            cols.push(format!("re_{}_{}", BASIS[i], BASIS[j]));
            if i != j {
                cols.push(format!("im_{}_{}", BASIS[i], BASIS[j]));
            }
        }
    }
    cols
}

/// Density matrices along a trajectory, preceded by a basis comment.
pub fn density_csv(t: &[f64], states: &[TwoQubitState]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# basis {}", BASIS.join(" "));
    out.push('t');
    for c in density_columns() {
        out.push(',');
        out.push_str(&c);
    }
    out.push('\n');
    for (&ti, s) in t.iter().zip(states) {
        let mut row = vec![num(ti)];
        for i in 0..4 {
            for j in i..4 {
                let z = s.get(i, j);
                row.push(num(z.re));
                if i != j {
                    row.push(num(z.im));
                }
            }
        }
        push_row(&mut out, &row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::{build_profile, grid};
    use crate::params::presets;
    use crate::state::make_product_plus;

    #[test]
    fn profile_rows() {
        let p = build_profile(&presets::benchmark(), &grid::uniform(1.0, 0.5).unwrap(), 1e-8).unwrap();
        let csv = profile_csv(&p);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], PROFILE_HEADER);
        assert!(lines[1].starts_with("0.00000000000000e0,"));
        assert_eq!(lines[2].split(',').count(), 8);
        assert_eq!(csv, profile_csv(&p));
    }

    #[test]
    fn density_layout() {
        assert_eq!(density_columns().len(), 16);
        let csv = density_csv(&[0.0], &[make_product_plus()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# basis LL LR RL RR");
        assert!(lines[1].starts_with("t,re_LL_LL,re_LL_LR,im_LL_LR"));
        assert_eq!(lines[2].split(',').count(), 17);
    }
}
