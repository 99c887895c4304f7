//! Desk-scale versions of the published accuracy and cost figures.
//!
//! Each figure is a set of sweeps. Every sweep lands in its own CSV next to a
//! gnuplot script that draws error against step size (explicit at `k_hat`
//! over the resolutions, one curve per resolution for the large-step
//! schemes) and error against wall time.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};

use hjbmarch::advect1d::Scheme1D;
use hjbmarch::Scheme;

use crate::config::{AnyScheme, RunSpec};
use crate::sweep::{execute, sweep_csv, Context, Written};

pub const FIGURES: [&str; 6] = ["fig2", "fig3", "fig5", "fig7", "fig8", "fig9"];

const LINE_RESOLUTIONS: [usize; 4] = [128, 256, 512, 1024];
const GRID_RESOLUTIONS: [usize; 4] = [32, 64, 128, 256];
const MULTIPLIERS: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
const TRUTH_RESOLUTION: usize = 512;

/// One CSV of a figure: the explicit scheme at `k_hat` and the other
/// schemes over the multipliers.
#[derive(Debug, Clone)]
pub struct Panel {
    pub name: String,
    pub title: String,
    pub specs: Vec<RunSpec>,
    /// Whether the figure shows L-infinity next to L1.
    pub linf: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Drop resolutions above this. Also caps the ground truth at 4x.
    pub max_resolution: Option<usize>,
    pub repeats: usize,
    pub seed: u64,
}

fn sweep(
    problem: &str,
    params: &[(&str, f64)],
    schemes: Vec<AnyScheme>,
    resolutions: &[usize],
    limits: &Limits,
) -> Vec<RunSpec> {
    let cap = limits.max_resolution.unwrap_or(usize::MAX);
    let res: Vec<usize> = resolutions.iter().copied().filter(|&n| n <= cap).collect();
    let base = |schemes: Vec<AnyScheme>, multipliers: Vec<f64>| {
        let mut s = RunSpec::new(problem, schemes, res.clone());
        s.params = params.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        s.multipliers = multipliers;
        s.repeats = limits.repeats;
        s.seed = limits.seed;
        s.write_fields = false;
        s.truth_resolution = limits
            .max_resolution
            .map_or(TRUTH_RESOLUTION, |c| TRUTH_RESOLUTION.min(4 * c));
        s
    };
    let (explicit, rest): (Vec<AnyScheme>, Vec<AnyScheme>) =
        schemes.into_iter().partition(|s| s.name() == "explicit");
    let mut out = Vec::new();
    if !explicit.is_empty() {
        out.push(base(explicit, vec![1.0]));
    }
    if !rest.is_empty() {
        out.push(base(rest, MULTIPLIERS.to_vec()));
    }
    out
}

fn line_schemes(list: &[Scheme1D]) -> Vec<AnyScheme> {
    list.iter().map(|&s| AnyScheme::Line(s)).collect()
}

fn grid_schemes(list: &[Scheme]) -> Vec<AnyScheme> {
    list.iter().map(|&s| AnyScheme::Grid(s)).collect()
}

/// The sweeps behind a figure id.
pub fn panels(figure: &str, limits: &Limits) -> Result<Vec<Panel>> {
    use Scheme1D as L;
    let panel = |name: &str, title: &str, specs: Vec<RunSpec>, linf: bool| Panel {
        name: name.to_string(),
        title: title.to_string(),
        specs,
        linf,
    };
    let two_schemes = [Scheme::Explicit, Scheme::Implicit];
    let out = match figure {
        "fig2" => [
            ("fig2a", "f = (1+x)^10"),
            ("fig2b", "f = 100/(50.5+49.5 cos 2 pi x)"),
            ("fig2c", "f = (2-x)^10"),
            ("fig2d", "f = (2-x)^2"),
        ]
        .iter()
        .map(|(case, title)| {
            let s = sweep(
                case,
                &[],
                line_schemes(&[L::Explicit, L::Implicit]),
                &LINE_RESOLUTIONS,
                limits,
            );
            panel(case, title, s, false)
        })
        .collect(),
        "fig3" => [
            ("fig3a", "f = (2-x)^8, t = 0.184"),
            ("fig3b", "f = 50/(25.5+24.5 cos 2 pi x), t = 0.663"),
        ]
        .iter()
        .map(|(case, title)| {
            let s = sweep(
                case,
                &[],
                line_schemes(&Scheme1D::ALL),
                &LINE_RESOLUTIONS,
                limits,
            );
            panel(case, title, s, false)
        })
        .collect(),
        "fig5" => {
            let s = sweep(
                "experiment1",
                &[],
                grid_schemes(&two_schemes),
                &GRID_RESOLUTIONS,
                limits,
            );
            vec![panel("fig5", "experiment 1", s, true)]
        }
        "fig7" => [0.1, 0.25, 0.8]
            .iter()
            .map(|&lambda| {
                let s = sweep(
                    "experiment2",
                    &[("lambda", lambda)],
                    grid_schemes(&two_schemes),
                    &GRID_RESOLUTIONS,
                    limits,
                );
                panel(
                    &format!("fig7-lambda{lambda}"),
                    &format!("experiment 2, lambda = {lambda}"),
                    s,
                    false,
                )
            })
            .collect(),
        "fig8" => [11.0, 5.0]
            .iter()
            .map(|&gamma| {
                let s = sweep(
                    "experiment3",
                    &[("gamma", gamma)],
                    grid_schemes(&Scheme::ALL),
                    &GRID_RESOLUTIONS,
                    limits,
                );
                panel(
                    &format!("fig8-gamma{gamma}"),
                    &format!("experiment 3, gamma = {gamma}"),
                    s,
                    false,
                )
            })
            .collect(),
        "fig9" => {
            let s = sweep(
                "experiment4",
                &[],
                grid_schemes(&Scheme::ALL),
                &GRID_RESOLUTIONS,
                limits,
            );
            vec![panel("fig9", "experiment 4", s, true)]
        }
        other => bail!(
            "unknown figure `{other}` (expected one of {})",
            FIGURES.join(", ")
        ),
    };
    for p in &out {
        if p.specs.iter().any(|s| s.resolutions.is_empty()) {
            bail!("{}: every resolution is above the cap", p.name);
        }
    }
    Ok(out)
}

/// gnuplot script for one figure: accuracy and cost panels per sweep.
pub fn plot_script(figure: &str, panels: &[Panel]) -> String {
    let rows = panels
        .iter()
        .map(|p| if p.linf { 2 } else { 1 })
        .sum::<usize>();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# gnuplot script; run `gnuplot {figure}.gp` in this directory"
    );
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 1100,{}", 380 * rows);
    let _ = writeln!(s, "set output '{figure}.png'");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set format xy '%.0e'");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set multiplot layout {rows},2");
    for p in panels {
        let metrics: &[(usize, &str)] = if p.linf {
            &[(7, "L1"), (8, "Linf")]
        } else {
            &[(7, "L1")]
        };
        for &(col, metric) in metrics {
            for (xcol, xlabel, what) in [(3, "k", "accuracy"), (5, "wall time (ms)", "cost")] {
                let _ = writeln!(s, "set title '{} {what} ({metric})'", p.title);
                let _ = writeln!(s, "set xlabel '{xlabel}'");
                let _ = writeln!(s, "set ylabel '{metric} error'");
                let mut curves = Vec::new();
                for scheme in p.specs.iter().flat_map(|s| &s.schemes) {
                    let name = scheme.name();
                    if name == "explicit" {
                        curves.push(format!(
                            "'{f}.csv' using (strcol(1) eq 'explicit' && $4 == 1 ? ${xcol} : 1/0):{col} with linespoints lw 2 title 'explicit, k = k_hat'",
                            f = p.name
                        ));
                        continue;
                    }
                    for n in &p.specs[0].resolutions {
                        curves.push(format!(
                            "'{f}.csv' using (strcol(1) eq '{name}' && $2 == {n} ? ${xcol} : 1/0):{col} with linespoints title '{name}, {n} cells'",
                            f = p.name
                        ));
                    }
                }
                let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
            }
        }
    }
    let _ = writeln!(s, "unset multiplot");
    s
}

/// Runs a figure's sweeps and writes `<panel>.csv` files plus `<figure>.gp`.
pub fn cmd_reproduce(
    figure: &str,
    out: &Path,
    limits: &Limits,
    ctx: &Context,
) -> Result<Vec<PathBuf>> {
    let panels = panels(figure, limits)?;
    let mut results = Vec::with_capacity(panels.len());
    for p in &panels {
        let mut rows = Vec::new();
        for spec in &p.specs {
            log::info!("{figure}: sweep {} ({} cells)", p.name, spec.cells());
            rows.extend(execute(spec, ctx)?);
        }
        results.push(rows);
    }
    let mut written = Written::default();
    written.create_dir(out)?;
    for (p, r) in panels.iter().zip(&results) {
        written.write(
            &out.join(format!("{}.csv", p.name)),
            sweep_csv(r).as_bytes(),
        )?;
    }
    written.write(
        &out.join(format!("{figure}.gp")),
        plot_script(figure, &panels).as_bytes(),
    )?;
    Ok(written.keep())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> Limits {
        Limits {
            max_resolution: None,
            repeats: 1,
            seed: 0,
        }
    }

    #[test]
    fn every_figure_has_panels() {
        for f in FIGURES {
            let ps = panels(f, &limits()).unwrap();
            assert!(!ps.is_empty(), "{f}");
            for s in ps.iter().flat_map(|p| &p.specs) {
                assert!(s.resolutions.iter().all(|&n| n <= 1024));
                let explicit = s.schemes.iter().any(|x| x.name() == "explicit");
                assert!(
                    !explicit || s.multipliers == [1.0],
                    "{f}: explicit only runs at k_hat"
                );
                if !s.is_1d() {
                    assert!(s
                        .resolutions
                        .iter()
                        .all(|&n| n <= 512 && TRUTH_RESOLUTION.is_multiple_of(n)));
                    s.problem_2d().unwrap();
                }
            }
        }
        assert!(panels("fig4", &limits()).is_err());
    }

    #[test]
    fn fig2_has_one_sweep_per_speed_function() {
        let names: Vec<String> = panels("fig2", &limits())
            .unwrap()
            .into_iter()
            .map(|p| p.name)
            .collect();
        assert_eq!(names, ["fig2a", "fig2b", "fig2c", "fig2d"]);
    }

    #[test]
    fn caps_apply_to_resolutions_and_truth() {
        let l = Limits {
            max_resolution: Some(32),
            repeats: 1,
            seed: 0,
        };
        let p = &panels("fig9", &l).unwrap()[0];
        assert_eq!(p.specs[1].resolutions, vec![32]);
        assert_eq!(p.specs[1].truth_resolution, 128);
        assert!(panels("fig2", &l).is_err());
    }

    #[test]
    fn plot_script_mentions_every_csv_and_both_norms() {
        let ps = panels("fig5", &limits()).unwrap();
        let s = plot_script("fig5", &ps);
        assert!(s.contains("'fig5.csv'"));
        assert!(s.contains("Linf error"));
        assert!(s.contains("implicit, 256 cells"));
        assert!(s.contains("set output 'fig5.png'"));
    }
}
