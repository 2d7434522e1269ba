//! `reproduce-table1`: the published threshold table, recomputed.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;

use bsft::circuits::EcMethod;
use bsft::threshold::Tail;

use crate::config::{usage, RunConfig};
use crate::{analyze, solve};

/// One row of the published table: locations, exact and sampled ε₀ (×1e-4).
struct Published {
    n: usize,
    ec: EcMethod,
    locations: usize,
    exact: Option<f64>,
    mc: Option<(f64, f64)>,
}

const PUBLISHED: &[Published] = &[
    Published {
        n: 3,
        ec: EcMethod::Steane,
        locations: 297,
        exact: Some(1.21),
        mc: Some((1.21, 0.06)),
    },
    Published {
        n: 3,
        ec: EcMethod::Knill,
        locations: 297,
        exact: Some(1.26),
        mc: Some((1.26, 0.05)),
    },
    Published {
        n: 5,
        ec: EcMethod::Steane,
        locations: 1185,
        exact: Some(1.94),
        mc: Some((1.92, 0.02)),
    },
    Published {
        n: 5,
        ec: EcMethod::Knill,
        locations: 1185,
        exact: None,
        mc: Some((2.07, 0.03)),
    },
    Published {
        n: 7,
        ec: EcMethod::Steane,
        locations: 2681,
        exact: None,
        mc: Some((1.74, 0.01)),
    },
    Published {
        n: 7,
        ec: EcMethod::Knill,
        locations: 2681,
        exact: None,
        mc: Some((1.91, 0.01)),
    },
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub n: usize,
    pub ec: EcMethod,
}

impl FromStr for Cell {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (n, ec) = s
            .split_once(':')
            .ok_or_else(|| format!("expected N:METHOD, got {s:?}"))?;
        let n = n
            .trim()
            .parse()
            .map_err(|_| format!("bad block size in {s:?}"))?;
        let ec = ec.trim().parse().map_err(|e| format!("{e}"))?;
        Ok(Cell { n, ec })
    }
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// Cells to compute, as N:METHOD
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "3:steane,3:knill,5:steane,5:knill"
    )]
    cells: Vec<Cell>,
    /// Largest block size counted exactly; larger ones are sampled
    #[arg(long, default_value_t = 3)]
    exact_max_n: usize,
    /// Samples per sampled cell
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = "table1")]
    out_dir: PathBuf,
}

pub fn reproduce(a: &TableArgs) -> Result<()> {
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let mut md = String::new();
    md.push_str("| code | EC | locations | published | eps0 (1e-4) | method | published exact | published MC | ratio |\n");
    md.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for cell in &a.cells {
        let t = (cell.n - 1) / 2;
        let mut cfg = RunConfig::new(cell.n, cell.ec);
        cfg.orders = vec![t + 1];
        cfg.jobs = a.jobs.unwrap_or(0);
        let exact = cell.n <= a.exact_max_n;
        if !exact {
            cfg.samples = Some(a.samples);
            cfg.seed = Some(a.seed);
        }
        cfg.validate()?;
        let dir = a.out_dir.join(format!("n{}-{}", cell.n, cell.ec));
        cfg.output = Some(dir.clone());
        eprintln!("== n={} {} ==", cell.n, cell.ec);
        let reports = analyze(&cfg, Some(&dir))?;
        let res = solve(&reports, t, Tail::default())?;
        fs::write(dir.join("threshold.json"), res.to_json())?;

        let ours = res.epsilon_0 * 1e4;
        let shown = match res.one_sigma_interval {
            Some([lo, hi]) => format!("{ours:.3} [{:.3}, {:.3}]", lo * 1e4, hi * 1e4),
            None => format!("{ours:.3}"),
        };
        let pubrow = PUBLISHED.iter().find(|p| p.n == cell.n && p.ec == cell.ec);
        let fmt_opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let reference = pubrow.and_then(|p| {
            if exact {
                p.exact.or(p.mc.map(|m| m.0))
            } else {
                p.mc.map(|m| m.0)
            }
        });
        let _ = writeln!(
            md,
            "| [[{0},1,{1}]] | {2} | {3} | {4} | {5} | {6} | {7} | {8} | {9} |",
            cell.n * cell.n,
            cell.n,
            cell.ec,
            reports[0].locations,
            fmt_opt(pubrow.map(|p| p.locations.to_string())),
            shown,
            if exact { "exact" } else { "mc" },
            fmt_opt(pubrow.and_then(|p| p.exact).map(|v| format!("{v:.2}"))),
            fmt_opt(
                pubrow
                    .and_then(|p| p.mc)
                    .map(|(v, s)| format!("{v:.2} ± {s:.2}"))
            ),
            fmt_opt(reference.map(|r| format!("{:.2}", ours / r))),
        );
    }
    print!("{md}");
    let path = a.out_dir.join("table1.md");
    fs::write(&path, &md)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
