//! `heatdisc`: bounds, steady solves, Pe sweeps, streamline plots and self-tests.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heatdisc::advdiff::solve_steady;
use heatdisc::sweep::{
    build_design, fit_scaling, render_streamlines, run_bounds, run_sweep, selftest, SelftestOptions,
    SweepConfig, SweepTable,
};

#[derive(Parser)]
#[command(name = "heatdisc", version, about = "Flow designs and cooling bounds for an internally heated disc")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upper and certified lower bounds at each Pe, as CSV.
    Bound(Common),
    /// Steady advection-diffusion solves at each Pe.
    Solve(Common),
    /// Bounds plus exact values up to the exact cap, as CSV, with a scaling fit.
    Sweep(Common),
    /// Streamline contours of one design as SVG (Pe defaults to 1e4).
    Render(Common),
    /// Invariant checks of every module on a small grid.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// Heat source, `name[:param]`.
    #[arg(long)]
    source: Option<String>,
    /// Flow family: roll[:n], branching, energy-roll.
    #[arg(long)]
    flow: Option<String>,
    /// enstrophy or energy.
    #[arg(long)]
    constraint: Option<String>,
    /// Comma-separated Pe values, e.g. 1e2,10^2.5,1e3.
    #[arg(long)]
    pe: Option<String>,
    #[arg(long)]
    nr: Option<String>,
    /// Fourier modes, or `auto`.
    #[arg(long)]
    modes: Option<String>,
    /// Radial stretching exponent.
    #[arg(long)]
    stretch: Option<String>,
    /// Largest Pe with a coupled solve.
    #[arg(long = "exact-cap")]
    exact_cap: Option<String>,
    /// Output file; stdout when omitted (required for render).
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// A usage problem (exit 1) or a numerical failure (exit 2).
enum Failure {
    Usage(String),
    Numerical(String),
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn numerical(e: impl ToString) -> Failure {
    Failure::Numerical(e.to_string())
}

impl Common {
    /// Defaults, then the config file, then flags.
    fn config(&self) -> Result<SweepConfig, Failure> {
        let mut cfg = SweepConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        }
        let flags = [
            ("source", &self.source),
            ("flow", &self.flow),
            ("constraint", &self.constraint),
            ("pe", &self.pe),
            ("nr", &self.nr),
            ("modes", &self.modes),
            ("stretch", &self.stretch),
            ("exact_cap", &self.exact_cap),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| usage(format!("--{}: {e}", key.replace('_', "-"))))?;
            }
        }
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(usage),
        }
    }
}

fn report_table(t: &SweepTable) {
    for row in &t.rows {
        match &row.report {
            Ok(_) => eprintln!("pe={:.6e}: ok in {:.1}s (modes={})", row.pe, row.wall_time, row.modes),
            Err(e) => eprintln!("pe={:.6e}: failed: {e}", row.pe),
        }
        if let Some(n) = &row.note {
            eprintln!("pe={:.6e}: {n}", row.pe);
        }
    }
}

fn table_command(c: &Common, exact: bool) -> Result<(), Failure> {
    let cfg = c.config()?;
    let t = if exact { run_sweep(&cfg) } else { run_bounds(&cfg) }.map_err(usage)?;
    report_table(&t);
    c.emit(&t.to_csv().map_err(numerical)?)?;
    if exact {
        match fit_scaling(&t, cfg.constraint) {
            Ok(fit) => eprintln!(
                "fit: slope {:.4}, compensated spread {:.4}, r² {:.4}",
                fit.raw_slope, fit.compensated_spread, fit.r_squared
            ),
            Err(e) => eprintln!("fit: {e}"),
        }
    }
    if t.reports().next().is_none() {
        return Err(numerical("every row failed"));
    }
    Ok(())
}

fn solve_command(c: &Common) -> Result<(), Failure> {
    let cfg = c.config()?;
    let mut out = String::from("pe,cooling,heat_input,energy_gap,iterations,cell_pe\n");
    for &pe in &cfg.pe {
        let modes = cfg.modes_at(pe).map_err(usage)?;
        let (s, d) = build_design(&cfg, pe, modes).map_err(numerical)?;
        let sol = solve_steady(&d, &s, pe, cfg.constraint).map_err(numerical)?;
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.3e},{},{:.4}\n",
            pe,
            sol.cooling,
            sol.heat_input,
            sol.energy_gap(),
            sol.iterations,
            sol.cell_pe
        ));
    }
    c.emit(&out)
}

fn render_command(c: &Common) -> Result<(), Failure> {
    let mut cfg = c.config()?;
    if c.pe.is_none() && cfg.pe.len() > 1 {
        cfg.pe = vec![1e4];
    }
    let [pe] = cfg.pe[..] else {
        return Err(usage("render takes a single --pe value"));
    };
    let path = c.out.as_ref().ok_or_else(|| usage("render needs --out <file.svg>"))?;
    let modes = cfg.modes_at(pe).map_err(usage)?;
    let (_, d) = build_design(&cfg, pe, modes).map_err(numerical)?;
    render_streamlines(&d, path).map_err(usage)
}

fn selftest_command(c: &Common) -> Result<(), Failure> {
    let mut opts = SelftestOptions::default();
    if let Some(nr) = &c.nr {
        opts.nr = nr.parse().map_err(|_| usage(format!("--nr: bad value '{nr}'")))?;
    }
    if let Some(m) = &c.modes {
        opts.modes = m.parse().map_err(|_| usage(format!("--modes: bad value '{m}'")))?;
    }
    let rep = selftest(&opts).map_err(usage)?;
    let text: String = rep.checks.iter().map(|c| format!("{c}\n")).collect();
    c.emit(&text)?;
    if rep.passed() {
        Ok(())
    } else {
        Err(numerical("self-test failed"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Bound(c) => table_command(c, false),
        Command::Sweep(c) => table_command(c, true),
        Command::Solve(c) => solve_command(c),
        Command::Render(c) => render_command(c),
        Command::Selftest(c) => selftest_command(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
    }
}
