use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use topopt::config::{self, RunConfig};
use topopt::io;
use topopt::levelset;
use topopt::optimizer::{self, Method, RunResult};
use topopt::Result;

#[derive(Parser)]
#[command(
    name = "topopt",
    about = "2D level set topology optimization for minimum mean compliance",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization and export its history, snapshots, and layout.
    Run(RunArgs),
    /// Run rd and nlhp back-to-back on the same configuration and report both
    /// convergence iteration counts.
    Compare(CommonArgs),
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// level set update scheme: rd | nlhp
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args)]
struct CommonArgs {
    /// model geometry: cantilever | bridge | radiator
    #[arg(long)]
    model: Option<String>,
    /// initial configuration: perforated | full | upper
    #[arg(long)]
    init: Option<String>,
    /// flat key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// mesh resolution factor
    #[arg(long)]
    res: Option<usize>,
    /// cap on outer iterations
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// write a VTK snapshot every N iterations (0 = final only)
    #[arg(long = "snapshot-stride")]
    snapshot_stride: Option<usize>,
    /// iteration at which nlhp falls back to rd
    #[arg(long = "switch-back-it")]
    switch_back_it: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut o = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k.to_string(), v));
            }
        };
        push("model", self.model.clone());
        push("init", self.init.clone());
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("resMesh", self.res.map(|v| v.to_string()));
        push("MaxLoop", self.max_iter.map(|v| v.to_string()));
        push(
            "snapshot_stride",
            self.snapshot_stride.map(|v| v.to_string()),
        );
        push("SwitchBackIt", self.switch_back_it.map(|v| v.to_string()));
        o
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Rd => "rd",
        Method::Nlhp => "nlhp",
    }
}

/// Run one configuration, exporting history.csv, VTK snapshots, final state,
/// and the layout raster into `dir`.
fn run_one(cfg: &RunConfig, dir: &PathBuf) -> Result<RunResult> {
    std::fs::create_dir_all(dir)?;
    let (spec, mesh) = cfg.build_model()?;
    eprintln!(
        "model {} ({} triangles, {} nodes), method {}, eps {:.1e}",
        spec.name,
        mesh.triangle_count(),
        mesh.node_count(),
        method_name(cfg.params.method),
        cfg.params.eps_opt
    );

    let stride = cfg.snapshot_stride;
    let mut snapshot_err: Option<topopt::Error> = None;
    let result = optimizer::run_with_observer(&spec, &mesh, &cfg.params, cfg.init, |snap| {
        if stride > 0 && snap.iter.is_multiple_of(stride) && snapshot_err.is_none() {
            let chi: Vec<f64> = snap
                .phi
                .values
                .iter()
                .map(|&v| levelset::chi_v(v))
                .collect();
            let path = dir.join(format!("snap_{:06}.vtk", snap.iter));
            if let Err(e) =
                io::write_vtk_snapshot(&mesh, &snap.phi.values, &chi, snap.displacement, &path)
            {
                snapshot_err = Some(e);
            }
        }
    })?;
    if let Some(e) = snapshot_err {
        return Err(e);
    }

    io::write_iteration_log(&result.history, &dir.join("history.csv"))?;
    let chi: Vec<f64> = result
        .phi
        .values
        .iter()
        .map(|&v| levelset::chi_v(v))
        .collect();
    io::write_vtk_snapshot(
        &mesh,
        &result.phi.values,
        &chi,
        &result.displacement,
        &dir.join("final.vtk"),
    )?;
    io::write_png_layout(&mesh, &result.phi.values, 800, &dir.join("layout.png"))?;

    match result.converged_at {
        Some(iter) => eprintln!(
            "converged at step {iter}: F = {:.6e}, vol fraction = {:.4}",
            result.compliance, result.vol_frac
        ),
        None => eprintln!(
            "stopped at MaxLoop without convergence: F = {:.6e}, vol fraction = {:.4}",
            result.compliance, result.vol_frac
        ),
    }
    Ok(result)
}

fn main_inner() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let mut overrides = args.common.overrides();
            if let Some(m) = args.method {
                overrides.push(("method".into(), m));
            }
            let cfg = config::parse_config(args.common.config.as_deref(), &overrides)?;
            let dir = cfg.out_dir.clone();
            run_one(&cfg, &dir)?;
        }
        Command::Compare(common) => {
            let overrides = common.overrides();
            let base = config::parse_config(common.config.as_deref(), &overrides)?;
            let mut counts = Vec::new();
            for method in [Method::Rd, Method::Nlhp] {
                let mut cfg = base.clone();
                cfg.params.method = method;
                let dir = base.out_dir.join(method_name(method));
                let result = run_one(&cfg, &dir)?;
                counts.push((method, result.converged_at));
            }
            for (method, converged) in &counts {
                match converged {
                    Some(iter) => {
                        println!("{}: converged at iteration {iter}", method_name(*method))
                    }
                    None => println!("{}: did not converge within MaxLoop", method_name(*method)),
                }
            }
            if let [(_, Some(rd)), (_, Some(nlhp))] = counts[..] {
                println!("ratio nlhp/rd = {:.3}", nlhp as f64 / rd as f64);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
