//! One function per subcommand. Each writes a JSON report embedding the
//! resolved config, plus plot-ready tables in the requested format.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hitchin_core::fiducial::{build_family, FiducialSummary};
use hitchin_core::gluing::{self, approx_error_sweep, build_glued, corrected_solution_check, newton_correct, CutoffProfile, NewtonStep};
use hitchin_core::linearized::{self, green_norms, indicial_roots, restricted_indicial_roots, IndicialRoot, ModeNorms, RadialGrid};
use hitchin_core::numerics::geometric_grid;
use hitchin_core::painleve::solve_connection;
use hitchin_core::report::{fmt_f64, write_json};
use hitchin_core::topology::{build_complex, default_punctures, twisted_cohomology_dims, write_torus_csv, TorusRow};
use hitchin_core::{ConnectionConfig, PsiProfile};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, Format, RunConfig};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    prepare_out(&cfg.out)?;
    match cfg.command {
        Command::SolvePsi => solve_psi(cfg),
        Command::Fiducial => fiducial(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Indicial => indicial(cfg),
        Command::Glue => glue(cfg),
        Command::Torus => torus(cfg),
    }
}

/// Creates the output directory when its parent exists.
fn prepare_out(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        return Ok(());
    }
    if dir.exists() {
        return Err(CliError::Usage(format!("{} exists and is not a directory", dir.display())));
    }
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::Usage(format!(
            "cannot create {}: parent directory does not exist",
            dir.display()
        )));
    }
    fs::create_dir(dir)?;
    Ok(())
}

fn create(cfg: &RunConfig, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(cfg.out.join(name))?))
}

fn report<T: Serialize>(cfg: &RunConfig, name: &str, body: T) -> Result<PathBuf> {
    write_json(create(cfg, name)?, &Report { config: cfg, body })?;
    Ok(cfg.out.join(name))
}

fn table_name(stem: &str, format: Format) -> String {
    match format {
        Format::Csv => format!("{stem}.csv"),
        Format::Json => format!("{stem}.json"),
    }
}

fn profile_for(cfg: &RunConfig) -> Result<Arc<PsiProfile>> {
    let mut cc = ConnectionConfig::default();
    if cfg.command == Command::SolvePsi {
        cc.tol = cfg.tol;
        cc.nodes = cfg.grid;
    }
    Ok(Arc::new(solve_connection(&cc)?))
}

#[derive(Serialize)]
struct PsiSummary {
    a0: f64,
    lambda: f64,
    residual: f64,
    mismatch: f64,
    newton_iterations: usize,
    connection: ConnectionConfig,
}

#[derive(Serialize)]
struct PsiTable<'a> {
    rho: &'a [f64],
    psi: &'a [f64],
    dpsi: Vec<f64>,
    eta: Vec<f64>,
}

fn solve_psi(cfg: &RunConfig) -> Result<()> {
    let p = profile_for(cfg)?;
    let name = table_name("psi", cfg.format);
    match cfg.format {
        Format::Csv => p.write_csv(create(cfg, &name)?)?,
        Format::Json => {
            let eta = p.eta_profile();
            let table = PsiTable {
                rho: &p.rho,
                psi: &p.psi,
                dpsi: p.psi_x.iter().zip(&p.rho).map(|(d, r)| d / r).collect(),
                eta: eta.eta,
            };
            write_json(create(cfg, &name)?, &table)?;
        }
    }
    report(
        cfg,
        "summary.json",
        PsiSummary {
            a0: p.a0,
            lambda: p.lambda,
            residual: p.residual,
            mismatch: p.mismatch,
            newton_iterations: p.newton_iterations,
            connection: p.config,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct FamilyTable<'a> {
    t: f64,
    r: &'a [f64],
    h: &'a [f64],
    f: &'a [f64],
    df: &'a [f64],
    residual: Vec<f64>,
}

#[derive(Serialize)]
struct FiducialRow {
    #[serde(flatten)]
    summary: FiducialSummary,
    determinant_defect: f64,
}

fn fiducial(cfg: &RunConfig) -> Result<()> {
    let p = profile_for(cfg)?;
    let r = geometric_grid(1e-3, 1.0, cfg.grid);
    let families = cfg
        .t
        .par_iter()
        .map(|&t| build_family(t, &p, &r))
        .collect::<hitchin_core::Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(families.len());
    for fam in &families {
        let name = table_name(&format!("fiducial_t{}", fam.t), cfg.format);
        match cfg.format {
            Format::Csv => fam.write_csv(create(cfg, &name)?)?,
            Format::Json => write_json(
                create(cfg, &name)?,
                &FamilyTable {
                    t: fam.t,
                    r: &fam.r,
                    h: &fam.h,
                    f: &fam.f,
                    df: &fam.df,
                    residual: fam.pointwise_residual(),
                },
            )?,
        }
        rows.push(FiducialRow {
            summary: fam.summary(),
            determinant_defect: fam.determinant_defect(64),
        });
    }
    report(cfg, "summary.json", Rows { rows })?;
    Ok(())
}

#[derive(Serialize)]
struct Rows<T: Serialize> {
    rows: Vec<T>,
}

#[derive(Serialize)]
struct SpectrumRow {
    t: f64,
    l: Vec<i64>,
    lambda_min: Vec<f64>,
    g_norm_l2: f64,
    g_norm_h2_surrogate: f64,
    kappa: f64,
    tail_bound_holds: bool,
    indicial: Vec<f64>,
}

#[derive(Serialize)]
struct ModeRow {
    t: f64,
    #[serde(flatten)]
    mode: ModeNorms,
}

fn spectrum(cfg: &RunConfig) -> Result<()> {
    let p = profile_for(cfg)?;
    let grid = RadialGrid::new(linearized::DEFAULT_R_MIN, cfg.grid)?;
    let mut rows = Vec::new();
    let mut modes = Vec::new();
    for &t in &cfg.t {
        let rep = green_norms(t, cfg.lmax, &p, &grid)?;
        modes.extend(rep.modes.iter().map(|&mode| ModeRow { t, mode }));
        rows.push(SpectrumRow {
            t,
            tail_bound_holds: rep.tail_bound_holds(),
            l: rep.l,
            lambda_min: rep.lambda_min,
            g_norm_l2: rep.g_norm_l2,
            g_norm_h2_surrogate: rep.g_norm_h2_surrogate,
            kappa: rep.kappa,
            indicial: rep.indicial,
        });
    }
    let name = table_name("modes", cfg.format);
    match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(create(cfg, &name)?);
            w.write_record(["t", "l", "lambda_min", "green_l2", "green_h2", "potential_floor"])?;
            for m in &modes {
                w.write_record([
                    fmt_f64(m.t),
                    m.mode.l.to_string(),
                    fmt_f64(m.mode.lambda_min),
                    fmt_f64(m.mode.green_l2),
                    fmt_f64(m.mode.green_h2),
                    fmt_f64(m.mode.potential_floor),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => write_json(create(cfg, &name)?, &modes)?,
    }
    report(cfg, "spectrum.json", Rows { rows })?;
    Ok(())
}

#[derive(Serialize)]
struct IndicialReport {
    roots: Vec<IndicialRoot>,
    restricted: Vec<IndicialRoot>,
}

fn indicial(cfg: &RunConfig) -> Result<()> {
    let range = -cfg.lmax..=cfg.lmax;
    let body = IndicialReport {
        roots: indicial_roots(range.clone()),
        restricted: restricted_indicial_roots(range),
    };
    if cfg.format == Format::Csv {
        let mut w = csv::Writer::from_writer(create(cfg, "indicial.csv")?);
        w.write_record(["set", "nu", "value", "multiplicity"])?;
        for (set, roots) in [("full", &body.roots), ("restricted", &body.restricted)] {
            for r in roots {
                w.write_record([set.to_string(), r.nu.to_string(), fmt_f64(r.value()), r.multiplicity.to_string()])?;
            }
        }
        w.flush()?;
    }
    report(cfg, "indicial.json", body)?;
    Ok(())
}

#[derive(Serialize)]
struct GlueRun {
    t: f64,
    residual_pre: f64,
    residual_post: f64,
    newton_iters: usize,
    sup_u: f64,
    hitchin_residual: f64,
    interior_deviation: f64,
}

#[derive(Serialize)]
struct GlueReport {
    cutoff: CutoffProfile,
    /// Fitted decay rate of the glued residual; absent for fewer than 4 values of t.
    delta_fit: Option<f64>,
    r_squared: Option<f64>,
    predicted_delta: f64,
    runs: Vec<GlueRun>,
}

fn glue(cfg: &RunConfig) -> Result<()> {
    let p = profile_for(cfg)?;
    let grid = RadialGrid::new(gluing::DEFAULT_R_MIN, cfg.grid)?;
    let cutoff = CutoffProfile::default();
    let solved = cfg
        .t
        .par_iter()
        .map(|&t| -> Result<(GlueRun, Vec<NewtonStep>)> {
            let st = build_glued(t, &p, &cutoff, &grid)?;
            let nr = newton_correct(&st, cfg.tol)?;
            let check = corrected_solution_check(&st, &nr, 1e-3)?;
            let run = GlueRun {
                t,
                residual_pre: st.residual_sup(),
                residual_post: nr.residual_sup,
                newton_iters: nr.iterations(),
                sup_u: nr.sup_u,
                hitchin_residual: check.hitchin.max(),
                interior_deviation: check.interior_deviation,
            };
            Ok((run, nr.history))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut log = csv::Writer::from_writer(create(cfg, "newton_log.csv")?);
    log.write_record(["t", "iteration", "residual_sup", "residual_l2"])?;
    for (run, history) in &solved {
        for s in history {
            log.write_record([fmt_f64(run.t), s.iteration.to_string(), fmt_f64(s.residual_sup), fmt_f64(s.residual_l2)])?;
        }
    }
    log.flush()?;
    let fit = if cfg.t.len() >= 4 {
        Some(approx_error_sweep(&cfg.t, &p, &cutoff, &grid)?)
    } else {
        None
    };
    report(
        cfg,
        "glue.json",
        GlueReport {
            cutoff,
            delta_fit: fit.as_ref().map(|f| f.delta),
            r_squared: fit.as_ref().map(|f| f.r_squared),
            predicted_delta: gluing::predicted_delta(0.5),
            runs: solved.into_iter().map(|(run, _)| run).collect(),
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct TorusEntry {
    #[serde(flatten)]
    row: TorusRow,
    dim: usize,
}

fn torus(cfg: &RunConfig) -> Result<()> {
    let rows = cfg
        .gamma
        .iter()
        .map(|&g| {
            let k = default_punctures(g);
            let (h0, h1) = twisted_cohomology_dims(&build_complex(g, k)?);
            Ok(TorusRow {
                gamma: g,
                k,
                h0,
                h1,
                expected: 6 * g - 6,
            })
        })
        .collect::<hitchin_core::Result<Vec<_>>>()?;
    if cfg.format == Format::Csv {
        write_torus_csv(&rows, create(cfg, "torus.csv")?)?;
    }
    let rows = rows.into_iter().map(|row| TorusEntry { dim: row.h1, row }).collect();
    report(cfg, "torus.json", Rows::<TorusEntry> { rows })?;
    Ok(())
}
