use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::info;

use gifs::complexity::{geometric_eps, ratio_csv, ratio_table, CostParams};
use gifs::schedule::prefix_bounds;
use gifs::sysio::builtin_document;
use gifs::{
    deterministic_run, g_step, grid_run, hausdorff, memory_p_run, rasterize, write_ppm, AlgoError, Example,
    FormatError, GifsSystem, GridSchedule, PointSet, RunOutcome, RunStatus, SnapMode, SystemError,
};

use crate::spec::{load_system, parse_axes, parse_schedule, parse_seed};
use crate::{Algo, CompareArgs, CostArgs, ExportArgs, ImageArgs, RunArgs, ScheduleArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_CERTIFICATION: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

pub const STATS_HEADER: &str = "step,points,tuples,millis,eps_k,bound_k";
pub const CERTIFICATE_HEADER: &str = "step,n,eps_k,gap_bound,measured_gap,pass";
pub const COMPARE_HEADER: &str = "quantity,value";

fn is_certification(e: &SystemError) -> bool {
    matches!(e, SystemError::ContractionViolation { .. } | SystemError::RangeViolation { .. })
}

/// Maps an error to the documented exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        let certification = if let Some(e) = cause.downcast_ref::<SystemError>() {
            is_certification(e)
        } else if let Some(FormatError::Semantic(e)) = cause.downcast_ref::<FormatError>() {
            is_certification(e)
        } else if let Some(e) = cause.downcast_ref::<AlgoError>() {
            match e {
                AlgoError::VerificationFailure { .. } => true,
                AlgoError::System(s) => is_certification(s),
                _ => false,
            }
        } else {
            false
        };
        if certification {
            return EXIT_CERTIFICATION;
        }
    }
    EXIT_CONFIG
}

/// One executed run together with what is needed to bound its error.
struct Executed {
    outcome: RunOutcome,
    /// Error bound after each completed step, when one is known.
    bounds: Option<Vec<f64>>,
    schedule: Option<GridSchedule>,
}

fn execute(
    system: &GifsSystem,
    seed: &PointSet,
    algo: Algo,
    steps: Option<usize>,
    schedule: Option<&str>,
    budget: u64,
    verify: bool,
) -> Result<Executed> {
    let c = system.contraction();
    match algo {
        Algo::Grid | Algo::GridRound => {
            let spec = schedule.context("--schedule is required for grid algorithms")?;
            let schedule = parse_schedule(spec, steps, system)?;
            let mode = if algo == Algo::Grid { SnapMode::Floor } else { SnapMode::Round };
            let outcome = grid_run(system, seed, &schedule, mode, budget, verify)?;
            let bounds = prefix_bounds(&schedule, c, mode.gap_factor());
            Ok(Executed { outcome, bounds: Some(bounds), schedule: Some(schedule) })
        }
        Algo::Det | Algo::MemoryP => {
            if schedule.is_some() {
                bail!("--schedule only applies to grid algorithms");
            }
            if verify {
                bail!("--verify only applies to grid algorithms");
            }
            let steps = steps.context("--steps is required")?;
            if algo == Algo::MemoryP {
                let seeds = vec![seed.clone(); system.order()];
                let outcome = memory_p_run(system, &seeds, steps, budget)?;
                return Ok(Executed { outcome, bounds: None, schedule: None });
            }
            // h(A_k, A) <= C^k h(A_0, A_1) / (1 - C)
            let first = g_step(system, seed, budget)?.points;
            let h01 = hausdorff(seed, &first)?.h;
            let bounds = (1..=steps as i32).map(|k| c.powi(k) * h01 / (1.0 - c)).collect();
            let outcome = deterministic_run(system, seed, steps, budget)?;
            Ok(Executed { outcome, bounds: Some(bounds), schedule: None })
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn write_image(points: &PointSet, path: &Path, image: &ImageArgs) -> Result<()> {
    let raster = rasterize(points, image.width, image.height, parse_axes(&image.axes)?)?;
    write_ppm(&raster, path)?;
    info!("wrote {} ({} pixels set)", path.display(), raster.count());
    Ok(())
}

fn stats_csv(run: &Executed, timings: bool) -> String {
    let mut out = format!("{STATS_HEADER}\n");
    for (k, s) in run.outcome.stats.steps.iter().enumerate() {
        let millis = if timings { format!("{:.3}", s.millis) } else { String::new() };
        let eps = run.schedule.as_ref().map(|sch| sch.eps()[k].to_string()).unwrap_or_default();
        let bound = run.bounds.as_ref().map(|b| b[k].to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{millis},{eps},{bound}", s.step, s.points, s.tuples);
    }
    out
}

fn certificate_csv(run: &Executed) -> String {
    let mut out = format!("{CERTIFICATE_HEADER}\n");
    for c in &run.outcome.certificates {
        let measured = c.measured.map(|m| m.to_string()).unwrap_or_default();
        let pass = c.measured.is_some_and(|m| m <= c.bound + gifs::algorithms::GAP_SLACK);
        let _ = writeln!(out, "{},{},{},{},{measured},{pass}", c.step, c.resolution, c.eps, c.bound);
    }
    out
}

fn report_status(label: &str, outcome: &RunOutcome) -> bool {
    match &outcome.status {
        RunStatus::Complete => {
            eprintln!(
                "{label}{} points after {} steps, {} map evaluations",
                outcome.points.len(),
                outcome.completed_steps(),
                outcome.stats.total_tuples()
            );
            false
        }
        RunStatus::BudgetExhausted { step, needed, remaining } => {
            eprintln!(
                "{label}partial result: step {step} needs {needed} evaluations but only {remaining} remain; \
                 outputs hold step {}",
                outcome.completed_steps()
            );
            true
        }
    }
}

pub fn run(args: &RunArgs) -> Result<u8> {
    let system = load_system(&args.system)?;
    let seed = parse_seed(args.common.seed.as_deref(), &system)?;
    let a = &args.algo;
    let executed = execute(
        &system,
        &seed,
        a.algo,
        a.steps,
        a.schedule.as_deref(),
        args.common.budget,
        args.verify,
    )?;
    if let Some(path) = &args.out {
        write_image(&executed.outcome.points, path, &args.image)?;
    }
    if let Some(path) = &args.stats {
        write_file(path, &stats_csv(&executed, args.timings))?;
    }
    if let Some(path) = &args.certificate {
        write_file(path, &certificate_csv(&executed))?;
    }
    let partial = report_status("", &executed.outcome);
    Ok(if partial { EXIT_BUDGET } else { EXIT_OK })
}

fn final_bound(run: &Executed) -> String {
    match (&run.bounds, run.outcome.is_partial()) {
        (Some(b), false) => b.last().map(|v| v.to_string()).unwrap_or_default(),
        _ => String::new(),
    }
}

pub fn compare(args: &CompareArgs) -> Result<u8> {
    let system = load_system(&args.system)?;
    let seed = parse_seed(args.common.seed.as_deref(), &system)?;
    let budget = args.common.budget;
    let a = execute(&system, &seed, args.a_algo, args.a_steps, args.a_schedule.as_deref(), budget, false)?;
    let b = execute(&system, &seed, args.b_algo, args.b_steps, args.b_schedule.as_deref(), budget, false)?;
    let mut partial = report_status("a: ", &a.outcome) | report_status("b: ", &b.outcome);

    let h = hausdorff(&a.outcome.points, &b.outcome.points)?.h;
    let mut rows: Vec<(&str, String)> = vec![
        ("a_points", a.outcome.points.len().to_string()),
        ("a_steps", a.outcome.completed_steps().to_string()),
        ("a_bound", final_bound(&a)),
        ("b_points", b.outcome.points.len().to_string()),
        ("b_steps", b.outcome.completed_steps().to_string()),
        ("b_bound", final_bound(&b)),
        ("h", h.to_string()),
    ];
    let sum = match (final_bound(&a).parse::<f64>(), final_bound(&b).parse::<f64>()) {
        (Ok(x), Ok(y)) => (x + y).to_string(),
        _ => String::new(),
    };
    rows.push(("bound_sum", sum));
    if let Some(k) = args.reference_steps {
        let reference = deterministic_run(&system, &seed, k, budget)?;
        partial |= report_status("reference: ", &reference);
        rows.push(("reference_points", reference.points.len().to_string()));
        rows.push(("h_a_reference", hausdorff(&a.outcome.points, &reference.points)?.h.to_string()));
        rows.push(("h_b_reference", hausdorff(&b.outcome.points, &reference.points)?.h.to_string()));
    }
    let mut csv = format!("{COMPARE_HEADER}\n");
    for (q, v) in rows {
        let _ = writeln!(csv, "{q},{v}");
    }
    match &args.csv {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &args.a_out {
        write_image(&a.outcome.points, path, &args.image)?;
    }
    if let Some(path) = &args.b_out {
        write_image(&b.outcome.points, path, &args.image)?;
    }
    Ok(if partial { EXIT_BUDGET } else { EXIT_OK })
}

pub fn cost(args: &CostArgs) -> Result<u8> {
    let params = match &args.builtin {
        Some(name) => CostParams::for_system(&gifs::builtin(name.parse::<Example>()?), args.x0)?,
        None => CostParams::new(
            args.x0,
            args.maps.context("--maps is required")?,
            args.order.context("--order is required")?,
            args.dim.context("--dim is required")?,
            args.contraction.context("--contraction is required")?,
        )?,
    };
    if !(args.eps_start > 0.0 && args.eps_factor > 0.0 && args.eps_factor < 1.0) || args.count == 0 {
        bail!("need --eps-start > 0, --eps-factor in (0, 1) and --count >= 1");
    }
    let rows = ratio_table(&geometric_eps(args.eps_start, args.eps_factor, args.count), &params)?;
    let csv = ratio_csv(&rows);
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

pub fn schedule(args: &ScheduleArgs) -> Result<u8> {
    let system = load_system(&args.system)?;
    let schedule = parse_schedule(&args.schedule, args.steps, &system)?;
    print!("{}", schedule.to_text());
    Ok(EXIT_OK)
}

pub fn export(args: &ExportArgs) -> Result<u8> {
    let example: Example = args.builtin.parse()?;
    print!("{}", builtin_document(example).to_text());
    Ok(EXIT_OK)
}
