//! Parsing of command-line value specs: systems, schedules, seeds, axes.

use std::fs;

use anyhow::{bail, Context, Result};

use gifs::sysio::{builtin_by_name, parse_system_with};
use gifs::{optimal_plan, GifsSystem, GridSchedule, PointSet, RangePolicy};

use crate::SystemArgs;

pub fn load_system(args: &SystemArgs) -> Result<GifsSystem> {
    if let Some(name) = &args.builtin {
        return Ok(builtin_by_name(name)?);
    }
    let path = args.system.as_ref().context("either --builtin or --system is required")?;
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let policy = if args.project_range { RangePolicy::Project } else { RangePolicy::Strict };
    parse_system_with(&text, policy).with_context(|| format!("in {}", path.display()))
}

/// `x1,y1;x2,y2;...`, or the cube center when absent.
pub fn parse_seed(spec: Option<&str>, system: &GifsSystem) -> Result<PointSet> {
    let dim = system.dim();
    let Some(spec) = spec else {
        return Ok(PointSet::center(dim, system.side())?);
    };
    let mut coords = Vec::new();
    for (i, point) in spec.split(';').enumerate() {
        let values: Vec<f64> = point
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("seed point {} ({point:?}) is not a list of numbers", i + 1))?;
        if values.len() != dim {
            bail!("seed point {} has {} coordinates, the system has dimension {dim}", i + 1, values.len());
        }
        coords.extend(values);
    }
    PointSet::new(dim, system.side(), coords).context("invalid seed")
}

/// Builds the schedule described by `spec`, truncated to `steps` if given.
pub fn parse_schedule(spec: &str, steps: Option<usize>, system: &GifsSystem) -> Result<GridSchedule> {
    let (side, dim) = (system.side(), system.dim());
    let need_steps = || steps.with_context(|| format!("schedule {spec:?} needs --steps"));
    let full = match spec.split_once(':') {
        None if spec == "quad" => GridSchedule::quadratic(need_steps()?, side, dim)?,
        Some(("const", n)) => {
            let n: u32 = n.parse().with_context(|| format!("bad resolution in {spec:?}"))?;
            GridSchedule::constant(n, need_steps()?, side, dim)?
        }
        Some(("optimal", eps)) => {
            let eps: f64 = eps.parse().with_context(|| format!("bad target in {spec:?}"))?;
            let plan = optimal_plan(eps, system.contraction(), side, dim, system.order())?;
            GridSchedule::from_plan(&plan, side, dim)?
        }
        Some(("file", path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
            GridSchedule::parse(&text, side, dim).with_context(|| format!("in {path}"))?
        }
        _ => bail!("unknown schedule {spec:?}; expected quad, optimal:<eps>, const:<n> or file:<path>"),
    };
    match steps {
        Some(s) if s > full.len() => bail!("schedule {spec:?} has only {} steps, {s} requested", full.len()),
        Some(s) => Ok(full.prefix(s)?),
        None => Ok(full),
    }
}

pub fn parse_axes(spec: &str) -> Result<(usize, usize)> {
    let (i, j) = spec.split_once(',').context("axes must look like i,j")?;
    Ok((i.trim().parse()?, j.trim().parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gifs::{builtin, Example};

    #[test]
    fn seeds() {
        let s = builtin(Example::A);
        assert_eq!(parse_seed(None, &s).unwrap().point(0), &[0.5, 0.5]);
        assert_eq!(parse_seed(Some("0.1,0.2; 0.3,0.4"), &s).unwrap().len(), 2);
        assert!(parse_seed(Some("0.1"), &s).is_err());
        assert!(parse_seed(Some("0.1,2"), &s).is_err());
    }

    #[test]
    fn schedules() {
        let s = builtin(Example::A);
        assert_eq!(parse_schedule("quad", Some(3), &s).unwrap().resolutions(), &[1, 4, 9]);
        assert_eq!(parse_schedule("const:5", Some(2), &s).unwrap().resolutions(), &[5, 5]);
        assert!(parse_schedule("quad", None, &s).is_err());
        assert!(parse_schedule("optimal:0.05", None, &s).unwrap().len() > 3);
        assert!(parse_schedule("optimal:0.05", Some(10_000), &s).is_err());
        assert!(parse_schedule("cubic", Some(3), &s).is_err());
    }

    #[test]
    fn axes() {
        assert_eq!(parse_axes("0,2").unwrap(), (0, 2));
        assert!(parse_axes("1").is_err());
    }
}
