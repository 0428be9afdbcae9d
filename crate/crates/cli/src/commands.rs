//! One function per subcommand, each producing a [`Table`].
//!
//! Monte Carlo columns draw from stream `stream_id + L_p` for capacity and
//! `stream_id + L + L_p` for the CRB, so any single row can be recomputed
//! from the echoed config.

use isac_core::capacity::{ergodic_capacity, ergodic_capacity_as_printed};
use isac_core::channel::{CommLink, SlotConfig};
use isac_core::metrics::{argmax_first, efficiency, optimize_pilot_length, utility_from_curves};
use isac_core::montecarlo::{mc_ergodic_capacity, mc_ergodic_crb, Estimate};
use isac_core::sensing::{ergodic_crb, ergodic_crb_series, SenseLink};

use crate::config::{Axis, CapacityForm, PilotChoice, ScenarioConfig};
use crate::error::{CliError, ConfigError, Origin};
use crate::table::{real, Table};

/// Terms used by the series CRB column.
pub const CRB_SERIES_TERMS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    SweepCapacity,
    SweepCrb,
    Tradeoff,
    SweepEfficiency,
    SweepUtility,
    Optimize,
    McValidate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SweepCapacity => "sweep-capacity",
            Command::SweepCrb => "sweep-crb",
            Command::Tradeoff => "tradeoff",
            Command::SweepEfficiency => "sweep-efficiency",
            Command::SweepUtility => "sweep-utility",
            Command::Optimize => "optimize",
            Command::McValidate => "mc-validate",
        }
    }
}

pub fn execute(command: Command, cfg: &ScenarioConfig) -> Result<Table, CliError> {
    match command {
        Command::SweepCapacity => sweep_capacity(cfg),
        Command::SweepCrb => sweep_crb(cfg),
        Command::Tradeoff => tradeoff(cfg),
        Command::SweepEfficiency => sweep_efficiency(cfg),
        Command::SweepUtility => sweep_utility(cfg),
        Command::Optimize => optimize(cfg),
        Command::McValidate => mc_validate(cfg),
    }
}

fn pilot_lengths(cfg: &ScenarioConfig) -> std::ops::RangeInclusive<usize> {
    1..=cfg.symbols - 1
}

fn capacity_at(cfg: &ScenarioConfig, slot: &SlotConfig, comm: &CommLink) -> Result<f64, CliError> {
    let res = match cfg.capacity_form {
        CapacityForm::Canonical => ergodic_capacity(slot, comm)?,
        CapacityForm::AsPrinted => ergodic_capacity_as_printed(slot, comm)?,
    };
    Ok(res.capacity)
}

fn capacity_curve(cfg: &ScenarioConfig, comm: &CommLink) -> Result<Vec<f64>, CliError> {
    let slot = cfg.slot()?;
    pilot_lengths(cfg)
        .map(|l| capacity_at(cfg, &slot.with_pilots(l)?, comm))
        .collect()
}

fn crb_curve(cfg: &ScenarioConfig, sense: &SenseLink) -> Result<Vec<f64>, CliError> {
    pilot_lengths(cfg).map(|l| Ok(ergodic_crb(sense, l)?)).collect()
}

fn mc_capacity(cfg: &ScenarioConfig, slot: &SlotConfig, comm: &CommLink) -> Result<Estimate, CliError> {
    Ok(mc_ergodic_capacity(slot, comm, &cfg.mc(slot.pilots() as u64)?)?)
}

fn mc_crb(cfg: &ScenarioConfig, sense: &SenseLink, pilots: usize) -> Result<Estimate, CliError> {
    Ok(mc_ergodic_crb(sense, pilots, &cfg.mc((cfg.symbols + pilots) as u64)?)?)
}

fn std_error(e: &Estimate) -> String {
    e.std_error.map(real).unwrap_or_default()
}

fn sweep_capacity(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let slot = cfg.slot()?;
    let comm = cfg.comm_at(cfg.snr_db)?;
    let mut table = Table::new(&["L_p", "capacity_closed", "capacity_mc_mean", "capacity_mc_stderr"]);
    for l in pilot_lengths(cfg) {
        let s = slot.with_pilots(l)?;
        let mc = mc_capacity(cfg, &s, &comm)?;
        table.push(vec![
            l.to_string(),
            real(capacity_at(cfg, &s, &comm)?),
            real(mc.mean),
            std_error(&mc),
        ]);
    }
    Ok(table)
}

fn sweep_crb(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let sense = cfg.sense_at(cfg.snr_db)?;
    let mut table = Table::new(&["L_p", "crb_closed", "crb_series", "crb_mc_mean", "crb_mc_stderr"]);
    for l in pilot_lengths(cfg) {
        let mc = mc_crb(cfg, &sense, l)?;
        table.push(vec![
            l.to_string(),
            real(ergodic_crb(&sense, l)?),
            real(ergodic_crb_series(&sense, l, CRB_SERIES_TERMS)?),
            real(mc.mean),
            std_error(&mc),
        ]);
    }
    Ok(table)
}

fn tradeoff(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let comm = cfg.comm_at(cfg.snr_db)?;
    let sense = cfg.sense_at(cfg.snr_db)?;
    let caps = capacity_curve(cfg, &comm)?;
    let crbs = crb_curve(cfg, &sense)?;
    let mut table = Table::new(&["L_p", "capacity", "ergodic_crb"]);
    for (l, (c, d)) in pilot_lengths(cfg).zip(caps.into_iter().zip(crbs)) {
        table.push(vec![l.to_string(), real(c), real(d)]);
    }
    Ok(table)
}

/// Best integer pilot length at one SNR and its efficiency.
fn best_pilots(cfg: &ScenarioConfig, snr_db: f64) -> Result<(usize, f64), CliError> {
    let comm = cfg.comm_at(snr_db)?;
    let sense = cfg.sense_at(snr_db)?;
    let metric = cfg.metric()?;
    match cfg.capacity_form {
        CapacityForm::Canonical => {
            let rep = optimize_pilot_length(&cfg.slot()?, &comm, &sense, &metric)?;
            Ok((rep.l_p_opt, rep.efficiency_at_opt))
        }
        CapacityForm::AsPrinted => {
            let caps = capacity_curve(cfg, &comm)?;
            let crbs = crb_curve(cfg, &sense)?;
            let eff = caps
                .iter()
                .zip(&crbs)
                .map(|(&c, &d)| efficiency(c, d, &metric))
                .collect::<Result<Vec<_>, _>>()?;
            let i = argmax_first(&eff);
            Ok((i + 1, eff[i]))
        }
    }
}

fn efficiency_at(cfg: &ScenarioConfig, snr_db: f64, pilots: usize) -> Result<f64, CliError> {
    let slot = cfg.slot()?.with_pilots(pilots)?;
    let comm = cfg.comm_at(snr_db)?;
    let sense = cfg.sense_at(snr_db)?;
    let c = capacity_at(cfg, &slot, &comm)?;
    Ok(efficiency(c, ergodic_crb(&sense, pilots)?, &cfg.metric()?)?)
}

fn sweep_efficiency(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&["axis_value", "efficiency", "L_p_used"]);
    for v in cfg.axis_values()? {
        let (pilots, eff) = match (cfg.axis, cfg.efficiency_l_p) {
            (Axis::Pilots, _) => {
                let l = v as usize;
                (l, efficiency_at(cfg, cfg.snr_db, l)?)
            }
            (Axis::Snr, PilotChoice::Optimal) => best_pilots(cfg, v)?,
            (Axis::Snr, PilotChoice::Fixed(l)) => (l, efficiency_at(cfg, v, l)?),
        };
        table.push(vec![real(v), real(eff), pilots.to_string()]);
    }
    Ok(table)
}

fn sweep_utility(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let comm = cfg.comm_at(cfg.snr_db)?;
    let sense = cfg.sense_at(cfg.snr_db)?;
    let points = utility_from_curves(&capacity_curve(cfg, &comm)?, &crb_curve(cfg, &sense)?, &cfg.metric()?)?;
    let mut table = Table::new(&["L_p", "utility", "capacity_ratio", "crb_ratio", "feasible"]);
    for p in points {
        table.push(vec![
            p.pilots.to_string(),
            real(p.utility),
            real(p.capacity_ratio),
            real(p.crb_ratio),
            p.feasible.to_string(),
        ]);
    }
    Ok(table)
}

fn optimize(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    if cfg.capacity_form != CapacityForm::Canonical {
        return Err(ConfigError::new(
            Origin::Resolved,
            "capacity_form",
            "optimize needs the continuous canonical form; use sweep-efficiency for the as-printed form",
        )
        .into());
    }
    let rep = optimize_pilot_length(
        &cfg.slot()?,
        &cfg.comm_at(cfg.snr_db)?,
        &cfg.sense_at(cfg.snr_db)?,
        &cfg.metric()?,
    )?;
    let mut table = Table::new(&[
        "L_p_opt",
        "q_star",
        "iterations",
        "converged",
        "efficiency_at_opt",
        "L_p_continuous",
    ]);
    table.push(vec![
        rep.l_p_opt.to_string(),
        real(rep.q_star),
        rep.iterations.to_string(),
        rep.converged.to_string(),
        real(rep.efficiency_at_opt),
        real(rep.l_p_continuous),
    ]);
    Ok(table)
}

fn mc_validate(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let slot = cfg.slot()?;
    let comm = cfg.comm_at(cfg.snr_db)?;
    let sense = cfg.sense_at(cfg.snr_db)?;
    let mut table = Table::new(&["quantity", "L_p", "closed_form", "mc_mean", "mc_stderr", "z_score"]);
    let mut push = |name: &str, l: usize, closed: f64, est: Estimate| {
        table.push(vec![
            name.to_string(),
            l.to_string(),
            real(closed),
            real(est.mean),
            std_error(&est),
            est.z_score(closed).map(real).unwrap_or_default(),
        ]);
    };
    for l in pilot_lengths(cfg) {
        let s = slot.with_pilots(l)?;
        push(
            "capacity",
            l,
            ergodic_capacity(&s, &comm)?.capacity,
            mc_capacity(cfg, &s, &comm)?,
        );
    }
    for l in pilot_lengths(cfg) {
        push("ergodic_crb", l, ergodic_crb(&sense, l)?, mc_crb(cfg, &sense, l)?);
    }
    Ok(table)
}
