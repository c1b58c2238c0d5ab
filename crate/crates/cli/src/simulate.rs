use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use hamchain_core::netsim::{run_scenario, ScenarioConfig, SimError};

use crate::{Ctx, Usage};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON; falls back to the config's `scenario` entry.
    scenario: Option<PathBuf>,
    /// Writes the per-block time series as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

pub fn simulate(ctx: &Ctx, a: SimulateArgs, seed: Option<u64>) -> anyhow::Result<()> {
    let path = a
        .scenario
        .or_else(|| ctx.cfg.scenario.clone())
        .ok_or_else(|| Usage("no scenario given and none set in the config".into()))?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut scenario: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| Usage(format!("invalid scenario {}: {e}", path.display())))?;
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let report = run_scenario(&scenario).map_err(|e| match e {
        SimError::InvalidConfig(m) => anyhow::Error::new(Usage(format!("invalid scenario: {m}"))),
        other => other.into(),
    })?;
    if let Some(csv) = &a.csv {
        std::fs::write(csv, report.series_csv())
            .with_context(|| format!("writing {}", csv.display()))?;
    }
    let m = &report.metrics;
    ctx.emit(m, || {
        format!(
            "blocks produced      {}\n\
             main chain height    {}\n\
             stale blocks         {}\n\
             fork rate            {:.4}\n\
             mean interval        {:.3} s\n\
             mean confirmation    {:.3} s ({} transactions)\n\
             tips agree           {} ({:.0}% of nodes)\n\
             quiesced             {} at t = {:.1} s\n\
             reorgs               {} (deepest {})\n\
             safety violations    {}\n\
             final sa_sweeps      {}\n\
             event digest         {}\n",
            m.blocks_produced,
            m.main_chain_height,
            m.stale_blocks,
            m.fork_rate,
            m.mean_interval,
            m.mean_confirmation_time,
            m.confirmed_transactions,
            m.tips_agree,
            100.0 * m.tip_agreement,
            m.quiesced,
            m.end_time,
            m.reorgs,
            m.max_reorg_depth,
            m.reorg_safety_violations,
            m.final_sa_sweeps,
            m.event_digest
        )
    })
}
