//! Greedy trace: every placement step with the delay reduction it
//! bought, in execution order.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use coopcache::{greedy_caching, zipf_popularity, BaselinePolicy, Objective, ServiceModel};

use crate::scenario::Scenario;

pub fn greedy_trace(scenario: &Scenario, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let p = scenario.params();
    let pop = zipf_popularity(&p)?;
    let run = scenario.file.scenario.as_ref();
    let objective: Objective = run
        .and_then(|r| r.objective)
        .map_or(Objective::MpsqDelay, Into::into);
    let baseline: BaselinePolicy = run
        .and_then(|r| r.baseline)
        .map_or(BaselinePolicy::Strict, Into::into);
    let model: ServiceModel = run
        .and_then(|r| r.service_model)
        .map_or(ServiceModel::FixedAverage, Into::into);
    let tr = greedy_caching(&p, &pop, objective, model, baseline)?;

    let mut text = String::from("step,cluster,file,marginal_s\n");
    for (i, s) in tr.steps.iter().enumerate() {
        text.push_str(&format!("{},{},{},{}\n", i + 1, s.cluster, s.file, s.reduction));
    }
    let path = out_dir.join("greedy_trace.csv");
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {} ({} rows)", path.display(), tr.steps.len());
    println!(
        "objective {:?}: {} s -> {} s over {} steps",
        tr.objective_used,
        tr.initial_objective,
        tr.final_objective,
        tr.steps.len()
    );
    Ok(path)
}
