use std::sync::atomic::AtomicBool;

use heatsample_core::graph::format_edge_list;
use heatsample_core::harness::{
    bound_report, coherence_heatmap, coherence_profile, noisy_sweep_with_cancel,
    phase_transition_with_cancel, BoundParams, GraphSpec, NoisySweepSpec, PhaseGridSpec, Setup,
};
use heatsample_core::io::{load_signal, Table};
use heatsample_core::recovery::{error_ratio, recover_signal, relative_error, Samples};
use heatsample_core::rng::{derive_seed, rng_from_seed};
use heatsample_core::sampling::{
    allocate_budget, apply_sampling, distribution_for, DistributionChoice,
};
use heatsample_core::spectral::{embed, synth_signal};
use heatsample_core::{
    draw_samples, DiffusionModel, Graph, RecoveryConfig, SparseSpectralCode, TimeGrid,
};
use nalgebra::DVector;
use rand::Rng as _;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    BoundsCmd, BudgetArgs, CoherenceCmd, GraphCmd, GraphSource, GridArgs, ModelArgs, NoisyCmd,
    PhaseCmd, RecoverCmd, SampleCmd,
};
use crate::output::OutDir;
use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn echo(args: &impl Serialize) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn graph_spec(src: &GraphSource, seed: u64) -> Result<GraphSpec, CliError> {
    let chosen = [src.cycle.is_some(), src.community.is_some(), src.load.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if chosen != 1 {
        return Err(usage("give exactly one of --cycle, --community or --load"));
    }
    Ok(if let Some(n) = src.cycle {
        GraphSpec::Cycle { n }
    } else if let Some(sizes) = &src.community {
        GraphSpec::Community {
            sizes: sizes.clone(),
            p_in: src.pin,
            p_out: src.pout,
            seed: src.graph_seed.unwrap_or(seed),
        }
    } else {
        GraphSpec::File {
            path: src.load.clone().expect("checked above"),
        }
    })
}

fn build_graph(src: &GraphSource, seed: u64) -> Result<Graph, CliError> {
    Ok(graph_spec(src, seed)?.build()?)
}

fn time_grid(m: &ModelArgs) -> Result<TimeGrid, CliError> {
    Ok(match &m.times {
        Some(times) => TimeGrid::irregular(times.clone(), m.time_unit)?,
        None => TimeGrid::regular(m.steps)?,
    })
}

fn model_setup(src: &GraphSource, seed: u64, m: &ModelArgs) -> Result<Setup, CliError> {
    let graph = build_graph(src, seed)?;
    Ok(Setup::new(graph, DiffusionModel::heat(m.dt)?, m.k, &time_grid(m)?)?)
}

fn resolve_budgets(
    b: &BudgetArgs,
    nu: &heatsample_core::CoherenceProfile,
    steps: usize,
) -> Result<Vec<usize>, CliError> {
    match (&b.budgets, b.budget) {
        (Some(list), _) => {
            if list.len() != steps {
                return Err(usage(format!("--budgets has {} entries for {steps} time steps", list.len())));
            }
            if list.iter().sum::<usize>() == 0 {
                return Err(usage("total budget must be positive"));
            }
            Ok(list.clone())
        }
        (None, Some(m)) => Ok(allocate_budget(nu, m)?),
        (None, None) => Err(usage("a sample budget is required (--budget or --budgets)")),
    }
}

pub fn graph(c: &GraphCmd) -> Result<(), CliError> {
    let g = build_graph(&c.source, c.common.seed)?;
    let summary = g.summary();
    if summary.disconnected {
        log::warn!("graph has {} components", summary.components);
    }
    let out = OutDir::create(&c.common.out)?;
    out.write("graph.txt", &format_edge_list(&g))?;
    out.write_json("summary.json", &serde_json::to_value(&summary).expect("summary serializes"))?;
    println!(
        "n={} m={} components={} degree min/mean/max = {}/{:.3}/{}",
        summary.n, summary.m, summary.components, summary.min_degree, summary.mean_degree, summary.max_degree
    );
    Ok(())
}

pub fn coherence(c: &CoherenceCmd) -> Result<(), CliError> {
    if c.k_values.is_empty() || c.t_values.is_empty() {
        return Err(usage("--k-values and --t-values must be nonempty"));
    }
    let graph = build_graph(&c.source, c.common.seed)?;
    let n = graph.node_count();
    let k_max = *c.k_values.iter().max().expect("nonempty");
    let t_max = *c.t_values.iter().max().expect("nonempty");
    if k_max > n {
        return Err(usage(format!("bandwidth {k_max} exceeds the {n} graph nodes")));
    }
    let setup = Setup::new(graph, DiffusionModel::heat(c.dt)?, k_max, &TimeGrid::regular(t_max)?)?;
    let choices = match c.distribution {
        Some(d) => vec![d],
        None => vec![DistributionChoice::Uniform, DistributionChoice::Optimal],
    };

    let mut grid = Table::new(&["k", "steps", "distribution", "nu_sq_sum"]);
    let mut profile = Table::new(&["t", "distribution", "nu_sq"]);
    for &choice in &choices {
        for cell in coherence_heatmap(&setup, &c.k_values, &c.t_values, choice)? {
            println!("k={:<5} T={:<3} {:<8} sum nu^2 = {:.6}", cell.k, cell.steps, choice, cell.nu_sq_sum);
            grid.push(vec![
                cell.k.to_string(),
                cell.steps.to_string(),
                choice.to_string(),
                cell.nu_sq_sum.to_string(),
            ]);
        }
        for (t, v) in coherence_profile(&setup, choice)?.iter().enumerate() {
            profile.push(vec![t.to_string(), choice.to_string(), v.to_string()]);
        }
    }
    let out = OutDir::create(&c.common.out)?;
    out.write_table("grid", &grid, c.common.format, false)?;
    out.write_table("profile", &profile, c.common.format, false)?;
    out.write_json("meta.json", &json!({ "args": echo(c), "profile_k": k_max, "profile_steps": t_max }))?;
    Ok(())
}

pub fn sample(c: &SampleCmd) -> Result<(), CliError> {
    let setup = model_setup(&c.source, c.common.seed, &c.model)?;
    let (p, nu) = distribution_for(&setup.dict, c.budget.distribution)?;
    let budgets = resolve_budgets(&c.budget, &nu, setup.dict.steps())?;
    let plan_seed = derive_seed(c.common.seed, "plan", &[]);
    let plan = draw_samples(&p, &budgets, plan_seed)?;
    let out = OutDir::create(&c.common.out)?;
    out.write("plan.csv", &plan.to_csv())?;
    out.write("distribution.csv", &p.to_csv())?;
    out.write_json(
        "meta.json",
        &json!({
            "args": echo(c),
            "budgets": budgets,
            "nu_sq": nu.nu_sq(),
            "plan_seed": plan_seed,
        }),
    )?;
    println!("drew {} samples over {} steps: {:?}", plan.total(), plan.steps(), budgets);
    Ok(())
}

pub fn recover(c: &RecoverCmd) -> Result<(), CliError> {
    let setup = model_setup(&c.source, c.common.seed, &c.model)?;
    let k = setup.dict.k();
    if c.sparsity == 0 || c.sparsity > k {
        return Err(usage(format!("--sparsity must lie in 1..={k}")));
    }
    let (p, nu) = distribution_for(&setup.dict, c.budget.distribution)?;
    let budgets = resolve_budgets(&c.budget, &nu, setup.dict.steps())?;

    let (x, true_support) = match &c.signal {
        Some(path) => {
            let x = load_signal(path)?;
            if x.len() != setup.graph.node_count() {
                return Err(usage(format!(
                    "signal has {} values, graph has {} nodes",
                    x.len(),
                    setup.graph.node_count()
                )));
            }
            (x, None)
        }
        None => {
            let mut rng = rng_from_seed(derive_seed(c.common.seed, "signal", &[]));
            let code = SparseSpectralCode::random(k, c.sparsity, &mut rng)?;
            let support = code.support();
            let vals: Vec<f64> = support.iter().map(|&i| code.coeffs()[i]).collect();
            let (x, _) = synth_signal(&setup.basis, k, &support, &vals, true)?;
            (x, Some(support.iter().map(|i| i + 1).collect::<Vec<_>>()))
        }
    };

    let mut spacetime = embed(&x, &setup.basis, &setup.model, setup.dict.grid())?;
    let plan = draw_samples(&p, &budgets, derive_seed(c.common.seed, "plan", &[]))?;
    let mut psi_e_norm = None;
    if let Some(sigma) = c.noise {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(usage("--noise must be positive"));
        }
        let mut rng = rng_from_seed(derive_seed(c.common.seed, "noise", &[]));
        let e = DVector::from_fn(spacetime.len(), |_, _| rng.random_range(-sigma..=sigma));
        psi_e_norm = Some(apply_sampling(&e, &plan)?.1.norm());
        spacetime += e;
    }
    let (_, y_tilde) = apply_sampling(&spacetime, &plan)?;
    let mut config = RecoveryConfig::new(c.sparsity);
    config.max_iter = c.max_iter;
    let result = recover_signal(Samples::Reweighted(&y_tilde), &plan, &setup.dict, &setup.basis, &config)?;
    let rel = relative_error(&x, &result.x_hat)?;
    let ratio = match psi_e_norm {
        Some(v) => Some(error_ratio(&x, &result.x_hat, v)?),
        None => None,
    };

    let mut doc = result.to_json();
    let obj = doc.as_object_mut().expect("recovery json is an object");
    obj.insert("relative_error".into(), json!(rel));
    obj.insert("error_ratio".into(), json!(ratio));
    obj.insert("psi_e_norm".into(), json!(psi_e_norm));
    obj.insert("true_support".into(), json!(true_support));
    let out = OutDir::create(&c.common.out)?;
    out.write_json("result.json", &doc)?;
    out.write("plan.csv", &plan.to_csv())?;
    out.write_json("meta.json", &json!({ "args": echo(c), "budgets": budgets }))?;
    println!("relative error: {rel:e}");
    if let Some(r) = ratio {
        println!("error ratio: {r:e}");
    }
    Ok(())
}

fn grid_spec(src: &GraphSource, seed: u64, g: &GridArgs) -> Result<PhaseGridSpec, CliError> {
    let spec = PhaseGridSpec {
        graph: graph_spec(src, seed)?,
        dt: g.dt,
        k: g.k,
        steps: g.steps,
        s_values: g.s_values.clone(),
        m_values: g.m_values.clone(),
        trials: g.trials,
        distribution: g.distribution,
        threshold: g.threshold,
        master_seed: seed,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn phase(c: &PhaseCmd, cancel: &AtomicBool) -> Result<(), CliError> {
    let spec = grid_spec(&c.source, c.common.seed, &c.grid)?;
    let setup = spec.setup()?;
    let result = phase_transition_with_cancel(&setup, &spec, Some(cancel))?;
    let complete = result.is_complete();
    let out = OutDir::create(&c.common.out)?;
    out.write_table("grid", &result.table(), c.common.format, !complete)?;
    out.write_json("meta.json", &json!({ "args": echo(c), "result": result.metadata() }))?;
    for (s, row) in spec.s_values.iter().zip(&result.success_rate) {
        let cells: Vec<String> = row.iter().map(|r| format!("{r:.2}")).collect();
        println!("s={s:<3} {}", cells.join(" "));
    }
    if complete {
        Ok(())
    } else {
        Err(CliError::Interrupted)
    }
}

pub fn noisy(c: &NoisyCmd, cancel: &AtomicBool) -> Result<(), CliError> {
    let spec = NoisySweepSpec {
        grid: grid_spec(&c.source, c.common.seed, &c.grid)?,
        sigma: c.sigma,
        keep: c.keep,
    };
    spec.validate()?;
    let setup = spec.grid.setup()?;
    let result = noisy_sweep_with_cancel(&setup, &spec, Some(cancel))?;
    let out = OutDir::create(&c.common.out)?;
    out.write_table("grid", &result.table(), c.common.format, !result.complete)?;
    out.write_json("meta.json", &json!({ "args": echo(c), "result": result.metadata() }))?;
    for cell in &result.cells {
        println!(
            "s={:<3} m={:<5} error ratio {:.4e}  relative error {:.4e}",
            cell.s, cell.m, cell.trimmed_error_ratio, cell.trimmed_relative_error
        );
    }
    if result.complete {
        Ok(())
    } else {
        Err(CliError::Interrupted)
    }
}

pub fn bounds(c: &BoundsCmd) -> Result<(), CliError> {
    let setup = model_setup(&c.source, c.common.seed, &c.model)?;
    let params = BoundParams {
        s: c.sparsity,
        delta: c.delta,
        c: c.c,
        epsilon: c.epsilon,
        eta: c.eta,
        beta: c.beta,
    };
    let rows = bound_report(&setup, c.distribution, &params)?;
    let mut table = Table::new(&["t", "nu_sq", "rip_bound", "tail_bound", "expectation_bound", "budget_share"]);
    for r in &rows {
        table.push(vec![
            r.t.to_string(),
            r.nu_sq.to_string(),
            r.rip_bound.to_string(),
            r.tail_bound.to_string(),
            r.expectation_bound.to_string(),
            r.budget_share.to_string(),
        ]);
        println!(
            "t={:<3} nu^2={:.4} main={:.1} tail={:.1} expectation={:.1}",
            r.t, r.nu_sq, r.rip_bound, r.tail_bound, r.expectation_bound
        );
    }
    let out = OutDir::create(&c.common.out)?;
    out.write_table("grid", &table, c.common.format, false)?;
    out.write_json("meta.json", &json!({ "args": echo(c), "params": params }))?;
    Ok(())
}
