//! Command implementations. Each takes validated inputs from [`crate::opts`]
//! and writes to one output stream; nothing here touches the filesystem
//! directly, so every command works the same on stdout and on --out files.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::{json, Value};
use younglat::ensemble::{
    count, sample_exact, sample_mcmc, site_means, tv_to_uniform, McmcOptions, ParticleConfig,
};
use younglat::inversion::invert;
use younglat::llt::WeightedSumModel;
use younglat::vershik::{
    bose_curve, bose_ode_residual, fermi_curve, height_ode_residual_analytic, identify_curves,
    BoseCurveParams,
};
use younglat::young::{limit_curve, limit_psi, scaled_height, HeightFunction};
use younglat::{Curve, Error, MacroState, ProfileParams, Result};

use crate::opts::{
    discretize, Action, AlphaSpec, ConvergeCmd, CurveKind, InvertCmd, LltCmd, Method, ProfileCmd,
    SampleCmd, VershikCmd,
};

pub fn run(action: Action, w: &mut dyn Write) -> Result<()> {
    match action {
        Action::Invert(c) => run_invert(c, w),
        Action::Profile(c) => run_profile(c, w),
        Action::Sample(c) => run_sample(c, w),
        Action::Llt(c) => run_llt(c, w),
        Action::Converge(c) => run_converge(c, w),
        Action::Vershik(c) => run_vershik(c, w),
    }
}

fn write_json(w: &mut dyn Write, value: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn write_json_line(w: &mut dyn Write, value: &Value) -> Result<()> {
    serde_json::to_writer(&mut *w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// Worker threads for scans over independent work items; `YOUNGLAT_THREADS`
/// (default 1). Results are reassembled in item order, so the output is
/// identical for every thread count.
fn thread_count() -> usize {
    std::env::var("YOUNGLAT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(1)
}

fn parallel_map<T, R>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R>
where
    T: Sync,
    R: Send,
{
    let threads = thread_count().min(items.len());
    if threads <= 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(items.len()));
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let value = f(item);
                results.lock().unwrap().push((i, value));
            });
        }
    });
    let mut pairs = results.into_inner().unwrap();
    pairs.sort_by_key(|&(i, _)| i);
    pairs.into_iter().map(|(_, value)| value).collect()
}

fn run_invert(c: InvertCmd, w: &mut dyn Write) -> Result<()> {
    let state = MacroState::new(c.rho, c.m)?;
    let r = invert(&state, c.tol)?;
    write_json(
        w,
        &json!({
            "a": r.params.a(),
            "b": r.params.b(),
            "residual": r.residual.0.max(r.residual.1),
            "residual_rho": r.residual.0,
            "residual_m": r.residual.1,
            "iterations": r.iterations,
        }),
    )
}

fn run_profile(c: ProfileCmd, mut w: &mut dyn Write) -> Result<()> {
    let curve = match c.curve {
        CurveKind::Beta => {
            let xs = Curve::uniform_grid(-1.0, 1.0, c.grid_points);
            let ys = xs.iter().map(|&x| c.params.beta(x)).collect();
            Curve::linear(xs, ys)?
        }
        CurveKind::Psi => limit_curve(&c.params, c.grid_points)?,
        CurveKind::Bose => {
            let bp = BoseCurveParams::new(c.params.density(), -c.params.b())?;
            bose_curve(&bp, c.grid_points)?
        }
        CurveKind::Fermi => {
            let bp = BoseCurveParams::new(c.params.density(), -c.params.b())?;
            fermi_curve(&bp, c.grid_points)?
        }
    };
    let x_name = if c.curve == CurveKind::Bose { "t" } else { "x" };
    curve.write_csv(&mut w, x_name, c.curve.column())?;
    Ok(())
}

fn run_sample(c: SampleCmd, w: &mut dyn Write) -> Result<()> {
    let spec = c.spec;
    // Draw before writing anything: the samplers materialize the whole batch,
    // so a cap or feasibility failure produces no partial stream.
    let samples = match c.method {
        Method::Exact => sample_exact(&spec, c.count, c.seed)?,
        Method::Mcmc => sample_mcmc(&spec, c.count, McmcOptions::for_size(spec.ell()), c.seed)?,
    };

    let n = spec.n() as f64;
    let mut head = serde_json::Map::new();
    head.insert("type".into(), "spec".into());
    head.insert("ell".into(), spec.ell().into());
    head.insert("n".into(), spec.n().into());
    head.insert("k".into(), spec.particle_number().into());
    head.insert("m".into(), spec.weighted_sum().into());
    if let Some((rho, m)) = c.target {
        head.insert("target_rho".into(), rho.into());
        head.insert("target_m".into(), m.into());
    }
    head.insert(
        "realized_rho".into(),
        (spec.particle_number() as f64 / n).into(),
    );
    head.insert(
        "realized_m".into(),
        (spec.weighted_sum() as f64 / (n * n)).into(),
    );
    head.insert("method".into(), c.method.name().into());
    head.insert("count".into(), (c.count as u64).into());
    head.insert("seed".into(), c.seed.into());
    write_json_line(w, &Value::Object(head))?;

    for (index, s) in samples.iter().enumerate() {
        write_json_line(
            w,
            &json!({
                "type": "sample",
                "index": index,
                "ell": s.ell(),
                "k": s.particle_number(),
                "m": s.weighted_sum(),
                "occupancy": s.occupancy(),
            }),
        )?;
    }

    let means = site_means(&samples)?;
    write_json_line(w, &json!({ "type": "profile", "site_means": means }))?;

    let first = scaled_height(&HeightFunction::from_config(&samples[0]));
    let xs = first.grid().to_vec();
    let mut mean_height = vec![0.0; xs.len()];
    for s in &samples {
        let curve = scaled_height(&HeightFunction::from_config(s));
        for (acc, v) in mean_height.iter_mut().zip(curve.values()) {
            *acc += v;
        }
    }
    for v in &mut mean_height {
        *v /= samples.len() as f64;
    }
    write_json_line(
        w,
        &json!({ "type": "height", "x": xs, "mean_height": mean_height }),
    )?;

    // Total-variation distance to the uniform law needs the class enumerated;
    // past that cap the record is simply omitted.
    match tv_to_uniform(&spec, &samples) {
        Ok(tv) => {
            let class_size = count(&spec)?.to_string();
            write_json_line(
                w,
                &json!({
                    "type": "uniformity",
                    "tv_to_uniform": tv,
                    "class_size": class_size,
                }),
            )?;
        }
        Err(Error::CapExceeded(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(())
}

fn run_llt(c: LltCmd, w: &mut dyn Write) -> Result<()> {
    let sups = parallel_map(&c.ns, |&n| -> Result<f64> {
        let model = match c.alpha {
            AlphaSpec::Const(p) => WeightedSumModel::from_const(n, p, c.defects.clone())?,
            AlphaSpec::Profile(a, b) => {
                let params = ProfileParams::new(a, b)?;
                WeightedSumModel::from_profile(n, |x| params.beta(2.0 * x - 1.0), c.defects.clone())?
            }
        };
        model.exact_pmf()?.sup_error()
    });
    // resolve every row before the first write, so a failure cannot leave a
    // half-written table behind
    let sups = sups.into_iter().collect::<Result<Vec<f64>>>()?;
    writeln!(w, "n,sup_error,slope")?;
    let mut prev: Option<(usize, f64)> = None;
    for (&n, sup) in c.ns.iter().zip(sups) {
        match prev {
            None => writeln!(w, "{n},{sup:.16e},")?,
            Some((pn, pe)) => {
                let slope = (sup / pe).ln() / (n as f64 / pn as f64).ln();
                writeln!(w, "{n},{sup:.16e},{slope:.16e}")?;
            }
        }
        prev = Some((n, sup));
    }
    Ok(())
}

/// Exact sup distance between a sampled step curve and the monotone limit
/// curve: within each cell the step value is constant and the limit curve is
/// monotone, so the gap is extremal at the cell edges.
fn sup_height_gap(cfg: &ParticleConfig, p: &ProfileParams) -> f64 {
    let curve = scaled_height(&HeightFunction::from_config(cfg));
    let xs = curve.grid();
    let ys = curve.values();
    let last = xs.len() - 1;
    let mut sup: f64 = (ys[last] - limit_psi(p, xs[last])).abs();
    for i in 0..last {
        let v = ys[i];
        sup = sup.max((v - limit_psi(p, xs[i])).abs());
        sup = sup.max((v - limit_psi(p, xs[i + 1])).abs());
    }
    sup
}

fn run_converge(c: ConvergeCmd, w: &mut dyn Write) -> Result<()> {
    let state = MacroState::new(c.rho, c.m)?;
    let params = invert(&state, c.tol)?.params;
    let rows = parallel_map(&c.ells, |&ell| -> Result<(f64, f64)> {
        if c.self_test {
            let curve = limit_curve(&params, 2 * ell as usize + 1)?;
            let d = younglat::curve::sup_distance(&curve, &curve)?;
            return Ok((d, 0.0));
        }
        let spec = discretize(ell, c.rho, c.m)?;
        let samples = sample_mcmc(
            &spec,
            c.samples,
            McmcOptions::for_size(ell),
            c.seed.wrapping_add(ell as u64),
        )?;
        let sups: Vec<f64> = samples.iter().map(|s| sup_height_gap(s, &params)).collect();
        let len = sups.len() as f64;
        let mean = sups.iter().sum::<f64>() / len;
        let sd = if sups.len() < 2 {
            0.0
        } else {
            (sups.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (len - 1.0)).sqrt()
        };
        Ok((mean, sd))
    });
    let rows = rows.into_iter().collect::<Result<Vec<(f64, f64)>>>()?;
    writeln!(w, "ell,mean_sup,sd")?;
    for (&ell, (mean, sd)) in c.ells.iter().zip(rows) {
        writeln!(w, "{ell},{mean:.16e},{sd:.16e}")?;
    }
    Ok(())
}

fn run_vershik(c: VershikCmd, w: &mut dyn Write) -> Result<()> {
    let state = MacroState::new(c.rho, c.m)?;
    let id = identify_curves(&state, c.grid_points)?;
    let p = id.params;
    // Height-chart residual of psi'' + k psi' (1 + psi') = 0 with k = -b,
    // evaluated with the analytic derivatives psi' = -beta, psi'' = -beta'.
    let xs = Curve::uniform_grid(-1.0, 1.0, c.grid_points);
    let d1: Vec<f64> = xs.iter().map(|&x| -p.beta(x)).collect();
    let d2: Vec<f64> = xs.iter().map(|&x| -p.beta_prime(x)).collect();
    let fermi_residual = height_ode_residual_analytic(&d1, &d2, -p.b())?;
    let bose = bose_curve(&id.bose, c.grid_points)?;
    let bose_residual = bose_ode_residual(&bose, id.bose.c_bar())?;
    write_json(
        w,
        &json!({
            "a": p.a(),
            "b": p.b(),
            "rho_bar": id.bose.rho_bar(),
            "c_bar": id.bose.c_bar(),
            "sup_discrepancy": id.sup_discrepancy,
            "ode_residual_fermi": fermi_residual,
            "ode_residual_bose": bose_residual,
        }),
    )
}
