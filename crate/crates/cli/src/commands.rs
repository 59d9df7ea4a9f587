use std::collections::BTreeMap;
use std::sync::Arc;

use joint_spectrum::geometry::{default_resolution, make_directions, DirectionSet};
use joint_spectrum::jsr::{berger_wang_check, jsr_bounds};
use joint_spectrum::linalg::{exterior_power, proximality_report, UnimodularMatrix};
use joint_spectrum::real::fmt_real;
use joint_spectrum::spectrum::{
    cone_invariance_check, enumerate_products, joint_spectrum_estimate, MatrixSet,
};
use joint_spectrum::walk::{
    additivity_defect_stats, ams_loxodromy_search, decay_points, fit_decay, legendre_transform,
    log_mgf_estimate, lyapunov_estimate, proximal_words, rate_function_estimate, theta_grid,
    GridSpec, WalkConfig, DEFAULT_RATE_CELLS,
};
use joint_spectrum::Error;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::output::{word_text, Csv, OutputDir};
use crate::params::{Params, DEFAULT_EPS};

/// Values the command actually used, defaults included.
pub type Resolved = BTreeMap<String, Value>;

fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(fmt_real(x))
    }
}

fn dirset(p: &Params, d: usize, res: &mut Resolved) -> CliResult<Arc<DirectionSet>> {
    let m = p.dirs.unwrap_or_else(|| default_resolution(d));
    res.insert("dirs".into(), json!(m));
    Ok(Arc::new(make_directions(d, m, p.seed())?))
}

fn positive(name: &str, x: f64) -> CliResult<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::invalid(format!("--{name} must be positive, got {x}")))
    }
}

pub fn spectrum(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let n = p.single_n(12)?;
    let dirs = dirset(p, set.dim(), &mut res)?;
    res.insert("n".into(), json!(n));
    res.insert("budget".into(), json!(p.budget()));
    res.insert("seed".into(), json!(p.seed()));
    let levels = joint_spectrum_estimate(set, n, &dirs, p.budget(), p.seed())?;
    let mut csv = Csv::new(&["n", "products", "mode", "d_kl", "d_step"]);
    for l in &levels {
        csv.row(&[
            l.n.to_string(),
            l.product_count.to_string(),
            l.mode.to_string(),
            fmt_real(l.d_kl),
            fmt_real(l.d_step),
        ]);
    }
    out.write_text("spectrum.csv", &csv.finish())?;
    let last = levels.last().expect("at least one level");
    out.write_json("body.json", &last.kappa_body.to_json())?;
    out.write_json("lambda_body.json", &last.lambda_body.to_json())?;
    Ok(res)
}

pub fn jsr(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let depth = p.depth.unwrap_or(12);
    let delta = p.prune_delta.unwrap_or(1e-3);
    let k = p.k.unwrap_or(1);
    if k == 0 || k >= set.dim() {
        return Err(CliError::invalid(format!("--k must lie in 1..={}", set.dim() - 1)));
    }
    res.insert("depth".into(), json!(depth));
    res.insert("prune_delta".into(), json!(delta));
    res.insert("k".into(), json!(k));
    let wedges = set
        .gens()
        .iter()
        .map(|g| exterior_power(g, k))
        .collect::<Result<Vec<_>, _>>()?;
    let b = jsr_bounds(&wedges, depth, delta)?;
    let mut csv = Csv::new(&["depth", "explored", "kept", "lower", "upper", "witness"]);
    for l in &b.levels {
        csv.row(&[
            l.depth.to_string(),
            l.explored.to_string(),
            l.kept.to_string(),
            fmt_real(l.lower),
            fmt_real(l.upper),
            word_text(&l.witness),
        ]);
    }
    out.write_text("bounds.csv", &csv.finish())?;
    Ok(res)
}

pub fn bergerwang(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let d = set.dim();
    let n = p.single_n(12)?;
    let depth = p.depth.unwrap_or(14);
    let delta = p.prune_delta.unwrap_or(1e-3);
    let ks: Vec<usize> = match p.k {
        Some(k) => vec![k],
        None => (1..d).collect(),
    };
    let dirs = dirset(p, d, &mut res)?;
    res.insert("n".into(), json!(n));
    res.insert("depth".into(), json!(depth));
    res.insert("prune_delta".into(), json!(delta));
    res.insert("k".into(), json!(ks));
    res.insert("budget".into(), json!(p.budget()));
    res.insert("seed".into(), json!(p.seed()));
    let levels = joint_spectrum_estimate(set, n, &dirs, p.budget(), p.seed())?;
    let est = levels.last().expect("at least one level");
    let mut csv = Csv::new(&["k", "lhs", "lambda_lhs", "lower", "upper", "rhs", "gap"]);
    for k in ks {
        let bw = berger_wang_check(set, k, depth, delta, est)?;
        csv.row(&[
            k.to_string(),
            fmt_real(bw.lhs),
            fmt_real(bw.lambda_lhs),
            fmt_real(bw.lower),
            fmt_real(bw.upper),
            fmt_real(bw.rhs),
            fmt_real(bw.gap),
        ]);
    }
    out.write_text("bergerwang.csv", &csv.finish())?;
    Ok(res)
}

fn walk_config(set: &MatrixSet, p: &Params, default_n: usize, res: &mut Resolved) -> CliResult<WalkConfig> {
    let n = p.single_n(default_n)?;
    res.insert("n".into(), json!(n));
    res.insert("samples".into(), json!(p.samples()));
    res.insert("seed".into(), json!(p.seed()));
    let cfg = WalkConfig::new(set.clone(), n, p.samples(), p.seed());
    cfg.validate()?;
    Ok(cfg)
}

pub fn lyapunov(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let cfg = walk_config(set, p, 1000, &mut res)?;
    let est = lyapunov_estimate(&cfg)?;
    let mut csv = Csv::new(&["coord", "value", "stderr"]);
    for (i, (v, s)) in est.vec.coords().iter().zip(&est.stderr).enumerate() {
        csv.row(&[(i + 1).to_string(), fmt_real(*v), fmt_real(*s)]);
    }
    out.write_text("lyapunov.csv", &csv.finish())?;
    out.write_json("lyapunov.json", &est)?;
    Ok(res)
}

pub fn rate(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let cfg = walk_config(set, p, 60, &mut res)?;
    let cells = p.grid.unwrap_or(DEFAULT_RATE_CELLS);
    let projection = p.projection()?;
    res.insert("grid".into(), json!(cells));
    res.insert("projection".into(), json!(projection));
    let grid = GridSpec::covering(set, cells)?;
    let r = rate_function_estimate(&cfg, &grid, projection)?;
    out.write_text("rate.csv", &r.to_csv())?;
    out.write_json("rate.json", &r)?;
    Ok(res)
}

pub fn mgf(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let cfg = walk_config(set, p, 60, &mut res)?;
    let per_axis = p.grid.unwrap_or(41);
    let radius = positive("theta-max", p.theta_max.unwrap_or(5.0))?;
    res.insert("grid".into(), json!(per_axis));
    res.insert("theta_max".into(), json!(radius));
    let thetas = theta_grid(set.dim(), radius, per_axis)?;
    let m = log_mgf_estimate(&cfg, &thetas)?;
    out.write_text("mgf.csv", &m.to_csv())?;

    let grid = GridSpec::covering(set, DEFAULT_RATE_CELLS)?;
    let centers: Vec<_> = (0..grid.total_cells()).map(|i| grid.cell_center(i)).collect();
    let conj = legendre_transform(&m, &centers);
    let axes = grid.axes();
    let mut header: Vec<String> = (1..=axes).map(|a| format!("x{a}")).collect();
    header.push("i_star".into());
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (c, v) in centers.iter().zip(&conj) {
        let mut row: Vec<String> = c.coords()[..axes].iter().map(|x| fmt_real(*x)).collect();
        row.push(fmt_real(*v));
        csv.row(&row);
    }
    out.write_text("legendre.csv", &csv.finish())?;
    Ok(res)
}

pub fn decay(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let n_list = p.n.clone().ok_or_else(|| CliError::invalid("decay needs --n with at least 3 lengths"))?;
    let eps = p.eps.ok_or_else(|| CliError::invalid("decay needs --eps"))?;
    let lyap_n = p.lyap_n.unwrap_or(4000);
    let lyap_samples = p.lyap_samples.unwrap_or(200);
    res.insert("n".into(), json!(n_list));
    res.insert("eps".into(), json!(eps));
    res.insert("samples".into(), json!(p.samples()));
    res.insert("seed".into(), json!(p.seed()));
    res.insert("lyap_n".into(), json!(lyap_n));
    res.insert("lyap_samples".into(), json!(lyap_samples));

    let last = *n_list.last().unwrap_or(&1);
    let lyap = lyapunov_estimate(&WalkConfig::new(set.clone(), lyap_n, lyap_samples, p.seed()))?;
    let cfg = WalkConfig::new(set.clone(), last, p.samples(), p.seed());
    let points = decay_points(&cfg, &lyap.vec, eps, &n_list)?;

    let mut csv = Csv::new(&["n", "count", "log_phat", "fitted"]);
    for pt in &points {
        csv.row(&[
            pt.n.to_string(),
            pt.count.to_string(),
            fmt_real(pt.log_phat.unwrap_or(f64::NEG_INFINITY)),
            pt.log_phat.is_some().to_string(),
        ]);
    }
    out.write_text("decay.csv", &csv.finish())?;

    let lyap_json: Vec<Value> = lyap.vec.coords().iter().map(|x| real(*x)).collect();
    let summary = match fit_decay(points, eps, p.samples()) {
        Ok(fit) => json!({
            "status": "fit",
            "slope": real(fit.slope),
            "intercept": real(fit.intercept),
            "slope_stderr": real(fit.slope_stderr),
            "dropped_zero": fit.dropped_zero,
            "lyapunov": lyap_json,
        }),
        Err(Error::AllZeroCounts) => json!({ "status": "all_zero_counts", "lyapunov": lyap_json }),
        Err(Error::InvalidConfig(msg)) => json!({ "status": "too_few_points", "detail": msg, "lyapunov": lyap_json }),
        Err(e) => return Err(e.into()),
    };
    out.write_json("decay.json", &summary)?;
    Ok(res)
}

pub fn proximal(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let r = p.r();
    let eps = p.eps_or(DEFAULT_EPS);
    res.insert("r".into(), json!(r));
    res.insert("eps".into(), json!(eps));
    let items: Vec<(Vec<usize>, UnimodularMatrix)> = match p.n.as_deref() {
        None => set.gens().iter().cloned().enumerate().map(|(i, g)| (vec![i], g)).collect(),
        Some([n]) => {
            res.insert("n".into(), json!(n));
            res.insert("budget".into(), json!(p.budget()));
            res.insert("seed".into(), json!(p.seed()));
            enumerate_products(set, *n, p.budget(), p.seed())?
                .map(|pr| (pr.word, pr.matrix))
                .collect()
        }
        Some(_) => return Err(CliError::invalid("--n takes a single value for proximal")),
    };
    let mut csv = Csv::new(&[
        "word",
        "k",
        "sv_ratio",
        "eigen_gap",
        "top_evec_distance",
        "degenerate",
        "eps_proximal",
        "r_eps_proximal",
        "loxodromic",
    ]);
    for (word, g) in &items {
        let rep = proximality_report(g, r, eps)?;
        for pr in &rep.per_rep {
            csv.row(&[
                word_text(word),
                pr.k.to_string(),
                fmt_real(pr.sv_ratio),
                fmt_real(pr.eigen_gap),
                fmt_real(pr.top_evec_distance),
                pr.degenerate_spectrum.to_string(),
                pr.eps_proximal.to_string(),
                pr.r_eps_proximal.to_string(),
                rep.loxodromic.to_string(),
            ]);
        }
    }
    out.write_text("proximal.csv", &csv.finish())?;
    Ok(res)
}

pub fn defect(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let lens = p.n_list(&[5, 10, 20]);
    let (r, eps) = (p.r(), p.eps_or(DEFAULT_EPS));
    res.insert("n".into(), json!(lens));
    res.insert("samples".into(), json!(p.samples()));
    res.insert("r".into(), json!(r));
    res.insert("eps".into(), json!(eps));
    res.insert("seed".into(), json!(p.seed()));
    let mut hist = Csv::new(&["word_len", "bin_lo", "bin_hi", "count_all", "count_lox"]);
    let mut summary = Csv::new(&["word_len", "pairs", "lox_pairs", "max_defect_all", "max_defect_lox"]);
    for &len in &lens {
        let st = additivity_defect_stats(set, p.samples(), len, r, eps, p.seed())?;
        let w = st.histogram_all.width;
        for (i, (a, l)) in st
            .histogram_all
            .counts
            .iter()
            .zip(&st.histogram_lox.counts)
            .enumerate()
        {
            hist.row(&[
                len.to_string(),
                fmt_real(i as f64 * w),
                fmt_real((i + 1) as f64 * w),
                a.to_string(),
                l.to_string(),
            ]);
        }
        let top = st.histogram_all.counts.len() as f64 * w;
        hist.row(&[
            len.to_string(),
            fmt_real(top),
            fmt_real(f64::INFINITY),
            st.histogram_all.overflow.to_string(),
            st.histogram_lox.overflow.to_string(),
        ]);
        summary.row(&[
            len.to_string(),
            st.pairs.to_string(),
            st.lox_pairs.to_string(),
            fmt_real(st.max_defect_all),
            // maximum over no pairs
            fmt_real(st.max_defect_lox.unwrap_or(f64::NEG_INFINITY)),
        ]);
    }
    out.write_text("defect_histogram.csv", &hist.finish())?;
    out.write_text("defect.csv", &summary.finish())?;
    Ok(res)
}

pub fn ams(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let len = p.single_n(15)?;
    let f_len = p.f_len.unwrap_or(3);
    let (r, eps) = (p.r(), p.eps_or(DEFAULT_EPS));
    res.insert("n".into(), json!(len));
    res.insert("f_len".into(), json!(f_len));
    res.insert("samples".into(), json!(p.samples()));
    res.insert("r".into(), json!(r));
    res.insert("eps".into(), json!(eps));
    res.insert("seed".into(), json!(p.seed()));
    let words = proximal_words(set, f_len, r, eps)?;
    if words.is_empty() {
        return Err(CliError::invalid(format!(
            "no (r, eps)-loxodromic word of length <= {f_len}; raise --f-len"
        )));
    }
    let f_set = set.from_words(&words)?;
    let rep = ams_loxodromy_search(set, &f_set, len, p.samples(), r, eps, p.seed())?;
    out.write_json(
        "ams.json",
        &json!({
            "word_len": rep.word_len,
            "samples": rep.samples,
            "fixed": rep.fixed,
            "fraction_fixed": real(rep.fraction_fixed),
            "fixing_words": words.iter().map(|w| word_text(w)).collect::<Vec<_>>(),
        }),
    )?;
    let mut csv = Csv::new(&["word"]);
    for w in &rep.worst_words {
        csv.row(&[word_text(w)]);
    }
    out.write_text("ams_failures.csv", &csv.finish())?;
    Ok(res)
}

pub fn cone(set: &MatrixSet, p: &Params, out: &mut OutputDir) -> CliResult<Resolved> {
    let mut res = Resolved::new();
    let lens = p.n_list(&[12, 14]);
    let extra = p.extra_word.clone().unwrap_or_else(|| vec![0, 1]);
    if extra.iter().any(|&i| i >= set.len()) {
        return Err(CliError::invalid("--extra-word refers to a missing generator"));
    }
    let dirs = dirset(p, set.dim(), &mut res)?;
    res.insert("n".into(), json!(lens));
    res.insert("extra_word".into(), json!(extra));
    res.insert("budget".into(), json!(p.budget()));
    res.insert("seed".into(), json!(p.seed()));
    let ext = set.extended_with_words(&[extra])?;
    let mut csv = Csv::new(&["n", "cone_distance"]);
    for &n in &lens {
        let d = cone_invariance_check(set, &ext, n, &dirs, p.budget(), p.seed())?;
        csv.row(&[n.to_string(), fmt_real(d)]);
    }
    out.write_text("cone.csv", &csv.finish())?;
    Ok(res)
}
