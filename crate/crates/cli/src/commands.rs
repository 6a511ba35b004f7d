use crate::{Cli, Command, ConstructArgs, ConstructOp, DistanceArgs, EmbedArgs, EmbedKind, ExpanderArgs, ExtractArgs};
use crate::{GhostArgs, HomotopyArgs, NormArgs, TrialArgs};
use matfin::coarse::{self, FiniteAction, MetricSpace};
use matfin::constructions::{self as cons, BlockLayout};
use matfin::expander;
use matfin::ghost;
use matfin::kuiper::{self, ContractConfig};
use matfin::report::{emit_plot, Metric, RunReport, Series};
use matfin::rng::{child_seed, rng_for, Rng};
use matfin::{c64, dense, io, Complex64, Error, Result, SparseOp, SparsityProfile};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde_json::json;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

/// Where the JSON report goes, if anywhere besides stdout.
pub fn report_path(cli: &Cli) -> Option<PathBuf> {
    match &cli.command {
        Command::Construct(_) => None,
        Command::Ghost(g) => g.report.clone().or_else(|| cli.out.clone()),
        _ => cli.out.clone(),
    }
}

pub fn run(cli: &Cli, report: &mut RunReport) -> Result<()> {
    if let Some(p) = report_path(cli) {
        report.artifacts.push(p.display().to_string());
    }
    let series = match &cli.command {
        Command::Construct(a) => construct(a, cli.out.as_deref(), report)?,
        Command::AlgebraCheck(a) => algebra_check(a, cli.seed, report)?,
        Command::NormBound(a) => norm_bound(a, cli.seed, report)?,
        Command::Distance(a) => distance(a, report)?,
        Command::Expander(a) => expander_pipeline(a, cli.seed, report)?,
        Command::Ghost(a) => ghost_report(a, report)?,
        Command::IdealExtract(a) => ideal_extract(a, report)?,
        Command::Embed(a) => embed(a, cli.seed, report)?,
        Command::Homotopy(a) => homotopy(a, cli.seed, report)?,
    };
    if let Some(path) = &cli.plot {
        let (title, series) = series.ok_or_else(|| Error::InvalidArgument(format!("{} has no plot", report.command)))?;
        emit_plot(&title, &series, path)?;
        report.artifacts.push(path.display().to_string());
    }
    Ok(())
}

type Plot = Option<(String, Vec<Series>)>;

/// Passes when `value > bound`.
fn above(name: &str, value: f64, bound: f64) -> Metric {
    Metric { name: name.into(), value, bound, pass: value > bound }
}

fn read_op(path: &Path) -> Result<SparseOp> {
    io::read_coordinate(BufReader::new(File::open(path)?))
}

fn profile_json(p: SparsityProfile) -> serde_json::Value {
    json!([p.row_max, p.col_max])
}

/// `k` random partial permutations with entry moduli at most `c`: profile
/// at most `(k, k)`.
pub fn random_sparse(rng: &mut Rng, n: usize, k: usize, c: f64) -> SparseOp {
    let density: f64 = rng.gen_range(0.3..=1.0);
    let mut trip = Vec::new();
    for _ in 0..k {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (j, &i) in perm.iter().enumerate() {
            if rng.gen_bool(density) {
                let z = Complex64::from_polar(rng.gen_range(0.0..=c), rng.gen_range(0.0..std::f64::consts::TAU));
                trip.push((i, j, z));
            }
        }
    }
    SparseOp::from_triplets(n, trip).expect("inside window")
}

/// Identity on the first `cols` columns, zero elsewhere.
fn partial_identity(n: usize, cols: usize) -> SparseOp {
    SparseOp::from_triplets(n, (0..cols.min(n)).map(|j| (j, j, c64(1.0)))).expect("inside window")
}

fn idempotent_defect(p: &SparseOp) -> Result<f64> {
    p.mul(p)?.max_entry_diff(p)
}

fn construct(a: &ConstructArgs, out: Option<&Path>, report: &mut RunReport) -> Result<Plot> {
    let layout = BlockLayout::standard(a.blocks);
    let window = a.window.unwrap_or(layout.total());
    report.param("op", format!("{:?}", a.op).to_lowercase()).param("blocks", a.blocks).param("window", window);
    let op = match a.op {
        ConstructOp::V => {
            let v = cons::make_averaging_isometry(&layout, window)?;
            let cols = a.blocks.min(window);
            report.metric(Metric::at_most("isometry_defect", v.adjoint().mul(&v)?.max_entry_diff(&partial_identity(window, cols))?, 1e-12));
            v
        }
        ConstructOp::U => {
            let u = cons::make_interleaved_unitary(&layout);
            report.data("interior_cols", u.interior_cols).data("interior_rows", u.interior_rows);
            report.metric(Metric::at_most("unitarity_defect", cons::unitarity_defect(&u.op), 1e-10));
            u.op.extend_window(window)?
        }
        ConstructOp::P => {
            let p = cons::make_block_projection(&layout).to_sparse(window)?;
            report.metric(Metric::at_most("idempotent_defect", idempotent_defect(&p)?, 1e-12));
            report.metric(Metric::at_most("self_adjoint_defect", p.max_entry_diff(&p.adjoint())?, 1e-12));
            p
        }
        ConstructOp::M2p => {
            let u = cons::make_interleaved_unitary(&layout);
            let p = cons::make_m2_projection(&u.op)?;
            report.metric(Metric::at_most("idempotent_defect", idempotent_defect(&p)?, 1e-12));
            report.metric(Metric::at_most("self_adjoint_defect", p.max_entry_diff(&p.adjoint())?, 1e-12));
            p
        }
        ConstructOp::Shift => {
            let (v1, v2) = cons::make_shift_isometries(window);
            let id = |v: &SparseOp| partial_identity(window, v.nnz());
            let d1 = v1.adjoint().mul(&v1)?.max_entry_diff(&id(&v1))?;
            let d2 = v2.adjoint().mul(&v2)?.max_entry_diff(&id(&v2))?;
            let cross = v1.adjoint().mul(&v2)?.max_modulus();
            let sum = v1.mul(&v1.adjoint())?.add(&v2.mul(&v2.adjoint())?)?.max_entry_diff(&SparseOp::identity(window))?;
            report.metric(Metric::at_most("isometry_defect", d1.max(d2), 0.0));
            report.metric(Metric::at_most("orthogonality_defect", cross, 0.0));
            report.metric(Metric::at_most("range_sum_defect", sum, 0.0));
            v1
        }
        ConstructOp::Polar => {
            let pc = cons::make_polar_counterexample(&layout, &cons::default_lambdas(window))?;
            report.metric(Metric::at_most("recovered_isometry_diff", pc.recover_isometry().max_entry_diff(&pc.v)?, 1e-12));
            let r = window / 2;
            let err = dense::norm(&pc.a.sub(&pc.a.truncate_compact(r))?);
            report.metric(Metric::at_most("truncation_error", err, pc.truncation_bound(&layout, r) + 1e-12));
            pc.a
        }
    };
    report.data("window", op.window()).data("nnz", op.nnz()).data("profile", profile_json(op.profile()));
    if let Some(path) = out {
        io::write_coordinate(&op, File::create(path)?)?;
        report.artifacts.push(path.display().to_string());
    }
    Ok(None)
}

fn algebra_check(a: &TrialArgs, seed: u64, report: &mut RunReport) -> Result<Plot> {
    report.param("trials", a.trials).param("k", a.k).param("window", a.window);
    let mut rng = rng_for(seed, "algebra-check");
    let (mut add_bad, mut mul_bad, mut adj_bad, mut exact_bad) = (0, 0, 0, 0);
    let mut adjoint_law = 0.0_f64;
    for _ in 0..a.trials {
        let x = random_sparse(&mut rng, a.window, a.k, 1.0);
        let y = random_sparse(&mut rng, a.window, a.k, 1.0);
        let (px, py) = (x.profile(), y.profile());
        let s = x.add(&y)?;
        let p = x.mul(&y)?;
        let xa = x.adjoint();
        let k = a.k;
        if !s.profile().within(px.sum_bound(py)) || !s.profile().within(SparsityProfile::new(2 * k, 2 * k)) {
            add_bad += 1;
        }
        if !p.profile().within(px.product_bound(py)) || !p.profile().within(SparsityProfile::new(k * k, k * k)) {
            mul_bad += 1;
        }
        if xa.profile() != px.swapped() {
            adj_bad += 1;
        }
        for z in [&s, &p, &xa] {
            let mut rows = vec![0; a.window];
            let mut cols = vec![0; a.window];
            z.iter().for_each(|(i, j, _)| {
                rows[i] += 1;
                cols[j] += 1;
            });
            let recount = SparsityProfile::new(*rows.iter().max().unwrap_or(&0), *cols.iter().max().unwrap_or(&0));
            if recount != z.profile() {
                exact_bad += 1;
            }
        }
        adjoint_law = adjoint_law.max(p.adjoint().max_entry_diff(&y.adjoint().mul(&xa)?)?);
    }
    report
        .metric(Metric::equals("add_violations", add_bad as f64, 0.0))
        .metric(Metric::equals("mul_violations", mul_bad as f64, 0.0))
        .metric(Metric::equals("adjoint_violations", adj_bad as f64, 0.0))
        .metric(Metric::equals("profile_recount_mismatches", exact_bad as f64, 0.0))
        .metric(Metric::at_most("product_adjoint_defect", adjoint_law, 1e-12));
    Ok(None)
}

fn norm_bound(a: &NormArgs, seed: u64, report: &mut RunReport) -> Result<Plot> {
    report.param("trials", a.trials).param("k", a.k).param("window", a.window).param("c", a.c);
    if !(a.c > 0.0) {
        return Err(Error::InvalidArgument("c must be positive".into()));
    }
    let mut rng = rng_for(seed, "norm-bound");
    let (mut over, mut gap, mut ratios) = (f64::NEG_INFINITY, 0.0_f64, Vec::with_capacity(a.trials));
    for t in 0..a.trials {
        let x = random_sparse(&mut rng, a.window, a.k, a.c);
        let est = x.operator_norm(1e-12)?;
        let bound = a.c * (a.k as f64).powf(1.5);
        over = over.max(est - bound).max(est - x.norm_upper_bound());
        gap = gap.max((est - dense::norm(&x)).abs());
        ratios.push((t as f64, est / bound));
    }
    report.metric(Metric::at_most("norm_minus_bound", over, 1e-9)).metric(Metric::at_most("power_vs_dense", gap, 1e-8));
    report.data("max_ratio", ratios.iter().map(|r| r.1).fold(0.0, f64::max));
    Ok(Some(("operator norm / C k^1.5".into(), vec![Series::new("ratio", ratios)])))
}

fn distance(a: &DistanceArgs, report: &mut RunReport) -> Result<Plot> {
    report.param("blocks", a.blocks).param("k", a.k);
    let (mut worst, mut curve, mut expect) = (0.0_f64, Vec::new(), Vec::new());
    let mut rows = Vec::new();
    for n in 1..=a.blocks {
        let col = vec![c64(1.0 / (n as f64).sqrt()); n];
        let err = matfin::best_k_sparse_column_error(&col, a.k);
        let exact = (n.saturating_sub(a.k) as f64 / n as f64).sqrt();
        worst = worst.max((err - exact).abs());
        curve.push((n as f64, err));
        expect.push((n as f64, exact));
        rows.push(json!({"n": n, "error": err, "expected": exact}));
    }
    report.metric(Metric::at_most("max_deviation", worst, 1e-12));
    report.data("curve", rows).data("sup_error", curve.iter().map(|p| p.1).fold(0.0, f64::max));
    Ok(Some((
        format!("best {}-sparse column error", a.k),
        vec![Series::new("measured", curve), Series::new("sqrt((n-k)/n)", expect)],
    )))
}

fn expander_pipeline(a: &ExpanderArgs, seed: u64, report: &mut RunReport) -> Result<Plot> {
    report.param("n_max", a.n_max).param("degree", a.degree).param("s", a.s);
    let r = expander::build_even_projection_pipeline(a.n_max, a.degree, a.s, seed)?;
    let min_gap = r.per_block.iter().filter(|b| b.m > 1).map(|b| b.lambda1).fold(f64::INFINITY, f64::min);
    let max_l = r.per_block.iter().map(|b| b.laplacian_norm).fold(0.0, f64::max);
    let corner = r.corner.iter().map(|c| c.exact - c.bound).fold(f64::NEG_INFINITY, f64::max);
    report
        .metric(above("min_lambda1", min_gap, 0.0))
        .metric(Metric::at_most("max_err", r.max_err, 1.0 / a.s as f64 + 1e-6))
        .metric(Metric::at_most("max_laplacian_norm", max_l, 2.0 + 1e-12))
        .metric(Metric::at_most("corner_excess", corner, 1e-10))
        .metric(Metric::at_most("measured_profile", r.measured_profile as f64, r.profile_bound));
    report
        .data("params", &r.params)
        .data("per_block", &r.per_block)
        .data("delta_hat", r.delta_hat)
        .data("filter_degree", r.filter_degree)
        .data("profile_bound", r.profile_bound)
        .data("measured_profile", r.measured_profile)
        .data("max_err", r.max_err)
        .data("corner", &r.corner);
    let pts = |f: fn(&expander::CornerReport) -> f64| r.corner.iter().map(|c| (c.n as f64, f(c))).collect();
    Ok(Some((
        "corner estimate".into(),
        vec![Series::new("exact", pts(|c| c.exact)), Series::new("(2+2sqrt(2n))/(2n+1)", pts(|c| c.bound))],
    )))
}

fn tail_plot(tail: &ghost::TailProfile) -> Plot {
    let pts = tail.values.iter().enumerate().map(|(t, &v)| ((t + 1) as f64, v)).collect();
    Some(("tail profile".into(), vec![Series::new("tail", pts)]))
}

fn ghost_report(a: &GhostArgs, report: &mut RunReport) -> Result<Plot> {
    report.param("in", a.input.display().to_string());
    let op = read_op(&a.input)?;
    let tail = ghost::tail_profile(&op);
    let (row_l1, col_l1) = ghost::l1_bound(&op);
    let monotone = tail.values.windows(2).all(|w| w[1] <= w[0]);
    report.metric(Metric { name: "tail_nonincreasing".into(), value: monotone as u8 as f64, bound: 1.0, pass: monotone });
    report
        .data("window", op.window())
        .data("nnz", op.nnz())
        .data("profile", profile_json(op.profile()))
        .data("tail", &tail.values)
        .data("tail_last", tail.values.last().copied().unwrap_or(0.0))
        .data("l1_rows", row_l1)
        .data("l1_cols", col_l1)
        .data("self_adjoint_defect", op.max_entry_diff(&op.adjoint())?);
    if let Some(n_split) = a.n_split {
        report.param("n_split", n_split);
        let b = ghost::ideal_product_bound(&op, &op, n_split)?;
        report.metric(Metric::at_most("far_corner_max", b.far_max, b.bound + 1e-12));
        report.data("product_bound", &b);
    }
    Ok(tail_plot(&tail))
}

fn ideal_extract(a: &ExtractArgs, report: &mut RunReport) -> Result<Plot> {
    report.param("in", a.input.display().to_string()).param("delta", a.delta).param("k", a.k);
    let op = read_op(&a.input)?;
    let tail = ghost::tail_profile(&op);
    report.data("tail", &tail.values);
    let cert = ghost::extract(&op, a.delta, a.k)?;
    let sigma = ghost::compressed(&op, &cert.indices).singular_values().min();
    report
        .metric(above("sigma_min", cert.sigma_min, a.delta / 2.0))
        .metric(above("sigma_min_recomputed", sigma, a.delta / 2.0))
        .metric(Metric::at_most("approx_error", cert.approx_error, a.delta / 4.0));
    report
        .data("case", cert.case)
        .data("indices", cert.indices.iter().map(|i| i + 1).collect::<Vec<_>>())
        .data("pairs", cert.pairs.iter().map(|p| (p.0 + 1, p.1 + 1)).collect::<Vec<_>>())
        .data("sigma_min", cert.sigma_min);
    Ok(tail_plot(&tail))
}

fn embed(a: &EmbedArgs, seed: u64, report: &mut RunReport) -> Result<Plot> {
    report.param("kind", format!("{:?}", a.kind).to_lowercase());
    match a.kind {
        EmbedKind::Action => {
            report.param("n", a.n);
            let act = FiniteAction::free_group(a.n, child_seed(seed, "embed-action"));
            let mut rng = rng_for(seed, "embed-coefficients");
            let coeffs: Vec<Complex64> = (0..act.generator_count())
                .map(|_| Complex64::from_polar(rng.gen_range(0.1..=1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            let op = coarse::action_operator(&act, &coeffs, None)?;
            let r = act.generator_count();
            report.metric(Metric::at_most("profile", op.profile().k() as f64, r as f64));
            report.data("generators", r).data("profile", profile_json(op.profile())).data("nnz", op.nnz());
        }
        EmbedKind::Adjacency => {
            let (n, edges) = match &a.input {
                Some(path) => {
                    let edges = io::read_edge_list(BufReader::new(File::open(path)?))?;
                    let n = edges.iter().map(|e| e.0.max(e.1) + 1).max().unwrap_or(0);
                    (n, edges)
                }
                None => {
                    report.param("n", a.n).param("degree", a.degree);
                    let g = expander::random_regular_graph(a.n, a.degree, child_seed(seed, "embed-graph"))?;
                    (a.n, g.edges())
                }
            };
            let adj = coarse::adjacency_from_edges(n, &edges)?;
            let op = coarse::adjacency_operator(&adj)?;
            let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
            report.metric(Metric::at_most("profile", op.profile().k() as f64, max_degree as f64));
            report.metric(Metric::at_most("self_adjoint_defect", op.max_entry_diff(&op.adjoint())?, 0.0));
            report.data("vertices", n).data("edges", edges.len()).data("max_degree", max_degree);
        }
        EmbedKind::Band => {
            let space = match &a.input {
                Some(path) => MetricSpace::from_table(io::read_metric_table(BufReader::new(File::open(path)?))?)?,
                None => {
                    report.param("n", a.n);
                    MetricSpace::path(a.n)
                }
            };
            let (r1, r2) = (a.radius, a.radius2);
            report.param("radius", r1).param("radius2", r2);
            let space = space.with_witness(&[r1, r2, r1 + r2]);
            let kernel = |x: usize, y: usize| c64(1.0 / (1.0 + space.distance(x, y) as f64));
            let b1 = coarse::band_operator(&space, kernel, r1);
            let b2 = coarse::band_operator(&space, kernel, r2);
            let prod = b1.op.mul(&b2.op)?;
            report
                .metric(Metric::at_most("profile", b1.op.profile().k() as f64, b1.ball_bound as f64))
                .metric(Metric::equals("band_violations", coarse::band_violations(&b1.op, &space, r1) as f64, 0.0))
                .metric(Metric::equals("product_band_violations", coarse::band_violations(&prod, &space, r1 + r2) as f64, 0.0));
            report
                .data("points", space.point_count())
                .data("ball_bound", b1.ball_bound)
                .data("profile", profile_json(b1.op.profile()))
                .data("product_profile", profile_json(prod.profile()));
        }
    }
    Ok(None)
}

fn homotopy(a: &HomotopyArgs, seed: u64, report: &mut RunReport) -> Result<Plot> {
    report.param("steps", a.steps);
    let g = match &a.input {
        Some(path) => {
            report.param("in", path.display().to_string());
            let g = read_op(path)?;
            match a.window {
                Some(n) if n > g.window() => {
                    let pad = (g.window()..n).map(|i| (i, i, c64(1.0)));
                    SparseOp::from_triplets(n, g.iter().chain(pad))?
                }
                Some(n) if n < g.window() => return Err(Error::WindowTooSmall { window: n, needed: g.window() }),
                _ => g,
            }
        }
        None => {
            let n = a.window.unwrap_or(64);
            report.param("k", a.k);
            kuiper::random_gl(n, a.k, false, &mut rng_for(seed, "homotopy"))
        }
    };
    report.param("window", g.window());
    let cfg = ContractConfig { steps: a.steps, ..ContractConfig::default() };
    let c = kuiper::contract(&g, &cfg)?;
    let path = &c.path;
    let measured_profile = path.steps.iter().map(|s| s.profile().k()).max().unwrap_or(0);
    report
        .metric(above("min_sigma", path.min_sigma(), 1e-6))
        .metric(Metric::at_most("max_jump", path.max_jump(), cfg.max_jump))
        .metric(Metric::at_most("endpoint_error", path.endpoint_error(), 1e-8))
        .metric(Metric::at_most("max_profile", measured_profile as f64, c.budget as f64));
    let spans: Vec<_> = path.stage_spans().into_iter().map(|(s, a, b)| json!({"stage": s, "start": a, "end": b})).collect();
    report
        .data("selected", c.selection.len())
        .data("h1_dim", c.h1_dim)
        .data("budget", c.budget)
        .data("stages", spans)
        .data("steps", &path.certificates);
    let pts = path.certificates.iter().enumerate().map(|(i, c)| (i as f64, c.sigma_min)).collect();
    Ok(Some(("sigma_min along the path".into(), vec![Series::new("sigma_min", pts)])))
}
