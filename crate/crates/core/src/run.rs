//! Experiment pipelines behind the `qhlab` commands.
//!
//! A [`RunConfig`] names a domain (a JSON file, or a corpus family whose
//! parameters may be comma lists that sweep the family), a list of grid
//! spacings and the sample sizes. [`execute`] runs one command for every
//! family member and spacing and collects a [`ResultDoc`]; [`run`] adds
//! validation, file output and the exit status.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::conditions::{bs_constant, gh_constant, gh_record, lemma41_probe};
use crate::corpus::{comb_probe_points, corpus};
use crate::deformation::{
    back_deformation_check, build_deformation, check_distance_vs_rho, check_eps_diameter, check_harnack,
    check_keps_comparison, check_wb_inclusions, uniformity_constants, DeformationContext, DEFAULT_EPS, EPS_CEILING,
};
use crate::domain::{load_domain, DomainSpec};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::{discretize, MetricGraph, WeightKind};
use crate::hyperbolicity::{
    delta_thin, four_point_defect, landmark_matrix, metric_axioms, min_gromov_product, starlikeness_k,
};
use crate::paths::{inner_distance, qh_distance, shortest_path};
use crate::report::{Check, ResultDoc, Svg, Table};
use crate::sampling::{
    sample_nodes, sample_pairs, sample_triples, stratified_nodes, stratified_pairs, PointSampler, SamplerConfig,
    DEFAULT_SEED,
};
use crate::whitney::{build_cover, regularity, verify_cover};

pub const DEFAULT_PAIRS: usize = 200;
pub const DEFAULT_TRIPLES: usize = 50;
pub const DEFAULT_LANDMARKS: usize = 32;
pub const DEFAULT_SAMPLES: usize = 200;
/// Triples examined by the metric-axiom check.
pub const METRIC_TRIPLES: usize = 1000;
/// Allowed relative oracle error per unit of grid spacing.
pub const DIST_TOL_PER_H: f64 = 1.5;
/// Allowed relative change of a probe constant between consecutive
/// resolutions.
pub const STABILITY_TOL: f64 = 0.15;
pub const LEMMA41_STABILITY_TOL: f64 = 0.20;
const GEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Dist,
    Delta,
    Gh,
    Bs,
    Deform,
    Whitney,
    ProbeTheorem,
    Report,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Dist,
        Command::Delta,
        Command::Gh,
        Command::Bs,
        Command::Deform,
        Command::Whitney,
        Command::ProbeTheorem,
        Command::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Dist => "dist",
            Command::Delta => "delta",
            Command::Gh => "gh",
            Command::Bs => "bs",
            Command::Deform => "deform",
            Command::Whitney => "whitney",
            Command::ProbeTheorem => "probe-theorem",
            Command::Report => "report",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCommand(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainSource {
    File(PathBuf),
    /// A corpus family; every combination of the listed values is one
    /// member of the sweep.
    Corpus {
        name: String,
        params: BTreeMap<String, Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub domain: DomainSource,
    /// Grid spacings, coarsest first. Empty means the domain's suggestion.
    pub hs: Vec<f64>,
    pub eps: f64,
    pub seed: u64,
    pub pairs: usize,
    pub triples: usize,
    pub landmarks: usize,
    pub samples: usize,
    /// Explicit endpoints for `dist`.
    pub from: Option<[f64; 2]>,
    pub to: Option<[f64; 2]>,
    #[serde(skip)]
    pub out: PathBuf,
    pub svg: bool,
}

impl RunConfig {
    pub fn for_corpus(name: &str) -> Self {
        Self::new(DomainSource::Corpus {
            name: name.to_string(),
            params: BTreeMap::new(),
        })
    }

    pub fn new(domain: DomainSource) -> Self {
        Self {
            domain,
            hs: Vec::new(),
            eps: DEFAULT_EPS,
            seed: DEFAULT_SEED,
            pairs: DEFAULT_PAIRS,
            triples: DEFAULT_TRIPLES,
            landmarks: DEFAULT_LANDMARKS,
            samples: DEFAULT_SAMPLES,
            from: None,
            to: None,
            out: PathBuf::from("qhlab-out"),
            svg: false,
        }
    }

    /// Adds a parameter list, e.g. `("n", &[2.0, 4.0, 8.0])`.
    pub fn param(mut self, key: &str, values: &[f64]) -> Self {
        if let DomainSource::Corpus { params, .. } = &mut self.domain {
            params.insert(key.to_string(), values.to_vec());
        }
        self
    }

    pub fn with_hs(mut self, hs: &[f64]) -> Self {
        self.hs = hs.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.hs.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return bad(format!("grid spacings must be positive, got {:?}", self.hs));
        }
        if self.hs.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("grid spacings must be strictly decreasing, got {:?}", self.hs));
        }
        if !(self.eps > 0.0 && self.eps <= EPS_CEILING) {
            return Err(Error::EpsOutOfRange(self.eps, EPS_CEILING));
        }
        for (name, n) in [
            ("pairs", self.pairs),
            ("triples", self.triples),
            ("samples", self.samples),
        ] {
            if n == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.landmarks < 4 {
            return Err(Error::TooFewLandmarks(self.landmarks));
        }
        if self.from.is_some() != self.to.is_some() {
            return bad("--from and --to must be given together".into());
        }
        if let DomainSource::Corpus { params, .. } = &self.domain {
            if let Some((k, _)) = params.iter().find(|(_, v)| v.is_empty()) {
                return bad(format!("parameter `{k}` has no values"));
            }
        }
        Ok(())
    }
}

/// One member of a family sweep.
#[derive(Debug, Clone)]
pub struct Member {
    pub label: String,
    pub dom: DomainSpec,
    /// Values of the swept parameters.
    pub sweep: BTreeMap<String, f64>,
}

pub fn members(cfg: &RunConfig) -> Result<Vec<Member>> {
    match &cfg.domain {
        DomainSource::File(path) => {
            let dom = load_domain(&std::fs::read_to_string(path)?)?;
            Ok(vec![Member {
                label: dom.name().to_string(),
                dom,
                sweep: BTreeMap::new(),
            }])
        }
        DomainSource::Corpus { name, params } => {
            let mut combos: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new()];
            for (k, values) in params {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        values.iter().map(move |&v| {
                            let mut c = c.clone();
                            c.insert(k.clone(), v);
                            c
                        })
                    })
                    .collect();
            }
            combos
                .into_iter()
                .map(|c| {
                    let sweep: BTreeMap<String, f64> = c
                        .iter()
                        .filter(|(k, _)| params[*k].len() > 1)
                        .map(|(k, &v)| (k.clone(), v))
                        .collect();
                    let mut label = name.clone();
                    for (k, v) in &sweep {
                        label.push_str(&format!(" {k}={v}"));
                    }
                    Ok(Member {
                        label,
                        dom: corpus(name, &c)?,
                        sweep,
                    })
                })
                .collect()
        }
    }
}

fn spacings(cfg: &RunConfig, m: &Member) -> Vec<f64> {
    if cfg.hs.is_empty() {
        vec![m.dom.suggested_h()]
    } else {
        cfg.hs.clone()
    }
}

fn scope(m: &Member, h: f64) -> String {
    format!("{} h={h}", m.label)
}

fn figure_name(scope: &str) -> String {
    scope
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn point(p: [f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

fn xy(p: Point) -> Value {
    json!([p.x, p.y])
}

fn sampler(cfg: &RunConfig, hs: &[f64]) -> SamplerConfig {
    SamplerConfig::for_refinement(cfg.seed, hs[0])
}

/// Exact distance for pairs on which the continuum metric is known: the
/// vertical ray of the half plane, and a ray from the puncture.
pub fn oracle_distance(dom: &DomainSpec, a: Point, b: Point) -> Option<f64> {
    match dom.name() {
        "half-plane-box" if a.x == b.x && a.y > 0.0 && b.y > 0.0 => Some((b.y / a.y).ln().abs()),
        "punctured-box" if a.cross(b).abs() < 1e-12 * a.norm() * b.norm() && a.dot(b) > 0.0 => {
            Some((b.norm() / a.norm()).ln().abs())
        }
        _ => None,
    }
}

/// Default oracle endpoints of the families that have one.
pub fn oracle_pair(dom: &DomainSpec) -> Option<(Point, Point)> {
    let e = std::f64::consts::E;
    match dom.name() {
        "half-plane-box" => Some((Point::new(0.0, 1.0), Point::new(0.0, e))),
        "punctured-box" => Some((Point::new(1.0, 0.0), Point::new(e, 0.0))),
        _ => None,
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Runs one command and collects the result document without writing it.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<ResultDoc> {
    cfg.validate()?;
    let members = members(cfg)?;
    let config = serde_json::to_value(cfg).expect("config is serializable");
    let mut doc = ResultDoc::new(command.as_str(), config);
    match command {
        Command::Report => {
            for sub in &Command::ALL[..7] {
                let mut part = ResultDoc::new(sub.as_str(), Value::Null);
                dispatch(*sub, cfg, &members, &mut part)?;
                merge_into(&mut doc, part);
            }
        }
        c => dispatch(c, cfg, &members, &mut doc)?,
    }
    Ok(doc)
}

fn dispatch(command: Command, cfg: &RunConfig, members: &[Member], doc: &mut ResultDoc) -> Result<()> {
    match command {
        Command::Dist => dist(cfg, members, doc),
        Command::Delta => delta(cfg, members, doc),
        Command::Gh => gh(cfg, members, doc),
        Command::Bs => bs(cfg, members, doc),
        Command::Deform => deform(cfg, members, doc),
        Command::Whitney => whitney(cfg, members, doc),
        Command::ProbeTheorem => probe_theorem(cfg, members, doc),
        Command::Report => unreachable!("report is expanded by execute"),
    }
}

fn merge_into(doc: &mut ResultDoc, part: ResultDoc) {
    let prefix = part.command.clone();
    for (k, v) in part.metrics {
        doc.metrics.insert(format!("{prefix}/{k}"), v);
    }
    for entry in part.checks {
        doc.check(&format!("{prefix}/{}", entry.scope), entry.check);
    }
    for (k, t) in part.tables {
        doc.tables.insert(format!("{prefix}-{k}"), t);
    }
    for (k, f) in part.figures {
        doc.figures.insert(format!("{prefix}-{k}"), f);
    }
}

fn path_figure(m: &Member, g: &MetricGraph, paths: &[&[usize]]) -> String {
    let mut svg = Svg::new(&m.dom);
    for p in paths {
        svg.polyline(g, p, "#c0392b");
    }
    svg.finish()
}

fn dist(cfg: &RunConfig, members: &[Member], doc: &mut ResultDoc) -> Result<()> {
    let mut table = Table::new(&["member", "h", "nodes", "x", "y", "qh", "inner", "oracle", "rel_error"]);
    for m in members {
        let hs = spacings(cfg, m);
        let endpoints = match (cfg.from, cfg.to) {
            (Some(a), Some(b)) => Some((point(a), point(b))),
            _ => oracle_pair(&m.dom),
        };
        if let Some((a, b)) = endpoints {
            if !m.dom.contains_point(a) || !m.dom.contains_point(b) {
                return Err(Error::Config(format!(
                    "endpoints {a:?}, {b:?} are not inside `{}`",
                    m.label
                )));
            }
        }
        let mut oracle_ks = Vec::new();
        for &h in &hs {
            let g = discretize(&m.dom, h)?;
            let scope = scope(m, h);
            let pairs = match endpoints {
                Some((a, b)) => vec![(g.nearest_node(a), g.nearest_node(b))],
                None => sample_pairs(&m.dom, &g, sampler(cfg, &hs), cfg.pairs),
            };
            let oracle = endpoints.and_then(|(a, b)| oracle_distance(&m.dom, a, b));
            let mut err_check = Check::new("oracle-relative-error", DIST_TOL_PER_H * h);
            for &(x, y) in &pairs {
                let k = qh_distance(&g, x, y)?;
                let inner = inner_distance(&g, x, y)?;
                let rel = oracle.map(|o| (k - o).abs() / o);
                if let Some(rel) = rel {
                    err_check.checked += 1;
                    err_check.extremum = err_check.extremum.max(rel);
                    err_check.violations += usize::from(rel > err_check.bound);
                }
                table.push(vec![
                    json!(m.label),
                    json!(h),
                    json!(g.node_count()),
                    xy(g.position(x)),
                    xy(g.position(y)),
                    json!(k),
                    json!(inner),
                    json!(oracle),
                    json!(rel),
                ]);
            }
            if endpoints.is_some() {
                let (x, y) = pairs[0];
                let k = qh_distance(&g, x, y)?;
                if oracle.is_some() {
                    oracle_ks.push(k);
                }
                doc.metric(
                    &scope,
                    &json!({"k": k, "oracle": oracle, "x": xy(g.position(x)), "y": xy(g.position(y)), "nodes": g.node_count()}),
                );
                if cfg.svg {
                    let path = shortest_path(&g, WeightKind::Qh, x, y)?;
                    doc.figures
                        .insert(figure_name(&scope), path_figure(m, &g, &[&path.nodes]));
                }
            }
            if err_check.checked > 0 {
                doc.check(&scope, err_check);
            }
            let lm = sample_nodes(&m.dom, &g, sampler(cfg, &hs), cfg.landmarks);
            let axioms = metric_axioms(&g, &lm, METRIC_TRIPLES);
            doc.check(&scope, axioms.symmetry);
            doc.check(&scope, axioms.triangle);
        }
        if oracle_ks.len() >= 2 {
            let gaps: Vec<f64> = oracle_ks.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
            doc.metric(&format!("{} cauchy_gaps", m.label), &gaps);
            if gaps.len() >= 2 {
                let mut c = Check::new("cauchy-gap-shrinks", 0.0);
                for w in gaps.windows(2) {
                    c.checked += 1;
                    c.extremum = c.extremum.max(w[1] - w[0]);
                    c.violations += usize::from(w[1] > w[0]);
                }
                doc.check(&m.label, c);
            }
        }
    }
    doc.table("distances", table);
    Ok(())
}

fn delta(cfg: &RunConfig, members: &[Member], doc: &mut ResultDoc) -> Result<()> {
    let mut table = Table::new(&["member", "h", "nodes", "delta_thin", "delta_four_point", "K_hat"]);
    for m in members {
        let hs = spacings(cfg, m);
        for &h in &hs {
            let g = discretize(&m.dom, h)?;
            let scope = scope(m, h);
            let s = sampler(cfg, &hs);
            let thin = delta_thin(&g, &sample_triples(&m.dom, &g, s, cfg.triples))?;
            let lm = sample_nodes(&m.dom, &g, s, cfg.landmarks);
            let matrix = landmark_matrix(&g, &lm);
            let four = four_point_defect(&matrix);
            let min_product = min_gromov_product(&matrix);
            let star = starlikeness_k(&g, g.deepest_node(), None)?;
            let mut c = Check::new("gromov-product-nonnegative", -GEN_TOL);
            c.checked = lm.len().pow(3);
            c.extremum = min_product;
            c.violations = usize::from(min_product < -GEN_TOL);
            doc.check(&scope, c);
            doc.metric(
                &scope,
                &json!({
                    "delta_thin": thin.delta,
                    "delta_four_point": four,
                    "triples": thin.per_triple.len(),
                    "landmarks": lm.len(),
                    "starlikeness": star,
                    "nodes": g.node_count(),
                }),
            );
            table.push(vec![
                json!(m.label),
                json!(h),
                json!(g.node_count()),
                json!(thin.delta),
                json!(four),
                json!(star.k_hat),
            ]);
            if let (true, Some(t)) = (cfg.svg, thin.worst) {
                let sides: Vec<Vec<usize>> = [(0, 1), (1, 2), (2, 0)]
                    .iter()
                    .map(|&(i, j)| shortest_path(&g, WeightKind::Qh, t[i], t[j]).map(|p| p.nodes))
                    .collect::<Result<_>>()?;
                let refs: Vec<&[usize]> = sides.iter().map(Vec::as_slice).collect();
                doc.figures.insert(figure_name(&scope), path_figure(m, &g, &refs));
            }
        }
    }
    doc.table("delta", table);
    Ok(())
}

fn gh(cfg: &RunConfig, members: &[Member], doc: &mut ResultDoc) -> Result<()> {
    let mut table = Table::new(&["member", "h", "nodes", "pairs", "C_gh_hat"]);
    for m in members {
        let hs = spacings(cfg, m);
        for &h in &hs {
            let g = discretize(&m.dom, h)?;
            let scope = scope(m, h);
            let rep = gh_constant(&g, &sample_pairs(&m.dom, &g, sampler(cfg, &hs), cfg.pairs))?;
            let mut c = Check::new("gh-ratio-at-least-one", 1.0 - GEN_TOL);
            c.extremum = f64::INFINITY;
            for r in &rep.records {
                c.checked += 1;
                c.extremum = c.extremum.min(r.ratio);
                c.violations += usize::from(r.ratio < 1.0 - GEN_TOL);
            }
            doc.check(&scope, c);
            doc.metric(
                &scope,
                &json!({"C_gh_hat": rep.c_gh_hat, "pairs": rep.pairs_sampled, "worst": rep.worst}),
            );
            table.push(vec![
                json!(m.label),
                json!(h),
                json!(g.node_count()),
                json!(rep.pairs_sampled),
                json!(rep.c_gh_hat),
            ]);
            if let (true, Some((x, y))) = (cfg.svg, rep.worst) {
                let path = shortest_path(&g, WeightKind::Qh, x, y)?;
                doc.figures
                    .insert(figure_name(&scope), path_figure(m, &g, &[&path.nodes]));
            }
        }
    }
    doc.table("gh", table);
    Ok(())
}

fn bs(cfg: &RunConfig, members: &[Member], doc: &mut ResultDoc) -> Result<()> {
    let mut table = Table::new(&["member", "h", "nodes", "pairs", "C_bs_hat", "brackets", "saturation"]);
    for m in members {
        let hs = spacings(cfg, m);
        for &h in &hs {
            let g = discretize(&m.dom, h)?;
            let scope = scope(m, h);
            let rep = bs_constant(&g, &sample_pairs(&m.dom, &g, sampler(cfg, &hs), cfg.pairs))?;
            let mut mono = Check::new("bs-monotone-brackets", 0.0);
            mono.checked = rep.brackets_checked;
            mono.violations = rep.monotonicity_violations;
            doc.check(&scope, mono);
            let mut bound = Check::new("bs-radius-bound", 1.0);
            for r in &rep.records {
                let z = g.position(r.worst_z);
                let reach = z.dist(g.position(r.x)).max(z.dist(g.position(r.y))) + h;
                bound.checked += 1;
                bound.extremum = bound.extremum.max(r.radius / reach);
                bound.violations += usize::from(r.radius > reach);
            }
            doc.check(&scope, bound);
            let saturation = rep
                .saturation
                .as_ref()
                .map(|s| relative_change(s.value, s.refined_value));
            doc.metric(
                &scope,
                &json!({"C_bs_hat": rep.c_bs_hat, "pairs": rep.pairs_sampled, "saturation": rep.saturation}),
            );
            table.push(vec![
                json!(m.label),
                json!(h),
                json!(g.node_count()),
                json!(rep.pairs_sampled),
                json!(rep.c_bs_hat),
                json!(rep.brackets_checked),
                json!(saturation),
            ]);
            let worst = rep
                .records
                .iter()
                .max_by(|a, b| a.ratio.total_cmp(&b.ratio).then(b.x.cmp(&a.x)));
            if let (true, Some(r)) = (cfg.svg, worst) {
                let path = shortest_path(&g, WeightKind::Qh, r.x, r.y)?;
                let mut svg = Svg::new(&m.dom);
                svg.polyline(&g, &path.nodes, "#c0392b");
                svg.circle(g.position(r.worst_z), r.radius, "#2471a3");
                doc.figures.insert(figure_name(&scope), svg.finish());
            }
        }
    }
    doc.table("bs", table);
    Ok(())
}

fn context<'g>(g: &'g MetricGraph, cfg: &RunConfig) -> Result<DeformationContext<'g>> {
    build_deformation(g, g.deepest_node(), cfg.eps)
}

fn deform(cfg: &RunConfig, members: &[Member], doc: &mut ResultDoc) -> Result<()> {
    let mut table = Table::new(&["member", "h", "nodes", "K_hat", "A", "C", "D_eps_hat", "admissible"]);
    for m in members {
        for h in spacings(cfg, m) {
            let g = discretize(&m.dom, h)?;
            let scope = scope(m, h);
            let mut ctx = context(&g, cfg)?;
            let centers = stratified_nodes(&g, cfg.seed, cfg.samples);
            let pairs = stratified_pairs(&g, cfg.seed, cfg.pairs);
            let all: Vec<usize> = (0..g.node_count()).collect();
            let uni = uniformity_constants(&ctx, &pairs)?;
            ctx.set_d_eps_hat(uni.d_eps_hat);
            let rho = check_distance_vs_rho(&ctx, &all);
            let wb = check_wb_inclusions(&ctx, &centers);
            let back = back_deformation_check(&ctx, &pairs)?;
            for c in [
                check_eps_diameter(&ctx),
                check_harnack(&ctx, &centers),
                check_keps_comparison(&ctx, &pairs),
                rho.lower,
                rho.upper,
                wb.wb1,
                wb.wb2,
                back.edges,
                back.paths,
            ] {
                doc.check(&scope, c);
            }
            doc.metric(
                &scope,
                &json!({
                    "K_hat": ctx.k_hat(),
                    "A": ctx.a(),
                    "C": ctx.c(),
                    "D": ctx.d_const(),
                    "K_required": rho.k_required,
                    "uniformity": uni,
                    "admissible": ctx.admissible(),
                    "nodes": g.node_count(),
                }),
            );
            table.push(vec![
                json!(m.label),
                json!(h),
                json!(g.node_count()),
                json!(ctx.k_hat()),
                json!(ctx.a()),
                json!(ctx.c()),
                json!(uni.d_eps_hat),
                json!(ctx.admissible()),
            ]);
        }
    }
    doc.table("deform", table);
    Ok(())
}

fn whitney(cfg: &RunConfig, members: &[Member], doc: &mut ResultDoc) -> Result<()> {
    let mut table = Table::new(&[
        "member",
        "h",
        "nodes",
        "balls",
        "N_hat",
        "generations",
        "C_o_hat",
        "C_u_hat",
        "C_w_hat",
    ]);
    for m in members {
        for h in spacings(cfg, m) {
            let g = discretize(&m.dom, h)?;
            let scope = scope(m, h);
            let ctx = context(&g, cfg)?;
            let cover = build_cover(&ctx)?;
            let rep = verify_cover(&ctx, &cover, &stratified_pairs(&g, cfg.seed, cfg.pairs))?;
            let reg = regularity(&ctx, &stratified_nodes(&g, cfg.seed, cfg.samples), cfg.seed)?;
            let exact = |name: &str, checked: usize, violations: usize| Check {
                checked,
                violations,
                extremum: violations as f64,
                ..Check::new(name, 0.0)
            };
            doc.check(
                &scope,
                exact("whitney-fifth-disjoint", rep.balls, rep.disjointness_violations),
            );
            doc.check(&scope, exact("whitney-coverage", rep.nodes, rep.uncovered));
            doc.check(&scope, exact("whitney-inside", rep.balls, rep.leaking_balls));
            doc.check(
                &scope,
                exact("whitney-generation-partition", rep.balls, rep.generation_violations),
            );
            doc.check(&scope, exact("whitney-shadow-self", rep.balls, rep.shadow_self_misses));
            doc.check(&scope, reg.upper.clone());
            doc.check(&scope, reg.lower.clone());
            doc.check(&scope, reg.volume_growth.clone());
            doc.metric(
                &scope,
                &json!({
                    "cover": rep,
                    "C_u_hat": reg.c_u_hat,
                    "C_w_hat": reg.c_w_hat,
                    "regularity_rejected": reg.rejected,
                }),
            );
            table.push(vec![
                json!(m.label),
                json!(h),
                json!(g.node_count()),
                json!(rep.balls),
                json!(rep.n_hat),
                json!(rep.generations),
                json!(rep.c_o_hat),
                json!(reg.c_u_hat),
                json!(reg.c_w_hat),
            ]);
            if cfg.svg {
                let mut svg = Svg::new(&m.dom);
                for (&c, &r) in cover.centers.iter().zip(&cover.radii) {
                    svg.circle(g.position(c), r / ctx.sigma()[c], "#1e8449");
                }
                doc.figures.insert(figure_name(&scope), svg.finish());
            }
        }
    }
    doc.table("whitney", table);
    Ok(())
}

/// One row of the theorem probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub member: String,
    pub sweep: BTreeMap<String, f64>,
    pub h: f64,
    pub nodes: usize,
    pub delta_thin: f64,
    pub delta_four_point: f64,
    #[serde(rename = "C_gh")]
    pub c_gh: f64,
    #[serde(rename = "C_bs")]
    pub c_bs: f64,
    #[serde(rename = "M_hat")]
    pub m_hat: f64,
    /// Constants of the fixed comb configuration
    /// ([`comb_probe_points`]); `None` off the comb family.
    pub fixed: Option<FixedProbe>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedProbe {
    pub delta_thin: f64,
    #[serde(rename = "C_gh")]
    pub c_gh: f64,
    #[serde(rename = "C_bs")]
    pub c_bs: f64,
}

const PROBE_COLUMNS: [&str; 5] = ["delta_thin", "delta_four_point", "C_gh", "C_bs", "M_hat"];

impl ProbeRow {
    fn value(&self, column: &str) -> f64 {
        match column {
            "delta_thin" => self.delta_thin,
            "delta_four_point" => self.delta_four_point,
            "C_gh" => self.c_gh,
            "C_bs" => self.c_bs,
            "M_hat" => self.m_hat,
            _ => unreachable!("unknown probe column {column}"),
        }
    }
}

/// Computes one probe row. Ball separation uses half of the pairs; the
/// Lemma 4.1 probe draws its points from a sampler seeded with `seed + 1`.
pub fn probe_row(cfg: &RunConfig, m: &Member, hs: &[f64], h: f64) -> Result<ProbeRow> {
    let g = discretize(&m.dom, h)?;
    let s = sampler(cfg, hs);
    let pairs = sample_pairs(&m.dom, &g, s, cfg.pairs);
    let thin = delta_thin(&g, &sample_triples(&m.dom, &g, s, cfg.triples))?;
    let four = four_point_defect(&landmark_matrix(&g, &sample_nodes(&m.dom, &g, s, cfg.landmarks)));
    let c_gh = gh_constant(&g, &pairs)?.c_gh_hat;
    let c_bs = bs_constant(&g, &pairs[..pairs.len().div_ceil(2)])?.c_bs_hat;
    let ctx = context(&g, cfg)?;
    let lemma_points = PointSampler::new(
        &m.dom,
        SamplerConfig {
            seed: cfg.seed.wrapping_add(1),
            ..s
        },
        cfg.samples,
    )
    .nodes(&g);
    let lemma_pairs = sample_pairs(&m.dom, &g, s, cfg.samples);
    let m_hat = lemma41_probe(&ctx, &lemma_points, &lemma_pairs)?.m_hat;
    let fixed = match comb_probe_points(&m.dom) {
        Some([x, y, z]) => {
            let (x, y, z) = (g.nearest_node(x), g.nearest_node(y), g.nearest_node(z));
            Some(FixedProbe {
                delta_thin: delta_thin(&g, &[[x, y, z]])?.delta,
                c_gh: gh_record(&g, x, y)?.ratio,
                c_bs: bs_constant(&g, &[(x, y)])?.c_bs_hat,
            })
        }
        None => None,
    };
    Ok(ProbeRow {
        member: m.label.clone(),
        sweep: m.sweep.clone(),
        h,
        nodes: g.node_count(),
        delta_thin: thin.delta,
        delta_four_point: four,
        c_gh,
        c_bs,
        m_hat,
        fixed,
    })
}

fn probe_theorem(cfg: &RunConfig, members: &[Member], doc: &mut ResultDoc) -> Result<()> {
    let mut rows = Vec::new();
    for m in members {
        let hs = spacings(cfg, m);
        let member_rows = hs
            .iter()
            .map(|&h| probe_row(cfg, m, &hs, h))
            .collect::<Result<Vec<_>>>()?;
        for col in PROBE_COLUMNS {
            if member_rows.len() < 2 {
                break;
            }
            let tol = if col == "M_hat" {
                LEMMA41_STABILITY_TOL
            } else {
                STABILITY_TOL
            };
            let mut c = Check::new(&format!("stable-{col}"), tol);
            for w in member_rows.windows(2) {
                let change = relative_change(w[0].value(col), w[1].value(col));
                c.checked += 1;
                c.extremum = c.extremum.max(change);
                c.violations += usize::from(change > tol);
            }
            doc.check(&m.label, c);
        }
        rows.extend(member_rows);
    }
    comb_monotonicity(members, &rows, doc);

    let comb = rows.iter().any(|r| r.fixed.is_some());
    let mut columns = vec!["member", "h", "nodes"];
    columns.extend(PROBE_COLUMNS);
    if comb {
        columns.extend(["fixed_delta_thin", "fixed_C_gh", "fixed_C_bs"]);
    }
    let mut table = Table::new(&columns);
    for r in &rows {
        let mut row = vec![json!(r.member), json!(r.h), json!(r.nodes)];
        row.extend(PROBE_COLUMNS.iter().map(|c| json!(r.value(c))));
        if comb {
            let f = r.fixed;
            row.extend([
                json!(f.map(|f| f.delta_thin)),
                json!(f.map(|f| f.c_gh)),
                json!(f.map(|f| f.c_bs)),
            ]);
        }
        table.push(row);
        doc.metric(&format!("{} h={}", r.member, r.h), r);
    }
    doc.table("probe", table);
    Ok(())
}

type FixedColumn = (&'static str, fn(&FixedProbe) -> f64);

/// On the comb family the fixed-configuration constants must increase
/// strictly with the number of teeth, at every spacing.
fn comb_monotonicity(members: &[Member], rows: &[ProbeRow], doc: &mut ResultDoc) {
    let by_n: Vec<&Member> = {
        let mut v: Vec<&Member> = members.iter().filter(|m| m.dom.name() == "comb").collect();
        v.sort_by(|a, b| a.dom.params()["n"].total_cmp(&b.dom.params()["n"]));
        v
    };
    if by_n.len() < 2 {
        return;
    }
    let hs: Vec<f64> = {
        let mut hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        hs.sort_by(|a, b| b.total_cmp(a));
        hs.dedup();
        hs
    };
    let pick: [FixedColumn; 3] = [
        ("delta_thin", |f| f.delta_thin),
        ("C_gh", |f| f.c_gh),
        ("C_bs", |f| f.c_bs),
    ];
    for h in hs {
        let series: Vec<FixedProbe> = by_n
            .iter()
            .filter_map(|m| {
                rows.iter()
                    .find(|r| r.member == m.label && r.h == h)
                    .and_then(|r| r.fixed)
            })
            .collect();
        for (name, get) in pick {
            let mut c = Check::new(&format!("comb-monotone-{name}"), 0.0);
            c.extremum = f64::INFINITY;
            for w in series.windows(2) {
                let step = get(&w[1]) - get(&w[0]);
                c.checked += 1;
                c.extremum = c.extremum.min(step);
                c.violations += usize::from(step <= 0.0);
            }
            doc.check(&format!("comb h={h}"), c);
        }
    }
}

/// Runs `command`, writes the result files into `cfg.out` and returns the
/// exit status: 0 when every check passed, 1 when some check failed, 2 on
/// a usage or configuration error (in which case nothing is written).
pub fn run(command: &str, cfg: &RunConfig) -> i32 {
    let outcome = command
        .parse::<Command>()
        .and_then(|c| execute(c, cfg))
        .and_then(|doc| doc.write(&cfg.out).map(|files| (doc, files)));
    match outcome {
        Ok((doc, files)) => {
            for f in &files {
                println!("wrote {}", f.display());
            }
            for v in &doc.violations {
                eprintln!("violation: {v}");
            }
            if doc.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("qhlab: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commands_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.as_str().parse::<Command>().unwrap(), c);
        }
        assert_eq!("plot".parse::<Command>().unwrap_err().code(), "unknown-command");
    }

    #[test]
    fn validation_rejects_bad_spacings_and_counts() {
        let base = RunConfig::for_corpus("disk");
        assert!(base.validate().is_ok());
        assert_eq!(
            base.clone().with_hs(&[0.02, 0.04]).validate().unwrap_err().code(),
            "config"
        );
        assert_eq!(
            base.clone().with_hs(&[0.04, -0.02]).validate().unwrap_err().code(),
            "config"
        );
        let mut c = base.clone();
        c.pairs = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.landmarks = 3;
        assert_eq!(c.validate().unwrap_err().code(), "too-few-landmarks");
        let mut c = base;
        c.eps = 0.5;
        assert_eq!(c.validate().unwrap_err().code(), "eps-out-of-range");
    }

    #[test]
    fn sweeps_expand_to_labeled_members() {
        let cfg = RunConfig::for_corpus("comb")
            .param("n", &[2.0, 4.0])
            .param("aspect", &[10.0]);
        let ms = members(&cfg).unwrap();
        let labels: Vec<&str> = ms.iter().map(|m| m.label.as_str()).collect();
        assert_eq!(labels, ["comb n=2", "comb n=4"]);
        assert!(ms.iter().all(|m| m.dom.params()["aspect"] == 10.0));
    }

    #[test]
    fn oracles_are_logarithms_along_rays() {
        let hp = corpus("half-plane-box", &BTreeMap::new()).unwrap();
        let (a, b) = oracle_pair(&hp).unwrap();
        assert!((oracle_distance(&hp, a, b).unwrap() - 1.0).abs() < 1e-15);
        assert!(oracle_distance(&hp, a, Point::new(1.0, 2.0)).is_none());
        let pb = corpus("punctured-box", &BTreeMap::new()).unwrap();
        let d = oracle_distance(&pb, Point::new(1.0, 1.0), Point::new(-2.0, -2.0));
        assert!(d.is_none());
        let d = oracle_distance(&pb, Point::new(1.0, 1.0), Point::new(4.0, 4.0)).unwrap();
        assert!((d - 4f64.ln()).abs() < 1e-12);
    }
}
