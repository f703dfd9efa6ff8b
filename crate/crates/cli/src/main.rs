//! `qhw`: command-line front end for the qutrit-hw library.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qutrit_hw::complementarity::{
    enumerate_noncommuting_sets, global_bound_check, max_sum_squared, noncommuting_pairs, scan_pairs, OperatorSet,
    DEFAULT_SEARCH_GUARD,
};
use qutrit_hw::criteria::{
    search_criteria, violates_for_all_cuts, CoverageMode, Criterion, SearchConfig, CERTIFY_TOL, SEPARABLE_RESTARTS,
};
use qutrit_hw::hw::{commutation_phase, hw_matrix, mub_basis, weyl_exponents, Bipartition, HwLabel, HwMultiIndex};
use qutrit_hw::linalg::{complex_pair, kron, sig12, CMatrix, CVector, C64};
use qutrit_hw::optimize::OptimizerConfig;
use qutrit_hw::reproduce::{run_check, CheckReport, ReproduceConfig, CHECK_IDS};
use qutrit_hw::states::{
    cluster_state_4, ghz_state, graph_state, perfect_correlations, random_density, DensityMatrix, Graph, PureState,
};
use qutrit_hw::tomography::{
    mub_probabilities, reconstruct_multi, reconstruct_single, MubDistribution, MubRecord, MAX_TOMOGRAPHY_SITES,
};

#[derive(Debug, Parser)]
#[command(
    name = "qhw",
    version,
    about = "Heisenberg-Weyl correlation tools for qutrit systems"
)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Numerical tolerance (perfect-correlation threshold for state and search).
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Optimizer restarts.
    #[arg(long, global = true)]
    restarts: Option<usize>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Operator matrices, Weyl exponents and commutation phases
    Ops(OpsArgs),
    /// Build a state; optionally list its perfect correlations
    State(StateArgs),
    /// MUB tomography round trips or reconstruction from data
    Tomo(TomoArgs),
    /// Complementarity scans
    Comp {
        #[command(subcommand)]
        command: CompCommand,
    },
    /// Criterion search, evaluation and certification
    Criteria {
        #[command(subcommand)]
        command: CriteriaCommand,
    },
    /// Run the reproduction checks
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
struct OpsArgs {
    /// Print the matrix of h_m.
    #[arg(long, value_name = "M")]
    matrix: Option<String>,

    /// Commutation phase c with A B = w^c B A.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    commutation: Option<Vec<String>>,

    /// Print the table h_m = w^p Z^z X^x.
    #[arg(long)]
    weyl: bool,
}

#[derive(Debug, Args)]
struct StateArgs {
    /// ghz | cluster | graph:<edges> | product:<sites> | file:<path>
    spec: String,

    /// Number of qutrits (ghz, graph).
    #[arg(long)]
    n: Option<usize>,

    /// Append the perfect-correlation list.
    #[arg(long)]
    correlations: bool,
}

#[derive(Debug, Args)]
struct TomoArgs {
    /// Qutrits per random state.
    #[arg(long, default_value_t = 1)]
    sites: usize,

    /// Number of random states.
    #[arg(long, default_value_t = 10)]
    samples: usize,

    /// Round trip on this state instead of random ones.
    #[arg(long, value_name = "SPEC")]
    state: Option<String>,

    /// Reconstruct from a JSON array of MUB records.
    #[arg(long, value_name = "FILE", conflicts_with = "state")]
    input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum CompCommand {
    /// Maximize |<a>|^2 + |<b>|^2 over every non-commuting pair
    Pairs {
        #[arg(long, default_value_t = 2)]
        sites: usize,
    },
    /// Count pairwise non-commuting two-qutrit sets and maximize over a sample
    Sets {
        #[arg(long, default_value_t = 7)]
        size: usize,
        #[arg(long, default_value_t = 10)]
        sample: usize,
        #[arg(long, default_value_t = DEFAULT_SEARCH_GUARD)]
        guard: u64,
    },
    /// Maximize the sum of squared means of the given operators
    Max {
        #[arg(required = true)]
        ops: Vec<String>,
    },
    /// Sum over all 81 two-qutrit correlations on random states
    Global {
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

#[derive(Debug, Subcommand)]
enum CriteriaCommand {
    /// Search triples of perfect correlations that cover every cut and need two measurement series
    Search {
        state: String,
        #[arg(long)]
        n: Option<usize>,
        /// Require the two pair criteria themselves to cover every cut.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
    /// Evaluate a criterion file on a state
    Eval {
        #[arg(long, value_name = "FILE")]
        criterion: PathBuf,
        state: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Separable maximum of a criterion on each cut it excludes
    Certify {
        #[arg(long, value_name = "FILE")]
        criterion: PathBuf,
        /// Restrict to these cuts, e.g. AB|CD.
        #[arg(long)]
        cut: Vec<String>,
    },
    /// Joint violation certificate for criteria covering all cuts
    Violates {
        #[arg(long = "criterion", value_name = "FILE", required = true)]
        criteria: Vec<PathBuf>,
        state: String,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Run every check (the default).
    #[arg(long)]
    all: bool,

    /// Run only these checks.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(CHECK_IDS))]
    only: Vec<String>,
}

enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// Computation finished but a check failed: exit 1.
    Checks(Output),
}

impl From<qutrit_hw::Error> for Failure {
    fn from(e: qutrit_hw::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

/// One result rendered as JSON, CSV or an aligned table.
struct Output {
    json: Value,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    /// Preformatted table text, used instead of `rows`.
    text: Option<String>,
    /// Emit `json` (an array) one element per line.
    json_lines: bool,
    default_format: Format,
}

impl Output {
    fn new(json: Value, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Output {
            json,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
            text: None,
            json_lines: false,
            default_format: Format::Table,
        }
    }

    fn render(&self, format: Option<Format>) -> String {
        match format.unwrap_or(self.default_format) {
            Format::Json => match (&self.json, self.json_lines) {
                (Value::Array(items), true) => items.iter().map(|v| format!("{v}\n")).collect(),
                (v, _) => format!("{}\n", serde_json::to_string_pretty(v).expect("serializable")),
            },
            Format::Csv => {
                let mut out = String::new();
                for row in std::iter::once(&self.header).chain(&self.rows) {
                    let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Table => match &self.text {
                Some(t) => t.clone(),
                None => table(&self.header, &self.rows),
            },
        }
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut out = line(header);
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

fn cjson(z: C64) -> Value {
    json!(complex_pair(z))
}

fn ctext(z: C64) -> String {
    let r = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
    format!("[{:.6}, {:.6}]", r(z.re), r(z.im))
}

fn num(x: f64) -> Value {
    json!(sig12(x))
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| cjson(m[(i, j)])).collect()))
            .collect(),
    )
}

fn matrix_rows(m: &CMatrix) -> Vec<Vec<String>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| ctext(m[(i, j)])).collect())
        .collect()
}

fn parse_label(s: &str) -> CliResult<HwLabel> {
    let v: i64 = s
        .trim()
        .trim_start_matches('h')
        .parse()
        .map_err(|_| Failure::Usage(format!("bad label {s:?}")))?;
    if !(0..=8).contains(&v) {
        return Err(qutrit_hw::Error::LabelOutOfRange(v).into());
    }
    Ok(HwLabel::new(v as u8)?)
}

fn parse_index(s: &str) -> CliResult<HwMultiIndex> {
    Ok(s.parse::<HwMultiIndex>()?)
}

fn cmd_ops(args: &OpsArgs) -> CliResult<Output> {
    if let Some(m) = &args.matrix {
        let label = parse_label(m)?;
        let h = hw_matrix(label);
        let header: Vec<String> = (0..3).map(|j| format!("col {j}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        return Ok(Output::new(
            json!({"label": label.index(), "matrix": matrix_json(&h)}),
            &header,
            matrix_rows(&h),
        ));
    }
    if let Some(pair) = &args.commutation {
        let (a, b) = (parse_index(&pair[0])?, parse_index(&pair[1])?);
        let c = commutation_phase(&a, &b)?;
        return Ok(Output::new(
            json!({"a": a.to_string(), "b": b.to_string(), "phase": c.value(), "commute": c.is_zero()}),
            &["a", "b", "phase", "commute"],
            vec![vec![
                a.to_string(),
                b.to_string(),
                c.value().to_string(),
                c.is_zero().to_string(),
            ]],
        ));
    }
    if args.weyl {
        let mut items = Vec::new();
        let mut rows = Vec::new();
        for label in HwLabel::all() {
            let e = weyl_exponents(label);
            let mub = label.mub().map(|m| m.to_string()).unwrap_or_else(|| "-".into());
            items.push(json!({"label": label.index(), "phase": e.phase.value(), "z": e.z.value(), "x": e.x.value(), "mub": label.mub()}));
            rows.push(vec![
                label.to_string(),
                e.phase.value().to_string(),
                e.z.value().to_string(),
                e.x.value().to_string(),
                mub,
            ]);
        }
        return Ok(Output::new(
            Value::Array(items),
            &["label", "phase", "z", "x", "mub"],
            rows,
        ));
    }
    let labels: Vec<HwMultiIndex> = HwLabel::all()
        .map(|l| HwMultiIndex::new(vec![l]))
        .collect::<Result<_, _>>()?;
    let mut grid = Vec::new();
    let mut rows = Vec::new();
    for a in &labels {
        let phases: Vec<u8> = labels
            .iter()
            .map(|b| commutation_phase(a, b).map(|c| c.value()))
            .collect::<Result<_, _>>()?;
        rows.push(
            std::iter::once(a.to_string())
                .chain(phases.iter().map(|p| p.to_string()))
                .collect(),
        );
        grid.push(phases);
    }
    let header: Vec<String> = std::iter::once("c(a,b)".to_string())
        .chain(labels.iter().map(|l| l.to_string()))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Ok(Output::new(json!({"commutation_phases": grid}), &header, rows))
}

/// `0`, `1`, `2` for computational states or `m.k` for vector k of MUB m.
fn single_site(token: &str) -> CliResult<CVector> {
    let bad = || Failure::Usage(format!("bad product factor {token:?}; use 0|1|2 or m.k"));
    match token.split_once('.') {
        None => {
            let k: usize = token.trim().parse().map_err(|_| bad())?;
            if k > 2 {
                return Err(bad());
            }
            Ok(CVector::from_fn(3, |i, _| {
                C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)
            }))
        }
        Some((m, k)) => {
            let m: u8 = m.trim().parse().map_err(|_| bad())?;
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            if k > 2 {
                return Err(bad());
            }
            Ok(mub_basis(m)?[k].clone())
        }
    }
}

fn load_state(spec: &str, n: Option<usize>) -> CliResult<(String, PureState)> {
    let spec = spec.trim();
    if spec == "ghz" {
        return Ok((format!("ghz-{}", n.unwrap_or(4)), ghz_state(n.unwrap_or(4))?));
    }
    if spec == "cluster" {
        if n.is_some_and(|n| n != 4) {
            return Err(Failure::Usage("the cluster state is defined for 4 qutrits".into()));
        }
        return Ok(("cluster".into(), cluster_state_4()));
    }
    if let Some(edges) = spec.strip_prefix("graph:") {
        let top = edges
            .split([',', '-'])
            .filter_map(|t| t.trim().parse::<usize>().ok())
            .max()
            .ok_or_else(|| Failure::Usage(format!("empty edge list {edges:?}")))?;
        let graph = Graph::parse(edges, n.unwrap_or(top))?;
        return Ok((format!("graph:{graph}"), graph_state(&graph)?));
    }
    if let Some(sites) = spec.strip_prefix("product:") {
        let factors: Vec<CVector> = sites.split(',').map(single_site).collect::<CliResult<_>>()?;
        let mut v = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for f in &factors {
            v = kron(&v, &CMatrix::from_column_slice(3, 1, f.as_slice()));
        }
        let psi = PureState::normalized(factors.len(), CVector::from_column_slice(v.as_slice()))?;
        return Ok((spec.to_string(), psi));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let value: Value = serde_json::from_str(&fs::read_to_string(path)?).map_err(qutrit_hw::Error::from)?;
        let sites = value["sites"]
            .as_u64()
            .ok_or_else(|| Failure::Usage("state file lacks \"sites\"".into()))? as usize;
        let amps = value["amplitudes"]
            .as_array()
            .ok_or_else(|| Failure::Usage("state file lacks \"amplitudes\"".into()))?
            .iter()
            .map(|a| match (a[0].as_f64(), a[1].as_f64()) {
                (Some(re), Some(im)) => Ok(C64::new(re, im)),
                _ => Err(Failure::Usage("amplitudes must be [re, im] pairs".into())),
            })
            .collect::<CliResult<Vec<C64>>>()?;
        return Ok((spec.to_string(), PureState::normalized(sites, CVector::from_vec(amps))?));
    }
    Err(Failure::Usage(format!(
        "unknown state {spec:?}; expected ghz, cluster, graph:<edges>, product:<sites> or file:<path>"
    )))
}

fn cmd_state(args: &StateArgs, tol: f64) -> CliResult<Output> {
    let (name, psi) = load_state(&args.spec, args.n)?;
    let amplitudes: Vec<Value> = psi.as_slice().iter().map(|&z| cjson(z)).collect();
    let mut doc = json!({"name": name, "sites": psi.sites(), "amplitudes": amplitudes});
    let mut out = if args.correlations {
        let corr = perfect_correlations(&psi, tol)?;
        doc["correlations"] = Value::Array(
            corr.iter()
                .map(|c| json!({"idx": c.idx.digits(), "label": c.idx.to_string(), "value": cjson(c.value)}))
                .collect(),
        );
        doc["count"] = json!(corr.len());
        let rows = corr.iter().map(|c| vec![c.idx.to_string(), ctext(c.value)]).collect();
        Output::new(doc, &["operator", "mean"], rows)
    } else {
        let rows = psi
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 1e-12)
            .map(|(i, &z)| vec![i.to_string(), ctext(z)])
            .collect();
        Output::new(doc, &["index", "amplitude"], rows)
    };
    out.default_format = Format::Json;
    Ok(out)
}

fn cmd_tomo(args: &TomoArgs, seed: u64) -> CliResult<Output> {
    if let Some(path) = &args.input {
        let records: Vec<MubRecord> =
            serde_json::from_str(&fs::read_to_string(path)?).map_err(qutrit_hw::Error::from)?;
        let dist = MubDistribution::from_records(&records)?;
        let rec = if dist.sites() == 1 {
            reconstruct_single(&dist)?
        } else {
            reconstruct_multi(&dist)?
        };
        let m = rec.state.matrix();
        let doc = json!({
            "sites": dist.sites(),
            "density": matrix_json(m),
            "min_eigenvalue": num(rec.min_eigenvalue),
            "physical": rec.is_physical(),
        });
        let header: Vec<String> = (0..m.ncols()).map(|j| format!("col {j}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        return Ok(Output::new(doc, &header, matrix_rows(m)));
    }
    let states: Vec<(String, DensityMatrix)> = match &args.state {
        Some(spec) => {
            let (name, psi) = load_state(spec, None)?;
            vec![(name, psi.density())]
        }
        None => {
            if args.sites == 0 || args.sites > MAX_TOMOGRAPHY_SITES {
                return Err(Failure::Usage(format!("--sites must be 1..={MAX_TOMOGRAPHY_SITES}")));
            }
            let dim = 3usize.pow(args.sites as u32);
            (0..args.samples)
                .map(|i| {
                    (
                        format!("random-{i}"),
                        random_density(args.sites, 1 + i % dim, seed.wrapping_add(i as u64)),
                    )
                })
                .collect()
        }
    };
    let mut items = Vec::new();
    let mut rows = Vec::new();
    for (name, rho) in &states {
        let dist = mub_probabilities(rho)?;
        let rec = if rho.sites() == 1 {
            reconstruct_single(&dist)?
        } else {
            reconstruct_multi(&dist)?
        };
        let err = qutrit_hw::linalg::max_abs_diff(rec.state.matrix(), rho.matrix());
        items.push(json!({"state": name, "sites": rho.sites(), "max_error": num(err), "purity": num(rho.purity())}));
        rows.push(vec![
            name.clone(),
            rho.sites().to_string(),
            format!("{err:.3e}"),
            format!("{:.6}", rho.purity()),
        ]);
    }
    Ok(Output::new(
        Value::Array(items),
        &["state", "sites", "max_error", "purity"],
        rows,
    ))
}

fn cmd_comp(command: &CompCommand, cfg: &OptimizerConfig, seed: u64) -> CliResult<Output> {
    match command {
        CompCommand::Pairs { sites } => {
            if *sites == 0 || *sites > 3 {
                return Err(Failure::Usage("--sites must be 1..=3".into()));
            }
            let report = scan_pairs(&noncommuting_pairs(*sites), cfg, CERTIFY_TOL)?;
            let doc = json!({
                "pairs": report.pairs,
                "restarts": report.restarts,
                "max_value": num(report.max_value),
                "worst_pair": [report.worst_pair.0.to_string(), report.worst_pair.1.to_string()],
                "exceeding": report.exceeding.len(),
                "numerical": true,
            });
            let rows = vec![vec![
                report.pairs.to_string(),
                report.restarts.to_string(),
                format!("{:.9}", report.max_value),
                format!("{} {}", report.worst_pair.0, report.worst_pair.1),
                report.exceeding.len().to_string(),
            ]];
            Ok(Output::new(
                doc,
                &["pairs", "restarts", "max", "worst_pair", "exceeding"],
                rows,
            ))
        }
        CompCommand::Sets { size, sample, guard } => {
            let sets = enumerate_noncommuting_sets(*size, *guard)?;
            let mut lines = vec![json!({
                "size": sets.size,
                "raw": sets.raw,
                "dagger_quotient": sets.dagger_quotient,
                "projective": sets.projective,
                "maximal": sets.maximal,
                "matches_792": sets.matches(792),
            })];
            let mut rows = vec![vec![
                "counts".into(),
                format!(
                    "raw {} dagger-quotient {} projective {} maximal {}",
                    sets.raw, sets.dagger_quotient, sets.projective, sets.maximal
                ),
                String::new(),
            ]];
            if !sets.sets.is_empty() && *sample > 0 {
                let step = (sets.sets.len() / sample).max(1);
                for set in sets.sets.iter().step_by(step).take(*sample) {
                    let r = max_sum_squared(set, cfg);
                    let ops: Vec<String> = set.ops().iter().map(|o| o.to_string()).collect();
                    lines.push(json!({"ops": ops, "max": num(r.value), "converged": r.converged, "hits": r.hits}));
                    rows.push(vec!["set".into(), ops.join(" "), format!("{:.9}", r.value)]);
                }
            }
            let mut out = Output::new(Value::Array(lines), &["kind", "detail", "max"], rows);
            out.json_lines = true;
            Ok(out)
        }
        CompCommand::Max { ops } => {
            let ops: Vec<HwMultiIndex> = ops.iter().map(|s| parse_index(s)).collect::<CliResult<_>>()?;
            let set = OperatorSet::new(ops)?;
            let r = max_sum_squared(&set, cfg);
            let names: Vec<String> = set.ops().iter().map(|o| o.to_string()).collect();
            let doc = json!({
                "ops": names,
                "mutually_noncommuting": set.is_mutually_noncommuting(),
                "max": num(r.value),
                "restarts": r.restarts_used,
                "hits": r.hits,
                "converged": r.converged,
                "argmax": r.argmax_state.as_slice().iter().map(|&z| cjson(z)).collect::<Vec<_>>(),
            });
            let rows = vec![vec![
                names.join(" "),
                format!("{:.9}", r.value),
                r.hits.to_string(),
                r.converged.to_string(),
            ]];
            Ok(Output::new(doc, &["ops", "max", "hits", "converged"], rows))
        }
        CompCommand::Global { samples } => {
            let mut items = Vec::new();
            let mut rows = Vec::new();
            for i in 0..*samples {
                let rho = random_density(2, 1 + i % 9, seed.wrapping_add(i as u64));
                let sum = global_bound_check(&rho)?;
                let expected = 9.0 * rho.purity();
                items.push(json!({"sample": i, "sum": num(sum), "nine_purity": num(expected)}));
                rows.push(vec![i.to_string(), format!("{sum:.9}"), format!("{expected:.9}")]);
            }
            Ok(Output::new(Value::Array(items), &["sample", "sum", "9 tr rho^2"], rows))
        }
    }
}

fn read_criterion(path: &PathBuf) -> CliResult<Criterion> {
    serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cmd_criteria(command: &CriteriaCommand, tol: f64, sep: &OptimizerConfig) -> CliResult<Output> {
    match command {
        CriteriaCommand::Search {
            state,
            n,
            strict,
            limit,
        } => {
            let (_, psi) = load_state(state, *n)?;
            let mode = if *strict {
                CoverageMode::PerPair
            } else {
                CoverageMode::PerTriple
            };
            let found = search_criteria(&psi, &SearchConfig { tol, mode })?;
            let mut items = Vec::new();
            let mut rows = Vec::new();
            for p in found.iter().take(*limit) {
                let series: Vec<String> = p.series.iter().map(|s| s.setting.to_string()).collect();
                items.push(json!({
                    "base": p.base.digits(),
                    "partners": [p.partners[0].digits(), p.partners[1].digits()],
                    "means": p.means.iter().map(|&z| cjson(z)).collect::<Vec<_>>(),
                    "coverage": p.coverage,
                    "pairs_cover_all": p.pairs_cover_all,
                    "series": series,
                    "criteria": [serde_json::to_value(&p.criteria[0]).map_err(qutrit_hw::Error::from)?,
                                 serde_json::to_value(&p.criteria[1]).map_err(qutrit_hw::Error::from)?],
                }));
                rows.push(vec![
                    p.base.to_string(),
                    format!("{} {}", p.partners[0], p.partners[1]),
                    format!("{}+{}", p.coverage[0], p.coverage[1]),
                    series.join(" "),
                ]);
            }
            let mut out = Output::new(
                json!({"total": found.len(), "triples": items}),
                &["base", "partners", "cuts", "series"],
                rows,
            );
            out.text = Some(format!(
                "{} triples found\n{}",
                found.len(),
                table(&out.header, &out.rows)
            ));
            Ok(out)
        }
        CriteriaCommand::Eval { criterion, state, n } => {
            let c = read_criterion(criterion)?;
            let (name, psi) = load_state(state, *n)?;
            let value = c.evaluate(&psi)?;
            let violated = value > c.bound() + tol;
            Ok(Output::new(
                json!({"state": name, "criterion": c.to_string(), "value": num(value), "bound": num(c.bound()), "violated": violated}),
                &["state", "value", "bound", "violated"],
                vec![vec![
                    name,
                    format!("{value:.9}"),
                    c.bound().to_string(),
                    violated.to_string(),
                ]],
            ))
        }
        CriteriaCommand::Certify { criterion, cut } => {
            let c = read_criterion(criterion)?;
            let cuts: Vec<Bipartition> = if cut.is_empty() {
                c.cuts_excluded().to_vec()
            } else {
                cut.iter().map(|s| s.parse::<Bipartition>()).collect::<Result<_, _>>()?
            };
            let mut items = Vec::new();
            let mut rows = Vec::new();
            for k in &cuts {
                let r = c.separable_max(k, sep)?;
                let ok = r.value <= c.bound() + CERTIFY_TOL;
                items.push(
                    json!({"cut": k.to_string(), "separable_max": num(r.value), "certified": ok, "numerical": true}),
                );
                rows.push(vec![k.to_string(), format!("{:.9}", r.value), ok.to_string()]);
            }
            Ok(Output::new(
                Value::Array(items),
                &["cut", "separable_max", "certified"],
                rows,
            ))
        }
        CriteriaCommand::Violates { criteria, state, n } => {
            let cs: Vec<Criterion> = criteria.iter().map(read_criterion).collect::<CliResult<_>>()?;
            let (name, psi) = load_state(state, *n)?;
            let cert = violates_for_all_cuts(&cs, &psi, sep, tol)?;
            let rows = cert
                .witnesses
                .iter()
                .map(|w| {
                    vec![
                        w.cut.to_string(),
                        w.criterion.to_string(),
                        format!("{:.9}", w.separable_max),
                        w.certified.to_string(),
                    ]
                })
                .collect();
            let doc = json!({
                "state": name,
                "violated": cert.violated,
                "values": cert.values.iter().map(|&v| num(v)).collect::<Vec<_>>(),
                "witnesses": cert.witnesses.iter().map(|w| json!({
                    "cut": w.cut.to_string(), "criterion": w.criterion,
                    "separable_max": num(w.separable_max), "certified": w.certified,
                })).collect::<Vec<_>>(),
            });
            let mut out = Output::new(doc, &["cut", "criterion", "separable_max", "certified"], rows);
            out.text = Some(format!(
                "values {:?}\n{}violated on all cuts: {}\n",
                cert.values.iter().map(|v| format!("{v:.9}")).collect::<Vec<_>>(),
                table(&out.header, &out.rows),
                cert.violated
            ));
            Ok(out)
        }
    }
}

fn cmd_reproduce(args: &ReproduceArgs, cfg: &ReproduceConfig) -> CliResult<Output> {
    let ids: Vec<&str> = if args.only.is_empty() || args.all {
        CHECK_IDS.to_vec()
    } else {
        CHECK_IDS
            .iter()
            .copied()
            .filter(|id| args.only.iter().any(|o| o == id))
            .collect()
    };
    let mut reports: Vec<CheckReport> = Vec::new();
    for id in ids {
        let start = Instant::now();
        let report = run_check(id, cfg)?;
        eprintln!("[{id}] {:.2} s", start.elapsed().as_secs_f64());
        reports.push(report);
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    let mut text: String = reports.iter().map(|r| r.to_string()).collect();
    text.push_str(&format!(
        "overall: {} ({passed} of {} checks passed; seed {})\n",
        if passed == reports.len() { "PASS" } else { "FAIL" },
        reports.len(),
        cfg.seed
    ));
    let mut rows = Vec::new();
    for r in &reports {
        for l in &r.lines {
            let status = match l.passed {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "note",
            };
            rows.push(vec![r.id.to_string(), status.to_string(), l.text.clone()]);
        }
    }
    let mut out = Output::new(
        serde_json::to_value(&reports).map_err(qutrit_hw::Error::from)?,
        &["check", "status", "detail"],
        rows,
    );
    out.text = Some(text);
    if passed == reports.len() {
        Ok(out)
    } else {
        Err(Failure::Checks(out))
    }
}

fn run(cli: &Cli) -> CliResult<Output> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    if cli.restarts == Some(0) {
        return Err(Failure::Usage("--restarts must be at least 1".into()));
    }
    let opt = OptimizerConfig::default()
        .with_restarts(cli.restarts.unwrap_or(200))
        .with_seed(cli.seed);
    let sep = OptimizerConfig::default()
        .with_restarts(cli.restarts.unwrap_or(SEPARABLE_RESTARTS))
        .with_seed(cli.seed);
    match &cli.command {
        Command::Ops(a) => cmd_ops(a),
        Command::State(a) => cmd_state(a, cli.tol),
        Command::Tomo(a) => cmd_tomo(a, cli.seed),
        Command::Comp { command } => cmd_comp(command, &opt, cli.seed),
        Command::Criteria { command } => cmd_criteria(command, cli.tol, &sep),
        Command::Reproduce(a) => {
            let cfg = ReproduceConfig {
                seed: cli.seed,
                restarts: cli.restarts.unwrap_or(200),
                separable_restarts: cli.restarts.unwrap_or(SEPARABLE_RESTARTS),
            };
            cmd_reproduce(a, &cfg)
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> Result<(), std::io::Error> {
    let text = out.render(cli.format);
    match &cli.out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, code) = match run(&cli) {
        Ok(out) => (out, 0),
        Err(Failure::Checks(out)) => (out, 1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&cli, &out) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
