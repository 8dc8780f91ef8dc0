//! Command-line front end: absolute Jordan forms, pairwise and batch
//! classification, growth profiling, the dynamics verification suite,
//! and boundary-metric distances.
//!
//! Exit codes for `classify`: 0 equivalent, 1 not equivalent, 2 usage
//! or parse error, 3 out-of-scope input (singular or |det| = 1).

use clap::{Args, Parser, Subcommand};
use qilab::classify::{classify, ClassifyError};
use qilab::dynamics::{
    reconstruct_ajf_from_growth, shadow_pseudo_orbit, DegreeFit, DynError, GrowthConfig,
    OneParameterSubgroup, PseudoOrbit, Segment,
};
use qilab::hp;
use qilab::jordan::absolute_jordan_form;
use qilab::serial::{
    ajf_to_json, matrix_from_json, matrix_to_json, rational_to_string, verdict_to_json,
};
use qilab::treespace::{divergence_height, BoundaryMetric, TreeAddress};
use qilab::RationalMatrix;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_NOT_EQUIVALENT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_OUT_OF_SCOPE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qilab",
    about = "Exact absolute Jordan forms, quasi-isometry classification, and dynamics checks for abelian-by-cyclic groups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Working precision in decimal digits (env QILAB_PRECISION, default 60)
    #[arg(long)]
    precision: Option<u32>,
    /// Upper end of the growth-fit window
    #[arg(long, default_value_t = 40.0)]
    t_max: f64,
    /// Distance-to-integer tolerance for fitted degrees
    #[arg(long, default_value_t = 0.2)]
    degree_threshold: f64,
    /// Largest witness multiple exercised by self-checks
    #[arg(long, default_value_t = 8)]
    max_multiple: u32,
    /// Decimal digits in "approx" fields
    #[arg(long, default_value_t = 12)]
    approx_digits: u32,
    /// Write the result document here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

impl CommonOpts {
    fn precision(&self) -> u32 {
        self.precision
            .or_else(|| {
                std::env::var("QILAB_PRECISION")
                    .ok()
                    .and_then(|v| v.parse().ok())
            })
            .unwrap_or(60)
    }

    fn config_json(&self) -> Value {
        json!({
            "precision": self.precision(),
            "t_max": self.t_max,
            "degree_threshold": self.degree_threshold,
            "max_multiple": self.max_multiple,
            "approx_digits": self.approx_digits,
        })
    }

    fn growth_config(&self) -> GrowthConfig {
        GrowthConfig {
            t_max: self.t_max,
            degree_threshold: self.degree_threshold,
            ..GrowthConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical absolute Jordan form of a matrix
    Ajf {
        matrix: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Decide quasi-isometry equivalence of two matrices, or of all
    /// pairs in a corpus with --batch
    Classify {
        /// First matrix file (omit with --batch)
        a: Option<PathBuf>,
        /// Second matrix file (omit with --batch)
        b: Option<PathBuf>,
        /// Corpus file: { "entries": [{ "id", "matrix", "metadata"? }] }
        #[arg(long)]
        batch: Option<PathBuf>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Growth profile of one vector under the flow of a matrix
    Growth {
        matrix: PathBuf,
        /// Comma-separated vector, e.g. "1,0"
        #[arg(long)]
        vector: String,
        /// Also dump sampled (t, log_norm) rows as CSV to this path
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run the dynamics verification suite for one matrix
    Verify {
        matrix: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Exact boundary-metric distance between two tree addresses
    QmDist {
        /// Branching degree (= |det M|), at least 2
        degree: u64,
        /// Address literal "h:digits(period)"; h may be negative
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn usage(msg: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    fn out_of_scope(msg: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_OUT_OF_SCOPE,
            message: msg.into(),
        }
    }
}

fn validate_opts(opts: &CommonOpts) -> Result<(), CmdError> {
    if opts.precision() == 0
        || opts.t_max <= 0.0
        || opts.degree_threshold <= 0.0
        || opts.max_multiple == 0
        || opts.approx_digits == 0
    {
        return Err(CmdError::usage(
            "precision, t-max, degree-threshold, max-multiple and approx-digits must be positive",
        ));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CmdError> {
    match &cli.command {
        Command::Ajf { opts, .. }
        | Command::Classify { opts, .. }
        | Command::Growth { opts, .. }
        | Command::Verify { opts, .. }
        | Command::QmDist { opts, .. } => validate_opts(opts)?,
    }
    match cli.command {
        Command::Ajf { matrix, opts } => cmd_ajf(&matrix, &opts),
        Command::Classify { a, b, batch, opts } => match batch {
            Some(corpus) => cmd_batch(&corpus, &opts),
            None => {
                let (a, b) = match (a, b) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(CmdError::usage(
                            "classify needs two matrix files, or --batch <corpus>",
                        ))
                    }
                };
                cmd_classify(&a, &b, &opts)
            }
        },
        Command::Growth {
            matrix,
            vector,
            csv,
            opts,
        } => cmd_growth(&matrix, &vector, csv.as_deref(), &opts),
        Command::Verify { matrix, opts } => cmd_verify(&matrix, &opts),
        Command::QmDist { degree, a, b, opts } => cmd_qm_dist(degree, &a, &b, &opts),
    }
}

fn load_matrix(path: &Path) -> Result<RationalMatrix, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::usage(format!("cannot read {}: {}", path.display(), e)))?;
    matrix_from_json(&text).map_err(|e| CmdError::usage(format!("{}: {}", path.display(), e)))
}

fn emit(opts: &CommonOpts, doc: &Value) -> Result<(), CmdError> {
    let text = serde_json::to_string_pretty(doc).expect("serializable");
    match &opts.output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CmdError::usage(format!("cannot write {}: {}", path.display(), e))),
        None => {
            println!("{}", text);
            Ok(())
        }
    }
}

fn cmd_ajf(path: &Path, opts: &CommonOpts) -> Result<u8, CmdError> {
    let m = load_matrix(path)?;
    let f = absolute_jordan_form(&m)
        .map_err(|e| CmdError::out_of_scope(format!("SINGULAR: {}", e)))?;
    emit(opts, &ajf_to_json(&f, opts.approx_digits))?;
    Ok(EXIT_OK)
}

fn classify_error(e: ClassifyError) -> CmdError {
    match e {
        ClassifyError::Singular(_) | ClassifyError::PolycyclicOutOfScope(_) => {
            CmdError::out_of_scope(e.to_string())
        }
        other => CmdError::usage(other.to_string()),
    }
}

fn cmd_classify(a: &Path, b: &Path, opts: &CommonOpts) -> Result<u8, CmdError> {
    let ma = load_matrix(a)?;
    let mb = load_matrix(b)?;
    let verdict = classify(&ma, &mb).map_err(classify_error)?;
    emit(opts, &verdict_to_json(&verdict, opts.approx_digits))?;
    Ok(if verdict.equivalent {
        EXIT_OK
    } else {
        EXIT_NOT_EQUIVALENT
    })
}

fn cmd_batch(corpus_path: &Path, opts: &CommonOpts) -> Result<u8, CmdError> {
    let text = std::fs::read_to_string(corpus_path)
        .map_err(|e| CmdError::usage(format!("cannot read {}: {}", corpus_path.display(), e)))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| CmdError::usage(format!("corpus: {}", e)))?;
    let entries = doc
        .get("entries")
        .and_then(|e| e.as_array())
        .ok_or_else(|| CmdError::usage("corpus must contain an \"entries\" array"))?;

    struct Entry {
        id: String,
        matrix: Option<RationalMatrix>,
        status: String,
        metadata: Value,
    }
    let mut parsed: Vec<Entry> = vec![];
    let mut seen = std::collections::BTreeSet::new();
    for e in entries {
        let id = e
            .get("id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| CmdError::usage("corpus entry missing \"id\""))?
            .to_string();
        if !seen.insert(id.clone()) {
            return Err(CmdError::usage(format!("duplicate corpus id {:?}", id)));
        }
        let metadata = e.get("metadata").cloned().unwrap_or(Value::Null);
        let matrix_value = e
            .get("matrix")
            .ok_or_else(|| CmdError::usage(format!("entry {:?} missing \"matrix\"", id)))?;
        match matrix_from_json(&matrix_value.to_string()) {
            Ok(m) => {
                let status = match classify(&m, &m) {
                    Ok(_) => "ok".to_string(),
                    Err(err) => match err {
                        ClassifyError::Singular(_) => "SINGULAR".into(),
                        ClassifyError::PolycyclicOutOfScope(_) => "POLYCYCLIC_OUT_OF_SCOPE".into(),
                        ClassifyError::NonIntegral(_) => "NONINTEGRAL".into(),
                        ClassifyError::Jordan(e) => format!("ERROR: {}", e),
                    },
                };
                parsed.push(Entry {
                    id,
                    matrix: Some(m),
                    status,
                    metadata,
                });
            }
            Err(err) => parsed.push(Entry {
                id,
                matrix: None,
                status: format!("PARSE_ERROR: {}", err),
                metadata,
            }),
        }
    }
    parsed.sort_by(|a, b| a.id.cmp(&b.id));

    let mut entry_docs = vec![];
    for e in &parsed {
        let mut obj = Map::new();
        obj.insert("id".into(), json!(e.id));
        obj.insert("status".into(), json!(e.status));
        if !e.metadata.is_null() {
            obj.insert("metadata".into(), e.metadata.clone());
        }
        if let Some(m) = &e.matrix {
            obj.insert("matrix".into(), matrix_to_json(m));
            if e.status == "ok" {
                let f = absolute_jordan_form(m).expect("validated above");
                obj.insert("ajf".into(), ajf_to_json(&f, opts.approx_digits));
            }
        }
        entry_docs.push(Value::Object(obj));
    }

    // all-pairs verdicts over usable entries, deterministic order
    let usable: Vec<&Entry> = parsed.iter().filter(|e| e.status == "ok").collect();
    let mut pair_docs = vec![];
    let mut parent: BTreeMap<String, String> = usable
        .iter()
        .map(|e| (e.id.clone(), e.id.clone()))
        .collect();
    fn find(parent: &mut BTreeMap<String, String>, x: &str) -> String {
        let p = parent[x].clone();
        if p == x {
            p
        } else {
            let root = find(parent, &p);
            parent.insert(x.to_string(), root.clone());
            root
        }
    }
    // evaluate pairs in parallel; assembly below stays single-threaded
    // and ordered so the output is deterministic
    let index_pairs: Vec<(usize, usize)> = (0..usable.len())
        .flat_map(|i| (i + 1..usable.len()).map(move |j| (i, j)))
        .collect();
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(index_pairs.len().max(1));
    let mut verdicts: Vec<Option<Result<qilab::ClassificationVerdict, ClassifyError>>> =
        (0..index_pairs.len()).map(|_| None).collect();
    {
        let chunks: Vec<&mut [Option<_>]> = {
            let per = index_pairs.len().div_ceil(workers.max(1)).max(1);
            verdicts.chunks_mut(per).collect()
        };
        let per = index_pairs.len().div_ceil(workers.max(1)).max(1);
        std::thread::scope(|scope| {
            for (c, chunk) in chunks.into_iter().enumerate() {
                let pairs = &index_pairs;
                let usable = &usable;
                scope.spawn(move || {
                    for (offset, slot) in chunk.iter_mut().enumerate() {
                        let (i, j) = pairs[c * per + offset];
                        *slot = Some(classify(
                            usable[i].matrix.as_ref().unwrap(),
                            usable[j].matrix.as_ref().unwrap(),
                        ));
                    }
                });
            }
        });
    }
    for ((i, j), verdict) in index_pairs.iter().zip(verdicts) {
        let (a, b) = (usable[*i], usable[*j]);
        let verdict = verdict.expect("filled by worker").map_err(classify_error)?;
        pair_docs.push(json!({
            "a": a.id,
            "b": b.id,
            "equivalent": verdict.equivalent,
            "witness": verdict.witness.map(|w| json!([w.a, w.b])).unwrap_or(Value::Null),
            "certificate": verdict.certificate.as_str(),
        }));
        if verdict.equivalent {
            let ra = find(&mut parent, &a.id);
            let rb = find(&mut parent, &b.id);
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent.insert(hi, lo);
            }
        }
    }
    let ids: Vec<String> = usable.iter().map(|e| e.id.clone()).collect();
    let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for id in &ids {
        let root = find(&mut parent, id);
        classes.entry(root).or_default().push(id.clone());
    }
    let class_docs: Vec<Value> = classes.values().map(|members| json!(members)).collect();

    let doc = json!({
        "config": opts.config_json(),
        "entries": entry_docs,
        "pairs": pair_docs,
        "classes": class_docs,
    });
    emit(opts, &doc)?;
    Ok(EXIT_OK)
}

fn parse_vector(text: &str) -> Result<Vec<f64>, CmdError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CmdError::usage(format!("bad vector component {:?}", t)))
        })
        .collect()
}

fn cmd_growth(
    path: &Path,
    vector: &str,
    csv: Option<&Path>,
    opts: &CommonOpts,
) -> Result<u8, CmdError> {
    let m = load_matrix(path)?;
    let v = parse_vector(vector)?;
    if v.len() != m.dim() {
        return Err(CmdError::usage(format!(
            "vector has {} components for a {}x{} matrix",
            v.len(),
            m.dim(),
            m.dim()
        )));
    }
    let sub = OneParameterSubgroup::new(&m, opts.precision())
        .map_err(|e| CmdError::out_of_scope(e.to_string()))?;
    let cfg = opts.growth_config();
    let profile = sub
        .growth_profile(&v, &cfg)
        .map_err(|e| CmdError::usage(e.to_string()))?;
    if let Some(csv_path) = csv {
        let samples = sub
            .growth_samples(&v, &cfg)
            .map_err(|e| CmdError::usage(e.to_string()))?;
        let mut text = String::from("t,log_norm\n");
        for (t, y) in samples {
            text.push_str(&format!("{},{}\n", t, y));
        }
        std::fs::write(csv_path, text)
            .map_err(|e| CmdError::usage(format!("cannot write {}: {}", csv_path.display(), e)))?;
    }
    let degree_json = match profile.degree {
        DegreeFit::Resolved(d) => json!(d),
        DegreeFit::Unresolved { raw } => json!({ "UNRESOLVED": raw }),
    };
    let doc = json!({
        "config": opts.config_json(),
        "squarings": sub.squarings(),
        "rate": profile.rate,
        "degree": degree_json,
        "residual": profile.residual,
    });
    emit(opts, &doc)?;
    Ok(EXIT_OK)
}

fn cmd_verify(path: &Path, opts: &CommonOpts) -> Result<u8, CmdError> {
    let m = load_matrix(path)?;
    let digits = opts.precision();
    let sub = OneParameterSubgroup::new(&m, digits)
        .map_err(|e| CmdError::out_of_scope(e.to_string()))?;
    let cfg = opts.growth_config();
    let mut all_pass = true;
    let mut properties = Map::new();

    // growth envelopes: a probe from every fresh filtration layer of
    // every eigenvalue must fit (log modulus, layer index)
    {
        let probes = sub
            .envelope_profiles(&cfg)
            .map_err(|e| CmdError::usage(e.to_string()))?;
        let mut worst_rate_err = 0.0f64;
        let mut pass = true;
        for p in &probes {
            let rate_err = (p.profile.rate - p.log_modulus).abs();
            worst_rate_err = worst_rate_err.max(rate_err);
            if rate_err > 1e-3 || p.profile.resolved_degree() != Some(p.level) {
                pass = false;
            }
        }
        all_pass &= pass;
        properties.insert(
            "growth_envelopes".into(),
            json!({
                "pass": pass,
                "vectors_checked": probes.len(),
                "max_rate_error": worst_rate_err,
            }),
        );
    }

    // reconstruction agreement (skipped when a center is present)
    {
        match reconstruct_ajf_from_growth(&sub, 4, &cfg) {
            Ok(rec) => {
                let exact = absolute_jordan_form(sub.base())
                    .map_err(|e| CmdError::out_of_scope(e.to_string()))?;
                let agrees = rec.agrees_with(&exact, 1e-4);
                all_pass &= agrees;
                let blocks: Vec<Value> = rec
                    .blocks
                    .iter()
                    .map(|b| json!({ "modulus": b.modulus, "size": b.size, "count": b.count }))
                    .collect();
                properties.insert(
                    "reconstruction".into(),
                    json!({ "pass": agrees, "blocks": blocks }),
                );
            }
            Err(DynError::CenterPresent) => {
                properties.insert(
                    "reconstruction".into(),
                    json!({ "skipped": "CENTER_PRESENT" }),
                );
            }
            Err(e) => return Err(CmdError::usage(e.to_string())),
        }
    }

    // shadowing: canned pseudo-orbit with small jumps
    {
        let n = sub.dim();
        let mut segments = vec![];
        for i in 0..8 {
            let point: Vec<f64> = (0..n).map(|j| 0.01 * ((i + j) as f64)).collect();
            segments.push(Segment {
                point,
                time: i as f64 * 1.5,
                duration: 1.5,
            });
        }
        let orbit = PseudoOrbit {
            segments,
            epsilon: f64::INFINITY,
            min_duration: 1.0,
        };
        let report =
            shadow_pseudo_orbit(&sub, &orbit).map_err(|e| CmdError::usage(e.to_string()))?;
        let pass = report.center_leak <= 1e-10 && report.delta <= report.bound * (1.0 + 1e-9);
        all_pass &= pass;
        properties.insert(
            "shadowing".into(),
            json!({
                "pass": pass,
                "delta": report.delta,
                "bound": report.bound,
                "center_leak": report.center_leak,
            }),
        );
    }

    // cocycle
    {
        let mut worst = 0.0f64;
        let mut pass = true;
        let pairs = [(1.3, 2.9), (-4.2, 7.1), (-3.5, -5.5), (9.9, -0.4)];
        for (t, s) in pairs {
            // form t + s at working precision, not in f64
            let tr = hp::from_f64(t, sub.precision_bits());
            let sr = hp::from_f64(s, sub.precision_bits());
            let lhs = sub.evaluate_r(&(tr.clone() + sr.clone()));
            let rhs = sub.evaluate_r(&tr).mul(&sub.evaluate_r(&sr));
            let err = hp::to_f64(&lhs.sub(&rhs).max_abs());
            let scale = hp::to_f64(&lhs.max_abs()).max(1.0);
            let rel = err / scale;
            worst = worst.max(rel);
            if rel > 1e-20 {
                pass = false;
            }
        }
        all_pass &= pass;
        properties.insert(
            "cocycle".into(),
            json!({ "pass": pass, "max_relative_error": worst }),
        );
    }

    let doc = json!({
        "config": opts.config_json(),
        "matrix": matrix_to_json(&m),
        "squarings": sub.squarings(),
        "properties": Value::Object(properties),
        "pass": all_pass,
    });
    emit(opts, &doc)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_NOT_EQUIVALENT })
}

fn cmd_qm_dist(degree: u64, a: &str, b: &str, opts: &CommonOpts) -> Result<u8, CmdError> {
    let metric = BoundaryMetric::new(degree).map_err(|e| CmdError::usage(e.to_string()))?;
    let pa = TreeAddress::parse(degree, a).map_err(|e| CmdError::usage(e.to_string()))?;
    let pb = TreeAddress::parse(degree, b).map_err(|e| CmdError::usage(e.to_string()))?;
    let dist = metric.distance(&pa, &pb);
    let height = divergence_height(&pa, &pb).ok();
    let approx = num_traits::ToPrimitive::to_f64(&dist).unwrap_or(f64::NAN);
    let doc = json!({
        "degree": degree,
        "a": pa.to_string(),
        "b": pb.to_string(),
        "divergence_height": height,
        "distance": rational_to_string(&dist),
        "distance_approx": approx,
    });
    emit(opts, &doc)?;
    Ok(EXIT_OK)
}
