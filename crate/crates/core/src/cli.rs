//! Batch pipeline behind the `geomds` binary: sample → decompose →
//! embed / query / eval. Every command reads its inputs from files, writes
//! its outputs atomically into the output directory and appends nothing:
//! re-running a command rewrites byte-identical data files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::Mat;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::decompose::{
    decomposer_registry, default_n1, DecomposeInput, DecomposeParams, LowRankSquaredDistances,
    Method, PairQuery, DEFAULT_MU,
};
use crate::error::{Error, Result};
use crate::geodesics::{
    backend_registry, distance_matrix, farthest_point_sampling, square_columns, BackendOptions,
    GeodesicBackend, Manifold, Metric, SampleSet,
};
use crate::geometry::io::{load_cloud, load_mesh, MeshFormat};
use crate::matrix_io;
use crate::metrics::{self, MetricRecord, PairSample};
use crate::scaling::{self, Embedding};

pub const INDICES_FILE: &str = "indices.csv";
pub const DISTANCES_FILE: &str = "F.bin";
pub const S_FILE: &str = "S.bin";
pub const T_FILE: &str = "T.bin";
pub const HEADER_FILE: &str = "header.json";
pub const EMBEDDING_CSV: &str = "Z.csv";
pub const EMBEDDING_BIN: &str = "Z.bin";
pub const QUERY_FILE: &str = "distances.csv";
pub const METRICS_FILE: &str = "metrics.jsonl";

/// Every knob a command may read. Commands ignore the fields they do not use.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// `off`, `obj` or `csv`; guessed from the extension when `None`.
    pub format: Option<String>,
    pub backend: String,
    pub knn: usize,
    pub method: String,
    pub n: usize,
    pub n1: Option<usize>,
    pub mu: f64,
    pub dim: usize,
    pub sphere: bool,
    pub k: usize,
    pub radius: Option<f64>,
    pub normalize: bool,
    pub first: usize,
    pub seed: u64,
    pub pairs: Option<PathBuf>,
    pub pair_count: usize,
    pub metrics: Vec<String>,
    pub sweep: Vec<usize>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            format: None,
            backend: "dijkstra".into(),
            knn: 10,
            method: "nmds".into(),
            n: 50,
            n1: None,
            mu: DEFAULT_MU,
            dim: 3,
            sphere: false,
            k: 2,
            radius: None,
            normalize: false,
            first: 0,
            seed: 0,
            pairs: None,
            pair_count: 1000,
            metrics: Vec::new(),
            sweep: Vec::new(),
            out: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if let Some(n1) = self.n1 {
            if n1 == 0 || n1 > self.n {
                return bad(format!("n1 = {n1} must be in [1, n = {}]", self.n));
            }
        }
        if !(1.0..=1e12).contains(&self.mu) {
            return bad(format!("mu = {} must be in [1, 1e12]", self.mu));
        }
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        if let Some(r) = self.radius {
            if !(r.is_finite() && r > 0.0) {
                return bad(format!("radius {r} must be positive"));
            }
        }
        Ok(())
    }
}

/// Factor-file header: enough to answer queries without the source mesh.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FactorHeader {
    pub method: Method,
    pub metric: Metric,
    pub p: usize,
    pub n: usize,
    pub n1: Option<usize>,
    pub mu: Option<f64>,
    pub radius: Option<f64>,
    pub rank_deficient: bool,
    pub indices: Vec<usize>,
}

/// Line-oriented JSON log of one command invocation.
#[derive(Default)]
pub struct RunLog {
    lines: Vec<serde_json::Value>,
}

impl RunLog {
    pub fn push(&mut self, record: serde_json::Value) {
        self.lines.push(record);
    }

    pub fn records(&self) -> &[serde_json::Value] {
        &self.lines
    }

    fn render(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_log(cfg: &RunConfig, command: &str, log: &RunLog) -> Result<()> {
    write_atomic(
        &cfg.out.join(format!("{command}.log.jsonl")),
        log.render().as_bytes(),
    )
}

/// Loads the input manifold named by the config.
pub fn load_manifold(cfg: &RunConfig) -> Result<Manifold> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("--input is required".into()))?;
    let format = match &cfg.format {
        Some(f) => f.to_ascii_lowercase(),
        None => path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default(),
    };
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
        ));
    }
    match format.as_str() {
        "csv" => Ok(Manifold::Cloud(load_cloud(path)?)),
        other => Ok(Manifold::Mesh(load_mesh(
            path,
            other.parse::<MeshFormat>()?,
        )?)),
    }
}

pub fn build_backend(cfg: &RunConfig, manifold: &Manifold) -> Result<Box<dyn GeodesicBackend>> {
    let registry = backend_registry();
    let factory = registry.get(&cfg.backend)?;
    factory(
        manifold,
        &BackendOptions {
            knn: cfg.knn,
            radius: if cfg.backend == "sphere" {
                cfg.radius
            } else {
                None
            },
        },
    )
}

fn indices_csv(indices: &[usize]) -> String {
    indices.iter().map(|i| format!("{i}\n")).collect()
}

fn parse_indices(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("bad index '{l}'"),
            })
        })
        .collect()
}

pub fn save_samples(dir: &Path, samples: &SampleSet) -> Result<()> {
    write_atomic(
        &dir.join(INDICES_FILE),
        indices_csv(&samples.indices).as_bytes(),
    )?;
    write_atomic(
        &dir.join(DISTANCES_FILE),
        &matrix_io::encode(samples.distances.as_ref()),
    )
}

pub fn load_samples(dir: &Path) -> Result<SampleSet> {
    let idx_path = dir.join(INDICES_FILE);
    let text = fs::read_to_string(&idx_path).map_err(|e| Error::io(&idx_path, e))?;
    let indices = parse_indices(&text)?;
    let f = matrix_io::load(&dir.join(DISTANCES_FILE))?;
    SampleSet::new(indices, f)
}

pub fn save_factors(dir: &Path, fac: &LowRankSquaredDistances, radius: Option<f64>) -> Result<()> {
    let header = FactorHeader {
        method: fac.method,
        metric: fac.metric,
        p: fac.num_vertices(),
        n: fac.num_samples(),
        n1: fac.n1,
        mu: fac.mu,
        radius,
        rank_deficient: fac.rank_deficient,
        indices: fac.indices.clone(),
    };
    let json = serde_json::to_string_pretty(&header).expect("header serializes");
    write_atomic(&dir.join(S_FILE), &matrix_io::encode(fac.s.as_ref()))?;
    write_atomic(&dir.join(T_FILE), &matrix_io::encode(fac.t.as_ref()))?;
    write_atomic(&dir.join(HEADER_FILE), format!("{json}\n").as_bytes())
}

pub fn load_factors(dir: &Path) -> Result<(LowRankSquaredDistances, FactorHeader)> {
    let hpath = dir.join(HEADER_FILE);
    let text = fs::read_to_string(&hpath).map_err(|e| Error::io(&hpath, e))?;
    let header: FactorHeader = serde_json::from_str(&text)
        .map_err(|e| Error::MatrixFormat(format!("{}: {e}", hpath.display())))?;
    let s = matrix_io::load(&dir.join(S_FILE))?;
    let t = matrix_io::load(&dir.join(T_FILE))?;
    if s.nrows() != header.p {
        return Err(Error::ShapeMismatch(format!(
            "header says p = {} but S has {} rows",
            header.p,
            s.nrows()
        )));
    }
    let mut fac =
        LowRankSquaredDistances::new(s, t, header.method, header.metric, header.indices.clone())?;
    fac.n1 = header.n1;
    fac.mu = header.mu;
    fac.rank_deficient = header.rank_deficient;
    Ok((fac, header))
}

fn sample_with(cfg: &RunConfig, backend: &dyn GeodesicBackend) -> Result<SampleSet> {
    farthest_point_sampling(backend, cfg.n, cfg.first)
}

/// `sample`: farthest point sampling; writes `indices.csv` and `F.bin`.
pub fn cmd_sample(cfg: &RunConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let manifold = load_manifold(cfg)?;
    let backend = build_backend(cfg, &manifold)?;
    ensure_dir(&cfg.out)?;
    let samples = sample_with(cfg, backend.as_ref())?;
    save_samples(&cfg.out, &samples)?;
    let mut log = RunLog::default();
    log.push(json!({
        "event": "sample",
        "backend": backend.name(),
        "p": backend.num_vertices(),
        "n": samples.len(),
        "first": cfg.first,
        "covering_radius": samples.covering_radius(),
    }));
    write_log(cfg, "sample", &log)?;
    Ok(samples)
}

/// Builds factors for `samples`; shared by `decompose` and `eval --sweep`.
pub fn decompose_samples(
    cfg: &RunConfig,
    manifold: &Manifold,
    samples: &SampleSet,
    log: &mut RunLog,
) -> Result<(LowRankSquaredDistances, Option<f64>)> {
    let (columns, radius) = if cfg.sphere {
        let r = match cfg.radius {
            Some(r) => r,
            None => {
                let r = scaling::default_radius(samples);
                log.push(json!({"event": "default_radius", "radius": r}));
                r
            }
        };
        (scaling::cos_transform(samples, r)?, Some(r))
    } else {
        (square_columns(samples), None)
    };
    let registry = decomposer_registry();
    let decomposer = registry.get(&cfg.method)?;
    let mesh = match manifold {
        Manifold::Mesh(m) => Some(m),
        Manifold::Cloud(_) => None,
    };
    let params = DecomposeParams {
        n1: cfg.n1,
        mu: cfg.mu,
        subset: None,
    };
    let fac = decomposer.decompose(&DecomposeInput {
        columns: &columns,
        mesh,
        params: &params,
    })?;
    if fac.rank_deficient {
        log.push(json!({
            "event": "warning",
            "message": "rank deficient sampled block",
            "requested_n1": cfg.n1.unwrap_or_else(|| default_n1(samples.len())),
            "retained": fac.n1,
        }));
    }
    Ok((fac, radius))
}

/// `decompose`: reuses `indices.csv`/`F.bin` from the output directory when
/// they hold `n` samples, otherwise samples inline; writes `S.bin`, `T.bin`
/// and `header.json`.
pub fn cmd_decompose(cfg: &RunConfig) -> Result<LowRankSquaredDistances> {
    cfg.validate()?;
    let manifold = load_manifold(cfg)?;
    ensure_dir(&cfg.out)?;
    let mut log = RunLog::default();
    let samples = match load_samples(&cfg.out) {
        Ok(s) if s.len() == cfg.n && s.num_vertices() == manifold.num_vertices() => {
            log.push(json!({"event": "samples_reused", "n": s.len()}));
            s
        }
        _ => {
            let backend = build_backend(cfg, &manifold)?;
            let s = sample_with(cfg, backend.as_ref())?;
            save_samples(&cfg.out, &s)?;
            log.push(json!({"event": "sampled", "backend": backend.name(), "n": s.len()}));
            s
        }
    };
    let (fac, radius) = decompose_samples(cfg, &manifold, &samples, &mut log)?;
    save_factors(&cfg.out, &fac, radius)?;
    log.push(json!({
        "event": "decompose",
        "method": fac.method,
        "metric": fac.metric,
        "p": fac.num_vertices(),
        "q": fac.inner_dim(),
        "n1": fac.n1,
        "mu": fac.mu,
        "radius": radius,
    }));
    write_log(cfg, "decompose", &log)?;
    Ok(fac)
}

fn embedding_csv(z: &Mat<f64>) -> String {
    let mut out = String::new();
    for i in 0..z.nrows() {
        for j in 0..z.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", z[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// `embed`: classical scaling (or sphere embedding with `--sphere`) from the
/// stored factors; writes `Z.csv` and `Z.bin`.
pub fn cmd_embed(cfg: &RunConfig) -> Result<Embedding> {
    cfg.validate()?;
    let (fac, header) = load_factors(&cfg.out)?;
    let mut log = RunLog::default();
    let emb = if cfg.sphere {
        let r = cfg.radius.or(header.radius).ok_or_else(|| {
            Error::InvalidParameter(
                "sphere embedding needs --radius or a radius in header.json".into(),
            )
        })?;
        let emb = scaling::sphere_embed(&fac, cfg.k, r, cfg.normalize)?;
        log.push(
            json!({"event": "sphere_embed", "k": cfg.k, "radius": r, "normalize": cfg.normalize}),
        );
        emb
    } else {
        scaling::accelerated_mds(&fac, cfg.dim)?
    };
    write_atomic(
        &cfg.out.join(EMBEDDING_CSV),
        embedding_csv(&emb.coords).as_bytes(),
    )?;
    write_atomic(
        &cfg.out.join(EMBEDDING_BIN),
        &matrix_io::encode(emb.coords.as_ref()),
    )?;
    log.push(json!({
        "event": "embed",
        "p": emb.num_points(),
        "dim": emb.dim(),
        "eigenvalues": emb.eigenvalues,
        "clamped_count": emb.clamped_count,
    }));
    write_log(cfg, "embed", &log)?;
    Ok(emb)
}

/// Parses `i,j` rows, reporting the first row whose index is out of range.
pub fn parse_pairs(text: &str, p: usize) -> Result<Vec<(usize, usize)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut pairs = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let line = row + 1;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != 2 {
            return Err(Error::Parse {
                line,
                message: "expected 'i,j'".into(),
            });
        }
        let parse = |t: &str| -> Result<usize> {
            t.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad index '{t}'"),
            })
        };
        let (i, j) = (parse(&rec[0])?, parse(&rec[1])?);
        if i >= p || j >= p {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                len: p,
            });
        }
        pairs.push((i, j));
    }
    Ok(pairs)
}

/// `query`: approximate distances for the pairs in `--pairs`; writes
/// `distances.csv` with rows `i,j,dhat` in input order.
pub fn cmd_query(cfg: &RunConfig) -> Result<Vec<f64>> {
    let (fac, _) = load_factors(&cfg.out)?;
    let path = cfg
        .pairs
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("--pairs is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let pairs = parse_pairs(&text, fac.num_vertices())?;

    let start = Instant::now();
    let query = PairQuery::new(&fac)?;
    let dists = query.distances(&pairs)?;
    let secs = start.elapsed().as_secs_f64();

    let mut out = String::with_capacity(pairs.len() * 24);
    for (&(i, j), d) in pairs.iter().zip(&dists) {
        let _ = writeln!(out, "{i},{j},{d}");
    }
    write_atomic(&cfg.out.join(QUERY_FILE), out.as_bytes())?;
    let mut log = RunLog::default();
    log.push(json!({
        "event": "query",
        "pairs": pairs.len(),
        "seconds": secs,
        "pairs_per_second": if secs > 0.0 { pairs.len() as f64 / secs } else { f64::MAX },
    }));
    write_log(cfg, "query", &log)?;
    Ok(dists)
}

pub const ALL_METRICS: [&str; 5] = ["frobenius", "rms", "stress", "triangle", "best"];

/// Rank of the best-approximation baseline matched to a factor pair.
pub fn matched_rank(fac: &LowRankSquaredDistances) -> usize {
    match fac.method {
        Method::Fmds => 2 * fac.num_samples(),
        Method::Nmds => fac.n1.unwrap_or(fac.num_samples()),
        Method::Cur => fac.inner_dim(),
    }
}

fn evaluate(
    cfg: &RunConfig,
    which: &[String],
    fac: &LowRankSquaredDistances,
    backend: &dyn GeodesicBackend,
    truth: &std::result::Result<Mat<f64>, Error>,
    stored_embedding: Option<Mat<f64>>,
) -> Result<Vec<MetricRecord>> {
    let cap = crate::dense_cap();
    let p = fac.num_vertices();
    let base =
        json!({"method": fac.method, "n": fac.num_samples(), "n1": fac.n1, "mu": fac.mu, "p": p});
    let with = |extra: serde_json::Value| {
        let mut v = base.clone();
        if let (Some(m), Some(e)) = (v.as_object_mut(), extra.as_object()) {
            m.extend(e.clone());
        }
        v
    };
    let mut records = Vec::new();
    let skip = |name: &str, params: serde_json::Value, e: &Error| {
        MetricRecord::skipped(name, params, e.to_string())
    };
    for metric in which {
        match metric.as_str() {
            "frobenius" => match (truth, &metrics::factor_distances(fac, cap)) {
                (Ok(d), Ok(dhat)) => records.push(MetricRecord::new(
                    "rel_frobenius_error",
                    base.clone(),
                    metrics::rel_frobenius_error(dhat.as_ref(), d.as_ref())?,
                    None,
                )),
                (Err(e), _) | (_, Err(e)) => {
                    records.push(skip("rel_frobenius_error", base.clone(), e))
                }
            },
            "rms" => {
                let pairs = PairSample::random(p, cfg.pair_count, cfg.seed)?;
                let v = metrics::rms_relative_pair_error(fac, backend, &pairs)?;
                records.push(MetricRecord::new(
                    "rms_relative_pair_error",
                    with(json!({"pairs": cfg.pair_count})),
                    v,
                    Some(cfg.seed),
                ));
            }
            "stress" => {
                let params = with(json!({"dim": cfg.dim}));
                match truth {
                    Ok(d) => {
                        let z = match &stored_embedding {
                            Some(z) => z.clone(),
                            None => scaling::accelerated_mds(fac, cfg.dim)?.coords,
                        };
                        let e = Mat::from_fn(p, p, |i, j| d[(i, j)] * d[(i, j)]);
                        let s = scaling::stress(z.as_ref(), e.as_ref(), cap)?;
                        records.push(MetricRecord::new("stress", params.clone(), s, None));
                        records.push(MetricRecord::new(
                            "stress_display",
                            params,
                            scaling::display_stress(s, p),
                            None,
                        ));
                    }
                    Err(e) => records.push(skip("stress", params, e)),
                }
            }
            "triangle" => {
                let anchors = farthest_point_sampling(backend, 100.min(p), cfg.first)?.indices;
                let params = with(json!({"anchors": anchors.len()}));
                match metrics::factor_distances(fac, cap) {
                    Ok(dhat) => {
                        let v = metrics::triangle_violation(dhat.as_ref(), &anchors, cap)?;
                        records.push(MetricRecord::new(
                            "triangle_violation_total",
                            params,
                            v.iter().sum(),
                            None,
                        ));
                    }
                    Err(e) => records.push(skip("triangle_violation_total", params, &e)),
                }
            }
            "best" => {
                let rank = matched_rank(fac);
                let params = with(json!({"rank": rank}));
                match (truth, &crate::decompose::reconstruct_dense(fac, cap)) {
                    (Ok(d), Ok(ehat)) => {
                        let e = Mat::from_fn(p, p, |i, j| d[(i, j)] * d[(i, j)]);
                        let best = metrics::best_rank_n(e.as_ref(), rank, cap)?;
                        records.push(MetricRecord::new(
                            "best_rank_error",
                            params.clone(),
                            metrics::rel_frobenius_error(best.as_ref(), e.as_ref())?,
                            None,
                        ));
                        records.push(MetricRecord::new(
                            "factor_squared_error",
                            params,
                            metrics::rel_frobenius_error(ehat.as_ref(), e.as_ref())?,
                            None,
                        ));
                    }
                    (Err(e), _) | (_, Err(e)) => records.push(skip("best_rank_error", params, e)),
                }
            }
            other => {
                return Err(Error::UnknownStrategy {
                    kind: "metric",
                    name: other.to_string(),
                })
            }
        }
    }
    Ok(records)
}

/// `eval`: metric records against the backend's exact distances, one JSON
/// line each, in `metrics.jsonl`. With `--sweep-n`, the pipeline is rerun
/// for each sample count and a relative Frobenius error record is emitted per count.
pub fn cmd_eval(cfg: &RunConfig) -> Result<Vec<MetricRecord>> {
    cfg.validate()?;
    let manifold = load_manifold(cfg)?;
    let backend = build_backend(cfg, &manifold)?;
    ensure_dir(&cfg.out)?;
    let cap = crate::dense_cap();
    let truth = distance_matrix(backend.as_ref(), cap);
    let mut records = Vec::new();
    let mut log = RunLog::default();

    if cfg.sweep.is_empty() {
        let (fac, _) = load_factors(&cfg.out)?;
        if fac.num_vertices() != backend.num_vertices() {
            return Err(Error::ShapeMismatch(format!(
                "factors cover {} vertices, input has {}",
                fac.num_vertices(),
                backend.num_vertices()
            )));
        }
        let which: Vec<String> = if cfg.metrics.is_empty() {
            ALL_METRICS.iter().map(|s| s.to_string()).collect()
        } else {
            cfg.metrics.clone()
        };
        let stored = matrix_io::load(&cfg.out.join(EMBEDDING_BIN))
            .ok()
            .filter(|z| z.nrows() == fac.num_vertices() && z.ncols() == cfg.dim);
        records.extend(evaluate(
            cfg,
            &which,
            &fac,
            backend.as_ref(),
            &truth,
            stored,
        )?);
    } else {
        for &n in &cfg.sweep {
            let mut run = cfg.clone();
            run.n = n;
            run.n1 = cfg.n1.map(|v| v.min(n));
            let samples = sample_with(&run, backend.as_ref())?;
            let (fac, _) = decompose_samples(&run, &manifold, &samples, &mut log)?;
            records.extend(evaluate(
                &run,
                &["frobenius".to_string()],
                &fac,
                backend.as_ref(),
                &truth,
                None,
            )?);
        }
    }
    for r in &records {
        if let Some(w) = &r.warning {
            log::warn!("{} skipped: {w}", r.metric);
        }
    }
    let body: String = records
        .iter()
        .map(|r| format!("{}\n", serde_json::to_string(r).expect("record serializes")))
        .collect();
    write_atomic(&cfg.out.join(METRICS_FILE), body.as_bytes())?;
    log.push(json!({"event": "eval", "records": records.len()}));
    write_log(cfg, "eval", &log)?;
    Ok(records)
}
