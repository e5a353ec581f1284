//! Local:remote (L:R) data-movement ratios and remote-memory footprints.
//!
//! Every model returns a dimensionless ratio of bytes moved in local (HBM)
//! memory to bytes moved to or from remote memory. Models that count words or
//! elements use the same word size on both sides, so the ratio is unchanged
//! when normalized to bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::de;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Analytical,
    Counters,
    Literature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppCharacterization {
    pub name: String,
    pub lr: f64,
    /// bytes of remote memory required per compute node
    pub footprint: f64,
    pub lr_source: Source,
    pub footprint_source: Source,
}

impl AppCharacterization {
    pub fn validate(self) -> Result<Self> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::field(format!("apps.{}.lr", self.name), "must be positive"));
        }
        if !(self.footprint > 0.0 && self.footprint.is_finite()) {
            return Err(Error::field(
                format!("apps.{}.footprint", self.name),
                "must be positive",
            ));
        }
        Ok(self)
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::field(field, format!("must be positive, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// AI training

/// FLOP per sample byte over FLOP per HBM byte = HBM bytes per sample byte.
pub fn lr_ai(flop_per_hbm_byte: f64, flop_per_sample_byte: f64) -> Result<f64> {
    positive("flop_per_hbm_byte", flop_per_hbm_byte)?;
    positive("flop_per_sample_byte", flop_per_sample_byte)?;
    Ok(flop_per_sample_byte / flop_per_hbm_byte)
}

// ---------------------------------------------------------------------------
// STREAM triad

/// Each remote load or store of the triad also lands in local memory on top
/// of the nominal local access.
pub fn lr_stream() -> f64 {
    2.0
}

pub fn stream_footprint(vector_len: f64, arrays: u32, element_bytes: f64) -> f64 {
    vector_len * arrays as f64 * element_bytes
}

// ---------------------------------------------------------------------------
// GEMM

/// Square `N x N` GEMM (`C = A B`) whose three operands live in remote memory
/// and are processed as a sequence of HBM-sized local GEMMs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GemmParams {
    pub n: f64,
    #[serde(default = "default_f64_bytes")]
    pub element_bytes: f64,
    #[serde(deserialize_with = "de::bytes", default = "default_hbm")]
    pub hbm_bytes: f64,
    #[serde(deserialize_with = "de::bytes", default = "default_cache")]
    pub cache_bytes: f64,
    /// Subtract the `3M` elements already resident in fast memory. The
    /// correction is only meaningful for `N^2 >> M` and drives the remote
    /// traffic negative close to the HBM size, so it is off by default.
    #[serde(default)]
    pub resident_correction: bool,
}

fn default_f64_bytes() -> f64 {
    8.0
}
fn default_hbm() -> f64 {
    512e9
}
fn default_cache() -> f64 {
    40e6
}

impl GemmParams {
    pub fn new(n: f64) -> Self {
        Self {
            n,
            element_bytes: default_f64_bytes(),
            hbm_bytes: default_hbm(),
            cache_bytes: default_cache(),
            resident_correction: false,
        }
    }

    /// Largest `N` whose three operands fill `footprint` bytes.
    pub fn for_footprint(footprint: f64) -> Self {
        Self::new((footprint / (3.0 * default_f64_bytes())).sqrt())
    }

    pub fn footprint(&self) -> f64 {
        3.0 * self.n * self.n * self.element_bytes
    }

    fn validate(&self) -> Result<()> {
        positive("gemm.n", self.n)?;
        positive("gemm.element_bytes", self.element_bytes)?;
        positive("gemm.cache_bytes", self.cache_bytes)?;
        if !(self.cache_bytes < self.hbm_bytes) {
            return Err(Error::field("gemm.cache_bytes", "must be smaller than hbm_bytes"));
        }
        if !(self.footprint() > self.hbm_bytes) {
            return Err(Error::field(
                "gemm.n",
                "operands fit in HBM; no remote traffic to model",
            ));
        }
        Ok(())
    }
}

/// Data-movement lower bound for an `n x n` GEMM with fast memory of `m`
/// elements: `2 n^3 / sqrt(m) + n^2`, minus `3m` when `resident` is set.
pub fn gemm_traffic(n: f64, m: f64, resident: bool) -> f64 {
    let t = 2.0 * n.powi(3) / m.sqrt() + n * n;
    if resident {
        t - 3.0 * m
    } else {
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GemmEstimate {
    pub lr: f64,
    pub footprint: f64,
    /// Elements moved between remote memory and HBM.
    pub remote_elements: f64,
    /// Elements moved between HBM and cache, summed over local GEMMs.
    pub local_elements: f64,
    /// Dimension of one HBM-resident local GEMM.
    pub local_n: f64,
    pub local_gemms: f64,
}

pub fn lr_gemm(p: &GemmParams) -> Result<GemmEstimate> {
    p.validate()?;
    let hbm_elems = p.hbm_bytes / p.element_bytes;
    let cache_elems = p.cache_bytes / p.element_bytes;
    let remote = gemm_traffic(p.n, hbm_elems, p.resident_correction);
    if !(remote > 0.0) {
        return Err(Error::Model(format!(
            "gemm: remote traffic {remote} is not positive for N = {}",
            p.n
        )));
    }
    // three operands resident in HBM at once
    let local_n = (hbm_elems / 3.0).sqrt().floor();
    let per_local = gemm_traffic(local_n, cache_elems, p.resident_correction);
    let local_gemms = (p.footprint() / p.hbm_bytes).powf(1.5);
    let local = local_gemms * per_local;
    Ok(GemmEstimate {
        lr: local / remote,
        footprint: p.footprint(),
        remote_elements: remote,
        local_elements: local,
        local_n,
        local_gemms,
    })
}

// ---------------------------------------------------------------------------
// SuperLU: one sparse LU factorization followed by `iters` pairs of
// triangular solves.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperluParams {
    /// matrix dimension
    pub n: f64,
    /// nonzeros of the factored matrix
    pub nnz: f64,
    pub iters: u32,
    /// value plus index bytes
    #[serde(default = "default_nnz_bytes")]
    pub bytes_per_nonzero: f64,
}

fn default_nnz_bytes() -> f64 {
    12.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperluEstimate {
    pub lr_factor: f64,
    pub lr_solve: f64,
    pub lr_whole: f64,
    pub footprint: f64,
}

/// Factorization reads each input block and writes back its factors
/// (`lr_factor = 1`). Each solve iteration loads every nonzero plus the
/// matching right-hand-side entry; the factors and the solution cross the
/// remote link once: `lr_solve = (nnz + n + iters * 2 nnz) / (nnz + n)`.
/// The whole application adds the two phases' ratios.
pub fn lr_superlu(p: &SuperluParams) -> Result<SuperluEstimate> {
    positive("superlu.n", p.n)?;
    positive("superlu.bytes_per_nonzero", p.bytes_per_nonzero)?;
    if !(p.nnz >= p.n) {
        return Err(Error::field("superlu.nnz", "must be at least n"));
    }
    if p.iters < 1 {
        return Err(Error::field("superlu.iters", "must be at least 1"));
    }
    let lr_factor = 1.0;
    let remote = p.nnz + p.n;
    let lr_solve = (remote + p.iters as f64 * 2.0 * p.nnz) / remote;
    Ok(SuperluEstimate {
        lr_factor,
        lr_solve,
        lr_whole: lr_factor + lr_solve,
        footprint: p.nnz * p.bytes_per_nonzero,
    })
}

// ---------------------------------------------------------------------------
// SpMM (LOBPCG eigensolver)

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpmmParams {
    /// matrix dimension N
    pub n: f64,
    /// nonzeros per row k; nnz = k N
    pub nnz_per_row: f64,
    /// right-hand sides
    pub rhs: f64,
    #[serde(deserialize_with = "de::bytes", default = "default_cache")]
    pub cache_bytes: f64,
    #[serde(default = "default_f64_bytes")]
    pub word_bytes: f64,
    #[serde(default = "default_nnz_bytes")]
    pub bytes_per_nonzero: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum SpmmRatio {
    Ratio(f64),
    /// The whole matrix fits in cache; the I/O model does not apply.
    FitsInCache,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpmmEstimate {
    pub lr: SpmmRatio,
    pub local_words: f64,
    pub remote_words: f64,
    pub footprint: f64,
}

/// Local words `kN (1 + log_M(kN / M))` over remote words `nnz + N * rhs`.
/// Footprint is half the nonzeros since the matrix is symmetric.
pub fn lr_spmm(p: &SpmmParams) -> Result<SpmmEstimate> {
    positive("spmm.n", p.n)?;
    positive("spmm.nnz_per_row", p.nnz_per_row)?;
    positive("spmm.rhs", p.rhs)?;
    positive("spmm.word_bytes", p.word_bytes)?;
    positive("spmm.bytes_per_nonzero", p.bytes_per_nonzero)?;
    let cache_words = p.cache_bytes / p.word_bytes;
    if !(cache_words > 1.0) {
        return Err(Error::field("spmm.cache_bytes", "must hold more than one word"));
    }
    let nnz = p.nnz_per_row * p.n;
    let remote = nnz + p.n * p.rhs;
    let footprint = nnz / 2.0 * p.bytes_per_nonzero;
    if nnz < cache_words {
        return Ok(SpmmEstimate {
            lr: SpmmRatio::FitsInCache,
            local_words: nnz,
            remote_words: remote,
            footprint,
        });
    }
    let local = nnz * (1.0 + (nnz / cache_words).ln() / cache_words.ln());
    Ok(SpmmEstimate {
        lr: SpmmRatio::Ratio(local / remote),
        local_words: local,
        remote_words: remote,
        footprint,
    })
}

// ---------------------------------------------------------------------------
// Smith-Waterman alignment (ADEPT)

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignParams {
    pub m: u64,
    pub n: u64,
    /// Longest traceback path, in cells.
    #[serde(default)]
    pub traceback_len: u64,
    pub pairs: f64,
    #[serde(default = "one")]
    pub char_bytes: f64,
    /// Remote bytes per sequence byte (sequences in plus results out).
    #[serde(default = "two")]
    pub stream_factor: f64,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}

/// Each of the `m n` score cells reads three neighbours locally; the two
/// sequences are read once from remote memory. Traceback adds `l` local
/// accesses.
pub fn lr_align(p: &AlignParams, traceback: bool) -> Result<(f64, f64)> {
    if p.m < 1 || p.n < 1 {
        return Err(Error::field("align", "sequence lengths must be at least 1"));
    }
    if p.traceback_len > p.m.max(p.n) {
        return Err(Error::field(
            "align.traceback_len",
            "cannot exceed the longest alignment",
        ));
    }
    let (m, n) = (p.m as f64, p.n as f64);
    let mut local = 3.0 * m * n;
    if traceback {
        local += p.traceback_len as f64;
    }
    let footprint = p.pairs * (m + n) * p.char_bytes * p.stream_factor;
    Ok((local / (m + n), footprint))
}

// ---------------------------------------------------------------------------
// Windowed local similarity (DASSA)

/// Each cell touches `window_cells` neighbours for each correlation and is
/// streamed from remote memory once.
pub fn lr_windowed_similarity(window_cells: f64, correlations: f64) -> Result<f64> {
    positive("window_cells", window_cells)?;
    positive("correlations", correlations)?;
    Ok(window_cells * correlations)
}

// ---------------------------------------------------------------------------
// Profiler counters

/// Hardware counter totals for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "device", rename_all = "kebab-case")]
pub enum CounterSample {
    /// NSight Compute `dram__sectors_{read,write}.sum`, 32-byte sectors.
    Gpu {
        read_sectors: f64,
        write_sectors: f64,
        #[serde(deserialize_with = "de::bytes")]
        remote_bytes: f64,
    },
    /// Uncore `UNC_M_CAS_COUNT.{RD,WR}[UNIT0-7]`, 64-byte lines.
    Cpu {
        cas_read: [f64; 8],
        cas_write: [f64; 8],
        #[serde(deserialize_with = "de::bytes")]
        remote_bytes: f64,
    },
}

pub const GPU_SECTOR_BYTES: f64 = 32.0;
pub const CPU_LINE_BYTES: f64 = 64.0;

impl CounterSample {
    pub fn local_bytes(&self) -> f64 {
        match self {
            CounterSample::Gpu {
                read_sectors,
                write_sectors,
                ..
            } => GPU_SECTOR_BYTES * (read_sectors + write_sectors),
            CounterSample::Cpu {
                cas_read, cas_write, ..
            } => CPU_LINE_BYTES * (cas_read.iter().sum::<f64>() + cas_write.iter().sum::<f64>()),
        }
    }

    pub fn remote_bytes(&self) -> f64 {
        match self {
            CounterSample::Gpu { remote_bytes, .. } | CounterSample::Cpu { remote_bytes, .. } => {
                *remote_bytes
            }
        }
    }

    fn counters(&self) -> Vec<f64> {
        match self {
            CounterSample::Gpu {
                read_sectors,
                write_sectors,
                ..
            } => vec![*read_sectors, *write_sectors],
            CounterSample::Cpu {
                cas_read, cas_write, ..
            } => cas_read.iter().chain(cas_write).copied().collect(),
        }
    }

    /// Parses a two-column `counter,value` CSV export. Recognized counters:
    /// `dram__sectors_read.sum`, `dram__sectors_write.sum`,
    /// `UNC_M_CAS_COUNT.RD[UNITn]`, `UNC_M_CAS_COUNT.WR[UNITn]` and
    /// `remote_bytes` (which accepts size suffixes). A header row is optional.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let (mut gpu_r, mut gpu_w) = (None, None);
        let (mut rd, mut wr) = ([0.0; 8], [0.0; 8]);
        let mut saw_cpu = false;
        let mut remote = None;
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Model(format!("counter csv: {e}")))?;
            let name = record.get(0).unwrap_or_default();
            let value = record.get(1).unwrap_or_default();
            if line == 0 && name.eq_ignore_ascii_case("counter") {
                continue;
            }
            let field = format!("counters[{}].{name}", line + 1);
            let number = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::field(field.clone(), format!("bad value `{value}`")))
            };
            if name == "remote_bytes" {
                remote = Some(crate::units::parse_bytes(value)?);
            } else if name == "dram__sectors_read.sum" {
                gpu_r = Some(number()?);
            } else if name == "dram__sectors_write.sum" {
                gpu_w = Some(number()?);
            } else if let Some((dir, unit)) = parse_cas(name) {
                saw_cpu = true;
                let slot = if dir == 'R' { &mut rd } else { &mut wr };
                slot[unit] += number()?;
            } else {
                return Err(Error::field(field, "unrecognized counter"));
            }
        }
        let remote_bytes = remote.ok_or_else(|| Error::field("counters.remote_bytes", "missing"))?;
        let sample = match (gpu_r.is_some() || gpu_w.is_some(), saw_cpu) {
            (true, true) => {
                return Err(Error::field("counters", "mixes GPU and CPU counters"));
            }
            (true, false) => CounterSample::Gpu {
                read_sectors: gpu_r.unwrap_or(0.0),
                write_sectors: gpu_w.unwrap_or(0.0),
                remote_bytes,
            },
            (false, true) => CounterSample::Cpu {
                cas_read: rd,
                cas_write: wr,
                remote_bytes,
            },
            (false, false) => return Err(Error::EmptySample),
        };
        Ok(sample)
    }
}

/// `UNC_M_CAS_COUNT.RD[UNIT3]` -> `('R', 3)`.
fn parse_cas(name: &str) -> Option<(char, usize)> {
    let rest = name.strip_prefix("UNC_M_CAS_COUNT.")?;
    let (dir, rest) = if let Some(r) = rest.strip_prefix("RD") {
        ('R', r)
    } else {
        ('W', rest.strip_prefix("WR")?)
    };
    let unit: usize = rest.strip_prefix("[UNIT")?.strip_suffix(']')?.parse().ok()?;
    (unit < 8).then_some((dir, unit))
}

pub fn lr_from_counters(s: &CounterSample) -> Result<f64> {
    let counters = s.counters();
    if counters.iter().any(|c| *c < 0.0) {
        return Err(Error::field("counters", "must be nonnegative"));
    }
    if !(s.remote_bytes() > 0.0) {
        return Err(Error::field("counters.remote_bytes", "must be positive"));
    }
    if counters.iter().all(|c| *c == 0.0) {
        return Err(Error::EmptySample);
    }
    Ok(s.local_bytes() / s.remote_bytes())
}

// ---------------------------------------------------------------------------
// Application descriptions

/// How an application's L:R is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Ai {
        flop_per_hbm_byte: f64,
        flop_per_sample_byte: f64,
    },
    Stream {
        vector_len: f64,
        #[serde(default = "default_f64_bytes")]
        element_bytes: f64,
    },
    Gemm(GemmParams),
    Superlu(SuperluParams),
    Spmm(SpmmParams),
    Align {
        #[serde(flatten)]
        params: AlignParams,
        #[serde(default)]
        traceback: bool,
    },
    WindowedSimilarity {
        window_cells: f64,
        correlations: f64,
        samples: f64,
        channels: f64,
        #[serde(default = "four")]
        element_bytes: f64,
    },
    Counters(CounterSample),
    /// A published ratio with no analytical inputs.
    Literature { lr: f64 },
}

fn four() -> f64 {
    4.0
}

/// An application entry as written in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppSpec {
    pub name: String,
    pub model: ModelSpec,
    /// Overrides (or supplies) the model's footprint, bytes.
    #[serde(default, deserialize_with = "de::opt_bytes", skip_serializing_if = "Option::is_none")]
    pub footprint: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub footprint_source: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl AppSpec {
    pub fn evaluate(&self) -> Result<AppCharacterization> {
        let (lr, modeled_footprint, lr_source) = match &self.model {
            ModelSpec::Ai {
                flop_per_hbm_byte,
                flop_per_sample_byte,
            } => (lr_ai(*flop_per_hbm_byte, *flop_per_sample_byte)?, None, Source::Counters),
            ModelSpec::Stream {
                vector_len,
                element_bytes,
            } => (
                lr_stream(),
                Some(stream_footprint(*vector_len, 3, *element_bytes)),
                Source::Analytical,
            ),
            ModelSpec::Gemm(p) => {
                let e = lr_gemm(p)?;
                (e.lr, Some(e.footprint), Source::Analytical)
            }
            ModelSpec::Superlu(p) => {
                let e = lr_superlu(p)?;
                (e.lr_whole, Some(e.footprint), Source::Analytical)
            }
            ModelSpec::Spmm(p) => {
                let e = lr_spmm(p)?;
                match e.lr {
                    SpmmRatio::Ratio(lr) => (lr, Some(e.footprint), Source::Analytical),
                    SpmmRatio::FitsInCache => {
                        return Err(Error::Model(format!(
                            "{}: matrix fits in cache, L:R undefined",
                            self.name
                        )))
                    }
                }
            }
            ModelSpec::Align { params, traceback } => {
                let (lr, fp) = lr_align(params, *traceback)?;
                (lr, Some(fp), Source::Analytical)
            }
            ModelSpec::WindowedSimilarity {
                window_cells,
                correlations,
                samples,
                channels,
                element_bytes,
            } => (
                lr_windowed_similarity(*window_cells, *correlations)?,
                Some(samples * channels * element_bytes),
                Source::Analytical,
            ),
            ModelSpec::Counters(s) => (lr_from_counters(s)?, None, Source::Counters),
            ModelSpec::Literature { lr } => (*lr, None, Source::Literature),
        };
        let (footprint, footprint_source) = match (self.footprint, modeled_footprint) {
            (Some(f), _) => (f, self.footprint_source.unwrap_or(Source::Literature)),
            (None, Some(f)) => (f, self.footprint_source.unwrap_or(Source::Analytical)),
            (None, None) => {
                return Err(Error::field(
                    format!("apps.{}.footprint", self.name),
                    "required for this model kind",
                ))
            }
        };
        AppCharacterization {
            name: self.name.clone(),
            lr,
            footprint,
            lr_source,
            footprint_source,
        }
        .validate()
    }
}

#[derive(Debug, Clone, Deserialize)]
struct AppsFile {
    apps: Vec<AppSpec>,
    #[serde(default)]
    variants: Vec<AppSpec>,
}

const BUILTIN_APPS: &str = include_str!("../data/apps.json");

fn builtin_file() -> AppsFile {
    serde_json::from_str(BUILTIN_APPS).expect("shipped apps file parses")
}

/// Parses a user file of the form `{"apps": [AppSpec, ...]}`.
pub fn parse_app_specs(text: &str) -> Result<Vec<AppSpec>> {
    let file: AppsFile = crate::error::from_json(text)?;
    Ok(file.apps.into_iter().chain(file.variants).collect())
}

/// The shipped specs: the thirteen studied workloads.
pub fn builtin_app_specs() -> Vec<AppSpec> {
    builtin_file().apps
}

/// The thirteen studied workloads, evaluated.
pub fn builtin_apps() -> Vec<AppCharacterization> {
    builtin_app_specs()
        .iter()
        .map(|s| s.evaluate().expect("shipped app evaluates"))
        .collect()
}

/// Extra parameterizations (SuperLU iteration counts, EXTENSION k-mer sizes).
pub fn builtin_variants() -> Vec<AppCharacterization> {
    builtin_file()
        .variants
        .iter()
        .map(|s| s.evaluate().expect("shipped variant evaluates"))
        .collect()
}

/// Case-insensitive lookup over the thirteen apps and their variants.
pub fn lookup_app(name: &str) -> Result<AppCharacterization> {
    let file = builtin_file();
    file.apps
        .iter()
        .chain(&file.variants)
        .find(|s| s.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownName {
            kind: "application",
            name: name.to_string(),
        })?
        .evaluate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{GB, TB};

    #[test]
    fn ai_ratios() {
        assert!((lr_ai(55.35, 221_000.0).unwrap() - 3993.0).abs() <= 1.0);
        assert!((lr_ai(55.5, 107_000.0).unwrap() - 1927.0).abs() <= 1.0);
        assert!((lr_ai(38.6, 15_400.0).unwrap() - 399.0).abs() <= 1.0);
        assert!(lr_ai(0.0, 1.0).is_err());
    }

    #[test]
    fn stream() {
        assert_eq!(lr_stream(), 2.0);
        assert_eq!(stream_footprint(1e9, 3, 8.0), 24e9);
    }

    #[test]
    fn align_cases() {
        let p = AlignParams {
            m: 200,
            n: 780,
            traceback_len: 200,
            pairs: 31e6,
            char_bytes: 1.0,
            stream_factor: 2.0,
        };
        let (lr, fp) = lr_align(&p, false).unwrap();
        assert!((lr - 477.0).abs() <= 1.0, "{lr}");
        assert!((fp / GB - 60.76).abs() < 0.01, "{fp}");
        let (lr_tb, _) = lr_align(&p, true).unwrap();
        assert!((lr_tb - 477.0).abs() <= 1.0);
        assert!(lr_tb > lr);
        let unit = AlignParams { m: 1, n: 1, traceback_len: 0, ..p.clone() };
        assert_eq!(lr_align(&unit, false).unwrap().0, 1.5);
        let bad = AlignParams { traceback_len: 1000, ..p };
        assert!(lr_align(&bad, true).is_err());
    }

    #[test]
    fn windowed() {
        assert_eq!(lr_windowed_similarity(500.0, 2.0).unwrap(), 1000.0);
        assert_eq!(lr_windowed_similarity(1.0, 1.0).unwrap(), 1.0);
    }

    fn superlu(iters: u32) -> SuperluEstimate {
        lr_superlu(&SuperluParams {
            n: 25e6,
            nnz: 640e9,
            iters,
            bytes_per_nonzero: 12.0,
        })
        .unwrap()
    }

    #[test]
    fn superlu_iterations() {
        assert!((superlu(50).lr_solve - 101.0).abs() <= 1.0);
        assert!((superlu(100).lr_solve - 201.0).abs() <= 1.0);
        assert!((superlu(1).lr_solve - 3.0).abs() <= 1e-3);
        assert!((superlu(1).lr_whole - 4.0).abs() <= 1.0);
        assert_eq!(superlu(1).lr_factor, 1.0);
        assert_eq!(superlu(1).footprint, 640e9 * 12.0);
    }

    #[test]
    fn superlu_rejects_bad_params() {
        let bad = SuperluParams { n: 10.0, nnz: 5.0, iters: 1, bytes_per_nonzero: 12.0 };
        assert!(lr_superlu(&bad).is_err());
        let zero = SuperluParams { n: 10.0, nnz: 50.0, iters: 0, bytes_per_nonzero: 12.0 };
        assert!(lr_superlu(&zero).is_err());
    }

    #[test]
    fn gemm_large_problem() {
        let e = lr_gemm(&GemmParams::new(400_000.0)).unwrap();
        assert!((e.footprint - 3.84 * TB).abs() < 1.0);
        assert!(e.lr > 80.0 && e.lr < 90.0, "{}", e.lr);
        assert_eq!(e.local_n, 146_059.0);
    }

    #[test]
    fn gemm_fits_in_hbm_rejected() {
        assert!(lr_gemm(&GemmParams::new(1000.0)).is_err());
    }

    #[test]
    fn gemm_resident_correction_goes_negative_near_hbm() {
        let mut p = GemmParams::for_footprint(1.0 * TB);
        p.resident_correction = true;
        assert!(matches!(lr_gemm(&p), Err(Error::Model(_))));
    }

    #[test]
    fn spmm_boundary_and_rhs() {
        let cache_words = 40e6 / 8.0;
        let at = SpmmParams {
            n: cache_words / 10.0,
            nnz_per_row: 10.0,
            rhs: 1.0,
            cache_bytes: 40e6,
            word_bytes: 8.0,
            bytes_per_nonzero: 12.0,
        };
        let e = lr_spmm(&at).unwrap();
        assert_eq!(e.local_words, cache_words);
        let below = SpmmParams { n: at.n / 2.0, ..at.clone() };
        assert_eq!(lr_spmm(&below).unwrap().lr, SpmmRatio::FitsInCache);

        let big = SpmmParams { n: 1e9, nnz_per_row: 100.0, ..at };
        let lr = |rhs| match lr_spmm(&SpmmParams { rhs, ..big.clone() }).unwrap().lr {
            SpmmRatio::Ratio(r) => r,
            SpmmRatio::FitsInCache => unreachable!(),
        };
        assert!(lr(2.0) < lr(1.0));
        assert!(lr(4.0) < lr(2.0));
    }

    #[test]
    fn counters() {
        let pastis = CounterSample::Gpu {
            read_sectors: 100e12 / 32.0,
            write_sectors: 58e12 / 32.0,
            remote_bytes: 363e9,
        };
        let lr = lr_from_counters(&pastis).unwrap();
        assert!((lr - 435.0).abs() < 1.0, "{lr}");
        let unit = CounterSample::Gpu { read_sectors: 1.0, write_sectors: 0.0, remote_bytes: 32.0 };
        assert_eq!(lr_from_counters(&unit).unwrap(), 1.0);
        let empty = CounterSample::Cpu { cas_read: [0.0; 8], cas_write: [0.0; 8], remote_bytes: 1.0 };
        assert_eq!(lr_from_counters(&empty), Err(Error::EmptySample));
        let mut rd = [0.0; 8];
        rd[7] = 2.0;
        let cpu = CounterSample::Cpu { cas_read: rd, cas_write: [1.0; 8], remote_bytes: 640.0 };
        assert_eq!(lr_from_counters(&cpu).unwrap(), 64.0 * 10.0 / 640.0);
    }

    #[test]
    fn counter_csv() {
        let gpu = "counter,value\ndram__sectors_read.sum, 3\ndram__sectors_write.sum,1\nremote_bytes,64\n";
        assert_eq!(lr_from_counters(&CounterSample::from_csv(gpu).unwrap()).unwrap(), 2.0);
        let cpu = "UNC_M_CAS_COUNT.RD[UNIT0],1\nUNC_M_CAS_COUNT.WR[UNIT7],1\nremote_bytes,1 KB\n";
        let s = CounterSample::from_csv(cpu).unwrap();
        assert_eq!(s.local_bytes(), 128.0);
        assert_eq!(s.remote_bytes(), 1000.0);
        let mixed = "dram__sectors_read.sum,1\nUNC_M_CAS_COUNT.RD[UNIT0],1\nremote_bytes,1\n";
        assert!(CounterSample::from_csv(mixed).is_err());
        assert!(CounterSample::from_csv("foo,1\nremote_bytes,1\n").is_err());
        assert!(CounterSample::from_csv("dram__sectors_read.sum,1\n").is_err());
        assert_eq!(CounterSample::from_csv("remote_bytes,1\n"), Err(Error::EmptySample));
    }

    #[test]
    fn builtin_lookup() {
        assert_eq!(builtin_apps().len(), 13);
        assert_eq!(lookup_app("EXTENSION k=77").unwrap().lr, 3402.0);
        assert_eq!(lookup_app("deepcam").unwrap().footprint, 8.8 * TB);
        assert_eq!(lookup_app("ADEPT").unwrap().footprint, 63.0 * GB);
        assert_eq!(lookup_app("TOAST").unwrap().lr, 278.0);
        assert_eq!(lookup_app("TOAST").unwrap().lr_source, Source::Literature);
        assert_eq!(lookup_app("Eigensolver").unwrap().lr, 3.2);
        assert!((lookup_app("SuperLU iters=1").unwrap().lr - 4.0).abs() <= 1.0);
        assert!(lookup_app("nope").is_err());
    }

    #[test]
    fn footprint_required_without_model_footprint() {
        let spec = AppSpec {
            name: "x".into(),
            model: ModelSpec::Literature { lr: 10.0 },
            footprint: None,
            footprint_source: None,
            note: None,
        };
        assert!(spec.evaluate().is_err());
    }

    #[test]
    fn counters_model_in_apps_file() {
        let text = r#"{"apps": [{"name": "x", "footprint": "1 TB",
            "model": {"kind": "counters", "device": "gpu", "read_sectors": 1000, "write_sectors": 0, "remote_bytes": 320}}]}"#;
        let app = parse_app_specs(text).unwrap()[0].evaluate().unwrap();
        assert_eq!(app.lr, 100.0);
        assert_eq!(app.lr_source, Source::Counters);
    }
}
