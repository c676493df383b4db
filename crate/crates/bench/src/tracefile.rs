//! CSV trace files.
//!
//! Rows carry one [`IterationRecord`] each; reals are written with 17
//! significant digits so that parsing reproduces them bit for bit. Footer
//! lines start with `#`:
//!
//! ```text
//! # summary: cache_hit_rate=…,positive=…,negative=…
//! # run: name=…,algorithm=…,truncated=…,phi0=…,…
//! # time: solver_s=…,oracle_s=…
//! ```

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lazycg_core::trace::OnlineRecord;
use lazycg_core::{AnswerKind, IterationRecord, RunTrace};

pub const HEADER: [&str; 8] = [
    "t",
    "f",
    "phi",
    "wolfe_gap",
    "lp_calls",
    "cache_hits",
    "answer",
    "elapsed_s",
];

pub const ONLINE_HEADER: [&str; 6] = ["t", "loss", "regret", "h", "phi_pre", "aggregate_gap"];

/// 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub name: String,
    pub algorithm: String,
    pub truncated: bool,
    pub phi0: f64,
    pub truncated_steps: usize,
    pub total_queries: u64,
    pub aug_calls: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub records: Vec<IterationRecord>,
    pub cache_hit_rate: f64,
    pub positive: u64,
    pub negative: u64,
    pub run: RunInfo,
    pub solver_time_s: f64,
    pub oracle_time_s: f64,
}

impl TraceFile {
    pub fn from_trace(name: &str, trace: &RunTrace) -> Self {
        Self {
            records: trace.records.clone(),
            cache_hit_rate: trace.cache_hit_rate(),
            positive: trace.stats.positive_answers,
            negative: trace.stats.negative_answers,
            run: RunInfo {
                name: name.into(),
                algorithm: trace.algorithm.clone(),
                truncated: trace.truncated,
                phi0: trace.phi0,
                truncated_steps: trace.truncated_steps,
                total_queries: trace.stats.total_queries,
                aug_calls: trace.stats.aug_calls,
            },
            solver_time_s: trace.solver_time_s,
            oracle_time_s: trace.oracle_time_s,
        }
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for r in &self.records {
            w.write_record([
                r.t.to_string(),
                real(r.f),
                real(r.phi),
                real(r.wolfe_gap),
                r.lp_calls.to_string(),
                r.cache_hits.to_string(),
                r.answer.as_str().to_string(),
                real(r.elapsed_s),
            ])?;
        }
        let mut out = w.into_inner().map_err(|e| anyhow!("{}", e.error()))?;
        writeln!(
            out,
            "# summary: cache_hit_rate={},positive={},negative={}",
            real(self.cache_hit_rate),
            self.positive,
            self.negative
        )?;
        let run = &self.run;
        writeln!(
            out,
            "# run: name={},algorithm={},truncated={},phi0={},truncated_steps={},total_queries={},aug_calls={}",
            run.name,
            run.algorithm,
            run.truncated,
            real(run.phi0),
            run.truncated_steps,
            run.total_queries,
            run.aug_calls
        )?;
        writeln!(
            out,
            "# time: solver_s={},oracle_s={}",
            real(self.solver_time_s),
            real(self.oracle_time_s)
        )?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let records = parse_rows(text, &HEADER, |row| {
            Ok(IterationRecord {
                t: row.field(0)?,
                f: row.field(1)?,
                phi: row.field(2)?,
                wolfe_gap: row.field(3)?,
                lp_calls: row.field(4)?,
                cache_hits: row.field(5)?,
                answer: AnswerKind::parse(row.raw(6)?)
                    .ok_or_else(|| anyhow!("line {}: unknown answer {:?}", row.line, row.raw(6).unwrap_or("")))?,
                elapsed_s: row.field(7)?,
            })
        })?;
        let footer = Footer::parse(text)?;
        Ok(Self {
            records,
            cache_hit_rate: footer.get("summary", "cache_hit_rate")?,
            positive: footer.get("summary", "positive")?,
            negative: footer.get("summary", "negative")?,
            run: RunInfo {
                name: footer.text("run", "name")?.to_string(),
                algorithm: footer.text("run", "algorithm")?.to_string(),
                truncated: footer.get("run", "truncated")?,
                phi0: footer.get("run", "phi0")?,
                truncated_steps: footer.get("run", "truncated_steps")?,
                total_queries: footer.get("run", "total_queries")?,
                aug_calls: footer.get("run", "aug_calls")?,
            },
            solver_time_s: footer.get("time", "solver_s")?,
            oracle_time_s: footer.get("time", "oracle_s")?,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Companion file of online runs.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineFile {
    pub records: Vec<OnlineRecord>,
}

impl OnlineFile {
    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(ONLINE_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.t.to_string(),
                real(r.loss),
                real(r.regret),
                real(r.h),
                real(r.phi_pre),
                real(r.aggregate_gap),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let records = parse_rows(text, &ONLINE_HEADER, |row| {
            Ok(OnlineRecord {
                t: row.field(0)?,
                loss: row.field(1)?,
                regret: row.field(2)?,
                h: row.field(3)?,
                phi_pre: row.field(4)?,
                aggregate_gap: row.field(5)?,
            })
        })?;
        Ok(Self { records })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Path of the online companion of `trace`: `run.csv` → `run.online.csv`.
pub fn online_path(trace: &Path) -> std::path::PathBuf {
    trace.with_extension("online.csv")
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    line: u64,
}

impl Row<'_> {
    fn raw(&self, i: usize) -> Result<&str> {
        self.record
            .get(i)
            .ok_or_else(|| anyhow!("line {}: missing column {}", self.line, i + 1))
    }

    fn field<T: std::str::FromStr>(&self, i: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(i)?;
        raw.parse()
            .map_err(|e| anyhow!("line {}: column {}: {e}: {raw:?}", self.line, i + 1))
    }
}

fn parse_rows<T>(
    text: &str,
    header: &[&str],
    mut convert: impl FnMut(&Row) -> Result<T>,
) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let found = reader.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        bail!("unexpected header {:?}", found.iter().collect::<Vec<_>>());
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            bail!("line {line}: expected {} columns, found {}", header.len(), record.len());
        }
        out.push(convert(&Row {
            record: &record,
            line,
        })?);
    }
    Ok(out)
}

/// `# section: key=value,...` lines.
struct Footer(HashMap<String, HashMap<String, String>>);

impl Footer {
    fn parse(text: &str) -> Result<Self> {
        let mut sections = HashMap::new();
        for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
            let Some((section, rest)) = line.split_once(':') else {
                continue;
            };
            let mut fields = HashMap::new();
            for pair in rest.trim().split(',') {
                if let Some((k, v)) = pair.split_once('=') {
                    fields.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
            sections.insert(section.trim().to_string(), fields);
        }
        Ok(Self(sections))
    }

    fn text(&self, section: &str, key: &str) -> Result<&str> {
        self.0
            .get(section)
            .and_then(|s| s.get(key))
            .map(String::as_str)
            .ok_or_else(|| anyhow!("footer lacks {section}.{key}"))
    }

    fn get<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.text(section, key)?;
        raw.parse()
            .map_err(|e| anyhow!("footer {section}.{key}: {e}: {raw:?}"))
    }
}
