//! Block-header exports and detection of jumping-mining signatures.
//!
//! Input is CSV with a header row `height,time,difficulty` or
//! `height,time,bits` (bits as `0x`-prefixed hex), or JSON lines with the
//! same keys. `time` is in unix seconds.
//!
//! The detector flags a block when both hold:
//!
//! * its difficulty is below `low_frac` times the median difficulty of the
//!   trailing `window` blocks (itself included), and
//! * the mean solve time of the `local_span` blocks centred on it is below
//!   `burst_frac` times the median solve time of the whole file.
//!
//! Consecutive flagged blocks form one [`AttackRegion`]. Both signals are
//! ratios, so scaling all difficulties or all solve times leaves the result
//! unchanged.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::engine::ChainState;
use crate::target::{difficulty_from_target, Difficulty, Target};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderFormat {
    Csv,
    JsonLines,
}

impl std::str::FromStr for HeaderFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(HeaderFormat::Csv),
            "json_lines" | "jsonl" => Ok(HeaderFormat::JsonLines),
            _ => Err(Error::config("format", format!("unknown header format `{s}`"))),
        }
    }
}

/// Work recorded in a header: a plain difficulty or compact target bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Work {
    Difficulty(f64),
    Bits(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeaderRow {
    pub height: u64,
    pub timestamp: i64,
    pub work: Work,
}

impl HeaderRow {
    /// Difficulty of the row. Compact bits are converted in `LZ` units.
    pub fn difficulty(&self) -> Result<f64> {
        match self.work {
            Work::Difficulty(d) => Ok(d),
            Work::Bits(bits) => Ok(difficulty_from_target(&Target::from_compact(bits)?)),
        }
    }
}

/// Parses a header export and sorts it by height.
pub fn parse_headers(input: impl Read, format: HeaderFormat) -> Result<Vec<HeaderRow>> {
    let mut rows = match format {
        HeaderFormat::Csv => parse_csv(input)?,
        HeaderFormat::JsonLines => parse_json_lines(input)?,
    };
    rows.sort_by_key(|(row, _)| row.height);
    for pair in rows.windows(2) {
        if pair[0].0.height == pair[1].0.height {
            let line = pair[0].1.max(pair[1].1);
            return Err(Error::parse(line, format!("duplicate height {}", pair[1].0.height)));
        }
    }
    Ok(rows.into_iter().map(|(row, _)| row).collect())
}

fn parse_csv(input: impl Read) -> Result<Vec<(HeaderRow, usize)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(Error::parse(1, e.to_string())),
    };
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let column = |name: &str| headers.iter().position(|h| h == name);
    let height_col = column("height").ok_or_else(|| Error::parse(1, "missing column `height`"))?;
    let time_col = column("time").ok_or_else(|| Error::parse(1, "missing column `time`"))?;
    let work_col = match (column("difficulty"), column("bits")) {
        (Some(c), None) => (c, false),
        (None, Some(c)) => (c, true),
        (Some(_), Some(_)) => {
            return Err(Error::parse(
                1,
                "exactly one of `difficulty` and `bits` must be present",
            ))
        }
        (None, None) => return Err(Error::parse(1, "missing column `difficulty` or `bits`")),
    };

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize, name: &str| {
            record
                .get(i)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::parse(line, format!("missing `{name}`")))
        };
        let height = parse_height(field(height_col, "height")?, line)?;
        let timestamp = parse_time(field(time_col, "time")?, line)?;
        let work = if work_col.1 {
            Work::Bits(parse_bits(field(work_col.0, "bits")?, line)?)
        } else {
            Work::Difficulty(parse_difficulty(field(work_col.0, "difficulty")?, line)?)
        };
        rows.push((
            HeaderRow {
                height,
                timestamp,
                work,
            },
            line,
        ));
    }
    Ok(rows)
}

fn parse_json_lines(input: impl Read) -> Result<Vec<(HeaderRow, usize)>> {
    let mut rows = Vec::new();
    for (idx, line) in std::io::BufReader::new(input).lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if text.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::parse(line_no, format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::parse(line_no, "expected a JSON object"))?;
        let get = |key: &str| obj.get(key).filter(|v| !v.is_null());
        let as_text = |v: &serde_json::Value| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let height = parse_height(
            &as_text(get("height").ok_or_else(|| Error::parse(line_no, "missing `height`"))?),
            line_no,
        )?;
        let timestamp = parse_time(
            &as_text(get("time").ok_or_else(|| Error::parse(line_no, "missing `time`"))?),
            line_no,
        )?;
        let work = match (get("difficulty"), get("bits")) {
            (Some(d), None) => Work::Difficulty(parse_difficulty(&as_text(d), line_no)?),
            (None, Some(serde_json::Value::Number(n))) => Work::Bits(
                n.as_u64()
                    .and_then(|b| u32::try_from(b).ok())
                    .ok_or_else(|| Error::parse(line_no, format!("invalid bits {n}")))?,
            ),
            (None, Some(b)) => Work::Bits(parse_bits(&as_text(b), line_no)?),
            (Some(_), Some(_)) => {
                return Err(Error::parse(
                    line_no,
                    "exactly one of `difficulty` and `bits` must be present",
                ))
            }
            (None, None) => return Err(Error::parse(line_no, "missing `difficulty` or `bits`")),
        };
        rows.push((
            HeaderRow {
                height,
                timestamp,
                work,
            },
            line_no,
        ));
    }
    Ok(rows)
}

fn parse_height(s: &str, line: usize) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid height `{s}`")))
}

fn parse_time(s: &str, line: usize) -> Result<i64> {
    s.parse().map_err(|_| Error::parse(line, format!("invalid time `{s}`")))
}

fn parse_difficulty(s: &str, line: usize) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(d) if d.is_finite() && d > 0.0 => Ok(d),
        _ => Err(Error::parse(line, format!("invalid difficulty `{s}`"))),
    }
}

fn parse_bits(s: &str, line: usize) -> Result<u32> {
    let hex = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .ok_or_else(|| Error::parse(line, format!("bits `{s}` must be 0x-prefixed hex")))?;
    let bits = u32::from_str_radix(hex, 16).map_err(|_| Error::parse(line, format!("invalid bits `{s}`")))?;
    Target::from_compact(bits).map_err(|e| Error::parse(line, e.to_string()))?;
    Ok(bits)
}

/// Writes rows in `format`. All rows must carry the same kind of work.
pub fn write_headers(rows: &[HeaderRow], format: HeaderFormat, mut out: impl Write) -> Result<()> {
    let uses_bits = matches!(rows.first().map(|r| r.work), Some(Work::Bits(_)));
    if rows.iter().any(|r| matches!(r.work, Work::Bits(_)) != uses_bits) {
        return Err(Error::domain("cannot mix difficulty and bits rows in one export"));
    }
    let io = |e: std::io::Error| Error::Internal(format!("write failed: {e}"));
    let work_text = |w: Work| match w {
        Work::Difficulty(d) => format!("{d:?}"),
        Work::Bits(b) => format!("{b:#010x}"),
    };
    match format {
        HeaderFormat::Csv => {
            writeln!(out, "height,time,{}", if uses_bits { "bits" } else { "difficulty" }).map_err(io)?;
            for r in rows {
                writeln!(out, "{},{},{}", r.height, r.timestamp, work_text(r.work)).map_err(io)?;
            }
        }
        HeaderFormat::JsonLines => {
            for r in rows {
                let work = match r.work {
                    Work::Difficulty(d) => format!("\"difficulty\":{d:?}"),
                    Work::Bits(_) => format!("\"bits\":\"{}\"", work_text(r.work)),
                };
                writeln!(out, "{{\"height\":{},\"time\":{},{work}}}", r.height, r.timestamp).map_err(io)?;
            }
        }
    }
    Ok(())
}

/// Synthetic header export of a simulated chain: a genesis row at height 0
/// and time 0, then one row per block with the cumulative solve time rounded
/// to whole seconds.
pub fn headers_from_chain(chain: &ChainState, genesis_difficulty: Difficulty) -> Vec<HeaderRow> {
    let mut rows = Vec::with_capacity(chain.len() + 1);
    rows.push(HeaderRow {
        height: 0,
        timestamp: 0,
        work: Work::Difficulty(genesis_difficulty.get()),
    });
    let mut elapsed = 0.0;
    for r in &chain.records {
        elapsed += r.solve_time.seconds();
        rows.push(HeaderRow {
            height: r.height,
            timestamp: elapsed.round() as i64,
            work: Work::Difficulty(r.difficulty.get()),
        });
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveTimePoint {
    pub height: u64,
    pub solve_time_s: f64,
    /// The timestamp went backwards.
    pub negative: bool,
}

/// Time between each row and the one before it.
pub fn solve_times(rows: &[HeaderRow]) -> Result<Vec<SolveTimePoint>> {
    if rows.len() < 2 {
        return Err(Error::InsufficientHistory(format!(
            "solve times need at least 2 headers, got {}",
            rows.len()
        )));
    }
    Ok(rows
        .windows(2)
        .map(|pair| {
            let dt = pair[1].timestamp - pair[0].timestamp;
            SolveTimePoint {
                height: pair[1].height,
                solve_time_s: dt as f64,
                negative: dt < 0,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Trailing blocks in the rolling difficulty median.
    pub window: usize,
    pub low_frac: f64,
    pub burst_frac: f64,
    /// Blocks in the centred solve-time mean; odd.
    pub local_span: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            window: 144,
            low_frac: 0.95,
            burst_frac: 0.5,
            local_span: 5,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 {
            return Err(Error::config("window", "must be at least 3"));
        }
        if !(self.low_frac > 0.0 && self.low_frac < 1.0) {
            return Err(Error::config("low_frac", "must lie in (0, 1)"));
        }
        if !(self.burst_frac > 0.0 && self.burst_frac < 1.0) {
            return Err(Error::config("burst_frac", "must lie in (0, 1)"));
        }
        if self.local_span == 0 || self.local_span.is_multiple_of(2) {
            return Err(Error::config("local_span", "must be odd"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRegion {
    pub start_height: u64,
    pub end_height: u64,
    pub mean_solve_time_s: f64,
    pub mean_relative_difficulty: f64,
}

/// Flags blocks that look like a jump-in and merges runs into regions.
/// The first row only supplies the time origin.
pub fn detect_attack_regions(rows: &[HeaderRow], params: &DetectorParams) -> Result<Vec<AttackRegion>> {
    params.validate()?;
    let times = solve_times(rows)?;
    let difficulties = rows[1..]
        .iter()
        .map(HeaderRow::difficulty)
        .collect::<Result<Vec<f64>>>()?;
    let st: Vec<f64> = times.iter().map(|p| p.solve_time_s).collect();
    let n = st.len();

    let mut valid: Vec<f64> = times.iter().filter(|p| !p.negative).map(|p| p.solve_time_s).collect();
    let Some(global_median) = median(&mut valid) else {
        return Ok(Vec::new());
    };

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for s in &st {
        prefix.push(prefix.last().unwrap() + s);
    }
    let half = params.local_span / 2;

    let mut scratch = Vec::with_capacity(params.window);
    let mut relative = Vec::with_capacity(n);
    let mut flagged = Vec::with_capacity(n);
    for i in 0..n {
        scratch.clear();
        scratch.extend_from_slice(&difficulties[(i + 1).saturating_sub(params.window)..=i]);
        let rolling = median(&mut scratch).expect("window holds the current block");
        let rel = difficulties[i] / rolling;
        let (lo, hi) = (i.saturating_sub(half), (i + half + 1).min(n));
        let local_mean = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
        relative.push(rel);
        flagged.push(rel < params.low_frac && local_mean < params.burst_frac * global_median);
    }

    let mut regions = Vec::new();
    let mut i = 0;
    while i < n {
        if !flagged[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && flagged[i + 1] {
            i += 1;
        }
        let len = (i - start + 1) as f64;
        regions.push(AttackRegion {
            start_height: times[start].height,
            end_height: times[i].height,
            mean_solve_time_s: st[start..=i].iter().sum::<f64>() / len,
            mean_relative_difficulty: relative[start..=i].iter().sum::<f64>() / len,
        });
        i += 1;
    }
    Ok(regions)
}

/// Median with the two middle values averaged for even lengths.
fn median(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let (_, &mut upper, _) = values.select_nth_unstable_by(n / 2, f64::total_cmp);
    if n % 2 == 1 {
        return Some(upper);
    }
    let lower = values[..n / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some((lower + upper) / 2.0)
}

pub fn write_regions_csv(regions: &[AttackRegion], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Internal(format!("write failed: {e}"));
    w.write_record([
        "start_height",
        "end_height",
        "mean_solve_time",
        "mean_relative_difficulty",
    ])
    .map_err(err)?;
    for r in regions {
        w.write_record([
            r.start_height.to_string(),
            r.end_height.to_string(),
            r.mean_solve_time_s.to_string(),
            r.mean_relative_difficulty.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Internal(format!("write failed: {e}")))
}

/// Episode-level agreement between detected regions and true episodes,
/// both given as inclusive height ranges.
///
/// Precision is the share of detected regions that overlap a true episode;
/// recall is the share of true episodes overlapped by a detected region.
/// An empty side scores 1.
pub fn overlap_precision_recall(detected: &[(u64, u64)], truth: &[(u64, u64)]) -> (f64, f64) {
    let hits = |a: &[(u64, u64)], b: &[(u64, u64)]| {
        if a.is_empty() {
            return 1.0;
        }
        let mut sorted = b.to_vec();
        sorted.sort_unstable();
        let matched = a
            .iter()
            .filter(|&&(s, e)| {
                let upto = sorted.partition_point(|&(bs, _)| bs <= e);
                sorted[..upto].iter().any(|&(_, be)| be >= s)
            })
            .count();
        matched as f64 / a.len() as f64
    };
    (hits(detected, truth), hits(truth, detected))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(diffs: &[f64], times: &[i64]) -> Vec<HeaderRow> {
        diffs
            .iter()
            .zip(times)
            .enumerate()
            .map(|(i, (&d, &t))| HeaderRow {
                height: i as u64,
                timestamp: t,
                work: Work::Difficulty(d),
            })
            .collect()
    }

    #[test]
    fn parse_csv_difficulty_and_sort() {
        let text = "height,time,difficulty\n2,1900,4.5\n1,1600,4\n0,1000,3.25\n";
        let r = parse_headers(text.as_bytes(), HeaderFormat::Csv).unwrap();
        assert_eq!(r.iter().map(|r| r.height).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(r[0].work, Work::Difficulty(3.25));
        let st = solve_times(&r).unwrap();
        assert_eq!(
            st.iter().map(|p| p.solve_time_s).collect::<Vec<_>>(),
            vec![600.0, 300.0]
        );
    }

    #[test]
    fn parse_bits_decodes_compact() {
        let text = "height,time,bits\n0,0,0x1d00ffff\n";
        let r = parse_headers(text.as_bytes(), HeaderFormat::Csv).unwrap();
        assert_eq!(r[0].work, Work::Bits(0x1d00_ffff));
        let target = Target::from_compact(0x1d00_ffff).unwrap();
        assert_eq!(
            target.value(),
            &(num_bigint::BigUint::from(0xffffu32) << (8 * (0x1d - 3)))
        );
    }

    #[test]
    fn empty_input_is_empty() {
        assert!(parse_headers("".as_bytes(), HeaderFormat::Csv).unwrap().is_empty());
        assert!(parse_headers("".as_bytes(), HeaderFormat::JsonLines)
            .unwrap()
            .is_empty());
        assert!(parse_headers("height,time,difficulty\n".as_bytes(), HeaderFormat::Csv)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn errors_name_the_line() {
        let dup = "height,time,difficulty\n1,10,4\n2,20,4\n1,30,4\n";
        assert!(matches!(
            parse_headers(dup.as_bytes(), HeaderFormat::Csv),
            Err(Error::Parse { line: 4, .. })
        ));
        let bad = "height,time,difficulty\n1,10,4\n2,xx,4\n";
        assert!(matches!(
            parse_headers(bad.as_bytes(), HeaderFormat::Csv),
            Err(Error::Parse { line: 3, .. })
        ));
        let missing = "height,difficulty\n1,4\n";
        assert!(matches!(
            parse_headers(missing.as_bytes(), HeaderFormat::Csv),
            Err(Error::Parse { line: 1, .. })
        ));
        let json = "{\"height\":1,\"time\":5,\"difficulty\":4}\n{\"height\":2}\n";
        assert!(matches!(
            parse_headers(json.as_bytes(), HeaderFormat::JsonLines),
            Err(Error::Parse { line: 2, .. })
        ));
        let neg = "height,time,difficulty\n1,10,-4\n";
        assert!(parse_headers(neg.as_bytes(), HeaderFormat::Csv).is_err());
    }

    #[test]
    fn json_lines_accepts_numeric_and_hex_bits() {
        let json =
            "{\"height\":1,\"time\":5,\"bits\":\"0x1d00ffff\"}\n\n{\"height\":2,\"time\":9,\"bits\":486604799}\n";
        let r = parse_headers(json.as_bytes(), HeaderFormat::JsonLines).unwrap();
        assert_eq!(r[0].work, Work::Bits(0x1d00_ffff));
        assert_eq!(r[1].work, Work::Bits(0x1d00_ffff));
    }

    #[test]
    fn negative_solve_times_are_kept() {
        let st = solve_times(&rows(&[1.0, 1.0], &[1000, 900])).unwrap();
        assert_eq!(st[0].solve_time_s, -100.0);
        assert!(st[0].negative);
        assert!(solve_times(&rows(&[1.0], &[0])).is_err());
    }

    #[test]
    fn constant_chain_has_no_regions() {
        let n = 400;
        let r = rows(&vec![4.0; n], &(0..n as i64).map(|i| i * 600).collect::<Vec<_>>());
        assert!(detect_attack_regions(&r, &DetectorParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn declining_difficulty_with_uniform_times_has_no_regions() {
        let n = 400;
        let diffs: Vec<f64> = (0..n).map(|i| 100.0 * 0.99f64.powi(i)).collect();
        let r = rows(&diffs, &(0..n as i64).map(|i| i * 600).collect::<Vec<_>>());
        assert!(detect_attack_regions(&r, &DetectorParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn burst_at_low_difficulty_is_one_region() {
        let n = 300;
        let mut diffs = vec![4.0; n];
        let mut gaps = vec![600i64; n];
        for i in 200..210 {
            diffs[i] = 3.0;
            gaps[i] = 60;
        }
        let mut t = 0;
        let times: Vec<i64> = gaps
            .iter()
            .map(|g| {
                t += g;
                t
            })
            .collect();
        let regions = detect_attack_regions(&rows(&diffs, &times), &DetectorParams::default()).unwrap();
        assert_eq!(regions.len(), 1);
        let r = &regions[0];
        assert!(r.start_height >= 200 && r.end_height <= 209, "{r:?}");
        assert!((r.mean_relative_difficulty - 0.75).abs() < 1e-12);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn precision_recall_by_overlap() {
        let detected = [(5, 7), (20, 21), (40, 40)];
        let truth = [(1, 5), (19, 30), (50, 60), (70, 71)];
        let (p, r) = overlap_precision_recall(&detected, &truth);
        assert_eq!(p, 2.0 / 3.0);
        assert_eq!(r, 2.0 / 4.0);
        assert_eq!(overlap_precision_recall(&[], &[]), (1.0, 1.0));
    }

    #[test]
    fn detector_params_validation() {
        assert!(DetectorParams::default().validate().is_ok());
        let bad = |f: fn(&mut DetectorParams)| {
            let mut p = DetectorParams::default();
            f(&mut p);
            p.validate().is_err()
        };
        assert!(bad(|p| p.window = 2));
        assert!(bad(|p| p.low_frac = 1.0));
        assert!(bad(|p| p.burst_frac = 0.0));
        assert!(bad(|p| p.local_span = 4));
    }
}
