//! Spatial-change event symbolization.
//!
//! Each dimension of a normalized sample becomes a run of motion symbols
//! (down, flat, up) by thresholding consecutive differences against `delta`.
//! The D symbols of one step are packed into a single event code in base 3,
//! dimension 0 least significant, with `down = 0`, `flat = 1`, `up = 2`.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::MtsSample;
use crate::error::{Result, StemError};

/// Largest dimension count whose alphabet fits in a `u32` code.
pub const MAX_DIMS: usize = 20;

pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolizerConfig {
    delta: f64,
}

impl SymbolizerConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(StemError::Config(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for SymbolizerConfig {
    fn default() -> Self {
        Self { delta: DEFAULT_DELTA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MotionSymbol {
    Down = -1,
    Flat = 0,
    Up = 1,
}

impl MotionSymbol {
    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn from_value(v: i8) -> Option<Self> {
        match v {
            -1 => Some(Self::Down),
            0 => Some(Self::Flat),
            1 => Some(Self::Up),
            _ => None,
        }
    }

    pub fn negate(self) -> Self {
        match self {
            Self::Down => Self::Up,
            Self::Flat => Self::Flat,
            Self::Up => Self::Down,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Down => "down",
            Self::Flat => "flat",
            Self::Up => "up",
        }
    }

    fn digit(self) -> u32 {
        (self.value() + 1) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventCode(pub u32);

impl fmt::Display for EventCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Number of distinct events over `dims` dimensions, `3^dims`.
pub fn alphabet_size(dims: usize) -> u64 {
    3u64.pow(dims as u32)
}

/// The code with every dimension flat.
pub fn flat_code(dims: usize) -> EventCode {
    EventCode(((alphabet_size(dims) - 1) / 2) as u32)
}

fn check_dims(dims: usize) -> Result<()> {
    if dims == 0 || dims > MAX_DIMS {
        return Err(StemError::Config(format!(
            "dimension count must be in 1..={MAX_DIMS}, got {dims}"
        )));
    }
    Ok(())
}

/// Motion symbols of one dimension; `delta` is the flat dead zone (inclusive).
pub fn symbolize_dimension(x: &[f64], delta: f64) -> Result<Vec<MotionSymbol>> {
    if x.len() < 2 {
        return Err(StemError::TooShort(x.len()));
    }
    Ok(x.windows(2).map(|w| step_symbol(w[1] - w[0], delta)).collect())
}

#[inline]
fn step_symbol(diff: f64, delta: f64) -> MotionSymbol {
    if diff > delta {
        MotionSymbol::Up
    } else if diff < -delta {
        MotionSymbol::Down
    } else {
        MotionSymbol::Flat
    }
}

pub fn encode_event(symbols: &[MotionSymbol]) -> EventCode {
    debug_assert!(symbols.len() <= MAX_DIMS);
    let code = symbols.iter().rev().fold(0u32, |acc, s| acc * 3 + s.digit());
    EventCode(code)
}

pub fn decode_event(code: EventCode, dims: usize) -> Result<Vec<MotionSymbol>> {
    check_dims(dims)?;
    if u64::from(code.0) >= alphabet_size(dims) {
        return Err(StemError::InvalidCode {
            code: code.0.into(),
            dims,
        });
    }
    let mut rest = code.0;
    Ok((0..dims)
        .map(|_| {
            let digit = (rest % 3) as i8;
            rest /= 3;
            MotionSymbol::from_value(digit - 1).expect("base-3 digit")
        })
        .collect())
}

/// Maps `code` through per-dimension negation (up <-> down).
pub fn negate_event(code: EventCode, dims: usize) -> Result<EventCode> {
    let symbols: Vec<_> = decode_event(code, dims)?
        .into_iter()
        .map(MotionSymbol::negate)
        .collect();
    Ok(encode_event(&symbols))
}

/// Human-readable description such as `dim_0: up, dim_1: flat`.
pub fn explain_event(code: EventCode, dims: usize, names: Option<&[String]>) -> Result<String> {
    let symbols = decode_event(code, dims)?;
    if let Some(names) = names {
        if names.len() != dims {
            return Err(StemError::Config(format!(
                "{} dimension names given for {dims} dimensions",
                names.len()
            )));
        }
    }
    let parts: Vec<String> = symbols
        .iter()
        .enumerate()
        .map(|(d, s)| match names {
            Some(names) => format!("{}: {}", names[d], s.name()),
            None => format!("dim_{d}: {}", s.name()),
        })
        .collect();
    Ok(parts.join(", "))
}

/// One sample's event stream, `len - 1` codes for a sample of `len` points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSequence {
    sample_id: String,
    label: Option<String>,
    dims: usize,
    codes: Vec<EventCode>,
}

impl EventSequence {
    pub fn new(
        sample_id: impl Into<String>,
        label: Option<String>,
        dims: usize,
        codes: Vec<EventCode>,
    ) -> Result<Self> {
        check_dims(dims)?;
        let limit = alphabet_size(dims);
        if let Some(bad) = codes.iter().find(|c| u64::from(c.0) >= limit) {
            return Err(StemError::InvalidCode {
                code: bad.0.into(),
                dims,
            });
        }
        Ok(Self {
            sample_id: sample_id.into(),
            label,
            dims,
            codes,
        })
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn codes(&self) -> &[EventCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// Symbolizes an already-normalized sample.
pub fn symbolize_sample(s: &MtsSample, cfg: &SymbolizerConfig) -> Result<EventSequence> {
    let dims = s.dims();
    check_dims(dims)?;
    if s.len() < 2 {
        return Err(StemError::TooShort(s.len()));
    }
    let delta = cfg.delta();
    let steps = s.len() - 1;
    let mut codes = vec![0u32; steps];
    // most significant dimension first so each pass is acc * 3 + digit
    for d in (0..dims).rev() {
        let x = s.dim(d);
        for (t, code) in codes.iter_mut().enumerate() {
            *code = *code * 3 + step_symbol(x[t + 1] - x[t], delta).digit();
        }
    }
    Ok(EventSequence {
        sample_id: s.id().to_string(),
        label: s.label().map(str::to_string),
        dims,
        codes: codes.into_iter().map(EventCode).collect(),
    })
}

/// Metadata line that heads an event file.
const META_PREFIX: &str = "#stem-events";

/// Writes event sequences as `sample_id,label,t,event_code` rows, preceded by
/// a `#stem-events dims=<D> delta=<δ>` comment line.
pub fn write_events<W: Write>(seqs: &[EventSequence], dims: usize, delta: f64, mut writer: W) -> Result<()> {
    writeln!(writer, "{META_PREFIX} dims={dims} delta={delta:?}").map_err(|e| StemError::io("<events output>", e))?;
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(["sample_id", "label", "t", "event_code"])?;
    for seq in seqs {
        if seq.dims() != dims {
            return Err(StemError::Schema(format!(
                "sample `{}` has {} dimensions, file declares {dims}",
                seq.sample_id(),
                seq.dims()
            )));
        }
        for (t, code) in seq.codes().iter().enumerate() {
            wtr.write_record([
                seq.sample_id(),
                seq.label().unwrap_or(""),
                &t.to_string(),
                &code.to_string(),
            ])?;
        }
    }
    wtr.flush().map_err(|e| StemError::io("<events output>", e))?;
    Ok(())
}

/// Contents of an event file.
#[derive(Debug, Clone, PartialEq)]
pub struct EventFile {
    pub dims: usize,
    pub delta: f64,
    pub sequences: Vec<EventSequence>,
}

pub fn load_events(path: impl AsRef<Path>) -> Result<EventFile> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| StemError::io(path, e))?;
    read_events(file)
}

pub fn read_events<R: Read>(reader: R) -> Result<EventFile> {
    let mut reader = BufReader::new(reader);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| StemError::io("<events input>", e))?;
    let (dims, delta) = parse_meta(first.trim_end())?;

    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["sample_id", "label", "t", "event_code"] {
        return Err(StemError::Schema(format!(
            "event header must be `sample_id,label,t,event_code`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut order: Vec<String> = Vec::new();
    // sample id -> (label, (t, code) rows)
    type Pending = std::collections::HashMap<String, (Option<String>, Vec<(usize, u32)>)>;
    let mut pending = Pending::default();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        // metadata line 1, header line 2
        let row = record.position().map_or(i as u64 + 3, |p| p.line() + 1);
        if record.len() != 4 {
            return Err(StemError::Schema(format!("row {row}: expected 4 columns")));
        }
        let label = match &record[1] {
            "" => None,
            l => Some(l.to_string()),
        };
        let t: usize = record[2].parse().map_err(|_| StemError::Parse {
            row,
            message: format!("bad t `{}`", &record[2]),
        })?;
        let code: u32 = record[3].parse().map_err(|_| StemError::Parse {
            row,
            message: format!("bad event code `{}`", &record[3]),
        })?;
        let id = record[0].to_string();
        let entry = pending.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            (label.clone(), Vec::new())
        });
        if entry.0 != label {
            return Err(StemError::MalformedDataset {
                sample: id,
                message: format!("row {row}: label changes within the sample"),
            });
        }
        entry.1.push((t, code));
    }

    let sequences = order
        .into_iter()
        .map(|id| {
            let (label, mut rows) = pending.remove(&id).expect("pending");
            rows.sort_by_key(|r| r.0);
            if let Some((expected, (t, _))) = rows.iter().enumerate().find(|(e, (t, _))| *t != *e) {
                return Err(StemError::MalformedDataset {
                    sample: id,
                    message: format!("expected t = {expected}, found {t}"),
                });
            }
            let codes = rows.into_iter().map(|(_, c)| EventCode(c)).collect();
            EventSequence::new(id, label, dims, codes)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EventFile { dims, delta, sequences })
}

fn parse_meta(line: &str) -> Result<(usize, f64)> {
    let bad = || {
        StemError::Schema(format!(
            "event file must start with `{META_PREFIX} dims=<D> delta=<delta>`, found `{line}`"
        ))
    };
    let rest = line.strip_prefix(META_PREFIX).ok_or_else(bad)?;
    let mut dims = None;
    let mut delta = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("dims", v)) => dims = v.parse::<usize>().ok(),
            Some(("delta", v)) => delta = v.parse::<f64>().ok(),
            _ => return Err(bad()),
        }
    }
    let dims = dims.ok_or_else(bad)?;
    check_dims(dims)?;
    Ok((dims, delta.ok_or_else(bad)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{normalize_sample, pad_to_length};
    use proptest::prelude::*;
    use MotionSymbol::*;

    #[test]
    fn dimension_examples() {
        assert_eq!(
            symbolize_dimension(&[0.0, 0.5, 0.5, 0.2], 0.1).unwrap(),
            vec![Up, Flat, Down]
        );
        assert_eq!(symbolize_dimension(&[0.3; 6], 0.2).unwrap(), vec![Flat; 5]);
        assert_eq!(symbolize_dimension(&[0.0, 0.2, 0.4, 0.9], 0.1).unwrap(), vec![Up; 3]);
        assert!(matches!(symbolize_dimension(&[0.5], 0.1), Err(StemError::TooShort(1))));
    }

    #[test]
    fn boundary_difference_is_flat() {
        assert_eq!(symbolize_dimension(&[0.0, 0.25, 0.0], 0.25).unwrap(), vec![Flat, Flat]);
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_event(&[Down, Down]), EventCode(0));
        assert_eq!(encode_event(&[Up, Up]), EventCode(8));
        assert_eq!(encode_event(&[Flat, Flat]), EventCode(4));
        assert_eq!(alphabet_size(3), 27);
        assert_eq!(flat_code(2), EventCode(4));
        assert_eq!(flat_code(3), EventCode(13));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_event(EventCode(0), 2).unwrap(), vec![Down, Down]);
        assert_eq!(decode_event(EventCode(13), 3).unwrap(), vec![Flat, Flat, Flat]);
        assert!(matches!(
            decode_event(EventCode(9), 2),
            Err(StemError::InvalidCode { code: 9, dims: 2 })
        ));
        for c in 0..81 {
            let s = decode_event(EventCode(c), 4).unwrap();
            assert_eq!(encode_event(&s), EventCode(c));
        }
    }

    #[test]
    fn explain_examples() {
        assert_eq!(explain_event(EventCode(8), 2, None).unwrap(), "dim_0: up, dim_1: up");
        assert_eq!(
            explain_event(EventCode(13), 3, None).unwrap(),
            "dim_0: flat, dim_1: flat, dim_2: flat"
        );
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(
            explain_event(EventCode(0), 2, Some(&names)).unwrap(),
            "x: down, y: down"
        );
        assert!(explain_event(EventCode(9), 2, None).is_err());
    }

    #[test]
    fn config_bounds() {
        assert!(SymbolizerConfig::new(0.0).is_ok());
        assert!(SymbolizerConfig::new(1.0).is_err());
        assert!(SymbolizerConfig::new(-0.1).is_err());
        assert!(SymbolizerConfig::new(f64::NAN).is_err());
    }

    fn sample(values: Vec<Vec<f64>>) -> MtsSample {
        MtsSample::new("s", Some("l".into()), values).unwrap()
    }

    #[test]
    fn sample_matches_per_dimension_composition() {
        let s = normalize_sample(&sample(vec![vec![0.0, 3.0, 3.0, 1.0, 2.0]]));
        let seq = symbolize_sample(&s, &SymbolizerConfig::default()).unwrap();
        let symbols = symbolize_dimension(s.dim(0), DEFAULT_DELTA).unwrap();
        let expected: Vec<_> = symbols.iter().map(|s| encode_event(&[*s])).collect();
        assert_eq!(seq.codes(), &expected[..]);
        assert_eq!(seq.label(), Some("l"));
        assert_eq!(seq.sample_id(), "s");
    }

    #[test]
    fn padded_tail_is_flat() {
        let s = normalize_sample(&sample(vec![vec![0.0, 1.0, 0.3], vec![1.0, 0.0, 0.5]]));
        let seq = symbolize_sample(&pad_to_length(&s, 7).unwrap(), &SymbolizerConfig::default()).unwrap();
        assert_eq!(seq.len(), 6);
        assert!(seq.codes()[2..].iter().all(|&c| c == flat_code(2)));
    }

    #[test]
    fn length_and_range_contract() {
        let values: Vec<Vec<f64>> = (0..3)
            .map(|d| (0..10).map(|t| ((t * (d + 2)) % 7) as f64).collect())
            .collect();
        let seq = symbolize_sample(&normalize_sample(&sample(values)), &SymbolizerConfig::default()).unwrap();
        assert_eq!(seq.len(), 9);
        assert!(seq.codes().iter().all(|c| c.0 < 27));
    }

    #[test]
    fn event_file_round_trip() {
        let seqs = vec![
            EventSequence::new("a", Some("x".into()), 2, vec![EventCode(4), EventCode(8)]).unwrap(),
            EventSequence::new("b", None, 2, vec![EventCode(0)]).unwrap(),
        ];
        let mut buf = Vec::new();
        write_events(&seqs, 2, 0.05, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#stem-events dims=2 delta=0.05\nsample_id,label,t,event_code\n"));
        let back = read_events(buf.as_slice()).unwrap();
        assert_eq!(back.dims, 2);
        assert_eq!(back.delta, 0.05);
        assert_eq!(back.sequences, seqs);
    }

    #[test]
    fn event_file_rejects_bad_codes() {
        let text = "#stem-events dims=1 delta=0.1\nsample_id,label,t,event_code\na,,0,3\n";
        assert!(matches!(
            read_events(text.as_bytes()),
            Err(StemError::InvalidCode { .. })
        ));
        let text = "sample_id,label,t,event_code\na,,0,1\n";
        assert!(matches!(read_events(text.as_bytes()), Err(StemError::Schema(_))));
    }

    proptest! {
        #[test]
        fn encode_decode_bijection(dims in 1usize..=6, seed in any::<u32>()) {
            let code = EventCode(seed % alphabet_size(dims) as u32);
            let symbols = decode_event(code, dims).unwrap();
            prop_assert_eq!(encode_event(&symbols), code);
        }

        #[test]
        fn time_reversal_negates(x in prop::collection::vec(0.0f64..=1.0, 2..40), delta in 0.0f64..0.5) {
            let forward = symbolize_dimension(&x, delta).unwrap();
            let reversed: Vec<f64> = x.iter().rev().copied().collect();
            let backward = symbolize_dimension(&reversed, delta).unwrap();
            let expected: Vec<_> = forward.iter().rev().map(|s| s.negate()).collect();
            prop_assert_eq!(backward, expected);
        }

        #[test]
        fn flat_set_grows_with_delta(x in prop::collection::vec(0.0f64..=1.0, 2..40), a in 0.0f64..0.99, b in 0.0f64..0.99) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let narrow = symbolize_dimension(&x, lo).unwrap();
            let wide = symbolize_dimension(&x, hi).unwrap();
            for (n, w) in narrow.iter().zip(&wide) {
                if *n == Flat {
                    prop_assert_eq!(*w, Flat);
                }
            }
        }
    }
}
