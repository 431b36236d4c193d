use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

/// Family or generator sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Family,
    Generator,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Family => "family",
            Mode::Generator => "generator",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "family" => Ok(Mode::Family),
            "generator" => Ok(Mode::Generator),
            other => Err(Error::param(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub members: Vec<usize>,
    pub d: Vec<usize>,
    pub m: usize,
}

/// One measured value against its band. Field order is the JSON order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRecord {
    pub n: usize,
    pub k: usize,
    pub mode: Mode,
    pub cardinality: usize,
    pub measure: String,
    pub value: u64,
    #[serde(serialize_with = "ser_f64")]
    pub lower: f64,
    #[serde(serialize_with = "ser_f64")]
    pub upper: f64,
    pub within_band: bool,
    pub approximate: bool,
    pub witness: Witness,
    pub trial: u64,
    pub seed: u64,
    pub elapsed_ms: u64,
}

impl BoundsRecord {
    /// Copy with the wall-clock field cleared, for comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// `x` with 17 significant digits, positional where reasonable.
pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{:.16e}", x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("exponent parses");
    if (-5..=16).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{:.*}", decimals, x)
    } else {
        sci
    }
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format_f64(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

pub fn to_jsonl(records: &[BoundsRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json());
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<BoundsRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Record(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// Writes records to a new file; an existing file is never touched.
pub fn write_jsonl(path: &Path, records: &[BoundsRecord]) -> Result<()> {
    let mut file = OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    file.write_all(to_jsonl(records).as_bytes())?;
    file.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<BoundsRecord>> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut text = String::new();
    for line in BufReader::new(file).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    parse_jsonl(&text)
}

pub const CSV_HEADER: &str =
    "n,k,mode,cardinality,measure,value,lower,upper,within_band,approximate,members,d,m,trial,seed";

fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Plot-ready CSV without the wall-clock column.
pub fn to_csv(records: &[BoundsRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.k,
            r.mode.name(),
            r.cardinality,
            r.measure,
            r.value,
            format_f64(r.lower),
            format_f64(r.upper),
            r.within_band,
            r.approximate,
            join(&r.witness.members),
            join(&r.witness.d),
            r.witness.m,
            r.trial,
            r.seed,
        ));
    }
    out
}
