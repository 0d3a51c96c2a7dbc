use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::diagnostics::AuditRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 11] = [
    "experiment_id",
    "set",
    "sensing",
    "n",
    "k_or_r",
    "m",
    "delta",
    "dithered",
    "trial_index",
    "seed",
    "error",
];

/// One Monte-Carlo outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub experiment_id: String,
    pub set: String,
    pub sensing: String,
    pub n: usize,
    pub k_or_r: usize,
    pub m: usize,
    pub delta: f64,
    pub dithered: bool,
    pub trial_index: usize,
    pub seed: u64,
    /// `‖x − x̂‖₂` (Frobenius for matrices).
    pub error: f64,
}

/// Columns usable as grouping keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Column {
    ExperimentId,
    Set,
    Sensing,
    N,
    KOrR,
    M,
    Delta,
    Dithered,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::ExperimentId => "experiment_id",
            Column::Set => "set",
            Column::Sensing => "sensing",
            Column::N => "n",
            Column::KOrR => "k_or_r",
            Column::M => "m",
            Column::Delta => "delta",
            Column::Dithered => "dithered",
        }
    }

    pub fn value(self, r: &TrialRecord) -> String {
        match self {
            Column::ExperimentId => r.experiment_id.clone(),
            Column::Set => r.set.clone(),
            Column::Sensing => r.sensing.clone(),
            Column::N => r.n.to_string(),
            Column::KOrR => r.k_or_r.to_string(),
            Column::M => r.m.to_string(),
            Column::Delta => r.delta.to_string(),
            Column::Dithered => r.dithered.to_string(),
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Column::ExperimentId,
            Column::Set,
            Column::Sensing,
            Column::N,
            Column::KOrR,
            Column::M,
            Column::Delta,
            Column::Dithered,
        ]
        .into_iter()
        .find(|c| c.name() == s.trim())
        .ok_or_else(|| Error::config(format!("unknown group-by column {s:?}")))
    }
}

/// Nine significant digits, `%.9g` style: fixed notation for exponents in
/// `-5..9`, scientific otherwise, trailing zeros removed.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_records<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.experiment_id.clone(),
            r.set.clone(),
            r.sensing.clone(),
            r.n.to_string(),
            r.k_or_r.to_string(),
            r.m.to_string(),
            r.delta.to_string(),
            r.dithered.to_string(),
            r.trial_index.to_string(),
            r.seed.to_string(),
            format_sig9(r.error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::config(format!(
            "unexpected CSV header {header:?}; expected {CSV_HEADER:?}"
        )));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let field = |j: usize| row.get(j).unwrap_or("");
        let num = |j: usize| -> Result<f64> {
            field(j).parse().map_err(|_| {
                Error::config(format!("row {}: bad {} value {:?}", i + 1, CSV_HEADER[j], field(j)))
            })
        };
        let int = |j: usize| -> Result<u64> {
            field(j).parse().map_err(|_| {
                Error::config(format!("row {}: bad {} value {:?}", i + 1, CSV_HEADER[j], field(j)))
            })
        };
        out.push(TrialRecord {
            experiment_id: field(0).to_string(),
            set: field(1).to_string(),
            sensing: field(2).to_string(),
            n: int(3)? as usize,
            k_or_r: int(4)? as usize,
            m: int(5)? as usize,
            delta: num(6)?,
            dithered: field(7)
                .parse()
                .map_err(|_| Error::config(format!("row {}: bad dithered flag", i + 1)))?,
            trial_index: int(8)? as usize,
            seed: int(9)?,
            error: num(10)?,
        });
    }
    Ok(out)
}

/// Audit sidecar of a `diagnose` run, row-aligned with the trial records.
pub fn write_audits<W: Write>(
    records: &[TrialRecord],
    audits: &[AuditRecord],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "m", "delta", "trial_index", "seed", "error", "eps_hat", "nu_hat", "bound", "holds", "margin",
    ])?;
    for (r, a) in records.iter().zip(audits) {
        w.write_record([
            r.m.to_string(),
            r.delta.to_string(),
            r.trial_index.to_string(),
            r.seed.to_string(),
            format_sig9(a.error),
            format_sig9(a.eps_hat),
            format_sig9(a.nu_hat),
            format_sig9(a.bound),
            a.holds.to_string(),
            format_sig9(a.margin),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig9_examples() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.123456789123), "0.123456789");
        assert_eq!(format_sig9(123456.789123), "123456.789");
        assert_eq!(format_sig9(1.5e-7), "1.5e-7");
        assert_eq!(format_sig9(-2.25e12), "-2.25e12");
        assert_eq!(format_sig9(0.0001), "0.0001");
        assert_eq!(format_sig9(9.9999999999), "10");
    }

    fn sample() -> TrialRecord {
        TrialRecord {
            experiment_id: "fig".into(),
            set: "sparse".into(),
            sensing: "gaussian".into(),
            n: 512,
            k_or_r: 4,
            m: 112,
            delta: 0.5,
            dithered: true,
            trial_index: 3,
            seed: u64::MAX,
            error: 0.3141592653589793,
        }
    }

    #[test]
    fn csv_header_and_row() {
        let mut buf = Vec::new();
        write_records(&[sample()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment_id,set,sensing,n,k_or_r,m,delta,dithered,trial_index,seed,error"
        );
        assert_eq!(
            lines.next().unwrap(),
            "fig,sparse,gaussian,512,4,112,0.5,true,3,18446744073709551615,0.314159265"
        );
    }

    #[test]
    fn rejects_foreign_header() {
        let text = "a,b\n1,2\n";
        assert!(read_records(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn records_survive_csv(error in 0.0f64..1e6, delta in 1e-3f64..1e3, m in 1usize..10_000, seed: u64) {
            let mut r = sample();
            r.error = error;
            r.delta = delta;
            r.m = m;
            r.seed = seed;
            let mut buf = Vec::new();
            write_records(std::slice::from_ref(&r), &mut buf).unwrap();
            let back = read_records(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), 1);
            let b = &back[0];
            prop_assert_eq!(b.delta, r.delta);
            prop_assert_eq!(b.seed, r.seed);
            prop_assert!((b.error - r.error).abs() <= 1e-8 * r.error.max(1e-300));
            prop_assert_eq!(format_sig9(b.error), format_sig9(r.error));
        }
    }
}
