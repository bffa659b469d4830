//! JSON and CSV emitters.
//!
//! Every JSON float is written with 17 significant digits in scientific
//! notation, which round-trips `f64` exactly. Non-finite floats become `null`.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, Serializer};

use crate::error::Result;
use crate::experiment::{LevelStats, ReplicateRecord};

/// Pretty JSON formatter with fixed-precision floats.
pub struct PreciseFormatter<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

impl Default for PreciseFormatter<'_> {
    fn default() -> Self {
        Self {
            inner: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.inner.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut writer: W) -> Result<()> {
    let mut ser = Serializer::with_formatter(&mut writer, PreciseFormatter::default());
    value.serialize(&mut ser)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    write_json(value, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Row of the aggregate CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    pub visit_freq: f64,
    pub leave_rate: Option<f64>,
    pub mean_sojourn: Option<f64>,
}

impl From<&LevelStats> for LevelRow {
    fn from(s: &LevelStats) -> Self {
        Self {
            level: s.level,
            visit_freq: s.visit_freq,
            leave_rate: s.leave_rate,
            mean_sojourn: s.mean_sojourn,
        }
    }
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the header even when there are no rows.
pub fn write_replicates_csv<W: Write>(records: &[ReplicateRecord], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["replicate", "runtime", "hit_optimum"])?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_levels_csv<W: Write>(levels: &[LevelStats], writer: W) -> Result<()> {
    let rows: Vec<LevelRow> = levels.iter().map(LevelRow::from).collect();
    write_csv(&rows, writer)
}

pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(reader: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(reader);
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

pub fn read_replicates_csv<R: Read>(reader: R) -> Result<Vec<ReplicateRecord>> {
    read_csv(reader)
}

pub fn read_levels_csv<R: Read>(reader: R) -> Result<Vec<LevelRow>> {
    read_csv(reader)
}
