//! JSON report writing. Floats are printed with 17 significant digits so every
//! `f64` round-trips exactly; non-finite values become `null`.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::error::Result;

/// Wraps a formatter and replaces its float output with `{:.16e}`.
struct RoundTrip<F>(F);

macro_rules! delegate {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

impl<F: Formatter> Formatter for RoundTrip<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate!(begin_array, end_array, begin_object, end_object, end_array_value, end_object_value);

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T, pretty: bool) -> Result<String> {
    let mut buf = Vec::new();
    if pretty {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTrip(PrettyFormatter::new()));
        value.serialize(&mut ser)?;
        buf.push(b'\n');
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTrip(CompactFormatter));
        value.serialize(&mut ser)?;
    }
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> Result<()> {
    std::fs::write(path, to_json_string(value, pretty)?)?;
    Ok(())
}

/// Report envelope: code version, command name, resolved config, payload.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, P: Serialize> {
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    #[serde(flatten)]
    pub payload: P,
}

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
