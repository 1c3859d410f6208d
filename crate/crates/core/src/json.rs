//! Compact JSON output with canonical number formatting.
//!
//! Finite floats are written in their shortest round-trip decimal form without
//! a forced fractional part (`1`, `0.7071067811865476`, `-0.25`). Very large or
//! very small magnitudes switch to exponent notation (`1e-300`). Non-finite
//! values become `null`. Parsing the output back with a correctly rounding
//! parser recovers every float bit-for-bit.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// `CompactFormatter` with canonical float output.
#[derive(Clone, Copy, Debug, Default)]
pub struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Shortest round-trip decimal for a finite float; `null` otherwise.
pub fn format_f64(value: f64) -> String {
    if !value.is_finite() {
        return "null".to_owned();
    }
    let abs = value.abs();
    if abs != 0.0 && !(1e-6..1e16).contains(&abs) {
        format!("{value:e}")
    } else {
        format!("{value}")
    }
}

/// Serializes `value` compactly with [`CanonicalFormatter`].
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::with_capacity(256);
    let mut ser = Serializer::with_formatter(&mut buf, CanonicalFormatter);
    value
        .serialize(&mut ser)
        .expect("serializing plain data to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
