use alloc::string::{String, ToString};
use core::fmt;

use serde::{Deserialize, Serialize};

use super::config::PropertyMapping;
use super::statement::RawValue;
use super::units::UnitTable;
use crate::value::{Datatype, Date, PropertyValue};

/// Day precision in the knowledge-base time model.
pub const PRECISION_DAY: u8 = 11;
pub const PRECISION_YEAR: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscardReason {
    TypeMismatch,
    Unparseable,
    PrecisionTooCoarse,
    InvalidDate,
    MissingUnit,
    UnknownUnit,
    NotIntegral,
    OutOfRange,
}

impl DiscardReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DiscardReason::TypeMismatch => "type-mismatch",
            DiscardReason::Unparseable => "unparseable",
            DiscardReason::PrecisionTooCoarse => "precision-too-coarse",
            DiscardReason::InvalidDate => "invalid-date",
            DiscardReason::MissingUnit => "missing-unit",
            DiscardReason::UnknownUnit => "unknown-unit",
            DiscardReason::NotIntegral => "not-integral",
            DiscardReason::OutOfRange => "out-of-range",
        }
    }
}

impl fmt::Display for DiscardReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Calendar fields of a time literal; month and day may be 0 at coarse precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeValue {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

/// Parses `+YYYY-MM-DDThh:mm:ssZ`, `YYYY-MM-DD` and signed variants.
pub fn parse_time(s: &str) -> Option<TimeValue> {
    let date = s.split('T').next()?;
    let (sign, body) = match date.as_bytes().first()? {
        b'-' => (-1, &date[1..]),
        b'+' => (1, &date[1..]),
        _ => (1, date),
    };
    let mut it = body.split('-');
    let year: i32 = it.next()?.parse().ok()?;
    let month: u32 = it.next().map_or(Some(0), |m| m.parse().ok())?;
    let day: u32 = it.next().map_or(Some(0), |d| d.parse().ok())?;
    if it.next().is_some() || month > 12 || day > 31 {
        return None;
    }
    Some(TimeValue {
        year: sign * year,
        month,
        day,
    })
}

fn text_of(raw: &RawValue) -> Option<&str> {
    match raw {
        RawValue::Text { text } | RawValue::Monolingual { text, .. } => Some(text),
        RawValue::Entity { label, .. } => label.as_deref(),
        _ => None,
    }
}

fn integral(x: f64) -> Result<i64, DiscardReason> {
    if !x.is_finite() || libm::trunc(x) != x {
        return Err(DiscardReason::NotIntegral);
    }
    let bound = i64::MAX as f64;
    if !(-bound..bound).contains(&x) {
        return Err(DiscardReason::OutOfRange);
    }
    Ok(x as i64)
}

fn quantity(amount: f64, unit: Option<&str>, spec: &PropertyMapping, units: &UnitTable) -> Result<f64, DiscardReason> {
    if !amount.is_finite() {
        return Err(DiscardReason::Unparseable);
    }
    if !spec.quantity_convert_unit {
        return Ok(amount);
    }
    let target = spec.quantity_unit.as_deref().ok_or(DiscardReason::MissingUnit)?;
    let unit = unit.ok_or(DiscardReason::MissingUnit)?;
    let f = units.factor(unit, target).ok_or(DiscardReason::UnknownUnit)?;
    Ok(amount * f)
}

/// Coerces one raw value to the mapped datatype, or says why it cannot be.
pub fn convert_property_value(
    raw: &RawValue,
    spec: &PropertyMapping,
    units: &UnitTable,
) -> Result<PropertyValue, DiscardReason> {
    use DiscardReason::*;
    match (spec.datatype, raw) {
        (Datatype::Float, RawValue::Quantity { amount, unit }) => {
            quantity(*amount, unit.as_deref(), spec, units).map(PropertyValue::Float)
        }
        (Datatype::Int, RawValue::Quantity { amount, unit }) => {
            integral(quantity(*amount, unit.as_deref(), spec, units)?).map(PropertyValue::Int)
        }
        (Datatype::Str, RawValue::Quantity { amount, unit }) => {
            Ok(PropertyValue::Text(quantity(*amount, unit.as_deref(), spec, units)?.to_string()))
        }
        (_, RawValue::Quantity { .. }) => Err(TypeMismatch),
        (dt, RawValue::Time { value, precision }) => {
            let t = parse_time(value).ok_or(Unparseable)?;
            match dt {
                Datatype::Int => {
                    if *precision < PRECISION_YEAR {
                        return Err(PrecisionTooCoarse);
                    }
                    Ok(PropertyValue::Int(t.year as i64))
                }
                Datatype::Date | Datatype::Str => {
                    if *precision < PRECISION_DAY {
                        return Err(PrecisionTooCoarse);
                    }
                    let d = Date::new(t.year, t.month, t.day).map_err(|_| InvalidDate)?;
                    Ok(if dt == Datatype::Date {
                        PropertyValue::Date(d)
                    } else {
                        PropertyValue::Text(d.to_string())
                    })
                }
                _ => Err(TypeMismatch),
            }
        }
        (dt, raw) => {
            let text = text_of(raw).ok_or(TypeMismatch)?;
            match dt {
                Datatype::Str => Ok(PropertyValue::Text(text.into())),
                Datatype::ListStr => Ok(PropertyValue::ListText(alloc::vec![String::from(text)])),
                Datatype::Int => text.trim().parse().map(PropertyValue::Int).map_err(|_| Unparseable),
                Datatype::Float => match text.trim().parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(PropertyValue::Float(x)),
                    _ => Err(Unparseable),
                },
                Datatype::Date => Date::parse_iso(text.trim())
                    .map(PropertyValue::Date)
                    .map_err(|_| Unparseable),
            }
        }
    }
}
