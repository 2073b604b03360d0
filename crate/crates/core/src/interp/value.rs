use crate::frontend::sema::SType;

/// Runtime value. `int` and `long long` share 64-bit wrapping storage.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Char(u8),
    Str(Vec<u8>),
    /// Vectors and fixed arrays.
    List(Vec<Value>),
    Void,
}

impl Value {
    pub fn default_for(t: &SType) -> Value {
        match t {
            SType::Int | SType::LongLong => Value::Int(0),
            SType::Double => Value::Float(0.0),
            SType::Bool => Value::Bool(false),
            SType::Char => Value::Char(0),
            SType::Str => Value::Str(Vec::new()),
            SType::Vector(_) | SType::Array(_) => Value::List(Vec::new()),
            SType::Void => Value::Void,
        }
    }

    pub fn is_float(&self) -> bool {
        matches!(self, Value::Float(_))
    }

    pub fn as_i64(&self) -> i64 {
        match self {
            Value::Int(v) => *v,
            Value::Float(f) => *f as i64,
            Value::Bool(b) => *b as i64,
            Value::Char(c) => *c as i8 as i64,
            Value::Str(_) | Value::List(_) | Value::Void => 0,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Value::Float(f) => *f,
            other => other.as_i64() as f64,
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::Float(f) => *f != 0.0,
            other => other.as_i64() != 0,
        }
    }

    /// Conversion applied when storing into a location of static type `t`.
    pub fn coerce(self, t: &SType) -> Value {
        match t {
            SType::Int | SType::LongLong => Value::Int(self.as_i64()),
            SType::Double => Value::Float(self.as_f64()),
            SType::Bool => Value::Bool(self.truthy()),
            SType::Char => Value::Char(self.as_i64() as u8),
            SType::Str => match self {
                Value::Char(c) => Value::Str(vec![c]),
                other => other,
            },
            _ => self,
        }
    }

    /// Conversion applied when overwriting `existing`: the stored kind is the static type.
    pub fn coerce_like(self, existing: &Value) -> Value {
        match existing {
            Value::Int(_) => Value::Int(self.as_i64()),
            Value::Float(_) => Value::Float(self.as_f64()),
            Value::Bool(_) => Value::Bool(self.truthy()),
            Value::Char(_) => Value::Char(self.as_i64() as u8),
            Value::Str(_) => match self {
                Value::Char(c) => Value::Str(vec![c]),
                other => other,
            },
            _ => self,
        }
    }

    /// Text written by `cout <<`.
    pub fn stream_text(&self, out: &mut Vec<u8>) {
        match self {
            Value::Int(v) => out.extend_from_slice(v.to_string().as_bytes()),
            Value::Float(f) => out.extend_from_slice(format_general(*f, 6).as_bytes()),
            Value::Bool(b) => out.push(if *b { b'1' } else { b'0' }),
            Value::Char(c) => out.push(*c),
            Value::Str(s) => out.extend_from_slice(s),
            Value::List(_) | Value::Void => {}
        }
    }
}

/// `%g`-style formatting with `precision` significant digits, as used by the
/// default floating-point stream format.
pub fn format_general(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return if x.is_sign_negative() { "-nan".into() } else { "nan".into() };
    }
    if x.is_infinite() {
        return if x < 0.0 { "-inf".into() } else { "inf".into() };
    }
    let p = precision.max(1);
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_format_matches_stream_defaults() {
        // Expected strings are what a default-configured C++ output stream prints.
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (2.5, "2.5"),
            (1.0 / 3.0, "0.333333"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-1.23456789, "-1.23457"),
            (100.0, "100"),
            (999999.5, "1e+06"),
            (1e100, "1e+100"),
        ];
        for (x, want) in cases {
            assert_eq!(format_general(x, 6), want, "{x}");
        }
    }

    #[test]
    fn coercions() {
        assert_eq!(Value::Float(3.9).coerce(&SType::Int), Value::Int(3));
        assert_eq!(Value::Float(-3.9).coerce(&SType::Int), Value::Int(-3));
        assert_eq!(Value::Int(2).coerce(&SType::Bool), Value::Bool(true));
        assert_eq!(Value::Int(321).coerce(&SType::Char), Value::Char(65));
        assert_eq!(Value::Char(b'x').coerce_like(&Value::Str(vec![])), Value::Str(b"x".to_vec()));
        assert_eq!(Value::Int(7).coerce_like(&Value::Float(0.0)), Value::Float(7.0));
    }
}
