use std::str::FromStr;

use szego::{ComplexMatrix2, C64};

use crate::error::{CliError, CliResult};

/// Parses `RE`, `IMi`, `RE+IMi` or `RE-IMi`; a bare `i` means 1.
pub fn complex(s: &str) -> CliResult<C64> {
    let bad = || CliError::Input(format!("cannot parse complex number {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return f64::from_str(&t).ok().filter(|re| re.is_finite()).map(|re| C64::new(re, 0.0)).ok_or_else(bad);
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => f64::from_str(s).map_err(|_| bad())?,
    };
    let re = f64::from_str(re).map_err(|_| bad())?;
    let z = C64::new(re, im);
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(bad());
    }
    Ok(z)
}

/// Parses `m11,m12;m21,m22` with complex entries.
pub fn matrix(s: &str) -> CliResult<ComplexMatrix2> {
    let rows: Vec<&str> = s.split(';').collect();
    let entries: Vec<Vec<&str>> = rows.iter().map(|r| r.split(',').collect()).collect();
    if entries.len() != 2 || entries.iter().any(|r| r.len() != 2) {
        return Err(CliError::Input(format!("matrix must look like \"m11,m12;m21,m22\", got {s:?}")));
    }
    Ok(ComplexMatrix2::new(complex(entries[0][0])?, complex(entries[0][1])?, complex(entries[1][0])?, complex(entries[1][1])?))
}

/// Parses `n_k,n_e`.
pub fn dims(s: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(CliError::Input(format!("dims must be two nonnegative integers, got {s:?}"))),
        },
        _ => Err(CliError::Input(format!("dims must look like \"2,1\", got {s:?}"))),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

pub fn formats(s: &str) -> CliResult<Formats> {
    let mut f = Formats::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "csv" => f.csv = true,
            "json" => f.json = true,
            "svg" => f.svg = true,
            other => return Err(CliError::Input(format!("unknown output format {other:?}; use csv, json or svg"))),
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(complex("2.5i").unwrap(), C64::new(0.0, 2.5));
        assert_eq!(complex("1+2i").unwrap(), C64::new(1.0, 2.0));
        assert_eq!(complex("-1-i").unwrap(), C64::new(-1.0, -1.0));
        assert_eq!(complex("1e-3+2E+1i").unwrap(), C64::new(1e-3, 20.0));
        assert_eq!(complex(" 3 - 4i ").unwrap(), C64::new(3.0, -4.0));
        for bad in ["", "x", "1+", "1+2j", "1++2i", "nan", "inf"] {
            assert!(complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn matrix_and_dims() {
        let m = matrix("2,0;0,0.5").unwrap();
        assert_eq!(m, ComplexMatrix2::real(2.0, 0.0, 0.0, 0.5));
        assert!(matrix("1,2,3;4,5").is_err());
        assert_eq!(dims("2, 1").unwrap(), (2, 1));
        assert!(dims("2").is_err());
        assert_eq!(formats("csv,svg").unwrap(), Formats { csv: true, json: false, svg: true });
        assert!(formats("pdf").is_err());
    }
}
