//! Deterministic file output: fixed-precision number formatting and
//! atomic write-temp-then-rename with overwrite protection.

use std::fs;
use std::path::Path;

use crate::CliError;

/// Decimal with 12 significant digits; values below 1e-17 lose tail
/// digits rather than switching to scientific notation.
pub fn fmt12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (11 - exp).clamp(0, 17) as usize;
    format!("{v:.decimals$}")
}

pub fn write_atomic(path: &Path, bytes: &[u8], force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::Usage(format!(
            "refusing to overwrite {} (pass --force)",
            path.display()
        )));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".{}.tmp", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt12_keeps_twelve_significant_digits() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(1.0), "1.00000000000");
        assert_eq!(fmt12(0.5), "0.500000000000");
        assert_eq!(fmt12(0.1887218755408672), "0.188721875541");
        assert_eq!(fmt12(2.0), "2.00000000000");
        assert_eq!(fmt12(123.456), "123.456000000");
    }

    #[test]
    fn atomic_write_respects_force() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"a", false).unwrap();
        assert!(write_atomic(&path, b"b", false).is_err());
        assert_eq!(fs::read(&path).unwrap(), b"a");
        write_atomic(&path, b"b", true).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"b");
    }
}
