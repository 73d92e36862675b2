use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// `key = value` settings from an optional file, overridden by flags. Every
/// value that is looked up is recorded so the manifest shows what was used.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
                file.insert(k.trim().replace('_', "-"), v.trim().to_string());
            }
        }
        Ok(Self { file, used: BTreeMap::new() })
    }

    /// Flag value if given, else the file value, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => s
                .parse()
                .map_err(|e| CliError::Usage(format!("config key {key} = {s:?}: {e}")))?,
            (None, None) => default,
        };
        self.used.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Comma-separated list, same precedence as [`Settings::get`].
    pub fn list<T>(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self.get(key, flag, default.to_string())?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| CliError::Usage(format!("{key}: cannot parse {s:?}: {e}")))
            })
            .collect()
    }

    pub fn used(&self) -> &BTreeMap<String, String> {
        &self.used
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_recording() {
        let dir = std::env::temp_dir().join(format!("tm-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "# comment\nc_max = 96\ntol=1e-9\nxs = 1,2, 3\n").unwrap();
        let mut s = Settings::load(Some(&path)).unwrap();
        assert_eq!(s.get("c-max", None, 64u64).unwrap(), 96);
        assert_eq!(s.get("c-max", Some(128u64), 64).unwrap(), 128);
        assert_eq!(s.get("tol", None, 1e-8).unwrap(), 1e-9);
        assert_eq!(s.get("seed", None, 7u64).unwrap(), 7);
        assert_eq!(s.list::<u32>("xs", None, "5").unwrap(), vec![1, 2, 3]);
        assert_eq!(s.used()["c-max"], "128");
        std::fs::write(&path, "nonsense\n").unwrap();
        assert!(matches!(Settings::load(Some(&path)), Err(CliError::Usage(_))));
        std::fs::write(&path, "tol = abc\n").unwrap();
        let mut s = Settings::load(Some(&path)).unwrap();
        assert!(s.get("tol", None, 1.0f64).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
