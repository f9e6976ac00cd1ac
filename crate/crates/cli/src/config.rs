//! Optional `key=value` defaults file. Flags always win.

use std::collections::BTreeMap;
use std::path::Path;

pub const KEYS: &[&str] = &[
    "maker",
    "breaker",
    "turns",
    "seed",
    "out",
    "threshold",
    "m_max",
    "node_budget",
    "occurrence_limit",
    "bound",
    "budget",
];

#[derive(Debug, Default, Clone)]
pub struct Defaults(BTreeMap<String, String>);

impl Defaults {
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(format!("config line {}: expected key=value", no + 1))?;
            let k = k.trim().replace('-', "_");
            if !KEYS.contains(&k.as_str()) {
                return Err(format!("config line {}: unknown key {k:?}", no + 1));
            }
            map.insert(k, v.trim().to_string());
        }
        Ok(Defaults(map))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        match path {
            None => Ok(Defaults::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
                Self::parse(&text)
            }
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// `flag`, else the config value, else `default`.
    pub fn pick<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: Option<T>,
    ) -> Result<Option<T>, String> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.text(key) {
            Some(v) => v.parse().map(Some).map_err(|_| format!("config value {key}={v:?} is not valid")),
            None => Ok(default),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let d = Defaults::parse("# defaults\nturns = 50\nm-max=4\n\nseed=9").unwrap();
        assert_eq!(d.pick(None, "turns", Some(1u64)).unwrap(), Some(50));
        assert_eq!(d.pick(Some(7u64), "turns", None).unwrap(), Some(7));
        assert_eq!(d.pick::<usize>(None, "m_max", None).unwrap(), Some(4));
        assert_eq!(d.pick::<u64>(None, "bound", Some(3)).unwrap(), Some(3));
        assert!(Defaults::parse("colour=red").is_err());
        assert!(Defaults::parse("turns").is_err());
        assert!(d.pick::<u64>(None, "seed", None).is_ok());
        assert!(Defaults::parse("turns=x").unwrap().pick::<u64>(None, "turns", None).is_err());
    }
}
