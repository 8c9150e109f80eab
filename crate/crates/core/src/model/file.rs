//! JSON config file format. Node indices in files are 1-based; numbers are JSON
//! integers or `"p/q"` strings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rational::{serde_rational, serde_rational_vec, Rational};
use super::{DssConfig, RepairBandwidthModel, RepairKey, SystemParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    #[serde(with = "serde_rational_vec")]
    pub alpha: Vec<Rational>,
    pub bandwidth: BandwidthFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BandwidthFile {
    Homogeneous {
        #[serde(with = "serde_rational")]
        gamma: Rational,
    },
    HelperOnly {
        #[serde(with = "serde_rational_vec")]
        beta: Vec<Rational>,
    },
    Full { entries: Vec<TableEntry> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub j: usize,
    #[serde(rename = "S")]
    pub helpers: Vec<usize>,
    #[serde(with = "serde_rational_vec")]
    pub beta: Vec<Rational>,
}

fn to_zero_based(index: usize, n: usize) -> Result<usize> {
    if index == 0 || index > n {
        Err(Error::IndexOutOfRange { index, n })
    } else {
        Ok(index - 1)
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validates the file contents and converts to the in-memory model.
    pub fn into_config(self) -> Result<DssConfig> {
        let params = SystemParams::new(self.n, self.k, self.d)?;
        let bandwidth = match self.bandwidth {
            BandwidthFile::Homogeneous { gamma } => RepairBandwidthModel::Homogeneous { gamma },
            BandwidthFile::HelperOnly { beta } => RepairBandwidthModel::HelperOnly { beta },
            BandwidthFile::Full { entries } => {
                let mut table = BTreeMap::new();
                for entry in entries {
                    let failed = to_zero_based(entry.j, self.n)?;
                    let mut pairs = entry
                        .helpers
                        .iter()
                        .map(|&i| to_zero_based(i, self.n))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .zip(entry.beta.iter().cloned())
                        .collect::<Vec<_>>();
                    if entry.helpers.len() != entry.beta.len() {
                        return Err(Error::DimensionMismatch {
                            what: "table entry beta",
                            expected: entry.helpers.len(),
                            got: entry.beta.len(),
                        });
                    }
                    pairs.sort_by_key(|(i, _)| *i);
                    let (helpers, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
                    let key = RepairKey { failed, helpers };
                    if table.contains_key(&key) {
                        return Err(Error::MalformedTable(format!(
                            "duplicate entry for j = {} S = {:?}",
                            entry.j, entry.helpers
                        )));
                    }
                    table.insert(key, values);
                }
                RepairBandwidthModel::Full { table }
            }
        };
        DssConfig::new(params, self.alpha, bandwidth)
    }

    pub fn from_config(config: &DssConfig) -> Self {
        let bandwidth = match config.bandwidth() {
            RepairBandwidthModel::Homogeneous { gamma } => BandwidthFile::Homogeneous {
                gamma: gamma.clone(),
            },
            RepairBandwidthModel::HelperOnly { beta } => BandwidthFile::HelperOnly {
                beta: beta.clone(),
            },
            RepairBandwidthModel::Full { table } => BandwidthFile::Full {
                entries: table
                    .iter()
                    .map(|(key, values)| TableEntry {
                        j: key.failed + 1,
                        helpers: key.helpers.iter().map(|i| i + 1).collect(),
                        beta: values.clone(),
                    })
                    .collect(),
            },
        };
        Self {
            n: config.n(),
            k: config.k(),
            d: config.d(),
            alpha: config.alpha().to_vec(),
            bandwidth,
        }
    }
}

pub fn parse_config(text: &str) -> Result<DssConfig> {
    ConfigFile::from_json(text)?.into_config()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<DssConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::{int, ratio};
    use crate::model::expand_to_full;

    #[test]
    fn helper_only_file() {
        let cfg = parse_config(
            r#"{"n":3,"k":2,"d":2,"alpha":[1,"2",2],
                "bandwidth":{"type":"helper_only","beta":[1,2,"4/2"]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.alpha(), &[int(1), int(2), int(2)]);
        assert_eq!(cfg.helper_betas().unwrap()[2], int(2));
    }

    #[test]
    fn full_file_with_unsorted_helpers() {
        let cfg = parse_config(
            r#"{"n":3,"k":1,"d":2,"alpha":[1,1,1],
                "bandwidth":{"type":"full","entries":[
                  {"j":1,"S":[3,2],"beta":["1/2",1]},
                  {"j":2,"S":[1,3],"beta":[0,0]},
                  {"j":3,"S":[1,2],"beta":[2,3]}]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.beta(2, 0, &[1, 2]).unwrap(), ratio(1, 2));
        assert_eq!(cfg.beta(1, 0, &[1, 2]).unwrap(), int(1));
    }

    #[test]
    fn rejects_bad_files() {
        let bad_index = r#"{"n":3,"k":1,"d":2,"alpha":[1,1,1],
            "bandwidth":{"type":"full","entries":[{"j":0,"S":[2,3],"beta":[1,1]}]}}"#;
        assert!(matches!(
            parse_config(bad_index),
            Err(Error::IndexOutOfRange { index: 0, .. })
        ));
        let k_gt_d = r#"{"n":3,"k":3,"d":2,"alpha":[1,1,1],
            "bandwidth":{"type":"homogeneous","gamma":2}}"#;
        assert!(matches!(parse_config(k_gt_d), Err(Error::ParamViolation(_))));
        let float = r#"{"n":3,"k":1,"d":2,"alpha":[1.5,1,1],
            "bandwidth":{"type":"homogeneous","gamma":2}}"#;
        assert!(matches!(parse_config(float), Err(Error::Parse(_))));
        let unknown = r#"{"n":3,"k":1,"d":2,"alpha":[1,1,1],
            "bandwidth":{"type":"weird","gamma":2}}"#;
        assert!(matches!(parse_config(unknown), Err(Error::Parse(_))));
    }

    #[test]
    fn file_round_trip() {
        let cfg = DssConfig::helper_only(
            4,
            2,
            3,
            vec![ratio(5, 3), int(2), int(0), int(7)],
            vec![int(1), ratio(1, 2), int(2), int(3)],
        )
        .unwrap();
        for c in [cfg.clone(), expand_to_full(&cfg)] {
            let text = ConfigFile::from_config(&c).to_json();
            assert_eq!(parse_config(&text).unwrap(), c);
        }
    }
}
