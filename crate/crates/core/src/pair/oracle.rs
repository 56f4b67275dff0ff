use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PairLabel, PairVerdict};
use crate::error::{Error, Result};

/// On-disk oracle script: explicit pair labels, or one slide id per frame
/// (frames are "same" exactly when their ids are equal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OracleScript {
    Pairs { pairs: Vec<(usize, usize, PairLabel)> },
    SlideIds { slide_id_per_frame: Vec<i64> },
}

/// Pair backend answering from a script instead of pixels.
#[derive(Debug, Clone)]
pub enum PairOracle {
    Pairs(HashMap<(usize, usize), PairLabel>),
    SlideIds(Vec<i64>),
}

impl PairOracle {
    pub fn from_slide_ids(ids: Vec<i64>) -> Self {
        PairOracle::SlideIds(ids)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize, PairLabel)>) -> Self {
        PairOracle::Pairs(
            pairs
                .into_iter()
                .map(|(i, j, l)| ((i.min(j), i.max(j)), l))
                .collect(),
        )
    }

    pub fn from_script(script: OracleScript) -> Self {
        match script {
            OracleScript::Pairs { pairs } => Self::from_pairs(pairs),
            OracleScript::SlideIds { slide_id_per_frame } => Self::from_slide_ids(slide_id_per_frame),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let script: OracleScript = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        Ok(Self::from_script(script))
    }

    pub fn label(&self, i: usize, j: usize) -> Result<PairLabel> {
        match self {
            PairOracle::Pairs(map) => map
                .get(&(i.min(j), i.max(j)))
                .copied()
                .ok_or(Error::OracleMissing(i, j)),
            PairOracle::SlideIds(ids) => match (ids.get(i), ids.get(j)) {
                (Some(a), Some(b)) if a == b => Ok(PairLabel::Same),
                (Some(_), Some(_)) => Ok(PairLabel::Different),
                _ => Err(Error::OracleMissing(i, j)),
            },
        }
    }

    pub(crate) fn verdict(&self, i: usize, j: usize) -> Result<PairVerdict> {
        let value = self.label(i, j)?;
        Ok(PairVerdict {
            value,
            score: match value {
                PairLabel::Same => 0.0,
                PairLabel::Different => 1.0,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{classify_pair, PairBackend};
    use super::*;
    use crate::frame::Frame;

    #[test]
    fn script_formats_parse() {
        let pairs: OracleScript =
            serde_json::from_str(r#"{"pairs": [[0, 1, "same"], [1, 2, "different"]]}"#).unwrap();
        let oracle = PairOracle::from_script(pairs);
        assert_eq!(oracle.label(1, 0).unwrap(), PairLabel::Same);
        assert_eq!(oracle.label(2, 1).unwrap(), PairLabel::Different);
        assert!(matches!(oracle.label(0, 2), Err(Error::OracleMissing(0, 2))));

        let ids: OracleScript = serde_json::from_str(r#"{"slide_id_per_frame": [4, 4, 7]}"#).unwrap();
        let oracle = PairOracle::from_script(ids);
        assert_eq!(oracle.label(0, 1).unwrap(), PairLabel::Same);
        assert_eq!(oracle.label(1, 2).unwrap(), PairLabel::Different);
        assert!(oracle.label(0, 3).is_err());
    }

    #[test]
    fn classify_agrees_with_script_on_every_pair() {
        // Scripted labels from a slide-id sequence, written out exhaustively
        // as explicit pairs.
        let ids = [0i64, 0, 0, 1, 1, 2, 0, 3, 3, 3];
        let n = ids.len();
        let mut script = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let label = if ids[i] == ids[j] {
                    PairLabel::Same
                } else {
                    PairLabel::Different
                };
                script.push((i, j, label));
            }
        }
        let json = serde_json::to_string(&OracleScript::Pairs {
            pairs: script.clone(),
        })
        .unwrap();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(tmp.path(), json).unwrap();
        let backend = PairBackend::Oracle(PairOracle::load(tmp.path()).unwrap());
        let frames: Vec<Frame> = (0..n).map(|i| Frame::filled(i, 4, 4, &[0, 0, 0]).unwrap()).collect();
        for (i, j, label) in script {
            assert_eq!(classify_pair(&frames[i], &frames[j], &backend).unwrap().value, label);
            assert_eq!(classify_pair(&frames[j], &frames[i], &backend).unwrap().value, label);
        }
    }
}
