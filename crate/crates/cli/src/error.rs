use std::fmt;

use portrait_core::config::ConfigError;
use portrait_core::corpus::CorpusError;
use portrait_core::lexicon::LexiconError;
use portrait_core::model::ModelError;
use portrait_core::report::{ErrorKind, ReportError};
use portrait_core::segmenter::WordListError;
use portrait_core::stats::StatsError;
use serde::Serialize;

/// A failed command: exit code 1 (usage), 2 (input) or 3 (domain).
#[derive(Debug, Serialize)]
pub struct Failure {
    pub error: ErrorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    pub message: String,
}

impl Failure {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Usage, msg)
    }

    pub fn input(msg: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Input, msg)
    }

    pub fn domain(msg: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Domain, msg)
    }

    fn new(kind: ErrorKind, msg: impl fmt::Display) -> Self {
        Failure {
            error: kind,
            stage: None,
            message: msg.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.error {
            ErrorKind::Usage => 1,
            ErrorKind::Input => 2,
            ErrorKind::Domain => 3,
        }
    }

    /// The single stderr line describing this failure.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("failure serializes")
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::BirthAfterReference { .. } => Failure::domain(e),
            _ => Failure::input(e),
        }
    }
}

impl From<LexiconError> for Failure {
    fn from(e: LexiconError) -> Self {
        Failure::input(e)
    }
}

impl From<WordListError> for Failure {
    fn from(e: WordListError) -> Self {
        Failure::input(e)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Format(_) | ModelError::Labels(_) => Failure::input(e),
            _ => Failure::domain(e),
        }
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::UnknownKey(_) | StatsError::UnknownBinning(_) | StatsError::BadBins(_) => {
                Failure::usage(e)
            }
            _ => Failure::domain(e),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } | ConfigError::Parse { .. } => Failure::input(e),
            _ => Failure::usage(e),
        }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        Failure {
            error: e.kind,
            stage: Some(e.stage.to_string()),
            message: e.message,
        }
    }
}
