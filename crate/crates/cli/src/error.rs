use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown preset `{0}` (expected one of: {1})")]
    UnknownPreset(String, String),

    #[error("invalid override keys: {keys} (valid keys: {valid})")]
    InvalidKeys { keys: String, valid: String },

    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },

    #[error("malformed override `{0}` (expected key=value)")]
    Malformed(String),

    #[error(transparent)]
    Model(#[from] probesched::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
