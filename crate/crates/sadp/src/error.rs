use std::fmt;

use sadp_core::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorCode {
    SyntaxError,
    SchemaError,
    /// The document is well-formed but the model it describes is not
    /// (duplicate ids, dangling edges, cycles, unknown table references).
    SemanticError,
    UnsupportedElement,
    MalformedAnnotation,
    DanglingAssociation,
}

impl ParseErrorCode {
    pub fn token(self) -> &'static str {
        match self {
            ParseErrorCode::SyntaxError => "SyntaxError",
            ParseErrorCode::SchemaError => "SchemaError",
            ParseErrorCode::SemanticError => "SemanticError",
            ParseErrorCode::UnsupportedElement => "UnsupportedElement",
            ParseErrorCode::MalformedAnnotation => "MalformedAnnotation",
            ParseErrorCode::DanglingAssociation => "DanglingAssociation",
        }
    }
}

impl fmt::Display for ParseErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Where in the input a problem sits: a 1-based line/column, an element path
/// (`tasks[2].id`), or both.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Location {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub path: Option<String>,
}

impl Location {
    pub fn at(line: usize, column: usize) -> Self {
        Location { line: Some(line), column: Some(column), path: None }
    }

    pub fn path(path: impl Into<String>) -> Self {
        Location { line: None, column: None, path: Some(path.into()) }
    }

    pub fn with_path(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.line.is_none() && self.path.is_none()
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column, &self.path) {
            (Some(l), Some(c), Some(p)) => write!(f, "line {l}, column {c} ({p})"),
            (Some(l), Some(c), None) => write!(f, "line {l}, column {c}"),
            (Some(l), None, Some(p)) => write!(f, "line {l} ({p})"),
            (Some(l), None, None) => write!(f, "line {l}"),
            (None, _, Some(p)) => f.write_str(p),
            (None, _, None) => f.write_str("<input>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{code} at {location}: {message}")]
pub struct ParseError {
    pub location: Location,
    pub code: ParseErrorCode,
    pub message: String,
    /// Set for [`ParseErrorCode::SemanticError`].
    pub model_error: Option<Box<ModelError>>,
}

impl ParseError {
    pub fn new(code: ParseErrorCode, location: Location, message: impl Into<String>) -> Self {
        ParseError { location, code, message: message.into(), model_error: None }
    }

    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(ParseErrorCode::SchemaError, Location::path(path), message)
    }

    pub fn semantic(location: Location, err: ModelError) -> Self {
        ParseError {
            location,
            code: ParseErrorCode::SemanticError,
            message: err.to_string(),
            model_error: Some(Box::new(err)),
        }
    }
}
