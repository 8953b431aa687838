//! File formats, BPMN import and the command-line front end for
//! `sadp-core`.

pub mod bpmn;
pub mod cli;
pub mod error;
pub mod report;
pub mod timeline;
pub mod workflow;

pub use error::{Location, ParseError, ParseErrorCode};
pub use workflow::{
    parse_workflow_json, parse_workflow_json_with, serialize_workflow, ParseOptions, Source, WorkflowDocument,
};
pub use bpmn::{import_bpmn_subset, import_bpmn_subset_with};
