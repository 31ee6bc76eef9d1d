//! Interchange and diagram formats.
//!
//! JSON is canonical: object keys are sorted, sets are emitted as sorted
//! arrays, and the text is pretty-printed with two-space indentation and no
//! trailing newline. Identical inputs give byte-identical output.

mod diagram;
mod json;

pub use diagram::{lts_diagram, product_lts_diagram, to_diagram, DiagramFormat, View};
pub use json::{
    configuration_json, from_json, input_from_json, input_to_json, lts_json, lts_to_json,
    model_from_value, model_json, product_configuration_json, product_lts_json, to_json,
    SchemaError,
};

/// JSON schema of the model document produced by [`to_json`].
pub const MODEL_SCHEMA: &str = include_str!("../../schema/model.schema.json");
