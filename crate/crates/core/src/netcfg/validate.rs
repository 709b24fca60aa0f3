use std::fmt;

use super::{grid_size, required_head_filters, NetConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn new(severity: Severity, code: &'static str, message: String) -> Self {
        Self {
            severity,
            code,
            message,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]: {}", self.severity, self.code, self.message)
    }
}

/// Lints a parsed network: head filter count against the region layer,
/// input size against the total stride, and a summary of depth and grid.
pub fn validate_net(net: &NetConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if let Some((params, anchors)) = net.region() {
        let required = required_head_filters(params.num_anchors, params.classes, params.coords);
        match net.head_filters() {
            Some(filters) if filters != required => out.push(Diagnostic::new(
                Severity::Error,
                "head-filters",
                format!(
                    "last convolution has {filters} filters but num={} classes={} coords={} needs {required}",
                    params.num_anchors, params.classes, params.coords
                ),
            )),
            Some(_) => {}
            None => out.push(Diagnostic::new(
                Severity::Error,
                "head-filters",
                "region layer without a preceding convolution".into(),
            )),
        }
        if !anchors.is_empty() && anchors.len() != params.num_anchors {
            out.push(Diagnostic::new(
                Severity::Warning,
                "anchor-count",
                format!(
                    "region lists {} anchors but num={}",
                    anchors.len(),
                    params.num_anchors
                ),
            ));
        }
    }

    let stride = net.total_stride();
    let input = net.input_shape;
    for (axis, dim) in [("width", input.width), ("height", input.height)] {
        if dim % stride != 0 {
            out.push(Diagnostic::new(
                Severity::Warning,
                "input-stride",
                format!("input {axis} {dim} is not divisible by total stride {stride}"),
            ));
        }
    }

    out.push(Diagnostic::new(
        Severity::Info,
        "depth",
        format!("{} maxpool layers, total stride {stride}", net.maxpool_count()),
    ));
    match grid_size(net) {
        Ok((w, h)) => out.push(Diagnostic::new(
            Severity::Info,
            "grid",
            format!("detection grid {w} x {h}"),
        )),
        Err(err) => out.push(Diagnostic::new(Severity::Error, "shape", err.to_string())),
    }
    out
}
