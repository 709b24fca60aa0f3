use std::fmt::Write as _;

use super::{LayerSpec, NetConfig, RegionParams, TensorShape};
use crate::anchors::{format_anchor_pairs, parse_anchor_pairs};
use crate::error::{Error, Result};

/// Result of [`parse_cfg`]: the network plus non-fatal warnings (ignored keys).
#[derive(Debug, Clone)]
pub struct ParsedCfg {
    pub net: NetConfig,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SectionKind {
    Net,
    Convolutional,
    Maxpool,
    Route,
    Reorg,
    Region,
}

impl SectionKind {
    fn from_header(name: &str) -> Option<Self> {
        Some(match name {
            "net" | "network" => Self::Net,
            "convolutional" | "conv" => Self::Convolutional,
            "maxpool" | "max" => Self::Maxpool,
            "route" => Self::Route,
            "reorg" => Self::Reorg,
            "region" => Self::Region,
            _ => return None,
        })
    }

    fn known_keys(self) -> &'static [&'static str] {
        match self {
            Self::Net => &["width", "height", "channels"],
            Self::Convolutional => &["filters", "size", "stride"],
            Self::Maxpool => &["size", "stride"],
            Self::Route => &["layers"],
            Self::Reorg => &["stride"],
            Self::Region => &["num", "classes", "coords", "anchors"],
        }
    }
}

struct Section {
    kind: SectionKind,
    line: usize,
    entries: Vec<(String, String, usize)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, line)| (v.as_str(), *line))
    }

    fn count(&self, key: &str, default: Option<usize>) -> Result<usize> {
        match self.get(key) {
            Some((value, line)) => {
                let parsed: usize = value.parse().map_err(|_| Error::CfgParse {
                    line,
                    message: format!("`{key}` expects a non-negative integer, got `{value}`"),
                })?;
                Ok(parsed)
            }
            None => default.ok_or_else(|| Error::CfgParse {
                line: self.line,
                message: format!("missing required key `{key}`"),
            }),
        }
    }

    fn positive(&self, key: &str, default: Option<usize>) -> Result<usize> {
        let value = self.count(key, default)?;
        if value == 0 {
            let line = self.get(key).map_or(self.line, |(_, l)| l);
            return Err(Error::CfgParse {
                line,
                message: format!("`{key}` must be at least 1"),
            });
        }
        Ok(value)
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::CfgParse {
                line: line_no,
                message: format!("unterminated section header `{line}`"),
            })?;
            let kind = SectionKind::from_header(name.trim()).ok_or_else(|| Error::CfgParse {
                line: line_no,
                message: format!("unknown section `[{}]`", name.trim()),
            })?;
            sections.push(Section {
                kind,
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::CfgParse {
            line: line_no,
            message: format!("expected `key=value`, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::CfgParse {
                line: line_no,
                message: format!("expected `key=value`, got `{line}`"),
            });
        }
        let section = sections.last_mut().ok_or_else(|| Error::CfgParse {
            line: line_no,
            message: "key outside of any section".into(),
        })?;
        section
            .entries
            .push((key.to_string(), value.to_string(), line_no));
    }
    Ok(sections)
}

/// Parses darknet-style `[section]` / `key=value` text.
///
/// Route `layers` accept absolute indices (counted from the first layer after
/// `[net]`) and negative offsets relative to the route itself; both are
/// resolved to indices into [`NetConfig::layers`], where index 0 is the input.
pub fn parse_cfg(text: &str) -> Result<ParsedCfg> {
    let sections = split_sections(text)?;
    let mut warnings = Vec::new();

    let (net_section, layer_sections) = match sections.split_first() {
        Some((first, rest)) if first.kind == SectionKind::Net => (first, rest),
        Some((first, _)) => {
            return Err(Error::CfgParse {
                line: first.line,
                message: "the first section must be [net]".into(),
            })
        }
        None => {
            return Err(Error::CfgParse {
                line: 0,
                message: "no [net] section".into(),
            })
        }
    };

    for section in &sections {
        for (key, _, line) in &section.entries {
            if !section.kind.known_keys().contains(&key.as_str()) {
                warnings.push(format!("line {line}: ignoring key `{key}`"));
            }
        }
    }

    let input_shape = TensorShape::new(
        net_section.positive("width", None)?,
        net_section.positive("height", None)?,
        net_section.positive("channels", Some(3))?,
    );

    let mut layers = vec![LayerSpec::Input];
    for (position, section) in layer_sections.iter().enumerate() {
        let layer = match section.kind {
            SectionKind::Net => {
                return Err(Error::CfgParse {
                    line: section.line,
                    message: "duplicate [net] section".into(),
                })
            }
            SectionKind::Convolutional => LayerSpec::Convolutional {
                filters: section.positive("filters", None)?,
                kernel: section.positive("size", Some(1))?,
                stride: section.positive("stride", Some(1))?,
            },
            SectionKind::Maxpool => {
                let stride = section.positive("stride", Some(1))?;
                LayerSpec::Maxpool {
                    kernel: section.positive("size", Some(stride))?,
                    stride,
                }
            }
            SectionKind::Reorg => LayerSpec::Reorg {
                stride: section.positive("stride", Some(1))?,
            },
            SectionKind::Route => LayerSpec::Route {
                sources: parse_route_sources(section, position)?,
            },
            SectionKind::Region => {
                if position + 1 != layer_sections.len() {
                    return Err(Error::CfgParse {
                        line: section.line,
                        message: "[region] must be the last section".into(),
                    });
                }
                let anchors = match section.get("anchors") {
                    Some((value, line)) => parse_anchor_pairs::<f64>(value).map_err(|e| Error::CfgParse {
                        line,
                        message: e.to_string(),
                    })?,
                    None => Vec::new(),
                };
                LayerSpec::Region {
                    params: RegionParams {
                        num_anchors: section.positive("num", Some(1))?,
                        classes: section.count("classes", Some(20))?,
                        coords: section.positive("coords", Some(4))?,
                    },
                    anchors: anchors.iter().map(|a| (a.w, a.h)).collect(),
                }
            }
        };
        layers.push(layer);
    }

    Ok(ParsedCfg {
        net: NetConfig { input_shape, layers },
        warnings,
    })
}

/// `position` is the route's own index counted from the first layer after `[net]`.
fn parse_route_sources(section: &Section, position: usize) -> Result<Vec<usize>> {
    let (value, line) = section.get("layers").ok_or_else(|| Error::CfgParse {
        line: section.line,
        message: "route without `layers`".into(),
    })?;
    let mut sources = Vec::new();
    for token in value.split(',') {
        let token = token.trim();
        let offset: i64 = token.parse().map_err(|_| Error::CfgParse {
            line,
            message: format!("route index `{token}` is not an integer"),
        })?;
        let absolute = if offset < 0 {
            position as i64 + offset
        } else {
            offset
        };
        if absolute < 0 || absolute >= position as i64 {
            return Err(Error::CfgParse {
                line,
                message: format!(
                    "route index {offset} resolves to layer {absolute}, which is not an earlier layer"
                ),
            });
        }
        // Shift past the input entry.
        sources.push(absolute as usize + 1);
    }
    Ok(sources)
}

/// Writes the canonical text form: fixed key order, routes as negative
/// offsets, one blank line between sections.
pub fn serialize_cfg(net: &NetConfig) -> String {
    let mut out = String::new();
    let shape = net.input_shape;
    let _ = write!(
        out,
        "[net]\nwidth={}\nheight={}\nchannels={}\n",
        shape.width, shape.height, shape.channels
    );
    for (index, layer) in net.layers.iter().enumerate() {
        match layer {
            LayerSpec::Input => continue,
            LayerSpec::Convolutional {
                filters,
                kernel,
                stride,
            } => {
                let _ = write!(
                    out,
                    "\n[convolutional]\nfilters={filters}\nsize={kernel}\nstride={stride}\n"
                );
            }
            LayerSpec::Maxpool { kernel, stride } => {
                let _ = write!(out, "\n[maxpool]\nsize={kernel}\nstride={stride}\n");
            }
            LayerSpec::Route { sources } => {
                let offsets: Vec<String> = sources
                    .iter()
                    .map(|&s| (s as i64 - index as i64).to_string())
                    .collect();
                let _ = write!(out, "\n[route]\nlayers={}\n", offsets.join(","));
            }
            LayerSpec::Reorg { stride } => {
                let _ = write!(out, "\n[reorg]\nstride={stride}\n");
            }
            LayerSpec::Region { params, anchors } => {
                out.push_str("\n[region]\n");
                if !anchors.is_empty() {
                    let boxes: Vec<crate::decoder::AnchorBox<f64>> = anchors
                        .iter()
                        .map(|&(w, h)| crate::decoder::AnchorBox { w, h })
                        .collect();
                    let _ = writeln!(out, "anchors={}", format_anchor_pairs(&boxes));
                }
                let _ = write!(
                    out,
                    "classes={}\ncoords={}\nnum={}\n",
                    params.classes, params.coords, params.num_anchors
                );
            }
        }
    }
    out
}
