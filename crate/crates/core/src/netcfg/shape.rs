use super::{LayerSpec, NetConfig, TensorShape};
use crate::error::{Error, Result};

/// Output shape of every entry in `net.layers`, the input included.
///
/// Convolutions are same-padded (`ceil(dim / stride)`), maxpools
/// floor-divide, reorg is space-to-depth, route concatenates channels and a
/// region layer passes its input through.
pub fn propagate_shapes(net: &NetConfig) -> Result<Vec<TensorShape>> {
    let mut shapes: Vec<TensorShape> = Vec::with_capacity(net.layers.len());
    for (index, layer) in net.layers.iter().enumerate() {
        let fail = |message: String| Error::Shape {
            layer: index,
            message,
        };
        let previous = shapes.last().copied();
        let shape = match layer {
            LayerSpec::Input => {
                if index != 0 {
                    return Err(fail("input layer must come first".into()));
                }
                net.input_shape
            }
            _ if previous.is_none() => {
                return Err(fail("the first layer must be the input".into()));
            }
            LayerSpec::Convolutional { filters, stride, .. } => {
                let prev = previous.unwrap();
                TensorShape::new(
                    prev.width.div_ceil(*stride),
                    prev.height.div_ceil(*stride),
                    *filters,
                )
            }
            LayerSpec::Maxpool { stride, .. } => {
                let prev = previous.unwrap();
                TensorShape::new(prev.width / stride, prev.height / stride, prev.channels)
            }
            LayerSpec::Reorg { stride } => {
                let prev = previous.unwrap();
                if prev.width % stride != 0 || prev.height % stride != 0 {
                    return Err(fail(format!(
                        "reorg stride {stride} does not divide {}x{}",
                        prev.width, prev.height
                    )));
                }
                TensorShape::new(
                    prev.width / stride,
                    prev.height / stride,
                    prev.channels * stride * stride,
                )
            }
            LayerSpec::Route { sources } => {
                let mut merged: Option<TensorShape> = None;
                for &source in sources {
                    let src = *shapes
                        .get(source)
                        .ok_or_else(|| fail(format!("route source {source} is not an earlier layer")))?;
                    merged = Some(match merged {
                        None => src,
                        Some(acc) if acc.width == src.width && acc.height == src.height => {
                            TensorShape::new(acc.width, acc.height, acc.channels + src.channels)
                        }
                        Some(acc) => {
                            return Err(fail(format!(
                                "route sources disagree on spatial size: {}x{} vs {}x{}",
                                acc.width, acc.height, src.width, src.height
                            )))
                        }
                    });
                }
                merged.ok_or_else(|| fail("route without sources".into()))?
            }
            LayerSpec::Region { .. } => previous.unwrap(),
        };
        if shape.width == 0 || shape.height == 0 || shape.channels == 0 {
            return Err(fail(format!("{} produces an empty tensor", layer.kind_name())));
        }
        shapes.push(shape);
    }
    Ok(shapes)
}

/// Spatial size of the last layer: the detection grid.
pub fn grid_size(net: &NetConfig) -> Result<(usize, usize)> {
    let shapes = propagate_shapes(net)?;
    let last = shapes.last().expect("input shape always present");
    Ok((last.width, last.height))
}
