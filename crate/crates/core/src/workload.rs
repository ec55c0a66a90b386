//! CNN layer descriptors and their lowering to GEMM shapes.
//!
//! Topologies arrive as CSV in the usual accelerator-simulator layer format
//! (one row per layer: name, IFMap extent, filter extent, channels, filter
//! count, stride, optional padding). Each convolution is lowered with
//! im2col: the output pixels become GEMM rows, the flattened receptive
//! field becomes the inner dimension, and the filters become columns.
//! Fully-connected layers are just 1x1 convolutions on a 1x1 input.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// One convolution (or FC) layer as read from a topology file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerDescriptor {
    pub name: String,
    pub ifmap_h: u32,
    pub ifmap_w: u32,
    pub filter_h: u32,
    pub filter_w: u32,
    pub channels: u32,
    pub num_filters: u32,
    pub stride: u32,
    pub padding: u32,
}

impl LayerDescriptor {
    /// Check the descriptor for values the lowering cannot digest.
    pub fn validate(&self) -> Result<()> {
        let subject = format!("layer {:?}", self.name);
        let positive = [
            (self.ifmap_h, "IFMapH"),
            (self.ifmap_w, "IFMapW"),
            (self.filter_h, "FilterH"),
            (self.filter_w, "FilterW"),
            (self.channels, "Channels"),
            (self.num_filters, "NumFilters"),
            (self.stride, "Stride"),
        ];
        for (value, field) in positive {
            if value == 0 {
                return Err(Error::validation(&subject, format!("{field} must be >= 1")));
            }
        }
        if self.filter_h > self.ifmap_h + 2 * self.padding
            || self.filter_w > self.ifmap_w + 2 * self.padding
        {
            return Err(Error::validation(
                &subject,
                format!(
                    "filter {}x{} does not fit the padded input {}x{}",
                    self.filter_h,
                    self.filter_w,
                    self.ifmap_h + 2 * self.padding,
                    self.ifmap_w + 2 * self.padding
                ),
            ));
        }
        Ok(())
    }

    /// Spatial output extent (rows, cols) of the convolution.
    pub fn output_dims(&self) -> (u32, u32) {
        let out = |input: u32, filter: u32| {
            (input + 2 * self.padding - filter) / self.stride + 1
        };
        (
            out(self.ifmap_h, self.filter_h),
            out(self.ifmap_w, self.filter_w),
        )
    }
}

/// GEMM dimensions produced by im2col: `t_rows x k_inner` input patches
/// against a `k_inner x m_cols` filter matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GemmShape {
    /// Output pixels (one GEMM row per output spatial position).
    pub t_rows: usize,
    /// Flattened receptive field: filter_h * filter_w * channels.
    pub k_inner: usize,
    /// Filters (one GEMM column per output channel).
    pub m_cols: usize,
}

impl GemmShape {
    pub fn new(t_rows: usize, k_inner: usize, m_cols: usize) -> Self {
        GemmShape {
            t_rows,
            k_inner,
            m_cols,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_rows == 0 || self.k_inner == 0 || self.m_cols == 0 {
            return Err(Error::validation(
                "gemm shape",
                format!("all dimensions must be >= 1, got {self}"),
            ));
        }
        Ok(())
    }

    /// Total multiply-accumulate count of the GEMM.
    pub fn macs(&self) -> u64 {
        self.t_rows as u64 * self.k_inner as u64 * self.m_cols as u64
    }
}

impl fmt::Display for GemmShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.t_rows, self.k_inner, self.m_cols)
    }
}

/// Lower a layer to its im2col GEMM shape.
pub fn lower_to_gemm(layer: &LayerDescriptor) -> Result<GemmShape> {
    layer.validate()?;
    let (e_h, e_w) = layer.output_dims();
    Ok(GemmShape {
        t_rows: e_h as usize * e_w as usize,
        k_inner: layer.filter_h as usize * layer.filter_w as usize * layer.channels as usize,
        m_cols: layer.num_filters as usize,
    })
}

/// An ordered list of layers making up one network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub model_name: String,
    pub layers: Vec<LayerDescriptor>,
}

/// Parse a topology CSV. Expects a header row; skips blank lines and `#`
/// comments; tolerates trailing commas; the padding column is optional and
/// defaults to 0. Layer names must be unique.
pub fn parse_topology(source: &str, model_name: impl Into<String>) -> Result<Topology> {
    let model_name = model_name.into();
    let mut layers: Vec<LayerDescriptor> = Vec::new();
    let mut seen_names: HashSet<String> = HashSet::new();
    let mut header_seen = false;

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }

        let mut fields: Vec<&str> = line.split(',').map(str::trim).collect();
        while fields.len() > 1 && fields.last() == Some(&"") {
            fields.pop();
        }
        if fields.len() != 8 && fields.len() != 9 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 8 or 9 columns, got {}", fields.len()),
            });
        }

        let name = fields[0];
        if name.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "layer name is empty".into(),
            });
        }
        let num = |index: usize, field: &str| -> Result<u32> {
            fields[index].parse::<u32>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("{field} is not a non-negative integer: {:?}", fields[index]),
            })
        };

        let layer = LayerDescriptor {
            name: name.to_string(),
            ifmap_h: num(1, "IFMapH")?,
            ifmap_w: num(2, "IFMapW")?,
            filter_h: num(3, "FilterH")?,
            filter_w: num(4, "FilterW")?,
            channels: num(5, "Channels")?,
            num_filters: num(6, "NumFilters")?,
            stride: num(7, "Stride")?,
            padding: if fields.len() == 9 { num(8, "Padding")? } else { 0 },
        };
        layer.validate()?;
        if !seen_names.insert(layer.name.clone()) {
            return Err(Error::validation(
                format!("layer {:?}", layer.name),
                "duplicate layer name",
            ));
        }
        layers.push(layer);
    }

    if layers.is_empty() {
        return Err(Error::EmptyTopology(format!(
            "{model_name:?} has no layer rows"
        )));
    }
    Ok(Topology { model_name, layers })
}

/// Canonical CSV form of a topology (always writes the padding column).
/// `parse_topology(serialize_topology(t))` reproduces `t` exactly.
pub fn serialize_topology(topology: &Topology) -> String {
    let mut out = String::from("Name,IFMapH,IFMapW,FilterH,FilterW,Channels,NumFilters,Stride,Padding\n");
    for layer in &topology.layers {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            layer.name,
            layer.ifmap_h,
            layer.ifmap_w,
            layer.filter_h,
            layer.filter_w,
            layer.channels,
            layer.num_filters,
            layer.stride,
            layer.padding
        ));
    }
    out
}
