//! Layer tables for the standard and shallow YOLOv2 networks at 416 x 416:
//! `(layer, filters, kernel / stride, output size)`. The last shallow row
//! lists 125 filters as printed, although its output has 30 channels.

pub type TableRow = (&'static str, Option<usize>, Option<&'static str>, &'static str);

pub const STANDARD_NET: &[TableRow] = &[
    ("Input", None, None, "416 x 416 x 3"),
    ("Convolutional", Some(32), Some("3 x 3 / 1"), "416 x 416 x 32"),
    ("Max Pooling", None, Some("2 x 2 / 2"), "208 x 208 x 32"),
    ("Convolutional", Some(64), Some("3 x 3 / 1"), "208 x 208 x 64"),
    ("Max Pooling", None, Some("2 x 2 / 2"), "104 x 104 x 64"),
    ("Convolutional", Some(128), Some("3 x 3 / 1"), "104 x 104 x 128"),
    ("Convolutional", Some(64), Some("1 x 1 / 1"), "104 x 104 x 64"),
    ("Convolutional", Some(128), Some("3 x 3 / 1"), "104 x 104 x 128"),
    ("Max Pooling", None, Some("2 x 2 / 2"), "52 x 52 x 128"),
    ("Convolutional", Some(256), Some("3 x 3 / 1"), "52 x 52 x 256"),
    ("Convolutional", Some(128), Some("1 x 1 / 1"), "52 x 52 x 128"),
    ("Convolutional", Some(256), Some("3 x 3 / 1"), "52 x 52 x 256"),
    ("Max Pooling", None, Some("2 x 2 / 2"), "26 x 26 x 256"),
    ("Convolutional", Some(512), Some("3 x 3 / 1"), "26 x 26 x 512"),
    ("Convolutional", Some(256), Some("1 x 1 / 1"), "26 x 26 x 256"),
    ("Convolutional", Some(512), Some("3 x 3 / 1"), "26 x 26 x 512"),
    ("Convolutional", Some(256), Some("1 x 1 / 1"), "26 x 26 x 256"),
    ("Convolutional", Some(512), Some("3 x 3 / 1"), "26 x 26 x 512"),
    ("Max Pooling", None, Some("2 x 2 / 2"), "13 x 13 x 512"),
    ("Convolutional", Some(1024), Some("3 x 3 / 1"), "13 x 13 x 1024"),
    ("Convolutional", Some(512), Some("1 x 1 / 1"), "13 x 13 x 512"),
    ("Convolutional", Some(1024), Some("3 x 3 / 1"), "13 x 13 x 1024"),
    ("Convolutional", Some(1024), Some("1 x 1 / 1"), "13 x 13 x 1024"),
    ("Convolutional", Some(1024), Some("3 x 3 / 1"), "13 x 13 x 1024"),
    ("Convolutional", Some(1024), Some("3 x 3 / 1"), "13 x 13 x 1024"),
    ("Convolutional", Some(1024), Some("3 x 3 / 1"), "13 x 13 x 1024"),
    ("Route", None, None, "26 x 26 x 512"),
    ("Convolutional", Some(64), Some("1 x 1 / 1"), "26 x 26 x 64"),
    ("Reorg", None, None, "13 x 13 x 256"),
    ("Route", None, None, "13 x 13 x 1280"),
    ("Convolutional", Some(1024), Some("3 x 3 / 1"), "13 x 13 x 1024"),
    ("Convolutional", Some(125), Some("1 x 1 / 1"), "13 x 13 x 125"),
];

pub const SHALLOW_NET: &[TableRow] = &[
    ("Input", None, None, "416 x 416 x 3"),
    ("Convolutional", Some(32), Some("3 x 3 / 1"), "416 x 416 x 32"),
    ("Max Pooling", None, Some("2 x 2 / 2"), "208 x 208 x 32"),
    ("Convolutional", Some(64), Some("3 x 3 / 1"), "208 x 208 x 64"),
    ("Max Pooling", None, Some("2 x 2 / 2"), "104 x 104 x 64"),
    ("Convolutional", Some(128), Some("3 x 3 / 1"), "104 x 104 x 128"),
    ("Convolutional", Some(64), Some("1 x 1 / 1"), "104 x 104 x 64"),
    ("Convolutional", Some(128), Some("3 x 3 / 1"), "104 x 104 x 128"),
    ("Max Pooling", None, Some("2 x 2 / 2"), "52 x 52 x 128"),
    ("Convolutional", Some(256), Some("3 x 3 / 1"), "52 x 52 x 256"),
    ("Convolutional", Some(128), Some("1 x 1 / 1"), "52 x 52 x 128"),
    ("Convolutional", Some(256), Some("3 x 3 / 1"), "52 x 52 x 256"),
    ("Max Pooling", None, Some("2 x 2 / 2"), "26 x 26 x 256"),
    ("Convolutional", Some(512), Some("3 x 3 / 1"), "26 x 26 x 512"),
    ("Convolutional", Some(256), Some("1 x 1 / 1"), "26 x 26 x 256"),
    ("Convolutional", Some(512), Some("3 x 3 / 1"), "26 x 26 x 512"),
    ("Convolutional", Some(256), Some("1 x 1 / 1"), "26 x 26 x 256"),
    ("Convolutional", Some(512), Some("3 x 3 / 1"), "26 x 26 x 512"),
    ("Route", None, None, "52 x 52 x 256"),
    ("Convolutional", Some(64), Some("1 x 1 / 1"), "52 x 52 x 64"),
    ("Reorg", None, None, "26 x 26 x 256"),
    ("Route", None, None, "26 x 26 x 768"),
    ("Convolutional", Some(1024), Some("3 x 3 / 1"), "26 x 26 x 1024"),
    ("Convolutional", Some(125), Some("1 x 1 / 1"), "26 x 26 x 30"),
];
