#!/usr/bin/env python3
"""Regenerates the golden fixtures.

Everything here is computed independently of the Rust code: tensors are
built by inverting the head equations on hand-placed target boxes, then
decoded, suppressed and scored with straightforward scalar loops.

    python3 fixtures/gen_golden.py
"""

import math
import random
import struct
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
GOLDEN = HERE / "golden"

IMAGE_W = IMAGE_H = 416.0
GRID = 26  # shallow head at 416
# Region anchors of yolov2-shallow.cfg, in grid cells.
ANCHORS = [(1.3221, 1.73145), (3.19275, 4.00944), (5.05587, 8.09892), (9.47112, 4.84053), (11.2364, 10.0071)]
CLASSES = 1
BACKGROUND_LOGIT = -8.0

DECODE_CONF = 0.2
NMS_IOU = 0.45
EVAL_IOU = 0.5
EVAL_CONF = 0.25
SMALL_MAX, MEDIUM_MAX = 0.001, 0.003

# image id -> (sequence, truths). Boxes are (cx, cy, w, h).
TRUTHS = {
    "img_a": ("seq1", [(100, 120, 12, 11), (250, 200, 20, 22), (330, 330, 40, 32)]),
    "img_b": ("seq1", [(150, 150, 16, 16), (300, 100, 30, 28)]),
    "img_c": ("seq2", []),
    "img_d": ("seq3", [(100, 300, 30, 30)]),
}

# image id -> predictions to plant as (cx, cy, w, h, confidence).
# img_d gets no tensor at all.
TARGETS = {
    "img_a": [
        (101.0, 119.0, 13.0, 11.0, 0.91),
        (251.5, 201.0, 19.0, 23.0, 0.84),
        (328.0, 331.0, 42.0, 31.0, 0.77),
        (326.0, 333.0, 41.0, 33.0, 0.52),  # duplicate, suppressed
        (60.0, 350.0, 18.0, 18.0, 0.43),  # false alarm
    ],
    "img_b": [
        (151.0, 149.0, 16.0, 17.0, 0.22),  # good box below the eval threshold
        (314.0, 100.0, 30.0, 28.0, 0.66),  # poorly localised
        (40.0, 40.0, 10.0, 10.0, 0.31),  # false alarm
    ],
    "img_c": [(200.0, 200.0, 25.0, 25.0, 0.58)],
}


def logit(p):
    return math.log(p / (1.0 - p))


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def cocentered_iou(a, b):
    inter = min(a[0], b[0]) * min(a[1], b[1])
    return inter / (a[0] * a[1] + b[0] * b[1] - inter)


def build_tensor(targets):
    per = 5 + CLASSES
    t = np.zeros((GRID, GRID, len(ANCHORS), per), dtype=np.float32)
    t[..., 4] = BACKGROUND_LOGIT
    used = set()
    for cx, cy, w, h, conf in targets:
        gx_f, gy_f = cx / IMAGE_W * GRID, cy / IMAGE_H * GRID
        gx, gy = int(gx_f), int(gy_f)
        w_cells, h_cells = w / IMAGE_W * GRID, h / IMAGE_H * GRID
        order = sorted(range(len(ANCHORS)), key=lambda a: -cocentered_iou((w_cells, h_cells), ANCHORS[a]))
        a = next(a for a in order if (gx, gy, a) not in used)
        used.add((gx, gy, a))
        t[gy, gx, a, 0] = logit(gx_f - gx)
        t[gy, gx, a, 1] = logit(gy_f - gy)
        t[gy, gx, a, 2] = math.log(w_cells / ANCHORS[a][0])
        t[gy, gx, a, 3] = math.log(h_cells / ANCHORS[a][1])
        t[gy, gx, a, 4] = logit(conf)
    return t


def write_tensor(path, t):
    with open(path, "wb") as f:
        f.write(b"YTN1")
        f.write(struct.pack("<I", t.ndim))
        f.write(struct.pack("<%dI" % t.ndim, *t.shape))
        f.write(t.astype("<f4").tobytes())


def decode(t):
    out = []
    for gy in range(t.shape[0]):
        for gx in range(t.shape[1]):
            for a, (aw, ah) in enumerate(ANCHORS):
                p = [float(v) for v in t[gy, gx, a]]
                logits = p[5:]
                top = max(logits)
                z = sum(math.exp(l - top) for l in logits)
                cls = logits.index(top)
                conf = sigmoid(p[4]) / z
                if conf < DECODE_CONF:
                    continue
                cx = (sigmoid(p[0]) + gx) / GRID * IMAGE_W
                cy = (sigmoid(p[1]) + gy) / GRID * IMAGE_H
                w = aw * math.exp(p[2]) / GRID * IMAGE_W
                h = ah * math.exp(p[3]) / GRID * IMAGE_H
                x0, x1 = max(cx - w / 2, 0.0), min(cx + w / 2, IMAGE_W)
                y0, y1 = max(cy - h / 2, 0.0), min(cy + h / 2, IMAGE_H)
                out.append(((x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0, cls, conf))
    return out


def iou(a, b):
    ax0, ax1, ay0, ay1 = a[0] - a[2] / 2, a[0] + a[2] / 2, a[1] - a[3] / 2, a[1] + a[3] / 2
    bx0, bx1, by0, by1 = b[0] - b[2] / 2, b[0] + b[2] / 2, b[1] - b[3] / 2, b[1] + b[3] / 2
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / ((ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter)


def rank_key(d):
    cx, cy, w, h, _cls, conf = d
    return (-conf, cx, cy, w, h)


def nms(dets):
    kept = []
    for d in sorted(dets, key=rank_key):
        scores = [iou(k, d) for k in kept if k[4] == d[4]]
        for s in scores:
            assert abs(s - NMS_IOU) > 1e-3, "borderline nms overlap"
        if all(s < NMS_IOU for s in scores):
            kept.append(d)
    return kept


def fmt_detection(image_id, d):
    cx, cy, w, h, cls, conf = d
    return "%s %d %.6f %.4f %.4f %.4f %.4f" % (image_id, cls, conf, cx, cy, w, h)


def match(dets, truths):
    """Greedy confidence-ordered matching; returns (det, truth) index pairs."""
    free = [True] * len(truths)
    pairs = []
    order = sorted(range(len(dets)), key=lambda i: rank_key(dets[i]))
    for i in order:
        best, best_iou = None, -1.0
        for t, tr in enumerate(truths):
            if not free[t] or tr[4] != dets[i][4]:
                continue
            v = iou(dets[i], tr)
            assert abs(v - EVAL_IOU) > 1e-3, "borderline match overlap"
            if v >= EVAL_IOU and v > best_iou:
                best, best_iou = t, v
        if best is not None:
            free[best] = False
            pairs.append((i, best))
    return pairs


def precision(tp, nd):
    return 1.0 if nd == 0 else tp / nd


def recall(tp, nt):
    return 1.0 if nt == 0 else tp / nt


def bucket(b):
    rel = b[2] * b[3] / (IMAGE_W * IMAGE_H)
    assert min(abs(rel - SMALL_MAX), abs(rel - MEDIUM_MAX)) > 1e-5, "borderline size"
    if rel <= SMALL_MAX:
        return "small"
    if rel <= MEDIUM_MAX:
        return "medium"
    return "large"


def evaluate(det_lines):
    dets = {}
    for line in det_lines:
        f = line.split()
        # cx cy w h class conf, parsed back from the printed text
        dets.setdefault(f[0], []).append((float(f[3]), float(f[4]), float(f[5]), float(f[6]), int(f[1]), float(f[2])))
    rows = []
    strata = {k: [0.0, 0.0, 0] for k in ("small", "medium", "large")}
    for image_id in sorted(TRUTHS):
        truths = [(cx, cy, w, h, 0) for cx, cy, w, h in TRUTHS[image_id][1]]
        d = [x for x in dets.get(image_id, []) if x[5] >= EVAL_CONF]
        for x in d:
            assert abs(x[5] - EVAL_CONF) > 1e-4
        pairs = match(d, truths)
        tp = len(pairs)
        rows.append((image_id, tp, len(d) - tp, len(truths) - tp, precision(tp, len(d)), recall(tp, len(truths))))

        sizes = [bucket(t) for t in truths]
        for name, acc in strata.items():
            kept = [x for i, x in enumerate(d) if not any(p[0] == i and sizes[p[1]] != name for p in pairs)]
            own = [t for t, s in zip(truths, sizes) if s == name]
            btp = len(match(kept, own))
            acc[0] += precision(btp, len(kept))
            acc[1] += recall(btp, len(own))
            acc[2] += len(own)

    n = len(rows)
    ap = sum(r[4] for r in rows) / n
    ar = sum(r[5] for r in rows) / n
    far = 1.0 - ap

    width = max(max(len(r[0]) for r in rows), len("image"))
    out = ["%-*s  %5s  %5s  %5s  %9s  %9s" % (width, "image", "tp", "fp", "fn", "precision", "recall")]
    for r in rows:
        out.append("%-*s  %5d  %5d  %5d  %9.4f  %9.4f" % (width, *r))
    out.append("")
    out.append("AP  %.4f  (per-image)" % ap)
    out.append("AR  %.4f" % ar)
    out.append("FAR %.4f" % far)
    out.append("")
    out.append("%-6s  %6s  %6s  %6s" % ("size", "truths", "mAP", "mAR"))
    for name, (p, r, t) in strata.items():
        out.append("%-6s  %6d  %6.4f  %6.4f" % (name, t, p / n, r / n))
    out.append("")
    out.append("ap_mode=per-image")
    out.append("images=%d" % n)
    out.append("tp=%d" % sum(r[1] for r in rows))
    out.append("fp=%d" % sum(r[2] for r in rows))
    out.append("fn=%d" % sum(r[3] for r in rows))
    out.append("ap=%.6f" % ap)
    out.append("ar=%.6f" % ar)
    out.append("far=%.6f" % far)
    for name, (p, r, t) in strata.items():
        out.append("map_%s=%.6f" % (name, p / n))
        out.append("mar_%s=%.6f" % (name, r / n))
        out.append("truths_%s=%d" % (name, t))
    known = set(TRUTHS)
    out.append("unknown_images=%d" % len([k for k in dets if k not in known]))
    return "\n".join(out) + "\n"


def annotation_lines(records):
    lines = []
    for image_id, (seq, w, h, boxes) in records.items():
        if not boxes:
            lines.append("%s %s %g %g" % (image_id, seq, w, h))
        for cx, cy, bw, bh in boxes:
            lines.append("%s %s %g %g 0 %s %s %s %s" % (image_id, seq, w, h, repr(cx), repr(cy), repr(bw), repr(bh)))
    return "\n".join(lines) + "\n"


def vedai_like():
    # Mean box 41.2 x 40.8 in 1024 x 1024; sizes alternate +-10% around the mean.
    rng = random.Random(2017)
    records = {}
    for i in range(12):
        boxes = []
        for j in range(6):
            s = 1.1 if j % 2 == 0 else 0.9
            boxes.append((round(80.0 + 150.0 * j + rng.uniform(-20, 20), 2), round(rng.uniform(100, 900), 2),
                          round(41.2 * s, 4), round(40.8 * s, 4)))
        records["vedai_%02d" % i] = ("vedai_%02d" % i, 1024, 1024, boxes)
    return records


def ten_sequences():
    records = {}
    for s in range(10):
        for f in range(4):
            records["clip%02d_f%02d" % (s, f)] = ("clip%02d" % s, 1600, 1200, [(800.0, 600.0, 55.6, 63.7)])
    return records


def mixed_sizes():
    # Cars, vans and trucks at a few ground sampling distances.
    rng = random.Random(44)
    shapes = [(14, 12), (22, 18), (30, 34), (48, 26), (60, 58)]
    records = {}
    for i in range(20):
        boxes = []
        for j in range(5):
            w, h = shapes[rng.randrange(len(shapes))]
            boxes.append((round(60.0 + 140.0 * j, 2), round(rng.uniform(60, 540), 2),
                          round(w * rng.uniform(0.85, 1.15), 2), round(h * rng.uniform(0.85, 1.15), 2)))
        records["mix_%02d" % i] = ("mix_%02d" % (i // 4), 800, 600, boxes)
    return records


def main():
    GOLDEN.mkdir(exist_ok=True)
    det_lines = []
    for image_id, targets in TARGETS.items():
        t = build_tensor(targets)
        write_tensor(GOLDEN / ("%s.ytn" % image_id), t)
        det_lines += [fmt_detection(image_id, d) for d in nms(decode(t))]
    (GOLDEN / "detections.txt").write_text("\n".join(det_lines) + "\n")

    truth_records = {k: (seq, IMAGE_W, IMAGE_H, boxes) for k, (seq, boxes) in TRUTHS.items()}
    (GOLDEN / "truths.txt").write_text(annotation_lines(truth_records))
    (GOLDEN / "report.txt").write_text(evaluate(det_lines))

    (HERE / "vedai_synthetic.txt").write_text(annotation_lines(vedai_like()))
    (HERE / "mixed_sizes.txt").write_text(annotation_lines(mixed_sizes()))
    (HERE / "sequences10.txt").write_text(annotation_lines(ten_sequences()))


if __name__ == "__main__":
    main()
