"""Regenerates everything under fixtures/ from fixed seeds.

    python tests/oracle/make_fixtures.py [--root fixtures]

Models are trained with plain full-batch gradient descent in numpy, scored by
reference_scorer and the math kernels are certified against mpmath. Output is
deterministic: running twice gives byte-identical files.
"""
import argparse
import hashlib
import json
import math
import os
import struct

import mpmath
import numpy as np

import canonical_ref as cr
import detmath_ref as dm
import reference_scorer as rs

SEED = 7
EPOCHS = 500
LR = 0.1
GRID_POINTS = 1000
MAX_ULP = 2

DEMO_INPUT = [-0.166667, 0.416667, -0.0169491, -0.0833333]

VEC = {"type": "array", "items": "double"}
MAT = {"type": "array", "items": VEC}
LAYER = {
    "type": "record",
    "name": "Layer",
    "fields": [
        {"name": "weights", "type": MAT},
        {"name": "bias", "type": VEC},
        {"name": "activation", "type": "string"},
    ],
}
MLP_OUT = {
    "type": "record",
    "name": "Prediction",
    "fields": [
        {"name": "prediction", "type": "double"},
        {"name": "probabilities", "type": VEC},
    ],
}


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def write(root, rel, text):
    path = os.path.join(root, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        f.write(text)
        if not text.endswith("\n"):
            f.write("\n")


def flist(a):
    return [float(x) for x in np.asarray(a).ravel()]


def fmat(a):
    return [flist(r) for r in np.asarray(a)]


# --- data and training -------------------------------------------------------

def blobs(k, seed, n_per=60):
    rng = np.random.RandomState(seed)
    centers = rng.uniform(-1.0, 1.0, size=(k, 4))
    xs, ys = [], []
    for c in range(k):
        xs.append(centers[c] + 0.25 * rng.randn(n_per, 4))
        ys.append(np.full(n_per, c))
    return np.vstack(xs), np.concatenate(ys)


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def train_logistic(x, y, seed):
    rng = np.random.RandomState(seed + 1)
    w = 0.01 * rng.randn(x.shape[1])
    b = 0.0
    for _ in range(EPOCHS):
        p = sigmoid(x @ w + b)
        g = p - y
        w = w - LR * (x.T @ g) / len(y)
        b = b - LR * g.mean()
    acc = float(((sigmoid(x @ w + b) > 0.5) == y).mean())
    return w, b, acc


def train_mlp(x, y, seed, hidden=5, k=3):
    rng = np.random.RandomState(seed + 2)
    w1 = rng.randn(hidden, x.shape[1]) * 0.5
    b1 = np.zeros(hidden)
    w2 = rng.randn(k, hidden) * 0.5
    b2 = np.zeros(k)
    onehot = np.eye(k)[y]
    for _ in range(EPOCHS):
        h = sigmoid(x @ w1.T + b1)
        z = h @ w2.T + b2
        z = z - z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        dz = (p - onehot) / len(y)
        dw2 = dz.T @ h
        db2 = dz.sum(axis=0)
        dh = dz @ w2 * h * (1 - h)
        dw1 = dh.T @ x
        db1 = dh.sum(axis=0)
        w1 -= LR * dw1
        b1 -= LR * db1
        w2 -= LR * dw2
        b2 -= LR * db2
        if not np.all(np.isfinite(w1)) or not np.all(np.isfinite(w2)):
            raise RuntimeError("NonFiniteLoss")
    h = sigmoid(x @ w1.T + b1)
    acc = float(((h @ w2.T + b2).argmax(axis=1) == y).mean())
    return (w1, b1, w2, b2), acc


# --- export ------------------------------------------------------------------

def param_hash(*arrays):
    h = hashlib.sha256()
    for a in arrays:
        for v in np.asarray(a, dtype=np.float64).ravel():
            h.update(struct.pack("<d", float(v)))
    return h.hexdigest()[:12]


def identity_doc():
    return {"name": "identity", "version": 1, "method": "map", "input": "double", "output": "double", "action": "input"}


def linear_doc(w, b):
    return {
        "name": "linear_" + param_hash(w, [b]),
        "version": 1,
        "method": "map",
        "input": VEC,
        "output": "double",
        "cells": {"w": {"type": VEC, "init": flist(w)}, "b": {"type": "double", "init": float(b)}},
        "action": {"+": [{"la.dot": [{"cell": "w"}, "input"]}, {"cell": "b"}]},
    }


def logistic_doc(w, b, name=None):
    return {
        "name": name or "logreg_" + param_hash(w, [b]),
        "version": 1,
        "method": "map",
        "input": VEC,
        "output": "double",
        "cells": {"w": {"type": VEC, "init": flist(w)}, "b": {"type": "double", "init": float(b)}},
        "action": {"m.link.logit": {"+": [{"la.dot": [{"cell": "w"}, "input"]}, {"cell": "b"}]}},
    }


def mlp_doc(params):
    w1, b1, w2, b2 = params
    layers = [
        {"weights": fmat(w1), "bias": flist(b1), "activation": "logit"},
        {"weights": fmat(w2), "bias": flist(b2), "activation": "softmax"},
    ]
    return {
        "name": "mlpc_" + param_hash(w1, b1, w2, b2),
        "version": 1,
        "doc": "4-5-3 multilayer perceptron classifier",
        "method": "map",
        "input": VEC,
        "output": MLP_OUT,
        "cells": {"layers": {"type": {"type": "array", "items": LAYER}, "init": layers}},
        "action": [
            {"let": {"probs": {"model.neural.simpleLayers": ["input", {"cell": "layers"}]}}},
            {
                "new": {"prediction": {"cast.double": {"a.argmax": "probs"}}, "probabilities": "probs"},
                "type": MLP_OUT,
            },
        ],
    }


MALFORMED = {
    "malformed_unknown_builtin.json": {
        "name": "bad_builtin", "input": "double", "output": "double", "action": {"m.tanh": "input"}},
    "malformed_output_type.json": {
        "name": "bad_output", "input": VEC, "output": "double", "action": {"m.link.softmax": "input"}},
}


# --- oracle grids ------------------------------------------------------------

def grid_inputs(rng, dim, n):
    out = []
    for i in range(n):
        scale = 1.0 if i % 10 < 7 else (8.0 if i % 10 < 9 else 60.0)
        v = rng.normal(0.0, scale, size=dim)
        out.append(float(v[0]) if dim == 0 else flist(v))
    return out


def grid(doc, inputs):
    rows = []
    for x in inputs:
        xh = rs.hexbits(x) if isinstance(x, float) else [rs.hexbits(v) for v in x]
        try:
            out, cost = rs.score(doc, x)
            rows.append({"input": xh, "output": rs.to_bits(out), "cost": cost})
        except rs.ScoreError as exc:
            rows.append({"input": xh, "error": exc.kind})
    return rows


# --- math goldens ------------------------------------------------------------

mpmath.mp.prec = 200


def ulp_dist(a, b):
    def key(x):
        u = rs.bits(x)
        return -(u & ((1 << 63) - 1)) if u >> 63 else u
    return abs(key(a) - key(b))


def nearest(m):
    f = float(m)
    if f != 0.0 and abs(f) < 2.2250738585072014e-308:
        raise ValueError("subnormal reference")
    return f


def ref_exp(x):
    return nearest(mpmath.exp(mpmath.mpf(x)))


def ref_ln(x):
    return nearest(mpmath.log(mpmath.mpf(x)))


def ref_logit(x):
    return nearest(1 / (1 + mpmath.exp(-mpmath.mpf(x))))


def ref_softmax(v):
    es = [mpmath.exp(mpmath.mpf(x)) for x in v]
    s = mpmath.fsum(es)
    return [nearest(e / s) for e in es]


def golden_points(rng):
    exp_pts = [0.0, 1.0, -1.0, 0.5, -0.5, 1e-10, -1e-10, 709.0, -708.0, math.log(2), 0.34657359027997264, 20.0, -20.0]
    exp_pts += [float(x) for x in rng.uniform(-700, 700, 24)] + [float(x) for x in rng.uniform(-2, 2, 23)]
    ln_pts = [1.0, 2.0, 0.5, math.e, 10.0, 1e-300, 1e300, 5e-324, 1.7976931348623157e308, 1 + 2**-52, 1 - 2**-53, 0.7071067811865476]
    ln_pts += [float(2.0 ** e) for e in rng.uniform(-1000, 1000, 24)] + [float(x) for x in rng.uniform(0.5, 2.0, 24)]
    logit_pts = [0.0, 1.0, -1.0, 36.0, 37.0, 40.0, -40.0, -700.0, 1e-8, -1e-8]
    logit_pts += [float(x) for x in rng.uniform(-30, 30, 30)] + [float(x) for x in rng.uniform(-3, 3, 20)]
    sm_pts = [[0.0, 0.0], [1.0, 2.0, 3.0], [1000.0, 1000.0], [-5.0, 5.0], [0.1, 0.7, 0.2]]
    for _ in range(50):
        n = int(rng.randint(2, 7))
        sm_pts.append(flist(rng.normal(0, 4, n)))
    return exp_pts, ln_pts, logit_pts, sm_pts


def certify_scalar(pts, port, ref):
    rows = []
    for x in pts:
        y = port(x)
        r = ref(x)
        d = ulp_dist(y, r)
        if d > MAX_ULP:
            raise RuntimeError(f"{port.__name__}({x!r}) off by {d} ulp")
        rows.append({"x": rs.hexbits(x), "y": rs.hexbits(y), "ref": rs.hexbits(r), "ulp": d})
    return rows


def math_golden(rng):
    exp_pts, ln_pts, logit_pts, sm_pts = golden_points(rng)
    out = {
        "exp": certify_scalar(exp_pts, dm.exp, ref_exp),
        "ln": certify_scalar(ln_pts, dm.ln, ref_ln),
        "logit": certify_scalar(logit_pts, dm.logit, ref_logit),
        "softmax": [],
    }
    for v in sm_pts:
        y = dm.softmax(v)
        r = ref_softmax(v)
        d = max(ulp_dist(a, b) for a, b in zip(y, r))
        if d > MAX_ULP:
            raise RuntimeError(f"softmax({v!r}) off by {d} ulp")
        out["softmax"].append({"x": [rs.hexbits(a) for a in v], "y": [rs.hexbits(a) for a in y],
                               "ref": [rs.hexbits(a) for a in r], "ulp": d})
    return out


# --- contracts and chain fixtures -------------------------------------------

def scoring_contract(model_text):
    return (
        "// Scores the four features packed in the transaction data and logs the class.\n"
        f"const modelJson = '''{model_text}''';\n"
        "\n"
        "on receive(sender, action, coins, asset, data) {\n"
        "  let model = createModel(\"PFA\", modelJson);\n"
        "  let input = unpackF64(data);\n"
        "  let sc = score(model, input);\n"
        "  log(\"\" + sc.prediction);\n"
        "}\n"
    )


def pack(v):
    return struct.pack("<%dd" % len(v), *v).hex()


def sim_config(seed, latency, extra_inputs):
    script = [
        {"tick": 0, "node": 0, "tx": {"sender": 1, "receiver": 0, "action": 1, "sourceFile": "../contracts/score_demo.qs"}},
        {"tick": 2, "node": 1, "tx": {"sender": 2, "receiver": 3, "coins": "5.25"}},
        {"tick": 31, "node": 1, "tx": {"sender": 2, "receiver": 5, "coins": "1", "dataHex": pack(DEMO_INPUT)}},
        {"tick": 32, "node": 2, "tx": {"sender": 3, "receiver": 5, "dataHex": pack(extra_inputs[0])}},
        {"tick": 33, "node": 3, "tx": {"sender": 4, "receiver": 5, "dataHex": pack(extra_inputs[1])}},
        {"tick": 44, "node": 0, "tx": {"sender": 1, "receiver": 5, "asset": {"assetId": "GOLD", "amount": "10"}}},
        {"tick": 47, "node": 3, "tx": {"sender": 4, "receiver": 1, "coins": "100"}},
        {"tick": 52, "node": 2, "tx": {"sender": 3, "receiver": 5, "coins": "0.5", "dataHex": pack(extra_inputs[2])}},
    ]
    return {
        "nodeCount": 4,
        "blocks": 8,
        "seed": seed,
        "latency": latency,
        "blockInterval": 10,
        "genesisFile": "../genesis/demo.json",
        "txScript": script,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--root", default=os.path.join(os.path.dirname(__file__), "..", "..", "fixtures"))
    root = ap.parse_args().root

    x2, y2 = blobs(2, SEED)
    w, b, acc_lr = train_logistic(x2, y2, SEED)
    x3, y3 = blobs(3, SEED)
    mlp, acc_mlp = train_mlp(x3, y3, SEED)
    if acc_lr < 0.9 or acc_mlp < 0.9:
        raise RuntimeError(f"training accuracy too low: {acc_lr} {acc_mlp}")

    docs = {
        "identity.json": identity_doc(),
        "linear.json": linear_doc([1.0, 2.0, 3.0], 0.5),
        "logistic.json": logistic_doc(w, b),
        "logistic_zero.json": logistic_doc(np.zeros(4), 0.0, name="logreg_zero"),
        "mlp_demo.json": mlp_doc(mlp),
    }
    docs.update(MALFORMED)
    for name, doc in docs.items():
        write(root, "models/" + name, dumps(doc))

    rng = np.random.RandomState(20240611)
    grids = {
        "identity": ("identity.json", [float(v) for v in rng.normal(0, 1e3, GRID_POINTS)]),
        "linear": ("linear.json", grid_inputs(rng, 3, GRID_POINTS)),
        "logistic": ("logistic.json", grid_inputs(rng, 4, GRID_POINTS)),
        "mlp_demo": ("mlp_demo.json", grid_inputs(rng, 4, GRID_POINTS)),
    }
    for name, (model, inputs) in grids.items():
        rows = grid(docs[model], inputs)
        write(root, f"oracle/grid_{name}.json", json.dumps({"model": "models/" + model, "rows": rows}))

    write(root, "oracle/math_golden.json", json.dumps(math_golden(np.random.RandomState(99)), indent=1))

    out, cost = rs.score(docs["mlp_demo.json"], DEMO_INPUT)
    demo_case = {
        "input": [rs.hexbits(v) for v in DEMO_INPUT],
        "dataHex": pack(DEMO_INPUT),
        "prediction": rs.hexbits(out["prediction"]),
        "probabilities": [rs.hexbits(v) for v in out["probabilities"]],
        "log": repr(out["prediction"]),
        "cost": cost,
        "trainingAccuracy": {"logistic": acc_lr, "mlp": acc_mlp},
    }
    write(root, "oracle/score_demo.json", json.dumps(demo_case, indent=1))

    write(root, "contracts/score_demo.qs", scoring_contract(dumps(docs["mlp_demo.json"])))
    genesis = {
        "accounts": [{"id": i, "coins": "1000000"} for i in range(1, 5)],
        "assets": [{"assetId": "GOLD", "issuance": "1000", "holder": 1}],
    }
    write(root, "genesis/demo.json", json.dumps(genesis, indent=1))
    sample_tx = {"sender": 1, "receiver": 5, "action": 3, "coins": "1.5", "asset": {"assetId": "GOLD", "amount": "2"},
                 "dataHex": pack(DEMO_INPUT), "seq": 7}
    pins = {"genesis": genesis, "sampleTx": sample_tx, "sampleTxHex": cr.encode_tx(sample_tx).hex()}
    pins.update(cr.genesis_pins(genesis))
    write(root, "oracle/canonical.json", json.dumps(pins, indent=1))
    extra = [flist(rng.normal(0, 1, 4)) for _ in range(3)]
    write(root, "sim/demo.json", json.dumps(sim_config(42, [1, 5], extra), indent=1))


if __name__ == "__main__":
    main()
