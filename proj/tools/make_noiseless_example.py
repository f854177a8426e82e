#!/usr/bin/env python3
"""Writes the noiseless example dataset used by the CLI tests.

The panel is an exact three-factor model without measurement noise; the
response is an exact linear function of the factors. The expected prediction
is computed here by a dense numpy pipeline (full eigendecomposition of the
Gram matrix, least squares on the leading scores), independent of the C++
code.
"""

import argparse
import pathlib

import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", type=pathlib.Path)
    ap.add_argument("--seed", type=int, default=20240607)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n_train, p, order = 40, 16, 3
    grid = np.linspace(0.0, 1.0, p)
    basis = np.stack([np.ones(p), np.sqrt(2) * np.sin(2 * np.pi * grid),
                      np.sqrt(2) * np.cos(2 * np.pi * grid)], axis=1)
    lam = np.array([1.0, 0.25, 1.0 / 9.0])
    f = rng.standard_normal((n_train + 1, order))
    mean = 1.0 + 0.5 * np.sin(2 * np.pi * grid)
    z = mean + f @ (basis * np.sqrt(lam)).T
    b = np.array([1.2, -0.8, 0.5])
    a = 0.75
    y = a + f @ b

    # Dense oracle pipeline.
    n = n_train + 1
    zc = z - z.mean(axis=0)
    gram = zc @ zc.T / n
    vals, vecs = np.linalg.eigh(gram)
    top = np.argsort(vals)[::-1][:order]
    scores = np.sqrt(n) * vecs[:, top]
    design = np.column_stack([np.ones(n_train), scores[:n_train]])
    coef, *_ = np.linalg.lstsq(design, y[:n_train], rcond=None)
    prediction = coef[0] + scores[n_train] @ coef[1:]

    out = args.outdir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "panel.csv", "w") as fh:
        fh.write(",".join(repr(float(s)) for s in grid) + "\n")
        for row in z:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    with open(out / "response.csv", "w") as fh:
        fh.write("y\n")
        for v in y[:n_train]:
            fh.write(repr(float(v)) + "\n")
    with open(out / "expected.csv", "w") as fh:
        fh.write("name,value\n")
        fh.write(f"prediction,{float(prediction)!r}\n")
        fh.write(f"oracle,{float(y[n_train])!r}\n")
        fh.write(f"order,{order}\n")


if __name__ == "__main__":
    main()
