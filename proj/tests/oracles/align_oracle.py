#!/usr/bin/env python3
# Copyright 2026 The seedalign Authors
# SPDX-License-Identifier: Apache-2.0
"""Independent numpy/scipy reimplementation of pairwise SAE alignment.

Reads two checkpoints and writes one row per latent of the first:
latent, enc_counterpart, dec_counterpart, cos_enc, cos_dec, max_cos_enc,
max_cos_dec, shared.

The frozen inputs in tests/data were produced with

  seedalign gen-synthetic --n-true 32 --dim 16 --samples 5000 --seed 21 --out-dir data
  seedalign sweep --data data/activations.actv --latents 64 --ks 4 --steps 2000 \
      --seeds 0 1 --out-dir sweep

Usage: align_oracle.py A.ckpt B.ckpt OUT.csv [tau]
"""

import sys

import numpy as np
from scipy.optimize import linear_sum_assignment


def read_checkpoint(path):
    raw = open(path, "rb").read()
    end = raw.index(b"\nend\n")
    header = {}
    for line in raw[:end].decode().splitlines()[1:]:
        key, _, value = line.partition(" ")
        header[key] = value
    m, d = int(header["latents"]), int(header["dim"])
    data = np.frombuffer(raw[end + 5:], dtype="<f8")
    w_enc = data[: m * d].reshape(m, d)
    w_dec = data[m * d + m: 2 * m * d + m].reshape(m, d)
    return w_enc, w_dec


def cosine(a, b):
    a = a / np.linalg.norm(a, axis=1, keepdims=True)
    b = b / np.linalg.norm(b, axis=1, keepdims=True)
    return np.clip(a @ b.T, -1.0, 1.0)


def main():
    a_path, b_path, out_path = sys.argv[1:4]
    tau = float(sys.argv[4]) if len(sys.argv) > 4 else 0.7
    ea, da = read_checkpoint(a_path)
    eb, db = read_checkpoint(b_path)
    s_enc, s_dec = cosine(ea, eb), cosine(da, db)
    _, enc = linear_sum_assignment(s_enc, maximize=True)
    _, dec = linear_sum_assignment(s_dec, maximize=True)
    with open(out_path, "w") as f:
        f.write("latent,enc_counterpart,dec_counterpart,cos_enc,cos_dec,"
                "max_cos_enc,max_cos_dec,shared\n")
        for i in range(len(enc)):
            ce, cd = s_enc[i, enc[i]], s_dec[i, dec[i]]
            shared = int(enc[i] == dec[i] and ce >= tau and cd >= tau)
            f.write(f"{i},{enc[i]},{dec[i]},{float(ce)!r},{float(cd)!r},"
                    f"{float(s_enc[i].max())!r},{float(s_dec[i].max())!r},{shared}\n")


if __name__ == "__main__":
    main()
