"""Plain-text dump of standard-form conic problems in SDPA sparse format.

The standard form here is

    minimize c'x  subject to  A x = b,  x in K,

which is the dual side of an SDPA problem: with Y the block-diagonal
matrix holding x, the file encodes

    maximize Tr(F0 Y)  subject to  Tr(F_i Y) = c_i,  Y >= 0

with F0 = -C, F_i = A_i and c_sdpa = b. The nonnegative part of K becomes a
diagonal block (negative size in the block-structure line), and every PSD
block keeps its own size. Only upper-triangular entries are written.
"""

from __future__ import annotations

import numpy as np

from .cones import Cone, smat, svec


def _block_entries(vec, cone: Cone):
    """Yield (block number, i, j, value) of the upper triangle, 1-based."""
    blk = 1
    if cone.nonneg:
        for i in np.flatnonzero(vec[:cone.nonneg]):
            yield blk, i + 1, i + 1, vec[i]
        blk += 1
    for sl, n in cone.blocks():
        M = smat(vec[sl], n)
        rows, cols = np.nonzero(np.triu(M))
        for i, j in zip(rows, cols):
            yield blk, i + 1, j + 1, M[i, j]
        blk += 1


def write_sdpa(path, c, A, b, cone: Cone) -> None:
    """Write the problem (c, A, b, K) to ``path``."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, cone.size)
    b = np.asarray(b, dtype=float)
    sizes = ([-cone.nonneg] if cone.nonneg else []) + list(cone.psd)
    lines = [
        "* standard-form conic problem: min c'x, Ax = b, x in K",
        f"{A.shape[0]}",
        f"{len(sizes)}",
        " ".join(str(s) for s in sizes),
        " ".join(repr(float(v)) for v in b) if b.size else "",
    ]
    for blk, i, j, v in _block_entries(-c, cone):
        lines.append(f"0 {blk} {i} {j} {float(v)!r}")
    for k, row in enumerate(A, start=1):
        for blk, i, j, v in _block_entries(row, cone):
            lines.append(f"{k} {blk} {i} {j} {float(v)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sdpa(path):
    """Read a file written by :func:`write_sdpa`; returns (c, A, b, cone)."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if not ln.lstrip().startswith(("*", '"'))]
    m = int(raw[0].split()[0])
    nblocks = int(raw[1].split()[0])
    sizes = [int(s) for s in raw[2].replace(",", " ").replace("{", " ")
             .replace("}", " ").split()][:nblocks]
    b = np.array([float(v) for v in raw[3].replace(",", " ").split()]) if m else np.zeros(0)
    entries = raw[4:] if m else raw[3:]
    nonneg = -sizes[0] if sizes and sizes[0] < 0 else 0
    psd = tuple(s for s in sizes if s > 0)
    cone = Cone(nonneg, psd)
    mats = np.zeros((m + 1, cone.size))
    offsets = []
    if nonneg:
        offsets.append(("lp", 0, nonneg))
    for sl, n in cone.blocks():
        offsets.append(("psd", sl, n))
    dense = [[np.zeros((n, n)) for kind, _, n in offsets if kind == "psd"]
             for _ in range(m + 1)]
    for line in entries:
        if not line:
            continue
        k, blk, i, j, v = line.split()
        k, blk, i, j, v = int(k), int(blk), int(i), int(j), float(v)
        kind, start, n = offsets[blk - 1]
        if kind == "lp":
            mats[k, i - 1] = v
        else:
            p = blk - 1 - (1 if nonneg else 0)
            dense[k][p][i - 1, j - 1] = v
            dense[k][p][j - 1, i - 1] = v
    for k in range(m + 1):
        for (sl, n), M in zip(cone.blocks(), dense[k]):
            mats[k, sl] = svec(M)
    return -mats[0], mats[1:], b, cone
