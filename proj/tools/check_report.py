#!/usr/bin/env python3
"""Independently recompute every number in report.json from the artifacts.

Usage: check_report.py <output-dir>

Reads operator.txt, ucoeffs.txt, ufield.csv, mask.csv and report.json from the
given directory, re-derives the reported quantities with numpy (dictionary
evaluation, operator iteration, flood fill, Lie-sign counting are all
reimplemented here), and exits nonzero on any mismatch. Timings are not
checked; fit_residual and gram_rank are checked for consistency against the
operator file header.
"""

import json
import math
import sys
from collections import deque
from pathlib import Path

import numpy as np


def fail(msg):
    print(f"MISMATCH: {msg}")
    sys.exit(1)


def ok(name, detail=""):
    print(f"ok: {name}" + (f" ({detail})" if detail else ""))


def read_header_file(path):
    """Parse 'key value...' header lines followed by a data section."""
    header = {}
    data = []
    with open(path) as f:
        first = f.readline().strip()
        in_data = False
        for line in f:
            line = line.strip()
            if not line:
                continue
            if not in_data:
                key, _, rest = line.partition(" ")
                if key == "data":
                    in_data = True
                    continue
                header[key] = rest
            else:
                data.append(line)
    return first, header, data


def parse_complex_lines(lines):
    out = np.empty(len(lines), dtype=complex)
    for i, line in enumerate(lines):
        re_s, _, im_s = line.partition(",")
        out[i] = complex(float(re_s), float(im_s))
    return out


def dict_from_header(header):
    fam, n, period, gauss, dim = header["dict"].split()
    center = np.array([float(v) for v in header["center"].split()])
    n, dim = int(n), int(dim)
    seq = np.zeros(2 * n - 1, dtype=int)
    seq[1::2] = np.arange(1, n)
    seq[2::2] = -np.arange(1, n)
    grids = np.meshgrid(*([seq] * dim), indexing="ij")
    freq = np.stack([g.ravel() for g in grids], axis=1)
    return {
        "family": fam,
        "freq": freq,
        "omega": 2.0 * math.pi / float(period),
        "gauss": float(gauss),
        "center": center,
        "dim": dim,
    }


def dict_eval(d, pts):
    y = pts - d["center"]
    phase = d["omega"] * (y @ d["freq"].T)
    if d["family"] == "complex_fourier_nd":
        return np.exp(1j * phase)
    g = np.exp(-np.sum(y * y, axis=1) / d["gauss"])
    return np.cos(phase) * g[:, None] + 0j


def main():
    if len(sys.argv) != 2:
        print(__doc__)
        sys.exit(2)
    outdir = Path(sys.argv[1])
    report = json.loads((outdir / "report.json").read_text())
    cfg = report["config"]

    # operator file
    magic, op_hdr, op_data = read_header_file(outdir / "operator.txt")
    if magic != "zkroa operator v1":
        fail("operator.txt magic line")
    n = int(op_hdr["size"])
    T = parse_complex_lines(op_data).reshape(n, n)
    if int(op_hdr["rank"]) != report["gram_rank"]:
        fail("gram_rank vs operator header")
    if not math.isclose(float(op_hdr["residual"]), report["fit_residual"],
                        rel_tol=1e-12, abs_tol=1e-12):
        fail("fit_residual vs operator header")
    ok("operator header consistent", f"size {n}, rank {op_hdr['rank']}")

    # coefficients file
    magic, uc_hdr, uc_data = read_header_file(outdir / "ucoeffs.txt")
    if magic != "zkroa ucoeffs v1":
        fail("ucoeffs.txt magic line")
    coeffs = parse_complex_lines(uc_data)
    d = dict_from_header(uc_hdr)
    k_reported = int(uc_hdr["iterations"])
    if k_reported != report["iterations"]:
        fail("iterations vs ucoeffs header")

    # re-run the operator iteration
    tol = cfg["iteration"]["tol"]
    kmax = cfg["iteration"]["max_iterations"]
    vector_mode = cfg["iteration"]["mode"] == "vector"
    w = np.zeros(n, dtype=complex)
    w[0] = 1.0
    state = w.copy() if vector_mode else np.eye(n, dtype=complex)
    k = 0
    diff = 0.0
    while k < kmax:
        nxt = T @ state
        diff = np.linalg.norm(nxt - state)
        state = nxt
        k += 1
        if diff <= tol:
            break
    my_coeffs = state if vector_mode else state @ w
    if k != k_reported:
        fail(f"iteration count: recomputed {k}, reported {k_reported}")
    if abs(diff - report["final_residual"]) > 1e-8 * max(1.0, diff):
        fail(f"final_residual: recomputed {diff}, reported {report['final_residual']}")
    if np.abs(my_coeffs - coeffs).max() > 1e-8:
        fail("coefficients do not reproduce from the operator")
    ok("iteration reproduces", f"k={k}, final step {diff:.6g}")

    # u at equilibrium (dictionary center)
    u_eq = (dict_eval(d, d["center"][None, :]) @ coeffs)[0]
    if abs(u_eq.real - report["u_at_xeq"]) > 1e-9:
        fail(f"u_at_xeq: recomputed {u_eq.real}, reported {report['u_at_xeq']}")
    ok("u_at_xeq reproduces", f"{u_eq.real:.6g}")

    # field CSV: recompute u from coordinates and coefficients
    rows = (outdir / "ufield.csv").read_text().strip().splitlines()
    cols = rows[0].split(",")
    dim = d["dim"]
    if cols[:dim] != [f"x_{a+1}" for a in range(dim)] or cols[dim:] != ["u", "lie", "mask"]:
        fail("ufield.csv column layout")
    body = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    pts = body[:, :dim]
    u_csv = body[:, dim]
    lie_csv = body[:, dim + 1]
    mask_csv = body[:, dim + 2].astype(int)
    vals = dict_eval(d, pts) @ coeffs
    if np.abs(vals.real - u_csv).max() > 1e-9:
        fail("u column does not reproduce from the coefficients")
    if abs(np.abs(vals.real).max() - report["max_abs_value"]) > 1e-9:
        fail("max_abs_value")
    if abs(np.abs(vals.imag).max() - report["max_imag_residue"]) > 1e-9:
        fail("max_imag_residue")
    accepted = (np.abs(vals.imag).max() <= 0.1 * np.abs(vals.real).max()
                and 0.9 <= u_eq.real <= 1.1)
    if accepted != report["accepted"]:
        fail("accepted flag")
    ok("field values reproduce", f"{len(pts)} cells")

    # mask: flood fill from the equilibrium cell over u >= c, face adjacency
    resolution = cfg["roa"]["resolution"]
    threshold = cfg["roa"]["threshold"]
    total = int(np.prod(resolution))
    if total != len(pts):
        fail("grid size vs resolution")
    u_grid = u_csv.reshape(resolution)
    lo = pts.min(axis=0)
    widths = (pts.max(axis=0) - lo) / (np.array(resolution) - 1)
    box_lo = lo - widths / 2  # cell centers sit at box_lo + (i + 0.5) * width
    seed = tuple(
        int(np.clip(math.floor((d["center"][a] - box_lo[a]) / widths[a]), 0,
                    resolution[a] - 1)) for a in range(dim))
    mask = np.zeros(resolution, dtype=bool)
    if u_grid[seed] >= threshold:
        mask[seed] = True
        dq = deque([seed])
        while dq:
            cur = dq.popleft()
            for a in range(dim):
                for step in (-1, 1):
                    nb = list(cur)
                    nb[a] += step
                    if not (0 <= nb[a] < resolution[a]):
                        continue
                    nb = tuple(nb)
                    if not mask[nb] and u_grid[nb] >= threshold:
                        mask[nb] = True
                        dq.append(nb)
    if not np.array_equal(mask.ravel(), mask_csv.astype(bool)):
        fail("mask bits do not reproduce by flood fill")
    vol = mask.mean()
    if abs(vol - report["volume_fraction"]) > 1e-12:
        fail(f"volume_fraction: recomputed {vol}, reported {report['volume_fraction']}")
    ok("mask and volume_fraction reproduce", f"{vol:.6g}")

    def flood_fraction(c):
        if u_grid[seed] < c:
            return 0.0
        m = np.zeros(resolution, dtype=bool)
        m[seed] = True
        dq = deque([seed])
        while dq:
            cur = dq.popleft()
            for a in range(dim):
                for step in (-1, 1):
                    nb = list(cur)
                    nb[a] += step
                    if not (0 <= nb[a] < resolution[a]):
                        continue
                    nb = tuple(nb)
                    if not m[nb] and u_grid[nb] >= c:
                        m[nb] = True
                        dq.append(nb)
        return m.mean()

    for key, factor in (("volume_fraction_half_c", 0.5), ("volume_fraction_twice_c", 2.0)):
        got = flood_fraction(factor * threshold)
        if abs(got - report[key]) > 1e-12:
            fail(f"{key}: recomputed {got}, reported {report[key]}")
    ok("threshold sensitivity reproduces")

    # mask.csv agrees with the field CSV mask column
    mrows = (outdir / "mask.csv").read_text().strip().splitlines()[1:]
    bits = np.array([int(r.rsplit(",", 1)[1]) for r in mrows])
    if not np.array_equal(bits, mask_csv):
        fail("mask.csv vs ufield.csv mask column")

    # mask extent
    if "roa_lo" in report:
        idx = np.argwhere(mask)
        ext_lo = [lo[a] - widths[a] / 2 + idx[:, a].min() * widths[a] for a in range(dim)]
        ext_hi = [lo[a] - widths[a] / 2 + (idx[:, a].max() + 1) * widths[a] for a in range(dim)]
        for a in range(dim):
            if abs(ext_lo[a] - report["roa_lo"][a]) > 1e-9 or \
               abs(ext_hi[a] - report["roa_hi"][a]) > 1e-9:
                fail("mask extent")
        ok("mask extent reproduces")

    # verified fraction from the recorded Lie column
    excl = cfg["roa"]["exclusion_radius"]
    margin = cfg["roa"]["lie_margin"]
    dist = np.linalg.norm(pts - d["center"], axis=1)
    sel = mask.ravel() & (dist > excl)
    vf = float((lie_csv[sel] > margin).mean()) if sel.any() else 0.0
    if abs(vf - report["verified_fraction"]) > 1e-12:
        fail(f"verified_fraction: recomputed {vf}, reported {report['verified_fraction']}")
    ok("verified_fraction reproduces", f"{vf:.6g}")

    print("report verified: all recomputable quantities match")


if __name__ == "__main__":
    main()
