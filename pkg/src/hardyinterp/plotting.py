"""Figures from the CLI tables. Needs the optional ``matplotlib`` dependency."""

from __future__ import annotations

import csv
import json
import os


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def infer_kind(path):
    base = os.path.basename(path)
    for kind in ("kernel_check", "carleson", "pipeline"):
        if base.startswith(kind):
            return kind
    raise ValueError(f"cannot infer the table type of {path}; pass --kind")


def _f(row, key):
    return float(row[key])


def _carleson(ax, rows):
    N = [_f(r, "N") for r in rows]
    ax.loglog(N, [_f(r, "tent_constant") for r in rows], "o-", label="tent constant")
    ax.loglog(N, [_f(r, "D2_squared") for r in rows], "s--", label=r"$D_2^2$")
    ax.set_xlabel("N")
    ax.set_title(f"{rows[0]['generator']}  slope {_f(rows[0], 'slope'):.3g}")
    ax.legend()


def _kernel_check(ax, rows):
    groups = {}
    for r in rows:
        groups.setdefault((r["estimate"], r["n"], r["p"]), []).append(r)
    for (est, n, p), rs in sorted(groups.items()):
        rs = sorted(rs, key=lambda r: int(r["grid_level"]))
        ax.semilogy([int(r["grid_level"]) for r in rs], [_f(r, "fitted_C") for r in rs],
                    "o-", label=f"{est} n={n} p={p}")
    ax.set_xlabel("grid level")
    ax.set_ylabel("fitted constant")
    ax.legend(fontsize="small")


def _pipeline(ax, rows):
    keys = ["dual_bound", "tent_constant", "D2_squared", "C_I_emp"]
    vals = []
    for k in keys:
        try:
            vals.append(_f(rows[0], k))
        except (TypeError, ValueError):
            vals.append(float("nan"))
    ax.bar(range(len(keys)), vals)
    ax.set_xticks(range(len(keys)), keys)
    ax.set_yscale("log")
    params = rows[0]["params"]
    if isinstance(params, str):
        params = json.loads(params)
    ax.set_title(f"{rows[0]['generator']} {params}")


_RENDER = {"carleson": _carleson, "kernel_check": _kernel_check, "pipeline": _pipeline}


def render(kind, rows, path):
    """Draw ``rows`` (dicts from a CLI table) as a PNG at ``path``."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    _RENDER[kind](ax, rows)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
