"""Command-line experiment driver.

Exit codes: 0 pass, 1 invariant failure, 2 usage or config error,
3 numerical non-convergence. Errors are also written to stderr as one JSON
record.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from . import errors
from .io import (canonical_json, config_hash, load_sequence, sequence_to_json, version_string,
                 write_csv)
from .sequences import accumulating, radial, random_separated, spiral

logger = logging.getLogger("hardyinterp")

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3

GENERATOR_PARAMS = {
    "radial": ("c", "N"),
    "spiral": ("c", "turns", "N"),
    "random_separated": ("sep", "N", "seed"),
    "accumulating": ("exponent", "N"),
    "explicit": ("file",),
}


@dataclass
class ExperimentConfig:
    n: int = 1
    generator: str = "radial"
    c: float = 0.5
    turns: float = 1.0
    N: int = 10
    sep: float = 0.5
    exponent: float = 2.0
    file: str | None = None
    s: float = 2.0
    p: float = 4.0
    level: int = 5
    trials: int = 64
    seed: int = 0
    helpers: str | None = None
    out_dir: str = "."
    figures: bool = False

    def validate(self):
        bad = []
        if self.generator not in GENERATOR_PARAMS:
            bad.append(f"unknown generator {self.generator!r}")
        if not (isinstance(self.n, int) and self.n >= 1):
            bad.append("n must be a positive integer")
        if not 0 < self.c < 1:
            bad.append("c must lie in (0, 1)")
        if not self.sep > 0:
            bad.append("sep must be positive")
        if not (isinstance(self.N, int) and 1 <= self.N <= 1000):
            bad.append("N must be an integer in [1, 1000]")
        if not (isinstance(self.level, int) and 1 <= self.level <= 8):
            bad.append("level must be an integer in [1, 8]")
        if not self.exponent > 0:
            bad.append("exponent must be positive")
        if not (isinstance(self.trials, int) and self.trials >= 0):
            bad.append("trials must be a non-negative integer")
        if self.generator == "explicit" and not self.file:
            bad.append("the explicit generator needs a file")
        if self.helpers not in (None, "tangential"):
            bad.append("helpers must be 'tangential' or absent")
        if bad:
            raise click.UsageError("; ".join(bad))
        return self

    def generator_params(self):
        return {k: getattr(self, k) for k in GENERATOR_PARAMS[self.generator]}

    def as_dict(self):
        d = dataclasses.asdict(self)
        d.pop("out_dir")
        d.pop("figures")
        return d


def load_config(path, overrides):
    """Merge a JSON config file with command-line overrides (flags win)."""
    data = {}
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise click.UsageError(f"cannot parse config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise click.UsageError(f"config {path} must hold a JSON object")
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise click.UsageError(f"unknown config keys: {', '.join(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = ExperimentConfig(**data)
    except TypeError as exc:
        raise click.UsageError(str(exc)) from exc
    return cfg.validate()


def generate_sequence(cfg, N=None):
    N = cfg.N if N is None else N
    n = cfg.n
    if cfg.generator == "radial":
        return radial(cfg.c, N, n)
    if cfg.generator == "spiral":
        return spiral(cfg.c, cfg.turns, N, n)
    if cfg.generator == "random_separated":
        return random_separated(cfg.sep, N, cfg.seed, n)
    if cfg.generator == "accumulating":
        return accumulating(cfg.exponent, N, n)
    S = load_sequence(cfg.file)
    if S.n != n:
        raise click.UsageError(f"sequence file has n={S.n}, config says n={n}")
    return S if N >= len(S) else S.prefix(N)


def error_record(exc):
    rec = {"error": type(exc).__name__, "message": str(exc)}
    for key in ("pair", "distance", "condition", "near_duplicate", "node_index",
                "worst_index", "residual", "q", "ratio"):
        if hasattr(exc, key):
            v = getattr(exc, key)
            rec[key] = list(v) if isinstance(v, tuple) else v
    return rec


def exit_code_for(exc):
    if isinstance(exc, (errors.DegenerateSequenceError, errors.ConstructionError)):
        return EXIT_INVARIANT
    if isinstance(exc, (errors.QuadratureError, errors.CapacityError)):
        return EXIT_NONCONVERGED
    return EXIT_USAGE


def _fail(exc):
    click.echo(canonical_json(error_record(exc)), err=True)
    sys.exit(exit_code_for(exc))


def _run(fn):
    try:
        return fn()
    except errors.HardyError as exc:
        _fail(exc)


def _out(cfg, name):
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def _write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _figures(cfg, kind, rows, stem):
    if not cfg.figures:
        return
    from . import plotting
    path = _out(cfg, stem + ".png")
    plotting.render(kind, rows, path)
    click.echo(f"figure: {path}")


def config_options(fn):
    """Flags mirroring :class:`ExperimentConfig`; unset flags defer to the file."""
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="JSON config; flags override its entries."),
        click.option("--n", type=int, help="Ambient dimension."),
        click.option("--generator", type=click.Choice(sorted(GENERATOR_PARAMS))),
        click.option("--c", type=float, help="Geometric ratio in (0, 1)."),
        click.option("--turns", type=float),
        click.option("--N", "N", type=int, help="Sequence length (<= 1000)."),
        click.option("--sep", type=float),
        click.option("--exponent", type=float),
        click.option("--file", type=click.Path(dir_okay=False), help="Sequence JSON."),
        click.option("--s", type=float),
        click.option("--p", type=float),
        click.option("--level", type=int, help="Quadrature level (1..8)."),
        click.option("--trials", type=int),
        click.option("--seed", type=int),
        click.option("--helpers", type=click.Choice(["tangential"])),
        click.option("--out-dir", type=click.Path(file_okay=False)),
        click.option("--figures/--no-figures", default=None,
                     help="Render PNG figures next to the CSV output."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _cfg(kw):
    path = kw.pop("config_path", None)
    return load_config(path, kw)


@click.group()
@click.option("-v", "--verbose", count=True)
def main(verbose):
    """Hardy-space interpolation experiments on the unit ball."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@config_options
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write JSON here.")
def gen(output, **kw):
    """Generate a sequence and print it as JSON."""
    cfg = _cfg(kw)
    S = _run(lambda: generate_sequence(cfg))
    text = json.dumps(sequence_to_json(S), sort_keys=True)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


DUAL_COLUMNS = ["generator", "params", "N", "n", "p", "dual_bound", "residual", "converged",
                "gram_cond"]


@main.command()
@config_options
def dual(**kw):
    """Build the dual system at exponent p; writes dual.json and dual.csv."""
    cfg = _cfg(kw)

    def go():
        from .dual_systems import (dual_bound_constant, dual_system_hp, gram_condition,
                                   gram_matrix, to_json)
        from .quadrature import build_rule
        S = generate_sequence(cfg)
        rule = build_rule(cfg.n, cfg.level)
        ds = dual_system_hp(S, cfg.p, rule, helpers=cfg.helpers)
        _write_json(_out(cfg, "dual.json"), to_json(ds))
        row = {"generator": cfg.generator, "params": cfg.generator_params(), "N": len(S),
               "n": cfg.n, "p": cfg.p, "dual_bound": dual_bound_constant(ds),
               "residual": ds.residual, "converged": bool(np.all(ds.converged)),
               "gram_cond": gram_condition(gram_matrix(S))}
        write_csv(_out(cfg, "dual.csv"), DUAL_COLUMNS, [row], version_string(),
                  config_hash(cfg.as_dict()))
        click.echo(f"dual_bound={row['dual_bound']!r} residual={ds.residual:.3e}")
        return ds

    ds = _run(go)
    if not np.all(ds.converged):
        sys.exit(EXIT_NONCONVERGED)


INTERP_COLUMNS = ["generator", "N", "s", "p", "q", "dual_bound", "C_I_emp", "residual"]


@main.command()
@config_options
@click.option("--target-seed", type=int, help="Complex Gaussian target from this seed.")
@click.option("--target", "target_json", help="Explicit target: JSON list of [re, im].")
@click.option("--spike", type=int, help="Unit target at this index.")
def interp(target_seed, target_json, spike, **kw):
    """Extend one target by the linear operator; writes JSON and appends interp.csv."""
    cfg = _cfg(kw)
    chosen = [x is not None for x in (target_seed, target_json, spike)]
    if sum(chosen) > 1:
        raise click.UsageError("give at most one of --target-seed, --target, --spike")

    def go():
        from .dual_systems import dual_bound_constant, dual_system_hp
        from .interpolation import build_extension, exponent_split, interpolation_constant
        from .quadrature import build_rule
        es = exponent_split(cfg.s, cfg.p)
        S = generate_sequence(cfg)
        N = len(S)
        if target_json is not None:
            try:
                arr = np.asarray(json.loads(target_json), dtype=float)
                nu = arr[:, 0] + 1j * arr[:, 1]
            except (ValueError, IndexError, TypeError) as exc:
                raise click.UsageError(f"bad --target: {exc}") from exc
        elif spike is not None:
            if not 0 <= spike < N:
                raise click.UsageError(f"--spike must lie in [0, {N})")
            nu = np.eye(N, dtype=complex)[spike]
        else:
            g = np.random.default_rng(cfg.seed if target_seed is None else target_seed)
            nu = g.standard_normal(N) + 1j * g.standard_normal(N)
        rule = build_rule(cfg.n, cfg.level)
        ds = dual_system_hp(S, es.p, rule, helpers=cfg.helpers)
        res = build_extension(S, ds, nu, es, rule)
        ci = interpolation_constant(S, ds, es, rule, cfg.trials, cfg.seed)
        _write_json(_out(cfg, "interp.json"), res.to_json())
        row = {"generator": cfg.generator, "N": N, "s": es.s, "p": es.p, "q": es.q,
               "dual_bound": dual_bound_constant(ds), "C_I_emp": ci, "residual": res.residual}
        write_csv(_out(cfg, "interp.csv"), INTERP_COLUMNS, [row], version_string(),
                  config_hash(cfg.as_dict()), append=True)
        click.echo(f"C_I_emp={ci!r} residual={res.residual:.3e}")

    _run(go)


CARLESON_COLUMNS = ["generator", "params", "N", "tent_constant", "D2", "D2_squared",
                    "gram_cond", "slope"]


def carleson_rows(cfg, sizes):
    from .carleson import embedding_constant, loglog_slope, tent_constant
    from .dual_systems import gram_condition, gram_matrix
    rows = []
    for N in sizes:
        S = generate_sequence(cfg, N)
        d2 = embedding_constant(S, 2.0, None)[0]
        params = dict(cfg.generator_params(), N=N)
        rows.append({"generator": cfg.generator, "params": params, "N": N,
                     "tent_constant": tent_constant(S, seed=cfg.seed), "D2": d2,
                     "D2_squared": d2 * d2,
                     "gram_cond": gram_condition(gram_matrix(S, check=False)), "slope": math.nan})
    if len(rows) >= 3:
        slope = loglog_slope([r["tent_constant"] for r in rows], [r["D2_squared"] for r in rows])
    else:
        logger.warning("fewer than 3 family members; slope not fitted")
        slope = math.nan
    for r in rows:
        r["slope"] = slope
    return rows


def _sizes(text):
    try:
        sizes = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise click.UsageError(f"bad --sizes {text!r}") from exc
    if not sizes or any(not 1 <= x <= 1000 for x in sizes):
        raise click.UsageError("--sizes must list integers in [1, 1000]")
    return sizes


@main.command()
@config_options
@click.option("--sizes", default="5,10,20,40", show_default=True,
              help="Family sizes N for the tent-vs-D2 regression.")
def carleson(sizes, **kw):
    """Tent constants and D2 along a family; writes carleson.csv."""
    cfg = _cfg(kw)
    sizes = _sizes(sizes)
    rows = _run(lambda: carleson_rows(cfg, sizes))
    write_csv(_out(cfg, "carleson.csv"), CARLESON_COLUMNS, rows, version_string(),
              config_hash(dict(cfg.as_dict(), sizes=sizes)))
    for r in rows:
        click.echo(f"N={r['N']} tent={r['tent_constant']:.6g} D2^2={r['D2_squared']:.6g}")
    click.echo(f"slope={rows[0]['slope']:.6g}")
    _figures(cfg, "carleson", rows, "carleson")


KERNEL_COLUMNS = ["n", "p", "estimate", "grid_level", "fitted_C", "witness_t", "witness_delta"]


@main.command("kernel-check")
@click.option("--n", "dims", default="1,2", show_default=True, help="Dimensions.")
@click.option("--p", "ps", default="1.5,2,3", show_default=True, help="Exponents (> 1).")
@click.option("--grid-levels", default="0,1", show_default=True)
@click.option("--estimate", type=click.Choice(["H2", "H3", "both"]), default="both")
@click.option("--out-dir", default=".", type=click.Path(file_okay=False))
@click.option("--figures/--no-figures", default=False)
def kernel_check(dims, ps, grid_levels, estimate, out_dir, figures):
    """Fit the K_t estimate constants; writes kernel_check.csv."""
    from .kernels import certify_H2, certify_H3
    try:
        dims = [int(x) for x in dims.split(",")]
        ps = [float(x) for x in ps.split(",")]
        levels = [int(x) for x in grid_levels.split(",")]
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    which = ["H2", "H3"] if estimate == "both" else [estimate]
    rows = []

    def go():
        for n in dims:
            for p in ps:
                for est in which:
                    for lv in levels:
                        cert = (certify_H2 if est == "H2" else certify_H3)(n, p, lv)
                        rows.append({"n": n, "p": p, "estimate": est, "grid_level": lv,
                                     "fitted_C": cert.constant, "witness_t": cert.witness_t,
                                     "witness_delta": cert.witness_delta})
                        click.echo(f"{est} n={n} p={p} level={lv} C={cert.constant:.6g}")

    _run(go)
    cfg = ExperimentConfig(out_dir=out_dir, figures=figures)
    chash = config_hash({"n": dims, "p": ps, "grid_levels": levels, "estimate": which})
    write_csv(_out(cfg, "kernel_check.csv"), KERNEL_COLUMNS, rows, version_string(), chash)
    _figures(cfg, "kernel_check", rows, "kernel_check")


PIPELINE_COLUMNS = ["generator", "params", "N", "n", "s", "p", "q", "dual_bound",
                    "dual_residual", "tent_constant", "D2_squared", "gram_cond", "C_I_emp",
                    "interp_residual", "g_identity_error", "domination_slack", "f_ratio",
                    "balayage_error", "factor_error", "status", "warnings"]

#: Drift of the tent constant between N/2 and N above which constants are flagged.
DIVERGENCE_DRIFT = 0.25


@dataclass
class PipelineResult:
    row: dict
    warnings: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    nonconverged: bool = False

    @property
    def exit_code(self):
        if self.failures:
            return EXIT_INVARIANT
        if self.nonconverged:
            return EXIT_NONCONVERGED
        return EXIT_OK


def run_pipeline(cfg):
    """Dual system, Carleson report, extension and bound checks for one sequence."""
    from .carleson import embedding_constant, tent_constant
    from .dual_systems import dual_bound_constant, dual_system_hp, gram_condition, gram_matrix
    from .interpolation import (ExtensionOperator, balayage_identity_check, build_extension,
                                exponent_split, factor_target, holder_pipeline_check,
                                interpolation_constant, lnorm)
    from .quadrature import build_rule

    es = exponent_split(cfg.s, cfg.p)
    S = generate_sequence(cfg)
    N = len(S)
    rule = build_rule(cfg.n, cfg.level)
    nan = math.nan
    row = {"generator": cfg.generator, "params": cfg.generator_params(), "N": N, "n": cfg.n,
           "s": es.s, "p": es.p, "q": es.q}
    row.update({k: nan for k in PIPELINE_COLUMNS[7:19]})
    out = PipelineResult(row)

    tent = tent_constant(S, seed=cfg.seed)
    d2 = embedding_constant(S, 2.0, None)[0]
    row.update(tent_constant=tent, D2_squared=d2 * d2,
               gram_cond=gram_condition(gram_matrix(S, check=False)))
    if N >= 4:
        half = tent_constant(S.prefix(N // 2), seed=cfg.seed)
        if tent > (1 + DIVERGENCE_DRIFT) * half:
            out.warnings.append(f"constants diverging: tent {half:.4g} -> {tent:.4g} "
                                f"from N={N // 2} to N={N}")
    if S.flagged:
        out.warnings.append(f"separation {S.separation:.6g} below floor")

    rng = np.random.default_rng(cfg.seed)
    nu = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    fac = factor_target(nu, es)
    ns = lnorm(nu, es.s)
    row["factor_error"] = abs(ns - lnorm(fac.lam, es.p) * lnorm(fac.mu, es.q)) / ns
    bal = balayage_identity_check(S, fac.mu, es)
    row["balayage_error"] = bal.error
    if row["factor_error"] > 1e-12:
        out.failures.append("factorization norm identity")
    if not bal.passed:
        out.failures.append("balayage identity")

    try:
        ds = dual_system_hp(S, es.p, rule, helpers=cfg.helpers)
    except errors.DegenerateSequenceError as exc:
        if exc.near_duplicate:
            raise
        out.warnings.append(f"constants diverging: kernel Gram condition {exc.condition:.3e}; "
                            "dual and extension stages skipped")
        return out
    row.update(dual_bound=dual_bound_constant(ds), dual_residual=ds.residual)
    if ds.residual > 1e-8:
        out.failures.append("dual residual")
    if not np.all(ds.converged):
        out.nonconverged = True
    op = ExtensionOperator(ds, es, rule)
    try:
        ext = build_extension(S, ds, nu, es, rule, op)
        row["interp_residual"] = ext.residual
    except errors.ConstructionError as exc:
        row["interp_residual"] = exc.residual
        out.failures.append("interpolation residual")
    row["C_I_emp"] = interpolation_constant(S, ds, es, rule, cfg.trials, cfg.seed)
    hol = holder_pipeline_check(S, ds, es, nu, rule, op)
    row.update(g_identity_error=hol.g_identity_error, domination_slack=hol.domination_slack,
               f_ratio=hol.f_ratio)
    if not hol.identity_ok:
        out.failures.append("g-norm identity")
    if not hol.domination_ok:
        out.failures.append("pointwise domination")
    return out


@main.command()
@config_options
def pipeline(**kw):
    """End-to-end run; writes pipeline.csv and pipeline.json; exit 0 iff invariants hold."""
    cfg = _cfg(kw)
    res = _run(lambda: run_pipeline(cfg))
    status = {EXIT_OK: "pass", EXIT_INVARIANT: "fail", EXIT_NONCONVERGED: "nonconverged"}
    res.row["status"] = status[res.exit_code]
    res.row["warnings"] = " | ".join(res.warnings)
    write_csv(_out(cfg, "pipeline.csv"), PIPELINE_COLUMNS, [res.row], version_string(),
              config_hash(cfg.as_dict()))
    _write_json(_out(cfg, "pipeline.json"),
                {"config": cfg.as_dict(), "result": _jsonable(res.row),
                 "warnings": res.warnings, "failures": res.failures,
                 "version": version_string()})
    for w in res.warnings:
        click.echo(f"WARN {w}")
    for f in res.failures:
        click.echo(f"FAIL {f}")
    click.echo(f"status={res.row['status']}")
    _figures(cfg, "pipeline", [res.row], "pipeline")
    sys.exit(res.exit_code)


def _jsonable(row):
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in row.items()}


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=click.Choice(["carleson", "kernel_check", "pipeline"]),
              help="Table type; inferred from the file name when omitted.")
@click.option("--output", "-o", type=click.Path(dir_okay=False))
def plot(csv_path, kind, output):
    """Render a figure from a CSV written by another subcommand."""
    from . import plotting
    kind = kind or plotting.infer_kind(csv_path)
    output = output or os.path.splitext(csv_path)[0] + ".png"
    plotting.render(kind, plotting.read_rows(csv_path), output)
    click.echo(f"figure: {output}")


if __name__ == "__main__":  # pragma: no cover
    main()
