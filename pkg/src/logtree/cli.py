"""``logtree`` command line: exact tables, predictions, simulations and gates.

Exit status is 0 on success, 1 when a gate fails (the report is still written)
and 2 on usage errors.  JSON output uses sorted keys so identical arguments
give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import asympt, exact, montecarlo, series
from ._exactnum import format_value
from .generate import generate_profiles
from .model import ModelError, as_model, format_model_spec, width_and_mode
from .rng import DEFAULT_SEED


class UsageError(Exception):
    pass


# -- output -------------------------------------------------------------------------

def _clean(x):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def dump_json(obj) -> str:
    obj = _clean(montecarlo._jsonable(obj))
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format_value(v)


def write_output(text: str, path: str | None):
    """Write ``text`` to ``path`` atomically (temp file + rename), or to stdout."""
    if not path or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".logtree-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- subcommands ----------------------------------------------------------------------

def cmd_generate(a):
    model = as_model(a.model)
    prof = generate_profiles(model, a.n, a.seed, np.array([a.index]))[0]
    prof = np.trim_zeros(prof, "b")
    ws = width_and_mode(prof)
    if a.format == "csv":
        return csv_text(["level", "count"], enumerate(prof.tolist())), 0
    return dump_json({"model": format_model_spec(model), "n": a.n, "seed": a.seed,
                      "index": a.index, "profile": prof.tolist(), "width": ws.width,
                      "mode_level": ws.mode_level}), 0


def _exact_mode(a):
    return not a.float


def _increasing_rows(model, a, n_min):
    k_max = a.k_max if a.k_max is not None else a.n - 1
    if _exact_mode(a):
        rows = series.profile_table_increasing(model, a.n, k_max, exact=True)
        return [(n, k, v) for n in range(n_min, a.n + 1) if n in rows
                for k, v in enumerate(rows[n].mu)]
    row = series.profile_row_increasing(model, a.n, k_max, exact=False)
    return [(a.n, k, v) for k, v in enumerate(row.mu)]


def cmd_exact_profile(a):
    model = as_model(a.model)
    n_min = 1 if a.all_rows else a.n
    if model.family in ("increasing", "mobile"):
        rows = _increasing_rows(model, a, n_min)
    else:
        ex = _exact_mode(a)
        k_max = a.k_max if a.k_max is not None else exact.default_k_max(a.n, ex)
        tab = exact.expected_profile_dp(model, a.n, k_max=k_max, exact=ex)
        rows = list(tab.rows(n_min=n_min))
    if a.format == "csv":
        return csv_text(["n", "k", "value"], rows), 0
    return dump_json({"model": format_model_spec(model), "exact": _exact_mode(a),
                      "rows": [[n, k, format_value(v)] for n, k, v in rows]}), 0


def cmd_exact_moments(a):
    model = as_model(a.model)
    ex = _exact_mode(a)
    k_max = a.k_max if a.k_max is not None else exact.default_k_max(a.n, ex)
    tab = exact.central_moment_dp(model, a.n, k_max=k_max, m_max=a.m_max, exact=ex)
    n_min = 1 if a.all_rows else a.n
    if a.format == "csv":
        if not 1 <= a.m <= a.m_max:
            raise UsageError("--m must lie in 1..--m-max")
        return csv_text(["n", "k", "value"], tab.rows(m=a.m, n_min=n_min)), 0
    return dump_json(tab.to_json(n_min=n_min)), 0


def cmd_constants(a):
    return dump_json(asympt.constants_record(a.model)), 0


def cmd_predict(a):
    return dump_json(asympt.predict(a.model, a.n)), 0


def cmd_simulate(a):
    sim = montecarlo.simulate(a.model, a.n, a.reps, a.seed, a.threads, allow_large=a.allow_large)
    if a.format == "csv":
        hist = sim.width_hist if a.histogram == "width" else sim.mode_hist
        return csv_text(["value", "freq"], sorted(hist.items())), 0
    rec = sim.to_json()
    rec.update({"experiment": "simulate", "gates": []})
    return dump_json(rec), 0


def cmd_gates(a):
    cfg = montecarlo.load_config(a.gate_config)
    rep = montecarlo.run_gate_suite(a.level, a.seed, a.threads, config=cfg)
    for g in rep["gates"]:
        print(f"{'PASS' if g['pass'] else 'FAIL'} {g['name']}", file=sys.stderr)
    return dump_json(rep), 0 if rep["passed"] else 1


def cmd_figure1(a):
    rec = montecarlo.figure1_experiment(a.n, a.reps, a.seed, a.threads, a.allow_large)
    if a.format == "csv":
        rows = [(name, v, c) for name, h in sorted(rec["histograms"].items()) for v, c in h]
        return csv_text(["histogram", "value", "freq"], rows), 0
    return dump_json(rec), 0


def cmd_converge(a):
    rec = montecarlo.convergence_experiment(a.model, a.ell_max, a.seed)
    if a.format == "csv":
        return csv_text(["n", "width", "mode_level", "ratio"], rec["checkpoints"]), 0
    return dump_json(rec), 0


def cmd_oracle(a):
    dist = exact.enumerate_exact(a.model, a.n)
    if a.format == "csv":
        rows = [(k, v) for k, v in exact.profile_distribution_json(dist).items()]
        return csv_text(["profile", "probability"], rows), 0
    return dump_json(exact.profile_distribution_json(dist)), 0


def cmd_series(a):
    model = as_model(a.model)
    if a.counts:
        taus = series.tree_counts(model, a.n)
        if a.format == "csv":
            return csv_text(["n", "count"], enumerate(taus)), 0
        return dump_json({"model": format_model_spec(model), "tau": taus}), 0
    k_max = a.k_max if a.k_max is not None else a.n - 1
    row = series.profile_row_increasing(model, a.n, k_max, exact=not a.float)
    rows = [(a.n, k, v) for k, v in enumerate(row.mu)]
    if a.format == "csv":
        return csv_text(["n", "k", "value"], rows), 0
    return dump_json({"model": format_model_spec(model), "n": a.n, "exact": not a.float,
                      "mu": [format_value(v) for v in row.mu],
                      "total": format_value(row.total)}), 0


# -- parser ---------------------------------------------------------------------------

def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logtree", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def add(name, func, help_, model=True, n=True, fmt=("json", "csv"), mc=False):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(func=func)
        if model:
            s.add_argument("--model", required=True, help="model string, e.g. recursive or quad:d=2")
        if n:
            s.add_argument("--n", type=_positive, required=True)
        s.add_argument("--format", choices=fmt, default=fmt[0])
        s.add_argument("--out", help="output path (default stdout)")
        s.add_argument("--seed", type=int, default=DEFAULT_SEED)
        if mc:
            s.add_argument("--threads", type=_positive, default=None,
                           help="worker threads (default LOGTREE_THREADS or all cores)")
            s.add_argument("--allow-large", action="store_true")
        return s

    s = add("generate", cmd_generate, "profile of one random tree", fmt=("csv", "json"))
    s.add_argument("--index", type=int, default=0, help="replication index")
    for name, func in (("exact-profile", cmd_exact_profile), ("exact-moments", cmd_exact_moments)):
        s = add(name, func, "exact expected profile" if func is cmd_exact_profile
                else "exact central moments of the profile", fmt=("csv", "json"))
        s.add_argument("--k-max", type=int, default=None)
        s.add_argument("--float", action="store_true", help="floating point instead of rationals")
        s.add_argument("--all-rows", action="store_true", help="emit every n up to --n")
        if func is cmd_exact_moments:
            s.add_argument("--m-max", type=int, default=4)
            s.add_argument("--m", type=int, default=2, help="moment order for CSV output")
    add("constants", cmd_constants, "drift and variance constants", n=False, fmt=("json",))
    add("predict", cmd_predict, "leading-order predictions", fmt=("json",))
    s = add("simulate", cmd_simulate, "Monte Carlo width and profile statistics", mc=True)
    s.add_argument("--reps", type=_positive, required=True)
    s.add_argument("--histogram", choices=("width", "mode"), default="width")
    s = add("gates", cmd_gates, "run the acceptance gate suite", model=False, n=False,
            fmt=("json",), mc=True)
    s.add_argument("--gate-config", default=None, help="JSON gate configuration")
    s.add_argument("--level", choices=("full", "quick"), default="full")
    s = add("figure1", cmd_figure1, "width vs level histograms for recursive trees",
            model=False, mc=True)
    s.add_argument("--reps", type=_positive, default=montecarlo.CONFIG["figure1"]["reps"])
    s = add("converge", cmd_converge, "single growth path through checkpoints", n=False)
    s.add_argument("--ell-max", type=_positive, default=montecarlo.CONFIG["convergence"]["ell_max"])
    add("oracle", cmd_oracle, "exact profile law by enumeration (tiny n)")
    s = add("series", cmd_series, "generating-function rows for increasing trees",
            fmt=("csv", "json"))
    s.add_argument("--k-max", type=int, default=None)
    s.add_argument("--float", action="store_true")
    s.add_argument("--counts", action="store_true", help="tree counts tau_0..tau_n instead")
    return p


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        text, status = a.func(a)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"logtree: error: {e}", file=sys.stderr)
        return 2
    except (ModelError, ValueError) as e:
        print(f"logtree: error: {e}", file=sys.stderr)
        return 2
    write_output(text, a.out)
    return status


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
