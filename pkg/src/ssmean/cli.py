"""Command-line front end: CSV ingestion and the estimate / simulate / ate
subcommands.

Exit codes: 0 success, 1 I/O or parse failure, 2 estimation precondition
failure. Text output uses 6 significant digits; CSV/JSON keep full double
precision. All state comes from flags, so repeated invocations with the same
flags write byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .ate import AteDataset, estimate_ate
from .basis import BasisSpec, augment, parse_basis_spec
from .errors import (
    ColumnMismatch,
    CsvError,
    EmptyFile,
    EstimationError,
    InvalidArgs,
    MissingColumn,
    MissingMu,
    ParseError,
)
from .estimators import (
    Dataset,
    MeanEstimate,
    estimate_ls,
    estimate_sample_mean,
    estimate_ssls,
)
from .simlab import (
    SETTINGS,
    format_report_text,
    make_cell,
    run_table1,
    write_report_csv,
    write_report_json,
)


# ---------------------------------------------------------------------------
# CSV ingestion and fixture writers

def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise EmptyFile(f"{path}: no header row")
    header = [name.strip() for name in rows[0]]
    return header, rows[1:]


def _parse_numeric_rows(
    data: list[list[str]], header: list[str], columns: list[int], path
) -> np.ndarray:
    """Parse the selected columns of every data row; collect every bad cell
    and reject the file naming them."""
    values = np.empty((len(data), len(columns)))
    bad: list[tuple[int, str]] = []
    for i, row in enumerate(data):
        if len(row) != len(header):
            bad.append((i + 1, f"<{len(row)} cells, expected {len(header)}>"))
            continue
        for j, col in enumerate(columns):
            cell = row[col].strip()
            try:
                parsed = float(cell)
            except ValueError:
                parsed = float("nan")
            if not math.isfinite(parsed):
                bad.append((i + 1, header[col]))
                continue
            values[i, j] = parsed
    if bad:
        listing = "; ".join(f"row {r}, column {c}" for r, c in bad[:20])
        more = "" if len(bad) <= 20 else f" (+{len(bad) - 20} more)"
        raise ParseError(
            f"{path}: rejected rows with non-numeric or missing cells: {listing}{more}",
            row=bad[0][0],
            col=bad[0][1],
        )
    return values


def load_labeled_csv(path, response_col: str) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Load header-first CSV into (y, x, covariate_names).

    Every non-response numeric column becomes a covariate, in header order.
    """
    header, data = _read_csv(path)
    if len(set(header)) != len(header):
        raise ParseError(f"{path}: duplicate column names in header")
    if response_col not in header:
        raise MissingColumn(f"{path}: response column {response_col!r} not in header {header}")
    if not data:
        raise EmptyFile(f"{path}: no data rows")
    y_col = header.index(response_col)
    cov_cols = [i for i in range(len(header)) if i != y_col]
    parsed = _parse_numeric_rows(data, header, [y_col] + cov_cols, path)
    return parsed[:, 0], parsed[:, 1:], [header[i] for i in cov_cols]


def load_unlabeled_csv(path, expected_cols: Sequence[str]) -> np.ndarray:
    """Load unlabeled covariates; the header must contain exactly the labeled
    file's covariate columns (any order). Zero data rows are fine (m = 0)."""
    header, data = _read_csv(path)
    if len(set(header)) != len(header):
        raise ParseError(f"{path}: duplicate column names in header")
    expected = list(expected_cols)
    if set(header) != set(expected):
        missing = sorted(set(expected) - set(header))
        extra = sorted(set(header) - set(expected))
        raise ColumnMismatch(
            f"{path}: covariate columns differ from the labeled file "
            f"(missing {missing}, unexpected {extra})"
        )
    order = [header.index(name) for name in expected]
    if not data:
        return np.empty((0, len(expected)))
    return _parse_numeric_rows(data, header, order, path)


def write_labeled_csv(path, y, x, response_col: str = "y", cov_names=None) -> None:
    """Fixture writer; full-precision floats so a reload is bit-identical."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    names = list(cov_names) if cov_names is not None else [f"x{j + 1}" for j in range(x.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([response_col] + names)
        for yi, row in zip(y, x):
            writer.writerow([repr(float(yi))] + [repr(float(v)) for v in row])


def write_unlabeled_csv(path, x, cov_names=None) -> None:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    names = list(cov_names) if cov_names is not None else [f"x{j + 1}" for j in range(x.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in x:
            writer.writerow([repr(float(v)) for v in row])


def parse_mu(text: str, p: int) -> np.ndarray:
    """Known covariate mean from a comma-separated literal or a file of
    numbers."""
    source = text
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            source = fh.read()
    tokens = [tok for tok in source.replace(",", " ").split() if tok]
    try:
        mu = np.asarray([float(tok) for tok in tokens])
    except ValueError as exc:
        raise InvalidArgs(f"could not parse --mu value {text!r}: {exc}") from None
    if mu.shape[0] != p:
        raise InvalidArgs(f"--mu has {mu.shape[0]} entries but the data has {p} covariates")
    if not np.all(np.isfinite(mu)):
        raise InvalidArgs("--mu entries must be finite")
    return mu


# ---------------------------------------------------------------------------
# Rendering helpers

def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.6g}"
    return str(value)


def _text_table(header: list[str], rows: list[list[str]]) -> str:
    table = [header] + rows
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    return "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in table
    )


def _csv_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ";".join(repr(float(v)) for v in value)
    return str(value)


def _emit(text_body: str, rows: list[dict], columns: list[str], args) -> None:
    out = getattr(args, "out", None)
    fmt = getattr(args, "format", "text")
    if fmt == "text":
        payload = text_body + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_field(row.get(c)) for c in columns])
        payload = buf.getvalue()
    else:
        clean = [
            {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}
            for row in rows
        ]
        payload = json.dumps(clean, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(payload)
    else:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(payload)


# ---------------------------------------------------------------------------
# estimate

_VARIANCE_BASIS = {"mean": "sigma2_y", "ls": "mse", "ssls": "nu2"}


def _estimate_rows(name: str, est: MeanEstimate, ds: Dataset) -> dict:
    if name == "mean":
        adjustment = 0.0
        beta2 = None
    else:
        fit = est.fit
        beta2 = fit.beta2
        if name == "ssls":
            adjustment = float(fit.beta2 @ (ds.pooled_x().mean(axis=0) - ds.x.mean(axis=0)))
        else:
            adjustment = float(fit.beta2 @ (ds.known_mu - ds.x.mean(axis=0)))
    return {
        "estimator": name,
        "theta_hat": est.theta_hat,
        "variance_basis": _VARIANCE_BASIS[name],
        "variance_per_n": est.variance_per_n,
        "ci_lower": est.ci_lower,
        "ci_upper": est.ci_upper,
        "ci_length": est.ci_length,
        "alpha": est.alpha,
        "truncated": est.truncated,
        "adjustment": adjustment,
        "beta2": None if beta2 is None else [float(b) for b in beta2],
    }


def cmd_estimate(args) -> None:
    y, x, names = load_labeled_csv(args.labeled, args.response)
    x_unlabeled = None
    if args.unlabeled:
        x_unlabeled = load_unlabeled_csv(args.unlabeled, names)
    known_mu = parse_mu(args.mu, x.shape[1]) if args.mu else None
    ds = Dataset(y=y, x=x, x_unlabeled=x_unlabeled, known_mu=known_mu)

    spec: Optional[BasisSpec] = parse_basis_spec(args.basis, ds.n, ds.p)
    ds_est = ds if spec is None else augment(ds, spec)

    if args.estimator:
        requested = list(dict.fromkeys(args.estimator))
    else:
        requested = ["mean"]
        if ds_est.known_mu is not None:
            requested.append("ls")
        if ds_est.m > 0:
            requested.append("ssls")

    rows = []
    for name in requested:
        if name == "mean":
            est = estimate_sample_mean(ds_est, args.alpha)
        elif name == "ls":
            if ds_est.known_mu is None:
                if ds.known_mu is not None:
                    raise MissingMu(
                        "the requested basis has no closed-form means, so known_mu was "
                        "dropped; use ssls or a trig basis"
                    )
                raise MissingMu("--estimator ls needs --mu")
            est = estimate_ls(ds_est, args.alpha, truncate=args.truncate)
        else:
            est = estimate_ssls(ds_est, args.alpha, truncate=args.truncate)
        rows.append(_estimate_rows(name, est, ds_est))

    header = [
        "estimator", "theta_hat", "variance_basis", "variance_per_n",
        "ci_lower", "ci_upper", "ci_length", "truncated", "adjustment", "beta2",
    ]
    text_rows = []
    for row in rows:
        text_rows.append([
            row["estimator"], _fmt(row["theta_hat"]), row["variance_basis"],
            _fmt(row["variance_per_n"]), _fmt(row["ci_lower"]), _fmt(row["ci_upper"]),
            _fmt(row["ci_length"]), str(row["truncated"]), _fmt(row["adjustment"]),
            "" if row["beta2"] is None else ",".join(_fmt(b) for b in row["beta2"]),
        ])
    body = [f"n={ds.n} p={ds.p} m={ds.m} alpha={_fmt(args.alpha)}"]
    if spec is not None:
        body.append(f"basis={spec.label()} augmented_p={ds_est.p}")
    body.append(_text_table(header, text_rows))
    _emit("\n".join(body), rows, header + ["alpha"], args)


# ---------------------------------------------------------------------------
# simulate

def _parse_m_list(text: str) -> tuple[float, ...]:
    values = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token.lower() in ("inf", "infinity"):
            values.append(float("inf"))
            continue
        try:
            m = int(token)
        except ValueError:
            raise InvalidArgs(f"bad -m entry {token!r}; expected integers or inf") from None
        if m < 0:
            raise InvalidArgs(f"-m entries must be nonnegative, got {m}")
        values.append(float(m))
    if not values:
        raise InvalidArgs("-m list is empty")
    return tuple(values)


def cmd_simulate(args) -> None:
    cell = make_cell(
        setting=args.setting,
        n=args.n,
        p=args.p,
        m_values=_parse_m_list(args.m),
        seed=args.seed,
        tau2=args.tau2,
    )
    reports = run_table1(
        [cell],
        reps=args.reps,
        alpha=args.alpha,
        threads=args.threads,
    )
    text = format_report_text(reports)
    if args.out:
        if args.format == "csv":
            write_report_csv(reports, args.out)
        elif args.format == "json":
            write_report_json(reports, args.out)
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------------------
# ate

def cmd_ate(args) -> None:
    y_t, x_t, names = load_labeled_csv(args.treatment, args.response)
    y_c, x_c, names_c = load_labeled_csv(args.control, args.response)
    if names_c != names:
        if set(names_c) != set(names):
            missing = sorted(set(names) - set(names_c))
            extra_cols = sorted(set(names_c) - set(names))
            raise ColumnMismatch(
                f"{args.control}: covariate columns differ from the treatment file "
                f"(missing {missing}, unexpected {extra_cols})"
            )
        x_c = x_c[:, [names_c.index(name) for name in names]]
    extra = load_unlabeled_csv(args.extra, names) if args.extra else None
    ds = AteDataset(y_t=y_t, x_t=x_t, y_c=y_c, x_c=x_c, extra_x=extra)
    est = estimate_ate(ds, args.alpha)
    row = {
        "d_hat": est.d_hat,
        "v_hat2": est.v_hat2,
        "ci_lower": est.ci_lower,
        "ci_upper": est.ci_upper,
        "ci_length": est.ci_length,
        "alpha": est.alpha,
        "n_t": ds.n_t,
        "n_c": ds.n_c,
        "m": ds.m,
        "mse_t": est.fit_t.mse,
        "mse_c": est.fit_c.mse,
    }
    header = list(row)
    text = _text_table(header, [[_fmt(row[k]) for k in header]])
    _emit(text, [row], header, args)


# ---------------------------------------------------------------------------
# parser / entry

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssmean",
        description="Semi-supervised estimation of population means and treatment effects.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    est = sub.add_parser("estimate", help="estimate the population mean from CSV data")
    est.add_argument("--labeled", required=True, help="CSV with response and covariates")
    est.add_argument("--response", default="y", help="response column name (default y)")
    est.add_argument("--unlabeled", help="CSV with covariate-only rows")
    est.add_argument("--mu", help="known covariate mean: comma literal or file of numbers")
    est.add_argument("--alpha", type=float, default=0.05)
    est.add_argument("--basis", default="none", help="none, auto, poly:K or trig:K")
    est.add_argument("--truncate", action="store_true", help="clamp estimates to the response band")
    est.add_argument(
        "--estimator", action="append", choices=("mean", "ls", "ssls"),
        help="repeatable; default: mean plus whichever of ls/ssls the inputs allow",
    )
    est.add_argument("--out", help="output path (default stdout)")
    est.add_argument("--format", choices=("text", "csv", "json"), default="text")
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="run a seeded Monte Carlo cell")
    sim.add_argument("--setting", required=True, choices=SETTINGS)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--m", default="0", help="comma list of unlabeled sizes (ints or inf)")
    sim.add_argument("--reps", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--alpha", type=float, default=0.05)
    sim.add_argument("--tau2", type=float, default=1.0, help="gauss-linear noise variance")
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--out", help="report file path")
    sim.add_argument("--format", choices=("text", "csv", "json"), default="csv")
    sim.set_defaults(func=cmd_simulate)

    ate = sub.add_parser("ate", help="semi-supervised average treatment effect")
    ate.add_argument("--treatment", required=True, help="treatment-group CSV")
    ate.add_argument("--control", required=True, help="control-group CSV")
    ate.add_argument("--extra", help="CSV of extra covariate-only rows")
    ate.add_argument("--response", default="y")
    ate.add_argument("--alpha", type=float, default=0.05)
    ate.add_argument("--out", help="output path (default stdout)")
    ate.add_argument("--format", choices=("text", "csv", "json"), default="text")
    ate.set_defaults(func=cmd_ate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CsvError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
