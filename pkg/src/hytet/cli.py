"""Command line front end.

Exit codes: 0 success, 2 malformed input, 3 not realizable / wrong shape,
4 numerical failure (branch integrity, convergence) or a failed ``check`` row.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Iterator

import click

from . import gram, oracle, volume
from .errors import GeometryError, HytetError, NumericalError

EXIT_INPUT = 2
EXIT_GEOMETRY = 3
EXIT_NUMERIC = 4


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, GeometryError):
        return EXIT_GEOMETRY
    if isinstance(exc, NumericalError):
        return EXIT_NUMERIC
    return EXIT_INPUT


def parse_six(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 6:
        raise ValueError(f"expected six comma-separated values, got {len(parts)}")
    vals = tuple(float(p) for p in parts)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("values must be finite")
    return vals


def format_real(x: float) -> str:
    return f"{x:.12f}"


def _complex(z: complex) -> list[float]:
    return [z.real, z.imag]


def result_to_dict(r: volume.VolumeResult) -> dict:
    return {
        "volume": r.volume,
        "shape": r.shape.value,
        "method": r.method,
        "z_minus": _complex(r.z_pair.z_minus),
        "z_plus": _complex(r.z_pair.z_plus),
        "residues": list(r.residues),
        "partials": list(r.partials) if r.partials is not None else None,
        "diagnostics": dict(r.diagnostics),
    }


def compute(kind: str, values: Iterable[float]) -> volume.VolumeResult:
    if kind == "lengths":
        return volume.volume_from_lengths(values)
    if kind == "angles":
        return volume.volume_from_angles(values)
    raise ValueError(f"kind must be 'angles' or 'lengths', not {kind!r}")


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _run(fn):
    try:
        return fn()
    except HytetError as exc:
        raise _Fail(_exit_code(exc), f"{type(exc).__name__}: {exc}") from exc
    except ValueError as exc:
        raise _Fail(EXIT_INPUT, f"invalid input: {exc}") from exc


def _which(lengths: str | None, angles: str | None) -> tuple[str, tuple[float, ...]]:
    if (lengths is None) == (angles is None):
        raise click.UsageError("give exactly one of --lengths or --angles")
    kind, text = ("lengths", lengths) if lengths is not None else ("angles", angles)
    try:
        return kind, parse_six(text)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint=f"--{kind}") from exc


def _finish(fn):
    try:
        fn()
    except _Fail as exc:
        click.echo(str(exc), err=True)
        sys.exit(exc.code)


_input_opts = [
    click.option("--lengths", metavar="L1,...,L6", help="Six edge lengths, l1..l6."),
    click.option("--angles", metavar="A1,...,A6", help="Six dihedral angles in radians, A1..A6."),
]


def _with_input(f):
    for opt in reversed(_input_opts):
        f = opt(f)
    return f


@click.group()
def main():
    """Volumes of hyperbolic tetrahedra from edge lengths or dihedral angles.

    Edge/angle k sits on the edge joining vertices (3,4), (2,4), (1,4),
    (1,2), (1,3), (2,3) for k = 1..6.
    """


@main.command()
@_with_input
@click.option("--json", "as_json", is_flag=True, help="Print the full result as JSON.")
def vol(lengths, angles, as_json):
    """Volume of one tetrahedron."""
    kind, vals = _which(lengths, angles)

    def go():
        r = _run(lambda: compute(kind, vals))
        click.echo(json.dumps(result_to_dict(r)) if as_json else format_real(r.volume))

    _finish(go)


@main.command()
@_with_input
@click.option("--json", "as_json", is_flag=True)
def convert(lengths, angles, as_json):
    """Convert lengths to dihedral angles or angles to lengths."""
    kind, vals = _which(lengths, angles)

    def go():
        if kind == "lengths":
            out = _run(lambda: gram.lengths_to_angles(vals))
            target = "angles"
        else:
            out = _run(lambda: gram.angles_to_lengths(vals))
            target = "lengths"
        if as_json:
            click.echo(json.dumps({"kind": target, "values": list(out)}))
        else:
            click.echo(",".join(format_real(x) for x in out))

    _finish(go)


@main.command("oracle")
@click.option("--lengths", required=True, metavar="L1,...,L6")
@click.option("--rel-tol", default=1e-8, show_default=True, type=float)
@click.option("--json", "as_json", is_flag=True)
def oracle_cmd(lengths, rel_tol, as_json):
    """Volume by adaptive cubature in the Klein model (no dilogarithms)."""
    _, vals = _which(lengths, None)

    def go():
        spec = _run(lambda: oracle.QuadratureSpec(rel_tol))
        rec = _run(lambda: oracle.make_golden(vals, spec))
        if as_json:
            click.echo(json.dumps({"volume": rec.volume, "rel_tol": rec.rel_tol, "cells": rec.cells}))
        else:
            click.echo(format_real(rec.volume))

    _finish(go)


def check_rows(kind: str, vals: tuple[float, ...], oracle_tol: float) -> list[tuple[str, float, float]]:
    """(name, measured, threshold) rows; a row passes when measured < threshold."""
    if kind == "angles":
        angles = vals
        lengths = gram.angles_to_lengths(vals)
    else:
        lengths = vals
        angles = gram.lengths_to_angles(vals)
    rl = volume.volume_from_lengths(lengths)
    ra = volume.volume_from_angles(angles)
    back = gram.angles_to_lengths(angles)
    d = lambda key: rl.diagnostics.get(key, math.nan)  # noqa: E731  missing -> FAIL
    rows = [
        ("roundtrip", max(abs(x - y) for x, y in zip(back, lengths)), 1e-9),
        ("quadratic_residual", d("quad_residual"), 1e-10),
        ("closed_form_roots", d("closed_form_gap"), 1e-10),
        ("residue_real", d("residue_real"), volume.RESIDUE_REAL_TOL),
        ("residue_imag", d("residue_imag"), volume.RESIDUE_SNAP),
        ("congruence", d("congruence"), volume.CONGRUENCE_TOL),
        ("imag_part", d("imag_part"), 1e-9),
        ("cross_formula", abs(rl.volume - ra.volume), volume.FORMULA_TOL),
        ("schlafli", volume.schlafli_defect(angles), 1e-6),
        ("oracle", abs(rl.volume - oracle.oracle_volume_from_lengths(lengths)), oracle_tol),
    ]
    return rows


@main.command()
@_with_input
def check(lengths, angles):
    """Run the invariant suite on one tetrahedron and print a pass/fail table."""
    kind, vals = _which(lengths, angles)
    tol = float(os.environ.get("HYTET_TOL", volume.ORACLE_TOL))

    def go():
        rows = _run(lambda: check_rows(kind, vals, tol))
        ok = True
        for name, value, limit in rows:
            passed = value < limit
            ok &= passed
            click.echo(f"{name:<20} {value:<12.3e} < {limit:<8.1e} {'PASS' if passed else 'FAIL'}")
        if not ok:
            raise _Fail(EXIT_NUMERIC, "check failed")

    _finish(go)


# --- batch --------------------------------------------------------------------


def _read_records(text: str, fmt: str) -> Iterator[tuple[str | None, object]]:
    """Yield (kind, raw values) per record; malformed records yield what could be read."""
    if fmt == "jsonl":
        for line in text.splitlines():
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield obj.get("kind"), obj.get("values")
            except (json.JSONDecodeError, AttributeError) as exc:
                yield None, exc
        return
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return
    if [h.strip() for h in header] != ["kind", "v1", "v2", "v3", "v4", "v5", "v6"]:
        raise ValueError("CSV header must be kind,v1,v2,v3,v4,v5,v6")
    for row in reader:
        if not row:
            continue
        yield row[0].strip(), row[1:]


def process_record(item: tuple[int, str | None, object]) -> dict:
    index, kind, raw = item
    rec = {"index": index, "kind": kind}
    try:
        if isinstance(raw, Exception):
            raise ValueError(f"unparseable record: {raw}")
        if not isinstance(raw, (list, tuple)):
            raise ValueError("values must be a list of six numbers")
        vals = gram.as_six([float(v) for v in raw])
        rec["values"] = list(vals)
        r = compute(kind, vals)
        rec.update(volume=r.volume, shape=r.shape.value, error=None)
    except (HytetError, ValueError, TypeError) as exc:
        rec.update(volume=None, shape=None, error={"type": type(exc).__name__, "message": str(exc),
                                                   "exit_code": _exit_code(exc)})
    return rec


def batch_stream(records: Iterable[tuple[str | None, object]], jobs: int = 1) -> Iterator[dict]:
    """One output record per input record, in input order."""
    items = [(i, k, v) for i, (k, v) in enumerate(records)]
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            yield from pool.map(process_record, items, chunksize=8)
    else:
        yield from map(process_record, items)


@main.command()
@click.option("--input", "input_path", required=True, help="Input file ('-' for stdin).")
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), required=True)
@click.option("--jobs", default=1, show_default=True, help="Worker processes.")
def batch(input_path, fmt, jobs):
    """Volumes for a CSV (kind,v1..v6) or JSONL ({kind, values}) file."""
    try:
        text = sys.stdin.read() if input_path == "-" else open(input_path, encoding="utf-8").read()
        records = list(_read_records(text, fmt))
    except (OSError, UnicodeDecodeError, ValueError) as exc:
        click.echo(f"cannot read {input_path}: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    out = click.get_text_stream("stdout")
    if fmt == "jsonl":
        for rec in batch_stream(records, jobs):
            out.write(json.dumps(rec) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["index", "kind", "volume", "shape", "error"])
    for rec in batch_stream(records, jobs):
        err = rec["error"]
        writer.writerow([
            rec["index"], rec["kind"] or "",
            "" if rec["volume"] is None else repr(rec["volume"]),
            rec["shape"] or "",
            "" if err is None else f"{err['type']}: {err['message']}",
        ])


def run(argv: list[str]) -> int:
    """Invoke the CLI in-process and return its exit code."""
    try:
        main.main(args=argv, prog_name="hytet", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    main()
