"""Command-line client for the level-analytics service.

Every command talks to the HTTP service (in process by default, remote
with ``--server``), writes plot-ready tables or JSON result files, and is
deterministic given its flags.  Exit codes: 0 success, 1 validation or
domain error, 2 I/O or parse error.  Errors go to stderr as one-line
JSON.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .client import ServiceClient, ServiceError, TransportError

_EXIT_DOMAIN = 1
_EXIT_IO = 2


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _fail(code: int, kind: str, message: str) -> None:
    click.echo(json.dumps({"error": {"kind": kind, "message": message}}), err=True)
    sys.exit(code)


def _client(ctx: click.Context) -> ServiceClient:
    return ServiceClient(ctx.obj.get("server"))


def _call(ctx: click.Context, path: str, payload: dict) -> dict:
    try:
        with _client(ctx) as client:
            return client.post(path, payload)
    except ServiceError as exc:
        _fail(_EXIT_IO if exc.kind == "parse" else _EXIT_DOMAIN, exc.kind, exc.message)
    except TransportError as exc:
        _fail(_EXIT_IO, "io", str(exc))
    raise AssertionError("unreachable")


def _comment_header(command: str, invocation: dict) -> str:
    pairs = " ".join(f"{key}={_fmt(value)}" for key, value in invocation.items())
    return f"# command={command} {pairs}\n"


def _write_text(out: str, text: str) -> None:
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _report(out: str, line: str) -> None:
    """Status line: stderr when the table goes to stdout, stdout otherwise."""
    click.echo(line, err=(out == "-"))


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(_EXIT_IO, "io", str(exc))
    except UnicodeDecodeError as exc:
        _fail(_EXIT_IO, "parse", f"{path} is not UTF-8: {exc}")
    raise AssertionError("unreachable")


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in process.")
@click.pass_context
def cli(ctx: click.Context, server: str | None) -> None:
    """Trading-level analytics: spectra, densities, and detection."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@cli.command()
@click.option("--lambda", "lam", type=float, default=None,
              help="Scaled quartic coupling (exclusive with --delta).")
@click.option("--n-max", type=int, default=5, show_default=True)
@click.option("--h", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--delta", type=float, default=None,
              help="Raw quartic coefficient (exclusive with --lambda).")
@click.option("--method", type=click.Choice(["cubic", "numeric"]), default="cubic",
              show_default=True)
@click.option("--out", default="-", show_default=True)
@click.pass_context
def levels(ctx, lam, n_max, h, alpha, delta, method, out):
    """Level table: n, omega, intrinsic volume (CSV)."""
    payload = {"n_max": n_max, "h": h, "alpha": alpha, "method": method}
    if lam is not None:
        payload["lambda"] = lam
    if delta is not None:
        payload["delta"] = delta
    body = _call(ctx, "/levels", payload)

    invocation = {"lambda": lam, "n_max": n_max, "h": h, "alpha": alpha,
                  "delta": delta, "method": method, "out": out}
    columns = ["n", "omega", "e_bar", "status"]
    if method == "numeric":
        columns += ["cubic_omega", "cubic_rel_dev"]
    lines = [_comment_header("levels", invocation), ",".join(columns) + "\n"]
    for row in body["levels"]:
        lines.append(",".join(_fmt(row.get(col)) for col in columns) + "\n")
    _write_text(out, "".join(lines))


@cli.command()
@click.option("--n", type=int, default=None, help="Single level index.")
@click.option("--levels", "level_list", default=None, metavar="N0,N1,...",
              help="Mixture level indices (with --weights).")
@click.option("--weights", default=None, metavar="W0,W1,...")
@click.option("--h", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--delta", type=float, default=None)
@click.option("--grid", default=None, metavar="MIN:MAX:N",
              help="Return grid override.")
@click.option("--out", default="-", show_default=True)
@click.pass_context
def density(ctx, n, level_list, weights, h, alpha, delta, grid, out):
    """Return-density table (r, f) plus a mode-count report."""
    payload: dict = {"h": h, "alpha": alpha}
    if delta is not None:
        payload["delta"] = delta
    if n is not None:
        payload["n"] = n
    if level_list is not None:
        try:
            payload["levels"] = [int(part) for part in level_list.split(",")]
        except ValueError:
            _fail(_EXIT_DOMAIN, "usage", f"bad --levels value {level_list!r}")
    if weights is not None:
        try:
            payload["weights"] = [float(part) for part in weights.split(",")]
        except ValueError:
            _fail(_EXIT_DOMAIN, "usage", f"bad --weights value {weights!r}")
    if grid is not None:
        try:
            lo, hi, count = grid.split(":")
            payload["grid"] = {"start": float(lo), "stop": float(hi),
                               "n_points": int(count)}
        except ValueError:
            _fail(_EXIT_DOMAIN, "usage", f"bad --grid value {grid!r}, want MIN:MAX:N")
    body = _call(ctx, "/density", payload)

    invocation = {"n": n, "levels": level_list, "weights": weights, "h": h,
                  "alpha": alpha, "delta": delta, "grid": grid, "out": out}
    lines = [_comment_header("density", invocation), "r,f\n"]
    for r_value, f_value in zip(body["r"], body["f"]):
        lines.append(f"{_fmt(r_value)},{_fmt(f_value)}\n")
    _write_text(out, "".join(lines))
    _report(out, f"modes={body['mode_count']} integral={_fmt(body['integral'])}")


@cli.command()
@click.option("--input", "input_path", required=True, metavar="BARS.CSV")
@click.option("--boot", type=int, default=100, show_default=True)
@click.option("--alpha-sig", type=float, default=0.05, show_default=True)
@click.option("--step", type=float, default=0.05, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="-", show_default=True)
@click.pass_context
def detect(ctx, input_path, boot, alpha_sig, step, seed, out):
    """Ground-level detection on an OHLCV CSV; writes a JSON result file."""
    csv_text = _read_file(input_path)
    payload = {"csv": csv_text,
               "config": {"step_fraction": step, "n_boot": boot,
                          "alpha_sig": alpha_sig, "seed": seed}}
    body = _call(ctx, "/detect", payload)

    eta = ">1" if body["flagged"] else body["eta"]
    document = {
        "command": "detect",
        "invocation": {"input": input_path, "boot": boot, "alpha_sig": alpha_sig,
                       "step": step, "seed": seed, "out": out},
        "result": {
            "e0": body["e0"],
            "eta": eta,
            "flagged": body["flagged"],
            "v_max": body["v_max"],
            "v_min": body["v_min"],
            "n_records": body["n_records"],
            "config": body["config"],
            "trace": body["trace"],
        },
    }
    _write_text(out, json.dumps(document, indent=2, sort_keys=True) + "\n")
    e0_text = _fmt(body["e0"]) if body["e0"] is not None else "none"
    eta_text = body["eta_text"] if body["flagged"] else _fmt(body["eta"])
    _report(out, f"e0={e0_text} eta={eta_text}")


@cli.command()
@click.option("--low", type=int, default=0, show_default=True)
@click.option("--high", type=int, default=1, show_default=True)
@click.option("--threshold-pct", type=float, default=60.0, show_default=True)
@click.option("--days", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="-", show_default=True)
@click.pass_context
def synth(ctx, low, high, threshold_pct, days, seed, out):
    """Synthetic OHLCV bars with a planted volume threshold between levels."""
    payload = {"low": low, "high": high, "threshold_pct": threshold_pct,
               "days": days, "seed": seed}
    body = _call(ctx, "/synth", payload)
    _write_text(out, body["csv"])
    if out != "-":
        meta = {"command": "synth",
                "invocation": {"low": low, "high": high,
                               "threshold_pct": threshold_pct, "days": days,
                               "seed": seed, "out": out},
                "planted_threshold": body["planted_threshold"]}
        Path(out + ".meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n",
            encoding="utf-8", newline="\n")


@cli.command()
@click.option("--input", "input_path", required=True, metavar="RETURNS.CSV",
              help="File with one numeric column (optional header line).")
@click.option("--boot", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def dip(ctx, input_path, boot, seed):
    """Dip statistic and calibrated p-value for a return sample."""
    text = _read_file(input_path)
    values: list[float] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        token = line.strip()
        if not token:
            continue
        try:
            values.append(float(token))
        except ValueError:
            if line_no == 1:  # tolerate a header line
                continue
            _fail(_EXIT_IO, "parse", f"line {line_no}: not a number: {token!r}")
    body = _call(ctx, "/dip", {"values": values, "n_boot": boot, "seed": seed})
    click.echo(f"dip={_fmt(body['statistic'])} p_value={_fmt(body['p_value'])} "
               f"n={body['n']} n_boot={body['n_boot']} seed={body['seed']}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app
    uvicorn.run(app, host=host, port=port)


def main(argv=None) -> int:
    try:
        cli(args=argv, standalone_mode=False, obj={})
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(130)
    except click.ClickException as exc:
        _fail(_EXIT_DOMAIN, "usage", exc.format_message())
    return 0


if __name__ == "__main__":
    sys.exit(main())
