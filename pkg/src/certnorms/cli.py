"""Command-line client for the certnorms service.

By default every command talks to an in-process instance of the FastAPI app
(no network, no separate process); pass ``--server URL`` to target a running
server instead.  Identical command + configuration produces byte-identical
output.  Flag > environment variable (CERTNORMS_*) > default.

Exit codes: 0 ok, 2 validation failure, 3 cap exceeded, 4 certified-bound
assertion failure.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from typing import Optional

import click
import httpx


def _post_inprocess(path: str, payload: dict) -> httpx.Response:
    import asyncio

    from .service.app import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://certnorms.local", timeout=600.0
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _post(ctx: click.Context, path: str, payload: dict) -> dict:
    server = ctx.obj["server"]
    try:
        if server:
            with httpx.Client(base_url=server, timeout=600.0) as client:
                resp = client.post(path, json=payload)
        else:
            resp = _post_inprocess(path, payload)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach server: {exc}", err=True)
        raise SystemExit(2)
    if resp.status_code == 422:
        body = resp.json()
        # library error surfaced by the service, or a pydantic schema error
        if "exit_code" in body:
            click.echo(f"error [{body.get('kind', 'Error')}]: {body.get('error')}", err=True)
            raise SystemExit(int(body["exit_code"]))
        click.echo(f"error: invalid request: {body}", err=True)
        raise SystemExit(2)
    if resp.status_code != 200:
        click.echo(f"error: server returned {resp.status_code}: {resp.text}", err=True)
        raise SystemExit(2)
    return resp.json()


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        raise SystemExit(2)


def _emit(ctx: click.Context, text: str) -> None:
    out = ctx.obj["out"]
    data = text if text.endswith("\n") else text + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def _emit_json(ctx: click.Context, obj) -> None:
    _emit(ctx, json.dumps(obj, sort_keys=True, indent=2))


def _kv_csv(pairs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in pairs:
        w.writerow([k, "" if v is None else v])
    return buf.getvalue()


def _flatten(prefix: str, obj, pairs) -> None:
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], pairs)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, pairs)
    else:
        pairs.append((prefix, obj))


def _emit_result(ctx: click.Context, obj: dict) -> None:
    if ctx.obj["format"] == "csv":
        pairs: list = []
        _flatten("", obj, pairs)
        _emit(ctx, _kv_csv(pairs))
    else:
        _emit_json(ctx, obj)


@click.group()
@click.option("--server", envvar="CERTNORMS_SERVER", default=None, help="Remote service URL; default is in-process.")
@click.option("--seed", envvar="CERTNORMS_SEED", type=int, default=0, show_default=True)
@click.option("--tol", envvar="CERTNORMS_TOL", type=float, default=None, help="Tolerance; per-command default if omitted.")
@click.option("--cap-enum", envvar="CERTNORMS_CAP_ENUM", type=int, default=24, show_default=True, help="Exact-enumeration cap (variables).")
@click.option("--format", "fmt", envvar="CERTNORMS_FORMAT", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--out", envvar="CERTNORMS_OUT", type=click.Path(dir_okay=False, writable=True), default=None, help="Write output to a file instead of stdout.")
@click.pass_context
def main(ctx, server, seed, tol, cap_enum, fmt, out):
    """Certified norms, query error, and witness experiments."""
    ctx.ensure_object(dict)
    ctx.obj.update(server=server, seed=seed, tol=tol, cap_enum=cap_enum, format=fmt, out=out)


@main.command()
@click.argument("poly_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--partition", "partition_file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def norms(ctx, poly_file, partition_file):
    """Sup-norm, expected-absolute-value norm, and (bilinear) cb interval."""
    payload = {
        "poly": _load_json(poly_file),
        "partition": _load_json(partition_file) if partition_file else None,
        "cap_enum": ctx.obj["cap_enum"],
        "seed": ctx.obj["seed"],
    }
    _emit_result(ctx, _post(ctx, "/norms", payload))


@main.command("dual-norms")
@click.argument("poly_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--partition", "partition_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--cert", "cert_file", type=click.Path(exists=True, dir_okay=False), default=None, help="Certificate JSON for the dual-cb upper bound.")
@click.pass_context
def dual_norms(ctx, poly_file, partition_file, cert_file):
    """Certified intervals for the dual sup-norm and the dual cb norm."""
    payload = {
        "poly": _load_json(poly_file),
        "partition": _load_json(partition_file),
        "certificate": _load_json(cert_file) if cert_file else None,
        "tol": ctx.obj["tol"] if ctx.obj["tol"] is not None else 1e-5,
        "seed": ctx.obj["seed"],
    }
    _emit_result(ctx, _post(ctx, "/dual-norms", payload))


@main.command("query-error")
@click.option("--matrix", "matrix_file", type=click.Path(exists=True, dir_okay=False), default=None, help='JSON file: {"rows": [[...], ...]} or a bare array.')
@click.option("--poly", "poly_file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--partition", "partition_file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def query_error(ctx, matrix_file, poly_file, partition_file):
    """Certified one-query error interval for a bounded bilinear form."""
    matrix = None
    if matrix_file:
        obj = _load_json(matrix_file)
        matrix = obj["rows"] if isinstance(obj, dict) else obj
    payload = {
        "matrix": matrix,
        "poly": _load_json(poly_file) if poly_file else None,
        "partition": _load_json(partition_file) if partition_file else None,
        "tol": ctx.obj["tol"] if ctx.obj["tol"] is not None else 5e-3,
        "seed": ctx.obj["seed"],
    }
    _emit_result(ctx, _post(ctx, "/query-error", payload))


@main.command("kg-bounds")
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--samples", type=int, default=20, show_default=True)
@click.pass_context
def kg_bounds(ctx, k, samples):
    """Certified cb/(sup->1) ratio intervals on seeded random matrices."""
    report = _post(ctx, "/kg-bounds", {"k": k, "samples": samples, "seed": ctx.obj["seed"]})
    if ctx.obj["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "matrix_hash", "inf_to_one", "cb_lower", "cb_upper", "ratio_lower", "ratio_upper"])
        for s in report["samples"]:
            w.writerow(
                [
                    s["index"],
                    s["matrix_hash"],
                    f"{s['inf_to_one']:.12g}",
                    f"{s['cb_lower']:.12g}",
                    f"{s['cb_upper']:.12g}",
                    f"{s['ratio_lower']:.12g}",
                    f"{s['ratio_upper']:.12g}",
                ]
            )
        _emit(ctx, buf.getvalue())
    else:
        _emit_json(ctx, report)


@main.command()
@click.option("--n", "n_spec", required=True, help="Comma-separated odd n values, e.g. 3,5,7.")
@click.option("--dump-cert", "dump_cert", type=click.Path(dir_okay=False, writable=True), default=None, help="Write the extended certificate JSON (single n only).")
@click.pass_context
def witness(ctx, n_spec, dump_cert):
    """Moebius witness family: exact ratio table and weight-1 certificates."""
    try:
        n_list = [int(x) for x in n_spec.split(",") if x.strip()]
    except ValueError:
        click.echo(f"error: bad --n value {n_spec!r}", err=True)
        raise SystemExit(2)
    if dump_cert and len(n_list) != 1:
        click.echo("error: --dump-cert requires a single n", err=True)
        raise SystemExit(2)
    payload = {"n_list": n_list, "dump_cert_n": n_list[0] if dump_cert else None}
    resp = _post(ctx, "/witness", payload)
    if dump_cert:
        with open(dump_cert, "w", encoding="utf-8", newline="") as fh:
            json.dump(resp["certificate"], fh, sort_keys=True, indent=2)
            fh.write("\n")
    rows = resp["rows"]
    if ctx.obj["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["n", "q_norm2_sq", "squarefree_count", "q_norm_inf", "exact", "cbdual_upper", "infdual_lower", "ratio", "eps_lower", "r_norm_1"]
        )
        for r in rows:
            w.writerow(
                [
                    r["n"],
                    r["q_norm2_sq"],
                    r["squarefree_count"],
                    f"{r['q_norm_inf']:.12g}",
                    int(r["exact"]),
                    f"{r['cbdual_upper']:.12g}",
                    f"{r['infdual_lower']:.12g}",
                    f"{r['ratio']:.12g}",
                    f"{r['eps_lower']:.12g}",
                    "" if r["r_norm_1"] is None else f"{r['r_norm_1']:.12g}",
                ]
            )
        _emit(ctx, buf.getvalue())
    else:
        _emit_json(ctx, {"rows": rows})


@main.command("probe-open-question")
@click.option("--samples", type=int, default=10, show_default=True)
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--no-fixtures", is_flag=True, default=False, help="Skip the standard fixture sample.")
@click.pass_context
def probe_open_question(ctx, samples, k, no_fixtures):
    """Compare certified E(p,1) intervals against the cb-based theorem bound."""
    payload = {
        "samples": samples,
        "k": k,
        "seed": ctx.obj["seed"],
        "tol": ctx.obj["tol"] if ctx.obj["tol"] is not None else 5e-3,
        "include_fixtures": not no_fixtures,
    }
    resp = _post(ctx, "/probe-open-question", payload)
    rows = resp["rows"]
    if ctx.obj["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "eps_lower", "eps_upper", "almost_gt_lower", "almost_gt_upper", "gap_to_bound"])
        for r in rows:
            w.writerow(
                [
                    r["index"],
                    f"{r['eps_lower']:.12g}",
                    f"{r['eps_upper']:.12g}",
                    f"{r['almost_gt_lower']:.12g}",
                    f"{r['almost_gt_upper']:.12g}",
                    f"{r['gap_to_bound']:.12g}",
                ]
            )
        _emit(ctx, buf.getvalue())
    else:
        _emit_json(ctx, {"rows": rows})


@main.command("verify-sdp2")
@click.argument("instance_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--partition", "partition_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--poly", "poly_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.pass_context
def verify_sdp2(ctx, instance_file, partition_file, poly_file):
    """Check every constraint of a feasible-instance file; report the objective."""
    payload = {
        "instance": _load_json(instance_file),
        "partition": _load_json(partition_file),
        "poly": _load_json(poly_file),
        "tol": ctx.obj["tol"] if ctx.obj["tol"] is not None else 1e-8,
    }
    _emit_result(ctx, _post(ctx, "/verify-sdp2", payload))


if __name__ == "__main__":
    main()
