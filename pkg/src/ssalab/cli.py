"""Command-line client for the verification service.

The CLI marshals flags into service requests and prints the service's
canonical JSON verbatim.  By default requests are dispatched to an
in-process instance of the app (no network involved, fully deterministic);
pass --server URL to talk to a running instance instead.

Exit codes: 0 when the inequality holds / the verdict is PASSED, 2 on a
violation / FAILED verdict, 1 for usage, data or INCONCLUSIVE outcomes.
"""

import asyncio
import json
import sys

import click
import httpx

from .matcore import read_matrix, write_matrix, SymMatrix
from .errors import SsaLabError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2

# Exit-code contract reserves 2 for violations/FAILED verdicts; click's
# default UsageError exit code of 2 would collide, so usage errors exit 1.
click.UsageError.exit_code = EXIT_ERROR


def _dispatch(server, method, path, payload=None, params=None):
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.request(method, path, json=payload, params=params)

    from .service.app import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://ssalab.local") as client:
            return await client.request(method, path, json=payload, params=params)

    return asyncio.run(go())


def _emit(ctx, response, output):
    body = response.text
    if response.status_code != 200:
        click.echo(body, err=True)
        ctx.exit(EXIT_ERROR)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(body + "\n")
    else:
        click.echo(body)
    return json.loads(body)


def _function_payload(function, expr, domain):
    if (function is None) == (expr is None):
        raise click.UsageError("provide exactly one of --function or --expr")
    if expr is not None and domain is None:
        raise click.UsageError("--expr requires --domain, e.g. \"[0,inf)\"")
    if function is not None:
        return {"function": function}
    return {"expr": expr, "domain": domain}


def _parse_partition(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise click.UsageError(f"partition must be d1,d2,d3 - got {text!r}")
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise click.UsageError(f"partition must be three integers - got {text!r}")
    if any(d < 0 for d in dims):
        raise click.UsageError("partition parts must be nonnegative")
    return dims


def _matrix_payload(path):
    try:
        a = read_matrix(path)
    except (OSError, SsaLabError) as exc:
        raise click.ClickException(f"cannot load matrix {path!r}: {exc}")
    return {"dim": a.dim, "entries": a.entries.tolist()}


def _require_seed_in_ci(ci, seed):
    if ci and seed is None:
        raise click.UsageError("--seed is required together with --ci")
    return 0 if seed is None else seed


server_option = click.option("--server", default=None,
                             help="Base URL of a running service; default runs in-process.")
ci_option = click.option("--ci", is_flag=True,
                         help="Deterministic output: suppress the timestamp field.")
output_option = click.option("--output", default=None, type=click.Path(dir_okay=False),
                             help="Write the JSON report to this file instead of stdout.")


@click.group()
def main():
    """Verification lab for the strong-subadditivity trace inequality."""


@main.command()
@click.argument("matrix", type=click.Path(exists=True, dir_okay=False))
@click.argument("partition")
@click.argument("function_arg", required=False)
@click.option("--function", default=None, help="Catalog spec, e.g. power:t=0.5.")
@click.option("--expr", default=None, help="Expression in x, e.g. \"-(x+1)*log(x+1)\".")
@click.option("--domain", default=None, help="Domain for --expr: \"(0,inf)\" or \"[0,inf)\".")
@click.option("--form", type=click.Choice(["compressed", "projected"]), default="compressed")
@click.option("--tol-rel", default=1e-8, show_default=True)
@click.option("--no-diagnostics", is_flag=True, help="Skip equality diagnostics.")
@server_option
@ci_option
@output_option
@click.pass_context
def check(ctx, matrix, partition, function_arg, function, expr, domain, form,
          tol_rel, no_diagnostics, server, ci, output):
    """Check the inequality for one matrix file and partition."""
    if function_arg is not None:
        if function is not None or expr is not None:
            raise click.UsageError("function given both positionally and as an option")
        function = function_arg
    payload = {
        "matrix": _matrix_payload(matrix),
        "partition": _parse_partition(partition),
        "form": form,
        "tol_rel": tol_rel,
        "diagnostics": not no_diagnostics,
        "ci": ci,
        **_function_payload(function, expr, domain),
    }
    data = _emit(ctx, _dispatch(server, "POST", "/check", payload), output)
    ctx.exit(EXIT_OK if data["holds"] else EXIT_VIOLATED)


@main.command()
@server_option
@ci_option
@output_option
@click.pass_context
def ando(ctx, server, ci, output):
    """Exact reproduction of the inverse-trace counterexample."""
    _emit(ctx, _dispatch(server, "GET", "/ando", params={"ci": ci}), output)
    ctx.exit(EXIT_OK)


@main.command()
@click.option("--function", default=None)
@click.option("--expr", default=None)
@click.option("--domain", default=None)
@click.option("--family", "--kind", "kind", default="generic_spd", show_default=True,
              type=click.Choice(["generic_spd", "arrow_abcd", "a23_zero",
                                 "log_equality", "trivi_block", "near_singular"]))
@click.option("--dims", default="2,2,2", show_default=True)
@click.option("--trials", default=1000, show_default=True)
@click.option("--seed", default=None, type=int)
@click.option("--eps", default=1e-3, show_default=True)
@click.option("--form", type=click.Choice(["compressed", "projected"]), default="compressed")
@click.option("--tol-rel", default=1e-8, show_default=True)
@click.option("--csv", default=None, type=click.Path(dir_okay=False),
              help="Also write the gap histogram as CSV.")
@server_option
@ci_option
@output_option
@click.pass_context
def scan(ctx, function, expr, domain, kind, dims, trials, seed, eps, form,
         tol_rel, csv, server, ci, output):
    """Gap statistics over seeded random instances."""
    seed = _require_seed_in_ci(ci, seed)
    payload = {
        "kind": kind,
        "dims": _parse_partition(dims),
        "trials": trials,
        "seed": seed,
        "eps": eps,
        "form": form,
        "tol_rel": tol_rel,
        "ci": ci,
        **_function_payload(function, expr, domain),
    }
    data = _emit(ctx, _dispatch(server, "POST", "/scan", payload), output)
    if csv:
        hist = data["histogram"]
        with open(csv, "w", encoding="utf-8") as fh:
            fh.write("bin_lo,bin_hi,count\n")
            for i, count in enumerate(hist["counts"]):
                fh.write(f"{hist['edges'][i]!r},{hist['edges'][i + 1]!r},{count}\n")
    ctx.exit(EXIT_VIOLATED if data["violated"] else EXIT_OK)


@main.command()
@click.option("--function", default=None)
@click.option("--expr", default=None)
@click.option("--domain", default=None)
@click.option("--dims", default="1,1,1", show_default=True)
@click.option("--iters", default=10000, show_default=True)
@click.option("--seed", default=None, type=int)
@click.option("--step0", default=0.5, show_default=True)
@click.option("--kind", default="generic_spd", show_default=True,
              type=click.Choice(["generic_spd", "arrow_abcd"]))
@click.option("--eps", default=1e-3, show_default=True)
@click.option("--start", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Seed the walk at this matrix file.")
@click.option("--emit-matrix", default=None, type=click.Path(dir_okay=False),
              help="Write the best matrix found in the text format.")
@server_option
@ci_option
@output_option
@click.pass_context
def search(ctx, function, expr, domain, dims, iters, seed, step0, kind, eps,
           start, emit_matrix, server, ci, output):
    """Hill-climbing counterexample search."""
    seed = _require_seed_in_ci(ci, seed)
    payload = {
        "dims": _parse_partition(dims),
        "iters": iters,
        "seed": seed,
        "step0": step0,
        "kind": kind,
        "eps": eps,
        "ci": ci,
        **_function_payload(function, expr, domain),
    }
    if start:
        payload["start_matrix"] = _matrix_payload(start)
    data = _emit(ctx, _dispatch(server, "POST", "/search", payload), output)
    if emit_matrix:
        best = data["best_matrix"]
        write_matrix(emit_matrix, SymMatrix(best["entries"]),
                     comment=f"best_gap={data['best_gap']!r}")
    ctx.exit(EXIT_VIOLATED if data["violated"] else EXIT_OK)


@main.command()
@click.option("--function", default=None)
@click.option("--expr", default=None)
@click.option("--domain", default=None)
@click.option("--neg-derivative/--self", default=True,
              help="Test -f' (the sufficient condition) or f itself.")
@click.option("--interval", default="1e-3,1e3", show_default=True)
@click.option("--order", default=5, show_default=True)
@click.option("--trials", default=500, show_default=True)
@click.option("--seed", default=None, type=int)
@server_option
@ci_option
@output_option
@click.pass_context
def monotone(ctx, function, expr, domain, neg_derivative, interval, order,
             trials, seed, server, ci, output):
    """Sampled matrix-monotonicity evidence via divided-difference matrices."""
    seed = _require_seed_in_ci(ci, seed)
    lo, _, hi = interval.partition(",")
    try:
        lo_f, hi_f = float(lo), float(hi)
    except ValueError:
        raise click.UsageError(f"--interval must be lo,hi - got {interval!r}")
    payload = {
        "neg_derivative": neg_derivative,
        "interval": [lo_f, hi_f],
        "order": order,
        "trials": trials,
        "seed": seed,
        "ci": ci,
        **_function_payload(function, expr, domain),
    }
    data = _emit(ctx, _dispatch(server, "POST", "/monotone", payload), output)
    verdict = data["verdict"]
    if verdict == "PASSED":
        ctx.exit(EXIT_OK)
    ctx.exit(EXIT_VIOLATED if verdict == "FAILED" else EXIT_ERROR)


@main.command()
@click.option("--matrix", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--split", "--partition", "partition", required=True,
              help="Partition d1,d2,d3.")
@click.option("--tol", default=1e-8, show_default=True)
@server_option
@ci_option
@output_option
@click.pass_context
def equality(ctx, matrix, partition, tol, server, ci, output):
    """Equality diagnostics: Schur residual and invariant-splitting search."""
    payload = {
        "matrix": _matrix_payload(matrix),
        "partition": _parse_partition(partition),
        "tol": tol,
        "ci": ci,
    }
    _emit(ctx, _dispatch(server, "POST", "/equality", payload), output)
    ctx.exit(EXIT_OK)


@main.command()
@click.option("--check", type=click.Choice(["power", "kappa"]), required=True)
@click.option("--x", type=float, required=True)
@click.option("--t", type=float, default=None)
@click.option("--variant", type=click.Choice(["resolvent", "log"]), default="resolvent",
              show_default=True)
@server_option
@ci_option
@output_option
@click.pass_context
def represent(ctx, check, x, t, variant, server, ci, output):
    """Evaluate an integral representation and compare to the closed form."""
    payload = {"check": check, "x": x, "t": t, "variant": variant, "ci": ci}
    _emit(ctx, _dispatch(server, "POST", "/represent", payload), output)
    ctx.exit(EXIT_OK)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("ssalab.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
