"""FastAPI service exposing the verification lab.

Every endpoint is stateless and deterministic given its request body
(seeds included), so the service can be replayed or load-balanced freely.
Responses are canonical JSON bytes produced by ssalab.serialize; with
ci=true in the request the timestamp field is suppressed and replays are
byte-identical.
"""

from fastapi import FastAPI, Request, Response

from .. import serialize
from ..errors import SsaLabError
from ..expr import parse_expr, to_scalar_fn
from ..exact import ando_report
from ..functions import (
    catalog_get,
    catalog_names,
    kappa_value,
    kappa_integral,
    parse_function_spec,
    power_integral,
)
from ..matcore import CLAMP_RTOL, Partition, SymMatrix, _eigvals
from ..monotone import check_ssa_sufficient, test_matrix_monotone, verdict_message
from ..search import GenSpec, falsify, generate, scan
from ..ssa import detect_structure, log_equality_residual, ssa_gap
from ..errors import DomainError
from .models import (
    CheckRequest,
    EqualityRequest,
    FunctionChoice,
    MonotoneRequest,
    RepresentRequest,
    ScanRequest,
    SearchRequest,
)


def resolve_function(choice: FunctionChoice):
    if choice.function is not None:
        return parse_function_spec(choice.function)
    return to_scalar_fn(parse_expr(choice.expr), choice.domain)


def _json_response(payload: dict, ci: bool, status_code: int = 200) -> Response:
    body = serialize.canonical_json(serialize.with_envelope(payload, ci))
    return Response(content=body, media_type="application/json", status_code=status_code)


def _require_psd(a: SymMatrix) -> None:
    w = _eigvals(a)
    if len(w) and float(w[0]) < -CLAMP_RTOL * max(1.0, float(abs(w).max())):
        raise DomainError(
            f"matrix is not positive semidefinite (min eigenvalue {w[0]:.6g})",
            offending=float(w[0]),
        )


def handle_check(req: CheckRequest) -> dict:
    f = resolve_function(req)
    a = SymMatrix(req.matrix.entries)
    p = Partition(*req.partition)
    p.check(a.dim)
    _require_psd(a)
    report = ssa_gap(f, a, p, form=req.form, tol_rel=req.tol_rel)
    diag = None
    decomposable = None
    if req.diagnostics:
        try:
            diag = log_equality_residual(a, p)
            decomposable = detect_structure(a, p).decomposable
        except DomainError:
            diag = None
    return serialize.ssa_report_dict(
        report, f.label(), f.params, a.dim, req.partition,
        diagnostics=diag, decomposable=decomposable,
    )


def handle_scan(req: ScanRequest) -> dict:
    f = resolve_function(req)
    summary = scan(f, req.kind, req.dims, req.trials, req.seed,
                   eps=req.eps, form=req.form, tol_rel=req.tol_rel)
    return serialize.scan_summary_dict(summary, f.label(), f.params)


def handle_search(req: SearchRequest) -> dict:
    f = resolve_function(req)
    start = SymMatrix(req.start_matrix.entries) if req.start_matrix else None
    result = falsify(f, req.dims, req.iters, req.seed, step0=req.step0,
                     kind=req.kind, start=start, eps=req.eps, tol_rel=req.tol_rel)
    return serialize.search_result_dict(
        result, f.label(), f.params, req.dims, req.iters, req.seed,
        req.step0, req.kind, req.eps, include_matrix=req.include_matrix,
    )


def handle_monotone(req: MonotoneRequest) -> dict:
    f = resolve_function(req)
    if req.neg_derivative:
        verdict = check_ssa_sufficient(f, req.interval, order=req.order,
                                       trials=req.trials, seed=req.seed)
    else:
        # Test monotonicity of f itself: divided differences of f with f'
        # on the diagonal.
        verdict = test_matrix_monotone(f.value, f.derivative, req.interval,
                                       order=req.order, trials=req.trials, seed=req.seed)
    return serialize.monotone_verdict_dict(
        verdict, f.label(), f.params, req.neg_derivative, req.interval,
        req.seed, verdict_message(verdict),
    )


def handle_equality(req: EqualityRequest) -> dict:
    a = SymMatrix(req.matrix.entries)
    p = Partition(*req.partition)
    p.check(a.dim)
    diag = log_equality_residual(a, p)
    krylov = detect_structure(a, p, tol=req.tol)
    return serialize.equality_dict(diag, krylov, a.dim, req.partition, req.tol)


def handle_represent(req: RepresentRequest) -> dict:
    if req.check == "power":
        value = power_integral(req.x, req.t, variant=req.variant)
        reference = req.x ** req.t
        return serialize.represent_dict("power", req.x, req.t, req.variant,
                                        value, reference)
    value = kappa_integral(req.x)
    return serialize.represent_dict("kappa", req.x, None, None, value,
                                    kappa_value(req.x))


def handle_ando() -> dict:
    return serialize.ando_dict(ando_report())


def create_app() -> FastAPI:
    app = FastAPI(
        title="ssalab",
        description="Verification lab for the strong-subadditivity trace inequality",
        version="0.1.0",
    )

    @app.exception_handler(SsaLabError)
    async def _lab_error(_request: Request, exc: SsaLabError):
        payload = {"error": type(exc).__name__, "message": str(exc)}
        return _json_response(payload, ci=True, status_code=400)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/functions")
    def functions():
        out = []
        for name in catalog_names():
            entry = {"name": name}
            try:
                f = catalog_get(name)
                entry.update(
                    ssa_status=f.ssa_status.value,
                    concave=f.concave,
                    finite_at_zero=f.finite_at_zero,
                    domain=f.domain.label(),
                    params=[],
                )
            except Exception:
                params = {"power": ["t"], "neg_power": ["t"],
                          "shifted_entropy": ["c"], "f_p": ["p"]}.get(name, [])
                entry["params"] = params
            out.append(entry)
        return {"functions": out}

    @app.post("/check")
    def check(req: CheckRequest):
        return _json_response(handle_check(req), req.ci)

    @app.post("/scan")
    def scan_endpoint(req: ScanRequest):
        return _json_response(handle_scan(req), req.ci)

    @app.post("/search")
    def search_endpoint(req: SearchRequest):
        return _json_response(handle_search(req), req.ci)

    @app.post("/monotone")
    def monotone_endpoint(req: MonotoneRequest):
        return _json_response(handle_monotone(req), req.ci)

    @app.post("/equality")
    def equality_endpoint(req: EqualityRequest):
        return _json_response(handle_equality(req), req.ci)

    @app.post("/represent")
    def represent_endpoint(req: RepresentRequest):
        return _json_response(handle_represent(req), req.ci)

    @app.get("/ando")
    def ando_endpoint(ci: bool = False):
        return _json_response(handle_ando(), ci)

    return app


app = create_app()
