"""ssalab: numerical and exact verification of the strong-subadditivity
trace inequality for scalar functions of symmetric positive matrices."""

from .errors import (
    ConvergenceError,
    DegeneratePoints,
    DomainError,
    ParamOutOfRange,
    ParseError,
    QuadratureError,
    ShapeError,
    SingularError,
    SsaLabError,
    UnknownFunction,
)
from .matcore import (
    EigDecomp,
    MajorizationReport,
    Partition,
    SymMatrix,
    apply_spectral,
    blocks,
    compress_b,
    compress_c,
    eig_sym,
    majorizes,
    parse_matrix_text,
    format_matrix_text,
    pinch,
    project_form,
    read_matrix,
    trace_f,
    write_matrix,
)
from .functions import (
    Interval,
    QuadratureSpec,
    ScalarFn,
    SsaStatus,
    catalog_get,
    catalog_names,
    kappa_integral,
    kappa_value,
    parse_function_spec,
    power_integral,
)
from .expr import DualNumber, eval_dual, eval_expr, parse_domain, parse_expr, to_scalar_fn
from .ssa import (
    EqualityDiagnostics,
    KrylovStructure,
    SsaReport,
    detect_structure,
    gap_log_det,
    log_equality_residual,
    ssa_gap,
    stone_weierstrass_check,
)
from .monotone import (
    LoewnerReport,
    MonotoneVerdict,
    Verdict,
    check_ssa_sufficient,
    loewner_matrix,
    test_matrix_monotone,
)
from .exact import (
    AndoReport,
    RatMatrix,
    ando_matrix_a,
    ando_matrix_x,
    ando_report,
    rat_det,
    rat_inverse,
    rat_matmul,
    rat_trace,
)
from .rng import PortableRng, subseed
from .search import GenSpec, ScanSummary, SearchResult, falsify, generate, scan

__version__ = "0.1.0"
