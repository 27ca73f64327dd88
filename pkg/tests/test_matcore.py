import math

import numpy as np
import pytest

from ssalab import (
    ConvergenceError,
    DomainError,
    ParseError,
    Partition,
    ShapeError,
    SymMatrix,
    apply_spectral,
    blocks,
    catalog_get,
    compress_b,
    compress_c,
    eig_sym,
    format_matrix_text,
    majorizes,
    parse_matrix_text,
    pinch,
    project_form,
    trace_f,
)
from ssalab.expr import parse_expr, to_scalar_fn

from conftest import random_spd, random_sym

ANDO_A = [
    [45 / 16, -9 / 8, 5 / 8],
    [-9 / 8, 1 / 2, -1 / 4],
    [5 / 8, -1 / 4, 1 / 4],
]
ANDO_X = [[4.0, 8.0, -2.0], [8.0, 20.0, 0.0], [-2.0, 0.0, 9.0]]

IDENTITY_FN = to_scalar_fn(parse_expr("x"), "[0,inf)")


class TestSymMatrix:
    def test_symmetrizes_and_records_asymmetry(self):
        a = SymMatrix([[1.0, 2.0 + 1e-12], [2.0, 3.0]])
        assert a.entries[0, 1] == a.entries[1, 0]
        assert 0 < a.asymmetry < 1e-11

    def test_rejects_large_asymmetry(self):
        with pytest.raises(ShapeError):
            SymMatrix([[1.0, 2.0], [0.0, 1.0]])

    def test_rejects_non_square(self):
        with pytest.raises(ShapeError):
            SymMatrix([[1.0, 2.0, 3.0], [2.0, 1.0, 0.0]])

    def test_rejects_non_finite(self):
        with pytest.raises(ShapeError):
            SymMatrix([[1.0, np.nan], [np.nan, 1.0]])

    def test_entries_read_only(self):
        a = SymMatrix([[1.0]])
        with pytest.raises(ValueError):
            a.entries[0, 0] = 2.0


class TestPartition:
    def test_slices_cover_dim(self):
        p = Partition(2, 3, 1)
        assert p.dim == 6
        assert (p.s1, p.s2, p.s3) == (slice(0, 2), slice(2, 5), slice(5, 6))

    def test_mismatch_raises(self):
        with pytest.raises(ShapeError):
            Partition(1, 1, 1).check(4)

    def test_negative_rejected(self):
        with pytest.raises(ShapeError):
            Partition(-1, 2, 2)


class TestEig:
    def test_identity(self):
        dec = eig_sym(SymMatrix(np.eye(3)))
        assert np.allclose(dec.eigenvalues, [1.0, 1.0, 1.0], atol=1e-14)

    def test_diagonal_sorted(self):
        dec = eig_sym(SymMatrix.from_diag([3.0, 1.0, 2.0]))
        assert np.allclose(dec.eigenvalues, [1.0, 2.0, 3.0], atol=1e-14)

    def test_offdiagonal_pair(self):
        # characteristic polynomial of [[0,1],[1,0]] is l^2 - 1
        dec = eig_sym(SymMatrix([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(dec.eigenvalues, [-1.0, 1.0], atol=1e-14)

    @pytest.mark.parametrize("seed", range(0, 40, 7))
    def test_invariants(self, seed):
        a = random_sym(seed, 2 + seed % 7)
        dec = eig_sym(a)
        norm = max(1.0, float(np.max(np.abs(dec.eigenvalues))) if a.dim else 1.0)
        resid = a.entries @ dec.vectors - dec.vectors * dec.eigenvalues
        assert np.max(np.abs(resid)) <= 1e-12 * norm
        gram = dec.vectors.T @ dec.vectors - np.eye(a.dim)
        assert np.max(np.abs(gram)) <= 1e-12

    def test_empty_matrix(self):
        dec = eig_sym(SymMatrix(np.zeros((0, 0))))
        assert dec.eigenvalues.shape == (0,)


class TestSpectralCalculus:
    def test_identity_function_reconstructs(self):
        for seed in range(100):
            a = random_spd(seed, 2 + seed % 5)
            b = apply_spectral(IDENTITY_FN, a)
            tol = 1e-10 * max(1.0, a.max_norm())
            assert np.max(np.abs(b.entries - a.entries)) <= tol

    def test_log_of_diag(self):
        a = SymMatrix.from_diag([1.0, math.e])
        b = apply_spectral(catalog_get("log"), a)
        assert np.allclose(b.entries, np.diag([0.0, 1.0]), atol=1e-12)

    def test_reciprocal_of_fixture_is_its_inverse(self):
        recip = to_scalar_fn(parse_expr("1/x"), "(0,inf)")
        x = apply_spectral(recip, SymMatrix(ANDO_A))
        assert np.max(np.abs(x.entries - np.array(ANDO_X))) <= 1e-10

    def test_domain_error_carries_eigenvalue(self):
        with pytest.raises(DomainError) as err:
            apply_spectral(catalog_get("log"), SymMatrix.from_diag([1.0, -2.0]))
        assert err.value.offending == pytest.approx(-2.0)

    def test_clamps_slightly_negative_for_closed_domain(self):
        a = SymMatrix.from_diag([1.0, -1e-15])
        assert trace_f(catalog_get("neg_square"), a) == pytest.approx(-1.0)

    def test_no_clamp_for_log_at_zero(self):
        with pytest.raises(DomainError):
            trace_f(catalog_get("log"), SymMatrix.from_diag([1.0, 0.0]))


class TestTraceF:
    def test_log_identity_matrix(self):
        assert trace_f(catalog_get("log"), SymMatrix(np.eye(3))) == 0.0

    def test_neg_inverse_of_ando(self):
        val = trace_f(catalog_get("neg_inverse"), SymMatrix(ANDO_A))
        assert val == pytest.approx(-33.0, abs=1e-10)

    def test_kappa_at_one(self):
        val = trace_f(catalog_get("kappa"), SymMatrix([[1.0]]))
        assert val == pytest.approx(2.0 * math.log(2.0), abs=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_apply_spectral(self, seed):
        a = random_spd(seed, 5)
        f = catalog_get("kappa")
        direct = trace_f(f, a)
        via_matrix = apply_spectral(f, a).trace()
        assert abs(direct - via_matrix) <= 1e-10 * max(1.0, abs(direct))

    def test_empty_matrix_trace_zero(self):
        assert trace_f(catalog_get("log"), SymMatrix(np.zeros((0, 0)))) == 0.0


class TestBlocksAndCompressions:
    def test_scalar_blocks(self):
        a = random_spd(3, 3)
        blk = blocks(a, Partition(1, 1, 1))
        m = a.entries
        assert blk.a11[0, 0] == m[0, 0]
        assert blk.a12[0, 0] == m[0, 1]
        assert blk.a13[0, 0] == m[0, 2]
        assert blk.a22[0, 0] == m[1, 1]
        assert blk.a23[0, 0] == m[1, 2]
        assert blk.a33[0, 0] == m[2, 2]

    def test_degenerate_partition_gives_empty_blocks(self):
        a = random_spd(4, 4)
        blk = blocks(a, Partition(0, 4, 0))
        assert blk.a22.shape == (4, 4)
        assert np.array_equal(blk.a22, a.entries)
        assert blk.a11.shape == (0, 0)
        assert blk.a13.shape == (0, 0)

    def test_reassembly_exact(self):
        a = random_spd(9, 7)
        p = Partition(2, 3, 2)
        blk = blocks(a, p)
        top = np.hstack([blk.a11, blk.a12, blk.a13])
        mid = np.hstack([blk.a12.T, blk.a22, blk.a23])
        bot = np.hstack([blk.a13.T, blk.a23.T, blk.a33])
        assert np.array_equal(np.vstack([top, mid, bot]), a.entries)

    def test_ando_blocks(self):
        a = SymMatrix(ANDO_A)
        p = Partition(1, 1, 1)
        assert blocks(a, p).a22[0, 0] == 0.5
        b = compress_b(a, p)
        assert np.allclose(b.entries, [[45 / 16, -9 / 8], [-9 / 8, 1 / 2]], atol=0)
        c = compress_c(a, p)
        assert np.allclose(c.entries, [[1 / 2, -1 / 4], [-1 / 4, 1 / 4]], atol=0)

    def test_identity_compressions(self):
        a = SymMatrix(np.eye(5))
        p = Partition(2, 2, 1)
        assert np.array_equal(compress_b(a, p).entries, np.eye(4))
        assert np.array_equal(compress_c(a, p).entries, np.eye(3))

    def test_diag_compressions(self):
        a = SymMatrix.from_diag([4.0, 5.0, 6.0])
        p = Partition(1, 1, 1)
        assert np.array_equal(compress_b(a, p).entries, np.diag([4.0, 5.0]))
        assert np.array_equal(compress_c(a, p).entries, np.diag([5.0, 6.0]))

    def test_incompatible_partition(self):
        with pytest.raises(ShapeError):
            compress_b(random_spd(1, 3), Partition(2, 2, 2))


class TestProjectForm:
    def test_diag_12(self):
        a = SymMatrix.from_diag([4.0, 5.0, 6.0])
        out = project_form(a, Partition(1, 1, 1), 12)
        assert np.array_equal(out.entries, np.diag([4.0, 5.0, 0.0]))

    def test_middle_of_ando(self):
        out = project_form(SymMatrix(ANDO_A), Partition(1, 1, 1), 2)
        assert np.array_equal(out.entries, np.diag([0.0, 0.5, 0.0]))

    @pytest.mark.parametrize("seed", range(0, 100, 1))
    def test_spectrum_is_compression_plus_zeros(self, seed):
        n = 3 + seed % 5
        a = random_spd(seed, n)
        r = PortionCycler(seed, n)
        p = r.partition
        proj = np.sort(np.linalg.eigvalsh(project_form(a, p, 12).entries))
        comp = np.sort(
            np.concatenate([np.linalg.eigvalsh(compress_b(a, p).entries), np.zeros(p.d3)])
        )
        assert np.max(np.abs(proj - comp)) <= 1e-9

    def test_bad_selector(self):
        with pytest.raises(ValueError):
            project_form(random_spd(0, 3), Partition(1, 1, 1), 13)


class PortionCycler:
    """Deterministic partition choice for a given seed and dimension."""

    def __init__(self, seed, n):
        d1 = seed % (n + 1)
        d2 = (seed // 3) % (n - d1 + 1)
        self.partition = Partition(d1, d2, n - d1 - d2)


class TestPinch:
    def test_ones_matrix(self):
        out = pinch(SymMatrix([[1.0, 1.0], [1.0, 1.0]]), 1)
        assert np.array_equal(out.entries, np.eye(2))

    def test_diagonal_fixed_point(self):
        a = SymMatrix.from_diag([1.0, 2.0, 3.0])
        assert np.array_equal(pinch(a, 2).entries, a.entries)

    def test_blocks_zeroed(self):
        a = random_spd(5, 5)
        out = pinch(a, 2)
        assert np.all(out.entries[:2, 2:] == 0.0)
        assert np.array_equal(out.entries[:2, :2], a.entries[:2, :2])
        assert np.array_equal(out.entries[2:, 2:], a.entries[2:, 2:])

    def test_trace_preserved_exactly(self):
        for seed in range(20):
            a = random_sym(seed, 4)
            for k in range(5):
                assert pinch(a, k).trace() == a.trace()

    def test_out_of_range(self):
        with pytest.raises(ShapeError):
            pinch(random_spd(0, 3), 4)


class TestMajorization:
    def test_simple_true(self):
        assert majorizes([3.0, 1.0], [2.0, 2.0]).holds

    def test_simple_false(self):
        assert not majorizes([2.0, 2.0], [3.0, 1.0]).holds

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            majorizes([1.0], [1.0, 2.0])

    @pytest.mark.parametrize("seed", range(0, 500, 250))
    def test_pinch_majorization_slice(self, seed):
        # full 500-instance sweep lives in the acceptance suite
        n = 3 + seed % 5
        a = random_sym(seed, n)
        w = np.linalg.eigvalsh(a.entries)
        for k in range(n + 1):
            wp = np.linalg.eigvalsh(pinch(a, k).entries)
            assert majorizes(w, wp).holds


class TestMatrixTextFormat:
    def test_round_trip(self):
        a = random_spd(17, 4)
        b = parse_matrix_text(format_matrix_text(a, comment="round trip"))
        assert np.array_equal(a.entries, b.entries)

    def test_comments_and_blanks_skipped(self):
        text = "# heading\n\n2\n# rows follow\n1.5 2.5\n2.5 -3.5\n"
        a = parse_matrix_text(text)
        assert a.entries[1, 1] == -3.5

    def test_wrong_row_count(self):
        with pytest.raises(ParseError):
            parse_matrix_text("2\n1 0\n")

    def test_wrong_column_count(self):
        with pytest.raises(ParseError):
            parse_matrix_text("2\n1 0 3\n0 1\n")

    def test_bad_number(self):
        with pytest.raises(ParseError):
            parse_matrix_text("1\nfoo\n")

    def test_empty(self):
        with pytest.raises(ParseError):
            parse_matrix_text("# nothing\n")
