"""Portable seeded random number generation.

Every stochastic routine in the package draws from :class:`PortableRng` so
that results are reproducible bit for bit from a single 64-bit seed.  The
uniform source is the Philox 4x64-10 counter-based generator (a published,
platform-independent algorithm; numpy guarantees the raw bit stream of its
``Philox`` bit generator never changes between releases).  Gaussians are
produced by the Box-Muller transform applied to that uniform stream, one
normal per pair of uniforms, so the mapping from seed to draw sequence is
fully specified and easy to replicate in any language with a Philox
implementation.
"""

import numpy as np
from numpy.random import Philox

_MASK64 = (1 << 64) - 1
_INV_2_53 = 2.0 ** -53


class PortableRng:
    """Deterministic stream of uniforms, normals and derived draws.

    The stream position advances only through the methods below; two
    instances with the same seed and the same call sequence produce
    identical output arrays.
    """

    def __init__(self, seed):
        self.seed = int(seed) & _MASK64
        self._bg = Philox(key=self.seed)

    def raw(self, n):
        """Next n raw 64-bit words of the Philox stream."""
        return self._bg.random_raw(n)

    def uniforms(self, n):
        """n doubles in the open interval (0, 1), 53-bit resolution."""
        # (w >> 11) + 0.5 lies in (0, 2^53), so the result avoids both endpoints.
        w = self._bg.random_raw(n) >> np.uint64(11)
        return (w.astype(np.float64) + 0.5) * _INV_2_53

    def uniform(self):
        return float(self.uniforms(1)[0])

    def normals(self, n):
        """n standard normals via Box-Muller (cosine branch, 2 uniforms each)."""
        u = self.uniforms(2 * n)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        return r * np.cos(2.0 * np.pi * u[1::2])

    def normal(self):
        return float(self.normals(1)[0])

    def normal_matrix(self, rows, cols):
        return self.normals(rows * cols).reshape(rows, cols)

    def log_uniforms(self, lo, hi, n):
        """n draws from the log-uniform distribution on [lo, hi], lo > 0."""
        if not (0.0 < lo < hi):
            raise ValueError(f"log-uniform needs 0 < lo < hi, got [{lo}, {hi}]")
        a, b = np.log(lo), np.log(hi)
        return np.exp(a + (b - a) * self.uniforms(n))

    def index_below(self, k):
        """One integer in [0, k), k >= 1."""
        return min(int(self.uniform() * k), k - 1)


def subseed(seed, index):
    """Per-trial seed schedule used by scan and monotone batches."""
    return (int(seed) + int(index)) & _MASK64
