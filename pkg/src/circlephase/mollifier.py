"""The smooth bump used to mollify step phases.

The bump is psi(u) = C*exp(-1/(1-u^2)) on (-1, 1), zero outside, with C
chosen so the bump integrates to one.  Its CDF Psi has no closed form, so
it is tabulated once on a fine uniform grid by panelwise Gauss-Legendre
quadrature; evaluation between nodes uses a cubic Hermite whose slopes are
the exact density, keeping the table error near machine precision.
Convolution against the bump is then available in closed form:
(I_[a,inf) * psi_h)(t) = Psi((t-a)/h).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from . import _backend

_TABLE_PANELS = 8192


def _build_table(n_panels):
    """Panel integrals of the raw bump, accumulated into a CDF table."""
    x, w = roots_legendre(15)
    edges = np.linspace(-1.0, 1.0, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    panel = (_backend.bump_raw(nodes) @ w) * half
    cdf = np.concatenate([[0.0], np.cumsum(panel)])
    total = cdf[-1]
    cdf /= total
    # the bump is even; symmetrizing pins Psi(0) = 1/2 exactly
    cdf = 0.5 * (cdf + 1.0 - cdf[::-1])
    cdf[0] = 0.0
    cdf[-1] = 1.0
    return 1.0 / total, cdf


@dataclass(frozen=True)
class Mollifier:
    """Normalized bump with a tabulated CDF.

    `c` is the normalization constant, `cdf_table` the values of Psi on the
    uniform grid over [-1, 1].
    """

    c: float
    cdf_table: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n_panels=_TABLE_PANELS):
        c, cdf = _build_table(n_panels)
        cdf.flags.writeable = False
        return cls(c=c, cdf_table=cdf)

    @property
    def sup_norm(self):
        """max psi = psi(0) = c/e."""
        return self.c * float(np.exp(-1.0))

    def pdf(self, u):
        return _backend.bump_pdf(np.asarray(u, dtype=float), self.c)

    def cdf(self, u):
        return _backend.bump_cdf(np.asarray(u, dtype=float), self.cdf_table, self.c)


@lru_cache(maxsize=1)
def get_mollifier():
    """Shared read-only mollifier instance."""
    return Mollifier.build()
