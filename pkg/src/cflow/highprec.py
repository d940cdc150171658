"""Arbitrary-precision fallback for badly amplified flow evaluations.

The representation ``A^z = sum_i mu_i(z) A^{-i}`` cancels heavily when the
relation mixes large and small eigenvalue magnitudes with multiplicities:
``sum_i |mu_i(z)| * |A^{-i}|`` can exceed ``|A^z|`` by many orders, and every
error -- in the relation coefficients, the coefficient table, the
negative-power chain, or the final contraction -- is amplified by that
ratio.  When the measured amplification pushes the extended-precision
(80-bit) error estimate above the accuracy target, evaluation switches to
this mpmath-based path, which redoes the whole chain at a working precision
chosen to absorb the amplification, including a re-refinement of the
relation coefficients against the matrix itself (their storage rounding
alone would otherwise dominate).
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np

__all__ = ["HighPrecisionFlow"]


def _mpc_from_extended(x) -> mp.mpc:
    """Convert a ``clongdouble`` scalar to ``mpc`` without dropping the bits
    beyond double precision (high/low split)."""
    hi = complex(np.complex128(x))
    lo = complex(np.complex128(x - np.clongdouble(hi)))
    return mp.mpc(hi) + mp.mpc(lo)


def _matrix_to_mp(a: np.ndarray) -> mp.matrix:
    n, m = a.shape
    out = mp.matrix(n, m)
    for i in range(n):
        for j in range(m):
            out[i, j] = mp.mpc(complex(a[i, j]))
    return out


def _matrix_to_np(a: mp.matrix) -> np.ndarray:
    out = np.empty((a.rows, a.cols), dtype=np.complex128)
    for i in range(a.rows):
        for j in range(a.cols):
            out[i, j] = complex(a[i, j])
    return out


def _refine_against_matrix(a: np.ndarray, asc: list) -> list:
    """Refine ascending monic coefficients so the relation annihilates ``a``
    at working precision.

    Mixed-precision iteration on the flattened Krylov system: residuals at
    working precision, corrections from a double-precision least-squares
    solve.  The entries of ``a`` are taken as exact.
    """
    p = len(asc) - 1
    amp_ = _matrix_to_mp(a)
    n = a.shape[0]
    powers = [mp.eye(n)]
    for _ in range(p):
        powers.append(powers[-1] * amp_)

    def flatten(m):
        return [m[i, j] for i in range(n) for j in range(n)]

    cols = [flatten(powers[i]) for i in range(p)]
    v = flatten(powers[p])
    k_dbl = np.array([[complex(c[r]) for c in cols] for r in range(n * n)])
    coef = [-asc[i] for i in range(p)]
    for _ in range(6):
        r = [v[j] - mp.fsum(cols[i][j] * coef[i] for i in range(p)) for j in range(n * n)]
        r_dbl = np.array([complex(x) for x in r])
        if np.max(np.abs(r_dbl)) == 0.0:
            break
        delta, *_ = np.linalg.lstsq(k_dbl, r_dbl, rcond=None)
        coef = [coef[i] + mp.mpc(complex(delta[i])) for i in range(p)]
    return [-c for c in coef] + [mp.mpc(1)]


class HighPrecisionFlow:
    """One matrix's flow, evaluated entirely in mpmath.

    Built from the double-precision representation's relation, basis layout
    and branch choices; reproduces the same flow (same clusters, same branch
    logs) with every numerical ingredient recomputed at ``dps`` decimal
    digits.
    """

    def __init__(self, a: np.ndarray, relation, basis, dps: int = 50):
        self.dps = dps
        self._terms = basis.terms
        p = relation.degree
        with mp.workdps(dps):
            asc = [_mpc_from_extended(c) for c in relation.monic_coefficients_extended()]
            asc = _refine_against_matrix(np.asarray(a, dtype=np.complex128), asc)
            self._asc = asc
            self._centers = []
            for cluster in basis.spectrum.clusters:
                center = self._polish_root(asc, cluster.value, cluster.multiplicity)
                log = mp.log(center)
                # carry over any non-principal branch choice as a winding number
                winding = round((cluster.log.imag - complex(log).imag) / (2.0 * math.pi))
                log = log + 2j * mp.pi * winding
                self._centers.append((center, cluster.multiplicity, log))
            b = mp.matrix(p, p)
            for i in range(p):
                row = self._basis_values(mp.mpc(-(i + 1)))
                for j in range(p):
                    b[i, j] = row[j]
            self._e = (b.T) ** -1
            inv = _matrix_to_mp(a) ** -1
            negs = [inv]
            for _ in range(p - 1):
                negs.append(negs[-1] * inv)
            self._negs = negs
            self._dim = a.shape[0]
            self._companion_negs = None

    @staticmethod
    def _polish_root(asc: list, x0: complex, multiplicity: int) -> mp.mpc:
        """Newton on the (m-1)-th derivative, where the m-fold root is simple."""
        d = asc
        for _ in range(multiplicity - 1):
            d = [d[i] * i for i in range(1, len(d))]
        dd = [d[i] * i for i in range(1, len(d))]

        def horner(c, x):
            v = mp.mpc(0)
            for coeff in reversed(c):
                v = v * x + coeff
            return v

        x = mp.mpc(x0)
        for _ in range(100):
            denom = horner(dd, x)
            if abs(denom) == 0:
                break
            step = horner(d, x) / denom
            x -= step
            if abs(step) <= mp.mpf(10) ** (-mp.mp.dps + 5) * (1 + abs(x)):
                break
        return x

    def _basis_values(self, z: mp.mpc) -> list:
        out = []
        for ci, j in self._terms:
            center, _, log = self._centers[ci]
            acc = mp.mpc(1)
            for i in range(j):
                acc *= z - i
            out.append(acc / math.factorial(j) * mp.exp((z - j) * log))
        return out

    def mu_mp(self, z: complex) -> list:
        """The coefficient vector as a list of ``mpc`` values."""
        with mp.workdps(self.dps):
            f = mp.matrix(self._basis_values(mp.mpc(complex(z))))
            out = self._e * f
            return [out[i] for i in range(len(self._terms))]

    def mu(self, z: complex) -> np.ndarray:
        return np.array([complex(v) for v in self.mu_mp(z)], dtype=np.complex128)

    def contract_mu(self, mu: list) -> np.ndarray:
        """``sum_i mu_i A^{-i}`` over the stored negative powers, rounded to
        complex128."""
        with mp.workdps(self.dps):
            acc = mp.matrix(self._dim, self._dim)
            for m, power in zip(mu, self._negs):
                acc += m * power
            return _matrix_to_np(acc)

    def evaluate(self, z: complex) -> np.ndarray:
        """``A^z`` rounded to complex128."""
        with mp.workdps(self.dps):
            return self.contract_mu(self.mu_mp(z))

    def companion_mu_mp(self, z: complex) -> list:
        """``C^z c`` for the companion matrix of the (refined) relation.

        The companion power itself is expanded over the chain
        ``C^{-1}, ..., C^{-p}``, mirroring the double-precision companion
        construction at working precision.
        """
        with mp.workdps(self.dps):
            p = len(self._terms)
            if self._companion_negs is None:
                c = mp.matrix(p, p)
                for i in range(p):
                    c[i, 0] = -self._asc[p - 1 - i]
                for i in range(p - 1):
                    c[i, i + 1] = mp.mpc(1)
                inv = c ** -1
                negs = [inv]
                for _ in range(p - 1):
                    negs.append(negs[-1] * inv)
                self._companion_negs = negs
            nu = self.mu_mp(z)
            czt = mp.matrix(p, p)
            for v, power in zip(nu, self._companion_negs):
                czt += v * power
            cvec = mp.matrix([-self._asc[p - 1 - i] for i in range(p)])
            out = czt * cvec
            return [out[i] for i in range(p)]
