"""Complete flows A^z: the direct generalized-Vandermonde construction, the
companion-matrix construction, the Jordan-block oracle, and the structural
checks tying them together.

Both constructions express ``A^z`` as ``sum_i mu_i(z) A^{-i}`` over the
negative powers ``A^{-1}, ..., A^{-p}`` of the relation degree ``p``.  The
direct method obtains the coefficient functions by inverting a generalized
Vandermonde system; the companion method evaluates ``C^z c`` for the
companion matrix ``C`` of the relation.  They share only the scalar basis
primitives, so their agreement is a genuine cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .annihilator import (
    AnnihilatorPolynomial,
    Spectrum,
    cluster_roots,
    find_roots,
    minimal_polynomial,
    validate_relation,
)
from .basis import (
    BasisDescriptor,
    CoefficientTable,
    build_basis,
    eval_basis,
    eval_basis_extended,
    generalized_binomial,
    invert_vandermonde,
    scalar_flow,
    vandermonde_matrix,
)
from .errors import DimensionMismatch, NotJordanForm, RelationInvalid, ZeroEigenvalue
from .numeric import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    extended_inverse,
    inverse,
    lu_factor,
    max_norm,
)

__all__ = [
    "FlowRepresentation",
    "FlowAxiomReport",
    "negative_powers",
    "build_flow",
    "evaluate_flow",
    "mu_functions",
    "companion_matrix",
    "CompanionFlow",
    "companion_flow_mu",
    "evaluate_companion_flow",
    "jordan_block_flow",
    "jordan_oracle",
    "extend_matrix",
    "companion_action_check",
    "check_flow_axioms",
]


@dataclass(frozen=True)
class FlowRepresentation:
    """Everything needed to evaluate ``A^z`` at any ``z``.

    ``neg_powers`` holds ``[A^{-1}, ..., A^{-p}]``; ``coeffs.e`` is the
    ``p x p`` table with ``mu_i(z) = sum_j e[i, j] * f_j(z)`` over the basis
    functions ``f_j`` of ``basis``.
    """

    relation: AnnihilatorPolynomial
    basis: BasisDescriptor
    coeffs: CoefficientTable
    neg_powers: tuple
    source_dim: int
    neg_powers_extended: tuple | None = None
    high_precision: object | None = field(default=None, compare=False, repr=False)

    @property
    def degree(self) -> int:
        return self.relation.degree

    def evaluation_condition(self, z: complex) -> float:
        """Conditioning estimate ``|E| * max_k |f_k(z)|`` for one evaluation."""
        return max_norm(self.coeffs.e) * float(np.max(np.abs(eval_basis(self.basis, z))))


def negative_powers(a, p: int, tol: ToleranceConfig = DEFAULT_TOL) -> list:
    """``[A^{-1}, ..., A^{-p}]`` by inverting once and multiplying repeatedly.

    The chain is carried in extended precision: its rounding error is later
    amplified by the cancellation in ``sum mu_i A^{-i}``.  Singularity is
    still detected through the pivoted factorization.
    """
    return [m.astype(np.complex128) for m in _negative_powers_extended(a, p, tol)]


def _negative_powers_extended(a, p: int, tol: ToleranceConfig) -> list:
    """The negative-power chain kept in extended precision."""
    a = as_matrix(a)
    if p < 1:
        raise ValueError("need at least one negative power")
    lu_factor(a, tol)  # pivot-based singularity check
    inv = extended_inverse(a)
    out = [inv]
    for _ in range(p - 1):
        out.append(out[-1] @ inv)
    return out


def build_flow(
    a,
    q: AnnihilatorPolynomial | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
    branch_offsets: dict | None = None,
) -> FlowRepresentation:
    """Assemble the direct (Vandermonde) flow representation of ``a``.

    With ``q`` omitted the minimal polynomial is discovered; a supplied
    relation is validated first and rejected with :class:`RelationInvalid`
    if its residual exceeds ``residual_tol``.  ``branch_offsets`` maps a
    cluster index to an integer winding number added to that eigenvalue's
    branch log (each choice yields a different, equally valid flow).
    """
    a = as_matrix(a)
    if q is None:
        q = minimal_polynomial(a, tol)
    else:
        residual = validate_relation(a, q, tol)
        if residual > tol.residual_tol:
            raise RelationInvalid(
                f"relation residual {residual:.3e} exceeds {tol.residual_tol:.1e}"
            )
    roots = find_roots(q, tol)
    spectrum = cluster_roots(roots, tol, polynomial=q)
    if branch_offsets:
        spectrum = spectrum.with_branch_offsets(branch_offsets)
    basis = build_basis(spectrum)
    # mu_i = sum_j e_ij f_j requires the inverse of (f_i(-j)), the transpose
    # of the row-per-evaluation-point layout returned by vandermonde_matrix.
    coeffs = invert_vandermonde(vandermonde_matrix(basis).T, tol)
    negs_ext = _negative_powers_extended(a, q.degree, tol)
    # Estimated cancellation of the contraction over a working range of z;
    # when extended precision cannot absorb it, attach an arbitrary-precision
    # evaluator.  (At z = k the result |A^k| can be dwarfed by the terms
    # |mu_i(k)| |A^{-i}|, and every rounding error scales with the terms.)
    e_ext = coeffs.e_extended
    neg_scales = np.array([np.max(np.abs(p)) for p in negs_ext], dtype=np.float64)
    amp = 0.0
    for probe in (1.0, 5.0, -3.0):
        mu_probe = np.abs(e_ext @ eval_basis_extended(basis, probe)).astype(np.float64)
        amp = max(amp, float(mu_probe @ neg_scales) / max(1.0, max_norm(a)))
    high_precision = None
    if amp > 1e8:
        from .highprec import HighPrecisionFlow

        dps = min(60, 35 + int(np.log10(amp)))
        high_precision = HighPrecisionFlow(a, q, basis, dps=dps)
    return FlowRepresentation(
        relation=q,
        basis=basis,
        coeffs=coeffs,
        neg_powers=tuple(m.astype(np.complex128) for m in negs_ext),
        source_dim=a.shape[0],
        neg_powers_extended=tuple(negs_ext),
        high_precision=high_precision,
    )


def _mu_extended(rep: FlowRepresentation, z: complex) -> np.ndarray:
    e = rep.coeffs.e_extended
    if e is None:
        e = rep.coeffs.e.astype(np.clongdouble)
    return e @ eval_basis_extended(rep.basis, z)


def mu_functions(rep: FlowRepresentation, z: complex) -> np.ndarray:
    """The coefficient vector ``mu(z)`` with ``A^z = sum mu_i(z) A^{-i}``."""
    if rep.high_precision is not None:
        return rep.high_precision.mu(z)
    return _mu_extended(rep, z).astype(np.complex128)


def evaluate_flow(rep: FlowRepresentation, z: complex) -> np.ndarray:
    """Evaluate ``A^z`` from a representation.

    The contraction over the negative powers cancels heavily for defective
    spectra, so it is accumulated in extended precision before rounding --
    or at arbitrary precision when the representation carries a
    high-precision evaluator.
    """
    if rep.high_precision is not None:
        return rep.high_precision.evaluate(z)
    mu = _mu_extended(rep, z)
    powers = rep.neg_powers_extended
    if powers is None:
        powers = tuple(p.astype(np.clongdouble) for p in rep.neg_powers)
    out = np.zeros((rep.source_dim, rep.source_dim), dtype=np.clongdouble)
    for m, power in zip(mu, powers):
        out += m * power
    return out.astype(np.complex128)


def companion_matrix(q: AnnihilatorPolynomial) -> np.ndarray:
    """Companion matrix of the relation: coefficients ``(c_{p-1}, ..., c_0)``
    down the first column, ones on the superdiagonal."""
    p = q.degree
    c = np.zeros((p, p), dtype=np.complex128)
    for i in range(p):
        c[i, 0] = q.coeffs[p - 1 - i]
    for i in range(p - 1):
        c[i, i + 1] = 1.0
    return c


class CompanionFlow:
    """The coefficient functions ``mu(z) = C^z c`` of a relation.

    ``C^z`` is obtained from the direct construction applied to ``C``
    (legitimate because the relation is both the characteristic and the
    minimal polynomial of its companion matrix), with the same branch policy.
    The construction actually runs on a diagonal similarity ``D^{-1} C D``
    with ``D`` powers of the geometric-mean root magnitude: companion
    matrices of high-degree relations are badly scaled, and balancing keeps
    the negative-power solves accurate.
    """

    def __init__(
        self,
        q: AnnihilatorPolynomial,
        tol: ToleranceConfig = DEFAULT_TOL,
        branch_offsets: dict | None = None,
    ):
        if abs(q.coeffs[0]) == 0.0:
            raise ZeroEigenvalue(
                "constant coefficient is zero; zero is a root of the relation"
            )
        p = q.degree
        s = abs(q.coeffs[0]) ** (1.0 / p)
        self._scale = s ** np.arange(p)
        balanced = companion_matrix(q) * np.outer(1.0 / self._scale, self._scale)
        self._rep = build_flow(balanced, q, tol, branch_offsets)
        inv = extended_inverse(balanced)
        negs = [inv]
        for _ in range(p - 1):
            negs.append(negs[-1] @ inv)
        self._negs_ext = negs
        self._c_scaled = (
            np.array(q.coeffs[::-1], dtype=np.complex128) / self._scale
        ).astype(np.clongdouble)

    def mu(self, z: complex) -> np.ndarray:
        hp = self._rep.high_precision
        if hp is not None:
            return np.array(
                [complex(v) for v in hp.companion_mu_mp(z)], dtype=np.complex128
            )
        nu = _mu_extended(self._rep, z)
        czt = np.zeros_like(self._negs_ext[0])
        for v, power in zip(nu, self._negs_ext):
            czt += v * power
        return (self._scale * (czt @ self._c_scaled)).astype(np.complex128)


def companion_flow_mu(
    q: AnnihilatorPolynomial,
    z: complex,
    tol: ToleranceConfig = DEFAULT_TOL,
    branch_offsets: dict | None = None,
) -> np.ndarray:
    """``mu(z) = C^z c`` for the companion matrix ``C`` of the relation."""
    return CompanionFlow(q, tol, branch_offsets).mu(z)


def evaluate_companion_flow(
    a,
    q: AnnihilatorPolynomial,
    z: complex,
    tol: ToleranceConfig = DEFAULT_TOL,
    branch_offsets: dict | None = None,
) -> np.ndarray:
    """Evaluate ``A^z = sum mu_i(z) A^{-i}`` with ``mu`` from the companion
    construction; independent of :func:`build_flow` applied to ``a``."""
    a = as_matrix(a)
    residual = validate_relation(a, q, tol)
    if residual > tol.residual_tol:
        raise RelationInvalid(
            f"relation residual {residual:.3e} exceeds {tol.residual_tol:.1e}"
        )
    mu = companion_flow_mu(q, z, tol, branch_offsets).astype(np.clongdouble)
    negs = _negative_powers_extended(a, q.degree, tol)
    amp = float(sum(abs(m) * np.max(np.abs(p)) for m, p in zip(mu, negs)))
    if amp > 1e7 * max(1.0, max_norm(a)):
        # cancellation beyond what extended precision absorbs; redo the
        # companion chain and the contraction at arbitrary precision
        from .highprec import HighPrecisionFlow

        roots = find_roots(q, tol)
        spectrum = cluster_roots(roots, tol, polynomial=q)
        if branch_offsets:
            spectrum = spectrum.with_branch_offsets(branch_offsets)
        basis = build_basis(spectrum)
        hp = HighPrecisionFlow(a, q, basis, dps=min(60, 35 + int(np.log10(amp))))
        return hp.contract_mu(hp.companion_mu_mp(z))
    out = np.zeros(a.shape, dtype=np.clongdouble)
    for m, power in zip(mu, negs):
        out += m * power
    return out.astype(np.complex128)


def jordan_block_flow(lam: complex, size: int, z: complex) -> np.ndarray:
    """Flow of a single Jordan block ``lam * I + N``:
    ``sum_j g_j(z) lam^(z-j) N^j`` (upper-triangular Toeplitz)."""
    if size < 1:
        raise ValueError("block size must be positive")
    lam = complex(lam)
    z = complex(z)
    out = np.zeros((size, size), dtype=np.complex128)
    for j in range(size):
        val = generalized_binomial(j, z) * scalar_flow(lam, z - j)
        for i in range(size - j):
            out[i, i + j] = val
    return out


def jordan_oracle(blocks, t, z: complex, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Ground-truth flow ``T J^z T^{-1}`` for a synthetic Jordan structure.

    ``blocks`` is a list of ``(eigenvalue, size)`` pairs whose sizes must sum
    to the dimension of ``t``.
    """
    t = as_matrix(t)
    n = t.shape[0]
    if sum(s for _, s in blocks) != n:
        raise DimensionMismatch("block sizes do not sum to the matrix dimension")
    jz = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for lam, size in blocks:
        jz[pos : pos + size, pos : pos + size] = jordan_block_flow(lam, size, z)
        pos += size
    return t @ jz @ inverse(t, tol)


def _parse_jordan_blocks(a, tol: ToleranceConfig):
    """Split a Jordan-form matrix into (eigenvalue, size) blocks, or raise."""
    a = as_matrix(a)
    n = a.shape[0]
    off = np.abs(a - np.diag(np.diag(a)) - np.diag(np.diag(a, 1), 1))
    scale = max(1.0, max_norm(a))
    if np.max(off, initial=0.0) > tol.rank_tol * scale:
        raise NotJordanForm("matrix has entries outside the diagonal and superdiagonal")
    blocks = []
    start = 0
    for i in range(n - 1):
        s = a[i, i + 1]
        if abs(s - 1.0) <= tol.rank_tol * scale:
            if abs(a[i, i] - a[i + 1, i + 1]) > tol.cluster_tol * scale:
                raise NotJordanForm("superdiagonal one joins two different eigenvalues")
            continue
        if abs(s) <= tol.rank_tol * scale:
            blocks.append((complex(a[start, start]), i + 1 - start))
            start = i + 1
        else:
            raise NotJordanForm("superdiagonal entries must be exactly zero or one")
    blocks.append((complex(a[start, start]), n - start))
    return blocks


def extend_matrix(
    a,
    new_root: complex,
    spectrum_of_a: Spectrum,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> np.ndarray:
    """Enlarge ``a`` so its minimal polynomial gains the factor ``(X - new_root)``
    while the top-left block of any flow of the result reproduces the flow of ``a``.

    A root away from the existing spectrum is appended as a 1x1 diagonal
    block.  A repeated root requires ``a`` in Jordan (block-diagonal) form;
    the largest block with that eigenvalue grows by one row and column.
    """
    a = as_matrix(a)
    new_root = complex(new_root)
    is_eigenvalue = any(
        abs(new_root - c.value) <= tol.cluster_tol for c in spectrum_of_a.clusters
    )
    if not is_eigenvalue:
        n = a.shape[0]
        out = np.zeros((n + 1, n + 1), dtype=np.complex128)
        out[:n, :n] = a
        out[n, n] = new_root
        return out
    blocks = _parse_jordan_blocks(a, tol)
    candidates = [
        k for k, (lam, _) in enumerate(blocks) if abs(lam - new_root) <= tol.cluster_tol
    ]
    target = max(candidates, key=lambda k: blocks[k][1])
    lam, size = blocks[target]
    blocks[target] = (lam, size + 1)
    n = a.shape[0] + 1
    out = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for lam, size in blocks:
        out[pos : pos + size, pos : pos + size] = lam * np.eye(size) + np.diag(
            np.ones(size - 1), 1
        )
        pos += size
    return out


def companion_action_check(
    a,
    q: AnnihilatorPolynomial,
    coeff_vec,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> float:
    """Residual of the identity ``A * <v, powers> = <C v, powers>`` over the
    negative-power basis, normalized by the magnitude of the two sides.

    This pins down the companion-matrix orientation: it vanishes exactly
    when the relation coefficients run down the first column with ones on
    the superdiagonal.
    """
    a = as_matrix(a)
    v = np.asarray(coeff_vec, dtype=np.complex128)
    p = q.degree
    if v.shape != (p,):
        raise DimensionMismatch(f"coefficient vector must have length {p}")
    negs = negative_powers(a, p, tol)
    lhs = a @ sum(vi * m for vi, m in zip(v, negs))
    w = companion_matrix(q) @ v
    rhs = sum(wi * m for wi, m in zip(w, negs))
    scale = max(1.0, max_norm(lhs), max_norm(rhs))
    return max_norm(lhs - rhs) / scale


@dataclass(frozen=True)
class FlowAxiomReport:
    """Measured residuals of the three flow axioms for one representation."""

    identity_residual: float
    generator_residual: float
    group_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.identity_residual, self.generator_residual, self.group_residual)


def check_flow_axioms(rep: FlowRepresentation, a, samples) -> FlowAxiomReport:
    """Measure ``|F(0) - I|``, ``|F(1) - A|`` and the group law over sample
    ``(z, w)`` pairs; pure measurement, never raises on large residuals.

    The endpoint checks are normalized by ``max(1, |A|, |A^{-p}|)``; each
    group-law sample by ``max(1, |F(z)| * |F(w)|)``.
    """
    a = as_matrix(a)
    scale = max(1.0, max_norm(a), max_norm(rep.neg_powers[-1]))
    ident = max_norm(evaluate_flow(rep, 0.0) - np.eye(rep.source_dim)) / scale
    gen = max_norm(evaluate_flow(rep, 1.0) - a) / scale
    group = 0.0
    for z, w in samples:
        fz = evaluate_flow(rep, z)
        fw = evaluate_flow(rep, w)
        fzw = evaluate_flow(rep, complex(z) + complex(w))
        denom = max(1.0, max_norm(fz) * max_norm(fw))
        group = max(group, max_norm(fz @ fw - fzw) / denom)
    return FlowAxiomReport(identity_residual=ident, generator_residual=gen, group_residual=group)
