"""Shared fixtures: the seeded random matrix suite used across the tests.

Suite matrices are built as ``T J T^{-1}`` from a known Jordan structure so
an independent ground-truth flow is always available.  Eigenvalue magnitudes
stay in ``[0.5, 4]`` with pairwise separation at least ``0.3``; Jordan blocks
have size at most 3, with at most one multiple eigenvalue per matrix (a
nearly defective double-precision matrix carries an intrinsic representation
error per multiple cluster, so stacking several multiplies it).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from cflow import build_flow


@dataclass(frozen=True)
class SuiteCase:
    """One suite matrix with its generating Jordan data."""

    matrix: np.ndarray
    blocks: tuple  # ((eigenvalue, size), ...)
    transform: np.ndarray


def _random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q


def random_suite_case(rng: np.random.Generator, max_dim: int = 8) -> SuiteCase:
    """Draw one matrix: random Jordan structure conjugated by a matrix with
    modest condition number (singular values in ``[1, 5]``)."""
    n = int(rng.integers(1, max_dim + 1))
    blocks = []
    allow_multiple = bool(rng.integers(0, 2)) and n >= 2
    while sum(m for _, m in blocks) < n:
        remaining = n - sum(m for _, m in blocks)
        for _ in range(200):
            lam = rng.uniform(0.5, 4.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            if all(abs(lam - mu) >= 0.3 for mu, _ in blocks):
                break
        if allow_multiple and remaining >= 2:
            size = int(rng.integers(2, min(3, remaining) + 1))
            allow_multiple = False
        else:
            size = 1
        blocks.append((complex(lam), size))
    j = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for lam, size in blocks:
        for i in range(size):
            j[pos + i, pos + i] = lam
            if i + 1 < size:
                j[pos + i, pos + i + 1] = 1.0
        pos += size
    t = (
        _random_unitary(rng, n)
        @ np.diag(rng.uniform(1.0, 5.0, n))
        @ _random_unitary(rng, n)
    )
    a = t @ j @ np.linalg.inv(t)
    return SuiteCase(matrix=a, blocks=tuple(blocks), transform=t)


@pytest.fixture(scope="session")
def suite():
    """50 seeded random matrices; the acceptance suite."""
    rng = np.random.default_rng(0)
    return [random_suite_case(rng) for _ in range(50)]


@pytest.fixture(scope="session")
def suite_reps(suite):
    """Flow representations for the suite, built once and shared."""
    return [build_flow(case.matrix) for case in suite]


def rel_err(x: np.ndarray, ref: np.ndarray) -> float:
    """Max-norm error relative to ``max(1, |ref|)``."""
    return float(np.max(np.abs(x - ref))) / max(1.0, float(np.max(np.abs(ref))))
