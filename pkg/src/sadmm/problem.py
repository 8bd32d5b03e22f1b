"""Problem container: smooth part f, regularizer h, and the coupling matrix A.

The solvers address  min_x f(x) + h(y)  s.t.  Ax - y = 0,  i.e. the linear
coupling uses B = -I and c = 0. The B and c slots are reserved in the
interface so a general coupling could be added without signature changes,
but only the identity reduction is implemented.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Protocol, runtime_checkable

import numpy as np

from .linalg import SparseMatrixCSR, SpectralConstants, compute_spectral_constants, spmv
from .prox import Regularizer, h_value


@runtime_checkable
class SmoothObjective(Protocol):
    """Oracle for f(x) = (1/n) sum_i f_i(x)."""

    @property
    def n(self) -> int: ...

    @property
    def dim(self) -> int: ...

    @property
    def smoothness(self) -> float:
        """L = max_i L_i."""
        ...

    @property
    def smoothness_avg(self) -> float:
        """Lipschitz constant of grad f itself (at most L)."""
        ...

    @property
    def strong_convexity(self) -> float: ...

    def value(self, x) -> float: ...

    def full_grad(self, x) -> np.ndarray: ...

    def subset_grad(self, x, idx) -> np.ndarray: ...

    def hess_vec(self, x, v) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """f, h and A of one benchmark instance."""

    f: SmoothObjective
    reg: Regularizer
    A: SparseMatrixCSR
    B: None = None  # reserved; None means -identity
    c: None = None  # reserved; None means zero

    def __post_init__(self):
        if self.B is not None or self.c is not None:
            raise NotImplementedError("only the B = -I, c = 0 coupling is implemented")
        if self.A.cols != self.f.dim:
            raise ValueError(
                f"A has {self.A.cols} columns but the smooth objective dimension is {self.f.dim}"
            )

    @property
    def d1(self) -> int:
        return self.A.cols

    @property
    def d2(self) -> int:
        return self.A.rows

    @cached_property
    def spectra(self) -> SpectralConstants:
        return compute_spectral_constants(self.A, tol=1e-10)

    def constraint_residual(self, v, y) -> np.ndarray:
        """A v + B y - c, i.e. A v - y."""
        return spmv(self.A, v) - np.asarray(y, dtype=np.float64)

    def objective(self, x) -> float:
        """Composite objective f(x) + h(Ax) as a function of x alone."""
        return self.f.value(x) + h_value(self.reg, spmv(self.A, x))
