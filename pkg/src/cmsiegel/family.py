"""Siegel-family indices, their transport under GSp_2g(Z/NZ), and member evaluation.

An index is M = (1/N) [A^T; B^T], a 2g x g matrix stored through its integer
numerator N*M.  Members are evaluated by composition: complete [A B] to an
integral symplectic gamma and evaluate the generator at gamma(Z).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import mpmath

from .errors import NotExtendable
from .modfun import catalog
from .modfun.expr import FunctionExpr, Value, evaluate
from .modfun.kernels import as_matrix as as_point
from .modfun.modularity import ModularityReport, verify_modularity
from .modfun.precision import Precision
from .modfun.space import act
from .polarization import CMPoint
from .zmatrix import (GSpElement, IntMatrix, as_matrix, complete_block_row, enumerate_gsp,
                      frame_is_isotropic, identity, is_symplectic, mat_mod, mat_mul, matrix_from_json, matrix_to_json,
                      transpose, zeros)

_ACT_GUARD_BITS = 64


@dataclass(frozen=True)
class FamilyIndex:
    level: int
    genus: int
    numerator: IntMatrix

    def __post_init__(self):
        if self.level < 2:
            raise ValueError("level must be at least 2")
        num = mat_mod(as_matrix(self.numerator), self.level)
        if len(num) != 2 * self.genus or any(len(r) != self.genus for r in num):
            raise ValueError(f"numerator must be {2 * self.genus} x {self.genus}")
        object.__setattr__(self, "numerator", num)
        if not frame_is_isotropic(self.A, self.B, self.level):
            raise NotExtendable("index is not isotropic")

    @property
    def A(self) -> IntMatrix:
        return transpose(self.numerator[:self.genus])

    @property
    def B(self) -> IntMatrix:
        return transpose(self.numerator[self.genus:])

    @classmethod
    def identity(cls, genus: int, level: int) -> FamilyIndex:
        """(1/N) [I; O], the index of the generator itself."""
        return cls(level, genus, identity(genus) + zeros(genus, genus))

    @classmethod
    def from_blocks(cls, A, B, level: int) -> FamilyIndex:
        """The index (1/N) [A^T; B^T] of the top block row [A B]."""
        return cls(level, len(A), transpose(A) + transpose(B))

    def completion(self) -> IntMatrix:
        return complete_block_row(self.A, self.B, self.level)

    def to_json(self) -> dict:
        return {"level": self.level, "genus": self.genus, "numerator": matrix_to_json(self.numerator)}

    @classmethod
    def from_json(cls, d: dict) -> FamilyIndex:
        return cls(int(d["level"]), int(d["genus"]), matrix_from_json(d["numerator"]))


def normalize_index(M: FamilyIndex) -> FamilyIndex:
    """Canonical representative of {+M, -M} modulo integral matrices (row-major lexicographic)."""
    N = M.level
    pos = M.numerator
    neg = tuple(tuple((-x) % N for x in row) for row in pos)
    return M if pos <= neg else FamilyIndex(N, M.genus, neg)


def validate_index(M: FamilyIndex) -> FamilyIndex:
    """Raise NotExtendable unless [A B] is a top block row of some element of GSp_2g(Z/NZ)."""
    complete_block_row(M.A, M.B, M.level)
    return M


def act_on_index(s: GSpElement, M: FamilyIndex) -> FamilyIndex:
    """The right action M -> s^T M (mod Z), normalized."""
    if s.modulus != M.level or s.genus != M.genus:
        raise ValueError("element and index live at different level or genus")
    moved = mat_mul(transpose(s.entries), M.numerator)
    return normalize_index(FamilyIndex(M.level, M.genus, moved))


def index_set(genus: int, level: int) -> list[FamilyIndex]:
    """All canonical indices, as the orbit of (1/N)[I; O] under GSp_2g(Z/NZ)."""
    seen = {}
    start = normalize_index(FamilyIndex.identity(genus, level))
    for s in enumerate_gsp(genus, level):
        m = act_on_index(s, start)
        seen[m.numerator] = m
    return [seen[k] for k in sorted(seen)]


@lru_cache(maxsize=64)
def _certify(expr: FunctionExpr, trials: int, seed: int) -> ModularityReport:
    return verify_modularity(expr, expr.level, trials=trials, seed=seed)


@dataclass(frozen=True)
class FamilyDescriptor:
    base: FunctionExpr
    level: int
    genus: int
    certificate: ModularityReport | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.base.genus != self.genus:
            raise ValueError("generator genus differs from the descriptor genus")
        if self.base.level != self.level:
            raise ValueError("generator level differs from the descriptor level")

    @classmethod
    def from_catalog(cls, name: str, level: int, certify: bool = True, trials: int = 4,
                     seed: int = 0) -> FamilyDescriptor:
        """Catalog generator at the given level; with ``certify`` its modularity is checked first."""
        expr = catalog.get(name, level)
        report = None
        if certify:
            report = _certify(expr, trials, seed)
            if not report.passed:
                raise ValueError(f"{name} failed the modularity check at level {level}: "
                                 f"defect {report.max_defect:.3g}")
        return cls(expr, level, expr.genus, report)

    def to_json(self) -> dict:
        out = {"function": self.base.name, "version": self.base.version, "level": self.level,
               "genus": self.genus}
        if self.certificate is not None:
            out["modularity"] = self.certificate.to_json()
        return out


def _point_source(Z):
    """bits -> (Z, error) for a CMPoint, a raw matrix or such a callable."""
    if callable(Z):
        return Z
    if isinstance(Z, CMPoint):
        return lambda bits: (Z.Z, Z.error_bound)

    def raw(bits: int):
        with mpmath.workprec(bits):
            return as_point(Z), mpmath.mpf(0)
    return raw


def check_completion(gamma: Sequence[Sequence[int]], M: FamilyIndex) -> None:
    g, N = M.genus, M.level
    top = mat_mod(gamma[:g], N)
    if not is_symplectic(gamma) or tuple(r[:g] for r in top) != mat_mod(M.A, N) \
            or tuple(r[g:] for r in top) != mat_mod(M.B, N):
        raise ValueError("gamma is not a symplectic completion of the index")


def evaluate_member(d: FamilyDescriptor, M: FamilyIndex, Z, prec: Precision | None = None,
                    gamma: Sequence[Sequence[int]] | None = None) -> Value:
    """h_M(Z) = h(gamma(Z)) for a symplectic completion gamma of the index.

    ``gamma`` overrides the default completion (it must have the index's top
    block row mod N).  ``Z`` is a :class:`CMPoint` (its error is propagated
    through the action), a raw matrix, or a callable ``bits -> (Z, error)``
    that can recompute the point when the evaluation escalates precision.
    """
    prec = prec or Precision()
    if M.level != d.level or M.genus != d.genus:
        raise ValueError("index and descriptor differ in level or genus")
    if gamma is None:
        gamma = M.completion()
    else:
        gamma = as_matrix(gamma)
        check_completion(gamma, M)
    source = _point_source(Z)

    def moved(bits: int):
        Zm, z_err = source(bits)
        with mpmath.workprec(bits + _ACT_GUARD_BITS):
            return act(gamma, Zm, z_err)
    return evaluate(d.base, moved, prec)
