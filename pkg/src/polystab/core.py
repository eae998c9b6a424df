"""Parameterized matrix polynomial families and their evaluation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import yaml

from .expr import Expr, ExpressionError

__all__ = [
    "Family",
    "FamilyError",
    "MatrixPolynomial",
    "SingularLeadingCoefficientWarning",
    "as_point",
    "evaluate_at",
    "evaluate_coeffs",
    "evaluate_coeffs_batch",
    "family_from_arrays",
    "leading_is_singular",
    "load_family",
    "parse_family",
]


class FamilyError(ValueError):
    """Invalid family document. ``line``/``column`` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class SingularLeadingCoefficientWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Family:
    """P_u(lam) = sum_k A_k(u) lam^k with polynomial entries in t1..tm."""

    n: int
    d: int
    m: int
    coeff_maps: tuple  # (d+1) x n x n nested tuples of Expr
    monic: bool
    source: str = field(default="", repr=False)

    def expr(self, k, i, j):
        return self.coeff_maps[k][i][j]

    def is_real(self):
        """True when every expression has real coefficients (real params give real matrices)."""
        return all(e.real_coefficients for e in self._entries())

    def _entries(self):
        for mat in self.coeff_maps:
            for row in mat:
                yield from row


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """Concrete coefficients ``coeffs[k] = A_k`` with shape (d+1, n, n)."""

    coeffs: np.ndarray
    monic: bool = False
    leading_singular: bool = False

    @property
    def n(self):
        return self.coeffs.shape[1]

    @property
    def d(self):
        return self.coeffs.shape[0] - 1


def _check_leading(f_monic, lead):
    if f_monic:
        return False
    return leading_is_singular(lead)


def leading_is_singular(lead):
    """|det A| < 1e-10 * max(1, ||A||_F^n), the nonsingularity guard."""
    from .linalg import lu_det

    n = lead.shape[0]
    scale = max(1.0, np.linalg.norm(lead) ** n)
    return abs(lu_det(lead)) < 1e-10 * scale


def as_point(f, u):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim != 1 or u.shape[0] != f.m:
        raise ValueError(f"parameter point has length {u.shape[-1] if u.ndim else 0}, family expects m={f.m}")
    return u


def evaluate_coeffs_batch(f, U):
    """Coefficients at many parameter points: (B, m) -> (B, d+1, n, n)."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[1] != f.m:
        raise ValueError(f"expected parameter array of shape (B, {f.m})")
    B = U.shape[0]
    out = np.empty((B, f.d + 1, f.n, f.n), dtype=complex)
    for k, mat in enumerate(f.coeff_maps):
        for i, row in enumerate(mat):
            for j, e in enumerate(row):
                out[:, k, i, j] = e(U)
    if f.monic:
        out[:, f.d] = np.eye(f.n)
    return out


def evaluate_coeffs(f, u):
    u = as_point(f, u)
    coeffs = evaluate_coeffs_batch(f, u[None, :])[0]
    singular = _check_leading(f.monic, coeffs[f.d])
    if singular:
        warnings.warn(
            f"leading coefficient is numerically singular at u={u.tolist()}",
            SingularLeadingCoefficientWarning,
            stacklevel=2,
        )
    return MatrixPolynomial(coeffs, monic=f.monic, leading_singular=singular)


def evaluate_at(P, lam):
    """Matrix Horner evaluation of P at a complex scalar."""
    coeffs = P.coeffs if isinstance(P, MatrixPolynomial) else np.asarray(P)
    acc = coeffs[-1].astype(complex)
    for k in range(coeffs.shape[0] - 2, -1, -1):
        acc = acc * lam + coeffs[k]
    return acc


def horner_matrix_batch(coeffs, lam):
    """Evaluate coefficient stacks (..., d+1, n, n) at lam of shape (...)."""
    lam = np.asarray(lam)[..., None, None]
    acc = coeffs[..., -1, :, :].astype(complex)
    for k in range(coeffs.shape[-3] - 2, -1, -1):
        acc = acc * lam + coeffs[..., k, :, :]
    return acc


# --------------------------------------------------------------------------
# family documents

def _locate(node, offset=0):
    mark = node.start_mark
    col = mark.column + 1 + offset
    if getattr(node, "style", None) in ("'", '"'):
        col += 1
    return mark.line + 1, col


def _scalar_int(mapping, key, root):
    node = mapping.get(key)
    if node is None:
        line, col = _locate(root)
        raise FamilyError(f"missing key {key!r}", line, col)
    if not isinstance(node, yaml.ScalarNode):
        line, col = _locate(node)
        raise FamilyError(f"{key!r} must be an integer", line, col)
    try:
        val = int(node.value)
    except ValueError:
        line, col = _locate(node)
        raise FamilyError(f"{key!r} must be an integer, got {node.value!r}", line, col) from None
    if val < 1:
        line, col = _locate(node)
        raise FamilyError(f"{key!r} must be positive", line, col)
    return val


def parse_family(text):
    """Parse a family document (YAML or JSON) into a :class:`Family`.

    Keys: ``n``, ``d``, ``m`` and ``coeff``, a list of d+1 matrices of
    expression strings ordered by power (``coeff[k]`` multiplies lam^k).
    """
    try:
        root = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise FamilyError(f"syntax error: {exc.problem or exc}", line, col) from None
    if not isinstance(root, yaml.MappingNode):
        raise FamilyError("document must be a mapping with keys n, d, m, coeff", 1, 1)
    mapping = {k.value: v for k, v in root.value}
    n = _scalar_int(mapping, "n", root)
    d = _scalar_int(mapping, "d", root)
    m = _scalar_int(mapping, "m", root)
    cnode = mapping.get("coeff")
    if cnode is None:
        raise FamilyError("missing key 'coeff'", *_locate(root))
    if not isinstance(cnode, yaml.SequenceNode) or len(cnode.value) != d + 1:
        got = len(cnode.value) if isinstance(cnode, yaml.SequenceNode) else "non-list"
        raise FamilyError(f"'coeff' must list d+1={d + 1} matrices, got {got}", *_locate(cnode))

    mats = []
    for k, mnode in enumerate(cnode.value):
        if not isinstance(mnode, yaml.SequenceNode) or len(mnode.value) != n:
            raise FamilyError(f"coeff[{k}] must have {n} rows", *_locate(mnode))
        rows = []
        for i, rnode in enumerate(mnode.value):
            if not isinstance(rnode, yaml.SequenceNode) or len(rnode.value) != n:
                got = len(rnode.value) if isinstance(rnode, yaml.SequenceNode) else "non-list"
                raise FamilyError(
                    f"dimension mismatch: coeff[{k}] row {i} has {got} entries, expected {n}",
                    *_locate(rnode),
                )
            row = []
            for j, enode in enumerate(rnode.value):
                if not isinstance(enode, yaml.ScalarNode):
                    raise FamilyError(f"coeff[{k}][{i}][{j}] must be an expression", *_locate(enode))
                try:
                    e = Expr(enode.value)
                except ExpressionError as exc:
                    raise FamilyError(f"syntax error in coeff[{k}][{i}][{j}]: {exc}", *_locate(enode, exc.pos)) from None
                for idx, pos in e.param_positions():
                    if idx >= m:
                        raise FamilyError(
                            f"undeclared parameter t{idx + 1} (m={m}) in coeff[{k}][{i}][{j}]",
                            *_locate(enode, pos),
                        )
                row.append(e)
            rows.append(tuple(row))
        mats.append(tuple(rows))
    return Family(n=n, d=d, m=m, coeff_maps=tuple(mats), monic=_structurally_identity(mats[d]), source=text)


def _structurally_identity(mat):
    for i, row in enumerate(mat):
        for j, e in enumerate(row):
            if not e.is_constant or e.constant_value() != (1.0 if i == j else 0.0):
                return False
    return True


def load_family(path):
    with open(path, encoding="utf-8") as fh:
        return parse_family(fh.read())


def family_from_arrays(coeff_texts, m):
    """Build a family from nested lists of expression strings (coeff[k][i][j])."""
    d = len(coeff_texts) - 1
    n = len(coeff_texts[0])
    doc = {"n": n, "d": d, "m": m, "coeff": [[[str(x) for x in row] for row in mat] for mat in coeff_texts]}
    return parse_family(yaml.safe_dump(doc, default_flow_style=True, width=10**6))
