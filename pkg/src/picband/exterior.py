"""Complexified exterior algebra over R^n with its two Clifford actions.

Everything here is exact basis combinatorics on sparse coefficient tables:
a form is a map from strictly increasing multi-indices (1-based) to complex
coefficients, the fiber metric is the one making that basis orthonormal.
The two Clifford multiplications are wedge-minus-contraction and
wedge-plus-contraction; the boundary involution is their composition with
the unit normal plugged into both slots.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations

import numpy as np

__all__ = [
    "FormElement",
    "wedge",
    "interior",
    "clifford_c",
    "clifford_ct",
    "chi_involution",
    "boundary_split",
    "inner",
    "basis_form",
    "flat",
    "two_form_basis",
    "form_to_vec",
    "vec_to_form",
    "operator_matrix",
    "full_operator_matrix",
    "full_basis",
    "random_form",
]

_ZERO_TOL = 1e-15


def _sort_with_sign(indices):
    """Sort a multi-index, counting transpositions; return (tuple, sign).

    sign = 0 when an index repeats.
    """
    idx = list(indices)
    sign = 1
    # insertion sort; n is tiny so quadratic cost is irrelevant
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return tuple(idx), 0
    return tuple(idx), sign


class FormElement:
    """Element of the complexified exterior algebra Lambda(R^n).

    Coefficients are stored sparsely, keyed by the strictly increasing
    multi-index (1-based).  Mixed degree is allowed; most geometric
    operations below preserve or shift pure degree.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        if n < 1:
            raise ValueError(f"ambient dimension must be positive, got {n}")
        self.n = n
        table = {}
        if coeffs:
            for key, val in coeffs.items():
                key = tuple(key)
                if any(i < 1 or i > n for i in key):
                    raise ValueError(f"index out of range 1..{n}: {key}")
                skey, sign = _sort_with_sign(key)
                if sign == 0:
                    continue
                val = complex(val) * sign
                if val != 0:
                    table[skey] = table.get(skey, 0.0) + val
        self.coeffs = {k: v for k, v in table.items() if v != 0}

    # -- basic algebra -------------------------------------------------

    def copy(self) -> "FormElement":
        out = FormElement(self.n)
        out.coeffs = dict(self.coeffs)
        return out

    def degrees(self):
        return sorted({len(k) for k in self.coeffs})

    def degree(self) -> int:
        """Degree of a pure-degree form (0 for the zero form)."""
        degs = self.degrees()
        if not degs:
            return 0
        if len(degs) > 1:
            raise ValueError(f"form has mixed degrees {degs}")
        return degs[0]

    def __add__(self, other: "FormElement") -> "FormElement":
        self._check(other)
        out = self.copy()
        for k, v in other.coeffs.items():
            out.coeffs[k] = out.coeffs.get(k, 0.0) + v
            if out.coeffs[k] == 0:
                del out.coeffs[k]
        return out

    def __sub__(self, other: "FormElement") -> "FormElement":
        return self + (other * -1.0)

    def __mul__(self, scalar) -> "FormElement":
        out = FormElement(self.n)
        if scalar != 0:
            out.coeffs = {k: v * scalar for k, v in self.coeffs.items()}
        return out

    __rmul__ = __mul__

    def __neg__(self) -> "FormElement":
        return self * -1.0

    def norm2(self) -> float:
        return float(sum((v * v.conjugate()).real for v in self.coeffs.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def is_zero(self, tol: float = _ZERO_TOL) -> bool:
        return all(abs(v) <= tol for v in self.coeffs.values())

    def _check(self, other: "FormElement"):
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __repr__(self):
        terms = ", ".join(f"{k}: {v:.4g}" for k, v in sorted(self.coeffs.items()))
        return f"FormElement(n={self.n}, {{{terms}}})"


def basis_form(n: int, *indices) -> FormElement:
    """theta^{i_1} ^ ... ^ theta^{i_k} with coefficient 1 (indices 1-based)."""
    return FormElement(n, {tuple(indices): 1.0})


def flat(v) -> np.ndarray:
    """Musical isomorphism; the frame is orthonormal so this is a cast."""
    return np.asarray(v)


def inner(a: FormElement, b: FormElement) -> complex:
    """Hermitian inner product, linear in the first slot."""
    a._check(b)
    small, big = (a.coeffs, b.coeffs) if len(a.coeffs) < len(b.coeffs) else (b.coeffs, a.coeffs)
    total = 0.0
    if small is a.coeffs:
        for k, v in small.items():
            w = big.get(k)
            if w is not None:
                total += v * w.conjugate()
    else:
        for k, w in small.items():
            v = big.get(k)
            if v is not None:
                total += v * w.conjugate()
    return complex(total)


def wedge(a: FormElement, b: FormElement) -> FormElement:
    """Exterior product."""
    a._check(b)
    out = FormElement(a.n)
    acc = out.coeffs
    for ka, va in a.coeffs.items():
        sa = set(ka)
        for kb, vb in b.coeffs.items():
            if sa & set(kb):
                continue
            key, sign = _sort_with_sign(ka + kb)
            val = va * vb * sign
            acc[key] = acc.get(key, 0.0) + val
    out.coeffs = {k: v for k, v in acc.items() if v != 0}
    return out


def _wedge_basis_vector(j: int, a: FormElement) -> FormElement:
    """theta^j ^ a for a single frame index j."""
    out = FormElement(a.n)
    acc = out.coeffs
    for k, v in a.coeffs.items():
        if j in k:
            continue
        key, sign = _sort_with_sign((j,) + k)
        acc[key] = acc.get(key, 0.0) + v * sign
    return out


def _interior_basis_vector(j: int, a: FormElement) -> FormElement:
    """i_{e_j} a for a single frame index j."""
    out = FormElement(a.n)
    acc = out.coeffs
    for k, v in a.coeffs.items():
        if j not in k:
            continue
        pos = k.index(j)
        key = k[:pos] + k[pos + 1:]
        acc[key] = acc.get(key, 0.0) + v * ((-1) ** pos)
    return out


def _vector_components(v, n: int):
    v = np.asarray(v)
    if v.shape != (n,):
        raise ValueError(f"vector has shape {v.shape}, expected ({n},)")
    return v


def interior(v, a: FormElement) -> FormElement:
    """Contraction i_v a; antiderivation of degree -1, adjoint to wedge by v-flat."""
    v = _vector_components(v, a.n)
    out = FormElement(a.n)
    for j in range(a.n):
        c = v[j]
        if c == 0:
            continue
        term = _interior_basis_vector(j + 1, a)
        for k, val in term.coeffs.items():
            out.coeffs[k] = out.coeffs.get(k, 0.0) + c * val
    out.coeffs = {k: v2 for k, v2 in out.coeffs.items() if v2 != 0}
    return out


def wedge_vector(v, a: FormElement) -> FormElement:
    """v-flat ^ a for a frame-component vector v."""
    v = _vector_components(v, a.n)
    out = FormElement(a.n)
    for j in range(a.n):
        c = v[j]
        if c == 0:
            continue
        term = _wedge_basis_vector(j + 1, a)
        for k, val in term.coeffs.items():
            out.coeffs[k] = out.coeffs.get(k, 0.0) + c * val
    out.coeffs = {k: v2 for k, v2 in out.coeffs.items() if v2 != 0}
    return out


def clifford_c(v, a: FormElement) -> FormElement:
    """c(v) a = v-flat ^ a - i_v a.  Anti-self-adjoint for real v."""
    return wedge_vector(v, a) - interior(v, a)


def clifford_ct(v, a: FormElement) -> FormElement:
    """ct(v) a = v-flat ^ a + i_v a.  Self-adjoint for real v."""
    return wedge_vector(v, a) + interior(v, a)


def _check_unit(nu, n: int, tol: float = 1e-12):
    nu = _vector_components(nu, n)
    nrm = float(np.linalg.norm(nu))
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"normal vector must be unit length, |nu| = {nrm}")
    return nu


def chi_involution(nu, a: FormElement) -> FormElement:
    """Boundary involution ct(nu) c(nu); +1 on tangential forms, -1 on normal ones."""
    nu = _check_unit(nu, a.n)
    return clifford_ct(nu, clifford_c(nu, a))


def boundary_split(nu, a: FormElement):
    """Split a = tangential + normal with respect to the unit normal nu."""
    nu = _check_unit(nu, a.n)
    chi_a = chi_involution(nu, a)
    tangential = (a + chi_a) * 0.5
    normal = (a - chi_a) * 0.5
    return tangential, normal


# -- fixed-degree linear algebra views --------------------------------


@lru_cache(maxsize=None)
def degree_basis(n: int, k: int):
    """Ordered basis of degree-k multi-indices (lexicographic)."""
    return tuple(combinations(range(1, n + 1), k))


def two_form_basis(n: int):
    """Ordered basis {theta^i ^ theta^j : i < j} used for operator matrices."""
    return degree_basis(n, 2)


def degree_part(a: FormElement, k: int) -> FormElement:
    """Projection onto the degree-k summand."""
    return FormElement(a.n, {key: v for key, v in a.coeffs.items() if len(key) == k})


def form_to_vec(a: FormElement, k: int) -> np.ndarray:
    basis = degree_basis(a.n, k)
    pos = {key: i for i, key in enumerate(basis)}
    out = np.zeros(len(basis), dtype=complex)
    for key, val in a.coeffs.items():
        if len(key) != k:
            raise ValueError(f"form has a degree-{len(key)} component, expected pure degree {k}")
        out[pos[key]] = val
    return out


def vec_to_form(vec, n: int, k: int) -> FormElement:
    basis = degree_basis(n, k)
    vec = np.asarray(vec)
    if vec.shape != (len(basis),):
        raise ValueError(f"coefficient vector has shape {vec.shape}, expected ({len(basis)},)")
    return FormElement(n, {key: vec[i] for i, key in enumerate(basis) if vec[i] != 0})


@lru_cache(maxsize=None)
def full_basis(n: int):
    """All multi-indices, grouped by degree then lexicographic (size 2^n)."""
    out = []
    for k in range(n + 1):
        out.extend(degree_basis(n, k))
    return tuple(out)


def full_operator_matrix(op, n: int) -> np.ndarray:
    """Dense matrix of a linear map on the whole exterior algebra."""
    basis = full_basis(n)
    pos = {key: i for i, key in enumerate(basis)}
    mat = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, key in enumerate(basis):
        image = op(FormElement(n, {key: 1.0}))
        for k, v in image.coeffs.items():
            mat[pos[k], col] = v
    return mat


def operator_matrix(op, n: int, k_in: int, k_out: int) -> np.ndarray:
    """Dense matrix of a linear map on forms in the fixed degree bases."""
    basis_in = degree_basis(n, k_in)
    dim_out = len(degree_basis(n, k_out))
    mat = np.zeros((dim_out, len(basis_in)), dtype=complex)
    for col, key in enumerate(basis_in):
        image = op(FormElement(n, {key: 1.0}))
        mat[:, col] = form_to_vec(image, k_out)
    return mat


def random_form(n: int, k: int, rng, complex_coeffs: bool = True) -> FormElement:
    basis = degree_basis(n, k)
    vec = rng.standard_normal(len(basis))
    if complex_coeffs:
        vec = vec + 1j * rng.standard_normal(len(basis))
    return vec_to_form(vec, n, k)
