"""Finite-difference verification of integral identities on flat bands.

The band is [0, L] x T^{n-1}: one radial axis with second-order one-sided
stencils at the two torus leaves, and periodic transverse axes where the
centred stencil makes discrete summation by parts *exact*.  On the flat
metric every operator acts componentwise on the coefficient functions, so
d, d*, the Dirac operator and their twisted versions are short compositions
of axis derivatives with the pointwise exterior/Clifford index operations.

The Laplacian is deliberately the square of the first-derivative stencil,
not the compact 3-point one: this keeps the discrete Green identities exact
in the periodic directions, leaving pure O(h^2) radial residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import exterior
from .exterior import FormElement

__all__ = [
    "FlatBandGrid",
    "FormField",
    "d_grid",
    "dstar_grid",
    "laplacian_grid",
    "dirac_grid",
    "D_f_grid",
    "green_residual_dirac",
    "green_residual_laplace",
    "twisted_weitzenboeck_residual",
    "conjugation_residual",
    "chi_eigenform_boundary_identity",
    "contraction_trace_identity",
    "trig_field",
    "random_field",
    "convergence_order",
    "paired_test_fields",
    "load_grid_config",
]


@dataclass(frozen=True)
class FlatBandGrid:
    """Uniform grid on [0, L] x T^{n-1} (unit transverse circles)."""

    n: int
    L: float
    N_r: int
    N_t: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("band dimension must be at least 2")
        if self.N_r < 8:
            raise ValueError("need at least 8 radial points")
        if self.N_t < 4:
            raise ValueError("need at least 4 transverse points")
        if self.L <= 0:
            raise ValueError("band length must be positive")

    @property
    def h(self) -> float:
        return self.L / (self.N_r - 1)

    @property
    def ht(self) -> float:
        return 1.0 / self.N_t

    @property
    def shape(self):
        return (self.N_r,) + (self.N_t,) * (self.n - 1)

    def axes(self):
        xs = [np.linspace(0.0, self.L, self.N_r)]
        xs += [np.arange(self.N_t) * self.ht for _ in range(self.n - 1)]
        return np.meshgrid(*xs, indexing="ij")

    def deriv(self, data: np.ndarray, axis: int) -> np.ndarray:
        """Second-order first derivative along an axis; axis 0 is radial
        (one-sided at the ends), the rest are periodic."""
        if axis == 0:
            h = self.h
            out = np.empty_like(data)
            out[1:-1] = (data[2:] - data[:-2]) / (2 * h)
            out[0] = (-3 * data[0] + 4 * data[1] - data[2]) / (2 * h)
            out[-1] = (3 * data[-1] - 4 * data[-2] + data[-3]) / (2 * h)
            return out
        return (np.roll(data, -1, axis=axis) - np.roll(data, 1, axis=axis)) / (2 * self.ht)

    def integrate(self, data: np.ndarray) -> complex:
        """Trapezoid radially, exact periodic sums transversally."""
        w = np.ones(self.N_r)
        w[0] = w[-1] = 0.5
        radial = np.tensordot(w, data, axes=(0, 0)) * self.h
        return complex(radial.sum() * self.ht ** (self.n - 1))

    def integrate_boundary(self, data0: np.ndarray, data1: np.ndarray) -> complex:
        """Sum of both torus-leaf integrals (radial slices 0 and -1)."""
        return complex((data0.sum() + data1.sum()) * self.ht ** (self.n - 1))


class FormField:
    """A form-valued field: one complex array per multi-index."""

    __slots__ = ("grid", "data")

    def __init__(self, grid: FlatBandGrid, data=None):
        self.grid = grid
        self.data = {}
        if data:
            for key, arr in data.items():
                arr = np.asarray(arr, dtype=complex)
                if arr.shape != grid.shape:
                    raise ValueError(f"component {key} has shape {arr.shape}, expected {grid.shape}")
                self.data[tuple(key)] = arr

    def copy(self) -> "FormField":
        out = FormField(self.grid)
        out.data = {k: v.copy() for k, v in self.data.items()}
        return out

    def degrees(self):
        return sorted({len(k) for k in self.data})

    def _acc(self, key, arr):
        if key in self.data:
            self.data[key] = self.data[key] + arr
        else:
            self.data[key] = arr

    def __add__(self, other: "FormField") -> "FormField":
        out = self.copy()
        for k, v in other.data.items():
            out._acc(k, v)
        return out

    def __sub__(self, other: "FormField") -> "FormField":
        out = self.copy()
        for k, v in other.data.items():
            out._acc(k, -v)
        return out

    def __mul__(self, s) -> "FormField":
        out = FormField(self.grid)
        out.data = {k: v * s for k, v in self.data.items()}
        return out

    __rmul__ = __mul__

    def pointwise_inner(self, other: "FormField") -> np.ndarray:
        """<self, other> at every node (Hermitian, linear in self)."""
        out = np.zeros(self.grid.shape, dtype=complex)
        for k, v in self.data.items():
            w = other.data.get(k)
            if w is not None:
                out += v * np.conj(w)
        return out

    def at_node(self, idx) -> FormElement:
        return FormElement(self.grid.n, {k: v[idx] for k, v in self.data.items()})

    def sup_norm(self) -> float:
        if not self.data:
            return 0.0
        return max(float(np.max(np.abs(v))) for v in self.data.values())


def _wedge_key(j: int, key: tuple):
    """(sorted key, sign) of theta^j ^ theta^key, or None."""
    if j in key:
        return None
    merged, sign = exterior._sort_with_sign((j,) + key)
    return merged, sign


def _interior_key(j: int, key: tuple):
    """(reduced key, sign) of i_{e_j} theta^key, or None."""
    if j not in key:
        return None
    pos = key.index(j)
    return key[:pos] + key[pos + 1:], (-1) ** pos


def d_grid(F: FormField) -> FormField:
    """Exterior derivative: sum_j theta^j ^ d_j F."""
    g = F.grid
    out = FormField(g)
    for key, arr in F.data.items():
        for j in range(1, g.n + 1):
            hit = _wedge_key(j, key)
            if hit is None:
                continue
            merged, sign = hit
            out._acc(merged, sign * g.deriv(arr, j - 1))
    return out


def dstar_grid(F: FormField) -> FormField:
    """Codifferential on the flat band: -sum_j i_{e_j} d_j F."""
    g = F.grid
    out = FormField(g)
    for key, arr in F.data.items():
        for j in range(1, g.n + 1):
            hit = _interior_key(j, key)
            if hit is None:
                continue
            reduced, sign = hit
            out._acc(reduced, -sign * g.deriv(arr, j - 1))
    return out


def laplacian_grid(F: FormField) -> FormField:
    """Componentwise flat Laplacian, built as the derivative stencil applied
    twice per axis (exact summation by parts transversally)."""
    g = F.grid
    out = FormField(g)
    for key, arr in F.data.items():
        total = np.zeros(g.shape, dtype=complex)
        for axis in range(g.n):
            total += g.deriv(g.deriv(arr, axis), axis)
        out._acc(key, total)
    return out


def dirac_grid(F: FormField) -> FormField:
    """D = d + d* (equivalently sum_j c(e_j) d_j)."""
    return d_grid(F) + dstar_grid(F)


def _clifford_field(vec_components, F: FormField, sign: int) -> FormField:
    """Pointwise c (sign=-1) or ct (sign=+1) by a vector field given as a
    list of n scalar arrays."""
    g = F.grid
    out = FormField(g)
    for key, arr in F.data.items():
        for j in range(1, g.n + 1):
            comp = vec_components[j - 1]
            if comp is None:
                continue
            hit = _wedge_key(j, key)
            if hit is not None:
                merged, s = hit
                out._acc(merged, s * comp * arr)
            hit = _interior_key(j, key)
            if hit is not None:
                reduced, s = hit
                out._acc(reduced, sign * s * comp * arr)
    return out


def gradient_components(g: FlatBandGrid, f: np.ndarray):
    return [g.deriv(f, axis) for axis in range(g.n)]


def D_f_grid(F: FormField, f: np.ndarray) -> FormField:
    """Twisted Dirac operator D + ct(grad f) with f sampled on the grid."""
    grads = gradient_components(F.grid, np.asarray(f, dtype=complex))
    return dirac_grid(F) + _clifford_field(grads, F, +1)


def _boundary_term_dirac(alpha: FormField, beta: FormField) -> complex:
    """Integral of <c(nu) alpha, beta> over both leaves; nu = -e_1 at rho=0
    and +e_1 at rho=L."""
    g = alpha.grid
    e1 = [None] * g.n
    e1[0] = 1.0
    c_alpha = _clifford_field(e1, alpha, -1)
    inner = c_alpha.pointwise_inner(beta)
    return g.integrate_boundary(-inner[0], inner[-1])


def green_residual_dirac(alpha: FormField, beta: FormField, f: np.ndarray | None = None) -> float:
    """| int <D_f a, b> - int <a, D_f b> - oint <c(nu) a, b> |."""
    g = alpha.grid
    if f is None:
        f = np.zeros(g.shape)
    lhs = g.integrate(D_f_grid(alpha, f).pointwise_inner(beta))
    mid = g.integrate(alpha.pointwise_inner(D_f_grid(beta, f)))
    bdry = _boundary_term_dirac(alpha, beta)
    return abs(lhs - mid - bdry)


def green_residual_laplace(alpha: FormField, beta: FormField) -> float:
    """| -int <Lap a, b> - int <grad a, grad b> + oint <d_nu a, b> |."""
    g = alpha.grid
    lhs = -g.integrate(laplacian_grid(alpha).pointwise_inner(beta))
    grad_pair = np.zeros(g.shape, dtype=complex)
    for axis in range(g.n):
        for key, arr in alpha.data.items():
            w = beta.data.get(key)
            if w is not None:
                grad_pair += g.deriv(arr, axis) * np.conj(g.deriv(w, axis))
    mid = g.integrate(grad_pair)
    normal_inner = np.zeros(g.shape, dtype=complex)
    for key, arr in alpha.data.items():
        w = beta.data.get(key)
        if w is not None:
            normal_inner += g.deriv(arr, 0) * np.conj(w)
    bdry = g.integrate_boundary(-normal_inner[0], normal_inner[-1])
    return abs(lhs - mid + bdry)


def hessian_components(g: FlatBandGrid, f: np.ndarray):
    grads = gradient_components(g, f)
    return [[g.deriv(grads[i], j) for j in range(g.n)] for i in range(g.n)]


def twisted_weitzenboeck_residual(omega: FormField, f: np.ndarray, margin: int = 2) -> float:
    """Sup-norm over interior nodes of the pointwise defect of

        <D_f^2 w, w> = -<Lap w, w> + (|grad f|^2 - Lap f) |w|^2
                       + 2 sum_ij (Hess f)_ij <i_i w, i_j w>

    (the curvature term vanishes on the flat band)."""
    g = omega.grid
    f = np.asarray(f, dtype=float)
    lhs = D_f_grid(D_f_grid(omega, f), f).pointwise_inner(omega)
    rhs = -laplacian_grid(omega).pointwise_inner(omega)
    grads = gradient_components(g, f)
    hess = hessian_components(g, f)
    grad2 = sum(np.abs(gr) ** 2 for gr in grads)
    lapf = sum(hess[i][i] for i in range(g.n))
    norm2 = omega.pointwise_inner(omega).real
    rhs = rhs + (grad2 - lapf) * norm2
    contr = []
    for i in range(1, g.n + 1):
        Fi = FormField(g)
        for key, arr in omega.data.items():
            hit = _interior_key(i, key)
            if hit is not None:
                reduced, s = hit
                Fi._acc(reduced, s * arr)
        contr.append(Fi)
    for i in range(g.n):
        for j in range(g.n):
            rhs = rhs + 2.0 * hess[i][j] * contr[i].pointwise_inner(contr[j])
    defect = np.abs(lhs - rhs)
    return float(np.max(defect[margin:-margin]))


def conjugation_residual(omega: FormField, f: np.ndarray) -> float:
    """Sup-norm defect of D_f = e^{-f} d e^{f} + e^{f} d* e^{-f} on the grid."""
    g = omega.grid
    f = np.asarray(f, dtype=float)
    ef, emf = np.exp(f), np.exp(-f)
    direct = D_f_grid(omega, f)

    def scale(F, s):
        out = FormField(g)
        out.data = {k: v * s for k, v in F.data.items()}
        return out

    conj = scale(d_grid(scale(omega, ef)), emf) + scale(dstar_grid(scale(omega, emf)), ef)
    return (direct - conj).sup_norm()


# -- pointwise boundary/trace identities --------------------------------


def chi_eigenform_boundary_identity(omega_boundary: FormElement, gradf, nu, sign: int) -> float:
    """Residual of <ct(grad f) c(nu) w, w> = sign (grad f . nu) |w|^2 for a
    chi-eigenform w with chi w = sign w."""
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    chi_w = exterior.chi_involution(nu, omega_boundary)
    defect = (chi_w - omega_boundary * float(sign)).norm()
    if defect > 1e-10 * max(1.0, omega_boundary.norm()):
        raise ValueError(f"form is not a chi-eigenform for sign {sign}: defect {defect:.2e}")
    lhs = exterior.inner(
        exterior.clifford_ct(gradf, exterior.clifford_c(nu, omega_boundary)), omega_boundary
    )
    rhs = sign * float(np.dot(np.asarray(gradf), np.asarray(nu))) * omega_boundary.norm2()
    return abs(lhs - rhs)


def contraction_trace_identity(H, omega: FormElement) -> float:
    """Residual of sum_ij H_ij (<i_i w, i_j w> + <theta^i ^ w, theta^j ^ w>)
    = trace(H) |w|^2; exact linear algebra, any degree."""
    H = np.asarray(H, dtype=float)
    n = omega.n
    if H.shape != (n, n):
        raise ValueError(f"H must be {n} x {n}")
    eye = np.eye(n)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if H[i, j] == 0:
                continue
            ii = exterior.inner(exterior.interior(eye[i], omega), exterior.interior(eye[j], omega))
            ww = exterior.inner(
                exterior.wedge(exterior.basis_form(n, i + 1), omega),
                exterior.wedge(exterior.basis_form(n, j + 1), omega),
            )
            total += H[i, j] * (ii + ww)
    return abs(total - np.trace(H) * omega.norm2())


# -- field constructors --------------------------------------------------


def trig_field(grid: FlatBandGrid, spec) -> FormField:
    """Build a form field from a trig-polynomial spec.

    spec: list of terms {"index": [..], "coef": [re, im], "factors":
    [{"axis": a, "kind": "sin"|"cos"|"const", "freq": k, "phase": p}, ...]}.
    Radial factors (axis 0) use frequency k as sin/cos(pi k x / L + phase);
    transverse axes use sin/cos(2 pi k y + phase) with integer k.
    """
    coords = grid.axes()
    out = FormField(grid)
    for term in spec:
        coef = term.get("coef", [1.0, 0.0])
        val = complex(coef[0], coef[1] if len(coef) > 1 else 0.0) * np.ones(grid.shape, dtype=complex)
        for fac in term.get("factors", []):
            axis = int(fac["axis"])
            kind = fac.get("kind", "sin")
            freq = float(fac.get("freq", 1))
            phase = float(fac.get("phase", 0.0))
            if axis == 0:
                arg = math.pi * freq * coords[0] / grid.L + phase
            else:
                arg = 2.0 * math.pi * freq * coords[axis] + phase
            if kind == "sin":
                val = val * np.sin(arg)
            elif kind == "cos":
                val = val * np.cos(arg)
            elif kind == "const":
                pass
            else:
                raise ValueError(f"unknown factor kind {kind!r}")
        out._acc(tuple(term["index"]), val)
    return out


def random_field(grid: FlatBandGrid, degree: int, rng, radial: bool = True, terms: int = 2) -> FormField:
    """Random smooth trig field of the given degree."""
    spec = []
    for key in combinations(range(1, grid.n + 1), degree):
        for _ in range(terms):
            factors = []
            if radial:
                factors.append(
                    {"axis": 0, "kind": rng.choice(["sin", "cos"]), "freq": int(rng.integers(1, 3)),
                     "phase": float(rng.uniform(0, 2 * math.pi))}
                )
            for axis in range(1, grid.n):
                if rng.random() < 0.5:
                    factors.append(
                        {"axis": axis, "kind": rng.choice(["sin", "cos"]),
                         "freq": int(rng.integers(1, 3)), "phase": float(rng.uniform(0, 2 * math.pi))}
                    )
            spec.append(
                {"index": list(key),
                 "coef": [float(rng.standard_normal()), float(rng.standard_normal())],
                 "factors": factors}
            )
    return trig_field(grid, spec)


def _paired_spec(g: FlatBandGrid, rng, degree: int, transverse: dict) -> list:
    spec = []
    for key in combinations(range(1, g.n + 1), degree):
        spec.append(
            {
                "index": list(key),
                "coef": [float(rng.standard_normal()), float(rng.standard_normal())],
                "factors": [
                    {
                        "axis": 0,
                        "kind": "sin",
                        "freq": float(rng.uniform(0.5, 2.0)),
                        "phase": float(rng.uniform(0, 2 * math.pi)),
                    },
                    dict(transverse),
                ],
            }
        )
    return spec


def paired_test_fields(grid: FlatBandGrid, rng, kind: str):
    """Field pairs for the convergence studies.

    Components share one transverse factor so the pairings do not integrate
    to zero over the torus directions, and the paired degrees are adjacent
    for the Dirac identity (equal for the Laplace one).  Twists are radial:
    a transversally varying twist would leave an O(h_t^2) floor under pure
    radial refinement.
    """
    tf = {"axis": 1, "kind": "cos", "freq": 1, "phase": 0.3}
    if kind == "dirac":
        alpha = trig_field(grid, _paired_spec(grid, rng, 2, tf))
        beta = trig_field(grid, _paired_spec(grid, rng, 1, tf) + _paired_spec(grid, rng, 3, tf))
        return alpha, beta
    if kind == "laplace":
        return (
            trig_field(grid, _paired_spec(grid, rng, 2, tf)),
            trig_field(grid, _paired_spec(grid, rng, 2, tf)),
        )
    if kind == "weitzenboeck":
        omega = trig_field(grid, _paired_spec(grid, rng, 2, tf))
        X = grid.axes()
        f = 0.4 * np.sin(math.pi * X[0] / grid.L) + 0.2 * (X[0] / grid.L) ** 2
        return omega, f
    raise ValueError(f"unknown study kind {kind!r}")


def convergence_order(residuals, hs) -> list[float]:
    """Observed orders log(r_i/r_{i+1}) / log(h_i/h_{i+1})."""
    out = []
    for (r1, h1), (r2, h2) in zip(zip(residuals, hs), zip(residuals[1:], hs[1:])):
        out.append(math.log(r1 / r2) / math.log(h1 / h2))
    return out


def convergence_study(kind: str, N_rs, n: int = 4, N_t: int = 6, L: float = 2.0,
                      seed: int = 0, draws: int = 6):
    """Residuals of one identity across radial refinements, aggregated over
    several field draws (a single draw's h^2 coefficient can be small enough
    to bias the measured order).  Returns (residuals, hs, orders)."""
    residuals, hs = [], []
    for N in N_rs:
        grid = FlatBandGrid(n, L, int(N), N_t)
        total = 0.0
        for s in range(draws):
            rng = np.random.default_rng(seed + 101 * s)
            if kind == "weitzenboeck":
                omega, f = paired_test_fields(grid, rng, kind)
                total += twisted_weitzenboeck_residual(omega, f)
            elif kind == "dirac":
                alpha, beta = paired_test_fields(grid, rng, kind)
                total += green_residual_dirac(alpha, beta)
            elif kind == "laplace":
                alpha, beta = paired_test_fields(grid, rng, kind)
                total += green_residual_laplace(alpha, beta)
            else:
                raise ValueError(f"unknown study kind {kind!r}")
        residuals.append(total / draws)
        hs.append(grid.h)
    return residuals, hs, convergence_order(residuals, hs)


def load_grid_config(doc) -> tuple[FlatBandGrid, list[FormField]]:
    """Grid config JSON: {"n", "L", "N_r", "N_t", "fields": [spec, ...]}."""
    grid = FlatBandGrid(int(doc["n"]), float(doc["L"]), int(doc["N_r"]), int(doc["N_t"]))
    fields = [trig_field(grid, spec) for spec in doc.get("fields", [])]
    return grid, fields
