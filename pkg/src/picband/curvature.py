"""Algebraic curvature tensors, isotropic-curvature frame search, and the
curvature operator on two-forms.

Sign conventions, fixed once for the whole package:

* ``R[i,j,i,j]`` is the sectional curvature of span(e_i, e_j); it is +1 on
  the unit round sphere.
* ``ricci(R)[a,b] = sum_l R[a,l,b,l]``, so the round metric in dimension n
  has Ricci = (n-1) I.
* The Kulkarni-Nomizu product is
  ``(h o^ k)_{ijkl} = h_ik k_jl + h_jl k_ik - h_il k_jk - h_jk k_il``,
  normalised so that (1/8) sigma g o^ g has isotropic curvature exactly
  sigma on every orthonormal four-frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import exterior
from .exterior import FormElement, degree_basis

__all__ = [
    "CurvTensor",
    "Frame4",
    "SearchConfig",
    "PicVerdict",
    "WeitzOperator",
    "kulkarni_nomizu",
    "constant_curvature",
    "iso_curvature",
    "iso_curvature_batch",
    "min_isotropic",
    "is_sigma_pic",
    "weitzenboeck_on_two_forms",
    "weitzenboeck_clifford_trace",
    "weitzenboeck_lower_bound_check",
    "ricci",
    "ricci_floor_lambda",
    "scalar",
    "sectional",
    "random_curvature",
    "random_pic_combination",
    "load_curvature_json",
    "curvature_to_json",
]

BIANCHI_TOL = 1e-10


class CurvTensor:
    """Dense algebraic curvature tensor on R^n.

    Storage is the full n^4 component array.  The pair (anti)symmetries are
    required exactly; the first Bianchi identity is validated to 1e-10 but
    not enforced by the storage.
    """

    __slots__ = ("n", "R")

    def __init__(self, components, validate: bool = True):
        R = np.asarray(components, dtype=float)
        if R.ndim != 4 or len(set(R.shape)) != 1:
            raise ValueError(f"curvature components must be n^4, got shape {R.shape}")
        self.n = R.shape[0]
        self.R = R
        if validate:
            self.validate()

    def validate(self):
        R = self.R
        if not np.array_equal(R, -np.swapaxes(R, 0, 1)):
            raise ValueError("antisymmetry in the first index pair fails")
        if not np.array_equal(R, -np.swapaxes(R, 2, 3)):
            raise ValueError("antisymmetry in the second index pair fails")
        if not np.array_equal(R, np.transpose(R, (2, 3, 0, 1))):
            raise ValueError("pair-interchange symmetry fails")
        bianchi = R + np.transpose(R, (1, 2, 0, 3)) + np.transpose(R, (2, 0, 1, 3))
        defect = float(np.max(np.abs(bianchi)))
        if defect > BIANCHI_TOL:
            raise ValueError(f"first Bianchi identity violated by {defect:.3e}")

    def bianchi_defect(self) -> float:
        R = self.R
        return float(np.max(np.abs(R + np.transpose(R, (1, 2, 0, 3)) + np.transpose(R, (2, 0, 1, 3)))))

    def __add__(self, other: "CurvTensor") -> "CurvTensor":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        return CurvTensor(self.R + other.R, validate=False)

    def __mul__(self, s) -> "CurvTensor":
        return CurvTensor(self.R * float(s), validate=False)

    __rmul__ = __mul__


def kulkarni_nomizu(h, k) -> CurvTensor:
    """Kulkarni-Nomizu product of two symmetric bilinear forms."""
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    if h.shape != k.shape or h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"incompatible shapes {h.shape} and {k.shape}")
    if not np.array_equal(h, h.T) or not np.array_equal(k, k.T):
        raise ValueError("Kulkarni-Nomizu factors must be symmetric")
    # Assemble as U - swap01(U), then pair-symmetrise: each required symmetry
    # then holds bit-exactly, not just up to rounding.
    U = np.einsum("ik,jl->ijkl", h, k) - np.einsum("il,jk->ijkl", h, k)
    R = U - np.swapaxes(U, 0, 1)
    R = 0.5 * (R + np.transpose(R, (2, 3, 0, 1)))
    return CurvTensor(R)


def constant_curvature(n: int, kappa: float = 1.0) -> CurvTensor:
    """Sectional curvature kappa everywhere: (kappa/2) g o^ g."""
    return kulkarni_nomizu(np.eye(n), np.eye(n)) * (0.5 * kappa)


class Frame4:
    """Four orthonormal vectors in R^n, stored as a 4 x n matrix of rows."""

    __slots__ = ("n", "vectors")

    def __init__(self, vectors, tol: float = 1e-10):
        X = np.asarray(vectors, dtype=float)
        if X.ndim != 2 or X.shape[0] != 4:
            raise ValueError(f"frame must be 4 x n, got {X.shape}")
        self.n = X.shape[1]
        if self.n < 4:
            raise ValueError("ambient dimension must be at least 4")
        defect = float(np.max(np.abs(X @ X.T - np.eye(4))))
        if defect > tol:
            raise ValueError(f"frame is not orthonormal, Gram defect {defect:.3e}")
        self.vectors = X

    @staticmethod
    def standard(n: int) -> "Frame4":
        return Frame4(np.eye(n)[:4])


def _gram_defect(X) -> float:
    return float(np.max(np.abs(X @ X.T - np.eye(4))))


def iso_curvature(R: CurvTensor, frame) -> float:
    """R_1313 + R_1414 + R_2323 + R_2424 - 2 R_1234 on an orthonormal frame."""
    X = frame.vectors if isinstance(frame, Frame4) else np.asarray(frame, dtype=float)
    if _gram_defect(X) > 1e-8:
        raise ValueError("frame is not orthonormal within 1e-8")
    return float(_iso_batch(R.R, X[None])[0])


def iso_curvature_batch(R: CurvTensor, frames: np.ndarray) -> np.ndarray:
    """Vectorised isotropic curvature over a batch of frames (B, 4, n)."""
    return _iso_batch(R.R, np.asarray(frames, dtype=float))


_ISO_TERMS = (  # (slot indices into the frame, weight)
    ((0, 2, 0, 2), 1.0),
    ((0, 3, 0, 3), 1.0),
    ((1, 2, 1, 2), 1.0),
    ((1, 3, 1, 3), 1.0),
    ((0, 1, 2, 3), -2.0),
)


def _pullback_chain(R: np.ndarray, X: np.ndarray):
    """Progressive frame pullbacks of R; two-operand contractions only.

    A1[B,a,jkl] = R(x_a, ., ., .), A2[B,a,b,kl] = R(x_a, x_b, ., .),
    A3[B,a,b,c,l] = R(x_a, x_b, x_c, .), T[B,a,b,c,d] fully contracted.
    """
    A1 = np.einsum("Bai,ijkl->Bajkl", X, R, optimize=False)
    A2 = np.einsum("Bbj,Bajkl->Babkl", X, A1, optimize=False)
    A3 = np.einsum("Bck,Babkl->Babcl", X, A2, optimize=False)
    T = np.einsum("Bdl,Babcl->Babcd", X, A3, optimize=False)
    return A1, A2, A3, T


def _iso_batch(R: np.ndarray, X: np.ndarray) -> np.ndarray:
    T = _pullback_chain(R, X)[3]
    out = np.zeros(X.shape[0])
    for (a, b, c, d), w in _ISO_TERMS:
        out += w * T[:, a, b, c, d]
    return out


def _iso_grad_batch(R: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Euclidean gradient of the isotropic curvature with respect to the
    frame rows, assembled from one-slot-open pullbacks."""
    A1, A2, A3, _ = _pullback_chain(R, X)
    # S1[B,b,c,d,i] = R(., x_b, x_c, x_d) etc.
    C1 = np.einsum("Bbj,ijkl->Bbikl", X, R, optimize=False)
    C2 = np.einsum("Bck,Bbikl->Bbcil", X, C1, optimize=False)
    S1 = np.einsum("Bdl,Bbcil->Bbcdi", X, C2, optimize=False)
    B1 = np.einsum("Bck,Bajkl->Bacjl", X, A1, optimize=False)
    S2 = np.einsum("Bdl,Bacjl->Bacdj", X, B1, optimize=False)
    S3 = np.einsum("Bdl,Babkl->Babdk", X, A2, optimize=False)
    G = np.zeros_like(X)
    for (a, b, c, d), w in _ISO_TERMS:
        G[:, a] += w * S1[:, b, c, d]
        G[:, b] += w * S2[:, a, c, d]
        G[:, c] += w * S3[:, a, b, d]
        G[:, d] += w * A3[:, a, b, c]
    return G


def _retract(Y: np.ndarray) -> np.ndarray:
    """Batched QR retraction onto orthonormal 4-frames, sign-fixed for determinism."""
    Q, Rm = np.linalg.qr(np.swapaxes(Y, 1, 2))
    diag = np.einsum("Bii->Bi", Rm)
    signs = np.where(diag < 0, -1.0, 1.0)
    return np.swapaxes(Q * signs[:, None, :], 1, 2)


@dataclass(frozen=True)
class SearchConfig:
    """Settings for the stochastic frame search over orthonormal 4-frames."""

    restarts: int = 512
    seed: int = 0
    max_iter: int = 400
    grad_tol: float = 1e-10
    step0: float = 0.1
    tolerance: float = 1e-9


def min_isotropic(R: CurvTensor, cfg: SearchConfig = SearchConfig()):
    """Best local minimum of the isotropic curvature found by projected
    gradient descent from ``cfg.restarts`` random orthonormal starts.

    Returns ``(value, argmin_frame)``.  Deterministic given ``cfg.seed``;
    the reported value is the minimum over every frame evaluated during
    the search, reduced in (value, restart index) order.
    """
    n = R.n
    if n < 4:
        raise ValueError("isotropic curvature needs ambient dimension >= 4")
    rng = np.random.default_rng(cfg.seed)
    B = cfg.restarts
    X = _retract(rng.standard_normal((B, 4, n)))
    vals = _iso_batch(R.R, X)
    best_vals = vals.copy()
    best_X = X.copy()
    step = np.full(B, cfg.step0)
    active = np.ones(B, dtype=bool)

    for _ in range(cfg.max_iter):
        if not active.any():
            break
        G = _iso_grad_batch(R.R, X)
        # tangent projection for row-orthonormal X: G - sym(G X^T) X
        M = np.einsum("Bij,Bkj->Bik", G, X)
        sym = 0.5 * (M + np.swapaxes(M, 1, 2))
        Gt = G - np.einsum("Bik,Bkj->Bij", sym, X)
        gnorm2 = np.einsum("Bij,Bij->B", Gt, Gt)
        active &= gnorm2 > cfg.grad_tol**2
        if not active.any():
            break
        Y = _retract(X - step[:, None, None] * Gt)
        vY = _iso_batch(R.R, Y)
        accept = active & (vY <= vals - 1e-4 * step * gnorm2)
        X[accept] = Y[accept]
        vals[accept] = vY[accept]
        step[accept] = np.minimum(step[accept] * 1.5, 1.0)
        reject = active & ~accept
        step[reject] *= 0.5
        active &= step > 1e-14
        upd = vY < best_vals  # track every evaluated frame, accepted or not
        best_vals[upd] = vY[upd]
        best_X[upd] = Y[upd]

    order = np.lexsort((np.arange(B), best_vals))
    k = order[0]
    return float(best_vals[k]), Frame4(_retract(best_X[k][None])[0])


@dataclass
class PicVerdict:
    """Outcome of a sigma-PIC membership test (stochastic, non-certified)."""

    passed: bool
    sigma: float
    min_found: float
    witness: Frame4 | None
    restarts: int
    tolerance: float

    def __bool__(self):
        return self.passed


def is_sigma_pic(R: CurvTensor, sigma: float, cfg: SearchConfig = SearchConfig()) -> PicVerdict:
    """Test whether the isotropic curvature stays >= sigma over all frames.

    FAIL comes with a concrete counter-frame; PASS is stochastic evidence
    (the search effort is recorded in the verdict).
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    value, frame = min_isotropic(R, cfg)
    if value < sigma - cfg.tolerance:
        return PicVerdict(False, sigma, value, frame, cfg.restarts, cfg.tolerance)
    return PicVerdict(True, sigma, value, None, cfg.restarts, cfg.tolerance)


# -- traces -----------------------------------------------------------


def ricci(R: CurvTensor) -> np.ndarray:
    return np.einsum("albl->ab", R.R)


def scalar(R: CurvTensor) -> float:
    return float(np.einsum("alal->", R.R))


def sectional(R: CurvTensor, i: int, j: int) -> float:
    """Sectional curvature of span(e_i, e_j), indices 1-based."""
    if not (1 <= i <= R.n and 1 <= j <= R.n) or i == j:
        raise ValueError(f"invalid index pair ({i}, {j}) for n = {R.n}")
    return float(R.R[i - 1, j - 1, i - 1, j - 1])


def ricci_floor_lambda(R: CurvTensor) -> float:
    """sqrt(max(-lambda_min(Ric) / (n - 1), 0)): the Ricci-floor scale the
    bandwidth margin check consumes as Lambda."""
    lam_min = float(np.linalg.eigvalsh(0.5 * (ricci(R) + ricci(R).T))[0])
    return math.sqrt(max(-lam_min / (R.n - 1), 0.0))


# -- curvature operator on two-forms ----------------------------------


class WeitzOperator:
    """Hermitian curvature operator on the ordered two-form basis."""

    __slots__ = ("n", "matrix")

    def __init__(self, n: int, matrix, tol: float = 1e-12):
        M = np.asarray(matrix)
        dim = len(degree_basis(n, 2))
        if M.shape != (dim, dim):
            raise ValueError(f"operator must be {dim} x {dim} for n = {n}")
        scale = max(1.0, float(np.max(np.abs(M))))
        if float(np.max(np.abs(M - M.conj().T))) > tol * scale:
            raise ValueError("curvature operator is not Hermitian within tolerance")
        self.n = n
        self.matrix = M

    def eigenvalues(self) -> np.ndarray:
        H = 0.5 * (self.matrix + self.matrix.conj().T)
        return np.linalg.eigvalsh(H)

    def lambda_min(self) -> float:
        return float(self.eigenvalues()[0])


def weitzenboeck_on_two_forms(R: CurvTensor) -> WeitzOperator:
    """Curvature term of the form Laplacian restricted to two-forms.

    The action on a basis two-form theta^i ^ theta^j is
    Ric_ki theta^k ^ theta^j - Ric_kj theta^k ^ theta^i
    - 2 R_ikjl theta^k ^ theta^l, re-expanded in the ordered basis.
    """
    n = R.n
    basis = degree_basis(n, 2)
    pos = {key: t for t, key in enumerate(basis)}
    ric = ricci(R)
    dim = len(basis)
    M = np.zeros((dim, dim))

    def add(k, l, col, w):
        # accumulate w * theta^k ^ theta^l (0-based k, l) into column col
        if k == l:
            return
        if k < l:
            M[pos[(k + 1, l + 1)], col] += w
        else:
            M[pos[(l + 1, k + 1)], col] -= w

    for col, (i1, j1) in enumerate(basis):
        i, j = i1 - 1, j1 - 1
        for k in range(n):
            add(k, j, col, ric[k, i])
            add(k, i, col, -ric[k, j])
            for l in range(n):
                add(k, l, col, -2.0 * R.R[i, k, j, l])
    return WeitzOperator(n, M)


def curvature_action_two_form(R: CurvTensor, i: int, j: int, omega: FormElement) -> FormElement:
    """R(e_i, e_j) acting on a two-form (indices 0-based).

    The action on the basis is R(e_i,e_j)(theta^k ^ theta^l) =
    R_ijpk theta^p ^ theta^l + R_ijpl theta^k ^ theta^p.
    """
    n = R.n
    out = FormElement(n)
    acc = out.coeffs
    for (k1, l1), v in omega.coeffs.items():
        k, l = k1 - 1, l1 - 1
        for p in range(n):
            w = R.R[i, j, p, k] * v
            if w != 0:
                key, sign = exterior._sort_with_sign((p + 1, l1))
                if sign:
                    acc[key] = acc.get(key, 0.0) + w * sign
            w = R.R[i, j, p, l] * v
            if w != 0:
                key, sign = exterior._sort_with_sign((k1, p + 1))
                if sign:
                    acc[key] = acc.get(key, 0.0) + w * sign
    out.coeffs = {k: v for k, v in acc.items() if v != 0}
    return out


def weitzenboeck_clifford_trace(R: CurvTensor) -> np.ndarray:
    """Independent route to the two-form curvature operator through the
    Clifford trace (1/2) sum_{i,j} c(e_i) c(e_j) R(e_i, e_j).

    Built entirely from exterior-algebra primitives; used to cross-check
    :func:`weitzenboeck_on_two_forms`.
    """
    n = R.n
    basis = degree_basis(n, 2)
    dim = len(basis)
    M = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(n)
    for col, key in enumerate(basis):
        omega = FormElement(n, {key: 1.0})
        total = FormElement(n)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                term = curvature_action_two_form(R, i, j, omega)
                if not term.coeffs:
                    continue
                term = exterior.clifford_c(eye[j], term)
                term = exterior.clifford_c(eye[i], term)
                total = total + term
        # degree-0/4 components cancel via the Bianchi identity; drop the
        # float residue and keep the Lambda^2 block the formula refers to
        M[:, col] = exterior.form_to_vec(exterior.degree_part(total * 0.5, 2), 2)
    return M


@dataclass
class WeitzBoundReport:
    """Weitzenboeck eigenvalue bound check against a sigma-PIC lower bound."""

    n: int
    sigma: float
    lambda_min: float
    bound: float
    margin: float
    pic_verdict: PicVerdict
    passed: bool
    asserted: bool  # False when the sigma-PIC precondition already failed


def weitzenboeck_lower_bound_check(
    R: CurvTensor, sigma: float, cfg: SearchConfig = SearchConfig()
) -> WeitzBoundReport:
    """Check lambda_min of the two-form curvature operator against
    (n-2) sigma / 2, conditional on the sigma-PIC precondition."""
    if R.n % 2 != 0 or R.n < 4:
        raise ValueError("the eigenvalue bound is asserted for even n >= 4 only")
    verdict = is_sigma_pic(R, sigma, cfg) if sigma >= 0 else PicVerdict(
        False, sigma, min_isotropic(R, cfg)[0], None, cfg.restarts, cfg.tolerance
    )
    op = weitzenboeck_on_two_forms(R)
    lam = op.lambda_min()
    bound = 0.5 * (R.n - 2) * sigma
    margin = lam - bound
    if not verdict.passed:
        return WeitzBoundReport(R.n, sigma, lam, bound, margin, verdict, False, asserted=False)
    return WeitzBoundReport(R.n, sigma, lam, bound, margin, verdict, margin >= -1e-9, asserted=True)


# -- generators and serialisation -------------------------------------


def random_curvature(n: int, rng, terms: int = 6, scale: float = 1.0) -> CurvTensor:
    """Random algebraic curvature tensor as a signed sum of Kulkarni-Nomizu
    squares of random symmetric matrices (these span the curvature space)."""
    total = np.zeros((n, n, n, n))
    for _ in range(terms):
        A = rng.standard_normal((n, n))
        h = 0.5 * (A + A.T)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        total += sign * kulkarni_nomizu(h, h).R
    out = CurvTensor(total * (scale / terms))
    return out


def random_pic_combination(n: int, rng, terms: int = 4) -> CurvTensor:
    """Nonnegative combination of KN squares of positive definite matrices."""
    total = np.zeros((n, n, n, n))
    for _ in range(terms):
        A = rng.standard_normal((n, n))
        h = A @ A.T + 0.1 * np.eye(n)
        total += rng.random() * kulkarni_nomizu(h, h).R
    return CurvTensor(total / terms)


_SLOT_PERMS = (  # index permutations generating the full symmetry orbit
    ((0, 1, 2, 3), 1.0),
    ((1, 0, 2, 3), -1.0),
    ((0, 1, 3, 2), -1.0),
    ((1, 0, 3, 2), 1.0),
    ((2, 3, 0, 1), 1.0),
    ((3, 2, 0, 1), -1.0),
    ((2, 3, 1, 0), -1.0),
    ((3, 2, 1, 0), 1.0),
)


def load_curvature_json(doc) -> CurvTensor:
    """Build a tensor from ``{"n": n, "components": [{i,j,k,l,v}, ...]}``.

    Indices are 1-based and may list any generating set; the loader
    completes the orbit under the pair (anti)symmetries and rejects entries
    that disagree by more than 1e-10.
    """
    n = int(doc["n"])
    R = np.zeros((n, n, n, n))
    seen = np.zeros((n, n, n, n), dtype=bool)
    for entry in doc["components"]:
        i, j, k, l = (int(entry[key]) - 1 for key in ("i", "j", "k", "l"))
        v = float(entry["v"])
        if not all(0 <= t < n for t in (i, j, k, l)):
            raise ValueError(f"component index out of range: {entry}")
        for perm, sign in _SLOT_PERMS:
            idx = tuple((i, j, k, l)[p] for p in perm)
            val = sign * v
            if seen[idx] and abs(R[idx] - val) > 1e-10:
                raise ValueError(f"inconsistent components at {idx}: {R[idx]} vs {val}")
            R[idx] = val
            seen[idx] = True
    return CurvTensor(R)


def curvature_to_json(R: CurvTensor) -> dict:
    """Serialise the generating set {i<j, k<l, (i,j) <= (k,l)} of a tensor."""
    comps = []
    n = R.n
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                for l in range(k + 1, n):
                    if (k, l) < (i, j):
                        continue
                    v = R.R[i, j, k, l]
                    if v != 0:
                        comps.append({"i": i + 1, "j": j + 1, "k": k + 1, "l": l + 1, "v": float(v)})
    return {"n": n, "components": comps}
