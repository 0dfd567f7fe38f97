"""Digital net construction.

Covers generic nets from generating matrices, the binomial-coefficient
construction with simultaneously large minimum Hamming and NRT metrics, digit
interlacing of generating matrices, and the composite construction that
interlaces the binomial-formula net to obtain higher-order nets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import GuardError, InputError
from .ff import FieldMatrix, PrimeBase, binom_mod_p, mat_vec_mul

CHEN_SKRIGANOV = "ChenSkriganov"
INTERLACED = "Interlaced"
CUSTOM = "Custom"


@dataclass(frozen=True)
class NetPoint:
    """A net point as exact base-b digit arrays of length n per coordinate.

    Digit i of a coordinate is the coefficient of b^-(i+1); the exact value
    is sum_i digit[i] * b^-(i+1) in [0, 1).
    """

    base: PrimeBase
    coordinates: tuple

    def to_floats(self) -> tuple:
        """Binary floating point values (rounds to nearest; lossy)."""
        b = self.base.b
        out = []
        for coord in self.coordinates:
            x = 0.0
            for i in range(len(coord) - 1, -1, -1):
                x = (x + coord[i]) / b
            out.append(x)
        return tuple(out)

    def to_fractions(self) -> tuple:
        """Exact rational values numerator / b^n."""
        b = self.base.b
        out = []
        for coord in self.coordinates:
            num = 0
            for d in coord:
                num = num * b + d
            out.append(Fraction(num, b ** len(coord)))
        return tuple(out)


@dataclass(frozen=True)
class DigitalNet:
    """A digital net over F_b given by s generating matrices of shape n x m."""

    base: PrimeBase
    s: int
    m: int
    n: int
    matrices: tuple
    provenance: str = CUSTOM

    def __post_init__(self):
        if self.s < 1 or self.m < 1 or self.n < 1:
            raise InputError("net dimensions must be positive")
        if len(self.matrices) != self.s:
            raise InputError("matrix count must equal the dimension s")
        for mat in self.matrices:
            if mat.base != self.base:
                raise InputError("all generating matrices must share the net base")
            if mat.n_rows != self.n or mat.n_cols != self.m:
                raise InputError(
                    f"generating matrix shape {mat.n_rows}x{mat.n_cols} "
                    f"differs from declared {self.n}x{self.m}"
                )

    @property
    def num_points(self) -> int:
        return self.base.b ** self.m

    def index_digits(self, h: int) -> tuple:
        b = self.base.b
        return tuple((h // b**i) % b for i in range(self.m))

    def generate_point(self, h: int) -> NetPoint:
        """The h-th point of the net, 0 <= h < b^m."""
        if not 0 <= h < self.num_points:
            raise InputError(f"point index {h} outside [0, {self.num_points})")
        eta = self.index_digits(h)
        coords = tuple(mat_vec_mul(mat, eta) for mat in self.matrices)
        return NetPoint(self.base, coords)

    def points(self):
        """Full sweep over all b^m points, in index order."""
        for h in range(self.num_points):
            yield self.generate_point(h)

    def points_array(self) -> np.ndarray:
        """All points as a float array of shape (b^m, s) (lossy rounding)."""
        b = self.base.b
        N = self.num_points
        h = np.arange(N, dtype=np.int64)
        eta = np.stack([(h // b**i) % b for i in range(self.m)])  # (m, N)
        weights = np.array([float(b) ** -(i + 1) for i in range(self.n)])
        out = np.empty((N, self.s))
        for j, mat in enumerate(self.matrices):
            C = np.array(mat.entries, dtype=np.int64)
            xi = C.dot(eta) % b  # (n, N)
            out[:, j] = weights.dot(xi)
        return out

    def to_json(self) -> dict:
        return {
            "b": self.base.b,
            "s": self.s,
            "m": self.m,
            "n": self.n,
            "provenance": self.provenance,
            "matrices": [mat.to_json() for mat in self.matrices],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DigitalNet":
        base = PrimeBase(data["b"])
        matrices = tuple(FieldMatrix.from_json(m) for m in data["matrices"])
        return cls(
            base,
            data["s"],
            data["m"],
            data["n"],
            matrices,
            data.get("provenance", CUSTOM),
        )


def default_betas(base: PrimeBase, count: int) -> tuple:
    """Deterministic default beta elements: 0, 1, 2, ... in (j, l) order."""
    if count > base.b:
        raise InputError(
            f"need {count} distinct elements but F_{base.b} has only {base.b}"
        )
    return tuple(range(count))


def chen_skriganov(
    base: PrimeBase,
    dims: int,
    g: int,
    w: int,
    betas=None,
    strict: bool = True,
) -> DigitalNet:
    """Binomial-coefficient digital net with square gw x gw matrices.

    Entry formula: row (l-1)w + i, column v of matrix j is
    C(v-1, i-1) * beta_{j,l}^(v-i) mod b, with C(a, c) = 0 for a < c and
    0^0 = 1.  For g = 1 this reduces to the Faure-type construction.

    Args:
        base: prime base b.
        dims: number of dimensions (the target s, or beta*s before
            interlacing).
        g, w: construction parameters; the net has b^(gw) points.
        betas: g*dims pairwise distinct field elements, indexed in (j, l)
            order; defaults to 0, 1, 2, ...
        strict: enforce b >= g*dims.
    """
    if dims < 1 or g < 1 or w < 1:
        raise InputError("dims, g, w must be positive")
    b = base.b
    if strict and b < g * dims:
        raise InputError(f"strict mode requires b >= g*dims = {g * dims}, got b = {b}")
    if betas is None:
        betas = default_betas(base, g * dims)
    betas = tuple(int(x) for x in betas)
    if len(betas) != g * dims:
        raise InputError(f"expected {g * dims} beta elements, got {len(betas)}")
    if any(not 0 <= x < b for x in betas):
        raise InputError("beta elements must lie in {0, ..., b-1}")
    if len(set(betas)) != len(betas):
        raise InputError("beta elements must be pairwise distinct")

    gw = g * w
    # binomials C(v-1, i-1) mod b shared across matrices
    binom = [[binom_mod_p(v - 1, i - 1, base) for v in range(1, gw + 1)]
             for i in range(1, gw + 1)]
    matrices = []
    for j in range(1, dims + 1):
        rows = [[0] * gw for _ in range(gw)]
        for l in range(1, g + 1):
            beta_jl = betas[(j - 1) * g + (l - 1)]
            for i in range(1, w + 1):
                u = (l - 1) * w + i
                row = rows[u - 1]
                for v in range(1, gw + 1):
                    if v < i:
                        continue
                    if v == i:
                        power = 1  # 0^0 = 1 convention
                    elif beta_jl == 0:
                        power = 0
                    else:
                        power = pow(beta_jl, v - i, b)
                    row[v - 1] = binom[i - 1][v - 1] * power % b
        matrices.append(FieldMatrix.from_rows(rows, base))
    return DigitalNet(base, dims, gw, gw, tuple(matrices), CHEN_SKRIGANOV)


def interlace_net(q: DigitalNet, beta: int) -> DigitalNet:
    """Digit interlacing of generating matrices.

    Row beta*(h-1) + i of the j-th output matrix is row h of input matrix
    beta*(j-1) + i.  The result has s = q.s/beta, m = q.m, n = beta*q.n.
    """
    if beta < 1:
        raise InputError("beta must be >= 1")
    if q.s % beta:
        raise InputError(f"dimension {q.s} not divisible by beta = {beta}")
    s = q.s // beta
    matrices = []
    for j in range(1, s + 1):
        rows = []
        for h in range(1, q.n + 1):
            for i in range(1, beta + 1):
                rows.append(q.matrices[beta * (j - 1) + i - 1].row(h - 1))
        matrices.append(FieldMatrix.from_rows(rows, q.base))
    provenance = INTERLACED if beta > 1 else q.provenance
    return DigitalNet(q.base, s, q.m, beta * q.n, tuple(matrices), provenance)


@dataclass(frozen=True)
class ConstructionParams:
    """Parameters (s, alpha, beta, g, w, b) of the composite construction.

    In strict mode the full parameter constraints are enforced:
    beta >= 2*alpha, g >= 2*alpha*s, g >= floor(s*(beta-1)/2), b >= beta*g*s
    and alpha >= 2.  Relaxed parameters still define a valid digital net;
    only the convergence guarantee is void.
    """

    s: int
    alpha: int
    beta: int
    g: int
    w: int
    base: PrimeBase
    betas: tuple = None
    strict: bool = True

    def __post_init__(self):
        if min(self.s, self.alpha, self.beta, self.g, self.w) < 1:
            raise InputError("all construction parameters must be positive")
        betas = self.betas
        if betas is None:
            betas = default_betas(self.base, self.beta * self.g * self.s)
        betas = tuple(int(x) for x in betas)
        object.__setattr__(self, "betas", betas)
        b = self.base.b
        need = self.beta * self.g * self.s
        if len(betas) != need:
            raise InputError(f"expected {need} beta elements, got {len(betas)}")
        if any(not 0 <= x < b for x in betas):
            raise InputError("beta elements must lie in {0, ..., b-1}")
        if len(set(betas)) != len(betas):
            raise InputError("beta elements must be pairwise distinct")
        if self.strict:
            for name, ok in self.constraints().items():
                if not ok:
                    raise InputError(f"strict-mode constraint violated: {name}")

    def constraints(self) -> dict:
        """Each named rate-guarantee constraint and whether it holds."""
        s, alpha, beta, g, b = self.s, self.alpha, self.beta, self.g, self.base.b
        return {
            "alpha >= 2": alpha >= 2,
            "beta >= 2*alpha": beta >= 2 * alpha,
            "g >= 2*alpha*s": g >= 2 * alpha * s,
            "g >= floor(s*(beta-1)/2)": g >= (s * (beta - 1)) // 2,
            "b >= beta*g*s prime": b >= beta * g * s,
        }

    @property
    def num_points(self) -> int:
        return self.base.b ** (self.g * self.w)


def construct_optimal_net(
    params: ConstructionParams, max_matrix_rows: int = 1 << 20
) -> DigitalNet:
    """Interlaced binomial-formula net: b^(gw) points, precision beta*g*w."""
    p = params
    if p.beta * p.g * p.w > max_matrix_rows:
        raise GuardError(
            f"matrix precision {p.beta * p.g * p.w} exceeds guard {max_matrix_rows}",
            required=p.beta * p.g * p.w,
        )
    q = chen_skriganov(
        p.base, p.beta * p.s, p.g, p.w, betas=p.betas, strict=p.strict
    )
    return interlace_net(q, p.beta)
