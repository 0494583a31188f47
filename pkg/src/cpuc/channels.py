"""Kraus channels, input cost functions and parametrized state families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    DensityMatrix,
    DomainError,
    PreconditionError,
    StateLike,
    ValidationError,
    as_density,
)

KRAUS_TOL = 1e-9
COST_TOL = 1e-9
FD_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map rho -> sum_k K_k rho K_k^dagger.

    Shapes are checked on construction; completeness is not, so that
    trace-decreasing operator sets can still be inspected with
    :func:`validate_kraus`.
    """

    kraus_ops: tuple

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise ValidationError("Kraus operators must be 2-d and share one shape")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus_ops[0].shape[0]

    def __call__(self, rho: StateLike) -> DensityMatrix:
        return apply(self, rho)

    def __repr__(self):
        return f"KrausChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, n_ops={len(self.kraus_ops)})"


def apply_matrix(channel: KrausChannel, m: np.ndarray) -> np.ndarray:
    """Linear action on an arbitrary (not necessarily valid) operator."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (channel.dim_in, channel.dim_in):
        raise ValidationError(f"operator shape {m.shape} does not match dim_in={channel.dim_in}")
    out = np.zeros((channel.dim_out, channel.dim_out), dtype=complex)
    for k in channel.kraus_ops:
        out += k @ m @ k.conj().T
    return out


def apply(channel: KrausChannel, rho: StateLike) -> DensityMatrix:
    rho = as_density(rho)
    if rho.dim != channel.dim_in:
        raise ValidationError(f"state dim {rho.dim} does not match dim_in={channel.dim_in}")
    return DensityMatrix(apply_matrix(channel, rho.matrix))


def completeness_deviation(channel: KrausChannel) -> float:
    """max |sum K^dagger K - I| over entries."""
    s = sum(k.conj().T @ k for k in channel.kraus_ops)
    return float(np.max(np.abs(s - np.eye(channel.dim_in))))


def validate_kraus(channel: KrausChannel, tol: float = KRAUS_TOL) -> bool:
    return completeness_deviation(channel) <= tol


def require_cptp(channel: KrausChannel, tol: float = KRAUS_TOL) -> KrausChannel:
    dev = completeness_deviation(channel)
    if dev > tol:
        raise ValidationError(f"Kraus operators are not trace preserving (deviation {dev:.3g})")
    return channel


# -- standard channels --------------------------------------------------------

def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel([np.eye(dim)])


def _weyl_operators(dim: int):
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))
    for a in range(dim):
        for b in range(dim):
            yield (a, b), np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)


def depolarizing_channel(dim: int, p: float = 1.0) -> KrausChannel:
    """rho -> (1 - p) rho + p I/dim; p = 1 is the completely depolarizing map."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"depolarizing probability must lie in [0, 1], got {p}")
    ops = []
    for (a, b), w in _weyl_operators(dim):
        weight = p / dim**2 + (1.0 - p if (a, b) == (0, 0) else 0.0)
        if weight > 0:
            ops.append(math.sqrt(weight) * w)
    return KrausChannel(ops)


def amplitude_damping(gamma: float) -> KrausChannel:
    """Qubit decay |1> -> |0> with probability ``gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"decay probability must lie in [0, 1], got {gamma}")
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1 - gamma)]])
    k1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]])
    return KrausChannel([k0, k1])


def generalized_amplitude_damping(gamma: float, n_thermal: float) -> KrausChannel:
    """Qubit relaxation towards a thermal state with excited population
    ``n_thermal / (1 + 2 n_thermal)``.

    Fixed point has full rank whenever ``gamma > 0`` and ``n_thermal > 0``.
    """
    if not 0.0 <= gamma <= 1.0 or n_thermal < 0:
        raise DomainError("need 0 <= gamma <= 1 and n_thermal >= 0")
    q = (1 + n_thermal) / (1 + 2 * n_thermal)  # weight of decay towards |0>
    s = math.sqrt(1 - gamma)
    ops = [
        math.sqrt(q) * np.array([[1.0, 0.0], [0.0, s]]),
        math.sqrt(q) * np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]]),
        math.sqrt(1 - q) * np.array([[s, 0.0], [0.0, 1.0]]),
        math.sqrt(1 - q) * np.array([[0.0, 0.0], [math.sqrt(gamma), 0.0]]),
    ]
    return KrausChannel([k for k in ops if np.any(k)])


def random_channel(dim_in: int, dim_out: int, n_ops: int, rng: np.random.Generator) -> KrausChannel:
    """Random CPTP map from a Haar-like isometry C^dim_in -> C^(n_ops*dim_out)."""
    if n_ops * dim_out < dim_in:
        raise ValidationError(f"an isometry needs n_ops * dim_out >= dim_in, got {n_ops} * {dim_out} < {dim_in}")
    g = rng.normal(size=(n_ops * dim_out, dim_in)) + 1j * rng.normal(size=(n_ops * dim_out, dim_in))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return KrausChannel([q[i * dim_out:(i + 1) * dim_out, :] for i in range(n_ops)])


def random_state(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


# -- costs ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CostFunction:
    """Symbol cost b[x].

    ``kind`` is one of ``"observable"`` (Tr(B rho) for Hermitian ``data``),
    ``"quadratic"`` (squared norm of the family parameter) or ``"lookup"``
    (explicit per-symbol costs in ``data``).
    """

    kind: str
    data: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("observable", "quadratic", "lookup"):
            raise ValidationError(f"unknown cost kind {self.kind!r}")
        if self.kind == "observable":
            b = np.asarray(self.data, dtype=complex)
            if b.ndim != 2 or b.shape[0] != b.shape[1] or np.max(np.abs(b - b.conj().T)) > KRAUS_TOL:
                raise ValidationError("observable cost needs a Hermitian matrix")
            object.__setattr__(self, "data", 0.5 * (b + b.conj().T))
        elif self.kind == "lookup":
            c = np.asarray(self.data, dtype=float)
            if np.any(c < 0):
                raise ValidationError("lookup costs must be nonnegative")
            object.__setattr__(self, "data", c)

    @classmethod
    def observable(cls, b) -> "CostFunction":
        return cls("observable", b)

    @classmethod
    def photon_number(cls, dim: int) -> "CostFunction":
        return cls("observable", np.diag(np.arange(dim, dtype=float)))

    @classmethod
    def quadratic(cls) -> "CostFunction":
        return cls("quadratic")

    @classmethod
    def lookup(cls, costs) -> "CostFunction":
        return cls("lookup", costs)


def cost_of(cost: CostFunction, arg) -> float:
    """Evaluate a cost.

    ``arg`` is a state for observable costs, a parameter vector for
    quadratic costs and a symbol index for lookup costs.
    """
    if cost.kind == "quadratic":
        x = np.atleast_1d(np.asarray(arg, dtype=float))
        return float(np.dot(x, x))
    if cost.kind == "lookup":
        return float(cost.data[int(arg)])
    m = np.asarray(arg, dtype=complex)
    if m.shape != cost.data.shape:
        raise ValidationError(f"state shape {m.shape} does not match observable {cost.data.shape}")
    val = float(np.real(np.trace(cost.data @ m)))
    if val < 0:
        if val < -COST_TOL:
            raise DomainError(f"negative cost {val:.3g}")
        val = 0.0
    return val


# -- parametrized families --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParamStateFamily:
    """Map from a real parameter vector to a density matrix.

    ``fn`` returns a raw matrix so that finite differences may step slightly
    outside the box; :meth:`state` validates.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    dim: int
    bounds: tuple
    free_point: Optional[tuple] = None
    name: str = "family"
    channel: Optional[KrausChannel] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple((float(lo), float(hi)) for lo, hi in self.bounds))
        if self.free_point is not None:
            fp = tuple(float(v) for v in np.atleast_1d(self.free_point))
            if len(fp) != len(self.bounds):
                raise ValidationError("free_point length does not match the parameter dimension")
            object.__setattr__(self, "free_point", fp)

    @property
    def nparams(self) -> int:
        return len(self.bounds)

    @property
    def dim_out(self) -> int:
        return self.dim if self.channel is None else self.channel.dim_out

    def matrix(self, x) -> np.ndarray:
        m = self.fn(np.atleast_1d(np.asarray(x, dtype=float)))
        if self.channel is not None:
            m = apply_matrix(self.channel, m)
        return m

    def state(self, x) -> DensityMatrix:
        return DensityMatrix(self.matrix(x))

    def input_state(self, x) -> DensityMatrix:
        return DensityMatrix(self.fn(np.atleast_1d(np.asarray(x, dtype=float))))

    def free_state(self) -> DensityMatrix:
        if self.free_point is None:
            raise PreconditionError(f"{self.name} has no free point")
        return self.state(self.free_point)

    def through(self, channel: KrausChannel) -> "ParamStateFamily":
        """The same family with outputs passed through ``channel``."""
        if channel.dim_in != self.dim_out:
            raise ValidationError("channel input dimension does not match the family")
        if self.channel is None:
            return ParamStateFamily(self.fn, self.dim, self.bounds, self.free_point, self.name, channel)
        inner = self.channel
        return ParamStateFamily(
            lambda x: apply_matrix(inner, self.fn(x)), self.dim, self.bounds,
            self.free_point, self.name, channel,
        )

    def derivative(self, x, index: int = 0, h: float = FD_STEP) -> np.ndarray:
        """d rho / d x_index by central differences with one Richardson step."""
        x = np.atleast_1d(np.asarray(x, dtype=float)).copy()
        e = np.zeros_like(x)
        e[index] = 1.0

        def central(step):
            return (self.matrix(x + step * e) - self.matrix(x - step * e)) / (2 * step)

        d = (4.0 * central(h / 2) - central(h)) / 3.0
        return 0.5 * (d + d.conj().T)


def bloch_vector_state(r) -> np.ndarray:
    x, y, z = r
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def bloch_family(mixed: bool = False) -> ParamStateFamily:
    """Qubit states on the Bloch sphere (theta, phi) or in the ball (r, theta, phi).

    The free point is |0> (theta = 0).
    """
    if mixed:
        def fn(p):
            r, th, ph = p
            return bloch_vector_state((r * math.sin(th) * math.cos(ph), r * math.sin(th) * math.sin(ph), r * math.cos(th)))
        return ParamStateFamily(fn, 2, [(0.0, 1.0), (0.0, math.pi), (0.0, 2 * math.pi)], (1.0, 0.0, 0.0), "bloch-ball")

    def fn(p):
        th, ph = p
        return bloch_vector_state((math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)))
    return ParamStateFamily(fn, 2, [(0.0, math.pi), (0.0, 2 * math.pi)], (0.0, 0.0), "bloch")


def rotation_family(max_angle: float = math.pi) -> ParamStateFamily:
    """Pure qubit states cos(x/2)|0> + sin(x/2)|1>, free at x = 0."""
    def fn(p):
        th = p[0]
        return bloch_vector_state((math.sin(th), 0.0, math.cos(th)))
    return ParamStateFamily(fn, 2, [(-max_angle, max_angle)], (0.0,), "rotation")


def mixture_family(rho0: StateLike, rho1: StateLike) -> ParamStateFamily:
    """(1 - theta) rho0 + theta rho1 for theta in [0, 1], free at theta = 0."""
    a, b = as_density(rho0).matrix, as_density(rho1).matrix
    if a.shape != b.shape:
        raise ValidationError("mixture endpoints must share a dimension")
    return ParamStateFamily(lambda p: (1 - p[0]) * a + p[0] * b, a.shape[0], [(0.0, 1.0)], (0.0,), "mixture")


def polynomial_qubit_family(a, b, c=(0.0, 0.0, 0.0), half_width: float = 0.2) -> ParamStateFamily:
    """Bloch vector a + x b + x^2 c for |x| <= half_width.

    Full rank on the box when |a| + w|b| + w^2|c| < 1.
    """
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    return ParamStateFamily(
        lambda p: bloch_vector_state(a + p[0] * b + p[0] ** 2 * c), 2,
        [(-half_width, half_width)], (0.0,), "polynomial-qubit",
    )


def random_qubit_family(rng: np.random.Generator, radius: float = 0.6, speed: float = 0.3) -> ParamStateFamily:
    """Random full-rank polynomial qubit family around x = 0."""
    def ball(scale):
        v = rng.normal(size=3)
        return scale * rng.uniform(0.2, 1.0) * v / np.linalg.norm(v)
    return polynomial_qubit_family(ball(radius), ball(speed), ball(speed))


def grid_axes(bounds: Sequence, points: int):
    return [np.linspace(lo, hi, points) for lo, hi in bounds]
