"""Chaotic spreading sequences, quadrature companions, Walsh codes, constellations.

The three chaotic maps (logistic, cubic, Bernoulli shift) generate the
spreading sequences; each sequence gets a discrete-Hilbert quadrature
companion so data symbols can be placed anywhere on the unit circle.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.linalg import hadamard
from scipy.signal import hilbert

MAP_KINDS = ("logistic", "cubic", "bernoulli")
_MAP_CODES = {"logistic": 0, "cubic": 1, "bernoulli": 2}

# Iterates collected only after the transient has died out, so sequences sit
# on the invariant density regardless of the initial condition.
BURN_IN = 1024

# Default per-antenna initial conditions, spaced to avoid accidental
# synchronization.  Overridable wherever a map is constructed.
def default_seed(antenna: int) -> float:
    return 0.1 + 0.17 * (antenna - 1)


@dataclass(frozen=True)
class ChaoticMap:
    """A one-dimensional chaotic map with its initial condition."""

    kind: str
    seed: float

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}, expected one of {MAP_KINDS}")
        if not (-1.0 < self.seed < 1.0) or self.seed == 0.0:
            raise ValueError(f"map seed must lie in (-1, 1) excluding 0, got {self.seed}")


@njit(cache=True)
def _iterate(code: int, x: float, out: np.ndarray) -> float:
    for i in range(out.shape[0]):
        if code == 0:
            x = 1.0 - 2.0 * x * x
        elif code == 1:
            x = 4.0 * x * x * x - 3.0 * x
        else:
            # Bernoulli shift; x == 0 takes the "< 0" branch.
            if x < 0.0 or x == 0.0:
                x = 1.2 * x + 1.0
            else:
                x = 1.2 * x - 1.0
        out[i] = x
    return x


@njit(cache=True)
def _advance(code: int, x: float, steps: int) -> float:
    for _ in range(steps):
        if code == 0:
            x = 1.0 - 2.0 * x * x
        elif code == 1:
            x = 4.0 * x * x * x - 3.0 * x
        else:
            if x < 0.0 or x == 0.0:
                x = 1.2 * x + 1.0
            else:
                x = 1.2 * x - 1.0
    return x


def next_chip(chaotic_map: ChaoticMap, current: float) -> float:
    """Apply the map recurrence once; pure function of (kind, current)."""
    if not (-1.0 <= current <= 1.0):
        raise ValueError(f"chip value {current} outside the map domain [-1, 1]")
    out = np.empty(1)
    _iterate(_MAP_CODES[chaotic_map.kind], current, out)
    return float(out[0])


class ChipStream:
    """Stateful generator of one antenna's chip stream.

    Burns in on construction, then yields consecutive iterates; the stream is
    continuous across frames so delayed multipath copies see real history.
    """

    def __init__(self, chaotic_map: ChaoticMap, burn_in: int = BURN_IN):
        self._code = _MAP_CODES[chaotic_map.kind]
        self._x = _advance(self._code, chaotic_map.seed, burn_in)

    def take(self, n: int) -> np.ndarray:
        out = np.empty(n)
        self._x = _iterate(self._code, self._x, out)
        return out


@dataclass(frozen=True)
class ChipSequence:
    """One spreading block: in-phase chips, quadrature companion, energy."""

    inphase: np.ndarray
    quadrature: np.ndarray
    energy: float = field(default=0.0)

    @classmethod
    def from_inphase(cls, inphase: np.ndarray) -> "ChipSequence":
        inphase = np.asarray(inphase, dtype=float)
        return cls(
            inphase=inphase,
            quadrature=quadrature_companion(inphase),
            energy=float(inphase @ inphase),
        )


def quadrature_companion(inphase: np.ndarray) -> np.ndarray:
    """Discrete Hilbert transform of a real block.

    Positive-frequency bins are rotated by -j, negative ones by +j, and the
    DC/Nyquist bins are zeroed, so the output is real,(approximately)
    orthogonal to the input, and of (approximately) equal energy.
    """
    inphase = np.asarray(inphase, dtype=float)
    n = inphase.shape[-1]
    if n < 8 or n % 2 != 0:
        raise ValueError(f"block length must be even and >= 8, got {n}")
    return np.imag(hilbert(inphase, axis=-1))


def generate_sequence(chaotic_map: ChaoticMap, beta: int) -> ChipSequence:
    """Generate a spreading block of ``beta`` chips after the burn-in."""
    if beta < 8 or beta % 2 != 0:
        raise ValueError(f"spreading factor must be even and >= 8, got {beta}")
    stream = ChipStream(chaotic_map)
    return ChipSequence.from_inphase(stream.take(beta))


@dataclass(frozen=True)
class WalshMatrix:
    """Sylvester-Hadamard matrix; rows are the spreading codes."""

    order: int
    rows: np.ndarray


def walsh(order: int) -> WalshMatrix:
    if order < 2 or order > 64 or (order & (order - 1)) != 0:
        raise ValueError(f"Walsh order must be a power of two in [2, 64], got {order}")
    return WalshMatrix(order=order, rows=hadamard(order, dtype=np.int64))


@dataclass(frozen=True)
class Constellation:
    """Unit-circle constellation with Gray-coded bit labels.

    Point ``s`` sits at angle 2*pi*s/order; ``labels[s]`` is the bit pattern
    carried by that point, chosen so adjacent sectors differ in one bit.
    """

    order: int
    points: np.ndarray
    labels: np.ndarray

    @property
    def cosines(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def sines(self) -> np.ndarray:
        return self.points[:, 1]


def gray_encode(index: int) -> int:
    return index ^ (index >> 1)


def gray_decode(label: int) -> int:
    index = label
    shift = 1
    while (label >> shift) > 0:
        index ^= label >> shift
        shift += 1
    return index


def constellation(order: int) -> Constellation:
    if order not in (2, 4, 8, 16):
        raise ValueError(f"constellation order must be one of 2, 4, 8, 16, got {order}")
    angles = 2.0 * np.pi * np.arange(order) / order
    points = np.column_stack([np.cos(angles), np.sin(angles)])
    labels = np.array([gray_encode(s) for s in range(order)], dtype=np.int64)
    return Constellation(order=order, points=points, labels=labels)


def cross_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized zero-lag cross-correlation of two chip blocks."""
    ea = float(a @ a)
    eb = float(b @ b)
    if ea == 0.0 or eb == 0.0:
        return 0.0
    return float(a @ b) / math.sqrt(ea * eb)
