"""
Domain Models for the Multimode Repeater
This file contains the value types shared by the source, chain, metrics and optimizer modules
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from models.errors import DomainError, InvalidInputError


class DriveKind(str, Enum):
    """Time dependence of the parametric interaction strength"""
    GAUSSIAN_PULSE = 'gaussian_pulse'
    CONTINUOUS = 'continuous'


class FidelityMode(str, Enum):
    """Evaluation mode of the zeroth-order fidelity"""
    EXACT = 'exact'
    APPROXIMATE = 'approximate'


class ScenarioKind(str, Enum):
    """Driving scheme of the repeater sources"""
    PULSED = 'pulsed'
    CW = 'cw'


@dataclass(frozen=True)
class DriveProfile:
    """Interaction strength chi(t) in units of the cavity linewidth"""
    kind: DriveKind
    strength_x: float
    width_kappa_sigma: Optional[float] = None

    def __post_init__(self):
        if not self.strength_x >= 0:
            raise DomainError('drive strength must be non-negative', strength_x=self.strength_x)
        if self.kind is DriveKind.GAUSSIAN_PULSE:
            if self.width_kappa_sigma is None or not self.width_kappa_sigma > 0:
                raise DomainError('pulse width must be positive', width_kappa_sigma=self.width_kappa_sigma)
        elif self.strength_x >= 1:
            # continuous drive at or above chi = kappa/2 lases
            raise DomainError('continuous drive must stay below threshold', strength_x=self.strength_x)

    @classmethod
    def gaussian_pulse(cls, strength_x, kappa_sigma):
        return cls(DriveKind.GAUSSIAN_PULSE, float(strength_x), float(kappa_sigma))

    @classmethod
    def continuous(cls, strength_x):
        return cls(DriveKind.CONTINUOUS, float(strength_x))

    @property
    def chi_over_kappa(self):
        """Constant drive chi/kappa = x/2 (continuous drive only)"""
        return self.strength_x / 2.0

    def __repr__(self):
        if self.kind is DriveKind.GAUSSIAN_PULSE:
            return f'<DriveProfile pulse x={self.strength_x:g} ks={self.width_kappa_sigma:g}>'
        return f'<DriveProfile cw x={self.strength_x:g}>'


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Quadrature nodes (kappa*t) and weights; bounds are the panel edges when known"""
    points: np.ndarray
    weights: np.ndarray
    bounds: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim != 1 or points.shape != weights.shape or points.size < 2:
            raise InvalidInputError('grid points and weights must be matching 1-D arrays')
        if np.any(np.diff(points) <= 0):
            raise InvalidInputError('grid points must be strictly increasing')
        if np.any(weights <= 0):
            raise InvalidInputError('quadrature weights must be positive')
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'weights', weights)
        if self.bounds is not None:
            lo, hi = (float(edge) for edge in self.bounds)
            if lo > points[0] or hi < points[-1]:
                raise InvalidInputError('grid bounds must enclose the points', bounds=(lo, hi))
            object.__setattr__(self, 'bounds', (lo, hi))

    @classmethod
    def gauss_legendre(cls, edges, n_points):
        """Composite Gauss-Legendre rule; points are shared evenly between the panels"""
        edges = sorted(set(float(edge) for edge in edges))
        if len(edges) < 2:
            raise InvalidInputError('a grid needs at least one panel', edges=edges)
        panels = len(edges) - 1
        per_panel = max(4, int(math.ceil(n_points / panels)))
        nodes, node_weights = np.polynomial.legendre.leggauss(per_panel)
        points, weights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            points.append(lo + half * (nodes + 1.0))
            weights.append(half * node_weights)
        return cls(np.concatenate(points), np.concatenate(weights), (edges[0], edges[-1]))

    @property
    def size(self):
        return self.points.size

    @property
    def span(self):
        return float(self.points[0]), float(self.points[-1])

    @property
    def coverage(self):
        """Interval the rule integrates over: the panel edges, or the outer nodes without them"""
        return self.bounds if self.bounds is not None else self.span

    def __repr__(self):
        lo, hi = self.span
        return f'<TimeGrid {self.size} points [{lo:.3g}, {hi:.3g}]>'


@dataclass(frozen=True)
class ModeDecomposition:
    """Schmidt weights of the heralded signal photon and their purity"""
    weights: Tuple[float, ...]
    purity: float

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.size == 0 or np.any(weights < 0) or np.any(weights > 1 + 1e-12):
            raise InvalidInputError('mode weights must lie in [0, 1]')
        if abs(weights.sum() - 1.0) > 1e-9:
            raise InvalidInputError('mode weights must sum to one', total=float(weights.sum()))
        if np.any(np.diff(weights) > 1e-15):
            raise InvalidInputError('mode weights must be in descending order')
        if abs(float(np.sum(weights ** 2)) - self.purity) > 1e-9:
            raise InvalidInputError('purity must equal the sum of squared weights', purity=self.purity)

    @classmethod
    def from_weights(cls, weights):
        """Sort, renormalise and attach the purity"""
        values = np.sort(np.clip(np.asarray(weights, dtype=float), 0.0, None))[::-1]
        total = values.sum()
        if total <= 0:
            raise InvalidInputError('at least one mode weight must be positive')
        values = values / total
        return cls(tuple(float(w) for w in values), float(np.sum(values ** 2)))

    @classmethod
    def with_remainder(cls, weights, tolerance=1e-6):
        """
        Weights already divided by the exact total; whatever they miss is kept as one lumped
        weight so the resolved ones stay as given.
        """
        values = np.sort(np.clip(np.asarray(weights, dtype=float), 0.0, None))[::-1]
        remainder = 1.0 - values.sum()
        if remainder < -tolerance:
            raise InvalidInputError('resolved weights exceed the exact total', total=float(values.sum()))
        if remainder <= 0:
            return cls.from_weights(values)
        values = np.sort(np.append(values, remainder))[::-1]
        return cls(tuple(float(w) for w in values), float(np.sum(values ** 2)))

    @classmethod
    def single_mode(cls):
        return cls((1.0,), 1.0)

    @property
    def array(self):
        return np.asarray(self.weights, dtype=float)

    @property
    def mode_count(self):
        return len(self.weights)

    def top(self, count):
        """Leading modes only, renormalised"""
        return ModeDecomposition.from_weights(self.weights[:count])

    def to_dict(self):
        return {'weights': list(self.weights), 'purity': self.purity}

    def __repr__(self):
        return f'<ModeDecomposition {self.mode_count} modes purity={self.purity:.6f}>'


@dataclass(frozen=True)
class PulsedCoefficients:
    """Closed coefficient set of one link's density matrix under pulsed driving"""
    depth_n: int
    c00: float
    c10: float
    c11: float
    c20: float
    a0: float
    a1: float
    b0: float
    normalized: bool = False

    @property
    def diagonal(self):
        return self.c00, self.c10, self.c11, self.c20

    def trace(self):
        return self.c00 + self.c10 + self.c11 + self.c20

    def scaled(self, factor, normalized):
        return replace(
            self,
            c00=self.c00 * factor, c10=self.c10 * factor, c11=self.c11 * factor, c20=self.c20 * factor,
            a0=self.a0 * factor, a1=self.a1 * factor, b0=self.b0 * factor,
            normalized=normalized,
        )

    def to_dict(self):
        return {
            'n': self.depth_n, 'c00': self.c00, 'c10': self.c10, 'c11': self.c11, 'c20': self.c20,
            'A0': self.a0, 'A1': self.a1, 'B0': self.b0, 'normalized': self.normalized,
        }

    def __repr__(self):
        return f'<PulsedCoefficients n={self.depth_n} trace={self.trace():.6g}>'


@dataclass(frozen=True, eq=False)
class CwCoefficients:
    """
    Coefficient set of one link's density matrix under continuous driving.

    coherence and leak hold the single-photon coherence kernel and the two-photon leak on the
    window basis (g, v, phi) of ModeFunctionTable; A0, A1, A2 and B0 are their traces per block.
    The leak towards the second memory is leak.T.
    """
    depth_n: int
    kappa_t: float
    c00: float
    c10: float
    c11: float
    c20: float
    a0: float
    a1: float
    a2: float
    b0: float
    strength_x2: float
    normalized: bool = False
    coherence: Optional[np.ndarray] = None
    leak: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ('coherence', 'leak'):
            value = getattr(self, name)
            if value is not None:
                value = np.asarray(value, dtype=float)
                if value.shape != (len(MODE_BASIS), len(MODE_BASIS)):
                    raise InvalidInputError(f'{name} must be a {len(MODE_BASIS)}x{len(MODE_BASIS)} basis matrix',
                                            shape=value.shape)
                object.__setattr__(self, name, value)

    @property
    def diagonal(self):
        return self.c00, self.c10, self.c11, self.c20

    @property
    def has_kernels(self):
        return self.coherence is not None and self.leak is not None

    def trace(self):
        return self.c00 + self.c10 + self.c11 + self.c20

    def scaled(self, factor, normalized):
        return replace(
            self,
            c00=self.c00 * factor, c10=self.c10 * factor, c11=self.c11 * factor, c20=self.c20 * factor,
            a0=self.a0 * factor, a1=self.a1 * factor, a2=self.a2 * factor, b0=self.b0 * factor,
            coherence=None if self.coherence is None else self.coherence * factor,
            leak=None if self.leak is None else self.leak * factor,
            normalized=normalized,
        )

    def to_dict(self):
        data = {
            'n': self.depth_n, 'kappa_T': self.kappa_t, 'x2': self.strength_x2,
            'c00': self.c00, 'c10': self.c10, 'c11': self.c11, 'c20': self.c20,
            'A0': self.a0, 'A1': self.a1, 'A2': self.a2, 'B0': self.b0, 'normalized': self.normalized,
        }
        if self.has_kernels:
            data['coherence'] = self.coherence.tolist()
            data['leak'] = self.leak.tolist()
        return data

    def __repr__(self):
        return f'<CwCoefficients n={self.depth_n} kT={self.kappa_t:g} trace={self.trace():.6g}>'


# g = e^(-|t|/2)/sqrt(2), v = g (1 + |t|/2)^2 and phi, the signal autocorrelation folded with g
MODE_BASIS = ('g', 'v', 'phi')


@dataclass(frozen=True, eq=False)
class ModeFunctionTable:
    """Gram matrix of the window basis, and traces of the continuous-drive mode functions"""
    kappa_t: float
    traces: Dict[str, float]
    gram: np.ndarray
    b0_bracket_ratio: float
    quadrature_points: int

    def overlap(self, first, second):
        return float(self.gram[MODE_BASIS.index(first), MODE_BASIS.index(second)])

    def normalized_overlap(self, first, second):
        """Overlap divided by the L2 norms; lies in [-1, 1]"""
        norm = math.sqrt(self.overlap(first, first) * self.overlap(second, second))
        return self.overlap(first, second) / norm if norm > 0 else 0.0

    def to_dict(self):
        return {
            'kappa_T': self.kappa_t,
            'traces': dict(self.traces),
            'gram': {f'{a}.{b}': self.overlap(a, b) for a in MODE_BASIS for b in MODE_BASIS},
            'b0_bracket_ratio': self.b0_bracket_ratio,
            'quadrature_points': self.quadrature_points,
        }

    def __repr__(self):
        return f'<ModeFunctionTable kT={self.kappa_t:g} points={self.quadrature_points}>'


ATTENUATION_SPANS = {'link': 1.0, 'half_link': 0.5}

@dataclass(frozen=True)
class LinkBudget:
    """Efficiencies and geometry of a repeater chain"""
    eta_d: float = 0.9
    eta_m: float = 0.8
    l_att_km: float = 22.0
    fiber_c_km_s: float = 2e5
    l_total_km: float = 100.0
    depth_n: int = 0
    attenuation: str = 'link'  # fiber loss over L0 ('link') or over L0/2 ('half_link')

    def __post_init__(self):
        if self.attenuation not in ATTENUATION_SPANS:
            raise DomainError('unknown attenuation convention', attenuation=self.attenuation)
        for name in ('eta_d', 'eta_m'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f'{name} must lie in [0, 1]', **{name: value})
        if not self.l_att_km > 0 or not self.fiber_c_km_s > 0 or not self.l_total_km > 0:
            raise DomainError('lengths and signal speed must be positive',
                              l_att_km=self.l_att_km, fiber_c_km_s=self.fiber_c_km_s, l_total_km=self.l_total_km)
        if self.depth_n < 0:
            raise DomainError('swap depth must be non-negative', depth_n=self.depth_n)

    @property
    def l0_km(self):
        """Elementary link length"""
        return self.l_total_km / 2 ** self.depth_n

    @property
    def eta_ld(self):
        return self.eta_d * math.exp(-ATTENUATION_SPANS[self.attenuation] * self.l0_km / self.l_att_km)

    @property
    def eta2(self):
        return self.eta_m * self.eta_d

    def at(self, l_total_km=None, depth_n=None):
        return replace(
            self,
            l_total_km=self.l_total_km if l_total_km is None else float(l_total_km),
            depth_n=self.depth_n if depth_n is None else int(depth_n),
        )

    def __repr__(self):
        return f'<LinkBudget L={self.l_total_km:g}km n={self.depth_n}>'


@dataclass(frozen=True)
class Scenario:
    """What drives the sources and how it is constrained"""
    kind: ScenarioKind
    intensity_cap: Optional[float] = None  # a; None means no cap
    kappa_sigma: Optional[float] = None  # fixed pulse width instead of a cap
    kappa_ttot: float = 100.0

    @classmethod
    def pulsed(cls, intensity_cap=None, kappa_sigma=None):
        if intensity_cap is not None and math.isinf(intensity_cap):
            intensity_cap = None
        return cls(ScenarioKind.PULSED, intensity_cap, kappa_sigma)

    @classmethod
    def cw(cls, kappa_ttot=100.0):
        return cls(ScenarioKind.CW, kappa_ttot=kappa_ttot)

    @property
    def label(self):
        if self.kind is ScenarioKind.CW:
            return 'cw'
        if self.kappa_sigma is not None:
            return f'pulsed(ks={self.kappa_sigma:g})'
        cap = 'inf' if self.intensity_cap is None else f'{self.intensity_cap:g}'
        return f'pulsed(a={cap})'


@dataclass(frozen=True)
class RateResult:
    """Un-multiplexed rate of a chain and the probabilities it was built from"""
    depth_n: int
    l_total_km: float
    probs: Tuple[float, ...]
    fidelity: float
    rate_hz: float
    t_total_s: Optional[float] = None

    def to_dict(self):
        data = asdict(self)
        data['probs'] = list(self.probs)
        return data

    def __repr__(self):
        return f'<RateResult n={self.depth_n} L={self.l_total_km:g}km rate={self.rate_hz:.4g}Hz>'


@dataclass(frozen=True)
class TargetSolve:
    """Outcome of inverting the fidelity for a drive parameter"""
    target_f: float
    param_name: str
    param_value: float
    bracket: Tuple[float, float]
    achieved_f: float
    iterations: int
    notes: Dict[str, float] = field(default_factory=dict)

    def to_dict(self):
        data = asdict(self)
        data['bracket'] = list(self.bracket)
        return data

    def __repr__(self):
        return f'<TargetSolve {self.param_name}={self.param_value:.6g} F={self.achieved_f:.6f}>'


@dataclass(frozen=True)
class ChainStatistics:
    """Swap probabilities P_1..P_n, post-selection probability and fidelity at depth n"""
    depth_n: int
    swap_probs: Tuple[float, ...]
    postselect: float
    fidelity: float

    def product(self):
        value = self.postselect
        for prob in self.swap_probs:
            value *= prob
        return value
