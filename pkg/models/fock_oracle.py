"""
Fock-Space Oracle
Brute-force simulation of generation, swapping, loss and post-selection on a truncated
multimode Fock space. Used to check the coefficient recursions and fidelity assemblies.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Tuple

import numpy as np

from models import cw_modes
from models.cw_chain import block_traces, initial_coefficients_cw, swap_step_cw
from models.errors import DomainError, InvalidInputError, NumericalError
from models.models import ModeDecomposition
from models.pulsed_chain import normalize

logger = logging.getLogger(__name__)

MAX_MODES = 3
PHOTON_CUTOFF = 2
MAX_DIMENSION = 10_000
MAX_PULSED_DEPTH = 2
MAX_CW_DEPTH = 1
MAX_BINS = 24
REFINEMENT_TOLERANCE = 1e-3
RESIDUAL_LIMIT = 1e-8

Occupation = Tuple[int, ...]


def memory_states(mode_count, cutoff=PHOTON_CUTOFF):
    """Occupation tuples of one memory with at most cutoff photons: vacuum, singles, pairs"""
    states = []
    for total in range(cutoff + 1):
        for modes in itertools.combinations_with_replacement(range(mode_count), total):
            occupation = [0] * mode_count
            for mode in modes:
                occupation[mode] += 1
            states.append(tuple(occupation))
    return states


@dataclass
class FockState:
    """Pure state of the two memories of a link as a map from occupation pairs to amplitudes"""
    mode_count: int
    photon_cutoff: int = PHOTON_CUTOFF
    amplitudes: Dict[Tuple[Occupation, Occupation], float] = field(default_factory=dict)

    @classmethod
    def vacuum(cls, mode_count):
        empty = (0,) * mode_count
        return cls(mode_count, amplitudes={(empty, empty): 1.0})

    def create(self, memory, mode):
        """Apply a^+ of one mode in memory 0 or 1; terms above the photon cutoff of the link are dropped"""
        result = {}
        for (left, right), value in self.amplitudes.items():
            occupation = list(left if memory == 0 else right)
            occupation[mode] += 1
            if sum(left) + sum(right) + 1 > self.photon_cutoff:
                continue
            key = (tuple(occupation), right) if memory == 0 else (left, tuple(occupation))
            result[key] = result.get(key, 0.0) + math.sqrt(occupation[mode]) * value
        return FockState(self.mode_count, self.photon_cutoff, result)

    def __add__(self, other):
        result = dict(self.amplitudes)
        for key, value in other.amplitudes.items():
            result[key] = result.get(key, 0.0) + value
        return FockState(self.mode_count, self.photon_cutoff, result)

    def scaled(self, factor):
        return FockState(self.mode_count, self.photon_cutoff,
                         {key: factor * value for key, value in self.amplitudes.items()})

    def norm2(self):
        return float(sum(value * value for value in self.amplitudes.values()))

    def vector(self, space):
        out = np.zeros(space.dimension)
        for (left, right), value in self.amplitudes.items():
            out[space.index[(space.memory_index[left], space.memory_index[right])]] += value
        return out

    def __repr__(self):
        return f'<FockState {self.mode_count} modes {len(self.amplitudes)} terms>'


class LinkSpace:
    """Basis of two memories holding at most two photons between them"""

    def __init__(self, mode_count):
        if mode_count < 1:
            raise InvalidInputError('a memory needs at least one mode', mode_count=mode_count)
        self.mode_count = mode_count
        self.memory = memory_states(mode_count)
        self.memory_index = {state: i for i, state in enumerate(self.memory)}
        self.photons = np.array([sum(state) for state in self.memory])
        self.pairs = [(i, j) for i in range(len(self.memory)) for j in range(len(self.memory))
                      if self.photons[i] + self.photons[j] <= PHOTON_CUTOFF]
        if len(self.pairs) > MAX_DIMENSION:
            raise InvalidInputError('Fock space too large for the oracle', dimension=len(self.pairs))
        self.index = {pair: k for k, pair in enumerate(self.pairs)}
        self.left = np.array([i for i, _ in self.pairs])
        self.right = np.array([j for _, j in self.pairs])
        self.left_photons = self.photons[self.left]
        self.right_photons = self.photons[self.right]
        self._loss_maps = {}

    @property
    def dimension(self):
        return len(self.pairs)

    def single(self, mode):
        """Memory index of one photon in mode"""
        return 1 + mode

    def lookup(self, inner_side, inner_state):
        """Link index of (outer, inner_state) for every outer memory state, -1 where absent"""
        out = np.full(len(self.memory), -1)
        for outer in range(len(self.memory)):
            pair = (outer, inner_state) if inner_side == 1 else (inner_state, outer)
            out[outer] = self.index.get(pair, -1)
        return out

    def loss_maps(self, side):
        """Per lost-photon pattern: source indices, target indices, binomial factor, kept and lost counts"""
        if side in self._loss_maps:
            return self._loss_maps[side]
        maps = []
        for lost in self.memory:
            src, dst, binom, kept, gone = [], [], [], [], []
            for k, (i, j) in enumerate(self.pairs):
                state = self.memory[i if side == 0 else j]
                if any(m > s for m, s in zip(lost, state)):
                    continue
                remaining = tuple(s - m for s, m in zip(state, lost))
                target = (self.memory_index[remaining], j) if side == 0 else (i, self.memory_index[remaining])
                src.append(k)
                dst.append(self.index[target])
                binom.append(math.prod(math.comb(s, m) for s, m in zip(state, lost)))
                kept.append(sum(remaining))
                gone.append(sum(lost))
            if src:
                maps.append(tuple(np.array(values) for values in (src, dst, binom, kept, gone)))
        self._loss_maps[side] = maps
        return maps

    def __repr__(self):
        return f'<LinkSpace {self.mode_count} modes dimension={self.dimension}>'


def apply_loss(rho, space: LinkSpace, side, eta):
    """Beam-splitter loss of transmissivity eta on every mode of one memory"""
    out = np.zeros_like(rho)
    for src, dst, binom, kept, gone in space.loss_maps(side):
        amplitude = np.sqrt(binom * eta ** kept * (1.0 - eta) ** gone)
        out[np.ix_(dst, dst)] += np.outer(amplitude, amplitude) * rho[np.ix_(src, src)]
    return out


def _slice(rho, rows, cols):
    size = rows.size
    out = np.zeros((size, size))
    row_mask, col_mask = rows >= 0, cols >= 0
    out[np.ix_(row_mask, col_mask)] = rho[np.ix_(rows[row_mask], cols[col_mask])]
    return out


def swap_links(rho, space: LinkSpace, eta2):
    """
    Entanglement swap of two copies of a link.

    The inner memories suffer loss eta2, interfere on a balanced beam splitter and exactly one
    photon is registered in any mode of either output. The minus outcome is phase corrected on
    the far memory and both outcomes are summed. Returns the unnormalised end-to-end state,
    the swap probability and the weight dropped for holding more than two photons.
    """
    left = apply_loss(rho, space, side=1, eta=eta2)
    right = apply_loss(rho, space, side=0, eta=eta2)
    vac = 0
    l_vac, r_vac = space.lookup(1, vac), space.lookup(0, vac)
    l_yy = _slice(left, l_vac, l_vac)
    r_yy = _slice(right, r_vac, r_vac)
    direct = np.zeros_like(rho)
    cross = np.zeros_like(rho)
    total = 0.0
    outer_l = np.ix_(space.left, space.left)
    outer_r = np.ix_(space.right, space.right)
    for mode in range(space.mode_count):
        l_one, r_one = space.lookup(1, space.single(mode)), space.lookup(0, space.single(mode))
        l_xx, l_xy = _slice(left, l_one, l_one), _slice(left, l_one, l_vac)
        r_xx, r_yx = _slice(right, r_one, r_one), _slice(right, r_vac, r_one)
        direct += l_xx[outer_l] * r_yy[outer_r] + l_yy[outer_l] * r_xx[outer_r]
        term = l_xy[outer_l] * r_yx[outer_r]
        cross += term + term.T
        total += np.trace(l_xx) * np.trace(r_yy) + np.trace(l_yy) * np.trace(r_xx)
    parity = np.where(space.right_photons % 2 == 1, -1.0, 1.0)
    flip = np.outer(parity, parity)
    # each outcome carries the 1/2 of the balanced beam splitter
    swapped = 0.5 * (direct + cross + flip * (direct - cross))
    probability = float(total)
    return swapped, probability, probability - float(np.trace(swapped))


def _statistics(rho, space: LinkSpace):
    """Photon-number distribution of the two ends and the single-photon coherence matrix"""
    diag = np.diag(rho)
    probs = np.zeros((PHOTON_CUTOFF + 1, PHOTON_CUTOFF + 1))
    np.add.at(probs, (space.left_photons, space.right_photons), diag)
    left = [space.index[(space.single(k), 0)] for k in range(space.mode_count)]
    right = [space.index[(0, space.single(k))] for k in range(space.mode_count)]
    return probs, rho[np.ix_(left, right)]


def _populations(probs):
    return {
        'c00': float(probs[0, 0]),
        'c10': float(probs[1, 0] + probs[0, 1]),
        'c11': float(probs[1, 1]),
        'c20': float(probs[2, 0] + probs[0, 2]),
    }


def bell_fidelity(rho, space: LinkSpace, eta2):
    """Read both ends out with efficiency eta2 and project two copies on the Bell state"""
    read = apply_loss(apply_loss(rho, space, 0, eta2), space, 1, eta2)
    probs, coherence = _statistics(read, space)
    p10, p01, p11, p00 = probs[1, 0], probs[0, 1], probs[1, 1], probs[0, 0]
    postselect = 2.0 * p10 * p01 + 2.0 * p11 * p00
    if postselect <= 0:
        raise NumericalError('post-selection probability vanishes in the oracle')
    return float((p10 * p01 + np.sum(coherence ** 2)) / postselect), float(postselect), coherence


@dataclass
class OracleResult:
    """Effective coefficients and figures of merit extracted from the oracle state"""
    depth_n: int
    coefficients: Dict[str, float]
    fidelity: float
    swap_probs: Tuple[float, ...]
    postselect: float
    residual: float
    truncated_weight: float

    def to_json(self):
        data = asdict(self)
        data['swap_probs'] = list(self.swap_probs)
        return json.dumps(data, sort_keys=True, indent=2)


def _run_chain(rho, space, eta2, n):
    rho = rho / np.trace(rho)
    swaps, truncated = [], 0.0
    for _ in range(n):
        rho, probability, dropped = swap_links(rho, space, eta2)
        swaps.append(probability)
        truncated += dropped
        rho = rho / np.trace(rho)
    return rho, tuple(swaps), truncated


def pulsed_link_state(weights: ModeDecomposition, p1, space: LinkSpace):
    """
    Heralded link density built from the two-pair expansion of both sources.

    A click in idler mode k applies (b_kA + b_kB); unobserved idlers are traced out, which
    leaves a mixture over the clicked mode and over the mode of any idler left behind.
    """
    w = weights.array
    rho = np.zeros((space.dimension, space.dimension))
    vacuum = FockState.vacuum(space.mode_count)
    for k in range(space.mode_count):
        single = (vacuum.create(0, k) + vacuum.create(1, k)).scaled(math.sqrt(w[k]))
        vector = single.vector(space)
        rho += (1.0 - p1) * np.outer(vector, vector)
        for j in range(space.mode_count):
            for memory in (0, 1):
                partner = vacuum.create(memory, j)
                pair = (partner.create(0, k) + partner.create(1, k)).scaled(math.sqrt(w[k] * w[j]))
                vector = pair.vector(space)
                rho += p1 * np.outer(vector, vector)
    return rho


def _check_residual(result):
    if result.residual > RESIDUAL_LIMIT:
        logger.warning('coefficient ansatz leaves residual %.2e at depth %d', result.residual, result.depth_n)


def _fit(design, target):
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    return solution, float(np.linalg.norm(design @ solution - target))


def simulate_pulsed(weights: ModeDecomposition, p1, eta2, n) -> OracleResult:
    """Depth-n pulsed chain in the space of the leading Schmidt modes"""
    if weights.mode_count > MAX_MODES:
        raise InvalidInputError('oracle handles at most three Schmidt modes', modes=weights.mode_count)
    if not 0 <= n <= MAX_PULSED_DEPTH:
        raise InvalidInputError('oracle handles swap depths 0..2', n=n)
    if not 0.0 <= p1 <= 0.5 or not 0.0 < eta2 <= 1.0:
        raise DomainError('oracle inputs outside their range', p1=p1, eta2=eta2)
    space = LinkSpace(weights.mode_count)
    rho, swaps, truncated = _run_chain(pulsed_link_state(weights, p1, space), space, eta2, n)
    probs, before = _statistics(rho, space)
    fidelity, postselect, after = bell_fidelity(rho, space, eta2)

    w = weights.array
    shape = 0.5 * w ** (2 ** n)
    lam = math.sqrt(2.0 / (1.0 + weights.purity)) * (1.0 + w)
    (a0, a1), residual = _fit(np.column_stack([shape, shape * lam]), np.diag(before))
    residual += float(np.linalg.norm(before - np.diag(np.diag(before))))
    leak = eta2 * shape * 2.0 * (1.0 - eta2) * lam
    (b0,), leak_residual = _fit(leak[:, None], np.diag(after) - eta2 * shape * (a0 + a1 * lam))
    coefficients = dict(_populations(probs), A0=float(a0), A1=float(a1), B0=float(b0))
    result = OracleResult(n, coefficients, fidelity, swaps, postselect, residual + leak_residual, truncated)
    _check_residual(result)
    logger.debug('pulsed oracle n=%d p1=%g: F=%.9f residual=%.2e', n, p1, fidelity, result.residual)
    return result


def _gauss_bins(kappa_t, bins):
    half = kappa_t / 2.0
    nodes, weights = np.polynomial.legendre.leggauss(bins // 2)
    points = np.concatenate([-half / 2.0 * (1.0 - nodes), half / 2.0 * (nodes + 1.0)])
    return points, np.concatenate([half / 2.0 * weights, half / 2.0 * weights])


@dataclass(eq=False)
class BinnedDrive:
    """
    Correlation functions of the continuous drive on quadrature time bins.

    Each bin is one memory mode and a function value at a bin carries sqrt(weight) of that bin,
    so sums over bins approximate integrals over the window. basis holds the rows g, v and phi,
    phi being the binned signal autocorrelation folded with g.
    """
    kappa_t: float
    x2: float
    idler: np.ndarray
    heralded: np.ndarray
    autocorrelation: np.ndarray
    basis: np.ndarray

    @classmethod
    def on_bins(cls, kappa_t, x2, bins):
        points, weights = _gauss_bins(kappa_t, bins)
        root = np.sqrt(weights)
        pair_w = np.outer(root, root)
        t1, t2 = np.meshgrid(points, points, indexing='ij')
        idler = root * cw_modes.basis_g(points)
        # per unit x^2 so that phi exists for an undriven link too
        unit = pair_w * cw_modes.signal_autocorrelation(t1 - t2, 1.0)
        return cls(
            kappa_t=float(kappa_t),
            x2=float(x2),
            idler=idler,
            heralded=pair_w * cw_modes.heralded_cross_correlation(t1, t2, x2),
            autocorrelation=x2 * unit,
            basis=np.vstack([idler, root * cw_modes.basis_v(points), unit @ idler]),
        )

    @property
    def size(self):
        return self.idler.size

    @property
    def gram(self):
        return self.basis @ self.basis.T

    def coherence(self):
        """<1_k, 0| rho |0, 1_l>: the heralded photon less the weight a second signal photon takes"""
        folded = self.autocorrelation @ self.idler
        return (0.5 * self.heralded
                - self.x2 * self.kappa_t / 2.0 * np.outer(self.idler, self.idler)
                - 0.5 * (np.outer(folded, self.idler) + np.outer(self.idler, folded)))

    def __repr__(self):
        return f'<BinnedDrive kT={self.kappa_t:g} x2={self.x2:g} bins={self.size}>'


def _herald(state, memory, amplitudes):
    """a_f^+ = sum_b f_b a_b^+ applied to one memory"""
    total = FockState(state.mode_count, state.photon_cutoff)
    for mode, value in enumerate(amplitudes):
        total = total + state.create(memory, mode).scaled(value)
    return total


def cw_link_state(drive: BinnedDrive, space: LinkSpace):
    """
    Depth-0 continuous-drive link density with time bins as modes.

    The heralded photon f is shared between the memories with the coherence of BinnedDrive.
    A second signal photon enters through the autocorrelation N: one photon in each memory as
    ((f f)_A N_B + N_A (f f)_B)/2, both in one memory as a_f^+ a_i^+ |0> N_ij <0| a_j a_f / 2, and
    the pair in one memory against (j, f) split over both. The single-photon populations carry
    the c10 of the coefficient set and the vacuum takes the remaining weight; no sector is rescaled.
    """
    coeffs = initial_coefficients_cw(drive.x2, drive.kappa_t)
    size, f, pairs = drive.size, drive.idler, drive.autocorrelation
    if space.mode_count != size:
        raise InvalidInputError('link space and drive disagree on the bin count',
                                modes=space.mode_count, bins=size)
    vacuum = FockState.vacuum(size)
    one = [np.array([vacuum.create(memory, b).vector(space) for b in range(size)]).T for memory in (0, 1)]
    both = np.array([[vacuum.create(1, b2).create(0, b1).vector(space) for b2 in range(size)]
                     for b1 in range(size)]).reshape(size * size, -1).T
    doubles = [np.array([_herald(vacuum.create(memory, i), memory, f).vector(space) for i in range(size)]).T
               for memory in (0, 1)]

    rho = np.zeros((space.dimension, space.dimension))
    coherence = drive.coherence()
    single = coeffs.c10 / 2.0 * coherence / np.trace(coherence)
    for memory in (0, 1):
        rho += one[memory] @ single @ one[memory].T
    block = one[0] @ coherence @ one[1].T
    rho += block + block.T

    clicked = np.outer(f, f)
    rho += both @ (0.5 * (np.kron(clicked, pairs) + np.kron(pairs, clicked))) @ both.T
    for memory in (0, 1):
        rho += 0.5 * doubles[memory] @ pairs @ doubles[memory].T

    # columns e_j (x) f and f (x) e_j: the single photons left against the pair
    partners = (np.kron(np.eye(size), f[:, None]), np.kron(f[:, None], np.eye(size)))
    for memory in (0, 1):
        block = 0.5 * doubles[memory] @ pairs @ (both @ partners[memory]).T
        rho += block + block.T

    rho[0, 0] = 0.0
    rho[0, 0] = 1.0 - np.trace(rho)
    return rho


def _symmetric_fit(kernel, basis):
    """Symmetric matrix M with kernel = sum_ab M_ab basis_a basis_b^T, and the fit residual"""
    count = basis.shape[0]
    pairs = [(a, b) for a in range(count) for b in range(a, count)]
    design = np.column_stack([(np.outer(basis[a], basis[b]) + np.outer(basis[b], basis[a])).ravel()
                              for a, b in pairs])
    solution, residual = _fit(design, kernel.ravel())
    matrix = np.zeros((count, count))
    for (a, b), value in zip(pairs, solution):
        matrix[a, b] = matrix[b, a] = 2.0 * value if a == b else value
    return matrix, residual


def _cw_once(kappa_t, x2, eta2, n, bins):
    drive = BinnedDrive.on_bins(kappa_t, x2, bins)
    space = LinkSpace(bins)
    rho, swaps, truncated = _run_chain(cw_link_state(drive, space), space, eta2, n)
    probs, before = _statistics(rho, space)
    fidelity, postselect, after = bell_fidelity(rho, space, eta2)

    gram = drive.gram
    coherence, residual = _symmetric_fit(before, drive.basis)
    a0, a1, a2, _ = block_traces(coherence, np.zeros_like(coherence), gram)
    if eta2 < 1.0:
        # readout adds eta2 (1 - eta2) (S_A + S_B) to eta2 times the coherence
        leak, leak_residual = _symmetric_fit((after - eta2 * before) / (eta2 * (1.0 - eta2)), drive.basis)
        b0 = float(np.sum(leak * gram))
    else:
        b0, leak_residual = math.nan, 0.0
    coefficients = dict(_populations(probs), A0=a0, A1=a1, A2=a2, B0=b0)
    result = OracleResult(n, coefficients, fidelity, swaps, postselect, residual + leak_residual, truncated)
    _check_residual(result)
    return result


def simulate_cw_effective(kappa_t, x2, eta2, n, bins=MAX_BINS, refine=True) -> OracleResult:
    """
    Continuous-drive chain with time bins as modes.

    With refine enabled the run is repeated on half the bins and a fidelity shift of
    1e-3 or more is reported as a numerical failure. B0 is only visible through readout
    loss and comes back as nan at eta2 = 1.
    """
    if not 0 <= n <= MAX_CW_DEPTH:
        raise InvalidInputError('oracle handles continuous-drive depths 0..1', n=n)
    if bins % 2 or not 2 <= bins <= MAX_BINS or (refine and bins % 4):
        raise InvalidInputError('bin count must be even, at most 24, and a multiple of 4 when refining',
                                bins=bins)
    result = _cw_once(kappa_t, x2, eta2, n, bins)
    if refine:
        coarse = _cw_once(kappa_t, x2, eta2, n, bins // 2)
        shift = abs(result.fidelity - coarse.fidelity)
        if shift >= REFINEMENT_TOLERANCE:
            raise NumericalError('oracle fidelity not converged in the bin count', kappa_t=kappa_t,
                                 fine=result.fidelity, coarse=coarse.fidelity, bins=bins)
        logger.debug('cw oracle kT=%g x2=%g n=%d: bin refinement moved F by %.2e', kappa_t, x2, n, shift)
    return result


def recursion_reference_cw(kappa_t, x2, eta2, n):
    """Normalised coefficient set from the continuous-drive recursion, for side-by-side dumps"""
    coeffs = initial_coefficients_cw(x2, kappa_t)
    for _ in range(n):
        coeffs = normalize(swap_step_cw(coeffs, eta2))
    return coeffs.to_dict()
