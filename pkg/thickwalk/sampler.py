"""
Reflection-method Markov chain on thick equilateral walks.

A move reflects the tail of the walk through a random plane at a random interior vertex
(single move), or does that twice at two distinct vertices (double move). Planes are drawn
uniformly and rejected until the bend angle at the pivot is allowable; the finished
candidate is kept when it accommodates the tube, otherwise the chain stays put.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sentry_sdk import logger as sentry_logger

from thickwalk.config import config
from thickwalk.exceptions import PreconditionViolation, ProposalExhaustedError
from thickwalk.geom import Plane, Walk, bend_angles, reflect_tail
from thickwalk.models.chain import ChainConfig, ChainStats
from thickwalk.thickness import ThicknessParams, long_range_ok

logger = logging.getLogger(__name__)

SINGLE = "single"
DOUBLE = "double"

RNG_IDENTITY = "numpy.random.PCG64/SeedSequence(seed, spawn_key=(n, round(r*1e6), chain))"

# Acceptance percentages of reflection moves by (length, radius), half single and half double moves
_PUBLISHED_RADII = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
_PUBLISHED_ROWS = {
    100: (100.00, 78.56, 68.47, 60.71, 54.12, 48.51, 43.58, 39.39, 35.79, 32.65, 29.95),
    200: (100.00, 73.57, 63.89, 56.73, 50.71, 45.55, 41.15, 37.35, 34.07, 31.25, 28.78),
    300: (100.00, 70.68, 61.25, 54.39, 48.74, 43.84, 39.65, 36.08, 32.96, 30.31, 27.99),
    400: (100.00, 68.55, 59.37, 52.79, 47.32, 42.68, 38.53, 35.19, 32.20, 29.64, 27.39),
    500: (100.00, 66.98, 58.02, 51.54, 46.29, 41.70, 37.84, 34.46, 31.60, 29.10, 26.94),
    600: (100.00, 65.74, 56.88, 50.69, 45.35, 41.02, 37.18, 33.89, 31.09, 28.63, 26.57),
    700: (100.00, 63.65, 56.11, 49.79, 44.94, 41.23, 37.13, 33.14, 30.59, 28.62, 25.99),
    800: (100.00, 63.11, 55.33, 49.79, 44.26, 39.28, 36.50, 32.79, 30.29, 27.88, 25.58),
    900: (100.00, 63.16, 54.17, 48.56, 43.26, 39.49, 35.62, 32.57, 30.12, 27.57, 25.55),
    1000: (100.00, 62.73, 53.28, 48.06, 42.75, 38.94, 34.94, 32.42, 29.70, 27.79, 25.59),
}
PUBLISHED_ACCEPTANCE: Dict[Tuple[int, float], float] = {
    (n, r): rate
    for n, row in _PUBLISHED_ROWS.items()
    for r, rate in zip(_PUBLISHED_RADII, row)
}


def radius_key(r: float) -> int:
    """Radius in micro-units, used for RNG keys and table lookups"""
    return int(round(r * 1e6))


def published_acceptance(n: int, r: float) -> Optional[float]:
    return PUBLISHED_ACCEPTANCE.get((n, radius_key(r) / 1e6))


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for ``seed``, split into an independent stream per ``key``"""
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(sequence))


def chain_rng(chain_config: ChainConfig) -> np.random.Generator:
    return make_rng(chain_config.seed, chain_config.n, radius_key(chain_config.r), chain_config.chain_index)


def straight_walk(n: int) -> Walk:
    """(0,0,0), (1,0,0), ..., (n,0,0)"""
    if n < 2:
        raise PreconditionViolation("straight_walk", "n must be at least 2", n=n)
    vertices = np.zeros((n + 1, 3))
    vertices[:, 0] = np.arange(n + 1)
    return Walk(vertices)


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    """Uniform direction on the unit sphere from a normalized standard normal draw"""
    while True:
        v = rng.standard_normal(3)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


@dataclass(frozen=True)
class MoveProposal:
    """A single or double reflection: (vertex, plane) pairs in the order they were applied"""

    kind: str
    first: Tuple[int, Plane]
    second: Optional[Tuple[int, Plane]] = None

    def __post_init__(self):
        if self.kind not in (SINGLE, DOUBLE):
            raise PreconditionViolation("MoveProposal", f"unknown move kind {self.kind!r}")
        if (self.kind == DOUBLE) != (self.second is not None):
            raise PreconditionViolation("MoveProposal", "double moves need exactly two reflections")
        if self.second is not None and not self.first[0] < self.second[0]:
            raise PreconditionViolation("MoveProposal", "second vertex must follow the first",
                                        i=self.first[0], j=self.second[0])

    @property
    def reflections(self) -> List[Tuple[int, Plane]]:
        return [self.first] if self.second is None else [self.first, self.second]


def propose_allowable_plane(walk: Walk, i: int, params: ThicknessParams, rng: np.random.Generator,
                            max_retries: Optional[int] = None) -> Plane:
    """
    Random plane through v_i whose reflection of the tail leaves an allowable angle at v_i.

    Normals are drawn uniformly and rejected until the angle holds, which samples the
    allowable set conditionally uniformly.
    """
    n = walk.n
    if not 1 <= i <= n - 1:
        raise PreconditionViolation("propose_allowable_plane", f"vertex index {i} outside 1..{n - 1}", index=i)
    retries = max_retries or config.MAX_PLANE_RETRIES
    v = walk.vertices
    pivot = v[i]
    incoming = v[i - 1] - pivot
    outgoing = v[i + 1] - pivot
    for _ in range(retries):
        normal = random_unit_vector(rng)
        reflected = outgoing - 2.0 * np.dot(outgoing, normal) * normal
        cosine = float(np.dot(incoming, reflected))
        if math.acos(min(1.0, max(-1.0, cosine))) >= params.theta_min:
            return Plane(pivot, normal)
    raise ProposalExhaustedError(i, retries)


def propose_move(walk: Walk, params: ThicknessParams, rng: np.random.Generator, kind: str,
                 max_retries: Optional[int] = None) -> Tuple[MoveProposal, Walk]:
    """Draw a move of ``kind`` and return it with the candidate walk it produces"""
    n = walk.n
    if kind == SINGLE:
        i = int(rng.integers(1, n))
        plane = propose_allowable_plane(walk, i, params, rng, max_retries)
        return MoveProposal(SINGLE, (i, plane)), reflect_tail(walk, i, plane)

    if kind != DOUBLE:
        raise PreconditionViolation("propose_move", f"unknown move kind {kind!r}")
    if n < 3:
        raise PreconditionViolation("propose_move", "double moves need n >= 3", n=n)
    i, j = sorted(int(k) for k in rng.choice(n - 1, size=2, replace=False) + 1)
    first = propose_allowable_plane(walk, i, params, rng, max_retries)
    once = reflect_tail(walk, i, first)
    # second plane is drawn against the once-reflected geometry
    second = propose_allowable_plane(once, j, params, rng, max_retries)
    return MoveProposal(DOUBLE, (i, first), (j, second)), reflect_tail(once, j, second)


def apply_move(walk: Walk, move: MoveProposal, inverse: bool = False) -> Walk:
    """Replay ``move``; ``inverse`` undoes it by reflecting tail-inward"""
    reflections = move.reflections
    for i, plane in (reversed(reflections) if inverse else reflections):
        walk = reflect_tail(walk, i, plane)
    return walk


def candidate_is_thick(candidate: Walk, params: ThicknessParams) -> bool:
    """Full check of a proposed walk: long range first, then every bend angle"""
    if params.r == 0:
        return True
    if not long_range_ok(candidate, params):
        return False
    return bool(bend_angles(candidate).min() >= params.theta_min)


def _attempt(walk: Walk, params: ThicknessParams, rng: np.random.Generator, kind: str,
             max_retries: Optional[int] = None) -> Tuple[Walk, bool, Optional[MoveProposal]]:
    try:
        move, candidate = propose_move(walk, params, rng, kind, max_retries)
    except ProposalExhaustedError:
        return walk, False, None
    if candidate_is_thick(candidate, params):
        return candidate, True, move
    return walk, False, move


def single_reflection_step(walk: Walk, params: ThicknessParams, rng: np.random.Generator,
                           max_retries: Optional[int] = None) -> Tuple[Walk, bool]:
    """One single-reflection step; a rejection returns ``walk`` itself"""
    new_walk, accepted, _ = _attempt(walk, params, rng, SINGLE, max_retries)
    return new_walk, accepted


def double_reflection_step(walk: Walk, params: ThicknessParams, rng: np.random.Generator,
                           max_retries: Optional[int] = None) -> Tuple[Walk, bool]:
    """One double-reflection step at two distinct vertices i < j"""
    new_walk, accepted, _ = _attempt(walk, params, rng, DOUBLE, max_retries)
    return new_walk, accepted


class ReflectionChain:
    """
    Stateful reflection chain.

    Starts from the straight walk unless given a thick starting walk. Every proposal is
    counted in ``stats``, including those abandoned because no allowable plane was found.
    """

    def __init__(self, chain_config: ChainConfig, walk: Optional[Walk] = None,
                 rng: Optional[np.random.Generator] = None, renormalize_every: Optional[int] = None):
        self.config = chain_config
        self.params = ThicknessParams(chain_config.r)
        self.rng = rng if rng is not None else chain_rng(chain_config)
        self.walk = walk if walk is not None else straight_walk(chain_config.n)
        if self.walk.n != chain_config.n:
            raise PreconditionViolation("ReflectionChain", "starting walk has the wrong length",
                                        expected=chain_config.n, got=self.walk.n)
        self.stats = ChainStats()
        self.renormalize_every = renormalize_every or config.RENORMALIZE_EVERY
        self.last_move: Optional[MoveProposal] = None
        self._accepted_since_renormalize = 0

    def _next_kind(self) -> str:
        if self.config.n < 3:
            return SINGLE
        return SINGLE if self.rng.random() < self.config.move_mix else DOUBLE

    def step(self) -> bool:
        """Propose one move and accept or reject it"""
        kind = self._next_kind()
        new_walk, accepted, move = _attempt(self.walk, self.params, self.rng, kind,
                                            self.config.max_plane_retries)
        if move is None:
            self.stats.exhausted += 1
        self.stats.record(accepted)
        if accepted:
            self.walk = new_walk
            self.last_move = move
            self._accepted_since_renormalize += 1
            if self._accepted_since_renormalize >= self.renormalize_every:
                self.walk = self.walk.renormalized()
                self.stats.renormalizations += 1
                self._accepted_since_renormalize = 0
        return accepted

    def advance(self, accepted_moves: int) -> int:
        """Step until ``accepted_moves`` more moves were accepted; returns the proposals used"""
        proposals = 0
        remaining = accepted_moves
        while remaining > 0:
            proposals += 1
            if self.step():
                remaining -= 1
        return proposals

    def run_proposals(self, proposals: int) -> None:
        for _ in range(proposals):
            self.step()

    def samples(self) -> Iterator[Walk]:
        """Burn in, then yield one walk every ``stride`` accepted moves"""
        self.advance(self.config.burn_in)
        for _ in range(self.config.samples):
            self.advance(self.config.stride)
            yield self.walk

    def reset_stats(self) -> None:
        self.stats = ChainStats()


def run_chain(chain_config: ChainConfig) -> Tuple[List[Walk], ChainStats]:
    """Run a chain from the straight walk and collect its samples"""
    chain = ReflectionChain(chain_config)
    sentry_logger.info(
        'Chain started',
        attributes={
            'chain.n': chain_config.n,
            'chain.r': chain_config.r,
            'chain.seed': chain_config.seed,
            'chain.index': chain_config.chain_index,
            'chain.samples': chain_config.samples,
        }
    )
    walks = list(chain.samples())
    sentry_logger.info(
        'Chain finished',
        attributes={
            'chain.n': chain_config.n,
            'chain.r': chain_config.r,
            'chain.proposed': chain.stats.proposed,
            'chain.accepted': chain.stats.accepted,
            'chain.acceptance_rate': chain.stats.acceptance_rate,
        }
    )
    return walks, chain.stats


def measure_acceptance(n: int, r: float, proposals: int, seed: int, burn_in: Optional[int] = None,
                       move_mix: Optional[float] = None) -> ChainStats:
    """Acceptance counts of ``proposals`` moves made after burn-in"""
    chain_config = ChainConfig(
        n=n,
        r=r,
        seed=seed,
        burn_in=burn_in,
        move_mix=config.MOVE_MIX if move_mix is None else move_mix,
    )
    chain = ReflectionChain(chain_config)
    chain.advance(chain_config.burn_in)
    chain.reset_stats()
    chain.run_proposals(proposals)
    logger.debug("acceptance n=%d r=%.2f: %d/%d", n, r, chain.stats.accepted, chain.stats.proposed)
    return chain.stats


def acceptance_table(lengths: Sequence[int], radii: Sequence[float], proposals_per_cell: int, seed: int,
                     burn_in: Optional[int] = None, move_mix: Optional[float] = None) -> Dict[Tuple[int, float], float]:
    """Acceptance percentage per (n, r), each cell from a fresh chain"""
    table = {}
    for n in lengths:
        for r in radii:
            stats = measure_acceptance(n, r, proposals_per_cell, seed, burn_in, move_mix)
            table[(n, r)] = 100.0 * stats.acceptance_rate
    return table
