"""2-opt local search, optionally restricted to a window of tour positions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .instance import Instance, Tour, check_permutation
from .rng import SplitMix64


@dataclass(frozen=True)
class TwoOptParams:
    probability: float = 0.001
    window: int = 0  # 0 = unbounded
    strategy: str = "first-improvement"

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must lie in [0, 1]")
        if self.window < 0:
            raise ValueError("window must be >= 0")
        if self.strategy != "first-improvement":
            raise ValueError(f"unsupported 2-opt strategy {self.strategy!r}")


def two_opt(inst: Instance, tour: Tour, params: TwoOptParams | int = 0, *, backend=None) -> Tour:
    """Run first-improvement 2-opt to a local optimum; the input is not modified.

    A move at positions i < j reverses order[i+1..j]. With a window W > 0 only
    pairs with j - i <= W are tried and the wrap-around pairs are not.
    """
    window = params.window if isinstance(params, TwoOptParams) else int(params)
    order = np.array(check_permutation(tour.order, inst.n), dtype=np.int32)
    k = backend or _backend.kernels
    k.two_opt_inplace(order, inst.dist_matrix, inst.coords, window)
    return Tour.of(inst, order)


def maybe_two_opt(inst: Instance, tour: Tour, params: TwoOptParams, rng: SplitMix64, *, backend=None) -> Tour:
    """With probability ``params.probability`` return two_opt(tour), else ``tour``.

    Always consumes exactly one draw from ``rng``.
    """
    if rng.random() < params.probability:
        return two_opt(inst, tour, params, backend=backend)
    return tour

