import enum
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from irswpcn.linalg import DimensionError

logger = logging.getLogger(__name__)


class GroupingTag(enum.Enum):
    # Strided over the strength order: each cluster spans strong to weak users.
    LCSD = "lcsd"
    # Contiguous blocks of the strength order.
    SCSD = "scsd"
    RANDOM = "random"


@dataclass(frozen=True)
class GroupingScheme:
    tag: GroupingTag
    seed: Optional[int] = None

    @classmethod
    def parse(cls, text, seed=None):
        try:
            return cls(GroupingTag(text.lower()), seed)
        except ValueError:
            raise ValueError(f"unknown grouping scheme {text!r}")

    @property
    def name(self):
        return self.tag.value


def strength_order(chans):
    """Flat user indices by descending uplink channel norm, ties by index."""
    norms = np.linalg.norm(chans.h, axis=1)
    return [int(i) for i in np.argsort(-norms, kind="stable")]


def group_users(chans, scheme: GroupingScheme, K, sizes: Sequence[int]):
    """
    Partition the M users of `chans` into K clusters of the given sizes.
    Returns a tuple of K tuples of flat user indices.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) != K or sum(sizes) != chans.M or min(sizes, default=0) < 1:
        raise DimensionError(
            f"cluster sizes {sizes} do not split {chans.M} users into {K} clusters"
        )
    if scheme.tag is GroupingTag.RANDOM:
        rng = np.random.default_rng(scheme.seed)
        order = [int(i) for i in rng.permutation(chans.M)]
    else:
        order = strength_order(chans)

    if scheme.tag is GroupingTag.LCSD:
        clusters = [[] for _ in range(K)]
        k = 0
        for user in order:
            while len(clusters[k]) == sizes[k]:
                k = (k + 1) % K
            clusters[k].append(user)
            k = (k + 1) % K
    else:
        bounds = np.cumsum([0] + sizes)
        clusters = [order[bounds[k] : bounds[k + 1]] for k in range(K)]
    assignment = tuple(tuple(c) for c in clusters)
    logger.debug(f"{scheme.name} grouping: {assignment}")
    return assignment
