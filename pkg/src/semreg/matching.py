"""Per-class nearest-neighbour matching with Lowe's ratio test."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .descriptors import NormStats, condition_class
from .features import FeatureSet

DEFAULT_RATIO = 0.7


@dataclass
class MatchSet:
    """Pooled correspondences: query keypoint -> reference keypoint."""

    query_kp: np.ndarray    # (n, 2)
    ref_kp: np.ndarray      # (n, 2)
    class_ids: np.ndarray   # (n,)
    distances: np.ndarray   # (n,) descriptor distances of the accepted matches
    skipped_classes: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.query_kp)

    @property
    def counts_per_class(self) -> Dict[int, int]:
        ids, counts = np.unique(self.class_ids, return_counts=True)
        return dict(zip(ids.tolist(), counts.tolist()))

    def dump(self) -> str:
        """Diagnostics text, one line per pair: class qx qy rx ry dist."""
        lines = [
            f"{c} {qx!r} {qy!r} {rx!r} {ry!r} {d!r}"
            for c, (qx, qy), (rx, ry), d in zip(
                self.class_ids.tolist(), self.query_kp.tolist(),
                self.ref_kp.tolist(), self.distances.tolist())
        ]
        return "\n".join(lines)


def _empty_match_set() -> MatchSet:
    return MatchSet(np.empty((0, 2)), np.empty((0, 2)),
                    np.empty(0, dtype=np.int64), np.empty(0))


def match_class(query_desc: np.ndarray, ref_desc: np.ndarray,
                ratio: float = DEFAULT_RATIO) -> List[Tuple[int, int, float]]:
    """One-directional NN match of query rows against reference rows.

    Accepts a match only when d1/d2 < ratio (strict); ties on distance are
    broken by the lowest reference index, and d2 == 0 (duplicate reference
    descriptors) rejects the query.  Returns (query_idx, ref_idx, d1).
    """
    q = np.asarray(query_desc, dtype=np.float64)
    r = np.asarray(ref_desc, dtype=np.float64)
    if len(r) < 2:
        raise ValueError("reference set needs at least 2 descriptors")
    # squared distances, clipped against tiny negative rounding
    d2mat = np.maximum(
        (q * q).sum(1)[:, None] + (r * r).sum(1)[None, :] - 2.0 * q @ r.T, 0.0)
    order = np.argsort(d2mat, axis=1, kind="stable")
    first, second = order[:, 0], order[:, 1]
    rows = np.arange(len(q))
    d1 = np.sqrt(d2mat[rows, first])
    d2 = np.sqrt(d2mat[rows, second])
    matches = []
    for i in range(len(q)):
        if d2[i] == 0.0:
            continue
        if d1[i] / d2[i] < ratio:
            matches.append((i, int(first[i]), float(d1[i])))
    return matches


def match_all(query: FeatureSet, ref: FeatureSet,
              classes: Optional[Sequence[int]] = None,
              ratio: float = DEFAULT_RATIO, pca_target: int = 100,
              stats: NormStats | None = None) -> MatchSet:
    """Condition and match each class independently, then pool the pairs.

    Classes lacking at least 1 query and 2 reference descriptors contribute
    nothing and are recorded in skipped_classes.  Output ordering is by
    (class id, query index) regardless of execution order.
    """
    if classes is None:
        classes = sorted(set(query.labels.tolist()) | set(ref.labels.tolist()))
    qkp, rkp, cids, dists = [], [], [], []
    skipped: List[int] = []
    for cid in sorted(classes):
        qsel = query.labels == cid
        rsel = ref.labels == cid
        if qsel.sum() < 1 or rsel.sum() < 2:
            skipped.append(int(cid))
            continue
        qd, rd = condition_class(query.descriptors[qsel], ref.descriptors[rsel],
                                 target=pca_target, stats=stats)
        qk = query.keypoints[qsel]
        rk = ref.keypoints[rsel]
        for qi, ri, d in match_class(qd, rd, ratio=ratio):
            qkp.append(qk[qi])
            rkp.append(rk[ri])
            cids.append(int(cid))
            dists.append(d)
    if not qkp:
        out = _empty_match_set()
        out.skipped_classes = skipped
        return out
    return MatchSet(np.asarray(qkp), np.asarray(rkp),
                    np.asarray(cids, dtype=np.int64), np.asarray(dists),
                    skipped_classes=skipped)
