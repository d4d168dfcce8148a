"""Finite-family convex potentials and the compatible-velocity submap.

Every verified chain anchored at ``(x_0, v_0)`` induces the affine function

    x  ->  <x - x_k, v_k> + sums[k]

whose supremum over all such chains would be the exact convex potential of the
map.  A :class:`SequenceFamily` keeps finitely many chains and uses the max of
their affine functions as a piecewise-affine lower model of that potential.
The model is convex by construction, vanishes at the anchor, and can only grow
as chains are added.  Velocities whose anchored inner product clears the model
value form the compatible submap; accepted pairs behave like subgradients of
the grown model, which :func:`subgradient_test` checks at probe points.
"""

from __future__ import annotations

import itertools
import json
from collections import deque

import numpy as np

from .chains import Chain, extension_slack, verify_chain
from .geometry import inner, nearest_point, support_argmax
from .setmaps import SetValuedMap

__all__ = [
    "DEFAULT_FAMILY_CAP",
    "SequenceFamily",
    "affine_value",
    "potential_value",
    "grow_family",
    "submap_select",
    "submap_contains",
    "subgradient_test",
    "build_family",
    "family_to_json_dict",
    "family_from_json_dict",
    "family_to_text",
    "family_from_text",
]

DEFAULT_FAMILY_CAP = 4096


def affine_value(chain: Chain, x) -> float:
    """Value at ``x`` of the affine function the chain induces."""
    x = np.asarray(x, dtype=float)
    return inner(x - chain.last_point, chain.last_velocity) + chain.last_sum


class SequenceFamily:
    """Finitely many verified chains sharing one anchor pair.

    ``members[0]`` is always the trivial one-pair chain ``[(x_0, v_0)]``, so
    the family value at the anchor is exactly zero: every other member's
    affine function is nonpositive there by its own chain inequality.

    ``box`` (a ``(low, high)`` pair) is the working box used for dominance
    pruning during growth; without one, growth only deduplicates.  ``tol`` is
    the verification tolerance members must meet; the default 0 keeps the
    anchor value exact.
    """

    __slots__ = ("anchor_point", "anchor_velocity", "members", "box", "tol", "cap")

    def __init__(self, anchor_point, anchor_velocity, members, box=None,
                 tol: float = 0.0, cap: int = DEFAULT_FAMILY_CAP):
        anchor_point = np.asarray(anchor_point, dtype=float)
        anchor_velocity = np.asarray(anchor_velocity, dtype=float)
        members = list(members)
        if not members:
            raise ValueError("a family needs at least its trivial member")
        trivial = members[0]
        if len(trivial) != 1 or not (
            np.array_equal(trivial.anchor_point, anchor_point)
            and np.array_equal(trivial.anchor_velocity, anchor_velocity)
        ):
            raise ValueError("members[0] must be the trivial anchor chain")
        for chain in members:
            if not (
                np.array_equal(chain.anchor_point, anchor_point)
                and np.array_equal(chain.anchor_velocity, anchor_velocity)
            ):
                raise ValueError("all members must share the anchor pair")
            ok, index = verify_chain(chain, tol)
            if not ok:
                raise ValueError(f"member fails the chain inequality at index {index}")
        if cap < 1:
            raise ValueError("cap must be positive")
        self.anchor_point = anchor_point
        self.anchor_velocity = anchor_velocity
        self.members = tuple(members)
        self.box = _check_box(box, anchor_point.shape[0])
        self.tol = float(tol)
        self.cap = int(cap)

    @classmethod
    def initial(cls, x0, v0, box=None, tol: float = 0.0,
                cap: int = DEFAULT_FAMILY_CAP) -> "SequenceFamily":
        """Family holding only the trivial chain."""
        return cls(x0, v0, [Chain([x0], [v0])], box=box, tol=tol, cap=cap)

    @classmethod
    def _trusted(cls, anchor_point, anchor_velocity, members, box, tol, cap):
        out = object.__new__(cls)
        out.anchor_point = anchor_point
        out.anchor_velocity = anchor_velocity
        out.members = tuple(members)
        out.box = box
        out.tol = tol
        out.cap = cap
        return out

    @property
    def dimension(self) -> int:
        return self.anchor_point.shape[0]

    def __len__(self) -> int:
        return len(self.members)

    def __repr__(self):
        return f"SequenceFamily({len(self.members)} chains, dim {self.dimension})"


def _check_box(box, dim):
    if box is None:
        return None
    low = np.asarray(box[0], dtype=float)
    high = np.asarray(box[1], dtype=float)
    if low.shape != (dim,) or high.shape != (dim,):
        raise ValueError("box bounds must match the anchor dimension")
    if np.any(high < low):
        raise ValueError("box is inverted")
    return (low, high)


def _box_vertices(box):
    low, high = box
    vertices = sorted({tuple(c) for c in itertools.product(*zip(low, high))})
    return [np.array(v) for v in vertices]


def potential_value(family: SequenceFamily, x) -> float:
    """Lower-model potential: max of member affine values at ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (family.dimension,):
        raise ValueError(f"dimension mismatch: {x.shape} vs ({family.dimension},)")
    return max(affine_value(chain, x) for chain in family.members)


def grow_family(family: SequenceFamily, chain: Chain) -> SequenceFamily:
    """Family extended by a chain and all its prefixes.

    The chain must share the family anchor and verify at the family tolerance.
    Growth deduplicates exact repeats, prunes members whose affine function
    another member dominates at every vertex of the working box (domination on
    the vertices is domination on the whole box), and finally evicts oldest
    members (never the trivial one) down to the cap.  At points of the working
    box the grown family's value never drops below the old one.
    """
    if not (
        np.array_equal(chain.anchor_point, family.anchor_point)
        and np.array_equal(chain.anchor_velocity, family.anchor_velocity)
    ):
        raise ValueError("chain anchor does not match the family anchor")
    ok, index = verify_chain(chain, family.tol)
    if not ok:
        raise ValueError(f"chain fails the chain inequality at index {index}")

    members = list(family.members)
    seen = {(c.xs.tobytes(), c.vs.tobytes()) for c in members}
    for count in range(1, len(chain) + 1):
        prefix = chain.prefix(count)
        key = (prefix.xs.tobytes(), prefix.vs.tobytes())
        if key not in seen:
            seen.add(key)
            members.append(prefix)

    if family.box is not None and len(members) > 1:
        vertices = _box_vertices(family.box)
        V = np.array([[affine_value(c, vtx) for vtx in vertices] for c in members])
        geq = np.all(V[:, None, :] >= V[None, :, :], axis=2)
        gt = np.any(V[:, None, :] > V[None, :, :], axis=2)
        m = len(members)
        earlier = np.arange(m)[:, None] < np.arange(m)[None, :]
        dom = geq & (gt | earlier)
        np.fill_diagonal(dom, False)
        drop = dom.any(axis=0)
        drop[0] = False  # the trivial member is load-bearing
        members = [c for c, d in zip(members, drop) if not d]

    while len(members) > family.cap:
        members.pop(1)  # oldest non-trivial first

    return SequenceFamily._trusted(
        family.anchor_point, family.anchor_velocity, members,
        family.box, family.tol, family.cap,
    )


def submap_select(family: SequenceFamily, svmap: SetValuedMap, x, tol: float = 0.0):
    """Support-maximizing velocity at ``x`` if it clears the model, else None.

    The candidate is ``support_argmax(x - x_0, F(x))`` (nearest to the anchor
    velocity when ``x`` is the anchor itself, where any value clears a zero
    bound).  It is returned iff ``<x - x_0, candidate> >= potential - tol``.
    """
    x = np.asarray(x, dtype=float)
    values = svmap.eval(x)
    if np.array_equal(x, family.anchor_point):
        v = nearest_point(family.anchor_velocity, values)
    else:
        v = support_argmax(x - family.anchor_point, values)
    if inner(x - family.anchor_point, v) >= potential_value(family, x) - tol:
        return v
    return None


def submap_contains(family: SequenceFamily, svmap: SetValuedMap, x, v,
                    tol: float = 0.0) -> bool:
    """Whether ``v`` is a compatible velocity at ``x``.

    ``v`` must be an exact value of the map at ``x``; the test is then
    ``<x - x_0, v> >= potential - tol``.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if not svmap.eval(x).contains(v):
        raise ValueError("velocity is not a value of the map at x")
    return inner(x - family.anchor_point, v) >= potential_value(family, x) - tol


def subgradient_test(family: SequenceFamily, x, v, probes, tol: float = 0.0) -> bool:
    """Check that an accepted pair acts as a subgradient of the grown model.

    The best member at ``x`` is extended by ``(x, v)`` and the family grown
    with it; the test passes when at every probe ``y``

        potential(grown, y) >= potential(family, x) + <v, y - x> - tol.

    Growing raises when the pair was not actually compatible (the extension
    then fails the chain inequality), surfacing precondition violations.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    vals = [affine_value(chain, x) for chain in family.members]
    base = max(vals)
    best = family.members[vals.index(base)]
    grown = grow_family(family, best.extended(x, v))
    for y in probes:
        y = np.asarray(y, dtype=float)
        if potential_value(grown, y) < base + inner(v, y - x) - tol:
            return False
    return True


def build_family(svmap: SetValuedMap, x0, v0, grid_points, max_length: int,
                 box=None, cap: int = DEFAULT_FAMILY_CAP, budget: int = 10**6,
                 tol: float = 0.0):
    """Grow a family from every verified chain discoverable over a grid.

    Breadth-first enumeration of chains anchored at ``(x0, v0)`` whose points
    run over ``grid_points`` and whose extension slacks stay nonnegative (so
    every member verifies exactly, whatever ``tol`` the family carries).
    Enumeration stops quietly once ``budget`` slack evaluations are spent; the
    family built so far is returned along with a stats dictionary.  A
    heuristic constructor: richer families give tighter models, and any
    verified chain may be grown in afterwards.
    """
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if not svmap.eval(x0).contains(v0):
        raise ValueError("anchor velocity not in F(x0)")
    pts = [np.asarray(p, dtype=float) for p in grid_points]
    values = [svmap.eval(p).points for p in pts]
    family = SequenceFamily.initial(x0, v0, box=box, tol=tol, cap=cap)
    used = 0
    grown = 0
    exhausted = False
    queue = deque([Chain([x0], [v0])])
    while queue and not exhausted:
        chain = queue.popleft()
        for j, x_next in enumerate(pts):
            for v in values[j]:
                used += 1
                if used > budget:
                    exhausted = True
                    break
                if extension_slack(chain, x_next, v) >= 0.0:
                    child = chain.extended(x_next, v)
                    family = grow_family(family, child)
                    grown += 1
                    if len(child) < max_length:
                        queue.append(child)
            if exhausted:
                break
    stats = {"chains_grown": grown, "evaluations": used, "budget_exhausted": exhausted}
    return family, stats


# ---------------------------------------------------------------------------
# serialization

def family_to_json_dict(family: SequenceFamily) -> dict:
    return {
        "anchor_point": family.anchor_point.tolist(),
        "anchor_velocity": family.anchor_velocity.tolist(),
        "tol": family.tol,
        "cap": family.cap,
        "box": None if family.box is None else {
            "low": family.box[0].tolist(),
            "high": family.box[1].tolist(),
        },
        "members": [chain.to_dict() for chain in family.members],
    }


def family_from_json_dict(d) -> SequenceFamily:
    box = None
    if d.get("box") is not None:
        box = (d["box"]["low"], d["box"]["high"])
    return SequenceFamily(
        d["anchor_point"],
        d["anchor_velocity"],
        [Chain.from_dict(c) for c in d["members"]],
        box=box,
        tol=d.get("tol", 0.0),
        cap=d.get("cap", DEFAULT_FAMILY_CAP),
    )


def family_to_text(family: SequenceFamily) -> str:
    return json.dumps(family_to_json_dict(family), indent=2) + "\n"


def family_from_text(text: str) -> SequenceFamily:
    return family_from_json_dict(json.loads(text))
