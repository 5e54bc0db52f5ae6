'''
Finite bi-relational models: forcing, frame checks, countermodel extraction
and a bounded brute-force oracle.

Relations are numpy boolean matrices indexed by world number; a valuation
maps each atom to a boolean vector over the worlds. Forcing is computed for
all worlds at once.
'''

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from dotenv import dotenv_values

from app.backend.utils.calculus import AxiomaticInputError, Logic, SaturationLevel, saturation_level
from app.backend.utils.formula import And, Atom, Bot, Box, Dia, Imp, Or, Top, atoms
from app.backend.utils.sequent import (
    Relation, Sequent, descendants, mod_step, render_position,
)

logger = logging.getLogger(__name__)

config = dotenv_values('.env')
ORACLE_BOUND = int(config.get("ORACLE_BOUND", 3))
MAX_ORACLE_WORLDS = 4

PROPERTIES = ("preorder", "heredity", "fc", "dc", "serial", "reflexive", "transitive")


class UnknownWorldError(KeyError):
    pass


class NotSaturatedError(ValueError):
    pass


class MalformedModelError(ValueError):
    pass


@dataclass(eq=False)
class Model:
    """
    A finite model (W, ≤, R, V).

    Attributes:
        worlds: World ids, in index order
        le: n x n boolean matrix, le[i, j] iff worlds[i] ≤ worlds[j]
        r: n x n boolean matrix, r[i, j] iff R worlds[i] worlds[j]
        val: Atom name to boolean vector over the worlds
    """
    worlds: list
    le: np.ndarray
    r: np.ndarray
    val: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.worlds)
        self.le = np.asarray(self.le, dtype=bool).reshape(n, n)
        self.r = np.asarray(self.r, dtype=bool).reshape(n, n)
        self.val = {p: np.asarray(v, dtype=bool).reshape(n) for p, v in self.val.items()}
        self._index = {w: i for i, w in enumerate(self.worlds)}

    @classmethod
    def from_relations(cls, worlds, le_pairs, r_pairs, val_sets):
        """Build a model from world ids, relation pairs and atom -> set of world ids."""
        worlds = list(worlds)
        index = {w: i for i, w in enumerate(worlds)}
        if len(index) != len(worlds):
            raise MalformedModelError("world ids must be distinct")

        def lookup(w):
            if w not in index:
                raise MalformedModelError(f"unknown world {w!r}")
            return index[w]

        n = len(worlds)
        le, r = np.zeros((n, n), dtype=bool), np.zeros((n, n), dtype=bool)
        for a, b in le_pairs:
            le[lookup(a), lookup(b)] = True
        for a, b in r_pairs:
            r[lookup(a), lookup(b)] = True
        val = {}
        for p, members in val_sets.items():
            vec = np.zeros(n, dtype=bool)
            for w in members:
                vec[lookup(w)] = True
            val[p] = vec
        return cls(worlds, le, r, val)

    @property
    def size(self):
        return len(self.worlds)

    def index(self, w):
        try:
            return self._index[w]
        except KeyError:
            raise UnknownWorldError(w) from None

    def le_pairs(self):
        return [(self.worlds[i], self.worlds[j]) for i, j in np.argwhere(self.le)]

    def r_pairs(self):
        return [(self.worlds[i], self.worlds[j]) for i, j in np.argwhere(self.r)]

    def valuation(self, p):
        vec = self.val.get(p)
        if vec is None:
            return set()
        return {self.worlds[i] for i in np.flatnonzero(vec)}


# ---------------------------------------------------------------------------
# Forcing
# ---------------------------------------------------------------------------

def _exists(rel, vec):
    """For each world x: some y with rel[x, y] has vec[..., y]."""
    return (vec.astype(np.int64) @ np.swapaxes(rel, -1, -2).astype(np.int64)) > 0


def _truth(f, le, r, val, shape, cache):
    hit = cache.get(f)
    if hit is not None:
        return hit
    if isinstance(f, Atom):
        v = val.get(f.name)
        result = np.zeros(shape, dtype=bool) if v is None else np.broadcast_to(v, shape)
    elif isinstance(f, Top):
        result = np.ones(shape, dtype=bool)
    elif isinstance(f, Bot):
        result = np.zeros(shape, dtype=bool)
    elif isinstance(f, And):
        result = _truth(f.left, le, r, val, shape, cache) & _truth(f.right, le, r, val, shape, cache)
    elif isinstance(f, Or):
        result = _truth(f.left, le, r, val, shape, cache) | _truth(f.right, le, r, val, shape, cache)
    elif isinstance(f, Imp):
        bad = _truth(f.left, le, r, val, shape, cache) & ~_truth(f.right, le, r, val, shape, cache)
        result = ~_exists(le, bad)
    elif isinstance(f, Box):
        result = ~_exists(r, ~_truth(f.body, le, r, val, shape, cache))
    elif isinstance(f, Dia):
        result = _exists(r, _truth(f.body, le, r, val, shape, cache))
    else:
        raise TypeError(f"Not a formula: {f!r}")
    cache[f] = result
    return result


def truth_vector(m, f, cache=None):
    """Boolean vector: which worlds of m force f."""
    return _truth(f, m.le, m.r, m.val, (m.size,), {} if cache is None else cache)


def forces(m, w, f):
    """
    Local forcing: [] and <> look along R only, -> looks along ≤.

    Raises:
        UnknownWorldError: if w is not a world of m
    """
    return bool(truth_vector(m, f)[m.index(w)])


def sequent_vector(m, s, cache=None):
    """Which worlds force the sequent s (blocks included)."""
    cache = {} if cache is None else cache
    n = m.size
    holds = np.ones(n, dtype=bool)
    for f in s.ant:
        holds &= truth_vector(m, f, cache)
    result = ~holds
    for f in s.forms:
        result |= truth_vector(m, f, cache)
    for b in s.imps:
        result |= ~_exists(m.le, ~sequent_vector(m, b, cache))
    for b in s.mods:
        result |= ~_exists(m.r, ~sequent_vector(m, b, cache))
    return result


def forces_sequent(m, w, s):
    """The empty sequent is never forced."""
    return bool(sequent_vector(m, s)[m.index(w)])


# ---------------------------------------------------------------------------
# Frame properties
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameCheck:
    ok: bool
    witness: Optional[tuple] = None


def _first(mask):
    hits = np.argwhere(mask)
    return None if len(hits) == 0 else tuple(int(i) for i in hits[0])


def _relation_violation(le, r, prop):
    """Index tuple of the first violation of a relational property, or None."""
    if prop == "preorder":
        refl = _first(~np.diag(le))
        if refl is not None:
            return refl * 3
        return _first(le[:, :, None] & le[None, :, :] & ~le[:, None, :])
    if prop == "fc":
        # x ≤ x', R x y, no y' with R x' y' and y ≤ y'
        reach = _exists(le, r)
        return _first(le[:, :, None] & r[:, None, :] & ~reach[None, :, :])
    if prop == "dc":
        # x ≤ x', R x' y, no y' with R x y' and y' ≤ y
        down = (r.astype(np.int64) @ le.astype(np.int64)) > 0
        return _first(le[:, :, None] & r[None, :, :] & ~down[:, None, :])
    if prop == "serial":
        return _first(~r.any(axis=1))
    if prop == "reflexive":
        return _first(~np.diag(r))
    if prop == "transitive":
        return _first(r[:, :, None] & r[None, :, :] & ~r[:, None, :])
    raise ValueError(f"Unknown frame property: {prop}")


def check_frame(m, props=None):
    """
    Check frame properties of m.

    Args:
        m: The model
        props: Subset of PROPERTIES; all of them when None

    Returns:
        Dict from property name to FrameCheck; a failed check carries the
        world ids of the first violation (a triple for fc, dc, preorder and
        transitive, (atom, w, w') for heredity, a single world otherwise)
    """
    report = {}
    for prop in (PROPERTIES if props is None else props):
        witness = None
        if prop == "heredity":
            for p in sorted(m.val):
                v = m.val[p]
                hit = _first(v[:, None] & m.le & ~v[None, :])
                if hit is not None:
                    witness = (p,) + tuple(m.worlds[i] for i in hit)
                    break
        else:
            hit = _relation_violation(m.le, m.r, prop)
            if hit is not None:
                witness = tuple(m.worlds[i] for i in hit)
        report[prop] = FrameCheck(witness is None, witness)
    return report


def frame_properties(logic):
    """Properties every model of the logic's frame class has."""
    logic = Logic(logic)
    props = ["preorder", "heredity", "fc", "dc"]
    if logic is Logic.LIKD:
        props.append("serial")
    elif logic is Logic.LIKT:
        props.append("reflexive")
    return tuple(props)


def is_model_of(m, logic):
    return all(c.ok for c in check_frame(m, frame_properties(logic)).values())


# ---------------------------------------------------------------------------
# Countermodels
# ---------------------------------------------------------------------------

def _confluent_order(base, r):
    """
    Greatest relation inside base that satisfies FC and DC against r.

    It is reflexive and transitive whenever base is; on trees without
    loops it coincides with structural inclusion.
    """
    le = base.copy()
    r_int = r.astype(np.int64)
    while True:
        # above[y, v]: some R-successor of v lies above y; below[u, y']: some R-successor of u lies below y'
        above = (le.astype(np.int64) @ r_int.T) > 0
        below = (r_int @ le.astype(np.int64)) > 0
        fc_fail = (r_int @ (~above).astype(np.int64)) > 0
        dc_fail = ((~below).astype(np.int64) @ r_int.T) > 0
        narrowed = le & ~fc_fail & ~dc_fail
        if np.array_equal(narrowed, le):
            return le
        le = narrowed


def extract_countermodel(leaf, logic=Logic.LIK, level=SaturationLevel.GLOBAL):
    """
    Read a finite model off a saturated sequent.

    Worlds are the positions of every sequent nested in the leaf and R links
    a sequent to its modal blocks. Under LIKD worlds without modal blocks get
    a loop, under LIKT every world does. ≤ is the greatest order contained
    in antecedent inclusion that is forward and downward confluent for R;
    without loops that is structural inclusion.

    Args:
        leaf: The sequent
        logic: The logic
        level: Saturation level the leaf must reach

    Raises:
        NotSaturatedError: if the leaf is axiomatic or below level
    """
    logic = Logic(logic)
    try:
        reached = saturation_level(leaf, logic)
    except AxiomaticInputError as e:
        raise NotSaturatedError(f"leaf is axiomatic: {e}") from e
    if reached < level:
        raise NotSaturatedError(f"leaf is only {reached.name}-saturated")

    nested = descendants(leaf, Relation.PLUS)
    worlds = [render_position(pos) for pos, _ in nested]
    n = len(nested)
    index = {pos: i for i, (pos, _) in enumerate(nested)}
    r = np.zeros((n, n), dtype=bool)
    for pos, t in nested:
        for k in range(len(t.mods)):
            r[index[pos], index[pos + (mod_step(k),)]] = True
        if (logic is Logic.LIKD and not t.mods) or logic is Logic.LIKT:
            r[index[pos], index[pos]] = True
    base = np.array([[set(a.ant) <= set(b.ant) for _, b in nested] for _, a in nested], dtype=bool)
    le = _confluent_order(base, r)
    names = sorted({f.name for _, t in nested for f in t.ant if isinstance(f, Atom)})
    val = {p: np.array([Atom(p) in t.ant for _, t in nested], dtype=bool) for p in names}
    model = Model(worlds, le, r, val)
    logger.debug("extracted %d-world countermodel", n)
    return model


def verify_countermodel(m, logic, root, goal):
    """
    Re-check an emitted countermodel.

    Args:
        m: The model
        logic: Logic whose frame class m must belong to
        root: World that must refute the goal
        goal: A Formula or a Sequent

    Returns:
        Dict with per-property results, whether root refutes the goal, and
        an overall ok flag
    """
    frame = {prop: c.ok for prop, c in check_frame(m, frame_properties(logic)).items()}
    if isinstance(goal, Sequent):
        refutes = not forces_sequent(m, root, goal)
    else:
        refutes = not forces(m, root, goal)
    return {"frame": frame, "refutes": refutes, "ok": refutes and all(frame.values())}


# ---------------------------------------------------------------------------
# Bounded oracle
# ---------------------------------------------------------------------------

@dataclass
class BruteForceResult:
    falsified: bool
    bound: int
    model: Optional[Model] = None
    world: Optional[str] = None

    @property
    def status(self):
        return "falsified" if self.falsified else "no-countermodel-up-to-bound"


def _bits(count, width):
    return ((np.arange(count)[:, None] >> np.arange(width)) & 1).astype(bool)


def _preorders(n):
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    result = []
    for row in _bits(2 ** len(off), len(off)):
        le = np.eye(n, dtype=bool)
        for bit, (i, j) in zip(row, off):
            le[i, j] = bit
        if _relation_violation(le, le, "preorder") is None:
            result.append(le)
    return result


def _up_sets(le):
    n = le.shape[0]
    cands = _bits(2 ** n, n)
    leaks = (cands[:, :, None] & le[None, :, :] & ~cands[:, None, :]).any(axis=(1, 2))
    return cands[~leaks]


@lru_cache(maxsize=None)
def _frames(n, logic):
    """(le, batch of R, up-sets) per preorder on n worlds, R filtered by the frame class."""
    logic = Logic(logic)
    rs = _bits(2 ** (n * n), n * n).reshape(-1, n, n)
    idx = np.arange(n)
    if logic is Logic.LIKT:
        rs = rs[rs[:, idx, idx].all(axis=1)]
    elif logic is Logic.LIKD:
        rs = rs[rs.any(axis=2).all(axis=1)]
    frames = []
    for le in _preorders(n):
        reach = (rs.astype(np.int64) @ le.T.astype(np.int64)) > 0
        fc_fail = (le[None, :, :, None] & rs[:, :, None, :] & ~reach[:, None, :, :]).any(axis=(1, 2, 3))
        down = (rs.astype(np.int64) @ le.astype(np.int64)) > 0
        dc_fail = (le[None, :, :, None] & rs[:, None, :, :] & ~down[:, :, None, :]).any(axis=(1, 2, 3))
        good = rs[~(fc_fail | dc_fail)]
        if len(good):
            frames.append((le, good, _up_sets(le)))
    logger.debug("%d preorders with admissible R on %d worlds for %s", len(frames), n, logic.value)
    return frames


def brute_force_status(f, logic=Logic.LIK, max_worlds=None):
    """
    Look for a countermodel of f with at most max_worlds worlds.

    Models are enumerated in a fixed order (world count, ≤, R, valuation)
    and the first falsifying (model, world) is returned. Not finding one
    does not certify validity.

    Args:
        f: The formula
        logic: Frame class to enumerate
        max_worlds: Bound, at most 4 (default ORACLE_BOUND from .env)

    Returns:
        BruteForceResult
    """
    logic = Logic(logic)
    bound = ORACLE_BOUND if max_worlds is None else int(max_worlds)
    if not 1 <= bound <= MAX_ORACLE_WORLDS:
        raise ValueError(f"max_worlds must be between 1 and {MAX_ORACLE_WORLDS}")
    names = atoms(f)
    for n in range(1, bound + 1):
        for le, rs, ups in _frames(n, logic):
            combos = list(itertools.product(range(len(ups)), repeat=len(names)))
            grid = np.array(combos, dtype=int).reshape(len(combos), len(names))
            val = {p: ups[grid[:, i]] for i, p in enumerate(names)}
            chunk = max(1, 2_000_000 // (len(grid) * n))
            for start in range(0, len(rs), chunk):
                batch = rs[start:start + chunk]
                truth = _truth(f, le, batch, val, (len(batch), len(grid), n), {})
                hit = _first(~truth)
                if hit is None:
                    continue
                k, v, w = hit
                worlds = [f"w{i}" for i in range(n)]
                model = Model(worlds, le, batch[k], {p: ups[grid[v, i]] for i, p in enumerate(names)})
                logger.info("%s falsified at %s of a %d-world model", f, worlds[w], n)
                return BruteForceResult(True, bound, model, worlds[w])
    return BruteForceResult(False, bound)


# ---------------------------------------------------------------------------
# Random models
# ---------------------------------------------------------------------------

def _transitive_closure(rel):
    rel = rel.copy()
    for k in range(rel.shape[0]):
        rel |= rel[:, k:k + 1] & rel[k:k + 1, :]
    return rel


def random_model(rng, logic=Logic.LIK, atom_names=("p", "q", "r"), max_worlds=4, max_tries=200):
    """
    Sample a model of the logic's frame class.

    ≤ is the reflexive-transitive closure of a random DAG, R is uniform,
    valuations are closed upwards, and samples failing FC or DC are
    rejected. After max_tries rejections the discrete order is used, which
    makes FC and DC hold trivially.
    """
    logic = Logic(logic)
    for _ in range(max_tries):
        n = int(rng.integers(1, max_worlds + 1))
        eye = np.eye(n, dtype=bool)
        perm = rng.permutation(n)
        dag = np.triu(rng.random((n, n)) < 0.35, k=1)[np.ix_(perm, perm)]
        le = _transitive_closure(dag | eye)
        r = rng.random((n, n)) < 0.3
        if logic is Logic.LIKT:
            r |= eye
        elif logic is Logic.LIKD:
            for i in np.flatnonzero(~r.any(axis=1)):
                r[i, rng.integers(n)] = True
        if _relation_violation(le, r, "fc") is None and _relation_violation(le, r, "dc") is None:
            break
    else:
        logger.warning("random_model: %d samples rejected, using the discrete order", max_tries)
        le = eye
    val = {p: (rng.random(n) < 0.5).astype(np.int64) @ le.astype(np.int64) > 0 for p in atom_names}
    return Model([f"w{i}" for i in range(n)], le, r, val)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def model_to_json(m):
    """{worlds: [...], le: [[a, b], ...], r: [[a, b], ...], val: {p: [...]}}"""
    return {
        "worlds": list(m.worlds),
        "le": [list(pair) for pair in m.le_pairs()],
        "r": [list(pair) for pair in m.r_pairs()],
        "val": {p: [m.worlds[i] for i in np.flatnonzero(m.val[p])] for p in sorted(m.val)},
    }


def model_from_json(data):
    """
    Raises:
        MalformedModelError: on missing keys, bad pairs or unknown worlds
    """
    if not isinstance(data, dict):
        raise MalformedModelError("model JSON must be an object")
    missing = [key for key in ("worlds", "le", "r") if key not in data]
    if missing:
        raise MalformedModelError(f"model JSON lacks {', '.join(missing)}")
    if not isinstance(data["worlds"], list) or not all(isinstance(w, str) for w in data["worlds"]):
        raise MalformedModelError("worlds must be a list of strings")
    for key in ("le", "r"):
        if not all(isinstance(pair, (list, tuple)) and len(pair) == 2 for pair in data[key]):
            raise MalformedModelError(f"{key} must be a list of [world, world] pairs")
    val = data.get("val", {})
    if not isinstance(val, dict):
        raise MalformedModelError("val must map atoms to lists of worlds")
    return Model.from_relations(data["worlds"], data["le"], data["r"], val)
