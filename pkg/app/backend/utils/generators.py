'''
Seeded random formulas, sequents and corpora for the property tests and
the `corpus --random` command.
'''

import logging

import numpy as np

from app.backend.utils.calculus import Logic
from app.backend.utils.formula import BOT, TOP, And, Atom, Box, Dia, Imp, Or, render
from app.backend.utils.logic_catalog import CorpusEntry, Expected
from app.backend.utils.sequent import Sequent

logger = logging.getLogger(__name__)

DEFAULT_ATOMS = ("p", "q", "r")

_BINARY = (And, Or, Imp)
_UNARY = (Box, Dia)


def _leaf(rng, atom_names):
    # constants are rarer than atoms
    roll = rng.random()
    if roll < 0.08:
        return TOP
    if roll < 0.16:
        return BOT
    return Atom(atom_names[int(rng.integers(len(atom_names)))])


def _grow(rng, atom_names, degree, budget):
    if budget == 0:
        return _leaf(rng, atom_names)
    choices = _BINARY + (_UNARY if degree > 0 else ())
    kind = choices[int(rng.integers(len(choices)))]
    if kind in _UNARY:
        return kind(_grow(rng, atom_names, degree - 1, budget - 1))
    left = int(rng.integers(budget))
    return kind(_grow(rng, atom_names, degree, left), _grow(rng, atom_names, degree, budget - 1 - left))


def random_formula(rng, atom_names=DEFAULT_ATOMS, max_degree=2, max_size=12):
    """
    Draw a formula with at most max_size connectives and modal degree at most max_degree.

    Args:
        rng: numpy Generator
        atom_names: Atoms to draw from
        max_degree: Bound on [] / <> nesting
        max_size: Bound on the number of connectives

    Returns:
        Formula
    """
    budget = int(rng.integers(max_size + 1))
    return _grow(rng, tuple(atom_names), max_degree, budget)


def random_corpus(seed, count, logic=Logic.LIK, atom_names=DEFAULT_ATOMS, max_degree=2, max_size=12):
    """CorpusEntry list with expected=unknown, reproducible from the seed."""
    rng = np.random.default_rng(seed)
    logic = Logic(logic)
    entries = [CorpusEntry(render(random_formula(rng, atom_names, max_degree, max_size)), logic, Expected.UNKNOWN)
               for _ in range(count)]
    logger.info("generated %d random %s entries from seed %s", count, logic.value, seed)
    return entries


def random_sequent(rng, atom_names=DEFAULT_ATOMS, depth=2, width=2, formula_size=3, imp_blocks=True):
    """
    Draw a set-mode bi-nested sequent.

    Each level gets up to `width` antecedent and succedent formulas and,
    while depth remains, up to `width` modal (and implication) blocks.
    """
    def draw(level):
        ant = [random_formula(rng, atom_names, 1, formula_size) for _ in range(int(rng.integers(width + 1)))]
        forms = [random_formula(rng, atom_names, 1, formula_size) for _ in range(int(rng.integers(width + 1)))]
        mods, imps = [], []
        if level > 0:
            mods = [draw(level - 1) for _ in range(int(rng.integers(width + 1)))]
            if imp_blocks:
                imps = [draw(level - 1) for _ in range(int(rng.integers(width)))]
        return Sequent(ant=tuple(ant), forms=tuple(forms), imps=tuple(imps), mods=tuple(dict.fromkeys(mods)))

    return draw(depth)
