"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from app.backend.utils.formula import BOT, TOP, And, Atom, Box, Dia, Imp, Or

ATOM_NAMES = ("p", "q", "r")


def formulas(max_leaves=8):
    """Hypothesis strategy for formulas over p, q, r."""
    leaves = st.one_of(st.sampled_from([Atom(a) for a in ATOM_NAMES]), st.just(TOP), st.just(BOT))
    return st.recursive(
        leaves,
        lambda children: st.one_of(
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Imp, children, children),
            st.builds(Box, children),
            st.builds(Dia, children),
        ),
        max_leaves=max_leaves,
    )
