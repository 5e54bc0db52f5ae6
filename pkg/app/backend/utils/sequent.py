'''
Bi-nested sequents: an antecedent of formulas and a succedent of formulas,
implication blocks <...> and modal blocks [...].

A Position is a path of (kind, index) steps from the root into nested
blocks. Blocks of the same kind are kept in creation order, and rules only
ever append blocks, so a position taken on a conclusion addresses the same
block in every premise.
'''

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput

from app.backend.utils.formula import (
    ASCII, BOT, LATEX, UNICODE, FORMULA_RULES, And, Box, Formula, FormulaBuilder, FormulaSyntaxError, Imp, Or,
    formula_sort_key, modal_degree, parse_formula, render, syntax_error_from,
)

logger = logging.getLogger(__name__)


class Mode(Enum):
    MULTISET = "multiset"
    SET = "set"


class BlockKind(Enum):
    IMP = "imp"
    MOD = "mod"


class Relation(Enum):
    IMP = "imp"
    MOD = "mod"
    PLUS = "plus"


class Step(NamedTuple):
    kind: BlockKind
    index: int


ROOT = ()


class InvalidPositionError(IndexError):
    """A position step is out of range or names the wrong block kind."""


class SequentSyntaxError(FormulaSyntaxError):
    pass


def _canonical(formulas):
    return tuple(sorted(set(formulas), key=formula_sort_key))


def _dedupe(blocks):
    seen = []
    for b in blocks:
        if b not in seen:
            seen.append(b)
    return tuple(seen)


@dataclass(frozen=True)
class Sequent:
    """
    A bi-nested sequent ant => forms, <imps>, [mods].

    In set mode the formula collections are duplicate-free and sorted by
    (size, rendering), and appended blocks are skipped when already present, so blocks stay in
    creation order.
    `origin` is only set on sequents produced by the annotated # operator
    and records the position of their source block in the root.
    """

    ant: tuple = ()
    forms: tuple = ()
    imps: tuple = ()
    mods: tuple = ()
    mode: Mode = Mode.SET
    origin: Optional[tuple] = None
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode is Mode.SET:
            object.__setattr__(self, "ant", _canonical(self.ant))
            object.__setattr__(self, "forms", _canonical(self.forms))
        else:
            object.__setattr__(self, "ant", tuple(self.ant))
            object.__setattr__(self, "forms", tuple(self.forms))
        object.__setattr__(self, "imps", tuple(self.imps))
        object.__setattr__(self, "mods", tuple(self.mods))
        object.__setattr__(self, "_hash", hash((self.ant, self.forms, self.imps, self.mods, self.mode, self.origin)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return render_sequent(self, ASCII)

    @property
    def suc(self):
        """The succedent as a list of Form / ImpBlock / ModBlock elements."""
        return ([Form(f) for f in self.forms]
                + [ImpBlock(b) for b in self.imps]
                + [ModBlock(b) for b in self.mods])

    def blocks(self, kind):
        return self.imps if kind is BlockKind.IMP else self.mods

    def evolve(self, **changes):
        """Copy with some fields replaced (re-canonicalized)."""
        values = {"ant": self.ant, "forms": self.forms, "imps": self.imps,
                  "mods": self.mods, "mode": self.mode, "origin": self.origin}
        values.update(changes)
        return Sequent(**values)

    def add(self, ant=(), forms=(), imps=(), mods=()):
        """Append content; the cumulative rules are all of this shape."""
        if self.mode is Mode.SET:
            imps = [b for b in _dedupe(imps) if b not in self.imps]
            mods = [b for b in _dedupe(mods) if b not in self.mods]
        return self.evolve(ant=self.ant + tuple(ant), forms=self.forms + tuple(forms),
                           imps=self.imps + tuple(imps), mods=self.mods + tuple(mods))

    def is_empty(self):
        return not (self.ant or self.forms or self.imps or self.mods)


@dataclass(frozen=True)
class Form:
    f: Formula


@dataclass(frozen=True)
class ImpBlock:
    body: Sequent


@dataclass(frozen=True)
class ModBlock:
    body: Sequent


EMPTY = Sequent()


def make_sequent(ant=(), suc=(), mode=Mode.SET, origin=None):
    """Build a sequent from an antecedent and a list of succedent elements."""
    forms, imps, mods = [], [], []
    for elem in suc:
        if isinstance(elem, Form):
            forms.append(elem.f)
        elif isinstance(elem, ImpBlock):
            imps.append(elem.body)
        elif isinstance(elem, ModBlock):
            mods.append(elem.body)
        elif isinstance(elem, Formula):
            forms.append(elem)
        else:
            raise TypeError(f"Not a succedent element: {elem!r}")
    if mode is Mode.SET:
        imps, mods = _dedupe(imps), _dedupe(mods)
    return Sequent(tuple(ant), tuple(forms), tuple(imps), tuple(mods), mode, origin)


# ---------------------------------------------------------------------------
# Positions
# ---------------------------------------------------------------------------

def imp_step(index):
    return Step(BlockKind.IMP, index)


def mod_step(index):
    return Step(BlockKind.MOD, index)


def render_position(pos):
    """World id of a position: "x", "x.m0", "x.i0.m1", ..."""
    parts = ["x"] + [("i" if step.kind is BlockKind.IMP else "m") + str(step.index) for step in pos]
    return ".".join(parts)


def parse_position(text):
    """Inverse of render_position."""
    parts = text.strip().split(".")
    if not parts or parts[0] != "x":
        raise InvalidPositionError(f"Not a position: {text!r}")
    steps = []
    for part in parts[1:]:
        if len(part) < 2 or part[0] not in "im" or not part[1:].isdigit():
            raise InvalidPositionError(f"Not a position: {text!r}")
        steps.append(Step(BlockKind.IMP if part[0] == "i" else BlockKind.MOD, int(part[1:])))
    return tuple(steps)


def subsequent_at(root, pos):
    """
    Return the sequent addressed by pos.

    Raises:
        InvalidPositionError: if a step is out of range
    """
    current = root
    for depth, step in enumerate(pos):
        blocks = current.blocks(step.kind)
        if not 0 <= step.index < len(blocks):
            raise InvalidPositionError(
                f"No {step.kind.value} block {step.index} at {render_position(pos[:depth])}")
        current = blocks[step.index]
    return current


def replace_at(root, pos, new):
    """Return root with the sequent at pos replaced by new."""
    if not pos:
        return new
    step, rest = pos[0], pos[1:]
    blocks = root.blocks(step.kind)
    if not 0 <= step.index < len(blocks):
        raise InvalidPositionError(f"No {step.kind.value} block {step.index}")
    updated = list(blocks)
    updated[step.index] = replace_at(blocks[step.index], rest, new)
    # A replaced block may now equal a sibling; both slots are kept so that
    # positions of later siblings do not shift.
    if step.kind is BlockKind.IMP:
        return root.evolve(imps=tuple(updated))
    return root.evolve(mods=tuple(updated))


def descendants(root, relation=Relation.PLUS):
    """
    List (position, sequent) pairs in preorder.

    Args:
        root: The sequent
        relation: IMP for sequents nested only through implication blocks,
            MOD for sequents nested only through modal blocks, PLUS for
            every nested sequent including root itself

    Returns:
        List of (Position, Sequent)
    """
    relation = Relation(relation)
    result = []

    def walk(pos, s):
        if relation in (Relation.PLUS, Relation.IMP):
            for i, b in enumerate(s.imps):
                p = pos + (Step(BlockKind.IMP, i),)
                result.append((p, b))
                walk(p, b)
        if relation in (Relation.PLUS, Relation.MOD):
            for i, b in enumerate(s.mods):
                p = pos + (Step(BlockKind.MOD, i),)
                result.append((p, b))
                walk(p, b)

    if relation is Relation.PLUS:
        result.append((ROOT, root))
    walk(ROOT, root)
    return result


def modal_closure(root):
    """The sequent and everything below it through modal blocks only."""
    return [(ROOT, root)] + descendants(root, Relation.MOD)


def md_sequent(s):
    degrees = [modal_degree(f) for f in s.ant + s.forms]
    degrees += [md_sequent(b) + 1 for b in s.mods]
    degrees += [md_sequent(b) for b in s.imps]
    return max(degrees, default=0)


# ---------------------------------------------------------------------------
# The flat and sharp operators
# ---------------------------------------------------------------------------

def flat(s):
    """Modal-block skeleton of the succedent of s, antecedents kept."""
    return tuple(flat_sequent(b) for b in s.mods)


def flat_sequent(s):
    """Λ ⇒ Θ♭ for s = Λ ⇒ Θ."""
    return Sequent(ant=s.ant, mods=flat(s), mode=s.mode)


def sharp(s, pos):
    """
    Annotated # image of a modal block body.

    Args:
        s: The body Λ ⇒ Θ of a modal block
        pos: Position of that body in the root

    Returns:
        A set-mode sequent with empty antecedent, the succedent formulas of
        s, and one # image per modal block of s; origin is pos.
    """
    return Sequent(
        forms=s.forms,
        mods=tuple(sharp(b, tuple(pos) + (Step(BlockKind.MOD, i),)) for i, b in enumerate(s.mods)),
        origin=tuple(pos),
    )


def structurally_included(s1, s2):
    """True iff s1 ⊆ˢ s2: antecedent inclusion plus mutual simulation of modal blocks."""
    if not set(s1.ant) <= set(s2.ant):
        return False
    if not all(any(structurally_included(b1, b2) for b2 in s2.mods) for b1 in s1.mods):
        return False
    return all(any(structurally_included(b1, b2) for b1 in s1.mods) for b2 in s2.mods)


def annotations(s):
    """Every origin annotation occurring in s."""
    return [t.origin for _, t in descendants(s) if t.origin is not None]


def formula_of(s):
    """
    Formula interpretation of a sequent: the conjunction of the antecedent
    implies the disjunction of the succedent, where <S> reads as the
    interpretation of S and [S] as its box.

    Blocks nested in a modal block are read the same way, which is stronger
    than sequent forcing when their antecedent is not empty.
    """
    disjuncts = list(s.forms) + [formula_of(b) for b in s.imps] + [Box(formula_of(b)) for b in s.mods]
    right = disjuncts[-1] if disjuncts else BOT
    for f in reversed(disjuncts[:-1]):
        right = Or(f, right)
    if not s.ant:
        return right
    left = s.ant[-1]
    for f in reversed(s.ant[:-1]):
        left = And(f, left)
    return Imp(left, right)


# ---------------------------------------------------------------------------
# Text and JSON forms
# ---------------------------------------------------------------------------

_ARROWS = {ASCII: "=>", UNICODE: "⇒", LATEX: r"\Rightarrow"}
_BRACKETS = {
    ASCII: ("<", ">", "[", "]"),
    UNICODE: ("⟨", "⟩", "[", "]"),
    LATEX: (r"\langle ", r"\rangle", "[", "]"),
}


def render_sequent(s, style=ASCII):
    """
    Print a sequent as `ant => suc, <ant => suc>, [ant => suc]`.

    Args:
        s: The sequent
        style: "ascii", "unicode" or "latex"
    """
    lb, rb, lm, rm = _BRACKETS[style]
    ant = ", ".join(render(f, style) for f in s.ant)
    suc = [render(f, style) for f in s.forms]
    suc += [lb + render_sequent(b, style) + rb for b in s.imps]
    suc += [lm + render_sequent(b, style) + rm for b in s.mods]
    arrow = _ARROWS[style]
    left = f"{ant} {arrow}" if ant else arrow
    return f"{left} {', '.join(suc)}" if suc else left


SEQUENT_RULES = FORMULA_RULES + r"""
    sequent: antecedent ARROW succedent
    antecedent: (formula ("," formula)*)?
    succedent: (succ_elem ("," succ_elem)*)?
    ?succ_elem: formula
              | "<" sequent ">"      -> imp_block
              | "⟨" sequent "⟩"      -> imp_block
              | "[" sequent "]"      -> mod_block
    ARROW: "=>" | "⇒"
"""

_SEQUENT_PARSER = Lark(SEQUENT_RULES, start="sequent", parser="lalr")


@v_args(inline=True)
class SequentBuilder(FormulaBuilder):

    def __init__(self, mode):
        super().__init__()
        self.mode = mode

    def sequent(self, ant, _arrow, suc):
        return make_sequent(ant, suc, self.mode)

    def antecedent(self, *formulas):
        return list(formulas)

    def succedent(self, *elems):
        return [e if not isinstance(e, Formula) else Form(e) for e in elems]

    def imp_block(self, body):
        return ImpBlock(body)

    def mod_block(self, body):
        return ModBlock(body)


def parse_sequent(text, mode=Mode.SET):
    """
    Parse the text form of a sequent.

    Raises:
        SequentSyntaxError: on malformed input
    """
    if text is None or not text.strip():
        raise SequentSyntaxError("empty sequent", 0)
    try:
        tree = _SEQUENT_PARSER.parse(text)
    except UnexpectedInput as e:
        err = syntax_error_from(e, text)
        raise SequentSyntaxError(str(err).rsplit(" (at position", 1)[0], err.position) from e
    return SequentBuilder(Mode(mode)).transform(tree)


def sequent_to_json(s):
    """Recursive JSON form {ant: [...], suc: [..., {imp: {...}}, {mod: {...}}]}."""
    suc = [render(f, ASCII) for f in s.forms]
    suc += [{"imp": sequent_to_json(b)} for b in s.imps]
    suc += [{"mod": sequent_to_json(b)} for b in s.mods]
    data = {"ant": [render(f, ASCII) for f in s.ant], "suc": suc}
    if s.origin is not None:
        data["origin"] = render_position(s.origin)
    return data


def sequent_from_json(data, mode=Mode.SET):
    if not isinstance(data, dict):
        raise ValueError(f"Sequent JSON must be an object, got {type(data).__name__}")
    ant = [parse_formula(text) for text in data.get("ant", [])]
    suc = []
    for elem in data.get("suc", []):
        if isinstance(elem, str):
            suc.append(Form(parse_formula(elem)))
        elif isinstance(elem, dict) and "imp" in elem:
            suc.append(ImpBlock(sequent_from_json(elem["imp"], mode)))
        elif isinstance(elem, dict) and "mod" in elem:
            suc.append(ModBlock(sequent_from_json(elem["mod"], mode)))
        else:
            raise ValueError(f"Bad succedent element: {elem!r}")
    origin = parse_position(data["origin"]) if "origin" in data else None
    return make_sequent(ant, suc, Mode(mode), origin)
