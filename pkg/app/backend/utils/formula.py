'''
Abstract syntax, parsing and printing for the modal language.

Formulas are built from atoms, T, F, &, |, ->, [] and <>. Negation is
sugar: "~A" parses to A -> F and is printed back as an implication.
'''

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

logger = logging.getLogger(__name__)

ASCII = "ascii"
UNICODE = "unicode"
LATEX = "latex"
STYLES = (ASCII, UNICODE, LATEX)


class FormulaSyntaxError(ValueError):
    """Raised when a formula (or sequent) text does not match the grammar."""

    def __init__(self, message, position=0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Formula:
    """Base class of the eight formula variants."""

    __slots__ = ()

    def __str__(self):
        return render(self, ASCII)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Box(Formula):
    body: Formula


@dataclass(frozen=True)
class Dia(Formula):
    body: Formula


TOP = Top()
BOT = Bot()


def neg(f):
    """Negation sugar: ~A is A -> F."""
    return Imp(f, BOT)


# Grammar rules shared with the sequent parser. Unicode connectives are
# accepted as alternatives so that unicode renderings parse back.
FORMULA_RULES = r"""
    ?formula: disj
            | disj IMPLIES formula   -> implies
    ?disj: conj
         | disj OR conj          -> or_
    ?conj: unary
         | conj AND unary        -> and_
    ?unary: NOT unary            -> not_
          | BOX unary            -> box
          | DIA unary            -> dia
          | atomic
    ?atomic: IDENT               -> atom
           | TOP                 -> top
           | BOT                 -> bot
           | "(" formula ")"

    IMPLIES: "->" | "⊃"
    OR: "|" | "∨"
    AND: "&" | "∧"
    NOT: "~" | "¬"
    BOX: "[]" | "□"
    DIA: "<>" | "◇"
    TOP: "T" | "⊤"
    BOT: "F" | "⊥"
    IDENT: /[a-z][A-Za-z0-9]*/

    %import common.WS
    %ignore WS
"""


@v_args(inline=True)
class FormulaBuilder(Transformer):
    """Turns a lark parse tree into Formula values."""

    def implies(self, left, _op, right):
        return Imp(left, right)

    def or_(self, left, _op, right):
        return Or(left, right)

    def and_(self, left, _op, right):
        return And(left, right)

    def not_(self, _op, body):
        return neg(body)

    def box(self, _op, body):
        return Box(body)

    def dia(self, _op, body):
        return Dia(body)

    def atom(self, token):
        return Atom(str(token))

    def top(self, _token):
        return TOP

    def bot(self, _token):
        return BOT


_PARSER = Lark(FORMULA_RULES, start="formula", parser="lalr")


def syntax_error_from(err, text):
    """Convert a lark exception into a FormulaSyntaxError with a position."""
    if isinstance(err, UnexpectedEOF):
        return FormulaSyntaxError("unexpected end of input", len(text))
    if isinstance(err, UnexpectedToken) and err.token.type == "$END":
        return FormulaSyntaxError("unexpected end of input", len(text))
    position = getattr(err, "pos_in_stream", None) or 0
    if isinstance(err, UnexpectedCharacters):
        return FormulaSyntaxError(f"unexpected character {text[position]!r}", position)
    if isinstance(err, UnexpectedToken):
        return FormulaSyntaxError(f"unexpected token {str(err.token)!r}", position)
    return FormulaSyntaxError(str(err), max(position, 0))


def parse_formula(text):
    """
    Parse a formula in the ASCII (or unicode) surface syntax.

    Args:
        text: Formula text, e.g. "[](p|q) -> <>p | []q"

    Returns:
        The Formula tree

    Raises:
        FormulaSyntaxError: on empty or malformed input
    """
    if text is None or not text.strip():
        raise FormulaSyntaxError("empty formula", 0)
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as e:
        raise syntax_error_from(e, text) from e
    return FormulaBuilder().transform(tree)


_SYMBOLS = {
    ASCII: {"top": "T", "bot": "F", "and": " & ", "or": " | ", "imp": " -> ", "box": "[]", "dia": "<>"},
    UNICODE: {"top": "⊤", "bot": "⊥", "and": " ∧ ", "or": " ∨ ", "imp": " ⊃ ", "box": "□", "dia": "◇"},
    LATEX: {"top": r"\top", "bot": r"\bot", "and": r" \land ", "or": r" \lor ", "imp": r" \supset ",
            "box": r"\Box", "dia": r"\Diamond"},
}

# Binding strength; larger binds tighter.
_PRECEDENCE = {Imp: 1, Or: 2, And: 3}
_UNARY = 4


def _precedence(f):
    return _PRECEDENCE.get(type(f), _UNARY)


def _prefix(op, body, style):
    # LaTeX control words need a space before a following letter.
    if style == LATEX and body[:1].isalpha():
        return f"{op} {body}"
    return op + body


def render(f, style=ASCII):
    """
    Print a formula with minimal parentheses.

    Args:
        f: The formula
        style: One of "ascii", "unicode", "latex"

    Returns:
        The rendered string; parse_formula(render(f)) == f for ascii and unicode
    """
    if style not in _SYMBOLS:
        raise ValueError(f"Unknown style: {style}")
    return _render(f, _SYMBOLS[style], style)


def _render(f, sym, style):
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return sym["top"]
    if isinstance(f, Bot):
        return sym["bot"]
    if isinstance(f, (Box, Dia)):
        body = _render(f.body, sym, style)
        if _precedence(f.body) < _UNARY:
            body = f"({body})"
        return _prefix(sym["box"] if isinstance(f, Box) else sym["dia"], body, style)

    prec = _precedence(f)
    left = _render(f.left, sym, style)
    right = _render(f.right, sym, style)
    if isinstance(f, Imp):
        # right-associative
        if _precedence(f.left) <= prec:
            left = f"({left})"
        if _precedence(f.right) < prec:
            right = f"({right})"
        op = sym["imp"]
    else:
        # left-associative
        if _precedence(f.left) < prec:
            left = f"({left})"
        if _precedence(f.right) <= prec:
            right = f"({right})"
        op = sym["and"] if isinstance(f, And) else sym["or"]
    return left + op + right


def modal_degree(f):
    """Maximal nesting depth of [] and <> in f."""
    if isinstance(f, (Atom, Top, Bot)):
        return 0
    if isinstance(f, (Box, Dia)):
        return 1 + modal_degree(f.body)
    return max(modal_degree(f.left), modal_degree(f.right))


def subformulas(f):
    """All subtrees of f, f included."""
    result = {f}
    if isinstance(f, (Box, Dia)):
        result |= subformulas(f.body)
    elif isinstance(f, (And, Or, Imp)):
        result |= subformulas(f.left)
        result |= subformulas(f.right)
    return frozenset(result)


def size(f):
    """Number of nodes of f."""
    if isinstance(f, (Box, Dia)):
        return 1 + size(f.body)
    if isinstance(f, (And, Or, Imp)):
        return 1 + size(f.left) + size(f.right)
    return 1


def connectives(f):
    """Number of connective nodes of f (T and F count as constants, not connectives)."""
    if isinstance(f, (Box, Dia)):
        return 1 + connectives(f.body)
    if isinstance(f, (And, Or, Imp)):
        return 1 + connectives(f.left) + connectives(f.right)
    return 0


def height(f):
    if isinstance(f, (Box, Dia)):
        return 1 + height(f.body)
    if isinstance(f, (And, Or, Imp)):
        return 1 + max(height(f.left), height(f.right))
    return 0


def atoms(f):
    """Sorted tuple of the atom names occurring in f."""
    return tuple(sorted(g.name for g in subformulas(f) if isinstance(g, Atom)))


@lru_cache(maxsize=None)
def formula_sort_key(f):
    """Canonical order of formulas inside set-mode sequents."""
    return (size(f), render(f, ASCII))
