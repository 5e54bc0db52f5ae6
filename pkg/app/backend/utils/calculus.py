'''
Rules of the bi-nested calculi for LIK, LIKD and LIKT.

Two families live here. The plain calculi act on multiset sequents, drop
most principal formulas and never check redundancy. The cumulative calculi
act on set sequents, keep every principal formula, and skip an instance
whenever the sequent it acts on already satisfies the rule's saturation
condition.
'''

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum

from app.backend.utils.formula import And, Atom, Bot, Box, Dia, Imp, Or, Top
from app.backend.utils.sequent import (
    Mode, Relation, Sequent, descendants, flat_sequent, imp_step, md_sequent, modal_closure,
    mod_step, render_position, replace_at, sharp, structurally_included, subsequent_at,
)

logger = logging.getLogger(__name__)


class Logic(Enum):
    LIK = "lik"
    LIKD = "likd"
    LIKT = "likt"


class Variant(Enum):
    FULL = "full"
    MINUS = "minus"
    CUMULATIVE = "cumulative"
    # set-based rules without the annotated inter_down rule
    CUMULATIVE_MINUS = "cumulative-minus"

    @property
    def mode(self):
        if self in (Variant.FULL, Variant.MINUS):
            return Mode.MULTISET
        return Mode.SET

    @property
    def has_inter_down(self):
        return self in (Variant.FULL, Variant.CUMULATIVE)


class RuleId(Enum):
    BOT_L = "bot_L"
    TOP_R = "top_R"
    ID = "id"
    AND_L = "and_L"
    AND_R = "and_R"
    OR_L = "or_L"
    OR_R = "or_R"
    IMP_L = "imp_L"
    IMP_R = "imp_R"
    IMP_R1 = "imp_R1"
    IMP_R2 = "imp_R2"
    BOX_L = "box_L"
    BOX_R = "box_R"
    DIA_L = "dia_L"
    DIA_R = "dia_R"
    TRANS = "trans"
    INTER_RIGHT = "inter_right"
    INTER_DOWN = "inter_down"
    D = "D"
    T_BOX = "T_box"
    T_DIA = "T_dia"
    # records the completion of an inter_down block; premises are stored
    REALIZE = "realize"


AXIOM_RULES = (RuleId.BOT_L, RuleId.TOP_R, RuleId.ID)


class SaturationLevel(IntEnum):
    NONE = 0
    R1 = 1
    R2 = 2
    R3 = 3
    GLOBAL = 4


class NotApplicableError(ValueError):
    """The rule instance was computed for a different conclusion."""


class AxiomaticInputError(ValueError):
    """Saturation levels are only defined for sequents without axioms."""


@dataclass(frozen=True)
class RuleInstance:
    """
    One application of a rule.

    Attributes:
        rule: The rule applied
        pos: Position of the sequent acted on
        principal: Principal formula and/or block indices
        premises: Full premise roots, left to right
        conclusion: The root the instance was computed from
    """
    rule: RuleId
    pos: tuple
    principal: tuple
    premises: tuple
    conclusion: Sequent = field(compare=False, repr=False, default=None)

    @property
    def name(self):
        return self.rule.value

    def describe(self):
        parts = [str(p) for p in self.principal]
        where = render_position(self.pos)
        return f"{self.rule.value} at {where}" + (f" on {', '.join(parts)}" if parts else "")


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------

def is_axiom(s):
    """Axiom rule closing s at its top level, or None."""
    if any(isinstance(f, Bot) for f in s.ant):
        return RuleId.BOT_L
    if any(isinstance(f, Top) for f in s.forms):
        return RuleId.TOP_R
    left = {f for f in s.ant if isinstance(f, Atom)}
    if any(f in left for f in s.forms if isinstance(f, Atom)):
        return RuleId.ID
    return None


def find_axiom(root):
    """First (position, RuleId) such that the sequent at position is an axiom, or None."""
    for pos, t in descendants(root, Relation.PLUS):
        rule = is_axiom(t)
        if rule is not None:
            return pos, rule
    return None


# ---------------------------------------------------------------------------
# Rule groups
# ---------------------------------------------------------------------------

_PROPOSITIONAL_MODAL = (
    RuleId.AND_L, RuleId.AND_R, RuleId.OR_L, RuleId.OR_R, RuleId.IMP_L,
    RuleId.BOX_L, RuleId.BOX_R, RuleId.DIA_L, RuleId.DIA_R,
)

_LEFT = (RuleId.AND_L, RuleId.OR_L, RuleId.IMP_L, RuleId.BOX_L, RuleId.DIA_L)


def r1_rules(logic):
    logic = Logic(logic)
    if logic is Logic.LIKT:
        return _PROPOSITIONAL_MODAL + (RuleId.T_BOX, RuleId.T_DIA)
    return _PROPOSITIONAL_MODAL


def r2_rules(logic):
    logic = Logic(logic)
    if logic is Logic.LIKD:
        return (RuleId.TRANS, RuleId.INTER_RIGHT, RuleId.D)
    return (RuleId.TRANS, RuleId.INTER_RIGHT)


R3_RULES = (RuleId.IMP_R,)
R4_RULES = (RuleId.INTER_DOWN,)


def left_rules(logic):
    if Logic(logic) is Logic.LIKT:
        return _LEFT + (RuleId.T_BOX,)
    return _LEFT


def enabled_rules(logic, variant):
    """Rules of the calculus, in RuleId order (axioms excluded)."""
    logic, variant = Logic(logic), Variant(variant)
    rules = set(r1_rules(logic)) | set(r2_rules(logic))
    if variant.mode is Mode.SET:
        rules |= {RuleId.IMP_R1, RuleId.IMP_R2}
    else:
        rules.add(RuleId.IMP_R)
    if variant.has_inter_down:
        rules.add(RuleId.INTER_DOWN)
    return tuple(r for r in RuleId if r in rules)


# Cumulative ImpR1/ImpR2 share the saturation condition of ImpR.
_CONDITION_OF = {RuleId.IMP_R1: RuleId.IMP_R, RuleId.IMP_R2: RuleId.IMP_R}


# ---------------------------------------------------------------------------
# Saturation conditions
# ---------------------------------------------------------------------------

def violations(t, rule, logic=Logic.LIK):
    """
    Principals at the top level of t whose saturation condition for rule fails.

    Args:
        t: The sequent Γ ⇒ Δ acted on
        rule: A non-axiom RuleId
        logic: Needed only for rules that depend on it

    Returns:
        List of principal tuples, in principal order
    """
    rule = _CONDITION_OF.get(rule, rule)
    ant, forms = set(t.ant), set(t.forms)
    found = []
    if rule is RuleId.AND_L:
        found = [(f,) for f in t.ant if isinstance(f, And) and not (f.left in ant and f.right in ant)]
    elif rule is RuleId.OR_L:
        found = [(f,) for f in t.ant if isinstance(f, Or) and f.left not in ant and f.right not in ant]
    elif rule is RuleId.IMP_L:
        found = [(f,) for f in t.ant if isinstance(f, Imp) and f.left not in forms and f.right not in ant]
    elif rule is RuleId.AND_R:
        found = [(f,) for f in t.forms if isinstance(f, And) and f.left not in forms and f.right not in forms]
    elif rule is RuleId.OR_R:
        found = [(f,) for f in t.forms if isinstance(f, Or) and not (f.left in forms and f.right in forms)]
    elif rule is RuleId.IMP_R:
        found = [(f,) for f in t.forms if isinstance(f, Imp) and not _imp_r_witnessed(t, f, ant, forms)]
    elif rule is RuleId.BOX_L:
        found = [(f, k) for f in t.ant if isinstance(f, Box)
                 for k, b in enumerate(t.mods) if f.body not in b.ant]
    elif rule is RuleId.BOX_R:
        found = [(f,) for f in t.forms if isinstance(f, Box) and not any(f.body in b.forms for b in t.mods)]
    elif rule is RuleId.DIA_L:
        found = [(f,) for f in t.ant if isinstance(f, Dia) and not any(f.body in b.ant for b in t.mods)]
    elif rule is RuleId.DIA_R:
        found = [(f, k) for f in t.forms if isinstance(f, Dia)
                 for k, b in enumerate(t.mods) if f.body not in b.forms]
    elif rule is RuleId.T_BOX:
        found = [(f,) for f in t.ant if isinstance(f, Box) and f.body not in ant]
    elif rule is RuleId.T_DIA:
        found = [(f,) for f in t.forms if isinstance(f, Dia) and f.body not in forms]
    elif rule is RuleId.D:
        constrained = any(isinstance(f, Box) for f in t.ant) or any(isinstance(f, Dia) for f in t.forms)
        found = [()] if constrained and not t.mods else []
    elif rule is RuleId.TRANS:
        found = [(j,) for j, b in enumerate(t.imps) if not ant <= set(b.ant)]
    elif rule is RuleId.INTER_RIGHT:
        found = [(j, k) for j, b in enumerate(t.imps) for k, m in enumerate(t.mods)
                 if not any(structurally_included(m, c) for c in b.mods)]
    elif rule is RuleId.INTER_DOWN:
        found = [(j, k) for j, b in enumerate(t.imps) for k, m in enumerate(b.mods)
                 if not _realized(t, j, k) and not any(structurally_included(c, m) for c in t.mods)]
    else:
        raise ValueError(f"{rule.value} has no saturation condition")
    return found


def _realized(t, j, k):
    """
    Whether inter_down already produced a block of t from block k of t.imps[j].

    Such a block keeps its annotation and stays a witness for (j, k) even
    after later rounds grow it past its source.
    """
    tail = (imp_step(j), mod_step(k))
    return any(c.origin is not None and tuple(c.origin[-2:]) == tail for c in t.mods)


def _imp_r_witnessed(t, f, ant, forms):
    if f.left in ant and f.right in forms:
        return True
    return any(f.left in b.ant and f.right in b.forms for b in t.imps)


def saturation_holds(s, rule, logic=Logic.LIK):
    """Whether the top level of s satisfies the saturation condition of rule."""
    return not violations(s, RuleId(rule), Logic(logic))


def _group_saturated(t, rules, logic):
    return all(not violations(t, rule, logic) for rule in rules)


def local_level(t, logic=Logic.LIK):
    """
    Local saturation level of t, from 0 (not R1-saturated) to 4 (R4-saturated).

    R1 is evaluated on t with nested implication blocks removed, that is on
    t and every sequent below it through modal blocks only.
    """
    logic = Logic(logic)
    r1 = r1_rules(logic)
    if not all(_group_saturated(u, r1, logic) for _, u in modal_closure(t)):
        return 0
    if not _group_saturated(t, r2_rules(logic), logic):
        return 1
    if not _group_saturated(t, R3_RULES, logic):
        return 2
    if not _group_saturated(t, R4_RULES, logic):
        return 3
    return 4


def saturation_level(s, logic=Logic.LIK):
    """
    Global saturation level: the minimum local level over every T ∈⁺ s.

    Raises:
        AxiomaticInputError: if some nested sequent is an axiom
    """
    axiom = find_axiom(s)
    if axiom is not None:
        pos, rule = axiom
        raise AxiomaticInputError(f"{rule.value} closes {render_position(pos)}")
    return SaturationLevel(min(local_level(t, logic) for _, t in descendants(s, Relation.PLUS)))


def is_left_saturated(s, logic=Logic.LIK):
    """All left rules are saturated at s and below it through modal blocks."""
    rules = left_rules(logic)
    return all(_group_saturated(u, rules, Logic(logic)) for _, u in modal_closure(s))


# ---------------------------------------------------------------------------
# Premises
# ---------------------------------------------------------------------------

def _at_block(t, kind_step, index, new_block):
    return replace_at(t, (kind_step(index),), new_block)


def _cumulative_premises(t, rule, principal, pos):
    """Local premises (new versions of t) and the effective rule id."""
    mode = t.mode
    if rule in (RuleId.AND_L, RuleId.OR_L, RuleId.IMP_L, RuleId.AND_R, RuleId.OR_R,
                RuleId.T_BOX, RuleId.T_DIA, RuleId.BOX_R, RuleId.DIA_L):
        f = principal[0]
    if rule is RuleId.AND_L:
        return rule, [t.add(ant=(f.left, f.right))]
    if rule is RuleId.OR_L:
        return rule, [t.add(ant=(f.left,)), t.add(ant=(f.right,))]
    if rule is RuleId.IMP_L:
        return rule, [t.add(forms=(f.left,)), t.add(ant=(f.right,))]
    if rule is RuleId.AND_R:
        return rule, [t.add(forms=(f.left,)), t.add(forms=(f.right,))]
    if rule is RuleId.OR_R:
        return rule, [t.add(forms=(f.left, f.right))]
    if rule in (RuleId.IMP_R, RuleId.IMP_R1, RuleId.IMP_R2):
        f = principal[0]
        if f.left in t.ant:
            return RuleId.IMP_R1, [t.add(forms=(f.right,))]
        return RuleId.IMP_R2, [t.add(imps=(Sequent(ant=(f.left,), forms=(f.right,), mode=mode),))]
    if rule is RuleId.BOX_L:
        f, k = principal
        return rule, [_at_block(t, mod_step, k, t.mods[k].add(ant=(f.body,)))]
    if rule is RuleId.BOX_R:
        return rule, [t.add(mods=(Sequent(forms=(f.body,), mode=mode),))]
    if rule is RuleId.DIA_L:
        return rule, [t.add(mods=(Sequent(ant=(f.body,), mode=mode),))]
    if rule is RuleId.DIA_R:
        f, k = principal
        return rule, [_at_block(t, mod_step, k, t.mods[k].add(forms=(f.body,)))]
    if rule is RuleId.T_BOX:
        return rule, [t.add(ant=(f.body,))]
    if rule is RuleId.T_DIA:
        return rule, [t.add(forms=(f.body,))]
    if rule is RuleId.D:
        return rule, [t.add(mods=(Sequent(mode=mode),))]
    if rule is RuleId.TRANS:
        (j,) = principal
        return rule, [_at_block(t, imp_step, j, t.imps[j].add(ant=t.ant))]
    if rule is RuleId.INTER_RIGHT:
        j, k = principal
        return rule, [_at_block(t, imp_step, j, t.imps[j].add(mods=(flat_sequent(t.mods[k]),)))]
    if rule is RuleId.INTER_DOWN:
        j, k = principal
        source = tuple(pos) + (imp_step(j), mod_step(k))
        return rule, [t.add(mods=(sharp(t.imps[j].mods[k], source),))]
    raise ValueError(f"{rule.value} is not a rule of the cumulative calculus")


def _without(items, f):
    items = list(items)
    items.remove(f)
    return tuple(items)


def _plain_image(s, mode):
    """A # image without annotations, converted to the given mode."""
    return Sequent(s.ant, s.forms, (), tuple(_plain_image(b, mode) for b in s.mods), mode, None)


def _plain_premises(t, rule, principal):
    """Local premises of the multiset rules."""
    mode = t.mode
    if rule is RuleId.AND_L:
        f = principal[0]
        return [t.evolve(ant=_without(t.ant, f) + (f.left, f.right))]
    if rule is RuleId.OR_L:
        f = principal[0]
        rest = _without(t.ant, f)
        return [t.evolve(ant=rest + (f.left,)), t.evolve(ant=rest + (f.right,))]
    if rule is RuleId.IMP_L:
        f = principal[0]
        return [t.add(forms=(f.left,)), t.evolve(ant=_without(t.ant, f) + (f.right,))]
    if rule is RuleId.AND_R:
        f = principal[0]
        rest = _without(t.forms, f)
        return [t.evolve(forms=rest + (f.left,)), t.evolve(forms=rest + (f.right,))]
    if rule is RuleId.OR_R:
        f = principal[0]
        return [t.evolve(forms=_without(t.forms, f) + (f.left, f.right))]
    if rule is RuleId.IMP_R:
        f = principal[0]
        block = Sequent(ant=(f.left,), forms=(f.right,), mode=mode)
        return [t.evolve(forms=_without(t.forms, f), imps=t.imps + (block,))]
    if rule is RuleId.BOX_R:
        f = principal[0]
        return [t.evolve(forms=_without(t.forms, f), mods=t.mods + (Sequent(forms=(f.body,), mode=mode),))]
    if rule is RuleId.DIA_L:
        f = principal[0]
        return [t.evolve(ant=_without(t.ant, f), mods=t.mods + (Sequent(ant=(f.body,), mode=mode),))]
    if rule is RuleId.INTER_DOWN:
        j, k = principal
        image = _plain_image(sharp(t.imps[j].mods[k], ()), mode)
        return [t.evolve(mods=t.mods + (image,))]
    # box_L, dia_R, T_box, T_dia, D, trans and inter_right keep their principal
    # and coincide with the cumulative forms.
    return _cumulative_premises(t, rule, principal, ())[1]


def _all_principals(t, rule):
    """Every principal of rule at the top level of t (no redundancy check)."""
    distinct = lambda fs: list(dict.fromkeys(fs))
    if rule in (RuleId.AND_L, RuleId.OR_L, RuleId.IMP_L):
        kind = {RuleId.AND_L: And, RuleId.OR_L: Or, RuleId.IMP_L: Imp}[rule]
        return [(f,) for f in distinct(t.ant) if isinstance(f, kind)]
    if rule in (RuleId.AND_R, RuleId.OR_R, RuleId.IMP_R):
        kind = {RuleId.AND_R: And, RuleId.OR_R: Or, RuleId.IMP_R: Imp}[rule]
        return [(f,) for f in distinct(t.forms) if isinstance(f, kind)]
    if rule is RuleId.BOX_L:
        return [(f, k) for f in distinct(t.ant) if isinstance(f, Box) for k in range(len(t.mods))]
    if rule is RuleId.DIA_R:
        return [(f, k) for f in distinct(t.forms) if isinstance(f, Dia) for k in range(len(t.mods))]
    if rule in (RuleId.BOX_R, RuleId.T_DIA):
        kind = Box if rule is RuleId.BOX_R else Dia
        return [(f,) for f in distinct(t.forms) if isinstance(f, kind)]
    if rule in (RuleId.DIA_L, RuleId.T_BOX):
        kind = Dia if rule is RuleId.DIA_L else Box
        return [(f,) for f in distinct(t.ant) if isinstance(f, kind)]
    if rule is RuleId.D:
        return [()]
    if rule is RuleId.TRANS:
        return [(j,) for j in range(len(t.imps))]
    if rule is RuleId.INTER_RIGHT:
        return [(j, k) for j in range(len(t.imps)) for k in range(len(t.mods))]
    if rule is RuleId.INTER_DOWN:
        return [(j, k) for j, b in enumerate(t.imps) for k in range(len(b.mods))]
    return []


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

def _instance(root, pos, t, rule, principal, variant):
    if variant.mode is Mode.SET:
        effective, locals_ = _cumulative_premises(t, rule, principal, pos)
    else:
        effective, locals_ = rule, _plain_premises(t, rule, principal)
    premises = tuple(replace_at(root, pos, new) for new in locals_)
    return RuleInstance(effective, tuple(pos), tuple(principal), premises, root)


def instances_at(root, pos, rules, logic=Logic.LIK, variant=Variant.CUMULATIVE):
    """
    Lazily generate the rule instances at one position.

    Instances come in the order of `rules`, then principal order. In set
    mode only instances whose saturation condition fails are produced.
    """
    logic, variant = Logic(logic), Variant(variant)
    t = subsequent_at(root, pos)
    seen_imp_r = False
    for rule in rules:
        if rule in (RuleId.IMP_R1, RuleId.IMP_R2):
            # one condition, split by side condition when the instance is built
            if seen_imp_r:
                continue
            seen_imp_r = True
        if variant.mode is Mode.SET:
            principals = violations(t, rule, logic)
        else:
            principals = _all_principals(t, rule)
        for principal in principals:
            yield _instance(root, pos, t, rule, principal, variant)


def applicable(root, logic=Logic.LIK, variant=Variant.CUMULATIVE):
    """All (non-redundant, in set mode) instances, by position, rule, principal."""
    logic, variant = Logic(logic), Variant(variant)
    rules = enabled_rules(logic, variant)
    result = []
    for pos, _ in descendants(root, Relation.PLUS):
        result.extend(instances_at(root, pos, rules, logic, variant))
    return result


def apply(root, inst):
    """
    Premise roots of a rule instance.

    Raises:
        NotApplicableError: if inst was computed for another root
    """
    if inst.conclusion is not None and inst.conclusion != root:
        raise NotApplicableError(f"{inst.describe()} does not belong to {root}")
    return list(inst.premises)


def preserves_modal_degree(inst):
    """Every premise has the modal degree of the conclusion."""
    degree = md_sequent(inst.conclusion)
    return all(md_sequent(p) == degree for p in inst.premises)
