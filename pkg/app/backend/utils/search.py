'''
Terminating proof search for the cumulative calculi.

The search grows a derivation bottom-up with four macro-steps:

    exp1  left/right propositional and modal rules (R1)
    exp2  trans, inter_right and, for LIKD, D (R2)
    exp3  right implication (R3)
    exp4  inter_down followed by realization of the new block (R4)

procedure0 runs exp1..exp3 by saturation level until every leaf is closed
or one leaf is R3-saturated; prove alternates exp4 and procedure0 until a
leaf is globally saturated. A block produced by inter_down stays the
witness of its pair, so each pair fires once per branch. The open leaf
yields a finite countermodel, which is re-checked before it is returned.
'''

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from dotenv import dotenv_values

from app.backend.utils.calculus import (
    Logic, R3_RULES, R4_RULES, RuleId, RuleInstance, SaturationLevel, Variant, applicable,
    find_axiom, instances_at, is_left_saturated, local_level, preserves_modal_degree, r1_rules, r2_rules,
    saturation_level,
)
from app.backend.utils.formula import And, Box, Dia, Imp, Or
from app.backend.utils.semantics import (
    ORACLE_BOUND, brute_force_status, extract_countermodel, sequent_vector, verify_countermodel,
)
from app.backend.utils.sequent import (
    BlockKind, Mode, Relation, Sequent, descendants, formula_of, imp_step, make_sequent, mod_step,
    modal_closure, render_position, render_sequent, replace_at, structurally_included, subsequent_at,
)

logger = logging.getLogger(__name__)

config = dotenv_values('.env')
DEFAULT_MAX_STEPS = int(config.get("MAX_STEPS", 10 ** 6))
DEFAULT_MAX_ROUNDS = int(config.get("MAX_ROUNDS", 32))


class PreconditionViolation(ValueError):
    pass


class StepBudgetExceeded(RuntimeError):
    """The safety cap on rule applications was reached."""

    def __init__(self, steps):
        super().__init__(f"step budget of {steps} rule applications exceeded")
        self.steps = steps


class SearchInvariantError(RuntimeError):
    pass


class InconclusiveSearch(StepBudgetExceeded):
    """An open leaf was found but no countermodel could be verified for it."""

    def __init__(self, steps, bound):
        RuntimeError.__init__(
            self, f"open leaf after {steps} rule applications, but neither the leaf model nor "
                  f"the oracle up to {bound} worlds refutes the goal")
        self.steps = steps
        self.bound = bound


class Verdict(Enum):
    PROVABLE = "PROVABLE"
    UNPROVABLE = "UNPROVABLE"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


class LeafStatus(Enum):
    AXIOMATIC = "axiomatic"
    OPEN = "open"
    SATURATED = "saturated"


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class DerivationNode:
    sequent: Sequent
    rule: Optional[RuleInstance] = None
    children: list = field(default_factory=list)
    axiom: Optional[tuple] = None
    level: Optional[SaturationLevel] = None

    @property
    def is_leaf(self):
        return not self.children

    @property
    def status(self):
        if self.axiom is not None:
            return LeafStatus.AXIOMATIC
        if self.level is SaturationLevel.GLOBAL:
            return LeafStatus.SATURATED
        return LeafStatus.OPEN


class Derivation:
    """A derivation tree, root at the bottom. Nodes are addressed by child-index paths."""

    def __init__(self, root_sequent):
        self.root = DerivationNode(root_sequent, axiom=find_axiom(root_sequent))

    def node_at(self, path):
        node = self.root
        for i in path:
            node = node.children[i]
        return node

    def walk(self, path=()):
        """Preorder (path, node) pairs below path."""
        stack = [(tuple(path), self.node_at(path))]
        while stack:
            p, node = stack.pop()
            yield p, node
            for i in reversed(range(len(node.children))):
                stack.append((p + (i,), node.children[i]))

    def leaves(self, path=()):
        """Leaves below path, leftmost first."""
        return [(p, n) for p, n in self.walk(path) if n.is_leaf]

    def open_leaves(self, path=()):
        return [(p, n) for p, n in self.leaves(path) if n.axiom is None]

    def is_closed(self):
        return all(n.axiom is not None for _, n in self.leaves())

    def size(self):
        return sum(1 for _ in self.walk())

    def instances(self):
        """Every recorded rule instance."""
        return [n.rule for _, n in self.walk() if n.rule is not None]

    def branches(self):
        """Root-to-leaf node lists."""
        result = []

        def visit(node, prefix):
            prefix = prefix + [node]
            if node.is_leaf:
                result.append(prefix)
            for child in node.children:
                visit(child, prefix)

        visit(self.root, [])
        return result


@dataclass
class Provable:
    derivation: Derivation
    verdict: Verdict = Verdict.PROVABLE


@dataclass
class Unprovable:
    """
    Attributes:
        leaf: Path of the open leaf the search stopped at
        countermodel: A verified countermodel
        world: World of the countermodel refuting the goal
        source: "leaf" when read off the leaf, "oracle" when found by the bounded oracle
    """
    derivation: Derivation
    leaf: tuple
    countermodel: object
    world: str = "x"
    source: str = "leaf"
    verdict: Verdict = Verdict.UNPROVABLE

    @property
    def leaf_sequent(self):
        return self.derivation.node_at(self.leaf).sequent


# ---------------------------------------------------------------------------
# Tracking record and realization
# ---------------------------------------------------------------------------

def tracking_record(s, gamma, logic=Logic.LIK):
    """
    Propagate a set of formulas down the modal-block tree of s.

    Args:
        s: A sequent saturated for all left rules
        gamma: The seed set Γ
        logic: Under LIKT the record is also closed under []A => A

    Returns:
        Dict from position (relative to s) to a frozenset of formulas, with an
        entry for s and for every sequent nested in s through modal blocks

    Raises:
        PreconditionViolation: if s is not left-saturated
    """
    logic = Logic(logic)
    if not is_left_saturated(s, logic):
        raise PreconditionViolation(f"{render_sequent(s)} is not saturated for the left rules")
    record = {(): frozenset(set(gamma) & set(s.ant))}

    def close(seed, t):
        ant = set(t.ant)
        result, todo = set(), list(seed)
        while todo:
            f = todo.pop()
            if f in result:
                continue
            result.add(f)
            if isinstance(f, And):
                todo += [f.left, f.right]
            elif isinstance(f, Or):
                todo += [g for g in (f.left, f.right) if g in ant]
            elif isinstance(f, Imp) and f.right in ant:
                todo.append(f.right)
            elif isinstance(f, Box) and logic is Logic.LIKT and f.body in ant:
                todo.append(f.body)
        return frozenset(result & ant)

    def visit(pos, t, entry):
        for k, child in enumerate(t.mods):
            seed = {f.body for f in entry if isinstance(f, Box)}
            seed |= {f.body for f in entry if isinstance(f, Dia) and f.body in child.ant}
            child_pos = pos + (mod_step(k),)
            record[child_pos] = close(seed, child)
            visit(child_pos, child, record[child_pos])

    visit((), s, record[()])
    return record


def realize(s, imp_pos, sharp_pos, logic=Logic.LIK):
    """
    Complete an inter_down block using the tracking record of its source.

    Args:
        s: Root containing T = Γ ⇒ Δ, <S1>, [S2]
        imp_pos: Position of S1 (an implication block of T)
        sharp_pos: Position of S2 (an annotated # block of T)
        logic: The logic

    Returns:
        s with S2 replaced by its realization

    Raises:
        PreconditionViolation: if the annotation is missing or foreign,
            S1 is not left-saturated, or Γ is not included in Ant(S1)
    """
    imp_pos, sharp_pos = tuple(imp_pos), tuple(sharp_pos)
    if (not imp_pos or not sharp_pos or imp_pos[:-1] != sharp_pos[:-1]
            or imp_pos[-1].kind is not BlockKind.IMP or sharp_pos[-1].kind is not BlockKind.MOD):
        raise PreconditionViolation("the blocks must be an implication and a modal block of one sequent")
    t = subsequent_at(s, imp_pos[:-1])
    s1 = subsequent_at(s, imp_pos)
    s2 = subsequent_at(s, sharp_pos)
    if s2.origin is None:
        raise PreconditionViolation(f"block at {render_position(sharp_pos)} carries no annotation")
    if s2.origin[:len(imp_pos)] != imp_pos or len(s2.origin) <= len(imp_pos):
        raise PreconditionViolation(
            f"annotation {render_position(s2.origin)} is not inside {render_position(imp_pos)}")
    if not set(t.ant) <= set(s1.ant):
        raise PreconditionViolation("antecedent is not included in the implication block")
    record = tracking_record(s1, t.ant, logic)

    def fill(u):
        rel = u.origin[len(imp_pos):]
        return u.evolve(ant=tuple(record.get(rel, ())), mods=tuple(fill(b) for b in u.mods))

    return replace_at(s, sharp_pos, fill(s2))


# ---------------------------------------------------------------------------
# The engine
# ---------------------------------------------------------------------------

class ProofSearch:
    """
    One proof-search run. Instances keep only per-query state, so separate
    queries may run concurrently on separate instances.

    max_rounds caps the number of exp4 calls. When the model read off an
    open leaf does not refute the goal, the bounded oracle looks for one
    with up to oracle_bound worlds.
    """

    def __init__(self, logic=Logic.LIK, max_steps=None, variant=Variant.CUMULATIVE, max_rounds=None,
                 oracle_bound=None):
        self.logic = Logic(logic)
        self.variant = Variant(variant)
        if self.variant.mode is not Mode.SET:
            raise ValueError("the terminating search uses the cumulative calculi")
        self.max_steps = DEFAULT_MAX_STEPS if max_steps is None else int(max_steps)
        self.max_rounds = DEFAULT_MAX_ROUNDS if max_rounds is None else int(max_rounds)
        self.oracle_bound = ORACLE_BOUND if oracle_bound is None else int(oracle_bound)
        self.rounds = 0
        self.steps = 0
        self.r1 = r1_rules(self.logic)
        self.r2 = r2_rules(self.logic)

    # -- bookkeeping -------------------------------------------------------

    def _tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise StepBudgetExceeded(self.max_steps)

    def _record(self, node, inst):
        self._tick()
        node.rule = inst
        node.children = [DerivationNode(p, axiom=find_axiom(p)) for p in inst.premises]
        logger.debug("step %d: %s", self.steps, inst.describe())
        return node.children

    def level(self, node):
        """Global saturation level of a non-axiomatic node, cached on the node."""
        if node.level is None:
            node.level = saturation_level(node.sequent, self.logic)
        return node.level

    # -- macro-steps -------------------------------------------------------

    def _saturate(self, d, leaf, positions_of, rules):
        """Apply rules at the positions exhaustively on every open leaf below leaf."""
        stack = [d.node_at(leaf)]
        while stack:
            node = stack.pop()
            if node.children:
                stack.extend(reversed(node.children))
                continue
            if node.axiom is not None:
                continue
            inst = None
            for pos in positions_of(node.sequent):
                inst = next(instances_at(node.sequent, pos, rules, self.logic, self.variant), None)
                if inst is not None:
                    break
            if inst is None:
                continue
            stack.extend(reversed(self._record(node, inst)))
        return d

    def exp1(self, d, leaf, target):
        """R1 rules at target and below it through modal blocks."""
        target = tuple(target)
        return self._saturate(
            d, leaf,
            lambda s: [target + p for p, _ in modal_closure(subsequent_at(s, target))],
            self.r1)

    def exp2(self, d, leaf, target):
        return self._saturate(d, leaf, lambda s: [tuple(target)], self.r2)

    def exp3(self, d, leaf, target):
        return self._saturate(d, leaf, lambda s: [tuple(target)], R3_RULES)

    def exp4(self, d, leaf):
        """
        Apply inter_down to every violating pair and realize each new block.

        Returns:
            Path of the resulting single leaf

        Raises:
            PreconditionViolation: if the leaf is not global-R3-saturated
        """
        node = d.node_at(leaf)
        if node.children or node.axiom is not None or self.level(node) < SaturationLevel.R3:
            raise PreconditionViolation("exp4 needs an open global-R3-saturated leaf")
        path = tuple(leaf)
        while True:
            s = node.sequent
            inst = None
            for pos, _ in descendants(s, Relation.PLUS):
                inst = next(instances_at(s, pos, R4_RULES, self.logic, self.variant), None)
                if inst is not None:
                    break
            if inst is None:
                return path
            (annotated,) = self._record(node, inst)
            node, path = annotated, path + (0,)
            if annotated.axiom is not None:
                return path

            j, k = inst.principal
            t_pos = inst.pos
            t_after = subsequent_at(annotated.sequent, t_pos)
            imp_pos = t_pos + (imp_step(j),)
            sharp_pos = t_pos + (mod_step(len(t_after.mods) - 1),)
            realized = realize(annotated.sequent, imp_pos, sharp_pos, self.logic)
            self._check_realization(realized, imp_pos + (mod_step(k),), sharp_pos)
            step = RuleInstance(RuleId.REALIZE, sharp_pos, (j, k), (realized,), annotated.sequent)
            if not preserves_modal_degree(step):
                raise SearchInvariantError(f"realization at {render_position(sharp_pos)} changed the modal degree")
            (node,) = self._record(annotated, step)
            path = path + (0,)
            if node.axiom is not None:
                return path

    def _check_realization(self, root, source_pos, block_pos):
        block = subsequent_at(root, block_pos)
        source = subsequent_at(root, source_pos)
        if not structurally_included(block, source):
            raise SearchInvariantError(
                f"realized block {render_position(block_pos)} is not included in {render_position(source_pos)}")
        if not is_left_saturated(block, self.logic):
            raise SearchInvariantError(f"realized block {render_position(block_pos)} is not left-saturated")

    # -- procedures --------------------------------------------------------

    def procedure0(self, d, start=()):
        """
        Expand the subtree at start until it closes or has an R3-saturated leaf.

        Returns:
            None if every leaf below start is axiomatic, else the path of the
            leftmost global-R3-saturated leaf
        """
        start = tuple(start)
        while True:
            leaves = d.open_leaves(start)
            if not leaves:
                return None
            for path, node in leaves:
                if self.level(node) >= SaturationLevel.R3:
                    return path
            path, node = leaves[0]
            level = self.level(node)
            need = int(level) + 1
            targets = [pos for pos, t in descendants(node.sequent, Relation.PLUS) if local_level(t, self.logic) < need]
            expand = {SaturationLevel.NONE: self.exp1, SaturationLevel.R1: self.exp2,
                      SaturationLevel.R2: self.exp3}[level]
            logger.debug("procedure0: leaf %s at level %s, %d targets", path, level.name, len(targets))
            before = self.steps
            for target in targets:
                expand(d, path, target)
            if self.steps == before:
                raise SearchInvariantError(f"no rule applies to a leaf at level {level.name}")

    def run(self, s0):
        """
        Full search: procedure0, then exp4 on R3-saturated leaves until a leaf is globally saturated.

        Each exp4 call counts as one round. After max_rounds rounds the
        current R3-saturated leaf is used as it is.

        Raises:
            StepBudgetExceeded: if the step cap is hit
            InconclusiveSearch: if no countermodel of an open leaf is verified
        """
        d = Derivation(s0)
        if self.procedure0(d) is None:
            return Provable(d)
        while True:
            saturated = [(p, n) for p, n in d.open_leaves() if self.level(n) is SaturationLevel.GLOBAL]
            if saturated:
                path, node = saturated[0]
                return self._unprovable(d, path, node)
            ready = [(p, n) for p, n in d.open_leaves() if self.level(n) >= SaturationLevel.R3]
            if ready and self.rounds >= self.max_rounds:
                logger.warning("stopping after %d realization rounds", self.rounds)
                path, node = ready[0]
                return self._unprovable(d, path, node)
            if ready:
                self.rounds += 1
                new_leaf = self.exp4(d, ready[0][0])
                self.procedure0(d, new_leaf)
                continue
            remaining = d.open_leaves()
            if not remaining:
                return Provable(d)
            self.procedure0(d, remaining[0][0])

    def _unprovable(self, d, path, node):
        """Countermodel of an open leaf, read off the leaf or else found by the oracle."""
        goal = d.root.sequent
        model = extract_countermodel(node.sequent, self.logic, SaturationLevel.R3)
        if verify_countermodel(model, self.logic, "x", goal)["ok"]:
            logger.info("unprovable after %d steps; countermodel with %d worlds", self.steps, len(model.worlds))
            return Unprovable(d, path, model)
        logger.warning("the %d-world leaf model does not refute %s; trying the oracle",
                       len(model.worlds), render_sequent(goal))
        oracle = brute_force_status(formula_of(goal), self.logic, self.oracle_bound)
        if not oracle.falsified:
            raise InconclusiveSearch(self.steps, self.oracle_bound)
        # the formula fails at oracle.world, a block-free sequent at some world above it
        m = oracle.model
        refuted = ~sequent_vector(m, goal)
        above = refuted & m.le[m.index(oracle.world)]
        if not refuted.any():
            raise InconclusiveSearch(self.steps, self.oracle_bound)
        world = m.worlds[int((above if above.any() else refuted).argmax())]
        if not verify_countermodel(m, self.logic, world, goal)["ok"]:
            raise SearchInvariantError(f"oracle model does not refute {render_sequent(goal)}")
        logger.info("unprovable after %d steps; oracle countermodel with %d worlds", self.steps, len(m.worlds))
        return Unprovable(d, path, m, world, "oracle")


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def goal_sequent(f, unfold=True):
    """
    The sequent searched for a goal formula.

    With unfold, a goal A1 -> (A2 -> ... -> B) becomes A1, A2, ... => B,
    which is provable exactly when => f is.
    """
    ant = []
    if unfold:
        while isinstance(f, Imp):
            ant.append(f.left)
            f = f.right
    return Sequent(ant=tuple(ant), forms=(f,))


def procedure0(s0, logic=Logic.LIK, max_steps=None):
    """Run procedure0 on s0 and return the derivation."""
    engine = ProofSearch(logic, max_steps)
    d = Derivation(s0)
    engine.procedure0(d)
    return d


def exp1(d, leaf, target, logic=Logic.LIK):
    return ProofSearch(logic).exp1(d, leaf, target)


def exp2(d, leaf, target, logic=Logic.LIK):
    return ProofSearch(logic).exp2(d, leaf, target)


def exp3(d, leaf, target, logic=Logic.LIK):
    return ProofSearch(logic).exp3(d, leaf, target)


def exp4(d, leaf, logic=Logic.LIK):
    """Returns d; the new leaf is the leftmost leaf below the old one."""
    ProofSearch(logic).exp4(d, leaf)
    return d


def prove_sequent(s, logic=Logic.LIK, max_steps=None):
    """
    Decide a set-mode sequent.

    Returns:
        Provable or Unprovable (with a countermodel)

    Raises:
        StepBudgetExceeded: if the safety cap is hit
    """
    engine = ProofSearch(logic, max_steps)
    outcome = engine.run(s)
    logger.info("%s: %s in %d steps", render_sequent(s), outcome.verdict.value, engine.steps)
    return outcome


def prove(f, logic=Logic.LIK, max_steps=None, unfold_goal=True):
    """
    Decide a formula.

    Args:
        f: The formula
        logic: LIK, LIKD or LIKT
        max_steps: Safety cap on rule applications (default from .env)
        unfold_goal: Search A1, ..., An => B for A1 -> ... -> An -> B

    Returns:
        Provable(derivation) or Unprovable(derivation, leaf, countermodel)
    """
    return prove_sequent(goal_sequent(f, unfold_goal), logic, max_steps)


def prove_minus(f, logic=Logic.LIK, budget=None, unfold_goal=True):
    """
    Search without inter_down: procedure0 on the goal, nothing else.

    Returns:
        Verdict.PROVABLE, Verdict.UNPROVABLE (a leaf is saturated for every
        rule but inter_down) or Verdict.BUDGET_EXHAUSTED
    """
    if budget is not None and budget <= 0:
        raise ValueError("budget must be positive")
    engine = ProofSearch(logic, budget, Variant.CUMULATIVE_MINUS)
    d = Derivation(goal_sequent(f, unfold_goal))
    try:
        leaf = engine.procedure0(d)
    except StepBudgetExceeded:
        return Verdict.BUDGET_EXHAUSTED
    return Verdict.PROVABLE if leaf is None else Verdict.UNPROVABLE


# ---------------------------------------------------------------------------
# Plain multiset search
# ---------------------------------------------------------------------------

def _as_set(s):
    return make_sequent(s.ant, [], Mode.SET).evolve(
        forms=s.forms,
        imps=tuple(dict.fromkeys(_as_set(b) for b in s.imps)),
        mods=tuple(dict.fromkeys(_as_set(b) for b in s.mods)))


def search_plain(s, logic=Logic.LIK, variant=Variant.FULL, budget=200_000, max_depth=12):
    """
    Bounded iterative-deepening search in the multiset calculi.

    A branch is cut when a premise repeats an ancestor up to duplicates.
    The search never concludes unprovability.

    Returns:
        (Verdict.PROVABLE, Derivation) or (Verdict.BUDGET_EXHAUSTED, None)
    """
    variant = Variant(variant)
    if variant.mode is not Mode.MULTISET:
        raise ValueError("search_plain runs the multiset calculi")
    if s.mode is not Mode.MULTISET:
        s = _to_multiset(s)
    counter = {"nodes": 0}

    def dfs(seq, depth, ancestors):
        counter["nodes"] += 1
        if counter["nodes"] > budget:
            raise StepBudgetExceeded(budget)
        axiom = find_axiom(seq)
        if axiom is not None:
            return DerivationNode(seq, axiom=axiom)
        key = _as_set(seq)
        if depth == 0 or key in ancestors:
            return None
        below = ancestors | {key}
        for inst in applicable(seq, logic, variant):
            if any(_as_set(p) in below for p in inst.premises):
                continue
            children = []
            for premise in inst.premises:
                child = dfs(premise, depth - 1, below)
                if child is None:
                    break
                children.append(child)
            else:
                return DerivationNode(seq, rule=inst, children=children)
        return None

    try:
        for depth in range(1, max_depth + 1):
            root = dfs(s, depth, frozenset())
            if root is not None:
                d = Derivation(s)
                d.root = root
                return Verdict.PROVABLE, d
    except StepBudgetExceeded:
        pass
    return Verdict.BUDGET_EXHAUSTED, None


def _to_multiset(s):
    return Sequent(s.ant, s.forms, tuple(_to_multiset(b) for b in s.imps),
                   tuple(_to_multiset(b) for b in s.mods), Mode.MULTISET)
