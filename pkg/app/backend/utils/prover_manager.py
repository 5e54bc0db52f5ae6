import logging
import concurrent.futures

from dotenv import dotenv_values

from app.backend.utils.calculus import Logic
from app.backend.utils.export import export_derivation, model_to_text
from app.backend.utils.formula import parse_formula, render
from app.backend.utils.logic_catalog import (
    AVAILABLE_LOGICS, AXIOMS_BY_LOGIC, STANDARD_AXIOMS, Expected,
)
from app.backend.utils.search import (
    ProofSearch, StepBudgetExceeded, Verdict, goal_sequent, prove_minus,
)
from app.backend.utils.semantics import (
    MAX_ORACLE_WORLDS, brute_force_status, check_frame, forces, frame_properties, model_from_json,
    model_to_json, verify_countermodel,
)
from app.backend.utils.sequent import parse_sequent, render_sequent

logger = logging.getLogger(__name__)

config = dotenv_values('.env')


def is_sequent_text(text):
    return "=>" in text or "⇒" in text


class ProverManager:
    """
    Manager class for proof search requests.
    Every surface (CLI, REST API, web UI) goes through one instance.
    """

    def __init__(self, max_steps=None, oracle_bound=None, workers=None):
        self.max_steps = int(max_steps if max_steps is not None else config.get("MAX_STEPS", 10 ** 6))
        self.oracle_bound = int(oracle_bound if oracle_bound is not None else config.get("ORACLE_BOUND", 3))
        self.workers = int(workers if workers is not None else config.get("CORPUS_WORKERS", 4))

    def prove(self, text, logic="lik", variant="full", derivation_format=None, countermodel=True):
        """
        Decide a formula (or a sequent, when the text contains "=>").

        Args:
            text: Formula or sequent text
            logic: "lik", "likd" or "likt"
            variant: "full" runs the complete search, "minus" the search without inter_down
            derivation_format: None, "text", "json" or "latex"
            countermodel: Include the countermodel of an unprovable query

        Returns:
            Report dict with the verdict and, on request, the derivation and
            the re-checked countermodel

        Raises:
            FormulaSyntaxError: if the text does not parse
            StepBudgetExceeded: if the search hits the step cap or ends inconclusive
        """
        logic = Logic(logic)
        sequent_mode = is_sequent_text(text)
        if sequent_mode:
            goal = parse_sequent(text)
            root = goal
            shown = render_sequent(goal)
        else:
            goal = parse_formula(text)
            root = goal_sequent(goal)
            shown = render(goal)
        report = {"input": shown, "logic": logic.value, "variant": variant}

        if variant == "minus":
            if sequent_mode:
                raise ValueError("the minus variant only takes formulas")
            report["verdict"] = prove_minus(goal, logic, self.max_steps).value
            return report
        if variant != "full":
            raise ValueError(f"Unknown variant: {variant}")

        engine = ProofSearch(logic, self.max_steps, oracle_bound=self.oracle_bound)
        outcome = engine.run(root)
        report["verdict"] = outcome.verdict.value
        report["steps"] = engine.steps
        report["derivation_size"] = outcome.derivation.size()
        report["branches"] = len(outcome.derivation.branches())
        report["rules_used"] = sorted({inst.name for inst in outcome.derivation.instances()})
        if derivation_format:
            report["derivation"] = export_derivation(outcome.derivation, derivation_format)
        if countermodel and outcome.verdict is Verdict.UNPROVABLE:
            model = outcome.countermodel
            report["countermodel"] = model_to_json(model)
            report["countermodel_text"] = model_to_text(model)
            report["countermodel_world"] = outcome.world
            report["countermodel_source"] = outcome.source
            report["verification"] = verify_countermodel(model, logic, outcome.world, goal)
            if not report["verification"]["ok"]:
                logger.error("countermodel for %s failed its re-check: %s", shown, report["verification"])
        return report

    def check_model(self, model_data, logic="lik", formula=None, world=None):
        """
        Check frame properties and, optionally, forcing of a formula.

        Args:
            model_data: Model JSON dict
            logic: Decides which properties are required (serial / reflexive)
            formula: Optional formula text
            world: Optional world id; every world when None

        Returns:
            {"frame": {prop: {"ok", "witness", "required"}}, "forcing": {world: bool}}
            with every property of check_frame; "required" marks those of
            the logic's frame class
        """
        model = model_from_json(model_data)
        required = frame_properties(logic)
        report = {"frame": {prop: {"ok": c.ok, "witness": list(c.witness) if c.witness else None,
                                   "required": prop in required}
                            for prop, c in check_frame(model).items()}}
        if formula:
            f = parse_formula(formula)
            worlds = [world] if world is not None else model.worlds
            report["formula"] = render(f)
            report["forcing"] = {w: forces(model, w, f) for w in worlds}
        return report

    def _run_entry(self, entry, check_equivalence, oracle_bound):
        f = parse_formula(entry.formula)
        result = {"line": entry.line, "formula": entry.formula, "logic": entry.logic.value,
                  "expected": entry.expected.value}
        try:
            outcome = ProofSearch(entry.logic, self.max_steps, oracle_bound=self.oracle_bound).run(goal_sequent(f))
            verdict = outcome.verdict
        except StepBudgetExceeded:
            logger.warning("budget exhausted on line %d: %s", entry.line, entry.formula)
            verdict = Verdict.BUDGET_EXHAUSTED
        result["verdict"] = verdict.value
        ok = verdict is not Verdict.BUDGET_EXHAUSTED
        if entry.expected is not Expected.UNKNOWN:
            ok = ok and verdict.value.lower() == entry.expected.value
        if check_equivalence:
            minus = prove_minus(f, entry.logic, self.max_steps)
            result["minus"] = minus.value
            result["agree"] = minus is verdict
            ok = ok and result["agree"]
        if oracle_bound:
            oracle = brute_force_status(f, entry.logic, oracle_bound)
            result["oracle"] = oracle.status
            result["oracle_ok"] = not (oracle.falsified and verdict is Verdict.PROVABLE)
            ok = ok and result["oracle_ok"]
        result["ok"] = ok
        return result

    def run_corpus(self, entries, check_equivalence=False, oracle_bound=None):
        """
        Run every entry, in parallel, and return results in input order.

        Args:
            entries: CorpusEntry list
            check_equivalence: Cross-check each verdict with the search without inter_down
            oracle_bound: Cross-check with the brute-force oracle up to this many worlds

        Returns:
            List of result dicts, each with an "ok" flag

        Raises:
            ValueError: if oracle_bound is outside 1..MAX_ORACLE_WORLDS
        """
        if oracle_bound is not None and not 1 <= oracle_bound <= MAX_ORACLE_WORLDS:
            raise ValueError(f"oracle bound must be between 1 and {MAX_ORACLE_WORLDS}, got {oracle_bound}")
        results = [None] * len(entries)
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.workers) as executor:
            future_to_index = {executor.submit(self._run_entry, entry, check_equivalence, oracle_bound): i
                               for i, entry in enumerate(entries)}
            for future in concurrent.futures.as_completed(future_to_index):
                i = future_to_index[future]
                results[i] = future.result()
                logger.info("corpus entry %d/%d: %s", i + 1, len(entries), results[i]["verdict"])
        return results

    def get_available_logics(self):
        return AVAILABLE_LOGICS

    def get_axioms(self, logic="lik"):
        """Standard axioms provable in the logic, as {name, formula, logic} dicts."""
        logic = Logic(logic)
        return [{"name": name, "formula": STANDARD_AXIOMS[name]["formula"],
                 "logic": STANDARD_AXIOMS[name]["logic"]}
                for name in AXIOMS_BY_LOGIC[logic.value]]
