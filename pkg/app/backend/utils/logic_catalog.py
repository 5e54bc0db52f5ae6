'''
This module contains metadata for the supported logics, the standard axioms
and the known non-theorems, and the corpus line format used by the
regression files under corpora/.
'''

from dataclasses import dataclass
from enum import Enum

from app.backend.utils.calculus import Logic
from app.backend.utils.formula import parse_formula

AVAILABLE_LOGICS = {
    "lik": {"name": "LIK", "frame_class": "FC + DC", "extra_rules": [], "extra_property": None},
    "likd": {"name": "LIKD", "frame_class": "FC + DC, serial R", "extra_rules": ["D"], "extra_property": "serial"},
    "likt": {"name": "LIKT", "frame_class": "FC + DC, reflexive R", "extra_rules": ["T_box", "T_dia"],
             "extra_property": "reflexive"},
}

# Axioms, by the weakest logic proving them.
STANDARD_AXIOMS = {
    "K_box": {"formula": "[](p -> q) -> []p -> []q", "logic": "lik"},
    "K_dia": {"formula": "[](p -> q) -> <>p -> <>q", "logic": "lik"},
    "N": {"formula": "~<>F", "logic": "lik"},
    "DP": {"formula": "<>(p | q) -> <>p | <>q", "logic": "lik"},
    "RV": {"formula": "[](p | q) -> <>p | []q", "logic": "lik"},
    "D": {"formula": "<>T", "logic": "likd"},
    "D_box_dia": {"formula": "[]p -> <>p", "logic": "likd"},
    "D_not_box_bot": {"formula": "~[]F", "logic": "likd"},
    "T": {"formula": "([]p -> p) & (p -> <>p)", "logic": "likt"},
    "T_box": {"formula": "[]p -> p", "logic": "likt"},
    "T_dia": {"formula": "p -> <>p", "logic": "likt"},
}

# Unprovable in every logic listed.
NON_THEOREMS = {
    "box_bot": {"formula": "[]F", "logics": ["lik", "likd", "likt"]},
    "dia_top": {"formula": "<>T", "logics": ["lik"]},
    "dia_to_box": {"formula": "<>p -> []p", "logics": ["lik", "likd", "likt"]},
    "atom": {"formula": "p", "logics": ["lik", "likd", "likt"]},
    "independence": {"formula": "(<>p -> []q) -> [](p -> q)", "logics": ["lik", "likd", "likt"]},
    "excluded_middle": {"formula": "p | ~p", "logics": ["lik", "likd", "likt"]},
    "four_box": {"formula": "[]p -> [][]p", "logics": ["lik", "likd", "likt"]},
}

# Every logic proves the axioms of the logics below it.
_STRENGTH = {"lik": ["lik"], "likd": ["lik", "likd"], "likt": ["lik", "likd", "likt"]}

AXIOMS_BY_LOGIC = {}
for logic_id in AVAILABLE_LOGICS:
    AXIOMS_BY_LOGIC[logic_id] = [name for name, info in STANDARD_AXIOMS.items()
                                 if info["logic"] in _STRENGTH[logic_id]]

NON_THEOREMS_BY_LOGIC = {}
for name, info in NON_THEOREMS.items():
    for logic_id in info["logics"]:
        NON_THEOREMS_BY_LOGIC.setdefault(logic_id, []).append(name)


class Expected(Enum):
    PROVABLE = "provable"
    UNPROVABLE = "unprovable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CorpusEntry:
    formula: str
    logic: Logic
    expected: Expected
    line: int = 0


def parse_corpus_line(text, line=0):
    """
    Parse `logic TAB expected TAB formula`.

    Returns:
        CorpusEntry, or None for blank and `#` comment lines

    Raises:
        ValueError: on a wrong field count, an unknown logic or expectation,
            or a formula that does not parse
    """
    stripped = text.strip()
    if not stripped or stripped.startswith("#"):
        return None
    fields = text.rstrip("\n").split("\t")
    if len(fields) != 3:
        raise ValueError(f"line {line}: expected 3 tab-separated fields, got {len(fields)}")
    logic, expected, formula = (field.strip() for field in fields)
    try:
        entry = CorpusEntry(formula, Logic(logic), Expected(expected), line)
    except ValueError as e:
        raise ValueError(f"line {line}: {e}") from e
    parse_formula(formula)
    return entry


def load_corpus(path):
    """Read a corpus file; comment lines are skipped."""
    entries = []
    with open(path, encoding="utf-8") as handle:
        for number, text in enumerate(handle, start=1):
            entry = parse_corpus_line(text, number)
            if entry is not None:
                entries.append(entry)
    return entries


def format_corpus_line(entry):
    return f"{entry.logic.value}\t{entry.expected.value}\t{entry.formula}"


def axiom_entries(logic_id):
    """The standard axioms provable in logic_id, as corpus entries."""
    return [CorpusEntry(STANDARD_AXIOMS[name]["formula"], Logic(logic_id), Expected.PROVABLE)
            for name in AXIOMS_BY_LOGIC[logic_id]]


def non_theorem_entries(logic_id):
    return [CorpusEntry(NON_THEOREMS[name]["formula"], Logic(logic_id), Expected.UNPROVABLE)
            for name in NON_THEOREMS_BY_LOGIC.get(logic_id, [])]
