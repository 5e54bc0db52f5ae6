'''
Text, JSON and LaTeX (bussproofs) renderings of derivations and models.
'''

import json
import logging

from app.backend.utils.formula import ASCII, LATEX, Formula, render
from app.backend.utils.sequent import render_position, render_sequent, sequent_to_json

logger = logging.getLogger(__name__)

FORMATS = ("text", "json", "latex")


def _principal(items):
    return [render(x) if isinstance(x, Formula) else x for x in items]


def _leaf_label(node):
    if node.axiom is not None:
        pos, rule = node.axiom
        return f"{rule.value} at {render_position(pos)}"
    return node.status.value


def derivation_to_text(d, style=ASCII):
    """
    Indented tree, conclusion first; each premise is indented below its rule.

    Args:
        d: A Derivation
        style: Sequent rendering style
    """
    lines = []
    stack = [(d.root, 0)]
    while stack:
        node, depth = stack.pop()
        label = node.rule.describe() if node.rule is not None else _leaf_label(node)
        lines.append(f"{'  ' * depth}{render_sequent(node.sequent, style)}    [{label}]")
        for child in reversed(node.children):
            stack.append((child, depth + 1))
    return "\n".join(lines)


def _node_to_json(node):
    data = {"sequent": sequent_to_json(node.sequent), "text": render_sequent(node.sequent)}
    if node.rule is not None:
        data["rule"] = node.rule.name
        data["pos"] = render_position(node.rule.pos)
        data["principal"] = _principal(node.rule.principal)
    elif node.axiom is not None:
        pos, rule = node.axiom
        data["axiom"] = {"rule": rule.value, "pos": render_position(pos)}
    else:
        data["status"] = node.status.value
    data["children"] = [_node_to_json(child) for child in node.children]
    return data


def derivation_to_json(d):
    return _node_to_json(d.root)


_INFERENCES = {1: r"\UnaryInfC", 2: r"\BinaryInfC", 3: r"\TrinaryInfC"}


def _latex_label(text):
    return r"\RightLabel{\scriptsize " + text.replace("_", r"\_") + "}"


def derivation_to_latex(d):
    """A bussproofs prooftree; open leaves are printed as bare hypotheses."""
    out = [r"\begin{prooftree}"]
    # post-order: premises first, then the inference that joins them
    stack = [(d.root, False)]
    while stack:
        node, expanded = stack.pop()
        seq = "$" + render_sequent(node.sequent, LATEX) + "$"
        if not node.children:
            if node.axiom is not None:
                out.append(r"\AxiomC{}")
                out.append(_latex_label(node.axiom[1].value))
                out.append(r"\UnaryInfC{" + seq + "}")
            else:
                out.append(r"\AxiomC{" + seq + "}")
            continue
        if expanded:
            out.append(_latex_label(node.rule.name))
            out.append(_INFERENCES[len(node.children)] + "{" + seq + "}")
            continue
        stack.append((node, True))
        for child in reversed(node.children):
            stack.append((child, False))
    out.append(r"\end{prooftree}")
    return "\n".join(out)


def export_derivation(d, fmt="text"):
    """Render d in one of FORMATS (json is returned as an indented string)."""
    if fmt == "text":
        return derivation_to_text(d)
    if fmt == "json":
        return json.dumps(derivation_to_json(d), indent=2, ensure_ascii=False)
    if fmt == "latex":
        return derivation_to_latex(d)
    raise ValueError(f"Unknown format: {fmt}")


def model_to_text(m):
    """Short human-readable summary of a model."""
    lines = [f"worlds: {', '.join(m.worlds)}"]
    strict = [f"{a} <= {b}" for a, b in m.le_pairs() if a != b]
    lines.append("order: " + (", ".join(strict) if strict else "(identity)"))
    access = [f"{a} R {b}" for a, b in m.r_pairs()]
    lines.append("access: " + (", ".join(access) if access else "(empty)"))
    for p in sorted(m.val):
        lines.append(f"V({p}) = {{{', '.join(sorted(m.valuation(p), key=m.index))}}}")
    return "\n".join(lines)
