'''
Command-line front end: prove, check-model, corpus and serve.

Exit codes: 0 provable (or every check passed), 1 unprovable (or some
check failed), 2 input errors, 3 step budget exhausted.
'''

import argparse
import json
import logging
import sys
import threading

from dotenv import dotenv_values

from app.backend.utils.generators import random_corpus
from app.backend.utils.logic_catalog import CorpusEntry, Expected, format_corpus_line, load_corpus
from app.backend.utils.prover_manager import ProverManager
from app.backend.utils.search import StepBudgetExceeded, Verdict

logger = logging.getLogger(__name__)

config = dotenv_values('.env')

EXIT_PROVABLE = 0
EXIT_UNPROVABLE = 1
EXIT_ERROR = 2
EXIT_BUDGET = 3


def build_parser():
    parser = argparse.ArgumentParser(prog="main.py", description="Decision procedure for LIK, LIKD and LIKT")
    parser.add_argument("--log-level", default=config.get("LOG_LEVEL", "WARNING"),
                        help="Logging level (default from .env)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--logic", choices=["lik", "likd", "likt"], default=config.get("DEFAULT_LOGIC", "lik"))
        p.add_argument("--max-steps", type=int, default=int(config.get("MAX_STEPS", 10 ** 6)),
                       help="Safety cap on rule applications")

    prove = sub.add_parser("prove", help="Decide a formula or sequent")
    prove.add_argument("formula", nargs="?", help="Formula, or a sequent containing =>")
    prove.add_argument("--file", help="Read the formula from a file")
    common(prove)
    prove.add_argument("--variant", choices=["full", "minus"], default="full")
    prove.add_argument("--derivation", action="store_true", help="Print the derivation")
    prove.add_argument("--format", choices=["text", "json", "latex"], default="text")
    prove.add_argument("--countermodel", action="store_true", help="Print the re-checked countermodel")

    check = sub.add_parser("check-model", help="Check a model in the JSON model format")
    check.add_argument("--model", required=True, help="Model JSON file")
    check.add_argument("--formula", help="Formula whose forcing is reported")
    check.add_argument("--world", help="World to evaluate at (default: every world)")
    check.add_argument("--logic", choices=["lik", "likd", "likt"], default=config.get("DEFAULT_LOGIC", "lik"))

    corpus = sub.add_parser("corpus", help="Run a regression corpus")
    source = corpus.add_mutually_exclusive_group(required=True)
    source.add_argument("--corpus", help="File of `logic TAB expected TAB formula` lines")
    source.add_argument("--random", type=int, metavar="N", help="Generate N random entries")
    common(corpus)
    corpus.add_argument("--seed", type=int, default=int(config.get("RANDOM_SEED", 0)))
    corpus.add_argument("--check-equivalence", action="store_true",
                        help="Cross-check every verdict with the search without inter_down")
    corpus.add_argument("--check-oracle", "--oracle-bound", dest="check_oracle", type=int, metavar="N", default=None,
                        help="Cross-check with the brute-force oracle up to N worlds")
    corpus.add_argument("--workers", type=int, default=int(config.get("CORPUS_WORKERS", 4)))
    corpus.add_argument("--save", metavar="FILE",
                        help="Write the entries with their verdicts as expectations, in the corpus format")

    serve = sub.add_parser("serve", help="Run the REST API and the web UI")
    serve.add_argument("--port", type=int, default=int(config.get("FLASK_PORT", 5000)))
    return parser


def _read_formula(args):
    if args.file:
        with open(args.file, encoding="utf-8") as handle:
            return handle.read().strip()
    if not args.formula:
        raise ValueError("no formula given")
    return args.formula


def cmd_prove(args, out=None):
    out = out or sys.stdout
    manager = ProverManager(max_steps=args.max_steps)
    try:
        text = _read_formula(args)
        report = manager.prove(text, logic=args.logic, variant=args.variant,
                               derivation_format=args.format if args.derivation else None,
                               countermodel=args.countermodel)
    except StepBudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    print(report["verdict"], file=out)
    if "derivation" in report:
        print(report["derivation"], file=out)
    if "countermodel" in report:
        print(json.dumps(report["countermodel"], indent=2), file=out)
        if report["countermodel_source"] == "oracle":
            print(f"countermodel found by the bounded oracle, refuting at {report['countermodel_world']}", file=out)
        if report["verification"]["ok"]:
            print("countermodel verified", file=out)
        else:
            print(f"countermodel FAILED: {report['verification']}", file=out)
            return EXIT_ERROR
    verdict = Verdict(report["verdict"])
    if verdict is Verdict.PROVABLE:
        return EXIT_PROVABLE
    if verdict is Verdict.UNPROVABLE:
        return EXIT_UNPROVABLE
    return EXIT_BUDGET


def cmd_check_model(args, out=None):
    out = out or sys.stdout
    manager = ProverManager()
    try:
        with open(args.model, encoding="utf-8") as handle:
            data = json.load(handle)
        report = manager.check_model(data, logic=args.logic, formula=args.formula, world=args.world)
    except (ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    ok = True
    for prop, result in report["frame"].items():
        note = "" if result["required"] else f" (not required by {args.logic})"
        if result["ok"]:
            print(f"{prop}: ok{note}", file=out)
        else:
            ok = ok and not result["required"]
            print(f"{prop}: FAILED, witness {', '.join(map(str, result['witness']))}{note}", file=out)
    for world, forced in report.get("forcing", {}).items():
        ok = ok and forced
        print(f"{world}: {'forced' if forced else 'not forced'}", file=out)
    return EXIT_PROVABLE if ok else EXIT_UNPROVABLE


def cmd_corpus(args, out=None):
    out = out or sys.stdout
    manager = ProverManager(max_steps=args.max_steps, workers=args.workers)
    try:
        if args.corpus:
            entries = load_corpus(args.corpus)
        else:
            entries = random_corpus(args.seed, args.random, args.logic)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    try:
        results = manager.run_corpus(entries, check_equivalence=args.check_equivalence,
                                     oracle_bound=args.check_oracle)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    failures = 0
    for result in results:
        failures += not result["ok"]
        cells = ["ok" if result["ok"] else "FAIL", result["logic"], result["expected"], result["verdict"]]
        if "minus" in result:
            cells.append(f"minus={result['minus']}")
        if "oracle" in result:
            cells.append(f"oracle={result['oracle']}")
        cells.append(result["formula"])
        print("\t".join(cells), file=out)
    print(f"{len(results)} entries, {failures} mismatches", file=out)
    if args.check_equivalence and all(r["agree"] for r in results):
        print("all verdicts agree", file=out)
    if args.save:
        _save_corpus(args.save, entries, results)
        print(f"corpus written to {args.save}", file=out)
    return EXIT_PROVABLE if failures == 0 else EXIT_UNPROVABLE


def _save_corpus(path, entries, results):
    """Entries with their verdicts as expectations; budget-exhausted entries stay unknown."""
    expected = {Verdict.PROVABLE.value: Expected.PROVABLE, Verdict.UNPROVABLE.value: Expected.UNPROVABLE}
    with open(path, "w", encoding="utf-8") as handle:
        for entry, result in zip(entries, results):
            saved = CorpusEntry(entry.formula, entry.logic, expected.get(result["verdict"], Expected.UNKNOWN))
            handle.write(format_corpus_line(saved) + "\n")


def cmd_serve(args):
    """Flask in a daemon thread, Gradio in the main thread."""
    from app.backend.services.flask_app import app as flask_app
    from app.frontend.gradio_app import launch_gradio

    def run_flask():
        flask_app.run(debug=False, port=args.port, use_reloader=False)

    flask_thread = threading.Thread(target=run_flask)
    flask_thread.daemon = True
    flask_thread.start()

    launch_gradio()
    return 0


COMMANDS = {
    "prove": cmd_prove,
    "check-model": cmd_check_model,
    "corpus": cmd_corpus,
    "serve": cmd_serve,
}


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    return COMMANDS[args.command](args)
