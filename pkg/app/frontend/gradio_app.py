import gradio as gr
import requests
from dotenv import dotenv_values

config = dotenv_values('.env')
API_BASE_URL = config.get("API_BASE_URL", "http://localhost:5000")

DEFAULT_LOGICS = {"lik": {"name": "LIK"}}


def fetch_logics(api_base=API_BASE_URL):
    """Logic ids and display names from the backend, with a LIK-only fallback."""
    try:
        response = requests.get(f"{api_base}/api/logics")
        if response.status_code == 200:
            return response.json()
    except Exception as e:
        print(f"Error fetching logics: {str(e)}")
    return DEFAULT_LOGICS


def fetch_axioms(logic, api_base=API_BASE_URL):
    """
    Standard axioms of a logic.

    Returns:
        Dict from "name: formula" labels to formula text
    """
    try:
        response = requests.get(f"{api_base}/api/axioms", params={"logic": logic})
        if response.status_code == 200:
            return {f"{a['name']}: {a['formula']}": a['formula'] for a in response.json()}
    except Exception as e:
        print(f"Error fetching axioms: {str(e)}")
    return {}


def prove_formula(formula, logic, variant, export_format, show_countermodel, api_base=API_BASE_URL):
    """
    Send a formula to the prover.

    Args:
        formula: Formula or sequent text
        logic: Logic id
        variant: "full" or "minus"
        export_format: Derivation format
        show_countermodel: Whether to ask for the countermodel

    Returns:
        (verdict text, derivation text, countermodel JSON or None)
    """
    if not formula or not formula.strip():
        return "Please enter a formula.", "", None

    json_data = {
        'formula': formula,
        'logic': logic,
        'variant': variant,
        'format': export_format if variant == "full" else None,
        'countermodel': bool(show_countermodel),
    }
    try:
        response = requests.post(f"{api_base}/api/prove", json=json_data)
        if response.status_code != 200:
            return f"Error: {response.status_code} - {response.text}", "", None
        result = response.json()
    except Exception as e:
        return f"Error communicating with backend: {str(e)}", "", None

    verdict = f"{result.get('verdict', 'UNKNOWN')} in {result.get('logic', logic).upper()}"
    if 'steps' in result:
        verdict += f" ({result['steps']} rule applications)"
    verification = result.get('verification')
    if verification is not None:
        verdict += "\ncountermodel verified" if verification.get('ok') else "\ncountermodel FAILED its re-check"
    if result.get('countermodel_source') == 'oracle':
        verdict += f" (bounded oracle, refuting at {result.get('countermodel_world')})"
    return verdict, result.get('derivation', ""), result.get('countermodel')


def launch_gradio():
    """Create and launch the Gradio interface."""

    logics = fetch_logics()
    logic_ids = list(logics.keys())
    axioms = fetch_axioms(logic_ids[0]) if logic_ids else {}

    def update_axiom_options(logic):
        """
        Update the axiom examples when the logic changes.

        Args:
            logic: Selected logic id

        Returns:
            Dropdown update with the axioms of that logic
        """
        nonlocal axioms
        axioms = fetch_axioms(logic)
        return gr.update(choices=list(axioms.keys()), value=None)

    def use_axiom(label):
        return axioms.get(label, "")

    with gr.Blocks(title="🧠 Intuitionistic Modal Prover", theme=gr.themes.Base()) as iface:
        gr.Markdown(
            "<h1 style='text-align: center; margin-bottom: 0.5em;'>🧠 Intuitionistic Modal Prover</h1>",
            elem_id="app-title"
        )
        gr.Markdown(
            "<div style='text-align: center; font-size: 1.35em; font-weight: 500; margin-bottom: 1.5em;'>"
            "Decide formulas of LIK, LIKD and LIKT: get a derivation, or a finite countermodel checked world by world."
            "</div>",
            elem_id="app-subtitle"
        )

        with gr.Row():
            with gr.Column(scale=1):
                formula_input = gr.Textbox(
                    label="1. Formula or sequent",
                    placeholder="[](p | q) -> <>p | []q"
                )
                with gr.Group():
                    logic_dropdown = gr.Dropdown(
                        choices=logic_ids,
                        value=logic_ids[0] if logic_ids else None,
                        label="Logic",
                        info="Frame class: FC + DC, plus serial (D) or reflexive (T) accessibility"
                    )
                    axiom_dropdown = gr.Dropdown(
                        choices=list(axioms.keys()),
                        value=None,
                        label="Examples",
                        info="Standard axioms of the selected logic"
                    )
                    variant_radio = gr.Radio(
                        choices=["full", "minus"],
                        value="full",
                        label="Calculus",
                        info="minus drops the inter_down rule and reports a verdict only"
                    )
                    format_dropdown = gr.Dropdown(
                        choices=["text", "json", "latex"],
                        value="text",
                        label="Derivation format"
                    )
                    countermodel_checkbox = gr.Checkbox(value=True, label="Show countermodel")

                prove_btn = gr.Button("2. Prove", variant="primary")

            with gr.Column(scale=1):
                verdict_output = gr.Textbox(label="Verdict", lines=2)
                derivation_output = gr.Textbox(label="Derivation", lines=16)
                model_output = gr.JSON(label="Countermodel")

        prove_btn.click(
            fn=prove_formula,
            inputs=[formula_input, logic_dropdown, variant_radio, format_dropdown, countermodel_checkbox],
            outputs=[verdict_output, derivation_output, model_output],
            show_progress=True
        )

        logic_dropdown.change(
            fn=update_axiom_options,
            inputs=[logic_dropdown],
            outputs=[axiom_dropdown]
        )

        axiom_dropdown.change(
            fn=use_axiom,
            inputs=[axiom_dropdown],
            outputs=[formula_input]
        )

        with gr.Row():
            with gr.Column(scale=1):
                gr.Markdown("## How It Works")
                gr.Markdown("""
                1. **Type a formula** using `&`, `|`, `->`, `~`, `[]`, `<>`, `T` and `F`, or a sequent with `=>`
                2. **Pick a logic** and, optionally, one of its axioms as a starting point
                3. Click **Prove**
                4. A provable formula comes with its derivation; an unprovable one with a countermodel
                """)
            with gr.Column(scale=1):
                gr.Markdown("""
                - **Proof search** saturates bi-nested sequents rule group by rule group and always terminates.
                - **Countermodels** are read off a saturated leaf: its nested sequents are the worlds.
                - Every countermodel is **re-checked** for its frame properties and for refuting the formula at the reported world. When the leaf model falls short, the bounded oracle supplies one.
                """)

    iface.launch(share=False)

    return iface


if __name__ == "__main__":
    launch_gradio()
