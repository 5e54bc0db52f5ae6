# Frontend package initialization: Gradio prover UI
