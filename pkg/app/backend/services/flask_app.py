import logging
import traceback

from flask import Flask, request, jsonify
from flask_cors import CORS
from dotenv import dotenv_values

from app.backend.utils.prover_manager import ProverManager
from app.backend.utils.search import StepBudgetExceeded

logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app)

config = dotenv_values('.env')
app.config['MAX_STEPS'] = int(config.get('MAX_STEPS', 10 ** 6))
app.config['DEFAULT_LOGIC'] = config.get('DEFAULT_LOGIC', 'lik')

# Initialize prover manager
prover_manager = ProverManager(max_steps=app.config['MAX_STEPS'])


@app.route('/api/prove', methods=['POST'])
def prove():
    """Decide a formula or sequent."""
    try:
        data = request.get_json(silent=True) or {}
        text = data.get('formula')
        if not text:
            return jsonify({'error': 'No formula provided'}), 400

        report = prover_manager.prove(
            text,
            logic=data.get('logic', app.config['DEFAULT_LOGIC']),
            variant=data.get('variant', 'full'),
            derivation_format=data.get('format'),
            countermodel=data.get('countermodel', True),
        )
        return jsonify(report), 200

    except StepBudgetExceeded as e:
        logger.warning("step budget exhausted: %s", e)
        return jsonify({'error': 'The search exceeded its step budget.', 'details': str(e)}), 422
    except (ValueError, KeyError) as e:
        return jsonify({'error': 'Invalid request.', 'details': str(e)}), 400
    except Exception as e:
        traceback.print_exc()
        return jsonify({'error': 'An error occurred during proof search.', 'details': str(e)}), 500


@app.route('/api/check_model', methods=['POST'])
def check_model():
    """Check frame properties of a model and forcing of an optional formula."""
    try:
        data = request.get_json(silent=True) or {}
        model = data.get('model')
        if model is None:
            return jsonify({'error': 'No model provided'}), 400

        report = prover_manager.check_model(
            model,
            logic=data.get('logic', app.config['DEFAULT_LOGIC']),
            formula=data.get('formula'),
            world=data.get('world'),
        )
        return jsonify(report), 200

    except (ValueError, KeyError) as e:
        return jsonify({'error': 'Invalid model or query.', 'details': str(e)}), 400
    except Exception as e:
        traceback.print_exc()
        return jsonify({'error': 'An error occurred while checking the model.', 'details': str(e)}), 500


@app.route('/api/logics', methods=['GET'])
def get_logics():
    """Get the supported logics."""
    try:
        return jsonify(prover_manager.get_available_logics()), 200
    except Exception as e:
        traceback.print_exc()
        return jsonify({'error': 'An error occurred while retrieving logics.', 'details': str(e)}), 500


@app.route('/api/axioms', methods=['GET'])
def get_axioms():
    """Get the standard axioms of a logic."""
    try:
        logic = request.args.get('logic', app.config['DEFAULT_LOGIC'])
        return jsonify(prover_manager.get_axioms(logic)), 200
    except ValueError as e:
        return jsonify({'error': 'Unknown logic.', 'details': str(e)}), 400
    except Exception as e:
        traceback.print_exc()
        return jsonify({'error': 'An error occurred while retrieving axioms.', 'details': str(e)}), 500


@app.route('/api/health', methods=['GET'])
def health_check():
    """Simple health check endpoint."""
    return jsonify({'status': 'ok'}), 200


if __name__ == '__main__':
    app.run(debug=True)
