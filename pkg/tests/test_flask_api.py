import pytest
from unittest.mock import MagicMock

from app.backend.services.flask_app import app
from app.backend.utils.formula import FormulaSyntaxError
from app.backend.utils.prover_manager import ProverManager
from app.backend.utils.search import InconclusiveSearch, StepBudgetExceeded


class TestFlaskAPI:
    """Test suite for the Flask API."""

    @pytest.fixture
    def client(self):
        """Create a test client for the Flask app."""
        app.config['TESTING'] = True

        with app.test_client() as client:
            yield client

    @pytest.fixture
    def mock_prover_manager(self, monkeypatch):
        """Create a mock ProverManager for testing."""
        mock_manager = MagicMock(spec=ProverManager)
        mock_manager.prove.return_value = {"input": "p -> p", "logic": "lik", "variant": "full",
                                           "verdict": "PROVABLE", "steps": 0, "derivation_size": 1}
        mock_manager.check_model.return_value = {"frame": {"fc": {"ok": True, "witness": None}}}
        mock_manager.get_available_logics.return_value = {"lik": {"name": "LIK"}}
        mock_manager.get_axioms.return_value = [{"name": "RV", "formula": "[](p | q) -> <>p | []q",
                                                 "logic": "lik"}]

        # Monkeypatch the ProverManager in the flask_app module
        monkeypatch.setattr('app.backend.services.flask_app.prover_manager', mock_manager)

        yield mock_manager

    def test_health_check(self, client):
        """Test the health check endpoint."""
        response = client.get('/api/health')

        assert response.status_code == 200
        assert response.json['status'] == 'ok'

    def test_prove(self, client, mock_prover_manager):
        """Test the prove endpoint."""
        json_data = {'formula': 'p -> p', 'logic': 'likd', 'format': 'latex'}

        response = client.post('/api/prove', json=json_data)

        assert response.status_code == 200
        assert response.json['verdict'] == 'PROVABLE'
        mock_prover_manager.prove.assert_called_once_with(
            'p -> p', logic='likd', variant='full', derivation_format='latex', countermodel=True)

    def test_prove_defaults(self, client, mock_prover_manager):
        """Test that the prove endpoint falls back to the default logic."""
        client.post('/api/prove', json={'formula': 'p'})

        _, kwargs = mock_prover_manager.prove.call_args
        assert kwargs['logic'] == app.config['DEFAULT_LOGIC']
        assert kwargs['derivation_format'] is None

    def test_prove_missing_formula(self, client, mock_prover_manager):
        """Test prove endpoint with missing formula."""
        response = client.post('/api/prove', json={})

        assert response.status_code == 400
        assert 'No formula provided' in response.json['error']
        assert not mock_prover_manager.prove.called

    def test_prove_syntax_error(self, client, mock_prover_manager):
        """Test that parse errors come back as 400 with the position."""
        mock_prover_manager.prove.side_effect = FormulaSyntaxError("unexpected end of input", 3)

        response = client.post('/api/prove', json={'formula': 'p &'})

        assert response.status_code == 400
        assert 'position 3' in response.json['details']

    def test_prove_budget(self, client, mock_prover_manager):
        """Test that an exhausted step budget is reported as 422."""
        mock_prover_manager.prove.side_effect = StepBudgetExceeded(10)

        response = client.post('/api/prove', json={'formula': 'p'})

        assert response.status_code == 422
        assert 'step budget' in response.json['error']

    def test_prove_inconclusive(self, client, mock_prover_manager):
        """Test that an open leaf without a verified countermodel is reported as 422."""
        mock_prover_manager.prove.side_effect = InconclusiveSearch(10, 3)

        response = client.post('/api/prove', json={'formula': 'p'})

        assert response.status_code == 422
        assert 'up to 3 worlds' in response.json['details']

    def test_prove_exception_handling(self, client, mock_prover_manager):
        """Test exception handling in the prove endpoint."""
        mock_prover_manager.prove.side_effect = Exception("Test error")

        response = client.post('/api/prove', json={'formula': 'p'})

        assert response.status_code == 500
        assert 'Test error' in response.json['details']

    def test_check_model(self, client, mock_prover_manager):
        """Test the check_model endpoint."""
        model = {'worlds': ['w'], 'le': [['w', 'w']], 'r': []}

        response = client.post('/api/check_model', json={'model': model, 'formula': 'p'})

        assert response.status_code == 200
        assert response.json['frame']['fc']['ok']
        mock_prover_manager.check_model.assert_called_once_with(
            model, logic=app.config['DEFAULT_LOGIC'], formula='p', world=None)

    def test_check_model_missing_model(self, client, mock_prover_manager):
        """Test check_model endpoint with missing model."""
        response = client.post('/api/check_model', json={'formula': 'p'})

        assert response.status_code == 400
        assert 'No model provided' in response.json['error']

    def test_check_model_malformed(self, client, mock_prover_manager):
        """Test check_model endpoint with a malformed model."""
        mock_prover_manager.check_model.side_effect = ValueError("model JSON lacks r")

        response = client.post('/api/check_model', json={'model': {'worlds': []}})

        assert response.status_code == 400
        assert 'lacks r' in response.json['details']

    def test_get_logics(self, client, mock_prover_manager):
        """Test the logics endpoint."""
        response = client.get('/api/logics')

        assert response.status_code == 200
        assert 'lik' in response.json
        assert mock_prover_manager.get_available_logics.called

    def test_get_axioms(self, client, mock_prover_manager):
        """Test the axioms endpoint."""
        response = client.get('/api/axioms?logic=likd')

        assert response.status_code == 200
        assert response.json[0]['name'] == 'RV'
        mock_prover_manager.get_axioms.assert_called_once_with('likd')

    def test_get_axioms_unknown_logic(self, client, mock_prover_manager):
        """Test the axioms endpoint with an unknown logic."""
        mock_prover_manager.get_axioms.side_effect = ValueError("'s4' is not a valid Logic")

        response = client.get('/api/axioms?logic=s4')

        assert response.status_code == 400


class TestFlaskAPIEndToEnd:
    """Test suite for the Flask API backed by a real ProverManager."""

    @pytest.fixture
    def client(self, monkeypatch):
        app.config['TESTING'] = True
        monkeypatch.setattr('app.backend.services.flask_app.prover_manager', ProverManager(max_steps=100_000))
        with app.test_client() as client:
            yield client

    def test_prove_countermodel(self, client):
        response = client.post('/api/prove', json={'formula': '(<>p -> []q) -> [](p -> q)'})

        assert response.status_code == 200
        assert response.json['verdict'] == 'UNPROVABLE'
        assert response.json['verification']['ok']
        assert response.json['countermodel']['r'] == [['x', 'x.m0']]

    def test_prove_syntax_error(self, client):
        response = client.post('/api/prove', json={'formula': 'p $ q'})

        assert response.status_code == 400
        assert 'position 2' in response.json['details']

    def test_check_model(self, client):
        model = {'worlds': ['w'], 'le': [['w', 'w']], 'r': [], 'val': {'p': ['w']}}

        response = client.post('/api/check_model', json={'model': model, 'logic': 'likd', 'formula': 'p'})

        assert response.status_code == 200
        assert response.json['frame']['serial'] == {'ok': False, 'witness': ['w'], 'required': True}
        assert response.json['forcing'] == {'w': True}
