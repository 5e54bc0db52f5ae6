# Tests package initialization
# Import all test modules for discovery
from . import test_formula
from . import test_sequent
from . import test_calculus
from . import test_search
from . import test_semantics
from . import test_generators
from . import test_export
from . import test_logic_catalog
from . import test_prover_manager
from . import test_flask_api
from . import test_gradio_interface
from . import test_cli
from . import test_acceptance
