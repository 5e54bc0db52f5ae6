import sys

from app.backend.services.cli import run

if __name__ == "__main__":
    sys.exit(run())
