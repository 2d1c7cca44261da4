"""Run the acceptance tests and print one PASS/FAIL line per criterion.

    python3 scripts/acceptance_sweep.py

Exit status is pytest's: expected failures count as success.
"""

import sys
from pathlib import Path

import pytest

root = Path(__file__).resolve().parent.parent
sys.exit(pytest.main([str(root / "tests" / "test_acceptance.py"), "-q", "-rx", "-p", "no:cacheprovider"]))
