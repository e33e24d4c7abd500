import os

import pytest

# keep unit tests independent of the host core count
os.environ.setdefault("LOGTREE_THREADS", "2")


@pytest.fixture
def report(capsys):
    """Print a line straight to the terminal even when output is captured."""
    def emit(line):
        with capsys.disabled():
            print("\n" + line)
    return emit
