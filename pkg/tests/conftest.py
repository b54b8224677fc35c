import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import config  # noqa: E402


@pytest.fixture
def sequential(monkeypatch):
    """Evaluate candidate batches on the calling thread."""
    monkeypatch.setattr(config, "ENABLE_MULTITHREADING", False)


@pytest.fixture(autouse=True)
def no_webhook(monkeypatch):
    monkeypatch.setattr(config, "WEBHOOK_URL", "")
