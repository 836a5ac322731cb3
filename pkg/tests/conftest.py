from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def sample_project_tex() -> str:
    return (DATA_DIR / "sample_paper.tex").read_text(encoding="utf-8")
