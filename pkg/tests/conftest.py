import numpy as np
import pytest

from fixture_fonts import build_alpha_font, build_beta_font, build_corrupt_font
from glyphsim.confusables import build_ground_truth, checksum_text, parse_confusables
from glyphsim.embedding import EmbeddingStore, EmbeddingVector
from glyphsim.render import load_fonts

DATA_DIR_NAME = "data"

# a small confusables file over the alpha/beta fixture coverage:
# I ~ l, O ~ 0, plus entries that exercise the exclusion rules
FIXTURE_CONFUSABLES = """\
# fixture confusables
0049 ;\t006C ;\tMA\t# I -> l
004F ;\t0030 ;\tMA\t# O -> zero
0041 ;\t0042 ;\tMA\t# A -> B
E000 ;\t0041 ;\tMA\t# blank source: dropped by renderability
0393 ;\t0049 ;\tMA\t# Gamma -> I (Gamma renders only in beta)
"""


@pytest.fixture(scope="session")
def font_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("fixture_fonts")
    build_alpha_font(d / "alpha.ttf")
    build_beta_font(d / "beta.ttf")
    build_corrupt_font(d / "corrupt.bin")
    return d


@pytest.fixture(scope="session")
def alpha_path(font_dir):
    return font_dir / "alpha.ttf"


@pytest.fixture(scope="session")
def beta_path(font_dir):
    return font_dir / "beta.ttf"


@pytest.fixture(scope="session")
def corrupt_path(font_dir):
    return font_dir / "corrupt.bin"


@pytest.fixture(scope="session")
def fc(alpha_path, beta_path):
    return load_fonts([alpha_path, beta_path])


@pytest.fixture(scope="session")
def fc_alpha(alpha_path):
    return load_fonts([alpha_path])


@pytest.fixture(scope="session")
def fixture_gt(fc):
    entries = parse_confusables(FIXTURE_CONFUSABLES)
    return build_ground_truth(
        entries, fc, source_checksum=checksum_text(FIXTURE_CONFUSABLES)
    )


def unit(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    return v / np.linalg.norm(v)


def store_from_rows(rows: dict[int, np.ndarray], tag: str = "test") -> EmbeddingStore:
    vectors = [
        EmbeddingVector(values=unit(v), codepoint=c) for c, v in rows.items()
    ]
    return EmbeddingStore(vectors, backend_tag=tag)


@pytest.fixture
def make_store():
    return store_from_rows
