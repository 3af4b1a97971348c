import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from jpeglines.codec import encode_jpeg_grayscale, parse_jpeg
from jpeglines.corpus import DocumentSpec, LineSpec, render_document

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_page(texts, gaps, scale=1, width=None, quality=75, margin=16):
    """Render lines with the given inter-line gaps and return (CoefficientImage, GroundTruth, PixelImage)."""
    lines = tuple(LineSpec(t, g) for t, g in zip(texts, list(gaps) + [0]))
    width = width or 2 * margin * scale + 8 * scale * max(len(t) for t in texts)
    height = 2 * margin * scale + sum(16 * scale + g for g in gaps) + 16 * scale
    spec = DocumentSpec(width, height, lines, scale, quality, 0, margin * scale, margin * scale)
    img, gt = render_document(spec)
    return parse_jpeg(encode_jpeg_grayscale(img, quality)), gt, img


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def well_spaced_page():
    texts = ["Hello world quick brown", "jumping fox yields gray", "Text lines in blocks", "final pq line here"]
    return make_page(texts, [24, 24, 24])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
