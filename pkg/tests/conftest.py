import pathlib

import pytest

from bincall.parser import parse_listing

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def fixture_text(name):
    return (FIXTURES / name).read_text()


@pytest.fixture
def sock_client():
    return parse_listing(fixture_text("sock_client.nal"))


@pytest.fixture
def toggle():
    return parse_listing(fixture_text("toggle.nal"))
