import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from helpers import make_config, toy_pairing, toy_schnorr_group, toy_transparent_group  # noqa: E402


@pytest.fixture
def schnorr_group():
    return toy_schnorr_group()


@pytest.fixture
def transparent_group():
    return toy_transparent_group()


@pytest.fixture
def pairing():
    return toy_pairing()


@pytest.fixture(params=["schnorr", "transparent"])
def commit_group(request):
    return toy_schnorr_group() if request.param == "schnorr" else toy_transparent_group()


@pytest.fixture(params=["pedersen", "elgamal"])
def any_config(request, commit_group):
    from apkzk.protocol import ProtocolConfig

    return ProtocolConfig(commit_group, toy_pairing(), mode=request.param, ots_bits=4)


@pytest.fixture
def config():
    return make_config()
