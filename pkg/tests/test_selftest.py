import numpy as np
import pytest

from src.harness.selftest import (
    CHECKS,
    check_index_maps,
    check_isserlis,
    check_precision,
    cmd_selftest,
)


class TestIndividualChecks:
    @pytest.mark.parametrize("check", [check_index_maps, check_isserlis, check_precision])
    def test_fast_checks_pass(self, check):
        passed, detail = check(np.random.default_rng(0))
        assert passed, detail


class TestCmdSelftest:
    def test_crashing_check_is_reported_as_failure(self, monkeypatch):
        def boom(rng):
            raise RuntimeError("broken")

        monkeypatch.setattr("src.harness.selftest.CHECKS", {"boom": boom})
        results = cmd_selftest()
        assert len(results) == 1
        assert not results[0].passed
        assert "RuntimeError: broken" in results[0].detail

    def test_check_names_unique(self):
        assert len(CHECKS) == len(set(CHECKS))
