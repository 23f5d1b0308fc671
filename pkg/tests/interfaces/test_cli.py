"""Tests for the onionchain command line."""
import json
from io import StringIO
from pathlib import Path

import pytest

from ygo74.onionchain.config.settings import ObservabilitySettings, Settings, SimulationSettings
from ygo74.onionchain.domain.models.bench import CSV_HEADER
from ygo74.onionchain.interfaces.cli.__main__ import main


@pytest.fixture
def cli_settings(tmp_path: Path) -> Settings:
    return Settings(
        observability=ObservabilitySettings(metrics_enabled=False),
        simulation=SimulationSettings(state_dir=str(tmp_path / "workspace")),
    )


def _invoke(cli_settings: Settings, *argv: str):
    out = StringIO()
    code = main(list(argv), out_file=out, app_settings=cli_settings)
    return code, out.getvalue()


def _json(text: str):
    return json.loads(text)


class TestCliBasics:
    """Test suite for help, version and usage errors."""

    def test_help(self, cli_settings: Settings):
        code, _ = _invoke(cli_settings, "--help")
        assert code == 0

    def test_unknown_command_is_a_usage_error(self, cli_settings: Settings):
        code, _ = _invoke(cli_settings, "teleport")
        assert code == 2

    def test_version(self, cli_settings: Settings):
        code, out = _invoke(cli_settings, "version")
        assert code == 0
        assert _json(out)["version"]


class TestProtocolCommands:
    """Test suite for register, send and disclose against one workspace."""

    def test_register_creates_workspace(self, cli_settings: Settings, tmp_path: Path):
        """Test the first register creates the session file and commits the identity."""
        # act
        code, out = _invoke(cli_settings, "register", "--id", "zoe", "--state-dir", str(tmp_path))

        # assert
        assert code == 0
        result = _json(out)
        assert result["id"] == "zoe"
        assert result["height"] >= 2
        assert (tmp_path / "session.json").exists()
        assert (tmp_path / "chain.log").exists()

    def test_duplicate_registration_fails(self, cli_settings: Settings, tmp_path: Path):
        _invoke(cli_settings, "register", "--id", "zoe", "--state-dir", str(tmp_path))
        code, _ = _invoke(cli_settings, "register", "--id", "zoe", "--state-dir", str(tmp_path))
        assert code == 5

    def test_send_then_disclose(self, cli_settings: Settings, tmp_path: Path):
        """Test a sent message can be disclosed in a later invocation and blames the sender."""
        # arrange
        code, out = _invoke(cli_settings, "send", "--from", "node-01", "--to", "node-02",
                            "--relays", "3", "--state-dir", str(tmp_path))
        assert code == 0
        receipt = _json(out)
        assert len(receipt["evidence"]) == 4

        # act
        code, out = _invoke(cli_settings, "disclose", "--receiver", "node-02",
                            "--evidence", receipt["evidence"][-1][:16], "--state-dir", str(tmp_path))

        # assert
        assert code == 0
        verdict = _json(out)
        assert verdict["culprit"] == "node-01"
        assert verdict["reason"] == "TransmitterOrigin"
        assert len(verdict["pleas"]) == 4

    def test_send_text(self, cli_settings: Settings, tmp_path: Path):
        code, out = _invoke(cli_settings, "send", "--from", "node-03", "--to", "node-04", "--text", "hi",
                            "--state-dir", str(tmp_path))
        assert code == 0
        assert _json(out)["receiver"] == "node-04"

    def test_send_to_unknown_party(self, cli_settings: Settings, tmp_path: Path):
        code, _ = _invoke(cli_settings, "send", "--from", "node-01", "--to", "nobody", "--state-dir", str(tmp_path))
        assert code == 8

    def test_disclose_unknown_evidence(self, cli_settings: Settings, tmp_path: Path):
        _invoke(cli_settings, "register", "--id", "zoe", "--state-dir", str(tmp_path))
        code, _ = _invoke(cli_settings, "disclose", "--receiver", "node-02", "--evidence", "ffff",
                          "--state-dir", str(tmp_path))
        assert code == 7


class TestLedgerCommands:
    """Test suite for chain file verification."""

    def test_verify_exported_chain(self, cli_settings: Settings, tmp_path: Path):
        # arrange
        _invoke(cli_settings, "register", "--id", "zoe", "--state-dir", str(tmp_path))

        # act
        code, out = _invoke(cli_settings, "ledger", "verify", str(tmp_path / "chain.log"))

        # assert
        assert code == 0
        assert _json(out)["valid"]

    def test_verify_truncated_chain(self, cli_settings: Settings, tmp_path: Path):
        """Test dropping the last transaction line breaks the merkle root."""
        # arrange
        _invoke(cli_settings, "register", "--id", "zoe", "--state-dir", str(tmp_path))
        chain = tmp_path / "chain.log"
        lines = chain.read_text(encoding="utf-8").splitlines()
        last_tx = max(i for i, line in enumerate(lines) if line.startswith("T "))
        chain.write_text("\n".join(lines[:last_tx] + lines[last_tx + 1:]) + "\n", encoding="utf-8")

        # act
        code, out = _invoke(cli_settings, "ledger", "verify", str(chain))

        # assert
        assert code == 1
        assert not _json(out)["valid"]

    @pytest.mark.parametrize("content", ["H zz\n", "garbage\n"])
    def test_verify_malformed_file(self, cli_settings: Settings, tmp_path: Path, content: str):
        chain = tmp_path / "broken.log"
        chain.write_text(content, encoding="utf-8")
        code, out = _invoke(cli_settings, "ledger", "verify", str(chain))
        assert code == 1
        assert "error" in _json(out)

    def test_verify_missing_file(self, cli_settings: Settings, tmp_path: Path):
        code, _ = _invoke(cli_settings, "ledger", "verify", str(tmp_path / "absent.log"))
        assert code == 1

    def test_verify_requires_file_argument(self, cli_settings: Settings):
        code, _ = _invoke(cli_settings, "ledger", "verify")
        assert code == 2


class TestAttackAndBenchCommands:
    """Test suite for scenario and sweep commands."""

    def test_attack_honest(self, cli_settings: Settings, tmp_path: Path):
        # arrange
        trace = tmp_path / "trace.jsonl"

        # act
        code, out = _invoke(cli_settings, "attack", "honest", "--nodes", "10", "--seed", "7",
                            "--trace-out", str(trace))

        # assert
        assert code == 0
        result = _json(out)
        assert result["defeated"]
        assert result["evidence_count"] == 4
        assert trace.read_text(encoding="utf-8").strip()

    def test_attack_messenger_variant(self, cli_settings: Settings):
        code, out = _invoke(cli_settings, "attack", "malicious-messenger", "--seed", "7", "--variant", "reuse")
        assert code == 0
        assert _json(out)["culprit"] in _json(out)["expected_culprits"]

    def test_bench_relays_to_file(self, cli_settings: Settings, tmp_path: Path):
        """Test a relay sweep writes the CSV header and two rows per relay count."""
        # arrange
        target = tmp_path / "out" / "relays.csv"

        # act
        code, _ = _invoke(cli_settings, "bench", "relays", "--relays", "3", "--reps", "1", "--seed", "3",
                          "--out", str(target))

        # assert
        assert code == 0
        lines = target.read_text(encoding="utf-8").splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 3

    def test_bench_payload_to_stdout(self, cli_settings: Settings):
        code, out = _invoke(cli_settings, "bench", "payload", "--payload-bits", "64", "--reps", "1", "--seed", "3")
        assert code == 0
        assert out.splitlines()[0] == CSV_HEADER
