"""CLI workspace: a replayable session file next to the exported chain and trace."""
import json
import logging
import random
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ....config.settings import Settings, settings as default_settings
from ....domain.exceptions import DomainException, EvidenceNotFound, WorkspaceError
from ....domain.models.onion import Message
from ....infrastructure.crypto.primitives import random_bytes
from ....infrastructure.ledger.chain_store import save_chain
from ....simulation.network import Network, spawn_network

logger = logging.getLogger(__name__)

SESSION_FILE = "session.json"
CHAIN_FILE = "chain.log"
TRACE_FILE = "trace.jsonl"

Action = Dict[str, Any]


class Workspace:
    """Network state shared by successive CLI invocations.

    Only the seed, the network size and the ordered list of actions are
    stored. Every invocation spawns the same deterministic network, replays the
    actions and so recovers the ledger and every node's key archive.

    Attributes:
        path (Path): State directory
        session (Optional[Dict[str, Any]]): Loaded session file, None before the first action
    """

    def __init__(self, state_dir: Union[str, Path, None] = None, app_settings: Optional[Settings] = None):
        self._settings = app_settings or default_settings
        self.path = Path(state_dir or self._settings.simulation.state_dir)
        self.session: Optional[Dict[str, Any]] = self._load()
        self._network: Optional[Network] = None

    @property
    def session_file(self) -> Path:
        return self.path / SESSION_FILE

    @property
    def chain_file(self) -> Path:
        return self.path / CHAIN_FILE

    @property
    def actions(self) -> List[Action]:
        return self.session["actions"] if self.session else []

    def _load(self) -> Optional[Dict[str, Any]]:
        if not self.session_file.exists():
            return None
        try:
            session = json.loads(self.session_file.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise WorkspaceError(f"Cannot read {self.session_file}: {exc}") from exc
        missing = [field for field in ("seed", "members", "miners", "actions") if field not in session]
        if missing:
            raise WorkspaceError(f"{self.session_file} lacks {', '.join(missing)}")
        return session

    def ensure(self, members: Optional[int] = None, miners: Optional[int] = None,
               seed: Optional[int] = None) -> Dict[str, Any]:
        """Create the session on first use; later values for an existing session are ignored."""
        if self.session is None:
            simulation = self._settings.simulation
            self.session = {
                "seed": simulation.seed if seed is None else seed,
                "members": simulation.members if members is None else members,
                "miners": simulation.miners if miners is None else miners,
                "actions": [],
            }
            logger.info(f"New workspace in {self.path} with seed {self.session['seed']}")
        elif seed is not None and seed != self.session["seed"]:
            logger.warning(f"Workspace {self.path} keeps its seed {self.session['seed']}; ignoring {seed}")
        return self.session

    def network(self) -> Network:
        """Spawn the session's network and replay every recorded action."""
        if self._network is None:
            session = self.ensure()
            network = spawn_network(members=session["members"], miners=session["miners"],
                                    seed=session["seed"], app_settings=self._settings)
            for action in session["actions"]:
                try:
                    self._apply(network, action)
                except DomainException as exc:
                    logger.debug(f"Replayed {action['verb']} failed again: {exc}")
            self._network = network
        return self._network

    def run(self, action: Action) -> Any:
        """Apply a new action, record it and rewrite the exported files.

        Actions that fail are recorded too, since they may already have
        committed transactions; the error is raised after saving.
        """
        network = self.network()
        try:
            return self._apply(network, action)
        finally:
            self.session["actions"].append(action)
            self.save()

    def _apply(self, network: Network, action: Action) -> Any:
        verb = action["verb"]
        if verb == "register":
            return network.add_party(action["id"])
        if verb == "send":
            for party in (action["from"], action["to"]):
                if party not in network.nodes:
                    raise WorkspaceError(f"Unknown party '{party}'")
            message = Message(payload=bytes.fromhex(action["payload"]), timestamp=network.now())
            return network.transmit(action["from"], action["to"], message, action["relays"])
        if verb == "disclose":
            return network.disclose(action["receiver"], action["session"])
        raise WorkspaceError(f"Unknown action '{verb}'")

    def payload(self, payload_bits: int) -> bytes:
        """Seeded random payload for the next action."""
        session = self.ensure()
        rng = random.Random(f"cli/{session['seed']}/{len(session['actions'])}")
        return random_bytes((payload_bits + 7) // 8, rng)

    def session_of(self, receiver: str, evidence: str) -> str:
        """Session in which receiver committed the evidence whose handle starts with the given hex.

        Raises:
            WorkspaceError: receiver is not a party, or the prefix is empty or names several evidences
            EvidenceNotFound: receiver committed no such evidence
        """
        wanted = evidence.strip().lower()
        if not wanted:
            raise WorkspaceError("Evidence handle prefix must not be empty")
        node = self.network().nodes.get(receiver)
        if node is None:
            raise WorkspaceError(f"Unknown party '{receiver}'")
        matches = [session for session, record in node.evidence.items()
                   if record.onchain_handle.hex().startswith(wanted)]
        if not matches:
            raise EvidenceNotFound(evidence)
        if len(matches) > 1:
            raise WorkspaceError(f"Evidence prefix '{evidence}' is ambiguous: {len(matches)} sessions match")
        return matches[0]

    def save(self) -> None:
        self.path.mkdir(parents=True, exist_ok=True)
        self.session_file.write_text(json.dumps(self.session, indent=2), encoding="utf-8")
        if self._network is not None:
            save_chain(self._network.ledger, self.chain_file)
            self._network.export_trace(self.path / TRACE_FILE)
        logger.debug(f"Saved workspace {self.path} with {len(self.actions)} actions")
