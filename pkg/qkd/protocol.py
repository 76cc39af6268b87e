"""Two-party CV-QKD protocol over an in-process classical channel.

Steps:
    (i)   Alice and Bob share n time windows of the joint state.
    (ii)  Each picks x or p per window from its own random stream.
    (iii) They announce bases and keep the windows where the bases match.
    (iv)  Alice picks a fraction of the sifted windows; both reveal their
          values there and estimate the channel.
    (v)   Each computes the asymptotic key rate from the estimate; the run
          is accepted only if both find a positive rate.

Each party is a generator that yields ``Send`` and ``Receive`` actions. The
schedulers deliver them through a ``DuplexChannel``. Messages are recorded
in canonical (round, sender) order, so the interleaved and threaded
schedulers produce the same transcript.
"""
import json
import queue
import threading
from enum import Enum
from typing import Any, Dict, Generator, List, NamedTuple, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from config import Config
from utils.errors import InsufficientDataError, ProtocolStateError
from utils.logger import setup_logger

from .estimation import ChannelEstimate, RevealedPairs, estimate_channel
from .gaussian import KeyRateResult, TwoModeCovariance, key_rate
from .sampling import party_streams, sample_quadratures

logger = setup_logger(__name__)

ALICE = 'alice'
BOB = 'bob'
_SENDER_ORDER = {ALICE: 0, BOB: 1}
_PEER = {ALICE: BOB, BOB: ALICE}


class MessageType(str, Enum):
    BASIS_ANNOUNCE = 'basis-announce'
    REVEAL_INDICES = 'reveal-indices'
    REVEAL_VALUES = 'reveal-values'
    ESTIMATE_REPORT = 'estimate-report'
    ACCEPT = 'accept'
    ABORT = 'abort'


ROUND_OF = {
    MessageType.BASIS_ANNOUNCE: 1,
    MessageType.REVEAL_INDICES: 2,
    MessageType.REVEAL_VALUES: 3,
    MessageType.ESTIMATE_REPORT: 4,
    MessageType.ACCEPT: 5,
    MessageType.ABORT: 5,
}


class Message(BaseModel):
    """One classical message; payloads hold only JSON-native values."""
    model_config = ConfigDict(frozen=True)

    round: int
    sender: str
    type: MessageType
    payload: Dict[str, Any]


class PublicParameters(BaseModel):
    """Run parameters known to both parties. Holds nothing about the true state."""
    model_config = ConfigDict(frozen=True)

    n_windows: int
    reveal_fraction: float
    beta_rec: float
    source_variance: float


class ProtocolConfig(BaseModel):
    """Inputs of one protocol run.

    Attributes:
        cm: True joint state per time window
        n_windows: Number of time windows
        reveal_fraction: Share of sifted windows revealed for estimation
        seed: 64-bit seed of all random streams
        beta_rec: Reconciliation efficiency
        source_variance: Announced source variance V_A; defaults to the
            mean of Alice's x and p variances in ``cm``
        scheduler: 'interleaved' (single thread) or 'threaded'
    """
    model_config = ConfigDict(frozen=True)

    cm: TwoModeCovariance
    n_windows: int = Field(default_factory=lambda: Config.PROTOCOL_N_WINDOWS, ge=100)
    reveal_fraction: float = Field(default_factory=lambda: Config.PROTOCOL_REVEAL_FRACTION, gt=0, lt=1)
    seed: int = Field(ge=0, lt=2 ** 64)
    beta_rec: float = Field(default_factory=lambda: Config.BETA_REC, gt=0, le=1)
    source_variance: Optional[float] = Field(default=None, ge=1.0)
    scheduler: str = 'interleaved'

    @field_validator('cm')
    @classmethod
    def _physical(cls, cm: TwoModeCovariance) -> TwoModeCovariance:
        if not cm.is_physical():
            raise ValueError("protocol state must be a physical covariance matrix")
        return cm

    @field_validator('scheduler')
    @classmethod
    def _known_scheduler(cls, value: str) -> str:
        if value not in SCHEDULERS:
            raise ValueError(f"scheduler must be one of {sorted(SCHEDULERS)}, got {value}")
        return value

    def public(self) -> PublicParameters:
        """The parameters both parties agree on before the run."""
        variance = self.source_variance
        if variance is None:
            variance = float(np.mean(np.diag(self.cm.matrix)[:2]))
        return PublicParameters(
            n_windows=self.n_windows,
            reveal_fraction=self.reveal_fraction,
            beta_rec=self.beta_rec,
            source_variance=variance,
        )

    def echo(self) -> Dict[str, Any]:
        """Scheduler-independent copy of the inputs for the transcript."""
        return {
            'n_windows': self.n_windows,
            'reveal_fraction': self.reveal_fraction,
            'seed': self.seed,
            'beta_rec': self.beta_rec,
            'source_variance': self.public().source_variance,
            'cm': self.cm.matrix.tolist(),
        }


class Decision(BaseModel):
    accepted: bool
    reason: str
    key_rate: Optional[KeyRateResult] = None


class Transcript(BaseModel):
    """Full record of one run, serializable to deterministic JSON."""
    version: str = Config.TRANSCRIPT_VERSION
    config: Dict[str, Any]
    messages: List[Message]
    sifted_count: int
    revealed_count: int
    estimated_cm: Optional[TwoModeCovariance] = None
    estimated_eta: Optional[float] = None
    estimated_excess_noise: Optional[float] = None
    decision: Decision

    model_config = ConfigDict(arbitrary_types_allowed=True)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode='json'), indent=2) + '\n'


# ============================================================
# Party state machines
# ============================================================

class Send(NamedTuple):
    message: Message


class Receive(NamedTuple):
    expected: Tuple[MessageType, ...]


class PartyOutcome(NamedTuple):
    accepted: bool
    reason: str
    estimate: Optional[ChannelEstimate]
    key: Optional[KeyRateResult]
    sifted_count: int
    revealed_count: int


PartyProgram = Generator[Union[Send, Receive], Optional[Message], PartyOutcome]


def _encode_bases(bases: np.ndarray) -> str:
    return ''.join('x' if b == 0 else 'p' for b in bases)


def _decode_bases(text: str, n: int) -> np.ndarray:
    if len(text) != n or set(text) - {'x', 'p'}:
        raise ProtocolStateError(f"malformed basis announcement of length {len(text)}")
    return np.frombuffer(text.encode('ascii'), dtype=np.uint8) == ord('p')


class Party:
    """One side of the protocol, holding only its own measurement record.

    Args:
        name: 'alice' or 'bob'
        quadratures: (n, 2) array of this party's (x, p) samples; only the
            measured one per window is kept
        rng: This party's random stream
        public: Parameters announced before the run
    """

    def __init__(self, name: str, quadratures: np.ndarray, rng: np.random.Generator,
                 public: PublicParameters):
        self.name = name
        self.rng = rng
        self.public = public
        self.source_variance = public.source_variance

        n = public.n_windows
        self.bases = rng.integers(0, 2, size=n).astype(np.uint8)
        # measured quadrature per window; the other one is discarded
        self.values = np.where(self.bases == 0, quadratures[:, 0], quadratures[:, 1])

    def _message(self, kind: MessageType, payload: Dict[str, Any]) -> Message:
        return Message(round=ROUND_OF[kind], sender=self.name, type=kind, payload=payload)

    def _expect(self, message: Optional[Message], *kinds: MessageType) -> Message:
        if message is None or message.type not in kinds or message.sender != _PEER[self.name]:
            got = 'nothing' if message is None else f"{message.type.value} from {message.sender}"
            raise ProtocolStateError(
                f"{self.name} expected {'/'.join(k.value for k in kinds)} from {_PEER[self.name]}, got {got}"
            )
        return message

    def _sift(self, announcement: Message) -> np.ndarray:
        peer_bases = _decode_bases(announcement.payload.get('bases', ''), self.public.n_windows)
        return np.flatnonzero(peer_bases == self.bases.astype(bool))

    def _estimate(self, indices: np.ndarray, alice_values, bob_values) -> Tuple[Dict[str, Any], Optional[ChannelEstimate], Optional[KeyRateResult]]:
        revealed = RevealedPairs(bases=self.bases[indices], alice=np.asarray(alice_values, dtype=float),
                                 bob=np.asarray(bob_values, dtype=float))
        try:
            estimate = estimate_channel(revealed, self.source_variance)
        except InsufficientDataError as e:
            logger.warning(f"{self.name}: {e}")
            return {'status': 'insufficient-data'}, None, None

        if not estimate.significant:
            return {
                'status': 'no-correlation',
                'eta': estimate.eta,
                'excess_noise': estimate.excess_noise,
                'key_rate': None,
            }, estimate, None

        key = key_rate(estimate.model_cm, self.public.beta_rec)
        return {
            'status': 'ok',
            'eta': estimate.eta,
            'excess_noise': estimate.excess_noise,
            'key_rate': key.key_rate,
        }, estimate, key

    @staticmethod
    def _verdict(report: Dict[str, Any], peer_report: Dict[str, Any]) -> Tuple[bool, str]:
        if report.get('status') != 'ok':
            return False, report.get('status', 'no-estimate')
        if peer_report != report:
            return False, 'estimate-mismatch'
        if report['key_rate'] <= 0:
            return False, 'non-positive-key-rate'
        return True, 'positive-key-rate'

    def _finish(self, report, peer_report, estimate, key, sifted, revealed) -> PartyProgram:
        accepted, reason = self._verdict(report, peer_report)
        kind = MessageType.ACCEPT if accepted else MessageType.ABORT
        yield Send(self._message(kind, {'reason': reason}))
        peer = self._expect((yield Receive((MessageType.ACCEPT, MessageType.ABORT))),
                            MessageType.ACCEPT, MessageType.ABORT)
        if accepted and peer.type != MessageType.ACCEPT:
            accepted, reason = False, f"peer-abort: {peer.payload.get('reason', '')}"
        return PartyOutcome(accepted, reason, estimate, key, int(sifted.size), int(revealed.size))


class AliceParty(Party):

    def __init__(self, quadratures, rng, public):
        super().__init__(ALICE, quadratures, rng, public)

    def run(self) -> PartyProgram:
        yield Send(self._message(MessageType.BASIS_ANNOUNCE, {'bases': _encode_bases(self.bases)}))
        announcement = self._expect((yield Receive((MessageType.BASIS_ANNOUNCE,))), MessageType.BASIS_ANNOUNCE)
        sifted = self._sift(announcement)

        n_reveal = min(sifted.size, max(1, int(round(self.public.reveal_fraction * sifted.size))))
        indices = np.sort(self.rng.choice(sifted, size=n_reveal, replace=False)) if sifted.size else sifted
        yield Send(self._message(MessageType.REVEAL_INDICES, {'indices': [int(i) for i in indices]}))

        own = [float(v) for v in self.values[indices]]
        yield Send(self._message(MessageType.REVEAL_VALUES, {'values': own}))
        peer_values = self._expect((yield Receive((MessageType.REVEAL_VALUES,))), MessageType.REVEAL_VALUES)
        theirs = peer_values.payload.get('values', [])
        if len(theirs) != len(own):
            raise ProtocolStateError(f"bob revealed {len(theirs)} values for {len(own)} indices")

        report, estimate, key = self._estimate(indices, own, theirs)
        yield Send(self._message(MessageType.ESTIMATE_REPORT, report))
        peer_report = self._expect((yield Receive((MessageType.ESTIMATE_REPORT,))), MessageType.ESTIMATE_REPORT)

        outcome = yield from self._finish(report, peer_report.payload, estimate, key, sifted, indices)
        return outcome


class BobParty(Party):

    def __init__(self, quadratures, rng, public):
        super().__init__(BOB, quadratures, rng, public)

    def run(self) -> PartyProgram:
        yield Send(self._message(MessageType.BASIS_ANNOUNCE, {'bases': _encode_bases(self.bases)}))
        announcement = self._expect((yield Receive((MessageType.BASIS_ANNOUNCE,))), MessageType.BASIS_ANNOUNCE)
        sifted = self._sift(announcement)

        request = self._expect((yield Receive((MessageType.REVEAL_INDICES,))), MessageType.REVEAL_INDICES)
        indices = np.asarray(request.payload.get('indices', []), dtype=np.int64)
        if indices.size and not np.all(np.isin(indices, sifted)):
            raise ProtocolStateError("alice asked to reveal windows outside the sifted set")

        own = [float(v) for v in self.values[indices]]
        yield Send(self._message(MessageType.REVEAL_VALUES, {'values': own}))
        peer_values = self._expect((yield Receive((MessageType.REVEAL_VALUES,))), MessageType.REVEAL_VALUES)
        theirs = peer_values.payload.get('values', [])
        if len(theirs) != len(own):
            raise ProtocolStateError(f"alice revealed {len(theirs)} values for {len(own)} indices")

        report, estimate, key = self._estimate(indices, theirs, own)
        yield Send(self._message(MessageType.ESTIMATE_REPORT, report))
        peer_report = self._expect((yield Receive((MessageType.ESTIMATE_REPORT,))), MessageType.ESTIMATE_REPORT)

        outcome = yield from self._finish(report, peer_report.payload, estimate, key, sifted, indices)
        return outcome


# ============================================================
# Transport and schedulers
# ============================================================

class DuplexChannel:
    """Ordered, reliable, typed message transport between the two parties."""

    def __init__(self):
        self._inbox = {ALICE: queue.Queue(), BOB: queue.Queue()}
        self._log: List[Message] = []
        self._lock = threading.Lock()

    def send(self, sender: str, message: Message) -> None:
        if not isinstance(message, Message) or not isinstance(message.type, MessageType):
            raise ProtocolStateError(f"{sender} tried to send an untyped object {type(message).__name__}")
        if message.sender != sender:
            raise ProtocolStateError(f"{sender} tried to send a message signed by {message.sender}")
        with self._lock:
            self._log.append(message)
        self._inbox[_PEER[sender]].put(message)

    def poll(self, recipient: str) -> Optional[Message]:
        try:
            return self._inbox[recipient].get_nowait()
        except queue.Empty:
            return None

    def receive(self, recipient: str, timeout: float) -> Message:
        try:
            return self._inbox[recipient].get(timeout=timeout)
        except queue.Empty:
            raise ProtocolStateError(f"{recipient} timed out waiting for a message") from None

    def transcript(self) -> List[Message]:
        with self._lock:
            return sorted(self._log, key=lambda m: (m.round, _SENDER_ORDER[m.sender]))


def _run_interleaved(programs: Dict[str, PartyProgram], channel: DuplexChannel) -> Dict[str, PartyOutcome]:
    actions = {name: next(program) for name, program in programs.items()}
    outcomes: Dict[str, PartyOutcome] = {}

    while len(outcomes) < len(programs):
        progressed = False
        for name, program in programs.items():
            if name in outcomes:
                continue
            action = actions[name]
            if isinstance(action, Send):
                channel.send(name, action.message)
                reply = None
            else:
                reply = channel.poll(name)
                if reply is None:
                    continue
            progressed = True
            try:
                actions[name] = program.send(reply)
            except StopIteration as stop:
                outcomes[name] = stop.value
        if not progressed:
            raise ProtocolStateError("both parties are waiting for each other")
    return outcomes


def _run_threaded(programs: Dict[str, PartyProgram], channel: DuplexChannel) -> Dict[str, PartyOutcome]:
    outcomes: Dict[str, PartyOutcome] = {}
    errors: List[BaseException] = []

    def drive(name: str, program: PartyProgram) -> None:
        try:
            action = next(program)
            while True:
                if isinstance(action, Send):
                    channel.send(name, action.message)
                    reply = None
                else:
                    reply = channel.receive(name, Config.PROTOCOL_TIMEOUT_S)
                action = program.send(reply)
        except StopIteration as stop:
            outcomes[name] = stop.value
        except BaseException as e:
            errors.append(e)

    threads = [threading.Thread(target=drive, args=(name, program), name=f"qkd-{name}", daemon=True)
               for name, program in programs.items()]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    if errors:
        raise errors[0]
    return outcomes


SCHEDULERS = {
    'interleaved': _run_interleaved,
    'threaded': _run_threaded,
}


def run_protocol(config: ProtocolConfig) -> Transcript:
    """Run steps (i)-(v) once and return the transcript.

    An abort is a normal outcome recorded in ``Transcript.decision``.

    Raises:
        ProtocolStateError: when a party receives a message its state
            machine does not allow (an internal bug, not an abort)
    """
    logger.info(f"Step 1: Sampling {config.n_windows} windows (seed={config.seed})")
    streams = party_streams(config.seed)
    samples = sample_quadratures(config.cm, config.n_windows, rng=streams.state)

    logger.info("Step 2: Parties choose bases")
    public = config.public()
    alice = AliceParty(samples[:, :2], streams.alice, public)
    bob = BobParty(samples[:, 2:], streams.bob, public)

    logger.info(f"Step 3: Running the classical exchange ({config.scheduler} scheduler)")
    channel = DuplexChannel()
    outcomes = SCHEDULERS[config.scheduler]({ALICE: alice.run(), BOB: bob.run()}, channel)

    mine, theirs = outcomes[ALICE], outcomes[BOB]
    accepted = mine.accepted and theirs.accepted
    reason = mine.reason if not mine.accepted or accepted else theirs.reason
    estimate = mine.estimate

    decision = Decision(accepted=accepted, reason=reason, key_rate=mine.key)
    logger.info(
        f"Step 4: {'Accepted' if accepted else 'Aborted'} ({reason}); "
        f"sifted {mine.sifted_count}, revealed {mine.revealed_count}"
    )

    return Transcript(
        config=config.echo(),
        messages=channel.transcript(),
        sifted_count=mine.sifted_count,
        revealed_count=mine.revealed_count,
        estimated_cm=estimate.estimated_cm if estimate else None,
        estimated_eta=estimate.eta if estimate else None,
        estimated_excess_noise=estimate.excess_noise if estimate else None,
        decision=decision,
    )
