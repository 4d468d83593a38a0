"""Assembled test networks and the config-driven scenario runner."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from ..auth_schemes import DEFAULT_KDF, SCHEMES, CredentialStore, HandshakeState, ServerContext, group_for
from ..crypto_group import PROFILES, get_profile
from ..sip_core import SipParseError, format_auth_params, parse_auth_params, parse_message, serialize_message
from .network import AdversaryHook, HookMode, Network, Transcript

DEFAULT_REALM = "siplab.test"
DEFAULT_USER = "alice"
DEFAULT_PASSWORD = "sunflower42"


@dataclass
class Session:
    """One authentication run between a user agent and the registrar."""

    call_id: str
    client: HandshakeState
    server: HandshakeState | None
    transcript: Transcript

    @property
    def accepted(self) -> bool:
        return (
            self.server is not None
            and self.client.verdict.value == "accepted"
            and self.server.verdict.value == "accepted"
        )


class Testbed:
    """Registrar, proxy, location service and user agents on one network."""

    __test__ = False  # not a pytest class

    def __init__(self, scheme: str, profile="TOY", seed: int = 0, *, realm: str = DEFAULT_REALM,
                 nonce_reuse: bool = False, kdf=DEFAULT_KDF, hook: AdversaryHook | None = None):
        from ..entities import Authenticator, LocationService, ProxyServer, Registrar

        self.scheme = scheme
        self.profile = get_profile(profile) if isinstance(profile, str) else profile
        self.group = group_for(scheme, self.profile)
        self.realm = realm
        self.kdf = kdf
        self.rng = random.Random(seed)
        self.network = Network(hook)
        self.location = LocationService()
        self.store = CredentialStore()
        self.registrar = Registrar(
            "registrar", self.network, self.location,
            Authenticator(scheme, self._context("registrar", nonce_reuse)),
        )
        self.proxy = ProxyServer(
            "proxy", self.network, self.location, Authenticator(scheme, self._context("proxy", nonce_reuse)),
        )
        # A REGISTER handshake with the registrar also authenticates towards the proxy.
        self.proxy.authenticated = self.registrar.authenticated
        self.users = {}
        self.sessions: dict[str, Session] = {}

    def _context(self, identity: str, nonce_reuse: bool) -> ServerContext:
        return ServerContext(
            self.store, self.realm, identity, self.group, random.Random(self.rng.getrandbits(64)),
            nonce_reuse=nonce_reuse, kdf=self.kdf,
        )

    def add_user(self, name: str = DEFAULT_USER, password: str | bytes = DEFAULT_PASSWORD, register: bool = True):
        from ..auth_schemes import Credential
        from ..entities import UserAgent, register_ua

        cred = Credential(name, password, self.realm)
        ua = UserAgent(f"sip:{name}@{self.realm}", cred, self.network, self.scheme, self.group,
                       random.Random(self.rng.getrandbits(64)), kdf=self.kdf)
        self.users[name] = ua
        if register:
            register_ua(ua, self.registrar)
        return ua

    def handshake(self, ua) -> Session:
        since = self.network.seq
        call_id = ua.authenticate(self.registrar.id, self.realm)
        client = ua.calls[call_id].state
        server = None
        for cid, state in reversed(self.registrar.authenticator.finished):
            if cid == call_id:
                server = state
                break
        if server is None:
            server = self.registrar.authenticator.sessions.get(call_id)
        session = Session(call_id, client, server, self.network.transcript(since))
        self.sessions[call_id] = session
        return session


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


ATTACKS = ("replay", "offline-guessing", "server-spoofing", "denning-sacco", "known-key", "forward-secrecy")
ORACLE_ATTACKS = ("offline-guessing", "forward-secrecy")
ACTIONS = ("none", "drop-all", "tamper-response")


@dataclass(frozen=True)
class AdversarySpec:
    mode: str = "off"
    action: str = "none"
    attacks: tuple[str, ...] = ()
    oracle: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    scheme: str
    profile: str = "TOY"
    seed: int = 0
    trials: int = 1
    dictionary: str | None = None
    flow: str = "register"
    nonce_reuse: bool = False
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    name: str | None = None

    @property
    def label(self) -> str:
        return self.name or f"{self.scheme}-{self.profile}-{self.seed}"


def _expect(raw: dict, key: str, types, path: str, default=None):
    if key not in raw:
        return default
    value = raw[key]
    if not isinstance(value, types) or isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise ConfigError(f"{path}{key}", f"expected {getattr(types, '__name__', types)}, got {value!r}")
    return value


def validate_config(raw: dict) -> ScenarioConfig:
    """Check a raw mapping and build a ScenarioConfig. Errors name the offending field."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    known = {"scheme", "profile", "seed", "trials", "dictionary", "flow", "nonce_reuse", "adversary", "name"}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown field")
    scheme = _expect(raw, "scheme", str, "")
    if scheme is None:
        raise ConfigError("scheme", "missing")
    if scheme not in SCHEMES:
        raise ConfigError("scheme", f"unknown scheme tag {scheme!r}; expected one of {list(SCHEMES)}")
    profile = _expect(raw, "profile", str, "", "TOY").upper()
    if profile not in PROFILES:
        raise ConfigError("profile", f"expected one of {sorted(PROFILES)}")
    seed = _expect(raw, "seed", int, "", 0)
    if seed < 0 or seed >= 2**64:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    trials = _expect(raw, "trials", int, "", 1)
    if trials < 1:
        raise ConfigError("trials", "must be >= 1")
    flow = _expect(raw, "flow", str, "", "register")
    if flow not in ("register", "invite"):
        raise ConfigError("flow", "expected 'register' or 'invite'")
    adv_raw = raw.get("adversary", {})
    if not isinstance(adv_raw, dict):
        raise ConfigError("adversary", "must be a mapping")
    for key in adv_raw:
        if key not in ("mode", "action", "attacks", "oracle"):
            raise ConfigError(f"adversary.{key}", "unknown field")
    mode = _expect(adv_raw, "mode", str, "adversary.", "off")
    if mode not in [m.value for m in HookMode]:
        raise ConfigError("adversary.mode", f"expected one of {[m.value for m in HookMode]}")
    action = _expect(adv_raw, "action", str, "adversary.", "none")
    if action not in ACTIONS:
        raise ConfigError("adversary.action", f"expected one of {list(ACTIONS)}")
    if action != "none" and mode != "active":
        raise ConfigError("adversary.action", "only an active adversary can act")
    attacks = _expect(adv_raw, "attacks", list, "adversary.", [])
    for i, attack in enumerate(attacks):
        if attack not in ATTACKS:
            raise ConfigError(f"adversary.attacks[{i}]", f"unknown attack {attack!r}; expected one of {list(ATTACKS)}")
    oracle = _expect(adv_raw, "oracle", bool, "adversary.", False)
    if oracle and profile != "TOY":
        raise ConfigError("adversary.oracle", "a discrete-log oracle needs profile TOY")
    return ScenarioConfig(
        scheme=scheme,
        profile=profile,
        seed=seed,
        trials=trials,
        dictionary=_expect(raw, "dictionary", str, ""),
        flow=flow,
        nonce_reuse=_expect(raw, "nonce_reuse", bool, "", False),
        adversary=AdversarySpec(mode, action, tuple(attacks), oracle),
        name=_expect(raw, "name", str, ""),
    )


def load_config(path) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    return validate_config(raw)


class ScenarioError(RuntimeError):
    pass


def _tamper_response(data: bytes) -> bytes:
    try:
        msg = parse_message(data)
        value = msg.header("Authorization")
        if not value:
            return data
        params = parse_auth_params(value)
    except (SipParseError, ValueError):
        return data
    if params.get("step") != "response":
        return data
    key = "response" if "response" in params else "auth"
    old = params[key]
    flipped = old[:-1] + ("0" if old[-1] != "0" else "1")
    new = type(params)(params.scheme_tag, tuple((k, flipped if k == key else v) for k, v in params.params))
    return serialize_message(msg.with_header("Authorization", format_auth_params(new)))


def build_hook(adv: AdversarySpec) -> AdversaryHook:
    mode = HookMode(adv.mode)
    if adv.action == "drop-all":
        return AdversaryHook(mode, mutate=lambda data: None)
    if adv.action == "tamper-response":
        return AdversaryHook(mode, mutate=_tamper_response)
    return AdversaryHook(mode)


def read_dictionary(path) -> list[str]:
    """One password per line, UTF-8. Duplicates are dropped, order kept."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError("dictionary", f"cannot read {path}: {exc}") from None
    words = [w for w in text.splitlines() if w]
    return list(dict.fromkeys(words))


def default_dictionary(size: int = 1000, include: str = DEFAULT_PASSWORD) -> list[str]:
    """Deterministic stand-in word list that contains ``include``."""
    stems = ["sun", "moon", "star", "tiger", "dragon", "rose", "lily", "river", "stone", "cloud",
             "flower", "summer", "winter", "falcon", "maple", "ocean", "shadow", "silver", "forest", "ember"]
    words = [include]
    word_set = {include}
    i = 0
    while len(words) < size:
        w = f"{stems[i % len(stems)]}{stems[(i // len(stems)) % len(stems)]}{i % 97}"
        if w not in word_set:
            words.append(w)
            word_set.add(w)
        i += 1
    words.sort()
    return words


def run_scenario(config: ScenarioConfig | dict):
    """Run the scripted exchange to quiescence.

    Returns ``(transcript, outcomes)``; everything is a function of the
    config and its seed.
    """
    if isinstance(config, dict):
        config = validate_config(config)
    from .. import adversary as adv
    from ..entities import AuthenticationFailed, CalleeNotFound, proxy_invite_flow

    bed = Testbed(config.scheme, config.profile, config.seed, nonce_reuse=config.nonce_reuse,
                  hook=build_hook(config.adversary))
    alice = bed.add_user(DEFAULT_USER, DEFAULT_PASSWORD)
    outcomes: dict = {"scenario": config.label, "scheme": config.scheme, "profile": config.profile, "seed": config.seed}
    if config.flow == "invite":
        bob = bed.add_user("bob", "bobspassword")
        since = bed.network.seq
        try:
            flow = proxy_invite_flow(alice, bob, bed.proxy)
            outcomes["flow"] = [s.value for s in flow.steps]
            outcomes["completed"] = True
        except (AuthenticationFailed, CalleeNotFound) as exc:
            outcomes["flow"] = [s.value for s in exc.flow.steps] if exc.flow else []
            outcomes["completed"] = False
            outcomes["error"] = f"{type(exc).__name__}: {exc}"
        return bed.network.transcript(since), outcomes

    since = bed.network.seq
    session = bed.handshake(alice)
    keys_agree = None
    if SCHEMES[config.scheme].derives_key:
        keys_agree = session.client.sk is not None and session.client.sk == getattr(session.server, "sk", None)
    outcomes["handshake"] = {
        "client": session.client.verdict.value,
        "server": session.server.verdict.value if session.server else "none",
        "keys_agree": keys_agree,
        "messages": len(session.transcript),
    }
    if config.adversary.attacks:
        dictionary = read_dictionary(config.dictionary) if config.dictionary else default_dictionary()
        if DEFAULT_PASSWORD not in dictionary:
            raise ConfigError("dictionary", "dictionary does not contain the true password")
        oracle = adv.DlogOracle(bed.group) if config.adversary.oracle and bed.group is not None else None
        results = {}
        for attack in config.adversary.attacks:
            outcome = adv.run_attack(attack, bed, session, dictionary=dictionary, trials=config.trials,
                                     dlp_oracle=oracle if attack in ORACLE_ATTACKS else None,
                                     rng=random.Random(config.seed ^ 0x5EED))
            results[attack] = outcome.to_dict()
        outcomes["attacks"] = results
    # Everything after registration: the handshake, then whatever the attacks put on the wire.
    return bed.network.transcript(since), outcomes
