"""Built-in parameter profiles and the JSON profile loader.

TOY groups are small enough for the discrete-log oracle. STD groups are a
2048-bit safe-prime field and NIST P-256, used for timing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .groups import EcGroup, ModpGroup

# 2048-bit MODP prime from RFC 3526. 11 is the smallest primitive root, so
# the generator spans all of Z_p^* and every residue is a possible element.
_RFC3526_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)


@dataclass(frozen=True)
class Profile:
    name: str
    modp: ModpGroup
    ec: EcGroup

    def group_for(self, kind: str):
        return self.modp if kind == "modp" else self.ec


TOY = Profile(
    "TOY",
    ModpGroup(p=23, g=5, q=22, name="toy-modp"),
    EcGroup(field_prime=17, a=2, b=2, gx=5, gy=1, n=19, name="toy-ec"),
)

STD = Profile(
    "STD",
    ModpGroup(p=_RFC3526_2048, g=11, q=_RFC3526_2048 - 1, name="modp-2048"),
    EcGroup(
        field_prime=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
        a=-3 % 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
        b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
        gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
        gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
        n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
        name="p-256",
    ),
)

PROFILES = {"TOY": TOY, "STD": STD}


def get_profile(name: str) -> Profile:
    try:
        return PROFILES[name.upper()]
    except KeyError:
        raise KeyError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}") from None


def _hex(section: dict, key: str, where: str) -> int:
    try:
        return int(section[key], 16)
    except KeyError:
        raise ValueError(f"{where}.{key}: missing") from None
    except (TypeError, ValueError):
        raise ValueError(f"{where}.{key}: expected a hex string") from None


def load_profile(path) -> Profile:
    """Read a profile from JSON with hex-encoded constants.

    Layout::

        {"name": "...",
         "modp": {"p": "17", "g": "05", "q": "16"},
         "ec": {"field": "11", "a": "02", "b": "02", "gx": "05", "gy": "01", "n": "13"}}
    """
    raw = json.loads(Path(path).read_text())
    modp = raw.get("modp") or {}
    ec = raw.get("ec") or {}
    name = raw.get("name", Path(path).stem)
    return Profile(
        name,
        ModpGroup(_hex(modp, "p", "modp"), _hex(modp, "g", "modp"), _hex(modp, "q", "modp"), name=f"{name}-modp"),
        EcGroup(
            _hex(ec, "field", "ec"),
            _hex(ec, "a", "ec"),
            _hex(ec, "b", "ec"),
            _hex(ec, "gx", "ec"),
            _hex(ec, "gy", "ec"),
            _hex(ec, "n", "ec"),
            name=f"{name}-ec",
        ),
    )
