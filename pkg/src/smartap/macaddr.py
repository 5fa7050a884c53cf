"""48-bit MAC address helpers and the per-station BSSID derivation.

Every station gets a private BSSID computed from its own MAC: the
locally-administered bit is set, the group bit is cleared, and the low
46 bits are carried over unchanged. The mapping is a pure function, so
a station's BSSID never changes no matter which AP hosts its virtual AP.
"""

from __future__ import annotations

import re

_MAC_RE = re.compile(r"^([0-9a-fA-F]{2})([-:]?)([0-9a-fA-F]{2})(?:\2([0-9a-fA-F]{2})){4}$")

LOCAL_BIT = 0x02_00_00_00_00_00
GROUP_BIT = 0x01_00_00_00_00_00


def normalize_mac(value: str) -> str:
    """Canonicalize a MAC string to lowercase colon-separated form.

    Raises ValueError for anything that is not a 48-bit address.
    """
    if not isinstance(value, str) or not _MAC_RE.match(value.strip()):
        raise ValueError(f"invalid MAC address: {value!r}")
    digits = re.sub(r"[-:]", "", value.strip()).lower()
    return ":".join(digits[i : i + 2] for i in range(0, 12, 2))


def mac_to_int(value: str) -> int:
    return int(re.sub(r"[-:]", "", normalize_mac(value)), 16)


def int_to_mac(value: int) -> str:
    if not 0 <= value < 1 << 48:
        raise ValueError(f"MAC value out of range: {value:#x}")
    digits = f"{value:012x}"
    return ":".join(digits[i : i + 2] for i in range(0, 12, 2))


def derive_bssid(sta_mac: str) -> str:
    """Private BSSID for a station: locally administered, unicast, low 46 bits kept."""
    value = mac_to_int(sta_mac)
    return int_to_mac((value | LOCAL_BIT) & ~GROUP_BIT)
