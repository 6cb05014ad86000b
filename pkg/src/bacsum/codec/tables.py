"""Enumeration name tables for BACnet codes.

Object types, property identifiers, error classes/codes and friends are loaded
from ``data/enums.json`` (generated by ``tools/gen_enum_tables.py``). Service
choice names are kept inline in the camelCase spelling analysts see in
dissector output.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

CONFIRMED_SERVICES: dict[int, str] = {
    0: "acknowledgeAlarm",
    1: "confirmedCOVNotification",
    2: "confirmedEventNotification",
    3: "getAlarmSummary",
    4: "getEnrollmentSummary",
    5: "subscribeCOV",
    6: "atomicReadFile",
    7: "atomicWriteFile",
    8: "addListElement",
    9: "removeListElement",
    10: "createObject",
    11: "deleteObject",
    12: "readProperty",
    13: "readPropertyConditional",
    14: "readPropertyMultiple",
    15: "writeProperty",
    16: "writePropertyMultiple",
    17: "deviceCommunicationControl",
    18: "confirmedPrivateTransfer",
    19: "confirmedTextMessage",
    20: "reinitializeDevice",
    21: "vtOpen",
    22: "vtClose",
    23: "vtData",
    24: "authenticate",
    25: "requestKey",
    26: "readRange",
    27: "lifeSafetyOperation",
    28: "subscribeCOVProperty",
    29: "getEventInformation",
    30: "subscribeCOVPropertyMultiple",
    31: "confirmedCOVNotificationMultiple",
    32: "confirmedAuditNotification",
    33: "auditLogQuery",
}

UNCONFIRMED_SERVICES: dict[int, str] = {
    0: "i-Am",
    1: "i-Have",
    2: "unconfirmedCOVNotification",
    3: "unconfirmedEventNotification",
    4: "unconfirmedPrivateTransfer",
    5: "unconfirmedTextMessage",
    6: "timeSynchronization",
    7: "who-Has",
    8: "who-Is",
    9: "utcTimeSynchronization",
    10: "writeGroup",
    11: "unconfirmedCOVNotificationMultiple",
    12: "unconfirmedAuditNotification",
    13: "who-Am-I",
    14: "you-Are",
}


# service parameters the generated tables do not cover
EXTRA_TABLES: dict[str, dict[int, str]] = {
    "reinitialized-state": {
        0: "coldstart",
        1: "warmstart",
        2: "start-backup",
        3: "end-backup",
        4: "start-restore",
        5: "end-restore",
        6: "abort-restore",
        7: "activate-changes",
    },
    "enable-disable": {0: "enable", 1: "disable", 2: "disable-initiation"},
}


@lru_cache(maxsize=None)
def _tables() -> dict[str, dict[int, str]]:
    raw = json.loads(resources.files("bacsum.codec").joinpath("data/enums.json").read_text("utf-8"))
    out = {table: {int(code): name for code, name in entries.items()} for table, entries in raw.items()}
    out.update(EXTRA_TABLES)
    return out


def enum_name(table: str, code: int) -> str | None:
    """Name for *code* in *table*, or None for unknown/proprietary codes."""
    return _tables()[table].get(code)


def enum_code(table: str, name: str) -> int | None:
    for code, candidate in _tables()[table].items():
        if candidate == name:
            return code
    return None


def object_type_name(code: int) -> str:
    return enum_name("object-type", code) or f"unknown-type-{code}"


def object_type_code(name: str) -> int | None:
    if name.startswith("unknown-type-"):
        suffix = name[len("unknown-type-"):]
        return int(suffix) if suffix.isdigit() else None
    return enum_code("object-type", name)


def property_name(code: int) -> str | None:
    return enum_name("property-identifier", code)


def service_name(confirmed: bool, code: int) -> str | None:
    table = CONFIRMED_SERVICES if confirmed else UNCONFIRMED_SERVICES
    return table.get(code)
