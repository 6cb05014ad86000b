"""Regenerate ``src/bacsum/codec/data/enums.json`` from the bacpypes3 enumerations.

Only needed when the standard's enumerations change; the output is committed.
Requires ``pip install bacpypes3``.
"""

import json
import re
from pathlib import Path

from bacpypes3 import apdu, basetypes

TABLES = {
    "object-type": basetypes.ObjectType,
    "property-identifier": basetypes.PropertyIdentifier,
    "error-class": basetypes.ErrorClass,
    "error-code": basetypes.ErrorCode,
    "abort-reason": apdu.AbortReason,
    "reject-reason": apdu.RejectReason,
    "segmentation": basetypes.Segmentation,
    "engineering-units": basetypes.EngineeringUnits,
    "binary-pv": basetypes.BinaryPV,
    "event-state": basetypes.EventState,
    "reliability": basetypes.Reliability,
}

_KEBAB = re.compile(r"^[a-z0-9]+(-[a-z0-9]+)*$")

OUT = Path(__file__).resolve().parents[1] / "src" / "bacsum" / "codec" / "data" / "enums.json"


def kebab_table(enum_cls) -> dict[str, str]:
    by_code: dict[int, str] = {}
    for name, code in enum_cls._enum_map.items():
        if not _KEBAB.match(name):
            continue
        # prefer the first spelling; aliases come later in the map
        by_code.setdefault(int(code), name)
    return {str(code): by_code[code] for code in sorted(by_code)}


def main() -> None:
    tables = {key: kebab_table(cls) for key, cls in TABLES.items()}
    OUT.write_text(json.dumps(tables, indent=1, sort_keys=False) + "\n", encoding="utf-8")
    for key, table in tables.items():
        print(f"{key}: {len(table)} codes")


if __name__ == "__main__":
    main()
