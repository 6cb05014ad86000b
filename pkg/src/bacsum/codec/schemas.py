"""Parameter layouts for the services the renderer labels by name.

Each layout maps context tag numbers to a :class:`Field`; application-tagged
sequences (I-Am, Error) are described positionally. Services without a layout
still decode, with parameters labelled ``Context Tag N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from bacsum.codec.types import PduType


@dataclass(frozen=True)
class Field:
    label: str
    kind: str
    children: "Layout | None" = None
    enum_table: str | None = None


@dataclass(frozen=True)
class Layout:
    context: dict[int, Field] = field(default_factory=dict)
    positional: tuple[Field, ...] = ()


EMPTY = Layout()

OBJECT = Field("ObjectIdentifier", "object")
PROPERTY = Field("Property Identifier", "property")
ARRAY_INDEX = Field("Property Array Index", "unsigned")
VALUE = Field("Property Value", "value")
PRIORITY = Field("Priority", "unsigned")

ERROR_PAIR = Layout(positional=(
    Field("Error Class", "error-class", enum_table="error-class"),
    Field("Error Code", "error-code", enum_table="error-code"),
))

_PROPERTY_VALUES = Field("List of Values", "list", Layout({0: PROPERTY, 1: ARRAY_INDEX, 2: VALUE, 3: PRIORITY}))
_PROPERTY_REFERENCE = Layout({0: PROPERTY, 1: ARRAY_INDEX})

_COV_NOTIFICATION = Layout({
    0: Field("Subscriber Process Identifier", "unsigned"),
    1: Field("Initiating Device Identifier", "object"),
    2: Field("Monitored Object Identifier", "object"),
    3: Field("Time Remaining", "unsigned"),
    4: _PROPERTY_VALUES,
})

_SUBSCRIBE_COV = {
    0: Field("Subscriber Process Identifier", "unsigned"),
    1: Field("Monitored Object Identifier", "object"),
    2: Field("Issue Confirmed Notifications", "boolean"),
    3: Field("Lifetime", "unsigned"),
}

CONFIRMED_REQUEST: dict[int, Layout] = {
    0: Layout({
        0: Field("Acknowledging Process Identifier", "unsigned"),
        1: Field("Event Object Identifier", "object"),
        2: Field("Event State Acknowledged", "enumerated", enum_table="event-state"),
        4: Field("Acknowledgment Source", "string"),
    }),
    1: _COV_NOTIFICATION,
    5: Layout(_SUBSCRIBE_COV),
    10: Layout({
        0: Field("Object Specifier", "list", Layout({
            0: Field("Object Type", "enumerated", enum_table="object-type"),
            1: OBJECT,
        })),
        1: _PROPERTY_VALUES,
    }),
    11: Layout(positional=(OBJECT,)),
    12: Layout({0: OBJECT, 1: PROPERTY, 2: ARRAY_INDEX}),
    14: Layout({0: OBJECT, 1: Field("List of Property References", "list", _PROPERTY_REFERENCE)}),
    15: Layout({0: OBJECT, 1: PROPERTY, 2: ARRAY_INDEX, 3: VALUE, 4: PRIORITY}),
    16: Layout({0: OBJECT, 1: Field("List of Properties", "list", _PROPERTY_VALUES.children)}),
    17: Layout({
        0: Field("Time Duration", "unsigned"),
        1: Field("Enable Disable", "enumerated", enum_table="enable-disable"),
        2: Field("Password", "string"),
    }),
    20: Layout({
        0: Field("Reinitialized State of Device", "enumerated", enum_table="reinitialized-state"),
        1: Field("Password", "string"),
    }),
    26: Layout({0: OBJECT, 1: PROPERTY, 2: ARRAY_INDEX}),
    28: Layout({
        **_SUBSCRIBE_COV,
        4: Field("Monitored Property", "list", _PROPERTY_REFERENCE),
        5: Field("COV Increment", "real"),
    }),
}

UNCONFIRMED_REQUEST: dict[int, Layout] = {
    0: Layout(positional=(
        OBJECT,
        Field("Max APDU Length Accepted", "unsigned"),
        Field("Segmentation Supported", "enumerated", enum_table="segmentation"),
        Field("Vendor ID", "unsigned"),
    )),
    1: Layout(positional=(
        Field("Device Identifier", "object"),
        OBJECT,
        Field("Object Name", "string"),
    )),
    2: _COV_NOTIFICATION,
    6: Layout(positional=(Field("Date", "date"), Field("Time", "time"))),
    7: Layout({
        0: Field("Device Instance Range Low Limit", "unsigned"),
        1: Field("Device Instance Range High Limit", "unsigned"),
        2: OBJECT,
        3: Field("Object Name", "string"),
    }),
    8: Layout({
        0: Field("Device Instance Range Low Limit", "unsigned"),
        1: Field("Device Instance Range High Limit", "unsigned"),
    }),
    9: Layout(positional=(Field("Date", "date"), Field("Time", "time"))),
}

COMPLEX_ACK: dict[int, Layout] = {
    12: Layout({0: OBJECT, 1: PROPERTY, 2: ARRAY_INDEX, 3: VALUE}),
    14: Layout({0: OBJECT, 1: Field("List of Results", "list", Layout({
        2: PROPERTY,
        3: ARRAY_INDEX,
        4: VALUE,
        5: Field("Property Access Error", "list", ERROR_PAIR),
    }))}),
    26: Layout({0: OBJECT, 1: PROPERTY, 2: ARRAY_INDEX}),
}

# the plain pair covers most services; constructed errors (writePropertyMultiple,
# createObject, ...) wrap it in context tag 0 and add a failing reference
ERROR = Layout(
    context={
        0: Field("Error", "list", ERROR_PAIR),
        1: Field("First Failed Write Attempt", "list", Layout({0: OBJECT, 1: PROPERTY, 2: ARRAY_INDEX})),
    },
    positional=ERROR_PAIR.positional,
)


def layout_for(pdu_type: PduType, service: int | None) -> Layout:
    if pdu_type is PduType.ERROR:
        return ERROR
    table = {
        PduType.CONFIRMED_REQUEST: CONFIRMED_REQUEST,
        PduType.UNCONFIRMED_REQUEST: UNCONFIRMED_REQUEST,
        PduType.COMPLEX_ACK: COMPLEX_ACK,
    }.get(pdu_type)
    if table is None or service is None:
        return EMPTY
    return table.get(service, EMPTY)
