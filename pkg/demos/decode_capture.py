"""
Decoding a BACnet/IP capture
============================

Read a pcap, keep the BACnet/IP datagrams, decode them and print the
formatted packet text an analyst (or a language model) would read.
"""

from pathlib import Path

from bacsum import annotate, decode_packet, filter_bacnet, load_registry, read_capture, render_packet_text

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"

# the mixed capture holds an ARP, a TCP segment and a DNS query next to two BACnet frames
frames = read_capture((FIXTURES / "mixed.pcap").read_bytes())
print(len(frames), "UDP frames")
bacnet = filter_bacnet(frames)
print(len(bacnet), "BACnet/IP frames")

packets = [decode_packet(f) for f in bacnet]
for p in packets:
    print(p.apdu.pdu_type.label, p.apdu.service_choice, p.apdu.object_refs)

# the registry maps (object type, instance) to a site-specific name
registry = load_registry(FIXTURES / "registry.json")
print(render_packet_text([annotate(p, registry) for p in packets]))

# with addresses and OUIs
print(render_packet_text(packets, link_header=True))
