"""BACnet packet-file summarization with service and retrieval context."""

from bacsum.codec import decode_packet, filter_bacnet, read_capture, render_packet_text
from bacsum.context import dedupe, enforce_budget, gather_context
from bacsum.evaluation import aggregate, load_ratings
from bacsum.pipeline import PipelineConfig, build_index, load_config, run_explain
from bacsum.registry import annotate, load_registry
from bacsum.services import load_service_kb, lookup_service

__all__ = [
    "PipelineConfig",
    "aggregate",
    "annotate",
    "build_index",
    "decode_packet",
    "dedupe",
    "enforce_budget",
    "filter_bacnet",
    "gather_context",
    "load_config",
    "load_ratings",
    "load_registry",
    "load_service_kb",
    "lookup_service",
    "read_capture",
    "render_packet_text",
    "run_explain",
]
