"""Structured node identifiers.

Nodes are plain tuples so they stay cheap to hash, compare, and sort:

    ("s",)                  source
    ("t",)                  sink
    ("h", level, sub)       highway node, level in 1..floor(kappa)
    ("p", path, sub, pos)   path node, pos in 1..phi'_sub

Text labels ("S", "T", "H:2:-10", "P:3:-12:1") are the wire format used by
the graph JSON files.
"""

from __future__ import annotations

NodeId = tuple

SOURCE: NodeId = ("s",)
SINK: NodeId = ("t",)


def highway(level: int, sub: int) -> NodeId:
    return ("h", level, sub)


def pathnode(path: int, sub: int, pos: int) -> NodeId:
    return ("p", path, sub, pos)


def is_highway(node: NodeId) -> bool:
    return node[0] == "h"


def is_pathnode(node: NodeId) -> bool:
    return node[0] == "p"


def format_label(node: NodeId) -> str:
    tag = node[0]
    if tag == "s":
        return "S"
    if tag == "t":
        return "T"
    if tag == "h":
        return f"H:{node[1]}:{node[2]}"
    if tag == "p":
        return f"P:{node[1]}:{node[2]}:{node[3]}"
    # ad-hoc graphs may use arbitrary strings as nodes
    return str(node)


def parse_label(label: str):
    if label == "S":
        return SOURCE
    if label == "T":
        return SINK
    parts = label.split(":")
    if parts[0] == "H":
        if len(parts) != 3:
            raise ValueError(f"malformed highway label: {label!r}")
        return highway(int(parts[1]), int(parts[2]))
    if parts[0] == "P":
        if len(parts) != 4:
            raise ValueError(f"malformed path label: {label!r}")
        return pathnode(int(parts[1]), int(parts[2]), int(parts[3]))
    # ad-hoc graphs use bare strings as nodes; they round-trip unchanged
    return label
