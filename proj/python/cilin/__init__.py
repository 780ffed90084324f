"""Python access to the cilin hypernym knowledge-graph toolkit.

The heavy lifting happens in the native ``_cilin`` extension; this wrapper turns its
JSON documents into plain Python objects.
"""

import json

from ._cilin import (
    CilinError,
    EmbeddingTable,
    cosine,
    extract_head_word,
    is_acyclic,
    resolve_cycles,
    sense_string,
)
from . import _cilin

PATH_SEPARATOR = "→"

__all__ = [
    "CilinError",
    "EmbeddingTable",
    "PATH_SEPARATOR",
    "build",
    "cosine",
    "extract_head_word",
    "health",
    "is_acyclic",
    "path_entities",
    "query",
    "resolve_cycles",
    "run_suite",
    "schema",
    "sense_string",
]


def build(**config):
    """Run the pipeline and write a store; keyword names follow the CLI flags."""
    return json.loads(_cilin._build(config))


def query(store, name):
    """Entity document, or None when the store does not know the name."""
    body = _cilin._query(str(store), name)
    return None if body is None else json.loads(body)


def schema(store, root=None, depth=3, max_children=20, seed=0):
    return json.loads(_cilin._schema(str(store), root, depth, max_children, seed))


def path_entities(store, path):
    """Entities whose upward chain ends in ``path`` (a list of terms)."""
    return json.loads(_cilin._path_entities(str(store), PATH_SEPARATOR.join(path)))["entities"]


def health(store):
    return json.loads(_cilin._health(str(store)))


def run_suite(name, seed=0):
    return json.loads(_cilin._run_suite(name, seed))
