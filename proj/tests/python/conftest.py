import json
import os
import pathlib
import shutil
import subprocess

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
TOY = pathlib.Path(os.environ.get("CILIN_TOY_FIXTURE_DIR", ROOT / "tests" / "fixtures" / "toy"))
SCHEMAS = pathlib.Path(os.environ.get("CILIN_SCHEMA_DIR", ROOT / "schemas"))
CREATED = "2024-01-01T00:00:00Z"


def resources():
    return {
        "snippets": TOY / "snippets.jsonl",
        "tags": TOY / "tags.tsv",
        "dictionary": TOY / "dictionary.txt",
        "embeddings": TOY / "embeddings.txt",
        "triples": TOY / "triples.tsv",
        "seed_pairs": TOY / "seed_pairs.tsv",
        "labeled_pairs": TOY / "labeled_pairs.tsv",
    }


def resource_flags():
    flags = []
    for key, path in resources().items():
        flags += ["--" + key.replace("_", "-"), str(path)]
    return flags


@pytest.fixture(scope="session")
def cli_bin():
    path = os.environ.get("CILIN_BIN") or shutil.which("cilin")
    if not path:
        pytest.skip("cilin binary not available")
    return path


@pytest.fixture(scope="session")
def store(tmp_path_factory, cli_bin):
    out = tmp_path_factory.mktemp("toy") / "store"
    subprocess.run(
        [cli_bin, "build", "--entities", str(TOY / "entities.txt"), *resource_flags(),
         "--out", str(out), "--created", CREATED],
        check=True, capture_output=True)
    return out


@pytest.fixture(scope="session")
def schemas():
    return {p.name: json.loads(p.read_text(encoding="utf-8")) for p in SCHEMAS.glob("*.schema.json")}
