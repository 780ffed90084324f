import json
import socket
import subprocess
import time
import urllib.error
import urllib.parse
import urllib.request

import jsonschema
import pytest

from conftest import resource_flags


def run(cli_bin, *args):
    return subprocess.run([cli_bin, *args], capture_output=True, text=True)


def test_exit_codes(cli_bin, store, tmp_path):
    assert run(cli_bin, "query", "苹果", "--store", str(store)).returncode == 0
    assert run(cli_bin, "query", "梨", "--store", str(store)).returncode == 3
    assert run(cli_bin, "query", "苹果", "--store", str(tmp_path / "none")).returncode == 4
    bad = run(cli_bin, "query")
    assert bad.returncode == 2
    assert bad.stderr.startswith("cilin: usage:")


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def get(base, target):
    try:
        with urllib.request.urlopen(base + target, timeout=30) as r:
            return r.status, json.loads(r.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read())


@pytest.fixture
def server(cli_bin, store):
    port = free_port()
    proc = subprocess.Popen([cli_bin, "serve", "--store", str(store), "--addr", f"127.0.0.1:{port}",
                             *resource_flags()], stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    line = proc.stdout.readline()
    assert line.startswith("listening on http://127.0.0.1:"), proc.stderr.read()
    base = f"http://127.0.0.1:{port}"
    for _ in range(100):
        try:
            urllib.request.urlopen(base + "/healthz", timeout=1)
            break
        except OSError:
            time.sleep(0.05)
    yield base, port
    proc.terminate()
    assert proc.wait(timeout=10) == 0


def quote(text):
    return urllib.parse.quote(text, safe="")


def test_endpoints_match_schemas(server, schemas, cli_bin, store):
    base, _ = server
    cases = [
        ("/api/entity/" + quote("苹果"), 200, "entity.schema.json"),
        ("/api/schema", 200, "schema-tree.schema.json"),
        ("/api/schema?root=" + quote("物") + "&depth=2", 200, "schema-tree.schema.json"),
        ("/api/path-entities?path=" + quote("水果→食品→物"), 200, "path-entities.schema.json"),
        ("/healthz", 200, "health.schema.json"),
        ("/api/schema?depth=11", 400, "error.schema.json"),
        ("/api/schema?max_children=101", 400, "error.schema.json"),
        ("/api/entity/" + quote("从未出现"), 404, "error.schema.json"),
    ]
    for target, status, schema in cases:
        code, doc = get(base, target)
        assert code == status, target
        jsonschema.validate(doc, schemas[schema])

    offline = json.loads(run(cli_bin, "query", "苹果", "--store", str(store)).stdout)
    assert get(base, "/api/entity/" + quote("苹果"))[1] == offline


def test_generation_on_demand(server, cli_bin, store, schemas):
    base, _ = server
    code, doc = get(base, "/api/entity/" + quote("梨"))
    assert code == 200
    jsonschema.validate(doc, schemas["entity.schema.json"])
    assert doc["generated"] is True
    offline = run(cli_bin, "query", "梨", "--generate", "--store", str(store), *resource_flags())
    assert json.loads(offline.stdout) == doc


def test_occupied_port_is_reported(server, cli_bin, store):
    _, port = server
    second = run(cli_bin, "serve", "--store", str(store), "--addr", f"127.0.0.1:{port}")
    assert second.returncode == 4
    assert "bind" in second.stderr
