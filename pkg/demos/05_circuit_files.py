"""
Circuits as JSON files
======================

Every packaged circuit serializes to JSON, which the ``pctc-lab`` command
reads back. Here we write the grandfather loop to a temporary file and run
it through the command-line entry point.
"""
import tempfile
from pathlib import Path

from pctclab.cli import main
from pctclab.experiments import build_grandfather
from pctclab.serialization import parse_circuit, serialize_circuit

text = serialize_circuit(build_grandfather())
print(text)
assert parse_circuit(text) == build_grandfather()

with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "grandfather.json"
    path.write_text(text)
    main(["run", str(path)])
    main(["run", str(path), "--format", "json"])
