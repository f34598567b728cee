"""What the extraction layer sends and how it reads answers back.

No network needed: shows the generated system prompt, round-trips a few
completion shapes through the parser, and demonstrates the failure reasons
the retry policy distinguishes.
"""

import json

import numpy as np

from vecont.dataset import synthesize
from vecont.defaults import DEFAULT_FORMULATIONS, default_synth_spec
from vecont.errors import MissingDimension, PositionIndexOutOfRange
from vecont.extraction import build_system_prompt, parse_position, render_position
from vecont.ontology import fit_edges

records = synthesize(default_synth_spec(songs_per_genre=60, seed=3))
ontology = fit_edges(np.asarray([r.features for r in records]), n=6)

prompt = build_system_prompt(ontology)
print("system prompt sent with every query:")
print(prompt[:400] + " ...\n")

print("three formulation families for the same genre:")
for fid in ("direct-01", "mood-02", "action-05"):
    f = next(f for f in DEFAULT_FORMULATIONS if f.id == fid)
    print(f"  {fid:>10}: {f.render('jazz')!r}")

position = (0, 0, 0, 3, 4, 1, 0, 0)
print(f"\na completion in dict form: {render_position(position, ontology)}")
print(f"parses to {parse_position(render_position(position, ontology), ontology)}")

fenced = f"Sure!\n```json\n{render_position(position, ontology)}\n```"
print(f"fenced/prose-wrapped output parses too: {parse_position(fenced, ontology)}")
print(f"bare list output parses too: {parse_position('[5,5,5,5,5,5,5,5]', ontology)}")

bad = json.dumps({"location": {"danceability": 9}})
try:
    parse_position(bad, ontology)
except PositionIndexOutOfRange as exc:
    print(f"\nout-of-range index is a distinct failure: {exc}")
try:
    parse_position(json.dumps({"location": {"danceability": 1}}), ontology)
except MissingDimension as exc:
    print(f"missing dimension is a distinct failure: {exc}")
