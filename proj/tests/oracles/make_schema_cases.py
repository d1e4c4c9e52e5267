#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Generates 200 (schema, instance) pairs labelled by the reference Draft 7
validator from the `jsonschema` package."""
import json
import pathlib
import random

import jsonschema

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "schema_cases.json"

SCHEMAS = [
    {"type": "object", "properties": {"query": {"type": "string"}, "k": {"type": "integer", "minimum": 1, "maximum": 20}},
     "required": ["query"], "additionalProperties": False},
    {"type": "object", "properties": {"expression": {"type": "string", "minLength": 1}}, "required": ["expression"]},
    {"type": "object", "properties": {"urls": {"type": "array", "items": {"type": "string", "pattern": "^https?://"}, "minItems": 1, "maxItems": 3}},
     "required": ["urls"]},
    {"type": "object", "properties": {"mode": {"enum": ["fast", "slow", None]}, "level": {"const": 3}}},
    {"type": "array", "items": {"type": "number", "multipleOf": 0.5}, "uniqueItems": True},
    {"type": "string", "maxLength": 4},
    {"type": ["integer", "null"], "exclusiveMinimum": 0, "exclusiveMaximum": 10},
    {"anyOf": [{"type": "string"}, {"type": "integer", "minimum": 100}]},
    {"oneOf": [{"type": "integer", "multipleOf": 3}, {"type": "integer", "multipleOf": 5}]},
    {"allOf": [{"type": "object", "required": ["a"]}, {"type": "object", "required": ["b"]}]},
    {"not": {"type": "boolean"}},
    {"type": "object", "patternProperties": {"^x_": {"type": "integer"}}, "additionalProperties": {"type": "string"}},
    {"type": "object", "minProperties": 1, "maxProperties": 2},
    {"type": "array", "contains": {"type": "string", "const": "needle"}},
    {"type": "array", "items": [{"type": "string"}, {"type": "integer"}], "additionalItems": False},
    {"type": "object", "properties": {"nested": {"type": "object", "properties": {"deep": {"type": "array", "items": {"type": "boolean"}}},
                                                 "required": ["deep"]}}, "required": ["nested"]},
    {"type": "integer"},
    {"type": "number", "minimum": -1.5, "maximum": 1.5},
    {"type": "object", "properties": {"code": {"type": "string"}, "timeout": {"type": "number", "exclusiveMinimum": 0}},
     "required": ["code"], "additionalProperties": False},
    {"type": "string", "pattern": "^[a-z_][a-z0-9_]*$", "minLength": 2},
]

ATOMS = [None, True, False, 0, 1, 2, 3, 5, 6, 7, 9, 10, 15, 100, 250, -1, -2.0, 0.5, 1.5, 2.25, 3.0, "", "a", "ab", "abcd", "abcde",
         "needle", "fast", "slow", "snake_case", "Bad-Name", "http://x.org", "ftp://y", "héllo", "日本"]


def random_instance(rng, depth=0):
    r = rng.random()
    if depth > 2 or r < 0.5:
        return rng.choice(ATOMS)
    if r < 0.75:
        return [random_instance(rng, depth + 1) for _ in range(rng.randint(0, 4))]
    keys = ["query", "k", "expression", "urls", "mode", "level", "a", "b", "x_1", "x_2", "other", "nested", "deep", "code", "timeout"]
    return {k: random_instance(rng, depth + 1) for k in rng.sample(keys, rng.randint(0, 4))}


def targeted(schema_index):
    # Hand-picked instances that hit each schema's edge cases.
    return {
        0: [{"query": "x"}, {"query": "x", "k": 20}, {"query": "x", "k": 21}, {"k": 1}, {"query": "x", "extra": 1}, {"query": 3},
            {"query": "x", "k": 2.0}, {"query": "x", "k": 2.5}],
        1: [{"expression": ""}, {"expression": "1+1"}, {}],
        2: [{"urls": []}, {"urls": ["http://a"]}, {"urls": ["ftp://a"]}, {"urls": ["http://a", "https://b", "http://c", "http://d"]}],
        3: [{"mode": None}, {"mode": "medium"}, {"level": 3.0}, {"level": "3"}],
        4: [[0.5, 1.0], [0.5, 0.5], [0.3], []],
        5: ["abcd", "abcde", "日本語!", "日本語!!"],
        6: [None, 0, 10, 5, 9.0, 9.5],
        7: ["s", 99, 100, 1.5e2],
        8: [15, 9, 10, 7],
        9: [{"a": 1}, {"a": 1, "b": 2}, {"b": 1}],
        10: [True, 1, None],
        11: [{"x_1": 2, "y": "s"}, {"x_1": "s"}, {"y": 3}],
        12: [{}, {"a": 1}, {"a": 1, "b": 2, "c": 3}],
        13: [["needle"], ["hay"], []],
        14: [["a", 1], ["a", 1, 2], [1, "a"], ["a"]],
        15: [{"nested": {"deep": [True]}}, {"nested": {"deep": [1]}}, {"nested": {}}],
    }.get(schema_index, [])


def main():
    rng = random.Random(7)
    cases = []
    for i, schema in enumerate(SCHEMAS):
        jsonschema.Draft7Validator.check_schema(schema)
        for inst in targeted(i):
            cases.append((i, inst))
    while len(cases) < 200:
        cases.append((rng.randrange(len(SCHEMAS)), random_instance(rng)))
    cases = cases[:200]
    out = []
    for i, inst in cases:
        v = jsonschema.Draft7Validator(SCHEMAS[i])
        out.append({"schema": SCHEMAS[i], "instance": inst, "valid": v.is_valid(inst)})
    OUT.write_text(json.dumps(out, indent=1, ensure_ascii=False) + "\n")
    print(f"{len(out)} cases, {sum(c['valid'] for c in out)} valid")


if __name__ == "__main__":
    main()
