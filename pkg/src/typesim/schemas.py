"""JSON Schemas for the machine-readable outputs (draft 2020-12)."""

BOUNDS = {
    "type": "object",
    "properties": {k: {"type": "integer", "minimum": 0} for k in "qctv"},
    "required": list("qctv"),
    "additionalProperties": False,
}

_SIDE = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "properties": {"structure": {"type": "string"}, "element": {"type": "string"}},
            "required": ["structure", "element"],
            "additionalProperties": False,
        },
    ]
}

VERDICT = {
    "type": "object",
    "properties": {
        "relation": {"enum": ["lesssim", "approx", "struct-lesssim", "struct-approx"]},
        "left": _SIDE,
        "right": _SIDE,
        "holds": {"type": "boolean"},
        "bounds": BOUNDS,
        "engine": {"type": "string"},
        "fragment": {"enum": ["c", "g"]},
        "justifications": {"type": "array", "items": {"type": "string"}},
        "stabilized": {"type": "boolean"},
        "dominator": {"type": "string"},
        "separating_formula": {"type": "string"},
        "failing_direction": {"enum": ["left-to-right", "right-to-left"]},
        "witness_map": {"type": "object", "additionalProperties": {"type": ["string", "null"]}},
    },
    "required": ["relation", "left", "right", "holds", "bounds", "engine", "fragment", "justifications", "stabilized"],
    "additionalProperties": False,
}

_ROWS = {"type": "array", "items": {"type": "array", "items": {"type": "string"}}}

FINGERPRINT = {
    "type": "object",
    "properties": {
        "index": {"type": "integer", "minimum": 0},
        "context": {"type": "array", "items": {"type": "string"}},
        "left": _ROWS,
        "right": _ROWS,
        "witness": {"type": "string"},
    },
    "required": ["index", "context", "left", "right", "witness"],
    "additionalProperties": False,
}

TYPE = {
    "type": "object",
    "properties": {
        "left": {"type": "string"},
        "right": {"type": "string"},
        "elements": {"type": "array", "items": {"type": "string"}},
        "side": {"enum": ["left", "right", "both"]},
        "bounds": BOUNDS,
        "engine": {"type": "string"},
        "fragment": {"enum": ["c", "g"]},
        "fingerprints": {"type": "array", "items": FINGERPRINT},
    },
    "required": ["left", "right", "elements", "side", "bounds", "engine", "fragment", "fingerprints"],
    "additionalProperties": False,
}

TRIAL_REPORT = {
    "type": "object",
    "properties": {
        "property": {"type": "string"},
        "trials": {"type": "integer", "minimum": 1},
        "ok": {"type": "boolean"},
        "violations": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "trial": {"type": "integer"},
                    "seed": {"type": "integer"},
                    "detail": {"type": "string"},
                    "structures": {"type": "string"},
                },
                "required": ["trial", "seed", "detail", "structures"],
            },
        },
        "params": {"type": "object"},
        "elapsed": {"type": "number"},
    },
    "required": ["property", "trials", "ok", "violations", "params"],
}

SEARCH_RESULT = {
    "type": "object",
    "properties": {
        "property": {"type": "string"},
        "found": {"type": "boolean"},
        "examined": {"type": "integer", "minimum": 0},
        "structures": {"type": ["string", "null"]},
        "elements": {"type": "object"},
        "mapping": {"type": ["object", "null"], "additionalProperties": {"type": "string"}},
        "evidence": {"type": "array", "items": VERDICT},
        "params": {"type": "object"},
    },
    "required": ["property", "found", "examined", "structures", "elements", "mapping", "evidence", "params"],
    "additionalProperties": False,
}

CLASSIFICATION = {
    "type": "object",
    "properties": {
        "signature": {"type": "string"},
        "max_size": {"type": "integer"},
        "bounds": BOUNDS,
        "engine": {"type": "string"},
        "counts": {"type": "object", "additionalProperties": {"type": "object", "additionalProperties": {"type": "integer"}}},
        "structures": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
    },
    "required": ["signature", "max_size", "bounds", "engine", "counts", "structures"],
}

CLI_OUTPUT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "command": {"const": "check"},
                "files": {"type": "array", "items": {"type": "object", "required": ["path", "signature", "structures"]}},
            },
            "required": ["command", "files"],
        },
        {
            "type": "object",
            "properties": {"command": {"const": "type"}, "type": TYPE},
            "required": ["command", "type"],
        },
        {
            "type": "object",
            "properties": {
                "command": {"const": "compare"},
                "verdicts": {"type": "array", "items": VERDICT},
                "matrix": {"type": "object"},
                "verdict": VERDICT,
            },
            "required": ["command"],
            "oneOf": [{"required": ["verdicts"]}, {"required": ["matrix", "verdict"]}],
        },
        {
            "type": "object",
            "properties": {
                "command": {"const": "justify"},
                "pair": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
                "verdict": VERDICT,
                "justifications": {"type": "array", "items": {"type": "string"}},
                "characteristic": {"type": ["array", "null"], "items": {"type": "string"}},
            },
            "required": ["command", "pair"],
        },
        {
            "type": "object",
            "properties": {"command": {"const": "verify"}, "report": TRIAL_REPORT},
            "required": ["command", "report"],
        },
        {
            "type": "object",
            "properties": {
                "command": {"const": "search"},
                "result": SEARCH_RESULT,
                "classification": CLASSIFICATION,
            },
            "required": ["command"],
            "oneOf": [{"required": ["result"]}, {"required": ["classification"]}],
        },
    ],
}
