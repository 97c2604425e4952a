"""JSON Schemas (draft 2020-12) for the files and reports the CLI writes.

Stable keys only; extra detail fields are allowed where marked.
"""

RATIONAL = {"type": "string", "pattern": r"^-?\d+/\d+$"}
OUTCOME = {"oneOf": [{"type": "number"}, {"type": "string"}]}

LOTTERY = {
    "type": "object",
    "required": ["atoms"],
    "additionalProperties": False,
    "properties": {
        "atoms": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["x", "p"],
                "additionalProperties": False,
                "properties": {"x": OUTCOME, "p": RATIONAL},
            },
        }
    },
}

AXIOM_REPORT = {
    "type": "object",
    "required": ["axiom", "trials", "verdict", "violations", "details", "seed"],
    "additionalProperties": False,
    "properties": {
        "axiom": {"enum": ["weak_order", "independence", "segmental_continuity",
                           "weakstar_closedness", "sequential_continuity", "mixture_laws"]},
        "trials": {"type": "integer", "minimum": 0},
        "verdict": {"enum": ["pass (budget exhausted)", "falsified"]},
        "seed": {"type": ["integer", "null"]},
        "violations": {
            "type": "array",
            "items": {"type": "object", "required": ["check"], "properties": {"check": {"type": "string"}}},
        },
        "details": {"type": "object"},
    },
}

CALIBRATION_TABLE = {
    "type": "object",
    "required": ["anchors", "points"],
    "properties": {
        "anchors": {
            "oneOf": [
                {"type": "null"},
                {"type": "object", "required": ["x_star", "y_star"],
                 "properties": {"x_star": {"type": "number"}, "y_star": {"type": "number"}}},
            ]
        },
        "points": {
            "type": "array",
            "items": {"type": "object", "required": ["x", "u"], "additionalProperties": False,
                      "properties": {"x": {"type": "number"}, "u": {"type": "number"}}},
        },
    },
}

ESCAPE_NET_REPORT = {
    "type": "object",
    "required": ["net", "x_star", "x0", "closedness_falsified", "x0_preferred_to_x_star"],
    "properties": {
        "net": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n", "x_n", "weights", "expected_utility", "dudley_to_limit"],
                "properties": {
                    "n": {"type": "integer", "minimum": 0},
                    "x_n": OUTCOME,
                    "weights": {"type": "object", "required": ["x_star", "x_n"],
                                "properties": {"x_star": RATIONAL, "x_n": RATIONAL}},
                    "expected_utility": {"type": "number"},
                    "dudley_to_limit": {"type": "number", "minimum": 0},
                },
            },
        },
        "closedness_falsified": {"type": "boolean"},
        "x0_preferred_to_x_star": {"type": "boolean"},
    },
}

EXHAUSTION_REPORT = {
    "type": "object",
    "required": ["exhaustion"],
    "properties": {
        "exhaustion": {"type": "object", "required": ["levels", "space", "label"]},
        "verification": {
            "type": "object",
            "required": ["ok", "closed", "nested", "covered", "coverage_mode", "failure"],
        },
    },
}

ENVELOPE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "version", "config", "result", "exit_code", "timestamp"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": ["calibrate", "check", "demo", "exhaust"]},
        "version": {"type": "string"},
        "config": {"type": "object", "required": ["command"]},
        "result": {"type": "object"},
        "exit_code": {"enum": [0, 1, 2]},
        "timestamp": {"type": "string"},
    },
}

RESULT_SCHEMAS = {
    "check": AXIOM_REPORT,
    "exhaust": EXHAUSTION_REPORT,
}


def schema_for(report: dict) -> dict:
    """The full schema for a CLI report, with the result schema plugged in."""
    result = RESULT_SCHEMAS.get(report.get("command"))
    if report.get("command") == "calibrate":
        result = CALIBRATION_TABLE
    elif report.get("command") == "demo" and report.get("config", {}).get("demo") == "lemma5":
        result = ESCAPE_NET_REPORT
    if result is None:
        return ENVELOPE
    return {**ENVELOPE, "properties": {**ENVELOPE["properties"], "result": result}}
