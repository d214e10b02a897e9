"""JSON Schemas for the command-line output (draft 2020-12)."""

_DRAFT = "https://json-schema.org/draft/2020-12/schema"

_str = {"type": "string"}
_vec = {"type": "array", "items": _str}
_mat = {"type": "array", "items": _vec}
_cube = {"type": "array", "items": _mat}

_num = {"type": "number"}
_nvec = {"type": "array", "items": _num}
_nmat = {"type": "array", "items": _nvec}
_ncube = {"type": "array", "items": _nmat}

INVARIANTS = {
    "$schema": _DRAFT,
    "title": "InvariantSet",
    "type": "object",
    "required": ["version", "m", "W2", "I2", "W3", "I4", "Hx", "Hm1", "trivializable"],
    "properties": {
        "version": {"const": 1},
        "m": {"type": "integer", "minimum": 2},
        "W2": _mat,
        "I2": _cube,
        "W3": _mat,
        "I4": _mat,
        "Hx": _str,
        "Hm1": _vec,
        "trivializable": {"type": "boolean"},
        "I4_symmetric": {"type": "boolean"},
        "diagnostics": {"type": "array", "items": _str},
    },
    "additionalProperties": False,
}

CONNECTION = {
    "$schema": _DRAFT,
    "title": "ConnectionCoefficients",
    "type": "object",
    "required": ["A", "B", "C", "Gx", "Gm2", "Gm3", "E", "Fm2", "Fm3", "Hx", "Hm1", "Hm2", "Hm3"],
    "properties": {
        "version": {"const": 1},
        "m": {"type": "integer", "minimum": 2},
        **{k: _mat for k in ("A", "B", "C", "Gx")},
        **{k: _cube for k in ("Gm2", "Gm3")},
        **{k: _vec for k in ("E", "Fm2", "Fm3", "Hm1", "Hm2", "Hm3")},
        "Hx": _str,
    },
    "additionalProperties": False,
}

TRIVIALIZABLE = {
    "$schema": _DRAFT,
    "title": "Trivializability verdict",
    "type": "object",
    "required": ["trivializable", "nonzero"],
    "properties": {
        "trivializable": {"type": "boolean"},
        "nonzero": {"type": "array", "items": _str},
        "diagnostics": {"type": "array", "items": _str},
    },
    "additionalProperties": False,
}

EVAL = {
    "$schema": _DRAFT,
    "title": "Numeric invariants at a jet point",
    "type": "object",
    "required": ["point", "W2", "I2", "W3", "I4", "Hx", "Hm1"],
    "properties": {
        "point": _nvec,
        "source": {"enum": ["symbolic", "oracle"]},
        "W2": _nmat,
        "I2": _ncube,
        "W3": _nmat,
        "I4": _nmat,
        "Hx": _num,
        "Hm1": _nvec,
    },
    "additionalProperties": False,
}

CHECK = {
    "$schema": _DRAFT,
    "title": "Self-check report",
    "type": "object",
    "required": ["passed", "residuals", "oracle"],
    "properties": {
        "passed": {"type": "boolean"},
        "residuals": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed"],
                "properties": {"name": _str, "passed": {"type": "boolean"}, "detail": _str},
            },
        },
        "oracle": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["point", "passed", "deviations"],
                "properties": {
                    "point": _nvec,
                    "passed": {"type": "boolean"},
                    "deviations": {"type": "object", "additionalProperties": _num},
                    "error": _str,
                },
            },
        },
    },
    "additionalProperties": False,
}
