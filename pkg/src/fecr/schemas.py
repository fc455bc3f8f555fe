"""JSON schemas for the documents written by ``fecr ... --json``."""

_num = {"type": ["number", "null"]}

_row = {
    "type": "object",
    "required": ["name", "mean", "sd", "2.5%", "25%", "50%", "75%", "97.5%", "rhat"],
    "properties": {
        "name": {"type": "string"},
        "mean": _num, "sd": _num,
        "2.5%": _num, "25%": _num, "50%": _num, "75%": _num, "97.5%": _num,
        "rhat": _num,
    },
}

FIT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fecr fit report",
    "type": "object",
    "required": ["model", "config", "summary", "warnings", "fecr_probs"],
    "properties": {
        "model": {"type": "string"},
        "description": {"type": "string"},
        "config": {
            "type": "object",
            "required": ["nsamples", "nburnin", "thinning", "nchain", "adapt_delta", "seed"],
        },
        "summary": {"type": "array", "minItems": 3, "items": _row},
        "rhat_max": _num,
        "divergences": {"type": "integer", "minimum": 0},
        "warnings": {"type": "array", "items": {"type": "string"}},
        "fecr_probs": {
            "type": ["object", "null"],
            "required": ["threshold", "percent"],
            "properties": {
                "threshold": {"type": "number"},
                "percent": {"type": "number", "minimum": 0, "maximum": 100},
            },
        },
        "priors": {"type": "array", "items": {"type": "string"}},
        "data": {"type": "object"},
    },
}

_fecrt_result = {
    "type": "object",
    "required": ["reduction_pct", "ci", "method", "B", "seed"],
    "properties": {
        "reduction_pct": {"type": "number", "maximum": 100},
        "ci": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "method": {"enum": ["asymptotic_t", "bootstrap"]},
        "B": {"type": ["integer", "null"]},
        "seed": {"type": ["integer", "null"]},
        "level": {"type": "number"},
    },
}

FECRT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fecr fecrt report",
    "type": "object",
    "required": ["n_control", "n_treatment", "results", "errors"],
    "properties": {
        "n_control": {"type": "integer"},
        "n_treatment": {"type": "integer"},
        "paired": {"type": "boolean"},
        "results": {"type": "array", "items": _fecrt_result},
        "errors": {"type": "array", "items": {"type": "string"}},
    },
}

ELICIT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fecr elicit report",
    "type": "object",
    "required": ["family", "target", "params", "prior"],
    "properties": {
        "family": {"enum": ["gamma", "beta"]},
        "target": {"enum": ["mu", "delta"]},
        "params": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2, "maxItems": 2},
        "prior": {"type": "string"},
        "statements": {"type": "object"},
    },
}

SIMULATE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fecr simulate report",
    "type": "object",
    "required": ["config", "columns"],
    "properties": {
        "config": {"type": "object", "required": ["n", "pre_mean", "delta", "kappa", "f", "paired", "phi", "seed"]},
        "columns": {
            "type": "object",
            "required": ["obsPre", "masterPre", "truePre", "obsPost", "masterPost", "truePost"],
            "additionalProperties": {"type": "array", "items": {"type": "number"}},
        },
    },
}

DEMO = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fecr demo report",
    "type": "object",
    "required": ["simulate", "fit", "fecr_probs", "fecrt"],
    "properties": {
        "simulate": SIMULATE,
        "fit": FIT,
        "fecr_probs": {"type": "number"},
        "fecrt": FECRT,
    },
}

SCHEMAS = {"fit": FIT, "fecrt": FECRT, "elicit": ELICIT, "simulate": SIMULATE, "demo": DEMO}
